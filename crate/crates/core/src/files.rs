//! JSON file schemas: model spaces, groups, space forms and star
//! catalogs. Numbers are written with shortest round-trip precision, so
//! files reproduce the in-memory values exactly.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cosmos::{Star, StarCatalog};
use crate::error::{Error, Result};
use crate::group::{finite_spherical_group, DiscreteGroup, GroupKind, SphericalGroupKind};
use crate::isometry::{left_twist, Isometry};
use crate::model::ModelSpace;
use crate::quat::Quaternion;
use crate::quotient::{verify_space_form, VerifyOutcome};

/// One generator in a group file: a unit quaternion (left twist on the
/// unit 3-sphere), an ambient matrix, or an affine pair for flat
/// spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorJson {
    Quaternion([f64; 4]),
    Matrix(Vec<Vec<f64>>),
    Affine { a: Vec<Vec<f64>>, b: Vec<f64> },
}

/// Group file: `kind` is `finite`, `lattice`, `affine-flat`, or one of
/// the named spherical families (`C<m>`, `D<m>`, `2T`, `2O`, `2I`), in
/// which case generators may be omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub kind: String,
    #[serde(default)]
    pub generators: Vec<GeneratorJson>,
    #[serde(default)]
    pub max_word_length: Option<usize>,
    /// Optional embedding space; required when generators are given as
    /// plain matrices.
    #[serde(default)]
    pub space: Option<ModelSpace>,
}

/// Parse a named spherical family: `C8`, `D3`, `2T`, `2O`, `2I`.
pub fn parse_spherical_kind(s: &str) -> Option<SphericalGroupKind> {
    match s {
        "2T" | "2t" => Some(SphericalGroupKind::BinaryTetrahedral),
        "2O" | "2o" => Some(SphericalGroupKind::BinaryOctahedral),
        "2I" | "2i" => Some(SphericalGroupKind::BinaryIcosahedral),
        _ => {
            if s.len() < 2 || !s.is_char_boundary(1) {
                return None;
            }
            let (prefix, digits) = s.split_at(1);
            let m: u32 = digits.parse().ok()?;
            match prefix {
                "C" | "c" => Some(SphericalGroupKind::Cyclic(m)),
                "D" | "d" => Some(SphericalGroupKind::BinaryDihedral(m)),
                _ => None,
            }
        }
    }
}

fn parse_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument {
            what: "generator matrix must be square".into(),
        });
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m)
}

impl GroupJson {
    /// Build the domain group, inferring the space when possible. A
    /// `space_hint` (e.g. from an enclosing form file) overrides the
    /// inline `space` field.
    pub fn to_group(&self, space_hint: Option<ModelSpace>) -> Result<(ModelSpace, DiscreteGroup)> {
        if let Some(kind) = parse_spherical_kind(&self.kind) {
            let group = finite_spherical_group(kind)?;
            let space = *group.space();
            return Ok((space, group));
        }
        let kind = match self.kind.as_str() {
            "finite" => GroupKind::Finite,
            "lattice" => GroupKind::Lattice,
            "affine-flat" => GroupKind::AffineFlat,
            other => {
                return Err(Error::InvalidArgument {
                    what: format!("unknown group kind `{other}`"),
                })
            }
        };
        let space = space_hint.or(self.space).or_else(|| self.infer_space());
        let space = space.ok_or_else(|| Error::InvalidArgument {
            what: "group file needs a `space` field for matrix generators".into(),
        })?;
        let gens = self
            .generators
            .iter()
            .map(|g| match g {
                GeneratorJson::Quaternion(q) => left_twist(Quaternion::from_array(*q)),
                GeneratorJson::Matrix(rows) => {
                    Isometry::from_matrix(space, parse_matrix(rows)?)
                }
                GeneratorJson::Affine { a, b } => Isometry::flat(
                    space,
                    parse_matrix(a)?,
                    DVector::from_row_slice(b),
                ),
            })
            .collect::<Result<Vec<_>>>()?;
        let group = DiscreteGroup::new(space, kind, gens, self.max_word_length)?;
        Ok((space, group))
    }

    fn infer_space(&self) -> Option<ModelSpace> {
        for g in &self.generators {
            match g {
                GeneratorJson::Quaternion(_) => {
                    return ModelSpace::spherical(3, 1.0).ok();
                }
                GeneratorJson::Affine { b, .. } => {
                    return ModelSpace::flat(b.len()).ok();
                }
                GeneratorJson::Matrix(_) => continue,
            }
        }
        None
    }
}

/// Serialize an isometry as a group-file generator.
pub fn generator_json(iso: &Isometry) -> GeneratorJson {
    if iso.space().is_flat() {
        let r = iso.rotation_block();
        GeneratorJson::Affine {
            a: (0..r.nrows())
                .map(|i| r.row(i).iter().copied().collect())
                .collect(),
            b: iso.translation_part().iter().copied().collect(),
        }
    } else {
        let m = iso.matrix();
        GeneratorJson::Matrix(
            (0..m.nrows())
                .map(|i| m.row(i).iter().copied().collect())
                .collect(),
        )
    }
}

/// Space-form file: space, group, displacement bound, optional
/// Dirichlet base point (defaults to the model base point).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FormJson {
    pub space: ModelSpace,
    pub group: GroupJson,
    pub r: f64,
    #[serde(default)]
    pub base: Option<Vec<f64>>,
}

impl FormJson {
    /// Assemble and verify the space form.
    pub fn to_form(&self) -> Result<VerifyOutcome> {
        let (space, group) = self.group.to_group(Some(self.space))?;
        if space != self.space {
            return Err(Error::SpaceMismatch);
        }
        let base = match &self.base {
            Some(b) => Some(space.point_from(b)?),
            None => None,
        };
        verify_space_form(space, group, self.r, base)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StarJson {
    pub id: String,
    pub pos: Vec<f64>,
    pub lum: f64,
}

/// Star-catalog file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogJson {
    pub stars: Vec<StarJson>,
}

impl CatalogJson {
    pub fn to_catalog(&self, space: &ModelSpace) -> Result<StarCatalog> {
        let stars = self
            .stars
            .iter()
            .map(|s| {
                Ok(Star {
                    id: s.id.clone(),
                    pos: space.point_from(&s.pos)?,
                    luminosity: s.lum,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        StarCatalog::new(stars)
    }
}
