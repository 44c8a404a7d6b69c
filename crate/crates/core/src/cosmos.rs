//! Observational signatures of a multiply connected space: repeated
//! (ghost) images of a source along distinct geodesics, the volume
//! criterion against a star system of known extent, curvature-radius
//! bounds from parallax measurements, and anisotropy of an image-summed
//! Newtonian force.
//!
//! Two modeling choices are interpretations rather than settled
//! physics: fluxes divide the source luminosity by the geodesic-sphere
//! area (the minimal geometric photometry, inverse-square in the flat
//! case), and the gravitational anisotropy is a plain Newtonian sum
//! over images with a fixed shell ordering.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupKind, LatticeBasis};
use crate::model::{AmbientPoint, Curvature, ModelSpace};
use crate::quotient::SpaceForm;

/// A light source in the fundamental domain.
#[derive(Debug, Clone)]
pub struct Star {
    pub id: String,
    pub pos: AmbientPoint,
    pub luminosity: f64,
}

/// A catalog of sources with unique ids.
#[derive(Debug, Clone)]
pub struct StarCatalog {
    stars: Vec<Star>,
}

impl StarCatalog {
    pub fn new(stars: Vec<Star>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for s in &stars {
            if !seen.insert(s.id.clone()) {
                return Err(Error::DuplicateStarId { id: s.id.clone() });
            }
            if s.luminosity.is_nan() || s.luminosity <= 0.0 {
                return Err(Error::InvalidArgument {
                    what: format!("star `{}` has non-positive luminosity", s.id),
                });
            }
        }
        Ok(Self { stars })
    }

    pub fn stars(&self) -> &[Star] {
        &self.stars
    }
}

/// One apparent image of a source: deck word, sky direction in the
/// observer's tangent frame, distance and received flux.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GhostImage {
    pub source_id: String,
    pub word: Vec<u32>,
    pub direction: Vec<f64>,
    pub dist: f64,
    pub flux: f64,
}

/// An image whose direction is undefined (observer on top of it, or at
/// the antipode); reported instead of being silently dropped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlaggedImage {
    pub source_id: String,
    pub word: Vec<u32>,
    pub dist: f64,
    pub reason: String,
}

/// Output of [`enumerate_images`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageSurvey {
    pub images: Vec<GhostImage>,
    pub flagged: Vec<FlaggedImage>,
}

/// Orbit translates of `p` (with their deck words) within geodesic
/// distance `radius` of `anchor`.
fn images_within(
    form: &SpaceForm,
    p: &AmbientPoint,
    anchor: &AmbientPoint,
    radius: f64,
) -> Result<Vec<(Vec<u32>, AmbientPoint, f64)>> {
    let space = form.space();
    let mut out = Vec::new();
    match form.group().kind() {
        GroupKind::Finite => {
            for g in form.group().enumerate()? {
                let img = g.apply(p)?;
                let d = space.distance(anchor, &img)?;
                if d <= radius {
                    out.push((g.word().map(|w| w.to_vec()).unwrap_or_default(), img, d));
                }
            }
        }
        GroupKind::Lattice => {
            let basis = LatticeBasis::from_group(form.group())?;
            let center = anchor.spatial() - p.spatial();
            basis.for_each_covering(&center, radius, |a, v| {
                let spatial = p.spatial() + v;
                let mut coords = vec![1.0];
                coords.extend(spatial.iter());
                if let Ok(img) = space.point_from(&coords) {
                    if let Ok(d) = space.distance(anchor, &img) {
                        if d <= radius {
                            out.push((basis.word_for(a, form.group()), img, d));
                        }
                    }
                }
            });
        }
        kind => {
            return Err(Error::UnsupportedGroupKind {
                op: "image enumeration",
                kind: kind.name().into(),
            })
        }
    }
    Ok(out)
}

/// Direction of `target` as seen from `observer`, as coefficients in
/// the deterministic orthonormal tangent frame at the observer.
fn frame_direction(
    space: &ModelSpace,
    frame: &[DVector<f64>],
    observer: &AmbientPoint,
    target: &AmbientPoint,
) -> Result<Vec<f64>> {
    let tangent = space.tangent_toward(observer, target)?;
    frame
        .iter()
        .map(|f| space.bilinear_form(tangent.direction(), f))
        .collect()
}

/// All images of every catalog star within geodesic distance
/// `horizon` of the observer, sorted by (distance, source id, word).
///
/// Catalog positions must be canonical (fix points of [`SpaceForm::reduce`]).
/// Images coincident with the observer or at the exact antipode carry
/// no direction and are reported in `flagged`.
pub fn enumerate_images(
    form: &SpaceForm,
    observer: &AmbientPoint,
    catalog: &StarCatalog,
    horizon: f64,
) -> Result<ImageSurvey> {
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(Error::InvalidArgument {
            what: format!("horizon must be positive, got {horizon}"),
        });
    }
    let space = form.space();
    if space.curvature() == Curvature::Hyperbolic {
        return Err(Error::UnsupportedGroupKind {
            op: "image enumeration",
            kind: "hyperbolic form".into(),
        });
    }
    let frame = space.tangent_frame(observer)?;
    let mut images = Vec::new();
    let mut flagged = Vec::new();
    for star in catalog.stars() {
        let canon = form.reduce(&star.pos)?;
        if !canon.rep().approx_eq(&star.pos, 1e-7) {
            return Err(Error::NotCanonical { id: star.id.clone() });
        }
        for (word, img, d) in images_within(form, &star.pos, observer, horizon)? {
            if d <= 1e-9 {
                flagged.push(FlaggedImage {
                    source_id: star.id.clone(),
                    word,
                    dist: d,
                    reason: "observer coincides with the image".into(),
                });
                continue;
            }
            if space.curvature() == Curvature::Spherical
                && d >= std::f64::consts::PI * space.radius() - 1e-9
            {
                flagged.push(FlaggedImage {
                    source_id: star.id.clone(),
                    word,
                    dist: d,
                    reason: "image is antipodal to the observer".into(),
                });
                continue;
            }
            let direction = frame_direction(space, &frame, observer, &img)?;
            let area = space.sphere_area(d)?;
            images.push(GhostImage {
                source_id: star.id.clone(),
                word,
                direction,
                dist: d,
                flux: star.luminosity / area,
            });
        }
    }
    images.sort_by(|a, b| {
        a.dist
            .partial_cmp(&b.dist)
            .expect("finite distances")
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then_with(|| a.word.cmp(&b.word))
    });
    flagged.sort_by(|a, b| {
        a.dist
            .partial_cmp(&b.dist)
            .expect("finite distances")
            .then_with(|| a.source_id.cmp(&b.source_id))
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(ImageSurvey { images, flagged })
}

/// Outcome of the volume criterion: the quotient must hold more volume
/// than the ball containing the visible star system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeCheck {
    pub pass: bool,
    /// `form volume / ball volume`.
    pub margin: f64,
    pub form_volume: f64,
    pub ball_volume: f64,
}

/// Compare the quotient volume against the ball of radius
/// `system_radius` in the model space.
pub fn volume_bound_check(form: &SpaceForm, system_radius: f64) -> Result<VolumeCheck> {
    let form_volume = form.volume()?;
    let ball_volume = form.space().ball_volume(system_radius)?;
    Ok(VolumeCheck {
        pass: form_volume > ball_volume,
        margin: form_volume / ball_volume,
        form_volume,
        ball_volume,
    })
}

/// Cumulative force after each complete distance shell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellPartial {
    pub radius: f64,
    pub images: usize,
    pub cumulative: Vec<f64>,
}

/// Image-summed Newtonian field at `test`, with the shell-by-shell
/// partial-sum trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GravityResult {
    /// Force components in the tangent frame at the test point.
    pub force: Vec<f64>,
    pub trace: Vec<ShellPartial>,
}

/// Newtonian force (G = 1) on a unit test mass at `test` from all
/// images of `source` within distance `cutoff`, summed shell by shell
/// in increasing distance.
///
/// The lattice sum converges only conditionally; the fixed shell
/// ordering makes the reported partial sums reproducible, and the trace
/// is returned for convergence inspection rather than any claim of a
/// limit.
pub fn gravitational_field(
    form: &SpaceForm,
    source: &AmbientPoint,
    mass: f64,
    test: &AmbientPoint,
    cutoff: f64,
) -> Result<GravityResult> {
    let space = form.space();
    if space.curvature() == Curvature::Hyperbolic {
        return Err(Error::UnsupportedGroupKind {
            op: "gravitational field",
            kind: "hyperbolic form".into(),
        });
    }
    if mass.is_nan() || mass <= 0.0 || cutoff.is_nan() || cutoff <= 0.0 {
        return Err(Error::InvalidArgument {
            what: "mass and cutoff must be positive".into(),
        });
    }
    if form.quotient_distance(test, source)? <= 1e-9 {
        return Err(Error::CoincidentPoints);
    }
    let mut images = images_within(form, source, test, cutoff)?;
    images.sort_by(|a, b| {
        a.2.partial_cmp(&b.2)
            .expect("finite distances")
            .then_with(|| a.0.cmp(&b.0))
    });
    let frame = space.tangent_frame(test)?;
    let n = space.dim();
    let mut force = vec![0.0; n];
    let mut trace: Vec<ShellPartial> = Vec::new();
    let mut idx = 0;
    while idx < images.len() {
        let shell_radius = images[idx].2;
        let mut shell_count = 0;
        while idx < images.len() && images[idx].2 <= shell_radius + 1e-9 {
            let (_, img, d) = &images[idx];
            if *d <= 1e-9
                || (space.curvature() == Curvature::Spherical
                    && *d >= std::f64::consts::PI * space.radius() - 1e-9)
            {
                return Err(Error::CoincidentPoints);
            }
            let dir = frame_direction(space, &frame, test, img)?;
            let magnitude = mass / (d * d);
            for (fc, dc) in force.iter_mut().zip(dir.iter()) {
                *fc += magnitude * dc;
            }
            shell_count += 1;
            idx += 1;
        }
        trace.push(ShellPartial {
            radius: shell_radius,
            images: shell_count,
            cumulative: force.clone(),
        });
    }
    Ok(GravityResult { force, trace })
}

/// Curvature-radius bounds implied by a smallest measurable parallax.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureBounds {
    /// Smallest admissible elliptic radius: the quarter-circumference
    /// must reach the flat-estimated distance of a star showing
    /// parallax `p_min`.
    pub elliptic: f64,
    /// Smallest admissible hyperbolic radius: the parallax floor at
    /// infinite distance must not exceed `p_min`.
    pub hyperbolic: f64,
}

/// Limit of the hyperbolic parallax as the star recedes to infinity.
pub fn parallax_floor(baseline: f64, k: f64) -> f64 {
    (baseline / k).sinh().atan()
}

/// Invert the parallax model: the hyperbolic bound `k*` solves
/// `parallax_floor(b, k*) = p_min`, and the elliptic bound places the
/// flat-estimated star distance `b / tan(p_min)` at the quarter
/// circumference `pi k / 2`. Bounds scale linearly with the baseline
/// and grow without bound as `p_min` shrinks.
pub fn curvature_radius_bound(p_min: f64, baseline: f64) -> Result<CurvatureBounds> {
    if p_min.is_nan() || p_min <= 0.0 || p_min >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidArgument {
            what: format!("minimum parallax must lie in (0, pi/2), got {p_min}"),
        });
    }
    if baseline.is_nan() || baseline <= 0.0 {
        return Err(Error::InvalidArgument {
            what: format!("baseline must be positive, got {baseline}"),
        });
    }
    let tan_p = p_min.tan();
    Ok(CurvatureBounds {
        elliptic: 2.0 * baseline / (std::f64::consts::PI * tan_p),
        hyperbolic: baseline / tan_p.asinh(),
    })
}
