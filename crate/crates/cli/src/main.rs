//! `spaceform`: deterministic command-line access to the model
//! geometries, discrete quotients, the flat torus in the 3-sphere, and
//! the observational checks.
//!
//! Exit codes: 0 success, 1 domain error (structured JSON on stderr),
//! 2 usage or parse error. Output bytes are identical across runs; no
//! data-dependent parallelism is used.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spaceform::clifford::{gauss_curvature, induced_metric, CliffordSurface};
use spaceform::cosmos::{
    curvature_radius_bound, enumerate_images, gravitational_field, volume_bound_check,
};
use spaceform::files::{parse_spherical_kind, CatalogJson, FormJson, GroupJson};
use spaceform::hopf::{hopf_fiber, linking_number};
use spaceform::quat::Quaternion;
use spaceform::quotient::RejectionReport;
use spaceform::{
    finite_spherical_group, AmbientPoint, DiscreteGroup, ModelSpace, QuotientPoint, SpaceForm,
    VerifyOutcome,
};

mod output;

#[derive(Parser)]
#[command(
    name = "spaceform",
    about = "Constant-curvature space forms: geometry, quotients, fibres, observables",
    version
)]
struct Cli {
    /// Write the primary output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Seed for sampled checks (Monte Carlo volume).
    #[arg(long, global = true, default_value_t = 8)]
    seed: u64,

    /// Quality gate: fail (exit 1) when a reported residual exceeds
    /// this value.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Geodesic distance between two points.
    Dist {
        /// Model space, inline JSON or a file path.
        #[arg(long)]
        space: String,
        /// First point, comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Second point.
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Point at arclength t along a geodesic.
    Geodesic {
        #[arg(long)]
        space: String,
        /// Base point.
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        /// Tangent direction at p (normalized internally).
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long)]
        t: f64,
    },
    /// Observed parallax over a perpendicular baseline.
    Parallax {
        #[arg(long)]
        space: String,
        #[arg(long)]
        baseline: f64,
        #[arg(long)]
        dist: f64,
    },
    /// Discrete-group operations.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Quotient metric between two points of a space form.
    QuotientDist {
        /// Space-form file (inline JSON or path).
        #[arg(long)]
        form: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
    /// Canonical Dirichlet representative of a point.
    Reduce {
        #[arg(long)]
        form: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Lift a quotient path to the covering space.
    Lift {
        #[arg(long)]
        form: String,
        /// JSON array of points (inline or path); each is canonicalized.
        #[arg(long)]
        path: String,
        /// Start point in the covering space.
        #[arg(long, allow_hyphen_values = true)]
        start: String,
    },
    /// Total volume of a space form; optionally cross-checked by Monte
    /// Carlo sampling of the Dirichlet domain.
    Volume {
        #[arg(long)]
        form: String,
        /// Monte Carlo sample count for the cross-check (spherical
        /// forms only).
        #[arg(long)]
        mc_samples: Option<usize>,
    },
    /// Sample a Clifford surface: grid of points with metric and
    /// curvature columns.
    CliffordSurface {
        /// Left twist generator: `i`, `j`, `k`, or a comma triple.
        #[arg(long)]
        u: String,
        /// Right twist generator.
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        /// Base point as `w,x,y,z` (defaults to 1).
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Grid resolution per axis.
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
    },
    /// Linking number of two fibres of the 3-sphere fibration.
    HopfLink {
        /// Base point on S^2, comma triple.
        #[arg(long, allow_hyphen_values = true)]
        base1: String,
        #[arg(long, allow_hyphen_values = true)]
        base2: String,
        #[arg(long, default_value_t = 512)]
        samples: usize,
    },
    /// Observational checks on a space form.
    #[command(subcommand)]
    Cosmos(CosmosCmd),
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Enumerate a group and print its order and elements.
    Enumerate {
        /// Named spherical family: C<m>, D<m>, 2T, 2O, 2I.
        #[arg(long, conflicts_with = "group")]
        kind: Option<String>,
        /// Group file (inline JSON or path).
        #[arg(long)]
        group: Option<String>,
    },
}

#[derive(Subcommand)]
enum CosmosCmd {
    /// Ghost-image survey of a star catalog.
    Images {
        #[arg(long)]
        form: String,
        /// Catalog file (inline JSON or path).
        #[arg(long)]
        catalog: String,
        /// Observer position.
        #[arg(long, allow_hyphen_values = true)]
        observer: String,
        /// Horizon distance.
        #[arg(long)]
        horizon: f64,
    },
    /// Image-summed Newtonian force with shell trace.
    Gravity {
        #[arg(long)]
        form: String,
        #[arg(long, allow_hyphen_values = true)]
        source: String,
        #[arg(long, default_value_t = 1.0)]
        mass: f64,
        #[arg(long, allow_hyphen_values = true)]
        test: String,
        #[arg(long)]
        cutoff: f64,
    },
    /// Volume criterion against a star system of given radius.
    VolumeCheck {
        #[arg(long)]
        form: String,
        #[arg(long)]
        system_radius: f64,
    },
    /// Curvature-radius bounds from a minimum measurable parallax.
    ParallaxBound {
        #[arg(long)]
        pmin: f64,
        #[arg(long)]
        baseline: f64,
    },
}

/// Application-level failure, mapped onto exit codes.
enum Failure {
    /// Unreadable or unparseable input: exit 2.
    Parse(String),
    /// Domain error from the library: exit 1.
    Domain(spaceform::Error),
    /// Structured space-form rejection: exit 1.
    Rejected(RejectionReport),
    /// Residual quality gate tripped: exit 1.
    Tolerance { residual: f64, tol: f64 },
}

impl From<spaceform::Error> for Failure {
    fn from(e: spaceform::Error) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let sink = output::Sink::new(cli.out.clone());
    match run(&cli, &sink) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Parse(msg)) => {
            eprintln!("{}", serde_json::json!({ "error": "parse", "message": msg }));
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "domain", "message": e.to_string() })
            );
            ExitCode::from(1)
        }
        Err(Failure::Rejected(report)) => {
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": "space_form_rejected",
                    "violations": report.violations,
                })
            );
            ExitCode::from(1)
        }
        Err(Failure::Tolerance { residual, tol }) => {
            eprintln!(
                "{}",
                serde_json::json!({
                    "error": "tolerance",
                    "message": format!("residual {residual} exceeds --tol {tol}"),
                })
            );
            ExitCode::from(1)
        }
    }
}

/// Read an argument that is either inline JSON (starts with `{` or
/// `[`) or a path to a JSON file.
fn read_json_arg(arg: &str) -> CliResult<String> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        Ok(arg.to_string())
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Failure::Parse(format!("cannot read `{arg}`: {e}")))
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = read_json_arg(arg)?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("invalid {what}: {e}")))
}

fn parse_numbers(arg: &str) -> CliResult<Vec<f64>> {
    arg.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Failure::Parse(format!("invalid number `{tok}`: {e}")))
        })
        .collect()
}

/// A point from comma-separated coordinates. Flat spaces accept the
/// spatial coordinates alone (the leading 1 is implied).
fn parse_point(space: &ModelSpace, arg: &str) -> CliResult<AmbientPoint> {
    let nums = parse_numbers(arg)?;
    if space.is_flat() && nums.len() == space.dim() {
        return space.flat_point(&nums).map_err(Failure::Domain);
    }
    space.point_from(&nums).map_err(Failure::Domain)
}

fn parse_space(arg: &str) -> CliResult<ModelSpace> {
    parse_json::<ModelSpace>(arg, "model space")
}

fn load_form(arg: &str) -> CliResult<SpaceForm> {
    let form_json: FormJson = parse_json(arg, "space form")?;
    match form_json.to_form()? {
        VerifyOutcome::Verified(f) => Ok(f),
        VerifyOutcome::Rejected(r) => Err(Failure::Rejected(r)),
    }
}

/// Generator axis for a Clifford surface: `i`/`j`/`k` or a comma
/// triple of imaginary components.
fn parse_axis(arg: &str) -> CliResult<Quaternion> {
    match arg {
        "i" => return Ok(spaceform::quat::I),
        "j" => return Ok(spaceform::quat::J),
        "k" => return Ok(spaceform::quat::K),
        _ => {}
    }
    let nums = parse_numbers(arg)?;
    if nums.len() != 3 {
        return Err(Failure::Parse(format!(
            "axis must be i, j, k or three numbers, got `{arg}`"
        )));
    }
    Quaternion::imaginary([nums[0], nums[1], nums[2]])
        .normalized()
        .map_err(Failure::Domain)
}

fn run(cli: &Cli, sink: &output::Sink) -> CliResult<()> {
    match &cli.cmd {
        Cmd::Dist { space, x, y } => {
            let space = parse_space(space)?;
            let px = parse_point(&space, x)?;
            let py = parse_point(&space, y)?;
            let d = space.distance(&px, &py)?;
            sink.line(&format!("{d}"))
        }
        Cmd::Geodesic { space, p, v, t } => {
            let space = parse_space(space)?;
            let base = parse_point(&space, p)?;
            let vraw = parse_numbers(v)?;
            let vfull = if space.is_flat() && vraw.len() == space.dim() {
                let mut w = vec![0.0];
                w.extend(vraw);
                w
            } else {
                vraw
            };
            let tangent = space.tangent(&base, nalgebra_vec(&vfull))?;
            let q = space.geodesic_point(&tangent, *t);
            sink.line(&output::json_point(&q))
        }
        Cmd::Parallax { space, baseline, dist } => {
            let space = parse_space(space)?;
            let p = space.parallax(*baseline, *dist)?;
            sink.line(&format!("{p}"))
        }
        Cmd::Group(GroupCmd::Enumerate { kind, group }) => {
            let g = match (kind, group) {
                (Some(name), None) => {
                    let k = parse_spherical_kind(name).ok_or_else(|| {
                        Failure::Parse(format!("unknown group kind `{name}`"))
                    })?;
                    finite_spherical_group(k)?
                }
                (None, Some(file)) => {
                    let gj: GroupJson = parse_json(file, "group file")?;
                    gj.to_group(None)?.1
                }
                _ => {
                    return Err(Failure::Parse(
                        "exactly one of --kind or --group is required".into(),
                    ))
                }
            };
            print_group(&g, sink)
        }
        Cmd::QuotientDist { form, x, y } => {
            let form = load_form(form)?;
            let px = parse_point(form.space(), x)?;
            let py = parse_point(form.space(), y)?;
            let d = form.quotient_distance(&px, &py)?;
            sink.line(&format!("{d}"))
        }
        Cmd::Reduce { form, x } => {
            let form = load_form(form)?;
            let p = parse_point(form.space(), x)?;
            let rep = form.reduce(&p)?;
            sink.line(&output::json_point(rep.rep()))
        }
        Cmd::Lift { form, path, start } => {
            let form = load_form(form)?;
            let raw: Vec<Vec<f64>> = parse_json(path, "path file")?;
            let space = form.space();
            let mut qpath: Vec<QuotientPoint> = Vec::with_capacity(raw.len());
            for coords in &raw {
                let joined = coords
                    .iter()
                    .map(|c| c.to_string())
                    .collect::<Vec<_>>()
                    .join(",");
                let p = parse_point(space, &joined)?;
                qpath.push(form.reduce(&p)?);
            }
            let start = parse_point(space, start)?;
            let lift = form.lift_path(&qpath, &start)?;
            let arr: Vec<Vec<f64>> = lift
                .iter()
                .map(|p| p.coords().iter().copied().collect())
                .collect();
            sink.line(
                &serde_json::to_string(&arr)
                    .expect("vectors of finite floats serialize"),
            )
        }
        Cmd::Volume { form, mc_samples } => {
            let form = load_form(form)?;
            let v = form.volume()?;
            match mc_samples {
                None => sink.line(&format!("{v}")),
                Some(n) => {
                    let est = monte_carlo_volume(&form, *n, cli.seed)?;
                    sink.line(
                        &serde_json::json!({ "volume": v, "monte_carlo": est, "samples": n })
                            .to_string(),
                    )
                }
            }
        }
        Cmd::CliffordSurface { u, v, x0, grid, step } => {
            let uq = parse_axis(u)?;
            let vq = parse_axis(v)?;
            let x0 = match x0 {
                Some(s) => {
                    let nums = parse_numbers(s)?;
                    if nums.len() != 4 {
                        return Err(Failure::Parse("x0 needs four components".into()));
                    }
                    Quaternion::from_array([nums[0], nums[1], nums[2], nums[3]])
                }
                None => spaceform::quat::ONE,
            };
            let surf = CliffordSurface::new(x0, uq, vq)?;
            surface_table(&surf, *grid, *step, cli.format, sink)
        }
        Cmd::HopfLink { base1, base2, samples } => {
            let b1 = parse_numbers(base1)?;
            let b2 = parse_numbers(base2)?;
            if b1.len() != 3 || b2.len() != 3 {
                return Err(Failure::Parse("fiber bases are 3-vectors".into()));
            }
            let f1 = hopf_fiber([b1[0], b1[1], b1[2]], (*samples).max(8))?;
            let f2 = hopf_fiber([b2[0], b2[1], b2[2]], (*samples).max(8))?;
            let lk = linking_number(&f1, &f2, *samples)?;
            if let Some(tol) = cli.tol {
                if lk.residual > tol {
                    return Err(Failure::Tolerance { residual: lk.residual, tol });
                }
            }
            sink.line(&format!("{} {}", lk.rounded, lk.residual))
        }
        Cmd::Cosmos(cmd) => run_cosmos(cmd, cli, sink),
    }
}

fn run_cosmos(cmd: &CosmosCmd, cli: &Cli, sink: &output::Sink) -> CliResult<()> {
    match cmd {
        CosmosCmd::Images { form, catalog, observer, horizon } => {
            let form = load_form(form)?;
            let cj: CatalogJson = parse_json(catalog, "catalog")?;
            let cat = cj.to_catalog(form.space())?;
            let obs = parse_point(form.space(), observer)?;
            let survey = enumerate_images(&form, &obs, &cat, *horizon)?;
            // The primary output is the sorted image array; images
            // without a direction still must surface somewhere, so they
            // go to stderr as a structured warning.
            if !survey.flagged.is_empty() {
                eprintln!(
                    "{}",
                    serde_json::json!({
                        "warning": "flagged_images",
                        "flagged": survey.flagged,
                    })
                );
            }
            match cli.format {
                Format::Json => sink.line(
                    &serde_json::to_string(&survey.images).expect("images serialize"),
                ),
                Format::Csv => {
                    let mut out = String::new();
                    let n = form.space().dim();
                    let dirs: Vec<String> = (1..=n).map(|i| format!("dir{i}")).collect();
                    out.push_str(&format!("source_id,word,{},dist,flux\n", dirs.join(",")));
                    for img in &survey.images {
                        let word = img
                            .word
                            .iter()
                            .map(|w| w.to_string())
                            .collect::<Vec<_>>()
                            .join(".");
                        let dir = img
                            .direction
                            .iter()
                            .map(|d| d.to_string())
                            .collect::<Vec<_>>()
                            .join(",");
                        out.push_str(&format!(
                            "{},{},{},{},{}\n",
                            img.source_id, word, dir, img.dist, img.flux
                        ));
                    }
                    sink.raw(&out)
                }
            }
        }
        CosmosCmd::Gravity { form, source, mass, test, cutoff } => {
            let form = load_form(form)?;
            let src = parse_point(form.space(), source)?;
            let tst = parse_point(form.space(), test)?;
            let res = gravitational_field(&form, &src, *mass, &tst, *cutoff)?;
            sink.line(&serde_json::to_string(&res).expect("gravity result serializes"))
        }
        CosmosCmd::VolumeCheck { form, system_radius } => {
            let form = load_form(form)?;
            let check = volume_bound_check(&form, *system_radius)?;
            sink.line(&serde_json::to_string(&check).expect("check serializes"))
        }
        CosmosCmd::ParallaxBound { pmin, baseline } => {
            let bounds = curvature_radius_bound(*pmin, *baseline)?;
            sink.line(&serde_json::to_string(&bounds).expect("bounds serialize"))
        }
    }
}

fn nalgebra_vec(v: &[f64]) -> spaceform::nalgebra::DVector<f64> {
    spaceform::nalgebra::DVector::from_row_slice(v)
}

/// Order plus one element per line. Groups of left twists print each
/// element as the quaternion it multiplies by; anything else prints
/// generator-style JSON rows.
fn print_group(group: &DiscreteGroup, sink: &output::Sink) -> CliResult<()> {
    let elems = group.enumerate()?;
    let mut out = String::new();
    out.push_str(&format!("order {}\n", elems.len()));
    // An element is a left twist exactly when rebuilding the matrix
    // from its first column reproduces it.
    let as_left_twist = |e: &spaceform::Isometry| -> Option<Quaternion> {
        let m = e.matrix();
        if m.nrows() != 4 {
            return None;
        }
        let q = Quaternion::new(m[(0, 0)], m[(1, 0)], m[(2, 0)], m[(3, 0)]);
        let rebuilt = spaceform::left_twist(q).ok()?;
        if e.approx_eq(&rebuilt, 1e-9) {
            Some(q)
        } else {
            None
        }
    };
    let quats: Option<Vec<Quaternion>> = elems.iter().map(as_left_twist).collect();
    match quats {
        Some(qs) => {
            for q in qs {
                out.push_str(&format!("{} {} {} {}\n", q.w, q.x, q.y, q.z));
            }
        }
        None => {
            for e in elems {
                out.push_str(&format!(
                    "{}\n",
                    serde_json::to_string(&spaceform::files::generator_json(e))
                        .expect("generator serializes")
                ));
            }
        }
    }
    sink.raw(&out)
}

struct SurfaceRow {
    s: f64,
    t: f64,
    point: [f64; 4],
    e: f64,
    f: f64,
    g: f64,
    k: f64,
}

fn surface_table(
    surf: &CliffordSurface,
    grid: usize,
    step: f64,
    format: Format,
    sink: &output::Sink,
) -> CliResult<()> {
    let mut rows: Vec<SurfaceRow> = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let s = std::f64::consts::TAU * i as f64 / grid as f64;
            let t = std::f64::consts::TAU * j as f64 / grid as f64;
            let point = surf.point(s, t).to_array();
            let m = induced_metric(surf, s, t, step)?;
            let k = gauss_curvature(surf, s, t, step)?;
            rows.push(SurfaceRow { s, t, point, e: m.e, f: m.f, g: m.g, k });
        }
    }
    match format {
        Format::Csv => {
            let mut out = String::from("s,t,x0,x1,x2,x3,E,F,G,K\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.s, r.t, r.point[0], r.point[1], r.point[2], r.point[3], r.e, r.f, r.g, r.k
                ));
            }
            sink.raw(&out)
        }
        Format::Json => {
            let arr: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "s": r.s, "t": r.t, "point": r.point,
                        "E": r.e, "F": r.f, "G": r.g, "K": r.k,
                    })
                })
                .collect();
            sink.line(&serde_json::to_string(&arr).expect("rows serialize"))
        }
    }
}

/// Monte Carlo volume of a spherical form: fraction of uniform samples
/// inside the Dirichlet domain times the total volume.
fn monte_carlo_volume(form: &SpaceForm, samples: usize, seed: u64) -> CliResult<f64> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    if form.space().is_flat() || form.space().dim() != 3 {
        return Err(Failure::Domain(spaceform::Error::UnsupportedGroupKind {
            op: "monte carlo volume",
            kind: "non-spherical form".into(),
        }));
    }
    let space = form.space();
    let base = form.base();
    let elems = form.group().enumerate()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let normal = |r: &mut rand_chacha::ChaCha8Rng| {
        let u1: f64 = r.random_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = r.random_range(0.0..1.0);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut hits = 0usize;
    for _ in 0..samples {
        let mut coords = [0.0; 4];
        loop {
            for c in coords.iter_mut() {
                *c = normal(&mut rng);
            }
            let n = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n > 1e-6 {
                for c in coords.iter_mut() {
                    *c /= n;
                }
                break;
            }
        }
        let x = space.point_from(&coords).expect("unit vector is on S^3");
        let ax = space.bilinear_form(base.coords(), x.coords())?;
        let mut inside = true;
        for g in elems {
            if g.is_identity(1e-12) {
                continue;
            }
            let gx = g.apply(&x)?;
            if space.bilinear_form(base.coords(), gx.coords())? > ax {
                inside = false;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    let k = space.radius();
    Ok(2.0 * std::f64::consts::PI.powi(2) * k.powi(3) * hits as f64 / samples as f64)
}

impl output::Sink {
    fn line(&self, text: &str) -> CliResult<()> {
        self.write_all(format!("{text}\n").as_bytes())
            .map_err(|e| Failure::Parse(format!("cannot write output: {e}")))
    }

    fn raw(&self, text: &str) -> CliResult<()> {
        self.write_all(text.as_bytes())
            .map_err(|e| Failure::Parse(format!("cannot write output: {e}")))
    }
}
