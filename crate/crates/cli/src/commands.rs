use std::fmt::Write as _;

use clap::Args;
use knotflow::beltrami::{
    abc_curl, abc_divergence, abc_singular_points, abc_velocity, reeb_residual, std_tight_eval, AbcParams, CurlMode, Point3,
    Point4, DEFAULT_FD_STEP, DEFAULT_ZERO_TOL,
};
use knotflow::contactgeom::{annulus_from_monodromy, annulus_monodromy, transversality_check, CircleMap, DEFAULT_LEAF_TOL};
use knotflow::flowdyn::{
    find_periodic_orbit, integrate, separatrix_splitting, Axis, Crossing, SectionSpec, ShootingOptions, SplittingOptions,
    DEFAULT_TOL,
};
use knotflow::knotinv::{gauss_linking, KnotReport, LinkingMethod};
use knotflow::template::{enumerate_words, lorenz_like, pair_linking, word_to_braid, words_to_curves, CurveGeometry, CyclicWord, TemplateSpec};
use knotflow::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::{parse_number, parse_tuple};
use crate::{AbcArgs, Failure, Sink};

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Plain decimals for moderate magnitudes, exponent form otherwise.
fn num(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || (1e-4..1e15).contains(&m) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn params(a: &AbcArgs) -> AbcParams {
    AbcParams::new(a.a, a.b, a.c)
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[command(flatten)]
    abc: AbcArgs,
    /// Number of random sample points.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Seed of the sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Central-difference step.
    #[arg(long, value_parser = parse_number, default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
    /// Grid resolution of the singular-point search.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, value_parser = parse_number, default_value_t = 1e-6)]
    curl_tol: f64,
    #[arg(long, value_parser = parse_number, default_value_t = 1e-7)]
    div_tol: f64,
    #[arg(long, value_parser = parse_number, default_value_t = 1e-6)]
    reeb_tol: f64,
}

#[derive(Serialize)]
struct ReebReport {
    /// max |alpha(X) - 1|
    alpha_of_reeb: f64,
    /// max sup-norm of iota_X d alpha
    kernel: f64,
    /// samples skipped because |u| vanished there
    skipped_singular: usize,
}

#[derive(Serialize)]
struct SingularityJson {
    /// Normalized representative the search ran on.
    normalized: AbcParams,
    nonsingular_criterion: bool,
    certified_nonsingular: bool,
    certified_lower_bound: Option<f64>,
    min_speed_sampled: f64,
    /// Zeros in the coordinates of the normalized field.
    points: Vec<[f64; 3]>,
}

#[derive(Serialize)]
struct CheckReport {
    params: AbcParams,
    samples: usize,
    seed: u64,
    fd_step: f64,
    curl_residual: f64,
    divergence_residual: f64,
    reeb_residuals: ReebReport,
    singularity: SingularityJson,
    violations: Vec<String>,
}

pub fn beltrami_check(a: &CheckArgs, sink: &Sink) -> Result<(), Failure> {
    let p = params(&a.abc);
    let norm = p.normalize()?;
    if a.samples == 0 || a.grid < 4 || !(a.fd_step > 0.0) {
        return Err(Failure::Input("need --samples >= 1, --grid >= 4 and --fd-step > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let tau = std::f64::consts::TAU;
    let mut curl: f64 = 0.0;
    let mut div: f64 = 0.0;
    let mut reeb = ReebReport {
        alpha_of_reeb: 0.0,
        kernel: 0.0,
        skipped_singular: 0,
    };
    for _ in 0..a.samples {
        let q = Point3::new(rng.gen_range(0.0..tau), rng.gen_range(0.0..tau), rng.gen_range(0.0..tau));
        let err = abc_curl(&p, &q, CurlMode::FiniteDifference(a.fd_step)).sub(&abc_velocity(&p, &q)).sup_norm();
        curl = curl.max(err);
        div = div.max(abc_divergence(&p, &q, a.fd_step).abs());
        match reeb_residual(&p, &q, a.fd_step) {
            Ok(r) => {
                reeb.alpha_of_reeb = reeb.alpha_of_reeb.max(r.r1);
                reeb.kernel = reeb.kernel.max(r.r2);
            }
            Err(Error::SingularPoint { .. }) => reeb.skipped_singular += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let sing = abc_singular_points(&norm.params, a.grid, DEFAULT_ZERO_TOL)?;
    let mut violations = Vec::new();
    if curl > a.curl_tol {
        violations.push(format!("curl residual {curl:e} exceeds {:e}", a.curl_tol));
    }
    if div > a.div_tol {
        violations.push(format!("divergence residual {div:e} exceeds {:e}", a.div_tol));
    }
    if reeb.alpha_of_reeb.max(reeb.kernel) > a.reeb_tol {
        violations.push(format!("Reeb residual exceeds {:e}", a.reeb_tol));
    }
    if !sing.is_certified_nonsingular() {
        violations.push(if sing.points.is_empty() {
            "nonsingularity could not be certified".to_string()
        } else {
            format!("field vanishes at {} located points", sing.points.len())
        });
    }
    let report = CheckReport {
        params: p,
        samples: a.samples,
        seed: a.seed,
        fd_step: a.fd_step,
        curl_residual: curl,
        divergence_residual: div,
        reeb_residuals: reeb,
        singularity: SingularityJson {
            normalized: norm.params,
            nonsingular_criterion: p.is_nonsingular()?,
            certified_nonsingular: sing.is_certified_nonsingular(),
            certified_lower_bound: sing.certified_lower_bound,
            min_speed_sampled: sing.min_speed_sampled,
            points: sing.points.iter().map(|q| q.to_array()).collect(),
        },
        violations,
    };
    sink.emit(&json(&report))?;
    if report.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Property(report.violations.join("; ")))
    }
}

#[derive(Args, Debug)]
pub struct IntegrateArgs {
    #[command(flatten)]
    abc: AbcArgs,
    /// Initial point x,y,z.
    #[arg(long, allow_hyphen_values = true)]
    x0: String,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    t_end: f64,
    /// Local error tolerance.
    #[arg(long, value_parser = parse_number, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

pub fn flow_integrate(a: &IntegrateArgs, sink: &Sink) -> Result<(), Failure> {
    let x0 = parse_tuple(&a.x0, 3).map_err(|e| Failure::Input(format!("--x0: {e}")))?;
    if !(a.tol > 0.0) {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    let tr = integrate(&params(&a.abc), &Point3::new(x0[0], x0[1], x0[2]), a.t_end, a.tol)?;
    let mut out = String::from("t,x,y,z\n");
    for s in &tr.samples {
        writeln!(out, "{},{},{},{}", num(s.t), num(s.q.x), num(s.q.y), num(s.q.z)).unwrap();
    }
    sink.emit(&out)
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[command(flatten)]
    abc: AbcArgs,
    /// Section as axis=value, e.g. y=0.
    #[arg(long, default_value = "y=0")]
    section: String,
    /// Crossing direction; auto follows the flow at the guess.
    #[arg(long, value_parser = ["auto", "increasing", "decreasing"], default_value = "auto")]
    direction: String,
    /// Initial guess for the two section coordinates, e.g. x,z for a y section.
    #[arg(long, allow_hyphen_values = true)]
    guess: String,
    /// Required return residual.
    #[arg(long, value_parser = parse_number, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    /// Allowed deviation of the multiplier product from 1.
    #[arg(long, value_parser = parse_number, default_value_t = 1e-6)]
    det_tol: f64,
}

fn parse_section(s: &str) -> Result<(Axis, f64), Failure> {
    let bad = || Failure::Input(format!("--section must look like y=0, got \"{s}\""));
    let (axis, value) = s.split_once('=').ok_or_else(bad)?;
    let axis = match axis.trim() {
        "x" => Axis::X,
        "y" => Axis::Y,
        "z" => Axis::Z,
        _ => return Err(bad()),
    };
    let value = parse_number(value).map_err(|e| Failure::Input(format!("--section: {e}")))?;
    Ok((axis, value))
}

pub fn flow_orbit(a: &OrbitArgs, sink: &Sink) -> Result<(), Failure> {
    let p = params(&a.abc);
    let (axis, value) = parse_section(&a.section)?;
    let g = parse_tuple(&a.guess, 2).map_err(|e| Failure::Input(format!("--guess: {e}")))?;
    let mut q = [0.0; 3];
    q[axis.index()] = value;
    let [i, j] = axis.complement();
    q[i] = g[0];
    q[j] = g[1];
    let guess = Point3::from_array(q);
    let section = match a.direction.as_str() {
        "increasing" => SectionSpec::new(axis, value, Crossing::Increasing),
        "decreasing" => SectionSpec::new(axis, value, Crossing::Decreasing),
        _ => SectionSpec::oriented_at(&p, axis, value, &guess),
    };
    let opts = ShootingOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        ..ShootingOptions::default()
    };
    let orbit = find_periodic_orbit(&p, &section, &guess, &opts)?;
    sink.emit(&json(&orbit))?;
    let det = orbit.multipliers.product();
    if (det - 1.0).abs() > a.det_tol {
        return Err(Failure::Property(format!("multiplier product {det} is not 1")));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct SplittingArgs {
    #[arg(long = "B", value_parser = parse_number, default_value_t = 0.5)]
    b: f64,
    #[arg(long = "C", value_parser = parse_number, allow_hyphen_values = true)]
    c: f64,
    /// Number of uniformly spaced transversal samples.
    #[arg(long, default_value_t = 32)]
    samples: usize,
}

pub fn flow_splitting(a: &SplittingArgs, sink: &Sink) -> Result<(), Failure> {
    let prof = separatrix_splitting(&AbcParams::new(1.0, a.b, 0.0), a.c, a.samples, &SplittingOptions::default())?;
    let mut out = String::from("y,distance\n");
    for (y, d) in prof.section_param.iter().zip(&prof.signed_distance) {
        writeln!(out, "{},{}", num(*y), num(*d)).unwrap();
    }
    sink.emit(&out)
}

#[derive(Args, Debug)]
pub struct AnnulusArgs {
    /// Circle map: rot:D for theta + D, or sin:a,b for theta + a + b sin(theta).
    #[arg(long, allow_hyphen_values = true)]
    monodromy: String,
    /// Boundary radius of the annulus.
    #[arg(long, value_parser = parse_number, default_value_t = 1.0)]
    eps: f64,
    #[arg(long, default_value_t = 256)]
    n_theta: usize,
    #[arg(long, default_value_t = 129)]
    n_z: usize,
    /// Allowed sup-norm roundtrip error.
    #[arg(long, value_parser = parse_number, default_value_t = 1e-4)]
    tol: f64,
}

fn parse_monodromy(s: &str) -> Result<CircleMap, Failure> {
    let bad = |why: String| Failure::Input(format!("--monodromy \"{s}\": {why}"));
    match s.split_once(':') {
        Some(("rot", d)) => Ok(CircleMap::rotation(parse_number(d).map_err(bad)?)),
        Some(("sin", ab)) => {
            let v = parse_tuple(ab, 2).map_err(bad)?;
            let (a, b) = (v[0], v[1]);
            if b.abs() >= 1.0 {
                return Err(bad("|b| < 1 is needed for an orientation-preserving map".into()));
            }
            Ok(CircleMap::from_fn(|t| t + a + b * t.sin())?)
        }
        _ => Err(bad("expected rot:D or sin:a,b".into())),
    }
}

#[derive(Serialize)]
struct AnnulusReport<'a> {
    monodromy: &'a str,
    epsilon: f64,
    n_theta: usize,
    n_z: usize,
    winding: i64,
    roundtrip_error: f64,
    transverse: bool,
    min_sine: f64,
    tangencies: usize,
    grid_csv: String,
}

pub fn contact_annulus(a: &AnnulusArgs, sink: &Sink) -> Result<(), Failure> {
    let path = match sink.path() {
        Some(p) => p.clone(),
        None => match std::env::var_os("KNOTFLOW_OUT_DIR") {
            Some(dir) => std::path::PathBuf::from(dir).join("annulus.csv"),
            None => return Err(Failure::Input("contact annulus needs --out or KNOTFLOW_OUT_DIR".into())),
        },
    };
    let f = parse_monodromy(&a.monodromy)?;
    let surf = annulus_from_monodromy(&f, a.eps, (a.n_theta, a.n_z))?;
    let back = annulus_monodromy(&surf, DEFAULT_LEAF_TOL)?;
    let err = back.lift_distance(&f);
    let trans = transversality_check(&surf);
    let mut csv = String::from("theta,z,r\n");
    for j in 0..surf.n_z {
        for i in 0..surf.n_theta {
            writeln!(csv, "{},{},{}", num(surf.theta(i)), num(surf.z(j)), num(surf.radius(i, j))).unwrap();
        }
    }
    crate::write_atomic(&path, &csv)?;
    let report = AnnulusReport {
        monodromy: &a.monodromy,
        epsilon: a.eps,
        n_theta: surf.n_theta,
        n_z: surf.n_z,
        winding: surf.winding,
        roundtrip_error: err,
        transverse: trans.is_transverse(),
        min_sine: trans.min_sine,
        tangencies: trans.locus.len(),
        grid_csv: path.display().to_string(),
    };
    let mut so = std::io::stdout().lock();
    std::io::Write::write_all(&mut so, json(&report).as_bytes()).map_err(|e| Failure::Property(e.to_string()))?;
    if err > a.tol {
        return Err(Failure::Property(format!("roundtrip error {err:e} exceeds {:e}", a.tol)));
    }
    if !report.transverse {
        return Err(Failure::Property(format!("surface tangent to the contact planes at {} points", report.tangencies)));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct TemplateArgs {
    /// Signed full twists of the x ear.
    #[arg(long, allow_hyphen_values = true)]
    m: i64,
    /// Signed full twists of the y ear.
    #[arg(long, allow_hyphen_values = true)]
    n: i64,
    /// Branches cross under instead of over.
    #[arg(long)]
    star: bool,
}

impl TemplateArgs {
    fn spec(&self) -> TemplateSpec {
        lorenz_like(self.m, self.n, self.star)
    }
}

#[derive(Args, Debug)]
pub struct WordsArgs {
    #[arg(long)]
    max_len: usize,
}

pub fn template_words(a: &WordsArgs, sink: &Sink) -> Result<(), Failure> {
    let mut out = String::new();
    for w in enumerate_words(a.max_len) {
        writeln!(out, "{w}").unwrap();
    }
    sink.emit(&out)
}

#[derive(Args, Debug)]
pub struct KnotsArgs {
    #[command(flatten)]
    template: TemplateArgs,
    #[arg(long)]
    max_len: usize,
}

pub fn template_knots(a: &KnotsArgs, sink: &Sink) -> Result<(), Failure> {
    let t = a.template.spec();
    let mut out = String::new();
    for w in enumerate_words(a.max_len) {
        let b = word_to_braid(&t, &w)?;
        let r = KnotReport::new(w.to_string(), &b)?;
        out.push_str(&serde_json::to_string(&r).expect("serializable"));
        out.push('\n');
    }
    sink.emit(&out)
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    #[command(flatten)]
    template: TemplateArgs,
    #[arg(long)]
    w1: String,
    #[arg(long)]
    w2: String,
}

pub fn template_link(a: &LinkArgs, sink: &Sink) -> Result<(), Failure> {
    let t = a.template.spec();
    let w1: CyclicWord = a.w1.parse().map_err(|e: Error| Failure::Input(format!("--w1: {e}")))?;
    let w2: CyclicWord = a.w2.parse().map_err(|e: Error| Failure::Input(format!("--w2: {e}")))?;
    let lk = pair_linking(&t, &w1, &w2)?;
    // cross-check against the embedded curves
    let curves = words_to_curves(&t, &[&w1, &w2], &CurveGeometry::default())?;
    let geometric = gauss_linking(&curves[0], &curves[1], LinkingMethod::SignedCrossings)?;
    sink.emit(&format!("{lk}\n"))?;
    if geometric != lk as f64 {
        return Err(Failure::Property(format!("embedded curves link {geometric} times, braid count gives {lk}")));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ReebArgs {
    /// Unit vector x1,x2,x3,x4.
    #[arg(long, allow_hyphen_values = true)]
    point: String,
}

#[derive(Serialize)]
struct ReebJson {
    point: [f64; 4],
    reeb: [f64; 4],
    alpha_on_reeb: f64,
    kernel_residual: f64,
}

pub fn tight_reeb(a: &ReebArgs, sink: &Sink) -> Result<(), Failure> {
    let v = parse_tuple(&a.point, 4).map_err(|e| Failure::Input(format!("--point: {e}")))?;
    let r = std_tight_eval(&Point4::new(v[0], v[1], v[2], v[3]))?;
    sink.emit(&json(&ReebJson {
        point: [v[0], v[1], v[2], v[3]],
        reeb: r.reeb,
        alpha_on_reeb: r.alpha_on_reeb,
        kernel_residual: r.kernel_residual,
    }))?;
    if (r.alpha_on_reeb - 1.0).abs() > 1e-12 || r.kernel_residual > 1e-12 {
        return Err(Failure::Property("Reeb conditions fail at this point".into()));
    }
    Ok(())
}
