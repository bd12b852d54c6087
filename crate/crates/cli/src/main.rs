//! `gordon-cmv`: command-line driver for the gordon-cmv library.
//!
//! Subcommands print a JSON summary on stdout, except `sample --family` and
//! `sample --construct-ck`, which print the coefficient window as CSV. With `--out DIR`
//! the artifacts (CSV tables, JSON certificates, matrix dumps) are written into `DIR` as
//! well; `run` always writes its artifacts. Exit status: 0 on success / PASS, 2 when the evidence
//! or a certificate FAILs, 1 on errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use gordon_cmv::cmv::{Boundary, CmvOperator};
use gordon_cmv::dynamics::{
    find_even_repetition, gordon_periods, orbit, orbit_deviations, skew_repetition_times, validate_certificate,
    TorusDynamics, TorusPoint,
};
use gordon_cmv::frequency::Frequency;
use gordon_cmv::pipeline::{
    build_dynamics, construct_level, describe_frequency, run, ConstructionSpec, DynamicsKind, ExperimentConfig,
    EXIT_ERROR, EXIT_EVIDENCE_FAIL, EXIT_PASS,
};
use gordon_cmv::sampling::{ball_radius, construct_ck, verblunsky_window, SamplingFunction};
use gordon_cmv::transfer::{
    certify_gordon, evidence_at_period, no_point_spectrum_evidence, validate_lipschitz, Verdict,
};
use gordon_cmv::{Error, Precision, Result, VerblunskySequence};
use num_complex::Complex64;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "gordon-cmv",
    version,
    about = "Gordon certification and spectral evidence for quasi-periodic CMV operators"
)]
struct Cli {
    /// Experiment configuration (TOML) for `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized validation sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Fixed-point precision of torus phases, in bits.
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Continued fraction, convergents and approximation scores of a frequency.
    Frequency(FrequencyArgs),
    /// Even repetition times of a rotation or skew-shift orbit.
    Orbit(OrbitArgs),
    /// Verblunsky coefficients from a sampling function along an orbit.
    Sample(SampleArgs),
    /// Gordon certificate and c(z) evidence for a coefficient file.
    Gordon(GordonArgs),
    /// Assemble a finite CMV matrix; optional spectrum and eigenvector profiles.
    Cmv(CmvArgs),
    /// Run a configured pipeline (requires --config).
    Run,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["spec", "value", "liouville"])))]
struct FrequencyArgs {
    /// Same as `--value`.
    spec: Option<String>,
    /// `golden`, `silver`, `sqrt:N`, `p/q` or an exact decimal.
    #[arg(long)]
    value: Option<String>,
    /// Liouville-type construction `BASE,DEPTH`.
    #[arg(long, value_name = "BASE,DEPTH")]
    liouville: Option<String>,
    #[arg(long, default_value_t = 12)]
    terms: usize,
    /// Scan `q <= max_q` for the smallest `q <q a>`.
    #[arg(long, default_value_t = 10_000)]
    max_q: u64,
}

impl FrequencyArgs {
    fn label(&self) -> String {
        match (&self.spec, &self.value, &self.liouville) {
            (_, _, Some(l)) => format!("liouville:{l}"),
            (_, Some(v), _) | (Some(v), _, _) => v.clone(),
            _ => unreachable!("clap requires one source"),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Rotation,
    #[value(name = "skew", alias = "skew-shift")]
    SkewShift,
}

impl From<Kind> for DynamicsKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Rotation => DynamicsKind::Rotation,
            Kind::SkewShift => DynamicsKind::SkewShift,
        }
    }
}

#[derive(Args, Debug)]
struct DynamicsArgs {
    #[arg(long, visible_alias = "dynamics", value_enum, default_value_t = Kind::Rotation)]
    system: Kind,
    /// Frequency of each rotation coordinate (repeat for several); the skew-shift uses the first.
    #[arg(long = "freq", visible_alias = "frequency", required = true)]
    frequencies: Vec<String>,
    /// Start point coordinates, comma separated.
    #[arg(
        long,
        visible_alias = "start",
        value_delimiter = ',',
        default_value = "0.3",
        allow_hyphen_values = true
    )]
    omega: Vec<f64>,
}

#[derive(Args, Debug)]
struct OrbitArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Horizon factor: deviations are checked for `0 <= k <= s q`.
    #[arg(long, default_value_t = 4.0)]
    s: f64,
    #[arg(long, visible_alias = "q-max", default_value_t = 100_000)]
    qmax: u64,
    /// Skew-shift only: also build this many repetition times from the frequency's
    /// designated denominators (horizon factor `--r`).
    #[arg(long, default_value_t = 0)]
    designated: usize,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Write the first N orbit points to orbit.csv.
    #[arg(long, default_value_t = 0)]
    points: usize,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").args(["family", "construct_ck", "levels"])))]
struct SampleArgs {
    #[command(flatten)]
    dynamics: DynamicsArgs,
    /// Built-in family: `constant`, `exponential` or `cosine`.
    #[arg(long, requires = "window")]
    family: Option<String>,
    /// Family parameters, comma separated (`constant RE[,IM]`, `exponential|cosine LAMBDA,M1[,M2..]`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    params: Vec<f64>,
    /// Tube-constant function from a values file (`re,im` header, one row per tube).
    #[arg(long, value_name = "VALUES_CSV", requires = "window")]
    construct_ck: Option<PathBuf>,
    /// Ball center for `--construct-ck` (defaults to `--omega`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Option<Vec<f64>>,
    /// Number of tubes for `--construct-ck` (defaults to the number of values).
    #[arg(long)]
    period: Option<usize>,
    /// Ball radius for `--construct-ck` (defaults to the largest safe radius at `--epsilon`).
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Window `N_MIN:N_MAX` of the emitted coefficients.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Gordon construction at levels k = 1..=LEVELS (the default mode, 3 levels).
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long, default_value_t = 0.2)]
    epsilon_base: f64,
    #[arg(long, default_value_t = 4.0)]
    s: f64,
    #[arg(long, visible_alias = "q-max", default_value_t = 100_000)]
    qmax: u64,
}

#[derive(Clone, Debug)]
struct Level(u32, u64);

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (k, q) = s.split_once(':').ok_or("expected K:Q")?;
        let k = k.trim().parse().map_err(|_| format!("bad level {k:?}"))?;
        let q = q.trim().parse().map_err(|_| format!("bad period {q:?}"))?;
        Ok(Level(k, q))
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("levels").required(true).args(["k_list", "periods"])))]
struct GordonArgs {
    /// Coefficient CSV (`n,re_alpha,im_alpha,rho`).
    #[arg(long)]
    seq_file: PathBuf,
    /// Levels with their candidate even periods, `K:Q,K:Q,...`.
    #[arg(long, value_delimiter = ',')]
    k_list: Vec<Level>,
    /// Even increasing periods for levels k = 1, 2, ...
    #[arg(long, value_delimiter = ',')]
    periods: Vec<u64>,
    #[arg(long, default_value_t = 512)]
    z_grid: usize,
    /// Also write the JSON report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Random samples per radius for the Lipschitz check (0 skips it).
    #[arg(long, default_value_t = 0)]
    lipschitz_samples: usize,
}

#[derive(Clone, Debug)]
struct Window(i64, i64);

impl FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or("expected A:B")?;
        let a = a.trim().parse().map_err(|_| format!("bad window start {a:?}"))?;
        let b = b.trim().parse().map_err(|_| format!("bad window end {b:?}"))?;
        Ok(Window(a, b))
    }
}

#[derive(Clone, Debug)]
enum BoundaryArg {
    Angles(f64, f64),
    Projection,
}

impl FromStr for BoundaryArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "projection" {
            return Ok(BoundaryArg::Projection);
        }
        let (a, b) = s.split_once(',').ok_or("expected THETA0,THETA1 or `projection`")?;
        let a = a.trim().parse().map_err(|_| format!("bad angle {a:?}"))?;
        let b = b.trim().parse().map_err(|_| format!("bad angle {b:?}"))?;
        Ok(BoundaryArg::Angles(a, b))
    }
}

#[derive(Clone, Debug)]
enum ProfileArg {
    Index(usize),
    All,
}

impl FromStr for ProfileArg {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "all" {
            Ok(ProfileArg::All)
        } else {
            s.parse()
                .map(ProfileArg::Index)
                .map_err(|_| format!("expected an index or `all`, got {s:?}"))
        }
    }
}

#[derive(Args, Debug)]
struct CmvArgs {
    #[arg(long)]
    seq_file: PathBuf,
    /// Window `N_MIN:N_MAX` (defaults to the largest window the file supports).
    #[arg(long, allow_hyphen_values = true)]
    window: Option<Window>,
    /// Boundary angles `THETA0,THETA1` (alpha = e^{i theta} at both edges) or `projection`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    boundary: BoundaryArg,
    /// Compute eigenvalues and write eigenvalues.csv.
    #[arg(long)]
    eig: bool,
    /// Eigenvector decay profile(s); implies --eig.
    #[arg(long)]
    profile: Option<ProfileArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}

fn precision(cli: &Cli) -> Result<Precision> {
    cli.precision_bits.map_or(Ok(Precision::default()), Precision::new)
}

/// Writes `bytes` to stdout; a closed pipe (`gordon-cmv ... | head`) is not an error.
fn emit(bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn print(v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    emit(text.as_bytes())
}

/// Writes `name` into the output directory, if one was given.
fn artifact(cli: &Cli, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<Option<String>> {
    match &cli.out {
        None => Ok(None),
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            write(&path)?;
            Ok(Some(path.display().to_string()))
        }
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Frequency(a) => {
            let f = Frequency::parse(&a.label(), precision(cli)?)?;
            let v = describe_frequency(&f, a.terms, a.max_q)?;
            artifact(cli, "frequency.json", |p| write_json(p, &v))?;
            artifact(cli, "frequency.csv", |p| {
                let mut out = csv::Writer::from_path(p)?;
                out.write_record(["q", "p", "q_dist"])?;
                for c in v["convergents"].as_array().into_iter().flatten() {
                    let d = c["scaled_distance"].as_f64().map(|d| d.to_string()).unwrap_or_default();
                    out.write_record([c["q"].as_str().unwrap_or(""), c["p"].as_str().unwrap_or(""), &d])?;
                }
                out.flush()?;
                Ok(())
            })?;
            print(&v)?;
            Ok(EXIT_PASS)
        }
        Command::Orbit(a) => orbit_cmd(cli, a),
        Command::Sample(a) => sample_cmd(cli, a),
        Command::Gordon(a) => gordon_cmd(cli, a),
        Command::Cmv(a) => cmv_cmd(cli, a),
        Command::Run => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| Error::Config("run needs --config PATH".into()))?;
            let mut config = ExperimentConfig::load(path)?;
            if let Some(seed) = cli.seed {
                config.seed = seed;
            }
            if let Some(bits) = cli.precision_bits {
                config.precision_bits = bits;
            }
            let out = cli
                .out
                .clone()
                .or_else(|| config.output.clone())
                .unwrap_or_else(|| PathBuf::from("gordon-cmv-run"));
            let outcome = run(&config, &out)?;
            let r = &outcome.report;
            for c in &r.checks {
                eprintln!(
                    "[{}] {}: {} (bound {})",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.bound
                );
            }
            if let Some(f) = &r.failure {
                eprintln!("error in stage {}: {}", f.stage, f.message);
            }
            print(&json!({
                "scenario": r.scenario,
                "verdict": r.verdict,
                "failure": r.failure,
                "out": out.display().to_string(),
            }))?;
            Ok(r.exit_code())
        }
    }
}

fn frequencies(cli: &Cli, d: &DynamicsArgs) -> Result<Vec<Frequency>> {
    let p = precision(cli)?;
    d.frequencies.iter().map(|s| Frequency::parse(s, p)).collect()
}

fn orbit_cmd(cli: &Cli, a: &OrbitArgs) -> Result<i32> {
    let freqs = frequencies(cli, &a.dynamics)?;
    let (t, w) = build_dynamics(a.dynamics.system.into(), &freqs, &a.dynamics.omega)?;
    let cert = find_even_repetition(&t, &w, a.epsilon, a.s, a.qmax)?;
    let rescan = cert.as_ref().and_then(|c| validate_certificate(&t, &w, c));
    let mut v = json!({
        "dynamics": t.name(),
        "minimality": t.minimality_hint(),
        "certificate": cert,
        "orbit_scan_deviation": rescan,
    });
    if a.designated > 0 {
        if !matches!(a.dynamics.system, Kind::SkewShift) {
            return Err(Error::Domain("--designated applies to the skew-shift only".into()));
        }
        v["designated"] = json!(skew_repetition_times(&freqs[0], &w, a.epsilon, a.r, a.designated)?);
    }
    if a.points > 0 {
        let pts = orbit(&t, &w, a.points);
        artifact(cli, "orbit.csv", |p| {
            let mut out = csv::Writer::from_path(p)?;
            let mut header = vec!["n".to_string()];
            header.extend((0..t.dim()).map(|i| format!("x{i}")));
            out.write_record(&header)?;
            for (n, x) in pts.iter().enumerate() {
                let mut row = vec![n.to_string()];
                row.extend(x.to_f64().iter().map(|c| c.to_string()));
                out.write_record(&row)?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    if let Some(c) = &cert {
        let devs = orbit_deviations(&t, &w, c.q, c.horizon);
        artifact(cli, "deviations.csv", |p| {
            let mut out = csv::Writer::from_path(p)?;
            out.write_record(["k", "dist"])?;
            for (k, d) in devs.iter().enumerate() {
                out.write_record([k.to_string(), d.to_string()])?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    artifact(cli, "repetition.json", |p| write_json(p, &v))?;
    print(&v)?;
    Ok(if cert.is_some() { EXIT_PASS } else { EXIT_EVIDENCE_FAIL })
}

fn sample_cmd(cli: &Cli, a: &SampleArgs) -> Result<i32> {
    let freqs = frequencies(cli, &a.dynamics)?;
    let (t, w) = build_dynamics(a.dynamics.system.into(), &freqs, &a.dynamics.omega)?;
    let function = if let Some(name) = &a.family {
        SamplingFunction::family(name, &a.params)?
    } else if let Some(values) = &a.construct_ck {
        let values = read_values(values)?;
        let q = a.period.unwrap_or(values.len());
        let center = match &a.center {
            Some(c) => TorusPoint::from_f64(c, w.precision())?,
            None => w.clone(),
        };
        let radius = match a.radius {
            Some(r) => r,
            None => ball_radius(&t, &center, q, a.epsilon)?.radius,
        };
        construct_ck(&t, &center, q, radius, &values)?
    } else {
        return levels_cmd(cli, a, &t, &w);
    };
    let Window(n_min, n_max) = a.window.clone().expect("clap requires --window");
    let seq = verblunsky_window(&function, &t, &w, n_min, n_max)?;
    artifact(cli, "sequence.csv", |p| seq.save(p))?;
    artifact(cli, "sampling.json", |p| {
        write_json(
            p,
            &json!({"dynamics": t.name(), "omega": w.to_f64(), "function": function.describe(), "window": [n_min, n_max]}),
        )
    })?;
    let mut text = Vec::new();
    seq.write_csv(&mut text)?;
    emit(&text)?;
    Ok(EXIT_PASS)
}

/// Tube values for `--construct-ck`: a CSV with columns `re,im`.
fn read_values(path: &Path) -> Result<Vec<Complex64>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rd.deserialize() {
        let (re, im): (f64, f64) = row?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}

fn levels_cmd(cli: &Cli, a: &SampleArgs, t: &TorusDynamics, w: &TorusPoint) -> Result<i32> {
    let certs = gordon_periods(t, w, a.epsilon_base, a.s, a.levels.unwrap_or(3), a.qmax)?;
    let spec = ConstructionSpec::default();
    let mut rows = Vec::new();
    let mut ok = true;
    for (i, cert) in certs.iter().enumerate() {
        let level = construct_level(t, w, i as u32 + 1, cert, &spec)?;
        let q = level.q as i64;
        let (n_min, n_max) = a.window.as_ref().map_or((-2 * q + 1, 2 * q + 1), |w| (w.0, w.1));
        let seq = verblunsky_window(&level.function, t, &level.start, n_min, n_max)?;
        let gordon = certify_gordon(&seq, &[(level.k, level.q as u64)])?;
        ok &= level.fk.member && level.differences_pass() && gordon.all_pass();
        let mut v = level.describe();
        v["gordon"] = json!(gordon.levels[0]);
        artifact(cli, &format!("sampling_k{}.json", level.k), |p| write_json(p, &v))?;
        artifact(cli, &format!("sequence_k{}.csv", level.k), |p| seq.save(p))?;
        rows.push(json!({
            "k": level.k,
            "q": level.q,
            "radius": level.ball.radius,
            "fk_member": level.fk.member,
            "differences_pass": level.differences_pass(),
            "gordon_pass": gordon.all_pass(),
        }));
    }
    print(&json!({"dynamics": t.name(), "levels": rows}))?;
    Ok(if ok { EXIT_PASS } else { EXIT_EVIDENCE_FAIL })
}

fn gordon_cmd(cli: &Cli, a: &GordonArgs) -> Result<i32> {
    let seq = VerblunskySequence::load(&a.seq_file)?;
    let levels: Vec<(u32, u64)> = if a.k_list.is_empty() {
        a.periods.iter().enumerate().map(|(i, &q)| (i as u32 + 1, q)).collect()
    } else {
        a.k_list.iter().map(|l| (l.0, l.1)).collect()
    };
    let cert = certify_gordon(&seq, &levels)?;
    let ev = match cert.best_level() {
        Some(_) => no_point_spectrum_evidence(&seq, &cert, a.z_grid)?,
        None => evidence_at_period(&seq, levels.last().expect("clap requires levels").1, a.z_grid)?,
    };
    let mut lipschitz = Vec::new();
    if a.lipschitz_samples > 0 {
        for (i, l) in cert.levels.iter().enumerate() {
            lipschitz.push(validate_lipschitz(
                l.r_k,
                a.lipschitz_samples,
                cli.seed.unwrap_or(0).wrapping_add(i as u64),
            )?);
        }
    }
    let v = json!({
        "seed": cli.seed.unwrap_or(0),
        "certificate": cert,
        "lipschitz": lipschitz,
        "evidence": {
            "q": ev.q, "k": ev.k, "grid": ev.grid, "min_c": ev.min_c, "argmin_angle": ev.argmin_angle,
            "min_c_exact": ev.min_c_exact, "unresolved_points": ev.unresolved_points,
            "points_below_threshold": ev.points_below_threshold, "threshold": ev.threshold, "verdict": ev.verdict,
        },
    });
    artifact(cli, "gordon_certificate.json", |p| write_json(p, &v))?;
    if let Some(path) = &a.report {
        write_json(path, &v)?;
    }
    artifact(cli, "evidence.csv", |p| ev.write_csv(std::fs::File::create(p)?))?;
    print(&v)?;
    let pass = cert.any_pass() && ev.verdict == Verdict::Pass && lipschitz.iter().all(|l| l.violations == 0);
    Ok(if pass { EXIT_PASS } else { EXIT_EVIDENCE_FAIL })
}

fn cmv_cmd(cli: &Cli, a: &CmvArgs) -> Result<i32> {
    let seq = VerblunskySequence::load(&a.seq_file)?;
    let boundary = match a.boundary {
        BoundaryArg::Angles(t0, t1) => {
            Boundary::unimodular(Complex64::from_polar(1.0, t0), Complex64::from_polar(1.0, t1))
        }
        BoundaryArg::Projection => Boundary::Projection,
    };
    let Window(n_min, n_max) = a.window.clone().unwrap_or(match boundary {
        Boundary::Projection => Window(seq.n_min() + 1, seq.n_max()),
        Boundary::Unimodular { .. } => Window(seq.n_min(), seq.n_max()),
    });
    let e = CmvOperator::assemble(&seq, n_min, n_max, boundary)?;
    let mut v = json!({
        "size": e.size(),
        "window": [n_min, n_max],
        "boundary": boundary,
        "unitarity_defect": e.unitarity_defect(),
        "factor_defect": e.factor_defect(),
    });
    artifact(cli, "cmv_matrix.txt", |p| {
        e.write_triplets(std::io::BufWriter::new(std::fs::File::create(p)?))
    })?;
    if a.eig || a.profile.is_some() {
        let spec = e.spectrum()?;
        v["max_residual"] = json!(spec.max_residual());
        v["det_error"] = json!((spec.product() - e.det_from_factors()).norm());
        v["min_participation_ratio"] = json!(spec.min_participation_ratio());
        artifact(cli, "eigenvalues.csv", |p| spec.write_csv(std::fs::File::create(p)?))?;
        match &a.profile {
            Some(ProfileArg::Index(i)) => {
                let p = spec.profile(*i)?;
                artifact(cli, &format!("profile_{i}.csv"), |path| {
                    p.write_csv(std::fs::File::create(path)?)
                })?;
                v["profile"] = json!(p);
            }
            Some(ProfileArg::All) => {
                let profiles = spec.profiles();
                artifact(cli, "profiles.csv", |path| {
                    let mut out = csv::Writer::from_path(path)?;
                    out.write_record(["index", "shell", "mass"])?;
                    for p in &profiles {
                        for (s, m) in p.shells.iter().enumerate() {
                            out.write_record([p.index.to_string(), s.to_string(), m.to_string()])?;
                        }
                    }
                    out.flush()?;
                    Ok(())
                })?;
                v["participation_ratios"] = json!(profiles.iter().map(|p| p.participation_ratio).collect::<Vec<_>>());
            }
            None => {}
        }
    }
    print(&v)?;
    Ok(EXIT_PASS)
}
