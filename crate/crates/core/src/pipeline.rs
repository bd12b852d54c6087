//! Config-driven experiment runs: frequency -> dynamics -> sampling -> transfer -> cmv.
//!
//! A run writes one artifact per stage into the output directory, a `report.json` that
//! depends only on the configuration (so two runs are byte-identical), and the wall-clock
//! time per stage separately in `timings.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cmv::{gauge_check, Boundary, CmvOperator};
use crate::dynamics::{gordon_periods, validate_certificate, RepetitionCertificate, TorusDynamics, TorusPoint};
use crate::error::{Error, Result};
use crate::frequency::{badly_approximable_score, Frequency, DEFAULT_BADLY_APPROXIMABLE_THRESHOLD};
use crate::phase::Precision;
use crate::sampling::{
    ball_radius, construct_ck, distance_to_ck, fk_membership, gordon_differences, gordon_point, verblunsky_window,
    BallRadius, CkDistance, FkMembership, SamplingFunction, TubeFamily,
};
use crate::sequence::VerblunskySequence;
use crate::transfer::{
    certify_gordon, evidence_at_period, gamma_bound, no_point_spectrum_evidence, validate_lipschitz, Evidence,
    GordonCertificate, Verdict,
};

/// Schema version of [`ExperimentConfig`].
pub const CONFIG_VERSION: u32 = 1;

/// Exit status of a run whose checks all pass.
pub const EXIT_PASS: i32 = 0;
/// Exit status of a run that completed with at least one failed check.
pub const EXIT_EVIDENCE_FAIL: i32 = 2;
/// Exit status of a run aborted by an error.
pub const EXIT_ERROR: i32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// `alpha = 0`: every check passes and `c(z) = 1`.
    Free,
    /// The tube construction over the rotation by `liouville:2,4`.
    LiouvilleRotation,
    /// The tube construction over the golden-mean rotation.
    GoldenRotation,
    /// The tube construction over the configured frequency and dynamics.
    Construction,
    /// A constant background with one impurity: the evidence is expected to FAIL.
    ImpurityControl,
    /// Coefficients read from a CSV file.
    SequenceFile,
}

impl Scenario {
    fn default_frequency(self) -> &'static str {
        match self {
            Scenario::LiouvilleRotation => "liouville:2,4",
            _ => "golden",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicsKind {
    Rotation,
    #[serde(alias = "skew")]
    SkewShift,
}

/// Orbit and repetition settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DynamicsSpec {
    pub kind: DynamicsKind,
    /// One frequency per rotation coordinate; the skew-shift uses the first.
    /// `None` takes the scenario default.
    pub frequencies: Option<Vec<String>>,
    pub start: Vec<f64>,
    /// Number of Gordon levels `k = 1..=levels`.
    pub levels: u32,
    /// `epsilon_k = epsilon_base^k`.
    pub epsilon_base: f64,
    /// Repetition horizon factor.
    pub s: f64,
    pub q_max: u64,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        DynamicsSpec {
            kind: DynamicsKind::Rotation,
            frequencies: None,
            start: vec![0.3],
            levels: 3,
            epsilon_base: 0.2,
            s: 4.0,
            q_max: 100_000,
        }
    }
}

/// The sampling function built at each level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructionSpec {
    /// Tube `j` carries `tube_modulus * e^{2 pi i j / q}`.
    pub tube_modulus: f64,
    /// The smooth perturbation has amplitude `perturbation_fraction * Gamma(k, q, gamma_radius)`.
    pub perturbation_fraction: f64,
    pub gamma_radius: f64,
    pub harmonics: Vec<i64>,
    /// The start point is `T^{2q}(center + offset_fraction * radius)`.
    pub offset_fraction: f64,
    /// Grid resolution per tube for the distance to `C_k`.
    pub distance_grid: usize,
}

impl Default for ConstructionSpec {
    fn default() -> Self {
        ConstructionSpec {
            tube_modulus: 0.5,
            perturbation_fraction: 1.0 / 16.0,
            gamma_radius: 0.6,
            harmonics: vec![1],
            offset_fraction: 0.37,
            distance_grid: 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImpuritySpec {
    pub background: [f64; 2],
    pub value: [f64; 2],
    pub site: i64,
    /// Period at which `c(z)` is tabulated.
    pub period: u64,
}

impl Default for ImpuritySpec {
    fn default() -> Self {
        ImpuritySpec {
            background: [0.6, 0.0],
            value: [0.0, 0.6],
            site: 0,
            period: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SequenceSpec {
    /// CSV with columns `n,re_alpha,im_alpha,rho`.
    pub file: Option<PathBuf>,
    /// Periods `q_1 < q_2 < ...` to certify (levels `k = 1, 2, ...`); also used by the free scenario.
    pub periods: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvidenceSpec {
    pub z_grid: usize,
}

impl Default for EvidenceSpec {
    fn default() -> Self {
        EvidenceSpec { z_grid: 512 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmvSpec {
    /// Window size `N`; the window is `[-N/2, N - 1 - N/2]`.
    pub size: usize,
    /// Boundary angles: `alpha(n_min - 1) = e^{i b0}`, `alpha(n_max) = e^{i b1}`.
    pub boundary_angles: [f64; 2],
    pub spectrum: bool,
    pub gauge_theta: f64,
}

impl Default for CmvSpec {
    fn default() -> Self {
        CmvSpec {
            size: 200,
            boundary_angles: [0.0, 0.0],
            spectrum: true,
            gauge_theta: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidationSpec {
    /// Random samples per radius in the Lipschitz check (0 skips it).
    pub lipschitz_samples: usize,
}

impl Default for ValidationSpec {
    fn default() -> Self {
        ValidationSpec {
            lipschitz_samples: 10_000,
        }
    }
}

/// Acceptance tolerances of the run checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub unitarity: f64,
    pub factor: f64,
    pub spectrum: f64,
    pub gauge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitarity: 1e-12,
            factor: 1e-14,
            spectrum: 1e-10,
            gauge: 1e-10,
        }
    }
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_bits() -> u32 {
    Precision::default().bits()
}

/// A run configuration (TOML). Every section is optional; defaults are the module tolerances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_bits")]
    pub precision_bits: u32,
    /// Output directory; the command line may override it. Not echoed in the report.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default)]
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub impurity: ImpuritySpec,
    #[serde(default)]
    pub sequence: SequenceSpec,
    #[serde(default)]
    pub evidence: EvidenceSpec,
    #[serde(default)]
    pub cmv: CmvSpec,
    #[serde(default)]
    pub validation: ValidationSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    /// Defaults for a scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let mut c: ExperimentConfig =
            toml::from_str(&format!("scenario = {:?}", kebab(scenario))).expect("preset parses");
        if scenario == Scenario::Free {
            c.sequence.periods = vec![2, 4, 8];
        }
        c
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c = Self::parse(text)?;
        c.validate()?;
        Ok(c)
    }

    fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; a relative `sequence.file` is taken relative to the config's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::parse(&std::fs::read_to_string(path)?)?;
        if let (Some(file), Some(dir)) = (&c.sequence.file, path.parent()) {
            if file.is_relative() {
                c.sequence.file = Some(dir.join(file));
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn precision(&self) -> Result<Precision> {
        Precision::new(self.precision_bits)
    }

    fn frequencies(&self) -> Vec<String> {
        self.dynamics
            .frequencies
            .clone()
            .unwrap_or_else(|| vec![self.scenario.default_frequency().to_string()])
    }

    /// Periods for scenarios that do not construct them.
    fn given_periods(&self) -> Vec<u64> {
        match self.scenario {
            Scenario::ImpurityControl => vec![self.impurity.period],
            _ => self.sequence.periods.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        self.precision()?;
        if self.evidence.z_grid == 0 {
            return bad("evidence.z_grid must be positive".into());
        }
        if self.cmv.size == 0 {
            return bad("cmv.size must be positive".into());
        }
        match self.scenario {
            Scenario::Free | Scenario::SequenceFile | Scenario::ImpurityControl => {
                let periods = self.given_periods();
                if periods.is_empty() {
                    return bad("at least one period is required".into());
                }
                if periods.iter().any(|&q| q == 0 || q % 2 != 0) || periods.windows(2).any(|w| w[0] >= w[1]) {
                    return bad(format!("periods must be even, positive and increasing: {periods:?}"));
                }
            }
            _ => {
                if self.dynamics.levels == 0 {
                    return bad("dynamics.levels must be positive".into());
                }
                let d = self.frequencies().len();
                let want = match self.dynamics.kind {
                    DynamicsKind::Rotation => d,
                    DynamicsKind::SkewShift => 2,
                };
                if self.dynamics.start.len() != want {
                    return bad(format!(
                        "dynamics.start needs {want} coordinates, got {}",
                        self.dynamics.start.len()
                    ));
                }
            }
        }
        if self.scenario == Scenario::SequenceFile {
            match &self.sequence.file {
                None => return bad("sequence.file is required for the sequence-file scenario".into()),
                Some(p) if !p.exists() => return bad(format!("sequence file {} does not exist", p.display())),
                _ => {}
            }
        }
        Ok(())
    }
}

fn kebab(s: Scenario) -> String {
    serde_json::to_value(s)
        .expect("unit variant")
        .as_str()
        .expect("string")
        .to_string()
}

/// One pass/fail line of the report, pointing at the artifact that backs it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub stage: String,
    pub pass: bool,
    pub value: f64,
    pub bound: f64,
    pub artifact: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub status: String,
    pub artifacts: Vec<String>,
    pub summary: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub stage: String,
    pub message: String,
}

/// Everything a run produced, minus timings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub scenario: Scenario,
    pub seed: u64,
    /// The effective configuration; feeding it back reproduces the run.
    pub config: ExperimentConfig,
    pub stages: Vec<StageRecord>,
    pub checks: Vec<Check>,
    pub verdict: Verdict,
    pub failure: Option<Failure>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            EXIT_ERROR
        } else if self.verdict == Verdict::Pass {
            EXIT_PASS
        } else {
            EXIT_EVIDENCE_FAIL
        }
    }
}

struct Run<'a> {
    config: &'a ExperimentConfig,
    out: PathBuf,
    stages: Vec<StageRecord>,
    checks: Vec<Check>,
    timings: BTreeMap<String, f64>,
}

impl<'a> Run<'a> {
    fn stage<T>(&mut self, name: &str, body: impl FnOnce(&mut StageCtx) -> Result<T>) -> Result<T> {
        let started = Instant::now();
        let mut ctx = StageCtx {
            name: name.to_string(),
            out: self.out.clone(),
            seed: self.config.seed,
            artifacts: Vec::new(),
            checks: Vec::new(),
            summary: Value::Null,
        };
        let result = body(&mut ctx);
        self.timings.insert(name.to_string(), started.elapsed().as_secs_f64());
        self.stages.push(StageRecord {
            name: name.to_string(),
            status: if result.is_ok() { "ok" } else { "failed" }.into(),
            artifacts: ctx.artifacts,
            summary: ctx.summary,
        });
        self.checks.extend(ctx.checks);
        result.map_err(|e| {
            // tag the error with its stage for the failure marker
            Error::Internal(format!("{name}: {e}"))
        })
    }
}

struct StageCtx {
    name: String,
    out: PathBuf,
    seed: u64,
    artifacts: Vec<String>,
    checks: Vec<Check>,
    summary: Value,
}

impl StageCtx {
    /// Writes `{ "seed": ..., "stage": ..., "data": value }` as pretty JSON.
    fn json(&mut self, file: &str, value: &impl Serialize) -> Result<()> {
        let wrapped = json!({ "seed": self.seed, "stage": self.name, "data": value });
        let mut text = serde_json::to_string_pretty(&wrapped)?;
        text.push('\n');
        std::fs::write(self.out.join(file), text)?;
        self.artifacts.push(file.to_string());
        Ok(())
    }

    fn file(&mut self, file: &str, write: impl FnOnce(std::fs::File) -> Result<()>) -> Result<()> {
        write(std::fs::File::create(self.out.join(file))?)?;
        self.artifacts.push(file.to_string());
        Ok(())
    }

    fn check(&mut self, name: &str, pass: bool, value: f64, bound: f64, artifact: &str) {
        self.checks.push(Check {
            name: name.to_string(),
            stage: self.name.clone(),
            pass,
            value,
            bound,
            artifact: artifact.to_string(),
        });
    }
}

/// Result of [`run`]: the report plus per-stage seconds.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub timings: BTreeMap<String, f64>,
}

/// What the transfer and cmv stages judge.
struct Subject {
    /// `(k, q_k, window)`: each level is certified on its own window (constructions build
    /// a separate sampling function per level).
    windows: Vec<(u32, u64, VerblunskySequence)>,
    /// Coefficients for the CMV stage.
    cmv_seq: VerblunskySequence,
}

impl Subject {
    fn shared(seq: VerblunskySequence, levels: Vec<(u32, u64)>) -> Self {
        Subject {
            windows: levels.into_iter().map(|(k, q)| (k, q, seq.clone())).collect(),
            cmv_seq: seq,
        }
    }
}

/// Runs the configured pipeline into `out` (created if needed), writes `report.json` and
/// `timings.json`, and returns both. Stage errors are recorded in the report rather
/// than returned; only a failure to create the output directory is an `Err`.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out)?;
    let mut echo = config.clone();
    echo.output = None;
    let mut r = Run {
        config,
        out: out.to_path_buf(),
        stages: Vec::new(),
        checks: Vec::new(),
        timings: BTreeMap::new(),
    };
    let result = config.validate().and_then(|_| execute(&mut r));
    let failure = result.err().map(|e| {
        let msg = e.to_string();
        let stage = r
            .stages
            .iter()
            .find(|s| s.status == "failed")
            .map_or("config".to_string(), |s| s.name.clone());
        Failure {
            message: msg
                .strip_prefix("internal error: ")
                .map(|m| m.to_string())
                .unwrap_or(msg),
            stage,
        }
    });
    let verdict = if failure.is_none() && r.checks.iter().all(|c| c.pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let report = RunReport {
        tool: "gordon-cmv".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: config.scenario,
        seed: config.seed,
        config: echo,
        stages: r.stages,
        checks: r.checks,
        verdict,
        failure,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(out.join("report.json"), text)?;
    let mut t = serde_json::to_string_pretty(&r.timings)?;
    t.push('\n');
    std::fs::write(out.join("timings.json"), t)?;
    Ok(RunOutcome {
        report,
        timings: r.timings,
    })
}

fn execute(r: &mut Run) -> Result<()> {
    let config = r.config;
    let subject = match config.scenario {
        Scenario::Free => {
            let periods = config.given_periods();
            let q = *periods.last().expect("validated");
            let half = (2 * q as i64 + 1).max(config.cmv.size as i64);
            let seq = VerblunskySequence::constant(Complex64::new(0.0, 0.0), -half, half)?;
            r.stage("sequence", |s| {
                s.file("sequence.csv", |f| seq.write_csv(f))?;
                s.summary = json!({"kind": "free", "window": [seq.n_min(), seq.n_max()]});
                Ok(())
            })?;
            Subject::shared(seq, levels_of(&periods))
        }
        Scenario::ImpurityControl => {
            let imp = &config.impurity;
            let q = imp.period as i64;
            let half = (2 * q + 1).max(config.cmv.size as i64);
            let c = |v: [f64; 2]| Complex64::new(v[0], v[1]);
            let seq = VerblunskySequence::impurity(c(imp.background), imp.site, c(imp.value), -half, half)?;
            r.stage("sequence", |s| {
                s.file("sequence.csv", |f| seq.write_csv(f))?;
                s.summary =
                    json!({"kind": "impurity", "background": imp.background, "value": imp.value, "site": imp.site});
                Ok(())
            })?;
            Subject::shared(seq, vec![(1, imp.period)])
        }
        Scenario::SequenceFile => {
            let path = config.sequence.file.clone().expect("validated");
            let seq = r.stage("sequence", |s| {
                let seq = VerblunskySequence::load(&path)?;
                let q = *config.sequence.periods.last().expect("validated") as i64;
                seq.require(-2 * q + 1, 2 * q + 1)
                    .map_err(|e| Error::Config(format!("window too small for the largest period: {e}")))?;
                s.file("sequence.csv", |f| seq.write_csv(f))?;
                s.summary = json!({"kind": "file", "window": [seq.n_min(), seq.n_max()]});
                Ok(seq)
            })?;
            Subject::shared(seq, levels_of(&config.sequence.periods))
        }
        Scenario::LiouvilleRotation | Scenario::GoldenRotation | Scenario::Construction => construction(r)?,
    };
    judge(r, subject)
}

fn levels_of(periods: &[u64]) -> Vec<(u32, u64)> {
    periods.iter().enumerate().map(|(i, &q)| (i as u32 + 1, q)).collect()
}

fn construction(r: &mut Run) -> Result<Subject> {
    let config = r.config;
    let p = config.precision()?;
    let labels = config.frequencies();
    let freqs: Vec<Frequency> = r.stage("frequency", |s| {
        let freqs = labels
            .iter()
            .map(|l| Frequency::parse(l, p))
            .collect::<Result<Vec<_>>>()?;
        let rows = freqs
            .iter()
            .map(|f| describe_frequency(f, 12, 10_000))
            .collect::<Result<Vec<_>>>()?;
        s.json("frequency.json", &rows)?;
        s.summary = json!({"frequencies": labels});
        Ok(freqs)
    })?;

    let ds = &config.dynamics;
    let (t, w, certs) = r.stage("dynamics", |s| {
        let (t, w) = build_dynamics(ds.kind, &freqs, &ds.start)?;
        let certs = gordon_periods(&t, &w, ds.epsilon_base, ds.s, ds.levels, ds.q_max)?;
        let mut rows = Vec::new();
        for (i, c) in certs.iter().enumerate() {
            let rescan = validate_certificate(&t, &w, c);
            s.check(
                &format!("repetition k={} q={} re-validated by orbit scan", i + 1, c.q),
                rescan.is_some(),
                rescan.unwrap_or(f64::INFINITY),
                c.epsilon,
                "repetition.json",
            );
            rows.push(json!({"k": i + 1, "certificate": c, "orbit_scan_deviation": rescan}));
        }
        s.json(
            "repetition.json",
            &json!({"dynamics": t.name(), "minimality": t.minimality_hint(), "levels": rows}),
        )?;
        s.summary = json!({"periods": certs.iter().map(|c| c.q).collect::<Vec<_>>()});
        Ok((t, w, certs))
    })?;

    let cs = &config.construction;
    let (functions, starts) = r.stage("sampling", |s| {
        let mut functions = Vec::new();
        let mut starts = Vec::new();
        let mut rows = Vec::new();
        for (i, cert) in certs.iter().enumerate() {
            let level = construct_level(&t, &w, i as u32 + 1, cert, cs)?;
            let (k, q) = (level.k, level.q);
            let artifact = format!("sampling_k{k}.json");
            s.check(
                &format!("f in F_{k} (q={q})"),
                level.fk.member,
                level.fk.distance,
                level.fk.threshold,
                &artifact,
            );
            let worst = level.differences.iter().cloned().fold(0.0, f64::max);
            s.check(
                &format!("four block differences below Gamma/4 (k={k})"),
                level.differences_pass(),
                worst,
                level.fk.gamma.value / 4.0,
                &artifact,
            );
            s.json(&artifact, &level.describe())?;
            rows.push(json!({"k": k, "q": q, "radius": level.ball.radius, "fk_member": level.fk.member}));
            functions.push(level.function);
            starts.push(level.start);
        }
        s.summary = json!(rows);
        Ok((functions, starts))
    })?;

    r.stage("sequence", |s| {
        let mut windows = Vec::new();
        for (i, ((f, w0), c)) in functions.iter().zip(&starts).zip(&certs).enumerate() {
            let q = c.q as i64;
            windows.push((i as u32 + 1, c.q, verblunsky_window(f, &t, w0, -2 * q + 1, 2 * q + 1)?));
        }
        let last = functions.len() - 1;
        let half = (config.cmv.size as i64 + 1) / 2 + 1;
        let cmv_seq = verblunsky_window(&functions[last], &t, &starts[last], -half - 1, half)?;
        let top = &windows[last].2;
        s.file("sequence.csv", |f| top.write_csv(f))?;
        s.summary = json!({"kind": "construction", "level": last + 1, "window": [top.n_min(), top.n_max()]});
        Ok(Subject { windows, cmv_seq })
    })
}

fn judge(r: &mut Run, subject: Subject) -> Result<()> {
    let config = r.config;
    r.stage("transfer", |s| {
        let mut levels = Vec::new();
        for (k, q, seq) in &subject.windows {
            let cert = certify_gordon(seq, &[(*k, *q)])?;
            let l = cert.levels[0].clone();
            s.check(
                &format!("Gordon level k={k} q={q}"),
                l.pass,
                l.measured_defect,
                l.threshold,
                "gordon_certificate.json",
            );
            levels.push(l);
        }
        let cert = GordonCertificate { levels };
        s.json("gordon_certificate.json", &cert)?;

        if config.validation.lipschitz_samples > 0 {
            let mut radii: Vec<f64> = cert.levels.iter().map(|l| l.r_k).collect();
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            let mut rows = Vec::new();
            for (i, &rad) in radii.iter().enumerate() {
                let v = validate_lipschitz(
                    rad,
                    config.validation.lipschitz_samples,
                    config.seed.wrapping_add(i as u64),
                )?;
                s.check(
                    &format!("Lipschitz ratio / L3 at r={rad}"),
                    v.violations == 0,
                    v.max_ratio / v.bound,
                    1.0,
                    "lipschitz.json",
                );
                rows.push(v);
            }
            s.json("lipschitz.json", &rows)?;
        }

        // judge the best certified level; without one, tabulate the largest period anyway
        let (window, ev) = match cert.best_level() {
            Some(best) => {
                let (_, _, seq) = subject
                    .windows
                    .iter()
                    .find(|(k, _, _)| *k == best.k)
                    .expect("level present");
                let single = GordonCertificate {
                    levels: vec![best.clone()],
                };
                (seq, no_point_spectrum_evidence(seq, &single, config.evidence.z_grid)?)
            }
            None => {
                let (k, q, seq) = subject.windows.last().expect("at least one level");
                let mut ev = evidence_at_period(seq, *q, config.evidence.z_grid)?;
                ev.k = Some(*k);
                (seq, ev)
            }
        };
        s.file("evidence.csv", |f| ev.write_csv(f))?;
        s.json("evidence.json", &evidence_summary(&ev, window))?;
        s.check(
            &format!("min c(z) >= 1/4 on {} points (q={})", ev.grid, ev.q),
            ev.verdict == Verdict::Pass,
            ev.min_c,
            ev.threshold,
            "evidence.json",
        );
        s.summary = json!({
            "certified_levels": cert.levels.iter().filter(|l| l.pass).count(),
            "evidence_q": ev.q,
            "min_c": ev.min_c,
            "verdict": ev.verdict,
        });
        Ok(())
    })?;

    let cs = &config.cmv;
    r.stage("cmv", |s| {
        let n = cs.size as i64;
        let n_min = -(n / 2);
        let n_max = n_min + n - 1;
        let boundary = Boundary::unimodular(
            Complex64::from_polar(1.0, cs.boundary_angles[0]),
            Complex64::from_polar(1.0, cs.boundary_angles[1]),
        );
        let e = CmvOperator::assemble(&subject.cmv_seq, n_min, n_max, boundary)?;
        let tol = &config.tolerances;
        let unitarity = e.unitarity_defect();
        let factor = e.factor_defect();
        s.check(
            "unitarity defect",
            unitarity <= tol.unitarity,
            unitarity,
            tol.unitarity,
            "cmv.json",
        );
        s.check(
            "L M equals the displayed entries",
            factor <= tol.factor,
            factor,
            tol.factor,
            "cmv.json",
        );
        s.file("cmv_matrix.txt", |f| e.write_triplets(std::io::BufWriter::new(f)))?;
        let mut summary = json!({
            "size": e.size(),
            "window": [n_min, n_max],
            "boundary": boundary,
            "unitarity_defect": unitarity,
            "factor_defect": factor,
        });
        if cs.spectrum {
            let spec = e.spectrum()?;
            let det_err = (spec.product() - e.det_from_factors()).norm();
            s.check(
                "eigenvalue product equals det L det M",
                det_err <= tol.spectrum,
                det_err,
                tol.spectrum,
                "cmv.json",
            );
            s.file("cmv_spectrum.csv", |f| spec.write_csv(f))?;
            let profiles = spec.profiles();
            s.file("cmv_profiles.csv", |f| {
                let mut out = csv::Writer::from_writer(f);
                out.write_record(["index", "angle", "peak", "participation_ratio"])?;
                for (p, z) in profiles.iter().zip(&spec.eigenvalues) {
                    out.write_record([
                        p.index.to_string(),
                        z.arg().to_string(),
                        p.peak.to_string(),
                        p.participation_ratio.to_string(),
                    ])?;
                }
                out.flush()?;
                Ok(())
            })?;
            let most_localized = profiles
                .iter()
                .min_by(|a, b| a.participation_ratio.total_cmp(&b.participation_ratio))
                .expect("nonempty spectrum");
            s.file("cmv_profile.csv", |f| most_localized.write_csv(f))?;
            let gauge = gauge_check(&subject.cmv_seq, n_min, n_max, boundary, cs.gauge_theta)?;
            s.check(
                "gauge conjugation preserves the spectrum",
                gauge.eigenvalue_defect <= tol.gauge && gauge.conjugation_defect <= tol.gauge,
                gauge.eigenvalue_defect.max(gauge.conjugation_defect),
                tol.gauge,
                "cmv.json",
            );
            summary["max_residual"] = json!(spec.max_residual());
            summary["det_error"] = json!(det_err);
            // monitored diagnostic, not a check
            summary["min_participation_ratio"] = json!(most_localized.participation_ratio);
            summary["most_localized"] = json!({
                "index": most_localized.index,
                "angle": spec.eigenvalues[most_localized.index].arg(),
                "peak": most_localized.peak,
            });
            summary["gauge"] = json!(gauge);
        }
        s.json("cmv.json", &summary)?;
        s.summary = summary;
        Ok(())
    })
}

fn evidence_summary(ev: &Evidence, window: &VerblunskySequence) -> Value {
    json!({
        "q": ev.q,
        "k": ev.k,
        "grid": ev.grid,
        "window": [window.n_min(), window.n_max()],
        "min_c": ev.min_c,
        "argmin_angle": ev.argmin_angle,
        "coarse_min_c": ev.coarse_min_c,
        "min_c_exact": ev.min_c_exact,
        "unresolved_points": ev.unresolved_points,
        "points_below_threshold": ev.points_below_threshold,
        "threshold": ev.threshold,
        "verdict": ev.verdict,
        "table": "evidence.csv",
    })
}

/// Continued fraction, convergent and repetition-denominator scores of a frequency.
pub fn describe_frequency(f: &Frequency, terms: usize, max_q: u64) -> Result<Value> {
    let cf = f.expansion();
    let convergents: Vec<Value> = cf
        .convergents
        .iter()
        .take(terms)
        .map(|c| {
            json!({
                "p": c.p.to_string(),
                "q": c.q.to_string(),
                "scaled_distance": f.scaled_distance(&c.q).ok(),
            })
        })
        .collect();
    let repetition: Vec<Value> = f
        .repetition_denominators()
        .iter()
        .filter(|q| q.bits() <= 64)
        .map(|q| json!({"q": q.to_string(), "scaled_distance": f.scaled_distance(q).ok()}))
        .collect();
    let score = badly_approximable_score(f, max_q, DEFAULT_BADLY_APPROXIMABLE_THRESHOLD)?;
    Ok(json!({
        "label": f.label(),
        "value": f.value().to_f64(),
        "exact": f.exact().map(|e| e.to_string()),
        "partial_quotients": cf.partial_quotients.iter().take(terms).map(|t| t.to_string()).collect::<Vec<_>>(),
        "truncated": cf.truncated,
        "convergents": convergents,
        "repetition_denominators": repetition,
        "badly_approximable": score,
    }))
}

/// The map and its start point: a rotation by all frequencies, or the skew-shift by the first.
pub fn build_dynamics(kind: DynamicsKind, freqs: &[Frequency], start: &[f64]) -> Result<(TorusDynamics, TorusPoint)> {
    let first = freqs
        .first()
        .ok_or_else(|| Error::Domain("no frequency given".into()))?;
    let t = match kind {
        DynamicsKind::Rotation => TorusDynamics::rotation(freqs.iter().map(|f| f.value().clone()).collect())?,
        DynamicsKind::SkewShift => TorusDynamics::skew_shift(first.value().clone()),
    };
    if start.len() != t.dim() {
        return Err(Error::Domain(format!(
            "start point needs {} coordinates, got {}",
            t.dim(),
            start.len()
        )));
    }
    let w = TorusPoint::from_f64(start, first.precision())?;
    Ok((t, w))
}

/// One level of the tube construction: `f = f_C + h e^{2 pi i m.x}` with `f_C` in `C_k`
/// carrying `tube_modulus e^{2 pi i j/q}` on tube `j`, and `h = perturbation_fraction Gamma(k, q, gamma_radius)`.
#[derive(Clone, Debug)]
pub struct Level {
    pub k: u32,
    pub q: usize,
    pub epsilon: f64,
    pub ball: BallRadius,
    pub perturbation: f64,
    pub function: SamplingFunction,
    pub distance: CkDistance,
    pub fk: FkMembership,
    /// `T^{2q}(center + offset)`.
    pub start: TorusPoint,
    pub differences: [f64; 4],
}

impl Level {
    /// The four block differences stay below `Gamma(k, q, sup|f|) / 4`.
    pub fn differences_pass(&self) -> bool {
        let quarter = self.fk.gamma.value / 4.0;
        self.differences.iter().all(|&d| d < quarter)
    }

    pub fn describe(&self) -> Value {
        json!({
            "k": self.k,
            "q": self.q,
            "epsilon": self.epsilon,
            "ball": self.ball,
            "perturbation_amplitude": self.perturbation,
            "function": self.function.describe(),
            "distance_to_ck": self.distance,
            "fk_membership": self.fk,
            "start": self.start.to_f64(),
            "differences": self.differences,
            "differences_pass": self.differences_pass(),
        })
    }
}

pub fn construct_level(
    t: &TorusDynamics,
    w: &TorusPoint,
    k: u32,
    cert: &RepetitionCertificate,
    spec: &ConstructionSpec,
) -> Result<Level> {
    let q = cert.q as usize;
    let ball = ball_radius(t, w, q, cert.epsilon)?;
    let values: Vec<Complex64> = (0..q)
        .map(|j| Complex64::from_polar(spec.tube_modulus, 2.0 * std::f64::consts::PI * j as f64 / q as f64))
        .collect();
    let base = construct_ck(t, w, q, ball.radius, &values)?;
    let h = spec.perturbation_fraction * gamma_bound(k, cert.q, spec.gamma_radius)?.value;
    let function = SamplingFunction::Sum(vec![
        base,
        SamplingFunction::Exponential {
            amplitude: Complex64::new(h, 0.0),
            harmonics: spec.harmonics.clone(),
        },
    ]);
    function.validate()?;
    let tubes = TubeFamily::new(t, w, q, ball.radius)?;
    let distance = distance_to_ck(&function, &tubes, spec.distance_grid)?;
    let fk = fk_membership(&function, &distance, k, cert.q)?;
    let offset = vec![spec.offset_fraction * ball.radius; w.dim()];
    let start = gordon_point(&tubes, &offset)?;
    let differences = gordon_differences(&function, t, &start, q);
    Ok(Level {
        k,
        q,
        epsilon: cert.epsilon,
        ball,
        perturbation: h,
        function,
        distance,
        fk,
        start,
        differences,
    })
}
