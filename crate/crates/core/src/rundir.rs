//! Configuration files, run directories and manifests.
//!
//! A configuration is a JSON document
//!
//! ```json
//! {
//!   "system": {"l": 2, "alpha": [1, 1], "gamma": [1, 0.5], "beta": [0, 0], "F": "conj(z1)^2*z2"},
//!   "grid": {"kind": "radial", "n": 5, "points": 4000, "r_max": 200.0},
//!   "run": {"T": 20, "integrator": {"dt": 0.001}, "initial": {"kind": "groundState", "amplitude": 0.5}}
//! }
//! ```
//!
//! with optional `system.sigma`, `run.seed`, `run.samples`, and the
//! `morawetz` and `scattering` sections.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dichotomy::ScatteringOptions;
use crate::evolve::{IntegratorConfig, Scheme};
use crate::grid::{Field, GridDesc};
use crate::nonlin::{check_hypotheses, parse_potential, HypothesisReport, System, SystemSpec};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub l: usize,
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<f64>>,
    #[serde(rename = "F")]
    pub f: String,
}

/// Initial data u₀.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum InitialData {
    /// amplitude·ψ_ω on the run grid
    GroundState {
        amplitude: f64,
        #[serde(default = "one")]
        omega: f64,
    },
    /// u_k = a_k e^{−|x|²/w²}
    Gaussian { amplitudes: Vec<f64>, width: f64 },
    /// a stored snapshot (path relative to the config file)
    Snapshot { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunSection {
    #[serde(rename = "T")]
    pub t_end: f64,
    pub integrator: IntegratorConfig,
    pub initial: InitialData,
    pub seed: u64,
    /// random samples for the sampled hypothesis checks
    pub samples: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            t_end: 20.0,
            integrator: IntegratorConfig::default(),
            initial: InitialData::GroundState { amplitude: 0.5, omega: 1.0 },
            seed: 0,
            samples: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct MorawetzSection {
    /// plateau width of the window χ
    pub eps_chi: f64,
    /// schedule parameter: J = ε⁻², R₀ = ε⁻¹
    pub eps_morawetz: f64,
    /// overrides of the schedule's T₀; empty means use e^{ε⁻²}
    pub t0: Vec<f64>,
    pub radii: usize,
    /// time between recorded samples
    pub interval: f64,
}

impl Default for MorawetzSection {
    fn default() -> Self {
        MorawetzSection { eps_chi: 0.2, eps_morawetz: 0.5, t0: vec![], radii: 17, interval: 0.1 }
    }
}

fn default_grid() -> GridDesc {
    GridDesc::Radial { n: 5, points: 4000, r_max: 200.0 }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub system: SystemSection,
    #[serde(default = "default_grid")]
    pub grid: GridDesc,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub morawetz: MorawetzSection,
    #[serde(default)]
    pub scattering: ScatteringOptions,
}

/// A parsed configuration whose system passed the hypothesis checks.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub file: ConfigFile,
    pub base_dir: PathBuf,
    pub system: System,
    pub report: HypothesisReport,
    pub warnings: Vec<String>,
}

/// Parses and validates a configuration document. H1–H5 failures always
/// refuse; sampled H6–H8 failures refuse unless `force`.
pub fn parse_config(text: &str, base_dir: &Path, force: bool) -> Result<LoadedConfig> {
    let file: ConfigFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("schema: {}", e)))?;
    file.grid.validate()?;
    let s = &file.system;
    let potential = parse_potential(&s.f, s.l)?;
    let beta = s.beta.clone().unwrap_or_else(|| vec![0.0; s.l]);
    let spec = SystemSpec::new(s.alpha.clone(), s.gamma.clone(), beta, s.sigma.clone(), potential)?;
    let report = check_hypotheses(&spec, file.run.samples.max(1), file.run.seed);
    let mut warnings = Vec::new();
    if let Some((name, evidence)) = report.first_failure(&["H1", "H2", "H3", "H4", "H5"]) {
        return Err(Error::Hypothesis { name, evidence });
    }
    if let Some((name, evidence)) = report.first_failure(&["H6", "H7", "H8"]) {
        if !force {
            return Err(Error::Hypothesis { name, evidence });
        }
        let m = format!("{} failed its sampled check ({}); continuing because of --force", name, evidence);
        log::warn!("{}", m);
        warnings.push(m);
    }
    let system = System::from_report(spec, &report)?;
    file.run.integrator.validate(&file.grid)?;
    Ok(LoadedConfig { file, base_dir: base_dir.to_path_buf(), system, report, warnings })
}

pub fn load_config(path: &Path, force: bool) -> Result<LoadedConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base, force)
}

/// Key-sorted JSON with fixed two-space indentation.
pub fn canonical_json<T: Serialize>(v: &T) -> Result<String> {
    let value = serde_json::to_value(v)?;
    Ok(serde_json::to_string_pretty(&value)?)
}

/// sha256 of the canonical JSON of the system (with σ resolved).
pub fn spec_hash(sys: &System) -> Result<String> {
    let v = serde_json::json!({
        "l": sys.l(),
        "alpha": sys.alpha(),
        "gamma": sys.gamma(),
        "beta": sys.beta(),
        "sigma": sys.sigma,
        "F": sys.spec.potential,
    });
    let text = serde_json::to_string(&v)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

impl LoadedConfig {
    /// u₀ described by `run.initial` on the configured grid.
    pub fn initial_field(&self) -> Result<Field> {
        let grid = self.file.grid;
        let l = self.system.l();
        match &self.file.run.initial {
            InitialData::GroundState { amplitude, omega } => {
                let gs = crate::groundstate::petviashvili(&self.system, *omega, grid, None, &Default::default())?;
                Ok(gs.profiles.scaled(*amplitude))
            }
            InitialData::Gaussian { amplitudes, width } => {
                if amplitudes.len() != l {
                    return Err(Error::Config(format!("gaussian initial data needs {} amplitudes", l)));
                }
                let a = amplitudes.clone();
                let w = *width;
                Ok(Field::from_fn(grid, l, move |k, x| C64::new(a[k] * (-(x * x) / (w * w)).exp(), 0.0)))
            }
            InitialData::Snapshot { path } => {
                let p = if path.is_absolute() { path.clone() } else { self.base_dir.join(path) };
                let (f, _) = crate::grid::snapshot::read_snapshot(&p)?;
                if f.grid != grid || f.l() != l {
                    return Err(Error::Config("snapshot does not match the configured grid".into()));
                }
                Ok(f)
            }
        }
    }

    pub fn manifest(&self, command: &str, parent: Option<PathBuf>) -> Result<RunManifest> {
        let cfg = &self.file.run.integrator;
        Ok(RunManifest {
            command: command.to_string(),
            spec_hash: spec_hash(&self.system)?,
            grid: self.file.grid,
            scheme: cfg.scheme.unwrap_or_else(|| Scheme::for_grid(&self.file.grid)),
            dt: cfg.dt,
            t_end: self.file.run.t_end,
            seed: self.file.run.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_at: chrono::Utc::now().to_rfc3339(),
            parent_run: parent,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub command: String,
    pub spec_hash: String,
    pub grid: GridDesc,
    pub scheme: Scheme,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub seed: u64,
    pub tool_version: String,
    pub created_at: String,
    pub parent_run: Option<PathBuf>,
}

/// An output directory owned by one command invocation.
#[derive(Clone, Debug)]
pub struct RunDir {
    pub path: PathBuf,
}

impl RunDir {
    pub fn create(path: &Path) -> Result<Self> {
        fs::create_dir_all(path).map_err(|e| Error::Config(format!("cannot create output directory {}: {}", path.display(), e)))?;
        let probe = path.join(".write-test");
        fs::write(&probe, b"").map_err(|e| Error::Config(format!("output directory {} is not writable: {}", path.display(), e)))?;
        let _ = fs::remove_file(probe);
        Ok(RunDir { path: path.to_path_buf() })
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }

    pub fn snapshots(&self) -> PathBuf {
        self.path.join("snapshots")
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let p = self.file(name);
        fs::write(&p, text)?;
        Ok(p)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, v: &T) -> Result<PathBuf> {
        let mut s = canonical_json(v)?;
        s.push('\n');
        self.write_text(name, &s)
    }

    pub fn read_manifest(&self) -> Result<RunManifest> {
        Ok(serde_json::from_str(&fs::read_to_string(self.file("manifest.json"))?)?)
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::QuadratureNonConvergence { .. }
        | Error::NonConvergence { .. }
        | Error::CollapseToZero
        | Error::NegativeDenominator(_)
        | Error::BisectionFailure(_) => 3,
        Error::BlowUpSuspected(_) => 4,
        Error::IdentityFailure(_) => 5,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"{
        "system": {"l": 2, "alpha": [1, 1], "gamma": [1, 0.5], "F": "conj(z1)^2*z2"},
        "grid": {"kind": "radial", "n": 5, "points": 400, "r_max": 20.0},
        "run": {"T": 1, "integrator": {"dt": 0.01}, "samples": 200}
    }"#;

    #[test]
    fn canonical_loads_with_inferred_sigma() {
        let c = parse_config(CANONICAL, Path::new("."), false).unwrap();
        assert_eq!(c.system.sigma, vec![1.0, 2.0]);
        assert!(c.report.mass_resonant);
        assert_eq!(c.file.scattering.cauchy_tol, 0.1);
        let h = spec_hash(&c.system).unwrap();
        assert_eq!(h.len(), 64);
        let again = parse_config(CANONICAL, Path::new("."), false).unwrap();
        assert_eq!(h, spec_hash(&again.system).unwrap());
        let other = parse_config(&CANONICAL.replace("0.5]", "0.6]"), Path::new("."), false).unwrap();
        assert_ne!(h, spec_hash(&other.system).unwrap());
    }

    #[test]
    fn quadratic_potential_is_refused() {
        let text = CANONICAL.replace("conj(z1)^2*z2", "conj(z1)*z2");
        match parse_config(&text, Path::new("."), false) {
            Err(Error::Hypothesis { name, .. }) => assert_eq!(name, "H5"),
            other => panic!("{:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn schema_errors() {
        assert!(matches!(parse_config("{\"system\": 3}", Path::new("."), false), Err(Error::Config(_))));
        let text = CANONICAL.replace("\"samples\": 200", "\"samples\": 200, \"bogus\": 1");
        assert!(matches!(parse_config(&text, Path::new("."), false), Err(Error::Config(_))));
    }

    #[test]
    fn canonical_json_is_key_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": 2, "c": 3}});
        let s = canonical_json(&v).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
    }

    #[test]
    fn unwritable_directory() {
        let e = RunDir::create(Path::new("/proc/qnls-cannot-write-here")).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }
}
