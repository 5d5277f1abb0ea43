//! Run configuration: a sectioned key=value file overlaid by command-line flags.

use super::CliError;
use crate::curve::log_space;
use crate::liealg::SchrodingerSpec;
use crate::poly::{parse, MultiPoly};
use crate::spectra::DEFAULT_CTRUNC;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Algebra,
    Discreteness,
    Chart,
    Scaling,
    Classify,
    Conjecture,
    Direct,
    Compare,
    Constants,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Algebra => "algebra",
            Stage::Discreteness => "discreteness",
            Stage::Chart => "chart",
            Stage::Scaling => "scaling",
            Stage::Classify => "classify",
            Stage::Conjecture => "conjecture",
            Stage::Direct => "direct",
            Stage::Compare => "compare",
            Stage::Constants => "constants",
        }
    }

    pub fn needs_spec(self) -> bool {
        self != Stage::Constants
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        <Stage as clap::ValueEnum>::from_str(s.trim(), true).map_err(|_| CliError::Input(format!("unknown stage '{s}'")))
    }
}

/// `steps` log-spaced values from lo to hi, written lo:hi:steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl LambdaRange {
    pub fn values(&self) -> Vec<f64> {
        log_space(self.lo, self.hi, self.steps)
    }
}

impl FromStr for LambdaRange {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Input(format!("expected lo:hi:steps, got '{s}'"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [lo, hi, steps] = parts[..] else { return Err(bad()) };
        let r = LambdaRange {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
            steps: steps.parse().map_err(|_| bad())?,
        };
        if !(r.lo > 0.0 && r.hi >= r.lo && r.hi.is_finite()) || r.steps == 0 {
            return Err(CliError::Input(format!("λ range needs 0 < lo ≤ hi and steps ≥ 1, got '{s}'")));
        }
        Ok(r)
    }
}

impl fmt::Display for LambdaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.steps)
    }
}

/// Operator as written in the config: n, aⱼ and V, or a planar field b.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpecText {
    pub n: usize,
    pub a: Vec<String>,
    pub b: Option<String>,
    pub v: String,
}

impl SpecText {
    pub fn build(&self) -> Result<SchrodingerSpec, CliError> {
        let v = if self.v.trim().is_empty() { MultiPoly::zero(self.n) } else { parse(&self.v, self.n)? };
        match &self.b {
            Some(b) => {
                if self.n != 2 || self.a.iter().any(|a| !a.trim().is_empty()) {
                    return Err(CliError::Input("a field b needs n = 2 and no a1, a2".into()));
                }
                Ok(SchrodingerSpec::from_field_2d(parse(b, 2)?, v)?)
            }
            None => {
                let a: Vec<&str> = (0..self.n)
                    .map(|j| self.a.get(j).map_or("0", |s| if s.trim().is_empty() { "0" } else { s.as_str() }))
                    .collect();
                Ok(SchrodingerSpec::parse(self.n, &a, if self.v.trim().is_empty() { "0" } else { &self.v })?)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstantsConfig {
    /// k of the odd-power series Σ(2j+1)^{−1−1/k}.
    pub k: u32,
    /// (p, q) of a strong chain constant.
    pub strong: Option<(u32, u32)>,
    pub inhomogeneous: bool,
    /// (k, l, p) of the three-dimensional constant.
    pub kappa3d: Option<(u32, u32, u32)>,
    pub levels: usize,
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        ConstantsConfig { k: 1, strong: None, inhomogeneous: false, kappa3d: None, levels: 30 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub spec: Option<SpecText>,
    pub stage: Stage,
    /// λ values of the direct, conjecture and compare stages.
    pub lambdas: LambdaRange,
    /// λ values of the sampled growth curves.
    pub mc_lambdas: LambdaRange,
    pub grid: Option<Vec<usize>>,
    #[serde(rename = "box")]
    pub box_half_widths: Option<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub ctrunc: f64,
    pub refine: f64,
    pub constants: ConstantsConfig,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn new(stage: Stage) -> Self {
        RunConfig {
            spec: None,
            stage,
            lambdas: LambdaRange { lo: 20.0, hi: 80.0, steps: 5 },
            mc_lambdas: LambdaRange { lo: 1e3, hi: 1e6, steps: 7 },
            grid: None,
            box_half_widths: None,
            samples: 200_000,
            seed: 1,
            tol: 1e-2,
            ctrunc: DEFAULT_CTRUNC,
            refine: 1.0,
            constants: ConstantsConfig::default(),
            out: PathBuf::from("out"),
        }
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let canon = serde_json::to_string(self).expect("serializable");
        Sha256::digest(canon.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Input(m));
        if self.stage.needs_spec() && self.spec.is_none() {
            return bad(format!("stage {} needs a [spec] section", self.stage.name()));
        }
        if let Some(s) = &self.spec {
            if s.n == 0 || s.n > 3 {
                return bad(format!("n = {} outside 1..=3", s.n));
            }
            if s.a.len() > s.n {
                return bad(format!("{} magnetic components for n = {}", s.a.len(), s.n));
            }
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tol = {} outside (0, 1)", self.tol));
        }
        if !(self.ctrunc > 0.0 && self.ctrunc.is_finite()) || !(self.refine >= 1.0 && self.refine.is_finite()) {
            return bad("ctrunc must be positive and refine at least 1".into());
        }
        if let Some(b) = &self.box_half_widths {
            if b.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
                return bad(format!("box half-widths {b:?} must be positive"));
            }
            if self.grid.is_none() {
                return bad("box needs grid".into());
            }
        }
        if let Some(g) = &self.grid {
            if g.contains(&0) {
                return bad("grid points must be positive".into());
            }
            let n = self.spec.as_ref().map_or(g.len(), |s| s.n);
            if g.len() != n || self.box_half_widths.as_ref().is_some_and(|b| b.len() != n) {
                return bad(format!("grid and box need {n} entries"));
            }
        }
        if self.constants.k == 0 || self.constants.levels == 0 {
            return bad("constants need k ≥ 1 and levels ≥ 1".into());
        }
        Ok(())
    }

    /// Applies one `section.key = value` assignment.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), CliError> {
        let bad = || CliError::Input(format!("[{section}] {key} = {value}: invalid value"));
        let value = value.trim();
        match (section, key) {
            ("spec", "n") => self.spec_mut().n = value.parse().map_err(|_| bad())?,
            ("spec", "v") => self.spec_mut().v = value.to_string(),
            ("spec", "b") => self.spec_mut().b = Some(value.to_string()),
            ("spec", k) if k.starts_with('a') && k.len() > 1 => {
                let j: usize = k[1..].parse().map_err(|_| bad())?;
                if j == 0 || j > 3 {
                    return Err(bad());
                }
                let a = &mut self.spec_mut().a;
                if a.len() < j {
                    a.resize(j, String::new());
                }
                a[j - 1] = value.to_string();
            }
            ("run", "stage") => self.stage = value.parse()?,
            ("run", "lambdas") => self.lambdas = value.parse()?,
            ("run", "mc_lambdas") => self.mc_lambdas = value.parse()?,
            ("run", "grid") => self.grid = Some(list(value).map_err(|_| bad())?),
            ("run", "box") => self.box_half_widths = Some(list(value).map_err(|_| bad())?),
            ("run", "samples") => self.samples = value.parse().map_err(|_| bad())?,
            ("run", "seed") => self.seed = value.parse().map_err(|_| bad())?,
            ("run", "tol") => self.tol = value.parse().map_err(|_| bad())?,
            ("run", "ctrunc") => self.ctrunc = value.parse().map_err(|_| bad())?,
            ("run", "refine") => self.refine = value.parse().map_err(|_| bad())?,
            ("run", "out") => self.out = PathBuf::from(value),
            ("constants", "k") => self.constants.k = value.parse().map_err(|_| bad())?,
            ("constants", "levels") => self.constants.levels = value.parse().map_err(|_| bad())?,
            ("constants", "inhomogeneous") => self.constants.inhomogeneous = value.parse().map_err(|_| bad())?,
            ("constants", "strong") => {
                let v: Vec<u32> = list(value).map_err(|_| bad())?;
                let [p, q] = v[..] else { return Err(bad()) };
                self.constants.strong = Some((p, q));
            }
            ("constants", "kappa3d") => {
                let v: Vec<u32> = list(value).map_err(|_| bad())?;
                let [k, l, p] = v[..] else { return Err(bad()) };
                self.constants.kappa3d = Some((k, l, p));
            }
            _ => return Err(CliError::Input(format!("unknown key [{section}] {key}"))),
        }
        Ok(())
    }

    fn spec_mut(&mut self) -> &mut SpecText {
        self.spec.get_or_insert_with(|| SpecText { n: 2, ..Default::default() })
    }

    /// Reads a config file over the defaults. Keys before any section header belong to [run].
    pub fn parse_text(text: &str, stage: Option<Stage>) -> Result<Self, CliError> {
        let mut cfg = RunConfig::new(stage.unwrap_or(Stage::Constants));
        let mut section = "run".to_string();
        let mut staged = stage.is_some();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_lowercase();
                if !["spec", "run", "constants"].contains(&section.as_str()) {
                    return Err(CliError::Input(format!("line {}: unknown section [{section}]", no + 1)));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("line {}: expected key = value", no + 1)))?;
            let key = key.trim().to_lowercase();
            if section == "run" && key == "stage" {
                if stage.is_some() {
                    continue;
                }
                staged = true;
            }
            cfg.set(&section, &key, value)?;
        }
        if !staged {
            return Err(CliError::Input("no stage given".into()));
        }
        Ok(cfg)
    }
}

fn list<T: FromStr>(s: &str) -> Result<Vec<T>, T::Err> {
    s.split(',').map(|p| p.trim().parse()).collect()
}
