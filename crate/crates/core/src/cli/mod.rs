//! Batch frontend: one pipeline stage per run, artifacts stamped with the config hash.

mod config;

pub use config::{ConstantsConfig, LambdaRange, RunConfig, SpecText, Stage};

use crate::asym::{
    compare, conjecture_rhs_with, kappa1_3d, kappa_3d, kappa_inhomog, series_constant, strong_constant, AsymError,
    ConjectureOptions, ConjectureResult,
};
use crate::curve::CountingCurve;
use crate::liealg::{discreteness, LieAlgebra, LieError, SchrodingerSpec};
use crate::orbit::{base_chart, orbit_space, OrbitError};
use crate::poly::PolyError;
use crate::scaling::{classify, exact_limit_unchecked, exact_limit_with, reduced_algebra, spec_weights, ScalingError, ValidationPlan};
use crate::spectra::{direct_curve, GridND, SpectraError};
use serde::Serialize;
use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Asym(#[from] AsymError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    /// Machine-readable error class.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Input(_) => "invalid_input",
            CliError::Poly(_) => "parse_error",
            CliError::Lie(LieError::Poly(_)) => "parse_error",
            CliError::Lie(LieError::DimensionMismatch { .. } | LieError::NotClosed) => "invalid_input",
            CliError::Lie(_) => "internal_inconsistency",
            CliError::Orbit(OrbitError::UnsupportedStructure(_)) => "unsupported_structure",
            CliError::Orbit(_) => "internal_inconsistency",
            CliError::Scaling(ScalingError::UnsupportedFamily(_)) => "unsupported_structure",
            CliError::Scaling(ScalingError::UnboundedSublevelSet) => "unbounded_sublevel_set",
            CliError::Scaling(ScalingError::ValidationFailure { .. }) => "validation_failure",
            CliError::Scaling(ScalingError::InconclusiveClassification { .. }) => "inconclusive",
            CliError::Scaling(ScalingError::Fit(_)) => "fit_failure",
            CliError::Spectra(SpectraError::InvalidGrid(_) | SpectraError::GridTooCoarse { .. }) => "invalid_grid",
            CliError::Spectra(SpectraError::DomainTooSmall { .. }) => "domain_too_small",
            CliError::Spectra(SpectraError::GridTooLarge { .. }) => "grid_too_large",
            CliError::Spectra(SpectraError::NonConvergent { .. }) => "non_convergent",
            CliError::Spectra(_) => "spectral_failure",
            CliError::Asym(AsymError::Spectra(_) | AsymError::NonConvergent { .. }) => "non_convergent",
            CliError::Asym(AsymError::TailBoundFailure { .. }) => "non_convergent",
            CliError::Asym(AsymError::UnsupportedStructure(_)) => "unsupported_structure",
            CliError::Asym(AsymError::InvalidInput(_)) => "invalid_input",
            CliError::Io { .. } => "io_error",
        }
    }

    /// 1 for input errors, 2 for analytic or numerical obstructions.
    pub fn exit_code(&self) -> i32 {
        match self.code() {
            "invalid_input" | "parse_error" | "invalid_grid" | "domain_too_small" | "io_error" => 1,
            _ => 2,
        }
    }
}

/// What a run produced.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub config_hash: String,
    pub artifacts: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

struct Artifacts<'a> {
    dir: &'a Path,
    hash: String,
    stage: &'static str,
    written: Vec<PathBuf>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, body: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, result: Value) -> Result<(), CliError> {
        let doc = json!({ "config_hash": self.hash, "stage": self.stage, "result": result });
        self.write(name, serde_json::to_string_pretty(&doc).expect("serializable") + "\n")
    }

    fn csv(&mut self, name: &str, curve: &CountingCurve) -> Result<(), CliError> {
        self.write(name, format!("# config_hash={}\n{}", self.hash, curve.to_csv()))
    }
}

fn value(s: impl Serialize) -> Value {
    serde_json::to_value(s).expect("serializable")
}

fn reparse(s: String) -> Value {
    serde_json::from_str(&s).expect("valid json")
}

/// Validates the config, runs its stage and writes the artifacts into `config.out`.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let spec = config.spec.as_ref().map(SpecText::build).transpose()?;
    let dir = config.out.as_path();
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut out = Artifacts { dir, hash: config.hash(), stage: config.stage.name(), written: Vec::new() };
    let result = execute(config, spec.as_ref(), config.grid.clone(), &mut out);
    if let Err(e) = &result {
        out.json("error.json", json!({ "code": e.code(), "exit_code": e.exit_code(), "message": e.to_string() }))?;
    }
    let summary = result?;
    Ok(RunOutcome { config_hash: out.hash, artifacts: out.written, summary })
}

fn execute(
    cfg: &RunConfig,
    spec: Option<&SchrodingerSpec>,
    grid: Option<Vec<usize>>,
    out: &mut Artifacts,
) -> Result<String, CliError> {
    let need = || spec.ok_or_else(|| CliError::Input("no operator given".into()));
    match cfg.stage {
        Stage::Algebra => {
            let g = LieAlgebra::build(need()?);
            g.check_axioms()?;
            out.json("algebra.json", reparse(g.to_json()))?;
            Ok(format!("dim g = {}, lower central series {:?}", g.dim(), g.lower_central_series()))
        }
        Stage::Discreteness => {
            let d = discreteness(need()?);
            out.json("discreteness.json", json!({ "discrete": d }))?;
            Ok(format!("discrete spectrum: {d}"))
        }
        Stage::Chart => {
            let (_, c) = base_chart(need()?)?;
            out.json("chart.json", value(&c))?;
            Ok(format!("orbit chart with {} parameters", 2 * c.n_prime))
        }
        Stage::Scaling => {
            let s = need()?;
            let (g, c) = base_chart(s)?;
            let plan = ValidationPlan {
                lambdas: cfg.mc_lambdas.values(),
                samples: cfg.samples,
                seed: cfg.seed,
                ..ValidationPlan::default()
            };
            let mu = exact_limit_with(&c, &spec_weights(s)?, &plan)?;
            out.json("limit.json", reparse(mu.to_json()))?;
            let fam = orbit_space(&reduced_algebra(&g, &mu)?, &mu)?;
            out.json("family.json", reparse(fam.to_json()))?;
            Ok(format!("(alpha, beta) = ({}, {}), family {:?}", mu.alpha, mu.beta, fam.kind))
        }
        Stage::Classify => {
            let r = classify(need()?, &cfg.mc_lambdas.values(), cfg.samples, cfg.seed)?;
            out.json("classify.json", reparse(r.to_json()))?;
            out.csv("g1.csv", &r.g1)?;
            out.csv("g2.csv", &r.g2)?;
            Ok(format!("{:?}, kappa = {:.4} [{:.4}, {:.4}]", r.classification, r.kappa.value, r.kappa.lo, r.kappa.hi))
        }
        Stage::Conjecture => {
            let r = predicted(cfg, need()?, out)?;
            Ok(match r.power_law {
                Some((k, a)) => format!("integral = {k:.6} lambda^{a}, kappa {:.4}, beta {}", r.kappa_used, r.beta),
                None => format!("kappa {:.4}, beta {}, {} points", r.kappa_used, r.beta, r.rhs_curve.len()),
            })
        }
        Stage::Direct => {
            let c = direct(cfg, need()?, grid, out)?;
            Ok(format!("{} direct counts, last N = {}", c.len(), c.values().last().copied().unwrap_or(0.0)))
        }
        Stage::Compare => {
            let s = need()?;
            let r = predicted(cfg, s, out)?;
            let d = direct(cfg, s, grid, out)?;
            let c = compare(&d, &r);
            out.json(
                "comparison.json",
                json!({
                    "comparison": value(&c),
                    "predicted_power_law": r.power_law,
                    "beta": r.beta,
                    "kappa": r.kappa_used,
                }),
            )?;
            let a = c.direct_fit.as_ref().map_or("none".to_string(), |f| format!("{:.3}", f.a));
            Ok(format!("{:?}: direct exponent {a}, last ratio {:?}", c.verdict, c.last_ratio()))
        }
        Stage::Constants => constants(cfg, out),
    }
}

fn predicted(cfg: &RunConfig, s: &SchrodingerSpec, out: &mut Artifacts) -> Result<ConjectureResult, CliError> {
    let (g, c) = base_chart(s)?;
    let mu = exact_limit_unchecked(&c, &spec_weights(s)?)?;
    let fam = orbit_space(&reduced_algebra(&g, &mu)?, &mu)?;
    let report = classify(s, &cfg.mc_lambdas.values(), cfg.samples, cfg.seed)?;
    let opts = ConjectureOptions { rel_tol: 0.1 * cfg.tol, constant_tol: cfg.tol.max(1e-3), ..Default::default() };
    let mut r = conjecture_rhs_with(s, &fam, &mu, &report, &cfg.lambdas.values(), opts)?;
    r.kappa_provenance.seed = Some(cfg.seed);
    out.json("family.json", reparse(fam.to_json()))?;
    out.json("conjecture.json", value(&r))?;
    out.csv("conjecture.csv", &r.rhs_curve)?;
    Ok(r)
}

fn direct(cfg: &RunConfig, s: &SchrodingerSpec, points: Option<Vec<usize>>, out: &mut Artifacts) -> Result<CountingCurve, CliError> {
    let top = cfg.lambdas.hi;
    let grid = match (points, &cfg.box_half_widths) {
        (Some(p), Some(b)) => GridND::new(b.clone(), p)?,
        (Some(p), None) => GridND::new(GridND::for_spec(s, top, cfg.ctrunc, 1.0)?.half_widths, p)?,
        (None, _) => GridND::for_spec(s, top, cfg.ctrunc, cfg.refine)?,
    };
    // off-spectrum jitter
    let lambdas: Vec<f64> = cfg.lambdas.values().iter().map(|l| l + 1e-6).collect();
    let curve = direct_curve(s, &lambdas, &grid)?;
    out.csv("direct.csv", &curve)?;
    Ok(curve)
}

/// Default mesh for the two-dimensional levels of the three-dimensional constant.
pub const KAPPA3D_BOX: [f64; 2] = [4.0, 4.0];
pub const KAPPA3D_POINTS: [usize; 2] = [160, 160];

#[derive(Serialize)]
struct ConstantEntry {
    name: String,
    value: f64,
    error: f64,
    operation: String,
    tolerance: f64,
    seed: Option<u64>,
}

fn constants(cfg: &RunConfig, out: &mut Artifacts) -> Result<String, CliError> {
    let c = &cfg.constants;
    let tol = cfg.tol.max(1e-3);
    let k = c.k;
    let series_tol = 1e-12;
    let mut list = vec![ConstantEntry {
        name: format!("series k={k}"),
        value: series_constant(k, series_tol),
        error: series_tol,
        operation: format!("sum of (2j+1)^(-1-1/{k}) with Euler-Maclaurin tail"),
        tolerance: series_tol,
        seed: None,
    }];
    if let Some((p, q)) = c.strong {
        let s = strong_constant(p, q, tol)?;
        list.push(ConstantEntry {
            name: format!("strong p={p} q={q} exponent={}", s.exponent),
            value: s.value,
            error: s.error,
            operation: format!("level sums over eta in [-{0}, {0}] with harmonic tails", s.eta_range),
            tolerance: tol,
            seed: None,
        });
    }
    if c.inhomogeneous {
        let s = kappa_inhomog(tol)?;
        list.push(ConstantEntry {
            name: "kappa inhomogeneous".into(),
            value: s.value,
            error: s.error,
            operation: format!("level sums over b in [{}, {}], tolerance halved for stability", s.b_range.0, s.b_range.1),
            tolerance: tol,
            seed: None,
        });
    }
    if let Some((k3, l3, p3)) = c.kappa3d {
        let kappa1 = kappa1_3d(k3, l3, p3)?;
        list.push(ConstantEntry {
            name: format!("kappa1 k={k3} l={l3} p={p3}"),
            value: kappa1,
            error: 0.0,
            operation: "closed form via log-gamma".into(),
            tolerance: 0.0,
            seed: None,
        });
        let grid = match (&cfg.grid, &cfg.box_half_widths) {
            (Some(p), Some(b)) => GridND::new(b.clone(), p.clone())?,
            _ => GridND::new(KAPPA3D_BOX.to_vec(), KAPPA3D_POINTS.to_vec())?,
        };
        let s = kappa_3d(k3, l3, p3, c.levels, &grid)?;
        list.push(ConstantEntry {
            name: format!("kappa3d k={k3} l={l3} p={p3} levels={}", s.levels.len()),
            value: s.value,
            error: s.tail,
            operation: format!("level sum plus fitted tail, relative tail {:.3e}, grid {:?}", s.relative_tail, grid.points),
            tolerance: tol,
            seed: None,
        });
    }
    let summary = list.iter().map(|e| format!("{} = {:.10}", e.name, e.value)).collect::<Vec<_>>().join("; ");
    out.json("constants.json", value(&list))?;
    Ok(summary)
}

#[cfg(test)]
mod tests;
