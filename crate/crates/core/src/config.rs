//! Flat-text run configuration: `section.key = value` lines, `#` comments.
//!
//! ```text
//! problem.alpha           = 2.0
//! problem.dim             = 1
//! problem.side_length     = 40
//! problem.points_per_cell = 64
//! problem.potential       = const:1
//! problem.gamma           = zero
//! problem.nonlinearity    = power:p=4
//! problem.q               = 3
//! solver.n_starts         = 8
//! run.mode                = solve
//! run.out                 = out
//! run.seed                = 0
//! ```
//!
//! Specifier grammars (numbers are decimal):
//! - potential: `const:<v>` | `periodic:base=<b>,amp=<a>` |
//!   `periodic_plus_localized:base=<b>,amp=<a>,loc_amp=<c>,loc_width=<w>` |
//!   `coercive:base=<b>,curv=<c>`
//! - gamma: `zero` | `const:<g>` | `periodic:base=<b>,amp=<a>`
//! - nonlinearity: `power:p=<p>[,b_base=<b>][,b_amp=<a>]`
//!
//! Periodic profiles use sin (potential, Γ) and cos (b) of 2πx per axis;
//! localized and coercive parts are centered at the torus midpoint.

use crate::grid::{FracOrder, TorusGrid};
use crate::model::{GammaWeight, ModelError, Nonlinearity, Potential, Problem};
use crate::solve::SolverConfig;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: cannot parse '{text}': expected key = value")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}': {message}")]
    BadValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("key '{key}': {message}")]
    BadSpec { key: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("key '{key}': {source}")]
    Model {
        key: String,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    Verify,
    CompareCper,
    Coercive,
    PvCheck,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "solve" => Some(Mode::Solve),
            "verify" => Some(Mode::Verify),
            "compare-cper" => Some(Mode::CompareCper),
            "coercive" => Some(Mode::Coercive),
            "pv-check" => Some(Mode::PvCheck),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Verify => "verify",
            Mode::CompareCper => "compare-cper",
            Mode::Coercive => "coercive",
            Mode::PvCheck => "pv-check",
        }
    }
}

/// Parsed configuration; `build_problem` assembles and certifies the model.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha: f64,
    pub dim: usize,
    pub side_length: usize,
    pub points_per_cell: usize,
    pub potential_spec: String,
    pub gamma_spec: String,
    pub nonlinearity_spec: String,
    pub q: f64,
    pub solver: SolverConfig,
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub seed: u64,
}

struct RawEntry {
    line: usize,
    value: String,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries: std::collections::BTreeMap<String, RawEntry> = Default::default();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let stripped = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax {
                line,
                text: stripped.to_string(),
            })?;
        entries.insert(
            key.trim().to_string(),
            RawEntry {
                line,
                value: value.trim().to_string(),
            },
        );
    }

    const KNOWN: &[&str] = &[
        "problem.alpha",
        "problem.dim",
        "problem.side_length",
        "problem.points_per_cell",
        "problem.potential",
        "problem.gamma",
        "problem.nonlinearity",
        "problem.q",
        "solver.max_iters",
        "solver.step",
        "solver.armijo_factor",
        "solver.armijo_slope",
        "solver.tol_grad",
        "solver.tol_res",
        "solver.n_starts",
        "solver.dedup_threshold",
        "solver.sign_aware",
        "run.mode",
        "run.out",
        "run.seed",
    ];
    for (key, entry) in &entries {
        if !KNOWN.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                line: entry.line,
                key: key.clone(),
            });
        }
    }

    let get = |key: &'static str| entries.get(key);
    let required = |key: &'static str| get(key).ok_or(ConfigError::Missing(key));
    fn num<T: std::str::FromStr>(key: &str, e: &RawEntry) -> Result<T, ConfigError> {
        e.value.parse::<T>().map_err(|_| ConfigError::BadValue {
            line: e.line,
            key: key.to_string(),
            message: format!("cannot parse '{}' as a number", e.value),
        })
    }

    let alpha: f64 = num("problem.alpha", required("problem.alpha")?)?;
    if let Err(e) = FracOrder::new(alpha) {
        let entry = required("problem.alpha")?;
        return Err(ConfigError::BadValue {
            line: entry.line,
            key: "problem.alpha".into(),
            message: e.to_string(),
        });
    }
    let dim: usize = match get("problem.dim") {
        Some(e) => num("problem.dim", e)?,
        None => 1,
    };
    let side_length: usize = num("problem.side_length", required("problem.side_length")?)?;
    let points_per_cell: usize = num(
        "problem.points_per_cell",
        required("problem.points_per_cell")?,
    )?;
    let q: f64 = num("problem.q", required("problem.q")?)?;
    let potential_spec = required("problem.potential")?.value.clone();
    let nonlinearity_spec = required("problem.nonlinearity")?.value.clone();
    let gamma_spec = get("problem.gamma")
        .map(|e| e.value.clone())
        .unwrap_or_else(|| "zero".to_string());

    // early exponent-order diagnostic with the offending line
    if let Some(p) = parse_spec_param(&nonlinearity_spec, "p") {
        if q >= p {
            let entry = required("problem.q")?;
            return Err(ConfigError::BadValue {
                line: entry.line,
                key: "problem.q".into(),
                message: format!("requires q < p, got q = {q}, p = {p}"),
            });
        }
    }

    let mut solver = SolverConfig {
        seed: match get("run.seed") {
            Some(e) => num("run.seed", e)?,
            None => 0,
        },
        ..Default::default()
    };
    if let Some(e) = get("solver.max_iters") {
        solver.max_iters = num("solver.max_iters", e)?;
    }
    if let Some(e) = get("solver.step") {
        solver.step = num("solver.step", e)?;
    }
    if let Some(e) = get("solver.armijo_factor") {
        solver.armijo_factor = num("solver.armijo_factor", e)?;
    }
    if let Some(e) = get("solver.armijo_slope") {
        solver.armijo_slope = num("solver.armijo_slope", e)?;
    }
    if let Some(e) = get("solver.tol_grad") {
        solver.tol_grad = num("solver.tol_grad", e)?;
    }
    if let Some(e) = get("solver.tol_res") {
        solver.tol_res = num("solver.tol_res", e)?;
    }
    if let Some(e) = get("solver.n_starts") {
        solver.n_starts = num("solver.n_starts", e)?;
    }
    if let Some(e) = get("solver.dedup_threshold") {
        solver.dedup_threshold = num("solver.dedup_threshold", e)?;
    }
    if let Some(e) = get("solver.sign_aware") {
        solver.sign_aware = match e.value.as_str() {
            "true" => true,
            "false" => false,
            other => {
                return Err(ConfigError::BadValue {
                    line: e.line,
                    key: "solver.sign_aware".into(),
                    message: format!("expected true or false, got '{other}'"),
                })
            }
        };
    }
    if let Err(err) = solver.validate() {
        return Err(ConfigError::BadSpec {
            key: "solver".into(),
            message: err.to_string(),
        });
    }

    let mode = match get("run.mode") {
        Some(e) => Mode::parse(&e.value).ok_or_else(|| ConfigError::BadValue {
            line: e.line,
            key: "run.mode".into(),
            message: format!(
                "unknown mode '{}'; expected solve|verify|compare-cper|coercive|pv-check",
                e.value
            ),
        })?,
        None => Mode::Solve,
    };
    let out_dir = get("run.out")
        .map(|e| PathBuf::from(&e.value))
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = solver.seed;

    Ok(RunConfig {
        alpha,
        dim,
        side_length,
        points_per_cell,
        potential_spec,
        gamma_spec,
        nonlinearity_spec,
        q,
        solver,
        mode,
        out_dir,
        seed,
    })
}

/// Extract `name=<num>` from a `kind:a=1,b=2` spec string.
fn parse_spec_param(spec: &str, name: &str) -> Option<f64> {
    let (_, params) = spec.split_once(':')?;
    for part in params.split(',') {
        if let Some((k, v)) = part.split_once('=') {
            if k.trim() == name {
                return v.trim().parse().ok();
            }
        }
    }
    None
}

fn spec_params(
    key: &str,
    spec: &str,
) -> Result<(String, std::collections::BTreeMap<String, f64>), ConfigError> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k.to_string(), r),
        None => (spec.to_string(), ""),
    };
    let mut params = std::collections::BTreeMap::new();
    if !rest.is_empty() {
        // bare number shorthand: const:1
        if !rest.contains('=') {
            let v: f64 = rest.trim().parse().map_err(|_| ConfigError::BadSpec {
                key: key.to_string(),
                message: format!("cannot parse '{rest}' as a number"),
            })?;
            params.insert("value".to_string(), v);
        } else {
            for part in rest.split(',') {
                let (k, v) = part.split_once('=').ok_or_else(|| ConfigError::BadSpec {
                    key: key.to_string(),
                    message: format!("expected name=value, got '{part}'"),
                })?;
                let value: f64 = v.trim().parse().map_err(|_| ConfigError::BadSpec {
                    key: key.to_string(),
                    message: format!("cannot parse '{}' as a number", v.trim()),
                })?;
                params.insert(k.trim().to_string(), value);
            }
        }
    }
    Ok((kind, params))
}

impl RunConfig {
    pub fn build_grid(&self) -> Result<TorusGrid, ConfigError> {
        Ok(TorusGrid::new(
            self.dim,
            self.side_length,
            self.points_per_cell,
        )?)
    }

    /// Assemble the certified problem from the specifier strings.
    pub fn build_problem(&self) -> Result<Problem, ConfigError> {
        let grid = self.build_grid()?;
        let alpha = FracOrder::new(self.alpha).expect("validated during parse");
        let dim = self.dim as f64;

        let potential =
            {
                let (kind, p) = spec_params("problem.potential", &self.potential_spec)?;
                let model = |source: ModelError| ConfigError::Model {
                    key: "problem.potential".into(),
                    source,
                };
                match kind.as_str() {
                    "const" => {
                        let v = p
                            .get("value")
                            .copied()
                            .ok_or_else(|| bad_spec("problem.potential", "const:<v>"))?;
                        Potential::constant(grid.clone(), v).map_err(model)?
                    }
                    "periodic" => {
                        let base = p.get("base").copied().ok_or_else(|| {
                            bad_spec("problem.potential", "periodic:base=..,amp=..")
                        })?;
                        let amp = p.get("amp").copied().unwrap_or(0.0);
                        Potential::periodic(grid.clone(), periodic_profile(base, amp, dim))
                            .map_err(model)?
                    }
                    "periodic_plus_localized" => {
                        let base = p.get("base").copied().ok_or_else(|| {
                            bad_spec(
                                "problem.potential",
                                "periodic_plus_localized:base=..,amp=..,loc_amp=..,loc_width=..",
                            )
                        })?;
                        let amp = p.get("amp").copied().unwrap_or(0.0);
                        let loc_amp = p.get("loc_amp").copied().unwrap_or(0.0);
                        let loc_width = p.get("loc_width").copied().unwrap_or(1.0);
                        let g = grid.clone();
                        let c = grid.center();
                        Potential::periodic_plus_localized(
                            grid.clone(),
                            periodic_profile(base, amp, dim),
                            Arc::new(move |x| {
                                let d = g.torus_distance(x, c);
                                loc_amp * (-d * d / (2.0 * loc_width * loc_width)).exp()
                            }),
                        )
                        .map_err(model)?
                    }
                    "coercive" => {
                        let base = p.get("base").copied().ok_or_else(|| {
                            bad_spec("problem.potential", "coercive:base=..,curv=..")
                        })?;
                        let curv = p.get("curv").copied().unwrap_or(1.0);
                        let g = grid.clone();
                        let c = grid.center();
                        Potential::coercive(
                            grid.clone(),
                            Arc::new(move |x| {
                                let d = g.torus_distance(x, c);
                                base + curv * d * d
                            }),
                        )
                        .map_err(model)?
                    }
                    other => {
                        return Err(ConfigError::BadSpec {
                            key: "problem.potential".into(),
                            message: format!("unknown potential kind '{other}'"),
                            })
                    }
                }
            };

        let gamma = {
            let (kind, p) = spec_params("problem.gamma", &self.gamma_spec)?;
            let model = |source: ModelError| ConfigError::Model {
                key: "problem.gamma".into(),
                source,
            };
            match kind.as_str() {
                "zero" => GammaWeight::zero(grid.clone(), self.q).map_err(model)?,
                "const" => {
                    let v = p
                        .get("value")
                        .copied()
                        .ok_or_else(|| bad_spec("problem.gamma", "const:<g>"))?;
                    GammaWeight::constant(grid.clone(), v, self.q).map_err(model)?
                }
                "periodic" => {
                    let base = p
                        .get("base")
                        .copied()
                        .ok_or_else(|| bad_spec("problem.gamma", "periodic:base=..,amp=.."))?;
                    let amp = p.get("amp").copied().unwrap_or(0.0);
                    GammaWeight::new(grid.clone(), periodic_profile(base, amp, dim), self.q)
                        .map_err(model)?
                }
                other => {
                    return Err(ConfigError::BadSpec {
                        key: "problem.gamma".into(),
                        message: format!("unknown gamma kind '{other}'"),
                        })
                }
            }
        };

        let nonlinearity = {
            let (kind, p) = spec_params("problem.nonlinearity", &self.nonlinearity_spec)?;
            let model = |source: ModelError| ConfigError::Model {
                key: "problem.nonlinearity".into(),
                source,
            };
            match kind.as_str() {
                "power" => {
                    let pexp = p
                        .get("p")
                        .copied()
                        .ok_or_else(|| bad_spec("problem.nonlinearity", "power:p=<p>"))?;
                    let b_base = p.get("b_base").copied().unwrap_or(1.0);
                    let b_amp = p.get("b_amp").copied().unwrap_or(0.0);
                    let b: crate::model::ScalarFn = Arc::new(move |x: [f64; 2]| {
                        b_base + b_amp * ((2.0 * PI * x[0]).cos() + (2.0 * PI * x[1]).cos()) / dim
                    });
                    Nonlinearity::power(grid.clone(), pexp, b).map_err(model)?
                }
                other => {
                    return Err(ConfigError::BadSpec {
                        key: "problem.nonlinearity".into(),
                        message: format!("unknown nonlinearity kind '{other}'"),
                        })
                }
            }
        };

        Problem::new(grid, alpha, potential, gamma, nonlinearity).map_err(|source| {
            ConfigError::Model {
                key: "problem".into(),
                source,
            }
        })
    }
}

fn bad_spec(key: &'static str, expected: &str) -> ConfigError {
    ConfigError::BadSpec {
        key: key.to_string(),
        message: format!("expected {expected}"),
    }
}

/// base + amp·mean of sin(2πx_ax): ℤ^d-periodic with infimum base − amp.
fn periodic_profile(base: f64, amp: f64, dim: f64) -> crate::model::ScalarFn {
    Arc::new(move |x: [f64; 2]| {
        base + amp * ((2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).sin() * (dim - 1.0)) / dim
    })
}

/// One rung of a resolution study.
#[derive(Debug, Clone, Copy)]
pub struct ResolutionStep {
    pub points_per_cell: usize,
    pub j_final: f64,
    pub residual: f64,
}

impl RunConfig {
    pub fn with_points_per_cell(&self, points_per_cell: usize) -> RunConfig {
        RunConfig {
            points_per_cell,
            ..self.clone()
        }
    }

    /// Automatic resolution study: solve at M, 2M, 4M, … until the
    /// ground-state energy stabilizes within `tol` between consecutive
    /// rungs (or `max_doublings` is exhausted). Returns the rungs and
    /// whether stabilization was reached.
    pub fn resolution_study(
        &self,
        tol: f64,
        max_doublings: u32,
    ) -> Result<(Vec<ResolutionStep>, bool), ConfigError> {
        let mut steps: Vec<ResolutionStep> = Vec::new();
        let mut m = self.points_per_cell;
        for _ in 0..=max_doublings {
            let cfg = self.with_points_per_cell(m);
            let prob = cfg.build_problem()?;
            let ms = crate::solve::multi_start(&prob, &cfg.solver);
            let Some(g) = ms.ground_state() else {
                return Ok((steps, false));
            };
            let step = ResolutionStep {
                points_per_cell: m,
                j_final: g.j_final,
                residual: g.residual_final,
            };
            if let Some(prev) = steps.last() {
                let drift = (step.j_final - prev.j_final).abs() / step.j_final.abs().max(1.0);
                steps.push(step);
                if drift < tol {
                    return Ok((steps, true));
                }
            } else {
                steps.push(step);
            }
            m *= 2;
        }
        Ok((steps, false))
    }
}
