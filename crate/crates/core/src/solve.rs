//! Ground-state computation by projected, preconditioned descent on the
//! unit sphere of E through the Nehari reduction: iterate v on S¹, evaluate
//! J∘m with m(v) = t(v)·v, step against the tangent-projected
//! preconditioned residual with Armijo backtracking, and reproject. The
//! identity (J∘m)'(v)(z) = ‖m(v)‖·J'(m(v))(z) supplies the exact
//! directional derivative for the line search.
//!
//! Multi-start wraps independent seeded runs, deduplicates the converged
//! solutions by ℤ^d-translation orbit (cross-correlation over integer-cell
//! shifts, then an exact check at the best shift), and reports the
//! ground-state candidate with the empirical gap to the next orbit.

use crate::energy;
use crate::grid::Field;
use crate::model::{far_zone_indices, CertItem, Certificate, PotentialKind, Problem, Witness};
use crate::nehari::{self, NehariPoint, ProjectError};
use crate::spectral;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::sync::Mutex;
use thiserror::Error;

/// Environment variable capping the number of concurrent starts.
pub const THREADS_ENV: &str = "NEHARI_FS_THREADS";

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Initial Armijo trial step.
    pub step: f64,
    /// Backtracking factor in (0,1).
    pub armijo_factor: f64,
    /// Armijo slope parameter in (0, ½).
    pub armijo_slope: f64,
    /// Relative tangent-gradient tolerance.
    pub tol_grad: f64,
    /// Relative PDE residual tolerance.
    pub tol_res: f64,
    pub seed: u64,
    pub n_starts: usize,
    /// Orbit-dedup threshold as a fraction of ‖u‖_E.
    pub dedup_threshold: f64,
    /// Fold ±u into one orbit class (odd nonlinearities).
    pub sign_aware: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 2000,
            step: 1.0,
            armijo_factor: 0.5,
            armijo_slope: 1e-4,
            tol_grad: 1e-7,
            tol_res: 1e-6,
            seed: 0,
            n_starts: 8,
            dedup_threshold: 1e-3,
            sign_aware: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigValidationError {
    #[error("tolerances and steps must be positive")]
    NonPositive,
    #[error("armijo slope must lie in (0, 1/2), got {0}")]
    BadSlope(f64),
    #[error("armijo factor must lie in (0, 1), got {0}")]
    BadFactor(f64),
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), ConfigValidationError> {
        if !(self.step > 0.0
            && self.tol_grad > 0.0
            && self.tol_res > 0.0
            && self.dedup_threshold > 0.0)
        {
            return Err(ConfigValidationError::NonPositive);
        }
        if !(self.armijo_slope > 0.0 && self.armijo_slope < 0.5) {
            return Err(ConfigValidationError::BadSlope(self.armijo_slope));
        }
        if !(self.armijo_factor > 0.0 && self.armijo_factor < 1.0) {
            return Err(ConfigValidationError::BadFactor(self.armijo_factor));
        }
        Ok(())
    }
}

/// Outcome of one descent run.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: NehariPoint,
    pub j_final: f64,
    /// Relative PDE residual at the solution.
    pub residual_final: f64,
    pub iterations: usize,
    pub converged: bool,
    /// J(m(v)) per iterate; non-increasing across accepted steps.
    pub energy_trace: Vec<f64>,
    /// Relative residual per iterate.
    pub residual_trace: Vec<f64>,
    /// |u|₂ per iterate (coercive no-vanishing diagnostics).
    pub l2_trace: Vec<f64>,
    /// ‖u‖_E per iterate (tail estimates).
    pub norm_trace: Vec<f64>,
    /// Fiber maximizer t(v) per iterate.
    pub t_trace: Vec<f64>,
    /// Worst margin of J(w) − (½−1/q)‖w‖² seen along the run.
    pub coercivity_margin_min: f64,
    /// Canonically shifted solution (|u| peak moved to the torus center).
    pub orbit_representative: Field,
    /// Set by dedup: whether this report heads its orbit class.
    pub distinct: bool,
    pub start_index: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("iteration limit reached before tolerances were met")]
    MaxItersExceeded(Box<SolveReport>),
    #[error("line search stalled (step < 1e-14)")]
    LineSearchStall(Box<SolveReport>),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error("initial field must be nonzero")]
    ZeroStart,
}

impl SolveError {
    /// The best iterate recorded before the failure, when one exists.
    pub fn partial_report(&self) -> Option<&SolveReport> {
        match self {
            SolveError::MaxItersExceeded(r) | SolveError::LineSearchStall(r) => Some(r),
            _ => None,
        }
    }
}

/// Minimize J∘m over the unit sphere from the given start field.
pub fn minimize(
    start: &Field,
    prob: &Problem,
    cfg: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    minimize_indexed(start, prob, cfg, 0)
}

fn minimize_indexed(
    start: &Field,
    prob: &Problem,
    cfg: &SolverConfig,
    start_index: usize,
) -> Result<SolveReport, SolveError> {
    if start.is_zero() {
        return Err(SolveError::ZeroStart);
    }
    let q = prob.q();
    let mut v = normalize(start, prob);
    let mut step = cfg.step;

    let mut energy_trace = Vec::new();
    let mut residual_trace = Vec::new();
    let mut l2_trace = Vec::new();
    let mut norm_trace = Vec::new();
    let mut t_trace = Vec::new();
    let mut coercivity_margin_min = f64::INFINITY;

    let point;
    let mut converged = false;
    let mut iterations = 0;
    let mut res_rel;

    let (mut w, mut prof) = nehari::project_default(&v, prob)?;
    loop {
        let jw = prof.j_at_t_star;
        let res = energy::residual(w.field(), prob);
        res_rel = res.relative;
        energy_trace.push(jw);
        residual_trace.push(res_rel);
        l2_trace.push(spectral::l2_sq(w.field()).sqrt());
        norm_trace.push(w.norm_e());
        t_trace.push(prof.t_star);
        coercivity_margin_min =
            coercivity_margin_min.min(jw - (0.5 - 1.0 / q) * w.norm_e() * w.norm_e());

        // tangent-projected E-metric gradient at v (loose inner solve;
        // the Armijo slope below uses the exact directional derivative)
        let g = energy::e_gradient(&res.field, prob, 1e-3, 16);
        let mut gt = tangent_project(&g, &v, prob);
        let gnorm = energy::norm_e(&gt, prob);
        if gnorm / w.norm_e() < cfg.tol_grad && res_rel < cfg.tol_res {
            converged = true;
            point = w;
            break;
        }
        if iterations >= cfg.max_iters {
            point = w;
            break;
        }

        // exact directional derivative of J∘m at v along gt
        let mut slope = w.norm_e() * spectral::l2_inner(&res.field, &gt);
        if slope <= 0.0 {
            // fall back to the unpreconditioned tangent residual
            gt = tangent_project(&res.field, &v, prob);
            slope = w.norm_e() * spectral::l2_inner(&res.field, &gt);
            if slope <= 0.0 {
                // no descent direction left at this resolution
                point = w;
                break;
            }
        }

        // Armijo backtracking on v ↦ J(m(v/‖v‖))
        let mut s = step;
        let accepted = loop {
            let trial = normalize(&v.axpy(-s, &gt), prob);
            match nehari::project_default(&trial, prob) {
                Ok((w_t, prof_t)) => {
                    if prof_t.j_at_t_star <= jw - cfg.armijo_slope * s * slope {
                        break Some((trial, w_t, prof_t, s));
                    }
                }
                // an ill-scaled trial direction can defeat the fiber
                // bracket; shrink and retry
                Err(ProjectError::NoSignChange { .. }) | Err(ProjectError::NonFinite(_)) => {}
                Err(e) => return Err(e.into()),
            }
            s *= cfg.armijo_factor;
            if s < 1e-14 {
                break None;
            }
        };

        match accepted {
            Some((v_new, w_new, prof_new, s_used)) => {
                v = v_new;
                w = w_new;
                prof = prof_new;
                step = (s_used * 2.0).min(cfg.step);
                iterations += 1;
            }
            None => {
                let report = build_report(
                    w,
                    res_rel,
                    iterations,
                    false,
                    energy_trace,
                    residual_trace,
                    l2_trace,
                    norm_trace,
                    t_trace,
                    coercivity_margin_min,
                    start_index,
                    prob,
                );
                return Err(SolveError::LineSearchStall(Box::new(report)));
            }
        }
    }

    let report = build_report(
        point,
        res_rel,
        iterations,
        converged,
        energy_trace,
        residual_trace,
        l2_trace,
        norm_trace,
        t_trace,
        coercivity_margin_min,
        start_index,
        prob,
    );
    if converged {
        Ok(report)
    } else {
        Err(SolveError::MaxItersExceeded(Box::new(report)))
    }
}

#[allow(clippy::too_many_arguments)]
fn build_report(
    solution: NehariPoint,
    residual_final: f64,
    iterations: usize,
    converged: bool,
    energy_trace: Vec<f64>,
    residual_trace: Vec<f64>,
    l2_trace: Vec<f64>,
    norm_trace: Vec<f64>,
    t_trace: Vec<f64>,
    coercivity_margin_min: f64,
    start_index: usize,
    prob: &Problem,
) -> SolveReport {
    let orbit_representative = canonical_representative(solution.field(), prob);
    SolveReport {
        j_final: solution.j(),
        residual_final,
        iterations,
        converged,
        energy_trace,
        residual_trace,
        l2_trace,
        norm_trace,
        t_trace,
        coercivity_margin_min,
        orbit_representative,
        distinct: false,
        start_index,
        solution,
    }
}

fn normalize(u: &Field, prob: &Problem) -> Field {
    let n = energy::norm_e(u, prob);
    u.scale(1.0 / n)
}

fn tangent_project(g: &Field, v: &Field, prob: &Problem) -> Field {
    let c = energy::inner_e(g, v, prob);
    g.axpy(-c, v)
}

/// Randomized start: a Gaussian bump with random center and width, carrying
/// low-mode trigonometric noise under its envelope; deterministic in
/// (seed, index). Start 0 sits at the grid minimum of V, so a localized
/// well is always probed; coercive potentials keep all centers near the
/// torus midpoint.
pub fn initial_field(prob: &Problem, seed: u64, index: usize) -> Field {
    let grid = prob.grid();
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let l = grid.side_length() as f64;
    let dim = grid.dim();
    let mid = grid.center();
    let center = if index == 0 {
        let (imin, _) =
            prob.v_samples()
                .iter()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, &v)| {
                        if v < acc.1 {
                            (i, v)
                        } else {
                            acc
                        }
                    },
                );
        grid.point(imin)
    } else if prob.potential().kind() == PotentialKind::Coercive {
        let spread = l / 8.0;
        [
            mid[0] + rng.gen_range(-spread..spread),
            mid[1] + rng.gen_range(-spread..spread),
        ]
    } else {
        [rng.gen_range(0.0..l), rng.gen_range(0.0..l)]
    };
    let width = rng.gen_range(0.5..2.0);
    let amp = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let n_modes = 3;
    let coef: Vec<f64> = (0..2 * n_modes * dim)
        .map(|_| rng.gen_range(-0.2..0.2))
        .collect();
    let g = grid.clone();
    Field::from_fn(grid.clone(), move |x| {
        let d = g.torus_distance(x, center);
        let envelope = (-d * d / (2.0 * width * width)).exp();
        let mut noise = 0.0;
        for ax in 0..dim {
            for k in 0..n_modes {
                let w = 2.0 * std::f64::consts::PI * (k + 1) as f64 * x[ax] / l;
                let c = &coef[2 * (ax * n_modes + k)..];
                noise += c[0] * w.cos() + c[1] * w.sin();
            }
        }
        amp * envelope * (1.0 + noise)
    })
}

/// Result of matching v against the translation orbit of u.
#[derive(Debug, Clone)]
pub struct OrbitMatch {
    pub distance: f64,
    /// Minimizing shift in unit-cell coordinates; integer entries for
    /// ℤ^d-periodic data, fractional for constant-coefficient problems
    /// whose stabilizer is every translation.
    pub shift_cells: Vec<f64>,
    pub flipped: bool,
}

/// Whether every coefficient (V, Γ, b) is constant on the grid, so the
/// discrete symmetry group is all translations rather than ℤ^d.
fn constant_data(prob: &Problem) -> bool {
    let const_slice = |s: &[f64]| s.windows(2).all(|w| w[0] == w[1]);
    let b_const = match prob.nonlinearity().b_samples() {
        Some(b) => const_slice(b),
        None => false,
    };
    const_slice(prob.v_samples()) && const_slice(prob.gamma_samples()) && b_const
}

/// min over integer-cell shifts k (and optionally the sign flip) of
/// ‖u − ±τ_k v‖_E: cross-correlation maximization over all cell shifts at
/// once, then an exact evaluation at the best one. This is the ℤ^d-orbit
/// distance; see [`orbit_distance_full`] for the stabilizer-aware variant.
pub fn orbit_distance(u: &Field, v: &Field, prob: &Problem, sign_aware: bool) -> OrbitMatch {
    orbit_match(u, v, prob, sign_aware, false)
}

/// Orbit distance over the problem's actual translation stabilizer:
/// integer cells for ℤ^d-periodic data, all of the torus (sub-sample
/// Newton refinement of the correlation peak) for constant-coefficient
/// problems. Deduplication uses this variant so that translates of one
/// solution count as one geometric class.
pub fn orbit_distance_full(u: &Field, v: &Field, prob: &Problem, sign_aware: bool) -> OrbitMatch {
    orbit_match(u, v, prob, sign_aware, constant_data(prob))
}

fn orbit_match(
    u: &Field,
    v: &Field,
    prob: &Problem,
    sign_aware: bool,
    continuous: bool,
) -> OrbitMatch {
    let grid = prob.grid();
    let n = grid.points_per_axis();
    let m = grid.points_per_cell();
    let a = prob.alpha().value();
    let vol = grid.cell_volume();

    // spectral cross term ⟨u, τ_s v⟩_{α}: inverse transform of |ξ|^α û v̂*
    let s: Vec<Complex64> = u
        .spectrum()
        .iter()
        .zip(v.spectrum())
        .zip(grid.xi_norms())
        .map(|((cu, cv), &xi)| cu * cv.conj() * xi.powf(a))
        .collect();
    let semi_corr = grid.inverse_complex(&s);
    let semi_scale = grid.spectral_weight() * grid.len() as f64;

    // potential cross terms Σ V(x)u(x)v(x−s) and Σ V(x)v(x−s)²
    let vu = Field::new(
        grid.clone(),
        prob.v_samples()
            .iter()
            .zip(u.values())
            .map(|(a, b)| a * b)
            .collect(),
    )
    .expect("finite product");
    let vsq = Field::new(grid.clone(), v.values().iter().map(|x| x * x).collect())
        .expect("finite product");
    let vpot = Field::new(grid.clone(), prob.v_samples().to_vec()).expect("finite potential");
    let corr_uv = cross_correlation(&vu, v);
    let corr_vv = cross_correlation(&vpot, &vsq);

    let norm_u_sq = energy::norm_e_sq(u, prob);
    let semi_v = spectral::seminorm_sq(v, prob.alpha());

    // candidate sample shifts: every sample when refining continuously,
    // whole cells otherwise
    let candidates: Vec<usize> = if continuous {
        (0..grid.len()).collect()
    } else {
        match grid.dim() {
            1 => (0..n / m).map(|k| k * m).collect(),
            _ => {
                let mut out = Vec::new();
                for k0 in 0..n / m {
                    for k1 in 0..n / m {
                        out.push(k0 * m * n + k1 * m);
                    }
                }
                out
            }
        }
    };

    let mut best = (f64::INFINITY, 0usize, false);
    for &idx in &candidates {
        let cross = semi_corr[idx].re * semi_scale + corr_uv[idx] * vol;
        let norm_tv_sq = semi_v + corr_vv[idx] * vol;
        for flip in [false, true] {
            if flip && !sign_aware {
                continue;
            }
            let sign = if flip { -1.0 } else { 1.0 };
            let d_sq = norm_u_sq + norm_tv_sq - 2.0 * sign * cross;
            if d_sq < best.0 {
                best = (d_sq, idx, flip);
            }
        }
    }
    let (_, idx, flipped) = best;
    let sample_shift: Vec<f64> = match grid.dim() {
        1 => vec![idx as f64],
        _ => vec![(idx / n) as f64, (idx % n) as f64],
    };

    if !continuous {
        // exact check at the winning cell shift (bit-exact permutation)
        let cells: Vec<i64> = sample_shift.iter().map(|&s| s as i64 / m as i64).collect();
        let tv = spectral::translate(v, &cells);
        let diff = if flipped { u.add(&tv) } else { u.sub(&tv) };
        return OrbitMatch {
            distance: energy::norm_e(&diff, prob),
            shift_cells: cells.iter().map(|&c| c as f64).collect(),
            flipped,
        };
    }

    // constant data: Newton-polish the correlation peak over continuous
    // shifts, then evaluate exactly via a spectral phase shift; the sign
    // flip folds into the polished objective
    let flip_sign = if flipped { -1.0 } else { 1.0 };
    let e_coef: Vec<Complex64> = u
        .spectrum()
        .iter()
        .zip(v.spectrum())
        .zip(grid.xi_norms())
        .map(|((cu, cv), &xi)| cu * cv.conj() * (flip_sign * (xi.powf(a) + prob.potential().v0())))
        .collect();
    let h = grid.spacing();
    let mut delta: Vec<f64> = sample_shift.iter().map(|&s| s * h).collect();
    for _ in 0..3 {
        for ax in 0..grid.dim() {
            let (d1, d2) = corr_derivatives(&e_coef, grid, &delta, ax);
            if d2 < 0.0 {
                delta[ax] -= d1 / d2;
            }
        }
    }
    let tv = fractional_shift(v, grid, &delta);
    let diff = if flipped { u.add(&tv) } else { u.sub(&tv) };
    let refined = energy::norm_e(&diff, prob);
    // fall back to the lattice candidate if polishing failed to help
    let tv_lattice = spectral::translate_samples(
        v,
        &sample_shift.iter().map(|&s| s as i64).collect::<Vec<_>>(),
    );
    let diff_lattice = if flipped {
        u.add(&tv_lattice)
    } else {
        u.sub(&tv_lattice)
    };
    let lattice = energy::norm_e(&diff_lattice, prob);
    if refined <= lattice {
        OrbitMatch {
            distance: refined,
            shift_cells: delta.iter().map(|&d| d / (m as f64 * h)).collect(),
            flipped,
        }
    } else {
        OrbitMatch {
            distance: lattice,
            shift_cells: sample_shift.iter().map(|&s| s / m as f64).collect(),
            flipped,
        }
    }
}

/// d/dδ_ax and d²/dδ_ax² of the correlation C(δ) = Σ Re(e_k e^{iξ_k·δ}).
fn corr_derivatives(
    e_coef: &[Complex64],
    grid: &crate::grid::TorusGrid,
    delta: &[f64],
    axis: usize,
) -> (f64, f64) {
    let n = grid.points_per_axis();
    let l = grid.side_length() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let signed = |i: usize| -> f64 {
        if i < n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    };
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for (idx, e) in e_coef.iter().enumerate() {
        let (k0, k1) = match grid.dim() {
            1 => (signed(idx), 0.0),
            _ => (signed(idx / n), signed(idx % n)),
        };
        let xi = [two_pi * k0 / l, two_pi * k1 / l];
        let phase = xi[0] * delta[0] + xi[1] * delta.get(1).copied().unwrap_or(0.0);
        let rot = Complex64::new(phase.cos(), phase.sin());
        let xa = xi[axis];
        d1 += (e * rot * Complex64::new(0.0, xa)).re;
        d2 -= (e * rot).re * xa * xa;
    }
    let scale = grid.spectral_weight() * grid.len() as f64;
    (d1 * scale, d2 * scale)
}

/// Sample v(· − δ) for a real-valued shift via the spectral phase factor.
fn fractional_shift(v: &Field, grid: &crate::grid::TorusGrid, delta: &[f64]) -> Field {
    let n = grid.points_per_axis();
    let l = grid.side_length() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let signed = |i: usize| -> f64 {
        if i < n / 2 {
            i as f64
        } else {
            i as f64 - n as f64
        }
    };
    let spec: Vec<Complex64> = v
        .spectrum()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k0, k1) = match grid.dim() {
                1 => (signed(idx), 0.0),
                _ => (signed(idx / n), signed(idx % n)),
            };
            let phase = -two_pi * (k0 * delta[0] + k1 * delta.get(1).copied().unwrap_or(0.0)) / l;
            c * Complex64::new(phase.cos(), phase.sin())
        })
        .collect();
    Field::from_spectrum(grid.clone(), spec)
}

/// Σ_x a(x) b(x − shift) for all shifts, via the transform.
fn cross_correlation(a: &Field, b: &Field) -> Vec<f64> {
    let grid = a.grid();
    let prod: Vec<Complex64> = a
        .spectrum()
        .iter()
        .zip(b.spectrum())
        .map(|(ca, cb)| ca * cb.conj())
        .collect();
    grid.inverse_complex(&prod).iter().map(|c| c.re).collect()
}

/// Canonical orbit representative: shift moving the |u| peak as close to
/// the torus center as possible (whole cells for periodic data, whole
/// samples for constant data); ties broken by the lexicographically
/// smallest shift.
pub fn canonical_representative(u: &Field, prob: &Problem) -> Field {
    let grid = prob.grid();
    let n = grid.points_per_axis();
    let m = if constant_data(prob) {
        1
    } else {
        grid.points_per_cell()
    };
    let (peak_idx, _) = u
        .values()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    let center = n as i64 / 2;
    let shift = match grid.dim() {
        1 => {
            let k = needed_cells(peak_idx as i64, center, n, m);
            vec![k * m as i64]
        }
        _ => {
            let i0 = (peak_idx / n) as i64;
            let i1 = (peak_idx % n) as i64;
            vec![
                needed_cells(i0, center, n, m) * m as i64,
                needed_cells(i1, center, n, m) * m as i64,
            ]
        }
    };
    spectral::translate_samples(u, &shift)
}

/// Whole-cell shift bringing sample index `from` nearest `to` on the cycle,
/// preferring the smaller (more negative) shift on ties.
fn needed_cells(from: i64, to: i64, n: usize, m: usize) -> i64 {
    let n = n as i64;
    let m = m as i64;
    let l = n / m;
    let mut best = (i64::MAX, 0i64);
    for k in 0..l {
        let pos = (from + k * m).rem_euclid(n);
        let raw = (pos - to).abs();
        let d = raw.min(n - raw);
        let canonical_k = if k > l / 2 { k - l } else { k };
        if d < best.0 || (d == best.0 && canonical_k < best.1) {
            best = (d, canonical_k);
        }
    }
    best.1
}

/// A multi-start session: all reports (converged or best-effort), orbit
/// classes over the converged ones, and the ground-state candidate.
#[derive(Debug)]
pub struct MultiStartReport {
    /// Converged reports sorted by J ascending.
    pub reports: Vec<SolveReport>,
    /// Start indices whose runs failed, with the error text.
    pub failures: Vec<(usize, String)>,
    /// Orbit classes as indices into `reports`; class 0 holds the ground state.
    pub classes: Vec<Vec<usize>>,
    /// E-distance from the ground-state orbit to the nearest other orbit.
    pub next_orbit_distance: Option<f64>,
    /// Energy gap from the ground state to the best of the next orbit.
    pub next_orbit_energy_gap: Option<f64>,
}

impl MultiStartReport {
    pub fn ground_state(&self) -> Option<&SolveReport> {
        self.reports.first()
    }

    pub fn distinct_orbits(&self) -> usize {
        self.classes.len()
    }
}

fn worker_cap(n_starts: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|v| v.get())
        .unwrap_or(1);
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(hw);
    cap.min(n_starts).max(1)
}

/// Run `cfg.n_starts` independent seeded descents concurrently and
/// deduplicate the outcomes by translation orbit.
pub fn multi_start(prob: &Problem, cfg: &SolverConfig) -> MultiStartReport {
    let mut outcomes: Vec<Option<Result<SolveReport, String>>> = Vec::new();
    outcomes.resize_with(cfg.n_starts, || None);
    let slots = Mutex::new(outcomes);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let workers = worker_cap(cfg.n_starts);

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if idx >= cfg.n_starts {
                    break;
                }
                let start = initial_field(prob, cfg.seed, idx);
                let outcome = match minimize_indexed(&start, prob, cfg, idx) {
                    Ok(report) => Ok(report),
                    Err(e) => Err(e.to_string()),
                };
                slots.lock().unwrap()[idx] = Some(outcome);
            });
        }
    });

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (idx, slot) in slots.into_inner().unwrap().into_iter().enumerate() {
        match slot.expect("all starts complete") {
            Ok(report) => reports.push(report),
            Err(msg) => failures.push((idx, msg)),
        }
    }
    reports.sort_by(|a, b| a.j_final.total_cmp(&b.j_final));

    let sign_aware = cfg.sign_aware && prob.nonlinearity().is_odd();
    let classes = dedup(&mut reports, cfg.dedup_threshold, prob, sign_aware);

    let (mut next_orbit_distance, mut next_orbit_energy_gap) = (None, None);
    if classes.len() > 1 {
        let ground = &reports[classes[0][0]];
        let other = &reports[classes[1][0]];
        let m = orbit_distance_full(
            ground.solution.field(),
            other.solution.field(),
            prob,
            sign_aware,
        );
        next_orbit_distance = Some(m.distance);
        next_orbit_energy_gap = Some(other.j_final - ground.j_final);
    }

    MultiStartReport {
        reports,
        failures,
        classes,
        next_orbit_distance,
        next_orbit_energy_gap,
    }
}

/// Union-find over orbit distance below `threshold`·min(‖u‖,‖v‖); marks one
/// representative per class via `distinct` and returns the classes (sorted
/// by their best J, which is the reports' order).
#[allow(clippy::needless_range_loop)]
pub fn dedup(
    reports: &mut [SolveReport],
    threshold: f64,
    prob: &Problem,
    sign_aware: bool,
) -> Vec<Vec<usize>> {
    let k = reports.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..k {
        for j in (i + 1)..k {
            let scale = reports[i]
                .solution
                .norm_e()
                .min(reports[j].solution.norm_e());
            let m = orbit_distance_full(
                reports[i].solution.field(),
                reports[j].solution.field(),
                prob,
                sign_aware,
            );
            if m.distance < threshold * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = rj.min(ri);
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..k {
        let root = find(&mut parent, i);
        if root == i {
            reports[i].distinct = true;
            classes.push(vec![i]);
        } else {
            reports[i].distinct = false;
            let pos = classes
                .iter()
                .position(|c| find(&mut parent, c[0]) == root)
                .expect("root seen before");
            classes[pos].push(i);
        }
    }
    classes
}

/// Post-hoc certificates for a coercive run: the no-vanishing L² floor
/// along the iterates and the far-zone tail-mass estimate, plus the
/// boundary-smallness validity check of the torus truncation.
pub fn coercive_diagnostics(report: &SolveReport, prob: &Problem) -> Certificate {
    let mut cert = Certificate::default();

    // (i) no-vanishing floor: half the minimum of |u_n|₂² after iteration 10
    let skip = 10.min(report.l2_trace.len().saturating_sub(1));
    let min_mass = report.l2_trace[skip..]
        .iter()
        .map(|v| v * v)
        .fold(f64::INFINITY, f64::min);
    let floor = 0.5 * min_mass;
    if floor > 0.0 {
        let all_above = report.l2_trace[skip..].iter().all(|v| v * v >= floor);
        if all_above {
            cert.push(CertItem::pass(
                "coercive.no_vanishing",
                format!("post-iteration-10 mass floor c̃ = {floor:.6e} > 0"),
            ));
        } else {
            cert.push(CertItem::fail(
                "coercive.no_vanishing",
                "an iterate dipped below the post-hoc floor".into(),
                Witness {
                    x: [0.0; 2],
                    u: 0.0,
                    value: floor,
                },
            ));
        }
    } else {
        cert.push(CertItem::fail(
            "coercive.no_vanishing",
            "iterate mass vanished".into(),
            Witness {
                x: [0.0; 2],
                u: 0.0,
                value: floor,
            },
        ));
    }

    // (ii) tail mass: needs a radius with inf_{far} V ≥ 20·sup_n ‖u_n‖²
    if prob.potential().kind() != PotentialKind::Coercive {
        cert.push(CertItem::skip(
            "coercive.tail_mass",
            "potential is not coercive; tail estimate inapplicable".into(),
        ));
    } else {
        let grid = prob.grid();
        let c = grid.center();
        // sup over the minimizing tail {n : J(u_n) ≤ c + 1}, the bounded
        // sequence the estimate is about; the initial excursion can exceed
        // any potential level the torus carries
        let sup_norm_sq = report
            .norm_trace
            .iter()
            .zip(&report.energy_trace)
            .filter(|(_, &j)| j <= report.j_final + 1.0)
            .fold(0.0f64, |m, (&v, _)| m.max(v * v));
        let target = 20.0 * sup_norm_sq;
        let half = grid.side_length() as f64 / 2.0;
        let mut chosen: Option<(f64, f64)> = None;
        for i in 1..64 {
            let r = half * i as f64 / 64.0;
            let inf_v = (0..grid.len())
                .filter(|&idx| grid.torus_distance(grid.point(idx), c) >= r)
                .map(|idx| prob.v_samples()[idx])
                .fold(f64::INFINITY, f64::min);
            if inf_v >= target && inf_v.is_finite() {
                chosen = Some((r, inf_v));
                break;
            }
        }
        match chosen {
            None => cert.push(CertItem::fail(
                "coercive.tail_mass",
                format!("no radius reaches inf V ≥ 20·sup‖u_n‖² = {target:.3e}"),
                Witness {
                    x: [half, 0.0],
                    u: 0.0,
                    value: target,
                },
            )),
            Some((r, inf_v)) => {
                let u = report.solution.field();
                let vol = grid.cell_volume();
                let tail: f64 = (0..grid.len())
                    .filter(|&idx| grid.torus_distance(grid.point(idx), c) > r)
                    .map(|idx| u.values()[idx] * u.values()[idx])
                    .sum::<f64>()
                    * vol;
                let bound = sup_norm_sq / inf_v;
                if tail <= bound {
                    cert.push(CertItem::pass(
                        "coercive.tail_mass",
                        format!(
                            "tail mass {tail:.3e} ≤ sup‖u_n‖²/inf V = {bound:.3e} at R = {r:.2}"
                        ),
                    ));
                } else {
                    cert.push(CertItem::fail(
                        "coercive.tail_mass",
                        format!("tail mass {tail:.3e} exceeds the estimate {bound:.3e}"),
                        Witness {
                            x: [r, 0.0],
                            u: 0.0,
                            value: tail,
                        },
                    ));
                }
            }
        }
    }

    // torus-truncation validity: |u| negligible on the outer annulus
    let ratio = boundary_smallness(report.solution.field(), prob);
    if ratio < 1e-6 {
        cert.push(CertItem::pass(
            "boundary.smallness",
            format!("max |u| on the outer annulus / max |u| = {ratio:.3e}"),
        ));
    } else {
        cert.push(CertItem::fail(
            "boundary.smallness",
            "solution is not negligible at the torus boundary".into(),
            Witness {
                x: [0.0; 2],
                u: 0.0,
                value: ratio,
            },
        ));
    }
    cert
}

/// max |u| over the far zone divided by max |u|.
pub fn boundary_smallness(u: &Field, prob: &Problem) -> f64 {
    let far = far_zone_indices(prob.grid());
    let far_max = far
        .iter()
        .map(|&i| u.values()[i].abs())
        .fold(0.0f64, f64::max);
    far_max / u.max_abs().max(f64::MIN_POSITIVE)
}

/// Outcome of the ground-level comparison between J and its periodic part.
#[derive(Debug)]
pub struct CperComparison {
    pub c: f64,
    pub c_per: f64,
    pub report: MultiStartReport,
    pub report_per: MultiStartReport,
    pub certificate: Certificate,
}

/// Run multi-start on J and on J_per (V_loc stripped) and certify the
/// strict ground-level ordering c < c_per for a genuinely negative V_loc.
pub fn compare_c_vs_cper(
    prob: &Problem,
    cfg: &SolverConfig,
) -> Result<CperComparison, crate::model::ModelError> {
    let prob_per = prob.periodic_comparison()?;
    let report = multi_start(prob, cfg);
    let report_per = multi_start(&prob_per, cfg);
    let mut certificate = Certificate::default();
    let tol_gap = 1e-6;
    match (report.ground_state(), report_per.ground_state()) {
        (Some(g), Some(gp)) => {
            let (c, c_per) = (g.j_final, gp.j_final);
            if prob.is_fully_periodic() {
                if (c - c_per).abs() <= 1e-4 * c_per.abs().max(1.0) {
                    certificate.push(CertItem::pass(
                        "cper.identical_functionals",
                        format!("V_loc ≡ 0: c = {c:.8e} matches c_per = {c_per:.8e}"),
                    ));
                } else {
                    certificate.push(CertItem::fail(
                        "cper.identical_functionals",
                        "c differs from c_per although V_loc ≡ 0".into(),
                        Witness {
                            x: [0.0; 2],
                            u: 0.0,
                            value: c - c_per,
                        },
                    ));
                }
            } else if c < c_per - tol_gap {
                certificate.push(CertItem::pass(
                    "cper.strict_drop",
                    format!("c = {c:.8e} < c_per = {c_per:.8e} (gap {:.3e})", c_per - c),
                ));
            } else {
                certificate.push(CertItem::fail(
                    "cper.strict_drop",
                    format!(
                        "expected c < c_per − {tol_gap:e}; got c = {c:.8e}, c_per = {c_per:.8e}"
                    ),
                    Witness {
                        x: [0.0; 2],
                        u: 0.0,
                        value: c - c_per,
                    },
                ));
            }
            Ok(CperComparison {
                c,
                c_per,
                report,
                report_per,
                certificate,
            })
        }
        _ => {
            certificate.push(CertItem::fail(
                "cper.solver",
                "multi-start produced no converged report".into(),
                Witness {
                    x: [0.0; 2],
                    u: 0.0,
                    value: f64::NAN,
                },
            ));
            Ok(CperComparison {
                c: f64::NAN,
                c_per: f64::NAN,
                report,
                report_per,
                certificate,
            })
        }
    }
}
