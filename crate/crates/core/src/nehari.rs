//! The scalar fibering map φ(t) = J(tu), the projection m(u) = t(u)·u onto
//! the Nehari manifold N = {u ≠ 0 : J′(u)(u) = 0}, its inverse
//! m⁻¹(u) = u/‖u‖, and certification of the fiber-uniqueness structure.
//!
//! Under the standing hypotheses φ′ is positive near 0 and eventually
//! negative, with exactly one sign change, so t(u) is found by bracketed
//! root-finding: doubling/halving from t = 1 until the sign changes, then a
//! bisection/secant hybrid to relative 1e−12. Failure to bracket is a
//! resolution signal (the nonlinear term is too small on this grid), not a
//! math error, and is reported as such.
//!
//! For the built-in power family the fiber reduces to the closed scalar
//! form φ(t) = t²a/2 − t^p P/p + t^q G/q after three lattice sums; the
//! generic path re-evaluates the nonlinear sums at every t.

use crate::energy;
use crate::grid::Field;
use crate::model::{CertItem, Certificate, Problem, Witness};
use crate::spectral;
use std::sync::Mutex;
use thiserror::Error;

/// Default relative tolerance for the Nehari defect |J′(u)(u)| ≤ tol·‖u‖².
pub const TOL_NEHARI: f64 = 1e-10;

/// Relative width at which the t-bracket is considered resolved.
const ROOT_REL_TOL: f64 = 1e-12;

/// Bracketing gives up beyond this t (doubling from 1).
const BRACKET_CAP: f64 = 1e9;

/// And below this t (halving from 1).
const BRACKET_FLOOR: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("cannot project the zero field onto the Nehari manifold")]
    ZeroField,
    #[error(
        "no sign change of the fiber derivative up to t = {t_reached:e} \
         (φ' = {derivative:e}); the nonlinear term is too small at this resolution"
    )]
    NoSignChange { t_reached: f64, derivative: f64 },
    #[error("fiber evaluation produced a non-finite value at t = {0:e}")]
    NonFinite(f64),
}

/// Scalar reduction of the fiber t ↦ J(tu).
enum Fiber<'a> {
    /// Power family: φ(t) = t²a/2 − t^p P/p + t^q G/q.
    Power {
        a: f64,
        p_sum: f64,
        g_sum: f64,
        p: f64,
        q: f64,
    },
    /// Pointwise re-evaluation for custom families.
    Generic {
        u: &'a Field,
        prob: &'a Problem,
        a: f64,
        g_sum: f64,
    },
}

impl Fiber<'_> {
    fn phi(&self, t: f64) -> f64 {
        match self {
            Fiber::Power {
                a,
                p_sum,
                g_sum,
                p,
                q,
            } => 0.5 * t * t * a - t.powf(*p) * p_sum / p + t.powf(*q) * g_sum / q,
            Fiber::Generic { u, prob, a, g_sum } => {
                let grid = prob.grid();
                let nl = prob.nonlinearity();
                let mut f_sum = 0.0;
                for (idx, &ui) in u.values().iter().enumerate() {
                    f_sum += nl.big_f_at(idx, grid.point(idx), t * ui);
                }
                0.5 * t * t * a - f_sum * grid.cell_volume()
                    + t.abs().powf(prob.q()) * g_sum / prob.q()
            }
        }
    }

    /// φ′(t) = t‖u‖² − ∫ f(x,tu)u + t^{q−1} ∫ Γ|u|^q.
    fn dphi(&self, t: f64) -> f64 {
        match self {
            Fiber::Power {
                a,
                p_sum,
                g_sum,
                p,
                q,
            } => t * a - t.powf(p - 1.0) * p_sum + t.powf(q - 1.0) * g_sum,
            Fiber::Generic { u, prob, a, g_sum } => {
                let grid = prob.grid();
                let nl = prob.nonlinearity();
                let mut f_sum = 0.0;
                for (idx, &ui) in u.values().iter().enumerate() {
                    f_sum += nl.f_at(idx, grid.point(idx), t * ui) * ui;
                }
                t * a - f_sum * grid.cell_volume() + t.powf(prob.q() - 1.0) * g_sum
            }
        }
    }
}

fn build_fiber<'a>(u: &'a Field, prob: &'a Problem) -> Fiber<'a> {
    let grid = prob.grid();
    let vol = grid.cell_volume();
    let a = energy::norm_e_sq(u, prob);
    let q = prob.q();
    let gamma = prob.gamma_samples();
    let g_sum = u
        .values()
        .iter()
        .zip(gamma)
        .map(|(&ui, &g)| if g != 0.0 { g * ui.abs().powf(q) } else { 0.0 })
        .sum::<f64>()
        * vol;
    if let Some(b) = prob.nonlinearity().b_samples() {
        let p = prob.p();
        let p_sum = u
            .values()
            .iter()
            .zip(b)
            .map(|(&ui, &bi)| bi * ui.abs().powf(p))
            .sum::<f64>()
            * vol;
        Fiber::Power {
            a,
            p_sum,
            g_sum,
            p,
            q,
        }
    } else {
        Fiber::Generic { u, prob, a, g_sum }
    }
}

/// The fiber profile kept for audit: the located maximum and the sign trace
/// of φ′ seen during bracketing and root-finding.
#[derive(Debug, Clone)]
pub struct FiberProfile {
    pub t_star: f64,
    pub j_at_t_star: f64,
    pub bracket: (f64, f64),
    pub sign_trace: Vec<(f64, f64)>,
}

/// A field certified to lie on the Nehari manifold: |J′(u)(u)| ≤ tol·‖u‖².
#[derive(Debug, Clone)]
pub struct NehariPoint {
    field: Field,
    j: f64,
    norm_e: f64,
    defect: f64,
}

impl NehariPoint {
    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn into_field(self) -> Field {
        self.field
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn norm_e(&self) -> f64 {
        self.norm_e
    }

    /// The certified Nehari defect J′(u)(u).
    pub fn defect(&self) -> f64 {
        self.defect
    }
}

/// Running session aggregates over every certified Nehari point: the sample
/// version of β = inf_N ‖u‖ > 0 and of the ground level inf_N J > 0.
#[derive(Debug, Clone, Copy)]
pub struct SessionStats {
    pub count: u64,
    pub min_norm_e: f64,
    pub min_j: f64,
}

static SESSION: Mutex<SessionStats> = Mutex::new(SessionStats {
    count: 0,
    min_norm_e: f64::INFINITY,
    min_j: f64::INFINITY,
});

pub fn session_stats() -> SessionStats {
    *SESSION.lock().unwrap()
}

fn record_point(norm_e: f64, j: f64) {
    let mut s = SESSION.lock().unwrap();
    s.count += 1;
    s.min_norm_e = s.min_norm_e.min(norm_e);
    s.min_j = s.min_j.min(j);
}

/// Project u ≠ 0 onto the Nehari manifold along its ray.
pub fn project(
    u: &Field,
    prob: &Problem,
    tol: f64,
) -> Result<(NehariPoint, FiberProfile), ProjectError> {
    if u.is_zero() {
        return Err(ProjectError::ZeroField);
    }
    let fiber = build_fiber(u, prob);
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut probe = |t: f64| -> f64 {
        let d = fiber.dphi(t);
        if trace.len() < 256 {
            trace.push((t, d));
        }
        d
    };

    // bracket the unique sign change of φ′, doubling or halving from t = 1
    let d1 = probe(1.0);
    if !d1.is_finite() {
        return Err(ProjectError::NonFinite(1.0));
    }
    let (mut lo, mut hi);
    if d1 > 0.0 {
        let (mut t_prev, mut t) = (1.0, 2.0);
        loop {
            let d = probe(t);
            if !d.is_finite() {
                return Err(ProjectError::NonFinite(t));
            }
            if d <= 0.0 {
                break;
            }
            if t > BRACKET_CAP {
                return Err(ProjectError::NoSignChange {
                    t_reached: t,
                    derivative: d,
                });
            }
            t_prev = t;
            t *= 2.0;
        }
        lo = t_prev;
        hi = t;
    } else if d1 < 0.0 {
        let (mut t_prev, mut t) = (1.0, 0.5);
        loop {
            let d = probe(t);
            if !d.is_finite() {
                return Err(ProjectError::NonFinite(t));
            }
            if d >= 0.0 {
                break;
            }
            if t < BRACKET_FLOOR {
                return Err(ProjectError::NoSignChange {
                    t_reached: t,
                    derivative: d,
                });
            }
            t_prev = t;
            t *= 0.5;
        }
        lo = t;
        hi = t_prev;
    } else {
        lo = 1.0;
        hi = 1.0;
    }
    let bracket = (lo, hi);

    // bisection with secant acceleration on φ′ (positive at lo, negative at hi)
    let mut t_star = 0.5 * (lo + hi);
    if lo != hi {
        let mut d_lo = fiber.dphi(lo);
        let mut d_hi = fiber.dphi(hi);
        for _ in 0..200 {
            if (hi - lo) <= ROOT_REL_TOL * hi {
                break;
            }
            // secant proposal, falling back to bisection when outside
            let mut t = if d_lo != d_hi {
                lo - d_lo * (hi - lo) / (d_hi - d_lo)
            } else {
                0.5 * (lo + hi)
            };
            let margin = 0.01 * (hi - lo);
            if !(t > lo + margin && t < hi - margin) {
                t = 0.5 * (lo + hi);
            }
            let d = probe(t);
            if !d.is_finite() {
                return Err(ProjectError::NonFinite(t));
            }
            if d > 0.0 {
                lo = t;
                d_lo = d;
            } else if d < 0.0 {
                hi = t;
                d_hi = d;
            } else {
                lo = t;
                hi = t;
            }
        }
        t_star = 0.5 * (lo + hi);
    }

    let j = fiber.phi(t_star);
    let defect = t_star * fiber.dphi(t_star);
    let norm_e = energy::norm_e_sq(u, prob).sqrt() * t_star;
    if !(j.is_finite() && norm_e.is_finite()) {
        return Err(ProjectError::NonFinite(t_star));
    }
    debug_assert!(
        defect.abs() <= tol.max(TOL_NEHARI) * norm_e * norm_e,
        "projection defect {defect:e} exceeds tolerance"
    );
    let point = NehariPoint {
        field: u.scale(t_star),
        j,
        norm_e,
        defect,
    };
    record_point(norm_e, j);
    let profile = FiberProfile {
        t_star,
        j_at_t_star: j,
        bracket,
        sign_trace: trace,
    };
    Ok((point, profile))
}

/// Project with the default tolerance.
pub fn project_default(
    u: &Field,
    prob: &Problem,
) -> Result<(NehariPoint, FiberProfile), ProjectError> {
    project(u, prob, TOL_NEHARI)
}

/// m⁻¹(u) = u/‖u‖_E, mapping N onto the unit sphere.
pub fn inverse_m(point: &NehariPoint) -> Field {
    point.field.scale(1.0 / point.norm_e)
}

/// Evaluate φ′ on a log grid (audit helper for the uniqueness structure).
pub fn fiber_sign_trace(
    u: &Field,
    prob: &Problem,
    t_lo: f64,
    t_hi: f64,
    samples: usize,
) -> Vec<(f64, f64)> {
    let fiber = build_fiber(u, prob);
    (0..samples)
        .map(|i| {
            let s = i as f64 / (samples - 1) as f64;
            let t = t_lo * (t_hi / t_lo).powf(s);
            (t, fiber.dphi(t))
        })
        .collect()
}

/// Certify (J3): ψ(t) = (t²−1)/2·I′(u)(u) − I(tu) + I(u) vanishes at t = 1
/// and is negative elsewhere along the fiber.
pub fn certify_j3(point: &NehariPoint, prob: &Problem, samples: usize) -> Certificate {
    let mut cert = Certificate::default();
    let u = point.field();
    let i_prime = energy::i_prime_diag(u, prob);
    let i_at_1 = energy::eval_i(u, prob);
    let psi = |t: f64| (t * t - 1.0) / 2.0 * i_prime - energy::eval_i(&u.scale(t), prob) + i_at_1;

    let at_one = psi(1.0);
    let scale = i_at_1.abs().max(point.norm_e * point.norm_e).max(1.0);
    if at_one.abs() <= 1e-10 * scale {
        cert.push(CertItem::pass(
            "J3.psi_vanishes_at_one",
            format!("ψ(1) = {at_one:.3e}"),
        ));
    } else {
        cert.push(CertItem::fail(
            "J3.psi_vanishes_at_one",
            "ψ(1) does not vanish".into(),
            Witness {
                x: [1.0, 0.0],
                u: 1.0,
                value: at_one,
            },
        ));
    }

    let mut worst: Option<(f64, f64)> = None;
    for i in 0..samples {
        let s = i as f64 / (samples - 1) as f64;
        let t = 1e-2 * 1e4f64.powf(s);
        if (t - 1.0).abs() < 1e-3 {
            continue;
        }
        let v = psi(t);
        if v >= 0.0 && worst.is_none_or(|(_, w)| v > w) {
            worst = Some((t, v));
        }
    }
    cert.push(match worst {
        None => CertItem::pass(
            "J3.psi_negative_off_one",
            format!("ψ(t) < 0 on {samples} log-spaced t"),
        ),
        Some((t, v)) => CertItem::fail(
            "J3.psi_negative_off_one",
            "ψ(t) ≥ 0 away from t = 1".into(),
            Witness {
                x: [t, 0.0],
                u: t,
                value: v,
            },
        ),
    });
    cert
}

/// Certify the maximality of t = 1 on the fiber through a Nehari point:
/// J(tu) ≤ J(u), strictly away from t = 1.
pub fn fiber_value_inequality(point: &NehariPoint, prob: &Problem, ts: &[f64]) -> Certificate {
    let mut cert = Certificate::default();
    let fiber = build_fiber(point.field(), prob);
    let j1 = fiber.phi(1.0);
    let mut witness = None;
    for &t in ts {
        let jt = fiber.phi(t);
        if jt > j1 + 1e-12 * j1.abs().max(1.0) {
            witness = Some(Witness {
                x: [t, 0.0],
                u: t,
                value: jt - j1,
            });
        }
        if (t - 1.0).abs() > 1e-3 && jt >= j1 {
            witness = Some(Witness {
                x: [t, 0.0],
                u: t,
                value: jt - j1,
            });
        }
    }
    cert.push(match witness {
        None => CertItem::pass(
            "fiber.max_at_one",
            format!("J(tu) < J(u) on {} sampled t", ts.len()),
        ),
        Some(w) => CertItem::fail("fiber.max_at_one", "fiber maximum not at t = 1".into(), w),
    });
    cert
}

/// Verify m(m⁻¹(u)) = u and report the discrepancy in the E-norm.
pub fn roundtrip_defect(point: &NehariPoint, prob: &Problem) -> Result<f64, ProjectError> {
    let sphere = inverse_m(point);
    let (back, _) = project_default(&sphere, prob)?;
    let diff = back.field().sub(point.field());
    Ok(spectral::norm_e(&diff, prob.alpha(), prob.v_samples()) / point.norm_e())
}
