//! The energy functional
//!
//! ```text
//! J(u) = ½‖u‖²_E − I(u),   I(u) = ∫ F(x,u) − (1/q)Γ(x)|u|^q dx,
//! ```
//!
//! its Fréchet pairing J′(u)(v), the strong-form residual of the
//! Euler–Lagrange equation, and the preconditioned descent direction.
//!
//! The L² Riesz representative of J′(u) is exactly the strong-form residual
//! r(u) = (−Δ)^{α/2}u + Vu − f(x,u) + Γ|u|^{q−2}u, so `residual` doubles as
//! the gradient in the L² metric. The descent direction applies the spectral
//! preconditioner (|ξ|^α + V₀)^{−1}, which is the exact E-metric gradient
//! for constant potentials and an approximate metric otherwise; convergence
//! is certified by the residual, not by the metric.

use crate::grid::{Field, TorusGrid};
use crate::model::Problem;
use crate::spectral;
use num_complex::Complex64;

/// Component-wise account of an energy evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    /// ½ · seminorm²
    pub kinetic: f64,
    /// ½ · ∫ V u²
    pub potential: f64,
    /// ∫ F(x,u)
    pub f_term: f64,
    /// (1/q) ∫ Γ |u|^q
    pub gamma_term: f64,
    /// I = f_term − gamma_term
    pub i_term: f64,
    /// J = kinetic + potential − I
    pub j: f64,
}

impl EnergyBreakdown {
    pub fn is_finite(&self) -> bool {
        self.kinetic.is_finite()
            && self.potential.is_finite()
            && self.f_term.is_finite()
            && self.gamma_term.is_finite()
            && self.j.is_finite()
    }
}

/// ‖u‖²_E for the problem's α and V.
pub fn norm_e_sq(u: &Field, prob: &Problem) -> f64 {
    spectral::norm_e_sq(u, prob.alpha(), prob.v_samples())
}

pub fn norm_e(u: &Field, prob: &Problem) -> f64 {
    norm_e_sq(u, prob).sqrt()
}

/// ⟨u,v⟩_E for the problem's α and V.
pub fn inner_e(u: &Field, v: &Field, prob: &Problem) -> f64 {
    spectral::inner_e(u, v, prob.alpha(), prob.v_samples())
}

/// Evaluate J with its full component breakdown. J(0) = 0 exactly.
pub fn eval_j(u: &Field, prob: &Problem) -> EnergyBreakdown {
    let grid = prob.grid();
    let vol = grid.cell_volume();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let gamma = prob.gamma_samples();

    let kinetic = 0.5 * spectral::seminorm_sq(u, prob.alpha());
    let potential = 0.5 * spectral::weighted_l2_inner(prob.v_samples(), u, u);

    let mut f_sum = 0.0;
    let mut g_sum = 0.0;
    for (idx, &ui) in u.values().iter().enumerate() {
        let x = grid.point(idx);
        f_sum += nl.big_f_at(idx, x, ui);
        if gamma[idx] != 0.0 {
            g_sum += gamma[idx] * ui.abs().powf(q);
        }
    }
    let f_term = f_sum * vol;
    let gamma_term = g_sum * vol / q;
    let i_term = f_term - gamma_term;
    EnergyBreakdown {
        kinetic,
        potential,
        f_term,
        gamma_term,
        i_term,
        j: kinetic + potential - i_term,
    }
}

/// I(u) alone.
pub fn eval_i(u: &Field, prob: &Problem) -> f64 {
    eval_j(u, prob).i_term
}

/// I′(u)(u) = ∫ f(x,u)u − ∫ Γ|u|^q.
pub fn i_prime_diag(u: &Field, prob: &Problem) -> f64 {
    let grid = prob.grid();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let gamma = prob.gamma_samples();
    let mut acc = 0.0;
    for (idx, &ui) in u.values().iter().enumerate() {
        let x = grid.point(idx);
        acc += nl.f_at(idx, x, ui) * ui;
        if gamma[idx] != 0.0 {
            acc -= gamma[idx] * ui.abs().powf(q);
        }
    }
    acc * grid.cell_volume()
}

/// Fréchet pairing J′(u)(v) = ⟨u,v⟩_E − ∫ f(x,u)v + ∫ Γ|u|^{q−2}u v.
pub fn pairing_jprime(u: &Field, v: &Field, prob: &Problem) -> f64 {
    let grid = prob.grid();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let gamma = prob.gamma_samples();
    let mut nonlinear = 0.0;
    for (idx, (&ui, &vi)) in u.values().iter().zip(v.values()).enumerate() {
        let x = grid.point(idx);
        nonlinear -= nl.f_at(idx, x, ui) * vi;
        if gamma[idx] != 0.0 {
            nonlinear += gamma[idx] * ui.abs().powf(q - 2.0) * ui * vi;
        }
    }
    inner_e(u, v, prob) + nonlinear * grid.cell_volume()
}

/// J′(u)(u), the Nehari defect.
pub fn nehari_defect(u: &Field, prob: &Problem) -> f64 {
    norm_e_sq(u, prob) - i_prime_diag(u, prob)
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub field: Field,
    pub l2: f64,
    pub relative: f64,
}

/// Strong-form residual r = (−Δ)^{α/2}u + Vu − f(x,u) + Γ|u|^{q−2}u, with
/// |r|₂ and |r|₂/‖u‖_E. This is also the L² gradient: ⟨r, v⟩_{L²} = J′(u)(v).
pub fn residual(u: &Field, prob: &Problem) -> ResidualReport {
    let grid = prob.grid();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let gamma = prob.gamma_samples();
    let v_samples = prob.v_samples();

    let lap = spectral::frac_laplacian(u, prob.alpha());
    let mut values = Vec::with_capacity(u.len());
    for (idx, (&ui, &li)) in u.values().iter().zip(lap.values()).enumerate() {
        let x = grid.point(idx);
        let mut r = li + v_samples[idx] * ui - nl.f_at(idx, x, ui);
        if gamma[idx] != 0.0 {
            r += gamma[idx] * ui.abs().powf(q - 2.0) * ui;
        }
        values.push(r);
    }
    let field = Field::new(grid.clone(), values).expect("residual stays finite");
    let l2 = spectral::l2_sq(&field).sqrt();
    let norm = norm_e(u, prob);
    ResidualReport {
        l2,
        relative: if norm > 0.0 { l2 / norm } else { l2 },
        field,
    }
}

/// Apply the spectral preconditioner (|ξ|^α + V₀)^{−1}.
pub fn precondition(r: &Field, prob: &Problem) -> Field {
    let grid: TorusGrid = r.grid().clone();
    let a = prob.alpha().value();
    let v0 = prob.potential().v0();
    let spec: Vec<Complex64> = r
        .spectrum()
        .iter()
        .zip(grid.xi_norms())
        .map(|(c, &xi)| c / (xi.powf(a) + v0))
        .collect();
    Field::from_spectrum(grid, spec)
}

/// Apply the E-operator Λ^α + V pointwise/spectrally.
fn apply_e_operator(z: &Field, prob: &Problem) -> Field {
    let lap = spectral::frac_laplacian(z, prob.alpha());
    Field::new(
        z.grid().clone(),
        lap.values()
            .iter()
            .zip(z.values())
            .zip(prob.v_samples())
            .map(|((l, zi), vi)| l + vi * zi)
            .collect(),
    )
    .expect("operator keeps values finite")
}

/// E-metric Riesz representative of the functional v ↦ ⟨r, v⟩_{L²}: solve
/// (Λ^α + V) g = r by conjugate gradients preconditioned with
/// (|ξ|^α + V₀)^{−1}. For constant potentials the preconditioner is the
/// exact inverse and the first iteration terminates the solve.
pub fn e_gradient(r: &Field, prob: &Problem, rel_tol: f64, max_iters: usize) -> Field {
    let r_norm_sq = spectral::l2_sq(r);
    if r_norm_sq == 0.0 {
        return Field::zeros(r.grid().clone());
    }
    let mut x = Field::zeros(r.grid().clone());
    let mut res = r.clone();
    let mut z = precondition(&res, prob);
    let mut p = z.clone();
    let mut rz = spectral::l2_inner(&res, &z);
    for _ in 0..max_iters {
        let ap = apply_e_operator(&p, prob);
        let denom = spectral::l2_inner(&p, &ap);
        if denom <= 0.0 {
            break;
        }
        let alpha = rz / denom;
        x = x.axpy(alpha, &p);
        res = res.axpy(-alpha, &ap);
        if spectral::l2_sq(&res) <= rel_tol * rel_tol * r_norm_sq {
            break;
        }
        z = precondition(&res, prob);
        let rz_new = spectral::l2_inner(&res, &z);
        if rz_new == 0.0 {
            break;
        }
        p = z.axpy(rz_new / rz, &p);
        rz = rz_new;
    }
    x
}

/// E-metric gradient of J at u: ⟨gradient(u), v⟩_E = J′(u)(v).
pub fn gradient(u: &Field, prob: &Problem) -> Field {
    e_gradient(&residual(u, prob).field, prob, 1e-12, 200)
}

/// Defect of the on-manifold energy identity
/// J(u) = (½ − 1/q)‖u‖² + ∫ (1/q) f(x,u)u − F(x,u); meaningful for u ∈ N.
pub fn coercivity_identity_defect(u: &Field, prob: &Problem) -> f64 {
    let grid = prob.grid();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let mut extra = 0.0;
    for (idx, &ui) in u.values().iter().enumerate() {
        let x = grid.point(idx);
        extra += nl.f_at(idx, x, ui) * ui / q - nl.big_f_at(idx, x, ui);
    }
    extra *= grid.cell_volume();
    let lhs = eval_j(u, prob).j;
    let rhs = (0.5 - 1.0 / q) * norm_e_sq(u, prob) + extra;
    lhs - rhs
}
