//! Stand-alone certification suite: the structural lemmas behind the
//! variational scheme (norm equivalence, the translation package, the
//! Sobolev–Gagliardo–Nirenberg bound, the ε/C_ε growth envelope, Lp
//! interpolation, PV-vs-multiplier agreement) run as named checks over
//! randomized field ensembles.
//!
//! Every check records the seed it ran with and never aborts the suite; a
//! check whose hypotheses are deliberately violated reports `Skip` rather
//! than failure, documenting hypothesis sharpness.
//!
//! The random ensemble mixes band-limited Gaussian fields (lowest quarter
//! of the spectrum) with localized bumps: lemma constants degrade at the
//! Nyquist edge, which the continuum statements do not model.

use crate::energy;
use crate::grid::{Field, FracOrder, TorusGrid};
use crate::model::{CertStatus, Certificate, Problem};
use crate::nehari;
use crate::pv;
use crate::spectral;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("SGN exponent r+1−(r−1)N/α = {0} must be positive")]
    BadSgnExponent(f64),
    #[error("interpolation requires 2 ≤ q ≤ p, got q = {q}, p = {p}")]
    BadInterpolationExponents { q: f64, p: f64 },
}

/// One named, reproducible check outcome.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub status: CertStatus,
    pub detail: String,
    pub witness: Option<String>,
    pub seed: u64,
}

impl CheckResult {
    fn pass(name: &str, seed: u64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            status: CertStatus::Pass,
            detail,
            witness: None,
            seed,
        }
    }

    fn fail(name: &str, seed: u64, detail: String, witness: String) -> Self {
        CheckResult {
            name: name.into(),
            status: CertStatus::Fail,
            detail,
            witness: Some(witness),
            seed,
        }
    }

    fn skip(name: &str, seed: u64, detail: String) -> Self {
        CheckResult {
            name: name.into(),
            status: CertStatus::Skip,
            detail,
            witness: None,
            seed,
        }
    }

    pub fn line(&self) -> String {
        let tag = match self.status {
            CertStatus::Pass => "pass",
            CertStatus::Fail => "FAIL",
            CertStatus::Skip => "skip",
        };
        match &self.witness {
            Some(w) => format!(
                "{:<40} {:>4}  {} [witness: {}]",
                self.name, tag, self.detail, w
            ),
            None => format!("{:<40} {:>4}  {}", self.name, tag, self.detail),
        }
    }
}

/// Total summary of a suite run.
#[derive(Debug, Default)]
pub struct SuiteReport {
    pub results: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_ok(&self) -> bool {
        self.results.iter().all(|r| r.status != CertStatus::Fail)
    }

    pub fn lines(&self) -> Vec<String> {
        self.results.iter().map(|r| r.line()).collect()
    }

    pub fn push_certificate(&mut self, cert: &Certificate, seed: u64) {
        for item in &cert.items {
            let status = if item.gating || item.status != CertStatus::Fail {
                item.status
            } else {
                // non-gating failures are informational
                CertStatus::Skip
            };
            self.results.push(CheckResult {
                name: item.name.clone(),
                status,
                detail: item.detail.clone(),
                witness: item
                    .witness
                    .as_ref()
                    .map(|w| format!("x = {:?}, u = {:.3e}, value = {:.6e}", w.x, w.u, w.value)),
                seed,
            });
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Band-limited Gaussian field: white noise restricted to the lowest
/// quarter of the spectrum.
pub fn band_limited_gaussian(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Field {
    let white: Vec<f64> = (0..grid.len()).map(|_| gaussian(rng)).collect();
    let noise = Field::new(grid.clone(), white).expect("finite noise");
    let cutoff = grid.xi_norms().iter().fold(0.0f64, |m, &x| m.max(x)) * 0.25;
    let spec: Vec<Complex64> = noise
        .spectrum()
        .iter()
        .zip(grid.xi_norms())
        .map(|(c, &xi)| {
            if xi <= cutoff {
                *c
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    let field = Field::from_spectrum(grid.clone(), spec);
    let scale = field.max_abs().max(f64::MIN_POSITIVE);
    field.scale(1.0 / scale)
}

/// Localized random bump.
pub fn random_bump(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Field {
    let l = grid.side_length() as f64;
    let center = [rng.gen_range(0.0..l), rng.gen_range(0.0..l)];
    let width = rng.gen_range(0.4..1.8);
    let amp = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let g = grid.clone();
    Field::from_fn(grid.clone(), move |x| {
        let d = g.torus_distance(x, center);
        amp * (-d * d / (2.0 * width * width)).exp()
    })
}

/// The mixed ensemble used by the checks.
pub fn random_field(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Field {
    if rng.gen_bool(0.5) {
        band_limited_gaussian(grid, rng)
    } else {
        random_bump(grid, rng)
    }
}

/// Norm equivalence: min{1,V₀}‖u‖²_H ≤ ‖u‖²_E ≤ max{1,|V|_∞}‖u‖²_H.
pub fn check_norm_equivalence(prob: &Problem, n_samples: usize, seed: u64) -> CheckResult {
    let name = "norm.equivalence_sandwich";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = prob.grid();
    let alpha = prob.alpha();
    let v0 = prob.potential().v0();
    let upper = prob.potential().v_inf().map(|vi| vi.max(1.0));
    let lower = v0.min(1.0);
    for i in 0..n_samples {
        let u = random_field(grid, &mut rng);
        let h = spectral::norm_h_sq(&u, alpha);
        let e = energy::norm_e_sq(&u, prob);
        if e < lower * h - 1e-12 {
            return CheckResult::fail(
                name,
                seed,
                "lower bound of the sandwich violated".into(),
                format!(
                    "sample {i}: ‖u‖²_E = {e:.6e} < {lower:.3}·‖u‖²_H = {:.6e}",
                    lower * h
                ),
            );
        }
        if let Some(up) = upper {
            if e > up * h + 1e-12 {
                return CheckResult::fail(
                    name,
                    seed,
                    "upper bound of the sandwich violated".into(),
                    format!(
                        "sample {i}: ‖u‖²_E = {e:.6e} > {up:.3}·‖u‖²_H = {:.6e}",
                        up * h
                    ),
                );
            }
        }
    }
    let detail = match upper {
        Some(up) => format!("{n_samples} samples inside [{lower:.3}, {up:.3}]·‖u‖²_H"),
        None => {
            format!("{n_samples} samples above {lower:.3}·‖u‖²_H (coercive: no upper constant)")
        }
    };
    CheckResult::pass(name, seed, detail)
}

/// The translation package: adjoint identity, isometry, J- and N-invariance,
/// and the four equivariances (m, m⁻¹, ∇J, ∇(J∘m)).
pub fn check_translation_package(prob: &Problem, n_samples: usize, seed: u64) -> CheckResult {
    let name = "translation.package";
    if !prob.is_fully_periodic() {
        return CheckResult::skip(
            name,
            seed,
            "V_loc ≠ 0 breaks ℤ^d-invariance; deliberate hypothesis violation reported as skip"
                .into(),
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = prob.grid();
    let l = grid.side_length() as i64;
    let alpha = prob.alpha();

    for i in 0..n_samples {
        let u = normalize(&random_field(grid, &mut rng), prob);
        let v = normalize(&random_field(grid, &mut rng), prob);
        let k: Vec<i64> = (0..grid.dim()).map(|_| rng.gen_range(-l..l)).collect();
        let neg_k: Vec<i64> = k.iter().map(|s| -s).collect();
        let fail = |what: &str, value: f64| {
            CheckResult::fail(
                name,
                seed,
                format!("{what} violated at sample {i}"),
                format!("k = {k:?}, defect = {value:.3e}"),
            )
        };

        // ⟨τ_k u, v⟩ = ⟨u, τ_{−k} v⟩
        let lhs = energy::inner_e(&spectral::translate(&u, &k), &v, prob);
        let rhs = energy::inner_e(&u, &spectral::translate(&v, &neg_k), prob);
        if (lhs - rhs).abs() > 1e-12 {
            return fail("adjoint identity", (lhs - rhs).abs());
        }

        // isometry of all three norms
        let tu = spectral::translate(&u, &k);
        let d_l2 = (spectral::l2_sq(&tu) - spectral::l2_sq(&u)).abs();
        let d_h = (spectral::norm_h_sq(&tu, alpha) - spectral::norm_h_sq(&u, alpha)).abs();
        let d_e = (energy::norm_e_sq(&tu, prob) - energy::norm_e_sq(&u, prob)).abs();
        if d_l2 > 1e-12 || d_h > 1e-12 || d_e > 1e-12 {
            return fail("norm isometry", d_l2.max(d_h).max(d_e));
        }

        // J-invariance
        let dj = (energy::eval_j(&tu, prob).j - energy::eval_j(&u, prob).j).abs();
        if dj > 1e-12 {
            return fail("J-invariance", dj);
        }

        // N-invariance and equivariance of m and m⁻¹
        let (point, prof) = match nehari::project_default(&u, prob) {
            Ok(x) => x,
            Err(e) => {
                return CheckResult::fail(
                    name,
                    seed,
                    format!("projection failed at sample {i}"),
                    e.to_string(),
                )
            }
        };
        let shifted_point = spectral::translate(point.field(), &k);
        let defect = energy::nehari_defect(&shifted_point, prob).abs();
        if defect > 1e-10 * point.norm_e() * point.norm_e() {
            return fail("N-invariance", defect);
        }
        let (point_of_shift, prof_shift) = match nehari::project_default(&tu, prob) {
            Ok(x) => x,
            Err(e) => {
                return CheckResult::fail(
                    name,
                    seed,
                    format!("projection of translate failed at sample {i}"),
                    e.to_string(),
                )
            }
        };
        if (prof.t_star - prof_shift.t_star).abs() > 1e-10 * prof.t_star {
            return fail(
                "m-equivariance (t)",
                (prof.t_star - prof_shift.t_star).abs(),
            );
        }
        let dm = diff_norm(point_of_shift.field(), &shifted_point, prob);
        if dm > 1e-10 * point.norm_e() {
            return fail("m-equivariance (field)", dm);
        }
        let dinv = diff_norm(
            &nehari::inverse_m(&point_of_shift),
            &spectral::translate(&nehari::inverse_m(&point), &k),
            prob,
        );
        if dinv > 1e-10 {
            return fail("m⁻¹-equivariance", dinv);
        }

        // ∇J equivariance
        let g_shift = energy::gradient(&tu, prob);
        let shift_g = spectral::translate(&energy::gradient(&u, prob), &k);
        let dg = diff_norm(&g_shift, &shift_g, prob);
        if dg > 1e-10 * energy::norm_e(&shift_g, prob).max(1e-30) {
            return fail("∇J-equivariance", dg);
        }

        // ∇(J∘m) equivariance via (J∘m)'(v)(z) = ‖m(v)‖·J'(m(v))(z)
        let sg = sphere_gradient(&normalize(&u, prob), &point, prob);
        let sg_shift = sphere_gradient(&normalize(&tu, prob), &point_of_shift, prob);
        let dsg = diff_norm(&sg_shift, &spectral::translate(&sg, &k), prob);
        if dsg > 1e-10 * energy::norm_e(&sg, prob).max(1e-30) {
            return fail("∇(J∘m)-equivariance", dsg);
        }
    }
    CheckResult::pass(
        name,
        seed,
        format!("{n_samples} random (u,v,k) triples at 1e−12/1e−10"),
    )
}

fn normalize(u: &Field, prob: &Problem) -> Field {
    u.scale(1.0 / energy::norm_e(u, prob))
}

fn diff_norm(a: &Field, b: &Field, prob: &Problem) -> f64 {
    energy::norm_e(&a.sub(b), prob)
}

/// ∇(J∘m)(v) = ‖m(v)‖ · (tangent projection at v of the E-gradient at m(v)).
fn sphere_gradient(v: &Field, point: &nehari::NehariPoint, prob: &Problem) -> Field {
    let g = energy::gradient(point.field(), prob);
    let c = energy::inner_e(&g, v, prob);
    g.axpy(-c, v).scale(point.norm_e())
}

/// Sobolev–Gagliardo–Nirenberg at sample scale: the ratio
/// |u|_{r+1}^{r+1} / (‖u‖_H^{(r−1)N/α} |u|₂^{r+1−(r−1)N/α}) stays bounded
/// under grid refinement.
pub fn check_sgn(
    grid: &TorusGrid,
    alpha: FracOrder,
    r: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CheckResult, VerifyError> {
    let name = "sgn.ratio_stable_under_refinement";
    let n_dim = grid.dim() as f64;
    let kinetic_exp = (r - 1.0) * n_dim / alpha.value();
    let mass_exp = r + 1.0 - kinetic_exp;
    if mass_exp <= 0.0 {
        return Err(VerifyError::BadSgnExponent(mass_exp));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |u: &Field| -> f64 {
        let num = spectral::lp_norm(u, r + 1.0).powf(r + 1.0);
        let den =
            spectral::norm_h(u, alpha).powf(kinetic_exp) * spectral::l2_sq(u).sqrt().powf(mass_exp);
        num / den
    };
    let mut sup_coarse = 0.0f64;
    let mut sup_fine = 0.0f64;
    for _ in 0..n_samples {
        let u = random_field(grid, &mut rng);
        sup_coarse = sup_coarse.max(ratio(&u));
        sup_fine = sup_fine.max(ratio(&spectral::spectral_refine(&u, 2)));
    }
    let drift = (sup_fine - sup_coarse).abs() / sup_coarse;
    Ok(if drift < 0.05 {
        CheckResult::pass(
            name,
            seed,
            format!(
                "empirical C = {sup_coarse:.6e}, refinement drift {:.2}%",
                drift * 100.0
            ),
        )
    } else {
        CheckResult::fail(
            name,
            seed,
            "sup ratio moves more than 5% under refinement".into(),
            format!("coarse {sup_coarse:.6e} vs fine {sup_fine:.6e}"),
        )
    })
}

/// ε-envelope of the combined nonlinearity g = f − Γ|u|^{q−2}u: empirical
/// C_ε = sup (|g| − ε|u|)₊ / |u|^{p−1} is finite and grows as ε ↓ 0.
pub fn check_growth_bound(prob: &Problem, eps_grid: &[f64], seed: u64) -> CheckResult {
    let name = "growth.eps_envelope";
    let grid = prob.grid();
    let nl = prob.nonlinearity();
    let q = prob.q();
    let p = prob.p();
    let stride = (grid.len() / 7).max(1);
    let amps: Vec<f64> = (0..49)
        .map(|i| 1e-6 * 10f64.powf(12.0 * i as f64 / 48.0))
        .collect();

    let mut c_eps = Vec::new();
    for &eps in eps_grid {
        let mut sup = 0.0f64;
        let mut arg_u = 0.0f64;
        for idx in (0..grid.len()).step_by(stride) {
            let x = grid.point(idx);
            let gamma = prob.gamma_samples()[idx];
            for &a in &amps {
                for &u in &[a, -a] {
                    let g = nl.f_at(idx, x, u) - gamma * u.abs().powf(q - 2.0) * u;
                    let excess = (g.abs() - eps * u.abs()).max(0.0);
                    let ratio = excess / u.abs().powf(p - 1.0);
                    if ratio > sup {
                        sup = ratio;
                        arg_u = u;
                    }
                }
            }
        }
        if !sup.is_finite() {
            return CheckResult::fail(
                name,
                seed,
                format!("C_ε diverges at ε = {eps:e}"),
                format!("u = {arg_u:.3e}"),
            );
        }
        c_eps.push((eps, sup, arg_u));
    }
    // C_ε must be nonincreasing in ε (larger ε absorbs more), i.e. grow as ε ↓ 0
    for w in c_eps.windows(2) {
        let ((e0, c0, _), (e1, c1, _)) = (w[0], w[1]);
        if e1 < e0 && c1 + 1e-15 < c0 {
            return CheckResult::fail(
                name,
                seed,
                "C_ε failed to grow as ε decreases".into(),
                format!("C({e0:e}) = {c0:.4e} but C({e1:e}) = {c1:.4e}"),
            );
        }
    }
    // smallness near u = 0 must not drive the envelope
    if let Some((eps, _, arg_u)) = c_eps.iter().find(|(_, c, u)| *c > 0.0 && u.abs() < 1e-3) {
        return CheckResult::fail(
            name,
            seed,
            format!("envelope at ε = {eps:e} dominated by u → 0 samples"),
            format!("argmax u = {arg_u:.3e}"),
        );
    }
    let summary = c_eps
        .iter()
        .map(|(e, c, _)| format!("C({e:.0e}) = {c:.3e}"))
        .collect::<Vec<_>>()
        .join(", ");
    CheckResult::pass(name, seed, summary)
}

/// Lp interpolation |w|_q ≤ |w|₂^θ |w|_p^{1−θ} with 1/q = θ/2 + (1−θ)/p.
pub fn check_interpolation(
    grid: &TorusGrid,
    q: f64,
    p: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CheckResult, VerifyError> {
    let name = "interpolation.lq_between_l2_lp";
    if !(2.0 <= q && q <= p) {
        return Err(VerifyError::BadInterpolationExponents { q, p });
    }
    let theta = if q == p && p == 2.0 {
        1.0
    } else {
        (1.0 / q - 1.0 / p) / (0.5 - 1.0 / p)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_samples {
        let w = random_field(grid, &mut rng);
        let lq = spectral::lp_norm(&w, q);
        let bound =
            spectral::l2_sq(&w).sqrt().powf(theta) * spectral::lp_norm(&w, p).powf(1.0 - theta);
        if lq > bound * (1.0 + 1e-12) {
            return Ok(CheckResult::fail(
                name,
                seed,
                format!("interpolation inequality violated at sample {i}"),
                format!("|w|_q = {lq:.6e} > {bound:.6e}"),
            ));
        }
    }
    Ok(CheckResult::pass(
        name,
        seed,
        format!("{n_samples} samples, θ = {theta:.4}"),
    ))
}

/// PV quadrature against the Fourier multiplier on Gaussian and Lorentzian
/// profiles at sample points, for each α in the list.
pub fn check_pv_vs_spectral(alphas: &[f64], seed: u64) -> CheckResult {
    let name = "pv.matches_multiplier";
    // large torus: the multiplier result carries an O(L^{-1-α}) periodization
    // tail from the operator's algebraic decay
    let grid = match TorusGrid::new(1, 400, 16) {
        Ok(g) => g,
        Err(e) => {
            return CheckResult::fail(name, seed, "grid construction failed".into(), e.to_string())
        }
    };
    let c = grid.center()[0];
    type Profile = Box<dyn Fn(f64) -> f64>;
    let cases: Vec<(&str, Profile)> = vec![
        ("gaussian", Box::new(|x: f64| (-x * x / 2.0).exp())),
        ("lorentzian", Box::new(|x: f64| 1.0 / (1.0 + x * x))),
    ];
    // multiples of one half lie exactly on every admissible grid
    let points = [-1.0, -0.5, 0.0, 0.5, 1.0];
    for (label, func) in &cases {
        let field = Field::from_fn(grid.clone(), |x| func(x[0] - c));
        for &alpha in alphas {
            let order = match FracOrder::new(alpha) {
                Ok(a) if alpha < 2.0 => a,
                _ => return CheckResult::skip(name, seed, format!("α = {alpha} outside (0,2)")),
            };
            let lap = spectral::frac_laplacian(&field, order);
            let spectral_at = |x: f64| -> f64 {
                let idx = ((x + c) / grid.spacing()).round() as usize;
                lap.values()[idx]
            };
            let scale = points
                .iter()
                .map(|&x| spectral_at(x).abs())
                .fold(0.0f64, f64::max);
            for &x in &points {
                let pv_val = match pv::frac_laplacian_pv(func, alpha, x, 1e-2, 80.0, 1e-4) {
                    Ok(v) => v,
                    Err(e) => {
                        return CheckResult::fail(
                            name,
                            seed,
                            format!("PV quadrature failed ({label}, α = {alpha}, x = {x})"),
                            e.to_string(),
                        )
                    }
                };
                let rel = (pv_val - spectral_at(x)).abs() / scale;
                if rel > 1e-3 {
                    return CheckResult::fail(
                        name,
                        seed,
                        format!("PV and multiplier disagree ({label}, α = {alpha})"),
                        format!(
                            "x = {x}: pv = {pv_val:.6e}, spectral = {:.6e}, rel = {rel:.2e}",
                            spectral_at(x)
                        ),
                    );
                }
            }
        }
    }
    CheckResult::pass(
        name,
        seed,
        format!("gaussian+lorentzian at α = {alphas:?}, 5 points each, < 1e−3"),
    )
}

/// Fiber certificates ((J3), fiber maximality) over random projected fields.
pub fn check_fiber_certificates(prob: &Problem, n_samples: usize, seed: u64) -> CheckResult {
    let name = "fiber.j3_and_maximality";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..n_samples {
        let u = random_field(prob.grid(), &mut rng);
        let point = match nehari::project_default(&u, prob) {
            Ok((p, _)) => p,
            Err(e) => {
                return CheckResult::fail(
                    name,
                    seed,
                    format!("projection failed at sample {i}"),
                    e.to_string(),
                )
            }
        };
        let j3 = nehari::certify_j3(&point, prob, 21);
        if !j3.passed() {
            return CheckResult::fail(
                name,
                seed,
                format!("(J3) certificate failed at sample {i}"),
                format!(
                    "{:?}",
                    j3.items.iter().find(|x| x.status == CertStatus::Fail)
                ),
            );
        }
        let ts = [1e-3, 0.3, 0.99, 1.01, 3.0, 1e2];
        let fv = nehari::fiber_value_inequality(&point, prob, &ts);
        if !fv.passed() {
            return CheckResult::fail(
                name,
                seed,
                format!("fiber maximality failed at sample {i}"),
                format!(
                    "{:?}",
                    fv.items.iter().find(|x| x.status == CertStatus::Fail)
                ),
            );
        }
    }
    CheckResult::pass(name, seed, format!("{n_samples} random fibers"))
}

/// Run every check plus the model certificates; the summary is total.
pub fn run_all(prob: &Problem, seed: u64) -> SuiteReport {
    let mut report = SuiteReport::default();
    report.push_certificate(&prob.certify(), seed);
    report.results.push(check_norm_equivalence(prob, 200, seed));
    report
        .results
        .push(check_translation_package(prob, 25, seed));
    match check_sgn(prob.grid(), prob.alpha(), prob.p() - 1.0, 40, seed) {
        Ok(r) => report.results.push(r),
        Err(e) => report.results.push(CheckResult::skip(
            "sgn.ratio_stable_under_refinement",
            seed,
            format!("precondition: {e}"),
        )),
    }
    report
        .results
        .push(check_growth_bound(prob, &[1.0, 0.1, 0.01], seed));
    match check_interpolation(prob.grid(), prob.q(), prob.p(), 100, seed) {
        Ok(r) => report.results.push(r),
        Err(e) => report.results.push(CheckResult::skip(
            "interpolation.lq_between_l2_lp",
            seed,
            format!("precondition: {e}"),
        )),
    }
    if prob.grid().dim() == 1 {
        report
            .results
            .push(check_pv_vs_spectral(&[0.5, 1.0, 1.5], seed));
    } else {
        report.results.push(CheckResult::skip(
            "pv.matches_multiplier",
            seed,
            "PV quadrature is one-dimensional".into(),
        ));
    }
    report
        .results
        .push(check_fiber_certificates(prob, 10, seed));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GammaWeight, Nonlinearity, Potential};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn periodic_problem() -> Problem {
        let g = TorusGrid::new(1, 6, 16).unwrap();
        Problem::new(
            g.clone(),
            FracOrder::new(1.5).unwrap(),
            Potential::periodic(g.clone(), Arc::new(|x| 2.0 + (2.0 * PI * x[0]).sin())).unwrap(),
            GammaWeight::constant(g.clone(), 1.0, 3.0).unwrap(),
            Nonlinearity::pure_power(g, 4.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn norm_equivalence_sandwich_holds() {
        let prob = periodic_problem();
        let r = check_norm_equivalence(&prob, 100, 1);
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
        // V ≡ 1 collapses the sandwich to equality and still passes
        let g = prob.grid().clone();
        let unit = Problem::new(
            g.clone(),
            prob.alpha(),
            Potential::constant(g.clone(), 1.0).unwrap(),
            GammaWeight::constant(g.clone(), 1.0, 3.0).unwrap(),
            Nonlinearity::pure_power(g, 4.0).unwrap(),
        )
        .unwrap();
        assert_eq!(
            check_norm_equivalence(&unit, 50, 2).status,
            CertStatus::Pass
        );
    }

    #[test]
    fn translation_package_passes_periodic() {
        let prob = periodic_problem();
        let r = check_translation_package(&prob, 10, 3);
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
    }

    #[test]
    fn translation_package_skips_localized() {
        let g = TorusGrid::new(1, 12, 16).unwrap();
        let c = g.center()[0];
        let prob = Problem::new(
            g.clone(),
            FracOrder::new(2.0).unwrap(),
            Potential::periodic_plus_localized(
                g.clone(),
                Arc::new(|_| 1.0),
                Arc::new(move |x| -0.2 * (-2.0 * (x[0] - c) * (x[0] - c)).exp()),
            )
            .unwrap(),
            GammaWeight::zero(g.clone(), 3.0).unwrap(),
            Nonlinearity::pure_power(g, 4.0).unwrap(),
        )
        .unwrap();
        let r = check_translation_package(&prob, 5, 4);
        assert_eq!(r.status, CertStatus::Skip);
    }

    #[test]
    fn sgn_check_and_precondition() {
        let g = TorusGrid::new(1, 6, 16).unwrap();
        let alpha = FracOrder::new(1.5).unwrap();
        let r = check_sgn(&g, alpha, 3.0, 20, 5).unwrap();
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
        // r+1 − (r−1)N/α ≤ 0 must be rejected: at α = 1/2, N = 1 the mass
        // exponent is 3 − r, so r = 4 is out of range
        let low = FracOrder::new(0.5).unwrap();
        assert!(check_sgn(&g, low, 4.0, 5, 6).is_err());
    }

    #[test]
    fn growth_bound_envelope() {
        let prob = periodic_problem();
        let r = check_growth_bound(&prob, &[1.0, 0.1, 0.01], 7);
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
    }

    #[test]
    fn growth_bound_zero_for_huge_eps() {
        // ε above sup|g|/|u| leaves an empty envelope: C_ε = 0
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let prob = Problem::new(
            g.clone(),
            FracOrder::new(2.0).unwrap(),
            Potential::constant(g.clone(), 1.0).unwrap(),
            GammaWeight::zero(g.clone(), 3.0).unwrap(),
            Nonlinearity::pure_power(g, 4.0).unwrap(),
        )
        .unwrap();
        // amplitudes reach 1e6 with f = u³, so |f|/|u| tops out near 1e12·cap
        let r = check_growth_bound(&prob, &[1e40], 8);
        assert_eq!(r.status, CertStatus::Pass);
        assert!(r.detail.contains("C(1e40) = 0.000e0"), "{}", r.detail);
    }

    #[test]
    fn interpolation_inequality_and_edge_cases() {
        let g = TorusGrid::new(1, 6, 16).unwrap();
        let r = check_interpolation(&g, 3.0, 4.0, 50, 9).unwrap();
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
        // q = 2 gives θ = 1: reduces to the identity |w|₂ ≤ |w|₂
        let r2 = check_interpolation(&g, 2.0, 4.0, 20, 10).unwrap();
        assert_eq!(r2.status, CertStatus::Pass);
        assert!(check_interpolation(&g, 1.5, 4.0, 5, 11).is_err());
    }

    #[test]
    fn pv_cross_method_check() {
        let r = check_pv_vs_spectral(&[0.5, 1.0, 1.5], 12);
        assert_eq!(r.status, CertStatus::Pass, "{}", r.line());
    }

    #[test]
    fn suite_is_total_and_passes_on_default_problem() {
        let prob = periodic_problem();
        let report = run_all(&prob, 42);
        assert!(report.all_ok(), "{:#?}", report.lines());
        assert!(report.results.len() >= 10);
        // every result carries its seed
        assert!(report.results.iter().all(|r| r.seed == 42));
    }
}
