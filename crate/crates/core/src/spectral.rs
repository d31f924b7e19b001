//! The fractional Laplacian as a Fourier multiplier |ξ|^α, the H^{α/2} and
//! E^{α/2} norms and inner products, and the exact ℤ^d translation action.
//!
//! All integrals are lattice sums times the cell volume, which is spectrally
//! accurate on the torus. The zero mode is annihilated by the multiplier, so
//! constants lie in the kernel of (−Δ)^{α/2} exactly as in the continuum.

use crate::grid::{Field, FracOrder};
use num_complex::Complex64;

/// Apply (−Δ)^{α/2} spectrally: multiply the spectrum by |ξ|^α.
pub fn frac_laplacian(u: &Field, alpha: FracOrder) -> Field {
    let grid = u.grid().clone();
    let a = alpha.value();
    let spec: Vec<Complex64> = u
        .spectrum()
        .iter()
        .zip(grid.xi_norms())
        .map(|(c, &xi)| c * xi.powf(a))
        .collect();
    Field::from_spectrum(grid, spec)
}

/// First spectral derivative along `axis` (multiplier iξ_axis).
///
/// The Nyquist mode is zeroed: an odd multiplier has no conjugate partner
/// there and would leak energy into the discarded imaginary part.
pub fn derivative(u: &Field, axis: usize) -> Field {
    let grid = u.grid().clone();
    let n = grid.points_per_axis();
    let l = grid.side_length() as f64;
    let two_pi = 2.0 * std::f64::consts::PI;
    let signed = |i: usize| -> f64 {
        if i < n / 2 {
            i as f64
        } else if i == n / 2 {
            0.0
        } else {
            i as f64 - n as f64
        }
    };
    let spec: Vec<Complex64> = u
        .spectrum()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let k = match (grid.dim(), axis) {
                (1, _) => signed(idx),
                (_, 0) => signed(idx / n),
                _ => signed(idx % n),
            };
            c * Complex64::new(0.0, two_pi * k / l)
        })
        .collect();
    Field::from_spectrum(grid, spec)
}

/// Discrete ∫ u v dx.
pub fn l2_inner(u: &Field, v: &Field) -> f64 {
    assert_eq!(u.grid(), v.grid());
    u.values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * u.grid().cell_volume()
}

/// Discrete |u|₂².
pub fn l2_sq(u: &Field) -> f64 {
    u.values().iter().map(|v| v * v).sum::<f64>() * u.grid().cell_volume()
}

/// Discrete L^r norm |u|_r.
pub fn lp_norm(u: &Field, r: f64) -> f64 {
    (u.values().iter().map(|v| v.abs().powf(r)).sum::<f64>() * u.grid().cell_volume()).powf(1.0 / r)
}

/// Gagliardo seminorm squared, ∫ |ξ|^α |û|² dξ in the discrete convention.
pub fn seminorm_sq(u: &Field, alpha: FracOrder) -> f64 {
    let grid = u.grid();
    let a = alpha.value();
    u.spectrum()
        .iter()
        .zip(grid.xi_norms())
        .map(|(c, &xi)| xi.powf(a) * c.norm_sqr())
        .sum::<f64>()
        * grid.spectral_weight()
}

/// Seminorm cross term ∫ |ξ|^α û conj(v̂) dξ (real part).
pub fn semi_inner(u: &Field, v: &Field, alpha: FracOrder) -> f64 {
    assert_eq!(u.grid(), v.grid());
    let grid = u.grid();
    let a = alpha.value();
    u.spectrum()
        .iter()
        .zip(v.spectrum())
        .zip(grid.xi_norms())
        .map(|((cu, cv), &xi)| xi.powf(a) * (cu * cv.conj()).re)
        .sum::<f64>()
        * grid.spectral_weight()
}

/// ∫ w u v dx for a pointwise weight w (used for the potential term).
pub fn weighted_l2_inner(w: &[f64], u: &Field, v: &Field) -> f64 {
    assert_eq!(u.grid(), v.grid());
    assert_eq!(w.len(), u.len());
    w.iter()
        .zip(u.values())
        .zip(v.values())
        .map(|((w, a), b)| w * a * b)
        .sum::<f64>()
        * u.grid().cell_volume()
}

/// ‖u‖²_{H^{α/2}} = seminorm² + |u|₂².
pub fn norm_h_sq(u: &Field, alpha: FracOrder) -> f64 {
    seminorm_sq(u, alpha) + l2_sq(u)
}

pub fn norm_h(u: &Field, alpha: FracOrder) -> f64 {
    norm_h_sq(u, alpha).sqrt()
}

/// ‖u‖²_E = seminorm² + ∫ V u² dx. The potential samples must come from a
/// certified potential (V_0 > 0 is enforced at construction, not here).
pub fn norm_e_sq(u: &Field, alpha: FracOrder, v_samples: &[f64]) -> f64 {
    seminorm_sq(u, alpha) + weighted_l2_inner(v_samples, u, u)
}

pub fn norm_e(u: &Field, alpha: FracOrder, v_samples: &[f64]) -> f64 {
    norm_e_sq(u, alpha, v_samples).sqrt()
}

/// E-scalar product ⟨u,v⟩ = ∫|ξ|^α û conj(v̂) dξ + ∫ V u v dx.
pub fn inner_e(u: &Field, v: &Field, alpha: FracOrder, v_samples: &[f64]) -> f64 {
    semi_inner(u, v, alpha) + weighted_l2_inner(v_samples, u, v)
}

/// Integer-cell translation τ_k u = u(· − k): an exact cyclic permutation of
/// the samples by k·M per axis.
pub fn translate(u: &Field, shift: &[i64]) -> Field {
    let grid = u.grid().clone();
    assert_eq!(
        shift.len(),
        grid.dim(),
        "shift must have one entry per axis"
    );
    let n = grid.points_per_axis() as i64;
    let m = grid.points_per_cell() as i64;
    let old = u.values();
    let wrap = |j: i64| -> usize { j.rem_euclid(n) as usize };
    let values = match grid.dim() {
        1 => {
            let s = shift[0] * m;
            (0..n).map(|j| old[wrap(j - s)]).collect()
        }
        _ => {
            let (s0, s1) = (shift[0] * m, shift[1] * m);
            let mut out = Vec::with_capacity(old.len());
            for i0 in 0..n {
                let src0 = wrap(i0 - s0) * n as usize;
                for i1 in 0..n {
                    out.push(old[src0 + wrap(i1 - s1)]);
                }
            }
            out
        }
    };
    Field::new(grid, values).expect("translation preserves length and finiteness")
}

/// Shift by raw sample counts (not whole cells); used for canonical orbit
/// representatives where sub-cell alignment of the peak is wanted.
pub fn translate_samples(u: &Field, sample_shift: &[i64]) -> Field {
    let grid = u.grid().clone();
    let n = grid.points_per_axis() as i64;
    let old = u.values();
    let wrap = |j: i64| -> usize { j.rem_euclid(n) as usize };
    let values = match grid.dim() {
        1 => {
            let s = sample_shift[0];
            (0..n).map(|j| old[wrap(j - s)]).collect()
        }
        _ => {
            let (s0, s1) = (sample_shift[0], sample_shift[1]);
            let mut out = Vec::with_capacity(old.len());
            for i0 in 0..n {
                let src0 = wrap(i0 - s0) * n as usize;
                for i1 in 0..n {
                    out.push(old[src0 + wrap(i1 - s1)]);
                }
            }
            out
        }
    };
    Field::new(grid, values).expect("translation preserves length and finiteness")
}

/// Represent u on a grid with `factor`× more points per cell by zero-padding
/// the spectrum: the same trigonometric interpolant, sampled finer. The
/// Nyquist coefficient is split evenly between ±n/2 to keep the result real.
pub fn spectral_refine(u: &Field, factor: usize) -> Field {
    assert!(factor.is_power_of_two() && factor >= 1);
    let grid = u.grid();
    let fine = crate::grid::TorusGrid::new(
        grid.dim(),
        grid.side_length(),
        grid.points_per_cell() * factor,
    )
    .expect("refined grid parameters stay valid");
    let n = grid.points_per_axis();
    let nf = fine.points_per_axis();
    let gain = (nf / n).pow(grid.dim() as u32) as f64;
    let mut spec = vec![Complex64::new(0.0, 0.0); fine.len()];
    let map_axis = |i: usize| -> (usize, f64) {
        // (target index in the fine spectrum, weight)
        if i < n / 2 {
            (i, 1.0)
        } else if i == n / 2 {
            (n / 2, 0.5)
        } else {
            (nf - (n - i), 1.0)
        }
    };
    match grid.dim() {
        1 => {
            for (i, c) in u.spectrum().iter().enumerate() {
                let (j, w) = map_axis(i);
                spec[j] += c * w * gain;
                if i == n / 2 {
                    spec[nf - n / 2] += c * w * gain;
                }
            }
        }
        _ => {
            for (idx, c) in u.spectrum().iter().enumerate() {
                let (i0, i1) = (idx / n, idx % n);
                let (j0, w0) = map_axis(i0);
                let (j1, w1) = map_axis(i1);
                let mut targets = vec![(j0, j1, w0 * w1)];
                if i0 == n / 2 {
                    targets.push((nf - n / 2, j1, w0 * w1));
                }
                if i1 == n / 2 {
                    targets.push((j0, nf - n / 2, w0 * w1));
                }
                if i0 == n / 2 && i1 == n / 2 {
                    targets.push((nf - n / 2, nf - n / 2, w0 * w1));
                }
                for (a, b, w) in targets {
                    spec[a * nf + b] += c * w * gain;
                }
            }
        }
    }
    Field::from_spectrum(fine, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(grid: &TorusGrid, rng: &mut ChaCha8Rng) -> Field {
        let values = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Field::new(grid.clone(), values).unwrap()
    }

    #[test]
    fn cosine_is_multiplier_eigenfunction() {
        // u(x) = cos(2πx), L = 1: eigenvalue (2π)^α; α = 1 gives 2π ≈ 6.28319.
        let g = TorusGrid::new(1, 1, 64).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let lap = frac_laplacian(&u, FracOrder::new(1.0).unwrap());
        for (l, v) in lap.values().iter().zip(u.values()) {
            assert!((l - 2.0 * PI * v).abs() < 1e-10);
        }
    }

    #[test]
    fn alpha_two_matches_spectral_minus_laplacian() {
        let g = TorusGrid::new(1, 2, 64).unwrap();
        let u = Field::from_fn(g, |x| (PI * x[0]).sin() + 0.2 * (3.0 * PI * x[0]).cos());
        let a2 = frac_laplacian(&u, FracOrder::new(2.0).unwrap());
        // -u'' computed as -d/dx(d/dx u)
        let ddu = derivative(&derivative(&u, 0), 0).neg();
        for (a, b) in a2.values().iter().zip(ddu.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn lorentzian_half_laplacian_closed_form() {
        // (−Δ)^{1/2} 1/(1+x²) = (1−x²)/(1+x²)², from the Fourier pair
        // 1/(1+x²) ↔ π e^{−|ξ|} in the angular convention.
        let g = TorusGrid::new(1, 100, 64).unwrap();
        let c = g.center()[0];
        let u = Field::from_fn(g.clone(), |x| 1.0 / (1.0 + (x[0] - c) * (x[0] - c)));
        let lap = frac_laplacian(&u, FracOrder::new(1.0).unwrap());
        // center value 1.0
        let i_center = (c / g.spacing()).round() as usize;
        assert!(
            (lap.values()[i_center] - 1.0).abs() < 1e-3,
            "center value {}",
            lap.values()[i_center]
        );
        // pointwise in the bulk (periodization tail limits accuracy)
        for idx in 0..g.len() {
            let y = g.point(idx)[0] - c;
            if y.abs() < 20.0 {
                let expect = (1.0 - y * y) / (1.0 + y * y).powi(2);
                assert!(
                    (lap.values()[idx] - expect).abs() < 2e-3,
                    "x={y}: {} vs {expect}",
                    lap.values()[idx]
                );
            }
        }
    }

    #[test]
    fn frac_laplacian_result_is_real() {
        let g = TorusGrid::new(1, 2, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_field(&g, &mut rng);
        let spec: Vec<Complex64> = u
            .spectrum()
            .iter()
            .zip(g.xi_norms())
            .map(|(c, &xi)| c * xi.powf(1.3))
            .collect();
        let complex = g.inverse_complex(&spec);
        let scale = complex
            .iter()
            .fold(0.0f64, |m, c| m.max(c.re.abs()))
            .max(1.0);
        for c in &complex {
            assert!(c.im.abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn multipliers_compose() {
        let g = TorusGrid::new(1, 2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_field(&g, &mut rng);
        let alpha = FracOrder::new(1.4).unwrap();
        let half = FracOrder::new(0.7).unwrap();
        let twice = frac_laplacian(&frac_laplacian(&u, half), half);
        let once = frac_laplacian(&u, alpha);
        let scale = once.max_abs().max(1.0);
        for (a, b) in twice.values().iter().zip(once.values()) {
            assert!((a - b).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn self_adjoint_on_random_fields() {
        let g = TorusGrid::new(1, 3, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = random_field(&g, &mut rng);
            let v = random_field(&g, &mut rng);
            let alpha = FracOrder::new(rng.gen_range(0.3..2.0)).unwrap();
            let lhs = l2_inner(&frac_laplacian(&u, alpha), &v);
            let rhs = l2_inner(&u, &frac_laplacian(&v, alpha));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn symbol_monotone_in_alpha_above_unit_frequency() {
        // single mode k: eigenvalue (2π|k|/L)^α increasing in α when 2π|k|/L > 1
        let g = TorusGrid::new(1, 4, 16).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * PI * 3.0 * x[0] / 4.0).cos()); // k=3, ξ=3π/2>1
        let mut prev = 0.0;
        for (i, a) in [0.4, 0.8, 1.2, 1.6, 2.0].iter().enumerate() {
            let alpha = FracOrder::new(*a).unwrap();
            let lam = frac_laplacian(&u, alpha).values()[0] / u.values()[0];
            if i > 0 {
                assert!(lam > prev, "eigenvalue not increasing at α={a}");
            }
            prev = lam;
        }
    }

    #[test]
    fn seminorm_of_constant_vanishes() {
        let g = TorusGrid::new(1, 2, 16).unwrap();
        let u = Field::from_fn(g, |_| 3.25);
        assert!(seminorm_sq(&u, FracOrder::new(1.2).unwrap()).abs() < 1e-20);
    }

    #[test]
    fn seminorm_single_mode_parseval() {
        // u = cos(2πx) on L=1, α=1: seminorm² = 2π · |u|₂² = 2π/2 = π
        let g = TorusGrid::new(1, 1, 64).unwrap();
        let u = Field::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let s = seminorm_sq(&u, FracOrder::new(1.0).unwrap());
        assert!((s - PI).abs() < 1e-12, "{s} vs π");
    }

    #[test]
    fn seminorm_alpha_two_is_gradient_l2() {
        // band-limited field: the identity needs an empty Nyquist mode,
        // which `derivative` zeroes by convention
        let g = TorusGrid::new(1, 2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coef: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = Field::from_fn(g, |x| {
            coef.chunks(2)
                .enumerate()
                .map(|(k, c)| {
                    let w = PI * (k + 1) as f64 * x[0];
                    c[0] * w.cos() + c[1] * w.sin()
                })
                .sum()
        });
        let s = seminorm_sq(&u, FracOrder::new(2.0).unwrap());
        let grad = derivative(&u, 0);
        assert!((s - l2_sq(&grad)).abs() < 1e-9 * s.max(1.0));
    }

    #[test]
    fn norm_e_equals_norm_h_for_unit_potential() {
        let g = TorusGrid::new(1, 2, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random_field(&g, &mut rng);
        let alpha = FracOrder::new(1.5).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((norm_e_sq(&u, alpha, &ones) - norm_h_sq(&u, alpha)).abs() < 1e-12);
        let zero = Field::zeros(g);
        assert_eq!(norm_e(&zero, alpha, &ones), 0.0);
    }

    #[test]
    fn translation_is_exact_permutation() {
        let g = TorusGrid::new(1, 4, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_field(&g, &mut rng);
        let t = translate(&u, &[1]);
        let m = g.points_per_cell();
        for j in 0..g.len() {
            assert_eq!(t.values()[j], u.values()[(j + g.len() - m) % g.len()]);
        }
        // k = 0 is the identity
        let id = translate(&u, &[0]);
        assert_eq!(id.values(), u.values());
        // isometry for |u|₂ is bit-exact up to summation order
        assert!((l2_sq(&t) - l2_sq(&u)).abs() < 1e-14);
    }

    #[test]
    fn translation_adjoint_identity() {
        // ⟨τ_k u, v⟩ = ⟨u, τ_{−k} v⟩ for Z^d-periodic weight
        let g = TorusGrid::new(1, 5, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random_field(&g, &mut rng);
        let v = random_field(&g, &mut rng);
        let alpha = FracOrder::new(1.0).unwrap();
        let ones = vec![1.0; g.len()];
        let lhs = inner_e(&translate(&u, &[2]), &v, alpha, &ones);
        let rhs = inner_e(&u, &translate(&v, &[-2]), alpha, &ones);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn spectral_refine_resamples_the_interpolant() {
        let g = TorusGrid::new(1, 3, 16).unwrap();
        let f = |x: f64| (2.0 * PI * x / 3.0).sin() + 0.4 * (4.0 * PI * x).cos();
        let u = Field::from_fn(g, |x| f(x[0]));
        let fine = spectral_refine(&u, 4);
        assert_eq!(fine.grid().points_per_cell(), 64);
        for idx in 0..fine.len() {
            let x = fine.grid().point(idx)[0];
            assert!((fine.values()[idx] - f(x)).abs() < 1e-10);
        }
        // norms are preserved under refinement
        assert!((l2_sq(&fine) - l2_sq(&u)).abs() < 1e-10);
        let a = FracOrder::new(1.3).unwrap();
        assert!((seminorm_sq(&fine, a) - seminorm_sq(&u, a)).abs() < 1e-10);
    }

    #[test]
    fn spectral_refine_2d_preserves_values() {
        let g = TorusGrid::new(2, 2, 8).unwrap();
        let u = Field::from_fn(g.clone(), |x| (PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
        let fine = spectral_refine(&u, 2);
        let n = g.points_per_axis();
        let nf = fine.grid().points_per_axis();
        for i0 in 0..n {
            for i1 in 0..n {
                let coarse = u.values()[i0 * n + i1];
                let fineval = fine.values()[(2 * i0) * nf + 2 * i1];
                assert!((coarse - fineval).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn translation_2d_isometry() {
        let g = TorusGrid::new(2, 3, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let u = random_field(&g, &mut rng);
        let alpha = FracOrder::new(1.3).unwrap();
        let t = translate(&u, &[1, -2]);
        assert!((l2_sq(&t) - l2_sq(&u)).abs() < 1e-13);
        let d = (seminorm_sq(&t, alpha) - seminorm_sq(&u, alpha)).abs();
        assert!(d < 1e-12 * seminorm_sq(&u, alpha).max(1.0));
    }
}
