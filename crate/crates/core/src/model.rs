//! Concrete potential, weight, and nonlinearity families for
//!
//! ```text
//! (−Δ)^{α/2} u + V(x) u = f(x,u) − Γ(x)|u|^{q−2} u
//! ```
//!
//! together with numeric certifiers for the structural hypotheses: growth
//! and smallness of f, divergence of F/|u|^q, fiber monotonicity, sign and
//! periodicity of Γ, and positivity/coercivity of V.
//!
//! Periodic data (V_per, Γ, b) is sampled on one unit cell and tiled, so
//! ℤ^d-periodicity holds bit-exactly on lattice points.

use crate::grid::{FracOrder, Point, TorusGrid};
use std::sync::Arc;
use thiserror::Error;

/// Closed-form scalar field on the torus.
pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Cap applied to |u| before evaluating f and F; an overflow guard for
/// line-search excursions.
pub const AMPLITUDE_CAP: f64 = 1e8;

/// Far-zone threshold: points at torus distance ≥ 0.9·(L/2) from the center.
pub const FAR_ZONE_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("potential must be positive on the grid: V({x:?}) = {value:e}")]
    NonPositivePotential { x: Point, value: f64 },
    #[error("gamma weight must be nonnegative: Γ({x:?}) = {value:e}")]
    NegativeGamma { x: Point, value: f64 },
    #[error("localized potential must vanish in the far zone: |V_loc({x:?})| = {value:e}")]
    LocalizedNotVanishing { x: Point, value: f64 },
    #[error("localized potential must be identically zero or negative everywhere: V_loc({x:?}) = {value:e}")]
    LocalizedSignViolation { x: Point, value: f64 },
    #[error("weight b must be positive on the grid: b({x:?}) = {value:e}")]
    NonPositiveWeight { x: Point, value: f64 },
    #[error("exponents must satisfy 2 < q < p, got q = {q}, p = {p}")]
    ExponentOrder { q: f64, p: f64 },
    #[error("subcriticality requires p < 2d/(d−α) = {critical}, got p = {p}")]
    Supercritical { p: f64, critical: f64 },
    #[error("problem parts live on different grids")]
    GridMismatch,
    #[error("exponent q must exceed 2, got {0}")]
    BadQ(f64),
    #[error(transparent)]
    Order(#[from] crate::grid::ModelOrderError),
}

/// A sample point witnessing a certificate verdict.
#[derive(Debug, Clone)]
pub struct Witness {
    pub x: Point,
    pub u: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertStatus {
    Pass,
    Fail,
    Skip,
}

/// One named certification item. Non-gating items are recorded for audit
/// but do not affect the overall verdict.
#[derive(Debug, Clone)]
pub struct CertItem {
    pub name: String,
    pub status: CertStatus,
    pub gating: bool,
    pub detail: String,
    pub witness: Option<Witness>,
}

impl CertItem {
    pub fn pass(name: &str, detail: String) -> Self {
        CertItem {
            name: name.to_string(),
            status: CertStatus::Pass,
            gating: true,
            detail,
            witness: None,
        }
    }

    pub fn fail(name: &str, detail: String, witness: Witness) -> Self {
        CertItem {
            name: name.to_string(),
            status: CertStatus::Fail,
            gating: true,
            detail,
            witness: Some(witness),
        }
    }

    pub fn skip(name: &str, detail: String) -> Self {
        CertItem {
            name: name.to_string(),
            status: CertStatus::Skip,
            gating: false,
            detail,
            witness: None,
        }
    }

    pub fn non_gating(mut self) -> Self {
        self.gating = false;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Certificate {
    pub items: Vec<CertItem>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.items
            .iter()
            .filter(|i| i.gating)
            .all(|i| i.status == CertStatus::Pass)
    }

    pub fn push(&mut self, item: CertItem) {
        self.items.push(item);
    }

    pub fn find(&self, name: &str) -> Option<&CertItem> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn merge(&mut self, other: Certificate) {
        self.items.extend(other.items);
    }
}

/// Sample a ℤ^d-periodic callable on one unit cell and tile it over the
/// grid, so integer-cell translates are bit-identical.
fn tile_periodic(grid: &TorusGrid, f: &ScalarFn) -> Vec<f64> {
    let m = grid.points_per_cell();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    match grid.dim() {
        1 => {
            let cell: Vec<f64> = (0..m).map(|j| f([j as f64 * h, 0.0])).collect();
            (0..n).map(|j| cell[j % m]).collect()
        }
        _ => {
            let cell: Vec<f64> = (0..m * m)
                .map(|idx| f([(idx / m) as f64 * h, (idx % m) as f64 * h]))
                .collect();
            let mut out = Vec::with_capacity(n * n);
            for i0 in 0..n {
                for i1 in 0..n {
                    out.push(cell[(i0 % m) * m + (i1 % m)]);
                }
            }
            out
        }
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &v) in values.iter().enumerate() {
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// Indices of the far zone (torus distance ≥ `FAR_ZONE_FRACTION`·L/2 from
/// the center), where localized data must be negligible.
pub fn far_zone_indices(grid: &TorusGrid) -> Vec<usize> {
    let c = grid.center();
    let r = FAR_ZONE_FRACTION * grid.side_length() as f64 / 2.0;
    (0..grid.len())
        .filter(|&i| grid.torus_distance(grid.point(i), c) >= r)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Periodic,
    PeriodicPlusLocalized,
    Coercive,
}

/// Potential V sampled on a grid, with certified grid infimum/supremum.
#[derive(Clone)]
pub struct Potential {
    kind: PotentialKind,
    grid: TorusGrid,
    samples: Vec<f64>,
    periodic_samples: Vec<f64>,
    v0: f64,
    v_inf: f64,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential")
            .field("kind", &self.kind)
            .field("v0", &self.v0)
            .field("v_inf", &self.v_inf)
            .finish()
    }
}

impl Potential {
    /// ℤ^d-periodic potential; requires V > 0 on the grid.
    pub fn periodic(grid: TorusGrid, v_per: ScalarFn) -> Result<Self, ModelError> {
        let samples = tile_periodic(&grid, &v_per);
        Self::finish(PotentialKind::Periodic, grid, samples.clone(), samples)
    }

    pub fn constant(grid: TorusGrid, value: f64) -> Result<Self, ModelError> {
        Self::periodic(grid, Arc::new(move |_| value))
    }

    /// V = V_per + V_loc with V_loc vanishing in the far zone and either
    /// identically zero or negative everywhere (the energy-comparison
    /// dichotomy).
    pub fn periodic_plus_localized(
        grid: TorusGrid,
        v_per: ScalarFn,
        v_loc: ScalarFn,
    ) -> Result<Self, ModelError> {
        let periodic_samples = tile_periodic(&grid, &v_per);
        let loc: Vec<f64> = (0..grid.len()).map(|i| v_loc(grid.point(i))).collect();

        let all_zero = loc.iter().all(|&v| v == 0.0);
        if !all_zero {
            if let Some(i) = loc.iter().position(|&v| v >= 0.0) {
                return Err(ModelError::LocalizedSignViolation {
                    x: grid.point(i),
                    value: loc[i],
                });
            }
        }
        for &i in &far_zone_indices(&grid) {
            if loc[i].abs() >= 1e-8 {
                return Err(ModelError::LocalizedNotVanishing {
                    x: grid.point(i),
                    value: loc[i],
                });
            }
        }

        let samples: Vec<f64> = periodic_samples
            .iter()
            .zip(&loc)
            .map(|(a, b)| a + b)
            .collect();
        Self::finish(
            PotentialKind::PeriodicPlusLocalized,
            grid,
            samples,
            periodic_samples,
        )
    }

    /// Coercive potential (V → ∞ toward the far zone), centered at the torus
    /// midpoint so the periodic wrap happens where u is negligible.
    pub fn coercive(grid: TorusGrid, v: ScalarFn) -> Result<Self, ModelError> {
        let samples: Vec<f64> = (0..grid.len()).map(|i| v(grid.point(i))).collect();
        Self::finish(PotentialKind::Coercive, grid, samples.clone(), samples)
    }

    fn finish(
        kind: PotentialKind,
        grid: TorusGrid,
        samples: Vec<f64>,
        periodic_samples: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let (imin, v0) = argmin(&samples);
        if v0 <= 0.0 {
            return Err(ModelError::NonPositivePotential {
                x: grid.point(imin),
                value: v0,
            });
        }
        let v_inf = samples.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        Ok(Potential {
            kind,
            grid,
            samples,
            periodic_samples,
            v0,
            v_inf,
        })
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Certified grid infimum V_0 > 0.
    pub fn v0(&self) -> f64 {
        self.v0
    }

    /// Certified grid supremum; `None` for the coercive kind, whose
    /// continuum supremum is infinite.
    pub fn v_inf(&self) -> Option<f64> {
        match self.kind {
            PotentialKind::Coercive => None,
            _ => Some(self.v_inf),
        }
    }

    /// Grid maximum regardless of kind (used for tail estimates).
    pub fn grid_max(&self) -> f64 {
        self.v_inf
    }

    /// Whether V_loc ≡ 0 on the grid.
    pub fn is_fully_periodic(&self) -> bool {
        match self.kind {
            PotentialKind::Periodic => true,
            PotentialKind::Coercive => false,
            PotentialKind::PeriodicPlusLocalized => self
                .samples
                .iter()
                .zip(&self.periodic_samples)
                .all(|(a, b)| a == b),
        }
    }

    /// The periodic comparison potential with V_loc stripped.
    pub fn strip_localized(&self) -> Result<Potential, ModelError> {
        Self::finish(
            PotentialKind::Periodic,
            self.grid.clone(),
            self.periodic_samples.clone(),
            self.periodic_samples.clone(),
        )
    }

    /// Grid-sampled certificate: positivity (all kinds), far-zone smallness
    /// of V_loc, monotone growth along rays and far-zone dominance for the
    /// coercive kind.
    pub fn certify(&self) -> Certificate {
        let mut cert = Certificate::default();
        let (imin, v0) = argmin(&self.samples);
        if v0 > 0.0 {
            cert.push(CertItem::pass(
                "potential.positive",
                format!("V_0 = {v0:.6e} at grid minimum"),
            ));
        } else {
            cert.push(CertItem::fail(
                "potential.positive",
                "grid infimum is not positive".into(),
                Witness {
                    x: self.grid.point(imin),
                    u: 0.0,
                    value: v0,
                },
            ));
        }

        match self.kind {
            PotentialKind::Periodic => {
                cert.push(CertItem::pass(
                    "potential.periodic",
                    format!("|V|_∞ = {:.6e}", self.v_inf),
                ));
            }
            PotentialKind::PeriodicPlusLocalized => {
                let far = far_zone_indices(&self.grid);
                let (worst_i, worst) = far
                    .iter()
                    .map(|&i| (i, (self.samples[i] - self.periodic_samples[i]).abs()))
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .unwrap_or((0, 0.0));
                if worst < 1e-8 {
                    cert.push(CertItem::pass(
                        "potential.localized_vanishes",
                        format!("max |V_loc| on far zone = {worst:.3e}"),
                    ));
                } else {
                    cert.push(CertItem::fail(
                        "potential.localized_vanishes",
                        "V_loc does not vanish in the far zone".into(),
                        Witness {
                            x: self.grid.point(worst_i),
                            u: 0.0,
                            value: self.samples[worst_i] - self.periodic_samples[worst_i],
                        },
                    ));
                }
            }
            PotentialKind::Coercive => {
                cert.merge(self.certify_coercive());
            }
        }
        cert
    }

    fn certify_coercive(&self) -> Certificate {
        let mut cert = Certificate::default();
        let grid = &self.grid;
        let n = grid.points_per_axis();
        let c_idx = n / 2;

        // monotone growth along the coordinate rays from the center
        let mut ray_ok = true;
        let mut witness = None;
        let rays: Vec<Vec<usize>> = match grid.dim() {
            1 => vec![(c_idx..n).collect(), (0..=c_idx).rev().collect()],
            _ => vec![
                (c_idx..n).map(|i| i * n + c_idx).collect(),
                (0..=c_idx).rev().map(|i| i * n + c_idx).collect(),
                (c_idx..n).map(|j| c_idx * n + j).collect(),
                (0..=c_idx).rev().map(|j| c_idx * n + j).collect(),
            ],
        };
        'outer: for ray in &rays {
            for w in ray.windows(2) {
                if self.samples[w[1]] < self.samples[w[0]] - 1e-12 {
                    ray_ok = false;
                    witness = Some(Witness {
                        x: grid.point(w[1]),
                        u: 0.0,
                        value: self.samples[w[1]] - self.samples[w[0]],
                    });
                    break 'outer;
                }
            }
        }
        cert.push(if ray_ok {
            CertItem::pass(
                "potential.coercive_rays",
                "V non-decreasing along rays toward the far zone".into(),
            )
        } else {
            CertItem::fail(
                "potential.coercive_rays",
                "V decreases along a ray toward the far zone".into(),
                witness.unwrap(),
            )
        });

        let far = far_zone_indices(grid);
        let (far_argmin, far_min) = far
            .iter()
            .map(|&i| (i, self.samples[i]))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if far_min > 10.0 * self.v0 {
            cert.push(CertItem::pass(
                "potential.coercive_far_zone",
                format!("min far-zone V = {far_min:.4e} > 10·V_0"),
            ));
        } else {
            cert.push(CertItem::fail(
                "potential.coercive_far_zone",
                format!(
                    "far-zone minimum {far_min:.4e} ≤ 10·V_0 = {:.4e}",
                    10.0 * self.v0
                ),
                Witness {
                    x: self.grid.point(far_argmin),
                    u: 0.0,
                    value: far_min,
                },
            ));
        }
        cert
    }
}

/// Nonnegative, ℤ^d-periodic weight Γ with the lower exponent q.
#[derive(Clone)]
pub struct GammaWeight {
    grid: TorusGrid,
    samples: Vec<f64>,
    q: f64,
    gamma_fn: ScalarFn,
}

impl std::fmt::Debug for GammaWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GammaWeight")
            .field("q", &self.q)
            .field("gamma_inf", &self.gamma_inf())
            .finish()
    }
}

impl GammaWeight {
    pub fn new(grid: TorusGrid, gamma: ScalarFn, q: f64) -> Result<Self, ModelError> {
        if !(q > 2.0) {
            return Err(ModelError::BadQ(q));
        }
        let samples = tile_periodic(&grid, &gamma);
        if let Some(i) = samples.iter().position(|&v| v < 0.0) {
            return Err(ModelError::NegativeGamma {
                x: grid.point(i),
                value: samples[i],
            });
        }
        Ok(GammaWeight {
            grid,
            samples,
            q,
            gamma_fn: gamma,
        })
    }

    pub fn zero(grid: TorusGrid, q: f64) -> Result<Self, ModelError> {
        Self::new(grid, Arc::new(|_| 0.0), q)
    }

    pub fn constant(grid: TorusGrid, value: f64, q: f64) -> Result<Self, ModelError> {
        Self::new(grid, Arc::new(move |_| value), q)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma_inf(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    pub fn at(&self, x: Point) -> f64 {
        (self.gamma_fn)(x)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|&v| v == 0.0)
    }
}

#[derive(Clone)]
enum Family {
    /// f(x,u) = b(x)|u|^{p−2}u with b > 0 periodic; F = b|u|^p/p.
    Power { b_samples: Vec<f64>, b_fn: ScalarFn },
    /// User-supplied callables (certification targets; the solver falls
    /// back to pointwise fiber evaluation for these).
    Custom {
        f: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        big_f: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        df: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        odd: bool,
    },
}

/// Nonlinearity family with growth exponent p.
#[derive(Clone)]
pub struct Nonlinearity {
    family: Family,
    p: f64,
    grid: TorusGrid,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.family {
            Family::Power { .. } => "power",
            Family::Custom { .. } => "custom",
        };
        f.debug_struct("Nonlinearity")
            .field("family", &tag)
            .field("p", &self.p)
            .finish()
    }
}

fn cap(u: f64) -> f64 {
    u.clamp(-AMPLITUDE_CAP, AMPLITUDE_CAP)
}

impl Nonlinearity {
    /// Built-in family f(x,u) = b(x)|u|^{p−2}u; requires p > 2 and b > 0.
    pub fn power(grid: TorusGrid, p: f64, b: ScalarFn) -> Result<Self, ModelError> {
        if !(p > 2.0) {
            return Err(ModelError::ExponentOrder { q: f64::NAN, p });
        }
        let b_samples = tile_periodic(&grid, &b);
        if let Some(i) = b_samples.iter().position(|&v| v <= 0.0) {
            return Err(ModelError::NonPositiveWeight {
                x: grid.point(i),
                value: b_samples[i],
            });
        }
        Ok(Nonlinearity {
            family: Family::Power { b_samples, b_fn: b },
            p,
            grid,
        })
    }

    pub fn pure_power(grid: TorusGrid, p: f64) -> Result<Self, ModelError> {
        Self::power(grid, p, Arc::new(|_| 1.0))
    }

    /// User-supplied family; hypothesis compliance is checked by sampling
    /// only ([`certify_f1_f4`]).
    pub fn custom(
        grid: TorusGrid,
        p: f64,
        f: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        big_f: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        df: Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>,
        odd: bool,
    ) -> Self {
        Nonlinearity {
            family: Family::Custom { f, big_f, df, odd },
            p,
            grid,
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn is_odd(&self) -> bool {
        match &self.family {
            Family::Power { .. } => true,
            Family::Custom { odd, .. } => *odd,
        }
    }

    /// Whether the closed power-law fiber reduction applies.
    pub fn is_power(&self) -> bool {
        matches!(self.family, Family::Power { .. })
    }

    /// b(x) samples for the power family.
    pub fn b_samples(&self) -> Option<&[f64]> {
        match &self.family {
            Family::Power { b_samples, .. } => Some(b_samples),
            Family::Custom { .. } => None,
        }
    }

    /// f(x,u) at grid index `idx` (bit-exact periodic b for the power family).
    pub fn f_at(&self, idx: usize, x: Point, u: f64) -> f64 {
        let u = cap(u);
        match &self.family {
            Family::Power { b_samples, .. } => b_samples[idx] * u.abs().powf(self.p - 2.0) * u,
            Family::Custom { f, .. } => f(x, u),
        }
    }

    /// F(x,u) = ∫₀^u f(x,s) ds at grid index `idx`.
    pub fn big_f_at(&self, idx: usize, x: Point, u: f64) -> f64 {
        let u = cap(u);
        match &self.family {
            Family::Power { b_samples, .. } => b_samples[idx] * u.abs().powf(self.p) / self.p,
            Family::Custom { big_f, .. } => big_f(x, u),
        }
    }

    /// Pointwise f at an arbitrary point (certification path).
    pub fn f_point(&self, x: Point, u: f64) -> f64 {
        let u = cap(u);
        match &self.family {
            Family::Power { b_fn, .. } => b_fn(x) * u.abs().powf(self.p - 2.0) * u,
            Family::Custom { f, .. } => f(x, u),
        }
    }

    pub fn big_f_point(&self, x: Point, u: f64) -> f64 {
        let u = cap(u);
        match &self.family {
            Family::Power { b_fn, .. } => b_fn(x) * u.abs().powf(self.p) / self.p,
            Family::Custom { big_f, .. } => big_f(x, u),
        }
    }

    /// ∂f/∂u (diagnostics only).
    pub fn df_du_point(&self, x: Point, u: f64) -> f64 {
        let u = cap(u);
        match &self.family {
            Family::Power { b_fn, .. } => b_fn(x) * (self.p - 1.0) * u.abs().powf(self.p - 2.0),
            Family::Custom { df, .. } => df(x, u),
        }
    }
}

/// Sampling plan for the hypothesis certifiers: a handful of spatial points
/// and log-spaced amplitudes on both signs.
#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub x_points: Vec<Point>,
    pub u_min: f64,
    pub u_max: f64,
    pub samples_per_decade: usize,
}

impl SampleSpec {
    pub fn default_for(grid: &TorusGrid) -> Self {
        let stride = (grid.len() / 7).max(1);
        let x_points = (0..grid.len())
            .step_by(stride)
            .map(|i| grid.point(i))
            .collect();
        SampleSpec {
            x_points,
            u_min: 1e-6,
            u_max: 1e6,
            samples_per_decade: 3,
        }
    }

    /// Log-spaced positive amplitudes from u_min to u_max.
    pub fn amplitudes(&self) -> Vec<f64> {
        let decades = (self.u_max / self.u_min).log10();
        let count = (decades * self.samples_per_decade as f64).ceil() as usize + 1;
        (0..count)
            .map(|i| self.u_min * 10f64.powf(decades * i as f64 / (count - 1) as f64))
            .collect()
    }
}

/// Certify (F1)–(F4) by sampling.
///
/// (F4) in terms of f/|u|^q (the printed form) is recorded as a non-gating
/// item; the gating check is monotonicity of f/|u|^{q−1}, the form the
/// fiber-uniqueness argument manipulates.
pub fn certify_f1_f4(nl: &Nonlinearity, q: f64, spec: &SampleSpec) -> Certificate {
    let mut cert = Certificate::default();
    let p = nl.p();
    let amps = spec.amplitudes();

    // (F1): |f| ≤ c(1 + |u|^{p−1}); the growth-rate trend must saturate.
    {
        let mut sup_ratio = 0.0f64;
        let mut sup_u = 0.0f64;
        let mut trend_fail: Option<Witness> = None;
        for &x in &spec.x_points {
            let ratio = |u: f64| nl.f_point(x, u).abs() / (1.0 + u.abs().powf(p - 1.0));
            for &a in &amps {
                for &u in &[a, -a] {
                    let r = ratio(u);
                    if !r.is_finite() {
                        trend_fail = Some(Witness { x, u, value: r });
                    }
                    if r > sup_ratio {
                        sup_ratio = r;
                        sup_u = u;
                    }
                }
            }
            // the top decade must not outgrow three decades below it
            let r_hi = ratio(spec.u_max);
            let r_mid = ratio(spec.u_max * 1e-3);
            if r_hi > 10.0 * r_mid.max(1e-300) {
                trend_fail = Some(Witness {
                    x,
                    u: spec.u_max,
                    value: r_hi,
                });
            }
        }
        cert.push(match trend_fail {
            None => CertItem::pass(
                "F1.growth",
                format!("sup |f|/(1+|u|^(p-1)) = {sup_ratio:.4e} at u = {sup_u:.3e}"),
            ),
            Some(w) => CertItem::fail("F1.growth", "growth of |f| exceeds |u|^(p-1)".into(), w),
        });
    }

    // (F2): f(x,u) = o(|u|) as u → 0: the ratio must decay along decades.
    {
        let small: Vec<f64> = amps.iter().copied().filter(|&a| a <= 0.1).collect();
        let mut failure: Option<Witness> = None;
        for &x in &spec.x_points {
            for sign in [1.0, -1.0] {
                let ratios: Vec<f64> = small
                    .iter()
                    .map(|&a| {
                        let u = sign * a;
                        nl.f_point(x, u).abs() / u.abs()
                    })
                    .collect();
                // non-increasing toward u → 0 (small[] is increasing in |u|)
                for w in ratios.windows(2) {
                    if w[0] > w[1] + 1e-12 {
                        failure = Some(Witness {
                            x,
                            u: sign * small[0],
                            value: w[0],
                        });
                    }
                }
                let first = ratios.first().copied().unwrap_or(0.0);
                let last = ratios.last().copied().unwrap_or(0.0);
                if !(first < 0.95 * last || (last == 0.0 && first == 0.0)) {
                    failure = Some(Witness {
                        x,
                        u: sign * small[0],
                        value: first,
                    });
                }
            }
        }
        cert.push(match failure {
            None => CertItem::pass("F2.smallness", "|f|/|u| decays toward u = 0".into()),
            Some(w) => CertItem::fail("F2.smallness", "|f|/|u| does not vanish as u → 0".into(), w),
        });
    }

    // (F3): F(x,u)/|u|^q → ∞: increasing along decades with clear growth.
    {
        let large: Vec<f64> = amps.iter().copied().filter(|&a| a >= 1.0).collect();
        let mut failure: Option<Witness> = None;
        for &x in &spec.x_points {
            for sign in [1.0, -1.0] {
                let vals: Vec<f64> = large
                    .iter()
                    .map(|&a| {
                        let u = sign * a;
                        nl.big_f_point(x, u) / u.abs().powf(q)
                    })
                    .collect();
                for (i, w) in vals.windows(2).enumerate() {
                    if w[1] <= w[0] * (1.0 + 1e-13) {
                        failure = Some(Witness {
                            x,
                            u: sign * large[i + 1],
                            value: w[1],
                        });
                    }
                }
                let first = vals.first().copied().unwrap_or(0.0);
                let last = vals.last().copied().unwrap_or(0.0);
                if !(last > 2.0 * first) {
                    failure = Some(Witness {
                        x,
                        u: sign * spec.u_max,
                        value: last,
                    });
                }
            }
        }
        cert.push(match failure {
            None => CertItem::pass(
                "F3.superlinear",
                "F/|u|^q increasing with divergent trend".into(),
            ),
            Some(w) => CertItem::fail(
                "F3.superlinear",
                "F/|u|^q fails the divergence trend".into(),
                w,
            ),
        });
    }

    // (F4): u ↦ f(x,u)/|u|^{q−1} strictly increasing on each half-line.
    {
        let gating = f4_monotone(nl, q - 1.0, &amps, &spec.x_points);
        cert.push(match gating {
            None => CertItem::pass(
                "F4.fiber_monotone",
                "f/|u|^(q-1) strictly increasing on both half-lines".into(),
            ),
            Some(w) => CertItem::fail(
                "F4.fiber_monotone",
                "f/|u|^(q-1) not strictly increasing".into(),
                w,
            ),
        });
        // literal printed form, recorded but non-gating
        let literal = f4_monotone(nl, q, &amps, &spec.x_points);
        cert.push(
            match literal {
                None => CertItem::pass(
                    "F4.literal_printed_form",
                    "f/|u|^q strictly increasing (printed form)".into(),
                ),
                Some(w) => CertItem::fail(
                    "F4.literal_printed_form",
                    "f/|u|^q not strictly increasing (printed form)".into(),
                    w,
                ),
            }
            .non_gating(),
        );
    }

    cert
}

/// Returns a witness against strict monotonicity of u ↦ f(x,u)/|u|^exponent
/// on both half-lines, or None if it holds on the samples.
fn f4_monotone(
    nl: &Nonlinearity,
    exponent: f64,
    amps: &[f64],
    x_points: &[Point],
) -> Option<Witness> {
    for &x in x_points {
        // positive half-line, increasing u
        let pos: Vec<f64> = amps
            .iter()
            .map(|&a| nl.f_point(x, a) / a.powf(exponent))
            .collect();
        for (i, w) in pos.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Some(Witness {
                    x,
                    u: amps[i + 1],
                    value: w[1],
                });
            }
        }
        // negative half-line, increasing u means decreasing |u|
        let neg: Vec<f64> = amps
            .iter()
            .rev()
            .map(|&a| nl.f_point(x, -a) / a.powf(exponent))
            .collect();
        for (i, w) in neg.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Some(Witness {
                    x,
                    u: -amps[amps.len() - 2 - i],
                    value: w[1],
                });
            }
        }
    }
    None
}

/// Certify the pointwise bound f(x,u)u ≥ qF(x,u) behind the coercivity
/// identity on the manifold.
pub fn pointwise_qf_bound(nl: &Nonlinearity, q: f64, spec: &SampleSpec) -> Certificate {
    let mut cert = Certificate::default();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for &x in &spec.x_points {
        for &a in &spec.amplitudes() {
            for &u in &[a, -a, 0.0] {
                let gap = nl.f_point(x, u) * u - q * nl.big_f_point(x, u);
                let scale = (nl.big_f_point(x, u).abs() * q).max(1.0);
                let rel = gap / scale;
                if rel < worst {
                    worst = rel;
                    witness = Some(Witness { x, u, value: gap });
                }
            }
        }
    }
    if worst >= -1e-12 {
        cert.push(CertItem::pass(
            "qF.pointwise_bound",
            format!("min (f·u − qF)/scale = {worst:.3e} ≥ −1e−12"),
        ));
    } else {
        cert.push(CertItem::fail(
            "qF.pointwise_bound",
            "f(x,u)u − qF(x,u) dips below tolerance".into(),
            witness.unwrap(),
        ));
    }
    cert
}

/// The assembled problem: grid, order, potential, weight, nonlinearity.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: TorusGrid,
    alpha: FracOrder,
    potential: Potential,
    gamma: GammaWeight,
    nonlinearity: Nonlinearity,
}

impl Problem {
    pub fn new(
        grid: TorusGrid,
        alpha: FracOrder,
        potential: Potential,
        gamma: GammaWeight,
        nonlinearity: Nonlinearity,
    ) -> Result<Self, ModelError> {
        if potential.grid() != &grid || gamma.grid() != &grid || nonlinearity.grid() != &grid {
            return Err(ModelError::GridMismatch);
        }
        let q = gamma.q();
        let p = nonlinearity.p();
        if !(2.0 < q && q < p) {
            return Err(ModelError::ExponentOrder { q, p });
        }
        let d = grid.dim() as f64;
        if d > alpha.value() {
            let critical = 2.0 * d / (d - alpha.value());
            if p >= critical {
                return Err(ModelError::Supercritical { p, critical });
            }
        }
        Ok(Problem {
            grid,
            alpha,
            potential,
            gamma,
            nonlinearity,
        })
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn alpha(&self) -> FracOrder {
        self.alpha
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn gamma(&self) -> &GammaWeight {
        &self.gamma
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn q(&self) -> f64 {
        self.gamma.q()
    }

    pub fn p(&self) -> f64 {
        self.nonlinearity.p()
    }

    pub fn v_samples(&self) -> &[f64] {
        self.potential.samples()
    }

    pub fn gamma_samples(&self) -> &[f64] {
        self.gamma.samples()
    }

    /// Whether all data (V, Γ, b) is ℤ^d-periodic, so the translation
    /// lemmas apply exactly.
    pub fn is_fully_periodic(&self) -> bool {
        self.potential.is_fully_periodic()
    }

    /// The comparison problem with V_loc stripped.
    pub fn periodic_comparison(&self) -> Result<Problem, ModelError> {
        Ok(Problem {
            grid: self.grid.clone(),
            alpha: self.alpha,
            potential: self.potential.strip_localized()?,
            gamma: self.gamma.clone(),
            nonlinearity: self.nonlinearity.clone(),
        })
    }

    /// Full sampled certification bundle: potential, Γ sign, (F1)–(F4),
    /// and the pointwise qF bound.
    pub fn certify(&self) -> Certificate {
        let mut cert = self.potential.certify();
        let gmin = self
            .gamma
            .samples()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v));
        if gmin >= 0.0 {
            cert.push(CertItem::pass(
                "gamma.nonnegative",
                format!("min Γ = {gmin:.4e}, |Γ|_∞ = {:.4e}", self.gamma.gamma_inf()),
            ));
        } else {
            let i = self
                .gamma
                .samples()
                .iter()
                .position(|&v| v == gmin)
                .unwrap_or(0);
            cert.push(CertItem::fail(
                "gamma.nonnegative",
                "Γ takes negative values".into(),
                Witness {
                    x: self.grid.point(i),
                    u: 0.0,
                    value: gmin,
                },
            ));
        }
        let spec = SampleSpec::default_for(&self.grid);
        cert.merge(certify_f1_f4(&self.nonlinearity, self.q(), &spec));
        cert.merge(pointwise_qf_bound(&self.nonlinearity, self.q(), &spec));
        cert
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(1, 8, 16).unwrap()
    }

    fn power_nl(p: f64) -> Nonlinearity {
        Nonlinearity::pure_power(grid(), p).unwrap()
    }

    #[test]
    fn periodic_sampling_is_bit_exact_across_cells() {
        let g = grid();
        let v =
            Potential::periodic(g.clone(), Arc::new(|x| 2.0 + (2.0 * PI * x[0]).sin())).unwrap();
        let m = g.points_per_cell();
        for j in 0..g.len() {
            assert_eq!(v.samples()[j], v.samples()[j % m]);
        }
        assert!(v.v0() > 0.0);
        assert_eq!(v.kind(), PotentialKind::Periodic);
    }

    #[test]
    fn constant_potential_certifies() {
        let v = Potential::constant(grid(), 1.0).unwrap();
        assert_eq!(v.v0(), 1.0);
        assert_eq!(v.v_inf(), Some(1.0));
        assert!(v.certify().passed());
    }

    #[test]
    fn nonpositive_potential_rejected_with_witness() {
        let err = Potential::periodic(grid(), Arc::new(|x| (2.0 * PI * x[0]).sin())).unwrap_err();
        match err {
            ModelError::NonPositivePotential { value, .. } => assert!(value <= 0.0),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn localized_dichotomy_enforced() {
        let g = grid();
        let c = g.center()[0];
        // negative Gaussian: accepted
        let ok = Potential::periodic_plus_localized(
            g.clone(),
            Arc::new(|_| 1.0),
            Arc::new(move |x| -0.3 * (-2.0 * (x[0] - c) * (x[0] - c)).exp()),
        );
        assert!(ok.is_ok());
        assert!(!ok.unwrap().is_fully_periodic());
        // positive bump somewhere: rejected
        let bad = Potential::periodic_plus_localized(
            g.clone(),
            Arc::new(|_| 1.0),
            Arc::new(move |x| 0.3 * (-2.0 * (x[0] - c) * (x[0] - c)).exp()),
        );
        assert!(matches!(
            bad,
            Err(ModelError::LocalizedSignViolation { .. })
        ));
        // wide bump that does not vanish on the far zone: rejected
        let wide = Potential::periodic_plus_localized(
            g,
            Arc::new(|_| 1.0),
            Arc::new(move |x| -0.3 * (-(x[0] - c) * (x[0] - c) / 400.0).exp()),
        );
        assert!(matches!(
            wide,
            Err(ModelError::LocalizedNotVanishing { .. })
        ));
    }

    #[test]
    fn strip_localized_recovers_periodic_part() {
        let g = grid();
        let c = g.center()[0];
        let v = Potential::periodic_plus_localized(
            g,
            Arc::new(|x| 2.0 + (2.0 * PI * x[0]).cos()),
            Arc::new(move |x| -0.1 * (-2.0 * (x[0] - c) * (x[0] - c)).exp()),
        )
        .unwrap();
        let per = v.strip_localized().unwrap();
        assert!(per.is_fully_periodic());
        assert!(per.samples().iter().zip(v.samples()).any(|(a, b)| a != b));
    }

    #[test]
    fn coercive_quadratic_certifies() {
        let g = grid();
        let c = g.center();
        let v =
            Potential::coercive(g, Arc::new(move |x| 1.0 + (x[0] - c[0]) * (x[0] - c[0]))).unwrap();
        let cert = v.certify();
        assert!(cert.passed(), "{:?}", cert.items);
        assert_eq!(v.v_inf(), None);
    }

    #[test]
    fn gamma_rejects_negative_values() {
        let bad = GammaWeight::new(grid(), Arc::new(|x| (2.0 * PI * x[0]).sin()), 3.0);
        assert!(matches!(bad, Err(ModelError::NegativeGamma { .. })));
        let ok = GammaWeight::constant(grid(), 1.0, 3.0).unwrap();
        assert_eq!(ok.gamma_inf(), 1.0);
    }

    #[test]
    fn power_family_passes_f1_f4() {
        let nl = power_nl(4.0);
        let spec = SampleSpec::default_for(nl.grid());
        let cert = certify_f1_f4(&nl, 3.0, &spec);
        assert!(cert.passed(), "{:#?}", cert.items);
        // the printed form f/|u|^q is constant in u for p − q = 1: recorded
        // as a non-gating failure
        let lit = cert.find("F4.literal_printed_form").unwrap();
        assert_eq!(lit.status, CertStatus::Fail);
        assert!(!lit.gating);
    }

    #[test]
    fn linear_growth_fails_f3() {
        // f(x,u) = u declared with growth 2: not superlinear relative to q=3
        let g = grid();
        let nl = Nonlinearity::custom(
            g,
            2.0,
            Arc::new(|_, u| u),
            Arc::new(|_, u| u * u / 2.0),
            Arc::new(|_, _| 1.0),
            true,
        );
        let spec = SampleSpec::default_for(nl.grid());
        let cert = certify_f1_f4(&nl, 3.0, &spec);
        let f3 = cert.find("F3.superlinear").unwrap();
        assert_eq!(f3.status, CertStatus::Fail);
        assert!(f3.witness.is_some());
        // f = u is also not o(|u|)
        assert_eq!(cert.find("F2.smallness").unwrap().status, CertStatus::Fail);
    }

    #[test]
    fn qf_bound_holds_for_power_and_fails_reversed() {
        let nl = power_nl(4.0);
        let spec = SampleSpec::default_for(nl.grid());
        assert!(pointwise_qf_bound(&nl, 3.0, &spec).passed());
        // q above p reverses the inequality
        assert!(!pointwise_qf_bound(&nl, 4.5, &spec).passed());
    }

    #[test]
    fn oddness_and_periodicity_of_power_family() {
        let g = grid();
        let nl = Nonlinearity::power(
            g.clone(),
            4.0,
            Arc::new(|x| 1.5 + 0.5 * (2.0 * PI * x[0]).sin()),
        )
        .unwrap();
        let m = g.points_per_cell();
        for idx in 0..g.len() {
            let x = g.point(idx);
            // odd in u, exactly
            assert_eq!(nl.f_at(idx, x, -1.7), -nl.f_at(idx, x, 1.7));
            // b tiled bit-exactly
            assert_eq!(
                nl.b_samples().unwrap()[idx],
                nl.b_samples().unwrap()[idx % m]
            );
        }
    }

    #[test]
    fn problem_rejects_bad_exponent_order() {
        let g = grid();
        let v = Potential::constant(g.clone(), 1.0).unwrap();
        let gamma = GammaWeight::constant(g.clone(), 1.0, 4.0).unwrap();
        let nl = Nonlinearity::pure_power(g.clone(), 4.0).unwrap();
        let err = Problem::new(g, FracOrder::new(2.0).unwrap(), v, gamma, nl);
        assert!(matches!(err, Err(ModelError::ExponentOrder { .. })));
    }

    #[test]
    fn problem_rejects_supercritical_exponent() {
        // d = 2, α = 1: critical exponent 2d/(d−α) = 4
        let g = TorusGrid::new(2, 2, 8).unwrap();
        let v = Potential::constant(g.clone(), 1.0).unwrap();
        let gamma = GammaWeight::constant(g.clone(), 3.0, 3.0).unwrap();
        let nl = Nonlinearity::pure_power(g.clone(), 4.5).unwrap();
        let err = Problem::new(g, FracOrder::new(1.0).unwrap(), v, gamma, nl);
        assert!(matches!(err, Err(ModelError::Supercritical { .. })));
    }

    #[test]
    fn sign_changing_nonlinear_part_witnessed() {
        // Γ ≡ 1, q = 3, p = 4: F − (1/q)Γ|u|^q = |u|⁴/4 − |u|³/3 is negative
        // for small |u| > 0 and positive for large |u|
        let nl = power_nl(4.0);
        let q = 3.0;
        let x = [0.0, 0.0];
        let small = nl.big_f_point(x, 0.1) - (1.0 / q) * 0.1f64.powi(3);
        let large = nl.big_f_point(x, 10.0) - (1.0 / q) * 10.0f64.powi(3);
        assert!(small < 0.0 && large > 0.0);
    }

    #[test]
    fn full_problem_certificate_passes() {
        let g = grid();
        let v = Potential::constant(g.clone(), 1.0).unwrap();
        let gamma = GammaWeight::constant(g.clone(), 1.0, 3.0).unwrap();
        let nl = Nonlinearity::pure_power(g.clone(), 4.0).unwrap();
        let prob = Problem::new(g, FracOrder::new(1.5).unwrap(), v, gamma, nl).unwrap();
        let cert = prob.certify();
        assert!(cert.passed(), "{:#?}", cert.items);
    }
}
