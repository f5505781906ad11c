//! The radial mixing operator relating the fixed-trace level density to the
//! GUE level density: forward application, Monte Carlo verification, the
//! behavior at the origin, radial concentration bounds, and the semicircle
//! convergence report.
//!
//! The operator is
//!   T[σ_v](x) = 2 Γ^{−1}(N²/2) ∫_{|x|}^∞ e^{−r²} r^{N²−2} σ_v(x/r) dr,
//! which maps a mass-N density on [−1, 1] to a mass-N density on the GUE
//! scale. The kernel concentrates in an O(1) window around r* ≈ N/√2, so a
//! truncated composite quadrature plus an incomplete-gamma tail remainder
//! evaluates it to near machine accuracy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{linspace, DensityGrid};
use crate::gue;
use crate::quad::GaussLegendre;
use crate::sampler::{self, Ensemble};
use crate::specfun::{self, lgamma};

/// The radial factor e^{−r²} r^{N²−2} with its normalization constants.
#[derive(Debug, Clone, Copy)]
pub struct RadialWeight {
    n: u32,
    shape: f64,
    log_norm: f64,
}

impl RadialWeight {
    /// Requires N ≥ 2: at N = 1 the weight e^{−r²}/r is not normalizable.
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(
                "RadialWeight",
                format!("the radial weight needs N >= 2, got {n} (Γ((N²−1)/2) diverges)"),
            ));
        }
        let shape = ((n as f64) * (n as f64) - 1.0) / 2.0;
        // ∫₀^∞ e^{−r²} r^{N²−2} dr = Γ((N²−1)/2)/2
        let log_norm = lgamma(shape) - std::f64::consts::LN_2;
        Ok(RadialWeight { n, shape, log_norm })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Gamma shape s = (N²−1)/2 of r² under the weight.
    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// ln ∫₀^∞ e^{−r²} r^{N²−2} dr.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Mode r* = √((N²−2)/2) of the weight.
    pub fn mode(&self) -> f64 {
        (((self.n as f64) * (self.n as f64) - 2.0) / 2.0).sqrt()
    }
}

/// Normalized mass of the radial weight on [a, b]: Q(s, a²) − Q(s, b²)
/// through the regularized incomplete gamma, no quadrature. `b` may be
/// infinite.
pub fn radial_mass(w: &RadialWeight, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= a) {
        return Err(Error::domain("radial_mass", format!("need 0 <= a <= b, got [{a}, {b}]")));
    }
    let upper_a = specfun::regularized_upper_gamma(w.shape, a * a)?;
    let upper_b = if b.is_infinite() {
        0.0
    } else {
        specfun::regularized_upper_gamma(w.shape, b * b)?
    };
    Ok((upper_a - upper_b).max(0.0))
}

/// Normalized mass OUTSIDE [a, b], evaluated as P(s, a²) + Q(s, b²) so both
/// tails survive even when they are far below 2⁻⁵³ of the total.
pub fn radial_mass_outside(w: &RadialWeight, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0) || !(b >= a) {
        return Err(Error::domain(
            "radial_mass_outside",
            format!("need 0 <= a <= b, got [{a}, {b}]"),
        ));
    }
    let below = specfun::regularized_lower_gamma(w.shape, a * a)?;
    let above = if b.is_infinite() {
        0.0
    } else {
        specfun::regularized_upper_gamma(w.shape, b * b)?
    };
    Ok(below + above)
}

/// Half-width of the radial quadrature window around r*; the weight mass
/// outside is below 1e−12 for every N ≥ 2 (the radial standard deviation
/// is ~1/2, independent of N).
const WINDOW_HALF_WIDTH: f64 = 8.0;
const PANEL_WIDTH: f64 = 0.5;
const PANEL_NODES: usize = 16;

/// T[σ_v](x) at one point, with the kernel exponent shifted by
/// `exponent_shift` (0 for the true operator; −1 gives the deliberately
/// wrong kernel used as a negative control). The prefactor 2/Γ(N²/2) is
/// folded into the quadrature in log space.
fn forward_at(
    n: u32,
    sigma_v: &DensityGrid,
    rule: &GaussLegendre,
    x: f64,
    exponent_shift: f64,
) -> f64 {
    let nsq = (n as f64) * (n as f64);
    let exponent = nsq - 2.0 + exponent_shift;
    let log_pref = std::f64::consts::LN_2 - lgamma(nsq / 2.0);
    let r_star = ((exponent / 2.0).max(0.25)).sqrt();
    let r_lo = x.abs().max((r_star - WINDOW_HALF_WIDTH).max(0.0));
    let r_hi = r_star + WINDOW_HALF_WIDTH;

    let mut total = 0.0;
    if r_lo < r_hi {
        let panels = (((r_hi - r_lo) / PANEL_WIDTH).ceil() as usize).max(4);
        total = rule_composite(rule, r_lo, r_hi, panels, |r| {
            let log_kernel = log_pref - r * r + exponent * r.ln();
            log_kernel.exp() * sigma_v.interpolate(x / r)
        });
    }

    // tail remainder beyond the window: the kernel mass is an incomplete
    // gamma; σ_v is frozen at the entry point of the tail
    let tail_start = r_lo.max(r_hi);
    let shape = (exponent + 1.0) / 2.0;
    if shape > 0.0 {
        if let Ok(q) = specfun::regularized_upper_gamma(shape, tail_start * tail_start) {
            if q > 0.0 {
                let log_tail_mass =
                    log_pref + lgamma(shape) - std::f64::consts::LN_2 + q.ln();
                total += log_tail_mass.exp() * sigma_v.interpolate(x / tail_start);
            }
        }
    }
    total
}

fn rule_composite<F: FnMut(f64) -> f64>(
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        acc += rule.integrate(a + p as f64 * h, a + (p + 1) as f64 * h, &mut f);
    }
    acc
}

fn check_forward_input(n: u32, sigma_v: &DensityGrid) -> Result<()> {
    let pts = sigma_v.points();
    if pts[0] < -1.0 - 1e-9 || pts[pts.len() - 1] > 1.0 + 1e-9 {
        return Err(Error::domain(
            "apply_forward_operator",
            format!(
                "σ_v must live on [−1, 1], got [{}, {}]",
                pts[0],
                pts[pts.len() - 1]
            ),
        ));
    }
    let nf = n as f64;
    if (sigma_v.mass() - nf).abs() > 1e-2 * nf {
        return Err(Error::domain(
            "apply_forward_operator",
            format!("σ_v declares mass {}, expected N = {n} within 1%", sigma_v.mass()),
        ));
    }
    Ok(())
}

/// Applies the forward operator, tabulating the result on the given
/// abscissae. The values are returned raw (no DensityGrid mass check) so
/// negative controls and partial windows stay representable.
pub fn forward_operator_values(
    n: u32,
    sigma_v: &DensityGrid,
    points: &[f64],
    exponent_shift: f64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::domain("apply_forward_operator", "operator needs N >= 2"));
    }
    check_forward_input(n, sigma_v)?;
    let rule = GaussLegendre::new(PANEL_NODES);
    Ok(points
        .par_iter()
        .map(|&x| forward_at(n, sigma_v, &rule, x, exponent_shift))
        .collect())
}

/// The radial mixing operator T[σ_v] on a default GUE-scale grid, checked
/// for mass preservation: the output must carry mass N within 1%.
///
/// The grid covers the whole possible image support ±(r* + window): an
/// input with mass near the sphere equator maps out to |x| ≈ r*, beyond
/// the GUE bulk edge.
pub fn apply_forward_operator(n: u32, sigma_v: &DensityGrid) -> Result<DensityGrid> {
    let half = image_support_halfwidth(n);
    let count = (1601usize).max((2.0 * half / 0.02).ceil() as usize).min(20_001) | 1;
    let points = linspace(-half, half, count);
    apply_forward_operator_on(n, sigma_v, points)
}

/// Half-width of the support of T[σ_v] for any admissible input.
pub fn image_support_halfwidth(n: u32) -> f64 {
    let nsq = (n as f64) * (n as f64);
    ((nsq - 2.0) / 2.0).max(0.25).sqrt() + WINDOW_HALF_WIDTH
}

/// Same, tabulated on caller-chosen abscissae (which must cover the support
/// of the image for the mass check to make sense).
pub fn apply_forward_operator_on(
    n: u32,
    sigma_v: &DensityGrid,
    points: Vec<f64>,
) -> Result<DensityGrid> {
    let values = forward_operator_values(n, sigma_v, &points, 0.0)?;
    let nf = n as f64;
    let mass = crate::grid::trapezoid(&points, &values);
    if (mass - nf).abs() > 1e-2 * nf {
        return Err(Error::inconsistency(
            "apply_forward_operator",
            format!("output mass {mass} drifted more than 1% from N = {n}"),
        ));
    }
    DensityGrid::with_tolerance(points, values, nf, 1.1e-2)
}

/// How σ_v,N(0) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaZeroMode {
    /// σ_GUE,N(0) · Γ(N²/2)/Γ((N²−1)/2): the x = 0 identity of the
    /// integral equation, exact at every N ≥ 2.
    ExactRelation,
    /// √(2N) Γ(N²/2) / (π Γ((N²−1)/2)): the large-N asymptotic form.
    Asymptotic,
}

/// The fixed-trace level density at the origin.
///
/// N = 1 is degenerate — the radial normalizer Γ((N²−1)/2) = Γ(0)
/// diverges — and is reported as a domain error rather than a silent zero.
pub fn sigma_v_zero(n: u32, mode: SigmaZeroMode) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain(
            "sigma_v_zero",
            "N = 1 is degenerate: the radial weight normalizer Γ((N²−1)/2) diverges",
        ));
    }
    let nf = n as f64;
    let log_ratio = lgamma(nf * nf / 2.0) - lgamma((nf * nf - 1.0) / 2.0);
    Ok(match mode {
        SigmaZeroMode::ExactRelation => gue::gue_level_density(n, 0.0) * log_ratio.exp(),
        SigmaZeroMode::Asymptotic => {
            (2.0 * nf).sqrt() / std::f64::consts::PI * log_ratio.exp()
        }
    })
}

/// Verification report for the integral equation at one N.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralEqReport {
    pub n: u32,
    pub samples: u64,
    pub bins: usize,
    pub kernel_exponent_shift: f64,
    pub l1_distance: f64,
    pub l1_relative: f64,
    pub sup_distance: f64,
    pub mc_error_budget: f64,
    pub eigensolver_retries: u64,
    pub pass: bool,
    /// (x, forward image of empirical σ_v, exact σ_GUE)
    #[serde(skip)]
    pub overlay: Vec<(f64, f64, f64)>,
}

/// Builds an empirical σ_v,N, pushes it through the forward operator, and
/// compares against the exact GUE level density. Passes when the L1
/// distance stays within three Monte Carlo error budgets.
pub fn verify_integral_equation(
    n: u32,
    num_samples: u64,
    bins: usize,
    master_seed: u64,
) -> Result<IntegralEqReport> {
    verify_integral_equation_with_kernel(n, num_samples, bins, master_seed, 0.0)
}

/// Same pipeline with a shifted kernel exponent; the shift −1 (exponent
/// N²−3) is the negative control that must fail.
pub fn verify_integral_equation_with_kernel(
    n: u32,
    num_samples: u64,
    bins: usize,
    master_seed: u64,
    kernel_exponent_shift: f64,
) -> Result<IntegralEqReport> {
    let batch = sampler::sample_batch(n, Ensemble::FixedTrace, num_samples, master_seed)?;
    let hist = sampler::estimate_density(&batch.samples, bins, (-1.0, 1.0))?;

    // compare over the full image support so stray tail mass counts against
    // the distance rather than being silently truncated
    let half = image_support_halfwidth(n);
    let spacing = 2.0 * gue::gue_support_halfwidth(n) / bins.max(201) as f64;
    let count = ((2.0 * half / spacing).ceil() as usize).max(bins.max(201)) | 1;
    let points = linspace(-half, half, count);
    let forward = forward_operator_values(n, &hist.grid, &points, kernel_exponent_shift)?;
    let dx = points[1] - points[0];

    let mut l1 = 0.0;
    let mut sup = 0.0f64;
    let mut overlay = Vec::with_capacity(points.len());
    for (i, &x) in points.iter().enumerate() {
        let reference = gue::gue_level_density(n, x);
        let diff = (forward[i] - reference).abs();
        l1 += diff * dx;
        sup = sup.max(diff);
        overlay.push((x, forward[i], reference));
    }

    let budget = hist.error_budget_l1();
    let l1_relative = l1 / n as f64;
    Ok(IntegralEqReport {
        n,
        samples: num_samples,
        bins,
        kernel_exponent_shift,
        l1_distance: l1,
        l1_relative,
        sup_distance: sup,
        mc_error_budget: budget,
        eigensolver_retries: batch.eigensolver_retries,
        pass: l1 <= 3.0 * budget,
        overlay,
    })
}

/// One row of the semicircle convergence report.
#[derive(Debug, Clone, Serialize)]
pub struct SemicircleRow {
    pub n: u32,
    pub samples: u64,
    pub l1_distance: f64,
    pub sup_distance: f64,
    /// Trapezoidal mass of ρ_v,N on [−1.1, 1.1] before renormalization;
    /// the scaling bookkeeping predicts 1 up to edge mass.
    pub mass_before_renorm: f64,
    pub mc_error_budget: f64,
    pub eigensolver_retries: u64,
    /// (x, renormalized ρ_v,N, mass-1 semicircle)
    #[serde(skip)]
    pub overlay: Vec<(f64, f64, f64)>,
}

/// Semicircle convergence across a list of N values.
#[derive(Debug, Clone, Serialize)]
pub struct SemicircleReport {
    pub rows: Vec<SemicircleRow>,
    /// L1 distances nonincreasing in N, up to one Monte Carlo error bar.
    pub monotone: bool,
    pub pass: bool,
}

/// ρ_v,N(x) = (2/N^{3/2}) σ_v,N(2x/√N) tabulated from an empirical σ_v,N
/// histogram, renormalized to mass 1 on [−1.1, 1.1], then compared to the
/// mass-1 semicircle on |x| ≤ 0.9.
pub fn semicircle_convergence_report(
    n_list: &[u32],
    num_samples: u64,
    bins: usize,
    master_seed: u64,
) -> Result<SemicircleReport> {
    if n_list.is_empty() {
        return Err(Error::domain("semicircle_convergence_report", "empty N list"));
    }
    if n_list.iter().any(|&n| n < 2) {
        return Err(Error::domain("semicircle_convergence_report", "every N must be >= 2"));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let batch = sampler::sample_batch(
            n,
            Ensemble::FixedTrace,
            num_samples,
            master_seed.wrapping_add(i as u64),
        )?;
        let hist = sampler::estimate_density(&batch.samples, bins, (-1.0, 1.0))?;
        let mut row = semicircle_row(n, num_samples, &hist)?;
        row.eigensolver_retries = batch.eigensolver_retries;
        rows.push(row);
    }
    let mut monotone = true;
    for w in rows.windows(2) {
        let bar = w[0].mc_error_budget.max(w[1].mc_error_budget);
        if w[1].l1_distance > w[0].l1_distance + bar {
            monotone = false;
        }
    }
    let last = rows.last().expect("nonempty");
    let pass = monotone && last.l1_distance <= 0.05;
    Ok(SemicircleReport { rows, monotone, pass })
}

fn semicircle_row(n: u32, samples: u64, hist: &sampler::HistogramDensity) -> Result<SemicircleRow> {
    let nf = n as f64;
    let amp = 2.0 / nf.powf(1.5);
    let arg_scale = 2.0 / nf.sqrt();
    let points = linspace(-1.1, 1.1, 441);
    let dx = points[1] - points[0];

    let raw: Vec<f64> = points
        .iter()
        .map(|&x| amp * hist.grid.interpolate(arg_scale * x))
        .collect();
    let mass_before = crate::grid::trapezoid(&points, &raw);
    if !(mass_before > 0.0) {
        return Err(Error::inconsistency("semicircle_row", "empty scaled density"));
    }

    // per-point standard error of the renormalized ρ, from the σ_v bins
    let se_pts: Vec<f64> = points
        .iter()
        .map(|&x| {
            let u = arg_scale * x;
            let se = interpolate_se(hist, u);
            amp * se / mass_before
        })
        .collect();

    let mut l1 = 0.0;
    let mut sup = 0.0f64;
    let mut budget = 0.0;
    let mut overlay = Vec::with_capacity(points.len());
    for (i, &x) in points.iter().enumerate() {
        let est = raw[i] / mass_before;
        let reference = gue::semicircle(x, true);
        overlay.push((x, est, reference));
        if x.abs() <= 0.9 {
            let diff = (est - reference).abs();
            l1 += diff * dx;
            sup = sup.max(diff);
            budget += se_pts[i] * dx;
        }
    }
    Ok(SemicircleRow {
        n,
        samples,
        l1_distance: l1,
        sup_distance: sup,
        mass_before_renorm: mass_before,
        mc_error_budget: budget,
        eigensolver_retries: 0,
        overlay,
    })
}

fn interpolate_se(hist: &sampler::HistogramDensity, u: f64) -> f64 {
    let pts = hist.grid.points();
    if u < pts[0] || u > pts[pts.len() - 1] {
        return 0.0;
    }
    let hi = pts.partition_point(|p| *p <= u).min(pts.len() - 1);
    hist.std_errors[hi.max(1) - 1].max(hist.std_errors[hi])
}
