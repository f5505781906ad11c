//! Independent numerical oracles for the closed-form integral identities:
//! graded tensor quadrature on an ordered-simplex parametrization for n ≤ 3,
//! polar-factorized quadrature on the disk, and seeded Monte Carlo for the
//! higher dimensions. None of these routes touches a gamma function, so an
//! agreement with the `selberg` module certifies both sides.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{graded_unit_points, GaussLegendre};
use crate::selberg::{
    self, aomoto_moment, ball_shape_exponent, ball_vandermonde_integral, gaussian_selberg,
    generalized_ball_integral, selberg_integral, SelbergParams,
};

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Selberg's integrand Φ on the open unit cube.
fn selberg_weight(p: &SelbergParams, x: &[f64]) -> f64 {
    let mut v = 1.0;
    for (i, xi) in x.iter().enumerate() {
        if p.alpha != 1.0 {
            v *= xi.powf(p.alpha - 1.0);
        }
        if p.beta != 1.0 {
            v *= (1.0 - xi).powf(p.beta - 1.0);
        }
        for xj in &x[i + 1..] {
            let d = (xi - xj).abs();
            v *= if p.gamma == 1.0 { d * d } else { d.powf(2.0 * p.gamma) };
        }
    }
    v
}

/// Quadrature oracle for Selberg's integral, n ≤ 3.
///
/// The cube is reduced to the ordered simplex x₁ ≤ ⋯ ≤ x_n (times n!),
/// parametrized multiplicatively so |Δ| turns into per-axis powers times
/// smooth positive factors; endpoint grading then handles the fractional
/// exponents.
pub fn selberg_oracle_quadrature(p: &SelbergParams) -> Result<f64> {
    p.validate()?;
    let g2 = 2.0 * p.gamma;
    let am1 = p.alpha - 1.0;
    let bm1 = p.beta - 1.0;
    let pw = |base: f64, e: f64| -> f64 {
        if e == 0.0 {
            1.0
        } else if e == 1.0 {
            base
        } else {
            base.powf(e)
        }
    };
    match p.n {
        1 => {
            let rule = GaussLegendre::new(16);
            let (pts, wts) = graded_unit_points(&rule, 24);
            let mut acc = 0.0;
            for (x, w) in pts.iter().zip(wts.iter()) {
                acc += w * pw(*x, am1) * pw(1.0 - x, bm1);
            }
            Ok(acc)
        }
        2 => {
            // x₂ = s, x₁ = s·u, Jacobian s; factor 2 for the two orderings
            let rule = GaussLegendre::new(16);
            let (pts, wts) = graded_unit_points(&rule, 20);
            let mut acc = 0.0;
            for (s, ws) in pts.iter().zip(wts.iter()) {
                let mut inner = 0.0;
                for (u, wu) in pts.iter().zip(wts.iter()) {
                    let x1 = s * u;
                    inner += wu
                        * pw(*s, g2 + 2.0 * am1 + 1.0)
                        * pw(*u, am1)
                        * pw(1.0 - u, g2)
                        * pw(1.0 - x1, bm1)
                        * pw(1.0 - s, bm1);
                }
                acc += ws * inner;
            }
            Ok(2.0 * acc)
        }
        3 => {
            // x₃ = t, x₂ = t·s, x₁ = t·s·u, Jacobian t²s; factor 3! = 6
            let rule = GaussLegendre::new(8);
            let (pts, wts) = graded_unit_points(&rule, 12);
            let n_pts = pts.len();
            let slabs: Vec<f64> = (0..n_pts)
                .into_par_iter()
                .map(|it| {
                    let t = pts[it];
                    let wt = wts[it];
                    let t_pow = pw(t, 3.0 * g2 + 3.0 * am1 + 2.0) * pw(1.0 - t, bm1);
                    let mut acc_t = 0.0;
                    for (s, ws) in pts.iter().zip(wts.iter()) {
                        let ts = t * s;
                        let s_pow = pw(*s, g2 + 2.0 * am1 + 1.0)
                            * pw(1.0 - s, g2)
                            * pw(1.0 - ts, bm1);
                        let mut acc_s = 0.0;
                        for (u, wu) in pts.iter().zip(wts.iter()) {
                            let tsu = ts * u;
                            acc_s += wu
                                * pw(*u, am1)
                                * pw(1.0 - u, g2)
                                * pw(1.0 - s * u, g2)
                                * pw(1.0 - tsu, bm1);
                        }
                        acc_t += ws * s_pow * acc_s;
                    }
                    wt * t_pow * acc_t
                })
                .collect();
            Ok(6.0 * slabs.iter().sum::<f64>())
        }
        _ => Err(Error::domain(
            "selberg_oracle_quadrature",
            format!("tensor oracle supports n <= 3, got {}", p.n),
        )),
    }
}

/// Fixed worker-chunk size: Monte Carlo results are reproducible for any
/// thread count because sample i draws from ChaCha stream i and partial
/// sums merge in chunk order.
const MC_CHUNK: u64 = 8_192;

fn mc_mean_se<F>(samples: u64, seed: u64, eval: F) -> McEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let chunks: u64 = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * MC_CHUNK;
            let hi = (lo + MC_CHUNK).min(samples);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for i in lo..hi {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let v = eval(&mut rng);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq)
        })
        .collect();
    let (sum, sumsq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let nf = samples as f64;
    let mean = sum / nf;
    let var = ((sumsq - sum * sum / nf) / (nf - 1.0)).max(0.0);
    McEstimate { mean, std_error: (var / nf).sqrt(), samples }
}

/// Plain Monte Carlo oracle for Selberg's integral: mean of Φ over the
/// uniform cube.
pub fn selberg_oracle_monte_carlo(p: &SelbergParams, samples: u64, seed: u64) -> Result<McEstimate> {
    p.validate()?;
    let n = p.n as usize;
    let p = *p;
    Ok(mc_mean_se(samples, seed, move |rng| {
        let mut x = [0.0f64; 8];
        for xi in x.iter_mut().take(n) {
            *xi = rng.random::<f64>();
        }
        selberg_weight(&p, &x[..n])
    }))
}

/// Tensor quadrature oracle for the Gaussian Selberg integral, n ≤ 2.
pub fn gaussian_selberg_oracle_quadrature(n: u32, gamma: f64, a: f64) -> Result<f64> {
    if !(a > 0.0) || !(gamma >= 0.0) {
        return Err(Error::domain("gaussian_selberg_oracle", "need a > 0, gamma >= 0"));
    }
    let half_width = 9.0 * (1.0f64).max(1.0 / (2.0 * a).sqrt());
    let rule = GaussLegendre::new(24);
    let panels = 24usize;
    match n {
        1 => Ok(rule.integrate_composite(-half_width, half_width, panels, |x| (-a * x * x).exp())),
        2 => {
            let mut total = 0.0;
            let h = 2.0 * half_width / panels as f64;
            for i in 0..panels {
                let x0 = -half_width + i as f64 * h;
                total += rule.integrate(x0, x0 + h, |x| {
                    rule.integrate_composite(-half_width, half_width, panels, |y| {
                        let d = (x - y).abs();
                        let rep = if gamma == 1.0 { d * d } else { d.powf(2.0 * gamma) };
                        rep * (-a * (x * x + y * y)).exp()
                    })
                });
            }
            Ok(total)
        }
        _ => Err(Error::domain(
            "gaussian_selberg_oracle",
            format!("quadrature oracle supports n <= 2, got {n}"),
        )),
    }
}

/// Importance-sampled Monte Carlo oracle for the Gaussian Selberg integral:
/// draws from the Gaussian factor and averages |Δ|^{2γ}.
pub fn gaussian_selberg_oracle_mc(
    n: u32,
    gamma: f64,
    a: f64,
    samples: u64,
    seed: u64,
) -> Result<McEstimate> {
    if !(a > 0.0) || !(gamma >= 0.0) || n == 0 || n > 8 {
        return Err(Error::domain("gaussian_selberg_oracle_mc", "need 1 <= n <= 8, a > 0, gamma >= 0"));
    }
    let nd = n as usize;
    let sigma = 1.0 / (2.0 * a).sqrt();
    let log_norm = 0.5 * n as f64 * (std::f64::consts::PI / a).ln();
    let est = mc_mean_se(samples, seed, move |rng| {
        let mut x = [0.0f64; 8];
        for xi in x.iter_mut().take(nd) {
            *xi = sigma * rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
        let mut rep = 1.0;
        for i in 0..nd {
            for j in (i + 1)..nd {
                let d = (x[i] - x[j]).abs();
                rep *= if gamma == 1.0 { d * d } else { d.powf(2.0 * gamma) };
            }
        }
        rep
    });
    Ok(McEstimate {
        mean: est.mean * log_norm.exp(),
        std_error: est.std_error * log_norm.exp(),
        samples,
    })
}

/// Polar-factorized quadrature oracle on the disk (n = 2): the integral of
/// |x−y|^{2γ}(1−r²)^e over x²+y² ≤ R² splits into a radial factor times an
/// angular factor. Pass `boundary_exponent` 0 for the plain Vandermonde
/// integral.
pub fn disk_oracle_polar(gamma: f64, boundary_exponent: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !(gamma >= 0.0) || !(boundary_exponent > -1.0) {
        return Err(Error::domain("disk_oracle_polar", "need R > 0, gamma >= 0, exponent > -1"));
    }
    let rule = GaussLegendre::new(24);
    // radial part on [0, 1] in r/R units, graded toward the boundary
    let (pts, wts) = graded_unit_points(&rule, 24);
    let mut radial = 0.0;
    for (r, w) in pts.iter().zip(wts.iter()) {
        radial += w * r.powf(2.0 * gamma + 1.0) * (1.0 - r * r).powf(boundary_exponent);
    }
    radial *= radius.powf(2.0 * gamma + 2.0);
    // angular part: |cosθ − sinθ|^{2γ}, kinks at π/4 and 5π/4
    let kink1 = std::f64::consts::FRAC_PI_4;
    let kink2 = kink1 + std::f64::consts::PI;
    let two_pi = 2.0 * std::f64::consts::PI;
    let seg = |a: f64, b: f64| {
        rule.integrate_composite(a, b, 16, |t| {
            let d = (t.cos() - t.sin()).abs();
            if gamma == 1.0 {
                d * d
            } else {
                d.powf(2.0 * gamma)
            }
        })
    };
    let angular = seg(0.0, kink1) + seg(kink1, kink2) + seg(kink2, two_pi);
    Ok(radial * angular)
}

/// Monte Carlo oracle for the Vandermonde integral over the 3-ball:
/// uniform sampling of the ball, averaging Δ².
pub fn ball3_oracle_mc(radius: f64, samples: u64, seed: u64) -> Result<McEstimate> {
    if !(radius > 0.0) {
        return Err(Error::domain("ball3_oracle_mc", "radius must be positive"));
    }
    let volume = 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3);
    let est = mc_mean_se(samples, seed, move |rng| {
        // isotropic direction from three normals, radius from U^{1/3}
        let mut x = [0.0f64; 3];
        loop {
            for xi in x.iter_mut() {
                *xi = rng.sample::<f64, _>(rand_distr::StandardNormal);
            }
            let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if norm > 1e-12 {
                let r = radius * rng.random::<f64>().cbrt() / norm;
                for xi in x.iter_mut() {
                    *xi *= r;
                }
                break;
            }
        }
        let d01 = x[0] - x[1];
        let d02 = x[0] - x[2];
        let d12 = x[1] - x[2];
        d01 * d01 * d02 * d02 * d12 * d12
    });
    Ok(McEstimate {
        mean: est.mean * volume,
        std_error: est.std_error * volume,
        samples,
    })
}

/// One row of the closed-form-vs-oracle verification report.
#[derive(Debug, Clone, Serialize)]
pub struct SelbergCheck {
    pub id: String,
    pub method: String,
    pub log_closed_form: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub rel_error: f64,
    pub std_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl SelbergCheck {
    fn quadrature(id: String, log_closed: f64, oracle: f64, tol: f64) -> Self {
        let closed = log_closed.exp();
        let rel = (closed - oracle).abs() / oracle.abs().max(f64::MIN_POSITIVE);
        SelbergCheck {
            id,
            method: "quadrature".into(),
            log_closed_form: log_closed,
            closed_form: closed,
            oracle,
            rel_error: rel,
            std_error: None,
            tolerance: tol,
            pass: rel <= tol,
        }
    }

    fn monte_carlo(id: String, log_closed: f64, est: McEstimate) -> Self {
        let closed = log_closed.exp();
        let rel = (closed - est.mean).abs() / est.mean.abs().max(f64::MIN_POSITIVE);
        let pass = (closed - est.mean).abs() <= 3.0 * est.std_error;
        SelbergCheck {
            id,
            method: "monte_carlo".into(),
            log_closed_form: log_closed,
            closed_form: closed,
            oracle: est.mean,
            rel_error: rel,
            std_error: Some(est.std_error),
            tolerance: 3.0 * est.std_error / est.mean.abs().max(f64::MIN_POSITIVE),
            pass,
        }
    }

    fn identity(id: String, lhs_log: f64, rhs_log: f64, tol: f64) -> Self {
        let rel = (lhs_log - rhs_log).abs() / rhs_log.abs().max(1.0);
        SelbergCheck {
            id,
            method: "log_identity".into(),
            log_closed_form: lhs_log,
            closed_form: f64::NAN,
            oracle: rhs_log,
            rel_error: rel,
            std_error: None,
            tolerance: tol,
            pass: rel <= tol,
        }
    }
}

/// The twenty n ≤ 3 parameter sets checked against tensor quadrature.
pub const QUADRATURE_SETS: [(u32, f64, f64, f64); 20] = [
    (1, 1.0, 1.0, 0.5),
    (1, 2.0, 3.5, 1.0),
    (1, 1.5, 2.5, 2.0),
    (1, 3.0, 1.0, -0.3),
    (2, 1.0, 1.0, 0.5),
    (2, 1.0, 1.0, 1.0),
    (2, 1.0, 1.0, 2.0),
    (2, 2.0, 1.5, 0.5),
    (2, 2.0, 1.5, 1.0),
    (2, 2.0, 1.5, 2.0),
    (2, 3.0, 2.0, 0.5),
    (2, 3.0, 2.0, 1.0),
    (2, 3.0, 2.0, 2.0),
    (3, 1.0, 1.0, 1.0),
    (3, 2.0, 1.0, 1.0),
    (3, 1.0, 2.0, 1.0),
    (3, 2.0, 3.0, 1.0),
    (3, 1.0, 1.0, 0.5),
    (3, 2.0, 1.0, 0.5),
    (3, 1.5, 1.0, 0.5),
];

/// Monte Carlo parameter sets for n ∈ {4, 5, 6}.
pub const MONTE_CARLO_SETS: [(u32, f64, f64, f64, u64); 3] = [
    (4, 1.0, 1.0, 1.0, 4_000_000),
    (5, 1.0, 1.0, 0.5, 4_000_000),
    (6, 1.0, 1.0, 0.5, 6_000_000),
];

/// Runs the whole closed-form-vs-oracle suite and returns one row per
/// identity. Quadrature rows must agree to 1e−6 relative; Monte Carlo rows
/// within three standard errors.
pub fn verify_selberg_report(seed: u64) -> Result<Vec<SelbergCheck>> {
    let mut rows = Vec::new();

    for (n, alpha, beta, gamma) in QUADRATURE_SETS {
        let p = SelbergParams::new(n, alpha, beta, gamma)?;
        let closed = selberg_integral(&p)?.log();
        let oracle = selberg_oracle_quadrature(&p)?;
        rows.push(SelbergCheck::quadrature(
            format!("selberg n={n} alpha={alpha} beta={beta} gamma={gamma}"),
            closed,
            oracle,
            1e-6,
        ));
    }

    for (i, (n, alpha, beta, gamma, samples)) in MONTE_CARLO_SETS.into_iter().enumerate() {
        let p = SelbergParams::new(n, alpha, beta, gamma)?;
        let closed = selberg_integral(&p)?.log();
        let est = selberg_oracle_monte_carlo(&p, samples, seed.wrapping_add(i as u64 + 1))?;
        rows.push(SelbergCheck::monte_carlo(
            format!("selberg n={n} alpha={alpha} beta={beta} gamma={gamma} (mc)"),
            closed,
            est,
        ));
    }

    // Aomoto moment against the quadrature pair ⟨x₁x₂Φ⟩ / ⟨Φ⟩
    {
        let p = SelbergParams::new(2, 1.0, 1.0, 1.0)?;
        let moment = aomoto_moment(&p, 2)?;
        let numer_p = SelbergParams::new(2, 2.0, 1.0, 1.0)?; // x₁x₂ shifts α by one
        let numer = selberg_oracle_quadrature(&numer_p)?;
        let denom = selberg_oracle_quadrature(&p)?;
        rows.push(SelbergCheck::quadrature(
            "aomoto n=2 m=2 alpha=1 beta=1 gamma=1".into(),
            moment.ln(),
            numer / denom,
            1e-8,
        ));
    }

    // Gaussian Selberg: quadrature at n=2, Monte Carlo at n=3
    {
        let closed = gaussian_selberg(2, 1.0, 1.0)?.log();
        let oracle = gaussian_selberg_oracle_quadrature(2, 1.0, 1.0)?;
        rows.push(SelbergCheck::quadrature(
            "gaussian_selberg n=2 gamma=1 a=1".into(),
            closed,
            oracle,
            1e-8,
        ));
        let closed3 = gaussian_selberg(3, 1.0, 1.0)?.log();
        let est = gaussian_selberg_oracle_mc(3, 1.0, 1.0, 4_000_000, seed.wrapping_add(11))?;
        rows.push(SelbergCheck::monte_carlo(
            "gaussian_selberg n=3 gamma=1 a=1 (mc)".into(),
            closed3,
            est,
        ));
    }

    // Ball Vandermonde: polar quadrature at n=2, Monte Carlo at n=3,
    // R-homogeneity as a log identity
    {
        let closed = ball_vandermonde_integral(2, 1.0)?.log();
        let oracle = disk_oracle_polar(1.0, 0.0, 1.0)?;
        rows.push(SelbergCheck::quadrature(
            "ball_vandermonde n=2 R=1".into(),
            closed,
            oracle,
            1e-10,
        ));
        let closed3 = ball_vandermonde_integral(3, 1.0)?.log();
        let est = ball3_oracle_mc(1.0, 10_000_000, seed.wrapping_add(12))?;
        rows.push(SelbergCheck::monte_carlo(
            "ball_vandermonde n=3 R=1 (mc)".into(),
            closed3,
            est,
        ));
        let scaled = ball_vandermonde_integral(4, 2.5)?.log();
        let unit = ball_vandermonde_integral(4, 1.0)?.log();
        rows.push(SelbergCheck::identity(
            "ball_vandermonde homogeneity n=4 R=2.5".into(),
            scaled,
            unit + 16.0 * 2.5f64.ln(),
            1e-12,
        ));
    }

    // Generalized ball integral: 1-D beta reduction and the n=2 disk
    {
        let closed = generalized_ball_integral(1, 0.8, 2.5)?.log();
        let rule = GaussLegendre::new(24);
        let (pts, wts) = graded_unit_points(&rule, 24);
        // ∫_{−1}^{1}(1−y²)^{β−3/2} dy, folded to [0, 1]
        let mut oracle = 0.0;
        for (y, w) in pts.iter().zip(wts.iter()) {
            oracle += 2.0 * w * (1.0 - y * y).powf(2.5 - 1.5);
        }
        rows.push(SelbergCheck::quadrature(
            "generalized_ball n=1 gamma=0.8 beta=2.5".into(),
            closed,
            oracle,
            1e-9,
        ));

        let closed2 = generalized_ball_integral(2, 1.0, 5.0)?.log();
        let c = ball_shape_exponent(2, 1.0);
        let oracle2 = disk_oracle_polar(1.0, 5.0 - c - 1.0, 1.0)?;
        rows.push(SelbergCheck::quadrature(
            "generalized_ball n=2 gamma=1 beta=5".into(),
            closed2,
            oracle2,
            1e-8,
        ));
    }

    // γ = 0 degeneracy as a log identity
    {
        let p = SelbergParams::new(5, 1.7, 2.3, 0.0)?;
        let lhs = selberg_integral(&p)?.log();
        let rhs = 5.0 * (selberg::selberg_integral(&SelbergParams::new(1, 1.7, 2.3, 0.0)?)?).log();
        rows.push(SelbergCheck::identity(
            "selberg gamma=0 degeneracy n=5".into(),
            lhs,
            rhs,
            1e-10,
        ));
    }

    Ok(rows)
}
