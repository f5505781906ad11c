//! Seeded Monte Carlo generation of GUE and fixed-trace spectra, histogram
//! density estimation, symmetrized mixed moments, and the top-eigenvalue
//! ratio.
//!
//! Reproducibility scheme: sample i draws every random number from ChaCha
//! stream i of the master seed, so a spectrum depends only on
//! (master_seed, sample index). Worker threads split the index range into
//! fixed chunks and results merge in index order; histogram counts are
//! integers. Output is therefore bit-identical for any thread or stream
//! count.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DensityGrid;

/// Which joint eigenvalue law a spectrum was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    /// Weight e^{−Σx²}Δ²(x) on ℝ^N.
    Gue,
    /// Weight Δ²(x) on the unit sphere Σx² = 1.
    FixedTrace,
}

impl Ensemble {
    pub fn tag(&self) -> &'static str {
        match self {
            Ensemble::Gue => "gue",
            Ensemble::FixedTrace => "fixed_trace",
        }
    }
}

/// One sorted eigenvalue vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    eigenvalues: Vec<f64>,
    ensemble: Ensemble,
    seed_path: (u64, u64),
}

impl SpectrumSample {
    /// Validating constructor: ascending order always; unit 2-norm within
    /// 1e−12 for fixed-trace spectra.
    pub fn new(eigenvalues: Vec<f64>, ensemble: Ensemble, seed_path: (u64, u64)) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::domain("SpectrumSample", "empty eigenvalue vector"));
        }
        if eigenvalues.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::domain("SpectrumSample", "eigenvalues must be sorted ascending"));
        }
        if ensemble == Ensemble::FixedTrace {
            let norm2: f64 = eigenvalues.iter().map(|x| x * x).sum();
            if (norm2 - 1.0).abs() > 1e-12 {
                return Err(Error::domain(
                    "SpectrumSample",
                    format!("fixed-trace spectrum has Σx² = {norm2}"),
                ));
            }
        }
        Ok(SpectrumSample { eigenvalues, ensemble, seed_path })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    /// (stream id, sample index) of the RNG stream that produced the draw.
    pub fn seed_path(&self) -> (u64, u64) {
        self.seed_path
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// The RNG for a given (master seed, sample index) pair.
pub fn stream_rng(master_seed: u64, sample_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(sample_index);
    rng
}

const EIGEN_MAX_RETRIES: u64 = 8;

/// Draws one GUE spectrum: Hermitian matrix with real diagonal N(0, 1/2)
/// and off-diagonal real/imaginary parts N(0, 1/4), so the matrix density
/// is ∝ e^{−tr M²} and the eigenvalue density ∝ e^{−Σx²}Δ²(x).
///
/// Returns the sorted spectrum plus the number of eigensolver retries
/// (fresh redraws after a non-converged decomposition), which the run
/// manifest accumulates.
pub fn sample_gue_spectrum(
    n: u32,
    rng: &mut ChaCha8Rng,
    seed_path: (u64, u64),
) -> Result<(SpectrumSample, u64)> {
    if n == 0 {
        return Err(Error::domain("sample_gue_spectrum", "N must be positive"));
    }
    let dim = n as usize;
    let diag_sd = std::f64::consts::FRAC_1_SQRT_2;
    let mut retries = 0u64;
    loop {
        let mut m = DMatrix::<Complex<f64>>::zeros(dim, dim);
        for i in 0..dim {
            let d: f64 = rng.sample(rand_distr::StandardNormal);
            m[(i, i)] = Complex::new(diag_sd * d, 0.0);
            for j in (i + 1)..dim {
                let re: f64 = rng.sample(rand_distr::StandardNormal);
                let im: f64 = rng.sample(rand_distr::StandardNormal);
                let z = Complex::new(0.5 * re, 0.5 * im);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        match m.try_symmetric_eigen(f64::EPSILON, 1024) {
            Some(eig) => {
                let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
                let sample = SpectrumSample { eigenvalues: ev, ensemble: Ensemble::Gue, seed_path };
                return Ok((sample, retries));
            }
            None => {
                retries += 1;
                if retries > EIGEN_MAX_RETRIES {
                    return Err(Error::Sampling(format!(
                        "eigensolver failed {EIGEN_MAX_RETRIES} times for N={n}, seed path {seed_path:?}"
                    )));
                }
            }
        }
    }
}

/// Projects a GUE spectrum onto the unit sphere: the radial and angular
/// parts of e^{−Σx²}Δ² are independent, so dividing by √(Σx²) samples the
/// fixed-trace law exactly. Ordering is preserved.
pub fn project_fixed_trace(s: &SpectrumSample) -> Result<SpectrumSample> {
    if s.ensemble != Ensemble::Gue {
        return Err(Error::domain("project_fixed_trace", "input must be a GUE spectrum"));
    }
    let norm2: f64 = s.eigenvalues.iter().map(|x| x * x).sum();
    if norm2 <= 0.0 {
        return Err(Error::Sampling("zero spectrum cannot be projected".into()));
    }
    let inv = 1.0 / norm2.sqrt();
    Ok(SpectrumSample {
        eigenvalues: s.eigenvalues.iter().map(|x| x * inv).collect(),
        ensemble: Ensemble::FixedTrace,
        seed_path: s.seed_path,
    })
}

/// A batch of spectra drawn from one master seed.
#[derive(Debug)]
pub struct SampleBatch {
    pub n: u32,
    pub ensemble: Ensemble,
    pub samples: Vec<SpectrumSample>,
    pub eigensolver_retries: u64,
}

/// Worker chunk size; fixed so that results never depend on thread count.
const SAMPLE_CHUNK: u64 = 256;

/// Draws `num_samples` spectra in parallel, merged in sample-index order.
pub fn sample_batch(
    n: u32,
    ensemble: Ensemble,
    num_samples: u64,
    master_seed: u64,
) -> Result<SampleBatch> {
    if num_samples == 0 {
        return Err(Error::domain("sample_batch", "num_samples must be positive"));
    }
    let chunks = num_samples.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Result<(Vec<SpectrumSample>, u64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * SAMPLE_CHUNK;
            let hi = (lo + SAMPLE_CHUNK).min(num_samples);
            let mut out = Vec::with_capacity((hi - lo) as usize);
            let mut retries = 0u64;
            for i in lo..hi {
                let mut rng = stream_rng(master_seed, i);
                let (gue, r) = sample_gue_spectrum(n, &mut rng, (i, i))?;
                retries += r;
                out.push(match ensemble {
                    Ensemble::Gue => gue,
                    Ensemble::FixedTrace => project_fixed_trace(&gue)?,
                });
            }
            Ok((out, retries))
        })
        .collect();
    let mut samples = Vec::with_capacity(num_samples as usize);
    let mut retries = 0u64;
    for part in parts {
        let (chunk, r) = part?;
        samples.extend(chunk);
        retries += r;
    }
    Ok(SampleBatch { n, ensemble, samples, eigensolver_retries: retries })
}

/// Histogram density with per-bin Monte Carlo standard errors.
#[derive(Debug, Clone)]
pub struct HistogramDensity {
    /// Bin-center tabulation flanked by the support endpoints (constant
    /// extension), declared mass N; the trapezoidal integral then equals
    /// the binned mass exactly.
    pub grid: DensityGrid,
    /// Standard error per grid point, aligned with `grid` (endpoints share
    /// the edge-bin error).
    pub std_errors: Vec<f64>,
    /// Fraction of eigenvalues that fell outside the support.
    pub clipped_fraction: f64,
    pub bin_width: f64,
}

impl HistogramDensity {
    /// Aggregate one-norm of the per-bin standard errors: Σ se·Δx. This is
    /// the Monte Carlo error budget used by the verification reports.
    pub fn error_budget_l1(&self) -> f64 {
        self.std_errors.iter().sum::<f64>() * self.bin_width
    }
}

const MAX_CLIPPED_FRACTION: f64 = 1e-3;

/// Histogram estimate of the level density over `support`, normalized to
/// total mass N: value = count/(num_samples·binwidth).
///
/// Per-bin standard errors come from the across-sample variance of the
/// per-sample bin counts, which keeps the within-spectrum eigenvalue
/// correlations in the estimate. Errors out if more than 0.1% of the mass
/// lands outside the support.
pub fn estimate_density(
    samples: &[SpectrumSample],
    bins: usize,
    support: (f64, f64),
) -> Result<HistogramDensity> {
    if samples.is_empty() {
        return Err(Error::domain("estimate_density", "no samples"));
    }
    if bins < 10 {
        return Err(Error::domain("estimate_density", format!("bins must be >= 10, got {bins}")));
    }
    let (lo, hi) = support;
    if !(hi > lo) {
        return Err(Error::domain("estimate_density", "empty support interval"));
    }
    let n = samples[0].len();
    let ensemble = samples[0].ensemble();
    if samples.iter().any(|s| s.len() != n || s.ensemble() != ensemble) {
        return Err(Error::domain("estimate_density", "mixed sample shapes or ensembles"));
    }

    let width = (hi - lo) / bins as f64;
    let num_samples = samples.len() as f64;

    // per-chunk integer accumulators merge exactly in any order
    let chunk_stats: Vec<(Vec<u64>, Vec<u64>, u64)> = samples
        .par_chunks(SAMPLE_CHUNK as usize)
        .map(|chunk| {
            let mut count = vec![0u64; bins];
            let mut count_sq = vec![0u64; bins];
            let mut clipped = 0u64;
            let mut scratch: Vec<(usize, u64)> = Vec::with_capacity(n);
            for s in chunk {
                scratch.clear();
                for &x in s.eigenvalues() {
                    if x < lo || x > hi {
                        clipped += 1;
                        continue;
                    }
                    let mut b = ((x - lo) / width) as usize;
                    if b == bins {
                        b -= 1; // x == hi lands in the last bin
                    }
                    match scratch.last_mut() {
                        Some((prev, c)) if *prev == b => *c += 1,
                        _ => scratch.push((b, 1)),
                    }
                }
                for &(b, c) in &scratch {
                    count[b] += c;
                    count_sq[b] += c * c;
                }
            }
            (count, count_sq, clipped)
        })
        .collect();

    let mut count = vec![0u64; bins];
    let mut count_sq = vec![0u64; bins];
    let mut clipped = 0u64;
    for (c, csq, cl) in chunk_stats {
        for b in 0..bins {
            count[b] += c[b];
            count_sq[b] += csq[b];
        }
        clipped += cl;
    }

    let total_values = samples.len() as u64 * n as u64;
    let clipped_fraction = clipped as f64 / total_values as f64;
    if clipped_fraction > MAX_CLIPPED_FRACTION {
        return Err(Error::inconsistency(
            "estimate_density",
            format!(
                "clipped mass {clipped_fraction:.2e} exceeds {MAX_CLIPPED_FRACTION:.0e}; widen the support"
            ),
        ));
    }

    let scale = 1.0 / (num_samples * width);
    let mut values = Vec::with_capacity(bins + 2);
    let mut errors = Vec::with_capacity(bins + 2);
    let mut points = Vec::with_capacity(bins + 2);
    points.push(lo);
    for b in 0..bins {
        points.push(lo + (b as f64 + 0.5) * width);
    }
    points.push(hi);

    let mut raw_vals = Vec::with_capacity(bins);
    let mut raw_errs = Vec::with_capacity(bins);
    for b in 0..bins {
        let sum = count[b] as f64;
        let sumsq = count_sq[b] as f64;
        let mean = sum / num_samples;
        let var = if samples.len() > 1 {
            ((sumsq - sum * mean) / (num_samples - 1.0)).max(0.0)
        } else {
            0.0
        };
        raw_vals.push(sum * scale);
        raw_errs.push((var / num_samples).sqrt() / width);
    }
    values.push(raw_vals[0]);
    errors.push(raw_errs[0]);
    values.extend_from_slice(&raw_vals);
    errors.extend_from_slice(&raw_errs);
    values.push(raw_vals[bins - 1]);
    errors.push(raw_errs[bins - 1]);

    let mass = n as f64 * (1.0 - clipped_fraction);
    let grid = DensityGrid::with_tolerance(points, values, mass, 1e-6)?;
    Ok(HistogramDensity { grid, std_errors: errors, clipped_fraction, bin_width: width })
}

/// An estimate together with its standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Symmetrized empirical mixed moment ⟨x₁^{p₁}⋯x_m^{p_m}⟩: within each
/// sample the product is averaged over all ordered choices of m distinct
/// coordinates, then across samples with a jackknife standard error.
///
/// The per-sample enumeration costs O(N^m); intended for the small m the
/// verification suite uses (m ≤ 4).
pub fn estimate_mixed_moment(samples: &[SpectrumSample], powers: &[u32]) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::domain("estimate_mixed_moment", "no samples"));
    }
    let n = samples[0].len();
    let m = powers.len();
    if m == 0 || m > n {
        return Err(Error::domain(
            "estimate_mixed_moment",
            format!("need 1 <= #powers <= N, got {m} powers at N={n}"),
        ));
    }
    if m > 4 {
        return Err(Error::domain(
            "estimate_mixed_moment",
            "symmetrized enumeration is limited to 4 exponents",
        ));
    }
    if samples.iter().any(|s| s.len() != n) {
        return Err(Error::domain("estimate_mixed_moment", "mixed sample sizes"));
    }

    let per_sample: Vec<f64> = samples
        .par_iter()
        .map(|s| symmetrized_product_mean(s.eigenvalues(), powers))
        .collect();
    Ok(jackknife_mean(&per_sample))
}

fn symmetrized_product_mean(x: &[f64], powers: &[u32]) -> f64 {
    let n = x.len();
    let m = powers.len();
    let mut used = vec![false; n];
    let mut sum = 0.0;
    let mut count = 0u64;
    fn recurse(
        x: &[f64],
        powers: &[u32],
        depth: usize,
        acc: f64,
        used: &mut [bool],
        sum: &mut f64,
        count: &mut u64,
    ) {
        if depth == powers.len() {
            *sum += acc;
            *count += 1;
            return;
        }
        for i in 0..x.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            recurse(x, powers, depth + 1, acc * x[i].powi(powers[depth] as i32), used, sum, count);
            used[i] = false;
        }
    }
    recurse(x, powers, 0, 1.0, &mut used, &mut sum, &mut count);
    debug_assert!(m <= n && count > 0);
    sum / count as f64
}

/// Mean of per-sample statistics with the leave-one-out jackknife error.
fn jackknife_mean(values: &[f64]) -> Estimate {
    let s = values.len() as f64;
    let mean = values.iter().sum::<f64>() / s;
    if values.len() < 2 {
        return Estimate { value: mean, std_error: f64::INFINITY };
    }
    // for a plain mean the jackknife reduces to sd/√S
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (s - 1.0);
    Estimate { value: mean, std_error: (var / s).sqrt() }
}

/// ⟨max_i x_i²⟩ / ⟨x₁²⟩ over GUE spectra, with ⟨x₁²⟩ estimated as ⟨Σx²⟩/N
/// (exchangeability gives the same expectation at lower variance). The
/// standard error comes from jackknifing the ratio of means.
pub fn top_eigenvalue_ratio(n: u32, num_samples: u64, master_seed: u64) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::domain("top_eigenvalue_ratio", "N must be positive"));
    }
    let batch = sample_batch(n, Ensemble::Gue, num_samples, master_seed)?;
    let pairs: Vec<(f64, f64)> = batch
        .samples
        .iter()
        .map(|s| {
            let ev = s.eigenvalues();
            let max_sq = ev.iter().map(|x| x * x).fold(0.0, f64::max);
            let mean_sq = ev.iter().map(|x| x * x).sum::<f64>() / n as f64;
            (max_sq, mean_sq)
        })
        .collect();
    Ok(jackknife_ratio(&pairs))
}

/// Jackknife for the ratio of means Σa / Σb.
fn jackknife_ratio(pairs: &[(f64, f64)]) -> Estimate {
    let s = pairs.len() as f64;
    let sum_a: f64 = pairs.iter().map(|p| p.0).sum();
    let sum_b: f64 = pairs.iter().map(|p| p.1).sum();
    let ratio = sum_a / sum_b;
    if pairs.len() < 2 {
        return Estimate { value: ratio, std_error: f64::INFINITY };
    }
    let mut mean_loo = 0.0;
    for (a, b) in pairs {
        mean_loo += (sum_a - a) / (sum_b - b);
    }
    mean_loo /= s;
    let mut var = 0.0;
    for (a, b) in pairs {
        let loo = (sum_a - a) / (sum_b - b);
        var += (loo - mean_loo) * (loo - mean_loo);
    }
    var *= (s - 1.0) / s;
    Estimate { value: ratio, std_error: var.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn known_hermitian_eigenvalues() {
        // [[0, i], [−i, 0]] has spectrum {−1, +1}; pins the solver wiring
        let mut m = DMatrix::<Complex<f64>>::zeros(2, 2);
        m[(0, 1)] = Complex::new(0.0, 1.0);
        m[(1, 0)] = Complex::new(0.0, -1.0);
        let eig = m.symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn n1_variance_is_one_half() {
        let batch = sample_batch(1, Ensemble::Gue, 100_000, 42).unwrap();
        let mean_sq: f64 = batch
            .samples
            .iter()
            .map(|s| s.eigenvalues()[0] * s.eigenvalues()[0])
            .sum::<f64>()
            / batch.samples.len() as f64;
        assert!(
            (0.49..=0.51).contains(&mean_sq),
            "empirical variance {mean_sq} should be near 1/2"
        );
    }

    #[test]
    fn trace_moments_match_entry_variances() {
        // E Σx = 0 and E Σx² = N²/2 under the e^{−tr M²} convention
        let n = 4u32;
        let batch = sample_batch(n, Ensemble::Gue, 100_000, 7).unwrap();
        let s = batch.samples.len() as f64;
        let (mut sum1, mut sum2, mut sum2sq) = (0.0, 0.0, 0.0);
        for sample in &batch.samples {
            let t1: f64 = sample.eigenvalues().iter().sum();
            let t2: f64 = sample.eigenvalues().iter().map(|x| x * x).sum();
            sum1 += t1;
            sum2 += t2;
            sum2sq += t2 * t2;
        }
        let mean1 = sum1 / s;
        let mean2 = sum2 / s;
        let se2 = ((sum2sq / s - mean2 * mean2) / s).sqrt();
        // E Σx = 0: variance of Σx is N/2
        let se1 = ((n as f64) / 2.0 / s).sqrt();
        assert!(mean1.abs() <= 3.0 * se1, "⟨Σx⟩ = {mean1} vs se {se1}");
        let expect = (n * n) as f64 / 2.0;
        assert!(
            (mean2 - expect).abs() <= 3.0 * se2,
            "⟨Σx²⟩ = {mean2} vs {expect} ± {se2}"
        );
    }

    #[test]
    fn projection_normalizes_and_preserves_order() {
        let mut rng = stream_rng(3, 0);
        let (gue, _) = sample_gue_spectrum(6, &mut rng, (0, 0)).unwrap();
        let ft = project_fixed_trace(&gue).unwrap();
        let norm2: f64 = ft.eigenvalues().iter().map(|x| x * x).sum();
        assert_abs_diff_eq!(norm2, 1.0, epsilon = 1e-12);
        assert!(ft.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        // scaling only: ratios preserved
        let r = gue.eigenvalues()[5] / ft.eigenvalues()[5];
        assert_relative_eq!(gue.eigenvalues()[0], ft.eigenvalues()[0] * r, max_relative = 1e-12);
    }

    #[test]
    fn sampling_is_deterministic_for_fixed_seed() {
        let a = sample_batch(3, Ensemble::FixedTrace, 500, 99).unwrap();
        let b = sample_batch(3, Ensemble::FixedTrace, 500, 99).unwrap();
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            assert_eq!(x.eigenvalues(), y.eigenvalues());
        }
    }

    #[test]
    fn histogram_mass_counts_exactly() {
        let batch = sample_batch(5, Ensemble::FixedTrace, 2_000, 11).unwrap();
        let h = estimate_density(&batch.samples, 64, (-1.0, 1.0)).unwrap();
        assert_eq!(h.clipped_fraction, 0.0, "sphere spectra always fit in [−1,1]");
        assert_relative_eq!(h.grid.trapezoid(), 5.0, max_relative = 1e-9);
        assert_relative_eq!(h.grid.mass(), 5.0);
    }

    #[test]
    fn histogram_rejects_heavy_clipping() {
        let batch = sample_batch(4, Ensemble::Gue, 500, 13).unwrap();
        // support far narrower than the spectrum: clipping must error out
        let res = estimate_density(&batch.samples, 32, (-0.5, 0.5));
        assert!(res.is_err());
    }

    #[test]
    fn histogram_symmetry_within_errors() {
        let n = 10u32;
        let batch = sample_batch(n, Ensemble::FixedTrace, 20_000, 21).unwrap();
        let h = estimate_density(&batch.samples, 100, (-1.0, 1.0)).unwrap();
        let vals = h.grid.values();
        let errs = &h.std_errors;
        let len = vals.len();
        let mut worst: f64 = 0.0;
        for i in 0..len {
            let j = len - 1 - i;
            let se = (errs[i] * errs[i] + errs[j] * errs[j]).sqrt().max(1e-12);
            worst = worst.max((vals[i] - vals[j]).abs() / se);
        }
        assert!(worst <= 4.0, "worst mirror z-score {worst}");
    }

    #[test]
    fn fixed_trace_marginal_matches_circle_quadrature_n2() {
        // On the circle x = (cosθ, sinθ) the fixed-trace law is the angular
        // density ∝ (cosθ − sinθ)² dθ; the marginal of one coordinate is
        // evaluated by direct θ-quadrature of bin masses, no hand formula.
        let n2 = 2u32;
        let samples = 1_000_000u64;
        let batch = sample_batch(n2, Ensemble::FixedTrace, samples, 5).unwrap();
        let bins = 40usize;
        let h = estimate_density(&batch.samples, bins, (-1.0, 1.0)).unwrap();

        // oracle: bin masses of the θ-parametrized density, both coordinates
        let rule = GaussLegendre::new(32);
        let weight = |t: f64| {
            let d = t.cos() - t.sin();
            d * d
        };
        let norm = rule.integrate_composite(0.0, 2.0 * std::f64::consts::PI, 64, weight);
        let width = 2.0 / bins as f64;
        let grid_vals = h.grid.values();
        let mut l1 = 0.0;
        for b in 0..bins {
            let lo = -1.0 + b as f64 * width;
            let hi = lo + width;
            // mass of cosθ ∈ [lo, hi]: θ in two arcs per revolution
            let a0 = hi.clamp(-1.0, 1.0).acos();
            let a1 = lo.clamp(-1.0, 1.0).acos();
            let mass_cos = rule.integrate_composite(a0, a1, 8, weight)
                + rule.integrate_composite(
                    2.0 * std::f64::consts::PI - a1,
                    2.0 * std::f64::consts::PI - a0,
                    8,
                    weight,
                );
            // sinθ marginal equals cosθ marginal by the θ → π/2 − θ symmetry
            let expect = 2.0 * mass_cos / norm / width; // density, mass N=2
            let got = grid_vals[b + 1]; // offset: grid has a leading endpoint
            l1 += (got - expect).abs() * width;
        }
        assert!(l1 <= 0.01, "L1 distance {l1} vs tolerance 0.01");
    }

    #[test]
    fn mixed_moment_sphere_constraint() {
        let batch = sample_batch(6, Ensemble::FixedTrace, 400, 17).unwrap();
        // ⟨x²⟩ summed over the N coordinates is 1 exactly per sample
        let m = estimate_mixed_moment(&batch.samples, &[2]).unwrap();
        assert_abs_diff_eq!(m.value * 6.0, 1.0, epsilon = 1e-12);
        assert!(m.std_error < 1e-13);
    }

    #[test]
    fn mixed_moment_first_coordinate_centered() {
        let batch = sample_batch(4, Ensemble::FixedTrace, 30_000, 23).unwrap();
        let m = estimate_mixed_moment(&batch.samples, &[1]).unwrap();
        assert!(m.value.abs() <= 3.0 * m.std_error, "⟨x⟩ = {} ± {}", m.value, m.std_error);
    }

    #[test]
    fn mixed_moment_pair_exchangeability_n2() {
        let batch = sample_batch(2, Ensemble::FixedTrace, 30_000, 29).unwrap();
        let m = estimate_mixed_moment(&batch.samples, &[2]).unwrap();
        assert!((m.value - 0.5).abs() <= 3.0 * m.std_error);
    }

    #[test]
    fn mixed_moment_rejects_bad_shapes() {
        let batch = sample_batch(3, Ensemble::FixedTrace, 10, 1).unwrap();
        assert!(estimate_mixed_moment(&batch.samples, &[]).is_err());
        assert!(estimate_mixed_moment(&batch.samples, &[1, 1, 1, 1]).is_err());
    }

    #[test]
    fn ratio_is_one_at_n1_and_at_least_one_always() {
        let r1 = top_eigenvalue_ratio(1, 2_000, 31).unwrap();
        assert_abs_diff_eq!(r1.value, 1.0, epsilon = 1e-14);
        let r5 = top_eigenvalue_ratio(5, 5_000, 37).unwrap();
        assert!(r5.value >= 1.0);
    }

    /// 2-D quadrature oracle for the N=2 ratio: numerator ∫max(x²,y²)·w and
    /// denominator ∫x²·w under w = e^{−x²−y²}(x−y)².
    fn ratio_oracle_n2() -> f64 {
        let rule = GaussLegendre::new(32);
        let l = 7.0;
        // ∫∫ max = 4·∫_{x>0} x² e^{−x²} ∫_{−x}^{x} (x−y)² e^{−y²} dy dx
        let numer = 4.0
            * rule.integrate_composite(0.0, l, 28, |x| {
                let inner = rule.integrate_composite(-x.max(1e-12), x.max(1e-12), 16, |y| {
                    (x - y) * (x - y) * (-y * y).exp()
                });
                x * x * (-x * x).exp() * inner
            });
        let denom = 0.5
            * rule.integrate_composite(-l, l, 56, |x| {
                rule.integrate_composite(-l, l, 56, |y| {
                    (x * x + y * y) * (x - y) * (x - y) * (-(x * x + y * y)).exp()
                })
            });
        numer / denom
    }

    #[test]
    fn ratio_matches_quadrature_oracle_n2() {
        let est = top_eigenvalue_ratio(2, 400_000, 41).unwrap();
        let oracle = ratio_oracle_n2();
        assert!(
            (est.value - oracle).abs() <= 3.0 * est.std_error,
            "mc {} ± {} vs oracle {}",
            est.value,
            est.std_error,
            oracle
        );
    }

    #[test]
    fn radial_angular_independence() {
        // correlation between the radius and a bounded statistic of the
        // projected spectrum vanishes: this is the factorization behind
        // project_fixed_trace
        let batch = sample_batch(5, Ensemble::Gue, 30_000, 43).unwrap();
        let pairs: Vec<(f64, f64)> = batch
            .samples
            .iter()
            .map(|s| {
                let r2: f64 = s.eigenvalues().iter().map(|x| x * x).sum();
                let r = r2.sqrt();
                let top = s.eigenvalues()[s.len() - 1] / r;
                (r, top)
            })
            .collect();
        let s = pairs.len() as f64;
        let mean_r = pairs.iter().map(|p| p.0).sum::<f64>() / s;
        let mean_t = pairs.iter().map(|p| p.1).sum::<f64>() / s;
        let (mut cov, mut var_r, mut var_t) = (0.0, 0.0, 0.0);
        for (r, t) in &pairs {
            cov += (r - mean_r) * (t - mean_t);
            var_r += (r - mean_r) * (r - mean_r);
            var_t += (t - mean_t) * (t - mean_t);
        }
        let corr = cov / (var_r * var_t).sqrt();
        assert!(corr.abs() <= 3.0 / s.sqrt(), "corr = {corr}");
    }

    #[test]
    fn empirical_sup_bound_scales_like_n_three_halves() {
        // max σ_v,N over bins, divided by N^{3/2}: bounded by 0.7 and stable
        // from N=10 to N=100 (2/π ≈ 0.32 is the semicircle prediction)
        let mut scaled_max = Vec::new();
        for n in [10u32, 100] {
            let batch = sample_batch(n, Ensemble::FixedTrace, 4_000, 47).unwrap();
            let h = estimate_density(&batch.samples, 100, (-1.0, 1.0)).unwrap();
            let max = h.grid.values().iter().cloned().fold(0.0, f64::max);
            scaled_max.push(max / (n as f64).powf(1.5));
        }
        for v in &scaled_max {
            assert!(*v <= 0.7, "scaled sup {v}");
        }
        assert!(scaled_max[1] <= 1.5 * scaled_max[0]);
    }

    #[test]
    fn spectrum_sample_constructor_validates() {
        assert!(SpectrumSample::new(vec![1.0, 0.0], Ensemble::Gue, (0, 0)).is_err());
        assert!(SpectrumSample::new(vec![0.3, 0.4], Ensemble::FixedTrace, (0, 0)).is_err());
        let ok = SpectrumSample::new(vec![-0.6, 0.8], Ensemble::FixedTrace, (0, 0));
        assert!(ok.is_ok());
    }
}
