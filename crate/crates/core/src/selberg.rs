//! Closed forms for the Selberg-type integrals: the unit-cube Selberg
//! integral, the Aomoto moment ratio, the Gaussian limit, and the unit-ball
//! Vandermonde integrals.
//!
//! Every value is accumulated in log space: at n = 10, γ = 1 the gamma
//! products already exceed double range in linear form.

use crate::error::{Error, Result};
use crate::specfun::lgamma;

/// A positive quantity carried as (sign, ln |value|).
///
/// Within the parameter domains accepted by this module every gamma factor
/// is positive, so `sign` stays +1; it is tracked anyway so that a future
/// analytic continuation cannot silently produce a wrong magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogValue {
    sign: i8,
    log: f64,
}

impl LogValue {
    pub(crate) fn from_log(log: f64) -> Self {
        LogValue { sign: 1, log }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// ln |value|
    pub fn log(&self) -> f64 {
        self.log
    }

    /// The linear value; may overflow to +∞ when the log exceeds ~709.
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.log.exp()
    }
}

/// Parameter tuple (n, α, β, γ) for the Selberg family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelbergParams {
    pub n: u32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SelbergParams {
    pub fn new(n: u32, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = SelbergParams { n, alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// α > 0, β > 0, γ > −min(1/n, α/(n−1), β/(n−1)); the last two
    /// constraints are vacuous at n = 1.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("SelbergParams", "n must be positive"));
        }
        if !(self.alpha > 0.0) || !(self.beta > 0.0) {
            return Err(Error::domain(
                "SelbergParams",
                format!("alpha and beta must be positive, got α={}, β={}", self.alpha, self.beta),
            ));
        }
        let nf = self.n as f64;
        let mut bound = 1.0 / nf;
        if self.n > 1 {
            bound = bound.min(self.alpha / (nf - 1.0)).min(self.beta / (nf - 1.0));
        }
        if !(self.gamma > -bound) {
            return Err(Error::domain(
                "SelbergParams",
                format!("gamma {} must exceed {}", self.gamma, -bound),
            ));
        }
        Ok(())
    }
}

/// Selberg's integral over [0,1]^n:
/// I(α,β,γ,n) = Π_{j=0}^{n−1} Γ(α+jγ)Γ(β+jγ)Γ(1+(j+1)γ) /
///              [Γ(α+β+(n+j−1)γ)Γ(1+γ)].
pub fn selberg_integral(p: &SelbergParams) -> Result<LogValue> {
    p.validate()?;
    let (a, b, g, nf) = (p.alpha, p.beta, p.gamma, p.n as f64);
    let mut log = 0.0;
    for j in 0..p.n {
        let jf = j as f64;
        log += lgamma(a + jf * g) + lgamma(b + jf * g) + lgamma(1.0 + (jf + 1.0) * g)
            - lgamma(a + b + (nf + jf - 1.0) * g)
            - lgamma(1.0 + g);
    }
    Ok(LogValue::from_log(log))
}

/// Aomoto's moment ratio ⟨x₁⋯x_m⟩ under the Selberg weight:
/// Π_{j=1}^m (α+(n−j)γ)/(α+β+(2n−j−1)γ).
pub fn aomoto_moment(p: &SelbergParams, m: u32) -> Result<f64> {
    p.validate()?;
    if m < 1 || m > p.n {
        return Err(Error::domain(
            "aomoto_moment",
            format!("m must lie in [1, {}], got {m}", p.n),
        ));
    }
    let (a, b, g, nf) = (p.alpha, p.beta, p.gamma, p.n as f64);
    let mut ratio = 1.0;
    for j in 1..=m {
        let jf = j as f64;
        ratio *= (a + (nf - jf) * g) / (a + b + (2.0 * nf - jf - 1.0) * g);
    }
    Ok(ratio)
}

/// Gaussian Selberg limit:
/// ∫_{ℝⁿ} |Δ|^{2γ} Π e^{−a x_j²} dx
///   = (2π)^{n/2} (2a)^{−n(γ(n−1)+1)/2} Π_{j=1}^n Γ(1+jγ)/Γ(1+γ).
pub fn gaussian_selberg(n: u32, gamma: f64, a: f64) -> Result<LogValue> {
    if n == 0 {
        return Err(Error::domain("gaussian_selberg", "n must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain("gaussian_selberg", format!("gamma must be >= 0, got {gamma}")));
    }
    if !(a > 0.0) {
        return Err(Error::domain("gaussian_selberg", format!("a must be positive, got {a}")));
    }
    let nf = n as f64;
    let exponent = nf * (gamma * (nf - 1.0) + 1.0) / 2.0;
    let mut log = 0.5 * nf * (2.0 * std::f64::consts::PI).ln() - exponent * (2.0 * a).ln();
    for j in 1..=n {
        log += lgamma(1.0 + j as f64 * gamma) - lgamma(1.0 + gamma);
    }
    Ok(LogValue::from_log(log))
}

/// ∫_{Σx²≤R²} Δ² dx = R^{n²} Γ(n²/2+1)^{−1} (2π)^{n/2} 2^{−n²/2} Π_{j=1}^n Γ(1+j).
pub fn ball_vandermonde_integral(n: u32, radius: f64) -> Result<LogValue> {
    if n == 0 {
        return Err(Error::domain("ball_vandermonde_integral", "n must be positive"));
    }
    if !(radius > 0.0) {
        return Err(Error::domain(
            "ball_vandermonde_integral",
            format!("radius must be positive, got {radius}"),
        ));
    }
    let nf = n as f64;
    let nsq = nf * nf;
    let mut log = nsq * radius.ln() - lgamma(nsq / 2.0 + 1.0)
        + 0.5 * nf * (2.0 * std::f64::consts::PI).ln()
        - 0.5 * nsq * std::f64::consts::LN_2;
    for j in 1..=n {
        log += lgamma(1.0 + j as f64);
    }
    Ok(LogValue::from_log(log))
}

/// The exponent n(γ(n−1)+1)/2 shared by the Gaussian and ball forms.
pub fn ball_shape_exponent(n: u32, gamma: f64) -> f64 {
    let nf = n as f64;
    nf * (gamma * (nf - 1.0) + 1.0) / 2.0
}

/// ∫_{Σy²≤1} |Δ|^{2γ} (1−Σy²)^{β−c−1} dy with c = n(γ(n−1)+1)/2:
///   = Γ(β−c)/Γ(β) · (2π)^{n/2} · 2^{−c} · Π_{j=1}^n Γ(1+jγ)/Γ(1+γ).
///
/// Requires β > c so the boundary exponent stays integrable.
pub fn generalized_ball_integral(n: u32, gamma: f64, beta: f64) -> Result<LogValue> {
    if n == 0 {
        return Err(Error::domain("generalized_ball_integral", "n must be positive"));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain(
            "generalized_ball_integral",
            format!("gamma must be >= 0, got {gamma}"),
        ));
    }
    let c = ball_shape_exponent(n, gamma);
    if !(beta > c) {
        return Err(Error::domain(
            "generalized_ball_integral",
            format!("integrability requires beta > {c}, got {beta}"),
        ));
    }
    let nf = n as f64;
    let mut log = lgamma(beta - c) - lgamma(beta)
        + 0.5 * nf * (2.0 * std::f64::consts::PI).ln()
        - c * std::f64::consts::LN_2;
    for j in 1..=n {
        log += lgamma(1.0 + j as f64 * gamma) - lgamma(1.0 + gamma);
    }
    Ok(LogValue::from_log(log))
}
