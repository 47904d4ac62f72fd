//! Closed-form posterior for a single coefficient.
//!
//! With `s = √(τ/c)`, the two half-line integrals of `e^{−τ(cx² − 2wx + 2μ|x|)}`
//! are
//!
//! ```text
//! Z⁺ = ½√(π/(τc))·erfcx(s(μ − w)),   Z⁻ = ½√(π/(τc))·erfcx(s(μ + w)),
//! ```
//!
//! and every quantity below is assembled from their logarithms.

use crate::error::{Error, Result};
use crate::scalar::{log_add_exp, Real};
use crate::special::ln_erfcx;

/// One-dimensional problem `H(x) = cx² − 2wx + 2μ|x|` at inverse temperature `τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneDimProblem<T> {
    pub c: T,
    pub w: T,
    pub mu: T,
    pub tau: T,
}

impl<T: Real> OneDimProblem<T> {
    pub fn new(c: T, w: T, mu: T, tau: T) -> Result<Self> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !(positive(c) && positive(mu) && positive(tau)) || !w.is_finite() {
            return Err(Error::InvalidParameter(format!("one-dimensional problem c={c}, w={w}, mu={mu}, tau={tau}")));
        }
        Ok(Self { c, w, mu, tau })
    }

    fn s(&self) -> T {
        (self.tau / self.c).sqrt()
    }

    /// `ln erfcx(s(μ + w))`, the negative half-line.
    fn ln_minus(&self) -> T {
        ln_erfcx(self.s() * (self.mu + self.w))
    }

    /// `ln erfcx(s(μ − w))`, the positive half-line.
    fn ln_plus(&self) -> T {
        ln_erfcx(self.s() * (self.mu - self.w))
    }

    /// `ln(½√(π/(τc)))`
    fn ln_gauss_half(&self) -> T {
        T::lit(0.5) * (T::PI().ln() - (self.tau * self.c).ln()) - T::LN_2()
    }

    pub fn log_z_exact(&self) -> T {
        log_add_exp(self.ln_minus(), self.ln_plus()) + self.ln_gauss_half()
    }

    /// `P(x ≥ 0) = Z⁺/(Z⁺ + Z⁻)`
    pub fn alpha(&self) -> T {
        let (lm, lp) = (self.ln_minus(), self.ln_plus());
        (lp - log_add_exp(lm, lp)).exp()
    }

    /// `E(x) = w/c + (1 − 2α)μ/c`
    pub fn expectation_exact(&self) -> T {
        // 1 − 2α = (Z⁻ − Z⁺)/(Z⁻ + Z⁺) = tanh((ln Z⁻ − ln Z⁺)/2)
        let one_minus_two_alpha = (T::lit(0.5) * (self.ln_minus() - self.ln_plus())).tanh();
        (self.w + one_minus_two_alpha * self.mu) / self.c
    }

    /// `H(x) = cx² − 2wx + 2μ|x|`
    pub fn energy(&self, x: T) -> T {
        x * (self.c * x - T::lit(2.0) * self.w) + T::lit(2.0) * self.mu * x.abs()
    }

    /// Minimum of `H`, attained at the soft-thresholded `w/c`.
    pub fn h_min(&self) -> T {
        let shrunk = (self.w.abs() - self.mu).max(T::zero());
        -shrunk * shrunk / self.c
    }

    pub fn log_density(&self, x: T) -> T {
        -self.tau * self.energy(x) - self.log_z_exact()
    }

    pub fn density_exact(&self, x: T) -> T {
        self.log_density(x).exp()
    }

    /// `P(X ≤ x)`, from the tail integrals of the two Gaussian pieces.
    pub fn cdf_exact(&self, x: T) -> T {
        let root = (self.tau * self.c).sqrt();
        let tail_base = self.ln_gauss_half() - self.tau * self.energy(x) - self.log_z_exact();
        if x < T::zero() {
            let mean = (self.w + self.mu) / self.c;
            (tail_base + ln_erfcx(root * (mean - x))).exp()
        } else {
            let mean = (self.w - self.mu) / self.c;
            T::one() - (tail_base + ln_erfcx(root * (x - mean))).exp()
        }
    }
}
