//! Log-gamma helpers. Every Gamma quotient in the crate goes through here.

/// `ln Gamma(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma called with {x}");
    libm::lgamma(x)
}

/// `ln(k!)`.
#[inline]
pub fn ln_factorial(k: u32) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

/// `ln B(a, b)`.
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Log of the Dirichlet integral
/// `int_{Delta_m} (1 - sum rho)^lambda prod rho_j^{b_j} d rho`
/// `= prod Gamma(b_j + 1) Gamma(lambda + 1) / Gamma(sum(b_j + 1) + lambda + 1)`.
pub fn ln_dirichlet(exponents: &[f64], lambda: f64) -> f64 {
    let mut num = ln_gamma(lambda + 1.0);
    let mut total = lambda + 1.0;
    for &b in exponents {
        num += ln_gamma(b + 1.0);
        total += b + 1.0;
    }
    num - ln_gamma(total)
}
