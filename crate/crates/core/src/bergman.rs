//! Weighted Bergman space `A^2_lambda(B^n)`: measure constant, the normalized
//! monomial basis, the degree-`l` projection kernels and the slice norm identity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::MultiIndex;
use crate::special::{ln_factorial, ln_gamma};

/// Points with `|z|^2` at or above this are rejected.
pub const INTERIOR_LIMIT_SQ: f64 = (1.0 - 1e-14) * (1.0 - 1e-14);

/// Dimension and weight of `A^2_lambda(B^n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedSpaceParams {
    n: usize,
    lambda: f64,
}

impl WeightedSpaceParams {
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        check_lambda(lambda)?;
        Ok(WeightedSpaceParams { n, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > -1.0 {
        Ok(())
    } else {
        Err(Error::InvalidWeight(lambda))
    }
}

/// `ln c_lambda` with `c_lambda = Gamma(n + lambda + 1) / (pi^n Gamma(lambda + 1))`,
/// the constant making `c_lambda (1 - |z|^2)^lambda dV` a probability measure.
pub fn measure_log_constant(params: &WeightedSpaceParams) -> f64 {
    let n = params.n as f64;
    ln_gamma(n + params.lambda + 1.0)
        - n * std::f64::consts::PI.ln()
        - ln_gamma(params.lambda + 1.0)
}

/// `ln omega_{lambda, alpha}` where
/// `omega^2 = Gamma(n + |alpha| + lambda + 1) / (alpha! Gamma(n + lambda + 1))`.
pub fn log_normalization(params: &WeightedSpaceParams, alpha: &MultiIndex) -> Result<f64> {
    if alpha.dim() != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            got: alpha.dim(),
        });
    }
    let n = params.n as f64;
    let lam = params.lambda;
    Ok(0.5
        * (ln_gamma(n + alpha.degree() as f64 + lam + 1.0)
            - alpha.ln_factorial()
            - ln_gamma(n + lam + 1.0)))
}

/// Rejects points outside the open ball (with a `1e-14` margin).
pub fn check_point(z: &[Complex64]) -> Result<f64> {
    let norm_sq: f64 = z.iter().map(|c| c.norm_sqr()).sum();
    if norm_sq.is_finite() && norm_sq < INTERIOR_LIMIT_SQ {
        Ok(norm_sq)
    } else {
        Err(Error::OutsideBall { norm_sq })
    }
}

/// `z^alpha`, without any range check.
pub fn monomial(alpha: &[u32], z: &[Complex64]) -> Complex64 {
    alpha
        .iter()
        .zip(z)
        .fold(Complex64::new(1.0, 0.0), |acc, (&a, &zj)| acc * zj.powu(a))
}

/// Normalized basis element `e_alpha = omega_alpha z^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    alpha: MultiIndex,
    params: WeightedSpaceParams,
    log_norm_const: f64,
}

impl BasisElement {
    pub fn new(params: WeightedSpaceParams, alpha: MultiIndex) -> Result<Self> {
        let log_norm_const = log_normalization(&params, &alpha)?;
        Ok(BasisElement {
            alpha,
            params,
            log_norm_const,
        })
    }

    pub fn alpha(&self) -> &MultiIndex {
        &self.alpha
    }

    pub fn params(&self) -> &WeightedSpaceParams {
        &self.params
    }

    pub fn log_norm_const(&self) -> f64 {
        self.log_norm_const
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.params.n {
            return Err(Error::DimensionMismatch {
                expected: self.params.n,
                got: z.len(),
            });
        }
        check_point(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        monomial(self.alpha.entries(), z) * self.log_norm_const.exp()
    }
}

/// Kernel of the orthogonal projection onto homogeneous polynomials of degree `ell`:
/// `P_l(z, zeta) = Gamma(n + l + lambda + 1) / (l! Gamma(n + lambda + 1)) <z, zeta>^l`
/// with `<z, zeta> = sum z_j conj(zeta_j)`.
pub fn projection_kernel(
    params: &WeightedSpaceParams,
    ell: u32,
    z: &[Complex64],
    zeta: &[Complex64],
) -> Result<Complex64> {
    for p in [z, zeta] {
        if p.len() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                got: p.len(),
            });
        }
        check_point(p)?;
    }
    let n = params.n as f64;
    let lam = params.lambda;
    let coeff =
        (ln_gamma(n + ell as f64 + lam + 1.0) - ln_factorial(ell) - ln_gamma(n + lam + 1.0)).exp();
    let inner: Complex64 = z.iter().zip(zeta).map(|(a, b)| a * b.conj()).sum();
    Ok(inner.powu(ell) * coeff)
}

/// Constant `c` in `||z_j^l h||^2_{A_lambda(B^n)} = c ||h||^2_{A_{lambda+l+1}(B^{n-1})}`
/// for `h` independent of `z_j`, both norms taken against probability measures:
/// `c = Gamma(n + lambda + 1) Gamma(l + 1) / Gamma(n + l + lambda + 1)`.
pub fn norm_change_coeff(params: &WeightedSpaceParams, ell: u32) -> Result<f64> {
    if params.n < 2 {
        return Err(Error::Unsupported(
            "norm change needs n >= 2 (no complementary ball for n = 1)".into(),
        ));
    }
    Ok(slice_coeff(params.n, params.lambda, ell))
}

/// Same constant without the `n >= 2` restriction; for `n = 1` the
/// complementary ball degenerates to a point of unit mass.
pub(crate) fn slice_coeff(n: usize, lambda: f64, ell: u32) -> f64 {
    let n = n as f64;
    (ln_gamma(n + lambda + 1.0) + ln_factorial(ell) - ln_gamma(n + ell as f64 + lambda + 1.0)).exp()
}
