//! Tensor splitting `z = (z', z'')` behind the weighted and degenerate classes.
//!
//! On basis indices the splitting sends `e_alpha` (weight `lambda`, dimension
//! `n`) to `e_{alpha'} (x) e_{alpha''}` with weights `lambda` on `B^{n'}` and
//! `lambda + |alpha'| + n'` on `B^{n''}`. All operators involved are fiber
//! scalars, so the two unitary equivalences reduce to identities between
//! eigenvalue sequences, which is what the `verify_*` functions check.

use std::collections::BTreeMap;

use crate::bergman::{check_lambda, log_normalization, slice_coeff, WeightedSpaceParams};
use crate::error::{Error, Result};
use crate::gamma::GammaEngine;
use crate::lattice::{
    enumerate_labels, enumerate_multi_indices, group_norms, FiberLabel, MultiIndex, Partition,
};
use crate::oracle::{diagonality_report, toeplitz_matrix_bruteforce, BallQuadrature};
use crate::symbol::{SymbolClass, SymbolSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndex {
    pub alpha_prime: MultiIndex,
    pub alpha_dprime: MultiIndex,
    /// Group norms of `alpha'` over `k'`.
    pub beta: FiberLabel,
    /// `lambda + |beta| + n'`.
    pub shifted_lambda: f64,
}

pub fn split(
    alpha: &MultiIndex,
    k_prime: &Partition,
    n_dprime: usize,
    lambda: f64,
) -> Result<SplitIndex> {
    check_lambda(lambda)?;
    let n_prime = k_prime.n();
    if alpha.dim() != n_prime + n_dprime {
        return Err(Error::DimensionMismatch {
            expected: n_prime + n_dprime,
            got: alpha.dim(),
        });
    }
    let (alpha_prime, alpha_dprime) = alpha.split_at(n_prime);
    let beta = group_norms(&alpha_prime, k_prime)?;
    let shifted_lambda = lambda + beta.total() as f64 + n_prime as f64;
    Ok(SplitIndex {
        alpha_prime,
        alpha_dprime,
        beta,
        shifted_lambda,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBlockReport {
    /// Largest spread of `gamma(alpha)` among indices sharing `beta`.
    pub max_spread: f64,
    /// Largest gap between the block scalar and `gamma_{a,k',lambda}(beta)` on `B^{n'}`.
    pub max_deviation: f64,
    /// Same gap measured on brute-force matrices, when requested.
    pub oracle_deviation: Option<f64>,
    pub oracle_off_fiber: Option<f64>,
    /// `beta -> scalar`.
    pub scalars: BTreeMap<FiberLabel, f64>,
    pub indices_checked: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that a weighted symbol acts on `H_beta (x) A^2` as a scalar that
/// depends on `beta` only and equals the quasi-radial eigenvalue on `B^{n'}`.
pub fn verify_scalar_blocks(
    a: &SymbolSpec,
    lambda: f64,
    cap: u32,
    tol: f64,
    oracle: Option<&BallQuadrature>,
) -> Result<ScalarBlockReport> {
    if a.class() != SymbolClass::WeightedQuasiRadial {
        return Err(Error::InvalidSymbol(format!(
            "expected a weighted symbol, got {}",
            a.class()
        )));
    }
    let engine = GammaEngine::default();
    let k_prime = a.reduced_partition()?;
    let n_prime = k_prime.n();
    let n_dprime = a.n() - n_prime;
    let small = SymbolSpec::quasi_radial(k_prime.clone(), a.profile().clone())?;

    let indices = enumerate_multi_indices(a.n(), cap)?;
    let mut range: BTreeMap<FiberLabel, (f64, f64)> = BTreeMap::new();
    for alpha in &indices {
        let sp = split(alpha, &k_prime, n_dprime, lambda)?;
        let g = engine.weighted(a, lambda, alpha)?;
        let e = range.entry(sp.beta).or_insert((g, g));
        e.0 = e.0.min(g);
        e.1 = e.1.max(g);
    }
    let mut max_spread: f64 = 0.0;
    let mut max_deviation: f64 = 0.0;
    let mut scalars = BTreeMap::new();
    for (beta, (lo, hi)) in range {
        max_spread = max_spread.max(hi - lo);
        let reference = engine.quasi_radial(&small, lambda, &beta)?;
        max_deviation = max_deviation
            .max((lo - reference).abs())
            .max((hi - reference).abs());
        scalars.insert(beta, reference);
    }

    let (oracle_deviation, oracle_off_fiber) = match oracle {
        Some(q) => {
            let m = toeplitz_matrix_bruteforce(a, lambda, cap, q)?;
            let rep = diagonality_report(&m, a.partition(), f64::INFINITY)?;
            let mut dev: f64 = 0.0;
            for (s, v) in &rep.fiber_scalars {
                let beta = FiberLabel::new(s.entries()[..s.len() - 1].to_vec());
                dev = dev.max((v - scalars[&beta]).norm());
            }
            (
                Some(dev),
                Some(rep.max_off_fiber.max(rep.max_within_fiber_deviation)),
            )
        }
        None => (None, None),
    };

    let pass = max_spread <= tol
        && max_deviation <= tol
        && oracle_deviation.is_none_or(|d| d <= tol)
        && oracle_off_fiber.is_none_or(|d| d <= tol);
    Ok(ScalarBlockReport {
        max_spread,
        max_deviation,
        oracle_deviation,
        oracle_off_fiber,
        scalars,
        indices_checked: indices.len(),
        tol,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightShiftReport {
    /// Largest `|gamma_{f_b,lambda}(alpha) - gamma_{b,lambda+|alpha'|+n'}(alpha'')|`.
    pub max_deviation: f64,
    /// Label `(s'', |alpha'|)` where the largest deviation occurs.
    pub worst: Option<FiberLabel>,
    pub oracle_deviation: Option<f64>,
    pub atoms_checked: usize,
    pub tol: f64,
    pub pass: bool,
}

/// `f_b(z) = b(z'')` on `B^{n'+n''}` against `b` on `B^{n''}` at the shifted
/// weight. Coordinates are arranged as `(z'', z')`, so `f_b` is a degenerate
/// symbol whose last block is `z'`. Atoms are labels `(s'', |alpha'|)`.
pub fn verify_weight_shift(
    b: &SymbolSpec,
    n_prime: usize,
    lambda: f64,
    cap: u32,
    tol: f64,
    oracle: Option<&BallQuadrature>,
) -> Result<WeightShiftReport> {
    if !matches!(
        b.class(),
        SymbolClass::QuasiRadial | SymbolClass::Radial | SymbolClass::SeparatelyRadial
    ) {
        return Err(Error::InvalidSymbol(format!(
            "the second factor needs a quasi-radial symbol, got {}",
            b.class()
        )));
    }
    if n_prime == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: 0,
        });
    }
    check_lambda(lambda)?;
    let engine = GammaEngine::default();
    let k_dprime = b.partition();
    let f_b = SymbolSpec::new(
        SymbolClass::DegenerateQuasiRadial,
        k_dprime.append(n_prime)?,
        b.profile().clone(),
    )?;
    let m = f_b.partition().m();
    let labels = enumerate_labels(m, cap);
    let mut max_deviation: f64 = 0.0;
    let mut worst = None;
    let mut rhs_values = BTreeMap::new();
    for s in &labels {
        let outer = s.entries()[m - 1];
        let inner = FiberLabel::new(s.entries()[..m - 1].to_vec());
        let shifted = lambda + outer as f64 + n_prime as f64;
        let lhs = engine.at_label(&f_b, lambda, s)?;
        let rhs = engine.at_label(b, shifted, &inner)?;
        let d = (lhs - rhs).abs();
        if worst.is_none() || d > max_deviation {
            max_deviation = max_deviation.max(d);
            worst = Some(s.clone());
        }
        rhs_values.insert(s.clone(), rhs);
    }
    let oracle_deviation = match oracle {
        Some(q) => {
            let mat = toeplitz_matrix_bruteforce(&f_b, lambda, cap, q)?;
            let rep = diagonality_report(&mat, f_b.partition(), f64::INFINITY)?;
            let mut dev = rep.max_off_fiber.max(rep.max_within_fiber_deviation);
            for (s, v) in &rep.fiber_scalars {
                dev = dev.max((v - rhs_values[s]).norm());
            }
            Some(dev)
        }
        None => None,
    };
    Ok(WeightShiftReport {
        pass: max_deviation <= tol && oracle_deviation.is_none_or(|d| d <= tol),
        max_deviation,
        worst,
        oracle_deviation,
        atoms_checked: labels.len(),
        tol,
    })
}

/// Pieces of `||z^alpha||^2` on `A^2_lambda(B^n)` under the splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormFactorization {
    /// `||z^alpha||^2_{lambda, n} = 1 / omega^2`.
    pub direct: f64,
    /// `||z^{alpha'}||^2_{lambda, n'}`.
    pub prime: f64,
    /// `||z^{alpha''}||^2_{lambda + |alpha'| + n', n''}`.
    pub dprime: f64,
    /// Product of slice constants relating the two sides.
    pub chain: f64,
}

impl NormFactorization {
    pub fn factored(&self) -> f64 {
        self.prime * self.dprime * self.chain
    }
}

fn squared_norm(n: usize, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
    Ok((-2.0 * log_normalization(&WeightedSpaceParams::new(n, lambda)?, alpha)?).exp())
}

/// Splits `alpha` after `n_prime` coordinates. Slicing off the coordinates of
/// `alpha'` one at a time gives the chain constant
/// `prod_i c(n - i, lambda_i, alpha_i) / c(n' - i, lambda_i, alpha_i)`,
/// `lambda_i = lambda + sum_{j<i} (alpha_j + 1)`.
pub fn norm_factorization(
    alpha: &MultiIndex,
    n_prime: usize,
    lambda: f64,
) -> Result<NormFactorization> {
    let n = alpha.dim();
    if n_prime == 0 || n_prime >= n {
        return Err(Error::DimensionMismatch {
            expected: n.saturating_sub(1).max(1),
            got: n_prime,
        });
    }
    check_lambda(lambda)?;
    let (alpha_prime, alpha_dprime) = alpha.split_at(n_prime);
    let shifted = lambda + alpha_prime.degree() as f64 + n_prime as f64;
    let mut chain = 1.0;
    let mut lam = lambda;
    for (i, &a) in alpha_prime.entries().iter().enumerate() {
        chain *= slice_coeff(n - i, lam, a) / slice_coeff(n_prime - i, lam, a);
        lam += a as f64 + 1.0;
    }
    Ok(NormFactorization {
        direct: squared_norm(n, lambda, alpha)?,
        prime: squared_norm(n_prime, lambda, &alpha_prime)?,
        dprime: squared_norm(n - n_prime, shifted, &alpha_dprime)?,
        chain,
    })
}
