//! Eigenvalue sequences `gamma(s)` of Toeplitz operators with invariant symbols.
//!
//! Every class reduces to the same shape,
//!
//! ```text
//! gamma(s) = exp(ln_prefactor(s)) * int_{Delta} f(rho) (1 - sum rho)^lambda_eff prod rho_j^{b_j} d rho
//! ```
//!
//! with class-specific prefactor, effective weight and exponents:
//!
//! * quasi-radial on `k`: prefactor `Gamma(n+|s|+lambda+1) / (Gamma(lambda+1) prod Gamma(k_j+s_j))`,
//!   `lambda_eff = lambda`, `b_j = s_j + k_j - 1`;
//! * weighted on `(k', k_m)`: the quasi-radial formula on the smaller ball `B^{n'}` with
//!   partition `k'`, evaluated at `s' = (s_1, ..., s_{m-1})`; `s_m` is never read;
//! * degenerate on `(k', k_m)`: prefactor
//!   `Gamma(n+|s|+lambda+1) / (Gamma(lambda+s_m+k_m+1) prod_{j<m} Gamma(k_j+s_j))`,
//!   `lambda_eff = lambda + s_m + k_m`.
//!
//! Polynomial profiles use the Dirichlet closed form per term. Callable profiles
//! go through the stick-breaking Gauss–Jacobi rule, refined once to detect
//! non-convergence.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bergman::check_lambda;
use crate::error::{Error, Result};
use crate::lattice::{enumerate_labels, group_norms, FiberLabel, MultiIndex, Partition};
use crate::quadrature::{SimplexRule, DEFAULT_NODES};
use crate::special::{ln_dirichlet, ln_gamma};
use crate::symbol::{Profile, SymbolClass, SymbolSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptions {
    /// Nodes per simplex axis for the first estimate.
    pub nodes: usize,
    /// Recompute with twice the nodes and compare.
    pub refine: bool,
    /// Relative disagreement that counts as non-convergence.
    pub rel_tol: f64,
    /// Integrate polynomial profiles with the quadrature rule instead of the
    /// closed form. Fractional exponent parts are absorbed into the rule.
    pub force_quadrature: bool,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            nodes: DEFAULT_NODES,
            refine: true,
            rel_tol: 1e-9,
            force_quadrature: false,
        }
    }
}

/// Evaluator for `gamma` with fixed quadrature options.
#[derive(Debug, Clone, Copy, Default)]
pub struct GammaEngine {
    options: GammaOptions,
}

/// Diagonal of a Toeplitz operator on fibers, up to a degree cap.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSequence {
    partition: Partition,
    lambda: f64,
    cap: u32,
    class: Option<SymbolClass>,
    values: BTreeMap<FiberLabel, f64>,
}

impl GammaSequence {
    /// Wraps externally supplied values; every label with `|s| <= cap` must be present.
    pub fn from_values(
        partition: Partition,
        lambda: f64,
        cap: u32,
        class: Option<SymbolClass>,
        values: BTreeMap<FiberLabel, f64>,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        let labels = enumerate_labels(partition.m(), cap);
        if values.len() != labels.len() {
            return Err(Error::MetadataMismatch(format!(
                "expected {} labels for cap {cap}, got {}",
                labels.len(),
                values.len()
            )));
        }
        for s in &labels {
            match values.get(s) {
                Some(v) if v.is_finite() => {}
                Some(v) => {
                    return Err(Error::NonFinite {
                        value: *v,
                        node: s.entries().iter().map(|&x| x as f64).collect(),
                    })
                }
                None => {
                    return Err(Error::MetadataMismatch(format!("missing label {s}")));
                }
            }
        }
        Ok(GammaSequence {
            partition,
            lambda,
            cap,
            class,
            values,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn class(&self) -> Option<SymbolClass> {
        self.class
    }

    pub fn get(&self, s: &FiberLabel) -> Option<f64> {
        self.values.get(s).copied()
    }

    /// Value on the fiber containing `alpha`.
    pub fn at_index(&self, alpha: &MultiIndex) -> Result<f64> {
        let s = group_norms(alpha, &self.partition)?;
        self.get(&s).ok_or(Error::CapExceeded {
            label: s.entries().to_vec(),
            cap: self.cap,
        })
    }

    /// Labels and values in graded-lex order.
    pub fn iter(&self) -> impl Iterator<Item = (&FiberLabel, f64)> {
        self.values.iter().map(|(s, &v)| (s, v))
    }

    pub fn values(&self) -> &BTreeMap<FiberLabel, f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the value never changes with the last label component.
    pub fn is_flat_in_last(&self, tol: f64) -> bool {
        let m = self.partition.m();
        self.values.iter().all(|(s, &v)| {
            let mut base = s.entries().to_vec();
            base[m - 1] = 0;
            let v0 = self.values[&FiberLabel::new(base)];
            (v - v0).abs() <= tol
        })
    }
}

impl GammaEngine {
    pub fn new(options: GammaOptions) -> Self {
        GammaEngine { options }
    }

    pub fn options(&self) -> &GammaOptions {
        &self.options
    }

    /// `gamma_{a,k,lambda}(s)` for a quasi-radial symbol.
    pub fn quasi_radial(&self, a: &SymbolSpec, lambda: f64, s: &FiberLabel) -> Result<f64> {
        expect_class(a, SymbolClass::QuasiRadial)?;
        self.quasi_radial_formula(a.partition(), a.profile(), lambda, s.entries())
    }

    /// `gamma_a(alpha)` for a separately radial symbol; the quasi-radial
    /// formula with `k = (1, ..., 1)` and `s = alpha`.
    pub fn separately_radial(
        &self,
        a: &SymbolSpec,
        lambda: f64,
        alpha: &MultiIndex,
    ) -> Result<f64> {
        expect_class(a, SymbolClass::SeparatelyRadial)?;
        if alpha.dim() != a.n() {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                got: alpha.dim(),
            });
        }
        self.quasi_radial_formula(a.partition(), a.profile(), lambda, alpha.entries())
    }

    /// `gamma_a(l)` for a radial symbol; `k = (n)`, `s = (l)`.
    pub fn radial(&self, a: &SymbolSpec, lambda: f64, ell: u32) -> Result<f64> {
        expect_class(a, SymbolClass::Radial)?;
        self.quasi_radial_formula(a.partition(), a.profile(), lambda, &[ell])
    }

    /// `gamma_{a_w,k',lambda}(alpha)`; only `alpha'` (the first `n'` entries) is read.
    pub fn weighted(&self, a: &SymbolSpec, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
        expect_class(a, SymbolClass::WeightedQuasiRadial)?;
        let k_prime = a.reduced_partition()?;
        let n_prime = k_prime.n();
        if alpha.dim() < n_prime {
            return Err(Error::DimensionMismatch {
                expected: a.n(),
                got: alpha.dim(),
            });
        }
        let alpha_prime = MultiIndex::new(alpha.entries()[..n_prime].to_vec());
        let s_prime = group_norms(&alpha_prime, &k_prime)?;
        self.quasi_radial_formula(&k_prime, a.profile(), lambda, s_prime.entries())
    }

    /// `gamma_{a,k',lambda}(alpha)` for a symbol independent of the last block.
    pub fn degenerate(&self, a: &SymbolSpec, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
        expect_class(a, SymbolClass::DegenerateQuasiRadial)?;
        let s = group_norms(alpha, a.partition())?;
        self.degenerate_formula(a.partition(), a.profile(), lambda, s.entries())
    }

    /// Class dispatch on a fiber label of `a.partition()`.
    pub fn at_label(&self, a: &SymbolSpec, lambda: f64, s: &FiberLabel) -> Result<f64> {
        let k = a.partition();
        if s.len() != k.m() {
            return Err(Error::DimensionMismatch {
                expected: k.m(),
                got: s.len(),
            });
        }
        match a.class() {
            SymbolClass::SeparatelyRadial | SymbolClass::Radial | SymbolClass::QuasiRadial => {
                self.quasi_radial_formula(k, a.profile(), lambda, s.entries())
            }
            SymbolClass::WeightedQuasiRadial => {
                let k_prime = a.reduced_partition()?;
                self.quasi_radial_formula(&k_prime, a.profile(), lambda, &s.entries()[..k.m() - 1])
            }
            SymbolClass::DegenerateQuasiRadial => {
                self.degenerate_formula(k, a.profile(), lambda, s.entries())
            }
        }
    }

    /// `gamma` on every label with `|s| <= cap`, evaluated in parallel.
    pub fn build_sequence(&self, a: &SymbolSpec, lambda: f64, cap: u32) -> Result<GammaSequence> {
        check_lambda(lambda)?;
        let labels = enumerate_labels(a.partition().m(), cap);
        let computed: Vec<Result<(FiberLabel, f64)>> = labels
            .into_par_iter()
            .map(|s| match self.at_label(a, lambda, &s) {
                Ok(v) => Ok((s, v)),
                Err(e) => Err(e.at_label(s.entries())),
            })
            .collect();
        let mut values = BTreeMap::new();
        for item in computed {
            let (s, v) = item?;
            values.insert(s, v);
        }
        Ok(GammaSequence {
            partition: a.partition().clone(),
            lambda,
            cap,
            class: Some(a.class()),
            values,
        })
    }

    fn quasi_radial_formula(
        &self,
        k: &Partition,
        profile: &Profile,
        lambda: f64,
        s: &[u32],
    ) -> Result<f64> {
        check_lambda(lambda)?;
        if s.len() != k.m() {
            return Err(Error::DimensionMismatch {
                expected: k.m(),
                got: s.len(),
            });
        }
        let n = k.n() as f64;
        let total: f64 = s.iter().map(|&x| x as f64).sum();
        let mut ln_prefactor = ln_gamma(n + total + lambda + 1.0) - ln_gamma(lambda + 1.0);
        let mut exponents = Vec::with_capacity(s.len());
        for (&kj, &sj) in k.blocks().iter().zip(s) {
            ln_prefactor -= ln_gamma(kj as f64 + sj as f64);
            exponents.push(sj as f64 + kj as f64 - 1.0);
        }
        self.simplex_gamma(ln_prefactor, profile, lambda, &exponents)
    }

    fn degenerate_formula(
        &self,
        k: &Partition,
        profile: &Profile,
        lambda: f64,
        s: &[u32],
    ) -> Result<f64> {
        check_lambda(lambda)?;
        let m = k.m();
        if s.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: s.len(),
            });
        }
        let n = k.n() as f64;
        let total: f64 = s.iter().map(|&x| x as f64).sum();
        let k_last = k.blocks()[m - 1] as f64;
        let lambda_eff = lambda + s[m - 1] as f64 + k_last;
        let mut ln_prefactor = ln_gamma(n + total + lambda + 1.0) - ln_gamma(lambda_eff + 1.0);
        let mut exponents = Vec::with_capacity(m - 1);
        for (&kj, &sj) in k.blocks()[..m - 1].iter().zip(&s[..m - 1]) {
            ln_prefactor -= ln_gamma(kj as f64 + sj as f64);
            exponents.push(sj as f64 + kj as f64 - 1.0);
        }
        self.simplex_gamma(ln_prefactor, profile, lambda_eff, &exponents)
    }

    fn simplex_gamma(
        &self,
        ln_prefactor: f64,
        profile: &Profile,
        lambda_eff: f64,
        exponents: &[f64],
    ) -> Result<f64> {
        match profile {
            Profile::Polynomial { terms, .. } => {
                let mut acc = 0.0;
                for t in terms {
                    if t.coef == 0.0 {
                        continue;
                    }
                    let value = if self.options.force_quadrature {
                        // fractional parts go into the weights, integer powers are integrated
                        let whole: Vec<i32> = t
                            .exponents
                            .iter()
                            .map(|p| p.max(0.0).floor() as i32)
                            .collect();
                        let b: Vec<f64> = exponents
                            .iter()
                            .zip(&t.exponents)
                            .zip(&whole)
                            .map(|((b, p), &w)| b + p - w as f64)
                            .collect();
                        let degree: i32 = whole.iter().sum();
                        let nodes = self.options.nodes.min(degree as usize / 2 + 2);
                        let rule = SimplexRule::new(nodes, lambda_eff, &b)?;
                        let mean = rule.mean(|rho| {
                            rho.iter().zip(&whole).map(|(r, &e)| r.powi(e)).product()
                        })?;
                        mean * (ln_prefactor + rule.ln_mass()).exp()
                    } else {
                        let b: Vec<f64> = exponents
                            .iter()
                            .zip(&t.exponents)
                            .map(|(b, p)| b + p)
                            .collect();
                        (ln_prefactor + ln_dirichlet(&b, lambda_eff)).exp()
                    };
                    acc += t.coef * value;
                }
                Ok(acc)
            }
            Profile::Callable { .. } => {
                let eval = |nodes: usize| -> Result<f64> {
                    let rule = SimplexRule::new(nodes, lambda_eff, exponents)?;
                    let mean = rule.mean(|rho| profile.eval(rho))?;
                    Ok(mean * (ln_prefactor + rule.ln_mass()).exp())
                };
                let coarse = eval(self.options.nodes)?;
                if !self.options.refine {
                    return Ok(coarse);
                }
                let fine_nodes = 2 * self.options.nodes;
                let fine = eval(fine_nodes)?;
                let diff = (fine - coarse).abs();
                if diff > self.options.rel_tol * fine.abs().max(coarse.abs()) && diff > 1e-15 {
                    return Err(Error::NonConvergence {
                        coarse,
                        fine,
                        coarse_nodes: self.options.nodes,
                        fine_nodes,
                    });
                }
                Ok(fine)
            }
        }
    }
}

fn expect_class(a: &SymbolSpec, class: SymbolClass) -> Result<()> {
    if a.class() == class {
        Ok(())
    } else {
        Err(Error::InvalidSymbol(format!(
            "expected a {class} symbol, got {}",
            a.class()
        )))
    }
}

pub fn gamma_quasi_radial(a: &SymbolSpec, lambda: f64, s: &FiberLabel) -> Result<f64> {
    GammaEngine::default().quasi_radial(a, lambda, s)
}

pub fn gamma_separately_radial(a: &SymbolSpec, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
    GammaEngine::default().separately_radial(a, lambda, alpha)
}

pub fn gamma_radial(a: &SymbolSpec, lambda: f64, ell: u32) -> Result<f64> {
    GammaEngine::default().radial(a, lambda, ell)
}

pub fn gamma_weighted(a: &SymbolSpec, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
    GammaEngine::default().weighted(a, lambda, alpha)
}

pub fn gamma_degenerate(a: &SymbolSpec, lambda: f64, alpha: &MultiIndex) -> Result<f64> {
    GammaEngine::default().degenerate(a, lambda, alpha)
}

pub fn build_gamma_sequence(a: &SymbolSpec, lambda: f64, cap: u32) -> Result<GammaSequence> {
    GammaEngine::default().build_sequence(a, lambda, cap)
}
