//! Gauss–Jacobi rules on `[0, 1]` and the stick-breaking simplex rule built from them.
//!
//! Nodes come from the eigenvalues of the Jacobi matrix (implicit QL on the
//! tridiagonal), polished by Newton steps on the three-term recurrence. Weights
//! use the Christoffel formula, normalized so that they sum to one; the total
//! mass of the weight function is carried separately in log form.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special::ln_beta;

/// Default number of nodes per simplex axis.
pub const DEFAULT_NODES: usize = 64;

/// Gauss rule for `int_0^1 f(t) t^beta (1 - t)^alpha dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    alpha: f64,
    beta: f64,
    ln_mass: f64,
}

impl JacobiRule {
    /// `alpha` is the exponent of `(1 - t)`, `beta` the exponent of `t`.
    pub fn new(q: usize, alpha: f64, beta: f64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidQuadrature("need at least one node".into()));
        }
        if !(alpha.is_finite() && alpha > -1.0 && beta.is_finite() && beta > -1.0) {
            return Err(Error::InvalidQuadrature(format!(
                "Jacobi exponents must exceed -1 (alpha = {alpha}, beta = {beta})"
            )));
        }
        let rec = Recurrence::new(q, alpha, beta);
        let mut diag: Vec<f64> = (0..q).map(|k| rec.diag[k]).collect();
        let mut off: Vec<f64> = (0..q)
            .map(|k| if k + 1 < q { rec.off[k + 1] } else { 0.0 })
            .collect();
        tridiagonal_eigenvalues(&mut diag, &mut off)?;

        let mut nodes = Vec::with_capacity(q);
        let mut weights = Vec::with_capacity(q);
        for &guess in &diag {
            let x = rec.polish(guess);
            let sum_sq = rec.sum_of_squares(x);
            nodes.push(x);
            weights.push(1.0 / sum_sq);
        }
        let mut pairs: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        Ok(JacobiRule {
            nodes: pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
            alpha,
            beta,
            ln_mass: ln_beta(beta + 1.0, alpha + 1.0),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights of the probability-normalized weight function (they sum to 1).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ln B(beta + 1, alpha + 1)`, the log of the weight's total mass.
    pub fn ln_mass(&self) -> f64 {
        self.ln_mass
    }

    /// `int_0^1 f(t) t^beta (1 - t)^alpha dt`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum();
        s * self.ln_mass.exp()
    }
}

/// Three-term recurrence of the Jacobi polynomials orthonormal with respect to
/// the probability measure proportional to `(1 - x)^a (1 + x)^b` on `[-1, 1]`.
struct Recurrence {
    diag: Vec<f64>,
    /// `off[k] = sqrt(beta_k)` for k >= 1; `off[0]` unused.
    off: Vec<f64>,
    q: usize,
}

impl Recurrence {
    fn new(q: usize, a: f64, b: f64) -> Self {
        let mut diag = Vec::with_capacity(q + 1);
        let mut off = vec![0.0; q + 1];
        for k in 0..=q {
            let kf = k as f64;
            let s = 2.0 * kf + a + b;
            diag.push(if k == 0 {
                (b - a) / (a + b + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            });
            if k >= 1 {
                let beta_k = if k == 1 {
                    4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b).powi(2) * (3.0 + a + b))
                } else {
                    4.0 * kf * (kf + a) * (kf + b) * (kf + a + b) / (s * s * (s + 1.0) * (s - 1.0))
                };
                off[k] = beta_k.sqrt();
            }
        }
        Recurrence { diag, off, q }
    }

    /// Returns `(p_q(x), p_q'(x))`.
    fn eval_top(&self, x: f64) -> (f64, f64) {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let (mut d_prev, mut d) = (0.0, 0.0);
        for k in 0..self.q {
            let c = self.off[k + 1];
            let prev_off = if k == 0 { 0.0 } else { self.off[k] };
            let p_next = ((x - self.diag[k]) * p - prev_off * p_prev) / c;
            let d_next = (p + (x - self.diag[k]) * d - prev_off * d_prev) / c;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d)
    }

    fn polish(&self, mut x: f64) -> f64 {
        for _ in 0..4 {
            let (p, d) = self.eval_top(x);
            if d == 0.0 || !d.is_finite() || !p.is_finite() {
                break;
            }
            let step = p / d;
            let cand = x - step;
            if !(-1.0..=1.0).contains(&cand) || step.abs() > 1e-3 {
                break;
            }
            x = cand;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x
    }

    /// `sum_{k < q} p_k(x)^2`.
    fn sum_of_squares(&self, x: f64) -> f64 {
        let (mut p_prev, mut p) = (0.0, 1.0);
        let mut acc = 1.0;
        for k in 0..self.q - 1 {
            let prev_off = if k == 0 { 0.0 } else { self.off[k] };
            let p_next = ((x - self.diag[k]) * p - prev_off * p_prev) / self.off[k + 1];
            p_prev = p;
            p = p_next;
            acc += p * p;
        }
        acc
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e[i]` couples `i` and `i + 1`; the last entry is ignored).
/// Implicit QL with Wilkinson shifts; results overwrite `d`.
fn tridiagonal_eigenvalues(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::InvalidQuadrature(
                    "tridiagonal eigenvalue iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Product rule for
/// `int_{Delta_m} f(rho) (1 - sum rho)^lambda_eff prod rho_j^{b_j} d rho`
/// under the stick-breaking map `rho_j = t_j prod_{i<j} (1 - t_i)`.
///
/// With this map `1 - sum rho = prod (1 - t_i)` and the Jacobian is
/// `prod (1 - t_i)^{m - i}`, so axis `i` carries the Jacobi weight
/// `t^{b_i} (1 - t)^{lambda_eff + (m - i) + sum_{j > i} b_j}` (1-based `i`)
/// and every power weight is absorbed into the per-axis rules.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    axes: Vec<JacobiRule>,
    lambda_eff: f64,
    exponents: Vec<f64>,
}

impl SimplexRule {
    pub fn new(nodes_per_axis: usize, lambda_eff: f64, exponents: &[f64]) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidQuadrature("simplex of dimension 0".into()));
        }
        if !(lambda_eff > -1.0) {
            return Err(Error::InvalidQuadrature(format!(
                "lambda_eff must exceed -1, got {lambda_eff}"
            )));
        }
        if let Some(b) = exponents.iter().find(|&&b| !(b > -1.0)) {
            return Err(Error::InvalidQuadrature(format!(
                "exponent {b} makes the integral divergent"
            )));
        }
        let m = exponents.len();
        let mut axes = Vec::with_capacity(m);
        for i in 0..m {
            let tail: f64 = exponents[i + 1..].iter().sum();
            let alpha = lambda_eff + (m - 1 - i) as f64 + tail;
            axes.push(JacobiRule::new(nodes_per_axis, alpha, exponents[i])?);
        }
        Ok(SimplexRule {
            axes,
            lambda_eff,
            exponents: exponents.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.axes[0].len()
    }

    pub fn axes(&self) -> &[JacobiRule] {
        &self.axes
    }

    pub fn lambda_eff(&self) -> f64 {
        self.lambda_eff
    }

    pub fn exponents(&self) -> &[f64] {
        &self.exponents
    }

    /// Log of the total mass of the weight, i.e. the Dirichlet integral.
    pub fn ln_mass(&self) -> f64 {
        self.axes.iter().map(JacobiRule::ln_mass).sum()
    }

    /// Weighted mean of `profile` under the normalized simplex weight.
    /// Multiply by `exp(ln_mass())` for the integral.
    pub fn mean<F>(&self, profile: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let first = &self.axes[0];
        let partials: Vec<Result<f64>> = first
            .nodes()
            .par_iter()
            .zip(first.weights())
            .map(|(&t, &w)| {
                let mut rho = vec![0.0; self.dim()];
                rho[0] = t;
                self.accumulate(1, 1.0 - t, w, &mut rho, &profile)
            })
            .collect();
        let mut total = 0.0;
        for p in partials {
            total += p?;
        }
        Ok(total)
    }

    fn accumulate<F>(
        &self,
        axis: usize,
        remaining: f64,
        weight: f64,
        rho: &mut [f64],
        profile: &F,
    ) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64,
    {
        if axis == self.dim() {
            let v = profile(rho);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    node: rho.to_vec(),
                });
            }
            return Ok(weight * v);
        }
        let rule = &self.axes[axis];
        let mut acc = 0.0;
        for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
            rho[axis] = remaining * t;
            acc += self.accumulate(axis + 1, remaining * (1.0 - t), weight * w, rho, profile)?;
        }
        Ok(acc)
    }
}

/// `int_{Delta_m} profile(rho) (1 - sum rho)^lambda_eff prod rho_j^{b_j} d rho`
/// evaluated with `rule`, which must have been built for the same
/// `lambda_eff` and exponents.
pub fn simplex_integrate<F>(rule: &SimplexRule, profile: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(rule.mean(profile)? * rule.ln_mass().exp())
}
