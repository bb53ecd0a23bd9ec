//! Brute-force verification by direct integration over the ball.
//!
//! Nothing here uses the eigenvalue formulas of [`crate::gamma`]: matrix
//! entries `<a e_alpha, e_beta>` are integrals of the symbol, evaluated
//! pointwise through its class mapping, against the basis functions.
//!
//! Tensor mode writes each coordinate as `z_j = r_j e^{i theta_j}`. Angles use a
//! uniform grid, exact for trigonometric polynomials of degree below the grid
//! size. Radii are sliced from the last coordinate to the first,
//! `r_c = R t`, `R' = R sqrt(1 - t^2)`, so the weight on each slice variable is
//! `t (1 - t^2)^{lambda + n - 1 - i}`; the `(1 - t)^lambda` factor is absorbed
//! into a Gauss–Jacobi rule and the rest is evaluated. Monte Carlo mode samples
//! the ball uniformly with a fixed seed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bergman::{check_lambda, log_normalization, measure_log_constant, WeightedSpaceParams};
use crate::error::{Error, Result};
use crate::gamma::GammaSequence;
use crate::lattice::{
    enumerate_multi_indices, group_norms, truncation_size, FiberLabel, MultiIndex, Partition,
};
use crate::quadrature::JacobiRule;
use crate::special::ln_gamma;
use crate::symbol::SymbolSpec;

pub const DEFAULT_RADIAL_NODES: usize = 24;
pub const TENSOR_TOLERANCE: f64 = 1e-9;
/// Largest dimension accepted by tensor-mode matrix assembly.
pub const MAX_TENSOR_DIM: usize = 3;

const MC_CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureMode {
    Tensor { radial_nodes: usize, angular: usize },
    MonteCarlo { seed: u64, samples: usize },
}

/// Integration scheme for `A^2_lambda(B^n)` inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallQuadrature {
    n: usize,
    mode: QuadratureMode,
}

impl BallQuadrature {
    pub fn tensor(n: usize, radial_nodes: usize, angular: usize) -> Result<Self> {
        if n == 0 || radial_nodes == 0 || angular == 0 {
            return Err(Error::InvalidQuadrature(
                "tensor quadrature needs n, radial nodes and angular grid size >= 1".into(),
            ));
        }
        Ok(BallQuadrature {
            n,
            mode: QuadratureMode::Tensor {
                radial_nodes,
                angular,
            },
        })
    }

    /// Tensor rule whose angular grid is exact for matrices up to degree `cap`.
    pub fn for_degree(n: usize, cap: u32) -> Result<Self> {
        BallQuadrature::tensor(n, DEFAULT_RADIAL_NODES, 2 * cap as usize + 2)
    }

    pub fn monte_carlo(n: usize, seed: u64, samples: usize) -> Result<Self> {
        if n == 0 || samples == 0 {
            return Err(Error::InvalidQuadrature(
                "Monte Carlo needs n >= 1 and samples >= 1".into(),
            ));
        }
        Ok(BallQuadrature {
            n,
            mode: QuadratureMode::MonteCarlo { seed, samples },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> QuadratureMode {
        self.mode
    }

    /// Same rule with twice the radial nodes (tensor mode only).
    pub fn refined(&self) -> Self {
        match self.mode {
            QuadratureMode::Tensor {
                radial_nodes,
                angular,
            } => BallQuadrature {
                n: self.n,
                mode: QuadratureMode::Tensor {
                    radial_nodes: 2 * radial_nodes,
                    angular,
                },
            },
            QuadratureMode::MonteCarlo { .. } => *self,
        }
    }

    /// Default pass/fail tolerance for checks built on this rule.
    pub fn tolerance(&self) -> f64 {
        match self.mode {
            QuadratureMode::Tensor { .. } => TENSOR_TOLERANCE,
            QuadratureMode::MonteCarlo { samples, .. } => 5.0 / (samples as f64).sqrt(),
        }
    }

    pub fn describe(&self) -> String {
        match self.mode {
            QuadratureMode::Tensor {
                radial_nodes,
                angular,
            } => {
                format!(
                    "tensor(n={}, radial={radial_nodes}, angular={angular})",
                    self.n
                )
            }
            QuadratureMode::MonteCarlo { seed, samples } => {
                format!("monte-carlo(n={}, seed={seed}, samples={samples})", self.n)
            }
        }
    }

    /// Radial slice nodes: radii per coordinate and the weight (measure
    /// constant included, angular factor excluded).
    fn radial_nodes(&self, lambda: f64, q: usize) -> Result<Vec<(Vec<f64>, f64)>> {
        let n = self.n;
        let params = WeightedSpaceParams::new(n, lambda)?;
        let rule = JacobiRule::new(q, lambda, 0.0)?;
        let mass = rule.ln_mass().exp();
        let axis: Vec<Vec<(f64, f64, f64)>> = (0..n)
            .map(|i| {
                let extra = (n - 1 - i) as i32;
                rule.nodes()
                    .iter()
                    .zip(rule.weights())
                    .map(|(&t, &w)| {
                        let f = t * (1.0 + t).powf(lambda) * (1.0 - t * t).powi(extra);
                        (t, w * mass * f, (1.0 - t * t).sqrt())
                    })
                    .collect()
            })
            .collect();
        let mut out = vec![(vec![0.0; n], measure_log_constant(&params).exp(), 1.0)];
        for (i, ax) in axis.iter().enumerate() {
            let coord = n - 1 - i;
            let mut next = Vec::with_capacity(out.len() * ax.len());
            for (r, w, big_r) in &out {
                for &(t, wt, shrink) in ax {
                    let mut r2 = r.clone();
                    r2[coord] = big_r * t;
                    next.push((r2, w * wt, big_r * shrink));
                }
            }
            out = next;
        }
        Ok(out.into_iter().map(|(r, w, _)| (r, w)).collect())
    }
}

fn angles(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|q| Complex64::from_polar(1.0, 2.0 * PI * q as f64 / m as f64))
        .collect()
}

/// Decodes a flat angular index into per-coordinate grid indices.
fn unflatten(mut idx: usize, m: usize, n: usize, out: &mut [usize]) {
    for j in (0..n).rev() {
        out[j] = idx % m;
        idx /= m;
    }
}

fn uniform_ball_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let g: Vec<f64> = (0..2 * n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u: f64 = rng.random::<f64>();
    let radius = u.powf(1.0 / (2 * n) as f64);
    (0..n)
        .map(|j| Complex64::new(g[2 * j], g[2 * j + 1]) * (radius / norm))
        .collect()
}

/// `Gamma(n + lambda + 1) / (Gamma(lambda + 1) n!)` = `c_lambda * vol(B^n)`.
fn mc_scale(n: usize, lambda: f64) -> f64 {
    (ln_gamma(n as f64 + lambda + 1.0) - ln_gamma(lambda + 1.0) - ln_gamma(n as f64 + 1.0)).exp()
}

fn mc_chunks(samples: usize) -> Vec<(u64, usize)> {
    let count = samples.div_ceil(MC_CHUNK);
    (0..count)
        .map(|c| (c as u64, MC_CHUNK.min(samples - c * MC_CHUNK)))
        .collect()
}

fn chunk_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `<f, g>_lambda = int f conj(g) dv_lambda`.
pub fn ball_inner_product<F, G>(q: &BallQuadrature, f: F, g: G, lambda: f64) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Complex64 + Sync,
    G: Fn(&[Complex64]) -> Complex64 + Sync,
{
    check_lambda(lambda)?;
    let n = q.n;
    let check = |v: Complex64, z: &[Complex64]| -> Result<Complex64> {
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                value: if v.re.is_finite() { v.im } else { v.re },
                node: z.iter().flat_map(|c| [c.re, c.im]).collect(),
            })
        }
    };
    match q.mode {
        QuadratureMode::Tensor {
            radial_nodes,
            angular,
        } => {
            if n > MAX_TENSOR_DIM + 1 {
                return Err(Error::Unsupported(format!(
                    "tensor integration in dimension {n}"
                )));
            }
            let nodes = q.radial_nodes(lambda, radial_nodes)?;
            let phases = angles(angular);
            let total_angles = angular.pow(n as u32);
            let dtheta = (2.0 * PI / angular as f64).powi(n as i32);
            let partials: Vec<Result<Complex64>> = nodes
                .par_iter()
                .map(|(r, w)| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut idx = vec![0; n];
                    let mut z = vec![Complex64::new(0.0, 0.0); n];
                    for flat in 0..total_angles {
                        unflatten(flat, angular, n, &mut idx);
                        for j in 0..n {
                            z[j] = phases[idx[j]] * r[j];
                        }
                        acc += check(f(&z), &z)? * check(g(&z), &z)?.conj();
                    }
                    Ok(acc * (w * dtheta))
                })
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for p in partials {
                total += p?;
            }
            Ok(total)
        }
        QuadratureMode::MonteCarlo { seed, samples } => {
            let partials: Vec<Result<Complex64>> = mc_chunks(samples)
                .into_par_iter()
                .map(|(stream, count)| {
                    let mut rng = chunk_rng(seed, stream);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for _ in 0..count {
                        let z = uniform_ball_point(&mut rng, n);
                        let rho: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                        acc +=
                            check(f(&z), &z)? * check(g(&z), &z)?.conj() * (1.0 - rho).powf(lambda);
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = Complex64::new(0.0, 0.0);
            for p in partials {
                total += p?;
            }
            Ok(total * (mc_scale(n, lambda) / samples as f64))
        }
    }
}

/// Truncated matrix of `T_a`, `entries[(beta, alpha)] = <a e_alpha, e_beta>`.
#[derive(Debug, Clone)]
pub struct ToeplitzMatrix {
    pub basis: Vec<MultiIndex>,
    pub entries: DMatrix<Complex64>,
    pub symbol: String,
    pub lambda: f64,
    pub cap: u32,
    pub quadrature: String,
}

impl ToeplitzMatrix {
    pub fn n(&self) -> usize {
        self.basis.first().map_or(0, MultiIndex::dim)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `max |M - M^*|`.
    pub fn hermitian_defect(&self) -> f64 {
        let m = &self.entries;
        let mut worst: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |A - B|` entrywise.
    pub fn max_difference(&self, other: &ToeplitzMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .fold(0.0, |acc: f64, c| acc.max(c.norm()))
    }
}

/// Brute-force matrix of the Toeplitz operator with symbol `a` on the
/// degree-`cap` truncation.
pub fn toeplitz_matrix_bruteforce(
    a: &SymbolSpec,
    lambda: f64,
    cap: u32,
    q: &BallQuadrature,
) -> Result<ToeplitzMatrix> {
    let n = a.n();
    if q.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: q.n,
        });
    }
    let params = WeightedSpaceParams::new(n, lambda)?;
    truncation_size(n, cap)?;
    let basis = enumerate_multi_indices(n, cap)?;
    let omega: Vec<f64> = basis
        .iter()
        .map(|al| log_normalization(&params, al).map(f64::exp))
        .collect::<Result<_>>()?;
    let dim = basis.len();

    let entries = match q.mode {
        QuadratureMode::Tensor {
            radial_nodes,
            angular,
        } => {
            if n > MAX_TENSOR_DIM {
                return Err(Error::Unsupported(format!(
                    "tensor-mode matrices are limited to n <= {MAX_TENSOR_DIM}, got {n}"
                )));
            }
            if angular < 2 * cap as usize + 2 {
                return Err(Error::InvalidQuadrature(format!(
                    "angular grid {angular} is too coarse for degree cap {cap} (need {})",
                    2 * cap + 2
                )));
            }
            tensor_matrix(
                a,
                lambda,
                cap,
                &basis,
                &omega,
                q.radial_nodes(lambda, radial_nodes)?,
                angular,
            )?
        }
        QuadratureMode::MonteCarlo { seed, samples } => {
            let partials: Vec<Result<Vec<Complex64>>> = mc_chunks(samples)
                .into_par_iter()
                .map(|(stream, count)| {
                    let mut rng = chunk_rng(seed, stream);
                    let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
                    let mut e = vec![Complex64::new(0.0, 0.0); dim];
                    for _ in 0..count {
                        let z = uniform_ball_point(&mut rng, n);
                        let rho: f64 = z.iter().map(|c| c.norm_sqr()).sum();
                        let av = a.eval_point(&z);
                        if !av.is_finite() {
                            return Err(Error::NonFinite {
                                value: av,
                                node: z.iter().flat_map(|c| [c.re, c.im]).collect(),
                            });
                        }
                        let w = av * (1.0 - rho).powf(lambda);
                        for (k, al) in basis.iter().enumerate() {
                            e[k] = crate::bergman::monomial(al.entries(), &z) * omega[k];
                        }
                        for b in 0..dim {
                            let eb = e[b].conj() * w;
                            for c in 0..dim {
                                acc[b * dim + c] += e[c] * eb;
                            }
                        }
                    }
                    Ok(acc)
                })
                .collect();
            let mut total = vec![Complex64::new(0.0, 0.0); dim * dim];
            for p in partials {
                for (t, v) in total.iter_mut().zip(p?) {
                    *t += v;
                }
            }
            let scale = mc_scale(n, lambda) / samples as f64;
            DMatrix::from_fn(dim, dim, |b, c| total[b * dim + c] * scale)
        }
    };

    Ok(ToeplitzMatrix {
        basis,
        entries,
        symbol: a.describe(),
        lambda,
        cap,
        quadrature: q.describe(),
    })
}

fn tensor_matrix(
    a: &SymbolSpec,
    lambda: f64,
    cap: u32,
    basis: &[MultiIndex],
    omega: &[f64],
    nodes: Vec<(Vec<f64>, f64)>,
    angular: usize,
) -> Result<DMatrix<Complex64>> {
    let n = a.n();
    let dim = basis.len();
    let cap = cap as usize;
    let freqs = 2 * cap + 1;
    let phases = angles(angular);
    // kernel[d][q] = e^{i (d - cap) theta_q} * 2 pi / M
    let kernel: Vec<Vec<Complex64>> = (0..freqs)
        .map(|d| {
            (0..angular)
                .map(|q| {
                    let k = (d as i64 - cap as i64).rem_euclid(angular as i64) as usize;
                    phases[(k * q) % angular] * (2.0 * PI / angular as f64)
                })
                .collect()
        })
        .collect();
    let total_angles = angular.pow(n as u32);
    // Frequency offset index of alpha - beta, flattened in base `freqs`.
    let offset: Vec<Vec<usize>> = basis
        .iter()
        .map(|b| {
            basis
                .iter()
                .map(|al| {
                    al.entries()
                        .iter()
                        .zip(b.entries())
                        .fold(0, |acc, (&x, &y)| {
                            acc * freqs + (x as i64 - y as i64 + cap as i64) as usize
                        })
                })
                .collect()
        })
        .collect();
    let _ = lambda;

    let partials: Vec<Result<Vec<Complex64>>> = nodes
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut idx = vec![0; n];
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            let mut values = vec![Complex64::new(0.0, 0.0); total_angles];
            for (r, w) in chunk {
                for (flat, slot) in values.iter_mut().enumerate() {
                    unflatten(flat, angular, n, &mut idx);
                    for j in 0..n {
                        z[j] = phases[idx[j]] * r[j];
                    }
                    let v = a.eval_point(&z);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            value: v,
                            node: z.iter().flat_map(|c| [c.re, c.im]).collect(),
                        });
                    }
                    *slot = Complex64::new(v, 0.0);
                }
                let spectrum = angular_transform(&values, n, angular, &kernel);
                let rpow: Vec<f64> = basis
                    .iter()
                    .map(|al| {
                        al.entries()
                            .iter()
                            .zip(r)
                            .map(|(&e, &x)| x.powi(e as i32))
                            .product()
                    })
                    .collect();
                for b in 0..dim {
                    let wb = w * omega[b] * rpow[b];
                    for c in 0..dim {
                        acc[b * dim + c] += spectrum[offset[b][c]] * (wb * omega[c] * rpow[c]);
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Complex64::new(0.0, 0.0); dim * dim];
    for p in partials {
        for (t, v) in total.iter_mut().zip(p?) {
            *t += v;
        }
    }
    Ok(DMatrix::from_fn(dim, dim, |b, c| total[b * dim + c]))
}

/// Separable discrete Fourier transform over the angular grid, one axis at a time.
fn angular_transform(
    values: &[Complex64],
    n: usize,
    angular: usize,
    kernel: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let freqs = kernel.len();
    let mut data = values.to_vec();
    let mut shape = vec![angular; n];
    for axis in 0..n {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let len = shape[axis];
        let mut out = vec![Complex64::new(0.0, 0.0); outer * freqs * inner];
        for o in 0..outer {
            for (d, krow) in kernel.iter().enumerate() {
                let dst = &mut out[(o * freqs + d) * inner..(o * freqs + d + 1) * inner];
                for (q, &kq) in krow.iter().enumerate().take(len) {
                    let src = &data[(o * len + q) * inner..(o * len + q + 1) * inner];
                    for (x, &y) in dst.iter_mut().zip(src) {
                        *x += y * kq;
                    }
                }
            }
        }
        shape[axis] = freqs;
        data = out;
    }
    data
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalityReport {
    pub max_off_fiber: f64,
    pub max_within_fiber_deviation: f64,
    pub fiber_scalars: BTreeMap<FiberLabel, Complex64>,
    pub tol: f64,
    pub pass: bool,
}

/// Checks that `M` is block diagonal over the fibers of `k` with scalar blocks.
pub fn diagonality_report(
    m: &ToeplitzMatrix,
    k: &Partition,
    tol: f64,
) -> Result<DiagonalityReport> {
    if m.n() != k.n() {
        return Err(Error::DimensionMismatch {
            expected: k.n(),
            got: m.n(),
        });
    }
    let labels: Vec<FiberLabel> = m
        .basis
        .iter()
        .map(|al| group_norms(al, k))
        .collect::<Result<_>>()?;
    let mut sums: BTreeMap<FiberLabel, (Complex64, usize)> = BTreeMap::new();
    for (i, s) in labels.iter().enumerate() {
        let e = sums
            .entry(s.clone())
            .or_insert((Complex64::new(0.0, 0.0), 0));
        e.0 += m.entries[(i, i)];
        e.1 += 1;
    }
    let fiber_scalars: BTreeMap<FiberLabel, Complex64> = sums
        .into_iter()
        .map(|(s, (sum, c))| (s, sum / c as f64))
        .collect();
    let mut max_off_fiber: f64 = 0.0;
    let mut max_within: f64 = 0.0;
    for (b, sb) in labels.iter().enumerate() {
        for (c, sc) in labels.iter().enumerate() {
            let v = m.entries[(b, c)];
            if sb != sc {
                max_off_fiber = max_off_fiber.max(v.norm());
            } else if b == c {
                max_within = max_within.max((v - fiber_scalars[sb]).norm());
            } else {
                max_within = max_within.max(v.norm());
            }
        }
    }
    Ok(DiagonalityReport {
        max_off_fiber,
        max_within_fiber_deviation: max_within,
        pass: max_off_fiber < tol && max_within < tol,
        fiber_scalars,
        tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaMatchReport {
    pub max_deviation: f64,
    pub worst_label: Option<FiberLabel>,
    pub tol: f64,
    pub pass: bool,
}

/// Largest gap between the fiber scalars of `M` and `gs`.
pub fn compare_gamma(m: &ToeplitzMatrix, gs: &GammaSequence, tol: f64) -> Result<GammaMatchReport> {
    if m.cap != gs.cap() {
        return Err(Error::MetadataMismatch(format!(
            "matrix cap {} vs sequence cap {}",
            m.cap,
            gs.cap()
        )));
    }
    if (m.lambda - gs.lambda()).abs() > 0.0 {
        return Err(Error::MetadataMismatch(format!(
            "matrix weight {} vs sequence weight {}",
            m.lambda,
            gs.lambda()
        )));
    }
    let report = diagonality_report(m, gs.partition(), f64::INFINITY)?;
    let mut max_deviation: f64 = 0.0;
    let mut worst_label = None;
    for (s, scalar) in &report.fiber_scalars {
        let g = gs
            .get(s)
            .ok_or_else(|| Error::MetadataMismatch(format!("sequence lacks label {s}")))?;
        let d = (scalar - g).norm();
        if d > max_deviation || worst_label.is_none() {
            max_deviation = max_deviation.max(d);
            worst_label = Some(s.clone());
        }
    }
    Ok(GammaMatchReport {
        max_deviation,
        worst_label,
        tol,
        pass: max_deviation < tol,
    })
}
