//! Lattice spectral calculus on degree-truncated spaces.
//!
//! Every operator here is a function of the block rotation operators, so it is
//! diagonal in the monomial basis and scalar on each fiber. [`DiagonalOperator`]
//! stores one complex value per fiber label; dense matrices are produced only
//! for comparison with brute-force computations.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bergman::{check_lambda, log_normalization, WeightedSpaceParams};
use crate::error::{Error, Result};
use crate::gamma::GammaSequence;
use crate::lattice::{
    coarsen_label, enumerate_labels, enumerate_multi_indices, fiber_dimension, group_norms,
    partition_preceq, truncation_size, FiberLabel, MultiIndex, Partition,
};
use crate::oracle::{toeplitz_matrix_bruteforce, BallQuadrature};
use crate::symbol::{SymbolClass, SymbolSpec};

pub const DEFAULT_WINDOW: u32 = 4;
/// Input unitaries must satisfy `max |U^* U - I| <= UNITARY_TOL`.
pub const UNITARY_TOL: f64 = 1e-12;
/// Largest `N * n` accepted by [`representation_matrix`].
pub const MAX_REPRESENTATION_WORK: usize = 24;

/// `f -> sum_s values(s) P_s f` on the degree-`cap` truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator {
    partition: Partition,
    lambda: f64,
    cap: u32,
    values: BTreeMap<FiberLabel, Complex64>,
}

impl DiagonalOperator {
    pub fn new(
        partition: Partition,
        lambda: f64,
        cap: u32,
        values: BTreeMap<FiberLabel, Complex64>,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        let labels = enumerate_labels(partition.m(), cap);
        if labels.len() != values.len() {
            return Err(Error::MetadataMismatch(format!(
                "expected {} atoms for cap {cap}, got {}",
                labels.len(),
                values.len()
            )));
        }
        for s in &labels {
            let v = values
                .get(s)
                .ok_or_else(|| Error::MetadataMismatch(format!("missing atom {s}")))?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    value: if v.re.is_finite() { v.im } else { v.re },
                    node: s.entries().iter().map(|&x| x as f64).collect(),
                });
            }
        }
        Ok(DiagonalOperator {
            partition,
            lambda,
            cap,
            values,
        })
    }

    pub fn identity(partition: Partition, lambda: f64, cap: u32) -> Result<Self> {
        functional_calculus(|_| Complex64::new(1.0, 0.0), &partition, lambda, cap)
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

    pub fn values(&self) -> &BTreeMap<FiberLabel, Complex64> {
        &self.values
    }

    pub fn value(&self, s: &FiberLabel) -> Option<Complex64> {
        self.values.get(s).copied()
    }

    /// Operator norm: the largest `|values(s)|`.
    pub fn norm(&self) -> f64 {
        self.values.values().fold(0.0, |acc, v| acc.max(v.norm()))
    }

    /// Truncated monomial basis in graded-lex order.
    pub fn basis(&self) -> Result<Vec<MultiIndex>> {
        enumerate_multi_indices(self.partition.n(), self.cap)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<Complex64>> {
        let basis = self.basis()?;
        let diag: Vec<Complex64> = basis
            .iter()
            .map(|al| group_norms(al, &self.partition).map(|s| self.values[&s]))
            .collect::<Result<_>>()?;
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }

    fn check_compatible(&self, other: &DiagonalOperator) -> Result<()> {
        if self.partition != other.partition {
            return Err(Error::MetadataMismatch(format!(
                "partitions {:?} and {:?}",
                self.partition.blocks(),
                other.partition.blocks()
            )));
        }
        if self.lambda != other.lambda {
            return Err(Error::MetadataMismatch(format!(
                "weights {} and {}",
                self.lambda, other.lambda
            )));
        }
        if self.cap != other.cap {
            return Err(Error::MetadataMismatch(format!(
                "caps {} and {}",
                self.cap, other.cap
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &DiagonalOperator,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .map(|(s, &a)| (s.clone(), f(a, other.values[s])))
            .collect();
        Ok(DiagonalOperator {
            values,
            ..self.clone()
        })
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .map(|(s, &a)| (s.clone(), f(a)))
            .collect();
        DiagonalOperator {
            values,
            ..self.clone()
        }
    }

    pub fn compose(&self, other: &DiagonalOperator) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &DiagonalOperator) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DiagonalOperator) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|a| a * c)
    }

    pub fn adjoint(&self) -> Self {
        self.map(|a| a.conj())
    }

    /// `max_s |A(s) - B(s)|`.
    pub fn max_difference(&self, other: &DiagonalOperator) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub partition: Partition,
    pub cap: u32,
    /// `(s, dim H_s)` in graded-lex order.
    pub atoms: Vec<(FiberLabel, u64)>,
}

impl JointSpectrum {
    pub fn total_multiplicity(&self) -> u64 {
        self.atoms.iter().map(|(_, d)| d).sum()
    }
}

pub fn joint_spectrum(k: &Partition, cap: u32) -> Result<JointSpectrum> {
    let atoms = enumerate_labels(k.m(), cap)
        .into_iter()
        .map(|s| fiber_dimension(k, &s).map(|d| (s, d)))
        .collect::<Result<_>>()?;
    Ok(JointSpectrum {
        partition: k.clone(),
        cap,
        atoms,
    })
}

/// `psi(V_(1), ..., V_(m))` on the truncation.
pub fn functional_calculus<F>(
    psi: F,
    k: &Partition,
    lambda: f64,
    cap: u32,
) -> Result<DiagonalOperator>
where
    F: Fn(&FiberLabel) -> Complex64,
{
    let values = enumerate_labels(k.m(), cap)
        .into_iter()
        .map(|s| {
            let v = psi(&s);
            (s, v)
        })
        .collect();
    DiagonalOperator::new(k.clone(), lambda, cap, values)
}

/// Block rotation operator `V_(j)`, `j` counted from 1.
pub fn rotation_operator(
    j: usize,
    k: &Partition,
    lambda: f64,
    cap: u32,
) -> Result<DiagonalOperator> {
    if j == 0 || j > k.m() {
        return Err(Error::IndexOutOfRange {
            index: j,
            max: k.m(),
        });
    }
    functional_calculus(
        |s| Complex64::new(s.entries()[j - 1] as f64, 0.0),
        k,
        lambda,
        cap,
    )
}

/// Orthogonal projection onto the fiber `H_s`.
pub fn indicator(s: &FiberLabel, k: &Partition, lambda: f64, cap: u32) -> Result<DiagonalOperator> {
    crate::lattice::check_label(k, s)?;
    if s.total() > cap {
        return Err(Error::CapExceeded {
            label: s.entries().to_vec(),
            cap,
        });
    }
    functional_calculus(
        |t| Complex64::new(if t == s { 1.0 } else { 0.0 }, 0.0),
        k,
        lambda,
        cap,
    )
}

pub fn diagonal_from_gamma(gs: &GammaSequence) -> Result<DiagonalOperator> {
    let values = gs
        .iter()
        .map(|(s, v)| (s.clone(), Complex64::new(v, 0.0)))
        .collect();
    DiagonalOperator::new(gs.partition().clone(), gs.lambda(), gs.cap(), values)
}

/// `max |M_a M_b - M_b M_a|` on brute-force matrices.
pub fn commutator_norm_vs_matrix(
    a: &SymbolSpec,
    b: &SymbolSpec,
    lambda: f64,
    cap: u32,
    q: &BallQuadrature,
) -> Result<f64> {
    if a.partition() != b.partition() {
        return Err(Error::MetadataMismatch(format!(
            "symbols live on partitions {:?} and {:?}",
            a.partition().blocks(),
            b.partition().blocks()
        )));
    }
    let ma = toeplitz_matrix_bruteforce(a, lambda, cap, q)?.entries;
    let mb = toeplitz_matrix_bruteforce(b, lambda, cap, q)?.entries;
    let c = &ma * &mb - &mb * &ma;
    Ok(c.iter().fold(0.0, |acc, v| acc.max(v.norm())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompactnessVerdict {
    Decaying,
    NonDecaying,
    AlphaDprimeFlat,
}

impl CompactnessVerdict {
    pub fn name(self) -> &'static str {
        match self {
            CompactnessVerdict::Decaying => "decaying",
            CompactnessVerdict::NonDecaying => "non-decaying",
            CompactnessVerdict::AlphaDprimeFlat => "alpha-dprime-flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessReport {
    pub verdict: CompactnessVerdict,
    /// `max |gamma(s)|` over the outermost shell `|s| = N`.
    pub shell_max: f64,
    /// `max |gamma(s)|` over `|s| < window`.
    pub inner_max: f64,
    /// `max |gamma(s)|` over the band `N - window < |s| <= N`.
    pub band_max: f64,
    /// `|gamma(N e_j)| / |gamma((N - window) e_j)|` per direction.
    pub direction_rates: Vec<f64>,
    pub alpha_dprime_flat: bool,
    pub window: u32,
    pub cap: u32,
}

/// Decay diagnostics of a truncated sequence. "Decaying" means the outermost
/// shell maximum is below half the maximum over the first `window` shells.
pub fn compactness_classify(gs: &GammaSequence, window: u32) -> Result<CompactnessReport> {
    let cap = gs.cap();
    if window == 0 || window > cap {
        return Err(Error::WindowTooLarge { window, cap });
    }
    let m = gs.partition().m();
    let mut shell_max: f64 = 0.0;
    let mut inner_max: f64 = 0.0;
    let mut band_max: f64 = 0.0;
    for (s, v) in gs.iter() {
        let t = s.total();
        let a = v.abs();
        if t == cap {
            shell_max = shell_max.max(a);
        }
        if t + window > cap {
            band_max = band_max.max(a);
        }
        if t < window {
            inner_max = inner_max.max(a);
        }
    }
    let direction_rates = (0..m)
        .map(|j| {
            let at = |deg: u32| {
                let mut e = vec![0; m];
                e[j] = deg;
                gs.get(&FiberLabel::new(e)).unwrap_or(0.0).abs()
            };
            let (outer, inner) = (at(cap), at(cap - window));
            if inner > 0.0 {
                outer / inner
            } else if outer > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let alpha_dprime_flat =
        m >= 2 && (gs.class() == Some(SymbolClass::WeightedQuasiRadial) || gs.is_flat_in_last(0.0));
    let verdict = if shell_max == 0.0 {
        CompactnessVerdict::Decaying
    } else if alpha_dprime_flat {
        CompactnessVerdict::AlphaDprimeFlat
    } else if shell_max < 0.5 * inner_max {
        CompactnessVerdict::Decaying
    } else {
        CompactnessVerdict::NonDecaying
    };
    Ok(CompactnessReport {
        verdict,
        shell_max,
        inner_max,
        band_max,
        direction_rates,
        alpha_dprime_flat,
        window,
        cap,
    })
}

fn check_block_unitary(u: &DMatrix<Complex64>, k: &Partition) -> Result<()> {
    let n = k.n();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u.nrows().max(u.ncols()),
        });
    }
    let gram = u.adjoint() * u;
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((gram[(i, j)] - want).norm());
        }
    }
    if !(deviation <= UNITARY_TOL) {
        return Err(Error::NotUnitary { deviation });
    }
    let block_of: Vec<usize> = (0..k.m())
        .flat_map(|j| k.block_range(j).map(move |_| j))
        .collect();
    for i in 0..n {
        for j in 0..n {
            if block_of[i] != block_of[j] && u[(i, j)].norm() > UNITARY_TOL {
                return Err(Error::BlockStructure(k.blocks().to_vec()));
            }
        }
    }
    Ok(())
}

/// Matrix of `pi(U) f = f o U^{-1}` on the truncated normalized basis,
/// `pi(U) e_alpha = sum_gamma R[gamma, alpha] e_gamma`.
pub fn representation_matrix(
    u: &DMatrix<Complex64>,
    k: &Partition,
    lambda: f64,
    cap: u32,
) -> Result<DMatrix<Complex64>> {
    check_block_unitary(u, k)?;
    let n = k.n();
    if n * cap as usize > MAX_REPRESENTATION_WORK {
        return Err(Error::Unsupported(format!(
            "representation matrix with n * N = {} exceeds {MAX_REPRESENTATION_WORK}",
            n * cap as usize
        )));
    }
    let params = WeightedSpaceParams::new(n, lambda)?;
    truncation_size(n, cap)?;
    let basis = enumerate_multi_indices(n, cap)?;
    let position: HashMap<&MultiIndex, usize> =
        basis.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let ln_omega: Vec<f64> = basis
        .iter()
        .map(|a| log_normalization(&params, a))
        .collect::<Result<_>>()?;
    let v = u.adjoint();
    let dim = basis.len();

    // poly[p] holds the coefficients of (V z)^{basis[p]} over monomials.
    let mut poly: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(dim);
    for (p, alpha) in basis.iter().enumerate() {
        if alpha.degree() == 0 {
            poly.push(vec![(p, Complex64::new(1.0, 0.0))]);
            continue;
        }
        let i = alpha.entries().iter().rposition(|&e| e > 0).unwrap_or(0);
        let mut lower = alpha.entries().to_vec();
        lower[i] -= 1;
        let prev = &poly[position[&MultiIndex::new(lower)]];
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        for &(g, c) in prev {
            for j in 0..n {
                let vij = v[(i, j)];
                if vij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let mut up = basis[g].entries().to_vec();
                up[j] += 1;
                *acc.entry(position[&MultiIndex::new(up)]).or_default() += c * vij;
            }
        }
        poly.push(acc.into_iter().collect());
    }

    let mut r = DMatrix::<Complex64>::zeros(dim, dim);
    for (a, terms) in poly.iter().enumerate() {
        for &(g, c) in terms {
            r[(g, a)] = c * (ln_omega[a] - ln_omega[g]).exp();
        }
    }
    Ok(r)
}

/// Haar-distributed element of `U(k_1) x ... x U(k_m)`.
pub fn random_block_unitary<R: Rng + ?Sized>(k: &Partition, rng: &mut R) -> DMatrix<Complex64> {
    let n = k.n();
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..k.m() {
        let range = k.block_range(j);
        let b = range.len();
        let g = DMatrix::<Complex64>::from_fn(b, b, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        });
        let qr = g.qr();
        let (q, rr) = (qr.q(), qr.r());
        for c in 0..b {
            let d = rr[(c, c)];
            let phase = if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            };
            for row in 0..b {
                u[(range.start + row, range.start + c)] = q[(row, c)] * phase;
            }
        }
    }
    u
}

/// `max |[T, pi(U)]|` on the truncation.
pub fn equivariance_residual(
    t: &DiagonalOperator,
    u: &DMatrix<Complex64>,
    k: &Partition,
    lambda: f64,
    cap: u32,
) -> Result<f64> {
    if t.partition() != k || t.lambda() != lambda || t.cap() != cap {
        return Err(Error::MetadataMismatch(
            "operator metadata differs from the representation parameters".into(),
        ));
    }
    let r = representation_matrix(u, k, lambda, cap)?;
    let basis = t.basis()?;
    let diag: Vec<Complex64> = basis
        .iter()
        .map(|al| group_norms(al, k).map(|s| t.values()[&s]))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..r.nrows() {
        for j in 0..r.ncols() {
            worst = worst.max((r[(i, j)] * (diag[i] - diag[j])).norm());
        }
    }
    Ok(worst)
}

/// Re-expresses a sequence on `coarse` over the fibers of the finer `fine`.
pub fn lift(gs: &GammaSequence, fine: &Partition) -> Result<GammaSequence> {
    let coarse = gs.partition();
    if !partition_preceq(coarse, fine)? {
        return Err(Error::NotRefinement {
            coarse: coarse.blocks().to_vec(),
            fine: fine.blocks().to_vec(),
        });
    }
    let values = enumerate_labels(fine.m(), gs.cap())
        .into_iter()
        .map(|s| {
            let c = coarsen_label(&s, fine, coarse)?;
            Ok((s, gs.values()[&c]))
        })
        .collect::<Result<_>>()?;
    GammaSequence::from_values(fine.clone(), gs.lambda(), gs.cap(), gs.class(), values)
}

/// True when a sequence given on the finer partition of `gs` is constant on
/// every preimage of the coarsening map to `coarse`, i.e. it comes from a
/// sequence on `coarse`.
pub fn refinement_check(gs: &GammaSequence, coarse: &Partition, tol: f64) -> Result<bool> {
    let fine = gs.partition();
    if !partition_preceq(coarse, fine)? {
        return Err(Error::NotRefinement {
            coarse: coarse.blocks().to_vec(),
            fine: fine.blocks().to_vec(),
        });
    }
    let mut seen: BTreeMap<FiberLabel, f64> = BTreeMap::new();
    for (s, v) in gs.iter() {
        let c = coarsen_label(s, fine, coarse)?;
        match seen.get(&c) {
            Some(&w) if (v - w).abs() > tol => return Ok(false),
            Some(_) => {}
            None => {
                seen.insert(c, v);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::build_gamma_sequence;
    use crate::symbol::Profile;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(b: &[usize]) -> Partition {
        Partition::new(b.to_vec()).unwrap()
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn rotation_values() {
        let v = rotation_operator(1, &p(&[3]), 0.0, 4).unwrap();
        for l in 0..=4 {
            assert_eq!(v.value(&FiberLabel::new(vec![l])), Some(c(l as f64)));
        }
        let v2 = rotation_operator(2, &p(&[2, 1]), 0.0, 4).unwrap();
        let s = group_norms(&MultiIndex::new(vec![1, 0, 3]), &p(&[2, 1])).unwrap();
        assert_eq!(v2.value(&s), Some(c(3.0)));
        assert!(rotation_operator(3, &p(&[2, 1]), 0.0, 4).is_err());
        assert!(rotation_operator(0, &p(&[2, 1]), 0.0, 4).is_err());
    }

    #[test]
    fn identity_and_rotation_match_calculus() {
        let k = p(&[1, 2]);
        let id = functional_calculus(|_| c(1.0), &k, 0.5, 3).unwrap();
        let m = id.to_matrix().unwrap();
        assert_eq!(m, DMatrix::identity(m.nrows(), m.ncols()));
        let psi = functional_calculus(|s| c(s.entries()[1] as f64), &k, 0.5, 3).unwrap();
        assert_eq!(psi, rotation_operator(2, &k, 0.5, 3).unwrap());
    }

    #[test]
    fn spectral_reconstruction() {
        let k = p(&[1, 1, 1]);
        let cap = 3;
        let mut sum = functional_calculus(|_| c(0.0), &k, 0.0, cap).unwrap();
        for (s, _) in joint_spectrum(&k, cap).unwrap().atoms {
            let e = indicator(&s, &k, 0.0, cap).unwrap();
            sum = sum.add(&e.scale(c(s.entries()[2] as f64))).unwrap();
        }
        assert_eq!(sum, rotation_operator(3, &k, 0.0, cap).unwrap());
    }

    #[test]
    fn indicator_is_fiber_projection() {
        let k = p(&[2, 1]);
        let s = FiberLabel::new(vec![1, 1]);
        let e = indicator(&s, &k, 0.0, 3).unwrap();
        let m = e.to_matrix().unwrap();
        assert_eq!(&m * &m, m);
        assert_eq!(m.adjoint(), m);
        let rank: f64 = m.diagonal().iter().map(|v| v.re).sum();
        assert_eq!(rank, 2.0);
    }

    #[test]
    fn radial_gamma_operator() {
        let a = SymbolSpec::radial(2, Profile::monomial(vec![1.0])).unwrap();
        let b = SymbolSpec::radial(2, Profile::univariate(&[1.0, -1.0])).unwrap();
        let ga = diagonal_from_gamma(&build_gamma_sequence(&a, 0.0, 6).unwrap()).unwrap();
        let gb = diagonal_from_gamma(&build_gamma_sequence(&b, 0.0, 6).unwrap()).unwrap();
        let ab = ga.compose(&gb).unwrap();
        for l in 0..=6u32 {
            let l = l as f64;
            let s = FiberLabel::new(vec![l as u32]);
            assert!((ga.value(&s).unwrap() - c((l + 2.0) / (l + 3.0))).norm() < 1e-14);
            assert!(
                (ab.value(&s).unwrap() - c((l + 2.0) / ((l + 3.0) * (l + 3.0)))).norm() < 1e-14
            );
        }
        assert_eq!(ab, gb.compose(&ga).unwrap());
        assert_eq!(ga.adjoint(), ga);
        let other = functional_calculus(|_| c(1.0), &p(&[2]), 1.0, 6).unwrap();
        assert!(ga.compose(&other).is_err());
    }

    #[test]
    fn spectrum_examples() {
        let js = joint_spectrum(&p(&[3]), 3).unwrap();
        let mult: Vec<u64> = js.atoms.iter().map(|a| a.1).collect();
        assert_eq!(mult, vec![1, 3, 6, 10]);
        let js = joint_spectrum(&p(&[1, 1]), 1).unwrap();
        assert_eq!(js.atoms.len(), 3);
        assert!(js.atoms.iter().all(|a| a.1 == 1));
        let js = joint_spectrum(&p(&[2, 1]), 2).unwrap();
        assert_eq!(js.atoms.len(), 6);
        let m11 = js.atoms.iter().find(|a| a.0.entries() == [1, 1]).unwrap().1;
        assert_eq!(m11, 2);
    }

    #[test]
    fn compactness_examples() {
        let a = SymbolSpec::radial(1, Profile::univariate(&[1.0, -1.0])).unwrap();
        let gs = build_gamma_sequence(&a, 0.0, 20).unwrap();
        let rep = compactness_classify(&gs, 4).unwrap();
        assert_eq!(rep.verdict, CompactnessVerdict::Decaying);
        assert!((rep.shell_max - 1.0 / 22.0).abs() < 1e-14);

        let one = SymbolSpec::constant(SymbolClass::Radial, p(&[2]), 1.0).unwrap();
        let gs = build_gamma_sequence(&one, 0.0, 10).unwrap();
        assert_eq!(
            compactness_classify(&gs, 4).unwrap().verdict,
            CompactnessVerdict::NonDecaying
        );

        let w = SymbolSpec::weighted(&p(&[1]), 1, Profile::monomial(vec![2.0])).unwrap();
        let gs = build_gamma_sequence(&w, 0.0, 10).unwrap();
        let rep = compactness_classify(&gs, 4).unwrap();
        assert_eq!(rep.verdict, CompactnessVerdict::AlphaDprimeFlat);
        assert!(compactness_classify(&gs, 11).is_err());
    }

    #[test]
    fn representation_of_diagonal_unitary() {
        let k = p(&[1, 1]);
        let t = [
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, -1.1),
        ];
        let u = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(t.to_vec()));
        let r = representation_matrix(&u, &k, 0.5, 3).unwrap();
        let basis = enumerate_multi_indices(2, 3).unwrap();
        for (i, al) in basis.iter().enumerate() {
            let want = t[0].conj().powu(al.entries()[0]) * t[1].conj().powu(al.entries()[1]);
            assert!((r[(i, i)] - want).norm() < 1e-14);
        }
        let id = representation_matrix(&DMatrix::identity(2, 2), &k, 0.5, 3).unwrap();
        assert_eq!(id, DMatrix::identity(basis.len(), basis.len()));
    }

    #[test]
    fn swap_permutes_within_fibers() {
        let k = p(&[2, 1]);
        let mut u = DMatrix::<Complex64>::zeros(3, 3);
        u[(0, 1)] = c(1.0);
        u[(1, 0)] = c(1.0);
        u[(2, 2)] = c(1.0);
        let r = representation_matrix(&u, &k, 0.0, 3).unwrap();
        let basis = enumerate_multi_indices(3, 3).unwrap();
        for (j, al) in basis.iter().enumerate() {
            let e = al.entries();
            let swapped = MultiIndex::new(vec![e[1], e[0], e[2]]);
            let i = basis.iter().position(|b| *b == swapped).unwrap();
            assert!((r[(i, j)] - c(1.0)).norm() < 1e-14);
            assert_eq!(
                group_norms(al, &k).unwrap(),
                group_norms(&swapped, &k).unwrap()
            );
        }
    }

    #[test]
    fn random_unitary_representation() {
        let k = p(&[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_block_unitary(&k, &mut rng);
        let r = representation_matrix(&u, &k, 1.5, 3).unwrap();
        let defect = (r.adjoint() * &r - DMatrix::identity(r.nrows(), r.ncols()))
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.norm()));
        assert!(defect < 1e-10, "{defect}");
        let t = functional_calculus(
            |s| c(s.entries()[0] as f64 * 0.7 - s.entries()[1] as f64),
            &k,
            1.5,
            3,
        )
        .unwrap();
        assert!(equivariance_residual(&t, &u, &k, 1.5, 3).unwrap() < 1e-9);

        let mut bad = u.clone();
        bad[(0, 2)] = c(0.1);
        assert!(representation_matrix(&bad, &k, 1.5, 3).is_err());
        let scaled = u.scale(1.01);
        assert!(matches!(
            representation_matrix(&scaled, &k, 1.5, 3),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn refinement_examples() {
        let r2 = SymbolSpec::radial(2, Profile::monomial(vec![1.0])).unwrap();
        let gs = build_gamma_sequence(&r2, 0.0, 4).unwrap();
        let lifted = lift(&gs, &p(&[1, 1])).unwrap();
        for s in [[0, 2], [1, 1], [2, 0]] {
            assert!((lifted.get(&FiberLabel::new(s.to_vec())).unwrap() - 0.8).abs() < 1e-14);
        }
        assert!(refinement_check(&lifted, &p(&[2]), 1e-12).unwrap());

        let r1 = SymbolSpec::separately_radial(2, Profile::monomial(vec![1.0, 0.0])).unwrap();
        let gs = build_gamma_sequence(&r1, 0.0, 4).unwrap();
        assert!(!refinement_check(&gs, &p(&[2]), 1e-12).unwrap());
        assert!(refinement_check(&gs, &p(&[1, 1]), 0.0).unwrap());
        assert!(lift(&gs, &p(&[2])).is_err());
    }
}
