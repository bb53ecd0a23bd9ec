//! Symbol descriptions for the five invariant classes.
//!
//! A symbol is stored as a profile `f(rho)` of the squared radii it consumes,
//! so that `a(z) = f(rho(z))`. Which radii are fed to the profile is decided by
//! the class:
//!
//! | class | profile arguments |
//! |---|---|
//! | separately radial | `|z_1|^2, ..., |z_n|^2` |
//! | radial | `|z|^2` |
//! | quasi-radial | `|z_(1)|^2, ..., |z_(m)|^2` |
//! | weighted | `|z_(j)|^2 / (1 - |z_(m)|^2)` for `j < m` |
//! | degenerate | `|z_(1)|^2, ..., |z_(m-1)|^2` |

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolClass {
    SeparatelyRadial,
    Radial,
    QuasiRadial,
    WeightedQuasiRadial,
    DegenerateQuasiRadial,
}

impl SymbolClass {
    pub const ALL: [SymbolClass; 5] = [
        SymbolClass::SeparatelyRadial,
        SymbolClass::Radial,
        SymbolClass::QuasiRadial,
        SymbolClass::WeightedQuasiRadial,
        SymbolClass::DegenerateQuasiRadial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SymbolClass::SeparatelyRadial => "separately-radial",
            SymbolClass::Radial => "radial",
            SymbolClass::QuasiRadial => "quasi-radial",
            SymbolClass::WeightedQuasiRadial => "weighted",
            SymbolClass::DegenerateQuasiRadial => "degenerate",
        }
    }

    pub fn parse(s: &str) -> Option<SymbolClass> {
        Some(match s {
            "separately-radial" | "separate" | "sep" => SymbolClass::SeparatelyRadial,
            "radial" => SymbolClass::Radial,
            "quasi-radial" | "quasi" => SymbolClass::QuasiRadial,
            "weighted" | "weighted-quasi-radial" => SymbolClass::WeightedQuasiRadial,
            "degenerate" | "degenerate-quasi-radial" => SymbolClass::DegenerateQuasiRadial,
            _ => return None,
        })
    }
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One term `coef * prod rho_j^{exponents_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: f64,
    pub exponents: Vec<f64>,
}

type ProfileFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Radial profile `f(rho)` of a symbol.
#[derive(Clone)]
pub enum Profile {
    /// Finite sum of (possibly real-exponent) monomials in `rho`.
    Polynomial { arity: usize, terms: Vec<Term> },
    /// Arbitrary function, integrated by quadrature.
    Callable {
        name: String,
        arity: usize,
        f: Arc<ProfileFn>,
    },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Polynomial { arity, terms } => f
                .debug_struct("Polynomial")
                .field("arity", arity)
                .field("terms", terms)
                .finish(),
            Profile::Callable { name, arity, .. } => f
                .debug_struct("Callable")
                .field("name", name)
                .field("arity", arity)
                .finish(),
        }
    }
}

impl Profile {
    pub fn constant(arity: usize, c: f64) -> Self {
        Profile::Polynomial {
            arity,
            terms: vec![Term {
                coef: c,
                exponents: vec![0.0; arity],
            }],
        }
    }

    /// `prod rho_j^{p_j}`.
    pub fn monomial(exponents: Vec<f64>) -> Self {
        Profile::Polynomial {
            arity: exponents.len(),
            terms: vec![Term {
                coef: 1.0,
                exponents,
            }],
        }
    }

    pub fn polynomial(arity: usize, terms: Vec<Term>) -> Result<Self> {
        if let Some(t) = terms.iter().find(|t| t.exponents.len() != arity) {
            return Err(Error::InvalidSymbol(format!(
                "term {t:?} does not have {arity} exponents"
            )));
        }
        if terms
            .iter()
            .any(|t| !t.coef.is_finite() || t.exponents.iter().any(|e| !e.is_finite()))
        {
            return Err(Error::InvalidSymbol("non-finite polynomial data".into()));
        }
        Ok(Profile::Polynomial { arity, terms })
    }

    /// Univariate polynomial `sum_i coeffs[i] rho^i`.
    pub fn univariate(coeffs: &[f64]) -> Self {
        Profile::Polynomial {
            arity: 1,
            terms: coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| Term {
                    coef: c,
                    exponents: vec![i as f64],
                })
                .collect(),
        }
    }

    pub fn callable<F>(name: impl Into<String>, arity: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Profile::Callable {
            name: name.into(),
            arity,
            f: Arc::new(f),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Profile::Polynomial { arity, .. } | Profile::Callable { arity, .. } => *arity,
        }
    }

    pub fn eval(&self, rho: &[f64]) -> f64 {
        match self {
            Profile::Polynomial { terms, .. } => terms
                .iter()
                .map(|t| {
                    t.coef
                        * t.exponents
                            .iter()
                            .zip(rho)
                            .map(|(&e, &r)| if e == 0.0 { 1.0 } else { r.powf(e) })
                            .product::<f64>()
                })
                .sum(),
            Profile::Callable { f, .. } => f(rho),
        }
    }

    /// `c1 * p1 + c2 * p2`.
    pub fn combine(c1: f64, p1: &Profile, c2: f64, p2: &Profile) -> Result<Profile> {
        if p1.arity() != p2.arity() {
            return Err(Error::InvalidSymbol(format!(
                "cannot combine profiles of arity {} and {}",
                p1.arity(),
                p2.arity()
            )));
        }
        match (p1, p2) {
            (Profile::Polynomial { arity, terms: t1 }, Profile::Polynomial { terms: t2, .. }) => {
                let terms = t1
                    .iter()
                    .map(|t| Term {
                        coef: c1 * t.coef,
                        exponents: t.exponents.clone(),
                    })
                    .chain(t2.iter().map(|t| Term {
                        coef: c2 * t.coef,
                        exponents: t.exponents.clone(),
                    }))
                    .collect();
                Ok(Profile::Polynomial {
                    arity: *arity,
                    terms,
                })
            }
            _ => {
                let (a, b) = (p1.clone(), p2.clone());
                Ok(Profile::callable(
                    format!("{c1}*[{}]+{c2}*[{}]", p1.describe(), p2.describe()),
                    p1.arity(),
                    move |rho| c1 * a.eval(rho) + c2 * b.eval(rho),
                ))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Profile::Polynomial { terms, .. } => {
                let parts: Vec<String> = terms
                    .iter()
                    .map(|t| {
                        let e: Vec<String> = t.exponents.iter().map(|x| format!("{x}")).collect();
                        format!("{}@{}", t.coef, e.join(","))
                    })
                    .collect();
                format!("poly:{}", parts.join(";"))
            }
            Profile::Callable { name, .. } => name.clone(),
        }
    }
}

/// A symbol: class, partition and profile.
///
/// `partition` is always the full partition of `n`; for the weighted and
/// degenerate classes its last block is the one the profile does not see.
#[derive(Debug, Clone)]
pub struct SymbolSpec {
    class: SymbolClass,
    partition: Partition,
    profile: Profile,
}

impl SymbolSpec {
    pub fn new(class: SymbolClass, partition: Partition, profile: Profile) -> Result<Self> {
        let n = partition.n();
        match class {
            SymbolClass::SeparatelyRadial if partition.blocks().iter().any(|&k| k != 1) => {
                return Err(Error::InvalidSymbol(format!(
                    "separately radial symbols use the partition (1,...,1), got {partition}"
                )));
            }
            SymbolClass::Radial if partition.m() != 1 => {
                return Err(Error::InvalidSymbol(format!(
                    "radial symbols use the partition ({n}), got {partition}"
                )));
            }
            SymbolClass::WeightedQuasiRadial | SymbolClass::DegenerateQuasiRadial
                if partition.m() < 2 =>
            {
                return Err(Error::InvalidSymbol(format!(
                    "{class} symbols need at least two blocks, got {partition}"
                )));
            }
            _ => {}
        }
        let spec = SymbolSpec {
            class,
            partition,
            profile,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn separately_radial(n: usize, profile: Profile) -> Result<Self> {
        SymbolSpec::new(
            SymbolClass::SeparatelyRadial,
            Partition::separate(n)?,
            profile,
        )
    }

    pub fn radial(n: usize, profile: Profile) -> Result<Self> {
        SymbolSpec::new(SymbolClass::Radial, Partition::radial(n)?, profile)
    }

    pub fn quasi_radial(k: Partition, profile: Profile) -> Result<Self> {
        SymbolSpec::new(SymbolClass::QuasiRadial, k, profile)
    }

    /// `a_w(z) = f(|z_(1)|^2 / (1 - |z''|^2), ...)` with `z''` the last block of size `k_last`.
    pub fn weighted(k_prime: &Partition, k_last: usize, profile: Profile) -> Result<Self> {
        SymbolSpec::new(
            SymbolClass::WeightedQuasiRadial,
            k_prime.append(k_last)?,
            profile,
        )
    }

    /// `a(z) = f(|z_(1)|^2, ..., |z_(m-1)|^2)`, independent of the last block.
    pub fn degenerate(k_prime: &Partition, k_last: usize, profile: Profile) -> Result<Self> {
        SymbolSpec::new(
            SymbolClass::DegenerateQuasiRadial,
            k_prime.append(k_last)?,
            profile,
        )
    }

    /// The constant symbol `c` in the given class.
    pub fn constant(class: SymbolClass, partition: Partition, c: f64) -> Result<Self> {
        let arity = arity_for(class, &partition);
        SymbolSpec::new(class, partition, Profile::constant(arity, c))
    }

    fn validate(&self) -> Result<()> {
        let arity = self.arity();
        if self.profile.arity() != arity {
            return Err(Error::InvalidSymbol(format!(
                "{} symbol on {} needs a profile of arity {arity}, got {}",
                self.class,
                self.partition,
                self.profile.arity()
            )));
        }
        if let Profile::Polynomial { terms, .. } = &self.profile {
            let blocks = self.profile_blocks();
            for t in terms {
                for (&p, &k) in t.exponents.iter().zip(&blocks) {
                    if !(p + k as f64 > 0.0) {
                        return Err(Error::InvalidSymbol(format!(
                            "exponent {p} is not integrable against a block of size {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn class(&self) -> SymbolClass {
        self.class
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Number of radii the profile consumes.
    pub fn arity(&self) -> usize {
        arity_for(self.class, &self.partition)
    }

    /// Block sizes behind each profile argument.
    pub fn profile_blocks(&self) -> Vec<usize> {
        match self.class {
            SymbolClass::Radial => vec![self.n()],
            SymbolClass::SeparatelyRadial | SymbolClass::QuasiRadial => {
                self.partition.blocks().to_vec()
            }
            SymbolClass::WeightedQuasiRadial | SymbolClass::DegenerateQuasiRadial => {
                self.partition.blocks()[..self.partition.m() - 1].to_vec()
            }
        }
    }

    /// `k'` for the two degenerate classes.
    pub fn reduced_partition(&self) -> Result<Partition> {
        self.partition.without_last()
    }

    /// Same class and partition, profile `c1 * self + c2 * other`.
    pub fn combine(&self, c1: f64, other: &SymbolSpec, c2: f64) -> Result<SymbolSpec> {
        if self.class != other.class || self.partition != other.partition {
            return Err(Error::InvalidSymbol(
                "linear combinations need a common class and partition".into(),
            ));
        }
        SymbolSpec::new(
            self.class,
            self.partition.clone(),
            Profile::combine(c1, &self.profile, c2, &other.profile)?,
        )
    }

    /// Squared radii fed to the profile at `z`.
    pub fn profile_arguments(&self, z: &[Complex64]) -> Vec<f64> {
        let k = &self.partition;
        let block_sq = |j: usize| -> f64 { z[k.block_range(j)].iter().map(|c| c.norm_sqr()).sum() };
        match self.class {
            SymbolClass::Radial => vec![z.iter().map(|c| c.norm_sqr()).sum()],
            SymbolClass::SeparatelyRadial => z.iter().map(|c| c.norm_sqr()).collect(),
            SymbolClass::QuasiRadial => (0..k.m()).map(block_sq).collect(),
            SymbolClass::DegenerateQuasiRadial => (0..k.m() - 1).map(block_sq).collect(),
            SymbolClass::WeightedQuasiRadial => {
                let scale = 1.0 - block_sq(k.m() - 1);
                (0..k.m() - 1).map(|j| block_sq(j) / scale).collect()
            }
        }
    }

    /// `a(z)`.
    pub fn eval_point(&self, z: &[Complex64]) -> f64 {
        self.profile.eval(&self.profile_arguments(z))
    }

    pub fn describe(&self) -> String {
        format!("{}:{}", self.class, self.profile.describe())
    }
}

pub(crate) fn arity_for(class: SymbolClass, partition: &Partition) -> usize {
    match class {
        SymbolClass::SeparatelyRadial => partition.n(),
        SymbolClass::Radial => 1,
        SymbolClass::QuasiRadial => partition.m(),
        SymbolClass::WeightedQuasiRadial | SymbolClass::DegenerateQuasiRadial => {
            partition.m().saturating_sub(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(v: &[usize]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn arity_per_class() {
        let k = part(&[2, 1, 1]);
        assert_eq!(arity_for(SymbolClass::SeparatelyRadial, &k), 4);
        assert_eq!(arity_for(SymbolClass::Radial, &k), 1);
        assert_eq!(arity_for(SymbolClass::QuasiRadial, &k), 3);
        assert_eq!(arity_for(SymbolClass::WeightedQuasiRadial, &k), 2);
        assert_eq!(arity_for(SymbolClass::DegenerateQuasiRadial, &k), 2);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let err =
            SymbolSpec::quasi_radial(part(&[2, 1]), Profile::monomial(vec![1.0])).unwrap_err();
        assert!(matches!(err, Error::InvalidSymbol(_)));
        assert!(SymbolSpec::radial(2, Profile::monomial(vec![1.0, 0.0])).is_err());
    }

    #[test]
    fn integrability_checked() {
        // p + k > 0 is required per block
        assert!(SymbolSpec::separately_radial(2, Profile::monomial(vec![-0.5, 0.0])).is_ok());
        assert!(SymbolSpec::separately_radial(2, Profile::monomial(vec![-1.0, 0.0])).is_err());
        assert!(SymbolSpec::radial(3, Profile::monomial(vec![-2.5])).is_ok());
    }

    #[test]
    fn class_structure_enforced() {
        assert!(SymbolSpec::new(
            SymbolClass::Radial,
            part(&[1, 1]),
            Profile::constant(1, 1.0)
        )
        .is_err());
        assert!(SymbolSpec::new(
            SymbolClass::SeparatelyRadial,
            part(&[2]),
            Profile::constant(2, 1.0)
        )
        .is_err());
        assert!(SymbolSpec::new(
            SymbolClass::WeightedQuasiRadial,
            part(&[2]),
            Profile::constant(0, 1.0)
        )
        .is_err());
    }

    #[test]
    fn class_mapping_of_points() {
        let z = [
            Complex64::new(0.3, 0.1),
            Complex64::new(0.0, 0.2),
            Complex64::new(0.4, -0.3),
        ];
        let sq: Vec<f64> = z.iter().map(|c| c.norm_sqr()).collect();
        let k = part(&[2, 1]);
        let q = SymbolSpec::quasi_radial(k.clone(), Profile::monomial(vec![1.0, 0.0])).unwrap();
        assert!((q.eval_point(&z) - (sq[0] + sq[1])).abs() < 1e-15);
        let w = SymbolSpec::weighted(&part(&[2]), 1, Profile::monomial(vec![1.0])).unwrap();
        assert!((w.eval_point(&z) - (sq[0] + sq[1]) / (1.0 - sq[2])).abs() < 1e-15);
        let d = SymbolSpec::degenerate(&part(&[2]), 1, Profile::monomial(vec![1.0])).unwrap();
        assert!((d.eval_point(&z) - (sq[0] + sq[1])).abs() < 1e-15);
        let r = SymbolSpec::radial(3, Profile::univariate(&[1.0, -1.0])).unwrap();
        assert!((r.eval_point(&z) - (1.0 - sq.iter().sum::<f64>())).abs() < 1e-15);
    }

    #[test]
    fn combining_profiles() {
        let a = Profile::monomial(vec![1.0]);
        let b = Profile::constant(1, 1.0);
        let c = Profile::combine(2.0, &a, -1.0, &b).unwrap();
        assert!((c.eval(&[0.25]) - (-0.5)).abs() < 1e-15);
        let f = Profile::callable("sq", 1, |r| r[0] * r[0]);
        let d = Profile::combine(1.0, &f, 3.0, &a).unwrap();
        assert!((d.eval(&[0.5]) - 1.75).abs() < 1e-15);
        assert!(Profile::combine(1.0, &a, 1.0, &Profile::constant(2, 1.0)).is_err());
    }
}
