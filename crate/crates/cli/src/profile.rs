//! Symbol descriptors: `<class>:<profile>`.
//!
//! Profiles, with `rho` the squared radii the class feeds in:
//!
//! - `one`, `const:c`
//! - `poly:c0,c1,...`  `sum_i c_i (rho_1 + ... + rho_m)^i`
//! - `mono:p1,...,pm`  `prod rho_j^{p_j}`
//! - `terms:c@p1,...,pm;c@...`  sum of monomials
//! - `exp:c`  `exp(-c (rho_1 + ... + rho_m))`
//! - `step:t`  indicator of `rho_1 + ... + rho_m < t`

use bergspec::lattice::{enumerate_labels, Partition};
use bergspec::special::ln_factorial;
use bergspec::symbol::{Profile, SymbolClass, SymbolSpec, Term};

use crate::Failure;

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn numbers(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|x| {
            let x = x.trim();
            x.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("cannot read number {x:?}")))
        })
        .collect()
}

fn number(text: &str) -> Result<f64, Failure> {
    let v = numbers(text)?;
    if v.len() == 1 {
        Ok(v[0])
    } else {
        Err(bad(format!("expected a single number, got {text:?}")))
    }
}

/// `sum_i c_i (rho_1 + ... + rho_m)^i`, expanded into monomials.
fn power_sum_polynomial(coeffs: &[f64], arity: usize) -> Result<Profile, Failure> {
    if arity == 0 {
        let total = coeffs.first().copied().unwrap_or(0.0);
        return Ok(Profile::constant(0, total));
    }
    let degree = coeffs.len().saturating_sub(1) as u32;
    let mut terms = Vec::new();
    for e in enumerate_labels(arity, degree) {
        let c = coeffs[e.total() as usize];
        if c == 0.0 {
            continue;
        }
        let ln_multinomial =
            ln_factorial(e.total()) - e.entries().iter().map(|&x| ln_factorial(x)).sum::<f64>();
        terms.push(Term {
            coef: c * ln_multinomial.exp().round(),
            exponents: e.entries().iter().map(|&x| x as f64).collect(),
        });
    }
    if terms.is_empty() {
        return Ok(Profile::constant(arity, 0.0));
    }
    Profile::polynomial(arity, terms).map_err(|e| bad(e.to_string()))
}

pub fn parse_profile(text: &str, arity: usize) -> Result<Profile, Failure> {
    let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "one" if rest.is_empty() => Ok(Profile::constant(arity, 1.0)),
        "const" => Ok(Profile::constant(arity, number(rest)?)),
        "poly" => power_sum_polynomial(&numbers(rest)?, arity),
        "mono" => {
            let p = numbers(rest)?;
            if p.len() != arity {
                return Err(bad(format!(
                    "mono needs {arity} exponents, got {}",
                    p.len()
                )));
            }
            Ok(Profile::monomial(p))
        }
        "terms" => {
            let mut terms = Vec::new();
            for part in rest.split(';') {
                let (c, e) = part
                    .split_once('@')
                    .ok_or_else(|| bad(format!("term {part:?} is not of the form c@p1,...")))?;
                terms.push(Term {
                    coef: number(c)?,
                    exponents: numbers(e)?,
                });
            }
            Profile::polynomial(arity, terms).map_err(|e| bad(e.to_string()))
        }
        "exp" => {
            let c = number(rest)?;
            Ok(Profile::callable(format!("exp:{c}"), arity, move |rho| {
                (-c * rho.iter().sum::<f64>()).exp()
            }))
        }
        "step" => {
            let t = number(rest)?;
            Ok(Profile::callable(format!("step:{t}"), arity, move |rho| {
                if rho.iter().sum::<f64>() < t {
                    1.0
                } else {
                    0.0
                }
            }))
        }
        _ => Err(bad(format!("unknown profile {text:?}"))),
    }
}

/// Parses `<class>:<profile>` against the run's partition.
pub fn parse_symbol(text: &str, partition: &Partition) -> Result<SymbolSpec, Failure> {
    let (class_name, profile_text) = text.split_once(':').ok_or_else(|| {
        bad(format!(
            "symbol {text:?} is not of the form <class>:<profile>"
        ))
    })?;
    let class = SymbolClass::parse(class_name)
        .ok_or_else(|| bad(format!("unknown symbol class {class_name:?}")))?;
    let arity = match class {
        SymbolClass::Radial => 1,
        SymbolClass::SeparatelyRadial => partition.n(),
        SymbolClass::QuasiRadial => partition.m(),
        SymbolClass::WeightedQuasiRadial | SymbolClass::DegenerateQuasiRadial => {
            partition.m().saturating_sub(1)
        }
    };
    let profile = parse_profile(profile_text, arity)?;
    SymbolSpec::new(class, partition.clone(), profile).map_err(|e| bad(e.to_string()))
}
