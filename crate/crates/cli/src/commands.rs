use bergspec::bergman::{norm_change_coeff, WeightedSpaceParams};
use bergspec::decomposition::{split, verify_scalar_blocks, verify_weight_shift};
use bergspec::gamma::build_gamma_sequence;
use bergspec::lattice::{enumerate_labels, enumerate_multi_indices, fiber_dimension, Partition};
use bergspec::oracle::{
    ball_inner_product, compare_gamma, diagonality_report, toeplitz_matrix_bruteforce,
    BallQuadrature, QuadratureMode, ToeplitzMatrix, MAX_TENSOR_DIM,
};
use bergspec::special::ln_gamma;
use bergspec::spectral::{
    commutator_norm_vs_matrix, compactness_classify, diagonal_from_gamma, equivariance_residual,
    joint_spectrum, random_block_unitary, DiagonalOperator, MAX_REPRESENTATION_WORK,
};
use bergspec::symbol::{Profile, SymbolClass, SymbolSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{Mode, RunConfig, Suite};
use crate::report::{joined, meta, num, Report};
use crate::Failure;

pub fn cmd_gamma(cfg: &RunConfig) -> Result<Report, Failure> {
    let a = cfg.require_symbol()?;
    let gs = build_gamma_sequence(a, cfg.lambda, cfg.cap)?;
    let k = gs.partition();
    let mut atoms = Vec::with_capacity(gs.len());
    let mut csv = String::from("s,gamma,multiplicity\n");
    for (s, g) in gs.iter() {
        let d = fiber_dimension(k, s)?;
        atoms.push(json!({"s": s.entries(), "gamma": num(g), "multiplicity": d}));
        csv.push_str(&format!("{},{g:?},{d}\n", joined(s.entries())));
    }
    let mut m = meta(cfg);
    m["alpha_dprime_independent"] = json!(k.m() >= 2 && gs.is_flat_in_last(0.0));
    let mut body = Map::new();
    body.insert("atoms".into(), Value::Array(atoms));
    Ok(Report::new("gamma", m, body, csv, true))
}

fn oracle_matrix(
    cfg: &RunConfig,
    a: &SymbolSpec,
) -> Result<(ToeplitzMatrix, BallQuadrature), Failure> {
    let q = cfg.quadrature(a.n(), cfg.cap)?;
    if matches!(q.mode(), QuadratureMode::Tensor { .. }) && a.n() > MAX_TENSOR_DIM {
        return Err(Failure::Config(format!(
            "tensor mode supports n <= {MAX_TENSOR_DIM}"
        )));
    }
    Ok((toeplitz_matrix_bruteforce(a, cfg.lambda, cfg.cap, &q)?, q))
}

fn with_quadrature(cfg: &RunConfig, q: &BallQuadrature) -> Value {
    let mut m = meta(cfg);
    m["quadrature"] = json!(q.describe());
    m
}

pub fn cmd_matrix(cfg: &RunConfig) -> Result<Report, Failure> {
    let a = cfg.require_symbol()?;
    let (mat, q) = oracle_matrix(cfg, a)?;
    let diag = diagonality_report(&mat, a.partition(), f64::INFINITY)?;
    let mut csv = String::from("row,col,re,im\n");
    let mut rows = Vec::with_capacity(mat.dim());
    for i in 0..mat.dim() {
        let mut row = Vec::with_capacity(mat.dim());
        for j in 0..mat.dim() {
            let v = mat.entries[(i, j)];
            row.push(json!([num(v.re), num(v.im)]));
            csv.push_str(&format!("{i},{j},{:?},{:?}\n", v.re, v.im));
        }
        rows.push(Value::Array(row));
    }
    let mut body = Map::new();
    body.insert(
        "basis".into(),
        Value::Array(mat.basis.iter().map(|b| json!(b.entries())).collect()),
    );
    body.insert("entries".into(), Value::Array(rows));
    body.insert("hermitian_defect".into(), num(mat.hermitian_defect()));
    body.insert("max_off_fiber".into(), num(diag.max_off_fiber));
    body.insert(
        "max_within_fiber_deviation".into(),
        num(diag.max_within_fiber_deviation),
    );
    Ok(Report::new(
        "matrix",
        with_quadrature(cfg, &q),
        body,
        csv,
        true,
    ))
}

#[derive(Debug, Clone)]
struct Check {
    name: String,
    pass: bool,
    residual: f64,
    tol: f64,
    details: Value,
}

impl Check {
    fn new(name: &str, residual: f64, tol: f64, details: Value) -> Self {
        Check {
            name: name.into(),
            pass: residual <= tol,
            residual,
            tol,
            details,
        }
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "residual": num(self.residual),
            "tol": num(self.tol),
            "details": self.details,
        })
    }
}

fn is_tensor(cfg: &RunConfig) -> bool {
    cfg.mode.unwrap_or(Mode::Tensor) == Mode::Tensor
}

fn default_tol(cfg: &RunConfig, suite: Suite, q: Option<&BallQuadrature>) -> f64 {
    if let Some(t) = cfg.tol {
        return t;
    }
    let mc = q.filter(|q| matches!(q.mode(), QuadratureMode::MonteCarlo { .. }));
    match (suite, mc) {
        (Suite::Commutativity, Some(q)) => 5.0 * q.tolerance(),
        (_, Some(q)) => q.tolerance(),
        (Suite::GammaMatch | Suite::Commutativity, None) => 1e-8,
        (Suite::NormChange, None) => 1e-7,
        _ => 1e-9,
    }
}

/// First-argument monomial in the class of `a`.
fn companion_symbol(a: &SymbolSpec) -> Result<SymbolSpec, Failure> {
    let mut e = vec![0.0; a.arity()];
    if let Some(first) = e.first_mut() {
        *first = 1.0;
    }
    Ok(SymbolSpec::new(
        a.class(),
        a.partition().clone(),
        Profile::monomial(e),
    )?)
}

fn decomposition_checks(cfg: &RunConfig, a: &SymbolSpec, tol: f64) -> Result<Vec<Check>, Failure> {
    let k = a.partition();
    let k_prime = k.without_last()?;
    let n_last = k.blocks()[k.m() - 1];
    let oracle = if is_tensor(cfg) && a.n() <= MAX_TENSOR_DIM {
        Some(BallQuadrature::tensor(
            a.n(),
            cfg.radial_nodes,
            cfg.angular.unwrap_or(2 * cfg.cap as usize + 2),
        )?)
    } else {
        None
    };
    let mut out = Vec::new();
    match a.class() {
        SymbolClass::WeightedQuasiRadial => {
            let rep = verify_scalar_blocks(a, cfg.lambda, cfg.cap, tol, oracle.as_ref())?;
            let residual = rep
                .max_spread
                .max(rep.max_deviation)
                .max(rep.oracle_deviation.unwrap_or(0.0))
                .max(rep.oracle_off_fiber.unwrap_or(0.0));
            out.push(Check::new(
                "decomposition/scalar-blocks",
                residual,
                tol,
                json!({
                    "max_spread": num(rep.max_spread),
                    "max_deviation": num(rep.max_deviation),
                    "oracle_deviation": rep.oracle_deviation.map(num),
                    "oracle_off_fiber": rep.oracle_off_fiber.map(num),
                    "indices_checked": rep.indices_checked,
                }),
            ));
        }
        SymbolClass::DegenerateQuasiRadial => {}
        other => {
            return Err(Failure::Config(format!(
                "the decomposition checks need a weighted or degenerate symbol, got {other}"
            )))
        }
    }
    let b = SymbolSpec::quasi_radial(k_prime, a.profile().clone())?;
    let rep = verify_weight_shift(&b, n_last, cfg.lambda, cfg.cap, tol, oracle.as_ref())?;
    out.push(Check::new(
        "decomposition/weight-shift",
        rep.max_deviation.max(rep.oracle_deviation.unwrap_or(0.0)),
        tol,
        json!({
            "max_deviation": num(rep.max_deviation),
            "worst": rep.worst.map(|s| s.entries().to_vec()),
            "oracle_deviation": rep.oracle_deviation.map(num),
            "atoms_checked": rep.atoms_checked,
        }),
    ));
    Ok(out)
}

fn norm_change_check(cfg: &RunConfig, tol: Option<f64>) -> Result<Check, Failure> {
    let n = cfg.n;
    if n < 2 {
        return Err(Failure::Config("the norm-change check needs n >= 2".into()));
    }
    let lambda = cfg.lambda;
    let params = WeightedSpaceParams::new(n, lambda)?;
    let q_full = cfg.quadrature(n, cfg.cap)?;
    let q_slice = cfg.quadrature(n - 1, cfg.cap)?;
    let tol = tol.unwrap_or_else(|| default_tol(cfg, Suite::NormChange, Some(&q_full)));
    let mut worst: f64 = 0.0;
    let mut one_dim_worst: f64 = 0.0;
    let mut cases = 0;
    for ell in 0..=cfg.cap.min(4) {
        let c = norm_change_coeff(&params, ell)?;
        let nf = n as f64;
        let l = ell as f64;
        let one_dim = ((nf + lambda).ln() + ln_gamma(l + 1.0) + ln_gamma(lambda + 1.0)
            - ln_gamma(l + lambda + 2.0))
        .exp();
        for h in enumerate_multi_indices(n - 1, 2)? {
            let hh = h.entries().to_vec();
            let hh2 = hh.clone();
            let mono = move |z: &[Complex64]| -> Complex64 {
                z.iter()
                    .zip(&hh)
                    .fold(Complex64::new(1.0, 0.0), |acc, (&zj, &e)| acc * zj.powu(e))
            };
            let full = move |z: &[Complex64]| -> Complex64 {
                let rest = z[1..]
                    .iter()
                    .zip(&hh2)
                    .fold(Complex64::new(1.0, 0.0), |acc, (&zj, &e)| acc * zj.powu(e));
                z[0].powu(ell) * rest
            };
            let lhs = ball_inner_product(&q_full, &full, &full, lambda)?.re;
            let h_norm = ball_inner_product(&q_slice, &mono, &mono, lambda + l + 1.0)?.re;
            worst = worst.max((lhs - c * h_norm).abs() / lhs.abs());
            one_dim_worst = one_dim_worst.max((lhs - one_dim * h_norm).abs() / lhs.abs());
            cases += 1;
        }
    }
    Ok(Check::new(
        "norm-change",
        worst,
        tol,
        json!({
            "cases": cases,
            "max_relative_deviation": num(worst),
            "one_dim_constant_max_relative_deviation": num(one_dim_worst),
        }),
    ))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, Failure> {
    if cfg.suite.is_empty() {
        return Err(Failure::Config(
            "verify needs at least one check in --suite".into(),
        ));
    }
    let needs_symbol = cfg.suite.iter().any(|s| *s != Suite::NormChange);
    let a = if needs_symbol {
        Some(cfg.require_symbol()?)
    } else {
        None
    };
    let mut matrix: Option<(ToeplitzMatrix, BallQuadrature)> = None;
    let mut checks = Vec::new();
    for &suite in &cfg.suite {
        match suite {
            Suite::Diagonality | Suite::GammaMatch => {
                let a = a.expect("symbol checked above");
                if matrix.is_none() {
                    matrix = Some(oracle_matrix(cfg, a)?);
                }
                let (mat, q) = matrix.as_ref().expect("just computed");
                let tol = default_tol(cfg, suite, Some(q));
                if suite == Suite::Diagonality {
                    let rep = diagonality_report(mat, a.partition(), tol)?;
                    checks.push(Check::new(
                        suite.name(),
                        rep.max_off_fiber.max(rep.max_within_fiber_deviation),
                        tol,
                        json!({
                            "max_off_fiber": num(rep.max_off_fiber),
                            "max_within_fiber_deviation": num(rep.max_within_fiber_deviation),
                            "quadrature": q.describe(),
                        }),
                    ));
                } else {
                    let gs = build_gamma_sequence(a, cfg.lambda, cfg.cap)?;
                    let rep = compare_gamma(mat, &gs, tol)?;
                    checks.push(Check::new(
                        suite.name(),
                        rep.max_deviation,
                        tol,
                        json!({
                            "max_deviation": num(rep.max_deviation),
                            "worst": rep.worst_label.map(|s| s.entries().to_vec()),
                            "quadrature": q.describe(),
                        }),
                    ));
                }
            }
            Suite::Commutativity => {
                let a = a.expect("symbol checked above");
                let b = match &cfg.symbol_b {
                    Some(b) => b.clone(),
                    None => companion_symbol(a)?,
                };
                let q = cfg.quadrature(a.n(), cfg.cap)?;
                if matches!(q.mode(), QuadratureMode::Tensor { .. }) && a.n() > MAX_TENSOR_DIM {
                    return Err(Failure::Config(format!(
                        "tensor mode supports n <= {MAX_TENSOR_DIM}"
                    )));
                }
                let tol = default_tol(cfg, suite, Some(&q));
                let r = commutator_norm_vs_matrix(a, &b, cfg.lambda, cfg.cap, &q)?;
                checks.push(Check::new(
                    suite.name(),
                    r,
                    tol,
                    json!({"symbol_b": b.describe(), "quadrature": q.describe()}),
                ));
            }
            Suite::Equivariance => {
                let a = a.expect("symbol checked above");
                let k = a.partition();
                if cfg.n * cfg.cap as usize > MAX_REPRESENTATION_WORK {
                    return Err(Failure::Config(format!(
                        "equivariance needs n * cap <= {MAX_REPRESENTATION_WORK}"
                    )));
                }
                let tol = default_tol(cfg, suite, None);
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let from_gamma =
                    diagonal_from_gamma(&build_gamma_sequence(a, cfg.lambda, cfg.cap)?)?;
                let values = enumerate_labels(k.m(), cfg.cap)
                    .into_iter()
                    .map(|s| {
                        (
                            s,
                            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                        )
                    })
                    .collect();
                let random = DiagonalOperator::new(k.clone(), cfg.lambda, cfg.cap, values)?;
                let mut worst: f64 = 0.0;
                for _ in 0..cfg.unitaries {
                    let u = random_block_unitary(k, &mut rng);
                    for t in [&from_gamma, &random] {
                        worst = worst.max(equivariance_residual(t, &u, k, cfg.lambda, cfg.cap)?);
                    }
                }
                checks.push(Check::new(
                    suite.name(),
                    worst,
                    tol,
                    json!({"unitaries": cfg.unitaries, "operators": 2}),
                ));
            }
            Suite::Decomposition => {
                let a = a.expect("symbol checked above");
                let tol = default_tol(cfg, suite, None);
                checks.extend(decomposition_checks(cfg, a, tol)?);
            }
            Suite::NormChange => checks.push(norm_change_check(cfg, cfg.tol)?),
        }
    }
    let pass = checks.iter().all(|c| c.pass);
    let mut csv = String::from("check,pass,residual,tol\n");
    for c in &checks {
        csv.push_str(&format!(
            "{},{},{:?},{:?}\n",
            c.name, c.pass, c.residual, c.tol
        ));
    }
    let mut body = Map::new();
    body.insert(
        "checks".into(),
        Value::Array(checks.iter().map(Check::to_json).collect()),
    );
    body.insert("pass".into(), json!(pass));
    Ok(Report::new("verify", meta(cfg), body, csv, pass))
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Report, Failure> {
    let k = match &cfg.symbol {
        Some(a) => a.partition().clone(),
        None => cfg.partition.clone(),
    };
    let js = joint_spectrum(&k, cfg.cap)?;
    let mut csv = String::from("s,multiplicity\n");
    let mut atoms = Vec::with_capacity(js.atoms.len());
    for (s, d) in &js.atoms {
        atoms.push(json!({"s": s.entries(), "multiplicity": d}));
        csv.push_str(&format!("{},{d}\n", joined(s.entries())));
    }
    let mut body = Map::new();
    body.insert("atoms".into(), Value::Array(atoms));
    body.insert("total_multiplicity".into(), json!(js.total_multiplicity()));
    if let Some(a) = &cfg.symbol {
        let gs = build_gamma_sequence(a, cfg.lambda, cfg.cap)?;
        let rep = compactness_classify(&gs, cfg.window)?;
        body.insert(
            "compactness".into(),
            json!({
                "verdict": rep.verdict.name(),
                "shell_max": num(rep.shell_max),
                "inner_max": num(rep.inner_max),
                "band_max": num(rep.band_max),
                "direction_rates": rep.direction_rates.iter().map(|&r| num(r)).collect::<Vec<_>>(),
                "alpha_dprime_flat": rep.alpha_dprime_flat,
                "window": rep.window,
            }),
        );
    }
    Ok(Report::new("spectrum", meta(cfg), body, csv, true))
}

pub fn cmd_decompose(cfg: &RunConfig) -> Result<Report, Failure> {
    let k: Partition = match &cfg.symbol {
        Some(a) => a.partition().clone(),
        None => cfg.partition.clone(),
    };
    if k.m() < 2 {
        return Err(Failure::Config(
            "decompose needs a partition with at least two blocks".into(),
        ));
    }
    let k_prime = k.without_last()?;
    let n_dprime = k.blocks()[k.m() - 1];
    let mut csv = String::from("alpha,alpha_prime,alpha_dprime,beta,shifted_lambda\n");
    let mut splits = Vec::new();
    for alpha in enumerate_multi_indices(k.n(), cfg.cap)? {
        let sp = split(&alpha, &k_prime, n_dprime, cfg.lambda)?;
        csv.push_str(&format!(
            "{},{},{},{},{:?}\n",
            joined(alpha.entries()),
            joined(sp.alpha_prime.entries()),
            joined(sp.alpha_dprime.entries()),
            joined(sp.beta.entries()),
            sp.shifted_lambda
        ));
        splits.push(json!({
            "alpha": alpha.entries(),
            "alpha_prime": sp.alpha_prime.entries(),
            "alpha_dprime": sp.alpha_dprime.entries(),
            "beta": sp.beta.entries(),
            "shifted_lambda": num(sp.shifted_lambda),
        }));
    }
    let mut body = Map::new();
    body.insert("splits".into(), Value::Array(splits));
    let mut pass = true;
    if let Some(a) = &cfg.symbol {
        let tol = default_tol(cfg, Suite::Decomposition, None);
        let checks = decomposition_checks(cfg, a, tol)?;
        pass = checks.iter().all(|c| c.pass);
        body.insert(
            "checks".into(),
            Value::Array(checks.iter().map(Check::to_json).collect()),
        );
        body.insert("pass".into(), json!(pass));
    }
    Ok(Report::new("decompose", meta(cfg), body, csv, pass))
}
