//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use bergspec::lattice::Partition;
use bergspec::oracle::{BallQuadrature, DEFAULT_RADIAL_NODES, MAX_TENSOR_DIM};
use bergspec::symbol::{SymbolClass, SymbolSpec};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::profile::parse_symbol;
use crate::Failure;

pub const DEFAULT_CAP: u32 = 4;
pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_UNITARIES: usize = 20;

/// Every field is optional; flags fill in or replace file values.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigFields {
    /// Complex dimension of the ball
    #[arg(long)]
    pub n: Option<usize>,

    /// Weight exponent, must be > -1
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,

    /// Block sizes, e.g. 2,1
    #[arg(long, value_delimiter = ',')]
    pub partition: Option<Vec<usize>>,

    /// Symbol as <class>:<profile>, e.g. radial:poly:0,1
    #[arg(long)]
    pub symbol: Option<String>,

    /// Second symbol for the commutativity check
    #[arg(long)]
    pub symbol_b: Option<String>,

    /// Degree cap N
    #[arg(long)]
    pub cap: Option<u32>,

    /// Oracle integration: tensor or mc
    #[arg(long)]
    pub mode: Option<String>,

    /// Radial nodes per slice (tensor mode)
    #[arg(long)]
    pub radial_nodes: Option<usize>,

    /// Angular grid size per coordinate (tensor mode)
    #[arg(long)]
    pub angular: Option<usize>,

    /// Seed for Monte Carlo sampling and random unitaries
    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,

    /// Pass/fail tolerance
    #[arg(long)]
    pub tol: Option<f64>,

    /// Shell window for compactness diagnostics
    #[arg(long)]
    pub window: Option<u32>,

    /// Checks to run: diagonality, gamma-match, commutativity, equivariance, decomposition, norm-change
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,

    /// Number of random unitaries for the equivariance check
    #[arg(long)]
    pub unitaries: Option<usize>,

    /// Report format: json or csv
    #[arg(long)]
    pub format: Option<String>,

    /// Report path (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ConfigFields {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// Values from `over` win.
    pub fn merged(self, over: ConfigFields) -> ConfigFields {
        ConfigFields {
            n: over.n.or(self.n),
            lambda: over.lambda.or(self.lambda),
            partition: over.partition.or(self.partition),
            symbol: over.symbol.or(self.symbol),
            symbol_b: over.symbol_b.or(self.symbol_b),
            cap: over.cap.or(self.cap),
            mode: over.mode.or(self.mode),
            radial_nodes: over.radial_nodes.or(self.radial_nodes),
            angular: over.angular.or(self.angular),
            seed: over.seed.or(self.seed),
            samples: over.samples.or(self.samples),
            tol: over.tol.or(self.tol),
            window: over.window.or(self.window),
            suite: over.suite.or(self.suite),
            unitaries: over.unitaries.or(self.unitaries),
            format: over.format.or(self.format),
            out: over.out.or(self.out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Tensor,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Diagonality,
    GammaMatch,
    Commutativity,
    Equivariance,
    Decomposition,
    NormChange,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Diagonality => "diagonality",
            Suite::GammaMatch => "gamma-match",
            Suite::Commutativity => "commutativity",
            Suite::Equivariance => "equivariance",
            Suite::Decomposition => "decomposition",
            Suite::NormChange => "norm-change",
        }
    }

    fn parse(s: &str) -> Option<Suite> {
        [
            Suite::Diagonality,
            Suite::GammaMatch,
            Suite::Commutativity,
            Suite::Equivariance,
            Suite::Decomposition,
            Suite::NormChange,
        ]
        .into_iter()
        .find(|x| x.name() == s)
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub lambda: f64,
    pub partition: Partition,
    pub symbol: Option<SymbolSpec>,
    pub symbol_text: Option<String>,
    pub symbol_b: Option<SymbolSpec>,
    pub cap: u32,
    pub mode: Option<Mode>,
    pub radial_nodes: usize,
    pub angular: Option<usize>,
    pub seed: u64,
    pub samples: usize,
    pub tol: Option<f64>,
    pub window: u32,
    pub suite: Vec<Suite>,
    pub unitaries: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

fn bad(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

impl RunConfig {
    pub fn from_fields(f: ConfigFields) -> Result<Self, Failure> {
        let lambda = f.lambda.unwrap_or(0.0);
        if !(lambda.is_finite() && lambda > -1.0) {
            return Err(bad(format!(
                "lambda must be a finite number > -1, got {lambda}"
            )));
        }
        let n = match (f.n, &f.partition) {
            (Some(n), Some(p)) if p.iter().sum::<usize>() != n => {
                return Err(bad(format!("partition {p:?} does not sum to n = {n}")));
            }
            (Some(n), _) => n,
            (None, Some(p)) => p.iter().sum(),
            (None, None) => return Err(bad("either n or partition is required")),
        };
        if n == 0 {
            return Err(bad("n must be at least 1"));
        }

        let class = match &f.symbol {
            Some(text) => Some(
                text.split(':')
                    .next()
                    .and_then(SymbolClass::parse)
                    .ok_or_else(|| bad(format!("unknown symbol class in {text:?}")))?,
            ),
            None => None,
        };
        let partition = match (class, &f.partition) {
            (Some(SymbolClass::Radial), None) => Partition::radial(n),
            (Some(SymbolClass::SeparatelyRadial), None) => Partition::separate(n),
            (Some(SymbolClass::WeightedQuasiRadial | SymbolClass::DegenerateQuasiRadial), None) => {
                return Err(bad(
                    "weighted and degenerate symbols need an explicit partition",
                ));
            }
            (_, None) => Partition::radial(n),
            (_, Some(p)) => Partition::new(p.clone()),
        }
        .map_err(|e| bad(e.to_string()))?;

        let symbol = match &f.symbol {
            Some(text) => Some(parse_symbol(text, &partition)?),
            None => None,
        };
        let symbol_b = match &f.symbol_b {
            Some(text) => Some(parse_symbol(text, &partition)?),
            None => None,
        };

        let mode = match f.mode.as_deref() {
            None => None,
            Some("tensor") => Some(Mode::Tensor),
            Some("mc") | Some("monte-carlo") => Some(Mode::MonteCarlo),
            Some(other) => return Err(bad(format!("unknown quadrature mode {other:?}"))),
        };
        if mode == Some(Mode::Tensor) && n > MAX_TENSOR_DIM {
            return Err(bad(format!(
                "tensor mode supports n <= {MAX_TENSOR_DIM}, got n = {n}"
            )));
        }
        let radial_nodes = f.radial_nodes.unwrap_or(DEFAULT_RADIAL_NODES);
        let samples = f.samples.unwrap_or(DEFAULT_SAMPLES);
        if radial_nodes == 0 || samples == 0 || f.angular == Some(0) {
            return Err(bad("quadrature sizes must be positive"));
        }
        if let Some(t) = f.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(bad(format!("tolerance must be positive, got {t}")));
            }
        }
        let cap = f.cap.unwrap_or(DEFAULT_CAP);
        let window = f.window.unwrap_or(bergspec::spectral::DEFAULT_WINDOW);

        let suite = match &f.suite {
            None => Vec::new(),
            Some(names) => {
                let mut out = Vec::new();
                for s in names {
                    let s = Suite::parse(s.trim())
                        .ok_or_else(|| bad(format!("unknown check {s:?}")))?;
                    if !out.contains(&s) {
                        out.push(s);
                    }
                }
                out
            }
        };
        let format = match f.format.as_deref() {
            None | Some("json") => Format::Json,
            Some("csv") => Format::Csv,
            Some(other) => return Err(bad(format!("unknown format {other:?}"))),
        };

        Ok(RunConfig {
            n,
            lambda,
            partition,
            symbol,
            symbol_text: f.symbol,
            symbol_b,
            cap,
            mode,
            radial_nodes,
            angular: f.angular,
            seed: f.seed.unwrap_or(0),
            samples,
            tol: f.tol,
            window,
            suite,
            unitaries: f.unitaries.unwrap_or(DEFAULT_UNITARIES),
            format,
            out: f.out,
        })
    }

    pub fn require_symbol(&self) -> Result<&SymbolSpec, Failure> {
        self.symbol
            .as_ref()
            .ok_or_else(|| bad("this command needs --symbol"))
    }

    /// Oracle rule for dimension `n`, exact in angle up to degree `cap`.
    pub fn quadrature(&self, n: usize, cap: u32) -> Result<BallQuadrature, Failure> {
        let q = match self.mode.unwrap_or(Mode::Tensor) {
            Mode::Tensor => {
                if n > MAX_TENSOR_DIM + 1 {
                    return Err(bad(format!(
                        "tensor mode supports n <= {MAX_TENSOR_DIM}, got n = {n}"
                    )));
                }
                let angular = self.angular.unwrap_or(2 * cap as usize + 2);
                BallQuadrature::tensor(n, self.radial_nodes, angular)
            }
            Mode::MonteCarlo => BallQuadrature::monte_carlo(n, self.seed, self.samples),
        };
        q.map_err(|e| bad(e.to_string()))
    }

    pub fn mode_name(&self) -> &'static str {
        match self.mode {
            Some(Mode::MonteCarlo) => "mc",
            _ => "tensor",
        }
    }
}
