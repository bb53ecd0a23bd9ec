//! Report documents. JSON is canonical; CSV is a flat projection of the main table.

use std::collections::BTreeMap;

use bergspec::gamma::GammaSequence;
use bergspec::lattice::{FiberLabel, Partition};
use bergspec::symbol::SymbolClass;
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};
use crate::Failure;

pub const SCHEMA: &str = "bergspec_report_v1";

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub csv: String,
    pub pass: bool,
}

impl Report {
    pub fn new(
        command: &str,
        meta: Value,
        body: Map<String, Value>,
        csv: String,
        pass: bool,
    ) -> Self {
        let mut doc = Map::new();
        doc.insert("schema".into(), json!(SCHEMA));
        doc.insert("command".into(), json!(command));
        doc.insert("meta".into(), meta);
        doc.extend(body);
        Report {
            json: Value::Object(doc),
            csv,
            pass,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.json).expect("report values are finite");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.clone(),
        }
    }
}

/// `null` for non-finite values, which JSON cannot carry.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn joined<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn meta(cfg: &RunConfig) -> Value {
    let mut m = Map::new();
    m.insert("n".into(), json!(cfg.n));
    m.insert("lambda".into(), num(cfg.lambda));
    m.insert("partition".into(), json!(cfg.partition.blocks()));
    m.insert("cap".into(), json!(cfg.cap));
    if let Some(a) = &cfg.symbol {
        m.insert("symbol".into(), json!(cfg.symbol_text));
        m.insert("class".into(), json!(a.class().name()));
        m.insert("profile".into(), json!(a.profile().describe()));
    }
    Value::Object(m)
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value, Failure> {
    v.get(key)
        .ok_or_else(|| Failure::Config(format!("report has no field {key:?}")))
}

fn as_u32_vec(v: &Value) -> Result<Vec<u32>, Failure> {
    v.as_array()
        .ok_or_else(|| Failure::Config("expected an integer array".into()))?
        .iter()
        .map(|x| {
            x.as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Failure::Config(format!("expected an integer, got {x}")))
        })
        .collect()
}

/// Reads the sequence back from a `gamma` JSON report.
pub fn parse_gamma_report(text: &str) -> Result<GammaSequence, Failure> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Failure::Config(e.to_string()))?;
    if field(&doc, "schema")? != SCHEMA {
        return Err(Failure::Config("unexpected report schema".into()));
    }
    let meta = field(&doc, "meta")?;
    let blocks: Vec<usize> = as_u32_vec(field(meta, "partition")?)?
        .into_iter()
        .map(|x| x as usize)
        .collect();
    let partition = Partition::new(blocks).map_err(|e| Failure::Config(e.to_string()))?;
    let lambda = field(meta, "lambda")?
        .as_f64()
        .ok_or_else(|| Failure::Config("lambda is not a number".into()))?;
    let cap = field(meta, "cap")?
        .as_u64()
        .and_then(|c| u32::try_from(c).ok())
        .ok_or_else(|| Failure::Config("cap is not an integer".into()))?;
    let class = meta
        .get("class")
        .and_then(Value::as_str)
        .and_then(SymbolClass::parse);
    let mut values = BTreeMap::new();
    for atom in field(&doc, "atoms")?
        .as_array()
        .ok_or_else(|| Failure::Config("atoms is not an array".into()))?
    {
        let s = FiberLabel::new(as_u32_vec(field(atom, "s")?)?);
        let g = field(atom, "gamma")?
            .as_f64()
            .ok_or_else(|| Failure::Config("gamma is not a number".into()))?;
        values.insert(s, g);
    }
    GammaSequence::from_values(partition, lambda, cap, class, values)
        .map_err(|e| Failure::Config(e.to_string()))
}
