//! Versioned report documents and their JSON and table renderings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algebra::RelativeModel;
use crate::classify::{ClassificationReport, Example2Report, HSpaceVerdict, Verdict};
use crate::cochains::{CochainPresentation, SquareReport};
use crate::derivation::{BracketTable, HomologyReport};
use crate::exact::format_pq;
use crate::hom::PsiReport;

pub const SCHEMA: &str = "derlie-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub inputs: Value,
    pub window: u32,
    pub result: Value,
}

impl ReportDocument {
    pub fn new(command: &str, inputs: Value, window: u32, result: Value) -> Self {
        ReportDocument {
            schema: SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            inputs,
            window,
            result,
        }
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{} {}  (window {})\n", self.command, self.schema, self.window);
        render(&mut out, "inputs", &self.inputs, 0);
        render(&mut out, "result", &self.result, 0);
        out
    }
}

fn render(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, x) in map {
                render(out, k, x, indent + 1);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (i, x) in items.iter().enumerate() {
                render(out, &format!("[{i}]"), x, indent + 1);
            }
        }
        Value::String(s) if s.contains('\n') => {
            out.push_str(&format!("{pad}{key}:\n"));
            for line in s.lines() {
                out.push_str(&format!("{pad}  {line}\n"));
            }
        }
        _ => out.push_str(&format!("{pad}{key}: {}\n", scalar(v))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".to_string(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(", "),
        Value::Object(_) => "{}".to_string(),
        other => other.to_string(),
    }
}

fn keyed<T: Serialize>(map: &BTreeMap<u32, T>) -> Value {
    Value::Object(map.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn label((n, i): (u32, usize)) -> String {
    format!("{n}.{i}")
}

/// `{"ranks": {...}}`, plus representative cycles per degree when there are any.
pub fn homology_payload(model: &RelativeModel, report: &HomologyReport) -> Value {
    let mut m = Map::new();
    m.insert("ranks".into(), keyed(&report.ranks()));
    let classes: BTreeMap<u32, Vec<String>> = report
        .degrees
        .iter()
        .filter(|(_, h)| h.rank > 0)
        .map(|(&n, h)| (n, h.representatives.iter().map(|r| r.format(model)).collect()))
        .collect();
    if !classes.is_empty() {
        m.insert("classes".into(), keyed(&classes));
    }
    Value::Object(m)
}

pub fn bracket_payload(model: &RelativeModel, report: &HomologyReport, table: &BracketTable) -> Value {
    let entries: Vec<Value> = table
        .entries
        .iter()
        .map(|e| {
            json!({
                "left": label(e.left),
                "right": label(e.right),
                "degree": e.degree(),
                "coefficients": e.coefficients.iter().map(format_pq).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "abelian": table.is_abelian(),
        "pairs_checked": table.pairs_checked,
        "entries": entries,
        "homology": homology_payload(model, report),
    })
}

pub fn verdict_payload(v: &HSpaceVerdict) -> Value {
    let verdict = match v.verdict {
        Verdict::HSpaceCertified => "h-space",
        Verdict::HSpaceBracketLevel => "h-space (bracket-level)",
        Verdict::NotHSpace => "not an h-space",
    };
    json!({
        "verdict": verdict,
        "bracket_abelian": v.bracket_abelian,
        "coformal_certified": v.coformal_certified,
        "witness": v.witness.as_ref().map(|w| json!({
            "left": w.left, "right": w.right, "result": w.result, "degree": w.degree,
        })),
        "caveat": v.caveat,
    })
}

pub fn classification_payload(r: &ClassificationReport) -> Value {
    let pos = |p: Option<u32>| p.map_or("zero".to_string(), |j| format!("s{}", 2 * j - 1));
    json!({
        "n": r.n,
        "m": r.m,
        "count": r.count,
        "types": r.representatives.iter().map(|t| json!({
            "first_nonzero": pos(t.first_nonzero),
            "n_invariant": t.n_invariant,
            "ranks": keyed(&t.ranks),
        })).collect::<Vec<_>>(),
        "merged_with_zero": r.merged_with_zero.iter().map(|&j| pos(Some(j))).collect::<Vec<_>>(),
        "merge_verified": r.merge_verified,
        "discriminators": r.discriminators.iter().map(|d| json!({
            "left": pos(d.left), "right": pos(d.right), "degree": d.degree, "ranks": [d.ranks.0, d.ranks.1],
        })).collect::<Vec<_>>(),
        "substitutions": r.substitutions.iter().map(|s| json!({
            "first_nonzero": pos(Some(s.first_nonzero)),
            "coefficients": s.coefficients.iter().map(format_pq).collect::<Vec<_>>(),
            "images": s.images,
            "verified": s.verified,
        })).collect::<Vec<_>>(),
        "literal_formula": r.literal_formula,
        "formula_disagrees": r.formula_disagrees,
        "consistent": r.is_consistent(),
    })
}

pub fn cochain_payload(p: &CochainPresentation, square: &SquareReport) -> Value {
    let gens: Vec<Value> = (0..p.len())
        .map(|g| {
            json!({
                "name": p.name(g),
                "degree": p.algebra.generator(g).degree,
                "d": p.algebra.format(p.d(g)),
                "truncated": p.truncated[g],
            })
        })
        .collect();
    json!({
        "generators": gens,
        "d_squared": {"ok": square.is_ok(), "checked": square.checked, "skipped": square.skipped, "violations": square.violations},
        "text": p.to_text(),
    })
}

pub fn psi_payload(r: &PsiReport) -> Value {
    let slices: BTreeMap<u32, Value> =
        r.slices.iter().map(|(&n, &(der, hom, rank))| (n, json!({"der": der, "hom": hom, "rank": rank}))).collect();
    json!({
        "success": r.success(),
        "slices": keyed(&slices),
        "differential_checks": r.differential_checks,
        "bracket_checks": r.bracket_checks,
        "square_checks": r.square_checks,
        "degree_one_cycles": [r.degree_one_cycles.0, r.degree_one_cycles.1],
        "counterexample": r.counterexample,
    })
}

pub fn example2_payload(r: &Example2Report) -> Value {
    json!({
        "j_ranks": keyed(&r.j_ranks),
        "top_degree": r.top_degree,
        "j_vanishes_below_top": r.j_vanishes_below_top,
        "formal_asserted": r.formal_asserted,
        "prediction": r.prediction.map(|_| "h-space"),
        "hspace": verdict_payload(&r.verdict),
        "discrepancy": r.discrepancy,
    })
}

pub fn homotopy_payload(ranks: &BTreeMap<u32, usize>) -> Value {
    let nonzero: BTreeMap<u32, usize> = ranks.iter().filter(|(_, &r)| r > 0).map(|(&k, &r)| (k, r)).collect();
    keyed(&nonzero)
}
