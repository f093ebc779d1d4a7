//! Machine-readable verification reports.
//!
//! Every check in the engine produces a `VerificationReport`. Serialization
//! is deterministic: struct field order is fixed and `params` is a sorted
//! map, so identical inputs always yield byte-identical JSON.

use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Which component / sub-object the mismatch lives in (e.g. a direct-sum
    /// component name, a coefficient label, or a mode pair).
    pub component: String,
    /// Exponents or indices locating the mismatching coefficient.
    pub exponents: Vec<i64>,
    /// Rendered left-hand side value.
    pub lhs: String,
    /// Rendered right-hand side value.
    pub rhs: String,
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub check: String,
    pub algebra: String,
    pub params: BTreeMap<String, String>,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

impl VerificationReport {
    pub fn pass(check: &str, algebra: &str, params: BTreeMap<String, String>) -> Self {
        VerificationReport {
            check: check.to_string(),
            algebra: algebra.to_string(),
            params,
            verdict: "pass".to_string(),
            counterexample: None,
        }
    }

    pub fn fail(
        check: &str,
        algebra: &str,
        params: BTreeMap<String, String>,
        cex: Counterexample,
    ) -> Self {
        VerificationReport {
            check: check.to_string(),
            algebra: algebra.to_string(),
            params,
            verdict: "fail".to_string(),
            counterexample: Some(cex),
        }
    }

    pub fn is_pass(&self) -> bool {
        self.verdict == "pass"
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }

    /// One-line human rendering used by the CLI's text output.
    pub fn to_line(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ");
        match &self.counterexample {
            None => format!("{} [{}] {} ... {}", self.check, self.algebra, params, self.verdict),
            Some(c) => format!(
                "{} [{}] {} ... {} at {} {:?}: lhs={} rhs={}",
                self.check, self.algebra, params, self.verdict, c.component, c.exponents, c.lhs, c.rhs
            ),
        }
    }
}

/// Convenience builder for the `params` map.
pub fn params<const N: usize>(kv: [(&str, String); N]) -> BTreeMap<String, String> {
    kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
