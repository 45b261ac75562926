//! Machine-readable reports shared by the comparison command and the suites.
//!
//! Reports are deterministic at fixed bounds and seed: maps are ordered and
//! wall time is only recorded on request.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{evaluate_entry, mismatches, CorpusEntry, CorpusError, Verdict};
use crate::oracle::{PurityOptions, Witness};
use crate::system::System;

pub const SCHEMA: &str = "purelab-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportBounds {
    pub max_nodes: usize,
    pub fuel: u64,
    pub store_bound: u64,
}

impl From<&PurityOptions> for ReportBounds {
    fn from(o: &PurityOptions) -> Self {
        ReportBounds {
            max_nodes: o.max_nodes,
            fuel: o.fuel,
            store_bound: o.store_bound,
        }
    }
}

/// How a system's purity verdict relates to the oracle's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Agreement {
    Agree,
    /// The system rejects a term the oracle finds pure.
    Incomplete,
    /// The system accepts a term the oracle finds impure.
    Unsound,
    IllTyped,
    /// No oracle verdict to compare with.
    Unknown,
}

impl Agreement {
    pub fn of(system: Verdict, oracle: Option<Verdict>) -> Agreement {
        match (system, oracle) {
            (Verdict::IllTyped, _) => Agreement::IllTyped,
            (_, None) => Agreement::Unknown,
            (s, Some(o)) if s == o => Agreement::Agree,
            (Verdict::Pure, Some(Verdict::Impure)) => Agreement::Unsound,
            (Verdict::Impure, Some(Verdict::Pure)) => Agreement::Incomplete,
            _ => Agreement::Unknown,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Mismatch {
    pub key: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TermRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub term: String,
    /// Purity per system, keyed by system name.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub systems: BTreeMap<String, Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub semantic: Option<Verdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub agreement: BTreeMap<String, Agreement>,
    /// Further verdicts, such as the function-table columns.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub verdicts: BTreeMap<String, Verdict>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub figure: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mismatches: Vec<Mismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema: &'static str,
    pub command: String,
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub bounds: ReportBounds,
    pub per_term: Vec<TermRow>,
    pub summary: BTreeMap<String, u64>,
    /// Checks that failed. Nonzero means exit status 1.
    pub violations: u64,
    /// Inputs that could not be read or parsed. Nonzero means exit status 2.
    pub errors: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl Report {
    pub fn new(command: impl Into<String>, bounds: ReportBounds) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            inputs: Vec::new(),
            seed: None,
            bounds,
            per_term: Vec::new(),
            summary: BTreeMap::new(),
            violations: 0,
            errors: 0,
            wall_time: None,
        }
    }

    pub fn count(&mut self, key: &str, n: u64) {
        *self.summary.entry(key.to_string()).or_default() += n;
    }

    pub fn exit_code(&self) -> i32 {
        if self.errors > 0 {
            2
        } else if self.violations > 0 {
            1
        } else {
            0
        }
    }

    /// Plain-text rendering: one line per term, then the summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for row in &self.per_term {
            let label = row.name.as_deref().or(row.file.as_deref()).unwrap_or("-");
            let systems: Vec<String> = row.systems.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("{label:<16} {:<40}", row.term));
            if !systems.is_empty() {
                out.push_str(&format!(" {}", systems.join(" ")));
            }
            if let Some(s) = row.semantic {
                out.push_str(&format!(" oracle={s}"));
            }
            for m in &row.mismatches {
                out.push_str(&format!(" [{}: expected {}, got {}]", m.key, m.expected, m.actual));
            }
            if let Some(d) = &row.detail {
                out.push_str(&format!(" {d}"));
            }
            if let Some(e) = &row.error {
                out.push_str(&format!(" error: {e}"));
            }
            out.push('\n');
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out.push_str(&format!("violations: {}\n", self.violations));
        if self.errors > 0 {
            out.push_str(&format!("errors: {}\n", self.errors));
        }
        out
    }
}

/// One corpus file's row: every system's verdict next to the oracle's.
pub fn compare_row(file: Option<String>, entry: &CorpusEntry, opts: &PurityOptions) -> TermRow {
    let got = evaluate_entry(entry, opts);
    let semantic = got.verdicts.get("oracle").copied();
    let mut systems = BTreeMap::new();
    let mut agreement = BTreeMap::new();
    for s in System::ALL {
        let v = got.verdicts[s.name()];
        systems.insert(s.name().to_string(), v);
        agreement.insert(s.name().to_string(), Agreement::of(v, semantic));
    }
    let verdicts = got
        .verdicts
        .iter()
        .filter(|(k, _)| k.contains('.'))
        .map(|(k, v)| (k.clone(), *v))
        .collect();
    TermRow {
        file,
        name: entry.name.clone(),
        term: entry.term.to_string(),
        systems,
        semantic,
        agreement,
        verdicts,
        figure: entry.figure.clone(),
        mismatches: mismatches(entry, &got)
            .into_iter()
            .map(|(key, expected, actual)| Mismatch { key, expected, actual })
            .collect(),
        witness: got.oracle.and_then(|v| v.witness),
        detail: None,
        error: got.oracle_error.map(|e| format!("oracle: {e}")),
    }
}

/// Classify every corpus file and count, per system, how many oracle-pure
/// terms it types pure. Unsound verdicts and failed expectations are
/// violations; unreadable files are errors.
pub fn compare(inputs: Vec<(String, Result<CorpusEntry, CorpusError>)>, opts: &PurityOptions) -> Report {
    let mut report = Report::new("compare", opts.into());
    report.count("terms", 0);
    report.count("oraclePure", 0);
    for s in System::ALL {
        report.count(&format!("{}.typedPure", s.name()), 0);
        report.count(&format!("{}.unsound", s.name()), 0);
    }
    for (file, parsed) in inputs {
        report.inputs.push(file.clone());
        let entry = match parsed {
            Ok(e) => e,
            Err(e) => {
                report.errors += 1;
                report.per_term.push(TermRow {
                    file: Some(file),
                    error: Some(e.to_string()),
                    ..TermRow::default()
                });
                continue;
            }
        };
        let row = compare_row(Some(file), &entry, opts);
        report.count("terms", 1);
        let oracle_pure = row.semantic == Some(Verdict::Pure);
        report.count("oraclePure", oracle_pure as u64);
        for s in System::ALL {
            let typed_pure = row.systems[s.name()] == Verdict::Pure;
            report.count(&format!("{}.typedPure", s.name()), (oracle_pure && typed_pure) as u64);
            let unsound = row.agreement[s.name()] == Agreement::Unsound;
            report.count(&format!("{}.unsound", s.name()), unsound as u64);
            report.violations += unsound as u64;
        }
        report.violations += row.mismatches.len() as u64;
        report.per_term.push(row);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_entry, FIG1};

    #[test]
    fn agreement_table() {
        use Verdict::*;
        assert_eq!(Agreement::of(Pure, Some(Pure)), Agreement::Agree);
        assert_eq!(Agreement::of(Pure, Some(Impure)), Agreement::Unsound);
        assert_eq!(Agreement::of(Impure, Some(Pure)), Agreement::Incomplete);
        assert_eq!(Agreement::of(IllTyped, Some(Pure)), Agreement::IllTyped);
        assert_eq!(Agreement::of(Pure, None), Agreement::Unknown);
    }

    #[test]
    fn empty_compare() {
        let r = compare(Vec::new(), &PurityOptions::default());
        assert!(r.per_term.is_empty());
        assert_eq!(r.exit_code(), 0);
        assert_eq!(r.summary["terms"], 0);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["schema"], SCHEMA);
        assert!(json.get("wallTime").is_none());
    }

    #[test]
    fn unreadable_file_is_an_error_and_the_run_continues() {
        let inputs = vec![
            ("bad.lam".to_string(), parse_entry("// @bogus\ntrue")),
            ("ok.lam".to_string(), parse_entry("true")),
        ];
        let r = compare(inputs, &PurityOptions::default());
        assert_eq!(r.per_term.len(), 2);
        assert_eq!(r.errors, 1);
        assert_eq!(r.exit_code(), 2);
        assert_eq!(r.summary["terms"], 1);
    }

    #[test]
    fn fig1_completeness() {
        let inputs = FIG1.entries().map(|(f, e)| (f.to_string(), Ok(e))).collect();
        let r = compare(inputs, &PurityOptions::default());
        assert_eq!(r.violations, 0, "{}", r.to_text());
        assert_eq!(r.summary["oraclePure"], 4);
        assert_eq!(r.summary["effect.typedPure"], 2);
        assert_eq!(r.summary["ability.typedPure"], 3);
        assert_eq!(r.summary["ae.typedPure"], 4);
    }
}
