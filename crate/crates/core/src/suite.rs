//! Randomized and exhaustive checks of the metatheory, each reported as a
//! [`Report`] with its seed and a count of violations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::ae::{abs_qualifier, app_qualifier, sub_qual, subtype_ae, Qual};
use crate::ability::subtype_a;
use crate::corpus::{CorpusEntry, FIG1, FIG2};
use crate::effect::{compose, subtype_e};
use crate::encode::{check_encoding_a, check_encoding_e, EncodingReport};
use crate::gen::Gen;
use crate::oracle::{
    check_beta, check_reordering, safety_case, BindingKind, EnvSpec, PurityOptions, SafetyCase, TheoremCheck,
};
use crate::report::{Report, TermRow};
use crate::syntax::{desugar_let, Mark, Term};
use crate::system::System;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Safety,
    Reorder,
    Beta,
    Encode,
    Algebra,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Safety, Suite::Reorder, Suite::Beta, Suite::Encode, Suite::Algebra];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Safety => "safety",
            Suite::Reorder => "reorder",
            Suite::Beta => "beta",
            Suite::Encode => "encode",
            Suite::Algebra => "algebra",
        }
    }

    /// Generated cases per system when no count is given.
    pub fn default_count(self) -> usize {
        match self {
            Suite::Safety => 1000,
            Suite::Reorder | Suite::Beta => 200,
            Suite::Encode => 500,
            Suite::Algebra => 2000,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected safety, reorder, beta, encode or algebra)"))
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub count: Option<usize>,
    pub purity: PurityOptions,
    /// Skip the golden corpus entries the safety and encoding suites add to
    /// the generated terms.
    pub generated_only: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: DEFAULT_SEED,
            count: None,
            purity: PurityOptions::default(),
            generated_only: false,
        }
    }
}

/// Generated safety and encoding terms live in this environment.
pub fn safety_env() -> EnvSpec {
    EnvSpec::new([("a", BindingKind::RefCell), ("y", BindingKind::BoolVal)])
}

/// Reordering and beta pairs live in this one, so two distinct cells can
/// interfere.
pub fn equation_env() -> EnvSpec {
    EnvSpec::new([
        ("a", BindingKind::RefCell),
        ("b", BindingKind::RefCell),
        ("y", BindingKind::BoolVal),
    ])
}

const SAFETY_SIZE: usize = 8;
const EQUATION_SIZE: usize = 5;

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Report {
    let mut report = Report::new(format!("suite {suite}"), (&opts.purity).into());
    report.seed = Some(opts.seed);
    let count = opts.count.unwrap_or(suite.default_count());
    match suite {
        Suite::Safety => safety(&mut report, opts, count),
        Suite::Reorder => reorder(&mut report, opts, count),
        Suite::Beta => beta(&mut report, opts, count),
        Suite::Encode => encode(&mut report, opts, count),
        Suite::Algebra => algebra(&mut report, opts, count),
    }
    report
}

fn golden_entries() -> Vec<(String, CorpusEntry)> {
    let mut out = Vec::new();
    for g in [FIG1, FIG2] {
        out.extend(g.entries().map(|(f, e)| (format!("{}/{f}", g.name), e)));
    }
    out
}

fn record_safety(report: &mut Report, system: System, file: Option<String>, case: SafetyCase) {
    let key = system.name();
    match case.system_pure {
        None => report.count(&format!("{key}.illTyped"), 1),
        Some(true) => report.count(&format!("{key}.typedPure"), 1),
        Some(false) => report.count(&format!("{key}.typedImpure"), 1),
    }
    if let Some(v) = &case.verdict {
        report.count(&format!("{key}.inconclusiveContexts"), v.inconclusive as u64);
    }
    report.count(&format!("{key}.terms"), 1);
    if case.violation {
        report.violations += 1;
        report.per_term.push(TermRow {
            file,
            term: case.term,
            detail: Some(format!("{key} types it pure but the oracle finds it impure")),
            witness: case.verdict.and_then(|v| v.witness),
            ..TermRow::default()
        });
    }
}

fn safety(report: &mut Report, opts: &SuiteOptions, count: usize) {
    let env = safety_env();
    report.inputs.push("generated".into());
    for system in System::ALL {
        let mut g = Gen::new(opts.seed);
        for t in g.corpus(system, &env, SAFETY_SIZE, count) {
            let case = safety_case(system, &env, &t, &opts.purity);
            record_safety(report, system, None, case);
        }
    }
    if opts.generated_only {
        return;
    }
    for (file, entry) in golden_entries() {
        report.inputs.push(file.clone());
        let purity = PurityOptions {
            hole_type: entry.hole.clone(),
            ..opts.purity.clone()
        };
        for system in System::ALL {
            let case = safety_case(system, &entry.env, &entry.term, &purity);
            record_safety(report, system, Some(file.clone()), case);
        }
    }
}

fn record_check(report: &mut Report, key: &str, term: String, check: TheoremCheck) {
    let outcome = match &check {
        TheoremCheck::Holds => "holds",
        TheoremCheck::Fails(_) => "fails",
        TheoremCheck::Inconclusive => "inconclusive",
        TheoremCheck::Precondition { .. } => "precondition",
    };
    report.count(&format!("{key}.{outcome}"), 1);
    if let TheoremCheck::Fails(d) = check {
        report.violations += 1;
        report.per_term.push(TermRow {
            term,
            detail: Some(format!("{key}: {}", serde_json::to_string(&d).expect("serializable"))),
            ..TermRow::default()
        });
    }
}

fn reorder(report: &mut Report, opts: &SuiteOptions, count: usize) {
    let env = equation_env();
    report.inputs.push("generated".into());
    for system in System::ALL {
        let mut g = Gen::new(opts.seed);
        for (t1, t2, op) in g.reorder_pairs(system, &env, EQUATION_SIZE, count) {
            let check = check_reordering(&t1, &t2, op, system, &env, opts.purity.fuel, opts.purity.store_bound);
            let shown = Term::bin(op, t1, t2).to_string();
            record_check(report, system.name(), shown, check);
        }
    }
}

fn beta(report: &mut Report, opts: &SuiteOptions, count: usize) {
    let env = equation_env();
    report.inputs.push("generated".into());
    let mut g = Gen::new(opts.seed);
    for (x, body, arg) in g.beta_pairs(&env, EQUATION_SIZE, count) {
        let check = check_beta(&x, &body, &arg, &env, opts.purity.fuel, opts.purity.store_bound);
        let shown = desugar_let(x, arg, body).to_string();
        record_check(report, System::Ae.name(), shown, check);
    }
}

fn record_encoding(report: &mut Report, file: Option<String>, r: EncodingReport) {
    let key = r.source_system.name();
    match r.holds {
        None => report.count(&format!("{key}.illTyped"), 1),
        Some(true) => report.count(&format!("{key}.holds"), 1),
        Some(false) => {
            report.count(&format!("{key}.fails"), 1);
            report.violations += 1;
            let detail = format!(
                "{key}: expected {} up to subsumption, derived {}",
                r.target_judgment.as_deref().unwrap_or("?"),
                r.synthesized.as_deref().unwrap_or("nothing")
            );
            report.per_term.push(TermRow {
                file,
                term: r.term,
                detail: Some(detail),
                error: r.error,
                ..TermRow::default()
            });
        }
    }
}

fn encode(report: &mut Report, opts: &SuiteOptions, count: usize) {
    let env = safety_env();
    report.inputs.push("generated".into());
    for system in [System::Effect, System::Ability] {
        let mut g = Gen::new(opts.seed);
        for t in g.corpus(system, &env, SAFETY_SIZE, count) {
            let r = match system {
                System::Effect => check_encoding_e(&env.effect_ctx(), &t),
                _ => check_encoding_a(&env.ability_ctx(), &t),
            };
            record_encoding(report, None, r);
        }
    }
    if opts.generated_only {
        return;
    }
    for (file, entry) in golden_entries() {
        report.inputs.push(file.clone());
        for r in [
            check_encoding_e(&entry.env.effect_ctx(), &entry.term),
            check_encoding_a(&entry.env.ability_ctx(), &entry.term),
        ] {
            if r.holds.is_some() {
                record_encoding(report, Some(file.clone()), r);
            }
        }
    }
}

const MARKS: [Mark; 2] = [Mark::Bot, Mark::Top];

fn quals() -> impl Iterator<Item = Qual> + Clone {
    MARKS.into_iter().flat_map(|f| MARKS.into_iter().map(move |s| Qual::new(f, s)))
}

fn law(report: &mut Report, laws: &mut BTreeMap<&'static str, u64>, name: &'static str, holds: bool, detail: impl FnOnce() -> String) {
    report.count("checks", 1);
    if !holds {
        report.violations += 1;
        let failures = laws.entry(name).or_default();
        *failures += 1;
        if *failures == 1 {
            report.per_term.push(TermRow {
                term: name.to_string(),
                detail: Some(detail()),
                ..TermRow::default()
            });
        }
    }
}

fn algebra(report: &mut Report, opts: &SuiteOptions, count: usize) {
    let mut laws = BTreeMap::new();
    report.inputs.push("exhaustive".into());
    for a in MARKS {
        for b in MARKS {
            law(report, &mut laws, "mark join commutes", a.join(b) == b.join(a), || format!("{a} {b}"));
            law(report, &mut laws, "mark join is idempotent", a.join(a) == a, || format!("{a}"));
            law(report, &mut laws, "bot is the join identity", Mark::Bot.join(a) == a, || format!("{a}"));
            law(report, &mut laws, "join is an upper bound", a.leq(a.join(b)), || format!("{a} {b}"));
            law(report, &mut laws, "composition is the join", compose(a, b) == a.join(b), || format!("{a} {b}"));
            for c in MARKS {
                law(
                    report,
                    &mut laws,
                    "mark join associates",
                    a.join(b).join(c) == a.join(b.join(c)),
                    || format!("{a} {b} {c}"),
                );
            }
        }
    }
    for p in quals() {
        for q in quals() {
            law(report, &mut laws, "qualifier join commutes", p.join(q) == q.join(p), || format!("{p} {q}"));
            law(report, &mut laws, "qualifier join is an upper bound", sub_qual(p, p.join(q)), || format!("{p} {q}"));
            for r in quals() {
                law(
                    report,
                    &mut laws,
                    "qualifier join associates",
                    p.join(q).join(r) == p.join(q.join(r)),
                    || format!("{p} {q} {r}"),
                );
            }
        }
    }
    // Both qualifier rules are monotone in every argument.
    let abs_inputs: Vec<(Qual, Qual, Mark)> = quals()
        .flat_map(|af| quals().flat_map(move |a2| MARKS.into_iter().map(move |e2| (af, a2, e2))))
        .collect();
    for &(af, a2, e2) in &abs_inputs {
        for &(bf, b2, f2) in &abs_inputs {
            if sub_qual(af, bf) && sub_qual(a2, b2) && e2.leq(f2) {
                law(
                    report,
                    &mut laws,
                    "abstraction qualifier is monotone",
                    sub_qual(abs_qualifier(af, a2, e2), abs_qualifier(bf, b2, f2)),
                    || format!("({af} {a2} {e2}) <= ({bf} {b2} {f2})"),
                );
            }
        }
    }
    let app_inputs: Vec<[Mark; 9]> = (0u16..512)
        .map(|bits| std::array::from_fn(|i| Mark::from(bits >> i & 1 == 1)))
        .collect();
    let app = |m: &[Mark; 9]| {
        app_qualifier(
            Qual::new(m[0], m[1]),
            m[2],
            Qual::new(m[3], m[4]),
            m[5],
            Qual::new(m[6], m[7]),
            m[8],
        )
    };
    let outputs: Vec<(Qual, Mark)> = app_inputs.iter().map(app).collect();
    for (i, lo) in app_inputs.iter().enumerate() {
        for (j, hi) in app_inputs.iter().enumerate() {
            if lo.iter().zip(hi).all(|(a, b)| a.leq(*b)) {
                let ((q1, e1), (q2, e2)) = (outputs[i], outputs[j]);
                law(
                    report,
                    &mut laws,
                    "application qualifier is monotone",
                    sub_qual(q1, q2) && e1.leq(e2),
                    || format!("{lo:?} <= {hi:?}"),
                );
            }
        }
    }
    // Subtyping: reflexive, and transitive along random supertype chains.
    let mut g = Gen::new(opts.seed);
    for _ in 0..count {
        let t = g.ae_type(4);
        let (u, v) = {
            let u = g.ae_super(&t, true);
            let v = g.ae_super(&u, true);
            (u, v)
        };
        law(report, &mut laws, "combined subtyping is reflexive", subtype_ae(&t, &t), || t.to_string());
        law(
            report,
            &mut laws,
            "combined subtyping is transitive",
            !(subtype_ae(&t, &u) && subtype_ae(&u, &v)) || subtype_ae(&t, &v),
            || format!("{t} <: {u} <: {v}"),
        );
        let t = g.eff_type(4);
        let u = g.eff_super(&t, true);
        let v = g.eff_super(&u, true);
        law(report, &mut laws, "effect subtyping is reflexive", subtype_e(&t, &t), || t.to_string());
        law(
            report,
            &mut laws,
            "effect subtyping is transitive",
            !(subtype_e(&t, &u) && subtype_e(&u, &v)) || subtype_e(&t, &v),
            || format!("{t} <: {u} <: {v}"),
        );
        let t = g.abil_type(4);
        let u = g.abil_super(&t, true);
        let v = g.abil_super(&u, true);
        law(report, &mut laws, "ability subtyping is reflexive", subtype_a(&t, &t), || t.to_string());
        law(
            report,
            &mut laws,
            "ability subtyping is transitive",
            !(subtype_a(&t, &u) && subtype_a(&u, &v)) || subtype_a(&t, &v),
            || format!("{t} <: {u} <: {v}"),
        );
    }
    for (name, failures) in laws {
        report.count(&format!("failed: {name}"), failures);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn algebra_holds() {
        let r = run_suite(Suite::Algebra, &SuiteOptions { count: Some(200), ..SuiteOptions::default() });
        assert_eq!(r.violations, 0, "{}", r.to_text());
        assert!(r.summary["checks"] > 1000);
    }

    #[test]
    fn small_suites_are_clean_and_deterministic() {
        for suite in [Suite::Safety, Suite::Reorder, Suite::Beta, Suite::Encode] {
            let opts = SuiteOptions {
                count: Some(10),
                generated_only: true,
                ..SuiteOptions::default()
            };
            let r = run_suite(suite, &opts);
            assert_eq!(r.violations, 0, "{suite}: {}", r.to_text());
            assert_eq!(r, run_suite(suite, &opts));
        }
    }
}
