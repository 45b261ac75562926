use std::collections::BTreeSet;

use proptest::prelude::*;

use purelab::ability::{ambient, subtype_a, typecheck_a, AbilCtx, AbilType};
use purelab::ae::{check_against, subtype_ae, typecheck_ae, Qual};
use purelab::effect::subtype_e;
use purelab::encode::{encode_term_a, encode_term_e};
use purelab::eval::{eval, eval_observed, Observer, Outcome, Rule};
use purelab::gen::{decorate, scope_of, Gen};
use purelab::oracle::{obs_purity, op_equiv, BindingKind, EnvSpec, Equivalence, PurityOptions, SType};
use purelab::syntax::{
    desugar_let, free_vars, parse, Annot, BinOp, Mark, QualAnnot, SurfaceType, Term,
};
use purelab::system::System;

fn env() -> EnvSpec {
    EnvSpec::new([("a", BindingKind::RefCell), ("y", BindingKind::BoolVal)])
}

fn mark() -> impl Strategy<Value = Mark> {
    prop_oneof![Just(Mark::Bot), Just(Mark::Top)]
}

fn annot() -> impl Strategy<Value = Annot> {
    let qual = prop_oneof![
        Just(None),
        mark().prop_map(|m| Some(QualAnnot::Single(m))),
        (mark(), mark()).prop_map(|(fresh, stored)| Some(QualAnnot::Pair { fresh, stored })),
    ];
    let base = prop_oneof![Just(SurfaceType::Bool), Just(SurfaceType::Ref)];
    let ty = base.prop_recursive(3, 8, 2, move |inner| {
        let qual = prop_oneof![Just(None), mark().prop_map(|m| Some(QualAnnot::Single(m)))];
        (inner.clone(), qual.clone(), inner, qual, proptest::option::of(mark())).prop_map(
            |(p, pq, r, rq, latent)| SurfaceType::Fun {
                param: Box::new(Annot { ty: p, qual: pq }),
                result: Box::new(Annot { ty: r, qual: rq }),
                latent,
            },
        )
    });
    (ty, qual).prop_map(|(ty, qual)| Annot { ty, qual })
}

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["x", "y", "z", "f", "a", "b"]).prop_map(String::from)
}

fn soup_token() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "(", ")", "fun", "x", ":", "Bool", "Ref", "=>", "->", "[", "]", "top", "bot", "<", ",", ">", "^",
        "let", "=", "in", "ref", "!", ":=", "&&", "||", "true", " ", "\n", "// @env a:ref\n", "//:", "def", "check",
        "⟨", "□", "#",
    ])
}

/// Arbitrary syntax, typed or not.
fn term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![any::<bool>().prop_map(Term::Cst), name().prop_map(Term::Var)];
    leaf.prop_recursive(5, 24, 2, |inner| {
        let op = prop_oneof![Just(BinOp::And), Just(BinOp::Or)];
        prop_oneof![
            (name(), proptest::option::of(annot()), inner.clone())
                .prop_map(|(x, a, b)| Term::abs(x, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
            inner.clone().prop_map(Term::reference),
            inner.clone().prop_map(Term::get),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::put(a, b)),
            (op, inner.clone(), inner).prop_map(|(op, a, b)| Term::bin(op, a, b)),
        ]
    })
}

/// A well-typed term of `system` with its seed.
fn typed_term(system: System, max_size: usize) -> impl Strategy<Value = Term> {
    any::<u64>().prop_map(move |seed| {
        Gen::new(seed)
            .well_typed(system, &env(), max_size, 10_000)
            .expect("generator finds a term")
    })
}

fn any_typed_term(max_size: usize) -> impl Strategy<Value = Term> {
    prop_oneof![
        typed_term(System::Effect, max_size),
        typed_term(System::Ability, max_size),
        typed_term(System::Ae, max_size),
    ]
}

fn naive_free_vars(t: &Term) -> BTreeSet<String> {
    match t {
        Term::Cst(_) | Term::Hole => BTreeSet::new(),
        Term::Var(x) => BTreeSet::from([x.clone()]),
        Term::Abs { param, body, .. } => {
            let mut s = naive_free_vars(body);
            s.remove(param);
            s
        }
        Term::Ref(a) | Term::Get(a) => naive_free_vars(a),
        Term::App(a, b) | Term::Put(a, b) | Term::Bin(_, a, b) => {
            naive_free_vars(a).union(&naive_free_vars(b)).cloned().collect()
        }
    }
}

#[derive(Default)]
struct WriteLog(Vec<usize>);

impl Observer for WriteLog {
    fn write(&mut self, loc: usize) {
        self.0.push(loc);
    }

    fn step(&mut self, _rule: Rule, _term: &Term, _store_len: usize) {}
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printing_then_parsing_is_the_identity(t in term()) {
        let printed = t.to_string();
        prop_assert_eq!(parse(&printed).unwrap(), t, "{}", printed);
    }

    #[test]
    fn free_vars_match_the_reference(t in term(), x in name(), u in term()) {
        prop_assume!(t.size() <= 12);
        prop_assert_eq!(free_vars(&t), naive_free_vars(&t));
        let mut expected = free_vars(&t);
        expected.remove(&x);
        expected.extend(free_vars(&u));
        prop_assert_eq!(free_vars(&desugar_let(x, u, t)), expected);
    }

    #[test]
    fn evaluation_is_deterministic_and_fuel_monotone(t in term(), fuel in 0u64..200, extra in 1u64..200) {
        let env = env();
        let (henv, store) = env.instantiate(1);
        let first = eval(&henv, store.clone(), &t, fuel);
        prop_assert_eq!(&first, &eval(&henv, store.clone(), &t, fuel));
        let more = eval(&henv, store, &t, fuel + extra);
        match first {
            Outcome::Timeout => {}
            done => prop_assert_eq!(done, more),
        }
    }

    #[test]
    fn stores_only_grow_and_writes_hit_existing_cells(t in any_typed_term(8), config in 0u64..4) {
        let env = env();
        let (henv, store) = env.instantiate(config);
        let before = store.len();
        let mut log = WriteLog::default();
        if let Outcome::Done { store, .. } = eval_observed(&henv, store, &t, 10_000, &mut log) {
            prop_assert!(store.len() >= before);
            prop_assert!(log.0.iter().all(|&l| l < store.len()));
        }
    }

    #[test]
    fn well_typed_terms_do_not_go_wrong(t in any_typed_term(10), config in 0u64..4) {
        let size = t.size() as u64;
        let env = env();
        let (henv, store) = env.instantiate(config);
        let out = eval(&henv, store, &t, (2 * size) << size);
        prop_assert!(out.is_done(), "{} gave {}", t, out);
    }

    #[test]
    fn subtyping_is_reflexive_and_transitive(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let t = g.ae_type(4);
        let u = g.ae_super(&t, true);
        let v = g.ae_super(&u, true);
        prop_assert!(subtype_ae(&t, &t));
        prop_assert!(subtype_ae(&t, &u) && subtype_ae(&u, &v) && subtype_ae(&t, &v));
        let t = g.eff_type(4);
        let u = g.eff_super(&t, true);
        prop_assert!(subtype_e(&t, &t) && subtype_e(&t, &u));
        let t = g.abil_type(4);
        let u = g.abil_super(&t, true);
        prop_assert!(subtype_a(&t, &t) && subtype_a(&t, &u));
    }

    #[test]
    fn ambient_ability_is_monotone(marks in proptest::collection::vec(mark(), 4), keep in proptest::collection::vec(any::<bool>(), 4)) {
        let names = ["a", "b", "c", "d"];
        let ctx: AbilCtx = names.iter().zip(&marks).map(|(n, m)| (*n, (AbilType::Ref, *m))).collect();
        let all: Vec<String> = names.iter().map(|n| n.to_string()).collect();
        let some: Vec<String> = all.iter().zip(&keep).filter(|(_, k)| **k).map(|(n, _)| n.clone()).collect();
        prop_assert!(ambient(&ctx, &some).unwrap().leq(ambient(&ctx, &all).unwrap()));
    }

    #[test]
    fn abstractions_carry_the_ability_they_capture(seed in any::<u64>()) {
        let mut g = Gen::new(seed);
        let ty = SType::fun(SType::Bool, SType::Bool);
        if let Some(t) = g.term(&ty, &scope_of(&env()), 6) {
            let t = decorate(&mut g, &t, System::Ability);
            let ctx = env().ability_ctx();
            if let (Term::Abs { .. }, Ok((_, a))) = (&t, typecheck_a(&ctx, &t)) {
                prop_assert_eq!(a, ambient(&ctx, &free_vars(&t)).unwrap());
            }
        }
    }

    #[test]
    fn weaker_ascriptions_are_accepted(t in typed_term(System::Ae, 8), seed in any::<u64>()) {
        let ctx = env().ae_ctx();
        let (ty, q, e) = typecheck_ae(&ctx, &t).unwrap();
        let mut g = Gen::new(seed);
        let weaker = g.ae_super(&ty, true);
        let q2 = q.join(g.qual());
        prop_assert!(check_against(&ctx, &t, &ty, q, e).unwrap());
        prop_assert!(check_against(&ctx, &t, &weaker, q2, Mark::Top).unwrap());
        prop_assert!(check_against(&ctx, &t, &weaker, Qual::TOP, e).unwrap());
    }

    #[test]
    fn parsers_reject_soup_without_panicking(tokens in proptest::collection::vec(soup_token(), 0..30)) {
        let text = tokens.concat();
        let _ = parse(&text);
        let _ = purelab::syntax::parse_context(&text);
        let _ = purelab::syntax::parse_annot(&text);
        let _ = purelab::corpus::parse_entry(&text);
        let _ = purelab::script::parse_script(&text);
    }

    #[test]
    fn encodings_preserve_size(t in term()) {
        prop_assert_eq!(encode_term_e(&t).size(), t.size());
        prop_assert_eq!(encode_term_a(&t).size(), t.size());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operational_equivalence_is_reflexive_and_symmetric(t in any_typed_term(6), u in any_typed_term(6)) {
        prop_assert_eq!(op_equiv(&t, &t, &env(), 10_000, u64::MAX), Equivalence::Equiv);
        let swap = |e: Equivalence| match e {
            Equivalence::Distinguished(mut d) => {
                std::mem::swap(&mut d.left, &mut d.right);
                Equivalence::Distinguished(d)
            }
            other => other,
        };
        prop_assert_eq!(
            op_equiv(&t, &u, &env(), 10_000, u64::MAX),
            swap(op_equiv(&u, &t, &env(), 10_000, u64::MAX))
        );
    }

    #[test]
    fn purity_witnesses_are_minimal_and_persist(t in any_typed_term(5)) {
        let opts = |max_nodes| PurityOptions { max_nodes, fuel: 1_000, ..PurityOptions::default() };
        let env = EnvSpec::new([("a", BindingKind::RefCell)]);
        let Ok(v) = obs_purity(&t, &env, &opts(4)) else { return Ok(()); };
        if let Some(w) = &v.witness {
            let size = parse_context_size(&w.context);
            prop_assert!(obs_purity(&t, &env, &opts(size - 1)).unwrap().is_pure());
            prop_assert!(!obs_purity(&t, &env, &opts(5)).unwrap().is_pure());
        }
    }
}

fn parse_context_size(ctx: &str) -> usize {
    purelab::syntax::parse_context(ctx).expect("witness contexts re-parse").size()
}
