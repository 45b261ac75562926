//! Seeded random generation of simply-typed terms and of types, used by the
//! property suites. Generated terms carry simple annotations; [`decorate`]
//! then draws the qualifiers and latent effects a given system needs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ability::AbilType;
use crate::ae::{typecheck_ae, AEType, Qual};
use crate::effect::EffType;
use crate::oracle::{beta_precondition, reordering_precondition, EnvSpec, SType};
use crate::syntax::{free_vars, Annot, BinOp, Mark, QualAnnot, SurfaceType, Term};
use crate::system::System;

const BINDERS: [&str; 3] = ["x", "z", "f"];

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn mark(&mut self, p_top: f64) -> Mark {
        Mark::from(self.rng.gen_bool(p_top))
    }

    /// A type with at most `depth` levels of arrows.
    pub fn simple_type(&mut self, depth: usize) -> SType {
        let pick = self.rng.gen_range(0..if depth == 0 { 2 } else { 4 });
        match pick {
            0 => SType::Bool,
            1 => SType::Ref,
            _ => SType::fun(self.simple_type(depth - 1), self.simple_type(depth - 1)),
        }
    }

    /// Result types of generated top-level terms, weighted toward Bool.
    fn target_type(&mut self) -> SType {
        match self.rng.gen_range(0..20) {
            0..=11 => SType::Bool,
            12..=14 => SType::Ref,
            15..=17 => SType::fun(SType::Bool, SType::Bool),
            _ => SType::fun(SType::Ref, SType::Bool),
        }
    }

    fn arg_type(&mut self) -> SType {
        match self.rng.gen_range(0..10) {
            0..=4 => SType::Bool,
            5..=7 => SType::Ref,
            8 => SType::fun(SType::Bool, SType::Bool),
            _ => SType::fun(SType::Ref, SType::Bool),
        }
    }

    /// A random term of simple type `ty` with at most `budget` nodes, or
    /// `None` if none fits.
    pub fn term(&mut self, ty: &SType, scope: &[(String, SType)], budget: usize) -> Option<Term> {
        if budget < min_size(ty, scope) {
            return None;
        }
        let vars = visible_of(scope, ty);
        for _ in 0..8 {
            // Leaves become rarer as the budget grows.
            let leafy = if budget <= 2 { 4 } else { 1 };
            let t = match self.rng.gen_range(0..10) {
                r if r < leafy && !vars.is_empty() => Some(Term::var(vars.choose(&mut self.rng).unwrap().as_str())),
                2 if budget >= 3 => self.app(ty, scope, budget),
                3 if budget >= 3 => self.let_in(ty, scope, budget),
                _ => self.shape(ty, scope, budget),
            };
            if t.is_some() {
                return t;
            }
        }
        self.smallest(ty, scope)
    }

    fn shape(&mut self, ty: &SType, scope: &[(String, SType)], budget: usize) -> Option<Term> {
        match ty {
            SType::Bool => match self.rng.gen_range(0..6) {
                0 | 1 if budget <= 2 => Some(Term::Cst(self.rng.gen())),
                0 if budget <= 4 => Some(Term::Cst(self.rng.gen())),
                1 => Some(Term::get(self.term(&SType::Ref, scope, budget - 1)?)),
                2 => {
                    let (l, r) = self.split(budget - 1);
                    let target = self.term(&SType::Ref, scope, l)?;
                    let value = self.term(&SType::Bool, scope, r)?;
                    Some(Term::put(target, value))
                }
                _ => {
                    let (l, r) = self.split(budget - 1);
                    let op = if self.rng.gen() { BinOp::And } else { BinOp::Or };
                    let lhs = self.term(&SType::Bool, scope, l)?;
                    let rhs = self.term(&SType::Bool, scope, r)?;
                    Some(Term::bin(op, lhs, rhs))
                }
            },
            SType::Ref => Some(Term::reference(self.term(&SType::Bool, scope, budget - 1)?)),
            SType::Fun(p, r) => {
                let x = *BINDERS.choose(&mut self.rng).unwrap();
                let mut inner = scope.to_vec();
                inner.push((x.to_string(), (**p).clone()));
                let body = self.term(r, &inner, budget - 1)?;
                Some(Term::abs(x, Some(p.to_annot()), body))
            }
        }
    }

    fn app(&mut self, ty: &SType, scope: &[(String, SType)], budget: usize) -> Option<Term> {
        let arg_ty = self.arg_type();
        let (l, r) = self.split(budget - 1);
        let f = self.term(&SType::fun(arg_ty.clone(), ty.clone()), scope, l)?;
        let a = self.term(&arg_ty, scope, r)?;
        Some(Term::app(f, a))
    }

    fn let_in(&mut self, ty: &SType, scope: &[(String, SType)], budget: usize) -> Option<Term> {
        let bound_ty = self.arg_type();
        let (l, r) = self.split(budget - 2);
        let bound = self.term(&bound_ty, scope, l)?;
        let x = *BINDERS.choose(&mut self.rng).unwrap();
        let mut inner = scope.to_vec();
        inner.push((x.to_string(), bound_ty));
        let body = self.term(ty, &inner, r)?;
        Some(Term::app(Term::abs(x, None, body), bound))
    }

    /// Split `n` nodes between two subterms, each getting at least one.
    fn split(&mut self, n: usize) -> (usize, usize) {
        if n < 2 {
            return (n, 0);
        }
        let l = self.rng.gen_range(1..n);
        (l, n - l)
    }

    fn smallest(&mut self, ty: &SType, scope: &[(String, SType)]) -> Option<Term> {
        if let Some(x) = visible_of(scope, ty).first() {
            return Some(Term::var(x.as_str()));
        }
        match ty {
            SType::Bool => Some(Term::Cst(self.rng.gen())),
            SType::Ref => Some(Term::reference(Term::Cst(self.rng.gen()))),
            SType::Fun(p, r) => {
                let x = BINDERS[0];
                let mut inner = scope.to_vec();
                inner.push((x.to_string(), (**p).clone()));
                let body = self.smallest(r, &inner)?;
                Some(Term::abs(x, Some(p.to_annot()), body))
            }
        }
    }

    /// A term of a random type, decorated for `system`, that `system`
    /// accepts under `env`. Gives up after `tries` attempts.
    pub fn well_typed(&mut self, system: System, env: &EnvSpec, max_size: usize, tries: usize) -> Option<Term> {
        let scope = scope_of(env);
        for _ in 0..tries {
            let ty = self.target_type();
            let budget = self.rng.gen_range(max_size.div_ceil(2)..=max_size);
            let Some(t) = self.term(&ty, &scope, budget) else {
                continue;
            };
            let t = decorate(self, &t, system);
            if t.size() <= max_size && system.typechecks(env, &t) {
                return Some(t);
            }
        }
        None
    }

    /// `count` accepted terms; see [`Gen::well_typed`].
    pub fn corpus(&mut self, system: System, env: &EnvSpec, max_size: usize, count: usize) -> Vec<Term> {
        (0..count)
            .map(|_| {
                self.well_typed(system, env, max_size, 10_000)
                    .expect("generator keeps finding well-typed terms")
            })
            .collect()
    }

    /// Operand pairs that meet the reordering premises of `system`.
    pub fn reorder_pairs(
        &mut self,
        system: System,
        env: &EnvSpec,
        max_size: usize,
        count: usize,
    ) -> Vec<(Term, Term, BinOp)> {
        let scope = scope_of(env);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let op = if self.rng.gen() { BinOp::And } else { BinOp::Or };
            let (Some(t1), Some(t2)) = (
                self.operand(system, &scope, max_size),
                self.operand(system, &scope, max_size),
            ) else {
                continue;
            };
            if reordering_precondition(system, env, &t1, &t2, op).is_err() {
                continue;
            }
            // Every other combined-system pair has an effectful operand, so
            // the single-effect premise is exercised.
            if system == System::Ae && out.len() % 2 == 0 {
                let effect = |t: &Term| typecheck_ae(&env.ae_ctx(), t).map(|(_, _, e)| e.is_top());
                if !(effect(&t1) == Ok(true) || effect(&t2) == Ok(true)) {
                    continue;
                }
            }
            out.push((t1, t2, op));
        }
        out
    }

    fn operand(&mut self, system: System, scope: &[(String, SType)], max_size: usize) -> Option<Term> {
        let budget = self.rng.gen_range(1..=max_size);
        let t = self.term(&SType::Bool, scope, budget)?;
        Some(decorate(self, &t, system))
    }

    /// Triples `(x, body, argument)` that meet the beta-equivalence premises
    /// and whose body mentions `x`.
    pub fn beta_pairs(&mut self, env: &EnvSpec, max_size: usize, count: usize) -> Vec<(String, Term, Term)> {
        let scope = scope_of(env);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let ty = self.arg_type();
            let x = "x".to_string();
            let mut inner = scope.clone();
            inner.push((x.clone(), ty.clone()));
            let arg_budget = self.rng.gen_range(1..=max_size);
            let body_budget = self.rng.gen_range(1..=max_size);
            let (Some(t1), Some(t2)) = (
                self.term(&ty, &scope, arg_budget),
                self.term(&SType::Bool, &inner, body_budget),
            ) else {
                continue;
            };
            if !free_vars(&t2).contains(&x) {
                continue;
            }
            let t1 = decorate(self, &t1, System::Ae);
            let t2 = decorate(self, &t2, System::Ae);
            if beta_precondition(&x, &t2, &t1, env).is_ok() {
                out.push((x, t2, t1));
            }
        }
        out
    }

    pub fn eff_type(&mut self, depth: usize) -> EffType {
        match self.simple_type_shape(depth) {
            None => self.base(EffType::Bool, EffType::Ref),
            Some(()) => {
                let p = self.eff_type(depth - 1);
                let r = self.eff_type(depth - 1);
                EffType::fun(p, r, self.mark(0.5))
            }
        }
    }

    pub fn abil_type(&mut self, depth: usize) -> AbilType {
        match self.simple_type_shape(depth) {
            None => self.base(AbilType::Bool, AbilType::Ref),
            Some(()) => {
                let p = self.abil_type(depth - 1);
                let r = self.abil_type(depth - 1);
                let (pa, ra) = (self.mark(0.5), self.mark(0.5));
                AbilType::fun(p, pa, r, ra)
            }
        }
    }

    pub fn ae_type(&mut self, depth: usize) -> AEType {
        match self.simple_type_shape(depth) {
            None => self.base(AEType::Bool, AEType::Ref),
            Some(()) => {
                let p = self.ae_type(depth - 1);
                let r = self.ae_type(depth - 1);
                let pq = self.qual();
                let rq = self.qual();
                AEType::fun(p, pq, r, rq, self.mark(0.5))
            }
        }
    }

    pub fn qual(&mut self) -> Qual {
        Qual::new(self.mark(0.5), self.mark(0.5))
    }

    fn simple_type_shape(&mut self, depth: usize) -> Option<()> {
        (depth > 0 && self.rng.gen_bool(0.6)).then_some(())
    }

    fn base<T>(&mut self, b: T, r: T) -> T {
        if self.rng.gen() {
            b
        } else {
            r
        }
    }

    /// Random supertype of `t`: marks may rise in covariant positions and
    /// fall in contravariant ones.
    pub fn ae_super(&mut self, t: &AEType, up: bool) -> AEType {
        match t {
            AEType::Bool | AEType::Ref => t.clone(),
            AEType::Fun {
                param,
                param_qual,
                result,
                result_qual,
                latent,
            } => {
                let p = self.ae_super(param, !up);
                let pq = self.nudge_qual(*param_qual, !up);
                let r = self.ae_super(result, up);
                let rq = self.nudge_qual(*result_qual, up);
                let e = self.nudge(*latent, up);
                AEType::fun(p, pq, r, rq, e)
            }
        }
    }

    pub fn eff_super(&mut self, t: &EffType, up: bool) -> EffType {
        match t {
            EffType::Bool | EffType::Ref => t.clone(),
            EffType::Fun(p, r, e) => {
                let p = self.eff_super(p, !up);
                let r = self.eff_super(r, up);
                let e = self.nudge(*e, up);
                EffType::fun(p, r, e)
            }
        }
    }

    pub fn abil_super(&mut self, t: &AbilType, up: bool) -> AbilType {
        match t {
            AbilType::Bool | AbilType::Ref => t.clone(),
            AbilType::Fun {
                param,
                param_abil,
                result,
                result_abil,
            } => {
                let p = self.abil_super(param, !up);
                let pa = self.nudge(*param_abil, !up);
                let r = self.abil_super(result, up);
                let ra = self.nudge(*result_abil, up);
                AbilType::fun(p, pa, r, ra)
            }
        }
    }

    fn nudge(&mut self, m: Mark, up: bool) -> Mark {
        match (m, up, self.rng.gen_bool(0.5)) {
            (Mark::Bot, true, true) => Mark::Top,
            (Mark::Top, false, true) => Mark::Bot,
            _ => m,
        }
    }

    fn nudge_qual(&mut self, q: Qual, up: bool) -> Qual {
        Qual::new(self.nudge(q.fresh, up), self.nudge(q.stored, up))
    }
}

/// Scope entries for the ambient environment.
pub fn scope_of(env: &EnvSpec) -> Vec<(String, SType)> {
    env.simple_ctx()
        .iter()
        .map(|(x, t)| (x.to_string(), t.clone()))
        .collect()
}

/// Names in scope whose innermost binding has type `ty`.
fn visible_of<'s>(scope: &'s [(String, SType)], ty: &SType) -> Vec<&'s String> {
    let mut seen: Vec<&str> = Vec::new();
    let mut out = Vec::new();
    for (x, t) in scope.iter().rev() {
        if seen.contains(&x.as_str()) {
            continue;
        }
        seen.push(x);
        if t == ty {
            out.push(x);
        }
    }
    out
}

fn min_size(ty: &SType, scope: &[(String, SType)]) -> usize {
    if !visible_of(scope, ty).is_empty() {
        return 1;
    }
    match ty {
        SType::Bool => 1,
        SType::Ref => 2,
        SType::Fun(p, r) => {
            let mut inner = scope.to_vec();
            inner.push((BINDERS[0].to_string(), (**p).clone()));
            1 + min_size(r, &inner)
        }
    }
}

/// Replace every parameter annotation with one carrying random qualifiers
/// and latent effects of the form `system` reads.
pub fn decorate(g: &mut Gen, t: &Term, system: System) -> Term {
    let go = |g: &mut Gen, s: &Term| decorate(g, s, system);
    match t {
        Term::Cst(_) | Term::Var(_) | Term::Hole => t.clone(),
        Term::Abs { param, annot, body } => {
            let annot = annot.as_ref().map(|a| decorate_annot(g, a, system, true));
            Term::Abs {
                param: param.clone(),
                annot,
                body: Box::new(go(g, body)),
            }
        }
        Term::App(a, b) => {
            let a = go(g, a);
            Term::app(a, go(g, b))
        }
        Term::Ref(a) => Term::reference(go(g, a)),
        Term::Get(a) => Term::get(go(g, a)),
        Term::Put(a, b) => {
            let a = go(g, a);
            Term::put(a, go(g, b))
        }
        Term::Bin(op, a, b) => {
            let a = go(g, a);
            Term::bin(*op, a, go(g, b))
        }
    }
}

fn decorate_annot(g: &mut Gen, a: &Annot, system: System, positive: bool) -> Annot {
    let ty = match &a.ty {
        SurfaceType::Fun { param, result, .. } => {
            let latent = match system {
                System::Ability => None,
                // Parameters of function type mostly accept effectful arguments.
                _ => Some(g.mark(if positive { 0.7 } else { 0.3 })),
            };
            SurfaceType::Fun {
                param: Box::new(decorate_annot(g, param, system, !positive)),
                result: Box::new(decorate_annot(g, result, system, positive)),
                latent,
            }
        }
        other => other.clone(),
    };
    let qual = match system {
        System::Effect => None,
        System::Ability => match g.rng.gen_range(0..3) {
            0 => None,
            _ => Some(QualAnnot::Single(g.mark(0.5))),
        },
        System::Ae => match g.rng.gen_range(0..3) {
            0 => None,
            _ => Some(QualAnnot::Pair {
                fresh: g.mark(0.5),
                stored: g.mark(0.5),
            }),
        },
    };
    Annot { ty, qual }
}
