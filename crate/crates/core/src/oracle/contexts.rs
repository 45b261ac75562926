//! Enumeration of simply-typed program contexts.
//!
//! A context is a Bool-typed term that may contain any number of holes, all
//! of the same type. Holes cost nothing toward the size bound, so a context
//! may discard the plugged term (no holes) or run it several times. Contexts
//! come out in nondecreasing node count; within a size the order follows the
//! production list (hole, constants, variables, abstraction, application,
//! `ref`, `!`, `:=`, `&&`, `||`) and then splits the size left to right, so the
//! first distinguishing context found is a smallest one.
//!
//! Binders are named `x0`, `x1` by nesting depth and annotated with `Bool` or
//! `Ref`; at most two binders are open at once.

use std::collections::HashMap;
use std::rc::Rc;

use super::simple::SType;
use crate::syntax::{BinOp, Term};

pub const BINDER_POOL: [&str; 2] = ["x0", "x1"];

type Key = (SType, Vec<SType>, usize);

pub struct ContextEnumerator {
    hole: SType,
    env: Vec<(String, SType)>,
    universe: Vec<SType>,
    memo: HashMap<Key, Rc<Vec<Term>>>,
}

impl ContextEnumerator {
    pub fn new(hole: SType, env: Vec<(String, SType)>) -> Self {
        let mut universe = Vec::new();
        hole.components(&mut universe);
        for (_, ty) in &env {
            ty.components(&mut universe);
        }
        ContextEnumerator {
            hole,
            env,
            universe,
            memo: HashMap::new(),
        }
    }

    /// All Bool contexts of exactly `size` nodes, in enumeration order.
    pub fn of_size(&mut self, size: usize) -> Rc<Vec<Term>> {
        self.gen(&SType::Bool, &[], size)
    }

    /// All Bool contexts of at most `max_nodes` nodes, in enumeration order.
    pub fn up_to(&mut self, max_nodes: usize) -> Vec<Term> {
        (0..=max_nodes)
            .flat_map(|n| self.of_size(n).iter().cloned().collect::<Vec<_>>())
            .collect()
    }

    fn arg_types(&self, result: &SType) -> Vec<SType> {
        let mut out = vec![SType::Bool, SType::Ref];
        for ty in &self.universe {
            if let SType::Fun(p, r) = ty {
                if **r == *result && !out.contains(p) {
                    out.push((**p).clone());
                }
            }
        }
        out
    }

    fn gen(&mut self, ty: &SType, binders: &[SType], n: usize) -> Rc<Vec<Term>> {
        let key = (ty.clone(), binders.to_vec(), n);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let out = Rc::new(self.produce(ty, binders, n));
        self.memo.insert(key, out.clone());
        out
    }

    fn produce(&mut self, ty: &SType, binders: &[SType], n: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if n == 0 {
            if *ty == self.hole {
                out.push(Term::Hole);
            }
            return out;
        }
        if n == 1 {
            if *ty == SType::Bool {
                out.push(Term::Cst(true));
                out.push(Term::Cst(false));
            }
            for (x, xty) in &self.env {
                let shadowed = BINDER_POOL[..binders.len()].contains(&x.as_str());
                if xty == ty && !shadowed {
                    out.push(Term::var(x));
                }
            }
            for (i, bty) in binders.iter().enumerate() {
                if bty == ty {
                    out.push(Term::var(BINDER_POOL[i]));
                }
            }
        }
        if let SType::Fun(p, r) = ty {
            if matches!(**p, SType::Bool | SType::Ref) && binders.len() < BINDER_POOL.len() {
                let mut inner = binders.to_vec();
                inner.push((**p).clone());
                let annot = Some(p.to_annot());
                for body in self.gen(r, &inner, n - 1).iter() {
                    out.push(Term::abs(BINDER_POOL[binders.len()], annot.clone(), body.clone()));
                }
            }
        }
        for arg_ty in self.arg_types(ty) {
            let fty = SType::fun(arg_ty.clone(), ty.clone());
            for i in 0..n {
                let fs = self.gen(&fty, binders, i);
                if fs.is_empty() {
                    continue;
                }
                let args = self.gen(&arg_ty, binders, n - 1 - i);
                for f in fs.iter() {
                    for a in args.iter() {
                        out.push(Term::app(f.clone(), a.clone()));
                    }
                }
            }
        }
        match ty {
            SType::Ref => {
                for c in self.gen(&SType::Bool, binders, n - 1).iter() {
                    out.push(Term::reference(c.clone()));
                }
            }
            SType::Bool => {
                for c in self.gen(&SType::Ref, binders, n - 1).iter() {
                    out.push(Term::get(c.clone()));
                }
                self.pairs(&SType::Ref, &SType::Bool, binders, n, &mut out, Term::put);
                for op in [BinOp::And, BinOp::Or] {
                    self.pairs(&SType::Bool, &SType::Bool, binders, n, &mut out, |l, r| {
                        Term::bin(op, l, r)
                    });
                }
            }
            SType::Fun(..) => {}
        }
        out
    }

    fn pairs(
        &mut self,
        lty: &SType,
        rty: &SType,
        binders: &[SType],
        n: usize,
        out: &mut Vec<Term>,
        build: impl Fn(Term, Term) -> Term,
    ) {
        for i in 0..n {
            let ls = self.gen(lty, binders, i);
            if ls.is_empty() {
                continue;
            }
            let rs = self.gen(rty, binders, n - 1 - i);
            for l in ls.iter() {
                for r in rs.iter() {
                    out.push(build(l.clone(), r.clone()));
                }
            }
        }
    }
}

/// Convenience wrapper around [`ContextEnumerator::up_to`].
pub fn enumerate_contexts(hole: &SType, env: &[(String, SType)], max_nodes: usize) -> Vec<Term> {
    ContextEnumerator::new(hole.clone(), env.to_vec()).up_to(max_nodes)
}
