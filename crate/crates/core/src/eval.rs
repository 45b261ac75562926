//! Fuel-bounded big-step evaluator.
//!
//! The evaluator is an explicit-stack machine so that diverging terms run out
//! of fuel instead of out of native stack. Each syntax node visited costs one
//! unit of fuel; the derivation either completes within the budget
//! (`Done`), runs out (`Timeout`), or gets stuck on an ill-shaped operand
//! (`Err`).

use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{free_vars, BinOp, Term};

#[derive(Clone, Debug)]
pub enum Value<'a> {
    Bool(bool),
    Loc(usize),
    Clos(Rc<Closure<'a>>),
}

#[derive(Debug)]
pub struct Closure<'a> {
    pub env: Env<'a>,
    pub param: &'a str,
    pub body: &'a Term,
}

impl Value<'_> {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

/// Structural equality. Closures compare by parameter, body and captured
/// environment.
impl PartialEq for Value<'_> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Loc(a), Value::Loc(b)) => a == b,
            (Value::Clos(a), Value::Clos(b)) => {
                Rc::ptr_eq(a, b) || (a.param == b.param && a.body == b.body && a.env == b.env)
            }
            _ => false,
        }
    }
}

impl fmt::Display for Value<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Loc(l) => write!(f, "loc#{l}"),
            Value::Clos(c) => write!(f, "<closure {}>", c.param),
        }
    }
}

/// Persistent environment; the most recent binding of a name wins.
#[derive(Clone, Debug, Default)]
pub struct Env<'a>(Option<Rc<EnvNode<'a>>>);

#[derive(Debug)]
struct EnvNode<'a> {
    name: &'a str,
    value: Value<'a>,
    next: Env<'a>,
}

impl<'a> Env<'a> {
    pub fn empty() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: &'a str, value: Value<'a>) -> Self {
        Env(Some(Rc::new(EnvNode {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn lookup(&self, name: &str) -> Option<&Value<'a>> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }

    /// Bindings from oldest to newest.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (&'a str, Value<'a>)>) -> Self {
        pairs
            .into_iter()
            .fold(Env::empty(), |env, (x, v)| env.bind(x, v))
    }

    fn entries(&self) -> Vec<(&'a str, &Value<'a>)> {
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            out.push((node.name, &node.value));
            cur = &node.next.0;
        }
        out
    }
}

impl PartialEq for Env<'_> {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Some(a), Some(b)) if Rc::ptr_eq(a, b) => true,
            _ => self.entries() == other.entries(),
        }
    }
}

pub type Store<'a> = Vec<Value<'a>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Error)]
#[serde(rename_all = "camelCase")]
pub enum EvalError {
    #[error("unbound variable")]
    UnboundVar,
    #[error("applied a non-function")]
    NotAFunction,
    #[error("expected a location")]
    NotALocation,
    #[error("expected a boolean")]
    NotABool,
    #[error("dangling location")]
    DanglingLoc,
}

impl EvalError {
    pub fn code(self) -> &'static str {
        match self {
            EvalError::UnboundVar => "unboundVar",
            EvalError::NotAFunction => "notAFunction",
            EvalError::NotALocation => "notALocation",
            EvalError::NotABool => "notABool",
            EvalError::DanglingLoc => "danglingLoc",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<'a> {
    Done { store: Store<'a>, value: Value<'a> },
    Timeout,
    Err(EvalError),
}

impl Outcome<'_> {
    pub fn is_done(&self) -> bool {
        matches!(self, Outcome::Done { .. })
    }
}

impl fmt::Display for Outcome<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Done { store, value } => {
                write!(f, "{value} [")?;
                for (i, v) in store.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{i}: {v}")?;
                }
                f.write_str("]")
            }
            Outcome::Timeout => f.write_str("timeout"),
            Outcome::Err(e) => write!(f, "error: {e}"),
        }
    }
}

/// Name of the evaluation rule fired at a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Cst,
    Var,
    Abs,
    App,
    Ref,
    Get,
    Put,
    Bin,
    Hole,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Cst => "e-cst",
            Rule::Var => "e-var",
            Rule::Abs => "e-abs",
            Rule::App => "e-app",
            Rule::Ref => "e-ref",
            Rule::Get => "e-get",
            Rule::Put => "e-put",
            Rule::Bin => "e-bin",
            Rule::Hole => "hole",
        }
    }

    fn of(t: &Term) -> Rule {
        match t {
            Term::Cst(_) => Rule::Cst,
            Term::Var(_) => Rule::Var,
            Term::Abs { .. } => Rule::Abs,
            Term::App(..) => Rule::App,
            Term::Ref(_) => Rule::Ref,
            Term::Get(_) => Rule::Get,
            Term::Put(..) => Rule::Put,
            Term::Bin(..) => Rule::Bin,
            Term::Hole => Rule::Hole,
        }
    }
}

/// Hooks into the machine, used for tracing and for the store-write log.
pub trait Observer {
    fn step(&mut self, _rule: Rule, _term: &Term, _store_len: usize) {}
    fn write(&mut self, _loc: usize) {}
}

impl Observer for () {}

#[derive(Error, Debug, PartialEq, Eq)]
#[error("term is not closed: free variables {0:?}")]
pub struct OpenTerm(pub Vec<String>);

pub fn eval<'a>(env: &Env<'a>, store: Store<'a>, t: &'a Term, fuel: u64) -> Outcome<'a> {
    eval_observed(env, store, t, fuel, &mut ())
}

pub fn run_closed(t: &Term, fuel: u64) -> Result<Outcome<'_>, OpenTerm> {
    let fv = free_vars(t);
    if !fv.is_empty() {
        return Err(OpenTerm(fv.into_iter().collect()));
    }
    Ok(eval(&Env::empty(), Vec::new(), t, fuel))
}

enum Frame<'a> {
    AppArg(&'a Term, Env<'a>),
    AppCall(Rc<Closure<'a>>),
    Ref,
    Get,
    PutValue(&'a Term, Env<'a>),
    PutWrite(usize),
    BinRhs(BinOp, &'a Term, Env<'a>),
    BinApply(BinOp, bool),
}

enum Mode<'a> {
    Eval(&'a Term, Env<'a>),
    Return(Value<'a>),
}

pub fn eval_observed<'a, O: Observer + ?Sized>(
    env: &Env<'a>,
    mut store: Store<'a>,
    t: &'a Term,
    mut fuel: u64,
    obs: &mut O,
) -> Outcome<'a> {
    let mut stack: Vec<Frame<'a>> = Vec::new();
    let mut mode = Mode::Eval(t, env.clone());
    loop {
        mode = match mode {
            Mode::Eval(t, env) => {
                if fuel == 0 {
                    return Outcome::Timeout;
                }
                fuel -= 1;
                obs.step(Rule::of(t), t, store.len());
                match t {
                    Term::Cst(b) => Mode::Return(Value::Bool(*b)),
                    Term::Var(x) => match env.lookup(x) {
                        Some(v) => Mode::Return(v.clone()),
                        None => return Outcome::Err(EvalError::UnboundVar),
                    },
                    Term::Abs { param, body, .. } => Mode::Return(Value::Clos(Rc::new(Closure {
                        env,
                        param,
                        body,
                    }))),
                    Term::App(f, a) => {
                        stack.push(Frame::AppArg(a, env.clone()));
                        Mode::Eval(f, env)
                    }
                    Term::Ref(init) => {
                        stack.push(Frame::Ref);
                        Mode::Eval(init, env)
                    }
                    Term::Get(target) => {
                        stack.push(Frame::Get);
                        Mode::Eval(target, env)
                    }
                    Term::Put(target, value) => {
                        stack.push(Frame::PutValue(value, env.clone()));
                        Mode::Eval(target, env)
                    }
                    Term::Bin(op, lhs, rhs) => {
                        stack.push(Frame::BinRhs(*op, rhs, env.clone()));
                        Mode::Eval(lhs, env)
                    }
                    Term::Hole => return Outcome::Err(EvalError::UnboundVar),
                }
            }
            Mode::Return(v) => match stack.pop() {
                None => return Outcome::Done { store, value: v },
                Some(Frame::AppArg(arg, env)) => match v {
                    Value::Clos(c) => {
                        stack.push(Frame::AppCall(c));
                        Mode::Eval(arg, env)
                    }
                    _ => return Outcome::Err(EvalError::NotAFunction),
                },
                Some(Frame::AppCall(c)) => Mode::Eval(c.body, c.env.bind(c.param, v)),
                Some(Frame::Ref) => {
                    store.push(v);
                    Mode::Return(Value::Loc(store.len() - 1))
                }
                Some(Frame::Get) => match v {
                    Value::Loc(l) => match store.get(l) {
                        Some(v) => Mode::Return(v.clone()),
                        None => return Outcome::Err(EvalError::DanglingLoc),
                    },
                    _ => return Outcome::Err(EvalError::NotALocation),
                },
                Some(Frame::PutValue(value, env)) => match v {
                    Value::Loc(l) => {
                        stack.push(Frame::PutWrite(l));
                        Mode::Eval(value, env)
                    }
                    _ => return Outcome::Err(EvalError::NotALocation),
                },
                Some(Frame::PutWrite(l)) => match store.get_mut(l) {
                    Some(cell) => {
                        *cell = v;
                        obs.write(l);
                        Mode::Return(Value::Bool(true))
                    }
                    None => return Outcome::Err(EvalError::DanglingLoc),
                },
                Some(Frame::BinRhs(op, rhs, env)) => match v {
                    Value::Bool(b) => {
                        stack.push(Frame::BinApply(op, b));
                        Mode::Eval(rhs, env)
                    }
                    _ => return Outcome::Err(EvalError::NotABool),
                },
                Some(Frame::BinApply(op, b)) => match v {
                    Value::Bool(c) => Mode::Return(Value::Bool(op.apply(b, c))),
                    _ => return Outcome::Err(EvalError::NotABool),
                },
            },
        }
    }
}

/// Observer that renders one line per rule application.
#[derive(Default)]
pub struct Tracer {
    pub lines: Vec<String>,
}

impl Observer for Tracer {
    fn step(&mut self, rule: Rule, term: &Term, store_len: usize) {
        self.lines
            .push(format!("{:<6} store={store_len} {term}", rule.name()));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn closed(src: &str, fuel: u64) -> String {
        let t = parse(src).unwrap();
        let out = run_closed(&t, fuel).unwrap().to_string();
        out
    }

    #[test]
    fn constant() {
        assert_eq!(closed("true", 10), "true []");
        assert_eq!(closed("false", 1), "false []");
        assert_eq!(closed("false", 0), "timeout");
    }

    #[test]
    fn single_cell_update() {
        assert_eq!(
            closed("let x = ref false in (x := true) && !x", 100),
            "true [0: true]"
        );
        assert_eq!(closed("!(ref true)", 10), "true [0: true]");
    }

    #[test]
    fn open_terms_are_rejected() {
        let t = Term::var("x");
        assert_eq!(run_closed(&t, 10), Err(OpenTerm(vec!["x".into()])));
    }

    #[test]
    fn omega_times_out() {
        let t = parse("(fun (x: Bool) => x x) (fun (x: Bool) => x x)").unwrap();
        for k in [0, 1, 2, 7, 100, 10_000, 1_000_000] {
            assert_eq!(run_closed(&t, k).unwrap(), Outcome::Timeout, "fuel {k}");
        }
    }

    #[test]
    fn error_kinds() {
        let err = |src: &str| match run_closed(&parse(src).unwrap(), 100).unwrap() {
            Outcome::Err(e) => e,
            other => panic!("{src}: expected error, got {other}"),
        };
        assert_eq!(err("true false"), EvalError::NotAFunction);
        assert_eq!(err("!true"), EvalError::NotALocation);
        assert_eq!(err("true := false"), EvalError::NotALocation);
        assert_eq!(err("ref true && true"), EvalError::NotABool);
        assert_eq!(err("true || ref true"), EvalError::NotABool);
        let dangling = Term::get(Term::var("l"));
        let env = Env::empty().bind("l", Value::Loc(3));
        assert_eq!(
            eval(&env, Vec::new(), &dangling, 10),
            Outcome::Err(EvalError::DanglingLoc)
        );
    }

    #[test]
    fn function_checked_before_argument() {
        // The argument would time out; the non-function is reported first.
        let t = parse("true ((fun (x: Bool) => x x) (fun (x: Bool) => x x))").unwrap();
        assert_eq!(
            run_closed(&t, 1000).unwrap(),
            Outcome::Err(EvalError::NotAFunction)
        );
    }

    #[test]
    fn binary_operators_are_strict() {
        assert_eq!(closed("let x = ref true in false && (x := false) || !x", 100), "false [0: false]");
    }

    #[test]
    fn shadowing_uses_latest_binding() {
        assert_eq!(closed("let x = true in let x = false in x", 100), "false []");
    }

    #[test]
    fn tracer_records_every_rule() {
        let t = parse("!(ref true)").unwrap();
        let mut tr = Tracer::default();
        eval_observed(&Env::empty(), Vec::new(), &t, 10, &mut tr);
        assert_eq!(tr.lines.len(), 3);
        assert!(tr.lines[0].starts_with("e-get"));
        assert!(tr.lines[2].contains("store=0 true"));
    }
}
