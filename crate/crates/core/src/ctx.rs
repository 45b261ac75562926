//! Typing contexts shared by the three checkers.

use thiserror::Error;

/// Ordered, scoped map from identifiers to bindings. Later bindings shadow
/// earlier ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ctx<T> {
    entries: Vec<(String, T)>,
}

impl<T> Default for Ctx<T> {
    fn default() -> Self {
        Ctx {
            entries: Vec::new(),
        }
    }
}

impl<T> Ctx<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, binding: T) -> Self {
        self.push(name, binding);
        self
    }

    pub fn push(&mut self, name: impl Into<String>, binding: T) {
        self.entries.push((name.into(), binding));
    }

    pub fn pop(&mut self) -> Option<(String, T)> {
        self.entries.pop()
    }

    pub fn lookup(&self, name: &str) -> Option<&T> {
        self.entries
            .iter()
            .rev()
            .find(|(x, _)| x == name)
            .map(|(_, b)| b)
    }

    /// Entries from oldest to newest, including shadowed ones.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &T)> {
        self.entries.iter().map(|(x, b)| (x.as_str(), b))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Run `f` with `name: binding` pushed, then pop it again.
    pub(crate) fn scoped<R>(&mut self, name: &str, binding: T, f: impl FnOnce(&mut Self) -> R) -> R {
        self.push(name, binding);
        let out = f(self);
        self.pop();
        out
    }
}

impl<T, S: Into<String>> FromIterator<(S, T)> for Ctx<T> {
    fn from_iter<I: IntoIterator<Item = (S, T)>>(iter: I) -> Self {
        Ctx {
            entries: iter.into_iter().map(|(x, b)| (x.into(), b)).collect(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("parameter `{0}` needs a type annotation")]
    MissingAnnotation(String),
    #[error("function type `{0}` needs a latent effect `[bot]` or `[top]`")]
    MissingLatent(String),
    #[error("qualifier on `{0}` has the wrong form for this system")]
    QualifierForm(String),
    #[error("argument has type {found}, expected {expected}")]
    ArgMismatch { expected: String, found: String },
    #[error("expected a function, found {0}")]
    NotAFunction(String),
    #[error("expected {expected}, found {found}")]
    Shape {
        expected: &'static str,
        found: String,
    },
    #[error("holes are not terms")]
    Hole,
}
