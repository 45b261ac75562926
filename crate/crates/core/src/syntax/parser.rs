use super::lexer::{tokenize, Pos, SyntaxError, Tok};
use super::{desugar_let, Annot, BinOp, Mark, QualAnnot, SurfaceType, Term};

/// Parse a closed program. Holes are rejected.
pub fn parse(text: &str) -> Result<Term, SyntaxError> {
    Parser::new(text, false)?.finish_term()
}

/// Parse a context: like [`parse`] but `[]` (or `□`) denotes a hole.
pub fn parse_context(text: &str) -> Result<Term, SyntaxError> {
    Parser::new(text, true)?.finish_term()
}

/// Parse a standalone type annotation such as `(Ref<top,bot> -> [bot] Bool)`.
pub fn parse_annot(text: &str) -> Result<Annot, SyntaxError> {
    let mut p = Parser::new(text, false)?;
    let a = p.annot()?;
    p.expect(Tok::Eof)?;
    Ok(a)
}

/// Deepest syntax tree the parser builds. Every later pass recurses over the
/// tree, so unbounded nesting from untrusted input would exhaust the stack.
pub const MAX_NESTING: usize = 256;

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    holes: bool,
    depth: usize,
}

impl Parser {
    fn new(text: &str, holes: bool) -> Result<Self, SyntaxError> {
        Ok(Parser {
            toks: tokenize(text)?,
            at: 0,
            holes,
            depth: 0,
        })
    }

    fn finish_term(mut self) -> Result<Term, SyntaxError> {
        let t = self.expr()?;
        self.expect(Tok::Eof)?;
        Ok(t)
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("expected {}", tok.describe())))
        }
    }

    fn unexpected(&self, what: &str) -> SyntaxError {
        SyntaxError::new(
            self.pos(),
            format!("{what}, found {}", self.peek().describe()),
        )
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(x) => {
                self.advance();
                Ok(x)
            }
            _ => Err(self.unexpected("expected identifier")),
        }
    }

    fn nested<T>(&mut self, levels: usize, f: impl FnOnce(&mut Self) -> Result<T, SyntaxError>) -> Result<T, SyntaxError> {
        if self.depth + levels > MAX_NESTING {
            return Err(SyntaxError::new(self.pos(), format!("nesting deeper than {MAX_NESTING}")));
        }
        self.depth += levels;
        let r = f(self);
        self.depth -= levels;
        r
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        self.nested(1, Self::expr_inner)
    }

    fn expr_inner(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Tok::Fun => {
                self.advance();
                self.expect(Tok::LParen)?;
                let x = self.ident()?;
                let annot = if self.eat(&Tok::Colon) {
                    Some(self.annot()?)
                } else {
                    None
                };
                self.expect(Tok::RParen)?;
                self.expect(Tok::FatArrow)?;
                let body = self.expr()?;
                Ok(Term::abs(x, annot, body))
            }
            Tok::Let => {
                self.advance();
                let x = self.ident()?;
                self.expect(Tok::Eq)?;
                let bound = self.expr()?;
                self.expect(Tok::In)?;
                let body = self.expr()?;
                Ok(desugar_let(x, bound, body))
            }
            _ => self.binary(),
        }
    }

    fn binary(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.put()?;
        let mut chain = 0;
        loop {
            let op = match self.peek() {
                Tok::AndAnd => BinOp::And,
                Tok::OrOr => BinOp::Or,
                _ => return Ok(lhs),
            };
            self.advance();
            chain += 1;
            let rhs = self.nested(chain, Self::put)?;
            lhs = Term::bin(op, lhs, rhs);
        }
    }

    fn put(&mut self) -> Result<Term, SyntaxError> {
        let target = self.app()?;
        if self.eat(&Tok::Assign) {
            let value = self.app()?;
            Ok(Term::put(target, value))
        } else {
            Ok(target)
        }
    }

    fn app(&mut self) -> Result<Term, SyntaxError> {
        let mut f = self.prefix()?;
        let mut chain = 0;
        while self.starts_atom() {
            chain += 1;
            let arg = self.nested(chain, Self::atom)?;
            f = Term::app(f, arg);
        }
        Ok(f)
    }

    fn prefix(&mut self) -> Result<Term, SyntaxError> {
        self.nested(1, Self::prefix_inner)
    }

    fn prefix_inner(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Tok::Bang => {
                self.advance();
                Ok(Term::get(self.prefix()?))
            }
            Tok::RefKw => {
                self.advance();
                Ok(Term::reference(self.prefix()?))
            }
            _ => self.atom(),
        }
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::True | Tok::False | Tok::Ident(_) | Tok::LParen => true,
            Tok::Hole => self.holes,
            _ => false,
        }
    }

    fn atom(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Term::Cst(true))
            }
            Tok::False => {
                self.advance();
                Ok(Term::Cst(false))
            }
            Tok::Ident(x) => {
                self.advance();
                Ok(Term::Var(x))
            }
            Tok::LParen => {
                self.advance();
                let t = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Hole if self.holes => {
                self.advance();
                Ok(Term::Hole)
            }
            Tok::Hole => Err(self.unexpected("holes are only allowed in contexts")),
            _ => Err(self.unexpected("expected a term")),
        }
    }

    fn mark(&mut self) -> Result<Mark, SyntaxError> {
        match self.peek() {
            Tok::Bot => {
                self.advance();
                Ok(Mark::Bot)
            }
            Tok::Top => {
                self.advance();
                Ok(Mark::Top)
            }
            _ => Err(self.unexpected("expected `bot` or `top`")),
        }
    }

    fn annot(&mut self) -> Result<Annot, SyntaxError> {
        self.nested(1, Self::annot_inner)
    }

    fn annot_inner(&mut self) -> Result<Annot, SyntaxError> {
        let ty = match self.peek() {
            Tok::BoolTy => {
                self.advance();
                SurfaceType::Bool
            }
            Tok::RefTy => {
                self.advance();
                SurfaceType::Ref
            }
            Tok::LParen => {
                self.advance();
                let param = self.annot()?;
                self.expect(Tok::Arrow)?;
                let latent = if self.eat(&Tok::LBracket) {
                    let m = self.mark()?;
                    self.expect(Tok::RBracket)?;
                    Some(m)
                } else {
                    None
                };
                let result = self.annot()?;
                self.expect(Tok::RParen)?;
                SurfaceType::Fun {
                    param: Box::new(param),
                    result: Box::new(result),
                    latent,
                }
            }
            _ => return Err(self.unexpected("expected a type")),
        };
        let qual = match self.peek() {
            Tok::Caret => {
                self.advance();
                Some(QualAnnot::Single(self.mark()?))
            }
            Tok::Lt => {
                self.advance();
                let fresh = self.mark()?;
                self.expect(Tok::Comma)?;
                let stored = self.mark()?;
                self.expect(Tok::Gt)?;
                Some(QualAnnot::Pair { fresh, stored })
            }
            _ => None,
        };
        Ok(Annot { ty, qual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deep_nesting_is_rejected() {
        let deep = format!("{}true{}", "(".repeat(10_000), ")".repeat(10_000));
        assert!(parse(&deep).unwrap_err().message.contains("nesting"));
        let chain = vec!["true"; 10_000].join(" && ");
        assert!(parse(&chain).is_err());
        let bangs = format!("{}a", "!".repeat(10_000));
        assert!(parse(&bangs).is_err());
        let ty = format!("fun (x: {}Bool{}) => x", "(Bool -> ".repeat(5_000), ")".repeat(5_000));
        assert!(parse(&ty).is_err());
        assert!(parse(&vec!["true"; 100].join(" && ")).is_ok());
    }

    #[test]
    fn literal() {
        assert_eq!(parse("true").unwrap(), Term::Cst(true));
    }

    #[test]
    fn identity_abstraction() {
        assert_eq!(
            parse("fun (x: Bool) => x").unwrap(),
            Term::abs("x", Some(Annot::bare(SurfaceType::Bool)), Term::var("x"))
        );
    }

    #[test]
    fn let_is_desugared() {
        let expected = Term::app(
            Term::abs("x", None, Term::get(Term::var("x"))),
            Term::reference(Term::Cst(true)),
        );
        assert_eq!(parse("let x = ref true in !x").unwrap(), expected);
    }

    #[test]
    fn precedence_of_prefix_put_and_bin() {
        // `!`/`ref` bind tighter than `:=`, which binds tighter than `&&`.
        let t = parse("x := !y && ref true := false").unwrap();
        let expected = Term::bin(
            BinOp::And,
            Term::put(Term::var("x"), Term::get(Term::var("y"))),
            Term::put(Term::reference(Term::Cst(true)), Term::Cst(false)),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn application_is_left_associative() {
        assert_eq!(
            parse("f x y").unwrap(),
            Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y"))
        );
    }

    #[test]
    fn function_annotations_with_qualifiers() {
        let a = parse_annot("(Ref<top,bot> -> [bot] Ref<bot,top>)<bot,top>").unwrap();
        let pair = |f, s| Some(QualAnnot::Pair { fresh: f, stored: s });
        assert_eq!(a.qual, pair(Mark::Bot, Mark::Top));
        match a.ty {
            SurfaceType::Fun {
                param,
                result,
                latent,
            } => {
                assert_eq!(param.qual, pair(Mark::Top, Mark::Bot));
                assert_eq!(result.qual, pair(Mark::Bot, Mark::Top));
                assert_eq!(latent, Some(Mark::Bot));
            }
            other => panic!("not a function type: {other:?}"),
        }
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("fun (x: Bool) =>").unwrap_err();
        assert_eq!(err.pos.line, 1);
        assert!(err.message.contains("expected a term"), "{err}");
        let err = parse("(true").unwrap_err();
        assert!(err.message.contains("expected `)`"), "{err}");
    }

    #[test]
    fn holes_only_in_contexts() {
        assert!(parse("!□").is_err());
        assert_eq!(parse_context("![]").unwrap(), Term::get(Term::Hole));
        assert_eq!(
            parse_context("[] && true").unwrap(),
            Term::bin(BinOp::And, Term::Hole, Term::Cst(true))
        );
    }
}
