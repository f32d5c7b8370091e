//! Line-oriented model description language.
//!
//! ```text
//! # Example: S⁵ × S⁷ over S³ × S³
//! base {
//!   generator x3 degree 3
//!   generator y3 degree 3
//! }
//! fiber {
//!   generator s5 degree 5
//!   generator s7 degree 7
//! }
//! twist {
//!   d s5 = x3 y3
//! }
//! options { max-degree 10 }
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, Zero};

use crate::algebra::{AlgElement, Algebra, FiberGenerator, Generator, Homogeneity, RelativeModel};
use crate::exact::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    SyntaxError,
    DegreeError,
    UnknownGenerator,
    InvalidModel,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::SyntaxError => "syntax error",
            DiagnosticKind::DegreeError => "degree error",
            DiagnosticKind::UnknownGenerator => "unknown generator",
            DiagnosticKind::InvalidModel => "invalid model",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.kind, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    LBrace,
    RBrace,
    Sep,
    Eq,
    Caret,
    Slash,
    Plus,
    Minus,
    Star,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn diag(kind: DiagnosticKind, line: usize, col: usize, message: impl Into<String>) -> Diagnostic {
    Diagnostic { kind, line, col, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let code = raw.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let single = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ';' => Some(Tok::Sep),
                '=' => Some(Tok::Eq),
                '^' => Some(Tok::Caret),
                '/' => Some(Tok::Slash),
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' | '·' => Some(Tok::Star),
                _ => None,
            };
            if let Some(tok) = single {
                out.push(Token { tok, line, col });
                i += 1;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Token { tok: Tok::Int(s.parse().expect("digits")), line, col });
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
            } else {
                return Err(diag(DiagnosticKind::SyntaxError, line, col, format!("unexpected character `{c}`")));
            }
        }
        out.push(Token { tok: Tok::Sep, line, col: chars.len() + 1 });
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Options {
    pub max_degree: Option<u32>,
}

/// A parsed model with its options and the source position of every generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelDocument {
    pub model: RelativeModel,
    pub options: Options,
    pub positions: BTreeMap<String, (usize, usize)>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Base,
    Fiber,
    Twist,
    Options,
}

struct Decl {
    gen: Generator,
    stage: Option<u32>,
    pos: (usize, usize),
}

struct DStmt {
    name: String,
    pos: (usize, usize),
    /// (coefficient, factors with positions)
    terms: Vec<(Rational, Vec<(String, u32, (usize, usize))>)>,
    section: Section,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn end_pos(&self) -> (usize, usize) {
        self.toks.last().map_or((1, 1), |t| (t.line, t.col))
    }

    fn syntax(&self, t: Option<&Token>, msg: impl Into<String>) -> Diagnostic {
        let (l, c) = t.map_or(self.end_pos(), |t| (t.line, t.col));
        diag(DiagnosticKind::SyntaxError, l, c, msg)
    }

    fn skip_seps(&mut self) {
        while matches!(self.peek(), Some(Token { tok: Tok::Sep, .. })) {
            self.pos += 1;
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, (usize, usize)), Diagnostic> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), line, col }) => Ok((s, (line, col))),
            t => Err(self.syntax(t.as_ref(), format!("expected {what}"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.next() {
            Some(Token { tok: Tok::Ident(s), .. }) if s == kw => Ok(()),
            t => Err(self.syntax(t.as_ref(), format!("expected `{kw}`"))),
        }
    }

    fn uint(&mut self, what: &str) -> Result<(u32, (usize, usize)), Diagnostic> {
        match self.next() {
            Some(Token { tok: Tok::Int(v), line, col }) => match u32::try_from(v) {
                Ok(v) => Ok((v, (line, col))),
                Err(_) => Err(diag(DiagnosticKind::SyntaxError, line, col, format!("{what} is too large"))),
            },
            t => Err(self.syntax(t.as_ref(), format!("expected {what}"))),
        }
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), None | Some(Token { tok: Tok::Sep | Tok::RBrace, .. }))
    }

    fn expect_statement_end(&mut self) -> Result<(), Diagnostic> {
        if self.at_statement_end() {
            Ok(())
        } else {
            let t = self.peek().cloned();
            Err(self.syntax(t.as_ref(), "unexpected token"))
        }
    }

    fn generator(&mut self, section: Section) -> Result<Decl, Diagnostic> {
        let (name, pos) = self.ident("generator name")?;
        self.keyword("degree")?;
        let (degree, dpos) = self.uint("degree")?;
        if degree == 0 {
            return Err(diag(DiagnosticKind::DegreeError, dpos.0, dpos.1, format!("generator `{name}` has degree 0")));
        }
        let mut gen = Generator::new(name, degree);
        let mut stage = None;
        while !self.at_statement_end() {
            let (key, kpos) = self.ident("`truncate` or `stage`")?;
            match (key.as_str(), section) {
                ("truncate", Section::Base) => {
                    let (p, ppos) = self.uint("truncation power")?;
                    if degree % 2 == 1 {
                        return Err(diag(DiagnosticKind::DegreeError, ppos.0, ppos.1, format!("odd generator `{}` cannot be truncated", gen.name)));
                    }
                    if p < 2 {
                        return Err(diag(DiagnosticKind::DegreeError, ppos.0, ppos.1, "truncation power must be at least 2"));
                    }
                    gen.truncation = Some(p);
                }
                ("stage", Section::Fiber) => stage = Some(self.uint("stage index")?.0),
                _ => return Err(diag(DiagnosticKind::SyntaxError, kpos.0, kpos.1, format!("unknown key `{key}`"))),
            }
        }
        Ok(Decl { gen, stage, pos })
    }

    fn coefficient(&mut self) -> Result<Option<Rational>, Diagnostic> {
        let Some(Token { tok: Tok::Int(n), .. }) = self.peek().cloned() else { return Ok(None) };
        self.pos += 1;
        if matches!(self.peek(), Some(Token { tok: Tok::Slash, .. })) {
            self.pos += 1;
            match self.next() {
                Some(Token { tok: Tok::Int(d), line, col }) => {
                    if d.is_zero() {
                        return Err(diag(DiagnosticKind::SyntaxError, line, col, "zero denominator"));
                    }
                    Ok(Some(Rational::new(n, d)))
                }
                t => Err(self.syntax(t.as_ref(), "expected denominator")),
            }
        } else {
            Ok(Some(Rational::from_integer(n)))
        }
    }

    #[allow(clippy::type_complexity)]
    fn polynomial(&mut self) -> Result<Vec<(Rational, Vec<(String, u32, (usize, usize))>)>, Diagnostic> {
        let mut terms = Vec::new();
        let mut first = true;
        loop {
            let mut sign = Rational::from_integer(1.into());
            match self.peek().map(|t| t.tok.clone()) {
                Some(Tok::Plus) if !first => self.pos += 1,
                Some(Tok::Minus) => {
                    self.pos += 1;
                    sign = -sign;
                }
                _ if !first => break,
                _ => {}
            }
            first = false;
            let coef = self.coefficient()?;
            if coef.is_some() && matches!(self.peek(), Some(Token { tok: Tok::Star, .. })) {
                self.pos += 1;
            }
            let mut factors = Vec::new();
            while let Some(Token { tok: Tok::Ident(_), .. }) = self.peek() {
                let (name, pos) = self.ident("generator")?;
                let mut e = 1;
                if matches!(self.peek(), Some(Token { tok: Tok::Caret, .. })) {
                    self.pos += 1;
                    e = self.uint("exponent")?.0;
                }
                factors.push((name, e, pos));
                if matches!(self.peek(), Some(Token { tok: Tok::Star, .. })) {
                    self.pos += 1;
                }
            }
            if coef.is_none() && factors.is_empty() {
                let t = self.peek().cloned();
                return Err(self.syntax(t.as_ref(), "expected a term"));
            }
            terms.push((sign * coef.unwrap_or_else(|| Rational::from_integer(1.into())), factors));
        }
        Ok(terms)
    }

    fn d_statement(&mut self, section: Section) -> Result<DStmt, Diagnostic> {
        let (name, pos) = self.ident("generator name")?;
        match self.next() {
            Some(Token { tok: Tok::Eq, .. }) => {}
            t => return Err(self.syntax(t.as_ref(), "expected `=`")),
        }
        let terms = self.polynomial()?;
        self.expect_statement_end()?;
        Ok(DStmt { name, pos, terms, section })
    }
}

pub fn parse_model(text: &str) -> Result<ModelDocument, Vec<Diagnostic>> {
    let toks = tokenize(text).map_err(|d| vec![d])?;
    let mut p = Parser { toks, pos: 0 };
    let mut base = Vec::new();
    let mut fiber = Vec::new();
    let mut ds = Vec::new();
    let mut options = Options::default();
    let result: Result<(), Diagnostic> = (|| {
        loop {
            p.skip_seps();
            let Some(t) = p.peek().cloned() else { return Ok(()) };
            let (name, _) = p.ident("section name")?;
            let section = match name.as_str() {
                "base" => Section::Base,
                "fiber" => Section::Fiber,
                "twist" => Section::Twist,
                "options" => Section::Options,
                _ => return Err(diag(DiagnosticKind::SyntaxError, t.line, t.col, format!("unknown section `{name}`"))),
            };
            p.skip_seps();
            match p.next() {
                Some(Token { tok: Tok::LBrace, .. }) => {}
                t => return Err(p.syntax(t.as_ref(), "expected `{`")),
            }
            loop {
                p.skip_seps();
                let Some(t) = p.peek().cloned() else { return Err(p.syntax(None, "missing `}`")) };
                if t.tok == Tok::RBrace {
                    p.pos += 1;
                    break;
                }
                let (kw, _) = p.ident("statement")?;
                match (kw.as_str(), section) {
                    ("generator", Section::Base) => base.push(p.generator(section)?),
                    ("generator", Section::Fiber) => fiber.push(p.generator(section)?),
                    ("d", Section::Base | Section::Twist) => ds.push(p.d_statement(section)?),
                    ("max", Section::Options) => {
                        match p.next() {
                            Some(Token { tok: Tok::Minus, .. }) => {}
                            t => return Err(p.syntax(t.as_ref(), "expected `max-degree`")),
                        }
                        p.keyword("degree")?;
                        options.max_degree = Some(p.uint("degree bound")?.0);
                        p.expect_statement_end()?;
                    }
                    _ => return Err(diag(DiagnosticKind::SyntaxError, t.line, t.col, format!("unknown key `{kw}`"))),
                }
            }
        }
    })();
    result.map_err(|d| vec![d])?;
    build(base, fiber, ds, options)
}

fn build(base: Vec<Decl>, fiber: Vec<Decl>, ds: Vec<DStmt>, options: Options) -> Result<ModelDocument, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut positions = BTreeMap::new();
    for d in base.iter().chain(&fiber) {
        if positions.insert(d.gen.name.clone(), d.pos).is_some() {
            diags.push(diag(DiagnosticKind::SyntaxError, d.pos.0, d.pos.1, format!("generator `{}` declared twice", d.gen.name)));
        }
    }
    let nb = base.len();
    let mut model = RelativeModel::new(
        base.into_iter().map(|d| d.gen).collect(),
        fiber.into_iter().map(|d| FiberGenerator { generator: d.gen, stage: d.stage }).collect(),
    );
    let alg: Algebra = model.algebra().clone();
    let mut assigned = BTreeMap::new();
    for st in ds {
        let Some(i) = alg.index_of(&st.name) else {
            diags.push(diag(DiagnosticKind::UnknownGenerator, st.pos.0, st.pos.1, format!("`{}` is not declared", st.name)));
            continue;
        };
        let in_base = i < nb;
        if in_base != (st.section == Section::Base) {
            let msg = if in_base { "base differentials belong in `base`" } else { "fiber differentials belong in `twist`" };
            diags.push(diag(DiagnosticKind::SyntaxError, st.pos.0, st.pos.1, msg));
            continue;
        }
        if assigned.insert(i, st.pos).is_some() {
            diags.push(diag(DiagnosticKind::SyntaxError, st.pos.0, st.pos.1, format!("d {} given twice", st.name)));
            continue;
        }
        let mut value = AlgElement::zero();
        let mut ok = true;
        for (c, factors) in &st.terms {
            let mut idx = Vec::new();
            for (name, e, pos) in factors {
                match alg.index_of(name) {
                    Some(j) => idx.push((j, *e)),
                    None => {
                        diags.push(diag(DiagnosticKind::UnknownGenerator, pos.0, pos.1, format!("`{name}` is not declared")));
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            // ordered product, so odd factors written out of order pick up their sign
            let mut term = AlgElement::term(alg.unit_monomial(), c.clone());
            for (j, e) in idx {
                for _ in 0..e {
                    term = alg.multiply(&term, &alg.gen_element(j));
                }
            }
            value = value.add(&term);
        }
        if !ok {
            continue;
        }
        let expected = alg.generator(i).degree + 1;
        let degrees: Vec<u32> = st
            .terms
            .iter()
            .map(|(_, f)| f.iter().map(|(n, e, _)| e * alg.generator(alg.index_of(n).unwrap()).degree).sum())
            .collect();
        if let Some(bad) = degrees.iter().find(|&&d| d != expected) {
            diags.push(diag(
                DiagnosticKind::DegreeError,
                st.pos.0,
                st.pos.1,
                format!("d {} has a term of degree {bad}, expected {expected}", st.name),
            ));
            continue;
        }
        debug_assert!(matches!(alg.homogeneity(&value), Homogeneity::Zero | Homogeneity::Degree(_)));
        model.set_differential(i, value);
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let report = model.validate();
    if !report.is_ok() {
        return Err(report
            .violations
            .iter()
            .map(|v| {
                let (l, c) = assigned
                    .get(&alg.index_of(v.generator()).unwrap_or(usize::MAX))
                    .or_else(|| positions.get(v.generator()))
                    .copied()
                    .unwrap_or((1, 1));
                diag(DiagnosticKind::InvalidModel, l, c, v.to_string())
            })
            .collect());
    }
    Ok(ModelDocument { model, options, positions })
}

/// Prints a model in the description language; parsing the output yields the same model.
pub fn print_model(model: &RelativeModel, options: &Options) -> String {
    let alg = model.algebra();
    let mut s = String::from("base {\n");
    for i in model.base_range() {
        let g = alg.generator(i);
        s.push_str(&format!("  generator {} degree {}", g.name, g.degree));
        if let Some(k) = g.truncation {
            s.push_str(&format!(" truncate {k}"));
        }
        s.push('\n');
    }
    for i in model.base_range() {
        if !model.differential(i).is_zero() {
            s.push_str(&format!("  d {} = {}\n", alg.generator(i).name, alg.format(model.differential(i))));
        }
    }
    s.push_str("}\nfiber {\n");
    for i in model.fiber_range() {
        let g = alg.generator(i);
        s.push_str(&format!("  generator {} degree {}", g.name, g.degree));
        if model.stage(i) != g.degree {
            s.push_str(&format!(" stage {}", model.stage(i)));
        }
        s.push('\n');
    }
    s.push_str("}\ntwist {\n");
    for i in model.fiber_range() {
        if !model.differential(i).is_zero() {
            s.push_str(&format!("  d {} = {}\n", alg.generator(i).name, alg.format(model.differential(i))));
        }
    }
    s.push_str("}\n");
    if let Some(n) = options.max_degree {
        s.push_str(&format!("options {{ max-degree {n} }}\n"));
    }
    s
}
