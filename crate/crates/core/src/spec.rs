//! Tower description files.
//!
//! ```text
//! # comment
//! p = 2
//! params = u, v, w
//! gen z1 : z1^8 = v^2 + u^2*w
//! gen z2 : z2^2 = (z1^4 + v)/u
//! ```
//!
//! Expressions use `+ - * / ^` and parentheses; `^` binds tightest, is
//! right associative and takes an integer exponent; unary minus is allowed.
//! Degrees are written as explicit integers that must be powers of `p`.

use std::fmt;

use thiserror::Error;

use crate::coefffield::is_prime;
use crate::poly::MAX_PARAMS;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(u64),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn name(s: &str) -> Expr {
        Expr::Name(s.to_string())
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        Expr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, e: u32) -> Expr {
        Expr::Pow(Box::new(a), e)
    }

    /// Calls `f` on every name occurring in the expression.
    pub fn visit_names<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Int(_) => {}
            Expr::Name(n) => f(n),
            Expr::Neg(a) | Expr::Pow(a, _) => a.visit_names(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
        }
    }

    pub fn mentions(&self, pred: impl Fn(&str) -> bool) -> bool {
        let mut hit = false;
        self.visit_names(&mut |n| hit |= pred(n));
        hit
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            Expr::Int(_) | Expr::Name(_) => 5,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            write!(f, "(")?;
        }
        match self {
            Expr::Int(n) => write!(f, "{n}")?,
            Expr::Name(s) => write!(f, "{s}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_prec(f, 3)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_prec(f, 1)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { "+" } else { "-" })?;
                b.write_prec(f, 2)?;
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_prec(f, 2)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { "*" } else { "/" })?;
                b.write_prec(f, 3)?;
            }
            Expr::Pow(a, e) => {
                a.write_prec(f, 5)?;
                write!(f, "^{e}")?;
            }
        }
        if paren {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GenSpec {
    pub name: String,
    /// `q = p^degree_exp`
    pub degree_exp: u32,
    pub relation: Expr,
}

/// Syntactic presentation of `L/K`: `L = K[x_1..x_n]/(x_i^{q_i} - g_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TowerSpec {
    pub p: u32,
    pub params: Vec<String>,
    pub gens: Vec<GenSpec>,
}

impl TowerSpec {
    /// Renders the description in the tower file format.
    pub fn pretty(&self) -> String {
        let mut out = format!("p = {}\nparams = {}\n", self.p, self.params.join(", "));
        for g in &self.gens {
            let q = (self.p as u64).pow(g.degree_exp);
            out.push_str(&format!("gen {} : {}^{} = {}\n", g.name, g.name, q, g.relation));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParseErrorKind {
    Lexical,
    Syntax,
    Header,
    UnknownName,
    NonPowerDegree,
    ForwardReference,
    GeneratorInDivisor,
    NameMismatch,
    DuplicateName,
    InvalidPrime,
    TooManyParams,
}

impl ParseErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            ParseErrorKind::Lexical => "E100",
            ParseErrorKind::Syntax => "E101",
            ParseErrorKind::Header => "E102",
            ParseErrorKind::UnknownName => "E200",
            ParseErrorKind::NonPowerDegree => "E201",
            ParseErrorKind::ForwardReference => "E202",
            ParseErrorKind::GeneratorInDivisor => "E203",
            ParseErrorKind::NameMismatch => "E204",
            ParseErrorKind::DuplicateName => "E205",
            ParseErrorKind::InvalidPrime => "E206",
            ParseErrorKind::TooManyParams => "E207",
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{line}:{col}: error[{}]: {message}", kind.code())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex_line(line: &str, lineno: usize) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), col });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let n = text.parse::<u64>().map_err(|_| ParseError {
                kind: ParseErrorKind::Lexical,
                line: lineno,
                col,
                message: format!("integer literal {text} is too large"),
            })?;
            out.push(Token { tok: Tok::Int(n), col });
        } else if "=:^+-*/(),".contains(c) {
            out.push(Token { tok: Tok::Sym(c), col });
            i += 1;
        } else {
            return Err(ParseError {
                kind: ParseErrorKind::Lexical,
                line: lineno,
                col,
                message: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

/// Names visible while parsing one generator line.
struct Scope<'a> {
    params: &'a [String],
    gens_before: &'a [String],
    gens_all: &'a [String],
    current: usize,
}

enum NameKind {
    Param,
    Gen,
}

struct LineParser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    eol_col: usize,
    scope: Option<Scope<'a>>,
}

impl<'a> LineParser<'a> {
    fn err(&self, kind: ParseErrorKind, col: usize, message: impl Into<String>) -> ParseError {
        ParseError { kind, line: self.line, col, message: message.into() }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.eol_col, |t| t.col)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.err(ParseErrorKind::Syntax, self.col(), format!("expected '{c}'"))),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, col))
            }
            _ => Err(self.err(ParseErrorKind::Syntax, col, "expected identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<(u64, usize), ParseError> {
        let col = self.col();
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok((n, col))
            }
            _ => Err(self.err(ParseErrorKind::Syntax, col, "expected integer")),
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            Err(self.err(ParseErrorKind::Syntax, self.col(), "unexpected trailing input"))
        } else {
            Ok(())
        }
    }

    fn resolve(&self, name: &str, col: usize) -> Result<NameKind, ParseError> {
        let scope = self.scope.as_ref().expect("expression outside a generator line");
        if scope.params.iter().any(|p| p == name) {
            return Ok(NameKind::Param);
        }
        if scope.gens_before.iter().any(|g| g == name) {
            return Ok(NameKind::Gen);
        }
        if let Some(idx) = scope.gens_all.iter().position(|g| g == name) {
            let msg = if idx == scope.current {
                format!("generator {name} refers to itself in its own relation")
            } else {
                format!("generator {name} is used before its declaration")
            };
            return Err(self.err(ParseErrorKind::ForwardReference, col, msg));
        }
        Err(self.err(ParseErrorKind::UnknownName, col, format!("unknown name {name}")))
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<(Expr, bool), ParseError> {
        let (mut lhs, mut has_gen) = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('+')) => {
                    self.pos += 1;
                    let (rhs, g) = self.term()?;
                    has_gen |= g;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Sym('-')) => {
                    self.pos += 1;
                    let (rhs, g) = self.term()?;
                    has_gen |= g;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok((lhs, has_gen)),
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<(Expr, bool), ParseError> {
        let (mut lhs, mut has_gen) = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Sym('*')) => {
                    self.pos += 1;
                    let (rhs, g) = self.unary()?;
                    has_gen |= g;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Sym('/')) => {
                    self.pos += 1;
                    let col = self.col();
                    let (rhs, g) = self.unary()?;
                    if g {
                        return Err(self.err(
                            ParseErrorKind::GeneratorInDivisor,
                            col,
                            "divisor mentions a generator",
                        ));
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok((lhs, has_gen)),
            }
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<(Expr, bool), ParseError> {
        if let Some(Tok::Sym('-')) = self.peek() {
            self.pos += 1;
            let (e, g) = self.unary()?;
            return Ok((Expr::Neg(Box::new(e)), g));
        }
        self.power()
    }

    // power := atom ('^' INTEGER ('^' INTEGER)*)?, exponents right associative
    fn power(&mut self) -> Result<(Expr, bool), ParseError> {
        let (base, g) = self.atom()?;
        if let Some(Tok::Sym('^')) = self.peek() {
            self.pos += 1;
            let col = self.col();
            let mut exps = vec![self.expect_int()?.0];
            while let Some(Tok::Sym('^')) = self.peek() {
                self.pos += 1;
                exps.push(self.expect_int()?.0);
            }
            let mut e: u64 = 1;
            for (k, &x) in exps.iter().rev().enumerate() {
                e = if k == 0 {
                    x
                } else {
                    u32::try_from(e).ok().and_then(|ee| x.checked_pow(ee)).unwrap_or(u64::MAX)
                };
            }
            let e = u32::try_from(e)
                .map_err(|_| self.err(ParseErrorKind::Syntax, col, "exponent is too large"))?;
            return Ok((Expr::Pow(Box::new(base), e), g));
        }
        Ok((base, g))
    }

    fn atom(&mut self) -> Result<(Expr, bool), ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok((Expr::Int(n), false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let kind = self.resolve(&name, col)?;
                Ok((Expr::Name(name), matches!(kind, NameKind::Gen)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_sym(')')?;
                Ok(inner)
            }
            _ => Err(self.err(ParseErrorKind::Syntax, col, "expected a number, a name or '('")),
        }
    }
}

fn power_exponent(q: u64, p: u64) -> Option<u32> {
    let mut d = 0;
    let mut x = q;
    while x > 1 {
        if x % p != 0 {
            return None;
        }
        x /= p;
        d += 1;
    }
    (d >= 1).then_some(d)
}

/// Parses a tower description file.
pub fn parse_tower(text: &str) -> Result<TowerSpec, ParseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let toks = lex_line(raw, i + 1)?;
        if !toks.is_empty() {
            lines.push((i + 1, raw.chars().count() + 1, toks));
        }
    }
    let mut it = lines.into_iter();
    let header_err = |line: usize, msg: &str| ParseError {
        kind: ParseErrorKind::Header,
        line,
        col: 1,
        message: msg.to_string(),
    };

    // p = INTEGER
    let (line, eol, toks) = it.next().ok_or_else(|| header_err(1, "missing 'p = <prime>' line"))?;
    let mut lp = LineParser { toks, pos: 0, line, eol_col: eol, scope: None };
    match lp.peek() {
        Some(Tok::Ident(s)) if s == "p" => lp.pos += 1,
        _ => return Err(header_err(line, "first line must be 'p = <prime>'")),
    }
    lp.expect_sym('=')?;
    let (p, pcol) = lp.expect_int()?;
    lp.expect_end()?;
    if p > u16::MAX as u64 || !is_prime(p as u32) {
        return Err(lp.err(ParseErrorKind::InvalidPrime, pcol, format!("{p} is not a supported prime")));
    }
    let p = p as u32;

    // params = a, b, c
    let (line, eol, toks) = it.next().ok_or_else(|| header_err(line + 1, "missing 'params = ...' line"))?;
    let mut lp = LineParser { toks, pos: 0, line, eol_col: eol, scope: None };
    match lp.peek() {
        Some(Tok::Ident(s)) if s == "params" => lp.pos += 1,
        _ => return Err(header_err(line, "second line must be 'params = ...'")),
    }
    lp.expect_sym('=')?;
    let mut params: Vec<String> = Vec::new();
    if lp.peek().is_some() {
        loop {
            let (name, col) = lp.expect_ident()?;
            if params.contains(&name) {
                return Err(lp.err(ParseErrorKind::DuplicateName, col, format!("duplicate parameter {name}")));
            }
            params.push(name);
            if lp.peek().is_none() {
                break;
            }
            lp.expect_sym(',')?;
        }
    }
    if params.len() > MAX_PARAMS {
        return Err(lp.err(
            ParseErrorKind::TooManyParams,
            1,
            format!("at most {MAX_PARAMS} parameters are supported"),
        ));
    }

    // collect generator names up front to tell forward references from typos
    let gen_lines: Vec<_> = it.collect();
    if gen_lines.is_empty() {
        return Err(header_err(line + 1, "at least one 'gen' line is required"));
    }
    let mut names = Vec::new();
    for (_, _, toks) in &gen_lines {
        if let (Some(Token { tok: Tok::Ident(kw), .. }), Some(Token { tok: Tok::Ident(n), .. })) =
            (toks.first(), toks.get(1))
        {
            if kw == "gen" {
                names.push(n.clone());
            }
        }
    }

    let mut gens: Vec<GenSpec> = Vec::new();
    for (idx, (line, eol, toks)) in gen_lines.into_iter().enumerate() {
        let before: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
        let mut lp = LineParser { toks, pos: 0, line, eol_col: eol, scope: None };
        match lp.peek() {
            Some(Tok::Ident(s)) if s == "gen" => lp.pos += 1,
            _ => return Err(lp.err(ParseErrorKind::Syntax, lp.col(), "expected 'gen'")),
        }
        let (name, ncol) = lp.expect_ident()?;
        if params.contains(&name) || before.contains(&name) {
            return Err(lp.err(ParseErrorKind::DuplicateName, ncol, format!("name {name} is already declared")));
        }
        lp.expect_sym(':')?;
        let (lhs, lcol) = lp.expect_ident()?;
        if lhs != name {
            return Err(lp.err(
                ParseErrorKind::NameMismatch,
                lcol,
                format!("left-hand side {lhs} does not match generator {name}"),
            ));
        }
        lp.expect_sym('^')?;
        let (q, qcol) = lp.expect_int()?;
        let degree_exp = power_exponent(q, p as u64).ok_or_else(|| {
            lp.err(ParseErrorKind::NonPowerDegree, qcol, format!("degree {q} is not a positive power of {p}"))
        })?;
        lp.expect_sym('=')?;
        lp.scope = Some(Scope { params: &params, gens_before: &before, gens_all: &names, current: idx });
        let (relation, _) = lp.expr()?;
        lp.expect_end()?;
        gens.push(GenSpec { name, degree_exp, relation });
    }
    Ok(TowerSpec { p, params, gens })
}

/// Parses a single expression over the given parameter and generator
/// names, reporting positions as line 1.
pub fn parse_expr(text: &str, params: &[String], gens: &[String]) -> Result<Expr, ParseError> {
    let toks = lex_line(text, 1)?;
    let mut lp = LineParser {
        toks,
        pos: 0,
        line: 1,
        eol_col: text.chars().count() + 1,
        scope: Some(Scope { params, gens_before: gens, gens_all: gens, current: usize::MAX }),
    };
    let (e, _) = lp.expr()?;
    lp.expect_end()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    const NM2: &str = "p = 2\nparams = u, v, w\ngen z1 : z1^8 = v^2 + u^2*w\ngen z2 : z2^2 = (z1^4 + v)/u\n";

    #[test]
    fn parses_fixture() {
        let spec = parse_tower(NM2).unwrap();
        assert_eq!(spec.p, 2);
        assert_eq!(spec.params, ["u", "v", "w"]);
        assert_eq!(spec.gens[0].degree_exp, 3);
        assert_eq!(spec.gens[1].degree_exp, 1);
        assert_eq!(
            spec.gens[1].relation,
            Expr::div(Expr::add(Expr::pow(Expr::name("z1"), 4), Expr::name("v")), Expr::name("u"))
        );
        assert_eq!(parse_tower(&spec.pretty()).unwrap(), spec);
    }

    #[test]
    fn rejects_non_power_degree() {
        let e = parse_tower("p = 2\nparams = s\ngen x : x^6 = s\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NonPowerDegree);
        assert_eq!((e.line, e.col), (3, 11));
    }

    #[test]
    fn rejects_generator_in_divisor() {
        let e = parse_tower("p = 2\nparams = s\ngen x : x^2 = s\ngen y : y^2 = 1/x\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::GeneratorInDivisor);
        assert_eq!(e.line, 4);
    }

    #[test]
    fn forward_and_unknown_names() {
        let e = parse_tower("p = 2\nparams = s\ngen x : x^2 = y + s\ngen y : y^2 = s\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::ForwardReference);
        let e = parse_tower("p = 2\nparams = s\ngen x : x^2 = r\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownName);
        assert_eq!(e.to_string(), "3:15: error[E200]: unknown name r");
    }

    #[test]
    fn comments_blank_lines_and_precedence() {
        let text = "# header\n\np=3 # prime\nparams=a\n  gen x : x^3 = -a^2*a - 1 # ok\n";
        let spec = parse_tower(text).unwrap();
        let rel = &spec.gens[0].relation;
        assert_eq!(rel.to_string(), "-a^2*a - 1");
        assert_eq!(parse_tower(&spec.pretty()).unwrap(), spec);
    }

    #[test]
    fn lexical_error_position() {
        let e = parse_tower("p = 2\nparams = s\ngen x : x^2 = s $ 1\n").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::Lexical);
        assert_eq!((e.line, e.col), (3, 17));
    }
}
