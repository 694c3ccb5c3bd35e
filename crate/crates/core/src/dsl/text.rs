//! Canonical text syntax.
//!
//! ```text
//! program   = { statement } ;
//! statement = draw | for ;
//! draw      = "draw" "(" semantics "," shapekind ","
//!             "P=(" int "," int "," int ")" ","
//!             "G=(" num { "," num } ")" ")" ;
//! for       = "for" "(" ("Trans" "," "i=" int "," "u=(" int "," int "," int ")"
//!                       | "Rot" "," "i=" int "," "theta=" num "," "axis=" ("X"|"Y"|"Z"))
//!             ")" "{" program "}" ;
//! ```
//!
//! Whitespace is free between tokens. The printer emits one statement per
//! line with two spaces of indentation per loop level.

use std::fmt::{self, Write as _};

use thiserror::Error;

use super::{
    validate_with, Axis, DrawStmt, ForStmt, Limits, LoopKind, Program, Semantics, ShapeKind, Statement, ValidationReport,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: expected ", self.line, self.col)?;
        match self.expected.as_slice() {
            [one] => write!(f, "{one}")?,
            many => write!(f, "one of {}", many.join(", "))?,
        }
        write!(f, ", found {}", self.found)
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {0}")]
    Syntax(SyntaxError),
    #[error("invalid program: {0}")]
    Semantic(ValidationReport),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Punct(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let s: String = chars[i..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                .collect();
            Tok::Ident(s)
        } else if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::from(c);
            let mut seen_dot = false;
            for &d in &chars[i + 1..] {
                if d.is_ascii_digit() || (d == '.' && !seen_dot) {
                    seen_dot |= d == '.';
                    s.push(d);
                } else {
                    break;
                }
            }
            Tok::Num(s)
        } else if "(),={}".contains(c) {
            Tok::Punct(c)
        } else {
            return Err(SyntaxError {
                line,
                col,
                expected: vec!["a token".into()],
                found: format!("character `{c}`"),
            });
        };
        let width = match &tok {
            Tok::Ident(s) | Tok::Num(s) => s.chars().count(),
            _ => 1,
        };
        i += width;
        col += width;
        out.push(Spanned {
            tok,
            line: start_line,
            col: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn error<T, S: AsRef<str>>(&self, expected: &[S]) -> Result<T, SyntaxError> {
        let t = self.peek();
        Err(SyntaxError {
            line: t.line,
            col: t.col,
            expected: expected.iter().map(|s| s.as_ref().to_string()).collect(),
            found: t.tok.describe(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn punct(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.peek().tok == Tok::Punct(c) {
            self.bump();
            Ok(())
        } else {
            self.error(&[format!("`{c}`")])
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => self.error(&[format!("`{kw}`")]),
        }
    }

    fn ident(&mut self, expected: &[&str]) -> Result<String, SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) if expected.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&expected.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>()),
        }
    }

    fn num(&mut self) -> Result<f64, SyntaxError> {
        match &self.peek().tok {
            Tok::Num(s) => match s.parse::<f64>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(&["number"]),
            },
            _ => self.error(&["number"]),
        }
    }

    fn int(&mut self) -> Result<i32, SyntaxError> {
        match &self.peek().tok {
            Tok::Num(s) => match s.parse::<i32>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => self.error(&["integer"]),
            },
            _ => self.error(&["integer"]),
        }
    }

    fn assign(&mut self, name: &str) -> Result<(), SyntaxError> {
        self.keyword(name)?;
        self.punct('=')
    }

    fn triple(&mut self) -> Result<[i32; 3], SyntaxError> {
        self.punct('(')?;
        let x = self.int()?;
        self.punct(',')?;
        let y = self.int()?;
        self.punct(',')?;
        let z = self.int()?;
        self.punct(')')?;
        Ok([x, y, z])
    }

    fn program(&mut self, in_loop: bool) -> Result<Vec<Statement>, SyntaxError> {
        let mut out = Vec::new();
        loop {
            match &self.peek().tok {
                Tok::Ident(s) if s == "draw" => out.push(self.draw()?),
                Tok::Ident(s) if s == "for" => out.push(self.for_stmt()?),
                Tok::Punct('}') if in_loop => return Ok(out),
                Tok::Eof if !in_loop => return Ok(out),
                _ if in_loop => return self.error(&["`draw`", "`for`", "`}`"]),
                _ => return self.error(&["`draw`", "`for`", "end of input"]),
            }
        }
    }

    fn draw(&mut self) -> Result<Statement, SyntaxError> {
        self.keyword("draw")?;
        self.punct('(')?;
        let sem_names: Vec<&str> = Semantics::ALL.iter().map(|s| s.keyword()).collect();
        let semantics = Semantics::from_keyword(&self.ident(&sem_names)?).expect("checked keyword");
        self.punct(',')?;
        let shape_names: Vec<&str> = ShapeKind::ALL.iter().map(|s| s.keyword()).collect();
        let shape = ShapeKind::from_keyword(&self.ident(&shape_names)?).expect("checked keyword");
        self.punct(',')?;
        self.assign("P")?;
        let position = self.triple()?;
        self.punct(',')?;
        self.assign("G")?;
        self.punct('(')?;
        let mut geometry = vec![self.num()?];
        while self.peek().tok == Tok::Punct(',') {
            self.bump();
            geometry.push(self.num()?);
        }
        self.punct(')')?;
        self.punct(')')?;
        Ok(Statement::Draw(DrawStmt {
            semantics,
            shape,
            position,
            geometry,
        }))
    }

    fn times(&mut self) -> Result<u32, SyntaxError> {
        self.assign("i")?;
        let at = self.pos;
        let v = self.int()?;
        u32::try_from(v).or_else(|_| {
            self.pos = at;
            self.error(&["non-negative integer"])
        })
    }

    fn for_stmt(&mut self) -> Result<Statement, SyntaxError> {
        self.keyword("for")?;
        self.punct('(')?;
        let mode = self.ident(&["Trans", "Rot"])?;
        self.punct(',')?;
        let times = self.times()?;
        self.punct(',')?;
        let kind = if mode == "Trans" {
            self.assign("u")?;
            LoopKind::Translation { step: self.triple()? }
        } else {
            self.assign("theta")?;
            let angle = self.num()?;
            self.punct(',')?;
            self.assign("axis")?;
            let axis = match self.ident(&["X", "Y", "Z"])?.as_str() {
                "X" => Axis::X,
                "Y" => Axis::Y,
                _ => Axis::Z,
            };
            LoopKind::Rotation { angle, axis }
        };
        self.punct(')')?;
        self.punct('{')?;
        let body = self.program(true)?;
        self.punct('}')?;
        Ok(Statement::For(ForStmt { kind, times, body }))
    }
}

/// Parses and validates program text against the default 32-cube limits.
pub fn parse_text(src: &str) -> Result<Program, ParseError> {
    parse_text_with(src, &Limits::default())
}

pub fn parse_text_with(src: &str, limits: &Limits) -> Result<Program, ParseError> {
    let toks = lex(src).map_err(ParseError::Syntax)?;
    let mut p = Parser { toks, pos: 0 };
    let statements = p.program(false).map_err(ParseError::Syntax)?;
    let program = Program::new(statements);
    let report = validate_with(&program, limits);
    if report.ok() {
        Ok(program)
    } else {
        Err(ParseError::Semantic(report))
    }
}

/// Canonical text form; empty programs print as the empty string.
pub fn print_text(p: &Program) -> String {
    let mut out = String::new();
    print_stmts(&p.statements, 0, &mut out);
    out
}

fn print_stmts(stmts: &[Statement], depth: usize, out: &mut String) {
    for s in stmts {
        for _ in 0..depth {
            out.push_str("  ");
        }
        match s {
            Statement::Draw(d) => {
                let [x, y, z] = d.position;
                write!(out, "draw({}, {}, P=({x},{y},{z}), G=(", d.semantics, d.shape).unwrap();
                for (i, g) in d.canonical_geometry().iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write!(out, "{g}").unwrap();
                }
                out.push_str("))\n");
            }
            Statement::For(f) => {
                match f.kind {
                    LoopKind::Translation { step: [x, y, z] } => {
                        writeln!(out, "for(Trans, i={}, u=({x},{y},{z})) {{", f.times).unwrap()
                    }
                    LoopKind::Rotation { angle, axis } => {
                        writeln!(out, "for(Rot, i={}, theta={angle}, axis={}) {{", f.times, axis.keyword()).unwrap()
                    }
                }
                print_stmts(&f.body, depth + 1, out);
                for _ in 0..depth {
                    out.push_str("  ");
                }
                out.push_str("}\n");
            }
        }
    }
}
