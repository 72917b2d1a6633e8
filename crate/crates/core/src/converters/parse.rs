use crate::converters::{Assignment, ConverterError, ConverterProgram, Expr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

impl Token {
    fn text(&self) -> String {
        match &self.tok {
            Tok::Ident(s) | Tok::Number(s) => s.clone(),
            Tok::Sym(c) => c.to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ConverterError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
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
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(s),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Number(s),
                line: l0,
                column: c0,
            });
            continue;
        }
        if "()[],;=+-".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                line: l0,
                column: c0,
            });
            continue;
        }
        return Err(ConverterError::Syntax {
            line: l0,
            column: c0,
            token: c.to_string(),
            message: "unexpected character".into(),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, ConverterError> {
        Err(ConverterError::Syntax {
            line: t.line,
            column: t.column,
            token: t.text(),
            message: message.into(),
        })
    }

    fn sym(&mut self, c: char) -> Result<(), ConverterError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(())
        } else {
            self.err(&t, format!("expected '{c}'"))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ConverterError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == kw => Ok(()),
            _ => self.err(&t, format!("expected '{kw}'")),
        }
    }

    fn int(&mut self) -> Result<usize, ConverterError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) if s.bytes().all(|b| b.is_ascii_digit()) => match s.parse() {
                Ok(v) => Ok(v),
                Err(_) => self.err(&t, "integer too large"),
            },
            _ => self.err(&t, "expected a non-negative integer"),
        }
    }

    fn number(&mut self) -> Result<f64, ConverterError> {
        let neg = if self.peek().tok == Tok::Sym('-') {
            self.next();
            true
        } else {
            if self.peek().tok == Tok::Sym('+') {
                self.next();
            }
            false
        };
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(if neg { -v } else { v }),
                _ => self.err(&t, "number is not finite"),
            },
            _ => self.err(&t, "expected a number"),
        }
    }

    fn ident(&mut self) -> Result<String, ConverterError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok(s),
            _ => self.err(&t, "expected a channel name"),
        }
    }

    fn expr(&mut self) -> Result<Expr, ConverterError> {
        let mut e = self.term()?;
        while self.peek().tok == Tok::Sym('+') {
            self.next();
            let rhs = self.term()?;
            e = Expr::Add(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Expr, ConverterError> {
        let t = self.next();
        match &t.tok {
            Tok::Number(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(Expr::Constant(v)),
                _ => self.err(&t, "number is not finite"),
            },
            Tok::Sym('-') => Ok(Expr::Negate(Box::new(self.term()?))),
            Tok::Ident(name) => {
                let name = name.clone();
                self.sym('(')?;
                let e = match name.as_str() {
                    "meas" => {
                        let channel = self.ident()?;
                        self.sym(',')?;
                        let index = self.int()?;
                        Expr::Meas { channel, index }
                    }
                    "task" => Expr::Task(self.int()?),
                    "constant" => Expr::Constant(self.number()?),
                    "scale" => {
                        let inner = self.expr()?;
                        self.sym(',')?;
                        Expr::Scale(Box::new(inner), self.number()?)
                    }
                    "add" => {
                        let a = self.expr()?;
                        self.sym(',')?;
                        let b = self.expr()?;
                        Expr::Add(Box::new(a), Box::new(b))
                    }
                    _ => return self.err(&t, "unknown function"),
                };
                self.sym(')')?;
                Ok(e)
            }
            _ => self.err(&t, "expected an expression"),
        }
    }
}

/// Parses converter text; the final statement's `;` is optional.
pub fn parse_converter(text: &str) -> Result<ConverterProgram, ConverterError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    p.keyword("dim")?;
    let dim = p.int()?;
    let t = p.next();
    match t.tok {
        Tok::Sym(';') => {}
        Tok::Eof => {
            return Ok(ConverterProgram {
                dim,
                assignments: Vec::new(),
            })
        }
        _ => return p.err(&t, "expected ';'"),
    }
    let mut seen = vec![false; dim];
    let mut assignments = Vec::new();
    while p.peek().tok != Tok::Eof {
        let head = p.peek().clone();
        p.keyword("out")?;
        p.sym('[')?;
        let index = p.int()?;
        p.sym(']')?;
        p.sym('=')?;
        let expr = p.expr()?;
        if index >= dim {
            return Err(ConverterError::IndexOutOfRange {
                line: head.line,
                index,
                dim,
            });
        }
        if std::mem::replace(&mut seen[index], true) {
            return Err(ConverterError::DuplicateIndex {
                line: head.line,
                index,
            });
        }
        assignments.push(Assignment { index, expr });
        let t = p.next();
        match t.tok {
            Tok::Sym(';') => {}
            Tok::Eof => break,
            _ => return p.err(&t, "expected ';'"),
        }
    }
    Ok(ConverterProgram { dim, assignments })
}
