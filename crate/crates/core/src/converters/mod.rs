//! The input-converter language: a total expression language routing
//! measurement channels and task control into a controller's input port.
//!
//! ```text
//! dim 4;
//! out[0] = meas(cart_pos, 1);
//! out[2] = scale(meas(pole_theta, 0), -1.0) + constant(0.1);
//! ```

mod eval;
mod parse;
mod validate;

pub use eval::{eval_converter, CompiledConverter};
pub use parse::parse_converter;
pub use validate::{validate_converter, ConverterIssue, IssueKind};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Meas { channel: String, index: usize },
    Task(usize),
    Negate(Box<Expr>),
    Scale(Box<Expr>, f64),
    Add(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub index: usize,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConverterProgram {
    dim: usize,
    assignments: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConverterError {
    #[error("line {line}, column {column}: {message} (at '{token}')")]
    Syntax {
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("line {line}: duplicate assignment to out[{index}]")]
    DuplicateIndex { line: usize, index: usize },
    #[error("line {line}: out[{index}] outside declared dim {dim}")]
    IndexOutOfRange {
        line: usize,
        index: usize,
        dim: usize,
    },
    #[error("unresolved reference at evaluation: {0}")]
    Unresolved(String),
    #[error("task control has {got} entries, program reads task({index})")]
    TaskOutOfRange { index: usize, got: usize },
}

impl ConverterProgram {
    /// Checks the index invariants (in range, no duplicates).
    pub fn new(dim: usize, assignments: Vec<Assignment>) -> Result<Self, ConverterError> {
        let mut seen = vec![false; dim];
        for a in &assignments {
            if a.index >= dim {
                return Err(ConverterError::IndexOutOfRange {
                    line: 0,
                    index: a.index,
                    dim,
                });
            }
            if std::mem::replace(&mut seen[a.index], true) {
                return Err(ConverterError::DuplicateIndex {
                    line: 0,
                    index: a.index,
                });
            }
        }
        Ok(Self { dim, assignments })
    }

    /// Output `i` ← `task(i)` for `i < dim`.
    pub fn passthrough(dim: usize) -> Self {
        Self {
            dim,
            assignments: (0..dim)
                .map(|i| Assignment {
                    index: i,
                    expr: Expr::Task(i),
                })
                .collect(),
        }
    }

    /// All outputs zero.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            assignments: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    /// Largest `task(i)` index read plus one (0 if none).
    pub fn task_extent(&self) -> usize {
        fn walk(e: &Expr) -> usize {
            match e {
                Expr::Task(i) => i + 1,
                Expr::Constant(_) | Expr::Meas { .. } => 0,
                Expr::Negate(a) | Expr::Scale(a, _) => walk(a),
                Expr::Add(a, b) => walk(a).max(walk(b)),
            }
        }
        self.assignments
            .iter()
            .map(|a| walk(&a.expr))
            .max()
            .unwrap_or(0)
    }

    /// Canonical text: assignments in index order, function-form expressions.
    pub fn to_canonical(&self) -> String {
        self.to_string()
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => write!(f, "constant({})", fmt_num(*c)),
            Expr::Meas { channel, index } => write!(f, "meas({channel}, {index})"),
            Expr::Task(i) => write!(f, "task({i})"),
            Expr::Negate(e) => write!(f, "-{e}"),
            Expr::Scale(e, s) => write!(f, "scale({e}, {})", fmt_num(*s)),
            Expr::Add(a, b) => write!(f, "add({a}, {b})"),
        }
    }
}

impl fmt::Display for ConverterProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dim {};", self.dim)?;
        let mut sorted: Vec<&Assignment> = self.assignments.iter().collect();
        sorted.sort_by_key(|a| a.index);
        for a in sorted {
            write!(f, "\nout[{}] = {};", a.index, a.expr)?;
        }
        Ok(())
    }
}
