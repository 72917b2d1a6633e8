use std::fmt;

use crate::converters::{ConverterProgram, Expr};
use crate::measurement::MeasurementSchema;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IssueKind {
    UnknownChannel,
    IndexOutOfRange,
    TaskIndexOutOfRange,
    DimensionMismatch,
}

impl IssueKind {
    pub fn label(self) -> &'static str {
        match self {
            IssueKind::UnknownChannel => "unknown channel",
            IssueKind::IndexOutOfRange => "index out of range",
            IssueKind::TaskIndexOutOfRange => "task index out of range",
            IssueKind::DimensionMismatch => "dimension mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConverterIssue {
    pub kind: IssueKind,
    pub detail: String,
}

impl fmt::Display for ConverterIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.detail)
    }
}

/// Every problem with the program against the channels, task dimension and port; empty means valid.
pub fn validate_converter(
    prog: &ConverterProgram,
    channels: &MeasurementSchema,
    task_dim: usize,
    port_dim: usize,
) -> Vec<ConverterIssue> {
    let mut issues = Vec::new();
    if prog.dim() != port_dim {
        issues.push(ConverterIssue {
            kind: IssueKind::DimensionMismatch,
            detail: format!(
                "program declares dim {} but the input port expects {port_dim}",
                prog.dim()
            ),
        });
    }
    for a in prog.assignments() {
        check(&a.expr, a.index, channels, task_dim, &mut issues);
    }
    issues
}

fn check(
    e: &Expr,
    out: usize,
    channels: &MeasurementSchema,
    task_dim: usize,
    issues: &mut Vec<ConverterIssue>,
) {
    match e {
        Expr::Constant(_) => {}
        Expr::Meas { channel, index } => match channels.channel(channel) {
            None => issues.push(ConverterIssue {
                kind: IssueKind::UnknownChannel,
                detail: format!(
                    "out[{out}] reads meas({channel}, {index}); no channel named '{channel}'"
                ),
            }),
            Some(c) if *index >= c.dim => issues.push(ConverterIssue {
                kind: IssueKind::IndexOutOfRange,
                detail: format!(
                    "out[{out}] reads meas({channel}, {index}) but '{channel}' has dim {}",
                    c.dim
                ),
            }),
            Some(_) => {}
        },
        Expr::Task(i) => {
            if *i >= task_dim {
                issues.push(ConverterIssue {
                    kind: IssueKind::TaskIndexOutOfRange,
                    detail: format!(
                        "out[{out}] reads task({i}) but the task control has dim {task_dim}"
                    ),
                });
            }
        }
        Expr::Negate(a) | Expr::Scale(a, _) => check(a, out, channels, task_dim, issues),
        Expr::Add(a, b) => {
            check(a, out, channels, task_dim, issues);
            check(b, out, channels, task_dim, issues);
        }
    }
}
