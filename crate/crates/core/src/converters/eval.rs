use crate::converters::{ConverterError, ConverterIssue, ConverterProgram, Expr};
use crate::measurement::{MeasurementBundle, MeasurementSchema};

/// Evaluates by channel-name lookup; unassigned outputs are 0.
pub fn eval_converter(
    prog: &ConverterProgram,
    bundle: &MeasurementBundle,
    task_control: &[f64],
) -> Result<Vec<f64>, ConverterError> {
    let mut out = vec![0.0; prog.dim()];
    for a in prog.assignments() {
        out[a.index] = eval_expr(&a.expr, bundle, task_control)?;
    }
    Ok(out)
}

fn eval_expr(e: &Expr, bundle: &MeasurementBundle, task: &[f64]) -> Result<f64, ConverterError> {
    Ok(match e {
        Expr::Constant(c) => *c,
        Expr::Meas { channel, index } => *bundle
            .get(channel)
            .and_then(|v| v.get(*index))
            .ok_or_else(|| ConverterError::Unresolved(format!("meas({channel}, {index})")))?,
        Expr::Task(i) => *task.get(*i).ok_or(ConverterError::TaskOutOfRange {
            index: *i,
            got: task.len(),
        })?,
        Expr::Negate(a) => -eval_expr(a, bundle, task)?,
        Expr::Scale(a, s) => eval_expr(a, bundle, task)? * s,
        Expr::Add(a, b) => eval_expr(a, bundle, task)? + eval_expr(b, bundle, task)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Constant(f64),
    Flat(usize),
    Task(usize),
    Negate(Box<Node>),
    Scale(Box<Node>, f64),
    Add(Box<Node>, Box<Node>),
}

/// A program with channel references resolved to flat bundle offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledConverter {
    dim: usize,
    task_extent: usize,
    assignments: Vec<(usize, Node)>,
}

impl CompiledConverter {
    pub fn compile(
        prog: &ConverterProgram,
        schema: &MeasurementSchema,
    ) -> Result<Self, Vec<ConverterIssue>> {
        let issues = super::validate_converter(prog, schema, usize::MAX, prog.dim());
        if !issues.is_empty() {
            return Err(issues);
        }
        fn lower(e: &Expr, schema: &MeasurementSchema) -> Node {
            match e {
                Expr::Constant(c) => Node::Constant(*c),
                Expr::Meas { channel, index } => {
                    let (off, _) = schema.locate(channel).expect("validated channel");
                    Node::Flat(off + index)
                }
                Expr::Task(i) => Node::Task(*i),
                Expr::Negate(a) => Node::Negate(Box::new(lower(a, schema))),
                Expr::Scale(a, s) => Node::Scale(Box::new(lower(a, schema)), *s),
                Expr::Add(a, b) => {
                    Node::Add(Box::new(lower(a, schema)), Box::new(lower(b, schema)))
                }
            }
        }
        Ok(Self {
            dim: prog.dim(),
            task_extent: prog.task_extent(),
            assignments: prog
                .assignments()
                .iter()
                .map(|a| (a.index, lower(&a.expr, schema)))
                .collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes all `dim` outputs (zeros where unassigned).
    pub fn eval_into(
        &self,
        values: &[f64],
        task: &[f64],
        out: &mut [f64],
    ) -> Result<(), ConverterError> {
        if task.len() < self.task_extent {
            return Err(ConverterError::TaskOutOfRange {
                index: self.task_extent - 1,
                got: task.len(),
            });
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, n) in &self.assignments {
            out[*i] = eval_node(n, values, task);
        }
        Ok(())
    }
}

fn eval_node(n: &Node, values: &[f64], task: &[f64]) -> f64 {
    match n {
        Node::Constant(c) => *c,
        Node::Flat(i) => values[*i],
        Node::Task(i) => task[*i],
        Node::Negate(a) => -eval_node(a, values, task),
        Node::Scale(a, s) => eval_node(a, values, task) * s,
        Node::Add(a, b) => eval_node(a, values, task) + eval_node(b, values, task),
    }
}
