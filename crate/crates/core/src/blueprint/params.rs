use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A template parameter: scalar, vector or row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Vector(Vec<f64>),
    Matrix(Vec<Vec<f64>>),
}

pub type Params = BTreeMap<String, ParamValue>;

impl ParamValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            ParamValue::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            ParamValue::Vector(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&[Vec<f64>]> {
        match self {
            ParamValue::Matrix(m) => Some(m),
            // An empty vector doubles as a 0-row matrix.
            ParamValue::Vector(v) if v.is_empty() => Some(&[]),
            _ => None,
        }
    }

    /// Shape as (rows, cols); scalars are (0, 0), vectors (len, 1).
    pub fn shape(&self) -> (usize, usize) {
        match self {
            ParamValue::Number(_) => (0, 0),
            ParamValue::Vector(v) => (v.len(), 1),
            ParamValue::Matrix(m) => (m.len(), m.first().map_or(0, Vec::len)),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamValue::Number(x) => vec![*x],
            ParamValue::Vector(v) => v.clone(),
            ParamValue::Matrix(m) => m.iter().flatten().copied().collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|x| x.is_finite())
    }

    fn describe(&self) -> String {
        match self {
            ParamValue::Number(_) => "a number".into(),
            ParamValue::Vector(v) => format!("a vector of length {}", v.len()),
            ParamValue::Matrix(m) => {
                format!("a {}x{} matrix", m.len(), m.first().map_or(0, Vec::len))
            }
        }
    }

    /// Mutable scalar slot addressed by up to two indices.
    pub fn element_mut(&mut self, idx: &[usize]) -> Option<&mut f64> {
        match (self, idx) {
            (ParamValue::Number(x), []) => Some(x),
            (ParamValue::Vector(v), [i]) => v.get_mut(*i),
            (ParamValue::Matrix(m), [i, j]) => m.get_mut(*i).and_then(|r| r.get_mut(*j)),
            _ => None,
        }
    }

    pub fn element(&self, idx: &[usize]) -> Option<f64> {
        match (self, idx) {
            (ParamValue::Number(x), []) => Some(*x),
            (ParamValue::Vector(v), [i]) => v.get(*i).copied(),
            (ParamValue::Matrix(m), [i, j]) => m.get(*i).and_then(|r| r.get(*j)).copied(),
            _ => None,
        }
    }
}

/// Size of one axis of a vector or matrix parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dim {
    Fixed(usize),
    Any,
    /// Rows (axis 0) or columns (axis 1) of another parameter.
    SameAs(&'static str, u8),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Scalar,
    /// Non-negative integer stored as a number.
    Integer,
    Vector(Dim),
    Matrix(Dim, Dim),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Free,
    Positive,
    NonNegative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamDefault {
    Number(f64),
    Vector(&'static [f64]),
    /// Zeros shaped by the parameter's declared dimensions.
    Zeros,
}

#[derive(Clone, Debug)]
pub struct ParamSchema {
    pub name: &'static str,
    pub kind: ParamKind,
    pub bound: Bound,
    pub default: Option<ParamDefault>,
    pub unit: &'static str,
    pub doc: &'static str,
}

impl ParamSchema {
    pub const fn new(
        name: &'static str,
        kind: ParamKind,
        unit: &'static str,
        doc: &'static str,
    ) -> Self {
        ParamSchema {
            name,
            kind,
            bound: Bound::Free,
            default: None,
            unit,
            doc,
        }
    }

    pub const fn bound(mut self, bound: Bound) -> Self {
        self.bound = bound;
        self
    }

    pub const fn default(mut self, d: ParamDefault) -> Self {
        self.default = Some(d);
        self
    }

    fn resolve_dim(dim: Dim, params: &Params) -> Option<usize> {
        match dim {
            Dim::Fixed(n) => Some(n),
            Dim::Any => None,
            Dim::SameAs(other, axis) => params.get(other).map(|v| {
                let (r, c) = v.shape();
                if axis == 0 {
                    r
                } else {
                    c
                }
            }),
        }
    }

    /// Value used when the parameter is omitted.
    pub fn default_value(&self, params: &Params) -> Option<ParamValue> {
        let d = self.default?;
        Some(match (d, self.kind) {
            (ParamDefault::Number(x), _) => ParamValue::Number(x),
            (ParamDefault::Vector(v), _) => ParamValue::Vector(v.to_vec()),
            (ParamDefault::Zeros, ParamKind::Vector(dim)) => {
                ParamValue::Vector(vec![0.0; Self::resolve_dim(dim, params)?])
            }
            (ParamDefault::Zeros, ParamKind::Matrix(r, c)) => {
                let r = Self::resolve_dim(r, params)?;
                let c = Self::resolve_dim(c, params)?;
                ParamValue::Matrix(vec![vec![0.0; c]; r])
            }
            (ParamDefault::Zeros, _) => ParamValue::Number(0.0),
        })
    }

    /// Checks kind, shape and bound of `value` given the sibling parameters.
    pub fn check(&self, value: &ParamValue, params: &Params) -> Result<(), String> {
        if !value.is_finite() {
            return Err("contains a non-finite entry".into());
        }
        let dim_ok = |dim: Dim, got: usize| -> Result<(), String> {
            match Self::resolve_dim(dim, params) {
                Some(n) if n != got => Err(format!("expected length {n}, got {got}")),
                _ => Ok(()),
            }
        };
        match (self.kind, value) {
            (ParamKind::Scalar, ParamValue::Number(_)) => {}
            (ParamKind::Integer, ParamValue::Number(x)) => {
                if x.fract() != 0.0 || *x < 0.0 || *x > u32::MAX as f64 {
                    return Err(format!("expected a non-negative integer, got {x}"));
                }
            }
            (ParamKind::Vector(dim), ParamValue::Vector(v)) => dim_ok(dim, v.len())?,
            (ParamKind::Matrix(rd, cd), ParamValue::Matrix(_))
            | (ParamKind::Matrix(rd, cd), ParamValue::Vector(_))
                if value.as_matrix().is_some() =>
            {
                let m = value.as_matrix().unwrap_or(&[]);
                if let Some(first) = m.first() {
                    if m.iter().any(|r| r.len() != first.len()) {
                        return Err("rows have different lengths".into());
                    }
                }
                let (r, c) = value.shape();
                dim_ok(rd, r).map_err(|e| format!("rows: {e}"))?;
                if r > 0 {
                    dim_ok(cd, c).map_err(|e| format!("columns: {e}"))?;
                }
            }
            (kind, v) => {
                let want = match kind {
                    ParamKind::Scalar => "a number",
                    ParamKind::Integer => "an integer",
                    ParamKind::Vector(_) => "a vector",
                    ParamKind::Matrix(..) => "a matrix",
                };
                return Err(format!("expected {want}, got {}", v.describe()));
            }
        }
        let vals = value.values();
        match self.bound {
            Bound::Free => {}
            Bound::Positive => {
                if vals.iter().any(|&x| x <= 0.0) {
                    return Err("entries must be > 0".into());
                }
            }
            Bound::NonNegative => {
                if vals.iter().any(|&x| x < 0.0) {
                    return Err("entries must be >= 0".into());
                }
            }
        }
        Ok(())
    }

    pub fn kind_label(&self) -> String {
        let d = |d: Dim| match d {
            Dim::Fixed(n) => n.to_string(),
            Dim::Any => "n".into(),
            Dim::SameAs(p, 0) => format!("rows({p})"),
            Dim::SameAs(p, _) => format!("cols({p})"),
        };
        match self.kind {
            ParamKind::Scalar => "number".into(),
            ParamKind::Integer => "integer".into(),
            ParamKind::Vector(n) => format!("vector[{}]", d(n)),
            ParamKind::Matrix(r, c) => format!("matrix[{}x{}]", d(r), d(c)),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            serde_json::to_string(self).map_err(|_| fmt::Error)?
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untagged_shapes() {
        let v: ParamValue = serde_json::from_str("3").unwrap();
        assert_eq!(v, ParamValue::Number(3.0));
        let v: ParamValue = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(v, ParamValue::Vector(vec![1.0, 2.0]));
        let v: ParamValue = serde_json::from_str("[[1], [2]]").unwrap();
        assert_eq!(v.shape(), (2, 1));
    }

    #[test]
    fn schema_checks() {
        let mut params = Params::new();
        params.insert(
            "Q".into(),
            ParamValue::Matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
        );
        let x0 = ParamSchema::new("x0", ParamKind::Vector(Dim::SameAs("Q", 0)), "", "");
        assert!(x0
            .check(&ParamValue::Vector(vec![0.0, 0.0]), &params)
            .is_ok());
        assert!(x0.check(&ParamValue::Vector(vec![0.0]), &params).is_err());
        assert!(x0.check(&ParamValue::Number(0.0), &params).is_err());
        assert_eq!(
            x0.clone()
                .default(ParamDefault::Zeros)
                .default_value(&params),
            Some(ParamValue::Vector(vec![0.0, 0.0]))
        );
        let n = ParamSchema::new("n", ParamKind::Integer, "", "");
        assert!(n.check(&ParamValue::Number(2.5), &params).is_err());
        let k = ParamSchema::new("k", ParamKind::Scalar, "", "").bound(Bound::Positive);
        assert!(k.check(&ParamValue::Number(0.0), &params).is_err());
        assert!(k.check(&ParamValue::Number(f64::NAN), &params).is_err());
        let m = ParamSchema::new("m", ParamKind::Matrix(Dim::Any, Dim::Fixed(2)), "", "");
        assert!(m
            .check(
                &ParamValue::Matrix(vec![vec![1.0, 2.0], vec![3.0]]),
                &params
            )
            .is_err());
    }
}
