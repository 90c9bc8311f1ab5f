use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use super::DiscGrid;
use crate::error::{Error, Result};

/// Values on the interior nodes, ring-major, plus an optional trace on the
/// boundary circle aligned with the grid angles.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    values: Vec<T>,
    trace: Option<Vec<T>>,
}

pub type ScalarField = Field<f64>;
pub type ComplexField = Field<Complex64>;
pub type Vec4Field = Field<[f64; 4]>;

impl<T> Field<T> {
    pub fn new(grid: &DiscGrid, values: Vec<T>, trace: Option<Vec<T>>) -> Result<Self> {
        if values.len() != grid.num_interior() {
            return Err(Error::ShapeMismatch {
                expected: grid.num_interior(),
                actual: values.len(),
            });
        }
        if let Some(t) = &trace {
            if t.len() != grid.n_theta() {
                return Err(Error::ShapeMismatch {
                    expected: grid.n_theta(),
                    actual: t.len(),
                });
            }
        }
        Ok(Self { values, trace })
    }

    /// Samples `f(u, v)` on the interior nodes and on the boundary circle.
    pub fn from_fn(grid: &DiscGrid, f: impl Fn(f64, f64) -> T + Sync) -> Self
    where
        T: Send,
    {
        use rayon::prelude::*;
        let values = (0..grid.num_interior())
            .into_par_iter()
            .map(|i| {
                let (u, v) = grid.node(i);
                f(u, v)
            })
            .collect();
        let trace = (0..grid.n_theta())
            .map(|k| {
                let (u, v) = grid.boundary_node(k);
                f(u, v)
            })
            .collect();
        Self {
            values,
            trace: Some(trace),
        }
    }

    /// Like [`Field::from_fn`] but without a boundary trace.
    pub fn interior_from_fn(grid: &DiscGrid, f: impl Fn(f64, f64) -> T + Sync) -> Self
    where
        T: Send,
    {
        let mut field = Self::from_fn(grid, f);
        field.trace = None;
        field
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn trace(&self) -> Option<&[T]> {
        self.trace.as_deref()
    }

    pub fn has_trace(&self) -> bool {
        self.trace.is_some()
    }

    pub fn trace_or_err(&self) -> Result<&[T]> {
        self.trace.as_deref().ok_or(Error::MissingTrace)
    }

    pub fn without_trace(mut self) -> Self {
        self.trace = None;
        self
    }

    pub fn into_parts(self) -> (Vec<T>, Option<Vec<T>>) {
        (self.values, self.trace)
    }

    /// Applies `f` nodewise to values and trace.
    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Field<U> {
        Field {
            values: self.values.iter().map(&f).collect(),
            trace: self.trace.as_ref().map(|t| t.iter().map(&f).collect()),
        }
    }

    /// Combines two fields nodewise; the trace survives only if both have one.
    pub fn zip_map<S, U>(&self, other: &Field<S>, f: impl Fn(&T, &S) -> U) -> Field<U> {
        assert_eq!(self.values.len(), other.values.len(), "field length mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(a, b))
            .collect();
        let trace = match (&self.trace, &other.trace) {
            (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| f(x, y)).collect()),
            _ => None,
        };
        Field { values, trace }
    }

    pub(crate) fn from_parts_unchecked(values: Vec<T>, trace: Option<Vec<T>>) -> Self {
        Self { values, trace }
    }
}

impl Vec4Field {
    pub fn component(&self, c: usize) -> ScalarField {
        self.map(|x| x[c])
    }

    pub fn from_components(parts: [&ScalarField; 4]) -> Self {
        let n = parts[0].values.len();
        let values = (0..n)
            .map(|i| [0, 1, 2, 3].map(|c| parts[c].values[i]))
            .collect();
        let trace = if parts.iter().all(|p| p.trace.is_some()) {
            let m = parts[0].trace.as_ref().map_or(0, Vec::len);
            Some(
                (0..m)
                    .map(|k| [0, 1, 2, 3].map(|c| parts[c].trace.as_ref().unwrap()[k]))
                    .collect(),
            )
        } else {
            None
        };
        Field { values, trace }
    }
}

impl ComplexField {
    pub fn re(&self) -> ScalarField {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> ScalarField {
        self.map(|z| z.im)
    }
}

impl ScalarField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(|&x| Complex64::new(x, 0.0))
    }

    /// Max over interior values and trace.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .chain(self.trace.iter().flatten())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|x| s * x)
    }
}

impl ComplexField {
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .chain(self.trace.iter().flatten())
            .fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Nodal scalar types the grid operators act on.
pub trait GridScalar:
    Copy + Send + Sync + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn to_c(self) -> Complex64;
    fn from_c(z: Complex64) -> Self;
}

impl GridScalar for f64 {
    fn to_c(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }
    fn from_c(z: Complex64) -> Self {
        z.re
    }
}

impl GridScalar for Complex64 {
    fn to_c(self) -> Complex64 {
        self
    }
    fn from_c(z: Complex64) -> Self {
        z
    }
}

pub fn dot4(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}
