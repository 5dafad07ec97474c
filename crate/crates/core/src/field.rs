use crate::error::{Error, Result};
use crate::grid::Grid3;

/// Read access shared by scalar and horizontal-vector fields.
pub trait FieldData {
    fn grid(&self) -> &Grid3;
    fn components(&self) -> Vec<&[f64]>;

    fn ncomp(&self) -> usize {
        self.components().len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SField {
    pub grid: Grid3,
    pub values: Vec<f64>,
}

impl SField {
    pub fn new(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_nodes() {
            return Err(Error::InconsistentData(format!(
                "{} values for {} nodes",
                values.len(),
                grid.n_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InconsistentData("non-finite value".into()));
        }
        Ok(SField { grid, values })
    }

    pub fn zeros(grid: &Grid3) -> Self {
        SField {
            grid: grid.clone(),
            values: vec![0.0; grid.n_nodes()],
        }
    }

    pub fn constant(grid: &Grid3, c: f64) -> Self {
        SField {
            grid: grid.clone(),
            values: vec![c; grid.n_nodes()],
        }
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn(grid: &Grid3, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let nzp = grid.nzp();
        let mut values = vec![0.0; grid.n_nodes()];
        crate::par::for_chunks(&mut values, nzp, |col, out| {
            let (x, y) = grid.column_xy(col);
            for (k, v) in out.iter_mut().enumerate() {
                *v = f(x, y, grid.z(k));
            }
        });
        SField {
            grid: grid.clone(),
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        SField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

impl FieldData for SField {
    fn grid(&self) -> &Grid3 {
        &self.grid
    }
    fn components(&self) -> Vec<&[f64]> {
        vec![&self.values]
    }
}

/// Horizontal velocity: two components stored as separate node arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct HField {
    pub grid: Grid3,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
}

impl HField {
    pub fn new(grid: Grid3, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        let n = grid.n_nodes();
        if u1.len() != n || u2.len() != n {
            return Err(Error::InconsistentData(format!(
                "component lengths differ from {n} nodes"
            )));
        }
        if u1.iter().chain(u2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InconsistentData("non-finite value".into()));
        }
        Ok(HField { grid, u1, u2 })
    }

    pub fn zeros(grid: &Grid3) -> Self {
        let n = grid.n_nodes();
        HField {
            grid: grid.clone(),
            u1: vec![0.0; n],
            u2: vec![0.0; n],
        }
    }

    pub fn from_fn(grid: &Grid3, f: impl Fn(f64, f64, f64) -> [f64; 2] + Sync) -> Self {
        let a = SField::from_fn(grid, |x, y, z| f(x, y, z)[0]);
        let b = SField::from_fn(grid, |x, y, z| f(x, y, z)[1]);
        HField {
            grid: grid.clone(),
            u1: a.values,
            u2: b.values,
        }
    }

    #[inline]
    pub fn get(&self, node: usize) -> [f64; 2] {
        [self.u1[node], self.u2[node]]
    }

    pub fn comp(&self, i: usize) -> &[f64] {
        if i == 0 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        HField {
            grid: self.grid.clone(),
            u1: self.u1.iter().map(|v| c * v).collect(),
            u2: self.u2.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.u1
            .iter()
            .zip(&self.u2)
            .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()))
    }
}

impl FieldData for HField {
    fn grid(&self) -> &Grid3 {
        &self.grid
    }
    fn components(&self) -> Vec<&[f64]> {
        vec![&self.u1, &self.u2]
    }
}

pub(crate) fn same_grid(a: &Grid3, b: &Grid3) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch);
    }
    Ok(())
}
