//! Grids, distribution fields, moments, Maxwellians and the random-parameter space.
//!
//! Storage is x-major: row `i` of a [`DistField`] is the velocity slice at
//! x-node `i`, flattened with the last velocity index fastest.

mod grid;
mod maxwellian;
mod moments;
mod random;

use ndarray::Array2;

pub use grid::{PhaseGrid, VelocityGrid};
pub use maxwellian::Maxwellian;
pub use moments::{slice_entropy, slice_moments, MomentSet, Moments};
pub use random::RandomSpace;

use crate::error::{Error, Result};

/// The distribution function sampled on a [`PhaseGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct DistField {
    pub grid: PhaseGrid,
    pub values: Array2<f64>,
    pub time: f64,
}

impl DistField {
    pub fn new(grid: PhaseGrid, values: Array2<f64>, time: f64) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::ShapeMismatch(format!(
                "field shape {:?} does not match grid {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { grid, values, time })
    }

    /// Builds a field from initial data, additionally requiring positive total mass.
    pub fn from_initial(grid: PhaseGrid, values: Array2<f64>) -> Result<Self> {
        let f = Self::new(grid, values, 0.0)?;
        if !(f.total_mass() > 0.0) {
            return Err(Error::InvalidParameter(
                "initial data must carry positive mass".into(),
            ));
        }
        Ok(f)
    }

    pub fn zeros(grid: PhaseGrid) -> Self {
        let values = grid.zeros();
        Self {
            grid,
            values,
            time: 0.0,
        }
    }

    pub fn slice(&self, i: usize) -> &[f64] {
        self.values
            .row(i)
            .to_slice()
            .expect("field rows are contiguous")
    }

    pub fn total_mass(&self) -> f64 {
        let w = self.grid.x_weights();
        let dv = self.grid.velocity().cell_volume();
        self.values
            .rows()
            .into_iter()
            .zip(&w)
            .map(|(row, wx)| wx * row.sum() * dv)
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Velocity-integrated entropy `-int f ln f dv` per x-node.
    pub fn entropy(&self) -> Vec<f64> {
        (0..self.grid.nx())
            .map(|i| slice_entropy(self.slice(i), self.grid.velocity()))
            .collect()
    }
}

/// Moments `int f (1, v, |v|^2/2) dv` at every x-node.
pub fn moments_of(f: &DistField) -> Result<MomentSet> {
    let vg = f.grid.velocity();
    let nodes = (0..f.grid.nx())
        .map(|i| slice_moments(f.slice(i), vg))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSet {
        dims: vg.dims(),
        nodes,
    })
}

/// Samples the local isotropic Maxwellian of `m` at every x-node.
pub fn maxwellian_eval(m: &MomentSet, grid: &PhaseGrid) -> Result<DistField> {
    if m.len() != grid.nx() || m.dims != grid.dv_dims() {
        return Err(Error::ShapeMismatch(format!(
            "moment set ({} nodes, d_v = {}) does not match grid ({} nodes, d_v = {})",
            m.len(),
            m.dims,
            grid.nx(),
            grid.dv_dims()
        )));
    }
    let mut values = grid.zeros();
    for (mut row, node) in values.rows_mut().into_iter().zip(&m.nodes) {
        let max = Maxwellian::isotropic(node, m.dims)?;
        max.fill(
            grid.velocity(),
            row.as_slice_mut().expect("field rows are contiguous"),
        );
    }
    DistField::new(grid.clone(), values, 0.0)
}

/// Samples one anisotropic Maxwellian at every x-node.
pub fn anisotropic_eval(
    rho: f64,
    u: [f64; 2],
    temps: [f64; 2],
    grid: &PhaseGrid,
) -> Result<DistField> {
    let max = Maxwellian::anisotropic(rho, u, temps, grid.dv_dims())?;
    let slice = max.sample(grid.velocity());
    let mut values = grid.zeros();
    for mut row in values.rows_mut() {
        row.as_slice_mut()
            .expect("field rows are contiguous")
            .copy_from_slice(&slice);
    }
    DistField::new(grid.clone(), values, 0.0)
}
