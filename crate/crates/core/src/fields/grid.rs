use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform, cell-centred velocity grid on `[-v_bound, v_bound]^dims`.
///
/// Nodes sit at `-v_bound + (j + 1/2) dv`, so the grid is symmetric under
/// `v -> -v` and never contains the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    dims: usize,
    nv: usize,
    v_bound: f64,
}

impl VelocityGrid {
    pub fn new(dims: usize, nv: usize, v_bound: f64) -> Result<Self> {
        if !(1..=2).contains(&dims) {
            return Err(Error::InvalidGrid(format!(
                "velocity dimension must be 1 or 2, got {dims}"
            )));
        }
        if nv < 4 || nv % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "velocity node count must be even and >= 4, got {nv}"
            )));
        }
        if !(v_bound > 0.0) || !v_bound.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "velocity bound must be positive, got {v_bound}"
            )));
        }
        Ok(Self { dims, nv, v_bound })
    }

    #[inline]
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Nodes per velocity dimension.
    #[inline]
    pub fn nv(&self) -> usize {
        self.nv
    }

    #[inline]
    pub fn v_bound(&self) -> f64 {
        self.v_bound
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.v_bound / self.nv as f64
    }

    /// Velocity cell volume `dv^dims`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
    }

    /// Total number of velocity nodes, `nv^dims`.
    #[inline]
    pub fn len(&self) -> usize {
        self.nv.pow(self.dims as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        (2 * j as i64 + 1 - self.nv as i64) as f64 * (0.5 * self.spacing())
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nv).map(|j| self.node(j)).collect()
    }

    /// Coordinates of flat index `idx`; the last velocity index runs fastest.
    /// Unused components are zero.
    #[inline]
    pub fn coords(&self, idx: usize) -> [f64; 2] {
        match self.dims {
            1 => [self.node(idx), 0.0],
            _ => [self.node(idx / self.nv), self.node(idx % self.nv)],
        }
    }

    /// Flat index of the node mirrored through the origin.
    #[inline]
    pub fn mirror(&self, idx: usize) -> usize {
        match self.dims {
            1 => self.nv - 1 - idx,
            _ => {
                let (i, j) = (idx / self.nv, idx % self.nv);
                (self.nv - 1 - i) * self.nv + (self.nv - 1 - j)
            }
        }
    }
}

/// Discretisation of phase space `(x, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    nx: usize,
    x_lo: f64,
    x_hi: f64,
    x_periodic: bool,
    velocity: VelocityGrid,
}

impl PhaseGrid {
    pub fn new(
        nx: usize,
        x_bounds: [f64; 2],
        x_periodic: bool,
        dv_dims: usize,
        nv: usize,
        v_bound: f64,
    ) -> Result<Self> {
        let velocity = VelocityGrid::new(dv_dims, nv, v_bound)?;
        if nx == 0 {
            return Err(Error::InvalidGrid("nx must be at least 1".into()));
        }
        if nx > 1 && !(x_bounds[1] > x_bounds[0]) {
            return Err(Error::InvalidGrid(format!(
                "x bounds must satisfy lo < hi, got {x_bounds:?}"
            )));
        }
        if nx > 1 && nx < 5 {
            return Err(Error::InvalidGrid(format!(
                "spatial grids need at least 5 nodes for the transport stencil, got {nx}"
            )));
        }
        Ok(Self {
            nx,
            x_lo: x_bounds[0],
            x_hi: x_bounds[1],
            x_periodic,
            velocity,
        })
    }

    /// Space-homogeneous grid (a single x-node).
    pub fn homogeneous(dv_dims: usize, nv: usize, v_bound: f64) -> Result<Self> {
        Self::new(1, [0.0, 1.0], true, dv_dims, nv, v_bound)
    }

    #[inline]
    pub fn dx_dims(&self) -> usize {
        usize::from(self.nx > 1)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn x_bounds(&self) -> [f64; 2] {
        [self.x_lo, self.x_hi]
    }

    #[inline]
    pub fn x_periodic(&self) -> bool {
        self.x_periodic
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        if self.nx == 1 {
            self.length()
        } else if self.x_periodic {
            self.length() / self.nx as f64
        } else {
            self.length() / (self.nx - 1) as f64
        }
    }

    #[inline]
    pub fn x_node(&self, i: usize) -> f64 {
        self.x_lo + i as f64 * self.dx()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x_node(i)).collect()
    }

    /// Spatial quadrature weights: uniform for periodic grids, trapezoid otherwise.
    pub fn x_weights(&self) -> Vec<f64> {
        if self.nx == 1 {
            return vec![1.0];
        }
        let dx = self.dx();
        let mut w = vec![dx; self.nx];
        if !self.x_periodic {
            w[0] *= 0.5;
            w[self.nx - 1] *= 0.5;
        }
        w
    }

    #[inline]
    pub fn velocity(&self) -> &VelocityGrid {
        &self.velocity
    }

    #[inline]
    pub fn dv_dims(&self) -> usize {
        self.velocity.dims()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.velocity.len())
    }

    pub fn zeros(&self) -> Array2<f64> {
        Array2::zeros(self.shape())
    }
}
