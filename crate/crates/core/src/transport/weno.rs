//! Fifth-order WENO (Jiang–Shu weights) conservative transport in x and v.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::DistField;

/// Regularisation of the smoothness indicators.
pub const WENO_EPS: f64 = 1e-6;

/// Left-biased WENO5 value at the face between `c` and `d` from the cell
/// values `a, b, c, d, e`.
#[inline]
pub fn weno5(a: f64, b: f64, c: f64, d: f64, e: f64) -> f64 {
    let q0 = (2.0 * a - 7.0 * b + 11.0 * c) / 6.0;
    let q1 = (-b + 5.0 * c + 2.0 * d) / 6.0;
    let q2 = (2.0 * c + 5.0 * d - e) / 6.0;
    let s0 = 13.0 / 12.0 * (a - 2.0 * b + c).powi(2) + 0.25 * (a - 4.0 * b + 3.0 * c).powi(2);
    let s1 = 13.0 / 12.0 * (b - 2.0 * c + d).powi(2) + 0.25 * (b - d).powi(2);
    let s2 = 13.0 / 12.0 * (c - 2.0 * d + e).powi(2) + 0.25 * (3.0 * c - 4.0 * d + e).powi(2);
    let w0 = 0.1 / (WENO_EPS + s0).powi(2);
    let w1 = 0.6 / (WENO_EPS + s1).powi(2);
    let w2 = 0.3 / (WENO_EPS + s2).powi(2);
    (w0 * q0 + w1 * q1 + w2 * q2) / (w0 + w1 + w2)
}

/// Upwind face value for transport speed sign `positive`. `at(k)` returns
/// the cell value at (possibly ghost) index `k`; the face sits between cells
/// `k - 1` and `k`.
#[inline]
fn face_value(at: impl Fn(isize) -> f64, k: isize, positive: bool) -> f64 {
    if positive {
        weno5(at(k - 3), at(k - 2), at(k - 1), at(k), at(k + 1))
    } else {
        weno5(at(k + 2), at(k + 1), at(k), at(k - 1), at(k - 2))
    }
}

/// Tendency `-v_1 df/dx`, periodic or with constant-extrapolation outflow
/// ghosts depending on the grid.
pub fn weno_flux_x(f: &DistField) -> Result<Array2<f64>> {
    let grid = &f.grid;
    if grid.dx_dims() == 0 {
        return Err(Error::NoSpatialDimension);
    }
    let nx = grid.nx() as isize;
    let vg = grid.velocity();
    let nvel = vg.len();
    let dx = grid.dx();
    let periodic = grid.x_periodic();
    let speed: Vec<f64> = (0..nvel).map(|idx| vg.coords(idx)[0]).collect();
    let values = &f.values;
    let cell = |k: isize| -> usize {
        if periodic {
            k.rem_euclid(nx) as usize
        } else {
            k.clamp(0, nx - 1) as usize
        }
    };

    // numerical flux v * f_hat on faces 0..=nx
    let faces: Vec<Vec<f64>> = (0..=nx)
        .into_par_iter()
        .map(|k| {
            let rows: Vec<usize> = (k - 3..=k + 2).map(cell).collect();
            (0..nvel)
                .map(|idx| {
                    let v = speed[idx];
                    let at = |m: isize| values[[rows[(m - k + 3) as usize], idx]];
                    v * face_value(at, k, v > 0.0)
                })
                .collect()
        })
        .collect();

    let mut out = Array2::zeros(values.dim());
    out.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(nvel)
        .enumerate()
        .for_each(|(i, row)| {
            for (idx, o) in row.iter_mut().enumerate() {
                *o = -(faces[i + 1][idx] - faces[i][idx]) / dx;
            }
        });
    Ok(out)
}

/// Tendency `-E df/dv_1` with `E` given per x-node. Ghost values outside the
/// velocity box are zero and the two boundary faces carry no flux, so each
/// slice's mass is conserved exactly.
pub fn weno_flux_v(f: &DistField, efield: &[f64]) -> Result<Array2<f64>> {
    let grid = &f.grid;
    if efield.len() != grid.nx() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} nodes, grid has {}",
            efield.len(),
            grid.nx()
        )));
    }
    if efield.iter().any(|e| !e.is_finite()) {
        return Err(Error::NonFiniteField);
    }
    let vg = grid.velocity();
    let nv = vg.nv() as isize;
    let h = vg.spacing();
    // stride of the first velocity axis, and the number of lines along it
    let stride = vg.len() / vg.nv();
    let mut out = Array2::zeros(f.values.dim());
    out.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(vg.len())
        .enumerate()
        .for_each(|(i, row)| {
            let e = efield[i];
            if e == 0.0 {
                return;
            }
            let slice = f.slice(i);
            let mut flux = vec![0.0; nv as usize + 1];
            for line in 0..stride {
                let at = |k: isize| {
                    if (0..nv).contains(&k) {
                        slice[k as usize * stride + line]
                    } else {
                        0.0
                    }
                };
                for k in 1..nv {
                    flux[k as usize] = e * face_value(at, k, e > 0.0);
                }
                for j in 0..nv as usize {
                    row[j * stride + line] = -(flux[j + 1] - flux[j]) / h;
                }
            }
        });
    Ok(out)
}
