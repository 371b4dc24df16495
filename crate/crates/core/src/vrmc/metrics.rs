use crate::error::{Error, Result};
use crate::fields::PhaseGrid;

/// Floor applied to the field norm before taking the logarithm.
pub const ZETA_FLOOR: f64 = 1e-300;

/// `log10 ||E||_{L2}` with the grid's spatial quadrature; the norm is floored
/// at [`ZETA_FLOOR`], so a vanishing field gives `-300`.
pub fn zeta(efield: &[f64], grid: &PhaseGrid) -> Result<f64> {
    if efield.len() != grid.nx() {
        return Err(Error::ShapeMismatch(format!(
            "field has {} nodes, grid has {}",
            efield.len(),
            grid.nx()
        )));
    }
    let sq: f64 = efield
        .iter()
        .zip(grid.x_weights())
        .map(|(e, w)| w * e * e)
        .sum();
    Ok(sq.sqrt().max(ZETA_FLOOR).log10())
}

/// Cell-weighted L1 distance `sum |a - b| * cell`.
pub fn l1_error(estimate: &[f64], reference: &[f64], cell: f64) -> Result<f64> {
    if estimate.len() != reference.len() {
        return Err(Error::ShapeMismatch(format!(
            "estimate has {} values, reference has {}",
            estimate.len(),
            reference.len()
        )));
    }
    Ok(cell
        * estimate
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(nx: usize, len: f64) -> PhaseGrid {
        PhaseGrid::new(nx, [0.0, len], true, 1, 8, 6.0).unwrap()
    }

    #[test]
    fn zeta_of_sine() {
        let g = grid(64, 2.0 * PI);
        let e: Vec<f64> = g.x_nodes().iter().map(|x| x.sin()).collect();
        let z = zeta(&e, &g).unwrap();
        assert!((z - PI.sqrt().log10()).abs() < 1e-6);
        let scaled: Vec<f64> = e.iter().map(|v| 10.0 * v).collect();
        assert!((zeta(&scaled, &g).unwrap() - z - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zeta_floor() {
        let g = grid(16, 1.0);
        assert_eq!(zeta(&[0.0; 16], &g).unwrap(), -300.0);
        assert!(zeta(&[0.0; 15], &g).is_err());
    }

    #[test]
    fn l1_closed_forms() {
        let a = vec![0.3; 50];
        assert_eq!(l1_error(&a, &a, 0.1).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + 0.25).collect();
        // offset 0.25 over a domain of length 50 * 0.1
        assert!((l1_error(&b, &a, 0.1).unwrap() - 1.25).abs() < 1e-13);
        assert!(l1_error(&a, &b[1..], 0.1).is_err());
    }
}
