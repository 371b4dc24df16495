use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TOL: f64 = 1e-14;
const ORDER_TOL: f64 = 1e-12;

/// A double Butcher tableau: `a_exp` (strictly lower triangular) for the
/// explicit part, `a_imp` (lower triangular) for the implicit part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImexTableau {
    pub name: String,
    pub order: u32,
    pub a_exp: Vec<Vec<f64>>,
    pub a_imp: Vec<Vec<f64>>,
    pub b_exp: Vec<f64>,
    pub b_imp: Vec<f64>,
    pub c_exp: Vec<f64>,
    pub c_imp: Vec<f64>,
}

fn invalid(name: &str, what: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("tableau `{name}`: {what}"))
}

impl ImexTableau {
    /// Builds a tableau from its matrices; `b` and `c` follow from global
    /// stiff accuracy and the row-sum convention.
    pub fn new(name: &str, order: u32, a_exp: Vec<Vec<f64>>, a_imp: Vec<Vec<f64>>) -> Result<Self> {
        let s = a_exp.len();
        if s == 0 || a_imp.len() != s {
            return Err(invalid(name, "explicit and implicit parts need the same stage count"));
        }
        let b_exp = a_exp[s - 1].clone();
        let b_imp = a_imp[s - 1].clone();
        let c_exp = a_exp.iter().map(|r| r.iter().sum()).collect();
        let c_imp = a_imp.iter().map(|r| r.iter().sum()).collect();
        let tab = Self {
            name: name.to_string(),
            order,
            a_exp,
            a_imp,
            b_exp,
            b_imp,
            c_exp,
            c_imp,
        };
        tab.validate()?;
        Ok(tab)
    }

    pub fn stages(&self) -> usize {
        self.a_exp.len()
    }

    /// Checks shape, triangularity, the row-sum convention, global stiff
    /// accuracy and the order conditions of the declared order.
    pub fn validate(&self) -> Result<()> {
        let name = &self.name;
        let s = self.stages();
        let square = |m: &Vec<Vec<f64>>| m.len() == s && m.iter().all(|r| r.len() == s);
        if !square(&self.a_exp) || !square(&self.a_imp) {
            return Err(invalid(name, "matrices must be s x s"));
        }
        for v in [&self.b_exp, &self.b_imp, &self.c_exp, &self.c_imp] {
            if v.len() != s {
                return Err(invalid(name, "vectors must have s entries"));
            }
        }
        let all = self.a_exp.iter().chain(&self.a_imp).flatten();
        if all.chain(&self.b_exp).chain(&self.b_imp).any(|x| !x.is_finite()) {
            return Err(invalid(name, "non-finite coefficient"));
        }
        for i in 0..s {
            for j in i..s {
                if self.a_exp[i][j] != 0.0 {
                    return Err(invalid(name, "explicit part must be strictly lower triangular"));
                }
                if j > i && self.a_imp[i][j] != 0.0 {
                    return Err(invalid(name, "implicit part must be lower triangular"));
                }
            }
            if self.a_imp[i][i] < 0.0 {
                return Err(invalid(name, "implicit diagonal must be non-negative"));
            }
            let ce: f64 = self.a_exp[i].iter().sum();
            let ci: f64 = self.a_imp[i].iter().sum();
            if (ce - self.c_exp[i]).abs() > TOL || (ci - self.c_imp[i]).abs() > TOL {
                return Err(invalid(name, "c must equal the row sums of A"));
            }
        }
        if self.a_imp[s - 1][s - 1] == 0.0 {
            return Err(invalid(name, "last implicit diagonal entry must be non-zero"));
        }
        for j in 0..s {
            if (self.b_exp[j] - self.a_exp[s - 1][j]).abs() > TOL
                || (self.b_imp[j] - self.a_imp[s - 1][j]).abs() > TOL
            {
                return Err(invalid(name, "not globally stiffly accurate"));
            }
        }
        for (k, defect) in self.order_defects().into_iter().enumerate() {
            if defect > ORDER_TOL {
                return Err(invalid(
                    name,
                    format!("order condition {k} violated by {defect:e}"),
                ));
            }
        }
        Ok(())
    }

    /// Absolute defects of the IMEX order conditions up to the declared order.
    pub fn order_defects(&self) -> Vec<f64> {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut out = vec![
            (self.b_exp.iter().sum::<f64>() - 1.0).abs(),
            (self.b_imp.iter().sum::<f64>() - 1.0).abs(),
        ];
        if self.order >= 2 {
            for b in [&self.b_exp, &self.b_imp] {
                for c in [&self.c_exp, &self.c_imp] {
                    out.push((dot(b, c) - 0.5).abs());
                }
            }
        }
        out
    }

    /// First-order IMEX Euler written as a two-stage globally stiffly
    /// accurate pair (forward Euler for the explicit part, backward Euler
    /// for the implicit part).
    pub fn euler() -> Self {
        Self::new(
            "imex-euler",
            1,
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 1.0]],
        )
        .expect("built-in tableau is valid")
    }

    /// Three-stage, second-order, globally stiffly accurate pair with an
    /// L-stable SDIRK implicit part.
    pub fn ars222() -> Self {
        let g = 1.0 - std::f64::consts::FRAC_1_SQRT_2;
        let d = 1.0 - 1.0 / (2.0 * g);
        Self::new(
            "ars222",
            2,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![g, 0.0, 0.0],
                vec![d, 1.0 - d, 0.0],
            ],
            vec![
                vec![0.0, 0.0, 0.0],
                vec![0.0, g, 0.0],
                vec![0.0, 1.0 - g, g],
            ],
        )
        .expect("built-in tableau is valid")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        builtin_tableaux()
            .into_iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown tableau `{name}`")))
    }
}

pub fn builtin_tableaux() -> Vec<ImexTableau> {
    vec![ImexTableau::euler(), ImexTableau::ars222()]
}
