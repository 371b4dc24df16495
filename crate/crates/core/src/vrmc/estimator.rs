use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Paired realisations: sample `k` of every set is evaluated at the same `z[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub z: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl SampleSet {
    pub fn new(z: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        if z.len() != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameter vectors for {} samples",
                z.len(),
                values.len()
            )));
        }
        if let Some(first) = values.first() {
            if let Some(k) = values.iter().position(|v| v.len() != first.len()) {
                return Err(Error::ShapeMismatch(format!(
                    "sample {k} has {} values, sample 0 has {}",
                    values[k].len(),
                    first.len()
                )));
            }
        }
        Ok(Self { z, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of values per sample.
    pub fn width(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Fails with the first index at which the parameter draws differ.
    pub fn check_pairing(&self, other: &SampleSet) -> Result<()> {
        check_pairing(&self.z, &other.z)
    }
}

/// Draws must agree bit-for-bit and in order.
pub fn check_pairing(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<()> {
    let n = a.len().min(b.len());
    if let Some(index) = (0..n).find(|&k| !same_bits(&a[k], &b[k])) {
        return Err(Error::PairingMismatch { index });
    }
    if a.len() != b.len() {
        return Err(Error::PairingMismatch { index: n });
    }
    Ok(())
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Pointwise sample covariances (divisor `K - 1`) between the high-fidelity
/// quantity and each of `I` surrogates.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariances {
    pub k: usize,
    /// `Var(f^H)` per entry.
    pub var_h: Vec<f64>,
    /// `b[i][j] = Cov(f^H, f^{L_i})` at entry `j`.
    pub b: Vec<Vec<f64>>,
    /// `c[i][l][j] = Cov(f^{L_i}, f^{L_l})` at entry `j`.
    pub c: Vec<Vec<Vec<f64>>>,
}

impl Covariances {
    pub fn surrogates(&self) -> usize {
        self.b.len()
    }

    pub fn width(&self) -> usize {
        self.var_h.len()
    }

    /// `(b, C, Var(f^H))` at entry `j`.
    pub fn at(&self, j: usize) -> (Vec<f64>, Vec<Vec<f64>>, f64) {
        let b = self.b.iter().map(|bi| bi[j]).collect();
        let c = self
            .c
            .iter()
            .map(|row| row.iter().map(|cil| cil[j]).collect())
            .collect();
        (b, c, self.var_h[j])
    }

    /// Quadrature-weighted sums `(sum w b, sum w C, sum w Var(f^H))`.
    pub fn integrated(&self, weights: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, f64)> {
        if weights.len() != self.width() {
            return Err(Error::ShapeMismatch(format!(
                "{} quadrature weights for {} entries",
                weights.len(),
                self.width()
            )));
        }
        let dot = |v: &[f64]| v.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
        let b = self.b.iter().map(|bi| dot(bi)).collect();
        let c = self
            .c
            .iter()
            .map(|row| row.iter().map(|cil| dot(cil)).collect())
            .collect();
        Ok((b, c, dot(&self.var_h)))
    }
}

fn check_shapes(high: &SampleSet, lows: &[&SampleSet]) -> Result<()> {
    for low in lows {
        high.check_pairing(low)?;
        if low.width() != high.width() {
            return Err(Error::ShapeMismatch(format!(
                "surrogate samples have {} values, high-fidelity samples {}",
                low.width(),
                high.width()
            )));
        }
    }
    Ok(())
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

fn covariance(a: &[Vec<f64>], b: &[Vec<f64>], j: usize, ma: f64, mb: f64) -> f64 {
    let k = a.len();
    a.iter()
        .zip(b)
        .map(|(x, y)| (x[j] - ma) * (y[j] - mb))
        .sum::<f64>()
        / (k - 1) as f64
}

/// Unbiased pointwise covariances of paired high/low-fidelity samples.
pub fn estimate_covariances(high: &SampleSet, lows: &[&SampleSet]) -> Result<Covariances> {
    let k = high.len();
    if k < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: k });
    }
    check_shapes(high, lows)?;
    let n = high.width();
    let ni = lows.len();
    let h = &high.values;

    // per entry: (var_h, b_i, c_il) computed serially over samples
    let per_entry: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mh = mean(h.iter().map(|x| x[j]), k);
            let ml: Vec<f64> = lows.iter().map(|l| mean(l.values.iter().map(|x| x[j]), k)).collect();
            let var = covariance(h, h, j, mh, mh);
            let b = (0..ni)
                .map(|i| covariance(h, &lows[i].values, j, mh, ml[i]))
                .collect();
            let mut c = vec![0.0; ni * ni];
            for i in 0..ni {
                for l in i..ni {
                    let v = covariance(&lows[i].values, &lows[l].values, j, ml[i], ml[l]);
                    c[i * ni + l] = v;
                    c[l * ni + i] = v;
                }
            }
            (var, b, c)
        })
        .collect();

    let mut cov = Covariances {
        k,
        var_h: Vec::with_capacity(n),
        b: vec![Vec::with_capacity(n); ni],
        c: vec![vec![Vec::with_capacity(n); ni]; ni],
    };
    for (var, b, c) in per_entry {
        cov.var_h.push(var);
        for i in 0..ni {
            cov.b[i].push(b[i]);
            for l in 0..ni {
                cov.c[i][l].push(c[i * ni + l]);
            }
        }
    }
    Ok(cov)
}

/// Regularisation applied when `C` is ill-conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePolicy {
    /// Condition number above which the ridge is added.
    pub cond_limit: f64,
    /// Ridge is `delta * trace(C) / I`.
    pub delta: f64,
}

impl Default for RidgePolicy {
    fn default() -> Self {
        Self {
            cond_limit: 1e12,
            delta: 1e-8,
        }
    }
}

/// Control-variate weights `lambda = C^{-1} b` and the data they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvWeights {
    pub b: Vec<f64>,
    pub c: Vec<Vec<f64>>,
    pub lambda: Vec<f64>,
    /// Ridge added to the diagonal, 0 if none.
    pub regularization: f64,
    /// True when `C` vanished and the weights fell back to plain Monte Carlo.
    pub degenerate: bool,
}

impl CvWeights {
    /// `Var(f^H) - 2 b.lambda + lambda^T C lambda`, clamped at 0; equals
    /// `Var(f^H) - b.lambda` at the optimum.
    pub fn predicted_variance(&self, var_h: f64) -> f64 {
        let bl: f64 = self.b.iter().zip(&self.lambda).map(|(b, l)| b * l).sum();
        let lcl: f64 = self
            .c
            .iter()
            .zip(&self.lambda)
            .map(|(row, li)| li * row.iter().zip(&self.lambda).map(|(c, l)| c * l).sum::<f64>())
            .sum();
        (var_h - 2.0 * bl + lcl).max(0.0)
    }
}

/// Solves `C lambda = b` by Cholesky, adding a ridge when `C` is
/// ill-conditioned and returning `lambda = 0` when `C` vanishes.
pub fn optimal_weights(b: &[f64], c: &[Vec<f64>], policy: &RidgePolicy) -> Result<CvWeights> {
    let ni = b.len();
    if c.len() != ni || c.iter().any(|row| row.len() != ni) {
        return Err(Error::ShapeMismatch(format!(
            "covariance matrix is not {ni}x{ni}"
        )));
    }
    let mut cm = DMatrix::from_fn(ni, ni, |i, l| 0.5 * (c[i][l] + c[l][i]));
    let scale = cm.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut out = CvWeights {
        b: b.to_vec(),
        c: (0..ni).map(|i| (0..ni).map(|l| cm[(i, l)]).collect()).collect(),
        lambda: vec![0.0; ni],
        regularization: 0.0,
        degenerate: false,
    };
    if ni == 0 {
        return Ok(out);
    }
    if !(scale > f64::MIN_POSITIVE) {
        out.degenerate = true;
        return Ok(out);
    }
    if b.iter().all(|x| *x == 0.0) {
        return Ok(out);
    }
    let eig = SymmetricEigen::new(cm.clone()).eigenvalues;
    let hi = eig.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let lo = eig.iter().fold(f64::INFINITY, |m, x| m.min(*x));
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond > policy.cond_limit {
        let ridge = policy.delta * cm.trace() / ni as f64;
        let ridge = if ridge > 0.0 { ridge } else { policy.delta * scale };
        for i in 0..ni {
            cm[(i, i)] += ridge;
        }
        out.regularization = ridge;
    }
    let rhs = DVector::from_column_slice(b);
    let lambda = match cm.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => cm
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidParameter("covariance matrix is singular".into()))?,
    };
    out.lambda = lambda.iter().copied().collect();
    Ok(out)
}

/// How weights are resolved across the entries of a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// One `lambda` per entry.
    Pointwise,
    /// One `lambda` from quadrature-integrated covariances.
    Global,
    /// `Global` for `K <= 15`, `Pointwise` otherwise.
    #[default]
    Auto,
}

impl WeightMode {
    pub fn resolve(self, k: usize) -> WeightMode {
        match self {
            WeightMode::Auto if k <= 15 => WeightMode::Global,
            WeightMode::Auto => WeightMode::Pointwise,
            m => m,
        }
    }
}

impl std::str::FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pointwise" => Ok(WeightMode::Pointwise),
            "global" => Ok(WeightMode::Global),
            "auto" => Ok(WeightMode::Auto),
            _ => Err(Error::InvalidParameter(format!("unknown weight mode `{s}`"))),
        }
    }
}

/// Weights actually applied by the estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightField {
    /// `lambda_i`, shared by every entry.
    Global(Vec<f64>),
    /// `lambda[j][i]` per entry `j`.
    Pointwise(Vec<Vec<f64>>),
}

impl WeightField {
    pub fn zeros(surrogates: usize) -> Self {
        WeightField::Global(vec![0.0; surrogates])
    }

    pub fn surrogates(&self) -> usize {
        match self {
            WeightField::Global(l) => l.len(),
            WeightField::Pointwise(l) => l.first().map_or(0, Vec::len),
        }
    }

    fn at(&self, j: usize) -> &[f64] {
        match self {
            WeightField::Global(l) => l,
            WeightField::Pointwise(l) => &l[j],
        }
    }

    /// Entry-averaged weights, for reporting.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            WeightField::Global(l) => l.clone(),
            WeightField::Pointwise(l) => {
                let ni = self.surrogates();
                (0..ni)
                    .map(|i| l.iter().map(|w| w[i]).sum::<f64>() / l.len().max(1) as f64)
                    .collect()
            }
        }
    }
}

/// Weights fitted from covariances together with the per-solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedWeights {
    pub mode: WeightMode,
    pub field: WeightField,
    /// One entry in global mode, one per value in pointwise mode.
    pub fits: Vec<CvWeights>,
    /// Predicted variance of a single corrected sample, per fit.
    pub predicted_variance: Vec<f64>,
}

/// Fits `lambda` from covariances; `quadrature` weights the entries in global mode.
pub fn fit_weights(
    cov: &Covariances,
    mode: WeightMode,
    quadrature: &[f64],
    policy: &RidgePolicy,
) -> Result<FittedWeights> {
    let mode = mode.resolve(cov.k);
    match mode {
        WeightMode::Global => {
            let (b, c, var) = cov.integrated(quadrature)?;
            let fit = optimal_weights(&b, &c, policy)?;
            Ok(FittedWeights {
                mode,
                field: WeightField::Global(fit.lambda.clone()),
                predicted_variance: vec![fit.predicted_variance(var)],
                fits: vec![fit],
            })
        }
        _ => {
            let fits = (0..cov.width())
                .into_par_iter()
                .map(|j| {
                    let (b, c, var) = cov.at(j);
                    optimal_weights(&b, &c, policy).map(|w| {
                        let p = w.predicted_variance(var);
                        (w, p)
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let (fits, predicted_variance): (Vec<_>, Vec<_>) = fits.into_iter().unzip();
            Ok(FittedWeights {
                mode: WeightMode::Pointwise,
                field: WeightField::Pointwise(fits.iter().map(|w| w.lambda.clone()).collect()),
                fits,
                predicted_variance,
            })
        }
    }
}

/// Control-variate mean `E[f^{L_i}]` and the number of draws behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlMean {
    pub values: Vec<f64>,
    /// Number of surrogate draws; 0 for an exact mean.
    pub l: usize,
}

/// Variance-reduced estimate and the plain Monte Carlo one it corrects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimate: Vec<f64>,
    pub mc: Vec<f64>,
    pub weights: WeightField,
    /// Sample variance of `f^H` per entry.
    pub var_mc: Vec<f64>,
    /// Sample variance of `f^H - sum_i lambda_i f^{L_i}` per entry.
    pub var_cv: Vec<f64>,
    pub k: usize,
    /// Draws behind each control-variate mean.
    pub l: Vec<usize>,
}

/// `(1/K) sum f^H_k - sum_i lambda_i ((1/K) sum f^{L_i}_k - E[f^{L_i}])`.
pub fn vrmc_estimate(
    high: &SampleSet,
    lows: &[&SampleSet],
    means: &[&ControlMean],
    weights: &WeightField,
) -> Result<EstimatorResult> {
    let k = high.len();
    if k < 1 {
        return Err(Error::InsufficientSamples { needed: 1, got: k });
    }
    check_shapes(high, lows)?;
    let ni = lows.len();
    let n = high.width();
    if means.len() != ni || weights.surrogates() != ni {
        return Err(Error::ShapeMismatch(format!(
            "{ni} surrogates, {} means, {} weights",
            means.len(),
            weights.surrogates()
        )));
    }
    if let Some(m) = means.iter().find(|m| m.values.len() != n) {
        return Err(Error::ShapeMismatch(format!(
            "control mean has {} values, samples have {n}",
            m.values.len()
        )));
    }
    if let WeightField::Pointwise(l) = weights {
        if l.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} pointwise weights for {n} values",
                l.len()
            )));
        }
    }
    let h = &high.values;
    let rows: Vec<[f64; 4]> = (0..n)
        .into_par_iter()
        .map(|j| {
            let lambda = weights.at(j);
            let mc = mean(h.iter().map(|x| x[j]), k);
            let mut est = mc;
            for i in 0..ni {
                if lambda[i] != 0.0 {
                    let ml = mean(lows[i].values.iter().map(|x| x[j]), k);
                    est -= lambda[i] * (ml - means[i].values[j]);
                }
            }
            let corrected = |s: usize| -> f64 {
                let mut v = h[s][j];
                for i in 0..ni {
                    if lambda[i] != 0.0 {
                        v -= lambda[i] * lows[i].values[s][j];
                    }
                }
                v
            };
            let mcv = mean((0..k).map(corrected), k);
            let (var_mc, var_cv) = if k > 1 {
                let d = (k - 1) as f64;
                (
                    h.iter().map(|x| (x[j] - mc).powi(2)).sum::<f64>() / d,
                    (0..k).map(|s| (corrected(s) - mcv).powi(2)).sum::<f64>() / d,
                )
            } else {
                (0.0, 0.0)
            };
            [est, mc, var_mc, var_cv]
        })
        .collect();
    Ok(EstimatorResult {
        estimate: rows.iter().map(|r| r[0]).collect(),
        mc: rows.iter().map(|r| r[1]).collect(),
        weights: weights.clone(),
        var_mc: rows.iter().map(|r| r[2]).collect(),
        var_cv: rows.iter().map(|r| r[3]).collect(),
        k,
        l: means.iter().map(|m| m.l).collect(),
    })
}

/// Plain Monte Carlo mean of a sample set.
pub fn sample_mean(set: &SampleSet) -> Vec<f64> {
    let k = set.len();
    (0..set.width())
        .map(|j| mean(set.values.iter().map(|x| x[j]), k))
        .collect()
}
