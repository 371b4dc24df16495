use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vrmc::WeightMode;

/// The dense high-fidelity run used as the exact expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceInfo {
    pub archive: String,
    pub k_ref: usize,
}

/// Estimator output at one output time. Variances are quadrature-integrated
/// over the quantity's entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeEntry {
    pub time: f64,
    /// Entry-averaged control-variate weights, one per surrogate.
    pub lambda: Vec<f64>,
    pub var_mc: f64,
    pub var_cv: f64,
    pub predicted_variance: f64,
    pub regularized: bool,
    pub degenerate: bool,
    /// L1 distance of the plain MC mean from the reference.
    pub mc_error: Option<f64>,
    /// L1 distance of the control-variate estimate from the reference.
    pub vrmc_error: Option<f64>,
    pub estimate: Vec<f64>,
    pub mc: Vec<f64>,
}

/// Everything `kuq estimate` writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateReport {
    pub high: String,
    pub lows: Vec<String>,
    pub quantity: String,
    pub mode: WeightMode,
    pub k: usize,
    /// Draws behind each surrogate mean.
    pub l: Vec<usize>,
    pub reference: Option<ReferenceInfo>,
    pub times: Vec<TimeEntry>,
}

impl EstimateReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Manifest(format!("report does not serialise: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }
}

pub fn read_report(path: &Path) -> Result<EstimateReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
}

/// File names written by [`write_tables`].
pub const TABLES: [&str; 4] = ["errors.csv", "weights.csv", "variance.csv", "expectation.csv"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Long-format CSV tables over the named reports, one file per table, in `dir`.
pub fn write_tables(reports: &[(String, EstimateReport)], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = TABLES.iter().map(|t| dir.join(t)).collect();
    let open = |p: &PathBuf| csv::Writer::from_path(p).map_err(|e| csv_error(p, e));
    let mut errors = open(&paths[0])?;
    let mut weights = open(&paths[1])?;
    let mut variance = open(&paths[2])?;
    let mut expectation = open(&paths[3])?;
    let row = |w: &mut csv::Writer<fs::File>, p: &Path, r: &[String]| w.write_record(r).map_err(|e| csv_error(p, e));
    row(&mut errors, &paths[0], &["report", "quantity", "time", "mc_l1", "vrmc_l1"].map(String::from))?;
    row(&mut weights, &paths[1], &["report", "time", "surrogate", "lambda"].map(String::from))?;
    row(
        &mut variance,
        &paths[2],
        &["report", "time", "var_mc", "var_cv", "predicted"].map(String::from),
    )?;
    row(&mut expectation, &paths[3], &["report", "time", "index", "mc", "vrmc"].map(String::from))?;
    for (name, rep) in reports {
        for e in &rep.times {
            let t = e.time.to_string();
            row(
                &mut errors,
                &paths[0],
                &[name.clone(), rep.quantity.clone(), t.clone(), opt(e.mc_error), opt(e.vrmc_error)],
            )?;
            for (i, l) in e.lambda.iter().enumerate() {
                row(&mut weights, &paths[1], &[name.clone(), t.clone(), i.to_string(), l.to_string()])?;
            }
            row(
                &mut variance,
                &paths[2],
                &[
                    name.clone(),
                    t.clone(),
                    e.var_mc.to_string(),
                    e.var_cv.to_string(),
                    e.predicted_variance.to_string(),
                ],
            )?;
            for (j, (m, v)) in e.mc.iter().zip(&e.estimate).enumerate() {
                row(
                    &mut expectation,
                    &paths[3],
                    &[name.clone(), t.clone(), j.to_string(), m.to_string(), v.to_string()],
                )?;
            }
        }
    }
    for (w, p) in [errors, weights, variance, expectation].iter_mut().zip(&paths) {
        w.flush().map_err(|e| Error::io(p, e))?;
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> EstimateReport {
        EstimateReport {
            high: "runs/vpl".into(),
            lows: vec!["runs/fp".into(), "runs/fp, calibrated".into()],
            quantity: "rho".into(),
            mode: WeightMode::Global,
            k: 5,
            l: vec![2500, 2500],
            reference: Some(ReferenceInfo {
                archive: "runs/ref".into(),
                k_ref: 100,
            }),
            times: (0..3)
                .map(|i| TimeEntry {
                    time: 0.1 * i as f64,
                    lambda: vec![0.7 + 0.1 * i as f64, 1.0 / 3.0],
                    var_mc: 1e-3,
                    var_cv: 2e-5 * i as f64,
                    predicted_variance: 1.5e-5,
                    regularized: false,
                    degenerate: i == 0,
                    mc_error: if i == 1 { None } else { Some(0.1 / 7.0) },
                    vrmc_error: Some(std::f64::consts::PI * 1e-4),
                    estimate: vec![1.0 + 1e-17, 2.0 / 3.0],
                    mc: vec![0.1, -5e-300],
                })
                .collect(),
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        let rep = sample();
        rep.write(&path).unwrap();
        assert_eq!(read_report(&path).unwrap(), rep);
        std::fs::write(&path, rep.to_json().unwrap().replace("\"k\"", "\"kk\"")).unwrap();
        assert!(read_report(&path).is_err());
    }

    fn read_csv(path: &Path) -> Vec<Vec<String>> {
        csv::Reader::from_path(path)
            .unwrap()
            .records()
            .map(|r| r.unwrap().iter().map(String::from).collect())
            .collect()
    }

    #[test]
    fn csv_tables_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let rep = sample();
        let paths = write_tables(&[("a,b".into(), rep.clone())], dir.path()).unwrap();
        let errors = read_csv(&paths[0]);
        assert_eq!(errors.len(), 3);
        assert_eq!(errors[0][0], "a,b");
        assert_eq!(errors[1][3], "");
        assert_eq!(errors[2][3].parse::<f64>().unwrap(), 0.1 / 7.0);
        let weights = read_csv(&paths[1]);
        assert_eq!(weights.len(), 6);
        assert_eq!(weights[1][3].parse::<f64>().unwrap(), 1.0 / 3.0);
        let expectation = read_csv(&paths[3]);
        for (r, row) in expectation.iter().enumerate() {
            let e = &rep.times[r / 2];
            let j: usize = row[2].parse().unwrap();
            assert_eq!(row[3].parse::<f64>().unwrap().to_bits(), e.mc[j].to_bits());
            assert_eq!(row[4].parse::<f64>().unwrap().to_bits(), e.estimate[j].to_bits());
        }
        let variance = read_csv(&paths[2]);
        assert_eq!(variance[2][3].parse::<f64>().unwrap(), 4e-5);
    }

    #[test]
    fn tables_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let reps = [("x".to_string(), sample()), ("y".to_string(), sample())];
        let a = write_tables(&reps, &dir.path().join("a")).unwrap();
        let b = write_tables(&reps, &dir.path().join("b")).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(p).unwrap(), std::fs::read(q).unwrap());
        }
    }
}
