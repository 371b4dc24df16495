//! On-disk sample archives: a directory holding `manifest.json`, one binary
//! payload per sample (`sample_<k>.bin`) and optionally `mean.bin`.

mod payload;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array2, ArrayD, Ix2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fields::RandomSpace;
use crate::models::GridSpec;
use crate::vrmc::{check_pairing, ControlMean, SampleSet};

pub use payload::{decode, encode, HEADER_LEN, MAGIC, MAX_RANK};

pub const MANIFEST: &str = "manifest.json";
pub const MEAN_FILE: &str = "mean.bin";
pub const FORMAT: &str = "KUQ1";

/// A named block of columns inside each sample row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantitySpec {
    pub name: String,
    pub offset: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub index: usize,
    pub file: String,
    pub z: Vec<f64>,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanRecord {
    pub file: String,
    /// Number of draws averaged.
    pub l: usize,
    /// Seed of those draws.
    pub seed: u64,
    pub sha256: String,
}

/// Archive metadata. Every sample payload is a `[times, width]` array whose
/// columns are split into `quantities`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format: String,
    pub producer: String,
    pub model: String,
    pub ic: String,
    pub grid: GridSpec,
    pub epsilon: f64,
    pub mu: f64,
    pub random_space: RandomSpace,
    pub seed: u64,
    pub output_times: Vec<f64>,
    pub width: usize,
    pub quantities: Vec<QuantitySpec>,
    /// Full producer configuration with defaults filled in.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
    #[serde(default)]
    pub samples: Vec<SampleRecord>,
    #[serde(default)]
    pub mean: Option<MeanRecord>,
}

impl Manifest {
    /// Metadata for an archive with no samples yet. Quantities are laid out
    /// back to back in the given order.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: impl Into<String>,
        ic: impl Into<String>,
        grid: GridSpec,
        epsilon: f64,
        mu: f64,
        random_space: RandomSpace,
        output_times: Vec<f64>,
        quantities: &[(&str, usize)],
    ) -> Self {
        let mut offset = 0;
        let quantities = quantities
            .iter()
            .map(|(name, len)| {
                let q = QuantitySpec {
                    name: name.to_string(),
                    offset,
                    len: *len,
                };
                offset += len;
                q
            })
            .collect();
        Self {
            format: FORMAT.into(),
            producer: format!("kuq {}", env!("CARGO_PKG_VERSION")),
            model: model.into(),
            ic: ic.into(),
            grid,
            epsilon,
            mu,
            seed: random_space.seed,
            random_space,
            output_times,
            width: offset,
            quantities,
            config: None,
            samples: Vec::new(),
            mean: None,
        }
    }

    pub fn quantity(&self, name: &str) -> Result<&QuantitySpec> {
        self.quantities.iter().find(|q| q.name == name).ok_or_else(|| {
            Error::Manifest(format!(
                "no quantity `{name}` (have {:?})",
                self.quantities.iter().map(|q| &q.name).collect::<Vec<_>>()
            ))
        })
    }

    pub fn time_index(&self, t: f64) -> Result<usize> {
        self.output_times
            .iter()
            .position(|s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .ok_or_else(|| Error::Manifest(format!("no output time {t}")))
    }

    pub fn z(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.z.clone()).collect()
    }

    fn check_layout(&self) -> Result<()> {
        if self.format != FORMAT {
            return Err(Error::Manifest(format!("unsupported format `{}`", self.format)));
        }
        if self.output_times.is_empty() {
            return Err(Error::Manifest("no output times".into()));
        }
        for q in &self.quantities {
            if q.len == 0 || q.offset + q.len > self.width {
                return Err(Error::Manifest(format!(
                    "quantity `{}` [{}, {}) outside width {}",
                    q.name,
                    q.offset,
                    q.offset + q.len,
                    self.width
                )));
            }
        }
        for (k, s) in self.samples.iter().enumerate() {
            if s.index != k {
                return Err(Error::Manifest(format!("sample {k} recorded with index {}", s.index)));
            }
        }
        Ok(())
    }

    fn shape(&self) -> [usize; 2] {
        [self.output_times.len(), self.width]
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_payload(path: &Path, array: &Array2<f64>) -> Result<String> {
    let bytes = encode(&array.clone().into_dyn())?;
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(hex_digest(&bytes))
}

fn read_payload(path: &Path, sha256: &str, shape: [usize; 2]) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if hex_digest(&bytes) != sha256 {
        return Err(Error::ChecksumMismatch {
            path: path.to_path_buf(),
        });
    }
    let array: ArrayD<f64> = decode(&bytes, path)?;
    if array.shape() != shape {
        return Err(Error::MalformedPayload {
            path: path.to_path_buf(),
            reason: format!("shape {:?}, manifest says {shape:?}", array.shape()),
        });
    }
    array
        .into_dimensionality::<Ix2>()
        .map_err(|e| Error::MalformedPayload {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Builds an archive; nothing is readable until [`ArchiveWriter::finish`]
/// writes the manifest.
pub struct ArchiveWriter {
    root: PathBuf,
    manifest: Manifest,
    samples: BTreeMap<usize, SampleRecord>,
}

impl ArchiveWriter {
    /// Creates `root` (if needed) and removes any stale manifest in it.
    pub fn create(root: impl Into<PathBuf>, manifest: Manifest) -> Result<Self> {
        let root = root.into();
        manifest.check_layout()?;
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        let stale = root.join(MANIFEST);
        if stale.exists() {
            fs::remove_file(&stale).map_err(|e| Error::io(&stale, e))?;
        }
        Ok(Self {
            root,
            manifest: Manifest {
                samples: Vec::new(),
                mean: None,
                ..manifest
            },
            samples: BTreeMap::new(),
        })
    }

    fn check_shape(&self, data: &Array2<f64>) -> Result<()> {
        if data.shape() != self.manifest.shape() {
            return Err(Error::ShapeMismatch(format!(
                "sample is {:?}, archive expects {:?}",
                data.shape(),
                self.manifest.shape()
            )));
        }
        Ok(())
    }

    /// Writes `sample_<index>.bin`; `data` is `[times, width]`.
    pub fn write_sample(&mut self, index: usize, z: &[f64], data: &Array2<f64>) -> Result<()> {
        self.check_shape(data)?;
        if z.len() != self.manifest.random_space.dims() {
            return Err(Error::ShapeMismatch(format!(
                "z has {} entries, random space has {}",
                z.len(),
                self.manifest.random_space.dims()
            )));
        }
        let file = format!("sample_{index}.bin");
        let sha256 = write_payload(&self.root.join(&file), data)?;
        self.samples.insert(
            index,
            SampleRecord {
                index,
                file,
                z: z.to_vec(),
                sha256,
            },
        );
        Ok(())
    }

    /// Writes `mean.bin`, the average over `l` draws made with `seed`.
    pub fn write_mean(&mut self, data: &Array2<f64>, l: usize, seed: u64) -> Result<()> {
        self.check_shape(data)?;
        let sha256 = write_payload(&self.root.join(MEAN_FILE), data)?;
        self.manifest.mean = Some(MeanRecord {
            file: MEAN_FILE.into(),
            l,
            seed,
            sha256,
        });
        Ok(())
    }

    /// Writes the manifest (the commit point) and reopens the archive.
    pub fn finish(mut self) -> Result<SampleArchive> {
        if let Some((k, _)) = self.samples.iter().enumerate().find(|(k, (i, _))| k != *i) {
            return Err(Error::Manifest(format!("sample {k} was never written")));
        }
        self.manifest.samples = self.samples.into_values().collect();
        let text = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| Error::Manifest(e.to_string()))?;
        let tmp = self.root.join(format!("{MANIFEST}.tmp"));
        let path = self.root.join(MANIFEST);
        fs::write(&tmp, text + "\n").map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
        SampleArchive::open(&self.root)
    }
}

/// A committed archive opened for reading.
#[derive(Debug, Clone)]
pub struct SampleArchive {
    root: PathBuf,
    pub manifest: Manifest,
}

impl SampleArchive {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let path = root.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        manifest.check_layout()?;
        Ok(Self { root, manifest })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.manifest.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.manifest.samples.is_empty()
    }

    /// `(z, [times, width] data)` of sample `k`, checksum-verified.
    pub fn read_sample(&self, k: usize) -> Result<(Vec<f64>, Array2<f64>)> {
        let rec = self
            .manifest
            .samples
            .get(k)
            .ok_or_else(|| Error::Manifest(format!("no sample {k} (archive has {})", self.len())))?;
        let data = read_payload(&self.root.join(&rec.file), &rec.sha256, self.manifest.shape())?;
        Ok((rec.z.clone(), data))
    }

    /// The control-variate mean and its draw count.
    pub fn read_mean(&self) -> Result<(Array2<f64>, usize)> {
        let rec = self
            .manifest
            .mean
            .as_ref()
            .ok_or_else(|| Error::Manifest(format!("{} has no mean record", self.root.display())))?;
        let data = read_payload(&self.root.join(&rec.file), &rec.sha256, self.manifest.shape())?;
        Ok((data, rec.l))
    }

    /// Checks every payload's checksum and shape and every draw's range.
    pub fn validate(&self) -> Result<()> {
        for k in 0..self.len() {
            let (z, _) = self.read_sample(k)?;
            if !self.manifest.random_space.contains(&z) {
                return Err(Error::Manifest(format!("sample {k}: z = {z:?} outside the random space")));
            }
        }
        if self.manifest.mean.is_some() {
            self.read_mean()?;
        }
        Ok(())
    }

    /// Same draws in the same order, and the same time/quantity layout.
    pub fn check_pairing(&self, other: &SampleArchive) -> Result<()> {
        check_pairing(&self.manifest.z(), &other.manifest.z())?;
        if self.manifest.output_times != other.manifest.output_times {
            return Err(Error::Manifest(format!(
                "output times differ between {} and {}",
                self.root.display(),
                other.root.display()
            )));
        }
        Ok(())
    }

    fn columns(&self, quantity: &str, time: usize) -> Result<(usize, std::ops::Range<usize>)> {
        let q = self.manifest.quantity(quantity)?;
        if time >= self.manifest.output_times.len() {
            return Err(Error::Manifest(format!("time index {time} out of range")));
        }
        Ok((time, q.offset..q.offset + q.len))
    }

    /// One quantity at one output time across all samples.
    pub fn sample_set(&self, quantity: &str, time: usize) -> Result<SampleSet> {
        let (t, cols) = self.columns(quantity, time)?;
        let mut z = Vec::with_capacity(self.len());
        let mut values = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let (zk, data) = self.read_sample(k)?;
            z.push(zk);
            values.push(data.row(t).as_slice().expect("row-major")[cols.clone()].to_vec());
        }
        SampleSet::new(z, values)
    }

    /// Every quantity at every time: `out[t][k]` is sample `k`'s row at time `t`.
    pub fn all_rows(&self) -> Result<Vec<SampleSet>> {
        let n = self.manifest.output_times.len();
        let mut z = Vec::with_capacity(self.len());
        let mut rows: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(self.len()); n];
        for k in 0..self.len() {
            let (zk, data) = self.read_sample(k)?;
            z.push(zk);
            for (t, row) in data.rows().into_iter().enumerate() {
                rows[t].push(row.to_vec());
            }
        }
        rows.into_iter().map(|r| SampleSet::new(z.clone(), r)).collect()
    }

    /// The mean record restricted to one quantity at one output time.
    pub fn control_mean(&self, quantity: &str, time: usize) -> Result<ControlMean> {
        let (t, cols) = self.columns(quantity, time)?;
        let (data, l) = self.read_mean()?;
        Ok(ControlMean {
            values: data.row(t).as_slice().expect("row-major")[cols].to_vec(),
            l,
        })
    }
}

/// Opens and fully validates the archive at `root`.
pub fn validate_archive(root: impl Into<PathBuf>) -> Result<SampleArchive> {
    let archive = SampleArchive::open(root)?;
    archive.validate()?;
    Ok(archive)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn manifest(seed: u64) -> Manifest {
        let space = RandomSpace::new(vec![[-1.0, 1.0], [0.0, 1.0]], seed).unwrap();
        Manifest::new(
            "hom-fp",
            "two_bubble",
            GridSpec::default(),
            1.0,
            1.0,
            space,
            vec![0.0, 0.5, 1.0],
            &[("rho", 2), ("zeta", 1)],
        )
    }

    fn build(dir: &Path, seed: u64, k: usize) -> SampleArchive {
        let m = manifest(seed);
        let z = m.random_space.draw(k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 99);
        let mut w = ArchiveWriter::create(dir, m).unwrap();
        let mut sum = Array2::zeros((3, 3));
        for (i, zi) in z.iter().enumerate() {
            let data = Array2::from_shape_fn((3, 3), |_| rng.random::<f64>() * 2.0 - 1.0);
            sum += &data;
            w.write_sample(i, zi, &data).unwrap();
        }
        w.write_mean(&(sum / k as f64), k, seed).unwrap();
        w.finish().unwrap()
    }

    #[test]
    fn round_trip_and_views() {
        let dir = tempfile::tempdir().unwrap();
        let a = build(dir.path(), 7, 4);
        a.validate().unwrap();
        assert_eq!(a.len(), 4);
        let (z, data) = a.read_sample(2).unwrap();
        assert_eq!(z, a.manifest.random_space.draw(4)[2]);
        let rho = a.sample_set("rho", 1).unwrap();
        assert_eq!(rho.values[2], data.row(1).to_vec()[..2].to_vec());
        let zeta = a.sample_set("zeta", 2).unwrap();
        assert_eq!(zeta.values[2], vec![data[[2, 2]]]);
        let rows = a.all_rows().unwrap();
        assert_eq!(rows[1].values[2], data.row(1).to_vec());
        let mean = a.control_mean("rho", 0).unwrap();
        assert_eq!(mean.l, 4);
        assert!(a.sample_set("u", 0).is_err());
        assert!(a.sample_set("rho", 3).is_err());
        assert_eq!(a.manifest.time_index(0.5).unwrap(), 1);
    }

    #[test]
    fn corrupted_byte_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let a = build(dir.path(), 7, 3);
        let path = dir.path().join("sample_1.bin");
        let mut bytes = fs::read(&path).unwrap();
        bytes[40] ^= 0x01;
        fs::write(&path, bytes).unwrap();
        assert!(matches!(a.read_sample(1), Err(Error::ChecksumMismatch { .. })));
        assert!(matches!(validate_archive(dir.path()), Err(Error::ChecksumMismatch { .. })));
        a.read_sample(0).unwrap();
    }

    #[test]
    fn pairing_follows_the_seed() {
        let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
        let a = build(dirs[0].path(), 7, 5);
        let b = build(dirs[1].path(), 7, 5);
        let c = build(dirs[2].path(), 8, 5);
        a.check_pairing(&b).unwrap();
        b.check_pairing(&a).unwrap();
        assert!(matches!(a.check_pairing(&c), Err(Error::PairingMismatch { index: 0 })));
        assert!(matches!(c.check_pairing(&a), Err(Error::PairingMismatch { index: 0 })));
    }

    #[test]
    fn manifest_is_the_commit_point() {
        let dir = tempfile::tempdir().unwrap();
        build(dir.path(), 1, 2);
        let mut w = ArchiveWriter::create(dir.path(), manifest(1)).unwrap();
        assert!(SampleArchive::open(dir.path()).is_err());
        w.write_sample(1, &[0.0, 0.5], &Array2::zeros((3, 3))).unwrap();
        assert!(w.finish().is_err());
        let mut w = ArchiveWriter::create(dir.path(), manifest(1)).unwrap();
        assert!(w.write_sample(0, &[0.0, 0.5], &Array2::zeros((2, 3))).is_err());
        assert!(w.write_sample(0, &[0.0], &Array2::zeros((3, 3))).is_err());
    }

    #[test]
    fn manifest_rejects_unknown_keys_and_bad_layout() {
        let m = manifest(3);
        let mut v = serde_json::to_value(&m).unwrap();
        v["surprise"] = serde_json::json!(1);
        assert!(serde_json::from_value::<Manifest>(v).is_err());
        let mut bad = manifest(3);
        bad.quantities[1].len = 5;
        let dir = tempfile::tempdir().unwrap();
        assert!(ArchiveWriter::create(dir.path(), bad).is_err());
    }

    #[test]
    fn out_of_range_draw_fails_validation() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArchiveWriter::create(dir.path(), manifest(2)).unwrap();
        w.write_sample(0, &[3.0, 0.5], &Array2::zeros((3, 3))).unwrap();
        let a = w.finish().unwrap();
        assert!(a.validate().is_err());
    }
}
