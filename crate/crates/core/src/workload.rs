//! Task generation: a seeded synthetic image workload with a reference
//! classifier, plus ingestion of user-supplied graymap directories.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    derive_seed, ClassId, ConfigError, DomainError, GrayImage, InputData, OutputData,
    PreprocessedInput, SimTime, TaskType,
};
use crate::reuse::{Processor, ReuseError};
use crate::similarity::{dot, preprocess, resize_bilinear, SimilarityError};

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("invalid workload: {0}")]
    InvalidSpec(#[from] ConfigError),
    #[error("cannot read {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },
    #[error("no images found under {0}")]
    EmptyDirectory(PathBuf),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Arrival {
    /// Every task is queued at time zero.
    Batch,
    /// Exponential inter-arrival times with the given per-satellite rate.
    Poisson { rate_hz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub total_tasks: usize,
    /// Combined input size of all tasks; each task carries an equal share.
    pub total_mb: f64,
    pub num_classes: usize,
    pub image_width: usize,
    pub image_height: usize,
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise_sigma: f64,
    /// Side of the coarse random lattice each prototype is upsampled from.
    pub prototype_cells: usize,
    /// Strength of the pull toward each class's home region on the grid;
    /// 0 spreads classes uniformly.
    pub locality: f64,
    pub task_types: u32,
    pub result_mb: f64,
    pub arrival: Arrival,
    /// Workload seed; falls back to the scenario seed.
    pub seed: Option<u64>,
    /// Load images from this directory instead of generating them.
    pub dataset_dir: Option<PathBuf>,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            total_tasks: 625,
            total_mb: 12817.0,
            num_classes: 21,
            image_width: 256,
            image_height: 256,
            noise_sigma: 0.02,
            prototype_cells: 8,
            locality: 25.0,
            task_types: 1,
            result_mb: 0.01,
            arrival: Arrival::Batch,
            seed: None,
            dataset_dir: None,
        }
    }
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: format!("workload.{field}"),
        reason: reason.into(),
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.total_tasks == 0 {
            return Err(invalid("total_tasks", "must be positive"));
        }
        if !(self.total_mb > 0.0 && self.total_mb.is_finite()) {
            return Err(invalid("total_mb", "must be positive"));
        }
        if self.num_classes == 0 {
            return Err(invalid("num_classes", "must be positive"));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(invalid("image_width", "dimensions must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma", "must be non-negative"));
        }
        if self.prototype_cells == 0 {
            return Err(invalid("prototype_cells", "must be positive"));
        }
        if !(self.locality >= 0.0 && self.locality.is_finite()) {
            return Err(invalid("locality", "must be non-negative"));
        }
        if self.task_types == 0 {
            return Err(invalid("task_types", "must be positive"));
        }
        if !(self.result_mb > 0.0 && self.result_mb.is_finite()) {
            return Err(invalid("result_mb", "must be positive"));
        }
        if let Arrival::Poisson { rate_hz } = self.arrival {
            if !(rate_hz > 0.0 && rate_hz.is_finite()) {
                return Err(invalid("arrival", "Poisson rate must be positive"));
            }
        }
        Ok(())
    }

    pub fn task_mb(&self) -> f64 {
        self.total_mb / self.total_tasks as f64
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    /// Global index in generation order.
    pub id: usize,
    pub input: InputData,
    pub task_type: TaskType,
    pub arrival: SimTime,
}

impl Task {
    pub fn class(&self) -> ClassId {
        self.input.ground_truth()
    }
}

/// Reference classifier: nearest class prototype by cosine.
#[derive(Debug, Clone)]
pub struct OracleProcessor {
    prototypes: Vec<Arc<PreprocessedInput>>,
    dims: (usize, usize),
    result_mb: f64,
}

impl OracleProcessor {
    pub fn new(
        prototypes: &[GrayImage],
        dims: (usize, usize),
        result_mb: f64,
    ) -> Result<Self, WorkloadError> {
        let prototypes = prototypes
            .iter()
            .map(|img| {
                let d = InputData::new(1.0, img.clone(), 0)?;
                Ok(Arc::new(preprocess(&d, dims)?))
            })
            .collect::<Result<_, WorkloadError>>()?;
        Ok(Self {
            prototypes,
            dims,
            result_mb,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.prototypes.len()
    }

    pub fn classify(&self, d: &InputData) -> Result<ClassId, SimilarityError> {
        let v = preprocess(d, self.dims)?;
        let mut best = (0, f64::NEG_INFINITY);
        for (k, proto) in self.prototypes.iter().enumerate() {
            let s = dot(v.unit(), proto.unit());
            if s > best.1 {
                best = (k, s);
            }
        }
        Ok(best.0 as ClassId)
    }
}

impl Processor for OracleProcessor {
    fn process(&self, d: &InputData, _: TaskType) -> Result<OutputData, ReuseError> {
        let label = self.classify(d)?;
        OutputData::new(label, self.result_mb).map_err(|e| ReuseError::TaskFailed(e.to_string()))
    }
}

/// Tasks dealt to satellites plus the matching reference classifier.
#[derive(Debug, Clone)]
pub struct Workload {
    /// Per satellite (row-major), in arrival order.
    pub per_satellite: Vec<Vec<Task>>,
    pub oracle: Arc<OracleProcessor>,
    pub prototypes: Vec<GrayImage>,
}

impl Workload {
    pub fn total_tasks(&self) -> usize {
        self.per_satellite.iter().map(Vec::len).sum()
    }

    /// Distinct classes per satellite.
    pub fn classes_per_satellite(&self) -> Vec<usize> {
        self.per_satellite
            .iter()
            .map(|tasks| {
                let mut c: Vec<ClassId> = tasks.iter().map(Task::class).collect();
                c.sort_unstable();
                c.dedup();
                c.len()
            })
            .collect()
    }
}

/// Smooth random field: a coarse uniform lattice bilinearly upsampled.
pub fn prototype(cells: usize, width: usize, height: usize, rng: &mut impl Rng) -> GrayImage {
    let side = cells + 1;
    let lattice: Vec<f32> = (0..side * side).map(|_| rng.gen::<f32>()).collect();
    let coarse = GrayImage::new(side, side, lattice).expect("lattice values lie in [0, 1)");
    let fine = resize_bilinear(&coarse, width, height);
    GrayImage::new(width, height, fine.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect())
        .expect("bilinear interpolation stays in range")
}

/// Per-task class sequence with exact class balance and optional spatial
/// clustering of classes on the `n x n` grid.
pub fn assign_classes(spec: &WorkloadSpec, n: usize, rng: &mut impl Rng) -> Vec<ClassId> {
    let k = spec.num_classes;
    let sats = n * n;
    let mut remaining: Vec<usize> = (0..k)
        .map(|c| spec.total_tasks / k + usize::from(c < spec.total_tasks % k))
        .collect();
    let centers: Vec<(f64, f64)> = (0..k)
        .map(|_| (rng.gen_range(0.0..n as f64), rng.gen_range(0.0..n as f64)))
        .collect();
    let affinity: Vec<Vec<f64>> = (0..sats)
        .map(|s| {
            let (r, c) = ((s / n) as f64 + 0.5, (s % n) as f64 + 0.5);
            centers
                .iter()
                .map(|(cr, cc)| {
                    let d2 = ((r - cr).powi(2) + (c - cc).powi(2)) / (n * n) as f64;
                    (-spec.locality * d2).exp()
                })
                .collect()
        })
        .collect();
    (0..spec.total_tasks)
        .map(|i| {
            let aff = &affinity[i % sats];
            let weights: Vec<f64> = remaining.iter().zip(aff).map(|(&r, a)| r as f64 * a).collect();
            let total: f64 = weights.iter().sum();
            let class = if total > 0.0 {
                let mut x = rng.gen::<f64>() * total;
                let mut pick = None;
                for (c, w) in weights.iter().enumerate() {
                    if *w > 0.0 {
                        pick = Some(c);
                        if x < *w {
                            break;
                        }
                        x -= w;
                    }
                }
                pick.expect("some class has weight")
            } else {
                // every remaining class is too far away to register; fall back to counts
                remaining.iter().position(|&r| r > 0).expect("tasks remain")
            };
            remaining[class] -= 1;
            class as ClassId
        })
        .collect()
}

fn arrivals(spec: &WorkloadSpec, count: usize, rng: &mut impl Rng) -> Vec<SimTime> {
    match spec.arrival {
        Arrival::Batch => vec![0.0; count],
        Arrival::Poisson { rate_hz } => {
            let exp = Exp::new(rate_hz).expect("rate validated positive");
            let mut t = 0.0;
            (0..count)
                .map(|_| {
                    t += exp.sample(rng);
                    t
                })
                .collect()
        }
    }
}

/// Deals `inputs` round-robin over `sats` satellites and stamps arrivals.
fn deal(
    spec: &WorkloadSpec,
    inputs: Vec<InputData>,
    sats: usize,
    seed: u64,
) -> Vec<Vec<Task>> {
    let mut per_satellite: Vec<Vec<Task>> = vec![Vec::new(); sats];
    for (id, input) in inputs.into_iter().enumerate() {
        let task_type = TaskType((id as u64 % u64::from(spec.task_types)) as u32);
        per_satellite[id % sats].push(Task {
            id,
            input,
            task_type,
            arrival: 0.0,
        });
    }
    for (s, tasks) in per_satellite.iter_mut().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[3, s as u64]));
        let times = arrivals(spec, tasks.len(), &mut rng);
        for (task, t) in tasks.iter_mut().zip(times) {
            task.arrival = t;
        }
    }
    per_satellite
}

/// Generates the synthetic workload for an `n x n` grid.
pub fn generate(
    spec: &WorkloadSpec,
    n: usize,
    seed: u64,
    preprocess_dims: (usize, usize),
) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    let mut proto_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let prototypes: Vec<GrayImage> = (0..spec.num_classes)
        .map(|_| prototype(spec.prototype_cells, spec.image_width, spec.image_height, &mut proto_rng))
        .collect();
    let mut class_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let classes = assign_classes(spec, n, &mut class_rng);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
    let task_mb = spec.task_mb();
    let inputs = classes
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[2, i as u64]));
            let base = prototypes[class as usize].pixels();
            let pixels = if spec.noise_sigma == 0.0 {
                base.to_vec()
            } else {
                base.iter()
                    .map(|&v| (f64::from(v) + noise.sample(&mut rng)).clamp(0.0, 1.0) as f32)
                    .collect()
            };
            let img = GrayImage::new(spec.image_width, spec.image_height, pixels)?;
            Ok(InputData::new(task_mb, img, class)?)
        })
        .collect::<Result<Vec<_>, WorkloadError>>()?;
    let oracle = OracleProcessor::new(&prototypes, preprocess_dims, spec.result_mb)?;
    Ok(Workload {
        per_satellite: deal(spec, inputs, n * n, seed),
        oracle: Arc::new(oracle),
        prototypes,
    })
}

fn read_pgm(path: &Path, width: usize, height: usize) -> Result<GrayImage, WorkloadError> {
    let unreadable = |reason: String| WorkloadError::UnreadableFile {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path).map_err(|e| unreadable(e.to_string()))?;
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Pnm)
        .map_err(|e| unreadable(e.to_string()))?
        .into_luma16();
    let (w, h) = decoded.dimensions();
    let pixels = decoded.into_raw().into_iter().map(|v| f32::from(v) / 65535.0).collect();
    let raw = GrayImage::new(w as usize, h as usize, pixels).map_err(|e| unreadable(e.to_string()))?;
    if raw.dims() == (width, height) {
        return Ok(raw);
    }
    let resized = resize_bilinear(&raw, width, height);
    Ok(GrayImage::new(width, height, resized.into_iter().map(|v| v.clamp(0.0, 1.0) as f32).collect())?)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, WorkloadError> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| WorkloadError::UnreadableFile {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| WorkloadError::UnreadableFile {
            path: dir.to_path_buf(),
            reason: e.to_string(),
        })?;
    entries.sort();
    Ok(entries)
}

/// Loads `root/<class>/<image>.pgm`, one class per subdirectory in name order.
/// The reference classifier uses the per-class mean image as its prototype.
pub fn ingest_directory(
    root: &Path,
    spec: &WorkloadSpec,
    n: usize,
    seed: u64,
    preprocess_dims: (usize, usize),
) -> Result<Workload, WorkloadError> {
    spec.validate()?;
    let (w, h) = (spec.image_width, spec.image_height);
    let mut labelled: Vec<(ClassId, GrayImage)> = Vec::new();
    let mut prototypes = Vec::new();
    for class_dir in sorted_entries(root)?.into_iter().filter(|p| p.is_dir()) {
        let class = prototypes.len() as ClassId;
        let mut sum = vec![0.0f64; w * h];
        let mut count = 0usize;
        for file in sorted_entries(&class_dir)?.into_iter().filter(|p| p.is_file()) {
            let img = read_pgm(&file, w, h)?;
            sum.iter_mut().zip(img.pixels()).for_each(|(s, &p)| *s += f64::from(p));
            count += 1;
            labelled.push((class, img));
        }
        if count > 0 {
            let mean = sum.into_iter().map(|s| (s / count as f64) as f32).collect();
            prototypes.push(GrayImage::new(w, h, mean)?);
        }
    }
    if labelled.is_empty() {
        return Err(WorkloadError::EmptyDirectory(root.to_path_buf()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[4]));
    labelled.shuffle(&mut rng);
    let task_mb = spec.total_mb / labelled.len() as f64;
    let inputs = labelled
        .into_iter()
        .map(|(class, img)| Ok(InputData::new(task_mb, img, class)?))
        .collect::<Result<Vec<_>, WorkloadError>>()?;
    let oracle = OracleProcessor::new(&prototypes, preprocess_dims, spec.result_mb)?;
    Ok(Workload {
        per_satellite: deal(spec, inputs, n * n, seed),
        oracle: Arc::new(oracle),
        prototypes,
    })
}
