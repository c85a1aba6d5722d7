//! Value types shared by every other module, plus scenario configuration and
//! its validation.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ChannelParams, TransferPricing};
use crate::workload::WorkloadSpec;

/// Simulation time in seconds.
pub type SimTime = f64;

/// Identifier of a processing service (land-use classification, etc.).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TaskType(pub u32);

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "type{}", self.0)
    }
}

/// Class identifier produced by a processor (the "result" of a task).
pub type ClassId = u32;

/// Identifier of a record inside one satellite's reuse table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RecordId(pub u64);

impl fmt::Display for RecordId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Row-major luminance raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f32>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f32>) -> Result<Self, DomainError> {
        if width == 0 || height == 0 {
            return Err(DomainError::EmptyImage);
        }
        if pixels.len() != width * height {
            return Err(DomainError::PixelCount {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        if let Some(bad) = pixels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(DomainError::PixelRange(f64::from(*bad)));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Result<Self, DomainError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.pixels[y * self.width + x]
    }
}

/// Input data `D_t` of a subtask.
///
/// The ground-truth class is carried for the workload oracle and the metrics
/// code only. The reuse and collaboration paths never look at it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputData {
    raw_mb: f64,
    image: Arc<GrayImage>,
    ground_truth: ClassId,
}

impl InputData {
    pub fn new(raw_mb: f64, image: GrayImage, ground_truth: ClassId) -> Result<Self, DomainError> {
        if !(raw_mb > 0.0 && raw_mb.is_finite()) {
            return Err(DomainError::NonPositiveSize(raw_mb));
        }
        Ok(Self {
            raw_mb,
            image: Arc::new(image),
            ground_truth,
        })
    }

    pub fn raw_mb(&self) -> f64 {
        self.raw_mb
    }

    pub fn image(&self) -> &GrayImage {
        &self.image
    }

    pub(crate) fn ground_truth(&self) -> ClassId {
        self.ground_truth
    }
}

/// Preprocessed input `PD_t`.
///
/// `unit` is the resized raster flattened row-major and scaled to unit
/// Euclidean norm (used for hashing and cosine scoring). `grid` is the same
/// raster before scaling, which is what SSIM reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedInput {
    pub(crate) unit: Vec<f64>,
    pub(crate) grid: Vec<f64>,
    pub(crate) dims: (usize, usize),
}

impl PreprocessedInput {
    pub fn unit(&self) -> &[f64] {
        &self.unit
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.unit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit.is_empty()
    }
}

/// Output data `R_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputData {
    pub label: ClassId,
    pub result_mb: f64,
}

impl OutputData {
    pub fn new(label: ClassId, result_mb: f64) -> Result<Self, DomainError> {
        if !(result_mb > 0.0 && result_mb.is_finite()) {
            return Err(DomainError::NonPositiveSize(result_mb));
        }
        Ok(Self { label, result_mb })
    }
}

/// One reuse-table entry: input, task type, output and reuse count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReuseRecord {
    pub input: InputData,
    pub preprocessed: Arc<PreprocessedInput>,
    pub task_type: TaskType,
    pub output: OutputData,
    pub reuse_count: u64,
    pub inserted_at: SimTime,
}

impl ReuseRecord {
    /// Storage footprint: input plus result size.
    pub fn size_mb(&self) -> f64 {
        self.input.raw_mb() + self.output.result_mb
    }
}

/// Satellite position: `row` is the orbit index, `col` the position in orbit.
///
/// Ordering is row-major, which is the tie-break order used throughout.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct GridPosition {
    pub row: usize,
    pub col: usize,
}

impl GridPosition {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn checked(row: usize, col: usize, n: usize) -> Result<Self, DomainError> {
        if row >= n || col >= n {
            return Err(DomainError::OutOfGrid { row, col, n });
        }
        Ok(Self { row, col })
    }

    pub fn index(&self, n: usize) -> usize {
        self.row * n + self.col
    }

    pub fn from_index(index: usize, n: usize) -> Self {
        Self {
            row: index / n,
            col: index % n,
        }
    }

    /// Chebyshev (king-move) distance, optionally wrapping on an `n`-torus.
    pub fn chebyshev(&self, other: &GridPosition, n: usize, torus: bool) -> usize {
        let dr = axis_delta(self.row, other.row, n, torus);
        let dc = axis_delta(self.col, other.col, n, torus);
        dr.max(dc)
    }
}

impl fmt::Display for GridPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

pub(crate) fn axis_delta(a: usize, b: usize, n: usize, torus: bool) -> usize {
    let d = a.abs_diff(b);
    if torus {
        d.min(n - d)
    } else {
        d
    }
}

/// The five evaluation scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Every subtask computed from scratch.
    WithoutCr,
    /// Global max-SRS source, whole-grid broadcast.
    SrsPriority,
    /// Local reuse only.
    Slcr,
    /// Collaboration without area expansion.
    SccrInit,
    /// Collaboration with one expansion step.
    Sccr,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::WithoutCr,
        ScenarioKind::SrsPriority,
        ScenarioKind::Slcr,
        ScenarioKind::SccrInit,
        ScenarioKind::Sccr,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::WithoutCr => "without_cr",
            ScenarioKind::SrsPriority => "srs_priority",
            ScenarioKind::Slcr => "slcr",
            ScenarioKind::SccrInit => "sccr_init",
            ScenarioKind::Sccr => "sccr",
        }
    }

    pub fn uses_reuse(&self) -> bool {
        !matches!(self, ScenarioKind::WithoutCr)
    }

    pub fn collaborates(&self) -> bool {
        matches!(
            self,
            ScenarioKind::SrsPriority | ScenarioKind::SccrInit | ScenarioKind::Sccr
        )
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '/', ' '], "_");
        match key.as_str() {
            "without_cr" | "w_o_cr" | "wocr" | "none" => Ok(ScenarioKind::WithoutCr),
            "srs_priority" => Ok(ScenarioKind::SrsPriority),
            "slcr" => Ok(ScenarioKind::Slcr),
            "sccr_init" => Ok(ScenarioKind::SccrInit),
            "sccr" => Ok(ScenarioKind::Sccr),
            _ => Err(DomainError::UnknownScenario(s.to_string())),
        }
    }
}

/// How the CPU-occupancy term of the reuse status is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OccupancyModel {
    /// Busy seconds over wall-clock seconds since the satellite started.
    WallClock,
    /// Busy seconds over the from-scratch compute demand of the subtasks
    /// processed so far.
    Demand,
    /// Like `Demand`, restricted to the last `len` subtasks.
    Window { len: usize },
}

/// How receiving a record batch delays a satellite's next subtask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferBlocking {
    /// Reception runs alongside computation; the next start waits only until
    /// the batch has arrived.
    Overlap,
    /// Reception starts once the current subtask ends and pushes the next
    /// start back by the full receive time.
    Additive,
}

/// Full scenario description. Every field has a default, so an empty config
/// document is valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Grid side `N`; the network has `N x N` satellites.
    pub n: usize,
    /// Wrap grid edges (neighborhoods and distances).
    pub torus: bool,
    /// Computational capability `C^comp` in cycles per second.
    pub comp_hz: f64,
    /// Reuse-table capacity `C^stg` in MB.
    pub storage_mb: f64,
    /// Number of LSH tables `p_l`.
    pub lsh_tables: usize,
    /// Hash functions (hyperplanes) per table `p_k`.
    pub lsh_functions: usize,
    /// Weight `beta` between reuse rate and CPU headroom in the reuse status.
    pub beta: f64,
    /// SSIM threshold for reusing a cached result.
    pub th_sim: f64,
    /// Reuse-status threshold that triggers and gates collaboration.
    pub th_co: f64,
    /// Records broadcast per collaboration event.
    pub tau: usize,
    /// Binary weight of the communication cost in the combined cost.
    pub alpha: u8,
    /// Lookup cost `W` in seconds.
    pub lookup_cost_s: f64,
    /// Cycles needed per MB of input (`F_t = cycles_per_mb * size`).
    pub cycles_per_mb: f64,
    /// Subtasks a satellite must complete after a collaboration attempt
    /// before it may trigger again.
    pub cooldown: usize,
    pub occupancy: OccupancyModel,
    pub blocking: TransferBlocking,
    /// Side lengths of the preprocessed raster.
    pub preprocess_width: usize,
    pub preprocess_height: usize,
    pub pricing: TransferPricing,
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub workload: WorkloadSpec,
    pub channel: ChannelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n: 5,
            torus: false,
            comp_hz: 3.0e9,
            storage_mb: 512.0,
            lsh_tables: 1,
            lsh_functions: 2,
            beta: 0.5,
            th_sim: 0.7,
            th_co: 0.5,
            tau: 11,
            alpha: 1,
            lookup_cost_s: 0.005,
            cycles_per_mb: 6.0e9,
            cooldown: 10,
            occupancy: OccupancyModel::Window { len: 5 },
            blocking: TransferBlocking::Additive,
            preprocess_width: 64,
            preprocess_height: 64,
            pricing: TransferPricing::Direct,
            scenario: ScenarioKind::Sccr,
            seed: 1,
            workload: WorkloadSpec::default(),
            channel: ChannelParams::default(),
        }
    }
}

impl ScenarioConfig {
    /// Parses a TOML config document; omitted keys take their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        validate_config(self)
    }

    pub fn satellites(&self) -> usize {
        self.n * self.n
    }

    pub fn workload_seed(&self) -> u64 {
        self.workload.seed.unwrap_or(self.seed)
    }
}

/// A config that passed [`validate_config`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedConfig(ScenarioConfig);

impl ValidatedConfig {
    pub fn into_inner(self) -> ScenarioConfig {
        self.0
    }

    /// Returns a copy with a modified field, re-validated.
    pub fn with(&self, f: impl FnOnce(&mut ScenarioConfig)) -> Result<Self, ConfigError> {
        let mut cfg = self.0.clone();
        f(&mut cfg);
        validate_config(cfg)
    }
}

impl Deref for ValidatedConfig {
    type Target = ScenarioConfig;

    fn deref(&self) -> &ScenarioConfig {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    /// Name of the offending field, if any.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Invalid { field, .. } => Some(field),
            ConfigError::Parse(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("expected {expected} pixels, got {actual}")]
    PixelCount { expected: usize, actual: usize },
    #[error("pixel value {0} outside [0, 1]")]
    PixelRange(f64),
    #[error("size must be positive and finite, got {0}")]
    NonPositiveSize(f64),
    #[error("position ({row},{col}) outside {n}x{n} grid")]
    OutOfGrid { row: usize, col: usize, n: usize },
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::invalid(field, format!("must be positive, got {v}")))
    }
}

fn in_range(field: &str, v: f64, lo: f64, hi: f64) -> Result<(), ConfigError> {
    if (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(
            field,
            format!("out of range [{lo}, {hi}], got {v}"),
        ))
    }
}

/// Checks every invariant of [`ScenarioConfig`].
pub fn validate_config(cfg: ScenarioConfig) -> Result<ValidatedConfig, ConfigError> {
    if cfg.n == 0 {
        return Err(ConfigError::invalid("n", "grid side must be at least 1"));
    }
    positive("comp_hz", cfg.comp_hz)?;
    positive("storage_mb", cfg.storage_mb)?;
    if cfg.lsh_tables == 0 {
        return Err(ConfigError::invalid("lsh_tables", "need at least one table"));
    }
    if !(1..=64).contains(&cfg.lsh_functions) {
        return Err(ConfigError::invalid(
            "lsh_functions",
            format!("must be in 1..=64, got {}", cfg.lsh_functions),
        ));
    }
    in_range("beta", cfg.beta, 0.0, 1.0)?;
    in_range("th_sim", cfg.th_sim, -1.0, 1.0)?;
    in_range("th_co", cfg.th_co, 0.0, 1.0)?;
    if cfg.alpha > 1 {
        return Err(ConfigError::invalid("alpha", "must be 0 or 1"));
    }
    if !(cfg.lookup_cost_s >= 0.0 && cfg.lookup_cost_s.is_finite()) {
        return Err(ConfigError::invalid("lookup_cost_s", "must be non-negative"));
    }
    positive("cycles_per_mb", cfg.cycles_per_mb)?;
    if let OccupancyModel::Window { len: 0 } = cfg.occupancy {
        return Err(ConfigError::invalid("occupancy", "window length must be positive"));
    }
    if cfg.preprocess_width == 0 || cfg.preprocess_height == 0 {
        return Err(ConfigError::invalid("preprocess_width", "dimensions must be positive"));
    }
    cfg.workload.validate()?;
    cfg.channel.validate()?;
    Ok(ValidatedConfig(cfg))
}

/// Derives an independent 64-bit seed from a base seed and a path of tags.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base ^ 0x243F_6A88_85A3_08D3);
    for &p in parts {
        state = splitmix64(state ^ splitmix64(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    state
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
