//! Local reuse on one satellite: lookup, similarity gate, compute-or-reuse,
//! the per-subtask cost model and the reuse status score.

use std::collections::VecDeque;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::domain::{
    GridPosition, InputData, OccupancyModel, OutputData, RecordId, ReuseRecord,
    SimTime, TaskType, ValidatedConfig,
};
use crate::scrt::{LshParams, Scrt, ScrtError};
use crate::similarity::{preprocess, ssim, SimilarityError, SsimConstants};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReuseError {
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Scrt(#[from] ScrtError),
    #[error("processor failed: {0}")]
    TaskFailed(String),
}

/// Something that computes a task result from scratch.
pub trait Processor {
    fn process(&self, d: &InputData, task_type: TaskType) -> Result<OutputData, ReuseError>;
}

/// Per-satellite knobs of the local reuse procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct ReuseParams {
    /// `false` computes every subtask from scratch with no table and no lookup.
    pub enabled: bool,
    pub th_sim: f64,
    pub beta: f64,
    pub lookup_cost_s: f64,
    pub cycles_per_mb: f64,
    pub comp_hz: f64,
    pub occupancy: OccupancyModel,
    pub preprocess_dims: (usize, usize),
    pub ssim: SsimConstants,
}

impl ReuseParams {
    pub fn from_config(cfg: &ValidatedConfig) -> Self {
        Self {
            enabled: cfg.scenario.uses_reuse(),
            th_sim: cfg.th_sim,
            beta: cfg.beta,
            lookup_cost_s: cfg.lookup_cost_s,
            cycles_per_mb: cfg.cycles_per_mb,
            comp_hz: cfg.comp_hz,
            occupancy: cfg.occupancy,
            preprocess_dims: (cfg.preprocess_width, cfg.preprocess_height),
            ssim: SsimConstants::default(),
        }
    }

    /// `F_t` for an input of `mb` megabytes.
    pub fn cycles_for(&self, mb: f64) -> f64 {
        self.cycles_per_mb * mb
    }
}

/// Running counters behind the reuse status.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReuseStats {
    pub tasks_total: u64,
    pub tasks_reused: u64,
    /// Seconds spent computing or looking up.
    pub busy_s: f64,
    /// Seconds since the satellite started working.
    pub elapsed_s: f64,
    /// From-scratch compute demand of the processed subtasks.
    pub demand_s: f64,
    #[serde(skip)]
    window: VecDeque<(f64, f64)>,
    pub srs: f64,
}

impl Default for ReuseStats {
    fn default() -> Self {
        Self {
            tasks_total: 0,
            tasks_reused: 0,
            busy_s: 0.0,
            elapsed_s: 0.0,
            demand_s: 0.0,
            window: VecDeque::new(),
            srs: 0.0,
        }
    }
}

impl ReuseStats {
    pub fn reuse_rate(&self) -> f64 {
        self.tasks_reused as f64 / self.tasks_total.max(1) as f64
    }

    /// CPU occupancy in `[0, 1]` under the given model.
    pub fn occupancy(&self, model: OccupancyModel) -> f64 {
        let c = match model {
            OccupancyModel::WallClock => self.busy_s / self.elapsed_s.max(f64::EPSILON),
            OccupancyModel::Demand => ratio(self.busy_s, self.demand_s),
            OccupancyModel::Window { .. } => {
                let (busy, demand) = self
                    .window
                    .iter()
                    .fold((0.0, 0.0), |(b, d), (wb, wd)| (b + wb, d + wd));
                ratio(busy, demand)
            }
        };
        c.clamp(0.0, 1.0)
    }

    fn record(&mut self, busy_s: f64, demand_s: f64, reused: bool, model: OccupancyModel) {
        self.tasks_total += 1;
        self.tasks_reused += u64::from(reused);
        self.busy_s += busy_s;
        self.demand_s += demand_s;
        if let OccupancyModel::Window { len } = model {
            self.window.push_back((busy_s, demand_s));
            while self.window.len() > len {
                self.window.pop_front();
            }
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Reuse status from a reuse rate and an occupancy.
pub fn srs_from(rr: f64, c: f64, beta: f64) -> f64 {
    beta * rr + (1.0 - beta) * (1.0 - c.clamp(0.0, 1.0))
}

pub fn srs(stats: &ReuseStats, beta: f64, model: OccupancyModel) -> f64 {
    srs_from(stats.reuse_rate(), stats.occupancy(model), beta)
}

/// Compute time from scratch, optionally including the lookup.
pub fn scratch_cost_s(f_cycles: f64, comp_hz: f64, include_lookup: bool, w_s: f64) -> f64 {
    let lookup = if include_lookup { w_s } else { 0.0 };
    lookup + f_cycles / comp_hz
}

pub fn reuse_cost_s(w_s: f64) -> f64 {
    w_s
}

pub fn task_cost_s(outcomes: &[SubtaskOutcome]) -> f64 {
    outcomes.iter().fold(0.0, |acc, o| acc + o.compute_cost_s)
}

/// Combined objective: communication cost weighted by `alpha`, plus compute.
pub fn total_cost_s(chi: f64, psi: f64, alpha: u8) -> f64 {
    f64::from(alpha) * psi + chi
}

/// What happened to one subtask.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtaskOutcome {
    pub reused: bool,
    pub result: OutputData,
    pub compute_cost_s: f64,
    /// Whether the lookup cost was charged.
    pub lookup_charged: bool,
    /// Result agrees with a from-scratch computation. Read only by metrics.
    pub correct: bool,
    pub matched: Option<RecordId>,
    pub similarity: Option<f64>,
    #[serde(skip)]
    pending: Option<ReuseRecord>,
    #[serde(skip)]
    demand_s: f64,
}

/// One satellite's reuse state.
#[derive(Debug, Clone)]
pub struct SatelliteState {
    pub pos: GridPosition,
    pub scrt: Scrt,
    pub stats: ReuseStats,
    params: ReuseParams,
    started: u64,
    /// `tasks_total` at the last collaboration attempt.
    pub last_attempt_at: Option<u64>,
}

impl SatelliteState {
    pub fn new(pos: GridPosition, params: ReuseParams, scrt: Scrt) -> Self {
        let mut state = Self {
            pos,
            scrt,
            stats: ReuseStats::default(),
            params,
            started: 0,
            last_attempt_at: None,
        };
        state.refresh_srs();
        state
    }

    /// Builds the state for `pos` with the table seeded from `seed`.
    pub fn from_config(cfg: &ValidatedConfig, pos: GridPosition, seed: u64) -> Self {
        let lsh = LshParams {
            dim: cfg.preprocess_width * cfg.preprocess_height,
            tables: cfg.lsh_tables,
            functions: cfg.lsh_functions,
        };
        Self::new(pos, ReuseParams::from_config(cfg), Scrt::new(cfg.storage_mb, lsh, seed))
    }

    pub fn params(&self) -> &ReuseParams {
        &self.params
    }

    pub fn srs(&self) -> f64 {
        self.stats.srs
    }

    fn refresh_srs(&mut self) {
        self.stats.srs = srs(&self.stats, self.params.beta, self.params.occupancy);
    }

    /// May this satellite start a collaboration attempt now?
    pub fn may_trigger(&self, cooldown: usize) -> bool {
        self.last_attempt_at
            .map_or(true, |at| self.stats.tasks_total >= at + cooldown as u64)
    }

    pub fn note_attempt(&mut self) {
        self.last_attempt_at = Some(self.stats.tasks_total);
    }

    /// Decides reuse versus compute for one subtask and returns its outcome.
    /// Statistics are not touched until [`finish_subtask`](Self::finish_subtask).
    pub fn process_subtask<P: Processor + ?Sized>(
        &mut self,
        d: &InputData,
        task_type: TaskType,
        processor: &P,
        now: SimTime,
    ) -> Result<SubtaskOutcome, ReuseError> {
        let p = &self.params;
        let f_cycles = p.cycles_for(d.raw_mb());
        let scratch = scratch_cost_s(f_cycles, p.comp_hz, true, p.lookup_cost_s);
        self.started += 1;

        if !p.enabled {
            let result = processor.process(d, task_type)?;
            return Ok(SubtaskOutcome {
                reused: false,
                result,
                compute_cost_s: scratch_cost_s(f_cycles, p.comp_hz, false, 0.0),
                lookup_charged: false,
                correct: true,
                matched: None,
                similarity: None,
                pending: None,
                demand_s: scratch,
            });
        }

        let pd = preprocess(d, p.preprocess_dims)?;
        let mut similarity = None;
        let matched = self.scrt.find_nearest(&pd, task_type)?;
        if let Some(id) = matched {
            let rec = self.scrt.get(id).expect("index and store agree");
            let s = ssim(&pd, &rec.preprocessed, &p.ssim)?;
            similarity = Some(s);
            if s > p.th_sim {
                let result = rec.output;
                let reference = processor.process(d, task_type)?;
                self.scrt.bump_reuse(id)?;
                return Ok(SubtaskOutcome {
                    reused: true,
                    result,
                    compute_cost_s: reuse_cost_s(self.params.lookup_cost_s),
                    lookup_charged: true,
                    correct: reference.label == result.label,
                    matched,
                    similarity,
                    pending: None,
                    demand_s: scratch,
                });
            }
        }

        let result = processor.process(d, task_type)?;
        // The first two subtasks of a satellite are not charged for the lookup.
        let charged = self.started > 2;
        Ok(SubtaskOutcome {
            reused: false,
            result,
            compute_cost_s: scratch_cost_s(f_cycles, p.comp_hz, charged, p.lookup_cost_s),
            lookup_charged: charged,
            correct: true,
            matched,
            similarity,
            pending: Some(ReuseRecord {
                input: d.clone(),
                preprocessed: Arc::new(pd),
                task_type,
                output: result,
                reuse_count: 0,
                inserted_at: now,
            }),
            demand_s: scratch,
        })
    }

    /// Books a finished subtask: caches a freshly computed result, updates the
    /// counters and the reuse status. Returns ids evicted by the insert.
    pub fn finish_subtask(
        &mut self,
        outcome: &mut SubtaskOutcome,
        now: SimTime,
        elapsed_s: f64,
    ) -> Result<Vec<RecordId>, ReuseError> {
        let mut evicted = Vec::new();
        if let Some(mut rec) = outcome.pending.take() {
            rec.inserted_at = now;
            evicted = self.scrt.insert_record(rec)?.1;
        }
        self.stats.elapsed_s = elapsed_s;
        self.stats.record(
            outcome.compute_cost_s,
            outcome.demand_s,
            outcome.reused,
            self.params.occupancy,
        );
        self.refresh_srs();
        Ok(evicted)
    }

    /// Processes and books a subtask back to back, with no time passing
    /// other than its own cost.
    pub fn run_subtask<P: Processor + ?Sized>(
        &mut self,
        d: &InputData,
        task_type: TaskType,
        processor: &P,
        now: SimTime,
    ) -> Result<SubtaskOutcome, ReuseError> {
        let mut outcome = self.process_subtask(d, task_type, processor, now)?;
        let end = now + outcome.compute_cost_s;
        let elapsed = self.stats.elapsed_s + outcome.compute_cost_s;
        self.finish_subtask(&mut outcome, end, elapsed)?;
        Ok(outcome)
    }
}
