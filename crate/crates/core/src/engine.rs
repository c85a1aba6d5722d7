//! Discrete-event core: global clock, per-satellite FIFO queues, scenario
//! dispatch, collaboration wiring and metrics.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::channel::GridGeometry;
use crate::collab::{plan_sccr, CollabError, CollabMode, CollabOutcome, SccrParams};
use crate::domain::{
    derive_seed, ConfigError, GridPosition, OccupancyModel, ReuseRecord, ScenarioKind, SimTime, TransferBlocking, ValidatedConfig,
};
use crate::reuse::{total_cost_s, ReuseError, SatelliteState, SubtaskOutcome};
use crate::workload::{generate, ingest_directory, Workload, WorkloadError};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Reuse(#[from] ReuseError),
    #[error(transparent)]
    Collab(#[from] CollabError),
    #[error("workload was built for {workload} satellites, config has {config}")]
    GridMismatch { workload: usize, config: usize },
    #[error("sweep needs at least one value")]
    EmptySweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    TaskArrival,
    TaskComplete,
    SccrTrigger,
    BroadcastDelivered,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::TaskArrival => "task_arrival",
            EventKind::TaskComplete => "task_complete",
            EventKind::SccrTrigger => "sccr_trigger",
            EventKind::BroadcastDelivered => "broadcast_delivered",
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Payload {
    Arrival { task: usize },
    Complete,
    Trigger,
    Delivered { broadcast: usize },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: SimTime,
    kind: EventKind,
    sat: usize,
    seq: u64,
    payload: Payload,
}

impl Event {
    fn key(&self) -> (SimTime, EventKind, usize, u64) {
        (self.time, self.kind, self.sat, self.seq)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    /// Reversed so the max-heap pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0)
            .then(b.1.cmp(&a.1))
            .then(b.2.cmp(&a.2))
            .then(b.3.cmp(&a.3))
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogEntry {
    pub time: SimTime,
    pub kind: EventKind,
    pub satellite: GridPosition,
    pub payload: String,
}

impl LogEntry {
    /// `time<TAB>kind<TAB>row,col<TAB>payload<TAB>digest`
    pub fn to_line(&self) -> String {
        format!(
            "{:.9}\t{}\t{},{}\t{}\t{:016x}",
            self.time,
            self.kind.as_str(),
            self.satellite.row,
            self.satellite.col,
            self.payload,
            fnv1a(self.payload.as_bytes())
        )
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Outcome of one subtask as seen by the engine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub task: usize,
    pub satellite: GridPosition,
    pub start_s: SimTime,
    pub end_s: SimTime,
    pub reused: bool,
    pub correct: bool,
    pub label: u32,
    pub compute_cost_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollabRecord {
    pub time: SimTime,
    pub requester: GridPosition,
    pub source: Option<GridPosition>,
    pub level: u8,
    pub area_size: usize,
    pub records_shared: usize,
    pub psi_s: f64,
    pub mb: f64,
    pub outcome: CollabOutcome,
    pub probes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatelliteReport {
    pub position: GridPosition,
    pub tasks: u64,
    pub reused: u64,
    pub busy_s: f64,
    pub last_completion_s: SimTime,
    pub cpu_occupancy: f64,
    pub final_srs: f64,
    pub scrt_records: usize,
    pub scrt_used_mb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub completion_time_s: f64,
    pub reuse_rate: f64,
    pub cpu_occupancy: f64,
    pub reuse_accuracy: f64,
    pub data_transfer_mb: f64,
    pub total_cost_s: f64,
    /// Sum of per-subtask compute costs.
    pub compute_cost_s: f64,
    /// Sum of broadcast transfer times.
    pub comm_cost_s: f64,
    pub triggers: usize,
    pub helped: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Tau,
    ThCo,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Tau => "tau",
            SweepParam::ThCo => "th_co",
        }
    }
}

impl std::str::FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tau" => Ok(SweepParam::Tau),
            "th_co" => Ok(SweepParam::ThCo),
            other => Err(format!("unknown sweep parameter `{other}` (expected tau or th_co)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub param: SweepParam,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: ScenarioKind,
    pub n: usize,
    pub seed: u64,
    pub sweep: Option<SweepPoint>,
    pub metrics: Metrics,
    pub satellites: Vec<SatelliteReport>,
    pub collaborations: Vec<CollabRecord>,
    pub tasks: Vec<TaskRecord>,
    pub events: Vec<LogEntry>,
}

impl RunReport {
    /// The event log, one entry per line.
    pub fn events_log(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let _ = writeln!(out, "{}", e.to_line());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is plain data")
    }
}

/// Builds the workload a config describes.
pub fn build_workload(cfg: &ValidatedConfig) -> Result<Workload, EngineError> {
    let dims = (cfg.preprocess_width, cfg.preprocess_height);
    let seed = cfg.workload_seed();
    Ok(match &cfg.workload.dataset_dir {
        Some(dir) => ingest_directory(dir, &cfg.workload, cfg.n, seed, dims)?,
        None => generate(&cfg.workload, cfg.n, seed, dims)?,
    })
}

pub fn run(cfg: &ValidatedConfig) -> Result<RunReport, EngineError> {
    let workload = build_workload(cfg)?;
    run_with_workload(cfg, &workload)
}

/// One run per value on a shared workload.
pub fn run_sweep(
    cfg: &ValidatedConfig,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<RunReport>, EngineError> {
    if values.is_empty() {
        return Err(EngineError::EmptySweep);
    }
    let workload = build_workload(cfg)?;
    run_sweep_with_workload(cfg, &workload, param, values)
}

pub fn run_sweep_with_workload(
    cfg: &ValidatedConfig,
    workload: &Workload,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<RunReport>, EngineError> {
    if values.is_empty() {
        return Err(EngineError::EmptySweep);
    }
    values
        .iter()
        .map(|&v| {
            let point = cfg.with(|c| match param {
                SweepParam::Tau => c.tau = v.round().max(0.0) as usize,
                SweepParam::ThCo => c.th_co = v,
            })?;
            let mut report = run_with_workload(&point, workload)?;
            report.sweep = Some(SweepPoint { param, value: v });
            Ok(report)
        })
        .collect()
}

struct Broadcast {
    records: Vec<ReuseRecord>,
}

struct Sim<'w> {
    cfg: &'w ValidatedConfig,
    workload: &'w Workload,
    n: usize,
    geo: GridGeometry,
    collab: Option<SccrParams>,
    states: Vec<SatelliteState>,
    queues: Vec<VecDeque<usize>>,
    /// Task currently on the CPU, with its outcome and start time.
    running: Vec<Option<(usize, SubtaskOutcome, SimTime, SimTime)>>,
    /// Waiting for an election this satellite requested.
    held: Vec<bool>,
    /// Earliest time the next subtask may start.
    blocked_until: Vec<SimTime>,
    first_arrival: Vec<Option<SimTime>>,
    last_completion: Vec<SimTime>,
    broadcasts: Vec<Broadcast>,
    heap: BinaryHeap<Event>,
    seq: u64,
    log: Vec<LogEntry>,
    tasks: Vec<TaskRecord>,
    collaborations: Vec<CollabRecord>,
}

/// Runs `cfg` on a prebuilt workload.
pub fn run_with_workload(cfg: &ValidatedConfig, workload: &Workload) -> Result<RunReport, EngineError> {
    let sats = cfg.satellites();
    if workload.per_satellite.len() != sats {
        return Err(EngineError::GridMismatch {
            workload: workload.per_satellite.len(),
            config: sats,
        });
    }
    let n = cfg.n;
    let collab = match cfg.scenario {
        ScenarioKind::SccrInit | ScenarioKind::Sccr | ScenarioKind::SrsPriority => Some(SccrParams {
            th_co: cfg.th_co,
            tau: cfg.tau,
            mode: match cfg.scenario {
                ScenarioKind::SrsPriority => CollabMode::Global,
                ScenarioKind::SccrInit => CollabMode::Local { expand: false },
                _ => CollabMode::Local { expand: true },
            },
            torus: cfg.torus,
            pricing: cfg.pricing,
        }),
        _ => None,
    };
    let states = (0..sats)
        .map(|i| {
            let pos = GridPosition::from_index(i, n);
            SatelliteState::from_config(cfg, pos, derive_seed(cfg.seed, &[10, i as u64]))
        })
        .collect();
    let mut sim = Sim {
        cfg,
        workload,
        n,
        geo: GridGeometry::new(&cfg.channel, n, cfg.torus),
        collab,
        states,
        queues: vec![VecDeque::new(); sats],
        running: vec![None; sats],
        held: vec![false; sats],
        blocked_until: vec![0.0; sats],
        first_arrival: vec![None; sats],
        last_completion: vec![0.0; sats],
        broadcasts: Vec::new(),
        heap: BinaryHeap::new(),
        seq: 0,
        log: Vec::new(),
        tasks: Vec::new(),
        collaborations: Vec::new(),
    };
    for (s, tasks) in workload.per_satellite.iter().enumerate() {
        for (k, task) in tasks.iter().enumerate() {
            sim.push(task.arrival, EventKind::TaskArrival, s, Payload::Arrival { task: k });
        }
    }
    sim.drain()?;
    Ok(sim.report())
}

impl<'w> Sim<'w> {
    fn push(&mut self, time: SimTime, kind: EventKind, sat: usize, payload: Payload) {
        self.seq += 1;
        self.heap.push(Event {
            time,
            kind,
            sat,
            seq: self.seq,
            payload,
        });
    }

    fn pos(&self, sat: usize) -> GridPosition {
        GridPosition::from_index(sat, self.n)
    }

    fn log(&mut self, time: SimTime, kind: EventKind, sat: usize, payload: String) {
        let satellite = self.pos(sat);
        self.log.push(LogEntry {
            time,
            kind,
            satellite,
            payload,
        });
    }

    fn drain(&mut self) -> Result<(), EngineError> {
        while let Some(ev) = self.heap.pop() {
            match ev.payload {
                Payload::Arrival { task } => self.on_arrival(ev.time, ev.sat, task)?,
                Payload::Complete => self.on_complete(ev.time, ev.sat)?,
                Payload::Trigger => self.on_trigger(ev.time, ev.sat)?,
                Payload::Delivered { broadcast } => self.on_delivered(ev.time, ev.sat, broadcast)?,
            }
        }
        Ok(())
    }

    fn on_arrival(&mut self, now: SimTime, sat: usize, task: usize) -> Result<(), EngineError> {
        let id = self.workload.per_satellite[sat][task].id;
        self.log(now, EventKind::TaskArrival, sat, format!("task={id}"));
        self.first_arrival[sat].get_or_insert(now);
        self.queues[sat].push_back(task);
        self.try_start(now, sat)
    }

    fn try_start(&mut self, now: SimTime, sat: usize) -> Result<(), EngineError> {
        if self.running[sat].is_some() || self.held[sat] || now < self.blocked_until[sat] {
            return Ok(());
        }
        let Some(task_idx) = self.queues[sat].pop_front() else {
            return Ok(());
        };
        let task = &self.workload.per_satellite[sat][task_idx];
        let outcome = self.states[sat].process_subtask(
            &task.input,
            task.task_type,
            self.workload.oracle.as_ref(),
            now,
        )?;
        let end = now + outcome.compute_cost_s;
        self.running[sat] = Some((task_idx, outcome, now, end));
        self.push(end, EventKind::TaskComplete, sat, Payload::Complete);
        Ok(())
    }

    fn on_complete(&mut self, now: SimTime, sat: usize) -> Result<(), EngineError> {
        let (task_idx, mut outcome, start, _) = self.running[sat].take().expect("a task was running");
        let elapsed = now - self.first_arrival[sat].unwrap_or(0.0);
        self.states[sat].finish_subtask(&mut outcome, now, elapsed)?;
        self.last_completion[sat] = now;
        let task_id = self.workload.per_satellite[sat][task_idx].id;
        let srs = self.states[sat].srs();
        self.log(
            now,
            EventKind::TaskComplete,
            sat,
            format!(
                "task={task_id} reused={} label={} cost={:.9} srs={:.9}",
                u8::from(outcome.reused),
                outcome.result.label,
                outcome.compute_cost_s,
                srs
            ),
        );
        self.tasks.push(TaskRecord {
            task: task_id,
            satellite: self.pos(sat),
            start_s: start,
            end_s: now,
            reused: outcome.reused,
            correct: outcome.correct,
            label: outcome.result.label,
            compute_cost_s: outcome.compute_cost_s,
        });

        if let Some(params) = &self.collab {
            let state = &self.states[sat];
            if srs < params.th_co
                && state.may_trigger(self.cfg.cooldown)
                && !self.queues[sat].is_empty()
            {
                self.states[sat].note_attempt();
                self.held[sat] = true;
                self.push(now, EventKind::SccrTrigger, sat, Payload::Trigger);
                return Ok(());
            }
        }
        self.try_start(now, sat)
    }

    fn on_trigger(&mut self, now: SimTime, sat: usize) -> Result<(), EngineError> {
        let params = self.collab.clone().expect("trigger only in collaborative scenarios");
        let req = self.pos(sat);
        let plan = plan_sccr(req, self.n, &self.states, &params, &self.cfg.channel, &self.geo)?;
        let ev = &plan.event;
        self.collaborations.push(CollabRecord {
            time: now,
            requester: req,
            source: ev.source,
            level: ev.area.level,
            area_size: ev.area.len(),
            records_shared: ev.records_shared,
            psi_s: ev.psi_s,
            mb: ev.mb,
            outcome: ev.outcome,
            probes: ev.probes.0,
        });
        let payload = match ev.source {
            Some(src) => format!(
                "outcome=helped source={},{} level={} area={} records={} psi={:.9} mb={:.9}",
                src.row,
                src.col,
                ev.area.level,
                ev.area.len(),
                ev.records_shared,
                ev.psi_s,
                ev.mb
            ),
            None => format!("outcome=no_source level={} area={}", ev.area.level, ev.area.len()),
        };
        self.log(now, EventKind::SccrTrigger, sat, payload);
        self.held[sat] = false;

        if ev.outcome == CollabOutcome::Helped {
            let id = self.broadcasts.len();
            let receivers = ev.receivers.clone();
            self.broadcasts.push(Broadcast {
                records: plan.records,
            });
            for (pos, t) in receivers {
                let r = pos.index(self.n);
                let at = match self.cfg.blocking {
                    TransferBlocking::Overlap => self.blocked_until[r].max(now + t),
                    TransferBlocking::Additive => {
                        let free = self.running[r].as_ref().map_or(now, |run| run.3);
                        self.blocked_until[r].max(free) + t
                    }
                };
                self.blocked_until[r] = at;
                self.push(at, EventKind::BroadcastDelivered, r, Payload::Delivered { broadcast: id });
            }
        }
        self.try_start(now, sat)
    }

    fn on_delivered(&mut self, now: SimTime, sat: usize, broadcast: usize) -> Result<(), EngineError> {
        let records = &self.broadcasts[broadcast].records;
        let mb: f64 = records.iter().map(ReuseRecord::size_mb).sum();
        let count = records.len();
        let (installed, skipped) = self.states[sat]
            .scrt
            .install_shared(records, now)
            .map_err(|e| EngineError::Reuse(e.into()))?;
        self.log(
            now,
            EventKind::BroadcastDelivered,
            sat,
            format!("broadcast={broadcast} records={count} installed={installed} skipped={skipped} mb={mb:.9}"),
        );
        self.try_start(now, sat)
    }

    fn report(self) -> RunReport {
        let completion = self.last_completion.iter().cloned().fold(0.0, f64::max);
        let sats = self.states.len();
        let satellites: Vec<SatelliteReport> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let elapsed = completion - self.first_arrival[i].unwrap_or(0.0);
                SatelliteReport {
                    position: s.pos,
                    tasks: s.stats.tasks_total,
                    reused: s.stats.tasks_reused,
                    busy_s: s.stats.busy_s,
                    last_completion_s: self.last_completion[i],
                    cpu_occupancy: match self.cfg.occupancy {
                        OccupancyModel::WallClock if elapsed > 0.0 => (s.stats.busy_s / elapsed).min(1.0),
                        OccupancyModel::WallClock => 0.0,
                        _ => s.stats.occupancy(OccupancyModel::Demand),
                    },
                    final_srs: s.srs(),
                    scrt_records: s.scrt.len(),
                    scrt_used_mb: s.scrt.used_mb(),
                }
            })
            .collect();
        let tasks_total: u64 = satellites.iter().map(|s| s.tasks).sum();
        let reused: u64 = satellites.iter().map(|s| s.reused).sum();
        let correct = self.tasks.iter().filter(|t| t.reused && t.correct).count();
        let chi = self.tasks.iter().fold(0.0, |acc, t| acc + t.compute_cost_s);
        let psi = self.collaborations.iter().fold(0.0, |acc, c| acc + c.psi_s);
        let metrics = Metrics {
            completion_time_s: completion,
            reuse_rate: reused as f64 / tasks_total.max(1) as f64,
            cpu_occupancy: satellites.iter().map(|s| s.cpu_occupancy).sum::<f64>() / sats as f64,
            reuse_accuracy: if reused == 0 { 1.0 } else { correct as f64 / reused as f64 },
            data_transfer_mb: self.collaborations.iter().fold(0.0, |acc, c| acc + c.mb),
            total_cost_s: total_cost_s(chi, psi, self.cfg.alpha),
            compute_cost_s: chi,
            comm_cost_s: psi,
            triggers: self.collaborations.len(),
            helped: self
                .collaborations
                .iter()
                .filter(|c| c.outcome == CollabOutcome::Helped)
                .count(),
        };
        RunReport {
            scenario: self.cfg.scenario,
            n: self.n,
            seed: self.cfg.seed,
            sweep: None,
            metrics,
            satellites,
            collaborations: self.collaborations,
            tasks: self.tasks,
            events: self.log,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ScenarioConfig;
    use crate::workload::WorkloadSpec;

    fn small(scenario: ScenarioKind, noise: f64) -> ValidatedConfig {
        ScenarioConfig {
            n: 3,
            scenario,
            preprocess_width: 16,
            preprocess_height: 16,
            workload: WorkloadSpec {
                total_tasks: 90,
                total_mb: 90.0 * 20.0,
                num_classes: 6,
                image_width: 32,
                image_height: 32,
                noise_sigma: noise,
                ..Default::default()
            },
            ..Default::default()
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn event_order_is_time_kind_sat_seq() {
        let mk = |time, kind, sat, seq| Event {
            time,
            kind,
            sat,
            seq,
            payload: Payload::Complete,
        };
        let mut heap = BinaryHeap::new();
        heap.push(mk(1.0, EventKind::TaskArrival, 0, 5));
        heap.push(mk(0.5, EventKind::BroadcastDelivered, 3, 4));
        heap.push(mk(0.5, EventKind::TaskComplete, 3, 3));
        heap.push(mk(0.5, EventKind::TaskComplete, 1, 9));
        heap.push(mk(0.5, EventKind::TaskComplete, 1, 2));
        let order: Vec<(f64, usize, u64)> = std::iter::from_fn(|| heap.pop()).map(|e| (e.time, e.sat, e.seq)).collect();
        assert_eq!(order, vec![(0.5, 1, 2), (0.5, 1, 9), (0.5, 3, 3), (0.5, 3, 4), (1.0, 0, 5)]);
    }

    #[test]
    fn without_reuse_conventions() {
        let r = run(&small(ScenarioKind::WithoutCr, 0.02)).unwrap();
        assert_eq!(r.metrics.reuse_rate, 0.0);
        assert_eq!(r.metrics.data_transfer_mb, 0.0);
        assert_eq!(r.metrics.reuse_accuracy, 1.0);
        assert_eq!(r.tasks.len(), 90);
    }

    #[test]
    fn zero_noise_local_reuse_matches_first_sight_rule() {
        let cfg = small(ScenarioKind::Slcr, 0.0);
        let w = build_workload(&cfg).unwrap();
        let r = run_with_workload(&cfg, &w).unwrap();
        for (s, tasks) in w.per_satellite.iter().enumerate() {
            let m = tasks.len() as u64;
            let c = w.classes_per_satellite()[s] as u64;
            assert_eq!(r.satellites[s].reused, m - c);
        }
        assert_eq!(r.metrics.reuse_accuracy, 1.0);
    }

    #[test]
    fn every_task_completes_once() {
        for kind in ScenarioKind::ALL {
            let r = run(&small(kind, 0.02)).unwrap();
            let mut ids: Vec<usize> = r.tasks.iter().map(|t| t.task).collect();
            ids.sort_unstable();
            assert_eq!(ids, (0..90).collect::<Vec<_>>(), "{kind}");
            let sorted = r.events.windows(2).all(|w| w[0].time <= w[1].time);
            assert!(sorted);
        }
    }

    #[test]
    fn transfer_volume_matches_delivery_log() {
        let cfg = small(ScenarioKind::SrsPriority, 0.02);
        let r = run(&cfg).unwrap();
        let tally: f64 = r
            .events
            .iter()
            .filter(|e| e.kind == EventKind::BroadcastDelivered)
            .map(|e| {
                e.payload
                    .split_whitespace()
                    .find_map(|kv| kv.strip_prefix("mb="))
                    .unwrap()
                    .parse::<f64>()
                    .unwrap()
            })
            .sum();
        let m = r.metrics.data_transfer_mb;
        assert!((tally - m).abs() <= 1e-9 * m.max(1.0));
    }

    #[test]
    fn identical_configs_give_identical_reports() {
        let cfg = small(ScenarioKind::Sccr, 0.02);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.events_log(), b.events_log());
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn single_value_sweep_equals_run() {
        let cfg = small(ScenarioKind::Sccr, 0.02);
        let plain = run(&cfg).unwrap();
        let swept = run_sweep(&cfg, SweepParam::Tau, &[cfg.tau as f64]).unwrap();
        assert_eq!(swept.len(), 1);
        assert_eq!(swept[0].metrics, plain.metrics);
        assert_eq!(swept[0].events, plain.events);
        assert!(run_sweep(&cfg, SweepParam::Tau, &[]).is_err());
    }
}
