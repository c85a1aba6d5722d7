use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satreuse::collab::CollabOutcome;
use satreuse::domain::{GridPosition, InputData, ScenarioConfig, ScenarioKind, TaskType, ValidatedConfig};
use satreuse::engine::{run_with_workload, EventKind, RunReport};
use satreuse::workload::{prototype, OracleProcessor, Task, Workload};

const N: usize = 5;
const TASK_MB: f64 = 20.0;

fn config(scenario: ScenarioKind) -> ValidatedConfig {
    ScenarioConfig {
        n: N,
        scenario,
        preprocess_width: 16,
        preprocess_height: 16,
        cooldown: 1,
        ..Default::default()
    }
    .validate()
    .unwrap()
}

/// 5x5 grid where only `source` and `requester` have work. The source sees
/// class 1 ten times from t=0. The requester starts at t=2000 with one class-0
/// task followed by nine class-1 tasks.
fn two_satellite_workload(source: GridPosition, requester: GridPosition) -> Workload {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let prototypes: Vec<_> = (0..2).map(|_| prototype(6, 32, 32, &mut rng)).collect();
    let oracle = OracleProcessor::new(&prototypes, (16, 16), 0.01).unwrap();
    let mut per_satellite = vec![Vec::new(); N * N];
    let mut id = 0;
    let mut task = |class: u32, arrival: f64| {
        id += 1;
        Task {
            id: id - 1,
            input: InputData::new(TASK_MB, prototypes[class as usize].clone(), class).unwrap(),
            task_type: TaskType(0),
            arrival,
        }
    };
    per_satellite[source.index(N)] = (0..10).map(|_| task(1, 0.0)).collect();
    let mut req = vec![task(0, 2000.0)];
    req.extend((0..9).map(|_| task(1, 2000.0)));
    per_satellite[requester.index(N)] = req;
    Workload {
        per_satellite,
        oracle: Arc::new(oracle),
        prototypes,
    }
}

fn run(kind: ScenarioKind, w: &Workload) -> RunReport {
    run_with_workload(&config(kind), w).unwrap()
}

#[test]
fn expansion_finds_distant_source() {
    let requester = GridPosition::new(2, 2);
    let w = two_satellite_workload(GridPosition::new(0, 0), requester);
    let sccr = run(ScenarioKind::Sccr, &w);
    let init = run(ScenarioKind::SccrInit, &w);

    let helped: Vec<_> = sccr
        .collaborations
        .iter()
        .filter(|c| c.outcome == CollabOutcome::Helped)
        .collect();
    assert_eq!(helped.len(), 1);
    assert_eq!(helped[0].level, 2);
    assert_eq!(helped[0].source, Some(GridPosition::new(0, 0)));
    assert!(init.collaborations.iter().all(|c| c.outcome == CollabOutcome::NoSourceFound));

    let req = requester.index(N);
    assert_eq!(sccr.satellites[req].reused, 9);
    assert_eq!(init.satellites[req].reused, 8);
    assert!(sccr.metrics.completion_time_s < init.metrics.completion_time_s);
}

#[test]
fn init_matches_full_when_neighbors_suffice() {
    let w = two_satellite_workload(GridPosition::new(1, 1), GridPosition::new(2, 2));
    let sccr = run(ScenarioKind::Sccr, &w);
    let init = run(ScenarioKind::SccrInit, &w);
    assert!(sccr.collaborations.iter().any(|c| c.outcome == CollabOutcome::Helped));
    assert_eq!(sccr.events_log(), init.events_log());
    assert_eq!(sccr.metrics, init.metrics);
}

#[test]
fn local_reuse_ignores_neighbors() {
    let w = two_satellite_workload(GridPosition::new(1, 1), GridPosition::new(2, 2));
    let r = run(ScenarioKind::Slcr, &w);
    assert!(r.collaborations.is_empty());
    assert_eq!(r.metrics.data_transfer_mb, 0.0);
    assert_eq!(r.satellites[GridPosition::new(1, 1).index(N)].reused, 9);
    assert_eq!(r.satellites[GridPosition::new(2, 2).index(N)].reused, 8);
    assert_eq!(r.metrics.reuse_accuracy, 1.0);
}

#[test]
fn deliveries_follow_helped_elections() {
    let w = two_satellite_workload(GridPosition::new(1, 1), GridPosition::new(2, 2));
    let r = run(ScenarioKind::Sccr, &w);
    let delivered = r.events.iter().filter(|e| e.kind == EventKind::BroadcastDelivered).count();
    let receivers: usize = r
        .collaborations
        .iter()
        .filter(|c| c.outcome == CollabOutcome::Helped)
        .map(|c| c.area_size - 1)
        .sum();
    assert_eq!(delivered, receivers);
}
