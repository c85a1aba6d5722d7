//! A single collaboration round: a struggling satellite pulls records from
//! the best-performing neighbor.

use satreuse::channel::{ChannelParams, GridGeometry};
use satreuse::collab::{run_sccr, CollabMode, SccrParams};
use satreuse::domain::{GridPosition, ScenarioConfig, TaskType};
use satreuse::reuse::SatelliteState;
use satreuse::workload::generate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default().validate()?;
    let n = cfg.n;
    let w = generate(&cfg.workload, n, cfg.seed, (cfg.preprocess_width, cfg.preprocess_height))?;
    let mut states: Vec<SatelliteState> = (0..n * n)
        .map(|i| SatelliteState::from_config(&cfg, GridPosition::from_index(i, n), i as u64))
        .collect();

    // warm every table with the first half of its queue
    for (state, tasks) in states.iter_mut().zip(&w.per_satellite) {
        let mut now = 0.0;
        for t in &tasks[..tasks.len() / 2] {
            now += state.run_subtask(&t.input, TaskType(0), w.oracle.as_ref(), now)?.compute_cost_s;
        }
    }
    for row in 0..n {
        let line: Vec<String> = (0..n).map(|c| format!("{:.2}", states[row * n + c].srs())).collect();
        println!("srs {}", line.join(" "));
    }

    let req = (0..n * n)
        .min_by(|&a, &b| states[a].srs().total_cmp(&states[b].srs()))
        .map(|i| GridPosition::from_index(i, n))
        .unwrap();
    let params = SccrParams {
        th_co: cfg.th_co,
        tau: cfg.tau,
        mode: CollabMode::Local { expand: true },
        torus: cfg.torus,
        pricing: cfg.pricing,
    };
    let geo = GridGeometry::new(&cfg.channel, n, cfg.torus);
    let before = states[req.index(n)].scrt.len();
    let ev = run_sccr(req, n, &mut states, &params, &ChannelParams::default(), &geo, 0.0)?;
    println!(
        "requester {req}: {:?} via {:?} (level {}), {} records, {:.1} MB, {:.2} s; table {before} -> {} records",
        ev.outcome,
        ev.source,
        ev.area.level,
        ev.records_shared,
        ev.mb,
        ev.psi_s,
        states[req.index(n)].scrt.len()
    );
    Ok(())
}
