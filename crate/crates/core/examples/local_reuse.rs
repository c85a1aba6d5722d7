//! One satellite reusing results locally, followed by a dump of its table.

use satreuse::domain::{GridPosition, InputData, ScenarioConfig, ScenarioKind, TaskType};
use satreuse::reuse::SatelliteState;
use satreuse::workload::{generate, WorkloadSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig {
        n: 1,
        scenario: ScenarioKind::Slcr,
        storage_mb: 64.0,
        workload: WorkloadSpec {
            total_tasks: 20,
            total_mb: 200.0,
            num_classes: 4,
            ..Default::default()
        },
        ..Default::default()
    }
    .validate()?;
    let w = generate(&cfg.workload, 1, cfg.seed, (cfg.preprocess_width, cfg.preprocess_height))?;
    let mut sat = SatelliteState::from_config(&cfg, GridPosition::new(0, 0), cfg.seed);

    let mut now = 0.0;
    for task in &w.per_satellite[0] {
        let d: &InputData = &task.input;
        let o = sat.run_subtask(d, TaskType(0), w.oracle.as_ref(), now)?;
        now += o.compute_cost_s;
        println!(
            "task {:2} class {} -> {} (ssim {}) cost {:.3} s, srs {:.3}",
            task.id,
            task.class(),
            if o.reused { "reused  " } else { "computed" },
            o.similarity.map_or("-".into(), |s| format!("{s:.3}")),
            o.compute_cost_s,
            sat.srs()
        );
    }
    println!("reuse rate {:.2}", sat.stats.reuse_rate());
    println!("{}", sat.scrt.dump().to_json());
    Ok(())
}
