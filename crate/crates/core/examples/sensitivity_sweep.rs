//! Sweeps the collaboration threshold and the broadcast size.

use satreuse::domain::{ScenarioConfig, ScenarioKind};
use satreuse::engine::{build_workload, run_sweep_with_workload, run_with_workload, SweepParam};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default().validate()?;
    let w = build_workload(&cfg)?;
    let local = run_with_workload(&cfg.with(|c| c.scenario = ScenarioKind::Slcr)?, &w)?;
    println!("local reuse only: {:.1} s", local.metrics.completion_time_s);

    let sweeps = [
        (SweepParam::ThCo, (1..=9).map(|i| f64::from(i) / 10.0).collect::<Vec<_>>()),
        (SweepParam::Tau, (1..=15).map(f64::from).collect()),
    ];
    for (param, values) in sweeps {
        for r in run_sweep_with_workload(&cfg, &w, param, &values)? {
            let point = r.sweep.expect("sweep runs carry their point");
            println!(
                "{:>5} = {:<4} time {:7.1} s  reuse {:.3}  moved {:8.1} MB",
                param.as_str(),
                point.value,
                r.metrics.completion_time_s,
                r.metrics.reuse_rate,
                r.metrics.data_transfer_mb
            );
        }
    }
    Ok(())
}
