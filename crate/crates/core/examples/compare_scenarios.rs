//! Runs all five scenarios on one shared workload and prints a table.

use satreuse::domain::{ScenarioConfig, ScenarioKind};
use satreuse::engine::{build_workload, run_with_workload};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::default().validate()?;
    let w = build_workload(&cfg)?;
    println!("{:<13} {:>10} {:>7} {:>7} {:>9} {:>10}", "scenario", "time_s", "reuse", "cpu", "accuracy", "moved_mb");
    for kind in ScenarioKind::ALL {
        let m = run_with_workload(&cfg.with(|c| c.scenario = kind)?, &w)?.metrics;
        println!(
            "{:<13} {:>10.1} {:>7.3} {:>7.3} {:>9.3} {:>10.1}",
            kind.as_str(),
            m.completion_time_s,
            m.reuse_rate,
            m.cpu_occupancy,
            m.reuse_accuracy,
            m.data_transfer_mb
        );
    }
    Ok(())
}
