//! Writes a small PGM dataset to a temporary directory, ingests it and runs
//! local reuse on it.
//!
//! Pass a directory laid out as `<root>/<class>/<image>.pgm` to use real data.

use std::fs;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use satreuse::domain::{ScenarioConfig, ScenarioKind};
use satreuse::engine::{build_workload, run_with_workload};
use satreuse::workload::{prototype, WorkloadSpec};

fn write_pgm(path: &PathBuf, w: usize, h: usize, px: &[f32]) -> std::io::Result<()> {
    let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
    bytes.extend(px.iter().map(|v| (v * 255.0).round() as u8));
    fs::write(path, bytes)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = match std::env::args().nth(1) {
        Some(dir) => PathBuf::from(dir),
        None => {
            let root = std::env::temp_dir().join("satreuse-pgm-demo");
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for class in ["farmland", "harbor", "runway"] {
                let dir = root.join(class);
                fs::create_dir_all(&dir)?;
                let img = prototype(6, 48, 48, &mut rng);
                for i in 0..12 {
                    write_pgm(&dir.join(format!("{i:02}.pgm")), 48, 48, img.pixels())?;
                }
            }
            root
        }
    };

    let cfg = ScenarioConfig {
        n: 2,
        scenario: ScenarioKind::Slcr,
        workload: WorkloadSpec {
            total_tasks: 36,
            total_mb: 36.0 * 20.5,
            image_width: 48,
            image_height: 48,
            dataset_dir: Some(root.clone()),
            ..Default::default()
        },
        ..Default::default()
    }
    .validate()?;
    let w = build_workload(&cfg)?;
    println!("ingested {} tasks in {} classes from {}", w.total_tasks(), w.prototypes.len(), root.display());
    let r = run_with_workload(&cfg, &w)?;
    println!(
        "reuse rate {:.3}, accuracy {:.3}, completion {:.1} s",
        r.metrics.reuse_rate, r.metrics.reuse_accuracy, r.metrics.completion_time_s
    );
    Ok(())
}
