//! SSIM and cosine similarity between a prototype and noisy copies of it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use satreuse::domain::{GrayImage, InputData};
use satreuse::similarity::{cosine, preprocess, ssim, SsimConstants};
use satreuse::workload::prototype;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = prototype(8, 128, 128, &mut rng);
    let other = prototype(8, 128, 128, &mut rng);
    let k = SsimConstants::default();
    let reference = preprocess(&InputData::new(1.0, base.clone(), 0)?, (64, 64))?;

    for sigma in [0.0f64, 0.02, 0.1, 0.3] {
        let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE))?;
        let px = base
            .pixels()
            .iter()
            .map(|&v| (f64::from(v) + noise.sample(&mut rng)).clamp(0.0, 1.0) as f32)
            .collect();
        let noisy = preprocess(&InputData::new(1.0, GrayImage::new(128, 128, px)?, 0)?, (64, 64))?;
        println!(
            "sigma {sigma:4.2}: ssim {:.4}  cosine {:.4}",
            ssim(&reference, &noisy, &k)?,
            cosine(&reference, &noisy)?
        );
    }
    let unrelated = preprocess(&InputData::new(1.0, other, 1)?, (64, 64))?;
    println!("other class: ssim {:.4}", ssim(&reference, &unrelated, &k)?);
    Ok(())
}
