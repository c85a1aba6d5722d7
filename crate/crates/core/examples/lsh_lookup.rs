//! Hyperplane LSH: bucket layout and approximate nearest-neighbor lookup.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use satreuse::domain::RecordId;
use satreuse::lsh::LshIndex;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = 32;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut index = LshIndex::new(dim, 2, 3, &mut rng)?;
    let stored: Vec<Vec<f64>> = (0..200)
        .map(|_| unit((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()))
        .collect();
    for (i, v) in stored.iter().enumerate() {
        index.insert(RecordId(i as u64), v)?;
    }
    for t in 0..index.num_tables() {
        let sizes: Vec<usize> = index.buckets(t).unwrap().values().map(Vec::len).collect();
        println!("table {t}: {} buckets, sizes {sizes:?}", sizes.len());
    }

    // a slightly perturbed copy of record 42
    let query = unit(stored[42].iter().map(|x| x + 0.05 * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>());
    let candidates = index.candidates(&query)?;
    let best = index.find_nearest_neighbor(&query, |id| stored.get(id.0 as usize).map(Vec::as_slice))?;
    println!("{} candidates, nearest {best:?}", candidates.len());
    Ok(())
}
