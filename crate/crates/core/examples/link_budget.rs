//! Prices inter-satellite links and one record broadcast on a 5x5 grid.

use satreuse::channel::{
    broadcast_cost_s, link_rate, noise_power, path_loss, snr, ChannelParams, GridGeometry, TransferPricing,
};
use satreuse::domain::{GrayImage, GridPosition, InputData, OutputData, ReuseRecord, TaskType};
use satreuse::similarity::preprocess;
use std::sync::Arc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = ChannelParams::default();
    let geo = GridGeometry::new(&p, 5, false);
    println!("in-plane spacing {:.1} km, noise {:.3e} W", geo.d_intra_m / 1e3, noise_power(&p));

    let src = GridPosition::new(2, 2);
    for dst in [GridPosition::new(2, 3), GridPosition::new(3, 3), GridPosition::new(0, 0)] {
        let d = geo.distance_m(src, dst)?;
        println!(
            "{src} -> {dst}: {:8.1} km  loss {:.1} dB  snr {:6.2} dB  rate {:7.2} Mbit/s",
            d / 1e3,
            10.0 * path_loss(d, &p)?.log10(),
            10.0 * snr(src, dst, &geo, &p)?.log10(),
            link_rate(src, dst, &geo, &p)? / 1e6
        );
    }

    let input = InputData::new(20.5, GrayImage::filled(8, 8, 0.5)?, 0)?;
    let record = ReuseRecord {
        preprocessed: Arc::new(preprocess(&input, (8, 8))?),
        input,
        task_type: TaskType(0),
        output: OutputData::new(0, 0.01)?,
        reuse_count: 0,
        inserted_at: 0.0,
    };
    let members: Vec<GridPosition> = (1..=3)
        .flat_map(|r| (1..=3).map(move |c| GridPosition::new(r, c)))
        .filter(|&m| m != src)
        .collect();
    for pricing in [TransferPricing::Direct, TransferPricing::MultiHop] {
        let batch = vec![record.clone(); 11];
        let cost = broadcast_cost_s(src, &members, &batch, &geo, &p, pricing)?;
        println!("{pricing:?}: {:.1} MB moved, {:.2} s summed over receivers", cost.mb, cost.seconds);
    }
    Ok(())
}
