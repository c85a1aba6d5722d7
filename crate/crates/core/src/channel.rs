//! Inter-satellite link model: Shannon rate over a free-space link, grid
//! geometry, and the cost of broadcasting a record batch.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{axis_delta, ConfigError, GridPosition, ReuseRecord};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Bits per (decimal) megabyte.
pub const BITS_PER_MB: f64 = 8.0e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("source and destination are both {0}")]
    SamePosition(GridPosition),
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("broadcast area has no receivers")]
    EmptyArea,
    #[error("link {from} -> {to} has zero capacity")]
    ZeroRate { from: GridPosition, to: GridPosition },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    pub bandwidth_hz: f64,
    pub tx_power_w: f64,
    /// Linear transmit antenna gain.
    pub gain_tx: f64,
    /// Linear receive antenna gain.
    pub gain_rx: f64,
    pub carrier_hz: f64,
    pub noise_temp_k: f64,
    pub boltzmann: f64,
    pub altitude_km: f64,
    pub earth_radius_km: f64,
    /// Satellites per orbital plane; defaults to the grid side.
    pub sats_per_plane: Option<usize>,
    /// Spacing between adjacent planes; defaults to the in-plane spacing.
    pub inter_plane_km: Option<f64>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            bandwidth_hz: 20.0e6,
            tx_power_w: 10.0,
            gain_tx: 1.0e4,
            gain_rx: 1.0e4,
            carrier_hz: 26.0e9,
            noise_temp_k: 290.0,
            boltzmann: BOLTZMANN,
            altitude_km: 550.0,
            earth_radius_km: 6371.0,
            sats_per_plane: None,
            inter_plane_km: None,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let checks = [
            ("channel.bandwidth_hz", self.bandwidth_hz),
            ("channel.tx_power_w", self.tx_power_w),
            ("channel.gain_tx", self.gain_tx),
            ("channel.gain_rx", self.gain_rx),
            ("channel.carrier_hz", self.carrier_hz),
            ("channel.noise_temp_k", self.noise_temp_k),
            ("channel.boltzmann", self.boltzmann),
            ("channel.altitude_km", self.altitude_km),
            ("channel.earth_radius_km", self.earth_radius_km),
            ("channel.inter_plane_km", self.inter_plane_km.unwrap_or(1.0)),
        ];
        for (field, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid {
                    field: field.to_string(),
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        if matches!(self.sats_per_plane, Some(s) if s < 2) {
            return Err(ConfigError::Invalid {
                field: "channel.sats_per_plane".to_string(),
                reason: "need at least 2 satellites per plane".to_string(),
            });
        }
        Ok(())
    }
}

/// How a broadcast to a non-adjacent member is priced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferPricing {
    /// One direct link from source to each member.
    Direct,
    /// Store-and-forward along a shortest grid route, summing hop times.
    MultiHop,
}

/// Physical embedding of the satellite grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub n: usize,
    pub torus: bool,
    /// Distance between in-plane neighbors (adjacent columns).
    pub d_intra_m: f64,
    /// Distance between adjacent planes (adjacent rows).
    pub d_inter_m: f64,
}

impl GridGeometry {
    pub fn new(p: &ChannelParams, n: usize, torus: bool) -> Self {
        let ns = p.sats_per_plane.unwrap_or(n).max(2);
        let d_intra_m = 2.0 * (p.earth_radius_km + p.altitude_km) * 1e3 * (PI / ns as f64).sin();
        let d_inter_m = p.inter_plane_km.map_or(d_intra_m, |km| km * 1e3);
        Self {
            n,
            torus,
            d_intra_m,
            d_inter_m,
        }
    }

    fn deltas(&self, a: GridPosition, b: GridPosition) -> (usize, usize) {
        (
            axis_delta(a.row, b.row, self.n, self.torus),
            axis_delta(a.col, b.col, self.n, self.torus),
        )
    }

    /// Euclidean distance over the grid embedding.
    pub fn distance_m(&self, a: GridPosition, b: GridPosition) -> Result<f64, ChannelError> {
        if a == b {
            return Err(ChannelError::SamePosition(a));
        }
        let (dr, dc) = self.deltas(a, b);
        Ok((dr as f64 * self.d_inter_m).hypot(dc as f64 * self.d_intra_m))
    }
}

/// Free-space path loss `(4 pi f d / c)^2`.
pub fn path_loss(dist_m: f64, p: &ChannelParams) -> Result<f64, ChannelError> {
    if !(dist_m > 0.0) {
        return Err(ChannelError::NonPositiveDistance(dist_m));
    }
    Ok((4.0 * PI * p.carrier_hz * dist_m / SPEED_OF_LIGHT).powi(2))
}

/// Noise power `k_B T B` in watts.
pub fn noise_power(p: &ChannelParams) -> f64 {
    p.boltzmann * p.noise_temp_k * p.bandwidth_hz
}

pub fn snr_at(dist_m: f64, p: &ChannelParams) -> Result<f64, ChannelError> {
    Ok(p.tx_power_w * p.gain_tx * p.gain_rx / (noise_power(p) * path_loss(dist_m, p)?))
}

pub fn snr(
    a: GridPosition,
    b: GridPosition,
    geo: &GridGeometry,
    p: &ChannelParams,
) -> Result<f64, ChannelError> {
    snr_at(geo.distance_m(a, b)?, p)
}

/// Shannon capacity in bit/s for a given SNR.
pub fn shannon_rate(bandwidth_hz: f64, snr: f64) -> f64 {
    bandwidth_hz * (1.0 + snr).log2()
}

pub fn link_rate(
    a: GridPosition,
    b: GridPosition,
    geo: &GridGeometry,
    p: &ChannelParams,
) -> Result<f64, ChannelError> {
    Ok(shannon_rate(p.bandwidth_hz, snr(a, b, geo, p)?))
}

/// Result of pricing one broadcast.
#[derive(Debug, Clone, PartialEq)]
pub struct BroadcastCost {
    /// Sum of every member's receive time.
    pub seconds: f64,
    /// Batch size times number of receivers.
    pub mb: f64,
    /// Receive time per member, in the order given.
    pub per_member: Vec<(GridPosition, f64)>,
}

/// Prices sending `records` from `src` to every position in `members`.
pub fn broadcast_cost_s(
    src: GridPosition,
    members: &[GridPosition],
    records: &[ReuseRecord],
    geo: &GridGeometry,
    p: &ChannelParams,
    pricing: TransferPricing,
) -> Result<BroadcastCost, ChannelError> {
    if members.is_empty() {
        return Err(ChannelError::EmptyArea);
    }
    let batch_mb = records.iter().fold(0.0, |acc, r| acc + r.size_mb());
    let bits = batch_mb * BITS_PER_MB;
    let mut per_member = Vec::with_capacity(members.len());
    for &m in members {
        let t = if records.is_empty() {
            0.0
        } else {
            match pricing {
                TransferPricing::Direct => {
                    let rate = link_rate(src, m, geo, p)?;
                    if rate <= 0.0 {
                        return Err(ChannelError::ZeroRate { from: src, to: m });
                    }
                    bits / rate
                }
                TransferPricing::MultiHop => multi_hop_time(src, m, bits, geo, p)?,
            }
        };
        per_member.push((m, t));
    }
    Ok(BroadcastCost {
        seconds: per_member.iter().fold(0.0, |acc, (_, t)| acc + t),
        mb: batch_mb * members.len() as f64,
        per_member,
    })
}

fn multi_hop_time(
    src: GridPosition,
    dst: GridPosition,
    bits: f64,
    geo: &GridGeometry,
    p: &ChannelParams,
) -> Result<f64, ChannelError> {
    if src == dst {
        return Err(ChannelError::SamePosition(src));
    }
    let (dr, dc) = geo.deltas(src, dst);
    let hop = |d: f64| -> Result<f64, ChannelError> {
        Ok(bits / shannon_rate(p.bandwidth_hz, snr_at(d, p)?))
    };
    let mut t = 0.0;
    if dr > 0 {
        t += dr as f64 * hop(geo.d_inter_m)?;
    }
    if dc > 0 {
        t += dc as f64 * hop(geo.d_intra_m)?;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn geo(n: usize) -> GridGeometry {
        GridGeometry::new(&ChannelParams::default(), n, false)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn in_plane_spacing() {
        let g = geo(5);
        let expected = 2.0 * 6921.0e3 * (std::f64::consts::PI / 5.0).sin();
        let d = g.distance_m(GridPosition::new(0, 0), GridPosition::new(0, 1)).unwrap();
        assert!(rel(d, expected) < 1e-12);
        assert!((d / 1e3 - 8136.1).abs() < 1.0);
        let diag = g.distance_m(GridPosition::new(0, 0), GridPosition::new(1, 1)).unwrap();
        assert!(rel(diag, 2f64.sqrt() * d) < 1e-12);
        assert!(g.distance_m(GridPosition::new(2, 2), GridPosition::new(2, 2)).is_err());
    }

    #[test]
    fn fspl_values() {
        let p = ChannelParams::default();
        let l = path_loss(1.0e6, &p).unwrap();
        assert!(rel(l, 1.1874e18) < 1e-3);
        assert!((10.0 * l.log10() - 180.7).abs() < 0.05);
        assert!(rel(path_loss(2.0e6, &p).unwrap(), 4.0 * l) < 1e-12);
        assert!(path_loss(0.0, &p).is_err());
    }

    #[test]
    fn noise_values() {
        let mut p = ChannelParams::default();
        assert!(rel(noise_power(&p), 8.0078e-14) < 1e-4);
        let base = noise_power(&p);
        p.bandwidth_hz *= 2.0;
        assert!(rel(noise_power(&p), 2.0 * base) < 1e-15);
        p.noise_temp_k = 0.0;
        assert_eq!(noise_power(&p), 0.0);
    }

    #[test]
    fn snr_cancels_to_one() {
        let mut p = ChannelParams {
            gain_tx: 1.0,
            gain_rx: 1.0,
            ..Default::default()
        };
        let d = 2.0e6;
        p.tx_power_w = noise_power(&p) * path_loss(d, &p).unwrap();
        assert!((snr_at(d, &p).unwrap() - 1.0).abs() < 1e-12);
        let s = snr_at(d, &p).unwrap();
        assert!(rel(snr_at(d / 2.0, &p).unwrap(), 4.0 * s) < 1e-12);
    }

    #[test]
    fn shannon_values() {
        assert!(rel(shannon_rate(20e6, 31.62), 100.6e6) < 1e-3);
        assert_eq!(shannon_rate(20e6, 0.0), 0.0);
        assert_eq!(shannon_rate(20e6, 1.0), 20e6);
    }

    #[test]
    fn composed_rate_matches_hand_evaluation() {
        let p = ChannelParams::default();
        let g = geo(5);
        let a = GridPosition::new(1, 1);
        let b = GridPosition::new(1, 2);
        let d = g.d_intra_m;
        let l = (4.0 * std::f64::consts::PI * 26.0e9 * d / 2.997_924_58e8).powi(2);
        let n0 = 1.380_649e-23 * 290.0 * 20e6;
        let snr_hand = 10.0 * 1e4 * 1e4 / (n0 * l);
        assert!(rel(snr(a, b, &g, &p).unwrap(), snr_hand) < 1e-12);
        let rate = link_rate(a, b, &g, &p).unwrap();
        assert!(rel(rate, 20e6 * (1.0 + snr_hand).log2()) < 1e-12);
        assert_eq!(rate, link_rate(b, a, &g, &p).unwrap());
    }

    #[test]
    fn random_draws_match_straight_line() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = ChannelParams {
                bandwidth_hz: rng.gen_range(1e6..1e8),
                tx_power_w: rng.gen_range(0.1..50.0),
                gain_tx: rng.gen_range(1.0..1e5),
                gain_rx: rng.gen_range(1.0..1e5),
                carrier_hz: rng.gen_range(1e9..60e9),
                noise_temp_k: rng.gen_range(50.0..500.0),
                ..Default::default()
            };
            let d: f64 = rng.gen_range(1e5..1e7);
            let l = (4.0 * std::f64::consts::PI * p.carrier_hz * d / 2.997_924_58e8).powi(2);
            let n0 = 1.380_649e-23 * p.noise_temp_k * p.bandwidth_hz;
            let s = p.tx_power_w * p.gain_tx * p.gain_rx / (n0 * l);
            assert!(rel(path_loss(d, &p).unwrap(), l) < 1e-12);
            assert!(rel(noise_power(&p), n0) < 1e-12);
            assert!(rel(snr_at(d, &p).unwrap(), s) < 1e-12);
            assert!(rel(shannon_rate(p.bandwidth_hz, s), p.bandwidth_hz * (1.0 + s).log2()) < 1e-12);
        }
    }

    #[test]
    fn rate_decreases_with_distance() {
        let p = ChannelParams::default();
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let r = shannon_rate(p.bandwidth_hz, snr_at(k as f64 * 5.0e5, &p).unwrap());
            assert!(r < last);
            last = r;
        }
    }

    mod broadcast {
        use super::*;
        use crate::scrt::tests::record;

        #[test]
        fn single_record_single_member() {
            // Force the link to 15 dB.
            let mut p = ChannelParams {
                gain_tx: 1.0,
                gain_rx: 1.0,
                ..Default::default()
            };
            let g = GridGeometry::new(&p, 5, false);
            p.tx_power_w = 31.62 * noise_power(&p) * path_loss(g.d_intra_m, &p).unwrap();
            // 1.5 MB input + 0.5 MB result
            let rec = record([1.0, 0.0, 0.0, 0.0], 1.5, 0, 0.0);
            let src = GridPosition::new(0, 0);
            let cost = broadcast_cost_s(
                src,
                &[GridPosition::new(0, 1)],
                &[rec],
                &g,
                &p,
                TransferPricing::Direct,
            )
            .unwrap();
            assert!((cost.seconds - 16.0e6 / (20e6 * 32.62f64.log2())).abs() < 1e-12);
            assert!((cost.seconds - 0.159).abs() < 1e-3);
            assert_eq!(cost.mb, 2.0);
        }

        #[test]
        fn empty_cases() {
            let p = ChannelParams::default();
            let g = geo(5);
            let src = GridPosition::new(2, 2);
            let cost = broadcast_cost_s(
                src,
                &[GridPosition::new(2, 3)],
                &[],
                &g,
                &p,
                TransferPricing::Direct,
            )
            .unwrap();
            assert_eq!((cost.seconds, cost.mb), (0.0, 0.0));
            assert_eq!(
                broadcast_cost_s(src, &[], &[], &g, &p, TransferPricing::Direct),
                Err(ChannelError::EmptyArea)
            );
        }

        #[test]
        fn doubling_symmetric_area_doubles_volume() {
            let p = ChannelParams::default();
            let g = geo(5);
            let src = GridPosition::new(2, 2);
            let recs = vec![record([1.0, 2.0, 0.0, 0.0], 3.0, 0, 0.0)];
            let one = [GridPosition::new(2, 3), GridPosition::new(2, 1)];
            let two = [
                GridPosition::new(2, 3),
                GridPosition::new(2, 1),
                GridPosition::new(1, 2),
                GridPosition::new(3, 2),
            ];
            let a = broadcast_cost_s(src, &one, &recs, &g, &p, TransferPricing::Direct).unwrap();
            let b = broadcast_cost_s(src, &two, &recs, &g, &p, TransferPricing::Direct).unwrap();
            assert_eq!(b.mb, 2.0 * a.mb);
            assert!(rel(b.seconds, 2.0 * a.seconds) < 1e-12);
        }

        #[test]
        fn multi_hop_sums_hops() {
            let p = ChannelParams::default();
            let g = geo(5);
            let src = GridPosition::new(0, 0);
            let recs = vec![record([1.0, 2.0, 0.0, 0.0], 3.0, 0, 0.0)];
            let far = GridPosition::new(2, 2);
            let adj = GridPosition::new(0, 1);
            let hop = broadcast_cost_s(src, &[adj], &recs, &g, &p, TransferPricing::MultiHop).unwrap();
            let direct = broadcast_cost_s(src, &[adj], &recs, &g, &p, TransferPricing::Direct).unwrap();
            assert!(rel(hop.seconds, direct.seconds) < 1e-12);
            let multi = broadcast_cost_s(src, &[far], &recs, &g, &p, TransferPricing::MultiHop).unwrap();
            assert!(rel(multi.seconds, 4.0 * hop.seconds) < 1e-12);
        }
    }
}
