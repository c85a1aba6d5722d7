//! Collaborative reuse: collaboration-area construction, source election and
//! record broadcast.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::channel::{broadcast_cost_s, ChannelError, ChannelParams, GridGeometry, TransferPricing};
use crate::domain::{GridPosition, ReuseRecord, SimTime};
use crate::reuse::SatelliteState;
use crate::scrt::ScrtError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CollabError {
    #[error("collaboration area is already expanded")]
    AlreadyExpanded,
    #[error("no candidate left once the requester is excluded")]
    EmptyAfterExclusion,
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Scrt(#[from] ScrtError),
}

/// Cell reads performed while building areas and searching them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Probes(pub u64);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoArea {
    pub requester: GridPosition,
    /// Row-major, unique.
    pub members: Vec<GridPosition>,
    /// 1 for the initial neighborhood, 2 once expanded, 0 for the whole grid.
    pub level: u8,
}

impl CoArea {
    pub fn contains(&self, p: GridPosition) -> bool {
        self.members.binary_search(&p).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Scans the grid for every cell within Chebyshev distance 1 of `req`.
pub fn get_co_area(req: GridPosition, n: usize, torus: bool, probes: &mut Probes) -> CoArea {
    CoArea {
        requester: req,
        members: neighborhood(req, n, torus, probes).into_iter().collect(),
        level: 1,
    }
}

fn neighborhood(center: GridPosition, n: usize, torus: bool, probes: &mut Probes) -> BTreeSet<GridPosition> {
    let mut out = BTreeSet::new();
    for idx in 0..n * n {
        probes.0 += 1;
        let p = GridPosition::from_index(idx, n);
        if center.chebyshev(&p, n, torus) <= 1 {
            out.insert(p);
        }
    }
    out
}

/// Union of the neighborhoods of every member of a level-1 area.
pub fn get_expanded_co_area(
    area: &CoArea,
    n: usize,
    torus: bool,
    probes: &mut Probes,
) -> Result<CoArea, CollabError> {
    if area.level != 1 {
        return Err(CollabError::AlreadyExpanded);
    }
    let mut members = BTreeSet::new();
    for &m in &area.members {
        members.extend(neighborhood(m, n, torus, probes));
    }
    Ok(CoArea {
        requester: area.requester,
        members: members.into_iter().collect(),
        level: 2,
    })
}

/// Every satellite of the grid.
pub fn whole_grid(req: GridPosition, n: usize, probes: &mut Probes) -> CoArea {
    probes.0 += (n * n) as u64;
    CoArea {
        requester: req,
        members: (0..n * n).map(|i| GridPosition::from_index(i, n)).collect(),
        level: 0,
    }
}

/// Member with the highest score other than `exclude`; ties go to the first
/// in row-major order.
pub fn find_srs_max(
    area: &CoArea,
    srs_of: impl Fn(GridPosition) -> f64,
    exclude: GridPosition,
    probes: &mut Probes,
) -> Result<(GridPosition, f64), CollabError> {
    let mut best: Option<(GridPosition, f64)> = None;
    for &m in &area.members {
        probes.0 += 1;
        if m == exclude {
            continue;
        }
        let s = srs_of(m);
        if best.map_or(true, |(_, b)| s > b) {
            best = Some((m, s));
        }
    }
    best.ok_or(CollabError::EmptyAfterExclusion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollabMode {
    /// Neighborhood election, optionally retried once on the expanded area.
    Local { expand: bool },
    /// Global election over the whole grid with no source threshold.
    Global,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SccrParams {
    pub th_co: f64,
    pub tau: usize,
    pub mode: CollabMode,
    pub torus: bool,
    pub pricing: TransferPricing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CollabOutcome {
    Helped,
    NoSourceFound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollabEvent {
    pub requester: GridPosition,
    pub source: Option<GridPosition>,
    pub source_srs: Option<f64>,
    pub area: CoArea,
    pub records_shared: usize,
    /// Sum of every receiver's transfer time.
    pub psi_s: f64,
    pub mb: f64,
    /// Transfer time per receiver.
    pub receivers: Vec<(GridPosition, f64)>,
    pub outcome: CollabOutcome,
    pub probes: Probes,
}

/// An election result together with the record batch it ships.
#[derive(Debug, Clone)]
pub struct BroadcastPlan {
    pub event: CollabEvent,
    pub records: Vec<ReuseRecord>,
}

/// Elects a source for `req` and prices its broadcast without installing
/// anything. `states` is indexed by [`GridPosition::index`].
pub fn plan_sccr(
    req: GridPosition,
    n: usize,
    states: &[SatelliteState],
    params: &SccrParams,
    channel: &ChannelParams,
    geo: &GridGeometry,
) -> Result<BroadcastPlan, CollabError> {
    let mut probes = Probes::default();
    let srs_of = |p: GridPosition| states[p.index(n)].srs();

    let elected = match params.mode {
        CollabMode::Global => {
            let area = whole_grid(req, n, &mut probes);
            match find_srs_max(&area, srs_of, req, &mut probes) {
                Ok(found) => Some((area, found)),
                Err(CollabError::EmptyAfterExclusion) => None,
                Err(e) => return Err(e),
            }
        }
        CollabMode::Local { expand } => {
            let area = get_co_area(req, n, params.torus, &mut probes);
            let first = local_candidate(&area, srs_of, req, params.th_co, &mut probes)?;
            match first {
                Some(found) => Some((area, found)),
                None if expand => {
                    let wide = get_expanded_co_area(&area, n, params.torus, &mut probes)?;
                    local_candidate(&wide, srs_of, req, params.th_co, &mut probes)?
                        .map(|found| (wide, found))
                }
                None => None,
            }
        }
    };

    let Some((area, (source, source_srs))) = elected else {
        let area = match params.mode {
            CollabMode::Global => whole_grid(req, n, &mut Probes::default()),
            CollabMode::Local { .. } => get_co_area(req, n, params.torus, &mut Probes::default()),
        };
        return Ok(BroadcastPlan {
            event: CollabEvent {
                requester: req,
                source: None,
                source_srs: None,
                area,
                records_shared: 0,
                psi_s: 0.0,
                mb: 0.0,
                receivers: Vec::new(),
                outcome: CollabOutcome::NoSourceFound,
                probes,
            },
            records: Vec::new(),
        });
    };

    let records = states[source.index(n)].scrt.top_records(params.tau);
    let receivers: Vec<GridPosition> = area.members.iter().copied().filter(|&m| m != source).collect();
    let cost = broadcast_cost_s(source, &receivers, &records, geo, channel, params.pricing)?;
    Ok(BroadcastPlan {
        event: CollabEvent {
            requester: req,
            source: Some(source),
            source_srs: Some(source_srs),
            area,
            records_shared: records.len(),
            psi_s: cost.seconds,
            mb: cost.mb,
            receivers: cost.per_member,
            outcome: CollabOutcome::Helped,
            probes,
        },
        records,
    })
}

fn local_candidate(
    area: &CoArea,
    srs_of: impl Fn(GridPosition) -> f64,
    req: GridPosition,
    th_co: f64,
    probes: &mut Probes,
) -> Result<Option<(GridPosition, f64)>, CollabError> {
    match find_srs_max(area, srs_of, req, probes) {
        Ok((pos, s)) if s > th_co => Ok(Some((pos, s))),
        Ok(_) | Err(CollabError::EmptyAfterExclusion) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs one complete collaboration round: election, pricing and immediate
/// installation on every receiver.
pub fn run_sccr(
    req: GridPosition,
    n: usize,
    states: &mut [SatelliteState],
    params: &SccrParams,
    channel: &ChannelParams,
    geo: &GridGeometry,
    now: SimTime,
) -> Result<CollabEvent, CollabError> {
    let plan = plan_sccr(req, n, states, params, channel, geo)?;
    for (pos, _) in &plan.event.receivers {
        states[pos.index(n)].scrt.install_shared(&plan.records, now)?;
    }
    Ok(plan.event)
}
