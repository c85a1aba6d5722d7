//! Per-satellite reuse table: a capacity-bounded record store with one LSH
//! index per task type.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::domain::{derive_seed, PreprocessedInput, RecordId, ReuseRecord, SimTime, TaskType};
use crate::lsh::{LshError, LshIndex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScrtError {
    #[error("record of {size_mb} MB exceeds table capacity {capacity_mb} MB")]
    Oversized { size_mb: f64, capacity_mb: f64 },
    #[error("record {0} not in table")]
    UnknownId(RecordId),
    #[error(transparent)]
    Lsh(#[from] LshError),
}

/// Hash-geometry parameters shared by every index of one table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LshParams {
    pub dim: usize,
    pub tables: usize,
    pub functions: usize,
}

#[derive(Debug, Clone)]
pub struct Scrt {
    capacity_mb: f64,
    lsh: LshParams,
    seed: u64,
    records: BTreeMap<RecordId, ReuseRecord>,
    indexes: BTreeMap<TaskType, LshIndex>,
    next_id: u64,
}

impl Scrt {
    /// `seed` fixes the hyperplanes; each task type draws its own from it.
    pub fn new(capacity_mb: f64, lsh: LshParams, seed: u64) -> Self {
        Self {
            capacity_mb,
            lsh,
            seed,
            records: BTreeMap::new(),
            indexes: BTreeMap::new(),
            next_id: 0,
        }
    }

    pub fn capacity_mb(&self) -> f64 {
        self.capacity_mb
    }

    /// Sum of record sizes, recomputed in id order.
    pub fn used_mb(&self) -> f64 {
        self.records.values().fold(0.0, |acc, r| acc + r.size_mb())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: RecordId) -> Option<&ReuseRecord> {
        self.records.get(&id)
    }

    pub fn records(&self) -> impl Iterator<Item = (RecordId, &ReuseRecord)> {
        self.records.iter().map(|(id, r)| (*id, r))
    }

    pub fn index(&self, task_type: TaskType) -> Option<&LshIndex> {
        self.indexes.get(&task_type)
    }

    fn index_mut(&mut self, task_type: TaskType) -> Result<&mut LshIndex, ScrtError> {
        if !self.indexes.contains_key(&task_type) {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[u64::from(task_type.0)]));
            let idx = LshIndex::new(self.lsh.dim, self.lsh.tables, self.lsh.functions, &mut rng)?;
            self.indexes.insert(task_type, idx);
        }
        Ok(self.indexes.get_mut(&task_type).expect("just inserted"))
    }

    /// Stores `r` and evicts as needed. Returns the new id and the evicted ids
    /// in eviction order.
    pub fn insert_record(&mut self, r: ReuseRecord) -> Result<(RecordId, Vec<RecordId>), ScrtError> {
        match self.insert_protected(r, &BTreeSet::new())? {
            Some(done) => Ok(done),
            None => unreachable!("evicting every resident always makes room"),
        }
    }

    /// Inserts unless that would require evicting a protected record, in which
    /// case nothing changes and `Ok(None)` is returned.
    fn insert_protected(
        &mut self,
        r: ReuseRecord,
        protected: &BTreeSet<RecordId>,
    ) -> Result<Option<(RecordId, Vec<RecordId>)>, ScrtError> {
        let size = r.size_mb();
        if size > self.capacity_mb {
            return Err(ScrtError::Oversized {
                size_mb: size,
                capacity_mb: self.capacity_mb,
            });
        }
        if r.preprocessed.len() != self.lsh.dim {
            return Err(LshError::DimensionMismatch {
                expected: self.lsh.dim,
                actual: r.preprocessed.len(),
            }
            .into());
        }

        // Plan evictions before touching anything.
        let mut order: Vec<(u64, SimTime, RecordId, f64)> = self
            .records
            .iter()
            .filter(|(id, _)| !protected.contains(id))
            .map(|(id, rec)| (rec.reuse_count, rec.inserted_at, *id, rec.size_mb()))
            .collect();
        order.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut victims = Vec::new();
        let mut remaining: BTreeMap<RecordId, f64> =
            self.records.iter().map(|(id, rec)| (*id, rec.size_mb())).collect();
        let mut queue = order.into_iter();
        while remaining.values().sum::<f64>() + size > self.capacity_mb {
            match queue.next() {
                Some((_, _, id, _)) => {
                    remaining.remove(&id);
                    victims.push(id);
                }
                None => return Ok(None),
            }
        }

        for id in &victims {
            self.evict(*id)?;
        }
        let id = RecordId(self.next_id);
        self.next_id += 1;
        let task_type = r.task_type;
        let vector = r.preprocessed.clone();
        self.index_mut(task_type)?.insert(id, vector.unit())?;
        self.records.insert(id, r);
        Ok(Some((id, victims)))
    }

    fn evict(&mut self, id: RecordId) -> Result<(), ScrtError> {
        let rec = self.records.remove(&id).ok_or(ScrtError::UnknownId(id))?;
        self.index_mut(rec.task_type)?.remove(id)?;
        Ok(())
    }

    pub fn bump_reuse(&mut self, id: RecordId) -> Result<u64, ScrtError> {
        let rec = self.records.get_mut(&id).ok_or(ScrtError::UnknownId(id))?;
        rec.reuse_count += 1;
        Ok(rec.reuse_count)
    }

    /// Up to `tau` records by reuse count (desc), then newest, then lowest id.
    pub fn top_records(&self, tau: usize) -> Vec<ReuseRecord> {
        self.top_ids(tau)
            .into_iter()
            .map(|id| self.records[&id].clone())
            .collect()
    }

    pub fn top_ids(&self, tau: usize) -> Vec<RecordId> {
        let mut all: Vec<(&RecordId, &ReuseRecord)> = self.records.iter().collect();
        all.sort_by(|(ia, a), (ib, b)| {
            b.reuse_count
                .cmp(&a.reuse_count)
                .then(b.inserted_at.total_cmp(&a.inserted_at))
                .then(ia.cmp(ib))
        });
        all.into_iter().take(tau).map(|(id, _)| *id).collect()
    }

    fn identical(&self, r: &ReuseRecord) -> Option<RecordId> {
        let unit = r.preprocessed.unit();
        self.records
            .iter()
            .find(|(_, own)| {
                own.task_type == r.task_type
                    && own.preprocessed.unit().len() == unit.len()
                    && own
                        .preprocessed
                        .unit()
                        .iter()
                        .zip(unit)
                        .all(|(a, b)| a.to_bits() == b.to_bits())
            })
            .map(|(id, _)| *id)
    }

    /// Installs records received from another satellite with their counts
    /// reset. Exact duplicates and records that would only fit by evicting a
    /// member of the same batch are skipped; a resident duplicate counts as a
    /// batch member. Returns `(installed, skipped)`.
    pub fn install_shared(
        &mut self,
        batch: &[ReuseRecord],
        now: SimTime,
    ) -> Result<(usize, usize), ScrtError> {
        let mut batch_ids = BTreeSet::new();
        let (mut installed, mut skipped) = (0, 0);
        for incoming in batch {
            if let Some(id) = self.identical(incoming) {
                batch_ids.insert(id);
                skipped += 1;
                continue;
            }
            if incoming.size_mb() > self.capacity_mb {
                skipped += 1;
                continue;
            }
            let mut rec = incoming.clone();
            rec.reuse_count = 0;
            rec.inserted_at = now;
            match self.insert_protected(rec, &batch_ids)? {
                Some((id, _)) => {
                    batch_ids.insert(id);
                    installed += 1;
                }
                None => skipped += 1,
            }
        }
        Ok((installed, skipped))
    }

    /// Best cosine match for `v` among records of `task_type`.
    pub fn find_nearest(
        &self,
        v: &PreprocessedInput,
        task_type: TaskType,
    ) -> Result<Option<RecordId>, ScrtError> {
        let Some(idx) = self.indexes.get(&task_type) else {
            return Ok(None);
        };
        Ok(idx.find_nearest_neighbor(v.unit(), |id| {
            self.records.get(&id).map(|r| r.preprocessed.unit())
        })?)
    }

    /// Structured snapshot of the table for debugging and fixtures.
    pub fn dump(&self) -> ScrtDump {
        ScrtDump {
            capacity_mb: self.capacity_mb,
            used_mb: self.used_mb(),
            records: self
                .records
                .iter()
                .map(|(id, r)| RecordDump {
                    id: *id,
                    task_type: r.task_type,
                    label: r.output.label,
                    reuse_count: r.reuse_count,
                    inserted_at: r.inserted_at,
                    size_mb: r.size_mb(),
                    signatures: self
                        .indexes
                        .get(&r.task_type)
                        .map(|idx| {
                            (0..idx.num_tables())
                                .map(|t| idx.signature(t, r.preprocessed.unit()).unwrap_or(0))
                                .collect()
                        })
                        .unwrap_or_default(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScrtDump {
    pub capacity_mb: f64,
    pub used_mb: f64,
    pub records: Vec<RecordDump>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordDump {
    pub id: RecordId,
    pub task_type: TaskType,
    pub label: u32,
    pub reuse_count: u64,
    pub inserted_at: SimTime,
    pub size_mb: f64,
    pub signatures: Vec<u64>,
}

impl ScrtDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump is plain data")
    }
}
