//! Random-hyperplane LSH index over unit-normalized inputs.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::domain::RecordId;
use crate::similarity::dot;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LshError {
    #[error("vector has dimension {actual}, index expects {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("record {0} already indexed")]
    DuplicateId(RecordId),
    #[error("record {0} not indexed")]
    UnknownId(RecordId),
    #[error("table {0} does not exist")]
    NoSuchTable(usize),
    #[error("need at least one table and 1..=64 functions per table")]
    BadShape,
}

/// Signature of one vector in one table: bit `j` is set iff the vector lies on
/// the non-negative side of hyperplane `j`.
pub type Signature = u64;

#[derive(Debug, Clone)]
struct Table {
    /// `functions` normals of length `dim`, stored contiguously.
    normals: Vec<f64>,
    buckets: BTreeMap<Signature, Vec<RecordId>>,
}

#[derive(Debug, Clone)]
pub struct LshIndex {
    dim: usize,
    functions: usize,
    tables: Vec<Table>,
    /// Signature of every indexed id in each table, used for removal.
    members: BTreeMap<RecordId, Vec<Signature>>,
}

impl LshIndex {
    /// Draws `tables * functions` unit normals of dimension `dim` from `rng`.
    pub fn new<R: Rng + ?Sized>(
        dim: usize,
        tables: usize,
        functions: usize,
        rng: &mut R,
    ) -> Result<Self, LshError> {
        if tables == 0 || !(1..=64).contains(&functions) || dim == 0 {
            return Err(LshError::BadShape);
        }
        let tables = (0..tables)
            .map(|_| {
                let mut normals = Vec::with_capacity(functions * dim);
                for _ in 0..functions {
                    let start = normals.len();
                    normals.extend((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
                    let norm = dot(&normals[start..], &normals[start..]).sqrt();
                    normals[start..].iter_mut().for_each(|v| *v /= norm);
                }
                Table {
                    normals,
                    buckets: BTreeMap::new(),
                }
            })
            .collect();
        Ok(Self {
            dim,
            functions,
            tables,
            members: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn num_functions(&self) -> usize {
        self.functions
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: RecordId) -> bool {
        self.members.contains_key(&id)
    }

    /// Unit normal of hyperplane `function` in `table`.
    pub fn hyperplane(&self, table: usize, function: usize) -> &[f64] {
        let start = function * self.dim;
        &self.tables[table].normals[start..start + self.dim]
    }

    pub fn signature(&self, table: usize, v: &[f64]) -> Result<Signature, LshError> {
        self.check_dim(v)?;
        let t = self.tables.get(table).ok_or(LshError::NoSuchTable(table))?;
        Ok(signature_of(&t.normals, self.dim, v))
    }

    fn check_dim(&self, v: &[f64]) -> Result<(), LshError> {
        if v.len() != self.dim {
            return Err(LshError::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(())
    }

    fn signatures(&self, v: &[f64]) -> Result<Vec<Signature>, LshError> {
        self.check_dim(v)?;
        Ok(self
            .tables
            .iter()
            .map(|t| signature_of(&t.normals, self.dim, v))
            .collect())
    }

    pub fn insert(&mut self, id: RecordId, v: &[f64]) -> Result<(), LshError> {
        if self.members.contains_key(&id) {
            return Err(LshError::DuplicateId(id));
        }
        let sigs = self.signatures(v)?;
        for (table, sig) in self.tables.iter_mut().zip(&sigs) {
            table.buckets.entry(*sig).or_default().push(id);
        }
        self.members.insert(id, sigs);
        Ok(())
    }

    pub fn remove(&mut self, id: RecordId) -> Result<(), LshError> {
        let sigs = self.members.remove(&id).ok_or(LshError::UnknownId(id))?;
        for (table, sig) in self.tables.iter_mut().zip(sigs) {
            if let Some(bucket) = table.buckets.get_mut(&sig) {
                bucket.retain(|x| *x != id);
                if bucket.is_empty() {
                    table.buckets.remove(&sig);
                }
            }
        }
        Ok(())
    }

    /// Union over tables of the bucket `v` hashes to.
    pub fn candidates(&self, v: &[f64]) -> Result<BTreeSet<RecordId>, LshError> {
        let sigs = self.signatures(v)?;
        let mut out = BTreeSet::new();
        for (table, sig) in self.tables.iter().zip(sigs) {
            if let Some(bucket) = table.buckets.get(&sig) {
                out.extend(bucket.iter().copied());
            }
        }
        Ok(out)
    }

    /// Candidate with the highest cosine to `v`; ties go to the lowest id.
    ///
    /// `vector_of` resolves an indexed id to its unit vector.
    pub fn find_nearest_neighbor<'a, F>(
        &self,
        v: &[f64],
        vector_of: F,
    ) -> Result<Option<RecordId>, LshError>
    where
        F: Fn(RecordId) -> Option<&'a [f64]>,
    {
        let mut best: Option<(RecordId, f64)> = None;
        for id in self.candidates(v)? {
            let Some(u) = vector_of(id) else { continue };
            let score = dot(u, v);
            // candidates iterate in ascending id order, so strict > keeps the lowest id on ties
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((id, score));
            }
        }
        Ok(best.map(|(id, _)| id))
    }

    /// Bucket contents of one table, for tests and debugging.
    pub fn buckets(&self, table: usize) -> Option<&BTreeMap<Signature, Vec<RecordId>>> {
        self.tables.get(table).map(|t| &t.buckets)
    }
}

fn signature_of(normals: &[f64], dim: usize, v: &[f64]) -> Signature {
    normals
        .chunks_exact(dim)
        .enumerate()
        .fold(0, |sig, (j, n)| if dot(n, v) >= 0.0 { sig | (1 << j) } else { sig })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = dot(&v, &v).sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        unit((0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
    }

    fn index(seed: u64, dim: usize, tables: usize, functions: usize) -> LshIndex {
        LshIndex::new(dim, tables, functions, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn hyperplane_normal_sets_its_own_bit() {
        let idx = index(1, 8, 1, 2);
        let h0 = idx.hyperplane(0, 0).to_vec();
        assert_eq!(idx.signature(0, &h0).unwrap() & 1, 1);
    }

    #[test]
    fn negation_flips_non_orthogonal_bits() {
        let idx = index(2, 16, 2, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unit(&mut rng, 16);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        for t in 0..2 {
            let a = idx.signature(t, &v).unwrap();
            let b = idx.signature(t, &neg).unwrap();
            for j in 0..8 {
                if dot(idx.hyperplane(t, j), &v) != 0.0 {
                    assert_ne!((a >> j) & 1, (b >> j) & 1);
                }
            }
        }
    }

    #[test]
    fn identical_vectors_share_signatures() {
        let idx = index(4, 16, 3, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_unit(&mut rng, 16);
        let w = v.clone();
        for t in 0..3 {
            assert_eq!(idx.signature(t, &v), idx.signature(t, &w));
        }
    }

    #[test]
    fn signature_rejects_wrong_dimension() {
        let idx = index(6, 4, 1, 2);
        assert!(matches!(
            idx.signature(0, &[1.0, 0.0]),
            Err(LshError::DimensionMismatch { expected: 4, actual: 2 })
        ));
        assert!(matches!(idx.signature(3, &[1.0; 4]), Err(LshError::NoSuchTable(3))));
    }

    #[test]
    fn insert_then_query_finds_id() {
        let mut idx = index(7, 8, 1, 2);
        let v = unit(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        idx.insert(RecordId(9), &v).unwrap();
        assert!(idx.candidates(&v).unwrap().contains(&RecordId(9)));
        assert_eq!(idx.insert(RecordId(9), &v), Err(LshError::DuplicateId(RecordId(9))));
    }

    #[test]
    fn vectors_on_opposite_sides_of_first_hyperplane_split() {
        // With fixed seeded hyperplanes, take h0 and -h0: bit 0 differs, so the
        // two inserts land in different buckets.
        let mut idx = index(8, 8, 1, 2);
        let a = idx.hyperplane(0, 0).to_vec();
        let b: Vec<f64> = a.iter().map(|x| -x).collect();
        idx.insert(RecordId(1), &a).unwrap();
        idx.insert(RecordId(2), &b).unwrap();
        let sa = idx.signature(0, &a).unwrap();
        let sb = idx.signature(0, &b).unwrap();
        assert_ne!(sa & 1, sb & 1);
        assert_eq!(idx.buckets(0).unwrap().len(), 2);
    }

    #[test]
    fn remove_cases() {
        let mut idx = index(10, 8, 2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_unit(&mut rng, 8);
        idx.insert(RecordId(1), &a).unwrap();
        idx.insert(RecordId(2), &a).unwrap();
        idx.remove(RecordId(1)).unwrap();
        let c = idx.candidates(&a).unwrap();
        assert!(!c.contains(&RecordId(1)));
        assert!(c.contains(&RecordId(2)));
        assert_eq!(idx.remove(RecordId(1)), Err(LshError::UnknownId(RecordId(1))));
        idx.remove(RecordId(2)).unwrap();
        assert!(idx.buckets(0).unwrap().is_empty());
    }

    #[test]
    fn nearest_neighbor_basics() {
        let idx = index(12, 8, 1, 2);
        let v = unit(vec![1.0; 8]);
        assert_eq!(idx.find_nearest_neighbor(&v, |_| None).unwrap(), None);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut idx = index(14, 8, 1, 1);
        let mut store = BTreeMap::new();
        for i in 0..20u64 {
            let u = random_unit(&mut rng, 8);
            idx.insert(RecordId(i), &u).unwrap();
            store.insert(RecordId(i), u);
        }
        idx.insert(RecordId(99), &v).unwrap();
        store.insert(RecordId(99), v.clone());
        let got = idx
            .find_nearest_neighbor(&v, |id| store.get(&id).map(Vec::as_slice))
            .unwrap();
        assert_eq!(got, Some(RecordId(99)));
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let mut idx = index(15, 4, 1, 2);
        let v = unit(vec![1.0, 1.0, 0.0, 0.0]);
        for id in [5u64, 3, 8] {
            idx.insert(RecordId(id), &v).unwrap();
        }
        let got = idx.find_nearest_neighbor(&v, |_| Some(v.as_slice())).unwrap();
        assert_eq!(got, Some(RecordId(3)));
    }

    #[test]
    fn seeded_construction_is_deterministic() {
        let a = index(16, 32, 2, 3);
        let b = index(16, 32, 2, 3);
        for t in 0..2 {
            for j in 0..3 {
                assert_eq!(a.hyperplane(t, j), b.hyperplane(t, j));
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn remove_undoes_insert(seed in any::<u64>(), n in 1usize..20, victim in 0usize..20) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut idx = LshIndex::new(6, 2, 3, &mut rng).unwrap();
                let vecs: Vec<Vec<f64>> = (0..n).map(|_| random_unit(&mut rng, 6)).collect();
                for (i, v) in vecs.iter().enumerate().filter(|(i, _)| *i != victim % n) {
                    idx.insert(RecordId(i as u64), v).unwrap();
                }
                let before: Vec<_> = (0..2).map(|t| idx.buckets(t).unwrap().clone()).collect();
                let id = RecordId((victim % n) as u64);
                idx.insert(id, &vecs[victim % n]).unwrap();
                idx.remove(id).unwrap();
                let after: Vec<_> = (0..2).map(|t| idx.buckets(t).unwrap().clone()).collect();
                prop_assert_eq!(before, after);
            }
        }
    }
}
