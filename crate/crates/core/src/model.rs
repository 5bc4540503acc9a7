//! Anchor-vector model: incremental learning and voting prediction.
//!
//! The store holds, for every registered class `c`, subspace `p` and slot
//! `i`, an anchor subvector `y[c][p][i]` of length `d / P` and a counter
//! `n[c][p][i]`. Storage is `C * P * k` anchors and counters regardless of
//! how many examples have been learned.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feature::{sq_dist_mixed, FeatureVector};
use crate::labels::ClassTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Number of contiguous subspaces `P`.
    pub subspaces: usize,
    /// Anchors per class per subspace `k`.
    pub anchors: usize,
    /// Feature dimension `d`.
    pub dim: usize,
    /// Seed for the tie-breaking RNG.
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(subspaces: usize, anchors: usize, dim: usize, seed: u64) -> Result<Self> {
        let config = ModelConfig {
            subspaces,
            anchors,
            dim,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subspaces == 0 || self.anchors == 0 || self.dim == 0 {
            return Err(Error::InvalidConfig(format!(
                "P, k and d must be positive (P={}, k={}, d={})",
                self.subspaces, self.anchors, self.dim
            )));
        }
        if !self.dim.is_multiple_of(self.subspaces) {
            return Err(Error::InvalidConfig(format!(
                "d={} is not divisible by P={}",
                self.dim, self.subspaces
            )));
        }
        Ok(())
    }

    /// Length of one subvector, `d / P`.
    pub fn sub_dim(&self) -> usize {
        self.dim / self.subspaces
    }

    /// Reals stored per class: `P * k * d / P = k * d`.
    pub fn reals_per_class(&self) -> usize {
        self.anchors * self.dim
    }
}

/// Splits `x` into `parts` contiguous, equally sized subvectors.
pub fn split(x: &[f32], parts: usize) -> Result<Vec<&[f32]>> {
    if parts == 0 {
        return Err(Error::InvalidConfig("cannot split into 0 parts".into()));
    }
    if !x.len().is_multiple_of(parts) {
        return Err(Error::DimensionMismatch {
            expected: x.len().next_multiple_of(parts),
            actual: x.len(),
        });
    }
    Ok(x.chunks_exact(x.len() / parts).collect())
}

/// Outcome of a (possibly aggregated) vote.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    /// Winning class index in registration order.
    pub class: usize,
    pub label: String,
    /// Vote count per class index. Sums to `P` for a single input and to
    /// `R` for an aggregate over `R` variants.
    pub votes: Vec<usize>,
    /// Per-subspace winning class; empty for variant aggregates.
    pub subspace_decisions: Vec<usize>,
    /// Per-variant winning class; empty for single-input predictions.
    pub variant_decisions: Vec<usize>,
    /// Per class, the sum over subspaces (and variants) of the minimal
    /// anchor distance. Used as the tie-breaking score.
    pub class_distances: Vec<f64>,
    pub tie_broken: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnchorStore {
    config: ModelConfig,
    classes: ClassTable,
    // [class][subspace][slot][component]
    anchors: Vec<f64>,
    // [class][subspace][slot]
    counters: Vec<u64>,
    rng: ChaCha8Rng,
}

/// Raw RNG position, enough to restore the stream exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RngState {
    pub seed: [u8; 32],
    pub stream: u64,
    pub word_pos: u128,
}

impl AnchorStore {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        Ok(AnchorStore {
            config,
            classes: ClassTable::new(),
            anchors: Vec::new(),
            counters: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    /// Reassembles a store from serialized parts, checking every structural
    /// invariant.
    pub fn from_parts(
        config: ModelConfig,
        classes: ClassTable,
        anchors: Vec<f64>,
        counters: Vec<u64>,
        rng: RngState,
    ) -> Result<Self> {
        config
            .validate()
            .map_err(|e| Error::CorruptPayload(e.to_string()))?;
        let c = classes.len();
        let slots = c * config.subspaces * config.anchors;
        if counters.len() != slots || anchors.len() != slots * config.sub_dim() {
            return Err(Error::CorruptPayload(format!(
                "expected {} counters and {} anchor reals, found {} and {}",
                slots,
                slots * config.sub_dim(),
                counters.len(),
                anchors.len()
            )));
        }
        if anchors.iter().any(|v| !v.is_finite()) {
            return Err(Error::CorruptPayload("non-finite anchor value".into()));
        }
        let sub = config.sub_dim();
        for (slot, &n) in counters.iter().enumerate() {
            if n == 0
                && anchors[slot * sub..(slot + 1) * sub]
                    .iter()
                    .any(|&v| v != 0.0)
            {
                return Err(Error::CorruptPayload(format!(
                    "anchor slot {slot} has counter 0 but is not zero"
                )));
            }
        }
        let k = config.anchors;
        for (ci, block) in counters.chunks(config.subspaces * k).enumerate() {
            let first: u64 = block[..k].iter().sum();
            if block.chunks(k).any(|s| s.iter().sum::<u64>() != first) {
                return Err(Error::CorruptPayload(format!(
                    "class {ci} counters disagree across subspaces"
                )));
            }
        }
        let mut rng_ = ChaCha8Rng::from_seed(rng.seed);
        rng_.set_stream(rng.stream);
        rng_.set_word_pos(rng.word_pos);
        Ok(AnchorStore {
            config,
            classes,
            anchors,
            counters,
            rng: rng_,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn label(&self, class: usize) -> &str {
        self.classes.label(class)
    }

    pub fn anchors_raw(&self) -> &[f64] {
        &self.anchors
    }

    pub fn counters_raw(&self) -> &[u64] {
        &self.counters
    }

    pub fn rng_state(&self) -> RngState {
        RngState {
            seed: self.rng.get_seed(),
            stream: self.rng.get_stream(),
            word_pos: self.rng.get_word_pos(),
        }
    }

    fn slot_index(&self, class: usize, subspace: usize, slot: usize) -> usize {
        (class * self.config.subspaces + subspace) * self.config.anchors + slot
    }

    pub fn anchor(&self, class: usize, subspace: usize, slot: usize) -> &[f64] {
        let sub = self.config.sub_dim();
        let s = self.slot_index(class, subspace, slot);
        &self.anchors[s * sub..(s + 1) * sub]
    }

    pub fn counter(&self, class: usize, subspace: usize, slot: usize) -> u64 {
        self.counters[self.slot_index(class, subspace, slot)]
    }

    /// Anchors and counters belonging to one class.
    pub fn class_block(&self, class: usize) -> (&[f64], &[u64]) {
        let per = self.config.subspaces * self.config.anchors;
        let sub = self.config.sub_dim();
        (
            &self.anchors[class * per * sub..(class + 1) * per * sub],
            &self.counters[class * per..(class + 1) * per],
        )
    }

    /// Number of feature vectors learned for `class`.
    pub fn learned_count(&self, class: usize) -> u64 {
        self.class_block(class).1[..self.config.anchors]
            .iter()
            .sum()
    }

    /// Anchor payload in bytes: `C * k * d * bytes_per_real`. Counters and
    /// the class table are not included.
    pub fn memory_footprint(&self, bytes_per_real: usize) -> usize {
        self.num_classes() * self.config.reals_per_class() * bytes_per_real
    }

    /// Counter payload in bytes (64-bit counters).
    pub fn counter_footprint(&self) -> usize {
        self.counters.len() * std::mem::size_of::<u64>()
    }

    fn register(&mut self, label: &str) -> usize {
        let before = self.classes.len();
        let c = self.classes.get_or_insert(label);
        if c == before {
            let per = self.config.subspaces * self.config.anchors;
            self.counters.resize(self.counters.len() + per, 0);
            self.anchors
                .resize(self.anchors.len() + per * self.config.sub_dim(), 0.0);
        }
        c
    }

    /// Learns one feature vector for `label`, registering the label if it
    /// is new. Returns the class index.
    pub fn learn_one(&mut self, x: &FeatureVector, label: &str) -> Result<usize> {
        x.validate(self.config.dim)?;
        let c = self.register(label);
        self.learn_validated(x.as_slice(), c);
        Ok(c)
    }

    /// Learns every variant for `label` in order. All variants are checked
    /// before any is learned.
    pub fn learn_augmented(&mut self, variants: &[FeatureVector], label: &str) -> Result<usize> {
        if variants.is_empty() {
            return Err(Error::EmptyVariants);
        }
        for v in variants {
            v.validate(self.config.dim)?;
        }
        let c = self.register(label);
        for v in variants {
            self.learn_validated(v.as_slice(), c);
        }
        Ok(c)
    }

    fn learn_validated(&mut self, x: &[f32], class: usize) {
        let k = self.config.anchors;
        let sub = self.config.sub_dim();
        let mut penalties = vec![0.0f64; k];
        let mut ties = Vec::with_capacity(k);
        for (p, xp) in x.chunks_exact(sub).enumerate() {
            let base = self.slot_index(class, p, 0);
            for (i, r) in penalties.iter_mut().enumerate() {
                let y = &self.anchors[(base + i) * sub..(base + i + 1) * sub];
                let dist = sq_dist_mixed(xp, y).sqrt();
                *r = dist * self.counters[base + i] as f64;
            }
            let best = penalties.iter().copied().fold(f64::INFINITY, f64::min);
            ties.clear();
            ties.extend((0..k).filter(|&i| penalties[i] == best));
            let chosen = if ties.len() == 1 {
                ties[0]
            } else {
                ties[self.rng.random_range(0..ties.len())]
            };

            let s = base + chosen;
            let n = self.counters[s] as f64;
            let y = &mut self.anchors[s * sub..(s + 1) * sub];
            for (yv, &xv) in y.iter_mut().zip(xp) {
                *yv = (*yv * n + xv as f64) / (n + 1.0);
            }
            self.counters[s] += 1;
        }
    }

    /// Per-subspace nearest-anchor decisions followed by a majority vote.
    pub fn predict_one(&self, x: &FeatureVector) -> Result<Prediction> {
        x.validate(self.config.dim)?;
        let c_count = self.num_classes();
        if !(0..c_count).any(|c| self.learned_count(c) > 0) {
            return Err(Error::EmptyModel);
        }
        let p_count = self.config.subspaces;
        let sub = self.config.sub_dim();

        // min_dist[p * C + c]: nearest live anchor of class c in subspace p.
        let mut min_dist = vec![f64::INFINITY; p_count * c_count];
        for (p, xp) in x.as_slice().chunks_exact(sub).enumerate() {
            for c in 0..c_count {
                let base = self.slot_index(c, p, 0);
                let mut best = f64::INFINITY;
                for i in 0..self.config.anchors {
                    if self.counters[base + i] == 0 {
                        continue;
                    }
                    let y = &self.anchors[(base + i) * sub..(base + i + 1) * sub];
                    best = best.min(sq_dist_mixed(xp, y));
                }
                min_dist[p * c_count + c] = best.sqrt();
            }
        }

        let mut class_distances = vec![0.0f64; c_count];
        for row in min_dist.chunks_exact(c_count) {
            for (acc, &d) in class_distances.iter_mut().zip(row) {
                *acc += d;
            }
        }

        let mut votes = vec![0usize; c_count];
        let mut subspace_decisions = Vec::with_capacity(p_count);
        for row in min_dist.chunks_exact(c_count) {
            let mut winner = None::<usize>;
            for (c, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    continue;
                }
                winner = match winner {
                    None => Some(c),
                    Some(w) => {
                        let better =
                            d < row[w] || (d == row[w] && class_distances[c] < class_distances[w]);
                        Some(if better { c } else { w })
                    }
                };
            }
            let w = winner.ok_or(Error::EmptyModel)?;
            votes[w] += 1;
            subspace_decisions.push(w);
        }

        let (class, tie_broken) = resolve_vote(&votes, &class_distances);
        Ok(Prediction {
            class,
            label: self.label(class).to_owned(),
            votes,
            subspace_decisions,
            variant_decisions: Vec::new(),
            class_distances,
            tie_broken,
        })
    }

    /// Predicts each variant independently, then takes a second majority
    /// vote over the per-variant labels.
    pub fn predict_augmented(&self, variants: &[FeatureVector]) -> Result<Prediction> {
        if variants.is_empty() {
            return Err(Error::EmptyVariants);
        }
        let c_count = self.num_classes();
        let mut votes = vec![0usize; c_count];
        let mut class_distances = vec![0.0f64; c_count];
        let mut variant_decisions = Vec::with_capacity(variants.len());
        for v in variants {
            let p = self.predict_one(v)?;
            votes[p.class] += 1;
            variant_decisions.push(p.class);
            for (acc, d) in class_distances.iter_mut().zip(&p.class_distances) {
                *acc += d;
            }
        }
        let (class, tie_broken) = resolve_vote(&votes, &class_distances);
        Ok(Prediction {
            class,
            label: self.label(class).to_owned(),
            votes,
            subspace_decisions: Vec::new(),
            variant_decisions,
            class_distances,
            tie_broken,
        })
    }
}

/// Picks the class with the most votes. Ties go to the smallest score, then
/// to the smallest index.
pub(crate) fn resolve_vote(votes: &[usize], scores: &[f64]) -> (usize, bool) {
    let top = votes.iter().copied().max().unwrap_or(0);
    let mut tied = votes
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == top)
        .map(|(c, _)| c);
    let first = tied.next().unwrap_or(0);
    let mut winner = first;
    let mut count = 1;
    for c in tied {
        count += 1;
        if scores[c] < scores[winner] {
            winner = c;
        }
    }
    (winner, count > 1)
}
