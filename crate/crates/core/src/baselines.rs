//! Reference classifiers: nearest class mean, 1-nearest neighbour, and
//! random per-class prototypes kept by reservoir sampling.
//!
//! All three compare whole feature vectors under the Euclidean distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::feature::{sq_dist_mixed, FeatureVector};
use crate::labels::ClassTable;

/// A baseline's answer: class index, its label and the winning distance.
#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub class: usize,
    pub label: String,
    pub distance: f64,
}

fn check_dim(dim: &mut Option<usize>, x: &FeatureVector) -> Result<()> {
    match *dim {
        Some(d) => x.validate(d),
        None => {
            x.validate(x.len())?;
            if x.is_empty() {
                return Err(Error::DimensionMismatch {
                    expected: 1,
                    actual: 0,
                });
            }
            *dim = Some(x.len());
            Ok(())
        }
    }
}

/// Running mean per class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NcmModel {
    dim: Option<usize>,
    classes: ClassTable,
    means: Vec<Vec<f64>>,
    counts: Vec<u64>,
}

impl NcmModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn learn(&mut self, x: &FeatureVector, label: &str) -> Result<usize> {
        check_dim(&mut self.dim, x)?;
        let c = self.classes.get_or_insert(label);
        if c == self.means.len() {
            self.means.push(vec![0.0; x.len()]);
            self.counts.push(0);
        }
        let n = self.counts[c] as f64;
        for (m, &v) in self.means[c].iter_mut().zip(x.as_slice()) {
            *m += (v as f64 - *m) / (n + 1.0);
        }
        self.counts[c] += 1;
        Ok(c)
    }

    /// Nearest class mean; ties go to the earlier-registered class.
    pub fn predict(&self, x: &FeatureVector) -> Result<Decision> {
        let dim = self.dim.ok_or(Error::EmptyModel)?;
        x.validate(dim)?;
        let (class, d2) = self
            .means
            .iter()
            .enumerate()
            .map(|(c, m)| (c, sq_dist_mixed(x.as_slice(), m)))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        Ok(Decision {
            class,
            label: self.classes.label(class).to_owned(),
            distance: d2.sqrt(),
        })
    }

    pub fn mean(&self, class: usize) -> &[f64] {
        &self.means[class]
    }

    pub fn count(&self, class: usize) -> u64 {
        self.counts[class]
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    /// `C * d * bytes_per_real`.
    pub fn memory_footprint(&self, bytes_per_real: usize) -> usize {
        self.means.len() * self.dim.unwrap_or(0) * bytes_per_real
    }
}

/// Stores every example; predicts the label of the nearest one.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NnModel {
    dim: Option<usize>,
    classes: ClassTable,
    examples: Vec<(FeatureVector, usize)>,
}

impl NnModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn learn(&mut self, x: &FeatureVector, label: &str) -> Result<usize> {
        check_dim(&mut self.dim, x)?;
        let c = self.classes.get_or_insert(label);
        self.examples.push((x.clone(), c));
        Ok(c)
    }

    /// Nearest stored example; ties go to the earliest stored.
    pub fn predict(&self, x: &FeatureVector) -> Result<Decision> {
        let dim = self.dim.ok_or(Error::EmptyModel)?;
        x.validate(dim)?;
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, (e, _)) in self.examples.iter().enumerate() {
            let d = x.sq_dist(e);
            if d < best.1 {
                best = (i, d);
            }
        }
        let class = self.examples[best.0].1;
        Ok(Decision {
            class,
            label: self.classes.label(class).to_owned(),
            distance: best.1.sqrt(),
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn stored(&self) -> impl Iterator<Item = (&FeatureVector, &str)> {
        self.examples
            .iter()
            .map(|(x, c)| (x, self.classes.label(*c)))
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    /// `N * d * bytes_per_real`.
    pub fn memory_footprint(&self, bytes_per_real: usize) -> usize {
        self.examples.len() * self.dim.unwrap_or(0) * bytes_per_real
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Reservoir {
    seen: u64,
    items: Vec<FeatureVector>,
}

/// Up to `k` uniformly sampled examples per class (Algorithm R), matched by
/// whole-vector nearest neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomPrototypeModel {
    capacity: usize,
    dim: Option<usize>,
    classes: ClassTable,
    reservoirs: Vec<Reservoir>,
    rng: ChaCha8Rng,
}

impl RandomPrototypeModel {
    pub fn new(capacity: usize, seed: u64) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidConfig(
                "prototype capacity must be positive".into(),
            ));
        }
        Ok(RandomPrototypeModel {
            capacity,
            dim: None,
            classes: ClassTable::new(),
            reservoirs: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn learn(&mut self, x: &FeatureVector, label: &str) -> Result<usize> {
        check_dim(&mut self.dim, x)?;
        let c = self.classes.get_or_insert(label);
        if c == self.reservoirs.len() {
            self.reservoirs.push(Reservoir {
                seen: 0,
                items: Vec::with_capacity(self.capacity),
            });
        }
        let r = &mut self.reservoirs[c];
        if r.items.len() < self.capacity {
            r.items.push(x.clone());
        } else {
            let j = self.rng.random_range(0..=r.seen);
            if (j as usize) < self.capacity {
                r.items[j as usize] = x.clone();
            }
        }
        r.seen += 1;
        Ok(c)
    }

    /// Nearest prototype; ties go to the earlier-registered class.
    pub fn predict(&self, x: &FeatureVector) -> Result<Decision> {
        let dim = self.dim.ok_or(Error::EmptyModel)?;
        x.validate(dim)?;
        let mut best = (0, f64::INFINITY);
        for (c, r) in self.reservoirs.iter().enumerate() {
            for p in &r.items {
                let d = x.sq_dist(p);
                if d < best.1 {
                    best = (c, d);
                }
            }
        }
        Ok(Decision {
            class: best.0,
            label: self.classes.label(best.0).to_owned(),
            distance: best.1.sqrt(),
        })
    }

    pub fn prototypes(&self, class: usize) -> &[FeatureVector] {
        &self.reservoirs[class].items
    }

    pub fn seen(&self, class: usize) -> u64 {
        self.reservoirs[class].seen
    }

    pub fn classes(&self) -> &ClassTable {
        &self.classes
    }

    pub fn memory_footprint(&self, bytes_per_real: usize) -> usize {
        let stored: usize = self.reservoirs.iter().map(|r| r.items.len()).sum();
        stored * self.dim.unwrap_or(0) * bytes_per_real
    }
}
