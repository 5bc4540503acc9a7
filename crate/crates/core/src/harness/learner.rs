use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{NcmModel, NnModel, RandomPrototypeModel};
use crate::error::{Error, Result};
use crate::feature::FeatureVector;
use crate::model::{resolve_vote, AnchorStore, ModelConfig};

/// One labelled input. `variants[0]` is the unaugmented signal; further
/// entries are augmented versions of it.
#[derive(Clone, Debug, PartialEq)]
pub struct Example {
    pub variants: Vec<FeatureVector>,
    pub label: String,
}

impl Example {
    pub fn plain(x: FeatureVector, label: impl Into<String>) -> Self {
        Example {
            variants: vec![x],
            label: label.into(),
        }
    }

    pub fn original(&self) -> &FeatureVector {
        &self.variants[0]
    }

    pub fn dim(&self) -> usize {
        self.variants.first().map_or(0, FeatureVector::len)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Anchors with subspace voting and augmentation.
    Tilda,
    /// Anchors without augmentation.
    TildaDa,
    /// Anchors with a single subspace.
    TildaP,
    /// Random per-class prototypes.
    TildaNcm,
    Ncm,
    Nn,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Tilda,
        Method::TildaDa,
        Method::TildaP,
        Method::TildaNcm,
        Method::Ncm,
        Method::Nn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Tilda => "tilda",
            Method::TildaDa => "tilda-da",
            Method::TildaP => "tilda-p",
            Method::TildaNcm => "tilda-ncm",
            Method::Ncm => "ncm",
            Method::Nn => "nn",
        }
    }

    pub fn uses_augmentation(self) -> bool {
        matches!(self, Method::Tilda | Method::TildaP | Method::TildaNcm)
    }

    /// Builds a fresh learner for `dim`-dimensional inputs.
    pub fn build(self, params: &ModelParams, dim: usize) -> Result<Box<dyn Learner>> {
        let augment = self.uses_augmentation();
        Ok(match self {
            Method::Tilda | Method::TildaDa => Box::new(TildaLearner::new(
                ModelConfig::new(params.subspaces, params.anchors, dim, params.seed)?,
                augment,
            )?),
            Method::TildaP => Box::new(TildaLearner::new(
                ModelConfig::new(1, params.anchors, dim, params.seed)?,
                augment,
            )?),
            Method::TildaNcm => Box::new(PrototypeLearner {
                model: RandomPrototypeModel::new(params.anchors, params.seed)?,
                augment,
            }),
            Method::Ncm => Box::new(NcmModel::new()),
            Method::Nn => Box::new(NnModel::new()),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_owned()))
    }
}

/// Hyper-parameters shared by the anchor-based and prototype methods.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub subspaces: usize,
    pub anchors: usize,
    pub seed: u64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            subspaces: 16,
            anchors: 30,
            seed: 0,
        }
    }
}

/// Common interface the scenario runners drive.
pub trait Learner: Send + Sync {
    fn learn(&mut self, example: &Example) -> Result<()>;
    fn predict(&self, example: &Example) -> Result<String>;
    /// Model payload with 4-byte reals.
    fn model_bytes(&self) -> usize;
    fn num_classes(&self) -> usize;
}

pub struct TildaLearner {
    store: AnchorStore,
    augment: bool,
}

impl TildaLearner {
    pub fn new(config: ModelConfig, augment: bool) -> Result<Self> {
        Ok(TildaLearner {
            store: AnchorStore::new(config)?,
            augment,
        })
    }

    pub fn from_store(store: AnchorStore, augment: bool) -> Self {
        TildaLearner { store, augment }
    }

    pub fn store(&self) -> &AnchorStore {
        &self.store
    }

    pub fn into_store(self) -> AnchorStore {
        self.store
    }
}

impl Learner for TildaLearner {
    fn learn(&mut self, example: &Example) -> Result<()> {
        if self.augment {
            self.store
                .learn_augmented(&example.variants, &example.label)?;
        } else {
            self.store.learn_one(example.original(), &example.label)?;
        }
        Ok(())
    }

    fn predict(&self, example: &Example) -> Result<String> {
        let p = if self.augment {
            self.store.predict_augmented(&example.variants)?
        } else {
            self.store.predict_one(example.original())?
        };
        Ok(p.label)
    }

    fn model_bytes(&self) -> usize {
        self.store.memory_footprint(4)
    }

    fn num_classes(&self) -> usize {
        self.store.num_classes()
    }
}

pub struct PrototypeLearner {
    model: RandomPrototypeModel,
    augment: bool,
}

impl PrototypeLearner {
    pub fn model(&self) -> &RandomPrototypeModel {
        &self.model
    }
}

impl Learner for PrototypeLearner {
    fn learn(&mut self, example: &Example) -> Result<()> {
        let n = if self.augment {
            example.variants.len()
        } else {
            1
        };
        for v in &example.variants[..n] {
            self.model.learn(v, &example.label)?;
        }
        Ok(())
    }

    fn predict(&self, example: &Example) -> Result<String> {
        if !self.augment || example.variants.len() == 1 {
            return Ok(self.model.predict(example.original())?.label);
        }
        let c = self.model.classes().len();
        let mut votes = vec![0usize; c];
        let mut dist = vec![0.0f64; c];
        for v in &example.variants {
            let d = self.model.predict(v)?;
            votes[d.class] += 1;
            dist[d.class] += d.distance;
        }
        let (class, _) = resolve_vote(&votes, &dist);
        Ok(self.model.classes().label(class).to_owned())
    }

    fn model_bytes(&self) -> usize {
        self.model.memory_footprint(4)
    }

    fn num_classes(&self) -> usize {
        self.model.classes().len()
    }
}

impl Learner for NcmModel {
    fn learn(&mut self, example: &Example) -> Result<()> {
        NcmModel::learn(self, example.original(), &example.label).map(drop)
    }

    fn predict(&self, example: &Example) -> Result<String> {
        Ok(NcmModel::predict(self, example.original())?.label)
    }

    fn model_bytes(&self) -> usize {
        self.memory_footprint(4)
    }

    fn num_classes(&self) -> usize {
        self.classes().len()
    }
}

impl Learner for NnModel {
    fn learn(&mut self, example: &Example) -> Result<()> {
        NnModel::learn(self, example.original(), &example.label).map(drop)
    }

    fn predict(&self, example: &Example) -> Result<String> {
        Ok(NnModel::predict(self, example.original())?.label)
    }

    fn model_bytes(&self) -> usize {
        self.memory_footprint(4)
    }

    fn num_classes(&self) -> usize {
        self.classes().len()
    }
}

/// Wraps a learner and records how often each example (by address) was
/// presented for learning.
pub struct CountingLearner<L> {
    inner: L,
    seen: HashMap<usize, usize>,
}

impl<L: Learner> CountingLearner<L> {
    pub fn new(inner: L) -> Self {
        CountingLearner {
            inner,
            seen: HashMap::new(),
        }
    }

    pub fn presentations(&self, example: &Example) -> usize {
        self.seen
            .get(&(example as *const Example as usize))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.seen.values().sum()
    }

    pub fn inner(&self) -> &L {
        &self.inner
    }
}

impl<L: Learner> Learner for CountingLearner<L> {
    fn learn(&mut self, example: &Example) -> Result<()> {
        *self
            .seen
            .entry(example as *const Example as usize)
            .or_default() += 1;
        self.inner.learn(example)
    }

    fn predict(&self, example: &Example) -> Result<String> {
        self.inner.predict(example)
    }

    fn model_bytes(&self) -> usize {
        self.inner.model_bytes()
    }

    fn num_classes(&self) -> usize {
        self.inner.num_classes()
    }
}

impl Learner for Box<dyn Learner> {
    fn learn(&mut self, example: &Example) -> Result<()> {
        (**self).learn(example)
    }

    fn predict(&self, example: &Example) -> Result<String> {
        (**self).predict(example)
    }

    fn model_bytes(&self) -> usize {
        (**self).model_bytes()
    }

    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(matches!(
            "svm".parse::<Method>(),
            Err(Error::UnknownMethod(_))
        ));
    }

    #[test]
    fn tilda_p_uses_one_subspace() {
        let params = ModelParams {
            subspaces: 4,
            anchors: 2,
            seed: 0,
        };
        let mut l = Method::TildaP.build(&params, 8).unwrap();
        l.learn(&Example::plain(vec![1.0; 8].into(), "a")).unwrap();
        assert_eq!(l.model_bytes(), 2 * 8 * 4);
        assert!(Method::Tilda.build(&params, 6).is_err());
    }

    #[test]
    fn augmentation_only_for_augmenting_methods() {
        let params = ModelParams {
            subspaces: 1,
            anchors: 1,
            seed: 0,
        };
        let ex = Example {
            variants: vec![vec![0.0].into(), vec![4.0].into()],
            label: "a".into(),
        };
        let mut with = TildaLearner::new(ModelConfig::new(1, 1, 1, 0).unwrap(), true).unwrap();
        with.learn(&ex).unwrap();
        assert_eq!(with.store().anchor(0, 0, 0), &[2.0]);
        let mut without = Method::TildaDa.build(&params, 1).unwrap();
        without.learn(&ex).unwrap();
        assert_eq!(without.predict(&ex).unwrap(), "a");
    }

    #[test]
    fn counting_wrapper_counts_by_identity() {
        let mut l = CountingLearner::new(NcmModel::new());
        let a = Example::plain(vec![1.0].into(), "a");
        let b = Example::plain(vec![1.0].into(), "a");
        l.learn(&a).unwrap();
        l.learn(&a).unwrap();
        l.learn(&b).unwrap();
        assert_eq!(l.presentations(&a), 2);
        assert_eq!(l.presentations(&b), 1);
        assert_eq!(l.total(), 3);
    }
}
