//! Streaming incremental classification with per-class, per-subspace anchor
//! vectors.
//!
//! Feature vectors are split into `P` contiguous subspaces. Each class keeps
//! `k` anchors per subspace together with a counter of how many subvectors
//! were merged into each anchor. Learning touches one anchor per subspace of
//! the presented class only, so previously learned classes are never
//! disturbed. Prediction takes a majority vote of the per-subspace
//! nearest-anchor decisions, optionally followed by a second vote over
//! augmented variants of the same input.
//!
//! ```
//! use tilda::{AnchorStore, FeatureVector, ModelConfig};
//!
//! let config = ModelConfig::new(2, 3, 4, 7).unwrap();
//! let mut store = AnchorStore::new(config).unwrap();
//! store.learn_one(&FeatureVector::from(vec![0.0, 0.0, 0.0, 0.0]), "a").unwrap();
//! store.learn_one(&FeatureVector::from(vec![9.0, 9.0, 9.0, 9.0]), "b").unwrap();
//!
//! let p = store.predict_one(&FeatureVector::from(vec![1.0, 1.0, 1.0, 1.0])).unwrap();
//! assert_eq!(p.label, "a");
//! ```

pub mod augment;
pub mod baselines;
mod error;
mod feature;
pub mod harness;
pub mod io;
mod labels;
pub mod model;

pub use error::{Error, Result};
pub use feature::FeatureVector;
pub use labels::ClassTable;
pub use model::{split, AnchorStore, ModelConfig, Prediction};
