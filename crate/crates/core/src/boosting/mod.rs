//! Gradient-boosted regression trees over vertically partitioned data.

pub mod dataset;
pub mod gradients;
pub mod split;
pub mod thresholds;
pub mod trainer;
pub mod tree;

pub use dataset::{Hyperparams, PartyFeatures, PartyId, VerticalDataset, ACTIVE_PARTY};
pub use gradients::{compute_gradients, FxGradients, GradientPair};
pub use split::{find_best_split_oracle, leaf_weight, split_score};
pub use thresholds::{bucket_aggregate, BucketStats, FeatureThresholds};
pub use trainer::{subsample_rows, train, TrainOutput};
pub use tree::{BoostedModel, RegressionTree, ResolvedModel, TreeNode};
