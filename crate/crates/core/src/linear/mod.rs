//! Feature extraction and L2-regularized logistic regression.

mod embeddings;
mod features;
mod logreg;
mod vocab;

pub use embeddings::{EmbeddingError, EmbeddingTable};
pub use features::{FeatureConfig, FeatureError, Featurizer, SparseMatrix, SparseVec};
pub use logreg::{
    balanced_weights, predict, train_logreg, LogRegModel, ModelFile, Objective, Prediction,
    TrainConfig, TrainError, TrainReport, MODEL_FORMAT_VERSION,
};
pub use vocab::{build_vocab, normalize_token, Vocabulary, UNK, UNK_INDEX};
