//! Texture descriptors built from gray-tone difference matrices, histogram
//! moments and rotation-invariant uniform local binary patterns, plus the
//! tooling around them: K-means based curation of a maximally diverse texture
//! set, the Fisher spread score, and repeated stratified KNN evaluation.

pub mod classify;
pub mod curation;
pub mod error;
pub mod features;
pub mod gtdm;
pub mod histogram;
pub mod image;
pub mod lbp;
pub mod table;

pub use classify::{evaluate, knn_predict, split, AccuracyReport, LabeledVector, Metric};
pub use curation::{cluster_mean, curate, fisher, CurationResult};
pub use error::{Error, Result};
pub use features::{
    euclidean, extract_features, fit_bounds, normalize, normalize_all, soergel, FeatureConfig,
    FeatureVector, NormalizationBounds, FEATURE_DIM,
};
pub use image::{crop_windows, load_gray, CropSpec, GrayImage};
