//! Regression model families, written from first principles.
//!
//! | family | fit | notes |
//! |---|---|---|
//! | ridge | [`ridge_fit`] | closed form on standardized features |
//! | forest | [`forest_fit`] | bagged CART, variance impurity |
//! | svr | [`svr_fit`] | ε-insensitive, SMO dual solver |
//! | boost | [`boost_fit`] | second-order boosting, exact greedy |
//!
//! [`ModelSpec`] is the declarative, serializable description of a family
//! plus hyperparameters; [`ModelSpec::fit`] yields a [`FittedModel`].

mod boost;
mod forest;
mod matrix;
mod ridge;
mod svr;
mod tree;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

pub use boost::{boost_fit, BoostParams, BoostedModel};
pub use forest::{forest_feature_importance, forest_fit, ForestModel, ForestParams};
pub use matrix::{DesignMatrix, Standardizer};
pub use ridge::{ridge_fit, RidgeModel, RidgeParams};
pub use svr::{svr_fit, Kernel, SvrModel, SvrParams};
pub use tree::{best_split, Node, SplitCandidate, TreeModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("singular system")]
    SingularSystem,
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("serialization: {0}")]
    Serialization(String),
}

/// The four model families, plus a training-mean predictor used as a
/// reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ridge,
    Svr,
    Forest,
    Boost,
    Mean,
}

impl Family {
    pub const FOUR: [Family; 4] = [Family::Ridge, Family::Svr, Family::Forest, Family::Boost];

    /// Row label in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Family::Ridge => "ridge",
            Family::Svr => "svr",
            Family::Forest => "randomforest",
            Family::Boost => "boosted",
            Family::Mean => "mean",
        }
    }

    pub fn default_spec(self) -> ModelSpec {
        match self {
            Family::Ridge => ModelSpec::Ridge(RidgeParams::default()),
            Family::Svr => ModelSpec::Svr(SvrParams::default()),
            Family::Forest => ModelSpec::Forest(ForestParams::default()),
            Family::Boost => ModelSpec::Boost(BoostParams::default()),
            Family::Mean => ModelSpec::Mean,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ridge" => Ok(Family::Ridge),
            "svr" => Ok(Family::Svr),
            "forest" | "randomforest" | "rf" => Ok(Family::Forest),
            "boost" | "boosted" | "xgboost" => Ok(Family::Boost),
            "mean" => Ok(Family::Mean),
            other => Err(ModelError::InvalidParameter(format!("unknown model family {other:?}"))),
        }
    }
}

/// Model family with hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    Ridge(RidgeParams),
    Svr(SvrParams),
    Forest(ForestParams),
    Boost(BoostParams),
    Mean,
}

impl ModelSpec {
    pub fn family(&self) -> Family {
        match self {
            ModelSpec::Ridge(_) => Family::Ridge,
            ModelSpec::Svr(_) => Family::Svr,
            ModelSpec::Forest(_) => Family::Forest,
            ModelSpec::Boost(_) => Family::Boost,
            ModelSpec::Mean => Family::Mean,
        }
    }

    /// Overrides one hyperparameter by its serialized name.
    pub fn set_param(&self, name: &str, value: serde_json::Value) -> Result<ModelSpec, ModelError> {
        let mut v = serde_json::to_value(self).map_err(|e| ModelError::Serialization(e.to_string()))?;
        let obj = v.as_object_mut().expect("spec serializes to an object");
        if name == "family" || !obj.contains_key(name) {
            return Err(ModelError::InvalidParameter(format!(
                "{} has no parameter {name:?}",
                self.family().label()
            )));
        }
        obj.insert(name.to_string(), value);
        serde_json::from_value(v).map_err(|e| ModelError::InvalidParameter(format!("{name}: {e}")))
    }

    /// Fits on `d`; `seed` drives every random choice of the fit.
    pub fn fit<T: Scalar>(&self, d: &DesignMatrix<T>, seed: u64) -> Result<FittedModel<T>, ModelError> {
        Ok(match self {
            ModelSpec::Ridge(p) => FittedModel::Ridge(ridge_fit(d, T::lit(p.lambda))?),
            ModelSpec::Svr(p) => FittedModel::Svr(svr_fit(d, p)?),
            ModelSpec::Forest(p) => FittedModel::Forest(forest_fit(d, p, seed)?),
            ModelSpec::Boost(p) => FittedModel::Boost(boost_fit(d, p)?),
            ModelSpec::Mean => FittedModel::Mean {
                value: crate::scalar::mean(d.y()).expect("n >= 1"),
                n_features: d.p(),
            },
        })
    }
}

/// Trained state of any family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "state", rename_all = "snake_case")]
pub enum FittedModel<T> {
    Ridge(RidgeModel<T>),
    Svr(SvrModel<T>),
    Forest(ForestModel<T>),
    Boost(BoostedModel<T>),
    Mean { value: T, n_features: usize },
}

impl<T: Scalar> FittedModel<T> {
    pub fn family(&self) -> Family {
        match self {
            FittedModel::Ridge(_) => Family::Ridge,
            FittedModel::Svr(_) => Family::Svr,
            FittedModel::Forest(_) => Family::Forest,
            FittedModel::Boost(_) => Family::Boost,
            FittedModel::Mean { .. } => Family::Mean,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            FittedModel::Ridge(m) => m.beta.len(),
            FittedModel::Svr(m) => m.standardization.means.len(),
            FittedModel::Forest(m) => m.n_features,
            FittedModel::Boost(m) => m.n_features,
            FittedModel::Mean { n_features, .. } => *n_features,
        }
    }

    pub fn predict_row(&self, x: &[T]) -> T {
        match self {
            FittedModel::Ridge(m) => m.predict_row(x),
            FittedModel::Svr(m) => m.predict_row(x),
            FittedModel::Forest(m) => m.predict_row(x),
            FittedModel::Boost(m) => m.predict_row(x),
            FittedModel::Mean { value, .. } => *value,
        }
    }

    pub fn predict(&self, d: &DesignMatrix<T>) -> Result<Vec<T>, ModelError> {
        d.check_width(self.n_features())?;
        Ok(d.rows().map(|r| self.predict_row(r)).collect())
    }
}

/// On-disk model: its `ModelSpec`, the feature order it was trained on and the
/// trained state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModel {
    pub spec: ModelSpec,
    pub features: Vec<String>,
    pub response: String,
    pub seed: u64,
    pub model: FittedModel<f64>,
}

impl SavedModel {
    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string_pretty(self).map_err(|e| ModelError::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        serde_json::from_str(s).map_err(|e| ModelError::Serialization(e.to_string()))
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent sub-seed number `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}
