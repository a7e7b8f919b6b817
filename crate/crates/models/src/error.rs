use roadrough_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("normal equations are singular; use ridge regularization")]
    Singular,

    #[error("{what} did not converge: {detail}")]
    NotConverged { what: &'static str, detail: String },

    #[error("training diverged: loss became {0}")]
    Diverged(f64),

    #[error("model was fitted for {fitted}, asked for {asked}")]
    WrongTask { fitted: &'static str, asked: &'static str },

    #[error("every grid point failed; first error: {0}")]
    AllGridPointsFailed(String),

    #[error("preprocessing failed: {0}")]
    Preprocess(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn check_xy(x: &ndarray::ArrayView2<f64>, n_targets: usize) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(ModelError::InvalidInput(format!("empty design matrix {:?}", x.dim())));
    }
    if x.nrows() != n_targets {
        return Err(ModelError::InvalidInput(format!("{} rows but {} targets", x.nrows(), n_targets)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(ModelError::InvalidInput("design matrix contains non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn check_width(expected: usize, x: &ndarray::ArrayView2<f64>) -> Result<()> {
    if x.ncols() != expected {
        return Err(ModelError::InvalidInput(format!("model expects {expected} features, got {}", x.ncols())));
    }
    Ok(())
}
