//! Shared data model: datasets, standardization, fit configuration, and the
//! result records produced by the solvers.

use ndarray::{Array1, Array2, ShapeBuilder};
use serde::Serialize;

use crate::error::{Error, Result};

/// A regression problem: response `y` of length `n` and an `n x p` design `x`.
///
/// The design is stored column-major so coordinate-wise column access is
/// contiguous.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Array1<f64>,
    pub x: Array2<f64>,
}

impl Dataset {
    pub fn new(y: Array1<f64>, x: Array2<f64>) -> Result<Self> {
        let n = y.len();
        let (rows, p) = (x.nrows(), x.ncols());
        if rows != n {
            return Err(Error::DimensionMismatch(format!(
                "response has {n} rows but design has {rows}"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidData(format!("need at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(Error::InvalidData("design has no columns".into()));
        }
        if y.iter().any(|v| !v.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite entry".into()));
        }
        // Re-layout to column-major; solvers walk columns.
        let x = to_col_major(&x);
        Ok(Self { y, x })
    }

    pub fn nrows(&self) -> usize {
        self.y.len()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }
}

fn to_col_major(x: &Array2<f64>) -> Array2<f64> {
    let mut out = Array2::zeros(x.raw_dim().f());
    out.assign(x);
    out
}

/// Centering/scaling metadata recorded by [`standardize`], sufficient to map
/// coefficients back to the original scale.
///
/// Scales satisfy `||(X_j - mean_j) / s_j||^2 = n` for every retained column;
/// zero-variance columns are flagged degenerate and dropped from the
/// standardized design.
#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub column_means: Vec<f64>,
    pub column_scales: Vec<f64>,
    pub response_mean: f64,
    /// Original column indices kept in the standardized design, in order.
    pub retained: Vec<usize>,
    /// Original column indices dropped for zero variance.
    pub degenerate: Vec<usize>,
}

impl Standardization {
    /// Identity transform over `p` columns (means 0, scales 1, nothing dropped).
    pub fn identity(p: usize) -> Self {
        Self {
            column_means: vec![0.0; p],
            column_scales: vec![1.0; p],
            response_mean: 0.0,
            retained: (0..p).collect(),
            degenerate: Vec::new(),
        }
    }

    /// Number of columns in the original design.
    pub fn n_original(&self) -> usize {
        self.column_means.len()
    }
}

const DEGENERATE_VARIANCE: f64 = 1e-24;

/// Center and rescale a dataset so every retained design column has mean 0 and
/// squared norm `n`, and the response has mean 0.
///
/// Zero-variance columns are recorded in the returned [`Standardization`] and
/// excluded from the standardized design. Errors if every column is
/// degenerate.
pub fn standardize(data: &Dataset) -> Result<(Dataset, Standardization)> {
    let n = data.nrows();
    let p = data.ncols();
    let nf = n as f64;

    let mut means = vec![0.0; p];
    let mut scales = vec![1.0; p];
    let mut retained = Vec::with_capacity(p);
    let mut degenerate = Vec::new();
    for j in 0..p {
        let col = data.x.column(j);
        let mean = col.sum() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        means[j] = mean;
        if ss / nf <= DEGENERATE_VARIANCE {
            degenerate.push(j);
        } else {
            scales[j] = (ss / nf).sqrt();
            retained.push(j);
        }
    }
    if retained.is_empty() {
        return Err(Error::UnusableDesign);
    }

    let response_mean = data.y.sum() / nf;
    let y = data.y.mapv(|v| v - response_mean);

    let mut x = Array2::zeros((n, retained.len()).f());
    for (k, &j) in retained.iter().enumerate() {
        let (m, s) = (means[j], scales[j]);
        let mut dst = x.column_mut(k);
        dst.assign(&data.x.column(j).mapv(|v| (v - m) / s));
    }

    let st = Standardization {
        column_means: means,
        column_scales: scales,
        response_mean,
        retained,
        degenerate,
    };
    Ok((Dataset { y, x }, st))
}

/// Map standardized coefficients back to the original scale.
///
/// `beta_std` has one entry per retained column; the returned vector has one
/// entry per original column with zeros at degenerate positions. The intercept
/// reproduces original-scale predictions:
/// `y_hat = intercept + X_raw . beta_orig`.
pub fn destandardize(beta_std: &[f64], st: &Standardization) -> Result<(Vec<f64>, f64)> {
    if beta_std.len() != st.retained.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} standardized coefficients for {} retained columns",
            beta_std.len(),
            st.retained.len()
        )));
    }
    let mut beta = vec![0.0; st.n_original()];
    for (k, &j) in st.retained.iter().enumerate() {
        beta[j] = beta_std[k] / st.column_scales[j];
    }
    let intercept = st.response_mean
        - beta
            .iter()
            .zip(&st.column_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    Ok((beta, intercept))
}

/// How partial-residual dispersion is measured when ranking predictors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankingNorm {
    /// Sample standard deviation about the mean (divisor n-1).
    DispersionL2,
    /// Uncentered mean absolute value.
    DispersionL1,
}

/// Knobs for the self-tuning fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    /// Sequential F-test significance level.
    pub alpha: f64,
    pub ranking_norm: RankingNorm,
    /// Relative l1-change convergence threshold.
    pub tol: f64,
    pub max_sweeps: usize,
    pub standardize: bool,
    pub active_set: bool,
    /// Cap on the F-test support size; `None` resolves to `min(p, n - 2)`.
    pub max_support: Option<usize>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            ranking_norm: RankingNorm::DispersionL2,
            tol: 1e-3,
            max_sweeps: 1000,
            standardize: true,
            active_set: false,
            max_support: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidConfig("max_sweeps must be positive".into()));
        }
        Ok(())
    }

    /// Effective support cap for an `n x p` problem.
    pub fn effective_max_support(&self, n: usize, p: usize) -> usize {
        let hard = p.min(n.saturating_sub(2));
        match self.max_support {
            Some(m) => m.min(hard),
            None => hard,
        }
    }
}

/// Solution of the l1-penalized least-squares problem at one penalty level.
#[derive(Debug, Clone, Serialize)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub residuals: Vec<f64>,
    /// Full coordinate passes performed.
    pub sweeps: usize,
    /// False when the sweep budget ran out before convergence.
    pub converged: bool,
}

/// Output of the self-tuning fit: coefficients on the original scale, the
/// noise-variance estimate that fixed the final penalty, and diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct AutotuneFit {
    /// Coefficients on the original scale, one per original column.
    pub beta: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    /// Final penalty, `lambda0 * sigma2`.
    pub lambda: f64,
    /// Base penalty fixed at initialization.
    pub lambda0: f64,
    /// Original column indices accepted by the sequential F-tests, in rank order.
    pub support_set: Vec<usize>,
    /// All original column indices in final rank order (degenerate columns last).
    pub ranking: Vec<usize>,
    /// Distinct penalty values visited, in order.
    pub lambda_trace: Vec<f64>,
    /// Cumulative R^2 of the nested models M_0..M_k from the last noise update.
    pub r2_cumulative: Vec<f64>,
    /// Adjusted R^2 of the same nested models (truncated when df runs out).
    pub r2_adjusted: Vec<f64>,
    /// Total coordinate passes, final polish included.
    pub sweeps: usize,
    pub converged: bool,
    /// True when the residual sum of squares collapsed to zero.
    pub saturated: bool,
    /// Coefficients on the standardized scale (retained columns only).
    #[serde(skip)]
    pub beta_std: Vec<f64>,
    #[serde(skip)]
    pub standardization: Standardization,
}

impl AutotuneFit {
    /// Fitted values on the original scale.
    pub fn predict(&self, x: &Array2<f64>) -> Array1<f64> {
        let beta = Array1::from_vec(self.beta.clone());
        x.dot(&beta) + self.intercept
    }
}
