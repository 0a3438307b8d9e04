//! Conventional drift baseline: an OLS model fitted on the first window and
//! scored by mean squared error on every window.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, VariableKind, Window, WindowedTensor};
use crate::error::{Error, Result};

pub const RIDGE_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub target: String,
    /// Intercept first, then one entry per predictor column.
    pub coefficients: Vec<f64>,
    pub labels: Vec<String>,
    /// True when the normal equations were singular and ridge jitter was added.
    pub ridge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowMse {
    pub t: usize,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseBaseline {
    pub fit: OlsFit,
    pub windows: Vec<WindowMse>,
}

impl MseBaseline {
    pub fn mse(&self) -> Vec<f64> {
        self.windows.iter().map(|w| w.mse).collect()
    }
}

/// Predictor layout: every non-target variable, discrete ones as treatment
/// dummies against their first level.
struct Layout {
    target: usize,
    labels: Vec<String>,
}

impl Layout {
    fn new(tensor: &WindowedTensor, target: usize) -> Self {
        let mut labels = vec!["intercept".to_string()];
        for (j, spec) in tensor.schema.iter().enumerate() {
            if j == target {
                continue;
            }
            match spec.kind {
                VariableKind::Continuous => labels.push(spec.name.clone()),
                VariableKind::Discrete => {
                    for level in spec.levels.iter().skip(1) {
                        labels.push(format!("{}={}", spec.name, level));
                    }
                }
            }
        }
        Layout { target, labels }
    }

    fn design(&self, tensor: &WindowedTensor, w: &Window) -> (DMatrix<f64>, DVector<f64>) {
        let n = w.rows();
        let mut x = DMatrix::zeros(n, self.labels.len());
        x.column_mut(0).fill(1.0);
        let mut c = 1;
        for (j, (spec, col)) in tensor.schema.iter().zip(&w.columns).enumerate() {
            if j == self.target {
                continue;
            }
            match col {
                Column::Continuous(v) => {
                    for (r, &val) in v.iter().enumerate() {
                        x[(r, c)] = val;
                    }
                    c += 1;
                }
                Column::Discrete(v) => {
                    for (r, &code) in v.iter().enumerate() {
                        if code > 0 {
                            x[(r, c + code as usize - 1)] = 1.0;
                        }
                    }
                    c += spec.levels.len().saturating_sub(1);
                }
            }
        }
        let y = match &w.columns[self.target] {
            Column::Continuous(v) => DVector::from_column_slice(v),
            Column::Discrete(v) => DVector::from_iterator(n, v.iter().map(|&c| f64::from(c))),
        };
        (x, y)
    }
}

fn solve_normal(x: &DMatrix<f64>, y: &DVector<f64>) -> (DVector<f64>, bool) {
    let xtx = x.tr_mul(x);
    let xty = x.tr_mul(y);
    // Scale-aware singularity check; Cholesky alone accepts near-singular systems.
    let eig = xtx.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let min = eig.iter().fold(f64::INFINITY, |m, &e| m.min(e));
    if max > 0.0 && min > max * 1e-12 {
        if let Some(ch) = xtx.clone().cholesky() {
            return (ch.solve(&xty), false);
        }
    }
    let mut ridge = xtx;
    let jitter = RIDGE_JITTER * max.max(1.0);
    for i in 0..ridge.ncols() {
        ridge[(i, i)] += jitter;
    }
    let beta = ridge
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&xty))
        .unwrap_or_else(|| {
            ridge
                .lu()
                .solve(&xty)
                .unwrap_or_else(|| DVector::zeros(x.ncols()))
        });
    (beta, true)
}

/// Fits on window 1 and reports the MSE of that fit on every window.
pub fn mse_baseline(tensor: &WindowedTensor, target: &str) -> Result<MseBaseline> {
    let ti = tensor
        .schema
        .iter()
        .position(|s| s.name == target)
        .ok_or_else(|| Error::MissingColumn(target.into()))?;
    if tensor.schema[ti].kind != VariableKind::Continuous {
        return Err(Error::InvalidConfig(format!(
            "baseline target `{target}` must be continuous"
        )));
    }
    let layout = Layout::new(tensor, ti);
    let first = tensor.windows.first().ok_or(Error::Empty("windows"))?;
    let (x, y) = layout.design(tensor, first);
    let (beta, ridge) = solve_normal(&x, &y);
    let windows = tensor
        .windows
        .iter()
        .map(|w| {
            let (x, y) = layout.design(tensor, w);
            let resid = &y - &x * &beta;
            WindowMse {
                t: w.index,
                mse: resid.norm_squared() / y.len() as f64,
            }
        })
        .collect();
    Ok(MseBaseline {
        fit: OlsFit {
            target: target.into(),
            coefficients: beta.iter().copied().collect(),
            labels: layout.labels,
            ridge,
        },
        windows,
    })
}
