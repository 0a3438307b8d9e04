//! Bayesian logistic regression of edge stability on time and history codes.
//!
//! Model: `y_i ~ Bern(theta_i)`, `logit(theta_i) = x_i' beta`, independent
//! Gaussian priors on every coefficient. The posterior is explored with a
//! random-walk Metropolis chain started at the MAP and shaped by the inverse
//! Hessian there.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::stats::{logistic, mean, quantile_sorted, softplus, std_dev};
use crate::transition::{Code, StabilityDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// One dummy per distinct observed history (bit-string identity), with
    /// the all-absent history as reference.
    Full,
    /// Two dummies, all-present and mixed, with all-absent as reference.
    Canonical,
}

type Indicator = Box<dyn Fn(&Code) -> bool>;

pub const LABEL_INTERCEPT: &str = "beta_0";
pub const LABEL_TIME: &str = "beta_time";
pub const LABEL_ALL_PRESENT: &str = "beta_allpresent";
pub const LABEL_MIXED: &str = "beta_mixed";

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub x: DMatrix<f64>,
    pub labels: Vec<String>,
    /// Transition index of each row.
    pub times: Vec<usize>,
    /// Set when the columns are visibly rank deficient.
    pub warning: Option<String>,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignOptions {
    /// Subtract the mean transition index from the time column.
    pub center_time: bool,
}

pub fn build_design(d: &StabilityDataset, encoding: Encoding, opts: DesignOptions) -> Result<DesignMatrix> {
    if d.records.is_empty() {
        return Err(Error::Empty("stability dataset"));
    }
    let n = d.records.len();
    let times: Vec<usize> = d.records.iter().map(|r| r.t).collect();
    let shift = if opts.center_time {
        times.iter().sum::<usize>() as f64 / n as f64
    } else {
        0.0
    };

    let mut labels = vec![LABEL_INTERCEPT.to_string(), LABEL_TIME.to_string()];
    let dummies: Vec<Indicator> = match encoding {
        Encoding::Canonical => {
            let mut cols: Vec<Indicator> = Vec::new();
            if d.records.iter().any(|r| r.code.is_all_present()) {
                labels.push(LABEL_ALL_PRESENT.into());
                cols.push(Box::new(|c: &Code| c.is_all_present()));
            }
            if d.records.iter().any(|r| !r.code.is_stable()) {
                labels.push(LABEL_MIXED.into());
                cols.push(Box::new(|c: &Code| !c.is_stable()));
            }
            cols
        }
        Encoding::Full => {
            let mut levels: Vec<&Code> = d
                .records
                .iter()
                .map(|r| &r.code)
                .filter(|c| !c.is_all_absent())
                .collect();
            levels.sort_by(|a, b| a.ordering_key().cmp(&b.ordering_key()));
            levels.dedup();
            let mut cols: Vec<Indicator> = Vec::with_capacity(levels.len());
            for level in levels {
                labels.push(format!("w={level}"));
                let level = level.clone();
                cols.push(Box::new(move |c: &Code| *c == level));
            }
            cols
        }
    };

    let k = labels.len();
    let mut x = DMatrix::zeros(n, k);
    for (row, r) in d.records.iter().enumerate() {
        x[(row, 0)] = 1.0;
        x[(row, 1)] = r.t as f64 - shift;
        for (c, f) in dummies.iter().enumerate() {
            if f(&r.code) {
                x[(row, 2 + c)] = 1.0;
            }
        }
    }

    let constant_time = times.iter().all(|&t| t == times[0]);
    let warning = if constant_time && dummies.is_empty() {
        Some("single history code and no time variation: design is rank deficient".into())
    } else if constant_time {
        Some("time column is constant and collinear with the intercept".into())
    } else {
        None
    };
    Ok(DesignMatrix {
        x,
        labels,
        times,
        warning,
    })
}

pub fn response(d: &StabilityDataset) -> DVector<f64> {
    DVector::from_iterator(
        d.records.len(),
        d.records.iter().map(|r| f64::from(u8::from(r.y))),
    )
}

/// Independent Gaussian priors `beta_j ~ N(mu_j, sigma_j^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    pub mu: DVector<f64>,
    pub sigma: DVector<f64>,
}

impl Prior {
    pub fn isotropic(k: usize, mu: f64, sigma: f64) -> Result<Self> {
        Prior::new(DVector::from_element(k, mu), DVector::from_element(k, sigma))
    }

    pub fn new(mu: DVector<f64>, sigma: DVector<f64>) -> Result<Self> {
        if mu.len() != sigma.len() {
            return Err(Error::DimensionMismatch {
                expected: mu.len(),
                found: sigma.len(),
            });
        }
        if sigma.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig(
                "prior sigma must be positive and finite".into(),
            ));
        }
        Ok(Prior { mu, sigma })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn log_density(&self, beta: &DVector<f64>) -> f64 {
        let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        beta.iter()
            .zip(self.mu.iter().zip(self.sigma.iter()))
            .map(|(b, (m, s))| {
                let z = (b - m) / s;
                -half_ln_2pi - s.ln() - 0.5 * z * z
            })
            .sum()
    }
}

fn check_dims(beta: &DVector<f64>, x: &DMatrix<f64>, y: &DVector<f64>) {
    assert_eq!(
        beta.len(),
        x.ncols(),
        "coefficient length must match design columns"
    );
    assert_eq!(y.len(), x.nrows(), "response length must match design rows");
}

/// `sum_i y_i eta_i - ln(1 + e^eta_i)`.
pub fn log_likelihood(beta: &DVector<f64>, x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    check_dims(beta, x, y);
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum()
}

pub fn log_posterior(beta: &DVector<f64>, x: &DMatrix<f64>, y: &DVector<f64>, prior: &Prior) -> f64 {
    assert_eq!(prior.len(), beta.len(), "prior dimension must match coefficients");
    log_likelihood(beta, x, y) + prior.log_density(beta)
}

pub fn log_posterior_gradient(
    beta: &DVector<f64>,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &Prior,
) -> DVector<f64> {
    check_dims(beta, x, y);
    let eta = x * beta;
    let resid = DVector::from_iterator(
        y.len(),
        eta.iter().zip(y.iter()).map(|(&e, &yi)| yi - logistic(e)),
    );
    let mut g = x.tr_mul(&resid);
    for j in 0..g.len() {
        g[j] -= (beta[j] - prior.mu[j]) / (prior.sigma[j] * prior.sigma[j]);
    }
    g
}

/// Negative Hessian of the log posterior (positive definite).
pub fn negative_hessian(beta: &DVector<f64>, x: &DMatrix<f64>, prior: &Prior) -> DMatrix<f64> {
    let eta = x * beta;
    let mut wx = x.clone();
    for (i, &e) in eta.iter().enumerate() {
        let p = logistic(e);
        let w = p * (1.0 - p);
        wx.row_mut(i).scale_mut(w);
    }
    let mut h = x.tr_mul(&wx);
    for j in 0..h.ncols() {
        h[(j, j)] += 1.0 / (prior.sigma[j] * prior.sigma[j]);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapFit {
    pub beta: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Infinity norm of the gradient at `beta`.
    pub grad_norm: f64,
}

pub const MAP_TOLERANCE: f64 = 1e-8;
pub const MAP_MAX_ITER: usize = 100;

fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    a.clone().cholesky().map(|c| c.solve(b))
}

/// Damped Newton ascent on the log posterior.
pub fn map_estimate(x: &DMatrix<f64>, y: &DVector<f64>, prior: &Prior) -> Result<MapFit> {
    if x.nrows() == 0 {
        return Err(Error::Empty("design matrix"));
    }
    if prior.len() != x.ncols() {
        return Err(Error::DimensionMismatch {
            expected: x.ncols(),
            found: prior.len(),
        });
    }
    let mut beta = prior.mu.clone();
    let mut lp = log_posterior(&beta, x, y, prior);
    for it in 0..MAP_MAX_ITER {
        let g = log_posterior_gradient(&beta, x, y, prior);
        let gn = g.amax();
        if gn < MAP_TOLERANCE {
            return Ok(MapFit {
                beta,
                converged: true,
                iterations: it,
                grad_norm: gn,
            });
        }
        let h = negative_hessian(&beta, x, prior);
        let step = solve_spd(&h, &g).unwrap_or_else(|| g.clone());
        // Near the optimum the objective change drops below rounding noise.
        let slack = 64.0 * f64::EPSILON * (1.0 + lp.abs());
        let mut t = 1.0;
        loop {
            let cand = &beta + &step * t;
            let lc = log_posterior(&cand, x, y, prior);
            if lc + slack >= lp || t < 1e-10 {
                beta = cand;
                lp = lc;
                break;
            }
            t *= 0.5;
        }
    }
    let gn = log_posterior_gradient(&beta, x, y, prior).amax();
    Ok(MapFit {
        converged: gn < MAP_TOLERANCE,
        beta,
        iterations: MAP_MAX_ITER,
        grad_norm: gn,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub draws: usize,
    pub burn_in: usize,
    /// Multiplier on the `2.38 / sqrt(k)` base proposal scale.
    pub step_scale: f64,
    pub seed: u64,
    /// Tuning rounds run before burn-in; the scale is frozen afterwards.
    pub adapt_rounds: usize,
    pub adapt_len: usize,
}

impl SamplerConfig {
    pub const MIN_DRAWS: usize = 1000;

    pub fn new(draws: usize, burn_in: usize, seed: u64) -> Self {
        SamplerConfig {
            draws,
            burn_in,
            step_scale: 1.0,
            seed,
            adapt_rounds: 20,
            adapt_len: 250,
        }
    }
}

pub const ACCEPT_TARGET: (f64, f64) = (0.2, 0.5);
pub const ACCEPT_HEALTHY: (f64, f64) = (0.05, 0.95);

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub labels: Vec<String>,
    /// `S x k`, one row per retained draw.
    pub draws: DMatrix<f64>,
    pub acceptance_rate: f64,
    pub seed: u64,
    pub burn_in: usize,
    /// Final proposal scale after adaptation.
    pub scale: f64,
    pub map: MapFit,
    pub diagnostics: Vec<String>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.draws.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.nrows() == 0
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.draws.column(j).iter().copied().collect()
    }

    pub fn summary(&self) -> Vec<CoefficientSummary> {
        (0..self.draws.ncols())
            .map(|j| {
                let mut col = self.column(j);
                let m = mean(&col);
                let sd = std_dev(&col);
                col.sort_by(f64::total_cmp);
                CoefficientSummary {
                    label: self.labels[j].clone(),
                    map: self.map.beta[j],
                    mean: m,
                    sd,
                    q025: quantile_sorted(&col, 0.025),
                    q975: quantile_sorted(&col, 0.975),
                }
            })
            .collect()
    }

    /// Largest |mean(first half) - mean(second half)| / sd over coefficients.
    pub fn split_half_discrepancy(&self) -> f64 {
        let half = self.len() / 2;
        (0..self.draws.ncols())
            .map(|j| {
                let col = self.column(j);
                let sd = std_dev(&col);
                if sd == 0.0 {
                    return 0.0;
                }
                (mean(&col[..half]) - mean(&col[half..])).abs() / sd
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub label: String,
    pub map: f64,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q975: f64,
}

struct Chain<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    prior: &'a Prior,
    chol: DMatrix<f64>,
    state: DVector<f64>,
    lp: f64,
    rng: ChaCha8Rng,
}

impl Chain<'_> {
    fn step(&mut self, scale: f64) -> bool {
        let k = self.state.len();
        let z = DVector::from_iterator(k, (0..k).map(|_| self.rng.sample::<f64, _>(StandardNormal)));
        let cand = &self.state + (&self.chol * z) * scale;
        let lc = log_posterior(&cand, self.x, self.y, self.prior);
        let u: f64 = self.rng.random();
        if lc.is_finite() && u.ln() < lc - self.lp {
            self.state = cand;
            self.lp = lc;
            true
        } else {
            false
        }
    }

    fn run(&mut self, steps: usize, scale: f64) -> usize {
        (0..steps).filter(|_| self.step(scale)).count()
    }
}

pub fn sample_posterior(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    prior: &Prior,
    labels: &[String],
    cfg: &SamplerConfig,
) -> Result<PosteriorDraws> {
    if cfg.draws < SamplerConfig::MIN_DRAWS {
        return Err(Error::InvalidConfig(format!(
            "need at least {} draws, got {}",
            SamplerConfig::MIN_DRAWS,
            cfg.draws
        )));
    }
    if cfg.step_scale.is_nan() || cfg.step_scale <= 0.0 {
        return Err(Error::InvalidConfig("step_scale must be positive".into()));
    }
    let map = map_estimate(x, y, prior)?;
    let k = x.ncols();
    let h = negative_hessian(&map.beta, x, prior);
    let cov = h
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| Error::InvalidConfig("Hessian at MAP is not positive definite".into()))?;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::InvalidConfig("proposal covariance is not positive definite".into()))?
        .l();

    let mut chain = Chain {
        x,
        y,
        prior,
        chol,
        lp: log_posterior(&map.beta, x, y, prior),
        state: map.beta.clone(),
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut scale = cfg.step_scale * 2.38 / (k as f64).sqrt();
    for _ in 0..cfg.adapt_rounds {
        let acc = chain.run(cfg.adapt_len, scale) as f64 / cfg.adapt_len.max(1) as f64;
        if acc < ACCEPT_TARGET.0 {
            scale *= 0.7;
        } else if acc > ACCEPT_TARGET.1 {
            scale *= 1.4;
        } else {
            break;
        }
    }
    chain.run(cfg.burn_in, scale);

    let mut draws = DMatrix::zeros(cfg.draws, k);
    let mut accepted = 0;
    for s in 0..cfg.draws {
        accepted += usize::from(chain.step(scale));
        draws.row_mut(s).copy_from(&chain.state.transpose());
    }
    let acceptance_rate = accepted as f64 / cfg.draws as f64;

    let mut diagnostics = Vec::new();
    if acceptance_rate <= ACCEPT_HEALTHY.0 || acceptance_rate >= ACCEPT_HEALTHY.1 {
        diagnostics.push(format!(
            "acceptance rate {acceptance_rate:.3} outside (0.05, 0.95)"
        ));
    }
    if !map.converged {
        diagnostics.push(format!(
            "MAP did not converge (gradient norm {:.3e})",
            map.grad_norm
        ));
    }
    Ok(PosteriorDraws {
        labels: labels.to_vec(),
        draws,
        acceptance_rate,
        seed: cfg.seed,
        burn_in: cfg.burn_in,
        scale,
        map,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSummary {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

fn summarize(mut values: Vec<f64>) -> PredictiveSummary {
    let m = mean(&values);
    values.sort_by(f64::total_cmp);
    PredictiveSummary {
        // Guard against rounding drift in the mean of identical values.
        mean: m.clamp(values[0], values[values.len() - 1]),
        lower: quantile_sorted(&values, 0.025),
        upper: quantile_sorted(&values, 0.975),
    }
}

/// Posterior-predictive `theta` for each row of `x_new`.
pub fn posterior_predictive(
    draws: &PosteriorDraws,
    x_new: &DMatrix<f64>,
    exec: Execution,
) -> Result<Vec<PredictiveSummary>> {
    if draws.is_empty() {
        return Err(Error::Empty("posterior draws"));
    }
    if x_new.ncols() != draws.draws.ncols() {
        return Err(Error::DimensionMismatch {
            expected: draws.draws.ncols(),
            found: x_new.ncols(),
        });
    }
    let eta = x_new * draws.draws.transpose(); // rows x S
    Ok(exec.map_range(x_new.nrows(), |r| {
        summarize(eta.row(r).iter().map(|&e| logistic(e)).collect())
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub t: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCurve {
    pub points: Vec<CurvePoint>,
}

/// Posterior-predictive stable fraction per transition: for each draw the
/// mean `theta` over that transition's rows, summarized across draws.
pub fn stability_curve(
    draws: &PosteriorDraws,
    design: &DesignMatrix,
    dataset: &StabilityDataset,
    exec: Execution,
) -> Result<StabilityCurve> {
    if draws.is_empty() {
        return Err(Error::Empty("posterior draws"));
    }
    let eta = &design.x * draws.draws.transpose();
    let ts = dataset.transitions();
    let points = exec.map_slice(&ts, |&t| {
        let rows: Vec<usize> = (0..design.nrows()).filter(|&r| design.times[r] == t).collect();
        let per_draw: Vec<f64> = (0..eta.ncols())
            .map(|s| rows.iter().map(|&r| logistic(eta[(r, s)])).sum::<f64>() / rows.len() as f64)
            .collect();
        let sum = summarize(per_draw);
        CurvePoint {
            t,
            mean: sum.mean,
            lower: sum.lower,
            upper: sum.upper,
            observed: dataset.stability_fraction(t).expect("transition exists"),
        }
    });
    Ok(StabilityCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::AdjacencyMatrix;
    use crate::transition::{build_stability_dataset, StabilityMode, StabilityRecord};

    fn record(t: usize, bits: &[bool]) -> StabilityRecord {
        let code = Code::from_bits(bits.to_vec());
        StabilityRecord {
            pair: (0, 1),
            t,
            y: code.is_stable(),
            code,
        }
    }

    #[test]
    fn full_dummies_for_table_codes() {
        let d = StabilityDataset {
            v: 2,
            mode: StabilityMode::Cumulative,
            records: vec![
                record(3, &[false, false, false]),
                record(3, &[true, true, true]),
                record(3, &[true, true, false]),
            ],
        };
        let m = build_design(&d, Encoding::Full, DesignOptions::default()).unwrap();
        assert_eq!(m.labels, vec!["beta_0", "beta_time", "w=110", "w=111"]);
        assert_eq!(
            m.x.column(3).iter().copied().collect::<Vec<_>>(),
            vec![0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn all_zero_codes_leave_intercept_and_time() {
        let ams: Vec<_> = (1..=4).map(|t| AdjacencyMatrix::empty(3, t)).collect();
        let d = build_stability_dataset(&ams, StabilityMode::Cumulative).unwrap();
        for enc in [Encoding::Full, Encoding::Canonical] {
            let m = build_design(&d, enc, DesignOptions::default()).unwrap();
            assert_eq!(m.ncols(), 2);
            assert!(m.warning.is_none());
        }
        let d2 = build_stability_dataset(&ams[..2], StabilityMode::Cumulative).unwrap();
        let m = build_design(&d2, Encoding::Full, DesignOptions::default()).unwrap();
        assert!(m.warning.is_some());
    }

    #[test]
    fn canonical_labels() {
        let d = StabilityDataset {
            v: 2,
            mode: StabilityMode::Cumulative,
            records: vec![
                record(2, &[false, false]),
                record(2, &[true, true]),
                record(3, &[true, true, false]),
            ],
        };
        let m = build_design(&d, Encoding::Canonical, DesignOptions::default()).unwrap();
        assert_eq!(
            m.labels,
            vec!["beta_0", "beta_time", "beta_allpresent", "beta_mixed"]
        );
        let c = build_design(&d, Encoding::Canonical, DesignOptions { center_time: true }).unwrap();
        assert!((c.x.column(1).sum()).abs() < 1e-12);
    }

    #[test]
    fn likelihood_reference_values() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, 1.0, -2.0, 1.0, 3.0]);
        let y = DVector::from_vec(vec![1.0, 0.0, 1.0]);
        let zero = DVector::zeros(2);
        assert!((log_likelihood(&zero, &x, &y) - 3.0 * 0.5f64.ln()).abs() < 1e-15);

        let x1 = DMatrix::from_row_slice(1, 1, &[1.0]);
        let y1 = DVector::from_vec(vec![1.0]);
        let b = DVector::from_vec(vec![3f64.ln()]);
        assert!((log_likelihood(&b, &x1, &y1) - 0.75f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn extreme_eta_is_finite() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        let b = DVector::from_vec(vec![1000.0]);
        let ll = log_likelihood(&b, &x, &y);
        assert!((ll + 2000.0).abs() < 1e-9);
    }

    #[test]
    fn prior_only_posterior() {
        let x = DMatrix::<f64>::zeros(0, 3);
        let y = DVector::<f64>::zeros(0);
        let p = Prior::isotropic(3, 0.5, 10.0).unwrap();
        let lp = log_posterior(&p.mu.clone(), &x, &y, &p);
        let expect = 3.0 * (1.0 / ((2.0 * std::f64::consts::PI).sqrt() * 10.0)).ln();
        assert!((lp - expect).abs() < 1e-12);
        assert!(Prior::isotropic(2, 0.0, 0.0).is_err());
    }

    #[test]
    fn sigma_change_is_prior_only() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 1.0, -0.7]);
        let y = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.4, -1.2]);
        let p10 = Prior::isotropic(2, 0.0, 10.0).unwrap();
        let p100 = Prior::isotropic(2, 0.0, 100.0).unwrap();
        let delta = log_posterior(&b, &x, &y, &p100) - log_posterior(&b, &x, &y, &p10);
        let prior_delta = p100.log_density(&b) - p10.log_density(&b);
        assert!((delta - prior_delta).abs() < 1e-12);
    }

    #[test]
    fn map_under_separation_and_symmetry() {
        let x = DMatrix::from_element(50, 1, 1.0);
        let y = DVector::from_element(50, 1.0);
        let p = Prior::isotropic(1, 0.0, 10.0).unwrap();
        let fit = map_estimate(&x, &y, &p).unwrap();
        assert!(fit.converged);
        assert!(fit.beta[0] > 0.0 && fit.beta[0] < 50.0);

        let yb = DVector::from_iterator(50, (0..50).map(|i| f64::from(i % 2 == 0)));
        let fit = map_estimate(&x, &yb, &p).unwrap();
        assert!(fit.beta[0].abs() < 1e-6);
        assert!(map_estimate(&DMatrix::zeros(0, 1), &DVector::zeros(0), &p).is_err());
    }

    #[test]
    fn single_zero_draw_curve() {
        let draws = PosteriorDraws {
            labels: vec!["b0".into(), "bt".into()],
            draws: DMatrix::zeros(1, 2),
            acceptance_rate: 0.3,
            seed: 0,
            burn_in: 0,
            scale: 1.0,
            map: MapFit {
                beta: DVector::zeros(2),
                converged: true,
                iterations: 0,
                grad_norm: 0.0,
            },
            diagnostics: vec![],
        };
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 3.0, 1.0, 4.0]);
        let out = posterior_predictive(&draws, &x, Execution::Sequential).unwrap();
        for p in out {
            assert_eq!((p.mean, p.lower, p.upper), (0.5, 0.5, 0.5));
        }
    }

    #[test]
    fn decreasing_curve() {
        let mut draws = DMatrix::zeros(2, 2);
        draws.row_mut(0).copy_from_slice(&[3.0, -0.4]);
        draws.row_mut(1).copy_from_slice(&[2.0, -0.2]);
        let pd = PosteriorDraws {
            labels: vec!["b0".into(), "bt".into()],
            draws,
            acceptance_rate: 0.3,
            seed: 0,
            burn_in: 0,
            scale: 1.0,
            map: MapFit {
                beta: DVector::zeros(2),
                converged: true,
                iterations: 0,
                grad_norm: 0.0,
            },
            diagnostics: vec![],
        };
        let x = DMatrix::from_fn(10, 2, |r, c| if c == 0 { 1.0 } else { r as f64 + 2.0 });
        let out = posterior_predictive(&pd, &x, Execution::Sequential).unwrap();
        for w in out.windows(2) {
            assert!(w[1].mean <= w[0].mean);
            assert!(w[0].lower <= w[0].mean && w[0].mean <= w[0].upper);
        }
    }

    #[test]
    fn sampler_rejects_short_runs() {
        let x = DMatrix::from_element(10, 1, 1.0);
        let y = DVector::from_element(10, 1.0);
        let p = Prior::isotropic(1, 0.0, 10.0).unwrap();
        let cfg = SamplerConfig::new(10, 0, 1);
        assert!(sample_posterior(&x, &y, &p, &["b0".into()], &cfg).is_err());
    }
}
