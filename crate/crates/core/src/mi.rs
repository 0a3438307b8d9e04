//! Penalized mutual-information edge weights.
//!
//! Every estimator reports on the log-likelihood-ratio scale in nats, so
//! weights of discrete-discrete, mixed and continuous-continuous pairs are
//! directly comparable inside Kruskal's ordering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Aic,
    Bic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixedMode {
    Homogeneous,
    Heterogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiConfig {
    pub criterion: Criterion,
    pub mixed_mode: MixedMode,
}

impl Default for MiConfig {
    fn default() -> Self {
        MiConfig {
            criterion: Criterion::Aic,
            mixed_mode: MixedMode::Homogeneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairKind {
    Dd,
    Dc,
    Cc,
}

/// Unpenalized likelihood-ratio statistic with its degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub raw_mi: f64,
    pub df: usize,
    /// Set when |r| = 1 forced the correlation clamp.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub raw_mi: f64,
    pub df: usize,
    pub penalized: f64,
    pub pair_kind: PairKind,
    pub clamped: bool,
}

impl EdgeWeight {
    pub fn new(est: MiEstimate, n: usize, criterion: Criterion, pair_kind: PairKind) -> Self {
        EdgeWeight {
            raw_mi: est.raw_mi,
            df: est.df,
            penalized: penalize(est.raw_mi, est.df, n, criterion),
            pair_kind,
            clamped: est.clamped,
        }
    }
}

pub fn penalize(raw_mi: f64, df: usize, n: usize, criterion: Criterion) -> f64 {
    let per_df = match criterion {
        Criterion::Aic => 2.0,
        Criterion::Bic => (n as f64).ln(),
    };
    raw_mi - per_df * df as f64
}

fn check_len(a: usize, b: usize, min: usize) -> Result<usize> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    if a < min {
        return Err(Error::InvalidConfig(format!(
            "need at least {min} observations, got {a}"
        )));
    }
    Ok(a)
}

/// Densifies level codes to `0..k` over the levels actually observed.
fn observed_levels(codes: &[u32]) -> (Vec<usize>, usize) {
    let max = codes.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut remap = vec![usize::MAX; max];
    let mut k = 0;
    for &c in codes {
        if remap[c as usize] == usize::MAX {
            remap[c as usize] = k;
            k += 1;
        }
    }
    (codes.iter().map(|&c| remap[c as usize]).collect(), k)
}

/// Contingency-table statistic `N * sum f_uv ln(f_uv / (f_u f_v))`.
pub fn mi_discrete(a: &[u32], b: &[u32]) -> Result<MiEstimate> {
    let n = check_len(a.len(), b.len(), 2)?;
    let (a, ka) = observed_levels(a);
    let (b, kb) = observed_levels(b);
    let mut joint = vec![0usize; ka * kb];
    let mut ma = vec![0usize; ka];
    let mut mb = vec![0usize; kb];
    for (&u, &v) in a.iter().zip(&b) {
        joint[u * kb + v] += 1;
        ma[u] += 1;
        mb[v] += 1;
    }
    let nf = n as f64;
    let mut terms = Vec::with_capacity(ka * kb);
    for u in 0..ka {
        for v in 0..kb {
            let c = joint[u * kb + v];
            if c > 0 {
                let c = c as f64;
                terms.push(c * (c * nf / (ma[u] as f64 * mb[v] as f64)).ln());
            }
        }
    }
    // Summing in sorted order makes the result exactly symmetric in (a, b).
    terms.sort_by(f64::total_cmp);
    let acc: f64 = terms.iter().sum();
    Ok(MiEstimate {
        raw_mi: acc.max(0.0),
        df: (ka - 1) * (kb - 1),
        clamped: false,
    })
}

/// Per-level count and mean squared deviation around the level mean.
struct GroupMoments {
    n: Vec<usize>,
    msd: Vec<f64>,
    /// Grand mean squared deviation.
    s0: f64,
}

fn group_moments(z: &[u32], y: &[f64]) -> GroupMoments {
    let (z, k) = observed_levels(z);
    let mut n = vec![0usize; k];
    let mut sum = vec![0.0; k];
    for (&g, &v) in z.iter().zip(y) {
        n[g] += 1;
        sum[g] += v;
    }
    let mean: Vec<f64> = sum.iter().zip(&n).map(|(s, &c)| s / c as f64).collect();
    let mut ss = vec![0.0; k];
    for (&g, &v) in z.iter().zip(y) {
        let d = v - mean[g];
        ss[g] += d * d;
    }
    let grand = y.iter().sum::<f64>() / y.len() as f64;
    let s0 = y.iter().map(|v| (v - grand) * (v - grand)).sum::<f64>() / y.len() as f64;
    GroupMoments {
        msd: ss.iter().zip(&n).map(|(s, &c)| s / c as f64).collect(),
        n,
        s0,
    }
}

fn degenerate(names: (&str, &str)) -> Error {
    Error::DegenerateVariance(names.0.to_string(), names.1.to_string())
}

/// Homogeneous conditional-Gaussian statistic `(N/2) ln(s0 / s)`, where `s`
/// is the pooled within-level variance.
pub fn mi_mixed_homogeneous(z: &[u32], y: &[f64], names: (&str, &str)) -> Result<MiEstimate> {
    let n = check_len(z.len(), y.len(), 2)?;
    let m = group_moments(z, y);
    if m.n.len() < 2 {
        return Ok(MiEstimate {
            raw_mi: 0.0,
            df: 0,
            clamped: false,
        });
    }
    let nf = n as f64;
    let s = m.n.iter().zip(&m.msd).map(|(&c, v)| c as f64 * v).sum::<f64>() / nf;
    if s.is_nan() || s <= 0.0 {
        return Err(degenerate(names));
    }
    Ok(MiEstimate {
        raw_mi: (0.5 * nf * (m.s0 / s).ln()).max(0.0),
        df: m.n.len() - 1,
        clamped: false,
    })
}

/// Heterogeneous statistic `(N/2) ln s0 - (1/2) sum n_i ln s_i`.
pub fn mi_mixed_heterogeneous(z: &[u32], y: &[f64], names: (&str, &str)) -> Result<MiEstimate> {
    let n = check_len(z.len(), y.len(), 2)?;
    let m = group_moments(z, y);
    if m.n.len() < 2 {
        return Ok(MiEstimate {
            raw_mi: 0.0,
            df: 0,
            clamped: false,
        });
    }
    if m.n
        .iter()
        .zip(&m.msd)
        .any(|(&c, &v)| c < 2 || v.is_nan() || v <= 0.0)
    {
        return Err(degenerate(names));
    }
    let within: f64 = m.n.iter().zip(&m.msd).map(|(&c, v)| c as f64 * v.ln()).sum();
    Ok(MiEstimate {
        raw_mi: (0.5 * n as f64 * m.s0.ln() - 0.5 * within).max(0.0),
        df: 2 * (m.n.len() - 1),
        clamped: false,
    })
}

/// Largest admissible squared correlation.
pub const R2_CLAMP: f64 = 1.0 - 1e-12;

/// Bivariate Gaussian statistic `-(N/2) ln(1 - r^2)`.
pub fn mi_continuous(a: &[f64], b: &[f64], names: (&str, &str)) -> Result<MiEstimate> {
    let n = check_len(a.len(), b.len(), 3)?;
    let nf = n as f64;
    let ma = a.iter().sum::<f64>() / nf;
    let mb = b.iter().sum::<f64>() / nf;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa.is_nan() || sbb.is_nan() || saa <= 0.0 || sbb <= 0.0 {
        return Err(degenerate(names));
    }
    let r2 = (sab * sab) / (saa * sbb);
    let clamped = r2 >= R2_CLAMP;
    let r2 = r2.min(R2_CLAMP);
    Ok(MiEstimate {
        raw_mi: (-0.5 * nf * (1.0 - r2).ln()).max(0.0),
        df: 1,
        clamped,
    })
}
