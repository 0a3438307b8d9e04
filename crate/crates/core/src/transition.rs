//! Bit-history encoding of edge presence across windows and the derived
//! stability indicator.
//!
//! A pair's code at horizon `t` is the big-endian bit string
//! `AM_1 AM_2 ... AM_t`; its integer value is `sum 2^(t-k) AM_k`. Codes are
//! stored as bit strings so horizons beyond 64 periods stay exact; the
//! integer value is only materialized up to [`MAX_INTEGER_HORIZON`] bits.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::AdjacencyMatrix;

pub const MAX_INTEGER_HORIZON: usize = 62;

/// Edge-presence history, most significant (earliest) bit first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Code(Vec<bool>);

impl Code {
    pub fn from_bits(bits: impl Into<Vec<bool>>) -> Self {
        Code(bits.into())
    }

    pub fn from_value(w: u64, horizon: usize) -> Result<Self> {
        decode_bits(w, horizon).map(Code)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn value(&self) -> Result<u64> {
        encode_bits(&self.0)
    }

    pub fn is_all_absent(&self) -> bool {
        self.0.iter().all(|&b| !b)
    }

    pub fn is_all_present(&self) -> bool {
        self.0.iter().all(|&b| b)
    }

    /// `w = 0` or `w = 2^t - 1`.
    pub fn is_stable(&self) -> bool {
        self.is_all_absent() || self.is_all_present()
    }

    /// Sort key that orders by horizon, then by integer value.
    pub fn ordering_key(&self) -> (usize, &[bool]) {
        (self.0.len(), &self.0)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn encode_bits(bits: &[bool]) -> Result<u64> {
    if bits.len() > MAX_INTEGER_HORIZON {
        return Err(Error::HorizonOverflow(bits.len()));
    }
    Ok(bits.iter().fold(0u64, |acc, &b| 2 * acc + u64::from(b)))
}

/// Big-endian expansion of `w` into exactly `horizon` bits.
pub fn decode_bits(w: u64, horizon: usize) -> Result<Vec<bool>> {
    if horizon > MAX_INTEGER_HORIZON {
        return Err(Error::HorizonOverflow(horizon));
    }
    if w >> horizon != 0 {
        return Err(Error::CodeOutOfRange { code: w, horizon });
    }
    Ok((0..horizon).rev().map(|k| (w >> k) & 1 == 1).collect())
}

pub fn stability_indicator(w: u64, horizon: usize) -> Result<bool> {
    if horizon > MAX_INTEGER_HORIZON {
        return Err(Error::HorizonOverflow(horizon));
    }
    if w >> horizon != 0 {
        return Err(Error::CodeOutOfRange { code: w, horizon });
    }
    Ok(w == 0 || w == (1u64 << horizon) - 1)
}

/// Upper-triangular pair order `(0,1), (0,2), ..., (v-2, v-1)`.
pub fn pairs(v: usize) -> Vec<(usize, usize)> {
    (0..v).flat_map(|i| (i + 1..v).map(move |j| (i, j))).collect()
}

/// Codes of all pairs after folding `horizon` adjacency matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    v: usize,
    horizon: usize,
    codes: Vec<Code>,
}

impl TransitionMatrix {
    pub fn v(&self) -> usize {
        self.v
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.v - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Code of pair `(i, j)`; symmetric in its arguments. Panics on `i == j`.
    pub fn code(&self, i: usize, j: usize) -> &Code {
        assert!(i != j, "transition matrix has no diagonal");
        &self.codes[self.slot(i, j)]
    }

    /// Integer code `w_ij`; `0` on the diagonal.
    pub fn value(&self, i: usize, j: usize) -> Result<u64> {
        if i == j {
            return Ok(0);
        }
        self.code(i, j).value()
    }

    /// Codes in pair order.
    pub fn codes(&self) -> &[Code] {
        &self.codes
    }
}

fn check_sequence(ams: &[AdjacencyMatrix]) -> Result<usize> {
    if ams.len() < 2 {
        return Err(Error::Empty("need at least 2 adjacency matrices"));
    }
    let v = ams[0].v();
    for w in ams.windows(2) {
        if w[1].v() != v {
            return Err(Error::DimensionMismatch {
                expected: v,
                found: w[1].v(),
            });
        }
        if w[1].window_index() <= w[0].window_index() {
            return Err(Error::InvalidConfig(format!(
                "adjacency matrices out of order: window {} follows {}",
                w[1].window_index(),
                w[0].window_index()
            )));
        }
    }
    Ok(v)
}

/// Folds `AM_1..AM_T` into `TM_1..TM_T`, with `TM_1 = AM_1` and
/// `TM_t = 2 TM_{t-1} + AM_t`. Element `k` of the result has horizon `k + 1`.
pub fn fold_transition(ams: &[AdjacencyMatrix]) -> Result<Vec<TransitionMatrix>> {
    let v = check_sequence(ams)?;
    let pairs = pairs(v);
    let mut current = vec![Code::default(); pairs.len()];
    let mut out = Vec::with_capacity(ams.len());
    for (h, am) in ams.iter().enumerate() {
        for (code, &(i, j)) in current.iter_mut().zip(&pairs) {
            code.push(am.has(i, j));
        }
        out.push(TransitionMatrix {
            v,
            horizon: h + 1,
            codes: current.clone(),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityMode {
    /// Histories accumulate from the first window.
    Cumulative,
    /// Each transition compares only the two adjacent windows.
    Consecutive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityRecord {
    pub pair: (usize, usize),
    /// Transition index, `2..=T`.
    pub t: usize,
    pub code: Code,
    pub y: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityDataset {
    pub v: usize,
    pub mode: StabilityMode,
    pub records: Vec<StabilityRecord>,
}

impl StabilityDataset {
    /// Number of node pairs per transition.
    pub fn pairs_per_transition(&self) -> usize {
        self.v * (self.v - 1) / 2
    }

    /// Distinct transition indices in ascending order.
    pub fn transitions(&self) -> Vec<usize> {
        let mut ts: Vec<usize> = self.records.iter().map(|r| r.t).collect();
        ts.sort_unstable();
        ts.dedup();
        ts
    }

    /// Count of stable pairs at transition `t`.
    pub fn stable_count(&self, t: usize) -> Result<usize> {
        let mut seen = false;
        let mut count = 0;
        for r in self.records.iter().filter(|r| r.t == t) {
            seen = true;
            count += usize::from(r.y);
        }
        if !seen {
            return Err(Error::UnknownTransition(t));
        }
        Ok(count)
    }

    pub fn stability_fraction(&self, t: usize) -> Result<f64> {
        Ok(self.stable_count(t)? as f64 / self.pairs_per_transition() as f64)
    }

    /// `(t, fraction)` for every transition.
    pub fn fractions(&self) -> Vec<(usize, f64)> {
        self.transitions()
            .into_iter()
            .map(|t| (t, self.stability_fraction(t).expect("transition exists")))
            .collect()
    }

    /// CSV with header `pair_i,pair_j,t,w,y`; `w` is written as a bit string.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["pair_i", "pair_j", "t", "w", "y"])?;
        for r in &self.records {
            wtr.write_record([
                r.pair.0.to_string(),
                r.pair.1.to_string(),
                r.t.to_string(),
                r.code.to_string(),
                u8::from(r.y).to_string(),
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<stability csv>", e))?;
        Ok(())
    }
}

/// Flattens a forest sequence into transition-major, pair-lexicographic
/// stability records.
pub fn build_stability_dataset(ams: &[AdjacencyMatrix], mode: StabilityMode) -> Result<StabilityDataset> {
    let v = check_sequence(ams)?;
    let pairs = pairs(v);
    let mut records = Vec::with_capacity(pairs.len() * (ams.len() - 1));
    match mode {
        StabilityMode::Cumulative => {
            let tms = fold_transition(ams)?;
            for tm in &tms[1..] {
                for (code, &pair) in tm.codes().iter().zip(&pairs) {
                    records.push(StabilityRecord {
                        pair,
                        t: tm.horizon(),
                        y: code.is_stable(),
                        code: code.clone(),
                    });
                }
            }
        }
        StabilityMode::Consecutive => {
            for (k, w) in ams.windows(2).enumerate() {
                for &(i, j) in &pairs {
                    let code = Code::from_bits(vec![w[0].has(i, j), w[1].has(i, j)]);
                    records.push(StabilityRecord {
                        pair: (i, j),
                        t: k + 2,
                        y: code.is_stable(),
                        code,
                    });
                }
            }
        }
    }
    Ok(StabilityDataset { v, mode, records })
}
