//! Typed tabular input, fixed-length windowing, the ELEC2 adapter and the
//! seven-variable drift simulator.
//!
//! Data is stored column-major. A discrete column holds level indices into
//! the owning [`VariableSpec::levels`]; a continuous column holds `f64`.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::ops::Range;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariableKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    pub kind: VariableKind,
    /// Ordered level labels. May be left empty in a schema file for a
    /// discrete variable, in which case levels are collected from the data in
    /// first-appearance order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

impl VariableSpec {
    pub fn discrete(name: impl Into<String>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Discrete,
            levels: Vec::new(),
        }
    }

    pub fn discrete_with_levels<S: Into<String>>(
        name: impl Into<String>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Discrete,
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        VariableSpec {
            name: name.into(),
            kind: VariableKind::Continuous,
            levels: Vec::new(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == VariableKind::Discrete
    }
}

/// Column declarations as read from a schema config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub variables: Vec<VariableSpec>,
}

impl Schema {
    pub fn new(variables: Vec<VariableSpec>) -> Result<Self> {
        let schema = Schema { variables };
        schema.validate()?;
        Ok(schema)
    }

    /// Reads a schema from TOML, or JSON when the file extension is `.json`.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: Schema = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for (i, var) in self.variables.iter().enumerate() {
            if seen.insert(var.name.as_str(), i).is_some() {
                return Err(Error::Schema(format!("duplicate variable name `{}`", var.name)));
            }
            match var.kind {
                VariableKind::Continuous if !var.levels.is_empty() => {
                    return Err(Error::Schema(format!(
                        "continuous variable `{}` declares levels",
                        var.name
                    )));
                }
                VariableKind::Discrete if var.levels.len() == 1 => {
                    return Err(Error::Schema(format!(
                        "discrete variable `{}` declares a single level",
                        var.name
                    )));
                }
                _ => {}
            }
            let mut lv = var.levels.clone();
            lv.sort();
            lv.dedup();
            if lv.len() != var.levels.len() {
                return Err(Error::Schema(format!("variable `{}` repeats a level", var.name)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Discrete(Vec<u32>),
    Continuous(Vec<f64>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Discrete(v) => v.len(),
            Column::Continuous(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slice(&self, range: Range<usize>) -> Column {
        match self {
            Column::Discrete(v) => Column::Discrete(v[range].to_vec()),
            Column::Continuous(v) => Column::Continuous(v[range].to_vec()),
        }
    }

    pub fn as_discrete(&self) -> Option<&[u32]> {
        match self {
            Column::Discrete(v) => Some(v),
            Column::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&[f64]> {
        match self {
            Column::Continuous(v) => Some(v),
            Column::Discrete(_) => None,
        }
    }
}

/// A fully typed in-memory table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Vec<VariableSpec>,
    pub columns: Vec<Column>,
    pub rows: usize,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.schema
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// Projects onto the named columns, in the given order.
    pub fn select<S: AsRef<str>>(&self, names: &[S]) -> Result<Table> {
        let mut schema = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let idx = self.column_index(name.as_ref())?;
            schema.push(self.schema[idx].clone());
            columns.push(self.columns[idx].clone());
        }
        let out = Table {
            schema,
            columns,
            rows: self.rows,
        };
        Schema {
            variables: out.schema.clone(),
        }
        .validate()?;
        Ok(out)
    }

    /// Keeps rows in `range` (clamped to the table).
    pub fn slice_rows(&self, range: Range<usize>) -> Table {
        let end = range.end.min(self.rows);
        let start = range.start.min(end);
        Table {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.slice(start..end)).collect(),
            rows: end - start,
        }
    }
}

/// Raw string records as read from a delimited file.
#[derive(Debug, Clone)]
pub struct RawRecords {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<String>>,
}

/// Reads comma-delimited records, checking that every row has the same
/// number of fields as the first (or as the header when present).
pub fn read_records<R: Read>(reader: R, has_header: bool) -> Result<RawRecords> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    let mut width = None;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() == 1 && rec.get(0).is_some_and(str::is_empty) {
            continue;
        }
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::MalformedRow {
                row: rows.len(),
                expected,
                found: fields.len(),
            });
        }
        if has_header && line == 0 {
            header = Some(fields);
        } else {
            rows.push(fields);
        }
    }
    if rows.is_empty() {
        return Err(Error::NoRecords);
    }
    Ok(RawRecords { header, rows })
}

/// Types the fields at `indices` of each record according to `specs`.
fn type_records(records: &RawRecords, specs: &[VariableSpec], indices: &[usize]) -> Result<Table> {
    let mut schema: Vec<VariableSpec> = specs.to_vec();
    let mut columns = Vec::with_capacity(specs.len());
    for (spec, &field) in schema.iter_mut().zip(indices) {
        let column = match spec.kind {
            VariableKind::Continuous => {
                let mut out = Vec::with_capacity(records.rows.len());
                for (row, rec) in records.rows.iter().enumerate() {
                    let raw = &rec[field];
                    if raw.is_empty() {
                        return Err(Error::MissingValue {
                            row,
                            column: spec.name.clone(),
                        });
                    }
                    let value: f64 = raw.parse().map_err(|_| Error::ParseContinuous {
                        row,
                        column: spec.name.clone(),
                        value: raw.clone(),
                    })?;
                    if !value.is_finite() {
                        return Err(Error::ParseContinuous {
                            row,
                            column: spec.name.clone(),
                            value: raw.clone(),
                        });
                    }
                    out.push(value);
                }
                Column::Continuous(out)
            }
            VariableKind::Discrete => {
                let declared = !spec.levels.is_empty();
                let mut lookup: HashMap<String, u32> = spec
                    .levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.clone(), i as u32))
                    .collect();
                let mut out = Vec::with_capacity(records.rows.len());
                for (row, rec) in records.rows.iter().enumerate() {
                    let raw = &rec[field];
                    if raw.is_empty() {
                        return Err(Error::MissingValue {
                            row,
                            column: spec.name.clone(),
                        });
                    }
                    let code = match lookup.get(raw) {
                        Some(&c) => c,
                        None if declared => {
                            return Err(Error::UnknownLevel {
                                row,
                                column: spec.name.clone(),
                                value: raw.clone(),
                            })
                        }
                        None => {
                            let c = spec.levels.len() as u32;
                            spec.levels.push(raw.clone());
                            lookup.insert(raw.clone(), c);
                            c
                        }
                    };
                    out.push(code);
                }
                if spec.levels.len() < 2 {
                    return Err(Error::Schema(format!(
                        "discrete variable `{}` has fewer than 2 levels",
                        spec.name
                    )));
                }
                Column::Discrete(out)
            }
        };
        columns.push(column);
    }
    Ok(Table {
        schema,
        columns,
        rows: records.rows.len(),
    })
}

/// Parses a comma-delimited file positionally against `schema`.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, has_header: bool) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_reader(file, schema, has_header)
}

pub fn load_csv_reader<R: Read>(reader: R, schema: &Schema, has_header: bool) -> Result<Table> {
    schema.validate()?;
    let records = read_records(reader, has_header)?;
    let width = records.rows[0].len();
    if width != schema.len() {
        return Err(Error::MalformedRow {
            row: 0,
            expected: schema.len(),
            found: width,
        });
    }
    let indices: Vec<usize> = (0..schema.len()).collect();
    type_records(&records, &schema.variables, &indices)
}

/// One time block of `window_len` rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    /// 1-based period index `t`.
    pub index: usize,
    pub columns: Vec<Column>,
}

impl Window {
    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Column::len)
    }
}

/// The N x p x T cube of typed observations.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedTensor {
    pub schema: Vec<VariableSpec>,
    pub windows: Vec<Window>,
    pub window_len: usize,
}

impl WindowedTensor {
    /// Assembles a tensor from pre-built windows, checking shape invariants.
    pub fn from_windows(schema: Vec<VariableSpec>, windows: Vec<Window>) -> Result<Self> {
        if windows.len() < 2 {
            return Err(Error::TooFewWindows {
                rows: windows.iter().map(Window::rows).sum(),
                window_len: windows.first().map_or(0, Window::rows),
            });
        }
        let window_len = windows[0].rows();
        for w in &windows {
            if w.columns.len() != schema.len() {
                return Err(Error::DimensionMismatch {
                    expected: schema.len(),
                    found: w.columns.len(),
                });
            }
            for (spec, col) in schema.iter().zip(&w.columns) {
                if col.len() != window_len {
                    return Err(Error::DimensionMismatch {
                        expected: window_len,
                        found: col.len(),
                    });
                }
                let ok = match (spec.kind, col) {
                    (VariableKind::Discrete, Column::Discrete(v)) => {
                        v.iter().all(|&c| (c as usize) < spec.levels.len())
                    }
                    (VariableKind::Continuous, Column::Continuous(v)) => v.iter().all(|x| x.is_finite()),
                    _ => false,
                };
                if !ok {
                    return Err(Error::Schema(format!(
                        "window {} column `{}` does not match its declared kind",
                        w.index, spec.name
                    )));
                }
            }
        }
        Ok(WindowedTensor {
            schema,
            windows,
            window_len,
        })
    }

    pub fn p(&self) -> usize {
        self.schema.len()
    }

    pub fn t(&self) -> usize {
        self.windows.len()
    }
}

/// Result of [`make_windows`]: the tensor plus the count of trailing rows
/// that did not fill a complete window.
#[derive(Debug, Clone, PartialEq)]
pub struct Windowing {
    pub tensor: WindowedTensor,
    pub discarded: usize,
}

pub fn make_windows(table: &Table, window_len: usize) -> Result<Windowing> {
    if window_len < 2 {
        return Err(Error::InvalidConfig(format!(
            "window_len must be >= 2, got {window_len}"
        )));
    }
    let count = table.rows / window_len;
    if count < 2 {
        return Err(Error::TooFewWindows {
            rows: table.rows,
            window_len,
        });
    }
    let windows = (0..count)
        .map(|k| Window {
            index: k + 1,
            columns: table
                .columns
                .iter()
                .map(|c| c.slice(k * window_len..(k + 1) * window_len))
                .collect(),
        })
        .collect();
    Ok(Windowing {
        tensor: WindowedTensor {
            schema: table.schema.clone(),
            windows,
            window_len,
        },
        discarded: table.rows - count * window_len,
    })
}

/// Column selection and typing for the ELEC2 electricity-market file.
#[derive(Debug, Clone, PartialEq)]
pub struct Elec2Options {
    /// Columns to keep, in node order.
    pub columns: Vec<String>,
    /// Columns typed discrete. Every other selected column is continuous.
    pub discrete: Vec<String>,
    /// Discrete columns that must have exactly two levels.
    pub binary: Vec<String>,
    pub window_len: usize,
    /// Optional half-open row range applied before windowing (all rows by default).
    pub rows: Option<Range<usize>>,
}

impl Elec2Options {
    /// The class label `class` discrete and binary, all other columns continuous.
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>, window_len: usize) -> Self {
        Elec2Options {
            columns: columns.into_iter().map(Into::into).collect(),
            discrete: vec!["class".into()],
            binary: vec!["class".into()],
            window_len,
            rows: None,
        }
    }

    pub fn with_rows(mut self, rows: Range<usize>) -> Self {
        self.rows = Some(rows);
        self
    }
}

pub fn elec2_adapter(path: impl AsRef<Path>, opts: &Elec2Options) -> Result<Windowing> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    elec2_adapter_reader(file, opts)
}

pub fn elec2_adapter_reader<R: Read>(reader: R, opts: &Elec2Options) -> Result<Windowing> {
    let table = select_typed(reader, &opts.columns, &opts.discrete)?;
    for name in &opts.binary {
        if let Ok(idx) = table.column_index(name) {
            let levels = table.schema[idx].levels.len();
            if table.schema[idx].is_discrete() && levels != 2 {
                return Err(Error::NotBinary {
                    column: name.clone(),
                    levels,
                });
            }
        }
    }
    let table = match &opts.rows {
        Some(r) => table.slice_rows(r.clone()),
        None => table,
    };
    make_windows(&table, opts.window_len)
}

/// Reads a headed CSV, keeping only `columns` and typing those listed in
/// `discrete` as discrete (levels collected) and the rest continuous.
pub fn select_typed<R: Read, S: AsRef<str>>(reader: R, columns: &[S], discrete: &[S]) -> Result<Table> {
    if columns.len() < 2 {
        return Err(Error::TooFewVariables(columns.len()));
    }
    let records = read_records(reader, true)?;
    let header = records.header.clone().ok_or(Error::NoRecords)?;
    let mut specs = Vec::with_capacity(columns.len());
    let mut indices = Vec::with_capacity(columns.len());
    for name in columns {
        let name = name.as_ref();
        let idx = header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
        indices.push(idx);
        specs.push(if discrete.iter().any(|d| d.as_ref() == name) {
            VariableSpec::discrete(name)
        } else {
            VariableSpec::continuous(name)
        });
    }
    Schema {
        variables: specs.clone(),
    }
    .validate()?;
    type_records(&records, &specs, &indices)
}

/// Settings for the seven-variable, eight-period synthetic drift study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n_per_period: usize,
    pub seed: u64,
}

impl SimulationConfig {
    pub const PERIODS: usize = 8;
    pub const MIN_N: usize = 50;

    pub fn new(n_per_period: usize, seed: u64) -> Result<Self> {
        let cfg = SimulationConfig { n_per_period, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_per_period < Self::MIN_N {
            return Err(Error::InvalidConfig(format!(
                "n_per_period must be >= {}, got {}",
                Self::MIN_N,
                self.n_per_period
            )));
        }
        Ok(())
    }
}

pub const SIMULATION_VARIABLES: [&str; 7] = ["X", "Y", "Z", "W", "S", "H", "T_var"];

/// Generating system for one period. Periods sharing a variant share equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    /// t = 1 and t = 8
    Base,
    /// t = 2 and t = 3
    WideZ,
    /// t = 4 and t = 5
    BoostedT,
    /// t = 6
    YDriven,
    /// t = 7
    Crossed,
}

impl Regime {
    fn for_period(t: usize) -> Regime {
        match t {
            1 | 8 => Regime::Base,
            2 | 3 => Regime::WideZ,
            4 | 5 => Regime::BoostedT,
            6 => Regime::YDriven,
            _ => Regime::Crossed,
        }
    }
}

struct Noise {
    x: Normal<f64>,
    y: Normal<f64>,
    u01: Uniform<f64>,
    u14: Uniform<f64>,
    u1_5000: Uniform<f64>,
}

impl Noise {
    fn new() -> Self {
        Noise {
            x: Normal::new(5.0, 100.0).unwrap(),
            y: Normal::new(0.0, 3.0).unwrap(),
            u01: Uniform::new(0.0, 1.0).unwrap(),
            u14: Uniform::new(1.0, 4.0).unwrap(),
            u1_5000: Uniform::new(1.0, 5000.0).unwrap(),
        }
    }
}

/// Draws one record `[X, Y, Z, W, S, H, T_var]`. Noise terms are drawn in
/// variable order so that every period consumes exactly seven draws per row.
fn draw_row(regime: Regime, noise: &Noise, rng: &mut ChaCha8Rng) -> [f64; 7] {
    let x = noise.x.sample(rng);
    let y = noise.y.sample(rng) + 0.8 * x;
    let z_noise = match regime {
        Regime::Base => noise.u01.sample(rng),
        _ => noise.u1_5000.sample(rng),
    };
    let z = z_noise + 0.2 * y;
    let w = noise.u01.sample(rng) + 0.5 * x;
    let s_noise = noise.u14.sample(rng);
    let s = match regime {
        Regime::YDriven | Regime::Crossed => s_noise + 0.89 * y,
        _ => s_noise + 0.89 * z,
    };
    let h_noise = noise.u1_5000.sample(rng);
    let h = match regime {
        Regime::Base => h_noise + z,
        Regime::WideZ | Regime::BoostedT => h_noise + 0.5 * z,
        Regime::YDriven => h_noise + 0.5 * y + 0.89 * x,
        Regime::Crossed => h_noise + 0.5 * y + 0.89 * w,
    };
    let t_noise = noise.u01.sample(rng);
    let t = match regime {
        Regime::Base => t_noise + 0.5 * h,
        Regime::WideZ => t_noise + 0.5 * w,
        Regime::BoostedT => t_noise + 0.5 * w + 0.89 * w,
        Regime::YDriven => t_noise + 0.89 * w,
        Regime::Crossed => t_noise + 0.5 * y + 0.89 * x,
    };
    [x, y, z, w, s, h, t]
}

/// Generates the eight-period synthetic tensor. Deterministic in `cfg.seed`.
pub fn simulate_drift(cfg: &SimulationConfig) -> Result<WindowedTensor> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Noise::new();
    let n = cfg.n_per_period;
    let windows = (1..=SimulationConfig::PERIODS)
        .map(|t| {
            let regime = Regime::for_period(t);
            let mut cols = (0..7).map(|_| Vec::with_capacity(n)).collect::<Vec<_>>();
            for _ in 0..n {
                let row = draw_row(regime, &noise, &mut rng);
                for (c, v) in cols.iter_mut().zip(row) {
                    c.push(v);
                }
            }
            Window {
                index: t,
                columns: cols.into_iter().map(Column::Continuous).collect(),
            }
        })
        .collect();
    let schema = SIMULATION_VARIABLES
        .iter()
        .map(|&n| VariableSpec::continuous(n))
        .collect();
    WindowedTensor::from_windows(schema, windows)
}
