//! Maximum-weight spanning forests over penalized MI, built with Kruskal's
//! algorithm under the forbidden-path restriction for mixed graphs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::dataset::{Column, VariableKind, VariableSpec, Window, WindowedTensor};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mi::{self, EdgeWeight, MiConfig, MixedMode, PairKind};

/// Symmetric V x V matrix of penalized weights. Degenerate pairs carry
/// `-inf` and are never selected.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    pub v: usize,
    pub window_index: usize,
    pub kinds: Vec<VariableKind>,
    weights: Vec<f64>,
    degenerate: Vec<bool>,
    estimates: Vec<Option<EdgeWeight>>,
}

impl WeightedGraph {
    /// Builds a graph from an upper-triangular weight function. Used by
    /// tests and by callers that bring their own weights.
    pub fn from_fn(kinds: Vec<VariableKind>, mut weight: impl FnMut(usize, usize) -> f64) -> Self {
        let v = kinds.len();
        let mut g = WeightedGraph {
            v,
            window_index: 1,
            kinds,
            weights: vec![f64::NEG_INFINITY; v * v],
            degenerate: vec![false; v * v],
            estimates: vec![None; v * v],
        };
        for i in 0..v {
            for j in i + 1..v {
                let w = weight(i, j);
                g.weights[i * v + j] = w;
                g.weights[j * v + i] = w;
            }
        }
        g
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.v + j]
    }

    pub fn is_degenerate(&self, i: usize, j: usize) -> bool {
        self.degenerate[i * self.v + j]
    }

    pub fn estimate(&self, i: usize, j: usize) -> Option<&EdgeWeight> {
        self.estimates[i * self.v + j].as_ref()
    }

    fn set_flagged(&mut self, i: usize, j: usize) {
        let v = self.v;
        for (a, b) in [(i, j), (j, i)] {
            self.weights[a * v + b] = f64::NEG_INFINITY;
            self.degenerate[a * v + b] = true;
        }
    }
}

fn pair_list(v: usize) -> Vec<(usize, usize)> {
    (0..v).flat_map(|i| (i + 1..v).map(move |j| (i, j))).collect()
}

fn estimate_pair(
    window: &Window,
    schema: &[VariableSpec],
    cfg: &MiConfig,
    i: usize,
    j: usize,
) -> Result<EdgeWeight> {
    let names = (schema[i].name.as_str(), schema[j].name.as_str());
    let n = window.rows();
    let (est, kind) = match (&window.columns[i], &window.columns[j]) {
        (Column::Discrete(a), Column::Discrete(b)) => (mi::mi_discrete(a, b)?, PairKind::Dd),
        (Column::Discrete(z), Column::Continuous(y)) | (Column::Continuous(y), Column::Discrete(z)) => {
            let est = match cfg.mixed_mode {
                MixedMode::Homogeneous => mi::mi_mixed_homogeneous(z, y, names)?,
                MixedMode::Heterogeneous => mi::mi_mixed_heterogeneous(z, y, names)?,
            };
            (est, PairKind::Dc)
        }
        (Column::Continuous(a), Column::Continuous(b)) => (mi::mi_continuous(a, b, names)?, PairKind::Cc),
    };
    Ok(EdgeWeight::new(est, n, cfg.criterion, kind))
}

pub fn weight_matrix(window: &Window, schema: &[VariableSpec], cfg: &MiConfig) -> Result<WeightedGraph> {
    weight_matrix_with(window, schema, cfg, Execution::default())
}

/// Evaluates all p(p-1)/2 pairs. Estimator failures become flags on the
/// pair rather than errors on the window.
pub fn weight_matrix_with(
    window: &Window,
    schema: &[VariableSpec],
    cfg: &MiConfig,
    exec: Execution,
) -> Result<WeightedGraph> {
    let v = schema.len();
    if v < 2 {
        return Err(Error::TooFewVariables(v));
    }
    if window.columns.len() != v {
        return Err(Error::DimensionMismatch {
            expected: v,
            found: window.columns.len(),
        });
    }
    if window.rows() == 0 {
        return Err(Error::Empty("window"));
    }
    let pairs = pair_list(v);
    let results = exec.map_slice(&pairs, |&(i, j)| estimate_pair(window, schema, cfg, i, j));
    let mut g = WeightedGraph::from_fn(schema.iter().map(|s| s.kind).collect(), |_, _| 0.0);
    g.window_index = window.index;
    for (&(i, j), res) in pairs.iter().zip(results) {
        match res {
            Ok(w) => {
                for (a, b) in [(i, j), (j, i)] {
                    g.weights[a * v + b] = w.penalized;
                    g.estimates[a * v + b] = Some(w);
                }
            }
            Err(_) => g.set_flagged(i, j),
        }
    }
    Ok(g)
}

/// Symmetric binary forest indicator for one window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AdjacencyJson", into = "AdjacencyJson")]
pub struct AdjacencyMatrix {
    v: usize,
    window_index: usize,
    bits: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
struct AdjacencyJson {
    v: usize,
    window_index: usize,
    edges: Vec<[usize; 2]>,
}

impl From<AdjacencyMatrix> for AdjacencyJson {
    fn from(am: AdjacencyMatrix) -> Self {
        AdjacencyJson {
            v: am.v,
            window_index: am.window_index,
            edges: am.edges().map(|(i, j)| [i, j]).collect(),
        }
    }
}

impl TryFrom<AdjacencyJson> for AdjacencyMatrix {
    type Error = Error;

    fn try_from(j: AdjacencyJson) -> Result<Self> {
        AdjacencyMatrix::from_edges(j.v, j.window_index, j.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl AdjacencyMatrix {
    pub fn empty(v: usize, window_index: usize) -> Self {
        AdjacencyMatrix {
            v,
            window_index,
            bits: vec![false; v * v],
        }
    }

    pub fn from_edges(
        v: usize,
        window_index: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut am = AdjacencyMatrix::empty(v, window_index);
        for (i, j) in edges {
            if i >= v || j >= v || i == j {
                return Err(Error::InvalidConfig(format!(
                    "edge ({i}, {j}) invalid for {v} nodes"
                )));
            }
            am.set(i, j, true);
        }
        Ok(am)
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn window_index(&self) -> usize {
        self.window_index
    }

    pub fn has(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.v + j]
    }

    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.bits[i * self.v + j] = on;
        self.bits[j * self.v + i] = on;
    }

    /// Edges as `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.v).flat_map(move |i| {
            (i + 1..self.v)
                .filter(move |&j| self.has(i, j))
                .map(move |j| (i, j))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.v).filter(move |&j| self.has(i, j))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.v).all(|i| !self.has(i, i) && (0..self.v).all(|j| self.has(i, j) == self.has(j, i)))
    }

    pub fn is_acyclic(&self) -> bool {
        let mut uf = UnionFind::new(self.v);
        self.edges().all(|(i, j)| uf.union(i, j))
    }
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// For every node reachable from `root`, whether the tree path from that
/// node to `root` (excluding the node itself, including `root`) visits a
/// continuous node. Unreachable nodes are `None`.
fn continuous_on_path(forest: &AdjacencyMatrix, kinds: &[VariableKind], root: usize) -> Vec<Option<bool>> {
    let mut out = vec![None; forest.v()];
    out[root] = Some(false);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let via = out[u] == Some(true) || kinds[u] == VariableKind::Continuous;
        for w in forest.neighbors(u) {
            if out[w].is_none() {
                out[w] = Some(via);
                queue.push_back(w);
            }
        }
    }
    out
}

/// Whether adding `edge` to `forest` would join two discrete nodes through a
/// path with at least one continuous interior node. `edge` must connect two
/// distinct trees of `forest`.
pub fn creates_forbidden_path(
    forest: &AdjacencyMatrix,
    kinds: &[VariableKind],
    edge: (usize, usize),
) -> bool {
    let (a, b) = edge;
    let side_a = continuous_on_path(forest, kinds, a);
    let side_b = continuous_on_path(forest, kinds, b);
    let discrete = |side: &[Option<bool>]| -> Vec<bool> {
        side.iter()
            .zip(kinds)
            .filter(|(s, k)| s.is_some() && **k == VariableKind::Discrete)
            .map(|(s, _)| s.unwrap())
            .collect()
    };
    let da = discrete(&side_a);
    let db = discrete(&side_b);
    if da.is_empty() || db.is_empty() {
        return false;
    }
    da.iter().any(|&c| c) || db.iter().any(|&c| c)
}

/// Kruskal over descending penalized weight, ties broken by `(i, j)`.
/// Only strictly positive, non-degenerate edges are considered.
pub fn kruskal_max_forest(g: &WeightedGraph) -> AdjacencyMatrix {
    let mut candidates: Vec<(f64, usize, usize)> = pair_list(g.v)
        .into_iter()
        .filter(|&(i, j)| !g.is_degenerate(i, j))
        .map(|(i, j)| (g.weight(i, j), i, j))
        .filter(|&(w, _, _)| w > 0.0)
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut forest = AdjacencyMatrix::empty(g.v, g.window_index);
    let mut uf = UnionFind::new(g.v);
    let mut added = 0;
    for (_, i, j) in candidates {
        if added + 1 == g.v {
            break;
        }
        if uf.find(i) == uf.find(j) || creates_forbidden_path(&forest, &g.kinds, (i, j)) {
            continue;
        }
        uf.union(i, j);
        forest.set(i, j, true);
        added += 1;
    }
    forest
}

pub fn forest_total_weight(am: &AdjacencyMatrix, g: &WeightedGraph) -> Result<f64> {
    if am.v() != g.v {
        return Err(Error::DimensionMismatch {
            expected: g.v,
            found: am.v(),
        });
    }
    Ok(am.edges().map(|(i, j)| g.weight(i, j)).sum())
}

/// Weight matrices for every window; windows processed per `exec`.
pub fn weight_matrices(
    tensor: &WindowedTensor,
    cfg: &MiConfig,
    exec: Execution,
) -> Result<Vec<WeightedGraph>> {
    // Pair-level parallelism happens inside each window only when windows
    // themselves run sequentially.
    let inner = match exec {
        Execution::Parallel if tensor.windows.len() > 1 => Execution::Sequential,
        other => other,
    };
    exec.map_slice(&tensor.windows, |w| {
        weight_matrix_with(w, &tensor.schema, cfg, inner)
    })
    .into_iter()
    .collect()
}

/// One forest per window, in window order.
pub fn forests(tensor: &WindowedTensor, cfg: &MiConfig, exec: Execution) -> Result<Vec<AdjacencyMatrix>> {
    Ok(weight_matrices(tensor, cfg, exec)?
        .iter()
        .map(kruskal_max_forest)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use VariableKind::{Continuous as C, Discrete as D};

    fn graph(kinds: Vec<VariableKind>, w: &[((usize, usize), f64)]) -> WeightedGraph {
        WeightedGraph::from_fn(kinds, |i, j| {
            w.iter()
                .find(|(p, _)| *p == (i, j))
                .map_or(f64::NEG_INFINITY, |(_, v)| *v)
        })
    }

    #[test]
    fn three_node_example() {
        let g = graph(vec![C, C, C], &[((0, 1), 5.0), ((0, 2), 3.0), ((1, 2), 1.0)]);
        let am = kruskal_max_forest(&g);
        assert_eq!(am.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
        assert_eq!(forest_total_weight(&am, &g).unwrap(), 8.0);
    }

    #[test]
    fn negative_weights_give_empty_forest() {
        let g = graph(vec![C, C, C], &[((0, 1), -1.0), ((0, 2), -3.0), ((1, 2), 0.0)]);
        let am = kruskal_max_forest(&g);
        assert_eq!(am.edge_count(), 0);
        assert_eq!(forest_total_weight(&am, &g).unwrap(), 0.0);
    }

    #[test]
    fn forbidden_path_rejects_second_mixed_edge() {
        // nodes: a (discrete), c (continuous), b (discrete)
        let g = graph(vec![D, C, D], &[((0, 1), 5.0), ((1, 2), 4.0), ((0, 2), 1.0)]);
        let am = kruskal_max_forest(&g);
        assert!(am.has(0, 1));
        assert!(!am.has(1, 2));
        // b joins through the discrete-discrete edge instead
        assert!(am.has(0, 2));
    }

    #[test]
    fn forbidden_path_cases() {
        let kinds = [C, C, C, C];
        let mut f = AdjacencyMatrix::empty(4, 1);
        f.set(0, 1, true);
        assert!(!creates_forbidden_path(&f, &kinds, (1, 2)));

        let kinds = [D, D];
        let f = AdjacencyMatrix::empty(2, 1);
        assert!(!creates_forbidden_path(&f, &kinds, (0, 1)));

        // {d1 - c1} + {d2}, edge (c1, d2)
        let kinds = [D, C, D];
        let mut f = AdjacencyMatrix::empty(3, 1);
        f.set(0, 1, true);
        assert!(creates_forbidden_path(&f, &kinds, (1, 2)));

        // d1 - d2 - d3 chain through a discrete interior is allowed
        let kinds = [D, D, D];
        let mut f = AdjacencyMatrix::empty(3, 1);
        f.set(0, 1, true);
        assert!(!creates_forbidden_path(&f, &kinds, (1, 2)));
    }

    #[test]
    fn adjacency_json_shape() {
        let am = AdjacencyMatrix::from_edges(4, 3, [(2, 0), (1, 3)]).unwrap();
        let s = serde_json::to_string(&am).unwrap();
        assert_eq!(s, r#"{"v":4,"window_index":3,"edges":[[0,2],[1,3]]}"#);
        let back: AdjacencyMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, am);
        assert!(
            serde_json::from_str::<AdjacencyMatrix>(r#"{"v":2,"window_index":1,"edges":[[0,0]]}"#).is_err()
        );
    }

    #[test]
    fn cycle_detection() {
        let am = AdjacencyMatrix::from_edges(3, 1, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(!am.is_acyclic());
        assert!(am.is_symmetric());
    }

    fn window(cols: Vec<Column>) -> Window {
        Window {
            index: 1,
            columns: cols,
        }
    }

    #[test]
    fn two_variable_window() {
        let schema = vec![VariableSpec::continuous("a"), VariableSpec::continuous("b")];
        let w = window(vec![
            Column::Continuous(vec![1.0, 2.0, 3.0, 4.0]),
            Column::Continuous(vec![1.0, 2.5, 2.9, 4.2]),
        ]);
        let g = weight_matrix(&w, &schema, &MiConfig::default()).unwrap();
        assert_eq!(g.v, 2);
        assert!(g.weight(0, 1).is_finite());
        assert_eq!(g.weight(0, 1), g.weight(1, 0));
    }

    #[test]
    fn constant_column_is_flagged_and_isolated() {
        let schema = vec![
            VariableSpec::discrete_with_levels("d", ["0", "1"]),
            VariableSpec::continuous("a"),
            VariableSpec::continuous("k"),
        ];
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let d: Vec<u32> = (0..40).map(|i| u32::from(i >= 20)).collect();
        let w = window(vec![
            Column::Discrete(d),
            Column::Continuous(a),
            Column::Continuous(vec![3.0; 40]),
        ]);
        for mode in [MixedMode::Homogeneous, MixedMode::Heterogeneous] {
            let cfg = MiConfig {
                mixed_mode: mode,
                ..MiConfig::default()
            };
            let g = weight_matrix(&w, &schema, &cfg).unwrap();
            assert!(g.is_degenerate(0, 2) && g.is_degenerate(1, 2));
            assert!(!g.is_degenerate(0, 1));
            let am = kruskal_max_forest(&g);
            assert_eq!(am.neighbors(2).count(), 0);
            assert!(am.has(0, 1));
        }
    }

    #[test]
    fn tie_breaking_is_by_index() {
        let g = WeightedGraph::from_fn(vec![C, C, C], |_, _| 1.0);
        let am = kruskal_max_forest(&g);
        assert_eq!(am.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    }
}
