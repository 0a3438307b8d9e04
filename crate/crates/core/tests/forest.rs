use graphdrift::dataset::{Column, VariableKind, VariableSpec, Window};
use graphdrift::forest::{
    creates_forbidden_path, forest_total_weight, kruskal_max_forest, weight_matrix, AdjacencyMatrix,
    WeightedGraph,
};
use graphdrift::mi::MiConfig;
use proptest::prelude::*;
use VariableKind::{Continuous as C, Discrete as D};

fn graph(kinds: Vec<VariableKind>, w: &[(usize, usize, f64)]) -> WeightedGraph {
    WeightedGraph::from_fn(kinds, |i, j| {
        w.iter().find(|e| (e.0, e.1) == (i, j)).map_or(-1.0, |e| e.2)
    })
}

/// Path between `a` and `b` in a forest, endpoints included.
fn path(am: &AdjacencyMatrix, a: usize, b: usize) -> Option<Vec<usize>> {
    fn dfs(am: &AdjacencyMatrix, u: usize, target: usize, parent: usize, acc: &mut Vec<usize>) -> bool {
        acc.push(u);
        if u == target {
            return true;
        }
        for w in am.neighbors(u).collect::<Vec<_>>() {
            if w != parent && dfs(am, w, target, u, acc) {
                return true;
            }
        }
        acc.pop();
        false
    }
    let mut acc = Vec::new();
    dfs(am, a, b, usize::MAX, &mut acc).then_some(acc)
}

fn has_forbidden_path(am: &AdjacencyMatrix, kinds: &[VariableKind]) -> bool {
    for a in 0..kinds.len() {
        for b in a + 1..kinds.len() {
            if kinds[a] != D || kinds[b] != D {
                continue;
            }
            if let Some(p) = path(am, a, b) {
                if p[1..p.len() - 1].iter().any(|&k| kinds[k] == C) {
                    return true;
                }
            }
        }
    }
    false
}

/// Best total over every acyclic edge subset using only positive weights.
fn brute_force_best(g: &WeightedGraph) -> f64 {
    let edges: Vec<(usize, usize)> = (0..g.v).flat_map(|i| (i + 1..g.v).map(move |j| (i, j))).collect();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << edges.len()) {
        let mut am = AdjacencyMatrix::empty(g.v, 1);
        let mut total = 0.0;
        let mut ok = true;
        for (k, &(i, j)) in edges.iter().enumerate() {
            if mask & (1 << k) != 0 {
                let w = g.weight(i, j);
                if w <= 0.0 || path(&am, i, j).is_some() {
                    ok = false;
                    break;
                }
                am.set(i, j, true);
                total += w;
            }
        }
        if ok {
            best = best.max(total);
        }
    }
    best
}

#[test]
fn three_node_example() {
    let g = graph(vec![C, C, C], &[(0, 1, 5.0), (0, 2, 3.0), (1, 2, 1.0)]);
    let am = kruskal_max_forest(&g);
    assert_eq!(am.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 2)]);
    assert_eq!(forest_total_weight(&am, &g).unwrap(), 8.0);
    assert_eq!(brute_force_best(&g), 8.0);
}

#[test]
fn negative_weights_give_empty_forest() {
    let g = graph(vec![C, C, D], &[]);
    let am = kruskal_max_forest(&g);
    assert_eq!(am.edge_count(), 0);
    assert_eq!(forest_total_weight(&am, &g).unwrap(), 0.0);
}

#[test]
fn discrete_continuous_discrete_chain_rejected() {
    // nodes: a discrete, c continuous, b discrete
    let g = graph(vec![D, C, D], &[(0, 1, 9.0), (1, 2, 7.0)]);
    let am = kruskal_max_forest(&g);
    assert_eq!(am.edges().collect::<Vec<_>>(), vec![(0, 1)]);
}

#[test]
fn forbidden_path_examples() {
    let mut f = AdjacencyMatrix::empty(4, 1);
    assert!(!creates_forbidden_path(&f, &[C, C, C, C], (0, 1)));
    assert!(!creates_forbidden_path(&f, &[D, D, C, C], (0, 1)));
    f.set(0, 1, true);
    assert!(creates_forbidden_path(&f, &[D, C, D, C], (1, 2)));
    assert!(!creates_forbidden_path(&f, &[D, C, C, C], (1, 2)));
}

#[test]
fn window_with_constant_column() {
    let schema = vec![
        VariableSpec::continuous("a"),
        VariableSpec::continuous("b"),
        VariableSpec::continuous("k"),
    ];
    let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
    let b: Vec<f64> = a.iter().map(|x| 2.0 * x + (x * 0.7).sin()).collect();
    let w = Window {
        index: 1,
        columns: vec![
            Column::Continuous(a),
            Column::Continuous(b),
            Column::Continuous(vec![3.0; 20]),
        ],
    };
    let g = weight_matrix(&w, &schema, &MiConfig::default()).unwrap();
    assert!(g.is_degenerate(0, 2) && g.is_degenerate(1, 2));
    assert_eq!(g.weight(0, 2), f64::NEG_INFINITY);
    let am = kruskal_max_forest(&g);
    assert_eq!(am.neighbors(2).count(), 0);
    assert!(am.has(0, 1));
}

#[test]
fn two_node_graph() {
    let g = graph(vec![C, C], &[(0, 1, 2.0)]);
    assert_eq!(kruskal_max_forest(&g).edge_count(), 1);
}

#[test]
fn json_roundtrip() {
    let am = AdjacencyMatrix::from_edges(4, 3, [(0, 2), (1, 3)]).unwrap();
    let s = serde_json::to_string(&am).unwrap();
    assert_eq!(s, r#"{"v":4,"window_index":3,"edges":[[0,2],[1,3]]}"#);
    let back: AdjacencyMatrix = serde_json::from_str(&s).unwrap();
    assert_eq!(back, am);
}

fn arb_graph(mixed: bool) -> impl Strategy<Value = WeightedGraph> {
    (2usize..=6).prop_flat_map(move |v| {
        let m = v * (v - 1) / 2;
        (
            prop::collection::vec(-5.0f64..20.0, m),
            prop::collection::vec(any::<bool>(), v),
        )
            .prop_map(move |(ws, ds)| {
                let kinds: Vec<VariableKind> = ds.iter().map(|&d| if mixed && d { D } else { C }).collect();
                let mut k = 0;
                let mut table = vec![0.0; v * v];
                for i in 0..v {
                    for j in i + 1..v {
                        table[i * v + j] = ws[k];
                        k += 1;
                    }
                }
                WeightedGraph::from_fn(kinds, |i, j| table[i * v + j])
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn continuous_forest_is_optimal(g in arb_graph(false)) {
        let am = kruskal_max_forest(&g);
        prop_assert!(am.is_symmetric() && am.is_acyclic());
        let got = forest_total_weight(&am, &g).unwrap();
        prop_assert!((got - brute_force_best(&g)).abs() < 1e-9);
    }

    #[test]
    fn mixed_forest_has_no_forbidden_path(g in arb_graph(true)) {
        let am = kruskal_max_forest(&g);
        prop_assert!(am.is_symmetric() && am.is_acyclic());
        prop_assert!(am.edge_count() < g.v);
        prop_assert!(!has_forbidden_path(&am, &g.kinds));
        prop_assert_eq!(kruskal_max_forest(&g), am);
    }
}
