mod common;

use common::*;
use kflow::graphs::{
    evaluate, evaluate_on, evaluate_with_labels, normalize, potential_field_graphs, potential_graph,
    schouten_of_graphs, tadpole_graphs, wedge_graph, GraphError,
};
use kflow::jetcore::parse_poly;
use kflow::tetraflow::gamma1;
use kflow::{DiffPoly, GraphSum, KGraph, PolyVector};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const CASES: u64 = 100;

fn p2(s: &str) -> DiffPoly {
    parse_poly(s, 2).unwrap()
}

/// Graph with `m` ground vertices each hit by exactly one edge; the other
/// edges land anywhere among the internal vertices.
fn rand_graph(r: &mut ChaCha8Rng) -> KGraph {
    let m = r.gen_range(1..=2);
    let k = r.gen_range(1..=3);
    let mut slots: Vec<usize> = (0..2 * k).collect();
    slots.shuffle(r);
    let mut targets = vec![[usize::MAX; 2]; k];
    for (ground, &slot) in slots.iter().take(m).enumerate() {
        targets[slot / 2][slot % 2] = ground;
    }
    for &slot in slots.iter().skip(m) {
        targets[slot / 2][slot % 2] = m + r.gen_range(0..k);
    }
    KGraph::new(m, targets).unwrap()
}

fn relabel(g: &KGraph, r: &mut ChaCha8Rng) -> KGraph {
    let m = g.ground_count();
    let k = g.internal_count();
    let mut perm: Vec<usize> = (0..k).collect();
    perm.shuffle(r);
    let map = |t: usize| if t < m { t } else { m + perm[t - m] };
    let mut targets = vec![[0; 2]; k];
    for (v, [a, b]) in g.targets().iter().enumerate() {
        targets[perm[v]] = [map(*a), map(*b)];
    }
    KGraph::new(m, targets).unwrap()
}

fn rand_sum(r: &mut ChaCha8Rng, m: usize) -> GraphSum {
    let mut s = GraphSum::new();
    while s.len() < 3 {
        let g = rand_graph(r);
        if g.ground_count() == m {
            s.push(rand_rational(r), g);
        }
    }
    s
}

#[test]
fn fixed_label_figures_sum_to_the_potential() {
    let g = potential_graph();
    let p = PolyVector::symbolic_bivector(2);
    // Labels per vertex in edge order: ground vertex, then the two vertices
    // feeding it.
    let figures = [
        ([1, 2, 1, 2, 1, 2], "u_xx*u_y^2"),
        ([1, 2, 1, 2, 2, 1], "-u_xy*u_x*u_y"),
        ([1, 2, 2, 1, 1, 2], "-u_xy*u_x*u_y"),
        ([1, 2, 2, 1, 2, 1], "u_yy*u_x^2"),
    ];
    let mut total = DiffPoly::zero(2);
    for (labels, value) in figures {
        let v = evaluate_with_labels(&g, &labels, &p).unwrap();
        assert_eq!(v, p2(value));
        total = &total + &v;
    }
    assert_eq!(total, evaluate(&GraphSum::single(g), 2).unwrap().get(&[1, 2]).unwrap());
    assert_eq!(evaluate_with_labels(&wedge_graph(), &[1, 2], &p).unwrap(), p2("u"));
    assert!(matches!(
        evaluate_with_labels(&wedge_graph(), &[1], &p),
        Err(GraphError::LabelCount { .. })
    ));
}

#[test]
fn graph_field_with_tadpole_trivializes_gamma1_in_two_dimensions() {
    let p = PolyVector::symbolic_bivector(2);
    let c = DiffPoly::param(2, "c");
    let field = evaluate(&potential_field_graphs(), 2)
        .unwrap()
        .checked_add(&evaluate(&tadpole_graphs(), 2).unwrap().mul_poly(&c))
        .unwrap();
    let bracket = kflow::schouten::schouten_bracket(&field, &p).unwrap();
    assert_eq!(bracket, gamma1(&p).unwrap());
    assert_eq!(
        schouten_of_graphs(&potential_field_graphs(), &p).unwrap(),
        gamma1(&p).unwrap()
    );
}

#[test]
fn evaluation_is_linear() {
    let mut r = rng(41);
    for _ in 0..CASES {
        let m = r.gen_range(1..=2);
        let a = rand_sum(&mut r, m);
        let b = rand_sum(&mut r, m);
        let w = rand_rational(&mut r);
        let p = if r.gen_bool(0.5) {
            PolyVector::symbolic_bivector(2)
        } else {
            rand_poisson_3d(&mut r)
        };
        let lhs = evaluate_on(&a.concat(&b.scale(&w)), &p).unwrap();
        let mut rhs = evaluate_on(&a, &p).unwrap();
        rhs.add_scaled(&evaluate_on(&b, &p).unwrap(), &w);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn normalize_is_idempotent_and_preserves_values() {
    let mut r = rng(42);
    for _ in 0..CASES {
        let m = r.gen_range(1..=2);
        let s = rand_sum(&mut r, m);
        let n = normalize(&s);
        assert_eq!(normalize(&n), n);
        assert_eq!(evaluate(&n, 2).unwrap(), evaluate(&s, 2).unwrap(), "{s}");
    }
}

#[test]
fn relabeling_internal_vertices_preserves_canonical_form_and_value() {
    let mut r = rng(43);
    for _ in 0..CASES {
        let g = rand_graph(&mut r);
        let h = relabel(&g, &mut r);
        assert_eq!(g.canonical(), h.canonical());
        let p = rand_poisson_3d(&mut r);
        assert_eq!(
            evaluate_on(&GraphSum::single(g.clone()), &p).unwrap(),
            evaluate_on(&GraphSum::single(h), &p).unwrap(),
            "{g}"
        );
    }
}

#[test]
fn double_edge_graphs_vanish_everywhere() {
    let mut r = rng(44);
    for _ in 0..CASES {
        let g = rand_graph(&mut r);
        if !g.has_double_edge() {
            continue;
        }
        assert!(evaluate(&GraphSum::single(g.clone()), 3).unwrap().is_zero());
        assert!(normalize(&GraphSum::single(g)).is_empty());
    }
}

#[test]
fn graph_text_round_trip() {
    let mut r = rng(45);
    for _ in 0..CASES {
        let s = rand_sum(&mut r, 2);
        assert_eq!(GraphSum::parse(&s.to_string()).unwrap(), s);
    }
}

#[test]
fn three_dimensional_evaluation_of_the_wedge_is_p() {
    let mut r = rng(46);
    for _ in 0..10 {
        let p = rand_poisson_3d(&mut r);
        assert_eq!(evaluate_on(&GraphSum::single(wedge_graph()), &p).unwrap(), p);
    }
}
