//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! A criterion whose literal statement cannot hold prints FAIL with the
//! reason, while the test still asserts everything that was verified, so
//! the printed verdicts cannot silently drift.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use kflow::fourier::{is_lattice_periodic, torus_demo};
use kflow::graphs::{
    evaluate, evaluate_on, leibniz_redirect, normalize, potential_field_graphs, potential_graph, schouten_of_graphs,
    tadpole_graphs, wedge_graph,
};
use kflow::jetcore::{parse_poly, rat};
use kflow::schouten::{divergence, jacobiator, poisson_differential, schouten_bracket};
use kflow::tetraflow::{gamma1, gamma2, gamma2_skew};
use kflow::trivialize::{
    all_params_zero, assemble_system, build_ansatz, check_solution, divergence_free_field, divergence_map,
    five_parameter_family, flow_target, solve,
};
use kflow::{DiffPoly, GraphSum, KGraph, PolyVector, TrigPoly};
use rand::seq::SliceRandom;
use rand::Rng;

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    // Written past the test harness capture so the verdicts always show.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance criterion {n:>2}: {verdict}  {detail}");
    let _ = out.flush();
}

fn p2(s: &str) -> DiffPoly {
    parse_poly(s, 2).unwrap()
}

fn u2() -> PolyVector {
    PolyVector::symbolic_bivector(2)
}

fn criterion_1() {
    let g = gamma1(&u2()).unwrap().single_component().unwrap();
    let expected = p2("u_xxx*u_y^3 - u_yyy*u_x^3 - 3*u_xxy*u_x*u_y^2 + 3*u_xyy*u_x^2*u_y");
    let pass = g == expected && g.len() == 4;
    report(
        1,
        pass,
        "Γ₁ in 2D is u_xxx u_y³ − u_yyy u_x³ − 3u_xxy u_x u_y² + 3u_xyy u_x² u_y",
    );
    assert!(pass);
}

fn criterion_2() {
    let table = gamma2(&u2()).unwrap();
    let expected = p2("-u_xx*u_yy*u_x*u_y + u_xy^2*u_x*u_y");
    let skew = gamma2_skew(&u2()).unwrap();
    let pass = table.get(1, 2) == &expected && table.get(2, 1) == &expected && skew.is_zero();
    report(
        2,
        pass,
        "Γ₂¹² = Γ₂²¹ = −u_xx u_yy u_x u_y + u_xy² u_x u_y and the skew part vanishes",
    );
    assert!(pass);
}

fn criterion_3() {
    let f = DiffPoly::param(2, "f1") * p2("u_xy") + DiffPoly::param(2, "f2") * p2("u_x*u_yy");
    let g = DiffPoly::param(2, "g1") * p2("u_xx*u") + DiffPoly::param(2, "g2") * p2("u_y");
    let x = PolyVector::vector(vec![f.clone(), g.clone()]).unwrap();
    let bracket = schouten_bracket(&u2(), &x).unwrap();
    let expected = &(&(&p2("u_x") * &f) + &(&p2("u_y") * &g))
        - &(&p2("u") * &(&f.total_derivative(1).unwrap() + &g.total_derivative(2).unwrap()));
    let pass = bracket.component_slots() == 1 && bracket.get(&[1, 2]).unwrap() == expected;
    report(3, pass, "[[P,X]] = u_x F + u_y G − u(F_x + G_y) for symbolic F, G");
    assert!(pass);
}

fn criterion_4() {
    let x = divergence_free_field();
    let residual = check_solution(&x, &flow_target()).unwrap();
    let div = divergence(&x).unwrap();
    let pass = x.get(&[1]).unwrap().params() == ["c"] && residual.is_zero() && div.is_zero();
    report(
        4,
        pass,
        "divergence-free field with symbolic c solves the conjugation equation; divergence 0",
    );
    assert!(pass);
}

fn criterion_5() {
    let ansatz = build_ansatz();
    let space = solve(&assemble_system(&ansatz).unwrap()).unwrap();
    let family_residual = check_solution(&five_parameter_family(), &flow_target()).unwrap();
    let pass = ansatz.monomials_f.len() == 12
        && ansatz.monomials_g.len() == 12
        && space.kernel_basis.len() == 5
        && space.particular == all_params_zero(&divergence_free_field())
        && family_residual.is_zero();
    report(
        5,
        pass,
        "12 + 12 monomials, kernel dimension 5, particular solution at zero parameters, symbolic family residual 0",
    );
    assert!(pass);
}

fn criterion_6() {
    let space = solve(&assemble_system(&build_ansatz()).unwrap()).unwrap();
    let map = divergence_map(&space).unwrap();
    let pass = map.rank == 5 && map.kernel.is_empty() && map.constant.is_zero();
    report(
        6,
        pass,
        "divergence map on (a, b, c, d, e) has rank 5 and trivial kernel",
    );
    assert!(pass);
}

fn criterion_7() {
    let c = DiffPoly::param(2, "c");
    let h = evaluate(&GraphSum::single(potential_graph()), 2)
        .unwrap()
        .checked_add(&evaluate(&GraphSum::single(wedge_graph()), 2).unwrap().mul_poly(&c))
        .unwrap();
    let h_ok = h.get(&[1, 2]).unwrap() == p2("u_xx*u_y^2 - 2*u_xy*u_x*u_y + u_yy*u_x^2 + c*u");
    let x = evaluate(&potential_field_graphs(), 2)
        .unwrap()
        .checked_add(&evaluate(&tadpole_graphs(), 2).unwrap().mul_poly(&c))
        .unwrap();
    let x_ok = x == divergence_free_field();
    let tadpole_ok =
        evaluate(&tadpole_graphs(), 2).unwrap() == PolyVector::vector(vec![p2("u_y"), p2("-u_x")]).unwrap();
    let double_edges = [
        KGraph::new(2, vec![[0, 1], [2, 2]]).unwrap(),
        KGraph::new(1, vec![[0, 2], [1, 1]]).unwrap(),
        KGraph::new(2, vec![[0, 3], [1, 1]]).unwrap(),
        KGraph::new(2, vec![[0, 1], [4, 4], [2, 3]]).unwrap(),
    ];
    let double_ok = double_edges
        .iter()
        .all(|g| g.has_double_edge() && (2..=3).all(|n| evaluate(&GraphSum::single(g.clone()), n).unwrap().is_zero()));
    let redirect_ok = leibniz_redirect(&potential_graph(), 1).unwrap() == potential_field_graphs();
    let pass = h_ok && x_ok && tadpole_ok && double_ok && redirect_ok;
    report(
        7,
        pass,
        "graphs evaluate to H + c·u, redirect to the divergence-free field, tadpole (u_y, −u_x), double edges 0",
    );
    assert!(pass);
}

fn criterion_8() {
    let g = parse_poly("x^2*y^2 + y^2*z^2 + z^2*x^2", 3).unwrap();
    let p = PolyVector::nambu(&g).unwrap();
    let jac_ok = jacobiator(&p).unwrap().is_zero();
    let g1 = gamma1(&p).unwrap();
    let oracle_ok = [[1, 2], [1, 3], [2, 3]]
        .iter()
        .all(|&[i, j]| g1.get(&[i, j]).unwrap() == gamma1_all_indices(&p, i, j));
    let residual = schouten_of_graphs(&potential_field_graphs(), &p)
        .unwrap()
        .checked_sub(&g1)
        .unwrap();
    let nonzero = !residual.is_zero();

    // Same Casimir with density x: still Poisson, and here Γ₁ is nonzero.
    let weighted = p.mul_poly(&DiffPoly::coord(3, 1));
    let wg1 = gamma1(&weighted).unwrap();
    let weighted_oracle_ok = [[1, 2], [1, 3], [2, 3]]
        .iter()
        .all(|&[i, j]| wg1.get(&[i, j]).unwrap() == gamma1_all_indices(&weighted, i, j));
    let weighted_residual = schouten_of_graphs(&potential_field_graphs(), &weighted)
        .unwrap()
        .checked_sub(&wg1)
        .unwrap();
    let weighted_ok = jacobiator(&weighted).unwrap().is_zero()
        && weighted_oracle_ok
        && !wg1.is_zero()
        && !weighted_residual.is_zero()
        && schouten_of_graphs(&tadpole_graphs(), &weighted).unwrap().is_zero();

    let detail = if nonzero {
        "jacobiator 0, Γ₁ matches the all-index oracle, graph residual nonzero".to_string()
    } else {
        format!(
            "jacobiator 0 and Γ₁ matches the all-index oracle, but on this unit-density instance Γ₁ = 0 and the \
             graph field is 0, so the residual is 0, not nonzero; with density x the residual is nonzero for every c \
             (verified: {weighted_ok})"
        )
    };
    report(8, jac_ok && oracle_ok && nonzero, &detail);
    assert!(jac_ok && oracle_ok && weighted_ok);
    assert!(
        g1.is_zero() && residual.is_zero(),
        "instance behaviour changed; revisit the verdict"
    );
}

const CLAIMED_REDUCED_FLOW: &str =
    "16*alpha^4*pi^6*sin(2*pi*4*x)*sin(2*pi*2*y) + 16*alpha^4*pi^6*sin(2*pi*2*x)*sin(2*pi*4*y)";
const UNREDUCED_FLOW: &str = "-128*alpha^4*pi^6*cos(2*pi*x)*cos(2*pi*y)*sin(2*pi*x)^3*sin(2*pi*y)^3 \
    + 128*alpha^4*pi^6*sin(2*pi*x)*sin(2*pi*y)*cos(2*pi*x)^3*cos(2*pi*y)^3";
const DISPLAYED_H: &str = "-16*alpha^3*pi^4*sin(2*pi*x)*cos(2*pi*y)*sin(2*pi*x)^2*sin(2*pi*y)^2 \
    - 32*alpha^3*pi^4*sin(2*pi*x)*cos(2*pi*y)*cos(2*pi*x)^2*sin(2*pi*y)^2 \
    - 16*alpha^3*pi^4*sin(2*pi*x)*cos(2*pi*y)*cos(2*pi*y)^2*cos(2*pi*x)^2";
const DISPLAYED_F: &str = "-16*alpha^3*pi^5*cos(2*pi*x)*cos(2*pi*y) - 24*alpha^3*pi^5*cos(2*pi*3*x)*cos(2*pi*y) \
    + 8*alpha^3*pi^5*cos(2*pi*x)*cos(2*pi*3*y)";
const DISPLAYED_G: &str = "-16*alpha^3*pi^5*sin(2*pi*x)*sin(2*pi*y) + 24*alpha^3*pi^5*sin(2*pi*x)*sin(2*pi*3*y) \
    - 8*alpha^3*pi^5*sin(2*pi*3*x)*sin(2*pi*y)";

fn criterion_9() {
    let t = |s: &str| TrigPoly::parse(s, 2).unwrap();
    let r = torus_demo();
    let claimed = t(CLAIMED_REDUCED_FLOW);
    let flow_claim = r.flow == claimed;
    let flow_exact = r.flow == t(UNREDUCED_FLOW) && r.flow.scale(&rat(2)) == claimed;
    let h_ok = r.potential == t(DISPLAYED_H);
    let fg_claim = r.f == t(DISPLAYED_F) && r.g == t(DISPLAYED_G);
    let fg_swapped =
        t(DISPLAYED_F) == r.potential.derivative(1) && t(DISPLAYED_G) == r.potential.derivative(2).scale(&rat(-1));
    let lattice_ok = [&r.flow, &r.potential, &r.f, &r.g]
        .iter()
        .all(|f| is_lattice_periodic(f).0);
    let residual_ok = r.conjugation_residual().is_zero();
    let detail = format!(
        "flow equals the unreduced display = 8α⁴π⁶(sin 8πx sin 4πy + sin 4πx sin 8πy) \
         [claimed 16α⁴π⁶ form: {flow_claim}]; H matches: {h_ok}; displayed F, G equal (H_x, −H_y) rather than \
         (H_y, −H_x) [F, G match: {fg_claim}]; computed (H_y, −H_x) solves the equation: {residual_ok}; \
         integer-lattice supports: {lattice_ok}"
    );
    report(9, flow_claim && h_ok && fg_claim && lattice_ok, &detail);
    assert!(flow_exact && h_ok && fg_swapped && residual_ok && lattice_ok);
    assert!(!flow_claim && !fg_claim, "torus values changed; revisit the verdict");
}

fn rand_graph(r: &mut rand_chacha::ChaCha8Rng) -> KGraph {
    let m = r.gen_range(1..=2);
    let k = r.gen_range(1..=3);
    let mut slots: Vec<usize> = (0..2 * k).collect();
    slots.shuffle(r);
    let mut targets = vec![[0; 2]; k];
    for (i, &slot) in slots.iter().enumerate() {
        targets[slot / 2][slot % 2] = if i < m { i } else { m + r.gen_range(0..k) };
    }
    KGraph::new(m, targets).unwrap()
}

fn criterion_10() {
    const N: usize = 100;
    let mut r = rng(101);
    let mut ring = 0;
    for _ in 0..N {
        let p = rand_diff_poly(&mut r, 2, 4);
        let q = rand_diff_poly(&mut r, 2, 4);
        let s = rand_diff_poly(&mut r, 2, 3);
        let ok = &p * &(&q + &s) == &(&p * &q) + &(&p * &s)
            && &(&p * &q) * &s == &p * &(&q * &s)
            && (&p * &q).total_derivative(1).unwrap()
                == &(&p.total_derivative(1).unwrap() * &q) + &(&p * &q.total_derivative(1).unwrap())
            && p.total_derivative(1).unwrap().total_derivative(2).unwrap()
                == p.total_derivative(2).unwrap().total_derivative(1).unwrap();
        ring += ok as usize;
    }

    let mut bracket = 0;
    for _ in 0..N {
        let dim = r.gen_range(2..=3);
        let mut comp = |r: &mut rand_chacha::ChaCha8Rng| rand_diff_poly(r, dim, 2);
        let (pa, pb) = (r.gen_range(1..=2), r.gen_range(0..=1));
        let a = rand_polyvector(&mut r, pa, dim, &mut comp);
        let b = rand_polyvector(&mut r, pb, dim, &mut comp);
        let pc = r.gen_range(0..=1);
        let c = rand_polyvector(&mut r, pc, dim, &mut comp);
        let antisym =
            schouten_bracket(&a, &b).unwrap() == schouten_bracket(&b, &a).unwrap().scale(&-parity((pa + 1) * (pb + 1)));
        let leibniz = schouten_bracket(&a, &wedge(&b, &c)).unwrap()
            == wedge(&schouten_bracket(&a, &b).unwrap(), &c)
                .checked_add(&wedge(&b, &schouten_bracket(&a, &c).unwrap()).scale(&parity((pa + 1) * pb)))
                .unwrap();
        bracket += (antisym && leibniz) as usize;
    }

    let mut square = 0;
    for _ in 0..N {
        let p = rand_poisson_3d(&mut r);
        let mut comp = |r: &mut rand_chacha::ChaCha8Rng| rand_coord_poly(r, 3, 2, 3);
        let degree = r.gen_range(0..=1);
        let a = rand_polyvector(&mut r, degree, 3, &mut comp);
        let twice = poisson_differential(&p, &poisson_differential(&p, &a).unwrap()).unwrap();
        square += twice.is_zero() as usize;
    }

    let mut canon = 0;
    for _ in 0..N {
        let g = rand_graph(&mut r);
        let h = rand_graph(&mut r);
        let mut sum = GraphSum::single(g.clone());
        if h.ground_count() == g.ground_count() {
            sum.push(rand_rational(&mut r), h);
        }
        let n = normalize(&sum);
        let ok = g.canonical().canonical() == g.canonical()
            && normalize(&n) == n
            && evaluate_on(&n, &PolyVector::symbolic_bivector(2)).unwrap()
                == evaluate_on(&sum, &PolyVector::symbolic_bivector(2)).unwrap();
        canon += ok as usize;
    }

    let mut round_trip = 0;
    for _ in 0..N {
        let m = r.gen_range(1..=2);
        let mut sum = GraphSum::new();
        while sum.len() < 2 {
            let g = rand_graph(&mut r);
            if g.ground_count() == m {
                sum.push(rand_rational(&mut r), g);
            }
        }
        let out = kflow_cli::run(&["graph-eval", "--dim", "2"], &mut sum.to_string().as_bytes());
        let printed = PolyVector::parse(&out.stdout).ok();
        let poly = rand_diff_poly(&mut r, 2, 4);
        let ok = out.code == 0
            && printed == evaluate(&sum, 2).ok()
            && printed.map(|p| p.to_string() + "\n") == Some(out.stdout.clone())
            && parse_poly(&poly.to_string(), 2).ok() == Some(poly);
        round_trip += ok as usize;
    }

    let pass = [ring, bracket, square, canon, round_trip].iter().all(|&k| k == N);
    report(
        10,
        pass,
        &format!(
            "seeded suites of {N}: ring/derivation {ring}, antisymmetry+Leibniz {bracket}, ∂_P² = 0 {square}, \
             canonical form {canon}, CLI round trip {round_trip}"
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_criteria() {
    let start = Instant::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    let elapsed = start.elapsed();
    let _ = writeln!(
        std::io::stdout().lock(),
        "acceptance runtime: {:.2} s",
        elapsed.as_secs_f64()
    );
    assert!(elapsed.as_secs() < 60);
}
