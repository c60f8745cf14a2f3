//! Brute-force oracles written against the raw graph data, compared with the
//! library on small graphs.

use std::collections::BTreeSet;

use ribbon_torsor::bernardi::{alpha_left, alpha_right, bernardi_act, bernardi_beta, bernardi_tour, StepAction};
use ribbon_torsor::break_divisor::{enumerate_break_divisors, is_break_divisor, is_compatible};
use ribbon_torsor::corpus::{
    banana4, complete, default_corpus, k3, path3, single_edge, theta_planar, theta_torus, RotationSystems,
};
use ribbon_torsor::divisor::{are_equivalent, kirchhoff_count, laplacian_of, q_reduce, PicardGroup};
use ribbon_torsor::graph::{fundamental_cycle, spanning_trees, trace_faces};
use ribbon_torsor::rotor::{
    cycle_is_reversible, directed_cycles, rotor_act, rotor_move, rotor_move_traced, rotors_from_tree,
};
use ribbon_torsor::{Dart, Divisor, DivisorClass, Error, RibbonGraph, SpanningTree};

fn div(v: &[i64]) -> Divisor {
    Divisor::from_vec(v.to_vec())
}

fn find(p: &mut [usize], x: usize) -> usize {
    if p[x] != x {
        let r = find(p, p[x]);
        p[x] = r;
    }
    p[x]
}

/// Every (|V| - 1)-subset of edges that is acyclic.
fn brute_trees(g: &RibbonGraph) -> Vec<Vec<usize>> {
    let (n, m) = (g.num_vertices(), g.num_edges());
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize != n - 1 {
            continue;
        }
        let mut p: Vec<usize> = (0..n).collect();
        let mut ok = true;
        for e in 0..m {
            if mask >> e & 1 == 1 {
                let [a, b] = g.ends(e);
                let (ra, rb) = (find(&mut p, a), find(&mut p, b));
                if ra == rb {
                    ok = false;
                    break;
                }
                p[ra] = rb;
            }
        }
        if ok {
            out.push((0..m).filter(|&e| mask >> e & 1 == 1).collect());
        }
    }
    out
}

/// Break divisors from every tree and every endpoint choice.
fn brute_breaks(g: &RibbonGraph) -> BTreeSet<Vec<i64>> {
    let mut out = BTreeSet::new();
    for t in brute_trees(g) {
        let rest: Vec<usize> = (0..g.num_edges()).filter(|e| !t.contains(e)).collect();
        for mask in 0u32..(1 << rest.len()) {
            let mut d = vec![0i64; g.num_vertices()];
            for (i, &e) in rest.iter().enumerate() {
                d[g.ends(e)[(mask >> i & 1) as usize]] += 1;
            }
            out.insert(d);
        }
    }
    out
}

/// `D ~ D'` by searching `f` with entries in `-r..=r` (with `f(0) = 0`).
fn brute_equivalent(g: &RibbonGraph, a: &Divisor, b: &Divisor, r: i64) -> bool {
    let n = g.num_vertices();
    let mut f = vec![-r; n];
    f[0] = 0;
    loop {
        if &(b + &laplacian_of(g, &f).unwrap()) == a {
            return true;
        }
        let mut i = 1;
        loop {
            if i == n {
                return false;
            }
            f[i] += 1;
            if f[i] <= r {
                break;
            }
            f[i] = -r;
            i += 1;
        }
    }
}

/// q-reduced by definition: non-negative off `q`, and no nonempty set
/// avoiding `q` can fire.
fn brute_is_reduced(g: &RibbonGraph, d: &Divisor, q: usize) -> bool {
    let n = g.num_vertices();
    if (0..n).any(|v| v != q && d[v] < 0) {
        return false;
    }
    for s in 1u32..(1 << n) {
        if s >> q & 1 == 1 {
            continue;
        }
        let legal = (0..n).filter(|&v| s >> v & 1 == 1).all(|v| {
            let out = g
                .rotation(v)
                .iter()
                .filter(|&&e| s >> g.opposite(e, v) & 1 == 0)
                .count() as i64;
            d[v] >= out
        });
        if legal {
            return false;
        }
    }
    true
}

fn small_graphs() -> Vec<RibbonGraph> {
    let mut v = vec![single_edge(), path3(), k3(), theta_planar(), theta_torus(), banana4()];
    v.extend(RotationSystems::new(&complete(4)).take(4));
    v
}

#[test]
fn spanning_trees_match_brute_force_and_kirchhoff() {
    for (name, g) in default_corpus() {
        let ours: Vec<Vec<usize>> = spanning_trees(&g).iter().map(|t| t.edges().to_vec()).collect();
        let mut brute = brute_trees(&g);
        brute.sort();
        assert_eq!(ours, brute, "{name}");
        assert_eq!(kirchhoff_count(&g), brute.len() as i128, "{name}");
    }
    assert_eq!(spanning_trees(&k3()).len(), 3);
    let theta = theta_planar();
    let names: Vec<Vec<&str>> = spanning_trees(&theta).iter().map(|t| t.names(&theta)).collect();
    assert_eq!(names, vec![vec!["p"], vec!["q"], vec!["r"]]);
}

#[test]
fn break_divisors_match_brute_force() {
    for (name, g) in default_corpus() {
        if g.num_edges() > 10 {
            continue;
        }
        let ours: BTreeSet<Vec<i64>> = enumerate_break_divisors(&g)
            .into_iter()
            .map(|b| b.divisor.coefficients().to_vec())
            .collect();
        assert_eq!(ours, brute_breaks(&g), "{name}");
    }
}

#[test]
fn membership_matches_brute_force() {
    for g in small_graphs() {
        let breaks = brute_breaks(&g);
        let n = g.num_vertices();
        let genus = g.genus() as i64;
        // All vectors with entries in 0..=genus and the right degree.
        let mut d = vec![0i64; n];
        loop {
            if d.iter().sum::<i64>() == genus {
                assert_eq!(is_break_divisor(&g, &div(&d)), breaks.contains(&d), "{d:?}");
            }
            let mut i = 0;
            while i < n {
                d[i] += 1;
                if d[i] <= genus {
                    break;
                }
                d[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
}

#[test]
fn theta_compatibility_assignments() {
    let g = theta_planar();
    let t = SpanningTree::from_names(&g, &["p"]).unwrap();
    let (u, v) = (0, 1);
    let w = is_compatible(&g, &div(&[1, 1]), &t).unwrap().unwrap();
    let q = g.edge("q").unwrap();
    let r = g.edge("r").unwrap();
    let got: BTreeSet<(usize, usize)> = w.into_iter().collect();
    let option_a: BTreeSet<(usize, usize)> = [(q, u), (r, v)].into();
    let option_b: BTreeSet<(usize, usize)> = [(q, v), (r, u)].into();
    assert!(got == option_a || got == option_b);
}

#[test]
fn laplacian_examples() {
    let g = k3();
    assert!(laplacian_of(&g, &[7, 7, 7]).unwrap().is_zero());
    assert_eq!(laplacian_of(&g, &[1, 0, 0]).unwrap(), div(&[2, -1, -1]));
    assert_eq!(laplacian_of(&theta_planar(), &[1, 0]).unwrap(), div(&[3, -3]));
    assert!(matches!(laplacian_of(&g, &[1, 0]), Err(Error::MissingVertex(_))));
}

#[test]
fn q_reduce_matches_definition() {
    let g = k3();
    let d = div(&[0, 1, -1]);
    let r = q_reduce(&g, &d, 0);
    assert!(brute_is_reduced(&g, &r, 0));
    assert!(brute_equivalent(&g, &r, &d, 3));
    assert_eq!(q_reduce(&g, &r, 0), r);
    // Exactly one q-reduced divisor among the small shifts of d.
    let mut reduced = BTreeSet::new();
    for a in -3..=3 {
        for b in -3..=3 {
            let e = &d + &laplacian_of(&g, &[0, a, b]).unwrap();
            if brute_is_reduced(&g, &e, 0) {
                reduced.insert(e.coefficients().to_vec());
            }
        }
    }
    assert_eq!(reduced.len(), 1);
    assert!(reduced.contains(r.coefficients()));

    for g in small_graphs() {
        for c in PicardGroup::new(&g).elements() {
            for q in 0..g.num_vertices() {
                let r = q_reduce(&g, c.reduced(), q);
                assert!(brute_is_reduced(&g, &r, q));
            }
        }
    }
}

#[test]
fn equivalence_on_k3_vertices() {
    let g = k3();
    for a in 0..3 {
        for b in 0..3 {
            let (x, y) = (Divisor::point(3, a), Divisor::point(3, b));
            assert_eq!(are_equivalent(&g, &x, &y), brute_equivalent(&g, &x, &y, 3));
            assert_eq!(are_equivalent(&g, &x, &y), a == b);
        }
    }
    let theta = theta_planar();
    assert_eq!(PicardGroup::new(&theta).order(), 3);
    assert_eq!(PicardGroup::new(&single_edge()).order(), 1);
}

/// `(vertex, edge, walk)` per step and the divisor of first cuts.
fn simulate(g: &RibbonGraph, v: usize, e: usize, tree: &[usize]) -> (Vec<(usize, usize, bool)>, Vec<i64>) {
    let mut steps = Vec::new();
    let mut d = vec![0; g.num_vertices()];
    let mut cut = vec![false; g.num_edges()];
    let (mut x, mut f) = (v, e);
    loop {
        let walk = tree.contains(&f);
        steps.push((x, f, walk));
        if walk {
            x = g.opposite(f, x);
        } else if !cut[f] {
            cut[f] = true;
            d[x] += 1;
        }
        let rot = g.rotation(x);
        f = rot[(rot.iter().position(|&h| h == f).unwrap() + 1) % rot.len()];
        if (x, f) == (v, e) {
            return (steps, d);
        }
    }
}

#[test]
fn tours_match_simulation() {
    for (name, g) in default_corpus() {
        for t in spanning_trees(&g).iter().take(6) {
            for v in 0..g.num_vertices() {
                for &e in g.rotation(v) {
                    let tour = bernardi_tour(&g, v, e, t).unwrap();
                    let (steps, d) = simulate(&g, v, e, t.edges());
                    let ours: Vec<(usize, usize, bool)> = tour
                        .steps
                        .iter()
                        .map(|s| (s.at_vertex, s.edge, s.action == StepAction::Walk))
                        .collect();
                    assert_eq!(ours, steps, "{name}");
                    assert_eq!(ours.len(), 2 * g.num_edges());
                    assert_eq!(bernardi_beta(&g, v, e, t).unwrap().divisor.coefficients(), &d[..]);
                }
            }
        }
    }
}

#[test]
fn tour_examples() {
    let g = single_edge();
    let t = spanning_trees(&g).remove(0);
    assert_eq!(bernardi_tour(&g, 0, 0, &t).unwrap().dump(&g), "u e1 walk\nv e1 walk\neta\n");

    let g = k3();
    let t = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
    let tour = bernardi_tour(&g, 0, g.edge("a").unwrap(), &t).unwrap();
    assert_eq!(tour.steps.len(), 6);
    assert_eq!(tour.dump(&g), "1 a walk\n2 b walk\n3 c cut\n3 b walk\n2 a walk\n1 c cut\neta\nc 3\n");

    let g = theta_planar();
    let t = SpanningTree::from_names(&g, &["p"]).unwrap();
    let tour = bernardi_tour(&g, 0, 0, &t).unwrap();
    assert_eq!(tour.steps.len(), 6);
    let (_, d) = simulate(&g, 0, 0, t.edges());
    assert_eq!(tour.divisor(2).coefficients(), &d[..]);
    assert_eq!(d.iter().sum::<i64>(), 2);
}

#[test]
fn beta_images_and_inverses() {
    let g = theta_planar();
    let images: BTreeSet<Vec<i64>> = spanning_trees(&g)
        .iter()
        .map(|t| bernardi_beta(&g, 0, 0, t).unwrap().divisor.coefficients().to_vec())
        .collect();
    assert_eq!(images, brute_breaks(&g));
    // alpha_R inverts the exhaustive table.
    for t in spanning_trees(&g) {
        let d = bernardi_beta(&g, 0, 0, &t).unwrap().divisor;
        assert_eq!(alpha_right(&g, 0, 0, &d).unwrap(), t);
        assert_eq!(alpha_left(&g, 0, 0, &d).unwrap(), t);
    }
    let two_u = div(&[2, 0]);
    let t = alpha_right(&g, 0, 0, &two_u).unwrap();
    assert_eq!(bernardi_beta(&g, 0, 0, &t).unwrap().divisor, two_u);

    let g = k3();
    let mut trees = BTreeSet::new();
    for v in 0..3 {
        let d = Divisor::point(3, v);
        let r = alpha_right(&g, 0, 0, &d).unwrap();
        assert_eq!(alpha_left(&g, 0, 0, &d).unwrap(), r);
        trees.insert(r);
    }
    assert_eq!(trees.len(), 3);

    let g = path3();
    let whole = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
    assert_eq!(alpha_right(&g, 1, 0, &div(&[0, 0, 0])).unwrap(), whole);
    assert_eq!(alpha_left(&g, 1, 0, &div(&[0, 0, 0])).unwrap(), whole);
}

#[test]
fn bernardi_action_examples() {
    let g = theta_planar();
    let gamma = DivisorClass::of(&g, &div(&[1, -1]));
    for t in spanning_trees(&g) {
        assert_eq!(bernardi_act(&g, 0, &DivisorClass::zero(&g), &t).unwrap(), t);
        let mut s = t.clone();
        for _ in 0..3 {
            s = bernardi_act(&g, 0, &gamma, &s).unwrap();
        }
        assert_eq!(s, t);
        assert_ne!(bernardi_act(&g, 0, &gamma, &t).unwrap(), t);
    }
    let g = k3();
    for c in PicardGroup::new(&g).elements() {
        let images: BTreeSet<SpanningTree> =
            spanning_trees(&g).iter().map(|t| bernardi_act(&g, 0, c, t).unwrap()).collect();
        assert_eq!(images.len(), 3);
    }
}

#[test]
fn rotor_examples() {
    let g = single_edge();
    let t = spanning_trees(&g).remove(0);
    let r = rotors_from_tree(&g, &t, 1);
    assert_eq!(r.rotor[0], Some(Dart::new(0, 0)));
    assert_eq!(r.rotor[1], None);

    let g = path3();
    let t = spanning_trees(&g).remove(0);
    let r = rotors_from_tree(&g, &t, 2);
    assert_eq!(r.rotor[0].map(|d| (d.edge, g.head(d))), Some((0, 1)));
    assert_eq!(r.rotor[1].map(|d| (d.edge, g.head(d))), Some((1, 2)));

    let g = k3();
    let t = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
    let r = rotors_from_tree(&g, &t, 0);
    assert_eq!(r.rotor[1].map(|d| (g.edge_name(d.edge), g.head(d))), Some(("a", 0)));
    assert_eq!(r.rotor[2].map(|d| (g.edge_name(d.edge), g.head(d))), Some(("b", 1)));

    // Chip at 3, rotor b advances to c and the chip lands on the root 1.
    let (out, steps) = rotor_move_traced(&g, &t, 2, 0);
    assert_eq!(steps.len(), 1);
    assert_eq!(steps[0].line(&g), "3 b c 1");
    assert_eq!(out.names(&g), vec!["a", "c"]);
    assert_eq!(rotor_move(&g, &t, 1, 1), t);

    let g = theta_planar();
    let trees = spanning_trees(&g);
    let mut config = rotors_from_tree(&g, &trees[0], 1);
    let step = config.step(&g, 0).unwrap();
    assert_eq!((g.edge_name(step.before), g.edge_name(step.after), step.next), ("p", "q", 1));
    for t in &trees {
        for x in 0..2 {
            for y in 0..2 {
                assert!(trees.contains(&rotor_move(&g, t, x, y)));
            }
        }
    }
    // Simple transitivity on K3.
    let g = k3();
    let pic = PicardGroup::new(&g);
    for t in spanning_trees(&g) {
        let orbit: BTreeSet<SpanningTree> = pic.elements().iter().map(|c| rotor_act(&g, 0, c, &t).unwrap()).collect();
        assert_eq!(orbit.len(), 3);
        for c in pic.elements() {
            let there = rotor_act(&g, 0, c, &t).unwrap();
            assert_eq!(rotor_act(&g, 0, &c.neg(&g), &there).unwrap(), t);
        }
    }
}

#[test]
fn reversibility_follows_planarity() {
    for g in RotationSystems::new(&complete(4)).chain(RotationSystems::new(&theta_planar())) {
        let planar = trace_faces(&g).is_planar();
        let verdicts: Vec<bool> = directed_cycles(&g)
            .iter()
            .map(|c| cycle_is_reversible(&g, c).unwrap())
            .collect();
        assert_eq!(verdicts.iter().all(|&r| r), planar);
    }
    let g = theta_torus();
    let two_cycle_irreversible = directed_cycles(&g)
        .iter()
        .filter(|c| c.len() == 2)
        .any(|c| !cycle_is_reversible(&g, c).unwrap());
    assert!(two_cycle_irreversible);
}

#[test]
fn fundamental_cycle_examples() {
    let g = k3();
    let t = SpanningTree::from_names(&g, &["a", "b"]).unwrap();
    let c = g.edge("c").unwrap();
    let cycle = fundamental_cycle(&g, &t, Dart::new(c, 0)).unwrap();
    assert_eq!(cycle.len(), 3);
    assert_eq!(cycle[0].edge, c);
    assert!(matches!(
        fundamental_cycle(&g, &t, Dart::new(g.edge("a").unwrap(), 0)),
        Err(Error::EdgeInTree(_))
    ));
    let g = theta_planar();
    let t = SpanningTree::from_names(&g, &["p"]).unwrap();
    let cycle = fundamental_cycle(&g, &t, Dart::new(g.edge("q").unwrap(), 0)).unwrap();
    let edges: BTreeSet<&str> = cycle.iter().map(|d| g.edge_name(d.edge)).collect();
    assert_eq!(edges, ["p", "q"].into());
}
