//! Consistency between independently computed quantities.

mod common;

use std::collections::VecDeque;
use std::f64::consts::PI;

use conewright::abelian::{analyze, Location, MeromorphicForm};
use conewright::curvature::angle_defects;
use conewright::develop::{boundary_face_loop, holonomy_along, holonomy_around, layout};
use conewright::flatten::{flatten, ConePrescription};
use conewright::mesh::shapes;
use conewright::motion::RigidMotion;
use conewright::normal_form::normal_form_extended;
use conewright::scalar::wrap_angle;
use conewright::series::PowerSeries;
use conewright::{Complex64, Layout, Mesh};
use rand::Rng;

fn flattened_icosphere() -> (Mesh, [usize; 4]) {
    let (mesh, marks) = shapes::icosphere_with_tetrahedral_marks::<f64>(3);
    let p = ConePrescription::new(marks.iter().map(|&v| (v, PI)));
    let fl = flatten(&mesh, &p, 1e-12, 50).unwrap();
    (fl.flat_mesh, marks)
}

/// Faces from the base face down to `f` along the spanning tree.
fn tree_path(lay: &Layout, f: usize) -> Vec<usize> {
    let mut path = vec![f];
    let mut cur = f;
    while let Some(p) = lay.parent(cur) {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}

fn shared_edge(lay: &Layout, f: usize, g: usize) -> Option<[usize; 2]> {
    let s: Vec<usize> = lay.faces()[f].iter().copied().filter(|v| lay.faces()[g].contains(v)).collect();
    (s.len() == 2).then(|| [s[0], s[1]])
}

fn adjacent_pairs(mesh: &Mesh) -> Vec<(usize, usize)> {
    (0..mesh.n_edges())
        .map(|e| {
            let [f, g] = mesh.edge_faces(e);
            (f, g)
        })
        .collect()
}

fn is_tree_edge(lay: &Layout, f: usize, g: usize) -> bool {
    lay.parent(f) == Some(g) || lay.parent(g) == Some(f)
}

/// The motion carrying `g`'s layout copy of the shared edge onto `f`'s.
fn seam_motion(lay: &Layout, f: usize, g: usize) -> RigidMotion<f64> {
    let [u, v] = shared_edge(lay, f, g).unwrap();
    RigidMotion::from_point_pairs(
        lay.corner(g, u).unwrap(),
        lay.corner(g, v).unwrap(),
        lay.corner(f, u).unwrap(),
        lay.corner(f, v).unwrap(),
    )
}

fn motion_gap(a: &RigidMotion<f64>, b: &RigidMotion<f64>) -> f64 {
    wrap_angle(a.rotation - b.rotation).abs().max((a.translation - b.translation).norm())
}

/// Off-tree seams of the flattened four-cone sphere: the motion read off
/// the layout equals the holonomy of the fundamental cycle, and is a
/// rotation by 0 or π.
#[test]
fn off_tree_seams_match_fundamental_cycles() {
    let (mesh, _) = flattened_icosphere();
    let lay = layout(&mesh, 0).unwrap();
    let mut checked = 0;
    for (f, g) in adjacent_pairs(&mesh) {
        if is_tree_edge(&lay, f, g) {
            continue;
        }
        let mut walk = tree_path(&lay, f);
        let mut back = tree_path(&lay, g);
        back.reverse();
        walk.extend(back.into_iter().take_while(|&h| h != 0));
        // Drop the backtracking where both tree paths share a prefix.
        let walk = cancel_backtracks(walk);
        let hol = holonomy_along(&mesh, &lay, &walk).unwrap();
        let seam = seam_motion(&lay, f, g);
        let expected = seam.inverse();
        assert!(motion_gap(&hol, &expected) <= 1e-9, "seam {f}-{g}: {hol:?} vs {expected:?}");
        let r = hol.rotation.abs();
        assert!(r <= 1e-8 || (r - PI).abs() <= 1e-8, "rotation {r}");
        checked += 1;
    }
    assert_eq!(checked, mesh.n_edges() - (mesh.n_faces() - 1));
}

fn cancel_backtracks(walk: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for f in walk {
        if out.len() >= 2 && out[out.len() - 2] == f {
            out.pop();
        } else if out.last() != Some(&f) {
            out.push(f);
        }
    }
    while out.len() >= 3 && out[1] == out[out.len() - 1] {
        out.remove(0);
        out.pop();
    }
    out
}

/// Vertices on a shortest path between `a` and `b` in the edge graph.
fn vertex_path(mesh: &Mesh, a: usize, b: usize) -> Vec<usize> {
    let n = mesh.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for &[x, y] in mesh.edges() {
        adj[x].push(y);
        adj[y].push(x);
    }
    let mut prev = vec![usize::MAX; n];
    prev[a] = a;
    let mut queue = VecDeque::from([a]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![b];
    while *path.last().unwrap() != a {
        path.push(prev[*path.last().unwrap()]);
    }
    path
}

/// A loop around two half-turn cones turns by 2π: a pure translation.
#[test]
fn two_half_turns_make_a_translation() {
    let (mesh, marks) = flattened_icosphere();
    let lay = layout(&mesh, 0).unwrap();
    let cut = vertex_path(&mesh, marks[2], marks[3]);
    let inside: Vec<usize> = (0..mesh.n_vertices()).filter(|v| !cut.contains(v)).collect();
    assert!(inside.contains(&marks[0]) && inside.contains(&marks[1]));
    let walk = boundary_face_loop(&mesh, &lay, &inside).unwrap();
    let m = holonomy_along(&mesh, &lay, &walk).unwrap();
    assert!(m.rotation.abs() <= 1e-8, "{}", m.rotation);
    assert!(m.translation.norm() > 1e-3);
    // The composition of the two single-cone half-turns, seen from the same
    // base point, has the same rotation part.
    let a = holonomy_around(&mesh, &lay, marks[0]).unwrap();
    let b = holonomy_around(&mesh, &lay, marks[1]).unwrap();
    assert!(wrap_angle(a.compose(&b).rotation).abs() <= 1e-8);
}

/// Small regions without cones have trivial holonomy.
#[test]
fn contractible_loops_are_trivial() {
    let (mesh, marks) = flattened_icosphere();
    let lay = layout(&mesh, 3).unwrap();
    let mut rng = common::rng(11);
    let mut done = 0;
    while done < 20 {
        let centre = rng.gen_range(0..mesh.n_vertices());
        let ball: Vec<usize> = (0..mesh.n_vertices())
            .filter(|&v| vertex_path(&mesh, centre, v).len() <= 2)
            .collect();
        if ball.iter().any(|v| marks.contains(v) || mesh.edges().iter().any(|e| e.contains(v) && e.iter().any(|w| marks.contains(w)))) {
            continue;
        }
        let walk = boundary_face_loop(&mesh, &lay, &ball).unwrap();
        let m = holonomy_along(&mesh, &lay, &walk).unwrap();
        assert!(m.rotation.abs() <= 1e-9, "{}", m.rotation);
        assert!(m.translation.norm() <= 1e-9, "{}", m.translation.norm());
        done += 1;
    }
}

/// Seams of the flat 8×8 torus are pure translations by lattice periods.
#[test]
fn flat_torus_seams_are_periods() {
    let mesh: Mesh = shapes::torus_grid(8, 8);
    let lay = layout(&mesh, 0).unwrap();
    let base = lay.positions()[0];
    let (e1, e2) = (base[1] - base[0], base[2] - base[0]);
    let det = e1.re * e2.im - e1.im * e2.re;
    let mut nontrivial = 0;
    for (f, g) in adjacent_pairs(&mesh) {
        let m = seam_motion(&lay, f, g);
        assert!(m.rotation.abs() <= 1e-12);
        let d = m.translation;
        let x = (d.re * e2.im - d.im * e2.re) / det;
        let y = (e1.re * d.im - e1.im * d.re) / det;
        assert!((x - x.round()).abs() <= 1e-9 && (y - y.round()).abs() <= 1e-9, "{d}");
        if d.norm() > 1e-9 {
            assert!(d.norm() >= 8.0 - 1e-9, "short period {d}");
            nontrivial += 1;
        }
    }
    assert!(nontrivial > 0);
}

/// `μ = g(z) z^{−k} dz`: the residue read off by root finding matches the
/// normal form of `F = −log g` with `θ = k`.
#[test]
fn translation_from_form_matches_normal_form() {
    let mut rng = common::rng(12);
    for trial in 0..40 {
        let k = 1 + trial % 5;
        let deg = rng.gen_range(k..=8);
        // g = g0 ∏ (1 − z/r) with |r| ≥ 2 keeps log g well inside its disk
        // of convergence.
        let mut g = vec![Complex64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI))];
        for _ in 0..deg {
            let r = Complex64::from_polar(rng.gen_range(2.0..4.0), rng.gen_range(0.0..2.0 * PI));
            let mut next = g.clone();
            next.push(Complex64::new(0.0, 0.0));
            for (i, &gi) in g.iter().enumerate() {
                next[i + 1] -= gi / r;
            }
            g = next;
        }
        let mut den = vec![Complex64::new(0.0, 0.0); k + 1];
        den[k] = Complex64::new(1.0, 0.0);
        let form = MeromorphicForm::abelian(&g, &den).unwrap();
        let a = analyze(&form).unwrap();
        let at0 = a
            .singularities
            .iter()
            .find(|s| matches!(s.location, Location::Finite(z) if z.norm() < 1e-12))
            .unwrap();
        assert_eq!(at0.ord, -(k as i64));
        let big_f = -&PowerSeries::new(g.clone(), 32).log().unwrap();
        let (nf, _) = normal_form_extended(&big_f, k as f64, Some(2.0 * PI)).unwrap();
        if k == 1 {
            let c1 = at0.cylinder_circumference.unwrap();
            let c2 = nf.circumference.unwrap();
            assert!((c1 - c2).abs() <= 1e-10 * c1.max(1.0), "k=1: {c1} vs {c2}");
        } else {
            let t1 = at0.translation_length.unwrap();
            let t2 = nf.translation_length.unwrap();
            assert!((t1 - t2).abs() <= 1e-10 * t1.max(1.0), "k={k}: {t1} vs {t2}");
        }
    }
}

/// Flattening then developing: every cone's rotation is its defect.
#[test]
fn flattened_cone_rotations() {
    let (mesh, marks) = flattened_icosphere();
    let lay = layout(&mesh, 0).unwrap();
    let d = angle_defects(&mesh).unwrap().defect;
    for &v in &marks {
        let m = holonomy_around(&mesh, &lay, v).unwrap();
        assert!(wrap_angle(m.rotation - d[v]).abs() <= 1e-8);
        assert!((d[v] - PI).abs() <= 1e-9);
    }
}
