mod common;

use avbounds::auxbound::default_tolerance;
use avbounds::enumerate::{enumerate_orbits, Side};
use avbounds::exact::{real_roots_f64, IntPolynomial};
use avbounds::lpopt::{
    build_lp, check_feasible, mesh_objective, optimize_and_certify, optimize_system, simplex, solve, LpStatus,
};
use avbounds::paperlab::published_systems;
use avbounds::weil::{weil_interval_f64, FieldSize};
use common::{fixed, poly};
use proptest::prelude::*;

fn fq(q: u64) -> FieldSize {
    FieldSize::new(q).unwrap()
}

/// Solves `M y = r` by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = r.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(piv, col);
        r.swap(piv, col);
        for i in 0..n {
            if i != col {
                let f = m[i][col] / m[col][col];
                for j in col..n {
                    m[i][j] -= f * m[col][j];
                }
                r[i] -= f * r[col];
            }
        }
    }
    Some((0..n).map(|i| r[i] / m[i][i]).collect())
}

/// Best objective over all basic feasible points of `A x <= b, x >= 0`.
fn vertex_optimum(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let n = c.len();
    // every constraint as a row (g, h) of g.x <= h, including -x_j <= 0
    let mut rows: Vec<(Vec<f64>, f64)> = a.iter().cloned().zip(b.iter().cloned()).collect();
    for j in 0..n {
        let mut g = vec![0.0; n];
        g[j] = -1.0;
        rows.push((g, 0.0));
    }
    let mut best = f64::NEG_INFINITY;
    let mut pick = vec![0usize; n];
    fn combos(k: usize, start: usize, total: usize, pick: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
        if k == pick.len() {
            out(pick);
            return;
        }
        for i in start..total {
            pick[k] = i;
            combos(k + 1, i + 1, total, pick, out);
        }
    }
    combos(0, 0, rows.len(), &mut pick, &mut |idx| {
        let m = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let r = idx.iter().map(|&i| rows[i].1).collect();
        if let Some(x) = solve_square(m, r) {
            let feasible = rows.iter().all(|(g, h)| g.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= h + 1e-7);
            if feasible {
                best = best.max(c.iter().zip(&x).map(|(u, v)| u * v).sum());
            }
        }
    });
    best
}

fn bounded_lp() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (1usize..=3, 1usize..=4).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(-5i32..=5, n), m),
            prop::collection::vec(0i32..=20, m),
            prop::collection::vec(-5i32..=5, n),
            1i32..=30,
        )
            .prop_map(move |(a, b, c, cap)| {
                let mut a: Vec<Vec<f64>> = a.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect();
                let mut b: Vec<f64> = b.into_iter().map(f64::from).collect();
                // a box row keeps every instance bounded
                a.push(vec![1.0; n]);
                b.push(f64::from(cap));
                (a, b, c.into_iter().map(f64::from).collect())
            })
    })
}

proptest! {
    #![proptest_config(fixed(400))]

    #[test]
    fn simplex_matches_vertex_enumeration((a, b, c) in bounded_lp()) {
        let (status, x, obj) = simplex(&a, &b, &c).unwrap();
        prop_assert_eq!(status, LpStatus::Optimal);
        let want = vertex_optimum(&a, &b, &c);
        prop_assert!((obj - want).abs() <= 1e-9 * want.abs().max(1.0), "simplex {} vs vertices {}", obj, want);
        for (row, h) in a.iter().zip(&b) {
            prop_assert!(row.iter().zip(&x).map(|(u, v)| u * v).sum::<f64>() <= h + 1e-9);
        }
        prop_assert!(x.iter().all(|&v| v >= -1e-12));
    }
}

#[test]
fn unbounded_program_is_reported() {
    let (status, _, _) = simplex(&[vec![1.0, -1.0]], &[1.0], &[0.0, 1.0]).unwrap();
    assert_eq!(status, LpStatus::Unbounded);
}

#[test]
fn mesh_avoids_root_neighbourhoods() {
    let lp = build_lp(fq(4), Side::Lower, vec![poly("x-1")], 256).unwrap();
    assert!(lp.mesh.windows(2).all(|w| w[0] < w[1]));
    assert!(lp.mesh.iter().all(|&x| x > 1.0 + lp.exclusion_radius && x <= 9.0));
    assert!((lp.exclusion_radius - 8e-3).abs() < 1e-12);

    let polys: Vec<IntPolynomial> = ["x-5", "x^2-9x+19", "x^3-13x^2+54x-71"].iter().map(|s| poly(s)).collect();
    let lp = build_lp(fq(2), Side::Upper, polys.clone(), 1024).unwrap();
    let (a, b) = weil_interval_f64(fq(2));
    let mut roots = vec![5.0, (9.0 - 5f64.sqrt()) / 2.0, (9.0 + 5f64.sqrt()) / 2.0];
    roots.extend(real_roots_f64(&polys[2], a, b, 1e-12).unwrap());
    for r in roots {
        assert!(lp.mesh.iter().all(|x| (x - r).abs() > lp.exclusion_radius), "root {r}");
    }
    assert!(lp.mesh.iter().all(|&x| x >= a && x <= b));
}

#[test]
fn bad_programs_are_rejected() {
    assert!(build_lp(fq(4), Side::Lower, vec![poly("x-1")], 63).is_err());
    assert!(build_lp(fq(4), Side::Lower, vec![], 256).is_err());
}

fn q3_lower_polys() -> Vec<IntPolynomial> {
    ["x-1", "x^2-4x+2", "x^3-7x^2+12x-5"].iter().map(|s| poly(s)).collect()
}

#[test]
fn q3_lower_program_reaches_the_published_level() {
    let lp = build_lp(fq(3), Side::Lower, q3_lower_polys(), 4096).unwrap();
    let sol = solve(&lp).unwrap();
    assert!(sol.objective >= 1.359f64.ln() - 0.01, "objective {}", sol.objective.exp());
    assert_eq!(check_feasible(&lp, &sol.exponents, sol.objective), None);
}

#[test]
fn coarse_and_fine_meshes_agree() {
    let coarse = solve(&build_lp(fq(3), Side::Lower, q3_lower_polys(), 64).unwrap()).unwrap();
    let fine = solve(&build_lp(fq(3), Side::Lower, q3_lower_polys(), 4096).unwrap()).unwrap();
    assert!((coarse.objective.exp() - fine.objective.exp()).abs() < 0.02);
}

/// The rounded exponents are a feasible point of the program and the
/// interval contains the mesh, so the certificate can only be weaker.
#[test]
fn certificates_never_beat_the_mesh() {
    let tol = default_tolerance();
    for sys in published_systems().unwrap().iter().filter(|s| !s.polynomials.is_empty()) {
        let polys = sys.corrected.clone().unwrap_or_else(|| sys.polynomials.clone());
        let opt = optimize_system(sys.q, sys.side, polys, 1024, &tol).unwrap();
        let mesh = opt.solution.objective.exp();
        let cert = opt.certificate.bound_f64();
        match sys.side {
            Side::Lower => assert!(cert <= mesh * (1.0 + 1e-9), "q={} lower: {cert} vs {mesh}", sys.q),
            Side::Upper => assert!(cert >= mesh * (1.0 - 1e-9), "q={} upper: {cert} vs {mesh}", sys.q),
        }
        let lp = build_lp(sys.q, sys.side, opt.certificate.system.polynomials.clone(), 1024).unwrap();
        let w: Vec<f64> = opt.certificate.system.exponents.iter().map(|e| num_traits::ToPrimitive::to_f64(e).unwrap()).collect();
        let on_mesh = mesh_objective(&lp, &w).exp();
        match sys.side {
            Side::Lower => assert!(cert <= on_mesh * (1.0 + 1e-9)),
            Side::Upper => assert!(cert >= on_mesh * (1.0 - 1e-9)),
        }
    }
}

/// Doubling the mesh adds constraints without moving old ones, so the
/// objective moves one way only; and no change outgrows twice the largest
/// earlier one from 256 points on, down to a floor below which changes
/// are solver noise.
#[test]
fn mesh_refinement_settles() {
    const FLOOR: f64 = 1e-6;
    for sys in published_systems().unwrap().iter().filter(|s| !s.polynomials.is_empty()) {
        let polys = sys.corrected.clone().unwrap_or_else(|| sys.polynomials.clone());
        let obj: Vec<f64> = [256, 512, 1024, 2048, 4096, 8192]
            .iter()
            .map(|&m| solve(&build_lp(sys.q, sys.side, polys.clone(), m).unwrap()).unwrap().objective)
            .collect();
        // the lower program maximises, the upper one minimises
        let sign = if sys.side == Side::Lower { 1.0 } else { -1.0 };
        let changes: Vec<f64> = obj.windows(2).map(|w| sign * (w[0] - w[1])).collect();
        assert!(changes.iter().all(|&c| c >= -1e-9), "q={} {:?}: {obj:?}", sys.q, sys.side);
        for k in 1..changes.len() {
            let largest = changes[..k].iter().cloned().fold(0.0, f64::max);
            assert!(changes[k] <= 2.0 * largest + FLOOR, "q={} {:?}: changes {changes:?}", sys.q, sys.side);
        }
    }
}

#[test]
fn pipeline_examples() {
    let tol = default_tolerance();
    let pool = enumerate_orbits(fq(2), 3).unwrap();
    let up = optimize_and_certify(fq(2), Side::Upper, &pool, 4, 4096, &tol).unwrap();
    assert!(up.certificate.bound_f64() <= 4.05, "{}", up.certificate.marked());
    let pool = enumerate_orbits(fq(9), 2).unwrap();
    let low = optimize_and_certify(fq(9), Side::Lower, &pool, 6, 4096, &tol).unwrap();
    assert!(low.certificate.bound_f64() >= 5.3, "{}", low.certificate.marked());
    assert!(optimize_and_certify(fq(3), Side::Lower, &pool, 6, 4096, &tol).is_err());
}
