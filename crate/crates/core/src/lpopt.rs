//! Exponent selection for auxiliary functions by linear programming on a
//! mesh, followed by rigorous certification of the rounded exponents.
//!
//! For the lower side the program is
//! `max t  s.t.  t + sum g_i ln|P_i(x_k)| <= ln x_k,  g >= 0`;
//! for the upper side `min t  s.t.  ln x_k + sum b_j ln|Q_j(x_k)| <= t`.
//! Writing `s = -t` on the upper side gives one shape for both:
//! `max s  s.t.  s + sum w_i L_ik <= sign * ln x_k`.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auxbound::{certify, AuxiliarySystem, BoundCertificate};
use crate::enumerate::{extremal_orbits, OrbitSet, Side};
use crate::error::{Error, Result};
use crate::exact::{real_roots_f64, IntPolynomial};
use crate::interval::Interval;
use crate::weil::{weil_interval_f64, FieldSize};

pub const MIN_MESH_SIZE: usize = 64;
pub const DEFAULT_MESH_SIZE: usize = 4096;
/// Exclusion radius as a fraction of the interval length.
pub const EXCLUSION_FRACTION: f64 = 1e-3;
/// Exponents are rounded to this many decimals before certification.
pub const EXPONENT_DECIMALS: u32 = 4;
/// Constraint slack allowed when re-checking a solution.
pub const FEASIBILITY_SLACK: f64 = 1e-9;
const MAX_PIVOTS: usize = 200_000;
const PIVOT_EPS: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct MeshLP {
    pub q: FieldSize,
    pub side: Side,
    pub polynomials: Vec<IntPolynomial>,
    pub mesh: Vec<f64>,
    pub exclusion_radius: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPSolution {
    pub exponents: Vec<f64>,
    /// The optimal `t`, in log space.
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

/// Uniform mesh of `mesh_size` steps across the closed interval, minus
/// points near any root.
pub fn build_lp(
    q: FieldSize,
    side: Side,
    polynomials: Vec<IntPolynomial>,
    mesh_size: usize,
) -> Result<MeshLP> {
    if mesh_size < MIN_MESH_SIZE {
        return Err(Error::invalid(format!("mesh size must be at least {MIN_MESH_SIZE}")));
    }
    if polynomials.is_empty() {
        return Err(Error::invalid("the polynomial list is empty"));
    }
    if let Some(p) = polynomials.iter().find(|p| p.deg() == 0 || !p.is_monic()) {
        return Err(Error::invalid(format!("{p} is not a monic nonconstant polynomial")));
    }
    let (a, b) = weil_interval_f64(q);
    let radius = EXCLUSION_FRACTION * (b - a);
    let mut roots = Vec::new();
    for p in &polynomials {
        roots.extend(real_roots_f64(p, a - radius, b + radius, radius * 1e-3)?);
    }
    // both ends are sampled, since the extremum often sits at one; doubling
    // mesh_size keeps every earlier point
    let step = (b - a) / mesh_size as f64;
    let mesh: Vec<f64> = (0..=mesh_size)
        .map(|k| if k == mesh_size { b } else { a + k as f64 * step })
        .filter(|x| roots.iter().all(|r| (x - r).abs() > radius))
        .collect();
    if mesh.is_empty() {
        return Err(Error::invalid("every mesh point lies near a root: degenerate mesh"));
    }
    Ok(MeshLP {
        q,
        side,
        polynomials,
        mesh,
        exclusion_radius: radius,
    })
}

fn side_sign(side: Side) -> f64 {
    match side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    }
}

impl MeshLP {
    /// Rows `(L_k, rhs_k)` of `s + L_k . w <= rhs_k`.
    fn rows(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let sign = side_sign(self.side);
        self.mesh
            .par_iter()
            .map(|&x| {
                let l: Vec<f64> = self
                    .polynomials
                    .iter()
                    .map(|p| p.eval_f64(x).abs().ln())
                    .collect();
                (l, sign * x.ln())
            })
            .unzip()
    }

    /// Log auxiliary value at a mesh point for given exponents, as an
    /// outward-rounded interval.
    pub fn log_value(&self, x: f64, exponents: &[f64]) -> Interval {
        let sign = side_sign(self.side);
        let mut acc = Interval::point(x).ln();
        for (p, &w) in self.polynomials.iter().zip(exponents) {
            let v = eval_interval(p, x);
            let abs = if v.lo >= 0.0 {
                v
            } else if v.hi <= 0.0 {
                -v
            } else {
                Interval::new(0.0, v.mag())
            };
            acc = acc - Interval::point(sign * w) * abs.ln();
        }
        acc
    }
}

fn eval_interval(p: &IntPolynomial, x: f64) -> Interval {
    let xi = Interval::point(x);
    let mut acc = Interval::point(0.0);
    for c in p.coeffs().iter().rev() {
        acc = acc * xi + Interval::from_bigint(c);
    }
    acc
}

/// Dense tableau for `max c.x  s.t.  A x <= b, x >= 0` with `b >= 0`.
struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    value: f64,
    /// Variable index in basis for each row; slacks are `n..n+m`.
    basis: Vec<usize>,
    /// Column index of each nonbasic position.
    nonbasic: Vec<usize>,
}

impl Tableau {
    fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Self {
        let n = c.len();
        let m = b.len();
        Tableau {
            rows: a,
            rhs: b,
            cost: c,
            value: 0.0,
            basis: (n..n + m).collect(),
            nonbasic: (0..n).collect(),
        }
    }

    /// Bland's rule: smallest entering variable index, then smallest
    /// leaving variable index among tied ratios.
    fn solve(&mut self, log: &mut Option<String>) -> Result<(LpStatus, usize)> {
        for pivots in 0..MAX_PIVOTS {
            let enter = (0..self.cost.len())
                .filter(|&j| self.cost[j] > PIVOT_EPS)
                .min_by_key(|&j| self.nonbasic[j]);
            let Some(e) = enter else {
                return Ok((LpStatus::Optimal, pivots));
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[e] > PIVOT_EPS {
                    let ratio = self.rhs[i] / row[e];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-15 * lr.abs().max(1.0)
                                || (ratio <= lr + 1e-15 * lr.abs().max(1.0)
                                    && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((l, _)) = leave else {
                return Ok((LpStatus::Unbounded, pivots));
            };
            if let Some(s) = log.as_mut() {
                let _ = writeln!(
                    s,
                    "pivot {pivots}: enter x{} leave x{} objective {:.12}",
                    self.nonbasic[e], self.basis[l], self.value
                );
            }
            self.pivot(l, e);
        }
        Err(Error::Solver(format!(
            "simplex exceeded {MAX_PIVOTS} pivots at objective {} (possible cycling)",
            self.value
        )))
    }

    fn pivot(&mut self, l: usize, e: usize) {
        let p = self.rows[l][e];
        let prow: Vec<f64> = self.rows[l].iter().map(|v| v / p).collect();
        let prhs = self.rhs[l] / p;
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == l {
                continue;
            }
            let f = row[e];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[e] = -f / p;
            self.rhs[i] = (self.rhs[i] - f * prhs).max(0.0);
        }
        let f = self.cost[e];
        for (v, pv) in self.cost.iter_mut().zip(&prow) {
            *v -= f * pv;
        }
        self.cost[e] = -f / p;
        self.value += f * prhs;
        self.rows[l] = prow;
        self.rows[l][e] = 1.0 / p;
        self.rhs[l] = prhs;
        std::mem::swap(&mut self.basis[l], &mut self.nonbasic[e]);
    }

    fn primal(&self, n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (i, &v) in self.basis.iter().enumerate() {
            if v < n {
                x[v] = self.rhs[i];
            }
        }
        x
    }
}

/// Solves `max c.x  s.t.  A x <= b,  x >= 0` for `b >= 0` by the simplex
/// method with Bland's rule. Returns the status, the primal point and the
/// optimal value.
pub fn simplex(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<(LpStatus, Vec<f64>, f64)> {
    if b.iter().any(|&v| v.is_nan() || v < 0.0) {
        return Err(Error::invalid("the simplex start needs a nonnegative right-hand side"));
    }
    let mut t = Tableau::new(a.to_vec(), b.to_vec(), c.to_vec());
    let (status, _) = t.solve(&mut None)?;
    Ok((status, t.primal(c.len()), t.value))
}

/// Solves the mesh program; `debug` receives a plain-text pivot log.
pub fn solve_with_log(lp: &MeshLP, debug: Option<&mut String>) -> Result<LPSolution> {
    let (l, rhs) = lp.rows();
    let n = lp.polynomials.len();
    // s = tau - shift keeps every right-hand side at least 1
    let min_rhs = rhs.iter().cloned().fold(f64::INFINITY, f64::min);
    if !min_rhs.is_finite() {
        return Err(Error::Solver("non-finite mesh value".into()));
    }
    let shift = (1.0 - min_rhs).max(0.0);
    let a: Vec<Vec<f64>> = l
        .into_iter()
        .map(|mut row| {
            row.push(1.0);
            row
        })
        .collect();
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Solver("a mesh point evaluates to a root; widen the exclusion".into()));
    }
    let b: Vec<f64> = rhs.iter().map(|r| r + shift).collect();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut t = Tableau::new(a, b, c);
    let mut log = debug.as_ref().map(|_| String::new());
    let (status, pivots) = t.solve(&mut log)?;
    let x = t.primal(n + 1);
    let s = x[n] - shift;
    if let (Some(out), Some(log)) = (debug, log) {
        let _ = writeln!(out, "mesh points: {}", lp.mesh.len());
        out.push_str(&log);
        let _ = writeln!(out, "objective row: {:?}", t.cost);
        let _ = writeln!(out, "basis: {:?}", t.basis);
        let _ = writeln!(out, "iterations: {pivots}");
    }
    let objective = match lp.side {
        Side::Lower => s,
        Side::Upper => -s,
    };
    Ok(LPSolution {
        exponents: x[..n].to_vec(),
        objective,
        status,
        pivots,
    })
}

pub fn solve(lp: &MeshLP) -> Result<LPSolution> {
    solve_with_log(lp, None)
}

/// First mesh point whose constraint may be broken by more than the slack;
/// the interval value is read pessimistically.
pub fn check_feasible(lp: &MeshLP, exponents: &[f64], objective: f64) -> Option<f64> {
    lp.mesh.iter().copied().find(|&x| {
        let v = lp.log_value(x, exponents);
        match lp.side {
            Side::Lower => objective > v.lo + FEASIBILITY_SLACK,
            Side::Upper => objective < v.hi - FEASIBILITY_SLACK,
        }
    })
}

/// Rigorous mesh extremum of the log auxiliary function for given
/// exponents: the largest feasible `t` (lower) or smallest (upper).
pub fn mesh_objective(lp: &MeshLP, exponents: &[f64]) -> f64 {
    let vals = lp.mesh.iter().map(|&x| lp.log_value(x, exponents));
    match lp.side {
        Side::Lower => vals.map(|v| v.lo).fold(f64::INFINITY, f64::min),
        Side::Upper => vals.map(|v| v.hi).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Rounds to `EXPONENT_DECIMALS` places as an exact rational.
pub fn round_exponent(w: f64) -> BigRational {
    let scale = 10i64.pow(EXPONENT_DECIMALS);
    let k = (w * scale as f64).round().max(0.0) as i64;
    BigRational::new(BigInt::from(k), BigInt::from(scale))
}

/// Outcome of the mesh optimization and certification pipeline.
#[derive(Clone, Debug)]
pub struct Optimized {
    pub solution: LPSolution,
    pub certificate: BoundCertificate,
    /// Polynomials dropped because their rounded exponent vanished.
    pub dropped: Vec<IntPolynomial>,
}

/// Relative gap between certified and mesh bound that triggers a probe of
/// the excluded neighbourhoods.
const BLIND_SPOT_GAP: f64 = 1e-3;
const MAX_REFINEMENTS: usize = 8;

/// Solves the mesh program for fixed polynomials, rounds the exponents,
/// drops negligible ones and certifies the result.
///
/// Two refinements re-solve on fewer polynomials. A dropped polynomial no
/// longer masks mesh points near its roots. And when the certified bound
/// is clearly worse than the mesh bound, the extremum hides inside an
/// excluded neighbourhood; the least-weighted polynomial owning it is
/// dropped. The best certificate seen is returned.
pub fn optimize_system(
    q: FieldSize,
    side: Side,
    polynomials: Vec<IntPolynomial>,
    mesh_size: usize,
    tolerance: &BigRational,
) -> Result<Optimized> {
    let min_kept = round_exponent(10f64.powi(-(EXPONENT_DECIMALS as i32)));
    let mut current = polynomials;
    let mut dropped = Vec::new();
    let mut best: Option<Optimized> = None;
    let mut refinements = 0;
    loop {
        let lp = build_lp(q, side, current.clone(), mesh_size)?;
        let solution = solve(&lp)?;
        if solution.status != LpStatus::Optimal {
            return Err(Error::Solver(format!("mesh program is {:?}", solution.status)));
        }
        if let Some(x) = check_feasible(&lp, &solution.exponents, solution.objective) {
            return Err(Error::Solver(format!("solver output violates the constraint at x = {x}")));
        }
        let mut polys = Vec::new();
        let mut exps = Vec::new();
        let before = dropped.len();
        for (p, &w) in lp.polynomials.iter().zip(&solution.exponents) {
            let r = round_exponent(w);
            if r.is_zero() || r < min_kept {
                dropped.push(p.clone());
            } else {
                polys.push(p.clone());
                exps.push(r);
            }
        }
        if dropped.len() > before && !polys.is_empty() {
            current = polys;
            continue;
        }
        let weights: Vec<f64> = exps.iter().map(|e| e.to_f64().unwrap_or(0.0)).collect();
        let kept = build_lp(q, side, polys.clone(), mesh_size)?;
        let system = AuxiliarySystem::new(q, side, polys, exps)?;
        let certificate = certify(&system, tolerance)?;
        let mesh_bound = solution.objective.exp();
        let gap = match side {
            Side::Lower => mesh_bound - certificate.bound_f64(),
            Side::Upper => certificate.bound_f64() - mesh_bound,
        };
        let candidate = Optimized {
            solution,
            certificate,
            dropped: dropped.clone(),
        };
        let improves = best.as_ref().is_none_or(|b| {
            let (new, old) = (candidate.certificate.bound_f64(), b.certificate.bound_f64());
            match side {
                Side::Lower => new > old,
                Side::Upper => new < old,
            }
        });
        if improves {
            best = Some(candidate);
        }
        refinements += 1;
        if gap <= BLIND_SPOT_GAP * mesh_bound || refinements > MAX_REFINEMENTS || system.polynomials.len() < 2 {
            break;
        }
        match blind_spot_owner(&kept, &weights) {
            Some(i) => {
                let mut polys = system.polynomials;
                dropped.push(polys.remove(i));
                current = polys;
            }
            None => break,
        }
    }
    best.ok_or_else(|| Error::Solver("no certificate produced".into()))
}

/// Index of the least-weighted polynomial with a root near the worst point
/// of a fine scan, when that point lies in an excluded neighbourhood.
fn blind_spot_owner(lp: &MeshLP, weights: &[f64]) -> Option<usize> {
    let (a, b) = weil_interval_f64(lp.q);
    let sign = side_sign(lp.side);
    let n = 16 * lp.mesh.len().max(MIN_MESH_SIZE);
    // the lower side minimises ln x - sum w ln|P|; negate to maximise
    let worst = (0..=n)
        .map(|k| a + (b - a) * k as f64 / n as f64)
        .map(|x| {
            let s: f64 = lp.polynomials.iter().zip(weights).map(|(p, w)| w * p.eval_f64(x).abs().ln()).sum();
            (x, -sign * x.ln() + s)
        })
        .filter(|(_, v)| v.is_finite())
        .max_by(|l, r| l.1.total_cmp(&r.1))?
        .0;
    lp.polynomials
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            real_roots_f64(p, a - lp.exclusion_radius, b + lp.exclusion_radius, lp.exclusion_radius * 1e-3)
                .map(|rs| rs.iter().any(|r| (r - worst).abs() <= lp.exclusion_radius))
                .unwrap_or(false)
        })
        .min_by(|l, r| weights[l.0].total_cmp(&weights[r.0]))
        .map(|(i, _)| i)
}

/// Takes the `pool_size` most extreme orbits of the pool as candidate
/// polynomials and runs `optimize_system`.
pub fn optimize_and_certify(
    q: FieldSize,
    side: Side,
    pool: &OrbitSet,
    pool_size: usize,
    mesh_size: usize,
    tolerance: &BigRational,
) -> Result<Optimized> {
    if pool.q() != q {
        return Err(Error::invalid(format!("pool is for q = {}, not {q}", pool.q())));
    }
    let polys: Vec<IntPolynomial> = extremal_orbits(pool, side, pool_size)
        .into_iter()
        .map(|o| o.polynomial().clone())
        .collect();
    optimize_system(q, side, polys, mesh_size, tolerance)
}

/// Exponentiated LP objective, for comparison with certified bounds.
pub fn objective_bound(sol: &LPSolution) -> f64 {
    sol.objective.exp()
}

/// Exact rationals of the rounded exponents, as decimal text.
pub fn rounded_exponents(sol: &LPSolution) -> Vec<String> {
    sol.exponents
        .iter()
        .map(|&w| format!("{:.4}", round_exponent(w).to_f64().unwrap_or(0.0)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> IntPolynomial {
        s.parse().unwrap()
    }

    #[test]
    fn single_linear_factor() {
        let q = FieldSize::new(4).unwrap();
        let lp = build_lp(q, Side::Lower, vec![p("x-1")], 4096).unwrap();
        assert!(lp.mesh.iter().all(|&x| (x - 1.0).abs() > lp.exclusion_radius));
        let sol = solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.exponents[0] - 0.5).abs() < 0.01, "{:?}", sol.exponents);
        assert!((sol.objective - 2f64.ln()).abs() < 0.005, "{}", sol.objective);
        assert!(check_feasible(&lp, &sol.exponents, sol.objective).is_none());
    }

    #[test]
    fn small_mesh_rejected() {
        let q = FieldSize::new(4).unwrap();
        assert!(build_lp(q, Side::Lower, vec![p("x-1")], 63).is_err());
        assert!(build_lp(q, Side::Lower, vec![], 64).is_err());
    }

    #[test]
    fn textbook_program() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18: optimum 36 at (2, 6)
        let a = vec![vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]];
        let (st, x, v) = simplex(&a, &[4.0, 12.0, 18.0], &[3.0, 5.0]).unwrap();
        assert_eq!(st, LpStatus::Optimal);
        assert!((v - 36.0).abs() < 1e-9 && (x[0] - 2.0).abs() < 1e-9 && (x[1] - 6.0).abs() < 1e-9);
        let (st, _, _) = simplex(&[vec![-1.0, 1.0]], &[1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(st, LpStatus::Unbounded);
    }

    #[test]
    fn debug_dump_lists_pivots() {
        let q = FieldSize::new(4).unwrap();
        let lp = build_lp(q, Side::Upper, vec![p("x-9"), p("x-8")], 256).unwrap();
        let mut log = String::new();
        let sol = solve_with_log(&lp, Some(&mut log)).unwrap();
        assert!(log.contains("iterations:") && log.contains("basis:"));
        // roots of the system are exceptions, so the bound may drop below 9
        assert!(sol.objective > 7f64.ln() && sol.objective < 9f64.ln(), "{}", sol.objective.exp());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_exponent(0.14449), BigRational::new(1445.into(), 10000.into()));
        assert!(round_exponent(-1e-12).is_zero());
    }
}
