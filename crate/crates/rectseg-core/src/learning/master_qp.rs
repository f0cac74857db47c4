//! Dense active-set solver for the cutting-plane master problem.
//!
//! The master problem after any number of accumulated planes is
//!
//! ```text
//! minimize   1/2 |w|^2 + (C/N) * sum_k xi_k
//! subject to w . dpsi_n + xi_{k(n)} >= loss_n   for every plane n
//!            xi_k >= 0,   w >= 0,   sum_i w_i = 1
//! ```
//!
//! with one slack per training sample. Dimensions stay tiny (at most a
//! dozen weights plus one slack per sample), so a dense primal active-set
//! method with an LU-factored KKT system per step is exact and fast. The
//! returned solution carries a full KKT residual computed from the final
//! multipliers; since the problem is convex, a small residual certifies
//! global optimality.
//!
//! A slack variable enters the system only when its sample owns at least
//! one plane, and the initial working set pins every slack (at its bound or
//! at its most violated plane). The pinning constraint's multiplier equals
//! the positive slack cost whenever it is the sole pin, so it is never
//! dropped and the quadratic term's rank deficiency in the slack block never
//! makes a KKT system singular.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::{CoreError, Result};

/// One cutting plane: `w . delta_psi + xi_sample >= loss`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    /// Feature difference (violating labeling minus ground truth).
    pub delta_psi: Vec<f64>,
    /// Loss of the violating labeling against ground truth.
    pub loss: f64,
    /// Index of the training sample that generated the plane.
    pub sample: usize,
}

/// Solution of the master problem with its optimality certificate.
#[derive(Debug, Clone)]
pub struct MasterSolution {
    /// Optimal weights (length = weight dimension), on the simplex.
    pub weights: Vec<f64>,
    /// Optimal slack per sample (length = sample count; zero for samples
    /// without planes).
    pub slacks: Vec<f64>,
    /// Optimal objective value.
    pub objective: f64,
    /// Largest KKT violation (stationarity, feasibility, dual signs).
    pub kkt_residual: f64,
    /// Active-set iterations used.
    pub iterations: usize,
}

/// Kind and payload of one linear inequality `grad . z >= rhs`.
#[derive(Debug, Clone)]
struct Inequality {
    grad: Vec<f64>,
    rhs: f64,
}

const STEP_EPS: f64 = 1e-12;
const MULT_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-11;

/// Solves the master problem exactly.
///
/// `weight_dim` is the weight-vector length, `n_samples` the total sample
/// count (the slack cost is `c_reg / n_samples`). Planes may arrive in any
/// order; sample indices must be `< n_samples`.
pub fn solve_master_qp(
    weight_dim: usize,
    n_samples: usize,
    planes: &[Plane],
    c_reg: f64,
) -> Result<MasterSolution> {
    if weight_dim == 0 {
        return Err(CoreError::EmptyInput("weight dimension"));
    }
    if n_samples == 0 {
        return Err(CoreError::EmptyInput("sample count"));
    }
    if !(c_reg.is_finite() && c_reg > 0.0) {
        return Err(CoreError::InvalidValue {
            what: "regularization C",
            value: c_reg,
        });
    }
    for p in planes {
        if p.delta_psi.len() != weight_dim {
            return Err(CoreError::LayoutMismatch {
                expected: "plane gradient of weight dimension",
                got: "wrong length",
            });
        }
        if p.sample >= n_samples {
            return Err(CoreError::InvalidValue {
                what: "plane sample index",
                value: p.sample as f64,
            });
        }
        if !p.loss.is_finite() || p.delta_psi.iter().any(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite("cutting plane"));
        }
    }

    // Materialize slack variables only for samples that own planes.
    let mut slack_slot: Vec<Option<usize>> = vec![None; n_samples];
    let mut n_slack = 0;
    for p in planes {
        if slack_slot[p.sample].is_none() {
            slack_slot[p.sample] = Some(n_slack);
            n_slack += 1;
        }
    }
    let nv = weight_dim + n_slack;
    let slack_cost = c_reg / n_samples as f64;

    // Inequality list in fixed order: planes, slack bounds, weight bounds.
    let mut ineqs: Vec<Inequality> = Vec::with_capacity(planes.len() + n_slack + weight_dim);
    for p in planes {
        let mut grad = vec![0.0; nv];
        grad[..weight_dim].copy_from_slice(&p.delta_psi);
        grad[weight_dim + slack_slot[p.sample].expect("materialized")] = 1.0;
        ineqs.push(Inequality { grad, rhs: p.loss });
    }
    let slack_bound_base = ineqs.len();
    for s in 0..n_slack {
        let mut grad = vec![0.0; nv];
        grad[weight_dim + s] = 1.0;
        ineqs.push(Inequality { grad, rhs: 0.0 });
    }
    for i in 0..weight_dim {
        let mut grad = vec![0.0; nv];
        grad[i] = 1.0;
        ineqs.push(Inequality { grad, rhs: 0.0 });
    }

    // Feasible start: uniform weights, slacks at their minimal feasible
    // values; working set pins every slack.
    let mut z = vec![0.0; nv];
    for zi in z.iter_mut().take(weight_dim) {
        *zi = 1.0 / weight_dim as f64;
    }
    let mut active: Vec<usize> = Vec::new();
    for k in 0..n_samples {
        let Some(slot) = slack_slot[k] else { continue };
        let mut worst = 0.0f64;
        let mut worst_plane: Option<usize> = None;
        for (n, p) in planes.iter().enumerate() {
            if p.sample != k {
                continue;
            }
            let margin: f64 = p
                .delta_psi
                .iter()
                .zip(&z[..weight_dim])
                .map(|(g, w)| g * w)
                .sum();
            let needed = p.loss - margin;
            if needed > worst {
                worst = needed;
                worst_plane = Some(n);
            }
        }
        z[weight_dim + slot] = worst;
        match worst_plane {
            Some(n) => active.push(n),
            None => active.push(slack_bound_base + slot),
        }
    }

    let objective = |z: &[f64]| -> f64 {
        let quad: f64 = z[..weight_dim].iter().map(|x| 0.5 * x * x).sum();
        let lin: f64 = z[weight_dim..].iter().map(|x| slack_cost * x).sum();
        quad + lin
    };

    let iter_cap = 100 + 10 * (ineqs.len() + nv);
    let mut lambda_eq = 0.0;
    let mut lambda_active: Vec<f64> = Vec::new();
    let mut iterations = 0;
    while iterations < iter_cap {
        iterations += 1;

        let Some((z_star, l_eq, l_act)) =
            solve_eqp(weight_dim, nv, slack_cost, &ineqs, &active)
        else {
            // Dependent working set (degenerate vertex): discard the most
            // recently added constraint and continue from the same point.
            active.pop();
            continue;
        };
        lambda_eq = l_eq;
        lambda_active = l_act;

        let step_inf = z
            .iter()
            .zip(&z_star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if step_inf <= STEP_EPS {
            // At the face optimum: either done, or release a constraint.
            let mut drop_idx: Option<usize> = None;
            for (pos, &ci) in active.iter().enumerate() {
                if lambda_active[pos] < -MULT_EPS {
                    // Lowest constraint index among negatives (anti-cycling).
                    match drop_idx {
                        None => drop_idx = Some(pos),
                        Some(d) if ci < active[d] => drop_idx = Some(pos),
                        _ => {}
                    }
                }
            }
            match drop_idx {
                None => break,
                Some(pos) => {
                    active.remove(pos);
                    continue;
                }
            }
        }

        // Move toward the face optimum; stop at the first blocking
        // inactive inequality. A gradient that lies in the span of the
        // working set has an exactly zero directional derivative, so any
        // apparent blocking from it is rounding noise: such candidates are
        // skipped (adding one would make the KKT system singular).
        let dir: Vec<f64> = z.iter().zip(&z_star).map(|(a, b)| b - a).collect();
        let mut candidates: Vec<(f64, usize)> = Vec::new();
        for (j, ineq) in ineqs.iter().enumerate() {
            if active.contains(&j) {
                continue;
            }
            let gd: f64 = ineq.grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
            if gd >= -1e-14 {
                continue;
            }
            let gz: f64 = ineq.grad.iter().zip(&z).map(|(g, zi)| g * zi).sum();
            let a_j = ((gz - ineq.rhs) / (-gd)).max(0.0);
            if a_j < 1.0 {
                candidates.push((a_j, j));
            }
        }
        candidates
            .sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite ratios").then(x.1.cmp(&y.1)));
        let mut alpha = 1.0f64;
        let mut blocking: Option<usize> = None;
        if !candidates.is_empty() {
            let basis = working_set_basis(weight_dim, nv, &ineqs, &active);
            for (a_j, j) in candidates {
                if spanned_by(&basis, &ineqs[j].grad) {
                    continue;
                }
                alpha = a_j;
                blocking = Some(j);
                break;
            }
        }
        for (zi, di) in z.iter_mut().zip(&dir) {
            *zi += alpha * di;
        }
        if let Some(j) = blocking {
            active.push(j);
        }
    }

    // Assemble the certificate: stationarity with the final multipliers,
    // primal feasibility of every constraint, dual feasibility.
    let mut residual = 0.0f64;
    let mut stat = vec![0.0; nv];
    for i in 0..weight_dim {
        stat[i] = z[i] - lambda_eq;
    }
    for s in 0..n_slack {
        stat[weight_dim + s] = slack_cost;
    }
    for (pos, &ci) in active.iter().enumerate() {
        for (si, g) in stat.iter_mut().zip(&ineqs[ci].grad) {
            *si -= lambda_active[pos] * g;
        }
        residual = residual.max(-lambda_active[pos]);
    }
    for si in &stat {
        residual = residual.max(si.abs());
    }
    let sum_w: f64 = z[..weight_dim].iter().sum();
    residual = residual.max((sum_w - 1.0).abs());
    for ineq in &ineqs {
        let gz: f64 = ineq.grad.iter().zip(&z).map(|(g, zi)| g * zi).sum();
        residual = residual.max(ineq.rhs - gz);
    }

    let mut slacks = vec![0.0; n_samples];
    for k in 0..n_samples {
        if let Some(s) = slack_slot[k] {
            slacks[k] = z[weight_dim + s].max(0.0);
        }
    }
    let mut weights = z[..weight_dim].to_vec();
    for w in weights.iter_mut() {
        if *w < 0.0 && *w > -1e-12 {
            *w = 0.0;
        }
    }

    Ok(MasterSolution {
        objective: objective(&z),
        weights,
        slacks,
        kkt_residual: residual,
        iterations,
    })
}

/// Orthonormal basis of the span of the working-set gradients (the
/// simplex-sum equality plus the active inequality gradients).
fn working_set_basis(
    weight_dim: usize,
    nv: usize,
    ineqs: &[Inequality],
    active: &[usize],
) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(active.len() + 1);
    let mut eq = vec![0.0; nv];
    for e in eq.iter_mut().take(weight_dim) {
        *e = 1.0;
    }
    push_orthonormal(&mut basis, eq);
    for &ci in active {
        push_orthonormal(&mut basis, ineqs[ci].grad.clone());
    }
    basis
}

fn push_orthonormal(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>) {
    let norm0 = vec_norm(&v);
    if norm0 == 0.0 {
        return;
    }
    // Two projection passes keep the basis orthogonal to working
    // precision even when vectors nearly coincide.
    for _ in 0..2 {
        for b in basis.iter() {
            let d = vec_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
    }
    let n = vec_norm(&v);
    if n > 1e-10 * norm0 {
        for vi in v.iter_mut() {
            *vi /= n;
        }
        basis.push(v);
    }
}

/// True when `grad` lies (numerically) in the span of `basis`.
fn spanned_by(basis: &[Vec<f64>], grad: &[f64]) -> bool {
    let norm0 = vec_norm(grad);
    if norm0 == 0.0 {
        return true;
    }
    let mut v = grad.to_vec();
    for _ in 0..2 {
        for b in basis {
            let d = vec_dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
    }
    vec_norm(&v) <= 1e-9 * norm0
}

fn vec_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn vec_norm(a: &[f64]) -> f64 {
    vec_dot(a, a).sqrt()
}

/// Solves the equality-constrained subproblem for a working set: the
/// simplex-sum equality plus `active` inequalities held at equality.
///
/// Returns `(z, lambda_eq, lambda_active)` or `None` when the KKT system is
/// singular (linearly dependent working set).
fn solve_eqp(
    weight_dim: usize,
    nv: usize,
    slack_cost: f64,
    ineqs: &[Inequality],
    active: &[usize],
) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let na = 1 + active.len();
    let n = nv + na;
    let mut m = vec![0.0; n * n];
    let mut rhs = vec![0.0; n];

    // Stationarity rows: Q z - A^T lambda = -q.
    for i in 0..weight_dim {
        m[i * n + i] = 1.0;
    }
    for i in weight_dim..nv {
        rhs[i] = -slack_cost;
    }
    // Equality gradient (sum of weights).
    for i in 0..weight_dim {
        m[i * n + nv] = -1.0;
    }
    for (a_pos, &ci) in active.iter().enumerate() {
        for (i, g) in ineqs[ci].grad.iter().enumerate() {
            m[i * n + nv + 1 + a_pos] = -g;
        }
    }
    // Constraint rows: A z = b.
    for i in 0..weight_dim {
        m[nv * n + i] = 1.0;
    }
    rhs[nv] = 1.0;
    for (a_pos, &ci) in active.iter().enumerate() {
        let row = nv + 1 + a_pos;
        for (i, g) in ineqs[ci].grad.iter().enumerate() {
            m[row * n + i] = *g;
        }
        rhs[row] = ineqs[ci].rhs;
    }

    if !solve_dense(&mut m, &mut rhs, n) {
        return None;
    }
    let z = rhs[..nv].to_vec();
    let lambda_eq = rhs[nv];
    let lambda_active = rhs[nv + 1..].to_vec();
    Some((z, lambda_eq, lambda_active))
}

/// In-place dense linear solve (partial-pivot Gaussian elimination).
/// Returns false when a pivot falls below the singularity threshold.
fn solve_dense(m: &mut [f64], rhs: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = r;
            }
        }
        if pivot_val < PIVOT_EPS {
            return false;
        }
        if pivot_row != col {
            for c in 0..n {
                m.swap(pivot_row * n + c, col * n + c);
            }
            rhs.swap(pivot_row, col);
        }
        let pivot = m[col * n + col];
        for r in col + 1..n {
            let factor = m[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                m[r * n + c] -= factor * m[col * n + c];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    for col in (0..n).rev() {
        let mut v = rhs[col];
        for c in col + 1..n {
            v -= m[col * n + c] * rhs[c];
        }
        rhs[col] = v / m[col * n + col];
    }
    true
}
