//! Exact Euclidean projection onto the probability simplex, plus the
//! simplex-constrained QP kernel `min 1/2 |w|^2 + c.w` shared by the
//! one-class trainers.
//!
//! The projection uses the exact sort-and-threshold method: after sorting
//! coordinate values, the unique threshold is found in closed form from the
//! largest prefix whose entries stay positive. A weighted variant handles
//! coordinates tied together by ordering constraints (used for the
//! dual-edge-channel trainer, whose RGB edge weight may not exceed the depth
//! edge weight): tied coordinates collapse into one value with multiplicity.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

/// Projects `v` onto `{ w : w >= 0, sum w = 1 }` exactly.
///
/// Returns the projection and the threshold `tau` with
/// `w_i = max(0, v_i - tau)`.
pub fn project_to_simplex(v: &[f64]) -> (Vec<f64>, f64) {
    let mults = vec![1.0; v.len()];
    project_weighted_simplex(v, &mults)
}

/// Weighted projection: finds `tau` with
/// `sum_j m_j * max(0, v_j - tau) = 1` and returns
/// `w_j = max(0, v_j - tau)`.
///
/// With unit multiplicities this is the plain simplex projection. A
/// coordinate of multiplicity `m` stands for `m` original coordinates
/// constrained to share one value.
pub fn project_weighted_simplex(v: &[f64], mults: &[f64]) -> (Vec<f64>, f64) {
    debug_assert_eq!(v.len(), mults.len());
    debug_assert!(!v.is_empty());
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].partial_cmp(&v[a]).expect("finite values"));

    // Walk prefixes in descending value order; the valid threshold is the
    // one from the largest prefix whose smallest member stays positive.
    let mut value_sum = 0.0;
    let mut mult_sum = 0.0;
    let mut tau = 0.0;
    for (rank, &j) in order.iter().enumerate() {
        value_sum += mults[j] * v[j];
        mult_sum += mults[j];
        let candidate = (value_sum - 1.0) / mult_sum;
        if v[j] - candidate > 0.0 {
            tau = candidate;
        } else if rank > 0 {
            break;
        } else {
            // Degenerate: even the largest coordinate would clip; keep the
            // single-coordinate threshold (puts all mass there).
            tau = candidate;
            break;
        }
    }
    let w = v.iter().map(|&x| (x - tau).max(0.0)).collect();
    (w, tau)
}

/// Solves `min 1/2 |w|^2 + c.w` over the probability simplex, optionally
/// intersected with pairwise ordering constraints `w[a] <= w[b]`.
///
/// Without extra constraints the solution is exactly the Euclidean
/// projection of `-c` onto the simplex. Ordering constraints are handled by
/// tying violated pairs to a shared value (with summed multiplicity) and
/// re-projecting; for the pair lists used here (disjoint or chain-ordered
/// pairs) this coincides with the exact KKT solution, which
/// [`simplex_qp_kkt_residual`] verifies.
pub fn solve_simplex_qp(linear_cost: &[f64], extra: &[(usize, usize)]) -> Result<Vec<f64>> {
    if linear_cost.is_empty() {
        return Err(CoreError::EmptyInput("linear cost vector"));
    }
    for &c in linear_cost {
        if !c.is_finite() {
            return Err(CoreError::NonFinite("linear cost"));
        }
    }
    for &(a, b) in extra {
        if a >= linear_cost.len() || b >= linear_cost.len() || a == b {
            return Err(CoreError::InvalidValue {
                what: "ordering constraint index",
                value: a as f64,
            });
        }
    }

    let n = linear_cost.len();
    // Group representative per coordinate; groups merge when an ordering
    // constraint binds at the optimum of the relaxed problem.
    let mut group: Vec<usize> = (0..n).collect();
    let find = |group: &Vec<usize>, mut i: usize| -> usize {
        while group[i] != i {
            i = group[i];
        }
        i
    };

    loop {
        // Solve with current ties: each group is one weighted coordinate
        // whose value is the mean of -c over members.
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            members[find(&group, i)].push(i);
        }
        let reps: Vec<usize> = (0..n).filter(|&i| !members[i].is_empty()).collect();
        let values: Vec<f64> = reps
            .iter()
            .map(|&r| {
                let s: f64 = members[r].iter().map(|&i| -linear_cost[i]).sum();
                s / members[r].len() as f64
            })
            .collect();
        let mults: Vec<f64> = reps.iter().map(|&r| members[r].len() as f64).collect();
        let (wr, _tau) = project_weighted_simplex(&values, &mults);

        let mut w = vec![0.0; n];
        for (gi, &r) in reps.iter().enumerate() {
            for &i in &members[r] {
                w[i] = wr[gi];
            }
        }

        // Merge the first violated ordering pair, if any, and re-solve.
        let mut merged = false;
        for &(a, b) in extra {
            let (ra, rb) = (find(&group, a), find(&group, b));
            if ra != rb && w[a] > w[b] {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                group[hi] = lo;
                merged = true;
                break;
            }
        }
        if !merged {
            return Ok(w);
        }
    }
}

/// KKT residual of a candidate solution to the simplex QP.
///
/// Returns the largest violation among: stationarity on positive
/// coordinates, dual feasibility on zero coordinates, the unit-sum
/// constraint, nonnegativity, ordering feasibility, and complementary
/// slackness of the ordering multipliers. Zero (up to rounding) certifies
/// global optimality of the convex program.
pub fn simplex_qp_kkt_residual(linear_cost: &[f64], extra: &[(usize, usize)], w: &[f64]) -> f64 {
    let n = linear_cost.len();
    debug_assert_eq!(w.len(), n);
    let mut residual = 0.0f64;

    let sum: f64 = w.iter().sum();
    residual = residual.max((sum - 1.0).abs());
    for &wi in w {
        residual = residual.max(-wi);
    }
    for &(a, b) in extra {
        residual = residual.max(w[a] - w[b]);
    }

    // Stationarity: w_i + c_i + lambda - beta_i + (ordering terms) = 0 with
    // beta_i >= 0 and beta_i w_i = 0. Recover the ordering multipliers from
    // tied groups, then lambda from any interior coordinate.
    // grad_i = w_i + c_i; with mu_ab >= 0 on w_a <= w_b:
    //   grad_a + lambda + mu_ab - beta_a = 0, grad_b + lambda - mu_ab - beta_b = 0.
    // For the pair lists used here, check stationarity group-wise: within a
    // tied active group the mean gradient plays the single-coordinate role.
    let grad: Vec<f64> = (0..n).map(|i| w[i] + linear_cost[i]).collect();

    // Union coordinates tied by an active ordering constraint (equal values).
    let mut group: Vec<usize> = (0..n).collect();
    let find = |group: &Vec<usize>, mut i: usize| -> usize {
        while group[i] != i {
            i = group[i];
        }
        i
    };
    for &(a, b) in extra {
        if (w[a] - w[b]).abs() <= 1e-12 {
            let (ra, rb) = (find(&group, a), find(&group, b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                group[hi] = lo;
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        members[find(&group, i)].push(i);
    }

    // lambda from positive groups: mean gradient must be equal across all
    // positive groups; for zero groups mean gradient + lambda >= 0.
    let mut lambda: Option<f64> = None;
    for m in members.iter().filter(|m| !m.is_empty()) {
        let mean_grad: f64 = m.iter().map(|&i| grad[i]).sum::<f64>() / m.len() as f64;
        let positive = m.iter().any(|&i| w[i] > 1e-12);
        if positive {
            match lambda {
                None => lambda = Some(-mean_grad),
                Some(l) => residual = residual.max((mean_grad + l).abs()),
            }
        }
    }
    let lambda = lambda.unwrap_or(0.0);
    for m in members.iter().filter(|m| !m.is_empty()) {
        let mean_grad: f64 = m.iter().map(|&i| grad[i]).sum::<f64>() / m.len() as f64;
        let positive = m.iter().any(|&i| w[i] > 1e-12);
        if !positive {
            // beta = mean_grad + lambda must be >= 0.
            residual = residual.max(-(mean_grad + lambda));
        }
    }

    // Ordering multiplier sign: for an active tied pair, the multiplier is
    // mu = -(grad_a + lambda) on the lower-indexed side; it must be >= 0
    // when the tie binds (w_a would otherwise exceed w_b).
    for &(a, b) in extra {
        if (w[a] - w[b]).abs() <= 1e-12 && w[a] > 1e-12 {
            let mu = -(grad[a] + lambda);
            residual = residual.max(-mu);
        }
    }

    residual
}
