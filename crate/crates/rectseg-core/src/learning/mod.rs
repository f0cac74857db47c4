//! Weight learning from example segmentations.
//!
//! Two trainers produce simplex-constrained [`WeightVector`]s:
//!
//! * [`train_ossvm`]: a one-class formulation whose slack constraints are
//!   always tight (features and weights are both nonnegative), so the whole
//!   problem collapses to one Euclidean projection onto the simplex — see
//!   [`projection::solve_simplex_qp`]. [`train_ossvm_rgbd`] adds the
//!   ordering requirement that the depth edge weight dominate the color
//!   edge weight.
//! * [`train_2cssvm`]: a cutting-plane loop over full two-class margin
//!   constraints. Each round finds the worst violating labeling per sample
//!   by loss-augmented graph-cut inference, accumulates the induced planes,
//!   and re-solves the master quadratic program
//!   ([`master_qp::solve_master_qp`]) with one slack per sample.
//!
//! [`theorem1_harness`] checks the analytic bridge between the two: when
//! every negative example is a constant-feature labeling and the loss is
//! fixed at 1, both trainers return the same weights and their objectives
//! differ by a predictable constant.
//!
//! [`cross_validate_prior`] picks the edge-prior coefficient by k-fold
//! cross-validation at sequence granularity.

pub mod master_qp;
pub mod projection;

pub use master_qp::{solve_master_qp, MasterSolution, Plane};
pub use projection::{
    project_to_simplex, project_weighted_simplex, simplex_qp_kkt_residual, solve_simplex_qp,
};

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::grid::Mask;
use crate::inference::{build_unary, loss_augmented_minimize, minimize_energy, PairwiseCosts};
use crate::model::{
    compute_features, compute_features_rgbd, EdgeWeightField, FeatureVector, Layout, WeightVector,
};

/// Ground-truth feature vector of one training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    /// Caller-chosen identifier (reported in diagnostics).
    pub id: usize,
    /// Features of the ground-truth labeling against its hypothesis.
    pub features: FeatureVector,
}

impl TrainingSample {
    /// Wraps a precomputed ground-truth feature vector.
    pub fn new(id: usize, features: FeatureVector) -> Self {
        Self { id, features }
    }
}

/// Prior-coefficient grid searched by cross-validation.
pub const DEFAULT_PRIOR_GRID: [f64; 7] = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

/// Trainer settings shared by both formulations.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnConfig {
    /// Regularization strength (divided by the sample count in the slack
    /// cost).
    pub c_reg: f64,
    /// Coefficient rewarding edge weight (applied to the first entry; for
    /// the dual-edge layout, to the color edge entry).
    pub prior_weight: f64,
    /// Cutting-plane round cap.
    pub max_iterations: usize,
    /// Convergence threshold on the largest slack-adjusted margin
    /// violation.
    pub violation_tolerance: f64,
    /// Largest acceptable optimality residual for internal QP solves.
    pub qp_kkt_tolerance: f64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        Self {
            c_reg: 1.0,
            prior_weight: 0.0,
            max_iterations: 10,
            violation_tolerance: 1e-4,
            qp_kkt_tolerance: 1e-8,
        }
    }
}

impl LearnConfig {
    /// Rejects non-finite or out-of-range settings.
    pub fn validate(&self) -> Result<()> {
        if !(self.c_reg.is_finite() && self.c_reg > 0.0) {
            return Err(CoreError::InvalidValue {
                what: "regularization C",
                value: self.c_reg,
            });
        }
        if !(self.prior_weight.is_finite() && self.prior_weight >= 0.0) {
            return Err(CoreError::InvalidValue {
                what: "prior weight",
                value: self.prior_weight,
            });
        }
        if self.max_iterations == 0 {
            return Err(CoreError::InvalidValue {
                what: "iteration cap",
                value: 0.0,
            });
        }
        if !(self.violation_tolerance.is_finite() && self.violation_tolerance > 0.0) {
            return Err(CoreError::InvalidValue {
                what: "violation tolerance",
                value: self.violation_tolerance,
            });
        }
        if !(self.qp_kkt_tolerance.is_finite() && self.qp_kkt_tolerance > 0.0) {
            return Err(CoreError::InvalidValue {
                what: "KKT tolerance",
                value: self.qp_kkt_tolerance,
            });
        }
        Ok(())
    }
}

/// Growing pool of cutting planes with near-duplicate suppression.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSet {
    planes: Vec<Plane>,
}

/// Elementwise tolerance under which two planes count as duplicates.
pub const PLANE_DEDUP_TOLERANCE: f64 = 1e-12;

impl ConstraintSet {
    /// Empty pool.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a plane unless an existing plane of the same sample matches it
    /// elementwise within [`PLANE_DEDUP_TOLERANCE`]; returns whether the
    /// plane was stored.
    pub fn push(&mut self, plane: Plane) -> bool {
        let dup = self.planes.iter().any(|p| {
            p.sample == plane.sample
                && (p.loss - plane.loss).abs() <= PLANE_DEDUP_TOLERANCE
                && p.delta_psi.len() == plane.delta_psi.len()
                && p.delta_psi
                    .iter()
                    .zip(&plane.delta_psi)
                    .all(|(a, b)| (a - b).abs() <= PLANE_DEDUP_TOLERANCE)
        });
        if dup {
            return false;
        }
        self.planes.push(plane);
        true
    }

    /// Stored planes in insertion order.
    pub fn planes(&self) -> &[Plane] {
        &self.planes
    }

    /// Number of stored planes.
    pub fn len(&self) -> usize {
        self.planes.len()
    }

    /// True when no plane is stored.
    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }
}

/// Checks layout consistency and returns the common layout.
fn samples_layout(samples: &[TrainingSample]) -> Result<Layout> {
    let first = samples
        .first()
        .ok_or(CoreError::EmptyInput("training samples"))?;
    let layout = first.features.layout();
    for s in samples {
        if s.features.layout() != layout {
            return Err(CoreError::LayoutMismatch {
                expected: layout.tag(),
                got: s.features.layout().tag(),
            });
        }
    }
    Ok(layout)
}

/// Linear coefficient of the collapsed one-class objective:
/// `(C/N) * sum_k psi_k  -  prior * e_edge`.
fn ossvm_linear_cost(samples: &[TrainingSample], layout: Layout, config: &LearnConfig) -> Vec<f64> {
    let scale = config.c_reg / samples.len() as f64;
    let mut c = vec![0.0; layout.len()];
    for s in samples {
        for (ci, fi) in c.iter_mut().zip(s.features.entries()) {
            *ci += scale * fi;
        }
    }
    c[0] -= config.prior_weight;
    c
}

fn solve_checked(
    layout: Layout,
    cost: &[f64],
    extra: &[(usize, usize)],
    tol: f64,
) -> Result<WeightVector> {
    let w = solve_simplex_qp(cost, extra)?;
    let residual = simplex_qp_kkt_residual(cost, extra, &w);
    if !(residual <= tol) {
        return Err(CoreError::InvalidValue {
            what: "weight QP optimality residual",
            value: residual,
        });
    }
    WeightVector::from_entries(layout, w)
}

/// Trains weights from ground-truth features alone.
///
/// Minimizes `1/2 |w|^2 + (C/N) sum_k eps_k - prior * w_edge` over the
/// simplex, where the per-sample slack `eps_k = 1 + w . psi_k` is forced by
/// nonnegativity of both factors; the problem therefore reduces to a single
/// simplex projection and the result carries an exact optimality
/// certificate.
pub fn train_ossvm(samples: &[TrainingSample], config: &LearnConfig) -> Result<WeightVector> {
    config.validate()?;
    let layout = samples_layout(samples)?;
    let cost = ossvm_linear_cost(samples, layout, config);
    solve_checked(layout, &cost, &[], config.qp_kkt_tolerance)
}

/// Dual-edge variant of [`train_ossvm`]: the prior rewards the color edge
/// weight and the solution additionally satisfies
/// `w_edge_color <= w_edge_depth`.
pub fn train_ossvm_rgbd(samples: &[TrainingSample], config: &LearnConfig) -> Result<WeightVector> {
    config.validate()?;
    let layout = samples_layout(samples)?;
    if layout != Layout::Rgbd {
        return Err(CoreError::LayoutMismatch {
            expected: Layout::Rgbd.tag(),
            got: layout.tag(),
        });
    }
    let cost = ossvm_linear_cost(samples, layout, config);
    solve_checked(layout, &cost, &[(0, 1)], config.qp_kkt_tolerance)
}

/// Slack values implied by a one-class solution: `eps_k = 1 + w . psi_k`.
pub fn ossvm_slacks(samples: &[TrainingSample], weights: &WeightVector) -> Result<Vec<f64>> {
    samples
        .iter()
        .map(|s| Ok(1.0 + weights.dot(&s.features)?))
        .collect()
}

/// Full one-class objective value at `weights` (slacks at their implied
/// values).
pub fn ossvm_objective(
    samples: &[TrainingSample],
    config: &LearnConfig,
    weights: &WeightVector,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(CoreError::EmptyInput("training samples"));
    }
    let quad: f64 = weights.entries().iter().map(|w| 0.5 * w * w).sum();
    let scale = config.c_reg / samples.len() as f64;
    let mut slack_term = 0.0;
    for s in samples {
        slack_term += scale * (1.0 + weights.dot(&s.features)?);
    }
    Ok(quad + slack_term - config.prior_weight * weights.edge_weight())
}

/// Optimality residual of the collapsed one-class problem at `weights`.
pub fn ossvm_kkt_residual(
    samples: &[TrainingSample],
    config: &LearnConfig,
    weights: &WeightVector,
) -> Result<f64> {
    let layout = samples_layout(samples)?;
    let cost = ossvm_linear_cost(samples, layout, config);
    let extra: &[(usize, usize)] = match layout {
        Layout::Rgb => &[],
        Layout::Rgbd => &[(0, 1)],
    };
    Ok(simplex_qp_kkt_residual(&cost, extra, weights.entries()))
}

/// Raw per-sample inputs needed when training requires inference.
#[derive(Debug, Clone)]
pub struct RawSample {
    /// Hypothesis labeling the example was classified into.
    pub hypothesis: Mask,
    /// Normalized pair weights of the color channel.
    pub edges: EdgeWeightField,
    /// Normalized pair weights of the depth channel, when present.
    pub depth_edges: Option<EdgeWeightField>,
    /// Reference labeling the trainer should prefer.
    pub ground_truth: Mask,
}

impl RawSample {
    /// Single-edge-channel sample.
    pub fn new(hypothesis: Mask, edges: EdgeWeightField, ground_truth: Mask) -> Result<Self> {
        hypothesis.check_same_size_mask(&ground_truth)?;
        edges.check_same_size_mask(&hypothesis)?;
        Ok(Self {
            hypothesis,
            edges,
            depth_edges: None,
            ground_truth,
        })
    }

    /// Dual-edge-channel sample.
    pub fn new_rgbd(
        hypothesis: Mask,
        edges: EdgeWeightField,
        depth_edges: EdgeWeightField,
        ground_truth: Mask,
    ) -> Result<Self> {
        hypothesis.check_same_size_mask(&ground_truth)?;
        edges.check_same_size_mask(&hypothesis)?;
        depth_edges.check_same_size_mask(&hypothesis)?;
        Ok(Self {
            hypothesis,
            edges,
            depth_edges: Some(depth_edges),
            ground_truth,
        })
    }

    /// Layout implied by the available edge channels.
    pub fn layout(&self) -> Layout {
        if self.depth_edges.is_some() {
            Layout::Rgbd
        } else {
            Layout::Rgb
        }
    }

    /// Features of an arbitrary labeling of this sample.
    pub fn features_of(&self, labeling: &Mask) -> Result<FeatureVector> {
        match &self.depth_edges {
            None => compute_features(labeling, &self.hypothesis, &self.edges),
            Some(depth) => {
                compute_features_rgbd(labeling, &self.hypothesis, &self.edges, depth)
            }
        }
    }

    /// Features of the reference labeling.
    pub fn ground_truth_features(&self) -> Result<FeatureVector> {
        self.features_of(&self.ground_truth)
    }

    fn pairwise(&self, weights: &WeightVector) -> Result<PairwiseCosts> {
        match (&self.depth_edges, weights.layout()) {
            (None, Layout::Rgb) => {
                PairwiseCosts::from_edge_weights(&self.edges, weights.edge_weight())
            }
            (Some(depth), Layout::Rgbd) => PairwiseCosts::from_dual_edge_weights(
                &self.edges,
                weights.edge_weight(),
                depth,
                weights.edge_weight_depth().expect("dual layout"),
            ),
            (None, Layout::Rgbd) => Err(CoreError::LayoutMismatch {
                expected: Layout::Rgbd.tag(),
                got: Layout::Rgb.tag(),
            }),
            (Some(_), Layout::Rgb) => Err(CoreError::LayoutMismatch {
                expected: Layout::Rgb.tag(),
                got: Layout::Rgbd.tag(),
            }),
        }
    }

    /// Minimum-energy labeling of this sample under `weights`.
    pub fn rectify(&self, weights: &WeightVector) -> Result<Mask> {
        let unary = build_unary(&self.hypothesis, weights)?;
        let pairwise = self.pairwise(weights)?;
        minimize_energy(&unary, &pairwise)
    }

    /// Worst violating labeling under `weights` (energy minus loss).
    pub fn worst_violator(&self, weights: &WeightVector) -> Result<Mask> {
        let unary = build_unary(&self.hypothesis, weights)?;
        let pairwise = self.pairwise(weights)?;
        loss_augmented_minimize(&unary, &pairwise, &self.ground_truth)
    }
}

/// Fraction of pixels on which two labelings disagree.
fn mean_hamming(a: &Mask, b: &Mask) -> f64 {
    let total = a.width() * a.height();
    let wrong = a
        .labels()
        .iter()
        .zip(b.labels())
        .filter(|(x, y)| x != y)
        .count();
    wrong as f64 / total as f64
}

/// Per-round progress of the cutting-plane trainer.
#[derive(Debug, Clone)]
pub struct TrainReport {
    /// Rounds executed (a round that only confirms convergence counts).
    pub iterations: usize,
    /// Master objective after each master solve (non-decreasing).
    pub master_objectives: Vec<f64>,
    /// Largest slack-adjusted violation found in each round.
    pub max_violations: Vec<f64>,
    /// Last recorded largest violation.
    pub final_max_violation: f64,
    /// Whether the loop stopped below the violation tolerance.
    pub converged: bool,
    /// Planes accumulated over the run.
    pub plane_count: usize,
}

/// Cutting-plane trainer over full margin constraints; returns the weights
/// only. See [`train_2cssvm_report`] for the run diagnostics.
pub fn train_2cssvm(
    samples: &[TrainingSample],
    raw: &[RawSample],
    config: &LearnConfig,
) -> Result<WeightVector> {
    train_2cssvm_report(samples, raw, config).map(|(w, _)| w)
}

/// Cutting-plane trainer with per-round diagnostics.
///
/// Starting from uniform weights, each round finds the worst violating
/// labeling of every sample by loss-augmented inference, scores its
/// violation net of the slack already implied by that sample's accumulated
/// planes, and appends the violated planes. The master program (quadratic
/// in the weights, one slack per sample priced at `C/N`) is re-solved after
/// each round; its objective never decreases because planes only shrink the
/// feasible set. The loop stops when no sample's net violation exceeds the
/// tolerance, or at the round cap.
pub fn train_2cssvm_report(
    samples: &[TrainingSample],
    raw: &[RawSample],
    config: &LearnConfig,
) -> Result<(WeightVector, TrainReport)> {
    config.validate()?;
    let layout = samples_layout(samples)?;
    if raw.len() != samples.len() {
        return Err(CoreError::DimensionMismatch {
            expected: (samples.len(), 1),
            got: (raw.len(), 1),
        });
    }
    for r in raw {
        if r.layout() != layout {
            return Err(CoreError::LayoutMismatch {
                expected: layout.tag(),
                got: r.layout().tag(),
            });
        }
    }

    let n = samples.len();
    let mut weights = WeightVector::uniform(layout);
    let mut constraints = ConstraintSet::new();
    let mut report = TrainReport {
        iterations: 0,
        master_objectives: Vec::new(),
        max_violations: Vec::new(),
        final_max_violation: f64::INFINITY,
        converged: false,
        plane_count: 0,
    };

    for _round in 0..config.max_iterations {
        report.iterations += 1;
        let mut round_max = 0.0f64;
        let mut added_any = false;

        for (k, r) in raw.iter().enumerate() {
            let violator = r.worst_violator(&weights)?;
            let loss = mean_hamming(&violator, &r.ground_truth);
            let psi_hat = r.features_of(&violator)?;
            let delta_psi: Vec<f64> = psi_hat
                .entries()
                .iter()
                .zip(samples[k].features.entries())
                .map(|(a, b)| a - b)
                .collect();
            let margin: f64 = delta_psi
                .iter()
                .zip(weights.entries())
                .map(|(d, w)| d * w)
                .sum();
            // Slack this sample already enjoys from earlier planes.
            let implied_slack = constraints
                .planes()
                .iter()
                .filter(|p| p.sample == k)
                .map(|p| {
                    let m: f64 = p
                        .delta_psi
                        .iter()
                        .zip(weights.entries())
                        .map(|(d, w)| d * w)
                        .sum();
                    p.loss - m
                })
                .fold(0.0f64, f64::max);
            let violation = (loss - margin) - implied_slack;
            round_max = round_max.max(violation);
            if violation > config.violation_tolerance {
                added_any |= constraints.push(Plane {
                    delta_psi,
                    loss,
                    sample: k,
                });
            }
        }

        report.max_violations.push(round_max);
        report.final_max_violation = round_max;
        if round_max <= config.violation_tolerance {
            report.converged = true;
            break;
        }
        if !added_any {
            // Violations persist but every plane is already present: the
            // master solution cannot change, so stop rather than loop.
            break;
        }

        let sol = solve_master_qp(layout.len(), n, constraints.planes(), config.c_reg)?;
        if !(sol.kkt_residual <= config.qp_kkt_tolerance) {
            return Err(CoreError::InvalidValue {
                what: "master QP optimality residual",
                value: sol.kkt_residual,
            });
        }
        report.master_objectives.push(sol.objective);
        weights = WeightVector::from_entries(layout, sol.weights)?;
    }

    report.plane_count = constraints.len();
    Ok((weights, report))
}

/// Solves the cutting-plane master program for an externally supplied
/// constraint pool and sample count.
pub fn solve_constraint_set(
    layout: Layout,
    n_samples: usize,
    constraints: &ConstraintSet,
    config: &LearnConfig,
) -> Result<(WeightVector, MasterSolution)> {
    config.validate()?;
    let sol = solve_master_qp(layout.len(), n_samples, constraints.planes(), config.c_reg)?;
    if !(sol.kkt_residual <= config.qp_kkt_tolerance) {
        return Err(CoreError::InvalidValue {
            what: "master QP optimality residual",
            value: sol.kkt_residual,
        });
    }
    let w = WeightVector::from_entries(layout, sol.weights.clone())?;
    Ok((w, sol))
}

/// Numerical comparison of the two trainers on a constructed instance.
#[derive(Debug, Clone)]
pub struct Theorem1Report {
    /// Weights from the margin-constraint program.
    pub weights_2c: WeightVector,
    /// Weights from the collapsed one-class program.
    pub weights_os: WeightVector,
    /// Largest elementwise weight difference.
    pub weight_gap_inf: f64,
    /// Optimal objective of the margin-constraint program.
    pub objective_2c: f64,
    /// One-class objective at its optimum.
    pub objective_os: f64,
    /// Predicted objective offset `(C/N) * sum_k B_k`.
    pub predicted_gap: f64,
    /// `|objective_os - objective_2c - predicted_gap|`.
    pub objective_gap_error: f64,
}

/// Builds the equivalence instance and solves both programs.
///
/// Each sample `k` contributes one margin constraint whose violating
/// labeling has the constant feature vector with every entry equal to
/// `constants[k]`; on the simplex its weighted sum is exactly
/// `constants[k]`, so the margin program's slack is the one-class slack
/// shifted by that constant. Both programs then share the same minimizer
/// and their objectives differ by `(C/N) * sum_k constants[k]`. Requires a
/// zero prior and constants in `[0, 1]`.
pub fn theorem1_harness(
    samples: &[TrainingSample],
    constants: &[f64],
    config: &LearnConfig,
) -> Result<Theorem1Report> {
    config.validate()?;
    if config.prior_weight != 0.0 {
        return Err(CoreError::InvalidValue {
            what: "prior weight (equivalence requires zero)",
            value: config.prior_weight,
        });
    }
    let layout = samples_layout(samples)?;
    if constants.len() != samples.len() {
        return Err(CoreError::DimensionMismatch {
            expected: (samples.len(), 1),
            got: (constants.len(), 1),
        });
    }
    for &b in constants {
        if !(b.is_finite() && (0.0..=1.0).contains(&b)) {
            return Err(CoreError::InvalidValue {
                what: "per-sample constant",
                value: b,
            });
        }
    }

    let n = samples.len();
    let weights_os = train_ossvm(samples, config)?;
    let objective_os = ossvm_objective(samples, config, &weights_os)?;

    let planes: Vec<Plane> = samples
        .iter()
        .enumerate()
        .map(|(k, s)| Plane {
            delta_psi: s
                .features
                .entries()
                .iter()
                .map(|f| constants[k] - f)
                .collect(),
            loss: 1.0,
            sample: k,
        })
        .collect();
    let sol = solve_master_qp(layout.len(), n, &planes, config.c_reg)?;
    if !(sol.kkt_residual <= config.qp_kkt_tolerance) {
        return Err(CoreError::InvalidValue {
            what: "master QP optimality residual",
            value: sol.kkt_residual,
        });
    }
    let weights_2c = WeightVector::from_entries(layout, sol.weights.clone())?;

    let weight_gap_inf = weights_2c
        .entries()
        .iter()
        .zip(weights_os.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let scale = config.c_reg / n as f64;
    let predicted_gap: f64 = constants.iter().map(|b| scale * b).sum();
    let objective_gap_error = (objective_os - sol.objective - predicted_gap).abs();

    Ok(Theorem1Report {
        weights_2c,
        weights_os,
        weight_gap_inf,
        objective_2c: sol.objective,
        objective_os,
        predicted_gap,
        objective_gap_error,
    })
}

/// Mean held-out error of one prior value.
#[derive(Debug, Clone)]
pub struct PriorRow {
    /// Prior coefficient evaluated.
    pub prior: f64,
    /// Pooled pixel-error rate per fold.
    pub fold_errors: Vec<f64>,
    /// Mean of the fold errors.
    pub mean_error: f64,
}

/// Outcome of prior-coefficient cross-validation.
#[derive(Debug, Clone)]
pub struct CrossValReport {
    /// Grid value with the smallest mean error (ties: smaller prior).
    pub selected_prior: f64,
    /// Folds actually used.
    pub folds_used: usize,
    /// True when the requested fold count exceeded the sequence count.
    pub folds_reduced: bool,
    /// One row per grid value, in grid order.
    pub rows: Vec<PriorRow>,
}

/// Selects the prior coefficient by k-fold cross-validation.
///
/// Sequences are assigned to folds round-robin. For each grid value, the
/// one-class trainer runs on the training folds' ground-truth features and
/// the held-out sequences are rectified with the learned weights; the fold
/// error is the pooled fraction of wrongly labeled pixels. The grid value
/// with the smallest mean fold error wins, ties going to the smaller
/// prior.
pub fn cross_validate_prior(
    dataset: &[Vec<RawSample>],
    grid: &[f64],
    folds: usize,
    config: &LearnConfig,
) -> Result<CrossValReport> {
    config.validate()?;
    if grid.is_empty() {
        return Err(CoreError::EmptyInput("prior grid"));
    }
    for &p in grid {
        if !(p.is_finite() && p >= 0.0) {
            return Err(CoreError::InvalidValue {
                what: "prior grid value",
                value: p,
            });
        }
    }
    if folds == 0 {
        return Err(CoreError::InvalidValue {
            what: "fold count",
            value: 0.0,
        });
    }
    let n_seq = dataset.len();
    if n_seq < 2 {
        return Err(CoreError::EmptyInput("at least two sequences"));
    }
    if dataset.iter().any(|s| s.is_empty()) {
        return Err(CoreError::EmptyInput("sequence frames"));
    }
    let layout = dataset[0][0].layout();
    for seq in dataset {
        for r in seq {
            if r.layout() != layout {
                return Err(CoreError::LayoutMismatch {
                    expected: layout.tag(),
                    got: r.layout().tag(),
                });
            }
        }
    }

    let folds_used = folds.min(n_seq);
    let folds_reduced = folds_used < folds;

    // Precompute ground-truth features once per frame.
    let mut features: Vec<Vec<FeatureVector>> = Vec::with_capacity(n_seq);
    for seq in dataset {
        let mut fs = Vec::with_capacity(seq.len());
        for r in seq {
            fs.push(r.ground_truth_features()?);
        }
        features.push(fs);
    }

    let mut rows: Vec<PriorRow> = Vec::with_capacity(grid.len());
    for &prior in grid {
        let cfg = LearnConfig {
            prior_weight: prior,
            ..config.clone()
        };
        let mut fold_errors = Vec::with_capacity(folds_used);
        for fold in 0..folds_used {
            let mut train: Vec<TrainingSample> = Vec::new();
            for (j, fs) in features.iter().enumerate() {
                if j % folds_used == fold {
                    continue;
                }
                for f in fs {
                    train.push(TrainingSample::new(train.len(), f.clone()));
                }
            }
            let weights = match layout {
                Layout::Rgb => train_ossvm(&train, &cfg)?,
                Layout::Rgbd => train_ossvm_rgbd(&train, &cfg)?,
            };
            let mut wrong = 0usize;
            let mut total = 0usize;
            for (j, seq) in dataset.iter().enumerate() {
                if j % folds_used != fold {
                    continue;
                }
                for r in seq {
                    let rectified = r.rectify(&weights)?;
                    wrong += rectified
                        .labels()
                        .iter()
                        .zip(r.ground_truth.labels())
                        .filter(|(a, b)| a != b)
                        .count();
                    total += rectified.labels().len();
                }
            }
            fold_errors.push(wrong as f64 / total as f64);
        }
        let mean_error = fold_errors.iter().sum::<f64>() / fold_errors.len() as f64;
        rows.push(PriorRow {
            prior,
            fold_errors,
            mean_error,
        });
    }

    let mut best = 0usize;
    for (i, row) in rows.iter().enumerate().skip(1) {
        let b = &rows[best];
        if row.mean_error < b.mean_error
            || (row.mean_error == b.mean_error && row.prior < b.prior)
        {
            best = i;
        }
    }

    Ok(CrossValReport {
        selected_prior: rows[best].prior,
        folds_used,
        folds_reduced,
        rows,
    })
}
