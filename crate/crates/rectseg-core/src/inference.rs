//! Exact energy minimization over binary labelings of a pixel grid.
//!
//! The energy is a sum of per-pixel label costs (from the cross-layer
//! hypothesis comparison) and nonnegative pair penalties for label
//! disagreement (the edge term). Such energies are submodular, so the global
//! minimum is found exactly by max-flow/min-cut on the standard two-terminal
//! grid graph; this module implements Dinic's algorithm with an iterative
//! blocking-flow search.
//!
//! A loss-augmented variant subtracts the per-pixel normalized Hamming loss
//! against a reference labeling from the energy, producing the
//! most-violated-constraint search needed by cutting-plane training. A
//! brute-force enumerator over tiny grids serves as the correctness oracle.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::grid::{Mask, ProbabilityMap};
use crate::model::{EdgeWeightField, NeighborhoodOffsets, WeightVector};

/// Per-pixel costs of assigning label 0 or label 1.
///
/// Costs are finite and at least -1; values below zero arise only from loss
/// augmentation, which subtracts a bounded per-pixel loss.
#[derive(Debug, Clone, PartialEq)]
pub struct UnaryCosts {
    width: usize,
    height: usize,
    cost0: Vec<f64>,
    cost1: Vec<f64>,
}

impl UnaryCosts {
    pub fn new(width: usize, height: usize, cost0: Vec<f64>, cost1: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if cost0.len() != width * height || cost1.len() != width * height {
            return Err(CoreError::DimensionMismatch {
                expected: (width, height),
                got: (cost0.len(), cost1.len()),
            });
        }
        for &c in cost0.iter().chain(cost1.iter()) {
            if !c.is_finite() {
                return Err(CoreError::NonFinite("unary cost"));
            }
            if c < -1.0 {
                return Err(CoreError::InvalidValue {
                    what: "unary cost (must be >= -1)",
                    value: c,
                });
            }
        }
        Ok(UnaryCosts {
            width,
            height,
            cost0,
            cost1,
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.cost0.len()
    }

    /// Cost of labeling `(row, col)` background.
    #[inline]
    pub fn cost0(&self, row: usize, col: usize) -> f64 {
        self.cost0[row * self.width + col]
    }

    /// Cost of labeling `(row, col)` foreground.
    #[inline]
    pub fn cost1(&self, row: usize, col: usize) -> f64 {
        self.cost1[row * self.width + col]
    }

    #[inline]
    pub fn cost0_slice(&self) -> &[f64] {
        &self.cost0
    }

    #[inline]
    pub fn cost1_slice(&self) -> &[f64] {
        &self.cost1
    }
}

/// Nonnegative penalty per 4-neighbor pair, paid when the pair's labels
/// disagree (a Potts edge term, submodular by nonnegativity).
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseCosts {
    width: usize,
    height: usize,
    horizontal: Vec<f64>,
    vertical: Vec<f64>,
}

impl PairwiseCosts {
    pub fn new(width: usize, height: usize, horizontal: Vec<f64>, vertical: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if horizontal.len() != (width - 1) * height || vertical.len() != width * (height - 1) {
            return Err(CoreError::DimensionMismatch {
                expected: (width, height),
                got: (horizontal.len(), vertical.len()),
            });
        }
        for &c in horizontal.iter().chain(vertical.iter()) {
            if !c.is_finite() {
                return Err(CoreError::NonFinite("pair penalty"));
            }
            if c < 0.0 {
                return Err(CoreError::InvalidValue {
                    what: "pair penalty (must be >= 0)",
                    value: c,
                });
            }
        }
        Ok(PairwiseCosts {
            width,
            height,
            horizontal,
            vertical,
        })
    }

    /// All-zero penalties (pure unary problem).
    pub fn zero(width: usize, height: usize) -> Result<Self> {
        Self::new(
            width,
            height,
            vec![0.0; (width - 1) * height],
            vec![0.0; width * (height - 1)],
        )
    }

    /// Scales every boundary-pair weight by `coeff` (the learned edge
    /// weight), the single-channel edge term.
    pub fn from_edge_weights(field: &EdgeWeightField, coeff: f64) -> Result<Self> {
        if !(coeff.is_finite() && coeff >= 0.0) {
            return Err(CoreError::InvalidValue {
                what: "edge coefficient",
                value: coeff,
            });
        }
        let horizontal = (0..field.height())
            .flat_map(|r| (0..field.width() - 1).map(move |c| (r, c)))
            .map(|(r, c)| coeff * field.horizontal(r, c))
            .collect();
        let vertical = (0..field.height() - 1)
            .flat_map(|r| (0..field.width()).map(move |c| (r, c)))
            .map(|(r, c)| coeff * field.vertical(r, c))
            .collect();
        Self::new(field.width(), field.height(), horizontal, vertical)
    }

    /// Weighted sum of two edge channels (RGB and depth).
    pub fn from_dual_edge_weights(
        rgb: &EdgeWeightField,
        rgb_coeff: f64,
        depth: &EdgeWeightField,
        depth_coeff: f64,
    ) -> Result<Self> {
        if rgb.width() != depth.width() || rgb.height() != depth.height() {
            return Err(CoreError::DimensionMismatch {
                expected: (rgb.width(), rgb.height()),
                got: (depth.width(), depth.height()),
            });
        }
        let a = Self::from_edge_weights(rgb, rgb_coeff)?;
        let b = Self::from_edge_weights(depth, depth_coeff)?;
        let horizontal = a
            .horizontal
            .iter()
            .zip(&b.horizontal)
            .map(|(x, y)| x + y)
            .collect();
        let vertical = a
            .vertical
            .iter()
            .zip(&b.vertical)
            .map(|(x, y)| x + y)
            .collect();
        Self::new(a.width, a.height, horizontal, vertical)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Penalty of the pair ((row, col), (row, col+1)).
    #[inline]
    pub fn horizontal(&self, row: usize, col: usize) -> f64 {
        self.horizontal[row * (self.width - 1) + col]
    }

    /// Penalty of the pair ((row, col), (row+1, col)).
    #[inline]
    pub fn vertical(&self, row: usize, col: usize) -> f64 {
        self.vertical[row * self.width + col]
    }

    fn check_same_size(&self, unary: &UnaryCosts) -> Result<()> {
        if self.width == unary.width && self.height == unary.height {
            Ok(())
        } else {
            Err(CoreError::DimensionMismatch {
                expected: (unary.width, unary.height),
                got: (self.width, self.height),
            })
        }
    }
}

/// Builds per-pixel label costs from a binarized hypothesis.
///
/// `cost1(p)` sums the inside weights over offsets whose hypothesis pixel is
/// background (penalizing foreground labels the hypothesis does not support);
/// `cost0(p)` sums the outside weights over offsets whose hypothesis pixel is
/// foreground. For every labeling `f`, the summed selected costs equal
/// `shape_distance(f, h, w)` exactly.
pub fn build_unary(h: &Mask, w: &WeightVector) -> Result<UnaryCosts> {
    build_unary_soft(&h.to_probability_map(), w)
}

/// [`build_unary`] with a soft hypothesis: offsets contribute fractionally
/// by `h(p+q)` instead of a binary indicator.
pub fn build_unary_soft(h: &ProbabilityMap, w: &WeightVector) -> Result<UnaryCosts> {
    let offsets = NeighborhoodOffsets::standard();
    let (width, height) = (h.width(), h.height());
    let mut cost0 = vec![0.0; width * height];
    let mut cost1 = vec![0.0; width * height];
    for r in 0..height {
        for c in 0..width {
            let i = r * width + c;
            for (k, &(dr, dc)) in offsets.offsets().iter().enumerate() {
                if let Some(hq) = h.value_at(r as i64 + dr, c as i64 + dc) {
                    cost0[i] += w.outside(k) * hq;
                    cost1[i] += w.inside(k) * (1.0 - hq);
                }
            }
        }
    }
    UnaryCosts::new(width, height, cost0, cost1)
}

/// Energy of a labeling: selected unary costs plus pair penalties across
/// label disagreements.
///
/// This is the single evaluation routine used by both the max-flow solver's
/// callers and the brute-force oracle, with a fixed summation order (pixels
/// row-major, then horizontal pairs, then vertical pairs), so equal labelings
/// always produce bit-identical energies.
pub fn labeling_energy(unary: &UnaryCosts, pairwise: &PairwiseCosts, f: &Mask) -> Result<f64> {
    pairwise.check_same_size(unary)?;
    if f.width() != unary.width || f.height() != unary.height {
        return Err(CoreError::DimensionMismatch {
            expected: (unary.width, unary.height),
            got: (f.width(), f.height()),
        });
    }
    let mut energy = 0.0;
    for r in 0..unary.height {
        for c in 0..unary.width {
            energy += if f.label(r, c) == 1 {
                unary.cost1(r, c)
            } else {
                unary.cost0(r, c)
            };
        }
    }
    for r in 0..unary.height {
        for c in 0..unary.width - 1 {
            if f.label(r, c) != f.label(r, c + 1) {
                energy += pairwise.horizontal(r, c);
            }
        }
    }
    for r in 0..unary.height - 1 {
        for c in 0..unary.width {
            if f.label(r, c) != f.label(r + 1, c) {
                energy += pairwise.vertical(r, c);
            }
        }
    }
    Ok(energy)
}

/// Returns a labeling achieving the exact global minimum of the energy.
///
/// Implemented as a min-cut: source-side pixels take label 1. Per-pixel
/// costs are shifted by their minimum before becoming terminal capacities,
/// which keeps all capacities nonnegative (also under loss augmentation).
pub fn minimize_energy(unary: &UnaryCosts, pairwise: &PairwiseCosts) -> Result<Mask> {
    pairwise.check_same_size(unary)?;
    let (width, height) = (unary.width, unary.height);
    let n = width * height;
    let mut graph = FlowGraph::new(n + 2);
    let source = n;
    let sink = n + 1;

    // Terminal links: cutting s->p assigns label 0 and pays cost0; cutting
    // p->t assigns label 1 and pays cost1. Shifting both by min(cost0, cost1)
    // changes the total energy by a labeling-independent constant only.
    for i in 0..n {
        let (c0, c1) = (unary.cost0[i], unary.cost1[i]);
        let m = c0.min(c1);
        graph.add_arc_pair(source, i, c0 - m);
        graph.add_arc_pair(i, sink, c1 - m);
    }
    // Neighbor links: symmetric disagreement penalties.
    for r in 0..height {
        for c in 0..width - 1 {
            let wgt = pairwise.horizontal(r, c);
            graph.add_symmetric(r * width + c, r * width + c + 1, wgt);
        }
    }
    for r in 0..height - 1 {
        for c in 0..width {
            let wgt = pairwise.vertical(r, c);
            graph.add_symmetric(r * width + c, (r + 1) * width + c, wgt);
        }
    }

    graph.max_flow(source, sink);
    let reachable = graph.residual_reachable(source);
    let labels = (0..n).map(|i| if reachable[i] { 1u8 } else { 0u8 }).collect();
    Mask::from_labels(width, height, labels)
}

/// Most-violated-labeling search for margin-rescaled training.
///
/// Returns an exact argmin over labelings `f` of `energy(f) - loss(f, gt)`
/// where `loss` is the mean per-pixel Hamming disagreement with `gt`. The
/// loss is absorbed into the unary costs by subtracting `1/pixel_count` from
/// the cost of the label disagreeing with `gt` at each pixel, so the problem
/// stays submodular and max-flow stays exact.
pub fn loss_augmented_minimize(
    unary: &UnaryCosts,
    pairwise: &PairwiseCosts,
    gt: &Mask,
) -> Result<Mask> {
    let augmented = loss_augmented_unary(unary, gt)?;
    minimize_energy(&augmented, pairwise)
}

/// The loss-absorbed unary costs used by [`loss_augmented_minimize`].
pub fn loss_augmented_unary(unary: &UnaryCosts, gt: &Mask) -> Result<UnaryCosts> {
    if gt.width() != unary.width || gt.height() != unary.height {
        return Err(CoreError::DimensionMismatch {
            expected: (unary.width, unary.height),
            got: (gt.width(), gt.height()),
        });
    }
    let per_pixel = 1.0 / unary.pixel_count() as f64;
    let mut cost0 = unary.cost0.clone();
    let mut cost1 = unary.cost1.clone();
    for r in 0..unary.height {
        for c in 0..unary.width {
            let i = r * unary.width + c;
            if gt.label(r, c) == 1 {
                cost0[i] -= per_pixel;
            } else {
                cost1[i] -= per_pixel;
            }
        }
    }
    UnaryCosts::new(unary.width, unary.height, cost0, cost1)
}

/// Maximum pixel count accepted by [`brute_force_minimize`].
pub const BRUTE_FORCE_PIXEL_LIMIT: usize = 20;

/// Exhaustive global minimum over all `2^n` labelings of a tiny grid.
///
/// Ties are broken toward the lexicographically smallest row-major label
/// string. Refuses grids above [`BRUTE_FORCE_PIXEL_LIMIT`] pixels.
pub fn brute_force_minimize(unary: &UnaryCosts, pairwise: &PairwiseCosts) -> Result<Mask> {
    pairwise.check_same_size(unary)?;
    let n = unary.pixel_count();
    if n > BRUTE_FORCE_PIXEL_LIMIT {
        return Err(CoreError::TooLarge {
            what: "brute-force instance",
            limit: BRUTE_FORCE_PIXEL_LIMIT,
            got: n,
        });
    }
    let mut best: Option<(f64, Mask)> = None;
    let mut labels = vec![0u8; n];
    for assignment in 0u32..(1u32 << n) {
        // Bit (n-1-i) holds pixel i, so counting order equals lexicographic
        // order of the label string and the first strict minimum wins ties.
        for (i, l) in labels.iter_mut().enumerate() {
            *l = ((assignment >> (n - 1 - i)) & 1) as u8;
        }
        let candidate = Mask::from_labels(unary.width, unary.height, labels.clone())?;
        let energy = labeling_energy(unary, pairwise, &candidate)?;
        let better = match &best {
            None => true,
            Some((e, _)) => energy < *e,
        };
        if better {
            best = Some((energy, candidate));
        }
    }
    Ok(best.expect("grids are non-empty").1)
}

/// Residual capacities below this threshold count as saturated.
const RESIDUAL_EPS: f64 = 1e-12;

/// Dinic max-flow on an explicit arc list with paired reverse arcs.
struct FlowGraph {
    /// Arc target and residual capacity; arc `i ^ 1` is the reverse of `i`.
    to: Vec<u32>,
    cap: Vec<f64>,
    /// Outgoing arc indices per node.
    adj: Vec<Vec<u32>>,
    level: Vec<u32>,
    iter: Vec<usize>,
}

const LEVEL_UNREACHED: u32 = u32::MAX;

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        FlowGraph {
            to: Vec::new(),
            cap: Vec::new(),
            adj: vec![Vec::new(); nodes],
            level: vec![LEVEL_UNREACHED; nodes],
            iter: vec![0; nodes],
        }
    }

    /// Directed arc `a -> b` with capacity `cap` plus a zero-capacity
    /// reverse. Zero-capacity forward arcs are skipped entirely.
    fn add_arc_pair(&mut self, a: usize, b: usize, cap: f64) {
        debug_assert!(cap >= 0.0);
        if cap <= 0.0 {
            return;
        }
        let idx = self.to.len() as u32;
        self.to.push(b as u32);
        self.cap.push(cap);
        self.to.push(a as u32);
        self.cap.push(0.0);
        self.adj[a].push(idx);
        self.adj[b].push(idx + 1);
    }

    /// Undirected link: capacity `cap` in both directions.
    fn add_symmetric(&mut self, a: usize, b: usize, cap: f64) {
        debug_assert!(cap >= 0.0);
        if cap <= 0.0 {
            return;
        }
        let idx = self.to.len() as u32;
        self.to.push(b as u32);
        self.cap.push(cap);
        self.to.push(a as u32);
        self.cap.push(cap);
        self.adj[a].push(idx);
        self.adj[b].push(idx + 1);
    }

    /// BFS level assignment on the residual graph; true if `t` is reached.
    fn bfs_levels(&mut self, s: usize, t: usize) -> bool {
        for l in self.level.iter_mut() {
            *l = LEVEL_UNREACHED;
        }
        let mut queue = alloc::collections::VecDeque::new();
        self.level[s] = 0;
        queue.push_back(s as u32);
        while let Some(u) = queue.pop_front() {
            let u = u as usize;
            for &a in &self.adj[u] {
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > RESIDUAL_EPS && self.level[v] == LEVEL_UNREACHED {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v as u32);
                }
            }
        }
        self.level[t] != LEVEL_UNREACHED
    }

    /// One blocking flow, iteratively (explicit path stack, no recursion).
    fn blocking_flow(&mut self, s: usize, t: usize) {
        for it in self.iter.iter_mut() {
            *it = 0;
        }
        let mut path: Vec<u32> = Vec::new();
        let mut node = s;
        loop {
            if node == t {
                // Augment along the path by its bottleneck, then retreat to
                // just before the first saturated arc.
                let mut bottleneck = f64::INFINITY;
                for &a in &path {
                    bottleneck = bottleneck.min(self.cap[a as usize]);
                }
                let mut first_saturated = 0;
                for (i, &a) in path.iter().enumerate() {
                    let a = a as usize;
                    let saturates = self.cap[a] - bottleneck <= RESIDUAL_EPS;
                    self.cap[a] -= bottleneck;
                    self.cap[a ^ 1] += bottleneck;
                    if saturates && first_saturated == 0 && i + 1 > first_saturated {
                        first_saturated = i + 1;
                    }
                }
                // `first_saturated` is 1 past the first saturated arc index;
                // the path up to (excluding) that arc remains usable.
                let keep = first_saturated.saturating_sub(1);
                node = if keep == 0 {
                    s
                } else {
                    self.to[path[keep - 1] as usize] as usize
                };
                path.truncate(keep);
                continue;
            }
            // Advance along an admissible arc if one remains.
            let mut advanced = false;
            while self.iter[node] < self.adj[node].len() {
                let a = self.adj[node][self.iter[node]];
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > RESIDUAL_EPS
                    && self.level[node] != LEVEL_UNREACHED
                    && self.level[v] == self.level[node] + 1
                {
                    path.push(a);
                    node = v;
                    advanced = true;
                    break;
                }
                self.iter[node] += 1;
            }
            if advanced {
                continue;
            }
            // Dead end: retreat, or finish the phase at the source.
            if node == s {
                break;
            }
            let last = path.pop().expect("non-source dead end has a path");
            let from = self.to[(last ^ 1) as usize] as usize;
            self.iter[from] += 1;
            node = from;
        }
    }

    fn max_flow(&mut self, s: usize, t: usize) {
        while self.bfs_levels(s, t) {
            self.blocking_flow(s, t);
        }
    }

    /// Nodes reachable from `s` in the residual graph (the source side of
    /// the minimum cut).
    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.to[a as usize] as usize;
                if self.cap[a as usize] > RESIDUAL_EPS && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{shape_distance, Layout};
    use crate::testkit;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unary<R: Rng>(rng: &mut R, width: usize, height: usize) -> UnaryCosts {
        let n = width * height;
        let cost0 = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cost1 = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        UnaryCosts::new(width, height, cost0, cost1).unwrap()
    }

    fn random_pairwise<R: Rng>(rng: &mut R, width: usize, height: usize) -> PairwiseCosts {
        let horizontal = (0..(width - 1) * height)
            .map(|_| rng.gen_range(0.0..0.5))
            .collect();
        let vertical = (0..width * (height - 1))
            .map(|_| rng.gen_range(0.0..0.5))
            .collect();
        PairwiseCosts::new(width, height, horizontal, vertical).unwrap()
    }

    #[test]
    fn unary_from_empty_hypothesis_has_zero_background_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = testkit::random_simplex_weights(&mut rng, Layout::Rgb);
        let h = Mask::zeros(4, 3).unwrap();
        let u = build_unary(&h, &w).unwrap();
        assert!(u.cost0_slice().iter().all(|&c| c == 0.0));
        // Interior pixels see all five offsets; the center of row 1 does.
        let inside_sum: f64 = (0..5).map(|k| w.inside(k)).sum();
        assert!((u.cost1(1, 1) - inside_sum).abs() <= 1e-15);
    }

    #[test]
    fn unary_from_full_hypothesis_has_zero_foreground_cost() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let w = testkit::random_simplex_weights(&mut rng, Layout::Rgb);
        let h = Mask::ones(4, 3).unwrap();
        let u = build_unary(&h, &w).unwrap();
        assert!(u.cost1_slice().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn selected_unary_costs_reproduce_the_shape_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let h = testkit::random_mask(&mut rng, 4, 4);
            let w = testkit::random_simplex_weights(&mut rng, Layout::Rgb);
            let u = build_unary(&h, &w).unwrap();
            let pw = PairwiseCosts::zero(4, 4).unwrap();
            for _ in 0..50 {
                let f = testkit::random_mask(&mut rng, 4, 4);
                let direct = shape_distance(&f, &h, &w).unwrap();
                let viaunary = labeling_energy(&u, &pw, &f).unwrap();
                assert!((direct - viaunary).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_pairwise_with_solid_hypothesis_returns_the_hypothesis() {
        // With equal inside and outside weights and no edge term, the
        // per-pixel argmin follows the hypothesis on solid regions. Build a
        // half-plane mask, where every pixel's neighborhood majority matches
        // its own label.
        let entries = alloc::vec![
            0.0, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1
        ];
        let w = WeightVector::from_entries(Layout::Rgb, entries).unwrap();
        let mut h = Mask::zeros(6, 6).unwrap();
        for r in 0..6 {
            for c in 0..3 {
                h.set_label(r, c, 1);
            }
        }
        let u = build_unary(&h, &w).unwrap();
        let pw = PairwiseCosts::zero(6, 6).unwrap();
        let f = minimize_energy(&u, &pw).unwrap();
        assert_eq!(f, h);
    }

    #[test]
    fn zero_pairwise_matches_per_pixel_argmin() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let u = random_unary(&mut rng, 5, 4);
            let pw = PairwiseCosts::zero(5, 4).unwrap();
            let f = minimize_energy(&u, &pw).unwrap();
            for r in 0..4 {
                for c in 0..5 {
                    let expect = if u.cost1(r, c) < u.cost0(r, c) { 1 } else { 0 };
                    // Ties cannot occur with continuous random costs.
                    assert_eq!(f.label(r, c), expect);
                }
            }
        }
    }

    #[test]
    fn zero_unary_returns_a_constant_labeling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = UnaryCosts::new(4, 4, vec![0.0; 16], vec![0.0; 16]).unwrap();
        let pw = random_pairwise(&mut rng, 4, 4);
        let f = minimize_energy(&u, &pw).unwrap();
        let first = f.label(0, 0);
        assert!(f.labels().iter().all(|&l| l == first));
        assert_eq!(labeling_energy(&u, &pw, &f).unwrap(), 0.0);
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let u = random_unary(&mut rng, 4, 3);
            let pw = random_pairwise(&mut rng, 4, 3);
            let fast = minimize_energy(&u, &pw).unwrap();
            let exact = brute_force_minimize(&u, &pw).unwrap();
            let e_fast = labeling_energy(&u, &pw, &fast).unwrap();
            let e_exact = labeling_energy(&u, &pw, &exact).unwrap();
            assert!(
                (e_fast - e_exact).abs() <= 1e-10,
                "fast {e_fast} vs exact {e_exact}"
            );
        }
    }

    #[test]
    fn brute_force_picks_cheaper_label_on_single_pixel() {
        let u = UnaryCosts::new(1, 1, vec![0.2], vec![0.1]).unwrap();
        let pw = PairwiseCosts::zero(1, 1).unwrap();
        let f = brute_force_minimize(&u, &pw).unwrap();
        assert_eq!(f.label(0, 0), 1);
    }

    #[test]
    fn brute_force_follows_unary_and_pairwise_agreement() {
        let u = UnaryCosts::new(2, 1, vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let pw = PairwiseCosts::new(2, 1, vec![5.0], vec![]).unwrap();
        let f = brute_force_minimize(&u, &pw).unwrap();
        assert_eq!(f.labels(), &[0, 0]);
    }

    #[test]
    fn brute_force_refuses_large_grids() {
        let u = UnaryCosts::new(7, 3, vec![0.0; 21], vec![0.0; 21]).unwrap();
        let pw = PairwiseCosts::zero(7, 3).unwrap();
        assert!(matches!(
            brute_force_minimize(&u, &pw),
            Err(CoreError::TooLarge { .. })
        ));
    }

    #[test]
    fn zero_weights_make_loss_augmentation_return_the_complement() {
        // With all-zero costs the only signal is the subtracted loss, which
        // is maximized by disagreeing everywhere.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let gt = testkit::random_mask(&mut rng, 4, 3);
        let u = UnaryCosts::new(4, 3, vec![0.0; 12], vec![0.0; 12]).unwrap();
        let pw = PairwiseCosts::zero(4, 3).unwrap();
        let f = loss_augmented_minimize(&u, &pw, &gt).unwrap();
        assert_eq!(f, gt.complement());
    }

    #[test]
    fn loss_augmented_matches_brute_force_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let u = random_unary(&mut rng, 4, 3);
            let pw = random_pairwise(&mut rng, 4, 3);
            let gt = testkit::random_mask(&mut rng, 4, 3);
            let fast = loss_augmented_minimize(&u, &pw, &gt).unwrap();

            // Independent objective: plain energy minus mean Hamming loss,
            // enumerated exhaustively.
            let n = 12usize;
            let mut best = f64::INFINITY;
            for assignment in 0u32..(1 << n) {
                let labels: Vec<u8> = (0..n)
                    .map(|i| ((assignment >> (n - 1 - i)) & 1) as u8)
                    .collect();
                let cand = Mask::from_labels(4, 3, labels).unwrap();
                let mut loss = 0.0;
                for i in 0..n {
                    if cand.labels()[i] != gt.labels()[i] {
                        loss += 1.0 / n as f64;
                    }
                }
                let val = labeling_energy(&u, &pw, &cand).unwrap() - loss;
                if val < best {
                    best = val;
                }
            }

            let mut fast_loss = 0.0;
            for i in 0..n {
                if fast.labels()[i] != gt.labels()[i] {
                    fast_loss += 1.0 / n as f64;
                }
            }
            let fast_val = labeling_energy(&u, &pw, &fast).unwrap() - fast_loss;
            assert!(
                (fast_val - best).abs() <= 1e-10,
                "fast {fast_val} vs best {best}"
            );
        }
    }

    #[test]
    fn dominant_weights_ignore_the_loss_term() {
        // Scale unary costs far above 1/|P|: the loss cannot flip any pixel,
        // so the loss-augmented argmin equals the plain argmin.
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let n = 12;
            let cost0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..50.0)).collect();
            let cost1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..50.0)).collect();
            let u = UnaryCosts::new(4, 3, cost0, cost1).unwrap();
            let pw = random_pairwise(&mut rng, 4, 3);
            let gt = testkit::random_mask(&mut rng, 4, 3);
            let plain = minimize_energy(&u, &pw).unwrap();
            let augmented = loss_augmented_minimize(&u, &pw, &gt).unwrap();
            let e_plain = labeling_energy(&u, &pw, &plain).unwrap();
            let e_aug = labeling_energy(&u, &pw, &augmented).unwrap();
            // Compare energies: both must be global minima of the plain
            // energy up to the bounded loss perturbation.
            assert!((e_plain - e_aug).abs() <= 1.0 + 1e-10);
            let exact = brute_force_minimize(&u, &pw).unwrap();
            let e_exact = labeling_energy(&u, &pw, &exact).unwrap();
            assert!((e_plain - e_exact).abs() <= 1e-10);
        }
    }

    #[test]
    fn scaling_all_costs_preserves_the_optimal_labeling_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = random_unary(&mut rng, 4, 3);
            let pw = random_pairwise(&mut rng, 4, 3);
            let lambda = rng.gen_range(0.1..10.0);
            let us = UnaryCosts::new(
                4,
                3,
                u.cost0_slice().iter().map(|c| c * lambda).collect(),
                u.cost1_slice().iter().map(|c| c * lambda).collect(),
            )
            .unwrap();
            let pws = PairwiseCosts::new(
                4,
                3,
                (0..3 * 3).map(|i| pw.horizontal(i / 3, i % 3) * lambda).collect(),
                (0..4 * 2).map(|i| pw.vertical(i / 4, i % 4) * lambda).collect(),
            )
            .unwrap();
            let f = minimize_energy(&u, &pw).unwrap();
            let fs = minimize_energy(&us, &pws).unwrap();
            let e = labeling_energy(&u, &pw, &f).unwrap();
            let es = labeling_energy(&u, &pw, &fs).unwrap();
            assert!((e - es).abs() <= 1e-10, "scaled argmin drifted: {e} vs {es}");
        }
    }
}
