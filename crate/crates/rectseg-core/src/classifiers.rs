//! Foreground/background color classification.
//!
//! The hypothesis mask consumed by rectification comes either from an
//! externally supplied probability map or from the builtin classifier: a
//! pair of diagonal-covariance Gaussian mixtures over RGB, one per class,
//! fitted by expectation-maximization from a labeled frame. Prediction
//! scores each pixel with the likelihood ratio under uniform class priors,
//! deliberately ignoring region areas so the larger region gains no extra
//! pull.
//!
//! [`reclassify_refine`] closes the loop that counteracts shrinking masks:
//! after rectification, the mixtures are refitted on the rectified labeling
//! of the same frame and the frame is re-scored, letting color evidence
//! recover structures the smoothness term cut off.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CoreError, Result};
use crate::grid::{Mask, ProbabilityMap, RgbFrame};

/// Default mixture size per class.
pub const DEFAULT_COMPONENTS: usize = 5;
/// Lower bound applied to every per-channel variance.
pub const VARIANCE_FLOOR: f64 = 1e-4;
/// Expectation-maximization iteration cap.
pub const EM_MAX_ITERATIONS: usize = 50;
/// Relative log-likelihood improvement below which fitting stops.
pub const EM_RELATIVE_TOLERANCE: f64 = 1e-6;
/// Default cut applied when binarizing probability maps.
pub const DEFAULT_THRESHOLD: f64 = 0.5;
/// Default number of refit-and-rescore rounds after rectification.
pub const DEFAULT_RECLASSIFY_ROUNDS: usize = 1;

const KMEANS_ITERATIONS: usize = 10;
const FIT_SEED: u64 = 0x5eed_0c1a;

/// One diagonal Gaussian with its mixing weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    /// Mixing weight within the class (weights sum to 1).
    pub weight: f64,
    /// Per-channel mean in [0, 1] color space.
    pub mean: [f64; 3],
    /// Per-channel variance, at least [`VARIANCE_FLOOR`].
    pub variance: [f64; 3],
}

impl MixtureComponent {
    /// Log density of `x` under this component (without the mixing
    /// weight).
    fn log_density(&self, x: [f64; 3]) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            let d = x[c] - self.mean[c];
            acc += -(0.5f64) * ((2.0 * core::f64::consts::PI * self.variance[c]).ln()
                + d * d / self.variance[c]);
        }
        acc
    }
}

/// Mixture of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMixture {
    components: Vec<MixtureComponent>,
}

impl ClassMixture {
    /// Validates and wraps a component list.
    pub fn from_components(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(CoreError::EmptyInput("mixture components"));
        }
        let mut sum = 0.0;
        for comp in &components {
            if !(comp.weight.is_finite() && comp.weight >= 0.0) {
                return Err(CoreError::InvalidValue {
                    what: "mixing weight",
                    value: comp.weight,
                });
            }
            sum += comp.weight;
            for c in 0..3 {
                if !comp.mean[c].is_finite() {
                    return Err(CoreError::NonFinite("component mean"));
                }
                if !(comp.variance[c].is_finite() && comp.variance[c] >= VARIANCE_FLOOR) {
                    return Err(CoreError::InvalidValue {
                        what: "component variance",
                        value: comp.variance[c],
                    });
                }
            }
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidValue {
                what: "mixing weight sum",
                value: sum,
            });
        }
        Ok(Self { components })
    }

    /// Components in fitting order.
    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Log of the mixture density at `x` (finite for any finite input).
    pub fn log_likelihood(&self, x: [f64; 3]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        let mut terms: Vec<f64> = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let t = if comp.weight > 0.0 {
                comp.weight.ln() + comp.log_density(x)
            } else {
                f64::NEG_INFINITY
            };
            best = best.max(t);
            terms.push(t);
        }
        if !best.is_finite() {
            return f64::NEG_INFINITY;
        }
        let mut acc = 0.0;
        for t in terms {
            acc += (t - best).exp();
        }
        best + acc.ln()
    }
}

/// Foreground and background mixtures fitted from one labeled frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMixtureModel {
    /// Mixture of the labeled-1 pixels.
    pub foreground: ClassMixture,
    /// Mixture of the labeled-0 pixels.
    pub background: ClassMixture,
}

/// Where hypothesis maps come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassifierSource {
    /// Fit the builtin mixtures with this many components per class.
    BuiltinMixture {
        /// Components per class.
        components: usize,
    },
    /// Probability maps are supplied externally and cannot be refitted.
    ExternalMap,
}

impl Default for ClassifierSource {
    fn default() -> Self {
        ClassifierSource::BuiltinMixture {
            components: DEFAULT_COMPONENTS,
        }
    }
}

/// Fits the two class mixtures from a labeled frame.
///
/// Each class is fitted independently: seeded k-means++ centers, a few
/// center-refinement sweeps, then expectation-maximization until the
/// likelihood stalls or the iteration cap. A class with fewer pixels than
/// requested components gets a correspondingly smaller mixture; an empty
/// class is an error.
pub fn fit_fb_model(frame: &RgbFrame, mask: &Mask, components: usize) -> Result<ColorMixtureModel> {
    if components == 0 {
        return Err(CoreError::InvalidValue {
            what: "component count",
            value: 0.0,
        });
    }
    frame.check_same_size_mask(mask)?;
    let mut fg: Vec<[f64; 3]> = Vec::new();
    let mut bg: Vec<[f64; 3]> = Vec::new();
    for r in 0..frame.height() {
        for c in 0..frame.width() {
            if mask.label(r, c) == 1 {
                fg.push(frame.pixel(r, c));
            } else {
                bg.push(frame.pixel(r, c));
            }
        }
    }
    if fg.is_empty() {
        return Err(CoreError::EmptyClass("foreground"));
    }
    if bg.is_empty() {
        return Err(CoreError::EmptyClass("background"));
    }
    let (foreground, _) = fit_class_mixture(&fg, components.min(fg.len()), FIT_SEED)?;
    let (background, _) = fit_class_mixture(&bg, components.min(bg.len()), FIT_SEED ^ 1)?;
    Ok(ColorMixtureModel {
        foreground,
        background,
    })
}

/// Fits one class mixture and returns the per-iteration log-likelihood
/// trace alongside it (the trace is non-decreasing up to rounding).
pub fn fit_class_mixture(
    pixels: &[[f64; 3]],
    components: usize,
    seed: u64,
) -> Result<(ClassMixture, Vec<f64>)> {
    if pixels.is_empty() {
        return Err(CoreError::EmptyInput("class pixels"));
    }
    if components == 0 || components > pixels.len() {
        return Err(CoreError::InvalidValue {
            what: "component count",
            value: components as f64,
        });
    }
    let k = components;
    let n = pixels.len();

    let mut centers = kmeans_pp_centers(pixels, k, seed);
    lloyd_refine(pixels, &mut centers);

    // Initialize the mixture from the hard assignment to the centers.
    let mut comps: Vec<MixtureComponent> = centers
        .iter()
        .map(|&mean| MixtureComponent {
            weight: 0.0,
            mean,
            variance: [VARIANCE_FLOOR; 3],
        })
        .collect();
    {
        let mut counts = vec![0usize; k];
        let mut sq = vec![[0.0f64; 3]; k];
        for &x in pixels {
            let j = nearest_center(&centers, x);
            counts[j] += 1;
            for c in 0..3 {
                let d = x[c] - centers[j][c];
                sq[j][c] += d * d;
            }
        }
        for j in 0..k {
            comps[j].weight = (counts[j].max(1)) as f64;
            for c in 0..3 {
                let var = if counts[j] > 0 {
                    sq[j][c] / counts[j] as f64
                } else {
                    VARIANCE_FLOOR
                };
                comps[j].variance[c] = var.max(VARIANCE_FLOOR);
            }
        }
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        for comp in comps.iter_mut() {
            comp.weight /= total;
        }
    }

    let mut trace: Vec<f64> = Vec::new();
    let mut resp = vec![0.0f64; n * k];
    let mut last_ll = f64::NEG_INFINITY;
    for _iter in 0..EM_MAX_ITERATIONS {
        // Expectation: responsibilities in the log domain.
        let mut ll = 0.0;
        for (i, &x) in pixels.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for (j, comp) in comps.iter().enumerate() {
                let t = if comp.weight > 0.0 {
                    comp.weight.ln() + comp.log_density(x)
                } else {
                    f64::NEG_INFINITY
                };
                resp[i * k + j] = t;
                best = best.max(t);
            }
            let mut denom = 0.0;
            for j in 0..k {
                let e = (resp[i * k + j] - best).exp();
                resp[i * k + j] = e;
                denom += e;
            }
            for j in 0..k {
                resp[i * k + j] /= denom;
            }
            ll += best + denom.ln();
        }
        trace.push(ll);

        // Maximization: weighted means and variances, floored.
        for j in 0..k {
            let mut mass = 0.0;
            let mut mean = [0.0f64; 3];
            for (i, &x) in pixels.iter().enumerate() {
                let r = resp[i * k + j];
                mass += r;
                for c in 0..3 {
                    mean[c] += r * x[c];
                }
            }
            if mass > 1e-12 {
                for m in mean.iter_mut() {
                    *m /= mass;
                }
                let mut var = [0.0f64; 3];
                for (i, &x) in pixels.iter().enumerate() {
                    let r = resp[i * k + j];
                    for c in 0..3 {
                        let d = x[c] - mean[c];
                        var[c] += r * d * d;
                    }
                }
                for v in var.iter_mut() {
                    *v = (*v / mass).max(VARIANCE_FLOOR);
                }
                comps[j] = MixtureComponent {
                    weight: mass / n as f64,
                    mean,
                    variance: var,
                };
            } else {
                comps[j].weight = mass / n as f64;
            }
        }
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        for comp in comps.iter_mut() {
            comp.weight /= total;
        }

        let improvement = ll - last_ll;
        if last_ll.is_finite() && improvement / ll.abs().max(1.0) < EM_RELATIVE_TOLERANCE {
            break;
        }
        last_ll = ll;
    }

    Ok((ClassMixture::from_components(comps)?, trace))
}

/// Seeded k-means++ center selection.
fn kmeans_pp_centers(pixels: &[[f64; 3]], k: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<[f64; 3]> = Vec::with_capacity(k);
    centers.push(pixels[rng.gen_range(0..pixels.len())]);
    let mut dist2: Vec<f64> = pixels
        .iter()
        .map(|&x| sq_dist(x, centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = dist2.iter().sum();
        let next = if total <= 0.0 {
            // All remaining pixels coincide with a center; any choice ties.
            rng.gen_range(0..pixels.len())
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = pixels.len() - 1;
            for (i, &d) in dist2.iter().enumerate() {
                target -= d;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        };
        let center = pixels[next];
        centers.push(center);
        for (d, &x) in dist2.iter_mut().zip(pixels) {
            *d = d.min(sq_dist(x, center));
        }
    }
    centers
}

/// A few rounds of center refinement before EM takes over.
fn lloyd_refine(pixels: &[[f64; 3]], centers: &mut [[f64; 3]]) {
    let k = centers.len();
    for _ in 0..KMEANS_ITERATIONS {
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for &x in pixels {
            let j = nearest_center(centers, x);
            counts[j] += 1;
            for c in 0..3 {
                sums[j][c] += x[c];
            }
        }
        let mut moved = false;
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            for c in 0..3 {
                let m = sums[j][c] / counts[j] as f64;
                if m != centers[j][c] {
                    moved = true;
                }
                centers[j][c] = m;
            }
        }
        if !moved {
            break;
        }
    }
}

fn nearest_center(centers: &[[f64; 3]], x: [f64; 3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &c) in centers.iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

fn sq_dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let mut acc = 0.0;
    for c in 0..3 {
        let d = a[c] - b[c];
        acc += d * d;
    }
    acc
}

/// Scores every pixel with the foreground likelihood ratio
/// `L_fg / (L_fg + L_bg)` under uniform class priors; non-finite ratios
/// collapse to 0.5.
pub fn predict_prob_map(model: &ColorMixtureModel, frame: &RgbFrame) -> Result<ProbabilityMap> {
    let mut values = Vec::with_capacity(frame.width() * frame.height());
    for r in 0..frame.height() {
        for c in 0..frame.width() {
            let x = frame.pixel(r, c);
            let lf = model.foreground.log_likelihood(x);
            let lb = model.background.log_likelihood(x);
            let h = if lf.is_finite() && lb.is_finite() {
                // Logistic of the log ratio equals the normalized ratio.
                let v = 1.0 / (1.0 + (lb - lf).exp());
                if v.is_finite() {
                    v
                } else {
                    0.5
                }
            } else if lf.is_finite() {
                1.0
            } else if lb.is_finite() {
                0.0
            } else {
                0.5
            };
            values.push(h.clamp(0.0, 1.0));
        }
    }
    ProbabilityMap::from_values(frame.width(), frame.height(), values)
}

/// Binarizes a probability map: label 1 iff value >= threshold.
pub fn threshold_map(prob: &ProbabilityMap, threshold: f64) -> Result<Mask> {
    if !(threshold.is_finite() && threshold > 0.0 && threshold < 1.0) {
        return Err(CoreError::InvalidValue {
            what: "probability threshold",
            value: threshold,
        });
    }
    let labels = prob
        .values()
        .iter()
        .map(|&v| u8::from(v >= threshold))
        .collect();
    Mask::from_labels(prob.width(), prob.height(), labels)
}

/// Result of the post-rectification reclassification loop.
#[derive(Debug, Clone)]
pub struct ReclassifyOutcome {
    /// Final mask after the rounds that ran.
    pub mask: Mask,
    /// True when at least one refit-and-rescore round ran.
    pub retrained: bool,
    /// Rounds actually executed.
    pub rounds_run: usize,
}

/// Refits the classifier on the rectified labeling and re-scores the same
/// frame, `rounds` times.
///
/// External-map sources cannot be refitted, so the input is returned
/// unchanged with `retrained = false` (callers surface the warning). The
/// loop also stops early when a round would refit from a single-class
/// mask.
pub fn reclassify_refine(
    frame: &RgbFrame,
    rectified: &Mask,
    source: &ClassifierSource,
    rounds: usize,
) -> Result<ReclassifyOutcome> {
    frame.check_same_size_mask(rectified)?;
    let components = match source {
        ClassifierSource::ExternalMap => {
            return Ok(ReclassifyOutcome {
                mask: rectified.clone(),
                retrained: false,
                rounds_run: 0,
            });
        }
        ClassifierSource::BuiltinMixture { components } => *components,
    };
    let mut mask = rectified.clone();
    let mut rounds_run = 0;
    for _ in 0..rounds {
        let fg_count = mask.foreground_count();
        if fg_count == 0 || fg_count == mask.labels().len() {
            break;
        }
        let model = fit_fb_model(frame, &mask, components)?;
        let prob = predict_prob_map(&model, frame)?;
        mask = threshold_map(&prob, DEFAULT_THRESHOLD)?;
        rounds_run += 1;
    }
    Ok(ReclassifyOutcome {
        retrained: rounds_run > 0,
        mask,
        rounds_run,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_color_frame(width: usize, height: usize, split_col: usize) -> (RgbFrame, Mask) {
        // Foreground: red-ish left block; background: blue-ish right block.
        let mut pixels = Vec::with_capacity(width * height);
        let mut labels = Vec::with_capacity(width * height);
        for r in 0..height {
            for c in 0..width {
                let jitter = ((r * 31 + c * 17) % 7) as f64 * 0.004;
                if c < split_col {
                    pixels.push([0.9 - jitter, 0.05 + jitter, 0.05]);
                    labels.push(1);
                } else {
                    pixels.push([0.05 + jitter, 0.05, 0.9 - jitter]);
                    labels.push(0);
                }
            }
        }
        (
            RgbFrame::from_pixels(width, height, pixels).unwrap(),
            Mask::from_labels(width, height, labels).unwrap(),
        )
    }

    #[test]
    fn planted_colors_are_recovered_by_fitting() {
        let (frame, mask) = two_color_frame(20, 10, 8);
        let model = fit_fb_model(&frame, &mask, 2).unwrap();
        for comp in model.foreground.components() {
            assert!((comp.mean[0] - 0.9).abs() < 0.05, "red {:?}", comp.mean);
            assert!(comp.mean[2] < 0.15, "not blue {:?}", comp.mean);
        }
        for comp in model.background.components() {
            assert!((comp.mean[2] - 0.9).abs() < 0.05, "blue {:?}", comp.mean);
        }
    }

    #[test]
    fn single_class_mask_is_rejected() {
        let (frame, _) = two_color_frame(6, 4, 3);
        let all_fg = Mask::ones(6, 4).unwrap();
        assert!(matches!(
            fit_fb_model(&frame, &all_fg, 2),
            Err(CoreError::EmptyClass("background"))
        ));
    }

    #[test]
    fn fitting_is_deterministic() {
        let (frame, mask) = two_color_frame(15, 9, 6);
        let a = fit_fb_model(&frame, &mask, 3).unwrap();
        let b = fit_fb_model(&frame, &mask, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn component_count_shrinks_to_the_class_size() {
        let (frame, _) = two_color_frame(5, 1, 2);
        let mask = Mask::from_labels(5, 1, vec![1, 1, 0, 0, 0]).unwrap();
        let model = fit_fb_model(&frame, &mask, 4).unwrap();
        assert_eq!(model.foreground.components().len(), 2);
        assert_eq!(model.background.components().len(), 3);
    }

    #[test]
    fn em_log_likelihood_never_decreases() {
        let pixels: Vec<[f64; 3]> = (0..200)
            .map(|i| {
                let t = i as f64 / 200.0;
                let b = ((i * 37) % 11) as f64 * 0.01;
                [0.2 + 0.6 * t, 0.5 - 0.3 * t + b, 0.1 + b]
            })
            .collect();
        let (_, trace) = fit_class_mixture(&pixels, 4, 99).unwrap();
        assert!(trace.len() >= 2);
        for pair in trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-9,
                "log-likelihood regressed: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }

    #[test]
    fn prediction_is_confident_at_a_foreground_mean() {
        let (frame, mask) = two_color_frame(20, 10, 8);
        let model = fit_fb_model(&frame, &mask, 2).unwrap();
        let probe_mean = model.foreground.components()[0].mean;
        let probe = RgbFrame::filled(1, 1, probe_mean).unwrap();
        let h = predict_prob_map(&model, &probe).unwrap();
        assert!(h.value(0, 0) > 0.99, "h = {}", h.value(0, 0));
    }

    #[test]
    fn identical_class_models_predict_exactly_half() {
        let comp = MixtureComponent {
            weight: 1.0,
            mean: [0.3, 0.4, 0.5],
            variance: [0.01, 0.01, 0.01],
        };
        let class = ClassMixture::from_components(vec![comp]).unwrap();
        let model = ColorMixtureModel {
            foreground: class.clone(),
            background: class,
        };
        let frame = RgbFrame::filled(4, 3, [0.9, 0.1, 0.2]).unwrap();
        let h = predict_prob_map(&model, &frame).unwrap();
        for &v in h.values() {
            assert!((v - 0.5).abs() <= 1e-12);
        }
    }

    /// Independent density-ratio oracle: direct (non-log) mixture density
    /// evaluation, valid while densities stay in normal float range.
    fn direct_ratio(model: &ColorMixtureModel, x: [f64; 3]) -> f64 {
        let density = |class: &ClassMixture| -> f64 {
            class
                .components()
                .iter()
                .map(|comp| {
                    let mut d = comp.weight;
                    for c in 0..3 {
                        let diff = x[c] - comp.mean[c];
                        d *= (-0.5 * diff * diff / comp.variance[c]).exp()
                            / (2.0 * core::f64::consts::PI * comp.variance[c]).sqrt();
                    }
                    d
                })
                .sum()
        };
        let df = density(&model.foreground);
        let db = density(&model.background);
        df / (df + db)
    }

    #[test]
    fn prediction_matches_a_direct_density_ratio_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let (frame, mask) = two_color_frame(20, 10, 8);
        let model = fit_fb_model(&frame, &mask, 2).unwrap();
        // Probes stay near one class mean so the linear-space oracle does
        // not underflow to 0/0; the far class may underflow to an exact
        // zero, which both sides resolve to a saturated ratio.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut pixels = Vec::new();
        for i in 0..100 {
            let base = if i % 2 == 0 {
                model.foreground.components()[i / 2 % 2].mean
            } else {
                model.background.components()[i / 2 % 2].mean
            };
            let mut p = [0.0; 3];
            for c in 0..3 {
                p[c] = (base[c] + rng.gen_range(-0.1..0.1)).clamp(0.0, 1.0);
            }
            pixels.push(p);
        }
        let probe = RgbFrame::from_pixels(10, 10, pixels).unwrap();
        let h = predict_prob_map(&model, &probe).unwrap();
        for r in 0..10 {
            for c in 0..10 {
                let expect = direct_ratio(&model, probe.pixel(r, c));
                assert!(
                    (h.value(r, c) - expect).abs() <= 1e-10,
                    "({r},{c}): {} vs {expect}",
                    h.value(r, c)
                );
            }
        }
    }

    #[test]
    fn threshold_uses_greater_or_equal() {
        let half = ProbabilityMap::filled(3, 2, 0.5).unwrap();
        let mask = threshold_map(&half, 0.5).unwrap();
        assert_eq!(mask.foreground_count(), 6);
        let below = ProbabilityMap::filled(3, 2, 0.4999).unwrap();
        let mask = threshold_map(&below, 0.5).unwrap();
        assert_eq!(mask.foreground_count(), 0);
    }

    #[test]
    fn raising_the_threshold_never_adds_foreground() {
        let values: Vec<f64> = (0..24).map(|i| (i as f64 * 0.83) % 1.0).collect();
        let prob = ProbabilityMap::from_values(6, 4, values).unwrap();
        let mut last = usize::MAX;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let count = threshold_map(&prob, t).unwrap().foreground_count();
            assert!(count <= last);
            last = count;
        }
    }

    #[test]
    fn zero_rounds_returns_the_input_unchanged() {
        let (frame, mask) = two_color_frame(10, 6, 4);
        let out = reclassify_refine(&frame, &mask, &ClassifierSource::default(), 0).unwrap();
        assert_eq!(out.mask.labels(), mask.labels());
        assert!(!out.retrained);
    }

    #[test]
    fn external_source_is_a_no_op() {
        let (frame, mask) = two_color_frame(10, 6, 4);
        let out = reclassify_refine(&frame, &mask, &ClassifierSource::ExternalMap, 3).unwrap();
        assert_eq!(out.mask.labels(), mask.labels());
        assert!(!out.retrained);
        assert_eq!(out.rounds_run, 0);
    }

    /// A thin protrusion sharing the foreground color but eroded out of
    /// the mask must come back once the classifier is refitted, because
    /// color evidence is global.
    #[test]
    fn reclassification_recovers_an_eroded_protrusion() {
        let (w, h) = (20, 12);
        let mut pixels = Vec::with_capacity(w * h);
        let mut full = Vec::with_capacity(w * h);
        let mut eroded = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                let in_body = (2..10).contains(&r) && (2..8).contains(&c);
                let in_protrusion = r == 5 && (8..18).contains(&c);
                let fg = in_body || in_protrusion;
                let jitter = ((r * 13 + c * 7) % 5) as f64 * 0.005;
                if fg {
                    pixels.push([0.85 + jitter, 0.1, 0.1]);
                } else {
                    pixels.push([0.1, 0.1, 0.85 + jitter]);
                }
                full.push(u8::from(fg));
                eroded.push(u8::from(in_body));
            }
        }
        let frame = RgbFrame::from_pixels(w, h, pixels).unwrap();
        let eroded = Mask::from_labels(w, h, eroded).unwrap();
        let out = reclassify_refine(&frame, &eroded, &ClassifierSource::default(), 1).unwrap();
        assert!(out.retrained);
        let mut recovered = 0;
        let mut protrusion = 0;
        for r in 0..h {
            for c in 0..w {
                if r == 5 && (8..18).contains(&c) {
                    protrusion += 1;
                    if out.mask.label(r, c) == 1 {
                        recovered += 1;
                    }
                }
            }
        }
        assert!(
            recovered * 2 > protrusion,
            "recovered {recovered} of {protrusion}"
        );
    }
}
