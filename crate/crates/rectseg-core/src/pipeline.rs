//! End-to-end rectification of single frames and keyframe-to-sequence
//! mask propagation.
//!
//! A single-frame pass ([`rectify_frame`]) turns a classifier hypothesis
//! into a cleaned mask: detect image edges, build boundary-pair costs,
//! assemble per-pixel costs from the hypothesis and the inside/outside
//! weights, minimize the combined energy exactly, then optionally refit
//! the classifier on the cleaned mask and reclassify.
//!
//! Sequence propagation ([`propagate_sequence`]) chains this: the
//! keyframe mask seeds a foreground/background classifier fitted on the
//! current frame, the classifier predicts the next frame, rectification
//! cleans that prediction, and the cleaned mask becomes the next seed.
//! [`propagate_per_pair`] instead re-seeds every step from ground truth,
//! isolating single-step behavior from accumulated drift.

use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::classifiers::{
    fit_fb_model, predict_prob_map, reclassify_refine, threshold_map, ClassifierSource,
    DEFAULT_RECLASSIFY_ROUNDS, DEFAULT_THRESHOLD,
};
use crate::edges::{detect_edges, detect_edges_depth, EdgeConfig};
use crate::error::{CoreError, Result};
use crate::evaluation::{frame_metrics, FrameMetrics};
use crate::grid::{DepthMap, EdgeIndicator, FlowField, Mask, ProbabilityMap, RgbFrame};
use crate::inference::{build_unary, build_unary_soft, minimize_energy, PairwiseCosts};
use crate::model::{build_edge_weights, Layout, WeightVector};

/// Input modality: color only, or color plus depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rgb,
    Rgbd,
}

impl Mode {
    /// Weight layout this mode requires.
    pub fn layout(self) -> Layout {
        match self {
            Mode::Rgb => Layout::Rgb,
            Mode::Rgbd => Layout::Rgbd,
        }
    }
}

/// Classifier output driving the per-pixel costs: a thresholded mask or
/// the raw probability map.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    Binary(Mask),
    Soft(ProbabilityMap),
}

impl Hypothesis {
    fn dims(&self) -> (usize, usize) {
        match self {
            Hypothesis::Binary(m) => (m.width(), m.height()),
            Hypothesis::Soft(p) => (p.width(), p.height()),
        }
    }
}

/// Everything a rectification or propagation run needs besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Energy weights; layout must match `mode`.
    pub weights: WeightVector,
    /// Where per-pixel foreground probabilities come from.
    pub classifier: ClassifierSource,
    /// Foreground threshold applied to probability maps.
    pub probability_threshold: f64,
    /// Post-rectification refit-and-reclassify rounds.
    pub reclassify_rounds: usize,
    /// Input modality.
    pub mode: Mode,
    /// Drive per-pixel costs with the raw probability map instead of the
    /// thresholded mask.
    pub soft_hypothesis: bool,
    /// Edge-detection settings shared by color and depth channels.
    pub edges: EdgeConfig,
}

impl PipelineConfig {
    /// Defaults for the given weights: builtin classifier, 0.5 threshold,
    /// one reclassification round, hard hypothesis, default edges; mode
    /// follows the weight layout.
    pub fn new(weights: WeightVector) -> Self {
        let mode = match weights.layout() {
            Layout::Rgb => Mode::Rgb,
            Layout::Rgbd => Mode::Rgbd,
        };
        PipelineConfig {
            weights,
            classifier: ClassifierSource::default(),
            probability_threshold: DEFAULT_THRESHOLD,
            reclassify_rounds: DEFAULT_RECLASSIFY_ROUNDS,
            mode,
            soft_hypothesis: false,
            edges: EdgeConfig::default(),
        }
    }

    /// Checks the weight layout against the mode and the threshold and
    /// edge settings against their domains.
    pub fn validate(&self) -> Result<()> {
        if self.weights.layout() != self.mode.layout() {
            return Err(CoreError::LayoutMismatch {
                expected: self.mode.layout().tag(),
                got: self.weights.layout().tag(),
            });
        }
        if !(self.probability_threshold.is_finite()
            && (0.0..1.0).contains(&self.probability_threshold)
            && self.probability_threshold > 0.0)
        {
            return Err(CoreError::InvalidValue {
                what: "probability_threshold",
                value: self.probability_threshold,
            });
        }
        self.edges.validate()
    }
}

/// One frame of an in-memory sequence with its optional per-frame assets.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFrame {
    /// Color image (always required).
    pub frame: RgbFrame,
    /// Reference mask; required by per-pair propagation and for metrics.
    pub ground_truth: Option<Mask>,
    /// Depth image; required in depth mode.
    pub depth: Option<DepthMap>,
    /// Backward flow from this frame to the previous one, used to warp
    /// the seed mask before classifier fitting.
    pub flow: Option<FlowField>,
    /// Precomputed foreground probabilities; required by external-map
    /// classifier sources.
    pub probability: Option<ProbabilityMap>,
    /// Precomputed edge flags overriding detection on the color image.
    pub edges: Option<EdgeIndicator>,
}

impl SequenceFrame {
    /// Frame with only a color image.
    pub fn new(frame: RgbFrame) -> Self {
        SequenceFrame {
            frame,
            ground_truth: None,
            depth: None,
            flow: None,
            probability: None,
            edges: None,
        }
    }
}

/// Output for one propagated (non-keyframe) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    /// Index of the frame within the sequence (keyframe is 0).
    pub frame_index: usize,
    /// Thresholded classifier output before rectification.
    pub hypothesis: Mask,
    /// Final mask after rectification and reclassification.
    pub rectified: Mask,
    /// Metrics against ground truth, when ground truth is present.
    pub metrics: Option<FrameMetrics>,
}

/// Ordered per-frame records for every non-keyframe frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropagationResult {
    pub records: Vec<FrameRecord>,
}

impl PropagationResult {
    /// Boundary-deviation series in frame order (entries where defined).
    pub fn deviation_series(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.metrics.as_ref().and_then(|m| m.boundary_deviation))
            .collect()
    }
}

/// Moves each seed-mask label back along the flow vectors (nearest
/// source pixel; out-of-grid sources become background).
pub fn warp_mask(mask: &Mask, flow: &FlowField) -> Result<Mask> {
    if mask.width() != flow.width() || mask.height() != flow.height() {
        return Err(CoreError::DimensionMismatch {
            expected: (mask.width(), mask.height()),
            got: (flow.width(), flow.height()),
        });
    }
    let labels = (0..mask.width() * mask.height())
        .map(|i| {
            let (r, c) = (i / mask.width(), i % mask.width());
            let [dr, dc] = flow.vector(r, c);
            let sr = (r as f64 + dr as f64).round() as i64;
            let sc = (c as f64 + dc as f64).round() as i64;
            mask.label_at(sr, sc).unwrap_or(0)
        })
        .collect();
    Mask::from_labels(mask.width(), mask.height(), labels)
}

/// Cleans a classifier hypothesis on one frame; see the module docs.
///
/// `depth` is consulted only in depth mode, where it is required.
/// `precomputed_edges` skips color-edge detection when supplied.
pub fn rectify_frame(
    frame: &RgbFrame,
    depth: Option<&DepthMap>,
    hypothesis: &Hypothesis,
    config: &PipelineConfig,
    precomputed_edges: Option<&EdgeIndicator>,
) -> Result<Mask> {
    config.validate()?;
    rectify_frame_at(frame, depth, hypothesis, config, precomputed_edges, 0)
}

/// [`rectify_frame`] with a frame index for asset-error reporting.
fn rectify_frame_at(
    frame: &RgbFrame,
    depth: Option<&DepthMap>,
    hypothesis: &Hypothesis,
    config: &PipelineConfig,
    precomputed_edges: Option<&EdgeIndicator>,
    frame_index: usize,
) -> Result<Mask> {
    let (hw, hh) = hypothesis.dims();
    if (frame.width(), frame.height()) != (hw, hh) {
        return Err(CoreError::DimensionMismatch {
            expected: (frame.width(), frame.height()),
            got: (hw, hh),
        });
    }

    let rgb_indicator = match precomputed_edges {
        Some(e) => e.clone(),
        None => detect_edges(frame, &config.edges)?,
    };
    let rgb_field = build_edge_weights(&rgb_indicator)?;

    let pairwise = match config.mode {
        Mode::Rgb => PairwiseCosts::from_edge_weights(&rgb_field, config.weights.edge_weight())?,
        Mode::Rgbd => {
            let depth = depth.ok_or(CoreError::MissingAsset {
                frame: frame_index,
                asset: "depth map",
            })?;
            depth.check_same_size_mask(&Mask::ones(frame.width(), frame.height())?)?;
            let depth_indicator = detect_edges_depth(depth, &config.edges)?;
            let depth_field = build_edge_weights(&depth_indicator)?;
            let w_depth = config
                .weights
                .edge_weight_depth()
                .expect("validated layout has a depth channel");
            PairwiseCosts::from_dual_edge_weights(
                &rgb_field,
                config.weights.edge_weight(),
                &depth_field,
                w_depth,
            )?
        }
    };

    let unary = match hypothesis {
        Hypothesis::Binary(h) => build_unary(h, &config.weights)?,
        Hypothesis::Soft(h) => build_unary_soft(h, &config.weights)?,
    };
    let minimized = minimize_energy(&unary, &pairwise)?;
    let outcome = reclassify_refine(frame, &minimized, &config.classifier, config.reclassify_rounds)?;
    Ok(outcome.mask)
}

/// How each propagation step picks its seed mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SeedPolicy {
    /// Previous rectified output (accumulates drift, as deployed).
    Chained,
    /// Ground truth of the current frame (isolated single steps).
    PerPair,
}

/// Propagates `keyframe_mask` through the sequence, chaining rectified
/// output into the next step's seed. A one-frame sequence yields an
/// empty result.
pub fn propagate_sequence(
    frames: &[SequenceFrame],
    keyframe_mask: &Mask,
    config: &PipelineConfig,
) -> Result<PropagationResult> {
    propagate(frames, keyframe_mask, config, SeedPolicy::Chained)
}

/// Like [`propagate_sequence`] but seeds every step with the current
/// frame's ground truth, which must be present.
pub fn propagate_per_pair(
    frames: &[SequenceFrame],
    keyframe_mask: &Mask,
    config: &PipelineConfig,
) -> Result<PropagationResult> {
    propagate(frames, keyframe_mask, config, SeedPolicy::PerPair)
}

fn propagate(
    frames: &[SequenceFrame],
    keyframe_mask: &Mask,
    config: &PipelineConfig,
    policy: SeedPolicy,
) -> Result<PropagationResult> {
    config.validate()?;
    let first = frames.first().ok_or(CoreError::EmptyInput("sequence frames"))?;
    first.frame.check_same_size_mask(keyframe_mask)?;

    let mut records = Vec::with_capacity(frames.len().saturating_sub(1));
    let mut seed = keyframe_mask.clone();
    for t in 0..frames.len().saturating_sub(1) {
        let source = &frames[t];
        let target = &frames[t + 1];

        let seed_now = match policy {
            SeedPolicy::Chained => seed,
            SeedPolicy::PerPair => source
                .ground_truth
                .clone()
                .ok_or(CoreError::MissingAsset {
                    frame: t,
                    asset: "ground-truth mask",
                })?,
        };
        // Align the seed with the upcoming frame before fitting.
        let seed_for_fit = match &target.flow {
            Some(flow) => warp_mask(&seed_now, flow)?,
            None => seed_now,
        };

        let probability = match &config.classifier {
            ClassifierSource::BuiltinMixture { components } => {
                let model = fit_fb_model(&source.frame, &seed_for_fit, *components)?;
                predict_prob_map(&model, &target.frame)?
            }
            ClassifierSource::ExternalMap => {
                target.probability.clone().ok_or(CoreError::MissingAsset {
                    frame: t + 1,
                    asset: "probability map",
                })?
            }
        };
        let hypothesis_mask = threshold_map(&probability, config.probability_threshold)?;
        let hypothesis = if config.soft_hypothesis {
            Hypothesis::Soft(probability)
        } else {
            Hypothesis::Binary(hypothesis_mask.clone())
        };

        let rectified = rectify_frame_at(
            &target.frame,
            target.depth.as_ref(),
            &hypothesis,
            config,
            target.edges.as_ref(),
            t + 1,
        )?;

        let metrics = match &target.ground_truth {
            Some(gt) => Some(frame_metrics(&rectified, gt)?),
            None => None,
        };
        records.push(FrameRecord {
            frame_index: t + 1,
            hypothesis: hypothesis_mask,
            rectified: rectified.clone(),
            metrics,
        });
        seed = rectified;
    }
    Ok(PropagationResult { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::pixel_error;
    use crate::synthdata::{generate_sequence, ColorSpec, SceneSpec, ShapeKind, DEFAULT_TEXTURE_AMPLITUDE};
    use alloc::vec;

    fn easy_scene(seed: u64, velocity: (f64, f64), frames: usize) -> SceneSpec {
        SceneSpec {
            width: 48,
            height: 48,
            shape: ShapeKind::Disk { radius: 10.0 },
            start: (20.0, 20.0),
            velocity,
            rotation_per_frame: 0.0,
            foreground: ColorSpec {
                mean: [0.85, 0.15, 0.15],
                sigma: 0.02,
            },
            background: ColorSpec {
                mean: [0.15, 0.25, 0.8],
                sigma: 0.02,
            },
            min_color_separation: 0.3,
            texture: false,
            texture_amplitude: DEFAULT_TEXTURE_AMPLITUDE,
            frames,
            seed,
        }
    }

    fn to_sequence(scene: &SceneSpec) -> Vec<SequenceFrame> {
        generate_sequence(scene)
            .unwrap()
            .into_iter()
            .map(|f| SequenceFrame {
                ground_truth: Some(f.ground_truth),
                ..SequenceFrame::new(f.frame)
            })
            .collect()
    }

    fn spread_weights(layout: Layout, edge: f64) -> WeightVector {
        // Flat data weights with a chosen edge share.
        let n = layout.len();
        let data = (1.0 - edge * layout.edge_channels() as f64)
            / (n - layout.edge_channels()) as f64;
        let entries: Vec<f64> = (0..n)
            .map(|i| {
                if i < layout.edge_channels() {
                    edge
                } else {
                    data
                }
            })
            .collect();
        WeightVector::from_entries(layout, entries).unwrap()
    }

    /// Shapes whose rasterization has no single-pixel protrusions keep a
    /// perfect hypothesis perfect: a lone tip has three background
    /// 4-neighbors, so the neighborhood vote itself removes it, which is
    /// why the suite uses generic fractional radii.
    #[test]
    fn ground_truth_hypothesis_stays_perfect_on_clean_scenes() {
        let mut regressions = 0;
        let total = 20;
        for seed in 0..total {
            let mut scene = easy_scene(100 + seed, (0.0, 0.0), 1);
            scene.shape = ShapeKind::Disk {
                radius: 8.3 + 0.11 * seed as f64,
            };
            let frames = generate_sequence(&scene).unwrap();
            let gt = &frames[0].ground_truth;
            let config = PipelineConfig {
                reclassify_rounds: 0,
                ..PipelineConfig::new(WeightVector::uniform(Layout::Rgb))
            };
            let out = rectify_frame(
                &frames[0].frame,
                None,
                &Hypothesis::Binary(gt.clone()),
                &config,
                None,
            )
            .unwrap();
            let in_err = 0.0;
            let out_err = pixel_error(&out, gt).unwrap();
            if out_err > in_err {
                regressions += 1;
            }
        }
        assert!(
            regressions <= total / 20,
            "{regressions}/{total} scenes got worse from a perfect hypothesis"
        );
    }

    #[test]
    fn tiny_edge_weight_reproduces_the_hypothesis() {
        let scene = easy_scene(7, (0.0, 0.0), 1);
        let frames = generate_sequence(&scene).unwrap();
        let h = frames[0].ground_truth.clone();
        let config = PipelineConfig {
            reclassify_rounds: 0,
            ..PipelineConfig::new(spread_weights(Layout::Rgb, 1e-6))
        };
        let out = rectify_frame(
            &frames[0].frame,
            None,
            &Hypothesis::Binary(h.clone()),
            &config,
            None,
        )
        .unwrap();
        let hamming = out
            .labels()
            .iter()
            .zip(h.labels())
            .filter(|(a, b)| a != b)
            .count();
        assert!(
            (hamming as f64) <= 0.01 * h.labels().len() as f64,
            "hamming {hamming}"
        );
    }

    #[test]
    fn zero_data_weights_collapse_to_a_constant_mask() {
        let scene = easy_scene(9, (0.0, 0.0), 1);
        let frames = generate_sequence(&scene).unwrap();
        let h = frames[0].ground_truth.clone();
        let entries = {
            let mut e = vec![0.0; 11];
            e[0] = 1.0;
            e
        };
        let config = PipelineConfig {
            reclassify_rounds: 0,
            ..PipelineConfig::new(
                WeightVector::from_entries(Layout::Rgb, entries).unwrap(),
            )
        };
        let out = rectify_frame(
            &frames[0].frame,
            None,
            &Hypothesis::Binary(h),
            &config,
            None,
        )
        .unwrap();
        let fg = out.foreground_count();
        assert!(
            fg == 0 || fg == out.labels().len(),
            "expected a constant mask, got {fg} foreground pixels"
        );
    }

    #[test]
    fn one_frame_sequence_yields_an_empty_result() {
        let frames = to_sequence(&easy_scene(11, (0.0, 0.0), 1));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
        let result = propagate_sequence(&frames, &keyframe, &config).unwrap();
        assert!(result.records.is_empty());
    }

    #[test]
    fn static_easy_scene_propagates_almost_perfectly() {
        let frames = to_sequence(&easy_scene(13, (0.0, 0.0), 10));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
        let result = propagate_sequence(&frames, &keyframe, &config).unwrap();
        assert_eq!(result.records.len(), 9);
        for (i, rec) in result.records.iter().enumerate() {
            assert_eq!(rec.frame_index, i + 1);
            let m = rec.metrics.as_ref().unwrap();
            assert!(
                m.fpr + m.fnr < 0.005,
                "frame {}: error {}",
                rec.frame_index,
                m.fpr + m.fnr
            );
        }
    }

    /// A brightness-only class difference plus shared texture lets bright
    /// background patches absorb into the refitted color model, so chained
    /// propagation drifts instead of self-correcting and the per-offset
    /// deviation curve rises.
    #[test]
    fn moving_scenes_accumulate_error_with_nonnegative_trend() {
        let mut offset_sums = vec![0.0f64; 9];
        let sequences = 12;
        for seed in 0..sequences {
            let scene = SceneSpec {
                width: 64,
                height: 64,
                shape: ShapeKind::Disk { radius: 11.3 },
                start: (24.0, 22.0),
                velocity: (1.0, 0.9),
                rotation_per_frame: 0.0,
                foreground: ColorSpec {
                    mean: [0.7, 0.55, 0.5],
                    sigma: 0.04,
                },
                background: ColorSpec {
                    mean: [0.45, 0.3, 0.25],
                    sigma: 0.04,
                },
                min_color_separation: 0.2,
                texture: true,
                texture_amplitude: 0.12,
                frames: 10,
                seed: 40 + seed,
            };
            let frames = to_sequence(&scene);
            let keyframe = frames[0].ground_truth.clone().unwrap();
            let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
            let result = propagate_sequence(&frames, &keyframe, &config).unwrap();
            for (i, rec) in result.records.iter().enumerate() {
                let m = rec.metrics.as_ref().unwrap();
                offset_sums[i] += m.boundary_deviation.unwrap_or(0.0);
            }
        }
        let means: Vec<f64> = offset_sums
            .iter()
            .map(|s| s / sequences as f64)
            .collect();
        // Least-squares slope of deviation against frame offset.
        let n = means.len() as f64;
        let x_mean = (means.len() - 1) as f64 / 2.0;
        let y_mean = means.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, y) in means.iter().enumerate() {
            num += (i as f64 - x_mean) * (y - y_mean);
            den += (i as f64 - x_mean) * (i as f64 - x_mean);
        }
        let slope = num / den;
        assert!(slope >= -1e-9, "deviation trend decreased: slope {slope}, means {means:?}");
    }

    #[test]
    fn propagation_is_deterministic() {
        let frames = to_sequence(&easy_scene(17, (0.8, 0.0), 6));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
        let a = propagate_sequence(&frames, &keyframe, &config).unwrap();
        let b = propagate_sequence(&frames, &keyframe, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn per_pair_mode_requires_and_uses_ground_truth() {
        let mut frames = to_sequence(&easy_scene(19, (1.0, 0.0), 5));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
        let result = propagate_per_pair(&frames, &keyframe, &config).unwrap();
        assert_eq!(result.records.len(), 4);
        for rec in &result.records {
            let m = rec.metrics.as_ref().unwrap();
            assert!(m.fpr + m.fnr < 0.01);
        }
        frames[2].ground_truth = None;
        let err = propagate_per_pair(&frames, &keyframe, &config).unwrap_err();
        assert_eq!(
            err,
            CoreError::MissingAsset {
                frame: 2,
                asset: "ground-truth mask"
            }
        );
    }

    #[test]
    fn depth_mode_without_depth_names_the_missing_asset() {
        let frames = to_sequence(&easy_scene(21, (0.0, 0.0), 3));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgbd));
        let err = propagate_sequence(&frames, &keyframe, &config).unwrap_err();
        assert_eq!(
            err,
            CoreError::MissingAsset {
                frame: 1,
                asset: "depth map"
            }
        );
    }

    #[test]
    fn external_source_without_probability_names_the_missing_asset() {
        let frames = to_sequence(&easy_scene(23, (0.0, 0.0), 3));
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig {
            classifier: ClassifierSource::ExternalMap,
            ..PipelineConfig::new(WeightVector::uniform(Layout::Rgb))
        };
        let err = propagate_sequence(&frames, &keyframe, &config).unwrap_err();
        assert_eq!(
            err,
            CoreError::MissingAsset {
                frame: 1,
                asset: "probability map"
            }
        );
    }

    #[test]
    fn layout_mode_mismatch_is_rejected() {
        let config = PipelineConfig {
            mode: Mode::Rgbd,
            ..PipelineConfig::new(WeightVector::uniform(Layout::Rgb))
        };
        assert!(matches!(
            config.validate(),
            Err(CoreError::LayoutMismatch { .. })
        ));
    }

    #[test]
    fn duplicated_depth_collapses_to_the_color_only_result() {
        let scene = easy_scene(25, (0.0, 0.0), 1);
        let frames = generate_sequence(&scene).unwrap();
        let frame = &frames[0].frame;
        let h = frames[0].ground_truth.clone();
        // Depth plane identical in edge structure to the color image.
        let depth = DepthMap::from_values(
            frame.width(),
            frame.height(),
            frame.luminance().data().to_vec(),
        )
        .unwrap();

        let alpha = 0.05;
        let data: Vec<f64> = (0..10).map(|k| (1.0 - 2.0 * alpha) * (k as f64 + 1.0) / 55.0).collect();
        let mut rgbd_entries = vec![alpha, alpha];
        rgbd_entries.extend(&data);
        let mut rgb_entries = vec![2.0 * alpha];
        rgb_entries.extend(&data);

        let rgbd_config = PipelineConfig {
            reclassify_rounds: 1,
            ..PipelineConfig::new(
                WeightVector::from_entries(Layout::Rgbd, rgbd_entries).unwrap(),
            )
        };
        let rgb_config = PipelineConfig {
            reclassify_rounds: 1,
            ..PipelineConfig::new(
                WeightVector::from_entries(Layout::Rgb, rgb_entries).unwrap(),
            )
        };
        let rgbd_out = rectify_frame(
            frame,
            Some(&depth),
            &Hypothesis::Binary(h.clone()),
            &rgbd_config,
            None,
        )
        .unwrap();
        let rgb_out =
            rectify_frame(frame, None, &Hypothesis::Binary(h), &rgb_config, None).unwrap();
        assert_eq!(rgbd_out, rgb_out);
    }

    #[test]
    fn soft_hypothesis_with_confident_probabilities_matches_binary() {
        let scene = easy_scene(27, (0.0, 0.0), 1);
        let frames = generate_sequence(&scene).unwrap();
        let gt = &frames[0].ground_truth;
        let values: Vec<f64> = gt
            .labels()
            .iter()
            .map(|&l| if l == 1 { 0.99 } else { 0.01 })
            .collect();
        let prob =
            ProbabilityMap::from_values(gt.width(), gt.height(), values).unwrap();
        let config = PipelineConfig {
            reclassify_rounds: 0,
            ..PipelineConfig::new(WeightVector::uniform(Layout::Rgb))
        };
        let soft = rectify_frame(
            &frames[0].frame,
            None,
            &Hypothesis::Soft(prob),
            &config,
            None,
        )
        .unwrap();
        let hard = rectify_frame(
            &frames[0].frame,
            None,
            &Hypothesis::Binary(gt.clone()),
            &config,
            None,
        )
        .unwrap();
        assert_eq!(soft, hard);
    }

    #[test]
    fn warp_moves_labels_along_the_flow() {
        let scene_a = easy_scene(29, (0.0, 0.0), 1);
        let mut scene_b = scene_a.clone();
        scene_b.start = (scene_a.start.0 + 2.0, scene_a.start.1);
        let gt_a = scene_a.mask_at(0).unwrap();
        let gt_b = scene_b.mask_at(0).unwrap();
        // Target pixels look back (-2, 0) to their source two rows up.
        let flow = FlowField::from_vectors(
            gt_a.width(),
            gt_a.height(),
            vec![[-2.0, 0.0]; gt_a.labels().len()],
        )
        .unwrap();
        assert_eq!(warp_mask(&gt_a, &flow).unwrap(), gt_b);
    }

    #[test]
    fn flow_assisted_propagation_handles_fast_motion() {
        let scene = easy_scene(31, (3.0, 0.0), 4);
        let rendered = generate_sequence(&scene).unwrap();
        let mut frames: Vec<SequenceFrame> = rendered
            .into_iter()
            .map(|f| SequenceFrame {
                ground_truth: Some(f.ground_truth),
                ..SequenceFrame::new(f.frame)
            })
            .collect();
        for f in frames.iter_mut().skip(1) {
            f.flow = Some(
                FlowField::from_vectors(
                    scene.width,
                    scene.height,
                    vec![[-3.0, 0.0]; scene.width * scene.height],
                )
                .unwrap(),
            );
        }
        let keyframe = frames[0].ground_truth.clone().unwrap();
        let config = PipelineConfig::new(WeightVector::uniform(Layout::Rgb));
        let result = propagate_sequence(&frames, &keyframe, &config).unwrap();
        for rec in &result.records {
            let m = rec.metrics.as_ref().unwrap();
            assert!(m.fpr + m.fnr < 0.01, "error {}", m.fpr + m.fnr);
        }
    }
}
