//! Synthetic scene generation and controlled error injection.
//!
//! [`generate_sequence`] renders short image sequences of a single moving
//! shape over a noisy background, with exact ground-truth masks;
//! [`inject_bias`] corrupts a mask with independently tunable
//! spurious-foreground and missing-foreground rates concentrated in a
//! band around the true boundary, mimicking where real per-pixel
//! classifiers actually fail. Everything is a pure function of the seed,
//! so identical specs reproduce bit-for-bit.

use alloc::vec;
use alloc::vec::Vec;

#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CoreError, Result};
use crate::evaluation::{boundary_pixels, distance_transform};
use crate::grid::{Mask, RgbFrame};

/// Default additive brightness amplitude of the low-frequency texture
/// field.
pub const DEFAULT_TEXTURE_AMPLITUDE: f64 = 0.15;
/// Lattice spacing, in pixels, of the texture field.
pub const TEXTURE_CELL: usize = 16;
/// Default width of the corruption band around the true boundary.
pub const DEFAULT_BAND_WIDTH: f64 = 3.0;

/// Geometry of the moving object.
#[derive(Debug, Clone, PartialEq)]
pub enum ShapeKind {
    /// Filled disk of the given radius.
    Disk { radius: f64 },
    /// Filled axis-aligned rectangle (rotates if the scene says so).
    Rectangle { half_width: f64, half_height: f64 },
    /// Star polygon with `points` spikes alternating between two radii.
    StarPolygon {
        points: usize,
        outer_radius: f64,
        inner_radius: f64,
    },
}

impl ShapeKind {
    /// Radius of the smallest origin-centered disk containing the shape
    /// under every rotation.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            ShapeKind::Disk { radius } => radius,
            ShapeKind::Rectangle {
                half_width,
                half_height,
            } => (half_width * half_width + half_height * half_height).sqrt(),
            ShapeKind::StarPolygon { outer_radius, .. } => outer_radius,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ShapeKind::Disk { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(CoreError::InvalidScene("disk radius must be positive"));
                }
            }
            ShapeKind::Rectangle {
                half_width,
                half_height,
            } => {
                if !(half_width.is_finite() && half_width > 0.0)
                    || !(half_height.is_finite() && half_height > 0.0)
                {
                    return Err(CoreError::InvalidScene(
                        "rectangle half-extents must be positive",
                    ));
                }
            }
            ShapeKind::StarPolygon {
                points,
                outer_radius,
                inner_radius,
            } => {
                if points < 3 {
                    return Err(CoreError::InvalidScene("star needs at least 3 points"));
                }
                if !(inner_radius.is_finite() && outer_radius.is_finite())
                    || inner_radius <= 0.0
                    || inner_radius >= outer_radius
                {
                    return Err(CoreError::InvalidScene(
                        "star radii must satisfy 0 < inner < outer",
                    ));
                }
            }
        }
        Ok(())
    }

    /// Containment test in object-local coordinates, after the object's
    /// rotation has already been undone.
    fn contains_local(&self, dr: f64, dc: f64) -> bool {
        match *self {
            ShapeKind::Disk { radius } => dr * dr + dc * dc <= radius * radius,
            ShapeKind::Rectangle {
                half_width,
                half_height,
            } => dc.abs() <= half_width && dr.abs() <= half_height,
            ShapeKind::StarPolygon {
                points,
                outer_radius,
                inner_radius,
            } => {
                let n = 2 * points;
                let mut inside = false;
                let step = core::f64::consts::PI / points as f64;
                let vertex = |i: usize| -> (f64, f64) {
                    let angle = step * i as f64;
                    let radius = if i % 2 == 0 {
                        outer_radius
                    } else {
                        inner_radius
                    };
                    (radius * angle.sin(), radius * angle.cos())
                };
                let mut prev = vertex(n - 1);
                for i in 0..n {
                    let cur = vertex(i);
                    let (yi, xi) = cur;
                    let (yj, xj) = prev;
                    if (yi > dr) != (yj > dr) {
                        let x_cross = xj + (dr - yj) / (yi - yj) * (xi - xj);
                        if dc < x_cross {
                            inside = !inside;
                        }
                    }
                    prev = cur;
                }
                inside
            }
        }
    }
}

/// Per-class color model: mean RGB plus per-channel Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorSpec {
    /// Channel means in `[0, 1]`.
    pub mean: [f64; 3],
    /// Per-channel noise standard deviation.
    pub sigma: f64,
}

impl ColorSpec {
    fn validate(&self, which: &'static str) -> Result<()> {
        for &m in &self.mean {
            if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
                return Err(CoreError::InvalidScene(which));
            }
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(CoreError::InvalidScene(which));
        }
        Ok(())
    }
}

/// Full description of a synthetic sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    /// Canvas width in pixels.
    pub width: usize,
    /// Canvas height in pixels.
    pub height: usize,
    /// Object geometry.
    pub shape: ShapeKind,
    /// Object center at the first frame, as (row, col).
    pub start: (f64, f64),
    /// Per-frame translation of the center, as (rows, cols).
    pub velocity: (f64, f64),
    /// Per-frame rotation in radians (ignored by disks).
    pub rotation_per_frame: f64,
    /// Object color model.
    pub foreground: ColorSpec,
    /// Background color model.
    pub background: ColorSpec,
    /// Required Euclidean separation between the two color means.
    pub min_color_separation: f64,
    /// Adds a static low-frequency brightness field to the whole canvas,
    /// creating background patches that resemble the object.
    pub texture: bool,
    /// Peak absolute brightness shift of that field.
    pub texture_amplitude: f64,
    /// Number of frames.
    pub frames: usize,
    /// Seed controlling all randomness.
    pub seed: u64,
}

impl SceneSpec {
    /// Checks geometry, colors, and that the object stays fully inside
    /// the canvas (with one background pixel to spare) on every frame.
    pub fn validate(&self) -> Result<()> {
        if self.width < 4 || self.height < 4 {
            return Err(CoreError::InvalidScene("canvas must be at least 4x4"));
        }
        if self.frames == 0 {
            return Err(CoreError::InvalidScene("sequence needs at least one frame"));
        }
        self.shape.validate()?;
        for v in [
            self.start.0,
            self.start.1,
            self.velocity.0,
            self.velocity.1,
            self.rotation_per_frame,
        ] {
            if !v.is_finite() {
                return Err(CoreError::InvalidScene("motion parameters must be finite"));
            }
        }
        self.foreground.validate("foreground color out of range")?;
        self.background.validate("background color out of range")?;
        if !(self.min_color_separation.is_finite() && self.min_color_separation >= 0.0) {
            return Err(CoreError::InvalidScene("color separation must be nonnegative"));
        }
        if !(self.texture_amplitude.is_finite() && self.texture_amplitude > 0.0) {
            return Err(CoreError::InvalidScene("texture amplitude must be positive"));
        }
        let sep: f64 = self
            .foreground
            .mean
            .iter()
            .zip(&self.background.mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if sep < self.min_color_separation {
            return Err(CoreError::InvalidScene(
                "color means closer than the required separation",
            ));
        }
        let r = self.shape.bounding_radius();
        for t in 0..self.frames {
            let (cr, cc) = self.center_at(t);
            if cr - r < 1.0
                || cc - r < 1.0
                || cr + r > self.height as f64 - 2.0
                || cc + r > self.width as f64 - 2.0
            {
                return Err(CoreError::InvalidScene("object leaves the canvas"));
            }
        }
        Ok(())
    }

    /// Object center at frame `t`.
    pub fn center_at(&self, t: usize) -> (f64, f64) {
        (
            self.start.0 + self.velocity.0 * t as f64,
            self.start.1 + self.velocity.1 * t as f64,
        )
    }

    /// Exact ground-truth mask at frame `t` (pixel centers inside the
    /// transformed shape).
    pub fn mask_at(&self, t: usize) -> Result<Mask> {
        self.validate()?;
        Ok(self.mask_at_unchecked(t))
    }

    fn mask_at_unchecked(&self, t: usize) -> Mask {
        let (cr, cc) = self.center_at(t);
        let theta = self.rotation_per_frame * t as f64;
        let (sin_t, cos_t) = (theta.sin(), theta.cos());
        let labels = (0..self.width * self.height)
            .map(|i| {
                let r = (i / self.width) as f64 - cr;
                let c = (i % self.width) as f64 - cc;
                // Undo the object's rotation before the containment test.
                let lr = cos_t * r + sin_t * c;
                let lc = -sin_t * r + cos_t * c;
                u8::from(self.shape.contains_local(lr, lc))
            })
            .collect();
        Mask::from_labels(self.width, self.height, labels)
            .expect("validated canvas is non-empty")
    }
}

/// One rendered frame with its exact ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFrame {
    /// Rendered color image.
    pub frame: RgbFrame,
    /// Exact object mask.
    pub ground_truth: Mask,
}

/// Renders the whole sequence described by `spec`.
///
/// Deterministic: the same spec (including seed) yields bit-identical
/// frames and masks.
pub fn generate_sequence(spec: &SceneSpec) -> Result<Vec<SyntheticFrame>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let texture = if spec.texture {
        Some(TextureField::sample(
            &mut rng,
            spec.width,
            spec.height,
            spec.texture_amplitude,
        ))
    } else {
        None
    };
    let noise = Normal::new(0.0, 1.0).expect("unit normal is valid");
    let mut frames = Vec::with_capacity(spec.frames);
    for t in 0..spec.frames {
        let mask = spec.mask_at_unchecked(t);
        let mut pixels = Vec::with_capacity(spec.width * spec.height);
        for (i, &label) in mask.labels().iter().enumerate() {
            let color = if label == 1 {
                &spec.foreground
            } else {
                &spec.background
            };
            let tex = texture.as_ref().map_or(0.0, |f| {
                f.value(i / spec.width, i % spec.width)
            });
            let mut px = [0.0f64; 3];
            for (ch, out) in px.iter_mut().enumerate() {
                let v = color.mean[ch] + tex + color.sigma * noise.sample(&mut rng);
                *out = v.clamp(0.0, 1.0);
            }
            pixels.push(px);
        }
        let frame = RgbFrame::from_pixels(spec.width, spec.height, pixels)
            .expect("pixel buffer sized to canvas");
        frames.push(SyntheticFrame {
            frame,
            ground_truth: mask,
        });
    }
    Ok(frames)
}

/// Static low-frequency brightness field: bilinear interpolation of a
/// coarse random lattice.
struct TextureField {
    lattice_width: usize,
    values: Vec<f64>,
}

impl TextureField {
    fn sample<R: Rng>(rng: &mut R, width: usize, height: usize, amplitude: f64) -> Self {
        let lw = width / TEXTURE_CELL + 2;
        let lh = height / TEXTURE_CELL + 2;
        let values = (0..lw * lh)
            .map(|_| rng.gen_range(-amplitude..amplitude))
            .collect();
        TextureField {
            lattice_width: lw,
            values,
        }
    }

    fn value(&self, row: usize, col: usize) -> f64 {
        let fr = row as f64 / TEXTURE_CELL as f64;
        let fc = col as f64 / TEXTURE_CELL as f64;
        let r0 = fr.floor() as usize;
        let c0 = fc.floor() as usize;
        let (wr, wc) = (fr - r0 as f64, fc - c0 as f64);
        let at = |r: usize, c: usize| self.values[r * self.lattice_width + c];
        let top = at(r0, c0) * (1.0 - wc) + at(r0, c0 + 1) * wc;
        let bottom = at(r0 + 1, c0) * (1.0 - wc) + at(r0 + 1, c0 + 1) * wc;
        top * (1.0 - wr) + bottom * wr
    }
}

/// Controlled corruption of a mask.
///
/// `fp_rate` and `fn_rate` are per-pixel flip probabilities applied only
/// inside a band of `band_width` pixels (Euclidean) around the true
/// boundary — background pixels there turn foreground with probability
/// `fp_rate`, foreground pixels turn background with probability
/// `fn_rate`. `speckle_rate` additionally flips isolated pixels anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasSpec {
    /// In-band background-to-foreground flip probability.
    pub fp_rate: f64,
    /// In-band foreground-to-background flip probability.
    pub fn_rate: f64,
    /// Band half-width around the true boundary, in pixels.
    pub band_width: f64,
    /// Whole-canvas isolated flip probability.
    pub speckle_rate: f64,
    /// Seed controlling all randomness.
    pub seed: u64,
}

impl Default for BiasSpec {
    fn default() -> Self {
        BiasSpec {
            fp_rate: 0.0,
            fn_rate: 0.0,
            band_width: DEFAULT_BAND_WIDTH,
            speckle_rate: 0.0,
            seed: 0,
        }
    }
}

impl BiasSpec {
    /// Checks rate and band domains.
    pub fn validate(&self) -> Result<()> {
        for (value, what) in [
            (self.fp_rate, "fp_rate"),
            (self.fn_rate, "fn_rate"),
            (self.speckle_rate, "speckle_rate"),
        ] {
            if !(value.is_finite() && (0.0..0.5).contains(&value)) {
                return Err(CoreError::InvalidValue { what, value });
            }
        }
        if !(self.band_width.is_finite() && self.band_width >= 1.0) {
            return Err(CoreError::InvalidValue {
                what: "band_width",
                value: self.band_width,
            });
        }
        Ok(())
    }
}

/// Flips labels of `gt` according to `spec`; see [`BiasSpec`].
///
/// With zero speckle rate the output differs from `gt` only inside the
/// boundary band. Deterministic under `spec.seed`.
pub fn inject_bias(gt: &Mask, spec: &BiasSpec) -> Result<Mask> {
    spec.validate()?;
    let (w, h) = (gt.width(), gt.height());
    let boundary = boundary_pixels(gt);
    let band: Vec<bool> = if boundary.is_empty() {
        vec![false; w * h]
    } else {
        let mut seeds = vec![false; w * h];
        for (r, c) in boundary {
            seeds[r * w + c] = true;
        }
        distance_transform(w, h, &seeds)?
            .into_iter()
            .map(|d| d <= spec.band_width)
            .collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let labels = gt
        .labels()
        .iter()
        .zip(&band)
        .map(|(&g, &in_band)| {
            // Two draws per pixel regardless of band membership keep the
            // stream aligned across masks with the same size.
            let u_band = rng.gen::<f64>();
            let u_speckle = rng.gen::<f64>();
            let mut label = g;
            if in_band {
                if g == 0 && u_band < spec.fp_rate {
                    label = 1;
                } else if g == 1 && u_band < spec.fn_rate {
                    label = 0;
                }
            }
            if u_speckle < spec.speckle_rate {
                label = 1 - label;
            }
            label
        })
        .collect();
    Mask::from_labels(w, h, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::fpr_fnr;

    fn disk_scene(radius: f64, velocity: (f64, f64), frames: usize) -> SceneSpec {
        SceneSpec {
            width: 64,
            height: 64,
            shape: ShapeKind::Disk { radius },
            start: (28.0, 28.0),
            velocity,
            rotation_per_frame: 0.0,
            foreground: ColorSpec {
                mean: [0.8, 0.2, 0.2],
                sigma: 0.03,
            },
            background: ColorSpec {
                mean: [0.2, 0.3, 0.7],
                sigma: 0.03,
            },
            min_color_separation: 0.2,
            texture: false,
            texture_amplitude: DEFAULT_TEXTURE_AMPLITUDE,
            frames,
            seed: 7,
        }
    }

    fn centroid(mask: &Mask) -> (f64, f64) {
        let mut sum = (0.0, 0.0);
        let mut count = 0.0;
        for r in 0..mask.height() {
            for c in 0..mask.width() {
                if mask.label(r, c) == 1 {
                    sum.0 += r as f64;
                    sum.1 += c as f64;
                    count += 1.0;
                }
            }
        }
        (sum.0 / count, sum.1 / count)
    }

    #[test]
    fn zero_velocity_keeps_every_mask_identical() {
        let frames = generate_sequence(&disk_scene(8.0, (0.0, 0.0), 5)).unwrap();
        for f in &frames[1..] {
            assert_eq!(f.ground_truth, frames[0].ground_truth);
        }
    }

    #[test]
    fn unit_velocity_advances_the_centroid_by_one_per_frame() {
        let frames = generate_sequence(&disk_scene(5.0, (1.0, 0.0), 8)).unwrap();
        for pair in frames.windows(2) {
            let a = centroid(&pair[0].ground_truth);
            let b = centroid(&pair[1].ground_truth);
            assert!((b.0 - a.0 - 1.0).abs() <= 0.1, "row step {}", b.0 - a.0);
            assert!((b.1 - a.1).abs() <= 0.1, "col step {}", b.1 - a.1);
        }
    }

    #[test]
    fn same_seed_reproduces_bitwise_identical_frames() {
        let spec = disk_scene(7.0, (0.5, 0.25), 4);
        let a = generate_sequence(&spec).unwrap();
        let b = generate_sequence(&spec).unwrap();
        assert_eq!(a, b);
        let mut other = spec.clone();
        other.seed ^= 1;
        let c = generate_sequence(&other).unwrap();
        assert_ne!(a[0].frame, c[0].frame);
    }

    #[test]
    fn object_leaving_the_canvas_is_rejected() {
        let spec = disk_scene(8.0, (6.0, 0.0), 8);
        assert_eq!(
            spec.validate().unwrap_err(),
            CoreError::InvalidScene("object leaves the canvas")
        );
    }

    #[test]
    fn too_similar_colors_are_rejected() {
        let mut spec = disk_scene(8.0, (0.0, 0.0), 2);
        spec.background = spec.foreground.clone();
        assert!(matches!(
            spec.validate().unwrap_err(),
            CoreError::InvalidScene(_)
        ));
    }

    #[test]
    fn rotating_star_changes_between_frames_and_stays_inside() {
        let mut spec = disk_scene(1.0, (0.0, 0.0), 4);
        spec.shape = ShapeKind::StarPolygon {
            points: 5,
            outer_radius: 14.0,
            inner_radius: 6.0,
        };
        spec.start = (31.0, 31.0);
        spec.rotation_per_frame = 0.25;
        let frames = generate_sequence(&spec).unwrap();
        let first = &frames[0].ground_truth;
        let fg = first.labels().iter().filter(|&&l| l == 1).count();
        assert!(fg > 100, "star rasterized to {fg} pixels");
        assert_ne!(frames[1].ground_truth, *first);
        // One background pixel of margin on every frame.
        for f in &frames {
            for c in 0..spec.width {
                assert_eq!(f.ground_truth.label(0, c), 0);
                assert_eq!(f.ground_truth.label(spec.height - 1, c), 0);
            }
        }
    }

    #[test]
    fn rectangles_rasterize_their_exact_area() {
        let mut spec = disk_scene(1.0, (0.0, 0.0), 1);
        spec.shape = ShapeKind::Rectangle {
            half_width: 10.0,
            half_height: 6.0,
        };
        spec.start = (30.0, 30.0);
        let frames = generate_sequence(&spec).unwrap();
        let fg = frames[0]
            .ground_truth
            .labels()
            .iter()
            .filter(|&&l| l == 1)
            .count();
        assert_eq!(fg, 21 * 13);
    }

    #[test]
    fn textured_scenes_differ_from_plain_ones_in_the_background() {
        let mut spec = disk_scene(8.0, (0.0, 0.0), 1);
        spec.texture = true;
        let plain = generate_sequence(&disk_scene(8.0, (0.0, 0.0), 1)).unwrap();
        let textured = generate_sequence(&spec).unwrap();
        assert_eq!(
            plain[0].ground_truth, textured[0].ground_truth,
            "texture must not affect geometry"
        );
        assert_ne!(plain[0].frame, textured[0].frame);
    }

    fn big_disk_mask() -> Mask {
        let spec = SceneSpec {
            width: 128,
            height: 128,
            shape: ShapeKind::Disk { radius: 50.0 },
            start: (63.5, 63.5),
            ..disk_scene(1.0, (0.0, 0.0), 1)
        };
        spec.mask_at(0).unwrap()
    }

    #[test]
    fn zero_rates_return_the_mask_unchanged() {
        let gt = big_disk_mask();
        let out = inject_bias(&gt, &BiasSpec::default()).unwrap();
        assert_eq!(out, gt);
    }

    #[test]
    fn pure_miss_injection_never_adds_foreground() {
        let gt = big_disk_mask();
        let spec = BiasSpec {
            fn_rate: 0.2,
            seed: 3,
            ..BiasSpec::default()
        };
        let out = inject_bias(&gt, &spec).unwrap();
        let mut removed = 0;
        for (&o, &g) in out.labels().iter().zip(gt.labels()) {
            assert!(o <= g, "new foreground appeared");
            removed += usize::from(o < g);
        }
        assert!(removed > 0);
    }

    #[test]
    fn ten_to_one_rates_yield_a_six_to_fourteen_ratio() {
        let spec100 = SceneSpec {
            width: 100,
            height: 100,
            shape: ShapeKind::Disk { radius: 35.0 },
            start: (49.5, 49.5),
            ..disk_scene(1.0, (0.0, 0.0), 1)
        };
        let gt = spec100.mask_at(0).unwrap();
        // The miss count per draw is small (mean ~7), so pool several
        // independent corruption draws to damp sampling noise.
        let mut fpr_sum = 0.0;
        let mut fnr_sum = 0.0;
        for seed in 0..8 {
            let bias = BiasSpec {
                fp_rate: 0.1,
                fn_rate: 0.01,
                seed,
                ..BiasSpec::default()
            };
            let out = inject_bias(&gt, &bias).unwrap();
            let (fpr, fnr) = fpr_fnr(&out, &gt).unwrap();
            fpr_sum += fpr;
            fnr_sum += fnr;
        }
        assert!(fnr_sum > 0.0);
        let ratio = fpr_sum / fnr_sum;
        assert!((6.0..=14.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn in_band_rates_land_within_twenty_percent_of_targets() {
        let gt = big_disk_mask();
        assert!(gt.labels().len() >= 10_000);
        let bias = BiasSpec {
            fp_rate: 0.1,
            fn_rate: 0.1,
            seed: 5,
            ..BiasSpec::default()
        };
        let out = inject_bias(&gt, &bias).unwrap();

        let (w, h) = (gt.width(), gt.height());
        let mut seeds = vec![false; w * h];
        for (r, c) in boundary_pixels(&gt) {
            seeds[r * w + c] = true;
        }
        let dist = distance_transform(w, h, &seeds).unwrap();
        let mut bg_band = 0.0;
        let mut fg_band = 0.0;
        let mut fp = 0.0;
        let mut fn_ = 0.0;
        for i in 0..w * h {
            if dist[i] > bias.band_width {
                continue;
            }
            let (g, o) = (gt.labels()[i], out.labels()[i]);
            if g == 0 {
                bg_band += 1.0;
                fp += f64::from(o == 1);
            } else {
                fg_band += 1.0;
                fn_ += f64::from(o == 0);
            }
        }
        let fp_measured = fp / bg_band;
        let fn_measured = fn_ / fg_band;
        assert!(
            (fp_measured - bias.fp_rate).abs() <= 0.2 * bias.fp_rate,
            "in-band fp {fp_measured}"
        );
        assert!(
            (fn_measured - bias.fn_rate).abs() <= 0.2 * bias.fn_rate,
            "in-band fn {fn_measured}"
        );
    }

    #[test]
    fn without_speckle_all_flips_stay_inside_the_band() {
        let gt = big_disk_mask();
        let bias = BiasSpec {
            fp_rate: 0.3,
            fn_rate: 0.3,
            band_width: 2.0,
            seed: 9,
            ..BiasSpec::default()
        };
        let out = inject_bias(&gt, &bias).unwrap();
        let (w, h) = (gt.width(), gt.height());
        let mut seeds = vec![false; w * h];
        for (r, c) in boundary_pixels(&gt) {
            seeds[r * w + c] = true;
        }
        let dist = distance_transform(w, h, &seeds).unwrap();
        for i in 0..w * h {
            if out.labels()[i] != gt.labels()[i] {
                assert!(dist[i] <= bias.band_width, "flip outside band at {i}");
            }
        }
    }

    #[test]
    fn speckle_flips_appear_outside_the_band() {
        let gt = big_disk_mask();
        let bias = BiasSpec {
            speckle_rate: 0.02,
            seed: 13,
            ..BiasSpec::default()
        };
        let out = inject_bias(&gt, &bias).unwrap();
        let far_flip = out
            .labels()
            .iter()
            .zip(gt.labels())
            .enumerate()
            .any(|(i, (&o, &g))| {
                o != g && {
                    let (r, c) = (i / gt.width(), i % gt.width());
                    let (dr, dc) = (r as f64 - 63.5, c as f64 - 63.5);
                    let d = (dr * dr + dc * dc).sqrt();
                    !(50.0 - 4.0..=50.0 + 4.0).contains(&d)
                }
            });
        assert!(far_flip, "expected at least one speckle far from the boundary");
    }

    #[test]
    fn injection_is_deterministic_under_its_seed() {
        let gt = big_disk_mask();
        let bias = BiasSpec {
            fp_rate: 0.2,
            fn_rate: 0.05,
            speckle_rate: 0.01,
            seed: 21,
            ..BiasSpec::default()
        };
        assert_eq!(
            inject_bias(&gt, &bias).unwrap(),
            inject_bias(&gt, &bias).unwrap()
        );
    }

    #[test]
    fn out_of_domain_rates_are_rejected() {
        let gt = big_disk_mask();
        for bad in [
            BiasSpec {
                fp_rate: 0.5,
                ..BiasSpec::default()
            },
            BiasSpec {
                fn_rate: -0.1,
                ..BiasSpec::default()
            },
            BiasSpec {
                band_width: 0.5,
                ..BiasSpec::default()
            },
        ] {
            assert!(inject_bias(&gt, &bad).is_err());
        }
    }
}
