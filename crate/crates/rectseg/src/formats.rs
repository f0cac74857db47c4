//! File formats: PNG images and masks, weight files with checksums,
//! sequence manifests, dense flow fields, and flat key-value configs.
//!
//! Conventions:
//! * masks and edge maps are 8-bit gray PNGs holding 0 or 255;
//! * probability and depth maps are 16-bit gray PNGs mapping `[0, 65535]`
//!   linearly onto `[0.0, 1.0]`;
//! * color frames are 8-bit RGB PNGs mapping `[0, 255]` onto `[0.0, 1.0]`;
//! * weight files are line-oriented text with a format tag, a layout tag,
//!   one entry per line, and a trailing SHA-256 checksum line;
//! * manifests are tab-separated text listing one frame per row with paths
//!   resolved relative to the manifest's own directory;
//! * flow files are little-endian binary: magic `FLO1`, width and height
//!   as `i32`, then `(dx, dy)` as `f32` pairs in row-major order, where
//!   `dx` is the column displacement and `dy` the row displacement back
//!   toward the source frame.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, Luma, Rgb};
use rectseg_core::grid::{
    DepthMap, EdgeIndicator, FlowField, Mask, ProbabilityMap, RgbFrame,
};
use rectseg_core::model::{Layout, WeightVector};
use rectseg_core::pipeline::SequenceFrame;
use rectseg_core::CoreError;
use sha2::{Digest, Sha256};

/// Result alias for all persistence routines.
pub type Result<T> = std::result::Result<T, FormatError>;

/// File-level failures, each naming the offending path.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    /// The file could not be read or written at all.
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// The file exists but is not a decodable image.
    #[error("cannot decode image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
    /// The file's contents break the format contract.
    #[error("{path}: {what}")]
    Malformed { path: PathBuf, what: String },
    /// The decoded values were rejected by the numeric model.
    #[error("{path}: {source}")]
    Core {
        path: PathBuf,
        #[source]
        source: CoreError,
    },
}

impl FormatError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn malformed(path: &Path, what: impl Into<String>) -> Self {
        FormatError::Malformed {
            path: path.to_path_buf(),
            what: what.into(),
        }
    }

    fn core(path: &Path, source: CoreError) -> Self {
        FormatError::Core {
            path: path.to_path_buf(),
            source,
        }
    }
}

// ---------------------------------------------------------------------------
// PNG images
// ---------------------------------------------------------------------------

fn open_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => FormatError::io(path, io),
        other => FormatError::Image {
            path: path.to_path_buf(),
            source: other,
        },
    })
}

fn save_image<P, C>(path: &Path, buffer: &ImageBuffer<P, C>) -> Result<()>
where
    P: image::PixelWithColorType,
    [P::Subpixel]: image::EncodableLayout,
    C: std::ops::Deref<Target = [P::Subpixel]>,
{
    buffer.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => FormatError::io(path, io),
        other => FormatError::Image {
            path: path.to_path_buf(),
            source: other,
        },
    })
}

/// Reads a binary label mask; any sample at or above half intensity counts
/// as foreground.
pub fn read_mask(path: &Path) -> Result<Mask> {
    let img = open_image(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let labels = img.pixels().map(|p| u8::from(p.0[0] >= 128)).collect();
    Mask::from_labels(w, h, labels).map_err(|e| FormatError::core(path, e))
}

/// Writes a binary label mask as an 8-bit gray PNG of 0s and 255s.
pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    let pixels: Vec<u8> = mask.labels().iter().map(|&l| l * 255).collect();
    let buffer: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, pixels)
            .expect("buffer matches mask dimensions");
    save_image(path, &buffer)
}

/// Reads an edge-pixel indicator; any nonzero sample marks an edge.
pub fn read_edge_indicator(path: &Path) -> Result<EdgeIndicator> {
    let img = open_image(path)?.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let flags = img.pixels().map(|p| p.0[0] != 0).collect();
    EdgeIndicator::from_flags(w, h, flags).map_err(|e| FormatError::core(path, e))
}

/// Writes an edge-pixel indicator as an 8-bit gray PNG of 0s and 255s.
pub fn write_edge_indicator(path: &Path, edges: &EdgeIndicator) -> Result<()> {
    let pixels: Vec<u8> = edges.flags().iter().map(|&f| if f { 255 } else { 0 }).collect();
    let buffer: ImageBuffer<Luma<u8>, _> =
        ImageBuffer::from_raw(edges.width() as u32, edges.height() as u32, pixels)
            .expect("buffer matches indicator dimensions");
    save_image(path, &buffer)
}

fn gray_unit_values(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let img = open_image(path)?;
    Ok(match img {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let v = g.pixels().map(|p| p.0[0] as f64 / 255.0).collect();
            (w, h, v)
        }
        other => {
            let g = other.to_luma16();
            let (w, h) = (g.width() as usize, g.height() as usize);
            let v = g.pixels().map(|p| p.0[0] as f64 / 65535.0).collect();
            (w, h, v)
        }
    })
}

fn unit_to_u16(values: &[f64]) -> Vec<u16> {
    values
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
        .collect()
}

/// Reads a foreground-probability map from an 8- or 16-bit gray PNG.
pub fn read_probability_map(path: &Path) -> Result<ProbabilityMap> {
    let (w, h, values) = gray_unit_values(path)?;
    ProbabilityMap::from_values(w, h, values).map_err(|e| FormatError::core(path, e))
}

/// Writes a probability map as a 16-bit gray PNG.
pub fn write_probability_map(path: &Path, map: &ProbabilityMap) -> Result<()> {
    let buffer: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(
        map.width() as u32,
        map.height() as u32,
        unit_to_u16(map.values()),
    )
    .expect("buffer matches map dimensions");
    save_image(path, &buffer)
}

/// Reads a depth map from an 8- or 16-bit gray PNG, scaled to `[0, 1]`.
pub fn read_depth_map(path: &Path) -> Result<DepthMap> {
    let (w, h, values) = gray_unit_values(path)?;
    DepthMap::from_values(w, h, values).map_err(|e| FormatError::core(path, e))
}

/// Writes a depth map as a 16-bit gray PNG.
pub fn write_depth_map(path: &Path, map: &DepthMap) -> Result<()> {
    let buffer: ImageBuffer<Luma<u16>, _> = ImageBuffer::from_raw(
        map.width() as u32,
        map.height() as u32,
        unit_to_u16(map.values()),
    )
    .expect("buffer matches map dimensions");
    save_image(path, &buffer)
}

/// Reads a color frame from any decodable image, scaled to `[0, 1]` RGB.
pub fn read_rgb_frame(path: &Path) -> Result<RgbFrame> {
    let img = open_image(path)?.to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = img
        .pixels()
        .map(|p| {
            [
                p.0[0] as f64 / 255.0,
                p.0[1] as f64 / 255.0,
                p.0[2] as f64 / 255.0,
            ]
        })
        .collect();
    RgbFrame::from_pixels(w, h, pixels).map_err(|e| FormatError::core(path, e))
}

/// Writes a color frame as an 8-bit RGB PNG.
pub fn write_rgb_frame(path: &Path, frame: &RgbFrame) -> Result<()> {
    let pixels: Vec<u8> = frame
        .pixels()
        .iter()
        .flat_map(|p| p.iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8))
        .collect();
    let buffer: ImageBuffer<Rgb<u8>, _> =
        ImageBuffer::from_raw(frame.width() as u32, frame.height() as u32, pixels)
            .expect("buffer matches frame dimensions");
    save_image(path, &buffer)
}

// ---------------------------------------------------------------------------
// Weight files
// ---------------------------------------------------------------------------

/// First line of every weight file.
pub const WEIGHTS_HEADER: &str = "# rectseg-weights v1";

fn weight_entry_lines(weights: &WeightVector) -> String {
    let mut body = String::new();
    for e in weights.entries() {
        let _ = writeln!(body, "{e:.16e}");
    }
    body
}

fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        let _ = write!(hex, "{byte:02x}");
    }
    hex
}

/// Serializes a weight vector: header, layout tag, one entry per line, and
/// a SHA-256 checksum over the entry lines for corruption detection.
pub fn weights_to_string(weights: &WeightVector) -> String {
    let body = weight_entry_lines(weights);
    format!(
        "{WEIGHTS_HEADER}\nlayout {}\n{body}checksum {}\n",
        weights.layout().tag(),
        sha256_hex(&body)
    )
}

/// Writes a weight file.
pub fn write_weights(path: &Path, weights: &WeightVector) -> Result<()> {
    std::fs::write(path, weights_to_string(weights)).map_err(|e| FormatError::io(path, e))
}

/// Reads a weight file, verifying the layout tag, the entry count, and the
/// checksum line.
pub fn read_weights(path: &Path) -> Result<WeightVector> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim() == WEIGHTS_HEADER => {}
        other => {
            return Err(FormatError::malformed(
                path,
                format!(
                    "expected header {WEIGHTS_HEADER:?}, found {:?}",
                    other.unwrap_or("")
                ),
            ))
        }
    }
    let layout = match lines.next().map(str::trim) {
        Some(l) if l == format!("layout {}", Layout::Rgb.tag()) => Layout::Rgb,
        Some(l) if l == format!("layout {}", Layout::Rgbd.tag()) => Layout::Rgbd,
        other => {
            return Err(FormatError::malformed(
                path,
                format!("expected a layout line, found {:?}", other.unwrap_or("")),
            ))
        }
    };
    let mut entries = Vec::new();
    let mut body = String::new();
    let mut checksum: Option<String> = None;
    for line in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("checksum ") {
            checksum = Some(rest.trim().to_string());
            break;
        }
        let value: f64 = trimmed.parse().map_err(|_| {
            FormatError::malformed(path, format!("unreadable weight entry {trimmed:?}"))
        })?;
        let _ = writeln!(body, "{trimmed}");
        entries.push(value);
    }
    let Some(stated) = checksum else {
        return Err(FormatError::malformed(path, "missing checksum line"));
    };
    let actual = sha256_hex(&body);
    if stated != actual {
        return Err(FormatError::malformed(
            path,
            format!("checksum mismatch: file says {stated}, entries hash to {actual}"),
        ));
    }
    if entries.len() != layout.len() {
        return Err(FormatError::malformed(
            path,
            format!(
                "layout {} needs {} entries, found {}",
                layout.tag(),
                layout.len(),
                entries.len()
            ),
        ));
    }
    WeightVector::from_entries(layout, entries).map_err(|e| FormatError::core(path, e))
}

// ---------------------------------------------------------------------------
// Sequence manifests
// ---------------------------------------------------------------------------

/// First line of every manifest file.
pub const MANIFEST_HEADER: &str = "# rectseg-manifest v1";

/// Column row of every manifest file.
pub const MANIFEST_COLUMNS: &str = "id\timage\tgt\tprob\tedge\tdepth\tflow";

/// One manifest row with paths still relative to the manifest location;
/// empty columns are written as `-`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: usize,
    pub image: String,
    pub gt: Option<String>,
    pub prob: Option<String>,
    pub edge: Option<String>,
    pub depth: Option<String>,
    pub flow: Option<String>,
}

/// One manifest row with paths resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    pub id: usize,
    pub image: PathBuf,
    pub gt: Option<PathBuf>,
    pub prob: Option<PathBuf>,
    pub edge: Option<PathBuf>,
    pub depth: Option<PathBuf>,
    pub flow: Option<PathBuf>,
}

/// Serializes manifest rows as tab-separated text.
pub fn manifest_to_string(entries: &[ManifestEntry]) -> String {
    let mut out = format!("{MANIFEST_HEADER}\n{MANIFEST_COLUMNS}\n");
    for e in entries {
        let cell = |o: &Option<String>| o.clone().unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            e.id,
            e.image,
            cell(&e.gt),
            cell(&e.prob),
            cell(&e.edge),
            cell(&e.depth),
            cell(&e.flow)
        );
    }
    out
}

/// Writes a manifest file.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    std::fs::write(path, manifest_to_string(entries)).map_err(|e| FormatError::io(path, e))
}

/// Reads a manifest, resolving every path against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MANIFEST_HEADER => {}
        other => {
            return Err(FormatError::malformed(
                path,
                format!(
                    "expected header {MANIFEST_HEADER:?}, found {:?}",
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            ))
        }
    }
    match lines.next() {
        Some((_, l)) if l.trim() == MANIFEST_COLUMNS => {}
        other => {
            return Err(FormatError::malformed(
                path,
                format!(
                    "expected column row {:?}, found {:?}",
                    MANIFEST_COLUMNS.replace('\t', " "),
                    other.map(|(_, l)| l).unwrap_or("")
                ),
            ))
        }
    }
    let mut rows = Vec::new();
    for (index, line) in lines {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split('\t').map(str::trim).collect();
        if cells.len() != 7 {
            return Err(FormatError::malformed(
                path,
                format!("line {}: expected 7 columns, found {}", index + 1, cells.len()),
            ));
        }
        let id: usize = cells[0].parse().map_err(|_| {
            FormatError::malformed(path, format!("line {}: unreadable id {:?}", index + 1, cells[0]))
        })?;
        let resolve = |cell: &str| -> Option<PathBuf> {
            if cell == "-" || cell.is_empty() {
                None
            } else {
                Some(base.join(cell))
            }
        };
        let image = resolve(cells[1]).ok_or_else(|| {
            FormatError::malformed(path, format!("line {}: missing image path", index + 1))
        })?;
        rows.push(ManifestRow {
            id,
            image,
            gt: resolve(cells[2]),
            prob: resolve(cells[3]),
            edge: resolve(cells[4]),
            depth: resolve(cells[5]),
            flow: resolve(cells[6]),
        });
    }
    if rows.is_empty() {
        return Err(FormatError::malformed(path, "no frame rows"));
    }
    Ok(rows)
}

/// Loads every asset a manifest row references into a sequence frame.
pub fn load_sequence(rows: &[ManifestRow]) -> Result<Vec<SequenceFrame>> {
    rows.iter()
        .map(|row| {
            let mut frame = SequenceFrame::new(read_rgb_frame(&row.image)?);
            if let Some(p) = &row.gt {
                frame.ground_truth = Some(read_mask(p)?);
            }
            if let Some(p) = &row.prob {
                frame.probability = Some(read_probability_map(p)?);
            }
            if let Some(p) = &row.edge {
                frame.edges = Some(read_edge_indicator(p)?);
            }
            if let Some(p) = &row.depth {
                frame.depth = Some(read_depth_map(p)?);
            }
            if let Some(p) = &row.flow {
                frame.flow = Some(read_flow(p)?);
            }
            Ok(frame)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Flow fields
// ---------------------------------------------------------------------------

/// Magic bytes opening a flow file.
pub const FLOW_MAGIC: &[u8; 4] = b"FLO1";

/// Writes a dense backward flow field in the binary `FLO1` layout.
pub fn write_flow(path: &Path, flow: &FlowField) -> Result<()> {
    let mut bytes = Vec::with_capacity(12 + flow.vectors().len() * 8);
    bytes.extend_from_slice(FLOW_MAGIC);
    bytes.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    bytes.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for v in flow.vectors() {
        // Stored order is (dx, dy) = (column, row) displacement.
        bytes.extend_from_slice(&v[1].to_le_bytes());
        bytes.extend_from_slice(&v[0].to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

/// Reads a dense backward flow field from the binary `FLO1` layout.
pub fn read_flow(path: &Path) -> Result<FlowField> {
    let mut file = std::fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)
        .map_err(|e| FormatError::io(path, e))?;
    if bytes.len() < 12 || &bytes[..4] != FLOW_MAGIC {
        return Err(FormatError::malformed(path, "missing FLO1 magic"));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(FormatError::malformed(
            path,
            format!("non-positive dimensions {width}x{height}"),
        ));
    }
    let (w, h) = (width as usize, height as usize);
    let expected = 12 + w * h * 8;
    if bytes.len() != expected {
        return Err(FormatError::malformed(
            path,
            format!("expected {expected} bytes for {w}x{h}, found {}", bytes.len()),
        ));
    }
    let mut vectors = Vec::with_capacity(w * h);
    for chunk in bytes[12..].chunks_exact(8) {
        let dx = f32::from_le_bytes(chunk[..4].try_into().unwrap());
        let dy = f32::from_le_bytes(chunk[4..].try_into().unwrap());
        vectors.push([dy, dx]);
    }
    FlowField::from_vectors(w, h, vectors).map_err(|e| FormatError::core(path, e))
}

// ---------------------------------------------------------------------------
// Flat key-value configs
// ---------------------------------------------------------------------------

/// Resolved settings: dotted module-scoped keys mapped to plain strings.
pub type ConfigMap = BTreeMap<String, String>;

/// Parses flat `key = value` text; `#` starts a comment line.
pub fn parse_config(path: &Path, text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (index, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(FormatError::malformed(
                path,
                format!("line {}: expected key = value, found {trimmed:?}", index + 1),
            ));
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(FormatError::malformed(
                path,
                format!("line {}: empty key", index + 1),
            ));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Reads a config file.
pub fn read_config(path: &Path) -> Result<ConfigMap> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    parse_config(path, &text)
}

/// Writes a config map as sorted `key = value` lines.
pub fn write_config(path: &Path, map: &ConfigMap) -> Result<()> {
    let mut out = String::new();
    for (key, value) in map {
        let _ = writeln!(out, "{key} = {value}");
    }
    std::fs::write(path, out).map_err(|e| FormatError::io(path, e))
}
