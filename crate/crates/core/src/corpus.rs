//! Ingestion, validation, and indexing of parsed document-page records.
//!
//! PDF byte-level parsing happens upstream; this module consumes the parser's
//! output through a strict JSON schema (one record per `.json` file or per
//! `.jsonl` line) and builds an indexed corpus. Three record kinds exist:
//! document pages with paragraph/line text boxes, natural images with
//! captions and optional region dialogs, and layout annotations.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, PageSize, PixelBox};

/// Parser jitter tolerance: boxes overhanging the page by at most this many
/// pixels are clamped; anything worse is rejected.
pub const OVERHANG_TOLERANCE_PX: f64 = 2.0;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("box ({x1}, {y1}, {x2}, {y2}) overhangs page {width}x{height} by more than {OVERHANG_TOLERANCE_PX} px")]
    BoxOutOfBounds {
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        width: u32,
        height: u32,
    },
    #[error("empty text content in record {0}")]
    EmptyContent(String),
    #[error("duplicate page_id {0}")]
    DuplicatePageId(String),
    #[error("duplicate image_id {0}")]
    DuplicateImageId(String),
    #[error("image file not found: {0}")]
    MissingImage(PathBuf),
    #[error("layout record references unknown page_id {0}")]
    UnknownLayoutPage(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    En,
    Zh,
    Mixed,
}

impl std::fmt::Display for Language {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Language::En => write!(f, "en"),
            Language::Zh => write!(f, "zh"),
            Language::Mixed => write!(f, "mixed"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxKind {
    Paragraph,
    Line,
}

/// One located text region: bounding box plus its transcription.
#[derive(Debug, Clone, PartialEq)]
pub struct TextBox {
    pub bbox: PixelBox,
    pub text: String,
    pub kind: BoxKind,
}

/// One parsed document page: raster reference, pixel size, and the
/// paragraph/line boxes recorded by the upstream parser.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRecord {
    pub page_id: String,
    pub image_ref: PathBuf,
    pub size: PageSize,
    pub paragraphs: Vec<TextBox>,
    pub lines: Vec<TextBox>,
    pub language: Language,
}

/// A natural-image/caption record, optionally carrying region-level dialog
/// turns for in-figure chat.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalImageRecord {
    pub image_id: String,
    pub image_ref: PathBuf,
    pub size: PageSize,
    pub caption: String,
    pub region_dialogs: Vec<RegionDialog>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionDialog {
    pub bbox: PixelBox,
    pub q: String,
    pub a: String,
}

/// Layout annotation for one page: labeled element boxes.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutRecord {
    pub page_id: String,
    pub elements: Vec<LayoutElement>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutElement {
    pub label: String,
    pub bbox: PixelBox,
}

// --- wire forms -------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTextBox {
    bbox: [f64; 4],
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPageRecord {
    page_id: String,
    image: PathBuf,
    width: u32,
    height: u32,
    language: Language,
    paragraphs: Vec<RawTextBox>,
    lines: Vec<RawTextBox>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNaturalRecord {
    image_id: String,
    image: PathBuf,
    width: u32,
    height: u32,
    caption: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    region_dialogs: Vec<RegionDialog>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayoutRecord {
    page_id: String,
    elements: Vec<LayoutElement>,
}

fn validate_box(
    raw: [f64; 4],
    size: PageSize,
    record_id: &str,
) -> Result<PixelBox, CorpusError> {
    let [mut x1, mut y1, mut x2, mut y2] = raw;
    if !(x1.is_finite() && y1.is_finite() && x2.is_finite() && y2.is_finite()) {
        return Err(CorpusError::Schema(format!(
            "non-finite bbox coordinate in record {record_id}"
        )));
    }
    if x1 >= x2 || y1 >= y2 {
        return Err(CorpusError::Schema(format!(
            "bbox corners out of order in record {record_id}: [{x1}, {y1}, {x2}, {y2}]"
        )));
    }
    let w = f64::from(size.width());
    let h = f64::from(size.height());
    let overhang = (-x1).max(-y1).max(x2 - w).max(y2 - h).max(0.0);
    if overhang > OVERHANG_TOLERANCE_PX {
        return Err(CorpusError::BoxOutOfBounds {
            x1,
            y1,
            x2,
            y2,
            width: size.width(),
            height: size.height(),
        });
    }
    if overhang > 0.0 {
        x1 = x1.max(0.0);
        y1 = y1.max(0.0);
        x2 = x2.min(w);
        y2 = y2.min(h);
    }
    Ok(PixelBox::new(x1, y1, x2, y2)?)
}

fn validate_text_boxes(
    raws: Vec<RawTextBox>,
    size: PageSize,
    kind: BoxKind,
    record_id: &str,
) -> Result<Vec<TextBox>, CorpusError> {
    raws.into_iter()
        .map(|raw| {
            if raw.text.trim().is_empty() {
                return Err(CorpusError::EmptyContent(record_id.to_string()));
            }
            let bbox = validate_box(raw.bbox, size, record_id)?;
            Ok(TextBox {
                bbox,
                text: raw.text,
                kind,
            })
        })
        .collect()
}

/// Parses and validates one page-record blob. Boxes overhanging the page by
/// at most 2 px are clamped; worse overhangs, out-of-order corners, and empty
/// text are rejected.
pub fn ingest_page(blob: &str) -> Result<PageRecord, CorpusError> {
    let raw: RawPageRecord =
        serde_json::from_str(blob).map_err(|e| CorpusError::Schema(e.to_string()))?;
    if raw.page_id.trim().is_empty() {
        return Err(CorpusError::Schema("empty page_id".into()));
    }
    let size = PageSize::new(raw.width, raw.height)?;
    let paragraphs = validate_text_boxes(raw.paragraphs, size, BoxKind::Paragraph, &raw.page_id)?;
    let lines = validate_text_boxes(raw.lines, size, BoxKind::Line, &raw.page_id)?;
    Ok(PageRecord {
        page_id: raw.page_id,
        image_ref: raw.image,
        size,
        paragraphs,
        lines,
        language: raw.language,
    })
}

pub fn ingest_natural(blob: &str) -> Result<NaturalImageRecord, CorpusError> {
    let raw: RawNaturalRecord =
        serde_json::from_str(blob).map_err(|e| CorpusError::Schema(e.to_string()))?;
    if raw.image_id.trim().is_empty() {
        return Err(CorpusError::Schema("empty image_id".into()));
    }
    if raw.caption.trim().is_empty() {
        return Err(CorpusError::EmptyContent(raw.image_id));
    }
    let size = PageSize::new(raw.width, raw.height)?;
    for dialog in &raw.region_dialogs {
        if !dialog.bbox.within_page(size) {
            return Err(CorpusError::BoxOutOfBounds {
                x1: dialog.bbox.x1(),
                y1: dialog.bbox.y1(),
                x2: dialog.bbox.x2(),
                y2: dialog.bbox.y2(),
                width: raw.width,
                height: raw.height,
            });
        }
    }
    Ok(NaturalImageRecord {
        image_id: raw.image_id,
        image_ref: raw.image,
        size,
        caption: raw.caption,
        region_dialogs: raw.region_dialogs,
    })
}

pub fn ingest_layout(blob: &str) -> Result<LayoutRecord, CorpusError> {
    let raw: RawLayoutRecord =
        serde_json::from_str(blob).map_err(|e| CorpusError::Schema(e.to_string()))?;
    if raw.page_id.trim().is_empty() {
        return Err(CorpusError::Schema("empty page_id".into()));
    }
    Ok(LayoutRecord {
        page_id: raw.page_id,
        elements: raw.elements,
    })
}

/// Re-serializes a page record in the ingestion schema. Valid records
/// round-trip field-for-field.
pub fn page_to_json(page: &PageRecord) -> serde_json::Value {
    let raw = RawPageRecord {
        page_id: page.page_id.clone(),
        image: page.image_ref.clone(),
        width: page.size.width(),
        height: page.size.height(),
        language: page.language,
        paragraphs: page
            .paragraphs
            .iter()
            .map(|t| RawTextBox {
                bbox: t.bbox.corners(),
                text: t.text.clone(),
            })
            .collect(),
        lines: page
            .lines
            .iter()
            .map(|t| RawTextBox {
                bbox: t.bbox.corners(),
                text: t.text.clone(),
            })
            .collect(),
    };
    // PixelBox's integral-as-integer convention applies to bbox arrays.
    let mut value = serde_json::to_value(&raw).expect("page record serializes");
    for key in ["paragraphs", "lines"] {
        let boxes = if key == "paragraphs" { &page.paragraphs } else { &page.lines };
        if let Some(items) = value.get_mut(key).and_then(|v| v.as_array_mut()) {
            for (item, tb) in items.iter_mut().zip(boxes) {
                item["bbox"] = serde_json::to_value(tb.bbox).expect("bbox serializes");
            }
        }
    }
    value
}

pub fn natural_to_json(rec: &NaturalImageRecord) -> serde_json::Value {
    serde_json::to_value(RawNaturalRecord {
        image_id: rec.image_id.clone(),
        image: rec.image_ref.clone(),
        width: rec.size.width(),
        height: rec.size.height(),
        caption: rec.caption.clone(),
        region_dialogs: rec.region_dialogs.clone(),
    })
    .expect("natural record serializes")
}

pub fn layout_to_json(rec: &LayoutRecord) -> serde_json::Value {
    serde_json::to_value(RawLayoutRecord {
        page_id: rec.page_id.clone(),
        elements: rec.elements.clone(),
    })
    .expect("layout record serializes")
}

/// Counts non-whitespace Unicode scalar values; the length measure behind
/// the long-text filter and cross-page comparisons.
pub fn char_count(text: &str) -> usize {
    text.chars().filter(|c| !c.is_whitespace()).count()
}

/// Merges word-level boxes into line boxes: words whose vertical overlap is
/// at least half the shorter box height belong to one line (closed
/// transitively), read left to right.
pub fn group_words_into_lines(words: &[TextBox]) -> Vec<TextBox> {
    let n = words.len();
    if n == 0 {
        return Vec::new();
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if same_line(&words[i].bbox, &words[j].bbox) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut clusters: IndexMap<usize, Vec<usize>> = IndexMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        clusters.entry(root).or_default().push(i);
    }
    let mut lines: Vec<TextBox> = clusters
        .into_values()
        .map(|mut members| {
            members.sort_by(|&a, &b| {
                words[a]
                    .bbox
                    .x1()
                    .partial_cmp(&words[b].bbox.x1())
                    .unwrap()
                    .then(words[a].bbox.y1().partial_cmp(&words[b].bbox.y1()).unwrap())
            });
            let bbox = members
                .iter()
                .skip(1)
                .fold(words[members[0]].bbox, |acc, &i| acc.union_bounds(&words[i].bbox));
            let text = members
                .iter()
                .map(|&i| words[i].text.as_str())
                .collect::<Vec<_>>()
                .join(" ");
            TextBox {
                bbox,
                text,
                kind: BoxKind::Line,
            }
        })
        .collect();
    lines.sort_by(|a, b| {
        a.bbox
            .y1()
            .partial_cmp(&b.bbox.y1())
            .unwrap()
            .then(a.bbox.x1().partial_cmp(&b.bbox.x1()).unwrap())
    });
    lines
}

/// Vertical overlap of at least 50% of the shorter height.
pub fn same_line(a: &PixelBox, b: &PixelBox) -> bool {
    let overlap = a.y2().min(b.y2()) - a.y1().max(b.y1());
    let shorter = a.height().min(b.height());
    overlap >= 0.5 * shorter
}

/// Options controlling corpus-level validation during loading.
#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Require each record's raster to exist on disk, resolved against the
    /// record file's directory.
    pub require_images: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self { require_images: true }
    }
}

/// Indexed view over ingested records. Page, natural-image, and layout
/// lookups are exact and total over everything inserted.
#[derive(Debug, Default, Clone)]
pub struct Corpus {
    pages: IndexMap<String, PageRecord>,
    naturals: IndexMap<String, NaturalImageRecord>,
    layouts: IndexMap<String, LayoutRecord>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_page(&mut self, page: PageRecord) -> Result<(), CorpusError> {
        if self.pages.contains_key(&page.page_id) {
            return Err(CorpusError::DuplicatePageId(page.page_id));
        }
        self.pages.insert(page.page_id.clone(), page);
        Ok(())
    }

    pub fn insert_natural(&mut self, rec: NaturalImageRecord) -> Result<(), CorpusError> {
        if self.naturals.contains_key(&rec.image_id) {
            return Err(CorpusError::DuplicateImageId(rec.image_id));
        }
        self.naturals.insert(rec.image_id.clone(), rec);
        Ok(())
    }

    pub fn insert_layout(&mut self, rec: LayoutRecord) -> Result<(), CorpusError> {
        if !self.pages.is_empty() && !self.pages.contains_key(&rec.page_id) {
            return Err(CorpusError::UnknownLayoutPage(rec.page_id));
        }
        self.layouts.insert(rec.page_id.clone(), rec);
        Ok(())
    }

    pub fn page(&self, page_id: &str) -> Option<&PageRecord> {
        self.pages.get(page_id)
    }

    pub fn natural(&self, image_id: &str) -> Option<&NaturalImageRecord> {
        self.naturals.get(image_id)
    }

    pub fn layout(&self, page_id: &str) -> Option<&LayoutRecord> {
        self.layouts.get(page_id)
    }

    pub fn pages(&self) -> impl Iterator<Item = &PageRecord> {
        self.pages.values()
    }

    pub fn naturals(&self) -> impl Iterator<Item = &NaturalImageRecord> {
        self.naturals.values()
    }

    pub fn layouts(&self) -> impl Iterator<Item = &LayoutRecord> {
        self.layouts.values()
    }

    pub fn page_count(&self) -> usize {
        self.pages.len()
    }

    pub fn natural_count(&self) -> usize {
        self.naturals.len()
    }

    pub fn layout_count(&self) -> usize {
        self.layouts.len()
    }

    /// Sorts all indexes by id so iteration order is independent of file
    /// discovery order.
    pub fn sort(&mut self) {
        self.pages.sort_keys();
        self.naturals.sort_keys();
        self.layouts.sort_keys();
    }

    /// Loads page records from `.json`/`.jsonl` files or directories thereof.
    pub fn load_pages(&mut self, paths: &[PathBuf], opts: IngestOptions) -> Result<(), CorpusError> {
        for (path, blob) in collect_blobs(paths)? {
            let mut page = ingest_page(&blob)?;
            resolve_image_ref(&mut page.image_ref, &path, opts.require_images)?;
            self.insert_page(page)?;
        }
        self.pages.sort_keys();
        Ok(())
    }

    pub fn load_naturals(&mut self, paths: &[PathBuf], opts: IngestOptions) -> Result<(), CorpusError> {
        for (path, blob) in collect_blobs(paths)? {
            let mut rec = ingest_natural(&blob)?;
            resolve_image_ref(&mut rec.image_ref, &path, opts.require_images)?;
            self.insert_natural(rec)?;
        }
        self.naturals.sort_keys();
        Ok(())
    }

    pub fn load_layouts(&mut self, paths: &[PathBuf]) -> Result<(), CorpusError> {
        for (_, blob) in collect_blobs(paths)? {
            let mut rec = ingest_layout(&blob)?;
            if let Some(page) = self.pages.get(&rec.page_id) {
                for el in &mut rec.elements {
                    let corners = el.bbox.corners();
                    el.bbox = validate_box(corners, page.size, &rec.page_id)?;
                }
            }
            self.insert_layout(rec)?;
        }
        self.layouts.sort_keys();
        Ok(())
    }
}

fn resolve_image_ref(
    image_ref: &mut PathBuf,
    record_path: &Path,
    require: bool,
) -> Result<(), CorpusError> {
    if image_ref.is_relative() {
        if let Some(dir) = record_path.parent() {
            *image_ref = dir.join(&*image_ref);
        }
    }
    if require && !image_ref.exists() {
        return Err(CorpusError::MissingImage(image_ref.clone()));
    }
    Ok(())
}

/// Expands paths (files or directories) into `(source_file, record_blob)`
/// pairs in sorted file order.
fn collect_blobs(paths: &[PathBuf]) -> Result<Vec<(PathBuf, String)>, CorpusError> {
    let mut files: Vec<PathBuf> = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut found: Vec<PathBuf> = walkdir::WalkDir::new(path)
                .sort_by_file_name()
                .into_iter()
                .filter_map(|e| e.ok())
                .filter(|e| e.file_type().is_file())
                .map(|e| e.into_path())
                .filter(|p| {
                    matches!(
                        p.extension().and_then(|e| e.to_str()),
                        Some("json") | Some("jsonl")
                    )
                })
                .collect();
            files.append(&mut found);
        } else {
            files.push(path.clone());
        }
    }
    let mut blobs = Vec::new();
    for file in files {
        let is_jsonl = file.extension().and_then(|e| e.to_str()) == Some("jsonl");
        if is_jsonl {
            let handle = fs::File::open(&file).map_err(|source| CorpusError::Io {
                path: file.clone(),
                source,
            })?;
            for line in BufReader::new(handle).lines() {
                let line = line.map_err(|source| CorpusError::Io {
                    path: file.clone(),
                    source,
                })?;
                if !line.trim().is_empty() {
                    blobs.push((file.clone(), line));
                }
            }
        } else {
            let blob = fs::read_to_string(&file).map_err(|source| CorpusError::Io {
                path: file.clone(),
                source,
            })?;
            blobs.push((file, blob));
        }
    }
    Ok(blobs)
}
