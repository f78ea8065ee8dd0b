//! Prompt templates and coordinate rendering.
//!
//! Every position payload renders in one canonical form — boxes as
//! `(x1,y1,x2,y2)`, points as `(x,y)`, multi-page lists as
//! `Page 1: (..), Page 2: (..)` — so prompts stay machine-recoverable. Each
//! task ships ten template variants; variant 0 is the canonical instruction
//! used at generation time, the rest feed SFT prompt diversification.

use indexmap::IndexMap;

use crate::compositor::MarkColor;
use crate::conversation::TaskKind;
use crate::geometry::{NormBox, NormPoint};

/// The position payload substituted into a template.
#[derive(Debug, Clone, PartialEq)]
pub enum PromptPayload {
    Box(NormBox),
    Point(NormPoint),
    Color(MarkColor),
    PageBoxes(Vec<NormBox>),
    None,
}

pub fn format_box(b: &NormBox) -> String {
    let [x1, y1, x2, y2] = b.corners();
    format!("({x1},{y1},{x2},{y2})")
}

pub fn format_point(p: &NormPoint) -> String {
    format!("({},{})", p.x, p.y)
}

/// `Page 1: (..), Page 2: (..)` in page order.
pub fn format_page_boxes(boxes: &[NormBox]) -> String {
    boxes
        .iter()
        .enumerate()
        .map(|(i, b)| format!("Page {}: {}", i + 1, format_box(b)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Placeholder names a template may carry, one kind per task.
pub const BOX_SLOT: &str = "{BOX}";
pub const POINT_SLOT: &str = "{POINT}";
pub const COLOR_SLOT: &str = "{COLOR}";
pub const BOXES_SLOT: &str = "{BOXES}";

/// Substitutes the payload into `template`. Templates without a slot pass
/// through unchanged, which covers the layout task.
pub fn render_template(template: &str, payload: &PromptPayload) -> String {
    match payload {
        PromptPayload::Box(b) => template.replace(BOX_SLOT, &format_box(b)),
        PromptPayload::Point(p) => template.replace(POINT_SLOT, &format_point(p)),
        PromptPayload::Color(c) => template.replace(COLOR_SLOT, c.name()),
        PromptPayload::PageBoxes(bs) => template.replace(BOXES_SLOT, &format_page_boxes(bs)),
        PromptPayload::None => template.to_string(),
    }
}

/// The canonical instruction for a task.
pub fn canonical_prompt(task: TaskKind, payload: &PromptPayload) -> String {
    render_template(default_variants_for(task)[0], payload)
}

fn default_variants_for(task: TaskKind) -> [&'static str; 10] {
    match task {
        TaskKind::ForegroundOcr | TaskKind::PageOcr | TaskKind::RegionOcr => [
            "Give the OCR results of the box {BOX}",
            "OCR the box {BOX}",
            "Recognize the text in the box {BOX}",
            "Output the OCR results of the region {BOX}",
            "What text is inside the box {BOX}?",
            "Read out the content of the box {BOX}",
            "Please give the OCR results of the box {BOX}",
            "Transcribe the text within the box {BOX}",
            "Extract the characters in the box {BOX}",
            "Provide the OCR output for the box {BOX}",
        ],
        TaskKind::PageMarkdown => [
            "Give the markdown results of the box {BOX}",
            "Convert the box {BOX} to markdown",
            "Output the content of the box {BOX} as markdown",
            "Render the text in the box {BOX} in markdown",
            "Transcribe the box {BOX} into markdown",
            "Please give the markdown results of the box {BOX}",
            "Produce markdown for the region {BOX}",
            "Turn the content of the box {BOX} into markdown",
            "Write the box {BOX} content as markdown",
            "Give a markdown transcription of the box {BOX}",
        ],
        TaskKind::LineOcr => [
            "OCR the line {POINT}",
            "Give the OCR results of the line {POINT}",
            "Recognize the text of the line at {POINT}",
            "What does the line at {POINT} say?",
            "Read the line located at {POINT}",
            "Transcribe the line at point {POINT}",
            "Output the text of the line {POINT}",
            "Please OCR the line {POINT}",
            "Extract the text of the line at {POINT}",
            "Give the content of the line at {POINT}",
        ],
        TaskKind::ColorOcr => [
            "OCR {COLOR} box",
            "Give the OCR results of the {COLOR} box",
            "Recognize the text in the {COLOR} box",
            "What text is inside the {COLOR} box?",
            "Read out the content of the {COLOR} box",
            "Transcribe the text within the {COLOR} box",
            "Please OCR the {COLOR} box",
            "Output the OCR results of the {COLOR} box",
            "Extract the characters in the {COLOR} box",
            "Provide the OCR output for the {COLOR} box",
        ],
        TaskKind::RegionTranslation => [
            "Translate the content of the box {BOX}",
            "Translate the text in the box {BOX}",
            "Give a translation of the box {BOX}",
            "Please translate the content of the box {BOX}",
            "Render the text of the box {BOX} in the other language",
            "Provide a translation for the region {BOX}",
            "Translate what is written in the box {BOX}",
            "Output a translation of the box {BOX}",
            "Convert the content of the box {BOX} into the other language",
            "What is the translation of the box {BOX}?",
        ],
        TaskKind::RegionSummary => [
            "Summarize the content of the box {BOX}",
            "Give a summary of the box {BOX}",
            "Please summarize the content of the box {BOX}",
            "Provide a brief summary of the region {BOX}",
            "Condense the text in the box {BOX}",
            "What is the box {BOX} about?",
            "Write a short summary of the box {BOX}",
            "Sum up the content of the box {BOX}",
            "Give the key points of the box {BOX}",
            "Briefly summarize the region {BOX}",
        ],
        TaskKind::Layout => [
            "Give the layout of the page",
            "Detect the layout of this page",
            "Output the layout elements of the page",
            "List the layout regions on this page",
            "What is the layout of this page?",
            "Provide the layout analysis of the page",
            "Identify the layout elements of this page",
            "Give the page layout with bounding boxes",
            "Describe the layout structure of the page",
            "Return the layout annotations for this page",
        ],
        TaskKind::FigureCaption => [
            "Give a brief description for the region {BOX} of the image",
            "Describe the region {BOX} of the image",
            "What is shown in the region {BOX}?",
            "Provide a short caption for the region {BOX}",
            "Briefly describe the content of the region {BOX}",
            "Caption the region {BOX} of the image",
            "What is this in the box {BOX}?",
            "Give a caption for the figure in the box {BOX}",
            "Summarize what appears in the region {BOX}",
            "Write a brief description of the region {BOX}",
        ],
        TaskKind::InfigureChat => [
            "What can you see in this region? {BOX}",
            "Describe what is in this region {BOX}",
            "What is in the region {BOX}?",
            "Tell me about the region {BOX}",
            "What do you observe in the region {BOX}?",
            "Explain what is shown in the region {BOX}",
            "What appears in this region? {BOX}",
            "Look at the region {BOX} and describe it",
            "What content does the region {BOX} hold?",
            "Identify what is visible in the region {BOX}",
        ],
        TaskKind::MultipageRegionOcr => [
            "OCR boxes on multiple pages. {BOXES}",
            "Give the OCR results of the boxes on multiple pages. {BOXES}",
            "Recognize the text of the boxes across pages. {BOXES}",
            "Read the following boxes on each page. {BOXES}",
            "Transcribe the boxes on these pages. {BOXES}",
            "Output the OCR results for the multi-page boxes. {BOXES}",
            "Please OCR the boxes on multiple pages. {BOXES}",
            "Extract the text of the boxes on every page. {BOXES}",
            "Provide OCR output for the boxes across the pages. {BOXES}",
            "Give the text content of the per-page boxes. {BOXES}",
        ],
        TaskKind::CrosspageVqa => [
            "Which page's box contains more characters? {BOXES}",
            "Which of these boxes holds the most characters? {BOXES}",
            "Compare the boxes and tell me which page's box has more characters. {BOXES}",
            "Among the following boxes, which page's box contains the most text? {BOXES}",
            "Which page has the box with the largest character count? {BOXES}",
            "Tell me which page's box contains more characters. {BOXES}",
            "Of these per-page boxes, which one has the most characters? {BOXES}",
            "Which page's region contains the greatest number of characters? {BOXES}",
            "Identify the page whose box contains the most characters. {BOXES}",
            "Which box, by page, contains more characters? {BOXES}",
        ],
    }
}

/// Ten prompt variants per task, keyed by task tag. Recipe files may
/// override any entry.
pub fn default_variants() -> IndexMap<String, Vec<String>> {
    TaskKind::ALL
        .into_iter()
        .map(|t| {
            (
                t.as_str().to_string(),
                default_variants_for(t).into_iter().map(str::to_string).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_and_point_rendering() {
        let b = NormBox::new(2, 2, 998, 998).unwrap();
        assert_eq!(format_box(&b), "(2,2,998,998)");
        let p = NormPoint::new(102, 120).unwrap();
        assert_eq!(format_point(&p), "(102,120)");
    }

    #[test]
    fn page_boxes_rendering() {
        let boxes = vec![
            NormBox::new(10, 10, 100, 100).unwrap(),
            NormBox::new(20, 20, 200, 200).unwrap(),
        ];
        assert_eq!(
            format_page_boxes(&boxes),
            "Page 1: (10,10,100,100), Page 2: (20,20,200,200)"
        );
    }

    #[test]
    fn canonical_prompts_match_task_phrasing() {
        let b = NormBox::new(2, 2, 998, 998).unwrap();
        assert_eq!(
            canonical_prompt(TaskKind::ForegroundOcr, &PromptPayload::Box(b)),
            "Give the OCR results of the box (2,2,998,998)"
        );
        assert_eq!(
            canonical_prompt(TaskKind::ColorOcr, &PromptPayload::Color(MarkColor::Red)),
            "OCR red box"
        );
        let p = NormPoint::new(5, 10).unwrap();
        assert_eq!(
            canonical_prompt(TaskKind::LineOcr, &PromptPayload::Point(p)),
            "OCR the line (5,10)"
        );
    }

    #[test]
    fn every_task_has_ten_variants() {
        let variants = default_variants();
        assert_eq!(variants.len(), TaskKind::ALL.len());
        for (task, list) in &variants {
            assert_eq!(list.len(), 10, "task {task}");
        }
    }

    #[test]
    fn variants_keep_their_slot() {
        for task in TaskKind::ALL {
            let slot = match task {
                TaskKind::LineOcr => POINT_SLOT,
                TaskKind::ColorOcr => COLOR_SLOT,
                TaskKind::MultipageRegionOcr | TaskKind::CrosspageVqa => BOXES_SLOT,
                TaskKind::Layout => continue,
                _ => BOX_SLOT,
            };
            for v in default_variants_for(task) {
                assert!(v.contains(slot), "{task}: {v}");
            }
        }
    }
}
