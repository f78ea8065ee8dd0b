//! Instruction-sample model and its flat-text wire format.
//!
//! A sample is an ordered list of user/assistant turns over one or more page
//! images. The rendered form follows the LLaVA-MPT dialogue style:
//!
//! ```text
//! <|im_start|>user: <img>"<image>"</img> "QUESTION"<|im_end|> <|im_start|>assistant: "ANSWER" <|im_end|>
//! ```
//!
//! Image placeholders appear only on the first user turn, once per page.
//! Texts containing any reserved delimiter are rejected outright instead of
//! escaped, which keeps the format trivially parseable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const IM_START: &str = "<|im_start|>";
pub const IM_END: &str = "<|im_end|>";
pub const IMG_OPEN: &str = "<img>";
pub const IMG_CLOSE: &str = "</img>";
pub const IMAGE_PLACEHOLDER: &str = "<image>";

const IMAGE_TOKEN: &str = "<img>\"<image>\"</img> ";

#[derive(Debug, Error, PartialEq)]
pub enum ConversationError {
    #[error("text contains reserved delimiter {0:?}")]
    ReservedDelimiter(&'static str),
    #[error("turn text is empty")]
    EmptyTurn,
    #[error("conversation must alternate user/assistant starting with user")]
    BadAlternation,
    #[error("sample must reference at least one image")]
    NoImages,
    #[error("malformed conversation text: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Assistant,
}

/// One dialogue turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn user(text: impl Into<String>) -> Self {
        Self { role: Role::User, text: text.into() }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Self { role: Role::Assistant, text: text.into() }
    }
}

/// The thirteen instruction task families the engine emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    ForegroundOcr,
    RegionOcr,
    LineOcr,
    ColorOcr,
    RegionTranslation,
    RegionSummary,
    Layout,
    FigureCaption,
    InfigureChat,
    MultipageRegionOcr,
    CrosspageVqa,
    PageOcr,
    PageMarkdown,
}

impl TaskKind {
    pub const ALL: [TaskKind; 13] = [
        TaskKind::ForegroundOcr,
        TaskKind::RegionOcr,
        TaskKind::LineOcr,
        TaskKind::ColorOcr,
        TaskKind::RegionTranslation,
        TaskKind::RegionSummary,
        TaskKind::Layout,
        TaskKind::FigureCaption,
        TaskKind::InfigureChat,
        TaskKind::MultipageRegionOcr,
        TaskKind::CrosspageVqa,
        TaskKind::PageOcr,
        TaskKind::PageMarkdown,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::ForegroundOcr => "foreground_ocr",
            TaskKind::RegionOcr => "region_ocr",
            TaskKind::LineOcr => "line_ocr",
            TaskKind::ColorOcr => "color_ocr",
            TaskKind::RegionTranslation => "region_translation",
            TaskKind::RegionSummary => "region_summary",
            TaskKind::Layout => "layout",
            TaskKind::FigureCaption => "figure_caption",
            TaskKind::InfigureChat => "infigure_chat",
            TaskKind::MultipageRegionOcr => "multipage_region_ocr",
            TaskKind::CrosspageVqa => "crosspage_vqa",
            TaskKind::PageOcr => "page_ocr",
            TaskKind::PageMarkdown => "page_markdown",
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task {s:?}"))
    }
}

/// One instruction-following sample: image references, alternating turns,
/// task tag, and the recoverable ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationSample {
    pub id: String,
    pub task: TaskKind,
    pub images: Vec<String>,
    pub conversation: Vec<Turn>,
    pub ground_truth: String,
}

impl ConversationSample {
    /// Validates turn alternation, delimiter-free non-empty texts, and the
    /// image list.
    pub fn new(
        id: String,
        task: TaskKind,
        images: Vec<String>,
        conversation: Vec<Turn>,
        ground_truth: String,
    ) -> Result<Self, ConversationError> {
        if images.is_empty() {
            return Err(ConversationError::NoImages);
        }
        if conversation.is_empty() {
            return Err(ConversationError::BadAlternation);
        }
        for (i, turn) in conversation.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if turn.role != expected {
                return Err(ConversationError::BadAlternation);
            }
            check_text(&turn.text)?;
        }
        Ok(Self { id, task, images, conversation, ground_truth })
    }

    pub fn render(&self) -> String {
        render_turns(&self.conversation, self.images.len())
    }
}

fn check_text(text: &str) -> Result<(), ConversationError> {
    if text.is_empty() {
        return Err(ConversationError::EmptyTurn);
    }
    for delim in [IM_START, IM_END, IMG_OPEN, IMG_CLOSE, IMAGE_PLACEHOLDER] {
        if text.contains(delim) {
            return Err(ConversationError::ReservedDelimiter(delim));
        }
    }
    Ok(())
}

/// Renders validated turns to the flat wire format. `image_count`
/// placeholders are emitted on the first user turn only.
pub fn serialize_conversation(turns: &[Turn], image_count: usize) -> Result<String, ConversationError> {
    if image_count == 0 {
        return Err(ConversationError::NoImages);
    }
    if turns.is_empty() {
        return Err(ConversationError::BadAlternation);
    }
    for (i, turn) in turns.iter().enumerate() {
        let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
        if turn.role != expected {
            return Err(ConversationError::BadAlternation);
        }
        check_text(&turn.text)?;
    }
    Ok(render_turns(turns, image_count))
}

fn render_turns(turns: &[Turn], image_count: usize) -> String {
    let mut parts: Vec<String> = Vec::with_capacity(turns.len());
    for (i, turn) in turns.iter().enumerate() {
        match turn.role {
            Role::User => {
                let mut s = String::new();
                s.push_str(IM_START);
                s.push_str("user: ");
                if i == 0 {
                    for _ in 0..image_count {
                        s.push_str(IMAGE_TOKEN);
                    }
                }
                s.push('"');
                s.push_str(&turn.text);
                s.push('"');
                s.push_str(IM_END);
                parts.push(s);
            }
            Role::Assistant => {
                parts.push(format!("{IM_START}assistant: \"{}\" {IM_END}", turn.text));
            }
        }
    }
    parts.join(" ")
}

/// Inverse of [`serialize_conversation`]: recovers the turns and the image
/// count from the wire format.
pub fn parse_conversation(text: &str) -> Result<(Vec<Turn>, usize), ConversationError> {
    if !text.starts_with(IM_START) {
        return Err(ConversationError::Parse("missing leading turn marker".into()));
    }
    let mut turns = Vec::new();
    let mut image_count = 0usize;
    let segments: Vec<&str> = text[IM_START.len()..]
        .split(IM_START)
        .collect();
    for (i, segment) in segments.iter().enumerate() {
        let (role, rest) = if let Some(rest) = segment.strip_prefix("user: ") {
            (Role::User, rest)
        } else if let Some(rest) = segment.strip_prefix("assistant: ") {
            (Role::Assistant, rest)
        } else {
            return Err(ConversationError::Parse(format!(
                "segment {i} has no role prefix"
            )));
        };
        let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
        if role != expected {
            return Err(ConversationError::BadAlternation);
        }
        let mut rest = rest;
        if role == Role::User {
            let mut count = 0usize;
            while let Some(r) = rest.strip_prefix(IMAGE_TOKEN) {
                count += 1;
                rest = r;
            }
            if i == 0 {
                if count == 0 {
                    return Err(ConversationError::Parse(
                        "first user turn carries no image placeholder".into(),
                    ));
                }
                image_count = count;
            } else if count != 0 {
                return Err(ConversationError::Parse(
                    "image placeholders outside the first user turn".into(),
                ));
            }
        }
        let end_idx = rest.find(IM_END).ok_or_else(|| {
            ConversationError::Parse(format!("segment {i} missing {IM_END}"))
        })?;
        let (body, after) = rest.split_at(end_idx);
        let after = &after[IM_END.len()..];
        let is_last = i + 1 == segments.len();
        let expected_after = if is_last { "" } else { " " };
        if after != expected_after {
            return Err(ConversationError::Parse(format!(
                "unexpected bytes after segment {i}"
            )));
        }
        let body = match role {
            Role::User => body
                .strip_prefix('"')
                .and_then(|b| b.strip_suffix('"'))
                .ok_or_else(|| ConversationError::Parse(format!("segment {i} not quoted")))?,
            Role::Assistant => body
                .strip_prefix('"')
                .and_then(|b| b.strip_suffix("\" "))
                .ok_or_else(|| ConversationError::Parse(format!("segment {i} not quoted")))?,
        };
        if body.is_empty() {
            return Err(ConversationError::EmptyTurn);
        }
        turns.push(Turn { role, text: body.to_string() });
    }
    Ok((turns, image_count))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qa(q: &str, a: &str) -> Vec<Turn> {
        vec![Turn::user(q), Turn::assistant(a)]
    }

    #[test]
    fn single_image_template_is_exact() {
        let rendered = serialize_conversation(&qa("question here", "answer here"), 1).unwrap();
        assert_eq!(
            rendered,
            "<|im_start|>user: <img>\"<image>\"</img> \"question here\"<|im_end|> \
             <|im_start|>assistant: \"answer here\" <|im_end|>"
        );
    }

    #[test]
    fn one_qa_pair_token_counts() {
        let rendered = serialize_conversation(&qa("q", "a"), 1).unwrap();
        assert_eq!(rendered.matches("<img>\"<image>\"</img>").count(), 1);
        assert_eq!(rendered.matches(IM_START).count(), 2);
    }

    #[test]
    fn eight_pages_emit_eight_placeholders() {
        let rendered = serialize_conversation(&qa("q", "a"), 8).unwrap();
        assert_eq!(rendered.matches(IMAGE_PLACEHOLDER).count(), 8);
    }

    #[test]
    fn roundtrip_multiturn() {
        let turns = vec![
            Turn::user("first question"),
            Turn::assistant("first answer"),
            Turn::user("second question"),
            Turn::assistant("second answer"),
        ];
        let rendered = serialize_conversation(&turns, 2).unwrap();
        let (parsed, images) = parse_conversation(&rendered).unwrap();
        assert_eq!(parsed, turns);
        assert_eq!(images, 2);
    }

    #[test]
    fn roundtrip_texts_with_quotes() {
        let turns = qa("say \"hi\" now", "ok \"hi\"");
        let rendered = serialize_conversation(&turns, 1).unwrap();
        let (parsed, _) = parse_conversation(&rendered).unwrap();
        assert_eq!(parsed, turns);
    }

    #[test]
    fn reserved_delimiters_rejected() {
        for bad in ["x <|im_end|> y", "a <image> b", "a <img> b"] {
            let err = serialize_conversation(&qa(bad, "a"), 1);
            assert!(matches!(err, Err(ConversationError::ReservedDelimiter(_))), "{bad}");
        }
    }

    #[test]
    fn alternation_enforced() {
        let turns = vec![Turn::assistant("a"), Turn::user("q")];
        assert_eq!(
            serialize_conversation(&turns, 1),
            Err(ConversationError::BadAlternation)
        );
    }

    #[test]
    fn parse_rejects_mangled_input() {
        assert!(parse_conversation("garbage").is_err());
        let ok = serialize_conversation(&qa("q", "a"), 1).unwrap();
        assert!(parse_conversation(&ok[..ok.len() - 3]).is_err());
    }
}
