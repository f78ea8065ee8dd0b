//! Text-similarity metric suite used by the benchmark: normalized edit
//! distance, token F1/precision/recall, corpus BLEU-4, an exact-match METEOR
//! variant, ROUGE-L, and page-label VQA accuracy.
//!
//! All scores live in `[0, 1]`. Tokenization is whitespace splitting for
//! Latin-dominant pairs and per-scalar for CJK-dominant pairs, so
//! unsegmented Chinese output is not penalized. Inputs are NFC-normalized
//! before scoring.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// One prediction/reference pair, NFC-normalized at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorePair {
    pub prediction: String,
    pub reference: String,
}

impl ScorePair {
    pub fn new(prediction: &str, reference: &str) -> Self {
        Self {
            prediction: prediction.nfc().collect(),
            reference: reference.nfc().collect(),
        }
    }
}

/// Per-split scores. Fields are `None` when the metric does not apply to the
/// split that produced the report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edit_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bleu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meteor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge_l_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge_l_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rouge_l_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub samples: usize,
}

// --- tokenization ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenMode {
    Whitespace,
    PerScalar,
}

fn is_cjk(c: char) -> bool {
    matches!(u32::from(c),
        0x3000..=0x303F      // CJK punctuation
        | 0x3040..=0x30FF    // kana
        | 0x3400..=0x4DBF    // ideograph extension A
        | 0x4E00..=0x9FFF    // unified ideographs
        | 0xF900..=0xFAFF    // compatibility ideographs
        | 0xFF00..=0xFFEF    // fullwidth forms
        | 0x20000..=0x2A6DF) // ideograph extension B
}

/// Picks the tokenization for a pair: per-scalar when the majority of
/// non-whitespace scalars across both strings is CJK, whitespace otherwise.
pub fn token_mode(prediction: &str, reference: &str) -> TokenMode {
    let mut cjk = 0usize;
    let mut other = 0usize;
    for c in prediction.chars().chain(reference.chars()) {
        if c.is_whitespace() {
            continue;
        }
        if is_cjk(c) {
            cjk += 1;
        } else {
            other += 1;
        }
    }
    if cjk > other {
        TokenMode::PerScalar
    } else {
        TokenMode::Whitespace
    }
}

pub fn tokenize(text: &str, mode: TokenMode) -> Vec<String> {
    match mode {
        TokenMode::Whitespace => text.split_whitespace().map(str::to_string).collect(),
        TokenMode::PerScalar => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
    }
}

fn pair_tokens(pair: &ScorePair) -> (Vec<String>, Vec<String>) {
    let mode = token_mode(&pair.prediction, &pair.reference);
    (tokenize(&pair.prediction, mode), tokenize(&pair.reference, mode))
}

// --- edit distance -----------------------------------------------------------

/// Levenshtein distance over Unicode scalars divided by the longer length;
/// 0 when both sides are empty.
pub fn norm_edit_distance(pair: &ScorePair) -> f64 {
    let a: Vec<char> = pair.prediction.chars().collect();
    let b: Vec<char> = pair.reference.chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(&a, &b) as f64 / longest as f64
}

pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a == b {
        return 0;
    }
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr: Vec<usize> = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            curr[j + 1] = sub.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

// --- token F1 ----------------------------------------------------------------

/// Multiset token overlap. Returns `(precision, recall, f1)`; an empty pair
/// scores 1.0 across the board, a one-sided empty scores 0.0.
pub fn token_f1(pair: &ScorePair) -> (f64, f64, f64) {
    let (pred, reference) = pair_tokens(pair);
    if pred.is_empty() && reference.is_empty() {
        return (1.0, 1.0, 1.0);
    }
    if pred.is_empty() || reference.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for t in &reference {
        *ref_counts.entry(t.as_str()).or_insert(0) += 1;
    }
    let mut overlap = 0usize;
    for t in &pred {
        if let Some(c) = ref_counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    let precision = overlap as f64 / pred.len() as f64;
    let recall = overlap as f64 / reference.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}

// --- BLEU --------------------------------------------------------------------

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus-level BLEU-4 with add-one smoothing on the n>1 precisions and the
/// standard brevity penalty.
pub fn bleu(pairs: &[ScorePair]) -> f64 {
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let mut pred_len = 0usize;
    let mut ref_len = 0usize;
    for pair in pairs {
        let (pred, reference) = pair_tokens(pair);
        pred_len += pred.len();
        ref_len += reference.len();
        for n in 1..=4 {
            let ref_counts = ngram_counts(&reference, n);
            let pred_counts = ngram_counts(&pred, n);
            for (gram, &count) in &pred_counts {
                let clip = ref_counts.get(gram).copied().unwrap_or(0);
                matches[n - 1] += count.min(clip);
            }
            totals[n - 1] += pred.len().saturating_sub(n - 1);
        }
    }
    if pred_len == 0 || totals[0] == 0 || matches[0] == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..4 {
        let p = if n == 0 {
            matches[0] as f64 / totals[0] as f64
        } else {
            (matches[n] as f64 + 1.0) / (totals[n] as f64 + 1.0)
        };
        log_sum += 0.25 * p.ln();
    }
    let bp = if pred_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / pred_len as f64).exp()
    };
    bp * log_sum.exp()
}

// --- METEOR ------------------------------------------------------------------

/// Exact-match METEOR: leftmost-greedy unigram alignment,
/// `F_mean = 10PR / (R + 9P)`, fragmentation penalty
/// `0.5 * (chunks / matches)^3`. Zero when nothing aligns.
pub fn meteor_lite(pair: &ScorePair) -> f64 {
    let (pred, reference) = pair_tokens(pair);
    if pred.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let mut ref_used = vec![false; reference.len()];
    // (pred index, ref index) pairs in pred order
    let mut alignment: Vec<(usize, usize)> = Vec::new();
    for (i, token) in pred.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !ref_used[j] && reference[j] == *token) {
            ref_used[j] = true;
            alignment.push((i, j));
        }
    }
    let m = alignment.len();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / pred.len() as f64;
    let recall = m as f64 / reference.len() as f64;
    let f_mean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let mut chunks = 1usize;
    for w in alignment.windows(2) {
        let contiguous = w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1;
        if !contiguous {
            chunks += 1;
        }
    }
    let penalty = 0.5 * (chunks as f64 / m as f64).powi(3);
    f_mean * (1.0 - penalty)
}

// --- ROUGE-L -----------------------------------------------------------------

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for ta in a {
        for (j, tb) in b.iter().enumerate() {
            curr[j + 1] = if ta == tb {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Token-level LCS recall/precision/F (β = 1). Zeros on empty sides.
pub fn rouge_l(pair: &ScorePair) -> (f64, f64, f64) {
    let (pred, reference) = pair_tokens(pair);
    if pred.is_empty() || reference.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let lcs = lcs_len(&pred, &reference) as f64;
    let recall = lcs / reference.len() as f64;
    let precision = lcs / pred.len() as f64;
    let f = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (recall, precision, f)
}

// --- VQA accuracy ------------------------------------------------------------

fn canonical_label(text: &str) -> String {
    text.trim()
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Fraction of predictions whose canonicalized page label (case- and
/// whitespace-insensitive) equals the reference label.
pub fn vqa_accuracy(pairs: &[ScorePair]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let correct = pairs
        .iter()
        .filter(|p| canonical_label(&p.prediction) == canonical_label(&p.reference))
        .count();
    correct as f64 / pairs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(p: &str, r: &str) -> ScorePair {
        ScorePair::new(p, r)
    }

    #[test]
    fn edit_distance_examples() {
        assert_eq!(norm_edit_distance(&pair("abc", "abc")), 0.0);
        assert_eq!(norm_edit_distance(&pair("", "abc")), 1.0);
        assert_eq!(norm_edit_distance(&pair("", "")), 0.0);
        let d = norm_edit_distance(&pair("kitten", "sitting"));
        assert_eq!(d, 3.0 / 7.0);
    }

    #[test]
    fn token_f1_examples() {
        assert_eq!(token_f1(&pair("same text", "same text")), (1.0, 1.0, 1.0));
        let (p, r, f) = token_f1(&pair("a b c", "a b d"));
        assert!((p - 2.0 / 3.0).abs() < 1e-12);
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert!((f - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(token_f1(&pair("", "x")), (0.0, 0.0, 0.0));
        assert_eq!(token_f1(&pair("", "")), (1.0, 1.0, 1.0));
    }

    #[test]
    fn token_f1_swaps_precision_recall() {
        let (p1, r1, f1a) = token_f1(&pair("a b", "a b c"));
        let (p2, r2, f1b) = token_f1(&pair("a b c", "a b"));
        assert_eq!((p1, r1), (r2, p2));
        assert_eq!(f1a, f1b);
    }

    #[test]
    fn cjk_pairs_tokenize_per_scalar() {
        assert_eq!(token_mode("你好世界", "你好"), TokenMode::PerScalar);
        assert_eq!(token_mode("hello world", "hello"), TokenMode::Whitespace);
        // Unsegmented Chinese still matches.
        let (_, _, f) = token_f1(&pair("你好世界", "你好世界"));
        assert_eq!(f, 1.0);
        let (_, r, _) = token_f1(&pair("你好", "你好世界"));
        assert_eq!(r, 0.5);
    }

    #[test]
    fn bleu_identical_corpus_is_one() {
        let pairs = vec![pair("the cat sat down", "the cat sat down"), pair("a b", "a b")];
        assert!((bleu(&pairs) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_disjoint_is_zero() {
        assert_eq!(bleu(&[pair("x y z", "a b c")]), 0.0);
    }

    #[test]
    fn bleu_hand_computed_brevity_case() {
        // p1..p4 all 1 under add-one smoothing; only the brevity penalty
        // remains: exp(1 - 4/3).
        let score = bleu(&[pair("the cat sat", "the cat sat down")]);
        let expected = (1.0_f64 - 4.0 / 3.0).exp();
        assert!((score - expected).abs() < 1e-12, "{score} vs {expected}");
    }

    #[test]
    fn meteor_examples() {
        assert_eq!(meteor_lite(&pair("x y", "a b")), 0.0);
        let s = meteor_lite(&pair("a b c d", "a b c d"));
        assert!((s - 0.9921875).abs() < 1e-12);
        let s = meteor_lite(&pair("a", "a"));
        assert!((s - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge_l(&pair("a b c", "a b c")), (1.0, 1.0, 1.0));
        assert_eq!(rouge_l(&pair("x y", "a b")), (0.0, 0.0, 0.0));
        let (r, p, f) = rouge_l(&pair("a b c d", "a c e"));
        assert!((r - 2.0 / 3.0).abs() < 1e-12);
        assert!((p - 0.5).abs() < 1e-12);
        assert!((f - 4.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn vqa_accuracy_examples() {
        let pairs = vec![pair("Page 2", "page  2"), pair("page 1", "Page 1")];
        assert_eq!(vqa_accuracy(&pairs), 1.0);
        let pairs: Vec<ScorePair> = (0..8)
            .map(|i| {
                if i < 5 {
                    pair("Page 1", "Page 1")
                } else {
                    pair("Page 2", "Page 1")
                }
            })
            .collect();
        assert_eq!(vqa_accuracy(&pairs), 0.625);
    }

    #[test]
    fn nfc_applied_before_scoring() {
        // e + combining acute vs precomposed é
        let p = pair("caf\u{0065}\u{0301}", "caf\u{00e9}");
        assert_eq!(norm_edit_distance(&p), 0.0);
    }
}
