//! Mention masking and unmasking.
//!
//! Masking replaces each annotated mention span with a token of the form
//! `[MASK_k(Ndigits)]` (singular `digit` for N = 1), numbering masks in
//! first-occurrence order. Unmasking substitutes each token with the
//! ascending concatenation of the filled player digits, so on text whose
//! spans cover bare digit clusters the two operations are exact inverses.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::game::PlayerId;
use crate::session::{AnnotatedText, MentionSpan};

/// A masked text template together with the ground-truth fill.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedText {
    pub template: String,
    pub answers: BTreeMap<u32, Vec<PlayerId>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MaskError {
    #[error("fill is missing mask index {0}")]
    MissingMask(u32),
    #[error("mask {index} declares {declared} digits but fill has {got}")]
    DigitCountMismatch { index: u32, declared: usize, got: usize },
    #[error("fill contains unknown mask index {0}")]
    UnknownMask(u32),
}

/// Renders the mask token for index `k` over `n` digits.
pub fn mask_token(k: u32, n: usize) -> String {
    if n == 1 {
        format!("[MASK_{k}(1digit)]")
    } else {
        format!("[MASK_{k}({n}digits)]")
    }
}

/// Replaces every mention span with a mask token. Span offsets are character
/// offsets; spans are required (and validated upstream) to be ordered and
/// non-overlapping.
pub fn mask_text(annotated: &AnnotatedText) -> MaskedText {
    let chars: Vec<char> = annotated.text_primary.chars().collect();
    let mut template = String::new();
    let mut answers = BTreeMap::new();
    let mut cursor = 0usize;
    for (i, span) in annotated.mentions.iter().enumerate() {
        let k = i as u32 + 1;
        template.extend(&chars[cursor..span.start]);
        template.push_str(&mask_token(k, span.players.len()));
        answers.insert(k, span.players.clone());
        cursor = span.end;
    }
    template.extend(&chars[cursor..]);
    MaskedText { template, answers }
}

/// One `[MASK_k(Ndigits)]` token found in a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskToken {
    pub index: u32,
    pub digits: usize,
    /// Byte range of the token within the template.
    pub range: (usize, usize),
}

/// Scans a template for well-formed mask tokens in textual order.
pub fn parse_mask_tokens(template: &str) -> Vec<MaskToken> {
    let mut out = Vec::new();
    let mut pos = 0usize;
    while let Some(found) = template[pos..].find("[MASK_") {
        let start = pos + found;
        pos = start + 1;
        let rest = &template[start..];
        let Some(close) = rest.find(']') else { continue };
        let token = &rest[..=close];
        if let Some(parsed) = parse_single_token(token) {
            out.push(MaskToken {
                index: parsed.0,
                digits: parsed.1,
                range: (start, start + token.len()),
            });
            pos = start + token.len();
        }
    }
    out
}

fn parse_single_token(token: &str) -> Option<(u32, usize)> {
    // [MASK_ k ( n digit[s] )]
    let inner = token.strip_prefix("[MASK_")?.strip_suffix(")]")?;
    let (k_str, rest) = inner.split_once('(')?;
    let index: u32 = k_str.parse().ok()?;
    let digits: usize;
    if let Some(n_str) = rest.strip_suffix("digits") {
        digits = n_str.parse().ok()?;
        if digits < 2 {
            return None;
        }
    } else if let Some(n_str) = rest.strip_suffix("digit") {
        digits = n_str.parse().ok()?;
        if digits != 1 {
            return None;
        }
    } else {
        return None;
    }
    Some((index, digits))
}

/// Substitutes every mask token with the ascending digit rendering of the
/// fill. The fill must cover exactly the template's mask indices with
/// matching digit counts.
pub fn unmask(
    masked: &MaskedText,
    fill: &BTreeMap<u32, Vec<PlayerId>>,
) -> Result<String, MaskError> {
    let tokens = parse_mask_tokens(&masked.template);
    for k in fill.keys() {
        if !tokens.iter().any(|t| t.index == *k) {
            return Err(MaskError::UnknownMask(*k));
        }
    }
    let mut out = String::new();
    let mut cursor = 0usize;
    for token in &tokens {
        let players = fill
            .get(&token.index)
            .ok_or(MaskError::MissingMask(token.index))?;
        if players.len() != token.digits {
            return Err(MaskError::DigitCountMismatch {
                index: token.index,
                declared: token.digits,
                got: players.len(),
            });
        }
        out.push_str(&masked.template[cursor..token.range.0]);
        let mut sorted = players.clone();
        sorted.sort();
        for p in sorted {
            out.push_str(&p.get().to_string());
        }
        cursor = token.range.1;
    }
    out.push_str(&masked.template[cursor..]);
    Ok(out)
}

/// Extracts mention spans for the two unambiguous textual reference forms:
/// `Player N` and `N号`. Bare digit clusters are intentionally not extracted
/// — corpora annotate those explicitly.
pub fn extract_mentions(text: &str) -> Vec<MentionSpan> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < chars.len() {
        // `N号` form: single digit followed by 号.
        if chars[i].is_ascii_digit() && i + 1 < chars.len() && chars[i + 1] == '号' {
            let digit = chars[i].to_digit(10).unwrap() as u8;
            if let Ok(player) = PlayerId::new(digit) {
                // Reject when part of a longer digit run (e.g. `45号`).
                let run_start = i == 0 || !chars[i - 1].is_ascii_digit();
                if run_start {
                    out.push(MentionSpan {
                        start: i,
                        end: i + 1,
                        players: vec![player],
                    });
                }
            }
            i += 2;
            continue;
        }
        // `Player N` form.
        if chars[i..].starts_with(&['P', 'l', 'a', 'y', 'e', 'r', ' ']) {
            let j = i + 7;
            if j < chars.len() && chars[j].is_ascii_digit() {
                let next_is_digit = j + 1 < chars.len() && chars[j + 1].is_ascii_digit();
                let digit = chars[j].to_digit(10).unwrap() as u8;
                if !next_is_digit {
                    if let Ok(player) = PlayerId::new(digit) {
                        out.push(MentionSpan {
                            start: j,
                            end: j + 1,
                            players: vec![player],
                        });
                    }
                }
                i = j + 1;
                continue;
            }
        }
        i += 1;
    }
    out
}
