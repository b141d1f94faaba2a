//! Note-correctness scoring and melody queries.
//!
//! The score of a recording `R` against a target `T` is
//! `100 * |LCS(T, R)| / |T|` over rounded note numbers; timing is ignored.

use std::ops::Range;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::notes::{note_name, NoteSequence};
use crate::segmentation::Region;

/// Default score a candidate must exceed to count as containing a query.
pub const QUERY_MATCH_THRESHOLD: f64 = 80.0;

/// Suffix LCS table: `table[i][j]` is the LCS length of `a[i..]` and `b[j..]`.
fn suffix_table(a: &[u8], b: &[u8]) -> Vec<Vec<u32>> {
    let mut table = vec![vec![0u32; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            table[i][j] = if a[i] == b[j] {
                table[i + 1][j + 1] + 1
            } else {
                table[i + 1][j].max(table[i][j + 1])
            };
        }
    }
    table
}

/// Length of the longest common subsequence.
pub fn lcs_length(a: &[u8], b: &[u8]) -> usize {
    // two-row DP; the full table is only needed for alignments
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for &x in a {
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// One optimal LCS alignment as `(target index, recording index)` pairs.
///
/// Among all optimal alignments this picks the one whose matched target
/// indices are lexicographically smallest, each matched at the earliest
/// recording position that keeps the alignment optimal.
pub fn lcs_alignment(target: &[u8], recording: &[u8]) -> Vec<(usize, usize)> {
    let table = suffix_table(target, recording);
    let mut pairs = Vec::new();
    let mut j = 0;
    for i in 0..target.len() {
        let remaining = table[i][j];
        if remaining == 0 {
            break;
        }
        if let Some(k) = (j..recording.len())
            .find(|&k| recording[k] == target[i] && table[i + 1][k + 1] + 1 == remaining)
        {
            pairs.push((i, k));
            j = k + 1;
        }
    }
    pairs
}

/// A contiguous run of equal elements: `target[a..a+len] == recording[b..b+len]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBlock {
    pub target_start: usize,
    pub recording_start: usize,
    pub len: usize,
}

/// Index ranges (half-open) that differ between target and recording.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MismatchSpan {
    pub target: Range<usize>,
    pub recording: Range<usize>,
}

fn longest_match(a: &[u8], b: &[u8], alo: usize, ahi: usize, blo: usize, bhi: usize) -> MatchingBlock {
    let mut best = MatchingBlock {
        target_start: alo,
        recording_start: blo,
        len: 0,
    };
    // run[j] = length of the common suffix ending at a[i-1], b[j-1]
    let mut run = vec![0usize; bhi - blo + 1];
    for i in alo..ahi {
        let mut next = vec![0usize; bhi - blo + 1];
        for j in blo..bhi {
            if a[i] == b[j] {
                let len = run[j - blo] + 1;
                next[j - blo + 1] = len;
                let (ts, rs) = (i + 1 - len, j + 1 - len);
                let better = len > best.len
                    || (len == best.len && (ts, rs) < (best.target_start, best.recording_start));
                if better {
                    best = MatchingBlock {
                        target_start: ts,
                        recording_start: rs,
                        len,
                    };
                }
            }
        }
        run = next;
    }
    best
}

/// Ratcliff/Obershelp matching blocks, in order.
pub fn matching_blocks(target: &[u8], recording: &[u8]) -> Vec<MatchingBlock> {
    let mut blocks = Vec::new();
    let mut stack = vec![(0, target.len(), 0, recording.len())];
    while let Some((alo, ahi, blo, bhi)) = stack.pop() {
        if alo >= ahi || blo >= bhi {
            continue;
        }
        let m = longest_match(target, recording, alo, ahi, blo, bhi);
        if m.len == 0 {
            continue;
        }
        blocks.push(m);
        stack.push((alo, m.target_start, blo, m.recording_start));
        stack.push((m.target_start + m.len, ahi, m.recording_start + m.len, bhi));
    }
    blocks.sort_by_key(|m| (m.target_start, m.recording_start));
    blocks
}

/// Everything between matching blocks.
pub fn mismatch_blocks(target: &[u8], recording: &[u8]) -> Vec<MismatchSpan> {
    let mut spans = Vec::new();
    let (mut a, mut b) = (0, 0);
    let sentinel = MatchingBlock {
        target_start: target.len(),
        recording_start: recording.len(),
        len: 0,
    };
    for m in matching_blocks(target, recording).into_iter().chain([sentinel]) {
        if a < m.target_start || b < m.recording_start {
            spans.push(MismatchSpan {
                target: a..m.target_start,
                recording: b..m.recording_start,
            });
        }
        a = m.target_start + m.len;
        b = m.recording_start + m.len;
    }
    spans
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanTimes {
    pub target: TimeInterval,
    pub recording: TimeInterval,
}

fn range_to_time(range: &Range<usize>, seq: &NoteSequence) -> TimeInterval {
    let notes = &seq.notes;
    if range.is_empty() {
        // zero width at the end of the preceding note, or the start of the next
        let at = if range.start > 0 {
            notes.get(range.start - 1).map(|n| n.end())
        } else {
            notes.first().map(|n| n.onset)
        }
        .unwrap_or(0.0);
        return TimeInterval { start: at, end: at };
    }
    let covered = &notes[range.start..range.end.min(notes.len())];
    let start = covered.iter().map(|n| n.onset).fold(f64::INFINITY, f64::min);
    let end = covered.iter().map(|n| n.end()).fold(f64::NEG_INFINITY, f64::max);
    TimeInterval { start, end }
}

/// Maps index spans to time intervals on each sequence's own timeline.
pub fn spans_to_time(spans: &[MismatchSpan], target: &NoteSequence, recording: &NoteSequence) -> Vec<SpanTimes> {
    spans
        .iter()
        .map(|s| SpanTimes {
            target: range_to_time(&s.target, target),
            recording: range_to_time(&s.recording, recording),
        })
        .collect()
}

fn two_decimals<S: Serializer>(value: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64((value * 100.0).round() / 100.0)
}

fn two_decimals_opt<S: Serializer>(value: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => two_decimals(v, s),
        None => s.serialize_none(),
    }
}

mod span_serde {
    use super::MismatchSpan;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wire {
        t: [usize; 2],
        r: [usize; 2],
    }

    pub fn serialize<S: Serializer>(spans: &[MismatchSpan], s: S) -> Result<S::Ok, S::Error> {
        let wire: Vec<Wire> = spans
            .iter()
            .map(|m| Wire {
                t: [m.target.start, m.target.end],
                r: [m.recording.start, m.recording.end],
            })
            .collect();
        wire.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<MismatchSpan>, D::Error> {
        Ok(Vec::<Wire>::deserialize(d)?
            .into_iter()
            .map(|w| MismatchSpan {
                target: w.t[0]..w.t[1],
                recording: w.r[0]..w.r[1],
            })
            .collect())
    }
}

/// Outcome of scoring one recording against a target.
///
/// Spans are half-open `[start, end)` note-index ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    #[serde(rename = "score", serialize_with = "two_decimals")]
    pub score_percent: f64,
    #[serde(rename = "matched")]
    pub matched_count: usize,
    #[serde(rename = "target_total")]
    pub target_count: usize,
    #[serde(rename = "missed")]
    pub missed_notes: Vec<String>,
    #[serde(rename = "spans", with = "span_serde")]
    pub mismatch_spans: Vec<MismatchSpan>,
    pub overridden: bool,
    #[serde(rename = "manual", serialize_with = "two_decimals_opt")]
    pub manual_score: Option<f64>,
}

impl ScoreReport {
    /// Manual score when overridden, the computed score otherwise.
    pub fn effective_score(&self) -> f64 {
        match (self.overridden, self.manual_score) {
            (true, Some(m)) => m,
            _ => self.score_percent,
        }
    }

    /// Whether this attempt counts as a perfect score.
    pub fn is_perfect(&self) -> bool {
        match (self.overridden, self.manual_score) {
            (true, Some(m)) => m >= 100.0,
            _ => self.target_count > 0 && self.matched_count == self.target_count,
        }
    }
}

pub fn score_sequences(target: &[u8], recording: &[u8]) -> Result<ScoreReport> {
    if target.is_empty() {
        return Err(Error::EmptyTarget);
    }
    let alignment = lcs_alignment(target, recording);
    let matched = alignment.len();
    let mut covered = vec![false; target.len()];
    for &(i, _) in &alignment {
        covered[i] = true;
    }
    let missed_notes = target
        .iter()
        .zip(&covered)
        .filter(|(_, &hit)| !hit)
        .map(|(&m, _)| note_name(m))
        .collect();
    Ok(ScoreReport {
        score_percent: 100.0 * matched as f64 / target.len() as f64,
        matched_count: matched,
        target_count: target.len(),
        missed_notes,
        mismatch_spans: mismatch_blocks(target, recording),
        overridden: false,
        manual_score: None,
    })
}

pub fn score_performance(target: &NoteSequence, recording: &NoteSequence) -> Result<ScoreReport> {
    score_sequences(&target.midi(), &recording.midi())
}

/// Candidates whose sequence scores strictly above `match_threshold` with the
/// query as target, in timeline order.
pub fn query_regions(
    query: &NoteSequence,
    candidates: &[(Region, NoteSequence)],
    match_threshold: f64,
) -> Result<Vec<Region>> {
    if query.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let q = query.midi();
    let mut hits: Vec<Region> = candidates
        .iter()
        .filter(|(_, seq)| {
            let matched = lcs_length(&q, &seq.midi());
            100.0 * matched as f64 / q.len() as f64 > match_threshold
        })
        .map(|(r, _)| r.clone())
        .collect();
    hits.sort_by(|a, b| a.start.total_cmp(&b.start));
    Ok(hits)
}

/// Marks the report as overridden by a self-assessed score.
pub fn apply_manual_score(report: &ScoreReport, manual: f64) -> Result<ScoreReport> {
    if !(0.0..=100.0).contains(&manual) {
        return Err(Error::InvalidArgument(format!("manual score {manual} is outside [0, 100]")));
    }
    Ok(ScoreReport {
        overridden: true,
        manual_score: Some(manual),
        ..report.clone()
    })
}
