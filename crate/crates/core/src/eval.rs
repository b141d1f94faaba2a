//! Segmentation quality against human labels.
//!
//! Frame-level precision/recall/F1 on 0.02 s frames, segment-level boundary
//! similarity on 1 s boundaries with a near-miss window, and two reference
//! baselines (random and uniform segmentation).

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::{round_time, LearningState, Region, RegionSource, Track};

pub const FRAME_SECONDS: f64 = 0.02;
pub const BOUNDARY_GRANULARITY: f64 = 1.0;
pub const NEAR_MISS_WINDOW: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameLabeling {
    pub frame_seconds: f64,
    pub labels: Vec<bool>,
}

fn frame_count(duration: f64, frame_seconds: f64) -> usize {
    (duration / frame_seconds - 1e-9).ceil().max(0.0) as usize
}

fn check_disjoint(regions: &[Region]) -> Result<Vec<&Region>> {
    let mut sorted: Vec<&Region> = regions.iter().collect();
    sorted.sort_by(|a, b| a.start.total_cmp(&b.start));
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end - 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "regions {} and {} overlap",
                pair[0].id, pair[1].id
            )));
        }
    }
    Ok(sorted)
}

/// Frame `i` is positive iff its centre lies in some region.
pub fn regions_to_frames(regions: &[Region], duration: f64, frame_seconds: f64) -> Result<FrameLabeling> {
    if !(frame_seconds > 0.0) {
        return Err(Error::InvalidArgument("frame length must be positive".into()));
    }
    let sorted = check_disjoint(regions)?;
    let n = frame_count(duration, frame_seconds);
    let mut labels = vec![false; n];
    for r in sorted {
        let first = ((r.start / frame_seconds - 0.5).ceil().max(0.0)) as usize;
        for (i, label) in labels.iter_mut().enumerate().skip(first) {
            let centre = (i as f64 + 0.5) * frame_seconds;
            if centre >= r.end {
                break;
            }
            if centre >= r.start {
                *label = true;
            }
        }
    }
    Ok(FrameLabeling { frame_seconds, labels })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn frame_metrics(predicted: &FrameLabeling, truth: &FrameLabeling) -> Result<FrameMetrics> {
    if predicted.labels.len() != truth.labels.len() {
        return Err(Error::InvalidArgument(format!(
            "frame counts differ: {} predicted vs {} truth",
            predicted.labels.len(),
            truth.labels.len()
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in predicted.labels.iter().zip(&truth.labels) {
        match (p, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(FrameMetrics { precision, recall, f1 })
}

/// Sorted, de-duplicated boundary positions in granularity units.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BoundarySet(Vec<i64>);

impl BoundarySet {
    pub fn new(mut positions: Vec<i64>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        Self(positions)
    }

    pub fn positions(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn regions_to_boundaries(regions: &[Region], granularity: f64) -> BoundarySet {
    BoundarySet::new(
        regions
            .iter()
            .flat_map(|r| [r.start, r.end])
            .map(|t| (t / granularity).round() as i64)
            .collect(),
    )
}

/// Result of pairing two boundary sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryPairing {
    /// Pairs at distance zero.
    pub exact: usize,
    /// Pairs at distance in `1..window`.
    pub near: usize,
    /// Sum of near-miss distances, in granularity units.
    pub near_distance: i64,
    /// Unpaired boundaries on either side.
    pub full_misses: usize,
}

impl BoundaryPairing {
    pub fn pairs(&self) -> usize {
        self.exact + self.near
    }

    /// Edit cost scaled by the window: near misses cost `d`, full misses `window`.
    pub fn scaled_cost(&self, window: u32) -> i64 {
        self.near_distance + window as i64 * self.full_misses as i64
    }

    pub fn similarity(&self, window: u32) -> f64 {
        let denom = self.pairs() + self.full_misses;
        if denom == 0 {
            return 1.0;
        }
        1.0 - self.scaled_cost(window) as f64 / (window as f64 * denom as f64)
    }
}

/// Minimum-cost pairing of two boundary sets.
///
/// Boundaries closer than `window` may pair at cost `d / window`; anything left
/// is a full miss at cost 1. Among equal-cost pairings the one with more pairs
/// wins. Optimal pairings of points on a line never cross, so a dynamic
/// program over the two sorted sequences is exact.
pub fn pair_boundaries(a: &BoundarySet, b: &BoundarySet, window: u32) -> BoundaryPairing {
    let (a, b) = (a.positions(), b.positions());
    let w = window as i64;
    // (scaled cost, -pairs, exact, near, near_distance, misses)
    type Cell = (i64, i64, usize, usize, i64, usize);
    let start: Cell = (0, 0, 0, 0, 0, 0);
    let mut table = vec![vec![start; b.len() + 1]; a.len() + 1];
    let miss = |c: Cell| -> Cell { (c.0 + w, c.1, c.2, c.3, c.4, c.5 + 1) };
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            if i == 0 && j == 0 {
                continue;
            }
            let mut best: Option<Cell> = None;
            let mut consider = |c: Cell| {
                if best.map_or(true, |b| (c.0, c.1) < (b.0, b.1)) {
                    best = Some(c);
                }
            };
            if i > 0 {
                consider(miss(table[i - 1][j]));
            }
            if j > 0 {
                consider(miss(table[i][j - 1]));
            }
            if i > 0 && j > 0 {
                let d = (a[i - 1] - b[j - 1]).abs();
                if d < w {
                    let p = table[i - 1][j - 1];
                    let (exact, near, dist) = if d == 0 { (p.2 + 1, p.3, p.4) } else { (p.2, p.3 + 1, p.4 + d) };
                    consider((p.0 + d, p.1 - 1, exact, near, dist, p.5));
                }
            }
            table[i][j] = best.expect("at least one transition applies");
        }
    }
    let c = table[a.len()][b.len()];
    BoundaryPairing {
        exact: c.2,
        near: c.3,
        near_distance: c.4,
        full_misses: c.5,
    }
}

/// Boundary similarity in [0, 1]; 1 for identical sets (including two empty sets).
pub fn boundary_similarity(a: &BoundarySet, b: &BoundarySet, near_miss_window: u32) -> Result<f64> {
    if near_miss_window < 1 {
        return Err(Error::InvalidArgument("near-miss window must be at least 1".into()));
    }
    Ok(pair_boundaries(a, b, near_miss_window).similarity(near_miss_window))
}

fn baseline_region(prefix: &str, k: usize, start: f64, end: f64) -> Region {
    Region {
        id: format!("{prefix}-{k}"),
        start: round_time(start),
        end: round_time(end),
        track: Track::Instrument,
        source: RegionSource::Auto,
        state: LearningState::ToLearn,
    }
}

/// As many regions as the truth has, from 2k sorted uniform draws on `[0, duration]`.
pub fn random_baseline(truth: &[Region], duration: f64, seed: u64) -> Result<Vec<Region>> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument("duration must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<f64> = (0..2 * truth.len()).map(|_| rng.gen_range(0.0..=duration)).collect();
    points.sort_by(f64::total_cmp);
    Ok(points
        .chunks_exact(2)
        .enumerate()
        .map(|(k, p)| baseline_region("random", k, p[0], p[1]))
        .collect())
}

/// Alternating regions of the mean truth length and gaps of the mean truth
/// gap, starting at zero, clipped to the duration.
///
/// The mean gap is taken over the gaps between consecutive truth regions; a
/// single truth region leaves the rest of the lesson as the gap.
pub fn uniform_baseline(truth: &[Region], duration: f64) -> Result<Vec<Region>> {
    if truth.is_empty() {
        return Err(Error::InvalidArgument("uniform baseline needs at least one truth region".into()));
    }
    let sorted = check_disjoint(truth)?;
    let k = sorted.len() as f64;
    let length = sorted.iter().map(|r| r.duration()).sum::<f64>() / k;
    if !(length > 0.0) {
        return Err(Error::InvalidArgument("truth regions have zero length".into()));
    }
    let gap = if sorted.len() > 1 {
        sorted.windows(2).map(|p| p[1].start - p[0].end).sum::<f64>() / (k - 1.0)
    } else {
        (duration - length).max(0.0)
    };

    let mut out = Vec::new();
    let mut t = 0.0;
    while t < duration - 1e-9 {
        out.push(baseline_region("uniform", out.len(), t, (t + length).min(duration)));
        t += length + gap;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub boundary_similarity: f64,
}

/// All four metrics for one prediction against its truth.
pub fn evaluate_entry(predicted: &[Region], truth: &[Region], duration: f64) -> Result<EntryMetrics> {
    let fm = frame_metrics(
        &regions_to_frames(predicted, duration, FRAME_SECONDS)?,
        &regions_to_frames(truth, duration, FRAME_SECONDS)?,
    )?;
    let bs = boundary_similarity(
        &regions_to_boundaries(predicted, BOUNDARY_GRANULARITY),
        &regions_to_boundaries(truth, BOUNDARY_GRANULARITY),
        NEAR_MISS_WINDOW,
    )?;
    Ok(EntryMetrics {
        precision: fm.precision,
        recall: fm.recall,
        f1: fm.f1,
        boundary_similarity: bs,
    })
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub predicted: Vec<Region>,
    pub truth: Vec<Region>,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, sd: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, sd: var.sqrt() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub precision: Stat,
    pub recall: Stat,
    pub f1: Stat,
    pub boundary_similarity: Stat,
}

impl ConditionSummary {
    fn from_metrics(metrics: &[EntryMetrics]) -> Self {
        let column = |f: fn(&EntryMetrics) -> f64| Stat::of(&metrics.iter().map(f).collect::<Vec<_>>());
        Self {
            precision: column(|m| m.precision),
            recall: column(|m| m.recall),
            f1: column(|m| m.f1),
            boundary_similarity: column(|m| m.boundary_similarity),
        }
    }

    pub fn means(&self) -> [f64; 4] {
        [self.precision.mean, self.recall.mean, self.f1.mean, self.boundary_similarity.mean]
    }

    fn stats(&self) -> [Stat; 4] {
        [self.precision, self.recall, self.f1, self.boundary_similarity]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub name: String,
    pub algorithm: EntryMetrics,
    pub random: EntryMetrics,
    pub uniform: EntryMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub seed: u64,
    pub algorithm: ConditionSummary,
    pub random: ConditionSummary,
    pub uniform: ConditionSummary,
    pub entries: Vec<EntryReport>,
}

/// Scores the algorithm and both baselines on every entry. Entry `i` draws its
/// random baseline from `seed + i`.
pub fn evaluate_corpus(entries: &[CorpusEntry], seed: u64) -> Result<EvalReport> {
    if entries.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let mut reports = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let random = random_baseline(&e.truth, e.duration, seed.wrapping_add(i as u64))?;
        let uniform = if e.truth.is_empty() { Vec::new() } else { uniform_baseline(&e.truth, e.duration)? };
        reports.push(EntryReport {
            name: e.name.clone(),
            algorithm: evaluate_entry(&e.predicted, &e.truth, e.duration)?,
            random: evaluate_entry(&random, &e.truth, e.duration)?,
            uniform: evaluate_entry(&uniform, &e.truth, e.duration)?,
        });
    }
    let summarize = |pick: fn(&EntryReport) -> EntryMetrics| {
        ConditionSummary::from_metrics(&reports.iter().map(pick).collect::<Vec<_>>())
    };
    Ok(EvalReport {
        seed,
        algorithm: summarize(|r| r.algorithm),
        random: summarize(|r| r.random),
        uniform: summarize(|r| r.uniform),
        entries: reports,
    })
}

impl EvalReport {
    /// Aligned text table: one row per metric, one column per condition.
    pub fn to_table(&self) -> String {
        let names = ["Precision", "Recall", "F1 Score", "Boundary Similarity"];
        let cols = [self.algorithm.stats(), self.random.stats(), self.uniform.stats()];
        let mut out = String::new();
        let _ = writeln!(out, "{:<21}{:>16}{:>16}{:>16}", "Metric", "Algorithm", "Random", "Uniform");
        for (row, name) in names.iter().enumerate() {
            let _ = write!(out, "{name:<21}");
            for col in &cols {
                let s = col[row];
                let _ = write!(out, "{:>16}", format!("{:.3} ({:.3})", s.mean, s.sd));
            }
            out.push('\n');
        }
        out
    }
}
