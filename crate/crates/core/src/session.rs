//! Per-lesson learning progression and practice history.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::notes::{MelodyCurve, NoteSequence};
use crate::scoring::ScoreReport;
use crate::segmentation::{LearningState, Region};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PracticeHistory {
    pub played: u32,
    pub looped: u32,
    pub recorded: u32,
    pub aced: u32,
}

/// Something the learner did to a region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SessionEvent {
    Entered,
    Played,
    Looped,
    /// A scored recording; `perfect` marks an effective score of 100.
    Recorded { score: f64, perfect: bool },
    ScoreOverridden { score: f64 },
}

impl SessionEvent {
    pub fn recorded(report: &ScoreReport) -> Self {
        SessionEvent::Recorded {
            score: report.effective_score(),
            perfect: report.is_perfect(),
        }
    }

    fn is_perfect(&self) -> bool {
        match *self {
            SessionEvent::Recorded { perfect, .. } => perfect,
            SessionEvent::ScoreOverridden { score } => score >= 100.0,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub score: f64,
    pub overridden: bool,
    pub playback_speed: f64,
}

/// Analysis attached to a user-created instrument region.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RegionAnalysis {
    pub notes: NoteSequence,
    pub curve: MelodyCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub schema: u32,
    pub lesson_id: String,
    pub user_id: String,
    pub region_states: BTreeMap<String, LearningState>,
    pub history: BTreeMap<String, PracticeHistory>,
    pub scores: BTreeMap<String, Vec<ScoreSummary>>,
    /// Most recent full report per region, the base for manual overrides.
    #[serde(default)]
    pub last_reports: BTreeMap<String, ScoreReport>,
    pub user_regions: Vec<Region>,
    /// Notes for user regions and refined auto regions, replacing the
    /// manifest's analysis.
    #[serde(default)]
    pub user_analysis: BTreeMap<String, RegionAnalysis>,
    /// Auto regions whose bounds the user dragged, keyed by id.
    #[serde(default)]
    pub refined_regions: BTreeMap<String, Region>,
    /// Auto regions the user deleted. Their history is kept.
    #[serde(default)]
    pub hidden_regions: BTreeSet<String>,
    pub revision: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ProgressionSummary {
    pub to_learn: usize,
    pub started: usize,
    pub aced: usize,
}

impl ProgressionSummary {
    pub fn total(&self) -> usize {
        self.to_learn + self.started + self.aced
    }
}

impl SessionState {
    /// A session where every given region is still to be learned.
    pub fn fresh<'a>(
        lesson_id: &str,
        user_id: &str,
        region_ids: impl IntoIterator<Item = &'a str>,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            lesson_id: lesson_id.into(),
            user_id: user_id.into(),
            region_states: region_ids
                .into_iter()
                .map(|id| (id.to_string(), LearningState::ToLearn))
                .collect(),
            history: BTreeMap::new(),
            scores: BTreeMap::new(),
            last_reports: BTreeMap::new(),
            user_regions: Vec::new(),
            user_analysis: BTreeMap::new(),
            refined_regions: BTreeMap::new(),
            hidden_regions: BTreeSet::new(),
            revision: 0,
        }
    }

    pub fn state_of(&self, region_id: &str) -> Option<LearningState> {
        self.region_states.get(region_id).copied()
    }

    pub fn is_visible(&self, region_id: &str) -> bool {
        self.region_states.contains_key(region_id) && !self.hidden_regions.contains(region_id)
    }

    /// Applies one event. States only move forward; aced is absorbing.
    pub fn transition(&self, region_id: &str, event: SessionEvent) -> Result<SessionState> {
        let Some(&current) = self.region_states.get(region_id) else {
            return Err(Error::NotFound(format!("region {region_id}")));
        };
        let mut next = self.clone();
        let new_state = if event.is_perfect() {
            LearningState::Aced
        } else {
            current.max(LearningState::Started)
        };
        next.region_states.insert(region_id.into(), new_state);

        let h = next.history.entry(region_id.into()).or_default();
        match event {
            SessionEvent::Entered | SessionEvent::ScoreOverridden { .. } => {}
            SessionEvent::Played => h.played += 1,
            SessionEvent::Looped => h.looped += 1,
            SessionEvent::Recorded { .. } => h.recorded += 1,
        }
        if event.is_perfect() {
            h.aced += 1;
        }
        next.revision += 1;
        Ok(next)
    }

    /// Registers a user region in `to_learn`.
    pub fn add_user_region(&self, region: Region, analysis: Option<RegionAnalysis>) -> Result<SessionState> {
        if self.region_states.contains_key(&region.id) {
            return Err(Error::InvalidArgument(format!("region {} already exists", region.id)));
        }
        let mut next = self.clone();
        next.region_states.insert(region.id.clone(), LearningState::ToLearn);
        if let Some(a) = analysis {
            next.user_analysis.insert(region.id.clone(), a);
        }
        next.user_regions.push(region);
        next.revision += 1;
        Ok(next)
    }

    /// Replaces a region's bounds and analysis. User regions are edited in
    /// place; auto regions get an override that shadows the manifest entry.
    pub fn refine_region(&self, region: Region, analysis: Option<RegionAnalysis>) -> Result<SessionState> {
        if !self.is_visible(&region.id) {
            return Err(Error::NotFound(format!("region {}", region.id)));
        }
        let mut next = self.clone();
        match next.user_regions.iter_mut().find(|r| r.id == region.id) {
            Some(slot) => *slot = region.clone(),
            None => {
                next.refined_regions.insert(region.id.clone(), region.clone());
            }
        }
        match analysis {
            Some(a) => next.user_analysis.insert(region.id.clone(), a),
            None => next.user_analysis.remove(&region.id),
        };
        next.revision += 1;
        Ok(next)
    }

    /// The lesson's visible regions as this user sees them: manifest regions
    /// with refinements applied, then user regions, in timeline order.
    pub fn current_regions(&self, manifest_regions: &[Region]) -> Vec<Region> {
        let mut out: Vec<Region> = manifest_regions
            .iter()
            .map(|r| self.refined_regions.get(&r.id).unwrap_or(r))
            .chain(&self.user_regions)
            .filter(|r| !self.hidden_regions.contains(&r.id))
            .map(|r| Region {
                state: self.state_of(&r.id).unwrap_or_default(),
                ..r.clone()
            })
            .collect();
        out.sort_by(|a, b| a.start.total_cmp(&b.start).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Removes a region from view. User regions are dropped, auto regions
    /// hidden; history stays keyed by the id either way.
    pub fn remove_region(&self, region_id: &str) -> Result<SessionState> {
        if !self.is_visible(region_id) {
            return Err(Error::NotFound(format!("region {region_id}")));
        }
        let mut next = self.clone();
        if let Some(pos) = next.user_regions.iter().position(|r| r.id == region_id) {
            next.user_regions.remove(pos);
            next.user_analysis.remove(region_id);
            next.region_states.remove(region_id);
        } else {
            next.refined_regions.remove(region_id);
            next.user_analysis.remove(region_id);
            next.hidden_regions.insert(region_id.into());
        }
        next.revision += 1;
        Ok(next)
    }

    pub fn record_score(&self, region_id: &str, report: &ScoreReport, playback_speed: f64) -> Result<SessionState> {
        let mut next = self.transition(region_id, SessionEvent::recorded(report))?;
        next.scores.entry(region_id.into()).or_default().push(ScoreSummary {
            score: report.effective_score(),
            overridden: report.overridden,
            playback_speed,
        });
        next.last_reports.insert(region_id.into(), report.clone());
        Ok(next)
    }

    pub fn record_override(&self, region_id: &str, report: &ScoreReport) -> Result<SessionState> {
        let mut next = self.transition(region_id, SessionEvent::ScoreOverridden { score: report.effective_score() })?;
        next.scores.entry(region_id.into()).or_default().push(ScoreSummary {
            score: report.effective_score(),
            overridden: true,
            playback_speed: 1.0,
        });
        next.last_reports.insert(region_id.into(), report.clone());
        Ok(next)
    }
}

/// Counts regions per learning stage over the lesson's current regions.
pub fn progression_summary(state: &SessionState, regions: &[Region]) -> ProgressionSummary {
    let mut summary = ProgressionSummary::default();
    let current = regions
        .iter()
        .chain(&state.user_regions)
        .filter(|r| !state.hidden_regions.contains(&r.id));
    for r in current {
        match state.state_of(&r.id).unwrap_or_default() {
            LearningState::ToLearn => summary.to_learn += 1,
            LearningState::Started => summary.started += 1,
            LearningState::Aced => summary.aced += 1,
        }
    }
    summary
}

/// JSON documents at `<root>/<lesson_id>/<user_id>.json` with
/// optimistic-concurrency revisions.
#[derive(Debug)]
pub struct SessionStore {
    root: PathBuf,
    write_lock: Mutex<()>,
}

impl SessionStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            write_lock: Mutex::new(()),
        }
    }

    pub fn path_for(&self, lesson_id: &str, user_id: &str) -> Result<PathBuf> {
        for part in [lesson_id, user_id] {
            if part.is_empty() || part.contains(['/', '\\']) || part == "." || part == ".." {
                return Err(Error::InvalidArgument(format!("invalid identifier {part:?}")));
            }
        }
        Ok(self.root.join(lesson_id).join(format!("{user_id}.json")))
    }

    fn read(path: &Path) -> Result<Option<SessionState>> {
        match std::fs::read(path) {
            Ok(bytes) => {
                let state: SessionState =
                    serde_json::from_slice(&bytes).map_err(|e| Error::CorruptSession(e.to_string()))?;
                if state.schema != SCHEMA_VERSION {
                    return Err(Error::CorruptSession(format!("unsupported schema {}", state.schema)));
                }
                Ok(Some(state))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Stored session, or a fresh one over `region_ids` when none exists.
    pub fn load<'a>(
        &self,
        lesson_id: &str,
        user_id: &str,
        region_ids: impl IntoIterator<Item = &'a str>,
    ) -> Result<SessionState> {
        let path = self.path_for(lesson_id, user_id)?;
        Ok(Self::read(&path)?.unwrap_or_else(|| SessionState::fresh(lesson_id, user_id, region_ids)))
    }

    /// Writes `state` if the stored document is still at `base_revision`
    /// (0 when none exists yet). Anything else means another writer got in
    /// first.
    pub fn save(&self, state: &SessionState, base_revision: u64) -> Result<()> {
        if state.revision <= base_revision {
            return Err(Error::InvalidArgument(format!(
                "session revision {} does not advance past {base_revision}",
                state.revision
            )));
        }
        let path = self.path_for(&state.lesson_id, &state.user_id)?;
        let _guard = self.write_lock.lock().unwrap_or_else(|p| p.into_inner());
        let stored = Self::read(&path)?.map_or(0, |s| s.revision);
        if stored != base_revision {
            return Err(Error::RevisionConflict {
                stored,
                incoming: base_revision,
            });
        }
        let dir = path.parent().expect("session path has a parent");
        std::fs::create_dir_all(dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp, state)?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(())
    }
}
