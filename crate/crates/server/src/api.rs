//! Routes and handlers.

use std::collections::BTreeMap;
use std::path::Path as FsPath;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::multipart::MultipartRejection;
use axum::extract::{DefaultBodyLimit, FromRequestParts, Multipart, Path, Query, Request, State};
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lessonkit_core::audio::{self, CANONICAL_RATE};
use lessonkit_core::lesson::{self, RegionNotes, Stage, WireCurve, WireNote};
use lessonkit_core::notes::SequenceSource;
use lessonkit_core::scoring::{self, ScoreReport};
use lessonkit_core::separation::{self, StemPair};
use lessonkit_core::session::{progression_summary, ProgressionSummary, RegionAnalysis};
use lessonkit_core::{
    AudioBuffer, Error as CoreError, LearningState, LessonDir, LessonManifest, MelodyCurve, NoteSequence,
    PitchContour, Region, RegionSource, SessionEvent, SessionState, Track,
};
use serde::{Deserialize, Serialize};
use tower::ServiceExt;
use tower_http::services::{ServeDir, ServeFile};
use uuid::Uuid;

use crate::error::ApiError;
use crate::jobs::PreprocessJob;
use crate::AppState;

/// Identifies the learner; requests without it act as `default`.
pub const USER_HEADER: &str = "x-user-id";
/// Optional session revision the client last saw. A mismatch is a 409.
pub const REVISION_HEADER: &str = "x-session-revision";
pub const DEFAULT_USER: &str = "default";

pub fn router(state: AppState) -> Router {
    let limit = state.config().max_upload_bytes;
    let static_dir = state.config().static_dir.clone();
    let api = Router::new()
        .route("/api/lessons", post(create_lesson))
        .route("/api/jobs/{job_id}", get(get_job))
        .route("/api/lessons/{id}", get(get_manifest))
        .route("/api/lessons/{id}/media", get(get_media))
        .route("/api/lessons/{id}/session", get(get_session))
        .route("/api/lessons/{id}/events", post(post_events))
        .route("/api/lessons/{id}/regions", get(list_regions).post(create_region))
        .route("/api/lessons/{id}/regions/query", post(query_regions))
        .route(
            "/api/lessons/{id}/regions/{rid}",
            get(get_region).patch(patch_region).delete(delete_region),
        )
        .route("/api/lessons/{id}/regions/{rid}/recordings", post(post_recording))
        .route("/api/lessons/{id}/regions/{rid}/score-override", post(post_override))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::not_found("no such route") }),
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && id.len() <= 128 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

pub struct UserId(pub String);

impl<S: Send + Sync> FromRequestParts<S> for UserId {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        let user = match parts.headers.get(USER_HEADER) {
            None => DEFAULT_USER.to_string(),
            Some(v) => v
                .to_str()
                .map_err(|_| ApiError::bad_request("user id header is not ASCII"))?
                .trim()
                .to_string(),
        };
        if !valid_id(&user) {
            return Err(ApiError::bad_request(format!("invalid user id {user:?}")));
        }
        Ok(UserId(user))
    }
}

pub struct ExpectedRevision(pub Option<u64>);

impl<S: Send + Sync> FromRequestParts<S> for ExpectedRevision {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _state: &S) -> Result<Self, Self::Rejection> {
        match parts.headers.get(REVISION_HEADER) {
            None => Ok(ExpectedRevision(None)),
            Some(v) => v
                .to_str()
                .ok()
                .and_then(|s| s.trim().parse().ok())
                .map(|r| ExpectedRevision(Some(r)))
                .ok_or_else(|| ApiError::bad_request("session revision header must be an integer")),
        }
    }
}

/// A stored lesson.
struct Lesson {
    id: String,
    dir: LessonDir,
    manifest: Arc<LessonManifest>,
}

impl Lesson {
    fn auto_regions(&self) -> Vec<Region> {
        self.manifest.regions().cloned().collect()
    }
}

impl AppState {
    fn lesson_dir(&self, id: &str) -> Result<LessonDir, ApiError> {
        if !valid_id(id) {
            return Err(ApiError::not_found(format!("lesson {id}")));
        }
        Ok(LessonDir::new(self.config().lessons_dir().join(id)))
    }

    fn lesson(&self, id: &str) -> Result<Lesson, ApiError> {
        let dir = self.lesson_dir(id)?;
        let cached = self.inner.manifests.read().unwrap_or_else(|p| p.into_inner()).get(id).cloned();
        let manifest = match cached {
            Some(m) => m,
            None => {
                let m = Arc::new(dir.read_manifest()?);
                self.inner
                    .manifests
                    .write()
                    .unwrap_or_else(|p| p.into_inner())
                    .insert(id.to_string(), m.clone());
                m
            }
        };
        Ok(Lesson {
            id: id.to_string(),
            dir,
            manifest,
        })
    }

    fn session(&self, lesson: &Lesson, user: &str, expected: Option<u64>) -> Result<SessionState, ApiError> {
        let state = self
            .sessions()
            .load(&lesson.id, user, lesson.manifest.regions().map(|r| r.id.as_str()))?;
        if let Some(rev) = expected {
            if rev != state.revision {
                return Err(CoreError::RevisionConflict {
                    stored: state.revision,
                    incoming: rev,
                }
                .into());
            }
        }
        Ok(state)
    }

    fn commit(&self, base: &SessionState, next: &SessionState) -> Result<(), ApiError> {
        Ok(self.sessions().save(next, base.revision)?)
    }
}

// ---------------------------------------------------------------------------
// Preprocessing jobs

enum Upload {
    Mix(Bytes),
    Stems { voice: Bytes, instrument: Bytes },
}

enum JobInput {
    Stems(StemPair),
    Mix { buffer: AudioBuffer, raw: Bytes },
}

fn decode_canonical(bytes: &[u8]) -> lessonkit_core::Result<AudioBuffer> {
    audio::resample(&audio::decode_wav(bytes)?, CANONICAL_RATE)
}

fn media_extension(file_name: Option<&str>) -> String {
    file_name
        .and_then(|n| FsPath::new(n).extension())
        .and_then(|e| e.to_str())
        .unwrap_or("bin")
        .to_ascii_lowercase()
}

async fn create_lesson(
    State(state): State<AppState>,
    multipart: Result<Multipart, MultipartRejection>,
) -> Result<(StatusCode, Json<PreprocessJob>), ApiError> {
    let mut multipart = multipart.map_err(|e| ApiError::new(e.status(), "bad_request", e.body_text()))?;
    let (mut mix, mut voice, mut instrument, mut media) = (None, None, None, None);
    while let Some(field) = multipart.next_field().await? {
        let name = field.name().unwrap_or_default().to_string();
        let ext = media_extension(field.file_name());
        let bytes = field.bytes().await?;
        match name.as_str() {
            "mix" => mix = Some(bytes),
            "voice" => voice = Some(bytes),
            "instrument" => instrument = Some(bytes),
            "media" => media = Some((ext, bytes)),
            other => return Err(ApiError::bad_request(format!("unexpected field {other:?}"))),
        }
    }
    let upload = match (mix, voice, instrument) {
        (Some(m), None, None) => Upload::Mix(m),
        (None, Some(voice), Some(instrument)) => Upload::Stems { voice, instrument },
        (None, None, None) => return Err(ApiError::bad_request("no audio: send a mix or a voice/instrument pair")),
        _ => return Err(ApiError::bad_request("send either a mix or both stems, not a mixture")),
    };

    // Decoding up front turns bad uploads into a 400 instead of a failed job.
    let input = tokio::task::spawn_blocking(move || -> lessonkit_core::Result<JobInput> {
        Ok(match upload {
            Upload::Mix(raw) => JobInput::Mix {
                buffer: decode_canonical(&raw)?,
                raw,
            },
            Upload::Stems { voice, instrument } => {
                JobInput::Stems(StemPair::new(decode_canonical(&voice)?, decode_canonical(&instrument)?)?)
            }
        })
    })
    .await??;

    let job_id = Uuid::new_v4().simple().to_string();
    let lesson_id = Uuid::new_v4().simple().to_string();
    let job = state.jobs().create(&job_id);
    log::info!("job {job_id}: preprocessing lesson {lesson_id}");
    tokio::task::spawn_blocking(move || {
        match run_job(&state, &job_id, &lesson_id, input, media) {
            Ok(()) => {
                state.jobs().finish(&job_id, &lesson_id);
                log::info!("job {job_id}: done");
            }
            Err(e) => {
                log::warn!("job {job_id}: {e}");
                state.jobs().fail(&job_id, &e.to_string());
            }
        }
    });
    Ok((StatusCode::ACCEPTED, Json(job)))
}

fn run_job(
    state: &AppState,
    job_id: &str,
    lesson_id: &str,
    input: JobInput,
    media: Option<(String, Bytes)>,
) -> lessonkit_core::Result<()> {
    let jobs = state.jobs();
    let config = state.config();
    jobs.progress(job_id, 0.0);
    let stems = match input {
        JobInput::Stems(stems) => stems,
        JobInput::Mix { buffer, raw } => match &config.separator {
            Some(sep) => {
                let mut file = tempfile::Builder::new().suffix(".wav").tempfile()?;
                std::io::Write::write_all(&mut file, &raw)?;
                separation::run_external_separator(file.path(), sep)?
            }
            None => separation::passthrough_stems(&buffer)?,
        },
    };
    jobs.progress(job_id, 0.1);

    let manifest = lesson::preprocess(lesson_id, &stems, &config.analysis, |stage| {
        let p = match stage {
            Stage::Segmenting => 0.15,
            Stage::ExtractingNotes { done, total } => 0.2 + 0.7 * done as f64 / total.max(1) as f64,
            Stage::Assembling => 0.95,
        };
        jobs.progress(job_id, p);
    })?;

    // Write into a staging directory first so a lesson never appears half-written.
    let lessons = config.lessons_dir();
    let staging = tempfile::Builder::new().prefix(".staging-").tempdir_in(&lessons)?;
    LessonDir::new(staging.path()).write(&manifest, &stems, media.as_ref().map(|(e, b)| (e.as_str(), &b[..])))?;
    std::fs::rename(staging.path(), lessons.join(lesson_id))?;
    Ok(())
}

async fn get_job(State(state): State<AppState>, Path(job_id): Path<String>) -> Result<Json<PreprocessJob>, ApiError> {
    state
        .jobs()
        .get(&job_id)
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("job {job_id}")))
}

// ---------------------------------------------------------------------------
// Lesson data

/// The stored manifest bytes, unchanged.
async fn get_manifest(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let path = state.lesson_dir(&id)?.manifest_path();
    match tokio::fs::read(&path).await {
        Ok(bytes) => Ok(([(header::CONTENT_TYPE, "application/json")], bytes).into_response()),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(ApiError::not_found(format!("lesson {id}"))),
        Err(e) => Err(CoreError::Io(e).into()),
    }
}

async fn get_media(State(state): State<AppState>, Path(id): Path<String>, req: Request) -> Result<Response, ApiError> {
    let lesson = state.lesson(&id)?;
    let path = lesson
        .dir
        .media_path()
        .ok_or_else(|| ApiError::not_found(format!("media for lesson {id}")))?;
    let res = match ServeFile::new(path).oneshot(req).await {
        Ok(res) => res,
        Err(never) => match never {},
    };
    Ok(res.map(Body::new))
}

#[derive(Debug, Serialize)]
struct SessionView {
    #[serde(flatten)]
    state: SessionState,
    regions: Vec<Region>,
    progression: ProgressionSummary,
}

async fn get_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
    UserId(user): UserId,
) -> Result<Json<SessionView>, ApiError> {
    let lesson = state.lesson(&id)?;
    let session = state.session(&lesson, &user, None)?;
    let auto = lesson.auto_regions();
    Ok(Json(SessionView {
        regions: session.current_regions(&auto),
        progression: progression_summary(&session, &auto),
        state: session,
    }))
}

#[derive(Debug, Deserialize)]
struct EventItem {
    region_id: String,
    #[serde(flatten)]
    event: SessionEvent,
}

#[derive(Debug, Deserialize)]
struct EventsRequest {
    #[serde(default)]
    revision: Option<u64>,
    events: Vec<EventItem>,
}

#[derive(Debug, Serialize)]
struct SessionSummary {
    revision: u64,
    region_states: BTreeMap<String, LearningState>,
    progression: ProgressionSummary,
}

async fn post_events(
    State(state): State<AppState>,
    Path(id): Path<String>,
    UserId(user): UserId,
    ExpectedRevision(header_rev): ExpectedRevision,
    Json(body): Json<EventsRequest>,
) -> Result<Json<SessionSummary>, ApiError> {
    if body.events.is_empty() {
        return Err(ApiError::bad_request("no events"));
    }
    let lesson = state.lesson(&id)?;
    let base = state.session(&lesson, &user, body.revision.or(header_rev))?;
    let mut next = base.clone();
    for item in body.events {
        // Scores only enter the session through the recording and override routes.
        if matches!(item.event, SessionEvent::Recorded { .. } | SessionEvent::ScoreOverridden { .. }) {
            return Err(ApiError::bad_request("score events are recorded by the scoring endpoints"));
        }
        if !next.is_visible(&item.region_id) {
            return Err(ApiError::not_found(format!("region {}", item.region_id)));
        }
        next = next.transition(&item.region_id, item.event)?;
    }
    state.commit(&base, &next)?;
    let auto = lesson.auto_regions();
    Ok(Json(SessionSummary {
        revision: next.revision,
        progression: progression_summary(&next, &auto),
        region_states: next
            .current_regions(&auto)
            .into_iter()
            .map(|r| (r.id, r.state))
            .collect(),
    }))
}

// ---------------------------------------------------------------------------
// Regions

fn find_region(lesson: &Lesson, session: &SessionState, rid: &str) -> Result<Region, ApiError> {
    session
        .current_regions(&lesson.auto_regions())
        .into_iter()
        .find(|r| r.id == rid)
        .ok_or_else(|| ApiError::not_found(format!("region {rid}")))
}

/// Reference notes for a region: the user's re-extraction if any, else the
/// manifest's.
fn reference_notes(lesson: &Lesson, session: &SessionState, rid: &str) -> Option<(NoteSequence, MelodyCurve)> {
    if let Some(a) = session.user_analysis.get(rid) {
        return Some((a.notes.clone(), a.curve.clone()));
    }
    lesson
        .manifest
        .region_notes
        .get(rid)
        .map(|n| (n.sequence(), n.melody_curve()))
}

fn to_wire(seq: &NoteSequence, curve: &MelodyCurve) -> (Vec<WireNote>, WireCurve) {
    let empty = PitchContour {
        frames: Vec::new(),
        frame_seconds: 0.0,
    };
    let RegionNotes { notes, curve, .. } = RegionNotes::new(seq, curve, &empty);
    (notes, curve)
}

#[derive(Debug, Serialize)]
struct RegionView {
    region: Region,
    /// Present for instrument regions.
    notes: Option<Vec<WireNote>>,
    curve: Option<WireCurve>,
    revision: u64,
}

impl RegionView {
    fn build(lesson: &Lesson, session: &SessionState, region: Region) -> Self {
        let (notes, curve) = match reference_notes(lesson, session, &region.id) {
            Some((seq, curve)) => {
                let (n, c) = to_wire(&seq, &curve);
                (Some(n), Some(c))
            }
            None => (None, None),
        };
        RegionView {
            region,
            notes,
            curve,
            revision: session.revision,
        }
    }
}

fn check_bounds(start: f64, end: f64, duration: f64) -> Result<(), ApiError> {
    if !(start.is_finite() && end.is_finite() && 0.0 <= start && start < end && end <= duration + 1e-6) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_bounds",
            format!("need 0 <= start < end <= {duration}, got [{start}, {end}]"),
        ));
    }
    Ok(())
}

/// Re-extracts notes for an instrument region from the stored stems.
async fn analyze(state: &AppState, lesson: &Lesson, region: &Region) -> Result<Option<RegionAnalysis>, ApiError> {
    if region.track != Track::Instrument {
        return Ok(None);
    }
    let dir = lesson.dir.clone();
    let region = region.clone();
    let config = state.config().analysis.clone();
    let notes = tokio::task::spawn_blocking(move || {
        let stems = dir.read_stems()?;
        lesson::analyze_region(&stems, &region, &config)
    })
    .await??;
    Ok(Some(RegionAnalysis {
        notes: notes.sequence(),
        curve: notes.melody_curve(),
    }))
}

async fn list_regions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    UserId(user): UserId,
) -> Result<Json<Vec<Region>>, ApiError> {
    let lesson = state.lesson(&id)?;
    let session = state.session(&lesson, &user, None)?;
    Ok(Json(session.current_regions(&lesson.auto_regions())))
}

async fn get_region(
    State(state): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    UserId(user): UserId,
) -> Result<Json<RegionView>, ApiError> {
    let lesson = state.lesson(&id)?;
    let session = state.session(&lesson, &user, None)?;
    let region = find_region(&lesson, &session, &rid)?;
    Ok(Json(RegionView::build(&lesson, &session, region)))
}

#[derive(Debug, Deserialize)]
struct NewRegion {
    start: f64,
    end: f64,
    track: Track,
}

async fn create_region(
    State(state): State<AppState>,
    Path(id): Path<String>,
    UserId(user): UserId,
    ExpectedRevision(expected): ExpectedRevision,
    Json(body): Json<NewRegion>,
) -> Result<(StatusCode, Json<RegionView>), ApiError> {
    let lesson = state.lesson(&id)?;
    check_bounds(body.start, body.end, lesson.manifest.duration)?;
    let base = state.session(&lesson, &user, expected)?;
    let region = Region {
        id: format!("user-{}", Uuid::new_v4().simple()),
        start: body.start,
        end: body.end,
        track: body.track,
        source: RegionSource::User,
        state: LearningState::ToLearn,
    };
    let analysis = analyze(&state, &lesson, &region).await?;
    let next = base.add_user_region(region.clone(), analysis)?;
    state.commit(&base, &next)?;
    Ok((StatusCode::CREATED, Json(RegionView::build(&lesson, &next, region))))
}

#[derive(Debug, Deserialize)]
struct RegionPatch {
    start: Option<f64>,
    end: Option<f64>,
}

async fn patch_region(
    State(state): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    UserId(user): UserId,
    ExpectedRevision(expected): ExpectedRevision,
    Json(body): Json<RegionPatch>,
) -> Result<Json<RegionView>, ApiError> {
    let lesson = state.lesson(&id)?;
    let base = state.session(&lesson, &user, expected)?;
    let current = find_region(&lesson, &base, &rid)?;
    let region = Region {
        start: body.start.unwrap_or(current.start),
        end: body.end.unwrap_or(current.end),
        ..current
    };
    check_bounds(region.start, region.end, lesson.manifest.duration)?;
    let analysis = analyze(&state, &lesson, &region).await?;
    let next = base.refine_region(region.clone(), analysis)?;
    state.commit(&base, &next)?;
    Ok(Json(RegionView::build(&lesson, &next, region)))
}

async fn delete_region(
    State(state): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    UserId(user): UserId,
    ExpectedRevision(expected): ExpectedRevision,
) -> Result<StatusCode, ApiError> {
    let lesson = state.lesson(&id)?;
    let base = state.session(&lesson, &user, expected)?;
    let next = base.remove_region(&rid)?;
    state.commit(&base, &next)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Debug, Deserialize)]
struct QueryRequest {
    rid: Option<String>,
    notes: Option<Vec<u8>>,
}

#[derive(Debug, Serialize)]
struct QueryResponse {
    matches: Vec<String>,
}

async fn query_regions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    UserId(user): UserId,
    Json(body): Json<QueryRequest>,
) -> Result<Json<QueryResponse>, ApiError> {
    let lesson = state.lesson(&id)?;
    let session = state.session(&lesson, &user, None)?;
    let query = match (body.rid, body.notes) {
        (Some(rid), None) => {
            find_region(&lesson, &session, &rid)?;
            reference_notes(&lesson, &session, &rid)
                .map(|(seq, _)| seq)
                .ok_or(CoreError::WrongTrack(rid))?
        }
        (None, Some(notes)) => {
            if notes.iter().any(|&m| m > lessonkit_core::notes::MIDI_MAX) {
                return Err(ApiError::bad_request("note numbers must be within 0..=128"));
            }
            NoteSequence::from_midi(&notes, SequenceSource::Reference)
        }
        _ => return Err(ApiError::bad_request("send exactly one of rid or notes")),
    };
    let candidates: Vec<(Region, NoteSequence)> = session
        .current_regions(&lesson.auto_regions())
        .into_iter()
        .filter(|r| r.track == Track::Instrument)
        .map(|r| {
            let seq = reference_notes(&lesson, &session, &r.id).map(|(s, _)| s).unwrap_or_default();
            (r, seq)
        })
        .collect();
    let hits = scoring::query_regions(&query, &candidates, state.config().analysis.query_threshold)?;
    Ok(Json(QueryResponse {
        matches: hits.into_iter().map(|r| r.id).collect(),
    }))
}

// ---------------------------------------------------------------------------
// Attempts

#[derive(Debug, Deserialize)]
struct RecordingParams {
    playback_speed: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AttemptResponse {
    report: ScoreReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_notes: Option<Vec<WireNote>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_curve: Option<WireCurve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_curve: Option<WireCurve>,
    state: LearningState,
    revision: u64,
}

/// Region, its reference notes and curve, or the matching error.
fn scoring_target(
    lesson: &Lesson,
    session: &SessionState,
    rid: &str,
) -> Result<(Region, NoteSequence, MelodyCurve), ApiError> {
    let region = find_region(lesson, session, rid)?;
    if region.track != Track::Instrument {
        return Err(CoreError::WrongTrack(rid.into()).into());
    }
    let (seq, curve) = reference_notes(lesson, session, rid).unwrap_or_default();
    if seq.is_empty() {
        return Err(CoreError::EmptyTarget.into());
    }
    Ok((region, seq, curve))
}

async fn post_recording(
    State(state): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    UserId(user): UserId,
    ExpectedRevision(expected): ExpectedRevision,
    Query(params): Query<RecordingParams>,
    body: Bytes,
) -> Result<Json<AttemptResponse>, ApiError> {
    let speed = params.playback_speed.unwrap_or(1.0);
    if !(speed.is_finite() && speed > 0.0) {
        return Err(ApiError::bad_request(format!("invalid playback speed {speed}")));
    }
    if body.is_empty() {
        return Err(CoreError::EmptyInput.into());
    }
    let lesson = state.lesson(&id)?;
    let base = state.session(&lesson, &user, expected)?;
    let (_, target, reference_curve) = scoring_target(&lesson, &base, &rid)?;

    let cap = state.config().max_recording_seconds;
    let config = state.config().analysis.clone();
    let (user_seq, user_curve) = tokio::task::spawn_blocking(move || -> Result<_, ApiError> {
        let decoded = audio::decode_wav(&body)?;
        if decoded.duration() > cap {
            return Err(ApiError::new(
                StatusCode::PAYLOAD_TOO_LARGE,
                "too_long",
                format!("recording is {:.1} s, limit is {cap} s", decoded.duration()),
            ));
        }
        let buf = audio::resample(&decoded, CANONICAL_RATE)?;
        let (seq, curve, _) = lesson::analyze_notes(&buf, &config, SequenceSource::UserRecording)?;
        Ok((seq, curve))
    })
    .await??;

    let report = scoring::score_performance(&target, &user_seq)?;
    let next = base.record_score(&rid, &report, speed)?;
    state.commit(&base, &next)?;
    let (user_notes, user_curve) = to_wire(&user_seq, &user_curve);
    let (_, reference_curve) = to_wire(&target, &reference_curve);
    Ok(Json(AttemptResponse {
        report,
        user_notes: Some(user_notes),
        user_curve: Some(user_curve),
        reference_curve: Some(reference_curve),
        state: next.state_of(&rid).unwrap_or_default(),
        revision: next.revision,
    }))
}

#[derive(Debug, Deserialize)]
struct OverrideRequest {
    score: f64,
}

async fn post_override(
    State(state): State<AppState>,
    Path((id, rid)): Path<(String, String)>,
    UserId(user): UserId,
    ExpectedRevision(expected): ExpectedRevision,
    Json(body): Json<OverrideRequest>,
) -> Result<Json<AttemptResponse>, ApiError> {
    let lesson = state.lesson(&id)?;
    let base = state.session(&lesson, &user, expected)?;
    let (_, target, _) = scoring_target(&lesson, &base, &rid)?;
    // Without a prior attempt the override applies to an empty take.
    let previous = match base.last_reports.get(&rid) {
        Some(r) => r.clone(),
        None => scoring::score_sequences(&target.midi(), &[])?,
    };
    let report = scoring::apply_manual_score(&previous, body.score)?;
    let next = base.record_override(&rid, &report)?;
    state.commit(&base, &next)?;
    Ok(Json(AttemptResponse {
        report,
        user_notes: None,
        user_curve: None,
        reference_curve: None,
        state: next.state_of(&rid).unwrap_or_default(),
        revision: next.revision,
    }))
}
