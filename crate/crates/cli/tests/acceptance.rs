//! Acceptance suite. Each check prints one `PASS` or `FAIL` line with its
//! measurements, and the process exits non-zero if any check fails.
//!
//! Tolerances and time budgets are constants next to each check.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use lessonkit_core::audio::{encode_wav, WavEncoding};
use lessonkit_core::eval::{self, BoundarySet, NEAR_MISS_WINDOW};
use lessonkit_core::notes::{freq_to_midi, midi_to_freq};
use lessonkit_core::scoring::{lcs_length, score_sequences};
use lessonkit_core::segmentation::{self, GroupingParams, SilenceLabels};
use lessonkit_core::session::{progression_summary, SessionEvent};
use lessonkit_core::{
    synth, AnalysisConfig, AudioBuffer, LearningState, LessonDir, PitchEstimator, Region, RegionSource, SessionState,
    Track, YinEstimator, CANONICAL_RATE,
};
use lessonkit_server::{router, AppState, ServerConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tower::ServiceExt;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed < budget, || format!("took {elapsed:.2?}, budget {budget:?}"))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_seq(rng: &mut impl Rng, min_len: usize, max_len: usize, alphabet: u8) -> Vec<u8> {
    let n = rng.gen_range(min_len..=max_len);
    (0..n).map(|_| rng.gen_range(0..alphabet)).collect()
}

fn midi_conversion() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(1);
    const TOL: f64 = 1e-9;
    let t = Instant::now();
    let a4 = freq_to_midi(440.0).map_err(|e| e.to_string())?;
    ensure(a4 == 69.0, || format!("freq_to_midi(440) = {a4}"))?;
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let f = r.gen_range(20.0..5000.0);
        let d = freq_to_midi(2.0 * f).unwrap() - freq_to_midi(f).unwrap() - 12.0;
        worst = worst.max(d.abs());
    }
    ensure(worst < TOL, || format!("octave error {worst:e}"))?;
    within(t.elapsed(), BUDGET)?;
    Ok(format!("max octave error {worst:.1e} in {:.2?}", t.elapsed()))
}

/// Longest common subsequence by trying every subsequence of `a`.
fn lcs_by_enumeration(a: &[u8], b: &[u8]) -> usize {
    let is_subsequence = |sub: &[u8]| {
        let mut it = b.iter();
        sub.iter().all(|x| it.any(|y| y == x))
    };
    (0u32..1 << a.len())
        .filter_map(|mask| {
            let sub: Vec<u8> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| a[i]).collect();
            is_subsequence(&sub).then_some(sub.len())
        })
        .max()
        .unwrap_or(0)
}

fn lcs_oracle() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(30);
    const PAIRS: usize = 10_000;
    let t = Instant::now();
    let mut r = rng(12);
    let mut mismatches = 0;
    for _ in 0..PAIRS {
        let a = random_seq(&mut r, 0, 8, 5);
        let b = random_seq(&mut r, 0, 8, 5);
        if lcs_length(&a, &b) != lcs_by_enumeration(&a, &b) {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches in {PAIRS} pairs"))?;
    within(t.elapsed(), BUDGET)?;
    Ok(format!("{PAIRS} pairs, 0 mismatches in {:.2?}", t.elapsed()))
}

fn score_formula() -> Outcome {
    const CASES: usize = 1000;
    let mut r = rng(13);
    let score = |t: &[u8], rec: &[u8]| score_sequences(t, rec).map(|s| s.score_percent).unwrap();

    for _ in 0..CASES {
        let t = random_seq(&mut r, 1, 16, 12);
        let s = score(&t, &t);
        ensure(s == 100.0, || format!("Score({t:?}, itself) = {s}"))?;
    }
    for _ in 0..CASES {
        let t = random_seq(&mut r, 1, 12, 6);
        let mut rec = random_seq(&mut r, 0, 12, 6);
        let before = score(&t, &rec);
        rec.push(r.gen_range(0..6));
        let after = score(&t, &rec);
        ensure(after >= before, || format!("appending to {rec:?} dropped {before} to {after}"))?;
    }
    for _ in 0..CASES {
        let query = random_seq(&mut r, 1, 8, 12);
        let mut candidate = Vec::new();
        for &q in &query {
            let noise = r.gen_range(0..3);
            candidate.extend((0..noise).map(|_| r.gen_range(0..12u8)));
            candidate.push(q);
        }
        candidate.extend((0..r.gen_range(0..3)).map(|_| r.gen_range(0..12u8)));
        let s = score(&query, &candidate);
        ensure(s == 100.0, || format!("{candidate:?} contains {query:?} but scores {s}"))?;
    }
    Ok(format!("{CASES} cases each for identity, appending and containment"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn pitch_tracking() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(20);
    const CENTS: f64 = 20.0;
    // every semitone from E2 to E5, which covers all twelve pitch classes
    const LOW: u8 = 40;
    const HIGH: u8 = 76;
    let t = Instant::now();
    let yin = YinEstimator::new(AnalysisConfig::default().pitch).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for m in LOW..=HIGH {
        let truth = midi_to_freq(m as f64);
        let contour = yin.estimate(&synth::sine(truth, 1.0, 0.5)).map_err(|e| e.to_string())?;
        let voiced: Vec<f64> = contour.frames.iter().filter_map(|f| f.f0).collect();
        ensure(!voiced.is_empty(), || format!("no voiced frames at {truth:.2} Hz"))?;
        let cents = 1200.0 * (median(voiced) / truth).log2();
        ensure(cents.abs() <= CENTS, || format!("MIDI {m} ({truth:.2} Hz) off by {cents:.1} cents"))?;
        worst = worst.max(cents.abs());
    }
    let silence = AudioBuffer::silence(CANONICAL_RATE as usize, CANONICAL_RATE).unwrap();
    let voiced = yin.estimate(&silence).map_err(|e| e.to_string())?.voiced_count();
    ensure(voiced == 0, || format!("{voiced} voiced frames in digital silence"))?;
    within(t.elapsed(), BUDGET)?;
    Ok(format!(
        "{} pitches, worst {worst:.2} cents, silence unvoiced, {:.2?}",
        HIGH - LOW + 1,
        t.elapsed()
    ))
}

fn segmentation_rules() -> Outcome {
    const WIN: f64 = 0.02;
    const LEAD: f64 = 0.5;
    let frames = |s: f64| (s / WIN).round() as usize;
    let params = GroupingParams::default();
    let mut checked = 0;
    for gap in [1.9, 2.0, 2.1] {
        for dur in [0.9, 1.0, 1.1] {
            // two runs of `dur` separated by `gap`
            let mut labels = vec![false; frames(LEAD)];
            labels.extend(vec![true; frames(dur)]);
            labels.extend(vec![false; frames(gap)]);
            labels.extend(vec![true; frames(dur)]);
            labels.extend(vec![false; frames(LEAD)]);
            let labels = SilenceLabels { labels, threshold: 0.0 };
            let got: Vec<(f64, f64)> = segmentation::group_regions(&labels, WIN, params, Track::Instrument)
                .iter()
                .map(|r| (r.start, r.end))
                .collect();
            let second = LEAD + dur + gap;
            let expected = if gap <= 2.0 {
                vec![(LEAD, second + dur)]
            } else if dur >= 1.0 {
                vec![(LEAD, LEAD + dur), (second, second + dur)]
            } else {
                vec![]
            };
            let close = got.len() == expected.len()
                && got.iter().zip(&expected).all(|(g, e)| (g.0 - e.0).abs() < 1e-6 && (g.1 - e.1).abs() < 1e-6);
            ensure(close, || format!("gap {gap} s, runs of {dur} s: got {got:?}, expected {expected:?}"))?;
            checked += 1;
        }
    }
    for dur in [0.9, 1.0, 1.1] {
        let mut labels = vec![false; frames(LEAD)];
        labels.extend(vec![true; frames(dur)]);
        let labels = SilenceLabels { labels, threshold: 0.0 };
        let kept = segmentation::group_regions(&labels, WIN, params, Track::Instrument).len();
        ensure(kept == usize::from(dur >= 1.0), || format!("lone {dur} s run: {kept} regions"))?;
        checked += 1;
    }
    Ok(format!("{checked} constructed label sequences"))
}

fn synthetic_segmentation() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(60);
    const MIN_F1: f64 = 0.95;
    const MIN_BS: f64 = 0.85;
    let t = Instant::now();
    let lesson = synth::synth_lesson(2024, 120.0);
    let seg = segmentation::segment_lesson(&lesson.stems, &AnalysisConfig::default().segmentation)
        .map_err(|e| e.to_string())?;
    let m = eval::evaluate_entry(&seg.instrument.regions, &lesson.instrument_truth, lesson.stems.duration())
        .map_err(|e| e.to_string())?;
    ensure(m.f1 >= MIN_F1, || format!("F1 {:.4} < {MIN_F1}", m.f1))?;
    ensure(m.boundary_similarity >= MIN_BS, || format!("BS {:.4} < {MIN_BS}", m.boundary_similarity))?;
    within(t.elapsed(), BUDGET)?;
    Ok(format!(
        "F1 {:.4}, BS {:.4}, {} regions, {:.2?}",
        m.f1,
        m.boundary_similarity,
        seg.instrument.regions.len(),
        t.elapsed()
    ))
}

fn corpus_ordering() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(300);
    const LESSONS: usize = 10;
    const CORPUS_SEED: u64 = 1;
    const BASELINE_SEED: u64 = 0;
    let t = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    lessonkit_cli::corpus::write_synthetic_corpus(dir.path(), LESSONS, 120.0, CORPUS_SEED, false)
        .map_err(|e| e.to_string())?;
    let report = lessonkit_cli::evaluate(dir.path(), BASELINE_SEED, &AnalysisConfig::default(), None)
        .map_err(|e| e.to_string())?;
    let (alg, rnd, uni) = (report.algorithm.means(), report.random.means(), report.uniform.means());
    for (k, name) in ["precision", "recall", "f1", "boundary similarity"].iter().enumerate() {
        ensure(alg[k] > rnd[k] && alg[k] > uni[k], || {
            format!("{name}: algorithm {:.4}, random {:.4}, uniform {:.4}", alg[k], rnd[k], uni[k])
        })?;
    }
    within(t.elapsed(), BUDGET)?;
    Ok(format!(
        "F1 {:.3} vs {:.3}/{:.3}, BS {:.3} vs {:.3}/{:.3}, {:.2?}",
        alg[2],
        rnd[2],
        uni[2],
        alg[3],
        rnd[3],
        uni[3],
        t.elapsed()
    ))
}

/// Minimum (scaled cost, -pairs) over every partial matching of `a` to `b`
/// that only pairs boundaries closer than `w`.
fn brute_force_pairing(a: &[i64], b: &[i64], w: i64) -> (i64, i64) {
    fn go(a: &[i64], b: &[i64], w: i64, used: u32, cost: i64, pairs: i64, best: &mut (i64, i64)) {
        let Some((&x, rest)) = a.split_first() else {
            let unpaired_b = b.len() as i64 - used.count_ones() as i64;
            let total = (cost + w * unpaired_b, -pairs);
            *best = (*best).min(total);
            return;
        };
        go(rest, b, w, used, cost + w, pairs, best);
        for (j, &y) in b.iter().enumerate() {
            let d = (x - y).abs();
            if used >> j & 1 == 0 && d < w {
                go(rest, b, w, used | 1 << j, cost + d, pairs + 1, best);
            }
        }
    }
    let mut best = (i64::MAX, 0);
    go(a, b, w, 0, 0, 0, &mut best);
    best
}

fn subsets(max_len: usize, positions: std::ops::RangeInclusive<i64>) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            let from = s.last().map_or(*positions.start(), |&l: &i64| l + 1);
            for p in from..=*positions.end() {
                let mut t = s.clone();
                t.push(p);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn boundary_similarity() -> Outcome {
    let w = NEAR_MISS_WINDOW;
    let t = Instant::now();
    let sets: Vec<BoundarySet> = subsets(4, 0..=20).into_iter().map(BoundarySet::new).collect();
    for a in &sets {
        let same = eval::boundary_similarity(a, a, w).unwrap();
        ensure(same == 1.0, || format!("bs({a:?}, itself) = {same}"))?;
        if !a.is_empty() {
            let far = BoundarySet::new(a.positions().iter().map(|p| p + 20 + w as i64).collect());
            let apart = eval::boundary_similarity(a, &far, w).unwrap();
            ensure(apart == 0.0, || format!("bs({a:?}, {far:?}) = {apart}"))?;
        }
    }
    let mut compared = 0u64;
    for a in &sets {
        for b in &sets {
            let dp = eval::pair_boundaries(a, b, w);
            let brute = brute_force_pairing(a.positions(), b.positions(), w as i64);
            if (dp.scaled_cost(w), -(dp.pairs() as i64)) != brute {
                return Err(format!("{a:?} vs {b:?}: pairing {dp:?}, optimum {brute:?}"));
            }
            compared += 1;
        }
    }
    Ok(format!(
        "{} sets, {compared} ordered pairs match the exhaustive optimum, {:.2?}",
        sets.len(),
        t.elapsed()
    ))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get_json(app: &Router, uri: &str) -> Result<Value, String> {
    let (status, body) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    ensure(status == StatusCode::OK, || format!("GET {uri}: {status}"))?;
    serde_json::from_slice(&body).map_err(|e| e.to_string())
}

fn multipart(parts: &[(&str, Vec<u8>)]) -> (String, Vec<u8>) {
    let boundary = "acceptance-boundary";
    let mut body = Vec::new();
    for (name, bytes) in parts {
        body.extend_from_slice(
            format!(
                "--{boundary}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}.wav\"\r\n\
                 Content-Type: audio/wav\r\n\r\n"
            )
            .as_bytes(),
        );
        body.extend_from_slice(bytes);
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{boundary}--\r\n").as_bytes());
    (format!("multipart/form-data; boundary={boundary}"), body)
}

fn without_ids(manifest: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(manifest).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("lesson_id");
    obj.remove("media_url");
    v
}

async fn tutoring_loop_inner(work: &Path) -> Outcome {
    let lesson = synth::synth_lesson(77, 60.0);
    let voice = work.join("voice.wav");
    let instrument = work.join("instrument.wav");
    std::fs::write(&voice, encode_wav(lesson.stems.voice(), WavEncoding::Pcm16)).unwrap();
    std::fs::write(&instrument, encode_wav(lesson.stems.instrument(), WavEncoding::Pcm16)).unwrap();

    let storage = work.join("storage");
    let id = "lesson-e2e";
    let lesson_dir = storage.join("lessons").join(id);
    std::fs::create_dir_all(storage.join("lessons")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lessonkit"))
        .args(["preprocess", "--voice"])
        .arg(&voice)
        .arg("--instrument")
        .arg(&instrument)
        .arg("--out")
        .arg(&lesson_dir)
        .env_remove("RUST_LOG")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || format!("preprocess failed: {}", String::from_utf8_lossy(&out.stderr)))?;

    let config = ServerConfig {
        storage_root: storage.clone(),
        ..ServerConfig::default()
    };
    let app = router(AppState::new(config).map_err(|e| e.to_string())?);

    let (status, manifest_bytes) = send(&app, Request::get(format!("/api/lessons/{id}")).body(Body::empty()).unwrap()).await;
    ensure(status == StatusCode::OK, || format!("manifest: {status}"))?;
    let manifest = lessonkit_core::LessonManifest::from_json(&manifest_bytes).map_err(|e| e.to_string())?;
    let total = manifest.voice_regions.len() + manifest.instrument_regions.len();
    let region = manifest
        .instrument_regions
        .iter()
        .find(|r| !manifest.region_notes[&r.id].sequence().is_empty())
        .ok_or("no instrument region with notes")?
        .clone();

    let stems = LessonDir::new(&lesson_dir).read_stems().map_err(|e| e.to_string())?;
    let own = stems.instrument().slice_seconds(region.start, region.end);
    let req = Request::post(format!("/api/lessons/{id}/regions/{}/recordings", region.id))
        .header(header::CONTENT_TYPE, "audio/wav")
        .body(Body::from(encode_wav(&own, WavEncoding::Float32)))
        .unwrap();
    let (status, body) = send(&app, req).await;
    ensure(status == StatusCode::OK, || format!("recording: {status} {}", String::from_utf8_lossy(&body)))?;
    let attempt: Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
    ensure(attempt["report"]["score"] == 100.0, || format!("report {}", attempt["report"]))?;

    let session = get_json(&app, &format!("/api/lessons/{id}/session")).await?;
    ensure(session["region_states"][&region.id] == "aced", || format!("state {}", session["region_states"]))?;
    let expected = serde_json::json!({"to_learn": total - 1, "started": 0, "aced": 1});
    ensure(session["progression"] == expected, || format!("progression {}", session["progression"]))?;

    // the server's own preprocessing of the same files gives the same manifest
    let (ctype, body) = multipart(&[("voice", std::fs::read(&voice).unwrap()), ("instrument", std::fs::read(&instrument).unwrap())]);
    let req = Request::post("/api/lessons").header(header::CONTENT_TYPE, ctype).body(Body::from(body)).unwrap();
    let (status, body) = send(&app, req).await;
    ensure(status == StatusCode::ACCEPTED, || format!("upload: {status}"))?;
    let job_id = serde_json::from_slice::<Value>(&body).unwrap()["job_id"].as_str().unwrap().to_string();
    let deadline = Instant::now() + Duration::from_secs(30);
    let server_id = loop {
        let job = get_json(&app, &format!("/api/jobs/{job_id}")).await?;
        match job["status"].as_str() {
            Some("done") => break job["result"].as_str().unwrap().to_string(),
            Some("failed") => return Err(format!("server job failed: {job}")),
            _ => {}
        }
        ensure(Instant::now() < deadline, || "server job timed out".into())?;
        tokio::time::sleep(Duration::from_millis(20)).await;
    };
    let (_, server_manifest) = send(&app, Request::get(format!("/api/lessons/{server_id}")).body(Body::empty()).unwrap()).await;
    ensure(without_ids(&manifest_bytes) == without_ids(&server_manifest), || {
        "CLI and server manifests differ".into()
    })?;

    Ok(format!("{} scored 100, aced, progression {expected}", region.id))
}

fn tutoring_loop() -> Outcome {
    const BUDGET: Duration = Duration::from_secs(30);
    let t = Instant::now();
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(|e| e.to_string())?;
    let detail = runtime.block_on(tutoring_loop_inner(work.path()))?;
    within(t.elapsed(), BUDGET)?;
    Ok(format!("{detail}, {:.2?}", t.elapsed()))
}

fn random_event(r: &mut impl Rng) -> SessionEvent {
    match r.gen_range(0..6) {
        0 => SessionEvent::Entered,
        1 => SessionEvent::Played,
        2 => SessionEvent::Looped,
        3 => {
            let perfect = r.gen_bool(0.2);
            SessionEvent::Recorded {
                score: if perfect { 100.0 } else { r.gen_range(0.0..100.0) },
                perfect,
            }
        }
        4 => SessionEvent::ScoreOverridden {
            score: if r.gen_bool(0.3) { 100.0 } else { r.gen_range(0.0..100.0) },
        },
        _ => SessionEvent::Played,
    }
}

fn session_fuzz() -> Outcome {
    const SEQUENCES: usize = 10_000;
    const MAX_LEN: usize = 20;
    let regions: Vec<Region> = (0..4)
        .map(|k| Region {
            id: format!("instrument-{k}"),
            start: 2.0 * k as f64,
            end: 2.0 * k as f64 + 1.5,
            track: Track::Instrument,
            source: RegionSource::Auto,
            state: LearningState::ToLearn,
        })
        .collect();
    let mut r = rng(14);
    let mut steps = 0;
    for _ in 0..SEQUENCES {
        let mut state = SessionState::fresh("l", "u", regions.iter().map(|r| r.id.as_str()));
        let mut expected_total = regions.len();
        for _ in 0..r.gen_range(0..=MAX_LEN) {
            let next = if r.gen_bool(0.05) {
                let k = state.user_regions.len();
                let region = Region {
                    id: format!("user-{k}"),
                    start: 10.0 + k as f64,
                    end: 10.5 + k as f64,
                    track: Track::Instrument,
                    source: RegionSource::User,
                    state: LearningState::ToLearn,
                };
                expected_total += 1;
                state.add_user_region(region, None)
            } else {
                let ids: Vec<&String> = state.region_states.keys().collect();
                let id = ids[r.gen_range(0..ids.len())].clone();
                state.transition(&id, random_event(&mut r))
            }
            .map_err(|e| e.to_string())?;

            for (id, &before) in &state.region_states {
                let after = next.state_of(id).ok_or_else(|| format!("{id} vanished"))?;
                ensure(after >= before, || format!("{id} demoted from {before:?} to {after:?}"))?;
                let h0 = state.history.get(id).copied().unwrap_or_default();
                let h1 = next.history.get(id).copied().unwrap_or_default();
                let monotone = h1.played >= h0.played
                    && h1.looped >= h0.looped
                    && h1.recorded >= h0.recorded
                    && h1.aced >= h0.aced;
                ensure(monotone, || format!("{id} counters went from {h0:?} to {h1:?}"))?;
            }
            ensure(next.revision > state.revision, || "revision did not advance".into())?;
            let summary = progression_summary(&next, &regions);
            ensure(summary.total() == expected_total, || {
                format!("summary {summary:?} does not add up to {expected_total}")
            })?;
            state = next;
            steps += 1;
        }
    }
    Ok(format!("{SEQUENCES} sequences, {steps} events"))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("midi conversion", midi_conversion),
        ("lcs matches exhaustive enumeration", lcs_oracle),
        ("score formula", score_formula),
        ("pitch tracking", pitch_tracking),
        ("segmentation grouping rules", segmentation_rules),
        ("synthetic lesson segmentation", synthetic_segmentation),
        ("corpus ordering against baselines", corpus_ordering),
        ("boundary similarity", boundary_similarity),
        ("tutoring loop through cli and server", tutoring_loop),
        ("session state machine fuzz", session_fuzz),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
