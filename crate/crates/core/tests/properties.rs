use proptest::prelude::*;

use lessonkit_core::audio::{self, AudioBuffer, WavEncoding, WindowSpec, CANONICAL_RATE};
use lessonkit_core::eval::{boundary_similarity, BoundarySet};
use lessonkit_core::notes::{contour_to_notes, freq_to_midi, midi_to_freq, SequenceSource};
use lessonkit_core::pitch::{filter_confident, PitchContour, PitchFrame};
use lessonkit_core::scoring::{self, matching_blocks, mismatch_blocks};
use lessonkit_core::segmentation::{self, EnergyProfile, GroupingParams, SilenceLabels};
use lessonkit_core::session::{progression_summary, SessionEvent, SessionState};
use lessonkit_core::{LearningState, NoteSequence, Region, RegionSource, Track};

fn sample_vec() -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-1.0f32..=1.0, 0..2000)
}

proptest! {
    #[test]
    fn pcm16_round_trip_is_within_one_step(samples in sample_vec()) {
        prop_assume!(!samples.is_empty());
        let buf = AudioBuffer::new(samples, CANONICAL_RATE).unwrap();
        let back = audio::decode_wav(&audio::encode_wav(&buf, WavEncoding::Pcm16)).unwrap();
        prop_assert_eq!(back.len(), buf.len());
        for (a, b) in buf.samples().iter().zip(back.samples()) {
            prop_assert!((a - b).abs() <= 1.0 / 32768.0 + 1e-7);
        }
    }

    #[test]
    fn windows_partition_the_buffer(samples in sample_vec(), width in 1usize..600) {
        let buf = AudioBuffer::new(samples.clone(), CANONICAL_RATE).unwrap();
        let spec = WindowSpec { window_seconds: width as f64 / CANONICAL_RATE as f64, window_samples: width };
        let ws = audio::windows(&buf, &spec);
        let joined: Vec<f32> = ws.iter().flat_map(|w| w.samples.to_vec()).collect();
        prop_assert_eq!(joined, samples);
        prop_assert!(ws.iter().rev().skip(1).all(|w| !w.partial));
    }

    #[test]
    fn stereo_mixdown_ignores_channel_order(frames in prop::collection::vec((any::<i16>(), any::<i16>()), 1..200)) {
        let encode = |swap: bool| {
            let spec = hound::WavSpec { channels: 2, sample_rate: 8000, bits_per_sample: 16, sample_format: hound::SampleFormat::Int };
            let mut cursor = std::io::Cursor::new(Vec::new());
            let mut w = hound::WavWriter::new(&mut cursor, spec).unwrap();
            for &(l, r) in &frames {
                let (a, b) = if swap { (r, l) } else { (l, r) };
                w.write_sample(a).unwrap();
                w.write_sample(b).unwrap();
            }
            w.finalize().unwrap();
            cursor.into_inner()
        };
        prop_assert_eq!(audio::decode_wav(&encode(false)).unwrap(), audio::decode_wav(&encode(true)).unwrap());
    }

    #[test]
    fn raising_threshold_never_adds_non_silent_windows(
        rms in prop::collection::vec(0.0f64..1.0, 1..300),
        lo in 0.0f64..1.0,
        delta in 0.0f64..1.0,
    ) {
        let p = EnergyProfile { rms, window_seconds: 0.02 };
        let low = segmentation::label_silence(&p, lo);
        let high = segmentation::label_silence(&p, lo + delta);
        for (l, h) in low.labels.iter().zip(&high.labels) {
            prop_assert!(!h || *l);
        }
    }

    #[test]
    fn adaptive_threshold_labels_are_monotone_in_rms(rms in prop::collection::vec(0.0f64..1.0, 2..400)) {
        let p = EnergyProfile { rms: rms.clone(), window_seconds: 0.02 };
        if let Ok(t) = segmentation::adaptive_threshold(&p, 100, 2.0) {
            prop_assert!(t >= 0.0 && t <= p.max());
            let labels = segmentation::label_silence(&p, t).labels;
            for i in 0..rms.len() {
                for j in 0..rms.len() {
                    if rms[i] >= rms[j] && labels[j] {
                        prop_assert!(labels[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn grouped_regions_are_sorted_long_and_idempotent(labels in prop::collection::vec(any::<bool>(), 0..800)) {
        let w = 0.02;
        let params = GroupingParams::default();
        let regions = segmentation::group_regions(&SilenceLabels { labels: labels.clone(), threshold: 0.0 }, w, params, Track::Voice);
        for r in &regions {
            prop_assert!(r.duration() >= 1.0 - 1e-9);
            prop_assert!(r.start < r.end);
            // at least one non-silent window inside
            let lo = (r.start / w).round() as usize;
            let hi = (r.end / w).round() as usize;
            prop_assert!(labels[lo..hi].iter().any(|&x| x));
        }
        for pair in regions.windows(2) {
            prop_assert!(pair[1].start - pair[0].end > 2.0);
        }
        let mut implied = vec![false; labels.len()];
        for r in &regions {
            let lo = (r.start / w).round() as usize;
            let hi = (r.end / w).round() as usize;
            implied[lo..hi].iter_mut().for_each(|x| *x = true);
        }
        let again = segmentation::group_regions(&SilenceLabels { labels: implied, threshold: 0.0 }, w, params, Track::Voice);
        prop_assert_eq!(again, regions);
    }

    #[test]
    fn confidence_filter_preserves_grid_and_is_monotone(
        frames in prop::collection::vec((prop::option::of(60.0f64..1400.0), 0.0f64..=1.0), 0..100),
        lo in 0.0f64..=1.0,
        delta in 0.0f64..=1.0,
    ) {
        let contour = PitchContour {
            frames: frames.iter().enumerate().map(|(i, &(f0, c))| PitchFrame { time: (i as f64 + 0.5) * 0.1, f0, confidence: c }).collect(),
            frame_seconds: 0.1,
        };
        let a = filter_confident(&contour, lo);
        let b = filter_confident(&contour, (lo + delta).min(1.0));
        prop_assert_eq!(a.frames.len(), contour.frames.len());
        for ((x, y), orig) in a.frames.iter().zip(&b.frames).zip(&contour.frames) {
            prop_assert_eq!(x.time, orig.time);
            prop_assert!(!y.is_voiced() || x.is_voiced());
        }
    }

    #[test]
    fn octave_adds_twelve(f in 1e-3f64..1e5) {
        let d = freq_to_midi(2.0 * f).unwrap() - freq_to_midi(f).unwrap();
        prop_assert!((d - 12.0).abs() < 1e-9);
    }

    #[test]
    fn midi_conversion_is_strictly_increasing(f in 1.0f64..10_000.0, step in 1e-6f64..100.0) {
        prop_assert!(freq_to_midi(f + step).unwrap() > freq_to_midi(f).unwrap());
    }

    #[test]
    fn note_aggregation_round_trips(grid in prop::collection::vec(prop::option::of(40u8..90), 0..120)) {
        let contour = PitchContour {
            frames: grid.iter().enumerate().map(|(i, m)| PitchFrame {
                time: (i as f64 + 0.5) * 0.1,
                f0: m.map(|m| midi_to_freq(m as f64)),
                confidence: if m.is_some() { 1.0 } else { 0.0 },
            }).collect(),
            frame_seconds: 0.1,
        };
        let (seq, curve) = contour_to_notes(&contour, SequenceSource::Reference);
        prop_assert_eq!(curve.times.len(), grid.len());

        // expand back to a per-frame grid
        let mut expanded = vec![None; grid.len()];
        let mut frames = 0usize;
        for n in &seq.notes {
            let first = (n.onset / 0.1).round() as usize;
            let count = (n.duration / 0.1).round() as usize;
            frames += count;
            for slot in &mut expanded[first..first + count] {
                *slot = Some(n.midi);
            }
        }
        prop_assert_eq!(&expanded, &grid);
        prop_assert_eq!(frames, grid.iter().filter(|m| m.is_some()).count());
        let total: f64 = seq.notes.iter().map(|n| n.duration).sum();
        prop_assert!((total - frames as f64 * 0.1).abs() < 1e-6);
        for pair in seq.notes.windows(2) {
            let touching = (pair[0].end() - pair[1].onset).abs() < 1e-9;
            prop_assert!(!(touching && pair[0].midi == pair[1].midi));
        }
    }

    #[test]
    fn matching_blocks_are_ordered_equal_and_disjoint(
        t in prop::collection::vec(0u8..5, 0..20),
        r in prop::collection::vec(0u8..5, 0..20),
    ) {
        let blocks = matching_blocks(&t, &r);
        for b in &blocks {
            prop_assert!(b.len > 0);
            prop_assert_eq!(&t[b.target_start..b.target_start + b.len], &r[b.recording_start..b.recording_start + b.len]);
        }
        for pair in blocks.windows(2) {
            prop_assert!(pair[0].target_start + pair[0].len <= pair[1].target_start);
            prop_assert!(pair[0].recording_start + pair[0].len <= pair[1].recording_start);
        }
        // matched plus mismatched elements cover both sequences exactly
        let spans = mismatch_blocks(&t, &r);
        let matched: usize = blocks.iter().map(|b| b.len).sum();
        prop_assert_eq!(matched + spans.iter().map(|s| s.target.len()).sum::<usize>(), t.len());
        prop_assert_eq!(matched + spans.iter().map(|s| s.recording.len()).sum::<usize>(), r.len());
        prop_assert!(spans.iter().all(|s| !s.target.is_empty() || !s.recording.is_empty()));
    }

    #[test]
    fn score_bounds_and_missed_count(
        t in prop::collection::vec(55u8..80, 1..15),
        r in prop::collection::vec(55u8..80, 0..15),
    ) {
        let rep = scoring::score_sequences(&t, &r).unwrap();
        prop_assert!((0.0..=100.0).contains(&rep.score_percent));
        prop_assert!(rep.matched_count <= t.len().min(r.len()));
        prop_assert_eq!(rep.missed_notes.len(), rep.target_count - rep.matched_count);
        prop_assert_eq!(rep.matched_count, scoring::lcs_length(&t, &r));
    }

    #[test]
    fn query_matches_supersequences(
        q in prop::collection::vec(55u8..80, 1..8),
        noise in prop::collection::vec((0usize..10, 40u8..90), 0..10),
    ) {
        let mut cand = q.clone();
        for (pos, m) in noise {
            let at = pos.min(cand.len());
            cand.insert(at, m);
        }
        let region = Region { id: "r".into(), start: 0.0, end: 1.0, track: Track::Instrument, source: RegionSource::Auto, state: LearningState::ToLearn };
        let hits = scoring::query_regions(
            &NoteSequence::from_midi(&q, SequenceSource::Reference),
            &[(region, NoteSequence::from_midi(&cand, SequenceSource::Reference))],
            80.0,
        ).unwrap();
        prop_assert_eq!(hits.len(), 1);
    }

    #[test]
    fn boundary_similarity_is_symmetric_and_bounded(
        a in prop::collection::btree_set(0i64..60, 0..12),
        b in prop::collection::btree_set(0i64..60, 0..12),
        window in 1u32..8,
    ) {
        let a = BoundarySet::new(a.into_iter().collect());
        let b = BoundarySet::new(b.into_iter().collect());
        let ab = boundary_similarity(&a, &b, window).unwrap();
        let ba = boundary_similarity(&b, &a, window).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(boundary_similarity(&a, &a, window).unwrap(), 1.0);
    }

    #[test]
    fn session_never_regresses(events in prop::collection::vec((0usize..4, 0u8..6, 0.0f64..=100.0), 0..20)) {
        let regions: Vec<Region> = (0..4).map(|i| Region {
            id: format!("r{i}"), start: i as f64 * 3.0, end: i as f64 * 3.0 + 2.0,
            track: Track::Instrument, source: RegionSource::Auto, state: LearningState::ToLearn,
        }).collect();
        let mut s = SessionState::fresh("l", "u", regions.iter().map(|r| r.id.as_str()));
        for (idx, kind, score) in events {
            let event = match kind {
                0 => SessionEvent::Entered,
                1 => SessionEvent::Played,
                2 => SessionEvent::Looped,
                3 => SessionEvent::Recorded { score, perfect: score >= 100.0 },
                4 => SessionEvent::Recorded { score: 100.0, perfect: true },
                _ => SessionEvent::ScoreOverridden { score },
            };
            let next = s.transition(&regions[idx].id, event).unwrap();
            for r in &regions {
                prop_assert!(next.state_of(&r.id) >= s.state_of(&r.id));
                let (h0, h1) = (s.history.get(&r.id).copied().unwrap_or_default(), next.history.get(&r.id).copied().unwrap_or_default());
                prop_assert!(h1.played >= h0.played && h1.looped >= h0.looped && h1.recorded >= h0.recorded && h1.aced >= h0.aced);
            }
            prop_assert!(next.revision > s.revision);
            prop_assert_eq!(progression_summary(&next, &regions).total(), regions.len());
            s = next;
        }
    }
}
