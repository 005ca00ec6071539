//! Cohort assembly: mirrored left-foot twins, per-patient recordings, and
//! multi-patient dataset generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaitio::{
    CountSignal, Foot, RawRecording, StrideAnnotation, MAX_COUNT, MIRRORED_CHANNELS,
};
use crate::seed::derive_seed;
use crate::synthgait::profile::SynthProfile;
use crate::synthgait::walk::{synth_walk, SynthWalk};

/// Seed lane for per-patient generator streams.
const PATIENT_LANE: u64 = 0xA5;

/// Count-level mirror truncated to a prefix. A left-foot sensor sees the
/// mirrored channels with inverted sign; with the mid-range count offset
/// that inversion is exactly `MAX_COUNT - c`, so a mirrored twin calibrates
/// to the exact negation of the original and axis alignment restores it
/// bit for bit.
pub fn mirror_counts(counts: &CountSignal, new_length: usize) -> Result<CountSignal> {
    if new_length == 0 || new_length > counts.length() {
        return Err(Error::dimension(format!(
            "mirror prefix of {new_length} samples does not fit a length-{} signal",
            counts.length()
        )));
    }
    let mut values = Vec::with_capacity(6 * new_length);
    for c in 0..6 {
        let src = &counts.channel(c)[..new_length];
        if MIRRORED_CHANNELS.contains(&c) {
            values.extend(src.iter().map(|&v| MAX_COUNT - v));
        } else {
            values.extend_from_slice(src);
        }
    }
    CountSignal::new(values, new_length)
}

/// One synthesized patient: a right-foot walk plus a left foot that is the
/// mirrored, truncated twin of the same counts. The split gives the right
/// foot the extra stride when the total is odd. Twin feet exercise the
/// axis-alignment path without doubling the synthesis work; after
/// alignment both feet carry identical strides.
pub fn generate_recording(
    patient_id: &str,
    annotated_strides: usize,
    profile: &SynthProfile,
    rng: &mut ChaCha8Rng,
) -> Result<(RawRecording, SynthWalk)> {
    if annotated_strides < 2 {
        return Err(Error::validation(
            "a patient needs at least two annotated strides, one per foot",
        ));
    }
    let right_windows = annotated_strides.div_ceil(2);
    let left_windows = annotated_strides - right_windows;
    let walk = synth_walk(right_windows, profile, rng)?;

    let left_end = walk.annotations[left_windows - 1].end + profile.tail;
    let left_counts = mirror_counts(&walk.counts, left_end)?;

    let mut annotations: Vec<StrideAnnotation> = walk.annotations[..left_windows]
        .iter()
        .map(|a| StrideAnnotation {
            foot: Foot::Left,
            ..a.clone()
        })
        .collect();
    annotations.extend(walk.annotations.iter().cloned());

    let recording = RawRecording::new(
        patient_id.to_string(),
        left_counts,
        walk.counts.clone(),
        annotations,
    )?;
    Ok((recording, walk))
}

/// Cohort size and reproducibility knobs for [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub patients: usize,
    /// Annotated strides across the whole cohort, split as evenly as
    /// possible; earlier patients absorb the remainder.
    pub total_strides: usize,
    pub profile: SynthProfile,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            patients: 99,
            total_strides: 1185,
            profile: SynthProfile::default(),
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        if self.patients == 0 {
            return Err(Error::validation("cohort needs at least one patient"));
        }
        if self.total_strides < 2 * self.patients {
            return Err(Error::validation(
                "cohort needs at least two annotated strides per patient",
            ));
        }
        Ok(())
    }

    /// Annotated strides per patient: `total / patients`, with the first
    /// `total % patients` patients taking one extra.
    pub fn strides_per_patient(&self) -> Vec<usize> {
        let base = self.total_strides / self.patients;
        let extra = self.total_strides % self.patients;
        (0..self.patients)
            .map(|i| if i < extra { base + 1 } else { base })
            .collect()
    }

    /// Zero-padded patient ids, stable under lexicographic sorting.
    pub fn patient_ids(&self) -> Vec<String> {
        let width = self.patients.to_string().len();
        (1..=self.patients)
            .map(|i| format!("p{i:0width$}"))
            .collect()
    }
}

/// Generates the whole cohort. Each patient draws from an independent
/// stream derived from the config seed, so the output is reproducible and
/// insensitive to generation order.
pub fn generate_dataset(config: &SynthConfig) -> Result<Vec<RawRecording>> {
    config.validate()?;
    let ids = config.patient_ids();
    let counts = config.strides_per_patient();
    let mut recordings = Vec::with_capacity(config.patients);
    for (i, (id, &n)) in ids.iter().zip(&counts).enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, PATIENT_LANE, i as u64));
        let (recording, _) = generate_recording(id, n, &config.profile, &mut rng)?;
        recordings.push(recording);
    }
    Ok(recordings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaitio::{align_axes, calibrate, load_dataset, write_dataset, TargetId};

    fn small_config() -> SynthConfig {
        let mut config = SynthConfig::default();
        config.patients = 4;
        config.total_strides = 22;
        config
    }

    #[test]
    fn twin_feet_align_to_identical_signals() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (rec, _) = generate_recording("p1", 9, &SynthProfile::default(), &mut rng).unwrap();
        let calib = SynthProfile::default().calib;
        let mut left = calibrate(rec.signal(Foot::Left), &calib).unwrap();
        align_axes(&mut left, Foot::Left).unwrap();
        let right = calibrate(rec.signal(Foot::Right), &calib).unwrap();
        let n = left.length();
        assert!(n < right.length());
        for c in 0..6 {
            assert_eq!(left.channel(c), &right.channel(c)[..n], "channel {c}");
        }
    }

    #[test]
    fn odd_totals_give_the_right_foot_the_extra_stride() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (rec, walk) = generate_recording("p1", 11, &SynthProfile::default(), &mut rng).unwrap();
        assert_eq!(rec.strides_for(Foot::Left).count(), 5);
        assert_eq!(rec.strides_for(Foot::Right).count(), 6);
        assert_eq!(walk.annotations.len(), 6);
        assert_eq!(rec.plausibility_warnings(), 0);
        // Left annotations are the prefix of the right ones, retargeted.
        for (l, r) in rec
            .strides_for(Foot::Left)
            .zip(rec.strides_for(Foot::Right))
        {
            assert_eq!(l.start, r.start);
            assert_eq!(l.end, r.end);
            assert_eq!(l.targets, r.targets);
        }
    }

    #[test]
    fn cohort_split_matches_the_documented_shape() {
        let config = SynthConfig::default();
        let per = config.strides_per_patient();
        assert_eq!(per.len(), 99);
        assert_eq!(per.iter().sum::<usize>(), 1185);
        assert_eq!(per.iter().filter(|&&n| n == 12).count(), 96);
        assert_eq!(per.iter().filter(|&&n| n == 11).count(), 3);
        let ids = config.patient_ids();
        assert_eq!(ids[0], "p01");
        assert_eq!(ids[98], "p99");
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(sorted, ids);
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let config = small_config();
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        assert_eq!(a, b);
        let mut other = config;
        other.seed += 1;
        assert_ne!(generate_dataset(&other).unwrap(), a);
    }

    #[test]
    fn annotations_track_the_population_moments() {
        let mut config = SynthConfig::default();
        config.patients = 30;
        config.total_strides = 6000;
        let recordings = generate_dataset(&config).unwrap();
        let mut lengths = Vec::new();
        let mut stances = Vec::new();
        let mut swings = Vec::new();
        for rec in &recordings {
            for s in rec.strides() {
                lengths.push(s.targets.stride_length_cm);
                stances.push(s.targets.stance_time_s);
                swings.push(s.targets.swing_time_s);
                assert_eq!(
                    s.targets.stance_time_s + s.targets.swing_time_s,
                    s.targets.stride_time_s
                );
            }
        }
        assert_eq!(lengths.len(), 6000);
        let stats = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var =
                v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0);
            (mean, var.sqrt())
        };
        // Saturation pulls the length mean down ~0.1 cm and the std down
        // ~0.4 cm from the unclamped population; the windows allow for
        // that plus sampling noise (twin feet halve the unique draws).
        let (l_mean, l_std) = stats(&lengths);
        assert!((l_mean - 80.63).abs() < 1.3, "length mean {l_mean}");
        assert!((l_std - 23.23).abs() < 1.2, "length std {l_std}");
        let (st_mean, st_std) = stats(&stances);
        assert!((st_mean - 0.85).abs() < 0.02, "stance mean {st_mean}");
        assert!((st_std - 0.16).abs() < 0.02, "stance std {st_std}");
        let (sw_mean, sw_std) = stats(&swings);
        assert!((sw_mean - 0.37).abs() < 0.02, "swing mean {sw_mean}");
        assert!((sw_std - 0.08).abs() < 0.02, "swing std {sw_std}");
    }

    #[test]
    fn generated_cohorts_round_trip_through_disk() {
        let config = small_config();
        let recordings = generate_dataset(&config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &recordings).unwrap();
        let (loaded, summary) = load_dataset(dir.path()).unwrap();
        assert_eq!(loaded, recordings);
        assert_eq!(summary.patients, 4);
        assert_eq!(summary.strides, 22);
        assert_eq!(summary.warnings, 0);
    }

    #[test]
    fn invalid_cohort_shapes_are_rejected() {
        let mut config = SynthConfig::default();
        config.patients = 0;
        assert!(generate_dataset(&config).is_err());
        let mut config = SynthConfig::default();
        config.total_strides = config.patients;
        assert!(generate_dataset(&config).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(generate_recording("p1", 1, &SynthProfile::default(), &mut rng).is_err());
    }

    #[test]
    fn all_targets_stay_in_plausible_ranges() {
        let recordings = generate_dataset(&small_config()).unwrap();
        for rec in &recordings {
            for s in rec.strides() {
                for t in TargetId::ALL {
                    let v = s.targets.get(t);
                    let (lo, hi) = crate::gaitio::plausible_range(t);
                    assert!(v >= lo && v <= hi, "{t} = {v} outside [{lo}, {hi}]");
                }
            }
        }
    }
}
