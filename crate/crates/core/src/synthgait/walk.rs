//! Single-walk synthesis: event timeline, feature embedding, and the
//! inverse read-out used to verify what a generated signal carries.
//!
//! Every target leaves a machine-recoverable trace in the noiseless signal:
//!
//! * stride length sets the sagittal swing peak, read back at the apex
//!   sample;
//! * stride width splits the amplitudes of a lateral pulse pair, read back
//!   from the area difference between the two swing halves;
//! * foot angle sets a constant vertical turn rate over the stride, read
//!   back from the channel mean;
//! * heel and toe contact times set plateau areas on the vertical and
//!   forward accelerometers (discrete plateau area is exactly duration
//!   times height);
//! * stance, swing, and stride times are exact sample spacings between the
//!   toe-off and heel-strike dips the event detector locks onto.
//!
//! All pulse centers land on integer samples, so the noiseless embeddings
//! invert to machine precision and the event timeline survives 12-bit
//! quantization exactly.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gaitio::{
    decalibrate, CountSignal, Foot, GaitTargets, StrideAnnotation, ACCEL_RANGE_G, GYRO_RANGE_DPS,
    SAGITTAL_GYRO, SAMPLE_RATE_HZ,
};
use crate::strideprep::{samples_to_seconds, SAMPLE_PERIOD_S, STRIDE_TENSOR_LEN};
use crate::synthgait::profile::{ParamDistribution, SynthProfile};
use crate::tensorcore::Series;

// Channel indices of the feature carriers, matching CHANNEL_NAMES.
const AX: usize = 0;
const AY: usize = 1;
const AZ: usize = 2;
const GZ: usize = 5;

/// Sagittal swing peak for a zero-length stride, deg/s.
pub const SWING_BASE_DPS: f64 = 30.0;
/// Swing peak growth per cm of stride length, deg/s.
pub const SWING_GAIN_DPS_PER_CM: f64 = 3.0;
/// Depth of the toe-off and heel-strike dips, deg/s.
pub const EVENT_DIP_DPS: f64 = 150.0;
/// Half-width of the event dips, samples.
pub const EVENT_DIP_HALF_WIDTH: usize = 3;
/// Lateral pulse amplitudes are `LATERAL_GAIN_G * (LATERAL_BASE_CM +/- width)`.
pub const LATERAL_BASE_CM: f64 = 40.0;
pub const LATERAL_GAIN_G: f64 = 0.02;
/// Half-width of the lateral pulses, samples.
pub const LATERAL_HALF_WIDTH: usize = 3;
/// Ground-contact plateau height, g.
pub const PLATEAU_G: f64 = 0.9;
/// Half-cosine edge width of the contact plateaus, samples.
pub const PLATEAU_EDGE: usize = 4;
/// Vertical turn rate per degree of foot angle, deg/s.
pub const TURN_DPS_PER_DEG: f64 = 8.0;

/// Ground truth for one synthesized stride. The sample counts are the
/// exact event spacings embedded in the signal; the derived time targets
/// are those counts times the sample period, so event-based times
/// reproduce the annotations bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrideSpec {
    pub n_stance: usize,
    pub n_swing: usize,
    pub n_heel: usize,
    pub n_toe: usize,
    pub length_cm: f64,
    pub width_cm: f64,
    pub angle_deg: f64,
}

impl StrideSpec {
    pub fn n_stride(&self) -> usize {
        self.n_stance + self.n_swing
    }

    /// Annotation targets for this stride.
    pub fn targets(&self) -> GaitTargets {
        let stance = samples_to_seconds(self.n_stance);
        let swing = samples_to_seconds(self.n_swing);
        GaitTargets {
            stride_length_cm: self.length_cm,
            stride_width_cm: self.width_cm,
            foot_angle_deg: self.angle_deg,
            stride_time_s: stance + swing,
            swing_time_s: swing,
            stance_time_s: stance,
            heel_contact_s: samples_to_seconds(self.n_heel),
            toe_contact_s: samples_to_seconds(self.n_toe),
        }
    }
}

const MAX_REDRAWS: usize = 1000;

/// Draws one stride. Oversized draws (stride longer than `max_samples`)
/// are redrawn whole; with the default population that is a several-sigma
/// event, so the redraw loop fires essentially never.
pub fn sample_stride<R: Rng>(
    params: &ParamDistribution,
    rng: &mut R,
    max_samples: usize,
) -> Result<StrideSpec> {
    for _ in 0..MAX_REDRAWS {
        let length_cm = params.stride_length_cm.sample(rng);
        let width_cm = params.stride_width_cm.sample(rng);
        let angle_deg = params.foot_angle_deg.sample(rng);
        let stance_s = params.stance_time_s.sample(rng);
        let swing_s = params.swing_time_s.sample(rng);
        let heel_s = params.heel_contact_s.sample(rng);
        let toe_s = params.toe_contact_s.sample(rng);

        let n_stance = (stance_s * SAMPLE_RATE_HZ).round() as usize;
        // The swing snaps to a multiple of four samples so the apex and
        // both lateral pulses land on integer sample indices.
        let n_swing = ((swing_s * SAMPLE_RATE_HZ / 4.0).round() as usize).max(4) * 4;
        if n_stance < 2 * PLATEAU_EDGE || n_stance + n_swing > max_samples {
            continue;
        }
        // Contact plateaus must fit inside stance with room for the edges.
        let cap = n_stance - PLATEAU_EDGE;
        let n_heel = ((heel_s * SAMPLE_RATE_HZ).round() as usize).clamp(PLATEAU_EDGE, cap);
        let n_toe = ((toe_s * SAMPLE_RATE_HZ).round() as usize).clamp(PLATEAU_EDGE, cap);
        return Ok(StrideSpec {
            n_stance,
            n_swing,
            n_heel,
            n_toe,
            length_cm,
            width_cm,
            angle_deg,
        });
    }
    Err(Error::validation(
        "stride sampling kept violating the size limits; distribution bounds \
         and tensor length are inconsistent",
    ))
}

/// Where one stride landed in the walk. `toe_off` is the stride's own
/// swing onset, between its two heel strikes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddedStride {
    pub heel_strike: usize,
    pub toe_off: usize,
    pub heel_strike_next: usize,
    pub spec: StrideSpec,
}

/// One synthesized foot-worth of walking.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthWalk {
    /// Noiseless physical-unit signal; the decode oracle reads this.
    pub float_signal: Series,
    /// Quantized 12-bit counts with noise applied, right-foot convention.
    pub counts: CountSignal,
    /// One annotation per window, all marked [`Foot::Right`].
    pub annotations: Vec<StrideAnnotation>,
    /// The `windows - 1` strides actually embedded in the signal.
    pub strides: Vec<EmbeddedStride>,
}

/// Adds a raised-cosine bump with its apex (value `amplitude`) exactly at
/// `center` and mathematically zero beyond `center +/- half_width`. Only
/// the interior nonzero samples are touched; the discrete bump area is
/// exactly `amplitude * half_width`.
fn add_bump(series: &mut Series, channel: usize, center: usize, half_width: usize, amplitude: f64) {
    debug_assert!(half_width >= 1);
    let w = half_width as f64;
    let lo = center.saturating_sub(half_width - 1);
    let hi = (center + half_width - 1).min(series.length() - 1);
    for t in lo..=hi {
        let d = t as f64 - center as f64;
        let bump = amplitude * 0.5 * (1.0 + (std::f64::consts::PI * d / w).cos());
        series.set(channel, t, series.get(channel, t) + bump);
    }
}

/// Adds a flat-top plateau with half-cosine edges. The first nonzero
/// sample is `support_start`, the support spans `area_len + edge - 1`
/// samples, and the discrete area is exactly `area_len * amplitude`: the
/// two soft edges together contribute `edge - 1` sample-areas, the flat
/// top the remaining `area_len - edge + 1`.
fn add_plateau(
    series: &mut Series,
    channel: usize,
    support_start: usize,
    area_len: usize,
    edge: usize,
    amplitude: f64,
) {
    debug_assert!(edge >= 1 && area_len >= edge);
    let flat_start = support_start + edge - 1;
    let flat_end = support_start + area_len - 1;
    for k in 1..edge {
        let v = amplitude * 0.5 * (1.0 + (std::f64::consts::PI * k as f64 / edge as f64).cos());
        let rise = flat_start - k;
        let fall = flat_end + k;
        series.set(channel, rise, series.get(channel, rise) + v);
        series.set(channel, fall, series.get(channel, fall) + v);
    }
    for t in flat_start..=flat_end {
        series.set(channel, t, series.get(channel, t) + amplitude);
    }
}

fn add_constant(series: &mut Series, channel: usize, start: usize, end: usize, value: f64) {
    for t in start..end {
        series.set(channel, t, series.get(channel, t) + value);
    }
}

fn embed_stride(signal: &mut Series, stride: &EmbeddedStride, scale: f64) {
    let spec = &stride.spec;
    let q = spec.n_swing / 4;
    // Swing bump strictly inside (toe-off, heel strike) so the event dips
    // stay the window minima.
    let apex = stride.toe_off + 2 * q;
    let peak = (SWING_BASE_DPS + SWING_GAIN_DPS_PER_CM * spec.length_cm) * scale;
    add_bump(signal, SAGITTAL_GYRO, apex, 2 * q - 2, peak);
    // Lateral pulse pair at the swing quarter points; the amplitude split
    // carries the stride width.
    let early = LATERAL_GAIN_G * (LATERAL_BASE_CM + spec.width_cm);
    let late = LATERAL_GAIN_G * (LATERAL_BASE_CM - spec.width_cm);
    add_bump(signal, AY, stride.toe_off + q, LATERAL_HALF_WIDTH, early);
    add_bump(signal, AY, stride.toe_off + 3 * q, LATERAL_HALF_WIDTH, late);
    // Heel contact starts at the heel strike, toe contact ends at toe-off.
    add_plateau(signal, AZ, stride.heel_strike, spec.n_heel, PLATEAU_EDGE, PLATEAU_G);
    let toe_support = stride.toe_off + 2 - spec.n_toe - PLATEAU_EDGE;
    add_plateau(signal, AX, toe_support, spec.n_toe, PLATEAU_EDGE, PLATEAU_G);
    add_constant(
        signal,
        GZ,
        stride.heel_strike,
        stride.heel_strike_next,
        TURN_DPS_PER_DEG * spec.angle_deg * scale,
    );
}

/// Synthesizes one walk with `windows` annotated strides. The first window
/// is landed by an unannotated lead-in swing and the last sampled stride
/// only labels the final window, so `windows - 1` strides are embedded.
pub fn synth_walk<R: Rng>(windows: usize, profile: &SynthProfile, rng: &mut R) -> Result<SynthWalk> {
    profile.validate()?;
    if windows == 0 {
        return Err(Error::validation("a walk needs at least one annotated stride"));
    }

    // All stride parameters are drawn before any noise so the rng stream
    // layout depends only on the window count.
    let mut specs = Vec::with_capacity(windows);
    for _ in 0..windows {
        specs.push(sample_stride(&profile.params, rng, STRIDE_TENSOR_LEN)?);
    }
    let pad = profile.event_pad;
    for spec in &specs[..windows - 1] {
        if spec.n_stance < 2 * pad + 1 {
            return Err(Error::validation(
                "stance shorter than two annotation margins; lower event_pad \
                 or raise the stance floor",
            ));
        }
    }

    // Event timeline. A lead-in swing plants the first heel strike; each
    // embedded stride then appends its stance and swing.
    let mut toe_offs = vec![profile.lead_stance];
    let mut heel_strikes = vec![profile.lead_stance + profile.lead_swing];
    let mut strides = Vec::with_capacity(windows - 1);
    for spec in &specs[..windows - 1] {
        let hs = *heel_strikes.last().unwrap();
        let to = hs + spec.n_stance;
        toe_offs.push(to);
        heel_strikes.push(to + spec.n_swing);
        strides.push(EmbeddedStride {
            heel_strike: hs,
            toe_off: to,
            heel_strike_next: to + spec.n_swing,
            spec: *spec,
        });
    }
    let last_hs = *heel_strikes.last().unwrap();
    let length = last_hs + pad + 1 + profile.tail;

    let mut signal = Series::zeros(6, length);
    let scale = profile.gyro_scale;
    for (&to, &hs) in toe_offs.iter().zip(&heel_strikes) {
        add_bump(&mut signal, SAGITTAL_GYRO, to, EVENT_DIP_HALF_WIDTH, -EVENT_DIP_DPS * scale);
        add_bump(&mut signal, SAGITTAL_GYRO, hs, EVENT_DIP_HALF_WIDTH, -EVENT_DIP_DPS * scale);
    }
    // Lead-in swing bump, amplitude from the population mean length.
    let lead_peak = (SWING_BASE_DPS
        + SWING_GAIN_DPS_PER_CM * profile.params.stride_length_cm.mean)
        * scale;
    add_bump(
        &mut signal,
        SAGITTAL_GYRO,
        toe_offs[0] + profile.lead_swing / 2,
        profile.lead_swing / 2 - 2,
        lead_peak,
    );
    for stride in &strides {
        embed_stride(&mut signal, stride, scale);
    }

    let float_signal = signal.clone();
    if profile.noise_level > 0.0 {
        for c in 0..6 {
            let range = if c < 3 { ACCEL_RANGE_G } else { GYRO_RANGE_DPS };
            let noise =
                Normal::new(0.0, profile.noise_level * range).expect("level validated nonnegative");
            for t in 0..length {
                signal.set(c, t, signal.get(c, t) + noise.sample(rng));
            }
        }
    }
    let counts = decalibrate(&signal, &profile.calib)?;

    let annotations = toe_offs
        .iter()
        .zip(&heel_strikes)
        .zip(&specs)
        .map(|((&to, &hs), spec)| StrideAnnotation {
            foot: Foot::Right,
            start: to - pad,
            end: hs + pad + 1,
            targets: spec.targets(),
        })
        .collect();

    Ok(SynthWalk {
        float_signal,
        counts,
        annotations,
        strides,
    })
}

/// Parameters read back from a noiseless signal by inverting the
/// embedding maps. An independent check that a generated dataset carries
/// what its annotations claim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodedTargets {
    pub stride_length_cm: f64,
    pub stride_width_cm: f64,
    pub foot_angle_deg: f64,
    pub heel_contact_s: f64,
    pub toe_contact_s: f64,
}

pub fn decode_targets(
    signal: &Series,
    stride: &EmbeddedStride,
    profile: &SynthProfile,
) -> Result<DecodedTargets> {
    if signal.channels() != 6 || stride.heel_strike_next > signal.length() {
        return Err(Error::dimension("stride does not fit the signal"));
    }
    let scale = profile.gyro_scale;
    let q = stride.spec.n_swing / 4;

    let apex = signal.get(SAGITTAL_GYRO, stride.toe_off + 2 * q);
    let stride_length_cm = (apex / scale - SWING_BASE_DPS) / SWING_GAIN_DPS_PER_CM;

    // Each swing half holds one full lateral pulse of area amplitude *
    // half-width.
    let ay = signal.channel(AY);
    let early: f64 = ay[stride.toe_off..stride.toe_off + 2 * q].iter().sum();
    let late: f64 = ay[stride.toe_off + 2 * q..stride.heel_strike_next]
        .iter()
        .sum();
    let stride_width_cm = (early - late) / (2.0 * LATERAL_GAIN_G * LATERAL_HALF_WIDTH as f64);

    let span = stride.heel_strike..stride.heel_strike_next;
    let turn: f64 = signal.channel(GZ)[span.clone()].iter().sum();
    let foot_angle_deg = turn / span.len() as f64 / (TURN_DPS_PER_DEG * scale);

    let heel_area: f64 = signal.channel(AZ)[span.clone()].iter().sum();
    let heel_contact_s = heel_area / PLATEAU_G * SAMPLE_PERIOD_S;
    let toe_area: f64 = signal.channel(AX)[span].iter().sum();
    let toe_contact_s = toe_area / PLATEAU_G * SAMPLE_PERIOD_S;

    Ok(DecodedTargets {
        stride_length_cm,
        stride_width_cm,
        foot_angle_deg,
        heel_contact_s,
        toe_contact_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaitio::calibrate;
    use crate::strideprep::{detect_events, EventConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn noiseless() -> SynthProfile {
        let mut profile = SynthProfile::default();
        profile.noise_level = 0.0;
        profile
    }

    #[test]
    fn sampled_strides_respect_structural_limits() {
        let params = ParamDistribution::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..3000 {
            let s = sample_stride(&params, &mut rng, 256).unwrap();
            assert!(s.n_stride() <= 256);
            assert_eq!(s.n_swing % 4, 0);
            assert!(s.n_swing >= 16);
            assert!(s.n_heel >= PLATEAU_EDGE && s.n_heel <= s.n_stance - PLATEAU_EDGE);
            assert!(s.n_toe >= PLATEAU_EDGE && s.n_toe <= s.n_stance - PLATEAU_EDGE);
            let t = s.targets();
            assert_eq!(t.stance_time_s + t.swing_time_s, t.stride_time_s);
            assert!(t.heel_contact_s <= t.stance_time_s);
            assert!(t.toe_contact_s <= t.stance_time_s);
        }
    }

    #[test]
    fn timeline_and_annotations_are_consistent() {
        let profile = SynthProfile::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let windows = 5;
        let walk = synth_walk(windows, &profile, &mut rng).unwrap();
        assert_eq!(walk.annotations.len(), windows);
        assert_eq!(walk.strides.len(), windows - 1);

        let pad = profile.event_pad;
        assert_eq!(walk.annotations[0].start, profile.lead_stance - pad);
        assert_eq!(
            walk.annotations[0].end,
            profile.lead_stance + profile.lead_swing + pad + 1
        );
        for (k, stride) in walk.strides.iter().enumerate() {
            // Window k + 1 brackets stride k's toe-off and landing.
            assert_eq!(walk.annotations[k + 1].start, stride.toe_off - pad);
            assert_eq!(walk.annotations[k + 1].end, stride.heel_strike_next + pad + 1);
            // Window k's targets describe stride k.
            assert_eq!(walk.annotations[k].targets, stride.spec.targets());
            assert_eq!(stride.toe_off - stride.heel_strike, stride.spec.n_stance);
            assert_eq!(stride.heel_strike_next - stride.toe_off, stride.spec.n_swing);
            if k > 0 {
                assert_eq!(walk.strides[k - 1].heel_strike_next, stride.heel_strike);
            }
        }
        // The signal ends one tail past the last window.
        let last = walk.annotations.last().unwrap();
        assert_eq!(walk.counts.length(), last.end + profile.tail);
        assert_eq!(walk.float_signal.length(), walk.counts.length());
    }

    #[test]
    fn noiseless_decode_inverts_the_embedding() {
        let profile = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let walk = synth_walk(8, &profile, &mut rng).unwrap();
        for stride in &walk.strides {
            let d = decode_targets(&walk.float_signal, stride, &profile).unwrap();
            let spec = &stride.spec;
            assert!((d.stride_length_cm - spec.length_cm).abs() < 1e-9);
            assert!((d.stride_width_cm - spec.width_cm).abs() < 1e-9);
            assert!((d.foot_angle_deg - spec.angle_deg).abs() < 1e-9);
            let t = spec.targets();
            assert!((d.heel_contact_s - t.heel_contact_s).abs() < 1e-9);
            assert!((d.toe_contact_s - t.toe_contact_s).abs() < 1e-9);
        }
    }

    #[test]
    fn quantized_walk_reproduces_the_event_timeline() {
        let profile = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let walk = synth_walk(6, &profile, &mut rng).unwrap();
        let physical = calibrate(&walk.counts, &profile.calib).unwrap();
        let mut expected = vec![(profile.lead_stance, profile.lead_stance + profile.lead_swing)];
        expected.extend(walk.strides.iter().map(|s| (s.toe_off, s.heel_strike_next)));
        for (ann, (to, hs)) in walk.annotations.iter().zip(expected) {
            let window = physical.window(ann.start, ann.end).unwrap();
            let events = detect_events(&window, &EventConfig::default()).unwrap();
            assert_eq!(ann.start + events.toe_off, to);
            assert_eq!(ann.start + events.heel_strike, hs);
        }
    }

    #[test]
    fn default_noise_keeps_events_exact() {
        let profile = SynthProfile::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let walk = synth_walk(6, &profile, &mut rng).unwrap();
        let physical = calibrate(&walk.counts, &profile.calib).unwrap();
        for (ann, stride) in walk.annotations.iter().skip(1).zip(&walk.strides) {
            let window = physical.window(ann.start, ann.end).unwrap();
            let events = detect_events(&window, &EventConfig::default()).unwrap();
            assert_eq!(ann.start + events.toe_off, stride.toe_off);
            assert_eq!(ann.start + events.heel_strike, stride.heel_strike_next);
        }
    }

    #[test]
    fn tiny_gyro_scale_breaks_detection() {
        let mut profile = noiseless();
        profile.gyro_scale = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let walk = synth_walk(3, &profile, &mut rng).unwrap();
        let physical = calibrate(&walk.counts, &profile.calib).unwrap();
        let ann = &walk.annotations[1];
        let window = physical.window(ann.start, ann.end).unwrap();
        assert!(matches!(
            detect_events(&window, &EventConfig::default()),
            Err(Error::Detection(_))
        ));
    }

    #[test]
    fn walks_are_deterministic_per_seed() {
        let profile = SynthProfile::default();
        let a = synth_walk(4, &profile, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = synth_walk(4, &profile, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let c = synth_walk(4, &profile, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
    }
}
