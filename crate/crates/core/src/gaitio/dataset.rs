//! On-disk dataset layout.
//!
//! A dataset root holds one directory per patient:
//!
//! ```text
//! <root>/<id>/<id>_left.csv      raw counts, header t,ax,ay,az,gx,gy,gz
//! <root>/<id>/<id>_right.csv     same layout
//! <root>/<id>/<id>_strides.csv   annotated strides with reference values
//! ```
//!
//! Signal rows carry a contiguous sample index starting at zero. Stride
//! rows reference their foot's signal by 0-based start (inclusive) and end
//! (exclusive) sample, ascending and non-overlapping per foot.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::gaitio::calib::CountSignal;
use crate::gaitio::types::{Foot, GaitTargets, TargetId};

const SIGNAL_HEADER: [&str; 7] = ["t", "ax", "ay", "az", "gx", "gy", "gz"];
const STRIDE_HEADER: [&str; 11] = [
    "foot",
    "start",
    "end",
    "stride_length_cm",
    "stride_width_cm",
    "foot_angle_deg",
    "stride_time_s",
    "swing_time_s",
    "stance_time_s",
    "heel_contact_s",
    "toe_contact_s",
];

/// Loose physical bounds per target; values outside are logged, not
/// rejected, since odd strides do occur in real recordings.
pub fn plausible_range(target: TargetId) -> (f64, f64) {
    match target {
        TargetId::StrideLength => (-50.0, 300.0),
        TargetId::StrideWidth => (-60.0, 60.0),
        TargetId::FootAngle => (-45.0, 45.0),
        TargetId::StrideTime => (0.1, 5.0),
        TargetId::SwingTime
        | TargetId::StanceTime
        | TargetId::HeelContact
        | TargetId::ToeContact => (0.0, 5.0),
    }
}

/// One annotated stride: a sample window on one foot's signal plus its
/// reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct StrideAnnotation {
    pub foot: Foot,
    pub start: usize,
    pub end: usize,
    pub targets: GaitTargets,
}

impl StrideAnnotation {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Everything recorded for one patient.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecording {
    patient_id: String,
    left: CountSignal,
    right: CountSignal,
    strides: Vec<StrideAnnotation>,
}

impl RawRecording {
    pub fn new(
        patient_id: String,
        left: CountSignal,
        right: CountSignal,
        strides: Vec<StrideAnnotation>,
    ) -> Result<Self> {
        if patient_id.is_empty()
            || !patient_id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::validation(format!(
                "patient id {patient_id:?} is not a safe directory name"
            )));
        }
        let rec = RawRecording {
            patient_id,
            left,
            right,
            strides,
        };
        rec.check_strides()?;
        Ok(rec)
    }

    fn check_strides(&self) -> Result<()> {
        let mut last_end: [usize; 2] = [0, 0];
        for (i, s) in self.strides.iter().enumerate() {
            let signal_len = self.signal(s.foot).length();
            if s.start >= s.end {
                return Err(Error::validation(format!(
                    "patient {}: stride {i} has an empty window [{}, {})",
                    self.patient_id, s.start, s.end
                )));
            }
            if s.end > signal_len {
                return Err(Error::validation(format!(
                    "patient {}: stride {i} ends at {} but the {} signal has {} samples",
                    self.patient_id, s.end, s.foot, signal_len
                )));
            }
            let slot = match s.foot {
                Foot::Left => 0,
                Foot::Right => 1,
            };
            if s.start < last_end[slot] {
                return Err(Error::validation(format!(
                    "patient {}: {} strides overlap or run backwards at index {i}",
                    self.patient_id, s.foot
                )));
            }
            last_end[slot] = s.end;
            for t in TargetId::ALL {
                if !s.targets.get(t).is_finite() {
                    return Err(Error::validation(format!(
                        "patient {}: stride {i} has a non-finite {}",
                        self.patient_id,
                        t.label()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Logs targets outside their loose physical bounds; returns how many.
    pub fn plausibility_warnings(&self) -> usize {
        let mut count = 0;
        for (i, s) in self.strides.iter().enumerate() {
            for t in TargetId::ALL {
                let v = s.targets.get(t);
                let (lo, hi) = plausible_range(t);
                if v < lo || v > hi {
                    log::warn!(
                        "patient {}: stride {i} has implausible {} {v} {}",
                        self.patient_id,
                        t.label(),
                        t.unit()
                    );
                    count += 1;
                }
            }
        }
        count
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    pub fn signal(&self, foot: Foot) -> &CountSignal {
        match foot {
            Foot::Left => &self.left,
            Foot::Right => &self.right,
        }
    }

    pub fn strides(&self) -> &[StrideAnnotation] {
        &self.strides
    }

    pub fn strides_for(&self, foot: Foot) -> impl Iterator<Item = &StrideAnnotation> {
        self.strides.iter().filter(move |s| s.foot == foot)
    }
}

/// What a [`load_dataset`] call found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadSummary {
    pub patients: usize,
    pub strides: usize,
    pub warnings: usize,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn open_csv(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<std::fs::File>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_error(path, 1, e.to_string()))?;
    let headers = reader
        .headers()
        .map_err(|e| parse_error(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(parse_error(
            path,
            1,
            format!("header {got:?} does not match {expected_header:?}"),
        ));
    }
    Ok(reader)
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    index: usize,
    name: &str,
) -> Result<T> {
    let line = record_line(record);
    let raw = record
        .get(index)
        .ok_or_else(|| parse_error(path, line, format!("missing column {name}")))?;
    raw.parse::<T>()
        .map_err(|_| parse_error(path, line, format!("cannot parse {name} from {raw:?}")))
}

fn read_signal(path: &Path) -> Result<CountSignal> {
    let mut reader = open_csv(path, &SIGNAL_HEADER)?;
    let mut rows: Vec<[u16; 6]> = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| parse_error(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let t: usize = parse_field(path, &record, 0, "t")?;
        if t != rows.len() {
            return Err(parse_error(
                path,
                line,
                format!("sample index {t} breaks the contiguous sequence (expected {})", rows.len()),
            ));
        }
        let mut row = [0u16; 6];
        for (c, slot) in row.iter_mut().enumerate() {
            let v: u32 = parse_field(path, &record, c + 1, SIGNAL_HEADER[c + 1])?;
            if v > 4095 {
                return Err(parse_error(
                    path,
                    line,
                    format!("count {v} exceeds the 12-bit range"),
                ));
            }
            *slot = v as u16;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_error(path, 1, "signal file has no samples"));
    }
    // Transpose to channel-major.
    let length = rows.len();
    let mut counts = vec![0u16; 6 * length];
    for (t, row) in rows.iter().enumerate() {
        for c in 0..6 {
            counts[c * length + t] = row[c];
        }
    }
    CountSignal::new(counts, length)
}

fn read_strides(path: &Path) -> Result<Vec<StrideAnnotation>> {
    let mut reader = open_csv(path, &STRIDE_HEADER)?;
    let mut out = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| parse_error(path, 0, e.to_string()))?;
        let line = record_line(&record);
        let foot_raw: String = parse_field(path, &record, 0, "foot")?;
        let foot: Foot = foot_raw
            .parse()
            .map_err(|e: Error| parse_error(path, line, e.to_string()))?;
        let start: usize = parse_field(path, &record, 1, "start")?;
        let end: usize = parse_field(path, &record, 2, "end")?;
        let targets = GaitTargets {
            stride_length_cm: parse_field(path, &record, 3, "stride_length_cm")?,
            stride_width_cm: parse_field(path, &record, 4, "stride_width_cm")?,
            foot_angle_deg: parse_field(path, &record, 5, "foot_angle_deg")?,
            stride_time_s: parse_field(path, &record, 6, "stride_time_s")?,
            swing_time_s: parse_field(path, &record, 7, "swing_time_s")?,
            stance_time_s: parse_field(path, &record, 8, "stance_time_s")?,
            heel_contact_s: parse_field(path, &record, 9, "heel_contact_s")?,
            toe_contact_s: parse_field(path, &record, 10, "toe_contact_s")?,
        };
        out.push(StrideAnnotation {
            foot,
            start,
            end,
            targets,
        });
    }
    Ok(out)
}

fn patient_paths(root: &Path, id: &str) -> (PathBuf, PathBuf, PathBuf) {
    let dir = root.join(id);
    (
        dir.join(format!("{id}_left.csv")),
        dir.join(format!("{id}_right.csv")),
        dir.join(format!("{id}_strides.csv")),
    )
}

/// Loads every patient directory under `root`, sorted by id. A root
/// without any patient directories yields an empty list and a warning,
/// not an error.
pub fn load_dataset(root: &Path) -> Result<(Vec<RawRecording>, LoadSummary)> {
    let mut ids: Vec<String> = Vec::new();
    for entry in std::fs::read_dir(root)? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        match entry.file_name().into_string() {
            Ok(name) => ids.push(name),
            Err(bad) => log::warn!("skipping non-UTF-8 directory {bad:?}"),
        }
    }
    ids.sort();

    let mut recordings = Vec::with_capacity(ids.len());
    let mut summary = LoadSummary::default();
    for id in &ids {
        let (left_path, right_path, strides_path) = patient_paths(root, id);
        for p in [&left_path, &right_path, &strides_path] {
            if !p.is_file() {
                return Err(Error::validation(format!(
                    "patient directory {id} is missing {}",
                    p.display()
                )));
            }
        }
        let left = read_signal(&left_path)?;
        let right = read_signal(&right_path)?;
        let strides = read_strides(&strides_path)?;
        let rec = RawRecording::new(id.clone(), left, right, strides)?;
        summary.warnings += rec.plausibility_warnings();
        summary.strides += rec.strides().len();
        summary.patients += 1;
        recordings.push(rec);
    }
    if recordings.is_empty() {
        log::warn!("no patient directories under {}", root.display());
    }
    Ok((recordings, summary))
}

fn write_signal(path: &Path, signal: &CountSignal) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{}", SIGNAL_HEADER.join(","))?;
    for t in 0..signal.length() {
        writeln!(
            file,
            "{},{},{},{},{},{},{}",
            t,
            signal.get(0, t),
            signal.get(1, t),
            signal.get(2, t),
            signal.get(3, t),
            signal.get(4, t),
            signal.get(5, t)
        )?;
    }
    file.flush()?;
    Ok(())
}

fn write_strides(path: &Path, strides: &[StrideAnnotation]) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "{}", STRIDE_HEADER.join(","))?;
    for s in strides {
        // f64 Display round-trips exactly, so a written dataset reloads
        // bit-identical.
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.foot,
            s.start,
            s.end,
            s.targets.stride_length_cm,
            s.targets.stride_width_cm,
            s.targets.foot_angle_deg,
            s.targets.stride_time_s,
            s.targets.swing_time_s,
            s.targets.stance_time_s,
            s.targets.heel_contact_s,
            s.targets.toe_contact_s
        )?;
    }
    file.flush()?;
    Ok(())
}

/// Writes recordings in the directory-per-patient layout, creating `root`
/// if needed. Existing patient files are overwritten.
pub fn write_dataset(root: &Path, recordings: &[RawRecording]) -> Result<()> {
    std::fs::create_dir_all(root)?;
    for rec in recordings {
        let id = rec.patient_id();
        std::fs::create_dir_all(root.join(id))?;
        let (left_path, right_path, strides_path) = patient_paths(root, id);
        write_signal(&left_path, rec.signal(Foot::Left))?;
        write_signal(&right_path, rec.signal(Foot::Right))?;
        write_strides(&strides_path, rec.strides())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_signal(len: usize, salt: u16) -> CountSignal {
        let mut counts = Vec::with_capacity(6 * len);
        for c in 0..6u16 {
            for t in 0..len as u16 {
                counts.push((c.wrapping_mul(131) ^ t.wrapping_mul(7) ^ salt) % 4096);
            }
        }
        CountSignal::new(counts, len).unwrap()
    }

    fn toy_targets(shift: f64) -> GaitTargets {
        GaitTargets {
            stride_length_cm: 80.5 + shift,
            stride_width_cm: -1.25,
            foot_angle_deg: 0.125,
            stride_time_s: 1.23,
            swing_time_s: 0.37,
            stance_time_s: 0.86,
            heel_contact_s: 0.64,
            toe_contact_s: 0.69,
        }
    }

    fn toy_recording(id: &str) -> RawRecording {
        let strides = vec![
            StrideAnnotation {
                foot: Foot::Left,
                start: 0,
                end: 120,
                targets: toy_targets(0.0),
            },
            StrideAnnotation {
                foot: Foot::Right,
                start: 10,
                end: 130,
                targets: toy_targets(1.0),
            },
            StrideAnnotation {
                foot: Foot::Left,
                start: 120,
                end: 200,
                targets: toy_targets(0.0625),
            },
        ];
        RawRecording::new(id.to_string(), toy_signal(200, 3), toy_signal(210, 5), strides)
            .unwrap()
    }

    #[test]
    fn write_then_load_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let recs = vec![toy_recording("p001"), toy_recording("p002")];
        write_dataset(dir.path(), &recs).unwrap();
        let (back, summary) = load_dataset(dir.path()).unwrap();
        assert_eq!(back, recs);
        assert_eq!(summary.patients, 2);
        assert_eq!(summary.strides, 6);
        assert_eq!(summary.warnings, 0);
    }

    #[test]
    fn empty_root_is_a_warning_not_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let (recs, summary) = load_dataset(dir.path()).unwrap();
        assert!(recs.is_empty());
        assert_eq!(summary, LoadSummary::default());
    }

    #[test]
    fn missing_strides_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &[toy_recording("p001")]).unwrap();
        std::fs::remove_file(dir.path().join("p001/p001_strides.csv")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("p001_strides.csv"), "{err}");
    }

    #[test]
    fn wrong_header_names_the_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &[toy_recording("p001")]).unwrap();
        let path = dir.path().join("p001/p001_left.csv");
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("t,ax", "time,ax")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        match err {
            Error::Parse { path: p, line, .. } => {
                assert!(p.ends_with("p001_left.csv"));
                assert_eq!(line, 1);
            }
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn broken_sample_sequence_is_rejected_with_its_line() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &[toy_recording("p001")]).unwrap();
        let path = dir.path().join("p001/p001_right.csv");
        let mut lines: Vec<String> =
            std::fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
        lines[5] = lines[5].replacen("4,", "9,", 1);
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        match err {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 6);
                assert!(message.contains("contiguous"), "{message}");
            }
            other => panic!("expected a parse error, got {other}"),
        }
    }

    #[test]
    fn counts_beyond_twelve_bits_are_rejected_at_parse_time() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &[toy_recording("p001")]).unwrap();
        let path = dir.path().join("p001/p001_left.csv");
        let mut lines: Vec<String> =
            std::fs::read_to_string(&path).unwrap().lines().map(String::from).collect();
        let fields: Vec<&str> = lines[3].split(',').collect();
        lines[3] = format!("{},9999,{}", fields[0], fields[2..].join(","));
        std::fs::write(&path, lines.join("\n")).unwrap();
        let err = load_dataset(dir.path()).unwrap_err();
        assert!(err.to_string().contains("12-bit"), "{err}");
    }

    #[test]
    fn overlapping_strides_on_one_foot_are_rejected() {
        let strides = vec![
            StrideAnnotation { foot: Foot::Left, start: 0, end: 120, targets: toy_targets(0.0) },
            StrideAnnotation { foot: Foot::Left, start: 100, end: 180, targets: toy_targets(0.0) },
        ];
        let err = RawRecording::new("p".into(), toy_signal(200, 1), toy_signal(200, 2), strides)
            .unwrap_err();
        assert!(err.to_string().contains("overlap"), "{err}");
    }

    #[test]
    fn stride_beyond_the_signal_is_rejected() {
        let strides = vec![StrideAnnotation {
            foot: Foot::Right,
            start: 150,
            end: 260,
            targets: toy_targets(0.0),
        }];
        let err = RawRecording::new("p".into(), toy_signal(300, 1), toy_signal(200, 2), strides)
            .unwrap_err();
        assert!(err.to_string().contains("260"), "{err}");
    }

    #[test]
    fn implausible_targets_warn_but_load() {
        let dir = tempfile::tempdir().unwrap();
        let mut rec = toy_recording("p001");
        rec.strides[0].targets.stride_time_s = 9.0;
        write_dataset(dir.path(), &[rec]).unwrap();
        let (recs, summary) = load_dataset(dir.path()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(summary.warnings, 1);
    }

    #[test]
    fn unsafe_patient_ids_are_rejected() {
        let err = RawRecording::new(
            "../evil".into(),
            toy_signal(10, 1),
            toy_signal(10, 2),
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("directory name"), "{err}");
    }
}
