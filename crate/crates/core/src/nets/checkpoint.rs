//! Binary model checkpoints.
//!
//! Layout, all integers little endian:
//!
//! ```text
//! magic            8 bytes  b"GAITCNN\0"
//! version          u32
//! header_len       u64
//! header           JSON, header_len bytes
//! param_count      u64
//! params           param_count f64 values
//! checksum         32 bytes, SHA-256 over everything above
//! ```
//!
//! Parameters are stored per member in layer order, weights before biases,
//! matching `NetworkGraph::param_tensors_mut`. The header pins the
//! conventions that give those numbers meaning (flatten order, padding),
//! so a reader can refuse a file it would silently misinterpret.
//!
//! A model is stored either as one combined file holding every member, or
//! as one file per ensemble member (`member_index`/`member_count` set in
//! the header). Member files are reassembled with [`load_model`], which
//! also accepts a single combined file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gaitio::TargetId;
use crate::nets::build::{ModelKind, NetSpec, Preset};
use crate::nets::model::{Model, TrainedNet};
use crate::nets::scaler::TargetScaler;

pub const CHECKPOINT_VERSION: u32 = 1;

const MAGIC: &[u8; 8] = b"GAITCNN\0";
const FLATTEN_ORDER: &str = "channel-major";
const PADDING: &str = "same-zero";
const TENSOR_LAYOUT: &str = "per-member layer order, weights then biases";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    preset: Preset,
    targets: Vec<String>,
    scaler: TargetScaler,
    members: Vec<NetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    member_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    member_count: Option<usize>,
    flatten_order: String,
    padding: String,
    tensor_layout: String,
    metadata: serde_json::Value,
}

fn corrupt(message: impl Into<String>) -> Error {
    Error::Checkpoint(message.into())
}

fn header_for(model: &Model, metadata: &serde_json::Value) -> Header {
    Header {
        kind: model.kind(),
        preset: model.preset(),
        targets: model.targets().iter().map(|t| t.key().to_string()).collect(),
        scaler: model.scaler().clone(),
        members: Vec::new(),
        member_index: None,
        member_count: None,
        flatten_order: FLATTEN_ORDER.to_string(),
        padding: PADDING.to_string(),
        tensor_layout: TENSOR_LAYOUT.to_string(),
        metadata: metadata.clone(),
    }
}

fn write_file(path: &Path, header: &Header, nets: &[&TrainedNet]) -> Result<()> {
    let header_bytes = serde_json::to_vec(header)
        .map_err(|e| corrupt(format!("cannot encode header: {e}")))?;

    let param_count: usize = nets.iter().map(|n| n.graph.param_count()).sum();

    let mut buf = Vec::with_capacity(8 + 4 + 8 + header_bytes.len() + 8 + param_count * 8 + 32);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header_bytes);
    buf.extend_from_slice(&(param_count as u64).to_le_bytes());
    for net in nets {
        for tensor in net.graph.param_tensor_values() {
            for &v in tensor {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    std::fs::write(path, &buf)?;
    Ok(())
}

/// Serializes the whole model and arbitrary run metadata to one file.
pub fn save_checkpoint(path: &Path, model: &Model, metadata: &serde_json::Value) -> Result<()> {
    let mut header = header_for(model, metadata);
    header.members = model.members().iter().map(|m| m.spec.clone()).collect();
    let nets: Vec<&TrainedNet> = model.members().iter().collect();
    write_file(path, &header, &nets)
}

/// Serializes one ensemble member to its own file. The header carries the
/// member's position and the ensemble size so [`load_model`] can verify a
/// complete, consistent set.
pub fn save_member_checkpoint(
    path: &Path,
    model: &Model,
    member: usize,
    metadata: &serde_json::Value,
) -> Result<()> {
    let net = model.members().get(member).ok_or_else(|| {
        Error::validation(format!(
            "member {member} out of range for a {}-member model",
            model.members().len()
        ))
    })?;
    let mut header = header_for(model, metadata);
    header.members = vec![net.spec.clone()];
    header.member_index = Some(member);
    header.member_count = Some(model.members().len());
    write_file(path, &header, &[net])
}

/// Verifies the checksum, decodes the header, and rebuilds the stored
/// networks. Shared by every loader so a damaged file fails loud instead
/// of yielding a subtly wrong model.
fn read_parts(path: &Path) -> Result<(Header, Vec<TrainedNet>)> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 + 4 + 8 + 8 + 32 {
        return Err(corrupt(format!("{} is too short to be a checkpoint", path.display())));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 32);
    let digest = Sha256::digest(body);
    if digest.as_slice() != trailer {
        return Err(corrupt(format!("checksum mismatch in {}", path.display())));
    }

    fn take<'a>(body: &'a [u8], at: &mut usize, n: usize) -> Result<&'a [u8]> {
        let end = at.checked_add(n).ok_or_else(|| corrupt("checkpoint truncated"))?;
        if end > body.len() {
            return Err(corrupt("checkpoint truncated"));
        }
        let slice = &body[*at..end];
        *at = end;
        Ok(slice)
    }

    let mut at = 0usize;
    if take(body, &mut at, 8)? != MAGIC {
        return Err(corrupt(format!("{} is not a model checkpoint", path.display())));
    }
    let version = u32::from_le_bytes(take(body, &mut at, 4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(corrupt(format!(
            "checkpoint version {version} is not supported (expected {CHECKPOINT_VERSION})"
        )));
    }
    let header_len = u64::from_le_bytes(take(body, &mut at, 8)?.try_into().unwrap()) as usize;
    let header: Header = serde_json::from_slice(take(body, &mut at, header_len)?)
        .map_err(|e| corrupt(format!("cannot decode header: {e}")))?;

    if header.flatten_order != FLATTEN_ORDER
        || header.padding != PADDING
        || header.tensor_layout != TENSOR_LAYOUT
    {
        return Err(corrupt("checkpoint uses unknown tensor conventions"));
    }
    let expected_targets: Vec<String> =
        TargetId::LEARNED.iter().map(|t| t.key().to_string()).collect();
    if header.targets != expected_targets {
        return Err(corrupt("checkpoint target list does not match readout order"));
    }

    let param_count = u64::from_le_bytes(take(body, &mut at, 8)?.try_into().unwrap()) as usize;
    let declared: usize = header
        .members
        .iter()
        .map(|spec| spec.build().map(|g| g.param_count()))
        .sum::<Result<usize>>()?;
    if declared != param_count {
        return Err(corrupt(format!(
            "parameter count {param_count} does not match the declared shapes ({declared})"
        )));
    }
    let param_bytes = take(body, &mut at, param_count * 8)?;
    if at != body.len() {
        return Err(corrupt("checkpoint has trailing bytes"));
    }

    let mut offset = 0usize;
    let mut nets = Vec::with_capacity(header.members.len());
    for spec in &header.members {
        let mut graph = spec.build()?;
        for tensor in graph.param_tensors_mut() {
            for v in tensor.values.iter_mut() {
                let chunk: [u8; 8] = param_bytes[offset..offset + 8].try_into().unwrap();
                *v = f64::from_le_bytes(chunk);
                offset += 8;
            }
        }
        nets.push(TrainedNet::new(spec.clone(), graph)?);
    }
    Ok((header, nets))
}

/// Reads a combined checkpoint back.
pub fn load_checkpoint(path: &Path) -> Result<(Model, serde_json::Value)> {
    let (header, nets) = read_parts(path)?;
    if let Some(index) = header.member_index {
        return Err(corrupt(format!(
            "{} holds ensemble member {index} of {}; pass the complete member set",
            path.display(),
            header.member_count.unwrap_or(0)
        )));
    }
    let model = Model::new(header.kind, header.preset, nets, header.scaler)?;
    Ok((model, header.metadata))
}

/// One ensemble member read back from its own file.
#[derive(Debug)]
pub struct EnsembleMember {
    pub kind: ModelKind,
    pub preset: Preset,
    pub scaler: TargetScaler,
    pub index: usize,
    pub count: usize,
    pub net: TrainedNet,
    pub metadata: serde_json::Value,
}

pub fn load_member_checkpoint(path: &Path) -> Result<EnsembleMember> {
    let (header, mut nets) = read_parts(path)?;
    let (Some(index), Some(count)) = (header.member_index, header.member_count) else {
        return Err(corrupt(format!(
            "{} is a combined checkpoint, not an ensemble member file",
            path.display()
        )));
    };
    if index >= count || nets.len() != 1 {
        return Err(corrupt(format!("{} has an inconsistent member header", path.display())));
    }
    Ok(EnsembleMember {
        kind: header.kind,
        preset: header.preset,
        scaler: header.scaler,
        index,
        count,
        net: nets.pop().expect("length checked"),
        metadata: header.metadata,
    })
}

/// Loads a model from either one combined checkpoint or a complete set of
/// member files (any order). Metadata comes from the combined file or from
/// member 0.
pub fn load_model(paths: &[PathBuf]) -> Result<(Model, serde_json::Value)> {
    match paths {
        [] => Err(Error::validation("no checkpoint files given")),
        [single] => {
            let (header, nets) = read_parts(single)?;
            if header.member_index.is_some() {
                return Err(corrupt(format!(
                    "{} is one member of a {}-file ensemble; pass all of them",
                    single.display(),
                    header.member_count.unwrap_or(0)
                )));
            }
            let model = Model::new(header.kind, header.preset, nets, header.scaler)?;
            Ok((model, header.metadata))
        }
        many => {
            let mut parts = many
                .iter()
                .map(|p| load_member_checkpoint(p))
                .collect::<Result<Vec<_>>>()?;
            parts.sort_by_key(|m| m.index);
            let first = &parts[0];
            let (kind, preset, count) = (first.kind, first.preset, first.count);
            if count != parts.len() {
                return Err(corrupt(format!(
                    "{} member files given but the ensemble has {count}",
                    parts.len()
                )));
            }
            for (i, part) in parts.iter().enumerate() {
                if part.index != i {
                    return Err(corrupt(format!("ensemble member {i} is missing or duplicated")));
                }
                if part.kind != kind || part.preset != preset || part.count != count {
                    return Err(corrupt("ensemble member files disagree on the model"));
                }
                if part.scaler != first.scaler {
                    return Err(corrupt("ensemble member files disagree on the target scaler"));
                }
            }
            let metadata = parts[0].metadata.clone();
            let scaler = parts[0].scaler.clone();
            let nets: Vec<TrainedNet> = parts.into_iter().map(|p| p.net).collect();
            let model = Model::new(kind, preset, nets, scaler)?;
            Ok((model, metadata))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nets::build::{ConvSpec, DenseSpec};
    use crate::tensorcore::Series;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tiny_spec(outputs: usize) -> NetSpec {
        NetSpec {
            input_channels: 2,
            input_length: 8,
            conv: vec![ConvSpec { channels: 3, kernel_len: 3 }],
            pool_window: 2,
            dense: vec![DenseSpec { width: 4, dropout: 0.5 }],
            outputs,
        }
    }

    fn filled_net(spec: NetSpec, rng: &mut ChaCha8Rng) -> TrainedNet {
        let mut graph = spec.build().unwrap();
        for tensor in graph.param_tensors_mut() {
            for v in tensor.values.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        TrainedNet::new(spec, graph).unwrap()
    }

    fn tiny_model(seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scaler =
            TargetScaler::from_bounds(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![9.0; 5]).unwrap();
        Model::new(
            ModelKind::A,
            Preset::Desk,
            vec![filled_net(tiny_spec(5), &mut rng)],
            scaler,
        )
        .unwrap()
    }

    fn tiny_ensemble(seed: u64) -> Model {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members: Vec<TrainedNet> =
            (0..5).map(|_| filled_net(tiny_spec(1), &mut rng)).collect();
        let scaler =
            TargetScaler::from_bounds(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![9.0; 5]).unwrap();
        Model::new(ModelKind::B, Preset::Desk, members, scaler).unwrap()
    }

    #[test]
    fn round_trip_preserves_every_parameter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = tiny_model(11);
        let metadata = serde_json::json!({"iterations": 500, "seed": 42});
        save_checkpoint(&path, &model, &metadata).unwrap();
        let (back, meta_back) = load_checkpoint(&path).unwrap();

        assert_eq!(meta_back, metadata);
        assert_eq!(back.kind(), model.kind());
        assert_eq!(back.preset(), model.preset());
        assert_eq!(back.scaler(), model.scaler());
        let a = model.members()[0].graph.param_tensor_values();
        let b = back.members()[0].graph.param_tensor_values();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn saving_twice_yields_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.ckpt");
        let p2 = dir.path().join("b.ckpt");
        let model = tiny_model(3);
        let meta = serde_json::json!({"run": "x"});
        save_checkpoint(&p1, &model, &meta).unwrap();
        save_checkpoint(&p2, &model, &meta).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    }

    #[test]
    fn corrupting_one_parameter_byte_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &tiny_model(5), &serde_json::Value::Null).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() - 100;
        bytes[mid] ^= 0x01;
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(err.to_string().contains("checksum"), "got {err}");
    }

    #[test]
    fn truncated_and_foreign_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &tiny_model(7), &serde_json::Value::Null).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_checkpoint(&path).is_err());

        let other = dir.path().join("notes.txt");
        std::fs::write(&other, b"just some text, long enough to pass the length check....")
            .unwrap();
        assert!(load_checkpoint(&other).is_err());
    }

    #[test]
    fn member_files_reassemble_the_ensemble() {
        let dir = tempfile::tempdir().unwrap();
        let model = tiny_ensemble(23);
        let meta = serde_json::json!({"run": "ensemble"});
        let mut paths = Vec::new();
        for k in 0..5 {
            let path = dir.path().join(format!("member_{k}.ckpt"));
            save_member_checkpoint(&path, &model, k, &meta).unwrap();
            paths.push(path);
        }
        // Order must not matter.
        paths.reverse();
        let (back, meta_back) = load_model(&paths).unwrap();
        assert_eq!(meta_back, meta);
        assert_eq!(back.kind(), ModelKind::B);

        let input = Series::zeros(2, 8);
        assert_eq!(back.predict_one(&input).unwrap(), model.predict_one(&input).unwrap());
    }

    #[test]
    fn member_sets_are_validated() {
        let dir = tempfile::tempdir().unwrap();
        let model = tiny_ensemble(29);
        let meta = serde_json::Value::Null;
        let mut paths = Vec::new();
        for k in 0..5 {
            let path = dir.path().join(format!("member_{k}.ckpt"));
            save_member_checkpoint(&path, &model, k, &meta).unwrap();
            paths.push(path);
        }

        // Incomplete set.
        assert!(load_model(&paths[..4]).is_err());

        // Duplicated member.
        let mut dup = paths.clone();
        dup[4] = dup[3].clone();
        assert!(load_model(&dup).is_err());

        // A member file alone is not a model.
        assert!(load_model(&paths[..1]).is_err());
        assert!(load_checkpoint(&paths[0]).is_err());

        // A combined file is not a member.
        let combined = dir.path().join("combined.ckpt");
        save_checkpoint(&combined, &model, &meta).unwrap();
        assert!(load_member_checkpoint(&combined).is_err());
        let (back, _) = load_model(std::slice::from_ref(&combined)).unwrap();
        assert_eq!(back.members().len(), 5);

        assert!(save_member_checkpoint(&combined, &model, 9, &meta).is_err());
        assert!(load_model(&[]).is_err());
    }
}
