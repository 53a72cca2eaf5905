use std::path::Path;

use super::types::DepthMap;
use super::SceneError;

/// Magic bytes of the raw float32 depth format: `DEPF`, u32 LE width,
/// u32 LE height, then row-major f32 LE meters.
pub(crate) const RAW_DEPTH_MAGIC: &[u8; 4] = b"DEPF";

/// Decodes a depth asset to meters.
///
/// Two encodings are supported, distinguished by magic bytes:
/// - 16-bit (or 8-bit) single-channel PNG, `meters = stored * scale_hint`,
///   stored 0 is the invalid sentinel;
/// - raw float32 (`DEPF` header), values already in meters, non-finite or
///   non-positive values invalid.
pub fn decode_depth(path: &Path, scale_hint: f64) -> Result<DepthMap, SceneError> {
    let bytes = std::fs::read(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            SceneError::MissingAsset {
                path: path.to_path_buf(),
            }
        } else {
            SceneError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })?;
    if bytes.starts_with(RAW_DEPTH_MAGIC) {
        decode_raw_f32(path, &bytes)
    } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(path, &bytes, scale_hint)
    } else {
        Err(SceneError::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: "expected PNG or DEPF raw float32".into(),
        })
    }
}

fn decode_png(path: &Path, bytes: &[u8], scale_hint: f64) -> Result<DepthMap, SceneError> {
    let img = image::load_from_memory(bytes).map_err(|e| SceneError::CorruptAsset {
        path: path.to_path_buf(),
        detail: e.to_string(),
    })?;
    let (stored, width, height): (Vec<u16>, u32, u32) = match img {
        image::DynamicImage::ImageLuma16(b) => {
            let (w, h) = (b.width(), b.height());
            (b.into_raw(), w, h)
        }
        image::DynamicImage::ImageLuma8(b) => {
            let (w, h) = (b.width(), b.height());
            (b.into_raw().into_iter().map(u16::from).collect(), w, h)
        }
        other => {
            return Err(SceneError::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("depth PNG must be single-channel, got {:?}", other.color()),
            })
        }
    };
    // Stored 0 maps to 0.0 m, which from_meters marks invalid.
    let meters = stored
        .into_iter()
        .map(|v| (f64::from(v) * scale_hint) as f32)
        .collect();
    Ok(DepthMap::from_meters(width, height, meters, scale_hint))
}

fn decode_raw_f32(path: &Path, bytes: &[u8]) -> Result<DepthMap, SceneError> {
    let corrupt = |detail: &str| SceneError::CorruptAsset {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };
    if bytes.len() < 12 {
        return Err(corrupt("truncated header"));
    }
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let n = (width as usize) * (height as usize);
    let payload = &bytes[12..];
    if payload.len() != n * 4 {
        return Err(corrupt(&format!(
            "expected {} f32 values, found {} bytes",
            n,
            payload.len()
        )));
    }
    let meters = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(DepthMap::from_meters(width, height, meters, 1.0))
}

/// Encodes a raw float32 depth file (the `DEPF` format).
pub fn encode_raw_depth(width: u32, height: u32, meters: &[f32]) -> Vec<u8> {
    assert_eq!(meters.len(), (width as usize) * (height as usize));
    let mut out = Vec::with_capacity(12 + meters.len() * 4);
    out.extend_from_slice(RAW_DEPTH_MAGIC);
    out.extend_from_slice(&width.to_le_bytes());
    out.extend_from_slice(&height.to_le_bytes());
    for m in meters {
        out.extend_from_slice(&m.to_le_bytes());
    }
    out
}
