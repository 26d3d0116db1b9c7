//! Binary PPM (P6) color images and 16-bit PGM (P5, maxval 65535) id images.

use super::FrameBuffers;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetpbmError {
    #[error("instance id {0} does not fit a 16-bit id image")]
    IdOverflow(u32),
    #[error("malformed {0} image")]
    Malformed(&'static str),
}

pub fn encode_ppm(fb: &FrameBuffers) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", fb.width, fb.height).into_bytes();
    out.extend_from_slice(&fb.rgb);
    out
}

/// Id buffer as a big-endian 16-bit PGM.
pub fn encode_id_pgm(fb: &FrameBuffers) -> Result<Vec<u8>, NetpbmError> {
    let mut out = format!("P5\n{} {}\n65535\n", fb.width, fb.height).into_bytes();
    out.reserve(2 * fb.id.len());
    for &id in &fb.id {
        let v = u16::try_from(id).map_err(|_| NetpbmError::IdOverflow(id))?;
        out.extend_from_slice(&v.to_be_bytes());
    }
    Ok(out)
}

/// Splits `magic W H MAX\n` off the front of a netpbm file.
fn header<'a>(bytes: &'a [u8], magic: &'static str) -> Result<(u32, u32, u32, &'a [u8]), NetpbmError> {
    let err = NetpbmError::Malformed(magic);
    let mut fields = Vec::with_capacity(4);
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(err);
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| err.clone())?);
    }
    // exactly one whitespace byte separates the header from the raster
    if fields[0] != magic || pos >= bytes.len() {
        return Err(err);
    }
    let num = |s: &str| s.parse::<u32>().map_err(|_| err.clone());
    Ok((num(fields[1])?, num(fields[2])?, num(fields[3])?, &bytes[pos + 1..]))
}

/// Returns `(width, height, rgb)`.
pub fn decode_ppm(bytes: &[u8]) -> Result<(u32, u32, Vec<u8>), NetpbmError> {
    let (w, h, max, data) = header(bytes, "P6")?;
    if max != 255 || data.len() != 3 * w as usize * h as usize {
        return Err(NetpbmError::Malformed("P6"));
    }
    Ok((w, h, data.to_vec()))
}

/// Returns `(width, height, ids)`.
pub fn decode_id_pgm(bytes: &[u8]) -> Result<(u32, u32, Vec<u32>), NetpbmError> {
    let (w, h, max, data) = header(bytes, "P5")?;
    if max != 65535 || data.len() != 2 * w as usize * h as usize {
        return Err(NetpbmError::Malformed("P5"));
    }
    let ids = data.chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]]) as u32).collect();
    Ok((w, h, ids))
}
