//! Model checkpoint I/O.
//!
//! Layout (`mlp-ckpt-v1`), all integers little-endian:
//!
//! ```text
//! magic            8 bytes  "SPFBMLP\0"
//! format tag       u32 length + UTF-8 bytes (crate::MODEL_FORMAT_VERSION)
//! alphabet_size    u32
//! seq_len          u32
//! embed_dim        u32
//! hidden1          u32
//! hidden2          u32
//! dropout          f64
//! parameters       f64 * N, row-major, blocks in order
//!                  embedding, w1, b1, w2, b2, w3, b3
//! checksum         32 bytes, SHA-256 of everything above
//! ```
//!
//! The checksum plus an exact-EOF check means a truncated or corrupted file
//! fails loudly instead of producing a partial model.

use super::{MlpConfig, MlpModel};
use crate::{Error, Result, MODEL_FORMAT_VERSION};
use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"SPFBMLP\0";

fn push_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn push_f64s<'a>(buf: &mut Vec<u8>, values: impl Iterator<Item = &'a f64>) {
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serialize a model; the write is atomic at the byte level (single buffer).
pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    push_u32(&mut buf, MODEL_FORMAT_VERSION.len() as u32);
    buf.extend_from_slice(MODEL_FORMAT_VERSION.as_bytes());
    let c = &model.config;
    push_u32(&mut buf, c.alphabet_size as u32);
    push_u32(&mut buf, c.seq_len as u32);
    push_u32(&mut buf, c.embed_dim as u32);
    push_u32(&mut buf, c.hidden1 as u32);
    push_u32(&mut buf, c.hidden2 as u32);
    buf.extend_from_slice(&c.dropout.to_le_bytes());
    push_f64s(&mut buf, model.embedding.iter());
    push_f64s(&mut buf, model.w1.iter());
    push_f64s(&mut buf, model.b1.iter());
    push_f64s(&mut buf, model.w2.iter());
    push_f64s(&mut buf, model.b2.iter());
    push_f64s(&mut buf, model.w3.iter());
    push_f64s(&mut buf, model.b3.iter());
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);

    let mut file =
        std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(&buf)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a str,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::BadCheckpoint {
                path: self.path.to_string(),
                reason: "truncated file".into(),
            });
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64_array2(&mut self, rows: usize, cols: usize) -> Result<Array2<f64>> {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            values.push(self.f64()?);
        }
        Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::BadCheckpoint {
            path: self.path.to_string(),
            reason: e.to_string(),
        })
    }

    fn f64_array1(&mut self, len: usize) -> Result<Array1<f64>> {
        let mut values = Vec::with_capacity(len);
        for _ in 0..len {
            values.push(self.f64()?);
        }
        Ok(Array1::from_vec(values))
    }
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let display = path.display().to_string();
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(display.clone(), e))?;

    let bad = |reason: &str| Error::BadCheckpoint {
        path: display.clone(),
        reason: reason.to_string(),
    };

    if bytes.len() < MAGIC.len() + 32 {
        return Err(bad("truncated file"));
    }
    let (body, checksum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(bad("checksum mismatch"));
    }

    let mut r = Reader {
        bytes: body,
        pos: 0,
        path: &display,
    };
    if r.take(8)? != MAGIC {
        return Err(bad("bad magic"));
    }
    let tag_len = r.u32()? as usize;
    let tag = std::str::from_utf8(r.take(tag_len)?).map_err(|_| bad("bad format tag"))?;
    if tag != MODEL_FORMAT_VERSION {
        return Err(bad(&format!(
            "format tag {tag:?} not supported by this build ({MODEL_FORMAT_VERSION})"
        )));
    }
    let alphabet_size = r.u32()? as usize;
    let seq_len = r.u32()? as usize;
    let embed_dim = r.u32()? as usize;
    let hidden1 = r.u32()? as usize;
    let hidden2 = r.u32()? as usize;
    let dropout = r.f64()?;
    let config = MlpConfig {
        alphabet_size,
        seq_len,
        embed_dim,
        hidden1,
        hidden2,
        dropout,
    };
    config.validate()?;

    let model = MlpModel {
        embedding: r.f64_array2(alphabet_size, embed_dim)?,
        w1: r.f64_array2(config.input_dim(), hidden1)?,
        b1: r.f64_array1(hidden1)?,
        w2: r.f64_array2(hidden1, hidden2)?,
        b2: r.f64_array1(hidden2)?,
        w3: r.f64_array2(hidden2, 1)?,
        b3: r.f64_array1(1)?,
        config,
    };
    if r.pos != body.len() {
        return Err(bad("trailing bytes after parameters"));
    }
    Ok(model)
}
