//! Versioned binary checkpoint container.
//!
//! Layout: an 8-byte magic, a little-endian u32 format version, a
//! length-prefixed JSON header naming every parameter blob and its shape,
//! then the blobs as little-endian f32 in header order. The same container
//! carries tokenizer, policy, and PCA models (distinguished by `kind`).

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ACETCKPT";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: serde_json::Value,
    params: Vec<ParamInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamInfo {
    name: String,
    shape: Vec<usize>,
}

/// In-memory checkpoint: named f32 blobs plus free-form metadata.
#[derive(Debug)]
pub struct Checkpoint {
    pub kind: String,
    pub meta: serde_json::Value,
    params: Vec<(String, Vec<usize>, Vec<f32>)>,
}

impl Checkpoint {
    pub fn new(kind: &str, meta: serde_json::Value) -> Self {
        Checkpoint {
            kind: kind.to_string(),
            meta,
            params: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, shape: Vec<usize>, data: Vec<f32>) {
        assert_eq!(
            shape.iter().product::<usize>(),
            data.len(),
            "blob length must match shape for {name}"
        );
        self.params.push((name.to_string(), shape, data));
    }

    pub fn add_f64(&mut self, name: &str, shape: Vec<usize>, data: &[f64]) {
        self.add(name, shape, data.iter().map(|&v| v as f32).collect());
    }

    pub fn get(&self, name: &str) -> Result<(&[usize], &[f32])> {
        self.params
            .iter()
            .find(|(n, _, _)| n == name)
            .map(|(_, s, d)| (s.as_slice(), d.as_slice()))
            .ok_or_else(|| Error::Format(format!("checkpoint missing parameter {name}")))
    }

    pub fn get_f64(&self, name: &str) -> Result<(Vec<usize>, Vec<f64>)> {
        let (shape, data) = self.get(name)?;
        Ok((shape.to_vec(), data.iter().map(|&v| v as f64).collect()))
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|(n, _, _)| n.as_str())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = Header {
            kind: self.kind.clone(),
            meta: self.meta.clone(),
            params: self
                .params
                .iter()
                .map(|(n, s, _)| ParamInfo {
                    name: n.clone(),
                    shape: s.clone(),
                })
                .collect(),
        };
        let header_json = serde_json::to_vec(&header).expect("header serializes");
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(header_json.len() as u32).to_le_bytes())?;
        w.write_all(&header_json)?;
        for (_, _, data) in &self.params {
            let mut bytes = Vec::with_capacity(data.len() * 4);
            for v in data {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(&bytes)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Format(format!("checkpoint: {m}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| bad("short read on magic"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word).map_err(|_| bad("short read on version"))?;
        let version = u32::from_le_bytes(word);
        if version != VERSION {
            return Err(Error::Format(format!(
                "checkpoint: unsupported version {version}"
            )));
        }
        r.read_exact(&mut word).map_err(|_| bad("short read on header length"))?;
        let hlen = u32::from_le_bytes(word) as usize;
        let mut hbuf = vec![0u8; hlen];
        r.read_exact(&mut hbuf).map_err(|_| bad("short read on header"))?;
        let header: Header = serde_json::from_slice(&hbuf)
            .map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
        let mut params = Vec::with_capacity(header.params.len());
        for info in header.params {
            let count: usize = info.shape.iter().product();
            let mut bytes = vec![0u8; count * 4];
            r.read_exact(&mut bytes)
                .map_err(|_| Error::Format(format!("checkpoint: blob {} truncated", info.name)))?;
            let data = bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            params.push((info.name, info.shape, data));
        }
        Ok(Checkpoint {
            kind: header.kind,
            meta: header.meta,
            params,
        })
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        self.write_to(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_blobs_and_meta() {
        let mut ck = Checkpoint::new("tokenizer", serde_json::json!({"d": 8, "k": 16}));
        ck.add("enc.w", vec![2, 3], vec![1.0, -2.5, 0.0, 4.25, 1e-7, -3.5e8]);
        ck.add("enc.b", vec![2], vec![0.5, -0.5]);
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();

        let back = Checkpoint::read_from(&buf[..]).unwrap();
        assert_eq!(back.kind, "tokenizer");
        assert_eq!(back.meta["k"], 16);
        let (shape, data) = back.get("enc.w").unwrap();
        assert_eq!(shape, &[2, 3]);
        assert_eq!(data, &[1.0, -2.5, 0.0, 4.25, 1e-7, -3.5e8]);
        assert!(back.get("missing").is_err());
    }

    #[test]
    fn rejects_corrupt_containers() {
        assert!(Checkpoint::read_from(&b"NOTMAGIC"[..]).is_err());
        let mut ck = Checkpoint::new("x", serde_json::Value::Null);
        ck.add("p", vec![4], vec![0.0; 4]);
        let mut buf = Vec::new();
        ck.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Checkpoint::read_from(&buf[..]).is_err());
    }
}
