//! Self-describing binary checkpoints.
//!
//! Layout: magic, format version, a key/value header, the vocabulary, then
//! every tensor as name, rank, dimensions and little-endian f32 data.
//! Integers are little-endian u32; strings are length-prefixed UTF-8.

use std::io::{Read, Write};

use super::params::{ModelConfig, Params};
use super::tensor::Mat;
use super::vocab::Vocab;
use super::{Seq2SeqError, Seq2SeqModel};
use crate::vectorizer::OovPolicy;

pub const MAGIC: &[u8; 6] = b"EATSEQ";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, x: u32) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

pub fn to_bytes(model: &Seq2SeqModel) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    let header = [
        ("config", serde_json::to_string(&model.config).expect("config serialises")),
        ("embed_dim", model.embed_dim.to_string()),
        ("oov_policy", model.oov_policy.name()),
    ];
    put_u32(&mut out, header.len() as u32);
    for (k, v) in &header {
        put_str(&mut out, k);
        put_str(&mut out, v);
    }
    put_u32(&mut out, model.vocab.len() as u32);
    for t in model.vocab.tokens() {
        put_str(&mut out, t);
    }
    let tensors = model.params.named();
    put_u32(&mut out, tensors.len() as u32);
    for (name, m) in tensors {
        put_str(&mut out, &name);
        put_u32(&mut out, 2);
        put_u32(&mut out, m.rows as u32);
        put_u32(&mut out, m.cols as u32);
        for x in &m.data {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], Seq2SeqError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Seq2SeqError::CorruptTensor(format!("truncated while reading {what}")))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32, Seq2SeqError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn string(&mut self, what: &str) -> Result<String, Seq2SeqError> {
        let n = self.u32(what)? as usize;
        let b = self.take(n, what)?;
        String::from_utf8(b.to_vec()).map_err(|_| Seq2SeqError::CorruptTensor(format!("{what} is not UTF-8")))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<Seq2SeqModel, Seq2SeqError> {
    if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
        return Err(Seq2SeqError::BadMagic);
    }
    let mut cur = Cursor { buf, pos: MAGIC.len() };
    let version = cur.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Seq2SeqError::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    let mut config = None;
    let mut embed_dim = None;
    let mut oov_policy = OovPolicy::Zero;
    for _ in 0..cur.u32("header size")? {
        let key = cur.string("header key")?;
        let value = cur.string("header value")?;
        match key.as_str() {
            "config" => {
                config = Some(
                    serde_json::from_str::<ModelConfig>(&value)
                        .map_err(|e| Seq2SeqError::CorruptTensor(format!("config: {e}")))?,
                )
            }
            "embed_dim" => {
                embed_dim = Some(value.parse().map_err(|_| Seq2SeqError::CorruptTensor("embed_dim".into()))?)
            }
            "oov_policy" => {
                oov_policy = OovPolicy::parse(&value)
                    .ok_or_else(|| Seq2SeqError::CorruptTensor(format!("oov_policy {value:?}")))?
            }
            _ => log::warn!("ignoring checkpoint header key {key:?}"),
        }
    }
    let config = config.ok_or_else(|| Seq2SeqError::CorruptTensor("missing config".into()))?;
    let embed_dim = embed_dim.ok_or_else(|| Seq2SeqError::CorruptTensor("missing embed_dim".into()))?;
    let n_tokens = cur.u32("vocabulary size")? as usize;
    let mut tokens = Vec::with_capacity(n_tokens.min(1 << 20));
    for _ in 0..n_tokens {
        tokens.push(cur.string("vocabulary entry")?);
    }
    let vocab = Vocab::from_tokens(tokens);
    if vocab.len() != n_tokens || vocab.len() != config.vocab_size {
        return Err(Seq2SeqError::CorruptTensor("vocabulary does not match configuration".into()));
    }
    let mut params = Params::<f32>::zeros(&config);
    let count = cur.u32("tensor count")? as usize;
    let mut expected = params.named_mut();
    if count != expected.len() {
        return Err(Seq2SeqError::CorruptTensor(format!("expected {} tensors, found {count}", expected.len())));
    }
    for (want_name, slot) in expected.iter_mut() {
        let name = cur.string("tensor name")?;
        if &name != want_name {
            return Err(Seq2SeqError::CorruptTensor(format!("expected tensor {want_name}, found {name}")));
        }
        if cur.u32("rank")? != 2 {
            return Err(Seq2SeqError::CorruptTensor(format!("{name}: rank must be 2")));
        }
        let rows = cur.u32("rows")? as usize;
        let cols = cur.u32("cols")? as usize;
        if (rows, cols) != slot.shape() {
            return Err(Seq2SeqError::CorruptTensor(format!(
                "{name}: shape {rows}x{cols}, expected {}x{}",
                slot.rows, slot.cols
            )));
        }
        let raw = cur.take(rows * cols * 4, &name)?;
        let data = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
        **slot = Mat::from_vec(rows, cols, data);
    }
    if cur.pos != buf.len() {
        return Err(Seq2SeqError::CorruptTensor("trailing bytes after last tensor".into()));
    }
    Ok(Seq2SeqModel { config, params, vocab, embed_dim, oov_policy })
}

pub fn write_to(model: &Seq2SeqModel, mut w: impl Write) -> Result<(), Seq2SeqError> {
    w.write_all(&to_bytes(model))?;
    Ok(())
}

pub fn read_from(mut r: impl Read) -> Result<Seq2SeqModel, Seq2SeqError> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    from_bytes(&buf)
}
