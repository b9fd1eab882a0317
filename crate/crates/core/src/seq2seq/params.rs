//! Trainable tensors of the encoder-decoder.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{Mat, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Width of one encoder input vector.
    pub input_dim: usize,
    pub hidden: usize,
    pub layers: usize,
    pub vocab_size: usize,
    pub decoder_embed_dim: usize,
    pub attention_dim: usize,
    /// Number of leading encoder positions the decoder may attend to.
    pub attention_length: usize,
    pub dropout: f64,
    pub max_output_len: usize,
}

impl ModelConfig {
    pub fn new(input_dim: usize, hidden: usize, vocab_size: usize) -> Self {
        ModelConfig {
            input_dim,
            hidden,
            layers: 2,
            vocab_size,
            decoder_embed_dim: hidden,
            attention_dim: hidden,
            attention_length: 9,
            dropout: 0.2,
            max_output_len: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<T> {
    pub wx: Mat<T>,
    pub wh: Mat<T>,
    pub b: Mat<T>,
}

impl<T: Scalar> Lstm<T> {
    fn zeros(input: usize, hidden: usize) -> Self {
        Lstm { wx: Mat::zeros(input, 4 * hidden), wh: Mat::zeros(hidden, 4 * hidden), b: Mat::zeros(1, 4 * hidden) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    pub enc: Vec<Lstm<T>>,
    pub dec: Vec<Lstm<T>>,
    pub emb: Mat<T>,
    pub att_wk: Mat<T>,
    pub att_wq: Mat<T>,
    pub att_b: Mat<T>,
    pub att_v: Mat<T>,
    pub out_w: Mat<T>,
    pub out_b: Mat<T>,
}

impl<T: Scalar> Params<T> {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let h = cfg.hidden;
        let enc = (0..cfg.layers).map(|l| Lstm::zeros(if l == 0 { cfg.input_dim } else { h }, h)).collect();
        let dec = (0..cfg.layers).map(|l| Lstm::zeros(if l == 0 { cfg.decoder_embed_dim + h } else { h }, h)).collect();
        Params {
            enc,
            dec,
            emb: Mat::zeros(cfg.vocab_size, cfg.decoder_embed_dim),
            att_wk: Mat::zeros(h, cfg.attention_dim),
            att_wq: Mat::zeros(h, cfg.attention_dim),
            att_b: Mat::zeros(1, cfg.attention_dim),
            att_v: Mat::zeros(1, cfg.attention_dim),
            out_w: Mat::zeros(2 * h, cfg.vocab_size),
            out_b: Mat::zeros(1, cfg.vocab_size),
        }
    }

    /// Uniform fan-in initialisation with forget-gate bias 1.
    pub fn init(cfg: &ModelConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Params::zeros(cfg);
        let h = cfg.hidden;
        for (name, m) in p.named_mut() {
            if name.ends_with(".b") || name == "att_b" || name == "out_b" {
                continue;
            }
            let fan = if name == "emb" { m.cols } else { m.rows };
            let bound = 1.0 / (fan.max(1) as f64).sqrt();
            for x in &mut m.data {
                *x = T::lit(rng.random_range(-bound..bound));
            }
        }
        for layer in p.enc.iter_mut().chain(p.dec.iter_mut()) {
            for x in &mut layer.b.data[h..2 * h] {
                *x = T::one();
            }
        }
        p
    }

    /// Every tensor with a stable name, in a fixed order.
    pub fn named(&self) -> Vec<(String, &Mat<T>)> {
        let mut out = Vec::new();
        for (prefix, layers) in [("enc", &self.enc), ("dec", &self.dec)] {
            for (l, layer) in layers.iter().enumerate() {
                out.push((format!("{prefix}{l}.wx"), &layer.wx));
                out.push((format!("{prefix}{l}.wh"), &layer.wh));
                out.push((format!("{prefix}{l}.b"), &layer.b));
            }
        }
        out.push(("emb".into(), &self.emb));
        out.push(("att_wk".into(), &self.att_wk));
        out.push(("att_wq".into(), &self.att_wq));
        out.push(("att_b".into(), &self.att_b));
        out.push(("att_v".into(), &self.att_v));
        out.push(("out_w".into(), &self.out_w));
        out.push(("out_b".into(), &self.out_b));
        out
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut Mat<T>)> {
        let mut out = Vec::new();
        for (prefix, layers) in [("enc", &mut self.enc), ("dec", &mut self.dec)] {
            for (l, layer) in layers.iter_mut().enumerate() {
                out.push((format!("{prefix}{l}.wx"), &mut layer.wx));
                out.push((format!("{prefix}{l}.wh"), &mut layer.wh));
                out.push((format!("{prefix}{l}.b"), &mut layer.b));
            }
        }
        out.push(("emb".into(), &mut self.emb));
        out.push(("att_wk".into(), &mut self.att_wk));
        out.push(("att_wq".into(), &mut self.att_wq));
        out.push(("att_b".into(), &mut self.att_b));
        out.push(("att_v".into(), &mut self.att_v));
        out.push(("out_w".into(), &mut self.out_w));
        out.push(("out_b".into(), &mut self.out_b));
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        for (_, m) in z.named_mut() {
            m.fill_zero();
        }
        z
    }

    pub fn cast<U: Scalar>(&self) -> Params<U> {
        let lstm = |l: &Lstm<T>| Lstm { wx: l.wx.cast(), wh: l.wh.cast(), b: l.b.cast() };
        Params {
            enc: self.enc.iter().map(lstm).collect(),
            dec: self.dec.iter().map(lstm).collect(),
            emb: self.emb.cast(),
            att_wk: self.att_wk.cast(),
            att_wq: self.att_wq.cast(),
            att_b: self.att_b.cast(),
            att_v: self.att_v.cast(),
            out_w: self.out_w.cast(),
            out_b: self.out_b.cast(),
        }
    }

    pub fn count(&self) -> usize {
        self.named().iter().map(|(_, m)| m.data.len()).sum()
    }

    pub fn sq_norm(&self) -> T {
        self.named().iter().fold(T::zero(), |acc, (_, m)| acc + m.sq_norm())
    }

    pub fn scale(&mut self, factor: T) {
        for (_, m) in self.named_mut() {
            m.data.iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.named().iter().all(|(_, m)| m.data.iter().all(|x| x.is_finite()))
    }
}
