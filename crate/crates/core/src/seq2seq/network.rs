//! Batched forward and backward passes.
//!
//! Tensors are time-major: one `B×width` matrix per step. Encoder rows past
//! their sequence length carry their state forward unchanged, so the final
//! state of every row is its state after its own last input.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::params::{Lstm, ModelConfig, Params};
use super::tensor::{log_softmax_in_place, sigmoid, Mat, Scalar};
use super::vocab::BOS;

/// One training pair: encoder vectors and target ids (EOS included).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Vec<Vec<f32>>,
    pub target: Vec<usize>,
}

/// Inverted dropout driven by a caller-owned RNG.
pub struct Dropout<'a> {
    pub p: f64,
    pub rng: &'a mut ChaCha8Rng,
}

impl Dropout<'_> {
    fn mask<T: Scalar>(&mut self, rows: usize, cols: usize) -> Mat<T> {
        let keep = T::lit(1.0 / (1.0 - self.p));
        let data = (0..rows * cols).map(|_| if self.rng.random::<f64>() < self.p { T::zero() } else { keep }).collect();
        Mat::from_vec(rows, cols, data)
    }
}

fn hadamard<T: Scalar>(x: &mut Mat<T>, m: &Mat<T>) {
    for (a, &b) in x.data.iter_mut().zip(&m.data) {
        *a *= b;
    }
}

struct LstmCache<T> {
    x: Mat<T>,
    h_prev: Mat<T>,
    c_prev: Mat<T>,
    /// Activated gates `i f g o`.
    gates: Mat<T>,
    tanh_c: Mat<T>,
}

fn lstm_forward<T: Scalar>(
    p: &Lstm<T>,
    x: Mat<T>,
    h_prev: &Mat<T>,
    c_prev: &Mat<T>,
    active: Option<&[bool]>,
) -> (Mat<T>, Mat<T>, LstmCache<T>) {
    let (b, hd) = h_prev.shape();
    let mut z = Mat::zeros(b, 4 * hd);
    z.gemm(&x, false, &p.wx, false, T::zero());
    z.gemm(h_prev, false, &p.wh, false, T::one());
    z.add_row_vector(&p.b);
    let mut h = Mat::zeros(b, hd);
    let mut c = Mat::zeros(b, hd);
    let mut tanh_c = Mat::zeros(b, hd);
    for r in 0..b {
        if active.is_some_and(|a| !a[r]) {
            h.row_mut(r).copy_from_slice(h_prev.row(r));
            c.row_mut(r).copy_from_slice(c_prev.row(r));
            continue;
        }
        let zr = z.row_mut(r);
        let cp = c_prev.row(r);
        for j in 0..hd {
            let i = sigmoid(zr[j]);
            let f = sigmoid(zr[hd + j]);
            let g = zr[2 * hd + j].tanh();
            let o = sigmoid(zr[3 * hd + j]);
            zr[j] = i;
            zr[hd + j] = f;
            zr[2 * hd + j] = g;
            zr[3 * hd + j] = o;
            let cv = f * cp[j] + i * g;
            let tc = cv.tanh();
            c.data[r * hd + j] = cv;
            tanh_c.data[r * hd + j] = tc;
            h.data[r * hd + j] = o * tc;
        }
    }
    let cache = LstmCache { x, h_prev: h_prev.clone(), c_prev: c_prev.clone(), gates: z, tanh_c };
    (h, c, cache)
}

/// Returns `(dx, dh_prev, dc_prev)` and accumulates parameter gradients.
fn lstm_backward<T: Scalar>(
    p: &Lstm<T>,
    g: &mut Lstm<T>,
    cache: &LstmCache<T>,
    dh: &Mat<T>,
    dc: &Mat<T>,
    active: Option<&[bool]>,
) -> (Mat<T>, Mat<T>, Mat<T>) {
    let (b, hd) = dh.shape();
    let one = T::one();
    let mut dz = Mat::zeros(b, 4 * hd);
    let mut dc_prev = Mat::zeros(b, hd);
    for r in 0..b {
        if active.is_some_and(|a| !a[r]) {
            dc_prev.row_mut(r).copy_from_slice(dc.row(r));
            continue;
        }
        let gr = cache.gates.row(r);
        for j in 0..hd {
            let (i, f, gg, o) = (gr[j], gr[hd + j], gr[2 * hd + j], gr[3 * hd + j]);
            let tc = cache.tanh_c.data[r * hd + j];
            let dhv = dh.data[r * hd + j];
            let dcv = dc.data[r * hd + j] + dhv * o * (one - tc * tc);
            let dzr = &mut dz.data[r * 4 * hd..(r + 1) * 4 * hd];
            dzr[j] = dcv * gg * i * (one - i);
            dzr[hd + j] = dcv * cache.c_prev.data[r * hd + j] * f * (one - f);
            dzr[2 * hd + j] = dcv * i * (one - gg * gg);
            dzr[3 * hd + j] = dhv * tc * o * (one - o);
            dc_prev.data[r * hd + j] = dcv * f;
        }
    }
    g.wx.gemm(&cache.x, true, &dz, false, one);
    g.wh.gemm(&cache.h_prev, true, &dz, false, one);
    dz.sum_rows_into(&mut g.b);
    let dx = Mat::matmul(&dz, false, &p.wx, true);
    let mut dh_prev = Mat::matmul(&dz, false, &p.wh, true);
    if let Some(a) = active {
        for r in (0..b).filter(|&r| !a[r]) {
            dh_prev.row_mut(r).copy_from_slice(dh.row(r));
        }
    }
    (dx, dh_prev, dc_prev)
}

/// Encoder outputs the decoder attends over. Matrices with a single row are
/// shared by every decoder row.
#[derive(Debug, Clone)]
pub struct Memory<T> {
    pub mem: Vec<Mat<T>>,
    pub keys: Vec<Mat<T>>,
    pub valid: Vec<usize>,
}

impl<T: Scalar> Memory<T> {
    fn src(&self, r: usize) -> usize {
        if self.valid.len() == 1 {
            0
        } else {
            r
        }
    }
}

struct AttnCache<T> {
    q: Mat<T>,
    u: Vec<Mat<T>>,
    alpha: Mat<T>,
    ctx: Mat<T>,
}

fn attend<T: Scalar>(p: &Params<T>, memory: &Memory<T>, q: &Mat<T>) -> AttnCache<T> {
    let b = q.rows;
    let hd = q.cols;
    let la = memory.mem.len();
    let ad = p.att_v.cols;
    let mut qp = Mat::matmul(q, false, &p.att_wq, false);
    qp.add_row_vector(&p.att_b);
    let mut u = vec![Mat::zeros(b, ad); la];
    let mut alpha = Mat::zeros(b, la);
    let mut ctx = Mat::zeros(b, hd);
    let mut scores = vec![T::zero(); la];
    for r in 0..b {
        let s = memory.src(r);
        let valid = memory.valid[s].min(la);
        if valid == 0 {
            continue;
        }
        for j in 0..valid {
            let kr = memory.keys[j].row(s);
            let ur = u[j].row_mut(r);
            let mut score = T::zero();
            for k in 0..ad {
                let val = (kr[k] + qp.data[r * ad + k]).tanh();
                ur[k] = val;
                score += val * p.att_v.data[k];
            }
            scores[j] = score;
        }
        let max = scores[..valid].iter().copied().fold(T::neg_infinity(), T::max);
        let mut total = T::zero();
        for (j, &s) in scores[..valid].iter().enumerate() {
            let e = (s - max).exp();
            alpha.data[r * la + j] = e;
            total += e;
        }
        for j in 0..valid {
            let a = alpha.data[r * la + j] / total;
            alpha.data[r * la + j] = a;
            for (c, &m) in ctx.row_mut(r).iter_mut().zip(memory.mem[j].row(s)) {
                *c += a * m;
            }
        }
    }
    AttnCache { q: q.clone(), u, alpha, ctx }
}

/// Accumulates into `dmem`/`dkeys` and the attention parameters; returns
/// the gradient with respect to the query.
fn attend_backward<T: Scalar>(
    p: &Params<T>,
    g: &mut Params<T>,
    memory: &Memory<T>,
    cache: &AttnCache<T>,
    dctx: &Mat<T>,
    dmem: &mut [Mat<T>],
    dkeys: &mut [Mat<T>],
) -> Mat<T> {
    let b = dctx.rows;
    let la = memory.mem.len();
    let ad = p.att_v.cols;
    let mut dqp = Mat::zeros(b, ad);
    let mut dalpha = vec![T::zero(); la];
    for r in 0..b {
        let valid = memory.valid[r].min(la);
        let dc = dctx.row(r);
        let mut mean = T::zero();
        for j in 0..valid {
            let a = cache.alpha.data[r * la + j];
            let da = dc.iter().zip(memory.mem[j].row(r)).fold(T::zero(), |acc, (&x, &m)| acc + x * m);
            dalpha[j] = da;
            mean += a * da;
            for (dm, &x) in dmem[j].row_mut(r).iter_mut().zip(dc) {
                *dm += a * x;
            }
        }
        for j in 0..valid {
            let ds = cache.alpha.data[r * la + j] * (dalpha[j] - mean);
            let ur = cache.u[j].row(r);
            let dkr = dkeys[j].row_mut(r);
            for k in 0..ad {
                g.att_v.data[k] += ds * ur[k];
                let dpre = ds * p.att_v.data[k] * (T::one() - ur[k] * ur[k]);
                dkr[k] += dpre;
                dqp.data[r * ad + k] += dpre;
            }
        }
    }
    dqp.sum_rows_into(&mut g.att_b);
    g.att_wq.gemm(&cache.q, true, &dqp, false, T::one());
    Mat::matmul(&dqp, false, &p.att_wq, true)
}

struct EncCache<T> {
    /// `[layer][t]`
    steps: Vec<Vec<LstmCache<T>>>,
    /// Dropout masks applied to the input of layers `1..`, `[layer-1][t]`.
    masks: Vec<Vec<Option<Mat<T>>>>,
    active: Vec<Vec<bool>>,
}

struct Encoded<T> {
    memory: Memory<T>,
    h: Vec<Mat<T>>,
    c: Vec<Mat<T>>,
    cache: EncCache<T>,
}

fn encoder_forward<T: Scalar>(
    p: &Params<T>,
    cfg: &ModelConfig,
    inputs: Vec<Mat<T>>,
    lens: &[usize],
    mut dropout: Option<&mut Dropout>,
) -> Encoded<T> {
    let b = lens.len();
    let steps = inputs.len();
    let active: Vec<Vec<bool>> = (0..steps).map(|t| lens.iter().map(|&l| t < l).collect()).collect();
    let mut seq = inputs;
    let mut cache = EncCache { steps: Vec::new(), masks: Vec::new(), active };
    let (mut hs, mut cs) = (Vec::new(), Vec::new());
    for (l, layer) in p.enc.iter().enumerate() {
        let mut h = Mat::zeros(b, cfg.hidden);
        let mut c = Mat::zeros(b, cfg.hidden);
        let mut outs = Vec::with_capacity(steps);
        let mut layer_cache = Vec::with_capacity(steps);
        let mut masks = Vec::new();
        for (t, x) in seq.into_iter().enumerate() {
            let mut x = x;
            if l > 0 {
                let m = dropout.as_deref_mut().map(|d| d.mask::<T>(x.rows, x.cols));
                if let Some(m) = &m {
                    hadamard(&mut x, m);
                }
                masks.push(m);
            }
            let (hn, cn, lc) = lstm_forward(layer, x, &h, &c, Some(&cache.active[t]));
            outs.push(hn.clone());
            layer_cache.push(lc);
            h = hn;
            c = cn;
        }
        if l > 0 {
            cache.masks.push(masks);
        }
        cache.steps.push(layer_cache);
        hs.push(h);
        cs.push(c);
        seq = outs;
    }
    let la = steps.min(cfg.attention_length);
    seq.truncate(la);
    let keys = seq.iter().map(|m| Mat::matmul(m, false, &p.att_wk, false)).collect();
    let valid = lens.iter().map(|&l| l.min(la)).collect();
    Encoded { memory: Memory { mem: seq, keys, valid }, h: hs, c: cs, cache }
}

fn encoder_backward<T: Scalar>(
    p: &Params<T>,
    g: &mut Params<T>,
    cache: &EncCache<T>,
    mut dh: Vec<Mat<T>>,
    mut dc: Vec<Mat<T>>,
    dmem: &[Mat<T>],
) {
    let layers = p.enc.len();
    let steps = cache.active.len();
    for t in (0..steps).rev() {
        if let Some(dm) = dmem.get(t) {
            dh[layers - 1].add_assign(dm);
        }
        for l in (0..layers).rev() {
            let (mut dx, dhp, dcp) =
                lstm_backward(&p.enc[l], &mut g.enc[l], &cache.steps[l][t], &dh[l], &dc[l], Some(&cache.active[t]));
            dh[l] = dhp;
            dc[l] = dcp;
            if l > 0 {
                if let Some(m) = &cache.masks[l - 1][t] {
                    hadamard(&mut dx, m);
                }
                dh[l - 1].add_assign(&dx);
            }
        }
    }
}

struct DecStep<T> {
    prev: Vec<usize>,
    attn: AttnCache<T>,
    layers: Vec<LstmCache<T>>,
    masks: Vec<Option<Mat<T>>>,
    out_mask: Option<Mat<T>>,
    o_in: Mat<T>,
    logp: Mat<T>,
}

fn decoder_step<T: Scalar>(
    p: &Params<T>,
    memory: &Memory<T>,
    h: &mut [Mat<T>],
    c: &mut [Mat<T>],
    prev: &[usize],
    mut dropout: Option<&mut Dropout>,
) -> DecStep<T> {
    let top = h.len() - 1;
    let attn = attend(p, memory, &h[top]);
    let ed = p.emb.cols;
    let mut e = Mat::zeros(prev.len(), ed);
    for (r, &id) in prev.iter().enumerate() {
        e.row_mut(r).copy_from_slice(p.emb.row(id));
    }
    let mut first = Some(Mat::hcat(&[&e, &attn.ctx]));
    let mut layers = Vec::with_capacity(h.len());
    let mut masks = Vec::new();
    for l in 0..h.len() {
        let mut x = first.take().unwrap_or_else(|| h[l - 1].clone());
        if l > 0 {
            let m = dropout.as_deref_mut().map(|d| d.mask::<T>(x.rows, x.cols));
            if let Some(m) = &m {
                hadamard(&mut x, m);
            }
            masks.push(m);
        }
        let (hn, cn, lc) = lstm_forward(&p.dec[l], x, &h[l], &c[l], None);
        h[l] = hn;
        c[l] = cn;
        layers.push(lc);
    }
    let mut out = h[top].clone();
    let out_mask = dropout.map(|d| d.mask::<T>(out.rows, out.cols));
    if let Some(m) = &out_mask {
        hadamard(&mut out, m);
    }
    let o_in = Mat::hcat(&[&out, &attn.ctx]);
    let mut logp = Mat::matmul(&o_in, false, &p.out_w, false);
    logp.add_row_vector(&p.out_b);
    for r in 0..logp.rows {
        log_softmax_in_place(logp.row_mut(r));
    }
    DecStep { prev: prev.to_vec(), attn, layers, masks, out_mask, o_in, logp }
}

fn stack_inputs<T: Scalar>(samples: &[&Sample], width: usize) -> (Vec<Mat<T>>, Vec<usize>) {
    let lens: Vec<usize> = samples.iter().map(|s| s.input.len()).collect();
    let steps = lens.iter().copied().max().unwrap_or(0);
    let inputs = (0..steps)
        .map(|t| {
            let mut m = Mat::zeros(samples.len(), width);
            for (r, s) in samples.iter().enumerate() {
                if let Some(v) = s.input.get(t) {
                    for (dst, &x) in m.row_mut(r).iter_mut().zip(v) {
                        *dst = T::lit(f64::from(x));
                    }
                }
            }
            m
        })
        .collect();
    (inputs, lens)
}

/// Mean per-token NLL under teacher forcing, the number of target tokens,
/// and, if asked, the gradient of that mean.
pub fn loss_and_grad<T: Scalar>(
    p: &Params<T>,
    cfg: &ModelConfig,
    samples: &[&Sample],
    want_grad: bool,
    mut dropout: Option<&mut Dropout>,
) -> (T, usize, Option<Params<T>>) {
    let (inputs, lens) = stack_inputs::<T>(samples, cfg.input_dim);
    let enc = encoder_forward(p, cfg, inputs, &lens, dropout.as_deref_mut());
    let td = samples.iter().map(|s| s.target.len()).max().unwrap_or(0);
    let tokens: usize = samples.iter().map(|s| s.target.len()).sum();
    let mut h = enc.h.clone();
    let mut c = enc.c.clone();
    let mut steps = Vec::with_capacity(td);
    let mut total = T::zero();
    for t in 0..td {
        let prev: Vec<usize> =
            samples.iter().map(|s| if t == 0 { BOS } else { s.target.get(t - 1).copied().unwrap_or(BOS) }).collect();
        let step = decoder_step(p, &enc.memory, &mut h, &mut c, &prev, dropout.as_deref_mut());
        for (r, s) in samples.iter().enumerate() {
            if let Some(&y) = s.target.get(t) {
                total -= step.logp.data[r * step.logp.cols + y];
            }
        }
        steps.push(step);
    }
    if tokens == 0 {
        return (T::zero(), 0, want_grad.then(|| p.zeros_like()));
    }
    let inv_n = T::one() / T::lit(tokens as f64);
    let loss = total * inv_n;
    if !want_grad {
        return (loss, tokens, None);
    }

    let mut g = p.zeros_like();
    let layers = p.dec.len();
    let top = layers - 1;
    let hd = cfg.hidden;
    let b = samples.len();
    let mut dh: Vec<Mat<T>> = (0..layers).map(|_| Mat::zeros(b, hd)).collect();
    let mut dc = dh.clone();
    let mut dmem: Vec<Mat<T>> = enc.memory.mem.iter().map(|m| Mat::zeros(m.rows, m.cols)).collect();
    let mut dkeys: Vec<Mat<T>> = enc.memory.keys.iter().map(|m| Mat::zeros(m.rows, m.cols)).collect();
    for (t, step) in steps.iter().enumerate().rev() {
        let v = step.logp.cols;
        let mut dlogits = Mat::zeros(b, v);
        for (r, s) in samples.iter().enumerate() {
            let Some(&y) = s.target.get(t) else { continue };
            let dl = dlogits.row_mut(r);
            for (d, &lp) in dl.iter_mut().zip(step.logp.row(r)) {
                *d = lp.exp() * inv_n;
            }
            dl[y] -= inv_n;
        }
        g.out_w.gemm(&step.o_in, true, &dlogits, false, T::one());
        dlogits.sum_rows_into(&mut g.out_b);
        let d_oin = Mat::matmul(&dlogits, false, &p.out_w, true);
        let mut d_top = d_oin.col_slice(0, hd);
        let mut dctx = d_oin.col_slice(hd, hd);
        if let Some(m) = &step.out_mask {
            hadamard(&mut d_top, m);
        }
        dh[top].add_assign(&d_top);
        for l in (0..layers).rev() {
            let (mut dx, dhp, dcp) = lstm_backward(&p.dec[l], &mut g.dec[l], &step.layers[l], &dh[l], &dc[l], None);
            dh[l] = dhp;
            dc[l] = dcp;
            if l > 0 {
                if let Some(m) = &step.masks[l - 1] {
                    hadamard(&mut dx, m);
                }
                dh[l - 1].add_assign(&dx);
            } else {
                let ed = p.emb.cols;
                for (r, &id) in step.prev.iter().enumerate() {
                    let row = dx.row(r);
                    for (ge, &d) in g.emb.row_mut(id).iter_mut().zip(&row[..ed]) {
                        *ge += d;
                    }
                    for (gc, &d) in dctx.row_mut(r).iter_mut().zip(&row[ed..]) {
                        *gc += d;
                    }
                }
            }
        }
        let dq = attend_backward(p, &mut g, &enc.memory, &step.attn, &dctx, &mut dmem, &mut dkeys);
        dh[top].add_assign(&dq);
    }
    for ((m, dk), dm) in enc.memory.mem.iter().zip(&dkeys).zip(dmem.iter_mut()) {
        g.att_wk.gemm(m, true, dk, false, T::one());
        dm.gemm(dk, false, &p.att_wk, true, T::one());
    }
    encoder_backward(p, &mut g, &enc.cache, dh, dc, &dmem);
    (loss, tokens, Some(g))
}

/// Recurrent state of the decoder for one hypothesis (one row per layer).
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState<T> {
    pub h: Vec<Vec<T>>,
    pub c: Vec<Vec<T>>,
}

/// Encoder result for a single input sequence.
#[derive(Debug, Clone)]
pub struct EncodedSource<T> {
    pub memory: Memory<T>,
    pub initial: DecoderState<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<T> {
    pub logprobs: Vec<T>,
    pub state: DecoderState<T>,
    pub attention: Vec<T>,
}

pub fn encode_source<T: Scalar>(p: &Params<T>, cfg: &ModelConfig, input: &[Vec<f32>]) -> EncodedSource<T> {
    let sample = Sample { input: input.to_vec(), target: Vec::new() };
    let (inputs, lens) = stack_inputs::<T>(&[&sample], cfg.input_dim);
    let enc = encoder_forward(p, cfg, inputs, &lens, None);
    let initial = DecoderState {
        h: enc.h.iter().map(|m| m.row(0).to_vec()).collect(),
        c: enc.c.iter().map(|m| m.row(0).to_vec()).collect(),
    };
    EncodedSource { memory: enc.memory, initial }
}

/// Advances several hypotheses over the same source by one token.
pub fn decode_steps<T: Scalar>(
    p: &Params<T>,
    source: &EncodedSource<T>,
    states: &[&DecoderState<T>],
    prev: &[usize],
) -> Vec<StepOutput<T>> {
    let b = states.len();
    if b == 0 {
        return Vec::new();
    }
    let layers = p.dec.len();
    let stack = |get: &dyn Fn(&DecoderState<T>) -> &Vec<Vec<T>>, l: usize| {
        let width = get(states[0])[l].len();
        Mat::from_vec(b, width, states.iter().flat_map(|s| get(s)[l].iter().copied()).collect())
    };
    let mut h: Vec<Mat<T>> = (0..layers).map(|l| stack(&|s| &s.h, l)).collect();
    let mut c: Vec<Mat<T>> = (0..layers).map(|l| stack(&|s| &s.c, l)).collect();
    let step = decoder_step(p, &source.memory, &mut h, &mut c, prev, None);
    (0..b)
        .map(|r| StepOutput {
            logprobs: step.logp.row(r).to_vec(),
            state: DecoderState {
                h: h.iter().map(|m| m.row(r).to_vec()).collect(),
                c: c.iter().map(|m| m.row(r).to_vec()).collect(),
            },
            attention: step.attn.alpha.row(r).to_vec(),
        })
        .collect()
}
