//! Tiny decoder-only transformer policy.
//!
//! Pre-norm architecture: learned token + position embeddings, `layers`
//! blocks of multi-head causal self-attention and a GELU MLP (no projection
//! biases), a final layer norm, and an untied output head. The same
//! parameter struct is instantiated three times during training as the
//! current policy, the rollout-time snapshot, and the frozen reference.
//!
//! Scoring comes in two flavors: evaluation-mode (no graph; used for
//! sampling and for the old/reference policies) and differentiable (builds
//! on a caller-owned [`Tape`]). Both run the identical arithmetic, so a
//! response scored under the parameters that sampled it reproduces the
//! recorded logprobs exactly.

use crate::tensor::{Tape, Tensor, TensorError, Var};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::io::{Read, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("sequence length {len} exceeds max_seq_len {max}")]
    SequenceTooLong { len: usize, max: usize },
    #[error("token id {id} out of range for vocab size {vocab}")]
    TokenOutOfRange { id: u32, vocab: usize },
    #[error("prompt must be non-empty")]
    EmptyPrompt,
    #[error("invalid model config: {0}")]
    BadConfig(String),
    #[error("invalid sampling config: {0}")]
    BadSampling(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PolicyError>;

const INIT_STD: f64 = 0.02;
const MASK_NEG: f64 = -1e30;

/// Architecture hyperparameters, fixed at construction.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub max_seq_len: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 32,
            dim: 64,
            layers: 2,
            heads: 4,
            max_seq_len: 256,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vocab_size == 0 || self.dim == 0 || self.layers == 0 || self.max_seq_len == 0 {
            return Err(PolicyError::BadConfig("all dimensions must be positive".into()));
        }
        if self.heads == 0 || self.dim % self.heads != 0 {
            return Err(PolicyError::BadConfig(format!(
                "heads ({}) must divide dim ({})",
                self.heads, self.dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct LayerParams {
    ln1_gain: Tensor,
    ln1_bias: Tensor,
    wq: Tensor,
    wk: Tensor,
    wv: Tensor,
    wo: Tensor,
    ln2_gain: Tensor,
    ln2_bias: Tensor,
    w_in: Tensor,
    w_out: Tensor,
}

/// The policy's learnable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParams {
    cfg: ModelConfig,
    tok_emb: Tensor,
    pos_emb: Tensor,
    layers: Vec<LayerParams>,
    final_gain: Tensor,
    final_bias: Tensor,
    head: Tensor,
}

impl PolicyParams {
    /// Gaussian init (std 0.02) for weights, ones/zeros for layer norms.
    pub fn init(cfg: &ModelConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let mut gauss = |shape: Vec<usize>| {
            let n: usize = shape.iter().product();
            let data: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            Tensor::new(shape, data).expect("shape matches data").with_requires_grad()
        };
        let (v, d, l) = (cfg.vocab_size, cfg.dim, cfg.max_seq_len);
        let tok_emb = gauss(vec![v, d]);
        let pos_emb = gauss(vec![l, d]);
        let mut layers = Vec::with_capacity(cfg.layers);
        for _ in 0..cfg.layers {
            layers.push(LayerParams {
                ln1_gain: ones(d),
                ln1_bias: zeros(d),
                wq: gauss(vec![d, d]),
                wk: gauss(vec![d, d]),
                wv: gauss(vec![d, d]),
                wo: gauss(vec![d, d]),
                ln2_gain: ones(d),
                ln2_bias: zeros(d),
                w_in: gauss(vec![d, 4 * d]),
                w_out: gauss(vec![4 * d, d]),
            });
        }
        let final_gain = ones(d);
        let final_bias = zeros(d);
        let head = gauss(vec![d, v]);
        Ok(PolicyParams {
            cfg: cfg.clone(),
            tok_emb,
            pos_emb,
            layers,
            final_gain,
            final_bias,
            head,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    /// All parameter tensors with stable names, in checkpoint order.
    pub fn named_tensors(&self) -> Vec<(String, &Tensor)> {
        let mut out: Vec<(String, &Tensor)> = vec![
            ("tok_emb".into(), &self.tok_emb),
            ("pos_emb".into(), &self.pos_emb),
        ];
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{i}.ln1.gain"), &l.ln1_gain));
            out.push((format!("layer{i}.ln1.bias"), &l.ln1_bias));
            out.push((format!("layer{i}.attn.wq"), &l.wq));
            out.push((format!("layer{i}.attn.wk"), &l.wk));
            out.push((format!("layer{i}.attn.wv"), &l.wv));
            out.push((format!("layer{i}.attn.wo"), &l.wo));
            out.push((format!("layer{i}.ln2.gain"), &l.ln2_gain));
            out.push((format!("layer{i}.ln2.bias"), &l.ln2_bias));
            out.push((format!("layer{i}.mlp.w_in"), &l.w_in));
            out.push((format!("layer{i}.mlp.w_out"), &l.w_out));
        }
        out.push(("final_ln.gain".into(), &self.final_gain));
        out.push(("final_ln.bias".into(), &self.final_bias));
        out.push(("head".into(), &self.head));
        out
    }

    pub fn named_tensors_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out: Vec<(String, &mut Tensor)> = vec![
            ("tok_emb".into(), &mut self.tok_emb),
            ("pos_emb".into(), &mut self.pos_emb),
        ];
        for (i, l) in self.layers.iter_mut().enumerate() {
            out.push((format!("layer{i}.ln1.gain"), &mut l.ln1_gain));
            out.push((format!("layer{i}.ln1.bias"), &mut l.ln1_bias));
            out.push((format!("layer{i}.attn.wq"), &mut l.wq));
            out.push((format!("layer{i}.attn.wk"), &mut l.wk));
            out.push((format!("layer{i}.attn.wv"), &mut l.wv));
            out.push((format!("layer{i}.attn.wo"), &mut l.wo));
            out.push((format!("layer{i}.ln2.gain"), &mut l.ln2_gain));
            out.push((format!("layer{i}.ln2.bias"), &mut l.ln2_bias));
            out.push((format!("layer{i}.mlp.w_in"), &mut l.w_in));
            out.push((format!("layer{i}.mlp.w_out"), &mut l.w_out));
        }
        out.push(("final_ln.gain".into(), &mut self.final_gain));
        out.push(("final_ln.bias".into(), &mut self.final_bias));
        out.push(("head".into(), &mut self.head));
        out
    }

    pub fn param_count(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn zero_grads(&mut self) {
        for (_, t) in self.named_tensors_mut() {
            t.zero_grad();
        }
    }

    /// Pull gradients off a tape after backward and add them into the
    /// parameter tensors' grad buffers.
    pub fn accumulate_from_tape(&mut self, tape: &Tape, vars: &ParamVars) -> Result<()> {
        for ((_, t), &v) in self.named_tensors_mut().into_iter().zip(&vars.vars) {
            if let Some(g) = tape.grad(v) {
                t.accumulate_grad(g)?;
            }
        }
        Ok(())
    }

    /// Global L2 norm of the accumulated gradients.
    pub fn grad_l2_norm(&self) -> f64 {
        self.named_tensors()
            .iter()
            .filter_map(|(_, t)| t.grad())
            .flat_map(|g| g.iter())
            .map(|&x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    /// Direct mutable access to a named tensor; test and setup helper.
    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.named_tensors_mut()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }
}

fn ones(d: usize) -> Tensor {
    Tensor::new(vec![d], vec![1.0; d]).expect("shape").with_requires_grad()
}

fn zeros(d: usize) -> Tensor {
    Tensor::zeros(vec![d]).with_requires_grad()
}

/// Handles to one policy's parameters registered on a tape, in the same
/// order as [`PolicyParams::named_tensors`].
pub struct ParamVars {
    vars: Vec<Var>,
}

impl ParamVars {
    pub fn vars(&self) -> &[Var] {
        &self.vars
    }
}

/// Register every parameter tensor on `tape`.
pub fn register_params(tape: &mut Tape, params: &PolicyParams) -> ParamVars {
    let vars = params
        .named_tensors()
        .iter()
        .map(|(_, t)| tape.input(t))
        .collect();
    ParamVars { vars }
}

struct LayerVars {
    ln1_gain: Var,
    ln1_bias: Var,
    wq: Var,
    wk: Var,
    wv: Var,
    wo: Var,
    ln2_gain: Var,
    ln2_bias: Var,
    w_in: Var,
    w_out: Var,
}

fn layer_vars(vars: &[Var], layer: usize) -> LayerVars {
    let base = 2 + layer * 10;
    LayerVars {
        ln1_gain: vars[base],
        ln1_bias: vars[base + 1],
        wq: vars[base + 2],
        wk: vars[base + 3],
        wv: vars[base + 4],
        wo: vars[base + 5],
        ln2_gain: vars[base + 6],
        ln2_bias: vars[base + 7],
        w_in: vars[base + 8],
        w_out: vars[base + 9],
    }
}

fn check_tokens(cfg: &ModelConfig, tokens: &[u32]) -> Result<()> {
    if tokens.len() > cfg.max_seq_len {
        return Err(PolicyError::SequenceTooLong {
            len: tokens.len(),
            max: cfg.max_seq_len,
        });
    }
    for &t in tokens {
        if t as usize >= cfg.vocab_size {
            return Err(PolicyError::TokenOutOfRange {
                id: t,
                vocab: cfg.vocab_size,
            });
        }
    }
    Ok(())
}

/// Causal forward pass on a caller-owned tape; returns `[T, V]` logits.
pub fn forward_logits_vars(
    tape: &mut Tape,
    pv: &ParamVars,
    cfg: &ModelConfig,
    tokens: &[u32],
) -> Result<Var> {
    check_tokens(cfg, tokens)?;
    if tokens.is_empty() {
        return Err(PolicyError::EmptyPrompt);
    }
    let t_len = tokens.len();
    let d = cfg.dim;
    let heads = cfg.heads;
    let dh = d / heads;
    let ids: Vec<usize> = tokens.iter().map(|&t| t as usize).collect();
    let pos_ids: Vec<usize> = (0..t_len).collect();

    let vars = &pv.vars;
    let tok = tape.embed(vars[0], &ids)?;
    let pos = tape.embed(vars[1], &pos_ids)?;
    let mut x = tape.add(tok, pos)?;

    // Additive causal mask: 0 on and below the diagonal, -1e30 above.
    let mut mask_data = vec![0.0; t_len * t_len];
    for i in 0..t_len {
        for j in (i + 1)..t_len {
            mask_data[i * t_len + j] = MASK_NEG;
        }
    }
    let mask = tape.constant(vec![t_len, t_len], mask_data);
    let scale = 1.0 / (dh as f64).sqrt();

    for layer in 0..cfg.layers {
        let lv = layer_vars(vars, layer);
        let h = tape.layer_norm(x, lv.ln1_gain, lv.ln1_bias)?;
        let q = tape.matmul(h, lv.wq)?;
        let k = tape.matmul(h, lv.wk)?;
        let v = tape.matmul(h, lv.wv)?;
        let mut ctx: Option<Var> = None;
        for hd in 0..heads {
            let (c0, c1) = (hd * dh, (hd + 1) * dh);
            let qh = tape.slice_cols(q, c0, c1)?;
            let kh = tape.slice_cols(k, c0, c1)?;
            let vh = tape.slice_cols(v, c0, c1)?;
            let kt = tape.transpose(kh)?;
            let scores = tape.matmul(qh, kt)?;
            let scaled = tape.scale(scores, scale)?;
            let masked = tape.add(scaled, mask)?;
            let attn = tape.softmax_rows(masked)?;
            let out_h = tape.matmul(attn, vh)?;
            let placed = tape.scatter_cols(out_h, c0, d)?;
            ctx = Some(match ctx {
                Some(acc) => tape.add(acc, placed)?,
                None => placed,
            });
        }
        let attn_out = tape.matmul(ctx.expect("heads >= 1"), lv.wo)?;
        x = tape.add(x, attn_out)?;
        let h2 = tape.layer_norm(x, lv.ln2_gain, lv.ln2_bias)?;
        let m1 = tape.matmul(h2, lv.w_in)?;
        let act = tape.gelu(m1)?;
        let m2 = tape.matmul(act, lv.w_out)?;
        x = tape.add(x, m2)?;
    }

    let n_params = vars.len();
    let xf = tape.layer_norm(x, vars[n_params - 3], vars[n_params - 2])?;
    tape.matmul(xf, vars[n_params - 1]).map_err(Into::into)
}

/// Evaluation-mode forward pass; returns `[T, V]` logits with no graph kept.
pub fn forward_logits(params: &PolicyParams, tokens: &[u32]) -> Result<Tensor> {
    let mut tape = Tape::no_grad();
    let pv = register_params(&mut tape, params);
    let out = forward_logits_vars(&mut tape, &pv, &params.cfg, tokens)?;
    Ok(Tensor::new(tape.shape_of(out).to_vec(), tape.value(out).to_vec()).expect("consistent"))
}

/// Sampling behavior for response generation.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SamplingConfig {
    /// Softmax temperature; must be positive.
    pub temperature: f64,
    /// Nucleus mass in (0, 1]; 1.0 disables truncation.
    pub top_p: f64,
    pub max_new_tokens: usize,
    pub stop_token: u32,
    /// Argmax decoding (the temperature -> 0 limit). Logprobs and entropies
    /// are still reported under the temperature-scaled distribution.
    #[serde(default)]
    pub greedy: bool,
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(PolicyError::BadSampling("temperature must be > 0".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(PolicyError::BadSampling("top_p must be in (0, 1]".into()));
        }
        if self.max_new_tokens == 0 {
            return Err(PolicyError::BadSampling("max_new_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

/// One sampled response with per-token rollout statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledResponse {
    pub tokens: Vec<u32>,
    /// Log-probability (nats) of each token under the distribution it was
    /// actually drawn from (temperature-scaled, top-p-renormalized).
    pub logprobs: Vec<f64>,
    /// Shannon entropy (nats) of the full temperature-scaled distribution
    /// at each step, measured before any top-p truncation.
    pub entropies: Vec<f64>,
    pub truncated: bool,
}

/// Stable log-softmax of `row / temperature` (multiplies by 1/T so the
/// differentiable path computes bit-identical values).
fn scaled_log_probs(row: &[f64], temperature: f64) -> Vec<f64> {
    let inv = 1.0 / temperature;
    let scaled: Vec<f64> = row.iter().map(|&x| x * inv).collect();
    let m = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + scaled.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
    scaled.iter().map(|&x| x - lse).collect()
}

fn entropy_of(log_probs: &[f64]) -> f64 {
    -log_probs
        .iter()
        .map(|&lp| {
            let p = lp.exp();
            if p > 0.0 {
                p * lp
            } else {
                0.0
            }
        })
        .sum::<f64>()
}

/// Draw one token. Returns `(token, logprob under the sampled-from
/// distribution)`.
fn draw_token(log_probs: &[f64], cfg: &SamplingConfig, rng: &mut ChaCha8Rng) -> (u32, f64) {
    if cfg.greedy {
        let mut best = 0usize;
        for (i, &lp) in log_probs.iter().enumerate() {
            if lp > log_probs[best] {
                best = i;
            }
        }
        return (best as u32, log_probs[best]);
    }
    if cfg.top_p >= 1.0 {
        let u: f64 = rng.gen();
        let mut cum = 0.0;
        for (i, &lp) in log_probs.iter().enumerate() {
            cum += lp.exp();
            if u < cum {
                return (i as u32, lp);
            }
        }
        let last = log_probs.len() - 1;
        return (last as u32, log_probs[last]);
    }
    // Nucleus: smallest prefix of the probability-sorted vocab with mass
    // >= top_p, renormalized. Ties broken by token id for determinism.
    let mut order: Vec<usize> = (0..log_probs.len()).collect();
    order.sort_by(|&a, &b| {
        log_probs[b]
            .partial_cmp(&log_probs[a])
            .expect("finite logprobs")
            .then(a.cmp(&b))
    });
    let mut nucleus = Vec::new();
    let mut mass = 0.0;
    for &i in &order {
        nucleus.push(i);
        mass += log_probs[i].exp();
        if mass >= cfg.top_p {
            break;
        }
    }
    let u: f64 = rng.gen::<f64>() * mass;
    let mut cum = 0.0;
    for &i in &nucleus {
        cum += log_probs[i].exp();
        if u < cum {
            return (i as u32, log_probs[i] - mass.ln());
        }
    }
    let last = *nucleus.last().expect("nucleus non-empty");
    (last as u32, log_probs[last] - mass.ln())
}

/// Autoregressively sample a response. Generation ends when `stop_token`
/// is emitted (it is included in the response) or when `max_new_tokens`
/// or the context window is exhausted (`truncated = true`).
pub fn sample_response(
    params: &PolicyParams,
    prompt: &[u32],
    cfg: &SamplingConfig,
    seed: u64,
) -> Result<SampledResponse> {
    cfg.validate()?;
    if prompt.is_empty() {
        return Err(PolicyError::EmptyPrompt);
    }
    check_tokens(&params.cfg, prompt)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seq = prompt.to_vec();
    let mut out = SampledResponse {
        tokens: Vec::new(),
        logprobs: Vec::new(),
        entropies: Vec::new(),
        truncated: true,
    };
    let budget = cfg.max_new_tokens.min(params.cfg.max_seq_len.saturating_sub(prompt.len()));
    for _ in 0..budget {
        let logits = forward_logits(params, &seq)?;
        let v = params.cfg.vocab_size;
        let last = &logits.data()[(seq.len() - 1) * v..seq.len() * v];
        let log_probs = scaled_log_probs(last, cfg.temperature);
        let (token, lp) = draw_token(&log_probs, cfg, &mut rng);
        out.tokens.push(token);
        out.logprobs.push(lp);
        out.entropies.push(entropy_of(&log_probs));
        seq.push(token);
        if token == cfg.stop_token {
            out.truncated = false;
            break;
        }
    }
    Ok(out)
}

/// Evaluation-mode per-token log-probabilities of `response` given `prompt`,
/// at the given temperature (no top-p; the full scaled distribution).
pub fn logprobs_under(
    params: &PolicyParams,
    prompt: &[u32],
    response: &[u32],
    temperature: f64,
) -> Result<Vec<f64>> {
    if prompt.is_empty() {
        return Err(PolicyError::EmptyPrompt);
    }
    if response.is_empty() {
        return Ok(Vec::new());
    }
    let mut seq = prompt.to_vec();
    seq.extend_from_slice(response);
    check_tokens(&params.cfg, &seq)?;
    // Rows [prompt_len-1, seq_len-2] predict the response tokens; the final
    // token never conditions anything, so score the sequence without it.
    let scored = &seq[..seq.len() - 1];
    let logits = forward_logits(params, scored)?;
    let v = params.cfg.vocab_size;
    let mut out = Vec::with_capacity(response.len());
    for (i, &tok) in response.iter().enumerate() {
        let row = prompt.len() - 1 + i;
        let lp = scaled_log_probs(&logits.data()[row * v..(row + 1) * v], temperature);
        out.push(lp[tok as usize]);
    }
    Ok(out)
}

/// Differentiable variant of [`logprobs_under`]; returns a length-`|response|`
/// vector on the tape.
pub fn logprobs_under_vars(
    tape: &mut Tape,
    pv: &ParamVars,
    cfg: &ModelConfig,
    prompt: &[u32],
    response: &[u32],
    temperature: f64,
) -> Result<Var> {
    if prompt.is_empty() {
        return Err(PolicyError::EmptyPrompt);
    }
    let mut seq = prompt.to_vec();
    seq.extend_from_slice(response);
    check_tokens(cfg, &seq)?;
    let scored = &seq[..seq.len() - 1];
    let logits = forward_logits_vars(tape, pv, cfg, scored)?;
    let scaled = tape.scale(logits, 1.0 / temperature)?;
    let logp = tape.log_softmax(scaled)?;
    let pairs: Vec<(usize, usize)> = response
        .iter()
        .enumerate()
        .map(|(i, &tok)| (prompt.len() - 1 + i, tok as usize))
        .collect();
    tape.gather_rc(logp, &pairs).map_err(Into::into)
}

// ---- checkpoints -----------------------------------------------------------

/// RNG bookkeeping stored alongside parameters so a run can be identified
/// and reproduced: the master seed and the next training step index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RngState {
    pub master_seed: u64,
    pub next_step: u64,
}

const CKPT_MAGIC: &[u8; 8] = b"RLVRCKP\0";
const CKPT_VERSION: u32 = 1;

/// Write a self-describing checkpoint: header (version, architecture, rng
/// state) then the named parameter arrays in a fixed order, little-endian
/// f64. Identical parameters and header produce byte-identical files.
pub fn write_checkpoint<W: Write>(
    w: &mut W,
    params: &PolicyParams,
    rng_state: RngState,
) -> Result<()> {
    w.write_all(CKPT_MAGIC)?;
    w.write_all(&CKPT_VERSION.to_le_bytes())?;
    let c = &params.cfg;
    for dim in [c.vocab_size, c.dim, c.layers, c.heads, c.max_seq_len] {
        w.write_all(&(dim as u32).to_le_bytes())?;
    }
    w.write_all(&rng_state.master_seed.to_le_bytes())?;
    w.write_all(&rng_state.next_step.to_le_bytes())?;
    let named = params.named_tensors();
    w.write_all(&(named.len() as u32).to_le_bytes())?;
    for (name, t) in named {
        let bytes = name.as_bytes();
        w.write_all(&(bytes.len() as u32).to_le_bytes())?;
        w.write_all(bytes)?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for &x in t.data() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_exact_buf<R: Read>(r: &mut R, n: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let b = read_exact_buf(r, 4)?;
    Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let b = read_exact_buf(r, 8)?;
    Ok(u64::from_le_bytes(b.try_into().expect("8 bytes")))
}

/// Read a checkpoint written by [`write_checkpoint`].
pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<(PolicyParams, RngState)> {
    let magic = read_exact_buf(r, 8)?;
    if magic != CKPT_MAGIC {
        return Err(PolicyError::Checkpoint("bad magic".into()));
    }
    let version = read_u32(r)?;
    if version != CKPT_VERSION {
        return Err(PolicyError::Checkpoint(format!(
            "unsupported version {version}"
        )));
    }
    let cfg = ModelConfig {
        vocab_size: read_u32(r)? as usize,
        dim: read_u32(r)? as usize,
        layers: read_u32(r)? as usize,
        heads: read_u32(r)? as usize,
        max_seq_len: read_u32(r)? as usize,
    };
    let rng_state = RngState {
        master_seed: read_u64(r)?,
        next_step: read_u64(r)?,
    };
    let mut params = PolicyParams::init(&cfg, 0)?;
    let expected = params
        .named_tensors()
        .iter()
        .map(|(n, t)| (n.clone(), t.shape().to_vec()))
        .collect::<Vec<_>>();
    let count = read_u32(r)? as usize;
    if count != expected.len() {
        return Err(PolicyError::Checkpoint(format!(
            "expected {} tensors, found {}",
            expected.len(),
            count
        )));
    }
    for (name, shape) in expected {
        let name_len = read_u32(r)? as usize;
        let got_name = String::from_utf8(read_exact_buf(r, name_len)?)
            .map_err(|_| PolicyError::Checkpoint("non-utf8 tensor name".into()))?;
        if got_name != name {
            return Err(PolicyError::Checkpoint(format!(
                "tensor order mismatch: expected {name}, found {got_name}"
            )));
        }
        let ndim = read_u32(r)? as usize;
        let mut got_shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            got_shape.push(read_u64(r)? as usize);
        }
        if got_shape != shape {
            return Err(PolicyError::Checkpoint(format!(
                "shape mismatch for {name}: expected {shape:?}, found {got_shape:?}"
            )));
        }
        let numel: usize = shape.iter().product();
        let raw = read_exact_buf(r, numel * 8)?;
        let data: Vec<f64> = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        let t = params.tensor_mut(&name).expect("known name");
        t.data_mut().copy_from_slice(&data);
    }
    Ok((params, rng_state))
}
