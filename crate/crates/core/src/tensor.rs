//! Dense f64 tensors with taped reverse-mode differentiation.
//!
//! The engine is deliberately small: contiguous row-major buffers, scalar
//! broadcasting only, and a per-forward-pass tape ([`Tape`]) that records
//! every operation in execution order. [`Tape::backward`] replays the tape
//! in reverse exactly once, accumulating gradients by the chain rule.
//!
//! Every forward op validates shapes and rejects non-finite outputs, so a
//! NaN or Inf surfaces at the op that produced it rather than three modules
//! later. Tapes are cheap throwaway objects: build one per forward pass,
//! call backward, drop it.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
    #[error("log of non-positive input")]
    LogDomain,
    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("index out of range in {op}")]
    IndexOutOfRange { op: &'static str },
    #[error("data length {len} does not match shape {shape:?}")]
    DataLength { len: usize, shape: Vec<usize> },
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// A plain dense tensor. Parameters keep their gradient buffer here;
/// intermediate values live on a [`Tape`].
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
    grad: Option<Vec<f64>>,
    requires_grad: bool,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let numel: usize = shape.iter().product();
        if numel != data.len() {
            return Err(TensorError::DataLength {
                len: data.len(),
                shape,
            });
        }
        Ok(Tensor {
            shape,
            data,
            grad: None,
            requires_grad: false,
        })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let numel: usize = shape.iter().product();
        Tensor {
            shape,
            data: vec![0.0; numel],
            grad: None,
            requires_grad: false,
        }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor {
            shape: vec![],
            data: vec![v],
            grad: None,
            requires_grad: false,
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Tensor {
            shape: vec![data.len()],
            data,
            grad: None,
            requires_grad: false,
        }
    }

    pub fn with_requires_grad(mut self) -> Self {
        self.requires_grad = true;
        self
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn requires_grad(&self) -> bool {
        self.requires_grad
    }

    pub fn grad(&self) -> Option<&[f64]> {
        self.grad.as_deref()
    }

    pub fn zero_grad(&mut self) {
        self.grad = None;
    }

    /// Add `g` into this tensor's gradient buffer (allocating it on first use).
    pub fn accumulate_grad(&mut self, g: &[f64]) -> Result<()> {
        if g.len() != self.data.len() {
            return Err(TensorError::ShapeMismatch {
                op: "accumulate_grad",
                detail: format!("grad len {} vs data len {}", g.len(), self.data.len()),
            });
        }
        let buf = self.grad.get_or_insert_with(|| vec![0.0; self.data.len()]);
        for (b, &x) in buf.iter_mut().zip(g) {
            *b += x;
        }
        Ok(())
    }
}

/// Handle to a value on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Input,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    // The constant is not needed for the gradient; kept out of the op.
    AddScalar(Var),
    Exp(Var),
    Log(Var),
    Relu(Var),
    Gelu(Var),
    Clamp(Var, f64, f64),
    ClampBounds(Var, Vec<f64>, Vec<f64>),
    Minimum(Var, Var),
    LogSoftmax(Var),
    SoftmaxRows(Var),
    MatMul(Var, Var),
    Transpose(Var),
    Embed(Var, Vec<usize>),
    SliceCols(Var, usize, usize),
    ScatterCols(Var, usize, usize),
    GatherRc(Var, Vec<(usize, usize)>),
    Sum(Var),
    LayerNorm { x: Var, gain: Var, bias: Var },
}

struct Node {
    op: Op,
    shape: Vec<usize>,
    value: Vec<f64>,
    needs_grad: bool,
}

const LN_EPS: f64 = 1e-5;

/// Records a forward pass and computes gradients on demand.
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
    grad_enabled: bool,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape {
            nodes: Vec::new(),
            grads: Vec::new(),
            grad_enabled: true,
        }
    }

    /// A tape that records values only; backward is unavailable. Used for
    /// evaluation-mode forwards (sampling, old/reference policy scoring).
    pub fn no_grad() -> Self {
        Tape {
            nodes: Vec::new(),
            grads: Vec::new(),
            grad_enabled: false,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape_of(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// Gradient of the last backward pass w.r.t. `v`, if it was reached.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    fn push(&mut self, op: Op, shape: Vec<usize>, value: Vec<f64>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            shape,
            value,
            needs_grad: needs_grad && self.grad_enabled,
        });
        self.grads.push(None);
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    fn check_finite(&self, v: Var, op: &'static str) -> Result<Var> {
        if self.nodes[v.0].value.iter().all(|x| x.is_finite()) {
            Ok(v)
        } else {
            Err(TensorError::NonFinite { op })
        }
    }

    // ---- leaves ------------------------------------------------------

    /// Register a differentiable leaf (a parameter or direct input).
    pub fn input(&mut self, t: &Tensor) -> Var {
        self.push(
            Op::Input,
            t.shape.clone(),
            t.data.clone(),
            t.requires_grad,
        )
    }

    /// Register a leaf that explicitly requires gradient.
    pub fn leaf(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Var {
        self.push(Op::Input, shape, data, true)
    }

    /// Register a constant (never receives gradient).
    pub fn constant(&mut self, shape: Vec<usize>, data: Vec<f64>) -> Var {
        self.push(Op::Input, shape, data, false)
    }

    pub fn constant_scalar(&mut self, v: f64) -> Var {
        self.constant(vec![], vec![v])
    }

    pub fn constant_vec(&mut self, data: Vec<f64>) -> Var {
        let n = data.len();
        self.constant(vec![n], data)
    }

    // ---- elementwise -------------------------------------------------

    fn broadcast_binary(
        &mut self,
        op_name: &'static str,
        a: Var,
        b: Var,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0], &self.nodes[b.0]);
        let (la, lb) = (sa.value.len(), sb.value.len());
        let value: Vec<f64>;
        let shape: Vec<usize>;
        if sa.shape == sb.shape {
            value = sa.value.iter().zip(&sb.value).map(|(&x, &y)| f(x, y)).collect();
            shape = sa.shape.clone();
        } else if lb == 1 {
            let y = sb.value[0];
            value = sa.value.iter().map(|&x| f(x, y)).collect();
            shape = sa.shape.clone();
        } else if la == 1 {
            let x = sa.value[0];
            value = sb.value.iter().map(|&y| f(x, y)).collect();
            shape = sb.shape.clone();
        } else {
            return Err(TensorError::ShapeMismatch {
                op: op_name,
                detail: format!("{:?} vs {:?}", sa.shape, sb.shape),
            });
        }
        let needs = self.needs(a) || self.needs(b);
        let v = self.push(op, shape, value, needs);
        self.check_finite(v, op_name)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.broadcast_binary("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.broadcast_binary("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.broadcast_binary("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    /// Elementwise minimum. At ties the gradient routes to the first
    /// argument, so `minimum(unclipped, clipped)` keeps gradient flowing
    /// whenever both branches agree.
    pub fn minimum(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0], &self.nodes[b.0]);
        if sa.shape != sb.shape {
            return Err(TensorError::ShapeMismatch {
                op: "minimum",
                detail: format!("{:?} vs {:?}", sa.shape, sb.shape),
            });
        }
        let value: Vec<f64> = sa
            .value
            .iter()
            .zip(&sb.value)
            .map(|(&x, &y)| if x <= y { x } else { y })
            .collect();
        let shape = sa.shape.clone();
        let needs = self.needs(a) || self.needs(b);
        let v = self.push(Op::Minimum(a, b), shape, value, needs);
        self.check_finite(v, "minimum")
    }

    fn unary(
        &mut self,
        op_name: &'static str,
        a: Var,
        f: impl Fn(f64) -> f64,
        op: Op,
    ) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let value: Vec<f64> = sa.value.iter().map(|&x| f(x)).collect();
        let shape = sa.shape.clone();
        let needs = self.needs(a);
        let v = self.push(op, shape, value, needs);
        self.check_finite(v, op_name)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary("scale", a, |x| x * c, Op::Scale(a, c))
    }

    pub fn add_scalar(&mut self, a: Var, c: f64) -> Result<Var> {
        self.unary("add_scalar", a, |x| x + c, Op::AddScalar(a))
    }

    pub fn exp(&mut self, a: Var) -> Result<Var> {
        self.unary("exp", a, f64::exp, Op::Exp(a))
    }

    pub fn log(&mut self, a: Var) -> Result<Var> {
        if self.nodes[a.0].value.iter().any(|&x| x <= 0.0) {
            return Err(TensorError::LogDomain);
        }
        self.unary("log", a, f64::ln, Op::Log(a))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.unary("relu", a, |x| x.max(0.0), Op::Relu(a))
    }

    pub fn gelu(&mut self, a: Var) -> Result<Var> {
        self.unary("gelu", a, gelu, Op::Gelu(a))
    }

    /// Clamp to `[lo, hi]`. Gradient is 1 strictly inside the interval and
    /// 0 at the boundary and outside, matching the convention that clipped
    /// tokens receive no gradient through the ratio.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Result<Var> {
        self.unary("clamp", a, |x| x.clamp(lo, hi), Op::Clamp(a, lo, hi))
    }

    /// Clamp with per-element bounds (constant vectors). Same boundary
    /// convention as [`Tape::clamp`].
    pub fn clamp_bounds(&mut self, a: Var, lo: Vec<f64>, hi: Vec<f64>) -> Result<Var> {
        let sa = &self.nodes[a.0];
        if lo.len() != sa.value.len() || hi.len() != sa.value.len() {
            return Err(TensorError::ShapeMismatch {
                op: "clamp_bounds",
                detail: format!(
                    "bounds len {}/{} vs value len {}",
                    lo.len(),
                    hi.len(),
                    sa.value.len()
                ),
            });
        }
        let value: Vec<f64> = sa
            .value
            .iter()
            .enumerate()
            .map(|(i, &x)| x.clamp(lo[i], hi[i]))
            .collect();
        let shape = sa.shape.clone();
        let needs = self.needs(a);
        let v = self.push(Op::ClampBounds(a, lo, hi), shape, value, needs);
        self.check_finite(v, "clamp_bounds")
    }

    // ---- reductions and softmax ---------------------------------------

    /// Sum of all elements; returns a scalar.
    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s: f64 = self.nodes[a.0].value.iter().sum();
        let needs = self.needs(a);
        let v = self.push(Op::Sum(a), vec![], vec![s], needs);
        self.check_finite(v, "sum")
    }

    /// Numerically stable log-softmax along the last axis (1-D or 2-D).
    pub fn log_softmax(&mut self, a: Var) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (rows, cols) = last_axis_dims(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "log_softmax",
            detail: format!("expected 1-D or 2-D, got {:?}", sa.shape),
        })?;
        let mut value = vec![0.0; sa.value.len()];
        for r in 0..rows {
            let row = &sa.value[r * cols..(r + 1) * cols];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln();
            for c in 0..cols {
                value[r * cols + c] = row[c] - lse;
            }
        }
        let shape = sa.shape.clone();
        let needs = self.needs(a);
        let v = self.push(Op::LogSoftmax(a), shape, value, needs);
        self.check_finite(v, "log_softmax")
    }

    /// Row-wise softmax along the last axis (1-D or 2-D).
    pub fn softmax_rows(&mut self, a: Var) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (rows, cols) = last_axis_dims(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "softmax_rows",
            detail: format!("expected 1-D or 2-D, got {:?}", sa.shape),
        })?;
        let mut value = vec![0.0; sa.value.len()];
        for r in 0..rows {
            let row = &sa.value[r * cols..(r + 1) * cols];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for c in 0..cols {
                let e = (row[c] - m).exp();
                value[r * cols + c] = e;
                z += e;
            }
            for c in 0..cols {
                value[r * cols + c] /= z;
            }
        }
        let shape = sa.shape.clone();
        let needs = self.needs(a);
        let v = self.push(Op::SoftmaxRows(a), shape, value, needs);
        self.check_finite(v, "softmax_rows")
    }

    // ---- linear algebra ------------------------------------------------

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (&self.nodes[a.0], &self.nodes[b.0]);
        let (m, k) = dims2(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "matmul",
            detail: format!("lhs must be 2-D, got {:?}", sa.shape),
        })?;
        let (k2, n) = dims2(&sb.shape).ok_or(TensorError::ShapeMismatch {
            op: "matmul",
            detail: format!("rhs must be 2-D, got {:?}", sb.shape),
        })?;
        if k != k2 {
            return Err(TensorError::ShapeMismatch {
                op: "matmul",
                detail: format!("inner dims {} vs {}", k, k2),
            });
        }
        let value = matmul_nn(&sa.value, &sb.value, m, k, n);
        let needs = self.needs(a) || self.needs(b);
        let v = self.push(Op::MatMul(a, b), vec![m, n], value, needs);
        self.check_finite(v, "matmul")
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (m, n) = dims2(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "transpose",
            detail: format!("expected 2-D, got {:?}", sa.shape),
        })?;
        let mut value = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                value[j * m + i] = sa.value[i * n + j];
            }
        }
        let needs = self.needs(a);
        Ok(self.push(Op::Transpose(a), vec![n, m], value, needs))
    }

    // ---- gather / scatter ------------------------------------------------

    /// Gather rows of a `[V, d]` table: `out[t] = table[ids[t]]`.
    pub fn embed(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let st = &self.nodes[table.0];
        let (v, d) = dims2(&st.shape).ok_or(TensorError::ShapeMismatch {
            op: "embed",
            detail: format!("table must be 2-D, got {:?}", st.shape),
        })?;
        if ids.iter().any(|&i| i >= v) {
            return Err(TensorError::IndexOutOfRange { op: "embed" });
        }
        let mut value = vec![0.0; ids.len() * d];
        for (t, &i) in ids.iter().enumerate() {
            value[t * d..(t + 1) * d].copy_from_slice(&st.value[i * d..(i + 1) * d]);
        }
        let needs = self.needs(table);
        Ok(self.push(Op::Embed(table, ids.to_vec()), vec![ids.len(), d], value, needs))
    }

    /// Columns `[c0, c1)` of a 2-D tensor.
    pub fn slice_cols(&mut self, a: Var, c0: usize, c1: usize) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (m, n) = dims2(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "slice_cols",
            detail: format!("expected 2-D, got {:?}", sa.shape),
        })?;
        if c0 >= c1 || c1 > n {
            return Err(TensorError::IndexOutOfRange { op: "slice_cols" });
        }
        let w = c1 - c0;
        let mut value = vec![0.0; m * w];
        for i in 0..m {
            value[i * w..(i + 1) * w].copy_from_slice(&sa.value[i * n + c0..i * n + c1]);
        }
        let needs = self.needs(a);
        Ok(self.push(Op::SliceCols(a, c0, c1), vec![m, w], value, needs))
    }

    /// Place a `[m, w]` tensor into columns starting at `c0` of an `[m, total]`
    /// zero tensor. Summing scattered heads reassembles a concatenation.
    pub fn scatter_cols(&mut self, a: Var, c0: usize, total: usize) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (m, w) = dims2(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "scatter_cols",
            detail: format!("expected 2-D, got {:?}", sa.shape),
        })?;
        if c0 + w > total {
            return Err(TensorError::IndexOutOfRange { op: "scatter_cols" });
        }
        let mut value = vec![0.0; m * total];
        for i in 0..m {
            value[i * total + c0..i * total + c0 + w]
                .copy_from_slice(&sa.value[i * w..(i + 1) * w]);
        }
        let needs = self.needs(a);
        Ok(self.push(Op::ScatterCols(a, c0, total), vec![m, total], value, needs))
    }

    /// Pick entries `(row, col)` of a 2-D tensor into a vector.
    pub fn gather_rc(&mut self, a: Var, pairs: &[(usize, usize)]) -> Result<Var> {
        let sa = &self.nodes[a.0];
        let (m, n) = dims2(&sa.shape).ok_or(TensorError::ShapeMismatch {
            op: "gather_rc",
            detail: format!("expected 2-D, got {:?}", sa.shape),
        })?;
        if pairs.iter().any(|&(r, c)| r >= m || c >= n) {
            return Err(TensorError::IndexOutOfRange { op: "gather_rc" });
        }
        let value: Vec<f64> = pairs.iter().map(|&(r, c)| sa.value[r * n + c]).collect();
        let needs = self.needs(a);
        Ok(self.push(
            Op::GatherRc(a, pairs.to_vec()),
            vec![pairs.len()],
            value,
            needs,
        ))
    }

    /// Row-wise layer normalization with learned gain and bias:
    /// `y = (x - mean) / sqrt(var + eps) * gain + bias`.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var) -> Result<Var> {
        let (sx, sg, sb) = (&self.nodes[x.0], &self.nodes[gain.0], &self.nodes[bias.0]);
        let (rows, d) = dims2(&sx.shape).ok_or(TensorError::ShapeMismatch {
            op: "layer_norm",
            detail: format!("x must be 2-D, got {:?}", sx.shape),
        })?;
        if sg.value.len() != d || sb.value.len() != d {
            return Err(TensorError::ShapeMismatch {
                op: "layer_norm",
                detail: format!("gain/bias len {}/{} vs width {}", sg.value.len(), sb.value.len(), d),
            });
        }
        let mut value = vec![0.0; rows * d];
        for r in 0..rows {
            let row = &sx.value[r * d..(r + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv = 1.0 / (var + LN_EPS).sqrt();
            for c in 0..d {
                value[r * d + c] = (row[c] - mean) * inv * sg.value[c] + sb.value[c];
            }
        }
        let needs = self.needs(x) || self.needs(gain) || self.needs(bias);
        let v = self.push(Op::LayerNorm { x, gain, bias }, vec![rows, d], value, needs);
        self.check_finite(v, "layer_norm")
    }

    // ---- backward -------------------------------------------------------

    /// Accumulate `d loss / d node` for every node reachable from `loss`
    /// that needs a gradient. Repeated calls accumulate.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let node = &self.nodes[loss.0];
        if node.value.len() != 1 {
            return Err(TensorError::NonScalarLoss(node.shape.clone()));
        }
        // Fresh pass into a scratch buffer, merged at the end, so repeated
        // backward calls add rather than compound.
        let mut scratch: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        scratch[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            if !self.nodes[i].needs_grad {
                continue;
            }
            let g = match scratch[i].take() {
                Some(g) => g,
                None => continue,
            };
            self.propagate(i, &g, &mut scratch)?;
            scratch[i] = Some(g);
        }
        for (slot, fresh) in self.grads.iter_mut().zip(scratch) {
            if let Some(g) = fresh {
                add_into(slot, &g);
            }
        }
        Ok(())
    }

    fn propagate(&mut self, i: usize, g: &[f64], scratch: &mut [Option<Vec<f64>>]) -> Result<()> {
        // Local helper: accumulate into an input's grad slot if it needs one.
        macro_rules! acc {
            ($var:expr, $grad:expr) => {
                if self.nodes[$var.0].needs_grad {
                    add_into(&mut scratch[$var.0], &$grad);
                }
            };
        }
        let op = self.nodes[i].op.clone();
        match op {
            Op::Input => {}
            Op::Add(a, b) => {
                acc!(a, reduce_to(&self.nodes[a.0].value, g, Side::Pass));
                acc!(b, reduce_to(&self.nodes[b.0].value, g, Side::Pass));
            }
            Op::Sub(a, b) => {
                acc!(a, reduce_to(&self.nodes[a.0].value, g, Side::Pass));
                acc!(b, reduce_to(&self.nodes[b.0].value, g, Side::Neg));
            }
            Op::Mul(a, b) => {
                if self.nodes[a.0].needs_grad {
                    let ga = mul_broadcast(g, &self.nodes[b.0].value);
                    acc!(a, reduce_to(&self.nodes[a.0].value, &ga, Side::Pass));
                }
                if self.nodes[b.0].needs_grad {
                    let gb = mul_broadcast(g, &self.nodes[a.0].value);
                    acc!(b, reduce_to(&self.nodes[b.0].value, &gb, Side::Pass));
                }
            }
            Op::Scale(a, c) => {
                acc!(a, g.iter().map(|&x| x * c).collect::<Vec<_>>());
            }
            Op::AddScalar(a) => {
                acc!(a, g.to_vec());
            }
            Op::Exp(a) => {
                let out = &self.nodes[i].value;
                acc!(a, g.iter().zip(out).map(|(&gi, &y)| gi * y).collect::<Vec<_>>());
            }
            Op::Log(a) => {
                let x = &self.nodes[a.0].value;
                acc!(a, g.iter().zip(x).map(|(&gi, &xi)| gi / xi).collect::<Vec<_>>());
            }
            Op::Relu(a) => {
                let x = &self.nodes[a.0].value;
                acc!(
                    a,
                    g.iter()
                        .zip(x)
                        .map(|(&gi, &xi)| if xi > 0.0 { gi } else { 0.0 })
                        .collect::<Vec<_>>()
                );
            }
            Op::Gelu(a) => {
                let x = &self.nodes[a.0].value;
                acc!(
                    a,
                    g.iter()
                        .zip(x)
                        .map(|(&gi, &xi)| gi * gelu_deriv(xi))
                        .collect::<Vec<_>>()
                );
            }
            Op::Clamp(a, lo, hi) => {
                let x = &self.nodes[a.0].value;
                acc!(
                    a,
                    g.iter()
                        .zip(x)
                        .map(|(&gi, &xi)| if xi > lo && xi < hi { gi } else { 0.0 })
                        .collect::<Vec<_>>()
                );
            }
            Op::ClampBounds(a, lo, hi) => {
                let x = &self.nodes[a.0].value;
                acc!(
                    a,
                    g.iter()
                        .enumerate()
                        .map(|(j, &gi)| if x[j] > lo[j] && x[j] < hi[j] { gi } else { 0.0 })
                        .collect::<Vec<_>>()
                );
            }
            Op::Minimum(a, b) => {
                let (xa, xb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
                if self.nodes[a.0].needs_grad {
                    let ga: Vec<f64> = g
                        .iter()
                        .enumerate()
                        .map(|(j, &gi)| if xa[j] <= xb[j] { gi } else { 0.0 })
                        .collect();
                    acc!(a, ga);
                }
                if self.nodes[b.0].needs_grad {
                    let gb: Vec<f64> = g
                        .iter()
                        .enumerate()
                        .map(|(j, &gi)| if xa[j] <= xb[j] { 0.0 } else { gi })
                        .collect();
                    acc!(b, gb);
                }
            }
            Op::LogSoftmax(a) => {
                let out = &self.nodes[i].value;
                let (rows, cols) = last_axis_dims(&self.nodes[i].shape).unwrap();
                let mut ga = vec![0.0; out.len()];
                for r in 0..rows {
                    let o = &out[r * cols..(r + 1) * cols];
                    let gr = &g[r * cols..(r + 1) * cols];
                    let gsum: f64 = gr.iter().sum();
                    for c in 0..cols {
                        ga[r * cols + c] = gr[c] - o[c].exp() * gsum;
                    }
                }
                acc!(a, ga);
            }
            Op::SoftmaxRows(a) => {
                let out = &self.nodes[i].value;
                let (rows, cols) = last_axis_dims(&self.nodes[i].shape).unwrap();
                let mut ga = vec![0.0; out.len()];
                for r in 0..rows {
                    let y = &out[r * cols..(r + 1) * cols];
                    let gr = &g[r * cols..(r + 1) * cols];
                    let dot: f64 = y.iter().zip(gr).map(|(&yi, &gi)| yi * gi).sum();
                    for c in 0..cols {
                        ga[r * cols + c] = y[c] * (gr[c] - dot);
                    }
                }
                acc!(a, ga);
            }
            Op::MatMul(a, b) => {
                let (m, k) = dims2(&self.nodes[a.0].shape).unwrap();
                let n = self.nodes[b.0].shape[1];
                if self.nodes[a.0].needs_grad {
                    // dA = G * B^T
                    let ga = matmul_nt(g, &self.nodes[b.0].value, m, n, k);
                    acc!(a, ga);
                }
                if self.nodes[b.0].needs_grad {
                    // dB = A^T * G
                    let gb = matmul_tn(&self.nodes[a.0].value, g, m, k, n);
                    acc!(b, gb);
                }
            }
            Op::Transpose(a) => {
                let (n, m) = dims2(&self.nodes[i].shape).unwrap();
                let mut ga = vec![0.0; m * n];
                for r in 0..n {
                    for c in 0..m {
                        ga[c * n + r] = g[r * m + c];
                    }
                }
                acc!(a, ga);
            }
            Op::Embed(table, ids) => {
                let d = self.nodes[table.0].shape[1];
                let mut gt = vec![0.0; self.nodes[table.0].value.len()];
                for (t, &id) in ids.iter().enumerate() {
                    for c in 0..d {
                        gt[id * d + c] += g[t * d + c];
                    }
                }
                acc!(table, gt);
            }
            Op::SliceCols(a, c0, c1) => {
                let (m, n) = dims2(&self.nodes[a.0].shape).unwrap();
                let w = c1 - c0;
                let mut ga = vec![0.0; m * n];
                for r in 0..m {
                    ga[r * n + c0..r * n + c1].copy_from_slice(&g[r * w..(r + 1) * w]);
                }
                acc!(a, ga);
            }
            Op::ScatterCols(a, c0, total) => {
                let (m, w) = dims2(&self.nodes[a.0].shape).unwrap();
                let mut ga = vec![0.0; m * w];
                for r in 0..m {
                    ga[r * w..(r + 1) * w]
                        .copy_from_slice(&g[r * total + c0..r * total + c0 + w]);
                }
                acc!(a, ga);
            }
            Op::GatherRc(a, pairs) => {
                let (_, n) = dims2(&self.nodes[a.0].shape).unwrap();
                let mut ga = vec![0.0; self.nodes[a.0].value.len()];
                for (j, &(r, c)) in pairs.iter().enumerate() {
                    ga[r * n + c] += g[j];
                }
                acc!(a, ga);
            }
            Op::Sum(a) => {
                let ga = vec![g[0]; self.nodes[a.0].value.len()];
                acc!(a, ga);
            }
            Op::LayerNorm { x, gain, bias } => {
                let (rows, d) = dims2(&self.nodes[x.0].shape).unwrap();
                let xv = &self.nodes[x.0].value;
                let gv = &self.nodes[gain.0].value;
                let mut gx = vec![0.0; rows * d];
                let mut gg = vec![0.0; d];
                let mut gb = vec![0.0; d];
                for r in 0..rows {
                    let row = &xv[r * d..(r + 1) * d];
                    let gr = &g[r * d..(r + 1) * d];
                    let mean = row.iter().sum::<f64>() / d as f64;
                    let var =
                        row.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
                    let inv = 1.0 / (var + LN_EPS).sqrt();
                    // xhat and the two row means needed by the closed form.
                    let mut mean_gy = 0.0;
                    let mut mean_gy_xhat = 0.0;
                    let mut xhat = vec![0.0; d];
                    for c in 0..d {
                        xhat[c] = (row[c] - mean) * inv;
                        let gy = gr[c] * gv[c];
                        mean_gy += gy;
                        mean_gy_xhat += gy * xhat[c];
                    }
                    mean_gy /= d as f64;
                    mean_gy_xhat /= d as f64;
                    for c in 0..d {
                        let gy = gr[c] * gv[c];
                        gx[r * d + c] = inv * (gy - mean_gy - xhat[c] * mean_gy_xhat);
                        gg[c] += gr[c] * xhat[c];
                        gb[c] += gr[c];
                    }
                }
                acc!(x, gx);
                acc!(gain, gg);
                acc!(bias, gb);
            }
        }
        Ok(())
    }
}

// ---- helpers -------------------------------------------------------------

enum Side {
    Pass,
    Neg,
}

/// Reduce an output-shaped gradient to an input's shape (identity, or a sum
/// when the input was a broadcast scalar).
fn reduce_to(input_value: &[f64], g: &[f64], side: Side) -> Vec<f64> {
    let sgn = match side {
        Side::Pass => 1.0,
        Side::Neg => -1.0,
    };
    if input_value.len() == g.len() {
        g.iter().map(|&x| sgn * x).collect()
    } else {
        debug_assert_eq!(input_value.len(), 1);
        vec![sgn * g.iter().sum::<f64>()]
    }
}

fn mul_broadcast(g: &[f64], other: &[f64]) -> Vec<f64> {
    if other.len() == 1 {
        g.iter().map(|&x| x * other[0]).collect()
    } else if g.len() == other.len() {
        g.iter().zip(other).map(|(&x, &y)| x * y).collect()
    } else {
        debug_assert_eq!(g.len() % other.len(), 0);
        g.iter()
            .enumerate()
            .map(|(i, &x)| x * other[i % other.len()])
            .collect()
    }
}

fn add_into(slot: &mut Option<Vec<f64>>, g: &[f64]) {
    match slot {
        Some(buf) => {
            for (b, &x) in buf.iter_mut().zip(g) {
                *b += x;
            }
        }
        None => *slot = Some(g.to_vec()),
    }
}

fn dims2(shape: &[usize]) -> Option<(usize, usize)> {
    if shape.len() == 2 {
        Some((shape[0], shape[1]))
    } else {
        None
    }
}

fn last_axis_dims(shape: &[usize]) -> Option<(usize, usize)> {
    match shape.len() {
        1 => Some((1, shape[0])),
        2 => Some((shape[0], shape[1])),
        _ => None,
    }
}

/// `C = A[m,k] * B[k,n]`, row-major, ikj loop order.
pub(crate) fn matmul_nn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * n];
    for i in 0..m {
        let crow = &mut c[i * n..(i + 1) * n];
        for kk in 0..k {
            let aik = a[i * k + kk];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[kk * n..(kk + 1) * n];
            for j in 0..n {
                crow[j] += aik * brow[j];
            }
        }
    }
    c
}

/// `C = A[m,n] * B[k,n]^T  ->  [m,k]`.
fn matmul_nt(a: &[f64], b: &[f64], m: usize, n: usize, k: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * k];
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        for j in 0..k {
            let brow = &b[j * n..(j + 1) * n];
            let mut s = 0.0;
            for t in 0..n {
                s += arow[t] * brow[t];
            }
            c[i * k + j] = s;
        }
    }
    c
}

/// `C = A[m,k]^T * B[m,n]  ->  [k,n]`.
fn matmul_tn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> Vec<f64> {
    let mut c = vec![0.0; k * n];
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let brow = &b[i * n..(i + 1) * n];
        for j in 0..k {
            let aij = arow[j];
            if aij == 0.0 {
                continue;
            }
            let crow = &mut c[j * n..(j + 1) * n];
            for t in 0..n {
                crow[t] += aij * brow[t];
            }
        }
    }
    c
}

const GELU_C: f64 = 0.7978845608028654; // sqrt(2/pi)
const GELU_A: f64 = 0.044715;

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_deriv(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn randn(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * scale).collect()
    }

    /// Central finite difference of `f` w.r.t. one leaf, compared against the
    /// taped gradient. `build` reruns the whole expression from leaf data.
    fn fd_check(leaf_shape: Vec<usize>, data: Vec<f64>, build: impl Fn(&mut Tape, Var) -> Var) {
        let h = 1e-5;
        let mut tape = Tape::new();
        let x = tape.leaf(leaf_shape.clone(), data.clone());
        let loss = build(&mut tape, x);
        tape.backward(loss).unwrap();
        let analytic = tape.grad(x).unwrap().to_vec();

        for i in 0..data.len() {
            let mut lo = data.clone();
            let mut hi = data.clone();
            lo[i] -= h;
            hi[i] += h;
            let eval = |d: Vec<f64>| {
                let mut t = Tape::no_grad();
                let x = t.leaf(leaf_shape.clone(), d);
                let l = build(&mut t, x);
                t.value(l)[0]
            };
            let fd = (eval(hi) - eval(lo)) / (2.0 * h);
            let denom = analytic[i].abs().max(fd.abs()).max(1e-4);
            assert!(
                (analytic[i] - fd).abs() / denom < 1e-4,
                "entry {}: analytic {} vs fd {}",
                i,
                analytic[i],
                fd
            );
        }
    }

    #[test]
    fn matmul_identity() {
        let mut tape = Tape::new();
        let i2 = tape.constant(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]);
        let a = tape.constant(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        let out = tape.matmul(i2, a).unwrap();
        assert_eq!(tape.value(out), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn matmul_hand_case() {
        let mut tape = Tape::new();
        let a = tape.constant(vec![1, 2], vec![1.0, 2.0]);
        let b = tape.constant(vec![2, 1], vec![3.0, 4.0]);
        let out = tape.matmul(a, b).unwrap();
        assert_eq!(tape.value(out), &[11.0]);
    }

    #[test]
    fn matmul_shape_mismatch_errors() {
        let mut tape = Tape::new();
        let a = tape.constant(vec![2, 3], vec![0.0; 6]);
        let b = tape.constant(vec![2, 2], vec![0.0; 4]);
        assert!(matches!(
            tape.matmul(a, b),
            Err(TensorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn matmul_gradient_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xa = randn(&mut rng, 9, 1.0);
        let xb = randn(&mut rng, 9, 1.0);
        fd_check(vec![3, 3], xa, |t, x| {
            let b = t.constant(vec![3, 3], xb.clone());
            let m = t.matmul(x, b).unwrap();
            t.sum(m).unwrap()
        });
        let xa2 = randn(&mut rng, 9, 1.0);
        let xb2 = randn(&mut rng, 9, 1.0);
        fd_check(vec![3, 3], xb2, |t, x| {
            let a = t.constant(vec![3, 3], xa2.clone());
            let m = t.matmul(a, x).unwrap();
            t.sum(m).unwrap()
        });
    }

    #[test]
    fn clamp_values() {
        let mut tape = Tape::new();
        let x = tape.constant_vec(vec![1.6, 1.0]);
        let c = tape.clamp(x, 0.8, 1.2).unwrap();
        assert_eq!(tape.value(c), &[1.2, 1.0]);
    }

    #[test]
    fn clamp_gradient_zero_outside_one_inside() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![3], vec![0.5, 1.0, 1.5]);
        let c = tape.clamp(x, 0.8, 1.2).unwrap();
        let s = tape.sum(c).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn exp_log_inverse_pair() {
        for v in [0.5, 1.0, 7.0] {
            let mut tape = Tape::new();
            let x = tape.constant_vec(vec![v]);
            let l = tape.log(x).unwrap();
            let e = tape.exp(l).unwrap();
            assert!((tape.value(e)[0] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn log_rejects_non_positive() {
        let mut tape = Tape::new();
        let x = tape.constant_vec(vec![0.0]);
        assert!(matches!(tape.log(x), Err(TensorError::LogDomain)));
    }

    #[test]
    fn log_softmax_uniform() {
        let mut tape = Tape::new();
        let x = tape.constant_vec(vec![0.0; 4]);
        let ls = tape.log_softmax(x).unwrap();
        for &v in tape.value(ls) {
            assert!((v - (-(4.0f64).ln())).abs() < 1e-12);
        }
    }

    #[test]
    fn log_softmax_extreme_inputs_stay_finite() {
        let mut tape = Tape::new();
        let x = tape.constant_vec(vec![1000.0, 0.0]);
        let ls = tape.log_softmax(x).unwrap();
        let v = tape.value(ls);
        assert!(v[0] > -1e-12 && v[0] <= 0.0);
        assert!((v[1] + 1000.0).abs() < 1.0);
    }

    #[test]
    fn log_softmax_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = randn(&mut rng, 8, 5.0);
        let mut tape = Tape::new();
        let x = tape.constant_vec(data);
        let ls = tape.log_softmax(x).unwrap();
        let total: f64 = tape.value(ls).iter().map(|&v| v.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_sum_gives_ones() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![2, 3], vec![1.0, -2.0, 0.5, 3.0, 4.0, -1.0]);
        let s = tape.sum(x).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[1.0; 6]);
    }

    #[test]
    fn backward_elementwise_square() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![3], vec![1.0, 2.0, 3.0]);
        let sq = tape.mul(x, x).unwrap();
        let s = tape.sum(sq).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn backward_accumulates_across_calls() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![2], vec![1.0, 2.0]);
        let s = tape.sum(x).unwrap();
        tape.backward(s).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[2.0, 2.0]);
    }

    #[test]
    fn backward_rejects_non_scalar() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![2], vec![1.0, 2.0]);
        assert!(matches!(
            tape.backward(x),
            Err(TensorError::NonScalarLoss(_))
        ));
    }

    #[test]
    fn scalar_broadcast_add_mul() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![3], vec![1.0, 2.0, 3.0]);
        let c = tape.constant_scalar(2.0);
        let y = tape.mul(x, c).unwrap();
        let z = tape.add(y, c).unwrap();
        assert_eq!(tape.value(z), &[4.0, 6.0, 8.0]);
        let s = tape.sum(z).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[2.0, 2.0, 2.0]);
    }

    #[test]
    fn minimum_routes_gradient_to_smaller_branch() {
        let mut tape = Tape::new();
        let a = tape.leaf(vec![2], vec![1.0, 5.0]);
        let b = tape.leaf(vec![2], vec![3.0, 2.0]);
        let m = tape.minimum(a, b).unwrap();
        assert_eq!(tape.value(m), &[1.0, 2.0]);
        let s = tape.sum(m).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(a).unwrap(), &[1.0, 0.0]);
        assert_eq!(tape.grad(b).unwrap(), &[0.0, 1.0]);
    }

    #[test]
    fn composed_expression_gradients_match_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        // exp / log / gelu / layer-norm-ish composition through matmul.
        let data = randn(&mut rng, 12, 0.8);
        let w = randn(&mut rng, 16, 0.5);
        fd_check(vec![3, 4], data, |t, x| {
            let wv = t.constant(vec![4, 4], w.clone());
            let h = t.matmul(x, wv).unwrap();
            let hg = t.gelu(h).unwrap();
            let e = t.exp(hg).unwrap();
            let ls = t.log_softmax(e).unwrap();
            let sm = t.softmax_rows(ls).unwrap();
            t.sum(sm).unwrap()
        });
    }

    #[test]
    fn layer_norm_gradients_match_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let data = randn(&mut rng, 12, 1.5);
        let gain = randn(&mut rng, 4, 1.0);
        let bias = randn(&mut rng, 4, 0.3);
        fd_check(vec![3, 4], data.clone(), |t, x| {
            let g = t.constant(vec![4], gain.clone());
            let b = t.constant(vec![4], bias.clone());
            let ln = t.layer_norm(x, g, b).unwrap();
            let sq = t.mul(ln, ln).unwrap();
            t.sum(sq).unwrap()
        });
        // Also check gain/bias gradients.
        fd_check(vec![4], gain, |t, g| {
            let x = t.constant(vec![3, 4], data.clone());
            let b = t.constant(vec![4], bias.clone());
            let ln = t.layer_norm(x, g, b).unwrap();
            let sq = t.mul(ln, ln).unwrap();
            t.sum(sq).unwrap()
        });
    }

    #[test]
    fn embed_scatter_gather_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let table = randn(&mut rng, 10, 1.0);
        fd_check(vec![5, 2], table, |t, tbl| {
            let e = t.embed(tbl, &[0, 3, 3, 4]).unwrap();
            let sl = t.slice_cols(e, 0, 1).unwrap();
            let sc = t.scatter_cols(sl, 1, 2).unwrap();
            let g = t.gather_rc(sc, &[(0, 1), (2, 1)]).unwrap();
            let m = t.mul(g, g).unwrap();
            t.sum(m).unwrap()
        });
    }

    #[test]
    fn transpose_roundtrip_and_gradient() {
        let mut tape = Tape::new();
        let x = tape.leaf(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let xt = tape.transpose(x).unwrap();
        assert_eq!(tape.shape_of(xt), &[3, 2]);
        assert_eq!(tape.value(xt), &[1.0, 4.0, 2.0, 5.0, 3.0, 6.0]);
        let s = tape.sum(xt).unwrap();
        tape.backward(s).unwrap();
        assert_eq!(tape.grad(x).unwrap(), &[1.0; 6]);
    }

    #[test]
    fn forward_is_deterministic() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let data = randn(&mut rng, 16, 1.0);
            let mut tape = Tape::new();
            let x = tape.leaf(vec![4, 4], data.clone());
            let w = tape.constant(vec![4, 4], data);
            let m = tape.matmul(x, w).unwrap();
            let sm = tape.softmax_rows(m).unwrap();
            let s = tape.sum(sm).unwrap();
            tape.backward(s).unwrap();
            (tape.value(sm).to_vec(), tape.grad(x).unwrap().to_vec())
        };
        let (v1, g1) = run();
        let (v2, g2) = run();
        assert_eq!(v1, v2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn tensor_invariants() {
        assert!(Tensor::new(vec![2, 2], vec![0.0; 3]).is_err());
        let mut t = Tensor::zeros(vec![2]);
        t.accumulate_grad(&[1.0, 2.0]).unwrap();
        t.accumulate_grad(&[1.0, 2.0]).unwrap();
        assert_eq!(t.grad().unwrap(), &[2.0, 4.0]);
        t.zero_grad();
        assert!(t.grad().is_none());
    }
}
