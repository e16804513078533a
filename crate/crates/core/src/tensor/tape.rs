//! Reverse-mode autodiff tape over 2D row-major buffers.
//!
//! Nodes are appended in topological order (inputs always precede outputs),
//! so backward is a single reverse sweep. `backward` resets gradients on each
//! call; it does not accumulate across calls.

use super::{Gradients, ParamId, ParamSet};
use crate::{Error, Result};

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(ParamId),
    /// [n,k] x [k,m]
    MatMul(Var, Var),
    /// [n,d] + [1,d] broadcast over rows
    AddRow(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Relu(Var),
    /// Per-row normalization with learnable gain/bias; caches per-row stats.
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        mean: Vec<f64>,
        inv_std: Vec<f64>,
    },
    ConcatCols(Vec<Var>),
    GatherRows {
        src: Var,
        index: Vec<usize>,
    },
    /// out[index[e], :] += src[e, :]
    ScatterAddRows {
        src: Var,
        index: Vec<usize>,
    },
    /// y[r,c] = x[r,c] * scale[c] + shift[c]; only the scale matters for backward.
    ColAffine {
        x: Var,
        scale: Vec<f64>,
    },
    /// y[r,c] = x[r,c] * weight[r]
    RowScale {
        x: Var,
        weights: Vec<f64>,
    },
    Clamp {
        x: Var,
        lo: f64,
        hi: f64,
    },
    Scale(Var, f64),
    /// Euclidean norm of each row -> [n,1]
    RowNorm(Var),
    /// Mean of squared elements -> scalar [1,1]
    SqMean(Var),
}

struct Node {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    needs_grad: bool,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
    param_cache: Vec<Option<Var>>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        let n = &self.nodes[v.0];
        (n.rows, n.cols)
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].values
    }

    /// Gradient of the last `backward` target w.r.t. `v`, if any was recorded.
    pub fn grad(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    fn push(&mut self, rows: usize, cols: usize, values: Vec<f64>, needs_grad: bool, op: Op) -> Var {
        debug_assert_eq!(values.len(), rows * cols);
        self.nodes.push(Node {
            rows,
            cols,
            values,
            needs_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn constant(&mut self, rows: usize, cols: usize, values: Vec<f64>) -> Var {
        self.push(rows, cols, values, false, Op::Constant)
    }

    pub fn constant_rows(&mut self, rows: &[crate::Vec2]) -> Var {
        let mut values = Vec::with_capacity(rows.len() * 2);
        for r in rows {
            values.push(r[0]);
            values.push(r[1]);
        }
        self.push(rows.len(), 2, values, false, Op::Constant)
    }

    /// Bind a parameter tensor as a leaf; repeated binds return the same node.
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        if self.param_cache.len() < params.len() {
            self.param_cache.resize(params.len(), None);
        }
        if let Some(v) = self.param_cache[id.0] {
            return v;
        }
        let t = params.tensor(id);
        let (rows, cols) = t.dims2();
        let v = self.push(
            rows,
            cols,
            t.values().to_vec(),
            t.requires_grad(),
            Op::Param(id),
        );
        self.param_cache[id.0] = Some(v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, k) = self.shape(a);
        let (k2, m) = self.shape(b);
        if k != k2 {
            return Err(Error::shape("matmul", format!("[{n},{k}]x[{k},?]"), format!("[{k2},{m}]")));
        }
        let mut out = vec![0.0; n * m];
        matmul_into(&self.nodes[a.0].values, n, k, &self.nodes[b.0].values, m, &mut out);
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(n, m, out, ng, Op::MatMul(a, b)))
    }

    pub fn add_row(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, d) = self.shape(a);
        let (rb, db) = self.shape(b);
        if rb != 1 || db != d {
            return Err(Error::shape("add_row", format!("[1,{d}]"), format!("[{rb},{db}]")));
        }
        let bv = &self.nodes[b.0].values;
        let mut out = self.nodes[a.0].values.clone();
        for r in 0..n {
            for c in 0..d {
                out[r * d + c] += bv[c];
            }
        }
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(n, d, out, ng, Op::AddRow(a, b)))
    }

    fn elementwise2(&mut self, a: Var, b: Var, ctx: &str) -> Result<(usize, usize)> {
        let sa = self.shape(a);
        let sb = self.shape(b);
        if sa != sb {
            return Err(Error::shape(ctx, format!("{sa:?}"), format!("{sb:?}")));
        }
        Ok(sa)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, d) = self.elementwise2(a, b, "add")?;
        let out: Vec<f64> = self.nodes[a.0]
            .values
            .iter()
            .zip(&self.nodes[b.0].values)
            .map(|(x, y)| x + y)
            .collect();
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(n, d, out, ng, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (n, d) = self.elementwise2(a, b, "sub")?;
        let out: Vec<f64> = self.nodes[a.0]
            .values
            .iter()
            .zip(&self.nodes[b.0].values)
            .map(|(x, y)| x - y)
            .collect();
        let ng = self.needs(a) || self.needs(b);
        Ok(self.push(n, d, out, ng, Op::Sub(a, b)))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let (n, d) = self.shape(x);
        let out: Vec<f64> = self.nodes[x.0].values.iter().map(|&v| v.max(0.0)).collect();
        let ng = self.needs(x);
        self.push(n, d, out, ng, Op::Relu(x))
    }

    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Result<Var> {
        let (n, d) = self.shape(x);
        for (v, name) in [(gain, "gain"), (bias, "bias")] {
            let s = self.shape(v);
            if s != (1, d) {
                return Err(Error::shape(format!("layer_norm {name}"), format!("[1,{d}]"), format!("{s:?}")));
            }
        }
        let xv = &self.nodes[x.0].values;
        let gv = &self.nodes[gain.0].values;
        let bv = &self.nodes[bias.0].values;
        let mut out = vec![0.0; n * d];
        let mut means = vec![0.0; n];
        let mut inv_stds = vec![0.0; n];
        for r in 0..n {
            let row = &xv[r * d..(r + 1) * d];
            let mean = row.iter().sum::<f64>() / d as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
            let inv_std = 1.0 / (var + eps).sqrt();
            means[r] = mean;
            inv_stds[r] = inv_std;
            for c in 0..d {
                out[r * d + c] = (row[c] - mean) * inv_std * gv[c] + bv[c];
            }
        }
        let ng = self.needs(x) || self.needs(gain) || self.needs(bias);
        Ok(self.push(
            n,
            d,
            out,
            ng,
            Op::LayerNorm {
                x,
                gain,
                bias,
                mean: means,
                inv_std: inv_stds,
            },
        ))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::Contract("concat_cols of zero tensors".into()));
        }
        let n = self.shape(parts[0]).0;
        let mut total = 0;
        for &p in parts {
            let (r, c) = self.shape(p);
            if r != n {
                return Err(Error::shape("concat_cols", format!("{n} rows"), format!("{r} rows")));
            }
            total += c;
        }
        let mut out = vec![0.0; n * total];
        let mut offset = 0;
        for &p in parts {
            let (_, c) = self.shape(p);
            let pv = &self.nodes[p.0].values;
            for r in 0..n {
                out[r * total + offset..r * total + offset + c].copy_from_slice(&pv[r * c..(r + 1) * c]);
            }
            offset += c;
        }
        let ng = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(n, total, out, ng, Op::ConcatCols(parts.to_vec())))
    }

    pub fn gather_rows(&mut self, src: Var, index: &[usize]) -> Result<Var> {
        let (n, d) = self.shape(src);
        if let Some(&bad) = index.iter().find(|&&i| i >= n) {
            return Err(Error::Contract(format!("gather_rows index {bad} out of {n} rows")));
        }
        let sv = &self.nodes[src.0].values;
        let mut out = vec![0.0; index.len() * d];
        for (r, &i) in index.iter().enumerate() {
            out[r * d..(r + 1) * d].copy_from_slice(&sv[i * d..(i + 1) * d]);
        }
        let ng = self.needs(src);
        Ok(self.push(
            index.len(),
            d,
            out,
            ng,
            Op::GatherRows {
                src,
                index: index.to_vec(),
            },
        ))
    }

    /// Sum rows of `src` into `out_rows` destination slots; rows of the output
    /// that receive no contribution stay zero.
    pub fn scatter_add_rows(&mut self, src: Var, index: &[usize], out_rows: usize) -> Result<Var> {
        let (e, d) = self.shape(src);
        if e != index.len() {
            return Err(Error::shape("scatter_add_rows", format!("{e} indices"), index.len()));
        }
        if let Some(&bad) = index.iter().find(|&&i| i >= out_rows) {
            return Err(Error::Contract(format!(
                "scatter_add_rows index {bad} out of {out_rows} rows"
            )));
        }
        let sv = &self.nodes[src.0].values;
        let mut out = vec![0.0; out_rows * d];
        for (r, &i) in index.iter().enumerate() {
            for c in 0..d {
                out[i * d + c] += sv[r * d + c];
            }
        }
        let ng = self.needs(src);
        Ok(self.push(
            out_rows,
            d,
            out,
            ng,
            Op::ScatterAddRows {
                src,
                index: index.to_vec(),
            },
        ))
    }

    pub fn col_affine(&mut self, x: Var, scale: &[f64], shift: &[f64]) -> Result<Var> {
        let (n, d) = self.shape(x);
        if scale.len() != d || shift.len() != d {
            return Err(Error::shape(
                "col_affine",
                format!("{d} scale/shift entries"),
                format!("{}/{}", scale.len(), shift.len()),
            ));
        }
        let xv = &self.nodes[x.0].values;
        let mut out = vec![0.0; n * d];
        for r in 0..n {
            for c in 0..d {
                out[r * d + c] = xv[r * d + c] * scale[c] + shift[c];
            }
        }
        let ng = self.needs(x);
        Ok(self.push(
            n,
            d,
            out,
            ng,
            Op::ColAffine {
                x,
                scale: scale.to_vec(),
            },
        ))
    }

    pub fn row_scale(&mut self, x: Var, weights: &[f64]) -> Result<Var> {
        let (n, d) = self.shape(x);
        if weights.len() != n {
            return Err(Error::shape("row_scale", format!("{n} weights"), weights.len()));
        }
        let xv = &self.nodes[x.0].values;
        let mut out = vec![0.0; n * d];
        for r in 0..n {
            for c in 0..d {
                out[r * d + c] = xv[r * d + c] * weights[r];
            }
        }
        let ng = self.needs(x);
        Ok(self.push(
            n,
            d,
            out,
            ng,
            Op::RowScale {
                x,
                weights: weights.to_vec(),
            },
        ))
    }

    pub fn clamp(&mut self, x: Var, lo: f64, hi: f64) -> Var {
        let (n, d) = self.shape(x);
        let out: Vec<f64> = self.nodes[x.0].values.iter().map(|&v| v.clamp(lo, hi)).collect();
        let ng = self.needs(x);
        self.push(n, d, out, ng, Op::Clamp { x, lo, hi })
    }

    pub fn scale(&mut self, x: Var, s: f64) -> Var {
        let (n, d) = self.shape(x);
        let out: Vec<f64> = self.nodes[x.0].values.iter().map(|&v| v * s).collect();
        let ng = self.needs(x);
        self.push(n, d, out, ng, Op::Scale(x, s))
    }

    /// Mean of squared elements, as a scalar node.
    pub fn sq_mean(&mut self, x: Var) -> Var {
        let (n, d) = self.shape(x);
        let numel = (n * d).max(1);
        let total: f64 = self.nodes[x.0].values.iter().map(|&v| v * v).sum();
        let ng = self.needs(x);
        self.push(1, 1, vec![total / numel as f64], ng, Op::SqMean(x))
    }

    /// Per-row Euclidean norm.
    pub fn row_norm(&mut self, x: Var) -> Var {
        let (n, d) = self.shape(x);
        let xv = &self.nodes[x.0].values;
        let mut out = vec![0.0; n];
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..d {
                acc += xv[r * d + c] * xv[r * d + c];
            }
            out[r] = acc.sqrt();
        }
        let ng = self.needs(x);
        self.push(n, 1, out, ng, Op::RowNorm(x))
    }

    pub fn scalar_value(&self, v: Var) -> Result<f64> {
        let (n, d) = self.shape(v);
        if n * d != 1 {
            return Err(Error::Contract(format!("expected scalar, got [{n},{d}]")));
        }
        Ok(self.nodes[v.0].values[0])
    }

    /// Reverse sweep from a scalar loss. Gradients are reset on every call.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let (n, d) = self.shape(loss);
        if n * d != 1 {
            return Err(Error::Contract(format!(
                "backward requires a scalar loss, got [{n},{d}]"
            )));
        }
        self.grads = (0..self.nodes.len()).map(|_| None).collect();
        if !self.nodes[loss.0].needs_grad {
            // Loss does not depend on any parameter; all gradients are zero.
            return Ok(());
        }
        self.grads[loss.0] = Some(vec![1.0]);

        for i in (0..=loss.0).rev() {
            if !self.nodes[i].needs_grad || self.grads[i].is_none() {
                continue;
            }
            let (lo, hi) = self.grads.split_at_mut(i);
            let g = hi[0].as_ref().unwrap();
            let node = &self.nodes[i];
            match &node.op {
                Op::Constant | Op::Param(_) => {}
                Op::MatMul(a, b) => {
                    let (n, k) = (self.nodes[a.0].rows, self.nodes[a.0].cols);
                    let m = self.nodes[b.0].cols;
                    if self.nodes[a.0].needs_grad {
                        let ga = ensure(&mut lo[a.0], n * k);
                        let bv = &self.nodes[b.0].values;
                        // ga[i,p] += sum_j g[i,j] * b[p,j]
                        for r in 0..n {
                            let grow = &g[r * m..(r + 1) * m];
                            let garow = &mut ga[r * k..(r + 1) * k];
                            for p in 0..k {
                                let brow = &bv[p * m..(p + 1) * m];
                                let mut acc = 0.0;
                                for j in 0..m {
                                    acc += grow[j] * brow[j];
                                }
                                garow[p] += acc;
                            }
                        }
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = ensure(&mut lo[b.0], k * m);
                        let av = &self.nodes[a.0].values;
                        // gb[p,j] += sum_i a[i,p] * g[i,j]
                        for r in 0..n {
                            let arow = &av[r * k..(r + 1) * k];
                            let grow = &g[r * m..(r + 1) * m];
                            for (p, &ap) in arow.iter().enumerate() {
                                if ap != 0.0 {
                                    let gbrow = &mut gb[p * m..(p + 1) * m];
                                    for j in 0..m {
                                        gbrow[j] += ap * grow[j];
                                    }
                                }
                            }
                        }
                    }
                }
                Op::AddRow(a, b) => {
                    let (n, dd) = (node.rows, node.cols);
                    if self.nodes[a.0].needs_grad {
                        let ga = ensure(&mut lo[a.0], n * dd);
                        for (x, y) in ga.iter_mut().zip(g) {
                            *x += y;
                        }
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = ensure(&mut lo[b.0], dd);
                        for r in 0..n {
                            for c in 0..dd {
                                gb[c] += g[r * dd + c];
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for v in [a, b] {
                        if self.nodes[v.0].needs_grad {
                            let gv = ensure(&mut lo[v.0], g.len());
                            for (x, y) in gv.iter_mut().zip(g) {
                                *x += y;
                            }
                        }
                    }
                }
                Op::Sub(a, b) => {
                    if self.nodes[a.0].needs_grad {
                        let ga = ensure(&mut lo[a.0], g.len());
                        for (x, y) in ga.iter_mut().zip(g) {
                            *x += y;
                        }
                    }
                    if self.nodes[b.0].needs_grad {
                        let gb = ensure(&mut lo[b.0], g.len());
                        for (x, y) in gb.iter_mut().zip(g) {
                            *x -= y;
                        }
                    }
                }
                Op::Relu(x) => {
                    if self.nodes[x.0].needs_grad {
                        let xv = &self.nodes[x.0].values;
                        let gx = ensure(&mut lo[x.0], g.len());
                        for ((gi, &xi), &go) in gx.iter_mut().zip(xv).zip(g) {
                            if xi > 0.0 {
                                *gi += go;
                            }
                        }
                    }
                }
                Op::LayerNorm {
                    x,
                    gain,
                    bias,
                    mean,
                    inv_std,
                } => {
                    let (n, dd) = (node.rows, node.cols);
                    let xv = &self.nodes[x.0].values;
                    let gv = &self.nodes[gain.0].values;
                    let x_ng = self.nodes[x.0].needs_grad;
                    let g_ng = self.nodes[gain.0].needs_grad;
                    let b_ng = self.nodes[bias.0].needs_grad;
                    for r in 0..n {
                        let grow = &g[r * dd..(r + 1) * dd];
                        let xrow = &xv[r * dd..(r + 1) * dd];
                        if g_ng {
                            let gg = ensure(&mut lo[gain.0], dd);
                            for c in 0..dd {
                                let xhat = (xrow[c] - mean[r]) * inv_std[r];
                                gg[c] += grow[c] * xhat;
                            }
                        }
                        if b_ng {
                            let gb = ensure(&mut lo[bias.0], dd);
                            for c in 0..dd {
                                gb[c] += grow[c];
                            }
                        }
                        if x_ng {
                            let mut m1 = 0.0;
                            let mut m2 = 0.0;
                            for c in 0..dd {
                                let dy = grow[c] * gv[c];
                                let xhat = (xrow[c] - mean[r]) * inv_std[r];
                                m1 += dy;
                                m2 += dy * xhat;
                            }
                            m1 /= dd as f64;
                            m2 /= dd as f64;
                            let gx = ensure(&mut lo[x.0], n * dd);
                            for c in 0..dd {
                                let dy = grow[c] * gv[c];
                                let xhat = (xrow[c] - mean[r]) * inv_std[r];
                                gx[r * dd + c] += inv_std[r] * (dy - m1 - xhat * m2);
                            }
                        }
                    }
                }
                Op::ConcatCols(parts) => {
                    let total = node.cols;
                    let n = node.rows;
                    let mut offset = 0;
                    for &p in parts {
                        let c = self.nodes[p.0].cols;
                        if self.nodes[p.0].needs_grad {
                            let gp = ensure(&mut lo[p.0], n * c);
                            for r in 0..n {
                                for cc in 0..c {
                                    gp[r * c + cc] += g[r * total + offset + cc];
                                }
                            }
                        }
                        offset += c;
                    }
                }
                Op::GatherRows { src, index } => {
                    if self.nodes[src.0].needs_grad {
                        let d = node.cols;
                        let gs = ensure(&mut lo[src.0], self.nodes[src.0].values.len());
                        for (r, &i) in index.iter().enumerate() {
                            for c in 0..d {
                                gs[i * d + c] += g[r * d + c];
                            }
                        }
                    }
                }
                Op::ScatterAddRows { src, index } => {
                    if self.nodes[src.0].needs_grad {
                        let d = node.cols;
                        let gs = ensure(&mut lo[src.0], self.nodes[src.0].values.len());
                        for (r, &i) in index.iter().enumerate() {
                            for c in 0..d {
                                gs[r * d + c] += g[i * d + c];
                            }
                        }
                    }
                }
                Op::ColAffine { x, scale, .. } => {
                    if self.nodes[x.0].needs_grad {
                        let d = node.cols;
                        let n = node.rows;
                        let gx = ensure(&mut lo[x.0], g.len());
                        for r in 0..n {
                            for c in 0..d {
                                gx[r * d + c] += g[r * d + c] * scale[c];
                            }
                        }
                    }
                }
                Op::RowScale { x, weights } => {
                    if self.nodes[x.0].needs_grad {
                        let d = node.cols;
                        let gx = ensure(&mut lo[x.0], g.len());
                        for (r, &w) in weights.iter().enumerate() {
                            for c in 0..d {
                                gx[r * d + c] += g[r * d + c] * w;
                            }
                        }
                    }
                }
                Op::Clamp { x, lo: l, hi: h } => {
                    if self.nodes[x.0].needs_grad {
                        let xv = &self.nodes[x.0].values;
                        let gx = ensure(&mut lo[x.0], g.len());
                        for ((gi, &xi), &go) in gx.iter_mut().zip(xv).zip(g) {
                            if xi > *l && xi < *h {
                                *gi += go;
                            }
                        }
                    }
                }
                Op::Scale(x, s) => {
                    if self.nodes[x.0].needs_grad {
                        let gx = ensure(&mut lo[x.0], g.len());
                        for (gi, &go) in gx.iter_mut().zip(g) {
                            *gi += go * s;
                        }
                    }
                }
                Op::RowNorm(x) => {
                    if self.nodes[x.0].needs_grad {
                        let d = self.nodes[x.0].cols;
                        let xv = &self.nodes[x.0].values;
                        let yv = &node.values;
                        let gx = ensure(&mut lo[x.0], xv.len());
                        for r in 0..node.rows {
                            // zero-norm rows get zero gradient
                            if yv[r] > 0.0 {
                                for c in 0..d {
                                    gx[r * d + c] += g[r] * xv[r * d + c] / yv[r];
                                }
                            }
                        }
                    }
                }
                Op::SqMean(x) => {
                    if self.nodes[x.0].needs_grad {
                        let xv = &self.nodes[x.0].values;
                        let numel = xv.len().max(1) as f64;
                        let go = g[0];
                        let gx = ensure(&mut lo[x.0], xv.len());
                        for (gi, &xi) in gx.iter_mut().zip(xv) {
                            *gi += go * 2.0 * xi / numel;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Add this tape's parameter gradients into an aligned accumulator.
    pub fn accumulate_param_gradients(&self, grads: &mut Gradients) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Param(id) = node.op {
                if let Some(Some(g)) = self.grads.get(i) {
                    let buf = &mut grads.per_param[id.0];
                    for (x, y) in buf.iter_mut().zip(g) {
                        *x += y;
                    }
                }
            }
        }
    }

    /// Overwrite each bound parameter tensor's grad buffer with this tape's
    /// gradients (zero where the loss did not touch the parameter).
    pub fn write_param_grads(&self, params: &mut ParamSet) {
        for (i, node) in self.nodes.iter().enumerate() {
            if let Op::Param(id) = node.op {
                let g = match self.grads.get(i) {
                    Some(Some(g)) => g.clone(),
                    _ => vec![0.0; params.tensor(id).len()],
                };
                params.tensor_mut(id).set_grad(Some(g));
            }
        }
    }
}

fn ensure(slot: &mut Option<Vec<f64>>, len: usize) -> &mut Vec<f64> {
    slot.get_or_insert_with(|| vec![0.0; len])
}

/// out += a[n,k] * b[k,m], row-major.
fn matmul_into(a: &[f64], n: usize, k: usize, b: &[f64], m: usize, out: &mut [f64]) {
    for r in 0..n {
        let arow = &a[r * k..(r + 1) * k];
        let orow = &mut out[r * m..(r + 1) * m];
        for (p, &ap) in arow.iter().enumerate() {
            if ap != 0.0 {
                let brow = &b[p * m..(p + 1) * m];
                for j in 0..m {
                    orow[j] += ap * brow[j];
                }
            }
        }
    }
}
