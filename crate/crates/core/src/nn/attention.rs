//! Attention modules applied to the deepest encoder features. Every variant
//! maps `(B, C, D, H, W)` to the same shape.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::init::Initializer;
use super::ops::{
    global_avg_pool, global_max_pool, resize_trilinear, sigmoid_scalar, softmax_in_place, Conv3d, Linear,
};
use super::reb::{conv_norm_relu, Params};
use super::tensor::Tensor5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AttentionKind {
    None,
    Se,
    #[default]
    Sk,
    Cbam,
    Gate,
    Polar,
    Danet,
}

impl AttentionKind {
    pub const ALL: [AttentionKind; 7] = [
        AttentionKind::None,
        AttentionKind::Se,
        AttentionKind::Sk,
        AttentionKind::Cbam,
        AttentionKind::Gate,
        AttentionKind::Polar,
        AttentionKind::Danet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttentionKind::None => "none",
            AttentionKind::Se => "se",
            AttentionKind::Sk => "sk",
            AttentionKind::Cbam => "cbam",
            AttentionKind::Gate => "gate",
            AttentionKind::Polar => "polar",
            AttentionKind::Danet => "danet",
        }
    }

    pub fn choices() -> String {
        Self::ALL.map(Self::name).join(", ")
    }
}

impl fmt::Display for AttentionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttentionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown attention variant '{s}' (valid: {})",
                    Self::choices()
                ))
            })
    }
}

/// Internals recorded during a traced forward pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttentionTrace {
    /// Every softmax-normalized distribution, one vector per normalization.
    pub distributions: Vec<Vec<f64>>,
    /// Every multiplicative gating coefficient.
    pub gates: Vec<f64>,
}

struct Recorder(Option<AttentionTrace>);

impl Recorder {
    fn distribution(&mut self, d: &[f64]) {
        if let Some(t) = &mut self.0 {
            t.distributions.push(d.to_vec());
        }
    }

    fn gates(&mut self, g: &[f64]) {
        if let Some(t) = &mut self.0 {
            t.gates.extend_from_slice(g);
        }
    }
}

fn reduced(channels: usize) -> usize {
    (channels / 2).max(1)
}

/// `x[b, c, ..] * g[b][c]`.
fn scale_channels(x: &Tensor5, g: &[Vec<f64>]) -> Tensor5 {
    let [b, c, ..] = x.shape();
    let n = x.slab_len();
    let mut out = Vec::with_capacity(x.data().len());
    for bi in 0..b {
        for ci in 0..c {
            out.extend(x.slab(bi, ci).iter().map(|v| v * g[bi][ci]));
        }
    }
    debug_assert_eq!(out.len(), b * c * n);
    Tensor5::from_raw(x.shape(), out)
}

/// `x[b, c, n] * m[b, 0, n]`.
fn scale_spatial(x: &Tensor5, m: &Tensor5) -> Tensor5 {
    let [b, c, ..] = x.shape();
    let mut out = Vec::with_capacity(x.data().len());
    for bi in 0..b {
        let map = m.slab(bi, 0);
        for ci in 0..c {
            out.extend(x.slab(bi, ci).iter().zip(map).map(|(v, a)| v * a));
        }
    }
    Tensor5::from_raw(x.shape(), out)
}

fn check_channels(x: &Tensor5, expected: usize, what: &str) -> Result<()> {
    if x.channels() != expected {
        return Err(Error::Shape(format!(
            "{what} attention built for {expected} channels, input has {}",
            x.channels()
        )));
    }
    Ok(())
}

/// Squeeze-and-excitation channel gating.
#[derive(Debug, Clone, PartialEq)]
pub struct SeParams {
    pub fc1: Linear,
    pub fc2: Linear,
}

impl SeParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        Ok(Self {
            fc1: init.linear(reduced(c), c)?,
            fc2: init.linear(c, reduced(c))?,
        })
    }

    fn forward(&self, x: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.fc1.in_features, "se")?;
        let mut gates = Vec::with_capacity(x.batch());
        for b in 0..x.batch() {
            let h: Vec<f64> = self.fc1.forward(&global_avg_pool(x, b))?.into_iter().map(|v| v.max(0.0)).collect();
            let g: Vec<f64> = self.fc2.forward(&h)?.into_iter().map(sigmoid_scalar).collect();
            rec.gates(&g);
            gates.push(g);
        }
        Ok(scale_channels(x, &gates))
    }
}

/// Selective kernel: two receptive fields mixed by a per-channel softmax.
#[derive(Debug, Clone, PartialEq)]
pub struct SkParams {
    pub branch_a: Conv3d,
    /// Dilation 2, a 5x5x5 receptive field.
    pub branch_b: Conv3d,
    pub fc: Linear,
    pub head_a: Linear,
    pub head_b: Linear,
}

impl SkParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        Ok(Self {
            branch_a: init.conv(c, c, 3)?,
            branch_b: init.conv(c, c, 3)?.with_dilation(2),
            fc: init.linear(reduced(c), c)?,
            head_a: init.linear(c, reduced(c))?,
            head_b: init.linear(c, reduced(c))?,
        })
    }

    fn forward(&self, x: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.branch_a.in_channels, "sk")?;
        let ua = conv_norm_relu(x, &self.branch_a)?;
        let ub = conv_norm_relu(x, &self.branch_b)?;
        let fused = ua.add(&ub)?;
        let (mut wa, mut wb) = (Vec::new(), Vec::new());
        for b in 0..x.batch() {
            let z: Vec<f64> = self.fc.forward(&global_avg_pool(&fused, b))?.into_iter().map(|v| v.max(0.0)).collect();
            let la = self.head_a.forward(&z)?;
            let lb = self.head_b.forward(&z)?;
            let (mut ga, mut gb) = (Vec::new(), Vec::new());
            for (a, bb) in la.into_iter().zip(lb) {
                let mut w = [a, bb];
                softmax_in_place(&mut w);
                rec.distribution(&w);
                ga.push(w[0]);
                gb.push(w[1]);
            }
            wa.push(ga);
            wb.push(gb);
        }
        scale_channels(&ua, &wa).add(&scale_channels(&ub, &wb))
    }
}

/// Channel gate from avg/max pooled descriptors, then a spatial gate.
#[derive(Debug, Clone, PartialEq)]
pub struct CbamParams {
    pub fc1: Linear,
    pub fc2: Linear,
    /// `2 -> 1`, 7x7x7.
    pub spatial: Conv3d,
}

impl CbamParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        Ok(Self {
            fc1: init.linear(reduced(c), c)?,
            fc2: init.linear(c, reduced(c))?,
            spatial: init.conv(1, 2, 7)?,
        })
    }

    fn mlp(&self, v: &[f64]) -> Result<Vec<f64>> {
        let h: Vec<f64> = self.fc1.forward(v)?.into_iter().map(|v| v.max(0.0)).collect();
        self.fc2.forward(&h)
    }

    fn forward(&self, x: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.fc1.in_features, "cbam")?;
        let mut gates = Vec::with_capacity(x.batch());
        for b in 0..x.batch() {
            let a = self.mlp(&global_avg_pool(x, b))?;
            let m = self.mlp(&global_max_pool(x, b))?;
            let g: Vec<f64> = a.iter().zip(&m).map(|(p, q)| sigmoid_scalar(p + q)).collect();
            rec.gates(&g);
            gates.push(g);
        }
        let x1 = scale_channels(x, &gates);

        let [b, c, d, h, w] = x1.shape();
        let n = x1.slab_len();
        let mut pooled = Vec::with_capacity(b * 2 * n);
        for bi in 0..b {
            let mut mean = vec![0.0; n];
            let mut max = vec![f64::NEG_INFINITY; n];
            for ci in 0..c {
                for (i, &v) in x1.slab(bi, ci).iter().enumerate() {
                    mean[i] += v;
                    max[i] = max[i].max(v);
                }
            }
            pooled.extend(mean.iter().map(|v| v / c as f64));
            pooled.extend(max);
        }
        let pooled = Tensor5::from_raw([b, 2, d, h, w], pooled);
        let map = self.spatial.forward(&pooled)?.map(sigmoid_scalar);
        rec.gates(map.data());
        Ok(scale_spatial(&x1, &map))
    }
}

/// Additive attention gate driven by a coarser gating signal.
#[derive(Debug, Clone, PartialEq)]
pub struct GateParams {
    pub theta_x: Conv3d,
    pub phi_g: Conv3d,
    pub psi: Conv3d,
}

impl GateParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        Ok(Self {
            theta_x: init.conv(reduced(c), c, 1)?,
            phi_g: init.conv(reduced(c), c, 1)?,
            psi: init.conv(1, reduced(c), 1)?,
        })
    }

    fn forward(&self, x: &Tensor5, g: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.theta_x.in_channels, "gate")?;
        if g.batch() != x.batch() {
            return Err(Error::Shape(format!(
                "gating batch {} differs from input batch {}",
                g.batch(),
                x.batch()
            )));
        }
        let g = if g.spatial() != x.spatial() {
            resize_trilinear(g, x.spatial())?
        } else {
            g.clone()
        };
        let q = self.theta_x.forward(x)?.add(&self.phi_g.forward(&g)?)?.map(|v| v.max(0.0));
        let alpha = self.psi.forward(&q)?.map(sigmoid_scalar);
        rec.gates(alpha.data());
        Ok(scale_spatial(x, &alpha))
    }
}

fn layer_norm(v: &mut [f64]) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let inv = 1.0 / (var + super::ops::INSTANCE_NORM_EPS).sqrt();
    v.iter_mut().for_each(|x| *x = (*x - mean) * inv);
}

/// Polarized self-attention, channel branch then spatial branch.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarParams {
    pub ch_query: Conv3d,
    pub ch_value: Conv3d,
    pub ch_up: Linear,
    pub sp_query: Conv3d,
    pub sp_value: Conv3d,
}

impl PolarParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        let r = reduced(c);
        Ok(Self {
            ch_query: init.conv(1, c, 1)?,
            ch_value: init.conv(r, c, 1)?,
            ch_up: init.linear(c, r)?,
            sp_query: init.conv(r, c, 1)?,
            sp_value: init.conv(r, c, 1)?,
        })
    }

    fn forward(&self, x: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.ch_query.in_channels, "polar")?;
        let b = x.batch();

        let q = self.ch_query.forward(x)?;
        let v = self.ch_value.forward(x)?;
        let mut gates = Vec::with_capacity(b);
        for bi in 0..b {
            let mut weights = q.slab(bi, 0).to_vec();
            softmax_in_place(&mut weights);
            rec.distribution(&weights);
            let ctx: Vec<f64> = (0..v.channels())
                .map(|c| v.slab(bi, c).iter().zip(&weights).map(|(a, w)| a * w).sum())
                .collect();
            let mut z = self.ch_up.forward(&ctx)?;
            layer_norm(&mut z);
            let g: Vec<f64> = z.into_iter().map(sigmoid_scalar).collect();
            rec.gates(&g);
            gates.push(g);
        }
        let x1 = scale_channels(x, &gates);

        let q2 = self.sp_query.forward(&x1)?;
        let v2 = self.sp_value.forward(&x1)?;
        let [_, _, d, h, w] = x1.shape();
        let n = x1.slab_len();
        let mut map = Vec::with_capacity(b * n);
        for bi in 0..b {
            let mut weights = global_avg_pool(&q2, bi);
            softmax_in_place(&mut weights);
            rec.distribution(&weights);
            let mut acc = vec![0.0; n];
            for (c, &wc) in weights.iter().enumerate() {
                for (a, &vv) in acc.iter_mut().zip(v2.slab(bi, c)) {
                    *a += wc * vv;
                }
            }
            map.extend(acc.into_iter().map(sigmoid_scalar));
        }
        let map = Tensor5::from_raw([b, 1, d, h, w], map);
        rec.gates(map.data());
        Ok(scale_spatial(&x1, &map))
    }
}

/// Dual attention: position affinities over voxels plus channel affinities,
/// each added back to the input, then summed.
#[derive(Debug, Clone, PartialEq)]
pub struct DanetParams {
    pub query: Conv3d,
    pub key: Conv3d,
    pub value: Conv3d,
    pub gamma_position: f64,
    pub gamma_channel: f64,
}

impl DanetParams {
    fn init(init: &mut Initializer, c: usize) -> Result<Self> {
        let k = (c / 8).max(1);
        Ok(Self {
            query: init.conv(k, c, 1)?,
            key: init.conv(k, c, 1)?,
            value: init.conv(c, c, 1)?,
            gamma_position: 1.0,
            gamma_channel: 1.0,
        })
    }

    fn forward(&self, x: &Tensor5, rec: &mut Recorder) -> Result<Tensor5> {
        check_channels(x, self.value.in_channels, "danet")?;
        let [b, c, ..] = x.shape();
        let n = x.slab_len();
        let q = self.query.forward(x)?;
        let k = self.key.forward(x)?;
        let v = self.value.forward(x)?;
        let ck = q.channels();
        let mut out = Vec::with_capacity(x.data().len());
        for bi in 0..b {
            // position branch
            let mut pos = vec![0.0; c * n];
            let mut row = vec![0.0; n];
            for i in 0..n {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = (0..ck).map(|cc| q.slab(bi, cc)[i] * k.slab(bi, cc)[j]).sum();
                }
                softmax_in_place(&mut row);
                rec.distribution(&row);
                for cc in 0..c {
                    let vs = v.slab(bi, cc);
                    pos[cc * n + i] = vs.iter().zip(&row).map(|(a, w)| a * w).sum();
                }
            }

            // channel branch
            let mut chan = vec![0.0; c * n];
            for c1 in 0..c {
                let x1 = x.slab(bi, c1);
                let mut energy: Vec<f64> = (0..c)
                    .map(|c2| x1.iter().zip(x.slab(bi, c2)).map(|(a, bb)| a * bb).sum())
                    .collect();
                let m = energy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                energy.iter_mut().for_each(|e| *e = m - *e);
                softmax_in_place(&mut energy);
                rec.distribution(&energy);
                let dst = &mut chan[c1 * n..(c1 + 1) * n];
                for (c2, &a) in energy.iter().enumerate() {
                    for (o, &xv) in dst.iter_mut().zip(x.slab(bi, c2)) {
                        *o += a * xv;
                    }
                }
            }

            for cc in 0..c {
                let xs = x.slab(bi, cc);
                for i in 0..n {
                    let p = self.gamma_position * pos[cc * n + i] + xs[i];
                    let ch = self.gamma_channel * chan[cc * n + i] + xs[i];
                    out.push(p + ch);
                }
            }
        }
        Ok(Tensor5::from_raw(x.shape(), out))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attention {
    Se(SeParams),
    Sk(SkParams),
    Cbam(CbamParams),
    Gate(GateParams),
    Polar(PolarParams),
    Danet(DanetParams),
}

impl Attention {
    /// Seeded parameters for `kind` at `channels` width; `None` for
    /// [`AttentionKind::None`].
    pub fn init(kind: AttentionKind, channels: usize, init: &mut Initializer) -> Result<Option<Self>> {
        if channels == 0 {
            return Err(Error::InvalidParameter("attention needs at least one channel".into()));
        }
        Ok(Some(match kind {
            AttentionKind::None => return Ok(None),
            AttentionKind::Se => Attention::Se(SeParams::init(init, channels)?),
            AttentionKind::Sk => Attention::Sk(SkParams::init(init, channels)?),
            AttentionKind::Cbam => Attention::Cbam(CbamParams::init(init, channels)?),
            AttentionKind::Gate => Attention::Gate(GateParams::init(init, channels)?),
            AttentionKind::Polar => Attention::Polar(PolarParams::init(init, channels)?),
            AttentionKind::Danet => Attention::Danet(DanetParams::init(init, channels)?),
        }))
    }

    pub fn kind(&self) -> AttentionKind {
        match self {
            Attention::Se(_) => AttentionKind::Se,
            Attention::Sk(_) => AttentionKind::Sk,
            Attention::Cbam(_) => AttentionKind::Cbam,
            Attention::Gate(_) => AttentionKind::Gate,
            Attention::Polar(_) => AttentionKind::Polar,
            Attention::Danet(_) => AttentionKind::Danet,
        }
    }

    fn run(&self, x: &Tensor5, gating: Option<&Tensor5>, rec: &mut Recorder) -> Result<Tensor5> {
        match self {
            Attention::Se(p) => p.forward(x, rec),
            Attention::Sk(p) => p.forward(x, rec),
            Attention::Cbam(p) => p.forward(x, rec),
            Attention::Gate(p) => p.forward(x, gating.unwrap_or(x), rec),
            Attention::Polar(p) => p.forward(x, rec),
            Attention::Danet(p) => p.forward(x, rec),
        }
    }

    /// `gating` is only read by the gate variant and defaults to `x`.
    pub fn forward(&self, x: &Tensor5, gating: Option<&Tensor5>) -> Result<Tensor5> {
        self.run(x, gating, &mut Recorder(None))
    }

    pub fn forward_traced(&self, x: &Tensor5, gating: Option<&Tensor5>) -> Result<(Tensor5, AttentionTrace)> {
        let mut rec = Recorder(Some(AttentionTrace::default()));
        let y = self.run(x, gating, &mut rec)?;
        Ok((y, rec.0.unwrap_or_default()))
    }
}

pub fn attention_forward(x: &Tensor5, attention: &Attention) -> Result<Tensor5> {
    attention.forward(x, None)
}

impl Params for Attention {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        match self {
            Attention::Se(p) => {
                p.fc1.visit(f);
                p.fc2.visit(f);
            }
            Attention::Sk(p) => {
                p.branch_a.visit(f);
                p.branch_b.visit(f);
                p.fc.visit(f);
                p.head_a.visit(f);
                p.head_b.visit(f);
            }
            Attention::Cbam(p) => {
                p.fc1.visit(f);
                p.fc2.visit(f);
                p.spatial.visit(f);
            }
            Attention::Gate(p) => {
                p.theta_x.visit(f);
                p.phi_g.visit(f);
                p.psi.visit(f);
            }
            Attention::Polar(p) => {
                p.ch_query.visit(f);
                p.ch_value.visit(f);
                p.ch_up.visit(f);
                p.sp_query.visit(f);
                p.sp_value.visit(f);
            }
            Attention::Danet(p) => {
                p.query.visit(f);
                p.key.visit(f);
                p.value.visit(f);
                f(&[p.gamma_position, p.gamma_channel]);
            }
        }
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        match self {
            Attention::Se(p) => {
                p.fc1.visit_mut(f);
                p.fc2.visit_mut(f);
            }
            Attention::Sk(p) => {
                p.branch_a.visit_mut(f);
                p.branch_b.visit_mut(f);
                p.fc.visit_mut(f);
                p.head_a.visit_mut(f);
                p.head_b.visit_mut(f);
            }
            Attention::Cbam(p) => {
                p.fc1.visit_mut(f);
                p.fc2.visit_mut(f);
                p.spatial.visit_mut(f);
            }
            Attention::Gate(p) => {
                p.theta_x.visit_mut(f);
                p.phi_g.visit_mut(f);
                p.psi.visit_mut(f);
            }
            Attention::Polar(p) => {
                p.ch_query.visit_mut(f);
                p.ch_value.visit_mut(f);
                p.ch_up.visit_mut(f);
                p.sp_query.visit_mut(f);
                p.sp_value.visit_mut(f);
            }
            Attention::Danet(p) => {
                p.query.visit_mut(f);
                p.key.visit_mut(f);
                p.value.visit_mut(f);
                let mut g = [p.gamma_position, p.gamma_channel];
                f(&mut g);
                [p.gamma_position, p.gamma_channel] = g;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input(shape: [usize; 5], seed: u64) -> Tensor5 {
        let n: usize = shape.iter().product();
        let data = (0..n)
            .map(|i| ((i as u64 * 2654435761 + seed * 97) % 1000) as f64 / 1000.0)
            .collect();
        Tensor5::new(shape, data).unwrap()
    }

    fn build(kind: AttentionKind, c: usize) -> Attention {
        Attention::init(kind, c, &mut Initializer::new(11)).unwrap().unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in AttentionKind::ALL {
            assert_eq!(k.name().parse::<AttentionKind>().unwrap(), k);
        }
        let err = "transformer".parse::<AttentionKind>().unwrap_err().to_string();
        assert!(err.contains("se, sk, cbam, gate, polar, danet"), "{err}");
    }

    #[test]
    fn se_zero_weights_halve_input() {
        let mut a = build(AttentionKind::Se, 4);
        if let Attention::Se(p) = &mut a {
            p.fc1.weight.fill(0.0);
            p.fc2.weight.fill(0.0);
        }
        let x = input([1, 4, 2, 2, 2], 1);
        let (y, trace) = a.forward_traced(&x, None).unwrap();
        assert!(trace.gates.iter().all(|&g| g == 0.5));
        for (a, b) in y.data().iter().zip(x.data()) {
            assert_eq!(*a, 0.5 * b);
        }
    }

    #[test]
    fn sk_identical_logits_split_evenly() {
        let mut a = build(AttentionKind::Sk, 4);
        if let Attention::Sk(p) = &mut a {
            p.head_b = p.head_a.clone();
        }
        let (_, trace) = a.forward_traced(&input([2, 4, 2, 2, 2], 2), None).unwrap();
        assert_eq!(trace.distributions.len(), 8);
        assert!(trace.distributions.iter().all(|d| d == &[0.5, 0.5]));
    }

    #[test]
    fn danet_rows_are_distributions() {
        let a = build(AttentionKind::Danet, 8);
        let (y, trace) = a.forward_traced(&input([1, 8, 2, 4, 2], 3), None).unwrap();
        assert_eq!(y.shape(), [1, 8, 2, 4, 2]);
        // 16 position rows of length 16, 8 channel rows of length 8
        assert_eq!(trace.distributions.len(), 24);
        for d in &trace.distributions {
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn every_variant_keeps_shape_and_bounds() {
        for kind in AttentionKind::ALL.into_iter().skip(1) {
            let a = build(kind, 6);
            assert_eq!(a.kind(), kind);
            let x = input([2, 6, 2, 2, 4], 5);
            let (y, trace) = a.forward_traced(&x, None).unwrap();
            assert_eq!(y.shape(), x.shape(), "{kind}");
            assert!(y.is_finite());
            assert!(trace.gates.iter().all(|&g| g > 0.0 && g < 1.0), "{kind}");
            assert_eq!(a.forward(&x, None).unwrap(), y);
        }
    }

    #[test]
    fn gate_resamples_coarse_signal() {
        let a = build(AttentionKind::Gate, 4);
        let x = input([1, 4, 4, 4, 4], 1);
        let g = input([1, 4, 2, 2, 2], 9);
        assert_eq!(a.forward(&x, Some(&g)).unwrap().shape(), x.shape());
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let a = build(AttentionKind::Cbam, 4);
        assert!(a.forward(&input([1, 3, 2, 2, 2], 0), None).is_err());
    }

    #[test]
    fn none_has_no_params() {
        assert!(Attention::init(AttentionKind::None, 4, &mut Initializer::new(0)).unwrap().is_none());
    }
}
