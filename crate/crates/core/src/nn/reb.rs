use crate::error::{Error, Result};

use super::init::Initializer;
use super::ops::{instance_norm, relu, Conv3d, Linear};
use super::tensor::Tensor5;

pub const REB_DEPTH: usize = 5;

/// Walks every parameter buffer in a fixed order.
pub trait Params {
    fn visit(&self, f: &mut dyn FnMut(&[f64]));
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64]));

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |p| n += p.len());
        n
    }
}

impl Params for Conv3d {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.weight);
        f(&self.bias);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(&mut self.weight);
        f(&mut self.bias);
    }
}

impl Params for Linear {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(&self.weight);
        f(&self.bias);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(&mut self.weight);
        f(&mut self.bias);
    }
}

impl<T: Params> Params for Vec<T> {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.iter().for_each(|p| p.visit(f));
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.iter_mut().for_each(|p| p.visit_mut(f));
    }
}

impl<T: Params> Params for Option<T> {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        if let Some(p) = self {
            p.visit(f);
        }
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        if let Some(p) = self {
            p.visit_mut(f);
        }
    }
}

/// conv -> instance norm -> relu.
pub fn conv_norm_relu(x: &Tensor5, conv: &Conv3d) -> Result<Tensor5> {
    Ok(relu(&instance_norm(&conv.forward(x)?)))
}

/// Residual encoder block: five 3x3x3 conv + instance-norm stages, shortcut
/// added before the last activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Reb {
    pub convs: Vec<Conv3d>,
    /// 1x1x1 projection, present when input and output widths differ.
    pub shortcut: Option<Conv3d>,
}

impl Reb {
    pub fn init(init: &mut Initializer, in_channels: usize, out_channels: usize) -> Result<Self> {
        let mut convs = Vec::with_capacity(REB_DEPTH);
        for i in 0..REB_DEPTH {
            let cin = if i == 0 { in_channels } else { out_channels };
            convs.push(init.conv(out_channels, cin, 3)?);
        }
        let shortcut = if in_channels != out_channels {
            Some(init.conv(out_channels, in_channels, 1)?)
        } else {
            None
        };
        Ok(Self { convs, shortcut })
    }

    pub fn in_channels(&self) -> usize {
        self.convs[0].in_channels
    }

    pub fn out_channels(&self) -> usize {
        self.convs[REB_DEPTH - 1].out_channels
    }

    pub fn forward(&self, x: &Tensor5) -> Result<Tensor5> {
        if self.convs.len() != REB_DEPTH {
            return Err(Error::Shape(format!(
                "residual block has {} convolutions, expected {REB_DEPTH}",
                self.convs.len()
            )));
        }
        let skip = match &self.shortcut {
            Some(p) => p.forward(x)?,
            None if x.channels() == self.out_channels() => x.clone(),
            None => {
                return Err(Error::Shape(format!(
                    "shortcut needs a projection from {} to {} channels",
                    x.channels(),
                    self.out_channels()
                )))
            }
        };
        let mut h = x.clone();
        for conv in &self.convs[..REB_DEPTH - 1] {
            h = conv_norm_relu(&h, conv)?;
        }
        let last = instance_norm(&self.convs[REB_DEPTH - 1].forward(&h)?);
        Ok(relu(&last.add(&skip)?))
    }
}

impl Params for Reb {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.convs.visit(f);
        self.shortcut.visit(f);
    }
    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.convs.visit_mut(f);
        self.shortcut.visit_mut(f);
    }
}
