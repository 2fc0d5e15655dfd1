//! A LeNet-style convolutional classifier.

use crate::axes::Shape;
use crate::error::Result;
use crate::ops::{add, contract, merge, rename, softmax, unary, UnaryFn};
use crate::rng::SplitMix64;
use crate::tensor::NamedTensor;

use super::blocks::{conv2d, maxpool2d};

/// Axis sizes. Each convolution stage is a `kernel × kernel` valid
/// convolution followed by `pool × pool` max pooling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeNetConfig {
    pub batch: usize,
    pub side: usize,
    pub chans: [usize; 3],
    pub kernel: usize,
    pub pool: usize,
    pub hidden: usize,
    pub classes: usize,
}

impl Default for LeNetConfig {
    fn default() -> Self {
        LeNetConfig {
            batch: 2,
            side: 14,
            chans: [1, 2, 3],
            kernel: 3,
            pool: 2,
            hidden: 8,
            classes: 4,
        }
    }
}

impl LeNetConfig {
    /// Side length after both convolution stages.
    pub fn final_side(&self) -> usize {
        let stage = |s: usize| (s + 1 - self.kernel) / self.pool;
        stage(stage(self.side))
    }
}

/// `conv` weights are over `{chans', chans, kh, kw}` and biases over
/// `{chans'}`. `w3` keeps the unflattened `{hidden, height, width, chans}`
/// form.
#[derive(Clone, Debug)]
pub struct LeNetParams {
    pub conv: [(NamedTensor, NamedTensor); 2],
    pub w3: NamedTensor,
    pub b3: NamedTensor,
    pub w4: NamedTensor,
    pub b4: NamedTensor,
}

impl LeNetParams {
    pub fn random(c: &LeNetConfig, rng: &mut SplitMix64) -> Result<Self> {
        let mut draw = |axes: &[(&str, usize)]| -> Result<NamedTensor> {
            Ok(rng.tensor(Shape::new(axes.iter().copied())?, -1.0, 1.0))
        };
        let k = c.kernel;
        let side = c.final_side();
        let conv1 = (
            draw(&[("chans'", c.chans[1]), ("chans", c.chans[0]), ("kh", k), ("kw", k)])?,
            draw(&[("chans'", c.chans[1])])?,
        );
        let conv2 = (
            draw(&[("chans'", c.chans[2]), ("chans", c.chans[1]), ("kh", k), ("kw", k)])?,
            draw(&[("chans'", c.chans[2])])?,
        );
        Ok(LeNetParams {
            conv: [conv1, conv2],
            w3: draw(&[
                ("hidden", c.hidden),
                ("height", side),
                ("width", side),
                ("chans", c.chans[2]),
            ])?,
            b3: draw(&[("hidden", c.hidden)])?,
            w4: draw(&[("classes", c.classes), ("hidden", c.hidden)])?,
            b4: draw(&[("classes", c.classes)])?,
        })
    }

    /// `w3` with `(height, width, chans)` merged into `layer`.
    pub fn flat_w3(&self) -> Result<NamedTensor> {
        merge(&self.w3, &["height", "width", "chans"], "layer")
    }
}

/// Convolution, relu and max pooling, with the output channels renamed back
/// to `chans`.
fn stage(x: &NamedTensor, conv: &(NamedTensor, NamedTensor), pool: usize) -> Result<NamedTensor> {
    let t = unary(
        &rename(&conv2d(x, &conv.0, &conv.1)?, "chans'", "chans")?,
        UnaryFn::Relu,
    );
    maxpool2d(&t, pool, pool)
}

fn features(x: &NamedTensor, p: &LeNetParams, pool: usize) -> Result<NamedTensor> {
    stage(&stage(x, &p.conv[0], pool)?, &p.conv[1], pool)
}

fn classify(x3: NamedTensor, p: &LeNetParams) -> Result<NamedTensor> {
    let x3 = unary(&add(&x3, &p.b3)?, UnaryFn::Relu);
    softmax(&add(&contract(&p.w4, &x3, &["hidden"])?, &p.b4)?, &["classes"])
}

/// Class distributions over `{batch, classes}`, flattening the final feature
/// maps into a `layer` axis.
pub fn lenet(x: &NamedTensor, p: &LeNetParams, pool: usize) -> Result<NamedTensor> {
    let x2 = merge(&features(x, p, pool)?, &["height", "width", "chans"], "layer")?;
    classify(contract(&p.flat_w3()?, &x2, &["layer"])?, p)
}

/// The same network contracting over `{height, width, chans}` directly.
pub fn lenet_unflattened(x: &NamedTensor, p: &LeNetParams, pool: usize) -> Result<NamedTensor> {
    let x2 = features(x, p, pool)?;
    classify(contract(&p.w3, &x2, &["height", "width", "chans"])?, p)
}
