//! Dense tanh network with a hand-written backward pass.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs x inputs`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in self.weights.chunks_exact(self.inputs).zip(&self.bias).enumerate() {
            out[o] = b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
    }
}

/// Hidden layers use tanh; the output layer is linear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
}

impl Mlp {
    /// Layer widths `sizes[0] -> sizes[1] -> ...`, weights drawn from
    /// N(0, 1/fan_in) and biases zero.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        let layers = sizes
            .windows(2)
            .map(|w| {
                let mut layer = Dense::zeros(w[0], w[1]);
                let normal = Normal::new(0.0, (1.0 / w[0] as f64).sqrt()).expect("positive fan-in");
                layer.weights.iter_mut().for_each(|v| *v = normal.sample(rng));
                layer
            })
            .collect();
        Mlp { layers }
    }

    /// A network of the same shape with every parameter zero.
    pub fn zeros_like(&self) -> Self {
        Mlp {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.inputs)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.outputs)
    }

    pub fn shapes(&self) -> Vec<[usize; 2]> {
        self.layers.iter().map(|l| [l.outputs, l.inputs]).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|v| v.is_finite())
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &Mlp, scale: f64) {
        for (a, b) in self.params_mut().zip(other.params()) {
            *a += scale * b;
        }
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_dim() {
            return Err(Error::Dimension {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        self.forward_into(input, &mut acts);
        Ok(acts.pop().expect("at least one layer"))
    }

    /// Fills `acts` with the output of every layer (post-activation).
    fn forward_into(&self, input: &[f64], acts: &mut Vec<Vec<f64>>) {
        acts.clear();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = vec![0.0; layer.outputs];
            layer.apply(acts.last().map_or(input, |v| v.as_slice()), &mut out);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            acts.push(out);
        }
    }

    /// Loss of one sample and the gradient of that loss, accumulated into `grad`.
    pub fn backward_into(&self, input: &[f64], target: &[f64], mask: &[bool], grad: &mut Mlp) -> Result<f64> {
        self.check_input(input)?;
        let mut acts = Vec::with_capacity(self.layers.len());
        self.forward_into(input, &mut acts);
        let pred = acts.last().expect("at least one layer");
        let (loss, mut delta) = masked_l1_with_grad(pred, target, mask)?;

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let x: &[f64] = if l == 0 { input } else { &acts[l - 1] };
            let g = &mut grad.layers[l];
            for (o, d) in delta.iter().enumerate() {
                if *d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                row.iter_mut().zip(x).for_each(|(gw, xv)| *gw += d * xv);
            }
            if l > 0 {
                let mut prev = vec![0.0; layer.inputs];
                for (row, d) in layer.weights.chunks_exact(layer.inputs).zip(&delta) {
                    if *d != 0.0 {
                        prev.iter_mut().zip(row).for_each(|(p, w)| *p += w * d);
                    }
                }
                prev.iter_mut().zip(x).for_each(|(p, a)| *p *= 1.0 - a * a);
                delta = prev;
            }
        }
        Ok(loss)
    }

    /// Loss and gradient of a single sample.
    pub fn backward(&self, input: &[f64], target: &[f64], mask: &[bool]) -> Result<(f64, Mlp)> {
        let mut grad = self.zeros_like();
        let loss = self.backward_into(input, target, mask, &mut grad)?;
        Ok((loss, grad))
    }
}

/// Mean absolute error over the chunk rows whose mask entry is true.
/// `pred` and `target` are `mask.len()` rows of equal width, flattened.
pub fn loss_masked_l1(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<f64> {
    let width = row_width(pred, target, mask)?;
    let valid = mask.iter().filter(|m| **m).count();
    if valid == 0 {
        return Err(Error::EmptyMask);
    }
    let total: f64 = pred
        .chunks_exact(width)
        .zip(target.chunks_exact(width))
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|((p, t), _)| p.iter().zip(t).map(|(a, b)| (a - b).abs()).sum::<f64>())
        .sum();
    Ok(total / (valid * width) as f64)
}

fn row_width(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<usize> {
    if pred.len() != target.len() {
        return Err(Error::Dimension {
            expected: pred.len(),
            got: target.len(),
        });
    }
    if mask.is_empty() || pred.len() % mask.len() != 0 {
        return Err(Error::Dimension {
            expected: mask.len(),
            got: pred.len(),
        });
    }
    Ok(pred.len() / mask.len())
}

fn masked_l1_with_grad(pred: &[f64], target: &[f64], mask: &[bool]) -> Result<(f64, Vec<f64>)> {
    let loss = loss_masked_l1(pred, target, mask)?;
    let width = pred.len() / mask.len();
    let valid = mask.iter().filter(|m| **m).count();
    let scale = 1.0 / (valid * width) as f64;
    let mut grad = vec![0.0; pred.len()];
    for (i, ((g, p), t)) in grad.iter_mut().zip(pred).zip(target).enumerate() {
        if mask[i / width] {
            let r = p - t;
            // sign(0) = 0: no push at exact ties.
            *g = if r > 0.0 {
                scale
            } else if r < 0.0 {
                -scale
            } else {
                0.0
            };
        }
    }
    Ok((loss, grad))
}
