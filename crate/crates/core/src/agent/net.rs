//! Fully connected networks with hand-written backpropagation.
//!
//! Weights are stored input-major (`w[i * n_out + j]`) so that a sparse or
//! mostly-zero input row can be skipped wholesale. The first layer accepts a
//! [`NetInput`]: a sparse block followed by a dense block.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::env::EnvRng;
use crate::featurize::SparseVec;

/// `y += a x`.
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product with four independent partial sums, which lets the compiler
/// keep several multiply-adds in flight.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => libm::tanh(z),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed through the activation output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }

    pub fn from_name(s: &str) -> Option<Activation> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            "linear" => Some(Activation::Linear),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    pub act: Activation,
}

/// Network input: `sparse` occupies the first `sparse.dim` slots, `dense`
/// the rest.
#[derive(Debug, Clone, Copy)]
pub struct NetInput<'a> {
    pub sparse: &'a SparseVec,
    pub dense: &'a [f64],
}

impl NetInput<'_> {
    pub fn dim(&self) -> usize {
        self.sparse.dim + self.dense.len()
    }
}

/// Activations recorded by [`DenseNet::forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct Tape {
    outputs: Vec<Vec<f64>>,
}

impl Tape {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("network has layers")
    }
}

/// Activations of a whole batch, `outputs[layer][sample]`.
#[derive(Debug, Clone)]
pub struct BatchTape {
    outputs: Vec<Vec<Vec<f64>>>,
}

impl BatchTape {
    pub fn len(&self) -> usize {
        self.outputs.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn output(&self, sample: usize) -> &[f64] {
        &self.outputs.last().expect("network has layers")[sample]
    }
}

/// Parameter gradients, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl Grads {
    pub fn scale(&mut self, s: f64) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            for x in v {
                *x *= s;
            }
        }
    }

    pub fn clear(&mut self) {
        for v in self.w.iter_mut().chain(self.b.iter_mut()) {
            v.fill(0.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    pub layers: Vec<Layer>,
}

impl DenseNet {
    /// Layers `sizes[0] -> sizes[1] -> ...`, hidden layers with `hidden`,
    /// last with `out`. Weights and biases start uniform in
    /// `±1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], hidden: Activation, out: Activation, rng: &mut EnvRng) -> DenseNet {
        assert!(sizes.len() >= 2, "a network needs at least one layer");
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let (n_in, n_out) = (w[0], w[1]);
                let bound = 1.0 / libm::sqrt(n_in as f64);
                Layer {
                    n_in,
                    n_out,
                    w: (0..n_in * n_out).map(|_| rng.random_range(-bound..bound)).collect(),
                    b: (0..n_out).map(|_| rng.random_range(-bound..bound)).collect(),
                    act: if k + 2 == sizes.len() { out } else { hidden },
                }
            })
            .collect();
        DenseNet { layers }
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().map_or(0, |l| l.n_out)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads {
        Grads {
            w: self.layers.iter().map(|l| vec![0.0; l.w.len()]).collect(),
            b: self.layers.iter().map(|l| vec![0.0; l.b.len()]).collect(),
        }
    }

    pub fn forward(&self, x: NetInput<'_>) -> Tape {
        let mut t = self.forward_batch(&[x]);
        Tape {
            outputs: t.outputs.iter_mut().map(|l| core::mem::take(&mut l[0])).collect(),
        }
    }

    /// Accumulates parameter gradients of `dy · y` into `grads` and returns
    /// the gradient with respect to the dense part of the input.
    pub fn backward(&self, x: NetInput<'_>, tape: &Tape, dy: &[f64], grads: &mut Grads) -> Vec<f64> {
        let bt = BatchTape {
            outputs: tape.outputs.iter().map(|o| vec![o.clone()]).collect(),
        };
        let dys = [dy.to_vec()];
        self.backward_batch(&[x], &bt, &dys, grads).swap_remove(0)
    }

    /// Forward pass over a batch. Hidden layers are evaluated one weight row
    /// at a time across all samples, so each row is loaded once per batch.
    pub fn forward_batch(&self, xs: &[NetInput<'_>]) -> BatchTape {
        for x in xs {
            assert_eq!(x.dim(), self.n_in(), "network input dimension");
        }
        let mut outputs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.iter().enumerate() {
            let mut zs: Vec<Vec<f64>> = xs.iter().map(|_| l.b.clone()).collect();
            let row = |i: usize| &l.w[i * l.n_out..(i + 1) * l.n_out];
            if k == 0 {
                for (x, z) in xs.iter().zip(zs.iter_mut()) {
                    for (i, v) in x.sparse.iter() {
                        axpy(z, v, row(i));
                    }
                    let off = x.sparse.dim;
                    for (i, &v) in x.dense.iter().enumerate() {
                        if v != 0.0 {
                            axpy(z, v, row(off + i));
                        }
                    }
                }
            } else {
                let prev = &outputs[k - 1];
                for i in 0..l.n_in {
                    let r = row(i);
                    for (p, z) in prev.iter().zip(zs.iter_mut()) {
                        if p[i] != 0.0 {
                            axpy(z, p[i], r);
                        }
                    }
                }
            }
            for z in zs.iter_mut() {
                for zj in z.iter_mut() {
                    *zj = l.act.apply(*zj);
                }
            }
            outputs.push(zs);
        }
        BatchTape { outputs }
    }

    /// Batch form of [`DenseNet::backward`]: gradients of `Σ_b dy_b · y_b`.
    /// Contributions to each parameter are added in sample order.
    pub fn backward_batch(&self, xs: &[NetInput<'_>], tape: &BatchTape, dys: &[Vec<f64>], grads: &mut Grads) -> Vec<Vec<f64>> {
        let n = self.layers.len();
        let last = self.layers[n - 1].act;
        let mut deltas: Vec<Vec<f64>> = dys
            .iter()
            .zip(&tape.outputs[n - 1])
            .map(|(dy, y)| dy.iter().zip(y).map(|(&d, &y)| d * last.derivative_from_output(y)).collect())
            .collect();
        for k in (0..n).rev() {
            let l = &self.layers[k];
            for delta in &deltas {
                for (gb, d) in grads.b[k].iter_mut().zip(delta) {
                    *gb += d;
                }
            }
            let gw = &mut grads.w[k];
            if k == 0 {
                for (x, delta) in xs.iter().zip(&deltas) {
                    for (i, v) in x.sparse.iter() {
                        axpy(&mut gw[i * l.n_out..(i + 1) * l.n_out], v, delta);
                    }
                    let off = x.sparse.dim;
                    for (i, &v) in x.dense.iter().enumerate() {
                        if v != 0.0 {
                            axpy(&mut gw[(off + i) * l.n_out..(off + i + 1) * l.n_out], v, delta);
                        }
                    }
                }
                // input gradient for the dense block only
                return xs
                    .iter()
                    .zip(&deltas)
                    .map(|(x, delta)| {
                        let off = x.sparse.dim;
                        (0..x.dense.len())
                            .map(|i| dot(&l.w[(off + i) * l.n_out..(off + i + 1) * l.n_out], delta))
                            .collect()
                    })
                    .collect();
            }
            let prev = &tape.outputs[k - 1];
            let prev_act = self.layers[k - 1].act;
            let mut next: Vec<Vec<f64>> = prev.iter().map(|_| vec![0.0; l.n_in]).collect();
            for i in 0..l.n_in {
                let r = &l.w[i * l.n_out..(i + 1) * l.n_out];
                let g = &mut gw[i * l.n_out..(i + 1) * l.n_out];
                for ((p, delta), nd) in prev.iter().zip(&deltas).zip(next.iter_mut()) {
                    if p[i] != 0.0 {
                        axpy(g, p[i], delta);
                    }
                    nd[i] = dot(r, delta) * prev_act.derivative_from_output(p[i]);
                }
            }
            deltas = next;
        }
        unreachable!("loop returns at the first layer")
    }

    /// `θ' ← τ θ + (1 − τ) θ'` for `self` as the target.
    pub fn polyak_from(&mut self, live: &DenseNet, tau: f64) {
        for (t, l) in self.layers.iter_mut().zip(&live.layers) {
            for (a, b) in t.w.iter_mut().zip(&l.w) {
                *a = tau * b + (1.0 - tau) * *a;
            }
            for (a, b) in t.b.iter_mut().zip(&l.b) {
                *a = tau * b + (1.0 - tau) * *a;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().chain(&l.b).all(|x| x.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn single(w: f64, b: f64, act: Activation) -> DenseNet {
        DenseNet {
            layers: vec![Layer {
                n_in: 1,
                n_out: 1,
                w: vec![w],
                b: vec![b],
                act,
            }],
        }
    }

    #[test]
    fn one_by_one_relu() {
        let net = single(2.0, 1.0, Activation::Relu);
        let empty = SparseVec::default();
        let x = NetInput {
            sparse: &empty,
            dense: &[3.0],
        };
        let tape = net.forward(x);
        assert_eq!(tape.output(), &[7.0]);
        let mut g = net.zero_grads();
        let dx = net.backward(x, &tape, &[1.0], &mut g);
        assert_eq!(dx, vec![2.0]);
        assert_eq!(g.w[0], vec![3.0]);
        assert_eq!(g.b[0], vec![1.0]);
    }

    #[test]
    fn zero_network_is_zero() {
        let mut rng = EnvRng::seed_from_u64(0);
        let mut net = DenseNet::new(&[4, 3, 1], Activation::Relu, Activation::Linear, &mut rng);
        for l in &mut net.layers {
            l.w.fill(0.0);
            l.b.fill(0.0);
        }
        let s = SparseVec::from_dense(&[1.0, 0.0]);
        let y = net.forward(NetInput {
            sparse: &s,
            dense: &[0.5, -2.0],
        });
        assert_eq!(y.output(), &[0.0]);
    }

    #[test]
    fn sparse_and_dense_inputs_agree() {
        let mut rng = EnvRng::seed_from_u64(3);
        let net = DenseNet::new(&[5, 4, 2], Activation::Relu, Activation::Tanh, &mut rng);
        let x = [0.0, 1.0, 0.0, -0.5, 2.0];
        let s = SparseVec::from_dense(&x[..3]);
        let a = net.forward(NetInput {
            sparse: &s,
            dense: &x[3..],
        });
        let empty = SparseVec::default();
        let b = net.forward(NetInput {
            sparse: &empty,
            dense: &x,
        });
        assert_eq!(a.output(), b.output());
    }
}
