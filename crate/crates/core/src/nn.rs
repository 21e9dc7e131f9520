//! Dense feed-forward solution network with cube-of-positive activation,
//! exact reverse-mode parameter gradients, Adam updates, and the staircase
//! learning-rate schedule.
//!
//! The network is
//!
//! ```text
//! phi(x) = h_L( h_{L-1}( ... h_0(x) ) )
//! h_l(x) = relu3(W_l x + b_l)        l = 0 .. L-1   (hidden layers)
//! h_L(x) = w_out . (x + b_out)                      (scalar output)
//! ```
//!
//! with `W_0` of shape `m x d`, `W_1..W_{L-1}` of shape `m x m`, `w_out` a
//! length-`m` vector and `b_out` a scalar broadcast over the last hidden
//! activation. The output layer is deliberately `w . (x + b)` rather than
//! `w . x + b`; the two parameterizations span the same affine family.
//!
//! Parameters live in one flat vector. Flattening order is layer-major,
//! weights before biases, matrices row-major:
//!
//! ```text
//! [ W_0 row-major | b_0 | W_1 | b_1 | ... | W_{L-1} | b_{L-1} | w_out | b_out ]
//! ```
//!
//! This order is the checkpoint format's payload order, so checkpoints are
//! portable across builds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::scalar::{cast, Scalar};

/// Cube-of-positive activation: `max(x^3, 0)`.
#[inline]
pub fn relu3<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        x * x * x
    } else {
        F::zero()
    }
}

/// Derivative of [`relu3`]: `3 x^2` for `x > 0`, `0` for `x <= 0`.
#[inline]
pub fn relu3_grad<F: Scalar>(x: F) -> F {
    if x > F::zero() {
        cast::<F>(3.0) * x * x
    } else {
        F::zero()
    }
}

/// Fully connected solution network; the trainable surrogate `phi(x; theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionNetwork<F> {
    input_dim: usize,
    width: usize,
    depth: usize,
    params: Vec<F>,
}

impl<F: Scalar> SolutionNetwork<F> {
    /// Network with all parameters zero.
    pub fn zeros(input_dim: usize, width: usize, depth: usize) -> Self {
        assert!(input_dim > 0 && width > 0 && depth > 0);
        let count = Self::count_params(input_dim, width, depth);
        Self { input_dim, width, depth, params: vec![F::zero(); count] }
    }

    /// Seeded initialization: weights uniform in
    /// `[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]`, biases zero.
    pub fn init(input_dim: usize, width: usize, depth: usize, seed: u64) -> Self {
        let mut net = Self::zeros(input_dim, width, depth);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..depth {
            let fan_in = net.layer_in_dim(l);
            let limit = (6.0 / (fan_in + width) as f64).sqrt();
            let (w, _) = net.layer_ranges(l);
            for i in w {
                net.params[i] = cast::<F>(rng.gen_range(-limit..limit));
            }
        }
        let limit = (6.0 / (width + 1) as f64).sqrt();
        let (w, _) = net.output_ranges();
        for i in w {
            net.params[i] = cast::<F>(rng.gen_range(-limit..limit));
        }
        net
    }

    /// Fan-in uniform initialization with matching uniform biases:
    /// weights and biases both `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    ///
    /// The nonzero biases keep a floor under the cubic activation: signal
    /// at each layer never falls below bias scale, and units straddle zero
    /// so their gradients stay alive.
    pub fn init_fan_bias(input_dim: usize, width: usize, depth: usize, seed: u64) -> Self {
        let mut net = Self::zeros(input_dim, width, depth);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..depth {
            let bound = 1.0 / (net.layer_in_dim(l) as f64).sqrt();
            let (w, b) = net.layer_ranges(l);
            for i in w.chain(b) {
                net.params[i] = cast::<F>(rng.gen_range(-bound..bound));
            }
        }
        let bound = 1.0 / (width as f64).sqrt();
        let (w, b_idx) = net.output_ranges();
        for i in w {
            net.params[i] = cast::<F>(rng.gen_range(-bound..bound));
        }
        net.params[b_idx] = cast::<F>(rng.gen_range(-bound..bound));
        net
    }

    pub fn from_params(input_dim: usize, width: usize, depth: usize, params: Vec<F>) -> Result<Self> {
        let expected = Self::count_params(input_dim, width, depth);
        if params.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} parameters for ({input_dim}, {width}, {depth}), got {}",
                params.len()
            )));
        }
        Ok(Self { input_dim, width, depth, params })
    }

    pub fn count_params(input_dim: usize, width: usize, depth: usize) -> usize {
        let mut n = 0;
        for l in 0..depth {
            let fan_in = if l == 0 { input_dim } else { width };
            n += width * fan_in + width;
        }
        n + width + 1
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[F] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [F] {
        &mut self.params
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn layer_in_dim(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.width
        }
    }

    /// `(weight_range, bias_range)` of hidden layer `l` in the flat vector.
    fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let mut off = 0;
        for k in 0..l {
            off += self.width * self.layer_in_dim(k) + self.width;
        }
        let w_len = self.width * self.layer_in_dim(l);
        (off..off + w_len, off + w_len..off + w_len + self.width)
    }

    fn output_ranges(&self) -> (std::ops::Range<usize>, usize) {
        let (_, b) = self.layer_ranges(self.depth - 1);
        let start = b.end;
        (start..start + self.width, start + self.width)
    }

    /// Evaluates `phi(x)`.
    pub fn forward(&self, x: &[F]) -> F {
        assert_eq!(x.len(), self.input_dim, "input length must equal input_dim");
        let m = self.width;
        let mut act = vec![F::zero(); m];
        let mut next = vec![F::zero(); m];
        self.forward_buffers(x, &mut act, &mut next)
    }

    fn forward_buffers(&self, x: &[F], act: &mut [F], next: &mut [F]) -> F {
        let m = self.width;
        for l in 0..self.depth {
            let in_dim = self.layer_in_dim(l);
            let input: &[F] = if l == 0 { x } else { act };
            let (wr, br) = self.layer_ranges(l);
            let w = &self.params[wr];
            let b = &self.params[br];
            for j in 0..m {
                let row = &w[j * in_dim..(j + 1) * in_dim];
                let mut z = b[j];
                for (wk, xk) in row.iter().zip(input.iter()) {
                    z = z + *wk * *xk;
                }
                next[j] = relu3(z);
            }
            act[..m].copy_from_slice(&next[..m]);
        }
        let (wr, b_idx) = self.output_ranges();
        let w = &self.params[wr];
        let b = self.params[b_idx];
        let mut out = F::zero();
        for j in 0..m {
            out = out + w[j] * (act[j] + b);
        }
        out
    }

    /// Evaluates `phi` at every row of `points`.
    pub fn forward_batch(&self, points: &PointSet<F>) -> Vec<F> {
        assert_eq!(points.dim(), self.input_dim);
        let m = self.width;
        let mut act = vec![F::zero(); m];
        let mut next = vec![F::zero(); m];
        points
            .iter()
            .map(|x| self.forward_buffers(x, &mut act, &mut next))
            .collect()
    }

    /// Reusable forward/backward scratch for one evaluation point.
    pub fn new_trace(&self) -> ForwardTrace<F> {
        ForwardTrace {
            input: vec![F::zero(); self.input_dim],
            pre: vec![vec![F::zero(); self.width]; self.depth],
            act: vec![vec![F::zero(); self.width]; self.depth],
            d_act: vec![F::zero(); self.width],
            d_pre: vec![F::zero(); self.width],
        }
    }

    /// Forward pass that records pre-activations for a later backward pass.
    pub fn forward_traced(&self, x: &[F], trace: &mut ForwardTrace<F>) -> F {
        assert_eq!(x.len(), self.input_dim);
        let m = self.width;
        trace.input.copy_from_slice(x);
        for l in 0..self.depth {
            let in_dim = self.layer_in_dim(l);
            let (wr, br) = self.layer_ranges(l);
            let w = &self.params[wr];
            let b = &self.params[br];
            // split borrows: activations of layer l-1 feed layer l
            let (prev_acts, rest) = trace.act.split_at_mut(l);
            let input: &[F] = if l == 0 { &trace.input } else { &prev_acts[l - 1] };
            let pre = &mut trace.pre[l];
            let act = &mut rest[0];
            for j in 0..m {
                let row = &w[j * in_dim..(j + 1) * in_dim];
                let mut z = b[j];
                for (wk, xk) in row.iter().zip(input.iter()) {
                    z = z + *wk * *xk;
                }
                pre[j] = z;
                act[j] = relu3(z);
            }
        }
        let (wr, b_idx) = self.output_ranges();
        let w = &self.params[wr];
        let b = self.params[b_idx];
        let last = &trace.act[self.depth - 1];
        let mut out = F::zero();
        for j in 0..m {
            out = out + w[j] * (last[j] + b);
        }
        out
    }

    /// Accumulates `cotangent * d phi(x)/d theta` into `grad`, where `x` is
    /// the point recorded in `trace` by [`Self::forward_traced`].
    pub fn backward_traced(&self, trace: &mut ForwardTrace<F>, cotangent: F, grad: &mut [F]) {
        assert_eq!(grad.len(), self.params.len());
        if cotangent == F::zero() {
            return;
        }
        let m = self.width;
        let (wr, b_idx) = self.output_ranges();
        let out_w = self.params[wr.clone()].to_vec();
        let out_b = self.params[b_idx];
        let last = &trace.act[self.depth - 1];
        // output layer: y = sum_j w_j (a_j + b)
        let mut w_sum = F::zero();
        {
            let gw = &mut grad[wr];
            for j in 0..m {
                gw[j] += cotangent * (last[j] + out_b);
                w_sum = w_sum + out_w[j];
            }
        }
        grad[b_idx] += cotangent * w_sum;
        for j in 0..m {
            trace.d_act[j] = cotangent * out_w[j];
        }
        for l in (0..self.depth).rev() {
            let in_dim = self.layer_in_dim(l);
            let (wr, br) = self.layer_ranges(l);
            let input: &[F] = if l == 0 { &trace.input } else { &trace.act[l - 1] };
            let pre = &trace.pre[l];
            for j in 0..m {
                trace.d_pre[j] = trace.d_act[j] * relu3_grad(pre[j]);
            }
            {
                let gb = &mut grad[br];
                for j in 0..m {
                    gb[j] += trace.d_pre[j];
                }
            }
            {
                let gw = &mut grad[wr.clone()];
                for j in 0..m {
                    let dz = trace.d_pre[j];
                    if dz == F::zero() {
                        continue;
                    }
                    let row = &mut gw[j * in_dim..(j + 1) * in_dim];
                    for (gk, xk) in row.iter_mut().zip(input.iter()) {
                        *gk += dz * *xk;
                    }
                }
            }
            if l > 0 {
                let w = &self.params[wr];
                for k in 0..in_dim {
                    trace.d_act[k] = F::zero();
                }
                for j in 0..m {
                    let dz = trace.d_pre[j];
                    if dz == F::zero() {
                        continue;
                    }
                    let row = &w[j * in_dim..(j + 1) * in_dim];
                    for k in 0..in_dim {
                        trace.d_act[k] = trace.d_act[k] + row[k] * dz;
                    }
                }
            }
        }
    }

    /// Gradient of `sum_i cotangents[i] * phi(points[i])` with respect to the
    /// flat parameter vector. Summation order is the batch order.
    pub fn grad_of_weighted_sum(&self, points: &PointSet<F>, cotangents: &[F]) -> Result<Vec<F>> {
        if points.len() != cotangents.len() {
            return Err(Error::Dimension(format!(
                "{} points but {} cotangents",
                points.len(),
                cotangents.len()
            )));
        }
        if points.dim() != self.input_dim {
            return Err(Error::Dimension(format!(
                "points have dim {}, network expects {}",
                points.dim(),
                self.input_dim
            )));
        }
        let mut grad = vec![F::zero(); self.params.len()];
        let mut trace = self.new_trace();
        for (i, x) in points.iter().enumerate() {
            self.forward_traced(x, &mut trace);
            self.backward_traced(&mut trace, cotangents[i], &mut grad);
        }
        Ok(grad)
    }
}

/// Scratch buffers for one traced forward/backward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F> {
    input: Vec<F>,
    pre: Vec<Vec<F>>,
    act: Vec<Vec<F>>,
    d_act: Vec<F>,
    d_pre: Vec<F>,
}

/// Adam optimizer state over the flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamState<F> {
    m: Vec<F>,
    v: Vec<F>,
    t: u64,
    beta1: F,
    beta2: F,
    eps: F,
}

impl<F: Scalar> AdamState<F> {
    /// Fresh state with the standard defaults `beta1 = 0.9`, `beta2 = 0.999`,
    /// `eps = 1e-8`.
    pub fn new(param_count: usize) -> Self {
        Self {
            m: vec![F::zero(); param_count],
            v: vec![F::zero(); param_count],
            t: 0,
            beta1: cast(0.9),
            beta2: cast(0.999),
            eps: cast(1e-8),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update of `params` in place.
    ///
    /// Rejects non-finite gradients without touching the state, so a
    /// diverged step leaves the last good parameters intact.
    pub fn step(&mut self, params: &mut [F], grad: &[F], lr: F) -> Result<()> {
        if params.len() != self.m.len() || grad.len() != self.m.len() {
            return Err(Error::Dimension(format!(
                "adam state has {} slots, got {} params and {} gradient entries",
                self.m.len(),
                params.len(),
                grad.len()
            )));
        }
        if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite {
                context: "gradient passed to adam step",
                detail: format!("entry {i} is {:?}", grad[i]),
            });
        }
        self.t += 1;
        let one = F::one();
        let bc1 = one - self.beta1.powi(self.t as i32);
        let bc2 = one - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                context: "parameters after adam step",
                detail: format!("entry {i} is {:?}", params[i]),
            });
        }
        Ok(())
    }
}

/// Staircase learning-rate schedule over `n` total epochs.
///
/// The rate decays from `1e-3` through 1000 equal log-spaced stairs to
/// `1e-6`, which holds for the final `n - ceil(0.999 n)` epochs:
///
/// ```text
/// tau(k) = 10^(-3 - 3j/1000)   for ceil(0.999 n j / 1000) <= k < ceil(0.999 n (j+1) / 1000)
/// tau(k) = 10^-6               for ceil(0.999 n) <= k < n
/// ```
#[derive(Debug, Clone, Copy)]
pub struct LrSchedule {
    total_epochs: usize,
}

impl LrSchedule {
    pub fn new(total_epochs: usize) -> Self {
        assert!(total_epochs >= 1);
        Self { total_epochs }
    }

    pub fn rate(&self, epoch: usize) -> f64 {
        learning_rate(epoch, self.total_epochs)
    }
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Learning rate for epoch `k` of `n`. Stair boundaries are computed in
/// integer arithmetic (`ceil(0.999 n j / 1000) = ceil(999 n j / 10^6)`) so
/// they are exact for any `n`.
pub fn learning_rate(k: usize, n: usize) -> f64 {
    assert!(k < n, "epoch index {k} out of range for {n} total epochs");
    let (k64, n64) = (k as u64, n as u64);
    if k64 >= ceil_div(999 * n64, 1000) {
        return 1e-6;
    }
    let mut j = ((k64 * 1_000_000) / (999 * n64)).min(999);
    while j > 0 && k64 < ceil_div(999 * n64 * j, 1_000_000) {
        j -= 1;
    }
    while j < 999 && k64 >= ceil_div(999 * n64 * (j + 1), 1_000_000) {
        j += 1;
    }
    debug_assert!(ceil_div(999 * n64 * j, 1_000_000) <= k64 && k64 < ceil_div(999 * n64 * (j + 1), 1_000_000));
    if j == 0 {
        1e-3
    } else {
        10f64.powf(-3.0 - 3.0 * j as f64 / 1000.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn tiny_net(seed: u64) -> SolutionNetwork<f64> {
        SolutionNetwork::init(3, 5, 3, seed)
    }

    #[test]
    fn relu3_examples() {
        assert_eq!(relu3(2.0), 8.0);
        assert_eq!(relu3(-1.0), 0.0);
        assert_eq!(relu3(0.0), 0.0);
        assert_eq!(relu3_grad(2.0), 12.0);
        assert_eq!(relu3_grad(0.0), 0.0);
        assert_eq!(relu3_grad(-3.0), 0.0);
    }

    #[test]
    fn zero_network_is_zero() {
        let net = SolutionNetwork::<f64>::zeros(4, 7, 2);
        assert_eq!(net.forward(&[0.3, -0.2, 0.9, 0.1]), 0.0);
    }

    #[test]
    fn hand_evaluated_scalar_chain() {
        // d=1, L=1, m=1, all weights 1, all biases 0: relu3(2) = 8 then
        // identity output layer.
        let net = SolutionNetwork::from_params(1, 1, 1, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(net.forward(&[2.0]), 8.0);
    }

    #[test]
    fn first_layer_column_permutation_symmetry() {
        let net = tiny_net(7);
        let x = [0.4, -0.3, 0.8];
        let xp = [0.8, -0.3, 0.4]; // swap coordinates 0 and 2
        let mut permuted = net.clone();
        {
            let m = permuted.width();
            let (wr, _) = permuted.layer_ranges(0);
            let w = &mut permuted.params_mut()[wr];
            for j in 0..m {
                w.swap(j * 3, j * 3 + 2);
            }
        }
        assert_eq!(net.forward(&x), permuted.forward(&xp));
    }

    #[test]
    fn cubic_homogeneity_single_hidden_layer_zero_bias() {
        // With one hidden layer and all biases zero, scaling the first-layer
        // weights by s > 0 scales the output by s^3.
        let mut net = SolutionNetwork::init(2, 4, 1, 11);
        {
            let (_, br) = net.layer_ranges(0);
            for i in br {
                net.params[i] = 0.0;
            }
            let (_, b_idx) = net.output_ranges();
            net.params[b_idx] = 0.0;
        }
        let mut scaled = net.clone();
        let s = 1.7_f64;
        {
            let (wr, _) = scaled.layer_ranges(0);
            for i in wr {
                scaled.params[i] *= s;
            }
        }
        let x = [0.6, -0.9];
        let base = net.forward(&x);
        assert!((scaled.forward(&x) - s.powi(3) * base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn zero_cotangents_give_zero_gradient() {
        let net = tiny_net(3);
        let pts = PointSet::from_rows(3, &[vec![0.1, 0.2, 0.3], vec![-0.5, 0.4, 0.0]]);
        let g = net.grad_of_weighted_sum(&pts, &[0.0, 0.0]).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gradient_is_linear_in_cotangents() {
        let net = tiny_net(9);
        let pts = PointSet::from_rows(3, &[vec![0.1, 0.2, 0.3], vec![-0.5, 0.4, 0.0]]);
        let c1 = [0.7, -0.2];
        let c2 = [0.1, 0.9];
        let sum: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| a + b).collect();
        let g1 = net.grad_of_weighted_sum(&pts, &c1).unwrap();
        let g2 = net.grad_of_weighted_sum(&pts, &c2).unwrap();
        let gs = net.grad_of_weighted_sum(&pts, &sum).unwrap();
        for i in 0..gs.len() {
            assert!((gs[i] - (g1[i] + g2[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn backprop_matches_central_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let net = tiny_net(17);
        let pts = PointSet::from_rows(
            3,
            &[
                vec![rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)],
            ],
        );
        let c = [1.0];
        let analytic = net.grad_of_weighted_sum(&pts, &c).unwrap();
        let h = 1e-6;
        let mut numeric = vec![0.0; analytic.len()];
        let mut probe = net.clone();
        for i in 0..numeric.len() {
            let orig = probe.params[i];
            probe.params[i] = orig + h;
            let plus = probe.forward(pts.point(0));
            probe.params[i] = orig - h;
            let minus = probe.forward(pts.point(0));
            probe.params[i] = orig;
            numeric[i] = (plus - minus) / (2.0 * h);
        }
        let scale = numeric.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-12);
        for i in 0..numeric.len() {
            assert!(
                (analytic[i] - numeric[i]).abs() / scale < 1e-6,
                "param {i}: analytic {} numeric {}",
                analytic[i],
                numeric[i]
            );
        }
    }

    #[test]
    fn mismatched_cotangent_count_is_an_error() {
        let net = tiny_net(1);
        let pts = PointSet::from_rows(3, &[vec![0.1, 0.2, 0.3]]);
        assert!(net.grad_of_weighted_sum(&pts, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut params = vec![0.5, -0.25, 1.5];
        let mut state = AdamState::new(3);
        state.step(&mut params, &[0.0, 0.0, 0.0], 0.1).unwrap();
        assert_eq!(params, vec![0.5, -0.25, 1.5]);
    }

    #[test]
    fn adam_hand_computed_first_step() {
        // theta=0, g=1, lr=0.1: bias-corrected m_hat = v_hat = 1, so the
        // update is -0.1 / (1 + 1e-8).
        let mut params = vec![0.0_f64];
        let mut state = AdamState::new(1);
        state.step(&mut params, &[1.0], 0.1).unwrap();
        assert!((params[0] - (-0.09999999900000009)).abs() < 1e-15);
        assert!((params[0] + 0.1).abs() < 1e-8);
    }

    #[test]
    fn adam_is_bitwise_deterministic() {
        let run = || {
            let mut params = vec![0.3, -0.7];
            let mut state = AdamState::new(2);
            for k in 0..10 {
                let g = [0.1 * k as f64 - 0.3, (k as f64).sin()];
                state.step(&mut params, &g, 0.05).unwrap();
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn adam_rejects_non_finite_gradient() {
        let mut params = vec![1.0];
        let mut state = AdamState::new(1);
        let err = state.step(&mut params, &[f64::NAN], 0.1);
        assert!(err.is_err());
        assert_eq!(params, vec![1.0]);
        assert_eq!(state.step_count(), 0);
    }

    #[test]
    fn lr_schedule_endpoints_and_midpoint() {
        assert_eq!(learning_rate(0, 20000), 1e-3);
        assert_eq!(learning_rate(19999, 20000), 1e-6);
        // j = 500 stair starts at ceil(0.999 * 20000 / 1000 * 500) = 9990
        assert_eq!(learning_rate(9990, 20000), 3.1622776601683795e-5);
    }

    #[test]
    fn lr_schedule_monotone_with_1001_stairs() {
        let n = 20000;
        let mut prev = f64::INFINITY;
        let mut distinct = std::collections::BTreeSet::new();
        for k in 0..n {
            let r = learning_rate(k, n);
            assert!(r <= prev, "rate increased at epoch {k}");
            assert!((1e-6..=1e-3).contains(&r));
            distinct.insert(r.to_bits());
            prev = r;
        }
        assert_eq!(distinct.len(), 1001);
    }

    #[test]
    fn lr_schedule_covers_small_epoch_counts() {
        for n in [1usize, 2, 3, 17, 999, 1000, 1001, 3000] {
            let mut prev = f64::INFINITY;
            for k in 0..n {
                let r = learning_rate(k, n);
                assert!(r <= prev);
                prev = r;
            }
        }
    }

    #[test]
    fn f32_instantiation_smoke() {
        let net = SolutionNetwork::<f32>::init(2, 4, 2, 5);
        let y = net.forward(&[0.25f32, -0.5]);
        assert!(y.is_finite());
        assert_eq!(relu3(2.0f32), 8.0f32);
    }
}
