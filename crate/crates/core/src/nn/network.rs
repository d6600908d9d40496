use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Result, TarlError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    /// Rectified linear units between layers, identity at the output.
    #[default]
    Relu,
}

/// One affine layer: `y = W x + b` with `W` shaped `[out × in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer<T> {
    pub weights: Matrix<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    pub fn new(weights: Matrix<T>, bias: Vec<T>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(TarlError::shape(format!(
                "bias of length {} for a layer with {} outputs",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Layer { weights, bias })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

/// Parameters of a feed-forward Q-network. The same type holds the online
/// and the target network.
///
/// JSON snapshots are the serde form of this struct: an object with a
/// `layers` array (each `{weights: {rows, cols, data}, bias}`, row-major)
/// and the `activation` tag. [`NetworkParams::to_flat`] gives the
/// layer-ordered flat vector (weights row-major, then bias, per layer).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams<T> {
    layers: Vec<Layer<T>>,
    #[serde(default)]
    activation: Activation,
}

/// Activations kept from a forward pass for the backward pass.
struct Trace<T> {
    /// `inputs[l]` is the input of layer `l`; the last entry is the output.
    inputs: Vec<Matrix<T>>,
}

impl<T: Scalar> NetworkParams<T> {
    pub fn new(layers: Vec<Layer<T>>) -> Result<Self> {
        let net = NetworkParams { layers, activation: Activation::Relu };
        net.validate()?;
        Ok(net)
    }

    fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(TarlError::shape("network needs at least one layer"));
        }
        for (i, l) in self.layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(TarlError::shape(format!("layer {i}: bias length {} != {}", l.bias.len(), l.out_dim())));
            }
            if l.weights.as_slice().len() != l.out_dim() * l.in_dim() {
                return Err(TarlError::shape(format!("layer {i}: weight data does not match its shape")));
            }
        }
        for (i, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(TarlError::shape(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        if self.params().any(|v| !v.is_finite()) {
            return Err(TarlError::arg("network parameters must be finite"));
        }
        Ok(())
    }

    /// He-uniform weights (bound `sqrt(6 / fan_in)`) and zero biases.
    /// `sizes` lists `[in, hidden.., out]`.
    pub fn init_he<R: Rng + ?Sized>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        if sizes.len() < 2 || sizes.iter().any(|&s| s == 0) {
            return Err(TarlError::shape(format!("invalid layer sizes {sizes:?}")));
        }
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / fan_in as f64).sqrt();
                let data = (0..fan_in * fan_out).map(|_| T::lit(rng.gen_range(-bound..bound))).collect();
                Layer { weights: Matrix::from_vec(fan_out, fan_in, data).expect("sized"), bias: vec![T::zero(); fan_out] }
            })
            .collect();
        Self::new(layers)
    }

    /// Same shapes, every parameter zero.
    pub fn zeros_like(&self) -> Self {
        let layers = self
            .layers
            .iter()
            .map(|l| Layer { weights: Matrix::zeros(l.out_dim(), l.in_dim()), bias: vec![T::zero(); l.out_dim()] })
            .collect();
        NetworkParams { layers, activation: self.activation }
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// `[in, hidden.., out]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.in_dim()).chain(self.layers.iter().map(Layer::out_dim)).collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.out_dim() * (l.in_dim() + 1)).sum()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.layer_sizes() == other.layer_sizes()
    }

    /// All parameters in layer order: weights row-major, then bias.
    pub fn params(&self) -> impl Iterator<Item = &T> + '_ {
        self.layers.iter().flat_map(|l| l.weights.as_slice().iter().chain(l.bias.iter()))
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> + '_ {
        self.layers.iter_mut().flat_map(|l| l.weights.as_mut_slice().iter_mut().chain(l.bias.iter_mut()))
    }

    /// Parameter storage as contiguous slices, in `params()` order.
    pub(crate) fn slices_mut(&mut self) -> impl Iterator<Item = &mut [T]> + '_ {
        self.layers.iter_mut().flat_map(|l| [l.weights.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub(crate) fn slices(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.layers.iter().flat_map(|l| [l.weights.as_slice(), l.bias.as_slice()])
    }

    pub fn to_flat(&self) -> Vec<T> {
        self.params().copied().collect()
    }

    /// Rebuilds a network of the given `[in, hidden.., out]` sizes from a flat vector.
    pub fn from_flat(sizes: &[usize], flat: &[T]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(TarlError::shape("need at least input and output size"));
        }
        let mut offset = 0;
        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for w in sizes.windows(2) {
            let (n_in, n_out) = (w[0], w[1]);
            let end = offset + n_in * n_out + n_out;
            if end > flat.len() {
                return Err(TarlError::shape(format!("flat vector too short: {} < {end}", flat.len())));
            }
            let weights = Matrix::from_vec(n_out, n_in, flat[offset..offset + n_in * n_out].to_vec())?;
            let bias = flat[offset + n_in * n_out..end].to_vec();
            layers.push(Layer { weights, bias });
            offset = end;
        }
        if offset != flat.len() {
            return Err(TarlError::shape(format!("flat vector has {} values, expected {offset}", flat.len())));
        }
        Self::new(layers)
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let net: Self = serde_json::from_str(s).map_err(|e| TarlError::arg(format!("bad network snapshot: {e}")))?;
        net.validate()?;
        Ok(net)
    }

    /// Q-values for every row of `batch`, shaped `[rows × n_actions]`.
    pub fn forward(&self, batch: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_input(batch)?;
        let mut x = batch.clone();
        for (l, layer) in self.layers.iter().enumerate() {
            x = affine(layer, &x);
            if l + 1 < self.layers.len() {
                relu_in_place(&mut x);
            }
        }
        Ok(x)
    }

    fn forward_trace(&self, batch: &Matrix<T>) -> Trace<T> {
        let mut inputs = Vec::with_capacity(self.layers.len() + 1);
        inputs.push(batch.clone());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut y = affine(layer, &inputs[l]);
            if l + 1 < self.layers.len() {
                relu_in_place(&mut y);
            }
            inputs.push(y);
        }
        Trace { inputs }
    }

    fn check_input(&self, batch: &Matrix<T>) -> Result<()> {
        if batch.cols() != self.in_dim() {
            return Err(TarlError::shape(format!(
                "batch has {} columns, network expects {}",
                batch.cols(),
                self.in_dim()
            )));
        }
        Ok(())
    }

    fn check_targets(&self, batch: &Matrix<T>, actions: &[usize], targets: &[T]) -> Result<()> {
        self.check_input(batch)?;
        if actions.len() != batch.rows() || targets.len() != batch.rows() {
            return Err(TarlError::shape(format!(
                "{} rows, {} actions, {} targets",
                batch.rows(),
                actions.len(),
                targets.len()
            )));
        }
        if let Some(&a) = actions.iter().find(|&&a| a >= self.out_dim()) {
            return Err(TarlError::Index { index: a, limit: self.out_dim() });
        }
        Ok(())
    }

    /// Mean squared error over the taken actions and its exact gradient.
    ///
    /// Only `Q(s_j, a_j)` enters the loss, so the other action heads get zero
    /// gradient.
    pub fn backward_mse(&self, batch: &Matrix<T>, actions: &[usize], targets: &[T]) -> Result<(T, NetworkParams<T>)> {
        self.check_targets(batch, actions, targets)?;
        let m = batch.rows();
        let mut grads = self.zeros_like();
        if m == 0 {
            return Ok((T::zero(), grads));
        }
        let trace = self.forward_trace(batch);
        let q = &trace.inputs[self.layers.len()];
        let scale = T::lit(2.0) / T::lit(m as f64);
        let mut loss = T::zero();
        let mut delta = Matrix::zeros(m, self.out_dim());
        for r in 0..m {
            let diff = q.get(r, actions[r]) - targets[r];
            loss += diff * diff;
            delta.set(r, actions[r], scale * diff);
        }
        loss /= T::lit(m as f64);

        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let input = &trace.inputs[l];
            let (n_out, n_in) = (layer.out_dim(), layer.in_dim());
            let g = &mut grads.layers[l];
            // Accumulate input-major so zero inputs are skipped, then transpose.
            let mut gwt = vec![T::zero(); n_in * n_out];
            for r in 0..m {
                let d = delta.row(r);
                for (b, &dj) in g.bias.iter_mut().zip(d) {
                    *b += dj;
                }
                for (i, &xi) in input.row(r).iter().enumerate() {
                    if xi == T::zero() {
                        continue;
                    }
                    for (gv, &dj) in gwt[i * n_out..(i + 1) * n_out].iter_mut().zip(d) {
                        *gv += xi * dj;
                    }
                }
            }
            let gw = g.weights.as_mut_slice();
            for j in 0..n_out {
                for i in 0..n_in {
                    gw[j * n_in + i] = gwt[i * n_out + j];
                }
            }
            if l == 0 {
                break;
            }
            // Propagate through W, then through the relu that produced `input`.
            let w = layer.weights.as_slice();
            let mut prev = Matrix::zeros(m, n_in);
            for r in 0..m {
                let d = delta.row(r);
                let out = prev.row_mut(r);
                for j in 0..n_out {
                    let dj = d[j];
                    if dj == T::zero() {
                        continue;
                    }
                    for (o, &wji) in out.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                        *o += dj * wji;
                    }
                }
                for (o, &a) in out.iter_mut().zip(input.row(r)) {
                    if a <= T::zero() {
                        *o = T::zero();
                    }
                }
            }
            delta = prev;
        }
        Ok((loss, grads))
    }
}

fn affine<T: Scalar>(layer: &Layer<T>, x: &Matrix<T>) -> Matrix<T> {
    let (n_out, n_in) = (layer.out_dim(), layer.in_dim());
    let w = layer.weights.as_slice();
    // Input-major copy of W: each input feature then scales one contiguous
    // row, which vectorizes and lets zero features (one-hot inputs, dead
    // relus) be skipped outright.
    let mut wt = vec![T::zero(); n_in * n_out];
    for j in 0..n_out {
        for i in 0..n_in {
            wt[i * n_out + j] = w[j * n_in + i];
        }
    }
    let mut y = Matrix::zeros(x.rows(), n_out);
    for r in 0..x.rows() {
        let out = y.row_mut(r);
        out.copy_from_slice(&layer.bias);
        for (i, &xi) in x.row(r).iter().enumerate() {
            if xi == T::zero() {
                continue;
            }
            for (o, &wv) in out.iter_mut().zip(&wt[i * n_out..(i + 1) * n_out]) {
                *o += xi * wv;
            }
        }
    }
    y
}

fn relu_in_place<T: Scalar>(x: &mut Matrix<T>) {
    for v in x.as_mut_slice() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Masked mean squared error, forward pass only.
pub fn mse_loss<T: Scalar>(params: &NetworkParams<T>, batch: &Matrix<T>, actions: &[usize], targets: &[T]) -> Result<T> {
    params.check_targets(batch, actions, targets)?;
    if batch.rows() == 0 {
        return Ok(T::zero());
    }
    let q = params.forward(batch)?;
    let sum: T = (0..batch.rows())
        .map(|r| {
            let d = q.get(r, actions[r]) - targets[r];
            d * d
        })
        .sum();
    Ok(sum / T::lit(batch.rows() as f64))
}

/// Largest relative disagreement between the analytic gradient and central
/// differences, `|a - n| / max(1e-12, |a| + |n|)`, over every parameter.
pub fn gradient_check<T: Scalar>(
    params: &NetworkParams<T>,
    batch: &Matrix<T>,
    actions: &[usize],
    targets: &[T],
    fd_step: T,
) -> Result<T> {
    if !(fd_step > T::zero()) {
        return Err(TarlError::arg("finite-difference step must be positive"));
    }
    let (_, grads) = params.backward_mse(batch, actions, targets)?;
    let analytic = grads.to_flat();
    let mut probe = params.clone();
    let floor = T::lit(1e-12);
    let two = T::lit(2.0);
    let mut worst = T::zero();
    for (k, &a) in analytic.iter().enumerate() {
        let orig = *probe.params_mut().nth(k).expect("index in range");
        *probe.params_mut().nth(k).unwrap() = orig + fd_step;
        let up = mse_loss(&probe, batch, actions, targets)?;
        *probe.params_mut().nth(k).unwrap() = orig - fd_step;
        let down = mse_loss(&probe, batch, actions, targets)?;
        *probe.params_mut().nth(k).unwrap() = orig;
        let numeric = (up - down) / (two * fd_step);
        let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(floor);
        if rel > worst {
            worst = rel;
        }
    }
    Ok(worst)
}
