use rand::Rng;

use super::LearnerError;

/// One fully connected layer. Weights are stored input-major:
/// `weights[i * outputs + o]` connects input `i` to output `o`, so a zero
/// input skips a whole row.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Dense {
    pub(crate) inputs: usize,
    pub(crate) outputs: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) biases: Vec<f64>,
}

impl Dense {
    fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.biases);
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let row = &self.weights[i * self.outputs..(i + 1) * self.outputs];
            for (o, w) in out.iter_mut().zip(row) {
                *o += xi * w;
            }
        }
    }
}

/// Feed-forward action-value network: affine layers with ReLU between
/// them and an identity output.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    pub(crate) layers: Vec<Dense>,
    pub(crate) use_bias: bool,
}

/// Per-layer activations kept from a forward pass for backpropagation.
/// `values[0]` is the input, `values[l + 1]` the output of layer `l`
/// (post-ReLU for hidden layers).
#[derive(Debug, Clone, Default)]
pub struct Activations {
    values: Vec<Vec<f64>>,
}

impl Activations {
    pub fn output(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Gradient of a scalar loss with respect to every parameter, laid out
/// like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) biases: Vec<Vec<f64>>,
}

impl Gradients {
    /// Flattened in the same order as [`QNetwork::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w);
            out.extend_from_slice(b);
        }
        out
    }
}

impl QNetwork {
    /// All-zero network with the given layer sizes (input first).
    pub fn zeros(layer_dims: &[usize]) -> Result<Self, LearnerError> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return Err(LearnerError::InvalidShape(layer_dims.to_vec()));
        }
        Ok(QNetwork {
            layers: layer_dims
                .windows(2)
                .map(|w| Dense::zeros(w[0], w[1]))
                .collect(),
            use_bias: true,
        })
    }

    /// He-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(layer_dims: &[usize], rng: &mut R) -> Result<Self, LearnerError> {
        let mut net = QNetwork::zeros(layer_dims)?;
        for layer in &mut net.layers {
            let limit = (6.0 / layer.inputs as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    /// Disables (and zeroes) the bias terms. With a one-hot input and no
    /// hidden layers this makes the network a plain lookup table.
    pub fn without_bias(mut self) -> Self {
        self.use_bias = false;
        for l in &mut self.layers {
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        self
    }

    pub fn uses_bias(&self) -> bool {
        self.use_bias
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].inputs];
        dims.extend(self.layers.iter().map(|l| l.outputs));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").outputs
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Every weight and bias, layer by layer, weights before biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_parameters());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), LearnerError> {
        if params.len() != self.num_parameters() {
            return Err(LearnerError::ShapeMismatch {
                expected: self.num_parameters(),
                got: params.len(),
            });
        }
        let mut rest = params;
        for l in &mut self.layers {
            let (w, r) = rest.split_at(l.weights.len());
            l.weights.copy_from_slice(w);
            let (b, r) = r.split_at(l.biases.len());
            l.biases.copy_from_slice(b);
            rest = r;
        }
        Ok(())
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        &self.layers[layer].weights
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.layers[layer].weights
    }

    pub fn biases(&self, layer: usize) -> &[f64] {
        &self.layers[layer].biases
    }

    pub fn biases_mut(&mut self, layer: usize) -> &mut [f64] {
        &mut self.layers[layer].biases
    }

    fn check_input(&self, input: &[f64]) -> Result<(), LearnerError> {
        if input.len() != self.input_dim() {
            return Err(LearnerError::ShapeMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Action values for one input vector.
    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, LearnerError> {
        let mut acts = Activations::default();
        self.forward_cached(input, &mut acts)?;
        Ok(acts.values.pop().unwrap_or_default())
    }

    /// Forward pass that keeps every layer's activations in `acts`.
    pub fn forward_cached(&self, input: &[f64], acts: &mut Activations) -> Result<(), LearnerError> {
        self.check_input(input)?;
        let n = self.layers.len();
        acts.values.resize_with(n + 1, Vec::new);
        acts.values[0].clear();
        acts.values[0].extend_from_slice(input);
        for (l, layer) in self.layers.iter().enumerate() {
            let (done, rest) = acts.values.split_at_mut(l + 1);
            let out = &mut rest[0];
            out.resize(layer.outputs, 0.0);
            layer.forward_into(&done[l], out);
            if l + 1 < n {
                for v in out.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            weights: self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Adds to `grads` the gradient of a loss whose derivative with respect
    /// to the network output is `output_grad`, at the point cached in `acts`.
    pub fn backward(&self, acts: &Activations, output_grad: &[f64], grads: &mut Gradients) {
        let mut delta = output_grad.to_vec();
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let x = &acts.values[l];
            let gw = &mut grads.weights[l];
            for (i, &xi) in x.iter().enumerate() {
                if xi == 0.0 {
                    continue;
                }
                let row = &mut gw[i * layer.outputs..(i + 1) * layer.outputs];
                for (g, d) in row.iter_mut().zip(&delta) {
                    *g += xi * d;
                }
            }
            if self.use_bias {
                for (g, d) in grads.biases[l].iter_mut().zip(&delta) {
                    *g += d;
                }
            }
            if l == 0 {
                break;
            }
            // hidden input of this layer was a ReLU output: gate by x > 0
            let mut prev = vec![0.0; layer.inputs];
            for (i, p) in prev.iter_mut().enumerate() {
                if x[i] > 0.0 {
                    let row = &layer.weights[i * layer.outputs..(i + 1) * layer.outputs];
                    *p = row.iter().zip(&delta).map(|(w, d)| w * d).sum();
                }
            }
            delta = prev;
        }
    }

    /// Plain gradient-descent step: `theta -= lr * grad`.
    pub fn apply_gradients(&mut self, grads: &Gradients, lr: f64) {
        for (l, layer) in self.layers.iter_mut().enumerate() {
            for (w, g) in layer.weights.iter_mut().zip(&grads.weights[l]) {
                *w -= lr * g;
            }
            if self.use_bias {
                for (b, g) in layer.biases.iter_mut().zip(&grads.biases[l]) {
                    *b -= lr * g;
                }
            }
        }
    }
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
