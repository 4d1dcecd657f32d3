use rand::Rng;

use crate::linalg::{Matrix, Tensor4};

use super::loss::loss_output_gradient;
use super::{Activation, Layer, LayerKind, LossKind, NetError};

/// Aligned inputs and targets. Inputs are flat vectors; conv inputs use
/// channel-major layout.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl SampleBatch {
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self, NetError> {
        if inputs.is_empty() || inputs.len() != targets.len() {
            return Err(NetError::EmptyOrMisalignedBatch {
                inputs: inputs.len(),
                targets: targets.len(),
            });
        }
        let (wi, wt) = (inputs[0].len(), targets[0].len());
        if inputs.iter().any(|x| x.len() != wi) || targets.iter().any(|y| y.len() != wt) {
            return Err(NetError::RaggedBatch);
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_len(&self) -> usize {
        self.inputs[0].len()
    }

    pub fn target_len(&self) -> usize {
        self.targets[0].len()
    }

    /// Sub-batch of the given sample indices, in order.
    pub fn select(&self, idx: &[usize]) -> SampleBatch {
        SampleBatch {
            inputs: idx.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }

    pub fn head(&self, n: usize) -> SampleBatch {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&idx)
    }
}

/// Per-layer weight and bias gradients, laid out like the layer's storage.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerGradient>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        Self {
            layers: net
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: vec![0.0; l.weights().len()],
                    bias: vec![0.0; l.bias().len()],
                })
                .collect(),
        }
    }

    /// Euclidean norm over every weight and bias entry.
    pub fn norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn weight_norm(&self, layer: usize) -> f64 {
        self.layers[layer]
            .weights
            .iter()
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
            .all(|g| g.is_finite())
    }
}

/// Activations recorded by [`Network::forward`], bound to the parameter
/// version they were computed with.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    version: u64,
    /// `inputs[l]` is the (post-dropout) input to layer `l`.
    inputs: Vec<Vec<Vec<f64>>>,
    pre: Vec<Vec<Vec<f64>>>,
    post: Vec<Vec<Vec<f64>>>,
    /// Inverted-dropout scale factors applied to `post[l]`.
    masks: Vec<Option<Vec<Vec<f64>>>>,
}

impl ForwardCache {
    pub fn outputs(&self) -> &[Vec<f64>] {
        self.post.last().expect("network has at least one layer")
    }

    /// Input activations of layer `l` for every sample.
    pub fn layer_inputs(&self, l: usize) -> &[Vec<f64>] {
        &self.inputs[l]
    }

    pub fn layer_outputs(&self, l: usize) -> &[Vec<f64>] {
        &self.post[l]
    }

    pub fn layer_preactivations(&self, l: usize) -> &[Vec<f64>] {
        &self.pre[l]
    }
}

/// Layer recipe used by [`Network::init`].
#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    Dense {
        units: usize,
        activation: Activation,
    },
    Conv {
        filter_height: usize,
        filter_width: usize,
        filters: usize,
        activation: Activation,
    },
}

/// Shape of a single input sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputShape {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl InputShape {
    pub fn flat(features: usize) -> Self {
        Self {
            channels: 1,
            height: 1,
            width: features,
        }
    }

    pub fn len(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
    version: u64,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self, NetError> {
        if layers.is_empty() {
            return Err(NetError::NoLayers);
        }
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[0].output_len() != pair[1].input_len() {
                return Err(NetError::LayerShape {
                    layer: l + 1,
                    expected: pair[1].input_len(),
                    got: pair[0].output_len(),
                });
            }
        }
        let last = layers.len() - 1;
        if let Some(l) = layers[..last]
            .iter()
            .position(|l| l.activation == Activation::Softmax)
        {
            return Err(NetError::SoftmaxNotAtOutput { layer: l });
        }
        Ok(Self { layers, version: 0 })
    }

    /// Glorot-uniform weights `U(-s, s)`, `s = sqrt(6 / (fan_in + fan_out))`,
    /// zero biases.
    pub fn init<R: Rng + ?Sized>(
        input: InputShape,
        specs: &[LayerSpec],
        rng: &mut R,
    ) -> Result<Self, NetError> {
        let mut layers = Vec::with_capacity(specs.len());
        let mut shape = input;
        let mut spatial = true;
        for spec in specs {
            match *spec {
                LayerSpec::Dense { units, activation } => {
                    let fan_in = shape.len();
                    let s = (6.0 / (fan_in + units) as f64).sqrt();
                    let w = Matrix::from_fn(units, fan_in, |_, _| rng.random_range(-s..s));
                    layers.push(Layer::dense(w, vec![0.0; units], activation)?);
                    shape = InputShape::flat(units);
                    spatial = false;
                }
                LayerSpec::Conv {
                    filter_height,
                    filter_width,
                    filters,
                    activation,
                } => {
                    if !spatial {
                        return Err(NetError::ConvAfterDense {
                            layer: layers.len(),
                        });
                    }
                    let area = filter_height * filter_width;
                    let s = (6.0 / (area * (shape.channels + filters)) as f64).sqrt();
                    let n = area * shape.channels * filters;
                    let data = (0..n).map(|_| rng.random_range(-s..s)).collect();
                    let kernel =
                        Tensor4::new(filter_height, filter_width, shape.channels, filters, data)
                            .map_err(|_| NetError::WeightShape)?;
                    let layer = Layer::conv2d(
                        kernel,
                        vec![0.0; filters],
                        shape.height,
                        shape.width,
                        activation,
                    )?;
                    let (oh, ow) = layer.conv_out_dims().expect("conv");
                    layers.push(layer);
                    shape = InputShape {
                        channels: filters,
                        height: oh,
                        width: ow,
                    };
                }
            }
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer(&self, l: usize) -> &Layer {
        &self.layers[l]
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_len(&self) -> usize {
        self.layers[0].input_len()
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().expect("nonempty").output_len()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Bumped on every parameter mutation; caches from older versions are
    /// rejected by [`Network::backward`].
    pub fn version(&self) -> u64 {
        self.version
    }

    /// Replaces the weights of layer `l` with the given matrices (see
    /// [`Layer::weight_matrices`]); biases are untouched.
    pub fn set_weight_matrices(&mut self, l: usize, mats: &[Matrix]) -> Result<(), NetError> {
        if mats.iter().any(|m| !m.is_finite()) {
            return Err(NetError::NonFiniteParameter { layer: l });
        }
        self.layers[l].set_weight_matrices(mats)?;
        self.version += 1;
        Ok(())
    }

    pub fn set_bias(&mut self, l: usize, bias: &[f64]) -> Result<(), NetError> {
        let b = self.layers[l].bias_mut();
        if b.len() != bias.len() {
            return Err(NetError::BiasShape {
                expected: b.len(),
                got: bias.len(),
            });
        }
        b.copy_from_slice(bias);
        self.version += 1;
        Ok(())
    }

    pub fn forward(&self, inputs: &[Vec<f64>]) -> Result<ForwardCache, NetError> {
        self.forward_impl(inputs, None::<(&mut rand::rngs::ThreadRng, f64)>)
    }

    /// Forward pass with inverted dropout at `rate` on every hidden layer's
    /// output.
    pub fn forward_with_dropout<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<f64>],
        rate: f64,
        rng: &mut R,
    ) -> Result<ForwardCache, NetError> {
        self.forward_impl(inputs, Some((rng, rate)))
    }

    fn forward_impl<R: Rng + ?Sized>(
        &self,
        inputs: &[Vec<f64>],
        mut dropout: Option<(&mut R, f64)>,
    ) -> Result<ForwardCache, NetError> {
        if inputs.is_empty() {
            return Err(NetError::EmptyOrMisalignedBatch {
                inputs: 0,
                targets: 0,
            });
        }
        let depth = self.layers.len();
        let mut cache = ForwardCache {
            version: self.version,
            inputs: Vec::with_capacity(depth),
            pre: Vec::with_capacity(depth),
            post: Vec::with_capacity(depth),
            masks: Vec::with_capacity(depth),
        };
        let mut current: Vec<Vec<f64>> = inputs.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            if let Some(bad) = current.iter().find(|x| x.len() != layer.input_len()) {
                return Err(NetError::LayerShape {
                    layer: l,
                    expected: layer.input_len(),
                    got: bad.len(),
                });
            }
            let pre: Vec<Vec<f64>> = current.iter().map(|x| layer.preactivation(x)).collect();
            let post: Vec<Vec<f64>> = pre.iter().map(|z| layer.activation.apply(z)).collect();
            let hidden = l + 1 < depth;
            let mask = match dropout.as_mut() {
                Some((rng, rate)) if hidden && *rate > 0.0 => {
                    let keep = 1.0 - *rate;
                    Some(
                        post.iter()
                            .map(|y| {
                                y.iter()
                                    .map(|_| {
                                        if rng.random::<f64>() < *rate {
                                            0.0
                                        } else {
                                            1.0 / keep
                                        }
                                    })
                                    .collect::<Vec<f64>>()
                            })
                            .collect::<Vec<_>>(),
                    )
                }
                _ => None,
            };
            let next = match &mask {
                Some(m) => post
                    .iter()
                    .zip(m)
                    .map(|(y, s)| y.iter().zip(s).map(|(a, b)| a * b).collect())
                    .collect(),
                None => post.clone(),
            };
            cache.inputs.push(std::mem::replace(&mut current, next));
            cache.pre.push(pre);
            cache.post.push(post);
            cache.masks.push(mask);
        }
        Ok(cache)
    }

    /// Outputs only.
    pub fn predict(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, NetError> {
        let mut cache = self.forward(inputs)?;
        Ok(cache.post.pop().expect("nonempty"))
    }

    /// Exact gradient of the loss over the cached batch.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        targets: &[Vec<f64>],
        kind: LossKind,
    ) -> Result<GradientSet, NetError> {
        if cache.version != self.version || cache.inputs.len() != self.layers.len() {
            return Err(NetError::StaleCache {
                cache: cache.version,
                network: self.version,
            });
        }
        let outputs = cache.outputs();
        let last = self.layers.len() - 1;
        let mut grads = GradientSet::zeros_like(self);

        // dL/dz at the output layer.
        let out_act = self.layers[last].activation;
        let mut grad_z: Vec<Vec<f64>> =
            if kind == LossKind::CrossEntropy && out_act == Activation::Softmax {
                super::loss::loss(outputs, targets, kind)?;
                let t = outputs.len() as f64;
                outputs
                    .iter()
                    .zip(targets)
                    .map(|(p, y)| {
                        let ysum: f64 = y.iter().sum();
                        p.iter()
                            .zip(y)
                            .map(|(pj, yj)| (pj * ysum - yj) / t)
                            .collect()
                    })
                    .collect()
            } else {
                let gy = loss_output_gradient(outputs, targets, kind)?;
                gy.iter()
                    .enumerate()
                    .map(|(s, g)| out_act.backprop(&cache.pre[last][s], &cache.post[last][s], g))
                    .collect()
            };

        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let lg = &mut grads.layers[l];
            let mut grad_x = Vec::with_capacity(grad_z.len());
            for (s, gz) in grad_z.iter().enumerate() {
                let dx = layer.backprop_sample(
                    &cache.inputs[l][s],
                    gz,
                    &mut lg.weights,
                    &mut lg.bias,
                    l > 0,
                );
                if let Some(dx) = dx {
                    grad_x.push(dx);
                }
            }
            if l == 0 {
                break;
            }
            // Back through the previous layer's dropout mask and activation.
            let prev = &self.layers[l - 1];
            grad_z = grad_x
                .into_iter()
                .enumerate()
                .map(|(s, mut gy)| {
                    if let Some(m) = &cache.masks[l - 1] {
                        for (g, k) in gy.iter_mut().zip(&m[s]) {
                            *g *= k;
                        }
                    }
                    prev.activation
                        .backprop(&cache.pre[l - 1][s], &cache.post[l - 1][s], &gy)
                })
                .collect();
        }
        Ok(grads)
    }

    /// Forward + loss + backward on a batch.
    pub fn loss_and_gradient(
        &self,
        batch: &SampleBatch,
        kind: LossKind,
    ) -> Result<(f64, GradientSet), NetError> {
        let cache = self.forward(&batch.inputs)?;
        let value = super::loss(cache.outputs(), &batch.targets, kind)?;
        let grads = self.backward(&cache, &batch.targets, kind)?;
        Ok((value, grads))
    }

    /// `theta <- theta - step_size * grads`. Leaves the network untouched
    /// if any updated parameter would be non-finite.
    pub fn sgd_step(&mut self, grads: &GradientSet, step_size: f64) -> Result<(), NetError> {
        if !(step_size > 0.0 && step_size.is_finite()) {
            return Err(NetError::InvalidStepSize(step_size));
        }
        if grads.layers.len() != self.layers.len() {
            return Err(NetError::GradientShape {
                layer: grads.layers.len(),
            });
        }
        for (l, (layer, g)) in self.layers.iter().zip(&grads.layers).enumerate() {
            if g.weights.len() != layer.weights().len() || g.bias.len() != layer.bias().len() {
                return Err(NetError::GradientShape { layer: l });
            }
            let bad = layer
                .weights()
                .iter()
                .zip(&g.weights)
                .chain(layer.bias().iter().zip(&g.bias))
                .any(|(p, d)| !(p - step_size * d).is_finite());
            if bad {
                return Err(NetError::NonFiniteParameter { layer: l });
            }
        }
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (p, d) in layer.weights_mut().iter_mut().zip(&g.weights) {
                *p -= step_size * d;
            }
            for (p, d) in layer.bias_mut().iter_mut().zip(&g.bias) {
                *p -= step_size * d;
            }
        }
        self.version += 1;
        Ok(())
    }

    /// Dense layer weight matrix, if layer `l` is dense.
    pub fn dense_weights(&self, l: usize) -> Option<&Matrix> {
        match &self.layers[l].kind {
            LayerKind::Dense { weights } => Some(weights),
            LayerKind::Conv2d { .. } => None,
        }
    }

    /// Flat parameter vector (weights then bias, layer by layer).
    pub fn flat_params(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights().iter().chain(l.bias()).copied())
            .collect()
    }

    /// Inverse of [`Network::flat_params`].
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NetError> {
        if params.len() != self.param_count() {
            return Err(NetError::GradientShape {
                layer: self.layers.len(),
            });
        }
        let mut off = 0;
        for layer in &mut self.layers {
            let nw = layer.weights().len();
            layer.weights_mut().copy_from_slice(&params[off..off + nw]);
            off += nw;
            let nb = layer.bias().len();
            layer.bias_mut().copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        self.version += 1;
        Ok(())
    }
}

impl GradientSet {
    /// Flat gradient in [`Network::flat_params`] order.
    pub fn flatten(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }
}
