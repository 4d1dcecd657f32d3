use crate::linalg::{slice_tensor, unslice_tensor, Matrix, Tensor4};

use super::{Activation, NetError};

#[derive(Clone, Debug, PartialEq)]
pub enum LayerKind {
    /// `y = act(W x + b)` with `W` of shape `out x in`.
    Dense { weights: Matrix },
    /// Valid-padding, stride-1 convolution. Input is channel-major
    /// `[in_channels][in_height][in_width]`, output `[filter][out_h][out_w]`.
    Conv2d {
        kernel: Tensor4,
        in_height: usize,
        in_width: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub(crate) kind: LayerKind,
    pub(crate) bias: Vec<f64>,
    pub(crate) activation: Activation,
}

impl Layer {
    pub fn dense(
        weights: Matrix,
        bias: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, NetError> {
        if bias.len() != weights.rows() {
            return Err(NetError::BiasShape {
                expected: weights.rows(),
                got: bias.len(),
            });
        }
        Self::check_bias(&bias)?;
        Ok(Self {
            kind: LayerKind::Dense { weights },
            bias,
            activation,
        })
    }

    pub fn conv2d(
        kernel: Tensor4,
        bias: Vec<f64>,
        in_height: usize,
        in_width: usize,
        activation: Activation,
    ) -> Result<Self, NetError> {
        if activation == Activation::Softmax {
            return Err(NetError::SoftmaxConv);
        }
        if kernel.filter_height() > in_height || kernel.filter_width() > in_width {
            return Err(NetError::KernelTooLarge {
                kernel: (kernel.filter_height(), kernel.filter_width()),
                input: (in_height, in_width),
            });
        }
        if bias.len() != kernel.filter_count() {
            return Err(NetError::BiasShape {
                expected: kernel.filter_count(),
                got: bias.len(),
            });
        }
        Self::check_bias(&bias)?;
        Ok(Self {
            kind: LayerKind::Conv2d {
                kernel,
                in_height,
                in_width,
            },
            bias,
            activation,
        })
    }

    fn check_bias(bias: &[f64]) -> Result<(), NetError> {
        if bias.iter().all(|b| b.is_finite()) {
            Ok(())
        } else {
            Err(NetError::NonFiniteParameter { layer: usize::MAX })
        }
    }

    pub fn kind(&self) -> &LayerKind {
        &self.kind
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn is_conv(&self) -> bool {
        matches!(self.kind, LayerKind::Conv2d { .. })
    }

    /// Output spatial size of a conv layer.
    pub(crate) fn conv_out_dims(&self) -> Option<(usize, usize)> {
        match &self.kind {
            LayerKind::Conv2d {
                kernel,
                in_height,
                in_width,
            } => Some((
                in_height - kernel.filter_height() + 1,
                in_width - kernel.filter_width() + 1,
            )),
            LayerKind::Dense { .. } => None,
        }
    }

    pub fn input_len(&self) -> usize {
        match &self.kind {
            LayerKind::Dense { weights } => weights.cols(),
            LayerKind::Conv2d {
                kernel,
                in_height,
                in_width,
            } => kernel.in_channels() * in_height * in_width,
        }
    }

    pub fn output_len(&self) -> usize {
        match &self.kind {
            LayerKind::Dense { weights } => weights.rows(),
            LayerKind::Conv2d { kernel, .. } => {
                let (oh, ow) = self.conv_out_dims().expect("conv");
                kernel.filter_count() * oh * ow
            }
        }
    }

    /// Flat weight storage: row-major matrix or kernel layout.
    pub fn weights(&self) -> &[f64] {
        match &self.kind {
            LayerKind::Dense { weights } => weights.data(),
            LayerKind::Conv2d { kernel, .. } => kernel.data(),
        }
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [f64] {
        match &mut self.kind {
            LayerKind::Dense { weights } => weights.data_mut(),
            LayerKind::Conv2d { kernel, .. } => kernel.data_mut(),
        }
    }

    pub(crate) fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn param_count(&self) -> usize {
        self.weights().len() + self.bias.len()
    }

    /// The matrices a low-rank factorization acts on: the weight matrix of
    /// a dense layer, or the `FS x FN` slices of a conv kernel.
    pub fn weight_matrices(&self) -> Vec<Matrix> {
        match &self.kind {
            LayerKind::Dense { weights } => vec![weights.clone()],
            LayerKind::Conv2d { kernel, .. } => slice_tensor(kernel),
        }
    }

    pub(crate) fn set_weight_matrices(&mut self, mats: &[Matrix]) -> Result<(), NetError> {
        match &mut self.kind {
            LayerKind::Dense { weights } => {
                let [m] = mats else {
                    return Err(NetError::WeightShape);
                };
                if m.shape() != weights.shape() {
                    return Err(NetError::WeightShape);
                }
                *weights = m.clone();
            }
            LayerKind::Conv2d { kernel, .. } => {
                let t = unslice_tensor(mats, kernel.filter_height(), kernel.filter_width())
                    .map_err(|_| NetError::WeightShape)?;
                if t.dims() != kernel.dims() {
                    return Err(NetError::WeightShape);
                }
                *kernel = t;
            }
        }
        Ok(())
    }

    /// Flat index of the weight that the `(slice, row, col)` entry of
    /// [`Layer::weight_matrices`] refers to.
    pub(crate) fn matrix_entry_offset(&self, slice: usize, row: usize, col: usize) -> usize {
        match &self.kind {
            LayerKind::Dense { weights } => row * weights.cols() + col,
            LayerKind::Conv2d { kernel, .. } => {
                let fw = kernel.filter_width();
                kernel.offset(row / fw, row % fw, slice, col)
            }
        }
    }

    /// Pre-activation `z` for one sample.
    pub fn preactivation(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            LayerKind::Dense { weights } => {
                let mut z = weights.matvec(x).expect("input width checked by caller");
                for (zi, b) in z.iter_mut().zip(&self.bias) {
                    *zi += b;
                }
                z
            }
            LayerKind::Conv2d {
                kernel,
                in_height,
                in_width,
            } => {
                let (fh, fw, cin, nf) = kernel.dims();
                let (oh, ow) = self.conv_out_dims().expect("conv");
                let mut z = vec![0.0; nf * oh * ow];
                for f in 0..nf {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let mut acc = self.bias[f];
                            for h in 0..fh {
                                for w in 0..fw {
                                    for c in 0..cin {
                                        acc += kernel.get(h, w, c, f)
                                            * x[(c * in_height + oy + h) * in_width + ox + w];
                                    }
                                }
                            }
                            z[(f * oh + oy) * ow + ox] = acc;
                        }
                    }
                }
                z
            }
        }
    }

    /// Accumulates weight and bias gradients for one sample given `dL/dz`,
    /// and returns `dL/dx`.
    pub(crate) fn backprop_sample(
        &self,
        x: &[f64],
        grad_z: &[f64],
        grad_w: &mut [f64],
        grad_b: &mut [f64],
        need_input_grad: bool,
    ) -> Option<Vec<f64>> {
        match &self.kind {
            LayerKind::Dense { weights } => {
                let (rows, cols) = weights.shape();
                for i in 0..rows {
                    let g = grad_z[i];
                    grad_b[i] += g;
                    if g == 0.0 {
                        continue;
                    }
                    let row = &mut grad_w[i * cols..(i + 1) * cols];
                    for (gw, xj) in row.iter_mut().zip(x) {
                        *gw += g * xj;
                    }
                }
                need_input_grad.then(|| {
                    let mut dx = vec![0.0; cols];
                    for i in 0..rows {
                        let g = grad_z[i];
                        if g == 0.0 {
                            continue;
                        }
                        for (d, w) in dx.iter_mut().zip(weights.row(i)) {
                            *d += g * w;
                        }
                    }
                    dx
                })
            }
            LayerKind::Conv2d {
                kernel,
                in_height,
                in_width,
            } => {
                let (fh, fw, cin, nf) = kernel.dims();
                let (oh, ow) = self.conv_out_dims().expect("conv");
                let mut dx = need_input_grad.then(|| vec![0.0; x.len()]);
                for f in 0..nf {
                    for oy in 0..oh {
                        for ox in 0..ow {
                            let g = grad_z[(f * oh + oy) * ow + ox];
                            grad_b[f] += g;
                            if g == 0.0 {
                                continue;
                            }
                            for h in 0..fh {
                                for w in 0..fw {
                                    for c in 0..cin {
                                        let xi = (c * in_height + oy + h) * in_width + ox + w;
                                        let k = kernel.offset(h, w, c, f);
                                        grad_w[k] += g * x[xi];
                                        if let Some(dx) = dx.as_mut() {
                                            dx[xi] += g * kernel.data()[k];
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                dx
            }
        }
    }
}
