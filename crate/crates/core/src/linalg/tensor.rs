use super::{LinalgError, Matrix};

/// Convolution kernel with layout `[filter_height][filter_width][in_channels][filter_count]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor4 {
    filter_height: usize,
    filter_width: usize,
    in_channels: usize,
    filter_count: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn new(
        filter_height: usize,
        filter_width: usize,
        in_channels: usize,
        filter_count: usize,
        data: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        let dims = [filter_height, filter_width, in_channels, filter_count];
        if dims.contains(&0) {
            return Err(LinalgError::EmptyShape {
                rows: filter_height * filter_width,
                cols: in_channels * filter_count,
            });
        }
        if data.len() != dims.iter().product::<usize>() {
            return Err(LinalgError::ShapeMismatch {
                op: "Tensor4::new",
                left: (filter_height * filter_width, in_channels * filter_count),
                right: (data.len(), 1),
            });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / (in_channels * filter_count),
                col: pos % (in_channels * filter_count),
            });
        }
        Ok(Self {
            filter_height,
            filter_width,
            in_channels,
            filter_count,
            data,
        })
    }

    pub fn zeros(
        filter_height: usize,
        filter_width: usize,
        in_channels: usize,
        filter_count: usize,
    ) -> Self {
        let n = filter_height * filter_width * in_channels * filter_count;
        Self::new(
            filter_height,
            filter_width,
            in_channels,
            filter_count,
            vec![0.0; n],
        )
        .expect("positive tensor dims")
    }

    pub fn filter_height(&self) -> usize {
        self.filter_height
    }

    pub fn filter_width(&self) -> usize {
        self.filter_width
    }

    pub fn in_channels(&self) -> usize {
        self.in_channels
    }

    pub fn filter_count(&self) -> usize {
        self.filter_count
    }

    /// `(filter_height, filter_width, in_channels, filter_count)`
    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (
            self.filter_height,
            self.filter_width,
            self.in_channels,
            self.filter_count,
        )
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn offset(&self, h: usize, w: usize, c: usize, f: usize) -> usize {
        ((h * self.filter_width + w) * self.in_channels + c) * self.filter_count + f
    }

    #[inline]
    pub fn get(&self, h: usize, w: usize, c: usize, f: usize) -> f64 {
        self.data[self.offset(h, w, c, f)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Slices a kernel into `in_channels` matrices of shape
/// `(filter_height * filter_width) x filter_count`.
pub fn slice_tensor(t: &Tensor4) -> Vec<Matrix> {
    let fs = t.filter_height * t.filter_width;
    (0..t.in_channels)
        .map(|c| {
            Matrix::from_fn(fs, t.filter_count, |s, f| {
                t.get(s / t.filter_width, s % t.filter_width, c, f)
            })
        })
        .collect()
}

/// Inverse of [`slice_tensor`].
pub fn unslice_tensor(
    slices: &[Matrix],
    filter_height: usize,
    filter_width: usize,
) -> Result<Tensor4, LinalgError> {
    let first = slices
        .first()
        .ok_or(LinalgError::EmptyShape { rows: 0, cols: 0 })?;
    let fs = filter_height * filter_width;
    let filter_count = first.cols();
    if let Some(bad) = slices.iter().find(|m| m.shape() != (fs, filter_count)) {
        return Err(LinalgError::ShapeMismatch {
            op: "unslice_tensor",
            left: (fs, filter_count),
            right: bad.shape(),
        });
    }
    let mut t = Tensor4::zeros(filter_height, filter_width, slices.len(), filter_count);
    for (c, m) in slices.iter().enumerate() {
        for s in 0..fs {
            for f in 0..filter_count {
                let off = t.offset(s / filter_width, s % filter_width, c, f);
                t.data[off] = m[(s, f)];
            }
        }
    }
    Ok(t)
}
