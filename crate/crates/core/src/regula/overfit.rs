/// Returned by [`overfit_ratio`] when the training error has vanished.
pub const RATIO_SENTINEL: f64 = f64::MAX;

/// `v(t) = val_err / train_err`.
pub fn overfit_ratio(val_err: f64, train_err: f64) -> f64 {
    if train_err <= 1e-12 {
        RATIO_SENTINEL
    } else {
        val_err / train_err
    }
}

/// Smooths the oscillating `v(t)` trace with a sliding window of length
/// `patience` and fires when the window mean strictly rises.
#[derive(Clone, Debug)]
pub struct OverfitDetector {
    patience: usize,
    history: Vec<f64>,
}

impl OverfitDetector {
    pub fn new(patience: usize) -> Self {
        assert!(patience >= 1, "patience must be at least 1");
        Self {
            patience,
            history: Vec::new(),
        }
    }

    pub fn patience(&self) -> usize {
        self.patience
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Last `min(p, len)` values of `v`.
    pub fn window(&self) -> &[f64] {
        &self.history[self.history.len().saturating_sub(self.patience)..]
    }

    /// Mean of [`OverfitDetector::window`]; `NaN` before the first value.
    pub fn window_mean(&self) -> f64 {
        mean(self.window())
    }

    /// Records `v(t)` and reports whether the smoothed ratio increased.
    /// Needs `p + 1` values before it can fire.
    pub fn push(&mut self, v: f64) -> bool {
        self.history.push(v);
        let n = self.history.len();
        let p = self.patience;
        if n <= p {
            return false;
        }
        let current = mean(&self.history[n - p..]);
        let previous = mean(&self.history[n - p - 1..n - 1]);
        current > previous
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
