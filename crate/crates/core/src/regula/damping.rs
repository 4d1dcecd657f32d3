use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Damping sequence `DS(t)` dividing the layer-selection test of ALR.
///
/// Values are clamped to `(0, 1]`: wherever the raw formula exceeds 1 or is
/// undefined (small `t`, e.g. `1/ln(ln t)` below `t = e^e`) the sequence is
/// 1, so selection falls back to the plain `Bernoulli(Gamma)` rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingSequence {
    /// `DS(t) = 1`
    None,
    /// `1 / ln(ln t)`
    InvLogLog,
    /// `1 / ln t`
    InvLog,
    /// `1 / t`
    InvT,
    /// `1 / t^2`
    InvTSquared,
    /// Constant, unclamped `DS(t) = c > 0`. Not one of the studied
    /// sequences; used to force degenerate selections (huge `c` empties
    /// the selection).
    Constant(f64),
}

impl DampingSequence {
    pub const KINDS: [DampingSequence; 5] = [
        DampingSequence::None,
        DampingSequence::InvLogLog,
        DampingSequence::InvLog,
        DampingSequence::InvT,
        DampingSequence::InvTSquared,
    ];

    /// Raw formula, without clamping.
    pub fn raw(self, t: f64) -> f64 {
        match self {
            DampingSequence::None => 1.0,
            DampingSequence::InvLogLog => 1.0 / t.ln().ln(),
            DampingSequence::InvLog => 1.0 / t.ln(),
            DampingSequence::InvT => 1.0 / t,
            DampingSequence::InvTSquared => 1.0 / (t * t),
            DampingSequence::Constant(c) => c,
        }
    }

    /// `DS(t)`, clamped to `(0, 1]` for the studied kinds.
    pub fn at(self, t: f64) -> f64 {
        if let DampingSequence::Constant(c) = self {
            return c;
        }
        let v = self.raw(t);
        if v.is_finite() && v > 0.0 && v <= 1.0 {
            v
        } else {
            1.0
        }
    }

    /// Smallest integer epoch from which the raw formula already lies in
    /// `(0, 1]`.
    pub fn t_min(self) -> u32 {
        match self {
            DampingSequence::None | DampingSequence::Constant(_) => 1,
            DampingSequence::InvT | DampingSequence::InvTSquared => 1,
            DampingSequence::InvLog => 3,
            DampingSequence::InvLogLog => 16,
        }
    }

    /// Probability that a layer with normalized condition number `gamma`
    /// is selected at epoch `t`: `min(1, gamma / DS(t))`.
    pub fn selection_probability(self, gamma: f64, t: f64) -> f64 {
        (gamma / self.at(t)).min(1.0)
    }

    pub fn name(self) -> String {
        match self {
            DampingSequence::None => "none".into(),
            DampingSequence::InvLogLog => "inv_log_log".into(),
            DampingSequence::InvLog => "inv_log".into(),
            DampingSequence::InvT => "inv_t".into(),
            DampingSequence::InvTSquared => "inv_t_squared".into(),
            DampingSequence::Constant(c) => format!("constant:{c}"),
        }
    }
}

impl fmt::Display for DampingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for DampingSequence {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(c) = s.strip_prefix("constant:") {
            let c: f64 = c
                .parse()
                .map_err(|_| format!("bad damping constant '{c}'"))?;
            if !(c > 0.0) {
                return Err(format!("damping constant must be positive, got {c}"));
            }
            return Ok(DampingSequence::Constant(c));
        }
        DampingSequence::KINDS
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown damping sequence '{s}'"))
    }
}
