use std::fmt;

use serde::{Deserialize, Serialize};

/// How a measured value is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Check {
    /// `value <= limit`
    AtMost { limit: f64 },
    /// `value < limit`
    Below { limit: f64 },
    /// `value >= limit`
    AtLeast { limit: f64 },
    /// `value > limit`
    Above { limit: f64 },
    /// `|value - target| <= tol`
    Near { target: f64, tol: f64 },
}

impl Check {
    pub fn holds(self, value: f64) -> bool {
        match self {
            Check::AtMost { limit } => value <= limit,
            Check::Below { limit } => value < limit,
            Check::AtLeast { limit } => value >= limit,
            Check::Above { limit } => value > limit,
            Check::Near { target, tol } => (value - target).abs() <= tol,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::AtMost { limit } => write!(f, "<= {limit:e}"),
            Check::Below { limit } => write!(f, "< {limit:e}"),
            Check::AtLeast { limit } => write!(f, ">= {limit:e}"),
            Check::Above { limit } => write!(f, "> {limit:e}"),
            Check::Near { target, tol } => write!(f, "= {target:e} +- {tol:e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub check: Check,
    pub passed: bool,
}

impl Measurement {
    pub fn new(name: impl Into<String>, value: f64, check: Check) -> Self {
        Self {
            name: name.into(),
            value,
            check,
            passed: check.holds(value),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub label: String,
    pub measurements: Vec<Measurement>,
    /// Set when the point was skipped or could not be evaluated.
    pub note: Option<String>,
}

impl SweepPoint {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            measurements: Vec::new(),
            note: None,
        }
    }

    pub fn skipped(label: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            measurements: Vec::new(),
            note: Some(note.into()),
        }
    }

    pub fn measure(mut self, name: impl Into<String>, value: f64, check: Check) -> Self {
        self.measurements.push(Measurement::new(name, value, check));
        self
    }

    pub fn passed(&self) -> bool {
        self.measurements.iter().all(|m| m.passed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypotheses of the claim were not met by the constructed instance.
    Inconclusive,
    /// Evidence only; the claim is not asserted.
    Observational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub claim: String,
    pub parameters: Vec<(String, String)>,
    pub points: Vec<SweepPoint>,
    pub verdict: Verdict,
    pub log: Vec<String>,
}

impl TheoremReport {
    pub fn new(claim: impl Into<String>) -> Self {
        Self {
            claim: claim.into(),
            parameters: Vec::new(),
            points: Vec::new(),
            verdict: Verdict::Inconclusive,
            log: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn log(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }

    /// Pass if every measurement of every evaluated point holds, Fail
    /// otherwise; Inconclusive when nothing could be evaluated.
    pub fn conclude(mut self) -> Self {
        let evaluated: Vec<&SweepPoint> = self
            .points
            .iter()
            .filter(|p| !p.measurements.is_empty())
            .collect();
        self.verdict = if evaluated.is_empty() {
            Verdict::Inconclusive
        } else if evaluated.iter().all(|p| p.passed()) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn observational(mut self) -> Self {
        self.verdict = Verdict::Observational;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failures(&self) -> Vec<String> {
        self.points
            .iter()
            .flat_map(|p| {
                p.measurements.iter().filter(|m| !m.passed).map(move |m| {
                    format!("{}: {} = {:e} (want {})", p.label, m.name, m.value, m.check)
                })
            })
            .collect()
    }

    /// Largest value of the named measurement across all points.
    pub fn max_of(&self, name: &str) -> Option<f64> {
        self.values_of(name).into_iter().reduce(f64::max)
    }

    pub fn values_of(&self, name: &str) -> Vec<f64> {
        self.points
            .iter()
            .flat_map(|p| p.measurements.iter())
            .filter(|m| m.name == name)
            .map(|m| m.value)
            .collect()
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} [{:?}]", self.claim, self.verdict)?;
        for (k, v) in &self.parameters {
            writeln!(f, "  {k} = {v}")?;
        }
        for p in &self.points {
            match &p.note {
                Some(n) if p.measurements.is_empty() => {
                    writeln!(f, "  {}: skipped ({n})", p.label)?
                }
                _ => {
                    let parts: Vec<String> = p
                        .measurements
                        .iter()
                        .map(|m| {
                            format!(
                                "{}={:.6e}{}",
                                m.name,
                                m.value,
                                if m.passed { "" } else { " FAIL" }
                            )
                        })
                        .collect();
                    writeln!(f, "  {}: {}", p.label, parts.join(", "))?;
                }
            }
        }
        for line in &self.log {
            writeln!(f, "  # {line}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdicts() {
        let mut r = TheoremReport::new("demo");
        r.points
            .push(SweepPoint::new("a").measure("x", 1.0, Check::AtMost { limit: 2.0 }));
        assert_eq!(r.clone().conclude().verdict, Verdict::Pass);
        r.points
            .push(SweepPoint::new("b").measure("x", 3.0, Check::AtMost { limit: 2.0 }));
        let r = r.conclude();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failures().len(), 1);
        assert_eq!(r.max_of("x"), Some(3.0));
        assert_eq!(
            TheoremReport::new("none").conclude().verdict,
            Verdict::Inconclusive
        );
    }
}
