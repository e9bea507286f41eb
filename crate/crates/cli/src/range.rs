//! `from:to:step` sweep grids and scalar-or-range flag values.

use std::fmt;
use std::str::FromStr;

/// Inclusive arithmetic grid, parsed from `from:to:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0usize;
        loop {
            let v = self.from + self.step * i as f64;
            if v > self.to + 1e-9 * self.step.abs().max(1.0) {
                break;
            }
            out.push(v);
            i += 1;
            if i > 1_000_000 {
                break;
            }
        }
        out
    }
}

impl FromStr for SweepRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected from:to:step, got `{s}`"));
        }
        let parse = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| format!("`{p}` is not a number"))
        };
        let (from, to, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) {
            return Err("step must be positive".into());
        }
        if to < from {
            return Err("range end precedes its start".into());
        }
        Ok(Self { from, to, step })
    }
}

impl fmt::Display for SweepRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.from, self.to, self.step)
    }
}

/// A flag that is a plain number or a sweep grid, depending on which
/// variable the command sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarOrRange {
    Scalar(f64),
    Range(SweepRange),
}

impl ScalarOrRange {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            ScalarOrRange::Scalar(v) => Some(*v),
            ScalarOrRange::Range(_) => None,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            ScalarOrRange::Scalar(v) => vec![*v],
            ScalarOrRange::Range(r) => r.values(),
        }
    }
}

impl FromStr for ScalarOrRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.contains(':') {
            Ok(ScalarOrRange::Range(s.parse()?))
        } else {
            s.parse::<f64>()
                .map(ScalarOrRange::Scalar)
                .map_err(|_| format!("`{s}` is neither a number nor from:to:step"))
        }
    }
}

impl fmt::Display for ScalarOrRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarOrRange::Scalar(v) => write!(f, "{v}"),
            ScalarOrRange::Range(r) => write!(f, "{r}"),
        }
    }
}
