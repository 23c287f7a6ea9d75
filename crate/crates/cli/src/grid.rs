//! Parameter grids: `v`, `a,b,c`, `min:max:xF` (or `min:max:F`) and `min:max:+d`.

use std::fmt;

/// Longest grid a single flag may expand to.
pub const MAX_GRID_LEN: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridError(pub String);

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for GridError {}

fn err<T>(msg: impl Into<String>) -> Result<T, GridError> {
    Err(GridError(msg.into()))
}

enum Step {
    Factor(f64),
    Increment(f64),
}

fn parse_step(text: &str) -> Result<Step, GridError> {
    let text = text.trim();
    let number = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GridError(format!("bad grid step {text:?}")))
    };
    let step = if let Some(rest) = text.strip_prefix('+') {
        Step::Increment(number(rest)?)
    } else if let Some(rest) = text.strip_prefix(['x', 'X', '*']) {
        Step::Factor(number(rest)?)
    } else {
        Step::Factor(number(text)?)
    };
    match step {
        Step::Factor(f) if f <= 1.0 => err(format!("grid factor must exceed 1, got {f}")),
        Step::Increment(d) if d <= 0.0 => err(format!("grid increment must be positive, got {d}")),
        s => Ok(s),
    }
}

fn split_range(spec: &str) -> Option<(&str, &str, &str)> {
    let mut parts = spec.split(':');
    let out = (parts.next()?, parts.next()?, parts.next()?);
    parts.next().is_none().then_some(out)
}

// Values from additive steps are rounded to 1e-12 so that 0.2 + 7·0.1 prints as 0.9.
fn round_additive(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

/// Expands a real-valued grid.
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>, GridError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| GridError(format!("not a finite number: {:?}", s.trim())))
    };
    if spec.contains(':') {
        let Some((lo, hi, step)) = split_range(spec) else {
            return err(format!("range grid must be min:max:step, got {spec:?}"));
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return err(format!("grid minimum {lo} exceeds maximum {hi}"));
        }
        let slack = 1e-9 * hi.abs().max(1.0);
        let mut values = Vec::new();
        match parse_step(step)? {
            Step::Increment(d) => {
                let count = ((hi - lo) / d + 1e-9).floor() as usize + 1;
                if count > MAX_GRID_LEN {
                    return err(format!("grid has {count} points, limit is {MAX_GRID_LEN}"));
                }
                values.extend((0..count).map(|i| round_additive(lo + i as f64 * d)));
            }
            Step::Factor(f) => {
                if lo <= 0.0 {
                    return err("a multiplicative grid needs a positive minimum");
                }
                let mut v = lo;
                while v <= hi + slack {
                    values.push(v);
                    if values.len() > MAX_GRID_LEN {
                        return err(format!("grid exceeds {MAX_GRID_LEN} points"));
                    }
                    v *= f;
                }
            }
        }
        Ok(values)
    } else {
        let values = spec.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
        if values.len() > MAX_GRID_LEN {
            return err(format!("grid exceeds {MAX_GRID_LEN} points"));
        }
        Ok(values)
    }
}

/// Expands a grid of non-negative integers. Multiplicative steps are rounded
/// to the nearest integer and duplicates removed.
pub fn parse_int_grid(spec: &str) -> Result<Vec<u64>, GridError> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u64>()
            .map_err(|_| GridError(format!("not a non-negative integer: {:?}", s.trim())))
    };
    if spec.contains(':') {
        let Some((lo, hi, step)) = split_range(spec) else {
            return err(format!("range grid must be min:max:step, got {spec:?}"));
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return err(format!("grid minimum {lo} exceeds maximum {hi}"));
        }
        let mut values: Vec<u64> = Vec::new();
        match parse_step(step)? {
            Step::Increment(d) => {
                if d.fract() != 0.0 {
                    return err(format!("integer grid needs an integer increment, got {d}"));
                }
                let d = d as u64;
                let count = (hi - lo) / d + 1;
                if count > MAX_GRID_LEN as u64 {
                    return err(format!("grid has {count} points, limit is {MAX_GRID_LEN}"));
                }
                values.extend((0..count).map(|i| lo + i * d));
            }
            Step::Factor(f) => {
                if lo == 0 {
                    return err("a multiplicative grid needs a positive minimum");
                }
                let mut v = lo as f64;
                while v.round() <= hi as f64 {
                    let r = v.round() as u64;
                    if values.last() != Some(&r) {
                        values.push(r);
                    }
                    if values.len() > MAX_GRID_LEN {
                        return err(format!("grid exceeds {MAX_GRID_LEN} points"));
                    }
                    v *= f;
                }
            }
        }
        Ok(values)
    } else {
        let values = spec.split(',').map(parse).collect::<Result<Vec<_>, _>>()?;
        if values.len() > MAX_GRID_LEN {
            return err(format!("grid exceeds {MAX_GRID_LEN} points"));
        }
        Ok(values)
    }
}
