//! Integer sequence specs: `n^p`, `c^n`, `(log n)^p`, a constant, or
//! `@path` with one integer per line.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("bad sequence spec at position {position} (`{token}`): {message}")]
pub struct SpecError {
    pub position: usize,
    pub token: String,
    pub message: String,
}

fn err(position: usize, token: &str, message: impl Into<String>) -> SpecError {
    SpecError {
        position,
        token: token.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSpec {
    /// `round(n^p)`.
    Power(f64),
    /// `round(c^n)`.
    Exponential(f64),
    /// `max(1, ceil((ln n)^p))`.
    LogPower(f64),
    Constant(u64),
    List(Vec<u64>),
}

fn exponent(text: &str, at: usize) -> Result<f64, SpecError> {
    let t = text.trim();
    let p: f64 = t.parse().map_err(|_| err(at, t, "expected a number"))?;
    if !(p > 0.0) || !p.is_finite() {
        return Err(err(at, t, "exponent must be positive (values must be positive integers)"));
    }
    Ok(p)
}

/// Parses `text`; `@path` is resolved relative to `base` when relative.
pub fn parse_sequence_spec(text: &str, base: Option<&Path>) -> Result<SequenceSpec, SpecError> {
    let lead = text.len() - text.trim_start().len();
    let s = text.trim();
    if s.is_empty() {
        return Err(err(0, "", "empty spec"));
    }
    if let Some(path) = s.strip_prefix('@') {
        let p = Path::new(path);
        let full = match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        };
        let body = std::fs::read_to_string(&full).map_err(|e| err(lead + 1, path, format!("cannot read: {e}")))?;
        let mut values = Vec::new();
        for (i, line) in body.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() {
                continue;
            }
            let v: u64 = l
                .parse()
                .map_err(|_| err(lead + 1, l, format!("line {} is not a nonnegative integer", i + 1)))?;
            if v == 0 {
                return Err(err(lead + 1, l, format!("line {} is zero", i + 1)));
            }
            values.push(v);
        }
        return Ok(SequenceSpec::List(values));
    }
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    for head in ["(logn)^", "(lnn)^"] {
        if let Some(rest) = compact.strip_prefix(head) {
            let at = lead + s.find('^').unwrap() + 1;
            return Ok(SequenceSpec::LogPower(exponent(rest, at)?));
        }
    }
    if let Some(rest) = compact.strip_prefix("n^") {
        let at = lead + s.find('^').unwrap() + 1;
        return Ok(SequenceSpec::Power(exponent(rest, at)?));
    }
    if let Some(base_txt) = compact.strip_suffix("^n") {
        let c: f64 = base_txt
            .parse()
            .map_err(|_| err(lead, base_txt, "expected a number before `^n`"))?;
        if !(c >= 1.0) || !c.is_finite() {
            return Err(err(lead, base_txt, "base must be at least 1"));
        }
        return Ok(SequenceSpec::Exponential(c));
    }
    match compact.parse::<u64>() {
        Ok(0) => Err(err(lead, &compact, "constant must be positive")),
        Ok(c) => Ok(SequenceSpec::Constant(c)),
        Err(_) => Err(err(lead, s, "expected n^p, c^n, (log n)^p, an integer or @file")),
    }
}

impl SequenceSpec {
    /// The first `n` values as floats; integers above 2^53 are rounded.
    pub fn values(&self, n: usize) -> Result<Vec<f64>, String> {
        let out: Vec<f64> = match self {
            SequenceSpec::Power(p) => (1..=n).map(|i| (i as f64).powf(*p).round()).collect(),
            SequenceSpec::Exponential(c) => (1..=n).map(|i| c.powf(i as f64).round()).collect(),
            SequenceSpec::LogPower(p) => (1..=n)
                .map(|i| (i as f64).ln().powf(*p).ceil().max(1.0))
                .collect(),
            SequenceSpec::Constant(c) => vec![*c as f64; n],
            SequenceSpec::List(v) => {
                if v.len() < n {
                    return Err(format!("list has {} entries, {n} needed", v.len()));
                }
                v[..n].iter().map(|&x| x as f64).collect()
            }
        };
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(format!("value {} overflows", i + 1));
        }
        Ok(out)
    }

    /// The first `n` values as exact integers.
    pub fn integers(&self, n: usize) -> Result<Vec<u64>, String> {
        let cap = (1u64 << 53) as f64;
        self.values(n)?
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                if v > cap {
                    Err(format!("value {} exceeds 2^53", i + 1))
                } else {
                    Ok(v as u64)
                }
            })
            .collect()
    }
}
