//! Parsers for command-line and config-file values.

use std::f64::consts::PI;

/// Longest worker list a range expression may expand to.
pub const MAX_WORKER_LIST: usize = 4096;

/// A positive length: a plain number, `pi`, `π`, or a multiple such as `16pi`,
/// `16*pi` or `0.5π`.
pub fn parse_length(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (coef, has_pi) = if let Some(c) = lower.strip_suffix("pi").or_else(|| lower.strip_suffix('π')) {
        (c.trim_end().trim_end_matches('*').trim_end(), true)
    } else {
        (lower.as_str(), false)
    };
    let value = match (coef, has_pi) {
        ("", true) => PI,
        (c, _) => {
            let v: f64 = c.parse().map_err(|_| format!("'{t}' is not a length"))?;
            if has_pi {
                v * PI
            } else {
                v
            }
        }
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(format!("length '{t}' must be positive and finite"));
    }
    Ok(value)
}

fn parse_triple<T: Copy>(text: &str, what: &str, item: impl Fn(&str) -> Result<T, String>) -> Result<[T; 3], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [one] => {
            let v = item(one)?;
            Ok([v; 3])
        }
        [a, b, c] => Ok([item(a)?, item(b)?, item(c)?]),
        _ => Err(format!("'{text}': expected one {what} or three separated by commas")),
    }
}

/// Box lengths: `2pi` or `16pi,2pi,2pi`.
pub fn parse_lengths(text: &str) -> Result<[f64; 3], String> {
    parse_triple(text, "length", parse_length)
}

/// Grid sizes: `64` or `128,4,4`.
pub fn parse_sizes(text: &str) -> Result<[usize; 3], String> {
    parse_triple(text, "grid size", |s| {
        let n: usize = s.parse().map_err(|_| format!("'{s}' is not a grid size"))?;
        if n < 4 || !n.is_multiple_of(2) {
            return Err(format!("grid size {n} must be even and at least 4"));
        }
        Ok(n)
    })
}

/// Integer mode numbers: `1,0,0`.
pub fn parse_modes(text: &str) -> Result<[i64; 3], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("'{text}': expected three mode numbers"));
    }
    let mut out = [0; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not an integer"))?;
    }
    Ok(out)
}

/// Axis name or index: `x`, `y`, `z`, `0`, `1`, `2`.
pub fn parse_axis(text: &str) -> Result<usize, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "x" | "0" => Ok(0),
        "y" | "1" => Ok(1),
        "z" | "2" => Ok(2),
        other => Err(format!("'{other}' is not an axis")),
    }
}

pub fn parse_bool(text: &str) -> Result<bool, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("'{other}' is not a boolean")),
    }
}

pub fn parse_positive_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("{v} must be positive and finite"));
    }
    Ok(v)
}

pub fn parse_non_negative_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("{v} must be non-negative and finite"));
    }
    Ok(v)
}

pub fn parse_positive_int(text: &str) -> Result<u64, String> {
    let v: u64 = text.trim().parse().map_err(|_| format!("'{text}' is not a positive integer"))?;
    if v == 0 {
        return Err("value must be at least 1".into());
    }
    Ok(v)
}

pub fn parse_count(text: &str) -> Result<u64, String> {
    text.trim().parse().map_err(|_| format!("'{text}' is not a non-negative integer"))
}

/// Worker counts as a strictly increasing list. Accepts comma-separated items,
/// each a count or a range `a..b` (doubling), `a..b:x3` (geometric) or
/// `a..b:+2` (arithmetic). Ranges include `b` only when a step lands on it.
pub fn parse_worker_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out: Vec<usize> = Vec::new();
    for item in text.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(format!("'{text}' has an empty item"));
        }
        match item.split_once("..") {
            None => out.push(parse_worker(item)?),
            Some((lo, rest)) => {
                let (hi, step) = match rest.split_once(':') {
                    Some((hi, step)) => (hi, step.trim()),
                    None => (rest, "x2"),
                };
                let (lo, hi) = (parse_worker(lo.trim())?, parse_worker(hi.trim())?);
                if lo > hi {
                    return Err(format!("range '{item}' is empty"));
                }
                let next: Box<dyn Fn(usize) -> Option<usize>> = if let Some(f) = step.strip_prefix(['x', '*']) {
                    let f: usize = f.parse().map_err(|_| format!("'{step}' is not a step"))?;
                    if f < 2 {
                        return Err(format!("geometric step in '{item}' must be at least 2"));
                    }
                    Box::new(move |v: usize| v.checked_mul(f))
                } else if let Some(d) = step.strip_prefix('+') {
                    let d: usize = d.parse().map_err(|_| format!("'{step}' is not a step"))?;
                    if d == 0 {
                        return Err(format!("arithmetic step in '{item}' must be at least 1"));
                    }
                    Box::new(move |v: usize| v.checked_add(d))
                } else {
                    return Err(format!("step '{step}' must look like x2 or +1"));
                };
                let mut v = lo;
                loop {
                    out.push(v);
                    if out.len() > MAX_WORKER_LIST {
                        return Err(format!("'{text}' expands to more than {MAX_WORKER_LIST} counts"));
                    }
                    match next(v) {
                        Some(n) if n <= hi => v = n,
                        _ => break,
                    }
                }
            }
        }
        if out.len() > MAX_WORKER_LIST {
            return Err(format!("'{text}' expands to more than {MAX_WORKER_LIST} counts"));
        }
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("worker counts in '{text}' must be strictly increasing"));
    }
    Ok(out)
}

fn parse_worker(text: &str) -> Result<usize, String> {
    let v: usize = text.parse().map_err(|_| format!("'{text}' is not a worker count"))?;
    if v == 0 {
        return Err("worker count must be at least 1".into());
    }
    Ok(v)
}
