//! Value parsers for command-line arguments.

use confocal::Sigma;

/// Largest integer below which every integer is an exact double.
const EXACT: u64 = 1 << 53;

/// A real number given as a decimal or as an exact fraction `p/q`.
///
/// Fractions are divided once in floating point, which rounds correctly as
/// long as `p` and `q` are exact doubles, so `3/8` is exactly `0.375` and
/// `1/3` is the double nearest to one third.
pub fn number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
        if q == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        if p.unsigned_abs() > EXACT || q.unsigned_abs() > EXACT {
            return Err(format!("{s:?} has terms beyond 2^53"));
        }
        return Ok(p as f64 / q as f64);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

/// Comma-separated numbers.
pub fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(number).collect()
}

pub fn sigma(s: &str) -> Result<Sigma, String> {
    s.parse().map_err(|e: confocal::Error| e.to_string())
}

/// `start:end:count`, an evenly spaced grid including both ends.
pub fn grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err(format!("expected start:end:count, got {s:?}"));
    };
    let (start, end) = (number(start)?, number(end)?);
    let count: usize = count.trim().parse().map_err(|_| format!("bad count in {s:?}"))?;
    match count {
        0 => Err("grid needs at least one point".into()),
        1 => Ok(vec![start]),
        _ => Ok((0..count)
            .map(|k| start + (end - start) * k as f64 / (count - 1) as f64)
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_round_once() {
        assert_eq!(number("3/8").unwrap(), 0.375);
        assert_eq!(number("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(number(" -2/4 ").unwrap(), -0.5);
        assert!(number("1/0").is_err());
        assert!(number("nan").is_err());
        assert!(number("9007199254740993/2").is_err());
    }

    #[test]
    fn lists_and_grids() {
        assert_eq!(list("1,0.5,1/4").unwrap(), vec![1.0, 0.5, 0.25]);
        assert_eq!(grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(grid("0:1").is_err());
        assert_eq!(sigma("h1h1").unwrap(), Sigma::h1h1());
        assert_eq!(sigma("1,0,1").unwrap(), Sigma(vec![1, 0, 1]));
    }
}
