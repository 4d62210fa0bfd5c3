//! Small helpers shared by every table: row validation and entropies.

use crate::error::{Error, Result};

/// Tolerance on the total mass of a probability row.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Entries strictly below this are treated as zero when a row is built.
pub const CLAMP_BELOW: f64 = 1e-15;

/// Validates a probability row in place.
///
/// Entries in `[0, CLAMP_BELOW)` are zeroed; if any were, the row is
/// renormalised. Untouched rows keep their exact bits, so a table that was
/// already clean survives any number of load/save cycles unchanged.
pub fn sanitize_row(row: &mut [f64], what: impl Fn() -> String) -> Result<()> {
    let mut sum = 0.0;
    for &p in row.iter() {
        if !p.is_finite() || p < -CLAMP_BELOW {
            return Err(Error::InvalidProbability {
                what: what(),
                value: p,
            });
        }
        sum += p;
    }
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { what: what(), sum });
    }
    let mut clamped = false;
    for p in row.iter_mut() {
        if *p != 0.0 && *p < CLAMP_BELOW {
            *p = 0.0;
            clamped = true;
        }
    }
    if clamped {
        let total: f64 = row.iter().sum();
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(())
}

/// Checks a probability parameter lies in `[0, 1]`.
pub fn check_probability(value: f64, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || value.is_nan() {
        return Err(Error::InvalidProbability {
            what: what.to_string(),
            value,
        });
    }
    Ok(())
}

/// `-p log2 p` with `0 log 0 = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy in bits.
pub fn entropy_bits(pmf: &[f64]) -> f64 {
    pmf.iter().map(|&p| plogp(p)).sum()
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

/// Numerically stable `ln(sum(exp(v)))`, ignoring `-inf` entries.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + s.ln()
}

/// Formats a float with 12 significant digits, the precision of every CSV
/// the tools emit.
pub fn fmt_sig(value: f64) -> String {
    const DIGITS: i32 = 12;
    if value == 0.0 || !value.is_finite() {
        return if value.is_finite() {
            "0".into()
        } else {
            value.to_string()
        };
    }
    let magnitude = value.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{:.*e}", (DIGITS - 1) as usize, value);
    }
    let decimals = (DIGITS - 1 - magnitude).max(0) as usize;
    let s = format!("{value:.decimals$}");
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".into()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamps_tiny_entries_and_renormalizes() {
        let mut row = vec![0.5, 0.5 - 1e-16, 1e-16];
        sanitize_row(&mut row, || "row".into()).unwrap();
        assert_eq!(row[2], 0.0);
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clean_rows_keep_their_bits() {
        let original = vec![0.1, 0.2, 0.7000000000000001];
        let mut row = original.clone();
        sanitize_row(&mut row, || "row".into()).unwrap();
        assert_eq!(row, original);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            sanitize_row(&mut [0.5, 0.6], || "r".into()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            sanitize_row(&mut [1.5, -0.5], || "r".into()),
            Err(Error::InvalidProbability { .. })
        ));
    }

    #[test]
    fn entropies() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((entropy_bits(&[0.25; 4]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn significant_digits() {
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.531004406410), "0.53100440641");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(
            fmt_sig(1e-9),
            "1e-9".replace("1e-9", &format!("{:.11e}", 1e-9))
        );
    }

    #[test]
    fn lse() {
        let v = [0.0f64.ln(), 0.5f64.ln(), 0.25f64.ln()];
        assert!((log_sum_exp(&v) - 0.75f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }
}
