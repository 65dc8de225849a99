//! Shortest round-trip number formatting shared by the DSL printer and CSV
//! output.

/// Formats a double so that parsing the text gives back the same bits
/// (modulo the sign of zero). Integers print without a fractional part,
/// very large or small magnitudes in exponent form.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else if v == 0.0 {
        "0".to_string()
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v}")
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_f64;

    #[test]
    fn round_trips() {
        for v in [0.1, -2.0, 1e-7, 1e300, 123456.789, -1.5e-5, f64::MIN_POSITIVE, 1.0 / 3.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
        assert_eq!(fmt_f64(-2.0), "-2");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
    }
}
