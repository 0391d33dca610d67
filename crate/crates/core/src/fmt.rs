//! Float rendering shared by every machine-readable output.

use serde_json::Value;

/// Significant digits used whenever a float is printed.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Text form with 12 significant digits; non-finite values print as
/// `-inf`, `inf` or `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".into();
    }
    let mag = r.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let decimals = (SIG_DIGITS as i32 - 1 - mag).max(0) as usize;
        let s = format!("{:.*}", decimals, r);
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{:.*e}", SIG_DIGITS - 1, r)
    }
}

/// JSON number rounded to 12 significant digits; non-finite values map to
/// `null`.
pub fn json_f64(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}
