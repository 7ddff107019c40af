//! Fixed-precision number formatting for emitted reports.

pub const SIGNIFICANT_DIGITS: usize = 6;

/// `x` rounded to six significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest decimal text of `x` rounded to six significant digits, such as
/// `64.2031`, `1011510` or `0.0000568554`.
pub fn format_sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".to_string();
    }
    let r = round_sig(x);
    if r == 0.0 {
        return "0".to_string();
    }
    r.to_string()
}
