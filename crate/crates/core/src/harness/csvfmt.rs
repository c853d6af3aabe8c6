//! C-style scientific formatting for deterministic CSV output.

/// Format like printf's %.6e (two-digit exponent with sign).
pub fn sci(v: f64) -> String {
    if v == 0.0 {
        return "0.000000e+00".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let formatted = format!("{v:.6e}");
    // Rust emits e.g. 1.234567e3 / 1.234567e-3; normalize the exponent
    let (mantissa, exp) = formatted.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

pub fn write_csv<W: std::io::Write>(
    out: &mut W,
    header: &str,
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    writeln!(out, "{header}")?;
    for row in rows {
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_layout() {
        assert_eq!(sci(584.0), "5.840000e+02");
        assert_eq!(sci(-0.00123456), "-1.234560e-03");
        assert_eq!(sci(1.0), "1.000000e+00");
        assert_eq!(sci(0.0), "0.000000e+00");
        assert_eq!(sci(1.18e-1), "1.180000e-01");
    }
}
