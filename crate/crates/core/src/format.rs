//! Deterministic number formatting for text reports.

/// Formats `x` with `sig` significant digits, in the style of C's `%g`.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    // rounding can bump the exponent (9.9999996 -> 10.0000)
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
    let exp = if rounded != 0.0 {
        rounded.abs().log10().floor() as i32
    } else {
        exp
    };
    if exp < -5 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').unwrap_or((&s, "0"));
        format!("{}e{}", trim_zeros(mantissa), e)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig;

    #[test]
    fn matches_printf_g_style() {
        assert_eq!(sig(2950.84, 6), "2950.84");
        assert_eq!(sig(292.93012, 6), "292.93");
        assert_eq!(sig(1.0174418604e8, 6), "1.01744e8");
        assert_eq!(sig(-71.8511, 6), "-71.8511");
        assert_eq!(sig(0.0, 6), "0");
        assert_eq!(sig(1.5e-7, 6), "1.5e-7");
        assert_eq!(sig(9.9999996, 6), "10");
        assert_eq!(sig(153.0, 6), "153");
    }
}
