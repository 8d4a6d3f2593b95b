//! Decimal formatting shared by reports and CSV output.

/// `x` with 12 significant digits, trailing zeros trimmed, at least one decimal.
///
/// Values whose magnitude is below `1e-4` or at least `1e12` use exponent form.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs();
    if !(1e-4..1e12).contains(&mag) {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let mant = trim(mant);
        return format!("{mant}e{exp}");
    }
    let digits = 11 - mag.log10().floor() as i32;
    let s = format!("{x:.*}", digits.max(0) as usize);
    trim(&s)
}

fn trim(s: &str) -> String {
    if !s.contains('.') {
        return format!("{s}.0");
    }
    let t = s.trim_end_matches('0');
    if t.ends_with('.') {
        format!("{t}0")
    } else {
        t.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(1.0), "1.0");
        assert_eq!(num((-1.0f64).exp()), "0.367879441171");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(0.0), "0.0");
        assert_eq!(num(123456.0), "123456.0");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(0.75), "0.75");
    }
}
