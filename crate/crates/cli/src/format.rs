//! Number formatting: 6 significant digits for people, 17 for machines.

/// `x` with 6 significant digits, fixed-point where that stays readable.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..6).contains(&mag) {
        format!("{:.*}", (5 - mag) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// Error bars only need two digits.
pub fn error_bar(x: f64) -> String {
    format!("{x:.1e}")
}

/// `x` with 17 significant digits.
pub fn machine(x: f64) -> String {
    format!("{x:.16e}")
}
