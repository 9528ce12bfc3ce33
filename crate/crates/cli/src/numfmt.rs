//! Console number formatting: six significant digits.

/// `%g`-style with six significant digits.
pub fn g6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // Rounding may carry into a new digit (e.g. 999999.5); fall back to exponent form.
        if s.trim_start_matches('-').replace('.', "").trim_start_matches('0').len() > 6 && decimals == 0 {
            return trim_exp(format!("{x:.5e}"));
        }
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        trim_exp(format!("{x:.5e}"))
    }
}

fn trim_exp(s: String) -> String {
    match s.split_once('e') {
        Some((m, e)) => {
            let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
            format!("{m}e{e}")
        }
        None => s,
    }
}
