//! Plain-text number formatting shared by the CSV writers.

/// Scientific notation with 17 significant digits, enough to round-trip any
/// `f64`.
pub fn format_f64(x: f64) -> String {
    // adding zero turns -0.0 into 0.0
    format!("{:.16e}", x + 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, 0.0] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
