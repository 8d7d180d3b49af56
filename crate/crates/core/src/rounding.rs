//! The single rounding routine for every "nearest integer" parameter.

/// Nearest integer with ties rounded up (2.5 → 3, -2.5 → -2).
pub fn round_half_up(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_go_up() {
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.4999), 2);
        assert_eq!(round_half_up(-2.5), -2);
        assert_eq!(round_half_up(0.0), 0);
        assert_eq!(round_half_up(4.0 * 0.6), 2);
    }
}
