//! Verdict lines and the small numerical helpers the acceptance run shares.

use std::fmt;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub criterion: u8,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(criterion: u8, pass: bool, detail: impl Into<String>) -> Self {
        Self { criterion, pass, detail: detail.into() }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "criterion {}: {}  {}", self.criterion, if self.pass { "PASS" } else { "FAIL" }, self.detail)
    }
}

/// log₂ of successive error ratios for a sequence refined by halving.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_line() {
        assert_eq!(Verdict::new(3, false, "x = 1").to_string(), "criterion 3: FAIL  x = 1");
        assert!(Verdict::new(1, true, "").to_string().starts_with("criterion 1: PASS"));
    }

    #[test]
    fn orders_of_a_second_order_sequence() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
    }
}
