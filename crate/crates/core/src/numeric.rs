//! Small numeric helpers used throughout the crate.

/// Max-shifted log of a sum of exponentials.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = StreamingLogSumExp::new();
    for &x in xs {
        acc.push(x);
    }
    acc.value()
}

/// Online log-sum-exp accumulator; single pass, no stored table.
#[derive(Debug, Clone, Copy)]
pub struct StreamingLogSumExp {
    max: f64,
    sum: f64,
}

impl StreamingLogSumExp {
    pub fn new() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    pub fn push(&mut self, x: f64) {
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// Merge another accumulator into this one (chunked parallel reduction).
    pub fn merge(&mut self, other: StreamingLogSumExp) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max <= self.max {
            self.sum += other.sum * (other.max - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - other.max).exp() + other.sum;
            self.max = other.max;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

impl Default for StreamingLogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

/// Logistic function 1/(1+e^{-t}), evaluated without overflow.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Binary entropy -p ln p - (1-p) ln(1-p) with 0 ln 0 = 0.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// 17 significant digits: enough to reparse any f64 to identical bits.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lse_matches_direct_sum() {
        let xs = [0.3f64, -1.2, 2.5, 0.0];
        let direct = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_abs_diff_eq!(log_sum_exp(&xs), direct, epsilon = 1e-14);
    }

    #[test]
    fn lse_survives_large_magnitudes() {
        let xs = [1000.0, 1000.5];
        let expected = 1000.5 + (1.0 + (-0.5f64).exp()).ln();
        assert_abs_diff_eq!(log_sum_exp(&xs), expected, epsilon = 1e-12);
    }

    #[test]
    fn lse_empty_is_neg_infinity() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn streaming_merge_agrees_with_sequential() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64) * 0.37 - 20.0).collect();
        let mut a = StreamingLogSumExp::new();
        let mut b = StreamingLogSumExp::new();
        for &x in &xs[..40] {
            a.push(x);
        }
        for &x in &xs[40..] {
            b.push(x);
        }
        a.merge(b);
        assert_abs_diff_eq!(a.value(), log_sum_exp(&xs), epsilon = 1e-12);
    }

    #[test]
    fn logistic_symmetry() {
        assert_abs_diff_eq!(logistic(0.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(logistic(3.0) + logistic(-3.0), 1.0, epsilon = 1e-15);
        assert!(logistic(-800.0) >= 0.0 && logistic(800.0) <= 1.0);
    }

    #[test]
    fn entropy_edge_cases() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.5), std::f64::consts::LN_2, epsilon = 1e-15);
    }
}
