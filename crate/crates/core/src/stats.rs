//! Small statistics helpers shared by the analytic bounds and reports.

/// Binomial coefficient as a float. Exact for every value below 2^53.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    // Every partial product is an integer; rounding removes division residue.
    if acc < 9.0e15 {
        acc.round()
    } else {
        acc
    }
}

/// `C(n,k) p^k (1-p)^(n-k)`, with `0^0 = 1`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    binomial(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
}

/// Sum of binomial pmf terms over `lo..=hi` (clamped to `0..=n`).
pub fn binomial_range(n: u64, lo: u64, hi: u64, p: f64) -> f64 {
    (lo..=hi.min(n)).map(|k| binomial_pmf(n, k, p)).sum()
}

/// Mean and standard error (sample std with n-1 divisor, over sqrt(n)).
/// A single value has standard error 0.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}

/// Sample standard deviation with the n-1 divisor.
pub fn sample_std(values: &[f64]) -> f64 {
    let (_, se) = mean_stderr(values);
    se * (values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(10, 0), 1.0);
        assert_eq!(binomial(10, 10), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(52, 5), 2_598_960.0);
    }

    #[test]
    fn pmf_handles_zero_probability() {
        assert_eq!(binomial_pmf(4, 0, 0.0), 1.0);
        assert_eq!(binomial_pmf(4, 1, 0.0), 0.0);
    }

    #[test]
    fn mean_stderr_of_one_two_three() {
        let (m, se) = mean_stderr(&[1.0, 2.0, 3.0]);
        assert!((m - 2.0).abs() < 1e-15);
        assert!((se - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_stderr(&[0.7]), (0.7, 0.0));
    }
}
