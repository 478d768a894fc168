//! Small numeric helpers: compensated summation, basic sample statistics,
//! the normal CDF, and the least-squares fits used by the expansion checks.

/// Neumaier-compensated sum. Used wherever many terms of mixed magnitude
/// are accumulated (harmonic tails, entropy sums, moments).
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance (n-1 denominator); 0 for fewer than two samples.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    compensated_sum(values.iter().map(|v| (v - m) * (v - m))) / (n - 1) as f64
}

/// Complementary error function, fractional error below 1.2e-7 everywhere
/// (Chebyshev fit; sufficient for CDF comparisons at the 1e-2 scale used here).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let ans = t * (-z * z
        - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807
                            + t * (-1.13520398
                                + t * (1.48851587
                                    + t * (-0.82215223 + t * 0.17087277)))))))))
    .exp();
    if x >= 0.0 {
        ans
    } else {
        2.0 - ans
    }
}

pub fn erf(x: f64) -> f64 {
    1.0 - erfc(x)
}

/// CDF of Normal(mean, sd^2).
pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// Least-squares slope of y = a*x (line through the origin).
pub fn fit_slope_through_origin(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let sxy = compensated_sum(xs.iter().zip(ys).map(|(x, y)| x * y));
    let sxx = compensated_sum(xs.iter().map(|x| x * x));
    sxy / sxx
}

/// Least-squares coefficient of y = c*x^2 (pure quadratic through the origin).
pub fn fit_quadratic_coefficient(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let sx2y = compensated_sum(xs.iter().zip(ys).map(|(x, y)| x * x * y));
    let sx4 = compensated_sum(xs.iter().map(|x| x.powi(4)));
    sx2y / sx4
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_lost_digits() {
        // 1 + 1e-16 repeated: naive summation in this order loses the tail.
        let mut values = vec![1.0];
        values.extend(std::iter::repeat(1e-16).take(10_000));
        let s = compensated_sum(values.iter().copied());
        assert!((s - (1.0 + 1e-12)).abs() < 1e-15, "s = {s:.17e}");
    }

    #[test]
    fn erf_reference_values() {
        // Abramowitz & Stegun table values, at the fit's 1.2e-7 accuracy.
        assert!((erf(0.0)).abs() < 2e-7);
        assert!((erf(0.5) - 0.5204998778).abs() < 1e-6);
        assert!((erf(1.0) - 0.8427007929).abs() < 1e-6);
        assert!((erf(2.0) - 0.9953222650).abs() < 1e-6);
        assert!((erf(-1.0) + 0.8427007929).abs() < 1e-6);
    }

    #[test]
    fn normal_cdf_symmetry_and_tails() {
        assert!((normal_cdf(0.0, 0.0, 1.0) - 0.5).abs() < 1e-7);
        let p = normal_cdf(1.3, 0.0, 1.0);
        let q = normal_cdf(-1.3, 0.0, 1.0);
        assert!((p + q - 1.0).abs() < 1e-10);
        assert!(normal_cdf(8.0, 0.0, 1.0) > 1.0 - 1e-14);
    }

    #[test]
    fn variance_of_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_variance(&[7.0]), 0.0);
    }

    #[test]
    fn fits_recover_exact_coefficients() {
        let xs: Vec<f64> = (-5..=5).map(|i| i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| -3.25 * x).collect();
        assert!((fit_slope_through_origin(&xs, &ys) + 3.25).abs() < 1e-12);
        let ys2: Vec<f64> = xs.iter().map(|x| 0.75 * x * x).collect();
        assert!((fit_quadratic_coefficient(&xs, &ys2) - 0.75).abs() < 1e-12);
    }
}
