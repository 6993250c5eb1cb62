//! Discrete fractional derivative operators on equispaced samples: left,
//! right, and shifted Grünwald–Letnikov sums, plus an analytic
//! Riemann–Liouville oracle for monomials.

use crate::error::{Error, Result};
use crate::special::{gamma, GlWeights};

/// Samples x_0..x_n of a function at the equispaced nodes t_i = a + i·h.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    h: f64,
    values: Vec<f64>,
}

impl GridSamples {
    /// Wraps a sample vector with its grid step.
    ///
    /// Requires a positive finite step and at least two finite samples.
    pub fn new(h: f64, values: Vec<f64>) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::Domain(format!(
                "grid step must be positive and finite, got {h}"
            )));
        }
        if values.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least two samples, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("samples must be finite".into()));
        }
        Ok(GridSamples { h, values })
    }

    /// Grid step h.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of subintervals n (one less than the number of samples).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// The samples x_0..x_n.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_index(i: usize, max: usize, len: usize) -> Result<()> {
    if i > max {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    Ok(())
}

fn check_weights(weights: &GlWeights, needed: usize) -> Result<()> {
    if weights.max_index() < needed {
        return Err(Error::InsufficientWeights {
            needed,
            available: weights.max_index(),
        });
    }
    Ok(())
}

/// Left Grünwald–Letnikov derivative at node i:
/// h^{-alpha} Σ_{k=0}^{i} w_k x_{i-k}.
///
/// Truncating the sum at k = i extends the function by zero to the left of
/// the grid.
pub fn gl_left(samples: &GridSamples, weights: &GlWeights, i: usize) -> Result<f64> {
    let n = samples.n();
    check_index(i, n, n + 1)?;
    check_weights(weights, i)?;
    let w = weights.weights();
    let x = samples.values();
    let mut sum = 0.0;
    for k in 0..=i {
        sum += w[k] * x[i - k];
    }
    Ok(sum / samples.h().powf(weights.alpha()))
}

/// Right Grünwald–Letnikov derivative at node i:
/// h^{-alpha} Σ_{k=0}^{n-i} w_k x_{i+k}.
pub fn gl_right(samples: &GridSamples, weights: &GlWeights, i: usize) -> Result<f64> {
    let n = samples.n();
    check_index(i, n, n + 1)?;
    check_weights(weights, n - i)?;
    let w = weights.weights();
    let x = samples.values();
    let mut sum = 0.0;
    for k in 0..=(n - i) {
        sum += w[k] * x[i + k];
    }
    Ok(sum / samples.h().powf(weights.alpha()))
}

/// Shifted left Grünwald–Letnikov derivative at node i:
/// h^{-alpha} Σ_{k=0}^{i} w_k x_{i-k+1}.
///
/// The k = 0 term reads one node to the right, so the operator is defined
/// for i ≤ n−1 only; the sum's upper limit stays at i, mirroring the
/// unshifted truncation.
pub fn gl_left_shifted(samples: &GridSamples, weights: &GlWeights, i: usize) -> Result<f64> {
    let n = samples.n();
    check_index(i, n - 1, n + 1)?;
    check_weights(weights, i)?;
    let w = weights.weights();
    let x = samples.values();
    let mut sum = 0.0;
    for k in 0..=i {
        sum += w[k] * x[i - k + 1];
    }
    Ok(sum / samples.h().powf(weights.alpha()))
}

/// Analytic left Riemann–Liouville derivative of t^p (with a = 0):
/// Γ(p+1)/Γ(p+1−alpha) · t^{p−alpha}.
pub fn rl_monomial(p: f64, alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    if !(p >= 0.0) {
        return Err(Error::Domain(format!(
            "monomial power must be nonnegative, got {p}"
        )));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "evaluation point must be positive, got {t}"
        )));
    }
    Ok(gamma(p + 1.0)? / gamma(p + 1.0 - alpha)? * t.powf(p - alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn monomial_samples(p: f64, n: usize) -> GridSamples {
        let h = 1.0 / n as f64;
        let values = (0..=n).map(|i| (i as f64 * h).powf(p)).collect();
        GridSamples::new(h, values).unwrap()
    }

    #[test]
    fn grid_samples_validation() {
        assert!(GridSamples::new(0.1, vec![0.0, 1.0]).is_ok());
        assert!(GridSamples::new(0.0, vec![0.0, 1.0]).is_err());
        assert!(GridSamples::new(-0.1, vec![0.0, 1.0]).is_err());
        assert!(GridSamples::new(0.1, vec![1.0]).is_err());
        assert!(GridSamples::new(0.1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn gl_left_single_term() {
        let samples = GridSamples::new(0.25, vec![3.0, 0.0, 0.0]).unwrap();
        let weights = GlWeights::new(0.5, 2).unwrap();
        let got = gl_left(&samples, &weights, 0).unwrap();
        assert_relative_eq!(got, 3.0 / 0.25_f64.powf(0.5), max_relative = 1e-15);
    }

    #[test]
    fn gl_left_matches_monomial_oracle() {
        let n = 10_000;
        let samples = monomial_samples(2.0, n);
        let weights = GlWeights::new(0.5, n).unwrap();
        let got = gl_left(&samples, &weights, n).unwrap();
        let reference = rl_monomial(2.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(reference, 1.50450555612735, max_relative = 1e-12);
        assert!((got - reference).abs() <= 0.01, "{got} vs {reference}");
    }

    #[test]
    fn gl_left_constant_oracle() {
        let n = 10_000;
        let samples = GridSamples::new(1.0 / n as f64, vec![1.0; n + 1]).unwrap();
        let weights = GlWeights::new(0.5, n).unwrap();
        let got = gl_left(&samples, &weights, n).unwrap();
        let reference = rl_monomial(0.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(reference, 0.5641895835477563, max_relative = 1e-12);
        assert!((got - reference).abs() <= 0.01);
    }

    #[test]
    fn gl_right_single_term() {
        let samples = GridSamples::new(0.25, vec![0.0, 0.0, 5.0]).unwrap();
        let weights = GlWeights::new(0.5, 2).unwrap();
        let got = gl_right(&samples, &weights, 2).unwrap();
        assert_relative_eq!(got, 5.0 / 0.25_f64.powf(0.5), max_relative = 1e-15);
    }

    #[test]
    fn gl_right_constant_oracle() {
        let n = 10_000;
        let samples = GridSamples::new(1.0 / n as f64, vec![1.0; n + 1]).unwrap();
        let weights = GlWeights::new(0.5, n).unwrap();
        let got = gl_right(&samples, &weights, 0).unwrap();
        assert!((got - 0.5641895835477563).abs() <= 0.01);
    }

    #[test]
    fn gl_right_is_gl_left_of_reversed_samples() {
        let mut rng = StdRng::seed_from_u64(42);
        let n = 37;
        let values: Vec<f64> = (0..=n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let reversed: Vec<f64> = values.iter().rev().copied().collect();
        let samples = GridSamples::new(0.05, values).unwrap();
        let mirrored = GridSamples::new(0.05, reversed).unwrap();
        let weights = GlWeights::new(0.3, n).unwrap();
        for i in 0..=n {
            let right = gl_right(&samples, &weights, i).unwrap();
            let left = gl_left(&mirrored, &weights, n - i).unwrap();
            assert_eq!(right, left, "i = {i}");
        }
    }

    #[test]
    fn gl_duality_on_symmetric_samples() {
        let n = 24;
        let h = 1.0 / n as f64;
        // symmetric about the midpoint: x(t) = (t - 1/2)^2
        let values: Vec<f64> = (0..=n)
            .map(|i| (i as f64 * h - 0.5).powi(2))
            .collect();
        let samples = GridSamples::new(h, values).unwrap();
        let weights = GlWeights::new(0.5, n).unwrap();
        for i in 0..=n {
            let right = gl_right(&samples, &weights, i).unwrap();
            let left = gl_left(&samples, &weights, n - i).unwrap();
            assert!(
                (right - left).abs() <= 1e-12 * right.abs().max(1.0),
                "i = {i}: {right} vs {left}"
            );
        }
    }

    #[test]
    fn gl_left_shifted_single_term() {
        let samples = GridSamples::new(0.25, vec![7.0, 2.0, 0.0]).unwrap();
        let weights = GlWeights::new(0.5, 2).unwrap();
        let got = gl_left_shifted(&samples, &weights, 0).unwrap();
        assert_relative_eq!(got, 2.0 / 0.25_f64.powf(0.5), max_relative = 1e-15);
    }

    #[test]
    fn gl_left_shifted_matches_monomial_oracle_at_interior_point() {
        let n = 10_000;
        let samples = monomial_samples(2.0, n);
        let weights = GlWeights::new(0.5, n).unwrap();
        let got = gl_left_shifted(&samples, &weights, n / 2).unwrap();
        let reference = rl_monomial(2.0, 0.5, 0.5).unwrap();
        assert!((got - reference).abs() <= 0.01, "{got} vs {reference}");
    }

    #[test]
    fn gl_left_shifted_zero_samples() {
        let samples = GridSamples::new(0.1, vec![0.0; 11]).unwrap();
        let weights = GlWeights::new(0.4, 10).unwrap();
        assert_eq!(gl_left_shifted(&samples, &weights, 5).unwrap(), 0.0);
    }

    #[test]
    fn gl_index_errors() {
        let samples = GridSamples::new(0.1, vec![0.0; 11]).unwrap();
        let weights = GlWeights::new(0.4, 10).unwrap();
        assert_eq!(
            gl_left(&samples, &weights, 11),
            Err(Error::IndexOutOfRange { index: 11, len: 11 })
        );
        assert_eq!(
            gl_right(&samples, &weights, 11),
            Err(Error::IndexOutOfRange { index: 11, len: 11 })
        );
        assert_eq!(
            gl_left_shifted(&samples, &weights, 10),
            Err(Error::IndexOutOfRange { index: 10, len: 11 })
        );
    }

    #[test]
    fn gl_insufficient_weights() {
        let samples = GridSamples::new(0.1, vec![0.0; 11]).unwrap();
        let weights = GlWeights::new(0.4, 3).unwrap();
        assert_eq!(
            gl_left(&samples, &weights, 5),
            Err(Error::InsufficientWeights {
                needed: 5,
                available: 3
            })
        );
        assert_eq!(
            gl_right(&samples, &weights, 5),
            Err(Error::InsufficientWeights {
                needed: 5,
                available: 3
            })
        );
    }

    #[test]
    fn gl_left_is_linear() {
        let mut rng = StdRng::seed_from_u64(7);
        let n = 24;
        let xs: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ys: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (1.7, -0.6);
        let combined: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| a * x + b * y).collect();
        let h = 0.04;
        let sx = GridSamples::new(h, xs).unwrap();
        let sy = GridSamples::new(h, ys).unwrap();
        let sc = GridSamples::new(h, combined).unwrap();
        let weights = GlWeights::new(0.6, n).unwrap();
        for i in 0..=n {
            let lhs = gl_left(&sc, &weights, i).unwrap();
            let rhs = a * gl_left(&sx, &weights, i).unwrap() + b * gl_left(&sy, &weights, i).unwrap();
            assert!(
                (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0),
                "i = {i}: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn gl_left_first_order_convergence() {
        let reference = rl_monomial(2.0, 0.5, 1.0).unwrap();
        let error_at = |n: usize| {
            let samples = monomial_samples(2.0, n);
            let weights = GlWeights::new(0.5, n).unwrap();
            (gl_left(&samples, &weights, n).unwrap() - reference).abs()
        };
        for n in [64, 128, 256] {
            let ratio = error_at(n) / error_at(2 * n);
            assert!(
                (1.5..=2.5).contains(&ratio),
                "n = {n}: ratio {ratio} outside [1.5, 2.5]"
            );
        }
    }

    #[test]
    fn rl_monomial_frozen_values() {
        assert_relative_eq!(
            rl_monomial(2.0, 0.5, 1.0).unwrap(),
            1.50450555612735,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            rl_monomial(1.0, 0.5, 1.0).unwrap(),
            std::f64::consts::FRAC_2_SQRT_PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            rl_monomial(0.0, 0.5, 1.0).unwrap(),
            0.5641895835477563,
            max_relative = 1e-12
        );
    }

    #[test]
    fn rl_monomial_domain_errors() {
        assert!(matches!(
            rl_monomial(2.0, 1.2, 1.0),
            Err(Error::AlphaOutOfRange { .. })
        ));
        assert!(matches!(rl_monomial(-1.0, 0.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(rl_monomial(2.0, 0.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(rl_monomial(2.0, 0.5, -3.0), Err(Error::Domain(_))));
    }
}
