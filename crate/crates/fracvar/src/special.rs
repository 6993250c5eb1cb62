//! Gamma function, real-order binomial coefficients, and the weight table
//! used by Grünwald–Letnikov sums.

use crate::error::{Error, Result};
use std::f64::consts::PI;

#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function for real arguments via the Lanczos approximation (g = 7),
/// with the reflection formula for z < 0.5.
///
/// Relative accuracy is better than 1e-13 on [0.1, 30]. Arguments at zero or
/// a negative integer are poles and yield [`Error::GammaPole`].
pub fn gamma(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::Domain("gamma argument is NaN".into()));
    }
    if z <= 0.0 && z == z.floor() {
        return Err(Error::GammaPole { z });
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: f64) -> f64 {
    if z < 0.5 {
        PI / ((PI * z).sin() * gamma_unchecked(1.0 - z))
    } else {
        let x = z - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// Generalized binomial coefficient C(alpha, k) for real alpha,
/// computed as the product of (alpha - j) / (j + 1) over j < k.
pub fn binom_real(alpha: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc *= (alpha - j as f64) / (j as f64 + 1.0);
    }
    acc
}

/// Table of Grünwald–Letnikov weights w_k = (-1)^k C(alpha, k) for k = 0..=m.
///
/// The table is built by the recurrence w_0 = 1,
/// w_k = w_{k-1} (k - 1 - alpha) / k, which is numerically stable and avoids
/// gamma-ratio cancellation. For 0 < alpha < 1 the weights satisfy w_0 = 1,
/// w_1 = -alpha, w_k < 0 for k >= 1, and all partial sums are positive and
/// strictly decreasing.
#[derive(Debug, Clone, PartialEq)]
pub struct GlWeights {
    alpha: f64,
    w: Vec<f64>,
}

impl GlWeights {
    /// Builds the weight table for order `alpha` up to index `m` inclusive.
    ///
    /// `alpha` must lie strictly inside (0, 1).
    pub fn new(alpha: f64, m: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange { alpha });
        }
        let mut w = Vec::with_capacity(m + 1);
        w.push(1.0);
        for k in 1..=m {
            let prev = w[k - 1];
            w.push(prev * (k as f64 - 1.0 - alpha) / k as f64);
        }
        Ok(GlWeights { alpha, w })
    }

    /// Fractional order the table was built for.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Largest index m stored in the table.
    pub fn max_index(&self) -> usize {
        self.w.len() - 1
    }

    /// The weights w_0..=w_m.
    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Running sums S_m = sum of w_k for k <= m, one entry per weight.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut sums = Vec::with_capacity(self.w.len());
        let mut acc = 0.0;
        for &wk in &self.w {
            acc += wk;
            sums.push(acc);
        }
        sums
    }
}
