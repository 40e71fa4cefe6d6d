//! Closed-form tail bounds and an exact oracle for Bernoulli sums.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest trial count accepted by [`exact_two_sided_tail`].
pub const EXACT_TAIL_MAX_TRIALS: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("eps must lie in (0, 1/2], got {0}")]
    EpsOutOfRange(f64),
    #[error("mean must be positive, got {0}")]
    NonPositiveMean(f64),
    #[error("success probabilities must lie in (0, 1], got {0}")]
    BadProbability(f64),
    #[error("at most {EXACT_TAIL_MAX_TRIALS} trials supported, got {0}")]
    TooManyTrials(usize),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

fn positive(name: &'static str, value: f64) -> Result<f64, BoundsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(BoundsError::NonPositive { name, value })
    }
}

/// Independent Bernoulli trials with individual success probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliSumSpec {
    p: Vec<f64>,
}

impl BernoulliSumSpec {
    pub fn new(p: Vec<f64>) -> Result<Self, BoundsError> {
        if let Some(&bad) = p.iter().find(|&&q| !(q > 0.0 && q <= 1.0)) {
            return Err(BoundsError::BadProbability(bad));
        }
        if p.is_empty() {
            return Err(BoundsError::NonPositiveMean(0.0));
        }
        Ok(Self { p })
    }

    pub fn uniform(m: usize, p: f64) -> Result<Self, BoundsError> {
        Self::new(vec![p; m])
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn mu(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Distribution of the number of successes.
    pub fn pmf(&self) -> Vec<f64> {
        let mut dist = vec![1.0];
        for &q in &self.p {
            let mut next = vec![0.0; dist.len() + 1];
            for (k, &w) in dist.iter().enumerate() {
                next[k] += w * (1.0 - q);
                next[k + 1] += w * q;
            }
            dist = next;
        }
        dist
    }
}

/// `exp(-eps^2 mu / 4)`, valid for `0 < eps <= 1/2`.
pub fn chernoff_upper(mu: f64, eps: f64) -> Result<f64, BoundsError> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(BoundsError::EpsOutOfRange(eps));
    }
    if !(mu > 0.0) {
        return Err(BoundsError::NonPositiveMean(mu));
    }
    Ok((-eps * eps * mu / 4.0).exp())
}

/// `P(|T - mu| >= eps mu)` computed from the full distribution of `T`.
pub fn exact_two_sided_tail(spec: &BernoulliSumSpec, eps: f64) -> Result<f64, BoundsError> {
    if spec.m() > EXACT_TAIL_MAX_TRIALS {
        return Err(BoundsError::TooManyTrials(spec.m()));
    }
    if !(eps > 0.0) {
        return Err(BoundsError::EpsOutOfRange(eps));
    }
    let mu = spec.mu();
    let threshold = eps * mu - 1e-12;
    Ok(spec
        .pmf()
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64 - mu).abs() >= threshold)
        .map(|(_, w)| w)
        .sum())
}

/// `exp(-D n r^2)`.
pub fn lemma1_ratio_bound(n: f64, r_n: f64, d_const: f64) -> Result<f64, BoundsError> {
    positive("n", n)?;
    positive("r_n", r_n)?;
    positive("D", d_const)?;
    Ok((-d_const * n * r_n * r_n).exp())
}

/// `(2d / r) exp(-D n r^4 / d^2)`.
pub fn lemma1_two_point_bound(n: f64, r_n: f64, d: f64, d_const: f64) -> Result<f64, BoundsError> {
    positive("n", n)?;
    positive("r_n", r_n)?;
    positive("d", d)?;
    positive("D", d_const)?;
    Ok(2.0 * d / r_n * (-d_const * n * r_n.powi(4) / (d * d)).exp())
}

/// Whether `d <= r^2 sqrt(n) / log n`, the range in which the two-point bound
/// is at most `(2d / r) exp(-D log^2 n)`.
pub fn two_point_specialization_applies(n: f64, r_n: f64, d: f64) -> bool {
    n > 1.0 && d <= r_n * r_n * n.sqrt() / n.ln()
}

/// Smallest `D` for which the two-point bound drops to 1 or below.
pub fn min_nonvacuous_two_point_constant(n: f64, r_n: f64, d: f64) -> f64 {
    let lead = 2.0 * d / r_n;
    if lead <= 1.0 {
        0.0
    } else {
        d * d * lead.ln() / (n * r_n.powi(4))
    }
}

/// Constant `c` with `freq = exp(-c base)`; infinite when `freq = 0`.
pub fn implied_constant(failure_freq: f64, base: f64) -> f64 {
    if failure_freq <= 0.0 {
        f64::INFINITY
    } else {
        -failure_freq.ln() / base
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConstants {
    pub c: f64,
    pub d: f64,
    pub a: f64,
}

impl Default for TheoremConstants {
    fn default() -> Self {
        Self { c: 1.0, d: 1.0, a: 1.0 }
    }
}

/// Failure-probability terms of the three headline bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremTails {
    /// `exp(-C n r^2)`: ratio-mode relay graph failure.
    pub ratio_failure: f64,
    /// `exp(-D n r^4)`: two-point-mode relay graph failure.
    pub two_point_failure: f64,
    /// `n^-(1 + a)`: maximum-weight band failure.
    pub weight_failure: f64,
    /// `e0 L_n log n`.
    pub delta_n: f64,
}

pub fn theorem_tail_calculators(
    n: f64,
    r_n: f64,
    e0: usize,
    l_n: f64,
    constants: TheoremConstants,
) -> Result<TheoremTails, BoundsError> {
    positive("n", n)?;
    positive("r_n", r_n)?;
    positive("L_n", l_n)?;
    positive("C", constants.c)?;
    positive("D", constants.d)?;
    positive("a", constants.a)?;
    Ok(TheoremTails {
        ratio_failure: (-constants.c * n * r_n * r_n).exp(),
        two_point_failure: (-constants.d * n * r_n.powi(4)).exp(),
        weight_failure: n.powf(-(1.0 + constants.a)),
        delta_n: e0 as f64 * l_n * n.ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn chernoff_values() {
        assert_relative_eq!(chernoff_upper(100.0, 0.5).unwrap(), (-6.25f64).exp());
        assert_relative_eq!(chernoff_upper(100.0, 0.5).unwrap(), 1.930454e-3, max_relative = 1e-5);
        assert_relative_eq!(chernoff_upper(400.0, 0.1).unwrap(), 0.36787944117144233, max_relative = 1e-12);
        assert!(chernoff_upper(7.0, 1e-9).unwrap() > 1.0 - 1e-15);
        assert_eq!(chernoff_upper(1.0, 0.6), Err(BoundsError::EpsOutOfRange(0.6)));
        assert_eq!(chernoff_upper(1.0, 0.0), Err(BoundsError::EpsOutOfRange(0.0)));
    }

    #[test]
    fn exact_tail_small_cases() {
        let det = BernoulliSumSpec::uniform(1, 1.0).unwrap();
        assert_eq!(exact_two_sided_tail(&det, 0.3).unwrap(), 0.0);
        let coin = BernoulliSumSpec::uniform(2, 0.5).unwrap();
        assert_relative_eq!(exact_two_sided_tail(&coin, 0.5).unwrap(), 0.5);
        assert_eq!(
            exact_two_sided_tail(&BernoulliSumSpec::uniform(31, 0.5).unwrap(), 0.1),
            Err(BoundsError::TooManyTrials(31))
        );
        assert!(BernoulliSumSpec::new(vec![0.5, 0.0]).is_err());
    }

    #[test]
    fn pmf_sums_to_one() {
        let s = BernoulliSumSpec::new(vec![0.2, 0.9, 0.5, 0.33]).unwrap();
        assert_relative_eq!(s.pmf().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn lemma_bounds() {
        assert_relative_eq!(lemma1_ratio_bound(1e4, 0.05, 1.0).unwrap(), (-25.0f64).exp(), max_relative = 1e-12);
        let v = lemma1_two_point_bound(5000.0, 0.2, 0.3, 1.0).unwrap();
        assert_relative_eq!(v, 3.0 * (-8.0f64 / 0.09).exp(), max_relative = 1e-12);
        assert!(lemma1_two_point_bound(5000.0, 0.2, 1e-6, 1.0).unwrap() < 1e-5);
        assert!(lemma1_ratio_bound(1e4, 0.05, 0.0).is_err());
    }

    #[test]
    fn two_point_scaling_in_d() {
        // doubling d divides the exponent by four and doubles the prefactor
        let (n, r, d) = (1e4, 0.05, 0.1);
        let b1 = lemma1_two_point_bound(n, r, d, 1.0).unwrap();
        let b2 = lemma1_two_point_bound(n, r, 2.0 * d, 1.0).unwrap();
        let e1 = (b1 / (2.0 * d / r)).ln();
        let e2 = (b2 / (4.0 * d / r)).ln();
        assert_relative_eq!(e1, 4.0 * e2, max_relative = 1e-12);
    }

    #[test]
    fn theorem_tails() {
        let t = theorem_tail_calculators(100.0, 0.1, 2, 16.0, TheoremConstants { c: 1.0, d: 1.0, a: 1.0 }).unwrap();
        assert_relative_eq!(t.weight_failure, 1e-4, max_relative = 1e-12);
        assert_relative_eq!(t.delta_n, 32.0 * 100f64.ln());
        let zero = TheoremConstants { c: 0.0, ..Default::default() };
        assert!(theorem_tail_calculators(100.0, 0.1, 2, 16.0, zero).is_err());
    }

    #[test]
    fn beta_substitution_exponents() {
        for &(n, beta) in &[(1e4f64, 0.3f64), (1e5, 0.35), (1e6, 0.4)] {
            let r = n.powf(-beta);
            let t = theorem_tail_calculators(n, r, 1, 10.0, TheoremConstants::default()).unwrap();
            assert_relative_eq!(-t.ratio_failure.ln(), n.powf(1.0 - 2.0 * beta), max_relative = 1e-9);
            assert_relative_eq!(-t.two_point_failure.ln(), n.powf(1.0 - 4.0 * beta), max_relative = 1e-9);
        }
    }

    #[test]
    fn nonvacuous_constant_is_the_threshold() {
        let (n, r, d) = (5000.0, 0.05, 0.3);
        let c = min_nonvacuous_two_point_constant(n, r, d);
        assert_relative_eq!(lemma1_two_point_bound(n, r, d, c).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(implied_constant((-3.0f64).exp(), 1.5), 2.0);
        assert!(implied_constant(0.0, 1.0).is_infinite());
    }
}
