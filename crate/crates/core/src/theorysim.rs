//! Correlated update model and the alignment approximation bound.
//!
//! Two successive updates `X`, `Y` are each productive with probability `λ`.
//! With probability `c` the second copies the first, otherwise it is an
//! independent draw. Filtering to aligned pairs (`X == Y`) raises the chance
//! of a productive step from `λ` to
//! `(λ² + cλ(1−λ)) / (λ² + (1−λ)² + 2cλ(1−λ))`.

use rand::Rng;

use crate::error::{Result, TarlError};
use crate::scalar::Scalar;

/// Plug-in formulas without parameter validation, usable at the `λ = 0.5` boundary.
pub mod closed_form {
    use crate::scalar::Scalar;

    /// `λ² + (1−λ)² + 2cλ(1−λ)`.
    pub fn p_aligned<T: Scalar>(lambda: T, c: T) -> T {
        let one = T::one();
        let two = T::lit(2.0);
        lambda * lambda + (one - lambda) * (one - lambda) + two * c * lambda * (one - lambda)
    }

    /// `(λ² + cλ(1−λ)) / p_aligned`.
    pub fn p_productive_given_aligned<T: Scalar>(lambda: T, c: T) -> T {
        (lambda * lambda + c * lambda * (T::one() - lambda)) / p_aligned(lambda, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateModelParams<T> {
    lambda: T,
    c: T,
}

impl<T: Scalar> UpdateModelParams<T> {
    /// `λ ∈ (0.5, 1)`, `c ∈ [0, 1]`.
    pub fn new(lambda: T, c: T) -> Result<Self> {
        if !(lambda > T::lit(0.5) && lambda < T::one()) {
            return Err(TarlError::arg(format!("lambda must lie in (0.5, 1), got {lambda}")));
        }
        if !(c >= T::zero() && c <= T::one()) {
            return Err(TarlError::arg(format!("c must lie in [0, 1], got {c}")));
        }
        Ok(UpdateModelParams { lambda, c })
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn c(&self) -> T {
        self.c
    }
}

/// Joint law of (X productive?, Y productive?).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSignDistribution<T> {
    pub p_pp: T,
    pub p_pu: T,
    pub p_up: T,
    pub p_uu: T,
}

pub fn joint_distribution<T: Scalar>(params: &UpdateModelParams<T>) -> JointSignDistribution<T> {
    let (l, c) = (params.lambda, params.c);
    let one = T::one();
    let cross = l * (one - l);
    JointSignDistribution {
        p_pp: l * l + c * cross,
        p_pu: (one - c) * cross,
        p_up: (one - c) * cross,
        p_uu: (one - l) * (one - l) + c * cross,
    }
}

pub fn p_aligned<T: Scalar>(params: &UpdateModelParams<T>) -> T {
    closed_form::p_aligned(params.lambda, params.c)
}

pub fn p_productive_given_aligned<T: Scalar>(params: &UpdateModelParams<T>) -> T {
    closed_form::p_productive_given_aligned(params.lambda, params.c)
}

/// A Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    /// Number of trials behind the estimate.
    pub trials: u64,
}

impl Estimate {
    fn from_counts(hits: u64, trials: u64) -> Self {
        if trials == 0 {
            return Estimate { value: f64::NAN, std_error: f64::NAN, trials };
        }
        let p = hits as f64 / trials as f64;
        Estimate { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), trials }
    }

    /// `|value − expected| ≤ k σ`, with `σ` from the expected probability.
    /// Vacuously true without trials.
    pub fn within_sigmas(&self, expected: f64, k: f64) -> bool {
        if self.trials == 0 {
            return true;
        }
        (self.value - expected).abs() <= k * binomial_sigma(expected, self.trials)
    }
}

pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloResult {
    pub p_aligned: Estimate,
    pub p_productive_given_aligned: Estimate,
    pub p_productive_given_misaligned: Estimate,
}

/// Draws `n_samples` update pairs by the copy-or-redraw mixture.
pub fn monte_carlo_model<T: Scalar, R: Rng + ?Sized>(
    params: &UpdateModelParams<T>,
    n_samples: u64,
    rng: &mut R,
) -> Result<MonteCarloResult> {
    if n_samples == 0 {
        return Err(TarlError::arg("n_samples must be at least 1"));
    }
    let lambda = params.lambda.as_f64();
    let c = params.c.as_f64();
    let (mut aligned, mut aligned_prod, mut misaligned_prod) = (0u64, 0u64, 0u64);
    for _ in 0..n_samples {
        let x = rng.gen::<f64>() < lambda;
        let y = if rng.gen::<f64>() < c { x } else { rng.gen::<f64>() < lambda };
        if x == y {
            aligned += 1;
            aligned_prod += x as u64;
        } else {
            misaligned_prod += x as u64;
        }
    }
    Ok(MonteCarloResult {
        p_aligned: Estimate::from_counts(aligned, n_samples),
        p_productive_given_aligned: Estimate::from_counts(aligned_prod, aligned),
        p_productive_given_misaligned: Estimate::from_counts(misaligned_prod, n_samples - aligned),
    })
}

/// Saturating linear score `min(x / δ̄, 1)` for `δ̄ > 0`, `x ≥ 0`.
pub fn scoring_function_f<T: Scalar>(x: T, offline: T) -> Result<T> {
    if !(offline > T::zero()) {
        return Err(TarlError::arg(format!("offline error must be positive, got {offline}")));
    }
    if !(x >= T::zero()) {
        return Err(TarlError::arg(format!("score input must be non-negative, got {x}")));
    }
    Ok((x / offline).min(T::one()))
}

/// `(δ̄, δ̄', δ)`: current offline error, future offline error, online error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTriple<T> {
    pub offline: T,
    pub future_offline: T,
    pub online: T,
}

impl<T: Scalar> BoundTriple<T> {
    pub fn new(offline: T, future_offline: T, online: T) -> Self {
        BoundTriple { offline, future_offline, online }
    }

    /// Domain of the bound plus the online-proxy assumption
    /// `|δ − δ̄'| ≤ |δ̄ − δ̄'|`.
    pub fn satisfies_assumption(&self) -> bool {
        self.offline > T::zero()
            && self.future_offline >= T::zero()
            && self.online >= T::zero()
            && (self.online - self.future_offline).abs() <= (self.offline - self.future_offline).abs()
    }

    /// `(ε_TARL, ε_naive)` against the latent score `f(δ̄')`.
    pub fn errors(&self) -> Result<(T, T)> {
        let latent = scoring_function_f(self.future_offline, self.offline)?;
        let tarl = scoring_function_f(self.online, self.offline)?;
        Ok(((latent - tarl).abs(), (latent - T::one()).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub checked: usize,
    pub rejected: usize,
    pub satisfying: usize,
    /// `satisfying / checked`; 1 when nothing was checked.
    pub fraction: f64,
}

/// Evaluates `ε_TARL ≤ ε_naive` on every triple meeting the assumption;
/// the rest are counted as rejected.
pub fn approximation_bound_check<T: Scalar>(samples: &[BoundTriple<T>]) -> BoundCheck {
    let (mut checked, mut rejected, mut satisfying) = (0, 0, 0);
    for t in samples {
        if !t.satisfies_assumption() {
            rejected += 1;
            continue;
        }
        checked += 1;
        let (tarl, naive) = t.errors().expect("assumption implies the domain");
        if tarl <= naive {
            satisfying += 1;
        }
    }
    let fraction = if checked == 0 { 1.0 } else { satisfying as f64 / checked as f64 };
    BoundCheck { checked, rejected, satisfying, fraction }
}

/// `n` random triples that satisfy the assumption, by rejection sampling
/// `δ̄ ∈ (0, 2]`, `δ̄', δ ∈ [0, 3)`.
pub fn random_assumption_triples<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<BoundTriple<f64>> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let offline = 2.0 - rng.gen::<f64>() * 2.0;
        let t = BoundTriple::new(offline, rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 3.0);
        if t.satisfies_assumption() {
            out.push(t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(l: f64, c: f64) -> UpdateModelParams<f64> {
        UpdateModelParams::new(l, c).unwrap()
    }

    #[test]
    fn joint_distribution_examples() {
        let j = joint_distribution(&params(0.75, 0.0));
        assert!((j.p_pp - 0.5625).abs() < 1e-15);
        assert!((j.p_uu - 0.0625).abs() < 1e-15);
        assert!((j.p_pu - 0.1875).abs() < 1e-15);
        assert_eq!(j.p_pu, j.p_up);

        let j = joint_distribution(&params(0.6, 1.0));
        assert_eq!(j.p_pu, 0.0);
        assert!((j.p_pp - 0.6).abs() < 1e-15);

        let j = joint_distribution(&params(0.9, 0.0));
        assert!((j.p_pp - 0.81).abs() < 1e-15);
    }

    #[test]
    fn joint_marginals_and_total() {
        for l in [0.55, 0.6, 0.75, 0.9, 0.99] {
            for c in [0.0, 0.25, 0.5, 0.9, 1.0] {
                let j = joint_distribution(&params(l, c));
                assert!((j.p_pp + j.p_pu + j.p_up + j.p_uu - 1.0).abs() < 1e-14);
                assert!((j.p_pp + j.p_pu - l).abs() < 1e-14);
                assert!((j.p_pp + j.p_up - l).abs() < 1e-14);
                assert!([j.p_pp, j.p_pu, j.p_up, j.p_uu].iter().all(|&p| p >= 0.0));
            }
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(UpdateModelParams::new(0.5, 0.0).is_err());
        assert!(UpdateModelParams::new(1.0, 0.0).is_err());
        assert!(UpdateModelParams::new(0.7, -0.1).is_err());
        assert!(UpdateModelParams::new(0.7, 1.1).is_err());
        assert!(UpdateModelParams::new(0.7f32, 0.3).is_ok());
    }

    #[test]
    fn p_aligned_examples() {
        assert!((p_aligned(&params(0.75, 0.0)) - 0.625).abs() < 1e-15);
        assert_eq!(closed_form::p_aligned(0.5, 0.0), 0.5);
        assert!((p_aligned(&params(0.6, 0.5)) - 0.76).abs() < 1e-15);
    }

    #[test]
    fn p_productive_examples() {
        assert!((p_productive_given_aligned(&params(0.75, 0.0)) - 0.9).abs() < 1e-15);
        assert!((p_productive_given_aligned(&params(0.6, 0.5)) - 0.48 / 0.76).abs() < 1e-15);
        for l in [0.55, 0.7, 0.95] {
            assert!((p_productive_given_aligned(&params(l, 1.0)) - l).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_closed_forms() {
        let p = UpdateModelParams::new(0.75f32, 0.0).unwrap();
        assert!((p_productive_given_aligned(&p) - 0.9).abs() < 1e-6);
    }

    #[test]
    fn monte_carlo_tracks_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let p = params(0.75, 0.0);
        let n = 1_000_000;
        let mc = monte_carlo_model(&p, n, &mut rng).unwrap();
        assert!((mc.p_aligned.value - 0.625).abs() <= 4.0 * (0.625f64 * 0.375 / n as f64).sqrt());
        assert!(mc.p_productive_given_aligned.within_sigmas(0.9, 4.0));
        assert!(mc.p_productive_given_misaligned.within_sigmas(0.5, 4.0));
        assert!(monte_carlo_model(&p, 0, &mut rng).is_err());
    }

    #[test]
    fn perfect_correlation_has_no_misaligned_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mc = monte_carlo_model(&params(0.8, 1.0), 10_000, &mut rng).unwrap();
        assert_eq!(mc.p_aligned.value, 1.0);
        assert_eq!(mc.p_productive_given_misaligned.trials, 0);
        assert!(mc.p_productive_given_misaligned.within_sigmas(0.5, 4.0));
    }

    #[test]
    fn scoring_function_examples() {
        assert_eq!(scoring_function_f(1.3, 1.3).unwrap(), 1.0);
        assert_eq!(scoring_function_f(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(scoring_function_f(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(scoring_function_f(5.0, 1.0).unwrap(), 1.0);
        assert!(scoring_function_f(0.5, 0.0).is_err());
        assert!(scoring_function_f(0.5, -1.0).is_err());
        assert!(scoring_function_f(-0.5, 1.0).is_err());
    }

    #[test]
    fn bound_examples() {
        let (tarl, naive) = BoundTriple::new(1.0f64, 0.2, 0.3).errors().unwrap();
        assert!((tarl - 0.1).abs() < 1e-15);
        assert!((naive - 0.8).abs() < 1e-15);
        let both = BoundTriple::new(1.0, 1.5, 1.2);
        assert!(both.satisfies_assumption());
        assert_eq!(both.errors().unwrap(), (0.0, 0.0));
    }

    #[test]
    fn bound_check_counts_rejections() {
        let samples = [
            BoundTriple::new(1.0, 0.2, 0.3),
            BoundTriple::new(1.0, 0.2, 2.0), // |δ − δ̄'| = 1.8 > 0.8
            BoundTriple::new(-1.0, 0.2, 0.3),
        ];
        let r = approximation_bound_check(&samples);
        assert_eq!((r.checked, r.rejected, r.satisfying), (1, 2, 1));
        assert_eq!(r.fraction, 1.0);
    }

    #[test]
    fn random_triples_meet_the_assumption() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_assumption_triples(1000, &mut rng);
        assert_eq!(t.len(), 1000);
        assert!(t.iter().all(BoundTriple::satisfies_assumption));
    }
}
