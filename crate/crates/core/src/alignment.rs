//! Target alignment between online and offline TD errors.
//!
//! For a transition with online error `δ` (bootstrapped from the online
//! network) and offline error `δ̄` (bootstrapped from the target network),
//! the residual `δ − δ̄` is the online error left after the offline update.
//! The base score `|δ| / (|δ| + |δ − δ̄| + ε)` measures how much of the online
//! error the offline step resolves. When both errors point the same way and
//! the online error is the larger one, the offline step is fully supported
//! and the score is exactly 1.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TarlError};
use crate::scalar::Scalar;

/// Online and offline TD errors of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair<T> {
    pub online: T,
    pub offline: T,
}

impl<T: Scalar> ErrorPair<T> {
    pub fn new(online: T, offline: T) -> Self {
        ErrorPair { online, offline }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `δ == δ̄`.
    Perfect,
    /// Same sign, the offline step is smaller than the online one.
    OfflineUndershoot,
    /// Same sign, the offline step is larger than the online one.
    OfflineOvershoot,
    /// Opposite signs, or exactly one of the errors is zero.
    Misaligned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentScore<T> {
    pub value: T,
    pub scenario: Scenario,
}

/// Stabilizer added to the base-score denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon<T>(T);

impl<T: Scalar> Epsilon<T> {
    pub fn new(eps: T) -> Result<Self> {
        if eps > T::zero() && eps.is_finite() {
            Ok(Epsilon(eps))
        } else {
            Err(TarlError::arg(format!("alignment epsilon must be positive, got {eps}")))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

impl<T: Scalar> Default for Epsilon<T> {
    fn default() -> Self {
        Epsilon(T::lit(1e-8))
    }
}

/// `δ − δ̄`.
#[inline]
pub fn residual_online_error<T: Scalar>(pair: ErrorPair<T>) -> T {
    pair.online - pair.offline
}

#[inline]
pub fn base_alignment<T: Scalar>(pair: ErrorPair<T>, eps: Epsilon<T>) -> T {
    let online = pair.online.abs();
    online / (online + residual_online_error(pair).abs() + eps.get())
}

#[inline]
fn same_sign<T: Scalar>(a: T, b: T) -> bool {
    (a > T::zero() && b > T::zero()) || (a < T::zero() && b < T::zero())
}

pub fn classify<T: Scalar>(pair: ErrorPair<T>) -> Scenario {
    let ErrorPair { online, offline } = pair;
    if online == offline {
        Scenario::Perfect
    } else if same_sign(online, offline) {
        if online.abs() > offline.abs() {
            Scenario::OfflineUndershoot
        } else {
            Scenario::OfflineOvershoot
        }
    } else {
        Scenario::Misaligned
    }
}

/// Final score: 1 when the offline step is fully supported, otherwise the base score.
///
/// `|δ| == |δ̄|` with equal signs goes through the base score, so the
/// perfect case scores `|δ| / (|δ| + ε)`, just below 1.
pub fn alignment_score<T: Scalar>(pair: ErrorPair<T>, eps: Epsilon<T>) -> AlignmentScore<T> {
    let scenario = classify(pair);
    let value = if same_sign(pair.online, pair.offline) && pair.online.abs() > pair.offline.abs() {
        T::one()
    } else {
        base_alignment(pair, eps)
    };
    AlignmentScore { value, scenario }
}

/// Positions of the `k` largest scores.
///
/// Ties go to the earlier position and the result lists the kept positions in
/// input order. Callers map positions back to buffer indices.
pub fn select_top_k<T: Scalar>(scores: &[T], k: usize) -> Result<Vec<usize>> {
    if k > scores.len() {
        return Err(TarlError::arg(format!("cannot keep {k} of {} scores", scores.len())));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable sort keeps equal scores in input order.
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut kept = order[..k].to_vec();
    kept.sort_unstable();
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(d: f64, db: f64) -> ErrorPair<f64> {
        ErrorPair::new(d, db)
    }

    fn eps() -> Epsilon<f64> {
        Epsilon::default()
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual_online_error(pair(1.0, 1.0)), 0.0);
        assert_eq!(residual_online_error(pair(0.5, 1.0)), -0.5);
        assert_eq!(residual_online_error(pair(-0.5, 1.0)), -1.5);
    }

    #[test]
    fn base_alignment_examples() {
        // Scalar evaluation of |δ| / (|δ| + |δ − δ̄| + ε).
        assert!((base_alignment(pair(1.0, 1.0), eps()) - 1.0).abs() < 1e-7);
        assert!((base_alignment(pair(0.5, 1.0), eps()) - 0.5 / (0.5 + 0.5 + 1e-8)).abs() < 1e-15);
        assert!((base_alignment(pair(0.5, 1.0), eps()) - 0.5).abs() < 1e-7);
        assert!((base_alignment(pair(-0.5, 1.0), eps()) - 0.25).abs() < 1e-7);
        assert_eq!(base_alignment(pair(0.0, 3.0), eps()), 0.0);
        assert_eq!(base_alignment(pair(0.0, 0.0), eps()), 0.0);
    }

    #[test]
    fn scenario_examples() {
        let s = alignment_score(pair(1.0, 0.5), eps());
        assert_eq!((s.value, s.scenario), (1.0, Scenario::OfflineUndershoot));

        let s = alignment_score(pair(0.5, 1.0), eps());
        assert_eq!(s.scenario, Scenario::OfflineOvershoot);
        assert!((s.value - 0.5).abs() < 1e-7);

        let s = alignment_score(pair(-0.5, 1.0), eps());
        assert_eq!(s.scenario, Scenario::Misaligned);
        assert!((s.value - 0.25).abs() < 1e-7);

        let s = alignment_score(pair(-2.0, -0.5), eps());
        assert_eq!((s.value, s.scenario), (1.0, Scenario::OfflineUndershoot));
    }

    #[test]
    fn boundary_cases() {
        // Equal errors: perfect, routed through the base score.
        let s = alignment_score(pair(0.7, 0.7), eps());
        assert_eq!(s.scenario, Scenario::Perfect);
        assert!(s.value < 1.0 && s.value > 1.0 - 1e-7);
        // Both zero: perfect but degenerate, score 0.
        let s = alignment_score(pair(0.0, 0.0), eps());
        assert_eq!((s.value, s.scenario), (0.0, Scenario::Perfect));
        // Exactly one zero: misaligned.
        assert_eq!(classify(pair(0.0, 1.0)), Scenario::Misaligned);
        assert_eq!(classify(pair(1.0, 0.0)), Scenario::Misaligned);
        assert!((alignment_score(pair(1.0, 0.0), eps()).value - 0.5).abs() < 1e-7);
    }

    #[test]
    fn works_in_single_precision() {
        let s = alignment_score(ErrorPair::new(-0.5f32, 1.0), Epsilon::default());
        assert!((s.value - 0.25).abs() < 1e-6);
    }

    #[test]
    fn epsilon_must_be_positive() {
        assert!(Epsilon::new(0.0f64).is_err());
        assert!(Epsilon::new(-1e-3f64).is_err());
        assert_eq!(Epsilon::new(1e-6f64).unwrap().get(), 1e-6);
    }

    #[test]
    fn top_k_examples() {
        assert_eq!(select_top_k(&[1.0, 0.2, 0.9, 0.5], 2).unwrap(), vec![0, 2]);
        assert_eq!(select_top_k(&[0.3; 5], 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(select_top_k(&[0.1, 0.7, 0.4], 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(select_top_k(&[0.1, 0.7, 0.4, 0.7], 1).unwrap(), vec![1]);
        assert!(select_top_k(&[0.1f64], 2).is_err());
        assert!(select_top_k::<f64>(&[], 0).unwrap().is_empty());
    }
}
