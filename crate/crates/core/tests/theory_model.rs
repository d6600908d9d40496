use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tarl_core::theorysim::{
    approximation_bound_check, joint_distribution, monte_carlo_model, p_aligned, p_productive_given_aligned,
    random_assumption_triples, scoring_function_f, BoundTriple,
};
use tarl_core::UpdateModelParams;

/// P(X = Y) and P(X = 1 | X = Y) by summing the four joint cells by hand.
fn enumerate(lambda: f64, c: f64) -> (f64, f64) {
    let indep = |x: bool, y: bool| (if x { lambda } else { 1.0 - lambda }) * (if y { lambda } else { 1.0 - lambda });
    let marginal = |x: bool| if x { lambda } else { 1.0 - lambda };
    let joint = |x: bool, y: bool| c * if x == y { marginal(x) } else { 0.0 } + (1.0 - c) * indep(x, y);
    let aligned = joint(true, true) + joint(false, false);
    (aligned, joint(true, true) / aligned)
}

proptest! {
    #[test]
    fn closed_forms_match_enumeration(lambda in 0.5001..0.9999f64, c in 0.0..=1.0f64) {
        let params = UpdateModelParams::new(lambda, c).unwrap();
        let (aligned, p) = enumerate(lambda, c);
        prop_assert!((p_aligned(&params) - aligned).abs() < 1e-14);
        prop_assert!((p_productive_given_aligned(&params) - p).abs() < 1e-14);
        let j = joint_distribution(&params);
        prop_assert!((j.p_pp + j.p_pu + j.p_up + j.p_uu - 1.0).abs() < 1e-14);
        prop_assert!(p >= lambda - 1e-15);
        if c < 1.0 {
            prop_assert!(p > lambda);
        }
    }

    #[test]
    fn saturating_score_is_monotone(o in 0.01..10.0f64, a in 0.0..20.0f64, b in 0.0..20.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(scoring_function_f(lo, o).unwrap() <= scoring_function_f(hi, o).unwrap());
        prop_assert_eq!(scoring_function_f(o + hi, o).unwrap(), 1.0);
    }
}

#[test]
fn monte_carlo_agrees_within_four_sigma() {
    for (k, &(lambda, c)) in [(0.55, 0.0), (0.6, 0.5), (0.9, 0.25), (0.75, 1.0)].iter().enumerate() {
        let params = UpdateModelParams::new(lambda, c).unwrap();
        let mc = monte_carlo_model(&params, 200_000, &mut ChaCha8Rng::seed_from_u64(k as u64)).unwrap();
        let (aligned, p) = enumerate(lambda, c);
        assert!(mc.p_aligned.within_sigmas(aligned, 4.0), "λ={lambda} c={c}");
        assert!(mc.p_productive_given_aligned.within_sigmas(p, 4.0), "λ={lambda} c={c}");
        // Given misalignment, X is productive exactly half the time by symmetry.
        if c < 1.0 {
            assert!(mc.p_productive_given_misaligned.within_sigmas(0.5, 4.0), "λ={lambda} c={c}");
        }
    }
}

#[test]
fn bound_holds_on_random_triples_and_edges() {
    let triples = random_assumption_triples(20_000, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(approximation_bound_check(&triples).fraction, 1.0);
    let edges = [BoundTriple::new(1.0f64, 1.0, 1.0), BoundTriple::new(1.0, 0.0, 0.0), BoundTriple::new(2.0, 2.0, 0.5)];
    let check = approximation_bound_check(&edges);
    assert_eq!(check.satisfying + check.rejected, 3);
    assert_eq!(check.fraction, 1.0);
}
