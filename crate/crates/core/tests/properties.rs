use definetti_core::info::{conditional_mutual_information, fidelity, relative_entropy, trace_distance};
use definetti_core::operator::linalg::{identity, kron_vec};
use definetti_core::operator::random::{ginibre, haar_pure, induced_mixed, random_contraction};
use definetti_core::operator::{permutation_unitary, read_binary, sym_projector, write_binary, PermutationSpec};
use definetti_core::reduction::check_pinching;
use definetti_core::repetition::{binomial_tail, hoeffding_tail, threshold_operator, ThresholdVariant};
use definetti_core::rng::stream;
use definetti_core::separability::{hqext, hsep_seesaw, recheck, BipartiteCut, Certificate, SeesawOptions};
use definetti_core::{DensityMatrix, DimCap, Dims, HermitianOperator};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn choose(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetric_projector_is_invariant_idempotent_projection(n in 1usize..=3, d in 2usize..=3) {
        let p = sym_projector(n, d, DimCap::default()).unwrap();
        let m = p.matrix();
        prop_assert!((m * m - m).norm() < 1e-10);
        prop_assert!((p.trace() - choose((n + d - 1) as u64, n as u64) as f64).abs() < 1e-10);
        for perm in PermutationSpec::all(n) {
            let u = permutation_unitary(&perm, d);
            prop_assert!((&u * m - m).norm() < 1e-10);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let a = induced_mixed(Dims::single(da), &mut stream(seed, "pa", 0));
        let b = induced_mixed(Dims::single(db), &mut stream(seed, "pb", 0));
        let ab = a.tensor(&b);
        let ra = ab.partial_trace(&[0]).unwrap();
        let rb = ab.partial_trace(&[1]).unwrap();
        prop_assert!((ra.matrix() - a.matrix()).norm() < 1e-12);
        prop_assert!((rb.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn nested_partial_traces_agree(seed in any::<u64>()) {
        let rho = induced_mixed(Dims::uniform(2, 3), &mut stream(seed, "nested", 0));
        let direct = rho.partial_trace(&[0]).unwrap();
        let staged = rho.partial_trace(&[0, 1]).unwrap().partial_trace(&[0]).unwrap();
        prop_assert!((direct.matrix() - staged.matrix()).norm() < 1e-12);
        prop_assert!((rho.partial_trace(&[1, 2]).unwrap().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_threshold_is_povm_and_nested(seed in any::<u64>(), n in 1usize..=3) {
        let m = random_contraction(Dims::single(2), &mut stream(seed, "thr", 0)).unwrap();
        let mut prev: Option<HermitianOperator> = None;
        for t in 0..=n {
            let op = threshold_operator(&m, n, t, ThresholdVariant::ExactPovm, DimCap::default()).unwrap().op;
            prop_assert!(op.min_eigenvalue().unwrap() > -1e-10);
            prop_assert!(op.max_eigenvalue().unwrap() < 1.0 + 1e-10);
            if let Some(p) = &prev {
                prop_assert!(p.sub(&op).unwrap().min_eigenvalue().unwrap() > -1e-10);
            }
            prev = Some(op);
        }
    }

    #[test]
    fn seesaw_certificate_round_trip(seed in any::<u64>()) {
        let m = random_contraction(Dims::uniform(2, 2), &mut stream(seed, "cert", 0)).unwrap();
        let cut = BipartiteCut::two_party();
        let r = hsep_seesaw(&m, &cut, &SeesawOptions { restarts: 4, seed, ..SeesawOptions::default() }).unwrap();
        let direct = m.expectation(&kron_vec(&r.a_vec, &r.b_vec));
        prop_assert!((direct - r.value).abs() < 1e-10);
        let cert = Certificate::from_seesaw(&m, &cut, &r);
        let text = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&text).unwrap();
        prop_assert!(recheck(&back).unwrap().pass);
    }

    #[test]
    fn extendibility_dominates_seesaw(seed in any::<u64>(), q in 1usize..=3) {
        let m = random_contraction(Dims::uniform(2, 2), &mut stream(seed, "dom", 0)).unwrap();
        let cut = BipartiteCut::two_party();
        let lower = hsep_seesaw(&m, &cut, &SeesawOptions { restarts: 4, seed, ..SeesawOptions::default() }).unwrap().value;
        let upper = hqext(&m, &cut, q, DimCap::default()).unwrap().value;
        prop_assert!(upper >= lower - 1e-9);
        prop_assert!(upper <= m.max_eigenvalue().unwrap() + 1e-9);
    }

    #[test]
    fn binomial_tail_below_hoeffding(n in 1usize..=30, num in 1i64..10, t_frac in 0.0f64..=1.0) {
        let t = (t_frac * n as f64).round() as usize;
        let p = BigRational::new(BigInt::from(num), BigInt::from(10));
        let exact = binomial_tail(n, &p, t);
        let p_f = num as f64 / 10.0;
        let tail: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
        prop_assert!(tail <= hoeffding_tail(n, p_f, t) + 1e-15);
        prop_assert!(exact >= BigRational::zero() && exact <= BigRational::one());
        if t < n {
            prop_assert!(binomial_tail(n, &p, t + 1) <= exact);
        }
    }

    #[test]
    fn fidelity_and_trace_distance_bracket(seed in any::<u64>(), d in 2usize..=4) {
        let rho = induced_mixed(Dims::single(d), &mut stream(seed, "fvg", 0));
        let sigma = induced_mixed(Dims::single(d), &mut stream(seed, "fvg", 1));
        let f = fidelity(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!((f - fidelity(&sigma, &rho).unwrap()).abs() < 1e-8);
        prop_assert!(1.0 - f <= t + 1e-8);
        prop_assert!(t <= (1.0 - f * f).max(0.0).sqrt() + 1e-8);
    }

    #[test]
    fn entropic_quantities_are_nonnegative(seed in any::<u64>()) {
        let rho = induced_mixed(Dims::uniform(2, 3), &mut stream(seed, "ssa", 0));
        let sigma = induced_mixed(Dims::uniform(2, 3), &mut stream(seed, "ssa", 1));
        prop_assert!(relative_entropy(&rho, &sigma).unwrap() >= -1e-9);
        prop_assert!(conditional_mutual_information(&rho, &[0], &[1], &[2]).unwrap() >= -1e-9);
    }

    #[test]
    fn pinching_gap_nonnegative(seed in any::<u64>(), d in 2usize..=4, r in 1usize..=4) {
        let mut rng = stream(seed, "pinch", 0);
        let ops: Vec<_> = (0..r).map(|_| ginibre(d, d, &mut rng)).collect();
        let rho = induced_mixed(Dims::single(d), &mut rng);
        prop_assert!(check_pinching(&ops, &rho, 1e-9).unwrap().gap_min_eig >= -1e-9);
    }

    #[test]
    fn binary_operator_io_round_trip(seed in any::<u64>()) {
        let psi = haar_pure(4, &mut stream(seed, "io", 0));
        let op = DensityMatrix::pure(&psi, Dims::uniform(2, 2)).unwrap().into_op();
        let mut buf = Vec::new();
        write_binary(op.matrix(), op.dims(), &mut buf).unwrap();
        let (m, dims) = read_binary(buf.as_slice()).unwrap();
        prop_assert_eq!(dims.factors(), op.dims().factors());
        prop_assert!((&m - op.matrix()).norm() == 0.0);
    }
}

#[test]
fn binomial_tail_from_zero_is_one() {
    let p = BigRational::new(BigInt::from(3), BigInt::from(7));
    for n in 0..10 {
        assert!(binomial_tail(n, &p, 0).is_one());
    }
}

#[test]
fn identity_threshold_counts_patterns() {
    let id = HermitianOperator::identity(Dims::single(2));
    let printed = threshold_operator(&id, 3, 2, ThresholdVariant::PrintedSum, DimCap::default()).unwrap();
    let patterns = (choose(3, 2) + choose(3, 3)) as f64;
    assert!((printed.op.matrix() - identity(8) * num_complex::Complex64::new(patterns, 0.0)).norm() < 1e-12);
}
