use num_complex::Complex64;
use proptest::prelude::*;

use twisted_weyl::spectrum::{fourier_bohr, grid_amplitudes, mean_nu, partial_corr, phase_sequence, SpectralConfig};
use twisted_weyl::words::{cocycle, multiply};
use twisted_weyl::{DefiningSequence, GroupElement, MultiIndex, Phase};

fn modulus() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(5)]
}

fn word(d: u32, sites: i64) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec((-sites..sites, 0..d as i64, 0..d as i64), 0..5)
        .prop_map(move |t| MultiIndex::from_triples(d, t).unwrap())
}

fn element(d: u32) -> impl Strategy<Value = GroupElement> {
    (word(d, 4), 0..2 * d as i64).prop_map(move |(i, p)| GroupElement { phase: Phase::new(p, d), index: i })
}

fn triple() -> impl Strategy<Value = (DefiningSequence, GroupElement, GroupElement, GroupElement)> {
    (modulus(), any::<u64>()).prop_flat_map(|(d, seed)| {
        (Just(DefiningSequence::bernoulli(d, seed).unwrap()), element(d), element(d), element(d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn product_is_associative((seq, x, y, z) in triple()) {
        let left = multiply(&multiply(&x, &y, &seq).unwrap(), &z, &seq).unwrap();
        let right = multiply(&x, &multiply(&y, &z, &seq).unwrap(), &seq).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn cocycle_identity((seq, x, y, z) in triple()) {
        let (a, b, c) = (&x.index, &y.index, &z.index);
        let lhs = cocycle(a, &b.add(c).unwrap(), &seq).unwrap().add(cocycle(b, c, &seq).unwrap()).unwrap();
        let rhs = cocycle(&a.add(b).unwrap(), c, &seq).unwrap().add(cocycle(a, b, &seq).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_and_identity((seq, x, _, _) in triple()) {
        let one = GroupElement::identity(x.modulus());
        prop_assert_eq!(multiply(&x, &x.inverse(&seq).unwrap(), &seq).unwrap(), one.clone());
        prop_assert_eq!(multiply(&x.inverse(&seq).unwrap(), &x, &seq).unwrap(), one.clone());
        prop_assert_eq!(multiply(&one, &x, &seq).unwrap(), x);
    }

    #[test]
    fn parse_inverts_display(i in modulus().prop_flat_map(|d| word(d, 50))) {
        prop_assert_eq!(MultiIndex::parse(&i.to_string(), i.modulus()).unwrap(), i);
    }

    #[test]
    fn spectral_invariants(
        (d, seed, i) in (modulus(), any::<u64>()).prop_flat_map(|(d, s)| (Just(d), Just(s), word(d, 3))),
        n in 64usize..600,
    ) {
        let seq = DefiningSequence::bernoulli(d, seed).unwrap();
        let v = phase_sequence(&i, &seq, n).unwrap();

        let energy: f64 = grid_amplitudes(&v).iter().map(|a| a * a).sum();
        prop_assert!((energy - 1.0).abs() < 1e-9);

        let m = mean_nu(&v);
        prop_assert!((m.p_hat.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let nu: Complex64 = m.p_hat.iter().enumerate()
            .map(|(j, p)| p * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / d as f64))
            .sum();
        prop_assert!((nu - m.nu).norm() < 1e-9);

        let s = partial_corr(&v, 16).unwrap();
        prop_assert!((s.get(0) - 1.0).norm() < 1e-12);
        for k in 1..=16i64 {
            prop_assert!(s.get(k).norm() <= 1.0 + 1e-12);
            prop_assert!((s.get(-k) - s.get(k).conj()).norm() < 1e-15);
        }

        let r = fourier_bohr(&v, &SpectralConfig::default()).unwrap();
        prop_assert!(r.peaks.iter().all(|p| p.amplitude > r.threshold && (0.0..1.0).contains(&p.lambda)));
        prop_assert!(r.truncated || r.residual_amplitude <= r.threshold);
        prop_assert!(r.peaks.windows(2).all(|w| w[0].lambda < w[1].lambda));
    }
}
