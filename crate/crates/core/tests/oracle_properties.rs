use bebound::oracle::{convolve_iid, delta_scan, uniform_grid, LatticePmf};
use bebound::specfun::normal_tail;
use bebound::DistributionSpec;
use proptest::prelude::*;

fn two_point_closed_form(p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    let sigma = (p * q).sqrt();
    let z = q / sigma;
    let rho = p * q * (p * p + q * q) / sigma.powi(3);
    (z, (1.0 + z.powi(3)) * (p - normal_tail(z)) / rho)
}

#[test]
fn scan_serializes_with_named_fields() {
    let s = delta_scan(
        &DistributionSpec::rademacher(),
        3,
        &uniform_grid(0.0, 2.0, 5),
    )
    .unwrap();
    let v: serde_json::Value = serde_json::to_value(&s).unwrap();
    for key in [
        "z_grid",
        "delta",
        "rho",
        "B",
        "sup_uniform",
        "sup_nonuniform",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    let back: bebound::DeltaScan = serde_json::from_value(v).unwrap();
    assert_eq!(back, s);
}

#[test]
fn spec_json_round_trip() {
    let spec = DistributionSpec::iid_sum(DistributionSpec::centered_bernoulli(0.3), 4);
    let text = serde_json::to_string(&spec).unwrap();
    assert_eq!(
        serde_json::from_str::<DistributionSpec>(&text).unwrap(),
        spec
    );
    let err = serde_json::from_str::<DistributionSpec>(r#"{"kind":"two_point","x_minus":0}"#)
        .unwrap_err();
    assert!(err.to_string().contains("x_plus") || err.to_string().contains("p_plus"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delta_entries_and_suprema(p in 0.02f64..0.98, n in 1usize..60) {
        let grid = uniform_grid(0.0, 5.0, 251);
        let s = delta_scan(&DistributionSpec::centered_bernoulli(p), n, &grid).unwrap();
        prop_assert_eq!(s.z_grid.len(), s.delta.len());
        prop_assert!(s.delta.iter().all(|d| (0.0..=1.0).contains(d)));
        prop_assert!(s.z_grid.windows(2).all(|w| w[1] >= w[0]));
        let scale = (n as f64).sqrt() / s.rho;
        let u = s.delta.iter().fold(0.0f64, |m, d| m.max(d * scale));
        let nu = s.z_grid.iter().zip(&s.delta).fold(0.0f64, |m, (z, d)| m.max((1.0 + z.abs().powi(3)) * d * scale));
        prop_assert_eq!(s.sup_uniform, u);
        prop_assert_eq!(s.sup_nonuniform, nu);
    }

    #[test]
    fn uniform_ceiling_holds(p in 0.02f64..0.98, n in 1usize..200) {
        let s = delta_scan(&DistributionSpec::centered_bernoulli(p), n, &uniform_grid(0.0, 6.0, 301)).unwrap();
        prop_assert!(s.sup_uniform <= 0.4748, "p={} n={}: {}", p, n, s.sup_uniform);
    }

    #[test]
    fn one_sided_atom_limit_matches_closed_form(p in 0.02f64..0.45) {
        let (z, closed) = two_point_closed_form(p);
        let s = delta_scan(&DistributionSpec::centered_bernoulli(p), 1, &uniform_grid(0.0, 12.0, 241)).unwrap();
        prop_assert!((s.sup_nonuniform - closed).abs() < 1e-9, "{} vs {}", s.sup_nonuniform, closed);
        prop_assert!((s.argsup_nonuniform - z).abs() < 1e-12);
    }

    #[test]
    fn convolution_conserves_mass(w in prop::collection::vec(0.0f64..1.0, 1..6), n in 1usize..30) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-3);
        let weights: Vec<f64> = w.iter().map(|v| v / total).collect();
        let base = LatticePmf::new(-1.0, 0.5, weights).unwrap();
        let s = convolve_iid(&base, n).unwrap();
        prop_assert!((s.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(s.weights.iter().all(|&v| v >= 0.0));
        prop_assert!((s.mean() - n as f64 * base.mean()).abs() < 1e-9 * n as f64);
    }
}
