use bebound::charfn::{CharFnEvaluator, DistributionSpec};
use bebound::envelope::{cf_envelope, cf_normal_gap_envelope, EnvelopeBudget};
use bebound::filters::{kappa_02, m02_filter, prawitz_filter};
use bebound::inversion::{prawitz_cdf_bounds, PVQuadratureConfig};
use bebound::nagaev::{
    c0_constant, c1_constant, ld_tail_bound, poisson_mixture_bound, NagaevParams,
};
use bebound::nonuniform::tail_bound;
use bebound::Error;
use proptest::prelude::*;

#[test]
fn normal_brackets_tighten_and_contain_phi() {
    let f = CharFnEvaluator::new(DistributionSpec::standard_normal(), 0).unwrap();
    let cfg = PVQuadratureConfig::default();
    let filter = m02_filter(kappa_02()).unwrap();
    let mut last = f64::INFINITY;
    for t in [4.0, 8.0, 16.0] {
        let b = prawitz_cdf_bounds(&f, &filter, t, -0.4, &cfg).unwrap();
        // Φ(-0.4)
        assert!(
            b.lower <= 0.3445782583896758 && 0.3445782583896758 <= b.upper,
            "{b:?}"
        );
        assert!(b.width() < last);
        last = b.width();
    }
}

#[test]
fn rough_filter_cannot_carry_order_three() {
    let f = CharFnEvaluator::new(DistributionSpec::standard_normal(), 3).unwrap();
    let r = tail_bound(
        &f,
        &prawitz_filter(),
        3,
        5.0,
        1.0,
        &PVQuadratureConfig::default(),
    );
    assert!(matches!(r, Err(Error::Smoothness(_))));
}

#[test]
fn envelope_reports_infeasible_moments() {
    assert!(matches!(
        cf_envelope(1.0f64, 0.9, EnvelopeBudget::default()),
        Err(Error::Infeasible(_))
    ));
    let gap = cf_normal_gap_envelope(0.0f64, 2.0, EnvelopeBudget::default()).unwrap();
    assert!(gap.value.abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn order_two_tail_brackets(p in 0.1f64..0.9, n in 1usize..15, x in 0.2f64..3.0) {
        let spec = DistributionSpec::iid_sum(DistributionSpec::centered_bernoulli(p), n);
        let lat = spec.to_lattice().unwrap().unwrap();
        let f = CharFnEvaluator::new(spec, 2).unwrap();
        let filter = m02_filter(kappa_02()).unwrap();
        let r = tail_bound(&f, &filter, 2, 6.0, x, &PVQuadratureConfig::default()).unwrap();
        prop_assert!(r.lower <= x * x * lat.tail_gt(x) + r.quad_error);
        prop_assert!(x * x * lat.tail_ge(x) <= r.upper + r.quad_error);
    }

    #[test]
    fn nagaev_outputs_nonnegative(
        alpha in 0.1f64..0.95,
        tau in 0.2f64..0.95,
        z0 in 0.5f64..4.0,
        frac in 0.001f64..1.0,
        zmul in 1.0f64..3.0,
    ) {
        let c = (2.0 / tau).sqrt() * 1.01;
        let a = frac * 0.05f64.min(0.99 * alpha / (z0 * z0));
        let params = NagaevParams::new(z0, c, tau, alpha, 0.05, a).unwrap();
        let c0 = c0_constant(z0, c, tau).unwrap();
        let c1 = c1_constant(&params).unwrap();
        let mix = poisson_mixture_bound(&params, z0 * zmul, 2000).unwrap();
        let ld = ld_tail_bound(&params, z0 * zmul, 1.0, 10).unwrap();
        for v in [c0, c1, mix, ld.bound] {
            prop_assert!(v.is_finite() && v >= 0.0);
        }
    }
}
