//! Worked examples through the public API.

use mpfee::montecarlo::{run, Exec, ExperimentSpec, Metric};
use mpfee::strategic::deviation_report;
use mpfee::{
    delta_max, delta_max_full_scan, discount_ratio, m_epsilon_wrap, monopolistic_price, osb_check,
    p_multi, p_strategic, pay_your_bid, rsop, BidVector, Distribution, Side,
};

fn bids(v: &[f64]) -> BidVector {
    BidVector::new(v.to_vec()).unwrap()
}

#[test]
fn mp_examples() {
    let out = monopolistic_price(&bids(&[3.0, 2.0, 2.0]));
    assert_eq!((out.revenue, out.k_star, out.price), (6.0, 3, 2.0));
    assert_eq!(out.winners, vec![0, 1, 2]);

    let out = monopolistic_price(&bids(&[10.0, 4.0, 3.0, 1.0]));
    assert_eq!((out.revenue, out.k_star, out.price), (10.0, 1, 10.0));
    assert_eq!(out.fee_schedule().total(), 10.0);
}

#[test]
fn rsop_example_and_dominance() {
    let v = bids(&[3.0, 2.0, 2.0]);
    let out = rsop(&v, &[Side::A, Side::B, Side::B]).unwrap();
    assert_eq!((out.price_a, out.price_b), (3.0, 2.0));
    assert_eq!(out.revenue, 2.0);
    assert!(out.revenue <= monopolistic_price(&v).revenue);
    assert!(rsop(&v, &[Side::A]).is_err());
}

#[test]
fn deviation_examples() {
    assert_eq!(p_strategic(&[4.0, 3.0, 1.0]), 2.0);
    assert_eq!(discount_ratio(10.0, &[4.0, 3.0, 1.0]), 0.8);
    let v = bids(&[10.0, 4.0, 3.0, 1.0]);
    assert_eq!(delta_max(&v), 0.8);
    assert_eq!(delta_max_full_scan(&v), 0.8);

    let report = deviation_report(&v, 0, Some(3)).unwrap();
    assert_eq!(report.p_honest, 10.0);
    assert_eq!(report.p_multi, Some(2.0));
    assert_eq!(report.delta_multi, Some(0.8));
    assert!(deviation_report(&v, 4, None).is_err());

    let multi = p_multi(&[6.0, 1.0, 1.0, 1.0], 4).unwrap();
    assert_eq!((multi.cost, multi.copies), (2.0, 2));
    assert!(multi.cost < p_strategic(&[6.0, 1.0, 1.0, 1.0]));
}

#[test]
fn fee_wrapper_and_baseline() {
    let v = bids(&[3.0, 2.0, 2.0]);
    let base = rsop(&v, &[Side::A, Side::B, Side::B])
        .unwrap()
        .fee_schedule();
    let wrapped = m_epsilon_wrap(&base, v.as_slice(), 0.5).unwrap();
    assert!((wrapped.total() - (2.0 + 1.0 / 3.0)).abs() < 1e-15);
    assert!(m_epsilon_wrap(&base, v.as_slice(), 1.0).is_err());

    let pyb = pay_your_bid(&bids(&[5.0, 1.0, 3.0]), 2);
    assert_eq!(pyb.total(), 8.0);
    assert_eq!(pyb.fee_of(1), None);
}

#[test]
fn osb_condition_examples() {
    let check = osb_check(&[10.0, 4.0, 3.0, 1.0], 0.5, 10.0).unwrap();
    assert!(check.holds);
    assert!(osb_check(&[1.0; 40], 0.9, 1.0).map(|c| !c.holds).unwrap());
    assert!(osb_check(&[11.0], 0.5, 10.0).is_err());
    assert!(osb_check(&[1.0], 1.0, 10.0).is_err());
}

#[test]
fn distribution_grammar_round_trips() {
    for text in [
        "inverse",
        "inverse_trunc:D=10",
        "uniform:lo=0,hi=1",
        "exp:rate=2",
        "const:v=3",
    ] {
        let d: Distribution = text.parse().unwrap();
        assert_eq!(d.to_string(), text);
    }
    let err = "uniform:lo=0,hi=oops".parse::<Distribution>().unwrap_err();
    assert!(err.to_string().contains("oops"));
}

#[test]
fn experiments_are_reproducible_and_scale_free_of_workers() {
    let mut spec = ExperimentSpec::new(
        "inverse_trunc:D=10".parse().unwrap(),
        vec![Metric::DeltaMax, Metric::RevRsop],
    );
    spec.n_values = vec![10, 50];
    spec.trials = 500;
    spec.seed = 3;
    spec.eta_diagnostic = Some(0.1);
    let a = run(&spec, Exec::Sequential).unwrap();
    let b = run(&spec, Exec::parallel(3)).unwrap();
    assert_eq!(a.series(Metric::DeltaMax), b.series(Metric::DeltaMax));
    assert_eq!(a.diagnostics, b.diagnostics);
    assert_eq!(a.diagnostics.total_violations(), 0);
    assert!(a.diagnostics.osb_checked > 0);
}
