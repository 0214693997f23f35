use cantor_entropy::bounds::{improved_bounds_symmetric, t_value};
use cantor_entropy::certified::{log2_int, Precision};
use cantor_entropy::graph::{initial_level, level_entropy};
use cantor_entropy::uniform::uniform_entropy;
use cantor_entropy::{MdParams, ProbabilityVector};

#[test]
fn uniform_three_two_entropy_lies_in_plain_interval() {
    let prec = Precision::for_digits(10);
    let plain = improved_bounds_symmetric(&t_value(1), prec).unwrap();
    let h = uniform_entropy(MdParams::new(3, 2).unwrap(), 10).unwrap();
    assert_eq!(h.rendered, "0.9887658714");
    assert!(h.entropy.certainly_ge(&plain.interval.lo.hi()));
    assert!(h.entropy.certainly_le(&plain.interval.hi.lo()));
}

/// Compares the Cesaro-style ratio h(12) / (12 log2 d) against the series value.
fn level_ratio_gap(m: i64, d: i64) -> f64 {
    let p = MdParams::new(m, d).unwrap();
    let prec = Precision::for_digits(12);
    let probs = ProbabilityVector::uniform(p);
    let mut dist = initial_level(p);
    for _ in 0..12 {
        dist = dist.advance(&probs).unwrap();
    }
    let ratio =
        level_entropy(&dist, prec).to_f64() / (12.0 * log2_int(p.d(), prec).unwrap().to_f64());
    let h = uniform_entropy(p, 10).unwrap().entropy.to_f64();
    (ratio - h).abs()
}

#[test]
fn level_ratio_converges_toward_series_value() {
    for (m, d) in [(3, 2), (4, 3)] {
        let gap = level_ratio_gap(m, d);
        assert!(
            gap < 0.02,
            "(m,d)=({m},{d}): |h(12)/(12 log2 d) - H| = {gap:.4}"
        );
    }
}

#[test]
fn level_increments_converge_to_series_value() {
    let p = MdParams::new(3, 2).unwrap();
    let prec = Precision::for_digits(12);
    let probs = ProbabilityVector::uniform(p);
    let mut dist = initial_level(p);
    let mut prev = 0.0;
    let mut last = 0.0;
    for _ in 0..12 {
        dist = dist.advance(&probs).unwrap();
        let h = level_entropy(&dist, prec).to_f64();
        last = h - prev;
        prev = h;
    }
    let h = uniform_entropy(p, 10).unwrap().entropy.to_f64();
    assert!((last - h).abs() < 1e-5, "increment {last} vs {h}");
}
