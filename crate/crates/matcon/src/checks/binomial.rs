//! Exact one-sided binomial upper confidence limits.
//!
//! Verdicts compare the limit against the theoretical probability cap, so
//! the construction must stay exact at tiny exceedance counts where normal
//! approximations fall apart.

use statrs::distribution::{Beta, ContinuousCDF};

/// One-sided upper confidence limit for a binomial proportion from
/// `successes` out of `trials`, at the given confidence level: the quantile
/// of a `Beta(successes + 1, trials - successes)` law. The quantile is
/// located by full-precision bisection on the regularized incomplete beta,
/// since the library inverse is only accurate to a few decimal digits.
pub fn clopper_pearson_upper(successes: u64, trials: u64, confidence: f64) -> f64 {
    assert!(trials > 0, "need at least one trial");
    assert!(successes <= trials);
    assert!((0.0..1.0).contains(&confidence));
    if successes == trials {
        return 1.0;
    }
    let beta = Beta::new((successes + 1) as f64, (trials - successes) as f64)
        .expect("valid shape parameters");
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta.cdf(mid) < confidence {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}
