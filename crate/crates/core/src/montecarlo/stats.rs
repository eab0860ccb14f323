//! Summary statistics over per-trial values, always reduced in trial order.

/// Estimate with its standard error; `std_error` is `None` for a single
/// observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub count: usize,
}

impl Estimate {
    pub fn ci95(&self) -> Option<(f64, f64)> {
        self.std_error
            .map(|se| (self.value - 1.96 * se, self.value + 1.96 * se))
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Sample mean with `s/√T` standard error.
pub fn mean_estimate(xs: &[f64]) -> Estimate {
    let count = xs.len();
    if count == 0 {
        return Estimate {
            value: f64::NAN,
            std_error: None,
            count,
        };
    }
    let value = mean(xs);
    let std_error = (count >= 2).then(|| (sample_variance(xs, value) / count as f64).sqrt());
    Estimate {
        value,
        std_error,
        count,
    }
}

/// Mean of a non-negative quantity that is exactly zero in most trials.
///
/// Once at least half the trials are zero the sample standard error is
/// floored by a binomial error on the non-zero indicator (with add-one
/// smoothing), scaled by the mean non-zero value (1 when there is none).
pub fn mean_estimate_zero_floor(xs: &[f64]) -> Estimate {
    let mut est = mean_estimate(xs);
    let t = xs.len();
    let Some(se) = est.std_error else {
        return est;
    };
    let nonzero: Vec<f64> = xs.iter().copied().filter(|&x| x != 0.0).collect();
    if 2 * nonzero.len() > t {
        return est;
    }
    let p = (nonzero.len() as f64 + 1.0) / (t as f64 + 2.0);
    let scale = if nonzero.is_empty() {
        1.0
    } else {
        mean(&nonzero)
    };
    let floor = scale * (p * (1.0 - p) / t as f64).sqrt();
    est.std_error = Some(se.max(floor));
    est
}

/// Two-sided trimmed mean dropping `floor(frac·T)` values at each end, with
/// the winsorized-variance standard error.
pub fn trimmed_mean_estimate(xs: &[f64], frac: f64) -> Estimate {
    let t = xs.len();
    if t == 0 {
        return mean_estimate(xs);
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let g = (frac * t as f64).floor() as usize;
    let kept = &sorted[g..t - g];
    let value = mean(kept);
    let std_error = (t >= 2).then(|| {
        let lo = sorted[g];
        let hi = sorted[t - g - 1];
        let wins: Vec<f64> = sorted.iter().map(|x| x.clamp(lo, hi)).collect();
        let wm = mean(&wins);
        let sw = sample_variance(&wins, wm).sqrt();
        sw / ((1.0 - 2.0 * g as f64 / t as f64) * (t as f64).sqrt())
    });
    Estimate {
        value,
        std_error,
        count: t,
    }
}
