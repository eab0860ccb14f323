//! Value distributions for simulated bidders.
//!
//! Every family is sampled by inverting its tail: a uniform `U` on `(0, 1]`
//! maps to `X = inf{x : Pr{X > x} < U}`. For the Inverse family this is
//! `X = 1/U`, which stays finite because `U` is never 0.

use std::fmt;
use std::str::FromStr;

use rand::distr::OpenClosed01;
use rand::Rng;

use crate::bids::BidVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Inverse,
    InverseTruncated,
    Uniform,
    Exponential,
    Discrete,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `Pr{X > x} = 1/x` on `[1, ∞)`.
    Inverse,
    /// Inverse cut at `d`, with the remaining mass `1/d` as an atom at `d`.
    InverseTruncated {
        d: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Exponential {
        rate: f64,
    },
    Discrete(Discrete),
    Constant {
        v: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
struct Discrete {
    /// As given, for display.
    given: Vec<(f64, f64)>,
    /// Support points ascending.
    points: Vec<f64>,
    /// Mass at each point of `points`.
    probs: Vec<f64>,
    /// `tail[j] = Pr{X > points[j]}`.
    tail: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution(Kind);

fn bad(token: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Distribution {
        token: token.into(),
        reason: reason.into(),
    }
}

impl Distribution {
    pub fn inverse() -> Self {
        Distribution(Kind::Inverse)
    }

    pub fn inverse_truncated(d: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 1.0) {
            return Err(bad(
                format!("D={d}"),
                "truncation point must be finite and >= 1",
            ));
        }
        Ok(Distribution(Kind::InverseTruncated { d }))
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(bad(format!("lo={lo},hi={hi}"), "need finite 0 <= lo < hi"));
        }
        Ok(Distribution(Kind::Uniform { lo, hi }))
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(bad(format!("rate={rate}"), "rate must be positive"));
        }
        Ok(Distribution(Kind::Exponential { rate }))
    }

    /// `(point, probability)` pairs. Points must be distinct and
    /// non-negative, probabilities positive and summing to 1 within 1e-12.
    pub fn discrete(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(bad("points=", "no support points"));
        }
        for &(x, p) in &pairs {
            if !(x.is_finite() && x >= 0.0) {
                return Err(bad(
                    format!("{x}@{p}"),
                    "support point must be finite and >= 0",
                ));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(bad(format!("{x}@{p}"), "probability must be positive"));
            }
        }
        let sum: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(bad(
                Distribution::discrete_points(&pairs),
                format!("probabilities sum to {sum}, not 1"),
            ));
        }
        let mut sorted = pairs.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        if let Some(w) = sorted.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(bad(format!("{}", w[0].0), "duplicate support point"));
        }
        let points: Vec<f64> = sorted.iter().map(|&(x, _)| x).collect();
        let probs: Vec<f64> = sorted.iter().map(|&(_, p)| p).collect();
        // Accumulate from the top so the largest points get exact small tails.
        let mut tail = vec![0.0; points.len()];
        for j in (0..points.len().saturating_sub(1)).rev() {
            tail[j] = tail[j + 1] + probs[j + 1];
        }
        Ok(Distribution(Kind::Discrete(Discrete {
            given: pairs,
            points,
            probs,
            tail,
        })))
    }

    pub fn constant(v: f64) -> Result<Self> {
        if !(v.is_finite() && v >= 0.0) {
            return Err(bad(format!("v={v}"), "value must be finite and >= 0"));
        }
        Ok(Distribution(Kind::Constant { v }))
    }

    fn discrete_points(pairs: &[(f64, f64)]) -> String {
        let items: Vec<String> = pairs.iter().map(|(x, p)| format!("{x}@{p}")).collect();
        items.join(";")
    }

    pub fn family(&self) -> Family {
        match self.0 {
            Kind::Inverse => Family::Inverse,
            Kind::InverseTruncated { .. } => Family::InverseTruncated,
            Kind::Uniform { .. } => Family::Uniform,
            Kind::Exponential { .. } => Family::Exponential,
            Kind::Discrete(_) => Family::Discrete,
            Kind::Constant { .. } => Family::Constant,
        }
    }

    /// Upper end of the support, when bounded.
    pub fn support_upper(&self) -> Option<f64> {
        match &self.0 {
            Kind::Inverse | Kind::Exponential { .. } => None,
            Kind::InverseTruncated { d } => Some(*d),
            Kind::Uniform { hi, .. } => Some(*hi),
            Kind::Discrete(dd) => dd.points.last().copied(),
            Kind::Constant { v } => Some(*v),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.support_upper().is_some()
    }

    /// Maps `u` in `(0, 1]` to a value by tail inversion.
    pub fn from_unit(&self, u: f64) -> f64 {
        match &self.0 {
            Kind::Inverse => 1.0 / u,
            Kind::InverseTruncated { d } => {
                if u <= 1.0 / d {
                    *d
                } else {
                    1.0 / u
                }
            }
            Kind::Uniform { lo, hi } => hi - u * (hi - lo),
            Kind::Exponential { rate } => -u.ln() / rate,
            Kind::Discrete(dd) => dd.points[dd.tail.partition_point(|&t| t >= u)],
            Kind::Constant { v } => *v,
        }
    }

    /// `Pr{X > x}`.
    pub fn tail(&self, x: f64) -> f64 {
        match &self.0 {
            Kind::Inverse => {
                if x < 1.0 {
                    1.0
                } else {
                    1.0 / x
                }
            }
            Kind::InverseTruncated { d } => {
                if x < 1.0 {
                    1.0
                } else if x < *d {
                    1.0 / x
                } else {
                    0.0
                }
            }
            Kind::Uniform { lo, hi } => {
                if x < *lo {
                    1.0
                } else if x >= *hi {
                    0.0
                } else {
                    (hi - x) / (hi - lo)
                }
            }
            Kind::Exponential { rate } => {
                if x < 0.0 {
                    1.0
                } else {
                    (-rate * x).exp()
                }
            }
            Kind::Discrete(dd) => {
                // Points strictly above x.
                let first_above = dd.points.partition_point(|&p| p <= x);
                dd.probs[first_above..].iter().sum()
            }
            Kind::Constant { v } => {
                if x < *v {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `sup_x x·Pr{X >= x}`: the most revenue per bidder a single posted
    /// price can collect.
    pub fn r_f(&self) -> f64 {
        match &self.0 {
            Kind::Inverse | Kind::InverseTruncated { .. } => 1.0,
            Kind::Uniform { lo, hi } => {
                if hi / 2.0 >= *lo {
                    hi * hi / (4.0 * (hi - lo))
                } else {
                    *lo
                }
            }
            Kind::Exponential { rate } => 1.0 / (std::f64::consts::E * rate),
            Kind::Discrete(dd) => dd
                .points
                .iter()
                .zip(&dd.probs)
                .zip(&dd.tail)
                .map(|((x, p), t)| x * (p + t))
                .fold(0.0, f64::max),
            Kind::Constant { v } => *v,
        }
    }

    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.from_unit(rng.sample(OpenClosed01))
    }

    /// Overwrites `buf` with iid draws.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut [f64]) {
        for x in buf {
            *x = self.sample_one(rng);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<BidVector> {
        BidVector::new((0..count).map(|_| self.sample_one(rng)).collect())
    }
}

impl rand::distr::Distribution<f64> for Distribution {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_one(rng)
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Kind::Inverse => write!(f, "inverse"),
            Kind::InverseTruncated { d } => write!(f, "inverse_trunc:D={d}"),
            Kind::Uniform { lo, hi } => write!(f, "uniform:lo={lo},hi={hi}"),
            Kind::Exponential { rate } => write!(f, "exp:rate={rate}"),
            Kind::Discrete(dd) => {
                write!(
                    f,
                    "discrete:points={}",
                    Distribution::discrete_points(&dd.given)
                )
            }
            Kind::Constant { v } => write!(f, "const:v={v}"),
        }
    }
}

fn parse_num(token: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| bad(token, format!("`{value}` is not a number")))
}

/// `key=value` pairs after the family name, checked against `allowed`.
fn parse_params<'a>(body: &'a str, allowed: &[&str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    if body.trim().is_empty() {
        return Ok(out);
    }
    for item in body.split(',') {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| bad(item, "expected key=value"))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(bad(item, format!("unknown parameter `{key}`")));
        }
        if out.iter().any(|&(k, _)| k == key) {
            return Err(bad(item, format!("parameter `{key}` given twice")));
        }
        out.push((key, value));
    }
    Ok(out)
}

fn required(params: &[(&str, &str)], key: &str, family: &str) -> Result<f64> {
    match params.iter().find(|&&(k, _)| k == key) {
        Some(&(k, v)) => parse_num(&format!("{k}={v}"), v),
        None => Err(bad(family, format!("missing parameter `{key}`"))),
    }
}

impl FromStr for Distribution {
    type Err = Error;

    /// Grammar: `inverse`, `inverse_trunc:D=10`, `uniform:lo=0,hi=1`,
    /// `exp:rate=1`, `discrete:points=1@0.5;2@0.5`, `const:v=3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, body) = s.split_once(':').unwrap_or((s, ""));
        match name.trim() {
            "inverse" => {
                parse_params(body, &[])?;
                Ok(Distribution::inverse())
            }
            "inverse_trunc" => {
                let p = parse_params(body, &["D"])?;
                Distribution::inverse_truncated(required(&p, "D", name)?)
            }
            "uniform" => {
                let p = parse_params(body, &["lo", "hi"])?;
                Distribution::uniform(required(&p, "lo", name)?, required(&p, "hi", name)?)
            }
            "exp" => {
                let p = parse_params(body, &["rate"])?;
                Distribution::exponential(required(&p, "rate", name)?)
            }
            "const" => {
                let p = parse_params(body, &["v"])?;
                Distribution::constant(required(&p, "v", name)?)
            }
            "discrete" => {
                let spec = body
                    .trim()
                    .strip_prefix("points=")
                    .ok_or_else(|| bad(body, "expected points=x@p;y@q"))?;
                let mut pairs = Vec::new();
                for item in spec.split(';') {
                    let (x, p) = item
                        .split_once('@')
                        .ok_or_else(|| bad(item, "expected value@probability"))?;
                    pairs.push((parse_num(item, x)?, parse_num(item, p)?));
                }
                Distribution::discrete(pairs)
            }
            other => Err(bad(other, "unknown distribution family")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d(s: &str) -> Distribution {
        s.parse().unwrap()
    }

    fn all() -> Vec<Distribution> {
        [
            "inverse",
            "inverse_trunc:D=10",
            "uniform:lo=0,hi=1",
            "uniform:lo=1,hi=2",
            "exp:rate=1",
            "discrete:points=1@0.5;2@0.25;4@0.25",
            "const:v=3",
        ]
        .iter()
        .map(|s| d(s))
        .collect()
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(d("inverse").from_unit(0.5), 2.0);
        assert_eq!(d("inverse_trunc:D=10").from_unit(0.05), 10.0);
        assert_eq!(d("inverse_trunc:D=10").from_unit(0.1), 10.0);
        assert_eq!(d("inverse_trunc:D=10").from_unit(0.2), 5.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            d("const:v=3").sample(&mut rng, 4).unwrap().as_slice(),
            &[3.0; 4]
        );
    }

    #[test]
    fn inversion_matches_quantile() {
        // Tail inversion: X = S^{-1}(u) with S the survival function.
        for u in [1.0, 0.9, 0.5, 0.37, 0.1, 0.01, 1e-6] {
            assert_eq!(d("inverse").from_unit(u), 1.0 / u);
            assert_eq!(d("uniform:lo=0,hi=1").from_unit(u), 1.0 - u);
            assert_eq!(d("exp:rate=2").from_unit(u), -u.ln() / 2.0);
            let x = d("discrete:points=1@0.5;2@0.25;4@0.25").from_unit(u);
            let expected = if u > 0.5 {
                1.0
            } else if u > 0.25 {
                2.0
            } else {
                4.0
            };
            assert_eq!(x, expected, "u = {u}");
        }
    }

    #[test]
    fn tail_examples() {
        assert_eq!(d("inverse").tail(4.0), 0.25);
        assert_eq!(d("uniform:lo=0,hi=1").tail(0.25), 0.75);
        assert_eq!(d("inverse_trunc:D=10").tail(10.0), 0.0);
        assert_eq!(d("inverse_trunc:D=10").tail(9.0), 1.0 / 9.0);
        assert_eq!(d("discrete:points=1@0.5;2@0.25;4@0.25").tail(1.0), 0.5);
        assert_eq!(d("const:v=3").tail(2.9), 1.0);
    }

    #[test]
    fn r_f_examples() {
        assert_eq!(d("inverse").r_f(), 1.0);
        assert_eq!(d("uniform:lo=0,hi=1").r_f(), 0.25);
        assert_eq!(d("const:v=3").r_f(), 3.0);
        assert_eq!(d("uniform:lo=1,hi=2").r_f(), 1.0);
        assert_eq!(d("inverse_trunc:D=100").r_f(), 1.0);
        // max(1·1, 2·0.5, 4·0.25)
        assert_eq!(d("discrete:points=1@0.5;2@0.25;4@0.25").r_f(), 1.0);
    }

    #[test]
    fn r_f_bounds_tail_revenue() {
        for dist in all() {
            let r = dist.r_f();
            for i in 0..20_000 {
                let x = i as f64 * 0.001;
                assert!(x * dist.tail(x) <= r + 1e-12, "{dist} at {x}");
            }
        }
    }

    #[test]
    fn empirical_tail_converges() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        for dist in all() {
            let mut xs = vec![0.0; n];
            dist.fill(&mut rng, &mut xs);
            for probe in [0.2, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0, 5.0, 9.5] {
                let p = dist.tail(probe);
                let emp = xs.iter().filter(|&&x| x > probe).count() as f64 / n as f64;
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!(
                    (emp - p).abs() <= 3.0 * se + 1e-12,
                    "{dist} at {probe}: empirical {emp} vs {p}"
                );
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for dist in all() {
            assert_eq!(d(&dist.to_string()), dist);
        }
        assert_eq!(d("inverse_trunc:D=10").to_string(), "inverse_trunc:D=10");
        assert_eq!(d("uniform:lo=0,hi=1").to_string(), "uniform:lo=0,hi=1");
    }

    #[test]
    fn parse_errors_name_token() {
        let err = |s: &str| s.parse::<Distribution>().unwrap_err().to_string();
        assert!(err("gamma:k=2").contains("`gamma`"));
        assert!(err("uniform:lo=0,hi=x").contains("`x`"));
        assert!(err("uniform:lo=0,top=1").contains("top=1"));
        assert!(err("exp").contains("rate"));
        assert!(err("discrete:points=1@0.5;2@0.4").contains("sum"));
        assert!(err("discrete:points=1@0.5;1@0.5").contains("duplicate"));
        assert!(err("discrete:points=1-0.5").contains("1-0.5"));
        assert!(err("uniform:lo=2,hi=1").contains("lo < hi"));
        assert!(err("inverse_trunc:D=0.5").contains(">= 1"));
    }

    #[test]
    fn bounds() {
        assert_eq!(d("inverse").support_upper(), None);
        assert_eq!(d("inverse_trunc:D=10").support_upper(), Some(10.0));
        assert_eq!(d("uniform:lo=0,hi=1").support_upper(), Some(1.0));
        assert!(!d("exp:rate=1").is_bounded());
        assert_eq!(d("inverse").family(), Family::Inverse);
    }
}
