//! Limit-law descriptors and their numerical evaluation.
//!
//! All laws describe the transition time divided by its mean, so every
//! descriptor here has mean 1 by construction.

use serde::{Deserialize, Serialize};

use crate::error::LawError;
use crate::rng::Rng;

/// Closed-form limit law of the normalized transition time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawDescriptor {
    /// Survival `e^{-x}`.
    ExponentialUnit,
    /// Survival `(1 - c x)^{(1-c)/c}` on `[0, 1/c)`, 0 beyond; `c` in (0,1).
    CriticalTruncated { c: f64 },
    /// Unit mass at 1.
    DiracAtOne,
    /// Sum of independent exponentials with the listed rates.
    Hypoexponential { rates: Vec<f64> },
}

/// Relative margin below which two hypoexponential rates count as equal
/// and evaluation falls back from partial fractions to the series form.
const DISTINCT_RATE_MARGIN: f64 = 1e-8;

/// Absolute error target of the series fallback.
const SERIES_ABS_ERROR: f64 = 1e-12;

impl LawDescriptor {
    pub fn hypoexponential(rates: Vec<f64>) -> Result<Self, LawError> {
        if rates.is_empty() {
            return Err(LawError::NoRates);
        }
        if let Some(&rate) = rates.iter().find(|r| !(**r > 0.0)) {
            return Err(LawError::NonPositiveRate { rate });
        }
        Ok(LawDescriptor::Hypoexponential { rates })
    }

    /// Density and survival function at `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64), LawError> {
        if x < 0.0 {
            return Err(LawError::NegativeX { x });
        }
        Ok(match self {
            LawDescriptor::ExponentialUnit => {
                let e = (-x).exp();
                (e, e)
            }
            LawDescriptor::CriticalTruncated { c } => {
                if x >= 1.0 / c {
                    (0.0, 0.0)
                } else {
                    let base = 1.0 - c * x;
                    let survival = base.powf((1.0 - c) / c);
                    let density = (1.0 - c) * base.powf(1.0 / c - 2.0);
                    (density, survival)
                }
            }
            LawDescriptor::DiracAtOne => {
                let survival = if x < 1.0 { 1.0 } else { 0.0 };
                let density = if x == 1.0 { f64::INFINITY } else { 0.0 };
                (density, survival)
            }
            LawDescriptor::Hypoexponential { rates } => eval_hypoexp(rates, x),
        })
    }

    pub fn density(&self, x: f64) -> Result<f64, LawError> {
        Ok(self.eval(x)?.0)
    }

    pub fn survival(&self, x: f64) -> Result<f64, LawError> {
        Ok(self.eval(x)?.1)
    }

    pub fn cdf(&self, x: f64) -> Result<f64, LawError> {
        Ok(1.0 - self.eval(x)?.1)
    }

    /// Exact mean (1 for every law produced by the predictor).
    pub fn mean(&self) -> f64 {
        match self {
            LawDescriptor::ExponentialUnit => 1.0,
            LawDescriptor::CriticalTruncated { .. } => 1.0,
            LawDescriptor::DiracAtOne => 1.0,
            LawDescriptor::Hypoexponential { rates } => rates.iter().map(|r| 1.0 / r).sum(),
        }
    }

    /// Upper end of the interesting range, for tabulation and plotting.
    pub fn suggested_x_max(&self) -> f64 {
        match self {
            LawDescriptor::ExponentialUnit => 10.0,
            LawDescriptor::CriticalTruncated { c } => 1.0 / c,
            LawDescriptor::DiracAtOne => 2.0,
            LawDescriptor::Hypoexponential { rates } => {
                let slowest = rates.iter().copied().fold(f64::INFINITY, f64::min);
                // survival is dominated by the slowest stage
                (rates.len() as f64) / slowest + 12.0 / slowest
            }
        }
    }

    /// Draw one variate. Inverse-CDF for the truncated-polynomial law,
    /// stage sums for the hypoexponential; used by the self-tests.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            LawDescriptor::ExponentialUnit => rng.exp(1.0),
            LawDescriptor::CriticalTruncated { c } => {
                let u = rng.uniform().max(f64::MIN_POSITIVE);
                (1.0 - u.powf(c / (1.0 - c))) / c
            }
            LawDescriptor::DiracAtOne => 1.0,
            LawDescriptor::Hypoexponential { rates } => {
                rates.iter().map(|&r| rng.exp(r)).sum()
            }
        }
    }

    /// CSV table `x,pdf,survival` on a uniform grid over `[0, x_max]`.
    pub fn tabulate_csv(&self, x_max: f64, points: usize) -> Result<String, LawError> {
        let mut out = String::from("x,pdf,survival\n");
        let n = points.max(2);
        for i in 0..n {
            let x = x_max * i as f64 / (n - 1) as f64;
            let (pdf, survival) = self.eval(x)?;
            out.push_str(&format!("{x},{pdf},{survival}\n"));
        }
        Ok(out)
    }
}

fn eval_hypoexp(rates: &[f64], x: f64) -> (f64, f64) {
    if rates.len() == 1 {
        let r = rates[0];
        let e = (-r * x).exp();
        return (r * e, e);
    }
    if x == 0.0 {
        // exact boundary: two or more stages leave no density at 0
        return (0.0, 1.0);
    }
    if rates_distinct(rates) {
        eval_hypoexp_partial_fractions(rates, x)
    } else {
        eval_hypoexp_series(rates, x)
    }
}

fn rates_distinct(rates: &[f64]) -> bool {
    for (i, &a) in rates.iter().enumerate() {
        for &b in &rates[i + 1..] {
            if (a - b).abs() <= DISTINCT_RATE_MARGIN * a.max(b) {
                return false;
            }
        }
    }
    true
}

/// Closed form for pairwise-distinct rates:
/// `survival(x) = sum_i w_i e^{-r_i x}` with
/// `w_i = prod_{j != i} r_j / (r_j - r_i)`.
fn eval_hypoexp_partial_fractions(rates: &[f64], x: f64) -> (f64, f64) {
    let mut survival = 0.0;
    let mut density = 0.0;
    for (i, &ri) in rates.iter().enumerate() {
        let mut w = 1.0;
        for (j, &rj) in rates.iter().enumerate() {
            if j != i {
                w *= rj / (rj - ri);
            }
        }
        let e = (-ri * x).exp();
        survival += w * e;
        density += w * ri * e;
    }
    (density.max(0.0), survival.clamp(0.0, 1.0))
}

/// Series evaluation through the underlying pure-birth chain, stable for
/// repeated or nearly equal rates. The occupancy vector is propagated by
/// uniformization in slices, each truncated so that the neglected Poisson
/// tail stays below `SERIES_ABS_ERROR`; survival is the transient mass
/// and density is the flow into absorption.
fn eval_hypoexp_series(rates: &[f64], x: f64) -> (f64, f64) {
    let m = rates.len();
    let top = rates.iter().copied().fold(0.0_f64, f64::max);
    if top * x == 0.0 {
        return (if m == 1 { rates[0] } else { 0.0 }, 1.0);
    }
    // occupancy over transient states, starting in stage 0
    let mut p = vec![0.0; m];
    p[0] = 1.0;
    let mut remaining = x;
    // Poisson truncation stays cheap when each slice has mean <= 256.
    let slice = 256.0 / top;
    while remaining > 0.0 {
        let dt = remaining.min(slice);
        remaining -= dt;
        p = uniformization_step(rates, &p, top, dt);
    }
    let survival: f64 = p.iter().sum();
    let density = p[m - 1] * rates[m - 1];
    (density, survival.clamp(0.0, 1.0))
}

fn uniformization_step(rates: &[f64], p0: &[f64], top: f64, dt: f64) -> Vec<f64> {
    let m = rates.len();
    let a = top * dt;
    let mut weight = (-a).exp(); // Poisson(a) pmf at k = 0
    let mut term = p0.to_vec();
    let mut acc = vec![0.0; m];
    let mut cum = 0.0;
    let mut k: u64 = 0;
    loop {
        for i in 0..m {
            acc[i] += weight * term[i];
        }
        cum += weight;
        if 1.0 - cum < SERIES_ABS_ERROR && k as f64 > a {
            break;
        }
        // advance the occupancy one uniformized step: P = I + Q/top
        let mut next = vec![0.0; m];
        for i in 0..m {
            let stay = 1.0 - rates[i] / top;
            next[i] += term[i] * stay;
            if i + 1 < m {
                next[i + 1] += term[i] * (rates[i] / top);
            }
        }
        term = next;
        k += 1;
        weight *= a / k as f64;
        if k > 4_000_000 {
            break;
        }
    }
    acc
}
