use libm::{exp, lgamma, log, pow, sqrt};

use super::RandomStream;
use crate::error::{Error, Result};

/// Inclusive upper bound on the number of ranks a [`ZipfTable`] precomputes.
pub const MAX_ZIPF_CARDINALITY: u64 = 1_000_000;

/// Returns `true` with probability `p`.
pub fn sample_bernoulli(s: &mut RandomStream, p: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("bernoulli probability {p} outside [0, 1]")));
    }
    Ok(bernoulli(s, p))
}

#[inline]
pub(crate) fn bernoulli(s: &mut RandomStream, p: f64) -> bool {
    s.next_f64() < p
}

/// Draws index `i` with probability `weights[i] / sum(weights)`.
pub fn sample_multinomial(s: &mut RandomStream, weights: &[f64]) -> Result<usize> {
    Ok(CumulativeTable::new(weights)?.sample(s))
}

/// Inverse-CDF sampler over a fixed set of nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl CumulativeTable {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut cdf = Vec::with_capacity(weights.len());
        let mut total = 0.0;
        let mut last_positive = None;
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::param(format!("weight {i} is {w}; weights must be finite and >= 0")));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            total += w;
            cdf.push(total);
        }
        let last_positive = last_positive
            .ok_or_else(|| Error::param("weights must contain at least one positive entry"))?;
        if !total.is_finite() {
            return Err(Error::param("sum of weights overflows"));
        }
        Ok(Self { cdf, last_positive })
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cdf[self.cdf.len() - 1]
    }

    /// Probability mass of category `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let prev = if i == 0 { 0.0 } else { self.cdf[i - 1] };
        (self.cdf[i] - prev) / self.total()
    }

    #[inline]
    pub fn sample(&self, s: &mut RandomStream) -> usize {
        self.sample_at(s.next_f64() * self.total())
    }

    /// Category whose cumulative interval contains `u`, for `u` in `[0, total)`.
    #[inline]
    pub(crate) fn sample_at(&self, u: f64) -> usize {
        // First index whose cumulative weight exceeds u; zero-weight entries
        // share their predecessor's cumulative value and are never selected.
        let i = self.cdf.partition_point(|&c| c <= u);
        i.min(self.last_positive)
    }
}

/// Zipf distribution over ranks `1..=cardinality` with `P(k) ∝ k^-exponent`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZipfTable {
    exponent: f64,
    table: CumulativeTable,
}

impl ZipfTable {
    pub fn new(exponent: f64, cardinality: u64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::param(format!("zipf exponent {exponent} must be > 0")));
        }
        if cardinality == 0 || cardinality > MAX_ZIPF_CARDINALITY {
            return Err(Error::param(format!(
                "zipf cardinality {cardinality} must be in 1..={MAX_ZIPF_CARDINALITY}"
            )));
        }
        let weights: Vec<f64> = (1..=cardinality).map(|k| pow(k as f64, -exponent)).collect();
        Ok(Self {
            exponent,
            table: CumulativeTable::new(&weights)?,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn cardinality(&self) -> u64 {
        self.table.len() as u64
    }

    /// Draws a rank in `1..=cardinality`.
    #[inline]
    pub fn sample(&self, s: &mut RandomStream) -> u64 {
        self.table.sample(s) as u64 + 1
    }
}

/// Standard normal deviate (Marsaglia polar method, one value per accepted pair).
pub fn sample_normal(s: &mut RandomStream) -> f64 {
    loop {
        let u = 2.0 * s.next_f64() - 1.0;
        let v = 2.0 * s.next_f64() - 1.0;
        let r = u * u + v * v;
        if r > 0.0 && r < 1.0 {
            return u * sqrt(-2.0 * log(r) / r);
        }
    }
}

/// Gamma(shape, 1) deviate.
pub fn sample_gamma(s: &mut RandomStream, shape: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::param(format!("gamma shape {shape} must be > 0")));
    }
    Ok(exp(log_gamma_deviate(s, shape)))
}

// Marsaglia and Tsang (2000) for shape >= 1.
fn gamma_at_least_one(s: &mut RandomStream, shape: f64) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / sqrt(9.0 * d);
    loop {
        let x = sample_normal(s);
        let t = 1.0 + c * x;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = s.next_open_f64();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || log(u) < 0.5 * x2 + d * (1.0 - v + log(v)) {
            return d * v;
        }
    }
}

/// Logarithm of a Gamma(shape, 1) deviate. Working in log space keeps small
/// shapes from underflowing to exactly zero.
fn log_gamma_deviate(s: &mut RandomStream, shape: f64) -> f64 {
    if shape >= 1.0 {
        log(gamma_at_least_one(s, shape))
    } else {
        // G(a) = G(a + 1) * U^(1/a)
        let g = gamma_at_least_one(s, shape + 1.0);
        log(g) + log(s.next_open_f64()) / shape
    }
}

/// Dirichlet(alpha) deviate via normalized Gamma draws.
pub fn sample_dirichlet(s: &mut RandomStream, alpha: &[f64]) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(Error::param("dirichlet requires at least one component"));
    }
    if let Some((i, a)) = alpha
        .iter()
        .enumerate()
        .find(|(_, a)| !(**a > 0.0 && a.is_finite()))
    {
        return Err(Error::param(format!("dirichlet alpha[{i}] = {a} must be > 0")));
    }
    let mut out = Vec::with_capacity(alpha.len());
    dirichlet_into(s, alpha, &mut out);
    Ok(out)
}

/// Unchecked Dirichlet draw into a reusable buffer; `alpha` must be valid.
pub(crate) fn dirichlet_into(s: &mut RandomStream, alpha: &[f64], out: &mut Vec<f64>) {
    out.clear();
    if alpha.len() == 1 {
        out.push(1.0);
        return;
    }
    let mut max = f64::NEG_INFINITY;
    for &a in alpha {
        let lg = log_gamma_deviate(s, a);
        max = max.max(lg);
        out.push(lg);
    }
    let mut total = 0.0;
    for v in out.iter_mut() {
        *v = exp(*v - max);
        total += *v;
    }
    for v in out.iter_mut() {
        *v /= total;
    }
}

/// Poisson(xi) deviate: sequential inversion below 30, Hörmann's PTRS
/// transformed rejection above.
pub fn sample_poisson(s: &mut RandomStream, xi: f64) -> Result<u64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::param(format!("poisson mean {xi} must be > 0")));
    }
    Ok(poisson(s, xi))
}

pub(crate) fn poisson(s: &mut RandomStream, xi: f64) -> u64 {
    if xi < 30.0 {
        poisson_inversion(s, xi)
    } else {
        poisson_ptrs(s, xi)
    }
}

fn poisson_inversion(s: &mut RandomStream, xi: f64) -> u64 {
    let u = s.next_f64();
    let mut k = 0u64;
    let mut p = exp(-xi);
    let mut cdf = p;
    // Stop once the remaining mass has underflowed; cdf may stall just below u.
    while u > cdf && p > 0.0 {
        k += 1;
        p *= xi / k as f64;
        cdf += p;
    }
    k
}

fn poisson_ptrs(s: &mut RandomStream, xi: f64) -> u64 {
    let slam = sqrt(xi);
    let loglam = log(xi);
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = s.next_f64() - 0.5;
        let v = s.next_open_f64();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + xi + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        if log(v) + log(inv_alpha) - log(a / (us * us) + b) <= -xi + k * loglam - lgamma(k + 1.0) {
            return k as u64;
        }
    }
}
