//! Log-domain probability and code-length primitives.
//!
//! Every quantity here is expressed in bits (base-2 logarithms). Code lengths
//! are non-negative, log-probabilities are non-positive, and `0 log 0` is taken
//! to be `0` throughout.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use thiserror::Error;

/// A quantity measured in bits.
pub type Bits = f64;

/// Exact integer binomials are used up to this size (`C(64, 32)` fits in `u128`).
const EXACT_BINOMIAL_MAX_N: u64 = 64;

/// Cumulative log-factorial table covers `0..LOG_FACTORIAL_TABLE_LEN`.
const LOG_FACTORIAL_TABLE_LEN: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("invalid counts: k = {k} must satisfy 0 <= k <= n = {n}")]
    InvalidCounts { n: u64, k: u64 },

    #[error("empty region: n must be at least 1")]
    EmptyRegion,

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("divergence is infinite: p = {p} is not absolutely continuous w.r.t. q = {q}")]
    InfiniteDivergence { p: f64, q: f64 },

    #[error("{0}")]
    OutOfDomain(&'static str),
}

/// Pixel count `n`, count of ones `k` and their ratio for one region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegionCounts {
    n: u64,
    k: u64,
}

impl RegionCounts {
    pub fn new(n: u64, k: u64) -> Result<Self, NumericError> {
        if n == 0 {
            return Err(NumericError::EmptyRegion);
        }
        if k > n {
            return Err(NumericError::InvalidCounts { n, k });
        }
        Ok(Self { n, k })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// Empirical density of ones, `k / n`.
    pub fn q(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Counts of the complement of `self` inside `whole`.
    ///
    /// Returns `None` if `self` is not contained in `whole` or the complement
    /// is empty.
    pub fn complement_in(&self, whole: &RegionCounts) -> Option<RegionCounts> {
        let n = whole.n.checked_sub(self.n)?;
        let k = whole.k.checked_sub(self.k)?;
        RegionCounts::new(n, k).ok()
    }
}

fn check_counts(n: u64, k: u64) -> Result<(), NumericError> {
    if k > n {
        Err(NumericError::InvalidCounts { n, k })
    } else {
        Ok(())
    }
}

fn check_probability(q: f64) -> Result<(), NumericError> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(NumericError::InvalidProbability(q))
    }
}

/// `x log2 y` with the convention `0 log 0 = 0`.
fn xlog2y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.log2()
    }
}

fn exact_binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is always divisible by (i + 1) at this point.
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

fn log2_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = Vec::with_capacity(LOG_FACTORIAL_TABLE_LEN);
        let mut acc = 0.0;
        table.push(0.0);
        for i in 1..LOG_FACTORIAL_TABLE_LEN {
            acc += (i as f64).log2();
            table.push(acc);
        }
        table
    })
}

fn log2_factorial_lgamma(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) / LN_2
}

/// `log2 C(n, k)`.
///
/// Exact integer arithmetic for `n <= 64`, a cumulative log table below
/// `10^4`, and a log-gamma difference above.
pub fn log_binomial(n: u64, k: u64) -> Result<Bits, NumericError> {
    check_counts(n, k)?;
    if k == 0 || k == n {
        return Ok(0.0);
    }
    if n <= EXACT_BINOMIAL_MAX_N {
        return Ok((exact_binomial(n, k) as f64).log2());
    }
    if (n as usize) < LOG_FACTORIAL_TABLE_LEN {
        let t = log2_factorial_table();
        let v = t[n as usize] - t[k as usize] - t[(n - k) as usize];
        return Ok(v.max(0.0));
    }
    let v = log2_factorial_lgamma(n) - log2_factorial_lgamma(k) - log2_factorial_lgamma(n - k);
    Ok(v.max(0.0))
}

/// Running base-2 log-sum-exp accumulator: the total is `2^max * scaled`.
struct Log2Sum {
    max: f64,
    scaled: f64,
}

impl Log2Sum {
    fn new(first: f64) -> Self {
        Self {
            max: first,
            scaled: 1.0,
        }
    }

    fn add(&mut self, term: f64) {
        if term > self.max {
            self.scaled = self.scaled * (self.max - term).exp2() + 1.0;
            self.max = term;
        } else {
            self.scaled += (term - self.max).exp2();
        }
    }

    fn log2(&self) -> f64 {
        self.max + self.scaled.log2()
    }
}

/// `log2 P[K >= k]` for `K ~ Binomial(n, q)`.
///
/// Above the mode, terms are generated from `i = k` upward with the ratio
/// `t(i+1)/t(i) = (n-i)/(i+1) * q/(1-q)` and accumulated with a rescaling
/// log-sum-exp, truncated once the remainder is negligible. At or below the
/// mode the complement `1 - P[K < k]` is used instead.
pub fn binomial_tail_log(n: u64, k: u64, q: f64) -> Result<Bits, NumericError> {
    check_counts(n, k)?;
    check_probability(q)?;
    if k == 0 || q == 1.0 {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let log_q = q.log2();
    let log_1mq = (-q).ln_1p() / LN_2;
    let log_odds = log_q - log_1mq;
    let log_term = |i: u64| -> Result<f64, NumericError> {
        Ok(log_binomial(n, i)? + i as f64 * log_q + (n - i) as f64 * log_1mq)
    };

    let mode = ((n + 1) as f64 * q).floor() as u64;
    if k <= mode {
        // Upper tail holds most of the mass: sum the lower tail from k - 1
        // downward, where terms decrease, and take the complement.
        let mut term = log_term(k - 1)?;
        let mut sum = Log2Sum::new(term);
        for i in (1..k).rev() {
            // t(i-1)/t(i) = i/(n-i+1) * (1-q)/q
            let log_ratio = (i as f64 / (n - i + 1) as f64).log2() - log_odds;
            term += log_ratio;
            sum.add(term);
            if truncation_reached(term, log_ratio, &sum) {
                break;
            }
        }
        let lower = sum.log2().exp2().min(1.0);
        return Ok(((-lower).ln_1p() / LN_2).min(0.0));
    }

    let mut term = log_term(k)?;
    let mut sum = Log2Sum::new(term);
    for i in k..n {
        let log_ratio = ((n - i) as f64 / (i + 1) as f64).log2() + log_odds;
        term += log_ratio;
        sum.add(term);
        if truncation_reached(term, log_ratio, &sum) {
            break;
        }
    }
    Ok(sum.log2().min(0.0))
}

/// True once the geometric bound on the remaining terms, `t r / (1 - r)`,
/// is below `2^-60` of the running total.
fn truncation_reached(term: f64, log_ratio: f64, sum: &Log2Sum) -> bool {
    if log_ratio >= 0.0 {
        return false;
    }
    let r = log_ratio.exp2();
    term + (r / (1.0 - r)).log2() < sum.log2() - 60.0
}

/// Bernoulli Kullback-Leibler divergence `D(p || q)` in bits.
///
/// A `q` on the boundary `{0, 1}` with `p != q` makes the divergence infinite,
/// reported as [`NumericError::InfiniteDivergence`].
pub fn bernoulli_kld(p: f64, q: f64) -> Result<Bits, NumericError> {
    check_probability(p)?;
    check_probability(q)?;
    if p == q {
        return Ok(0.0);
    }
    if q == 0.0 || q == 1.0 {
        return Err(NumericError::InfiniteDivergence { p, q });
    }
    let d = xlog2y(p, p / q) + xlog2y(1.0 - p, (1.0 - p) / (1.0 - q));
    Ok(d.max(0.0))
}

/// Binary entropy `h(q)` in bits.
pub fn binary_entropy(q: f64) -> Result<Bits, NumericError> {
    check_probability(q)?;
    Ok(-xlog2y(q, q) - xlog2y(1.0 - q, 1.0 - q))
}

/// Chernoff-Hoeffding upper bound on [`binomial_tail_log`]: `-n D(k/n || q)`.
///
/// Only defined for `k/n > q`; below the mean the tail is at least one half
/// and the caller should branch.
pub fn hoeffding_tail_bound(n: u64, k: u64, q: f64) -> Result<Bits, NumericError> {
    check_counts(n, k)?;
    check_probability(q)?;
    if n == 0 {
        return Err(NumericError::EmptyRegion);
    }
    let q1 = k as f64 / n as f64;
    if q1 <= q {
        return Err(NumericError::OutOfDomain(
            "hoeffding bound requires k/n > q",
        ));
    }
    match bernoulli_kld(q1, q) {
        Ok(d) => Ok(-(n as f64) * d),
        Err(NumericError::InfiniteDivergence { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Stirling approximation of `log2 C(n, k)`, for `0 < k < n`.
pub fn stirling_log_binomial(n: u64, k: u64) -> Result<Bits, NumericError> {
    check_counts(n, k)?;
    if k == 0 || k == n {
        return Err(NumericError::OutOfDomain(
            "stirling approximation needs 0 < k < n",
        ));
    }
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    Ok(0.5 * (1.0 / (2.0 * PI)).log2()
        + 0.5 * (nf / (kf * rest)).log2()
        + kf * (nf / kf).log2()
        + rest * (nf / rest).log2())
}

/// `g(k, n) = log2(n^3 / (k (n - k)))`, for `0 < k < n`.
pub fn g_term(k: u64, n: u64) -> Result<Bits, NumericError> {
    check_counts(n, k)?;
    if k == 0 || k == n {
        return Err(NumericError::OutOfDomain("g(k, n) needs 0 < k < n"));
    }
    let (nf, kf) = (n as f64, k as f64);
    Ok(3.0 * nf.log2() - kf.log2() - (nf - kf).log2())
}

/// `(g(k0, n0) + g(k1, n1) - g(k0 + k1, n0 + n1)) / 2`, the extra MDL term of
/// a two-region split.
pub fn g_split_term(k0: u64, n0: u64, k1: u64, n1: u64) -> Result<Bits, NumericError> {
    Ok(0.5 * (g_term(k0, n0)? + g_term(k1, n1)? - g_term(k0 + k1, n0 + n1)?))
}

/// Closed-form upper bound of [`g_split_term`]: `log2(n^{5/2} / (4(n - 2))) - 1`.
pub fn g_split_upper_bound(n: u64) -> Bits {
    let nf = n as f64;
    2.5 * nf.log2() - (4.0 * (nf - 2.0)).log2() - 1.0
}

/// Exact minimum of [`g_split_term`] over all feasible splits of `n`:
/// `(3 + log2((n - 2) / n)) / 2`, attained with a two-pixel region holding a
/// single one and the remainder at density one half.
///
/// This sits below `1.5` for every `n`, so neither `log2(n) / 2` nor `log2 n`
/// is a valid lower bound once `n >= 8`.
pub fn g_split_lower_bound(n: u64) -> Bits {
    let nf = n as f64;
    0.5 * (3.0 + ((nf - 2.0) / nf).log2())
}

/// Exhaustive minimum and maximum of [`g_split_term`] over every split
/// `n0 + n1 = n`, `0 < k0 < n0`, `0 < k1 < n1`.
pub fn g_split_extrema(n: u64) -> Result<(Bits, Bits), NumericError> {
    if n < 4 {
        return Err(NumericError::OutOfDomain("a feasible split needs n >= 4"));
    }
    let nf = n as f64;
    let log = |x: u64| (x as f64).log2();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n1 in 2..=n - 2 {
        let n0 = n - n1;
        let g0: Vec<f64> = (1..n0)
            .map(|k0| 3.0 * log(n0) - log(k0) - log(n0 - k0))
            .collect();
        for k1 in 1..n1 {
            let g1 = 3.0 * log(n1) - log(k1) - log(n1 - k1);
            for (idx, g0v) in g0.iter().enumerate() {
                let k = idx as u64 + 1 + k1;
                let g = 3.0 * nf.log2() - log(k) - log(n - k);
                let t = 0.5 * (g0v + g1 - g);
                lo = lo.min(t);
                hi = hi.max(t);
            }
        }
    }
    Ok((lo, hi))
}
