//! Exhaustive comparison of the by-parts MDL decision with the a-contrario
//! decision at `eps = 1`, over every configuration of small parts.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::imaging::seeded_rng;

/// Largest number of configurations enumerated for one part.
pub const MAX_STATES: u64 = 1 << 24;

/// Relative tolerance under which two code lengths are treated as equal.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EquivalenceError {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    Alphabet(u32),

    #[error("part of length {length} over {size} symbols exceeds the {MAX_STATES}-state limit")]
    TooManyStates { size: u32, length: usize },

    #[error("risk weight {0} must be positive and finite")]
    InvalidEta(f64),

    #[error("risk weights violate the Kraft inequality: sum of 1/eta is {0}")]
    Kraft(f64),

    #[error("configuration has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },

    #[error("symbol {0} is outside the alphabet")]
    Symbol(u8),

    #[error("empty family")]
    EmptyFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self, EquivalenceError> {
        if !(2..=256).contains(&size) {
            return Err(EquivalenceError::Alphabet(size));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    /// `|X|^n`, or an error past [`MAX_STATES`].
    pub fn states(&self, length: usize) -> Result<u64, EquivalenceError> {
        let too_many = EquivalenceError::TooManyStates {
            size: self.size,
            length,
        };
        let mut total = 1u64;
        for _ in 0..length {
            total = total
                .checked_mul(u64::from(self.size))
                .ok_or_else(|| too_many.clone())?;
            if total > MAX_STATES {
                return Err(too_many);
            }
        }
        Ok(total)
    }

    /// Configuration number `index` (first symbol least significant).
    pub fn decode(&self, mut index: u64, length: usize, out: &mut [u8]) {
        let base = u64::from(self.size);
        for slot in out.iter_mut().take(length) {
            *slot = (index % base) as u8;
            index /= base;
        }
    }

    pub fn encode(&self, v: &[u8]) -> u64 {
        v.iter()
            .rev()
            .fold(0, |acc, &s| acc * u64::from(self.size) + u64::from(s))
    }
}

/// A statistic ranking configurations; larger means more anomalous.
pub trait OrderingFunction: Send + Sync + fmt::Debug {
    fn eval(&self, v: &[u8]) -> f64;
    fn name(&self) -> String;
}

/// Number of occurrences of `symbol`.
#[derive(Debug, Clone, Copy)]
pub struct CountOf(pub u8);

impl OrderingFunction for CountOf {
    fn eval(&self, v: &[u8]) -> f64 {
        v.iter().filter(|&&s| s == self.0).count() as f64
    }

    fn name(&self) -> String {
        format!("count_of({})", self.0)
    }
}

/// Length of the longest run of `symbol`.
#[derive(Debug, Clone, Copy)]
pub struct LongestRun(pub u8);

impl OrderingFunction for LongestRun {
    fn eval(&self, v: &[u8]) -> f64 {
        let (mut best, mut cur) = (0usize, 0usize);
        for &s in v {
            cur = if s == self.0 { cur + 1 } else { 0 };
            best = best.max(cur);
        }
        best as f64
    }

    fn name(&self) -> String {
        format!("longest_run({})", self.0)
    }
}

/// `sum_i w_i v_i`.
#[derive(Debug, Clone)]
pub struct WeightedSum(pub Vec<f64>);

impl OrderingFunction for WeightedSum {
    fn eval(&self, v: &[u8]) -> f64 {
        v.iter().zip(&self.0).map(|(&s, &w)| w * f64::from(s)).sum()
    }

    fn name(&self) -> String {
        format!("weighted_sum({:?})", self.0)
    }
}

/// The same value for every configuration.
#[derive(Debug, Clone, Copy)]
pub struct Constant;

impl OrderingFunction for Constant {
    fn eval(&self, _: &[u8]) -> f64 {
        0.0
    }

    fn name(&self) -> String {
        "constant".into()
    }
}

/// A seeded random integer score in `0..levels` per configuration.
#[derive(Debug, Clone)]
pub struct RandomTable {
    alphabet: Alphabet,
    seed: u64,
    levels: u32,
    table: Vec<f64>,
}

impl RandomTable {
    pub fn new(
        alphabet: Alphabet,
        length: usize,
        levels: u32,
        seed: u64,
    ) -> Result<Self, EquivalenceError> {
        let states = alphabet.states(length)?;
        let mut rng = seeded_rng(seed, 0xE0);
        let table = (0..states)
            .map(|_| f64::from(rng.gen_range(0..levels.max(1))))
            .collect();
        Ok(Self {
            alphabet,
            seed,
            levels,
            table,
        })
    }
}

impl OrderingFunction for RandomTable {
    fn eval(&self, v: &[u8]) -> f64 {
        self.table[self.alphabet.encode(v) as usize]
    }

    fn name(&self) -> String {
        format!("random_table(levels={}, seed={})", self.levels, self.seed)
    }
}

/// One part: its length, risk weight `eta` and ordering function.
#[derive(Debug, Clone)]
pub struct PartSpec {
    pub length: usize,
    pub eta: f64,
    pub xi: Arc<dyn OrderingFunction>,
}

impl PartSpec {
    pub fn new(
        length: usize,
        eta: f64,
        xi: Arc<dyn OrderingFunction>,
    ) -> Result<Self, EquivalenceError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(EquivalenceError::InvalidEta(eta));
        }
        Ok(Self { length, eta, xi })
    }
}

fn check_config(alphabet: Alphabet, spec: &PartSpec, x: &[u8]) -> Result<(), EquivalenceError> {
    if x.len() != spec.length {
        return Err(EquivalenceError::Length {
            expected: spec.length,
            got: x.len(),
        });
    }
    if let Some(&s) = x.iter().find(|&&s| u32::from(s) >= alphabet.size()) {
        return Err(EquivalenceError::Symbol(s));
    }
    Ok(())
}

fn all_values(alphabet: Alphabet, spec: &PartSpec) -> Result<Vec<f64>, EquivalenceError> {
    let states = alphabet.states(spec.length)?;
    Ok((0..states)
        .into_par_iter()
        .map_init(
            || vec![0u8; spec.length],
            |buf, i| {
                alphabet.decode(i, spec.length, buf);
                spec.xi.eval(buf)
            },
        )
        .collect())
}

/// Number of configurations `v` with `xi(v) >= threshold`.
pub fn tail_count(
    alphabet: Alphabet,
    spec: &PartSpec,
    threshold: f64,
) -> Result<u64, EquivalenceError> {
    Ok(all_values(alphabet, spec)?
        .iter()
        .filter(|&&v| v >= threshold)
        .count() as u64)
}

fn nfa_from_tail(alphabet: Alphabet, spec: &PartSpec, tail: u64) -> bool {
    let total = f64::from(alphabet.size()).powi(spec.length as i32);
    spec.eta * (tail as f64) < total
}

fn mdl_from_tail(alphabet: Alphabet, spec: &PartSpec, tail: u64) -> bool {
    let lhs = spec.eta.log2() + (tail as f64).log2();
    let rhs = spec.length as f64 * f64::from(alphabet.size()).log2();
    lhs < rhs - TIE_TOLERANCE * rhs.abs().max(1.0)
}

fn is_boundary(alphabet: Alphabet, spec: &PartSpec, tail: u64) -> bool {
    let total = f64::from(alphabet.size()).powi(spec.length as i32);
    spec.eta * tail as f64 == total
}

/// `eta * P[xi(X) >= xi(x)] < 1` under the uniform distribution.
pub fn nfa_decision(
    alphabet: Alphabet,
    spec: &PartSpec,
    x: &[u8],
) -> Result<bool, EquivalenceError> {
    check_config(alphabet, spec, x)?;
    let tail = tail_count(alphabet, spec, spec.xi.eval(x))?;
    Ok(nfa_from_tail(alphabet, spec, tail))
}

/// `log2 eta + l < n log2 |X|`, where `l` is the log of the number of
/// configurations at least as extreme as `x` (one shared code length for
/// the whole tail set).
pub fn mdl_parts_decision(
    alphabet: Alphabet,
    spec: &PartSpec,
    x: &[u8],
) -> Result<bool, EquivalenceError> {
    check_config(alphabet, spec, x)?;
    let tail = tail_count(alphabet, spec, spec.xi.eval(x))?;
    Ok(mdl_from_tail(alphabet, spec, tail))
}

/// One configuration on which the two decisions differ.
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub configuration: Vec<u8>,
    pub tail: u64,
    pub nfa: bool,
    pub mdl: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartReport {
    pub length: usize,
    pub eta: f64,
    pub xi: String,
    pub configurations: u64,
    pub nfa_accepts: u64,
    pub mdl_accepts: u64,
    pub agreements: u64,
    /// Configurations with `eta * P` exactly `1`.
    pub boundary_cases: u64,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub alphabet: u32,
    pub kraft_sum: f64,
    pub parts: Vec<PartReport>,
}

impl EquivalenceReport {
    pub fn total_configurations(&self) -> u64 {
        self.parts.iter().map(|p| p.configurations).sum()
    }

    pub fn mismatch_count(&self) -> usize {
        self.parts.iter().map(|p| p.mismatches.len()).sum()
    }

    pub fn boundary_cases(&self) -> u64 {
        self.parts.iter().map(|p| p.boundary_cases).sum()
    }
}

impl fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alphabet size: {}", self.alphabet)?;
        writeln!(f, "kraft sum: {:.12}", self.kraft_sum)?;
        for (i, p) in self.parts.iter().enumerate() {
            writeln!(
                f,
                "part {i}: n={} eta={} xi={} configurations={} nfa_accepts={} mdl_accepts={} agreements={} boundary={} mismatches={}",
                p.length,
                p.eta,
                p.xi,
                p.configurations,
                p.nfa_accepts,
                p.mdl_accepts,
                p.agreements,
                p.boundary_cases,
                p.mismatches.len()
            )?;
        }
        writeln!(
            f,
            "total: configurations={} boundary={} mismatches={}",
            self.total_configurations(),
            self.boundary_cases(),
            self.mismatch_count()
        )
    }
}

fn check_part(alphabet: Alphabet, spec: &PartSpec) -> Result<PartReport, EquivalenceError> {
    let values = all_values(alphabet, spec)?;
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let total = values.len();
    let mut report = PartReport {
        length: spec.length,
        eta: spec.eta,
        xi: spec.xi.name(),
        configurations: total as u64,
        nfa_accepts: 0,
        mdl_accepts: 0,
        agreements: 0,
        boundary_cases: 0,
        mismatches: Vec::new(),
    };
    let mut buf = vec![0u8; spec.length];
    for (i, &v) in values.iter().enumerate() {
        let tail = (total - sorted.partition_point(|&s| s < v)) as u64;
        let nfa = nfa_from_tail(alphabet, spec, tail);
        let mdl = mdl_from_tail(alphabet, spec, tail);
        report.nfa_accepts += u64::from(nfa);
        report.mdl_accepts += u64::from(mdl);
        report.boundary_cases += u64::from(is_boundary(alphabet, spec, tail));
        if nfa == mdl {
            report.agreements += 1;
        } else {
            alphabet.decode(i as u64, spec.length, &mut buf);
            report.mismatches.push(Mismatch {
                configuration: buf.clone(),
                tail,
                nfa,
                mdl,
            });
        }
    }
    Ok(report)
}

/// Runs both decisions on every configuration of every part.
pub fn check_equivalence(
    alphabet: Alphabet,
    family: &[PartSpec],
) -> Result<EquivalenceReport, EquivalenceError> {
    if family.is_empty() {
        return Err(EquivalenceError::EmptyFamily);
    }
    for p in family {
        if !(p.eta > 0.0 && p.eta.is_finite()) {
            return Err(EquivalenceError::InvalidEta(p.eta));
        }
        alphabet.states(p.length)?;
    }
    let kraft_sum: f64 = family.iter().map(|p| 1.0 / p.eta).sum();
    if kraft_sum > 1.0 + TIE_TOLERANCE {
        return Err(EquivalenceError::Kraft(kraft_sum));
    }
    let parts = family
        .par_iter()
        .map(|p| check_part(alphabet, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EquivalenceReport {
        alphabet: alphabet.size(),
        kraft_sum,
        parts,
    })
}
