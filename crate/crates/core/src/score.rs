//! The paired (MDL, NFA) record every scenario reports.

use std::fmt;
use std::str::FromStr;

use crate::numeric::Bits;

/// Which criterion drives a decision or a selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    Mdl,
    Nfa,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Mdl => "mdl",
            Criterion::Nfa => "nfa",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mdl" => Ok(Criterion::Mdl),
            "nfa" => Ok(Criterion::Nfa),
            other => Err(format!("unknown criterion '{other}'")),
        }
    }
}

/// NFA threshold. Detection means `NFA <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Option<Self> {
        (value > 0.0 && value.is_finite()).then_some(Self(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn log2(&self) -> Bits {
        self.0.log2()
    }
}

impl Default for Epsilon {
    fn default() -> Self {
        Self(1.0)
    }
}

/// MDL code length relative to the background-only description, and `log2 NFA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    pub mdl_bits: Bits,
    pub log2_nfa: Bits,
}

impl Score {
    pub fn new(mdl_bits: Bits, log2_nfa: Bits) -> Self {
        Self { mdl_bits, log2_nfa }
    }

    /// MDL prefers the structure when it shortens the description.
    pub fn mdl_detects(&self) -> bool {
        self.mdl_bits < 0.0
    }

    pub fn nfa_detects(&self, eps: Epsilon) -> bool {
        self.log2_nfa <= eps.log2()
    }

    pub fn detects(&self, criterion: Criterion, eps: Epsilon) -> bool {
        match criterion {
            Criterion::Mdl => self.mdl_detects(),
            Criterion::Nfa => self.nfa_detects(eps),
        }
    }

    pub fn log10_nfa(&self) -> f64 {
        self.log2_nfa * std::f64::consts::LOG10_2
    }
}
