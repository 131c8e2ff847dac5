//! Multi-edge-type degree distributions, code rates, capacity and rate planning.
//!
//! Coefficients are exact rationals so that node fractions such as `0.010625`
//! turn into integer node counts at a given block length without drift.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::{Error, Result};

/// Exact fraction used for degree coefficients and code rates.
pub type Fraction = Ratio<i128>;

/// Rate-0.02 ensemble (three edge types).
pub const R002_MET: &str = include_str!("../fixtures/r002.met");
/// Rate-0.05 reference ensemble.
pub const R005_MET: &str = include_str!("../fixtures/r005.met");

/// Degree vector `(d1, ..., d_ne)`: number of edges of each type at a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiEdgeDegree(Vec<u32>);

impl MultiEdgeDegree {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.iter().all(|&d| d == 0) {
            return Err(Error::InvalidEnsemble(
                "multi-edge degree must have a positive entry".into(),
            ));
        }
        Ok(Self(degrees))
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Total number of edges at the node, summed over types.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// One monomial `coefficient * x^d` of a node-perspective distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeTerm {
    pub coefficient: Fraction,
    pub degree: MultiEdgeDegree,
}

/// Variable (`nu`) and check (`mu`) degree distributions of a MET-LDPC ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeDistribution {
    edge_types: usize,
    variable_terms: Vec<DegreeTerm>,
    check_terms: Vec<DegreeTerm>,
}

/// A violated ensemble invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DegreeLength {
        side: Side,
        term: usize,
        len: usize,
    },
    CoefficientRange {
        side: Side,
        term: usize,
        coefficient: Fraction,
    },
    VariableSum(Fraction),
    CheckSumExceedsVariable {
        variable: Fraction,
        check: Fraction,
    },
    Sockets {
        edge_type: usize,
        variable: Fraction,
        check: Fraction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Variable,
    Check,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegreeLength { side, term, len } => {
                write!(f, "{side:?} term {term}: degree vector has length {len}")
            }
            Violation::CoefficientRange {
                side,
                term,
                coefficient,
            } => write!(f, "{side:?} term {term}: coefficient {coefficient} not in (0, 1]"),
            Violation::VariableSum(s) => write!(f, "variable coefficients sum to {s}, expected 1"),
            Violation::CheckSumExceedsVariable { variable, check } => {
                write!(f, "check coefficients sum {check} exceeds variable sum {variable}")
            }
            Violation::Sockets {
                edge_type,
                variable,
                check,
            } => write!(
                f,
                "edge type {}: variable sockets {variable} != check sockets {check}",
                edge_type + 1
            ),
        }
    }
}

/// Outcome of [`validate_distribution`]. Empty violation list means valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Per edge type: (variable-side sockets, check-side sockets), per node of block length.
    pub sockets: Vec<(Fraction, Fraction)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DegreeDistribution {
    pub fn new(
        edge_types: usize,
        variable_terms: Vec<DegreeTerm>,
        check_terms: Vec<DegreeTerm>,
    ) -> Result<Self> {
        if edge_types == 0 {
            return Err(Error::InvalidEnsemble("edge_types must be at least 1".into()));
        }
        if variable_terms.is_empty() || check_terms.is_empty() {
            return Err(Error::InvalidEnsemble(
                "need at least one variable and one check term".into(),
            ));
        }
        Ok(Self {
            edge_types,
            variable_terms,
            check_terms,
        })
    }

    /// The shipped rate-0.02 ensemble.
    pub fn rate_002() -> Self {
        R002_MET.parse().expect("shipped ensemble parses")
    }

    /// The shipped rate-0.05 reference ensemble.
    pub fn rate_005() -> Self {
        R005_MET.parse().expect("shipped ensemble parses")
    }

    pub fn edge_types(&self) -> usize {
        self.edge_types
    }

    pub fn variable_terms(&self) -> &[DegreeTerm] {
        &self.variable_terms
    }

    pub fn check_terms(&self) -> &[DegreeTerm] {
        &self.check_terms
    }

    /// Expected node counts per total degree at block length `n`, or `None`
    /// when some count is not an integer.
    pub fn node_counts(&self, side: Side, n: u64) -> Option<Vec<(u32, u64)>> {
        let terms = match side {
            Side::Variable => &self.variable_terms,
            Side::Check => &self.check_terms,
        };
        let mut counts: Vec<(u32, u64)> = Vec::new();
        for t in terms {
            let c = t.coefficient * Fraction::from_integer(n as i128);
            if !c.is_integer() {
                return None;
            }
            let c = c.to_integer() as u64;
            let d = t.degree.total();
            match counts.iter_mut().find(|(deg, _)| *deg == d) {
                Some(entry) => entry.1 += c,
                None => counts.push((d, c)),
            }
        }
        counts.sort_unstable();
        Some(counts)
    }
}

impl FromStr for DegreeDistribution {
    type Err = Error;

    /// Parses the ensemble text format: an `edge_types=<ne>` line followed by
    /// `v <coeff> <d1> .. <dne>` and `c <coeff> <d1> .. <dne>` lines. Blank
    /// lines and `#` comments are skipped.
    fn from_str(s: &str) -> Result<Self> {
        let mut edge_types: Option<usize> = None;
        let mut variable_terms = Vec::new();
        let mut check_terms = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line_no = idx + 1;
            let parse_err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("edge_types=") {
                if edge_types.is_some() {
                    return Err(parse_err("duplicate edge_types line".into()));
                }
                let ne: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_err(format!("bad edge type count {rest:?}")))?;
                if ne == 0 {
                    return Err(parse_err("edge_types must be at least 1".into()));
                }
                edge_types = Some(ne);
                continue;
            }
            let ne = edge_types.ok_or_else(|| parse_err("missing edge_types line".into()))?;
            let mut fields = line.split_whitespace();
            let kind = fields.next().unwrap_or_default();
            let coeff = fields
                .next()
                .ok_or_else(|| parse_err("missing coefficient".into()))?;
            let coefficient = parse_fraction(coeff).map_err(parse_err)?;
            let degrees = fields
                .map(|f| {
                    f.parse::<u32>()
                        .map_err(|_| parse_err(format!("bad degree {f:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if degrees.len() != ne {
                return Err(parse_err(format!(
                    "expected {ne} degrees, found {}",
                    degrees.len()
                )));
            }
            let degree = MultiEdgeDegree::new(degrees).map_err(|e| parse_err(e.to_string()))?;
            let term = DegreeTerm {
                coefficient,
                degree,
            };
            match kind {
                "v" => variable_terms.push(term),
                "c" => check_terms.push(term),
                other => return Err(parse_err(format!("unknown line kind {other:?}"))),
            }
        }
        let edge_types = edge_types.ok_or(Error::Parse {
            line: 0,
            message: "missing edge_types line".into(),
        })?;
        DegreeDistribution::new(edge_types, variable_terms, check_terms)
    }
}

impl fmt::Display for DegreeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "edge_types={}", self.edge_types)?;
        for (kind, terms) in [("v", &self.variable_terms), ("c", &self.check_terms)] {
            for t in terms.iter() {
                write!(f, "{kind} {}", t.coefficient)?;
                for d in t.degree.as_slice() {
                    write!(f, " {d}")?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

/// Parses `"0.010625"`, `"1"` or `"3/8"` into an exact fraction.
pub fn parse_fraction(s: &str) -> Result<Fraction, String> {
    let bad = || format!("bad coefficient {s:?}");
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad())?;
        let d: i128 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(n, d));
    }
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    if int_part.starts_with('-') || frac_part.len() > 30 {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
        || (int_part.is_empty() && frac_part.is_empty())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: i128 = digits.parse().map_err(|_| bad())?;
    let denom = 10i128.pow(frac_part.len() as u32);
    Ok(Fraction::new(numer, denom))
}

fn coefficient_sum(terms: &[DegreeTerm]) -> Fraction {
    terms
        .iter()
        .fold(Fraction::zero(), |acc, t| acc + t.coefficient)
}

/// Checks coefficient ranges, the unpunctured normalisation and per-type
/// socket conservation. Violations are collected, never raised.
pub fn validate_distribution(dist: &DegreeDistribution) -> ValidationReport {
    let mut violations = Vec::new();
    let one = Fraction::from_integer(1);
    for (side, terms) in [
        (Side::Variable, &dist.variable_terms),
        (Side::Check, &dist.check_terms),
    ] {
        for (i, t) in terms.iter().enumerate() {
            if t.degree.as_slice().len() != dist.edge_types {
                violations.push(Violation::DegreeLength {
                    side,
                    term: i,
                    len: t.degree.as_slice().len(),
                });
            }
            if t.coefficient <= Fraction::zero() || t.coefficient > one {
                violations.push(Violation::CoefficientRange {
                    side,
                    term: i,
                    coefficient: t.coefficient,
                });
            }
        }
    }
    let nu = coefficient_sum(&dist.variable_terms);
    let mu = coefficient_sum(&dist.check_terms);
    if nu != one {
        violations.push(Violation::VariableSum(nu));
    }
    if mu > nu {
        violations.push(Violation::CheckSumExceedsVariable {
            variable: nu,
            check: mu,
        });
    }
    let sockets_of = |terms: &[DegreeTerm], i: usize| {
        terms.iter().fold(Fraction::zero(), |acc, t| {
            let d = t.degree.as_slice().get(i).copied().unwrap_or(0);
            acc + t.coefficient * Fraction::from_integer(d as i128)
        })
    };
    let sockets: Vec<_> = (0..dist.edge_types)
        .map(|i| {
            (
                sockets_of(&dist.variable_terms, i),
                sockets_of(&dist.check_terms, i),
            )
        })
        .collect();
    for (i, &(v, c)) in sockets.iter().enumerate() {
        if v != c {
            violations.push(Violation::Sockets {
                edge_type: i,
                variable: v,
                check: c,
            });
        }
    }
    ValidationReport {
        violations,
        sockets,
    }
}

/// Design rate `sum(nu) - sum(mu)` of a valid ensemble.
pub fn code_rate(dist: &DegreeDistribution) -> Result<Fraction> {
    let report = validate_distribution(dist);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidEnsemble(v.to_string()));
    }
    Ok(coefficient_sum(&dist.variable_terms) - coefficient_sum(&dist.check_terms))
}

/// AWGN capacity `log2(1 + snr) / 2` in bits per channel use.
pub fn shannon_capacity(snr: f64) -> Result<f64> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::invalid(format!("snr must be positive, got {snr}")));
    }
    Ok(0.5 * snr.ln_1p() / std::f64::consts::LN_2)
}

/// Linear SNR at which the AWGN capacity equals `capacity` bits.
pub fn snr_for_capacity(capacity: f64) -> Result<f64> {
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(Error::invalid(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    Ok((2.0 * capacity * std::f64::consts::LN_2).exp_m1())
}

/// SNR matching `rate` at reconciliation efficiency `beta`.
pub fn snr_for_efficiency(rate: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    snr_for_capacity(rate / beta)
}

/// Reconciliation efficiency `rate / C(snr)`.
pub fn efficiency(rate: f64, snr: f64) -> Result<f64> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::invalid(format!("rate must lie in (0, 1), got {rate}")));
    }
    Ok(rate / shannon_capacity(snr)?)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdaptMode {
    Puncture,
    Extend,
    None,
}

impl fmt::Display for AdaptMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdaptMode::Puncture => "puncture",
            AdaptMode::Extend => "extend",
            AdaptMode::None => "none",
        })
    }
}

/// Bounds on how far a base matrix may be cut or extended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdaptLimits {
    pub max_p: u64,
    pub max_e: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePlan {
    pub mode: AdaptMode,
    pub length: u64,
    pub achieved_rate: Fraction,
    pub achieved_efficiency: f64,
}

/// Rate after cutting `p` matched rows/columns: `(N - M) / (N - p)`.
pub fn punctured_rate(n: u64, m: u64, p: u64) -> Fraction {
    Fraction::new((n - m) as i128, (n - p) as i128)
}

/// Rate after appending `e` rows and identity columns: `(N - M) / (N + e)`.
pub fn extended_rate(n: u64, m: u64, e: u64) -> Fraction {
    Fraction::new((n - m) as i128, (n + e) as i128)
}

// Relative slack when comparing an exact rate against a floating target, so
// that a target computed as `beta * C(snr)` landing a few ulps off an exact
// rate still selects that rate.
const RATE_TOLERANCE: f64 = 1e-9;

fn within_target(rate: Fraction, target: f64) -> bool {
    rate.to_f64().unwrap_or(f64::INFINITY) <= target * (1.0 + RATE_TOLERANCE)
}

/// Picks the puncture/extension length whose efficiency is the largest value
/// not exceeding `target_beta` at `snr`.
pub fn plan_rate(
    base_n: u64,
    base_m: u64,
    snr: f64,
    target_beta: f64,
    limits: AdaptLimits,
) -> Result<RatePlan> {
    if base_n <= base_m {
        return Err(Error::invalid("base matrix must have N > M"));
    }
    if !(target_beta > 0.0 && target_beta <= 1.0) {
        return Err(Error::invalid(format!(
            "target beta must lie in (0, 1], got {target_beta}"
        )));
    }
    let capacity = shannon_capacity(snr)?;
    let target_rate = target_beta * capacity;
    let (n, m) = (base_n, base_m);
    let k = (n - m) as f64;
    let beta_of = |r: Fraction| r.to_f64().unwrap_or(f64::NAN) / capacity;

    let (mode, length) = if within_target(punctured_rate(n, m, 0), target_rate) {
        // Puncture: largest p with (N-M)/(N-p) <= target.
        let max_p = limits.max_p.min(m.saturating_sub(1));
        let guess = (n as f64 - k / target_rate).floor().clamp(0.0, max_p as f64) as u64;
        let mut p = (guess + 2).min(max_p);
        while p > 0 && !within_target(punctured_rate(n, m, p), target_rate) {
            p -= 1;
        }
        if p == 0 {
            (AdaptMode::None, 0)
        } else {
            (AdaptMode::Puncture, p)
        }
    } else {
        // Extend: smallest e with (N-M)/(N+e) <= target.
        let guess = (k / target_rate - n as f64).ceil().max(0.0) as u64;
        let mut e = guess + 2;
        while e > 0 && within_target(extended_rate(n, m, e - 1), target_rate) {
            e -= 1;
        }
        if e > limits.max_e {
            return Err(Error::OutOfAdaptationRange {
                target: target_beta,
                min_beta: beta_of(extended_rate(n, m, limits.max_e)),
                max_beta: beta_of(punctured_rate(n, m, limits.max_p.min(m - 1))),
            });
        }
        (AdaptMode::Extend, e)
    };
    let achieved_rate = match mode {
        AdaptMode::Extend => extended_rate(n, m, length),
        _ => punctured_rate(n, m, length),
    };
    Ok(RatePlan {
        mode,
        length,
        achieved_rate,
        achieved_efficiency: beta_of(achieved_rate),
    })
}
