//! Summation identities evaluated two ways: the direct sum over the integers
//! in `(a, b]` (the oracle) and the identity's right-hand side.
//!
//! Every evaluator returns an [`IdentityResult`] whose `lhs` is the direct
//! sum and whose `rhs` is the sum of the named stages in `terms`. Series are
//! cut symmetrically at `|n| ≤ cutoff` with the `±n` terms paired and
//! accumulated in increasing `n` (then increasing divisor `m`), so results
//! are reproducible bit for bit at any thread count.

mod euler;
mod maclaurin;
mod poisson;
mod series;

pub use euler::{
    abel_sum, dilated_residue_sum, dilated_sum, euler_sum, euler_sum_2d, residue_class_sum,
};
pub use maclaurin::{
    euler_maclaurin_chi, euler_maclaurin_classical, euler_maclaurin_divisor,
    euler_maclaurin_divisor_chi,
};
pub use poisson::{poisson_chi, poisson_classical, poisson_divisor, poisson_divisor_chi};

use crate::arith::{divisor_sieve, PeriodicSequence, DEFAULT_SIEVE_CAP};
use crate::error::{Error, Guard, Result};
use crate::kernels::{near_integer, psi, try_integrate, QuadratureResult, C64, MAX_PSI_ORDER};
use crate::smoothfn::SmoothFunction;

/// Deliberate defects for mutation testing. `None` in normal use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negate every closed-form `ψ_r` value.
    FlipPsiSign,
    /// Replace `τ(χ, n)` by its complex conjugate.
    ConjugateTau,
    /// Leave out the `n = 0` term of the Poisson series.
    DropZeroFrequency,
}

impl Fault {
    pub const ALL: [Fault; 3] = [Fault::FlipPsiSign, Fault::ConjugateTau, Fault::DropZeroFrequency];

    pub fn name(self) -> &'static str {
        match self {
            Fault::None => "none",
            Fault::FlipPsiSign => "psi-sign",
            Fault::ConjugateTau => "tau-conjugate",
            Fault::DropZeroFrequency => "drop-n0",
        }
    }

    pub fn from_name(name: &str) -> Option<Fault> {
        [Fault::None]
            .into_iter()
            .chain(Fault::ALL)
            .find(|f| f.name() == name)
    }
}

/// Truncation and accuracy settings shared by every evaluator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationParams {
    /// Euler-Maclaurin depth `R`: boundary terms of order `0..=R`, remainder
    /// in `f^{(R+1)}`.
    pub depth: usize,
    /// Series cut: frequencies `1 ≤ |n| ≤ cutoff`.
    pub cutoff: u64,
    /// Absolute tolerance for each integral, and per series term.
    pub quad_tol: f64,
    pub fault: Fault,
}

impl Default for TruncationParams {
    fn default() -> Self {
        Self {
            depth: 2,
            cutoff: 500,
            quad_tol: 1e-10,
            fault: Fault::None,
        }
    }
}

impl TruncationParams {
    pub fn new(depth: usize, cutoff: u64, quad_tol: f64) -> Self {
        Self {
            depth,
            cutoff,
            quad_tol,
            fault: Fault::None,
        }
    }

    pub fn with_fault(self, fault: Fault) -> Self {
        Self { fault, ..self }
    }

    fn validate(&self) -> Result<()> {
        if self.cutoff == 0 {
            return Err(Error::invalid("series cutoff N must be at least 1"));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(Error::invalid(format!(
                "quadrature tolerance must be positive, got {}",
                self.quad_tol
            )));
        }
        Ok(())
    }

    fn validate_depth(&self, f: &SmoothFunction) -> Result<()> {
        self.validate()?;
        if self.depth + 1 > f.max_order() {
            return Err(Error::OrderExceeded {
                requested: self.depth + 1,
                max: f.max_order(),
            });
        }
        if self.depth > MAX_PSI_ORDER {
            return Err(Error::Capacity {
                what: "Euler-Maclaurin depth",
                requested: self.depth as u64,
                limit: MAX_PSI_ORDER as u64,
            });
        }
        Ok(())
    }

    fn psi(&self, r: usize, x: f64) -> Result<f64> {
        let v = psi(r, x)?;
        Ok(if self.fault == Fault::FlipPsiSign { -v } else { v })
    }

    fn tau(&self, chi: &PeriodicSequence, n: i64) -> C64 {
        let t = crate::arith::tau(chi, n);
        if self.fault == Fault::ConjugateTau {
            t.conj()
        } else {
            t
        }
    }
}

/// Named pieces of a right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    MainTerm,
    BoundaryTerms,
    SawtoothIntegral,
    StieltjesIntegral,
    SawtoothX,
    SawtoothY,
    SawtoothXY,
    RemainderSeries,
    FrequencySeries,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::MainTerm => "main-term",
            Stage::BoundaryTerms => "boundary-terms",
            Stage::SawtoothIntegral => "sawtooth-integral",
            Stage::StieltjesIntegral => "stieltjes-integral",
            Stage::SawtoothX => "x-sawtooth-integral",
            Stage::SawtoothY => "y-sawtooth-integral",
            Stage::SawtoothXY => "xy-sawtooth-integral",
            Stage::RemainderSeries => "remainder-series",
            Stage::FrequencySeries => "n-series",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Magnitude of the last paired series term (`|n| = cutoff`); zero when
    /// the identity has no series.
    pub tail_estimate: f64,
    /// Sum of adaptive-quadrature error estimates.
    pub quadrature_error: f64,
    /// Stages whose quadrature ran out of panel budget.
    pub nonconverged: Vec<Stage>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResult {
    pub lhs: C64,
    pub rhs: C64,
    pub terms: Vec<(Stage, C64)>,
    pub diagnostics: Diagnostics,
}

impl IdentityResult {
    /// `|lhs − rhs|`.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }

    pub fn term(&self, stage: Stage) -> Option<C64> {
        self.terms.iter().find(|(s, _)| *s == stage).map(|(_, v)| *v)
    }
}

// Collects stages in order; rhs is their sum.
#[derive(Debug, Default)]
struct Assembly {
    terms: Vec<(Stage, C64)>,
    diagnostics: Diagnostics,
}

impl Assembly {
    fn push(&mut self, stage: Stage, value: C64) {
        self.terms.push((stage, value));
    }

    fn quadrature(&mut self, stage: Stage, r: &QuadratureResult) {
        self.diagnostics.quadrature_error += r.error_estimate;
        if !r.converged && !self.diagnostics.nonconverged.contains(&stage) {
            self.diagnostics.nonconverged.push(stage);
        }
    }

    fn flag(&mut self, stage: Stage, nonconverged: bool) {
        if nonconverged && !self.diagnostics.nonconverged.contains(&stage) {
            self.diagnostics.nonconverged.push(stage);
        }
    }

    fn finish(self, lhs: C64) -> IdentityResult {
        let rhs = self
            .terms
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, (_, v)| acc + v);
        IdentityResult {
            lhs,
            rhs,
            terms: self.terms,
            diagnostics: self.diagnostics,
        }
    }
}

/// Weight `w(n)` of a direct sum.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Unit,
    Periodic(&'a PeriodicSequence),
    Divisor,
    DivisorPeriodic(&'a PeriodicSequence),
}

/// `Σ_{a<n≤b} w(n) f(n)`, accumulated in increasing `n`.
pub fn direct_sum(weight: Weight<'_>, f: &SmoothFunction, a: f64, b: f64) -> Result<C64> {
    interval(f, a, b)?;
    for (name, x) in [("a", a), ("b", b)] {
        if near_integer(x) {
            return Err(Error::guard(
                Guard::IntervalBoundaryTie,
                format!("{name} = {x} is within 1e-12 of an integer"),
            ));
        }
    }
    let first = a.floor() as i64 + 1;
    let last = b.floor() as i64;
    let table = match weight {
        Weight::Divisor | Weight::DivisorPeriodic(_) => {
            if a < 0.0 {
                return Err(Error::guard(
                    Guard::NonPositiveStart,
                    format!("divisor weights need a ≥ 0, got a = {a}"),
                ));
            }
            Some(divisor_sieve(last.max(1) as u64)?)
        }
        _ => None,
    };
    let mut sum = C64::new(0.0, 0.0);
    for n in first..=last {
        let w = match weight {
            Weight::Unit => C64::new(1.0, 0.0),
            Weight::Periodic(chi) => chi.at(n),
            Weight::Divisor => C64::new(table.as_ref().unwrap().get(n as u64) as f64, 0.0),
            Weight::DivisorPeriodic(chi) => chi.at(n) * table.as_ref().unwrap().get(n as u64) as f64,
        };
        sum += w * f.eval(n as f64)?;
    }
    Ok(sum)
}

// [a, b] must be a non-empty part of f's domain.
fn interval(f: &SmoothFunction, a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("need finite a < b, got ({a}, {b}]")));
    }
    let (lo, hi) = f.domain();
    for x in [a, b] {
        if x < lo || x > hi {
            return Err(Error::OutsideDomain { x, lo, hi });
        }
    }
    Ok(())
}

fn psi_argument(x: f64, what: impl FnOnce() -> String) -> Result<()> {
    if near_integer(x) {
        Err(Error::guard(
            Guard::IntegerPsiArgument,
            format!("{} = {x} is within 1e-12 of an integer", what()),
        ))
    } else {
        Ok(())
    }
}

fn require_good(f: &SmoothFunction, a: f64, b: f64) -> Result<()> {
    let verdict = f.is_good_on(a, b);
    if verdict.good {
        Ok(())
    } else {
        Err(Error::guard(Guard::NotGood, verdict.reason))
    }
}

// Guards shared by the divisor-weighted identities; returns ⌊b⌋.
fn divisor_range(a: f64, b: f64) -> Result<u64> {
    if !(a > 0.0) {
        return Err(Error::guard(
            Guard::NonPositiveStart,
            format!("divisor identities need a > 0, got a = {a}"),
        ));
    }
    let top = b.floor() as u64;
    if top > DEFAULT_SIEVE_CAP {
        return Err(Error::Capacity {
            what: "divisor sieve",
            requested: top,
            limit: DEFAULT_SIEVE_CAP,
        });
    }
    for m in 1..=top {
        for (name, x) in [("a", a), ("b", b)] {
            if near_integer(x / m as f64) {
                return Err(Error::guard(
                    Guard::IntervalBoundaryTie,
                    format!("{name}/{m} = {} is within 1e-12 of an integer", x / m as f64),
                ));
            }
        }
    }
    Ok(top)
}

fn integral_of(f: &SmoothFunction, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    try_integrate(|u| Ok(C64::new(f.eval(u)?, 0.0)), a, b, &[], tol)
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}
