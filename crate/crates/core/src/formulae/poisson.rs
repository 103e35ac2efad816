//! Poisson-type identities: each weighted sum as a symmetric series of
//! Fourier-type integrals of `f`, cut at `|n| ≤ cutoff`.

use super::series::{Expansion, Lattice};
use super::{
    direct_sum, divisor_range, integral_of, interval, psi_argument, real, require_good, Assembly,
    Fault, IdentityResult, Stage, TruncationParams, Weight,
};
use crate::arith::PeriodicSequence;
use crate::error::Result;
use crate::kernels::{FourierIntegrals, Progression, C64};
use crate::smoothfn::SmoothFunction;

/// `Σ_{a<n≤b} f(n) = Σ_n ∫_a^b f(u) e^{2πinu} du`.
pub fn poisson_classical(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    interval(f, a, b)?;
    psi_argument(a, || "a".into())?;
    psi_argument(b, || "b".into())?;
    require_good(f, a, b)?;
    let lhs = direct_sum(Weight::Unit, f, a, b)?;
    let mut out = Assembly::default();
    if p.fault != Fault::DropZeroFrequency {
        let main = integral_of(f, a, b, p.quad_tol)?;
        out.quadrature(Stage::MainTerm, &main);
        out.push(Stage::MainTerm, main.value);
    }
    let mut engine = FourierIntegrals::new(f, 0, a, b)?;
    let prog = Progression {
        step: 1.0,
        count: p.cutoff,
        tol0: p.quad_tol / 2.0,
        growth: -1,
    };
    let integrals = engine.progressions(&[prog])?.remove(0);
    let mut series = 0.0;
    let mut tail = 0.0;
    for integral in &integrals {
        let term = 2.0 * integral.re;
        series += term;
        tail = term.abs();
    }
    out.push(Stage::FrequencySeries, real(series));
    out.flag(Stage::FrequencySeries, engine.nonconverged());
    out.diagnostics.tail_estimate = tail;
    Ok(out.finish(lhs))
}

/// `Σ_{a<n≤b} χ(n) f(n) = (1/k) Σ_n τ(χ, n) ∫_a^b f(u) e^{−2πinu/k} du`.
pub fn poisson_chi(
    chi: &PeriodicSequence,
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    interval(f, a, b)?;
    let k = chi.period() as f64;
    for l in 1..=chi.period() {
        let l = l as f64;
        psi_argument((a - l) / k, || format!("(a − {l})/{k}"))?;
        psi_argument((b - l) / k, || format!("(b − {l})/{k}"))?;
    }
    require_good(f, a, b)?;
    let lhs = direct_sum(Weight::Periodic(chi), f, a, b)?;
    assemble(&Lattice::periodic(chi), f, a, b, lhs, p)
}

/// `Σ_{a<n≤b} d(n) f(n) = Σ_n Σ_{m≤b} (1/m) ∫_a^b f(u) e^{2πinu/m} du`;
/// needs `a > 0`.
pub fn poisson_divisor(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    interval(f, a, b)?;
    let top = divisor_range(a, b)?;
    require_good(f, a, b)?;
    let lhs = direct_sum(Weight::Divisor, f, a, b)?;
    assemble(&Lattice::divisor(top)?, f, a, b, lhs, p)
}

/// `Σ_{a<n≤b} χ(n) d(n) f(n)` with frequencies `n/(km)`; needs `a > 0`.
pub fn poisson_divisor_chi(
    chi: &PeriodicSequence,
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    interval(f, a, b)?;
    let top = divisor_range(a, b)?;
    require_good(f, a, b)?;
    let lhs = direct_sum(Weight::DivisorPeriodic(chi), f, a, b)?;
    assemble(&Lattice::divisor_periodic(chi, top)?, f, a, b, lhs, p)
}

fn assemble(
    lattice: &Lattice,
    f: &SmoothFunction,
    a: f64,
    b: f64,
    lhs: C64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    let mut out = Assembly::default();
    if p.fault != Fault::DropZeroFrequency {
        let main = integral_of(f, a, b, p.quad_tol)?;
        out.quadrature(Stage::MainTerm, &main);
        out.push(Stage::MainTerm, lattice.mean() * main.value);
    }
    let series = lattice.series(f, a, b, Expansion::Frequencies, p)?;
    out.push(Stage::FrequencySeries, series.value);
    out.flag(Stage::FrequencySeries, series.nonconverged);
    out.diagnostics.tail_estimate = series.tail;
    Ok(out.finish(lhs))
}
