//! Euler-Maclaurin identities of depth `R` for unit, periodic, divisor and
//! divisor-periodic weights. Boundary series are summed in closed form
//! through `ψ_r`; only the remainder series is truncated.

use super::series::{Expansion, Lattice};
use super::{
    direct_sum, divisor_range, integral_of, interval, psi_argument, real, Assembly,
    IdentityResult, Stage, TruncationParams, Weight,
};
use crate::arith::PeriodicSequence;
use crate::error::Result;
use crate::kernels::{i_power, FourierIntegrals, Progression, C64};
use crate::smoothfn::SmoothFunction;

const TAU: f64 = std::f64::consts::TAU;

/// Classical Euler-Maclaurin for `Σ_{a<n≤b} f(n)`:
/// `∫f + Σ_{r≤R} (−1)^{r+1}(ψ_r(b) f^{(r)}(b) − ψ_r(a) f^{(r)}(a)) + (−1)^R ∫ψ_R f^{(R+1)}`,
/// with the last integral expanded as `−Σ'_n ∫f^{(R+1)}(u) e^{2πinu} du / (2πin)^{R+1}`.
pub fn euler_maclaurin_classical(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate_depth(f)?;
    interval(f, a, b)?;
    psi_argument(a, || "a".into())?;
    psi_argument(b, || "b".into())?;
    let lhs = direct_sum(Weight::Unit, f, a, b)?;
    let depth = p.depth;
    let mut out = Assembly::default();
    let main = integral_of(f, a, b, p.quad_tol)?;
    out.quadrature(Stage::MainTerm, &main);
    out.push(Stage::MainTerm, main.value);

    let da = f.derivatives_at(a, depth)?;
    let db = f.derivatives_at(b, depth)?;
    let mut boundary = 0.0;
    for r in 0..=depth {
        let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
        boundary += sign * (p.psi(r, b)? * db[r] - p.psi(r, a)? * da[r]);
    }
    out.push(Stage::BoundaryTerms, real(boundary));

    let order = depth + 1;
    let mut engine = FourierIntegrals::new(f, order, a, b)?;
    let prog = Progression {
        step: 1.0,
        count: p.cutoff,
        tol0: p.quad_tol * TAU.powi(order as i32) / 2.0,
        growth: depth as i32,
    };
    let integrals = engine.progressions(&[prog])?.remove(0);
    let rotate = i_power(3 * order);
    let sign = if depth.is_multiple_of(2) { -1.0 } else { 1.0 };
    let mut remainder = 0.0;
    let mut tail = 0.0;
    for (i, integral) in integrals.iter().enumerate() {
        let n = (i + 1) as f64;
        let term = sign * 2.0 * (integral * rotate).re / (TAU * n).powi(order as i32);
        remainder += term;
        tail = term.abs();
    }
    out.push(Stage::RemainderSeries, real(remainder));
    out.flag(Stage::RemainderSeries, engine.nonconverged());
    out.diagnostics.tail_estimate = tail;
    Ok(out.finish(lhs))
}

/// `Σ_{a<n≤b} χ(n) f(n)` for `χ` of period `k`.
pub fn euler_maclaurin_chi(
    chi: &PeriodicSequence,
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate_depth(f)?;
    interval(f, a, b)?;
    let k = chi.period() as f64;
    for l in 1..=chi.period() {
        let l = l as f64;
        psi_argument((a - l) / k, || format!("(a − {l})/{k}"))?;
        psi_argument((b - l) / k, || format!("(b − {l})/{k}"))?;
    }
    let lhs = direct_sum(Weight::Periodic(chi), f, a, b)?;
    assemble(&Lattice::periodic(chi), f, a, b, lhs, p)
}

/// `Σ_{a<n≤b} d(n) f(n)` as `Σ_{m≤b} Σ_{a/m<j≤b/m} f(mj)`; needs `a > 0`.
pub fn euler_maclaurin_divisor(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate_depth(f)?;
    interval(f, a, b)?;
    let top = divisor_range(a, b)?;
    let lhs = direct_sum(Weight::Divisor, f, a, b)?;
    assemble(&Lattice::divisor(top)?, f, a, b, lhs, p)
}

/// `Σ_{a<n≤b} χ(n) d(n) f(n)`, split by divisor `m` and by the residue of
/// the cofactor modulo `k`; needs `a > 0`.
pub fn euler_maclaurin_divisor_chi(
    chi: &PeriodicSequence,
    f: &SmoothFunction,
    a: f64,
    b: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate_depth(f)?;
    interval(f, a, b)?;
    let top = divisor_range(a, b)?;
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
    let main = integral_of(f, a, b, p.quad_tol)?;
    out.quadrature(Stage::MainTerm, &main);
    out.push(Stage::MainTerm, lattice.mean() * main.value);
    out.push(Stage::BoundaryTerms, lattice.boundary(f, a, b, p)?);
    let series = lattice.series(f, a, b, Expansion::Remainder(p.depth), p)?;
    out.push(Stage::RemainderSeries, series.value);
    out.flag(Stage::RemainderSeries, series.nonconverged);
    out.diagnostics.tail_estimate = series.tail;
    Ok(out.finish(lhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, Guard};
    use crate::smoothfn::DEFAULT_MAX_ORDER;

    fn f(src: &str, a: f64, b: f64) -> SmoothFunction {
        SmoothFunction::parse(src, a, b, DEFAULT_MAX_ORDER).unwrap()
    }

    fn seq(values: &[f64]) -> PeriodicSequence {
        PeriodicSequence::from_real(values).unwrap()
    }

    #[test]
    fn polynomial_is_exact() {
        let p = TruncationParams::new(2, 7, 1e-12);
        let r = euler_maclaurin_chi(&PeriodicSequence::ones(), &f("x^2", 0.0, 11.0), 0.5, 10.5, &p)
            .unwrap();
        assert_eq!(r.lhs, real(385.0));
        assert!(r.residual() < 1e-10, "{}", r.residual());
        assert_eq!(r.term(Stage::RemainderSeries), Some(real(0.0)));
    }

    #[test]
    fn alternating_constant() {
        let p = TruncationParams::new(0, 200, 1e-12);
        let r = euler_maclaurin_chi(&seq(&[1.0, -1.0]), &f("1", 0.0, 9.0), 0.5, 8.5, &p).unwrap();
        assert_eq!(r.lhs, real(0.0));
        assert_eq!(r.term(Stage::MainTerm), Some(real(0.0)));
        assert!(r.residual() < 1e-12, "{}", r.residual());
    }

    #[test]
    fn odd_character_exponential() {
        let p = TruncationParams::new(3, 200, 1e-12);
        let g = f("exp(-x/5)", 0.0, 41.0);
        let r = euler_maclaurin_chi(&seq(&[1.0, 0.0, -1.0, 0.0]), &g, 0.3, 40.3, &p).unwrap();
        assert!(r.residual() <= 1e-8 * (1.0 + r.lhs.norm()), "{}", r.residual());
        assert!(r.diagnostics.nonconverged.is_empty());
    }

    #[test]
    fn divisor_examples() {
        let p = TruncationParams::new(0, 500, 1e-12);
        let r = euler_maclaurin_divisor(&f("1", 0.0, 11.0), 0.5, 10.5, &p).unwrap();
        assert_eq!(r.lhs, real(27.0));
        let main = r.term(Stage::MainTerm).unwrap().re;
        assert!((main - 10.0 * 7381.0 / 2520.0).abs() < 1e-12);
        assert!(r.residual() < 1e-12, "{}", r.residual());

        let p = TruncationParams::new(1, 500, 1e-12);
        let r = euler_maclaurin_divisor(&f("x", 0.0, 7.0), 0.5, 6.5, &p).unwrap();
        assert_eq!(r.lhs, real(57.0));
        assert!(r.residual() < 1e-10, "{}", r.residual());

        let r = euler_maclaurin_divisor(&f("1", 0.0, 7.0), 5.5, 6.5, &p).unwrap();
        assert_eq!(r.lhs, real(4.0));
        assert!(r.residual() < 1e-12, "{}", r.residual());

        let r = euler_maclaurin_divisor(&f("sqrt(x)", 0.0, 30.0), 2.5, 29.5, &p).unwrap();
        assert!(r.residual() < 1e-6 * (1.0 + r.lhs.norm()), "{}", r.residual());
    }

    #[test]
    fn divisor_character_examples() {
        let p = TruncationParams::new(2, 300, 1e-12);
        let r = euler_maclaurin_divisor_chi(&seq(&[1.0, -1.0]), &f("1", 0.0, 7.0), 0.5, 6.5, &p)
            .unwrap();
        assert_eq!(r.lhs, real(-4.0));
        assert!(r.residual() < 1e-10, "{}", r.residual());

        let w = crate::kernels::cis_turns(1.0 / 3.0);
        let chi = PeriodicSequence::new(vec![real(1.0), w, w * w]).unwrap();
        let g = f("1", 0.0, 10.0);
        let r = euler_maclaurin_divisor_chi(&chi, &g, 0.5, 9.5, &p).unwrap();
        assert_eq!(r.lhs, direct_sum(Weight::DivisorPeriodic(&chi), &g, 0.5, 9.5).unwrap());
        assert!(r.residual() < 1e-10, "{}", r.residual());
    }

    #[test]
    fn unit_weight_collapses() {
        let p = TruncationParams::new(2, 100, 1e-11);
        let g = f("cos(x/3) + x", 0.0, 20.0);
        let chi = euler_maclaurin_chi(&PeriodicSequence::ones(), &g, 0.5, 19.5, &p).unwrap();
        let classical = euler_maclaurin_classical(&g, 0.5, 19.5, &p).unwrap();
        assert!((chi.rhs - classical.rhs).norm() <= 1e-12 * classical.rhs.norm());
        let two = euler_maclaurin_divisor(&g, 0.5, 19.5, &p).unwrap();
        let three =
            euler_maclaurin_divisor_chi(&PeriodicSequence::ones(), &g, 0.5, 19.5, &p).unwrap();
        assert!((two.rhs - three.rhs).norm() <= 1e-12 * two.rhs.norm());
    }

    #[test]
    fn guards() {
        let p = TruncationParams::new(1, 10, 1e-10);
        let g = f("x", 0.0, 11.0);
        assert!(matches!(
            euler_maclaurin_chi(&PeriodicSequence::ones(), &g, 1.0, 10.5, &p),
            Err(Error::Guard { guard: Guard::IntegerPsiArgument, .. })
        ));
        assert!(matches!(
            euler_maclaurin_divisor(&g, 0.5, 10.0, &p),
            Err(Error::Guard { guard: Guard::IntervalBoundaryTie, .. })
        ));
        let h = f("x", -3.0, 11.0);
        assert!(matches!(
            euler_maclaurin_divisor(&h, -2.5, 10.5, &p),
            Err(Error::Guard { guard: Guard::NonPositiveStart, .. })
        ));
        let shallow = SmoothFunction::parse("x", 0.0, 11.0, 2).unwrap();
        assert!(matches!(
            euler_maclaurin_classical(&shallow, 0.5, 10.5, &TruncationParams::new(2, 10, 1e-10)),
            Err(Error::OrderExceeded { requested: 3, max: 2 })
        ));
    }
}
