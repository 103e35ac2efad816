//! Partial summation and the first-order (sawtooth) summation formulas.

use super::{
    integral_of, interval, psi_argument, real, Assembly, IdentityResult, Stage, TruncationParams,
};
use crate::arith::residues_in_class;
use crate::error::{Error, Guard, Result};
use crate::kernels::{lattice_points, near_integer, try_integrate, GaussLegendre, C64};
use crate::smoothfn::{SmoothFunction, SmoothFunction2};

/// Partial summation over nodes `λ(n)` with coefficients `c(n)`:
/// `Σ_{a<λ(n)≤b} c(n) f(λ(n)) = f(b)S(b) − f(a)S(a) − ∫_a^b S(t) f'(t) dt`
/// with `S(t) = Σ_{λ₀<λ(n)≤t} c(n)`. `λ₀` defaults to `a − 1`.
pub fn abel_sum(
    nodes: &[f64],
    coeffs: &[C64],
    f: &SmoothFunction,
    a: f64,
    b: f64,
    lambda0: Option<f64>,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    interval(f, a, b)?;
    if nodes.len() != coeffs.len() {
        return Err(Error::invalid(format!(
            "{} nodes but {} coefficients",
            nodes.len(),
            coeffs.len()
        )));
    }
    if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("nodes must be finite and strictly increasing"));
    }
    if f.max_order() < 1 {
        return Err(Error::OrderExceeded {
            requested: 1,
            max: f.max_order(),
        });
    }
    let lambda0 = lambda0.unwrap_or(a - 1.0);
    if !(lambda0 < a) {
        return Err(Error::invalid(format!("λ₀ = {lambda0} must lie below a = {a}")));
    }
    for &x in nodes {
        for (name, end) in [("a", a), ("b", b)] {
            if (x - end).abs() <= 1e-12 {
                return Err(Error::guard(
                    Guard::NodeAtEndpoint,
                    format!("node {x} coincides with {name} = {end}"),
                ));
            }
        }
    }
    let partial = |t: f64| {
        nodes
            .iter()
            .zip(coeffs)
            .filter(|(&x, _)| lambda0 < x && x <= t)
            .fold(C64::new(0.0, 0.0), |acc, (_, c)| acc + c)
    };
    let mut lhs = C64::new(0.0, 0.0);
    for (&x, c) in nodes.iter().zip(coeffs) {
        if a < x && x <= b {
            lhs += c * f.eval(x)?;
        }
    }
    let inner: Vec<f64> = nodes.iter().copied().filter(|&x| a < x && x < b).collect();
    let mut cuts = vec![a];
    cuts.extend(&inner);
    cuts.push(b);
    let mut out = Assembly::default();
    out.push(Stage::BoundaryTerms, partial(b) * f.eval(b)? - partial(a) * f.eval(a)?);
    let piece_tol = p.quad_tol / (cuts.len() - 1) as f64;
    let mut stieltjes = C64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let r = try_integrate(|u| Ok(real(f.derivative(u, 1)?)), w[0], w[1], &[], piece_tol)?;
        out.quadrature(Stage::StieltjesIntegral, &r);
        stieltjes += partial(w[0]) * r.value;
    }
    out.push(Stage::StieltjesIntegral, -stieltjes);
    Ok(out.finish(lhs))
}

// `(1/period)∫f + ∫ψ((u−shift)/period) f'(u) du
//   + f(a)ψ((a−shift)/period) − f(b)ψ((b−shift)/period)`.
fn sawtooth_form(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    shift: f64,
    period: f64,
    lhs: C64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    let mut out = Assembly::default();
    let main = integral_of(f, a, b, p.quad_tol)?;
    out.quadrature(Stage::MainTerm, &main);
    out.push(Stage::MainTerm, main.value / period);
    let jumps = lattice_points(a, b, shift, period);
    let saw = try_integrate(
        |u| Ok(real(p.psi(0, (u - shift) / period)? * f.derivative(u, 1)?)),
        a,
        b,
        &jumps,
        p.quad_tol,
    )?;
    out.quadrature(Stage::SawtoothIntegral, &saw);
    out.push(Stage::SawtoothIntegral, saw.value);
    let boundary = f.eval(a)? * p.psi(0, (a - shift) / period)?
        - f.eval(b)? * p.psi(0, (b - shift) / period)?;
    out.push(Stage::BoundaryTerms, real(boundary));
    Ok(out.finish(lhs))
}

fn first_order(f: &SmoothFunction, p: &TruncationParams) -> Result<()> {
    p.validate()?;
    if f.max_order() < 1 {
        return Err(Error::OrderExceeded {
            requested: 1,
            max: f.max_order(),
        });
    }
    Ok(())
}

fn class_sum<I: Iterator<Item = i64>>(f: &SmoothFunction, points: I, scale: f64) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for n in points {
        sum += f.eval(scale * n as f64)?;
    }
    Ok(sum)
}

fn guard_ends(a: f64, b: f64, shift: f64, period: f64) -> Result<()> {
    psi_argument((a - shift) / period, || "psi argument at a".into())?;
    psi_argument((b - shift) / period, || "psi argument at b".into())
}

/// `Σ_{a<n≤b} f(n) = ∫f + ∫ψ(u) f'(u) du + f(a)ψ(a) − f(b)ψ(b)`.
pub fn euler_sum(f: &SmoothFunction, a: f64, b: f64, p: &TruncationParams) -> Result<IdentityResult> {
    first_order(f, p)?;
    interval(f, a, b)?;
    guard_ends(a, b, 0.0, 1.0)?;
    let lhs = super::direct_sum(super::Weight::Unit, f, a, b)?;
    sawtooth_form(f, a, b, 0.0, 1.0, lhs, p)
}

/// Sum over `n ≡ r (mod k)` in `(a, b]`, with kernel `ψ((u−r)/k)`.
pub fn residue_class_sum(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    r: i64,
    k: u64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    dilated_residue_sum(f, a, b, r, k, 1, p)
}

/// `Σ_{a/m<n≤b/m} f(mn)`, with kernel `ψ(u/m)`.
pub fn dilated_sum(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    m: u64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    dilated_residue_sum(f, a, b, 0, 1, m, p)
}

/// `Σ_{a/m<n≤b/m, n≡r (mod k)} f(mn)`, with main term `(1/(km))∫f` and
/// kernel `ψ(((u/m)−r)/k)`.
pub fn dilated_residue_sum(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    r: i64,
    k: u64,
    m: u64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    first_order(f, p)?;
    interval(f, a, b)?;
    if k == 0 || m == 0 {
        return Err(Error::invalid("k and m must be positive"));
    }
    if !(0..k as i64).contains(&r) {
        return Err(Error::invalid(format!("residue r = {r} must satisfy 0 ≤ r < k = {k}")));
    }
    let shift = (m as i64 * r) as f64;
    let period = (k * m) as f64;
    guard_ends(a, b, shift, period)?;
    let lhs = class_sum(f, residues_in_class(a, b, r, k, m), m as f64)?;
    sawtooth_form(f, a, b, shift, period, lhs, p)
}

// Rule used on each unit cell of the two-variable formula, and the coarser
// rule used for its error estimate.
const CELL_RULE: usize = 16;
const CHECK_RULE: usize = 12;
const MAX_CELL_DEPTH: u32 = 10;

/// Two-variable formula on a rectangle with integer corners:
/// `ΣΣ f(m, n) = ∫∫f + ∫∫f_x{x} + ∫∫f_y{y} + ∫∫f_xy{x}{y}`.
pub fn euler_sum_2d(
    f: &SmoothFunction2,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    p: &TruncationParams,
) -> Result<IdentityResult> {
    p.validate()?;
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        if !near_integer(v) {
            return Err(Error::guard(
                Guard::NonIntegerCorner,
                format!("corner {name} = {v} is not an integer"),
            ));
        }
    }
    let (a, b, c, d) = (a.round() as i64, b.round() as i64, c.round() as i64, d.round() as i64);
    if !(a < b && c < d) {
        return Err(Error::invalid(format!("need a < b and c < d, got [{a},{b}]x[{c},{d}]")));
    }
    let mut lhs = C64::new(0.0, 0.0);
    for n in c + 1..=d {
        for m in a + 1..=b {
            lhs += f.eval(m as f64, n as f64)?;
        }
    }
    let fine = GaussLegendre::new(CELL_RULE);
    let coarse = GaussLegendre::new(CHECK_RULE);
    let cells = ((b - a) * (d - c)) as f64;
    let mut totals = [0.0; 4];
    let mut error = 0.0;
    let mut converged = true;
    for j in c..d {
        for i in a..b {
            let cell = Cell {
                f,
                fine: &fine,
                coarse: &coarse,
                x0: i as f64,
                y0: j as f64,
            };
            let (v, e, ok) = cell.adapt(
                [i as f64, i as f64 + 1.0],
                [j as f64, j as f64 + 1.0],
                p.quad_tol / cells,
                0,
            )?;
            for (t, x) in totals.iter_mut().zip(v) {
                *t += x;
            }
            error += e;
            converged &= ok;
        }
    }
    let mut out = Assembly::default();
    let stages = [Stage::MainTerm, Stage::SawtoothX, Stage::SawtoothY, Stage::SawtoothXY];
    for (stage, v) in stages.into_iter().zip(totals) {
        out.push(stage, real(v));
        out.flag(stage, !converged);
    }
    out.diagnostics.quadrature_error = error;
    Ok(out.finish(lhs))
}

// One unit cell `[x0, x0+1] × [y0, y0+1]`, where the fractional parts are
// `x − x0` and `y − y0`.
struct Cell<'a> {
    f: &'a SmoothFunction2,
    fine: &'a GaussLegendre,
    coarse: &'a GaussLegendre,
    x0: f64,
    y0: f64,
}

impl Cell<'_> {
    fn rule(&self, rule: &GaussLegendre, xs: [f64; 2], ys: [f64; 2]) -> Result<[f64; 4]> {
        let (hx, mx) = (0.5 * (xs[1] - xs[0]), 0.5 * (xs[1] + xs[0]));
        let (hy, my) = (0.5 * (ys[1] - ys[0]), 0.5 * (ys[1] + ys[0]));
        let mut acc = [0.0; 4];
        for (ty, wy) in rule.nodes.iter().zip(&rule.weights) {
            let y = my + hy * ty;
            for (tx, wx) in rule.nodes.iter().zip(&rule.weights) {
                let x = mx + hx * tx;
                let q = self.f.partials(x, y)?;
                let w = wx * wy * hx * hy;
                let (fx, fy) = (x - self.x0, y - self.y0);
                acc[0] += w * q.f;
                acc[1] += w * q.fx * fx;
                acc[2] += w * q.fy * fy;
                acc[3] += w * q.fxy * fx * fy;
            }
        }
        Ok(acc)
    }

    fn adapt(&self, xs: [f64; 2], ys: [f64; 2], tol: f64, depth: u32) -> Result<([f64; 4], f64, bool)> {
        let fine = self.rule(self.fine, xs, ys)?;
        let coarse = self.rule(self.coarse, xs, ys)?;
        let err: f64 = fine.iter().zip(&coarse).map(|(u, v)| (u - v).abs()).sum();
        let floor = 64.0 * f64::EPSILON * fine.iter().map(|v| v.abs()).sum::<f64>();
        if err <= tol.max(floor) || depth >= MAX_CELL_DEPTH {
            return Ok((fine, err, err <= tol.max(floor)));
        }
        let xm = 0.5 * (xs[0] + xs[1]);
        let ym = 0.5 * (ys[0] + ys[1]);
        let mut total = [0.0; 4];
        let mut error = 0.0;
        let mut ok = true;
        for (qx, qy) in [
            ([xs[0], xm], [ys[0], ym]),
            ([xm, xs[1]], [ys[0], ym]),
            ([xs[0], xm], [ym, ys[1]]),
            ([xm, xs[1]], [ym, ys[1]]),
        ] {
            let (v, e, good) = self.adapt(qx, qy, 0.25 * tol, depth + 1)?;
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
            error += e;
            ok &= good;
        }
        Ok((total, error, ok))
    }
}
