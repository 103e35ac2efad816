//! Integrals `∫_a^b g(u) e^{2πiνu} du` of a real `g`, one at a time or in bulk
//! over arithmetic progressions of frequencies.
//!
//! Bulk evaluation chooses per frequency between two exact-in-the-limit
//! methods. At high frequency, repeated integration by parts gives
//! `Σ_{j≤J} (-1)^j [g^{(j)} e^{iωu}]_a^b / (iω)^{j+1}` with the remainder
//! bounded by `∫|g^{(J+1)}| / |ω|^{J+1}`; it is used whenever that bound
//! meets the requested tolerance. The remaining low frequencies share one
//! Gauss-Legendre grid on which `g` is sampled once.

use rayon::prelude::*;

use super::bernoulli::cis_turns;
use super::quadrature::{
    adaptive_breaks, check_interval, try_integrate_partition, uniform_breaks, GaussLegendre,
    QuadratureResult, C64,
};
use crate::error::{Error, Result};
use crate::smoothfn::SmoothFunction;

const TAU: f64 = std::f64::consts::TAU;

/// `∫_a^b f(u) e^{2πi·freq·u} du` by adaptive Gauss-Legendre quadrature
/// started from at least `4·⌈|freq|·(b−a)⌉` panels.
pub fn oscillatory_integrate(
    f: &SmoothFunction,
    a: f64,
    b: f64,
    freq: f64,
    tol: f64,
) -> Result<QuadratureResult> {
    check_interval(a, b)?;
    let panels = initial_panels(a, b, freq);
    try_integrate_partition(
        |u| Ok(cis_turns(freq * u) * f.eval(u)?),
        &uniform_breaks(a, b, panels),
        tol,
    )
}

fn initial_panels(a: f64, b: f64, freq: f64) -> usize {
    ((4.0 * (freq.abs() * (b - a)).ceil()) as usize).max(1)
}

/// Frequencies `n·step` for `n = 1..=count`, with absolute tolerance
/// `tol0 · n^growth` on the `n`-th integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progression {
    pub step: f64,
    pub count: u64,
    pub tol0: f64,
    pub growth: i32,
}

impl Progression {
    fn tol(&self, n: u64) -> f64 {
        self.tol0 * (n as f64).powi(self.growth)
    }
}

// Gauss-Legendre nodes with `weight · g(node)` folded together.
#[derive(Debug, Clone)]
struct Grid {
    nodes: Vec<f64>,
    weighted: Vec<f64>,
    max_freq: f64,
    converged: bool,
}

const GRID_RULE: usize = 16;
const MAX_IBP_ORDER: usize = 24;
const MOMENT_SAFETY: f64 = 4.0;
const MOMENT_CELL_BUDGET: usize = 1 << 16;
const RESTART_EVERY: u64 = 64;

/// Fourier-type integrals of `g = f^{(order)}` over `[a, b]`.
#[derive(Debug)]
pub struct FourierIntegrals<'f> {
    f: &'f SmoothFunction,
    order: usize,
    a: f64,
    b: f64,
    // g^{(j)} at a and b, j = 0..=ibp_max
    at_a: Vec<f64>,
    at_b: Vec<f64>,
    // safety-scaled estimates of ∫|g^{(j)}|, j = 0..=ibp_max + 1
    moments: Vec<f64>,
    grid: Option<Grid>,
    nonconverged: bool,
}

impl<'f> FourierIntegrals<'f> {
    pub fn new(f: &'f SmoothFunction, order: usize, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        if order > f.max_order() {
            return Err(Error::OrderExceeded {
                requested: order,
                max: f.max_order(),
            });
        }
        let mut engine = Self {
            f,
            order,
            a,
            b,
            at_a: Vec::new(),
            at_b: Vec::new(),
            moments: Vec::new(),
            grid: None,
            nonconverged: false,
        };
        let top = f.max_order().min(order + MAX_IBP_ORDER + 1);
        if top > order {
            if let (Ok(da), Ok(db)) = (f.derivatives_at(a, top - 1), f.derivatives_at(b, top - 1)) {
                if let Some(m) = moments(f, order, top - order, a, b) {
                    engine.at_a = da[order..].to_vec();
                    engine.at_b = db[order..].to_vec();
                    engine.moments = m;
                }
            }
        }
        Ok(engine)
    }

    /// `true` once any grid or fallback integral ran out of panel budget.
    pub fn nonconverged(&self) -> bool {
        self.nonconverged || self.grid.as_ref().is_some_and(|g| !g.converged)
    }

    fn g(&self, u: f64) -> Result<f64> {
        if self.order == 0 {
            self.f.eval(u)
        } else {
            self.f.derivative(u, self.order)
        }
    }

    // Smallest integration-by-parts depth meeting `tol` at `freq`.
    fn ibp_depth(&self, freq: f64, tol: f64) -> Option<usize> {
        let omega = TAU * freq.abs();
        if omega == 0.0 || self.at_a.is_empty() {
            return None;
        }
        (0..self.at_a.len()).find(|&j| self.moments[j + 1] / omega.powi(j as i32 + 1) <= tol)
    }

    fn ibp(&self, freq: f64, depth: usize) -> C64 {
        let omega = TAU * freq;
        let ea = cis_turns(freq * self.a);
        let eb = cis_turns(freq * self.b);
        let i_omega = C64::new(0.0, omega);
        let mut power = i_omega;
        let mut sum = C64::new(0.0, 0.0);
        for j in 0..=depth {
            let jump = eb * self.at_b[j] - ea * self.at_a[j];
            let term = jump / power;
            sum += if j % 2 == 0 { term } else { -term };
            power *= i_omega;
        }
        sum
    }

    /// One integral at `freq` to absolute tolerance `tol`.
    pub fn integral(&mut self, freq: f64, tol: f64) -> Result<C64> {
        if let Some(depth) = self.ibp_depth(freq, tol) {
            return Ok(self.ibp(freq, depth));
        }
        let panels = initial_panels(self.a, self.b, freq);
        let r = try_integrate_partition(
            |u| Ok(cis_turns(freq * u) * self.g(u)?),
            &uniform_breaks(self.a, self.b, panels),
            tol,
        )?;
        self.nonconverged |= !r.converged;
        Ok(r.value)
    }

    // Count of leading terms of `p` that integration by parts cannot serve.
    fn low_count(&self, p: &Progression) -> u64 {
        let fits = |n: u64| self.ibp_depth(n as f64 * p.step, p.tol(n)).is_some();
        if p.count == 0 || fits(1) {
            return 0;
        }
        if !fits(p.count) {
            return p.count;
        }
        // fits(lo) is false, fits(hi) is true
        let (mut lo, mut hi) = (1, p.count);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if fits(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }

    fn ensure_grid(&mut self, max_freq: f64, tol: f64) -> Result<()> {
        if self.grid.as_ref().is_some_and(|g| g.max_freq >= max_freq) {
            return Ok(());
        }
        let (a, b) = (self.a, self.b);
        let start = uniform_breaks(a, b, initial_panels(a, b, max_freq));
        let (fit, ends) = adaptive_breaks(|u| Ok(C64::new(self.g(u)?, 0.0)), &start, tol)?;
        let rule = GaussLegendre::new(GRID_RULE);
        let width = if max_freq > 0.0 { 0.25 / max_freq } else { f64::INFINITY };
        let mut nodes = Vec::new();
        let mut weighted = Vec::new();
        for w in ends.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            for sub in uniform_breaks(w[0], w[1], pieces).windows(2) {
                let half = 0.5 * (sub[1] - sub[0]);
                let mid = 0.5 * (sub[1] + sub[0]);
                for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
                    let u = mid + half * t;
                    nodes.push(u);
                    weighted.push(half * wt * self.g(u)?);
                }
            }
        }
        self.grid = Some(Grid {
            nodes,
            weighted,
            max_freq,
            converged: fit.converged,
        });
        Ok(())
    }

    /// Integrals at every frequency of every progression, in order.
    pub fn progressions(&mut self, progs: &[Progression]) -> Result<Vec<Vec<C64>>> {
        let lows: Vec<u64> = progs.iter().map(|p| self.low_count(p)).collect();
        let mut max_freq: f64 = 0.0;
        let mut tol = f64::INFINITY;
        for (p, &low) in progs.iter().zip(&lows) {
            if low > 0 {
                max_freq = max_freq.max(low as f64 * p.step.abs());
                tol = tol.min((1..=low).map(|n| p.tol(n)).fold(f64::INFINITY, f64::min));
            }
        }
        if max_freq > 0.0 {
            self.ensure_grid(max_freq, tol)?;
        }
        let this = &*self;
        Ok(progs
            .par_iter()
            .zip(lows.par_iter())
            .map(|(p, &low)| this.progression(p, low))
            .collect())
    }

    fn progression(&self, p: &Progression, low: u64) -> Vec<C64> {
        let mut out = Vec::with_capacity(p.count as usize);
        if low > 0 {
            let grid = self.grid.as_ref().expect("grid prepared for low frequencies");
            let step: Vec<C64> = grid.nodes.iter().map(|&u| cis_turns(p.step * u)).collect();
            let mut phase = vec![C64::new(0.0, 0.0); grid.nodes.len()];
            for n in 1..=low {
                if (n - 1) % RESTART_EVERY == 0 {
                    let freq = n as f64 * p.step;
                    for (ph, &u) in phase.iter_mut().zip(&grid.nodes) {
                        *ph = cis_turns(freq * u);
                    }
                } else {
                    for (ph, s) in phase.iter_mut().zip(&step) {
                        *ph *= s;
                    }
                }
                let mut re = Compensated::default();
                let mut im = Compensated::default();
                for (ph, w) in phase.iter().zip(&grid.weighted) {
                    re.add(ph.re * w);
                    im.add(ph.im * w);
                }
                out.push(C64::new(re.value(), im.value()));
            }
        }
        for n in low + 1..=p.count {
            let freq = n as f64 * p.step;
            let depth = self
                .ibp_depth(freq, p.tol(n))
                .expect("frequencies above the low count admit integration by parts");
            out.push(self.ibp(freq, depth));
        }
        out
    }
}

// Neumaier summation.
#[derive(Debug, Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.carry += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

// Estimates of ∫_a^b |g^{(j)}|, j = 0..=depth, for g = f^{(order)}, scaled by
// MOMENT_SAFETY. Each cell takes its width times the largest sampled
// magnitude; cells are split until halving changes no estimate by more than a
// quarter of itself (or a negligible share of the running total).
fn moments(f: &SmoothFunction, order: usize, depth: usize, a: f64, b: f64) -> Option<Vec<f64>> {
    let rule = GaussLegendre::new(6);
    let sample = |l: f64, r: f64| -> Option<Vec<f64>> {
        let mut peak = vec![0.0f64; depth + 1];
        let half = 0.5 * (r - l);
        let mid = 0.5 * (r + l);
        let points = [l, r].into_iter().chain(rule.nodes.iter().map(|t| mid + half * t));
        for u in points {
            let d = f.derivatives_at(u, order + depth).ok()?;
            for (p, v) in peak.iter_mut().zip(&d[order..]) {
                *p = p.max(v.abs());
            }
        }
        Some(peak.into_iter().map(|p| p * (r - l)).collect())
    };
    let coarse = uniform_breaks(a, b, 64);
    let mut cells: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    for w in coarse.windows(2) {
        cells.push((w[0], w[1], sample(w[0], w[1])?));
    }
    let mut total = vec![0.0; depth + 1];
    for (_, _, e) in &cells {
        for (t, v) in total.iter_mut().zip(e) {
            *t += v;
        }
    }
    let mut done = vec![0.0; depth + 1];
    let mut visited = 0;
    while let Some((l, r, whole)) = cells.pop() {
        visited += 1;
        if visited > MOMENT_CELL_BUDGET {
            return None;
        }
        let mid = 0.5 * (l + r);
        let left = sample(l, mid)?;
        let right = sample(mid, r)?;
        let settled = mid <= l
            || mid >= r
            || (0..=depth).all(|j| {
                let halves = left[j] + right[j];
                (whole[j] - halves).abs() <= 0.25 * halves.max(whole[j]) || whole[j] <= 1e-6 * total[j]
            });
        if settled {
            for j in 0..=depth {
                done[j] += left[j] + right[j];
            }
        } else {
            for j in 0..=depth {
                total[j] += left[j] + right[j] - whole[j];
            }
            cells.push((l, mid, left));
            cells.push((mid, r, right));
        }
    }
    if done.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(done.into_iter().map(|v| MOMENT_SAFETY * v).collect())
}
