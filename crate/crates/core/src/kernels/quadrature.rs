//! Adaptive composite Gauss-Legendre quadrature.
//!
//! Each panel is integrated with an `n`-point rule on the whole panel and on
//! its two halves; the difference is the panel's error estimate and the
//! halves' sum is the panel's value. The panel with the largest estimate is
//! split until the global estimate meets the tolerance, every remaining panel
//! sits at its rounding floor, or the panel budget runs out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use num::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Points per Gauss-Legendre panel rule.
pub const RULE_POINTS: usize = 12;

/// Subdivision budget; exceeding it returns a non-converged result.
pub const MAX_PANELS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: C64,
    pub error_estimate: f64,
    pub panels_used: usize,
    /// `false` when the panel budget ran out before the tolerance was met.
    pub converged: bool,
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// The cached default panel rule.
    pub fn standard() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(RULE_POINTS))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct RuleValue {
    value: C64,
    // ∫|g| by the same rule
    mass: f64,
    // node-to-node variation of g, times the largest |x|: the size of the
    // error caused by rounding the nodes themselves
    shift: f64,
}

fn apply_rule<G>(rule: &GaussLegendre, g: &mut G, a: f64, b: f64) -> Result<RuleValue>
where
    G: FnMut(f64) -> Result<C64>,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut value = C64::new(0.0, 0.0);
    let mut mass = 0.0;
    let mut variation = 0.0;
    let mut previous: Option<C64> = None;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let y = g(mid + half * x)?;
        if !(y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::Domain {
                x: mid + half * x,
                reason: "integrand is not finite".into(),
            });
        }
        value += y * *w;
        mass += y.norm() * *w;
        if let Some(p) = previous {
            variation += (y - p).norm();
        }
        previous = Some(y);
    }
    Ok(RuleValue {
        value: value * half,
        mass: mass * half.abs(),
        shift: variation * a.abs().max(b.abs()),
    })
}

struct Panel {
    a: f64,
    b: f64,
    left: C64,
    right: C64,
    error: f64,
    mass: f64,
}

impl Panel {
    fn evaluate<G>(rule: &GaussLegendre, g: &mut G, a: f64, b: f64, whole: C64) -> Result<Panel>
    where
        G: FnMut(f64) -> Result<C64>,
    {
        let mid = 0.5 * (a + b);
        let left = apply_rule(rule, g, a, mid)?;
        let right = apply_rule(rule, g, mid, b)?;
        let refined = left.value + right.value;
        Ok(Panel {
            a,
            b,
            left: left.value,
            right: right.value,
            error: (refined - whole).norm(),
            mass: left.mass + right.mass + left.shift + right.shift,
        })
    }

    fn value(&self) -> C64 {
        self.left + self.right
    }

    // Rounding floor: the panel's own |g| mass plus node-rounding shift, or
    // its width's share of the whole integral's mass.
    fn settled(&self, density: f64) -> bool {
        let mid = 0.5 * (self.a + self.b);
        let floor = 64.0 * f64::EPSILON * self.mass.max(density * (self.b - self.a));
        self.error <= floor || mid <= self.a || mid >= self.b
    }
}

struct Ranked(f64, usize);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0 && self.1 == other.1
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

/// Adaptive integration of a fallible integrand over the partition given by
/// `breaks` (sorted, at least two points).
pub fn try_integrate_partition<G>(g: G, breaks: &[f64], tol: f64) -> Result<QuadratureResult>
where
    G: FnMut(f64) -> Result<C64>,
{
    adapt(g, breaks, tol).map(|(result, _)| result)
}

/// Like [`try_integrate_partition`], also returning the final panel end
/// points in ascending order.
pub fn adaptive_breaks<G>(g: G, breaks: &[f64], tol: f64) -> Result<(QuadratureResult, Vec<f64>)>
where
    G: FnMut(f64) -> Result<C64>,
{
    adapt(g, breaks, tol)
}

fn adapt<G>(mut g: G, breaks: &[f64], tol: f64) -> Result<(QuadratureResult, Vec<f64>)>
where
    G: FnMut(f64) -> Result<C64>,
{
    if breaks.len() < 2 {
        return Err(Error::invalid("quadrature needs at least one panel"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let rule = GaussLegendre::standard();
    let mut panels: Vec<Panel> = Vec::with_capacity(breaks.len() * 2);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a < b) {
            return Err(Error::invalid(format!("panel [{a}, {b}] is empty or reversed")));
        }
        let whole = apply_rule(rule, &mut g, a, b)?.value;
        panels.push(Panel::evaluate(rule, &mut g, a, b, whole)?);
    }
    let span = breaks[breaks.len() - 1] - breaks[0];
    let density = panels.iter().map(|p| p.mass).sum::<f64>() / span;
    let mut heap = BinaryHeap::new();
    for (idx, panel) in panels.iter().enumerate() {
        if !panel.settled(density) {
            heap.push(Ranked(panel.error, idx));
        }
    }
    let mut total: f64 = panels.iter().map(|p| p.error).sum();
    let mut converged = true;
    while total > tol {
        let Some(Ranked(_, idx)) = heap.pop() else {
            // only rounding-limited panels remain
            break;
        };
        if panels.len() + 1 > MAX_PANELS {
            converged = false;
            break;
        }
        let (a, b, left, right, err) = {
            let p = &panels[idx];
            (p.a, p.b, p.left, p.right, p.error)
        };
        let mid = 0.5 * (a + b);
        let lp = Panel::evaluate(rule, &mut g, a, mid, left)?;
        let rp = Panel::evaluate(rule, &mut g, mid, b, right)?;
        total += lp.error + rp.error - err;
        if !lp.settled(density) {
            heap.push(Ranked(lp.error, idx));
        }
        if !rp.settled(density) {
            heap.push(Ranked(rp.error, panels.len()));
        }
        panels[idx] = lp;
        panels.push(rp);
    }
    // sum left to right for a reproducible value
    let mut order: Vec<usize> = (0..panels.len()).collect();
    order.sort_by(|&i, &j| panels[i].a.total_cmp(&panels[j].a));
    let value = order
        .iter()
        .fold(C64::new(0.0, 0.0), |acc, &i| acc + panels[i].value());
    let error_estimate = panels.iter().map(|p| p.error).sum::<f64>().max(0.0);
    let mut ends: Vec<f64> = order.iter().map(|&i| panels[i].a).collect();
    ends.push(panels[order[order.len() - 1]].b);
    let result = QuadratureResult {
        value,
        error_estimate,
        panels_used: panels.len(),
        converged,
    };
    Ok((result, ends))
}

/// Adaptive integration of a complex-valued integrand over `[a, b]`.
pub fn integrate<G>(g: G, a: f64, b: f64, tol: f64) -> Result<QuadratureResult>
where
    G: Fn(f64) -> C64,
{
    check_interval(a, b)?;
    try_integrate_partition(|x| Ok(g(x)), &[a, b], tol)
}

/// Fallible variant of [`integrate`] with interior break points (for
/// integrands with jumps or kinks at known places).
pub fn try_integrate<G>(g: G, a: f64, b: f64, interior: &[f64], tol: f64) -> Result<QuadratureResult>
where
    G: FnMut(f64) -> Result<C64>,
{
    check_interval(a, b)?;
    let breaks = partition(a, b, interior);
    try_integrate_partition(g, &breaks, tol)
}

/// `[a, interior..., b]` with interior points outside `(a, b)` dropped and
/// near-duplicates removed.
pub fn partition(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = interior
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    let scale = (b - a).abs().max(a.abs()).max(b.abs());
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(a);
    for x in pts {
        if x - out[out.len() - 1] > 4.0 * f64::EPSILON * scale && b - x > 4.0 * f64::EPSILON * scale {
            out.push(x);
        }
    }
    out.push(b);
    out
}

/// Points `x0 + j * period` inside `(a, b)`.
pub fn lattice_points(a: f64, b: f64, x0: f64, period: f64) -> Vec<f64> {
    let j0 = ((a - x0) / period).floor() as i64;
    let j1 = ((b - x0) / period).ceil() as i64;
    (j0..=j1)
        .map(|j| x0 + j as f64 * period)
        .filter(|&x| x > a && x < b)
        .collect()
}

pub(crate) fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::invalid(format!("need finite a < b, got [{a}, {b}]")));
    }
    Ok(())
}

/// Equal subdivision of `[a, b]` into `count` panels.
pub fn uniform_breaks(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    let h = (b - a) / count as f64;
    let mut out: Vec<f64> = (0..count).map(|j| a + j as f64 * h).collect();
    out.push(b);
    out
}
