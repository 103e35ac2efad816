//! The function `f` of a summation job: a small expression language with
//! evaluation and derivatives of any order via Taylor-mode propagation.

mod expr;
mod parse;
mod tape;

pub use expr::{Expression, Func, Variable};
pub use parse::{parse, parse_bivariate, parse_with};
pub use tape::{HyperDual, Tape};

use crate::error::{Error, Result};

/// Default highest derivative order a function declares.
pub const DEFAULT_MAX_ORDER: usize = 16;

// Points checked for finiteness when a function is bound to a domain.
const DOMAIN_SAMPLES: usize = 65;

/// An expression in `x` bound to a closed domain `[a, b]` with a declared
/// highest usable derivative order.
#[derive(Debug, Clone)]
pub struct SmoothFunction {
    expr: Expression,
    tape: Tape,
    lo: f64,
    hi: f64,
    max_order: usize,
}

/// Outcome of [`SmoothFunction::is_good_on`].
#[derive(Debug, Clone, PartialEq)]
pub struct GoodVerdict {
    pub good: bool,
    pub reason: String,
}

impl SmoothFunction {
    pub fn new(expr: Expression, a: f64, b: f64, max_order: usize) -> Result<Self> {
        if expr.uses(Variable::Y) {
            return Err(Error::UnknownIdentifier {
                name: "y".into(),
                offset: 0,
            });
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::invalid(format!("domain needs finite a < b, got [{a}, {b}]")));
        }
        let tape = Tape::compile(&expr);
        for j in 0..DOMAIN_SAMPLES {
            let x = a + (b - a) * j as f64 / (DOMAIN_SAMPLES - 1) as f64;
            tape.eval(x, 0.0)?;
        }
        Ok(Self {
            expr,
            tape,
            lo: a,
            hi: b,
            max_order,
        })
    }

    pub fn parse(source: &str, a: f64, b: f64, max_order: usize) -> Result<Self> {
        Self::new(parse(source)?, a, b, max_order)
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let slack = 1e-12 * (self.hi - self.lo).max(1.0);
        if x >= self.lo - slack && x <= self.hi + slack {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        self.tape.eval(x, 0.0)
    }

    /// `[f(x), f'(x), ..., f^{(order)}(x)]` from one Taylor-mode pass.
    pub fn derivatives_at(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > self.max_order {
            return Err(Error::OrderExceeded {
                requested: order,
                max: self.max_order,
            });
        }
        self.check_domain(x)?;
        let mut d = self.tape.taylor(x, 0.0, order)?;
        let mut factorial = 1.0;
        for (j, c) in d.iter_mut().enumerate().skip(1) {
            factorial *= j as f64;
            *c *= factorial;
        }
        if let Some(bad) = d.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain {
                x,
                reason: format!("derivative of order {bad} overflows"),
            });
        }
        Ok(d)
    }

    /// `f^{(order)}(x)` alone.
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return self.eval(x);
        }
        Ok(self.derivatives_at(x, order)?[order])
    }

    /// Certifies the sufficient condition "differentiable with a finite,
    /// integrable derivative" on `[a, b]`. `f'` is sampled at the end points,
    /// on a uniform grid, and at Gauss-Legendre nodes of each grid cell.
    /// Functions that are merely of bounded variation are not certified.
    pub fn is_good_on(&self, a: f64, b: f64) -> GoodVerdict {
        let bad = |reason: String| GoodVerdict { good: false, reason };
        if self.max_order < 1 {
            return bad("declared max_order is 0, so f' is not available".into());
        }
        if !(a < b) || self.check_domain(a).is_err() || self.check_domain(b).is_err() {
            return bad(format!(
                "interval [{a}, {b}] is not inside the domain [{}, {}]",
                self.lo, self.hi
            ));
        }
        const CELLS: usize = 256;
        let rule = crate::kernels::GaussLegendre::new(4);
        let h = (b - a) / CELLS as f64;
        let mut points = vec![a, b];
        for j in 0..CELLS {
            let left = a + j as f64 * h;
            points.push(left);
            points.extend(rule.nodes.iter().map(|t| left + 0.5 * h * (1.0 + t)));
        }
        for x in points {
            match self.derivatives_at(x, 1) {
                Ok(_) => {}
                Err(e) => return bad(format!("f' is not finite at x = {x}: {e}")),
            }
        }
        GoodVerdict {
            good: true,
            reason: format!(
                "f is C^1 on [{a}, {b}] (f' finite at every sampled point), so it is differentiable \
                 with a finite integrable derivative"
            ),
        }
    }
}

/// An expression in `x` and `y` on a rectangle, for the two-variable
/// summation formula.
#[derive(Debug, Clone)]
pub struct SmoothFunction2 {
    expr: Expression,
    tape: Tape,
    rect: [f64; 4],
}

/// `f`, `f_x`, `f_y`, `f_xy` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Partials {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxy: f64,
}

impl SmoothFunction2 {
    pub fn new(expr: Expression, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a < b && c < d) {
            return Err(Error::invalid(format!("need a < b and c < d, got [{a},{b}]x[{c},{d}]")));
        }
        let tape = Tape::compile(&expr);
        tape.eval(0.5 * (a + b), 0.5 * (c + d))?;
        Ok(Self {
            expr,
            tape,
            rect: [a, b, c, d],
        })
    }

    pub fn parse(source: &str, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(parse_bivariate(source)?, a, b, c, d)
    }

    pub fn expression(&self) -> &Expression {
        &self.expr
    }

    pub fn rect(&self) -> [f64; 4] {
        self.rect
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.tape.eval(x, y)
    }

    pub fn partials(&self, x: f64, y: f64) -> Result<Partials> {
        let h = self.tape.hyperdual(x, y)?;
        Ok(Partials {
            f: h.v,
            fx: h.dx,
            fy: h.dy,
            fxy: h.dxy,
        })
    }
}
