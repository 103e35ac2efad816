//! Flattened evaluation program for an [`Expression`], with three
//! interpreters: plain `f64`, truncated Taylor series in `x` (all derivatives
//! up to a given order in one pass), and hyper-dual numbers for the mixed
//! partials `f_x`, `f_y`, `f_xy`.

use std::cell::RefCell;

use super::expr::{Expression, Func, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var(Variable),
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    PowInt(usize, i32),
    PowConst(usize, f64),
    Pow(usize, usize),
    Call(Func, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    ops: Vec<Op>,
}

impl Tape {
    pub fn compile(expr: &Expression) -> Tape {
        let mut ops = Vec::new();
        emit(expr, &mut ops);
        Tape { ops }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            s.clear();
            for op in &self.ops {
                let v = match *op {
                    Op::Const(c) => c,
                    Op::Var(Variable::X) => x,
                    Op::Var(Variable::Y) => y,
                    Op::Neg(a) => -s[a],
                    Op::Add(a, b) => s[a] + s[b],
                    Op::Sub(a, b) => s[a] - s[b],
                    Op::Mul(a, b) => s[a] * s[b],
                    Op::Div(a, b) => s[a] / s[b],
                    Op::PowInt(a, n) => s[a].powi(n),
                    Op::PowConst(a, p) => {
                        check_positive_base(s[a], x)?;
                        s[a].powf(p)
                    }
                    Op::Pow(a, b) => {
                        check_positive_base(s[a], x)?;
                        s[a].powf(s[b])
                    }
                    Op::Call(f, a) => {
                        let u = s[a];
                        match f {
                            Func::Exp => u.exp(),
                            Func::Log => {
                                if u <= 0.0 {
                                    return Err(domain(x, "log of a non-positive value"));
                                }
                                u.ln()
                            }
                            Func::Sin => u.sin(),
                            Func::Cos => u.cos(),
                            Func::Sqrt => {
                                if u < 0.0 {
                                    return Err(domain(x, "sqrt of a negative value"));
                                }
                                u.sqrt()
                            }
                        }
                    }
                };
                if !v.is_finite() {
                    return Err(domain(x, "non-finite intermediate value"));
                }
                s.push(v);
            }
            Ok(*s.last().expect("tape is never empty"))
        })
    }

    /// Taylor coefficients `c_0..=c_order` of the expression about `x`
    /// (with `y` held at `y`); the `j`-th derivative is `j! * c_j`.
    pub fn taylor(&self, x: f64, y: f64, order: usize) -> Result<Vec<f64>> {
        let n = order + 1;
        SCRATCH.with(|s| {
            let mut s = s.borrow_mut();
            s.clear();
            s.resize(self.ops.len() * n, 0.0);
            for (slot, op) in self.ops.iter().enumerate() {
                let (done, rest) = s.split_at_mut(slot * n);
                let out = &mut rest[..n];
                let get = |i: usize| &done[i * n..(i + 1) * n];
                match *op {
                    Op::Const(c) => out[0] = c,
                    Op::Var(Variable::X) => {
                        out[0] = x;
                        if n > 1 {
                            out[1] = 1.0;
                        }
                    }
                    Op::Var(Variable::Y) => out[0] = y,
                    Op::Neg(a) => out.iter_mut().zip(get(a)).for_each(|(o, u)| *o = -u),
                    Op::Add(a, b) => zip3(out, get(a), get(b), |u, v| u + v),
                    Op::Sub(a, b) => zip3(out, get(a), get(b), |u, v| u - v),
                    Op::Mul(a, b) => series_mul(out, get(a), get(b)),
                    Op::Div(a, b) => series_div(out, get(a), get(b)),
                    Op::PowInt(a, p) => series_powi(out, get(a), p),
                    Op::PowConst(a, p) => {
                        check_positive_base(get(a)[0], x)?;
                        series_powf(out, get(a), p)
                    }
                    Op::Pow(a, b) => {
                        let u = get(a);
                        check_positive_base(u[0], x)?;
                        let mut log_u = vec![0.0; n];
                        series_log(&mut log_u, u);
                        let mut prod = vec![0.0; n];
                        series_mul(&mut prod, get(b), &log_u);
                        series_exp(out, &prod);
                    }
                    Op::Call(f, a) => {
                        let u = get(a);
                        match f {
                            Func::Exp => series_exp(out, u),
                            Func::Log => {
                                if u[0] <= 0.0 {
                                    return Err(domain(x, "log of a non-positive value"));
                                }
                                series_log(out, u)
                            }
                            Func::Sin => {
                                let mut c = vec![0.0; n];
                                series_sin_cos(out, &mut c, u);
                            }
                            Func::Cos => {
                                let mut sn = vec![0.0; n];
                                series_sin_cos(&mut sn, out, u);
                            }
                            Func::Sqrt => {
                                if u[0] < 0.0 {
                                    return Err(domain(x, "sqrt of a negative value"));
                                }
                                series_sqrt(out, u)
                            }
                        }
                    }
                }
                if out.iter().any(|v| !v.is_finite()) {
                    return Err(domain(x, "non-finite Taylor coefficient"));
                }
            }
            let last = self.ops.len() - 1;
            Ok(s[last * n..(last + 1) * n].to_vec())
        })
    }

    pub fn hyperdual(&self, x: f64, y: f64) -> Result<HyperDual> {
        let mut s: Vec<HyperDual> = Vec::with_capacity(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => HyperDual::constant(c),
                Op::Var(Variable::X) => HyperDual { v: x, dx: 1.0, dy: 0.0, dxy: 0.0 },
                Op::Var(Variable::Y) => HyperDual { v: y, dx: 0.0, dy: 1.0, dxy: 0.0 },
                Op::Neg(a) => s[a].scale(-1.0),
                Op::Add(a, b) => s[a].add(&s[b]),
                Op::Sub(a, b) => s[a].add(&s[b].scale(-1.0)),
                Op::Mul(a, b) => s[a].mul(&s[b]),
                Op::Div(a, b) => {
                    let v = s[b].v;
                    s[a].mul(&s[b].lift(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
                }
                Op::PowInt(a, p) => {
                    let u = s[a].v;
                    let pf = p as f64;
                    s[a].lift(
                        u.powi(p),
                        if p == 0 { 0.0 } else { pf * u.powi(p - 1) },
                        if p == 0 || p == 1 { 0.0 } else { pf * (pf - 1.0) * u.powi(p - 2) },
                    )
                }
                Op::PowConst(a, p) => {
                    let u = s[a].v;
                    check_positive_base(u, x)?;
                    s[a].lift(u.powf(p), p * u.powf(p - 1.0), p * (p - 1.0) * u.powf(p - 2.0))
                }
                Op::Pow(a, b) => {
                    let u = s[a].v;
                    check_positive_base(u, x)?;
                    let log_u = s[a].lift(u.ln(), 1.0 / u, -1.0 / (u * u));
                    let e = s[b].mul(&log_u);
                    let ev = e.v.exp();
                    e.lift(ev, ev, ev)
                }
                Op::Call(f, a) => {
                    let u = s[a].v;
                    match f {
                        Func::Exp => {
                            let e = u.exp();
                            s[a].lift(e, e, e)
                        }
                        Func::Log => {
                            if u <= 0.0 {
                                return Err(domain(x, "log of a non-positive value"));
                            }
                            s[a].lift(u.ln(), 1.0 / u, -1.0 / (u * u))
                        }
                        Func::Sin => s[a].lift(u.sin(), u.cos(), -u.sin()),
                        Func::Cos => s[a].lift(u.cos(), -u.sin(), -u.cos()),
                        Func::Sqrt => {
                            if u < 0.0 {
                                return Err(domain(x, "sqrt of a negative value"));
                            }
                            let r = u.sqrt();
                            s[a].lift(r, 0.5 / r, -0.25 / (r * u))
                        }
                    }
                }
            };
            if !v.is_finite() {
                return Err(domain(x, "non-finite hyper-dual component"));
            }
            s.push(v);
        }
        Ok(*s.last().expect("tape is never empty"))
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<f64>> = const { RefCell::new(Vec::new()) };
}

fn emit(e: &Expression, ops: &mut Vec<Op>) -> usize {
    use Expression as E;
    let op = match e {
        E::Const(c) => Op::Const(*c),
        E::Var(v) => Op::Var(*v),
        E::Neg(a) => Op::Neg(emit(a, ops)),
        E::Add(a, b) => {
            let (a, b) = (emit(a, ops), emit(b, ops));
            Op::Add(a, b)
        }
        E::Sub(a, b) => {
            let (a, b) = (emit(a, ops), emit(b, ops));
            Op::Sub(a, b)
        }
        E::Mul(a, b) => {
            let (a, b) = (emit(a, ops), emit(b, ops));
            Op::Mul(a, b)
        }
        E::Div(a, b) => {
            let (a, b) = (emit(a, ops), emit(b, ops));
            Op::Div(a, b)
        }
        E::Pow(a, b) => {
            let base = emit(a, ops);
            match constant_value(b) {
                Some(p) if p.fract() == 0.0 && p.abs() <= 1024.0 => Op::PowInt(base, p as i32),
                Some(p) => Op::PowConst(base, p),
                None => {
                    let ex = emit(b, ops);
                    Op::Pow(base, ex)
                }
            }
        }
        E::Call(f, a) => Op::Call(*f, emit(a, ops)),
    };
    ops.push(op);
    ops.len() - 1
}

// Folds `c`, `-c` and nested negations so that `x^-2` counts as an integer power.
fn constant_value(e: &Expression) -> Option<f64> {
    match e {
        Expression::Const(c) => Some(*c),
        Expression::Neg(a) => constant_value(a).map(|c| -c),
        _ => None,
    }
}

fn domain(x: f64, reason: &str) -> Error {
    Error::Domain {
        x,
        reason: reason.to_string(),
    }
}

fn check_positive_base(u: f64, x: f64) -> Result<()> {
    if u > 0.0 {
        Ok(())
    } else {
        Err(domain(x, "non-integer power of a non-positive base"))
    }
}

fn zip3(out: &mut [f64], a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) {
    for ((o, u), v) in out.iter_mut().zip(a).zip(b) {
        *o = f(*u, *v);
    }
}

fn series_mul(out: &mut [f64], a: &[f64], b: &[f64]) {
    for k in 0..out.len() {
        out[k] = (0..=k).map(|j| a[j] * b[k - j]).sum();
    }
}

fn series_div(out: &mut [f64], a: &[f64], b: &[f64]) {
    for k in 0..out.len() {
        let acc: f64 = (1..=k).map(|j| b[j] * out[k - j]).sum();
        out[k] = (a[k] - acc) / b[0];
    }
}

fn series_exp(out: &mut [f64], u: &[f64]) {
    out[0] = u[0].exp();
    for k in 1..out.len() {
        let acc: f64 = (1..=k).map(|j| j as f64 * u[j] * out[k - j]).sum();
        out[k] = acc / k as f64;
    }
}

fn series_log(out: &mut [f64], u: &[f64]) {
    out[0] = u[0].ln();
    for k in 1..out.len() {
        let acc: f64 = (1..k).map(|j| j as f64 * out[j] * u[k - j]).sum();
        out[k] = (u[k] - acc / k as f64) / u[0];
    }
}

fn series_sin_cos(s: &mut [f64], c: &mut [f64], u: &[f64]) {
    s[0] = u[0].sin();
    c[0] = u[0].cos();
    for k in 1..s.len() {
        let mut ss = 0.0;
        let mut cc = 0.0;
        for j in 1..=k {
            let w = j as f64 * u[j];
            ss += w * c[k - j];
            cc += w * s[k - j];
        }
        s[k] = ss / k as f64;
        c[k] = -cc / k as f64;
    }
}

fn series_sqrt(out: &mut [f64], u: &[f64]) {
    out[0] = u[0].sqrt();
    for k in 1..out.len() {
        let acc: f64 = (1..k).map(|j| out[j] * out[k - j]).sum();
        out[k] = (u[k] - acc) / (2.0 * out[0]);
    }
}

// w = u^p for real p and u_0 > 0:  k u_0 w_k = sum_{j=1}^k (p j - (k - j)) u_j w_{k-j}
fn series_powf(out: &mut [f64], u: &[f64], p: f64) {
    out[0] = u[0].powf(p);
    for k in 1..out.len() {
        let acc: f64 = (1..=k)
            .map(|j| (p * j as f64 - (k - j) as f64) * u[j] * out[k - j])
            .sum();
        out[k] = acc / (k as f64 * u[0]);
    }
}

fn series_powi(out: &mut [f64], u: &[f64], p: i32) {
    let n = out.len();
    let mut result = vec![0.0; n];
    result[0] = 1.0;
    let mut base = u.to_vec();
    let mut e = p.unsigned_abs();
    let mut tmp = vec![0.0; n];
    while e > 0 {
        if e & 1 == 1 {
            series_mul(&mut tmp, &result, &base);
            result.copy_from_slice(&tmp);
        }
        e >>= 1;
        if e > 0 {
            series_mul(&mut tmp, &base, &base);
            base.copy_from_slice(&tmp);
        }
    }
    if p < 0 {
        let mut one = vec![0.0; n];
        one[0] = 1.0;
        series_div(out, &one, &result);
    } else {
        out.copy_from_slice(&result);
    }
}

/// `v + dx e1 + dy e2 + dxy e1 e2` with `e1^2 = e2^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    pub v: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxy: f64,
}

impl HyperDual {
    fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0, dxy: 0.0 }
    }

    fn add(&self, o: &Self) -> Self {
        Self {
            v: self.v + o.v,
            dx: self.dx + o.dx,
            dy: self.dy + o.dy,
            dxy: self.dxy + o.dxy,
        }
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            v: c * self.v,
            dx: c * self.dx,
            dy: c * self.dy,
            dxy: c * self.dxy,
        }
    }

    fn mul(&self, o: &Self) -> Self {
        Self {
            v: self.v * o.v,
            dx: self.v * o.dx + self.dx * o.v,
            dy: self.v * o.dy + self.dy * o.v,
            dxy: self.v * o.dxy + self.dx * o.dy + self.dy * o.dx + self.dxy * o.v,
        }
    }

    // phi(self) given phi, phi', phi'' at self.v
    fn lift(&self, f0: f64, f1: f64, f2: f64) -> Self {
        Self {
            v: f0,
            dx: f1 * self.dx,
            dy: f1 * self.dy,
            dxy: f1 * self.dxy + f2 * self.dx * self.dy,
        }
    }

    fn is_finite(&self) -> bool {
        self.v.is_finite() && self.dx.is_finite() && self.dy.is_finite() && self.dxy.is_finite()
    }
}
