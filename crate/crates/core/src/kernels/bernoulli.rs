//! Bernoulli polynomials with exact rational coefficients and the periodic
//! kernels `psi_r(x) = B_{r+1}({x}) / (r+1)!` built from them.

use std::sync::OnceLock;

use num::{BigInt, BigRational, Complex, One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Highest Bernoulli degree served by default.
pub const DEFAULT_MAX_DEGREE: usize = 32;

/// `B_r(x)` stored as exact rationals, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliPoly {
    coefficients: Vec<BigRational>,
}

impl BernoulliPoly {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[BigRational] {
        &self.coefficients
    }

    pub fn eval_exact(&self, x: &BigRational) -> BigRational {
        self.coefficients
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation in double precision.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bernoulli numbers `B_0..=B_max` with the `B_1 = -1/2` convention.
fn bernoulli_numbers(max: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(max + 1);
    b.push(BigRational::one());
    for m in 1..=max {
        let mut acc = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            acc += BigRational::from_integer(binomial(m + 1, j)) * bj;
        }
        b.push(-acc / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

fn build_poly(r: usize, numbers: &[BigRational]) -> BernoulliPoly {
    // B_r(x) = sum_j C(r, j) B_j x^{r-j}
    let coefficients = (0..=r)
        .map(|i| BigRational::from_integer(binomial(r, r - i)) * &numbers[r - i])
        .collect();
    BernoulliPoly { coefficients }
}

fn table() -> &'static [BernoulliPoly] {
    static TABLE: OnceLock<Vec<BernoulliPoly>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let numbers = bernoulli_numbers(DEFAULT_MAX_DEGREE);
        (0..=DEFAULT_MAX_DEGREE)
            .map(|r| build_poly(r, &numbers))
            .collect()
    })
}

/// Exact `B_r(x)` for `r <= DEFAULT_MAX_DEGREE`.
pub fn bernoulli_poly(r: usize) -> Result<BernoulliPoly> {
    bernoulli_poly_with_limit(r, DEFAULT_MAX_DEGREE)
}

/// Exact `B_r(x)` with an explicit degree ceiling. Degrees above the cached
/// table are computed on demand.
pub fn bernoulli_poly_with_limit(r: usize, max_degree: usize) -> Result<BernoulliPoly> {
    if r > max_degree {
        return Err(Error::Capacity {
            what: "Bernoulli degree",
            requested: r as u64,
            limit: max_degree as u64,
        });
    }
    if r <= DEFAULT_MAX_DEGREE {
        return Ok(table()[r].clone());
    }
    Ok(build_poly(r, &bernoulli_numbers(r)))
}

/// The periodic kernel `psi_r`, backed by `B_{r+1}` and the scale `(r+1)!`.
#[derive(Debug, Clone)]
pub struct PsiKernel {
    order: usize,
    poly: BernoulliPoly,
    scale: BigInt,
    // B_{r+1}(t) / (r+1)! in double precision, lowest degree first
    scaled: Vec<f64>,
}

impl PsiKernel {
    fn new(order: usize) -> Self {
        let poly = table()[order + 1].clone();
        let scale: BigInt = (1..=order + 1).map(BigInt::from).product();
        let denom = BigRational::from_integer(scale.clone());
        let scaled = poly
            .coefficients()
            .iter()
            .map(|c| to_f64(&(c / &denom)))
            .collect();
        Self {
            order,
            poly,
            scale,
            scaled,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn poly(&self) -> &BernoulliPoly {
        &self.poly
    }

    pub fn scale(&self) -> &BigInt {
        &self.scale
    }

    /// `B_{r+1}({x}) / (r+1)!` with `{x} = x - floor(x)` in `[0, 1)`.
    pub fn eval(&self, x: f64) -> f64 {
        let t = frac(x);
        self.scaled.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

/// Largest order for which `psi` is served.
pub const MAX_PSI_ORDER: usize = DEFAULT_MAX_DEGREE - 1;

fn kernels() -> &'static [PsiKernel] {
    static KERNELS: OnceLock<Vec<PsiKernel>> = OnceLock::new();
    KERNELS.get_or_init(|| (0..=MAX_PSI_ORDER).map(PsiKernel::new).collect())
}

pub fn psi_kernel(r: usize) -> Result<&'static PsiKernel> {
    kernels().get(r).ok_or(Error::Capacity {
        what: "psi order",
        requested: r as u64,
        limit: MAX_PSI_ORDER as u64,
    })
}

/// Integral part `[x]`.
pub fn integral_part(x: f64) -> f64 {
    x.floor()
}

/// Fractional part in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let t = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if t >= 1.0 {
        0.0
    } else {
        t
    }
}

/// `psi_r(x) = B_{r+1}({x}) / (r+1)!`. At integers this returns the
/// left-continuous value `B_{r+1}(0) / (r+1)!`, so `psi(0, n) = -1/2`.
pub fn psi(r: usize, x: f64) -> Result<f64> {
    Ok(psi_kernel(r)?.eval(x))
}

/// `-sum_{1 <= |n| <= N} e^{2 pi i n x} / (2 pi i n)^{r+1}` with the `n` and
/// `-n` terms combined before accumulation.
pub fn psi_fourier_partial(r: usize, x: f64, terms: u64) -> Complex<f64> {
    let t = frac(x);
    let two_pi = std::f64::consts::TAU;
    let i_pow = i_power(r + 1);
    let parity = if (r + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut acc = Complex::new(0.0, 0.0);
    for n in 1..=terms {
        let z = cis_turns(n as f64 * t);
        let (s, c) = (z.im, z.re);
        // e^{i phase} + (-1)^{r+1} e^{-i phase}
        let pair = Complex::new(c + parity * c, s - parity * s);
        let denom = i_pow * (two_pi * n as f64).powi(r as i32 + 1);
        acc += pair / denom;
    }
    let out = -acc;
    debug_assert!(out.im.abs() <= 1e-12, "paired sum left an imaginary part {}", out.im);
    out
}

/// `e^{2 pi i t}`, reduced by quarter turns so that multiples of `1/4` come
/// out exact.
pub fn cis_turns(t: f64) -> Complex<f64> {
    let quarters = 4.0 * frac(t);
    let q = quarters.floor();
    let (s, c) = ((quarters - q) * std::f64::consts::FRAC_PI_2).sin_cos();
    match q as u8 {
        0 => Complex::new(c, s),
        1 => Complex::new(-s, c),
        2 => Complex::new(-c, -s),
        _ => Complex::new(s, -c),
    }
}

/// `i^p` for a non-negative integer `p`.
pub(crate) fn i_power(p: usize) -> Complex<f64> {
    match p % 4 {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

/// `true` when `x` is within `1e-12` of an integer.
pub fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() <= 1e-12
}
