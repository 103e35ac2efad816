//! Arithmetic weights: periodic sequences and their transforms, the divisor
//! function, and residue-class enumeration.

use crate::error::{Error, Result};
use crate::kernels::{cis_turns, C64};

/// A complex sequence of period `k`, stored by residues `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSequence {
    values: Vec<C64>,
}

impl PeriodicSequence {
    /// `values[l - 1]` is the value at residue `l`.
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("a periodic sequence needs at least one value"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("periodic sequence values must be finite"));
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// The constant sequence 1 (period 1).
    pub fn ones() -> Self {
        Self {
            values: vec![C64::new(1.0, 0.0)],
        }
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Value at any integer `n`.
    pub fn at(&self, n: i64) -> C64 {
        let k = self.values.len() as i64;
        self.values[(n - 1).rem_euclid(k) as usize]
    }

    /// `Σ_l |χ(l)|` over one period.
    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum()
    }

    /// The sequence `j ↦ χ(m·j)`, again of period `k`.
    pub fn dilate(&self, m: i64) -> Self {
        let k = self.values.len() as i64;
        Self {
            values: (1..=k).map(|j| self.at(m * j)).collect(),
        }
    }
}

/// `τ(χ, n) = Σ_{l=1}^{k} χ(l) e^{2πinl/k}`. The phase `nl mod k` is reduced
/// in integers, so `τ(χ, n + k) = τ(χ, n)` bit for bit.
pub fn tau(chi: &PeriodicSequence, n: i64) -> C64 {
    let k = chi.period() as i128;
    let n = n as i128;
    chi.values
        .iter()
        .enumerate()
        .fold(C64::new(0.0, 0.0), |acc, (i, v)| {
            let l = i as i128 + 1;
            let turns = (n * l).rem_euclid(k) as f64 / k as f64;
            acc + v * cis_turns(turns)
        })
}

/// Largest sieve limit accepted by default.
pub const DEFAULT_SIEVE_CAP: u64 = 100_000_000;

/// `d(n)` for `1 ≤ n ≤ limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorTable {
    counts: Vec<u32>,
}

impl DivisorTable {
    pub fn limit(&self) -> u64 {
        self.counts.len() as u64 - 1
    }

    /// `d(n)`; `n` must lie in `1..=limit`.
    pub fn get(&self, n: u64) -> u32 {
        assert!(n >= 1 && n <= self.limit(), "d({n}) outside sieve range 1..={}", self.limit());
        self.counts[n as usize]
    }
}

pub fn divisor_sieve(limit: u64) -> Result<DivisorTable> {
    divisor_sieve_with_cap(limit, DEFAULT_SIEVE_CAP)
}

pub fn divisor_sieve_with_cap(limit: u64, cap: u64) -> Result<DivisorTable> {
    if limit == 0 {
        return Err(Error::invalid("sieve limit must be at least 1"));
    }
    if limit > cap {
        return Err(Error::Capacity {
            what: "divisor sieve",
            requested: limit,
            limit: cap,
        });
    }
    let n = limit as usize;
    let mut counts = vec![0u32; n + 1];
    for m in 1..=n {
        for multiple in (m..=n).step_by(m) {
            counts[multiple] += 1;
        }
    }
    Ok(DivisorTable { counts })
}

/// Integers `n` with `a/m < n ≤ b/m` and `n ≡ r (mod k)`, ascending.
pub fn residues_in_class(a: f64, b: f64, r: i64, k: u64, m: u64) -> impl Iterator<Item = i64> {
    assert!(k >= 1 && m >= 1, "k and m must be positive");
    let k = k as i64;
    let lo = a / m as f64;
    let hi = b / m as f64;
    let first = lo.floor() as i64 + 1;
    let start = first + (r - first).rem_euclid(k);
    let last = if a < b { hi.floor() as i64 } else { i64::MIN };
    (0..)
        .map(move |j| start + j * k)
        .take_while(move |&n| n <= last)
}

/// `H(n) = Σ_{m ≤ n} 1/m`, summed from the small terms up.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).rev().map(|m| 1.0 / m as f64).sum()
}
