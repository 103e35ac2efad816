//! Weighted sums over residue classes of several moduli, the common shape of
//! every periodic and divisor identity.
//!
//! A lattice is a list of groups. Each group is a periodic weight `w` of
//! period `P`, standing for `Σ_{a<u≤b} w(u) f(u)`. Its Fourier coefficients
//! are `c(n) = Σ_l w(l) e^{−2πinl/P} = τ(w, −n)`.

use super::{psi_argument, TruncationParams};
use crate::arith::PeriodicSequence;
use crate::error::Result;
use crate::kernels::{i_power, FourierIntegrals, Progression, C64};
use crate::smoothfn::SmoothFunction;

const TAU: f64 = std::f64::consts::TAU;

pub(super) struct Lattice {
    groups: Vec<PeriodicSequence>,
}

/// Which series a lattice is expanded into.
#[derive(Debug, Clone, Copy)]
pub(super) enum Expansion {
    /// Euler-Maclaurin remainder of depth `R`, integrand `f^{(R+1)}`.
    Remainder(usize),
    /// Poisson frequency series, integrand `f`.
    Frequencies,
}

pub(super) struct SeriesSum {
    pub value: C64,
    pub tail: f64,
    pub nonconverged: bool,
}

impl Lattice {
    /// `χ(u)` on the integers.
    pub fn periodic(chi: &PeriodicSequence) -> Self {
        Self {
            groups: vec![chi.clone()],
        }
    }

    /// `d(u) = Σ_{m≤top} [m | u]` for `u ≤ top`.
    pub fn divisor(top: u64) -> Result<Self> {
        let groups = (1..=top)
            .map(|m| {
                let mut values = vec![C64::new(0.0, 0.0); m as usize];
                values[m as usize - 1] = C64::new(1.0, 0.0);
                PeriodicSequence::new(values)
            })
            .collect::<Result<_>>()?;
        Ok(Self { groups })
    }

    /// `χ(u) d(u) = Σ_{m≤top} Σ_{r=1}^{k} χ(mr) [u ≡ mr (mod km)]` for `u ≤ top`.
    pub fn divisor_periodic(chi: &PeriodicSequence, top: u64) -> Result<Self> {
        let k = chi.period();
        let groups = (1..=top as usize)
            .map(|m| {
                let mut values = vec![C64::new(0.0, 0.0); k * m];
                for r in 1..=k {
                    values[m * r - 1] = chi.at((m * r) as i64);
                }
                PeriodicSequence::new(values)
            })
            .collect::<Result<_>>()?;
        Ok(Self { groups })
    }

    /// `Σ_groups (1/P) Σ_l w(l)`, the weight of `∫f` in the main term.
    pub fn mean(&self) -> C64 {
        self.groups.iter().fold(C64::new(0.0, 0.0), |acc, w| {
            acc + w.values().iter().sum::<C64>() / w.period() as f64
        })
    }

    /// `Σ_groups Σ_l w(l) Σ_{r≤R} (−1)^{r+1} P^r (ψ_r((b−l)/P) f^{(r)}(b) − ψ_r((a−l)/P) f^{(r)}(a))`.
    pub fn boundary(
        &self,
        f: &SmoothFunction,
        a: f64,
        b: f64,
        p: &TruncationParams,
    ) -> Result<C64> {
        let depth = p.depth;
        let da = f.derivatives_at(a, depth)?;
        let db = f.derivatives_at(b, depth)?;
        let mut total = C64::new(0.0, 0.0);
        for w in &self.groups {
            let period = w.period() as f64;
            for (i, weight) in w.values().iter().enumerate() {
                if *weight == C64::new(0.0, 0.0) {
                    continue;
                }
                let l = (i + 1) as f64;
                let (xa, xb) = ((a - l) / period, (b - l) / period);
                psi_argument(xa, || format!("(a − {l})/{period}"))?;
                psi_argument(xb, || format!("(b − {l})/{period}"))?;
                let mut acc = 0.0;
                let mut scale = 1.0;
                for r in 0..=depth {
                    let sign = if r % 2 == 0 { -1.0 } else { 1.0 };
                    acc += sign * scale * (p.psi(r, xb)? * db[r] - p.psi(r, xa)? * da[r]);
                    scale *= period;
                }
                total += weight * acc;
            }
        }
        Ok(total)
    }

    /// Series over `1 ≤ n ≤ cutoff`, `±n` paired, accumulated `n` outer and
    /// group inner. The tail estimate is the size of the last pair.
    pub fn series(
        &self,
        f: &SmoothFunction,
        a: f64,
        b: f64,
        expansion: Expansion,
        p: &TruncationParams,
    ) -> Result<SeriesSum> {
        let active: Vec<&PeriodicSequence> =
            self.groups.iter().filter(|w| w.l1_norm() > 0.0).collect();
        if active.is_empty() {
            return Ok(SeriesSum {
                value: C64::new(0.0, 0.0),
                tail: 0.0,
                nonconverged: false,
            });
        }
        let order = match expansion {
            Expansion::Remainder(depth) => depth + 1,
            Expansion::Frequencies => 0,
        };
        let count = active.len() as f64;
        let progs: Vec<Progression> = active
            .iter()
            .map(|w| {
                let period = w.period() as f64;
                let share = p.quad_tol / (2.0 * w.l1_norm() * count);
                match expansion {
                    Expansion::Remainder(depth) => Progression {
                        step: 1.0 / period,
                        count: p.cutoff,
                        tol0: share * TAU.powi(order as i32) / period.powi(depth as i32),
                        growth: depth as i32,
                    },
                    Expansion::Frequencies => Progression {
                        step: 1.0 / period,
                        count: p.cutoff,
                        tol0: share * period,
                        growth: -1,
                    },
                }
            })
            .collect();
        let mut engine = FourierIntegrals::new(f, order, a, b)?;
        let integrals = engine.progressions(&progs)?;
        let taus: Vec<Vec<C64>> = active
            .iter()
            .map(|w| (0..w.period() as i64).map(|j| p.tau(w, j)).collect())
            .collect();
        let scales: Vec<C64> = active
            .iter()
            .map(|w| match expansion {
                // −(−P)^R
                Expansion::Remainder(depth) => {
                    let s = (w.period() as f64).powi(depth as i32);
                    C64::new(if depth % 2 == 0 { -s } else { s }, 0.0)
                }
                Expansion::Frequencies => C64::new(1.0 / w.period() as f64, 0.0),
            })
            .collect();
        // 1/(2πin)^q = i^{3q}/(2πn)^q and 1/(−2πin)^q = i^q/(2πn)^q
        let (plus, minus) = (i_power(3 * order), i_power(order));
        let mut value = C64::new(0.0, 0.0);
        let mut tail = 0.0;
        for n in 1..=p.cutoff {
            let denom = (TAU * n as f64).powi(order as i32);
            let mut last = 0.0;
            for (g, w) in active.iter().enumerate() {
                let period = w.period() as u64;
                let integral = integrals[g][n as usize - 1];
                let tau_pos = taus[g][(n % period) as usize];
                let tau_neg = taus[g][((period - n % period) % period) as usize];
                let pair = (tau_neg * integral * plus + tau_pos * integral.conj() * minus) / denom;
                let term = scales[g] * pair;
                value += term;
                last += term.norm();
            }
            if n == p.cutoff {
                tail = last;
            }
        }
        Ok(SeriesSum {
            value,
            tail,
            nonconverged: engine.nonconverged(),
        })
    }
}
