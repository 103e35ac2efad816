//! Acceptance suite. Prints one PASS/FAIL line per criterion. With
//! `WSUM_ACCEPTANCE_STRICT` set it exits non-zero if any criterion fails.
//!
//! `WSUM_THREADS` sets the worker pool size (default: all cores). Criterion
//! numbers given as arguments run only those criteria.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use wsum::arith::{divisor_sieve, PeriodicSequence};
use wsum::formulae::*;
use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num::{BigRational, ToPrimitive};
use twofloat::TwoFloat;

use wsum::kernels::{psi, psi_kernel, C64};
use wsum::smoothfn::{SmoothFunction, SmoothFunction2, DEFAULT_MAX_ORDER};

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    if let Some(threads) = std::env::var("WSUM_THREADS").ok().and_then(|v| v.parse().ok()) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("thread pool");
    }
    let criteria: [Criterion; 7] = [
        ("1 kernel suite", kernel_suite),
        ("2 exact cases", exact_cases),
        ("3 oracle-equivalence battery", oracle_battery),
        ("4 convergence-law sweeps", convergence_sweeps),
        ("5 collapse consistency", collapse_consistency),
        ("6 divisor spot values", divisor_spot_values),
        ("7 mutation sensitivity", mutation_sensitivity),
    ];
    // optional criterion numbers on the command line select a subset
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (mut failed, mut ran) = (0, 0);
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        if !selected.is_empty() && !selected.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{verdict} criterion {name}: {} [{:.1} s]",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!outcome.pass);
        ran += 1;
    }
    println!("{failed} of {ran} criteria failed");
    if failed > 0 && std::env::var_os("WSUM_ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn within(elapsed: Duration, limit_s: f64) -> (bool, String) {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("runtime {s:.1} s < {limit_s} s"))
}

// Least-squares slope of log y against log x.
fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// ---------------------------------------------------------------- 1

const KERNEL_MAX_R: usize = 8;
const KERNEL_POINTS: usize = 1000;

// Partial sums of ψ_r are compared over the octaves [N, 2N) that start at
// these cut-offs. The error oscillates with N, so each x contributes its
// root-mean-square error over an octave.
const FOURIER_OCTAVES: [u64; 4] = [64, 128, 256, 512];

fn two_float(q: &BigRational) -> TwoFloat {
    let hi = q.to_f64().expect("finite");
    let lo = (q - BigRational::from_float(hi).expect("finite")).to_f64().expect("finite");
    TwoFloat::new_add(hi, lo)
}

fn two_float_from_big(x: &BigFloat, cc: &mut Consts) -> TwoFloat {
    let to_f64 = |v: &BigFloat, cc: &mut Consts| -> f64 {
        v.format(Radix::Dec, RoundingMode::ToEven, cc)
            .expect("finite")
            .parse()
            .expect("decimal")
    };
    let hi = to_f64(x, cc);
    let rest = x.sub(&BigFloat::from_f64(hi, 128), 128, RoundingMode::ToEven);
    TwoFloat::new_add(hi, to_f64(&rest, cc))
}

// Fitted exponents, r = 0..=KERNEL_MAX_R, of the median octave error of
// `−Σ_{1≤n≤N} 2 cos(2πnx − (r+1)π/2) / (2πn)^{r+1}` against the exact
// rational value of `B_{r+1}({x}) / (r+1)!`. Sums run in double-double
// arithmetic; the weights and cos, sin of 2πx come from 128-bit arithmetic.
fn fourier_exponents(xs: &[f64]) -> Vec<f64> {
    let mut cc = Consts::new().expect("constants");
    let (bits, rm) = (128, RoundingMode::ToEven);
    let big_tau = cc.pi(bits, rm).mul(&BigFloat::from_u8(2, bits), bits, rm);
    let top = 2 * FOURIER_OCTAVES.last().unwrap() - 1;
    let orders = KERNEL_MAX_R + 1;
    // 2 / (2πn)^s for s = 1..=orders
    let weights: Vec<Vec<TwoFloat>> = (1..=top)
        .map(|n| {
            let w = big_tau.mul(&BigFloat::from_u64(n, bits), bits, rm);
            let mut power = BigFloat::from_u8(1, bits);
            (0..orders)
                .map(|_| {
                    power = power.mul(&w, bits, rm);
                    two_float_from_big(&BigFloat::from_u8(2, bits).div(&power, bits, rm), &mut cc)
                })
                .collect()
        })
        .collect();
    let mut rms = vec![vec![Vec::new(); FOURIER_OCTAVES.len()]; orders];
    for &x in xs.iter().filter(|x| (*x - x.round()).abs() > 1e-3) {
        let t = BigRational::from_float(x - x.floor()).expect("finite");
        let closed: Vec<TwoFloat> = (0..orders)
            .map(|r| {
                let kernel = psi_kernel(r).unwrap();
                two_float(
                    &(kernel.poly().eval_exact(&t)
                        / BigRational::from_integer(kernel.scale().clone())),
                )
            })
            .collect();
        let theta = big_tau.mul(&BigFloat::from_f64(x - x.floor(), bits), bits, rm);
        let c1 = two_float_from_big(&theta.cos(bits, rm, &mut cc), &mut cc);
        let s1 = two_float_from_big(&theta.sin(bits, rm, &mut cc), &mut cc);
        let (mut c, mut s) = (c1, s1);
        let mut sums = vec![TwoFloat::from(0.0); orders];
        let mut squares = vec![0.0; orders];
        let mut octave = 0;
        for n in 1..=top {
            for (r, sum) in sums.iter_mut().enumerate() {
                // cos(φ − sπ/2) for s = r + 1
                let wave = match (r + 1) % 4 {
                    0 => c,
                    1 => s,
                    2 => -c,
                    _ => -s,
                };
                *sum -= wave * weights[n as usize - 1][r];
            }
            if n >= FOURIER_OCTAVES[0] {
                for r in 0..orders {
                    squares[r] += (closed[r] - sums[r]).hi().powi(2);
                }
                if n + 1 == 2 * FOURIER_OCTAVES[octave] {
                    let width = FOURIER_OCTAVES[octave] as f64;
                    for r in 0..orders {
                        rms[r][octave].push((squares[r] / width).sqrt());
                        squares[r] = 0.0;
                    }
                    octave += 1;
                }
            }
            let next_c = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = next_c;
        }
    }
    let ns: Vec<f64> = FOURIER_OCTAVES.iter().map(|&n| n as f64).collect();
    rms.into_iter()
        .map(|per_octave| {
            let medians: Vec<f64> = per_octave
                .into_iter()
                .map(|mut e| {
                    e.sort_by(f64::total_cmp);
                    e[e.len() / 2]
                })
                .collect();
            -loglog_slope(&ns, &medians)
        })
        .collect()
}

fn kernel_suite() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<f64> = (0..KERNEL_POINTS).map(|_| rng.gen_range(-50.0..50.0)).collect();
    let mut periodic_worst: f64 = 0.0;
    let mut chain_worst: f64 = 0.0;
    let mut slopes = Vec::new();
    let mut ok = true;
    for r in 0..=KERNEL_MAX_R {
        for &x in &xs {
            let v = psi(r, x).unwrap();
            for shift in [1.0, -3.0, 17.0] {
                periodic_worst = periodic_worst.max((psi(r, x + shift).unwrap() - v).abs());
            }
            if r >= 1 {
                // stay clear of the jump of ψ_0
                let h = 1e-5;
                let t = x - x.floor();
                if r > 1 || (t > 10.0 * h && t < 1.0 - 10.0 * h) {
                    let fd = (psi(r, x + h).unwrap() - psi(r, x - h).unwrap()) / (2.0 * h);
                    chain_worst = chain_worst.max((fd - psi(r - 1, x).unwrap()).abs());
                }
            }
        }
    }
    let exponents = fourier_exponents(&xs);
    for (r, exponent) in exponents.iter().enumerate() {
        ok &= *exponent >= r as f64 + 1.0;
        slopes.push(format!("r={r}:{exponent:.4}"));
    }
    ok &= periodic_worst <= 1e-14 && chain_worst <= 1e-8;
    let (fast, time) = within(start.elapsed(), 5.0);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "r≤{KERNEL_MAX_R}, {KERNEL_POINTS} x; periodicity err {periodic_worst:.1e} (≤1e-14); \
             d/dx ψ_r − ψ_(r−1) {chain_worst:.1e} (≤1e-8); Fourier decay exponents [{}] (≥ r+1); {time}",
            slopes.join(" ")
        ),
    }
}

// ---------------------------------------------------------------- 2

fn exact_cases() -> Outcome {
    let start = Instant::now();
    let quad_tol = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = [0.0f64; 3];
    for _ in 0..20 {
        let a = rng.gen_range(-10..10) as f64 + rng.gen_range(0.05..0.95);
        let b = a + rng.gen_range(1..30) as f64;
        let f = SmoothFunction::parse("1", a, b, DEFAULT_MAX_ORDER).unwrap();
        let p = TruncationParams::new(0, rng.gen_range(1..2000), quad_tol);
        let r = poisson_chi(&PeriodicSequence::ones(), &f, a, b, &p).unwrap();
        worst[0] = worst[0].max(r.residual());
    }
    for _ in 0..20 {
        let depth = rng.gen_range(0..=4);
        let degree = rng.gen_range(0..=depth);
        let src = random_polynomial(&mut rng, degree);
        let a = rng.gen_range(-10..10) as f64 + 0.5;
        let b = a + rng.gen_range(1..30) as f64;
        let f = SmoothFunction::parse(&src, a, b, DEFAULT_MAX_ORDER).unwrap();
        let k = rng.gen_range(1..=6);
        let chi = random_chi(&mut rng, k);
        let p = TruncationParams::new(depth, 50, quad_tol);
        let r = euler_maclaurin_chi(&chi, &f, a, b, &p).unwrap();
        worst[1] = worst[1].max(r.residual());
    }
    for _ in 0..20 {
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let src = format!("{:.6} + {:.6}*x + {:.6}*y + {:.6}*x*y", c[0], c[1], c[2], c[3]);
        let (a, c0) = (rng.gen_range(-5..5) as f64, rng.gen_range(-5..5) as f64);
        let (b, d) = (a + rng.gen_range(1..8) as f64, c0 + rng.gen_range(1..8) as f64);
        let f = SmoothFunction2::parse(&src, a, b, c0, d).unwrap();
        let r = euler_sum_2d(&f, a, b, c0, d, &TruncationParams::new(0, 1, quad_tol)).unwrap();
        worst[2] = worst[2].max(r.residual());
    }
    let ok = worst[0] < 1e-12 && worst[1] < 1e-10 && worst[2] < 1e-10;
    let (fast, time) = within(start.elapsed(), 5.0);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "quad_tol 1e-12; poisson_chi k=1 f=1 worst {:.1e} (<1e-12); em_chi deg≤R worst {:.1e} (<1e-10); \
             euler_sum_2d bilinear worst {:.1e} (<1e-10); {time}",
            worst[0], worst[1], worst[2]
        ),
    }
}

fn random_polynomial(rng: &mut ChaCha8Rng, degree: usize) -> String {
    let mut terms = vec![format!("{:.6}", rng.gen_range(-2.0..2.0))];
    for d in 1..=degree {
        terms.push(format!("({:.6})*x^{d}", rng.gen_range(-1.0..1.0) / 10f64.powi(d as i32)));
    }
    terms.join(" + ")
}

fn random_chi(rng: &mut ChaCha8Rng, k: usize) -> PeriodicSequence {
    let complex = rng.gen_bool(0.5);
    let values = (0..k)
        .map(|_| {
            let re = rng.gen_range(-1.0..1.0);
            let im = if complex { rng.gen_range(-1.0..1.0) } else { 0.0 };
            C64::new(re, im)
        })
        .collect();
    PeriodicSequence::new(values).unwrap()
}

// ---------------------------------------------------------------- 3

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Identity {
    Abel,
    Euler,
    ResidueClass,
    Dilated,
    DilatedResidue,
    EmChi,
    EmDivisor,
    EmDivisorChi,
    PoissonChi,
    PoissonDivisor,
    PoissonDivisorChi,
}

impl Identity {
    const ALL: [Identity; 11] = [
        Identity::Abel,
        Identity::Euler,
        Identity::ResidueClass,
        Identity::Dilated,
        Identity::DilatedResidue,
        Identity::EmChi,
        Identity::EmDivisor,
        Identity::EmDivisorChi,
        Identity::PoissonChi,
        Identity::PoissonDivisor,
        Identity::PoissonDivisorChi,
    ];

    fn name(self) -> &'static str {
        match self {
            Identity::Abel => "abel",
            Identity::Euler => "euler",
            Identity::ResidueClass => "residue_class",
            Identity::Dilated => "dilated",
            Identity::DilatedResidue => "dilated_residue",
            Identity::EmChi => "em_chi",
            Identity::EmDivisor => "em_divisor",
            Identity::EmDivisorChi => "em_divisor_chi",
            Identity::PoissonChi => "poisson_chi",
            Identity::PoissonDivisor => "poisson_divisor",
            Identity::PoissonDivisorChi => "poisson_divisor_chi",
        }
    }

    fn poisson(self) -> bool {
        matches!(
            self,
            Identity::PoissonChi | Identity::PoissonDivisor | Identity::PoissonDivisorChi
        )
    }

    fn divisor(self) -> bool {
        matches!(
            self,
            Identity::EmDivisor
                | Identity::EmDivisorChi
                | Identity::PoissonDivisor
                | Identity::PoissonDivisorChi
        )
    }
}

#[derive(Debug, Clone)]
struct Job {
    identity: Identity,
    f: String,
    a: f64,
    b: f64,
    chi: PeriodicSequence,
    r: i64,
    m: u64,
    depth: usize,
    nodes: Vec<f64>,
    coeffs: Vec<C64>,
}

const BATTERY_JOBS: usize = 200;
const EM_CUTOFF: u64 = 500;
const POISSON_CUTOFF: u64 = 4000;
const BATTERY_QUAD_TOL: f64 = 1e-10;

// One random smooth building block on [a, b]; `shift` keeps log, sqrt and
// reciprocal arguments at least 1.
fn atom(rng: &mut ChaCha8Rng, a: f64, b: f64) -> String {
    let len = b - a;
    let shift = 1.0 - a + rng.gen_range(0.0..4.0);
    let u = format!("((x - ({a}))/{len})");
    match rng.gen_range(0..6) {
        0 => format!(
            "({:.6} + {:.6}*{u} + {:.6}*{u}^2 + {:.6}*{u}^3)",
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0)
        ),
        1 => format!("exp({:.6}*{u})", rng.gen_range(-2.0..2.0)),
        2 => format!(
            "sin({:.6}*x + {:.6})",
            rng.gen_range(0.05..0.5),
            rng.gen_range(0.0..std::f64::consts::TAU)
        ),
        3 => format!("log(x + {shift:.6})"),
        4 => format!("sqrt(x + {shift:.6})"),
        _ => format!("1/(x + {shift:.6})"),
    }
}

fn random_f(rng: &mut ChaCha8Rng, a: f64, b: f64) -> String {
    let first = atom(rng, a, b);
    let second = atom(rng, a, b);
    let c = rng.gen_range(-1.5..1.5);
    if rng.gen_bool(0.5) {
        format!("{first} + ({c:.6})*{second}")
    } else {
        format!("{first}*{second}")
    }
}

fn window(a: f64, b: f64) -> String {
    format!("sin(pi*(x - ({a}))/{})^2", b - a)
}

fn random_job(identity: Identity, rng: &mut ChaCha8Rng) -> Job {
    let (a, b) = if identity.divisor() {
        let a = rng.gen_range(0..30) as f64 + 0.5;
        (a, a + rng.gen_range(1..=(49.5 - a) as i64) as f64)
    } else {
        let a = rng.gen_range(-10..40) as f64 + 0.5;
        (a, a + rng.gen_range(1..=(49.5 - a) as i64) as f64)
    };
    let mut f = random_f(rng, a, b);
    if identity.poisson() {
        f = format!("({f})*{}", window(a, b));
    }
    let k = rng.gen_range(1..=6);
    let chi = random_chi(rng, k);
    let r = rng.gen_range(0..k as i64);
    let m = rng.gen_range(1..=4);
    let depth = rng.gen_range(0..=4);
    let count = rng.gen_range(0..8);
    let mut nodes: Vec<f64> = (0..count)
        .map(|_| rng.gen_range(a - 2.0..b + 2.0))
        .filter(|x: &f64| (x - a).abs() > 1e-6 && (x - b).abs() > 1e-6)
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let coeffs = nodes
        .iter()
        .map(|_| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
        .collect();
    Job {
        identity,
        f,
        a,
        b,
        chi,
        r,
        m,
        depth,
        nodes,
        coeffs,
    }
}

fn battery(identity: Identity) -> Vec<Job> {
    let seed = 3000 + Identity::ALL.iter().position(|&i| i == identity).unwrap() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..BATTERY_JOBS).map(|_| random_job(identity, &mut rng)).collect()
}

fn evaluate(job: &Job, fault: Fault) -> wsum::Result<IdentityResult> {
    let f = SmoothFunction::parse(&job.f, job.a, job.b, DEFAULT_MAX_ORDER)?;
    let cutoff = if job.identity.poisson() { POISSON_CUTOFF } else { EM_CUTOFF };
    let p = TruncationParams::new(job.depth, cutoff, BATTERY_QUAD_TOL).with_fault(fault);
    let (a, b) = (job.a, job.b);
    let k = job.chi.period() as u64;
    match job.identity {
        Identity::Abel => abel_sum(&job.nodes, &job.coeffs, &f, a, b, None, &p),
        Identity::Euler => euler_sum(&f, a, b, &p),
        Identity::ResidueClass => residue_class_sum(&f, a, b, job.r, k, &p),
        Identity::Dilated => dilated_sum(&f, a, b, job.m, &p),
        Identity::DilatedResidue => dilated_residue_sum(&f, a, b, job.r, k, job.m, &p),
        Identity::EmChi => euler_maclaurin_chi(&job.chi, &f, a, b, &p),
        Identity::EmDivisor => euler_maclaurin_divisor(&f, a, b, &p),
        Identity::EmDivisorChi => euler_maclaurin_divisor_chi(&job.chi, &f, a, b, &p),
        Identity::PoissonChi => poisson_chi(&job.chi, &f, a, b, &p),
        Identity::PoissonDivisor => poisson_divisor(&f, a, b, &p),
        Identity::PoissonDivisorChi => poisson_divisor_chi(&job.chi, &f, a, b, &p),
    }
}

// Relative residual, or infinity when the job was rejected or flagged.
fn score(job: &Job, fault: Fault) -> f64 {
    match evaluate(job, fault) {
        Ok(r) if r.diagnostics.nonconverged.is_empty() => r.residual() / (1.0 + r.lhs.norm()),
        _ => f64::INFINITY,
    }
}

// A job passes when its relative residual meets the family bound.
fn job_passes(identity: Identity, relative: f64) -> bool {
    if identity.poisson() {
        relative <= 1e-4
    } else {
        relative <= 1e-6
    }
}

fn oracle_battery() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut lines = Vec::new();
    for identity in Identity::ALL {
        let jobs = battery(identity);
        let scores: Vec<f64> = jobs.par_iter().map(|j| score(j, Fault::None)).collect();
        let passing = scores.iter().filter(|&&s| job_passes(identity, s)).count();
        let worst = scores.iter().copied().fold(0.0, f64::max);
        let good = if identity.poisson() {
            passing == jobs.len()
        } else {
            passing * 100 >= 99 * jobs.len() && worst <= 1e-4
        };
        ok &= good;
        lines.push(format!(
            "{} {passing}/{} worst {worst:.1e}",
            identity.name(),
            jobs.len()
        ));
    }
    let threads = rayon::current_num_threads();
    let limit = if threads >= 8 { 180.0 } else { 600.0 };
    let (fast, time) = within(start.elapsed(), limit);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "E-M family N={EM_CUTOFF} rel ≤1e-6 on ≥99% and ≤1e-4 on all, Poisson windowed N={POISSON_CUTOFF} \
             rel ≤1e-4 on all; [{}]; {threads} thread(s), {time}",
            lines.join("; ")
        ),
    }
}

// ---------------------------------------------------------------- 4

const SWEEP: [u64; 3] = [100, 1000, 10000];

fn sweep_slope(residual: impl Fn(u64) -> f64) -> f64 {
    let ys: Vec<f64> = SWEEP.iter().map(|&n| residual(n)).collect();
    let xs: Vec<f64> = SWEEP.iter().map(|&n| n as f64).collect();
    loglog_slope(&xs, &ys)
}

fn convergence_sweeps() -> Outcome {
    let start = Instant::now();
    // Quarter-offset endpoints keep the tail phase the same at every N.
    let poisson_jobs: [(&str, f64, f64, &[f64]); 10] = [
        ("x", 0.25, 3.25, &[1.0]),
        ("exp(x/5)", 0.25, 10.25, &[1.0]),
        ("1/(x + 1)", 0.25, 20.25, &[1.0, -1.0]),
        ("cos(x/3) + 2", 1.25, 15.25, &[1.0, 0.0, -1.0]),
        ("sqrt(x + 2)", 0.75, 30.75, &[1.0, 2.0, 0.5]),
        ("log(x + 3)", 2.25, 12.25, &[0.0, 1.0]),
        ("x^2/50 + 1", 0.25, 25.25, &[1.0, -1.0, 1.0, -1.0, 1.0]),
        ("exp(-x/7)*(1 + x)", 0.75, 18.75, &[1.0, 0.5, 0.25, 0.0, -1.0, 2.0]),
        ("sin(x/2) + 2", 5.25, 40.25, &[1.0, 1.0, -2.0]),
        ("1/(x + 5) + x/10", 0.25, 9.25, &[1.0, 1.0]),
    ];
    let mut generic = Vec::new();
    let mut windowed = Vec::new();
    let mut ok = true;
    for (src, a, b, chi) in poisson_jobs {
        let chi = PeriodicSequence::from_real(chi).unwrap();
        for (slot, src) in [(&mut generic, src.to_string()), (&mut windowed, format!("({src})*{}", window(a, b)))] {
            let f = SmoothFunction::parse(&src, a, b, DEFAULT_MAX_ORDER).unwrap();
            let slope = sweep_slope(|n| {
                poisson_chi(&chi, &f, a, b, &TruncationParams::new(0, n, 1e-13))
                    .unwrap()
                    .residual()
            });
            slot.push(slope);
        }
    }
    ok &= generic.iter().all(|&s| s <= -0.9) && windowed.iter().all(|&s| s <= -1.8);
    // Rounding leaves a floor near ε·k^R·∫|f^(R+1)|, while the truncation
    // error scales like (k/N)^(R+2). A period-20 weight and steep f near a
    // keep the truncation error above that floor across the sweep.
    let em_chi = PeriodicSequence::from_real(
        &(0..20).map(|i| ((i * 7) % 5) as f64 - 2.0).collect::<Vec<_>>(),
    )
    .unwrap();
    let em_jobs: [(&str, f64, f64); 10] = [
        ("1/(x - 0.45)", 0.5, 6.5),
        ("1/(x - 0.4)", 0.5, 12.5),
        ("1/(x - 0.3)", 0.5, 12.5),
        ("log(x - 0.4)", 0.5, 12.5),
        ("exp(x/4)/(x - 3.4)", 3.5, 15.5),
        ("sqrt(x - 2.4)", 2.5, 20.5),
        ("1/(x - 0.2)^2", 0.5, 10.5),
        ("cos(x)/(x - 0.3)", 0.5, 18.5),
        ("log(x - 5.3)*x", 5.5, 25.5),
        ("1/(x - 0.35) + x", 0.5, 30.5),
    ];
    let em: Vec<f64> = em_jobs
        .par_iter()
        .map(|&(src, a, b)| {
            let f = SmoothFunction::parse(src, a, b, DEFAULT_MAX_ORDER).unwrap();
            sweep_slope(|n| {
                euler_maclaurin_chi(&em_chi, &f, a, b, &TruncationParams::new(3, n, 1e-14))
                    .unwrap()
                    .residual()
            })
        })
        .collect();
    ok &= em.iter().all(|&s| s <= -3.5);
    let fmt = |v: &[f64]| v.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>().join(" ");
    let (fast, time) = within(start.elapsed(), 300.0);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "N ∈ {{1e2,1e3,1e4}}; Poisson generic slopes [{}] (≤-0.9); windowed [{}] (≤-1.8); \
             E-M R=3, k=20 [{}] (≤-3.5); {time}",
            fmt(&generic),
            fmt(&windowed),
            fmt(&em)
        ),
    }
}

// ---------------------------------------------------------------- 5

const COLLAPSE_JOBS: usize = 50;

fn collapse_consistency() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ones = PeriodicSequence::ones();
    let relative = |x: &IdentityResult, y: &IdentityResult| {
        (x.rhs - y.rhs).norm() / x.rhs.norm().max(y.rhs.norm()).max(f64::MIN_POSITIVE)
    };
    let mut worst = [0.0f64; 4];
    for _ in 0..COLLAPSE_JOBS {
        let a = rng.gen_range(0..20) as f64 + 0.5;
        let b = a + rng.gen_range(1..=(30.5 - a) as i64) as f64;
        let src = random_f(&mut rng, a, b);
        let f = SmoothFunction::parse(&src, a, b, DEFAULT_MAX_ORDER).unwrap();
        let p = TruncationParams::new(rng.gen_range(0..=4), 200, 1e-10);
        let em1 = euler_maclaurin_chi(&ones, &f, a, b, &p).unwrap();
        let em0 = euler_maclaurin_classical(&f, a, b, &p).unwrap();
        worst[0] = worst[0].max(relative(&em1, &em0));
        let d2 = euler_maclaurin_divisor(&f, a, b, &p).unwrap();
        let d3 = euler_maclaurin_divisor_chi(&ones, &f, a, b, &p).unwrap();
        worst[2] = worst[2].max(relative(&d2, &d3));

        let w = SmoothFunction::parse(&format!("({src})*{}", window(a, b)), a, b, DEFAULT_MAX_ORDER)
            .unwrap();
        let p = TruncationParams::new(0, 500, 1e-10);
        let p1 = poisson_chi(&ones, &w, a, b, &p).unwrap();
        let p0 = poisson_classical(&w, a, b, &p).unwrap();
        worst[1] = worst[1].max(relative(&p1, &p0));
        let q2 = poisson_divisor(&w, a, b, &p).unwrap();
        let q3 = poisson_divisor_chi(&ones, &w, a, b, &p).unwrap();
        worst[3] = worst[3].max(relative(&q2, &q3));
    }
    let ok = worst.iter().all(|&w| w <= 1e-12);
    let (fast, time) = within(start.elapsed(), 60.0);
    Outcome {
        pass: ok && fast,
        detail: format!(
            "{COLLAPSE_JOBS} jobs each, rel ≤1e-12; em_chi≡classical {:.1e}, poisson_chi≡classical {:.1e}, \
             em_divisor_chi≡em_divisor {:.1e}, poisson_divisor_chi≡poisson_divisor {:.1e}; {time}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    }
}

// ---------------------------------------------------------------- 6

fn divisor_spot_values() -> Outcome {
    let one = SmoothFunction::parse("1", 0.0, 13.0, DEFAULT_MAX_ORDER).unwrap();
    let x = SmoothFunction::parse("x", 0.0, 13.0, DEFAULT_MAX_ORDER).unwrap();
    let s10 = direct_sum(Weight::Divisor, &one, 0.5, 10.5).unwrap();
    let s6 = direct_sum(Weight::Divisor, &x, 0.5, 6.5).unwrap();
    let d12 = divisor_sieve(12).unwrap().get(12);
    let ok = s10 == C64::new(27.0, 0.0) && s6 == C64::new(57.0, 0.0) && d12 == 6;
    Outcome {
        pass: ok,
        detail: format!(
            "Σ_(n≤10) d(n) = {} (27), Σ_(n≤6) n·d(n) = {} (57), d(12) = {d12} (6)",
            s10.re, s6.re
        ),
    }
}

// ---------------------------------------------------------------- 7

const MUTATION_JOBS: usize = 20;

fn mutation_sensitivity() -> Outcome {
    let start = Instant::now();
    // every identity in turn, walking down each battery
    let batteries: Vec<Vec<Job>> = Identity::ALL.iter().map(|&i| battery(i)).collect();
    let jobs: Vec<&Job> = (0..MUTATION_JOBS)
        .map(|j| &batteries[j % batteries.len()][j / batteries.len()])
        .collect();
    let mut ok = true;
    let mut lines = Vec::new();
    for fault in Fault::ALL {
        let failures = jobs
            .par_iter()
            .filter(|job| !job_passes(job.identity, score(job, fault)))
            .count();
        ok &= failures >= 1;
        lines.push(format!("{} {failures}/{MUTATION_JOBS} failing", fault.name()));
    }
    let (fast, time) = within(start.elapsed(), 60.0);
    Outcome {
        pass: ok && fast,
        detail: format!("each fault ≥1 failure; [{}]; {time}", lines.join(", ")),
    }
}
