//! Built-in invariant suite run by `wsum selftest`.

use wsum::arith::{divisor_sieve, harmonic, residues_in_class, tau, PeriodicSequence};
use wsum::formulae::{
    direct_sum, euler_maclaurin_chi, euler_maclaurin_classical, euler_maclaurin_divisor,
    euler_maclaurin_divisor_chi, poisson_chi, poisson_classical, poisson_divisor,
    poisson_divisor_chi, Fault, TruncationParams, Weight,
};
use wsum::kernels::{integrate, psi, psi_fourier_partial, C64};
use wsum::smoothfn::{SmoothFunction, DEFAULT_MAX_ORDER};

use crate::job::Job;
use crate::run::evaluate;

pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

pub struct Group {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Group {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn check(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        label: label.into(),
        pass,
        detail: detail.into(),
    }
}

pub fn run(fault: Fault) -> Vec<Group> {
    vec![
        Group {
            name: "kernels",
            checks: kernels(),
        },
        Group {
            name: "arith",
            checks: arith(),
        },
        Group {
            name: "collapses",
            checks: collapses(fault),
        },
        Group {
            name: "oracle",
            checks: oracle(fault),
        },
    ]
}

fn kernels() -> Vec<Check> {
    let xs: Vec<f64> = (0..200).map(|i| -37.3 + 0.3731 * i as f64).collect();
    let mut periodic: f64 = 0.0;
    let mut chain: f64 = 0.0;
    for r in 0..=8 {
        for &x in &xs {
            let v = psi(r, x).unwrap();
            periodic = periodic.max((psi(r, x + 1.0).unwrap() - v).abs());
            if r >= 1 {
                let h = 1e-5;
                let fd = (psi(r, x + h).unwrap() - psi(r, x - h).unwrap()) / (2.0 * h);
                chain = chain.max((fd - psi(r - 1, x).unwrap()).abs());
            }
        }
    }
    let quarter = psi(1, 0.25).unwrap();
    let partial = psi_fourier_partial(1, 0.3, 1000).re;
    let closed = psi(1, 0.3).unwrap();
    let quad = integrate(|u| C64::new(u.powi(5), 0.0), 0.0, 1.0, 1e-14)
        .unwrap()
        .value
        .re;
    vec![
        check(
            "psi period one",
            periodic <= 1e-14,
            format!("{periodic:.1e}"),
        ),
        check(
            "psi derivative chain",
            chain <= 1e-8,
            format!("{chain:.1e}"),
        ),
        check(
            "psi_1(1/4) = -1/96",
            (quarter + 1.0 / 96.0).abs() <= 1e-16,
            format!("{quarter}"),
        ),
        check(
            "psi_1 Fourier series",
            (partial - closed).abs() <= 1e-6,
            format!("{:.1e}", (partial - closed).abs()),
        ),
        check(
            "quadrature of x^5",
            (quad - 1.0 / 6.0).abs() <= 1e-15,
            format!("{quad}"),
        ),
    ]
}

fn arith() -> Vec<Check> {
    let one = SmoothFunction::parse("1", 0.0, 11.0, DEFAULT_MAX_ORDER).unwrap();
    let ident = SmoothFunction::parse("x", 0.0, 11.0, DEFAULT_MAX_ORDER).unwrap();
    let d_sum = direct_sum(Weight::Divisor, &one, 0.5, 10.5).unwrap().re;
    let nd_sum = direct_sum(Weight::Divisor, &ident, 0.5, 6.5).unwrap().re;
    let table = divisor_sieve(100).unwrap();
    let chi = PeriodicSequence::from_real(&[1.0, -1.0, 0.5]).unwrap();
    let tau_periodic = (-20..20).all(|n| tau(&chi, n + 3) == tau(&chi, n));
    let class: Vec<i64> = residues_in_class(2.0, 20.0, 1, 3, 2).collect();
    vec![
        check("sum of d(n), n <= 10", d_sum == 27.0, format!("{d_sum}")),
        check("sum of n d(n), n <= 6", nd_sum == 57.0, format!("{nd_sum}")),
        check("d(12)", table.get(12) == 6, format!("{}", table.get(12))),
        check("tau periodic", tau_periodic, ""),
        check("residue class", class == [4, 7, 10], format!("{class:?}")),
        check(
            "H(4)",
            (harmonic(4) - 25.0 / 12.0).abs() <= 1e-15,
            format!("{}", harmonic(4)),
        ),
    ]
}

fn collapses(fault: Fault) -> Vec<Check> {
    let f = SmoothFunction::parse("cos(x/3) + x", 0.0, 20.0, DEFAULT_MAX_ORDER).unwrap();
    let (a, b) = (0.5, 19.5);
    let ones = PeriodicSequence::ones();
    let p = TruncationParams::new(2, 100, 1e-11).with_fault(fault);
    let rel = |x: C64, y: C64| (x - y).norm() / y.norm().max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    let mut compare = |label: &str,
                       x: wsum::Result<wsum::formulae::IdentityResult>,
                       y: wsum::Result<wsum::formulae::IdentityResult>| {
        match (x, y) {
            (Ok(x), Ok(y)) => {
                let e = rel(x.rhs, y.rhs);
                out.push(check(label, e <= 1e-12, format!("{e:.1e}")));
            }
            (Err(e), _) | (_, Err(e)) => out.push(check(label, false, e.to_string())),
        }
    };
    compare(
        "em_chi vs classical",
        euler_maclaurin_chi(&ones, &f, a, b, &p),
        euler_maclaurin_classical(&f, a, b, &p),
    );
    compare(
        "poisson_chi vs classical",
        poisson_chi(&ones, &f, a, b, &p),
        poisson_classical(&f, a, b, &p),
    );
    compare(
        "em_divisor_chi vs em_divisor",
        euler_maclaurin_divisor_chi(&ones, &f, a, b, &p),
        euler_maclaurin_divisor(&f, a, b, &p),
    );
    compare(
        "poisson_divisor_chi vs poisson_divisor",
        poisson_divisor_chi(&ones, &f, a, b, &p),
        poisson_divisor(&f, a, b, &p),
    );
    out
}

// (label, job, relative tolerance)
const ORACLE_JOBS: [(&str, &str, f64); 12] = [
    (
        "abel",
        r#"{"identity":"abel","f":"exp(-x/3)","interval":["0.5","6.5"],
            "nodes":["0.25","1.75","2.5","4.125","6"],
            "coeffs":[["1","0"],["-2","0.5"],["0.5","0"],["3","-1"],["1","1"]]}"#,
        1e-9,
    ),
    (
        "euler",
        r#"{"identity":"euler","f":"1/x","interval":["0.5","20.5"]}"#,
        1e-9,
    ),
    (
        "euler2d",
        r#"{"identity":"euler2d","f":"x*y + sin(x)","interval":["0","3"],"interval_y":["0","2"]}"#,
        1e-9,
    ),
    (
        "residue_class",
        r#"{"identity":"residue_class","f":"sqrt(x)","interval":["0.5","30.5"],"r":2,"k":5}"#,
        1e-9,
    ),
    (
        "dilated_residue",
        r#"{"identity":"dilated_residue","f":"log(x)","interval":["1.5","40.5"],"r":1,"k":3,"m":2}"#,
        1e-9,
    ),
    (
        "em_chi real",
        r#"{"identity":"em_chi","f":"exp(-x/5)","interval":["0.3","40.3"],
            "chi":[["1","0"],["0","0"],["-1","0"],["0","0"]],"truncation":{"R":3,"N":200,"quad_tol":"1e-12"}}"#,
        1e-8,
    ),
    (
        "em_chi complex",
        r#"{"identity":"em_chi","f":"1/(x+1)","interval":["0.5","20.5"],
            "chi":[["1","0"],["-0.5","0.8660254037844386"],["-0.5","-0.8660254037844386"]],
            "truncation":{"R":3,"N":200,"quad_tol":"1e-12"}}"#,
        1e-8,
    ),
    (
        "em_divisor",
        r#"{"identity":"em_divisor","f":"sqrt(x)","interval":["2.5","29.5"],
            "truncation":{"R":1,"N":500,"quad_tol":"1e-12"}}"#,
        1e-6,
    ),
    (
        "em_divisor_chi",
        r#"{"identity":"em_divisor_chi","f":"x","interval":["0.5","9.5"],
            "chi":[["1","0"],["0","1"],["-1","0"],["0","-1"]],"truncation":{"R":2,"N":300,"quad_tol":"1e-12"}}"#,
        1e-9,
    ),
    (
        "poisson_chi exact",
        r#"{"identity":"poisson_chi","f":"1","interval":["0.25","5.25"],"k":1,"truncation":{"N":10}}"#,
        1e-12,
    ),
    (
        "poisson_chi window",
        r#"{"identity":"poisson_chi","f":"sin(pi*(x-0.5)/40)^2","interval":["0.5","40.5"],
            "chi":[["1","0"],["0","1"],["-1","0"],["0","-1"]],"truncation":{"N":2000,"quad_tol":"1e-12"}}"#,
        1e-5,
    ),
    (
        "poisson_divisor_chi window",
        r#"{"identity":"poisson_divisor_chi","f":"sin(pi*(x-0.5)/12)^2","interval":["0.5","12.5"],
            "chi":[["1","0"],["-1","0"]],"truncation":{"N":2000,"quad_tol":"1e-12"}}"#,
        1e-4,
    ),
];

fn oracle(fault: Fault) -> Vec<Check> {
    ORACLE_JOBS
        .iter()
        .map(|(label, json, tol)| {
            let outcome = Job::from_json(json).and_then(|job| evaluate(&job, None, fault));
            match outcome {
                Ok(r) => {
                    let bound = tol * (1.0 + r.lhs.norm());
                    let pass = r.residual() <= bound && r.diagnostics.nonconverged.is_empty();
                    check(
                        *label,
                        pass,
                        format!("residual {:.1e} (≤ {bound:.1e})", r.residual()),
                    )
                }
                Err(e) => check(*label, false, e.to_string()),
            }
        })
        .collect()
}
