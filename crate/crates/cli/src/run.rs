//! Dispatch from a job to the matching identity evaluator.

use wsum::formulae::{
    abel_sum, dilated_residue_sum, dilated_sum, euler_maclaurin_chi, euler_maclaurin_divisor,
    euler_maclaurin_divisor_chi, euler_sum, euler_sum_2d, poisson_chi, poisson_divisor,
    poisson_divisor_chi, residue_class_sum, Fault, IdentityResult, TruncationParams,
};
use wsum::smoothfn::{SmoothFunction, SmoothFunction2, DEFAULT_MAX_ORDER};
use wsum::Error;

use crate::job::{Identity, Job};
use crate::Failure;

const DEFAULT_QUAD_TOL: f64 = 1e-10;

pub fn params(job: &Job, cutoff: Option<u64>, fault: Fault) -> TruncationParams {
    let t = job.truncation.as_ref();
    let depth = t.and_then(|t| t.depth).unwrap_or(0);
    let cutoff = cutoff.or(t.and_then(|t| t.cutoff)).unwrap_or(1);
    let quad_tol = t
        .and_then(|t| t.quad_tol.as_ref())
        .map_or(DEFAULT_QUAD_TOL, |q| q.value());
    TruncationParams::new(depth, cutoff, quad_tol).with_fault(fault)
}

/// Runs the job, with `cutoff` replacing `truncation.N` when given.
pub fn evaluate(job: &Job, cutoff: Option<u64>, fault: Fault) -> Result<IdentityResult, Failure> {
    let p = params(job, cutoff, fault);
    let (a, b) = job.interval();
    let max_order = job.max_order.unwrap_or(DEFAULT_MAX_ORDER);
    if job.identity == Identity::Euler2d {
        let (c, d) = job.interval_y();
        let f = SmoothFunction2::parse(&job.f, a, b, c, d).map_err(function_error)?;
        return euler_sum_2d(&f, a, b, c, d, &p).map_err(Failure::from);
    }
    let f = SmoothFunction::parse(&job.f, a, b, max_order).map_err(function_error)?;
    let k = || job.k.expect("checked by schema");
    let r = || job.r.expect("checked by schema");
    let m = || job.m.expect("checked by schema");
    let result = match job.identity {
        Identity::Abel => {
            let lambda0 = job.lambda0.as_ref().map(|l| l.value());
            abel_sum(&job.nodes(), &job.coeffs(), &f, a, b, lambda0, &p)
        }
        Identity::Euler => euler_sum(&f, a, b, &p),
        Identity::Euler2d => unreachable!(),
        Identity::ResidueClass => residue_class_sum(&f, a, b, r(), k(), &p),
        Identity::Dilated => dilated_sum(&f, a, b, m(), &p),
        Identity::DilatedResidue => dilated_residue_sum(&f, a, b, r(), k(), m(), &p),
        Identity::EmChi => euler_maclaurin_chi(&job.chi()?, &f, a, b, &p),
        Identity::EmDivisor => euler_maclaurin_divisor(&f, a, b, &p),
        Identity::EmDivisorChi => euler_maclaurin_divisor_chi(&job.chi()?, &f, a, b, &p),
        Identity::PoissonChi => poisson_chi(&job.chi()?, &f, a, b, &p),
        Identity::PoissonDivisor => poisson_divisor(&f, a, b, &p),
        Identity::PoissonDivisorChi => poisson_divisor_chi(&job.chi()?, &f, a, b, &p),
    };
    result.map_err(Failure::from)
}

// Errors binding `f` belong to the `f` field, except domain errors on the
// interval, which concern the job as a whole.
fn function_error(e: Error) -> Failure {
    match e {
        Error::Syntax { .. } | Error::UnknownIdentifier { .. } => Failure::Schema {
            path: "f".into(),
            message: e.to_string(),
        },
        other => Failure::from(other),
    }
}
