//! JSON reports and sweep CSV. Every float is printed with 17 significant
//! digits so that parsing the text gives back the same double.

use serde::Serialize;
use wsum::formulae::IdentityResult;
use wsum::kernels::C64;

use crate::job::Job;

pub fn decimal(x: f64) -> String {
    format!("{x:.16e}")
}

fn complex(z: C64) -> [String; 2] {
    [decimal(z.re), decimal(z.im)]
}

#[derive(Serialize)]
pub struct StageValue {
    pub stage: &'static str,
    pub value: [String; 2],
}

#[derive(Serialize)]
pub struct DiagnosticsReport {
    pub tail_estimate: String,
    pub quadrature_error: String,
    pub nonconverged: Vec<&'static str>,
}

#[derive(Serialize)]
pub struct Report<'a> {
    pub job: &'a Job,
    pub lhs: [String; 2],
    pub rhs: [String; 2],
    pub residual: String,
    pub threshold: String,
    pub pass: bool,
    pub stages: Vec<StageValue>,
    pub diagnostics: DiagnosticsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<String>,
}

impl<'a> Report<'a> {
    pub fn new(
        job: &'a Job,
        result: &IdentityResult,
        threshold: f64,
        wall_ms: Option<f64>,
    ) -> Self {
        let residual = result.residual();
        let d = &result.diagnostics;
        Self {
            job,
            lhs: complex(result.lhs),
            rhs: complex(result.rhs),
            residual: decimal(residual),
            threshold: decimal(threshold),
            pass: residual <= threshold && d.nonconverged.is_empty(),
            stages: result
                .terms
                .iter()
                .map(|(s, v)| StageValue {
                    stage: s.name(),
                    value: complex(*v),
                })
                .collect(),
            diagnostics: DiagnosticsReport {
                tail_estimate: decimal(d.tail_estimate),
                quadrature_error: decimal(d.quadrature_error),
                nonconverged: d.nonconverged.iter().map(|s| s.name()).collect(),
            },
            wall_ms: wall_ms.map(decimal),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub const SWEEP_HEADER: &str = "N,residual,tail_estimate,wall_ms";

pub fn sweep_row(cutoff: u64, result: &IdentityResult, wall_ms: f64) -> String {
    format!(
        "{cutoff},{},{},{}",
        decimal(result.residual()),
        decimal(result.diagnostics.tail_estimate),
        decimal(wall_ms)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
            -0.0,
            f64::MAX,
        ] {
            let s = decimal(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .trim_start_matches('-')
                .replace('.', "");
            assert_eq!(digits.len(), 17, "{s}");
        }
    }
}
