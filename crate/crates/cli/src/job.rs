//! Job files: strict JSON schema, decimal-string numbers, and per-identity
//! field requirements.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use wsum::arith::PeriodicSequence;
use wsum::kernels::C64;

use crate::Failure;

/// A real number written as a decimal string, kept alongside its parsed value
/// so the job echo reproduces the input text.
#[derive(Debug, Clone, PartialEq)]
pub struct Decimal {
    text: String,
    value: f64,
}

impl Decimal {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        if !is_decimal(text) {
            return Err(format!("`{text}` is not a decimal number"));
        }
        let value: f64 = text.parse().map_err(|e| format!("`{text}`: {e}"))?;
        if !value.is_finite() {
            return Err(format!("`{text}` overflows a double"));
        }
        Ok(Self {
            text: text.to_string(),
            value,
        })
    }
}

// [+-]? digits [. digits]? ([eE] [+-]? digits)?, with digits on at least one
// side of the point.
fn is_decimal(s: &str) -> bool {
    let s = s.strip_prefix(['+', '-']).unwrap_or(s);
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], Some(&s[i + 1..])),
        None => (s, None),
    };
    let (int, frac) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    let digits = |t: &str| t.bytes().all(|b| b.is_ascii_digit());
    let mantissa_ok = digits(int) && digits(frac) && !(int.is_empty() && frac.is_empty());
    let exponent_ok = exponent.is_none_or(|e| {
        let e = e.strip_prefix(['+', '-']).unwrap_or(e);
        !e.is_empty() && digits(e)
    });
    mantissa_ok && exponent_ok
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        Decimal::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    Abel,
    Euler,
    Euler2d,
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

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    IntervalY,
    K,
    Chi,
    R,
    M,
    Nodes,
    Coeffs,
    Lambda0,
    Depth,
    Cutoff,
    Sweep,
}

impl Field {
    fn path(self) -> &'static str {
        match self {
            Field::IntervalY => "interval_y",
            Field::K => "k",
            Field::Chi => "chi",
            Field::R => "r",
            Field::M => "m",
            Field::Nodes => "nodes",
            Field::Coeffs => "coeffs",
            Field::Lambda0 => "lambda0",
            Field::Depth => "truncation.R",
            Field::Cutoff => "truncation.N",
            Field::Sweep => "sweep",
        }
    }
}

impl Identity {
    /// Fields the identity needs; `k` and `chi` count as one requirement.
    fn required(self) -> &'static [Field] {
        use Field::*;
        match self {
            Identity::Abel => &[Nodes, Coeffs],
            Identity::Euler => &[],
            Identity::Euler2d => &[IntervalY],
            Identity::ResidueClass => &[R, K],
            Identity::Dilated => &[M],
            Identity::DilatedResidue => &[R, K, M],
            Identity::EmChi | Identity::EmDivisorChi => &[Chi, Depth, Cutoff],
            Identity::EmDivisor => &[Depth, Cutoff],
            Identity::PoissonChi | Identity::PoissonDivisorChi => &[Chi, Cutoff],
            Identity::PoissonDivisor => &[Cutoff],
        }
    }

    fn optional(self) -> &'static [Field] {
        use Field::*;
        match self {
            Identity::Abel => &[Lambda0],
            Identity::EmChi
            | Identity::EmDivisorChi
            | Identity::PoissonChi
            | Identity::PoissonDivisorChi => &[K],
            _ => &[],
        }
    }

    /// Whether the identity has a series cut `N`.
    pub fn has_cutoff(self) -> bool {
        self.required().contains(&Field::Cutoff)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<Decimal>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub identity: Identity,
    pub f: String,
    pub interval: [Decimal; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_y: Option<[Decimal; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<[Decimal; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<Decimal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<[Decimal; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Decimal>,
}

fn schema(path: &str, message: impl Into<String>) -> Failure {
    Failure::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

impl Job {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, Failure> {
        let mut de = serde_json::Deserializer::from_str(text);
        let job: Job = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            schema(&path, e.into_inner().to_string())
        })?;
        de.end().map_err(|e| schema(".", e.to_string()))?;
        job.check_fields()?;
        Ok(job)
    }

    fn present(&self, field: Field) -> bool {
        let t = self.truncation.as_ref();
        match field {
            Field::IntervalY => self.interval_y.is_some(),
            Field::K => self.k.is_some(),
            Field::Chi => self.chi.is_some() || self.k.is_some(),
            Field::R => self.r.is_some(),
            Field::M => self.m.is_some(),
            Field::Nodes => self.nodes.is_some(),
            Field::Coeffs => self.coeffs.is_some(),
            Field::Lambda0 => self.lambda0.is_some(),
            Field::Depth => t.is_some_and(|t| t.depth.is_some()),
            Field::Cutoff => t.is_some_and(|t| t.cutoff.is_some()),
            Field::Sweep => self.sweep.is_some(),
        }
    }

    fn check_fields(&self) -> Result<(), Failure> {
        let id = self.identity;
        let required = id.required();
        let mut allowed: Vec<Field> = required.iter().chain(id.optional()).copied().collect();
        if allowed.contains(&Field::Cutoff) {
            allowed.push(Field::Sweep);
        }
        for &field in required {
            if !self.present(field) {
                let what = if field == Field::Chi {
                    "chi or k"
                } else {
                    field.path()
                };
                return Err(schema(
                    what,
                    format!("missing field required by identity `{}`", id.name()),
                ));
            }
        }
        let all = [
            Field::IntervalY,
            Field::K,
            Field::Chi,
            Field::R,
            Field::M,
            Field::Nodes,
            Field::Coeffs,
            Field::Lambda0,
            Field::Depth,
            Field::Cutoff,
            Field::Sweep,
        ];
        for field in all {
            let set = match field {
                Field::Chi => self.chi.is_some(),
                _ => self.present(field),
            };
            let ok =
                allowed.contains(&field) || (field == Field::K && allowed.contains(&Field::Chi));
            if set && !ok {
                return Err(schema(
                    field.path(),
                    format!("field not used by identity `{}`", id.name()),
                ));
            }
        }
        if let (Some(k), Some(chi)) = (self.k, &self.chi) {
            if chi.len() as u64 != k {
                return Err(schema(
                    "k",
                    format!("k = {k} but chi has {} values", chi.len()),
                ));
            }
        }
        if self.k == Some(0) {
            return Err(schema("k", "k must be positive"));
        }
        if self.m == Some(0) {
            return Err(schema("m", "m must be positive"));
        }
        if let Some(chi) = &self.chi {
            if chi.is_empty() {
                return Err(schema("chi", "chi needs at least one value"));
            }
        }
        if let (Some(nodes), Some(coeffs)) = (&self.nodes, &self.coeffs) {
            if nodes.len() != coeffs.len() {
                return Err(schema(
                    "coeffs",
                    format!("{} nodes but {} coefficients", nodes.len(), coeffs.len()),
                ));
            }
        }
        if let Some(sweep) = &self.sweep {
            check_sweep(sweep).map_err(|m| schema("sweep", m))?;
        }
        Ok(())
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.interval[0].value(), self.interval[1].value())
    }

    pub fn interval_y(&self) -> (f64, f64) {
        let y = self.interval_y.as_ref().expect("checked by schema");
        (y[0].value(), y[1].value())
    }

    /// `χ` from `chi`, or the all-ones sequence of period `k`.
    pub fn chi(&self) -> Result<PeriodicSequence, Failure> {
        let values: Vec<C64> = match (&self.chi, self.k) {
            (Some(chi), _) => chi.iter().map(complex).collect(),
            (None, Some(k)) => vec![C64::new(1.0, 0.0); k as usize],
            (None, None) => return Err(schema("chi", "missing field")),
        };
        PeriodicSequence::new(values).map_err(|e| schema("chi", e.to_string()))
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.nodes.iter().flatten().map(Decimal::value).collect()
    }

    pub fn coeffs(&self) -> Vec<C64> {
        self.coeffs.iter().flatten().map(complex).collect()
    }
}

fn complex(pair: &[Decimal; 2]) -> C64 {
    C64::new(pair[0].value(), pair[1].value())
}

/// A sweep list must be non-empty, strictly ascending and positive.
pub fn check_sweep(list: &[u64]) -> Result<(), String> {
    if list.is_empty() {
        return Err("sweep list is empty".into());
    }
    if list[0] == 0 {
        return Err("N must be at least 1".into());
    }
    if list.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sweep list must be strictly ascending".into());
    }
    Ok(())
}

impl Identity {
    pub fn name(self) -> &'static str {
        match self {
            Identity::Abel => "abel",
            Identity::Euler => "euler",
            Identity::Euler2d => "euler2d",
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
}
