//! Continuity, isotropy and realizability diagnostics built on the field
//! layer.
//!
//! Exact quantities (moduli, recovered spectra) come straight from the
//! spectrum. Monte Carlo checks compare per-replicate statistics against
//! analytic values or against each other through z-scores.

mod continuity;
mod modulus;
mod moments;
mod nugget;

pub use continuity::{covariance_continuity_check, ContinuityReport, ContinuityStep, PointPair};
pub use modulus::{
    continuity_modulus, lifted_modulus, modulus_bound, ms_increment, sphere_modulus, ModulusCurve, SearchGrid,
};
pub use moments::{
    character_field, convergence_curve, covariance_report, isotropy_functional_test, sampler_isotropy_test, uncorrelatedness_suite,
    uncorrelatedness_test, variance_identity_test, ConvergenceReport, ConvergenceRow, CovarianceEntry,
    CovarianceReport,
};
pub use nugget::{
    nugget_analysis, sphere_spectrum_of_covariance, spectrum_of_covariance, NuggetVerdict, RecoveredSpectrum,
    REALIZABILITY_TOL,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::field::{sample_gaussian, BasisTable, FieldSample, Structure};
use crate::group::{Domain, GroupElement, SpherePoint};
use crate::irreps::IrrepLabel;
use crate::spectrum::{covariance_from_spectrum, sphere_covariance, PowerSpectrum};
use crate::stats::MeanEstimate;

/// z-score limit for distributional comparisons.
pub const Z_LIMIT: f64 = 4.0;
/// Standard-error band for comparisons against analytic expectations.
pub const SE_BAND: f64 = 3.0;
/// Smallest replicate count accepted by the statistical tests.
pub const MIN_REPLICATES: usize = 100;
/// Mean differences this small are floating-point residue.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// One scalar comparison inside a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub expected: f64,
    pub se: f64,
    pub z: f64,
    pub limit: f64,
}

impl Check {
    /// Differences below [`ROUNDOFF_FLOOR`] (relative to `1 + |expected|`)
    /// score zero: a standard error of rounding residue is not a sampling error.
    pub fn from_estimate(name: impl Into<String>, est: &MeanEstimate, expected: f64, limit: f64) -> Self {
        let diff = est.mean - expected;
        let z = if diff.abs() <= ROUNDOFF_FLOOR * (1.0 + expected.abs()) {
            0.0
        } else {
            est.z(expected)
        };
        Check {
            name: name.into(),
            statistic: est.mean,
            expected,
            se: est.se,
            z,
            limit,
        }
    }

    /// Deterministic comparison: passes when `|statistic - expected| <= tol`.
    /// Reported with `se = tol` so `|z| <= 1` is a pass.
    pub fn exact(name: impl Into<String>, statistic: f64, expected: f64, tol: f64) -> Self {
        let diff = statistic - expected;
        Check {
            name: name.into(),
            statistic,
            expected,
            se: tol,
            z: if diff.abs() <= tol { 0.0 } else { diff / tol },
            limit: 1.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.z.abs() < self.limit
    }
}

/// Machine-readable test outcome. The headline fields describe the worst
/// check; all checks are listed under `checks`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub se: f64,
    pub z: f64,
    pub pass: bool,
    pub seed: u64,
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

impl TestReport {
    pub fn from_checks(test: impl Into<String>, seed: u64, replicates: usize, checks: Vec<Check>) -> Self {
        let worst = checks
            .iter()
            .max_by(|a, b| {
                let ra = if a.z.is_nan() { f64::INFINITY } else { a.z.abs() / a.limit };
                let rb = if b.z.is_nan() { f64::INFINITY } else { b.z.abs() / b.limit };
                ra.total_cmp(&rb)
            })
            .cloned();
        let pass = checks.iter().all(Check::passed);
        let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
        let (statistic, se, z) = worst.map_or((0.0, 0.0, 0.0), |c| (c.statistic, c.se, c.z));
        TestReport {
            test: test.into(),
            statistic,
            se,
            z,
            pass,
            seed,
            replicates,
            detail: (!failed.is_empty()).then(|| format!("failed checks: {}", failed.join(", "))),
            checks,
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        self.detail = Some(match self.detail.take() {
            Some(prev) => format!("{prev}; {detail}"),
            None => detail,
        });
        self
    }

    pub fn fail(mut self, detail: impl Into<String>) -> Self {
        self.pass = false;
        self.with_detail(detail)
    }
}

/// Replicate schedule: replicate `r` draws from stream `r` of `seed`.
/// Results are gathered in replicate order, so any reduction over them is
/// independent of how many worker threads ran.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub seed: u64,
    pub replicates: usize,
    pub structure: Structure,
}

impl MonteCarlo {
    pub fn new(seed: u64, replicates: usize) -> Self {
        MonteCarlo {
            seed,
            replicates,
            structure: Structure::Real,
        }
    }

    pub fn with_structure(mut self, structure: Structure) -> Self {
        self.structure = structure;
        self
    }

    pub fn require(&self, min: usize) -> Result<()> {
        if self.replicates < min {
            return Err(Error::TooFewReplicates {
                min,
                got: self.replicates,
            });
        }
        Ok(())
    }

    pub fn map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        (0..self.replicates as u64).into_par_iter().map(f).collect()
    }

    pub fn map_samples<T, F>(&self, spec: &PowerSpectrum, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(FieldSample) -> Result<T> + Sync + Send,
    {
        self.map(|r| f(sample_gaussian(spec, self.seed, r, self.structure)?))
    }
}

/// A point of a group or of the sphere.
#[derive(Clone, Debug, PartialEq)]
pub enum Site {
    Group(GroupElement),
    Sphere(SpherePoint),
}

impl Site {
    pub fn domain(&self) -> Domain {
        match self {
            Site::Group(g) => Domain::Group(g.group()),
            Site::Sphere(_) => Domain::Sphere,
        }
    }
}

impl From<GroupElement> for Site {
    fn from(g: GroupElement) -> Self {
        Site::Group(g)
    }
}

impl From<SpherePoint> for Site {
    fn from(x: SpherePoint) -> Self {
        Site::Sphere(x)
    }
}

pub(crate) fn site_table(domain: Domain, labels: &[IrrepLabel], sites: &[Site]) -> Result<BasisTable> {
    match domain {
        Domain::Group(group) => {
            let pts = sites
                .iter()
                .map(|s| match s {
                    Site::Group(g) => Ok(*g),
                    Site::Sphere(_) => Err(mismatch(domain, Domain::Sphere)),
                })
                .collect::<Result<Vec<_>>>()?;
            BasisTable::for_group(group, labels, &pts)
        }
        Domain::Sphere => {
            let pts = sites
                .iter()
                .map(|s| match s {
                    Site::Sphere(x) => Ok(*x),
                    Site::Group(g) => Err(mismatch(Domain::Sphere, g.group())),
                })
                .collect::<Result<Vec<_>>>()?;
            BasisTable::for_sphere(labels, &pts)
        }
    }
}

/// `Gamma(a, b) = E T(a) conj(T(b))`.
pub fn covariance_between(spec: &PowerSpectrum, a: &Site, b: &Site) -> Result<Complex64> {
    match (a, b) {
        (Site::Group(a), Site::Group(b)) => covariance_from_spectrum(spec, &b.inv().mul(a)?),
        (Site::Sphere(a), Site::Sphere(b)) => Ok(Complex64::new(sphere_covariance(spec, a, b)?, 0.0)),
        _ => Err(mismatch(a.domain(), b.domain())),
    }
}

/// `E|T(a) - T(b)|^2`.
pub fn increment_between(spec: &PowerSpectrum, a: &Site, b: &Site) -> Result<f64> {
    let aa = covariance_between(spec, a, a)?.re;
    let bb = covariance_between(spec, b, b)?.re;
    let ab = covariance_between(spec, a, b)?.re;
    Ok(aa + bb - 2.0 * ab)
}
