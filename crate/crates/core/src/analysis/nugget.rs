//! Spectrum recovery from covariance values and the realizability verdict
//! for covariances with a jump at the diagonal.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::AliasingWarning;
use crate::group::{Domain, Group};
use crate::irreps::{character, labels_in_band, IrrepLabel};
use crate::quadrature::{haar_quadrature, sphere_quadrature, GroupRule, SphereRule};
use crate::spectrum::SpectrumEntry;
use crate::wigner::legendre_all;

pub const REALIZABILITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredSpectrum {
    pub domain: Domain,
    pub entries: Vec<(IrrepLabel, f64)>,
    /// Largest imaginary part discarded from the recovered weights.
    pub max_imaginary: f64,
    pub aliasing: Option<AliasingWarning>,
}

impl RecoveredSpectrum {
    pub fn alpha(&self, label: IrrepLabel) -> f64 {
        self.entries.iter().find(|(l, _)| *l == label).map_or(0.0, |(_, a)| *a)
    }

    /// `sum d_pi alpha_pi`, the covariance rebuilt at the identity.
    pub fn reconstruction_at_identity(&self) -> f64 {
        self.entries.iter().map(|(l, a)| l.dimension() as f64 * a).sum()
    }

    /// No weight below `-tol`; a negative weight means the input was not a
    /// positive-definite covariance.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        self.entries.iter().all(|(_, a)| *a >= -tol)
    }

    /// Largest `|alpha|` over non-trivial labels.
    pub fn max_nontrivial(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(l, _)| !l.is_trivial())
            .map(|(_, a)| a.abs())
            .fold(0.0, f64::max)
    }
}

/// `alpha_pi = int R(g) conj(chi_pi(g)) dg` for a central covariance given
/// at the rule's nodes.
pub fn spectrum_of_covariance(values: &[Complex64], rule: &GroupRule, labels: &[IrrepLabel]) -> Result<RecoveredSpectrum> {
    if values.len() != rule.len() {
        return Err(Error::InvalidArgument(format!("expected {} covariance values, got {}", rule.len(), values.len())));
    }
    let group = rule.domain().as_group()?;
    let mut entries = Vec::with_capacity(labels.len());
    let mut max_imaginary = 0.0f64;
    for &label in labels {
        label.check_group(group)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((g, v), w) in rule.nodes().iter().zip(values).zip(rule.weights()) {
            acc += v * character(label, g)?.conj() * *w;
        }
        max_imaginary = max_imaginary.max(acc.im.abs());
        entries.push((label, acc.re));
    }
    let requested = labels.iter().map(|l| l.band(group)).max().unwrap_or(0);
    let aliasing = (!group.is_discrete() && requested > rule.band_limit()).then(|| AliasingWarning {
        rule_band: rule.band_limit(),
        requested_band: requested,
        message: format!("quadrature of band {} cannot resolve labels up to band {requested}", rule.band_limit()),
    });
    Ok(RecoveredSpectrum {
        domain: rule.domain(),
        entries,
        max_imaginary,
        aliasing,
    })
}

/// `alpha_l = int Gamma(x, n) P_l(x . n) dx` for a zonal sphere covariance
/// given at the rule's nodes relative to the north pole `n`.
pub fn sphere_spectrum_of_covariance(values: &[f64], rule: &SphereRule, lmax: usize) -> Result<RecoveredSpectrum> {
    if values.len() != rule.len() {
        return Err(Error::InvalidArgument(format!("expected {} covariance values, got {}", rule.len(), values.len())));
    }
    let mut acc = vec![0.0; lmax + 1];
    for ((x, v), w) in rule.nodes().iter().zip(values).zip(rule.weights()) {
        let p = legendre_all(lmax, x.theta().cos());
        for (a, pl) in acc.iter_mut().zip(&p) {
            *a += w * v * pl;
        }
    }
    let aliasing = (lmax > rule.band_limit()).then(|| AliasingWarning {
        rule_band: rule.band_limit(),
        requested_band: lmax,
        message: format!("quadrature of band {} cannot resolve degrees up to {lmax}", rule.band_limit()),
    });
    Ok(RecoveredSpectrum {
        domain: Domain::Sphere,
        entries: acc
            .into_iter()
            .enumerate()
            .map(|(l, a)| (IrrepLabel::RotationDegree(l as u32), a))
            .collect(),
        max_imaginary: 0.0,
        aliasing,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuggetVerdict {
    pub domain: String,
    pub band_limit: usize,
    pub recovered: Vec<SpectrumEntry>,
    pub reconstruction_at_identity: f64,
    pub claimed_at_identity: f64,
    pub off_diagonal: f64,
    pub defect: f64,
    pub realizable: bool,
    pub tolerance: f64,
    pub explanation: String,
}

/// Covariance equal to `variance` on the diagonal and `off_diagonal`
/// everywhere else. On continuous domains the diagonal is a null set for
/// the invariant measure, so the grid covariance carries the off-diagonal
/// value at every node and the diagonal excess shows up as the defect
/// between the claimed and reconstructed value at zero distance. On a
/// finite group the identity has positive mass and stays in the grid.
pub fn nugget_analysis(variance: f64, off_diagonal: f64, domain: Domain, band_limit: usize) -> Result<NuggetVerdict> {
    if band_limit < 1 {
        return Err(Error::InvalidBand { min: 1, got: band_limit });
    }
    if !variance.is_finite() || !off_diagonal.is_finite() {
        return Err(Error::InvalidArgument("covariance values must be finite".into()));
    }
    let recovered = match domain {
        Domain::Group(group) => {
            let rule = haar_quadrature(group, band_limit)?;
            let identity = group.identity();
            let values: Vec<Complex64> = rule
                .nodes()
                .iter()
                .map(|g| {
                    let at_diagonal = group.is_discrete() && g.approx_eq(&identity);
                    Complex64::new(if at_diagonal { variance } else { off_diagonal }, 0.0)
                })
                .collect();
            let label_band = match group {
                Group::Cyclic { order } => order as usize / 2,
                _ => band_limit,
            };
            spectrum_of_covariance(&values, &rule, &labels_in_band(group, label_band)?)?
        }
        Domain::Sphere => {
            let rule = sphere_quadrature(band_limit);
            sphere_spectrum_of_covariance(&vec![off_diagonal; rule.len()], &rule, band_limit)?
        }
    };
    let reconstruction = recovered.reconstruction_at_identity();
    let defect = variance - reconstruction;
    let positive = recovered.is_positive_definite(REALIZABILITY_TOL);
    let realizable = defect.abs() <= REALIZABILITY_TOL && positive;
    let explanation = if realizable {
        "the spectrum recovered from the covariance is non-negative and reproduces the variance; \
         the covariance is continuous and belongs to an isotropic field"
            .to_string()
    } else if defect.abs() > REALIZABILITY_TOL {
        format!(
            "the variance exceeds the continuous part of the covariance by {defect}; the covariance of a \
             measurable isotropic field on a compact homogeneous space is continuous, so no such field has \
             this covariance"
        )
    } else {
        "the recovered spectrum has negative weights, so the covariance is not positive definite".to_string()
    };
    Ok(NuggetVerdict {
        domain: domain.to_string(),
        band_limit,
        recovered: recovered
            .entries
            .iter()
            .map(|(l, a)| SpectrumEntry {
                label: l.index(),
                alpha: *a,
            })
            .collect(),
        reconstruction_at_identity: reconstruction,
        claimed_at_identity: variance,
        off_diagonal,
        defect,
        realizable,
        tolerance: REALIZABILITY_TOL,
        explanation,
    })
}
