//! Power spectra and the isotropic covariances they define.
//!
//! A spectrum assigns a weight `alpha >= 0` to each irrep label and defines
//! the central covariance `R(g) = sum alpha_pi chi_pi(g)`, whose value at the
//! identity is the total variance `sum d_pi alpha_pi`. On the sphere the same
//! weights give `Gamma(x, y) = sum (2l + 1) alpha_l P_l(cos d(x, y))`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::group::{Domain, Group, GroupElement, SpherePoint};
use crate::irreps::{character, labels_in_band, IrrepLabel};
use crate::wigner::{legendre_all, WignerTable};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct PowerSpectrum {
    domain: Domain,
    band_limit: usize,
    /// Every in-band label in enumeration order, zero weights included.
    entries: Vec<(IrrepLabel, f64)>,
}

impl PowerSpectrum {
    /// Spectrum of the given band. Labels not listed get weight zero;
    /// listed labels must lie in the band.
    pub fn new(domain: Domain, band_limit: usize, weights: impl IntoIterator<Item = (IrrepLabel, f64)>) -> Result<Self> {
        let group = domain.acting_group();
        let mut entries: Vec<(IrrepLabel, f64)> =
            labels_in_band(group, band_limit)?.into_iter().map(|l| (l, 0.0)).collect();
        for (label, alpha) in weights {
            label.check_group(group)?;
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(Error::InvalidSpectrum(format!("weight {alpha} at {label} is not a finite non-negative number")));
            }
            let slot = entries
                .iter_mut()
                .find(|(l, _)| *l == label)
                .ok_or_else(|| Error::InvalidSpectrum(format!("{label} lies outside band {band_limit}")))?;
            slot.1 = alpha;
        }
        Ok(PowerSpectrum {
            domain,
            band_limit,
            entries,
        })
    }

    /// Band inferred as the largest listed label band.
    pub fn from_weights(domain: Domain, weights: Vec<(IrrepLabel, f64)>) -> Result<Self> {
        let group = domain.acting_group();
        let band = weights.iter().map(|(l, _)| l.band(group)).max().unwrap_or(0);
        Self::new(domain, band, weights)
    }

    pub fn zero(domain: Domain, band_limit: usize) -> Result<Self> {
        Self::new(domain, band_limit, std::iter::empty())
    }

    /// Weights `f(band(label))` for every in-band label.
    pub fn from_profile(domain: Domain, band_limit: usize, profile: impl Fn(usize) -> f64) -> Result<Self> {
        let group = domain.acting_group();
        let weights: Vec<(IrrepLabel, f64)> = labels_in_band(group, band_limit)?
            .into_iter()
            .map(|l| (l, profile(l.band(group))))
            .collect();
        Self::new(domain, band_limit, weights)
    }

    /// `alpha = r^band`
    pub fn geometric(domain: Domain, band_limit: usize, ratio: f64) -> Result<Self> {
        if ratio.is_nan() || ratio < 0.0 {
            return Err(Error::InvalidSpectrum(format!("geometric ratio {ratio} must be non-negative")));
        }
        Self::from_profile(domain, band_limit, |b| ratio.powi(b as i32))
    }

    /// Unit weight at a single band.
    pub fn delta(domain: Domain, band_limit: usize, at: usize) -> Result<Self> {
        if at > band_limit {
            return Err(Error::InvalidSpectrum(format!("delta at {at} lies outside band {band_limit}")));
        }
        Self::from_profile(domain, band_limit, |b| if b == at { 1.0 } else { 0.0 })
    }

    /// `alpha = (1 + band)^(-p)`
    pub fn polynomial(domain: Domain, band_limit: usize, power: f64) -> Result<Self> {
        Self::from_profile(domain, band_limit, |b| (1.0 + b as f64).powf(-power))
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn group(&self) -> Group {
        self.domain.acting_group()
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn entries(&self) -> &[(IrrepLabel, f64)] {
        &self.entries
    }

    pub fn labels(&self) -> Vec<IrrepLabel> {
        self.entries.iter().map(|(l, _)| *l).collect()
    }

    pub fn alpha(&self, label: IrrepLabel) -> f64 {
        self.entries.iter().find(|(l, _)| *l == label).map_or(0.0, |(_, a)| *a)
    }

    /// Largest band carrying a non-zero weight.
    pub fn effective_band(&self) -> usize {
        let group = self.group();
        self.entries.iter().filter(|(_, a)| *a > 0.0).map(|(l, _)| l.band(group)).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, a)| *a == 0.0)
    }

    /// `sum d_pi alpha_pi`
    pub fn total_variance(&self) -> f64 {
        self.entries.iter().map(|(l, a)| l.dimension() as f64 * a).sum()
    }

    /// Variance carried beyond the first `n` labels of the enumeration.
    pub fn tail_variance(&self, n: usize) -> f64 {
        self.entries.iter().skip(n).map(|(l, a)| l.dimension() as f64 * a).sum()
    }

    /// True when conjugate labels carry equal weight, the condition for a
    /// real-valued field with this spectrum.
    pub fn is_conjugation_symmetric(&self) -> bool {
        let group = self.group();
        self.entries
            .iter()
            .all(|(l, a)| (self.alpha(l.conjugate(group)) - a).abs() <= 1e-15 * a.abs().max(1.0))
    }

    pub fn to_file(&self) -> SpectrumFile {
        SpectrumFile {
            schema_version: SCHEMA_VERSION,
            group: self.domain.tag().to_string(),
            n: self.domain.order(),
            band_limit: Some(self.band_limit),
            entries: self
                .entries
                .iter()
                .map(|(l, a)| SpectrumEntry {
                    label: l.index(),
                    alpha: *a,
                })
                .collect(),
        }
    }

    pub fn from_file(file: &SpectrumFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidSpectrum(format!("unsupported schema_version {}", file.schema_version)));
        }
        let domain = Domain::from_tag(&file.group, file.n)?;
        let group = domain.acting_group();
        let weights = file
            .entries
            .iter()
            .map(|e| Ok((IrrepLabel::from_index(group, e.label)?, e.alpha)))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = std::collections::HashSet::new();
        for (l, _) in &weights {
            if !seen.insert(*l) {
                return Err(Error::InvalidSpectrum(format!("duplicate entry for {l}")));
            }
        }
        match file.band_limit {
            Some(b) => Self::new(domain, b, weights),
            None => Self::from_weights(domain, weights),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: SpectrumFile = serde_json::from_str(&text)?;
        Self::from_file(&file)
    }
}

/// On-disk spectrum document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumFile {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub group: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_limit: Option<usize>,
    pub entries: Vec<SpectrumEntry>,
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumEntry {
    pub label: i64,
    pub alpha: f64,
}

/// `R(g) = sum alpha_pi chi_pi(g)`
pub fn covariance_from_spectrum(spec: &PowerSpectrum, g: &GroupElement) -> Result<Complex64> {
    let group = spec.domain.as_group()?;
    if g.group() != group {
        return Err(mismatch(group, g.group()));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (label, alpha) in &spec.entries {
        if *alpha != 0.0 {
            acc += character(*label, g)? * *alpha;
        }
    }
    Ok(acc)
}

/// `Gamma(x, y) = sum (2l + 1) alpha_l P_l(cos d(x, y))` for sphere spectra.
pub fn sphere_covariance(spec: &PowerSpectrum, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    if spec.domain != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, spec.domain));
    }
    let cos_d = x.to_vector().dot(&y.to_vector()).clamp(-1.0, 1.0);
    Ok(legendre_series(spec, cos_d))
}

pub(crate) fn legendre_series(spec: &PowerSpectrum, cos_d: f64) -> f64 {
    let p = legendre_all(spec.band_limit, cos_d);
    spec.entries
        .iter()
        .map(|(l, a)| (2 * l.index() + 1) as f64 * a * p[l.index() as usize])
        .sum()
}

/// Covariance `E T(g x) T(x)` of the field lifted to SO(3) at base point
/// `x`, computed from `D^l_{00}` of `g_x^{-1} g g_x` where `g_x` carries the
/// north pole to `x`.
pub fn lifted_covariance(spec: &PowerSpectrum, base: &SpherePoint, g: &GroupElement) -> Result<f64> {
    if spec.domain != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, spec.domain));
    }
    let gx = base.lifting_rotation();
    let rel = gx.inv().mul(g)?.mul(&gx)?;
    let (_, beta, _) = rel.as_euler().ok_or_else(|| mismatch(Group::Rotation, g.group()))?;
    let table = WignerTable::new(spec.band_limit, beta);
    Ok(spec
        .entries
        .iter()
        .map(|(l, a)| {
            let l = l.index() as usize;
            (2 * l + 1) as f64 * a * table.get(l, 0, 0)
        })
        .sum())
}
