//! Deterministic verification suites: orthonormality of the basis, the
//! analysis/synthesis round trip and the projection laws.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::analysis::{Check, TestReport};
use crate::error::Result;
use crate::field::{
    analyze_with, project, project_sphere, AliasingWarning, BasisTable, FieldCoefficients, SeedRecord,
};
use crate::group::{Domain, Group};
use crate::irreps::{labels_in_band, IrrepLabel};
use crate::quadrature::{haar_quadrature, sphere_quadrature, GroupRule, SphereRule};

pub const ORTHONORMALITY_TOL: f64 = 1e-8;
pub const ROUND_TRIP_TOL: f64 = 1e-9;
pub const PARSEVAL_TOL: f64 = 1e-8;
pub const PROJECTION_TOL: f64 = 1e-9;

/// Stream reserved for the auxiliary draws of the deterministic suites
/// (random test fields, sites, translations), disjoint from replicate
/// streams in practice.
pub fn auxiliary_rng(seed: u64, slot: u64) -> rand_chacha::ChaCha8Rng {
    SeedRecord {
        master_seed: seed,
        replicate: u64::MAX - slot,
    }
    .rng()
}

/// Every label of band at most `band`.
pub fn domain_labels(domain: Domain, band: usize) -> Result<Vec<IrrepLabel>> {
    labels_in_band(domain.acting_group(), band)
}

/// Band that covers every label of a finite group.
pub fn full_band(domain: Domain, band: usize) -> usize {
    match domain.acting_group() {
        Group::Cyclic { order } => band.max(order as usize / 2),
        _ => band,
    }
}

/// Complex coefficients with independent standard normal entries on every
/// label of band at most `band`.
pub fn random_coefficients<R: Rng + ?Sized>(domain: Domain, band: usize, rng: &mut R) -> Result<FieldCoefficients> {
    let labels = domain_labels(domain, band)?;
    let mut c = FieldCoefficients::zeros(domain, &labels)?;
    for label in &labels {
        if let Some(block) = c.get_mut(*label) {
            for z in block.iter_mut() {
                *z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            }
        }
    }
    Ok(c)
}

/// An exact quadrature grid on either kind of domain.
pub enum Grid {
    Group(GroupRule),
    Sphere(SphereRule),
}

impl Grid {
    pub fn new(domain: Domain, band: usize) -> Result<Self> {
        Ok(match domain {
            Domain::Group(g) => Grid::Group(haar_quadrature(g, band)?),
            Domain::Sphere => Grid::Sphere(sphere_quadrature(band)),
        })
    }

    pub fn weights(&self) -> &[f64] {
        match self {
            Grid::Group(r) => r.weights(),
            Grid::Sphere(r) => r.weights(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn table(&self, labels: &[IrrepLabel]) -> Result<BasisTable> {
        match self {
            Grid::Group(r) => BasisTable::for_group_rule(r, labels),
            Grid::Sphere(r) => BasisTable::for_sphere_rule(r, labels),
        }
    }

    pub fn analyze(&self, values: &[Complex64], table: &BasisTable) -> Result<(FieldCoefficients, Option<AliasingWarning>)> {
        let a = match self {
            Grid::Group(r) => analyze_with(values, r, table)?,
            Grid::Sphere(r) => analyze_with(values, r, table)?,
        };
        Ok((a.coefficients, a.aliasing))
    }

    pub fn l2_norm_sq(&self, values: &[Complex64]) -> f64 {
        match self {
            Grid::Group(r) => r.l2_norm_sq(values),
            Grid::Sphere(r) => r.l2_norm_sq(values),
        }
    }

    /// Projection in kernel form (character or zonal).
    pub fn project(&self, values: &[Complex64], label: IrrepLabel) -> Result<(Vec<Complex64>, Option<AliasingWarning>)> {
        match self {
            Grid::Group(r) => project(values, r, label),
            Grid::Sphere(r) => project_sphere(values, r, label),
        }
    }
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// All pairwise inner products of the normalized basis on labels of band
/// at most `band`, by the quadrature of band `quadrature_band`, match the
/// identity.
pub fn orthonormality_test(domain: Domain, band: usize, quadrature_band: usize) -> Result<TestReport> {
    let band = full_band(domain, band);
    let grid = Grid::new(domain, quadrature_band.max(1))?;
    let table = grid.table(&domain_labels(domain, band)?)?;
    let gram = table.gram(grid.weights())?;
    let worst = gram
        .indexed_iter()
        .map(|((i, j), z)| (z - if i == j { 1.0 } else { 0.0 }).norm())
        .fold(0.0, f64::max);
    let check = Check::exact(format!("max |G - I| over {} functions", gram.nrows()), worst, 0.0, ORTHONORMALITY_TOL);
    Ok(TestReport::from_checks("orthonormality", 0, 0, vec![check]))
}

/// Synthesizes a random field of band `band` on the grid of band
/// `quadrature_band` and analyzes it back. A grid below the field's band
/// aliases, which the report names.
pub fn round_trip_test(domain: Domain, band: usize, quadrature_band: usize, seed: u64) -> Result<TestReport> {
    let band = full_band(domain, band);
    let coeffs = random_coefficients(domain, band, &mut auxiliary_rng(seed, 0))?;
    let grid = Grid::new(domain, quadrature_band.max(1))?;
    let table = grid.table(&coeffs.labels())?;
    let values = table.synthesize(&coeffs)?;
    let (back, aliasing) = grid.analyze(&values, &table)?;
    let checks = vec![
        Check::exact("coefficient_error", back.max_abs_diff(&coeffs), 0.0, ROUND_TRIP_TOL),
        Check::exact("parseval", grid.l2_norm_sq(&values), coeffs.parseval_norm_sq(), PARSEVAL_TOL),
    ];
    let mut report = TestReport::from_checks("round_trip", seed, 0, checks);
    if let Some(w) = aliasing {
        report = report.fail(format!("aliasing: {}", w.message));
    }
    Ok(report)
}

/// Idempotence, annihilation by every other label, and agreement of the
/// kernel form with analysis followed by synthesis, for every label in band.
/// The kernel form costs a double sum over the grid per label pair, so this
/// suite is meant for moderate bands.
pub fn projection_test(domain: Domain, band: usize, quadrature_band: usize, seed: u64) -> Result<TestReport> {
    let band = full_band(domain, band);
    let coeffs = random_coefficients(domain, band, &mut auxiliary_rng(seed, 1))?;
    let labels = coeffs.labels();
    let grid = Grid::new(domain, quadrature_band.max(1))?;
    let values = grid.table(&labels)?.synthesize(&coeffs)?;
    let (mut idem, mut annihilation, mut forms) = (0.0f64, 0.0f64, 0.0f64);
    let mut aliasing = None;
    for &label in &labels {
        let (p, warn) = grid.project(&values, label)?;
        aliasing = aliasing.or(warn);
        idem = idem.max(max_abs_diff(&grid.project(&p, label)?.0, &p));
        for other in labels.iter().filter(|o| **o != label) {
            annihilation = annihilation.max(max_abs(&grid.project(&p, *other)?.0));
        }
        let single = grid.table(&[label])?;
        let (c, _) = grid.analyze(&values, &single)?;
        forms = forms.max(max_abs_diff(&single.synthesize(&c)?, &p));
    }
    let checks = vec![
        Check::exact("idempotence", idem, 0.0, PROJECTION_TOL),
        Check::exact("cross_label_annihilation", annihilation, 0.0, PROJECTION_TOL),
        Check::exact("kernel_vs_coefficient_form", forms, 0.0, PROJECTION_TOL),
    ];
    let mut report = TestReport::from_checks("projection", seed, 0, checks);
    if let Some(w) = aliasing {
        report = report.fail(format!("aliasing: {}", w.message));
    }
    Ok(report)
}
