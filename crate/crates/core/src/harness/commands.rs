//! The five commands. Each validates its config, writes payload files and
//! reports per-test outcomes; the caller adds the manifest.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Suite};
use super::manifest::TestOutcome;
use super::suites::{auxiliary_rng, orthonormality_test, projection_test, random_coefficients, round_trip_test, Grid};
use super::{HarnessError, Outcome, OutputDir};
use crate::analysis::{
    character_field, continuity_modulus, convergence_curve, covariance_report, isotropy_functional_test,
    lifted_modulus, nugget_analysis, sampler_isotropy_test, sphere_modulus, uncorrelatedness_suite,
    variance_identity_test, ModulusCurve, MonteCarlo, SearchGrid, Site, TestReport, SE_BAND,
};
use crate::field::{sample_gaussian, FieldCoefficients, Structure};
use crate::group::{Domain, GroupElement, SpherePoint};
use crate::irreps::IrrepLabel;
use crate::spectrum::PowerSpectrum;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
/// Sphere and lifted-group moduli must agree this closely.
pub const LIFT_TOL: f64 = 1e-9;
const RANDOM_SITES: usize = 5;

fn base_site(domain: Domain) -> Site {
    match domain {
        Domain::Group(g) => Site::Group(g.identity()),
        Domain::Sphere => Site::Sphere(SpherePoint::north_pole()),
    }
}

fn random_site<R: rand::Rng + ?Sized>(domain: Domain, rng: &mut R) -> Site {
    match domain {
        Domain::Group(g) => Site::Group(GroupElement::random(g, rng)),
        Domain::Sphere => Site::Sphere(SpherePoint::random(rng)),
    }
}

fn monte_carlo(cfg: &ExperimentConfig) -> MonteCarlo {
    MonteCarlo::new(cfg.seed, cfg.replicates).with_structure(cfg.structure)
}

fn outcome_of(r: &TestReport) -> TestOutcome {
    TestOutcome {
        test: r.test.clone(),
        pass: r.pass,
    }
}

fn numeric(x: f64) -> String {
    // shortest round-trip representation
    format!("{x:?}")
}

/// Machine-readable `verify` result. Holds no timestamps or worker counts,
/// so identical configs give identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub domain: String,
    pub band_limit: usize,
    pub quadrature_band: usize,
    pub seed: u64,
    pub replicates: usize,
    pub structure: Structure,
    pub pass: bool,
    pub tests: Vec<TestReport>,
}

/// Test functions for the translated-functional check: the character of
/// the first nontrivial label (degree-one zonal function on the sphere)
/// and a random band-limited function.
fn isotropy_functions<R: rand::Rng + ?Sized>(domain: Domain, band: usize, rng: &mut R) -> Result<Vec<FieldCoefficients>, HarnessError> {
    let first = match domain {
        Domain::Group(g) => character_field(domain, IrrepLabel::from_index(g, 1)?)?,
        Domain::Sphere => {
            let l1 = IrrepLabel::RotationDegree(1);
            let mut c = FieldCoefficients::zeros(domain, &[IrrepLabel::RotationDegree(0), l1])?;
            if let Some(block) = c.get_mut(l1) {
                // a_{1,0}: the middle entry of the degree-one block
                if let Some(z) = block.iter_mut().nth(1) {
                    *z = Complex64::new(1.0, 0.0);
                }
            }
            c
        }
    };
    Ok(vec![first, random_coefficients(domain, band, rng)?])
}

/// Runs the configured suites and writes `report.json` (plus
/// `convergence.csv` when that suite runs). Exits 1 on any failure.
pub fn cmd_verify(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    let mut suites: Vec<Suite> = Vec::new();
    for s in &cfg.suites {
        if !suites.contains(s) {
            suites.push(*s);
        }
    }
    cfg.validate(suites.iter().any(|s| s.is_statistical()))?;
    let spec = cfg.spectrum()?;
    let domain = spec.domain();
    let band = cfg.band_limit.max(1);
    let quad = cfg.quadrature_band();
    let mc = monte_carlo(cfg);
    let mut rng = auxiliary_rng(cfg.seed, 2);
    let sites: Vec<Site> = (0..RANDOM_SITES).map(|_| random_site(domain, &mut rng)).collect();
    let h = GroupElement::random(domain.acting_group(), &mut rng);
    let functions = isotropy_functions(domain, band, &mut rng)?;

    let mut tests = Vec::new();
    for suite in suites {
        match suite {
            Suite::Orthonormality => tests.push(orthonormality_test(domain, band, quad)?),
            Suite::RoundTrip => tests.push(round_trip_test(domain, band, quad, cfg.seed)?),
            Suite::Projection => tests.push(projection_test(domain, band, quad, cfg.seed)?),
            Suite::Variance => tests.push(variance_identity_test(&spec, &mc, &base_site(domain))?),
            Suite::Isotropy => {
                tests.push(sampler_isotropy_test(&spec, &mc, &sites, &h)?);
                tests.push(isotropy_functional_test(&spec, &mc, &h, &functions)?);
            }
            Suite::Uncorrelatedness => {
                tests.push(uncorrelatedness_suite(&spec, &mc, &spec.labels(), &sites[0], &sites[1])?);
            }
            Suite::Convergence => {
                let prefixes: Vec<usize> = (0..=spec.labels().len()).collect();
                let conv = convergence_curve(&spec, &mc, &prefixes, &sites[0])?;
                let mut csv = String::from("n,analytic,empirical,se,integrated,integrated_se\n");
                for r in &conv.rows {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{}",
                        r.n,
                        numeric(r.analytic),
                        numeric(r.empirical),
                        numeric(r.se),
                        numeric(r.integrated),
                        numeric(r.integrated_se)
                    );
                }
                out.write("convergence.csv", csv)?;
                tests.push(conv.report);
            }
        }
    }
    let report = VerifyReport {
        schema_version: REPORT_SCHEMA_VERSION,
        domain: domain.to_string(),
        band_limit: cfg.band_limit,
        quadrature_band: quad,
        seed: cfg.seed,
        replicates: cfg.replicates,
        structure: cfg.structure,
        pass: tests.iter().all(|t| t.pass),
        tests,
    };
    out.write_json("report.json", &report)?;
    Ok(Outcome {
        tests: report.tests.iter().map(outcome_of).collect(),
    })
}

/// Draws the configured replicates and writes `spectrum.json`,
/// `sample_0.json` (coefficients of replicate 0), `replicates.csv` (value
/// at the base point and squared norm per replicate) and `covariance.csv`
/// (empirical against analytic covariance at the base point and random
/// sites). An under-resolving quadrature grid is a numerical-validity error.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    cfg.validate(true)?;
    let spec = cfg.spectrum()?;
    let domain = spec.domain();
    let first = sample_gaussian(&spec, cfg.seed, 0, cfg.structure)?;
    check_resolution(first.coefficients(), cfg.quadrature_band())?;

    let mc = monte_carlo(cfg);
    let base = base_site(domain);
    let mut rng = auxiliary_rng(cfg.seed, 2);
    let mut sites = vec![base.clone()];
    sites.extend((1..RANDOM_SITES).map(|_| random_site(domain, &mut rng)));

    let table = crate::analysis::site_table(domain, &spec.labels(), std::slice::from_ref(&base))?;
    let rows = mc.map_samples(&spec, |s| {
        let v = table.synthesize_flat(&s.coefficients().flatten())[0];
        Ok((s.replicate(), v, s.coefficients().parseval_norm_sq()))
    })?;
    let mut csv = String::from("replicate,value_re,value_im,norm_sq\n");
    for (r, v, n) in rows {
        let _ = writeln!(csv, "{r},{},{},{}", numeric(v.re), numeric(v.im), numeric(n));
    }
    let cov = covariance_report(&spec, &mc, &sites)?;
    let test = cov.test_report(SE_BAND);

    out.write_json("spectrum.json", &spec.to_file())?;
    out.write_json("sample_0.json", &first.coefficients().to_file())?;
    out.write("replicates.csv", csv)?;
    out.write("covariance.csv", cov.to_csv())?;
    out.write_json("covariance_test.json", &test)?;
    Ok(Outcome {
        tests: vec![outcome_of(&test)],
    })
}

fn check_resolution(coeffs: &FieldCoefficients, quadrature_band: usize) -> Result<(), HarnessError> {
    let grid = Grid::new(coeffs.domain(), quadrature_band.max(1))?;
    let table = grid.table(&coeffs.labels())?;
    let (_, aliasing) = grid.analyze(&table.synthesize(coeffs)?, &table)?;
    match aliasing {
        Some(w) => Err(HarnessError::Numerical(w.message)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ModulusSummary {
    schema_version: u32,
    domain: String,
    total_variance: f64,
    deltas: Vec<f64>,
    modulus: Vec<f64>,
    nondecreasing: bool,
    within_variance_bound: bool,
    /// Smallest over largest radius; a continuous field drives it to zero.
    ratio_first_last: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sphere_vs_lift_max_diff: Option<f64>,
    pass: bool,
}

/// Writes `modulus.csv` and `modulus_summary.json`; on the sphere also
/// `lifted_modulus.csv` for the field lifted to SO(3) at the north pole.
pub fn cmd_modulus(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    cfg.validate(false)?;
    let spec = cfg.spectrum()?;
    let mut deltas = cfg.deltas.clone();
    if deltas.is_empty() || deltas.iter().any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(HarnessError::Config("deltas must be positive and finite".into()));
    }
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let grid = SearchGrid::default();
    let (curve, lifted) = match spec.domain() {
        Domain::Group(_) => (continuity_modulus(&spec, &deltas, &grid)?, None),
        Domain::Sphere => (
            sphere_modulus(&spec, &deltas, &grid)?,
            Some(lifted_modulus(&spec, &SpherePoint::north_pole(), &deltas, &grid)?),
        ),
    };
    let mut tests = vec![
        TestOutcome {
            test: "modulus_nondecreasing".into(),
            pass: curve.is_nondecreasing(),
        },
        TestOutcome {
            test: "modulus_variance_bound".into(),
            pass: curve.within_variance_bound(),
        },
    ];
    let lift_diff = lifted.as_ref().map(|l: &ModulusCurve| curve.max_abs_diff(l));
    if let Some(d) = lift_diff {
        tests.push(TestOutcome {
            test: "sphere_vs_lift".into(),
            pass: d < LIFT_TOL,
        });
    }
    let values = curve.values();
    let last = values.last().copied().unwrap_or(0.0);
    let summary = ModulusSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        domain: spec.domain().to_string(),
        total_variance: spec.total_variance(),
        deltas: curve.deltas(),
        ratio_first_last: if last > 0.0 { values[0] / last } else { 0.0 },
        modulus: values,
        nondecreasing: tests[0].pass,
        within_variance_bound: tests[1].pass,
        sphere_vs_lift_max_diff: lift_diff,
        pass: tests.iter().all(|t| t.pass),
    };
    out.write("modulus.csv", curve.to_csv())?;
    if let Some(l) = &lifted {
        out.write("lifted_modulus.csv", l.to_csv())?;
    }
    out.write_json("modulus_summary.json", &summary)?;
    Ok(Outcome {
        tests,
    })
}

/// Writes `nugget.json` for the configured variance and off-diagonal value.
/// The verdict is a finding, not a test, so it never fails the run.
pub fn cmd_nugget(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    cfg.validate(false)?;
    let nugget = cfg
        .nugget
        .ok_or_else(|| HarnessError::Config("nugget command needs a `nugget` section".into()))?;
    let domain = cfg.domain()?;
    let verdict = nugget_analysis(nugget.variance, nugget.off_diagonal, domain, cfg.band_limit.max(1))?;
    out.write_json("nugget.json", &verdict)?;
    Ok(Outcome {
        tests: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct TransformSummary {
    schema_version: u32,
    domain: String,
    quadrature_band: usize,
    nodes: usize,
    max_coefficient_error: f64,
    pass: bool,
}

/// Coefficients (from `coefficients` or replicate 0 of the spectrum) are
/// synthesized on the quadrature grid (`grid.csv`) and analyzed back
/// (`transformed.json`). Aliasing is a numerical-validity error.
pub fn cmd_transform(cfg: &ExperimentConfig, out: &mut OutputDir) -> Result<Outcome, HarnessError> {
    cfg.validate(false)?;
    let domain = cfg.domain()?;
    let coeffs = match &cfg.coefficients {
        Some(path) => {
            let c = FieldCoefficients::load(path)
                .map_err(|e| HarnessError::Config(format!("coefficient file {}: {e}", path.display())))?;
            if c.domain() != domain {
                return Err(HarnessError::Config(format!(
                    "coefficient file is for {}, config is for {domain}",
                    c.domain()
                )));
            }
            c
        }
        None => {
            let spec: PowerSpectrum = cfg.spectrum()?;
            sample_gaussian(&spec, cfg.seed, 0, cfg.structure)?.coefficients().clone()
        }
    };
    let quad = cfg.quadrature_band();
    let grid = Grid::new(domain, quad.max(1))?;
    let table = grid.table(&coeffs.labels())?;
    let values = table.synthesize(&coeffs)?;
    let (back, aliasing) = grid.analyze(&values, &table)?;
    if let Some(w) = aliasing {
        return Err(HarnessError::Numerical(w.message));
    }
    let err = back.max_abs_diff(&coeffs);
    let summary = TransformSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        domain: domain.to_string(),
        quadrature_band: quad,
        nodes: grid.len(),
        max_coefficient_error: err,
        pass: err < super::ROUND_TRIP_TOL,
    };
    let mut csv = String::from("node,value_re,value_im\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(csv, "{k},{},{}", numeric(v.re), numeric(v.im));
    }
    out.write("grid.csv", csv)?;
    out.write_json("transformed.json", &back.to_file())?;
    out.write_json("transform_summary.json", &summary)?;
    Ok(Outcome {
        tests: vec![TestOutcome {
            test: "transform_round_trip".into(),
            pass: summary.pass,
        }],
    })
}
