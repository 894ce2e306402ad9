//! Monte Carlo checks of the sampler against second-moment structure and of
//! translation invariance in law.

use std::fmt::Write as _;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{covariance_between, site_table, Check, MonteCarlo, Site, TestReport, MIN_REPLICATES, SE_BAND, Z_LIMIT};
use crate::error::{mismatch, Error, Result};
use crate::field::{BasisTable, FieldCoefficients};
use crate::group::{Domain, GroupElement};
use crate::irreps::IrrepLabel;
use crate::quadrature::{haar_quadrature, sphere_quadrature};
use crate::spectrum::PowerSpectrum;
use crate::stats::{ComplexEstimate, MeanEstimate};

fn translate(h: &GroupElement, site: &Site) -> Result<Site> {
    Ok(match site {
        Site::Group(g) => Site::Group(h.mul(g)?),
        Site::Sphere(x) => Site::Sphere(h.act(x)?),
    })
}

/// Translating by the identity must be a no-op bit for bit, so it skips the
/// group product (whose Euler round trip is exact only to rounding).
fn translate_all(h: &GroupElement, sites: &[Site]) -> Result<Vec<Site>> {
    if h.norm() == 0.0 {
        return Ok(sites.to_vec());
    }
    sites.iter().map(|s| translate(h, s)).collect()
}

fn check_sites(spec: &PowerSpectrum, sites: &[Site]) -> Result<()> {
    for s in sites {
        if s.domain() != spec.domain() {
            return Err(mismatch(spec.domain(), s.domain()));
        }
    }
    Ok(())
}

fn estimate_columns(rows: &[Vec<f64>]) -> Vec<MeanEstimate> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|k| {
            let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            MeanEstimate::from_samples(&col)
        })
        .collect()
}

/// `E|T(x)|^2 = sum d_pi alpha_pi`, within 3 standard errors.
pub fn variance_identity_test(spec: &PowerSpectrum, mc: &MonteCarlo, site: &Site) -> Result<TestReport> {
    check_sites(spec, std::slice::from_ref(site))?;
    let table = site_table(spec.domain(), &spec.labels(), std::slice::from_ref(site))?;
    let values = mc.map_samples(spec, |s| Ok(table.synthesize_flat(&s.coefficients().flatten())[0].norm_sqr()))?;
    let est = MeanEstimate::from_samples(&values);
    let check = Check::from_estimate("variance", &est, spec.total_variance(), SE_BAND);
    Ok(TestReport::from_checks("variance_identity", mc.seed, mc.replicates, vec![check]))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEntry {
    pub i: usize,
    pub j: usize,
    pub empirical: [f64; 2],
    pub se: [f64; 2],
    pub analytic: Option<[f64; 2]>,
    pub z: f64,
}

/// Empirical `E T(x_i) conj(T(x_j))` with standard errors and the analytic
/// covariance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub entries: Vec<CovarianceEntry>,
    pub seed: u64,
    pub replicates: usize,
}

impl CovarianceReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,empirical_re,empirical_im,se_re,se_im,analytic_re,analytic_im,z\n");
        for e in &self.entries {
            let (ar, ai) = e.analytic.map_or((f64::NAN, f64::NAN), |a| (a[0], a[1]));
            let _ = writeln!(
                s,
                "{},{},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                e.i, e.j, e.empirical[0], e.empirical[1], e.se[0], e.se[1], ar, ai, e.z
            );
        }
        s
    }

    /// Pass iff every entry lies within `limit` standard errors.
    pub fn test_report(&self, limit: f64) -> TestReport {
        let mut checks = Vec::new();
        for e in &self.entries {
            let Some(a) = e.analytic else { continue };
            for (part, k) in [("re", 0), ("im", 1)] {
                let est = MeanEstimate {
                    mean: e.empirical[k],
                    se: e.se[k],
                    n: self.replicates,
                };
                checks.push(Check::from_estimate(format!("cov[{},{}].{part}", e.i, e.j), &est, a[k], limit));
            }
        }
        TestReport::from_checks("covariance", self.seed, self.replicates, checks)
    }
}

fn site_values(spec: &PowerSpectrum, mc: &MonteCarlo, table: &BasisTable) -> Result<Vec<Vec<Complex64>>> {
    mc.map_samples(spec, |s| Ok(table.synthesize_flat(&s.coefficients().flatten())))
}

pub fn covariance_report(spec: &PowerSpectrum, mc: &MonteCarlo, sites: &[Site]) -> Result<CovarianceReport> {
    check_sites(spec, sites)?;
    let table = site_table(spec.domain(), &spec.labels(), sites)?;
    let values = site_values(spec, mc, &table)?;
    let mut entries = Vec::new();
    for i in 0..sites.len() {
        for j in i..sites.len() {
            let products: Vec<Complex64> = values.iter().map(|v| v[i] * v[j].conj()).collect();
            let est = ComplexEstimate::from_samples(&products);
            let analytic = covariance_between(spec, &sites[i], &sites[j])?;
            entries.push(CovarianceEntry {
                i,
                j,
                empirical: [est.re.mean, est.im.mean],
                se: [est.re.se, est.im.se],
                analytic: Some([analytic.re, analytic.im]),
                z: est.max_abs_z(analytic),
            });
        }
    }
    Ok(CovarianceReport {
        entries,
        seed: mc.seed,
        replicates: mc.replicates,
    })
}

/// Compares the empirical covariance matrices of `(T(x_1), ..., T(x_k))`
/// and `(T(h x_1), ..., T(h x_k))` through paired per-replicate differences.
pub fn sampler_isotropy_test(spec: &PowerSpectrum, mc: &MonteCarlo, sites: &[Site], h: &GroupElement) -> Result<TestReport> {
    check_sites(spec, sites)?;
    if h.group() != spec.domain().acting_group() {
        return Err(mismatch(spec.domain().acting_group(), h.group()));
    }
    let mut all = sites.to_vec();
    all.extend(translate_all(h, sites)?);
    let table = site_table(spec.domain(), &spec.labels(), &all)?;
    let k = sites.len();
    let rows = mc.map_samples(spec, |s| {
        let v = table.synthesize_flat(&s.coefficients().flatten());
        let mut row = Vec::with_capacity(k * (k + 1));
        for i in 0..k {
            for j in i..k {
                let d = v[i] * v[j].conj() - v[k + i] * v[k + j].conj();
                row.push(d.re);
                row.push(d.im);
            }
        }
        Ok(row)
    })?;
    let estimates = estimate_columns(&rows);
    let mut checks = Vec::with_capacity(estimates.len());
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            for part in ["re", "im"] {
                checks.push(Check::from_estimate(format!("cov[{i},{j}].{part}"), &estimates[idx], 0.0, Z_LIMIT));
                idx += 1;
            }
        }
    }
    Ok(TestReport::from_checks("sampler_isotropy", mc.seed, mc.replicates, checks))
}

/// Empirical `E T^pi(a) conj(T^pi'(b))` for every ordered pair of distinct
/// labels in `labels`; each must vanish within `|z| < 4`.
pub fn uncorrelatedness_suite(spec: &PowerSpectrum, mc: &MonteCarlo, labels: &[IrrepLabel], a: &Site, b: &Site) -> Result<TestReport> {
    let pairs: Vec<(IrrepLabel, IrrepLabel)> = labels
        .iter()
        .flat_map(|p| labels.iter().filter(move |q| *q != p).map(move |q| (*p, *q)))
        .collect();
    uncorrelated_pairs(spec, mc, &pairs, a, b)
}

pub fn uncorrelatedness_test(spec: &PowerSpectrum, mc: &MonteCarlo, pair: (IrrepLabel, IrrepLabel), points: (&Site, &Site)) -> Result<TestReport> {
    if pair.0 == pair.1 {
        return Err(Error::InvalidArgument("uncorrelatedness needs two distinct labels".into()));
    }
    uncorrelated_pairs(spec, mc, &[pair], points.0, points.1)
}

fn uncorrelated_pairs(spec: &PowerSpectrum, mc: &MonteCarlo, pairs: &[(IrrepLabel, IrrepLabel)], a: &Site, b: &Site) -> Result<TestReport> {
    check_sites(spec, &[a.clone(), b.clone()])?;
    let labels = spec.labels();
    let position = |l: IrrepLabel| {
        labels
            .iter()
            .position(|x| *x == l)
            .ok_or_else(|| Error::InvalidLabel(format!("{l} is not in the spectrum's band")))
    };
    let index_pairs = pairs
        .iter()
        .map(|(p, q)| Ok((position(*p)?, position(*q)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = site_table(spec.domain(), &labels, &[a.clone(), b.clone()])?;
    let rows = mc.map_samples(spec, |s| {
        let comps = table.component_values(&s.coefficients().flatten());
        let mut row = Vec::with_capacity(2 * index_pairs.len());
        for (p, q) in &index_pairs {
            let z = comps[0][*p] * comps[1][*q].conj();
            row.push(z.re);
            row.push(z.im);
        }
        Ok(row)
    })?;
    let estimates = estimate_columns(&rows);
    let mut checks = Vec::new();
    for (k, (p, q)) in pairs.iter().enumerate() {
        checks.push(Check::from_estimate(format!("({p},{q}).re"), &estimates[2 * k], 0.0, Z_LIMIT));
        checks.push(Check::from_estimate(format!("({p},{q}).im"), &estimates[2 * k + 1], 0.0, Z_LIMIT));
    }
    Ok(TestReport::from_checks("uncorrelatedness", mc.seed, mc.replicates, checks))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub se: f64,
    pub integrated: f64,
    pub integrated_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub report: TestReport,
}

/// Residual second moments of the partial sums over the first `n` labels:
/// at a fixed point, `E|T(x) - S_n(x)|^2`, and integrated,
/// `E int |T - S_n|^2` by exact quadrature. Both are compared with the
/// analytic tail within 3 standard errors and against each other through
/// paired differences.
pub fn convergence_curve(spec: &PowerSpectrum, mc: &MonteCarlo, prefixes: &[usize], site: &Site) -> Result<ConvergenceReport> {
    check_sites(spec, std::slice::from_ref(site))?;
    let labels = spec.labels();
    if let Some(n) = prefixes.iter().find(|n| **n > labels.len()) {
        return Err(Error::InvalidArgument(format!("prefix {n} exceeds the {} in-band labels", labels.len())));
    }
    let point = site_table(spec.domain(), &labels, std::slice::from_ref(site))?;
    let band = spec.band_limit().max(1);
    let (grid, weights) = match spec.domain() {
        Domain::Group(group) => {
            let rule = haar_quadrature(group, band)?;
            (BasisTable::for_group_rule(&rule, &labels)?, rule.weights().to_vec())
        }
        Domain::Sphere => {
            let rule = sphere_quadrature(band);
            (BasisTable::for_sphere_rule(&rule, &labels)?, rule.weights().to_vec())
        }
    };
    let tail = |comps: &[Complex64], n: usize| -> Complex64 { comps[n..].iter().sum() };
    let rows = mc.map_samples(spec, |s| {
        let flat = s.coefficients().flatten();
        let at_point = &point.component_values(&flat)[0];
        let on_grid = grid.component_values(&flat);
        let mut row = Vec::with_capacity(3 * prefixes.len());
        for &n in prefixes {
            let fixed = tail(at_point, n).norm_sqr();
            let integrated: f64 = on_grid.iter().zip(&weights).map(|(c, w)| w * tail(c, n).norm_sqr()).sum();
            row.extend([fixed, integrated, fixed - integrated]);
        }
        Ok(row)
    })?;
    let est = estimate_columns(&rows);
    let mut out = Vec::with_capacity(prefixes.len());
    let mut checks = Vec::new();
    for (k, &n) in prefixes.iter().enumerate() {
        let analytic = spec.tail_variance(n);
        let (fixed, integrated, paired) = (&est[3 * k], &est[3 * k + 1], &est[3 * k + 2]);
        checks.push(Check::from_estimate(format!("fixed_point[{n}]"), fixed, analytic, SE_BAND));
        checks.push(Check::from_estimate(format!("integrated[{n}]"), integrated, analytic, SE_BAND));
        checks.push(Check::from_estimate(format!("fixed_minus_integrated[{n}]"), paired, 0.0, SE_BAND));
        out.push(ConvergenceRow {
            n,
            analytic,
            empirical: fixed.mean,
            se: fixed.se,
            integrated: integrated.mean,
            integrated_se: integrated.se,
        });
    }
    let mut report = TestReport::from_checks("convergence", mc.seed, mc.replicates, checks);
    let mut sorted = out.clone();
    sorted.sort_by_key(|r| r.n);
    if sorted.windows(2).any(|w| w[1].analytic > w[0].analytic) {
        report = report.fail("analytic tail is not nonincreasing");
    }
    if sorted.iter().any(|r| r.n == labels.len() && r.analytic != 0.0) {
        report = report.fail("analytic tail does not vanish at full band");
    }
    Ok(ConvergenceReport { rows: out, report })
}

/// Coefficients of the character `chi_pi`, i.e. `T_hat^pi = I / d_pi`.
pub fn character_field(domain: Domain, label: IrrepLabel) -> Result<FieldCoefficients> {
    let group = domain.as_group()?;
    let labels: Vec<IrrepLabel> = crate::irreps::labels_in_band(group, label.band(group))?;
    let mut c = FieldCoefficients::zeros(domain, &labels)?;
    let d = label.dimension();
    *c.get_mut(label).ok_or_else(|| Error::InvalidLabel(format!("{label}")))? =
        Array2::from_diag_elem(d, Complex64::new(1.0 / d as f64, 0.0));
    Ok(c)
}

const MOMENT_ORDER: u32 = 4;

fn moment_names(m: usize) -> Vec<String> {
    let mut names = Vec::new();
    for j in 0..m {
        for total in 1..=MOMENT_ORDER {
            for p in 0..=total {
                names.push(format!("f{j}:re^{p}im^{}", total - p));
            }
        }
    }
    for i in 0..m {
        for j in i + 1..m {
            for (a, b) in [("re", "re"), ("re", "im"), ("im", "re"), ("im", "im")] {
                names.push(format!("f{i}.{a}*f{j}.{b}"));
            }
        }
    }
    names
}

fn moments(values: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::new();
    for z in values {
        for total in 1..=MOMENT_ORDER {
            for p in 0..=total {
                out.push(z.re.powi(p as i32) * z.im.powi((total - p) as i32));
            }
        }
    }
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let (a, b) = (values[i], values[j]);
            out.extend([a.re * b.re, a.re * b.im, a.im * b.re, a.im * b.im]);
        }
    }
    out
}

/// Compares the joint law of `(T(f_1), ..., T(f_m))` with that of the
/// translated field `(T^h(f_1), ..., T^h(f_m))`, `T(f) = int T conj(f)`,
/// through mixed real/imaginary moments up to order four. Integrals use an
/// exact quadrature rule; differences are paired per replicate.
pub fn isotropy_functional_test(spec: &PowerSpectrum, mc: &MonteCarlo, h: &GroupElement, functions: &[FieldCoefficients]) -> Result<TestReport> {
    mc.require(MIN_REPLICATES)?;
    let domain = spec.domain();
    if h.group() != domain.acting_group() {
        return Err(mismatch(domain.acting_group(), h.group()));
    }
    if functions.is_empty() {
        return Err(Error::InvalidArgument("no test functions".into()));
    }
    for f in functions {
        if f.domain() != domain {
            return Err(mismatch(domain, f.domain()));
        }
    }
    let band = functions
        .iter()
        .map(FieldCoefficients::max_band)
        .chain([spec.band_limit(), 1])
        .max()
        .unwrap_or(1);
    let (nodes, weights): (Vec<Site>, Vec<f64>) = match domain {
        Domain::Group(group) => {
            let rule = haar_quadrature(group, band)?;
            (rule.nodes().iter().cloned().map(Site::Group).collect(), rule.weights().to_vec())
        }
        Domain::Sphere => {
            let rule = sphere_quadrature(band);
            (rule.nodes().iter().copied().map(Site::Sphere).collect(), rule.weights().to_vec())
        }
    };
    let shifted = translate_all(h, &nodes)?;
    let labels = spec.labels();
    let here = site_table(domain, &labels, &nodes)?;
    let there = site_table(domain, &labels, &shifted)?;
    // conj(f) * w at each node
    let kernels = functions
        .iter()
        .map(|f| {
            let table = site_table(domain, &f.labels(), &nodes)?;
            Ok(table
                .synthesize(f)?
                .iter()
                .zip(&weights)
                .map(|(v, w)| v.conj() * *w)
                .collect::<Vec<Complex64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = mc.map_samples(spec, |s| {
        let flat = s.coefficients().flatten();
        let a = here.synthesize_flat(&flat);
        let b = there.synthesize_flat(&flat);
        let pair = |v: &[Complex64]| -> Vec<Complex64> {
            kernels.iter().map(|k| v.iter().zip(k).map(|(x, y)| x * y).sum()).collect()
        };
        let ma = moments(&pair(&a));
        let mb = moments(&pair(&b));
        Ok(ma.iter().zip(&mb).map(|(x, y)| x - y).collect::<Vec<f64>>())
    })?;
    let checks = moment_names(functions.len())
        .into_iter()
        .zip(estimate_columns(&rows))
        .map(|(name, est)| Check::from_estimate(name, &est, 0.0, Z_LIMIT))
        .collect();
    Ok(TestReport::from_checks("isotropy_functionals", mc.seed, mc.replicates, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Structure;
    use crate::group::{Group, SpherePoint};

    fn so3() -> Domain {
        Domain::Group(Group::Rotation)
    }

    fn sites() -> Vec<Site> {
        vec![
            Site::Group(GroupElement::rotation(0.1, 0.2, 0.3)),
            Site::Group(GroupElement::rotation(2.0, 1.0, 4.0)),
            Site::Group(GroupElement::rotation(5.0, 2.5, 0.5)),
        ]
    }

    #[test]
    fn unit_constant_variance() {
        let spec = PowerSpectrum::delta(so3(), 0, 0).unwrap();
        let r = variance_identity_test(&spec, &MonteCarlo::new(5, 10_000), &sites()[0]).unwrap();
        assert!(r.pass, "{r:?}");
        assert!((r.statistic - 1.0).abs() < 3.0 * (2.0f64 / 1e4).sqrt());
    }

    #[test]
    fn cyclic_covariance_consistency() {
        let d = Domain::Group(Group::Cyclic { order: 4 });
        let spec = PowerSpectrum::new(
            d,
            4,
            [(0, 1.0), (1, 0.5), (3, 0.5)].map(|(n, a)| (IrrepLabel::CyclicFreq(n), a)),
        )
        .unwrap();
        let pts: Vec<Site> = (0..4).map(|k| Site::Group(GroupElement::cyclic(4, k).unwrap())).collect();
        let rep = covariance_report(&spec, &MonteCarlo::new(11, 10_000), &pts).unwrap();
        let want = [2.0, 1.0, 0.0, 1.0];
        for e in rep.entries.iter().filter(|e| e.i == 0) {
            assert!((e.analytic.unwrap()[0] - want[e.j]).abs() < 1e-12);
        }
        let tr = rep.test_report(Z_LIMIT);
        assert!(tr.pass, "{tr:?}");
        assert!(rep.to_csv().lines().count() == 11);
    }

    #[test]
    fn zero_spectrum_is_vacuous() {
        let spec = PowerSpectrum::zero(so3(), 2).unwrap();
        let mc = MonteCarlo::new(1, 200);
        let labels = spec.labels();
        let s = sites();
        let r = uncorrelatedness_suite(&spec, &mc, &labels, &s[0], &s[1]).unwrap();
        assert!(r.pass);
        assert!(r.checks.iter().all(|c| c.statistic == 0.0 && c.z == 0.0));
    }

    #[test]
    fn identity_translation_gives_zero_z() {
        let spec = PowerSpectrum::geometric(so3(), 2, 0.5).unwrap();
        let mc = MonteCarlo::new(3, 150).with_structure(Structure::Complex);
        let f = character_field(so3(), IrrepLabel::RotationDegree(1)).unwrap();
        let r = isotropy_functional_test(&spec, &mc, &Group::Rotation.identity(), &[f]).unwrap();
        assert!(r.pass);
        assert!(r.checks.iter().all(|c| c.z == 0.0));
        let iso = sampler_isotropy_test(&spec, &mc, &sites(), &Group::Rotation.identity()).unwrap();
        assert!(iso.checks.iter().all(|c| c.z == 0.0));
    }

    #[test]
    fn refuses_small_runs() {
        let spec = PowerSpectrum::geometric(so3(), 1, 0.5).unwrap();
        let f = character_field(so3(), IrrepLabel::RotationDegree(1)).unwrap();
        let err = isotropy_functional_test(&spec, &MonteCarlo::new(0, 99), &GroupElement::rotation(1.0, 1.0, 1.0), &[f]);
        assert!(matches!(err, Err(Error::TooFewReplicates { min: 100, got: 99 })));
    }

    #[test]
    fn character_field_values() {
        let f = character_field(so3(), IrrepLabel::RotationDegree(2)).unwrap();
        let g = GroupElement::rotation(0.4, 1.2, 2.0);
        let v = crate::field::evaluate_coefficients(&f, &g).unwrap();
        let chi = crate::irreps::character(IrrepLabel::RotationDegree(2), &g).unwrap();
        assert!((v - chi).norm() < 1e-12);
    }

    #[test]
    fn convergence_endpoints() {
        let spec = PowerSpectrum::from_profile(so3(), 3, |l| 0.5f64.powi(l as i32)).unwrap();
        let mc = MonteCarlo::new(9, 400);
        let rep = convergence_curve(&spec, &mc, &[0, 2, 4], &sites()[0]).unwrap();
        assert_eq!(rep.rows[0].analytic, spec.total_variance());
        let last = &rep.rows[2];
        assert_eq!((last.analytic, last.empirical, last.integrated), (0.0, 0.0, 0.0));
        assert!(convergence_curve(&spec, &mc, &[5], &sites()[0]).is_err());
    }

    #[test]
    fn sphere_sampler_isotropy() {
        let spec = PowerSpectrum::geometric(Domain::Sphere, 4, 0.6).unwrap();
        let pts: Vec<Site> = [SpherePoint::new(0.3, 0.2), SpherePoint::new(2.0, 4.0)].map(Site::Sphere).to_vec();
        let r = sampler_isotropy_test(&spec, &MonteCarlo::new(2, 2000), &pts, &GroupElement::rotation(1.0, 2.0, 3.0)).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
