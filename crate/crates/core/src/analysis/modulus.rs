//! Mean-square continuity modulus `m(delta) = sup_{d(g, e) <= delta} E|T(g) - T(e)|^2`
//! computed exactly from the spectrum over a radial search grid.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{mismatch, Error, Result};
use crate::group::{Domain, Group, GroupElement, SpherePoint};
use crate::irreps::character;
use crate::spectrum::{covariance_from_spectrum, lifted_covariance, sphere_covariance, PowerSpectrum};
use crate::wigner::legendre_all;

const BALL_SLACK: f64 = 1e-12;

/// `E|T(g) - T(e)|^2 = 2 (R(e) - Re R(g))`.
pub fn ms_increment(spec: &PowerSpectrum, g: &GroupElement) -> Result<f64> {
    let group = spec.domain().as_group()?;
    if g.group() != group {
        return Err(mismatch(group, g.group()));
    }
    let at_e = covariance_from_spectrum(spec, &group.identity())?.re;
    Ok(2.0 * (at_e - covariance_from_spectrum(spec, g)?.re))
}

/// Radial search grid: every requested radius plus `radial` evenly spaced
/// radii up to the largest one, each visited along `directions` directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchGrid {
    pub radial: usize,
    pub directions: usize,
}

impl Default for SearchGrid {
    fn default() -> Self {
        SearchGrid {
            radial: 200,
            directions: 6,
        }
    }
}

impl SearchGrid {
    fn radii(&self, deltas: &[f64]) -> Vec<f64> {
        let top = deltas.last().copied().unwrap_or(0.0);
        let mut r: Vec<f64> = deltas.to_vec();
        r.extend((1..=self.radial).map(|k| top * k as f64 / self.radial as f64));
        r.retain(|x| *x > 0.0);
        r.sort_by(f64::total_cmp);
        r.dedup();
        r
    }

    fn check(&self) -> Result<()> {
        if self.directions == 0 {
            return Err(Error::InvalidArgument("search grid has no directions".into()));
        }
        Ok(())
    }
}

fn check_deltas(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("no radii requested".into()));
    }
    if deltas.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidArgument("radii must be finite and non-negative".into()));
    }
    if deltas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("radii must be sorted ascending".into()));
    }
    Ok(())
}

/// Near-uniform unit vectors on a Fibonacci spiral.
fn fibonacci_axes(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * k as f64;
            Vector3::new(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// Elements of the search grid, identity included.
fn group_grid(group: Group, radii: &[f64], directions: usize) -> Result<Vec<GroupElement>> {
    let mut out = vec![group.identity()];
    match group {
        Group::Cyclic { order } => {
            for k in 1..order {
                out.push(GroupElement::cyclic(order, k as i64)?);
            }
        }
        Group::Circle => {
            for &r in radii {
                out.push(GroupElement::circle(r));
                out.push(GroupElement::circle(-r));
            }
        }
        Group::Rotation => {
            let axes = fibonacci_axes(directions);
            for &r in radii {
                for axis in &axes {
                    out.push(GroupElement::axis_angle(*axis, r)?);
                }
            }
        }
    }
    Ok(out)
}

/// Running maximum of `(radius, value)` pairs evaluated at each delta.
fn ball_maxima(mut samples: Vec<(f64, f64)>, deltas: &[f64]) -> Vec<(f64, f64)> {
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::with_capacity(deltas.len());
    let mut best = 0.0f64;
    let mut idx = 0;
    for &delta in deltas {
        while idx < samples.len() && samples[idx].0 <= delta + BALL_SLACK {
            best = best.max(samples[idx].1);
            idx += 1;
        }
        out.push((delta, best));
    }
    out
}

/// Modulus curve with the spectrum it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusCurve {
    pub points: Vec<(f64, f64)>,
    pub spectrum: PowerSpectrum,
    pub grid_points: usize,
}

impl ModulusCurve {
    pub fn deltas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn at(&self, delta: f64) -> Option<f64> {
        self.points.iter().find(|p| p.0 == delta).map(|p| p.1)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.points.windows(2).all(|w| w[1].1 >= w[0].1)
    }

    /// `m <= 4 sum d_pi alpha_pi` at every radius, from
    /// `E|T(g) - T(e)|^2 <= 2 E|T(g)|^2 + 2 E|T(e)|^2`.
    pub fn within_variance_bound(&self) -> bool {
        let cap = 4.0 * self.spectrum.total_variance() + 1e-12;
        self.points.iter().all(|p| p.1 <= cap)
    }

    /// Largest deviation from another curve over shared radii.
    pub fn max_abs_diff(&self, other: &ModulusCurve) -> f64 {
        self.points
            .iter()
            .zip(&other.points)
            .map(|(a, b)| (a.1 - b.1).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,modulus\n");
        for (d, m) in &self.points {
            let _ = writeln!(s, "{d:?},{m:?}");
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Modulus of a group field over metric balls around the identity.
pub fn continuity_modulus(spec: &PowerSpectrum, deltas: &[f64], grid: &SearchGrid) -> Result<ModulusCurve> {
    check_deltas(deltas)?;
    grid.check()?;
    let group = spec.domain().as_group()?;
    let e = group.identity();
    let elements = group_grid(group, &grid.radii(deltas), grid.directions)?;
    let samples = elements
        .iter()
        .map(|g| Ok((g.metric(&e)?, ms_increment(spec, g)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusCurve {
        points: ball_maxima(samples, deltas),
        spectrum: spec.clone(),
        grid_points: elements.len(),
    })
}

/// Term-by-term upper bound `sum d_pi alpha_pi max_{ball} (2 - 2 Re chi_pi / d_pi)`
/// over the same search grid.
pub fn modulus_bound(spec: &PowerSpectrum, delta: f64, grid: &SearchGrid) -> Result<f64> {
    grid.check()?;
    match spec.domain() {
        Domain::Group(group) => {
            let e = group.identity();
            let elements: Vec<GroupElement> = group_grid(group, &grid.radii(&[delta]), grid.directions)?
                .into_iter()
                .filter(|g| g.metric(&e).is_ok_and(|d| d <= delta + BALL_SLACK))
                .collect();
            let mut total = 0.0;
            for (label, alpha) in spec.entries() {
                if *alpha == 0.0 {
                    continue;
                }
                let d = label.dimension() as f64;
                let mut worst = 0.0f64;
                for g in &elements {
                    worst = worst.max(2.0 - 2.0 * character(*label, g)?.re / d);
                }
                total += d * alpha * worst;
            }
            Ok(total)
        }
        Domain::Sphere => {
            let mut radii = grid.radii(&[delta]);
            radii.insert(0, 0.0);
            let lmax = spec.band_limit();
            let tables: Vec<Vec<f64>> = radii.iter().map(|r| legendre_all(lmax, r.cos())).collect();
            Ok(spec
                .entries()
                .iter()
                .map(|(label, alpha)| {
                    let l = label.index() as usize;
                    let worst = tables.iter().map(|p| 2.0 - 2.0 * p[l]).fold(0.0, f64::max);
                    (2 * l + 1) as f64 * alpha * worst
                })
                .sum())
        }
    }
}

fn tangent_frame(v: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if v.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let e1 = helper.cross(v).normalize();
    let e2 = v.cross(&e1);
    (e1, e2)
}

fn sphere_bases() -> [SpherePoint; 3] {
    [
        SpherePoint::north_pole(),
        SpherePoint::new(1.0, 2.0),
        SpherePoint::new(2.5, 5.0),
    ]
}

/// Modulus of a sphere field over geodesic balls,
/// `E|T(x) - T(y)|^2 = 2 (Gamma(x, x) - Gamma(x, y))` by the Legendre series.
pub fn sphere_modulus(spec: &PowerSpectrum, deltas: &[f64], grid: &SearchGrid) -> Result<ModulusCurve> {
    check_deltas(deltas)?;
    grid.check()?;
    if spec.domain() != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, spec.domain()));
    }
    let radii = grid.radii(deltas);
    let mut samples = vec![(0.0, 0.0)];
    for x in sphere_bases() {
        let v = x.to_vector();
        let (e1, e2) = tangent_frame(&v);
        let var = sphere_covariance(spec, &x, &x)?;
        for &r in &radii {
            for k in 0..grid.directions {
                let psi = 2.0 * PI * k as f64 / grid.directions as f64;
                let w = v * r.cos() + (e1 * psi.cos() + e2 * psi.sin()) * r.sin();
                let y = SpherePoint::from_vector(&w);
                samples.push((x.distance(&y), 2.0 * (var - sphere_covariance(spec, &x, &y)?)));
            }
        }
    }
    let grid_points = samples.len();
    Ok(ModulusCurve {
        points: ball_maxima(samples, deltas),
        spectrum: spec.clone(),
        grid_points,
    })
}

/// Modulus of the lifted field `g -> T(g x)` on SO(3), over rotations that
/// move the base point by at most delta, computed from `D^l_{00}`.
pub fn lifted_modulus(spec: &PowerSpectrum, base: &SpherePoint, deltas: &[f64], grid: &SearchGrid) -> Result<ModulusCurve> {
    check_deltas(deltas)?;
    grid.check()?;
    if spec.domain() != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, spec.domain()));
    }
    let v = base.to_vector();
    let (e1, e2) = tangent_frame(&v);
    let at_e = lifted_covariance(spec, base, &Group::Rotation.identity())?;
    let mut samples = vec![(0.0, 0.0)];
    for &r in &grid.radii(deltas) {
        for k in 0..grid.directions {
            let psi = 2.0 * PI * k as f64 / grid.directions as f64;
            let axis = e1 * psi.cos() + e2 * psi.sin();
            // a stabilizer rotation first, so the elements are not all
            // one-parameter subgroups through the base point
            let g = GroupElement::axis_angle(axis, r)?.mul(&GroupElement::axis_angle(v, psi)?)?;
            let moved = g.act(base)?;
            samples.push((base.distance(&moved), 2.0 * (at_e - lifted_covariance(spec, base, &g)?)));
        }
    }
    let grid_points = samples.len();
    Ok(ModulusCurve {
        points: ball_maxima(samples, deltas),
        spectrum: spec.clone(),
        grid_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::IrrepLabel;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn so3() -> Domain {
        Domain::Group(Group::Rotation)
    }

    #[test]
    fn increment_vanishes_at_identity() {
        let spec = PowerSpectrum::geometric(so3(), 5, 0.6).unwrap();
        assert_eq!(ms_increment(&spec, &Group::Rotation.identity()).unwrap(), 0.0);
    }

    #[test]
    fn cyclic_increments_from_dft() {
        let d = Domain::Group(Group::Cyclic { order: 4 });
        let spec = PowerSpectrum::new(
            d,
            4,
            [(0, 1.0), (1, 0.5), (3, 0.5)].map(|(n, a)| (IrrepLabel::CyclicFreq(n), a)),
        )
        .unwrap();
        let g1 = GroupElement::cyclic(4, 1).unwrap();
        let g2 = GroupElement::cyclic(4, 2).unwrap();
        assert!((ms_increment(&spec, &g1).unwrap() - 2.0).abs() < 1e-12);
        assert!((ms_increment(&spec, &g2).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degree_one_closed_form() {
        let spec = PowerSpectrum::delta(so3(), 1, 1).unwrap();
        let deltas = [0.01, 0.1, 0.5];
        let curve = continuity_modulus(&spec, &deltas, &SearchGrid::default()).unwrap();
        for (d, m) in &curve.points {
            assert!((m - 4.0 * (1.0 - d.cos())).abs() < 1e-9, "delta {d}: {m}");
        }
        // 4 (1 - cos 0.1)
        assert!((curve.at(0.1).unwrap() - 0.019_983_338_887_896_7).abs() < 1e-13);
        assert!(curve.is_nondecreasing());
    }

    #[test]
    fn modulus_can_exceed_twice_the_variance() {
        let spec = PowerSpectrum::delta(so3(), 1, 1).unwrap();
        let curve = continuity_modulus(&spec, &[PI], &SearchGrid::default()).unwrap();
        assert!((curve.at(PI).unwrap() - 8.0).abs() < 1e-9);
        assert!(curve.within_variance_bound());
    }

    #[test]
    fn zero_and_constant_spectra() {
        let grid = SearchGrid::default();
        let zero = continuity_modulus(&PowerSpectrum::zero(so3(), 3).unwrap(), &[0.1, 1.0], &grid).unwrap();
        assert!(zero.values().iter().all(|m| *m == 0.0));
        let constant = PowerSpectrum::delta(Domain::Sphere, 3, 0).unwrap();
        let sphere = sphere_modulus(&constant, &[0.1, 1.0], &grid).unwrap();
        assert!(sphere.values().iter().all(|m| m.abs() < 1e-14));
    }

    #[test]
    fn sphere_degree_one() {
        let spec = PowerSpectrum::delta(Domain::Sphere, 2, 1).unwrap();
        let curve = sphere_modulus(&spec, &[0.01, 0.1, 0.5], &SearchGrid::default()).unwrap();
        for (d, m) in &curve.points {
            assert!((m - 6.0 * (1.0 - d.cos())).abs() < 1e-9);
        }
    }

    #[test]
    fn sphere_matches_lift() {
        let spec = PowerSpectrum::polynomial(Domain::Sphere, 8, 2.5).unwrap();
        let deltas = [0.01, 0.05, 0.1, 0.5, 1.0, 2.0];
        let grid = SearchGrid::default();
        let s = sphere_modulus(&spec, &deltas, &grid).unwrap();
        for base in [SpherePoint::north_pole(), SpherePoint::new(0.7, 1.9)] {
            let l = lifted_modulus(&spec, &base, &deltas, &grid).unwrap();
            assert!(s.max_abs_diff(&l) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = PowerSpectrum::delta(so3(), 1, 1).unwrap();
        let grid = SearchGrid::default();
        assert!(continuity_modulus(&spec, &[], &grid).is_err());
        assert!(continuity_modulus(&spec, &[0.5, 0.1], &grid).is_err());
        assert!(continuity_modulus(&spec, &[0.1], &SearchGrid { radial: 10, directions: 0 }).is_err());
        let sphere = PowerSpectrum::delta(Domain::Sphere, 1, 1).unwrap();
        assert!(continuity_modulus(&sphere, &[0.1], &grid).is_err());
    }

    #[test]
    fn csv_layout() {
        let spec = PowerSpectrum::delta(so3(), 1, 1).unwrap();
        let curve = continuity_modulus(&spec, &[0.0, 0.5], &SearchGrid::default()).unwrap();
        let csv = curve.to_csv();
        assert!(csv.starts_with("delta,modulus\n0.0,0.0\n0.5,"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn curve_invariants(weights in prop::collection::vec(0.0f64..2.0, 1..6)) {
            let band = weights.len() - 1;
            let spec = PowerSpectrum::from_profile(so3(), band, |b| weights[b]).unwrap();
            let deltas = [0.0, 0.001, 0.01, 0.1, 0.5, 1.0, 2.0, PI];
            let grid = SearchGrid { radial: 60, directions: 4 };
            let curve = continuity_modulus(&spec, &deltas, &grid).unwrap();
            prop_assert_eq!(curve.at(0.0).unwrap(), 0.0);
            prop_assert!(curve.is_nondecreasing());
            prop_assert!(curve.within_variance_bound());
            let bound = modulus_bound(&spec, 0.001, &grid).unwrap();
            prop_assert!(curve.at(0.001).unwrap() <= bound + 1e-12);
            prop_assert!(bound <= 2.0 * spec.total_variance() * 1e-4);
            // the cap is attained up to a factor: alpha = delta_1 reaches 8/3 of the variance at pi
            prop_assert!(curve.at(PI).unwrap() <= 4.0 * spec.total_variance() + 1e-12);
        }

        #[test]
        fn increment_is_central(weights in prop::collection::vec(0.0f64..2.0, 1..5),
                                a in 0.0..TAU, b in 0.0..PI, c in 0.0..TAU,
                                x in 0.0..TAU, y in 0.0..PI, z in 0.0..TAU) {
            let band = weights.len() - 1;
            let spec = PowerSpectrum::from_profile(so3(), band, |k| weights[k]).unwrap();
            let g = GroupElement::rotation(a, b, c);
            let h = GroupElement::rotation(x, y, z);
            let lhs = ms_increment(&spec, &g).unwrap();
            let rhs = ms_increment(&spec, &g.conjugate_by(&h).unwrap()).unwrap();
            prop_assert!(lhs >= -1e-12);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
