//! Irreducible unitary representations of the supported groups.
//!
//! Matrix coefficients follow `pi_ij(g) = <pi(g) e_j, e_i>`. For SO(3) the
//! basis is `|l m>` with `m = i - l`, so entry `(i, j)` is the Wigner
//! `D^l_{m m'}(alpha, beta, gamma) = exp(-i m alpha) d^l_{m m'}(beta) exp(-i m' gamma)`.
//! Characters of U(1) and Z_N are `exp(-i n theta)`.

use std::f64::consts::TAU;
use std::fmt;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::group::{Group, GroupElement, SpherePoint};
use crate::wigner::{assoc_index, assoc_legendre_unit, WignerTable, MAX_DEGREE};

/// An equivalence class in the dual of a group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IrrepLabel {
    CyclicFreq(u32),
    CircleFreq(i64),
    RotationDegree(u32),
}

impl IrrepLabel {
    pub fn dimension(&self) -> usize {
        match *self {
            IrrepLabel::CyclicFreq(_) | IrrepLabel::CircleFreq(_) => 1,
            IrrepLabel::RotationDegree(l) => 2 * l as usize + 1,
        }
    }

    /// Band of the label: `|n|` on U(1), the degree on SO(3), and the
    /// folded frequency `min(n, N - n)` on Z_N.
    pub fn band(&self, group: Group) -> usize {
        match (*self, group) {
            (IrrepLabel::CyclicFreq(n), Group::Cyclic { order }) => n.min(order - n) as usize,
            (IrrepLabel::CyclicFreq(n), _) => n as usize,
            (IrrepLabel::CircleFreq(n), _) => n.unsigned_abs() as usize,
            (IrrepLabel::RotationDegree(l), _) => l as usize,
        }
    }

    /// Integer used in files: the frequency or the degree.
    pub fn index(&self) -> i64 {
        match *self {
            IrrepLabel::CyclicFreq(n) => n as i64,
            IrrepLabel::CircleFreq(n) => n,
            IrrepLabel::RotationDegree(l) => l as i64,
        }
    }

    pub fn from_index(group: Group, index: i64) -> Result<Self> {
        let label = match group {
            Group::Cyclic { order } => {
                if !(0..order as i64).contains(&index) {
                    return Err(Error::InvalidLabel(format!("frequency {index} outside [0, {order})")));
                }
                IrrepLabel::CyclicFreq(index as u32)
            }
            Group::Circle => IrrepLabel::CircleFreq(index),
            Group::Rotation => {
                if index < 0 || index as usize > MAX_DEGREE {
                    return Err(Error::InvalidLabel(format!("degree {index} outside [0, {MAX_DEGREE}]")));
                }
                IrrepLabel::RotationDegree(index as u32)
            }
        };
        Ok(label)
    }

    pub fn check_group(&self, group: Group) -> Result<()> {
        match (*self, group) {
            (IrrepLabel::CyclicFreq(n), Group::Cyclic { order }) if n < order => Ok(()),
            (IrrepLabel::CyclicFreq(n), Group::Cyclic { order }) => {
                Err(Error::InvalidLabel(format!("frequency {n} outside [0, {order})")))
            }
            (IrrepLabel::CircleFreq(_), Group::Circle) => Ok(()),
            (IrrepLabel::RotationDegree(l), Group::Rotation) if l as usize <= MAX_DEGREE => Ok(()),
            (IrrepLabel::RotationDegree(l), Group::Rotation) => {
                Err(Error::InvalidLabel(format!("degree {l} above {MAX_DEGREE}")))
            }
            (label, group) => Err(mismatch(group, label)),
        }
    }

    /// Label of the contragredient representation.
    pub fn conjugate(&self, group: Group) -> IrrepLabel {
        match (*self, group) {
            (IrrepLabel::CyclicFreq(n), Group::Cyclic { order }) => IrrepLabel::CyclicFreq((order - n) % order),
            (IrrepLabel::CircleFreq(n), _) => IrrepLabel::CircleFreq(-n),
            (label, _) => label,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.index() == 0
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::CyclicFreq(n) => write!(f, "n={n}"),
            IrrepLabel::CircleFreq(n) => write!(f, "n={n}"),
            IrrepLabel::RotationDegree(l) => write!(f, "l={l}"),
        }
    }
}

/// First `count` labels of the dual in the fixed enumeration order:
/// `0, 1, ...` on Z_N, `0, 1, -1, 2, -2, ...` on U(1), `l = 0, 1, ...` on SO(3).
pub fn enumerate_dual(group: Group, count: usize) -> Result<Vec<IrrepLabel>> {
    if count == 0 {
        return Err(Error::InvalidArgument("enumeration size must be at least 1".into()));
    }
    match group {
        Group::Cyclic { order } => {
            if count > order as usize {
                return Err(Error::InvalidArgument(format!("Z_{order} has only {order} irreps, asked for {count}")));
            }
            Ok((0..count as u32).map(IrrepLabel::CyclicFreq).collect())
        }
        Group::Circle => Ok((0..count)
            .map(|k| {
                let n = k.div_ceil(2) as i64;
                IrrepLabel::CircleFreq(if k % 2 == 1 || k == 0 { n } else { -n })
            })
            .collect()),
        Group::Rotation => {
            if count > MAX_DEGREE + 1 {
                return Err(Error::InvalidArgument(format!("degrees above {MAX_DEGREE} are not supported")));
            }
            Ok((0..count as u32).map(IrrepLabel::RotationDegree).collect())
        }
    }
}

/// All labels with band at most `band`, in enumeration order.
pub fn labels_in_band(group: Group, band: usize) -> Result<Vec<IrrepLabel>> {
    let count = match group {
        Group::Cyclic { order } => order as usize,
        Group::Circle => 2 * band + 1,
        Group::Rotation => band + 1,
    };
    let all = enumerate_dual(group, count)?;
    Ok(all.into_iter().filter(|l| l.band(group) <= band).collect())
}

/// `pi(g)` for one irrep.
#[derive(Clone, Debug)]
pub struct IrrepMatrix {
    pub label: IrrepLabel,
    pub element: GroupElement,
    pub entries: Array2<Complex64>,
}

impl IrrepMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diag().sum()
    }
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

pub fn matrix(label: IrrepLabel, g: &GroupElement) -> Result<IrrepMatrix> {
    label.check_group(g.group())?;
    let entries = match (label, g.group()) {
        (IrrepLabel::CyclicFreq(n), Group::Cyclic { order }) => {
            let k = g.as_cyclic().unwrap();
            let angle = -TAU * ((n as u64 * k as u64) % order as u64) as f64 / order as f64;
            Array2::from_elem((1, 1), phase(angle))
        }
        (IrrepLabel::CircleFreq(n), Group::Circle) => {
            Array2::from_elem((1, 1), phase(-(n as f64) * g.as_circle().unwrap()))
        }
        (IrrepLabel::RotationDegree(l), Group::Rotation) => {
            let (alpha, beta, gamma) = g.as_euler().unwrap();
            let table = WignerTable::new(l as usize, beta);
            wigner_block(&table, l as usize, alpha, gamma)
        }
        _ => unreachable!("checked above"),
    };
    Ok(IrrepMatrix {
        label,
        element: *g,
        entries,
    })
}

fn wigner_block(table: &WignerTable, l: usize, alpha: f64, gamma: f64) -> Array2<Complex64> {
    let dim = 2 * l + 1;
    let li = l as i64;
    let block = table.block(l);
    Array2::from_shape_fn((dim, dim), |(i, j)| {
        let m = i as i64 - li;
        let mp = j as i64 - li;
        phase(-(m as f64) * alpha - (mp as f64) * gamma) * block[i * dim + j]
    })
}

/// Wigner D-matrices of every degree `0..=lmax` at one rotation.
pub fn rotation_matrices(lmax: usize, g: &GroupElement) -> Result<Vec<Array2<Complex64>>> {
    let (alpha, beta, gamma) = g.as_euler().ok_or_else(|| mismatch(Group::Rotation, g.group()))?;
    if lmax > MAX_DEGREE {
        return Err(Error::InvalidLabel(format!("degree {lmax} above {MAX_DEGREE}")));
    }
    let table = WignerTable::new(lmax, beta);
    Ok((0..=lmax).map(|l| wigner_block(&table, l, alpha, gamma)).collect())
}

/// All matrices for the given labels at `g`, sharing one Wigner table on SO(3).
pub fn matrices_for(labels: &[IrrepLabel], g: &GroupElement) -> Result<Vec<Array2<Complex64>>> {
    for label in labels {
        label.check_group(g.group())?;
    }
    if g.group() == Group::Rotation {
        let lmax = labels.iter().map(|l| l.index() as usize).max().unwrap_or(0);
        let all = rotation_matrices(lmax, g)?;
        Ok(labels.iter().map(|l| all[l.index() as usize].clone()).collect())
    } else {
        labels.iter().map(|&l| matrix(l, g).map(|m| m.entries)).collect()
    }
}

/// `chi_pi(g) = Trace pi(g)`. On SO(3) it is evaluated from the rotation
/// angle as `1 + 2 sum_k cos(k omega)`, independently of the D-matrices.
pub fn character(label: IrrepLabel, g: &GroupElement) -> Result<Complex64> {
    label.check_group(g.group())?;
    match label {
        IrrepLabel::RotationDegree(l) => {
            let omega = g.norm();
            let sum: f64 = (1..=l).map(|k| (k as f64 * omega).cos()).sum();
            Ok(Complex64::new(1.0 + 2.0 * sum, 0.0))
        }
        _ => Ok(matrix(label, g)?.entries[(0, 0)]),
    }
}

/// Spherical harmonic with unit mean square under the normalized area
/// measure (`Y_00 = 1`), Condon-Shortley phase included.
pub fn sph_harmonic(l: u32, m: i64, x: &SpherePoint) -> Result<Complex64> {
    if m.unsigned_abs() > l as u64 {
        return Err(Error::InvalidLabel(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    if l as usize > MAX_DEGREE {
        return Err(Error::InvalidLabel(format!("degree {l} above {MAX_DEGREE}")));
    }
    let q = assoc_legendre_unit(l as usize, x.theta());
    Ok(harmonic_from_table(&q, l as usize, m, x.phi()))
}

pub(crate) fn harmonic_from_table(q: &[f64], l: usize, m: i64, phi: f64) -> Complex64 {
    let am = m.unsigned_abs() as usize;
    let pos = phase(am as f64 * phi) * q[assoc_index(l, am)];
    if m >= 0 {
        pos
    } else if am.is_multiple_of(2) {
        pos.conj()
    } else {
        -pos.conj()
    }
}

/// `Y_lm(x)` for all `l <= lmax`, ordered by `l` then `m = -l..=l`.
pub fn sph_harmonics_all(lmax: usize, x: &SpherePoint) -> Vec<Complex64> {
    let q = assoc_legendre_unit(lmax, x.theta());
    let mut out = Vec::with_capacity((lmax + 1) * (lmax + 1));
    for l in 0..=lmax {
        let li = l as i64;
        for m in -li..=li {
            out.push(harmonic_from_table(&q, l, m, x.phi()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::linalg::general_mat_mul;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rot() -> impl Strategy<Value = GroupElement> {
        (0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, c)| GroupElement::rotation(a, b, c))
    }

    fn max_dev(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn enumeration_orders() {
        let c4 = enumerate_dual(Group::Cyclic { order: 4 }, 4).unwrap();
        assert_eq!(c4.iter().map(|l| l.index()).collect::<Vec<_>>(), vec![0, 1, 2, 3]);
        assert!(enumerate_dual(Group::Cyclic { order: 4 }, 5).is_err());
        let circ = enumerate_dual(Group::Circle, 5).unwrap();
        assert_eq!(circ.iter().map(|l| l.index()).collect::<Vec<_>>(), vec![0, 1, -1, 2, -2]);
        let so3 = enumerate_dual(Group::Rotation, 3).unwrap();
        assert_eq!(so3.iter().map(|l| l.dimension()).collect::<Vec<_>>(), vec![1, 3, 5]);
        assert!(enumerate_dual(Group::Circle, 0).is_err());
    }

    #[test]
    fn identity_maps_to_identity_matrix() {
        for (group, labels) in [
            (Group::Rotation, labels_in_band(Group::Rotation, 6).unwrap()),
            (Group::Circle, labels_in_band(Group::Circle, 3).unwrap()),
            (Group::Cyclic { order: 5 }, labels_in_band(Group::Cyclic { order: 5 }, 5).unwrap()),
        ] {
            for label in labels {
                let m = matrix(label, &group.identity()).unwrap();
                let eye = Array2::from_shape_fn((label.dimension(), label.dimension()), |(i, j)| {
                    if i == j {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                assert!(max_dev(&m.entries, &eye) < 1e-15);
            }
        }
    }

    #[test]
    fn simple_entries() {
        let m = matrix(IrrepLabel::CircleFreq(2), &GroupElement::circle(PI / 4.0)).unwrap();
        assert!((m.entries[(0, 0)] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let chi = character(IrrepLabel::CyclicFreq(1), &GroupElement::cyclic(4, 2).unwrap()).unwrap();
        assert!((chi - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let d = matrix(IrrepLabel::RotationDegree(1), &GroupElement::rotation(0.0, PI / 3.0, 0.0)).unwrap();
        assert!((d.entries[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn character_values() {
        let e = Group::Rotation.identity();
        for l in 0..6 {
            assert_eq!(character(IrrepLabel::RotationDegree(l), &e).unwrap().re, (2 * l + 1) as f64);
        }
        let g = GroupElement::rotation(0.0, PI / 2.0, 0.0);
        let chi = character(IrrepLabel::RotationDegree(1), &g).unwrap();
        let trace = matrix(IrrepLabel::RotationDegree(1), &g).unwrap().trace();
        assert!((chi.re - 1.0).abs() < 1e-15);
        assert!((chi - trace).norm() < 1e-12);
    }

    #[test]
    fn domain_mismatch_is_reported() {
        let g = GroupElement::circle(0.2);
        assert!(matches!(matrix(IrrepLabel::RotationDegree(1), &g), Err(Error::DomainMismatch { .. })));
        assert!(character(IrrepLabel::CyclicFreq(7), &GroupElement::cyclic(4, 1).unwrap()).is_err());
    }

    #[test]
    fn harmonics_values() {
        let north = SpherePoint::north_pole();
        let y00 = sph_harmonic(0, 0, &SpherePoint::new(1.0, 2.0)).unwrap();
        assert!((y00 - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let y10 = sph_harmonic(1, 0, &north).unwrap();
        assert!((y10.re - 3f64.sqrt()).abs() < 1e-15);
        assert!(sph_harmonic(2, 3, &north).is_err());
        let x = SpherePoint::new(0.8, 1.9);
        for l in 0..6u32 {
            for m in 0..=l as i64 {
                let pos = sph_harmonic(l, m, &x).unwrap();
                let neg = sph_harmonic(l, -m, &x).unwrap();
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                assert!((neg - pos.conj() * sign).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn harmonics_are_lifted_d_columns() {
        // Y_lm(g . north) = sqrt(2l+1) conj(D^l_{m0}(g))
        let g = GroupElement::rotation(0.7, 1.2, 2.5);
        let x = g.act(&SpherePoint::north_pole()).unwrap();
        let ds = rotation_matrices(5, &g).unwrap();
        for l in 0..=5usize {
            for m in -(l as i64)..=(l as i64) {
                let y = sph_harmonic(l as u32, m, &x).unwrap();
                let d = ds[l][((m + l as i64) as usize, l)];
                assert!((y - d.conj() * ((2 * l + 1) as f64).sqrt()).norm() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn wigner_is_unitary_homomorphism(g in rot(), h in rot()) {
            let gh = g.mul(&h).unwrap();
            let dg = rotation_matrices(6, &g).unwrap();
            let dh = rotation_matrices(6, &h).unwrap();
            let dgh = rotation_matrices(6, &gh).unwrap();
            for l in 0..=6 {
                let dim = 2 * l + 1;
                let mut prod = Array2::<Complex64>::zeros((dim, dim));
                general_mat_mul(Complex64::new(1.0, 0.0), &dg[l], &dh[l], Complex64::new(0.0, 0.0), &mut prod);
                prop_assert!(max_dev(&prod, &dgh[l]) < 1e-9);
                let adj = dg[l].t().mapv(|z| z.conj());
                let uu = dg[l].dot(&adj);
                let eye = Array2::from_shape_fn((dim, dim), |(i, j)| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
                prop_assert!(max_dev(&uu, &eye) < 1e-10);
            }
        }

        #[test]
        fn characters_are_central_traces(g in rot(), h in rot()) {
            let conj = g.conjugate_by(&h).unwrap();
            for l in 0..=8u32 {
                let label = IrrepLabel::RotationDegree(l);
                let a = character(label, &g).unwrap();
                let b = character(label, &conj).unwrap();
                prop_assert!((a - b).norm() < 1e-10);
                let tr = matrix(label, &g).unwrap().trace();
                prop_assert!((a - tr).norm() < 1e-12);
            }
        }

        #[test]
        fn sum_rule(g in rot(), h in rot()) {
            // sum_ij pi_ij(g) conj(pi_ij(h)) = chi(g h^{-1})
            let ghi = g.mul(&h.inv()).unwrap();
            let dg = rotation_matrices(5, &g).unwrap();
            let dh = rotation_matrices(5, &h).unwrap();
            for l in 0..=5u32 {
                let s: Complex64 = dg[l as usize].iter().zip(dh[l as usize].iter()).map(|(a, b)| a * b.conj()).sum();
                let chi = character(IrrepLabel::RotationDegree(l), &ghi).unwrap();
                prop_assert!((s - chi).norm() < 1e-9);
            }
        }

        #[test]
        fn circle_and_cyclic_homomorphism(a in 0.0..TAU, b in 0.0..TAU, n in -6i64..6, j in 0i64..7, k in 0i64..7) {
            let label = IrrepLabel::CircleFreq(n);
            let (g, h) = (GroupElement::circle(a), GroupElement::circle(b));
            let lhs = matrix(label, &g.mul(&h).unwrap()).unwrap().entries[(0, 0)];
            let rhs = matrix(label, &g).unwrap().entries[(0, 0)] * matrix(label, &h).unwrap().entries[(0, 0)];
            prop_assert!((lhs - rhs).norm() < 1e-9);
            let (g, h) = (GroupElement::cyclic(7, j).unwrap(), GroupElement::cyclic(7, k).unwrap());
            let label = IrrepLabel::CyclicFreq(3);
            let lhs = matrix(label, &g.mul(&h).unwrap()).unwrap().entries[(0, 0)];
            let rhs = matrix(label, &g).unwrap().entries[(0, 0)] * matrix(label, &h).unwrap().entries[(0, 0)];
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
