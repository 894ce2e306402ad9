//! Concrete compact groups and the two-sphere as an SO(3)-homogeneous space.
//!
//! Three groups are supported: the cyclic group Z_N, the circle U(1) and the
//! rotation group SO(3). Rotations are stored as ZYZ Euler angles
//! `R = Rz(alpha) Ry(beta) Rz(gamma)`; composition goes through 3x3 matrices
//! and is converted back to canonical angles.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};

/// Below this polar angle (or this close to pi) the Euler parametrization is
/// treated as gimbal-degenerate and `gamma` is folded into `alpha`.
const GIMBAL_EPS: f64 = 1e-13;

/// Tolerance used when two group elements are compared through the metric.
pub const EQ_TOL: f64 = 1e-9;

/// A compact group supported by this crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Group {
    Cyclic { order: u32 },
    Circle,
    #[serde(rename = "so3")]
    Rotation,
}

impl Group {
    pub fn cyclic(order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("cyclic group order must be positive".into()));
        }
        Ok(Group::Cyclic { order })
    }

    pub fn identity(self) -> GroupElement {
        match self {
            Group::Cyclic { order } => GroupElement(Repr::Cyclic { order, index: 0 }),
            Group::Circle => GroupElement(Repr::Circle { theta: 0.0 }),
            Group::Rotation => GroupElement(Repr::Rotation {
                alpha: 0.0,
                beta: 0.0,
                gamma: 0.0,
            }),
        }
    }

    /// Discrete groups carry atoms in their Haar measure.
    pub fn is_discrete(self) -> bool {
        matches!(self, Group::Cyclic { .. })
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Cyclic { order } => write!(f, "Z_{order}"),
            Group::Circle => write!(f, "U(1)"),
            Group::Rotation => write!(f, "SO(3)"),
        }
    }
}

/// Where a field lives: on one of the groups, or on the sphere viewed as
/// the homogeneous space SO(3)/SO(2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Group(Group),
    Sphere,
}

impl Domain {
    /// The group whose irreps label the harmonics of this domain.
    pub fn acting_group(self) -> Group {
        match self {
            Domain::Group(g) => g,
            Domain::Sphere => Group::Rotation,
        }
    }

    pub fn as_group(self) -> Result<Group> {
        match self {
            Domain::Group(g) => Ok(g),
            Domain::Sphere => Err(mismatch("a group", "S^2")),
        }
    }

    /// Name used in spectrum and config files.
    pub fn tag(self) -> &'static str {
        match self {
            Domain::Group(Group::Cyclic { .. }) => "cyclic",
            Domain::Group(Group::Circle) => "circle",
            Domain::Group(Group::Rotation) => "so3",
            Domain::Sphere => "sphere",
        }
    }

    pub fn from_tag(tag: &str, order: Option<u32>) -> Result<Self> {
        match tag {
            "cyclic" => {
                let n = order.ok_or_else(|| Error::InvalidArgument("cyclic group requires N".into()))?;
                Ok(Domain::Group(Group::cyclic(n)?))
            }
            "circle" => Ok(Domain::Group(Group::Circle)),
            "so3" => Ok(Domain::Group(Group::Rotation)),
            "sphere" => Ok(Domain::Sphere),
            other => Err(Error::InvalidArgument(format!("unknown group tag '{other}'"))),
        }
    }

    pub fn order(self) -> Option<u32> {
        match self {
            Domain::Group(Group::Cyclic { order }) => Some(order),
            _ => None,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Group(g) => g.fmt(f),
            Domain::Sphere => write!(f, "S^2"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Repr {
    Cyclic { order: u32, index: u32 },
    Circle { theta: f64 },
    Rotation { alpha: f64, beta: f64, gamma: f64 },
}

/// A point of one of the supported groups, always held in canonical form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement(Repr);

pub(crate) fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl GroupElement {
    pub fn cyclic(order: u32, index: i64) -> Result<Self> {
        Group::cyclic(order)?;
        let index = index.rem_euclid(order as i64) as u32;
        Ok(GroupElement(Repr::Cyclic { order, index }))
    }

    pub fn circle(theta: f64) -> Self {
        GroupElement(Repr::Circle {
            theta: wrap_angle(theta),
        })
    }

    /// Rotation from ZYZ Euler angles. Out-of-range angles are canonicalized.
    pub fn rotation(alpha: f64, beta: f64, gamma: f64) -> Self {
        if (0.0..=PI).contains(&beta) {
            GroupElement(canonical_euler(alpha, beta, gamma))
        } else {
            Self::from_matrix(&euler_matrix(alpha, beta, gamma))
        }
    }

    /// Rotation from a proper orthogonal 3x3 matrix.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let (alpha, beta, gamma) = matrix_to_euler(m);
        GroupElement(canonical_euler(alpha, beta, gamma))
    }

    /// Rotation by `angle` about the (not necessarily normalized) `axis`.
    pub fn axis_angle(axis: Vector3<f64>, angle: f64) -> Result<Self> {
        let norm = axis.norm();
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::InvalidArgument("rotation axis must be non-zero".into()));
        }
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis / norm), angle);
        Ok(Self::from_matrix(rot.matrix()))
    }

    /// Haar-distributed element: uniform index or angle, and on SO(3)
    /// uniform `alpha`, `gamma` with `cos(beta)` uniform on `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(group: Group, rng: &mut R) -> Self {
        match group {
            Group::Cyclic { order } => GroupElement(Repr::Cyclic {
                order,
                index: rng.random_range(0..order),
            }),
            Group::Circle => Self::circle(rng.random::<f64>() * TAU),
            Group::Rotation => {
                let alpha = rng.random::<f64>() * TAU;
                let beta = (2.0 * rng.random::<f64>() - 1.0).clamp(-1.0, 1.0).acos();
                let gamma = rng.random::<f64>() * TAU;
                Self::rotation(alpha, beta, gamma)
            }
        }
    }

    pub fn group(&self) -> Group {
        match self.0 {
            Repr::Cyclic { order, .. } => Group::Cyclic { order },
            Repr::Circle { .. } => Group::Circle,
            Repr::Rotation { .. } => Group::Rotation,
        }
    }

    pub fn as_cyclic(&self) -> Option<u32> {
        match self.0 {
            Repr::Cyclic { index, .. } => Some(index),
            _ => None,
        }
    }

    pub fn as_circle(&self) -> Option<f64> {
        match self.0 {
            Repr::Circle { theta } => Some(theta),
            _ => None,
        }
    }

    /// ZYZ Euler angles `(alpha, beta, gamma)` of a rotation.
    pub fn as_euler(&self) -> Option<(f64, f64, f64)> {
        match self.0 {
            Repr::Rotation { alpha, beta, gamma } => Some((alpha, beta, gamma)),
            _ => None,
        }
    }

    /// Rotation matrix of an SO(3) element.
    pub fn rotation_matrix(&self) -> Option<Matrix3<f64>> {
        self.as_euler().map(|(a, b, c)| euler_matrix(a, b, c))
    }

    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self.0, other.0) {
            (Repr::Cyclic { order, index: a }, Repr::Cyclic { order: o2, index: b }) if order == o2 => {
                let index = ((a as u64 + b as u64) % order as u64) as u32;
                Ok(GroupElement(Repr::Cyclic { order, index }))
            }
            (Repr::Circle { theta: a }, Repr::Circle { theta: b }) => Ok(Self::circle(a + b)),
            (Repr::Rotation { .. }, Repr::Rotation { .. }) => {
                let m = self.rotation_matrix().unwrap() * other.rotation_matrix().unwrap();
                Ok(Self::from_matrix(&m))
            }
            _ => Err(mismatch(self.group(), other.group())),
        }
    }

    pub fn inv(&self) -> GroupElement {
        match self.0 {
            Repr::Cyclic { order, index } => GroupElement(Repr::Cyclic {
                order,
                index: (order - index) % order,
            }),
            Repr::Circle { theta } => Self::circle(-theta),
            // Rz(-g) Ry(-b) Rz(-a) = Rz(pi - g) Ry(b) Rz(pi - a)
            Repr::Rotation { alpha, beta, gamma } => GroupElement(canonical_euler(PI - gamma, beta, PI - alpha)),
        }
    }

    /// `h g h^{-1}`
    pub fn conjugate_by(&self, h: &GroupElement) -> Result<GroupElement> {
        h.mul(self)?.mul(&h.inv())
    }

    /// Bi-invariant distance. Rotation angle of `g^{-1} h` on SO(3), arc
    /// length on U(1) and on Z_N (embedded as the N-th roots of unity).
    pub fn metric(&self, other: &GroupElement) -> Result<f64> {
        match (self.0, other.0) {
            (Repr::Cyclic { order, index: a }, Repr::Cyclic { order: o2, index: b }) if order == o2 => {
                let d = (a as i64 - b as i64).rem_euclid(order as i64) as u32;
                let steps = d.min(order - d);
                Ok(TAU * steps as f64 / order as f64)
            }
            (Repr::Circle { theta: a }, Repr::Circle { theta: b }) => {
                let d = wrap_angle(a - b);
                Ok(d.min(TAU - d))
            }
            (Repr::Rotation { .. }, Repr::Rotation { .. }) => {
                let rel = self.rotation_matrix().unwrap().transpose() * other.rotation_matrix().unwrap();
                Ok(rotation_angle(&rel))
            }
            _ => Err(mismatch(self.group(), other.group())),
        }
    }

    /// Distance to the identity.
    pub fn norm(&self) -> f64 {
        self.metric(&self.group().identity()).expect("same group")
    }

    /// Equality through the metric at [`EQ_TOL`].
    pub fn approx_eq(&self, other: &GroupElement) -> bool {
        matches!(self.metric(other), Ok(d) if d <= EQ_TOL)
    }

    /// Left action of a rotation on the sphere.
    pub fn act(&self, x: &SpherePoint) -> Result<SpherePoint> {
        let m = self
            .rotation_matrix()
            .ok_or_else(|| mismatch(Group::Rotation, self.group()))?;
        Ok(SpherePoint::from_vector(&(m * x.to_vector())))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Cyclic { order, index } => write!(f, "{index} mod {order}"),
            Repr::Circle { theta } => write!(f, "theta={theta}"),
            Repr::Rotation { alpha, beta, gamma } => write!(f, "zyz({alpha}, {beta}, {gamma})"),
        }
    }
}

fn canonical_euler(alpha: f64, beta: f64, gamma: f64) -> Repr {
    let beta = beta.clamp(0.0, PI);
    if beta < GIMBAL_EPS {
        Repr::Rotation {
            alpha: wrap_angle(alpha + gamma),
            beta: 0.0,
            gamma: 0.0,
        }
    } else if PI - beta < GIMBAL_EPS {
        Repr::Rotation {
            alpha: wrap_angle(alpha - gamma),
            beta: PI,
            gamma: 0.0,
        }
    } else {
        Repr::Rotation {
            alpha: wrap_angle(alpha),
            beta,
            gamma: wrap_angle(gamma),
        }
    }
}

pub(crate) fn rot_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub(crate) fn rot_y(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

/// `Rz(alpha) Ry(beta) Rz(gamma)`
pub fn euler_matrix(alpha: f64, beta: f64, gamma: f64) -> Matrix3<f64> {
    rot_z(alpha) * rot_y(beta) * rot_z(gamma)
}

fn matrix_to_euler(m: &Matrix3<f64>) -> (f64, f64, f64) {
    let sin_beta = m[(0, 2)].hypot(m[(1, 2)]);
    let beta = sin_beta.atan2(m[(2, 2)]);
    if beta < GIMBAL_EPS {
        // Rz(alpha + gamma)
        ((m[(1, 0)] - m[(0, 1)]).atan2(m[(0, 0)] + m[(1, 1)]), 0.0, 0.0)
    } else if PI - beta < GIMBAL_EPS {
        // Rz(alpha - gamma) Ry(pi)
        ((-(m[(1, 0)] + m[(0, 1)])).atan2(m[(1, 1)] - m[(0, 0)]), PI, 0.0)
    } else {
        let alpha = m[(1, 2)].atan2(m[(0, 2)]);
        let gamma = m[(2, 1)].atan2(-m[(2, 0)]);
        (alpha, beta, gamma)
    }
}

/// Rotation angle in `[0, pi]`, accurate near both ends.
pub fn rotation_angle(m: &Matrix3<f64>) -> f64 {
    let axial = Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
    let sin = 0.5 * axial.norm();
    let cos = 0.5 * (m.trace() - 1.0);
    sin.atan2(cos)
}

/// A point on the unit sphere in colatitude/longitude coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

impl SpherePoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        // Out-of-range colatitudes are reduced via the embedding.
        if (0.0..=PI).contains(&theta) {
            SpherePoint {
                theta,
                phi: wrap_angle(phi),
            }
        } else {
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            Self::from_vector(&Vector3::new(st * cp, st * sp, ct))
        }
    }

    /// Uniformly distributed point.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let theta = (2.0 * rng.random::<f64>() - 1.0).clamp(-1.0, 1.0).acos();
        Self::new(theta, rng.random::<f64>() * TAU)
    }

    pub fn north_pole() -> Self {
        SpherePoint { theta: 0.0, phi: 0.0 }
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let rho = v.x.hypot(v.y);
        SpherePoint {
            theta: rho.atan2(v.z),
            phi: wrap_angle(v.y.atan2(v.x)),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Great-circle distance.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        let (u, v) = (self.to_vector(), other.to_vector());
        u.cross(&v).norm().atan2(u.dot(&v))
    }

    /// A rotation carrying the north pole onto this point.
    pub fn lifting_rotation(&self) -> GroupElement {
        GroupElement::rotation(self.phi, self.theta, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_rotation() -> impl Strategy<Value = GroupElement> {
        (0.0..TAU, 0.0..PI, 0.0..TAU).prop_map(|(a, b, c)| GroupElement::rotation(a, b, c))
    }

    fn max_abs_diff(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn cyclic_law() {
        let a = GroupElement::cyclic(4, 1).unwrap();
        let b = GroupElement::cyclic(4, 3).unwrap();
        assert_eq!(a.mul(&b).unwrap().as_cyclic(), Some(0));
        assert_eq!(b.inv().as_cyclic(), Some(1));
        assert!(GroupElement::cyclic(0, 1).is_err());
    }

    #[test]
    fn circle_wraps() {
        let g = GroupElement::circle(PI);
        assert_eq!(g.mul(&g).unwrap().as_circle(), Some(0.0));
        let t = 1.3;
        let inv = GroupElement::circle(t).inv().as_circle().unwrap();
        assert!((inv - (TAU - t)).abs() < 1e-15);
        let d = GroupElement::circle(0.0).metric(&GroupElement::circle(PI / 2.0)).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_variants_rejected() {
        let a = GroupElement::circle(0.1);
        let b = Group::Rotation.identity();
        assert!(matches!(a.mul(&b), Err(Error::DomainMismatch { .. })));
        assert!(a.metric(&b).is_err());
        let c4 = GroupElement::cyclic(4, 1).unwrap();
        let c5 = GroupElement::cyclic(5, 1).unwrap();
        assert!(c4.mul(&c5).is_err());
        assert!(a.act(&SpherePoint::north_pole()).is_err());
    }

    #[test]
    fn composed_rotation_matches_matrix_product() {
        let g = GroupElement::rotation(PI / 2.0, 0.0, 0.0);
        let h = GroupElement::rotation(0.0, PI / 2.0, 0.0);
        let gh = g.mul(&h).unwrap();
        let expected = rot_z(PI / 2.0) * rot_y(PI / 2.0);
        assert!(max_abs_diff(&gh.rotation_matrix().unwrap(), &expected) < 1e-15);
        let (a, b, c) = gh.as_euler().unwrap();
        assert!((a - PI / 2.0).abs() < 1e-12 && (b - PI / 2.0).abs() < 1e-12 && c.abs() < 1e-12);
    }

    #[test]
    fn identity_metric_oracle() {
        let g = GroupElement::rotation(0.0, PI / 3.0, 0.0);
        let m = g.rotation_matrix().unwrap();
        let oracle = ((m.trace() - 1.0) / 2.0).acos();
        let d = Group::Rotation.identity().metric(&g).unwrap();
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn gimbal_folding() {
        let g = GroupElement::rotation(0.3, 0.0, 0.4);
        assert_eq!(g.as_euler(), Some((0.7, 0.0, 0.0)));
        let g = GroupElement::rotation(0.3, PI, 0.4);
        let (a, b, c) = g.as_euler().unwrap();
        assert!((a - wrap_angle(-0.1)).abs() < 1e-15 && b == PI && c == 0.0);
        // folding preserves the rotation
        assert!(max_abs_diff(&g.rotation_matrix().unwrap(), &euler_matrix(0.3, PI, 0.4)) < 1e-15);
    }

    #[test]
    fn out_of_range_beta_is_canonicalized() {
        let g = GroupElement::rotation(0.2, -0.5, 0.1);
        let (_, b, _) = g.as_euler().unwrap();
        assert!((0.0..=PI).contains(&b));
        assert!(max_abs_diff(&g.rotation_matrix().unwrap(), &euler_matrix(0.2, -0.5, 0.1)) < 1e-14);
    }

    #[test]
    fn act_on_north_pole() {
        let g = GroupElement::rotation(0.0, PI / 2.0, 0.0);
        let y = g.act(&SpherePoint::north_pole()).unwrap();
        let oracle = g.rotation_matrix().unwrap() * Vector3::new(0.0, 0.0, 1.0);
        assert!((y.to_vector() - oracle).norm() < 1e-15);
        assert!((y.theta() - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_point_ranges() {
        let x = SpherePoint::new(-0.3, 7.0);
        assert!((0.0..=PI).contains(&x.theta()) && (0.0..TAU).contains(&x.phi()));
        assert!((x.to_vector().norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_inverse_is_transpose(g in random_rotation()) {
            let m = g.rotation_matrix().unwrap();
            let mi = g.inv().rotation_matrix().unwrap();
            prop_assert!(max_abs_diff(&mi, &m.transpose()) < 1e-12);
            let e = g.mul(&g.inv()).unwrap();
            prop_assert!(e.norm() < 1e-12);
        }

        #[test]
        fn identity_is_neutral(g in random_rotation()) {
            let e = Group::Rotation.identity();
            prop_assert!(g.mul(&e).unwrap().metric(&g).unwrap() < 1e-12);
            prop_assert!(e.mul(&g).unwrap().metric(&g).unwrap() < 1e-12);
        }

        #[test]
        fn associativity(g in random_rotation(), h in random_rotation(), k in random_rotation()) {
            let left = g.mul(&h).unwrap().mul(&k).unwrap();
            let right = g.mul(&h.mul(&k).unwrap()).unwrap();
            prop_assert!(left.metric(&right).unwrap() < 1e-10);
        }

        #[test]
        fn metric_is_bi_invariant(g in random_rotation(), h in random_rotation(), k in random_rotation()) {
            let d = g.metric(&h).unwrap();
            let left = k.mul(&g).unwrap().metric(&k.mul(&h).unwrap()).unwrap();
            let right = g.mul(&k).unwrap().metric(&h.mul(&k).unwrap()).unwrap();
            prop_assert!((d - left).abs() < 1e-12);
            prop_assert!((d - right).abs() < 1e-12);
            prop_assert!((d - h.metric(&g).unwrap()).abs() < 1e-12);
            prop_assert!(g.metric(&g).unwrap() < 1e-12);
        }

        #[test]
        fn circle_metric_bi_invariant(a in 0.0..TAU, b in 0.0..TAU, c in 0.0..TAU) {
            let (g, h, k) = (GroupElement::circle(a), GroupElement::circle(b), GroupElement::circle(c));
            let d = g.metric(&h).unwrap();
            prop_assert!((d - k.mul(&g).unwrap().metric(&k.mul(&h).unwrap()).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn action_axioms(g in random_rotation(), h in random_rotation(), t in 0.0..PI, p in 0.0..TAU) {
            let x = SpherePoint::new(t, p);
            let e = Group::Rotation.identity();
            prop_assert!(e.act(&x).unwrap().distance(&x) < 1e-12);
            let lhs = g.act(&h.act(&x).unwrap()).unwrap();
            let rhs = g.mul(&h).unwrap().act(&x).unwrap();
            prop_assert!(lhs.distance(&rhs) < 1e-10);
        }

        #[test]
        fn transitivity(t in 0.0..PI, p in 0.0..TAU) {
            let x = SpherePoint::new(t, p);
            let g = x.lifting_rotation();
            prop_assert!(g.act(&SpherePoint::north_pole()).unwrap().distance(&x) < 1e-12);
        }
    }
}
