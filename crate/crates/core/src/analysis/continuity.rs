//! Continuity of the covariance along converging point pairs, via
//! `|Gamma(x1, y1) - Gamma(x2, y2)| <= sqrt(Gamma(x1, x1)) sqrt(E|T(y1) - T(y2)|^2)
//!  + sqrt(Gamma(y2, y2)) sqrt(E|T(x1) - T(x2)|^2)`.

use serde::{Deserialize, Serialize};

use super::{covariance_between, increment_between, Site};
use crate::error::{Error, Result};
use crate::spectrum::PowerSpectrum;

const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct PointPair {
    pub x: Site,
    pub y: Site,
}

impl PointPair {
    pub fn new(x: impl Into<Site>, y: impl Into<Site>) -> Self {
        PointPair { x: x.into(), y: y.into() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityStep {
    pub difference: f64,
    pub bound: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub steps: Vec<ContinuityStep>,
    /// Every step satisfies the inequality within `1e-9`.
    pub all_hold: bool,
    /// The bound never increases along the sequence.
    pub bound_nonincreasing: bool,
    pub final_bound: f64,
}

/// Checks the inequality between the limit pair and each pair of the
/// sequence.
pub fn covariance_continuity_check(spec: &PowerSpectrum, limit: &PointPair, sequence: &[PointPair]) -> Result<ContinuityReport> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty pair sequence".into()));
    }
    let (x1, y1) = (&limit.x, &limit.y);
    let g11 = covariance_between(spec, x1, y1)?;
    let var_x1 = covariance_between(spec, x1, x1)?.re.max(0.0);
    let mut steps = Vec::with_capacity(sequence.len());
    for pair in sequence {
        let (x2, y2) = (&pair.x, &pair.y);
        let difference = (g11 - covariance_between(spec, x2, y2)?).norm();
        let var_y2 = covariance_between(spec, y2, y2)?.re.max(0.0);
        let inc_y = increment_between(spec, y1, y2)?.max(0.0);
        let inc_x = increment_between(spec, x1, x2)?.max(0.0);
        let bound = var_x1.sqrt() * inc_y.sqrt() + var_y2.sqrt() * inc_x.sqrt();
        steps.push(ContinuityStep {
            difference,
            bound,
            holds: difference <= bound + SLACK,
        });
    }
    Ok(ContinuityReport {
        all_hold: steps.iter().all(|s| s.holds),
        bound_nonincreasing: steps.windows(2).all(|w| w[1].bound <= w[0].bound + SLACK),
        final_bound: steps.last().map_or(0.0, |s| s.bound),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Domain, Group, GroupElement, SpherePoint};

    fn shrinking(base: &GroupElement, k: usize) -> GroupElement {
        let t = 0.5f64.powi(k as i32);
        base.mul(&GroupElement::rotation(t, t, 2.0 * t)).unwrap()
    }

    #[test]
    fn shrinking_sequence_on_so3() {
        let spec = PowerSpectrum::from_profile(Domain::Group(Group::Rotation), 6, |l| 0.5f64.powi(l as i32)).unwrap();
        let x = GroupElement::rotation(0.3, 1.1, 2.0);
        let y = GroupElement::rotation(4.0, 0.4, 1.0);
        let seq: Vec<PointPair> = (1..=20).map(|k| PointPair::new(shrinking(&x, k), shrinking(&y, k))).collect();
        let r = covariance_continuity_check(&spec, &PointPair::new(x, y), &seq).unwrap();
        assert!(r.all_hold);
        assert!(r.bound_nonincreasing);
        assert!(r.final_bound < 1e-4);
    }

    #[test]
    fn coincident_and_constant() {
        let spec = PowerSpectrum::geometric(Domain::Group(Group::Rotation), 3, 0.5).unwrap();
        let x = GroupElement::rotation(0.3, 1.1, 2.0);
        let pair = PointPair::new(x, x);
        let r = covariance_continuity_check(&spec, &pair, std::slice::from_ref(&pair)).unwrap();
        assert_eq!((r.steps[0].difference, r.steps[0].bound), (0.0, 0.0));
        let constant = PowerSpectrum::delta(Domain::Sphere, 2, 0).unwrap();
        let a = PointPair::new(SpherePoint::new(0.1, 0.2), SpherePoint::new(1.0, 2.0));
        let b = PointPair::new(SpherePoint::new(0.15, 0.2), SpherePoint::new(1.0, 2.1));
        let r = covariance_continuity_check(&constant, &a, &[b]).unwrap();
        assert!(r.steps[0].difference < 1e-12 && r.all_hold);
    }
}
