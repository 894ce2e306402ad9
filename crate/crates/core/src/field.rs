//! Band-limited fields: Gaussian sampling, synthesis, analysis and
//! projection onto isotypic components.
//!
//! A group field is stored through its coefficients
//! `T_hat^pi_ij = int T(h) conj(pi_ij(h)) dh` and synthesized as
//! `T(g) = sum_pi d_pi sum_ij T_hat^pi_ij pi_ij(g)`. A sphere field is stored
//! as `a_lm = int T(x) conj(Y_lm(x)) dx` with `T = sum a_lm Y_lm`.

use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::group::{Domain, Group, GroupElement, SpherePoint};
use crate::irreps::{character, matrices_for, rotation_matrices, sph_harmonics_all, IrrepLabel};
use crate::quadrature::{GroupRule, QuadratureRule, SphereRule};
use crate::spectrum::{PowerSpectrum, SCHEMA_VERSION};
use crate::wigner::legendre_all;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficient matrix of one label: `d x d` on a group, `(2l+1) x 1`
/// (indexed by `m + l`) on the sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientBlock {
    pub label: IrrepLabel,
    pub values: Array2<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldCoefficients {
    domain: Domain,
    blocks: Vec<CoefficientBlock>,
}

impl FieldCoefficients {
    pub fn zeros(domain: Domain, labels: &[IrrepLabel]) -> Result<Self> {
        let group = domain.acting_group();
        let mut blocks = Vec::with_capacity(labels.len());
        for &label in labels {
            label.check_group(group)?;
            if blocks.iter().any(|b: &CoefficientBlock| b.label == label) {
                return Err(Error::InvalidLabel(format!("duplicate label {label}")));
            }
            blocks.push(CoefficientBlock {
                label,
                values: Array2::zeros(block_shape(domain, label)),
            });
        }
        Ok(FieldCoefficients { domain, blocks })
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn blocks(&self) -> &[CoefficientBlock] {
        &self.blocks
    }

    pub fn labels(&self) -> Vec<IrrepLabel> {
        self.blocks.iter().map(|b| b.label).collect()
    }

    pub fn get(&self, label: IrrepLabel) -> Option<&Array2<Complex64>> {
        self.blocks.iter().find(|b| b.label == label).map(|b| &b.values)
    }

    pub fn get_mut(&mut self, label: IrrepLabel) -> Option<&mut Array2<Complex64>> {
        self.blocks.iter_mut().find(|b| b.label == label).map(|b| &mut b.values)
    }

    pub fn max_band(&self) -> usize {
        let group = self.domain.acting_group();
        self.blocks.iter().map(|b| b.label.band(group)).max().unwrap_or(0)
    }

    /// All entries, block by block in row-major order.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect()
    }

    /// Largest entrywise deviation; labels missing on one side count as zero.
    pub fn max_abs_diff(&self, other: &FieldCoefficients) -> f64 {
        let mut worst: f64 = 0.0;
        for b in &self.blocks {
            match other.get(b.label) {
                Some(o) => {
                    for (x, y) in b.values.iter().zip(o.iter()) {
                        worst = worst.max((x - y).norm());
                    }
                }
                None => worst = worst.max(b.values.iter().map(|z| z.norm()).fold(0.0, f64::max)),
            }
        }
        for b in &other.blocks {
            if self.get(b.label).is_none() {
                worst = worst.max(b.values.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// `sum_pi d_pi sum_ij |T_hat_ij|^2` on groups, `sum |a_lm|^2` on the
    /// sphere: the squared L2 norm of the synthesized field.
    pub fn parseval_norm_sq(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                let weight = match self.domain {
                    Domain::Group(_) => b.label.dimension() as f64,
                    Domain::Sphere => 1.0,
                };
                weight * b.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
            })
            .sum()
    }

    /// Keeps the listed labels and zeroes the rest.
    pub fn restricted_to(&self, keep: &[IrrepLabel]) -> FieldCoefficients {
        let mut out = self.clone();
        for b in out.blocks.iter_mut() {
            if !keep.contains(&b.label) {
                b.values.fill(ZERO);
            }
        }
        out
    }

    pub fn to_file(&self) -> CoefficientsFile {
        CoefficientsFile {
            schema_version: SCHEMA_VERSION,
            group: self.domain.tag().to_string(),
            n: self.domain.order(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockRecord {
                    label: b.label.index(),
                    rows: b.values.nrows(),
                    cols: b.values.ncols(),
                    re: b.values.iter().map(|z| z.re).collect(),
                    im: b.values.iter().map(|z| z.im).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: &CoefficientsFile) -> Result<Self> {
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!("unsupported schema_version {}", file.schema_version)));
        }
        let domain = Domain::from_tag(&file.group, file.n)?;
        let group = domain.acting_group();
        let labels = file
            .blocks
            .iter()
            .map(|b| IrrepLabel::from_index(group, b.label))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Self::zeros(domain, &labels)?;
        for (rec, block) in file.blocks.iter().zip(out.blocks.iter_mut()) {
            let shape = block.values.dim();
            if (rec.rows, rec.cols) != shape || rec.re.len() != rec.rows * rec.cols || rec.im.len() != rec.re.len() {
                return Err(Error::InvalidArgument(format!(
                    "block {} has shape {}x{} with {} values, expected {}x{}",
                    block.label,
                    rec.rows,
                    rec.cols,
                    rec.re.len(),
                    shape.0,
                    shape.1
                )));
            }
            for (slot, (re, im)) in block.values.iter_mut().zip(rec.re.iter().zip(&rec.im)) {
                *slot = Complex64::new(*re, *im);
            }
        }
        Ok(out)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file: CoefficientsFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        Self::from_file(&file)
    }
}

fn block_shape(domain: Domain, label: IrrepLabel) -> (usize, usize) {
    let d = label.dimension();
    match domain {
        Domain::Group(_) => (d, d),
        Domain::Sphere => (d, 1),
    }
}

/// On-disk coefficient document; each block stores row-major real and
/// imaginary parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsFile {
    pub schema_version: u32,
    pub group: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockRecord {
    pub label: i64,
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

/// Whether sampled coefficients are constrained to give a real field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Complex,
    Real,
}

/// Where a sample's randomness came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub master_seed: u64,
    pub replicate: u64,
}

impl SeedRecord {
    /// ChaCha stream `replicate` under key `master_seed`; independent of
    /// the order in which replicates are generated.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.replicate);
        rng
    }
}

/// One realization of a band-limited field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSample {
    coefficients: FieldCoefficients,
    seed: SeedRecord,
    structure: Structure,
}

impl FieldSample {
    pub fn from_coefficients(coefficients: FieldCoefficients, seed: SeedRecord, structure: Structure) -> Self {
        FieldSample {
            coefficients,
            seed,
            structure,
        }
    }

    pub fn coefficients(&self) -> &FieldCoefficients {
        &self.coefficients
    }

    pub fn seed(&self) -> SeedRecord {
        self.seed
    }

    pub fn replicate(&self) -> u64 {
        self.seed.replicate
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn domain(&self) -> Domain {
        self.coefficients.domain
    }
}

fn complex_normal(rng: &mut ChaCha8Rng, sd: f64) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    let y: f64 = StandardNormal.sample(rng);
    Complex64::new(x, y) * (sd * std::f64::consts::FRAC_1_SQRT_2)
}

fn real_normal(rng: &mut ChaCha8Rng, sd: f64) -> Complex64 {
    let x: f64 = StandardNormal.sample(rng);
    Complex64::new(sd * x, 0.0)
}

/// Independent centered complex Gaussian coefficients with
/// `E|T_hat^pi_ij|^2 = alpha_pi / d_pi^2` on groups and `E|a_lm|^2 = alpha_l`
/// on the sphere. With [`Structure::Real`] conjugate coefficients are tied
/// so the field is real; this needs a conjugation-symmetric spectrum.
pub fn sample_gaussian(spec: &PowerSpectrum, master_seed: u64, replicate: u64, structure: Structure) -> Result<FieldSample> {
    if structure == Structure::Real && !spec.is_conjugation_symmetric() {
        return Err(Error::InvalidSpectrum(
            "a real field needs equal weights on conjugate labels".into(),
        ));
    }
    let seed = SeedRecord { master_seed, replicate };
    let mut rng = seed.rng();
    let domain = spec.domain();
    let mut coeffs = FieldCoefficients::zeros(domain, &spec.labels())?;
    match structure {
        Structure::Complex => {
            for block in coeffs.blocks.iter_mut() {
                let sd = coefficient_sd(domain, spec, block.label);
                for z in block.values.iter_mut() {
                    *z = complex_normal(&mut rng, sd);
                }
            }
        }
        Structure::Real => fill_real(&mut coeffs, spec, &mut rng),
    }
    Ok(FieldSample {
        coefficients: coeffs,
        seed,
        structure,
    })
}

fn coefficient_sd(domain: Domain, spec: &PowerSpectrum, label: IrrepLabel) -> f64 {
    let alpha = spec.alpha(label);
    match domain {
        Domain::Group(_) => alpha.sqrt() / label.dimension() as f64,
        Domain::Sphere => alpha.sqrt(),
    }
}

fn fill_real(coeffs: &mut FieldCoefficients, spec: &PowerSpectrum, rng: &mut ChaCha8Rng) {
    let domain = coeffs.domain;
    match domain {
        Domain::Group(Group::Circle) | Domain::Group(Group::Cyclic { .. }) => {
            let group = domain.acting_group();
            let labels = coeffs.labels();
            for label in labels {
                let partner = label.conjugate(group);
                let sd = coefficient_sd(domain, spec, label);
                if partner == label {
                    coeffs.get_mut(label).unwrap()[(0, 0)] = real_normal(rng, sd);
                } else if is_canonical(label, partner) {
                    let z = complex_normal(rng, sd);
                    coeffs.get_mut(label).unwrap()[(0, 0)] = z;
                    if let Some(p) = coeffs.get_mut(partner) {
                        p[(0, 0)] = z.conj();
                    }
                }
            }
        }
        Domain::Group(Group::Rotation) => {
            // T_hat_{-m,-m'} = (-1)^{m-m'} conj(T_hat_{m m'})
            for block in coeffs.blocks.iter_mut() {
                let sd = coefficient_sd(domain, spec, block.label);
                let dim = block.label.dimension();
                for i in 0..dim {
                    for j in 0..dim {
                        let (pi, pj) = (dim - 1 - i, dim - 1 - j);
                        let flat = i * dim + j;
                        let partner = pi * dim + pj;
                        if flat == partner {
                            block.values[(i, j)] = real_normal(rng, sd);
                        } else if flat < partner {
                            let z = complex_normal(rng, sd);
                            block.values[(i, j)] = z;
                            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                            block.values[(pi, pj)] = z.conj() * sign;
                        }
                    }
                }
            }
        }
        Domain::Sphere => {
            // a_{l,-m} = (-1)^m conj(a_lm)
            for block in coeffs.blocks.iter_mut() {
                let sd = coefficient_sd(domain, spec, block.label);
                let l = block.label.index() as usize;
                block.values[(l, 0)] = real_normal(rng, sd);
                for m in 1..=l {
                    let z = complex_normal(rng, sd);
                    block.values[(l + m, 0)] = z;
                    block.values[(l - m, 0)] = if m % 2 == 0 { z.conj() } else { -z.conj() };
                }
            }
        }
    }
}

fn is_canonical(label: IrrepLabel, partner: IrrepLabel) -> bool {
    match (label, partner) {
        (IrrepLabel::CircleFreq(n), _) => n > 0,
        (IrrepLabel::CyclicFreq(n), IrrepLabel::CyclicFreq(p)) => n < p,
        _ => true,
    }
}

/// Basis values at a fixed set of points, laid out like
/// [`FieldCoefficients::flatten`]: `d_pi pi_ij(g)` on groups and `Y_lm(x)`
/// on the sphere. Evaluating many fields at the same points is then a dot
/// product per point.
#[derive(Clone, Debug)]
pub struct BasisTable {
    domain: Domain,
    labels: Vec<IrrepLabel>,
    scales: Vec<f64>,
    rows: Vec<Vec<Complex64>>,
}

impl BasisTable {
    pub fn for_group(group: Group, labels: &[IrrepLabel], points: &[GroupElement]) -> Result<Self> {
        let mut rows = Vec::with_capacity(points.len());
        let domain = Domain::Group(group);
        for g in points {
            if g.group() != group {
                return Err(mismatch(group, g.group()));
            }
            let mats = matrices_for(labels, g)?;
            let mut row = Vec::new();
            for (label, m) in labels.iter().zip(mats) {
                let d = label.dimension() as f64;
                row.extend(m.iter().map(|z| z * d));
            }
            rows.push(row);
        }
        let scales = labels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.dimension() as f64, l.dimension() * l.dimension()))
            .collect();
        Ok(BasisTable {
            domain,
            labels: labels.to_vec(),
            scales,
            rows,
        })
    }

    pub fn for_sphere(labels: &[IrrepLabel], points: &[SpherePoint]) -> Result<Self> {
        for label in labels {
            label.check_group(Group::Rotation)?;
        }
        let lmax = labels.iter().map(|l| l.index() as usize).max().unwrap_or(0);
        let rows = points
            .iter()
            .map(|x| {
                let all = sph_harmonics_all(lmax, x);
                labels
                    .iter()
                    .flat_map(|l| {
                        let l = l.index() as usize;
                        all[l * l..(l + 1) * (l + 1)].to_vec()
                    })
                    .collect()
            })
            .collect();
        let scales = labels.iter().flat_map(|l| std::iter::repeat_n(1.0, l.dimension())).collect();
        Ok(BasisTable {
            domain: Domain::Sphere,
            labels: labels.to_vec(),
            scales,
            rows,
        })
    }

    /// Table matching the nodes of a rule on either domain.
    pub fn for_group_rule(rule: &GroupRule, labels: &[IrrepLabel]) -> Result<Self> {
        Self::for_group(rule.domain().as_group()?, labels, rule.nodes())
    }

    pub fn for_sphere_rule(rule: &SphereRule, labels: &[IrrepLabel]) -> Result<Self> {
        Self::for_sphere(labels, rule.nodes())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn labels(&self) -> &[IrrepLabel] {
        &self.labels
    }

    pub fn num_points(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, coeffs: &FieldCoefficients) -> Result<()> {
        if coeffs.domain != self.domain {
            return Err(mismatch(self.domain, coeffs.domain));
        }
        if coeffs.labels() != self.labels {
            return Err(Error::InvalidArgument("coefficient labels differ from the basis table".into()));
        }
        Ok(())
    }

    /// Field values at every point of the table.
    pub fn synthesize(&self, coeffs: &FieldCoefficients) -> Result<Vec<Complex64>> {
        self.check(coeffs)?;
        let flat = coeffs.flatten();
        Ok(self.rows.iter().map(|row| dot(row, &flat)).collect())
    }

    /// Field value at one point of the table.
    pub fn synthesize_at(&self, coeffs: &FieldCoefficients, point: usize) -> Result<Complex64> {
        self.check(coeffs)?;
        Ok(dot(&self.rows[point], &coeffs.flatten()))
    }

    /// Faster variant on a pre-flattened coefficient vector.
    pub fn synthesize_flat(&self, flat: &[Complex64]) -> Vec<Complex64> {
        self.rows.iter().map(|row| dot(row, flat)).collect()
    }

    /// Start of each label's block in the flattened layout, plus the total.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = vec![0];
        for l in &self.labels {
            let d = l.dimension();
            let size = match self.domain {
                Domain::Group(_) => d * d,
                Domain::Sphere => d,
            };
            out.push(out.last().unwrap() + size);
        }
        out
    }

    /// Isotypic component values: `[point][label]`.
    pub fn component_values(&self, flat: &[Complex64]) -> Vec<Vec<Complex64>> {
        let offsets = self.offsets();
        self.rows
            .iter()
            .map(|row| offsets.windows(2).map(|w| dot(&row[w[0]..w[1]], &flat[w[0]..w[1]])).collect())
            .collect()
    }

    /// Gram matrix of the normalized basis (`sqrt(d_pi) pi_ij` on groups,
    /// `Y_lm` on the sphere) under the given quadrature weights.
    pub fn gram(&self, weights: &[f64]) -> Result<Array2<Complex64>> {
        if weights.len() != self.rows.len() {
            return Err(Error::InvalidArgument("one weight per point is required".into()));
        }
        let cols = self.scales.len();
        let b = Array2::from_shape_fn((self.rows.len(), cols), |(i, j)| {
            self.rows[i][j] * (weights[i] / self.scales[j]).sqrt()
        });
        Ok(b.t().mapv(|z| z.conj()).dot(&b))
    }

    /// Quadrature inner products against every basis function, rescaled to
    /// coefficients.
    fn analyze_weighted(&self, values: &[Complex64], weights: &[f64]) -> Vec<Complex64> {
        let mut acc = vec![ZERO; self.scales.len()];
        for ((row, v), w) in self.rows.iter().zip(values).zip(weights) {
            let vw = v * *w;
            for (a, b) in acc.iter_mut().zip(row) {
                *a += vw * b.conj();
            }
        }
        for (a, s) in acc.iter_mut().zip(&self.scales) {
            *a /= *s;
        }
        acc
    }

    fn unflatten(&self, flat: &[Complex64]) -> Result<FieldCoefficients> {
        let mut out = FieldCoefficients::zeros(self.domain, &self.labels)?;
        let mut it = flat.iter();
        for b in out.blocks.iter_mut() {
            for z in b.values.iter_mut() {
                *z = *it.next().expect("layout");
            }
        }
        Ok(out)
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `T(g)` for a group field.
pub fn evaluate(sample: &FieldSample, g: &GroupElement) -> Result<Complex64> {
    evaluate_coefficients(&sample.coefficients, g)
}

pub fn evaluate_coefficients(coeffs: &FieldCoefficients, g: &GroupElement) -> Result<Complex64> {
    let group = coeffs.domain.as_group()?;
    if g.group() != group {
        return Err(mismatch(group, g.group()));
    }
    let labels = coeffs.labels();
    let mats = matrices_for(&labels, g)?;
    Ok(coeffs
        .blocks
        .iter()
        .zip(mats)
        .map(|(b, m)| dot_entries(&b.values, &m) * b.label.dimension() as f64)
        .sum())
}

fn dot_entries(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `T(x)` for a sphere field.
pub fn evaluate_on_sphere(sample: &FieldSample, x: &SpherePoint) -> Result<Complex64> {
    evaluate_coefficients_on_sphere(&sample.coefficients, x)
}

pub fn evaluate_coefficients_on_sphere(coeffs: &FieldCoefficients, x: &SpherePoint) -> Result<Complex64> {
    if coeffs.domain != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, coeffs.domain));
    }
    let lmax = coeffs.max_band();
    let ys = sph_harmonics_all(lmax, x);
    Ok(coeffs
        .blocks
        .iter()
        .map(|b| {
            let l = b.label.index() as usize;
            b.values.iter().zip(&ys[l * l..(l + 1) * (l + 1)]).map(|(a, y)| a * y).sum::<Complex64>()
        })
        .sum())
}

/// Coefficients of the lifted field `g -> T(g x)` on SO(3).
pub fn lift_to_group(coeffs: &FieldCoefficients, base: &SpherePoint) -> Result<FieldCoefficients> {
    if coeffs.domain != Domain::Sphere {
        return Err(mismatch(Domain::Sphere, coeffs.domain));
    }
    let labels = coeffs.labels();
    let mut out = FieldCoefficients::zeros(Domain::Group(Group::Rotation), &labels)?;
    let lmax = coeffs.max_band();
    let dx = rotation_matrices(lmax, &base.lifting_rotation())?;
    for (src, dst) in coeffs.blocks.iter().zip(out.blocks.iter_mut()) {
        let l = src.label.index() as usize;
        let dim = 2 * l + 1;
        let scale = 1.0 / (dim as f64).sqrt();
        // north-pole lift: T_hat_{-m, 0} = (-1)^m a_lm / sqrt(2l+1)
        let mut north = Array2::<Complex64>::zeros((dim, dim));
        for i in 0..dim {
            let m = i as i64 - l as i64;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            north[((l as i64 - m) as usize, l)] = src.values[(i, 0)] * (sign * scale);
        }
        // right translation by the base rotation: T_hat' = T_hat D(g_x)^T
        dst.values = north.dot(&dx[l].t());
    }
    Ok(out)
}

/// Metadata attached to an analysis when the rule cannot resolve the
/// requested labels exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AliasingWarning {
    pub rule_band: usize,
    pub requested_band: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct Analysis {
    pub coefficients: FieldCoefficients,
    pub aliasing: Option<AliasingWarning>,
}

fn aliasing_check<P>(rule: &QuadratureRule<P>, labels: &[IrrepLabel]) -> Option<AliasingWarning> {
    let group = rule.domain().acting_group();
    if group.is_discrete() {
        return None;
    }
    let requested = labels.iter().map(|l| l.band(group)).max().unwrap_or(0);
    (requested > rule.band_limit()).then(|| AliasingWarning {
        rule_band: rule.band_limit(),
        requested_band: requested,
        message: format!(
            "quadrature of band {} cannot resolve labels up to band {}; coefficients are aliased",
            rule.band_limit(),
            requested
        ),
    })
}

/// Coefficients `int T conj(pi_ij)` (or `int T conj(Y_lm)`) by quadrature
/// from values sampled at the rule's nodes.
pub fn analyze(values: &[Complex64], rule: &GroupRule, labels: &[IrrepLabel]) -> Result<Analysis> {
    check_len(values, rule.len())?;
    let table = BasisTable::for_group_rule(rule, labels)?;
    analyze_with(values, rule, &table)
}

pub fn analyze_sphere(values: &[Complex64], rule: &SphereRule, labels: &[IrrepLabel]) -> Result<Analysis> {
    check_len(values, rule.len())?;
    let table = BasisTable::for_sphere_rule(rule, labels)?;
    analyze_with(values, rule, &table)
}

/// Analysis with a precomputed table over the rule's nodes.
pub fn analyze_with<P>(values: &[Complex64], rule: &QuadratureRule<P>, table: &BasisTable) -> Result<Analysis> {
    check_len(values, rule.len())?;
    if table.num_points() != rule.len() || table.domain() != rule.domain() {
        return Err(Error::InvalidArgument("basis table does not match the quadrature rule".into()));
    }
    let flat = table.analyze_weighted(values, rule.weights());
    Ok(Analysis {
        coefficients: table.unflatten(&flat)?,
        aliasing: aliasing_check(rule, table.labels()),
    })
}

fn check_len(values: &[Complex64], n: usize) -> Result<()> {
    if values.len() != n {
        return Err(Error::InvalidArgument(format!("expected {n} values on the grid, got {}", values.len())));
    }
    Ok(())
}

/// Projection onto the isotypic component of `label`, evaluated at the
/// rule's nodes through the character kernel
/// `T^pi(g) = d_pi int T(h) chi_pi(h^{-1} g) dh`.
pub fn project(values: &[Complex64], rule: &GroupRule, label: IrrepLabel) -> Result<(Vec<Complex64>, Option<AliasingWarning>)> {
    check_len(values, rule.len())?;
    let group = rule.domain().as_group()?;
    label.check_group(group)?;
    let d = label.dimension() as f64;
    let nodes = rule.nodes();
    let inverses: Vec<GroupElement> = nodes.iter().map(|h| h.inv()).collect();
    let mut out = Vec::with_capacity(nodes.len());
    for g in nodes {
        let mut acc = ZERO;
        for ((hinv, v), w) in inverses.iter().zip(values).zip(rule.weights()) {
            acc += v * *w * character(label, &hinv.mul(g)?)?;
        }
        out.push(acc * d);
    }
    Ok((out, aliasing_check(rule, &[label])))
}

/// Sphere projection through the zonal kernel
/// `T^l(x) = (2l + 1) int T(y) P_l(x . y) dy`.
pub fn project_sphere(values: &[Complex64], rule: &SphereRule, label: IrrepLabel) -> Result<(Vec<Complex64>, Option<AliasingWarning>)> {
    check_len(values, rule.len())?;
    label.check_group(Group::Rotation)?;
    let l = label.index() as usize;
    let vectors: Vec<_> = rule.nodes().iter().map(|x| x.to_vector()).collect();
    let mut out = Vec::with_capacity(vectors.len());
    for x in &vectors {
        let mut acc = ZERO;
        for ((y, v), w) in vectors.iter().zip(values).zip(rule.weights()) {
            let p = legendre_all(l, x.dot(y).clamp(-1.0, 1.0))[l];
            acc += v * (*w * p);
        }
        out.push(acc * (2 * l + 1) as f64);
    }
    Ok((out, aliasing_check(rule, &[label])))
}

/// The same projection computed as analysis followed by synthesis of the
/// single label.
pub fn project_via_coefficients(values: &[Complex64], rule: &GroupRule, label: IrrepLabel) -> Result<Vec<Complex64>> {
    let table = BasisTable::for_group_rule(rule, &[label])?;
    let analysis = analyze_with(values, rule, &table)?;
    table.synthesize(&analysis.coefficients)
}

/// Sample restricted to the first `n` labels of its enumeration.
pub fn partial_sum(sample: &FieldSample, n: usize) -> FieldSample {
    let labels = sample.coefficients.labels();
    let keep: Vec<IrrepLabel> = labels.into_iter().take(n).collect();
    FieldSample {
        coefficients: sample.coefficients.restricted_to(&keep),
        seed: sample.seed,
        structure: sample.structure,
    }
}

/// Isotypic component of one label, as a sample.
pub fn component(sample: &FieldSample, label: IrrepLabel) -> FieldSample {
    FieldSample {
        coefficients: sample.coefficients.restricted_to(&[label]),
        seed: sample.seed,
        structure: sample.structure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irreps::{labels_in_band, matrix};
    use crate::quadrature::{haar_quadrature, sphere_quadrature};
    use std::f64::consts::{PI, TAU};

    fn so3() -> Domain {
        Domain::Group(Group::Rotation)
    }

    fn random_coeffs(domain: Domain, band: usize, seed: u64) -> FieldCoefficients {
        let spec = PowerSpectrum::geometric(domain, band, 0.8).unwrap();
        sample_gaussian(&spec, seed, 0, Structure::Complex).unwrap().coefficients
    }

    #[test]
    fn zero_spectrum_gives_zero_field() {
        let spec = PowerSpectrum::zero(so3(), 3).unwrap();
        let s = sample_gaussian(&spec, 1, 2, Structure::Real).unwrap();
        let g = GroupElement::rotation(0.2, 0.3, 0.4);
        assert_eq!(evaluate(&s, &g).unwrap(), ZERO);
    }

    #[test]
    fn single_coefficient_basis_case() {
        let labels = labels_in_band(Group::Rotation, 2).unwrap();
        let mut c = FieldCoefficients::zeros(so3(), &labels).unwrap();
        c.get_mut(IrrepLabel::RotationDegree(2)).unwrap()[(0, 0)] = Complex64::new(1.0, 0.0);
        let g = GroupElement::rotation(1.0, 0.7, 0.2);
        let want = matrix(IrrepLabel::RotationDegree(2), &g).unwrap().entries[(0, 0)] * 5.0;
        assert!((evaluate_coefficients(&c, &g).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic_per_replicate() {
        let spec = PowerSpectrum::geometric(so3(), 4, 0.5).unwrap();
        let a = sample_gaussian(&spec, 42, 7, Structure::Complex).unwrap();
        let b = sample_gaussian(&spec, 42, 7, Structure::Complex).unwrap();
        let c = sample_gaussian(&spec, 42, 8, Structure::Complex).unwrap();
        assert_eq!(a, b);
        assert!(a.coefficients().max_abs_diff(c.coefficients()) > 0.0);
    }

    #[test]
    fn real_structure_gives_real_fields() {
        let cases = [
            PowerSpectrum::geometric(so3(), 5, 0.7).unwrap(),
            PowerSpectrum::geometric(Domain::Group(Group::Circle), 6, 0.7).unwrap(),
            PowerSpectrum::geometric(Domain::Group(Group::Cyclic { order: 6 }), 6, 0.7).unwrap(),
            PowerSpectrum::geometric(Domain::Group(Group::Cyclic { order: 7 }), 7, 0.7).unwrap(),
        ];
        for spec in cases {
            let group = spec.group();
            let s = sample_gaussian(&spec, 3, 1, Structure::Real).unwrap();
            let rule = haar_quadrature(group, 5).unwrap();
            for g in rule.nodes().iter().step_by(7) {
                assert!(evaluate(&s, g).unwrap().im.abs() < 1e-10);
            }
        }
        let spec = PowerSpectrum::geometric(Domain::Sphere, 6, 0.7).unwrap();
        let s = sample_gaussian(&spec, 3, 1, Structure::Real).unwrap();
        for x in sphere_quadrature(6).nodes() {
            assert!(evaluate_on_sphere(&s, x).unwrap().im.abs() < 1e-10);
        }
    }

    #[test]
    fn real_structure_rejects_asymmetric_spectrum() {
        let spec = PowerSpectrum::new(Domain::Group(Group::Circle), 1, [(IrrepLabel::CircleFreq(1), 1.0)]).unwrap();
        assert!(sample_gaussian(&spec, 0, 0, Structure::Real).is_err());
    }

    #[test]
    fn constant_field_analysis() {
        let rule = haar_quadrature(Group::Rotation, 3).unwrap();
        let labels = labels_in_band(Group::Rotation, 3).unwrap();
        let c = Complex64::new(1.5, -0.5);
        let a = analyze(&vec![c; rule.len()], &rule, &labels).unwrap();
        assert!(a.aliasing.is_none());
        let mut want = FieldCoefficients::zeros(so3(), &labels).unwrap();
        want.get_mut(IrrepLabel::RotationDegree(0)).unwrap()[(0, 0)] = c;
        assert!(a.coefficients.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn cross_label_analysis_vanishes() {
        let rule = haar_quadrature(Group::Rotation, 3).unwrap();
        let values: Vec<Complex64> = rule
            .nodes()
            .iter()
            .map(|g| matrix(IrrepLabel::RotationDegree(1), g).unwrap().entries[(0, 0)])
            .collect();
        let a = analyze(&values, &rule, &[IrrepLabel::RotationDegree(2)]).unwrap();
        assert!(a.coefficients.flatten().iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn round_trip_so3() {
        let band = 8;
        let rule = haar_quadrature(Group::Rotation, band).unwrap();
        let coeffs = random_coeffs(so3(), band, 11);
        let table = BasisTable::for_group_rule(&rule, &coeffs.labels()).unwrap();
        let values = table.synthesize(&coeffs).unwrap();
        let a = analyze_with(&values, &rule, &table).unwrap();
        assert!(a.coefficients.max_abs_diff(&coeffs) < 1e-9);
        assert!((rule.l2_norm_sq(&values) - coeffs.parseval_norm_sq()).abs() < 1e-8);
        // pointwise: table vs direct evaluation
        for (g, v) in rule.nodes().iter().zip(&values).step_by(97) {
            assert!((evaluate_coefficients(&coeffs, g).unwrap() - v).norm() < 1e-8);
        }
    }

    #[test]
    fn round_trip_sphere() {
        let band = 6;
        let rule = sphere_quadrature(band);
        let coeffs = random_coeffs(Domain::Sphere, band, 5);
        let table = BasisTable::for_sphere_rule(&rule, &coeffs.labels()).unwrap();
        let values = table.synthesize(&coeffs).unwrap();
        let a = analyze_with(&values, &rule, &table).unwrap();
        assert!(a.coefficients.max_abs_diff(&coeffs) < 1e-9);
        assert!((rule.l2_norm_sq(&values) - coeffs.parseval_norm_sq()).abs() < 1e-8);
    }

    #[test]
    fn under_banded_rule_reports_aliasing() {
        let rule = haar_quadrature(Group::Rotation, 2).unwrap();
        let labels = labels_in_band(Group::Rotation, 4).unwrap();
        let a = analyze(&vec![ZERO; rule.len()], &rule, &labels).unwrap();
        let w = a.aliasing.expect("aliasing flagged");
        assert_eq!((w.rule_band, w.requested_band), (2, 4));
    }

    #[test]
    fn projection_laws() {
        let band = 3;
        let rule = haar_quadrature(Group::Rotation, band).unwrap();
        let coeffs = random_coeffs(so3(), band, 9);
        let table = BasisTable::for_group_rule(&rule, &coeffs.labels()).unwrap();
        let values = table.synthesize(&coeffs).unwrap();
        let mut total = vec![ZERO; values.len()];
        for label in coeffs.labels() {
            let (p, warn) = project(&values, &rule, label).unwrap();
            assert!(warn.is_none());
            let (pp, _) = project(&p, &rule, label).unwrap();
            let via = project_via_coefficients(&values, &rule, label).unwrap();
            for i in 0..p.len() {
                assert!((pp[i] - p[i]).norm() < 1e-9);
                assert!((via[i] - p[i]).norm() < 1e-9);
                total[i] += p[i];
            }
            for other in coeffs.labels().into_iter().filter(|l| *l != label) {
                let (cross, _) = project(&p, &rule, other).unwrap();
                assert!(cross.iter().all(|z| z.norm() < 1e-9));
            }
        }
        for (t, v) in total.iter().zip(&values) {
            assert!((t - v).norm() < 1e-8);
        }
        let (zero, _) = project(&vec![Complex64::new(2.0, 0.0); rule.len()], &rule, IrrepLabel::RotationDegree(2)).unwrap();
        assert!(zero.iter().all(|z| z.norm() < 1e-9));
    }

    #[test]
    fn sphere_projection_matches_coefficients() {
        let band = 4;
        let rule = sphere_quadrature(band);
        let coeffs = random_coeffs(Domain::Sphere, band, 2);
        let table = BasisTable::for_sphere_rule(&rule, &coeffs.labels()).unwrap();
        let values = table.synthesize(&coeffs).unwrap();
        let label = IrrepLabel::RotationDegree(3);
        let (p, _) = project_sphere(&values, &rule, label).unwrap();
        let want = table.synthesize(&coeffs.restricted_to(&[label])).unwrap();
        for (a, b) in p.iter().zip(&want) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn lift_agrees_with_sphere_evaluation() {
        let coeffs = random_coeffs(Domain::Sphere, 5, 77);
        let base = SpherePoint::new(1.1, 4.0);
        let lifted = lift_to_group(&coeffs, &base).unwrap();
        for g in [
            GroupElement::rotation(0.1, 0.2, 0.3),
            GroupElement::rotation(3.0, 2.0, 1.0),
            Group::Rotation.identity(),
        ] {
            let on_sphere = evaluate_coefficients_on_sphere(&coeffs, &g.act(&base).unwrap()).unwrap();
            let on_group = evaluate_coefficients(&lifted, &g).unwrap();
            assert!((on_sphere - on_group).norm() < 1e-10);
        }
    }

    #[test]
    fn partial_sums() {
        let spec = PowerSpectrum::geometric(so3(), 4, 0.5).unwrap();
        let s = sample_gaussian(&spec, 1, 0, Structure::Complex).unwrap();
        let full = partial_sum(&s, 5);
        assert_eq!(full.coefficients(), s.coefficients());
        let none = partial_sum(&s, 0);
        assert!(none.coefficients().flatten().iter().all(|z| *z == ZERO));
        let g = GroupElement::rotation(0.3, 1.0, 5.0);
        let parts: Complex64 = spec.labels().iter().map(|l| evaluate(&component(&s, *l), &g).unwrap()).sum();
        assert!((parts - evaluate(&s, &g).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn circle_and_cyclic_round_trip() {
        let circle = Domain::Group(Group::Circle);
        let rule = haar_quadrature(Group::Circle, 16).unwrap();
        let coeffs = random_coeffs(circle, 16, 4);
        let values: Vec<Complex64> = rule.nodes().iter().map(|g| evaluate_coefficients(&coeffs, g).unwrap()).collect();
        let a = analyze(&values, &rule, &coeffs.labels()).unwrap();
        assert!(a.coefficients.max_abs_diff(&coeffs) < 1e-9);
        let z12 = Domain::Group(Group::Cyclic { order: 12 });
        let rule = haar_quadrature(Group::Cyclic { order: 12 }, 1).unwrap();
        let coeffs = random_coeffs(z12, 6, 4);
        let values: Vec<Complex64> = rule.nodes().iter().map(|g| evaluate_coefficients(&coeffs, g).unwrap()).collect();
        let a = analyze(&values, &rule, &coeffs.labels()).unwrap();
        assert!(a.aliasing.is_none());
        assert!(a.coefficients.max_abs_diff(&coeffs) < 1e-9);
        let _ = (PI, TAU);
    }

    #[test]
    fn coefficient_file_round_trip() {
        let coeffs = random_coeffs(Domain::Sphere, 3, 8);
        let json = serde_json::to_string(&coeffs.to_file()).unwrap();
        let back = FieldCoefficients::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, coeffs);
        let mut broken = coeffs.to_file();
        broken.blocks[1].re.pop();
        assert!(FieldCoefficients::from_file(&broken).is_err());
    }
}
