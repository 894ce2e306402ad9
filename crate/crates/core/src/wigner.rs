//! Wigner small-d matrices and Legendre functions.
//!
//! `d^l_{m m'}(beta) = <l m| exp(-i beta J_y) |l m'>` is produced for all
//! degrees up to `lmax` by the three-term recursion in `l` at fixed
//! `(m, m')`, seeded at `l0 = max(|m|, |m'|)` where the explicit sum has a
//! single term.

/// Largest degree for which the recursion is supported.
pub const MAX_DEGREE: usize = 64;

fn ln_factorial(n: i64) -> f64 {
    debug_assert!(n >= 0);
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Explicit Wigner sum for `d^j_{mp, m}(beta)`. Cost grows with `j`; used
/// only for recursion seeds, where it reduces to one term.
pub fn wigner_d_explicit(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
    assert!(mp.abs() <= j && m.abs() <= j, "|m| must not exceed j");
    let (s_half, c_half) = (0.5 * beta).sin_cos();
    let pref = 0.5 * (ln_factorial(j + mp) + ln_factorial(j - mp) + ln_factorial(j + m) + ln_factorial(j - m));
    let lo = 0.max(m - mp);
    let hi = (j + m).min(j - mp);
    let mut sum = 0.0;
    for s in lo..=hi {
        let ln_den = ln_factorial(j + m - s) + ln_factorial(s) + ln_factorial(mp - m + s) + ln_factorial(j - mp - s);
        let sign = if (mp - m + s).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let cos_pow = (2 * j + m - mp - 2 * s) as i32;
        let sin_pow = (mp - m + 2 * s) as i32;
        sum += sign * (pref - ln_den).exp() * c_half.powi(cos_pow) * s_half.powi(sin_pow);
    }
    sum
}

/// Small-d matrices for every degree `0..=lmax`, row-major with row index
/// `m + l` and column index `m' + l`.
#[derive(Clone, Debug)]
pub struct WignerTable {
    lmax: usize,
    blocks: Vec<Vec<f64>>,
}

impl WignerTable {
    pub fn new(lmax: usize, beta: f64) -> Self {
        assert!(lmax <= MAX_DEGREE, "degree {lmax} exceeds supported maximum {MAX_DEGREE}");
        let mut blocks: Vec<Vec<f64>> = (0..=lmax).map(|l| vec![0.0; (2 * l + 1) * (2 * l + 1)]).collect();
        let cb = beta.cos();
        let lmax_i = lmax as i64;
        for m in -lmax_i..=lmax_i {
            for mp in -lmax_i..=lmax_i {
                let l0 = m.abs().max(mp.abs());
                let mut prev = 0.0;
                let mut cur = if l0 == 0 { 1.0 } else { wigner_d_explicit(l0, m, mp, beta) };
                store(&mut blocks, l0, m, mp, cur);
                for l in l0..lmax_i {
                    let next = if l == 0 {
                        // d^1_{00} = cos(beta); the recursion is singular at l = 0.
                        cb
                    } else {
                        let (lf, mf, mpf) = (l as f64, m as f64, mp as f64);
                        let lp = lf + 1.0;
                        let a = (2.0 * lf + 1.0) * (lf * lp * cb - mf * mpf);
                        let b = lp * ((lf * lf - mf * mf) * (lf * lf - mpf * mpf)).sqrt();
                        let den = lf * ((lp * lp - mf * mf) * (lp * lp - mpf * mpf)).sqrt();
                        (a * cur - b * prev) / den
                    };
                    // Entries of a unitary matrix; rounding drift beyond 1 is clipped.
                    let next = next.clamp(-1.0, 1.0);
                    prev = cur;
                    cur = next;
                    store(&mut blocks, l + 1, m, mp, cur);
                }
            }
        }
        WignerTable { lmax, blocks }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn get(&self, l: usize, m: i64, mp: i64) -> f64 {
        let li = l as i64;
        assert!(m.abs() <= li && mp.abs() <= li);
        let dim = 2 * l + 1;
        self.blocks[l][(m + li) as usize * dim + (mp + li) as usize]
    }

    /// Row-major block of degree `l`.
    pub fn block(&self, l: usize) -> &[f64] {
        &self.blocks[l]
    }
}

fn store(blocks: &mut [Vec<f64>], l: i64, m: i64, mp: i64, v: f64) {
    let dim = 2 * l + 1;
    blocks[l as usize][((m + l) * dim + (mp + l)) as usize] = v;
}

/// Legendre polynomials `P_0(x) ..= P_lmax(x)` by Bonnet's recursion.
pub fn legendre_all(lmax: usize, x: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(lmax + 1);
    p.push(1.0);
    if lmax >= 1 {
        p.push(x);
    }
    for l in 1..lmax {
        let lf = l as f64;
        let next = ((2.0 * lf + 1.0) * x * p[l] - lf * p[l - 1]) / (lf + 1.0);
        p.push(next);
    }
    p
}

/// Associated Legendre functions scaled to unit mean square on the sphere:
/// `sqrt((2l+1) (l-m)!/(l+m)!) P_l^m(cos theta)`, Condon-Shortley phase
/// included, `0 <= m <= l <= lmax`. Index with [`assoc_index`].
pub fn assoc_legendre_unit(lmax: usize, theta: f64) -> Vec<f64> {
    let (s, x) = theta.sin_cos();
    let mut q = vec![0.0; assoc_index(lmax, lmax) + 1];
    q[0] = 1.0;
    for m in 1..=lmax {
        let mf = m as f64;
        q[assoc_index(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s * q[assoc_index(m - 1, m - 1)];
    }
    for m in 0..lmax {
        let mf = m as f64;
        q[assoc_index(m + 1, m)] = (2.0 * mf + 3.0).sqrt() * x * q[assoc_index(m, m)];
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            q[assoc_index(l, m)] = a * (x * q[assoc_index(l - 1, m)] - b * q[assoc_index(l - 2, m)]);
        }
    }
    q
}

pub fn assoc_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}
