//! The trigonometric prepotential and its third derivatives.
//!
//! The scalar is the positive-root surrogate
//!   F~ = sum_{a>0} k_a f((a, x)) + gamma (t^3/6 + t (x,x)/2)
//! with f(x) = x^3/6 - Li_3(e^{-2x})/4, so f''' = coth. The surrogate has the
//! same third derivatives as the all-roots half-sum because coth is odd,
//! and the Li_3 series only converges for positive arguments.
//!
//! Everything here works in chart (rank-dimensional) coordinates; points are
//! restricted to the interior of the positive Weyl chamber where coth is
//! finite on every positive root.

use crate::rootsystems::RootSystem;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_COTH_EPS: f64 = 1e-8;
pub const DEFAULT_MARGIN: f64 = 0.2;
const TRILOG_TERM_CUTOFF: f64 = 1e-16;
const SAMPLING_REJECTION_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum PrepotentialError {
    #[error("argument {value} outside domain {domain}")]
    DomainError { value: f64, domain: &'static str },
    #[error("|x| = {0:.3e} below the near-singular cutoff for coth")]
    NearSingular(f64),
    #[error("point has chamber margin {0:.3e} <= 0")]
    ChamberViolation(f64),
    #[error("finite-difference stencil (h = {h:.3e}) exits the chamber at margin {margin:.3e}")]
    StepTooLarge { h: f64, margin: f64 },
    #[error("chamber sampling exhausted after {0} rejections; margin_min too large")]
    SamplingExhausted(usize),
}

/// Prepotential parameters: a charted root system, per-orbit multiplicities,
/// and the complex coupling gamma.
#[derive(Debug, Clone)]
pub struct PrepotentialParams<'a> {
    pub system: &'a RootSystem,
    pub multiplicities: Vec<f64>,
    pub gamma: Complex64,
}

impl<'a> PrepotentialParams<'a> {
    pub fn new(system: &'a RootSystem, multiplicities: Vec<f64>, gamma: Complex64) -> Self {
        assert_eq!(multiplicities.len(), system.orbit_count());
        PrepotentialParams {
            system,
            multiplicities,
            gamma,
        }
    }

    pub fn unit(system: &'a RootSystem, gamma: Complex64) -> Self {
        Self::new(system, vec![1.0; system.orbit_count()], gamma)
    }

    fn weighted_roots(&self) -> impl Iterator<Item = (f64, &Vec<f64>)> {
        self.system
            .charted_positive_roots
            .iter()
            .zip(&self.system.positive_orbits)
            .map(|(r, &o)| (self.multiplicities[o], r))
    }
}

/// A point in the strict interior of the positive Weyl chamber, in chart
/// coordinates, plus the extra variable.
#[derive(Debug, Clone)]
pub struct EvaluationPoint {
    pub a: Vec<f64>,
    pub a_last: f64,
    pub margin: f64,
}

impl EvaluationPoint {
    pub fn new(system: &RootSystem, a: Vec<f64>, a_last: f64) -> Result<Self, PrepotentialError> {
        let margin = chamber_margin(system, &a);
        if margin <= 0.0 {
            return Err(PrepotentialError::ChamberViolation(margin));
        }
        Ok(EvaluationPoint { a, a_last, margin })
    }
}

/// min over positive roots of (alpha, a), in chart coordinates.
pub fn chamber_margin(system: &RootSystem, a: &[f64]) -> f64 {
    system
        .charted_positive_roots
        .iter()
        .map(|r| dot_f(r, a))
        .fold(f64::INFINITY, f64::min)
}

fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Totally symmetric third-derivative tensor, indices 1..=n+1.
#[derive(Debug, Clone)]
pub struct ThirdDerivativeTensor {
    /// rank of the root system; tensor indices run over n + 1 values
    pub n: usize,
    entries: Vec<Complex64>,
}

impl ThirdDerivativeTensor {
    fn zeros(n: usize) -> Self {
        let d = n + 1;
        ThirdDerivativeTensor {
            n,
            entries: vec![Complex64::new(0.0, 0.0); d * d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> Complex64 {
        let d = self.n + 1;
        self.entries[(i * d + j) * d + k]
    }

    fn set(&mut self, i: usize, j: usize, k: usize, v: Complex64) {
        let d = self.n + 1;
        self.entries[(i * d + j) * d + k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Li_3 restricted to [0, 1): direct series with a geometric tail bound.
pub fn trilog(z: f64) -> Result<f64, PrepotentialError> {
    if !(0.0..1.0).contains(&z) {
        return Err(PrepotentialError::DomainError {
            value: z,
            domain: "[0, 1)",
        });
    }
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 1..100_000u64 {
        zk *= z;
        let term = zk / ((k * k * k) as f64);
        sum += term;
        // remaining tail is below term * z / (1 - z)
        if term * z / (1.0 - z) < TRILOG_TERM_CUTOFF {
            break;
        }
    }
    Ok(sum)
}

/// Li_2 on [0, 1), needed for the analytic gradient.
pub fn dilog(z: f64) -> Result<f64, PrepotentialError> {
    if !(0.0..1.0).contains(&z) {
        return Err(PrepotentialError::DomainError {
            value: z,
            domain: "[0, 1)",
        });
    }
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 1..100_000u64 {
        zk *= z;
        let term = zk / ((k * k) as f64);
        sum += term;
        if term * z / (1.0 - z) < TRILOG_TERM_CUTOFF {
            break;
        }
    }
    Ok(sum)
}

/// f(x) = x^3/6 - Li_3(e^{-2x})/4 for x > 0.
pub fn f_scalar(x: f64) -> Result<f64, PrepotentialError> {
    if x <= 0.0 {
        return Err(PrepotentialError::DomainError {
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(x * x * x / 6.0 - trilog((-2.0 * x).exp())? / 4.0)
}

/// f'(x) = x^2/2 + Li_2(e^{-2x})/2, from term-wise differentiation.
pub fn f_prime(x: f64) -> Result<f64, PrepotentialError> {
    if x <= 0.0 {
        return Err(PrepotentialError::DomainError {
            value: x,
            domain: "(0, inf)",
        });
    }
    Ok(x * x / 2.0 + dilog((-2.0 * x).exp())? / 2.0)
}

/// coth via the exponential form; odd in x by explicit sign symmetry.
pub fn coth_third(x: f64, eps: f64) -> Result<f64, PrepotentialError> {
    if x.abs() < eps {
        return Err(PrepotentialError::NearSingular(x.abs()));
    }
    let t = (-2.0 * x.abs()).exp();
    let magnitude = 1.0 + 2.0 * t / (1.0 - t);
    Ok(magnitude.copysign(x))
}

/// The positive-root surrogate scalar F~ at a chamber point.
pub fn prepotential_scalar(
    params: &PrepotentialParams,
    point: &EvaluationPoint,
) -> Result<Complex64, PrepotentialError> {
    if point.margin <= 0.0 {
        return Err(PrepotentialError::ChamberViolation(point.margin));
    }
    let mut real = 0.0;
    for (k, root) in params.weighted_roots() {
        real += k * f_scalar(dot_f(root, &point.a))?;
    }
    let t = point.a_last;
    let aa = dot_f(&point.a, &point.a);
    let poly = t * t * t / 6.0 + t * aa / 2.0;
    Ok(Complex64::new(real, 0.0) + params.gamma * poly)
}

/// Third partials of F~ at a chamber point: root-direction entries are the
/// coth-weighted cubes, the extra slice is gamma * identity.
pub fn third_derivative_tensor(
    params: &PrepotentialParams,
    point: &EvaluationPoint,
) -> Result<ThirdDerivativeTensor, PrepotentialError> {
    if point.margin <= 0.0 {
        return Err(PrepotentialError::ChamberViolation(point.margin));
    }
    let n = params.system.rank;
    let mut t = ThirdDerivativeTensor::zeros(n);
    for (k, root) in params.weighted_roots() {
        let c = k * coth_third(dot_f(root, &point.a), DEFAULT_COTH_EPS)?;
        for i in 0..n {
            for j in i..n {
                for l in j..n {
                    let v = Complex64::new(c * root[i] * root[j] * root[l], 0.0);
                    for (a, b, c3) in symmetric_triples(i, j, l) {
                        let prev = t.get(a, b, c3);
                        t.set(a, b, c3, prev + v);
                    }
                }
            }
        }
    }
    for j in 0..n + 1 {
        for (a, b, c3) in symmetric_triples(n, j, j) {
            t.set(a, b, c3, params.gamma);
        }
    }
    Ok(t)
}

/// Distinct permutations of (i, j, k) with i <= j <= k.
fn symmetric_triples(i: usize, j: usize, k: usize) -> Vec<(usize, usize, usize)> {
    let mut out = vec![
        (i, j, k),
        (i, k, j),
        (j, i, k),
        (j, k, i),
        (k, i, j),
        (k, j, i),
    ];
    out.sort_unstable();
    out.dedup();
    out
}

/// Analytic gradient of F~, components 0..n (chart directions) and n (extra).
fn gradient(
    params: &PrepotentialParams,
    a: &[f64],
    a_last: f64,
) -> Result<Vec<Complex64>, PrepotentialError> {
    let n = params.system.rank;
    let mut g = vec![Complex64::new(0.0, 0.0); n + 1];
    for (k, root) in params.weighted_roots() {
        let fp = k * f_prime(dot_f(root, a))?;
        for i in 0..n {
            g[i] += Complex64::new(fp * root[i], 0.0);
        }
    }
    for i in 0..n {
        g[i] += params.gamma * (a_last * a[i]);
    }
    g[n] = params.gamma * (a_last * a_last / 2.0 + dot_f(a, a) / 2.0);
    Ok(g)
}

/// Central second differences of the analytic gradient versus the analytic
/// third-derivative tensor; returns the max relative deviation (relative to
/// the tensor's max-abs entry).
pub fn fd_validate(
    params: &PrepotentialParams,
    point: &EvaluationPoint,
    h: f64,
) -> Result<f64, PrepotentialError> {
    let max_root_norm = params
        .system
        .charted_positive_roots
        .iter()
        .map(|r| dot_f(r, r).sqrt())
        .fold(0.0, f64::max);
    if point.margin <= 2.0 * h * max_root_norm.max(1.0) {
        return Err(PrepotentialError::StepTooLarge {
            h,
            margin: point.margin,
        });
    }
    let analytic = third_derivative_tensor(params, point)?;
    let n = params.system.rank;
    let d = n + 1;
    let grad_at = |da: &[f64], dt: f64| -> Result<Vec<Complex64>, PrepotentialError> {
        let a: Vec<f64> = point.a.iter().zip(da).map(|(x, y)| x + y).collect();
        gradient(params, &a, point.a_last + dt)
    };
    let shift = |j: usize, s: f64| -> (Vec<f64>, f64) {
        let mut da = vec![0.0; n];
        let mut dt = 0.0;
        if j < n {
            da[j] = s;
        } else {
            dt = s;
        }
        (da, dt)
    };
    let scale = analytic.max_abs() + 1e-300;
    let mut worst: f64 = 0.0;
    for j in 0..d {
        for k in j..d {
            let fd: Vec<Complex64> = if j == k {
                let (da_p, dt_p) = shift(j, h);
                let (da_m, dt_m) = shift(j, -h);
                let gp = grad_at(&da_p, dt_p)?;
                let g0 = grad_at(&vec![0.0; n], 0.0)?;
                let gm = grad_at(&da_m, dt_m)?;
                (0..d)
                    .map(|i| (gp[i] - 2.0 * g0[i] + gm[i]) / (h * h))
                    .collect()
            } else {
                let combine = |sj: f64, sk: f64| -> (Vec<f64>, f64) {
                    let (da_j, dt_j) = shift(j, sj);
                    let (da_k, dt_k) = shift(k, sk);
                    (
                        da_j.iter().zip(&da_k).map(|(a, b)| a + b).collect(),
                        dt_j + dt_k,
                    )
                };
                let (pp_a, pp_t) = combine(h, h);
                let (pm_a, pm_t) = combine(h, -h);
                let (mp_a, mp_t) = combine(-h, h);
                let (mm_a, mm_t) = combine(-h, -h);
                let gpp = grad_at(&pp_a, pp_t)?;
                let gpm = grad_at(&pm_a, pm_t)?;
                let gmp = grad_at(&mp_a, mp_t)?;
                let gmm = grad_at(&mm_a, mm_t)?;
                (0..d)
                    .map(|i| (gpp[i] - gpm[i] - gmp[i] + gmm[i]) / (4.0 * h * h))
                    .collect()
            };
            for i in 0..d {
                let dev = (fd[i] - analytic.get(i, j, k)).norm() / scale;
                worst = worst.max(dev);
            }
        }
    }
    Ok(worst)
}

/// Deterministic chamber points: positive combinations of the fundamental
/// coweight directions, so every simple-root pairing is the sampled
/// coefficient and every positive-root pairing is at least the minimum one.
pub fn sample_chamber_point(
    system: &RootSystem,
    seed: u64,
    margin_min: f64,
    count: usize,
) -> Result<Vec<EvaluationPoint>, PrepotentialError> {
    assert!(margin_min > 0.0);
    let n = system.rank;
    let coweights = coweight_directions(system);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut rejections = 0usize;
    while out.len() < count {
        let coeffs: Vec<f64> = (0..n)
            .map(|_| margin_min + (1.5 - margin_min) * rng.gen::<f64>())
            .collect();
        let mut a = vec![0.0; n];
        for (c, w) in coeffs.iter().zip(&coweights) {
            for (ai, wi) in a.iter_mut().zip(w) {
                *ai += c * wi;
            }
        }
        let a_last = 2.0 * rng.gen::<f64>() - 1.0;
        let margin = chamber_margin(system, &a);
        if margin + 1e-12 < margin_min {
            rejections += 1;
            if rejections >= SAMPLING_REJECTION_CAP {
                return Err(PrepotentialError::SamplingExhausted(rejections));
            }
            continue;
        }
        out.push(EvaluationPoint { a, a_last, margin });
    }
    Ok(out)
}

/// Directions w_i with (s_j, w_i) = delta_ij over the charted simple roots.
fn coweight_directions(system: &RootSystem) -> Vec<Vec<f64>> {
    let n = system.rank;
    let s = &system.charted_simple_roots;
    // invert the n x n matrix whose rows are the charted simple roots
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row = s[i].clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, pivot);
        let p = aug[col][col];
        assert!(p.abs() > 1e-12, "charted simple roots are singular");
        for x in aug[col].iter_mut() {
            *x /= p;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = aug[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..2 * n {
                let v = aug[col][j];
                aug[r][j] -= f * v;
            }
        }
    }
    // column i of the inverse solves S w = e_i
    (0..n)
        .map(|i| (0..n).map(|r| aug[r][n + i]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsystems::{build_root_system, Family, RootSystemSpec};

    const ZETA3: f64 = 1.202_056_903_159_594;

    fn build(f: Family, n: usize) -> RootSystem {
        build_root_system(RootSystemSpec::new(f, n)).unwrap()
    }

    #[test]
    fn trilog_values() {
        assert_eq!(trilog(0.0).unwrap(), 0.0);
        let z = (-2.0f64).exp();
        assert!((trilog(z).unwrap() - 0.13772218).abs() < 1e-7);
        let near_one = trilog(0.999).unwrap();
        assert!(near_one.is_finite());
        assert!(near_one < ZETA3);
        assert!(matches!(trilog(-0.1), Err(PrepotentialError::DomainError { .. })));
        assert!(matches!(trilog(1.0), Err(PrepotentialError::DomainError { .. })));
    }

    #[test]
    fn f_scalar_values() {
        assert!((f_scalar(1.0).unwrap() - 0.13223612).abs() < 1e-7);
        let x = 20.0;
        assert!((f_scalar(x).unwrap() - x * x * x / 6.0).abs() < 1e-12);
        assert!(matches!(f_scalar(-1.0), Err(PrepotentialError::DomainError { .. })));
    }

    #[test]
    fn coth_values() {
        let e2 = (2.0f64).exp();
        let expected = (e2 + 1.0) / (e2 - 1.0);
        assert!((coth_third(1.0, DEFAULT_COTH_EPS).unwrap() - expected).abs() < 1e-9);
        assert!((coth_third(20.0, DEFAULT_COTH_EPS).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            coth_third(-1.0, DEFAULT_COTH_EPS).unwrap(),
            -coth_third(1.0, DEFAULT_COTH_EPS).unwrap()
        );
        assert!(matches!(
            coth_third(1e-9, DEFAULT_COTH_EPS),
            Err(PrepotentialError::NearSingular(_))
        ));
    }

    #[test]
    fn series_derivative_consistency() {
        // term-wise differentiated trilog series closes to coth
        for x in [0.5, 1.0, 2.0] {
            let t = (-2.0f64 * x).exp();
            let lhs = 1.0 + 2.0 * t / (1.0 - t);
            let rhs = coth_third(x, DEFAULT_COTH_EPS).unwrap();
            assert!((lhs - rhs).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn a1_scalar_single_term() {
        let rs = build(Family::A, 1);
        let gamma = Complex64::new(0.0, 3.0);
        let params = PrepotentialParams::unit(&rs, gamma);
        // charted simple root has length sqrt(2); pick a with (alpha, a) = 1
        let alpha = &rs.charted_positive_roots[0];
        let a = vec![1.0 / (alpha[0].abs() * alpha[0].abs()) * alpha[0]];
        let point = EvaluationPoint::new(&rs, a, 0.0).unwrap();
        let v = prepotential_scalar(&params, &point).unwrap();
        assert!((v.re - f_scalar(1.0).unwrap()).abs() < 1e-12);
        assert!(v.im.abs() < 1e-15); // a_last = 0 kills the gamma term
    }

    #[test]
    fn b2_scalar_four_terms() {
        let rs = build(Family::B, 2);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.0));
        let point = EvaluationPoint::new(&rs, vec![1.0, 0.4], 0.0).unwrap();
        let v = prepotential_scalar(&params, &point).unwrap();
        let expected: f64 = [1.0, 0.4, 0.6, 1.4]
            .iter()
            .map(|&x| f_scalar(x).unwrap())
            .sum();
        assert!((v.re - expected).abs() < 1e-12);
    }

    #[test]
    fn b2_third_derivative_111() {
        let rs = build(Family::B, 2);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.0));
        let point = EvaluationPoint::new(&rs, vec![1.0, 0.4], 0.0).unwrap();
        let t = third_derivative_tensor(&params, &point).unwrap();
        let eps = DEFAULT_COTH_EPS;
        let expected = coth_third(1.0, eps).unwrap()
            + coth_third(0.6, eps).unwrap()
            + coth_third(1.4, eps).unwrap();
        assert!((t.get(0, 0, 0).re - expected).abs() < 1e-12);
        assert!((expected - 4.3045).abs() < 1e-3);
    }

    #[test]
    fn gamma_slice_is_identity() {
        let rs = build(Family::G, 2);
        let gamma = Complex64::new(0.0, 2.5);
        let params = PrepotentialParams::unit(&rs, gamma);
        let point = &sample_chamber_point(&rs, 7, 0.3, 1).unwrap()[0];
        let t = third_derivative_tensor(&params, point).unwrap();
        let n = rs.rank;
        for j in 0..n + 1 {
            for k in 0..n + 1 {
                let expected = if j == k { gamma } else { Complex64::new(0.0, 0.0) };
                assert_eq!(t.get(n, j, k), expected);
            }
        }
        // two or more extra indices
        for k in 0..n {
            assert_eq!(t.get(n, n, k), Complex64::new(0.0, 0.0));
        }
        assert_eq!(t.get(n, n, n), gamma);
    }

    #[test]
    fn tensor_total_symmetry() {
        let rs = build(Family::B, 2);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.5));
        let point = &sample_chamber_point(&rs, 3, 0.3, 1).unwrap()[0];
        let t = third_derivative_tensor(&params, point).unwrap();
        let d = t.dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    assert_eq!(t.get(i, j, k), t.get(j, i, k));
                    assert_eq!(t.get(i, j, k), t.get(i, k, j));
                }
            }
        }
    }

    #[test]
    fn a1_chart_invariant_entry() {
        let rs = build(Family::A, 1);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.0));
        let point = &sample_chamber_point(&rs, 11, 0.3, 1).unwrap()[0];
        let t = third_derivative_tensor(&params, point).unwrap();
        let alpha = &rs.charted_positive_roots[0];
        let norm = (alpha[0] * alpha[0]).sqrt();
        let pairing = alpha[0] * point.a[0];
        let expected = norm.powi(3) * coth_third(pairing, DEFAULT_COTH_EPS).unwrap();
        assert!((t.get(0, 0, 0).re - expected).abs() < 1e-12);
    }

    #[test]
    fn full_sum_equals_positive_sum() {
        // the all-roots half-sum agrees with the positive-root sum by oddness
        let rs = build(Family::B, 2);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.0));
        let point = &sample_chamber_point(&rs, 5, 0.3, 1).unwrap()[0];
        let t = third_derivative_tensor(&params, point).unwrap();
        let n = rs.rank;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut half_sum = 0.0;
                    for root in &rs.roots {
                        let charted =
                            crate::rootsystems::chart_vector(&rs.chart, &crate::rat::to_f64_vec(root));
                        let pairing = dot_f(&charted, &point.a);
                        half_sum += 0.5
                            * coth_third(pairing, DEFAULT_COTH_EPS).unwrap()
                            * charted[i]
                            * charted[j]
                            * charted[k];
                    }
                    assert!((t.get(i, j, k).re - half_sum).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn fd_validation_cases() {
        let rs = build(Family::B, 2);
        // gamma-only: central differences exact on the cubic part
        // truncation vanishes on the cubic, so a larger step keeps the
        // rounding floor (~eps/h^2) far below the tolerance
        let gamma_only = PrepotentialParams::new(&rs, vec![0.0, 0.0], Complex64::new(0.0, 2.0));
        let point = EvaluationPoint::new(&rs, vec![1.0, 0.4], 0.3).unwrap();
        assert!(fd_validate(&gamma_only, &point, 0.05).unwrap() < 1e-10);

        let full = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.414));
        assert!(fd_validate(&full, &point, 1e-4).unwrap() < 1e-5);

        assert!(matches!(
            fd_validate(&full, &point, 0.5),
            Err(PrepotentialError::StepTooLarge { .. })
        ));
    }

    #[test]
    fn chamber_margin_examples() {
        let rs = build(Family::B, 2);
        assert!((chamber_margin(&rs, &[1.0, 0.4]) - 0.4).abs() < 1e-12);
        // (1, 1) sits on the e1 - e2 wall
        assert!(chamber_margin(&rs, &[1.0, 1.0]).abs() < 1e-12);
        assert!(EvaluationPoint::new(&rs, vec![1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_in_chamber() {
        let rs = build(Family::F, 4);
        let p1 = sample_chamber_point(&rs, 42, 0.2, 5).unwrap();
        let p2 = sample_chamber_point(&rs, 42, 0.2, 5).unwrap();
        assert_eq!(p1.len(), 5);
        for (a, b) in p1.iter().zip(&p2) {
            assert_eq!(a.a, b.a);
            assert_eq!(a.a_last, b.a_last);
            assert!(a.margin >= 0.2 - 1e-12);
        }
        let p3 = sample_chamber_point(&rs, 43, 0.2, 5).unwrap();
        assert_ne!(p1[0].a, p3[0].a);
    }

    #[test]
    fn weyl_equivariance_spot_check() {
        // T at the reflected point equals T at the point with root indices
        // transformed; check the scalar invariant sum_ijk T_ijk v_i v_j v_k
        // with v transformed alongside.
        let rs = build(Family::B, 2);
        let params = PrepotentialParams::unit(&rs, Complex64::new(0.0, 1.0));
        let point = &sample_chamber_point(&rs, 9, 0.3, 1).unwrap()[0];
        let t = third_derivative_tensor(&params, point).unwrap();
        // reflect a and v through e1 - e2 (swap of chart coordinates in B2)
        let refl = |v: &[f64]| vec![v[1], v[0]];
        let rp = EvaluationPoint {
            a: refl(&point.a),
            a_last: point.a_last,
            margin: 0.0,
        };
        // reflected point exits the chamber; evaluate the root sum directly
        let n = rs.rank;
        let mut tr = vec![0.0; n * n * n];
        for (k, root) in params.weighted_roots() {
            let c = k * coth_third(dot_f(root, &rp.a), DEFAULT_COTH_EPS).unwrap();
            for i in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        tr[(i * n + j) * n + l] += c * root[i] * root[j] * root[l];
                    }
                }
            }
        }
        let v = [0.3, 0.7];
        let rv = refl(&v);
        let contract_t: f64 = (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |l| (i, j, l))))
            .map(|(i, j, l)| t.get(i, j, l).re * v[i] * v[j] * v[l])
            .sum();
        let contract_r: f64 = (0..n)
            .flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |l| (i, j, l))))
            .map(|(i, j, l)| tr[(i * n + j) * n + l] * rv[i] * rv[j] * rv[l])
            .sum();
        assert!((contract_t - contract_r).abs() < 1e-10);
    }
}
