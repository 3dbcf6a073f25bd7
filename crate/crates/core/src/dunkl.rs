//! Fiber-wise verification of the Dunkl identity step.
//!
//! Ordered pairs of positive roots are grouped by the exact product of their
//! two reflection matrices (a rotation in the Weyl group). On each fiber the
//! coth-weighted bivector sum should agree with the unweighted one; summing
//! the unweighted fibers regroups the positive-pair coupling tensor exactly.
//!
//! Fibers are keyed by canonicalized integer matrices (scaled numerators
//! plus a common denominator), never by floating-point data.

use crate::exactform::Tensor4;
use crate::linalg::RatMat;
use crate::prepotential::{coth_third, EvaluationPoint, PrepotentialError, DEFAULT_COTH_EPS};
use crate::rat::{is_zero_vec, rat, rat_i, to_f64_vec, Rat, RatVec};
use crate::rootsystems::{scale_to_integers, RootSystem, RootSystemError};
use num::traits::Signed;
use std::collections::BTreeMap;

/// Exact reflection matrix I - 2 a a^T / (a, a).
pub fn reflection_matrix(alpha: &[Rat], dim: usize) -> Result<RatMat, RootSystemError> {
    if is_zero_vec(alpha) {
        return Err(RootSystemError::ZeroRoot);
    }
    assert_eq!(alpha.len(), dim);
    let norm = crate::rat::sq_norm(alpha);
    let mut m = RatMat::identity(dim);
    for i in 0..dim {
        for j in 0..dim {
            m[(i, j)] -= rat_i(2) * &alpha[i] * &alpha[j] / &norm;
        }
    }
    Ok(m)
}

/// Canonical integer form of a rational matrix: (denominator, numerators)
/// with gcd 1 and positive denominator.
type FiberKey = (i64, Vec<i64>);

#[derive(Debug, Clone)]
pub struct Fiber {
    /// The Weyl element s_alpha s_beta shared by all pairs in the fiber.
    pub matrix: RatMat,
    /// Ordered (alpha index, beta index) pairs into `positive_roots`.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct FiberPartition {
    pub dim: usize,
    pub fibers: Vec<Fiber>,
}

impl FiberPartition {
    pub fn total_pairs(&self) -> usize {
        self.fibers.iter().map(|f| f.pairs.len()).sum()
    }

    /// The fiber whose Weyl element is the identity, if present.
    pub fn identity_fiber(&self) -> Option<&Fiber> {
        let id = RatMat::identity(self.dim);
        self.fibers.iter().find(|f| f.matrix == id)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Groups ordered positive pairs by the exact product s_alpha s_beta.
pub fn fiber_partition(rs: &RootSystem) -> FiberPartition {
    let dim = rs.ambient_dim;
    let (scaled, _) = scale_to_integers(&rs.positive_roots);
    // integer reflection data: num = (a,a) I - 2 a a^T, den = (a,a)
    let refl: Vec<(Vec<i64>, i64)> = scaled
        .iter()
        .map(|a| {
            let aa: i64 = a.iter().map(|x| x * x).sum();
            let mut num = vec![0i64; dim * dim];
            for i in 0..dim {
                for j in 0..dim {
                    num[i * dim + j] = if i == j { aa } else { 0 } - 2 * a[i] * a[j];
                }
            }
            (num, aa)
        })
        .collect();
    let mut fibers: BTreeMap<FiberKey, Vec<(usize, usize)>> = BTreeMap::new();
    for (ai, (na, da)) in refl.iter().enumerate() {
        for (bi, (nb, db)) in refl.iter().enumerate() {
            let mut prod = vec![0i64; dim * dim];
            for i in 0..dim {
                for k in 0..dim {
                    let x = na[i * dim + k];
                    if x == 0 {
                        continue;
                    }
                    for j in 0..dim {
                        prod[i * dim + j] += x * nb[k * dim + j];
                    }
                }
            }
            let mut den = da * db;
            let mut g = den;
            for &x in &prod {
                g = gcd(g, x);
                if g == 1 {
                    break;
                }
            }
            if g > 1 {
                den /= g;
                for x in prod.iter_mut() {
                    *x /= g;
                }
            }
            fibers.entry((den, prod)).or_default().push((ai, bi));
        }
    }
    let fibers = fibers
        .into_iter()
        .map(|((den, num), mut pairs)| {
            // deterministic order within fibers: lexicographic by coordinates
            pairs.sort_by(|&(a1, b1), &(a2, b2)| {
                (&rs.positive_roots[a1], &rs.positive_roots[b1])
                    .cmp(&(&rs.positive_roots[a2], &rs.positive_roots[b2]))
            });
            let mut matrix = RatMat::zeros(dim, dim);
            for i in 0..dim {
                for j in 0..dim {
                    matrix[(i, j)] = rat(num[i * dim + j], den);
                }
            }
            Fiber { matrix, pairs }
        })
        .collect();
    FiberPartition { dim, fibers }
}

/// Residual record for one fiber of the identity check.
#[derive(Debug, Clone)]
pub struct FiberResidual {
    pub fiber_index: usize,
    pub pair_count: usize,
    /// max |weighted - unweighted| over tensor components, relative to the
    /// unweighted fiber tensor's max-abs (absolute fallback 1e-12).
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct DunklReport {
    pub fiber_residuals: Vec<FiberResidual>,
    pub max_residual: f64,
    /// Exact comparison of the summed unweighted fiber tensors against the
    /// positive-pair coupling tensor (all-ones multiplicities).
    pub aggregate_exact_match: bool,
    /// Set when individual fibers fail the tolerance but the weighted and
    /// unweighted totals still agree.
    pub identity_holds_only_in_aggregate: bool,
    pub tolerance: f64,
}

const NEAR_ZERO_FIBER_FALLBACK: f64 = 1e-12;

/// Precomputed fiber data for repeated point checks on one system.
pub struct DunklRun {
    pub partition: FiberPartition,
    pub aggregate_exact_match: bool,
}

impl DunklRun {
    /// Builds the partition and performs the exact aggregate regrouping
    /// check (point-independent) once.
    pub fn new(rs: &RootSystem) -> Self {
        let partition = fiber_partition(rs);
        let exact_aggregate = exact_unweighted_aggregate(rs, &partition);
        let ones = vec![rat_i(1); rs.orbit_count()];
        let coupling = crate::exactform::coupling_tensor(rs, &ones)
            .expect("all-ones multiplicities always match the orbit count");
        DunklRun {
            partition,
            aggregate_exact_match: exact_aggregate == coupling.tensor,
        }
    }

    /// Fiber-by-fiber weighted-vs-unweighted comparison at one point.
    pub fn check_point(
        &self,
        rs: &RootSystem,
        point: &EvaluationPoint,
        tolerance: f64,
    ) -> Result<DunklReport, PrepotentialError> {
        if point.margin <= 0.0 {
            return Err(PrepotentialError::ChamberViolation(point.margin));
        }
        let dim = rs.ambient_dim;
        let roots_f: Vec<Vec<f64>> = rs.positive_roots.iter().map(|r| to_f64_vec(r)).collect();
        let coths: Vec<f64> = rs
            .charted_positive_roots
            .iter()
            .map(|r| {
                let pairing = r.iter().zip(&point.a).map(|(x, y)| x * y).sum::<f64>();
                coth_third(pairing, DEFAULT_COTH_EPS)
            })
            .collect::<Result<_, _>>()?;

        let pairs_idx: Vec<(usize, usize)> = {
            let mut v = Vec::new();
            for i in 0..dim {
                for j in i + 1..dim {
                    v.push((i, j));
                }
            }
            v
        };
        let np = pairs_idx.len();

        let mut fiber_residuals = Vec::with_capacity(self.partition.fibers.len());
        let mut max_residual: f64 = 0.0;
        let mut weighted_total = vec![0.0f64; np * np];
        let mut unweighted_total = vec![0.0f64; np * np];
        for (fi, fiber) in self.partition.fibers.iter().enumerate() {
            let mut weighted = vec![0.0f64; np * np];
            let mut unweighted = vec![0.0f64; np * np];
            let mut biv = vec![0.0f64; np];
            for &(ai, bi) in &fiber.pairs {
                let a = &roots_f[ai];
                let b = &roots_f[bi];
                let ip: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                if ip == 0.0 {
                    continue;
                }
                for (p, &(i, j)) in pairs_idx.iter().enumerate() {
                    biv[p] = a[i] * b[j] - a[j] * b[i];
                }
                let w = coths[ai] * coths[bi];
                for p in 0..np {
                    let base = ip * biv[p];
                    for q in 0..np {
                        unweighted[p * np + q] += base * biv[q];
                        weighted[p * np + q] += w * base * biv[q];
                    }
                }
            }
            let scale = unweighted
                .iter()
                .map(|x| x.abs())
                .fold(0.0, f64::max)
                .max(NEAR_ZERO_FIBER_FALLBACK);
            let dev = weighted
                .iter()
                .zip(&unweighted)
                .map(|(w, u)| (w - u).abs())
                .fold(0.0, f64::max);
            let residual = dev / scale;
            max_residual = max_residual.max(residual);
            fiber_residuals.push(FiberResidual {
                fiber_index: fi,
                pair_count: fiber.pairs.len(),
                residual,
            });
            for p in 0..np * np {
                weighted_total[p] += weighted[p];
                unweighted_total[p] += unweighted[p];
            }
        }

        let total_scale = unweighted_total
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max)
            .max(NEAR_ZERO_FIBER_FALLBACK);
        let total_dev = weighted_total
            .iter()
            .zip(&unweighted_total)
            .map(|(w, u)| (w - u).abs())
            .fold(0.0, f64::max)
            / total_scale;
        let identity_holds_only_in_aggregate = max_residual >= tolerance && total_dev < tolerance;

        Ok(DunklReport {
            fiber_residuals,
            max_residual,
            aggregate_exact_match: self.aggregate_exact_match,
            identity_holds_only_in_aggregate,
            tolerance,
        })
    }
}

/// One-shot wrapper: partition, aggregate check, and a single-point fiber
/// comparison.
pub fn fiber_identity_check(
    rs: &RootSystem,
    point: &EvaluationPoint,
    tolerance: f64,
) -> Result<DunklReport, PrepotentialError> {
    DunklRun::new(rs).check_point(rs, point, tolerance)
}

/// Sums the unweighted fiber tensors in exact arithmetic, fiber by fiber.
/// The pairs are flattened in fiber order, so the sum is exactly the
/// regrouped positive-pair sum.
fn exact_unweighted_aggregate(rs: &RootSystem, partition: &FiberPartition) -> Tensor4 {
    let fiber_roots: Vec<RatVec> = partition
        .fibers
        .iter()
        .flat_map(|fiber| fiber.pairs.iter())
        .flat_map(|&(a, b)| [rs.positive_roots[a].clone(), rs.positive_roots[b].clone()])
        .collect();
    if fiber_roots.is_empty() {
        return Tensor4::zeros(rs.ambient_dim);
    }
    pair_list_tensor(&fiber_roots)
}

/// Positive-pair tensor over an explicit (alpha, beta) pair list given as a
/// flattened even-length root list.
fn pair_list_tensor(pair_roots: &[RatVec]) -> Tensor4 {
    assert!(pair_roots.len() % 2 == 0);
    if pair_roots.is_empty() {
        return Tensor4::zeros(0);
    }
    let dim = pair_roots[0].len();
    let (scaled, d) = scale_to_integers(pair_roots);
    // integer accumulation (scaled by d^6); one rational division per
    // component at the end keeps large fibers cheap
    let mut acc = vec![0i128; dim * dim * dim * dim];
    for pair in scaled.chunks(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let ip: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if ip == 0 {
            continue;
        }
        for i in 0..dim {
            for j in i + 1..dim {
                let bij = (a[i] * b[j] - a[j] * b[i]) as i128;
                if bij == 0 {
                    continue;
                }
                let f = ip as i128 * bij;
                for l in 0..dim {
                    for m in l + 1..dim {
                        let blm = (a[l] * b[m] - a[m] * b[l]) as i128;
                        acc[((i * dim + j) * dim + l) * dim + m] += f * blm;
                    }
                }
            }
        }
    }
    let mut t = Tensor4::zeros(dim);
    let d6 = {
        let d = rat_i(d);
        &d * &d * &d * &d * &d * &d
    };
    for i in 0..dim {
        for j in i + 1..dim {
            for l in 0..dim {
                for m in l + 1..dim {
                    let v = acc[((i * dim + j) * dim + l) * dim + m];
                    if v != 0 {
                        add_antisym(&mut t, i, j, l, m, Rat::from_integer(v.into()) / &d6);
                    }
                }
            }
        }
    }
    t
}

fn add_antisym(t: &mut Tensor4, i: usize, j: usize, l: usize, m: usize, v: Rat) {
    let cur = t.get(i, j, l, m) + &v;
    t.set(i, j, l, m, cur);
    let cur = t.get(j, i, l, m) - &v;
    t.set(j, i, l, m, cur);
    let cur = t.get(i, j, m, l) - &v;
    t.set(i, j, m, l, cur);
    let cur = t.get(j, i, m, l) + v;
    t.set(j, i, m, l, cur);
}
