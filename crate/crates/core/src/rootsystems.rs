//! Exact realizations of the irreducible crystallographic root systems.
//!
//! Realizations follow the standard Bourbaki coordinates: A_N lives in the
//! sum-zero hyperplane of R^{N+1}, B_N/C_N/D_N/F_4 fill their ambient space,
//! E_6/E_7 sit inside the half-integer E_8 realization, and G_2 lives in the
//! sum-zero hyperplane of R^3. All coordinates are integers or half-integers,
//! so the whole construction stays in exact rational arithmetic.

use crate::linalg::RatMat;
use crate::rat::{dot, is_zero_vec, neg, rat, rat_i, rat_to_f64, sq_norm, sub, to_f64_vec, Rat, RatVec};
use num::traits::{Signed, ToPrimitive};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

const CLOSURE_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        };
        write!(f, "{c}")
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Family::A),
            "B" => Ok(Family::B),
            "C" => Ok(Family::C),
            "D" => Ok(Family::D),
            "E" => Ok(Family::E),
            "F" => Ok(Family::F),
            "G" => Ok(Family::G),
            _ => Err(format!("unknown family {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootSystemSpec {
    pub family: Family,
    pub rank: usize,
}

impl RootSystemSpec {
    pub fn new(family: Family, rank: usize) -> Self {
        RootSystemSpec { family, rank }
    }

    /// Admissibility constraint for the family, as a human-readable string.
    pub fn rank_constraint(family: Family) -> &'static str {
        match family {
            Family::A => "A_N requires N >= 1",
            Family::B => "B_N requires N >= 2",
            Family::C => "C_N requires N >= 2",
            Family::D => "D_N requires N >= 3 (D_2 is reducible)",
            Family::E => "E_N requires N in {6, 7, 8}",
            Family::F => "F_N requires N = 4",
            Family::G => "G_N requires N = 2",
        }
    }

    pub fn is_admissible(&self) -> bool {
        match self.family {
            Family::A => self.rank >= 1,
            Family::B | Family::C => self.rank >= 2,
            Family::D => self.rank >= 3,
            Family::E => matches!(self.rank, 6 | 7 | 8),
            Family::F => self.rank == 4,
            Family::G => self.rank == 2,
        }
    }

    /// Expected root count, from the classification.
    pub fn expected_root_count(&self) -> usize {
        let n = self.rank;
        match self.family {
            Family::A => n * (n + 1),
            Family::B | Family::C => 2 * n * n,
            Family::D => 2 * n * (n - 1),
            Family::E => match n {
                6 => 72,
                7 => 126,
                _ => 240,
            },
            Family::F => 48,
            Family::G => 12,
        }
    }
}

impl fmt::Display for RootSystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.rank)
    }
}

/// Parses "B2", "E8", "f4", ...
impl std::str::FromStr for RootSystemSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() < 2 {
            return Err(format!("bad system selector {s:?}"));
        }
        let family: Family = s[..1].parse()?;
        let rank: usize = s[1..]
            .parse()
            .map_err(|_| format!("bad rank in selector {s:?}"))?;
        Ok(RootSystemSpec { family, rank })
    }
}

#[derive(Debug, Error)]
pub enum RootSystemError {
    #[error("inadmissible rank {rank} for family {family}: {constraint}")]
    InadmissibleRank {
        family: Family,
        rank: usize,
        constraint: &'static str,
    },
    #[error("reflection through the zero vector is undefined")]
    ZeroRoot,
    #[error("non-crystallographic input: Cartan pairing 2(v,a)/(a,a) is not an integer")]
    NonCrystallographic,
    #[error("reflection closure exceeded {CLOSURE_CAP} vectors; input is not a root system base")]
    NoConvergence,
    #[error("given simple roots are not a base: a root expands with mixed signs")]
    NotABase,
}

/// An exact realization of an irreducible crystallographic root system.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub spec: RootSystemSpec,
    pub ambient_dim: usize,
    pub rank: usize,
    pub roots: Vec<RatVec>,
    pub positive_roots: Vec<RatVec>,
    pub simple_roots: Vec<RatVec>,
    /// Orbit label (index into `orbit_sq_lengths`) per positive root.
    pub positive_orbits: Vec<usize>,
    /// Distinct squared lengths, ascending: orbit 0 is the short orbit.
    pub orbit_sq_lengths: Vec<Rat>,
    /// Exact orthogonal projector onto span(R), in ambient coordinates.
    pub projector: RatMat,
    /// Orthonormal chart: columns are an orthonormal basis of span(R).
    pub chart: Vec<Vec<f64>>,
    /// Positive roots in chart coordinates (Q^T alpha).
    pub charted_positive_roots: Vec<Vec<f64>>,
    pub charted_simple_roots: Vec<Vec<f64>>,
}

impl RootSystem {
    pub fn orbit_count(&self) -> usize {
        self.orbit_sq_lengths.len()
    }

    /// Orbit label of an arbitrary root, by squared length.
    pub fn orbit_of(&self, root: &[Rat]) -> Option<usize> {
        let sq = sq_norm(root);
        self.orbit_sq_lengths.iter().position(|l| *l == sq)
    }

    /// Names the orbits: ["single"] or ["short", "long"].
    pub fn orbit_names(&self) -> Vec<&'static str> {
        if self.orbit_count() == 1 {
            vec!["single"]
        } else {
            vec!["short", "long"]
        }
    }
}

/// Weyl reflection of `v` through the hyperplane orthogonal to `alpha`.
pub fn reflect_vector(alpha: &[Rat], v: &[Rat]) -> Result<RatVec, RootSystemError> {
    if is_zero_vec(alpha) {
        return Err(RootSystemError::ZeroRoot);
    }
    assert_eq!(alpha.len(), v.len());
    let coeff = rat_i(2) * dot(v, alpha) / sq_norm(alpha);
    Ok(sub(v, &crate::rat::scale(alpha, &coeff)))
}

fn lcm_i64(a: i64, b: i64) -> i64 {
    a / gcd_i64(a, b) * b
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Common denominator of a family of rational vectors.
fn common_denominator(vecs: &[RatVec]) -> i64 {
    let mut d: i64 = 1;
    for v in vecs {
        for x in v {
            let den = x.denom().to_i64().expect("denominator out of i64 range");
            d = lcm_i64(d, den);
        }
    }
    d
}

/// Scales rational vectors to integer coordinates; returns (scaled, scale).
pub(crate) fn scale_to_integers(vecs: &[RatVec]) -> (Vec<Vec<i64>>, i64) {
    let d = common_denominator(vecs);
    let scaled = vecs
        .iter()
        .map(|v| {
            v.iter()
                .map(|x| (x * rat_i(d)).to_integer().to_i64().expect("coordinate overflow"))
                .collect()
        })
        .collect();
    (scaled, d)
}

fn idot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Smallest reflection-closed, negation-closed set containing the simple
/// roots. Runs in scaled integer coordinates: the reflection coefficient
/// 2(v,a)/(a,a) is a Cartan integer, so no rational arithmetic is needed.
pub fn root_closure(simple_roots: &[RatVec]) -> Result<Vec<RatVec>, RootSystemError> {
    assert!(!simple_roots.is_empty());
    let (scaled, d) = scale_to_integers(simple_roots);
    let mut set: BTreeSet<Vec<i64>> = BTreeSet::new();
    for v in &scaled {
        set.insert(v.clone());
        set.insert(v.iter().map(|x| -x).collect());
    }
    loop {
        let snapshot: Vec<Vec<i64>> = set.iter().cloned().collect();
        let mut grew = false;
        for a in &snapshot {
            let aa = idot(a, a);
            for v in &snapshot {
                let num = 2 * idot(v, a);
                if num % aa != 0 {
                    return Err(RootSystemError::NonCrystallographic);
                }
                let n = num / aa;
                if n == 0 {
                    continue;
                }
                let w: Vec<i64> = v.iter().zip(a).map(|(x, y)| x - n * y).collect();
                if set.insert(w.clone()) {
                    set.insert(w.iter().map(|x| -x).collect());
                    grew = true;
                }
            }
            if set.len() > CLOSURE_CAP {
                return Err(RootSystemError::NoConvergence);
            }
        }
        if !grew {
            break;
        }
    }
    Ok(set
        .into_iter()
        .map(|v| v.into_iter().map(|x| rat(x, d)).collect())
        .collect())
}

/// Splits a negation-closed root set into positive/negative halves by the
/// sign pattern of the exact expansion over the simple roots.
pub fn positive_partition(
    roots: &[RatVec],
    simple_roots: &[RatVec],
) -> Result<(Vec<RatVec>, Vec<RatVec>), RootSystemError> {
    let n = simple_roots.len();
    let mut gram = RatMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] = dot(&simple_roots[i], &simple_roots[j]);
        }
    }
    let gram_inv = gram.inverse().ok_or(RootSystemError::NotABase)?;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for r in roots {
        let rhs: RatVec = simple_roots.iter().map(|s| dot(s, r)).collect();
        let coeffs = gram_inv.mul_vec(&rhs);
        let has_pos = coeffs.iter().any(|c| c.is_positive());
        let has_neg = coeffs.iter().any(|c| c.is_negative());
        match (has_pos, has_neg) {
            (true, false) => positive.push(r.clone()),
            (false, true) => negative.push(r.clone()),
            _ => return Err(RootSystemError::NotABase),
        }
    }
    Ok((positive, negative))
}

/// Exact orthogonal projector onto the span of the given vectors.
pub fn span_projector(roots: &[RatVec]) -> RatMat {
    assert!(!roots.is_empty());
    let m = roots[0].len();
    // greedy maximal independent subset
    let mut basis: Vec<RatVec> = Vec::new();
    for r in roots {
        if is_zero_vec(r) {
            continue;
        }
        basis.push(r.clone());
        if RatMat::from_rows(&basis).rank() < basis.len() {
            basis.pop();
        }
        if basis.len() == m {
            break;
        }
    }
    let b = RatMat::from_rows(&basis); // k x m
    let bt = b.transpose();
    let gram_inv = b
        .mul(&bt)
        .inverse()
        .expect("Gram matrix of an independent set is invertible");
    bt.mul(&gram_inv).mul(&b)
}

/// Orthonormal basis of the span of `basis`, as chart columns (each length m).
/// Plain modified Gram-Schmidt in f64; the exact checks live at build time.
pub fn orthonormal_chart(basis: &[RatVec]) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for v in basis {
        let mut w = to_f64_vec(v);
        for q in &cols {
            let proj: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= proj * qi;
            }
        }
        // re-orthogonalize once for stability
        for q in &cols {
            let proj: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= proj * qi;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 1e-9, "chart basis is not linearly independent");
        for wi in w.iter_mut() {
            *wi /= norm;
        }
        cols.push(w);
    }
    cols
}

/// Applies the chart: Q^T v, mapping an ambient vector to rank coordinates.
pub fn chart_vector(chart: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    chart
        .iter()
        .map(|q| q.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn e8_simple_roots() -> Vec<RatVec> {
    let h = rat(1, 2);
    let mut a1: RatVec = vec![-h.clone(); 8];
    a1[0] = h.clone();
    a1[7] = h;
    let mut out = vec![a1];
    let mut a2 = vec![rat_i(0); 8];
    a2[0] = rat_i(1);
    a2[1] = rat_i(1);
    out.push(a2);
    // alpha_i = e_{i-1} - e_{i-2} for i = 3..8 (Bourbaki numbering)
    for i in 3..=8 {
        let mut v = vec![rat_i(0); 8];
        v[i - 2] = rat_i(1);
        v[i - 3] = rat_i(-1);
        out.push(v);
    }
    out
}

fn realize_simple_roots(spec: &RootSystemSpec) -> Vec<RatVec> {
    let n = spec.rank;
    let unit = |m: usize, i: usize| -> RatVec {
        let mut v = vec![rat_i(0); m];
        v[i] = rat_i(1);
        v
    };
    let diff = |m: usize, i: usize, j: usize| -> RatVec {
        let mut v = vec![rat_i(0); m];
        v[i] = rat_i(1);
        v[j] = rat_i(-1);
        v
    };
    match spec.family {
        Family::A => (0..n).map(|i| diff(n + 1, i, i + 1)).collect(),
        Family::B => {
            let mut r: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            r.push(unit(n, n - 1));
            r
        }
        Family::C => {
            let mut r: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = vec![rat_i(0); n];
            last[n - 1] = rat_i(2);
            r.push(last);
            r
        }
        Family::D => {
            let mut r: Vec<RatVec> = (0..n - 1).map(|i| diff(n, i, i + 1)).collect();
            let mut last = vec![rat_i(0); n];
            last[n - 2] = rat_i(1);
            last[n - 1] = rat_i(1);
            r.push(last);
            r
        }
        Family::E => e8_simple_roots().into_iter().take(n).collect(),
        Family::F => {
            let h = rat(1, 2);
            vec![
                diff(4, 1, 2),
                diff(4, 2, 3),
                unit(4, 3),
                vec![h.clone(), -h.clone(), -h.clone(), -h],
            ]
        }
        Family::G => {
            vec![
                diff(3, 0, 1),
                vec![rat_i(-2), rat_i(1), rat_i(1)],
            ]
        }
    }
}

/// Builds the full exact realization for an admissible spec.
pub fn build_root_system(spec: RootSystemSpec) -> Result<RootSystem, RootSystemError> {
    if !spec.is_admissible() {
        return Err(RootSystemError::InadmissibleRank {
            family: spec.family,
            rank: spec.rank,
            constraint: RootSystemSpec::rank_constraint(spec.family),
        });
    }
    let simple_roots = realize_simple_roots(&spec);
    let roots = root_closure(&simple_roots)?;
    let (positive_roots, negative) = positive_partition(&roots, &simple_roots)?;
    debug_assert_eq!(positive_roots.len(), negative.len());

    let mut orbit_sq_lengths: Vec<Rat> = Vec::new();
    for r in &roots {
        let sq = sq_norm(r);
        if !orbit_sq_lengths.contains(&sq) {
            orbit_sq_lengths.push(sq);
        }
    }
    orbit_sq_lengths.sort();
    let positive_orbits: Vec<usize> = positive_roots
        .iter()
        .map(|r| {
            let sq = sq_norm(r);
            orbit_sq_lengths.iter().position(|l| *l == sq).unwrap()
        })
        .collect();

    let projector = span_projector(&roots);
    let m = roots[0].len();
    // exact projector invariants
    assert_eq!(projector.mul(&projector), projector);
    assert_eq!(projector.transpose(), projector);
    assert_eq!(projector.rank(), spec.rank);
    for r in &roots {
        assert_eq!(projector.mul_vec(r), *r);
    }

    // full-rank realizations keep ambient coordinates; proper subspaces get a
    // Gram-Schmidt frame over the simple roots
    let chart = if spec.rank == m {
        (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect()
    } else {
        orthonormal_chart(&simple_roots)
    };
    check_chart(&chart, &projector, m, spec.rank);
    let charted_positive_roots: Vec<Vec<f64>> = positive_roots
        .iter()
        .map(|r| chart_vector(&chart, &to_f64_vec(r)))
        .collect();
    let charted_simple_roots: Vec<Vec<f64>> = simple_roots
        .iter()
        .map(|r| chart_vector(&chart, &to_f64_vec(r)))
        .collect();

    Ok(RootSystem {
        spec,
        ambient_dim: m,
        rank: spec.rank,
        roots,
        positive_roots,
        simple_roots,
        positive_orbits,
        orbit_sq_lengths,
        projector,
        chart,
        charted_positive_roots,
        charted_simple_roots,
    })
}

fn check_chart(chart: &[Vec<f64>], projector: &RatMat, m: usize, n: usize) {
    assert_eq!(chart.len(), n);
    for (i, qi) in chart.iter().enumerate() {
        for (j, qj) in chart.iter().enumerate() {
            let d: f64 = qi.iter().zip(qj).map(|(a, b)| a * b).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((d - target).abs() < 1e-12, "Q^T Q deviates at ({i},{j})");
        }
    }
    for r in 0..m {
        for c in 0..m {
            let qq: f64 = chart.iter().map(|q| q[r] * q[c]).sum();
            let p = rat_to_f64(&projector[(r, c)]);
            assert!((qq - p).abs() < 1e-12, "Q Q^T deviates from P at ({r},{c})");
        }
    }
}

pub fn neg_vec(v: &[Rat]) -> RatVec {
    neg(v)
}
