//! The exact coupling 4-tensor and its canonical-form decomposition.
//!
//! The operative object is the positive-pair sum
//!   S[i][j][l][m] = sum_{a>0, b>0} k_a k_b (a,b)(a_i b_j - a_j b_i)(a_l b_m - a_m b_l)
//! which, for every irreducible system of rank >= 2, is an exact rational
//! multiple c of the antisymmetrized projector form. The literal full-sum
//! variant (over R x R) is identically zero by parity; `parity_erratum_check`
//! documents that.
//!
//! All sums run over scaled integer coordinates and accumulate in i128, so
//! the results are exact; rationals only enter when dividing the scale back
//! out.

use crate::linalg::RatMat;
use crate::rat::{rat_i, Rat, RatVec};
use crate::rootsystems::{scale_to_integers, RootSystem, RootSystemSpec};
use num::traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExactFormError {
    #[error("expected {expected} per-orbit multiplicities, got {got}")]
    MultiplicityOrbitMismatch { expected: usize, got: usize },
    #[error("canonical constant undefined at rank {rank} (rank >= 2 required)")]
    DegenerateRank { rank: usize },
}

/// Dense exact 4-index tensor over ambient coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tensor4 {
    pub dim: usize,
    entries: Vec<Rat>,
}

impl Tensor4 {
    pub fn zeros(dim: usize) -> Self {
        Tensor4 {
            dim,
            entries: vec![Rat::zero(); dim * dim * dim * dim],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, l: usize, m: usize) -> usize {
        ((i * self.dim + j) * self.dim + l) * self.dim + m
    }

    pub fn get(&self, i: usize, j: usize, l: usize, m: usize) -> &Rat {
        &self.entries[self.idx(i, j, l, m)]
    }

    pub fn set(&mut self, i: usize, j: usize, l: usize, m: usize, v: Rat) {
        let at = self.idx(i, j, l, m);
        self.entries[at] = v;
    }

    pub fn max_abs(&self) -> Rat {
        crate::rat::max_abs(self.entries.iter().cloned())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|x| x.is_zero())
    }

    pub fn sub(&self, other: &Tensor4) -> Tensor4 {
        assert_eq!(self.dim, other.dim);
        Tensor4 {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Trace contraction sum_{i,j} S[i][j][i][j].
    pub fn trace_contraction(&self) -> Rat {
        let mut t = Rat::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                t += self.get(i, j, i, j);
            }
        }
        t
    }

    /// Conjugates all four slots by `g` (used by the Weyl-invariance checks):
    /// S'[ijlm] = sum g_ii' g_jj' g_ll' g_mm' S[i'j'l'm'].
    pub fn conjugate(&self, g: &RatMat) -> Tensor4 {
        assert_eq!(g.rows, self.dim);
        assert_eq!(g.cols, self.dim);
        let mut cur = self.clone();
        // contract one slot at a time
        for slot in 0..4 {
            let mut next = Tensor4::zeros(self.dim);
            let d = self.dim;
            for i in 0..d {
                for j in 0..d {
                    for l in 0..d {
                        for m in 0..d {
                            let v = cur.get(i, j, l, m);
                            if v.is_zero() {
                                continue;
                            }
                            let moving = [i, j, l, m][slot];
                            for t in 0..d {
                                let gv = &g[(t, moving)];
                                if gv.is_zero() {
                                    continue;
                                }
                                let mut ix = [i, j, l, m];
                                ix[slot] = t;
                                let add = gv * v;
                                let at = next.idx(ix[0], ix[1], ix[2], ix[3]);
                                next.entries[at] += add;
                            }
                        }
                    }
                }
            }
            cur = next;
        }
        cur
    }
}

/// The exact 4-form of the positive-pair sum, with its defining data.
#[derive(Debug, Clone)]
pub struct CouplingTensor {
    pub spec: RootSystemSpec,
    pub dim: usize,
    pub rank: usize,
    pub multiplicities: Vec<Rat>,
    pub tensor: Tensor4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Match,
    Mismatch,
    NoTableEntry,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Match => write!(f, "match"),
            Verdict::Mismatch => write!(f, "mismatch"),
            Verdict::NoTableEntry => write!(f, "no_table_entry"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalFormResult {
    pub c: Rat,
    /// Exact max-abs deviation of S from c * (P_il P_jm - P_im P_jl).
    pub proportionality_residual: Rat,
}

#[derive(Debug, Clone)]
pub struct TableComparison {
    pub table_value: Option<Rat>,
    pub verdict: Verdict,
}

/// Index pairs (i < j) of an ambient dimension, in lexicographic order.
fn index_pairs(dim: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push((i, j));
        }
    }
    out
}

/// Integer-scaled pair-sum accumulators, one block per ordered orbit pair.
/// acc[o][o'][p * np + q] holds the (pair p, pair q) component of the block
/// restricted to (alpha in orbit o, beta in orbit o'), scaled by d^6.
struct BlockAccumulators {
    n_orbits: usize,
    n_pairs: usize,
    scale: i64,
    blocks: Vec<Vec<i128>>,
    pairs: Vec<(usize, usize)>,
}

fn accumulate_blocks(roots: &[RatVec], orbits: &[usize], n_orbits: usize) -> BlockAccumulators {
    assert_eq!(roots.len(), orbits.len());
    let dim = roots[0].len();
    let pairs = index_pairs(dim);
    let np = pairs.len();
    let (scaled, d) = scale_to_integers(roots);
    let mut blocks = vec![vec![0i128; np * np]; n_orbits * n_orbits];
    let mut biv_a = vec![0i128; np];
    let mut biv_b = vec![0i128; np];
    for (ai, a) in scaled.iter().enumerate() {
        for (bi, b) in scaled.iter().enumerate() {
            let ip: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            if ip == 0 {
                continue;
            }
            for (p, &(i, j)) in pairs.iter().enumerate() {
                biv_a[p] = (a[i] * b[j] - a[j] * b[i]) as i128;
            }
            biv_b.copy_from_slice(&biv_a);
            let block = &mut blocks[orbits[ai] * n_orbits + orbits[bi]];
            let ip = ip as i128;
            for p in 0..np {
                let w = ip * biv_a[p];
                if w == 0 {
                    continue;
                }
                let row = &mut block[p * np..(p + 1) * np];
                for (q, slot) in row.iter_mut().enumerate() {
                    *slot += w * biv_b[q];
                }
            }
        }
    }
    BlockAccumulators {
        n_orbits,
        n_pairs: np,
        scale: d,
        blocks,
        pairs,
    }
}

impl BlockAccumulators {
    /// Assembles the dense tensor with per-orbit weights applied.
    fn tensor(&self, dim: usize, weights: impl Fn(usize, usize) -> Rat) -> Tensor4 {
        let d6 = {
            let d = rat_i(self.scale);
            &d * &d * &d * &d * &d * &d
        };
        let mut t = Tensor4::zeros(dim);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            for (q, &(l, m)) in self.pairs.iter().enumerate() {
                let mut v = Rat::zero();
                for o in 0..self.n_orbits {
                    for o2 in 0..self.n_orbits {
                        let raw = self.blocks[o * self.n_orbits + o2][p * self.n_pairs + q];
                        if raw != 0 {
                            v += weights(o, o2) * Rat::from_integer(raw.into());
                        }
                    }
                }
                let v = v / &d6;
                t.set(i, j, l, m, v.clone());
                t.set(j, i, l, m, -v.clone());
                t.set(i, j, m, l, -v.clone());
                t.set(j, i, m, l, v);
            }
        }
        t
    }
}

/// The positive-pair coupling tensor with per-orbit multiplicities.
pub fn coupling_tensor(
    rs: &RootSystem,
    multiplicities: &[Rat],
) -> Result<CouplingTensor, ExactFormError> {
    if multiplicities.len() != rs.orbit_count() {
        return Err(ExactFormError::MultiplicityOrbitMismatch {
            expected: rs.orbit_count(),
            got: multiplicities.len(),
        });
    }
    let tensor = positive_pair_tensor(
        &rs.positive_roots,
        &rs.positive_orbits,
        rs.orbit_count(),
        multiplicities,
    );
    Ok(CouplingTensor {
        spec: rs.spec,
        dim: rs.ambient_dim,
        rank: rs.rank,
        multiplicities: multiplicities.to_vec(),
        tensor,
    })
}

/// Engine shared with the positive-system-independence tests: builds the
/// tensor from an explicit positive-root list.
pub fn positive_pair_tensor(
    positive_roots: &[RatVec],
    orbits: &[usize],
    n_orbits: usize,
    multiplicities: &[Rat],
) -> Tensor4 {
    let dim = positive_roots[0].len();
    let acc = accumulate_blocks(positive_roots, orbits, n_orbits);
    acc.tensor(dim, |o, o2| &multiplicities[o] * &multiplicities[o2])
}

/// Canonical constant c and the exact residual of the Schur-type claim.
pub fn extract_canonical_constant(
    tensor: &CouplingTensor,
    projector: &RatMat,
) -> Result<CanonicalFormResult, ExactFormError> {
    let n = tensor.rank;
    if n < 2 {
        return Err(ExactFormError::DegenerateRank { rank: n });
    }
    extract_constant_raw(&tensor.tensor, projector, n)
}

fn extract_constant_raw(
    t: &Tensor4,
    projector: &RatMat,
    rank: usize,
) -> Result<CanonicalFormResult, ExactFormError> {
    if rank < 2 {
        return Err(ExactFormError::DegenerateRank { rank });
    }
    let trace = t.trace_contraction();
    let c = trace / rat_i((rank * rank - rank) as i64);
    let dim = t.dim;
    let mut residual = Rat::zero();
    for i in 0..dim {
        for j in 0..dim {
            for l in 0..dim {
                for m in 0..dim {
                    let canonical = &projector[(i, l)] * &projector[(j, m)]
                        - &projector[(i, m)] * &projector[(j, l)];
                    let dev = (t.get(i, j, l, m) - &c * canonical).abs();
                    if dev > residual {
                        residual = dev;
                    }
                }
            }
        }
    }
    Ok(CanonicalFormResult {
        c,
        proportionality_residual: residual,
    })
}

/// The printed table's formula for c, where a column exists.
pub fn table_formula(spec: &RootSystemSpec) -> Option<Rat> {
    let n = spec.rank as i64;
    match spec.family {
        crate::rootsystems::Family::A => Some(rat_i(2 * (n + 2))),
        crate::rootsystems::Family::B => Some(rat_i(4 * (2 * n - 3))),
        crate::rootsystems::Family::C => Some(rat_i(8 * (n + 2))),
        crate::rootsystems::Family::D => Some(rat_i(8 * (n - 2))),
        crate::rootsystems::Family::E => Some(rat_i(match n {
            6 => 6,
            7 => 96,
            _ => 320,
        })),
        crate::rootsystems::Family::F => Some(rat_i(30)),
        crate::rootsystems::Family::G => None,
    }
}

pub fn table_compare(spec: &RootSystemSpec, c: &Rat) -> TableComparison {
    match table_formula(spec) {
        Some(tv) => {
            let verdict = if tv == *c {
                Verdict::Match
            } else {
                Verdict::Mismatch
            };
            TableComparison {
                table_value: Some(tv),
                verdict,
            }
        }
        None => TableComparison {
            table_value: None,
            verdict: Verdict::NoTableEntry,
        },
    }
}

/// Literal full-sum form over R x R (with the printed 1/4 factor). The
/// summand is odd under beta -> -beta, so this is identically zero for every
/// root system; the positive-pair sum is the operative object.
pub fn parity_erratum_check(rs: &RootSystem) -> Tensor4 {
    let orbits = vec![0usize; rs.roots.len()];
    let acc = accumulate_blocks(&rs.roots, &orbits, 1);
    let quarter = crate::rat::rat(1, 4);
    acc.tensor(rs.ambient_dim, |_, _| quarter.clone())
}

/// Quadratic polynomial c(k) = sum over orbit pairs of c_oo' k_o k_o'.
#[derive(Debug, Clone)]
pub struct MultiplicityPolynomial {
    pub spec: RootSystemSpec,
    pub orbit_names: Vec<&'static str>,
    /// Ordered-block coefficients c_oo'.
    pub coeffs: Vec<Vec<Rat>>,
    /// Max proportionality residual over all orbit blocks (0 expected).
    pub max_block_residual: Rat,
}

impl MultiplicityPolynomial {
    pub fn evaluate(&self, k: &[Rat]) -> Rat {
        let n = self.coeffs.len();
        assert_eq!(k.len(), n);
        let mut c = Rat::zero();
        for o in 0..n {
            for o2 in 0..n {
                c += &self.coeffs[o][o2] * &k[o] * &k[o2];
            }
        }
        c
    }

    /// Coefficient of k_o * k_o' in c(k) (ordered blocks combined).
    pub fn combined_coeff(&self, o: usize, o2: usize) -> Rat {
        if o == o2 {
            self.coeffs[o][o].clone()
        } else {
            &self.coeffs[o][o2] + &self.coeffs[o2][o]
        }
    }
}

pub fn multiplicity_polynomial(rs: &RootSystem) -> Result<MultiplicityPolynomial, ExactFormError> {
    if rs.rank < 2 {
        return Err(ExactFormError::DegenerateRank { rank: rs.rank });
    }
    let n_orbits = rs.orbit_count();
    let acc = accumulate_blocks(&rs.positive_roots, &rs.positive_orbits, n_orbits);
    let mut coeffs = vec![vec![Rat::zero(); n_orbits]; n_orbits];
    let mut max_residual = Rat::zero();
    for o in 0..n_orbits {
        for o2 in 0..n_orbits {
            let block = acc.tensor(rs.ambient_dim, |a, b| {
                if a == o && b == o2 {
                    Rat::from_integer(1.into())
                } else {
                    Rat::zero()
                }
            });
            let res = extract_constant_raw(&block, &rs.projector, rs.rank)?;
            if res.proportionality_residual > max_residual {
                max_residual = res.proportionality_residual.clone();
            }
            coeffs[o][o2] = res.c;
        }
    }
    Ok(MultiplicityPolynomial {
        spec: rs.spec,
        orbit_names: rs.orbit_names(),
        coeffs,
        max_block_residual: max_residual,
    })
}
