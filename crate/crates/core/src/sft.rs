//! Adjacency matrices of irreducible one-sided shifts of finite type and
//! their per-factor invariants.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::group::{direct_sum, kernel_group, tensor, FgElement, FgGroup, Quotient};
use crate::homology::GradedGroups;
use crate::matrix::IntMatrix;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SftError {
    #[error("matrix is empty")]
    Empty,
    #[error("matrix is {rows}x{cols}, not square")]
    NotSquare { rows: usize, cols: usize },
    #[error("entry ({row}, {col}) is negative")]
    NegativeEntry { row: usize, col: usize },
    #[error("matrix is reducible")]
    Reducible,
    #[error("matrix is a permutation matrix")]
    PermutationMatrix,
}

impl SftError {
    /// Short machine-readable name of the failed condition.
    pub fn condition(&self) -> &'static str {
        match self {
            SftError::Empty => "empty",
            SftError::NotSquare { .. } => "not_square",
            SftError::NegativeEntry { .. } => "negative_entry",
            SftError::Reducible => "reducible",
            SftError::PermutationMatrix => "permutation_matrix",
        }
    }
}

/// A validated adjacency matrix: square, nonnegative, irreducible and not a
/// permutation matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SftMatrix {
    a: IntMatrix,
}

pub fn validate(a: IntMatrix) -> Result<SftMatrix, SftError> {
    if a.is_empty() {
        return Err(SftError::Empty);
    }
    if !a.is_square() {
        return Err(SftError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    for i in 0..n {
        for j in 0..n {
            if a[(i, j)].is_negative() {
                return Err(SftError::NegativeEntry { row: i, col: j });
            }
        }
    }
    if !is_irreducible(&a) {
        return Err(SftError::Reducible);
    }
    if is_permutation(&a) {
        return Err(SftError::PermutationMatrix);
    }
    Ok(SftMatrix { a })
}

fn support_graph(a: &IntMatrix) -> DiGraph<(), ()> {
    let n = a.rows();
    let mut g = DiGraph::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if !a[(i, j)].is_zero() {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    g
}

fn is_irreducible(a: &IntMatrix) -> bool {
    let g = support_graph(a);
    let sccs = tarjan_scc(&g);
    // a single vertex needs a loop to return to itself
    sccs.len() == 1 && (a.rows() > 1 || !a[(0, 0)].is_zero())
}

fn is_permutation(a: &IntMatrix) -> bool {
    let n = a.rows();
    let one = BigInt::from(1);
    let zero_or_one = a.entries().iter().all(|e| e.is_zero() || *e == one);
    zero_or_one
        && (0..n).all(|i| a.row(i).iter().filter(|e| !e.is_zero()).count() == 1)
        && (0..n).all(|j| (0..n).filter(|&i| !a[(i, j)].is_zero()).count() == 1)
}

impl SftMatrix {
    pub fn matrix(&self) -> &IntMatrix {
        &self.a
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }

    /// `[k]`, the full shift on `k >= 2` symbols.
    pub fn full_shift(k: u32) -> Self {
        validate(IntMatrix::from_rows(&[vec![k]])).expect("full shift needs k >= 2")
    }

    /// The `r x r` matrix with `k` in the top right corner and ones on the
    /// subdiagonal; its full group is the Higman-Thompson group `V_{k,r}`.
    pub fn higman_thompson(k: u32, r: usize) -> Self {
        assert!(k >= 2 && r >= 1);
        let mut m = IntMatrix::zeros(r, r);
        m[(0, r - 1)] += BigInt::from(k);
        for i in 1..r {
            m[(i, i - 1)] = BigInt::from(1);
        }
        validate(m).expect("Higman-Thompson matrix is valid")
    }

    /// `det(id - A)`.
    pub fn det_id_minus(&self) -> BigInt {
        self.a.identity_minus().determinant()
    }

    /// Whether some power of `A` is entrywise positive. Powers up to the
    /// Wielandt bound `(N-1)^2 + 1` are examined on the support pattern.
    pub fn is_primitive(&self) -> bool {
        let n = self.size();
        let base: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| !self.a[(i, j)].is_zero()).collect())
            .collect();
        let mut p = base.clone();
        for _ in 0..(n - 1) * (n - 1) + 1 {
            if p.iter().all(|row| row.iter().all(|&x| x)) {
                return true;
            }
            p = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).any(|k| p[i][k] && base[k][j]))
                        .collect()
                })
                .collect();
        }
        false
    }
}

/// The factor list of `nV_{k,r}`: `A_{k,r}` followed by `n-1` copies of `[k]`.
pub fn higher_thompson_factors(n: usize, k: u32, r: usize) -> Vec<SftMatrix> {
    assert!(n >= 1);
    let mut out = vec![SftMatrix::higman_thompson(k, r)];
    out.extend(std::iter::repeat_n(SftMatrix::full_shift(k), n - 1));
    out
}

#[derive(Clone, Debug)]
pub struct SftInvariants {
    /// `BF(A^t) = Z^N / (id - A^t) Z^N`.
    pub bf: FgGroup,
    /// Class of the all-ones vector in `bf`.
    pub unit: FgElement,
    pub det: BigInt,
    pub det_sign: i8,
    pub homology: GradedGroups,
    pub k0: FgGroup,
    pub k1: FgGroup,
    /// Quotient map `Z^N -> bf`.
    pub bf_map: Quotient,
    /// Basis of `ker(id - A^t)`.
    pub h1_basis: Vec<Vec<BigInt>>,
}

pub fn invariants(a: &SftMatrix) -> SftInvariants {
    let m = a.a.transpose().identity_minus();
    let bf_map = Quotient::cokernel(&m);
    let bf = bf_map.group.clone();
    let ones = vec![BigInt::from(1); a.size()];
    let unit = bf_map.project(&ones);
    let det = a.det_id_minus();
    let det_sign = sign(&det);
    let ker = kernel_group(&m);
    let homology = GradedGroups::from_parts(vec![bf.clone(), ker.group.clone()], unit.clone());
    SftInvariants {
        k0: bf.clone(),
        k1: ker.group.clone(),
        bf,
        unit,
        det,
        det_sign,
        homology,
        bf_map,
        h1_basis: ker.basis,
    }
}

pub(crate) fn sign(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

/// `(H_0 ⊗ Z/2) ⊕ H_1`.
pub fn sft_abelianization(a: &SftMatrix) -> FgGroup {
    let inv = invariants(a);
    let h0_mod2 = tensor(&inv.bf, &FgGroup::cyclic(2)).group().clone();
    direct_sum([&h0_mod2, &inv.k1])
}
