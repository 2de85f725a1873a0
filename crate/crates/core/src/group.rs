//! Finitely generated abelian groups in invariant-factor form.
//!
//! A group is `Z^r ⊕ Z/d_1 ⊕ ... ⊕ Z/d_s` with `2 <= d_1 | d_2 | ... | d_s`.
//! Canonical generators are ordered free generators first, then torsion
//! generators in chain order; [`FgElement`] uses the same coordinates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::matrix::IntMatrix;
use crate::snf::{smith_normal_form, SnfResult};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

/// Element of an [`FgGroup`] in canonical coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgElement {
    pub free: Vec<BigInt>,
    pub torsion: Vec<BigInt>,
}

impl FgElement {
    pub fn is_zero(&self) -> bool {
        self.free.iter().all(Zero::is_zero) && self.torsion.iter().all(Zero::is_zero)
    }

    /// Gcd of the free coordinates (0 when the free part vanishes).
    pub fn free_content(&self) -> BigInt {
        self.free.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }
}

/// gcd with the convention `gcd(0, x) = x`, so that `Z_0 = Z` behaves as
/// the free cyclic group in tensor products.
pub fn cyclic_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

impl FgGroup {
    pub fn trivial() -> Self {
        FgGroup {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn free(rank: usize) -> Self {
        FgGroup {
            free_rank: rank,
            torsion: Vec::new(),
        }
    }

    /// `Z/m`, or `Z` when `m == 0`.
    pub fn cyclic(m: impl Into<BigInt>) -> Self {
        Self::from_cyclic_orders(&[m.into()])
    }

    /// Builds a group from an already canonical invariant-factor chain.
    /// Returns `None` if the chain is not canonical.
    pub fn from_invariants(free_rank: usize, torsion: Vec<BigInt>) -> Option<Self> {
        let ok = torsion.iter().all(|d| *d >= BigInt::from(2))
            && torsion.windows(2).all(|w| w[1].is_multiple_of(&w[0]));
        ok.then_some(FgGroup { free_rank, torsion })
    }

    /// Canonical form of `⊕_i Z/orders[i]` where `0` stands for `Z`.
    pub fn from_cyclic_orders(orders: &[BigInt]) -> Self {
        Quotient::of_cyclics(orders).group
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    /// Number of canonical generators.
    pub fn generator_count(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    /// Orders of the canonical generators (0 for free ones).
    pub fn generator_orders(&self) -> Vec<BigInt> {
        std::iter::repeat_n(BigInt::zero(), self.free_rank)
            .chain(self.torsion.iter().cloned())
            .collect()
    }

    /// Order of the group, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.torsion.iter().fold(BigInt::one(), |acc, d| acc * d))
    }

    pub fn torsion_subgroup(&self) -> FgGroup {
        FgGroup {
            free_rank: 0,
            torsion: self.torsion.clone(),
        }
    }

    pub fn exponent(&self) -> Option<BigInt> {
        self.is_finite()
            .then(|| self.torsion.last().cloned().unwrap_or_else(BigInt::one))
    }

    pub fn zero(&self) -> FgElement {
        FgElement {
            free: vec![BigInt::zero(); self.free_rank],
            torsion: vec![BigInt::zero(); self.torsion.len()],
        }
    }

    /// The `i`-th canonical generator.
    pub fn generator(&self, i: usize) -> FgElement {
        let mut coords = vec![BigInt::zero(); self.generator_count()];
        coords[i] = BigInt::one();
        self.element_from_coords(&coords)
    }

    /// Interprets a coordinate vector (free then torsion), reducing torsion.
    pub fn element_from_coords(&self, coords: &[BigInt]) -> FgElement {
        assert_eq!(coords.len(), self.generator_count());
        let (free, tors) = coords.split_at(self.free_rank);
        self.reduce(FgElement {
            free: free.to_vec(),
            torsion: tors.to_vec(),
        })
    }

    pub fn coords(&self, x: &FgElement) -> Vec<BigInt> {
        x.free.iter().chain(&x.torsion).cloned().collect()
    }

    pub fn reduce(&self, mut x: FgElement) -> FgElement {
        for (c, d) in x.torsion.iter_mut().zip(&self.torsion) {
            *c = c.mod_floor(d);
        }
        x
    }

    pub fn contains(&self, x: &FgElement) -> bool {
        x.free.len() == self.free_rank
            && x.torsion.len() == self.torsion.len()
            && x.torsion
                .iter()
                .zip(&self.torsion)
                .all(|(c, d)| !c.is_negative() && c < d)
    }

    pub fn add(&self, a: &FgElement, b: &FgElement) -> FgElement {
        self.reduce(FgElement {
            free: a.free.iter().zip(&b.free).map(|(x, y)| x + y).collect(),
            torsion: a
                .torsion
                .iter()
                .zip(&b.torsion)
                .map(|(x, y)| x + y)
                .collect(),
        })
    }

    pub fn neg(&self, a: &FgElement) -> FgElement {
        self.scale(a, &BigInt::from(-1))
    }

    pub fn sub(&self, a: &FgElement, b: &FgElement) -> FgElement {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &FgElement, k: &BigInt) -> FgElement {
        self.reduce(FgElement {
            free: a.free.iter().map(|x| x * k).collect(),
            torsion: a.torsion.iter().map(|x| x * k).collect(),
        })
    }

    /// Order of an element, `None` when it has infinite order.
    pub fn element_order(&self, x: &FgElement) -> Option<BigInt> {
        if !x.free.iter().all(Zero::is_zero) {
            return None;
        }
        Some(
            x.torsion
                .iter()
                .zip(&self.torsion)
                .fold(BigInt::one(), |acc, (c, d)| {
                    let o = d / c.gcd(d);
                    acc.lcm(&o)
                }),
        )
    }

    /// Whether `x` lies in `k * G`.
    pub fn is_multiple_of(&self, x: &FgElement, k: &BigInt) -> bool {
        let free_ok = if k.is_zero() {
            x.free.iter().all(Zero::is_zero)
        } else {
            x.free.iter().all(|c| c.is_multiple_of(k))
        };
        free_ok
            && x.torsion
                .iter()
                .zip(&self.torsion)
                .all(|(c, d)| c.is_multiple_of(&k.gcd(d)))
    }

    /// All elements of a finite group, in lexicographic coordinate order.
    ///
    /// Panics on infinite groups.
    pub fn elements(&self) -> impl Iterator<Item = FgElement> + '_ {
        assert!(self.is_finite(), "cannot enumerate an infinite group");
        let total = self.order().unwrap().to_u64().expect("group too large");
        (0..total).map(move |mut idx| {
            let mut torsion = vec![BigInt::zero(); self.torsion.len()];
            for (c, d) in torsion.iter_mut().zip(&self.torsion).rev() {
                let d = d.to_u64().unwrap();
                *c = BigInt::from(idx % d);
                idx /= d;
            }
            FgElement {
                free: Vec::new(),
                torsion,
            }
        })
    }

    /// Primary decomposition as a list of cyclic orders: prime powers for the
    /// torsion part and `0` for each free summand.
    pub fn primary_orders(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        for d in &self.torsion {
            for (p, e) in factorize(d) {
                out.push(num_traits::pow(p, e as usize));
            }
        }
        out.sort();
        out.extend(std::iter::repeat_n(BigInt::zero(), self.free_rank));
        out
    }

    /// Invariant-factor decomposition as cyclic orders, `0` for free summands.
    pub fn invariant_orders(&self) -> Vec<BigInt> {
        let mut out = self.torsion.clone();
        out.extend(std::iter::repeat_n(BigInt::zero(), self.free_rank));
        out
    }

    /// Whether `Z/m` occurs as a direct summand (m >= 2).
    pub fn has_cyclic_summand(&self, m: &BigInt) -> bool {
        self.primary_orders().contains(m)
    }
}

/// `G_1 ⊕ G_2 ⊕ ...`
pub fn direct_sum<'a>(groups: impl IntoIterator<Item = &'a FgGroup>) -> FgGroup {
    let mut orders = Vec::new();
    for g in groups {
        orders.extend(g.generator_orders());
    }
    FgGroup::from_cyclic_orders(&orders)
}

/// `G^k`
pub fn power(g: &FgGroup, k: usize) -> FgGroup {
    direct_sum(std::iter::repeat_n(g, k))
}

/// Trial-division factorization into `(prime, exponent)` pairs.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while n.is_multiple_of(&p) {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

impl fmt::Display for FgGroup {
    /// Renders as `Z^r x Z/d1 x Z/d2`, or `0` for the trivial group.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        write!(f, "{}", parts.join(" x "))
    }
}

impl fmt::Debug for FgGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FgGroup({self})")
    }
}

/// A presented group `Z^n / image(M)` together with the change of basis
/// to canonical coordinates.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub group: FgGroup,
    snf: SnfResult,
    ambient: usize,
    /// Rows of `U*x` that become the free coordinates, in order.
    free_rows: Vec<usize>,
    /// Rows of `U*x` that become torsion coordinates, in chain order.
    torsion_rows: Vec<usize>,
}

impl Quotient {
    /// `Z^rows / M Z^cols`.
    pub fn cokernel(m: &IntMatrix) -> Self {
        let snf = smith_normal_form(m);
        let diag = snf.diagonal();
        let mut free_rows = Vec::new();
        let mut torsion_rows = Vec::new();
        let mut torsion = Vec::new();
        for i in 0..m.rows() {
            match diag.get(i) {
                Some(d) if d.is_zero() => free_rows.push(i),
                Some(d) if d.is_one() => {}
                Some(d) => {
                    torsion_rows.push(i);
                    torsion.push(d.clone());
                }
                None => free_rows.push(i),
            }
        }
        Quotient {
            group: FgGroup {
                free_rank: free_rows.len(),
                torsion,
            },
            snf,
            ambient: m.rows(),
            free_rows,
            torsion_rows,
        }
    }

    /// Presentation of `⊕ Z/orders[i]` (`0` meaning `Z`) by a diagonal matrix.
    pub fn of_cyclics(orders: &[BigInt]) -> Self {
        if orders.is_empty() {
            return Quotient::cokernel(&IntMatrix::zeros(0, 0));
        }
        Quotient::cokernel(&IntMatrix::diagonal(orders))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Class of an integer vector.
    pub fn project(&self, x: &[BigInt]) -> FgElement {
        assert_eq!(x.len(), self.ambient);
        let y = self.snf.u.mul_vec(x);
        self.group.reduce(FgElement {
            free: self.free_rows.iter().map(|&i| y[i].clone()).collect(),
            torsion: self.torsion_rows.iter().map(|&i| y[i].clone()).collect(),
        })
    }

    /// An integer vector representing the class `x`.
    pub fn lift(&self, x: &FgElement) -> Vec<BigInt> {
        let mut y = vec![BigInt::zero(); self.ambient];
        for (&i, c) in self.free_rows.iter().zip(&x.free) {
            y[i] = c.clone();
        }
        for (&i, c) in self.torsion_rows.iter().zip(&x.torsion) {
            y[i] = c.clone();
        }
        self.snf.u_inv.mul_vec(&y)
    }
}

/// Cokernel `Z^N / M Z^N` of a square matrix.
pub fn cokernel(m: &IntMatrix) -> Quotient {
    assert!(m.is_square(), "cokernel expects a square matrix");
    Quotient::cokernel(m)
}

/// Kernel of `M` acting on `Z^cols`, as a free group with an explicit basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    pub group: FgGroup,
    pub basis: Vec<Vec<BigInt>>,
}

pub fn kernel_group(m: &IntMatrix) -> Kernel {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let basis: Vec<Vec<BigInt>> = (rank..m.cols()).map(|j| snf.v.column(j)).collect();
    Kernel {
        group: FgGroup::free(basis.len()),
        basis,
    }
}

/// `G_1 ⊗ ... ⊗ G_n` computed on the canonical cyclic decompositions, with
/// the multilinear element map.
#[derive(Clone, Debug)]
pub struct MultiTensor {
    factors: Vec<FgGroup>,
    quotient: Quotient,
}

impl MultiTensor {
    pub fn new(factors: &[FgGroup]) -> Self {
        let gen_orders: Vec<Vec<BigInt>> = factors.iter().map(FgGroup::generator_orders).collect();
        let mut orders = Vec::new();
        for_each_multi_index(factors, |idx| {
            // the empty tensor product is Z, hence the fold from 0
            let o = idx.iter().enumerate().fold(BigInt::zero(), |g, (d, &a)| {
                cyclic_gcd(&g, &gen_orders[d][a])
            });
            orders.push(o);
        });
        MultiTensor {
            factors: factors.to_vec(),
            quotient: Quotient::of_cyclics(&orders),
        }
    }

    pub fn group(&self) -> &FgGroup {
        &self.quotient.group
    }

    pub fn factors(&self) -> &[FgGroup] {
        &self.factors
    }

    /// Raw coordinates of a pure tensor in the multi-index basis.
    pub fn raw_pure(&self, xs: &[FgElement]) -> Vec<BigInt> {
        assert_eq!(xs.len(), self.factors.len());
        let coords: Vec<Vec<BigInt>> = self
            .factors
            .iter()
            .zip(xs)
            .map(|(g, x)| g.coords(x))
            .collect();
        let mut raw = Vec::with_capacity(self.quotient.ambient_dim());
        for_each_multi_index(&self.factors, |idx| {
            let v = idx
                .iter()
                .enumerate()
                .fold(BigInt::one(), |acc, (d, &a)| acc * &coords[d][a]);
            raw.push(v);
        });
        raw
    }

    /// `x_1 ⊗ ... ⊗ x_n` in canonical coordinates of the tensor group.
    pub fn pure(&self, xs: &[FgElement]) -> FgElement {
        self.quotient.project(&self.raw_pure(xs))
    }

    pub fn project_raw(&self, raw: &[BigInt]) -> FgElement {
        self.quotient.project(raw)
    }

    pub fn lift_raw(&self, x: &FgElement) -> Vec<BigInt> {
        self.quotient.lift(x)
    }

    /// Dimension of the raw multi-index basis.
    pub fn raw_dim(&self) -> usize {
        self.quotient.ambient_dim()
    }

    /// Row-major position of a multi-index in the raw basis.
    pub fn raw_position(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.factors)
            .fold(0, |acc, (&a, g)| acc * g.generator_count() + a)
    }
}

/// Calls `f` on every multi-index of generator positions, row-major.
pub(crate) fn for_each_multi_index(factors: &[FgGroup], mut f: impl FnMut(&[usize])) {
    let dims: Vec<usize> = factors.iter().map(FgGroup::generator_count).collect();
    if dims.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut d = dims.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < dims[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// `G ⊗ H` with its bilinear element map.
#[derive(Clone, Debug)]
pub struct TensorProduct(MultiTensor);

impl TensorProduct {
    pub fn group(&self) -> &FgGroup {
        self.0.group()
    }

    pub fn element(&self, a: &FgElement, b: &FgElement) -> FgElement {
        self.0.pure(&[a.clone(), b.clone()])
    }

    pub fn as_multi(&self) -> &MultiTensor {
        &self.0
    }
}

pub fn tensor(g: &FgGroup, h: &FgGroup) -> TensorProduct {
    TensorProduct(MultiTensor::new(&[g.clone(), h.clone()]))
}

pub fn tor(g: &FgGroup, h: &FgGroup) -> FgGroup {
    let orders: Vec<BigInt> = g
        .torsion
        .iter()
        .flat_map(|a| h.torsion.iter().map(move |b| a.gcd(b)))
        .collect();
    FgGroup::from_cyclic_orders(&orders)
}

pub fn ext_group(g: &FgGroup, h: &FgGroup) -> FgGroup {
    // Ext(Z_m, Z) = Z_m, Ext(Z_m, Z_n) = Z_gcd(m,n), Ext(Z, -) = 0
    let h_orders = h.generator_orders();
    let orders: Vec<BigInt> = g
        .torsion
        .iter()
        .flat_map(|a| h_orders.iter().map(move |b| a.gcd(b)))
        .collect();
    FgGroup::from_cyclic_orders(&orders)
}
