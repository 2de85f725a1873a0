//! Homomorphisms between finitely generated abelian groups, enumeration of
//! automorphisms of finite ones, and automorphism-orbit decisions.
//!
//! An endomorphism of `Z^r ⊕ T` is block lower triangular (there are no
//! nonzero maps `T -> Z^r`), and it is bijective exactly when its free block
//! lies in `GL_r(Z)` and its torsion block is an automorphism of `T`. Orbits
//! on `T` are decided prime by prime through height sequences, which are a
//! complete orbit invariant for finite abelian p-groups.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::error::{BoundExceeded, SearchBounds};
use crate::group::{factorize, FgElement, FgGroup};
use crate::matrix::IntMatrix;
use crate::snf::smith_normal_form;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HomError {
    #[error("expected {expected} generator images, found {found}")]
    WrongImageCount { expected: usize, found: usize },
    #[error("image of generator {0} is not a reduced element of the codomain")]
    NotInCodomain(usize),
    #[error("image of generator {0} is not killed by the order of that generator")]
    OrderIncompatible(usize),
}

/// A homomorphism given by the images of the canonical generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupHom {
    domain: FgGroup,
    codomain: FgGroup,
    images: Vec<FgElement>,
}

impl GroupHom {
    pub fn new(
        domain: FgGroup,
        codomain: FgGroup,
        images: Vec<FgElement>,
    ) -> Result<Self, HomError> {
        if images.len() != domain.generator_count() {
            return Err(HomError::WrongImageCount {
                expected: domain.generator_count(),
                found: images.len(),
            });
        }
        for (i, (img, ord)) in images.iter().zip(domain.generator_orders()).enumerate() {
            if !codomain.contains(img) {
                return Err(HomError::NotInCodomain(i));
            }
            if !ord.is_zero() && !codomain.scale(img, &ord).is_zero() {
                return Err(HomError::OrderIncompatible(i));
            }
        }
        Ok(GroupHom {
            domain,
            codomain,
            images,
        })
    }

    pub fn identity(g: &FgGroup) -> Self {
        GroupHom {
            domain: g.clone(),
            codomain: g.clone(),
            images: (0..g.generator_count()).map(|i| g.generator(i)).collect(),
        }
    }

    pub fn domain(&self) -> &FgGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FgGroup {
        &self.codomain
    }

    pub fn images(&self) -> &[FgElement] {
        &self.images
    }

    pub fn apply(&self, x: &FgElement) -> FgElement {
        let mut acc = self.codomain.zero();
        for (c, img) in self.domain.coords(x).iter().zip(&self.images) {
            if !c.is_zero() {
                acc = self.codomain.add(&acc, &self.codomain.scale(img, c));
            }
        }
        acc
    }

    /// `self ∘ first`
    pub fn compose(&self, first: &GroupHom) -> GroupHom {
        assert_eq!(
            first.codomain, self.domain,
            "composition of incompatible maps"
        );
        GroupHom {
            domain: first.domain.clone(),
            codomain: self.codomain.clone(),
            images: first.images.iter().map(|x| self.apply(x)).collect(),
        }
    }

    /// Whether this is a bijective endomorphism.
    pub fn is_automorphism(&self) -> bool {
        if self.domain != self.codomain {
            return false;
        }
        let r = self.domain.free_rank();
        let mut free_block = IntMatrix::zeros(r, r);
        for j in 0..r {
            for i in 0..r {
                free_block[(i, j)] = self.images[j].free[i].clone();
            }
        }
        if !free_block.determinant().abs().is_one() {
            return false;
        }
        let columns: Vec<Vec<BigInt>> =
            self.images[r..].iter().map(|x| x.torsion.clone()).collect();
        torsion_block_invertible(self.domain.torsion(), &columns)
    }
}

/// Invertibility of an endomorphism of `⊕ Z/d_i` given by the coordinates of
/// the generator images: for each prime `p`, the block on generators whose
/// order is divisible by `p` must be invertible modulo `p`.
fn torsion_block_invertible(orders: &[BigInt], columns: &[Vec<BigInt>]) -> bool {
    let Some(top) = orders.last() else {
        return true;
    };
    factorize(top).into_iter().all(|(p, _)| {
        let idx: Vec<usize> = (0..orders.len())
            .filter(|&i| orders[i].is_multiple_of(&p))
            .collect();
        let m: Vec<Vec<BigInt>> = idx
            .iter()
            .map(|&j| idx.iter().map(|&i| columns[i][j].mod_floor(&p)).collect())
            .collect();
        rank_mod_p_big(m, &p) == idx.len()
    })
}

fn rank_mod_p_big(mut m: Vec<Vec<BigInt>>, p: &BigInt) -> usize {
    let n = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..n).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = mod_inverse(&m[rank][c], p).expect("nonzero residue mod a prime");
        for i in 0..n {
            if i != rank && !m[i][c].is_zero() {
                let f = (&m[i][c] * &inv).mod_floor(p);
                for j in 0..cols {
                    let v = (&m[i][j] - &f * &m[rank][j]).mod_floor(p);
                    m[i][j] = v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Automorphism of a finite group stored as machine-word generator images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutMatrix {
    orders: Vec<u64>,
    /// `columns[i]` holds the coordinates of the image of generator `i`.
    columns: Vec<Vec<u64>>,
}

impl AutMatrix {
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn columns(&self) -> &[Vec<u64>] {
        &self.columns
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; self.orders.len()];
        for (c, col) in x.iter().zip(&self.columns) {
            if *c == 0 {
                continue;
            }
            for (o, (y, d)) in out.iter_mut().zip(col.iter().zip(&self.orders)) {
                *o = ((*o as u128 + *c as u128 * *y as u128) % *d as u128) as u64;
            }
        }
        out
    }

    pub fn to_hom(&self) -> GroupHom {
        let orders: Vec<BigInt> = self.orders.iter().map(|&d| BigInt::from(d)).collect();
        let g = FgGroup::from_invariants(0, orders).expect("canonical orders");
        let images = self
            .columns
            .iter()
            .map(|col| FgElement {
                free: Vec::new(),
                torsion: col.iter().map(|&c| BigInt::from(c)).collect(),
            })
            .collect();
        GroupHom {
            domain: g.clone(),
            codomain: g,
            images,
        }
    }
}

fn small_orders(t: &FgGroup, bounds: &SearchBounds) -> Result<Vec<u64>, BoundExceeded> {
    assert!(
        t.is_finite(),
        "automorphism enumeration needs a finite group"
    );
    let order = t.order().unwrap();
    if order > BigInt::from(bounds.max_group_order) {
        return Err(BoundExceeded::new(
            "group order",
            order,
            bounds.max_group_order,
        ));
    }
    Ok(t.torsion().iter().map(|d| d.to_u64().unwrap()).collect())
}

/// Number of endomorphisms of a finite group, `∏_{i,j} gcd(d_i, d_j)`.
pub fn endomorphism_count(t: &FgGroup) -> BigInt {
    let d = t.torsion();
    d.iter()
        .flat_map(|a| d.iter().map(move |b| a.gcd(b)))
        .product()
}

fn primes_of(orders: &[u64]) -> Vec<u64> {
    let Some(&top) = orders.last() else {
        return Vec::new();
    };
    factorize(&BigInt::from(top))
        .into_iter()
        .map(|(p, _)| p.to_u64().unwrap())
        .collect()
}

fn rank_mod_p(mut m: Vec<Vec<u64>>, p: u64) -> usize {
    let n = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..n).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = pow_mod(m[rank][c], p - 2, p);
        for i in 0..n {
            if i != rank && m[i][c] != 0 {
                let f = m[i][c] * inv % p;
                for j in 0..cols {
                    m[i][j] = (m[i][j] + (p - f) * m[rank][j]) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Visits every automorphism of the finite group `t` exactly once, in
/// lexicographic order of generator images.
///
/// Candidates are generator-image tuples respecting `Hom(Z/d_i, Z/d_j) ≅
/// Z/gcd(d_i, d_j)`; partial tuples whose images are already dependent
/// modulo some prime are pruned.
pub fn for_each_automorphism<F>(
    t: &FgGroup,
    bounds: &SearchBounds,
    mut f: F,
) -> Result<(), BoundExceeded>
where
    F: FnMut(&AutMatrix) -> ControlFlow<()>,
{
    let orders = small_orders(t, bounds)?;
    let count = endomorphism_count(t);
    if count > BigInt::from(bounds.max_candidates) {
        return Err(BoundExceeded::new(
            "endomorphism count",
            count,
            bounds.max_candidates,
        ));
    }
    let primes = primes_of(&orders);
    let n = orders.len();
    let mut state = AutSearch {
        orders: &orders,
        primes: &primes,
        columns: vec![vec![0; n]; n],
        stopped: false,
    };
    state.dfs(0, &mut f);
    Ok(())
}

struct AutSearch<'a> {
    orders: &'a [u64],
    primes: &'a [u64],
    columns: Vec<Vec<u64>>,
    stopped: bool,
}

impl AutSearch<'_> {
    fn dfs<F: FnMut(&AutMatrix) -> ControlFlow<()>>(&mut self, i: usize, f: &mut F) {
        let n = self.orders.len();
        if i == n {
            let m = AutMatrix {
                orders: self.orders.to_vec(),
                columns: self.columns.clone(),
            };
            if f(&m).is_break() {
                self.stopped = true;
            }
            return;
        }
        let di = self.orders[i];
        let steps: Vec<u64> = self.orders.iter().map(|&dj| dj / gcd_u64(di, dj)).collect();
        let counts: Vec<u64> = self.orders.iter().map(|&dj| gcd_u64(di, dj)).collect();
        let mut digits = vec![0u64; n];
        loop {
            for j in 0..n {
                self.columns[i][j] = digits[j] * steps[j];
            }
            if self.prefix_independent(i) {
                self.dfs(i + 1, f);
                if self.stopped {
                    return;
                }
            }
            let mut j = n;
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                digits[j] += 1;
                if digits[j] < counts[j] {
                    break;
                }
                digits[j] = 0;
            }
        }
    }

    /// Images of generators `0..=last` stay independent modulo each prime.
    fn prefix_independent(&self, last: usize) -> bool {
        self.primes.iter().all(|&p| {
            if !self.orders[last].is_multiple_of(p) {
                return true;
            }
            let idx: Vec<usize> = (0..self.orders.len())
                .filter(|&i| self.orders[i].is_multiple_of(p))
                .collect();
            let chosen: Vec<Vec<u64>> = idx
                .iter()
                .filter(|&&i| i <= last)
                .map(|&i| idx.iter().map(|&j| self.columns[i][j] % p).collect())
                .collect();
            let k = chosen.len();
            rank_mod_p(chosen, p) == k
        })
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// All automorphisms of a finite group.
pub fn enumerate_automorphisms(
    t: &FgGroup,
    bounds: &SearchBounds,
) -> Result<Vec<GroupHom>, BoundExceeded> {
    let mut out = Vec::new();
    for_each_automorphism(t, bounds, |m| {
        out.push(m.to_hom());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn automorphism_count(t: &FgGroup, bounds: &SearchBounds) -> Result<u64, BoundExceeded> {
    let mut n = 0u64;
    for_each_automorphism(t, bounds, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// Height sequence of an element of the `p`-primary part
/// `⊕ Z/p^{e_i}`: the heights of `y, p*y, p^2*y, ...` until zero.
fn height_sequence(p: &BigInt, moduli: &[BigInt], y: &[BigInt]) -> Vec<u32> {
    let mut y: Vec<BigInt> = y.to_vec();
    let mut seq = Vec::new();
    loop {
        let h = y
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| valuation(c, p))
            .min();
        match h {
            None => return seq,
            Some(h) => seq.push(h),
        }
        for (c, m) in y.iter_mut().zip(moduli) {
            *c = (&*c * p).mod_floor(m);
        }
    }
}

fn valuation(x: &BigInt, p: &BigInt) -> u32 {
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `p`-primary part of a finite group `⊕ Z/d_i`: positions, moduli `p^{e_i}`.
struct PrimaryPart {
    p: BigInt,
    positions: Vec<usize>,
    exponents: Vec<u32>,
    moduli: Vec<BigInt>,
}

impl PrimaryPart {
    fn new(orders: &[BigInt], p: BigInt) -> Self {
        let mut positions = Vec::new();
        let mut exponents = Vec::new();
        let mut moduli = Vec::new();
        for (i, d) in orders.iter().enumerate() {
            let e = valuation(d, &p);
            if e > 0 {
                positions.push(i);
                exponents.push(e);
                moduli.push(num_traits::pow(p.clone(), e as usize));
            }
        }
        PrimaryPart {
            p,
            positions,
            exponents,
            moduli,
        }
    }

    fn component(&self, torsion: &[BigInt]) -> Vec<BigInt> {
        self.positions
            .iter()
            .zip(&self.moduli)
            .map(|(&i, m)| torsion[i].mod_floor(m))
            .collect()
    }

    fn heights(&self, y: &[BigInt]) -> Vec<u32> {
        height_sequence(&self.p, &self.moduli, y)
    }

    /// Whether some element of `b + p^v * P` has the height sequence `target`.
    fn coset_meets(
        &self,
        b: &[BigInt],
        v: u32,
        target: &[u32],
        bounds: &SearchBounds,
    ) -> Result<bool, BoundExceeded> {
        let pv = num_traits::pow(self.p.clone(), v as usize);
        let ranges: Vec<BigInt> = self
            .exponents
            .iter()
            .map(|&e| num_traits::pow(self.p.clone(), e.saturating_sub(v) as usize))
            .collect();
        let size: BigInt = ranges.iter().product();
        if size > BigInt::from(bounds.max_group_order) {
            return Err(BoundExceeded::new(
                "coset size",
                size,
                bounds.max_group_order,
            ));
        }
        let ranges: Vec<u64> = ranges.iter().map(|r| r.to_u64().unwrap()).collect();
        let mut digits = vec![0u64; ranges.len()];
        loop {
            let c: Vec<BigInt> = b
                .iter()
                .zip(&digits)
                .zip(&self.moduli)
                .map(|((x, &t), m)| (x + &pv * BigInt::from(t)).mod_floor(m))
                .collect();
            if self.heights(&c) == target {
                return Ok(true);
            }
            let mut j = ranges.len();
            loop {
                if j == 0 {
                    return Ok(false);
                }
                j -= 1;
                digits[j] += 1;
                if digits[j] < ranges[j] {
                    break;
                }
                digits[j] = 0;
            }
        }
    }
}

/// Complete invariant of the `Aut(T)`-orbit of a torsion element: the height
/// sequence of its component at every prime dividing `|T|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitSignature(pub Vec<(BigInt, Vec<u32>)>);

pub fn torsion_orbit_signature(g: &FgGroup, torsion: &[BigInt]) -> OrbitSignature {
    let orders = g.torsion();
    let Some(top) = orders.last() else {
        return OrbitSignature(Vec::new());
    };
    OrbitSignature(
        factorize(top)
            .into_iter()
            .map(|(p, _)| {
                let part = PrimaryPart::new(orders, p.clone());
                let seq = part.heights(&part.component(torsion));
                (p, seq)
            })
            .collect(),
    )
}

/// Whether some automorphism `α` of `g` satisfies `α(a) - b ∈ e*g`
/// (`e = 0` asks for `α(a) = b`).
///
/// With `d` the content of the free part of `a`, the free block of `α` can
/// carry `a_f` to any vector `d*w` with `w` primitive, and the shear block
/// contributes all of `d*T`. So the free parts must match modulo `e` and
/// some `Aut(T)`-image of `a_t` must lie in `b_t + gcd(d, e)*T`.
pub fn aut_equivalent_mod(
    g: &FgGroup,
    a: &FgElement,
    b: &FgElement,
    e: &BigInt,
    bounds: &SearchBounds,
) -> Result<bool, BoundExceeded> {
    let d = a.free_content();
    if !free_parts_match(&a.free, &b.free, &d, e) {
        return Ok(false);
    }
    let gp = d.gcd(e);
    torsion_coset_meets_orbit(g, &a.torsion, &b.torsion, &gp, bounds)
}

/// Whether some automorphism of `g` maps `a` to `b`.
pub fn aut_orbit_equivalent(
    g: &FgGroup,
    a: &FgElement,
    b: &FgElement,
    bounds: &SearchBounds,
) -> Result<bool, BoundExceeded> {
    aut_equivalent_mod(g, a, b, &BigInt::zero(), bounds)
}

/// `∃ F ∈ GL_r(Z)` with `F a ≡ b (mod e)`, where `d` is the content of `a`.
fn free_parts_match(a: &[BigInt], b: &[BigInt], d: &BigInt, e: &BigInt) -> bool {
    let content_b = b.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if e.is_zero() {
        return *d == content_b;
    }
    if d.is_zero() {
        return b.iter().all(|x| x.is_multiple_of(e));
    }
    primitive_residue(a.len(), b, d, e).is_some()
}

/// For `d > 0`, `e > 0`: a residue `p0` modulo `m = e/gcd(d,e)` with
/// `d*p0 ≡ b (mod e)` that lifts to a primitive integer vector.
fn primitive_residue(
    r: usize,
    b: &[BigInt],
    d: &BigInt,
    e: &BigInt,
) -> Option<(Vec<BigInt>, BigInt)> {
    let g = d.gcd(e);
    if !b.iter().all(|x| x.is_multiple_of(&g)) {
        return None;
    }
    let m = e / &g;
    if m.is_one() {
        return Some((vec![BigInt::zero(); r], m));
    }
    let inv = mod_inverse(&(d / &g).mod_floor(&m), &m)?;
    let p0: Vec<BigInt> = b.iter().map(|x| ((x / &g) * &inv).mod_floor(&m)).collect();
    let ok = if r == 1 {
        p0[0].is_one() || p0[0] == &m - 1u32
    } else {
        p0.iter().fold(m.clone(), |acc, x| acc.gcd(x)).is_one()
    };
    ok.then_some((p0, m))
}

/// An integer vector congruent to `p0` modulo `m` with content 1.
fn lift_primitive(p0: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    let r = p0.len();
    if r == 1 {
        return vec![if p0[0].is_one() || m.is_one() {
            BigInt::one()
        } else {
            BigInt::from(-1)
        }];
    }
    let mut x = p0.to_vec();
    let rest = |x: &[BigInt]| x[1..].iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if rest(&x).is_zero() {
        x[1] += m;
    }
    let g_rest = rest(&x);
    // gcd(x0 + t*m, g_rest) = 1 for some t < g_rest since gcd(x0, m, g_rest) = 1
    let base = x[0].clone();
    let mut t = BigInt::zero();
    loop {
        let cand = &base + &t * m;
        if cand.gcd(&g_rest).is_one() {
            x[0] = cand;
            return x;
        }
        t += 1;
    }
}

fn torsion_coset_meets_orbit(
    g: &FgGroup,
    a: &[BigInt],
    b: &[BigInt],
    gp: &BigInt,
    bounds: &SearchBounds,
) -> Result<bool, BoundExceeded> {
    let orders = g.torsion();
    let Some(top) = orders.last() else {
        return Ok(true);
    };
    for (p, _) in factorize(top) {
        let v = if gp.is_zero() {
            u32::MAX
        } else {
            valuation(gp, &p)
        };
        if v == 0 {
            continue;
        }
        let part = PrimaryPart::new(orders, p);
        let target = part.heights(&part.component(a));
        let bp = part.component(b);
        let max_e = *part.exponents.iter().max().unwrap();
        let meets = if v >= max_e {
            part.heights(&bp) == target
        } else {
            part.coset_meets(&bp, v, &target, bounds)?
        };
        if !meets {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `U` unimodular with `U*v = content(v) * e_1`, together with `U^{-1}`.
fn unimodular_to_first(v: &[BigInt]) -> (IntMatrix, IntMatrix) {
    let col = IntMatrix::from_entries(v.len(), 1, v.to_vec());
    let r = smith_normal_form(&col);
    let (mut u, mut u_inv) = (r.u, r.u_inv);
    // u * v * w = s with w = [±1]
    if r.v[(0, 0)].is_negative() {
        u.negate_row(0);
        u_inv.negate_col(0);
    }
    (u, u_inv)
}

/// An automorphism `α` of `g` with `α(a) - b ∈ e*g`, if one exists.
///
/// The torsion block is found by enumerating `Aut(T)`; the free and shear
/// blocks are constructed directly.
pub fn automorphism_mapping_mod(
    g: &FgGroup,
    a: &FgElement,
    b: &FgElement,
    e: &BigInt,
    bounds: &SearchBounds,
) -> Result<Option<GroupHom>, BoundExceeded> {
    if !aut_equivalent_mod(g, a, b, e, bounds)? {
        return Ok(None);
    }
    let r = g.free_rank();
    let d = a.free_content();
    let gp = d.gcd(e);
    let tors = g.torsion_subgroup();

    // torsion block: M with b_t - M a_t ∈ gp*T
    let at = FgElement {
        free: Vec::new(),
        torsion: a.torsion.clone(),
    };
    let bt = FgElement {
        free: Vec::new(),
        torsion: b.torsion.clone(),
    };
    let mut found: Option<GroupHom> = cyclic_torsion_block(&tors, &a.torsion, &b.torsion, &gp);
    if found.is_none() {
        for_each_automorphism(&tors, bounds, |m| {
            let h = m.to_hom();
            let diff = tors.sub(&bt, &h.apply(&at));
            if tors.is_multiple_of(&diff, &gp) {
                found = Some(h);
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
    }
    let m = found.expect("orbit criterion guarantees a torsion block");

    // free block F with F a_f ≡ b_f (mod e)
    let free_block = if d.is_zero() {
        IntMatrix::identity(r)
    } else {
        let target: Vec<BigInt> = if e.is_zero() {
            b.free.clone()
        } else {
            let (p0, modulus) = primitive_residue(r, &b.free, &d, e).expect("checked above");
            lift_primitive(&p0, &modulus)
                .iter()
                .map(|x| x * &d)
                .collect()
        };
        let (ua, _) = unimodular_to_first(&a.free);
        let (_, ub_inv) = unimodular_to_first(&target);
        &ub_inv * &ua
    };

    // shear block X(x) = φ(x) * α * y with φ(a_f) = d and gp*y = w
    let w = tors.sub(&bt, &m.apply(&at));
    let shear: Vec<FgElement> = if d.is_zero() {
        vec![tors.zero(); r]
    } else {
        let (ua, _) = unimodular_to_first(&a.free);
        let ext = d.extended_gcd(e);
        let alpha = if e.is_zero() { BigInt::one() } else { ext.x };
        let y = divide_in(&tors, &w, &gp);
        let ay = tors.scale(&y, &alpha);
        (0..r).map(|j| tors.scale(&ay, &ua[(0, j)])).collect()
    };

    let mut images = Vec::with_capacity(g.generator_count());
    for j in 0..r {
        images.push(FgElement {
            free: free_block.column(j),
            torsion: shear[j].torsion.clone(),
        });
    }
    for img in m.images() {
        images.push(FgElement {
            free: vec![BigInt::zero(); r],
            torsion: img.torsion.clone(),
        });
    }
    let hom = GroupHom::new(g.clone(), g.clone(), images).expect("well-formed images");
    debug_assert!(hom.is_automorphism());
    Ok(Some(hom))
}

/// For cyclic `T = Z/n`: multiplication by a unit `u` with
/// `u*a - b ∈ gp*T`, built without enumeration. `None` when `T` is not cyclic.
fn cyclic_torsion_block(t: &FgGroup, a: &[BigInt], b: &[BigInt], gp: &BigInt) -> Option<GroupHom> {
    let unit_map = |u: BigInt| {
        let images = vec![t.element_from_coords(&[u])];
        GroupHom::new(t.clone(), t.clone(), images).ok()
    };
    match t.torsion() {
        [] => Some(GroupHom::identity(t)),
        [n] => {
            let modulus = gp.gcd(n);
            let modulus = if modulus.is_zero() {
                n.clone()
            } else {
                modulus
            };
            let h = a[0].gcd(&modulus);
            if !b[0].is_multiple_of(&h) {
                return None;
            }
            let step = &modulus / &h;
            let u0 = if step.is_one() {
                BigInt::zero()
            } else {
                let inv = mod_inverse(&(&a[0] / &h).mod_floor(&step), &step)?;
                ((&b[0] / &h) * inv).mod_floor(&step)
            };
            // a unit lifting u0 exists when the orbit criterion holds
            let mut u = u0;
            while !u.gcd(n).is_one() {
                u += &step;
                if u > n * 2u32 {
                    return None;
                }
            }
            unit_map(u.mod_floor(n))
        }
        _ => None,
    }
}

/// Some `y` with `k*y = w` in a finite group, assuming `w ∈ k*T`.
fn divide_in(t: &FgGroup, w: &FgElement, k: &BigInt) -> FgElement {
    let torsion = w
        .torsion
        .iter()
        .zip(t.torsion())
        .map(|(c, dmod)| {
            let g = k.gcd(dmod);
            let m = dmod / &g;
            if m.is_one() {
                return BigInt::zero();
            }
            let inv = mod_inverse(&(k / &g).mod_floor(&m), &m).unwrap();
            ((c / &g) * inv).mod_floor(&m)
        })
        .collect();
    FgElement {
        free: Vec::new(),
        torsion,
    }
}

/// An automorphism of `g` carrying `a` to `b`, if one exists.
pub fn orbit_witness(
    g: &FgGroup,
    a: &FgElement,
    b: &FgElement,
    bounds: &SearchBounds,
) -> Result<Option<GroupHom>, BoundExceeded> {
    automorphism_mapping_mod(g, a, b, &BigInt::zero(), bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn cyc(ms: &[i64]) -> FgGroup {
        FgGroup::from_cyclic_orders(&ms.iter().map(|&m| z(m)).collect::<Vec<_>>())
    }

    fn el(g: &FgGroup, c: &[i64]) -> FgElement {
        g.element_from_coords(&c.iter().map(|&x| z(x)).collect::<Vec<_>>())
    }

    #[test]
    fn automorphism_counts() {
        let b = SearchBounds::default();
        assert_eq!(automorphism_count(&cyc(&[4]), &b).unwrap(), 2);
        assert_eq!(automorphism_count(&FgGroup::trivial(), &b).unwrap(), 1);
        assert_eq!(automorphism_count(&cyc(&[2, 2]), &b).unwrap(), 6);
        assert_eq!(automorphism_count(&cyc(&[2, 2, 2]), &b).unwrap(), 168);
        // |Aut(Z/2 x Z/4)| = 8
        assert_eq!(automorphism_count(&cyc(&[2, 4]), &b).unwrap(), 8);
        assert_eq!(automorphism_count(&cyc(&[3, 3]), &b).unwrap(), 48);
    }

    #[test]
    fn enumerated_maps_are_distinct_automorphisms() {
        let g = cyc(&[2, 4]);
        let all = enumerate_automorphisms(&g, &SearchBounds::default()).unwrap();
        for (i, f) in all.iter().enumerate() {
            assert!(f.is_automorphism());
            assert!(all[..i].iter().all(|h| h != f));
        }
    }

    #[test]
    fn enumeration_respects_bounds() {
        let tight = SearchBounds {
            max_group_order: 10,
            max_candidates: 10,
        };
        assert!(automorphism_count(&cyc(&[16]), &tight).is_err());
        assert!(automorphism_count(&cyc(&[2, 2, 2]), &tight).is_err());
    }

    #[test]
    fn orbits_in_cyclic_groups() {
        let b = SearchBounds::default();
        let g = cyc(&[4]);
        assert!(aut_orbit_equivalent(&g, &el(&g, &[1]), &el(&g, &[3]), &b).unwrap());
        assert!(!aut_orbit_equivalent(&g, &el(&g, &[1]), &el(&g, &[2]), &b).unwrap());
        let z1 = FgGroup::free(1);
        assert!(aut_orbit_equivalent(&z1, &el(&z1, &[2]), &el(&z1, &[-2]), &b).unwrap());
        assert!(!aut_orbit_equivalent(&z1, &el(&z1, &[1]), &el(&z1, &[2]), &b).unwrap());
    }

    #[test]
    fn heights_separate_orbits_in_z2_z4() {
        // (1,0) has order 2 and height 0; (0,2) has order 2 and height 1
        let b = SearchBounds::default();
        let g = cyc(&[2, 4]);
        assert!(!aut_orbit_equivalent(&g, &el(&g, &[1, 0]), &el(&g, &[0, 2]), &b).unwrap());
        assert!(aut_orbit_equivalent(&g, &el(&g, &[1, 0]), &el(&g, &[1, 2]), &b).unwrap());
    }

    #[test]
    fn mixed_orbits_use_shears() {
        let b = SearchBounds::default();
        // Z x Z/2: (1,0) -> (1,1) by the shear x -> x + t
        let g = cyc(&[0, 2]);
        assert!(aut_orbit_equivalent(&g, &el(&g, &[1, 0]), &el(&g, &[1, 1]), &b).unwrap());
        // (2,0) vs (2,1): 2*T = 0, so the torsion parts must agree
        assert!(!aut_orbit_equivalent(&g, &el(&g, &[2, 0]), &el(&g, &[2, 1]), &b).unwrap());
        let w = orbit_witness(&g, &el(&g, &[1, 0]), &el(&g, &[-1, 1]), &b)
            .unwrap()
            .unwrap();
        assert!(w.is_automorphism());
        assert_eq!(w.apply(&el(&g, &[1, 0])), el(&g, &[-1, 1]));
    }

    #[test]
    fn witnesses_modulo_e() {
        let b = SearchBounds::default();
        let g = cyc(&[0, 0, 6]);
        let a = el(&g, &[2, 4, 1]);
        let t = el(&g, &[6, 10, 5]);
        let e = z(4);
        let ok = aut_equivalent_mod(&g, &a, &t, &e, &b).unwrap();
        let w = automorphism_mapping_mod(&g, &a, &t, &e, &b).unwrap();
        assert_eq!(ok, w.is_some());
        if let Some(w) = w {
            assert!(w.is_automorphism());
            let diff = g.sub(&w.apply(&a), &t);
            assert!(g.is_multiple_of(&diff, &e));
        }
    }

    #[test]
    fn hom_validation() {
        let g = cyc(&[4]);
        let h = cyc(&[2]);
        assert!(GroupHom::new(g.clone(), h.clone(), vec![el(&h, &[1])]).is_ok());
        assert_eq!(
            GroupHom::new(h.clone(), g.clone(), vec![el(&g, &[1])]),
            Err(HomError::OrderIncompatible(0))
        );
        assert!(GroupHom::new(h, g, vec![]).is_err());
    }
}
