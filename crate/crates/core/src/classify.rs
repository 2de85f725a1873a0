//! Isomorphism and Morita equivalence of SFT groupoids and of finite
//! products of SFT groupoids.
//!
//! A single pair is decided by the Bowen-Franks group, the unit class up to
//! automorphism and the sign of `det(id - A)`. Products additionally need a
//! matching of factors under which the determinants agree exactly and some
//! tuple of factorwise isomorphisms carries `⊗ u_{A_i}` to `⊗ u_{B_σ(i)}`.

use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::aut::{
    aut_equivalent_mod, aut_orbit_equivalent, automorphism_mapping_mod, orbit_witness, GroupHom,
};
use crate::error::{BoundExceeded, SearchBounds};
use crate::group::{FgElement, FgGroup, MultiTensor};
use crate::sft::{invariants, SftInvariants, SftMatrix};

/// Which invariant separated two inputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Separation {
    FactorCount {
        left: usize,
        right: usize,
    },
    BowenFranks {
        left: FgGroup,
        right: FgGroup,
    },
    DetSign {
        left: i8,
        right: i8,
    },
    /// No factor matching preserves Bowen-Franks groups and determinants.
    NoFactorMatching,
    /// Groups and signs (or determinants) match but the unit classes cannot
    /// be matched by any isomorphism.
    UnitClass,
}

impl std::fmt::Display for Separation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Separation::FactorCount { left, right } => {
                write!(f, "factor counts differ ({left} vs {right})")
            }
            Separation::BowenFranks { left, right } => {
                write!(f, "Bowen-Franks groups differ ({left} vs {right})")
            }
            Separation::DetSign { left, right } => {
                write!(f, "signs of det(id - A) differ ({left} vs {right})")
            }
            Separation::NoFactorMatching => write!(
                f,
                "no matching of factors preserves Bowen-Franks groups and det(id - A)"
            ),
            Separation::UnitClass => write!(f, "unit classes are not related by any isomorphism"),
        }
    }
}

/// A permutation `σ` and one isomorphism `BF(A_i^t) -> BF(B_σ(i)^t)` per factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub permutation: Vec<usize>,
    pub maps: Vec<GroupHom>,
}

impl Witness {
    pub fn is_identity(&self) -> bool {
        self.permutation.iter().enumerate().all(|(i, &s)| i == s)
            && self
                .maps
                .iter()
                .all(|m| *m == GroupHom::identity(m.domain()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationVerdict {
    pub isomorphic: bool,
    pub witness: Option<Witness>,
    pub reason: Option<Separation>,
}

impl ClassificationVerdict {
    fn yes(w: Witness) -> Self {
        ClassificationVerdict {
            isomorphic: true,
            witness: Some(w),
            reason: None,
        }
    }

    fn no(reason: Separation) -> Self {
        ClassificationVerdict {
            isomorphic: false,
            witness: None,
            reason: Some(reason),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("search bound exceeded after passing filters [{}]: {source}", passed.join(", "))]
    Bound {
        passed: Vec<&'static str>,
        #[source]
        source: BoundExceeded,
    },
    #[error("every factor has an infinite Bowen-Franks group; no finite reduction of the unit condition is available")]
    NoFiniteReduction,
}

fn bound<'a>(passed: &'a [&'static str]) -> impl Fn(BoundExceeded) -> ClassifyError + 'a {
    move |source| ClassifyError::Bound {
        passed: passed.to_vec(),
        source,
    }
}

/// Isomorphism of `G_A` and `G_B`: an isomorphism of Bowen-Franks groups
/// matching unit classes, and equal signs of `det(id - A)`, `det(id - B)`.
///
/// Both groups are in canonical form, so the only isomorphisms to consider
/// are automorphisms of the common group.
pub fn sft_isomorphic(
    a: &SftMatrix,
    b: &SftMatrix,
    bounds: &SearchBounds,
) -> Result<ClassificationVerdict, ClassifyError> {
    let (ia, ib) = (invariants(a), invariants(b));
    if ia.bf != ib.bf {
        return Ok(ClassificationVerdict::no(Separation::BowenFranks {
            left: ia.bf,
            right: ib.bf,
        }));
    }
    if ia.det_sign != ib.det_sign {
        return Ok(ClassificationVerdict::no(Separation::DetSign {
            left: ia.det_sign,
            right: ib.det_sign,
        }));
    }
    let passed = ["bowen_franks", "det_sign"];
    if !aut_orbit_equivalent(&ia.bf, &ia.unit, &ib.unit, bounds).map_err(bound(&passed))? {
        return Ok(ClassificationVerdict::no(Separation::UnitClass));
    }
    let phi = if ia.unit == ib.unit {
        GroupHom::identity(&ia.bf)
    } else {
        orbit_witness(&ia.bf, &ia.unit, &ib.unit, bounds)
            .map_err(bound(&passed))?
            .expect("orbit decision and witness search agree")
    };
    assert!(phi.is_automorphism() && phi.apply(&ia.unit) == ib.unit);
    Ok(ClassificationVerdict::yes(Witness {
        permutation: vec![0],
        maps: vec![phi],
    }))
}

/// Morita equivalence: isomorphic Bowen-Franks groups and equal signs.
pub fn sft_morita(a: &SftMatrix, b: &SftMatrix) -> bool {
    let (ia, ib) = (invariants(a), invariants(b));
    ia.bf == ib.bf && ia.det_sign == ib.det_sign
}

/// Isomorphism of `G_{A_1} x ... x G_{A_n}` and `G_{B_1} x ... x G_{B_m}`.
///
/// Requires `n == m` and a permutation `σ` with `BF(A_i^t) ≅ BF(B_σ(i)^t)`,
/// `det(id - A_i) == det(id - B_σ(i))` and isomorphisms `φ_i` with
/// `(⊗ φ_i)(⊗ u_{A_i}) = ⊗ u_{B_σ(i)}`. The tensor condition is tested
/// modulo the exponent `e` of the (finite) tensor product, where each
/// factor contributes the finitely many classes of its unit orbit modulo
/// `e`; this is exact because `e` kills the tensor product.
pub fn product_isomorphic(
    as_: &[SftMatrix],
    bs: &[SftMatrix],
    bounds: &SearchBounds,
) -> Result<ClassificationVerdict, ClassifyError> {
    if as_.len() != bs.len() {
        return Ok(ClassificationVerdict::no(Separation::FactorCount {
            left: as_.len(),
            right: bs.len(),
        }));
    }
    let ia: Vec<SftInvariants> = as_.iter().map(invariants).collect();
    let ib: Vec<SftInvariants> = bs.iter().map(invariants).collect();
    let n = ia.len();

    let mut left_bf: Vec<&FgGroup> = ia.iter().map(|x| &x.bf).collect();
    let mut right_bf: Vec<&FgGroup> = ib.iter().map(|x| &x.bf).collect();
    left_bf.sort();
    right_bf.sort();
    if left_bf != right_bf {
        let (l, r) = left_bf
            .iter()
            .zip(&right_bf)
            .find(|(l, r)| l != r)
            .map(|(l, r)| ((*l).clone(), (*r).clone()))
            .unwrap();
        return Ok(ClassificationVerdict::no(Separation::BowenFranks {
            left: l,
            right: r,
        }));
    }

    let perms = matchings(&ia, &ib);
    if perms.len() as u64 > bounds.max_candidates {
        return Err(bound(&["bowen_franks"])(BoundExceeded::new(
            "factor matchings",
            perms.len(),
            bounds.max_candidates,
        )));
    }
    if perms.is_empty() {
        return Ok(ClassificationVerdict::no(Separation::NoFactorMatching));
    }
    let passed = ["bowen_franks", "determinant"];
    let groups: Vec<FgGroup> = ia.iter().map(|x| x.bf.clone()).collect();
    let mt = MultiTensor::new(&groups);
    let source_units: Vec<FgElement> = ia.iter().map(|x| x.unit.clone()).collect();
    let tensor_finite = mt.group().is_finite();
    if !tensor_finite && n > 1 {
        // only an exact coincidence can be certified without a reduction
        for sigma in &perms {
            let target: Vec<FgElement> = sigma.iter().map(|&s| ib[s].unit.clone()).collect();
            if mt.pure(&target) == mt.pure(&source_units) {
                let maps = groups.iter().map(GroupHom::identity).collect();
                return Ok(ClassificationVerdict::yes(Witness {
                    permutation: sigma.clone(),
                    maps,
                }));
            }
        }
        return Err(ClassifyError::NoFiniteReduction);
    }
    let e = mt.group().exponent().unwrap_or_else(BigInt::zero);

    for sigma in &perms {
        let targets: Vec<FgElement> = sigma.iter().map(|&s| ib[s].unit.clone()).collect();
        let goal = mt.pure(&targets);
        let found = if goal == mt.pure(&source_units) {
            Some(groups.iter().map(GroupHom::identity).collect())
        } else if n == 1 {
            // the tensor product is the group itself
            orbit_witness(&groups[0], &source_units[0], &targets[0], bounds)
                .map_err(bound(&passed))?
                .map(|h| vec![h])
        } else {
            search_unit_tuple(&groups, &source_units, &goal, &mt, &e, bounds)
                .map_err(bound(&passed))?
        };
        if let Some(maps) = found {
            let w = Witness {
                permutation: sigma.clone(),
                maps,
            };
            verify_witness(&ia, &ib, &mt, &w);
            return Ok(ClassificationVerdict::yes(w));
        }
    }
    Ok(ClassificationVerdict::no(Separation::UnitClass))
}

/// Permutations `σ` with matching groups and determinants, lexicographic.
fn matchings(ia: &[SftInvariants], ib: &[SftInvariants]) -> Vec<Vec<usize>> {
    fn rec(
        i: usize,
        ia: &[SftInvariants],
        ib: &[SftInvariants],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == ia.len() {
            out.push(cur.clone());
            return;
        }
        for j in 0..ib.len() {
            if !used[j] && ia[i].bf == ib[j].bf && ia[i].det == ib[j].det {
                used[j] = true;
                cur.push(j);
                rec(i + 1, ia, ib, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(
        0,
        ia,
        ib,
        &mut vec![false; ib.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Representatives of `G / eG`: coordinate `j` ranges over `0..gcd(d_j, e)`.
fn quotient_representatives(
    g: &FgGroup,
    e: &BigInt,
    bounds: &SearchBounds,
) -> Result<Vec<FgElement>, BoundExceeded> {
    let ranges: Vec<BigInt> = g
        .generator_orders()
        .iter()
        .map(|d| num_integer::Integer::gcd(d, e))
        .collect();
    let size: BigInt = ranges.iter().product();
    if size > BigInt::from(bounds.max_group_order) {
        return Err(BoundExceeded::new(
            "quotient G/eG order",
            size,
            bounds.max_group_order,
        ));
    }
    let ranges: Vec<u64> = ranges.iter().map(|r| r.to_u64().unwrap()).collect();
    let total: u64 = ranges.iter().product();
    Ok((0..total)
        .map(|mut idx| {
            let mut coords = vec![BigInt::zero(); ranges.len()];
            for (c, r) in coords.iter_mut().zip(&ranges).rev() {
                *c = BigInt::from(idx % r);
                idx /= r;
            }
            g.element_from_coords(&coords)
        })
        .collect())
}

/// Searches for automorphisms `α_i` with `⊗ α_i(u_i) = goal`.
fn search_unit_tuple(
    groups: &[FgGroup],
    units: &[FgElement],
    goal: &FgElement,
    mt: &MultiTensor,
    e: &BigInt,
    bounds: &SearchBounds,
) -> Result<Option<Vec<GroupHom>>, BoundExceeded> {
    if mt.group().is_trivial() {
        return Ok(Some(groups.iter().map(GroupHom::identity).collect()));
    }
    let mut candidates = Vec::with_capacity(groups.len());
    for (g, u) in groups.iter().zip(units) {
        let mut c = Vec::new();
        for y in quotient_representatives(g, e, bounds)? {
            if aut_equivalent_mod(g, u, &y, e, bounds)? {
                c.push(y);
            }
        }
        candidates.push(c);
    }
    let total: BigInt = candidates.iter().map(|c| BigInt::from(c.len())).product();
    if total > BigInt::from(bounds.max_candidates) {
        return Err(BoundExceeded::new(
            "unit-orbit tuples",
            total,
            bounds.max_candidates,
        ));
    }
    // smallest candidate sets first; the pure tensor is symmetric in the
    // visiting order because each factor keeps its own slot
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by_key(|&i| candidates[i].len());
    let mut chosen: Vec<FgElement> = groups.iter().map(FgGroup::zero).collect();
    let mut hit: Option<Vec<FgElement>> = None;
    let _ = visit(0, &order, &candidates, &mut chosen, &mut |xs| {
        if mt.pure(xs) == *goal {
            hit = Some(xs.to_vec());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    let Some(xs) = hit else {
        return Ok(None);
    };
    let mut maps = Vec::with_capacity(groups.len());
    for ((g, u), y) in groups.iter().zip(units).zip(&xs) {
        let h = automorphism_mapping_mod(g, u, y, e, bounds)?
            .expect("candidate lies in the unit orbit");
        maps.push(h);
    }
    Ok(Some(maps))
}

fn visit<F: FnMut(&[FgElement]) -> ControlFlow<()>>(
    depth: usize,
    order: &[usize],
    candidates: &[Vec<FgElement>],
    chosen: &mut Vec<FgElement>,
    f: &mut F,
) -> ControlFlow<()> {
    if depth == order.len() {
        return f(chosen);
    }
    let slot = order[depth];
    for c in &candidates[slot] {
        chosen[slot] = c.clone();
        visit(depth + 1, order, candidates, chosen, f)?;
    }
    ControlFlow::Continue(())
}

fn verify_witness(ia: &[SftInvariants], ib: &[SftInvariants], mt: &MultiTensor, w: &Witness) {
    let mut images = Vec::with_capacity(ia.len());
    for (i, (m, &s)) in w.maps.iter().zip(&w.permutation).enumerate() {
        assert_eq!(m.domain(), &ia[i].bf);
        assert_eq!(m.codomain(), &ib[s].bf);
        assert!(m.is_automorphism(), "witness map {i} is not bijective");
        assert_eq!(ia[i].det, ib[s].det);
        images.push(m.apply(&ia[i].unit));
    }
    let targets: Vec<FgElement> = w.permutation.iter().map(|&s| ib[s].unit.clone()).collect();
    assert_eq!(
        mt.pure(&images),
        mt.pure(&targets),
        "tensor unit condition fails"
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::higher_thompson_factors;

    fn b() -> SearchBounds {
        SearchBounds::default()
    }

    #[test]
    fn single_factor_examples() {
        let v21 = SftMatrix::higman_thompson(2, 1);
        let v22 = SftMatrix::higman_thompson(2, 2);
        assert!(sft_isomorphic(&v21, &v22, &b()).unwrap().isomorphic);
        let r = sft_isomorphic(&SftMatrix::full_shift(2), &SftMatrix::full_shift(3), &b()).unwrap();
        assert!(!r.isomorphic);
        assert!(matches!(r.reason, Some(Separation::BowenFranks { .. })));
        let a = SftMatrix::full_shift(4);
        let r = sft_isomorphic(&a, &a, &b()).unwrap();
        assert!(r.witness.unwrap().is_identity());
    }

    #[test]
    fn morita_ignores_units() {
        for r in 1..5 {
            for r2 in 1..5 {
                assert!(sft_morita(
                    &SftMatrix::higman_thompson(5, r),
                    &SftMatrix::higman_thompson(5, r2)
                ));
            }
        }
        assert!(!sft_morita(
            &SftMatrix::full_shift(2),
            &SftMatrix::full_shift(3)
        ));
    }

    #[test]
    fn higher_thompson_separation() {
        let x = higher_thompson_factors(2, 4, 1);
        let y = higher_thompson_factors(2, 4, 3);
        let r = product_isomorphic(&x, &y, &b()).unwrap();
        assert!(!r.isomorphic);
        assert_eq!(r.reason, Some(Separation::UnitClass));
        let y = higher_thompson_factors(2, 4, 2);
        assert!(product_isomorphic(&x, &y, &b()).unwrap().isomorphic);
        let r = product_isomorphic(&x, &x, &b()).unwrap();
        assert!(r.witness.unwrap().is_identity());
    }

    #[test]
    fn factor_count_and_order() {
        let x = higher_thompson_factors(2, 3, 1);
        let y = higher_thompson_factors(3, 3, 1);
        let r = product_isomorphic(&x, &y, &b()).unwrap();
        assert_eq!(
            r.reason,
            Some(Separation::FactorCount { left: 2, right: 3 })
        );
        let mut rev = x.clone();
        rev.reverse();
        assert!(product_isomorphic(&x, &rev, &b()).unwrap().isomorphic);
    }
}
