//! Homology and K-theory of finite products of SFT groupoids.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::aut::GroupHom;
use crate::group::{
    direct_sum, for_each_multi_index, power, tensor, tor, FgElement, FgGroup, MultiTensor,
};
use crate::sft::{invariants, SftMatrix};

/// Finitely supported family of groups indexed by degree, with a
/// distinguished class in degree 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedGroups {
    groups: BTreeMap<usize, FgGroup>,
    unit: FgElement,
}

impl GradedGroups {
    /// Builds from groups in degrees `0, 1, ...`; trivial entries are dropped.
    pub fn from_parts(groups: Vec<FgGroup>, unit: FgElement) -> Self {
        let map = groups
            .into_iter()
            .enumerate()
            .filter(|(_, g)| !g.is_trivial())
            .collect();
        let out = GradedGroups { groups: map, unit };
        assert!(
            out.degree(0).contains(&out.unit),
            "unit must lie in degree 0"
        );
        out
    }

    /// The graded group with `g` in degree 0.
    pub fn concentrated(g: FgGroup, unit: FgElement) -> Self {
        Self::from_parts(vec![g], unit)
    }

    pub fn degree(&self, n: usize) -> FgGroup {
        self.groups
            .get(&n)
            .cloned()
            .unwrap_or_else(FgGroup::trivial)
    }

    /// Degrees carrying a nontrivial group, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.groups.keys().copied().collect()
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.groups.keys().next_back().copied()
    }

    pub fn unit(&self) -> &FgElement {
        &self.unit
    }

    pub fn even_sum(&self) -> FgGroup {
        direct_sum(
            self.groups
                .iter()
                .filter(|(n, _)| *n % 2 == 0)
                .map(|(_, g)| g),
        )
    }

    pub fn odd_sum(&self) -> FgGroup {
        direct_sum(
            self.groups
                .iter()
                .filter(|(n, _)| *n % 2 == 1)
                .map(|(_, g)| g),
        )
    }

    /// Degreewise equality of groups (units are not compared).
    pub fn same_groups(&self, other: &GradedGroups) -> bool {
        self.groups == other.groups
    }
}

/// Künneth formula for the product of two spaces:
/// `H_n = ⊕_{i+j=n} G_i ⊗ H_j ⊕ ⊕_{i+j=n-1} Tor(G_i, H_j)`.
pub fn kunneth_pair(g: &GradedGroups, h: &GradedGroups) -> GradedGroups {
    let top = g.top_degree().unwrap_or(0) + h.top_degree().unwrap_or(0) + 1;
    let mut parts = Vec::with_capacity(top + 1);
    for n in 0..=top {
        let mut summands = Vec::new();
        for i in 0..=n {
            summands.push(tensor(&g.degree(i), &h.degree(n - i)).group().clone());
            if i < n {
                summands.push(tor(&g.degree(i), &h.degree(n - 1 - i)));
            }
        }
        parts.push(direct_sum(&summands));
    }
    let t0 = tensor(&g.degree(0), &h.degree(0));
    let unit = t0.element(&g.unit, &h.unit);
    GradedGroups::from_parts(parts, unit)
}

fn binomial(n: usize, k: isize) -> usize {
    if k < 0 || k as usize > n {
        return 0;
    }
    let k = k as usize;
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed form for a product of `n` SFT groupoids:
/// `H_k = (⊗ H_0)^{C(n-1,k)} ⊕ (⊗ H_1)^{C(n-1,k-1)}`, with unit `⊗ u_d`.
pub fn product_homology(factors: &[SftMatrix]) -> GradedGroups {
    assert!(!factors.is_empty(), "at least one factor required");
    let invs: Vec<_> = factors.iter().map(invariants).collect();
    let n = factors.len();
    let h0: Vec<FgGroup> = invs.iter().map(|i| i.bf.clone()).collect();
    let h1: Vec<FgGroup> = invs.iter().map(|i| i.k1.clone()).collect();
    let t0 = MultiTensor::new(&h0);
    let t1 = MultiTensor::new(&h1);
    let parts: Vec<FgGroup> = (0..=n)
        .map(|k| {
            let a = power(t0.group(), binomial(n - 1, k as isize));
            let b = power(t1.group(), binomial(n - 1, k as isize - 1));
            direct_sum([&a, &b])
        })
        .collect();
    let units: Vec<FgElement> = invs.iter().map(|i| i.unit.clone()).collect();
    let unit = t0.pure(&units);
    GradedGroups::from_parts(parts, unit)
}

/// Left fold of [`kunneth_pair`] over the single-factor homologies.
pub fn iterated_kunneth(factors: &[SftMatrix]) -> GradedGroups {
    assert!(!factors.is_empty(), "at least one factor required");
    let mut it = factors.iter().map(|a| invariants(a).homology);
    let first = it.next().unwrap();
    it.fold(first, |acc, h| kunneth_pair(&acc, &h))
}

/// Isomorphism from the left-nested tensor product `((G_1 ⊗ G_2) ⊗ ...) ⊗ G_n`
/// (canonical coordinates at every stage) to the flat product `G_1 ⊗ ... ⊗ G_n`.
pub fn nested_to_flat(groups: &[FgGroup]) -> GroupHom {
    assert!(!groups.is_empty());
    let mut nested = groups[0].clone();
    let mut phi = GroupHom::identity(&groups[0]);
    for m in 1..groups.len() {
        let step = tensor(&nested, &groups[m]);
        let flat_prev = MultiTensor::new(&groups[..m]);
        let flat = MultiTensor::new(&groups[..=m]);
        let gm = groups[m].generator_count();
        // image of c_k ⊗ e_c in flat raw coordinates
        let mut images = Vec::new();
        for x in 0..step.group().generator_count() {
            let raw = step.as_multi().lift_raw(&step.group().generator(x));
            let mut flat_raw = vec![BigInt::zero(); flat.raw_dim()];
            for k in 0..nested.generator_count() {
                let y = phi.apply(&nested.generator(k));
                let y_raw = flat_prev.lift_raw(&y);
                for c in 0..gm {
                    let coef = &raw[step.as_multi().raw_position(&[k, c])];
                    if coef.is_zero() {
                        continue;
                    }
                    for (pos, v) in y_raw.iter().enumerate() {
                        if !v.is_zero() {
                            flat_raw[pos * gm + c] += coef * v;
                        }
                    }
                }
            }
            images.push(flat.project_raw(&flat_raw));
        }
        phi = GroupHom::new(step.group().clone(), flat.group().clone(), images)
            .expect("nested-to-flat map is well defined");
        nested = step.group().clone();
    }
    phi
}

/// Isomorphism `⊗_d G_d -> ⊗_d G_{σ(d)}` induced by reordering factors,
/// where `sigma[d]` is the position in the source of the `d`-th target factor.
pub fn permute_tensor(groups: &[FgGroup], sigma: &[usize]) -> GroupHom {
    let src = MultiTensor::new(groups);
    let permuted: Vec<FgGroup> = sigma.iter().map(|&s| groups[s].clone()).collect();
    let dst = MultiTensor::new(&permuted);
    let images = (0..src.group().generator_count())
        .map(|x| {
            let raw = src.lift_raw(&src.group().generator(x));
            let mut out = vec![BigInt::zero(); raw.len()];
            for_each_multi_index(groups, |idx| {
                let v = &raw[src.raw_position(idx)];
                if !v.is_zero() {
                    let tidx: Vec<usize> = sigma.iter().map(|&s| idx[s]).collect();
                    out[dst.raw_position(&tidx)] += v;
                }
            });
            dst.project_raw(&out)
        })
        .collect();
    GroupHom::new(src.group().clone(), dst.group().clone(), images)
        .expect("reordering map is well defined")
}

/// `Z/2`-graded K-groups by the Künneth theorem for C*-algebras.
pub fn product_k_theory(factors: &[SftMatrix]) -> (FgGroup, FgGroup) {
    assert!(!factors.is_empty(), "at least one factor required");
    let mut it = factors.iter().map(|a| {
        let inv = invariants(a);
        (inv.k0, inv.k1)
    });
    let first = it.next().unwrap();
    it.fold(first, |(a0, a1), (b0, b1)| {
        let t = |x: &FgGroup, y: &FgGroup| tensor(x, y).group().clone();
        let k0 = direct_sum([&t(&a0, &b0), &t(&a1, &b1), &tor(&a0, &b1), &tor(&a1, &b0)]);
        let k1 = direct_sum([&t(&a0, &b1), &t(&a1, &b0), &tor(&a0, &b0), &tor(&a1, &b1)]);
        (k0, k1)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HkReport {
    pub even_homology: FgGroup,
    pub odd_homology: FgGroup,
    pub k0: FgGroup,
    pub k1: FgGroup,
}

impl HkReport {
    pub fn holds(&self) -> bool {
        self.even_homology == self.k0 && self.odd_homology == self.k1
    }
}

/// Compares `⊕ H_{2i}` with `K_0` and `⊕ H_{2i+1}` with `K_1`.
pub fn hk_check(factors: &[SftMatrix]) -> HkReport {
    let h = product_homology(factors);
    let (k0, k1) = product_k_theory(factors);
    HkReport {
        even_homology: h.even_sum(),
        odd_homology: h.odd_sum(),
        k0,
        k1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::{higher_thompson_factors, validate};
    use crate::IntMatrix;

    fn cyc(m: i64) -> FgGroup {
        FgGroup::cyclic(m)
    }

    fn conc(g: FgGroup) -> GradedGroups {
        let u = g.zero();
        GradedGroups::concentrated(g, u)
    }

    #[test]
    fn kunneth_examples() {
        let r = kunneth_pair(&conc(cyc(2)), &conc(cyc(2)));
        assert_eq!(r.degree(0), cyc(2));
        assert_eq!(r.degree(1), cyc(2));
        assert_eq!(r.degree(2), FgGroup::trivial());
        let r = kunneth_pair(&conc(cyc(4)), &conc(cyc(6)));
        assert_eq!(r.degree(0), cyc(2));
        assert_eq!(r.degree(1), cyc(2));
    }

    #[test]
    fn z_is_the_tensor_unit() {
        let g = GradedGroups::from_parts(vec![cyc(6), FgGroup::free(2)], cyc(6).generator(0));
        let z = GradedGroups::concentrated(FgGroup::free(1), FgGroup::free(1).generator(0));
        let r = kunneth_pair(&g, &z);
        assert!(r.same_groups(&g));
        assert_eq!(r.unit(), g.unit());
    }

    #[test]
    fn higher_thompson_homology() {
        for k in 2..7u32 {
            for n in 1..5usize {
                let h = product_homology(&higher_thompson_factors(n, k, 1));
                for l in 0..=n {
                    let want = power(&cyc(k as i64 - 1), binomial(n - 1, l as isize));
                    assert_eq!(h.degree(l), want, "n={n} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn full_shift_square() {
        let f = vec![SftMatrix::full_shift(3), SftMatrix::full_shift(3)];
        let h = product_homology(&f);
        assert_eq!(h.degree(0), cyc(2));
        assert_eq!(h.degree(1), cyc(2));
        assert!(h.degree(2).is_trivial());
        assert_eq!(product_k_theory(&f), (cyc(2), cyc(2)));
        assert!(hk_check(&f).holds());
    }

    #[test]
    fn hk_for_three_factors() {
        let f = vec![
            SftMatrix::full_shift(3),
            SftMatrix::full_shift(3),
            SftMatrix::full_shift(5),
        ];
        assert!(hk_check(&f).holds());
        assert_eq!(
            product_k_theory(&[SftMatrix::full_shift(3)]),
            (cyc(2), FgGroup::trivial())
        );
    }

    #[test]
    fn nested_and_permuted_units_correspond() {
        let a = validate(IntMatrix::from_rows(&[vec![1, 2], vec![3, 1]])).unwrap();
        let f = vec![SftMatrix::full_shift(5), a, SftMatrix::full_shift(3)];
        let closed = product_homology(&f);
        let folded = iterated_kunneth(&f);
        let h0: Vec<FgGroup> = f.iter().map(|x| invariants(x).bf).collect();
        let phi = nested_to_flat(&h0);
        assert!(phi.is_automorphism());
        assert_eq!(&phi.apply(folded.unit()), closed.unit());

        let sigma = [2, 0, 1];
        let perm: Vec<SftMatrix> = sigma.iter().map(|&s| f[s].clone()).collect();
        let p = permute_tensor(&h0, &sigma);
        assert_eq!(&p.apply(closed.unit()), product_homology(&perm).unit());
    }
}
