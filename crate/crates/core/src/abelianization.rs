//! Abelianization of the topological full group of a product of SFT
//! groupoids.
//!
//! Write `H_0(G_{A_d}) = ⊕_i Z_{m(d,i)}` (with `Z_0 = Z`) and index the
//! cyclic pieces of `H_0(G)` and of the Tor part of `H_1(G)` by tuples
//! `i = (i_1, ..., i_n)`. The abelianization sits in
//!
//! ```text
//! 0 -> S_0 ⊗ Z/2 -> [[G]]_ab -> H_1(G) -> 0
//! ```
//!
//! where `S_0` collects the tuples whose orders are all even with fewer
//! than three of them in `4Z+2`. The sequence splits on the part of `H_1`
//! coming from the `H_1` of single factors. On the Tor part it is
//! nonsplit exactly on tuples with two orders in `4Z+2`, where the `Z/2`
//! and the cyclic group `T_p(i)` merge into a cyclic group of twice the
//! order.
//!
//! Factor positions and tuple indices are zero-based: `p` ranges over
//! `0..n-1` and `T_p(i) = Z_{m(0,i_0)} ⊗ ... ⊗ Tor(Z_{m(p,i_p)}, Z_{m(p+1,..)} ⊗ ...)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::group::{direct_sum, tensor, tor, FgGroup, MultiTensor};
use crate::homology::product_homology;
use crate::sft::{invariants, SftMatrix};

/// Which cyclic decomposition of `H_0` to index tuples by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Decomposition {
    /// `Z_{d_1} ⊕ ... ⊕ Z_{d_s} ⊕ Z^r` with `d_1 | d_2 | ...`.
    #[default]
    InvariantFactors,
    /// Prime-power cyclic summands and `Z^r`.
    Primary,
}

/// Cyclic orders `m(d, 1..h(d))` of one factor; `0` stands for `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct H0Decomposition {
    pub orders: Vec<BigInt>,
}

impl H0Decomposition {
    pub fn group(&self) -> FgGroup {
        FgGroup::from_cyclic_orders(&self.orders)
    }
}

pub fn decompose_h0(a: &SftMatrix) -> H0Decomposition {
    decompose_h0_with(a, Decomposition::InvariantFactors)
}

pub fn decompose_h0_with(a: &SftMatrix, how: Decomposition) -> H0Decomposition {
    let bf = invariants(a).bf;
    let orders = match how {
        Decomposition::InvariantFactors => bf.invariant_orders(),
        Decomposition::Primary => bf.primary_orders(),
    };
    H0Decomposition { orders }
}

/// Data attached to one tuple `i ∈ J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleData {
    pub index: Vec<usize>,
    /// `m(d, i_d)` for every factor `d`.
    pub orders: Vec<BigInt>,
    /// `S(i) = Z_{m(0,i_0)} ⊗ ... ⊗ Z_{m(n-1,i_{n-1})}`.
    pub s: FgGroup,
    /// `T_p(i)` for `p = 0..n-1`.
    pub t: Vec<FgGroup>,
    pub in_j0: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionData {
    pub decompositions: Vec<H0Decomposition>,
    /// `⊕_d H_1(G_{A_d}) ⊗ ⊗_{d' != d} H_0(G_{A_{d'}})`.
    pub split_part: FgGroup,
    /// Every tuple of `J`, in lexicographic order.
    pub tuples: Vec<TupleData>,
    /// Pairs `(p, t)`: the class is nontrivial on `Ext(T_p(i), S(i) ⊗ Z/2)`
    /// for `i = tuples[t].index`.
    pub class_components: Vec<(usize, usize)>,
}

fn is_4z2(m: &BigInt) -> bool {
    m.mod_floor(&BigInt::from(4)) == BigInt::from(2)
}

fn is_4z(m: &BigInt) -> bool {
    m.mod_floor(&BigInt::from(4)).is_zero()
}

fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

fn tensor_all(gs: &[FgGroup]) -> FgGroup {
    MultiTensor::new(gs).group().clone()
}

impl ExtensionData {
    pub fn j0(&self) -> impl Iterator<Item = &TupleData> {
        self.tuples.iter().filter(|t| t.in_j0)
    }

    /// Nontrivial `T_p(i)` as `(p, tuple position, group)`.
    pub fn tp_summands(&self) -> impl Iterator<Item = (usize, usize, &FgGroup)> {
        self.tuples
            .iter()
            .enumerate()
            .flat_map(|(ti, t)| t.t.iter().enumerate().map(move |(p, g)| (p, ti, g)))
            .filter(|(_, _, g)| !g.is_trivial())
    }

    /// `S_0 ⊗ Z/2`, an elementary abelian 2-group with one generator per
    /// tuple of `J_0`.
    pub fn kernel_term(&self) -> FgGroup {
        power_of_two_cyclic(self.j0().count())
    }

    /// `⊕_{i ∉ J_0} S(i) ⊗ Z/2`, the kernel of `j`.
    pub fn kernel_of_j(&self) -> FgGroup {
        let two = FgGroup::cyclic(2);
        let parts: Vec<FgGroup> = self
            .tuples
            .iter()
            .filter(|t| !t.in_j0)
            .map(|t| tensor(&t.s, &two).group().clone())
            .collect();
        direct_sum(&parts)
    }

    /// The Tor part `⊕_p T_p` of `H_1(G)`.
    pub fn tor_part(&self) -> FgGroup {
        let parts: Vec<&FgGroup> = self.tuples.iter().flat_map(|t| t.t.iter()).collect();
        direct_sum(parts)
    }

    /// `H_1(G)` as assembled from the split part and the `T_p(i)`.
    pub fn h1(&self) -> FgGroup {
        direct_sum([&self.split_part, &self.tor_part()])
    }

    /// The middle group of the extension.
    pub fn middle_group(&self) -> FgGroup {
        let mut orders: Vec<BigInt> = self.split_part.generator_orders();
        for (ti, t) in self.tuples.iter().enumerate() {
            let merged = self
                .class_components
                .iter()
                .find(|(_, c)| *c == ti)
                .map(|(p, _)| *p);
            for (p, g) in t.t.iter().enumerate() {
                if Some(p) == merged {
                    let g2 = g.order().expect("T_p(i) is finite");
                    orders.push(g2 * 2);
                } else {
                    orders.extend(g.generator_orders());
                }
            }
            if t.in_j0 && merged.is_none() {
                orders.push(BigInt::from(2));
            }
        }
        FgGroup::from_cyclic_orders(&orders)
    }
}

fn power_of_two_cyclic(k: usize) -> FgGroup {
    FgGroup::from_cyclic_orders(&vec![BigInt::from(2); k])
}

pub fn extension_data(factors: &[SftMatrix]) -> ExtensionData {
    extension_data_with(factors, Decomposition::InvariantFactors)
}

pub fn extension_data_with(factors: &[SftMatrix], how: Decomposition) -> ExtensionData {
    assert!(!factors.is_empty(), "at least one factor is required");
    let n = factors.len();
    let invs: Vec<_> = factors.iter().map(invariants).collect();
    let decompositions: Vec<H0Decomposition> =
        factors.iter().map(|a| decompose_h0_with(a, how)).collect();

    let mut split = Vec::new();
    for d in 0..n {
        let gs: Vec<FgGroup> = (0..n)
            .map(|e| {
                if e == d {
                    invs[e].k1.clone()
                } else {
                    invs[e].bf.clone()
                }
            })
            .collect();
        split.push(tensor_all(&gs));
    }
    let split_part = direct_sum(&split);

    let mut tuples = Vec::new();
    let sizes: Vec<usize> = decompositions.iter().map(|h| h.orders.len()).collect();
    let total: usize = sizes.iter().product();
    for flat in 0..total {
        // last coordinate fastest
        let mut rest = flat;
        let mut index = vec![0usize; n];
        for d in (0..n).rev() {
            index[d] = rest % sizes[d];
            rest /= sizes[d];
        }
        let orders: Vec<BigInt> = (0..n)
            .map(|d| decompositions[d].orders[index[d]].clone())
            .collect();
        tuples.push(tuple_data(&index, orders));
    }

    let mut class_components = Vec::new();
    for (ti, t) in tuples.iter().enumerate() {
        if !t.in_j0 {
            continue;
        }
        for p in 0..n.saturating_sub(1) {
            let before = t.orders[..p].iter().all(is_4z);
            let here = is_4z2(&t.orders[p]);
            let after = t.orders[p + 1..].iter().filter(|m| is_4z2(m)).count() == 1;
            if before && here && after {
                class_components.push((p, ti));
            }
        }
    }
    ExtensionData {
        decompositions,
        split_part,
        tuples,
        class_components,
    }
}

fn tuple_data(index: &[usize], orders: Vec<BigInt>) -> TupleData {
    let n = orders.len();
    let cyc: Vec<FgGroup> = orders
        .iter()
        .map(|m| FgGroup::from_cyclic_orders(std::slice::from_ref(m)))
        .collect();
    let s = tensor_all(&cyc);
    let mut t = Vec::with_capacity(n.saturating_sub(1));
    for p in 0..n.saturating_sub(1) {
        let rest = tensor_all(&cyc[p + 1..]);
        let torsion = tor(&cyc[p], &rest);
        let mut gs = cyc[..p].to_vec();
        gs.push(torsion);
        let g = tensor_all(&gs);
        debug_assert_eq!(g, tp_closed_form(&orders, p));
        t.push(g);
    }
    let all_even = orders.iter().all(|m| m.is_even());
    let in_j0 = all_even && orders.iter().filter(|m| is_4z2(m)).count() < 3;
    TupleData {
        index: index.to_vec(),
        orders,
        s,
        t,
        in_j0,
    }
}

/// `Z_{g_2}` with `g_2 = gcd(g_1, gcd(m_p, g_0))`, or `0` when `m_p = 0` or `g_0 = 0`.
fn tp_closed_form(orders: &[BigInt], p: usize) -> FgGroup {
    let g0 = gcd_all(&orders[p + 1..]);
    if orders[p].is_zero() || g0.is_zero() {
        return FgGroup::trivial();
    }
    let g = orders[p].gcd(&g0);
    let g2 = gcd_all(&orders[..p]).gcd(&g);
    FgGroup::cyclic(g2)
}

/// `[[G_{A_1} x ... x G_{A_n}]]_ab`.
pub fn tfg_abelianization(factors: &[SftMatrix]) -> FgGroup {
    extension_data(factors).middle_group()
}

pub fn tfg_abelianization_with(factors: &[SftMatrix], how: Decomposition) -> FgGroup {
    extension_data_with(factors, how).middle_group()
}

/// Whether `j: H_0(G) ⊗ Z/2 -> [[G]]_ab` is injective, i.e. no tuple has all
/// orders even with three or more of them in `4Z+2`.
pub fn strong_ah(factors: &[SftMatrix]) -> bool {
    extension_data(factors).kernel_of_j().is_trivial()
}

/// The summand count criterion: fewer than three factors `d` for which
/// `H_0(G_{A_d})` has a `Z/2` direct summand (always true for `n <= 2`).
///
/// This agrees with [`strong_ah`] unless some factor has no even cyclic
/// summand at all, in which case `H_0(G) ⊗ Z/2` vanishes.
pub fn strong_ah_summand_count(factors: &[SftMatrix]) -> bool {
    let two = BigInt::from(2);
    factors
        .iter()
        .filter(|a| invariants(a).bf.has_cyclic_summand(&two))
        .count()
        < 3
}

/// The closed-form table for `(nV_{k,r})_ab`, exactly as stated
/// (independent of `r`).
///
/// The `n = 1` row gives `Z/2` for even `k`; the single-factor formula
/// `H_0 ⊗ Z/2 ⊕ H_1 = Z_{k-1} ⊗ Z/2` gives `Z/2` for odd `k`, and
/// `V_{2,1}` is simple, so that row has its parity cases swapped. See
/// [`higher_thompson_abelianization`] for the corrected table.
pub fn stated_higher_thompson_abelianization(n: usize, k: u32) -> FgGroup {
    assert!(n >= 1 && k >= 2);
    let k1 = BigInt::from(k - 1);
    let k4 = k % 4;
    let base = FgGroup::from_cyclic_orders(&vec![k1.clone(); n.saturating_sub(1)]);
    let plus_two = |g: &FgGroup| direct_sum([g, &FgGroup::cyclic(2)]);
    match n {
        1 => {
            if k.is_multiple_of(2) {
                FgGroup::cyclic(2)
            } else {
                FgGroup::trivial()
            }
        }
        2 => match k4 {
            0 | 2 => base,
            1 => plus_two(&base),
            _ => FgGroup::cyclic(k1 * 2),
        },
        _ => match k4 {
            1 => plus_two(&base),
            _ => base,
        },
    }
}

/// The closed-form table with the `n = 1` row corrected to
/// `Z/2` for odd `k` and `0` for even `k`.
pub fn higher_thompson_abelianization(n: usize, k: u32) -> FgGroup {
    if n == 1 {
        if k % 2 == 1 {
            FgGroup::cyclic(2)
        } else {
            FgGroup::trivial()
        }
    } else {
        stated_higher_thompson_abelianization(n, k)
    }
}

/// Checks that the assembled `H_1` matches the product homology and that
/// `|[[G]]_ab| = 2^{|J_0|} |H_1|` when finite. Returns a description of the
/// first inconsistency.
pub fn consistency_check(factors: &[SftMatrix]) -> Result<(), String> {
    let ext = extension_data(factors);
    let h1 = product_homology(factors).degree(1);
    if ext.h1() != h1 {
        return Err(format!(
            "assembled H_1 {} differs from product homology {}",
            ext.h1(),
            h1
        ));
    }
    let mid = ext.middle_group();
    if mid.free_rank() != h1.free_rank() {
        return Err(format!("free ranks differ: {mid} vs {h1}"));
    }
    let tors = |g: &FgGroup| -> BigInt { g.torsion().iter().product() };
    let ratio = BigInt::from(2).pow(ext.j0().count() as u32);
    if tors(&mid) != tors(&h1) * &ratio {
        return Err(format!(
            "torsion orders of {mid} and {h1} are not in ratio {ratio}"
        ));
    }
    if ext.kernel_term().generator_count() + ext.kernel_of_j().generator_count()
        != ext
            .tuples
            .iter()
            .filter(|t| t.orders.iter().all(|m| m.is_even()))
            .count()
    {
        return Err("S ⊗ Z/2 does not split as kernel plus image of j".to_string());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::IntMatrix;
    use crate::sft::{higher_thompson_factors, sft_abelianization, validate};

    fn g(s: &str, factors: &[SftMatrix]) {
        assert_eq!(tfg_abelianization(factors).to_string(), s);
    }

    #[test]
    fn worked_examples() {
        g("Z/4", &higher_thompson_factors(2, 3, 1));
        g("Z/2 x Z/4 x Z/4", &higher_thompson_factors(3, 5, 1));
        g("Z/2 x Z/2", &higher_thompson_factors(3, 3, 1));
        g("0", &higher_thompson_factors(1, 2, 1));
        g("Z/2", &higher_thompson_factors(1, 3, 2));
    }

    #[test]
    fn single_factor_matches_sft_formula() {
        for k in 2..10 {
            let a = SftMatrix::full_shift(k);
            assert_eq!(
                tfg_abelianization(std::slice::from_ref(&a)),
                sft_abelianization(&a)
            );
        }
        let a = validate(IntMatrix::from_rows(&[vec![2, 1], vec![1, 2]])).unwrap();
        assert_eq!(
            tfg_abelianization(std::slice::from_ref(&a)),
            sft_abelianization(&a)
        );
    }

    #[test]
    fn table_rows() {
        for n in 1..5 {
            for k in 2..10 {
                for r in 1..4 {
                    let f = higher_thompson_factors(n, k, r);
                    assert_eq!(
                        tfg_abelianization(&f),
                        higher_thompson_abelianization(n, k),
                        "n={n} k={k}"
                    );
                }
                if n == 1 {
                    assert_ne!(
                        higher_thompson_abelianization(1, k),
                        stated_higher_thompson_abelianization(1, k)
                    );
                }
            }
        }
    }

    #[test]
    fn extension_examples() {
        let f = higher_thompson_factors(2, 7, 1);
        let e = extension_data(&f);
        assert_eq!(e.tuples.len(), 1);
        assert_eq!(e.class_components, vec![(0, 0)]);
        for k in [2, 4, 6] {
            let e = extension_data(&higher_thompson_factors(3, k, 1));
            assert_eq!(e.j0().count(), 0);
            assert!(e.class_components.is_empty());
        }
        // H_0 = Z/6 for both factors
        let a = SftMatrix::full_shift(7);
        let e = extension_data(&[a.clone(), a.clone()]);
        assert_eq!(e.class_components.len(), 1);
        assert_eq!(e.class_components[0].0, 0);
        assert_eq!(e.middle_group(), FgGroup::cyclic(12));
        let p = extension_data_with(&[a.clone(), a], Decomposition::Primary);
        assert_eq!(p.tuples.len(), 4);
        assert_eq!(p.middle_group(), FgGroup::cyclic(12));
    }

    #[test]
    fn strong_ah_examples() {
        for k in 2..8 {
            assert!(strong_ah(&[SftMatrix::full_shift(k)]));
            assert!(strong_ah(&higher_thompson_factors(2, k, 1)));
        }
        let three = higher_thompson_factors(3, 3, 1);
        assert!(!strong_ah(&three));
        assert!(!strong_ah_summand_count(&three));
        let fours = higher_thompson_factors(3, 4, 1);
        assert!(strong_ah(&fours));
        assert!(strong_ah_summand_count(&fours));
        // H_0 = Z/3 for the last factor kills H_0(G) ⊗ Z/2
        let mut mixed = three.clone();
        mixed.push(SftMatrix::full_shift(4));
        assert!(strong_ah(&mixed));
        assert!(!strong_ah_summand_count(&mixed));
    }

    #[test]
    fn assembled_h1_is_product_h1() {
        let a = validate(IntMatrix::from_rows(&[vec![2, 1], vec![1, 2]])).unwrap();
        let lists = vec![
            higher_thompson_factors(3, 5, 2),
            vec![a.clone(), SftMatrix::full_shift(3)],
            vec![
                SftMatrix::full_shift(7),
                a.clone(),
                SftMatrix::full_shift(5),
            ],
            vec![a.clone(), a],
        ];
        for l in lists {
            consistency_check(&l).unwrap();
        }
    }
}
