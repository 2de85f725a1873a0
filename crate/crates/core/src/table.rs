//! Elements of the groups `W_{n,k}` acting on `Z_{n,k} x N`, where
//! `Z_{n,k}` is the product of the full shifts on `k(1), ..., k(n)` symbols.
//!
//! An element is stored as a finite table of brick pairs: a point
//! `(w_1 y_1, ..., w_n y_n, j)` of a source brick `(w_1, ..., w_n; j)` maps to
//! `(w'_1 y_1, ..., w'_n y_n, j')` for the paired target brick. Indices above
//! the table bound are translated by a fixed offset. Indices and coordinates
//! are one-based, as are the generator subscripts.
//!
//! Products of generators are read as composition: the word `g_1 g_2 ... g_m`
//! denotes `g_1 ∘ g_2 ∘ ... ∘ g_m`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::group::Quotient;
use crate::matrix::IntMatrix;

/// Words longer than this are rejected by composition.
pub const DEFAULT_DEPTH_CAP: usize = 64;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("elements act on different spaces")]
    IncompatibleParameters,
    #[error("coordinate {d} is out of range 1..={n}")]
    CoordinateOutOfRange { d: usize, n: usize },
    #[error("index must be at least 1")]
    ZeroIndex,
    #[error("arities must lie in 2..=255, got {0}")]
    InvalidArity(u32),
    #[error("coordinates {d} and {e} have arities {kd} and {ke}")]
    ArityMismatch {
        d: usize,
        e: usize,
        kd: u32,
        ke: u32,
    },
    #[error("a word exceeded the refinement depth cap {cap}")]
    DepthExceeded { cap: usize },
    #[error("coordinates must be distinct")]
    SameCoordinate,
}

/// The arity map `k: {1..n} -> {2, 3, ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arity(Vec<u32>);

impl Arity {
    pub fn new(k: Vec<u32>) -> Result<Self, TableError> {
        if k.is_empty() {
            return Err(TableError::CoordinateOutOfRange { d: 1, n: 0 });
        }
        if let Some(&bad) = k.iter().find(|&&x| !(2..=255).contains(&x)) {
            return Err(TableError::InvalidArity(bad));
        }
        Ok(Arity(k))
    }

    pub fn constant(n: usize, l: u32) -> Result<Self, TableError> {
        Arity::new(vec![l; n])
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// `k(d)` for one-based `d`.
    pub fn k(&self, d: usize) -> u32 {
        self.0[d - 1]
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    fn check(&self, d: usize) -> Result<(), TableError> {
        if d == 0 || d > self.n() {
            Err(TableError::CoordinateOutOfRange { d, n: self.n() })
        } else {
            Ok(())
        }
    }
}

/// A cylinder `w_1 X x ... x w_n X x {index}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Brick {
    pub index: usize,
    pub words: Vec<Vec<u8>>,
}

impl Brick {
    pub fn whole(n: usize, index: usize) -> Self {
        Brick {
            index,
            words: vec![Vec::new(); n],
        }
    }

    /// Whether the two cylinders meet.
    pub fn meets(&self, other: &Brick) -> bool {
        self.index == other.index
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a.starts_with(b) || b.starts_with(a))
    }

    /// Whether `other` is contained in `self`.
    pub fn contains(&self, other: &Brick) -> bool {
        self.index == other.index
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| b.starts_with(a))
    }

    fn mass(&self, arity: &Arity) -> BigRational {
        let mut denom = BigInt::one();
        for (d, w) in self.words.iter().enumerate() {
            denom *= num_traits::pow(BigInt::from(arity.0[d]), w.len());
        }
        BigRational::new(BigInt::one(), denom)
    }
}

impl fmt::Display for Brick {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ws: Vec<String> = self
            .words
            .iter()
            .map(|w| w.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(""))
            .collect();
        write!(f, "({}; {})", ws.join(", "), self.index)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Entry {
    src: Brick,
    dst: Brick,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableElement {
    arity: Arity,
    bound: usize,
    offset: isize,
    /// Sorted by source brick.
    entries: Vec<Entry>,
}

/// Brick pairs and translation data of a table element.
pub type TableParts = (usize, isize, Vec<(Brick, Brick)>);

impl TableElement {
    pub fn identity(arity: &Arity) -> Self {
        TableElement {
            arity: arity.clone(),
            bound: 0,
            offset: 0,
            entries: Vec::new(),
        }
    }

    /// Builds an element from brick pairs. The caller guarantees the table
    /// describes a bijection; [`TableElement::is_well_formed`] checks it.
    pub fn from_parts(
        arity: &Arity,
        bound: usize,
        offset: isize,
        pairs: Vec<(Brick, Brick)>,
    ) -> Self {
        let mut entries: Vec<Entry> = pairs
            .into_iter()
            .map(|(src, dst)| Entry { src, dst })
            .collect();
        entries.sort();
        TableElement {
            arity: arity.clone(),
            bound,
            offset,
            entries,
        }
    }

    /// The element permuting whole index blocks `j -> perm[j-1]` for
    /// `j <= perm.len()` and fixing everything else.
    pub fn index_permutation(arity: &Arity, perm: &[usize]) -> Self {
        let n = arity.n();
        let pairs = perm
            .iter()
            .enumerate()
            .map(|(j, &p)| (Brick::whole(n, j + 1), Brick::whole(n, p)))
            .collect();
        TableElement::from_parts(arity, perm.len(), 0, pairs)
    }

    pub fn arity(&self) -> &Arity {
        &self.arity
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn offset(&self) -> isize {
        self.offset
    }

    pub fn parts(&self) -> TableParts {
        let pairs = self
            .entries
            .iter()
            .map(|e| (e.src.clone(), e.dst.clone()))
            .collect();
        (self.bound, self.offset, pairs)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn translate(&self, j: usize) -> usize {
        (j as isize + self.offset) as usize
    }

    /// The same map with a table bound raised to `bound`.
    fn lifted(&self, bound: usize) -> Self {
        if bound <= self.bound {
            return self.clone();
        }
        let n = self.arity.n();
        let mut out = self.clone();
        for j in self.bound + 1..=bound {
            out.entries.push(Entry {
                src: Brick::whole(n, j),
                dst: Brick::whole(n, self.translate(j)),
            });
        }
        out.bound = bound;
        out.entries.sort();
        out
    }

    fn entries_at(&self, index: usize) -> &[Entry] {
        let lo = self.entries.partition_point(|e| e.src.index < index);
        let hi = self.entries.partition_point(|e| e.src.index <= index);
        &self.entries[lo..hi]
    }

    /// Image of every point of `b`, if `b` lies inside a single source brick.
    pub fn apply(&self, b: &Brick) -> Option<Brick> {
        if b.index == 0 || b.words.len() != self.arity.n() {
            return None;
        }
        if b.index > self.bound {
            return Some(Brick {
                index: self.translate(b.index),
                words: b.words.clone(),
            });
        }
        let e = self
            .entries_at(b.index)
            .iter()
            .find(|e| e.src.contains(b))?;
        let words = e
            .dst
            .words
            .iter()
            .zip(&e.src.words)
            .zip(&b.words)
            .map(|((t, s), w)| {
                let mut out = t.clone();
                out.extend_from_slice(&w[s.len()..]);
                out
            })
            .collect();
        Some(Brick {
            index: e.dst.index,
            words,
        })
    }

    /// Source and target bricks partition `Z_{n,k} x {1..B}` and
    /// `Z_{n,k} x {1..B+c}`, with letters inside the alphabets.
    pub fn is_well_formed(&self) -> bool {
        let target_bound = self.bound as isize + self.offset;
        if target_bound < 0 {
            return false;
        }
        let letters_ok = |b: &Brick| {
            b.words.len() == self.arity.n()
                && b.words
                    .iter()
                    .enumerate()
                    .all(|(d, w)| w.iter().all(|&a| u32::from(a) < self.arity.0[d]))
        };
        if !self
            .entries
            .iter()
            .all(|e| letters_ok(&e.src) && letters_ok(&e.dst))
        {
            return false;
        }
        let sources: Vec<&Brick> = self.entries.iter().map(|e| &e.src).collect();
        let targets: Vec<&Brick> = self.entries.iter().map(|e| &e.dst).collect();
        is_partition(&self.arity, &sources, self.bound)
            && is_partition(&self.arity, &targets, target_bound as usize)
    }

    /// Whether the element fixes every `(z, j)` with `j > r`.
    pub fn in_block(&self, r: usize) -> bool {
        self.offset == 0
            && self
                .entries
                .iter()
                .all(|e| e.src.index <= r || e.src == e.dst)
    }

    /// Conjugate by the index shift `j -> j + 1`: block `j` of the result
    /// behaves as block `j - 1` of `self`, block 1 is fixed.
    pub fn shift_indices(&self) -> Self {
        let n = self.arity.n();
        let mut pairs = vec![(Brick::whole(n, 1), Brick::whole(n, 1))];
        for e in &self.entries {
            let mut s = e.src.clone();
            let mut t = e.dst.clone();
            s.index += 1;
            t.index += 1;
            pairs.push((s, t));
        }
        TableElement::from_parts(&self.arity, self.bound + 1, self.offset, pairs)
    }

    /// If the element only permutes whole blocks, the parity of that
    /// permutation of `N`.
    pub fn index_permutation_parity(&self) -> Option<Parity> {
        if self.offset != 0
            || self.entries.iter().any(|e| {
                e.src
                    .words
                    .iter()
                    .chain(&e.dst.words)
                    .any(|w| !w.is_empty())
            })
        {
            return None;
        }
        let mut perm = vec![0usize; self.bound];
        for e in &self.entries {
            perm[e.src.index - 1] = e.dst.index - 1;
        }
        Some(permutation_parity(&perm))
    }
}

fn is_partition(arity: &Arity, bricks: &[&Brick], bound: usize) -> bool {
    let mut by_index: Vec<Vec<&Brick>> = vec![Vec::new(); bound];
    for b in bricks {
        if b.index == 0 || b.index > bound {
            return false;
        }
        by_index[b.index - 1].push(b);
    }
    by_index.iter().all(|bs| {
        let mass: BigRational = bs.iter().map(|b| b.mass(arity)).sum();
        let disjoint = (0..bs.len()).all(|i| (i + 1..bs.len()).all(|j| !bs[i].meets(bs[j])));
        mass.is_one() && disjoint
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn of(count: usize) -> Self {
        if count.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

fn permutation_parity(perm: &[usize]) -> Parity {
    let mut seen = vec![false; perm.len()];
    let mut transpositions = 0;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x];
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    Parity::of(transpositions)
}

/// `f ∘ g`.
pub fn compose(f: &TableElement, g: &TableElement) -> Result<TableElement, TableError> {
    compose_capped(f, g, DEFAULT_DEPTH_CAP)
}

pub fn compose_capped(
    f: &TableElement,
    g: &TableElement,
    cap: usize,
) -> Result<TableElement, TableError> {
    if f.arity != g.arity {
        return Err(TableError::IncompatibleParameters);
    }
    // g's targets must line up with f's sources
    let bg = g.bound.max((f.bound as isize - g.offset).max(0) as usize);
    let g2 = g.lifted(bg);
    let f2 = f.lifted((bg as isize + g.offset) as usize);
    let mut entries = Vec::with_capacity(g2.entries.len());
    for e in &g2.entries {
        for h in f2.entries_at(e.dst.index) {
            if !h.src.meets(&e.dst) {
                continue;
            }
            let mut src = e.src.clone();
            let mut dst = h.dst.clone();
            for d in 0..e.dst.words.len() {
                let (t, s2) = (&e.dst.words[d], &h.src.words[d]);
                if s2.len() > t.len() {
                    src.words[d].extend_from_slice(&s2[t.len()..]);
                } else {
                    dst.words[d].extend_from_slice(&t[s2.len()..]);
                }
                if src.words[d].len() > cap || dst.words[d].len() > cap {
                    return Err(TableError::DepthExceeded { cap });
                }
            }
            entries.push(Entry { src, dst });
        }
    }
    entries.sort();
    Ok(TableElement {
        arity: f.arity.clone(),
        bound: bg,
        offset: f.offset + g.offset,
        entries,
    })
}

pub fn inverse(f: &TableElement) -> TableElement {
    let mut entries: Vec<Entry> = f
        .entries
        .iter()
        .map(|e| Entry {
            src: e.dst.clone(),
            dst: e.src.clone(),
        })
        .collect();
    entries.sort();
    TableElement {
        arity: f.arity.clone(),
        bound: (f.bound as isize + f.offset) as usize,
        offset: -f.offset,
        entries,
    }
}

/// Whether `f` and `g` are the same homeomorphism.
pub fn equal(f: &TableElement, g: &TableElement) -> Result<bool, TableError> {
    if f.arity != g.arity {
        return Err(TableError::IncompatibleParameters);
    }
    if f.offset != g.offset {
        return Ok(false);
    }
    let b = f.bound.max(g.bound);
    let (f2, g2) = (f.lifted(b), g.lifted(b));
    for index in 1..=b {
        let ge = g2.entries_at(index);
        for e in f2.entries_at(index) {
            for h in ge.iter().filter(|h| h.src.meets(&e.src)) {
                // compare both images of the common refinement
                let common = Brick {
                    index,
                    words: e
                        .src
                        .words
                        .iter()
                        .zip(&h.src.words)
                        .map(|(a, c)| {
                            if a.len() >= c.len() {
                                a.clone()
                            } else {
                                c.clone()
                            }
                        })
                        .collect(),
                };
                if f2.apply(&common) != g2.apply(&common) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `s_{i,d}`: fixes blocks `j < i`, sends `(z, i)` to `(σ_d z, i + z^{(d)}_1)`
/// and translates blocks `j > i` by `k(d) - 1`.
pub fn gen_s(i: usize, d: usize, arity: &Arity) -> Result<TableElement, TableError> {
    arity.check(d)?;
    if i == 0 {
        return Err(TableError::ZeroIndex);
    }
    let n = arity.n();
    let k = arity.k(d);
    let mut pairs: Vec<(Brick, Brick)> = (1..i)
        .map(|j| (Brick::whole(n, j), Brick::whole(n, j)))
        .collect();
    for a in 0..k {
        let mut src = Brick::whole(n, i);
        src.words[d - 1].push(a as u8);
        pairs.push((src, Brick::whole(n, i + a as usize)));
    }
    Ok(TableElement::from_parts(arity, i, k as isize - 1, pairs))
}

/// `τ_i`: swaps blocks `i` and `i + 1`.
pub fn gen_tau(i: usize, arity: &Arity) -> Result<TableElement, TableError> {
    if i == 0 {
        return Err(TableError::ZeroIndex);
    }
    let mut perm: Vec<usize> = (1..=i + 1).collect();
    perm.swap(i - 1, i);
    Ok(TableElement::index_permutation(arity, &perm))
}

/// `τ̃_{i,d} = τ_{i+k(d)-1} ... τ_{i+1} τ_i`.
pub fn tau_tilde(i: usize, d: usize, arity: &Arity) -> Result<TableElement, TableError> {
    arity.check(d)?;
    let k = arity.k(d) as usize;
    let word: Vec<Gen> = (0..k).rev().map(|m| Gen::Tau(i + m)).collect();
    eval_word(&word, arity)
}

/// A generator of `W_{n,k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    S(usize, usize),
    Tau(usize),
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gen::S(i, d) => write!(f, "s[{i},{d}]"),
            Gen::Tau(i) => write!(f, "t[{i}]"),
        }
    }
}

pub fn gen_element(g: Gen, arity: &Arity) -> Result<TableElement, TableError> {
    match g {
        Gen::S(i, d) => gen_s(i, d, arity),
        Gen::Tau(i) => gen_tau(i, arity),
    }
}

/// Evaluates `g_1 g_2 ... g_m` as `g_1 ∘ ... ∘ g_m`.
pub fn eval_word(word: &[Gen], arity: &Arity) -> Result<TableElement, TableError> {
    let mut acc = TableElement::identity(arity);
    for &g in word {
        acc = compose(&acc, &gen_element(g, arity)?)?;
    }
    Ok(acc)
}

/// The permutation `i + p k(d) + q -> i + q k(d') + p`
/// (`0 <= p < k(d')`, `0 <= q < k(d)`) as a word in the `τ_j`, found by
/// sorting with adjacent swaps, together with its parity.
pub fn alpha_word(
    i: usize,
    d: usize,
    e: usize,
    arity: &Arity,
) -> Result<(Vec<Gen>, Parity), TableError> {
    arity.check(d)?;
    arity.check(e)?;
    if d == e {
        return Err(TableError::SameCoordinate);
    }
    if i == 0 {
        return Err(TableError::ZeroIndex);
    }
    let (kd, ke) = (arity.k(d) as usize, arity.k(e) as usize);
    let size = kd * ke;
    // arr[x] is the image of position x, offsets relative to i
    let mut arr = vec![0usize; size];
    for p in 0..ke {
        for q in 0..kd {
            arr[p * kd + q] = q * ke + p;
        }
    }
    // sorting arr by swaps at (x, x+1) multiplies by τ on the right, so the
    // word is the reversed swap sequence
    let mut swaps = Vec::new();
    for end in (1..size).rev() {
        for x in 0..end {
            if arr[x] > arr[x + 1] {
                arr.swap(x, x + 1);
                swaps.push(Gen::Tau(i + x));
            }
        }
    }
    swaps.reverse();
    let parity = Parity::of(swaps.len());
    Ok((swaps, parity))
}

/// The element `α_{i,d,d'}` built directly as a block permutation.
pub fn alpha_permutation(
    i: usize,
    d: usize,
    e: usize,
    arity: &Arity,
) -> Result<TableElement, TableError> {
    arity.check(d)?;
    arity.check(e)?;
    let (kd, ke) = (arity.k(d) as usize, arity.k(e) as usize);
    let mut perm: Vec<usize> = (1..i + kd * ke).collect();
    for p in 0..ke {
        for q in 0..kd {
            perm[i - 1 + p * kd + q] = i + q * ke + p;
        }
    }
    Ok(TableElement::index_permutation(arity, &perm))
}

/// Parity of the block permutation underlying `τ̃_{i,d}`, read off its table.
pub fn tau_tilde_parity(d: usize, arity: &Arity) -> Result<Parity, TableError> {
    Ok(tau_tilde(1, d, arity)?
        .index_permutation_parity()
        .expect("τ̃ permutes whole blocks"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationFamily {
    /// `s_{i,d} s_{j,d'} = s_{j+k(d)-1,d'} s_{i,d}` for `i < j`.
    ShiftShift,
    /// `τ_i^2 = 1`.
    TauSquare,
    /// `τ_i τ_j = τ_j τ_i` for `|i - j| >= 2`.
    TauCommute,
    /// `τ_i τ_{i+1} τ_i = τ_{i+1} τ_i τ_{i+1}`.
    Braid,
    /// `s_{i,d} τ_j = τ_{j+k(d)-1} s_{i,d}` for `i < j`.
    ShiftTauAbove,
    /// `s_{i,d} τ_i = τ̃_{i,d} s_{i+1,d}`.
    ShiftTauTilde,
    /// `s_{i,d} τ_j = τ_j s_{i,d}` for `i > j + 1`.
    ShiftTauBelow,
    /// `s_{i,d'} ... s_{i+k(d)-1,d'} s_{i,d} = α_{i,d,d'} s_{i,d} ... s_{i+k(d')-1,d} s_{i,d'}`.
    Interleave,
}

impl RelationFamily {
    pub const ALL: [RelationFamily; 8] = [
        RelationFamily::ShiftShift,
        RelationFamily::TauSquare,
        RelationFamily::TauCommute,
        RelationFamily::Braid,
        RelationFamily::ShiftTauAbove,
        RelationFamily::ShiftTauTilde,
        RelationFamily::ShiftTauBelow,
        RelationFamily::Interleave,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RelationFamily::ShiftShift => "shift_shift",
            RelationFamily::TauSquare => "tau_square",
            RelationFamily::TauCommute => "tau_commute",
            RelationFamily::Braid => "braid",
            RelationFamily::ShiftTauAbove => "shift_tau_above",
            RelationFamily::ShiftTauTilde => "shift_tau_tilde",
            RelationFamily::ShiftTauBelow => "shift_tau_below",
            RelationFamily::Interleave => "interleave",
        }
    }
}

/// One instantiated relation `lhs = rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    pub family: RelationFamily,
    /// `(i, j, d, d')`, unused slots zero.
    pub key: (usize, usize, usize, usize),
    pub lhs: Vec<Gen>,
    pub rhs: Vec<Gen>,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = |x: &[Gen]| {
            if x.is_empty() {
                "1".to_string()
            } else {
                x.iter()
                    .map(|g| g.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        };
        write!(
            f,
            "{}: {} = {}",
            self.family.name(),
            w(&self.lhs),
            w(&self.rhs)
        )
    }
}

/// All instantiations with `i, j <= index_bound` and all coordinates.
pub fn relations(arity: &Arity, index_bound: usize) -> Vec<Relation> {
    let n = arity.n();
    let mut out = Vec::new();
    let ds = 1..=n;
    for family in RelationFamily::ALL {
        for i in 1..=index_bound {
            match family {
                RelationFamily::TauSquare => out.push(rel(
                    family,
                    (i, 0, 0, 0),
                    vec![Gen::Tau(i), Gen::Tau(i)],
                    vec![],
                )),
                RelationFamily::Braid => out.push(rel(
                    family,
                    (i, 0, 0, 0),
                    vec![Gen::Tau(i), Gen::Tau(i + 1), Gen::Tau(i)],
                    vec![Gen::Tau(i + 1), Gen::Tau(i), Gen::Tau(i + 1)],
                )),
                RelationFamily::TauCommute => {
                    for j in (1..=index_bound).filter(|&j| i.abs_diff(j) >= 2) {
                        out.push(rel(
                            family,
                            (i, j, 0, 0),
                            vec![Gen::Tau(i), Gen::Tau(j)],
                            vec![Gen::Tau(j), Gen::Tau(i)],
                        ));
                    }
                }
                RelationFamily::ShiftShift => {
                    for j in i + 1..=index_bound {
                        for d in ds.clone() {
                            for e in ds.clone() {
                                let m = arity.k(d) as usize - 1;
                                out.push(rel(
                                    family,
                                    (i, j, d, e),
                                    vec![Gen::S(i, d), Gen::S(j, e)],
                                    vec![Gen::S(j + m, e), Gen::S(i, d)],
                                ));
                            }
                        }
                    }
                }
                RelationFamily::ShiftTauAbove => {
                    for j in i + 1..=index_bound {
                        for d in ds.clone() {
                            let m = arity.k(d) as usize - 1;
                            out.push(rel(
                                family,
                                (i, j, d, 0),
                                vec![Gen::S(i, d), Gen::Tau(j)],
                                vec![Gen::Tau(j + m), Gen::S(i, d)],
                            ));
                        }
                    }
                }
                RelationFamily::ShiftTauTilde => {
                    for d in ds.clone() {
                        let k = arity.k(d) as usize;
                        let mut rhs: Vec<Gen> = (0..k).rev().map(|m| Gen::Tau(i + m)).collect();
                        rhs.push(Gen::S(i + 1, d));
                        out.push(rel(
                            family,
                            (i, 0, d, 0),
                            vec![Gen::S(i, d), Gen::Tau(i)],
                            rhs,
                        ));
                    }
                }
                RelationFamily::ShiftTauBelow => {
                    for j in (1..=index_bound).filter(|&j| i > j + 1) {
                        for d in ds.clone() {
                            out.push(rel(
                                family,
                                (i, j, d, 0),
                                vec![Gen::S(i, d), Gen::Tau(j)],
                                vec![Gen::Tau(j), Gen::S(i, d)],
                            ));
                        }
                    }
                }
                RelationFamily::Interleave => {
                    for d in ds.clone() {
                        for e in ds.clone().filter(|&e| e != d) {
                            let (kd, ke) = (arity.k(d) as usize, arity.k(e) as usize);
                            let mut lhs: Vec<Gen> = (0..kd).map(|m| Gen::S(i + m, e)).collect();
                            lhs.push(Gen::S(i, d));
                            let (mut rhs, _) =
                                alpha_word(i, d, e, arity).expect("valid coordinates");
                            rhs.extend((0..ke).map(|m| Gen::S(i + m, d)));
                            rhs.push(Gen::S(i, e));
                            out.push(rel(family, (i, 0, d, e), lhs, rhs));
                        }
                    }
                }
            }
        }
    }
    out.sort();
    out
}

fn rel(
    family: RelationFamily,
    key: (usize, usize, usize, usize),
    lhs: Vec<Gen>,
    rhs: Vec<Gen>,
) -> Relation {
    Relation {
        family,
        key,
        lhs,
        rhs,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationOutcome {
    pub relation: Relation,
    /// `Err` carries the evaluation error as text.
    pub holds: Result<bool, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationReport {
    pub arity: Arity,
    pub index_bound: usize,
    pub outcomes: Vec<RelationOutcome>,
}

impl RelationReport {
    pub fn all_hold(&self) -> bool {
        self.outcomes.iter().all(|o| o.holds == Ok(true))
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationOutcome> {
        self.outcomes.iter().filter(|o| o.holds != Ok(true))
    }

    /// `(family, checked, held)` for every family.
    pub fn summary(&self) -> Vec<(RelationFamily, usize, usize)> {
        RelationFamily::ALL
            .iter()
            .map(|&f| {
                let of: Vec<_> = self
                    .outcomes
                    .iter()
                    .filter(|o| o.relation.family == f)
                    .collect();
                let held = of.iter().filter(|o| o.holds == Ok(true)).count();
                (f, of.len(), held)
            })
            .collect()
    }
}

pub fn check_relation(r: &Relation, arity: &Arity) -> Result<bool, TableError> {
    let l = eval_word(&r.lhs, arity)?;
    let rr = eval_word(&r.rhs, arity)?;
    equal(&l, &rr)
}

/// Evaluates both sides of every instantiated relation; instantiations run
/// in parallel and the report is ordered by relation.
pub fn verify_relations(arity: &Arity, index_bound: usize) -> RelationReport {
    let outcomes = relations(arity, index_bound)
        .into_par_iter()
        .map(|relation| {
            let holds = check_relation(&relation, arity).map_err(|e| e.to_string());
            RelationOutcome { relation, holds }
        })
        .collect();
    RelationReport {
        arity: arity.clone(),
        index_bound,
        outcomes,
    }
}

/// An assignment `s_{i,d} -> x_d`, `τ_i -> t` into `Z/modulus`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Character {
    pub modulus: u64,
    pub x: Vec<u64>,
    pub t: u64,
}

impl Character {
    pub fn is_surjective(&self) -> bool {
        let g = self
            .x
            .iter()
            .fold(num_integer::gcd(self.t, self.modulus), |acc, &v| {
                num_integer::gcd(acc, v)
            });
        g == 1
    }

    /// Image of a word.
    pub fn eval(&self, word: &[Gen]) -> u64 {
        word.iter()
            .map(|g| match *g {
                Gen::S(_, d) => self.x[d - 1],
                Gen::Tau(_) => self.t,
            })
            .sum::<u64>()
            % self.modulus
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterReport {
    /// Coefficients `(c_1, ..., c_n, c_t)` of the reduced linear system.
    pub system: Vec<Vec<i64>>,
    /// Every solution, in lexicographic order of `(x, t)`.
    pub characters: Vec<Character>,
    /// Whether the relations force `s_{i,d}` and `s_{i+1,d}` (and `τ_i`,
    /// `τ_{i+1}`) to agree in the abelianization.
    pub index_independent: bool,
}

fn exponent_row(word: &[Gen], n: usize) -> Vec<i64> {
    let mut row = vec![0i64; n + 1];
    for g in word {
        match *g {
            Gen::S(_, d) => row[d - 1] += 1,
            Gen::Tau(_) => row[n] += 1,
        }
    }
    row
}

/// The linear system satisfied by index-independent characters: one row per
/// relation family and coordinate choice, obtained from the exponent sums
/// of the relation words.
pub fn reduced_system(arity: &Arity) -> Vec<Vec<i64>> {
    let n = arity.n();
    let mut rows: Vec<Vec<i64>> = relations(arity, 3)
        .iter()
        .map(|r| {
            let (l, rr) = (exponent_row(&r.lhs, n), exponent_row(&r.rhs, n));
            l.iter().zip(&rr).map(|(a, b)| a - b).collect::<Vec<i64>>()
        })
        .filter(|row| row.iter().any(|&c| c != 0))
        .collect();
    rows.sort();
    rows.dedup();
    rows
}

/// Abelianization of the presentation truncated to generators with indices
/// `<= size`, using every relation all of whose generators fit.
fn truncated_abelianization(arity: &Arity, size: usize) -> (Quotient, impl Fn(Gen) -> usize) {
    let n = arity.n();
    let col = move |g: Gen| match g {
        Gen::S(i, d) => (i - 1) * (n + 1) + (d - 1),
        Gen::Tau(i) => (i - 1) * (n + 1) + n,
    };
    let fits = |w: &[Gen]| {
        w.iter().all(|g| match *g {
            Gen::S(i, _) | Gen::Tau(i) => i <= size,
        })
    };
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for r in relations(arity, size) {
        if !fits(&r.lhs) || !fits(&r.rhs) {
            continue;
        }
        let mut row = vec![0i64; size * (n + 1)];
        for &g in &r.lhs {
            row[col(g)] += 1;
        }
        for &g in &r.rhs {
            row[col(g)] -= 1;
        }
        if row.iter().any(|&c| c != 0) {
            rows.push(row);
        }
    }
    rows.sort();
    rows.dedup();
    // columns of the presentation matrix are the relations
    let gens = size * (n + 1);
    let mut m = IntMatrix::zeros(gens, rows.len());
    for (c, row) in rows.iter().enumerate() {
        for (g, &v) in row.iter().enumerate() {
            if v != 0 {
                m[(g, c)] = BigInt::from(v);
            }
        }
    }
    (Quotient::cokernel(&m), col)
}

/// Whether, in the abelianization of the truncated presentation,
/// `[s_{i,d}] = [s_{i+1,d}]` and `[τ_i] = [τ_{i+1}]` for `i <= max k`.
pub fn index_independence(arity: &Arity) -> bool {
    let kmax = *arity.values().iter().max().unwrap() as usize;
    let size = 3 * kmax + 2;
    let n = arity.n();
    let (q, col) = truncated_abelianization(arity, size);
    let dim = size * (n + 1);
    let differs = |a: Gen, b: Gen| {
        let mut v = vec![BigInt::zero(); dim];
        v[col(a)] += 1;
        v[col(b)] -= 1;
        !q.project(&v).is_zero()
    };
    for i in 1..=kmax {
        if differs(Gen::Tau(i), Gen::Tau(i + 1)) {
            return false;
        }
        for d in 1..=n {
            if differs(Gen::S(i, d), Gen::S(i + 1, d)) {
                return false;
            }
        }
    }
    true
}

/// All characters `W_{n,k} -> Z/modulus`.
pub fn character_search(arity: &Arity, modulus: u64) -> CharacterReport {
    assert!(modulus >= 2);
    let n = arity.n();
    let system = reduced_system(arity);
    let m = modulus as i128;
    let mut characters = Vec::new();
    let total = (modulus as u128).pow(n as u32 + 1);
    for code in 0..total {
        let mut rest = code;
        let mut vals = vec![0u64; n + 1];
        for v in vals.iter_mut().rev() {
            *v = (rest % modulus as u128) as u64;
            rest /= modulus as u128;
        }
        let ok = system.iter().all(|row| {
            let s: i128 = row
                .iter()
                .zip(&vals)
                .map(|(&c, &v)| c as i128 * v as i128)
                .sum();
            s.rem_euclid(m) == 0
        });
        if ok {
            let t = vals[n];
            vals.truncate(n);
            characters.push(Character {
                modulus,
                x: vals,
                t,
            });
        }
    }
    CharacterReport {
        system,
        characters,
        index_independent: index_independence(arity),
    }
}

/// The baker's map on block `block`: reads the first letter of coordinate
/// `from`, erases it and prepends it to coordinate `to`.
pub fn baker(
    to: usize,
    from: usize,
    arity: &Arity,
    block: usize,
) -> Result<TableElement, TableError> {
    arity.check(to)?;
    arity.check(from)?;
    if to == from {
        return Err(TableError::SameCoordinate);
    }
    if block == 0 {
        return Err(TableError::ZeroIndex);
    }
    let (kt, kf) = (arity.k(to), arity.k(from));
    if kt != kf {
        return Err(TableError::ArityMismatch {
            d: to,
            e: from,
            kd: kt,
            ke: kf,
        });
    }
    let n = arity.n();
    let mut pairs: Vec<(Brick, Brick)> = (1..block)
        .map(|j| (Brick::whole(n, j), Brick::whole(n, j)))
        .collect();
    for a in 0..kf {
        let mut src = Brick::whole(n, block);
        src.words[from - 1].push(a as u8);
        let mut dst = Brick::whole(n, block);
        dst.words[to - 1].push(a as u8);
        pairs.push((src, dst));
    }
    Ok(TableElement::from_parts(arity, block, 0, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ar(k: &[u32]) -> Arity {
        Arity::new(k.to_vec()).unwrap()
    }

    fn brick(words: &[&[u8]], index: usize) -> Brick {
        Brick {
            index,
            words: words.iter().map(|w| w.to_vec()).collect(),
        }
    }

    #[test]
    fn generator_action() {
        let a = ar(&[2, 2]);
        let t = gen_tau(1, &a).unwrap();
        assert_eq!(t.apply(&brick(&[&[], &[]], 1)), Some(brick(&[&[], &[]], 2)));
        let s = gen_s(1, 1, &a).unwrap();
        assert_eq!(
            s.apply(&brick(&[&[0, 1], &[1]], 1)),
            Some(brick(&[&[1], &[1]], 1))
        );
        assert_eq!(
            s.apply(&brick(&[&[1], &[]], 1)),
            Some(brick(&[&[], &[]], 2))
        );
        assert_eq!(s.apply(&brick(&[&[], &[]], 2)), Some(brick(&[&[], &[]], 3)));
        assert_eq!(s.apply(&brick(&[&[], &[]], 1)), None);
        for g in [t, s] {
            assert!(g.is_well_formed());
        }
        assert_eq!(
            gen_s(1, 3, &a),
            Err(TableError::CoordinateOutOfRange { d: 3, n: 2 })
        );
    }

    #[test]
    fn group_laws() {
        let a = ar(&[2, 3]);
        let t = gen_tau(1, &a).unwrap();
        let id = TableElement::identity(&a);
        assert!(equal(&compose(&t, &t).unwrap(), &id).unwrap());
        let lhs = eval_word(&[Gen::S(1, 1), Gen::Tau(1)], &a).unwrap();
        let rhs = compose(&tau_tilde(1, 1, &a).unwrap(), &gen_s(2, 1, &a).unwrap()).unwrap();
        assert!(equal(&lhs, &rhs).unwrap());
        let w = eval_word(&[Gen::S(2, 2), Gen::Tau(1), Gen::S(1, 1), Gen::Tau(3)], &a).unwrap();
        assert!(w.is_well_formed());
        let inv = inverse(&w);
        assert!(inv.is_well_formed());
        assert!(equal(&compose(&w, &inv).unwrap(), &id).unwrap());
        assert!(equal(&compose(&inv, &w).unwrap(), &id).unwrap());
        assert!(!equal(&w, &id).unwrap());
    }

    #[test]
    fn relation_suites() {
        for k in [[2, 2], [3, 5], [2, 3]] {
            let r = verify_relations(&ar(&k), 4);
            assert!(r.all_hold(), "{:?}", r.failures().next());
            assert!(r.summary().iter().all(|&(_, c, h)| c > 0 && c == h));
        }
        let a = ar(&[2, 2]);
        let braid = relations(&a, 1)
            .into_iter()
            .find(|r| r.family == RelationFamily::Braid)
            .unwrap();
        assert!(check_relation(&braid, &a).unwrap());
    }

    #[test]
    fn broken_relations_are_detected() {
        let a = ar(&[3, 3]);
        // the offset must be k(d) - 1
        let wrong = rel(
            RelationFamily::ShiftTauAbove,
            (1, 2, 1, 0),
            vec![Gen::S(1, 1), Gen::Tau(2)],
            vec![Gen::Tau(5), Gen::S(1, 1)],
        );
        assert!(!check_relation(&wrong, &a).unwrap());
    }

    #[test]
    fn alpha_words_realize_the_grid_permutation() {
        for k in [[2, 2], [3, 5], [5, 3], [2, 4], [3, 3]] {
            let a = ar(&k);
            for i in 1..4 {
                let (w, p) = alpha_word(i, 1, 2, &a).unwrap();
                let e = eval_word(&w, &a).unwrap();
                assert!(equal(&e, &alpha_permutation(i, 1, 2, &a).unwrap()).unwrap());
                assert_eq!(e.index_permutation_parity(), Some(p));
            }
        }
        assert_eq!(alpha_word(1, 1, 2, &ar(&[2, 2])).unwrap().1, Parity::Odd);
        assert_eq!(alpha_word(1, 1, 2, &ar(&[3, 5])).unwrap().1, Parity::Even);
        assert_eq!(alpha_word(1, 1, 2, &ar(&[5, 5])).unwrap().1, Parity::Even);
        assert_eq!(
            alpha_word(1, 1, 1, &ar(&[5, 5])),
            Err(TableError::SameCoordinate)
        );
    }

    #[test]
    fn shift_is_a_homomorphism() {
        let a = ar(&[2, 3]);
        for i in 1..4 {
            for d in 1..3 {
                let s = gen_s(i, d, &a).unwrap();
                assert!(equal(&s.shift_indices(), &gen_s(i + 1, d, &a).unwrap()).unwrap());
            }
            let t = gen_tau(i, &a).unwrap();
            assert!(equal(&t.shift_indices(), &gen_tau(i + 1, &a).unwrap()).unwrap());
        }
        let f = eval_word(&[Gen::S(1, 2), Gen::Tau(2)], &a).unwrap();
        let g = eval_word(&[Gen::Tau(1), Gen::S(2, 1)], &a).unwrap();
        let lhs = compose(&f, &g).unwrap().shift_indices();
        let rhs = compose(&f.shift_indices(), &g.shift_indices()).unwrap();
        assert!(equal(&lhs, &rhs).unwrap());
    }

    #[test]
    fn baker_maps() {
        let a = ar(&[2, 2]);
        let b = baker(1, 2, &a, 1).unwrap();
        assert_eq!(
            b.apply(&brick(&[&[1, 1], &[0, 1]], 1)),
            Some(brick(&[&[0, 1, 1], &[1]], 1))
        );
        assert!(equal(
            &compose(&b, &inverse(&b)).unwrap(),
            &TableElement::identity(&a)
        )
        .unwrap());
        // s_{1,d}^{-1} s_{1,d'} moves a letter from coordinate d' to d
        let s = compose(
            &inverse(&gen_s(1, 1, &a).unwrap()),
            &gen_s(1, 2, &a).unwrap(),
        )
        .unwrap();
        assert!(equal(&s, &b).unwrap());
        assert!(b.in_block(1));
        assert!(matches!(
            baker(1, 2, &ar(&[2, 3]), 1),
            Err(TableError::ArityMismatch { .. })
        ));
        for k in [3, 7] {
            let a = ar(&[k, k, k]);
            let lhs = compose(&baker(1, 2, &a, 1).unwrap(), &baker(2, 3, &a, 1).unwrap()).unwrap();
            assert!(equal(&lhs, &baker(1, 3, &a, 1).unwrap()).unwrap());
        }
    }

    #[test]
    fn block_membership() {
        let a = ar(&[2, 2]);
        let g = eval_word(&[Gen::S(1, 1)], &a).unwrap();
        assert!(!g.in_block(5));
        let x = compose(
            &inverse(&gen_s(1, 1, &a).unwrap()),
            &compose(&gen_tau(1, &a).unwrap(), &gen_s(1, 1, &a).unwrap()).unwrap(),
        )
        .unwrap();
        assert!(x.in_block(1));
        let y = compose(&x, &baker(1, 2, &a, 1).unwrap()).unwrap();
        assert!(y.in_block(1));
        assert!(inverse(&y).in_block(1));
    }

    #[test]
    fn parities() {
        for k in 2..8u32 {
            let a = ar(&[k, 2]);
            let want = if k % 2 == 1 {
                Parity::Odd
            } else {
                Parity::Even
            };
            assert_eq!(tau_tilde_parity(1, &a).unwrap(), want);
        }
    }

    #[test]
    fn characters() {
        let r = character_search(&ar(&[5, 5]), 2);
        assert!(r.index_independent);
        assert!(r.characters.contains(&Character {
            modulus: 2,
            x: vec![0, 0],
            t: 1
        }));
        let r = character_search(&ar(&[3, 3, 5]), 4);
        assert!(r.characters.contains(&Character {
            modulus: 4,
            x: vec![1, 0, 0],
            t: 2
        }));
        let r = character_search(&ar(&[3, 3]), 4);
        assert!(r.characters.iter().any(|c| c.is_surjective()));
        for c in &r.characters {
            for rel in relations(&ar(&[3, 3]), 3) {
                assert_eq!(c.eval(&rel.lhs), c.eval(&rel.rhs));
            }
        }
    }

    #[test]
    fn depth_cap() {
        let a = ar(&[2]);
        let s = gen_s(1, 1, &a).unwrap();
        let sinv = inverse(&s);
        let mut acc = TableElement::identity(&a);
        let mut err = None;
        for _ in 0..70 {
            match compose_capped(&acc, &sinv, 8) {
                Ok(x) => acc = x,
                Err(e) => {
                    err = Some(e);
                    break;
                }
            }
        }
        assert_eq!(err, Some(TableError::DepthExceeded { cap: 8 }));
    }
}
