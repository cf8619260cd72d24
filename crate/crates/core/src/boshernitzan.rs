//! Certificates for Boshernitzan's criterion on S-adic directive sequences.
//!
//! A certificate is a window `n0 < n1 < n2 < n3` of the directive sequence
//! with
//!
//! * (a) `M_{[n0+1,n1]}` and `M_{[n2+1,n3]}` positive,
//! * (b) `τ_{[n1+1,n2]}` a word builder at level `n1`,
//! * (c) the norms of the three segment matrices bounded by `N`.
//!
//! Along such windows every cylinder of length `r = min_c |w_{n1}(c)|` has
//! measure at least `(N³ r)⁻¹`.
//!
//! The precedes relation at a level quantifies over every later term of the
//! sequence, so it cannot be computed from a prefix. [`precedes_overapprox`]
//! returns a superset valid for every continuation; a word builder check
//! against it is sound but may reject true word builders.
//!
//! The matrix norm is the maximum column sum. With it the image lengths obey
//! `max|w_{n3}| ≤ N² max|w_{n1}|`, and positive integer matrices of norm `N`
//! have row ratios at most `N`, which gives the `N³` in the constant.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{level_word_tower, DirectiveView};
use crate::error::{Error, Result};
use crate::mcf::Branch;
use crate::substitution::{PairSet, Substitution};
use crate::words::{count_in_slice, Letter, Word};

/// Pairs `(a, b)` with `ab` a factor of some image `σ(c)`.
pub fn realized_pairs(sigma: &Substitution) -> PairSet {
    sigma.realized_pairs()
}

/// What the pair relations of a composed block depend on: first letter, last
/// letter, and internal two-letter factors of every image.
///
/// Profiles compose without expanding words, so long segments stay cheap.
#[derive(Clone, Debug, PartialEq)]
pub struct PairProfile {
    first: Vec<Letter>,
    last: Vec<Letter>,
    pairs: Vec<PairSet>,
}

impl PairProfile {
    pub fn of(sigma: &Substitution) -> Self {
        let d = sigma.alphabet_size();
        let mut pairs = Vec::with_capacity(d);
        for img in sigma.images() {
            let mut p = PairSet::empty(d);
            for w in img.as_bytes().windows(2) {
                p.insert(Letter::from_slot(w[0] as usize - 1), Letter::from_slot(w[1] as usize - 1));
            }
            pairs.push(p);
        }
        PairProfile {
            first: sigma.images().iter().map(|i| i.first().unwrap()).collect(),
            last: sigma.images().iter().map(|i| i.last().unwrap()).collect(),
            pairs,
        }
    }

    /// Profile of `self ∘ inner`.
    pub fn then_inner(&self, inner: &Substitution) -> Self {
        let d = self.first.len();
        let mut out = PairProfile { first: Vec::with_capacity(d), last: Vec::with_capacity(d), pairs: Vec::with_capacity(d) };
        for img in inner.images() {
            let letters: Vec<Letter> = img.letters().collect();
            let mut p = PairSet::empty(d);
            for (k, x) in letters.iter().enumerate() {
                p.union_with(&self.pairs[x.slot()]);
                if let Some(y) = letters.get(k + 1) {
                    p.insert(self.last[x.slot()], self.first[y.slot()]);
                }
            }
            out.first.push(self.first[letters[0].slot()]);
            out.last.push(self.last[letters[letters.len() - 1].slot()]);
            out.pairs.push(p);
        }
        out
    }

    /// Pairs realized inside some image.
    pub fn realized(&self) -> PairSet {
        let mut out = PairSet::empty(self.first.len());
        for p in &self.pairs {
            out.union_with(p);
        }
        out
    }

    /// Pairs across the seam of `σ(x)σ(y)` for every letter pair `xy`.
    pub fn seam_pairs(&self) -> PairSet {
        let mut out = PairSet::empty(self.first.len());
        for &a in &self.last {
            for &b in &self.first {
                out.insert(a, b);
            }
        }
        out
    }
}

/// An over-approximation of the precedes relation at `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecedesSet {
    pub pairs: PairSet,
    pub level: usize,
    pub depth: usize,
}

/// Superset of the pairs `ab` that occur in `τ_{[n+1,n+m]}(c)` for some `m`
/// and `c`, valid for any continuation of the prefix.
///
/// Pairs inside images of the first `j` blocks are exact; any pair at a deeper
/// block `m > j` either sits inside some `τ_{[n+1,n+j]}(x)` or straddles the
/// seam of `τ_{[n+1,n+j]}(xy)`, so adding every seam pair covers the tail.
pub fn precedes_overapprox(dv: &DirectiveView, n: usize, j: usize) -> Result<PrecedesSet> {
    if j == 0 {
        return Err(Error::InvalidArgument("precedes depth must be at least 1".into()));
    }
    if n + j >= dv.len() {
        return Err(Error::InvalidArgument(format!(
            "depth {} at level {} needs terms through index {}, prefix has {}",
            j,
            n,
            n + j,
            dv.len()
        )));
    }
    let mut profile = PairProfile::of(&dv.prefix()[n + 1]);
    let mut pairs = profile.realized();
    for m in 2..=j {
        profile = profile.then_inner(&dv.prefix()[n + m]);
        pairs.union_with(&profile.realized());
    }
    pairs.union_with(&profile.seam_pairs());
    Ok(PrecedesSet { pairs, level: n, depth: j })
}

/// Whether every pair of `p` is realized inside an image of `block`.
///
/// `true` certifies the word builder property whenever `p` over-approximates
/// the precedes relation; `false` proves nothing.
pub fn is_word_builder(block: &Substitution, p: &PrecedesSet) -> bool {
    p.pairs.is_subset(&block.realized_pairs())
}

/// Certified window for Boshernitzan's criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoshernitzanCertificate {
    pub n0: usize,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Largest norm among the three segment matrices.
    #[serde(serialize_with = "ser_display")]
    pub norm_bound: BigUint,
    /// `min_c |w_{n1}(c)|`.
    #[serde(serialize_with = "ser_display")]
    pub r: BigUint,
    /// Depth of the precedes over-approximation used for (b).
    pub precedes_depth: usize,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl BoshernitzanCertificate {
    /// Cylinder-measure constant `C = (N³ r)⁻¹`.
    pub fn constant(&self) -> BigRational {
        boshernitzan_constant(self)
    }
}

/// `(N³ r)⁻¹`.
pub fn boshernitzan_constant(cert: &BoshernitzanCertificate) -> BigRational {
    let n = BigInt::from(cert.norm_bound.clone());
    let denom = &n * &n * &n * BigInt::from(cert.r.clone());
    BigRational::new(BigInt::one(), denom)
}

/// Search limits for [`scan_certificate`].
#[derive(Clone, Copy, Debug)]
pub struct WindowCaps {
    /// Longest positive segment, `n1 − n0` and `n3 − n2`.
    pub positive: usize,
    /// Largest precedes depth for the word builder check.
    pub builder_depth: usize,
}

impl Default for WindowCaps {
    fn default() -> Self {
        WindowCaps { positive: 20, builder_depth: 8 }
    }
}

/// Per-segment data shared by the search: matrices, norms, positivity, and
/// pair profiles of `τ_{[a,b]}` for every `a ≤ b` inside the horizon.
struct SegmentTable {
    horizon: usize,
    positive: Vec<bool>,
    norms: Vec<BigUint>,
    profiles: Vec<PairProfile>,
}

impl SegmentTable {
    fn build(prefix: &[Substitution], horizon: usize) -> Result<Self> {
        let h = horizon;
        let rows: Vec<(Vec<bool>, Vec<BigUint>, Vec<PairProfile>)> = (0..h)
            .into_par_iter()
            .map(|a| {
                let mut pos = Vec::with_capacity(h - a);
                let mut norms = Vec::with_capacity(h - a);
                let mut profiles = Vec::with_capacity(h - a);
                let mut m = prefix[a].matrix();
                let mut p = PairProfile::of(&prefix[a]);
                for b in a..h {
                    if b > a {
                        m = m.mul(&prefix[b].matrix()).expect("same alphabet");
                        p = p.then_inner(&prefix[b]);
                    }
                    pos.push(m.is_positive());
                    norms.push(m.norm());
                    profiles.push(p.clone());
                }
                (pos, norms, profiles)
            })
            .collect();
        let mut table = SegmentTable { horizon: h, positive: vec![false; h * h], norms: vec![BigUint::default(); h * h], profiles: Vec::new() };
        let mut profiles: Vec<Option<PairProfile>> = vec![None; h * h];
        for (a, (pos, norms, profs)) in rows.into_iter().enumerate() {
            for (k, ((p, n), pr)) in pos.into_iter().zip(norms).zip(profs).enumerate() {
                let b = a + k;
                table.positive[a * h + b] = p;
                table.norms[a * h + b] = n;
                profiles[a * h + b] = Some(pr);
            }
        }
        let d = prefix[0].alphabet_size();
        let filler = PairProfile::of(&Substitution::identity(d));
        table.profiles = profiles.into_iter().map(|p| p.unwrap_or_else(|| filler.clone())).collect();
        Ok(table)
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        a * self.horizon + b
    }

    fn positive(&self, a: usize, b: usize) -> bool {
        self.positive[self.idx(a, b)]
    }

    fn norm(&self, a: usize, b: usize) -> &BigUint {
        &self.norms[self.idx(a, b)]
    }

    /// Precedes over-approximation at level `n1` with depth `j`, from profiles.
    fn precedes(&self, n1: usize, j: usize) -> PairSet {
        let mut pairs = self.profiles[self.idx(n1 + 1, n1 + 1)].realized();
        for m in 2..=j {
            pairs.union_with(&self.profiles[self.idx(n1 + 1, n1 + m)].realized());
        }
        pairs.union_with(&self.profiles[self.idx(n1 + 1, n1 + j)].seam_pairs());
        pairs
    }

    fn word_builder(&self, n1: usize, n2: usize, depth_cap: usize) -> Option<usize> {
        let depth = depth_cap.min(n2 - n1);
        let p = self.precedes(n1, depth);
        p.is_subset(&self.profiles[self.idx(n1 + 1, n2)].realized()).then_some(depth)
    }
}

/// First window `n0 < n1 < n2 < n3 < horizon` satisfying (a)–(c), ordered
/// by smallest `n3`, then `n0`, `n1`, `n2`.
///
/// With `max_norm = None` any norm is accepted and the certificate reports
/// the largest of the three. `None` is a search failure, not a disproof.
pub fn scan_certificate(
    dv: &DirectiveView,
    max_norm: Option<&BigUint>,
    horizon: usize,
    caps: WindowCaps,
) -> Result<Option<BoshernitzanCertificate>> {
    if dv.len() < horizon {
        return Err(Error::InvalidArgument(format!("horizon {} exceeds the prefix length {}", horizon, dv.len())));
    }
    if horizon < 4 {
        return Ok(None);
    }
    let table = SegmentTable::build(dv.prefix(), horizon)?;
    let within = |n: &BigUint| max_norm.is_none_or(|cap| n <= cap);
    for n3 in 3..horizon {
        let found = (0..n3 - 2).into_par_iter().find_map_first(|n0| {
            for n1 in n0 + 1..n3 - 1 {
                if n1 - n0 > caps.positive {
                    break;
                }
                if !table.positive(n0 + 1, n1) || !within(table.norm(n0 + 1, n1)) {
                    continue;
                }
                for n2 in n1 + 1..n3 {
                    if n3 - n2 > caps.positive {
                        continue;
                    }
                    if !table.positive(n2 + 1, n3) || !within(table.norm(n2 + 1, n3)) || !within(table.norm(n1 + 1, n2)) {
                        continue;
                    }
                    if let Some(depth) = table.word_builder(n1, n2, caps.builder_depth) {
                        return Some((n0, n1, n2, depth));
                    }
                }
            }
            None
        });
        if let Some((n0, n1, n2, depth)) = found {
            let norm_bound = [table.norm(n0 + 1, n1), table.norm(n1 + 1, n2), table.norm(n2 + 1, n3)]
                .into_iter()
                .max()
                .cloned()
                .unwrap();
            let r = dv.segment_matrix(0, n1)?.column_sums().into_iter().min().unwrap();
            return Ok(Some(BoshernitzanCertificate { n0, n1, n2, n3, norm_bound, r, precedes_depth: depth }));
        }
    }
    Ok(None)
}

/// Checks (a)–(c) at a given window directly from the substitutions.
pub fn check_window(
    dv: &DirectiveView,
    n0: usize,
    n1: usize,
    n2: usize,
    n3: usize,
    builder_depth: usize,
) -> Result<Option<BoshernitzanCertificate>> {
    if !(n0 < n1 && n1 < n2 && n2 < n3) {
        return Err(Error::PreconditionViolation(format!("indices {} {} {} {} are not increasing", n0, n1, n2, n3)));
    }
    if n3 >= dv.len() {
        return Err(Error::InvalidArgument("window runs past the prefix".into()));
    }
    let head = dv.segment_matrix(n0 + 1, n1)?;
    let builder = dv.segment_matrix(n1 + 1, n2)?;
    let tail = dv.segment_matrix(n2 + 1, n3)?;
    if !head.is_positive() || !tail.is_positive() {
        return Ok(None);
    }
    let depth = builder_depth.min(n2 - n1);
    let p = precedes_overapprox(dv, n1, depth)?;
    let block = crate::substitution::compose_all(&dv.prefix()[n1 + 1..=n2])?;
    if !is_word_builder(&block, &p) {
        return Ok(None);
    }
    let norm_bound = [head.norm(), builder.norm(), tail.norm()].into_iter().max().unwrap();
    let r = dv.segment_matrix(0, n1)?.column_sums().into_iter().min().unwrap();
    Ok(Some(BoshernitzanCertificate { n0, n1, n2, n3, norm_bound, r, precedes_depth: depth }))
}

/// Exact check of the covering mechanism behind a certificate: every factor of
/// length `r` of the level-`n2` words (which include every allowed word of
/// that length) occurs in every level-`n3` word.
pub fn verify_cover(dv: &DirectiveView, cert: &BoshernitzanCertificate) -> Result<bool> {
    if !(cert.n0 < cert.n1 && cert.n1 < cert.n2 && cert.n2 < cert.n3) {
        return Err(Error::PreconditionViolation(format!(
            "certificate indices {} {} {} {} are not increasing",
            cert.n0, cert.n1, cert.n2, cert.n3
        )));
    }
    if cert.n3 >= dv.len() {
        return Err(Error::PreconditionViolation("certificate runs past the prefix".into()));
    }
    let tower = level_word_tower(dv, cert.n3, usize::MAX)?;
    let d = dv.alphabet_size();
    let r = tower[cert.n1].min_length();
    if r != cert.r {
        return Ok(false);
    }
    let r = r.to_usize().ok_or_else(|| Error::Numerical("r does not fit in memory".into()))?;
    let mut needed: HashSet<&[u8]> = HashSet::new();
    for c in 0..d {
        let w = tower[cert.n2].word(Letter::from_slot(c))?;
        needed.extend(w.as_bytes().windows(r));
    }
    for c in 0..d {
        let w = tower[cert.n3].word(Letter::from_slot(c))?;
        let present: HashSet<&[u8]> = w.as_bytes().windows(r).collect();
        if !needed.iter().all(|f| present.contains(f)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Start indices of every (possibly overlapping) occurrence of `block`.
pub fn find_block(branches: &[Branch], block: &[Branch]) -> Vec<usize> {
    if block.is_empty() || block.len() > branches.len() {
        return Vec::new();
    }
    branches.windows(block.len()).enumerate().filter(|(_, w)| *w == block).map(|(m, _)| m).collect()
}

/// Share of the `|text| − |w| + 1` windows of `text` that read `w`.
pub fn cylinder_frequency(w: &Word, text: &Word) -> Result<BigRational> {
    if text.len() <= w.len() {
        return Err(Error::PreconditionViolation("text must be longer than the word".into()));
    }
    let count = count_in_slice(w.as_bytes(), text.as_bytes());
    Ok(BigRational::new(BigInt::from(count), BigInt::from(text.len() - w.len() + 1)))
}

/// Smallest empirical frequency in `text` over all words of length `r` that
/// occur in any of `sources`, with the word attaining it.
pub fn min_cylinder_frequency(sources: &[&Word], text: &Word, r: usize) -> Result<(f64, Word)> {
    if text.len() <= r || r == 0 {
        return Err(Error::PreconditionViolation("text must be longer than the word length".into()));
    }
    let mut counts: std::collections::HashMap<&[u8], usize> = std::collections::HashMap::new();
    for s in sources {
        for f in s.as_bytes().windows(r) {
            counts.insert(f, 0);
        }
    }
    for f in text.as_bytes().windows(r) {
        if let Some(c) = counts.get_mut(f) {
            *c += 1;
        }
    }
    let total = (text.len() - r + 1) as f64;
    let (word, count) = counts
        .into_iter()
        .min_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)))
        .ok_or_else(|| Error::InvalidArgument("no words of that length".into()))?;
    Ok((count as f64 / total, Word::from_raw(word.to_vec())))
}

/// The 20-term Cassaigne–Selmer block `τ³ τ′ τ³` with `τ = γ₁γ₂` and
/// `τ′ = γ₁²γ₂γ₁γ₂³γ₁`, as branch indices (1 for `γ₁`, 2 for `γ₂`).
pub const TAU_STAR_BRANCHES: [u8; 20] = [1, 2, 1, 2, 1, 2, 1, 1, 2, 1, 2, 2, 2, 1, 1, 2, 1, 2, 1, 2];

/// Position of `τ′` inside [`TAU_STAR_BRANCHES`].
pub const TAU_PRIME_OFFSET: usize = 6;

pub fn tau_star_block() -> Vec<Substitution> {
    TAU_STAR_BRANCHES.iter().map(|&b| if b == 1 { Substitution::gamma1() } else { Substitution::gamma2() }).collect()
}
