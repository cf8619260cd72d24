//! Non-erasing substitutions and their substitution matrices.
//!
//! Composition is written left-outermost: `compose(σ, ρ)` applies `ρ` first
//! and `σ` last, so a block `τ_m ⋯ τ_n` is `compose_all(&[τ_m, …, τ_n])`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::matrix::SubstitutionMatrix;
use crate::words::{Letter, Word};

/// A letter-to-word map on `{1, …, d}` with every image nonempty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Substitution {
    images: Vec<Word>,
}

impl Substitution {
    /// Builds a substitution from the images of `1, …, d` in order.
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let d = images.len();
        if d == 0 {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        if d > u8::MAX as usize {
            return Err(Error::InvalidArgument("alphabet too large".into()));
        }
        for (slot, img) in images.iter().enumerate() {
            if img.is_empty() {
                return Err(Error::InvalidArgument(format!("image of {} is empty", slot + 1)));
            }
            if img.max_letter() as usize > d {
                return Err(Error::InvalidArgument(format!(
                    "image of {} uses a letter outside {{1..{}}}",
                    slot + 1,
                    d
                )));
            }
        }
        Ok(Substitution { images })
    }

    /// Convenience constructor from digit strings, e.g. `["1", "13", "2"]`.
    pub fn from_strs(images: &[&str]) -> Result<Self> {
        Self::new(images.iter().map(|s| s.parse()).collect::<Result<Vec<Word>>>()?)
    }

    pub fn identity(d: usize) -> Self {
        Substitution { images: (1..=d as u8).map(|a| Word::from_raw(vec![a])).collect() }
    }

    /// Cassaigne–Selmer `γ₁`: 1 ↦ 1, 2 ↦ 13, 3 ↦ 2.
    pub fn gamma1() -> Self {
        Self::from_strs(&["1", "13", "2"]).unwrap()
    }

    /// Cassaigne–Selmer `γ₂`: 1 ↦ 2, 2 ↦ 13, 3 ↦ 3.
    pub fn gamma2() -> Self {
        Self::from_strs(&["2", "13", "3"]).unwrap()
    }

    /// Brun `β_ij` on `d` letters: `j ↦ ij`, every other letter fixed.
    pub fn brun(i: u8, j: u8, d: usize) -> Result<Self> {
        if i == j || i == 0 || j == 0 || i as usize > d || j as usize > d {
            return Err(Error::InvalidArgument(format!("no Brun substitution β_{}{} on {} letters", i, j, d)));
        }
        let mut images: Vec<Word> = (1..=d as u8).map(|a| Word::from_raw(vec![a])).collect();
        images[j as usize - 1] = Word::from_raw(vec![i, j]);
        Ok(Substitution { images })
    }

    pub fn alphabet_size(&self) -> usize {
        self.images.len()
    }

    pub fn image(&self, a: Letter) -> &Word {
        &self.images[a.slot()]
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Image of a word, letter by letter.
    pub fn apply(&self, w: &Word) -> Result<Word> {
        let d = self.alphabet_size();
        let mut out = Vec::with_capacity(w.len() * 2);
        for &b in w.as_bytes() {
            let img = self.images.get(b as usize - 1).filter(|_| b as usize <= d).ok_or_else(|| {
                Error::InvalidArgument(format!("letter {} outside alphabet of size {}", b, d))
            })?;
            out.extend_from_slice(img.as_bytes());
        }
        Ok(Word::from_raw(out))
    }

    /// `self ∘ inner`: apply `inner`, then `self`.
    pub fn compose(&self, inner: &Substitution) -> Result<Substitution> {
        if self.alphabet_size() != inner.alphabet_size() {
            return Err(Error::InvalidArgument(format!(
                "cannot compose substitutions on {} and {} letters",
                self.alphabet_size(),
                inner.alphabet_size()
            )));
        }
        let images = inner.images.iter().map(|img| self.apply(img)).collect::<Result<Vec<_>>>()?;
        Ok(Substitution { images })
    }

    /// `σ^k`; `σ^0` is the identity.
    pub fn pow(&self, k: usize) -> Substitution {
        let mut acc = Substitution::identity(self.alphabet_size());
        for _ in 0..k {
            acc = self.compose(&acc).expect("same alphabet");
        }
        acc
    }

    /// Substitution matrix, `M[a][b] = #occurrences of a in σ(b)`.
    pub fn matrix(&self) -> SubstitutionMatrix {
        let d = self.alphabet_size();
        let mut counts = vec![vec![0u64; d]; d];
        for (b, img) in self.images.iter().enumerate() {
            for &a in img.as_bytes() {
                counts[a as usize - 1][b] += 1;
            }
        }
        SubstitutionMatrix::from_rows(&counts).expect("square by construction")
    }

    /// Least `k ≤ k_max` with a positive `k`-th matrix power.
    ///
    /// `None` only means no such power exists up to the horizon.
    pub fn is_primitive(&self, k_max: u32) -> Option<u32> {
        let m = self.matrix();
        let mut acc = m.clone();
        for k in 1..=k_max {
            if acc.is_positive() {
                return Some(k);
            }
            acc = acc.mul(&m).expect("same dimension");
        }
        None
    }

    /// Length of the longest image, i.e. the max column sum of the matrix.
    pub fn norm(&self) -> BigUint {
        self.matrix().norm()
    }

    /// Ordered pairs `(a, b)` such that `ab` occurs inside some image.
    pub fn realized_pairs(&self) -> PairSet {
        let mut out = PairSet::empty(self.alphabet_size());
        for img in &self.images {
            for w in img.as_bytes().windows(2) {
                out.insert(Letter::from_slot(w[0] as usize - 1), Letter::from_slot(w[1] as usize - 1));
            }
        }
        out
    }
}

/// Left-outermost composition `σ_0 ∘ σ_1 ∘ ⋯ ∘ σ_k`.
pub fn compose_all(block: &[Substitution]) -> Result<Substitution> {
    let (first, rest) = block
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("cannot compose an empty block".into()))?;
    let mut acc = Substitution::identity(first.alphabet_size());
    for s in std::iter::once(first).chain(rest).rev() {
        acc = s.compose(&acc)?;
    }
    Ok(acc)
}

/// Matrix of `σ_0 ∘ ⋯ ∘ σ_k` without expanding any word: `M_0 ⋯ M_k`.
pub fn block_matrix(block: &[Substitution]) -> Result<SubstitutionMatrix> {
    let (first, rest) = block
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty block".into()))?;
    rest.iter().try_fold(first.matrix(), |acc, s| acc.mul(&s.matrix()))
}

impl fmt::Display for Substitution {
    /// `a:image` lines, e.g. `1:1\n2:13\n3:2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (slot, img) in self.images.iter().enumerate() {
            if slot > 0 {
                writeln!(f)?;
            }
            write!(f, "{}:{}", slot + 1, img)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.images.iter().enumerate().map(|(s, i)| format!("{}->{}", s + 1, i)).collect();
        write!(f, "Substitution({})", parts.join(", "))
    }
}

impl FromStr for Substitution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut images: Vec<Option<Word>> = Vec::new();
        for line in s.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (letter, image) = line
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("expected `a:image`, got {:?}", line)))?;
            let a: usize = letter
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad letter {:?}", letter)))?;
            if a == 0 {
                return Err(Error::InvalidArgument("letters are numbered from 1".into()));
            }
            if images.len() < a {
                images.resize(a, None);
            }
            if images[a - 1].replace(image.parse()?).is_some() {
                return Err(Error::InvalidArgument(format!("letter {} defined twice", a)));
            }
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(s, w)| w.ok_or_else(|| Error::InvalidArgument(format!("letter {} has no image", s + 1))))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(images)
    }
}

/// A set of ordered letter pairs, stored as a `d × d` bit table.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PairSet {
    dim: usize,
    bits: Vec<bool>,
}

impl PairSet {
    pub fn empty(dim: usize) -> Self {
        PairSet { dim, bits: vec![false; dim * dim] }
    }

    pub fn from_words(dim: usize, pairs: &[&str]) -> Result<Self> {
        let mut out = Self::empty(dim);
        for p in pairs {
            let w: Word = p.parse()?;
            let (a, b) = match w.as_bytes() {
                &[a, b] if a as usize <= dim && b as usize <= dim => (a, b),
                _ => return Err(Error::InvalidArgument(format!("{:?} is not a letter pair", p))),
            };
            out.insert(Letter::from_slot(a as usize - 1), Letter::from_slot(b as usize - 1));
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, a: Letter, b: Letter) {
        self.bits[a.slot() * self.dim + b.slot()] = true;
    }

    pub fn contains(&self, a: Letter, b: Letter) -> bool {
        self.bits[a.slot() * self.dim + b.slot()]
    }

    pub fn union_with(&mut self, other: &PairSet) {
        for (x, y) in self.bits.iter_mut().zip(&other.bits) {
            *x |= *y;
        }
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(x, y)| !*x || *y)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (Letter, Letter)> + '_ {
        let d = self.dim;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(k, _)| (Letter::from_slot(k / d), Letter::from_slot(k % d)))
    }

    /// Pairs rendered as two-letter words in lexicographic order.
    pub fn to_words(&self) -> Vec<String> {
        self.iter().map(|(a, b)| format!("{}{}", a, b)).collect()
    }
}

impl fmt::Debug for PairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_words().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn g1() -> Substitution {
        Substitution::gamma1()
    }

    fn g2() -> Substitution {
        Substitution::gamma2()
    }

    fn tau_prime() -> Substitution {
        compose_all(&[g1(), g1(), g2(), g1(), g2(), g2(), g2(), g1()]).unwrap()
    }

    fn brun_tau() -> Substitution {
        let b = |i, j| Substitution::brun(i, j, 4).unwrap();
        compose_all(&[b(1, 2), b(2, 3), b(3, 4), b(4, 1)]).unwrap()
    }

    fn rows(m: &SubstitutionMatrix) -> Vec<Vec<u64>> {
        (0..m.dim()).map(|i| (0..m.dim()).map(|j| u64::try_from(m.get(i, j)).unwrap()).collect()).collect()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(g1().apply(&w("2")).unwrap(), w("13"));
        assert_eq!(g2().apply(&Word::empty()).unwrap(), Word::empty());
        let b12 = Substitution::brun(1, 2, 4).unwrap();
        assert_eq!(b12.apply(&w("2341")).unwrap(), w("12341"));
        assert!(g1().apply(&w("4")).is_err());
    }

    #[test]
    fn compose_examples() {
        assert_eq!(tau_prime().image(Letter::new(1).unwrap()), &w("1213113"));
        assert_eq!(g1().compose(&Substitution::identity(3)).unwrap(), g1());
        let tau = g1().compose(&g2()).unwrap();
        assert_eq!(tau.image(Letter::new(2).unwrap()), &w("12"));
        assert!(g1().compose(&Substitution::identity(4)).is_err());
    }

    #[test]
    fn brun_tau_first_image() {
        assert_eq!(brun_tau().image(Letter::new(1).unwrap()), &w("12341"));
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(rows(&g1().matrix()), vec![vec![1, 1, 0], vec![0, 0, 1], vec![0, 1, 0]]);
        assert_eq!(rows(&g2().matrix()), vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 1, 1]]);
        assert_eq!(Substitution::identity(3).matrix(), SubstitutionMatrix::identity(3));
        let prod = g1().matrix().mul(&g2().matrix()).unwrap();
        assert_eq!(rows(&prod), vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 0]]);
        assert_eq!(rows(&prod.pow(3)), vec![vec![2, 3, 2], vec![2, 2, 1], vec![1, 2, 1]]);
    }

    #[test]
    fn positivity_and_primitivity() {
        assert!(!g1().matrix().is_positive());
        let ones = SubstitutionMatrix::from_rows(&[vec![1; 3], vec![1; 3], vec![1; 3]]).unwrap();
        assert!(ones.is_positive());
        let tau = g1().compose(&g2()).unwrap();
        assert!(tau.matrix().pow(3).is_positive());
        assert_eq!(tau.is_primitive(10), Some(3));
        assert_eq!(Substitution::identity(3).is_primitive(10), None);
        assert_eq!(brun_tau().is_primitive(10), Some(2));
    }

    #[test]
    fn norms_and_ratios() {
        assert_eq!(g1().matrix().norm(), BigUint::from(2u32));
        assert_eq!(SubstitutionMatrix::identity(3).norm(), BigUint::from(1u32));
        let cube = g1().compose(&g2()).unwrap().matrix().pow(3);
        // rows (2,3,2), (2,2,1), (1,2,1): the largest within-row ratio is 2
        assert_eq!(cube.length_ratio_bound().unwrap(), BigRational::from_integer(2.into()));
    }

    #[test]
    fn realized_pair_examples() {
        assert_eq!(g1().realized_pairs().to_words(), vec!["13"]);
        assert!(Substitution::identity(3).realized_pairs().is_empty());
        let l2 = PairSet::from_words(3, &["11", "12", "13", "21", "31"]).unwrap();
        assert!(l2.is_subset(&tau_prime().realized_pairs()));
    }

    #[test]
    fn unimodular_generators() {
        assert_eq!(g1().matrix().determinant().magnitude(), &BigUint::from(1u32));
        assert_eq!(g2().matrix().determinant().magnitude(), &BigUint::from(1u32));
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    let det = Substitution::brun(i, j, 4).unwrap().matrix().determinant();
                    assert_eq!(det, BigInt::from(1));
                }
            }
        }
    }

    #[test]
    fn length_column_identity() {
        let mut gens = vec![g1(), g2()];
        for i in 1..=4u8 {
            for j in 1..=4u8 {
                if i != j {
                    gens.push(Substitution::brun(i, j, 4).unwrap());
                }
            }
        }
        for s in gens {
            let sums = s.matrix().column_sums();
            for (slot, img) in s.images().iter().enumerate() {
                assert_eq!(BigUint::from(img.len()), sums[slot]);
            }
        }
    }

    #[test]
    fn text_format_round_trip() {
        let s = g1();
        assert_eq!(s.to_string(), "1:1\n2:13\n3:2");
        assert_eq!(s.to_string().parse::<Substitution>().unwrap(), s);
        assert!("1:1\n3:2".parse::<Substitution>().is_err());
        assert!("1:\n2:1".parse::<Substitution>().is_err());
        assert!(Substitution::from_strs(&["1", "14", "2"]).is_err());
    }

    fn generator(idx: usize) -> Substitution {
        if idx.is_multiple_of(2) {
            g1()
        } else {
            g2()
        }
    }

    fn brun_generator(idx: usize) -> Substitution {
        let pairs: Vec<(u8, u8)> =
            (1..=4).flat_map(|i| (1..=4).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
        let (i, j) = pairs[idx % pairs.len()];
        Substitution::brun(i, j, 4).unwrap()
    }

    proptest! {
        #[test]
        fn matrix_is_a_homomorphism_cs(idx in proptest::collection::vec(0usize..2, 1..=10)) {
            let block: Vec<_> = idx.iter().map(|&i| generator(i)).collect();
            let composed = compose_all(&block).unwrap();
            prop_assert_eq!(composed.matrix(), block_matrix(&block).unwrap());
        }

        #[test]
        fn matrix_is_a_homomorphism_brun(idx in proptest::collection::vec(0usize..12, 1..=10)) {
            let block: Vec<_> = idx.iter().map(|&i| brun_generator(i)).collect();
            let composed = compose_all(&block).unwrap();
            prop_assert_eq!(composed.matrix(), block_matrix(&block).unwrap());
        }

        #[test]
        fn level_words_concatenate(idx in proptest::collection::vec(0usize..2, 2..=13)) {
            // w_{n+1}(a) = w_n(b_1)⋯w_n(b_r) where τ_{n+1}(a) = b_1⋯b_r
            let block: Vec<_> = idx.iter().map(|&i| generator(i)).collect();
            for n in 0..block.len() - 1 {
                let wn = compose_all(&block[..=n]).unwrap();
                let wn1 = compose_all(&block[..=n + 1]).unwrap();
                for a in 1..=3u8 {
                    let a = Letter::new(a).unwrap();
                    let mut expected = Vec::new();
                    for b in block[n + 1].image(a).letters() {
                        expected.extend_from_slice(wn.image(b).as_bytes());
                    }
                    prop_assert_eq!(wn1.image(a).as_bytes(), expected.as_slice());
                }
            }
        }
    }
}
