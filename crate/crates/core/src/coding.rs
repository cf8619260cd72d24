//! Directive sequences, level words `w_n(a) = τ_0 ⋯ τ_n(a)`, and potentials
//! sampled from level words.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::matrix::SubstitutionMatrix;
use crate::mcf::{Algorithm, Itinerary, PiecewiseProjective};
use crate::substitution::Substitution;
use crate::words::{factors, FactorSet, Letter, Word};

/// Level words longer than this are not materialized by default.
pub const DEFAULT_LENGTH_CAP: usize = 10_000_000;

/// A finite prefix `τ_0, τ_1, …` of a directive sequence, together with the
/// generator set all terms (seen or not) are drawn from.
#[derive(Clone, Debug)]
pub struct DirectiveView {
    prefix: Vec<Substitution>,
    generators: Vec<Substitution>,
}

impl DirectiveView {
    pub fn new(prefix: Vec<Substitution>, generators: Vec<Substitution>) -> Result<Self> {
        let d = generators
            .first()
            .map(Substitution::alphabet_size)
            .ok_or_else(|| Error::InvalidArgument("empty generator set".into()))?;
        if generators.iter().any(|g| g.alphabet_size() != d) {
            return Err(Error::InvalidArgument("generators on different alphabets".into()));
        }
        if let Some(pos) = prefix.iter().position(|s| !generators.contains(s)) {
            return Err(Error::InvalidArgument(format!("term {} is not in the generator set", pos)));
        }
        Ok(DirectiveView { prefix, generators })
    }

    /// Generators of a built-in algorithm.
    pub fn generators_of(algorithm: Algorithm) -> Vec<Substitution> {
        algorithm
            .branches()
            .into_iter()
            .map(|b| algorithm.substitution(b).expect("own branch"))
            .collect()
    }

    /// Directive sequence read off an itinerary.
    pub fn from_itinerary<T>(it: &Itinerary<T>) -> Self {
        DirectiveView { prefix: it.substitutions.clone(), generators: Self::generators_of(it.algorithm) }
    }

    /// `block` repeated until the prefix holds `len` terms.
    pub fn periodic(block: &[Substitution], len: usize, generators: Vec<Substitution>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::InvalidArgument("empty periodic block".into()));
        }
        let prefix = block.iter().cycle().take(len).cloned().collect();
        Self::new(prefix, generators)
    }

    pub fn prefix(&self) -> &[Substitution] {
        &self.prefix
    }

    pub fn generators(&self) -> &[Substitution] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefix.is_empty()
    }

    pub fn alphabet_size(&self) -> usize {
        self.generators[0].alphabet_size()
    }

    /// Appends further terms; each must come from the generator set.
    pub fn extend(&mut self, terms: impl IntoIterator<Item = Substitution>) -> Result<()> {
        for t in terms {
            if !self.generators.contains(&t) {
                return Err(Error::InvalidArgument("term is not in the generator set".into()));
            }
            self.prefix.push(t);
        }
        Ok(())
    }

    /// `M_{[from, to]} = M_from ⋯ M_to` (inclusive indices).
    pub fn segment_matrix(&self, from: usize, to: usize) -> Result<SubstitutionMatrix> {
        if from > to || to >= self.prefix.len() {
            return Err(Error::InvalidArgument(format!(
                "segment [{}, {}] outside a prefix of length {}",
                from,
                to,
                self.prefix.len()
            )));
        }
        crate::substitution::block_matrix(&self.prefix[from..=to])
    }
}

/// The level words `w_n(a)` for every letter, plus `M_{[0,n]}`.
#[derive(Clone, Debug)]
pub struct LevelWords {
    pub level: usize,
    /// `None` for words past the length cap.
    words: Vec<Option<Word>>,
    pub matrix: SubstitutionMatrix,
}

impl LevelWords {
    pub fn word(&self, a: Letter) -> Result<&Word> {
        self.words
            .get(a.slot())
            .ok_or_else(|| Error::InvalidArgument(format!("no letter {}", a)))?
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument(format!("w_{}({}) exceeds the length cap", self.level, a)))
    }

    pub fn is_materialized(&self) -> bool {
        self.words.iter().all(Option::is_some)
    }

    /// `|w_n(a)|`, the column sum of `M_{[0,n]}`; available past the cap.
    pub fn length(&self, a: Letter) -> BigUint {
        self.matrix.column_sum(a.slot())
    }

    pub fn min_length(&self) -> BigUint {
        self.matrix.column_sums().into_iter().min().unwrap_or_default()
    }

    pub fn max_length(&self) -> BigUint {
        self.matrix.norm()
    }

    /// Level `n + 1`, built by concatenating level-`n` words along `next`.
    pub fn advance(&self, next: &Substitution, cap: usize) -> Result<LevelWords> {
        let matrix = self.matrix.mul(&next.matrix())?;
        let words = next
            .images()
            .iter()
            .enumerate()
            .map(|(slot, img)| {
                let len = matrix.column_sum(slot).to_usize().unwrap_or(usize::MAX);
                if len > cap {
                    return None;
                }
                let mut buf = Vec::with_capacity(len);
                for b in img.letters() {
                    buf.extend_from_slice(self.words[b.slot()].as_ref()?.as_bytes());
                }
                Some(Word::from_raw(buf))
            })
            .collect();
        Ok(LevelWords { level: self.level + 1, words, matrix })
    }

    fn base(first: &Substitution) -> LevelWords {
        LevelWords { level: 0, words: first.images().iter().cloned().map(Some).collect(), matrix: first.matrix() }
    }
}

/// Level words at level `n`, with the default length cap.
pub fn level_words(dv: &DirectiveView, n: usize) -> Result<LevelWords> {
    level_words_capped(dv, n, DEFAULT_LENGTH_CAP)
}

pub fn level_words_capped(dv: &DirectiveView, n: usize, cap: usize) -> Result<LevelWords> {
    if dv.len() < n + 1 {
        return Err(Error::InvalidArgument(format!(
            "level {} needs {} terms, prefix has {}",
            n,
            n + 1,
            dv.len()
        )));
    }
    let mut lw = LevelWords::base(&dv.prefix[0]);
    for s in &dv.prefix[1..=n] {
        lw = lw.advance(s, cap)?;
    }
    Ok(lw)
}

/// Every level `0..=n`, in order.
pub fn level_word_tower(dv: &DirectiveView, n: usize, cap: usize) -> Result<Vec<LevelWords>> {
    if dv.len() < n + 1 {
        return Err(Error::InvalidArgument(format!("level {} is past the prefix", n)));
    }
    let mut out = vec![LevelWords::base(&dv.prefix[0])];
    for s in &dv.prefix[1..=n] {
        let next = out.last().unwrap().advance(s, cap)?;
        out.push(next);
    }
    Ok(out)
}

/// Lowest level at which `|w_n(a)| ≥ min_len`, with that level's words.
pub fn first_level_reaching(dv: &DirectiveView, a: Letter, min_len: usize, cap: usize) -> Result<LevelWords> {
    let mut lw = LevelWords::base(&dv.prefix[0]);
    let target = BigUint::from(min_len);
    for s in &dv.prefix[1..] {
        if lw.length(a) >= target {
            break;
        }
        lw = lw.advance(s, cap)?;
    }
    if lw.length(a) < target {
        return Err(Error::InvalidArgument(format!(
            "prefix of length {} never reaches |w_n({})| >= {}",
            dv.len(),
            a,
            min_len
        )));
    }
    Ok(lw)
}

/// Factors of length `≤ max_len` of the level-`n` words, a subset of the
/// language of the directive sequence.
pub fn language(dv: &DirectiveView, n: usize, max_len: usize) -> Result<FactorSet> {
    let lw = level_words(dv, n)?;
    let mut fs = factors(&Word::empty(), max_len)?;
    for slot in 0..dv.alphabet_size() {
        fs.extend_from(lw.word(Letter::from_slot(slot))?);
    }
    Ok(fs)
}

/// Letter counts divided by the length, over an alphabet of size `d`.
pub fn letter_frequencies(w: &Word, d: usize) -> Result<Vec<BigRational>> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("frequencies of the empty word".into()));
    }
    let mut counts = vec![0u64; d];
    for &b in w.as_bytes() {
        *counts
            .get_mut(b as usize - 1)
            .ok_or_else(|| Error::InvalidArgument(format!("letter {} outside alphabet of size {}", b, d)))? += 1;
    }
    let n = w.len() as u64;
    Ok(counts.into_iter().map(|c| BigRational::new(c.into(), n.into())).collect())
}

/// A locally constant function of a window of `window` letters, scaled by a
/// coupling constant.
#[derive(Clone, Debug)]
pub struct SamplingFunction {
    pub window: usize,
    pub values: HashMap<Word, f64>,
    /// Value for words missing from `values`; `None` makes them an error.
    pub default: Option<f64>,
    pub coupling: f64,
}

impl SamplingFunction {
    pub fn new(window: usize, values: HashMap<Word, f64>, coupling: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidArgument("sampling window must be at least 1".into()));
        }
        if let Some(w) = values.keys().find(|w| w.len() != window) {
            return Err(Error::InvalidArgument(format!("cylinder {} does not match window {}", w, window)));
        }
        if values.values().any(|v| !v.is_finite()) || !coupling.is_finite() {
            return Err(Error::InvalidArgument("sampling values must be finite".into()));
        }
        Ok(SamplingFunction { window, values, default: None, coupling })
    }

    /// One value per letter, window 1.
    pub fn letter_values(values: &[f64], coupling: f64) -> Result<Self> {
        let map = values
            .iter()
            .enumerate()
            .map(|(slot, &v)| (Word::from_raw(vec![slot as u8 + 1]), v))
            .collect();
        Self::new(1, map, coupling)
    }

    /// Parses `"w=r,…"`, e.g. `"1=0,2=1,3=-1"` or `"13=1"`.
    pub fn parse(spec: &str, coupling: f64) -> Result<Self> {
        let mut values = HashMap::new();
        let mut window = None;
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (w, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected `word=value`, got {:?}", item)))?;
            let w: Word = w.parse()?;
            let v: f64 =
                v.trim().parse().map_err(|_| Error::InvalidArgument(format!("bad value in {:?}", item)))?;
            if *window.get_or_insert(w.len()) != w.len() {
                return Err(Error::InvalidArgument("sampling words must share one length".into()));
            }
            values.insert(w, v);
        }
        Self::new(window.ok_or_else(|| Error::InvalidArgument("no sampling values".into()))?, values, coupling)
    }

    pub fn with_default(mut self, default: f64) -> Self {
        self.default = Some(default);
        self
    }

    fn value(&self, w: &[u8]) -> Result<f64> {
        match self.values.get(w) {
            Some(v) => Ok(*v),
            None => self.default.ok_or_else(|| Error::IncompleteSampling(Word::from_raw(w.to_vec()).to_string())),
        }
    }

    fn describe(&self) -> String {
        let mut items: Vec<String> = self.values.iter().map(|(w, v)| format!("{}={}", w, v)).collect();
        items.sort();
        format!("window={} values={} coupling={}", self.window, items.join(","), self.coupling)
    }
}

/// Characteristic function of the cylinder `[w]`, scaled by `coupling`.
pub fn cylinder_indicator(w: &Word, coupling: f64) -> Result<SamplingFunction> {
    if w.is_empty() {
        return Err(Error::InvalidArgument("cylinder of the empty word".into()));
    }
    Ok(SamplingFunction::new(w.len(), HashMap::from([(w.clone(), 1.0)]), coupling)?.with_default(0.0))
}

/// A finite potential `V(0), …, V(p − 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    pub samples: Vec<f64>,
    pub source: String,
}

impl Potential {
    pub fn new(samples: Vec<f64>) -> Self {
        Potential { samples, source: String::new() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Some shift `p ≤ len/3` under which the samples repeat, if any.
    pub fn smallest_period(&self) -> Option<usize> {
        let v = &self.samples;
        (1..=v.len() / 3).find(|&p| (0..v.len() - p).all(|m| v[m] == v[m + p]))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential(len={}, {})", self.samples.len(), self.source)
    }
}

/// `V(m) = λ · f(w_{m+1} ⋯ w_{m+k})` for `m = 0, …, |w| − k`.
pub fn sample_potential(w: &Word, f: &SamplingFunction) -> Result<Potential> {
    if w.len() < f.window {
        return Err(Error::InvalidArgument(format!("word of length {} is shorter than the window {}", w.len(), f.window)));
    }
    let samples = w
        .as_bytes()
        .windows(f.window)
        .map(|cyl| f.value(cyl).map(|v| f.coupling * v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Potential { samples, source: f.describe() })
}
