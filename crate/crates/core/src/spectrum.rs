//! Spectra of periodic Schrödinger operators `(Hψ)(n) = ψ(n+1) + ψ(n−1) + V(n)ψ(n)`.
//!
//! For a `p`-periodic potential the spectrum is the set where the discriminant
//! (trace of the one-period transfer matrix) lies in `[−2, 2]`. Its band edges
//! are the eigenvalues of the `p × p` truncations with periodic and
//! antiperiodic corner couplings. Interleaving the indices makes those
//! matrices pentadiagonal; Givens rotations reduce them to tridiagonal form in
//! `O(p²)` and implicit QL finishes the job.

use rayon::prelude::*;
use serde::Serialize;

use crate::coding::{level_word_tower, sample_potential, DirectiveView, Potential, SamplingFunction};
use crate::error::{Error, Result};
use crate::words::Letter;

/// Default largest period handled by [`zero_measure_trend`].
pub const DEFAULT_PERIOD_CAP: usize = 4000;

/// Bands closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// A real `2 × 2` matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix(pub [[f64; 2]; 2]);

impl TransferMatrix {
    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
}

/// `T(E) = A_{p−1} ⋯ A_0` with `A_m = [[E − V(m), −1], [1, 0]]`.
pub fn transfer_matrix(energy: f64, v: &Potential) -> TransferMatrix {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &vm in &v.samples {
        let a = energy - vm;
        m = [[a * m[0][0] - m[1][0], a * m[0][1] - m[1][1]], [m[0][0], m[0][1]]];
    }
    TransferMatrix(m)
}

/// Trace of the one-period transfer matrix.
pub fn discriminant(energy: f64, v: &Potential) -> f64 {
    transfer_matrix(energy, v).trace()
}

/// Sorted disjoint closed intervals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandList {
    pub bands: Vec<(f64, f64)>,
    pub period: usize,
}

impl BandList {
    pub fn len(&self) -> usize {
        self.bands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn contains(&self, energy: f64) -> bool {
        self.bands.iter().any(|&(l, u)| l <= energy && energy <= u)
    }
}

/// Lebesgue measure of the union of bands.
pub fn total_bandwidth(b: &BandList) -> f64 {
    b.bands.iter().map(|(l, u)| u - l).sum()
}

/// Symmetric matrix of lower bandwidth at most 3, stored by diagonals.
struct Banded {
    rows: Vec<[f64; 4]>,
}

impl Banded {
    fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo > 3 {
            0.0
        } else {
            self.rows[lo][hi - lo]
        }
    }

    fn set(&mut self, i: usize, j: usize, x: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        if hi - lo <= 3 {
            self.rows[lo][hi - lo] = x;
        } else {
            debug_assert!(x.abs() < 1e-9, "fill outside the band");
        }
    }

    /// `A ← R A Rᵀ` for the rotation acting on rows `r, r + 1`.
    fn rotate(&mut self, r: usize, c: f64, s: f64) {
        let n = self.rows.len();
        for k in r.saturating_sub(3)..(r + 5).min(n) {
            if k == r || k == r + 1 {
                continue;
            }
            let (x, y) = (self.get(r, k), self.get(r + 1, k));
            self.set(r, k, c * x + s * y);
            self.set(r + 1, k, c * y - s * x);
        }
        let (a, b, d) = (self.get(r, r), self.get(r + 1, r), self.get(r + 1, r + 1));
        self.set(r, r, c * c * a + 2.0 * c * s * b + s * s * d);
        self.set(r + 1, r + 1, s * s * a - 2.0 * c * s * b + c * c * d);
        self.set(r + 1, r, (c * c - s * s) * b + c * s * (d - a));
    }
}

/// The cyclic matrix in the order `0, p−1, 1, p−2, …`, which is pentadiagonal.
fn folded(v: &[f64], corner: f64) -> Banded {
    let p = v.len();
    let order: Vec<usize> = (0..p).map(|k| if k % 2 == 0 { k / 2 } else { p - 1 - k / 2 }).collect();
    let mut pos = vec![0; p];
    for (k, &i) in order.iter().enumerate() {
        pos[i] = k;
    }
    let mut m = Banded { rows: vec![[0.0; 4]; p] };
    for i in 0..p {
        m.set(pos[i], pos[i], v[i]);
        let (j, w) = if i + 1 < p { (i + 1, 1.0) } else { (0, corner) };
        let (a, b) = (pos[i], pos[j]);
        m.set(a, b, m.get(a, b) + w);
    }
    m
}

/// Reduce to tridiagonal form by Givens rotations, chasing each bulge down
/// the band. Returns the diagonal and the subdiagonal.
fn tridiagonalize(mut m: Banded) -> (Vec<f64>, Vec<f64>) {
    let n = m.rows.len();
    for j in 0..n.saturating_sub(2) {
        let (mut col, mut row) = (j, j + 2);
        while row < n {
            let (x, y) = (m.get(row - 1, col), m.get(row, col));
            if y == 0.0 {
                break;
            }
            let h = x.hypot(y);
            m.rotate(row - 1, x / h, y / h);
            m.set(row, col, 0.0);
            col = row - 1;
            row += 2;
        }
    }
    let diag = (0..n).map(|i| m.get(i, i)).collect();
    let off = (0..n).map(|i| if i + 1 < n { m.get(i + 1, i) } else { 0.0 }).collect();
    (diag, off)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `e[i]` couples `i` and `i + 1`; `e[n−1]` is ignored.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, mut e: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    if n == 0 {
        return Ok(d);
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::Numerical(format!("QL iteration did not converge at index {} of {}", l, n)));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Eigenvalues of the periodic (`corner = 1`) or antiperiodic (`corner = −1`)
/// truncation, ascending.
pub fn corner_eigenvalues(v: &[f64], corner: f64) -> Result<Vec<f64>> {
    let p = v.len();
    match p {
        0 => return Err(Error::InvalidArgument("empty potential".into())),
        1 => return Ok(vec![v[0] + 2.0 * corner]),
        2 => {
            let off = 1.0 + corner;
            let mean = 0.5 * (v[0] + v[1]);
            let half = 0.5 * (v[0] - v[1]);
            let r = half.hypot(off);
            return Ok(vec![mean - r, mean + r]);
        }
        _ => {}
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite potential value".into()));
    }
    let (d, e) = tridiagonalize(folded(v, corner));
    let eig = tridiagonal_eigenvalues(d, e)?;
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0;
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0;
    let slack = 1e-8 * (1.0 + lo.abs().max(hi.abs()));
    if eig.iter().any(|&x| !x.is_finite() || x < lo - slack || x > hi + slack) {
        return Err(Error::Numerical(format!("eigenvalue outside the Gershgorin interval [{}, {}] (p = {})", lo, hi, p)));
    }
    Ok(eig)
}

/// Band spectrum of the `|V|`-periodic extension of `V`.
pub fn periodic_spectrum(v: &Potential) -> Result<BandList> {
    let p = v.len();
    if p == 0 {
        return Err(Error::InvalidArgument("empty potential".into()));
    }
    if p == 1 {
        let c = v.samples[0];
        return Ok(BandList { bands: vec![(c - 2.0, c + 2.0)], period: 1 });
    }
    let (per, anti) = rayon::join(|| corner_eigenvalues(&v.samples, 1.0), || corner_eigenvalues(&v.samples, -1.0));
    let mut edges = per?;
    edges.extend(anti?);
    edges.sort_by(f64::total_cmp);
    let mut bands: Vec<(f64, f64)> = Vec::with_capacity(p);
    for pair in edges.chunks_exact(2) {
        let (l, u) = (pair[0], pair[1]);
        match bands.last_mut() {
            Some(last) if l - last.1 <= MERGE_TOLERANCE => last.1 = last.1.max(u),
            _ => bands.push((l, u)),
        }
    }
    Ok(BandList { bands, period: p })
}

/// One level of a [`SpectrumReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub level: usize,
    pub letter: u8,
    pub period: usize,
    pub band_count: usize,
    pub bandwidth: f64,
    #[serde(skip)]
    pub bands: BandList,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub rows: Vec<SpectrumRow>,
    /// Levels skipped because the period exceeded the cap.
    pub skipped: Vec<usize>,
}

impl SpectrumReport {
    pub fn bandwidths(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.bandwidth).collect()
    }

    /// Whether the bandwidth drops at every step between consecutive rows.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].bandwidth < w[0].bandwidth)
    }
}

/// Levels `n ≤ max_level` at which `|w_n(a)|` grows, with `|w_n(a)| ≤ period_cap`.
///
/// Repeated level words give identical approximants, so a trend is only
/// informative across these levels.
pub fn growth_levels(dv: &DirectiveView, letter: Letter, max_level: usize, period_cap: usize) -> Result<Vec<usize>> {
    let tower = level_word_tower(dv, max_level, period_cap)?;
    let mut out = Vec::new();
    let mut last = 0;
    for (n, lw) in tower.iter().enumerate() {
        let Ok(w) = lw.word(letter) else { break };
        if w.len() > last {
            out.push(n);
            last = w.len();
        }
    }
    Ok(out)
}

/// Band spectra of the periodized level-word potentials `f(w_n(a))`.
pub fn zero_measure_trend(
    dv: &DirectiveView,
    f: &SamplingFunction,
    levels: &[usize],
    letter: Letter,
    period_cap: usize,
) -> Result<SpectrumReport> {
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("levels must be strictly increasing".into()));
    }
    let Some(&top) = levels.last() else {
        return Ok(SpectrumReport { rows: Vec::new(), skipped: Vec::new() });
    };
    let tower = level_word_tower(dv, top, period_cap + f.window - 1)?;
    let mut skipped = Vec::new();
    let mut jobs = Vec::new();
    for &n in levels {
        match tower[n].word(letter) {
            Ok(w) if w.len() >= f.window && w.len() - f.window < period_cap => jobs.push((n, w)),
            _ => skipped.push(n),
        }
    }
    let rows = jobs
        .into_par_iter()
        .map(|(level, w)| {
            let v = sample_potential(w, f)?;
            let bands = periodic_spectrum(&v)?;
            Ok(SpectrumRow {
                level,
                letter: letter.index(),
                period: bands.period,
                band_count: bands.len(),
                bandwidth: total_bandwidth(&bands),
                bands,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport { rows, skipped })
}
