//! The Cassaigne–Selmer (`d = 3`) and Brun (`d = 4`) continued fraction maps.
//!
//! Both are piecewise projective: on each branch region the map is
//! `x ↦ A⁻¹x / ‖A⁻¹x‖₁` for a unimodular nonnegative matrix `A`, which is the
//! substitution matrix of the branch's substitution. Points are generic over
//! [`Coord`] so the same code runs in exact rational and in float mode.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::SubstitutionMatrix;
use crate::substitution::Substitution;

/// Float-mode distance below which two coordinates count as tied.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-9;

/// Scalar type of simplex coordinates.
pub trait Coord: Clone + PartialOrd + fmt::Debug + Send + Sync + num_traits::Num {
    const EXACT: bool;

    /// Whether `a` and `b` sit on a branch boundary relative to each other.
    fn ties(a: &Self, b: &Self) -> bool;

    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    /// `p/q` for rationals, 17 significant digits for floats.
    fn render(&self) -> String;

    fn floor(&self) -> Self;

    /// Rescales so the coordinates sum to exactly one (no-op when exact).
    fn renormalize(_xs: &mut [Self]) {}
}

impl Coord for BigRational {
    const EXACT: bool = true;

    fn ties(a: &Self, b: &Self) -> bool {
        a == b
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn render(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }

    fn floor(&self) -> Self {
        BigRational::floor(self)
    }
}

impl Coord for f64 {
    const EXACT: bool = false;

    fn ties(a: &Self, b: &Self) -> bool {
        (a - b).abs() < FLOAT_TIE_TOLERANCE
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn render(&self) -> String {
        format_f64(*self)
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn renormalize(xs: &mut [Self]) {
        let s: f64 = xs.iter().sum();
        if s > 0.0 {
            for x in xs {
                *x /= s;
            }
        }
    }
}

/// Renders a float with 17 significant digits, enough to round-trip.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{:.16e}", x)
}

/// Parses `p/q`, an integer, or a decimal such as `0.25`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse {:?} as a rational", s));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(num, den);
        return Ok(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// A point of the standard simplex `Δ_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexPoint<T> {
    coords: Vec<T>,
}

impl<T: Coord> SimplexPoint<T> {
    /// Validates nonnegativity and unit sum (exactly, or within 1e-12 for floats).
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidArgument("simplex points need at least two coordinates".into()));
        }
        if coords.iter().any(|c| *c < T::zero()) {
            return Err(Error::InvalidArgument(format!("negative coordinate in {:?}", coords)));
        }
        let sum = coords.iter().fold(T::zero(), |acc, c| acc + c.clone());
        let ok = if T::EXACT { sum == T::one() } else { (sum.to_f64() - 1.0).abs() <= 1e-12 };
        if !ok {
            return Err(Error::InvalidArgument(format!("coordinates of {:?} do not sum to 1", coords)));
        }
        Ok(SimplexPoint { coords })
    }

    /// Scales a nonnegative, nonzero vector onto the simplex.
    pub fn normalized(mut coords: Vec<T>) -> Result<Self> {
        let sum = coords.iter().fold(T::zero(), |acc, c| acc + c.clone());
        if !(sum > T::zero()) {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        for c in coords.iter_mut() {
            *c = c.clone() / sum.clone();
        }
        T::renormalize(&mut coords);
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn to_f64(&self) -> SimplexPoint<f64> {
        let mut coords: Vec<f64> = self.coords.iter().map(Coord::to_f64).collect();
        f64::renormalize(&mut coords);
        SimplexPoint { coords }
    }

    pub fn render(&self) -> Vec<String> {
        self.coords.iter().map(Coord::render).collect()
    }
}

impl SimplexPoint<BigRational> {
    /// Parses `"p/q,p/q,…"`.
    pub fn parse(s: &str) -> Result<Self> {
        let coords = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

/// A branch symbol: `1 | 2` for Cassaigne–Selmer, a pair `(i, j)` for Brun.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Cs(u8),
    Brun(u8, u8),
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Cs(b) => write!(f, "{}", b),
            Branch::Brun(i, j) => write!(f, "{}{}", i, j),
        }
    }
}

/// The built-in continued fraction algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    CassaigneSelmer,
    Brun,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cs" | "cassaigne-selmer" => Ok(Algorithm::CassaigneSelmer),
            "brun" => Ok(Algorithm::Brun),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm {:?}", s))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::CassaigneSelmer => "cs",
            Algorithm::Brun => "brun",
        })
    }
}

/// A piecewise-projective map of the simplex given by its branch regions and
/// branch matrices.
///
/// The built-in algorithms implement it; other maps can plug into
/// [`cylinder_cell`] and [`cell_contains`] through it.
pub trait PiecewiseProjective {
    fn dimension(&self) -> usize;

    /// Every branch symbol of the map.
    fn branches(&self) -> Vec<Branch>;

    /// Branch matrix `A`; the map acts on that branch as `x ↦ A⁻¹x / ‖A⁻¹x‖₁`.
    fn branch_matrix(&self, branch: Branch) -> Result<SubstitutionMatrix>;

    /// Whether `x` (any positive scaling) lies in the closed region of `branch`.
    fn in_region(&self, branch: Branch, x: &[BigRational]) -> bool;

    /// Whether the region of `branch` is the whole cone `A·ℝ₊^d`, so that one
    /// nonnegativity test on `M⁻¹x` decides cylinder membership.
    fn full_branches(&self) -> bool;
}

impl PiecewiseProjective for Algorithm {
    fn dimension(&self) -> usize {
        match self {
            Algorithm::CassaigneSelmer => 3,
            Algorithm::Brun => 4,
        }
    }

    fn branches(&self) -> Vec<Branch> {
        match self {
            Algorithm::CassaigneSelmer => vec![Branch::Cs(1), Branch::Cs(2)],
            Algorithm::Brun => (1..=4u8)
                .flat_map(|i| (1..=4u8).map(move |j| (i, j)))
                .filter(|(i, j)| i != j)
                .map(|(i, j)| Branch::Brun(i, j))
                .collect(),
        }
    }

    fn branch_matrix(&self, branch: Branch) -> Result<SubstitutionMatrix> {
        Ok(self.substitution(branch)?.matrix())
    }

    fn in_region(&self, branch: Branch, x: &[BigRational]) -> bool {
        match branch {
            Branch::Cs(1) => x[0] >= x[2],
            Branch::Cs(_) => x[2] >= x[0],
            Branch::Brun(i, j) => {
                let (i, j) = (i as usize - 1, j as usize - 1);
                x[i] >= x[j] && (0..x.len()).filter(|&k| k != i && k != j).all(|k| x[j] >= x[k])
            }
        }
    }

    fn full_branches(&self) -> bool {
        matches!(self, Algorithm::CassaigneSelmer)
    }
}

impl Algorithm {
    /// Substitution selected on a branch.
    pub fn substitution(&self, branch: Branch) -> Result<Substitution> {
        match (self, branch) {
            (Algorithm::CassaigneSelmer, Branch::Cs(1)) => Ok(Substitution::gamma1()),
            (Algorithm::CassaigneSelmer, Branch::Cs(2)) => Ok(Substitution::gamma2()),
            (Algorithm::Brun, Branch::Brun(i, j)) => Substitution::brun(i, j, 4),
            _ => Err(Error::InvalidArgument(format!("branch {} does not belong to {}", branch, self))),
        }
    }

    /// Branch chosen at `x`, with the deterministic tie-breaking rules.
    pub fn select<T: Coord>(&self, x: &SimplexPoint<T>) -> Branch {
        let c = x.coords();
        match self {
            Algorithm::CassaigneSelmer => {
                if c[0] >= c[2] {
                    Branch::Cs(1)
                } else {
                    Branch::Cs(2)
                }
            }
            Algorithm::Brun => {
                let (i, j) = brun_pair(c);
                Branch::Brun(i as u8 + 1, j as u8 + 1)
            }
        }
    }

    /// Whether `x` lies on the boundary of the simplex or of a branch region.
    pub fn on_boundary<T: Coord>(&self, x: &SimplexPoint<T>) -> bool {
        let c = x.coords();
        if c.iter().any(|v| v.is_zero()) {
            return true;
        }
        match self {
            Algorithm::CassaigneSelmer => T::ties(&c[0], &c[2]),
            Algorithm::Brun => {
                let (i, j) = brun_pair(c);
                T::ties(&c[i], &c[j]) || (0..c.len()).any(|k| k != i && k != j && T::ties(&c[j], &c[k]))
            }
        }
    }

    /// One step of the map.
    pub fn step<T: Coord>(&self, x: &SimplexPoint<T>) -> Result<Step<T>> {
        match self {
            Algorithm::CassaigneSelmer => cs_step(x),
            Algorithm::Brun => brun_step(x),
        }
    }

    /// Parses a branch word: `"1211…"` (or comma separated) for
    /// Cassaigne–Selmer, `"12,23,34"` for Brun.
    pub fn parse_branches(&self, s: &str) -> Result<Vec<Branch>> {
        let bad = |t: &str| Error::InvalidArgument(format!("bad branch symbol {:?} for {}", t, self));
        match self {
            Algorithm::CassaigneSelmer => s
                .chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| match c {
                    '1' => Ok(Branch::Cs(1)),
                    '2' => Ok(Branch::Cs(2)),
                    _ => Err(bad(&c.to_string())),
                })
                .collect(),
            Algorithm::Brun => s
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    let b = t.as_bytes();
                    if b.len() != 2 {
                        return Err(bad(t));
                    }
                    let (i, j) = (b[0].wrapping_sub(b'0'), b[1].wrapping_sub(b'0'));
                    if !(1..=4).contains(&i) || !(1..=4).contains(&j) || i == j {
                        return Err(bad(t));
                    }
                    Ok(Branch::Brun(i, j))
                })
                .collect(),
        }
    }
}

/// Largest coordinate `i`, then the largest remaining `j`, first index on ties.
fn brun_pair<T: PartialOrd>(c: &[T]) -> (usize, usize) {
    let argmax = |skip: Option<usize>| {
        let mut best: Option<usize> = None;
        for k in 0..c.len() {
            if Some(k) == skip {
                continue;
            }
            if best.is_none_or(|b| c[k] > c[b]) {
                best = Some(k);
            }
        }
        best.expect("at least two coordinates")
    };
    let i = argmax(None);
    (i, argmax(Some(i)))
}

/// Result of one map step.
#[derive(Clone, Debug)]
pub struct Step<T> {
    pub point: SimplexPoint<T>,
    pub branch: Branch,
    pub substitution: Substitution,
}

fn boundary_error(reason: impl Into<String>) -> Error {
    Error::BoundaryOrbit { step: 0, reason: reason.into() }
}

/// Cassaigne–Selmer step; branch 1 (`γ₁`) iff `x₁ ≥ x₃`.
pub fn cs_step<T: Coord>(x: &SimplexPoint<T>) -> Result<Step<T>> {
    if x.dim() != 3 {
        return Err(Error::InvalidArgument(format!("Cassaigne–Selmer needs d = 3, got {}", x.dim())));
    }
    let c = x.coords();
    let (x1, x2, x3) = (c[0].clone(), c[1].clone(), c[2].clone());
    let (coords, branch) = if x1 >= x3 {
        let s = x1.clone() + x2.clone();
        if s.is_zero() {
            return Err(boundary_error("x1 + x2 = 0"));
        }
        (vec![(x1 - x3.clone()) / s.clone(), x3 / s.clone(), x2 / s], 1)
    } else {
        let s = x2.clone() + x3.clone();
        if s.is_zero() {
            return Err(boundary_error("x2 + x3 = 0"));
        }
        (vec![x2 / s.clone(), x1.clone() / s.clone(), (x3 - x1) / s], 2)
    };
    finish_step(coords, Branch::Cs(branch), Algorithm::CassaigneSelmer)
}

/// Brun step: subtract the second largest coordinate `x_j` from the largest `x_i`.
pub fn brun_step<T: Coord>(x: &SimplexPoint<T>) -> Result<Step<T>> {
    if x.dim() != 4 {
        return Err(Error::InvalidArgument(format!("Brun needs d = 4, got {}", x.dim())));
    }
    let c = x.coords();
    let (i, j) = brun_pair(c);
    let denom = T::one() - c[j].clone();
    if denom.is_zero() {
        return Err(boundary_error("x_j = 1"));
    }
    let coords = (0..4)
        .map(|k| {
            if k == i {
                (c[i].clone() - c[j].clone()) / denom.clone()
            } else {
                c[k].clone() / denom.clone()
            }
        })
        .collect();
    finish_step(coords, Branch::Brun(i as u8 + 1, j as u8 + 1), Algorithm::Brun)
}

fn finish_step<T: Coord>(mut coords: Vec<T>, branch: Branch, alg: Algorithm) -> Result<Step<T>> {
    T::renormalize(&mut coords);
    if coords.iter().any(|v| *v < T::zero()) {
        // only reachable from float rounding right at a boundary
        for v in coords.iter_mut() {
            if *v < T::zero() {
                *v = T::zero();
            }
        }
        T::renormalize(&mut coords);
    }
    let point = SimplexPoint::new(coords)?;
    Ok(Step { point, branch, substitution: alg.substitution(branch)? })
}

/// A finite piece of the orbit of `x` and the directive sequence it selects.
#[derive(Clone, Debug)]
pub struct Itinerary<T> {
    pub algorithm: Algorithm,
    /// `points[n] = Tⁿx`; one more entry than `branches`.
    pub points: Vec<SimplexPoint<T>>,
    pub branches: Vec<Branch>,
    pub substitutions: Vec<Substitution>,
    /// First index `n` with `Tⁿx` on a simplex face or branch boundary.
    pub boundary_at: Option<usize>,
    /// Set when a step could not be computed; holds the failing index.
    pub terminated_early: Option<usize>,
}

impl<T> Itinerary<T> {
    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.boundary_at.is_some() || self.terminated_early.is_some()
    }
}

/// First `n` terms of the substitutive realization of `x`.
///
/// Boundary points do not stop the orbit (steps stay well defined on the
/// closed simplex) but are recorded in `boundary_at`.
pub fn directive_sequence<T: Coord>(x: &SimplexPoint<T>, n: usize, algorithm: Algorithm) -> Result<Itinerary<T>> {
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    if x.dim() != algorithm.dimension() {
        return Err(Error::InvalidArgument(format!(
            "{} works on d = {}, got a point with d = {}",
            algorithm,
            algorithm.dimension(),
            x.dim()
        )));
    }
    let mut it = Itinerary {
        algorithm,
        points: vec![x.clone()],
        branches: Vec::with_capacity(n),
        substitutions: Vec::with_capacity(n),
        boundary_at: None,
        terminated_early: None,
    };
    let mut cur = x.clone();
    for k in 0..n {
        if it.boundary_at.is_none() && algorithm.on_boundary(&cur) {
            it.boundary_at = Some(k);
        }
        match algorithm.step(&cur) {
            Ok(step) => {
                it.branches.push(step.branch);
                it.substitutions.push(step.substitution);
                it.points.push(step.point.clone());
                cur = step.point;
            }
            Err(Error::BoundaryOrbit { .. }) => {
                it.terminated_early = Some(k);
                it.boundary_at.get_or_insert(k);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    if it.terminated_early.is_none() && it.boundary_at.is_none() && algorithm.on_boundary(&cur) {
        it.boundary_at = Some(it.branches.len());
    }
    Ok(it)
}

/// A point of the torus `𝕋^{d−1}`, given by a representative in `[0,1)^{d−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint<T> {
    pub coords: Vec<T>,
}

/// Drops the last coordinate.
pub fn project<T: Coord>(x: &SimplexPoint<T>) -> TorusPoint<T> {
    TorusPoint { coords: x.coords()[..x.dim() - 1].to_vec() }
}

/// Inverse of [`project`] on the fundamental domain `t₁ + ⋯ + t_{d−1} ≤ 1`.
pub fn lift<T: Coord>(alpha: &TorusPoint<T>) -> Result<SimplexPoint<T>> {
    let sum = alpha.coords.iter().fold(T::zero(), |acc, c| acc + c.clone());
    let over = if T::EXACT { sum > T::one() } else { sum.to_f64() > 1.0 + 1e-12 };
    if over || alpha.coords.iter().any(|c| *c < T::zero()) {
        return Err(Error::OutOfFundamentalDomain(format!("{:?}", alpha.coords)));
    }
    let mut coords = alpha.coords.clone();
    let last = T::one() - sum;
    coords.push(if last < T::zero() { T::zero() } else { last });
    SimplexPoint::new(coords)
}

/// Output of [`normalize_to_fundamental`].
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized<T> {
    pub point: TorusPoint<T>,
    /// Either the identity or its negative.
    pub matrix: [[i64; 2]; 2],
    /// Coordinate sum exactly 1, where `α` and `−α` both qualify.
    pub boundary: bool,
}

/// Moves `α ∈ 𝕋²` into `𝕋²_Δ` using `α ↦ −α` when needed.
pub fn normalize_to_fundamental<T: Coord>(alpha: &TorusPoint<T>) -> Result<Normalized<T>> {
    if alpha.coords.len() != 2 {
        return Err(Error::InvalidArgument("normalization is defined on the 2-torus".into()));
    }
    let frac = |v: &T| v.clone() - v.floor();
    let rep: Vec<T> = alpha.coords.iter().map(frac).collect();
    let sum = rep[0].clone() + rep[1].clone();
    if sum <= T::one() {
        return Ok(Normalized {
            boundary: sum == T::one(),
            point: TorusPoint { coords: rep },
            matrix: [[1, 0], [0, 1]],
        });
    }
    let neg: Vec<T> = rep.iter().map(|v| frac(&(T::zero() - v.clone()))).collect();
    Ok(Normalized { point: TorusPoint { coords: neg }, matrix: [[-1, 0], [0, -1]], boundary: false })
}

/// The projective image of the simplex under a product of branch matrices.
#[derive(Clone, Debug)]
pub struct ProjectiveCell {
    pub algorithm: Algorithm,
    pub branches: Vec<Branch>,
    pub matrix_product: SubstitutionMatrix,
    /// Normalized columns of `matrix_product`.
    pub vertex_images: Vec<SimplexPoint<BigRational>>,
}

/// Cylinder cell of a branch word, `C_{i₀} ⋯ C_{i_k}(Δ)`.
pub fn cylinder_cell(branches: &[Branch], algorithm: Algorithm) -> Result<ProjectiveCell> {
    let (first, rest) =
        branches.split_first().ok_or_else(|| Error::InvalidArgument("empty branch word".into()))?;
    let mut m = algorithm.branch_matrix(*first)?;
    for b in rest {
        m = m.mul(&algorithm.branch_matrix(*b)?)?;
    }
    let vertex_images = (0..m.dim())
        .map(|c| {
            let col = (0..m.dim()).map(|r| BigRational::from_integer(BigInt::from(m.get(r, c).clone()))).collect();
            SimplexPoint::normalized(col)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectiveCell { algorithm, branches: branches.to_vec(), matrix_product: m, vertex_images })
}

/// Cell membership with weak inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Outside,
    Interior,
    /// Inside, with at least one defining inequality tight.
    Boundary,
}

impl Membership {
    pub fn contains(self) -> bool {
        !matches!(self, Membership::Outside)
    }
}

/// Exact solve of `M y = x` by Gaussian elimination over the rationals.
pub fn solve_exact(m: &SubstitutionMatrix, x: &[BigRational]) -> Result<Vec<BigRational>> {
    let d = m.dim();
    if x.len() != d {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let mut a: Vec<Vec<BigRational>> = (0..d)
        .map(|r| {
            let mut row: Vec<BigRational> =
                (0..d).map(|c| BigRational::from_integer(BigInt::from(m.get(r, c).clone()))).collect();
            row.push(x[r].clone());
            row
        })
        .collect();
    for col in 0..d {
        let pivot = (col..d)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Numerical("singular matrix in cell membership".into()))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..d {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=d {
                    let delta = &f * &a[col][c];
                    a[r][c] = &a[r][c] - delta;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[d].clone()).collect())
}

/// Whether `x` lies in the closed cylinder cell.
///
/// For maps whose branch regions are full cones (Cassaigne–Selmer) this is a
/// single exact solve of `M y = x` and a sign check of `y`. Otherwise the
/// region of every branch is also checked along the pulled-back points.
pub fn cell_contains(cell: &ProjectiveCell, x: &SimplexPoint<BigRational>) -> Result<Membership> {
    if x.dim() != cell.matrix_product.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    let mut tight = false;
    if !cell.algorithm.full_branches() {
        let mut z = x.coords().to_vec();
        for b in &cell.branches {
            if !cell.algorithm.in_region(*b, &z) {
                return Ok(Membership::Outside);
            }
            if region_is_tight(cell.algorithm, *b, &z) {
                tight = true;
            }
            z = solve_exact(&cell.algorithm.branch_matrix(*b)?, &z)?;
        }
    }
    let y = solve_exact(&cell.matrix_product, x.coords())?;
    if y.iter().any(|v| v.is_negative()) {
        return Ok(Membership::Outside);
    }
    if tight || y.iter().any(|v| v.is_zero()) {
        return Ok(Membership::Boundary);
    }
    Ok(Membership::Interior)
}

fn region_is_tight(alg: Algorithm, b: Branch, z: &[BigRational]) -> bool {
    match b {
        Branch::Brun(i, j) => {
            let (i, j) = (i as usize - 1, j as usize - 1);
            z[i] == z[j] || (0..z.len()).any(|k| k != i && k != j && z[j] == z[k])
        }
        Branch::Cs(_) => alg.on_boundary(&SimplexPoint { coords: z.to_vec() }),
    }
}

/// Uniform random rational interior point with coordinates of denominator `2^bits`.
pub fn random_rational_point<R: rand::Rng>(rng: &mut R, d: usize, bits: u32) -> SimplexPoint<BigRational> {
    // sorted uniform cut points give a uniform point of the simplex
    let scale = BigUint::one() << bits;
    loop {
        let mut cuts: Vec<BigUint> = (0..d - 1)
            .map(|_| {
                let words = (bits as usize).div_ceil(32);
                let digits: Vec<u32> = (0..words).map(|_| rng.gen()).collect();
                BigUint::new(digits) % &scale
            })
            .collect();
        cuts.push(BigUint::zero());
        cuts.push(scale.clone());
        cuts.sort();
        let parts: Vec<BigUint> = cuts.windows(2).map(|w| &w[1] - &w[0]).collect();
        if parts.iter().any(|p| p.is_zero()) {
            continue;
        }
        let coords = parts
            .into_iter()
            .map(|p| BigRational::new(BigInt::from(p), BigInt::from(scale.clone())))
            .collect();
        return SimplexPoint::new(coords).expect("parts sum to the scale");
    }
}
