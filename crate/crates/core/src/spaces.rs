//! State spaces `(E, ρ)` with ε-nets and covering numbers.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default ternary depth for Cantor-set points.
pub const DEFAULT_CANTOR_DEPTH: u32 = 40;

/// Largest number of net points materialised by [`DistortionSpace::epsilon_net`].
pub const MAX_MATERIALIZED_NET: u128 = 1_000_000;

/// A point of the Cantor set stored as ternary digits in `{0, 2}`.
///
/// Trailing zeros are trimmed, so two equal points always compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CantorPoint {
    digits: Vec<u8>,
}

impl CantorPoint {
    pub fn new(mut digits: Vec<u8>) -> Result<Self> {
        if let Some(d) = digits.iter().find(|&&d| d != 0 && d != 2) {
            return Err(Error::Domain(format!("ternary digit {d} is not 0 or 2")));
        }
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(Self { digits })
    }

    /// Left endpoint of the `index`-th level-`level` Cantor interval.
    pub fn left_endpoint(level: u32, index: u128) -> Self {
        let digits = (0..level)
            .map(|i| if (index >> (level - 1 - i)) & 1 == 1 { 2 } else { 0 })
            .collect();
        Self::new(digits).expect("digits are 0 or 2")
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    pub fn value<T: Scalar>(&self) -> T {
        T::of(ternary_sum(&self.digits, &[]))
    }

    /// `|x − y|`, summed from the first differing digit so that nearby points
    /// do not lose precision to cancellation.
    pub fn distance<T: Scalar>(&self, other: &Self) -> T {
        T::of(ternary_sum(&self.digits, &other.digits).abs())
    }

    /// Index of the level-`level` interval containing this point.
    pub fn interval_index(&self, level: u32) -> u128 {
        (0..level as usize).fold(0u128, |acc, i| {
            (acc << 1) | u128::from(self.digits.get(i).copied().unwrap_or(0) == 2)
        })
    }
}

/// `Σ (a_i − b_i) 3^{-(i+1)}`, starting at the first index where they differ.
fn ternary_sum(a: &[u8], b: &[u8]) -> f64 {
    let n = a.len().max(b.len());
    let digit = |v: &[u8], i: usize| f64::from(v.get(i).copied().unwrap_or(0));
    let first = (0..n).find(|&i| digit(a, i) != digit(b, i));
    let Some(first) = first else { return 0.0 };
    let mut acc = 0.0;
    for i in (first..n).rev() {
        acc = (acc + digit(a, i) - digit(b, i)) / 3.0;
    }
    acc / 3f64.powi(first as i32)
}

/// A point of some [`DistortionSpace`].
#[derive(Clone, Debug, PartialEq)]
pub enum Point<T> {
    /// Index into the alphabet of a finite space.
    Label(usize),
    /// Coordinates in `[0,1]^d` or `R^d`.
    Vector(Vec<T>),
    Cantor(CantorPoint),
}

impl<T: Scalar> Point<T> {
    pub fn scalar(x: T) -> Self {
        Point::Vector(vec![x])
    }

    pub fn as_vector(&self) -> Option<&[T]> {
        match self {
            Point::Vector(v) => Some(v),
            _ => None,
        }
    }
}

impl<T: Scalar> fmt::Display for Point<T> {
    /// Record format used in trace files: labels as integers, vectors as
    /// `:`-separated coordinates, Cantor points as `c` followed by digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Label(l) => write!(f, "{l}"),
            Point::Vector(v) => {
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(":")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            Point::Cantor(c) => {
                f.write_str("c")?;
                for d in c.digits() {
                    write!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceKind<T> {
    /// `q` labelled points with an explicit symmetric distortion matrix.
    FiniteDiscrete { matrix: Vec<Vec<T>>, metric: bool },
    /// `[0,1]^d` with the sup-norm.
    UnitCube { dim: usize },
    /// The middle-thirds Cantor set with `|x − y|`, digits capped at `depth`.
    CantorSet { depth: u32 },
    /// `R^d` with the sup-norm; unbounded.
    RealVector { dim: usize },
}

/// A state space `E` together with its distortion measure `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionSpace<T> {
    kind: SpaceKind<T>,
    diameter: Option<T>,
}

impl<T: Scalar> DistortionSpace<T> {
    /// Finite space from a distortion matrix.
    ///
    /// The matrix must be square, symmetric, zero on the diagonal and
    /// strictly positive off it. The triangle inequality is not required; it
    /// is checked and recorded in [`is_metric`](Self::is_metric).
    pub fn finite_discrete(matrix: Vec<Vec<T>>) -> Result<Self> {
        let q = matrix.len();
        if q == 0 {
            return Err(Error::Domain("empty alphabet".into()));
        }
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != q {
                return Err(Error::Domain(format!("row {i} has length {}, expected {q}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("ρ({i},{j}) is not finite")));
                }
                if i == j && v != T::zero() {
                    return Err(Error::Domain(format!("ρ({i},{i}) = {v} ≠ 0")));
                }
                if i != j && v <= T::zero() {
                    return Err(Error::Domain(format!("ρ({i},{j}) = {v} must be positive")));
                }
                if matrix[j][i] != v {
                    return Err(Error::Domain(format!("ρ is not symmetric at ({i},{j})")));
                }
            }
        }
        let metric = (0..q).all(|i| {
            (0..q).all(|j| (0..q).all(|k| matrix[i][k] <= matrix[i][j] + matrix[j][k]))
        });
        let diameter = matrix
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(T::zero(), T::max);
        Ok(Self { kind: SpaceKind::FiniteDiscrete { matrix, metric }, diameter: Some(diameter) })
    }

    /// `q` points, all pairwise distortions equal to one.
    pub fn uniform_discrete(q: usize) -> Result<Self> {
        let matrix = (0..q)
            .map(|i| (0..q).map(|j| if i == j { T::zero() } else { T::one() }).collect())
            .collect();
        Self::finite_discrete(matrix)
    }

    /// `{0, 1}` with `|·|`.
    pub fn two_point() -> Self {
        Self::uniform_discrete(2).expect("two-point metric is valid")
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("cube dimension must be positive".into()));
        }
        Ok(Self { kind: SpaceKind::UnitCube { dim }, diameter: Some(T::one()) })
    }

    pub fn cantor(depth: u32) -> Result<Self> {
        if depth == 0 || depth > 100 {
            return Err(Error::Domain(format!("Cantor depth {depth} outside 1..=100")));
        }
        Ok(Self { kind: SpaceKind::CantorSet { depth }, diameter: Some(T::one()) })
    }

    pub fn real_vector(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("vector dimension must be positive".into()));
        }
        Ok(Self { kind: SpaceKind::RealVector { dim }, diameter: None })
    }

    pub fn kind(&self) -> &SpaceKind<T> {
        &self.kind
    }

    /// `w = sup ρ(x, y)`, absent for unbounded spaces.
    pub fn diameter(&self) -> Option<T> {
        self.diameter
    }

    /// Whether the triangle inequality holds.
    pub fn is_metric(&self) -> bool {
        match &self.kind {
            SpaceKind::FiniteDiscrete { metric, .. } => *metric,
            _ => true,
        }
    }

    /// Number of labels of a finite space.
    pub fn alphabet_size(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::FiniteDiscrete { matrix, .. } => Some(matrix.len()),
            _ => None,
        }
    }

    /// Dimension of the vector-valued kinds (1 for the Cantor set).
    pub fn dim(&self) -> Option<usize> {
        match &self.kind {
            SpaceKind::UnitCube { dim } | SpaceKind::RealVector { dim } => Some(*dim),
            SpaceKind::CantorSet { .. } => Some(1),
            SpaceKind::FiniteDiscrete { .. } => None,
        }
    }

    /// The upper box dimension γ of the space, as known in closed form.
    pub fn box_dimension(&self) -> Option<f64> {
        match &self.kind {
            SpaceKind::FiniteDiscrete { .. } => Some(0.0),
            SpaceKind::UnitCube { dim } => Some(*dim as f64),
            SpaceKind::CantorSet { .. } => Some(2f64.ln() / 3f64.ln()),
            SpaceKind::RealVector { .. } => None,
        }
    }

    /// Smallest positive off-diagonal distortion of a finite space.
    pub fn min_positive_distortion(&self) -> Option<T> {
        match &self.kind {
            SpaceKind::FiniteDiscrete { matrix, .. } => matrix
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i))
                .map(|(_, &v)| v)
                .reduce(T::min),
            _ => None,
        }
    }

    pub fn contains(&self, x: &Point<T>) -> Result<()> {
        match (&self.kind, x) {
            (SpaceKind::FiniteDiscrete { matrix, .. }, Point::Label(l)) if *l < matrix.len() => Ok(()),
            (SpaceKind::FiniteDiscrete { matrix, .. }, Point::Label(l)) => {
                Err(Error::Domain(format!("label {l} not in alphabet of size {}", matrix.len())))
            }
            (SpaceKind::UnitCube { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::Domain(format!("point has dimension {}, expected {dim}", v.len())));
                }
                if v.iter().any(|c| !(*c >= T::zero() && *c <= T::one())) {
                    return Err(Error::Domain("point lies outside the unit cube".into()));
                }
                Ok(())
            }
            (SpaceKind::RealVector { dim }, Point::Vector(v)) => {
                if v.len() != *dim {
                    return Err(Error::Domain(format!("point has dimension {}, expected {dim}", v.len())));
                }
                if v.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Domain("point has non-finite coordinates".into()));
                }
                Ok(())
            }
            (SpaceKind::CantorSet { depth }, Point::Cantor(c)) => {
                if c.depth() > *depth as usize {
                    return Err(Error::Domain(format!("Cantor point deeper than {depth} digits")));
                }
                Ok(())
            }
            (kind, p) => Err(Error::Domain(format!("point {p:?} does not belong to {kind:?}"))),
        }
    }

    /// `ρ(x, y)`.
    pub fn distortion(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        self.contains(x)?;
        self.contains(y)?;
        Ok(self.distortion_unchecked(x, y))
    }

    /// `ρ(x, y)` for points already known to lie in the space.
    pub(crate) fn distortion_unchecked(&self, x: &Point<T>, y: &Point<T>) -> T {
        match (&self.kind, x, y) {
            (SpaceKind::FiniteDiscrete { matrix, .. }, Point::Label(a), Point::Label(b)) => matrix[*a][*b],
            (_, Point::Vector(a), Point::Vector(b)) => sup_distance(a, b),
            (_, Point::Cantor(a), Point::Cantor(b)) => a.distance(b),
            _ => unreachable!("points were validated against the space"),
        }
    }

    /// An ε-net of the space; see [`EpsNet`] for the construction per kind.
    pub fn net(&self, eps: f64) -> Result<EpsNet<T>> {
        EpsNet::new(self, eps)
    }

    /// The ε-net as an explicit list of points.
    pub fn epsilon_net(&self, eps: f64) -> Result<Vec<Point<T>>> {
        let net = self.net(eps)?;
        if net.size() > MAX_MATERIALIZED_NET {
            return Err(Error::Unsupported(format!(
                "net of {} points is too large to materialise",
                net.size()
            )));
        }
        Ok((0..net.size()).map(|i| net.point(i)).collect())
    }

    /// Size of the constructed ε-net, an upper bound on `N(E, ρ, ε)`.
    pub fn covering_number(&self, eps: f64) -> Result<u128> {
        Ok(self.net(eps)?.size())
    }

    /// `log N(E, ρ, ε)` for the constructed net, without overflow.
    pub fn log_covering_number(&self, eps: f64) -> Result<f64> {
        Ok(self.net(eps)?.log_size())
    }

    /// A uniformly distributed point: uniform label, uniform cube point, or
    /// the Cantor (coin-flip digit) measure.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Point<T>> {
        match &self.kind {
            SpaceKind::FiniteDiscrete { matrix, .. } => Ok(Point::Label(rng.random_range(0..matrix.len()))),
            SpaceKind::UnitCube { dim } => {
                Ok(Point::Vector((0..*dim).map(|_| T::of(rng.random::<f64>())).collect()))
            }
            SpaceKind::CantorSet { depth } => {
                let digits = (0..*depth).map(|_| if rng.random::<bool>() { 2 } else { 0 }).collect();
                Ok(Point::Cantor(CantorPoint::new(digits)?))
            }
            SpaceKind::RealVector { .. } => {
                Err(Error::Unsupported("no uniform law on an unbounded space".into()))
            }
        }
    }
}

pub(crate) fn sup_distance<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max)
}

#[derive(Clone, Debug, PartialEq)]
enum NetGrid {
    /// Selected labels of a finite space, in increasing order.
    Labels(Vec<usize>),
    /// Centred grid with `per_axis` points along each of `dim` axes.
    Cube { dim: usize, per_axis: u64 },
    /// Left endpoints of the `2^level` level-`level` Cantor intervals.
    Cantor { level: u32 },
}

/// An implicit ε-net: indexable, with nearest-point search.
///
/// * unit cube: the centred grid `(2j+1)/(2n)` with `n = ⌈1/(2ε)⌉` points
///   per axis;
/// * finite space: the full alphabet when ε is below the smallest positive
///   distortion, a greedy cover otherwise;
/// * Cantor set: left endpoints of the level-`⌈log₃(1/ε)⌉` intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsNet<T> {
    space: DistortionSpace<T>,
    eps: f64,
    grid: NetGrid,
    size: u128,
}

impl<T: Scalar> EpsNet<T> {
    fn new(space: &DistortionSpace<T>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("net radius must be positive, got {eps}")));
        }
        let grid = match &space.kind {
            SpaceKind::FiniteDiscrete { matrix, .. } => NetGrid::Labels(greedy_cover(matrix, T::of(eps))),
            SpaceKind::UnitCube { dim } => {
                // The relative guard keeps exact ratios such as 1/(2·0.1) = 5 from rounding up.
                let n = (0.5 / eps * (1.0 - 1e-12)).ceil().max(1.0);
                if n > u64::MAX as f64 {
                    return Err(Error::Precision(format!("grid for ε = {eps} is too fine")));
                }
                NetGrid::Cube { dim: *dim, per_axis: n as u64 }
            }
            SpaceKind::CantorSet { depth } => {
                let level = ((1.0 / eps).ln() / 3f64.ln() * (1.0 - 1e-12)).ceil().max(0.0) as u32;
                if level > *depth || level > 120 {
                    return Err(Error::Precision(format!(
                        "ε = {eps} needs Cantor level {level}, beyond depth {depth}"
                    )));
                }
                NetGrid::Cantor { level }
            }
            SpaceKind::RealVector { .. } => {
                return Err(Error::Unsupported(
                    "unbounded space has no finite ε-net; code increments instead".into(),
                ))
            }
        };
        let size = match &grid {
            NetGrid::Labels(l) => l.len() as u128,
            NetGrid::Cube { dim, per_axis } => (0..*dim)
                .try_fold(1u128, |acc, _| acc.checked_mul(u128::from(*per_axis)))
                .ok_or_else(|| Error::Precision(format!("net for ε = {eps} has more than 2^128 points")))?,
            NetGrid::Cantor { level } => 1u128 << level,
        };
        Ok(Self { space: space.clone(), eps, grid, size })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn size(&self) -> u128 {
        self.size
    }

    pub fn log_size(&self) -> f64 {
        match &self.grid {
            NetGrid::Labels(l) => (l.len() as f64).ln(),
            NetGrid::Cube { dim, per_axis } => *dim as f64 * (*per_axis as f64).ln(),
            NetGrid::Cantor { level } => f64::from(*level) * 2f64.ln(),
        }
    }

    /// Points per axis of a cube grid.
    pub fn per_axis(&self) -> Option<u64> {
        match &self.grid {
            NetGrid::Cube { per_axis, .. } => Some(*per_axis),
            _ => None,
        }
    }

    pub fn space(&self) -> &DistortionSpace<T> {
        &self.space
    }

    /// The `index`-th net point. Panics if `index >= size()`.
    pub fn point(&self, index: u128) -> Point<T> {
        assert!(index < self.size, "net index {index} out of range {}", self.size);
        match &self.grid {
            NetGrid::Labels(l) => Point::Label(l[index as usize]),
            NetGrid::Cube { dim, per_axis } => {
                let n = u128::from(*per_axis);
                let mut coords = vec![T::zero(); *dim];
                let mut rest = index;
                for c in coords.iter_mut().rev() {
                    let j = (rest % n) as f64;
                    rest /= n;
                    *c = T::of((2.0 * j + 1.0) / (2.0 * n as f64));
                }
                Point::Vector(coords)
            }
            NetGrid::Cantor { level } => Point::Cantor(CantorPoint::left_endpoint(*level, index)),
        }
    }

    /// Nearest net point to `x` (lowest index on ties) and its distortion.
    pub fn nearest(&self, x: &Point<T>) -> Result<(u128, T)> {
        self.space.contains(x)?;
        let index = match (&self.grid, x) {
            (NetGrid::Labels(labels), _) => {
                let mut best = (0usize, T::infinity());
                for (i, &l) in labels.iter().enumerate() {
                    let d = self.space.distortion_unchecked(x, &Point::Label(l));
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                best.0 as u128
            }
            (NetGrid::Cube { per_axis, .. }, Point::Vector(v)) => {
                let n = *per_axis;
                v.iter().fold(0u128, |acc, c| {
                    let j = (c.f64() * n as f64).floor().clamp(0.0, (n - 1) as f64) as u128;
                    acc * u128::from(n) + j
                })
            }
            (NetGrid::Cantor { level }, Point::Cantor(c)) => c.interval_index(*level),
            _ => unreachable!("point was validated against the space"),
        };
        let d = self.space.distortion_unchecked(x, &self.point(index));
        Ok((index, d))
    }
}

/// Full alphabet if ε is below every positive distortion; otherwise
/// repeatedly pick the label covering the most uncovered labels.
fn greedy_cover<T: Scalar>(matrix: &[Vec<T>], eps: T) -> Vec<usize> {
    let q = matrix.len();
    let mut covered = vec![false; q];
    let mut chosen = Vec::new();
    while covered.iter().any(|c| !c) {
        let gain = |i: usize| (0..q).filter(|&j| !covered[j] && matrix[i][j] <= eps).count();
        // max_by_key keeps the last maximum; iterate in reverse for the lowest label.
        let best = (0..q).rev().max_by_key(|&i| gain(i)).expect("alphabet is non-empty");
        for j in 0..q {
            if matrix[best][j] <= eps {
                covered[j] = true;
            }
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    chosen
}
