//! Product codebooks for the values a path visits, and nets for compound
//! Poisson increments.

use num_bigint::BigUint;

use super::bigmath::{from_digits, pow_u128, to_digits};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::IncrementLaw;
use crate::spaces::{sup_distance, CantorPoint, DistortionSpace, EpsNet, Point};

/// `count` coordinates, each quantized to the same ε-net.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueCodebook<T> {
    net: EpsNet<T>,
    count: usize,
}

pub fn product_value_codebook<T: Scalar>(space: &DistortionSpace<T>, eps: f64, count: usize) -> Result<ValueCodebook<T>> {
    if count == 0 {
        return Err(Error::Domain("value codebook needs at least one coordinate".into()));
    }
    Ok(ValueCodebook { net: space.net(eps)?, count })
}

impl<T: Scalar> ValueCodebook<T> {
    pub fn net(&self) -> &EpsNet<T> {
        &self.net
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn eps(&self) -> f64 {
        self.net.eps()
    }

    pub fn size(&self) -> BigUint {
        pow_u128(self.net.size(), self.count)
    }

    pub fn log_size(&self) -> f64 {
        self.count as f64 * self.net.log_size()
    }

    /// Per-coordinate nearest net indices and the largest coordinate error.
    pub fn nearest_digits(&self, values: &[Point<T>]) -> Result<(Vec<u128>, T)> {
        if values.len() != self.count {
            return Err(Error::Domain(format!("expected {} values, got {}", self.count, values.len())));
        }
        let mut worst = T::zero();
        let mut digits = Vec::with_capacity(self.count);
        for v in values {
            let (i, d) = self.net.nearest(v)?;
            digits.push(i);
            worst = worst.max(d);
        }
        Ok((digits, worst))
    }

    pub fn nearest(&self, values: &[Point<T>]) -> Result<(BigUint, T)> {
        let (digits, worst) = self.nearest_digits(values)?;
        Ok((self.rank(&digits), worst))
    }

    pub fn rank(&self, digits: &[u128]) -> BigUint {
        from_digits(digits, self.net.size())
    }

    pub fn unrank(&self, index: &BigUint) -> Vec<u128> {
        to_digits(index, self.net.size(), self.count)
    }

    pub fn points(&self, digits: &[u128]) -> Vec<Point<T>> {
        digits.iter().map(|&d| self.net.point(d)).collect()
    }

    pub fn decode(&self, index: &BigUint) -> Vec<Point<T>> {
        self.points(&self.unrank(index))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum IncrementGrid<T> {
    /// Centred grid on `[0,1]^dim`.
    Cube { dim: usize, per_axis: u64 },
    /// Left endpoints of the level-`level` Cantor intervals.
    Cantor { level: u32 },
    /// Explicit points.
    Points(Vec<Vec<T>>),
}

/// An ε-net of the support of an increment law, acting on real vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementNet<T> {
    eps: f64,
    grid: IncrementGrid<T>,
}

impl<T: Scalar> IncrementNet<T> {
    pub fn for_law(law: &IncrementLaw<T>, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("net radius must be positive, got {eps}")));
        }
        let grid = match law {
            IncrementLaw::UniformCube { dim } => {
                let space = DistortionSpace::<T>::unit_cube(*dim)?;
                let per_axis = space.net(eps)?.per_axis().expect("cube net");
                IncrementGrid::Cube { dim: *dim, per_axis }
            }
            IncrementLaw::CantorUniform { depth } => {
                let level = ((1.0 / eps).ln() / 3f64.ln() * (1.0 - 1e-12)).ceil().max(0.0) as u32;
                if level > *depth {
                    return Err(Error::Precision(format!("ε = {eps} is finer than Cantor depth {depth}")));
                }
                IncrementGrid::Cantor { level }
            }
            IncrementLaw::PointMass(z) => IncrementGrid::Points(vec![z.clone()]),
            IncrementLaw::Finite { points, probs } => {
                let support: Vec<Vec<T>> =
                    points.iter().zip(probs).filter(|(_, &p)| p > 0.0).map(|(z, _)| z.clone()).collect();
                IncrementGrid::Points(greedy_points(&support, T::of(eps)))
            }
        };
        Ok(Self { eps, grid })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn size(&self) -> u128 {
        match &self.grid {
            IncrementGrid::Cube { dim, per_axis } => u128::from(*per_axis).pow(*dim as u32),
            IncrementGrid::Cantor { level } => 1u128 << level,
            IncrementGrid::Points(p) => p.len() as u128,
        }
    }

    pub fn log_size(&self) -> f64 {
        match &self.grid {
            IncrementGrid::Cube { dim, per_axis } => *dim as f64 * (*per_axis as f64).ln(),
            IncrementGrid::Cantor { level } => f64::from(*level) * std::f64::consts::LN_2,
            IncrementGrid::Points(p) => (p.len() as f64).ln(),
        }
    }

    pub fn point(&self, index: u128) -> Vec<T> {
        match &self.grid {
            IncrementGrid::Cube { dim, per_axis } => {
                let n = u128::from(*per_axis);
                let mut rest = index;
                let mut z = vec![T::zero(); *dim];
                for c in z.iter_mut().rev() {
                    *c = T::of((2.0 * (rest % n) as f64 + 1.0) / (2.0 * n as f64));
                    rest /= n;
                }
                z
            }
            IncrementGrid::Cantor { level } => vec![CantorPoint::left_endpoint(*level, index).value()],
            IncrementGrid::Points(p) => p[index as usize].clone(),
        }
    }

    /// Nearest net point to an arbitrary real vector, lowest index on ties.
    pub fn nearest(&self, z: &[T]) -> (u128, T) {
        let index = match &self.grid {
            IncrementGrid::Cube { per_axis, .. } => {
                let n = *per_axis;
                z.iter().fold(0u128, |acc, c| {
                    let j = (c.f64() * n as f64).floor().clamp(0.0, (n - 1) as f64) as u128;
                    acc * u128::from(n) + j
                })
            }
            IncrementGrid::Cantor { level } => {
                let x = z[0].f64();
                let (mut lo, mut width, mut index) = (0.0f64, 1.0f64, 0u128);
                for _ in 0..*level {
                    let third = width / 3.0;
                    index <<= 1;
                    if x > lo + width / 2.0 {
                        index |= 1;
                        lo += 2.0 * third;
                    }
                    width = third;
                }
                index
            }
            IncrementGrid::Points(p) => {
                let mut best = (0usize, T::infinity());
                for (i, q) in p.iter().enumerate() {
                    let d = sup_distance(z, q);
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                best.0 as u128
            }
        };
        (index, sup_distance(z, &self.point(index)))
    }
}

/// Greedy cover of a finite point set in the sup-norm.
fn greedy_points<T: Scalar>(points: &[Vec<T>], eps: T) -> Vec<Vec<T>> {
    let mut covered = vec![false; points.len()];
    let mut chosen = Vec::new();
    while covered.iter().any(|c| !c) {
        let gain = |i: usize| (0..points.len()).filter(|&j| !covered[j] && sup_distance(&points[i], &points[j]) <= eps).count();
        let best = (0..points.len()).rev().max_by_key(|&i| gain(i)).expect("non-empty support");
        for j in 0..points.len() {
            if sup_distance(&points[best], &points[j]) <= eps {
                covered[j] = true;
            }
        }
        chosen.push(best);
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// `count` increments, each quantized to the same increment net.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementCodebook<T> {
    net: IncrementNet<T>,
    count: usize,
}

impl<T: Scalar> IncrementCodebook<T> {
    pub fn new(net: IncrementNet<T>, count: usize) -> Self {
        Self { net, count }
    }

    pub fn net(&self) -> &IncrementNet<T> {
        &self.net
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn size(&self) -> BigUint {
        pow_u128(self.net.size(), self.count)
    }

    pub fn log_size(&self) -> f64 {
        self.count as f64 * self.net.log_size()
    }

    pub fn rank(&self, digits: &[u128]) -> BigUint {
        from_digits(digits, self.net.size())
    }

    pub fn unrank(&self, index: &BigUint) -> Vec<u128> {
        to_digits(index, self.net.size(), self.count)
    }

    /// Running sums `x0 + ẑ_1 + … + ẑ_i`, `i = 0..=count`.
    pub fn values(&self, x0: &[T], digits: &[u128]) -> Vec<Point<T>> {
        let mut x = x0.to_vec();
        let mut out = vec![Point::Vector(x.clone())];
        for &d in digits {
            for (a, b) in x.iter_mut().zip(self.net.point(d)) {
                *a = *a + b;
            }
            out.push(Point::Vector(x.clone()));
        }
        out
    }
}
