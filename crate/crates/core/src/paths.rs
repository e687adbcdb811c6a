//! Piecewise-constant paths on `[0,1)` and the path distortion
//! `ρ_D(f, g) = ∫₀¹ ρ(f(t), g(t)) dt`.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spaces::{CantorPoint, DistortionSpace, Point, SpaceKind};

/// Anything that is constant between sorted breakpoints on `[0,1)`.
///
/// `values()[i]` holds on `[t_i, t_{i+1})` with `t_0 = 0` and a final
/// breakpoint at 1. Breakpoints may repeat, in which case the segment between
/// them is empty.
pub trait PiecewiseConstant<T> {
    fn breakpoints(&self) -> &[f64];
    fn values(&self) -> &[Point<T>];
}

/// A jump path: `0 < Y_1 < … < Y_k < 1` and `k + 1` values, each differing
/// from its predecessor. The value at a jump time is the new value.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpPath<T> {
    times: Vec<f64>,
    values: Vec<Point<T>>,
}

impl<T: Scalar> JumpPath<T> {
    pub fn new(times: Vec<f64>, values: Vec<Point<T>>, space: &DistortionSpace<T>) -> Result<Self> {
        if values.len() != times.len() + 1 {
            return Err(Error::Domain(format!(
                "{} jump times need {} values, got {}",
                times.len(),
                times.len() + 1,
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > prev && t < 1.0) {
                return Err(Error::Domain(format!(
                    "jump times must be strictly increasing in (0,1), got {times:?}"
                )));
            }
            prev = t;
        }
        for v in &values {
            space.contains(v)?;
        }
        for (i, w) in values.windows(2).enumerate() {
            if space.distortion_unchecked(&w[0], &w[1]) <= T::zero() {
                return Err(Error::Domain(format!("jump {} does not change the state", i + 1)));
            }
        }
        Ok(Self { times, values })
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_parts(times: Vec<f64>, values: Vec<Point<T>>) -> Self {
        debug_assert_eq!(values.len(), times.len() + 1);
        Self { times, values }
    }

    pub fn constant(value: Point<T>, space: &DistortionSpace<T>) -> Result<Self> {
        Self::new(Vec::new(), vec![value], space)
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Point<T>] {
        &self.values
    }

    pub fn jump_count(&self) -> usize {
        self.times.len()
    }

    /// `f(t)` for `t ∈ [0,1)`.
    pub fn eval(&self, t: f64) -> Result<&Point<T>> {
        path_eval(self, t)
    }

    /// `X(Y_i) − X(Y_{i−1})` for vector-valued paths.
    pub fn increments(&self) -> Result<Vec<Vec<T>>> {
        self.values
            .windows(2)
            .map(|w| match (&w[0], &w[1]) {
                (Point::Vector(a), Point::Vector(b)) => {
                    Ok(a.iter().zip(b).map(|(x, y)| *y - *x).collect())
                }
                _ => Err(Error::Domain("increments need vector-valued paths".into())),
            })
            .collect()
    }

    /// `k;t1,...,tk;v0,...,vk`.
    pub fn to_record(&self) -> String {
        self.to_string()
    }

    pub fn from_record(record: &str, space: &DistortionSpace<T>) -> Result<Self> {
        let parts: Vec<&str> = record.trim().split(';').collect();
        let [k, times, values] = parts[..] else {
            return Err(Error::Domain(format!("path record needs 3 fields: {record:?}")));
        };
        let k: usize = k.parse().map_err(|_| Error::Domain(format!("bad jump count {k:?}")))?;
        let times: Vec<f64> = if times.is_empty() {
            Vec::new()
        } else {
            times
                .split(',')
                .map(|t| t.parse().map_err(|_| Error::Domain(format!("bad jump time {t:?}"))))
                .collect::<Result<_>>()?
        };
        if times.len() != k {
            return Err(Error::Domain(format!("record declares {k} jumps but lists {}", times.len())));
        }
        let values = values
            .split(',')
            .map(|v| parse_point(v, space))
            .collect::<Result<Vec<_>>>()?;
        Self::new(times, values, space)
    }
}

impl<T: Scalar> fmt::Display for JumpPath<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.times.len())?;
        for (i, t) in self.times.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(";")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Inverse of `Point`'s `Display` for the given space.
pub fn parse_point<T: Scalar>(s: &str, space: &DistortionSpace<T>) -> Result<Point<T>> {
    let bad = || Error::Domain(format!("cannot parse point {s:?} for {:?}", space.kind()));
    let p = match space.kind() {
        SpaceKind::FiniteDiscrete { .. } => Point::Label(s.parse().map_err(|_| bad())?),
        SpaceKind::UnitCube { .. } | SpaceKind::RealVector { .. } => Point::Vector(
            s.split(':')
                .map(|c| c.parse::<f64>().map(T::of).map_err(|_| bad()))
                .collect::<Result<_>>()?,
        ),
        SpaceKind::CantorSet { .. } => {
            let digits = s.strip_prefix('c').ok_or_else(bad)?;
            let digits = digits
                .chars()
                .map(|c| c.to_digit(10).map(|d| d as u8).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?;
            Point::Cantor(CantorPoint::new(digits)?)
        }
    };
    space.contains(&p)?;
    Ok(p)
}

impl<T> PiecewiseConstant<T> for JumpPath<T> {
    fn breakpoints(&self) -> &[f64] {
        &self.times
    }
    fn values(&self) -> &[Point<T>] {
        &self.values
    }
}

/// A decoded codeword: like a [`JumpPath`] but breakpoints may tie or sit at
/// time 1, and consecutive values may coincide.
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction<T> {
    times: Vec<f64>,
    values: Vec<Point<T>>,
}

impl<T: Scalar> Reconstruction<T> {
    pub fn new(times: Vec<f64>, values: Vec<Point<T>>) -> Result<Self> {
        if values.len() != times.len() + 1 {
            return Err(Error::Domain(format!(
                "{} breakpoints need {} values, got {}",
                times.len(),
                times.len() + 1,
                values.len()
            )));
        }
        let mut prev = 0.0;
        for &t in &times {
            if !(t > 0.0 && t >= prev && t <= 1.0) {
                return Err(Error::Domain(format!(
                    "breakpoints must be nondecreasing in (0,1], got {times:?}"
                )));
            }
            prev = t;
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Point<T>] {
        &self.values
    }

    /// The jump path representing the same function on `[0,1)`.
    pub fn to_path(&self, space: &DistortionSpace<T>) -> Result<JumpPath<T>> {
        for v in &self.values {
            space.contains(v)?;
        }
        let mut times = Vec::new();
        let mut values = vec![self.values[0].clone()];
        for (i, &t) in self.times.iter().enumerate() {
            let next_t = self.times.get(i + 1).copied().unwrap_or(1.0);
            if next_t <= t {
                continue;
            }
            let v = &self.values[i + 1];
            let last = values.last().expect("non-empty");
            if space.distortion_unchecked(last, v) <= T::zero() {
                continue;
            }
            times.push(t);
            values.push(v.clone());
        }
        Ok(JumpPath::from_parts(times, values))
    }
}

impl<T> PiecewiseConstant<T> for Reconstruction<T> {
    fn breakpoints(&self) -> &[f64] {
        &self.times
    }
    fn values(&self) -> &[Point<T>] {
        &self.values
    }
}

impl<T: Scalar> From<JumpPath<T>> for Reconstruction<T> {
    fn from(p: JumpPath<T>) -> Self {
        Self { times: p.times, values: p.values }
    }
}

/// `f(t)`: the value after the last breakpoint `≤ t`.
pub fn path_eval<T, F: PiecewiseConstant<T>>(f: &F, t: f64) -> Result<&Point<T>> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!("time {t} outside [0,1)")));
    }
    let i = f.breakpoints().partition_point(|&y| y <= t);
    Ok(&f.values()[i])
}

/// Exact `∫₀¹ ρ(f(t), g(t)) dt` by sweeping the merged breakpoints.
pub fn path_distortion<T, F, G>(f: &F, g: &G, space: &DistortionSpace<T>) -> Result<T>
where
    T: Scalar,
    F: PiecewiseConstant<T>,
    G: PiecewiseConstant<T>,
{
    for v in f.values().iter().chain(g.values()) {
        space.contains(v)?;
    }
    Ok(path_distortion_unchecked(f, g, space))
}

pub(crate) fn path_distortion_unchecked<T, F, G>(f: &F, g: &G, space: &DistortionSpace<T>) -> T
where
    T: Scalar,
    F: PiecewiseConstant<T>,
    G: PiecewiseConstant<T>,
{
    let (ft, gt) = (f.breakpoints(), g.breakpoints());
    let (fv, gv) = (f.values(), g.values());
    let (mut i, mut j) = (0, 0);
    let mut now = 0.0f64;
    let mut total = 0.0f64;
    loop {
        let nf = ft.get(i).copied().unwrap_or(1.0).min(1.0);
        let ng = gt.get(j).copied().unwrap_or(1.0).min(1.0);
        let next = nf.min(ng);
        if next > now {
            total += space.distortion_unchecked(&fv[i], &gv[j]).f64() * (next - now);
            now = next;
        }
        if now >= 1.0 {
            break;
        }
        if nf <= now {
            i += 1;
        }
        if ng <= now {
            j += 1;
        }
    }
    T::of(total)
}

/// `(mean ρ_D(f, g)^s)^{1/s}` over the sample pairs.
pub fn moment_distortion<T, F, G>(pairs: &[(F, G)], s: f64, space: &DistortionSpace<T>) -> Result<T>
where
    T: Scalar,
    F: PiecewiseConstant<T>,
    G: PiecewiseConstant<T>,
{
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("moment order must be positive, got {s}")));
    }
    if pairs.is_empty() {
        return Err(Error::Domain("no sample pairs".into()));
    }
    let mut acc = 0.0;
    for (f, g) in pairs {
        acc += path_distortion(f, g, space)?.f64().powf(s);
    }
    Ok(T::of((acc / pairs.len() as f64).powf(1.0 / s)))
}
