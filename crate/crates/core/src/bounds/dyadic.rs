//! Dyadic partition of `[0,1)` separating a finite point set.

use crate::error::{Error, Result};

/// Finest dyadic level representable exactly alongside double-precision times.
pub const MAX_DYADIC_DEPTH: u32 = 52;

/// `[j 2^{-level}, (j+1) 2^{-level})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn start(&self) -> f64 {
        self.index as f64 * self.len()
    }

    pub fn end(&self) -> f64 {
        (self.index + 1) as f64 * self.len()
    }

    pub fn len(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start() <= t && t < self.end()
    }

    fn children(&self) -> [DyadicInterval; 2] {
        let level = self.level + 1;
        [DyadicInterval { level, index: 2 * self.index }, DyadicInterval { level, index: 2 * self.index + 1 }]
    }
}

/// Leaves of the binary splitting of `[0,1)` that stops once a node holds at
/// most one point; the leaves holding a point, in increasing order.
pub fn dyadic_partition(points: &[f64]) -> Result<Vec<DyadicInterval>> {
    let mut sorted = points.to_vec();
    for &t in &sorted {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::Domain(format!("point {t} outside [0,1)")));
        }
    }
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Domain("duplicate points".into()));
    }
    let mut leaves = Vec::with_capacity(sorted.len());
    split(DyadicInterval { level: 0, index: 0 }, &sorted, &mut leaves)?;
    Ok(leaves)
}

fn split(node: DyadicInterval, pts: &[f64], leaves: &mut Vec<DyadicInterval>) -> Result<()> {
    match pts.len() {
        0 => Ok(()),
        1 => {
            leaves.push(node);
            Ok(())
        }
        _ if node.level >= MAX_DYADIC_DEPTH => Err(Error::Precision(format!(
            "points {} and {} are not separated at dyadic depth {MAX_DYADIC_DEPTH}",
            pts[0], pts[1]
        ))),
        _ => {
            let [left, right] = node.children();
            let cut = pts.partition_point(|&t| t < right.start());
            split(left, &pts[..cut], leaves)?;
            split(right, &pts[cut..], leaves)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(dyadic_partition(&[0.3]).unwrap(), vec![DyadicInterval { level: 0, index: 0 }]);
        let two = dyadic_partition(&[0.6, 0.3]).unwrap();
        assert_eq!(two, vec![DyadicInterval { level: 1, index: 0 }, DyadicInterval { level: 1, index: 1 }]);
        assert!(dyadic_partition(&[]).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(dyadic_partition(&[0.2, 0.2]), Err(Error::Domain(_))));
        assert!(matches!(dyadic_partition(&[1.0]), Err(Error::Domain(_))));
        let t = 0.5;
        assert!(matches!(dyadic_partition(&[t, t + f64::EPSILON / 2.0]), Err(Error::Precision(_))));
    }
}
