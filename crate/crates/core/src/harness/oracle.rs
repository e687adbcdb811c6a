//! Exact evaluation on finite path laws: brute-force optimal codebooks and
//! the constructed-versus-optimal sandwich.

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::paths::{path_distortion, JumpPath};
use crate::quantizer::bigmath::binomial;
use crate::quantizer::{CompositePathCodebook, ValueSource};
use crate::spaces::DistortionSpace;

pub const MAX_SUPPORT: usize = 10_000;
pub const MAX_CANDIDATES: usize = 30;
pub const SUBSET_BUDGET: u128 = 10_000_000;

/// A source with finitely many paths.
#[derive(Clone, Debug, PartialEq)]
pub struct FinitePathLaw {
    paths: Vec<JumpPath<f64>>,
    probs: Vec<f64>,
}

impl FinitePathLaw {
    pub fn new(paths: Vec<JumpPath<f64>>, probs: Vec<f64>) -> Result<Self> {
        if paths.is_empty() || paths.len() != probs.len() {
            return Err(Error::Domain("need one probability per path".into()));
        }
        if paths.len() > MAX_SUPPORT {
            return Err(Error::Domain(format!("support exceeds {MAX_SUPPORT} paths")));
        }
        if probs.iter().any(|&p| !(p > 0.0)) {
            return Err(Error::Domain("probabilities must be positive".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}")));
        }
        Ok(Self { paths, probs })
    }

    pub fn paths(&self) -> &[JumpPath<f64>] {
        &self.paths
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `P(N = k)` under the law.
    pub fn count_pmf(&self, k: usize) -> f64 {
        self.paths.iter().zip(&self.probs).filter(|(p, _)| p.jump_count() == k).map(|(_, q)| q).sum()
    }

    pub fn max_jumps(&self) -> usize {
        self.paths.iter().map(JumpPath::jump_count).max().unwrap_or(0)
    }

    /// `(Σ_x p(x) min_{a∈C} ρ_D(x,a)^s)^{1/s}`.
    pub fn distortion(&self, codebook: &[JumpPath<f64>], space: &DistortionSpace<f64>, s: f64) -> Result<f64> {
        if codebook.is_empty() {
            return Err(Error::Domain("empty codebook".into()));
        }
        let mut total = 0.0;
        for (x, p) in self.paths.iter().zip(&self.probs) {
            let mut best = f64::INFINITY;
            for a in codebook {
                best = best.min(path_distortion(x, a, space)?.powf(s));
            }
            total += p * best;
        }
        Ok(total.powf(1.0 / s))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceResult {
    /// Indices into the candidate list, increasing.
    pub subset: Vec<usize>,
    pub codebook: Vec<JumpPath<f64>>,
    pub distortion: f64,
}

/// Best `n`-subset of `candidates`, exhaustively; ties go to the
/// lexicographically first subset.
pub fn brute_force_optimal_quantizer(
    law: &FinitePathLaw,
    n: usize,
    candidates: &[JumpPath<f64>],
    space: &DistortionSpace<f64>,
    s: f64,
) -> Result<BruteForceResult> {
    if candidates.len() > MAX_CANDIDATES {
        return Err(Error::Domain(format!("at most {MAX_CANDIDATES} candidates, got {}", candidates.len())));
    }
    if n == 0 || n > candidates.len() {
        return Err(Error::Domain(format!("codebook size {n} outside 1..={}", candidates.len())));
    }
    let needed = binomial(candidates.len() as u64, n as u64).to_u128().unwrap_or(u128::MAX);
    if needed > SUBSET_BUDGET {
        return Err(Error::Budget { needed, budget: SUBSET_BUDGET });
    }
    // cost[c][x] = ρ_D(x, c)^s
    let cost = candidates
        .iter()
        .map(|c| law.paths.iter().map(|x| Ok(path_distortion(x, c, space)?.powf(s))).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for subset in (0..candidates.len()).combinations(n) {
        let value: f64 = law
            .probs
            .iter()
            .enumerate()
            .map(|(xi, p)| p * subset.iter().map(|&c| cost[c][xi]).fold(f64::INFINITY, f64::min))
            .sum();
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, subset));
        }
    }
    let (value, subset) = best.expect("at least one subset");
    Ok(BruteForceResult {
        codebook: subset.iter().map(|&i| candidates[i].clone()).collect(),
        subset,
        distortion: value.powf(1.0 / s),
    })
}

/// The three numbers of a sandwich check.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub rate: f64,
    pub codebook_size: usize,
    pub optimum: f64,
    pub constructed: f64,
    pub proof_bound: f64,
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "r={} #C={} optimum={} constructed={} bound={}",
            self.rate, self.codebook_size, self.optimum, self.constructed, self.proof_bound
        )
    }
}

/// All codewords of a composite codebook small enough to list.
pub fn codebook_paths(cb: &CompositePathCodebook<f64>) -> Result<Vec<JumpPath<f64>>> {
    let n = cb
        .size()
        .to_usize()
        .filter(|&n| n <= MAX_CANDIDATES)
        .ok_or_else(|| Error::Budget { needed: cb.size().to_u128().unwrap_or(u128::MAX), budget: MAX_CANDIDATES as u128 })?;
    (0..n).map(|i| cb.decode(&BigUint::from(i))?.to_path(cb.space())).collect()
}

/// Builds the destination-mode composite codebook at rate `r` and checks
/// `optimum ≤ constructed ≤ proof bound`, the optimum taken over size-`#C`
/// subsets of `candidates` together with the codewords themselves.
pub fn oracle_cross_check(
    law: &FinitePathLaw,
    space: &DistortionSpace<f64>,
    candidates: &[JumpPath<f64>],
    r: f64,
    delta: f64,
    s: f64,
) -> Result<OracleReport> {
    let cb = CompositePathCodebook::new(ValueSource::Destinations(space.clone()), r, delta, s)?;
    let codewords = codebook_paths(&cb)?;
    let mut pool: Vec<JumpPath<f64>> = Vec::new();
    for c in candidates.iter().chain(&codewords) {
        if !pool.contains(c) {
            pool.push(c.clone());
        }
    }
    let constructed = law.distortion(&codewords, space, s)?;
    let n = codewords.len().min(pool.len());
    let optimum = brute_force_optimal_quantizer(law, n, &pool, space, s)?.distortion;
    let proof_bound = cb.proof_bound(|k| law.count_pmf(k), law.max_jumps()).powf(1.0 / s);
    let report = OracleReport { rate: r, codebook_size: codewords.len(), optimum, constructed, proof_bound };
    let tol = 1e-12;
    if !(optimum <= constructed + tol && constructed <= proof_bound + tol) {
        return Err(Error::Oracle(report.to_string()));
    }
    Ok(report)
}

/// Candidates for a law: its support plus copies with each jump moved by
/// `±shift`, deduplicated, at most [`MAX_CANDIDATES`].
pub fn shifted_candidates(law: &FinitePathLaw, space: &DistortionSpace<f64>, shifts: &[f64]) -> Vec<JumpPath<f64>> {
    let mut out: Vec<JumpPath<f64>> = Vec::new();
    let add = |p: JumpPath<f64>, out: &mut Vec<JumpPath<f64>>| {
        if out.len() < MAX_CANDIDATES && !out.contains(&p) {
            out.push(p);
        }
    };
    for p in law.paths() {
        add(p.clone(), &mut out);
    }
    for p in law.paths() {
        for &d in shifts {
            let times: Vec<f64> = p.jump_times().iter().map(|t| t + d).collect();
            if let Ok(q) = JumpPath::new(times, p.values().to_vec(), space) {
                add(q, &mut out);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::Point;

    fn three_path_law() -> (FinitePathLaw, DistortionSpace<f64>) {
        let space = DistortionSpace::two_point();
        let c0 = JumpPath::constant(Point::Label(0), &space).unwrap();
        let j = |t: f64| JumpPath::new(vec![t], vec![Point::Label(0), Point::Label(1)], &space).unwrap();
        (FinitePathLaw::new(vec![c0, j(0.25), j(0.75)], vec![0.5, 0.25, 0.25]).unwrap(), space)
    }

    #[test]
    fn three_path_examples() {
        let (law, space) = three_path_law();
        let cands = law.paths().to_vec();
        let one = brute_force_optimal_quantizer(&law, 1, &cands, &space, 1.0).unwrap();
        assert_eq!(one.subset, vec![0]);
        assert_eq!(one.distortion, 0.25);
        let two = brute_force_optimal_quantizer(&law, 2, &cands, &space, 1.0).unwrap();
        assert!(two.distortion < one.distortion);
        assert_eq!(brute_force_optimal_quantizer(&law, 3, &cands, &space, 1.0).unwrap().distortion, 0.0);
    }

    #[test]
    fn law_validation_and_budget() {
        let (law, space) = three_path_law();
        assert!(FinitePathLaw::new(law.paths().to_vec(), vec![0.5, 0.25, 0.2]).is_err());
        assert!(FinitePathLaw::new(law.paths().to_vec(), vec![0.5, 0.5, 0.0]).is_err());
        let many: Vec<_> = (1..=30)
            .map(|i| JumpPath::new(vec![i as f64 / 31.0], vec![Point::Label(0), Point::Label(1)], &space).unwrap())
            .collect();
        assert!(matches!(brute_force_optimal_quantizer(&law, 15, &many, &space, 1.0), Err(Error::Budget { .. })));
    }

    #[test]
    fn trivial_law_sandwich() {
        let space = DistortionSpace::two_point();
        let c0 = JumpPath::constant(Point::Label(0), &space).unwrap();
        let law = FinitePathLaw::new(vec![c0.clone()], vec![1.0]).unwrap();
        let rep = oracle_cross_check(&law, &space, &[c0], 8.0, 0.1, 1.0).unwrap();
        assert_eq!(rep.optimum, 0.0);
        assert_eq!(rep.constructed, 0.0);
        assert!(rep.proof_bound < 1e-3);
    }
}
