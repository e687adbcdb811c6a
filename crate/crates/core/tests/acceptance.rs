//! Acceptance criteria AC1–AC10. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use jumpcode::bounds::special::EULER_GAMMA;
use jumpcode::bounds::{
    constants, dyadic_partition, log_tauberian_sum, lower_constant_c_lambda, sqrt_r_log_r,
};
use jumpcode::entropycoder::{
    decode_archive, decode_concatenated, decode_path, encode_archive, encode_path, BitStream, CoderConfig, CoderMode,
};
use jumpcode::harness::{
    brute_force_optimal_quantizer, fit_slope, mc_distortion, oracle_cross_check, shifted_candidates, CoderDescriptor,
    Estimator, ExperimentConfig, FinitePathLaw, RateCurvePoint,
};
use jumpcode::paths::JumpPath;
use jumpcode::quantizer::{ordered_grid_codebook, position_codebook_for_rate, PositionCodebook, QuantMode};
use jumpcode::sim::{sample_paths, substream, IncrementLaw, ProcessSpec};
use jumpcode::spaces::{DistortionSpace, Point};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_binomial(n: u64, k: u64) -> BigUint {
    // Pascal's rule, independent of the library's multiplicative formula.
    let mut row = vec![BigUint::from(1u32)];
    for _ in 0..n {
        let mut next = vec![BigUint::from(1u32); row.len() + 1];
        for j in 1..row.len() {
            next[j] = &row[j - 1] + &row[j];
        }
        row = next;
    }
    row.get(k as usize).cloned().unwrap_or_default()
}

/// All nondecreasing tuples of length `k` over `0..=n`.
fn sorted_tuples(k: usize, n: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = vec![0u64; k];
    fn rec(i: usize, lo: u64, n: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in lo..=n {
            cur[i] = v;
            rec(i + 1, v, n, cur, out);
        }
    }
    rec(0, 0, n, &mut cur, &mut out);
    out
}

fn sup_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ac1() -> Outcome {
    let mut worst_ratio: f64 = 0.0;
    let mut checked = 0usize;
    for k in 1..=6usize {
        for m in k as u64..=12 {
            let cb = ordered_grid_codebook(k, m).map_err(|e| e.to_string())?;
            let expect = exact_binomial(m + k as u64 - 1, k as u64);
            ensure(cb.size() == &expect, || format!("k={k} m={m}: size {} ≠ {expect}", cb.size()))?;
            let n = cb.size().to_u64().unwrap();
            let mut words = Vec::with_capacity(n as usize);
            for i in 0..n {
                let levels = cb.unrank(&BigUint::from(i)).map_err(|e| e.to_string())?;
                ensure(cb.rank(&levels) == BigUint::from(i), || format!("k={k} m={m}: rank∘unrank({i})"))?;
                ensure(levels.windows(2).all(|w| w[0] <= w[1]), || format!("k={k} m={m}: unsorted {levels:?}"))?;
                words.push(cb.times(&levels));
            }
            // Lattice of sorted tuples at step 1/(2m).
            let grid = 2 * m;
            let brute = (n as usize) * sorted_tuples(k, grid).len() <= 20_000_000;
            for t in sorted_tuples(k, grid) {
                let y: Vec<f64> = t.iter().map(|&v| v as f64 / grid as f64).collect();
                let (_, err) = cb.nearest(&y).map_err(|e| e.to_string())?;
                if brute {
                    let best = words.iter().map(|w| sup_err(&y, w)).fold(f64::INFINITY, f64::min);
                    ensure((best - err).abs() < 1e-12, || format!("k={k} m={m} y={y:?}: nearest {err} vs {best}"))?;
                }
                ensure(err <= 1.0 / m as f64 + 1e-12, || format!("k={k} m={m} y={y:?}: error {err} > 1/m"))?;
                worst_ratio = worst_ratio.max(err * m as f64);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} lattice points, max error·m = {worst_ratio:.6}"))
}

fn scan_error(cb: &PositionCodebook, k: usize, rng: &mut impl Rng) -> f64 {
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    // Axis scans at granularity 1e-4 with the other coordinates random.
    for axis in 0..k {
        let base: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        for j in 0..=10_000 {
            let mut y = base.clone();
            y[axis] = j as f64 * h;
            worst = worst.max(cb.nearest(&y).unwrap().1);
        }
    }
    // Full lattice at step 1/100 for k ≤ 3.
    let steps = 100u64;
    let total = (steps + 1).pow(k as u32);
    for idx in 0..total {
        let mut rest = idx;
        let y: Vec<f64> = (0..k)
            .map(|_| {
                let v = rest % (steps + 1);
                rest /= steps + 1;
                v as f64 / steps as f64
            })
            .collect();
        worst = worst.max(cb.nearest(&y).unwrap().1);
    }
    worst
}

fn ac2() -> Outcome {
    let mut rng = substream(2002, 0);
    let mut lines = Vec::new();
    for k in 1..=3usize {
        for r in [0.0, 1.0, std::f64::consts::LN_2 * k as f64, 5.0, 10.0] {
            let cb = position_codebook_for_rate(k, r).map_err(|e| e.to_string())?;
            ensure(cb.log_size() <= r + 1e-12, || format!("k={k} r={r}: log size {} > r", cb.log_size()))?;
            let worst = scan_error(&cb, k, &mut rng);
            let bound = (-r / k as f64).exp();
            ensure(worst <= bound + 1e-4, || format!("k={k} r={r}: scanned error {worst} > {bound} + 1e-4"))?;
            lines.push(format!("k{k}/r{r:.2}:{:.3}", worst / bound));
        }
    }
    Ok(format!("error/bound {}", lines.join(" ")))
}

fn roundtrip_mode(name: &str, spec: &ProcessSpec<f64>, cfg: &CoderConfig<f64>, seed: u64) -> Result<String, String> {
    let paths = sample_paths(spec, seed, 10_000).map_err(|e| e.to_string())?;
    let mut bits = 0usize;
    for x in &paths {
        let b = encode_path(x, cfg).map_err(|e| format!("{name}: {e}"))?;
        let y = decode_path(&b, cfg).map_err(|e| format!("{name}: {e}"))?;
        let b2 = encode_path(&y, cfg).map_err(|e| format!("{name}: re-encode: {e}"))?;
        ensure(b == b2, || format!("{name}: re-encode differs for {x}"))?;
        bits += b.len();
    }
    let mut cat = BitStream::new();
    let mut expect = Vec::new();
    for x in paths.iter().take(1000) {
        let b = encode_path(x, cfg).unwrap();
        expect.push(decode_path(&b, cfg).unwrap());
        cat.append(&b);
    }
    let got = decode_concatenated(&cat, cfg).map_err(|e| format!("{name}: concatenation: {e}"))?;
    ensure(got == expect, || format!("{name}: concatenated records decode differently"))?;
    let archive = encode_archive(&paths[..1000], cfg).map_err(|e| e.to_string())?;
    let back = decode_archive(&archive, cfg).map_err(|e| format!("{name}: archive: {e}"))?;
    ensure(back == expect, || format!("{name}: archive decodes differently"))?;
    Ok(format!("{name} {:.1}b", bits as f64 / paths.len() as f64))
}

fn ac3() -> Outcome {
    let alt = ProcessSpec::alternating(1.0).unwrap();
    let three = DistortionSpace::uniform_discrete(3).unwrap();
    let general = ProcessSpec::discrete_general(
        three,
        vec![1.0, 1.0, 1.0],
        vec![vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 2.0], vec![3.0, 1.0, 0.0]],
        2.0,
    )
    .unwrap();
    let cube = ProcessSpec::compound_poisson(IncrementLaw::UniformCube { dim: 2 }, 1.5).unwrap();
    let counting = ProcessSpec::counting(1.0).unwrap();
    let cantor = ProcessSpec::compound_poisson(IncrementLaw::CantorUniform { depth: 40 }, 1.0).unwrap();
    let mut out = Vec::new();
    let cases: Vec<(&str, &ProcessSpec<f64>, f64, CoderMode)> = vec![
        ("destinations/alternating", &alt, 6.0, CoderMode::Destinations),
        ("destinations/general", &general, 8.0, CoderMode::Destinations),
        ("exact/alternating", &alt, 6.0, CoderMode::DiscreteExact),
        ("exact/general", &general, 8.0, CoderMode::DiscreteExact),
        ("increments/cube", &cube, 9.0, CoderMode::Increments),
        ("increments/counting", &counting, 8.0, CoderMode::Increments),
        ("increments/cantor", &cantor, 7.0, CoderMode::Increments),
    ];
    for (i, (name, spec, r, mode)) in cases.into_iter().enumerate() {
        let cfg = CoderConfig::for_process(spec, r, mode).map_err(|e| format!("{name}: {e}"))?;
        out.push(roundtrip_mode(name, spec, &cfg, 3000 + i as u64)?);
    }
    Ok(out.join(", "))
}

fn entropy_curve(lambda: f64, ladder: Vec<f64>, mode: CoderMode, seed: u64) -> Vec<RateCurvePoint> {
    let spec = ProcessSpec::alternating(lambda).unwrap();
    let mut cfg = ExperimentConfig::new(spec, CoderDescriptor::Entropy { mode }, ladder);
    cfg.trials = 10_000;
    cfg.seed = seed;
    mc_distortion(&cfg).unwrap()
}

fn ac4() -> Outcome {
    let mut out = Vec::new();
    let mut failures = Vec::new();
    for (i, lambda) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let start = Instant::now();
        // r/λ from 2 to 6: the distortion scale e^{−r/λ} spans e^4.
        let ladder: Vec<f64> = [2.0, 3.0, 4.0, 5.0, 6.0].iter().map(|a| a * lambda).collect();
        let pts = entropy_curve(lambda, ladder, CoderMode::DiscreteExact, 4000 + i as u64);
        let x: Vec<f64> = pts.iter().map(|p| p.rate_nats).collect();
        let y: Vec<f64> = pts.iter().map(|p| p.distortion.ln()).collect();
        let (slope, _) = fit_slope(&x, &y).map_err(|e| e.to_string())?;
        let target = -1.0 / lambda;
        let rel = (slope - target).abs() / target.abs();
        if rel > 0.15 {
            failures.push(format!("λ={lambda}: slope {slope:.4} vs {target:.4} ({:.1}%)", 100.0 * rel));
        }
        for p in &pts {
            if !(p.envelope_lower - 3.0 * p.stderr <= p.distortion) {
                failures.push(format!("λ={lambda} r={}: D̂={} below lower {}", p.rate_nominal, p.distortion, p.envelope_lower));
            }
            if !(p.distortion <= p.envelope_upper + 3.0 * p.stderr) {
                failures.push(format!("λ={lambda} r={}: D̂={} above upper {}", p.rate_nominal, p.distortion, p.envelope_upper));
            }
        }
        let secs = start.elapsed().as_secs_f64();
        if secs > 300.0 {
            failures.push(format!("λ={lambda}: {secs:.0}s > 5 min"));
        }
        out.push(format!("λ={lambda} slope={slope:.4} (target {target:.3}, {:.1}%)", 100.0 * rel));
    }
    if failures.is_empty() {
        Ok(out.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), out.join("; ")))
    }
}

fn trapezoid_alpha1() -> f64 {
    // ∫_0^∞ log x · 2e^{−2x} dx with x = e^t: ∫ t · 2 e^{t} e^{−2e^t} dt.
    let (a, b, n) = (-45.0f64, 4.0f64, 400_000usize);
    let h = (b - a) / n as f64;
    let f = |t: f64| t * 2.0 * t.exp() * (-2.0 * t.exp()).exp();
    (0..=n).map(|i| f(a + i as f64 * h) * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h
}

fn ac5() -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for lambda in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let a = constants::c_lambda_series(lambda);
        let b = constants::c_lambda_closed(lambda);
        let rel = ((a - b) / b).abs();
        if rel >= 1e-8 {
            failures.push(format!("λ={lambda}: series {a} vs closed {b}"));
        }
    }
    let q = trapezoid_alpha1();
    if (q - constants::alpha1()).abs() >= 1e-9 {
        failures.push(format!("α₁ quadrature {q} vs {}", constants::alpha1()));
    }
    let big = lower_constant_c_lambda(1e4).map_err(|e| e.to_string())?;
    let small = lower_constant_c_lambda(1e-4).map_err(|e| e.to_string())?;
    let e = std::f64::consts::E;
    let lim_big = big * 8.0 * e * EULER_GAMMA.exp();
    let lim_small = small * 8.0 * e * e / 1e-4;
    notes.push(format!("C_1e4·8e·e^γ = {lim_big:.5}, C_1e-4·8e²/1e-4 = {lim_small:.5}"));
    if (lim_big - 1.0).abs() >= 0.01 {
        failures.push(format!("large-λ limit ratio {lim_big:.5} ≠ 1"));
    }
    if (lim_small - 1.0).abs() >= 0.01 {
        failures.push(format!("small-λ limit ratio {lim_small:.5} ≠ 1"));
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} | {}", failures.join("; "), notes.join("; ")))
    }
}

fn ac6() -> Outcome {
    let mut rng = substream(6006, 0);
    let mut leaves = 0usize;
    for _ in 0..1000 {
        let k = rng.random_range(1..=8usize);
        let mut pts: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let part = dyadic_partition(&pts).map_err(|e| e.to_string())?;
        ensure(part.len() == pts.len(), || format!("{pts:?}: {} leaves", part.len()))?;
        for (i, iv) in part.iter().enumerate() {
            let scale = 2f64.powi(iv.level as i32);
            ensure(iv.start() * scale == iv.index as f64 && iv.len() * scale == 1.0, || format!("{iv:?} not dyadic"))?;
            let inside = pts.iter().filter(|&&t| iv.contains(t)).count();
            ensure(inside == 1 && iv.contains(pts[i]), || format!("{pts:?}: leaf {iv:?} holds {inside}"))?;
            let left = if i == 0 { f64::INFINITY } else { pts[i] - pts[i - 1] };
            let right = if i + 1 == pts.len() { f64::INFINITY } else { pts[i + 1] - pts[i] };
            // A lone point has no neighbour and the gap bound is vacuous.
            let gap = left.min(right);
            ensure(!gap.is_finite() || iv.len() >= 0.5 * gap, || format!("{pts:?}: |I_{i}| = {} < half gap", iv.len()))?;
        }
        for (a, b) in part.iter().zip(part.iter().skip(1)) {
            ensure(a.end() <= b.start(), || format!("{a:?} and {b:?} overlap"))?;
        }
        leaves += part.len();
    }
    Ok(format!("1000 configurations, {leaves} leaves, no violations"))
}

fn ac7() -> Outcome {
    let mut ratios = Vec::new();
    for r in [1e2, 1e3, 1e4, 1e5] {
        let v = log_tauberian_sum(1.0, r).map_err(|e| e.to_string())?;
        ratios.push(v / -sqrt_r_log_r(r));
    }
    ensure(ratios.windows(2).all(|w| w[0] < w[1] && w[1] <= 1.1), || format!("ratios not increasing: {ratios:?}"))?;
    ensure((0.6..=1.1).contains(&ratios[3]), || format!("ratio at 1e5 = {}", ratios[3]))?;
    // Direct summation of 10⁶ terms with a running Poisson weight.
    let r = 100.0;
    let mut w = (-1.0f64).exp();
    let mut direct = 0.0;
    for k in 0..1_000_000u64 {
        if k > 0 {
            w /= k as f64;
        }
        direct += w * (-r / (k + 1) as f64).exp();
    }
    let lib = log_tauberian_sum(1.0, r).unwrap().exp();
    let rel = ((lib - direct) / direct).abs();
    ensure(rel < 1e-12, || format!("sum {lib} vs direct {direct}: rel {rel:e}"))?;
    Ok(format!("ratios {:.4?}, direct-sum rel err {rel:.1e}", ratios))
}

fn ac8() -> Outcome {
    let space = DistortionSpace::two_point();
    let c0 = JumpPath::constant(Point::Label(0), &space).unwrap();
    let j = |t: f64| JumpPath::new(vec![t], vec![Point::Label(0), Point::Label(1)], &space).unwrap();
    let law = FinitePathLaw::new(vec![c0, j(0.25), j(0.75)], vec![0.5, 0.25, 0.25]).unwrap();
    let one = brute_force_optimal_quantizer(&law, 1, law.paths(), &space, 1.0).map_err(|e| e.to_string())?;
    ensure(one.distortion == 0.25, || format!("n=1 optimum {}", one.distortion))?;
    let cands = shifted_candidates(&law, &space, &[-0.125, 0.125, -0.0625, 0.0625]);
    let mut out = vec![format!("n=1 optimum 0.25")];
    for r in [7.0, 8.0, 10.0, 12.0, 13.5] {
        let rep = oracle_cross_check(&law, &space, &cands, r, 0.1, 1.0).map_err(|e| e.to_string())?;
        out.push(format!("r={r}: {:.4} ≤ {:.4} ≤ {:.4} (#C={})", rep.optimum, rep.constructed, rep.proof_bound, rep.codebook_size));
    }
    Ok(out.join("; "))
}

fn ac9() -> Outcome {
    let spec = ProcessSpec::counting(1.0).unwrap();
    let rates = vec![20.0, 40.0, 80.0, 160.0];
    let mut cfg = ExperimentConfig::new(spec, CoderDescriptor::Quantizer { mode: QuantMode::Increments, delta: 0.1 }, rates);
    cfg.trials = 10_000;
    cfg.seed = 9009;
    cfg.estimator = Estimator::Stratified;
    let pts = mc_distortion(&cfg).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = pts.iter().map(|p| -p.distortion.ln() / (2.0 / cfg.s * p.rate_nominal * p.rate_nominal.ln()).sqrt()).collect();
    let detail = pts
        .iter()
        .zip(&ratios)
        .map(|(p, q)| format!("R={} D̂={:.3e}±{:.1e} bound={:.3e} ratio={q:.4}", p.rate_nominal, p.distortion, p.stderr, p.proof_bound.unwrap()))
        .collect::<Vec<_>>()
        .join("; ");
    ensure(ratios.windows(2).all(|w| w[0] < w[1]), || format!("ratios not increasing | {detail}"))?;
    for p in &pts {
        let b = p.proof_bound.unwrap();
        ensure(p.distortion <= b, || format!("R={}: D̂ {} > bound {b} | {detail}", p.rate_nominal, p.distortion))?;
    }
    Ok(detail)
}

fn ac10() -> Outcome {
    let mut out = Vec::new();
    let alt = ProcessSpec::alternating(1.0).unwrap();
    let counting = ProcessSpec::counting(1.0).unwrap();
    let cases = [
        ("alternating", &alt, QuantMode::Destinations, CoderMode::Destinations, vec![7.0, 10.0, 14.0, 20.0]),
        ("counting", &counting, QuantMode::Increments, CoderMode::Increments, vec![4.0, 8.0, 16.0, 24.0]),
    ];
    for (i, (name, spec, qmode, emode, ladder)) in cases.into_iter().enumerate() {
        let mut q = ExperimentConfig::new(spec.clone(), CoderDescriptor::Quantizer { mode: qmode, delta: 0.1 }, ladder.clone());
        q.trials = 10_000;
        q.seed = 10_010 + i as u64;
        let mut e = q.clone();
        e.coder = CoderDescriptor::Entropy { mode: emode };
        let qp = mc_distortion(&q).map_err(|e| e.to_string())?;
        let ep = mc_distortion(&e).map_err(|e| e.to_string())?;
        for (a, b) in ep.iter().zip(&qp) {
            let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            ensure(a.distortion <= b.distortion + 3.0 * se, || {
                format!("{name} r={}: D^(e) {} > D^(q) {} + 3·{se}", a.rate_nominal, a.distortion, b.distortion)
            })?;
            out.push(format!("{name} r={}: {:.2e} ≤ {:.2e}", a.rate_nominal, a.distortion, b.distortion));
        }
    }
    Ok(out.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("AC1 ordered-grid codebook exactness", ac1, Duration::from_secs(10)),
        ("AC2 rate-selected product codebook bound", ac2, Duration::from_secs(30)),
        ("AC3 entropy-coder round trip", ac3, Duration::from_secs(30)),
        ("AC4 alternating-Poisson entropy-coding slope", ac4, Duration::from_secs(900)),
        ("AC5 lower-bound constants", ac5, Duration::from_secs(5)),
        ("AC6 dyadic partition", ac6, Duration::from_secs(5)),
        ("AC7 Tauberian trend", ac7, Duration::from_secs(5)),
        ("AC8 oracle sandwich", ac8, Duration::from_secs(30)),
        ("AC9 counting-process quantizer trend", ac9, Duration::from_secs(600)),
        ("AC10 entropy coding beats quantization", ac10, Duration::from_secs(600)),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f, limit) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(msg) if elapsed > limit => Err(format!("took {elapsed:.1?} > {limit:?} | {msg}")),
            other => other,
        };
        match result {
            Ok(msg) => println!("PASS {name} [{elapsed:.1?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} [{elapsed:.1?}]: {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
