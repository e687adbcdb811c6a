use jumpcode::bounds::dyadic_partition;
use jumpcode::entropycoder::{decode_path, encode_path, CoderConfig, CoderMode};
use jumpcode::paths::{path_distortion, JumpPath};
use jumpcode::quantizer::{ordered_grid_codebook, position_codebook_for_rate};
use jumpcode::sim::{substream, ProcessSpec};
use jumpcode::spaces::{DistortionSpace, Point};
use num_bigint::BigUint;
use proptest::prelude::*;

fn cube_path(times: Vec<f64>, vals: Vec<(f64, f64)>) -> JumpPath<f64> {
    let space = DistortionSpace::unit_cube(2).unwrap();
    let mut t = times;
    t.sort_by(f64::total_cmp);
    t.dedup();
    let values = vals.into_iter().take(t.len() + 1).map(|(a, b)| Point::Vector(vec![a, b])).collect::<Vec<_>>();
    let t = t.into_iter().take(values.len() - 1).collect();
    JumpPath::new(t, values, &space).unwrap()
}

fn riemann(f: &JumpPath<f64>, g: &JumpPath<f64>, space: &DistortionSpace<f64>, n: usize) -> f64 {
    (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            space.distortion(f.eval(t).unwrap(), g.eval(t).unwrap()).unwrap()
        })
        .sum::<f64>()
        / n as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn path_distortion_matches_riemann_sum(
        ta in prop::collection::vec(0.001f64..0.999, 0..5),
        tb in prop::collection::vec(0.001f64..0.999, 0..5),
        va in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6),
        vb in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6),
    ) {
        let space = DistortionSpace::unit_cube(2).unwrap();
        let f = cube_path(ta, va);
        let g = cube_path(tb, vb);
        let exact = path_distortion(&f, &g, &space).unwrap();
        // Each breakpoint perturbs the midpoint rule by at most one cell of weight diam/n.
        let n = 20_000;
        let approx = riemann(&f, &g, &space, n);
        let jumps = (f.jump_count() + g.jump_count()) as f64;
        prop_assert!((exact - approx).abs() <= jumps / n as f64 + 1e-12);
        prop_assert!(path_distortion(&f, &f, &space).unwrap() == 0.0);
        prop_assert!((exact - path_distortion(&g, &f, &space).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn record_text_roundtrip(
        ta in prop::collection::vec(0.001f64..0.999, 0..5),
        va in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 6),
    ) {
        let space = DistortionSpace::unit_cube(2).unwrap();
        let f = cube_path(ta, va);
        prop_assert_eq!(JumpPath::from_record(&f.to_record(), &space).unwrap(), f);
    }

    #[test]
    fn ordered_grid_rank_unrank(k in 1usize..9, extra in 0u64..20, seed in any::<u64>()) {
        let m = k as u64 + extra;
        let cb = ordered_grid_codebook(k, m).unwrap();
        let n = cb.size().clone();
        let i = BigUint::from(seed) % &n;
        let levels = cb.unrank(&i).unwrap();
        prop_assert_eq!(cb.rank(&levels), i);
        prop_assert!(levels.iter().all(|&l| (1..=m).contains(&l)));
        prop_assert!(levels.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rate_codebook_error_and_size(k in 1usize..6, r in 0.0f64..20.0, pts in prop::collection::vec(0.0f64..1.0, 6)) {
        let cb = position_codebook_for_rate(k, r).unwrap();
        prop_assert!(cb.log_size() <= r + 1e-12);
        let (_, err) = cb.nearest(&pts[..k]).unwrap();
        prop_assert!(err <= (-r / k as f64).exp() + 1e-12);
    }

    #[test]
    fn dyadic_leaves_hold_one_point(mut pts in prop::collection::vec(0.0f64..1.0, 1..12)) {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let part = dyadic_partition(&pts).unwrap();
        prop_assert_eq!(part.len(), pts.len());
        for (iv, &t) in part.iter().zip(&pts) {
            prop_assert!(iv.contains(t));
            prop_assert_eq!(pts.iter().filter(|&&u| iv.contains(u)).count(), 1);
        }
    }

    #[test]
    fn coder_roundtrip_is_idempotent(seed in any::<u64>(), r in 3.0f64..15.0) {
        let spec = ProcessSpec::<f64>::alternating(1.5).unwrap();
        let cfg = CoderConfig::for_process(&spec, r, CoderMode::Destinations).unwrap();
        let x = spec.sample(&mut substream(seed, 0)).unwrap();
        let bits = encode_path(&x, &cfg).unwrap();
        let y = decode_path(&bits, &cfg).unwrap();
        prop_assert_eq!(encode_path(&y, &cfg).unwrap(), bits);
        let d = path_distortion(&x, &y, cfg.space()).unwrap();
        prop_assert!(d <= (x.jump_count() + 1) as f64 * 2.0);
    }

    #[test]
    fn corrupted_streams_never_panic(seed in any::<u64>(), flip in any::<prop::sample::Index>()) {
        let spec = ProcessSpec::<f64>::counting(2.0).unwrap();
        let cfg = CoderConfig::for_process(&spec, 6.0, CoderMode::Increments).unwrap();
        let x = spec.sample(&mut substream(seed, 1)).unwrap();
        let mut bits = encode_path(&x, &cfg).unwrap();
        bits.flip(flip.index(bits.len()));
        let _ = decode_path(&bits, &cfg);
    }
}
