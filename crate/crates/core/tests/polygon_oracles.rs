use mdlac::imaging::{flip_noise, rasterize_polygon, seeded_rng, BinaryImage, NoiseConfig, Point};
use mdlac::polygon::{bss_full_path, bss_simplify, PolygonHypothesis, PolygonScorer};
use mdlac::score::Criterion;
use proptest::prelude::*;
use rand::Rng;

const W: usize = 48;

fn noisy_shape(seed: u64, nv: usize, delta: f64) -> Option<(BinaryImage, PolygonHypothesis)> {
    let mut rng = seeded_rng(seed, 7);
    let c = (W as f64 - 1.0) / 2.0;
    let mut verts = Vec::with_capacity(nv);
    for i in 0..nv {
        let a = std::f64::consts::TAU * (i as f64 + rng.gen_range(-0.3..0.3)) / nv as f64;
        let r = rng.gen_range(8.0..20.0);
        verts.push(Point::new(
            (c + r * a.cos()).round(),
            (c + r * a.sin()).round(),
        ));
    }
    let mask = rasterize_polygon(&verts, W, W).ok()?;
    let px = mask.members().iter().map(|&m| u8::from(m)).collect();
    let clean = BinaryImage::from_pixels(W, W, px).ok()?;
    let img = flip_noise(&clean, &NoiseConfig::new(delta, seed).ok()?);
    Some((img, PolygonHypothesis::new(verts).ok()?))
}

fn key(s: &mdlac::score::Score, c: Criterion) -> f64 {
    match c {
        Criterion::Mdl => s.mdl_bits,
        Criterion::Nfa => s.log2_nfa,
    }
}

/// Scores of every order-preserving vertex subset of size >= 3.
fn exhaustive(scorer: &PolygonScorer, poly: &PolygonHypothesis, c: Criterion) -> Vec<f64> {
    let v = poly.vertices();
    let m = v.len();
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() >= 3)
        .filter_map(|mask| {
            let sub: Vec<Point> = (0..m)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| v[i])
                .collect();
            let p = PolygonHypothesis::new(sub).ok()?;
            scorer.score(&p).ok().map(|s| key(&s, c))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn greedy_result_is_a_valid_subset_no_worse_than_start(
        seed in any::<u64>(),
        nv in 4usize..=8,
        delta in 0.05f64..0.4,
    ) {
        let Some((img, poly)) = noisy_shape(seed, nv, delta) else { return Ok(()); };
        let scorer = PolygonScorer::new(&img);
        for crit in [Criterion::Mdl, Criterion::Nfa] {
            let t = bss_simplify(&img, &poly, crit).unwrap();
            let chosen = key(&t.chosen_step().score, crit);
            let all = exhaustive(&scorer, &poly, crit);
            let best = all.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(all.contains(&chosen));
            prop_assert!(chosen >= best);
            prop_assert!(chosen <= key(&t.steps[0].score, crit));
        }
    }

    #[test]
    fn trajectories_are_monotone_and_finite(seed in any::<u64>(), nv in 5usize..=12, delta in 0.05f64..0.45) {
        let Some((img, poly)) = noisy_shape(seed, nv, delta) else { return Ok(()); };
        for crit in [Criterion::Mdl, Criterion::Nfa] {
            let t = bss_simplify(&img, &poly, crit).unwrap();
            for w in t.steps.windows(2) {
                prop_assert!(key(&w[1].score, crit) < key(&w[0].score, crit));
                prop_assert_eq!(w[1].polygon.vertex_count() + 1, w[0].polygon.vertex_count());
            }
            prop_assert_eq!(t.chosen, t.steps.len() - 1);
            let full = bss_full_path(&img, &poly, crit).unwrap();
            for s in &full.steps {
                prop_assert!(s.score.mdl_bits.is_finite() && s.score.log2_nfa.is_finite());
            }
            let min = full.curve().iter().map(|&(_, v)| v).fold(f64::INFINITY, f64::min);
            prop_assert_eq!(key(&full.chosen_step().score, crit), min);
        }
    }
}
