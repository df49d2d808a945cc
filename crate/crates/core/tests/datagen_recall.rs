mod common;

use stpm::datagen::{generate, GenSpec, PlantSpec};
use stpm::{mine, Executor, MiningConfig, TemporalPattern};

#[test]
fn planted_follows_pattern_is_frequent() {
    let spec = GenSpec {
        granules: 60,
        series_count: 4,
        alphabet_size: 3,
        noise_density: 0.4,
        granule_span: 60,
        planted: vec![PlantSpec { pattern: "A:1 > B:1".into(), season_starts: vec![10, 40], season_length: 5, period_within: 1 }],
    };
    for seed in 0..10 {
        let db = generate(&spec, seed).unwrap();
        let cfg = MiningConfig::new(1, 5, 2, 26, 26).unwrap().with_max_k(2);
        let result = mine(&db, &cfg, &Executor::new(2, 4)).unwrap();
        let p = TemporalPattern::parse("A:1 > B:1", &db.symbols).unwrap();
        let r = result.find(&p).unwrap();
        assert!(r.frequent, "seed {seed}");
        assert_eq!(r.support.positions(), [10, 11, 12, 13, 14, 40, 41, 42, 43, 44]);
    }
}

#[test]
fn noisy_recall_keeps_planted_granules() {
    for seed in 0..15 {
        let mut case = common::planted_case(seed);
        case.spec.noise_density = 0.5;
        let db = generate(&case.spec, seed).unwrap();
        let result = mine(&db, &case.cfg, &Executor::new(3, 5)).unwrap();
        for (p, seasons) in &case.expected {
            let pattern = TemporalPattern::parse(p, &db.symbols).unwrap();
            let r = result.find(&pattern).unwrap_or_else(|| panic!("seed {seed}: {p} missing"));
            let planted: Vec<u32> = seasons.concat();
            assert_eq!(r.support.positions(), planted, "noise never reuses planted symbols");
            assert!(r.frequent);
        }
    }
}
