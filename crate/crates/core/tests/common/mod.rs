#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stpm::datagen::{series_name, GenSpec, PlantSpec};
use stpm::ingest::{symbolize, RawSeries, SeriesBins, SymbolizationSpec};
use stpm::relations::relate;
use stpm::{EventId, EventInstance, Granule, MiningConfig, SequenceDatabase, SymbolTable, TemporalPattern};

/// Small random binary database plus random thresholds, for oracle comparison.
pub fn random_case(seed: u64) -> (SequenceDatabase, MiningConfig) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let granules = rng.gen_range(8..=60);
    let series = rng.gen_range(1..=6);
    let span = rng.gen_range(3..=8i64);
    let raw: Vec<RawSeries> = (0..series)
        .map(|s| {
            let mut samples = Vec::new();
            let mut value = rng.gen_bool(0.5);
            for g in 0..granules {
                let regime = rng.gen_range(0..10);
                for t in 0..span {
                    value = match regime {
                        0..=2 => false,
                        3..=4 => true,
                        _ if rng.gen_bool(0.3) => !value,
                        _ => value,
                    };
                    samples.push((g * span + t, value as u8 as f64));
                }
            }
            RawSeries { name: series_name(s as u32), samples }
        })
        .collect();
    let spec = SymbolizationSpec {
        granule_span: span,
        origin: Some(0),
        tick_unit: "minute".into(),
        strict: true,
        series: raw
            .iter()
            .map(|r| SeriesBins { name: r.name.clone(), edges: vec![0.5], labels: vec!["0".into(), "1".into()], bounds: Some((0.0, 1.0)) })
            .collect(),
    };
    let db = symbolize(&raw, &spec).expect("generated series symbolize");
    let dist_min = rng.gen_range(1..=6);
    let cfg = MiningConfig::new(
        rng.gen_range(1..=4),
        rng.gen_range(2..=4),
        rng.gen_range(1..=3),
        dist_min,
        dist_min + rng.gen_range(0..=20),
    )
    .unwrap();
    (db, cfg)
}

pub struct PlantedCase {
    pub spec: GenSpec,
    pub cfg: MiningConfig,
    /// Planted pattern strings with their expected season granules.
    pub expected: Vec<(String, Vec<Vec<u32>>)>,
}

fn symbols_for(series_count: u32, alphabet: u32) -> SymbolTable {
    SymbolTable::new(
        (0..series_count)
            .flat_map(|s| (0..alphabet).map(move |v| stpm::EventSymbol::new(s, series_name(s), v.to_string())))
            .collect(),
    )
}

/// A noise-free generator spec with 1..=3 planted patterns over disjoint
/// events, sharing one season geometry, plus thresholds that isolate it.
pub fn planted_case(seed: u64) -> PlantedCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let series_count = rng.gen_range(4..=8);
    let alphabet = rng.gen_range(2..=3);
    let symbols = symbols_for(series_count, alphabet);
    let mut pool: Vec<EventId> = symbols.ids().collect();

    let period = rng.gen_range(1..=2u32);
    let season_length = rng.gen_range(2..=5u32);
    let seasons = rng.gen_range(2..=4usize);
    let gap = period + rng.gen_range(2..=10u32);
    let mut starts = vec![rng.gen_range(1..=10u32)];
    for _ in 1..seasons {
        let prev_end = starts.last().unwrap() + (season_length - 1) * period;
        starts.push(prev_end + gap);
    }
    let granules = starts.last().unwrap() + (season_length - 1) * period + rng.gen_range(0..=10);

    let mut planted = Vec::new();
    let mut expected = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let k = rng.gen_range(2..=3usize).min(pool.len());
        if k < 2 {
            break;
        }
        let mut events: Vec<EventId> = (0..k).map(|_| pool.swap_remove(rng.gen_range(0..pool.len()))).collect();
        events.sort();
        let inst: Vec<EventInstance> = events
            .iter()
            .map(|e| {
                let s = rng.gen_range(0..6);
                EventInstance::new(*e, s, s + rng.gen_range(1..=6), Granule(1))
            })
            .collect();
        let mut triples = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                triples.push(relate(&inst[i], &inst[j]));
            }
        }
        let pattern = TemporalPattern::new(events, triples).unwrap().display(&symbols);
        let plant = PlantSpec { pattern: pattern.clone(), season_starts: starts.clone(), season_length, period_within: period };
        expected.push((pattern, plant.seasons()));
        planted.push(plant);
    }
    let spec = GenSpec { granules, series_count, alphabet_size: alphabet, noise_density: 0.0, granule_span: 60, planted };
    let cfg = MiningConfig::new(period, season_length, seasons as u32, gap, gap).unwrap().with_max_k(3);
    PlantedCase { spec, cfg, expected }
}
