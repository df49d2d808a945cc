//! Seeded synthetic databases with planted seasonal patterns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::GenError;
use crate::model::{
    EventId, EventInstance, EventSymbol, Granule, SequenceDatabase, SymbolTable, TemporalPattern, TemporalSequence,
};
use crate::relations::relate;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantSpec {
    /// Pattern in display syntax, e.g. `"A:1 -> B:1"`.
    pub pattern: String,
    /// First granule of each season.
    pub season_starts: Vec<u32>,
    /// Granules per season.
    pub season_length: u32,
    /// Gap between consecutive granules inside a season.
    #[serde(default = "one")]
    pub period_within: u32,
}

fn one() -> u32 {
    1
}

fn default_span() -> i64 {
    60
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub granules: u32,
    pub series_count: u32,
    pub alphabet_size: u32,
    /// Probability that a series carries a noise instance in a granule.
    pub noise_density: f64,
    #[serde(default = "default_span")]
    pub granule_span: i64,
    #[serde(default)]
    pub planted: Vec<PlantSpec>,
}

impl PlantSpec {
    /// The granules the pattern is planted in, per season.
    pub fn seasons(&self) -> Vec<Vec<u32>> {
        self.season_starts
            .iter()
            .map(|&s| (0..self.season_length).map(|i| s + i * self.period_within).collect())
            .collect()
    }
}

/// Spreadsheet-style names: A..Z, AA, AB, ...
pub fn series_name(mut index: u32) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'A' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

/// Offsets `(start, end)` on the grid `0..=2k` realizing `pattern`, found by
/// backtracking over endpoint choices.
fn realize(pattern: &TemporalPattern) -> Option<Vec<(i64, i64)>> {
    fn go(p: &TemporalPattern, grid: i64, chosen: &mut Vec<(i64, i64)>) -> bool {
        let j = chosen.len();
        if j == p.k() {
            return true;
        }
        for s in 0..grid {
            for e in s + 1..=grid {
                let y = EventInstance::new(p.events()[j], s, e, Granule(1));
                let ok = (0..j).all(|i| {
                    let x = EventInstance::new(p.events()[i], chosen[i].0, chosen[i].1, Granule(1));
                    relate(&x, &y) == *p.triple(i, j)
                });
                if ok {
                    chosen.push((s, e));
                    if go(p, grid, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
        }
        false
    }
    let mut chosen = Vec::new();
    go(pattern, 2 * pattern.k() as i64, &mut chosen).then_some(chosen)
}

struct Planted {
    pattern: TemporalPattern,
    offsets: Vec<(i64, i64)>,
    granules: Vec<u32>,
}

fn check_plant(plant: &PlantSpec, spec: &GenSpec, symbols: &SymbolTable) -> Result<Planted, GenError> {
    let geometry = |msg: String| GenError::Geometry { pattern: plant.pattern.clone(), msg };
    let pattern = TemporalPattern::parse(&plant.pattern, symbols)?;
    if plant.season_starts.is_empty() || plant.season_length == 0 || plant.period_within == 0 {
        return Err(geometry("needs at least one season, a positive season length and period".into()));
    }
    let seasons = plant.seasons();
    let last = *seasons.last().and_then(|s| s.last()).expect("non-empty");
    if last > spec.granules {
        return Err(geometry(format!("season ends at granule {last}, database has {}", spec.granules)));
    }
    if plant.season_starts[0] == 0 {
        return Err(geometry("granule positions start at 1".into()));
    }
    if seasons.windows(2).any(|w| w[1][0] <= *w[0].last().unwrap()) {
        return Err(geometry("seasons must be increasing and disjoint".into()));
    }
    let scale = spec.granule_span / (2 * pattern.k() as i64);
    if scale == 0 {
        return Err(geometry(format!("granule_span {} too small for {} events", spec.granule_span, pattern.k())));
    }
    let offsets = realize(&pattern)
        .ok_or_else(|| geometry("relations are not jointly realizable".into()))?
        .into_iter()
        .map(|(s, e)| (s * scale, e * scale))
        .collect();
    Ok(Planted { pattern, offsets, granules: seasons.concat() })
}

/// Generate a database for `spec`; identical `(spec, seed)` gives identical output.
pub fn generate(spec: &GenSpec, seed: u64) -> Result<SequenceDatabase, GenError> {
    if spec.granules == 0 || spec.series_count == 0 || spec.alphabet_size == 0 {
        return Err(GenError::Degenerate("granules, series_count and alphabet_size must be positive".into()));
    }
    if !(0.0..=1.0).contains(&spec.noise_density) {
        return Err(GenError::Degenerate(format!("noise_density {} outside [0, 1]", spec.noise_density)));
    }
    if spec.noise_density == 0.0 && spec.planted.is_empty() {
        return Err(GenError::Degenerate("no noise and no planted patterns".into()));
    }
    if spec.granule_span <= 0 {
        return Err(GenError::Degenerate("granule_span must be positive".into()));
    }
    let series: Vec<String> = (0..spec.series_count).map(series_name).collect();
    let symbols = SymbolTable::new(
        series
            .iter()
            .enumerate()
            .flat_map(|(i, s)| (0..spec.alphabet_size).map(move |v| EventSymbol::new(i as u32, s.clone(), v.to_string())))
            .collect(),
    );
    let planted = spec.planted.iter().map(|p| check_plant(p, spec, &symbols)).collect::<Result<Vec<_>, _>>()?;
    let reserved: Vec<EventId> = planted.iter().flat_map(|p| p.pattern.events().iter().copied()).collect();
    let noise_pool: Vec<Vec<EventId>> = (0..series.len())
        .map(|i| {
            symbols.iter().filter(|(id, s)| s.series_index as usize == i && !reserved.contains(id)).map(|(id, _)| id).collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let span = spec.granule_span;
    let width = (span / 4).max(1);
    let mut sequences = Vec::with_capacity(spec.granules as usize);
    for pos in 1..=spec.granules {
        let g = Granule(pos);
        let lo = span * (pos as i64 - 1);
        let mut instances = Vec::new();
        for p in &planted {
            if p.granules.binary_search(&pos).is_ok() {
                for (e, (s, t)) in p.pattern.events().iter().zip(&p.offsets) {
                    instances.push(EventInstance::new(*e, lo + s, lo + t, g));
                }
            }
        }
        for pool in &noise_pool {
            if spec.noise_density > 0.0 && rng.gen_bool(spec.noise_density) && !pool.is_empty() {
                let e = pool[rng.gen_range(0..pool.len())];
                let start = lo + rng.gen_range(0..=span - width);
                instances.push(EventInstance::new(e, start, start + width, g));
            }
        }
        sequences.push(TemporalSequence::new(g, instances));
    }
    Ok(SequenceDatabase { series, granule_span: span, origin: 0, tick_unit: "minute".into(), symbols, sequences })
}
