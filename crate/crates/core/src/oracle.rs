//! Brute-force reference miner for small databases.
//!
//! Shares only the data types with the real miner: the pairwise relation
//! rule, support computation and season logic are re-derived here directly
//! from their definitions, and nothing is pruned. Every pattern realized in
//! some granule is enumerated, so the output is the full candidate set.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::OracleError;
use crate::model::{
    EventId, EventInstance, Granule, MiningConfig, PatternResult, Relation, SeasonSet, SequenceDatabase, SupportSet,
    TemporalPattern, Triple,
};

pub const MAX_GRANULES: usize = 200;
pub const MAX_SERIES: usize = 8;

/// Relation between two instances of different events, oriented.
fn oracle_relation(x: &EventInstance, y: &EventInstance) -> Triple {
    let (xs, xe, ys, ye) = (x.interval.start, x.interval.end, y.interval.start, y.interval.end);
    if xe <= ys {
        return Triple::new(Relation::Follows, x.event, y.event);
    }
    if ye <= xs {
        return Triple::new(Relation::Follows, y.event, x.event);
    }
    if xs == ys && xe == ye {
        let (hi, lo) = if x.event < y.event { (x, y) } else { (y, x) };
        return Triple::new(Relation::Contains, hi.event, lo.event);
    }
    if xs <= ys && ye <= xe {
        return Triple::new(Relation::Contains, x.event, y.event);
    }
    if ys <= xs && xe <= ye {
        return Triple::new(Relation::Contains, y.event, x.event);
    }
    if xs < ys {
        Triple::new(Relation::Overlaps, x.event, y.event)
    } else {
        Triple::new(Relation::Overlaps, y.event, x.event)
    }
}

/// Pattern realized by a set of instances of pairwise distinct events.
fn realized(instances: &[&EventInstance]) -> TemporalPattern {
    let mut sorted: Vec<&EventInstance> = instances.to_vec();
    sorted.sort_by_key(|i| i.event);
    let events: Vec<EventId> = sorted.iter().map(|i| i.event).collect();
    let mut triples = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            triples.push(oracle_relation(sorted[i], sorted[j]));
        }
    }
    TemporalPattern::new(events, triples).expect("distinct sorted events")
}

fn combinations<'a>(
    pool: &'a [EventInstance],
    from: usize,
    k: usize,
    chosen: &mut Vec<&'a EventInstance>,
    out: &mut BTreeSet<TemporalPattern>,
) {
    if chosen.len() == k {
        out.insert(realized(chosen));
        return;
    }
    for n in from..pool.len() {
        if chosen.iter().any(|c| c.event == pool[n].event) {
            continue;
        }
        chosen.push(&pool[n]);
        combinations(pool, n + 1, k, chosen, out);
        chosen.pop();
    }
}

fn seasons_of(sup: &SupportSet, cfg: &MiningConfig) -> (SeasonSet, bool) {
    let mut near: Vec<Vec<Granule>> = Vec::new();
    for g in sup.iter() {
        match near.last_mut() {
            Some(set) if g.0 - set.last().unwrap().0 <= cfg.max_period => set.push(g),
            _ => near.push(vec![g]),
        }
    }
    let accepted: Vec<usize> = (0..near.len()).filter(|&i| near[i].len() as u32 >= cfg.min_density).collect();
    let mut frequent = accepted.len() as u32 >= cfg.min_season;
    for w in accepted.windows(2) {
        let gap = near[w[1]][0].0 - near[w[0]].last().unwrap().0;
        frequent &= gap >= cfg.dist_min && gap <= cfg.dist_max;
    }
    let near_sets = near.into_iter().map(|v| SupportSet::new(v).expect("ascending")).collect();
    (SeasonSet { near_sets, accepted }, frequent)
}

/// Every pattern with at most `max_k` events whose support reaches the
/// candidate threshold, with seasons and frequency, sorted by pattern.
pub fn brute_force_mine(db: &SequenceDatabase, cfg: &MiningConfig, max_k: usize) -> Result<Vec<PatternResult>, OracleError> {
    if db.len() > MAX_GRANULES || db.series.len() > MAX_SERIES {
        return Err(OracleError::CapExceeded {
            granules: db.len(),
            series: db.series.len(),
            max_granules: MAX_GRANULES,
            max_series: MAX_SERIES,
        });
    }
    let mut supports: BTreeMap<TemporalPattern, Vec<Granule>> = BTreeMap::new();
    for seq in &db.sequences {
        let mut here = BTreeSet::new();
        for k in 1..=max_k {
            combinations(&seq.instances, 0, k, &mut Vec::new(), &mut here);
        }
        for p in here {
            supports.entry(p).or_default().push(seq.granule);
        }
    }
    let threshold = if cfg.candidate_gate { (cfg.min_season * cfg.min_density) as usize } else { 1 };
    Ok(supports
        .into_iter()
        .filter(|(_, granules)| granules.len() >= threshold)
        .map(|(pattern, granules)| {
            let support = SupportSet::from_unsorted(granules);
            let (seasons, frequent) = seasons_of(&support, cfg);
            let season_count = seasons.accepted.len();
            PatternResult { pattern, support, seasons, season_count, frequent, witnesses: None }
        })
        .collect())
}

/// Granules in which some assignment of instances realizes `pattern`.
pub fn pattern_support(db: &SequenceDatabase, pattern: &TemporalPattern) -> SupportSet {
    fn search<'a>(
        pools: &[Vec<&'a EventInstance>],
        chosen: &mut Vec<&'a EventInstance>,
        target: &TemporalPattern,
    ) -> bool {
        if chosen.len() == pools.len() {
            return realized(chosen) == *target;
        }
        for inst in &pools[chosen.len()] {
            chosen.push(inst);
            if search(pools, chosen, target) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    db.sequences
        .iter()
        .filter(|seq| {
            let pools: Vec<Vec<&EventInstance>> =
                pattern.events().iter().map(|e| seq.instances.iter().filter(|i| i.event == *e).collect()).collect();
            search(&pools, &mut Vec::new(), pattern)
        })
        .map(|seq| seq.granule)
        .collect()
}

/// Human-readable differences between two result lists (ignoring witnesses).
pub fn diff_results(db: &SequenceDatabase, got: &[PatternResult], want: &[PatternResult]) -> Vec<String> {
    let name = |p: &TemporalPattern| p.display(&db.symbols);
    fn index(rs: &[PatternResult]) -> BTreeMap<&TemporalPattern, &PatternResult> {
        rs.iter().map(|r| (&r.pattern, r)).collect()
    }
    let (got, want) = (index(got), index(want));
    let mut out = Vec::new();
    for (p, w) in &want {
        match got.get(*p) {
            None => out.push(format!("missing {}", name(p))),
            Some(g) => {
                if g.support != w.support {
                    out.push(format!("{}: support {:?} != {:?}", name(p), g.support.positions(), w.support.positions()));
                } else if g.seasons != w.seasons || g.season_count != w.season_count || g.frequent != w.frequent {
                    out.push(format!("{}: seasons/frequency differ", name(p)));
                }
            }
        }
    }
    out.extend(got.keys().filter(|p| !want.contains_key(*p)).map(|p| format!("unexpected {}", name(p))));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventSymbol, SymbolTable, TemporalSequence};

    fn db(rows: &[&[(u32, i64, i64)]]) -> SequenceDatabase {
        let symbols = SymbolTable::new(vec![EventSymbol::new(0, "A", "1"), EventSymbol::new(1, "B", "1"), EventSymbol::new(2, "C", "1")]);
        let sequences = rows
            .iter()
            .enumerate()
            .map(|(n, r)| {
                let g = Granule(n as u32 + 1);
                TemporalSequence::new(g, r.iter().map(|&(e, s, t)| EventInstance::new(EventId(e), s, t, g)).collect())
            })
            .collect();
        SequenceDatabase {
            series: vec!["A".into(), "B".into(), "C".into()],
            granule_span: 10,
            origin: 0,
            tick_unit: "minute".into(),
            symbols,
            sequences,
        }
    }

    #[test]
    fn relation_cases() {
        let i = |e, s, t| EventInstance::new(EventId(e), s, t, Granule(1));
        assert_eq!(oracle_relation(&i(1, 5, 8), &i(0, 0, 5)), Triple::new(Relation::Follows, EventId(0), EventId(1)));
        assert_eq!(oracle_relation(&i(1, 0, 5), &i(0, 0, 5)), Triple::new(Relation::Contains, EventId(0), EventId(1)));
        assert_eq!(oracle_relation(&i(0, 0, 3), &i(1, 0, 5)), Triple::new(Relation::Contains, EventId(1), EventId(0)));
        assert_eq!(oracle_relation(&i(1, 2, 6), &i(0, 0, 4)), Triple::new(Relation::Overlaps, EventId(0), EventId(1)));
    }

    #[test]
    fn enumerates_every_realized_pattern() {
        // A before B in one instance pairing, A overlapping B in another
        let d = db(&[&[(0, 0, 4), (0, 5, 9), (1, 3, 7)]]);
        let cfg = MiningConfig::new(1, 1, 1, 0, 5).unwrap();
        let all = brute_force_mine(&d, &cfg, 2).unwrap();
        let pairs: Vec<_> = all.iter().filter(|r| r.pattern.k() == 2).map(|r| r.pattern.triples()[0]).collect();
        assert_eq!(pairs.len(), 2);
        assert!(pairs.contains(&Triple::new(Relation::Overlaps, EventId(0), EventId(1))));
        assert!(pairs.contains(&Triple::new(Relation::Overlaps, EventId(1), EventId(0))));
        for r in &all {
            assert_eq!(pattern_support(&d, &r.pattern), r.support);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let rows: Vec<&[(u32, i64, i64)]> = vec![&[]; MAX_GRANULES + 1];
        let cfg = MiningConfig::new(1, 1, 1, 0, 5).unwrap();
        assert!(matches!(brute_force_mine(&db(&rows), &cfg, 2), Err(OracleError::CapExceeded { .. })));
    }
}
