//! Level-wise seasonal pattern mining.
//!
//! Level 1 extracts event supports with a partitioned map/reduce, gates them
//! on maxSeason and stores the candidates in [`Hlh1`]. Each level k ≥ 2 then
//! joins the level k−1 groups with the candidate events, gates the group
//! supports, finds candidate patterns (granule scan for k = 2, HLH₂-verified
//! extensions confirmed per granule for k ≥ 3) and extracts seasons.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use crate::error::MineError;
use crate::exec::{partition_db, sorted_union, Executor, ExecStats, Partition};
use crate::hlh::{build_hlh1, insert_pattern, EventCandidate, Hlh1, HlhK};
use crate::model::{
    EventId, EventInstance, Granule, MiningConfig, PatternResult, SequenceDatabase, SupportSet, TemporalPattern, Triple,
};
use crate::relations::{find_witness, relate};
use crate::seasonality::evaluate;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct MineOptions {
    /// Attach per-granule witness instances to every result.
    pub witnesses: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    pub k: usize,
    pub groups_generated: usize,
    pub candidate_groups: usize,
    /// Pattern proposals that reached granule confirmation.
    pub proposals: usize,
    /// Extensions abandoned because a proposed triple is missing from HLH₂.
    pub pruned_by_index: usize,
    pub candidate_patterns: usize,
    pub frequent_patterns: usize,
}

#[derive(Clone, Debug)]
pub struct MiningResult {
    pub config: MiningConfig,
    /// Every candidate pattern of every level, with its frequent flag,
    /// sorted by (k, events, triples).
    pub patterns: Vec<PatternResult>,
    pub levels: Vec<LevelStats>,
    pub hlh1: Hlh1,
    pub exec: ExecStats,
}

impl MiningResult {
    pub fn frequent(&self) -> impl Iterator<Item = &PatternResult> + '_ {
        self.patterns.iter().filter(|p| p.frequent)
    }

    pub fn find(&self, pattern: &TemporalPattern) -> Option<&PatternResult> {
        self.patterns.binary_search_by(|p| p.pattern.cmp(pattern)).ok().map(|i| &self.patterns[i])
    }
}

/// Granules (ascending) and flattened witness tuples of one key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
struct Occurrences {
    granules: Vec<Granule>,
    witnesses: Vec<u32>,
}

impl Occurrences {
    fn push(&mut self, g: Granule, witness: &[u32]) {
        self.granules.push(g);
        self.witnesses.extend_from_slice(witness);
    }

    /// Merge by granule. Partitions are disjoint so granules never collide.
    fn merge(self, other: Occurrences) -> Occurrences {
        let total = self.granules.len() + other.granules.len();
        if total == 0 {
            return self;
        }
        let k = (self.witnesses.len() + other.witnesses.len()) / total;
        let mut out = Occurrences { granules: Vec::with_capacity(total), witnesses: Vec::with_capacity(total * k) };
        let (mut i, mut j) = (0, 0);
        while i < self.granules.len() || j < other.granules.len() {
            let take_left = j >= other.granules.len() || (i < self.granules.len() && self.granules[i] <= other.granules[j]);
            if take_left {
                out.push(self.granules[i], &self.witnesses[i * k..(i + 1) * k]);
                i += 1;
            } else {
                out.push(other.granules[j], &other.witnesses[j * k..(j + 1) * k]);
                j += 1;
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
struct EventOccurrences {
    granules: Vec<Granule>,
    instances: Vec<EventInstance>,
}

impl EventOccurrences {
    fn merge(self, other: EventOccurrences) -> EventOccurrences {
        let mut instances = self.instances;
        instances.extend(other.instances);
        instances.sort_by_key(|i| (i.granule, i.canonical_key()));
        EventOccurrences { granules: sorted_union(self.granules, other.granules), instances }
    }
}

/// Result of the single-event level.
pub struct SingleEventLevel {
    /// Every candidate event as a 1-event pattern, with its frequent flag.
    pub results: Vec<PatternResult>,
    pub hlh1: Hlh1,
    pub stats: LevelStats,
}

/// Extract event supports, keep maxSeason candidates in HLH₁ and mark the
/// frequent seasonal ones.
pub fn mine_single_events(
    db: &SequenceDatabase,
    cfg: &MiningConfig,
    exec: &Executor,
    opts: MineOptions,
) -> Result<SingleEventLevel, MineError> {
    let parts = partition_db(db.len(), exec.partitions());
    let occurrences = exec.map_reduce(
        "events",
        &parts,
        |p| {
            let mut local: BTreeMap<EventId, EventOccurrences> = BTreeMap::new();
            for g in p.granules() {
                let seq = db.sequence(g).ok_or_else(|| format!("missing granule {g}"))?;
                for inst in &seq.instances {
                    let entry = local.entry(inst.event).or_default();
                    if entry.granules.last() != Some(&g) {
                        entry.granules.push(g);
                    }
                    entry.instances.push(*inst);
                }
            }
            Ok(local.into_iter().collect())
        },
        EventOccurrences::merge,
    )?;
    let total_events = occurrences.len();
    let candidates: Vec<EventCandidate> = occurrences
        .into_iter()
        .filter(|(_, occ)| cfg.is_candidate(occ.granules.len()))
        .map(|(event, occ)| EventCandidate {
            event,
            support: SupportSet::from_sorted_unchecked(occ.granules),
            instances: occ.instances,
        })
        .collect();
    let hlh1 = build_hlh1(candidates)?;
    let events: Vec<EventId> = hlh1.events().collect();
    let results = exec.par_map("events-seasons", &events, |&e| {
        let support = hlh1.support(e).expect("candidate").clone();
        let (seasons, frequent) = evaluate(&support, cfg);
        let witnesses = opts.witnesses.then(|| {
            support.iter().map(|g| (g, vec![hlh1.instances(e, g).expect("closure")[0]])).collect()
        });
        PatternResult { pattern: TemporalPattern::single(e), season_count: seasons.season_count(), support, seasons, frequent, witnesses }
    });
    let stats = LevelStats {
        k: 1,
        groups_generated: total_events,
        candidate_groups: hlh1.len(),
        candidate_patterns: hlh1.len(),
        frequent_patterns: results.iter().filter(|r| r.frequent).count(),
        ..Default::default()
    };
    Ok(SingleEventLevel { results, hlh1, stats })
}

/// Extend every (k−1)-group with each candidate event ordered after its last
/// event, so each k-set is produced exactly once.
pub fn generate_groups(prev: &[Vec<EventId>], singles: &[EventId]) -> Vec<Vec<EventId>> {
    let mut out = Vec::new();
    for prefix in prev {
        let last = *prefix.last().expect("non-empty group");
        for &e in singles {
            if e > last && !prefix.contains(&e) {
                let mut g = prefix.clone();
                g.push(e);
                out.push(g);
            }
        }
    }
    out
}

/// Previous level as seen by the group filter.
pub enum PrevLevel<'a> {
    Singles(&'a Hlh1),
    Groups(&'a HlhK),
}

impl PrevLevel<'_> {
    fn support(&self, tuple: &[EventId]) -> Option<&SupportSet> {
        match self {
            PrevLevel::Singles(h) => h.support(tuple[0]),
            PrevLevel::Groups(h) => h.group(tuple).map(|g| &g.support),
        }
    }

    fn tuples(&self) -> Vec<Vec<EventId>> {
        match self {
            PrevLevel::Singles(h) => h.events().map(|e| vec![e]).collect(),
            PrevLevel::Groups(h) => h.groups().map(|(t, _)| t.clone()).collect(),
        }
    }
}

/// Group support = prefix support ∩ new event support; keep candidates.
pub fn filter_candidate_groups(
    groups: &[Vec<EventId>],
    prev: &PrevLevel<'_>,
    hlh1: &Hlh1,
    cfg: &MiningConfig,
    exec: &Executor,
) -> Vec<(Vec<EventId>, SupportSet)> {
    exec.par_map("group-filter", groups, |g| {
        let (prefix, last) = g.split_at(g.len() - 1);
        let a = prev.support(prefix)?;
        let b = hlh1.support(last[0])?;
        let support = a.intersect(b);
        cfg.is_candidate(support.len()).then(|| (g.clone(), support))
    })
    .into_iter()
    .flatten()
    .collect()
}

/// A k-pattern proposed from a candidate (k−1)-pattern and HLH₂, with the
/// granules it can possibly occur in.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Proposal {
    pub pattern: TemporalPattern,
    pub bound: SupportSet,
}

/// Propose every extension of `prefix` by `event`, choosing the relation to
/// each prefix event from the last one back to the first. An extension is
/// abandoned as soon as its proposed triple is absent from HLH₂ or the
/// running support bound fails the candidate gate.
pub fn propose_extensions(
    prefix: &TemporalPattern,
    prefix_support: &SupportSet,
    event: EventId,
    group_support: &SupportSet,
    h2: &HlhK,
    cfg: &MiningConfig,
    pruned: &mut usize,
) -> Vec<Proposal> {
    let bound = prefix_support.intersect(group_support);
    let mut out = Vec::new();
    if !cfg.is_candidate(bound.len()) {
        return out;
    }
    let mut links = vec![Triple::new(crate::model::Relation::Follows, event, event); prefix.k()];
    extend_slot(prefix, event, prefix.k(), bound, h2, cfg, &mut links, &mut out, pruned);
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_slot(
    prefix: &TemporalPattern,
    event: EventId,
    remaining: usize,
    bound: SupportSet,
    h2: &HlhK,
    cfg: &MiningConfig,
    links: &mut Vec<Triple>,
    out: &mut Vec<Proposal>,
    pruned: &mut usize,
) {
    if remaining == 0 {
        out.push(Proposal { pattern: prefix.extend(event, links), bound });
        return;
    }
    let slot = remaining - 1;
    let other = prefix.events()[slot];
    for t in Triple::all_between(other, event) {
        let Some(pair_support) = h2.triple_support(&t) else {
            *pruned += 1;
            continue;
        };
        let narrowed = bound.intersect(pair_support);
        if !cfg.is_candidate(narrowed.len()) {
            *pruned += 1;
            continue;
        }
        links[slot] = t;
        extend_slot(prefix, event, slot, narrowed, h2, cfg, links, out, pruned);
    }
}

/// Find the candidate patterns of a level whose groups are already in `hk`.
/// Level 2 scans the group supports directly; higher levels verify
/// extensions against `h2` and confirm them per granule.
pub fn generate_candidate_patterns(
    db: &SequenceDatabase,
    hk: &mut HlhK,
    prev: Option<&HlhK>,
    h2: Option<&HlhK>,
    cfg: &MiningConfig,
    exec: &Executor,
    stats: &mut LevelStats,
) -> Result<(), MineError> {
    let parts = partition_db(db.len(), exec.partitions());
    let found: Vec<(TemporalPattern, Occurrences)> = if hk.k() == 2 {
        discover_pairs(db, hk, exec, &parts, stats)?
    } else {
        let prev = prev.expect("level k-1 index");
        let h2 = h2.expect("level 2 index");
        confirm_extensions(db, hk, prev, h2, cfg, exec, &parts, stats)?
    };
    for (pattern, occ) in found {
        if cfg.is_candidate(occ.granules.len()) {
            insert_pattern(hk, pattern, SupportSet::from_sorted_unchecked(occ.granules), occ.witnesses)?;
        }
    }
    stats.candidate_patterns = hk.pattern_count();
    Ok(())
}

fn discover_pairs(
    db: &SequenceDatabase,
    hk: &HlhK,
    exec: &Executor,
    parts: &[Partition],
    stats: &mut LevelStats,
) -> Result<Vec<(TemporalPattern, Occurrences)>, MineError> {
    let pairs: HashSet<(EventId, EventId)> = hk.groups().map(|(t, _)| (t[0], t[1])).collect();
    let pairs = exec.broadcast("candidate-pairs", pairs.into_iter().collect::<std::collections::BTreeSet<_>>());
    let triples = exec.map_reduce(
        "pairs",
        parts,
        |p| {
            let mut local: BTreeMap<Triple, Occurrences> = BTreeMap::new();
            let mut by_event: Vec<(EventId, u32)> = Vec::new();
            let mut seen: Vec<Triple> = Vec::new();
            for g in p.granules() {
                let seq = db.sequence(g).ok_or_else(|| format!("missing granule {g}"))?;
                by_event.clear();
                by_event.extend(seq.instances.iter().enumerate().map(|(i, inst)| (inst.event, i as u32)));
                by_event.sort_unstable();
                let runs: Vec<&[(EventId, u32)]> = by_event.chunk_by(|a, b| a.0 == b.0).collect();
                seen.clear();
                for (ai, a_run) in runs.iter().enumerate() {
                    for b_run in &runs[ai + 1..] {
                        if !pairs.contains(&(a_run[0].0, b_run[0].0)) {
                            continue;
                        }
                        for &(_, ia) in *a_run {
                            for &(_, ib) in *b_run {
                                let t = relate(&seq.instances[ia as usize], &seq.instances[ib as usize]);
                                if !seen.contains(&t) {
                                    seen.push(t);
                                    local.entry(t).or_default().push(g, &[ia, ib]);
                                }
                            }
                        }
                    }
                }
            }
            Ok(local.into_iter().collect())
        },
        Occurrences::merge,
    )?;
    stats.proposals = triples.len();
    Ok(triples.into_iter().map(|(t, occ)| (TemporalPattern::pair(t), occ)).collect())
}

#[allow(clippy::too_many_arguments)]
fn confirm_extensions(
    db: &SequenceDatabase,
    hk: &HlhK,
    prev: &HlhK,
    h2: &HlhK,
    cfg: &MiningConfig,
    exec: &Executor,
    parts: &[Partition],
    stats: &mut LevelStats,
) -> Result<Vec<(TemporalPattern, Occurrences)>, MineError> {
    let groups: Vec<(&Vec<EventId>, &SupportSet)> = hk.groups().map(|(t, g)| (t, &g.support)).collect();
    let per_group = exec.par_map("propose", &groups, |(tuple, support)| {
        let (prefix_events, last) = tuple.split_at(tuple.len() - 1);
        let mut pruned = 0;
        let mut out = Vec::new();
        if let Some(entry) = prev.group(prefix_events) {
            for prefix in &entry.patterns {
                let prefix_support = prev.pattern_support(prefix).expect("indexed pattern");
                out.extend(propose_extensions(prefix, prefix_support, last[0], support, h2, cfg, &mut pruned));
            }
        }
        (out, pruned)
    });
    let mut proposals = Vec::new();
    for (props, pruned) in per_group {
        stats.pruned_by_index += pruned;
        proposals.extend(props);
    }
    stats.proposals = proposals.len();
    let proposals = exec.broadcast(&format!("proposals-{}", hk.k()), proposals);
    let confirmed = exec.map_reduce(
        &format!("confirm-{}", hk.k()),
        parts,
        |p| {
            let mut local: Vec<(u32, Occurrences)> = Vec::new();
            for (id, prop) in proposals.iter().enumerate() {
                let mut occ = Occurrences::default();
                for &g in prop.bound.range(p.lo, p.hi) {
                    let seq = db.sequence(g).ok_or_else(|| format!("missing granule {g}"))?;
                    if let Some(w) = find_witness(seq, &prop.pattern) {
                        occ.push(g, &w);
                    }
                }
                if !occ.granules.is_empty() {
                    local.push((id as u32, occ));
                }
            }
            Ok(local)
        },
        Occurrences::merge,
    )?;
    Ok(confirmed.into_iter().map(|(id, occ)| (proposals[id as usize].pattern.clone(), occ)).collect())
}

/// Season extraction for every candidate pattern of a level.
pub fn filter_frequent_patterns(
    db: &SequenceDatabase,
    hk: &HlhK,
    cfg: &MiningConfig,
    exec: &Executor,
    opts: MineOptions,
) -> Vec<PatternResult> {
    let entries: Vec<(&TemporalPattern, &SupportSet)> = hk.patterns().map(|(p, e)| (p, &e.support)).collect();
    exec.par_map(&format!("seasons-{}", hk.k()), &entries, |(pattern, support)| {
        let (seasons, frequent) = evaluate(support, cfg);
        let witnesses = opts.witnesses.then(|| {
            support.iter().map(|g| (g, hk.witness_instances(db, pattern, g).expect("closure"))).collect()
        });
        PatternResult {
            pattern: (*pattern).clone(),
            support: (*support).clone(),
            season_count: seasons.season_count(),
            seasons,
            frequent,
            witnesses,
        }
    })
}

pub fn mine(db: &SequenceDatabase, cfg: &MiningConfig, exec: &Executor) -> Result<MiningResult, MineError> {
    mine_with(db, cfg, exec, MineOptions::default())
}

pub fn mine_with(db: &SequenceDatabase, cfg: &MiningConfig, exec: &Executor, opts: MineOptions) -> Result<MiningResult, MineError> {
    let single = mine_single_events(db, cfg, exec, opts)?;
    let mut patterns = single.results;
    let mut levels = vec![single.stats];
    let hlh1 = single.hlh1;
    let singles: Vec<EventId> = hlh1.events().collect();

    let mut h2: Option<HlhK> = None;
    let mut prev: Option<HlhK> = None;
    for k in 2..=cfg.max_k {
        let prev_level = match &prev {
            None => PrevLevel::Singles(&hlh1),
            Some(h) => PrevLevel::Groups(h),
        };
        let groups = generate_groups(&prev_level.tuples(), &singles);
        let mut stats = LevelStats { k, groups_generated: groups.len(), ..Default::default() };
        let kept = filter_candidate_groups(&groups, &prev_level, &hlh1, cfg, exec);
        stats.candidate_groups = kept.len();
        let mut hk = HlhK::new(k);
        for (tuple, support) in kept {
            hk.insert_group(tuple, support);
        }
        generate_candidate_patterns(db, &mut hk, prev.as_ref(), h2.as_ref().or(prev.as_ref().filter(|p| p.k() == 2)), cfg, exec, &mut stats)?;
        let results = filter_frequent_patterns(db, &hk, cfg, exec, opts);
        stats.frequent_patterns = results.iter().filter(|r| r.frequent).count();
        patterns.extend(results);
        levels.push(stats);
        let exhausted = hk.pattern_count() == 0;
        if k == 2 {
            h2 = Some(hk.clone());
        }
        prev = Some(hk);
        if exhausted {
            break;
        }
    }
    patterns.sort_by(|a, b| a.pattern.cmp(&b.pattern));
    Ok(MiningResult { config: cfg.clone(), patterns, levels, hlh1, exec: exec.stats() })
}
