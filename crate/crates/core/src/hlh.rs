//! Hierarchical lookup hash indexes.
//!
//! [`Hlh1`] holds candidate single events: `EH` maps an event to its support
//! set, `GH` maps `(event, granule)` to the event's instances there.
//! [`HlhK`] holds one level k ≥ 2: `EHk` maps an event tuple to the group
//! support and its candidate patterns, `PHk` maps a pattern to its support, and
//! the `GHk` witness tuple of `(pattern, granule)` is kept next to the pattern
//! support, aligned position by position.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::IndexError;
use crate::model::{EventId, EventInstance, Granule, SequenceDatabase, SupportSet, SymbolTable, TemporalPattern, Triple};

/// One candidate single event offered to [`build_hlh1`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventCandidate {
    pub event: EventId,
    pub support: SupportSet,
    /// All instances of the event, ordered by granule then canonical order.
    pub instances: Vec<EventInstance>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Hlh1 {
    eh: BTreeMap<EventId, SupportSet>,
    gh: BTreeMap<(EventId, Granule), Vec<EventInstance>>,
}

pub fn build_hlh1(candidates: Vec<EventCandidate>) -> Result<Hlh1, IndexError> {
    let mut index = Hlh1::default();
    for c in candidates {
        if index.eh.contains_key(&c.event) {
            return Err(IndexError::DuplicateEvent(format!("#{}", c.event.0)));
        }
        let mut per_granule: BTreeMap<Granule, Vec<EventInstance>> = BTreeMap::new();
        for inst in c.instances {
            if inst.event != c.event {
                return Err(IndexError::WitnessMismatch(format!("#{}", c.event.0)));
            }
            per_granule.entry(inst.granule).or_default().push(inst);
        }
        if !per_granule.keys().copied().eq(c.support.iter()) {
            return Err(IndexError::WitnessMismatch(format!("#{}", c.event.0)));
        }
        for (g, list) in per_granule {
            index.gh.insert((c.event, g), list);
        }
        index.eh.insert(c.event, c.support);
    }
    Ok(index)
}

impl Hlh1 {
    pub fn len(&self) -> usize {
        self.eh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eh.is_empty()
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        self.eh.keys().copied()
    }

    pub fn contains(&self, event: EventId) -> bool {
        self.eh.contains_key(&event)
    }

    pub fn support(&self, event: EventId) -> Option<&SupportSet> {
        self.eh.get(&event)
    }

    pub fn instances(&self, event: EventId, granule: Granule) -> Option<&[EventInstance]> {
        self.gh.get(&(event, granule)).map(Vec::as_slice)
    }

    /// Every granule referenced by GH belongs to the owning support set and vice versa.
    pub fn check_closure(&self) -> bool {
        let gh_count = self.gh.len();
        let eh_count: usize = self.eh.values().map(SupportSet::len).sum();
        gh_count == eh_count
            && self.gh.keys().all(|(e, g)| self.eh.get(e).is_some_and(|s| s.contains(*g)))
    }

    pub fn dump(&self, symbols: &SymbolTable) -> Value {
        let eh: serde_json::Map<String, Value> =
            self.eh.iter().map(|(e, s)| (symbols.label(*e), json!(s.positions()))).collect();
        let mut gh = serde_json::Map::new();
        for ((e, g), list) in &self.gh {
            let spans: Vec<Value> = list.iter().map(|i| json!([i.interval.start, i.interval.end])).collect();
            gh.insert(format!("{}@{}", symbols.label(*e), g), Value::Array(spans));
        }
        json!({ "EH": eh, "GH": gh })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupEntry {
    pub support: SupportSet,
    pub patterns: Vec<TemporalPattern>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternEntry {
    pub support: SupportSet,
    /// k instance indices (into the granule's sequence) per support granule.
    witnesses: Vec<u32>,
}

impl PatternEntry {
    pub fn witness_at(&self, position: usize, k: usize) -> &[u32] {
        &self.witnesses[position * k..(position + 1) * k]
    }
}

/// One level (k ≥ 2) of the hierarchical index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HlhK {
    k: usize,
    groups: BTreeMap<Vec<EventId>, GroupEntry>,
    patterns: BTreeMap<TemporalPattern, PatternEntry>,
}

impl HlhK {
    pub fn new(k: usize) -> Self {
        Self { k, groups: BTreeMap::new(), patterns: BTreeMap::new() }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn insert_group(&mut self, tuple: Vec<EventId>, support: SupportSet) {
        debug_assert_eq!(tuple.len(), self.k);
        self.groups.insert(tuple, GroupEntry { support, patterns: Vec::new() });
    }

    pub fn groups(&self) -> impl Iterator<Item = (&Vec<EventId>, &GroupEntry)> + '_ {
        self.groups.iter()
    }

    pub fn group(&self, tuple: &[EventId]) -> Option<&GroupEntry> {
        self.groups.get(tuple)
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> impl Iterator<Item = (&TemporalPattern, &PatternEntry)> + '_ {
        self.patterns.iter()
    }

    pub fn pattern_support(&self, p: &TemporalPattern) -> Option<&SupportSet> {
        self.patterns.get(p).map(|e| &e.support)
    }

    /// GHk lookup: witness instance indices of `p` at granule `g`.
    pub fn witness(&self, p: &TemporalPattern, g: Granule) -> Option<&[u32]> {
        let entry = self.patterns.get(p)?;
        let pos = entry.support.position_of(g)?;
        Some(entry.witness_at(pos, self.k))
    }

    /// Resolve the witness of `p` at `g` into instances of `db`.
    pub fn witness_instances(&self, db: &SequenceDatabase, p: &TemporalPattern, g: Granule) -> Option<Vec<EventInstance>> {
        let seq = db.sequence(g)?;
        Some(self.witness(p, g)?.iter().map(|&i| seq.instances[i as usize]).collect())
    }

    /// Support of the 2-event pattern made of `t` (level 2 only).
    pub fn triple_support(&self, t: &Triple) -> Option<&SupportSet> {
        debug_assert_eq!(self.k, 2);
        self.patterns.get(&TemporalPattern::pair(*t)).map(|e| &e.support)
    }

    pub fn check_closure(&self) -> bool {
        self.patterns.iter().all(|(p, e)| {
            e.witnesses.len() == e.support.len() * self.k
                && self.groups.get(p.events()).is_some_and(|g| e.support.is_subset_of(&g.support) && g.patterns.contains(p))
        }) && self.groups.values().flat_map(|g| g.patterns.iter()).count() == self.patterns.len()
    }

    pub fn dump(&self, symbols: &SymbolTable) -> Value {
        let label = |t: &[EventId]| t.iter().map(|e| symbols.label(*e)).collect::<Vec<_>>().join(",");
        let ehk: serde_json::Map<String, Value> = self
            .groups
            .iter()
            .map(|(t, g)| {
                let patterns: Vec<String> = g.patterns.iter().map(|p| p.display(symbols)).collect();
                (label(t), json!({ "support": g.support.positions(), "patterns": patterns }))
            })
            .collect();
        let mut phk = serde_json::Map::new();
        let mut ghk = serde_json::Map::new();
        for (p, e) in &self.patterns {
            let name = p.display(symbols);
            phk.insert(name.clone(), json!(e.support.positions()));
            for (pos, g) in e.support.iter().enumerate() {
                ghk.insert(format!("{name}@{g}"), json!(e.witness_at(pos, self.k)));
            }
        }
        json!({ "k": self.k, "EHk": ehk, "PHk": phk, "GHk": ghk })
    }
}

/// Whether the 2-event pattern `t` is indexed in PH₂.
pub fn has_triple(h2: &HlhK, t: &Triple) -> bool {
    h2.k == 2 && h2.patterns.contains_key(&TemporalPattern::pair(*t))
}

/// Register a candidate pattern under its event tuple.
pub fn insert_pattern(hk: &mut HlhK, p: TemporalPattern, support: SupportSet, witnesses: Vec<u32>) -> Result<(), IndexError> {
    let name = || format!("{:?}", p.events().iter().map(|e| e.0).collect::<Vec<_>>());
    if witnesses.len() != support.len() * hk.k || p.k() != hk.k {
        return Err(IndexError::WitnessMismatch(name()));
    }
    if hk.patterns.contains_key(&p) {
        return Err(IndexError::DuplicatePattern(name()));
    }
    let group = hk.groups.get_mut(p.events()).ok_or_else(|| IndexError::MissingGroup(name()))?;
    group.patterns.push(p.clone());
    hk.patterns.insert(p, PatternEntry { support, witnesses });
    Ok(())
}
