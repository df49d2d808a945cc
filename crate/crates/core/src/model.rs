//! Domain types shared by every stage of the miner.
//!
//! Events are interned into a [`SymbolTable`] whose ids follow the canonical
//! event order `(series_index, symbol)`, so comparing two [`EventId`]s is the
//! same as comparing the events they name. All times are integer ticks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ModelError};

/// 1-based position of a granule within the database granularity.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Granule(pub u32);

impl Granule {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for Granule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Interned event id. Ordering matches the canonical event order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub u32);

/// A temporal event: one symbol of one series, displayed as `series:symbol`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventSymbol {
    pub series_index: u32,
    pub series_name: String,
    pub symbol: String,
}

impl EventSymbol {
    pub fn new(series_index: u32, series_name: impl Into<String>, symbol: impl Into<String>) -> Self {
        Self { series_index, series_name: series_name.into(), symbol: symbol.into() }
    }

    fn sort_key(&self) -> (u32, &str) {
        (self.series_index, self.symbol.as_str())
    }
}

impl fmt::Display for EventSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.series_name, self.symbol)
    }
}

/// All event symbols of a database, sorted canonically.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<EventSymbol>,
    lookup: HashMap<(String, String), EventId>,
}

impl SymbolTable {
    pub fn new(mut symbols: Vec<EventSymbol>) -> Self {
        symbols.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        symbols.dedup_by(|a, b| a.sort_key() == b.sort_key());
        let lookup = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| ((s.series_name.clone(), s.symbol.clone()), EventId(i as u32)))
            .collect();
        Self { symbols, lookup }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn get(&self, id: EventId) -> &EventSymbol {
        &self.symbols[id.0 as usize]
    }

    pub fn id(&self, series: &str, symbol: &str) -> Option<EventId> {
        self.lookup.get(&(series.to_string(), symbol.to_string())).copied()
    }

    /// Resolve a `series:symbol` string.
    pub fn parse_event(&self, s: &str) -> Result<EventId, ModelError> {
        let (series, symbol) = s.trim().split_once(':').ok_or_else(|| ModelError::UnknownEvent(s.to_string()))?;
        self.id(series, symbol).ok_or_else(|| ModelError::UnknownEvent(s.to_string()))
    }

    pub fn label(&self, id: EventId) -> String {
        self.get(id).to_string()
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.symbols.len() as u32).map(EventId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, &EventSymbol)> + '_ {
        self.symbols.iter().enumerate().map(|(i, s)| (EventId(i as u32), s))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TimeInterval {
    pub start: i64,
    pub end: i64,
}

impl TimeInterval {
    pub fn new(start: i64, end: i64) -> Self {
        Self { start, end }
    }

    /// `self` covers `other` (closed containment).
    pub fn covers(&self, other: &TimeInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

/// One occurrence of an event inside one granule.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventInstance {
    pub event: EventId,
    pub interval: TimeInterval,
    pub granule: Granule,
}

impl EventInstance {
    pub fn new(event: EventId, start: i64, end: i64, granule: Granule) -> Self {
        Self { event, interval: TimeInterval::new(start, end), granule }
    }

    pub fn canonical_key(&self) -> (i64, i64, EventId) {
        (self.interval.start, self.interval.end, self.event)
    }
}

/// Sort instances by `(start, end, series_index, symbol)`.
pub fn canonical_order(mut instances: Vec<EventInstance>) -> Vec<EventInstance> {
    instances.sort_by_key(EventInstance::canonical_key);
    instances
}

/// All instances of one granule, canonically ordered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemporalSequence {
    pub granule: Granule,
    pub instances: Vec<EventInstance>,
}

impl TemporalSequence {
    pub fn new(granule: Granule, instances: Vec<EventInstance>) -> Self {
        Self { granule, instances: canonical_order(instances) }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Indices (into `instances`) of every instance of `event`, canonical order.
    pub fn positions_of(&self, event: EventId) -> impl Iterator<Item = usize> + '_ {
        self.instances.iter().enumerate().filter(move |(_, i)| i.event == event).map(|(p, _)| p)
    }

    pub fn contains_event(&self, event: EventId) -> bool {
        self.instances.iter().any(|i| i.event == event)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDatabase {
    /// Series names in declaration order.
    pub series: Vec<String>,
    pub granule_span: i64,
    /// Tick at which granule 1 starts.
    pub origin: i64,
    pub tick_unit: String,
    pub symbols: SymbolTable,
    /// One sequence per granule, ordered by granule position.
    pub sequences: Vec<TemporalSequence>,
}

impl SequenceDatabase {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn sequence(&self, g: Granule) -> Option<&TemporalSequence> {
        self.sequences.get(g.index()).filter(|s| s.granule == g)
    }

    /// Closed tick window `[lo, hi]` of granule `g`.
    pub fn window(&self, g: Granule) -> (i64, i64) {
        let lo = self.origin + self.granule_span * (g.0 as i64 - 1);
        (lo, lo + self.granule_span)
    }

    pub fn instance_count(&self) -> usize {
        self.sequences.iter().map(|s| s.len()).sum()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Follows,
    Contains,
    Overlaps,
}

impl Relation {
    pub const ALL: [Relation; 3] = [Relation::Follows, Relation::Contains, Relation::Overlaps];

    pub fn glyph(self) -> &'static str {
        match self {
            Relation::Follows => ">",
            Relation::Contains => ">=",
            Relation::Overlaps => "~",
        }
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            ">" | "follows" | "->" => Ok(Relation::Follows),
            ">=" | "contains" => Ok(Relation::Contains),
            "~" | "overlaps" => Ok(Relation::Overlaps),
            _ => Err(format!("unknown relation {s:?}")),
        }
    }
}

/// `(relation, left, right)`: Follows means left ends no later than right
/// starts, Contains means left covers right, Overlaps means left starts first
/// and the two spans overlap.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub relation: Relation,
    pub left: EventId,
    pub right: EventId,
}

impl Triple {
    pub fn new(relation: Relation, left: EventId, right: EventId) -> Self {
        Self { relation, left, right }
    }

    /// Whether this triple relates exactly the events `a` and `b` (either orientation).
    pub fn relates(&self, a: EventId, b: EventId) -> bool {
        (self.left == a && self.right == b) || (self.left == b && self.right == a)
    }

    /// The six oriented triples between two distinct events.
    pub fn all_between(a: EventId, b: EventId) -> [Triple; 6] {
        let mut out = [Triple::new(Relation::Follows, a, b); 6];
        for (n, r) in Relation::ALL.iter().enumerate() {
            out[2 * n] = Triple::new(*r, a, b);
            out[2 * n + 1] = Triple::new(*r, b, a);
        }
        out
    }

    pub fn display(&self, symbols: &SymbolTable) -> String {
        format!("{} {} {}", symbols.label(self.left), self.relation.glyph(), symbols.label(self.right))
    }
}

/// Index of the `(i, j)` slot (i < j) in a k-event pattern's triple list.
pub fn pair_slot(i: usize, j: usize, k: usize) -> usize {
    debug_assert!(i < j && j < k);
    i * (2 * k - i - 1) / 2 + (j - i - 1)
}

/// k distinct events in canonical order plus one triple per event pair,
/// ordered by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TemporalPattern {
    events: Vec<EventId>,
    triples: Vec<Triple>,
}

impl Ord for TemporalPattern {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.events.len(), &self.events, &self.triples).cmp(&(other.events.len(), &other.events, &other.triples))
    }
}

impl PartialOrd for TemporalPattern {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl TemporalPattern {
    pub fn single(event: EventId) -> Self {
        Self { events: vec![event], triples: Vec::new() }
    }

    pub fn pair(triple: Triple) -> Self {
        let (a, b) = if triple.left < triple.right { (triple.left, triple.right) } else { (triple.right, triple.left) };
        Self { events: vec![a, b], triples: vec![triple] }
    }

    pub fn new(events: Vec<EventId>, triples: Vec<Triple>) -> Result<Self, ModelError> {
        if events.is_empty() || events.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ModelError::EventOrder);
        }
        let k = events.len();
        let expected = k * (k - 1) / 2;
        if triples.len() != expected {
            return Err(ModelError::TripleCount { events: k, expected, got: triples.len() });
        }
        for i in 0..k {
            for j in i + 1..k {
                let index = pair_slot(i, j, k);
                if !triples[index].relates(events[i], events[j]) {
                    return Err(ModelError::TripleSlot { index, i, j });
                }
            }
        }
        Ok(Self { events, triples })
    }

    pub fn k(&self) -> usize {
        self.events.len()
    }

    pub fn events(&self) -> &[EventId] {
        &self.events
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple(&self, i: usize, j: usize) -> &Triple {
        &self.triples[pair_slot(i, j, self.k())]
    }

    /// Append `event` (which must sort after every current event); `links[i]`
    /// relates `events[i]` to the new event.
    pub fn extend(&self, event: EventId, links: &[Triple]) -> Self {
        let k = self.k() + 1;
        debug_assert_eq!(links.len(), self.k());
        debug_assert!(self.events.last().is_none_or(|&l| l < event));
        let mut events = self.events.clone();
        events.push(event);
        let mut triples = Vec::with_capacity(k * (k - 1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                if j == k - 1 {
                    triples.push(links[i]);
                } else {
                    triples.push(*self.triple(i, j));
                }
            }
        }
        Self { events, triples }
    }

    /// Sub-pattern obtained by deleting the event at `index`.
    pub fn without(&self, index: usize) -> Self {
        let k = self.k();
        let events = self.events.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, e)| *e).collect();
        let mut triples = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                if i != index && j != index {
                    triples.push(*self.triple(i, j));
                }
            }
        }
        Self { events, triples }
    }

    pub fn prefix(&self) -> Self {
        self.without(self.k() - 1)
    }

    pub fn display(&self, symbols: &SymbolTable) -> String {
        if self.k() == 1 {
            return symbols.label(self.events[0]);
        }
        self.triples.iter().map(|t| t.display(symbols)).collect::<Vec<_>>().join(", ")
    }

    /// Parse `"M:1"` or comma-separated triples such as `"C:1 >= D:1, C:1 > F:1, D:1 > F:1"`.
    pub fn parse(input: &str, symbols: &SymbolTable) -> Result<Self, ModelError> {
        let syntax = |msg: &str| ModelError::PatternSyntax { input: input.to_string(), msg: msg.to_string() };
        let parts: Vec<&str> = input.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        if parts.is_empty() {
            return Err(syntax("empty pattern"));
        }
        if parts.len() == 1 && parts[0].split_whitespace().count() == 1 {
            return Ok(Self::single(symbols.parse_event(parts[0])?));
        }
        let mut triples = Vec::new();
        for part in parts {
            let tokens: Vec<&str> = part.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(syntax("expected `event relation event`"));
            }
            let relation: Relation = tokens[1].parse().map_err(|e: String| syntax(&e))?;
            let left = symbols.parse_event(tokens[0])?;
            let right = symbols.parse_event(tokens[2])?;
            if left == right {
                return Err(ModelError::SelfRelation(tokens[0].to_string()));
            }
            triples.push(Triple::new(relation, left, right));
        }
        let mut events: Vec<EventId> = triples.iter().flat_map(|t| [t.left, t.right]).collect();
        events.sort();
        events.dedup();
        let k = events.len();
        let mut slots: Vec<Option<Triple>> = vec![None; k * (k - 1) / 2];
        for t in triples {
            let a = events.binary_search(&t.left).unwrap();
            let b = events.binary_search(&t.right).unwrap();
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            let slot = &mut slots[pair_slot(i, j, k)];
            if slot.is_some() {
                return Err(syntax("event pair related twice"));
            }
            *slot = Some(t);
        }
        let triples = slots.into_iter().collect::<Option<Vec<_>>>().ok_or_else(|| syntax("every event pair needs a relation"))?;
        Self::new(events, triples)
    }
}

/// Strictly increasing list of granule positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<Granule>);

impl SupportSet {
    pub fn new(granules: Vec<Granule>) -> Result<Self, ModelError> {
        if is_strictly_increasing(&granules) {
            Ok(Self(granules))
        } else {
            Err(ModelError::UnsortedSupport)
        }
    }

    pub fn from_unsorted(mut granules: Vec<Granule>) -> Self {
        granules.sort();
        granules.dedup();
        Self(granules)
    }

    pub fn from_positions(positions: impl IntoIterator<Item = u32>) -> Self {
        Self::from_unsorted(positions.into_iter().map(Granule).collect())
    }

    pub(crate) fn from_sorted_unchecked(granules: Vec<Granule>) -> Self {
        debug_assert!(is_strictly_increasing(&granules));
        Self(granules)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Granule] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Granule> + '_ {
        self.0.iter().copied()
    }

    pub fn positions(&self) -> Vec<u32> {
        self.0.iter().map(|g| g.0).collect()
    }

    pub fn contains(&self, g: Granule) -> bool {
        self.0.binary_search(&g).is_ok()
    }

    pub fn position_of(&self, g: Granule) -> Option<usize> {
        self.0.binary_search(&g).ok()
    }

    pub fn first(&self) -> Option<Granule> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<Granule> {
        self.0.last().copied()
    }

    /// Sorted-merge intersection.
    pub fn intersect(&self, other: &SupportSet) -> SupportSet {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len().min(b.len()));
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        SupportSet(out)
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.intersect(other).len() == self.len()
    }

    /// Granules within the closed range `[lo, hi]`.
    pub fn range(&self, lo: Granule, hi: Granule) -> &[Granule] {
        let a = self.0.partition_point(|g| *g < lo);
        let b = self.0.partition_point(|g| *g <= hi);
        &self.0[a..b]
    }
}

impl FromIterator<Granule> for SupportSet {
    fn from_iter<I: IntoIterator<Item = Granule>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

/// Shared validator for every support set produced anywhere.
pub fn is_strictly_increasing(granules: &[Granule]) -> bool {
    granules.windows(2).all(|w| w[0] < w[1])
}

/// Maximal near support sets of a support set, and which of them are seasons.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeasonSet {
    pub near_sets: Vec<SupportSet>,
    pub accepted: Vec<usize>,
}

impl SeasonSet {
    pub fn seasons(&self) -> impl Iterator<Item = &SupportSet> + '_ {
        self.accepted.iter().map(|&i| &self.near_sets[i])
    }

    pub fn season_count(&self) -> usize {
        self.accepted.len()
    }
}

/// A threshold given either as an absolute granule count or as a percentage
/// of the database size. Percentages are kept as exact decimal rationals.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Threshold {
    Absolute(u32),
    /// `numer / denom` percent.
    Percent { numer: u64, denom: u64 },
}

impl Threshold {
    pub fn is_percent(&self) -> bool {
        matches!(self, Threshold::Percent { .. })
    }

    fn resolve(&self, db_size: usize) -> u32 {
        match *self {
            Threshold::Absolute(v) => v,
            Threshold::Percent { numer, denom } => {
                let num = numer as u128 * db_size as u128;
                let den = denom as u128 * 100;
                num.div_ceil(den) as u32
            }
        }
    }
}

impl FromStr for Threshold {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ConfigError::Parse(s.to_string());
        let s = s.trim();
        if let Some(pct) = s.strip_suffix('%') {
            let (int, frac) = pct.split_once('.').unwrap_or((pct, ""));
            if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || frac.len() > 9 {
                return Err(bad());
            }
            let digits = format!("{int}{frac}");
            let numer: u64 = digits.parse().map_err(|_| bad())?;
            Ok(Threshold::Percent { numer, denom: 10u64.pow(frac.len() as u32) })
        } else {
            s.parse::<u32>().map(Threshold::Absolute).map_err(|_| bad())
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Threshold::Absolute(v) => write!(f, "{v}"),
            Threshold::Percent { numer, denom } => {
                let scale = denom.to_string().len() - 1;
                if scale == 0 {
                    write!(f, "{numer}%")
                } else {
                    let s = format!("{:0>width$}", numer, width = scale + 1);
                    let (int, frac) = s.split_at(s.len() - scale);
                    write!(f, "{int}.{frac}%")
                }
            }
        }
    }
}

pub const DEFAULT_MAX_K: usize = 5;

/// Thresholds as supplied by the user, before resolution against a database.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawConfig {
    pub max_period: Threshold,
    pub min_density: Threshold,
    pub min_season: Threshold,
    pub dist_min: Threshold,
    pub dist_max: Threshold,
    pub max_k: usize,
    pub candidate_gate: bool,
}

impl RawConfig {
    pub fn absolute(max_period: u32, min_density: u32, min_season: u32, dist_min: u32, dist_max: u32) -> Self {
        Self {
            max_period: Threshold::Absolute(max_period),
            min_density: Threshold::Absolute(min_density),
            min_season: Threshold::Absolute(min_season),
            dist_min: Threshold::Absolute(dist_min),
            dist_max: Threshold::Absolute(dist_max),
            max_k: DEFAULT_MAX_K,
            candidate_gate: true,
        }
    }
}

/// Fully resolved, absolute mining thresholds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub max_period: u32,
    pub min_density: u32,
    pub min_season: u32,
    pub dist_min: u32,
    pub dist_max: u32,
    pub max_k: usize,
    /// When false the maxSeason candidate gate is skipped everywhere
    /// (only empty supports are dropped). Results must not change.
    pub candidate_gate: bool,
}

impl MiningConfig {
    pub fn new(max_period: u32, min_density: u32, min_season: u32, dist_min: u32, dist_max: u32) -> Result<Self, ConfigError> {
        let cfg = Self { max_period, min_density, min_season, dist_min, dist_max, max_k: DEFAULT_MAX_K, candidate_gate: true };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_max_k(mut self, max_k: usize) -> Self {
        self.max_k = max_k;
        self
    }

    pub fn without_candidate_gate(mut self) -> Self {
        self.candidate_gate = false;
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_period == 0 {
            return Err(ConfigError::NonPositive("max_period"));
        }
        if self.min_density == 0 {
            return Err(ConfigError::NonPositive("min_density"));
        }
        if self.min_season == 0 {
            return Err(ConfigError::NonPositive("min_season"));
        }
        if self.max_k == 0 {
            return Err(ConfigError::NonPositive("max_k"));
        }
        if self.dist_min > self.dist_max {
            return Err(ConfigError::DistRange { min: self.dist_min, max: self.dist_max });
        }
        Ok(())
    }

    /// Smallest support size a candidate may have: `minSeason × minDensity`.
    pub fn candidate_threshold(&self) -> usize {
        if self.candidate_gate {
            self.min_season as usize * self.min_density as usize
        } else {
            1
        }
    }

    pub fn is_candidate(&self, support_len: usize) -> bool {
        support_len >= self.candidate_threshold()
    }
}

/// Resolve percentage thresholds against the database size.
pub fn resolve_thresholds(raw: &RawConfig, db_size: usize) -> Result<MiningConfig, ConfigError> {
    if db_size == 0 {
        return Err(ConfigError::EmptyDatabase);
    }
    let floored = |t: &Threshold, name: &'static str| -> Result<u32, ConfigError> {
        match t {
            Threshold::Absolute(0) => Err(ConfigError::NonPositive(name)),
            Threshold::Percent { numer: 0, .. } => Err(ConfigError::NonPositive(name)),
            t => Ok(t.resolve(db_size).max(1)),
        }
    };
    let cfg = MiningConfig {
        max_period: floored(&raw.max_period, "max_period")?,
        min_density: floored(&raw.min_density, "min_density")?,
        min_season: floored(&raw.min_season, "min_season")?,
        dist_min: raw.dist_min.resolve(db_size),
        dist_max: raw.dist_max.resolve(db_size),
        max_k: raw.max_k,
        candidate_gate: raw.candidate_gate,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One mined pattern with its support and season decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternResult {
    pub pattern: TemporalPattern,
    pub support: SupportSet,
    pub seasons: SeasonSet,
    pub season_count: usize,
    pub frequent: bool,
    /// Per-granule witness instances, in pattern event order (detail mode only).
    pub witnesses: Option<Vec<(Granule, Vec<EventInstance>)>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> SymbolTable {
        let mut v = Vec::new();
        for (i, s) in ["C", "D", "F", "M", "I"].iter().enumerate() {
            for sym in ["0", "1"] {
                v.push(EventSymbol::new(i as u32, *s, sym));
            }
        }
        SymbolTable::new(v)
    }

    #[test]
    fn symbol_ids_follow_series_declaration_order() {
        let t = table();
        let m1 = t.parse_event("M:1").unwrap();
        let i1 = t.parse_event("I:1").unwrap();
        assert!(m1 < i1);
        assert!(t.parse_event("C:0").unwrap() < t.parse_event("C:1").unwrap());
        assert_eq!(t.label(m1), "M:1");
        assert!(t.parse_event("X:1").is_err());
    }

    #[test]
    fn canonical_order_examples() {
        let t = table();
        let m1 = t.parse_event("M:1").unwrap();
        let i1 = t.parse_event("I:1").unwrap();
        let g = Granule(1);
        let out = canonical_order(vec![EventInstance::new(m1, 420, 435, g), EventInstance::new(i1, 420, 430, g)]);
        assert_eq!(out.iter().map(|i| i.event).collect::<Vec<_>>(), vec![i1, m1]);

        assert!(canonical_order(vec![]).is_empty());

        let c1 = t.parse_event("C:1").unwrap();
        let d1 = t.parse_event("D:1").unwrap();
        let out = canonical_order(vec![EventInstance::new(c1, 420, 430, g), EventInstance::new(d1, 420, 425, g)]);
        assert_eq!(out.iter().map(|i| i.event).collect::<Vec<_>>(), vec![d1, c1]);

        // equal intervals fall back to series declaration order
        let out = canonical_order(vec![EventInstance::new(i1, 450, 465, g), EventInstance::new(m1, 450, 465, g)]);
        assert_eq!(out[0].event, m1);
    }

    #[test]
    fn resolve_percent_thresholds() {
        let mut raw = RawConfig::absolute(2, 3, 2, 4, 10);
        raw.max_period = "0.2%".parse().unwrap();
        let cfg = resolve_thresholds(&raw, 1460).unwrap();
        assert_eq!(cfg.max_period, 3);

        let cfg = resolve_thresholds(&RawConfig::absolute(2, 3, 2, 4, 10), 99_999).unwrap();
        assert_eq!(cfg.max_period, 2);

        let mut raw = RawConfig::absolute(2, 3, 2, 4, 10);
        raw.min_density = "0.5%".parse().unwrap();
        assert_eq!(resolve_thresholds(&raw, 100).unwrap().min_density, 1);
    }

    #[test]
    fn resolve_rejects_bad_configs() {
        assert_eq!(
            resolve_thresholds(&RawConfig::absolute(2, 3, 2, 11, 10), 14),
            Err(ConfigError::DistRange { min: 11, max: 10 })
        );
        assert_eq!(resolve_thresholds(&RawConfig::absolute(2, 0, 2, 4, 10), 14), Err(ConfigError::NonPositive("min_density")));
        assert_eq!(resolve_thresholds(&RawConfig::absolute(0, 3, 2, 4, 10), 14), Err(ConfigError::NonPositive("max_period")));
        assert_eq!(resolve_thresholds(&RawConfig::absolute(2, 3, 2, 4, 10), 0), Err(ConfigError::EmptyDatabase));
    }

    #[test]
    fn threshold_parse_and_display() {
        assert_eq!("0.2%".parse::<Threshold>().unwrap(), Threshold::Percent { numer: 2, denom: 10 });
        assert_eq!("15%".parse::<Threshold>().unwrap(), Threshold::Percent { numer: 15, denom: 1 });
        assert_eq!("7".parse::<Threshold>().unwrap(), Threshold::Absolute(7));
        assert!("x%".parse::<Threshold>().is_err());
        assert!("-1".parse::<Threshold>().is_err());
        assert!("%".parse::<Threshold>().is_err());
        assert_eq!("0.75%".parse::<Threshold>().unwrap().to_string(), "0.75%");
        assert_eq!("0.05%".parse::<Threshold>().unwrap().to_string(), "0.05%");
    }

    #[test]
    fn pattern_construction_and_slots() {
        let t = table();
        let c1 = t.parse_event("C:1").unwrap();
        let d1 = t.parse_event("D:1").unwrap();
        let f1 = t.parse_event("F:1").unwrap();
        let p = TemporalPattern::parse("C:1 >= D:1, C:1 > F:1, D:1 > F:1", &t).unwrap();
        assert_eq!(p.k(), 3);
        assert_eq!(p.triples().len(), 3);
        assert_eq!(*p.triple(0, 2), Triple::new(Relation::Follows, c1, f1));
        assert_eq!(p.prefix(), TemporalPattern::pair(Triple::new(Relation::Contains, c1, d1)));
        assert_eq!(p.without(0), TemporalPattern::pair(Triple::new(Relation::Follows, d1, f1)));
        let rebuilt = p.prefix().extend(f1, &[Triple::new(Relation::Follows, c1, f1), Triple::new(Relation::Follows, d1, f1)]);
        assert_eq!(rebuilt, p);
        assert_eq!(p.display(&t), "C:1 >= D:1, C:1 > F:1, D:1 > F:1");

        assert!(TemporalPattern::parse("C:1 nonsense D:1", &t).is_err());
        assert!(TemporalPattern::parse("C:1 > D:1, C:1 > F:1", &t).is_err());
        assert!(TemporalPattern::parse("C:1 > C:1", &t).is_err());
        assert_eq!(TemporalPattern::parse("M:1", &t).unwrap().k(), 1);
        assert!(TemporalPattern::new(vec![d1, c1], vec![Triple::new(Relation::Follows, c1, d1)]).is_err());
    }

    #[test]
    fn triple_count_matches_k() {
        for k in 1..7 {
            for i in 0..k {
                for j in i + 1..k {
                    assert!(pair_slot(i, j, k) < k * (k - 1) / 2);
                }
            }
        }
        assert_eq!(pair_slot(0, 1, 3), 0);
        assert_eq!(pair_slot(0, 2, 3), 1);
        assert_eq!(pair_slot(1, 2, 3), 2);
    }

    #[test]
    fn support_set_algebra() {
        let a = SupportSet::from_positions([1, 2, 3, 7, 8, 11, 12, 14]);
        let b = SupportSet::from_positions([1, 2, 3, 4, 7, 8, 11, 12, 13, 14]);
        assert_eq!(a.intersect(&b), a);
        assert!(a.is_subset_of(&b));
        assert_eq!(a.range(Granule(3), Granule(11)), &[Granule(3), Granule(7), Granule(8), Granule(11)]);
        assert!(SupportSet::new(vec![Granule(2), Granule(2)]).is_err());
        assert!(SupportSet::new(vec![Granule(3), Granule(2)]).is_err());
    }
}
