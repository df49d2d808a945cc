//! Loading, writing, validating and building sequence databases.
//!
//! JSONL layout: one header line
//! `{"series":["C","D"],"granule_span":15,"tick_unit":"minute","origin":420}`
//! (`origin` optional, default 0) followed by one line per granule
//! `{"granule":1,"events":[{"s":"C","v":"1","start":420,"end":430}]}`.
//! Granule `p` spans ticks `[origin + span·(p−1), origin + span·p]`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IngestError;
use crate::model::{EventInstance, EventSymbol, Granule, SequenceDatabase, SymbolTable, TemporalSequence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub series: Vec<String>,
    pub granule_span: i64,
    #[serde(default = "default_tick_unit")]
    pub tick_unit: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub origin: i64,
}

fn default_tick_unit() -> String {
    "minute".to_string()
}

fn is_zero(v: &i64) -> bool {
    *v == 0
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub s: String,
    pub v: String,
    pub start: i64,
    pub end: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GranuleRecord {
    pub granule: u32,
    pub events: Vec<EventRecord>,
}

/// How series indices (and so the equal-interval tie-break) are assigned.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub enum SeriesOrder {
    /// Order of the header's `series` list.
    #[default]
    Declaration,
    /// Lexicographic by series name.
    Lexicographic,
}

pub fn load_sequence_db(path: impl AsRef<Path>) -> Result<SequenceDatabase, IngestError> {
    let file = std::fs::File::open(path)?;
    read_sequence_db(file, SeriesOrder::Declaration)
}

pub fn read_sequence_db(reader: impl Read, order: SeriesOrder) -> Result<SequenceDatabase, IngestError> {
    let mut lines = BufReader::new(reader).lines().enumerate().filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((n + 1, other)),
    });
    let (line_no, header_line) = lines.next().ok_or(IngestError::Empty)?;
    let header: Header = serde_json::from_str(&header_line?)
        .map_err(|e| IngestError::Malformed { line: line_no, msg: e.to_string() })?;
    if header.series.is_empty() {
        return Err(IngestError::Malformed { line: line_no, msg: "header lists no series".into() });
    }
    if header.granule_span <= 0 {
        return Err(IngestError::Malformed { line: line_no, msg: "granule_span must be positive".into() });
    }
    let mut series = header.series.clone();
    if order == SeriesOrder::Lexicographic {
        series.sort();
    }
    let series_index: HashMap<&str, u32> = series.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();
    if series_index.len() != series.len() {
        return Err(IngestError::Malformed { line: line_no, msg: "duplicate series name".into() });
    }

    let mut records: BTreeMap<u32, (usize, Vec<EventRecord>)> = BTreeMap::new();
    for (n, line) in lines {
        let rec: GranuleRecord = serde_json::from_str(&line?).map_err(|e| IngestError::Malformed { line: n, msg: e.to_string() })?;
        if rec.granule == 0 {
            return Err(IngestError::Malformed { line: n, msg: "granule positions start at 1".into() });
        }
        for ev in &rec.events {
            if !series_index.contains_key(ev.s.as_str()) {
                return Err(IngestError::UnknownSeries { line: n, series: ev.s.clone() });
            }
        }
        if records.insert(rec.granule, (n, rec.events)).is_some() {
            return Err(IngestError::DuplicateGranule(Granule(rec.granule)));
        }
    }
    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    for (expected, &found) in (1u32..).zip(records.keys()) {
        if expected != found {
            return Err(IngestError::NonContiguous { expected, found });
        }
    }

    let symbols = SymbolTable::new(
        records
            .values()
            .flat_map(|(_, evs)| evs.iter())
            .map(|ev| EventSymbol::new(series_index[ev.s.as_str()], ev.s.clone(), ev.v.clone()))
            .collect(),
    );
    let mut db = SequenceDatabase {
        series,
        granule_span: header.granule_span,
        origin: header.origin,
        tick_unit: header.tick_unit,
        symbols,
        sequences: Vec::with_capacity(records.len()),
    };
    for (pos, (_, events)) in records {
        let g = Granule(pos);
        let (lo, hi) = db.window(g);
        let mut instances = Vec::with_capacity(events.len());
        for ev in events {
            if ev.start >= ev.end {
                return Err(IngestError::InvertedInterval { granule: g, start: ev.start, end: ev.end });
            }
            if ev.start < lo || ev.end > hi {
                return Err(IngestError::OutsideGranule { granule: g, start: ev.start, end: ev.end, lo, hi });
            }
            let id = db.symbols.id(&ev.s, &ev.v).expect("interned above");
            instances.push(EventInstance::new(id, ev.start, ev.end, g));
        }
        db.sequences.push(TemporalSequence::new(g, instances));
    }
    Ok(db)
}

/// Write `db` in the JSONL layout, instances in canonical order.
pub fn write_sequence_db(db: &SequenceDatabase, mut out: impl Write) -> std::io::Result<()> {
    let header = Header {
        series: db.series.clone(),
        granule_span: db.granule_span,
        tick_unit: db.tick_unit.clone(),
        origin: db.origin,
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for seq in &db.sequences {
        let events = seq
            .instances
            .iter()
            .map(|i| {
                let sym = db.symbols.get(i.event);
                EventRecord { s: sym.series_name.clone(), v: sym.symbol.clone(), start: i.interval.start, end: i.interval.end }
            })
            .collect();
        serde_json::to_writer(&mut out, &GranuleRecord { granule: seq.granule.0, events })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_sequence_db(db: &SequenceDatabase, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_sequence_db(db, &mut w)?;
    w.flush()
}

/// Report every broken database invariant; empty iff the database is valid.
pub fn validate_db(db: &SequenceDatabase) -> Vec<String> {
    let mut out = Vec::new();
    if db.sequences.is_empty() {
        out.push("empty database".to_string());
    }
    if db.granule_span <= 0 {
        out.push("granule_span must be positive".to_string());
    }
    let mut seen = HashSet::new();
    for (i, seq) in db.sequences.iter().enumerate() {
        let g = seq.granule;
        if !seen.insert(g) {
            out.push(format!("duplicate granule {g}"));
        } else if g.0 as usize != i + 1 {
            out.push(format!("non-contiguous granule {g} at position {}", i + 1));
        }
        let (lo, hi) = db.window(g);
        for inst in &seq.instances {
            if inst.event.0 as usize >= db.symbols.len() {
                out.push(format!("unknown event #{} @G{g}", inst.event.0));
                continue;
            }
            if inst.granule != g {
                out.push(format!("instance of granule {} stored @G{g}", inst.granule));
            }
            if inst.interval.start >= inst.interval.end {
                out.push(format!("inverted interval @G{g}"));
            } else if inst.interval.start < lo || inst.interval.end > hi {
                out.push(format!("interval outside granule @G{g}"));
            }
        }
        if seq.instances.windows(2).any(|w| w[0].canonical_key() > w[1].canonical_key()) {
            out.push(format!("sequence not in canonical order @G{g}"));
        }
    }
    out
}

/// One raw time series: `(tick, value)` samples with strictly increasing ticks.
#[derive(Clone, Debug, PartialEq)]
pub struct RawSeries {
    pub name: String,
    pub samples: Vec<(i64, f64)>,
}

/// Bin edges and labels of one series. Value `v` gets `labels[i]` where `i`
/// is the number of edges `<= v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesBins {
    pub name: String,
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
    /// Accepted value range; checked in strict mode.
    #[serde(default)]
    pub bounds: Option<(f64, f64)>,
}

impl SeriesBins {
    fn label_of(&self, v: f64) -> usize {
        self.edges.partition_point(|e| *e <= v)
    }

    /// A value that maps back to `labels[i]`.
    fn representative(&self, i: usize) -> f64 {
        match (i, self.edges.first()) {
            (_, None) => 0.0,
            (0, Some(first)) => self.bounds.map_or(first - 1.0, |(lo, _)| lo),
            (i, _) => self.edges[i - 1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolizationSpec {
    pub granule_span: i64,
    /// Tick at which granule 1 starts; defaults to the first sample tick.
    #[serde(default)]
    pub origin: Option<i64>,
    #[serde(default = "default_tick_unit")]
    pub tick_unit: String,
    #[serde(default)]
    pub strict: bool,
    pub series: Vec<SeriesBins>,
}

impl SymbolizationSpec {
    fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: String| Err(IngestError::BadSpec(m));
        if self.granule_span <= 0 {
            return bad("granule_span must be positive".into());
        }
        for s in &self.series {
            if s.labels.len() != s.edges.len() + 1 {
                return bad(format!("series {}: {} labels for {} edges", s.name, s.labels.len(), s.edges.len()));
            }
            if s.edges.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
                return bad(format!("series {}: edges must be strictly increasing", s.name));
            }
            if s.labels.iter().collect::<HashSet<_>>().len() != s.labels.len() {
                return bad(format!("series {}: duplicate labels", s.name));
            }
        }
        Ok(())
    }
}

/// Turn raw series into a sequence database: runs of samples with the same
/// symbol become one instance, split at granule boundaries. Each sample holds
/// until the next sample; the last one holds for one more sample step.
pub fn symbolize(series: &[RawSeries], spec: &SymbolizationSpec) -> Result<SequenceDatabase, IngestError> {
    spec.validate()?;
    if series.is_empty() {
        return Err(IngestError::Empty);
    }
    let raw: HashMap<&str, &RawSeries> = series.iter().map(|s| (s.name.as_str(), s)).collect();
    for s in series {
        if !spec.series.iter().any(|b| b.name == s.name) {
            return Err(IngestError::BadSpec(format!("no bins for series {}", s.name)));
        }
        if s.samples.is_empty() {
            return Err(IngestError::BadSpec(format!("series {} has no samples", s.name)));
        }
        if s.samples.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(IngestError::BadSpec(format!("series {}: ticks must be strictly increasing", s.name)));
        }
    }
    let span_of = |s: &RawSeries| {
        let n = s.samples.len();
        let step = if n > 1 { s.samples[n - 1].0 - s.samples[n - 2].0 } else { 1 };
        (s.samples[0].0, s.samples[n - 1].0 + step)
    };
    let (first, end) = span_of(&series[0]);
    if series.iter().any(|s| span_of(s) != (first, end)) {
        return Err(IngestError::BadSpec("series do not cover the same tick range".into()));
    }
    let origin = spec.origin.unwrap_or(first);
    if origin > first {
        return Err(IngestError::BadSpec(format!("origin {origin} is after the first sample tick {first}")));
    }
    let granules = ((end - origin) + spec.granule_span - 1) / spec.granule_span;

    let bins: Vec<&SeriesBins> = spec.series.iter().filter(|b| raw.contains_key(b.name.as_str())).collect();
    let symbols = SymbolTable::new(
        bins.iter()
            .enumerate()
            .flat_map(|(i, b)| b.labels.iter().map(move |l| EventSymbol::new(i as u32, b.name.clone(), l.clone())))
            .collect(),
    );
    let mut per_granule: Vec<Vec<EventInstance>> = vec![Vec::new(); granules as usize];
    for b in &bins {
        let s = raw[b.name.as_str()];
        let mut runs: Vec<(usize, i64, i64)> = Vec::new();
        for (n, &(tick, value)) in s.samples.iter().enumerate() {
            let out_of_bounds = b.bounds.is_some_and(|(lo, hi)| value < lo || value > hi);
            if value.is_nan() || (spec.strict && out_of_bounds) {
                return Err(IngestError::OutOfBins { series: s.name.clone(), tick, value });
            }
            let label = b.label_of(value);
            let stop = s.samples.get(n + 1).map_or(end, |next| next.0);
            match runs.last_mut() {
                Some(run) if run.0 == label => run.2 = stop,
                _ => runs.push((label, tick, stop)),
            }
        }
        for (label, mut start, stop) in runs {
            let event = symbols.id(&b.name, &b.labels[label]).expect("label interned");
            while start < stop {
                let idx = (start - origin) / spec.granule_span;
                let boundary = origin + spec.granule_span * (idx + 1);
                let piece_end = stop.min(boundary);
                per_granule[idx as usize].push(EventInstance::new(event, start, piece_end, Granule(idx as u32 + 1)));
                start = piece_end;
            }
        }
    }
    Ok(SequenceDatabase {
        series: bins.iter().map(|b| b.name.clone()).collect(),
        granule_span: spec.granule_span,
        origin,
        tick_unit: spec.tick_unit.clone(),
        symbols,
        sequences: per_granule.into_iter().enumerate().map(|(i, inst)| TemporalSequence::new(Granule(i as u32 + 1), inst)).collect(),
    })
}

/// Render a symbolized database back to unit-step raw series, using one
/// representative value per label.
pub fn render_step_series(db: &SequenceDatabase, spec: &SymbolizationSpec) -> Vec<RawSeries> {
    let mut out = Vec::new();
    for (index, name) in db.series.iter().enumerate() {
        let Some(bins) = spec.series.iter().find(|b| &b.name == name) else { continue };
        let mut samples = Vec::new();
        for inst in db.sequences.iter().flat_map(|s| s.instances.iter()) {
            let sym = db.symbols.get(inst.event);
            if sym.series_index as usize != index {
                continue;
            }
            let label = bins.labels.iter().position(|l| *l == sym.symbol).expect("known label");
            let v = bins.representative(label);
            samples.extend((inst.interval.start..inst.interval.end).map(|t| (t, v)));
        }
        samples.sort_by_key(|s| s.0);
        out.push(RawSeries { name: name.clone(), samples });
    }
    out
}

#[derive(Deserialize)]
struct CsvRow {
    tick: i64,
    series: String,
    value: f64,
}

/// Read `tick,series,value` rows; series keep their first-appearance order.
pub fn read_raw_csv(reader: impl Read) -> Result<Vec<RawSeries>, IngestError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut order: Vec<RawSeries> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for (n, row) in rdr.deserialize::<CsvRow>().enumerate() {
        let row = row.map_err(|e| IngestError::Malformed { line: n + 2, msg: e.to_string() })?;
        let i = *index.entry(row.series.clone()).or_insert_with(|| {
            order.push(RawSeries { name: row.series.clone(), samples: Vec::new() });
            order.len() - 1
        });
        order[i].samples.push((row.tick, row.value));
    }
    for s in &mut order {
        s.samples.sort_by_key(|x| x.0);
    }
    Ok(order)
}
