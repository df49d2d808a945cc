//! JSON run reports and benchmark CSV rows.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::miner::MiningResult;
use crate::model::{PatternResult, SequenceDatabase, SupportSet};

pub const SCHEMA: &str = "dstpm-report/1";

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ReportOptions {
    /// Include per-granule witness intervals (needs a result mined with witnesses).
    pub witnesses: bool,
    /// Include execution counters. They depend on the partition count, so
    /// reports meant for cross-configuration comparison leave them out.
    pub exec_stats: bool,
    /// List non-frequent candidates as well as frequent patterns.
    pub candidates: bool,
}

fn positions(s: &SupportSet) -> Value {
    json!(s.positions())
}

fn pattern_value(db: &SequenceDatabase, r: &PatternResult, opts: &ReportOptions) -> Value {
    let label = |e| db.symbols.label(e);
    let triples: Vec<Value> = r
        .pattern
        .triples()
        .iter()
        .map(|t| json!({ "relation": t.relation, "left": label(t.left), "right": label(t.right) }))
        .collect();
    let mut v = json!({
        "k": r.pattern.k(),
        "pattern": r.pattern.display(&db.symbols),
        "events": r.pattern.events().iter().map(|e| label(*e)).collect::<Vec<_>>(),
        "triples": triples,
        "support": positions(&r.support),
        "near_support": r.seasons.near_sets.iter().map(positions).collect::<Vec<_>>(),
        "seasons": r.seasons.seasons().map(positions).collect::<Vec<_>>(),
        "season_count": r.season_count,
        "frequent": r.frequent,
    });
    if opts.witnesses {
        if let Some(w) = &r.witnesses {
            let list: Vec<Value> = w
                .iter()
                .map(|(g, inst)| {
                    let spans: Vec<Value> = inst.iter().map(|i| json!([i.interval.start, i.interval.end])).collect();
                    json!({ "granule": g, "intervals": spans })
                })
                .collect();
            v["witnesses"] = Value::Array(list);
        }
    }
    v
}

/// The report as a JSON value; objects serialize with sorted keys.
pub fn report_value(db: &SequenceDatabase, result: &MiningResult, opts: &ReportOptions) -> Value {
    let patterns: Vec<Value> =
        result.patterns.iter().filter(|r| opts.candidates || r.frequent).map(|r| pattern_value(db, r, opts)).collect();
    let mut v = json!({
        "schema": SCHEMA,
        "database": {
            "granules": db.len(),
            "series": db.series,
            "instances": db.instance_count(),
        },
        "config": result.config,
        "candidate_events": result.hlh1.events().map(|e| db.symbols.label(e)).collect::<Vec<_>>(),
        "levels": result.levels,
        "frequent_count": result.frequent().count(),
        "patterns": patterns,
    });
    if opts.exec_stats {
        v["exec_stats"] = json!({
            "tasks": result.exec.tasks_run(),
            "shuffle_records": result.exec.shuffle_records(),
            "shuffle_bytes": result.exec.shuffle_bytes(),
            "stages": result.exec.stages,
            "broadcasts": result.exec.broadcasts,
        });
    }
    v
}

pub fn render_report(db: &SequenceDatabase, result: &MiningResult, opts: &ReportOptions) -> String {
    let mut s = serde_json::to_string_pretty(&report_value(db, result, opts)).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub workers: usize,
    pub partitions: usize,
    pub stage: String,
    pub wall_ms: f64,
    pub shuffle_bytes: usize,
    pub patterns_found: usize,
}

pub fn write_bench_csv(rows: &[BenchRow], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}
