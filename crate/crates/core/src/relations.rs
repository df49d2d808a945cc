//! Temporal relations between event instances and per-granule pattern occurrence.
//!
//! Boundary rules (integer ticks, so equality is exact):
//! - the canonically first instance `a` ends no later than `b` starts: Follows(a, b)
//! - one interval covers the other: Contains with the covering event on the left;
//!   equal intervals make the canonically first event the container
//! - anything else: Overlaps(a, b), `a` starting strictly first

use crate::error::ModelError;
use crate::model::{EventInstance, Relation, TemporalPattern, TemporalSequence, Triple};

/// Relation between two instances of distinct events. Order of the arguments
/// does not matter.
pub fn relate(x: &EventInstance, y: &EventInstance) -> Triple {
    debug_assert_ne!(x.event, y.event);
    let (a, b) = if x.canonical_key() <= y.canonical_key() { (x, y) } else { (y, x) };
    if a.interval.end <= b.interval.start {
        Triple::new(Relation::Follows, a.event, b.event)
    } else if a.interval.covers(&b.interval) {
        Triple::new(Relation::Contains, a.event, b.event)
    } else if b.interval.covers(&a.interval) {
        Triple::new(Relation::Contains, b.event, a.event)
    } else {
        Triple::new(Relation::Overlaps, a.event, b.event)
    }
}

/// Classify a pair of instances of distinct events.
pub fn classify_pair(a: &EventInstance, b: &EventInstance) -> Result<Triple, ModelError> {
    if a.event == b.event {
        return Err(ModelError::SelfRelation(format!("#{}", a.event.0)));
    }
    Ok(relate(a, b))
}

/// Every distinct triple formed by an instance of `a` and an instance of `b`
/// in `seq`, with the first witness `(a instance, b instance)` found in
/// canonical order.
pub fn enumerate_triples(
    seq: &TemporalSequence,
    a: crate::model::EventId,
    b: crate::model::EventId,
) -> Result<Vec<(Triple, [EventInstance; 2])>, ModelError> {
    if a == b {
        return Err(ModelError::SelfRelation(format!("#{}", a.0)));
    }
    let mut out: Vec<(Triple, [EventInstance; 2])> = Vec::new();
    for x in seq.instances.iter().filter(|i| i.event == a) {
        for y in seq.instances.iter().filter(|i| i.event == b) {
            let t = relate(x, y);
            if !out.iter().any(|(seen, _)| *seen == t) {
                out.push((t, [*x, *y]));
            }
        }
    }
    Ok(out)
}

/// First witness (indices into `seq.instances`, in pattern event order) for
/// `pattern` in `seq`.
pub(crate) fn find_witness(seq: &TemporalSequence, pattern: &TemporalPattern) -> Option<Vec<u32>> {
    let candidates: Vec<Vec<usize>> = pattern.events().iter().map(|&e| seq.positions_of(e).collect()).collect();
    if candidates.iter().any(Vec::is_empty) {
        return None;
    }
    let mut chosen: Vec<usize> = Vec::with_capacity(pattern.k());
    if search(seq, pattern, &candidates, &mut chosen) {
        Some(chosen.into_iter().map(|c| c as u32).collect())
    } else {
        None
    }
}

fn search(seq: &TemporalSequence, pattern: &TemporalPattern, candidates: &[Vec<usize>], chosen: &mut Vec<usize>) -> bool {
    let depth = chosen.len();
    if depth == candidates.len() {
        return true;
    }
    for &c in &candidates[depth] {
        let inst = &seq.instances[c];
        let consistent = chosen
            .iter()
            .enumerate()
            .all(|(i, &prev)| relate(&seq.instances[prev], inst) == *pattern.triple(i, depth));
        if consistent {
            chosen.push(c);
            if search(seq, pattern, candidates, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// One instance per pattern event such that every pattern triple holds, or
/// `None` if the pattern does not occur in this granule.
pub fn pattern_occurs(seq: &TemporalSequence, pattern: &TemporalPattern) -> Option<Vec<EventInstance>> {
    find_witness(seq, pattern).map(|w| w.into_iter().map(|i| seq.instances[i as usize]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventId, Granule};
    use proptest::prelude::*;

    const C1: EventId = EventId(1);
    const D1: EventId = EventId(3);
    const F1: EventId = EventId(5);
    const M1: EventId = EventId(7);
    const I1: EventId = EventId(9);

    fn inst(e: EventId, s: i64, t: i64) -> EventInstance {
        EventInstance::new(e, s, t, Granule(1))
    }

    #[test]
    fn meets_is_follows() {
        let t = classify_pair(&inst(C1, 420, 430), &inst(F1, 430, 435)).unwrap();
        assert_eq!(t, Triple::new(Relation::Follows, C1, F1));
    }

    #[test]
    fn shared_start_longer_second_is_contains_by_the_longer() {
        // D:1 is canonically first but C:1 covers it
        let t = classify_pair(&inst(D1, 420, 425), &inst(C1, 420, 430)).unwrap();
        assert_eq!(t, Triple::new(Relation::Contains, C1, D1));
    }

    #[test]
    fn equal_intervals_container_is_first_declared() {
        let t = classify_pair(&inst(I1, 450, 465), &inst(M1, 450, 465)).unwrap();
        assert_eq!(t, Triple::new(Relation::Contains, M1, I1));
    }

    #[test]
    fn proper_overlap() {
        let t = classify_pair(&inst(I1, 0, 10), &inst(M1, 5, 15)).unwrap();
        assert_eq!(t, Triple::new(Relation::Overlaps, I1, M1));
    }

    #[test]
    fn self_relation_rejected() {
        assert!(classify_pair(&inst(C1, 0, 5), &inst(C1, 5, 9)).is_err());
        let seq = TemporalSequence::new(Granule(1), vec![inst(C1, 0, 5)]);
        assert!(enumerate_triples(&seq, C1, C1).is_err());
    }

    #[test]
    fn enumerate_dedups_and_keeps_first_witness() {
        let seq = TemporalSequence::new(
            Granule(1),
            vec![inst(C1, 0, 2), inst(F1, 3, 4), inst(C1, 5, 6), inst(F1, 7, 9)],
        );
        let out = enumerate_triples(&seq, C1, F1).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].0, Triple::new(Relation::Follows, C1, F1));
        assert_eq!(out[0].1, [inst(C1, 0, 2), inst(F1, 3, 4)]);
        assert_eq!(out[1].0, Triple::new(Relation::Follows, F1, C1));
        assert!(enumerate_triples(&seq, C1, M1).unwrap().is_empty());
    }

    #[test]
    fn pattern_occurs_uses_any_witness() {
        // first C:1 instance fails, second one works
        let seq = TemporalSequence::new(
            Granule(1),
            vec![inst(C1, 0, 2), inst(D1, 1, 3), inst(C1, 4, 10), inst(D1, 5, 6)],
        );
        let p = TemporalPattern::pair(Triple::new(Relation::Contains, C1, D1));
        let w = pattern_occurs(&seq, &p).unwrap();
        assert_eq!(w, vec![inst(C1, 4, 10), inst(D1, 5, 6)]);
        let missing = TemporalPattern::pair(Triple::new(Relation::Follows, C1, F1));
        assert!(pattern_occurs(&seq, &missing).is_none());
    }

    fn arb_interval() -> impl Strategy<Value = (i64, i64)> {
        (0i64..12, 1i64..8).prop_map(|(s, l)| (s, s + l))
    }

    proptest! {
        #[test]
        fn exactly_one_relation_holds((s1, e1) in arb_interval(), (s2, e2) in arb_interval(), swap in any::<bool>()) {
            let (x, y) = (inst(C1, s1, e1), inst(D1, s2, e2));
            let t = if swap { relate(&y, &x) } else { relate(&x, &y) };
            prop_assert_eq!(t, relate(&x, &y));
            let (a, b) = if x.canonical_key() <= y.canonical_key() { (x, y) } else { (y, x) };
            let follows = a.interval.end <= b.interval.start;
            let contains = !follows && (a.interval.covers(&b.interval) || b.interval.covers(&a.interval));
            let overlaps = !follows && !contains;
            prop_assert_eq!([follows, contains, overlaps].iter().filter(|v| **v).count(), 1);
            match t.relation {
                Relation::Follows => prop_assert!(follows && t.left == a.event),
                Relation::Contains => prop_assert!(contains),
                Relation::Overlaps => prop_assert!(overlaps && t.left == a.event && a.interval.start < b.interval.start),
            }
        }

        #[test]
        fn contains_matches_cover_predicate((s1, e1) in arb_interval(), (s2, e2) in arb_interval()) {
            let (x, y) = (inst(C1, s1, e1), inst(D1, s2, e2));
            let seq = TemporalSequence::new(Granule(1), vec![x, y]);
            let triples = enumerate_triples(&seq, C1, D1).unwrap();
            let emitted_c_covers_d = triples.iter().any(|(t, _)| *t == Triple::new(Relation::Contains, C1, D1));
            let emitted_d_covers_c = triples.iter().any(|(t, _)| *t == Triple::new(Relation::Contains, D1, C1));
            // C precedes D in event order, so equal intervals belong to C
            prop_assert_eq!(emitted_c_covers_d, x.interval.covers(&y.interval));
            prop_assert_eq!(emitted_d_covers_c, y.interval.covers(&x.interval) && x.interval != y.interval);
        }

        #[test]
        fn sub_patterns_of_occurring_patterns_occur(
            ivs in proptest::collection::vec(arb_interval(), 3..7),
        ) {
            let events = [C1, D1, F1];
            let instances: Vec<EventInstance> = ivs.iter().enumerate().map(|(n, (s, e))| inst(events[n % 3], *s, *e)).collect();
            let seq = TemporalSequence::new(Granule(1), instances);
            // build the pattern realized by the first instance of each event
            let firsts: Vec<EventInstance> = events.iter().map(|e| *seq.instances.iter().find(|i| i.event == *e).unwrap()).collect();
            let p = TemporalPattern::pair(relate(&firsts[0], &firsts[1]))
                .extend(F1, &[relate(&firsts[0], &firsts[2]), relate(&firsts[1], &firsts[2])]);
            let w = pattern_occurs(&seq, &p);
            prop_assert!(w.is_some());
            let w = w.unwrap();
            for drop in 0..3 {
                let sub = p.without(drop);
                prop_assert!(pattern_occurs(&seq, &sub).is_some());
                // projection of the witness is itself a witness
                let projected: Vec<EventInstance> = w.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, x)| *x).collect();
                prop_assert_eq!(sub.triple(0, 1), &relate(&projected[0], &projected[1]));
            }
        }
    }
}
