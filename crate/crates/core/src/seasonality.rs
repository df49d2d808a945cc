//! Support-set algebra, near-support decomposition, season acceptance and the
//! maxSeason bound.

use num_rational::Ratio;

use crate::error::SeasonError;
use crate::model::{MiningConfig, SeasonSet, SupportSet};

/// Intersection of one or more support sets.
pub fn intersect_supports(sets: &[SupportSet]) -> Result<SupportSet, SeasonError> {
    let (first, rest) = sets.split_first().ok_or(SeasonError::EmptyIntersection)?;
    Ok(rest.iter().fold(first.clone(), |acc, s| acc.intersect(s)))
}

/// `|sup| / min_density` as an exact rational.
pub fn max_season(sup: &SupportSet, min_density: u32) -> Ratio<u64> {
    Ratio::new(sup.len() as u64, min_density.max(1) as u64)
}

/// Integer form of `maxSeason(sup) >= min_season`.
pub fn passes_max_season(sup: &SupportSet, min_density: u32, min_season: u32) -> bool {
    sup.len() as u64 >= min_season as u64 * min_density as u64
}

/// Split `sup` into maximal near support sets: a new set starts wherever the
/// gap to the previous granule exceeds `max_period`.
pub fn near_support_sets(sup: &SupportSet, max_period: u32) -> Vec<SupportSet> {
    let mut out = Vec::new();
    let mut current: Vec<crate::model::Granule> = Vec::new();
    for g in sup.iter() {
        if let Some(&prev) = current.last() {
            if g.0 - prev.0 > max_period {
                out.push(SupportSet::from_sorted_unchecked(std::mem::take(&mut current)));
            }
        }
        current.push(g);
    }
    if !current.is_empty() {
        out.push(SupportSet::from_sorted_unchecked(current));
    }
    out
}

/// Keep near sets whose density reaches `min_density`.
pub fn accept_seasons(near: Vec<SupportSet>, min_density: u32) -> SeasonSet {
    let accepted = near
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() >= min_density as usize)
        .map(|(i, _)| i)
        .collect();
    SeasonSet { near_sets: near, accepted }
}

/// Distance between two seasons: first granule of `later` minus last granule of `earlier`.
pub fn season_distance(earlier: &SupportSet, later: &SupportSet) -> Result<u32, SeasonError> {
    match (earlier.last(), later.first()) {
        (Some(end), Some(start)) if end < start => Ok(start.0 - end.0),
        (Some(end), Some(start)) => Err(SeasonError::OutOfOrder { earlier_end: end, later_start: start }),
        _ => Err(SeasonError::EmptyIntersection),
    }
}

/// At least `min_season` seasons and every consecutive season distance
/// inside `[dist_min, dist_max]`.
pub fn is_frequent_seasonal(seasons: &SeasonSet, cfg: &MiningConfig) -> bool {
    if seasons.season_count() < cfg.min_season as usize {
        return false;
    }
    let accepted: Vec<&SupportSet> = seasons.seasons().collect();
    accepted.windows(2).all(|w| match season_distance(w[0], w[1]) {
        Ok(d) => cfg.dist_min <= d && d <= cfg.dist_max,
        Err(_) => false,
    })
}

/// Full season evaluation of one support set.
pub fn evaluate(sup: &SupportSet, cfg: &MiningConfig) -> (SeasonSet, bool) {
    let seasons = accept_seasons(near_support_sets(sup, cfg.max_period), cfg.min_density);
    let frequent = is_frequent_seasonal(&seasons, cfg);
    (seasons, frequent)
}
