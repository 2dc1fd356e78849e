use crate::error::{invalid_parameter, Result};
use crate::series::{ChangePoint, ChangePointSet, ScoreSeries};

/// Keep only change-points where the mean score of the segment before and
/// the segment after have different signs. Zero counts as positive.
///
/// Segments are delimited by the input change-points themselves; the means
/// are computed once, before anything is dropped.
pub fn sign_change_filter(s: &ScoreSeries, cps: &ChangePointSet) -> ChangePointSet {
    if cps.is_empty() {
        return cps.clone();
    }
    let x = s.values();
    let mut bounds: Vec<usize> = cps.points().iter().map(|p| s.index_of_time(p.time)).collect();
    bounds.insert(0, 0);
    bounds.push(x.len());
    let positive: Vec<bool> = bounds
        .windows(2)
        .map(|w| {
            let seg = &x[w[0]..w[1].max(w[0])];
            // A degenerate empty segment carries no sign information.
            seg.is_empty() || seg.iter().sum::<f64>() / seg.len() as f64 >= 0.0
        })
        .collect();
    let kept = cps
        .points()
        .iter()
        .enumerate()
        .filter(|(k, _)| positive[*k] != positive[k + 1])
        .map(|(_, p)| *p)
        .collect();
    ChangePointSet::new(cps.detector(), kept)
}

/// Round every time to the nearest multiple of `granularity` (halves round
/// up) and merge duplicates.
pub fn round_filter(cps: &ChangePointSet, granularity: f64) -> Result<ChangePointSet> {
    if !(granularity.is_finite() && granularity > 0.0) {
        return Err(invalid_parameter(format!(
            "rounding granularity must be positive, got {granularity}"
        )));
    }
    let points = cps
        .points()
        .iter()
        .map(|p| ChangePoint {
            time: (p.time / granularity + 0.5).floor() * granularity,
            score: p.score,
        })
        .collect();
    Ok(ChangePointSet::new(cps.detector(), points))
}
