//! Maximum-likelihood relabeling under a switch budget.
//!
//! Given classifier labels `x` from a classifier of accuracy `p`, find true
//! labels `L` maximizing
//! `log(p) * #{x_i = L_i} + log(1-p) * #{x_i != L_i}` subject to strictly
//! fewer than `M` label switches. Since `p > 1/2`, the objective is
//! increasing in the agreement count, so the dynamic program maximizes
//! agreements exactly in integers.

use crate::error::{invalid_parameter, Result};
use crate::series::{ChangePoint, ChangePointSet, LabelSeries};

pub const MLE_ID: &str = "mle";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleConfig {
    /// Assumed classifier accuracy, strictly between 0.5 and 1.
    pub accuracy: f64,
    /// Switch budget: the result has strictly fewer than this many switches.
    pub max_changes: usize,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self {
            accuracy: 0.9,
            max_changes: 10,
        }
    }
}

impl MleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.accuracy > 0.5 && self.accuracy < 1.0) {
            return Err(invalid_parameter(format!(
                "accuracy must be in (0.5, 1), got {}",
                self.accuracy
            )));
        }
        if self.max_changes == 0 {
            return Err(invalid_parameter(
                "a switch budget of 0 admits no labeling (fewer than 0 switches)",
            ));
        }
        Ok(())
    }

    /// Log-likelihood of a labeling with `agree` matches out of `n`.
    pub fn log_likelihood(&self, agree: usize, n: usize) -> f64 {
        agree as f64 * self.accuracy.ln() + (n - agree) as f64 * (1.0 - self.accuracy).ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleResult {
    pub labels: Vec<u8>,
    pub log_likelihood: f64,
    pub changes: ChangePointSet,
}

/// Exact optimum by dynamic programming over (index, label, switches used).
///
/// Ties prefer a final label of 0, then fewer switches; during backtracking
/// an equal-scoring predecessor without a switch wins.
pub fn mle_detect(l: &LabelSeries, cfg: &MleConfig) -> Result<MleResult> {
    cfg.validate()?;
    let x = l.labels();
    let n = x.len();
    let budget = cfg.max_changes.min(n); // switches used range over 0..budget
    const NONE: i64 = i64::MIN / 4;

    // best[i][label][s]
    let idx = |i: usize, lab: usize, s: usize| (i * 2 + lab) * budget + s;
    let mut best = vec![NONE; n * 2 * budget];
    let mut from_switch = vec![false; n * 2 * budget];
    for lab in 0..2 {
        best[idx(0, lab, 0)] = i64::from(usize::from(x[0]) == lab);
    }
    for i in 1..n {
        for lab in 0..2 {
            let gain = i64::from(usize::from(x[i]) == lab);
            for s in 0..budget {
                let stay = best[idx(i - 1, lab, s)];
                let switch = if s > 0 { best[idx(i - 1, 1 - lab, s - 1)] } else { NONE };
                let (prev, switched) = if switch > stay { (switch, true) } else { (stay, false) };
                if prev > NONE {
                    best[idx(i, lab, s)] = prev + gain;
                    from_switch[idx(i, lab, s)] = switched;
                }
            }
        }
    }

    let mut end = (0usize, 0usize, NONE);
    for lab in 0..2 {
        for s in 0..budget {
            let v = best[idx(n - 1, lab, s)];
            if v > end.2 {
                end = (lab, s, v);
            }
        }
    }
    let (mut lab, mut s, agree) = end;
    let mut labels = vec![0u8; n];
    for i in (0..n).rev() {
        labels[i] = lab as u8;
        if i > 0 && from_switch[idx(i, lab, s)] {
            lab = 1 - lab;
            s -= 1;
        }
    }

    let points = (1..n)
        .filter(|&i| labels[i] != labels[i - 1])
        .map(|i| Ok(ChangePoint::at(l.time_of_index(i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(MleResult {
        log_likelihood: cfg.log_likelihood(agree as usize, n),
        labels,
        changes: ChangePointSet::new(MLE_ID, points),
    })
}
