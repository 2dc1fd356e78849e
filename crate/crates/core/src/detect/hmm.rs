//! Two-state hidden Markov model with scalar Gaussian emissions.
//!
//! Parameters are estimated with Baum-Welch on scaled forward-backward
//! recursions; the latent path is decoded with Viterbi in log space. A
//! change-point is reported wherever two adjacent decoded states differ.

use crate::bovw::kmeans_fit;
use crate::error::{invalid_input, invalid_parameter, Result};
use crate::series::{savitzky_golay_values, ChangePoint, ChangePointSet, ScoreSeries};

pub const HMM_ID: &str = "hmm";
pub const SIGMA_FLOOR: f64 = 1e-3;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Initial distribution, transition matrix and per-state Gaussian emission
/// parameters. State 1 is the positive state (larger mean) after fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmParams {
    pub initial: [f64; 2],
    pub transition: [[f64; 2]; 2],
    pub mean: [f64; 2],
    pub sigma: [f64; 2],
}

impl HmmParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        let sums_to_one = |r: &[f64; 2]| (r[0] + r[1] - 1.0).abs() < 1e-9 && prob(r[0]) && prob(r[1]);
        if !sums_to_one(&self.initial) {
            return Err(invalid_parameter("initial distribution must sum to 1"));
        }
        if !self.transition.iter().all(sums_to_one) {
            return Err(invalid_parameter("transition rows must sum to 1"));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(invalid_parameter("emission means must be finite"));
        }
        if self.sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid_parameter("emission deviations must be positive"));
        }
        Ok(())
    }

    pub fn log_emission(&self, state: usize, x: f64) -> f64 {
        let z = (x - self.mean[state]) / self.sigma[state];
        -LN_SQRT_2PI - self.sigma[state].ln() - 0.5 * z * z
    }

    /// Relabel states so that state 1 has the larger mean.
    pub fn canonical(self) -> Self {
        if self.mean[0] <= self.mean[1] {
            return self;
        }
        let t = self.transition;
        Self {
            initial: [self.initial[1], self.initial[0]],
            transition: [[t[1][1], t[1][0]], [t[0][1], t[0][0]]],
            mean: [self.mean[1], self.mean[0]],
            sigma: [self.sigma[1], self.sigma[0]],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HmmConfig {
    pub sg_window: usize,
    pub sg_order: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for HmmConfig {
    fn default() -> Self {
        Self {
            sg_window: 15,
            sg_order: 1,
            max_iter: 200,
            tol: 1e-6,
            seed: 0,
        }
    }
}

/// Outcome of Baum-Welch.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmFit {
    pub params: HmmParams,
    /// Log-likelihood before the first update and after each update.
    pub log_likelihoods: Vec<f64>,
    /// Input was constant, or an emission deviation sits at the floor.
    pub degenerate: bool,
}

impl HmmFit {
    pub fn iterations(&self) -> usize {
        self.log_likelihoods.len().saturating_sub(1)
    }
}

/// Sufficient statistics from one E-step.
#[derive(Default)]
struct Accumulator {
    log_likelihood: f64,
    initial: [f64; 2],
    trans: [[f64; 2]; 2],
    occupancy: [f64; 2],
    weighted_x: [f64; 2],
    weighted_x2: [f64; 2],
    sequences: usize,
}

/// Scaled forward-backward pass.
///
/// Returns per-step state posteriors, summed pairwise posteriors and the
/// log-likelihood.
fn forward_backward(x: &[f64], p: &HmmParams) -> (Vec<[f64; 2]>, [[f64; 2]; 2], f64) {
    let n = x.len();
    let mut emit = vec![[0.0; 2]; n];
    let mut shift = vec![0.0; n];
    for (t, &v) in x.iter().enumerate() {
        let lb = [p.log_emission(0, v), p.log_emission(1, v)];
        let m = lb[0].max(lb[1]);
        shift[t] = m;
        emit[t] = [(lb[0] - m).exp(), (lb[1] - m).exp()];
    }

    let mut alpha = vec![[0.0; 2]; n];
    let mut scale = vec![0.0; n];
    let mut log_likelihood = 0.0;
    for t in 0..n {
        let mut a = [0.0; 2];
        for k in 0..2 {
            let prior = if t == 0 {
                p.initial[k]
            } else {
                alpha[t - 1][0] * p.transition[0][k] + alpha[t - 1][1] * p.transition[1][k]
            };
            a[k] = prior * emit[t][k];
        }
        let c = a[0] + a[1];
        scale[t] = c;
        alpha[t] = [a[0] / c, a[1] / c];
        log_likelihood += c.ln() + shift[t];
    }

    let mut beta = vec![[1.0; 2]; n];
    for t in (0..n.saturating_sub(1)).rev() {
        for j in 0..2 {
            beta[t][j] = (0..2)
                .map(|k| p.transition[j][k] * emit[t + 1][k] * beta[t + 1][k])
                .sum::<f64>()
                / scale[t + 1];
        }
    }

    let mut gamma = vec![[0.0; 2]; n];
    for t in 0..n {
        let g = [alpha[t][0] * beta[t][0], alpha[t][1] * beta[t][1]];
        let s = g[0] + g[1];
        gamma[t] = [g[0] / s, g[1] / s];
    }
    let mut xi = [[0.0; 2]; 2];
    for t in 0..n.saturating_sub(1) {
        for j in 0..2 {
            for k in 0..2 {
                xi[j][k] += alpha[t][j] * p.transition[j][k] * emit[t + 1][k] * beta[t + 1][k]
                    / scale[t + 1];
            }
        }
    }
    (gamma, xi, log_likelihood)
}

/// Posterior state probabilities and the sequence log-likelihood.
pub fn posteriors(x: &[f64], p: &HmmParams) -> Result<(Vec<[f64; 2]>, f64)> {
    p.validate()?;
    if x.is_empty() {
        return Err(invalid_input("empty observation sequence"));
    }
    let (gamma, _, ll) = forward_backward(x, p);
    Ok((gamma, ll))
}

pub fn log_likelihood(x: &[f64], p: &HmmParams) -> Result<f64> {
    posteriors(x, p).map(|(_, ll)| ll)
}

fn e_step(sequences: &[&[f64]], p: &HmmParams) -> Accumulator {
    let mut acc = Accumulator::default();
    for x in sequences {
        let (gamma, xi, ll) = forward_backward(x, p);
        acc.log_likelihood += ll;
        acc.sequences += 1;
        for k in 0..2 {
            acc.initial[k] += gamma[0][k];
            for j in 0..2 {
                acc.trans[k][j] += xi[k][j];
            }
        }
        for (g, &v) in gamma.iter().zip(x.iter()) {
            for k in 0..2 {
                acc.occupancy[k] += g[k];
                acc.weighted_x[k] += g[k] * v;
                acc.weighted_x2[k] += g[k] * v * v;
            }
        }
    }
    acc
}

fn m_step(acc: &Accumulator, prev: &HmmParams) -> HmmParams {
    let mut next = *prev;
    let seqs = acc.sequences as f64;
    next.initial = [acc.initial[0] / seqs, acc.initial[1] / seqs];
    for j in 0..2 {
        let row = acc.trans[j][0] + acc.trans[j][1];
        if row > 0.0 {
            next.transition[j] = [acc.trans[j][0] / row, acc.trans[j][1] / row];
        }
        if acc.occupancy[j] > 0.0 {
            let m = acc.weighted_x[j] / acc.occupancy[j];
            let var = (acc.weighted_x2[j] / acc.occupancy[j] - m * m).max(0.0);
            next.mean[j] = m;
            next.sigma[j] = var.sqrt().max(SIGMA_FLOOR);
        }
    }
    next
}

/// Starting point: 2-means on the pooled observations, within-cluster
/// deviations, sticky transitions and a uniform initial distribution.
fn initial_guess(pooled: &[f64], seed: u64) -> Result<HmmParams> {
    let points: Vec<Vec<f64>> = pooled.iter().map(|&v| vec![v]).collect();
    let fit = kmeans_fit(&points, 2, seed, 100)?;
    let mut mean = [fit.centroids[0][0], fit.centroids[1][0]];
    let mut sigma = [0.0; 2];
    let mut counts = [0usize; 2];
    for (v, &a) in pooled.iter().zip(&fit.assignments) {
        sigma[a] += (v - mean[a]).powi(2);
        counts[a] += 1;
    }
    for k in 0..2 {
        sigma[k] = if counts[k] > 0 {
            (sigma[k] / counts[k] as f64).sqrt()
        } else {
            0.0
        }
        .max(SIGMA_FLOOR);
    }
    if mean[0] > mean[1] {
        mean.swap(0, 1);
        sigma.swap(0, 1);
    }
    Ok(HmmParams {
        initial: [0.5, 0.5],
        transition: [[0.95, 0.05], [0.05, 0.95]],
        mean,
        sigma,
    })
}

/// Baum-Welch over one or more independent sequences sharing parameters.
///
/// Stops when the log-likelihood gain falls below `tol` or after `max_iter`
/// updates.
pub fn hmm_fit_many(
    sequences: &[&[f64]],
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<HmmFit> {
    if sequences.is_empty() || sequences.iter().any(|s| s.is_empty()) {
        return Err(invalid_input("HMM fit needs non-empty sequences"));
    }
    let pooled: Vec<f64> = sequences.iter().flat_map(|s| s.iter().copied()).collect();
    if pooled.len() < 4 {
        return Err(invalid_input(format!(
            "HMM fit needs at least 4 observations, got {}",
            pooled.len()
        )));
    }
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(invalid_input("observations must be finite"));
    }
    if !(tol >= 0.0) {
        return Err(invalid_parameter("tolerance must be non-negative"));
    }

    let first = pooled[0];
    if pooled.iter().all(|&v| v == first) {
        let params = HmmParams {
            initial: [0.5, 0.5],
            transition: [[0.95, 0.05], [0.05, 0.95]],
            mean: [first, first],
            sigma: [SIGMA_FLOOR, SIGMA_FLOOR],
        };
        let ll = sequences.iter().map(|s| forward_backward(s, &params).2).sum();
        return Ok(HmmFit {
            params,
            log_likelihoods: vec![ll],
            degenerate: true,
        });
    }

    let mut params = initial_guess(&pooled, seed)?;
    let mut acc = e_step(sequences, &params);
    let mut history = vec![acc.log_likelihood];
    for _ in 0..max_iter {
        let next = m_step(&acc, &params);
        let next_acc = e_step(sequences, &next);
        let gain = next_acc.log_likelihood - acc.log_likelihood;
        history.push(next_acc.log_likelihood);
        params = next;
        acc = next_acc;
        if gain < tol {
            break;
        }
    }
    let params = params.canonical();
    Ok(HmmFit {
        degenerate: params.sigma.iter().any(|&s| s <= SIGMA_FLOOR),
        params,
        log_likelihoods: history,
    })
}

pub fn hmm_fit(s: &ScoreSeries, seed: u64, max_iter: usize, tol: f64) -> Result<HmmFit> {
    hmm_fit_many(&[s.values()], seed, max_iter, tol)
}

/// Most probable state path. Ties prefer state 0.
pub fn viterbi(x: &[f64], p: &HmmParams) -> Result<Vec<u8>> {
    p.validate()?;
    let n = x.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let log_a = p.transition.map(|row| row.map(f64::ln));
    let mut delta = [
        p.initial[0].ln() + p.log_emission(0, x[0]),
        p.initial[1].ln() + p.log_emission(1, x[0]),
    ];
    let mut back = vec![[0u8; 2]; n];
    for t in 1..n {
        let mut next = [0.0; 2];
        for k in 0..2 {
            let via0 = delta[0] + log_a[0][k];
            let via1 = delta[1] + log_a[1][k];
            let (best, from) = if via1 > via0 { (via1, 1) } else { (via0, 0) };
            next[k] = best + p.log_emission(k, x[t]);
            back[t][k] = from;
        }
        delta = next;
    }
    let mut state = u8::from(delta[1] > delta[0]);
    let mut path = vec![0u8; n];
    for t in (0..n).rev() {
        path[t] = state;
        state = back[t][state as usize];
    }
    Ok(path)
}

/// Log joint probability of a state path and the observations.
pub fn path_log_probability(x: &[f64], path: &[u8], p: &HmmParams) -> f64 {
    let mut lp = p.initial[path[0] as usize].ln() + p.log_emission(path[0] as usize, x[0]);
    for t in 1..x.len() {
        let (a, b) = (path[t - 1] as usize, path[t] as usize);
        lp += p.transition[a][b].ln() + p.log_emission(b, x[t]);
    }
    lp
}

/// Smooth with Savitzky-Golay, decode, and report each state switch at the
/// first index of the new state.
pub fn hmm_detect(
    s: &ScoreSeries,
    params: &HmmParams,
    sg_window: usize,
    sg_order: usize,
) -> Result<ChangePointSet> {
    let smoothed = savitzky_golay_values(s.values(), sg_window, sg_order)?;
    let path = viterbi(&smoothed, params)?;
    let points = (1..path.len())
        .filter(|&i| path[i] != path[i - 1])
        .map(|i| Ok(ChangePoint::at(s.time_of_index(i)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ChangePointSet::new(HMM_ID, points))
}
