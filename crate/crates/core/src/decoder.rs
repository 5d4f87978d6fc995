//! Exact log-domain Viterbi decoding over a small HMM, plus an exhaustive
//! enumeration oracle for tiny instances.
//!
//! Ties are broken toward lower state indices: the final state is the lowest
//! index among the best, and each back-pointer is the lowest predecessor among
//! the best. Among equally scored paths this selects the one that is smallest
//! when compared from the last frame backwards, which is the rule the
//! exhaustive decoder applies directly.

use crate::error::{Error, Result};
use crate::posterior::{LogScoreMatrix, LOG_FLOOR};

/// Row sums of initial and transition probabilities must be 1 within this.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-6;

/// Upper bound on `num_states ^ frames` for [`exhaustive_decode`].
pub const EXHAUSTIVE_PATH_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    log_initial: Vec<f64>,
    log_transitions: Vec<f64>,
    state_labels: Vec<String>,
    state_to_class: Vec<usize>,
}

fn log_or_floor(p: f64) -> f64 {
    if p == 0.0 {
        LOG_FLOOR
    } else {
        p.ln()
    }
}

fn exp_or_zero(log_p: f64) -> f64 {
    if log_p <= LOG_FLOOR {
        0.0
    } else {
        log_p.exp()
    }
}

fn check_distribution(what: &str, probs: &[f64]) -> Result<()> {
    if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::InvalidHmm(format!("{what} has invalid probability {bad}")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
        return Err(Error::InvalidHmm(format!("{what} sums to {sum}, expected 1")));
    }
    Ok(())
}

impl HmmModel {
    /// Builds a model from linear probabilities, validating every invariant.
    pub fn from_probabilities(
        initial: &[f64],
        transitions: &[Vec<f64>],
        state_labels: Vec<String>,
        state_to_class: Vec<usize>,
    ) -> Result<Self> {
        let n = initial.len();
        if n == 0 {
            return Err(Error::InvalidHmm("model has no states".into()));
        }
        check_distribution("initial distribution", initial)?;
        if transitions.len() != n {
            return Err(Error::InvalidHmm(format!(
                "{} transition rows for {n} states",
                transitions.len()
            )));
        }
        for (i, row) in transitions.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidHmm(format!(
                    "transition row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            check_distribution(&format!("transition row {i}"), row)?;
        }
        if state_labels.len() != n {
            return Err(Error::InvalidHmm(format!(
                "{} labels for {n} states",
                state_labels.len()
            )));
        }
        if state_to_class.len() != n {
            return Err(Error::InvalidHmm(format!(
                "{} state_to_class entries for {n} states",
                state_to_class.len()
            )));
        }
        Ok(HmmModel {
            log_initial: initial.iter().copied().map(log_or_floor).collect(),
            log_transitions: transitions.iter().flatten().copied().map(log_or_floor).collect(),
            state_labels,
            state_to_class,
        })
    }

    pub fn num_states(&self) -> usize {
        self.log_initial.len()
    }

    /// One more than the largest class column any state emits from.
    pub fn num_classes(&self) -> usize {
        self.state_to_class.iter().max().map_or(0, |m| m + 1)
    }

    pub fn log_initial(&self) -> &[f64] {
        &self.log_initial
    }

    pub fn log_transition(&self, from: usize, to: usize) -> f64 {
        self.log_transitions[from * self.num_states() + to]
    }

    pub fn state_labels(&self) -> &[String] {
        &self.state_labels
    }

    pub fn state_to_class(&self) -> &[usize] {
        &self.state_to_class
    }

    pub fn initial_probabilities(&self) -> Vec<f64> {
        self.log_initial.iter().copied().map(exp_or_zero).collect()
    }

    pub fn transition_probabilities(&self) -> Vec<Vec<f64>> {
        self.log_transitions
            .chunks_exact(self.num_states())
            .map(|row| row.iter().copied().map(exp_or_zero).collect())
            .collect()
    }

    /// Merges consecutive repeats of the label sequence along a state path.
    pub fn collapse_labels(&self, path: &[usize]) -> Vec<String> {
        let mut tokens: Vec<String> = Vec::new();
        for &s in path {
            let label = &self.state_labels[s];
            if tokens.last() != Some(label) {
                tokens.push(label.clone());
            }
        }
        tokens
    }

    fn check_scores(&self, scores: &LogScoreMatrix) -> Result<()> {
        if let Some((state, &class)) = self
            .state_to_class
            .iter()
            .enumerate()
            .find(|(_, &c)| c >= scores.classes())
        {
            return Err(Error::Shape(format!(
                "state {state} emits from class {class}, but scores have {} classes",
                scores.classes()
            )));
        }
        Ok(())
    }

    #[inline]
    fn emission(&self, scores: &LogScoreMatrix, frame: usize, state: usize) -> f64 {
        scores.get(frame, self.state_to_class[state])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodingResult {
    pub state_path: Vec<usize>,
    pub token_sequence: Vec<String>,
    pub log_score: f64,
}

pub fn viterbi_decode(scores: &LogScoreMatrix, hmm: &HmmModel) -> Result<DecodingResult> {
    hmm.check_scores(scores)?;
    let n = hmm.num_states();
    let frames = scores.frames();

    let mut delta: Vec<f64> = (0..n)
        .map(|s| hmm.log_initial[s] + hmm.emission(scores, 0, s))
        .collect();
    let mut next = vec![0.0; n];
    let mut back = vec![0usize; frames * n];

    for t in 1..frames {
        for s in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (p, &d) in delta.iter().enumerate() {
                let cand = d + hmm.log_transition(p, s);
                if cand > best {
                    best = cand;
                    arg = p;
                }
            }
            next[s] = best + hmm.emission(scores, t, s);
            back[t * n + s] = arg;
        }
        std::mem::swap(&mut delta, &mut next);
    }

    let (mut state, log_score) =
        delta.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |(bs, bv), (s, &v)| if v > bv { (s, v) } else { (bs, bv) },
        );

    let mut state_path = vec![0; frames];
    for t in (0..frames).rev() {
        state_path[t] = state;
        if t > 0 {
            state = back[t * n + state];
        }
    }
    Ok(DecodingResult {
        token_sequence: hmm.collapse_labels(&state_path),
        state_path,
        log_score,
    })
}

/// Scores every one of the `num_states ^ frames` paths.
pub fn exhaustive_decode(scores: &LogScoreMatrix, hmm: &HmmModel) -> Result<DecodingResult> {
    hmm.check_scores(scores)?;
    let n = hmm.num_states();
    let frames = scores.frames();
    let paths = (n as f64).powi(frames as i32);
    if paths > EXHAUSTIVE_PATH_LIMIT {
        return Err(Error::TooLarge {
            paths,
            limit: EXHAUSTIVE_PATH_LIMIT,
        });
    }

    // Odometer with frame 0 as the fastest digit: paths come out in ascending
    // order when compared from the last frame, so the first best path wins.
    let mut path = vec![0usize; frames];
    let mut best_path = path.clone();
    let mut best_score = f64::NEG_INFINITY;
    loop {
        let score = accumulate(&path, scores, hmm);
        if score > best_score {
            best_score = score;
            best_path.copy_from_slice(&path);
        }
        let mut digit = 0;
        loop {
            if digit == frames {
                return Ok(DecodingResult {
                    token_sequence: hmm.collapse_labels(&best_path),
                    state_path: best_path,
                    log_score: best_score,
                });
            }
            path[digit] += 1;
            if path[digit] < n {
                break;
            }
            path[digit] = 0;
            digit += 1;
        }
    }
}

// Same association order as the Viterbi recursion, so equal paths score
// bit-identically.
fn accumulate(path: &[usize], scores: &LogScoreMatrix, hmm: &HmmModel) -> f64 {
    let mut score = hmm.log_initial[path[0]] + hmm.emission(scores, 0, path[0]);
    for t in 1..path.len() {
        score = score + hmm.log_transition(path[t - 1], path[t]) + hmm.emission(scores, t, path[t]);
    }
    score
}

/// Total log-probability of one state path.
pub fn score_path(path: &[usize], scores: &LogScoreMatrix, hmm: &HmmModel) -> Result<f64> {
    hmm.check_scores(scores)?;
    if path.len() != scores.frames() {
        return Err(Error::Shape(format!(
            "path has {} states for {} frames",
            path.len(),
            scores.frames()
        )));
    }
    if let Some(&bad) = path.iter().find(|&&s| s >= hmm.num_states()) {
        return Err(Error::InvalidHmm(format!(
            "state index {bad} out of range for {} states",
            hmm.num_states()
        )));
    }
    Ok(accumulate(path, scores, hmm))
}
