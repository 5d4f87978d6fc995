#![allow(dead_code)]

use minkloss::decoder::HmmModel;
use minkloss::posterior::{LogScoreMatrix, PosteriorMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / sum).collect()
}

/// Random HMM with `states` states over `classes` classes.
pub fn random_hmm(rng: &mut ChaCha8Rng, states: usize, classes: usize) -> HmmModel {
    let initial = random_distribution(rng, states);
    let transitions: Vec<Vec<f64>> = (0..states).map(|_| random_distribution(rng, states)).collect();
    let labels = (0..states).map(|s| format!("w{}", s % 3)).collect();
    let state_to_class = (0..states)
        .map(|s| if s < classes { s } else { rng.gen_range(0..classes) })
        .collect();
    HmmModel::from_probabilities(&initial, &transitions, labels, state_to_class).unwrap()
}

pub fn uniform_hmm(states: usize) -> HmmModel {
    let p = 1.0 / states as f64;
    HmmModel::from_probabilities(
        &vec![p; states],
        &vec![vec![p; states]; states],
        (0..states).map(|s| format!("w{s}")).collect(),
        (0..states).collect(),
    )
    .unwrap()
}

pub fn random_posteriors(rng: &mut ChaCha8Rng, frames: usize, classes: usize) -> PosteriorMatrix {
    let rows: Vec<Vec<f64>> = (0..frames).map(|_| random_distribution(rng, classes)).collect();
    PosteriorMatrix::from_rows(&rows).unwrap()
}

pub fn random_log_scores(rng: &mut ChaCha8Rng, frames: usize, classes: usize) -> LogScoreMatrix {
    let values = (0..frames * classes).map(|_| rng.gen_range(-6.0..0.0)).collect();
    LogScoreMatrix::new(frames, classes, values).unwrap()
}

/// Textbook full-matrix Levenshtein distance.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}

pub fn random_tokens(rng: &mut ChaCha8Rng, max_len: usize, min_len: usize) -> Vec<String> {
    let len = rng.gen_range(min_len..=max_len);
    (0..len).map(|_| format!("t{}", rng.gen_range(0..5))).collect()
}

pub fn argmax(row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) },
        )
        .0
}

pub fn ranking(row: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..row.len()).collect();
    idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
    idx
}

/// Independent grid argmin of the expected loss, written out longhand.
pub fn grid_argmin(mu: f64, order: i32, steps: usize) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let y = i as f64 / steps as f64;
        let loss = (1.0 - mu) * y.powi(order) + mu * (1.0 - y).powi(order);
        if loss < best.0 {
            best = (loss, y);
        }
    }
    best.1
}
