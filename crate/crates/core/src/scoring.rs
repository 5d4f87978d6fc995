//! Word error rate from a minimum-edit-distance alignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub ref_length: usize,
    pub wer: f64,
}

impl WerReport {
    fn from_counts(substitutions: usize, deletions: usize, insertions: usize, ref_length: usize) -> Self {
        WerReport {
            substitutions,
            deletions,
            insertions,
            ref_length,
            wer: (substitutions + deletions + insertions) as f64 / ref_length as f64,
        }
    }

    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }
}

/// One step of an alignment between a reference and a hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditOp {
    Match,
    Substitution,
    Insertion,
    Deletion,
}

/// An optimal unit-cost alignment, in reference order.
///
/// When several predecessors are optimal the backtrace prefers the diagonal
/// (match or substitution), then insertion, then deletion.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Vec<EditOp> {
    let (n, m) = (reference.len(), hypothesis.len());
    let width = m + 1;
    let mut dist = vec![0usize; (n + 1) * width];
    for (j, d) in dist.iter_mut().take(width).enumerate() {
        *d = j;
    }
    for i in 1..=n {
        dist[i * width] = i;
        for j in 1..=m {
            let cost = usize::from(reference[i - 1] != hypothesis[j - 1]);
            let diag = dist[(i - 1) * width + j - 1] + cost;
            let ins = dist[i * width + j - 1] + 1;
            let del = dist[(i - 1) * width + j] + 1;
            dist[i * width + j] = diag.min(ins).min(del);
        }
    }

    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dist[i * width + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if here == dist[(i - 1) * width + j - 1] + usize::from(!same) {
                ops.push(if same { EditOp::Match } else { EditOp::Substitution });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if j > 0 && here == dist[i * width + j - 1] + 1 {
            ops.push(EditOp::Insertion);
            j -= 1;
        } else {
            ops.push(EditOp::Deletion);
            i -= 1;
        }
    }
    ops.reverse();
    ops
}

pub fn align_and_score<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<WerReport> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let (mut s, mut d, mut i) = (0, 0, 0);
    for op in align(reference, hypothesis) {
        match op {
            EditOp::Match => {}
            EditOp::Substitution => s += 1,
            EditOp::Deletion => d += 1,
            EditOp::Insertion => i += 1,
        }
    }
    Ok(WerReport::from_counts(s, d, i, reference.len()))
}

/// Pools error counts and reference lengths over all pairs.
pub fn corpus_wer<'a, T, I>(pairs: I) -> Result<WerReport>
where
    T: PartialEq + 'a,
    I: IntoIterator<Item = (&'a [T], &'a [T])>,
{
    let mut total = (0, 0, 0, 0);
    let mut count = 0usize;
    for (reference, hypothesis) in pairs {
        let r = align_and_score(reference, hypothesis)?;
        total.0 += r.substitutions;
        total.1 += r.deletions;
        total.2 += r.insertions;
        total.3 += r.ref_length;
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(WerReport::from_counts(total.0, total.1, total.2, total.3))
}

/// `(baseline - new) / baseline`; zero when the baseline is already perfect.
pub fn relative_reduction(baseline_wer: f64, new_wer: f64) -> f64 {
    if baseline_wer == 0.0 {
        0.0
    } else {
        (baseline_wer - new_wer) / baseline_wer
    }
}
