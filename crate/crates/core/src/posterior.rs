//! Frame-by-class posterior matrices and their conversion to decoder scores.

use crate::error::{Error, Result};
use crate::mink::{closed_form_transform, LossOrder, Posterior};

/// Rows of a loaded posterior matrix must sum to 1 within this tolerance.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

/// Stand-in for `ln 0`. Finite, so DP sums stay comparable.
pub const LOG_FLOOR: f64 = -1e30;

/// Row-major `frames x classes` matrix of probabilities in `[0, 1]`.
///
/// Rows of a matrix read from disk or produced with renormalization sum to 1.
/// A transform without renormalization keeps entries in `[0, 1]` but not the
/// row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorMatrix {
    frames: usize,
    classes: usize,
    values: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn new(frames: usize, classes: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(frames, classes, values.len())?;
        if let Some(&value) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfUnitInterval {
                name: "posterior entry",
                value,
            });
        }
        Ok(PosteriorMatrix {
            frames,
            classes,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let classes = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != classes) {
            return Err(Error::Shape(format!(
                "row {bad} has {} entries, expected {classes}",
                rows[bad].len()
            )));
        }
        Self::new(rows.len(), classes, rows.concat())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, frame: usize, class: usize) -> f64 {
        self.values[frame * self.classes + class]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.classes..(frame + 1) * self.classes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.classes)
    }

    /// Index of the first row whose sum is off by more than `tolerance`,
    /// together with that sum.
    pub fn first_unnormalized_row(&self, tolerance: f64) -> Option<(usize, f64)> {
        self.rows()
            .map(|r| r.iter().sum::<f64>())
            .enumerate()
            .find(|(_, s)| (s - 1.0).abs() > tolerance)
    }
}

/// Natural-log decoder scores, same shape as the posterior matrix they came
/// from. Zeros are mapped to [`LOG_FLOOR`].
#[derive(Debug, Clone, PartialEq)]
pub struct LogScoreMatrix {
    frames: usize,
    classes: usize,
    values: Vec<f64>,
}

impl LogScoreMatrix {
    pub fn new(frames: usize, classes: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(frames, classes, values.len())?;
        if let Some(bad) = values.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
            return Err(Error::Shape(format!("log score {bad} is not usable")));
        }
        Ok(LogScoreMatrix {
            frames,
            classes,
            values,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, frame: usize, class: usize) -> f64 {
        self.values[frame * self.classes + class]
    }

    pub fn row(&self, frame: usize) -> &[f64] {
        &self.values[frame * self.classes..(frame + 1) * self.classes]
    }

    /// Adds `offset` to every score of one frame.
    pub fn shift_frame(&mut self, frame: usize, offset: f64) {
        let classes = self.classes;
        for v in &mut self.values[frame * classes..(frame + 1) * classes] {
            *v += offset;
        }
    }
}

fn check_shape(frames: usize, classes: usize, len: usize) -> Result<()> {
    if frames == 0 {
        return Err(Error::Shape("matrix needs at least one frame".into()));
    }
    if classes < 2 {
        return Err(Error::Shape(format!("matrix needs at least 2 classes, got {classes}")));
    }
    if frames.checked_mul(classes) != Some(len) {
        return Err(Error::Shape(format!(
            "{len} values do not fill a {frames}x{classes} matrix"
        )));
    }
    Ok(())
}

/// Maps every entry through the order-`order` transform, each class on its
/// own, then optionally rescales rows to sum to 1.
pub fn transform_matrix(posteriors: &PosteriorMatrix, order: LossOrder, renormalize: bool) -> Result<PosteriorMatrix> {
    let values: Vec<f64> = posteriors
        .values
        .iter()
        // entries are validated on construction
        .map(|&v| closed_form_transform(Posterior::new(v).expect("entry in [0, 1]"), order).value())
        .collect();
    if renormalize {
        renormalize_rows(posteriors.frames, posteriors.classes, values)
    } else {
        PosteriorMatrix::new(posteriors.frames, posteriors.classes, values)
    }
}

/// Rescales each row of a nonnegative matrix to sum to 1.
pub fn renormalize_rows(frames: usize, classes: usize, mut values: Vec<f64>) -> Result<PosteriorMatrix> {
    check_shape(frames, classes, values.len())?;
    for (row, chunk) in values.chunks_exact_mut(classes).enumerate() {
        if let Some(col) = chunk.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::NegativeEntry {
                row,
                col,
                value: chunk[col],
            });
        }
        let sum: f64 = chunk.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::DegenerateRow { row });
        }
        for v in chunk.iter_mut() {
            *v /= sum;
        }
    }
    PosteriorMatrix::new(frames, classes, values)
}

/// `ln p`, or `ln p - ln prior` when class priors are given.
pub fn to_log_scores(posteriors: &PosteriorMatrix, priors: Option<&[f64]>) -> Result<LogScoreMatrix> {
    let log_priors = match priors {
        Some(priors) => {
            if priors.len() != posteriors.classes {
                return Err(Error::Shape(format!(
                    "{} class priors for {} classes",
                    priors.len(),
                    posteriors.classes
                )));
            }
            let mut logs = Vec::with_capacity(priors.len());
            for (index, &value) in priors.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(Error::InvalidPrior { index, value });
                }
                logs.push(value.ln());
            }
            Some(logs)
        }
        None => None,
    };

    let classes = posteriors.classes;
    let values = posteriors
        .values
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if p == 0.0 {
                return LOG_FLOOR;
            }
            match &log_priors {
                Some(lp) => p.ln() - lp[i % classes],
                None => p.ln(),
            }
        })
        .collect();
    LogScoreMatrix::new(posteriors.frames, classes, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shape_checks() {
        assert!(PosteriorMatrix::new(0, 2, vec![]).is_err());
        assert!(PosteriorMatrix::new(1, 1, vec![1.0]).is_err());
        assert!(PosteriorMatrix::new(1, 2, vec![0.5]).is_err());
        assert!(PosteriorMatrix::new(1, 2, vec![0.5, 1.5]).is_err());
        assert!(PosteriorMatrix::new(1, 2, vec![0.5, f64::NAN]).is_err());
        assert!(PosteriorMatrix::from_rows(&[vec![0.5, 0.5], vec![1.0]]).is_err());
    }

    #[test]
    fn transform_fixed_point_row() {
        let m = PosteriorMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let t = transform_matrix(&m, LossOrder::FOURTH, true).unwrap();
        assert_eq!(t.values(), &[0.5, 0.5]);
    }

    #[test]
    fn transform_two_class_without_renormalization() {
        let m = PosteriorMatrix::from_rows(&[vec![0.9, 0.1]]).unwrap();
        let t = transform_matrix(&m, LossOrder::FOURTH, false).unwrap();
        assert!(close(t.get(0, 0), 0.675334, 5e-7));
        assert!(close(t.get(0, 1), 0.324666, 5e-7));
        assert!(close(t.row(0).iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn transform_three_class_with_renormalization() {
        let m = PosteriorMatrix::from_rows(&[vec![0.8, 0.1, 0.1]]).unwrap();
        let raw = transform_matrix(&m, LossOrder::FOURTH, false).unwrap();
        assert!(close(raw.get(0, 0), 0.613512, 5e-7));
        assert!(close(raw.get(0, 1), 0.324666, 5e-7));
        let t = transform_matrix(&m, LossOrder::FOURTH, true).unwrap();
        assert!(close(t.get(0, 0), 0.485817, 5e-7));
        assert!(close(t.get(0, 1), 0.257091, 5e-7));
        assert!(close(t.get(0, 2), 0.257091, 5e-7));
        assert!(close(t.row(0).iter().sum::<f64>(), 1.0, 1e-12));
    }

    #[test]
    fn order_two_is_bit_identical() {
        let m = PosteriorMatrix::from_rows(&[vec![0.123456789, 0.876543211], vec![0.3, 0.7]]).unwrap();
        let t = transform_matrix(&m, LossOrder::SQUARED, false).unwrap();
        assert_eq!(t, m);
    }

    #[test]
    fn log_scores_examples() {
        let m = PosteriorMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        assert_eq!(to_log_scores(&m, None).unwrap().values(), &[0.0, LOG_FLOOR]);

        let m = PosteriorMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        let s = to_log_scores(&m, None).unwrap();
        assert!(close(s.get(0, 0), -std::f64::consts::LN_2, 1e-15));
        assert!(close(s.get(0, 1), -std::f64::consts::LN_2, 1e-15));

        let s = to_log_scores(&m, Some(&[0.9, 0.1])).unwrap();
        assert!(close(s.get(0, 0), 0.5f64.ln() - 0.9f64.ln(), 1e-15));
        assert!(close(s.get(0, 0), -0.587787, 5e-7));
        assert!(close(s.get(0, 1), 1.609438, 5e-7));
    }

    #[test]
    fn log_scores_reject_bad_priors() {
        let m = PosteriorMatrix::from_rows(&[vec![0.5, 0.5]]).unwrap();
        assert!(matches!(to_log_scores(&m, Some(&[1.0])), Err(Error::Shape(_))));
        assert!(matches!(
            to_log_scores(&m, Some(&[0.0, 1.0])),
            Err(Error::InvalidPrior { index: 0, .. })
        ));
    }

    #[test]
    fn renormalize_examples() {
        assert_eq!(renormalize_rows(1, 2, vec![2.0, 2.0]).unwrap().values(), &[0.5, 0.5]);
        assert_eq!(renormalize_rows(1, 2, vec![1.0, 3.0]).unwrap().values(), &[0.25, 0.75]);
        assert!(matches!(
            renormalize_rows(2, 2, vec![1.0, 1.0, 0.0, 0.0]),
            Err(Error::DegenerateRow { row: 1 })
        ));
        assert!(matches!(
            renormalize_rows(1, 2, vec![-1.0, 3.0]),
            Err(Error::NegativeEntry { row: 0, col: 0, .. })
        ));
    }

    #[test]
    fn unnormalized_row_detection() {
        let m = PosteriorMatrix::from_rows(&[vec![0.5, 0.5], vec![0.7, 0.2]]).unwrap();
        let (row, sum) = m.first_unnormalized_row(ROW_SUM_TOLERANCE).unwrap();
        assert_eq!(row, 1);
        assert!(close(sum, 0.9, 1e-12));
    }
}
