use crate::{Error, Result};

/// Detector thresholds swept between the minimum and maximum score.
pub const THRESHOLDS: usize = 100;

/// Area under the ROC curve of `scores` as a detector for `labels`.
///
/// Sweeps [`THRESHOLDS`] evenly spaced thresholds from `min(scores)` to
/// `max(scores)`, adds the `(0, 0)` and `(1, 1)` corners, integrates with the
/// trapezoid rule, and keeps the better of the two orientations (high score
/// means positive, or low score means positive). The result is therefore at
/// least 0.5.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    auroc_with_thresholds(scores, labels, THRESHOLDS)
}

pub fn auroc_with_thresholds(scores: &[f64], labels: &[bool], thresholds: usize) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Shape {
            op: "auroc",
            left: (scores.len(), 1),
            right: (labels.len(), 1),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    if thresholds < 2 {
        return Err(Error::InvalidArgument("at least two thresholds are needed".into()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite("auroc scores"));
    }
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let (p, n) = (positives as f64, negatives as f64);
    let mut high = alloc::vec::Vec::with_capacity(thresholds + 2);
    let mut low = alloc::vec::Vec::with_capacity(thresholds + 2);
    for t in 0..thresholds {
        let thr = lo + (hi - lo) * t as f64 / (thresholds - 1) as f64;
        let (mut tp_hi, mut fp_hi, mut tp_lo, mut fp_lo) = (0usize, 0usize, 0usize, 0usize);
        for (&s, &l) in scores.iter().zip(labels) {
            if s >= thr {
                if l {
                    tp_hi += 1;
                } else {
                    fp_hi += 1;
                }
            }
            if s <= thr {
                if l {
                    tp_lo += 1;
                } else {
                    fp_lo += 1;
                }
            }
        }
        high.push((fp_hi as f64 / n, tp_hi as f64 / p));
        low.push((fp_lo as f64 / n, tp_lo as f64 / p));
    }
    Ok(roc_area(high).max(roc_area(low)))
}

/// Trapezoidal area under `(fpr, tpr)` points plus the two corners.
fn roc_area(mut points: alloc::vec::Vec<(f64, f64)>) -> f64 {
    points.push((0.0, 0.0));
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};
    use alloc::vec::Vec;
    use rand::Rng;

    /// Probability a random positive outscores a random negative, ties half.
    fn rank_oracle(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &si) in scores.iter().enumerate() {
            for (j, &sj) in scores.iter().enumerate() {
                if labels[i] && !labels[j] {
                    pairs += 1.0;
                    wins += if si > sj {
                        1.0
                    } else if si == sj {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        let a: f64 = wins / pairs;
        a.max(1.0 - a)
    }

    #[test]
    fn perfect_separation() {
        let s = [0.1, 0.2, 0.3, 0.7, 0.8, 0.9];
        let l = [false, false, false, true, true, true];
        assert!((auroc(&s, &l).unwrap() - 1.0).abs() < 1e-12);
        let flipped: Vec<bool> = l.iter().map(|b| !b).collect();
        assert!((auroc(&s, &flipped).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_point_example_matches_rank_count() {
        let s = [0.1, 0.4, 0.35, 0.8];
        let l = [false, false, true, true];
        let got = auroc(&s, &l).unwrap();
        assert!((rank_oracle(&s, &l) - 0.75).abs() < 1e-12);
        assert!((got - 0.75).abs() <= 0.02, "{got}");
    }

    #[test]
    fn random_labels_sit_near_one_half_and_never_below() {
        let mut rng = stream(1, Purpose::Synthetic, 0);
        let s: Vec<f64> = (0..5000).map(|_| rng.gen()).collect();
        let l: Vec<bool> = (0..5000).map(|_| rng.gen()).collect();
        let a = auroc(&s, &l).unwrap();
        assert!((0.5..0.53).contains(&a), "{a}");
    }

    #[test]
    fn random_scores_agree_with_rank_oracle() {
        let mut rng = stream(2, Purpose::Synthetic, 0);
        for _ in 0..5 {
            let l: Vec<bool> = (0..400).map(|_| rng.gen()).collect();
            let s: Vec<f64> =
                l.iter().map(|&b| rng.gen::<f64>() + if b { 0.3 } else { 0.0 }).collect();
            let a = auroc(&s, &l).unwrap();
            assert!((a - rank_oracle(&s, &l)).abs() <= 0.02);
        }
    }

    #[test]
    fn constant_scores_give_one_half() {
        assert_eq!(auroc(&[0.3; 4], &[true, false, true, false]).unwrap(), 0.5);
    }

    #[test]
    fn single_class_is_an_error() {
        assert_eq!(auroc(&[0.1, 0.2], &[true, true]).unwrap_err(), Error::SingleClass);
        assert!(auroc(&[0.1], &[true, false]).is_err());
    }
}
