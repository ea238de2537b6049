//! ROC curve by descending-threshold sweep, AUC by the trapezoid rule.
//! Tied scores collapse into single sweep steps.

use serde::{Deserialize, Serialize};

use super::LearnerError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Labels are +1 (positive) / -1. Both classes must be present.
pub fn compute_roc(scores: &[f64], labels: &[f64]) -> Result<RocCurve, LearnerError> {
    let pos = labels.iter().filter(|y| **y > 0.0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(LearnerError::DegenerateData);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        // consume the whole tie group in one step
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] > 0.0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let point = RocPoint {
            threshold: score,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        };
        auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
        points.push(point);
    }
    Ok(RocCurve { points, auc })
}
