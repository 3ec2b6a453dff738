//! Per-class precision, recall and F1 in a two-class report.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::NodeLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub anomaly: ClassMetrics,
    pub normal: ClassMetrics,
    pub accuracy: f64,
    pub total: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(predicted: &[NodeLabel], truth: &[NodeLabel], positive: NodeLabel) -> ClassMetrics {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for (&p, &t) in predicted.iter().zip(truth) {
        match (p == positive, t == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// 0/0 precision or recall is reported as 0.
pub fn evaluate(predicted: &[NodeLabel], truth: &[NodeLabel]) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("labels"));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(EvalReport {
        anomaly: class_metrics(predicted, truth, NodeLabel::Anomaly),
        normal: class_metrics(predicted, truth, NodeLabel::Normal),
        accuracy: ratio(correct, truth.len()),
        total: truth.len(),
    })
}

impl EvalReport {
    /// Two-decimal table: one row per class plus accuracy.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<10} {:>6} {:>7} {:>9} {:>12}\n",
            "", "Prec.", "Recall", "F1-Score", "Data Points"
        );
        for (name, m) in [("Anomaly", &self.anomaly), ("Normal", &self.normal)] {
            out.push_str(&format!(
                "{:<10} {:>6.2} {:>7.2} {:>9.2} {:>12}\n",
                name, m.precision, m.recall, m.f1, m.support
            ));
        }
        out.push_str(&format!(
            "{:<10} {:>6} {:>7} {:>9.2} {:>12}\n",
            "Accuracy", "", "", self.accuracy, self.total
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use NodeLabel::{Anomaly as A, Normal as N};

    #[test]
    fn perfect_prediction() {
        let mut truth = vec![A; 25];
        truth.extend(vec![N; 475]);
        let r = evaluate(&truth, &truth).unwrap();
        for m in [r.anomaly, r.normal] {
            assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!(r.accuracy, 1.0);
        assert_eq!((r.anomaly.support, r.normal.support), (25, 475));
    }

    #[test]
    fn all_normal_classifier() {
        let truth = [A, N, N, N];
        let r = evaluate(&[N; 4], &truth).unwrap();
        assert_eq!((r.anomaly.precision, r.anomaly.recall, r.anomaly.f1), (0.0, 0.0, 0.0));
        assert_eq!(r.accuracy, 0.75);
    }

    #[test]
    fn one_of_each() {
        // TP, FP, FN, TN
        let r = evaluate(&[A, A, N, N], &[A, N, A, N]).unwrap();
        assert_eq!((r.anomaly.precision, r.anomaly.recall, r.anomaly.f1), (0.5, 0.5, 0.5));
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn errors() {
        assert!(evaluate(&[A], &[A, N]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn table_layout() {
        let r = evaluate(&[A, N], &[A, N]).unwrap();
        let t = r.render_table();
        assert!(t.contains("Anomaly      1.00    1.00      1.00            1"));
        assert_eq!(t.lines().count(), 4);
    }
}
