//! Convex piecewise-linear value functions of the post-decision CCGT heat.

use std::borrow::Cow;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Value function of one period: `sum_a slopes[a] * r_a` with segments of
/// equal width filled left to right from `q_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfaRow {
    /// MW
    pub q_min: f64,
    pub q_max: f64,
    /// $ per MW, nondecreasing
    pub slopes: Vec<f64>,
}

impl VfaRow {
    pub fn zero(q_min: f64, q_max: f64, segments: usize) -> Self {
        VfaRow {
            q_min,
            q_max,
            slopes: vec![0.0; segments],
        }
    }

    pub fn width(&self) -> f64 {
        (self.q_max - self.q_min) / self.slopes.len() as f64
    }

    /// Segment holding `q`, with intervals closed on the right so that a
    /// level exactly on a breakpoint belongs to the segment below it.
    pub fn segment_of(&self, q: f64) -> usize {
        let n = self.slopes.len();
        let pos = (q - self.q_min) / self.width();
        (pos.ceil() as isize - 1).clamp(0, n as isize - 1) as usize
    }

    pub fn is_monotone(&self) -> bool {
        self.slopes.windows(2).all(|w| w[0] <= w[1])
    }

    fn validate(&self, period: usize) -> Result<()> {
        if self.slopes.is_empty() || !(self.q_max > self.q_min) {
            return Err(Error::param(
                &format!("vfa.periods[{period}]"),
                "needs at least one segment and q_max > q_min",
            ));
        }
        if self.slopes.iter().any(|d| !d.is_finite()) || !self.is_monotone() {
            return Err(Error::param(
                &format!("vfa.periods[{period}].slopes"),
                "must be finite and nondecreasing",
            ));
        }
        Ok(())
    }
}

/// Value of `row` at heat level `q`.
pub fn evaluate_vfa(row: &VfaRow, q: f64) -> Result<f64> {
    if !(q >= row.q_min && q <= row.q_max) {
        return Err(Error::OutOfRange {
            value: q,
            lo: row.q_min,
            hi: row.q_max,
        });
    }
    let w = row.width();
    let mut left = q - row.q_min;
    let mut v = 0.0;
    for &d in &row.slopes {
        if left <= 0.0 {
            break;
        }
        let r = left.min(w);
        v += d * r;
        left -= r;
    }
    Ok(v)
}

/// Restores nondecreasing slopes after `slopes[idx]` changed, by pooling the
/// violated neighbourhood of `idx` into its mean.
pub fn spar_project(slopes: &mut [f64], idx: usize) {
    let n = slopes.len();
    if idx >= n {
        return;
    }
    let (mut lo, mut hi) = (idx, idx);
    let mut sum = slopes[idx];
    loop {
        let mean = sum / (hi - lo + 1) as f64;
        if lo > 0 && slopes[lo - 1] > mean {
            lo -= 1;
            sum += slopes[lo];
        } else if hi + 1 < n && slopes[hi + 1] < mean {
            hi += 1;
            sum += slopes[hi];
        } else {
            slopes[lo..=hi].fill(mean);
            return;
        }
    }
}

/// Generalized harmonic smoothing weight `a_h / (a_h + n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsizeRule {
    pub a_h: f64,
}

impl Default for StepsizeRule {
    fn default() -> Self {
        StepsizeRule { a_h: 20.0 }
    }
}

impl StepsizeRule {
    /// Weight of the observation in iteration `n >= 1`.
    pub fn alpha(&self, n: usize) -> f64 {
        self.a_h / (self.a_h + (n.max(1) - 1) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_h > 0.0 && self.a_h.is_finite()) {
            return Err(Error::param("training.stepsize_a_h", "must be positive"));
        }
        Ok(())
    }
}

/// Value functions of periods `0..T-1`; the last period carries none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearVfa {
    pub rows: Vec<VfaRow>,
}

pub const VFA_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct VfaDocument {
    version: u32,
    periods: Vec<VfaRow>,
}

impl PiecewiseLinearVfa {
    /// All-zero slopes for a horizon of `horizon` periods.
    pub fn zero(horizon: usize, q_min: f64, q_max: f64, segments: usize) -> Self {
        PiecewiseLinearVfa {
            rows: (0..horizon.saturating_sub(1))
                .map(|_| VfaRow::zero(q_min, q_max, segments))
                .collect(),
        }
    }

    /// Slopes valuing the post-decision heat of `period`; empty past the last row.
    pub fn slopes(&self, period: usize) -> &[f64] {
        self.rows.get(period).map_or(&[], |r| r.slopes.as_slice())
    }

    /// Slopes for the period's subproblem: the row's own, or zeros of the
    /// same width past the last row, so the final period is solved exactly
    /// as a myopic one.
    pub fn decision_slopes(&self, period: usize) -> Cow<'_, [f64]> {
        match self.rows.get(period) {
            Some(r) => Cow::Borrowed(&r.slopes),
            None => Cow::Owned(vec![0.0; self.rows.last().map_or(0, |r| r.slopes.len())]),
        }
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.iter().all(VfaRow::is_monotone)
    }

    pub fn validate(&self) -> Result<()> {
        self.rows
            .iter()
            .enumerate()
            .try_for_each(|(t, r)| r.validate(t))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = VfaDocument {
            version: VFA_FORMAT_VERSION,
            periods: self.rows.clone(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: VfaDocument =
            serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if doc.version != VFA_FORMAT_VERSION {
            return Err(Error::Serde(format!(
                "unsupported VFA format version {} (expected {VFA_FORMAT_VERSION})",
                doc.version
            )));
        }
        let vfa = PiecewiseLinearVfa { rows: doc.periods };
        vfa.validate()?;
        Ok(vfa)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Smooths `observation` into segment `a` of row `period` with the stepsize
/// of iteration `n`, then restores monotonicity.
pub fn update_slope(
    vfa: &mut PiecewiseLinearVfa,
    period: usize,
    a: usize,
    observation: f64,
    n: usize,
    rule: &StepsizeRule,
) -> Result<()> {
    let row = vfa
        .rows
        .get_mut(period)
        .ok_or_else(|| Error::param("period", format!("no value function row {period}")))?;
    let old = row
        .slopes
        .get_mut(a)
        .ok_or_else(|| Error::param("segment", format!("index {a} out of range")))?;
    let alpha = rule.alpha(n);
    *old = alpha * observation + (1.0 - alpha) * *old;
    spar_project(&mut row.slopes, a);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_basics() {
        let row = VfaRow {
            q_min: 15.0,
            q_max: 50.0,
            slopes: vec![-3.0; 35],
        };
        assert_eq!(evaluate_vfa(&row, 15.0).unwrap(), 0.0);
        assert!((evaluate_vfa(&row, 27.5).unwrap() + 37.5).abs() < 1e-12);
        assert!(evaluate_vfa(&row, 14.0).is_err());
        assert!(evaluate_vfa(&row, 50.5).is_err());
    }

    #[test]
    fn segment_bucketing_is_right_closed() {
        let row = VfaRow::zero(15.0, 50.0, 35);
        assert_eq!(row.segment_of(15.0), 0);
        assert_eq!(row.segment_of(15.5), 0);
        assert_eq!(row.segment_of(16.0), 0);
        assert_eq!(row.segment_of(16.01), 1);
        assert_eq!(row.segment_of(50.0), 34);
        assert_eq!(row.segment_of(80.0), 34);
    }

    #[test]
    fn spar_examples() {
        let mut s = vec![1.0, 2.0, 3.0];
        spar_project(&mut s, 1);
        assert_eq!(s, vec![1.0, 2.0, 3.0]);
        let mut s = vec![1.0, 5.0, 2.0];
        spar_project(&mut s, 2);
        assert_eq!(s, vec![1.0, 3.5, 3.5]);
        let mut s = vec![4.0, 2.0, 3.0];
        spar_project(&mut s, 1);
        assert_eq!(s, vec![3.0, 3.0, 3.0]);
    }

    #[test]
    fn stepsize_closed_form() {
        let rule = StepsizeRule::default();
        assert_eq!(rule.alpha(1), 1.0);
        for n in 1..200 {
            assert!((rule.alpha(n) * (20.0 + n as f64 - 1.0) - 20.0).abs() < 1e-12);
        }
    }

    #[test]
    fn update_arithmetic() {
        let mut vfa = PiecewiseLinearVfa::zero(3, 0.0, 3.0, 3);
        vfa.rows[0].slopes = vec![0.0, 10.0, 30.0];
        let rule = StepsizeRule { a_h: 1.0 };
        // alpha(2) = 0.5
        update_slope(&mut vfa, 0, 1, 20.0, 2, &rule).unwrap();
        assert_eq!(vfa.rows[0].slopes, vec![0.0, 15.0, 30.0]);
        update_slope(&mut vfa, 0, 0, 7.0, 1, &StepsizeRule::default()).unwrap();
        assert_eq!(vfa.rows[0].slopes[0], 7.0);
        assert!(update_slope(&mut vfa, 2, 0, 1.0, 1, &rule).is_err());
        assert!(update_slope(&mut vfa, 0, 3, 1.0, 1, &rule).is_err());
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let mut vfa = PiecewiseLinearVfa::zero(4, 15.0, 50.0, 35);
        vfa.rows[1].slopes[3] = -2.5;
        spar_project(&mut vfa.rows[1].slopes, 3);
        let text = vfa.to_json().unwrap();
        assert_eq!(PiecewiseLinearVfa::from_json(&text).unwrap(), vfa);
        let bumped = text.replace("\"version\": 1", "\"version\": 9");
        assert!(PiecewiseLinearVfa::from_json(&bumped).is_err());
        assert_eq!(vfa.slopes(3), &[] as &[f64]);
        assert_eq!(
            &*vfa.decision_slopes(3),
            &vec![0.0; vfa.rows[0].slopes.len()][..]
        );
    }
}
