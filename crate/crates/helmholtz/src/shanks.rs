//! Repeated Shanks transformation of eigenvalue-estimate sequences.
//!
//! The transform is computed in the cancellation-safe form
//! S = s_{n+1} - (s_{n+1} - s_n)^2 / (s_{n+1} - 2 s_n + s_{n-1}); the raw
//! cross-product quotient loses all digits once the sequence has converged
//! to round-off. Entries whose second difference underflows the validity
//! threshold keep s_{n+1} as their value but are flagged invalid, and the
//! flag propagates to deeper levels; the best estimate skips flagged
//! entries.

use std::io::Write;

use crate::error::{Error, Result};

/// Relative threshold below which the denominator counts as vanished.
const DENOM_THRESHOLD: f64 = 1e-14;

/// One transformed value with its validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShanksEntry {
    pub value: f64,
    pub valid: bool,
}

fn transform(s0: ShanksEntry, s1: ShanksEntry, s2: ShanksEntry) -> ShanksEntry {
    let den = s2.value - 2.0 * s1.value + s0.value;
    let inputs_valid = s0.valid && s1.valid && s2.valid;
    if den.abs() < DENOM_THRESHOLD * s1.value.abs() || den == 0.0 {
        return ShanksEntry { value: s2.value, valid: false };
    }
    let d = s2.value - s1.value;
    ShanksEntry { value: s2.value - d * d / den, valid: inputs_valid }
}

/// One Shanks level of a raw sequence; output has length len - 2.
pub fn shanks_once(seq: &[f64]) -> Result<Vec<ShanksEntry>> {
    if seq.len() < 3 {
        return Err(Error::TooShort { len: seq.len() });
    }
    let entries: Vec<ShanksEntry> =
        seq.iter().map(|&v| ShanksEntry { value: v, valid: true }).collect();
    Ok(level_up(&entries))
}

fn level_up(entries: &[ShanksEntry]) -> Vec<ShanksEntry> {
    entries.windows(3).map(|w| transform(w[0], w[1], w[2])).collect()
}

/// Triangular array of repeated transformations; level k has length
/// max(len - 2k, 0).
#[derive(Debug, Clone)]
pub struct ShanksTable {
    /// levels[0] is the input sequence; deeper levels follow.
    pub levels: Vec<Vec<ShanksEntry>>,
}

/// Apply the transform repeatedly until `max_levels` or the rows get too
/// short.
pub fn shanks_table(seq: &[f64], max_levels: usize) -> Result<ShanksTable> {
    if seq.len() < 3 {
        return Err(Error::TooShort { len: seq.len() });
    }
    let mut levels = Vec::with_capacity(max_levels + 1);
    levels.push(seq.iter().map(|&v| ShanksEntry { value: v, valid: true }).collect::<Vec<_>>());
    for _ in 0..max_levels {
        let next = level_up(levels.last().unwrap());
        if next.is_empty() {
            break;
        }
        levels.push(next);
    }
    Ok(ShanksTable { levels })
}

impl ShanksTable {
    /// Deepest valid entry: (value, level, index within the level).
    pub fn best_estimate(&self) -> Option<(f64, usize, usize)> {
        for (lvl, row) in self.levels.iter().enumerate().rev() {
            if let Some((idx, e)) = row.iter().enumerate().rev().find(|(_, e)| e.valid) {
                return Some((e.value, lvl, idx));
            }
        }
        None
    }

    pub fn level(&self, k: usize) -> &[ShanksEntry] {
        &self.levels[k]
    }

    /// Serialize in the benchmark-table layout: the base sequence rows
    /// `O,p,value` followed by `s,k,j,value` rows, 17 significant digits.
    /// Invalid entries carry a trailing `*` marker column.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "row,level,index,value,flag")?;
        for (p, e) in self.levels[0].iter().enumerate() {
            writeln!(w, "O,0,{},{:.16e},", p + 1, e.value)?;
        }
        for (k, row) in self.levels.iter().enumerate().skip(1) {
            for (j, e) in row.iter().enumerate() {
                let flag = if e.valid { "" } else { "*" };
                writeln!(w, "s,{},{},{:.16e},{}", k, j + 1, e.value, flag)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_collapses_to_limit() {
        // s_n = 1 + 2^{-n}: one level recovers the limit exactly
        let seq: Vec<f64> = (0..5).map(|n| 1.0 + 0.5f64.powi(n)).collect();
        let out = shanks_once(&seq).unwrap();
        assert_eq!(out.len(), 3);
        for e in &out {
            assert!(e.valid);
            assert!((e.value - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_on_general_geometric_tail() {
        // A + B r^n recovered to 1e-12 relative for |r| < 1
        for (a, b, r) in [(3.0, 2.0, 0.7), (-1.5, 0.3, -0.45), (10.0, -4.0, 0.05)] {
            let seq: Vec<f64> = (0..6).map(|n| a + b * r.powi(n)).collect();
            let out = shanks_once(&seq).unwrap();
            for e in &out {
                assert!((e.value - a).abs() <= 1e-12 * a.abs().max(1.0), "{e:?}");
            }
        }
    }

    #[test]
    fn first_benchmark_triple() {
        let out =
            shanks_once(&[9.21037410544234, 9.19238760347104, 9.19138111461443]).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].valid);
        assert!((out[0].value - 9.19132145507167).abs() < 1e-11, "{}", out[0].value);
    }

    #[test]
    fn constant_sequence_flagged_invalid() {
        let out = shanks_once(&[4.0, 4.0, 4.0, 4.0]).unwrap();
        for e in &out {
            assert!(!e.valid);
            assert_eq!(e.value, 4.0);
        }
    }

    #[test]
    fn alternating_sequence_levels() {
        let seq = [1.0, -1.0, 1.0, -1.0, 1.0];
        let t = shanks_table(&seq, 2).unwrap();
        for e in t.level(1) {
            assert!(e.valid);
            assert!(e.value.abs() < 1e-15);
        }
        // level 2 sits on an exactly constant (zero) row
        for e in t.level(2) {
            assert!(e.value.abs() < 1e-15);
            assert!(!e.valid);
        }
    }

    #[test]
    fn shift_equivariance() {
        let seq: Vec<f64> = (0..6).map(|n| 2.0 + 0.6f64.powi(n) + 0.02 * 0.3f64.powi(n)).collect();
        let shifted: Vec<f64> = seq.iter().map(|v| v + 5.0).collect();
        let a = shanks_once(&seq).unwrap();
        let b = shanks_once(&shifted).unwrap();
        for (ea, eb) in a.iter().zip(&b) {
            assert!((eb.value - ea.value - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn too_short_rejected() {
        assert_eq!(shanks_once(&[1.0, 2.0]).unwrap_err(), Error::TooShort { len: 2 });
        assert!(shanks_table(&[1.0], 3).is_err());
    }

    #[test]
    fn table_shape_and_best_estimate() {
        let seq: Vec<f64> = (0..10).map(|n| 1.0 + 0.8f64.powi(n) + 0.01 * 0.2f64.powi(n)).collect();
        let t = shanks_table(&seq, 3).unwrap();
        assert_eq!(t.levels.len(), 4);
        assert_eq!(t.level(1).len(), 8);
        assert_eq!(t.level(2).len(), 6);
        assert_eq!(t.level(3).len(), 4);
        let (best, lvl, _) = t.best_estimate().unwrap();
        assert!(lvl >= 2);
        assert!((best - 1.0).abs() < 1e-10);
    }

    #[test]
    fn csv_layout() {
        let t = shanks_table(&[3.0, 2.0, 1.5, 1.25, 1.125], 2).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("O,0,1,"));
        assert!(text.contains("s,1,1,"));
        assert!(text.contains("s,2,1,"));
    }
}
