use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::semiring::log_sum_exp;

/// A `frames × units` matrix of natural-log scores, row-major. Column `u`
/// is read by graph label `u + 1`, so column 0 is `<blank>`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseEmissions {
    frames: usize,
    units: usize,
    values: Vec<f64>,
}

impl DenseEmissions {
    pub fn new(frames: usize, units: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != frames * units {
            return Err(Error::Shape(format!(
                "{} values for a {frames}x{units} matrix",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Shape(format!("NaN at row {}, column {}", i / units.max(1), i % units.max(1))));
        }
        Ok(DenseEmissions {
            frames,
            units,
            values,
        })
    }

    pub fn filled(frames: usize, units: usize, value: f64) -> Self {
        DenseEmissions {
            frames,
            units,
            values: vec![value; frames * units],
        }
    }

    pub fn zeros(frames: usize, units: usize) -> Self {
        Self::filled(frames, units, 0.0)
    }

    /// Every entry `ln(1/units)`.
    pub fn uniform(frames: usize, units: usize) -> Self {
        Self::filled(frames, units, -(units as f64).ln())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let units = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != units) {
            return Err(Error::Shape(format!("row {bad} has {} columns, expected {units}", rows[bad].len())));
        }
        Self::new(rows.len(), units, rows.concat())
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn units(&self) -> usize {
        self.units
    }

    pub fn get(&self, t: usize, u: usize) -> f64 {
        self.values[t * self.units + u]
    }

    pub fn set(&mut self, t: usize, u: usize, v: f64) {
        self.values[t * self.units + u] = v;
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.values[t * self.units..(t + 1) * self.units]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.values[t * self.units..(t + 1) * self.units]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.frames).map(move |t| self.row(t))
    }

    /// Entries must be log-probabilities (`≤ 0`, `-inf` allowed).
    pub fn check_log_probs(&self) -> Result<()> {
        match self.values.iter().position(|&v| v > 0.0) {
            Some(i) => Err(Error::Shape(format!(
                "positive log-probability {} at row {}",
                self.values[i],
                i / self.units
            ))),
            None => Ok(()),
        }
    }

    /// Every row must log-sum-exp to zero within `tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        for (t, row) in self.rows().enumerate() {
            let lse = log_sum_exp(row);
            if lse.is_nan() || lse.abs() > tol {
                return Err(Error::UnnormalizedEmissions { row: t, lse });
            }
        }
        Ok(())
    }

    /// Replaces each row by its log-softmax.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for t in 0..self.frames {
            let lse = log_sum_exp(self.row(t));
            for v in out.row_mut(t) {
                *v -= lse;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseEmissions) -> f64 {
        assert_eq!((self.frames, self.units), (other.frames, other.units));
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| if a == b { 0.0 } else { (a - b).abs() })
            .fold(0.0, f64::max)
    }

    /// Header `#<frames> <units>`, then one tab-separated row per frame.
    pub fn to_text(&self) -> String {
        let mut out = format!("#{} {}\n", self.frames, self.units);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(out, "{}", line.join("\t"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((_, header)) = lines.next() else {
            return Err(Error::parse(1, "missing `#frames units` header"));
        };
        let header = header
            .trim()
            .strip_prefix('#')
            .ok_or_else(|| Error::parse(1, "header must start with `#`"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|d| d.parse().map_err(|_| Error::parse(1, format!("bad dimension `{d}`"))))
            .collect::<Result<_>>()?;
        let [frames, units] = dims[..] else {
            return Err(Error::parse(1, "header must be `#frames units`"));
        };
        let mut values = Vec::with_capacity(frames * units);
        let mut rows = 0;
        for (i, line) in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse().map_err(|_| Error::parse(i + 1, format!("bad value `{v}`"))))
                .collect::<Result<_>>()?;
            if row.len() != units {
                return Err(Error::parse(i + 1, format!("expected {units} columns, got {}", row.len())));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != frames {
            return Err(Error::Shape(format!("header says {frames} frames, found {rows}")));
        }
        Self::new(frames, units, values)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_with_infinities() {
        let em = DenseEmissions::from_rows(&[vec![-0.5, f64::NEG_INFINITY], vec![0.0, -1e-300]]).unwrap();
        let back = DenseEmissions::from_text(&em.to_text()).unwrap();
        assert_eq!(em, back);
        assert!(em.to_text().starts_with("#2 2\n"));
    }

    #[test]
    fn empty_matrix() {
        let em = DenseEmissions::zeros(0, 4);
        let back = DenseEmissions::from_text(&em.to_text()).unwrap();
        assert_eq!(back.frames(), 0);
        assert_eq!(back.units(), 4);
    }

    #[test]
    fn shape_errors() {
        assert!(DenseEmissions::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DenseEmissions::from_rows(&[vec![0.0], vec![0.0, 1.0]]).is_err());
        assert!(DenseEmissions::from_text("#2 2\n0 0\n").is_err());
        assert!(DenseEmissions::from_text("2 2\n0 0\n").is_err());
        assert!(DenseEmissions::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn normalization() {
        let em = DenseEmissions::uniform(3, 4);
        em.check_normalized(1e-12).unwrap();
        em.check_log_probs().unwrap();
        let raw = DenseEmissions::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(raw.check_normalized(1e-6).is_err());
        assert!(raw.check_log_probs().is_err());
        raw.normalized().check_normalized(1e-12).unwrap();
    }
}
