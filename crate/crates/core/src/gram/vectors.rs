use std::fmt::Write as _;
use std::path::Path;

use super::{GramError, DEFAULT_TOLERANCE};
use crate::rational::Rational;

/// Floating-point unit vectors in `R^r` together with their target angle.
///
/// Text format: a header line `r s alpha_num alpha_den`, then `s` rows of
/// `r` whitespace-separated decimals.
#[derive(Debug, Clone)]
pub struct VectorSet {
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
    pub alpha: Rational,
    pub tolerance: f64,
}

impl VectorSet {
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>, alpha: Rational) -> Result<Self, GramError> {
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(GramError::DimensionMismatch { index, len: v.len(), dim });
            }
        }
        Ok(VectorSet { dim, vectors, alpha, tolerance: DEFAULT_TOLERANCE })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        dot(&self.vectors[i], &self.vectors[j])
    }

    /// Indices whose norm differs from 1 by more than the tolerance.
    pub fn non_unit(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| (self.dot(i, i).sqrt() - 1.0).abs() > self.tolerance)
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.dim, self.len(), self.alpha.numer(), self.alpha.denom());
        for v in &self.vectors {
            let row: Vec<String> = v.iter().map(|x| format!("{x:.17e}")).collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, GramError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| GramError::Format("missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(GramError::Format(format!("header needs 4 fields, got `{header}`")));
        }
        let parse_usize = |s: &str| s.parse::<usize>().map_err(|_| GramError::Format(format!("bad integer `{s}`")));
        let dim = parse_usize(fields[0])?;
        let count = parse_usize(fields[1])?;
        let alpha: Rational = format!("{}/{}", fields[2], fields[3])
            .parse()
            .map_err(|_| GramError::Format(format!("bad angle `{} {}`", fields[2], fields[3])))?;
        let mut vectors = Vec::with_capacity(count);
        for line in lines {
            let row = line
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|_| GramError::Format(format!("bad decimal `{x}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            vectors.push(row);
        }
        if vectors.len() != count {
            return Err(GramError::Format(format!("header promises {count} vectors, found {}", vectors.len())));
        }
        VectorSet::new(dim, vectors, alpha)
    }

    pub fn load(path: &Path) -> Result<Self, GramError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GramError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
