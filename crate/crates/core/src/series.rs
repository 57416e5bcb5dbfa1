use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A time grid with named real-valued columns of equal length.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
}

impl TimeSeries {
    pub fn new(t: Vec<f64>) -> Self {
        Self {
            t,
            columns: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let name = name.into();
        if values.len() != self.t.len() {
            return Err(Error::DimensionMismatch(format!(
                "column '{name}' has {} values for {} time points",
                values.len(),
                self.t.len()
            )));
        }
        if self.column(&name).is_some() {
            return Err(Error::Config(format!("duplicate column '{name}'")));
        }
        self.columns.push((name, values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Copies every column of `other`, renamed by `rename`.
    pub fn absorb(&mut self, other: &TimeSeries, rename: impl Fn(&str) -> String) -> Result<()> {
        if other.t != self.t {
            return Err(Error::DimensionMismatch("time grids differ".into()));
        }
        for (name, values) in other.columns() {
            self.push_column(rename(name), values.to_vec())?;
        }
        Ok(())
    }
}

/// `samples` equally spaced points on `[0, t_max]`.
pub fn uniform_grid(t_max: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::Config(format!("need at least 2 samples, got {samples}")));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(Error::Config(format!("t_max must be positive, got {t_max}")));
    }
    let step = t_max / (samples - 1) as f64;
    Ok((0..samples).map(|k| k as f64 * step).collect())
}

pub(crate) fn check_grid(t_grid: &[f64]) -> Result<()> {
    if let Some(&bad) = t_grid.iter().find(|t| t.is_nan() || **t < 0.0) {
        return Err(Error::NegativeTime(bad));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_must_match_grid() {
        let mut ts = TimeSeries::new(vec![0.0, 1.0]);
        ts.push_column("a", vec![1.0, 2.0]).unwrap();
        assert!(ts.push_column("b", vec![1.0]).is_err());
        assert!(ts.push_column("a", vec![1.0, 2.0]).is_err());
        assert_eq!(ts.column("a"), Some(&[1.0, 2.0][..]));
        assert_eq!(ts.column_names(), vec!["a"]);
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(10.0, 201).unwrap();
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], 0.0);
        assert!((g[200] - 10.0).abs() < 1e-12);
        assert!(uniform_grid(1.0, 1).is_err());
        assert!(check_grid(&[0.0, -1.0]).is_err());
    }
}
