//! Sampled curves `r ↦ L(r)`, `t ↦ ℒ(t)` and their finite-difference slopes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceParam {
    R,
    T,
}

impl TraceParam {
    pub fn name(self) -> &'static str {
        match self {
            TraceParam::R => "r",
            TraceParam::T => "t",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub param: TraceParam,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Central differences at the interior grid points.
    pub fd_derivatives: Vec<f64>,
}

impl FrequencyTrace {
    pub fn new(param: TraceParam, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_grid(&grid)?;
        if values.len() != grid.len() {
            return domain(format!("{} values for {} grid points", values.len(), grid.len()));
        }
        let fd_derivatives = (1..grid.len().saturating_sub(1))
            .map(|i| (values[i + 1] - values[i - 1]) / (grid[i + 1] - grid[i - 1]))
            .collect();
        Ok(FrequencyTrace { param, grid, values, fd_derivatives })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// One line per grid point; the end points have an empty derivative.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{},value,fd_derivative", self.param.name())?;
        for i in 0..self.len() {
            let fd = if i == 0 || i + 1 == self.len() { String::new() } else { fmt17(self.fd_derivatives[i - 1]) };
            writeln!(w, "{},{},{}", fmt17(self.grid[i]), fmt17(self.values[i]), fd)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 3 {
        return domain(format!("a trace needs at least 3 grid points, got {}", grid.len()));
    }
    if grid.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
        return domain("trace grid must be positive and finite");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("trace grid must be strictly increasing");
    }
    Ok(())
}

pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo < hi) {
        return Err(Error::Domain(format!("bad linear grid {lo}:{hi}:{count}")));
    }
    let h = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo + i as f64 * h }).collect())
}

pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo > 0.0) || !(lo < hi) {
        return Err(Error::Domain(format!("bad geometric grid {lo}:{hi}:{count}")));
    }
    let q = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| if i + 1 == count { hi } else { lo * (q * i as f64).exp() }).collect())
}

/// Grid indices (into `trace.grid`) where the slope is below `-tol`.
pub fn monotonicity_scan(trace: &FrequencyTrace, tol: f64) -> Vec<usize> {
    trace.fd_derivatives.iter().enumerate().filter(|(_, d)| **d < -tol).map(|(i, _)| i + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_length_and_values() {
        let g = geometric_grid(0.1, 10.0, 50).unwrap();
        let v: Vec<f64> = g.iter().map(|t| 3.0 * t + 1.0).collect();
        let tr = FrequencyTrace::new(TraceParam::T, g, v).unwrap();
        assert_eq!(tr.fd_derivatives.len(), 48);
        for d in &tr.fd_derivatives {
            assert!((d - 3.0).abs() < 1e-12);
        }
        assert!(monotonicity_scan(&tr, 0.0).is_empty());
    }

    #[test]
    fn scan_flags_decrease() {
        let g = linear_grid(1.0, 2.0, 11).unwrap();
        let v: Vec<f64> = g.iter().map(|t| (t - 1.5) * (t - 1.5)).collect();
        let tr = FrequencyTrace::new(TraceParam::R, g, v).unwrap();
        let bad = monotonicity_scan(&tr, 1e-9);
        assert_eq!(bad, vec![1, 2, 3, 4]);
        let flat = FrequencyTrace::new(TraceParam::R, vec![1.0, 2.0, 3.0], vec![5.0; 3]).unwrap();
        assert!(monotonicity_scan(&flat, 1e-300).is_empty());
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(FrequencyTrace::new(TraceParam::T, vec![1.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        assert!(FrequencyTrace::new(TraceParam::T, vec![0.0, 1.0, 2.0], vec![0.0; 3]).is_err());
        assert!(FrequencyTrace::new(TraceParam::T, vec![1.0, 2.0, 3.0], vec![0.0; 2]).is_err());
    }

    #[test]
    fn csv_layout() {
        let tr = FrequencyTrace::new(TraceParam::T, vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 3.0]).unwrap();
        let s = tr.to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,value,fd_derivative");
        assert!(lines[1].ends_with(','));
        assert_eq!(lines[2].split(',').nth(2).unwrap(), fmt17(2.0 / 3.0));
        assert_eq!(lines.len(), 4);
    }
}
