//! Tensor grids on half-space boxes `[0,R₀]×[-R,R]^k` (or symmetric boxes for
//! full-ball problems) and fields sampled on them.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::constants::WeightParam;
use crate::error::{domain, Error, Result};
use crate::kernels::{weighted_flux_limit, FluxOptions};

/// Uniform tensor grid; axis 0 is `y₀`. Values are stored row-major with the
/// last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    counts: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl GridSpec {
    pub fn new(counts: Vec<usize>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if counts.is_empty() || counts.len() != lo.len() || counts.len() != hi.len() {
            return domain("grid needs matching, non-empty counts and bounds");
        }
        for k in 0..counts.len() {
            if counts[k] < 3 {
                return domain(format!("axis {k} needs at least 3 points"));
            }
            if !(hi[k] > lo[k]) || !lo[k].is_finite() || !hi[k].is_finite() {
                return domain(format!("axis {k} has invalid bounds [{}, {}]", lo[k], hi[k]));
            }
        }
        if lo[0] < 0.0 {
            // symmetric in y₀ with a node on the thin set
            if (lo[0] + hi[0]).abs() > 1e-14 * hi[0] || counts[0].is_multiple_of(2) {
                return domain("a y0 axis crossing 0 must be symmetric with an odd point count");
            }
        }
        Ok(GridSpec { counts, lo, hi })
    }

    /// `[0,r0] × [-r,r]^k` with `m0` and `m` points per axis.
    pub fn half_space(k: usize, r0: f64, m0: usize, r: f64, m: usize) -> Result<Self> {
        let mut counts = vec![m0];
        counts.extend(std::iter::repeat_n(m, k));
        let mut lo = vec![0.0];
        lo.extend(std::iter::repeat_n(-r, k));
        let mut hi = vec![r0];
        hi.extend(std::iter::repeat_n(r, k));
        GridSpec::new(counts, lo, hi)
    }

    /// `[-r,r]^{k+1}` with `m` (odd) points per axis.
    pub fn full_box(k: usize, r: f64, m: usize) -> Result<Self> {
        GridSpec::new(vec![m; k + 1], vec![-r; k + 1], vec![r; k + 1])
    }

    pub fn ndim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, k: usize) -> f64 {
        (self.hi[k] - self.lo[k]) / (self.counts[k] - 1) as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.ndim()).map(|k| self.spacing(k)).collect()
    }

    /// Whether axis 0 starts on the thin set.
    pub fn is_half_space(&self) -> bool {
        self.lo[0] == 0.0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.ndim()];
        for k in (0..self.ndim() - 1).rev() {
            s[k] = s[k + 1] * self.counts[k + 1];
        }
        s
    }

    pub fn coord(&self, k: usize, i: usize) -> f64 {
        if i + 1 == self.counts[k] {
            self.hi[k]
        } else {
            self.lo[k] + i as f64 * self.spacing(k)
        }
    }

    pub fn multi_index(&self, mut p: usize, out: &mut [usize]) {
        for k in (0..self.ndim()).rev() {
            out[k] = p % self.counts[k];
            p /= self.counts[k];
        }
    }

    pub fn point(&self, p: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.ndim()];
        self.multi_index(p, &mut idx);
        for k in 0..self.ndim() {
            out[k] = self.coord(k, idx[k]);
        }
    }

    /// Whether node `p` lies on the outer boundary of the box (the `y₀ = 0`
    /// face of a half-space box is not outer).
    pub fn on_outer_boundary(&self, p: usize) -> bool {
        let mut idx = vec![0; self.ndim()];
        self.multi_index(p, &mut idx);
        idx.iter().enumerate().any(|(k, &i)| {
            let low_is_thin = k == 0 && self.is_half_space();
            (i == 0 && !low_is_thin) || i + 1 == self.counts[k]
        })
    }

    /// The same box with every spacing halved.
    pub fn refined(&self) -> GridSpec {
        GridSpec { counts: self.counts.iter().map(|c| 2 * c - 1).collect(), lo: self.lo.clone(), hi: self.hi.clone() }
    }
}

/// A field sampled on a [`GridSpec`] together with its weight exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedField {
    pub grid: GridSpec,
    pub a: WeightParam,
    pub values: Vec<f64>,
}

const MAGIC: &[u8; 4] = b"FQWF";

impl WeightedField {
    pub fn new(grid: GridSpec, a: WeightParam, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!("field has {} values for {} nodes", values.len(), grid.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return domain(format!("non-finite field value at node {i}"));
        }
        Ok(WeightedField { grid, a, values })
    }

    pub fn sample(grid: GridSpec, a: WeightParam, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut y = vec![0.0; grid.ndim()];
        let values = (0..grid.len())
            .map(|p| {
                grid.point(p, &mut y);
                f(&y)
            })
            .collect();
        WeightedField::new(grid, a, values)
    }

    /// Multilinear interpolation; `None` outside the box.
    pub fn interpolate(&self, y: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let nd = g.ndim();
        let strides = g.strides();
        let mut base = 0;
        let mut frac = vec![0.0; nd];
        for k in 0..nd {
            if !(y[k] >= g.lo[k] && y[k] <= g.hi[k]) {
                return None;
            }
            let s = (y[k] - g.lo[k]) / g.spacing(k);
            let i = (s.floor() as usize).min(g.counts[k] - 2);
            frac[k] = s - i as f64;
            base += i * strides[k];
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << nd) {
            let mut w = 1.0;
            let mut p = base;
            for k in 0..nd {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    p += strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += w * self.values[p];
            }
        }
        Some(acc)
    }

    pub fn max_abs_diff(&self, other: &WeightedField) -> Result<f64> {
        if self.grid != other.grid {
            return domain("fields live on different grids");
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `∂ᵥᵃV` at the thin-set node with tangential coordinates `y`, from the
    /// nodes on the ray above it. `levels` Richardson levels need
    /// `2^{levels+1}` spacings in `y₀`.
    pub fn flux_limit(&self, y: &[f64], levels: usize, tol: f64) -> Result<f64> {
        if !self.grid.is_half_space() {
            return domain("flux limit needs a half-space grid");
        }
        let h = self.grid.spacing(0);
        let span = 1usize << (levels + 1);
        if span >= self.grid.counts[0] {
            return domain(format!("{levels} levels need more than {span} points in y0"));
        }
        let mut pt = vec![0.0; self.grid.ndim()];
        pt[1..].copy_from_slice(y);
        let v = |s: f64| {
            let mut q = pt.clone();
            q[0] = s;
            self.interpolate(&q).unwrap_or(f64::NAN)
        };
        weighted_flux_limit(v, self.a, FluxOptions { h0: h * span as f64, levels, tol })
    }

    /// Mirror a half-space field across `y₀ = 0`.
    pub fn even_extension(&self) -> Result<WeightedField> {
        let g = &self.grid;
        if !g.is_half_space() {
            return domain("even extension needs a half-space grid");
        }
        let m0 = g.counts[0];
        let mut counts = g.counts.clone();
        counts[0] = 2 * m0 - 1;
        let mut lo = g.lo.clone();
        lo[0] = -g.hi[0];
        let grid = GridSpec::new(counts, lo, g.hi.clone())?;
        let slab = g.strides()[0];
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..2 * m0 - 1 {
            let src = i.abs_diff(m0 - 1);
            values.extend_from_slice(&self.values[src * slab..(src + 1) * slab]);
        }
        WeightedField::new(grid, self.a, values)
    }

    /// Flat binary container: magic, axis count, per axis (count, lo, hi),
    /// `a`, then row-major little-endian `f64` values.
    pub fn write_binary(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.ndim() as u32).to_le_bytes())?;
        for k in 0..self.grid.ndim() {
            w.write_all(&(self.grid.counts[k] as u64).to_le_bytes())?;
            w.write_all(&self.grid.lo[k].to_le_bytes())?;
            w.write_all(&self.grid.hi[k].to_le_bytes())?;
        }
        w.write_all(&self.a.get().to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary(r: &mut impl Read) -> Result<WeightedField> {
        fn take<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
            let mut b = [0u8; K];
            r.read_exact(&mut b).map_err(|e| Error::Format(format!("truncated field file: {e}")))?;
            Ok(b)
        }
        if &take::<4>(r)? != MAGIC {
            return Err(Error::Format("not a field file (bad magic)".into()));
        }
        let nd = u32::from_le_bytes(take(r)?) as usize;
        if nd == 0 || nd > 16 {
            return Err(Error::Format(format!("implausible axis count {nd}")));
        }
        let (mut counts, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..nd {
            counts.push(u64::from_le_bytes(take(r)?) as usize);
            lo.push(f64::from_le_bytes(take(r)?));
            hi.push(f64::from_le_bytes(take(r)?));
        }
        let a = WeightParam::new(f64::from_le_bytes(take(r)?))?;
        let grid = GridSpec::new(counts, lo, hi)?;
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            values.push(f64::from_le_bytes(take(r)?));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after field payload".into()));
        }
        WeightedField::new(grid, a, values)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_binary(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load_binary(path: &Path) -> Result<WeightedField> {
        WeightedField::read_binary(&mut BufReader::new(std::fs::File::open(path)?))
    }

    /// CSV with columns `y0,…,y{k},value`; the grid is recovered from the
    /// coordinates on reading.
    pub fn write_csv(&self, w: &mut impl Write) -> Result<()> {
        let nd = self.grid.ndim();
        let header: Vec<String> = (0..nd).map(|k| format!("y{k}")).chain(["value".to_string()]).collect();
        writeln!(w, "{}", header.join(","))?;
        let mut y = vec![0.0; nd];
        for (p, v) in self.values.iter().enumerate() {
            self.grid.point(p, &mut y);
            let row: Vec<String> = y.iter().chain([v]).map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv(r: impl Read, a: WeightParam) -> Result<WeightedField> {
        let mut lines = BufReader::new(r).lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
        let nd = header.split(',').count() - 1;
        if nd == 0 {
            return Err(Error::Format("CSV needs coordinate columns".into()));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))?;
            if row.len() != nd + 1 {
                return Err(Error::Format(format!("line {}: expected {} columns", i + 2, nd + 1)));
            }
            rows.push(row);
        }
        let mut counts = Vec::new();
        let (mut lo, mut hi) = (Vec::new(), Vec::new());
        for k in 0..nd {
            let mut c: Vec<f64> = rows.iter().map(|r| r[k]).collect();
            c.sort_by(f64::total_cmp);
            c.dedup();
            counts.push(c.len());
            lo.push(c[0]);
            hi.push(c[c.len() - 1]);
        }
        let grid = GridSpec::new(counts, lo, hi)?;
        if rows.len() != grid.len() {
            return Err(Error::Format(format!("{} rows for a {}-node grid", rows.len(), grid.len())));
        }
        WeightedField::new(grid, a, rows.iter().map(|r| r[nd]).collect())
    }
}
