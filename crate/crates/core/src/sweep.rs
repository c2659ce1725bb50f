//! Grid sweeps over any subset of the seven configuration angles.

use std::io::Write;

use rayon::prelude::*;

use crate::bounds::WeightMatrix;
use crate::error::{Error, Result};
use crate::record::{csv_header, OutputFormat, OutputRecord};
use crate::state::EncodingConfig;

pub const MAX_GRID_POINTS: u64 = 100_000_000;

/// Records computed in parallel per chunk, written in order.
const CHUNK: usize = 4096;

/// `steps` evenly spaced values from `start` to `stop` inclusive; a single
/// step yields `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl AngleRange {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidArgument("range bounds must be finite".into()));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("range needs at least one step".into()));
        }
        Ok(Self { start, stop, steps })
    }

    /// Parses `start:stop:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(Error::InvalidArgument(format!(
                "range `{text}` is not of the form start:stop:steps"
            )));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number `{s}` in `{text}`")))
        };
        let steps = n
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::InvalidArgument(format!("bad step count `{n}` in `{text}`")))?;
        Self::new(num(a)?, num(b)?, steps)
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.steps == 1 {
            self.start
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            start: self.start * k,
            stop: self.stop * k,
            steps: self.steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: EncodingConfig,
    /// Indexed like [`EncodingConfig::FIELD_NAMES`]; `None` keeps the base value.
    pub ranges: [Option<AngleRange>; 7],
    pub weight: WeightMatrix,
}

impl SweepSpec {
    pub fn new(base: EncodingConfig, weight: WeightMatrix) -> Self {
        Self {
            base,
            ranges: [None; 7],
            weight,
        }
    }

    pub fn with_range(mut self, field: &str, range: AngleRange) -> Result<Self> {
        let i = EncodingConfig::FIELD_NAMES
            .iter()
            .position(|&n| n == field)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown angle `{field}`")))?;
        self.ranges[i] = Some(range);
        Ok(self)
    }

    /// Total number of grid points, refusing grids above [`MAX_GRID_POINTS`].
    pub fn grid_size(&self) -> Result<u64> {
        let mut n: u64 = 1;
        for r in self.ranges.iter().flatten() {
            n = n.saturating_mul(r.steps as u64);
            if n > MAX_GRID_POINTS {
                return Err(Error::InvalidArgument(format!(
                    "sweep grid exceeds {MAX_GRID_POINTS} points"
                )));
            }
        }
        Ok(n)
    }

    /// Configuration at flat index `k`, row-major with `alpha` slowest and
    /// `lambda2` fastest.
    pub fn point(&self, mut k: u64) -> EncodingConfig {
        let mut a = self.base.as_array();
        for i in (0..7).rev() {
            if let Some(r) = self.ranges[i] {
                let n = r.steps as u64;
                a[i] = r.value((k % n) as usize);
                k /= n;
            }
        }
        EncodingConfig::from_array(a)
    }

    pub fn records(&self) -> Result<Vec<OutputRecord>> {
        let n = self.grid_size()?;
        (0..n)
            .into_par_iter()
            .map(|k| OutputRecord::compute(&self.point(k), &self.weight))
            .collect()
    }
}

/// Streams every record of `spec` to `out`; returns the number written.
pub fn run_sweep(spec: &SweepSpec, format: OutputFormat, out: &mut dyn Write) -> Result<u64> {
    let n = spec.grid_size()?;
    if format == OutputFormat::Csv {
        writeln!(out, "{}", csv_header())?;
    }
    let mut start = 0u64;
    while start < n {
        let end = (start + CHUNK as u64).min(n);
        let chunk: Vec<OutputRecord> = (start..end)
            .into_par_iter()
            .map(|k| OutputRecord::compute(&spec.point(k), &spec.weight))
            .collect::<Result<_>>()?;
        for r in &chunk {
            match format {
                OutputFormat::Csv => writeln!(out, "{}", r.to_csv_row())?,
                OutputFormat::Json => writeln!(out, "{}", r.to_json())?,
            }
        }
        start = end;
    }
    out.flush()?;
    Ok(n)
}
