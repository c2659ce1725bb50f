//! Flat per-configuration output records (CSV and JSON lines).

use serde::{Deserialize, Serialize};

use crate::bounds::{hierarchy_report, WeightMatrix};
use crate::error::{Error, Result};
use crate::fisher::{self, ExtReal, COMPATIBLE_D12};
use crate::state::EncodingConfig;

pub const CSV_COLUMNS: [&str; 26] = [
    "alpha",
    "beta",
    "gamma",
    "theta",
    "phi",
    "lambda1",
    "lambda2",
    "x",
    "y",
    "z",
    "f",
    "q11",
    "q12",
    "q22",
    "d12",
    "det_q",
    "s",
    "c",
    "r",
    "c_s",
    "c_h",
    "c_n",
    "k1",
    "k2",
    "sloppy",
    "weak_compatible",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown format `{s}`"))),
        }
    }
}

/// Everything computed at one configuration, in output column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputRecord {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub phi: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub f: f64,
    pub q11: f64,
    pub q12: f64,
    pub q22: f64,
    pub d12: f64,
    pub det_q: f64,
    pub s: ExtReal,
    pub c: ExtReal,
    pub r: Option<f64>,
    pub c_s: ExtReal,
    pub c_h: ExtReal,
    pub c_n: ExtReal,
    pub k1: ExtReal,
    pub k2: ExtReal,
    pub sloppy: bool,
    pub weak_compatible: bool,
}

impl OutputRecord {
    pub fn compute(cfg: &EncodingConfig, w: &WeightMatrix) -> Result<Self> {
        let rep = hierarchy_report(cfg, w)?;
        let xyzf = fisher::closed_form_xyzf(cfg);
        Ok(Self {
            alpha: cfg.alpha,
            beta: cfg.beta,
            gamma: cfg.gamma,
            theta: cfg.theta,
            phi: cfg.phi,
            lambda1: cfg.lambda1,
            lambda2: cfg.lambda2,
            x: xyzf.x,
            y: xyzf.y,
            z: xyzf.z,
            f: xyzf.f,
            q11: rep.qfim.q11,
            q12: rep.qfim.q12,
            q22: rep.qfim.q22,
            d12: rep.d12,
            det_q: rep.scalars.det_q,
            s: rep.scalars.s,
            c: rep.scalars.c,
            r: rep.scalars.r,
            c_s: rep.c_s,
            c_h: rep.c_h,
            c_n: rep.c_n,
            k1: rep.k1,
            k2: rep.k2,
            sloppy: rep.is_sloppy(),
            weak_compatible: fisher::weak_compatibility(
                &fisher::MucMatrix { d12: rep.d12 },
                COMPATIBLE_D12,
            ),
        })
    }

    pub fn config(&self) -> EncodingConfig {
        EncodingConfig::from_array([
            self.alpha,
            self.beta,
            self.gamma,
            self.theta,
            self.phi,
            self.lambda1,
            self.lambda2,
        ])
    }

    pub fn to_csv_row(&self) -> String {
        let plain = [
            self.alpha,
            self.beta,
            self.gamma,
            self.theta,
            self.phi,
            self.lambda1,
            self.lambda2,
            self.x,
            self.y,
            self.z,
            self.f,
            self.q11,
            self.q12,
            self.q22,
            self.d12,
            self.det_q,
        ];
        let mut cells: Vec<String> = plain.iter().map(|&v| format_float(v)).collect();
        cells.push(format_ext(self.s));
        cells.push(format_ext(self.c));
        cells.push(self.r.map_or_else(|| "nan".to_string(), format_float));
        for v in [self.c_s, self.c_h, self.c_n, self.k1, self.k2] {
            cells.push(format_ext(v));
        }
        cells.push(self.sloppy.to_string());
        cells.push(self.weak_compatible.to_string());
        cells.join(",")
    }

    pub fn from_csv_row(line: &str) -> Result<Self> {
        let cells: Vec<&str> = line.trim_end().split(',').collect();
        if cells.len() != CSV_COLUMNS.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} columns, found {}",
                CSV_COLUMNS.len(),
                cells.len()
            )));
        }
        let num = |i: usize| parse_float(cells[i]);
        let ext = |i: usize| -> Result<ExtReal> {
            let v = parse_float(cells[i])?;
            Ok(if v.is_infinite() { ExtReal::Infinite } else { ExtReal::Finite(v) })
        };
        let flag = |i: usize| -> Result<bool> {
            cells[i]
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad flag `{}`", cells[i])))
        };
        let r = num(18)?;
        Ok(Self {
            alpha: num(0)?,
            beta: num(1)?,
            gamma: num(2)?,
            theta: num(3)?,
            phi: num(4)?,
            lambda1: num(5)?,
            lambda2: num(6)?,
            x: num(7)?,
            y: num(8)?,
            z: num(9)?,
            f: num(10)?,
            q11: num(11)?,
            q12: num(12)?,
            q22: num(13)?,
            d12: num(14)?,
            det_q: num(15)?,
            s: ext(16)?,
            c: ext(17)?,
            r: (!r.is_nan()).then_some(r),
            c_s: ext(19)?,
            c_h: ext(20)?,
            c_n: ext(21)?,
            k1: ext(22)?,
            k2: ext(23)?,
            sloppy: flag(24)?,
            weak_compatible: flag(25)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

pub fn csv_header() -> String {
    CSV_COLUMNS.join(",")
}

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

fn format_ext(v: ExtReal) -> String {
    format_float(v.to_f64())
}

pub fn parse_float(token: &str) -> Result<f64> {
    match token.trim() {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "nan" => Ok(f64::NAN),
        t => t
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad number `{t}`"))),
    }
}
