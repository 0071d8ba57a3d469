//! File formats: estimate CSV, pretty JSON, portable configuration dumps.

use std::path::Path;

use serde::{Deserialize, Serialize};
use slabperc_core::estimators::Estimate;
use slabperc_core::lattice::GeometryDescriptor;
use slabperc_core::sampler::{Configuration, Provenance};

use crate::Error;

pub const CSV_HEADER: &str = "event_id,k,n,u,alpha,beta,p,N,p_hat,ci_low,ci_high,seed,streams";

/// `x` with `digits` significant digits, `%g` style.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV line; parameters that do not apply to the event are left empty.
#[derive(Clone, Debug)]
pub struct CsvRow<'a> {
    pub event_id: &'a str,
    pub k: u32,
    pub n: i32,
    pub u: Option<i32>,
    pub alpha: Option<i32>,
    pub beta: Option<i32>,
    pub p: f64,
    pub estimate: &'a Estimate,
}

impl CsvRow<'_> {
    pub fn line(&self) -> String {
        let opt = |v: Option<i32>| v.map(|v| v.to_string()).unwrap_or_default();
        let e = self.estimate;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}..{}",
            self.event_id,
            self.k,
            self.n,
            opt(self.u),
            opt(self.alpha),
            opt(self.beta),
            fmt_sig(self.p, 9),
            e.n_samples,
            fmt_sig(e.p_hat, 9),
            fmt_sig(e.ci_low, 9),
            fmt_sig(e.ci_high, 9),
            e.seed,
            e.streams.start,
            e.streams.end
        )
    }
}

pub fn csv(rows: &[CsvRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.line());
        s.push('\n');
    }
    s
}

pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, Error> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// A configuration as hex bits plus where it came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigDump {
    pub geometry: GeometryDescriptor,
    pub hex: String,
    pub provenance: Option<Provenance>,
}

impl ConfigDump {
    pub fn new(geometry: GeometryDescriptor, c: &Configuration) -> Self {
        ConfigDump { geometry, hex: c.to_hex(), provenance: c.provenance }
    }

    pub fn load(&self) -> Result<Configuration, Error> {
        let g = slabperc_core::lattice::SlabGeometry::from_descriptor(&self.geometry)?;
        let mut c = Configuration::from_hex(&self.hex, g.edge_count())?;
        c.provenance = self.provenance;
        Ok(c)
    }
}
