//! District-wise and hourly accident distributions, including the
//! unknown-time bucket and the business-hour peak window.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AccidentRecord;

/// Accident counts per district, descending by count then alphabetical.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistrictHistogram {
    pub bins: Vec<(String, u64)>,
    pub total: u64,
}

impl DistrictHistogram {
    pub fn merge(&self, other: &DistrictHistogram) -> DistrictHistogram {
        let mut map: BTreeMap<String, u64> = BTreeMap::new();
        for (name, count) in self.bins.iter().chain(other.bins.iter()) {
            *map.entry(name.clone()).or_insert(0) += count;
        }
        from_map(map)
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "district,count")?;
        for (name, count) in &self.bins {
            writeln!(w, "{name},{count}")?;
        }
        Ok(())
    }
}

fn from_map(map: BTreeMap<String, u64>) -> DistrictHistogram {
    let total = map.values().sum();
    let mut bins: Vec<(String, u64)> = map.into_iter().collect();
    // descending by count; BTreeMap already gave alphabetical tie order
    bins.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    DistrictHistogram { bins, total }
}

pub fn district_distribution(records: &[AccidentRecord]) -> Result<DistrictHistogram> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut map: BTreeMap<String, u64> = BTreeMap::new();
    for r in records {
        *map.entry(r.district.clone()).or_insert(0) += 1;
    }
    Ok(from_map(map))
}

/// 24 hourly bins plus an unknown-time bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HourlyHistogram {
    pub bins: [u64; 24],
    pub unknown: u64,
}

impl HourlyHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum::<u64>() + self.unknown
    }

    /// Hours [0, 12).
    pub fn am_total(&self) -> u64 {
        self.bins[..12].iter().sum()
    }

    /// Hours [12, 24).
    pub fn pm_total(&self) -> u64 {
        self.bins[12..].iter().sum()
    }

    /// The business-hour peak, hours [10, 16).
    pub fn peak_window_total(&self) -> u64 {
        self.bins[10..16].iter().sum()
    }

    pub fn merge(&self, other: &HourlyHistogram) -> HourlyHistogram {
        let mut bins = [0u64; 24];
        for h in 0..24 {
            bins[h] = self.bins[h] + other.bins[h];
        }
        HourlyHistogram { bins, unknown: self.unknown + other.unknown }
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "hour,count")?;
        for (h, count) in self.bins.iter().enumerate() {
            writeln!(w, "{h},{count}")?;
        }
        writeln!(w, "unknown,{}", self.unknown)?;
        Ok(())
    }
}

pub fn hourly_distribution(records: &[AccidentRecord]) -> Result<HourlyHistogram> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut bins = [0u64; 24];
    let mut unknown = 0u64;
    for r in records {
        match r.hour {
            Some(h) => bins[h as usize] += 1,
            None => unknown += 1,
        }
    }
    Ok(HourlyHistogram { bins, unknown })
}
