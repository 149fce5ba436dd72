use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::projectors::ProjectorSet16;
use crate::error::{Error, Result};
use crate::state::DensityMatrix4;

/// Derives an independent child seed for `stream` from `root` (SplitMix64 finalizer).
pub fn split_seed(root: u64, stream: u64) -> u64 {
    let mut z = root
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean coincidence rate (counts/s) behind each projector:
/// `brightness · Tr(P_j ρ) + background`.
pub fn expected_rates(
    rho: &DensityMatrix4,
    set: &ProjectorSet16,
    brightness: f64,
    background: f64,
) -> Vec<f64> {
    set.iter()
        .map(|p| brightness * rho.expectation(&p.matrix).max(0.0) + background)
        .collect()
}

/// Poisson counts with means `rate · acquisition_time`, from a ChaCha stream
/// seeded with `seed`. A zero mean yields zero counts.
pub fn simulate_counts(rates: &[f64], acquisition_time: f64, seed: u64) -> Result<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rates
        .iter()
        .map(|&rate| {
            let mean = rate * acquisition_time;
            if !(mean.is_finite() && mean >= 0.0) {
                return Err(Error::validation(
                    "count model",
                    "finite non-negative mean",
                    format!("{mean}"),
                ));
            }
            if mean == 0.0 {
                return Ok(0);
            }
            let dist = Poisson::new(mean).map_err(|e| {
                Error::validation("count model", "Poisson mean in range", e.to_string())
            })?;
            Ok(dist.sample(&mut rng) as u64)
        })
        .collect()
}

/// Counts recorded for one wavelength bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinCounts {
    pub bin: i64,
    pub rates: Vec<f64>,
    pub counts: Vec<u64>,
    pub acquisition_time: f64,
    pub seed: u64,
}

/// One row of the count table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub bin: i64,
    pub projector: String,
    pub rate_cps: f64,
    pub counts: u64,
    pub acquisition_time_s: f64,
    pub seed: u64,
}

impl BinCounts {
    pub fn records(&self, set: &ProjectorSet16) -> Vec<CountRecord> {
        set.iter()
            .zip(self.rates.iter().zip(&self.counts))
            .map(|(p, (&rate, &n))| CountRecord {
                bin: self.bin,
                projector: p.label(),
                rate_cps: rate,
                counts: n,
                acquisition_time_s: self.acquisition_time,
                seed: self.seed,
            })
            .collect()
    }

    /// Writes rows for every bin as CSV with a header.
    pub fn write_csv<W: Write>(bins: &[BinCounts], set: &ProjectorSet16, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for b in bins {
            for rec in b.records(set) {
                w.serialize(rec).map_err(|e| Error::Io(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`BinCounts::write_csv`]. Rows of a bin must
    /// be contiguous and list the projectors in `set` order.
    pub fn read_csv<R: Read>(input: R, set: &ProjectorSet16) -> Result<Vec<BinCounts>> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut bins: Vec<BinCounts> = Vec::new();
        for row in rdr.deserialize() {
            let rec: CountRecord = row.map_err(|e| Error::Io(e.to_string()))?;
            let start_new = bins
                .last()
                .is_none_or(|b| b.bin != rec.bin || b.counts.len() == set.len());
            if start_new {
                bins.push(BinCounts {
                    bin: rec.bin,
                    rates: Vec::with_capacity(set.len()),
                    counts: Vec::with_capacity(set.len()),
                    acquisition_time: rec.acquisition_time_s,
                    seed: rec.seed,
                });
            }
            let b = bins.last_mut().expect("pushed above");
            let expected = set.get(b.counts.len()).label();
            if rec.projector != expected {
                return Err(Error::Io(format!(
                    "bin {}: expected projector {expected}, found {}",
                    rec.bin, rec.projector
                )));
            }
            b.rates.push(rec.rate_cps);
            b.counts.push(rec.counts);
        }
        if let Some(b) = bins.iter().find(|b| b.counts.len() != set.len()) {
            return Err(Error::Io(format!(
                "bin {} has {} projector rows, expected {}",
                b.bin,
                b.counts.len(),
                set.len()
            )));
        }
        Ok(bins)
    }
}
