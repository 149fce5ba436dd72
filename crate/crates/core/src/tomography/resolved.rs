//! Frequency-resolved and band-integrated tomography of a joint state.

use super::counts::{expected_rates, simulate_counts, split_seed, BinCounts};
use super::dcm::{wavelength_bins, ArmLabel, DcmParams};
use super::mle::{mle_reconstruct, MleOptions, MleResult};
use super::projectors::ProjectorSet16;
use crate::error::{Error, Result};
use crate::measures::{concurrence, fidelity};
use crate::par;
use crate::reduced::{average_density, trace_out_frequency};
use crate::state::{DensityMatrix4, JointState};

/// Acquisition and reconstruction settings shared by every bin.
#[derive(Debug, Clone, PartialEq)]
pub struct QstSettings {
    /// Coincidence rate (counts/s) of a projector that passes the whole
    /// state; projector `j` sees `brightness · Tr(P_j ρ)`.
    pub brightness: f64,
    /// Integration time per projector setting (s).
    pub acquisition_time: f64,
    /// Accidental coincidences (counts/s) added to every projector.
    pub background: f64,
    /// Parametric bootstrap resamples for the concurrence uncertainty; 0 disables it.
    pub resamples: usize,
    pub seed: u64,
    pub mle: MleOptions,
}

impl Default for QstSettings {
    fn default() -> Self {
        Self {
            brightness: 1e4,
            acquisition_time: 10.0,
            background: 0.0,
            resamples: 100,
            seed: 1,
            mle: MleOptions::default(),
        }
    }
}

impl QstSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(self.brightness) && self.brightness > 0.0) {
            return Err(Error::validation(
                "QstSettings",
                "brightness > 0",
                format!("{}", self.brightness),
            ));
        }
        if !(ok(self.acquisition_time) && self.acquisition_time > 0.0) {
            return Err(Error::validation(
                "QstSettings",
                "acquisition_time > 0",
                format!("{}", self.acquisition_time),
            ));
        }
        if !ok(self.background) {
            return Err(Error::validation(
                "QstSettings",
                "background >= 0",
                format!("{}", self.background),
            ));
        }
        Ok(())
    }
}

/// Reconstruction of one wavelength bin, or of the whole band (`index` 0,
/// `arm` of the center wavelength).
#[derive(Debug, Clone)]
pub struct QstBinResult {
    pub index: i64,
    pub center_wavelength: f64,
    pub arm: ArmLabel,
    /// Quadrature-weighted average of the bin's conditional states.
    pub truth: DensityMatrix4,
    pub true_concurrence: f64,
    pub counts: BinCounts,
    pub fit: MleResult,
    pub concurrence: f64,
    /// Sample standard deviation of the bootstrap concurrences (0 without resamples).
    pub concurrence_std: f64,
    pub fidelity: f64,
}

/// Reconstructs from `counts` and estimates the concurrence spread by refitting
/// Poisson resamples of the observed counts. Resample `r` draws from seed
/// `split_seed(seed, r + 1)`.
pub fn reconstruct_with_bootstrap(
    counts: &[u64],
    set: &ProjectorSet16,
    settings: &QstSettings,
    seed: u64,
) -> Result<(MleResult, f64)> {
    let observed: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
    let fit = mle_reconstruct(&observed, set, &settings.mle)?;
    if settings.resamples < 2 {
        return Ok((fit, 0.0));
    }
    let mut values = Vec::with_capacity(settings.resamples);
    for r in 0..settings.resamples {
        let resampled = simulate_counts(&observed, 1.0, split_seed(seed, r as u64 + 1))?;
        let resampled: Vec<f64> = resampled.iter().map(|&n| n as f64).collect();
        match mle_reconstruct(&resampled, set, &settings.mle) {
            Ok(f) => values.push(concurrence(&f.density)),
            Err(Error::NoCounts) => values.push(0.0),
            Err(e) => return Err(e),
        }
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Ok((fit, var.sqrt()))
}

fn measure(
    truth: DensityMatrix4,
    index: i64,
    center_wavelength: f64,
    arm: ArmLabel,
    set: &ProjectorSet16,
    settings: &QstSettings,
    seed: u64,
) -> Result<QstBinResult> {
    let rates = expected_rates(&truth, set, settings.brightness, settings.background);
    let counts = simulate_counts(&rates, settings.acquisition_time, split_seed(seed, 0))?;
    let (fit, concurrence_std) = reconstruct_with_bootstrap(&counts, set, settings, seed)?;
    Ok(QstBinResult {
        index,
        center_wavelength,
        arm,
        true_concurrence: concurrence(&truth),
        concurrence: concurrence(&fit.density),
        fidelity: fidelity(&fit.density, &truth),
        truth,
        counts: BinCounts {
            bin: index,
            rates,
            counts,
            acquisition_time: settings.acquisition_time,
            seed,
        },
        fit,
        concurrence_std,
    })
}

/// Simulated tomography in every detector-limited wavelength bin of photon A
/// across `band` (m). Bin `i` (in order of increasing wavelength) uses seed
/// `split_seed(settings.seed, i + 1)`; bins with no weight are skipped.
pub fn frequency_resolved_qst(
    state: &JointState,
    dcm: &DcmParams,
    band: f64,
    settings: &QstSettings,
    set: &ProjectorSet16,
) -> Result<Vec<QstBinResult>> {
    settings.validate()?;
    let bins = wavelength_bins(dcm, state, band)?;
    let results = par::try_map_range(bins.len(), |i| {
        let bin = &bins[i];
        let truth = match average_density(state, &bin.grid_indices) {
            Ok(t) => t,
            Err(Error::ZeroWeightBin { .. }) | Err(Error::Validation { .. }) => {
                log::info!("skipping wavelength bin {} with no weight", bin.index);
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let seed = split_seed(settings.seed, i as u64 + 1);
        measure(
            truth,
            bin.index,
            bin.center_wavelength,
            bin.arm,
            set,
            settings,
            seed,
        )
        .map(Some)
    })?;
    Ok(results.into_iter().flatten().collect())
}

/// Tomography of the frequency-integrated polarization state, seed stream 0.
pub fn full_band_qst(
    state: &JointState,
    dcm: &DcmParams,
    settings: &QstSettings,
    set: &ProjectorSet16,
) -> Result<QstBinResult> {
    settings.validate()?;
    let truth = trace_out_frequency(state)?;
    let center = dcm.center_wavelength;
    measure(
        truth,
        0,
        center,
        ArmLabel::for_wavelength(center),
        set,
        settings,
        split_seed(settings.seed, 0),
    )
}
