use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::JointState;
use crate::units;

/// Wavelength separating the two arms of the band splitter (m). Photons above
/// it are routed to the signal analyzer, below it to the idler analyzer.
pub const LC_SPLIT_WAVELENGTH: f64 = 1564e-9;

/// Dispersion compensating module used as a wavelength-to-delay mapper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcmParams {
    /// Group-delay dispersion, s per m of wavelength (707 ps/nm = 0.707 s/m).
    pub dispersion: f64,
    /// Detector timing jitter (s); sets the narrowest coincidence window.
    pub detector_jitter: f64,
    pub center_wavelength: f64,
}

impl Default for DcmParams {
    fn default() -> Self {
        Self {
            dispersion: 0.707,
            detector_jitter: 256e-12,
            center_wavelength: 1560e-9,
        }
    }
}

impl DcmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return Err(Error::validation(
                "DcmParams",
                "dispersion > 0",
                format!("{}", self.dispersion),
            ));
        }
        if !(self.detector_jitter > 0.0 && self.detector_jitter.is_finite()) {
            return Err(Error::validation(
                "DcmParams",
                "jitter > 0",
                format!("{}", self.detector_jitter),
            ));
        }
        if !(self.center_wavelength > 0.0 && self.center_wavelength.is_finite()) {
            return Err(Error::validation(
                "DcmParams",
                "center_wavelength > 0",
                format!("{}", self.center_wavelength),
            ));
        }
        Ok(())
    }

    /// Spectral resolution in wavelength, `jitter / dispersion` (m).
    pub fn bin_width(&self) -> f64 {
        self.detector_jitter / self.dispersion
    }

    /// Spectral resolution as an ordinary frequency at the center wavelength (Hz).
    pub fn bin_width_hz(&self) -> f64 {
        units::wavelength_width_to_hz(self.bin_width(), self.center_wavelength)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmLabel {
    Signal,
    Idler,
}

impl ArmLabel {
    pub fn for_wavelength(lambda: f64) -> Self {
        if lambda > LC_SPLIT_WAVELENGTH {
            ArmLabel::Signal
        } else {
            ArmLabel::Idler
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ArmLabel::Signal => "signal",
            ArmLabel::Idler => "idler",
        }
    }
}

/// A detector-resolution-limited wavelength bin of photon A and the grid
/// points that fall into it.
#[derive(Debug, Clone, PartialEq)]
pub struct WavelengthBin {
    /// Offset from the center wavelength in units of the bin width.
    pub index: i64,
    pub center_wavelength: f64,
    pub lower: f64,
    pub upper: f64,
    pub grid_indices: Vec<usize>,
    /// Which analyzer photon A reaches.
    pub arm: ArmLabel,
}

impl WavelengthBin {
    /// Detuning (rad/s) of photon A at the bin center for pump frequency `pump`.
    pub fn center_detuning(&self, pump: f64) -> f64 {
        units::angular_frequency(self.center_wavelength) - 0.5 * pump
    }
}

/// Aggregates the frequency grid of `state` into detector-limited wavelength
/// bins of photon A covering `band` (m) around the DCM center wavelength. Bins
/// with no grid points are skipped.
pub fn wavelength_bins(
    dcm: &DcmParams,
    state: &JointState,
    band: f64,
) -> Result<Vec<WavelengthBin>> {
    dcm.validate()?;
    if !(band > 0.0) {
        return Err(Error::validation(
            "DcmParams",
            "band > 0",
            format!("{band}"),
        ));
    }
    let width = dcm.bin_width();
    let center = dcm.center_wavelength;
    let half = 0.5 * band;
    let lambdas: Vec<f64> = (0..state.len())
        .map(|n| units::wavelength(state.pair_frequencies(n).0))
        .collect();

    let in_band: Vec<usize> = (0..lambdas.len())
        .filter(|&n| (lambdas[n] - center).abs() <= half)
        .collect();
    let spacing = in_band
        .windows(2)
        .map(|w| (lambdas[w[0]] - lambdas[w[1]]).abs())
        .fold(0.0, f64::max);
    if width < spacing {
        return Err(Error::GridTooCoarse {
            bin_width_nm: width * 1e9,
            grid_spacing_nm: spacing * 1e9,
        });
    }

    let max_index = (half / width - 0.5).floor() as i64;
    let mut bins: Vec<WavelengthBin> = (-max_index..=max_index)
        .map(|k| {
            let c = center + k as f64 * width;
            WavelengthBin {
                index: k,
                center_wavelength: c,
                lower: c - 0.5 * width,
                upper: c + 0.5 * width,
                grid_indices: Vec::new(),
                arm: ArmLabel::for_wavelength(c),
            }
        })
        .collect();
    for &n in &in_band {
        let k = ((lambdas[n] - center) / width).round() as i64;
        if k.abs() <= max_index {
            bins[(k + max_index) as usize].grid_indices.push(n);
        }
    }
    let before = bins.len();
    bins.retain(|b| !b.grid_indices.is_empty());
    if bins.len() < before {
        log::info!(
            "skipped {} empty wavelength bins (grid does not reach them)",
            before - bins.len()
        );
    }
    Ok(bins)
}
