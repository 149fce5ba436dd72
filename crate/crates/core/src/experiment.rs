//! Batch execution of a [`RunConfig`] and atomic output writing.
//!
//! Each run writes `<experiment>.csv` (columnar data with units in the
//! header) and `<experiment>.summary.json` (input echo, derived quantities,
//! software version) into the output directory. Tomography runs add
//! `<experiment>.counts.csv` and `<experiment>.density.csv`. All files are
//! first written to temporary files in the same directory and renamed only
//! once every file is complete.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Experiment, RunConfig};
use crate::error::{Error, Result};
use crate::interferometer::{
    alpha_phase, compose_nli, fringe_count, fringe_visibility, pc_unitary, LinearArm,
};
use crate::measures::{concurrence, purity};
use crate::reduced::{conditional_density, trace_out_frequency};
use crate::schmidt::{schmidt_decompose, SchmidtResult, DEFAULT_RANK_THRESHOLD};
use crate::source::spdc_state;
use crate::state::{DensityMatrix4, JointState, BASIS_LABELS};
use crate::tomography::{
    frequency_resolved_qst, full_band_qst, BinCounts, ProjectorSet16, QstBinResult,
};
use crate::units;

/// Files produced by a run, in the order they were written.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Pending {
    name: String,
    bytes: Vec<u8>,
}

/// Validates `config`, runs its experiment and writes the outputs.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    let violations = config.validate();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Config(text.join("; ")));
    }
    let (summary, files) = execute(config)?;
    let written = write_atomically(&config.output_dir, &files)?;
    Ok(RunOutput {
        files: written,
        summary,
    })
}

/// Runs the experiment without touching the file system. Returns the summary
/// and the named file contents.
fn execute(config: &RunConfig) -> Result<(Value, Vec<Pending>)> {
    let experiment = config.experiment;
    log::info!("running {experiment}");
    let params = config.source_params();
    params.validate()?;
    let source = spdc_state(&params)?;
    let arm = config.linear_arm();
    arm.validate()?;
    let imp = config.imperfections;
    imp.validate()?;
    let theta = match experiment {
        Experiment::Case1 => 0.0,
        Experiment::Case2 => FRAC_PI_4,
        _ => config.pc.theta_rad,
    };
    let pc = pc_unitary(theta, config.pc.phi1_rad, config.pc.phi2_rad);
    let output = compose_nli(&source, &pc, &arm, &imp)?;
    let dcm = config.dcm_params();
    dcm.validate()?;
    let set = ProjectorSet16::standard();
    let settings = config.qst_settings();
    let stem = experiment.name();

    let mut derived = serde_json::Map::new();
    derived.insert("theta_rad".into(), json!(theta));
    derived.insert(
        "fringe_count".into(),
        json!(fringe_count(&arm, source.detunings())),
    );
    derived.insert("bin_width_nm".into(), json!(dcm.bin_width() * 1e9));
    derived.insert("bin_width_ghz".into(), json!(dcm.bin_width_hz() * 1e-9));
    derived.insert("parallel".into(), json!(crate::par::is_parallel()));

    let mut files = Vec::new();
    match experiment {
        Experiment::Spectrum => {
            describe_output(&mut derived, &source, &output, &arm)?;
            files.push(csv_file(
                &format!("{stem}.csv"),
                &spectrum_rows(&source, &output, &arm),
            )?);
        }
        Experiment::Schmidt => {
            let schmidt = schmidt_decompose(&output, DEFAULT_RANK_THRESHOLD)?;
            describe_schmidt(&mut derived, &schmidt);
            files.push(csv_file(&format!("{stem}.csv"), &schmidt_rows(&schmidt))?);
        }
        Experiment::Tomography => {
            let r = full_band_qst(&output, &dcm, &settings, &set)?;
            derived.insert("reduced_concurrence".into(), json!(r.true_concurrence));
            derived.insert("reduced_purity".into(), json!(purity(&r.truth)));
            derived.insert("tomography".into(), describe_qst(&r));
            files.push(csv_file(&format!("{stem}.csv"), &density_rows(&r))?);
            files.push(counts_file(
                &format!("{stem}.counts.csv"),
                std::slice::from_ref(&r.counts),
                &set,
            )?);
        }
        Experiment::ConcurrenceSweep => {
            let bins = frequency_resolved_qst(&output, &dcm, config.band(), &settings, &set)?;
            describe_sweep(&mut derived, &bins);
            let rows: Vec<SweepRow> = bins
                .iter()
                .map(|b| SweepRow::new(b, params.pump_frequency()))
                .collect();
            files.push(csv_file(&format!("{stem}.csv"), &rows)?);
            let density: Vec<DensityRow> = bins.iter().flat_map(density_rows).collect();
            files.push(csv_file(&format!("{stem}.density.csv"), &density)?);
            let counts: Vec<BinCounts> = bins.iter().map(|b| b.counts.clone()).collect();
            files.push(counts_file(&format!("{stem}.counts.csv"), &counts, &set)?);
        }
        Experiment::Case1 | Experiment::Case2 => {
            describe_output(&mut derived, &source, &output, &arm)?;
            let schmidt = schmidt_decompose(&output, DEFAULT_RANK_THRESHOLD)?;
            describe_schmidt(&mut derived, &schmidt);
            let r = full_band_qst(&output, &dcm, &settings, &set)?;
            derived.insert("tomography".into(), describe_qst(&r));
            files.push(csv_file(
                &format!("{stem}.csv"),
                &spectrum_rows(&source, &output, &arm),
            )?);
            files.push(csv_file(&format!("{stem}.density.csv"), &density_rows(&r))?);
        }
    }

    let summary = json!({
        "software": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "experiment": stem,
        "config": serde_json::to_value(config).map_err(|e| Error::Io(e.to_string()))?,
        "derived": Value::Object(derived),
        "files": files.iter().map(|f| f.name.clone()).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_vec_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    text.push(b'\n');
    files.push(Pending {
        name: format!("{stem}.summary.json"),
        bytes: text,
    });
    Ok((summary, files))
}

fn describe_output(
    derived: &mut serde_json::Map<String, Value>,
    source: &JointState,
    output: &JointState,
    arm: &LinearArm,
) -> Result<()> {
    let reduced = trace_out_frequency(output)?;
    derived.insert("reduced_concurrence".into(), json!(concurrence(&reduced)));
    derived.insert("reduced_purity".into(), json!(purity(&reduced)));
    derived.insert("reduced_density".into(), density_json(&reduced));
    let visibility = match fringe_visibility(output, source, arm) {
        Ok(v) => json!(v),
        Err(e) => {
            log::warn!("fringe visibility not available: {e}");
            Value::Null
        }
    };
    derived.insert("fringe_visibility".into(), visibility);
    let conc: Vec<f64> = (0..output.len())
        .filter_map(|n| conditional_density(output, n).ok())
        .map(|rho| concurrence(&rho))
        .collect();
    let min = conc.iter().copied().fold(f64::INFINITY, f64::min);
    let max = conc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    derived.insert("conditional_concurrence_min".into(), json!(min));
    derived.insert("conditional_concurrence_max".into(), json!(max));
    Ok(())
}

fn describe_schmidt(derived: &mut serde_json::Map<String, Value>, s: &SchmidtResult) {
    derived.insert("schmidt_coefficients".into(), json!(s.coefficients));
    derived.insert("schmidt_rank".into(), json!(s.rank));
    derived.insert(
        "schmidt_rank_threshold".into(),
        json!(DEFAULT_RANK_THRESHOLD),
    );
}

fn describe_qst(r: &QstBinResult) -> Value {
    json!({
        "concurrence": r.concurrence,
        "concurrence_std": r.concurrence_std,
        "true_concurrence": r.true_concurrence,
        "fidelity": r.fidelity,
        "purity": purity(&r.fit.density),
        "converged": r.fit.converged,
        "iterations": r.fit.iterations,
        "gradient_norm": r.fit.gradient_norm,
        "log_likelihood": r.fit.log_likelihood,
        "total_counts": r.counts.counts.iter().sum::<u64>(),
        "density": density_json(&r.fit.density),
    })
}

fn describe_sweep(derived: &mut serde_json::Map<String, Value>, bins: &[QstBinResult]) {
    let conc: Vec<f64> = bins.iter().map(|b| b.concurrence).collect();
    let min = conc.iter().copied().fold(f64::INFINITY, f64::min);
    let max = conc.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    derived.insert("bins".into(), json!(bins.len()));
    derived.insert("concurrence_min".into(), json!(min));
    derived.insert("concurrence_max".into(), json!(max));
    derived.insert(
        "unconverged_bins".into(),
        json!(bins.iter().filter(|b| !b.fit.converged).count()),
    );
}

fn density_json(rho: &DensityMatrix4) -> Value {
    let m = rho.matrix();
    json!({
        "basis": BASIS_LABELS,
        "re": m.iter().map(|row| row.iter().map(|z| z.re).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "im": m.iter().map(|row| row.iter().map(|z| z.im).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

#[derive(Serialize)]
struct SpectrumRow {
    detuning_thz: f64,
    wavelength_a_nm: f64,
    wavelength_b_nm: f64,
    alpha_rad: f64,
    source_intensity: f64,
    output_intensity: f64,
    concurrence: Option<f64>,
}

fn spectrum_rows(source: &JointState, output: &JointState, arm: &LinearArm) -> Vec<SpectrumRow> {
    (0..output.len())
        .map(|n| {
            let omega = output.detunings()[n];
            let (wa, wb) = output.pair_frequencies(n);
            SpectrumRow {
                detuning_thz: units::rad_per_s_to_thz(omega),
                wavelength_a_nm: units::wavelength(wa) * 1e9,
                wavelength_b_nm: units::wavelength(wb) * 1e9,
                alpha_rad: alpha_phase(arm, omega),
                source_intensity: source.bin_weight(n),
                output_intensity: output.bin_weight(n),
                concurrence: conditional_density(output, n).ok().map(|r| concurrence(&r)),
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SchmidtRow {
    k: usize,
    coefficient: f64,
    hh_re: f64,
    hh_im: f64,
    hv_re: f64,
    hv_im: f64,
    vh_re: f64,
    vh_im: f64,
    vv_re: f64,
    vv_im: f64,
}

fn schmidt_rows(s: &SchmidtResult) -> Vec<SchmidtRow> {
    s.coefficients
        .iter()
        .zip(&s.pol_vectors)
        .enumerate()
        .map(|(k, (&c, xi))| {
            let a = xi.amplitudes();
            SchmidtRow {
                k: k + 1,
                coefficient: c,
                hh_re: a[0].re,
                hh_im: a[0].im,
                hv_re: a[1].re,
                hv_im: a[1].im,
                vh_re: a[2].re,
                vh_im: a[2].im,
                vv_re: a[3].re,
                vv_im: a[3].im,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    bin: i64,
    wavelength_nm: f64,
    detuning_thz: f64,
    arm: &'static str,
    true_concurrence: f64,
    concurrence: f64,
    concurrence_std: f64,
    fidelity: f64,
    purity: f64,
    converged: bool,
}

impl SweepRow {
    fn new(b: &QstBinResult, pump: f64) -> Self {
        Self {
            bin: b.index,
            wavelength_nm: b.center_wavelength * 1e9,
            detuning_thz: units::rad_per_s_to_thz(
                units::angular_frequency(b.center_wavelength) - 0.5 * pump,
            ),
            arm: b.arm.as_str(),
            true_concurrence: b.true_concurrence,
            concurrence: b.concurrence,
            concurrence_std: b.concurrence_std,
            fidelity: b.fidelity,
            purity: purity(&b.fit.density),
            converged: b.fit.converged,
        }
    }
}

#[derive(Serialize)]
struct DensityRow {
    bin: i64,
    row: &'static str,
    col: &'static str,
    reconstructed_re: f64,
    reconstructed_im: f64,
    true_re: f64,
    true_im: f64,
}

fn density_rows(r: &QstBinResult) -> Vec<DensityRow> {
    let fit = r.fit.density.matrix();
    let truth = r.truth.matrix();
    let mut rows = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            rows.push(DensityRow {
                bin: r.index,
                row: BASIS_LABELS[i],
                col: BASIS_LABELS[j],
                reconstructed_re: fit[i][j].re,
                reconstructed_im: fit[i][j].im,
                true_re: truth[i][j].re,
                true_im: truth[i][j].im,
            });
        }
    }
    rows
}

fn csv_file<T: Serialize>(name: &str, rows: &[T]) -> Result<Pending> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(Pending {
        name: name.to_string(),
        bytes,
    })
}

fn counts_file(name: &str, bins: &[BinCounts], set: &ProjectorSet16) -> Result<Pending> {
    let mut bytes = Vec::new();
    BinCounts::write_csv(bins, set, &mut bytes)?;
    Ok(Pending {
        name: name.to_string(),
        bytes,
    })
}

/// Writes every file to a temporary sibling first; renames happen only after
/// all contents are on disk, so a failure leaves no partial outputs.
fn write_atomically(dir: &Path, files: &[Pending]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut staged = Vec::with_capacity(files.len());
    for f in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(&f.bytes)?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, dir.join(&f.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| Error::Io(e.to_string()))?;
        written.push(path);
    }
    Ok(written)
}
