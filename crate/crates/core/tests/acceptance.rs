//! Acceptance gate. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use cpnli::config::{preset, Experiment};
use cpnli::experiment;
use cpnli::interferometer::SMF28_K2;
use cpnli::linalg::kron2;
use cpnli::reduced::conditional_density;
use cpnli::schmidt::DEFAULT_RANK_THRESHOLD;
use cpnli::tomography::{
    expected_rates, mle_reconstruct, simulate_counts, split_seed, DcmParams, MleOptions,
    ProjectorSet16,
};
use cpnli::units::SPEED_OF_LIGHT;
use cpnli::{
    compose_nli, concurrence, fidelity, fringe_visibility, pc_unitary, purity, schmidt_decompose,
    spdc_state, trace_out_frequency, DensityMatrix4, DispersionExpansion, ImperfectionParams,
    JointState, LinearArm, PolarizationKet4, SpdcParams,
};

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ideal() -> ImperfectionParams {
    ImperfectionParams::default()
}

fn output(params: &SpdcParams, arm: &LinearArm, theta: f64) -> JointState {
    let src = spdc_state(params).expect("valid source");
    compose_nli(&src, &pc_unitary(theta, 0.0, 0.0), arm, &ideal()).expect("valid parameters")
}

/// Indices of bins whose weight exceeds `1e-6` of the largest.
fn significant_bins(state: &JointState) -> Vec<usize> {
    let peak = (0..state.len())
        .map(|n| state.bin_weight(n))
        .fold(0.0, f64::max);
    (0..state.len())
        .filter(|&n| state.bin_weight(n) > 1e-6 * peak)
        .collect()
}

/// Flat source envelope and a purely linear α spanning `periods` multiples of π
/// across the grid, so that e^{2iα} is sampled uniformly over whole periods.
fn uniform_sweep(periods: f64) -> (SpdcParams, LinearArm) {
    let params = SpdcParams {
        phase_mismatch: DispersionExpansion::default(),
        ..SpdcParams::default()
    };
    let length = 5.0;
    let k1 = periods * PI / (2.0 * params.emission_bandwidth * length);
    let dispersion = DispersionExpansion {
        k1_s_per_m: k1,
        ..DispersionExpansion::default()
    };
    let arm = LinearArm::new(length, dispersion, &params);
    (params, arm)
}

fn case1_conditional_concurrence() -> Outcome {
    let start = Instant::now();
    let params = SpdcParams::default();
    let out = output(&params, &LinearArm::smf28(&params), 0.0);
    let bins = significant_bins(&out);
    let worst = bins
        .iter()
        .map(|&n| (concurrence(&conditional_density(&out, n).unwrap()) - 1.0).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "max |C-1| = {worst:.2e} over {} of {} bins, {elapsed:.3} s",
        bins.len(),
        out.len()
    );
    if worst <= 1e-10 && elapsed < 1.0 && out.len() == 4096 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Independent evaluation of α(Ω) = Δk⁽⁰⁾(Ω) L₀ + Δk(Ω) L from raw coefficients.
fn alpha_oracle(arm: [f64; 4], l0: f64, crystal: [f64; 4], l: f64, w: f64) -> f64 {
    let taylor = |c: [f64; 4]| c[0] + c[1] * w + c[2] * w * w / 2.0 + c[3] * w * w * w / 6.0;
    taylor(arm) * l0 + taylor(crystal) * l
}

fn case2_analytic_law() -> Outcome {
    let params = SpdcParams::default();
    let crystal = [0.0, 0.0, params.phase_mismatch.k2_s2_per_m, 0.0];
    let models: [(&str, [f64; 4]); 3] = [
        ("pure quadratic", [0.0, 0.0, SMF28_K2, 0.0]),
        ("cubic-contaminated", [0.0, 0.0, SMF28_K2, 5e-40]),
        (
            "offset + linear + quadratic",
            [3.0, 2e-13, 0.5 * SMF28_K2, 0.0],
        ),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (name, c) in models {
        let arm = LinearArm::new(
            5.0,
            DispersionExpansion {
                k0_rad_per_m: c[0],
                k1_s_per_m: c[1],
                k2_s2_per_m: c[2],
                k3_s3_per_m: c[3],
            },
            &params,
        );
        let out = output(&params, &arm, FRAC_PI_4);
        let bins = significant_bins(&out);
        let worst = bins
            .iter()
            .map(|&n| {
                let w = out.detunings()[n];
                let alpha = alpha_oracle(c, 5.0, crystal, params.crystal_length, w);
                let c_pipeline = concurrence(&conditional_density(&out, n).unwrap());
                (c_pipeline - (2.0 * alpha).cos().abs()).abs()
            })
            .fold(0.0, f64::max);
        ok &= worst <= 1e-10;
        details.push(format!("{name}: {worst:.2e}"));
    }
    let detail = format!("max |C - |cos 2α|| per model: {}", details.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn schmidt_structure() -> Outcome {
    let params = SpdcParams::default();
    let case1 = schmidt_decompose(
        &output(&params, &LinearArm::smf28(&params), 0.0),
        DEFAULT_RANK_THRESHOLD,
    )
    .map_err(|e| e.to_string())?;
    let c2_case1 = case1.coefficients.get(1).copied().unwrap_or(0.0);

    let (p, arm) = uniform_sweep(12.0);
    let case2 = schmidt_decompose(&output(&p, &arm, FRAC_PI_4), DEFAULT_RANK_THRESHOLD)
        .map_err(|e| e.to_string())?;
    let c = &case2.coefficients;
    let detail = format!(
        "case 1: c2 = {c2_case1:.2e}, rank {}; case 2 (12 periods): rank {}, c = {:.6}, {:.6}",
        case1.rank,
        case2.rank,
        c[0],
        c.get(1).copied().unwrap_or(0.0)
    );
    let equal = c.len() >= 2
        && (c[0] - FRAC_1_SQRT_2).abs() <= 1e-3
        && (c[1] - FRAC_1_SQRT_2).abs() <= 1e-3;
    if c2_case1 < 1e-8 && case1.rank == 1 && case2.rank == 2 && equal {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fringe_transfer() -> Outcome {
    let params = SpdcParams::default();
    let arm = LinearArm::smf28(&params);
    let src = spdc_state(&params).unwrap();
    let v1 =
        fringe_visibility(&output(&params, &arm, 0.0), &src, &arm).map_err(|e| e.to_string())?;
    let out2 = output(&params, &arm, FRAC_PI_4);
    let v2 = fringe_visibility(&out2, &src, &arm).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = significant_bins(&src)
        .into_iter()
        .map(|n| out2.bin_weight(n) / src.bin_weight(n))
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean;
    let detail = format!(
        "case 1 V = {v1:.12}, case 2 V = {v2:.2e}, case 2 output/source ratio {mean:.6} with max relative spread {spread:.2e}"
    );
    if (v1 - 1.0).abs() <= 1e-10 && v2 < 1e-10 && spread < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reduced_states() -> Outcome {
    let params = SpdcParams::default();
    let rho1 = trace_out_frequency(&output(&params, &LinearArm::smf28(&params), 0.0)).unwrap();
    let c1 = concurrence(&rho1);

    let (p, arm) = uniform_sweep(120.0);
    let rho2 = trace_out_frequency(&output(&p, &arm, FRAC_PI_4)).unwrap();
    let q = 0.25;
    let expected = [
        [q, 0.0, 0.0, -q],
        [0.0, q, q, 0.0],
        [0.0, q, q, 0.0],
        [-q, 0.0, 0.0, q],
    ];
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((rho2.get(i, j) - C64::new(expected[i][j], 0.0)).norm());
        }
    }
    let p2 = purity(&rho2);
    let detail = format!(
        "case 1 C = {c1:.12}; case 2 (120 periods) max elementwise deviation {worst:.2e}, purity {p2:.6}"
    );
    if (c1 - 1.0).abs() <= 1e-10 && worst <= 1e-3 && (p2 - 0.5).abs() <= 1e-3 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Conditional Case-2 state at relative phase α, from its ket
/// (−|HH⟩ + |VV⟩ + e^{2iα}(|HV⟩ + |VH⟩))/2.
fn coupled_state(alpha: f64) -> DensityMatrix4 {
    let p = C64::from_polar(0.5, 2.0 * alpha);
    let ket = PolarizationKet4::new([C64::new(-0.5, 0.0), p, p, C64::new(0.5, 0.0)]).unwrap();
    DensityMatrix4::from_ket(&ket).unwrap()
}

fn tomography_closure() -> Outcome {
    let start = Instant::now();
    let set = ProjectorSet16::standard();
    let opts = MleOptions::default();
    let truth = coupled_state(PI / 6.0);
    let exact = expected_rates(&truth, &set, 1e5, 0.0);
    let fit = mle_reconstruct(&exact, &set, &opts).map_err(|e| e.to_string())?;
    let closure = fidelity(&fit.density, &truth);

    // 1e5 counts behind a projector that passes the whole state.
    let analytic = (2.0 * PI / 6.0).cos().abs();
    let rates = expected_rates(&truth, &set, 1e4, 0.0);
    let mut errors: Vec<f64> = (0..50)
        .map(|s| {
            let counts = simulate_counts(&rates, 10.0, split_seed(2024, s)).unwrap();
            let counts: Vec<f64> = counts.iter().map(|&n| n as f64).collect();
            let r = mle_reconstruct(&counts, &set, &opts).unwrap();
            (concurrence(&r.density) - analytic).abs()
        })
        .collect();
    errors.sort_by(f64::total_cmp);
    let median = 0.5 * (errors[24] + errors[25]);
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "noise-free fidelity 1 - {:.2e}; 50-seed median |C - 0.5| = {median:.4}; {elapsed:.2} s",
        1.0 - closure
    );
    if closure >= 1.0 - 1e-6 && median <= 0.02 && elapsed < 60.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn device_brackets() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |name: &str, experiment: Option<Experiment>| {
        let mut cfg = preset(name).expect("preset exists");
        if let Some(e) = experiment {
            cfg.experiment = e;
        }
        cfg.output_dir = dir.path().join(format!("{name}-{}", cfg.experiment));
        experiment::run(&cfg).map_err(|e| e.to_string())
    };
    let full1 = run("case1-device", None)?;
    let full2 = run("case2-device", None)?;
    let sweep = run("case2-device", Some(Experiment::ConcurrenceSweep))?;
    let get = |v: &serde_json::Value, path: &[&str]| {
        path.iter()
            .fold(v, |v, k| &v[*k])
            .as_f64()
            .ok_or_else(|| format!("summary lacks {}", path.join(".")))
    };
    let c1 = get(&full1.summary, &["derived", "tomography", "concurrence"])?;
    let c2 = get(&full2.summary, &["derived", "tomography", "concurrence"])?;
    let lo = get(&sweep.summary, &["derived", "concurrence_min"])?;
    let hi = get(&sweep.summary, &["derived", "concurrence_max"])?;
    let bins = sweep.summary["derived"]["bins"].as_u64().unwrap_or(0);
    let band = sweep.summary["config"]["tomography"]["band_nm"]
        .as_f64()
        .unwrap_or(0.0);
    let detail = format!(
        "case 1 full band {c1:.3}, case 2 full band {c2:.3}, case 2 sweep over {band} nm ({bins} bins) {lo:.3}..{hi:.3}"
    );
    if (0.90..=1.0).contains(&c1)
        && (0.05..=0.20).contains(&c2)
        && lo < 0.2
        && hi > 0.95
        && band >= 60.0
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dcm_binning() -> Outcome {
    let d = DcmParams::default();
    let width_nm = d.bin_width() * 1e9;
    // Independent check: frequency difference between the bin edges.
    let lambda = 1560e-9;
    let dl = 256e-12 / (707e-12 / 1e-9);
    let edges = SPEED_OF_LIGHT / (lambda - dl / 2.0) - SPEED_OF_LIGHT / (lambda + dl / 2.0);
    let ghz = d.bin_width_hz() * 1e-9;
    let sig4 = |x: f64| format!("{:.3e}", x);
    let detail = format!(
        "bin width {width_nm:.4} nm, {ghz:.4} GHz (edge difference {:.4} GHz)",
        edges * 1e-9
    );
    if (width_nm - 0.362).abs() < 5e-4 && sig4(ghz) == sig4(edges * 1e-9) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_density(rng: &mut ChaCha8Rng, rank: usize) -> DensityMatrix4 {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for _ in 0..rank {
        let v: Vec<C64> = (0..4)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] += v[i] * v[j].conj();
            }
        }
    }
    DensityMatrix4::normalized(m).unwrap()
}

fn random_unitary(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    let theta = rng.random_range(0.0..PI);
    let u = pc_unitary(
        theta,
        rng.random_range(0.0..2.0 * PI),
        rng.random_range(0.0..2.0 * PI),
    );
    let g = C64::from_polar(1.0, rng.random_range(0.0..2.0 * PI));
    u.matrix().map(|row| row.map(|z| z * g))
}

fn local_unitary_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut entangled = 0;
    for k in 0..200 {
        let rho = random_density(&mut rng, 1 + k % 4);
        let w = kron2(&random_unitary(&mut rng), &random_unitary(&mut rng));
        let c = concurrence(&rho);
        if c > 0.0 {
            entangled += 1;
        }
        let drift = (concurrence(&rho.transformed(&w).unwrap()) - c).abs();
        worst = worst.max(drift);
    }
    let detail = format!("max drift {worst:.2e} over 200 triples ({entangled} entangled)");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [Check; 9] = [
        (
            "case-1 conditional concurrence",
            case1_conditional_concurrence,
        ),
        ("case-2 analytic law", case2_analytic_law),
        ("schmidt structure", schmidt_structure),
        ("fringe transfer", fringe_transfer),
        ("reduced states", reduced_states),
        ("tomography closure", tomography_closure),
        ("device concurrence brackets", device_brackets),
        ("dcm binning", dcm_binning),
        ("local-unitary invariance", local_unitary_invariance),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
