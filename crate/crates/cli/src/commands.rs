//! The five subcommands: building blocks around the core crate plus
//! CSV/JSON emission.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use coldscatter_core::cloud::{reference_expansion_times_ms, table1_generate};
use coldscatter_core::fit::{
    fit_density_model, fit_double_exponential, fit_saturation, fit_single_exponential,
    fit_spectral_model, FitResult, Point,
};
use coldscatter_core::models::{
    density_model, spectral_model, steady_state_level, DensityModelParams, SpectralModelParams,
};
use coldscatter_core::pumping::{extract_pump_rate, integrated_signal, simulate_pumping};
use coldscatter_core::transport::{extract_decay_time, run_worker, Medium, TimeHistogram};

use crate::config::ExperimentConfig;

/// Writes `content` to `out` or stdout.
fn emit(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => std::fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

/// Writes the JSON summary next to the artifact (`<out>.summary.json`);
/// without `--out` the summary is skipped.
fn emit_summary(out: Option<&Path>, summary: &serde_json::Value) -> anyhow::Result<()> {
    if let Some(p) = out {
        let mut path = PathBuf::from(p);
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".summary.json");
        path.set_file_name(name);
        let text = serde_json::to_string_pretty(summary)?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn cmd_table1(config: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<()> {
    let cloud = config.cloud.resolve()?;
    let params = config.transition.resolve()?;
    let times = if config.sweep.expansion_times_ms.is_empty() {
        reference_expansion_times_ms(&cloud, params.sigma0_cm2)?
    } else {
        config.sweep.expansion_times_ms.clone()
    };
    let rows = table1_generate(&cloud, &times, params.sigma0_cm2)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time_ms", "b_t", "n0_cm^-3", "r0_um", "z0_um"])?;
    for (t, row) in times.iter().zip(&rows) {
        w.write_record([
            format_g(*t),
            format_g(row.bt),
            format_g(row.n0_cm3),
            format_g(row.r0_um),
            format_g(row.z0_um),
        ])?;
    }
    emit(out, &String::from_utf8(w.into_inner()?)?)?;
    emit_summary(
        out,
        &serde_json::json!({
            "command": "table1",
            "config": config,
            "rows": rows.len(),
        }),
    )
}

fn format_g(v: f64) -> String {
    // shortest representation that round-trips
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    Density,
    Detuning,
    Intensity,
}

pub fn cmd_sweep(
    config: &ExperimentConfig,
    axis: Axis,
    with_mc: bool,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let cloud = config.cloud.resolve()?;
    let params = config.transition.resolve()?;
    let model = &config.model;
    let b0 = if model.b0 > 0.0 {
        model.b0
    } else {
        cloud.transverse_optical_depth(params.sigma0_cm2)?
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    match axis {
        Axis::Density => {
            let times = if config.sweep.expansion_times_ms.is_empty() {
                reference_expansion_times_ms(&cloud, params.sigma0_cm2)?
            } else {
                config.sweep.expansion_times_ms.clone()
            };
            if times.is_empty() {
                bail!("empty density grid");
            }
            let dm = DensityModelParams { amplitude_a: model.amplitude_a, eta: model.eta };
            let mut header = vec!["time_ms", "b_t", "power_model"];
            if with_mc {
                header.push("mc_scattered_fraction");
            }
            w.write_record(&header)?;
            for &t in &times {
                let c = cloud.ballistic_expand(t)?;
                let bt = c.transverse_optical_depth(params.sigma0_cm2)?;
                let mut rec = vec![format_g(t), format_g(bt), format_g(density_model(bt, &dm)?)];
                if with_mc {
                    let hist = run_mc(config, &Medium::Gaussian(c), None)?;
                    rec.push(format_g(hist.scattered as f64 / hist.launched as f64));
                }
                w.write_record(&rec)?;
            }
        }
        Axis::Detuning => {
            let s = &config.sweep;
            if !(s.detuning_step_mhz > 0.0) || s.detuning_min_mhz > s.detuning_max_mhz {
                bail!("empty detuning grid");
            }
            let sp = SpectralModelParams {
                amplitude_a: model.amplitude_a,
                eta: model.eta,
                b0,
                delta_shift_mhz: model.delta_shift_mhz,
                gamma_prime_mhz: model.gamma_prime_mhz,
            };
            let mut header = vec!["detuning_mhz", "power_model"];
            if with_mc {
                header.push("mc_scattered_fraction");
            }
            w.write_record(&header)?;
            let n = ((s.detuning_max_mhz - s.detuning_min_mhz) / s.detuning_step_mhz).round() as usize;
            for i in 0..=n {
                let d = s.detuning_min_mhz + i as f64 * s.detuning_step_mhz;
                let mut rec = vec![format_g(d), format_g(spectral_model(d, &sp)?)];
                if with_mc {
                    let mut cfg = config.clone();
                    cfg.probe.detuning_mhz = d;
                    let hist = run_mc(&cfg, &Medium::Gaussian(cloud), None)?;
                    rec.push(format_g(hist.scattered as f64 / hist.launched as f64));
                }
                w.write_record(&rec)?;
            }
        }
        Axis::Intensity => {
            let s = &config.sweep;
            if s.intensity_points < 2 || !(s.intensity_max_mw_cm2 > 0.0) {
                bail!("empty intensity grid");
            }
            if with_mc {
                eprintln!("note: --mc is ignored on the intensity axis (transport is linear in intensity)");
            }
            w.write_record(["intensity_mw_cm2", "steady_state_level"])?;
            for i in 0..s.intensity_points {
                let x = s.intensity_max_mw_cm2 * i as f64 / (s.intensity_points - 1) as f64;
                let y = steady_state_level(x, model.saturation_scale, model.saturation_i_eff_mw_cm2)?;
                w.write_record([format_g(x), format_g(y)])?;
            }
        }
    }
    emit(out, &String::from_utf8(w.into_inner()?)?)?;
    emit_summary(
        out,
        &serde_json::json!({
            "command": "sweep",
            "axis": format!("{axis:?}").to_lowercase(),
            "mc": with_mc,
            "config": config,
        }),
    )
}

/// Reads a 2- or 3-column numeric CSV with a header row. A third column
/// is taken as per-point weight; otherwise 1/max(y,1) is used.
fn read_dataset(path: &Path) -> anyhow::Result<Vec<Point>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;
    let width = rdr.headers()?.len();
    if width != 2 && width != 3 {
        bail!("dataset {} has {width} columns, expected 2 (x,y) or 3 (x,y,weight)", path.display());
    }
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2; // header is line 1
        if rec.len() != width {
            bail!("dataset {} line {line}: {} fields, expected {width}", path.display(), rec.len());
        }
        let parse = |j: usize| -> anyhow::Result<f64> {
            rec[j].parse().with_context(|| {
                format!("dataset {} line {line}: {:?} is not a number", path.display(), &rec[j])
            })
        };
        let x = parse(0)?;
        let y = parse(1)?;
        let wgt = if width == 3 { parse(2)? } else { 1.0 / y.max(1.0) };
        data.push((x, y, wgt));
    }
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FitModel {
    Density,
    Spectral,
    SingleExp,
    DoubleExp,
    Saturation,
}

pub fn cmd_fit(
    config: &ExperimentConfig,
    model: FitModel,
    data_path: &Path,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let data = read_dataset(data_path)?;
    let fit = match model {
        FitModel::Density => fit_density_model(&data)?,
        FitModel::Spectral => {
            let b0 = if config.model.b0 > 0.0 {
                config.model.b0
            } else {
                let cloud = config.cloud.resolve()?;
                let params = config.transition.resolve()?;
                cloud.transverse_optical_depth(params.sigma0_cm2)?
            };
            fit_spectral_model(&data, b0, config.model.gamma_prime_mhz)?
        }
        FitModel::SingleExp => fit_single_exponential(&data)?,
        FitModel::DoubleExp => fit_double_exponential(&data, None)?,
        FitModel::Saturation => fit_saturation(&data)?,
    };
    let text = serde_json::to_string_pretty(&fit_json(&fit))?;
    emit(out, &(text + "\n"))?;
    emit_summary(
        out,
        &serde_json::json!({
            "command": "fit",
            "model": format!("{model:?}").to_lowercase(),
            "dataset": data_path.display().to_string(),
            "points": data.len(),
            "config": config,
        }),
    )
}

pub fn fit_json(fit: &FitResult) -> serde_json::Value {
    let params: Vec<serde_json::Value> = fit
        .names
        .iter()
        .zip(fit.values.iter().zip(&fit.sigmas))
        .map(|(name, (value, sigma))| {
            serde_json::json!({ "name": name, "value": value, "sigma": sigma })
        })
        .collect();
    serde_json::json!({
        "parameters": params,
        "rss": fit.rss,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "warnings": fit.warnings,
    })
}

/// Runs the MC ensemble with `workers` OS threads, one RNG substream
/// each, merged in stream order so the result is thread-schedule
/// independent.
fn run_mc(
    config: &ExperimentConfig,
    medium: &Medium,
    seed_override: Option<u64>,
) -> anyhow::Result<TimeHistogram> {
    let params = config.transition.resolve()?;
    let mut mc = config.mc.resolve(config.probe.resolve())?;
    if let Some(seed) = seed_override {
        mc.seed = seed;
    }
    let results: Vec<coldscatter_core::Result<TimeHistogram>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..mc.workers)
            .map(|worker| {
                let params = &params;
                let mc = &mc;
                scope.spawn(move || run_worker(medium, params, mc, worker))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("mc worker panicked")).collect()
    });
    let mut merged = TimeHistogram::new(mc.bin_width_ns, mc.t_max_ns);
    for r in results {
        merged.merge(&r?);
    }
    Ok(merged)
}

pub fn cmd_mc(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let mut config = config.clone();
    if let Some(seed) = seed_override {
        config.mc.seed = seed;
    }
    let cloud = config.cloud.resolve()?;
    let medium = Medium::Gaussian(cloud);
    let start = Instant::now();
    let hist = run_mc(&config, &medium, None)?;
    // wall-clock goes to stderr only: the summary must be byte-identical
    // across reruns with the same seed
    eprintln!("mc runtime: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t_ns", "counts"])?;
    for (i, &c) in hist.counts.iter().enumerate() {
        w.write_record([format_g((i as f64 + 0.5) * hist.bin_width_ns), format!("{c}")])?;
    }
    emit(out, &String::from_utf8(w.into_inner()?)?)?;

    // post-pulse tail fit; absence of a fit is reported, not fatal
    let pulse_ns = config.probe.pulse_length_us * 1e3;
    let window = (pulse_ns.min(hist.counts.len() as f64 * hist.bin_width_ns * 0.5), config.mc.t_max_ns);
    let decay = match extract_decay_time(&hist, window) {
        Ok(d) => serde_json::json!({
            "window_ns": [window.0, window.1],
            "single": fit_json(&d.single),
            "double": d.double.as_ref().map(fit_json),
            "double_error": d.double_error,
        }),
        Err(e) => serde_json::json!({ "error": e.to_string() }),
    };

    emit_summary(
        out,
        &serde_json::json!({
            "command": "mc",
            "seed": config.mc.seed,
            "config": config,
            "launched": hist.launched,
            "escaped": hist.escaped,
            "capped": hist.capped,
            "scattered": hist.scattered,
            "mean_order": hist.mean_order(),
            "underflow": hist.underflow,
            "overflow": hist.overflow,
            "tail_counts": hist.tail_counts,
            "cap_warning": hist.cap_warning(),
            "decay_fit": decay,
        }),
    )
}

pub fn cmd_pump(config: &ExperimentConfig, axis: Option<Axis>, out: Option<&Path>) -> anyhow::Result<()> {
    let cloud = config.cloud.resolve()?;
    let params = crate::config::TransitionSection {
        preset: "rb87-d2-f1-f2-repumper".into(),
        ..config.transition.clone()
    }
    .resolve()?;
    let pump = config.pump.resolve()?;

    match axis {
        None => {
            let h = simulate_pumping(&cloud, &params, &pump)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["t_ns", "counts"])?;
            for (&t, &s) in h.times_ns.iter().zip(&h.signal) {
                w.write_record([format_g(t), format_g(s)])?;
            }
            emit(out, &String::from_utf8(w.into_inner()?)?)?;
            let rate = extract_pump_rate(&h);
            emit_summary(
                out,
                &serde_json::json!({
                    "command": "pump",
                    "config": config,
                    "steps": h.times_ns.len(),
                    "atoms_pumped": h.atoms_pumped,
                    "f1_final_fraction": h.f1_fraction.last(),
                    "integrated_signal": integrated_signal(&h),
                    "rate_fit": match rate {
                        Ok(f) => fit_json(&f),
                        Err(e) => serde_json::json!({ "error": e.to_string() }),
                    },
                }),
            )
        }
        Some(Axis::Density) => {
            let times = if config.sweep.expansion_times_ms.is_empty() {
                reference_expansion_times_ms(&cloud, params.sigma0_cm2)?
            } else {
                config.sweep.expansion_times_ms.clone()
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "time_ms",
                "b_t",
                "rate_per_ns",
                "rate_err_per_ns",
                "integral_counts",
                "peak_counts",
            ])?;
            for &t in &times {
                let c = cloud.ballistic_expand(t)?;
                let bt = c.transverse_optical_depth(params.sigma0_cm2)?;
                let h = simulate_pumping(&c, &params, &pump)?;
                let fit = extract_pump_rate(&h)?;
                let tau = fit.value("tau").expect("single-exponential fit has tau");
                let tau_sigma = fit.sigma("tau").unwrap_or(f64::NAN);
                let peak = h.signal.iter().cloned().fold(f64::MIN, f64::max);
                w.write_record([
                    format_g(t),
                    format_g(bt),
                    format_g(1.0 / tau),
                    format_g(tau_sigma / (tau * tau)),
                    format_g(integrated_signal(&h)),
                    format_g(peak),
                ])?;
            }
            emit(out, &String::from_utf8(w.into_inner()?)?)?;
            emit_summary(
                out,
                &serde_json::json!({
                    "command": "pump",
                    "axis": "density",
                    "config": config,
                    "points": times.len(),
                }),
            )
        }
        Some(other) => bail!("pump sweep supports only --axis density, not {other:?}"),
    }
}
