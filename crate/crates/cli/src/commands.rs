use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use windcast::data::{clean, load_site_month, parse_lcd_file, write_clean_csv, write_provenance, PrepareOptions};
use windcast::experiment::{
    emit_plot_data, run_experiment, run_grid, train_model, write_grid_summary_csv, write_grid_table, write_summary,
    ExperimentReport, GridSpec, VARIANTS,
};
use windcast::network::{write_checkpoint, ModelConfig, StackedModel, Window};
use windcast::numerics::SeededRng;
use windcast::optim::grad_check;
use windcast::Execution;

use crate::config::{self, Overrides, RawConfig, Resolved};
use crate::CliError;

const GRAD_TOL: f64 = 1e-5;
const GRAD_EPS: f64 = 1e-5;

fn load(config: Option<&Path>, ov: &Overrides) -> Result<Resolved, CliError> {
    let (raw, base) = match config {
        Some(p) => {
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (config::read_raw(p)?, base)
        }
        None => (RawConfig::default(), PathBuf::from(".")),
    };
    config::resolve(raw, &base, ov)
}

fn execution(r: &Resolved) -> Result<Execution, CliError> {
    match r.threads {
        Some(1) => Ok(Execution::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            // Only the first call in a process can size the global pool.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Execution::default())
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Execution::Sequential),
        None => Ok(Execution::default()),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::data(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}

fn write_report(dir: &Path, report: &ExperimentReport) -> Result<(), CliError> {
    create_dir(dir)?;
    let mut summary = Vec::new();
    write_summary(report, &mut summary)?;
    write_file(&dir.join("summary.txt"), &summary)?;
    emit_plot_data(report, &dir.join("plot_data.csv"))?;
    Ok(())
}

fn echo_config(r: &Resolved) -> Result<(), CliError> {
    write_file(&r.out.join("resolved_config.json"), r.to_json().as_bytes())
}

pub fn ingest(config: Option<&Path>, ov: &Overrides, input: &Path) -> Result<(), CliError> {
    let r = load(config, ov)?;
    let (records, parse) = parse_lcd_file(input)?;
    if records.is_empty() {
        return Err(CliError::data(format!("{}: no hourly reports", input.display())));
    }
    let mut ds = clean(&records)?;
    ds.provenance.parse = parse;

    create_dir(&r.out)?;
    let stem = input.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
    let csv_path = r.out.join(format!("{stem}.clean.csv"));
    let file = fs::File::create(&csv_path).map_err(|e| CliError::data(format!("cannot write {}: {e}", csv_path.display())))?;
    write_clean_csv(&ds, BufWriter::new(file))?;
    let mut prov = Vec::new();
    write_provenance(&ds.provenance, &mut prov)?;
    write_file(&r.out.join(format!("{stem}.provenance.txt")), &prov)?;
    echo_config(&r)?;
    println!(
        "{}: {} hourly rows, {} cells imputed, {} duplicate hours dropped",
        csv_path.display(),
        ds.len(),
        ds.provenance.total_imputed(),
        ds.provenance.duplicate_hours_dropped
    );
    Ok(())
}

pub fn train(config: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let r = load(config, ov)?;
    let n = r.data.datasets.len();
    if r.sine.is_some() == (n == 1) {
        return Err(CliError::validation(format!(
            "train needs either a sine section or exactly one entry in data.datasets (found {} dataset(s){})",
            n,
            if r.sine.is_some() { " and a sine section" } else { "" }
        )));
    }
    let started = Instant::now();
    let (model, report) = match r.sine_spec() {
        Some(sine) => {
            let windows = sine.make_windows()?;
            let mut spec = r.train_spec("synthetic-sine", "-");
            spec.model.input_width = 1;
            // Memorization benchmark: the evaluation windows are the training windows.
            train_model(&spec, &windows, &windows)?
        }
        None => {
            r.check_files()?;
            let d = &r.data.datasets[0];
            let opts = PrepareOptions {
                split_ratio: r.training.split_ratio,
                lookback: r.model.lookback,
                cyclic_direction: r.data.cyclic_wind_direction,
            };
            let data = load_site_month(&d.path, &opts)?;
            run_experiment(&r.train_spec(&d.site, &d.month), &data)?
        }
    };
    let elapsed = started.elapsed();

    write_report(&r.out, &report)?;
    let mut ckpt = Vec::new();
    write_checkpoint(&model, &mut ckpt)?;
    write_file(&r.out.join("model.ckpt"), &ckpt)?;
    echo_config(&r)?;
    println!(
        "{} {}: train_rmse={} test_rmse={}",
        report.model_label(),
        report.site,
        report.train_rmse,
        report.test_rmse
    );
    eprintln!("trained in {:.1}s", elapsed.as_secs_f64());
    Ok(())
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

pub fn grid(config: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let r = load(config, ov)?;
    if r.data.datasets.is_empty() || r.sine.is_some() {
        return Err(CliError::validation(
            "grid needs at least one entry in data.datasets and no sine section",
        ));
    }
    r.check_files()?;
    let exec = execution(&r)?;
    let mut spec = GridSpec::new(r.dataset_specs(), r.train_spec("", ""));
    spec.split_ratio = r.training.split_ratio;
    spec.cyclic_direction = r.data.cyclic_wind_direction;
    spec.variants = r.variants();

    let started = Instant::now();
    let result = run_grid(&spec, exec)?;
    let elapsed = started.elapsed();

    create_dir(&r.out)?;
    let per_dataset = spec.variants.len();
    for (i, report) in result.reports.iter().enumerate() {
        let name = format!(
            "{:02}-{}-{}-{}",
            i / per_dataset + 1,
            slug(&report.site),
            slug(&report.month),
            report.config.variant_name()
        );
        write_report(&r.out.join("cells").join(name), report)?;
    }
    let mut csv = Vec::new();
    write_grid_summary_csv(&result.reports, &mut csv)?;
    write_file(&r.out.join("summary.csv"), &csv)?;
    let mut table = Vec::new();
    write_grid_table(&result.reports, &mut table)?;
    write_file(&r.out.join("summary.txt"), &table)?;
    echo_config(&r)?;
    print!("{}", String::from_utf8_lossy(&table));
    eprintln!("{} cells in {:.1}s", result.reports.len(), elapsed.as_secs_f64());
    Ok(())
}

fn random_window(rng: &mut SeededRng, lookback: usize, width: usize) -> Result<Window, CliError> {
    Ok(Window {
        x: rng.uniform(lookback, width, 0.0, 1.0)?,
        y: rng.uniform_scalar(0.0, 1.0),
        target_row: 0,
    })
}

/// Prints one line per variant; fails unless every error is below the tolerance.
pub fn gradcheck(config: Option<&Path>, ov: &Overrides) -> Result<(), CliError> {
    let r = load(config, ov)?;
    execution(&r)?;
    let mut failed = Vec::new();
    for (cell, mode) in VARIANTS {
        let cfg = ModelConfig {
            cell,
            mode,
            layers: 2,
            hidden_width: 4,
            lookback: 5,
            seed: r.seed,
            ..ModelConfig::default()
        };
        let mut model = StackedModel::build(cfg.clone())?;
        let mut rng = SeededRng::new(r.seed);
        // Stateful variants are checked from a carried, non-zero state.
        model.predict(&random_window(&mut rng, cfg.lookback, cfg.input_width)?)?;
        let w = random_window(&mut rng, cfg.lookback, cfg.input_width)?;
        let err = grad_check(&model, &w, GRAD_EPS)?;
        let ok = err < GRAD_TOL;
        if !ok {
            failed.push(cfg.variant_name());
        }
        println!(
            "{:<15} max_relative_error={err:.3e} {}",
            cfg.variant_name(),
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "gradient check above {GRAD_TOL:e} for: {}",
            failed.join(", ")
        )))
    }
}
