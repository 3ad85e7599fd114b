//! CSV artifacts and the run manifest.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so the
//! files parse back to the exact values and repeated runs give identical bytes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::engine::{series_index, Comparison, EnsembleSummary, RunMetrics, SimulationTrace, AGGREGATE_SERIES};
use crate::error::{Error, Result};

pub const BANK_FILE: &str = "banks.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const COMPARE_SUMMARY_FILE: &str = "compare_summary.csv";

/// Balance-sheet items plus profit, as stored per bank.
pub const BANK_ITEMS: [&str; 11] = ["A1", "A2", "A3", "A4", "A5", "L1", "L2", "L3", "L4", "L5", "profit"];

/// Variables summarised in the histogram file.
pub const HISTOGRAM_VARIABLES: [&str; 6] = ["A2", "A3", "L3", "L5", "L4", "profit"];

pub const HISTOGRAM_BINS: usize = 10;

/// Columns backing one figure: per-bank items, aggregate series, histogram variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FigureColumns {
    pub bank: &'static [&'static str],
    pub aggregate: &'static [&'static str],
    pub histogram: &'static [&'static str],
}

pub fn figure_columns(figure: u8) -> Result<FigureColumns> {
    let cols = match figure {
        1..=3 => FigureColumns {
            bank: &["L1", "L2", "L3"],
            aggregate: &["L1", "L2", "L3", "money"],
            histogram: &[],
        },
        4 => FigureColumns {
            bank: &["A2"],
            aggregate: &["A2", "new_customer_loans", "customer_repaid"],
            histogram: &["A2"],
        },
        5 => FigureColumns {
            bank: &["A3"],
            aggregate: &["A3", "new_interbank", "interbank_repaid"],
            histogram: &["A3"],
        },
        6 => FigureColumns {
            bank: &["L3"],
            aggregate: &["L3", "new_interbank", "interbank_repaid"],
            histogram: &["L3"],
        },
        7 => FigureColumns {
            bank: &["L5"],
            aggregate: &["L5", "guarantees"],
            histogram: &["L5"],
        },
        8 => FigureColumns {
            bank: &["L4", "profit"],
            aggregate: &["L4", "profit"],
            histogram: &["L4", "profit"],
        },
        _ => {
            return Err(Error::InvalidConfig {
                key: "figure".into(),
                reason: format!("no figure {figure}; expected 1 to 8"),
            })
        }
    };
    Ok(cols)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        // `+ 0.0` folds negative zero (the sum of an empty series) into 0.
        format!("{}", x + 0.0)
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

fn bank_value(item: &str, sheet: &crate::ledger::BankBalanceSheet, profit: f64) -> f64 {
    match BANK_ITEMS.iter().position(|s| *s == item) {
        Some(10) => profit,
        Some(k) => sheet.items()[k],
        None => unreachable!("unknown bank item {item}"),
    }
}

/// One row per (period, bank): `period,bank,<items>`.
pub fn write_bank_csv<W: Write>(trace: &SimulationTrace, w: W, figure: Option<u8>) -> Result<()> {
    let items: Vec<&str> = match figure {
        Some(f) => figure_columns(f)?.bank.to_vec(),
        None => BANK_ITEMS.to_vec(),
    };
    let mut out = csv_writer(w);
    let header: Vec<&str> = ["period", "bank"].into_iter().chain(items.iter().copied()).collect();
    out.write_record(&header).map_err(csv_err)?;
    for p in &trace.periods {
        for (i, sheet) in p.banks.iter().enumerate() {
            let mut row = vec![p.period.to_string(), i.to_string()];
            row.extend(items.iter().map(|it| num(bank_value(it, sheet, p.profit[i]))));
            out.write_record(&row).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per period: `period,<series>`.
pub fn write_aggregate_csv<W: Write>(trace: &SimulationTrace, w: W, figure: Option<u8>) -> Result<()> {
    let series: Vec<&str> = match figure {
        Some(f) => figure_columns(f)?.aggregate.to_vec(),
        None => AGGREGATE_SERIES.to_vec(),
    };
    let idx: Vec<usize> = series.iter().map(|s| series_index(s).expect("known series")).collect();
    let mut out = csv_writer(w);
    let header: Vec<&str> = std::iter::once("period").chain(series.iter().copied()).collect();
    out.write_record(&header).map_err(csv_err)?;
    for p in &trace.periods {
        let values = p.aggregates();
        let mut row = vec![p.period.to_string()];
        row.extend(idx.iter().map(|&k| num(values[k])));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Equal-width histogram with `bins` bins over `[min, max]` of `values`:
/// `(lower, upper, count)` per bin. The top bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let k = if width > 0.0 {
            (((v - lo) / width) as usize).min(bins - 1)
        } else {
            0
        };
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let lower = lo + width * k as f64;
            let upper = if k + 1 == bins { hi } else { lo + width * (k + 1) as f64 };
            (lower, upper, c)
        })
        .collect()
}

/// Distribution of per-bank values over all periods:
/// `variable,bin,bin_lower,bin_upper,count`.
pub fn write_histogram_csv<W: Write>(trace: &SimulationTrace, w: W, figure: Option<u8>) -> Result<()> {
    let variables: Vec<&str> = match figure {
        Some(f) => figure_columns(f)?.histogram.to_vec(),
        None => HISTOGRAM_VARIABLES.to_vec(),
    };
    let mut out = csv_writer(w);
    out.write_record(["variable", "bin", "bin_lower", "bin_upper", "count"])
        .map_err(csv_err)?;
    for var in variables {
        let values: Vec<f64> = trace
            .periods
            .iter()
            .flat_map(|p| {
                p.banks
                    .iter()
                    .zip(&p.profit)
                    .map(move |(s, &pi)| bank_value(var, s, pi))
            })
            .collect();
        for (k, (lower, upper, count)) in histogram(&values, HISTOGRAM_BINS).into_iter().enumerate() {
            out.write_record([
                var.to_string(),
                k.to_string(),
                num(lower),
                num(upper),
                count.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Plain-text manifest: version, seed, config hash and file list as comment
/// lines, then the configuration. The whole file is a loadable config.
pub fn manifest(trace: &SimulationTrace, files: &[&str]) -> String {
    format!(
        "# banksim {}\n# seed = {}\n# config_hash = {}\n# periods = {}\n# files = {}\n\n{}",
        env!("CARGO_PKG_VERSION"),
        trace.config.seed,
        trace.config_hash,
        trace.periods.len(),
        files.join(", "),
        trace.config.to_toml()
    )
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
    let path = dir.join(name);
    let file = fs::File::create(&path)?;
    Ok((path, std::io::BufWriter::new(file)))
}

/// Writes the three CSVs and the manifest into `out_dir`.
pub fn emit_artifacts(trace: &SimulationTrace, out_dir: &Path, figure: Option<u8>) -> Result<Vec<PathBuf>> {
    if let Some(f) = figure {
        figure_columns(f)?;
    }
    fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    let (p, w) = create(out_dir, BANK_FILE)?;
    write_bank_csv(trace, w, figure)?;
    paths.push(p);
    let (p, w) = create(out_dir, AGGREGATE_FILE)?;
    write_aggregate_csv(trace, w, figure)?;
    paths.push(p);
    let (p, w) = create(out_dir, HISTOGRAM_FILE)?;
    write_histogram_csv(trace, w, figure)?;
    paths.push(p);
    let path = out_dir.join(MANIFEST_FILE);
    fs::write(&path, manifest(trace, &[BANK_FILE, AGGREGATE_FILE, HISTOGRAM_FILE]))?;
    paths.push(path);
    Ok(paths)
}

fn write_metrics<W: Write>(metrics: &[RunMetrics], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(RunMetrics::COLUMNS).map_err(csv_err)?;
    for m in metrics {
        let v = m.values();
        let mut row = vec![m.seed.to_string()];
        row.extend(v[1..].iter().map(|&x| num(x)));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// `ensemble.csv` (`period,series,mean,q05,q50,q95`) and `metrics.csv`.
pub fn write_ensemble(summary: &EnsembleSummary, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let (ens_path, w) = create(out_dir, ENSEMBLE_FILE)?;
    let mut out = csv_writer(w);
    out.write_record(["period", "series", "mean", "q05", "q50", "q95"])
        .map_err(csv_err)?;
    for t in 0..summary.mean.len() {
        for (k, name) in AGGREGATE_SERIES.iter().enumerate() {
            out.write_record([
                (t + 1).to_string(),
                name.to_string(),
                num(summary.mean[t][k]),
                num(summary.q05[t][k]),
                num(summary.q50[t][k]),
                num(summary.q95[t][k]),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush()?;
    let (metrics_path, w) = create(out_dir, METRICS_FILE)?;
    write_metrics(&summary.metrics, w)?;
    Ok(vec![ens_path, metrics_path])
}

/// Metrics compared across φ: column name, accessor.
pub type MetricAccessor = (&'static str, fn(&RunMetrics) -> f64);

pub const COMPARED_METRICS: [MetricAccessor; 6] = [
    ("cumulative_customer_lending", |m| m.cumulative_customer_lending),
    ("cumulative_interbank_lending", |m| m.cumulative_interbank_lending),
    ("cumulative_interbank_borrowing", |m| m.cumulative_interbank_borrowing),
    ("cumulative_guarantees", |m| m.cumulative_guarantees),
    ("terminal_equity", |m| m.terminal_equity),
    ("mean_profit", |m| m.mean_profit),
];

/// `compare.csv` (one metrics row per φ and seed) and `compare_summary.csv`
/// (means per φ).
pub fn write_comparison(cmp: &Comparison, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let (all_path, w) = create(out_dir, COMPARE_FILE)?;
    let flat: Vec<RunMetrics> = cmp.metrics.iter().flatten().copied().collect();
    write_metrics(&flat, w)?;

    let (summary_path, w) = create(out_dir, COMPARE_SUMMARY_FILE)?;
    let mut out = csv_writer(w);
    let header: Vec<&str> = std::iter::once("phi")
        .chain(COMPARED_METRICS.iter().map(|m| m.0))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    let means: Vec<Vec<f64>> = COMPARED_METRICS.iter().map(|(_, f)| cmp.means(f)).collect();
    for (i, phi) in cmp.phis.iter().enumerate() {
        let mut row = vec![num(*phi)];
        row.extend(means.iter().map(|m| num(m[i])));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(vec![all_path, summary_path])
}

/// Human-readable table of means per φ, with the number of seeds on which
/// each φ beats the next one.
pub fn comparison_table(cmp: &Comparison) -> String {
    let mut s = format!("{:<32}", "metric");
    for phi in &cmp.phis {
        s += &format!("{:>18}", format!("phi={phi}"));
    }
    s += "  seeds ordered (phi_i > phi_i+1)\n";
    for (name, f) in COMPARED_METRICS {
        s += &format!("{name:<32}");
        for m in cmp.means(f) {
            s += &format!("{m:>18.6e}");
        }
        let wins: Vec<String> = (1..cmp.phis.len())
            .map(|i| format!("{}/{}", cmp.wins(f, i - 1, i), cmp.seeds.len()))
            .collect();
        s += &format!("  {}\n", wins.join(" "));
    }
    s
}
