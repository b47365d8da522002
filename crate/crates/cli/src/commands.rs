use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use shqmm_core::datagen::{read_dataset, split_dataset, write_dataset, ObservationDataset, SplitDataset, SplitTag};
use shqmm_core::learning::{baum_welch_train, stiefel_distance, train, train_hqmm};
use shqmm_core::metrics::{da_report, mean_std, DaReport};

use crate::checkpoint::{AnyModel, Checkpoint, FinalMetrics};
use crate::config::{ExperimentConfig, Family};
use crate::error::{CliError, Result};

pub const METRICS_HEADER: &str = "epoch,mean_loss,val_da,elapsed_s,tau";
pub const COMPARE_HEADER: &str = "model,family,n_params,runs,test_da_mean,test_da_std,test_da_median,seq_da_std";

const SPLIT_FILES: [(&str, SplitTag); 3] = [
    ("train.txt", SplitTag::Train),
    ("val.txt", SplitTag::Val),
    ("test.txt", SplitTag::Test),
];

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

/// Writes `dataset.txt` plus one file per non-empty split.
pub fn generate(cfg: &ExperimentConfig, out: &Path) -> Result<String> {
    let ds = cfg.data.generator()?.generate()?;
    ensure_dir(out)?;
    write_dataset(&ds, out.join("dataset.txt"))?;
    let split = split_dataset(&ds, cfg.data.proportions(ds.len())?, cfg.data.seed)?;
    for (name, part) in [("train.txt", &split.train), ("val.txt", &split.val), ("test.txt", &split.test)] {
        if !part.is_empty() {
            write_dataset(part, out.join(name))?;
        }
    }
    Ok(format!(
        "generated {} sequences of length {} over dimO={} ({} / {} / {}) into {}",
        ds.len(),
        cfg.data.length,
        ds.dim_o,
        split.train.len(),
        split.val.len(),
        split.test.len(),
        out.display()
    ))
}

/// Training, validation and test data. A directory supplies `train.txt`,
/// `val.txt` and `test.txt` (the latter two optional); a file is split per
/// the config; with no path the configured generator is run.
pub fn load_splits(cfg: &ExperimentConfig, dataset: Option<&Path>) -> Result<SplitDataset> {
    let split = match dataset {
        Some(dir) if dir.is_dir() => {
            let mut parts = Vec::new();
            let mut dim_o = None;
            for (name, _) in SPLIT_FILES {
                let path = dir.join(name);
                if path.exists() {
                    let ds = read_dataset(&path)?;
                    dim_o.get_or_insert(ds.dim_o);
                    parts.push(Some(ds));
                } else {
                    parts.push(None);
                }
            }
            let dim_o = dim_o.ok_or_else(|| CliError::Config(format!("{}: no split files found", dir.display())))?;
            let mut parts = parts
                .into_iter()
                .map(|p| p.unwrap_or(ObservationDataset { dim_o, sequences: vec![] }));
            let (train, val, test) = (parts.next().unwrap(), parts.next().unwrap(), parts.next().unwrap());
            let tags = SPLIT_FILES
                .iter()
                .zip([train.len(), val.len(), test.len()])
                .flat_map(|((_, tag), n)| std::iter::repeat_n(*tag, n))
                .collect();
            SplitDataset { train, val, test, tags }
        }
        Some(file) => {
            let ds = read_dataset(file)?;
            split_dataset(&ds, cfg.data.proportions(ds.len())?, cfg.data.seed)?
        }
        None => {
            let ds = cfg.data.generator()?.generate()?;
            split_dataset(&ds, cfg.data.proportions(ds.len())?, cfg.data.seed)?
        }
    };
    for part in [&split.train, &split.val, &split.test] {
        if part.dim_o != cfg.model.dim_o {
            return Err(CliError::Config(format!(
                "dataset has dimO={}, model expects {}",
                part.dim_o, cfg.model.dim_o
            )));
        }
    }
    if split.train.is_empty() {
        return Err(CliError::Config("no training sequences".into()));
    }
    Ok(split)
}

/// One row of the metrics table; empty cells where a quantity does not apply.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub epoch: usize,
    pub mean_loss: f64,
    pub val_da: Option<f64>,
    pub elapsed: Option<f64>,
    pub tau: Option<f64>,
}

fn cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.epoch,
            r.mean_loss,
            cell(r.val_da),
            cell(r.elapsed),
            cell(r.tau)
        );
    }
    out
}

pub struct Fitted {
    pub model: AnyModel,
    pub rows: Vec<MetricsRow>,
    pub metrics: FinalMetrics,
}

/// Trains the configured family on `split.train`, validating on `split.val`.
pub fn fit(cfg: &ExperimentConfig, split: &SplitDataset) -> Result<Fitted> {
    let train_seqs = &split.train.sequences;
    let val_seqs = &split.val.sequences;
    let (model, rows) = match cfg.model.family {
        Family::Hmm => {
            let t0 = Instant::now();
            let fit = baum_welch_train(
                train_seqs,
                cfg.model.states,
                cfg.model.dim_o,
                cfg.train.em_iters,
                cfg.train.seed,
            )?;
            let elapsed = t0.elapsed().as_secs_f64();
            let val_da = match val_seqs.is_empty() {
                true => None,
                false => Some(da_report(&fit.model, val_seqs)?.mean),
            };
            let n = train_seqs.len() as f64;
            let iters = fit.loglik_history.len() - 1;
            let rows: Vec<MetricsRow> = fit.loglik_history[1..]
                .iter()
                .enumerate()
                .map(|(i, ll)| MetricsRow {
                    epoch: i + 1,
                    mean_loss: -ll / n,
                    val_da: if i + 1 == iters { val_da } else { None },
                    elapsed: if i + 1 == iters { Some(elapsed) } else { None },
                    tau: None,
                })
                .collect();
            (AnyModel::Hmm(fit.model), rows)
        }
        Family::Hqmm | Family::Shqmm => {
            let tc = cfg.train_config()?;
            let (model, hist) = match cfg.model.family {
                Family::Hqmm => {
                    let (m, h) = train_hqmm(&tc, cfg.model.w, train_seqs, val_seqs)?;
                    (AnyModel::Hqmm(m), h)
                }
                _ => {
                    let (m, h) = train(&tc, train_seqs, val_seqs)?;
                    (AnyModel::Shqmm(m), h)
                }
            };
            let rows = hist
                .epochs
                .iter()
                .map(|e| MetricsRow {
                    epoch: e.epoch,
                    mean_loss: e.mean_loss,
                    val_da: e.val_da,
                    elapsed: Some(e.elapsed),
                    tau: Some(e.tau),
                })
                .collect();
            (model, rows)
        }
    };
    let metrics = FinalMetrics {
        final_mean_loss: rows.last().map(|r| r.mean_loss),
        final_val_da: rows.last().and_then(|r| r.val_da),
        epochs: rows.len(),
    };
    Ok(Fitted { model, rows, metrics })
}

/// Writes `checkpoint.json` and `metrics.csv`.
pub fn train_cmd(cfg: &ExperimentConfig, dataset: Option<&Path>, out: &Path) -> Result<String> {
    let split = load_splits(cfg, dataset)?;
    let fitted = fit(cfg, &split)?;
    ensure_dir(out)?;
    Checkpoint::new(&fitted.model, &cfg.model, &cfg.train, fitted.metrics.clone()).save(&out.join("checkpoint.json"))?;
    write_text(&out.join("metrics.csv"), &metrics_csv(&fitted.rows))?;
    let da = fitted
        .metrics
        .final_val_da
        .map_or_else(|| "n/a".to_string(), |d| format!("{d:.6}"));
    Ok(format!(
        "trained {} ({} parameters) for {} epochs; final validation DA {da}; wrote {}",
        cfg.model.family,
        fitted.model.param_count(),
        fitted.metrics.epochs,
        out.display()
    ))
}

fn evaluation_set(dataset: &Path) -> Result<ObservationDataset> {
    let path = if dataset.is_dir() {
        dataset.join("test.txt")
    } else {
        dataset.to_path_buf()
    };
    Ok(read_dataset(path)?)
}

pub fn evaluate_model(model: &AnyModel, ds: &ObservationDataset) -> Result<DaReport> {
    let seq_model = model.as_sequence_model();
    if ds.dim_o != seq_model.dim_o() {
        return Err(CliError::Config(format!(
            "dataset has dimO={}, model expects {}",
            ds.dim_o,
            seq_model.dim_o()
        )));
    }
    Ok(da_report(seq_model, &ds.sequences)?)
}

/// Writes per-sequence `report.csv` and `summary.csv`.
pub fn evaluate_cmd(checkpoint: &Path, dataset: &Path, out: &Path) -> Result<String> {
    let model = Checkpoint::load(checkpoint)?.model()?;
    let ds = evaluation_set(dataset)?;
    let report = evaluate_model(&model, &ds)?;
    ensure_dir(out)?;
    let mut rows = String::from("sequence,length,da\n");
    for (i, (da, len)) in report.per_sequence.iter().zip(&report.lengths).enumerate() {
        let _ = writeln!(rows, "{i},{len},{da}");
    }
    write_text(&out.join("report.csv"), &rows)?;
    let summary = format!(
        "metric,value\nsequences,{}\niota,{}\nmean,{}\nstd,{}\n",
        report.per_sequence.len(),
        report.iota,
        report.mean,
        report.std
    );
    write_text(&out.join("summary.csv"), &summary)?;
    Ok(format!(
        "DA over {} sequences: mean {:.6}, std {:.6}",
        report.per_sequence.len(),
        report.mean,
        report.std
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub name: String,
    pub family: Family,
    pub n_params: usize,
    pub runs: usize,
    pub da_mean: f64,
    pub da_std: f64,
    pub da_median: f64,
    pub seq_std: f64,
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Trains each `.toml` config `repeats` times (seeds `seed, seed+1, …`) or
/// loads each `.json` checkpoint, then scores all on the shared test split.
/// Statistics are over runs; `seq_da_std` is the mean per-sequence STD.
pub fn compare(
    entries: &[PathBuf],
    dataset: Option<&Path>,
    repeats: usize,
    seed: Option<u64>,
) -> Result<Vec<CompareRow>> {
    if entries.is_empty() {
        return Err(CliError::Config("compare needs at least one config or checkpoint".into()));
    }
    if repeats == 0 {
        return Err(CliError::Config("repeats must be at least 1".into()));
    }
    enum Entry {
        Config(ExperimentConfig),
        Checkpoint(AnyModel),
    }
    let mut loaded = Vec::new();
    for path in entries {
        let is_ckpt = path.extension().is_some_and(|e| e == "json");
        let entry = if is_ckpt {
            Entry::Checkpoint(Checkpoint::load(path)?.model()?)
        } else {
            let mut cfg = ExperimentConfig::load(path)?;
            if let Some(s) = seed {
                cfg.train.seed = s;
            }
            Entry::Config(cfg)
        };
        loaded.push((path, entry));
    }

    let base = loaded
        .iter()
        .find_map(|(_, e)| match e {
            Entry::Config(c) => Some(c.clone()),
            Entry::Checkpoint(_) => None,
        })
        .unwrap_or_default();
    if dataset.is_none() && loaded.iter().all(|(_, e)| matches!(e, Entry::Checkpoint(_))) {
        return Err(CliError::Config("comparing checkpoints requires --dataset".into()));
    }

    let mut rows = Vec::new();
    for (path, entry) in &loaded {
        // checkpoints share a file name, so they are labelled by full path
        let label = path.with_extension("").display().to_string();
        let (name, family, n_params, runs) = match entry {
            Entry::Checkpoint(model) => {
                let mut shared = base.clone();
                shared.model.dim_o = model.as_sequence_model().dim_o();
                let split = load_splits(&shared, dataset)?;
                let report = evaluate_model(model, &test_split(&split)?)?;
                (label, model.family(), model.param_count(), vec![report])
            }
            Entry::Config(cfg) => {
                let mut shared = base.clone();
                shared.model = cfg.model.clone();
                let split = load_splits(&shared, dataset)?;
                let test = test_split(&split)?;
                let mut reports = Vec::with_capacity(repeats);
                for r in 0..repeats {
                    let mut run_cfg = cfg.clone();
                    run_cfg.train.seed = cfg.train.seed.wrapping_add(r as u64);
                    let fitted = fit(&run_cfg, &split)?;
                    reports.push(evaluate_model(&fitted.model, &test)?);
                }
                (cfg.label(path), cfg.model.family, cfg.param_count(), reports)
            }
        };
        let means: Vec<f64> = runs.iter().map(|r| r.mean).collect();
        let (da_mean, da_std) = mean_std(&means);
        let seq_std = runs.iter().map(|r| r.std).sum::<f64>() / runs.len() as f64;
        rows.push(CompareRow {
            name,
            family,
            n_params,
            runs: runs.len(),
            da_mean,
            da_std,
            da_median: median(&means),
            seq_std,
        });
    }
    Ok(rows)
}

fn test_split(split: &SplitDataset) -> Result<ObservationDataset> {
    if split.test.is_empty() {
        return Err(CliError::Config("no test sequences to compare on".into()));
    }
    Ok(split.test.clone())
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let mut out = format!("{COMPARE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.name, r.family, r.n_params, r.runs, r.da_mean, r.da_std, r.da_median, r.seq_std
        );
    }
    out
}

pub fn compare_table(rows: &[CompareRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(5).max(5);
    let mut out = format!(
        "{:<width$}  {:<6} {:>8} {:>4} {:>10} {:>10} {:>10}\n",
        "model", "family", "N_P", "runs", "DA mean", "DA std", "DA median"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:<6} {:>8} {:>4} {:>10.6} {:>10.6} {:>10.6}",
            r.name, r.family, r.n_params, r.runs, r.da_mean, r.da_std, r.da_median
        );
    }
    out
}

pub fn compare_cmd(
    entries: &[PathBuf],
    dataset: Option<&Path>,
    repeats: usize,
    seed: Option<u64>,
    out: &Path,
) -> Result<String> {
    let rows = compare(entries, dataset, repeats, seed)?;
    ensure_dir(out)?;
    write_text(&out.join("compare.csv"), &compare_csv(&rows))?;
    Ok(compare_table(&rows))
}

pub fn distance(a: &Path, b: &Path) -> Result<f64> {
    let point = |p: &Path| -> Result<_> {
        Checkpoint::load(p)?
            .model()?
            .kappa()
            .ok_or_else(|| CliError::Config(format!("{}: classical checkpoints have no Kraus point", p.display())))
    };
    Ok(stiefel_distance(&point(a)?, &point(b)?)?)
}
