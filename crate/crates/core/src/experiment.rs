//! Hidden-layer sweeps laid out like a results table.

use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;

use crate::dataset::{Dataset, CODE_BITS};
use crate::error::{Error, Result};
use crate::mlp::Mlp;
use crate::train::{self, TrainConfig};

/// Published (train %, test %) accuracies per hidden count, shown for comparison only.
pub const REFERENCE: [(usize, f64, f64); 3] = [(12, 100.0, 80.0), (24, 100.0, 85.0), (36, 100.0, 80.0)];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub hidden_counts: Vec<usize>,
    pub cfg: TrainConfig,
    /// 900 for the full 30×30 glyph, 100 for the pooled one.
    pub input_size: usize,
    /// Each seed drives both weight initialization and presentation order.
    pub seeds: Vec<u64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            hidden_counts: vec![12, 24, 36],
            cfg: TrainConfig::default(),
            input_size: 900,
            seeds: (0..5).collect(),
        }
    }
}

/// One trained network.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub hidden: usize,
    pub seed: u64,
    pub epochs_run: usize,
    pub wall_time: Duration,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Per-hidden-count means over seeds. Accuracies are percentages.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub hidden: usize,
    pub epochs_run: f64,
    pub wall_time: f64,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub cells: Vec<Cell>,
}

pub fn run_cell(hidden: usize, seed: u64, spec: &SweepSpec, train_set: &Dataset, test_set: &Dataset) -> Result<Cell> {
    let annotate = |e: Error| match e {
        Error::Diverged(m) => Error::Diverged(format!("hidden {hidden}, seed {seed}: {m}")),
        Error::InvalidInput(m) => Error::InvalidInput(format!("hidden {hidden}, seed {seed}: {m}")),
        other => other,
    };
    let net = Mlp::init(spec.input_size, hidden, CODE_BITS, seed).map_err(annotate)?;
    let cfg = TrainConfig { seed, ..spec.cfg.clone() };
    let (net, report) = train::train(net, train_set, &cfg).map_err(annotate)?;
    let test_accuracy = train::evaluate(&net, test_set).map_err(annotate)?;
    Ok(Cell {
        hidden,
        seed,
        epochs_run: report.epochs_run,
        wall_time: report.wall_time,
        train_accuracy: report.final_train_accuracy * 100.0,
        test_accuracy: test_accuracy * 100.0,
    })
}

/// Train every hidden count × seed combination and average over seeds.
///
/// Cells run in parallel; each cell trains sequentially so results do not
/// depend on scheduling.
pub fn run_sweep(spec: &SweepSpec, train_set: &Dataset, test_set: &Dataset) -> Result<Vec<SweepRow>> {
    if spec.hidden_counts.is_empty() || spec.seeds.is_empty() {
        return Err(Error::invalid("sweep needs at least one hidden count and one seed"));
    }
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::invalid("sweep needs non-empty train and test sets"));
    }
    if spec.input_size != 900 && spec.input_size != 100 {
        return Err(Error::invalid(format!("input size {} is neither 900 nor 100", spec.input_size)));
    }
    let jobs: Vec<(usize, u64)> = spec
        .hidden_counts
        .iter()
        .flat_map(|&h| spec.seeds.iter().map(move |&s| (h, s)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(h, s)| run_cell(h, s, spec, train_set, test_set))
        .collect::<Result<Vec<Cell>>>()?;

    Ok(spec
        .hidden_counts
        .iter()
        .map(|&hidden| {
            let cells: Vec<Cell> = cells.iter().filter(|c| c.hidden == hidden).cloned().collect();
            let n = cells.len() as f64;
            let mean = |f: fn(&Cell) -> f64| cells.iter().map(f).sum::<f64>() / n;
            SweepRow {
                hidden,
                epochs_run: mean(|c| c.epochs_run as f64),
                wall_time: mean(|c| c.wall_time.as_secs_f64()),
                train_accuracy: mean(|c| c.train_accuracy),
                test_accuracy: mean(|c| c.test_accuracy),
                cells,
            }
        })
        .collect())
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("hidden,epochs,seconds,train_acc,test_acc\n");
    for r in rows {
        writeln!(
            out,
            "{},{:.1},{:.3},{:.2},{:.2}",
            r.hidden, r.epochs_run, r.wall_time, r.train_accuracy, r.test_accuracy
        )
        .unwrap();
    }
    out
}

/// Aligned text table with the published figures alongside where they exist.
pub fn render_table(rows: &[SweepRow], input_size: usize) -> String {
    let input = if input_size == 100 { "10x10" } else { "30x30" };
    let mut out = String::new();
    writeln!(
        out,
        "{:<7} {:>6} {:>7} {:>9} {:>10} {:>9} {:>12}",
        "input", "hidden", "epochs", "time (s)", "train (%)", "test (%)", "ref train/test"
    )
    .unwrap();
    for r in rows {
        let reference = REFERENCE
            .iter()
            .find(|(h, _, _)| *h == r.hidden)
            .map(|(_, tr, te)| format!("{tr:.0}/{te:.0}"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<7} {:>6} {:>7.1} {:>9.2} {:>10.2} {:>9.2} {:>12}",
            input, r.hidden, r.epochs_run, r.wall_time, r.train_accuracy, r.test_accuracy, reference
        )
        .unwrap();
    }
    out
}
