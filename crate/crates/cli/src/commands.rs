//! One function per subcommand: validated config in, report and files out.

use std::collections::BTreeSet;
use std::path::Path;

use momentchain::exact::build_truncated;
use momentchain::heat::temperature_profile;
use momentchain::stats::uniform_edges;
use momentchain::{
    check_feasibility, check_feasibility_global, check_recurrences, embed_points, histogram, price_paths, simulate,
    simulate_schedule, wasserstein1, CoefficientSchedule, EmpiricalDistribution64, FeasibilityReport, GbmParams64,
    HeatParams64, IndexRange, NormalLaw64, Record, SimulationOptions, TrajectoryBatch64, TransitionKernel64,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    FeasibilityConfig, GbmConfig, HeatConfig, PropagateConfig, SimulateConfig, SnapshotFormat, WassersteinConfig,
};
use crate::error::CliError;
use crate::output::{opt_real, real, Outputs, Table};

/// What a subcommand produced: a report for standard output and files to emit.
#[derive(Default)]
pub struct Run {
    pub report: Option<Value>,
    pub outputs: Outputs,
}

fn report_json(report: &FeasibilityReport) -> Value {
    json!({
        "feasible": report.feasible(),
        "range": [report.range.lo, report.range.hi],
        "first_violation": report.first_violation.as_ref().map(|v| json!({
            "index": v.index,
            "inequality": v.inequality.name(),
            "lhs": v.lhs,
            "rhs": v.rhs,
        })),
    })
}

pub fn feasibility(c: &FeasibilityConfig) -> Result<Run, CliError> {
    let grid = c.grid.build()?;
    let spec = c.process.spec();
    let range = IndexRange::new(c.range[0], c.range[1])?;
    let window = check_feasibility(&grid, &spec, range, &c.slack);
    let global = check_feasibility_global(&grid, &spec, &c.slack);
    let mut report = report_json(&window);
    report["global"] = report_json(&global);
    Ok(Run { report: Some(report), outputs: Outputs::default() })
}

pub fn propagate(c: &PropagateConfig) -> Result<Run, CliError> {
    let grid = c.grid.build()?;
    let chain = build_truncated(&grid, &c.process.spec(), c.n)?;
    let k_max = c.k_max.unwrap_or(c.n);
    let recurrences = check_recurrences(&chain, k_max)?;
    let mut table =
        Table::new(c, "propagate", &["k", "mean", "variance", "mass_at_boundary", "max_recurrence_residual"])?;
    table.row(["0", "0.0", "0.0", "0.0", "0.0"])?;
    for s in &recurrences.steps {
        table.row([
            s.k.to_string(),
            real(s.mean),
            real(s.variance),
            real(s.boundary_mass),
            real(s.max_step_residual()),
        ])?;
    }
    let mut outputs = Outputs::default();
    outputs.add("propagate.csv", table.finish()?);
    Ok(Run { report: None, outputs })
}

fn snapshot_name(k: u64) -> String {
    format!("snapshot_k{k}.csv")
}

/// One row per path, or binned counts next to the law's mass per bin.
fn snapshot_table<C: Serialize>(
    config: &C,
    command: &str,
    batch: &TrajectoryBatch64,
    k: u64,
    format: &SnapshotFormat,
    law: &NormalLaw64,
) -> Result<Vec<u8>, CliError> {
    match format {
        SnapshotFormat::Samples => {
            let mut table = Table::new(config, command, &["path", "index", "x"])?;
            let grid = batch.grid();
            for (p, i) in batch.indices_at(k)?.into_iter().enumerate() {
                table.row([p.to_string(), i.to_string(), real(grid.point(i))])?;
            }
            table.finish()
        }
        SnapshotFormat::Histogram { lo, hi, bins } => {
            let edges = uniform_edges(*lo, *hi, *bins)?;
            let hist = histogram(&batch.snapshot(k)?, &edges)?;
            let mut table = Table::new(config, command, &["bin_lo", "bin_hi", "count", "density", "analytic_mass"])?;
            for (j, w) in hist.edges.windows(2).enumerate() {
                let analytic = (law.variance > 0.0).then(|| law.interval_mass(w[0], w[1]));
                table.row([
                    real(w[0]),
                    real(w[1]),
                    hist.counts[j].to_string(),
                    real(hist.density[j]),
                    opt_real(analytic),
                ])?;
            }
            table.finish()
        }
    }
}

fn sorted_steps(steps: &[u64]) -> Vec<u64> {
    steps.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
}

pub fn simulate_cmd(c: &SimulateConfig) -> Result<Run, CliError> {
    let grid = c.grid.build()?;
    let kernel = TransitionKernel64::new(grid, c.process.spec());
    let steps = sorted_steps(&c.steps);
    let last = *steps.last().expect("validated nonempty");
    let opts = SimulationOptions::new(c.paths, last, c.seed.expect("validated"))
        .threads(c.threads.unwrap_or(1))
        .record(Record::Steps(steps.clone()));
    let batch = simulate(&kernel, &opts)?;
    let mut outputs = Outputs::default();
    for &k in &steps {
        outputs.add(snapshot_name(k), snapshot_table(c, "simulate", &batch, k, &c.snapshot, &c.process.law_at(k))?);
    }
    Ok(Run { report: None, outputs })
}

pub fn heat(c: &HeatConfig) -> Result<Run, CliError> {
    let grid = embed_points(&c.points, c.base_gap)?;
    let params = HeatParams64::new(c.alpha, c.tau, c.points.clone())?;
    let mut outputs = Outputs::default();
    let mut summary = Table::new(c, "heat", &["k", "time", "total_variation"])?;
    let mut points = Table::new(c, "heat", &["k", "point", "mass", "density_estimate", "analytic_density"])?;
    for &k in &sorted_steps(&c.k) {
        let profile = temperature_profile(&grid, &params, c.n, k)?;
        let mut table = Table::new(
            c,
            "heat",
            &["x_i", "mass", "density_estimate", "analytic_density", "analytic_cell_mass", "abs_error"],
        )?;
        for row in &profile.rows {
            table.row([
                real(row.x),
                real(row.mass),
                real(row.density_estimate),
                opt_real(row.analytic_density),
                opt_real(row.analytic_cell_mass),
                opt_real(row.abs_error()),
            ])?;
        }
        outputs.add(format!("heat_k{k}.csv"), table.finish()?);
        summary.row([k.to_string(), real(profile.time), opt_real(profile.total_variation())])?;
        for (p, slot) in c.points.iter().zip(&profile.highlighted) {
            if let Some(row) = slot.map(|s| &profile.rows[s]) {
                points.row([
                    k.to_string(),
                    real(*p),
                    real(row.mass),
                    real(row.density_estimate),
                    opt_real(row.analytic_density),
                ])?;
            }
        }
    }
    outputs.add("heat_summary.csv", summary.finish()?);
    if !c.points.is_empty() {
        outputs.add("heat_points.csv", points.finish()?);
    }
    Ok(Run { report: None, outputs })
}

pub fn gbm(c: &GbmConfig) -> Result<Run, CliError> {
    let grid = c.grid.build()?;
    let base = GbmParams64::new(c.mu, c.sigma2, c.s0, c.tau)?;
    let mut segments = vec![(0, base)];
    for seg in &c.schedule {
        segments.push((seg.start, GbmParams64::new(seg.mu, seg.sigma2, c.s0, c.tau)?));
    }
    let schedule = CoefficientSchedule::new(segments)?;

    let snapshots = sorted_steps(&c.k);
    let last = *snapshots.last().expect("validated nonempty");
    let mut recorded: BTreeSet<u64> = (0..=last).step_by(c.trajectories.stride as usize).collect();
    recorded.insert(last);
    let trajectory_steps: Vec<u64> = recorded.iter().copied().collect();
    recorded.extend(&snapshots);
    let opts = SimulationOptions::new(c.paths, last, c.seed.expect("validated"))
        .threads(c.threads.unwrap_or(1))
        .record(Record::Steps(recorded.into_iter().collect()));
    let batch = simulate_schedule(&grid, &schedule, &opts)?;
    let prices = price_paths(&batch, &base);

    let mut outputs = Outputs::default();
    for &k in &snapshots {
        outputs.add(snapshot_name(k), snapshot_table(c, "gbm", &batch, k, &c.snapshot, &schedule.log_return_law(k))?);
    }

    let mut summary = Table::new(
        c,
        "gbm",
        &["k", "mean", "variance", "expected_mean", "expected_variance", "price_mean", "expected_price"],
    )?;
    for (slot, &k) in prices.steps.iter().enumerate() {
        let dist = batch.snapshot(k)?;
        let law = schedule.log_return_law(k);
        summary.row([
            k.to_string(),
            real(dist.mean()),
            real(dist.variance()),
            real(law.mean),
            real(law.variance),
            real(prices.mean[slot]),
            real(c.s0 * (law.mean + law.variance / 2.0).exp()),
        ])?;
    }
    outputs.add("summary.csv", summary.finish()?);

    let mut trajectories = Table::new(c, "gbm", &["path", "k", "price"])?;
    for p in 0..c.trajectories.paths.min(c.paths) {
        let row = prices.path(p);
        for (slot, &k) in prices.steps.iter().enumerate() {
            if trajectory_steps.binary_search(&k).is_ok() {
                trajectories.row([p.to_string(), k.to_string(), real(row[slot])])?;
            }
        }
    }
    outputs.add("trajectories.csv", trajectories.finish()?);
    Ok(Run { report: None, outputs })
}

/// The `x` column of a sample snapshot.
pub fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let column = reader
        .headers()?
        .iter()
        .position(|h| h == "x")
        .ok_or_else(|| CliError::Io(format!("{}: no `x` column", path.display())))?;
    let mut samples = vec![];
    for record in reader.records() {
        let record = record?;
        let field = record.get(column).unwrap_or_default();
        let value =
            field.parse::<f64>().map_err(|e| CliError::Io(format!("{}: bad sample `{field}`: {e}", path.display())))?;
        samples.push(value);
    }
    Ok(samples)
}

pub fn wasserstein(c: &WassersteinConfig, base_dir: &Path) -> Result<Run, CliError> {
    let mut rows = vec![];
    match &c.snapshots {
        Some(inputs) => {
            for input in inputs {
                let path = if input.path.is_absolute() { input.path.clone() } else { base_dir.join(&input.path) };
                let dist = EmpiricalDistribution64::new(read_samples(&path)?)?;
                rows.push((input.k, wasserstein1(&dist, &c.process.law_at(input.k), c.nodes)?));
            }
        }
        None => {
            let grid = c.grid.as_ref().expect("validated").build()?;
            let kernel = TransitionKernel64::new(grid, c.process.spec());
            let steps = sorted_steps(&c.step_list());
            let last = *steps.last().expect("validated nonempty");
            let opts = SimulationOptions::new(c.paths.expect("validated"), last, c.seed.expect("validated"))
                .threads(c.threads.unwrap_or(1))
                .record(Record::Steps(steps.clone()));
            let batch = simulate(&kernel, &opts)?;
            for &k in &steps {
                rows.push((k, wasserstein1(&batch.snapshot(k)?, &c.process.law_at(k), c.nodes)?));
            }
        }
    }
    let mut table = Table::new(c, "wasserstein", &["k", "W1"])?;
    for (k, w) in rows {
        table.row([k.to_string(), real(w)])?;
    }
    let mut outputs = Outputs::default();
    outputs.add("wasserstein.csv", table.finish()?);
    Ok(Run { report: None, outputs })
}
