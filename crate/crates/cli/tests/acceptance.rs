//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use momentchain::exact::build_truncated;
use momentchain::stats::standard_normal_quantile;
use momentchain::{
    simulate, simulate_schedule, wasserstein1, CoefficientSchedule, GbmParams64, Grid64, HeatParams64, Record,
    SimulationOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn cli(args: &[&str]) -> Result<std::process::Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_momentchain")).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out)
}

fn csv_rows(path: &Path) -> Result<Vec<Vec<f64>>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    text.lines()
        .skip(2)
        .map(|l| l.split(',').map(|f| f.parse::<f64>().map_err(|e| format!("{f}: {e}"))).collect())
        .collect()
}

fn reference() -> GbmParams64 {
    GbmParams64::new(2.0, 0.25, 1.0, 0.0002).unwrap()
}

fn nonuniform() -> Grid64 {
    Grid64::two_sided(0.1, 0.01).unwrap()
}

fn equal_density_uniform() -> Grid64 {
    Grid64::uniform(20.0 / 11.0 * 0.01).unwrap()
}

const SEEDS: std::ops::RangeInclusive<u64> = 1..=20;
const PATHS: usize = 10_000;
const K: u64 = 10_000;

/// Propagated moments from the CLI against `M k` and `V k`, plus the
/// recurrence residual column.
fn propagate_checks(out: &Path) -> Result<(f64, f64, f64), String> {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for (name, m, v) in [("propagate_uniform.json", 0.0, 0.2), ("propagate_reference.json", 3.75e-4, 5e-5)] {
        let dir = out.join(name);
        cli(&["propagate", "--config", configs().join(name).to_str().unwrap(), "--out", dir.to_str().unwrap()])?;
        let rows = csv_rows(&dir.join("propagate.csv"))?;
        if rows.len() != 301 {
            return Err(format!("{name}: expected 301 rows, got {}", rows.len()));
        }
        for r in rows {
            worst.0 = worst.0.max((r[1] - m * r[0]).abs());
            worst.1 = worst.1.max((r[2] - v * r[0]).abs());
            worst.2 = worst.2.max(r[4]);
        }
    }
    Ok(worst)
}

fn criterion_1(out: &Path) -> Outcome {
    let (mean, var, _) = propagate_checks(out)?;
    let detail = format!("max |mean - Mk| = {mean:.2e}, max |var - Vk| = {var:.2e}");
    if mean <= 1e-10 && var <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2(out: &Path) -> Outcome {
    let (_, _, residual) = propagate_checks(&out.join("c2"))?;
    let detail = format!("max recurrence residual = {residual:.2e}");
    if residual <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3(out: &Path) -> Outcome {
    let report = |name: &str| -> Result<serde_json::Value, String> {
        let o =
            cli(&["feasibility", "--config", configs().join(name).to_str().unwrap(), "--out", out.to_str().unwrap()])?;
        serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())
    };
    let ok = report("feasibility_reference.json")?;
    let bad = report("feasibility_large_tau.json")?;
    let index = &bad["first_violation"]["index"];
    let detail = format!(
        "tau=0.0002 feasible={}, tau=0.02 feasible={} at index {index} ({})",
        ok["feasible"], bad["feasible"], bad["first_violation"]["inequality"]
    );
    if ok["feasible"] == true && ok["global"]["feasible"] == true && bad["feasible"] == false && index.is_i64() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_4() -> Outcome {
    let tv = |h: f64| -> Result<f64, String> {
        let tau = h * h / 4.0;
        let k = (2.0 / tau).round() as u64;
        let params = HeatParams64::new(1.0, tau, vec![]).map_err(|e| e.to_string())?;
        let profile =
            momentchain::temperature_profile(&Grid64::uniform(h).unwrap(), &params, k, k).map_err(|e| e.to_string())?;
        Ok(profile.total_variation().unwrap())
    };
    let (coarse, fine) = (tv(0.5)?, tv(0.25)?);
    let detail = format!("TV(h=0.5) = {coarse:.3e}, TV(h=0.25) = {fine:.3e}");
    if fine < coarse {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Final log-returns and mean prices of the reference runs, one per seed.
struct ReferenceRun {
    w1_k10: f64,
    w1_k: f64,
    mean: f64,
    variance: f64,
    price_mean: f64,
}

fn reference_run(grid: &Grid64, seed: u64) -> Result<ReferenceRun, String> {
    let params = reference();
    let opts = SimulationOptions::new(PATHS, K, seed).record(Record::Steps(vec![10, K]));
    let batch = simulate(&params.kernel(grid), &opts).map_err(|e| e.to_string())?;
    let at = |k: u64| batch.snapshot(k).map_err(|e| e.to_string());
    let (early, late) = (at(10)?, at(K)?);
    let w1 = |d, k| wasserstein1(d, &params.log_return_law(k), 4096).map_err(|e| e.to_string());
    let prices: Vec<f64> = late.samples().iter().map(|r| params.s0 * r.exp()).collect();
    Ok(ReferenceRun {
        w1_k10: w1(&early, 10)?,
        w1_k: w1(&late, K)?,
        mean: late.mean(),
        variance: late.variance(),
        price_mean: momentchain::stats::pairwise_sum(&prices) / prices.len() as f64,
    })
}

fn criterion_5(runs: &[ReferenceRun]) -> Outcome {
    let tol = 4.0 * (0.5f64 / PATHS as f64).sqrt();
    let good = runs.iter().filter(|r| (r.mean - 3.75).abs() <= tol && (r.variance - 0.5).abs() <= 0.05).count();
    let worst_mean = runs.iter().map(|r| (r.mean - 3.75).abs()).fold(0.0, f64::max);
    let worst_var = runs.iter().map(|r| (r.variance - 0.5).abs() / 0.5).fold(0.0, f64::max);
    let detail = format!(
        "{good}/20 seeds within bounds (worst |mean - 3.75| = {worst_mean:.4}, worst rel var error = {worst_var:.3})"
    );
    if good >= 19 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `∫|F - G| dx` between the chain's exact law after `k` steps and the
/// analytic law: the W1 a sample would converge to as `N` grows.
fn exact_law_w1(grid: &Grid64, k: u64) -> Result<f64, String> {
    let params = reference();
    let chain = build_truncated(grid, &params.spec(), k).map_err(|e| e.to_string())?;
    let dist = chain.propagate(k);
    let law = params.log_return_law(k);
    let (lo, hi) = (law.mean - 10.0 * law.std_dev(), law.mean + 10.0 * law.std_dev());
    let cells = 1_000_000;
    let dx = (hi - lo) / cells as f64;
    let (mut atom, mut cdf, mut total) = (0, 0.0, 0.0);
    for c in 0..cells {
        let x = lo + (c as f64 + 0.5) * dx;
        while atom < dist.coords.len() && dist.coords[atom] <= x {
            cdf += dist.mass[atom];
            atom += 1;
        }
        total += (cdf - law.cdf(x)).abs() * dx;
    }
    Ok(total)
}

fn criterion_6(nonuniform: &[ReferenceRun], uniform: &[ReferenceRun]) -> Outcome {
    let late = nonuniform.iter().zip(uniform).filter(|(n, u)| n.w1_k < u.w1_k).count();
    let early = nonuniform.iter().zip(uniform).filter(|(n, u)| u.w1_k10 < n.w1_k10).count();
    let avg = |f: &dyn Fn(&ReferenceRun) -> f64, v: &[ReferenceRun]| v.iter().map(f).sum::<f64>() / v.len() as f64;
    let detail = format!(
        "k=10^4: nonuniform smaller in {late}/20 (mean W1 {:.4} vs {:.4}); k=10: uniform smaller in {early}/20 (mean W1 {:.4} vs {:.4})",
        avg(&|r| r.w1_k, nonuniform),
        avg(&|r| r.w1_k, uniform),
        avg(&|r| r.w1_k10, uniform),
        avg(&|r| r.w1_k10, nonuniform),
    );
    let exact = (exact_law_w1(&self::nonuniform(), K)?, exact_law_w1(&equal_density_uniform(), K)?);
    let detail = format!("{detail}; exact-law W1 at k=10^4: nonuniform {:.5}, uniform {:.5}", exact.0, exact.1);
    if late >= 18 && early > 10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7(runs: &[ReferenceRun]) -> Outcome {
    let expected = reference().expected_price(K);
    let worst = runs.iter().map(|r| (r.price_mean / expected - 1.0).abs()).fold(0.0, f64::max);
    let detail =
        format!("E[s] = {expected:.4}, worst relative deviation of the sample mean over 20 seeds = {worst:.4}");
    if worst <= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8(out: &Path) -> Outcome {
    let base: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("histogram_nonuniform_k10000.json")).unwrap())
            .map_err(|e| e.to_string())?;
    let mut samples = base.clone();
    samples["snapshot"] = serde_json::json!({"format": "samples"});
    let cfg = out.join("c8_samples.json");
    std::fs::write(&cfg, samples.to_string()).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for (command, config, files) in [
        ("simulate", cfg.clone(), vec!["snapshot_k10000.csv"]),
        ("gbm", configs().join("gbm_reference.json"), vec!["snapshot_k10000.csv", "summary.csv", "trajectories.csv"]),
    ] {
        let mut first: Option<Vec<Vec<u8>>> = None;
        for threads in ["1", "4", "16"] {
            let dir = out.join(format!("c8_{command}_{threads}"));
            cli(&[
                command,
                "--config",
                config.to_str().unwrap(),
                "--threads",
                threads,
                "--out",
                dir.to_str().unwrap(),
            ])?;
            let bytes: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect();
            match &first {
                None => first = Some(bytes),
                Some(reference) => {
                    if *reference != bytes {
                        return Err(format!("{command} output differs with {threads} threads"));
                    }
                    compared += files.len();
                }
            }
        }
    }
    Ok(format!("{compared} file pairs byte-identical across 1, 4 and 16 threads"))
}

/// erfc from the Maclaurin series of erf for small arguments and Lentz's
/// continued fraction in the tail.
fn oracle_erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - oracle_erfc(-x);
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    if x < 2.0 {
        let (mut term, mut sum) = (x, x);
        for n in 1..200 {
            let n = n as f64;
            term *= -x * x / n;
            let add = term / (2.0 * n + 1.0);
            sum += add;
            if add.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 * sum / sqrt_pi
    } else {
        let tiny = 1e-300;
        let (mut f, mut c, mut d) = (x, x, 0.0f64);
        for n in 1..500 {
            let a = n as f64 / 2.0;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            f *= c * d;
            if (c * d - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / sqrt_pi / f
    }
}

fn bisection_quantile(q: f64) -> f64 {
    let cdf = |z: f64| 0.5 * oracle_erfc(-z / std::f64::consts::SQRT_2);
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    while hi - lo > 0.0 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if cdf(mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let worst = (0..1000)
        .map(|_| {
            let q: f64 = rng.gen_range(1e-10..1.0 - 1e-10);
            (standard_normal_quantile(q) - bisection_quantile(q)).abs()
        })
        .fold(0.0, f64::max);
    let detail = format!("max |error| over 1000 levels = {worst:.2e}");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Outcome {
    let grid = nonuniform();
    let p = reference();
    let opts = SimulationOptions::new(PATHS, 4000, 10).record(Record::Steps(vec![2000, 4000]));
    let single = simulate_schedule(&grid, &CoefficientSchedule::constant(p), &opts).map_err(|e| e.to_string())?;
    let split = CoefficientSchedule::new(vec![(0, p), (2000, p)]).map_err(|e| e.to_string())?;
    let twice = simulate_schedule(&grid, &split, &opts).map_err(|e| e.to_string())?;
    if single != twice {
        return Err("identical segments differ from a single segment".into());
    }

    let second = GbmParams64::new(-0.5, 0.4, 1.0, 0.0002).unwrap();
    let schedule = CoefficientSchedule::new(vec![(0, p), (2000, second)]).map_err(|e| e.to_string())?;
    let batch = simulate_schedule(&grid, &schedule, &opts).map_err(|e| e.to_string())?;
    let dist = batch.snapshot(4000).map_err(|e| e.to_string())?;
    let expected = p.spec().mean * 2000.0 + second.spec().mean * 2000.0;
    let se = (schedule.log_return_law(4000).variance / PATHS as f64).sqrt();
    let z = (dist.mean() - expected) / se;
    let detail =
        format!("identical segments bit-identical; two-regime mean {:.5} vs {expected:.5} ({z:+.2} SE)", dist.mean());
    if z.abs() <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn report(results: &mut Vec<bool>, n: u32, name: &str, start: Instant, outcome: Outcome) {
    let secs = start.elapsed().as_secs_f64();
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("[{tag}] {n:>2} {name}: {detail} ({secs:.1} s)");
    results.push(outcome.is_ok());
}

fn main() {
    let scratch = tempfile::tempdir().expect("scratch dir");
    let out = scratch.path();
    let mut results = vec![];

    let t = Instant::now();
    report(&mut results, 1, "exact moment matching", t, criterion_1(out));
    let t = Instant::now();
    report(&mut results, 2, "moment recurrences", t, criterion_2(out));
    let t = Instant::now();
    report(&mut results, 3, "feasibility gate", t, criterion_3(out));
    let t = Instant::now();
    report(&mut results, 4, "heat profile refinement", t, criterion_4());

    let t = Instant::now();
    let runs = |grid: Grid64| SEEDS.map(|s| reference_run(&grid, s)).collect::<Result<Vec<_>, _>>();
    match (runs(nonuniform()), runs(equal_density_uniform())) {
        (Ok(nonuniform_runs), Ok(uniform_runs)) => {
            report(&mut results, 5, "GBM distributional fit", t, criterion_5(&nonuniform_runs));
            report(
                &mut results,
                6,
                "uniform vs nonuniform W1 ordering",
                t,
                criterion_6(&nonuniform_runs, &uniform_runs),
            );
            report(&mut results, 7, "price-path mean", t, criterion_7(&nonuniform_runs));
        }
        (a, b) => {
            let e = a.err().or(b.err()).unwrap();
            for (n, name) in
                [(5, "GBM distributional fit"), (6, "uniform vs nonuniform W1 ordering"), (7, "price-path mean")]
            {
                report(&mut results, n, name, t, Err(e.clone()));
            }
        }
    }

    let t = Instant::now();
    report(&mut results, 8, "thread-count reproducibility", t, criterion_8(out));
    let t = Instant::now();
    report(&mut results, 9, "normal quantile accuracy", t, criterion_9());
    let t = Instant::now();
    report(&mut results, 10, "coefficient schedules", t, criterion_10());

    let passed = results.iter().filter(|&&ok| ok).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
