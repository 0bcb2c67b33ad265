//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use ldp_range::consistency::{enforce, least_squares_oracle};
use ldp_range::freq_oracle::{ldp_ratio_check, variance_formula, Channel, DomainSpec, Mechanism, PrivacySpec};
use ldp_range::harness::{
    deciles, run_experiment, run_quantiles, sample_cauchy, simulate_flat, DataSpec, ExperimentConfig,
    ExperimentResult, MethodKind, MethodSpec, Simulation,
};
use ldp_range::hierarchy::{b_adic_decompose, hh_variance_bound, NodeEstimates, TreeLayout};
use ldp_range::rng::{derived_stream, stream};
use ldp_range::wavelet::{haar_answer_range, haar_transform, haar_variance_bound, inverse_haar, HaarEstimates, HaarLayout};
use rand::Rng;

type Outcome = Result<String, String>;

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, id: u32, name: &str, elapsed: Duration, budget: Option<Duration>, outcome: Outcome) {
        let secs = elapsed.as_secs_f64();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {secs:.1} s, budget {:.0} s", b.as_secs_f64())),
            (o, _) => o,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            self.failures += 1;
        }
        println!("{tag} [{id:>2}] {name}: {detail} ({secs:.1} s)");
    }

    fn run(&mut self, id: u32, name: &str, budget_secs: u64, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        self.report(id, name, start.elapsed(), Some(Duration::from_secs(budget_secs)), outcome);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn lib<T>(r: ldp_range::error::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn privacy() -> Outcome {
    let mut worst: f64 = 0.0;
    for channel in [Channel::RandomizedResponse, Channel::Oue, Channel::Hrr, Channel::Olh] {
        for eps in [0.2, 1.1] {
            let p = lib(PrivacySpec::new(eps))?;
            let ratio = lib(ldp_ratio_check(channel, lib(DomainSpec::new(8))?, &p))?;
            let rel = ratio / p.e_eps();
            worst = worst.max(rel);
            ensure(rel <= 1.0 + 1e-9, || format!("{channel:?} at ε={eps}: ratio {ratio} > e^ε"))?;
        }
    }
    Ok(format!("max ratio / e^ε = {worst:.12}"))
}

fn oracle_moments() -> Outcome {
    const D: usize = 64;
    const N: u64 = 1_000_000;
    const REPS: usize = 20;
    let p = lib(PrivacySpec::new(3f64.ln()))?;
    let vf = lib(variance_formula(Mechanism::Oue, &p, N))?;
    let spread = lib(sample_cauchy(&DataSpec::new(D, N), &mut stream(1)))?;
    let mut point = vec![0u64; D];
    point[D / 3] = N;
    let mut notes = Vec::new();
    for (tag, oracle) in [(1u64, Mechanism::Oue), (2, Mechanism::Hrr)] {
        let runs = |counts: &[u64], label: u64| -> Result<Vec<Vec<f64>>, String> {
            (0..REPS)
                .map(|rep| {
                    let mut rng = derived_stream(2, &[tag, label, rep as u64]);
                    lib(simulate_flat(counts, oracle, &p, Simulation::PerUser, &mut rng)).map(|e| e.theta_hat)
                })
                .collect()
        };
        let unbiased = runs(&spread, 0)?;
        let mut worst_z: f64 = 0.0;
        for j in 0..D {
            let truth = spread[j] as f64 / N as f64;
            let xs: Vec<f64> = unbiased.iter().map(|t| t[j]).collect();
            let mean = xs.iter().sum::<f64>() / REPS as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (REPS - 1) as f64;
            let z = (mean - truth).abs() / (var / REPS as f64).sqrt();
            worst_z = worst_z.max(z);
        }
        ensure(worst_z <= 5.0, || format!("{oracle:?}: item mean {worst_z:.2} SE from truth"))?;

        // OUE: items with zero mass have variance exactly V_F. HRR: every item
        // does when the population is a point mass.
        let point_runs = runs(&point, 1)?;
        let mut sse = 0.0;
        let mut cells = 0usize;
        for t in &point_runs {
            for (j, &x) in t.iter().enumerate() {
                if oracle == Mechanism::Oue && j == D / 3 {
                    continue;
                }
                let truth = point[j] as f64 / N as f64;
                sse += (x - truth).powi(2);
                cells += 1;
            }
        }
        let ratio = sse / cells as f64 / vf;
        ensure((0.9..=1.1).contains(&ratio), || format!("{oracle:?}: variance {ratio:.3} V_F"))?;
        notes.push(format!("{}: max |z| {worst_z:.2}, var {ratio:.3} V_F", oracle.name()));
    }
    Ok(notes.join("; "))
}

fn decomposition() -> Outcome {
    const D: usize = 128;
    let mut checked = 0u64;
    for b in [2, 4, 8] {
        let layout = lib(TreeLayout::covering(D, b))?;
        for a in 0..D {
            for e in a..D {
                let cover = lib(b_adic_decompose(a, e, &layout))?;
                let mut hits = vec![0u8; layout.leaves()];
                for (lo, hi) in cover.leaf_spans(&layout) {
                    hits[lo..=hi].iter_mut().for_each(|h| *h += 1);
                }
                let ok = hits.iter().enumerate().all(|(i, &h)| h == u8::from((a..=e).contains(&i)));
                ensure(ok, || format!("B={b}: cover of [{a}, {e}] is not an exact partition"))?;
                checked += 1;
            }
        }
    }
    let layout = lib(TreeLayout::covering(32, 2))?;
    let spans = lib(b_adic_decompose(2, 22, &layout))?.leaf_spans(&layout);
    let expected = [(2, 3), (4, 7), (8, 15), (16, 19), (20, 21), (22, 22)];
    ensure(spans == expected, || format!("[2, 22] decomposed as {spans:?}"))?;
    Ok(format!("{checked} ranges exact; [2, 22] example reproduced"))
}

fn consistency() -> Outcome {
    let mut rng = stream(4);
    let (mut worst_gap, mut worst_violation): (f64, f64) = (0.0, 0.0);
    for (d, b) in [(16, 2), (16, 4), (256, 4)] {
        let layout = lib(TreeLayout::covering(d, b))?;
        for trial in 0..100 {
            let levels: Vec<Vec<f64>> = (1..=layout.height())
                .map(|l| (0..layout.level_size(l)).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let mut est = lib(NodeEstimates::new(layout, levels, vec![1; layout.height()]))?;
            if trial % 2 == 1 {
                est = est.with_root_observation(rng.random_range(0.0..2.0));
            }
            let fast = lib(enforce(&est))?;
            let exact = lib(least_squares_oracle(&est))?;
            let mut gap = (fast.root() - exact.root()).abs();
            for l in 1..=layout.height() {
                for (x, y) in fast.level(l).iter().zip(exact.level(l)) {
                    gap = gap.max((x - y).abs());
                }
            }
            worst_gap = worst_gap.max(gap);
            worst_violation = worst_violation.max(fast.max_violation());
        }
        ensure(worst_gap <= 1e-9, || format!("(D={d}, B={b}): differs from least squares by {worst_gap:e}"))?;
        ensure(worst_violation <= 1e-12, || format!("(D={d}, B={b}): parent-sum violation {worst_violation:e}"))?;
    }
    Ok(format!("max gap {worst_gap:.1e}, max violation {worst_violation:.1e}"))
}

fn haar() -> Outcome {
    let mut rng = stream(5);
    let layout = lib(HaarLayout::new(64))?;
    let coefficients: Vec<f64> = (0..64).map(|_| rng.random_range(-1.0..1.0)).collect();
    let est = lib(HaarEstimates::from_coefficients(layout, &coefficients))?;
    let values = lib(inverse_haar(&coefficients))?;
    let mut worst: f64 = 0.0;
    for a in 0..64 {
        let mut direct = 0.0;
        for (b, v) in values.iter().enumerate().skip(a) {
            direct += v;
            worst = worst.max((lib(haar_answer_range(&est, a, b))? - direct).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("range answer differs from reconstruction by {worst:e}"))?;
    let x: Vec<f64> = (0..1024).map(|_| rng.random_range(0.0..1.0)).collect();
    let back = lib(inverse_haar(&lib(haar_transform(&x))?))?;
    let trip = x.iter().zip(&back).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    ensure(trip <= 1e-12, || format!("round trip error {trip:e}"))?;
    Ok(format!("range gap {worst:.1e}, round trip {trip:.1e}"))
}

fn flat_laws() -> Outcome {
    const D: usize = 64;
    const N: u64 = 1_000_000;
    let eps = 3f64.ln();
    let mut cfg = lib(ExperimentConfig::new(D, N, vec![eps], vec![MethodSpec::flat(Mechanism::Oue)]))?;
    cfg.reps = 400;
    cfg.seed = 6;
    let result = lib(run_experiment(&cfg))?;
    let vf = lib(variance_formula(Mechanism::Oue, &lib(PrivacySpec::new(eps))?, N))?;
    let cell = &result.cells[0];
    let mut notes = Vec::new();
    for ls in cell.per_length.iter().filter(|ls| ls.r.is_power_of_two()) {
        let ratio = ls.mse.mean / (ls.r as f64 * vf);
        ensure((0.7..=1.3).contains(&ratio), || format!("r={}: MSE {ratio:.3} r V_F", ls.r))?;
        notes.push(format!("{:.2}", ratio));
    }
    let avg = cell.overall.mean / ((D as f64 + 2.0) * vf / 3.0);
    ensure((0.8..=1.2).contains(&avg), || format!("all-pairs MSE {avg:.3} (D+2)V_F/3"))?;
    Ok(format!("MSE/(rV_F) at r=1..64: [{}]; average {avg:.3}", notes.join(", ")))
}

fn table_methods() -> Vec<MethodSpec> {
    let mut m = Vec::new();
    for b in [2, 4, 16] {
        m.push(MethodSpec::hierarchical(b, Mechanism::Oue));
        m.push(MethodSpec::consistent(b, Mechanism::Oue));
    }
    m.push(MethodSpec::haar());
    m
}

fn table_run() -> Result<ExperimentResult, String> {
    let mut cfg = lib(ExperimentConfig::new(1 << 8, 1 << 26, vec![1.1, 0.2], table_methods()))?;
    cfg.reps = 5;
    cfg.seed = 7;
    lib(run_experiment(&cfg))
}

fn overall(result: &ExperimentResult, m: &MethodSpec, eps: f64) -> Result<f64, String> {
    result.cell(m, eps).map(|c| c.overall.mean).ok_or_else(|| format!("missing cell {m} at ε={eps}"))
}

fn table_reproduction(result: &ExperimentResult) -> Outcome {
    let hhc4 = overall(result, &MethodSpec::consistent(4, Mechanism::Oue), 1.1)?.sqrt();
    let haar = overall(result, &MethodSpec::haar(), 1.1)?.sqrt();
    ensure((0.47e-3..=0.87e-3).contains(&hhc4), || format!("HH^c_4 scaled MSE {hhc4:.4e} outside [0.47, 0.87]e-3"))?;
    ensure((0.52e-3..=0.97e-3).contains(&haar), || format!("Haar scaled MSE {haar:.4e} outside [0.52, 0.97]e-3"))?;
    let haar_low = overall(result, &MethodSpec::haar(), 0.2)?;
    for b in [2, 4, 16] {
        let m = MethodSpec::consistent(b, Mechanism::Oue);
        let other = overall(result, &m, 0.2)?;
        ensure(haar_low < other, || {
            format!("ε=0.2: Haar {:.4e} not below {m} {:.4e}", haar_low.sqrt(), other.sqrt())
        })?;
    }
    Ok(format!("ε=1.1 scaled MSE: HH^c_4 {:.3}e-3, Haar {:.3}e-3; ε=0.2 Haar best", hhc4 * 1e3, haar * 1e3))
}

fn dominance(result: &ExperimentResult) -> Outcome {
    let d = result.config.data.d;
    let n = result.config.data.n;
    let mut checked = 0usize;
    let mut tightest: f64 = 0.0;
    for &eps in &result.config.epsilons {
        let p = lib(PrivacySpec::new(eps))?;
        for b in [2, 4, 16] {
            let raw = overall(result, &MethodSpec::hierarchical(b, Mechanism::Oue), eps)?;
            let ci = overall(result, &MethodSpec::consistent(b, Mechanism::Oue), eps)?;
            ensure(ci <= raw, || format!("ε={eps}, B={b}: consistency raised MSE {raw:.3e} -> {ci:.3e}"))?;
        }
        let haar_bound = lib(haar_variance_bound(d, &p, n))?;
        for cell in result.cells.iter().filter(|c| c.epsilon == eps) {
            for ls in &cell.per_length {
                let bound = match cell.method.kind {
                    MethodKind::Hierarchical { branching } | MethodKind::Consistent { branching } => {
                        lib(hh_variance_bound(branching, ls.r, d, &p, n))?
                    }
                    MethodKind::Haar => haar_bound,
                    MethodKind::Flat => continue,
                };
                let ratio = ls.mse.mean / bound;
                tightest = tightest.max(ratio);
                ensure(ratio <= 1.0, || {
                    format!("{} ε={eps} r={}: MSE {:.3e} above bound {bound:.3e}", cell.method, ls.r, ls.mse.mean)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("CI never hurts; {checked} per-length cells within bounds (max MSE/bound {tightest:.3})"))
}

fn quantiles() -> Outcome {
    let methods = vec![MethodSpec::consistent(4, Mechanism::Oue), MethodSpec::haar()];
    let mut cfg = lib(ExperimentConfig::new(1 << 16, 1 << 20, vec![1.1], methods))?;
    cfg.reps = 1;
    cfg.seed = 7;
    let rows = lib(run_quantiles(&cfg, &[0.1, 0.5], &deciles()))?;
    let worst = rows
        .iter()
        .max_by(|a, b| a.quantile_error.total_cmp(&b.quantile_error))
        .ok_or("no quantile rows")?;
    let over = rows.iter().filter(|r| r.quantile_error > 0.01).count();
    let detail = format!(
        "max quantile error {:.4} ({} at φ={}, P={}); {over} of {} answers above 0.01",
        worst.quantile_error,
        worst.method,
        worst.phi,
        worst.center,
        rows.len()
    );
    if over == 0 { Ok(detail) } else { Err(detail) }
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("ldp-range-acceptance-{}-{name}", std::process::id()))
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ldp-range");
    let runs: [&[&str]; 2] = [
        &["simulate", "--d-exp", "6", "--n-exp", "18", "--eps", "0.5,1.1", "--methods", "flat,hh,hh_c,haar,hh:2:olh",
          "--branching", "2,4", "--reps", "3", "--seed", "11"],
        &["quantiles", "--d-exp", "10", "--n-exp", "18", "--seed", "11"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let path = scratch(&format!("{}-{attempt}.csv", args[0]));
            let status = Command::new(bin)
                .args(args)
                .arg("--output")
                .arg(&path)
                .env_remove("LDP_RANGE_OUT_DIR")
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.success(), || {
                format!("{} failed: {}", args[0], String::from_utf8_lossy(&status.stderr))
            })?;
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
            let _ = std::fs::remove_file(&path);
        }
        ensure(outputs[0] == outputs[1], || format!("`{}` output differs between runs", args.join(" ")))?;
    }
    Ok("simulate and quantiles reruns are byte-identical".into())
}

fn main() {
    let mut suite = Suite { failures: 0 };
    suite.run(1, "privacy enumeration", 1, privacy);
    suite.run(2, "oracle unbiasedness and variance", 120, oracle_moments);
    suite.run(3, "B-adic decomposition", 10, decomposition);
    suite.run(4, "consistency equals least squares", 30, consistency);
    suite.run(5, "Haar range answers and round trip", 10, haar);
    suite.run(6, "flat-method laws", 60, flat_laws);

    let start = Instant::now();
    let table = table_run();
    let elapsed = start.elapsed();
    let budget = Some(Duration::from_secs(15 * 60));
    match &table {
        Ok(result) => {
            suite.report(7, "table reproduction at D=2^8", elapsed, budget, table_reproduction(result));
            suite.report(8, "consistency benefit and bound dominance", Duration::ZERO, None, dominance(result));
        }
        Err(e) => {
            suite.report(7, "table reproduction at D=2^8", elapsed, budget, Err(e.clone()));
            suite.report(8, "consistency benefit and bound dominance", Duration::ZERO, None, Err(e.clone()));
        }
    }

    suite.run(9, "quantiles at D=2^16", 300, quantiles);
    suite.run(10, "CLI determinism", 60, cli_determinism);

    println!("{} of 10 criteria failed", suite.failures);
    if suite.failures > 0 {
        std::process::exit(1);
    }
}
