use std::path::PathBuf;
use std::time::Instant;

use ldp_range::freq_oracle::{ldp_ratio_check, Channel, DomainSpec, PrivacySpec};
use ldp_range::harness::{
    build_query_set, deciles, flat_hh_crossover, predictor_table, run_experiment, run_quantiles,
    ExperimentConfig, MethodSpec, Simulation,
};
use ldp_range::hierarchy::{b_adic_decompose, TreeLayout};

use crate::config::{pick, pick_list, ConfigFile};
use crate::error::{usage, CliError, CliResult};
use crate::output::{list, num, sci, Table};
use crate::{DecomposeArgs, PredictArgs, PrivacyArgs, QuantileArgs, RunArgs};

/// Privacy budgets swept by default.
pub const SWEEP_GRID: [f64; 8] = [0.2, 0.4, 0.6, 0.8, 1.0, 1.1, 1.2, 1.4];

const MAX_D_EXP: u32 = 30;
const MAX_N_EXP: u32 = 40;

const RUN_KEYS: &[&str] = &[
    "d-exp", "eps", "methods", "branching", "n-exp", "center", "height", "stride", "reps", "seed",
    "per-user", "output",
];

const RESULT_COLUMNS: &[&str] = &["method", "B", "D", "epsilon", "N", "range_length", "mse", "stddev", "seed"];
const QUANTILE_COLUMNS: &[&str] = &[
    "method", "phi", "true_value", "est_value", "value_error", "quantile_error", "center", "epsilon", "rep",
    "seed",
];

struct RunDefaults {
    d_exp: u32,
    n_exp: u32,
    eps: Vec<f64>,
    methods: &'static str,
    reps: usize,
}

/// A fully resolved experiment plus the values echoed into the output header.
struct Plan {
    cfg: ExperimentConfig,
    header: Vec<(&'static str, String)>,
    output: Option<PathBuf>,
}

/// Expand bare `hh` / `hh_c` (optionally with an oracle suffix) over the
/// branching list, then parse every method.
fn expand_methods(tokens: &[String], branching: &[usize]) -> CliResult<Vec<MethodSpec>> {
    let mut methods = Vec::new();
    for token in tokens.iter().map(|t| t.trim()).filter(|t| !t.is_empty()) {
        let (head, rest) = token.split_once(':').unwrap_or((token, ""));
        let bare = matches!(head.to_ascii_lowercase().as_str(), "hh" | "hh_c")
            && !rest.starts_with(|c: char| c.is_ascii_digit());
        if bare {
            if branching.is_empty() {
                return usage(format!("`{token}` needs --branching"));
            }
            for b in branching {
                let text = if rest.is_empty() { format!("{head}:{b}") } else { format!("{head}:{b}:{rest}") };
                methods.push(text.parse()?);
            }
        } else {
            methods.push(token.parse()?);
        }
    }
    if methods.is_empty() {
        return usage("the method list is empty");
    }
    let mut unique = Vec::with_capacity(methods.len());
    for m in methods {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    Ok(unique)
}

fn pow2(exp: u32, max: u32, flag: &str) -> CliResult<u64> {
    if exp > max {
        return usage(format!("--{flag} {exp} exceeds the supported maximum {max}"));
    }
    Ok(1u64 << exp)
}

fn resolve_run(args: &RunArgs, file: &ConfigFile, defaults: RunDefaults) -> CliResult<Plan> {
    let d_exp = pick(args.d_exp, file, "d-exp")?.unwrap_or(defaults.d_exp);
    let n_exp = pick(args.n_exp, file, "n-exp")?.unwrap_or(defaults.n_exp);
    let d = pow2(d_exp, MAX_D_EXP, "d-exp")? as usize;
    let n = pow2(n_exp, MAX_N_EXP, "n-exp")?;
    let eps = pick_list(args.eps.clone(), file, "eps")?.unwrap_or(defaults.eps);
    let branching = pick_list(args.branching.clone(), file, "branching")?.unwrap_or_else(|| vec![4]);
    let tokens = pick_list(args.methods.clone(), file, "methods")?
        .unwrap_or_else(|| defaults.methods.split(',').map(String::from).collect());
    let methods = expand_methods(&tokens, &branching)?;

    let mut cfg = ExperimentConfig::new(d, n, eps, methods)?;
    if let Some(c) = pick(args.center, file, "center")? {
        cfg.data = cfg.data.with_center(c);
    }
    if let Some(h) = pick(args.height, file, "height")? {
        cfg.data = cfg.data.with_height(h);
    }
    if let Some(s) = pick(args.stride, file, "stride")? {
        cfg.queries = build_query_set(d, s)?;
    }
    cfg.reps = pick(args.reps, file, "reps")?.unwrap_or(defaults.reps);
    cfg.seed = pick(args.seed, file, "seed")?.unwrap_or(0);
    if args.per_user || file.get_flag("per-user")? {
        cfg.simulation = Simulation::PerUser;
    }
    cfg.validate()?;

    let header = vec![
        ("d-exp", d_exp.to_string()),
        ("n-exp", n_exp.to_string()),
        ("eps", list(&cfg.epsilons)),
        ("methods", list(&cfg.methods)),
        ("branching", list(&branching)),
        ("center", num(cfg.data.center)),
        ("height", num(cfg.data.height)),
        ("stride", cfg.queries.stride().to_string()),
        ("reps", cfg.reps.to_string()),
        ("seed", cfg.seed.to_string()),
        ("per-user", (cfg.simulation == Simulation::PerUser).to_string()),
    ];
    let output = pick(args.output.clone(), file, "output")?;
    Ok(Plan { cfg, header, output })
}

fn branching_field(m: &MethodSpec) -> String {
    m.branching().map(|b| b.to_string()).unwrap_or_default()
}

fn report_elapsed(command: &str, start: Instant, path: Option<PathBuf>) {
    let secs = start.elapsed().as_secs_f64();
    match path {
        Some(p) => eprintln!("{command}: wrote {} in {secs:.2} s", p.display()),
        None => eprintln!("{command}: finished in {secs:.2} s"),
    }
}

/// `simulate` writes every per-length row plus an `all` row per cell;
/// `sweep` writes only the `all` rows.
pub(crate) fn simulate(args: &RunArgs, file: &ConfigFile, sweep: bool) -> CliResult<()> {
    let mut keys = RUN_KEYS.to_vec();
    keys.push("assert-max-mse");
    file.check_keys(&keys)?;
    let start = Instant::now();
    let defaults = RunDefaults {
        d_exp: 8,
        n_exp: 20,
        eps: if sweep { SWEEP_GRID.to_vec() } else { vec![1.1] },
        methods: "hh_c:4,haar",
        reps: 5,
    };
    let plan = resolve_run(args, file, defaults)?;
    let assert = pick(args.assert_max_mse, file, "assert-max-mse")?;
    let result = run_experiment(&plan.cfg)?;

    let command = if sweep { "sweep" } else { "simulate" };
    let mut table = Table::new(command, RESULT_COLUMNS);
    for (k, v) in &plan.header {
        table.meta(k, v);
    }
    if let Some(t) = assert {
        table.meta("assert-max-mse", sci(t));
    }
    let cfg = &plan.cfg;
    let fixed = |m: &MethodSpec, eps: f64| {
        [m.to_string(), branching_field(m), cfg.data.d.to_string(), num(eps), cfg.data.n.to_string()]
    };
    for cell in &result.cells {
        if !sweep {
            for ls in &cell.per_length {
                let mut row = fixed(&cell.method, cell.epsilon).to_vec();
                row.extend([ls.r.to_string(), sci(ls.mse.mean), sci(ls.mse.stddev), cfg.seed.to_string()]);
                table.row(row);
            }
        }
        let mut row = fixed(&cell.method, cell.epsilon).to_vec();
        row.extend(["all".into(), sci(cell.overall.mean), sci(cell.overall.stddev), cfg.seed.to_string()]);
        table.row(row);
    }
    let path = table.emit(plan.output.as_deref())?;
    report_elapsed(command, start, path);

    if let Some(limit) = assert {
        let worst = result
            .cells
            .iter()
            .max_by(|a, b| a.overall.mean.total_cmp(&b.overall.mean))
            .expect("validated configs have cells");
        if worst.overall.mean > limit {
            return Err(CliError::Assertion(format!(
                "{} at ε={} has overall MSE {:e} > {:e}",
                worst.method, worst.epsilon, worst.overall.mean, limit
            )));
        }
    }
    Ok(())
}

pub(crate) fn quantiles(args: &QuantileArgs, file: &ConfigFile) -> CliResult<()> {
    let mut keys = RUN_KEYS.to_vec();
    keys.extend(["centers", "assert-max-quantile-error"]);
    file.check_keys(&keys)?;
    let start = Instant::now();
    let defaults = RunDefaults { d_exp: 16, n_exp: 20, eps: vec![1.1], methods: "hh_c:4,haar", reps: 1 };
    let plan = resolve_run(&args.run, file, defaults)?;
    let centers = pick_list(args.centers.clone(), file, "centers")?.unwrap_or_else(|| vec![0.1, 0.5]);
    let assert = pick(args.assert_max_quantile_error, file, "assert-max-quantile-error")?;
    let rows = run_quantiles(&plan.cfg, &centers, &deciles())?;

    let mut table = Table::new("quantiles", QUANTILE_COLUMNS);
    for (k, v) in plan.header.iter().filter(|(k, _)| *k != "center" && *k != "stride") {
        table.meta(k, v);
    }
    table.meta("centers", list(&centers));
    if let Some(t) = assert {
        table.meta("assert-max-quantile-error", num(t));
    }
    let seed = plan.cfg.seed.to_string();
    for r in &rows {
        table.row(vec![
            r.method.to_string(),
            num(r.phi),
            r.true_value.to_string(),
            r.est_value.to_string(),
            num(r.value_error),
            sci(r.quantile_error),
            num(r.center),
            num(r.epsilon),
            r.rep.to_string(),
            seed.clone(),
        ]);
    }
    let path = table.emit(plan.output.as_deref())?;
    report_elapsed("quantiles", start, path);

    if let Some(limit) = assert {
        if let Some(worst) = rows.iter().max_by(|a, b| a.quantile_error.total_cmp(&b.quantile_error)) {
            if worst.quantile_error > limit {
                return Err(CliError::Assertion(format!(
                    "{} at φ={} (centre {}) has quantile error {:.4} > {}",
                    worst.method, worst.phi, worst.center, worst.quantile_error, limit
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn decompose(args: &DecomposeArgs, file: &ConfigFile) -> CliResult<()> {
    file.check_keys(&["d", "b"])?;
    let d = pick(args.d, file, "d")?.unwrap_or(32);
    let branching = pick(args.branching, file, "b")?.unwrap_or(2);
    if args.a > args.b || args.b >= d {
        return usage(format!("range [{}, {}] is not inside [0, {d})", args.a, args.b));
    }
    let layout = TreeLayout::covering(d, branching)?;
    let cover = b_adic_decompose(args.a, args.b, &layout)?;
    let spans = cover.leaf_spans(&layout);
    println!(
        "[{}, {}] over D={d}, B={branching}: {} node(s), tree height {}",
        args.a,
        args.b,
        cover.len(),
        layout.height()
    );
    for (node, (lo, hi)) in cover.nodes().iter().zip(&spans) {
        println!("  level {} node {}: [{lo}, {hi}]", node.level, node.index);
    }
    let json: Vec<_> = cover
        .nodes()
        .iter()
        .zip(&spans)
        .map(|(n, (lo, hi))| serde_json::json!({"level": n.level, "node": n.index, "leaf_lo": lo, "leaf_hi": hi}))
        .collect();
    println!("{}", serde_json::Value::Array(json));
    Ok(())
}

pub(crate) fn privacy_check(args: &PrivacyArgs, file: &ConfigFile) -> CliResult<()> {
    file.check_keys(&["mechanism", "d", "eps", "assert"])?;
    let Some(mechanism) = pick(args.mechanism.clone(), file, "mechanism")? else {
        return usage("--mechanism is required");
    };
    let Some(eps) = pick(args.eps, file, "eps")? else {
        return usage("--eps is required");
    };
    let d = pick(args.d, file, "d")?.unwrap_or(8);
    let channel: Channel = mechanism.parse()?;
    let privacy = PrivacySpec::new(eps)?;
    let ratio = ldp_ratio_check(channel, DomainSpec::new(d)?, &privacy)?;
    let bound = privacy.e_eps();
    let pass = ratio <= bound * (1.0 + 1e-9);
    println!(
        "mechanism={mechanism} d={d} epsilon={eps} max_ratio={ratio:.6} e^eps={bound:.6} {}",
        if pass { "PASS" } else { "FAIL" }
    );
    if !pass && (args.assert || file.get_flag("assert")?) {
        return Err(CliError::Assertion(format!("ratio {ratio} exceeds e^ε = {bound}")));
    }
    Ok(())
}

pub(crate) fn predict(args: &PredictArgs, file: &ConfigFile) -> CliResult<()> {
    file.check_keys(&["d-exp", "b", "eps", "n-exp", "output"])?;
    let d_exp = pick(args.d_exp, file, "d-exp")?.unwrap_or(8);
    let n_exp = pick(args.n_exp, file, "n-exp")?.unwrap_or(20);
    let d = pow2(d_exp, MAX_D_EXP, "d-exp")? as usize;
    let n = pow2(n_exp, MAX_N_EXP, "n-exp")?;
    let b = pick(args.branching, file, "b")?.unwrap_or(4);
    let eps = pick(args.eps, file, "eps")?.unwrap_or(1.1);
    let t = predictor_table(d, b, &PrivacySpec::new(eps)?, n)?;

    let mut table = Table::new("predict", &["range_length", "flat", "hh", "hh_c", "haar"]);
    table.meta("d-exp", d_exp);
    table.meta("n-exp", n_exp);
    table.meta("b", b);
    table.meta("eps", num(eps));
    table.meta("vf", sci(t.vf));
    table.meta("flat-average", sci(t.flat_average));
    table.meta("hh-average", sci(t.hh_average));
    table.meta("flat-hh-crossover", num(flat_hh_crossover(b, d)));
    for r in &t.rows {
        table.row(vec![r.r.to_string(), sci(r.flat), sci(r.hh), sci(r.hh_consistent), sci(r.haar)]);
    }
    table.emit(pick(args.output.clone(), file, "output")?.as_deref())?;
    Ok(())
}
