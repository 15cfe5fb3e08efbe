//! Command-line front end. `run` takes the arguments and an output sink and
//! returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::automata::{assign_weights, uniform_weights, validate_machine, Machine, WeightAssignment};
use crate::error::{Error, Result};
use crate::exactmath::Rational;
use crate::expressiveness::{check_machine_hom, check_machine_iso, verify_counterexamples, CheckOptions, Verdict};
use crate::format::{parse_machine, serialize_machine};
use crate::measures::{mc_estimate, measure_run_with, measure_runset_with, MeasureOptions};
use crate::runs::{enumerate_runs_with_budget, Run, TimeGrid, DEFAULT_RUN_BUDGET};
use crate::translations as tr;

pub const BUDGET_ENV: &str = "QUANTAUTO_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "quantauto", version, about = "Run measures and expressiveness checks for weighted, probabilistic and timed automata")]
pub struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomized features.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a machine file against its model's invariants.
    Validate { file: PathBuf },
    /// List the runs with exactly `depth` steps.
    Runs {
        file: PathBuf,
        #[arg(long)]
        depth: usize,
        /// Comma-separated time points, e.g. 1/2,1,3/2.
        #[arg(long, default_value = "")]
        grid: String,
    },
    /// Measure one run, or every run of a given length.
    Measure {
        file: PathBuf,
        #[arg(long, conflicts_with = "depth")]
        run: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value = "")]
        grid: String,
        /// Slack for NFA/TA weights, or `uniform`.
        #[arg(long)]
        weights: Option<String>,
        /// Multiply per-step integrals instead of integrating the product.
        #[arg(long)]
        per_step: bool,
        /// Add a Monte-Carlo cross-check with this many samples.
        #[arg(long)]
        mc: Option<u64>,
    },
    /// Translate a machine into another class.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        /// Taylor degree for the polynomial-delay target.
        #[arg(long, default_value_t = 1)]
        pi: u32,
        #[arg(long)]
        weights: Option<String>,
        /// Write the machine here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the witness (and any weights) here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Compare two machines' run collections.
    Express {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Iso)]
        mode: ModeArg,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value = "")]
        grid: String,
        /// Grid for the second machine; defaults to --grid.
        #[arg(long)]
        grid_b: Option<String>,
        #[arg(long)]
        weights_a: Option<String>,
        #[arg(long)]
        weights_b: Option<String>,
    },
    /// Re-check the built-in counterexamples.
    Repro,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Target {
    Ta,
    Pa,
    Pta,
    Tapd,
    Sta,
    Region,
    NfaGcd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Iso,
    Hom,
}

struct Ctx<'a> {
    json: bool,
    seed: u64,
    budget: Option<u64>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, v: &Value, text: &str) -> Result<()> {
        let s = if self.json { serde_json::to_string_pretty(v).expect("json") + "\n" } else { text.to_string() };
        self.out.write_all(s.as_bytes()).map_err(|e| Error::Usage(e.to_string()))
    }

    fn run_budget(&self) -> u64 {
        self.budget.unwrap_or(DEFAULT_RUN_BUDGET)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Machine> {
    parse_machine(&read(path)?)
}

fn weights_for(m: &Machine, spec: &Option<String>) -> Result<Option<WeightAssignment>> {
    if !m.kind().needs_weights() {
        return match spec {
            Some(_) => Err(Error::Usage(format!("{} machines take no weights", m.kind()))),
            None => Ok(None),
        };
    }
    match spec.as_deref() {
        None => Err(Error::Usage(format!("{} machines need --weights <slack|uniform>", m.kind()))),
        Some("uniform") => uniform_weights(m).map(Some),
        Some(s) => assign_weights(m, &s.parse::<Rational>().map_err(|e| Error::Usage(e.to_string()))?).map(Some),
    }
}

fn grid(s: &str) -> Result<TimeGrid> {
    if s.trim().is_empty() {
        return Ok(TimeGrid::empty());
    }
    TimeGrid::parse(s).map_err(|e| Error::Usage(e.to_string()))
}

fn describe_run(m: &Machine, r: &Run) -> String {
    let mut s = m.state_name(r.states[0]).to_string();
    for i in 0..r.len() {
        let t = if r.is_timed() { format!("@{}", r.times[i]) } else { String::new() };
        s.push_str(&format!(" -{}{t}-> {}", m.action_name(r.actions[i]), m.state_name(r.states[i + 1])));
    }
    s
}

fn cmd_validate(ctx: &mut Ctx, file: &Path) -> Result<i32> {
    let m = load(file)?;
    let r = validate_machine(&m);
    let mut text = format!("{}: {}\n", r.model, if r.valid { "valid" } else { "invalid" });
    for v in &r.violations {
        text.push_str(&format!("  {v}\n"));
    }
    ctx.emit(&serde_json::to_value(&r).expect("report"), &text)?;
    Ok(if r.valid { 0 } else { 3 })
}

fn cmd_runs(ctx: &mut Ctx, file: &Path, depth: usize, g: &str) -> Result<i32> {
    let m = load(file)?;
    let runs = enumerate_runs_with_budget(&m, depth, &grid(g)?, ctx.run_budget())?;
    let text: String = runs.iter().map(|r| describe_run(&m, r) + "\n").collect::<String>()
        + &format!("{} run(s)\n", runs.len());
    let v = json!({ "count": runs.len(), "runs": runs.iter().map(|r| r.to_json(&m)).collect::<Vec<_>>() });
    ctx.emit(&v, &text)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_measure(
    ctx: &mut Ctx,
    file: &Path,
    run: &Option<PathBuf>,
    depth: Option<usize>,
    g: &str,
    weights: &Option<String>,
    per_step: bool,
    mc: Option<u64>,
) -> Result<i32> {
    let m = load(file)?;
    let w = weights_for(&m, weights)?;
    let opts = MeasureOptions { per_step_product: per_step, ..Default::default() };
    let runs = match (run, depth) {
        (Some(p), None) => {
            let v: Value = serde_json::from_str(&read(p)?).map_err(|e| Error::Parse(e.to_string()))?;
            vec![Run::from_json(&m, &v)?]
        }
        (None, Some(k)) => enumerate_runs_with_budget(&m, k, &grid(g)?, ctx.run_budget())?,
        _ => return Err(Error::Usage("give exactly one of --run or --depth".into())),
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    for r in &runs {
        let h = measure_run_with(&m, w.as_ref(), r, &opts)?;
        let mut row = json!({ "run": r.to_json(&m), "measure": h });
        text.push_str(&format!("{}  H = {h}\n", describe_run(&m, r)));
        if let Some(n) = mc {
            let e = mc_estimate(&m, r, n, ctx.seed)?;
            text.push_str(&format!("  monte-carlo {:.12} ± {:.3e} ({} samples)\n", e.estimate, e.std_error, e.samples));
            row["monte_carlo"] = json!({ "estimate": e.estimate, "std_error": e.std_error, "samples": e.samples });
        }
        rows.push(row);
    }
    let mut v = json!({ "runs": rows });
    if runs.len() > 1 {
        let total = measure_runset_with(&m, w.as_ref(), &runs, &opts)?;
        text.push_str(&format!("L = {}\n", total.value));
        for warn in &total.warnings {
            text.push_str(&format!("warning: {warn}\n"));
        }
        v["collection"] = json!({ "measure": total.value, "warnings": total.warnings });
    }
    ctx.emit(&v, &text)?;
    Ok(0)
}

fn cmd_translate(
    ctx: &mut Ctx,
    file: &Path,
    to: Target,
    pi: u32,
    weights: &Option<String>,
    out: &Option<PathBuf>,
    witness: &Option<PathBuf>,
) -> Result<i32> {
    let m = load(file)?;
    let budget = ctx.budget;
    let t = match to {
        Target::Ta => tr::nfa_to_timed(&m)?,
        Target::Pa => tr::nfa_to_prob(&m)?,
        Target::Pta => match m.kind() {
            crate::automata::ModelKind::Ta => tr::timed_to_probtimed(&m)?,
            _ => tr::prob_to_probtimed(&m)?,
        },
        Target::Tapd => tr::probtimed_to_delay(&m, pi)?,
        Target::Sta => tr::delay_to_stochastic(&m)?,
        Target::Region => {
            let w = weights_for(&m, weights)?.ok_or_else(|| Error::Usage("region needs a timed automaton".into()))?;
            tr::region_automaton(&m, &w, budget.map_or(tr::DEFAULT_REGION_BUDGET, |b| b as usize))?
        }
        Target::NfaGcd => match m.kind() {
            crate::automata::ModelKind::Pta => {
                tr::probtimed_to_timed(&m, budget.map_or(tr::DEFAULT_SPLIT_BUDGET, |b| b as usize))?
            }
            _ => tr::prob_to_nfa_gcd(&m, budget.map_or(tr::DEFAULT_SPLIT_BUDGET, |b| b as usize))?,
        },
    };
    let mut wit = t.witness.to_json(&m, &t.machine);
    if let Some(w) = &t.weights {
        wit["weights"] = json!(w.weights().iter().map(|x| x.to_string()).collect::<Vec<_>>());
    }
    let machine_text = serialize_machine(&t.machine);
    if let Some(p) = witness {
        std::fs::write(p, serde_json::to_string_pretty(&wit).expect("json") + "\n")
            .map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?;
    }
    let text = match out {
        Some(p) => {
            std::fs::write(p, &machine_text).map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?;
            format!(
                "{} with {} states and {} edges written to {}\n",
                t.machine.kind(),
                t.machine.num_states(),
                t.machine.num_edges(),
                p.display()
            )
        }
        None => machine_text,
    };
    let v = json!({ "machine": crate::format::machine_to_value(&t.machine), "witness": wit });
    ctx.emit(&v, &text)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_express(
    ctx: &mut Ctx,
    fa: &Path,
    fb: &Path,
    mode: ModeArg,
    depth: usize,
    g: &str,
    gb: &Option<String>,
    wa: &Option<String>,
    wb: &Option<String>,
) -> Result<i32> {
    let (a, b) = (load(fa)?, load(fb)?);
    let (wa, wb) = (weights_for(&a, wa)?, weights_for(&b, wb)?);
    let grid_a = grid(g)?;
    let grid_b = match gb {
        Some(s) => grid(s)?,
        None => grid_a.clone(),
    };
    let mut opts = CheckOptions::new(depth, grid_a);
    opts.grid_b = grid_b;
    if let Some(bud) = ctx.budget {
        opts.run_budget = bud;
        opts.search_budget = bud;
    }
    let r = match mode {
        ModeArg::Iso => check_machine_iso(&a, wa.as_ref(), &b, wb.as_ref(), &opts)?,
        ModeArg::Hom => check_machine_hom(&a, wa.as_ref(), &b, wb.as_ref(), &opts)?,
    };
    let v = r.to_json();
    let mut text = format!("verdict: {}\n", v["verdict"].as_str().unwrap_or("?"));
    text.push_str(&format!("scope: {}\n", v["scope"].as_str().unwrap_or("")));
    if let Some(w) = &r.witness {
        text.push_str(&format!("witness: {w}\n"));
    }
    if let Some(c) = &r.counter_evidence {
        text.push_str(&format!("evidence: {c}\n"));
    }
    if r.subsets_checked > 0 {
        text.push_str(&format!("collection subsets checked: {} (cap {})\n", r.subsets_checked, r.subset_cap));
    }
    ctx.emit(&v, &text)?;
    Ok(match r.verdict {
        Verdict::Yes => 0,
        Verdict::No => 1,
        Verdict::Unknown => 4,
    })
}

fn cmd_repro(ctx: &mut Ctx) -> Result<i32> {
    let r = verify_counterexamples()?;
    let mut text = String::new();
    for i in &r.items {
        text.push_str(&format!("[{}] {}\n", if i.passed { "pass" } else { "FAIL" }, i.name));
        if let Value::Object(map) = &i.detail {
            for (k, v) in map {
                if k != "instances" {
                    text.push_str(&format!("    {k}: {v}\n"));
                }
            }
            if let Some(Value::Array(xs)) = map.get("instances") {
                for x in xs {
                    text.push_str(&format!(
                        "    states={} constraints={} shape={} nodes={} solution={}\n",
                        x["states"], x["constraints"], x["shape"], x["nodes"], x["solution"]
                    ));
                }
            }
        }
    }
    ctx.emit(&serde_json::to_value(&r).expect("report"), &text)?;
    Ok(if r.all_passed() { 0 } else { 1 })
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let budget = match std::env::var(BUDGET_ENV) {
        Ok(s) => match s.trim().parse::<u64>() {
            Ok(b) => Some(b),
            Err(_) => {
                let _ = writeln!(err, "usage error: {BUDGET_ENV} must be a positive integer");
                return 2;
            }
        },
        Err(_) => None,
    };
    let mut ctx = Ctx { json: cli.json, seed: cli.seed, budget, out };
    let res = match &cli.cmd {
        Command::Validate { file } => cmd_validate(&mut ctx, file),
        Command::Runs { file, depth, grid } => cmd_runs(&mut ctx, file, *depth, grid),
        Command::Measure { file, run, depth, grid, weights, per_step, mc } => {
            cmd_measure(&mut ctx, file, run, *depth, grid, weights, *per_step, *mc)
        }
        Command::Translate { file, to, pi, weights, out, witness } => {
            cmd_translate(&mut ctx, file, *to, *pi, weights, out, witness)
        }
        Command::Express { file_a, file_b, mode, depth, grid, grid_b, weights_a, weights_b } => {
            cmd_express(&mut ctx, file_a, file_b, *mode, *depth, grid, grid_b, weights_a, weights_b)
        }
        Command::Repro => cmd_repro(&mut ctx),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
