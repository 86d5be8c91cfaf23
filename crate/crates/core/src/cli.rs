//! The `paracsp` command line.
//!
//! Exit codes: 0 satisfiable / accepted / pass, 1 unsatisfiable / rejected /
//! fail, 2 usage or validation error, 3 method not applicable.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::format::{parse_instance, parse_machine, serialize_instance_with, serialize_machine, WriteOptions};
use crate::fpt::{solve_w_kt, solve_w_kue};
use crate::instances::{
    brute_force_solve, lift_kle_to_k, naive_solve, random_instance, Assignment, GenConfig, Instance, Profile,
    WeightMode,
};
use crate::machine::{
    pipeline_machine, reduce_appearance, reduce_completion, reduce_cw, run_wd_pipeline, simulate_with,
    GuessCheckMachine, Strategy,
};
use crate::partials::compute_partials;
use crate::relations::{CostModel, WeightKind, WeightSet};

#[derive(Debug, Parser)]
#[command(name = "paracsp", version, about = "Weight-parameterized Boolean CSP toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide an instance and print a witness or UNSAT.
    Solve {
        /// Instance document, `-` for stdin.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Brute)]
        method: Method,
        /// Member-size bound for the completion pipeline; defaults to the
        /// largest member size in the body.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Compile an instance into a machine or a reduced instance.
    Reduce {
        input: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a machine document.
    Simulate {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = StrategyArg::Exhaustive)]
        strategy: StrategyArg,
        /// Also print the budget and step counts.
        #[arg(long)]
        budget_report: bool,
    },
    /// Print the partial sets of one body constraint with their completions.
    Partials {
        input: PathBuf,
        /// 0-based index into the body constraints.
        #[arg(long)]
        constraint: usize,
    },
    /// Print the weight parameter and u, t, e.
    Stats { input: PathBuf },
    /// Write a random instance.
    Gen {
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cross-check a method against brute force on a generated corpus.
    Verify {
        #[arg(long, value_enum)]
        method: VerifyMethod,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit one CSV row per instance on stdout; the summary goes to
        /// stderr.
        #[arg(long, value_enum)]
        report: Option<ReportFormat>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Brute,
    FptKue,
    FptKt,
    AppearanceMachine,
    CwMachine,
    CompletionPipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// Appearance machine (at-most instances are lifted first).
    Appearance,
    /// Table-driven machine for `CW^{[b]}` bodies.
    Cw,
    /// The completion reduction, as an instance document.
    WCw,
    /// The combined machine the completion pipeline simulates.
    Pipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMethod {
    Brute,
    FptKue,
    FptKt,
    AppearanceMachine,
    CwMachine,
    Completion,
    CompletionPipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Finite,
    Cofinite,
    Even,
    Odd,
    MixedW,
    Parity,
    ExactCnf,
    Cw,
    Explicit,
    Mixed,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value_t = ProfileArg::Mixed)]
    profile: ProfileArg,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long)]
    at_most: bool,
    #[arg(long, default_value_t = 1)]
    min_body: usize,
    #[arg(long, default_value_t = 4)]
    max_body: usize,
    #[arg(long, default_value_t = 1)]
    min_arity: usize,
    #[arg(long, default_value_t = 4)]
    max_arity: usize,
    /// `b` for the cw profile.
    #[arg(long, default_value_t = 1)]
    b: usize,
    /// Largest member size for the explicit profile.
    #[arg(long, default_value_t = 2)]
    max_member: usize,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Include the weight constraint as the first listed constraint.
    #[arg(long)]
    materialize_weight_constraint: bool,
}

impl GenArgs {
    fn config(&self) -> GenConfig {
        let profile = match self.profile {
            ProfileArg::Finite => Profile::SharedW(WeightKind::Finite),
            ProfileArg::Cofinite => Profile::SharedW(WeightKind::Cofinite),
            ProfileArg::Even => Profile::SharedW(WeightKind::Even),
            ProfileArg::Odd => Profile::SharedW(WeightKind::Odd),
            ProfileArg::MixedW => Profile::MixedW,
            ProfileArg::Parity => Profile::Parity,
            ProfileArg::ExactCnf => Profile::FixedW(WeightSet::finite([1])),
            ProfileArg::Cw => Profile::Cw { b: self.b },
            ProfileArg::Explicit => Profile::Explicit { max_member: self.max_member },
            ProfileArg::Mixed => Profile::Mixed,
        };
        GenConfig {
            n: self.n,
            k: self.k,
            at_most: self.at_most,
            min_body: self.min_body,
            max_body: self.max_body,
            min_arity: self.min_arity,
            max_arity: self.max_arity,
            profile,
        }
    }
}

/// Failure of a command: the exit code and a one-line message.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotApplicable(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

/// Precondition failures of a solving method mean the method does not apply.
fn not_applicable(e: Error) -> Failure {
    match e {
        Error::Usage(m) | Error::NotApplicable(m) | Error::Capacity(m) => {
            Failure { code: 3, message: format!("not applicable: {m}") }
        }
        other => other.into(),
    }
}

type CmdResult = std::result::Result<u8, Failure>;

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure { code: 2, message: format!("{}: {e}", path.display()) })
}

fn load_instance(path: &Path) -> std::result::Result<Instance, Failure> {
    Ok(parse_instance(&read_input(path)?)?)
}

fn emit(out: &mut dyn Write, args: &OutputArgs, text: &str) -> std::result::Result<(), Failure> {
    match &args.output {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn witness_line(inst_names: &[String], w: &Option<Assignment>) -> String {
    match w {
        None => "UNSAT".into(),
        Some(a) => {
            let names: Vec<&str> = a.iter().map(|v| inst_names[v.0].as_str()).collect();
            if names.is_empty() {
                "SAT".into()
            } else {
                format!("SAT {}", names.join(" "))
            }
        }
    }
}

fn default_d(inst: &Instance) -> usize {
    inst.body()
        .iter()
        .filter_map(|c| c.relation().max_member_size())
        .max()
        .unwrap_or(0)
}

/// Appearance machine for any weight mode; padding from the lift is
/// dropped from the witness.
fn solve_by_appearance(inst: &Instance) -> Result<Option<Assignment>> {
    let lifted;
    let exact = if inst.weight().mode == WeightMode::AtMost {
        lifted = lift_kle_to_k(inst)?;
        &lifted
    } else {
        inst
    };
    let m = reduce_appearance(exact, &CostModel::default())?;
    let r = simulate_with(&m, Strategy::Pruned);
    Ok(r.witness.map(|w| Assignment::new(w.iter().filter(|v| v.0 < inst.num_vars()))))
}

fn solve_by_cw(inst: &Instance) -> Result<Option<Assignment>> {
    let m = reduce_cw(inst)?;
    Ok(simulate_with(&m, Strategy::Pruned).witness)
}

fn solve_with(inst: &Instance, method: Method, d: Option<usize>) -> Result<Option<Assignment>> {
    match method {
        Method::Brute => Ok(brute_force_solve(inst)),
        Method::FptKue => solve_w_kue(inst),
        Method::FptKt => solve_w_kt(inst),
        Method::AppearanceMachine => solve_by_appearance(inst),
        Method::CwMachine => solve_by_cw(inst),
        Method::CompletionPipeline => {
            Ok(run_wd_pipeline(inst, d.unwrap_or_else(|| default_d(inst)), &CostModel::default())?.witness)
        }
    }
}

fn cmd_solve(out: &mut dyn Write, input: &Path, method: Method, d: Option<usize>) -> CmdResult {
    let inst = load_instance(input)?;
    let w = solve_with(&inst, method, d).map_err(not_applicable)?;
    writeln!(out, "{}", witness_line(inst.variables(), &w))?;
    Ok(if w.is_some() { 0 } else { 1 })
}

fn cmd_reduce(out: &mut dyn Write, input: &Path, to: Target, d: Option<usize>, args: &OutputArgs) -> CmdResult {
    let inst = load_instance(input)?;
    let cm = CostModel::default();
    let text = match to {
        Target::Appearance => {
            let exact = if inst.weight().mode == WeightMode::AtMost { lift_kle_to_k(&inst)? } else { inst };
            serialize_machine(&reduce_appearance(&exact, &cm).map_err(not_applicable)?)
        }
        Target::Cw => serialize_machine(&reduce_cw(&inst).map_err(not_applicable)?),
        Target::WCw => {
            let d = d.unwrap_or_else(|| default_d(&inst));
            let r = reduce_completion(&inst, d).map_err(not_applicable)?;
            let opts = WriteOptions { materialize_weight_constraint: args.materialize_weight_constraint };
            serialize_instance_with(&r.instance, opts)
        }
        Target::Pipeline => {
            let d = d.unwrap_or_else(|| default_d(&inst));
            serialize_machine(&pipeline_machine(&inst, d, &cm).map_err(not_applicable)?.machine)
        }
    };
    emit(out, args, &text)?;
    Ok(0)
}

fn cmd_simulate(out: &mut dyn Write, input: &Path, strategy: StrategyArg, report: bool) -> CmdResult {
    let m: GuessCheckMachine = parse_machine(&read_input(input)?)?;
    let strategy = match strategy {
        StrategyArg::Exhaustive => Strategy::Exhaustive,
        StrategyArg::Pruned => Strategy::Pruned,
    };
    let r = simulate_with(&m, strategy);
    match &r.witness {
        Some(w) => {
            let names: Vec<&str> = w.iter().map(|v| m.universe()[v.0].as_str()).collect();
            writeln!(out, "ACCEPT {}", names.join(" ").trim_end())?;
        }
        None => writeln!(out, "REJECT")?,
    }
    if report {
        writeln!(out, "checker={}", m.kind_name())?;
        writeln!(out, "budget={}", m.budget())?;
        writeln!(out, "max_branch_steps={}", r.max_branch_steps)?;
        writeln!(out, "branches={}", r.branches)?;
        writeln!(out, "overruns={}", r.overruns)?;
    }
    Ok(if r.accepted { 0 } else { 1 })
}

fn cmd_partials(out: &mut dyn Write, input: &Path, index: usize) -> CmdResult {
    let inst = load_instance(input)?;
    let c = inst.body().get(index).ok_or_else(|| Failure {
        code: 2,
        message: format!("constraint {index} does not exist; the body has {}", inst.body().len()),
    })?;
    let table = compute_partials(c.relation()).map_err(not_applicable)?;
    out.write_all(table.render().as_bytes())?;
    Ok(0)
}

fn cmd_stats(out: &mut dyn Write, input: &Path) -> CmdResult {
    let inst = load_instance(input)?;
    writeln!(out, "{}", inst.weight())?;
    writeln!(out, "n={}", inst.num_vars())?;
    writeln!(out, "u={}", inst.param_u())?;
    writeln!(out, "t={}", inst.param_t())?;
    writeln!(out, "e={}", inst.param_e())?;
    Ok(0)
}

fn cmd_gen(out: &mut dyn Write, gen: &GenArgs, seed: u64, args: &OutputArgs) -> CmdResult {
    let inst = random_instance(seed, &gen.config())?;
    let opts = WriteOptions { materialize_weight_constraint: args.materialize_weight_constraint };
    emit(out, args, &serialize_instance_with(&inst, opts))?;
    Ok(0)
}

/// One corpus instance for `method`, drawn from `rng`.
fn corpus_instance(method: VerifyMethod, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let seed: u64 = rng.gen();
    let kinds = [WeightKind::Finite, WeightKind::Cofinite, WeightKind::Even, WeightKind::Odd];
    let cfg = match method {
        VerifyMethod::Brute | VerifyMethod::AppearanceMachine => {
            let mut c = GenConfig::new(rng.gen_range(1..=12), rng.gen_range(0..=3), Profile::Mixed);
            c.at_most = method == VerifyMethod::AppearanceMachine && rng.gen_bool(0.3);
            c
        }
        VerifyMethod::FptKue | VerifyMethod::FptKt => {
            let kind = kinds[rng.gen_range(0..kinds.len())];
            let mut c = GenConfig::new(rng.gen_range(1..=14), rng.gen_range(0..=4), Profile::SharedW(kind));
            c.at_most = rng.gen_bool(0.3);
            c.max_arity = 6;
            c
        }
        VerifyMethod::CwMachine => {
            GenConfig::new(rng.gen_range(1..=12), rng.gen_range(0..=3), Profile::Cw { b: rng.gen_range(0..=2) })
        }
        VerifyMethod::Completion => {
            let mut c = GenConfig::new(
                rng.gen_range(1..=8),
                rng.gen_range(0..=3),
                Profile::Explicit { max_member: rng.gen_range(1..=3) },
            );
            c.max_body = 3;
            c
        }
        VerifyMethod::CompletionPipeline => {
            let mut c = GenConfig::new(rng.gen_range(1..=8), rng.gen_range(0..=3), Profile::FixedW(WeightSet::finite([1])));
            c.max_body = 3;
            c
        }
    };
    random_instance(seed, &cfg)
}

/// Decision of `method` on `inst`; `None` when the method does not apply.
fn verify_decision(method: VerifyMethod, inst: &Instance) -> Result<Option<(bool, Option<Assignment>)>> {
    let solved = match method {
        VerifyMethod::Brute => Ok(naive_solve(inst)),
        VerifyMethod::FptKue => solve_w_kue(inst),
        VerifyMethod::FptKt => solve_w_kt(inst),
        VerifyMethod::AppearanceMachine => solve_by_appearance(inst),
        VerifyMethod::CwMachine => solve_by_cw(inst),
        VerifyMethod::CompletionPipeline => solve_wd_pipeline_default(inst),
        VerifyMethod::Completion => {
            let d = default_d(inst).max(1);
            let r = reduce_completion(inst, d)?;
            return Ok(Some((brute_force_solve(&r.instance).is_some(), None)));
        }
    };
    match solved {
        Ok(w) => Ok(Some((w.is_some(), w))),
        Err(Error::Usage(_) | Error::NotApplicable(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn solve_wd_pipeline_default(inst: &Instance) -> Result<Option<Assignment>> {
    Ok(run_wd_pipeline(inst, default_d(inst).max(1), &CostModel::default())?.witness)
}

fn cmd_verify(
    out: &mut dyn Write,
    err: &mut dyn Write,
    method: VerifyMethod,
    count: usize,
    seed: u64,
    report: Option<ReportFormat>,
) -> CmdResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = report.map(|_| csv::Writer::from_writer(Vec::new()));
    if let Some(w) = csv.as_mut() {
        w.write_record(["index", "n", "k", "mode", "constraints", "oracle", "method", "agree"])
            .map_err(|e| Failure { code: 2, message: e.to_string() })?;
    }
    let (mut mismatches, mut skipped) = (0usize, 0usize);
    for index in 0..count {
        let inst = corpus_instance(method, &mut rng)?;
        let oracle = brute_force_solve(&inst).is_some();
        let (verdict, agree) = match verify_decision(method, &inst)? {
            None => {
                skipped += 1;
                ("n/a".to_string(), true)
            }
            Some((sat, witness)) => {
                let valid = match &witness {
                    Some(w) => inst.satisfies(w)?,
                    None => true,
                };
                let agree = sat == oracle && valid;
                if !agree {
                    mismatches += 1;
                }
                (if sat { "sat" } else { "unsat" }.to_string(), agree)
            }
        };
        if let Some(w) = csv.as_mut() {
            let mode = match inst.weight().mode {
                WeightMode::Exact => "exact",
                WeightMode::AtMost => "atmost",
            };
            w.write_record([
                index.to_string(),
                inst.num_vars().to_string(),
                inst.weight().k.to_string(),
                mode.to_string(),
                inst.body().len().to_string(),
                if oracle { "sat" } else { "unsat" }.to_string(),
                verdict,
                agree.to_string(),
            ])
            .map_err(|e| Failure { code: 2, message: e.to_string() })?;
        }
    }
    let verdict = if mismatches == 0 { "PASS" } else { "FAIL" };
    let summary = format!(
        "verify {}: {count} instances, {mismatches} mismatches, {skipped} not applicable: {verdict}",
        method.to_possible_value().expect("no skipped variants").get_name()
    );
    match csv {
        Some(w) => {
            let bytes = w.into_inner().map_err(|e| Failure { code: 2, message: e.to_string() })?;
            out.write_all(&bytes)?;
            writeln!(err, "{summary}")?;
        }
        None => writeln!(out, "{summary}")?,
    }
    Ok(if mismatches == 0 { 0 } else { 1 })
}

/// Runs the command line `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve { input, method, d } => cmd_solve(out, input, *method, *d),
        Command::Reduce { input, to, d, out: o } => cmd_reduce(out, input, *to, *d, o),
        Command::Simulate { input, strategy, budget_report } => cmd_simulate(out, input, *strategy, *budget_report),
        Command::Partials { input, constraint } => cmd_partials(out, input, *constraint),
        Command::Stats { input } => cmd_stats(out, input),
        Command::Gen { gen, seed, out: o } => cmd_gen(out, gen, *seed, o),
        Command::Verify { method, count, seed, report } => cmd_verify(out, err, *method, *count, *seed, *report),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
