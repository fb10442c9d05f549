mod claims;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roofkit::io::{self, StateFile};
use roofkit::maximal::{self, Verdict};
use roofkit::measures::{self, Extension, MeasureError};
use roofkit::random::{self, FULL_RANK_FLOOR};
use roofkit::roofs::{Budget, RoofError};
use roofkit::simplexfn::Builtin;
use roofkit::states::{BipartiteState, DensityMatrix};

use report::{sha256_hex, Row, RunReport};

const EXIT_VALIDATION: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_NEGATIVE: u8 = 4;
const EXIT_INCONCLUSIVE: u8 = 5;

#[derive(Parser)]
#[command(
    name = "roofkit",
    version,
    about = "Convex-roof and assistance quantities of coherence and entanglement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a coherence or entanglement quantity of a state file.
    Compute(ComputeArgs),
    /// Certify a state as assisted maximally coherent or entangled.
    Certify(CertifyArgs),
    /// Write a seeded random state.
    Random(RandomArgs),
    /// Run the claim suite and print a pass/fail table.
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Clone)]
struct BudgetArgs {
    /// Optimizer restarts.
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    /// Maximum sweeps per restart.
    #[arg(long, default_value_t = 200)]
    sweeps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Shorthand, e.g. `--budget restarts=4 sweeps=50`.
    #[arg(long, num_args = 1.., value_name = "KEY=VALUE")]
    budget: Vec<String>,
}

impl BudgetArgs {
    fn resolve(&self) -> Result<Budget, String> {
        let mut b = Budget {
            restarts: self.restarts,
            sweeps: self.sweeps,
            seed: self.seed,
        };
        for item in self
            .budget
            .iter()
            .flat_map(|s| s.split(','))
            .filter(|s| !s.is_empty())
        {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| format!("budget entry {item:?} is not KEY=VALUE"))?;
            let v: u64 = v
                .parse()
                .map_err(|_| format!("budget value {v:?} is not an integer"))?;
            match k {
                "restarts" => b.restarts = v as usize,
                "sweeps" => b.sweeps = v as usize,
                "seed" => b.seed = v,
                other => return Err(format!("unknown budget key {other:?}")),
            }
        }
        Ok(b)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MeasureKind {
    Coherence,
    Entanglement,
}

#[derive(Args)]
struct OutputArgs {
    /// Print the report as JSON.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Print the report as CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct ComputeArgs {
    state: PathBuf,
    #[arg(long, value_enum)]
    measure: MeasureKind,
    #[arg(long = "f", default_value = "shannon")]
    f: Builtin,
    #[arg(long, default_value = "assist")]
    extension: Extension,
    /// Ensemble size; defaults to min(r², 16).
    #[arg(long)]
    cardinality: Option<usize>,
    /// Write the optimal ensemble to this file.
    #[arg(long, value_name = "FILE")]
    emit_witness: Option<PathBuf>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct CertifyArgs {
    state: PathBuf,
    #[arg(long, conflicts_with = "ame", required_unless_present = "ame")]
    amc: bool,
    #[arg(long)]
    ame: bool,
    #[command(flatten)]
    budget: BudgetArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum RandomKind {
    GinibreFullRank,
    HaarPure,
    SchmidtCorrelated,
    AmcWitnessed,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, value_enum)]
    kind: RandomKind,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    dim: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output if omitted.
    out: Option<PathBuf>,
    /// Where amc-witnessed writes its generating ensemble; defaults to
    /// `<out>.ensemble.json`.
    #[arg(long, value_name = "FILE")]
    ensemble_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match cli.command {
        Command::Compute(a) => compute(a),
        Command::Certify(a) => certify(a),
        Command::Random(a) => random_state(a),
        Command::VerifyPaper(a) => verify(a),
    };
    eprintln!("wall time {:.3} s", started.elapsed().as_secs_f64());
    code
}

fn configure_threads() {
    let Ok(v) = std::env::var("ROOFKIT_THREADS") else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(0) => {}
        Ok(n) => {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
        Err(_) => eprintln!("ignoring ROOFKIT_THREADS={v:?}: not a number"),
    }
}

fn command_echo() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    format!("roofkit {}", args.join(" "))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn load_state(path: &Path) -> Result<(Vec<u8>, StateFile), ExitCode> {
    let bytes =
        fs::read(path).map_err(|e| fail(EXIT_VALIDATION, format!("{}: {e}", path.display())))?;
    let text = String::from_utf8_lossy(&bytes);
    match io::parse_state(&text) {
        Ok(s) => Ok((bytes, s)),
        Err(e) => Err(fail(
            EXIT_VALIDATION,
            format!("{}: {} violated: {e}", path.display(), e.invariant()),
        )),
    }
}

fn print_report(report: &RunReport, output: &OutputArgs) {
    if output.json {
        println!("{}", report.to_json());
    } else if output.csv {
        print!("{}", report.to_csv());
    } else {
        print!("{}", report.to_table());
    }
}

fn measure_exit(e: &MeasureError) -> u8 {
    match e {
        MeasureError::State(_) | MeasureError::Roof(RoofError::State(_)) => EXIT_VALIDATION,
        MeasureError::Roof(_) => EXIT_BUDGET,
    }
}

fn quantity_name(measure: MeasureKind, ext: Extension, f: Builtin) -> (String, &'static str) {
    let (sym, anchor) = match (measure, ext) {
        (MeasureKind::Coherence, Extension::PureOnly) => {
            ("C_f", "coherence measure for pure state")
        }
        (MeasureKind::Coherence, Extension::ConvexRoof) => ("C_c", "coherence of convex roof"),
        (MeasureKind::Coherence, Extension::Assistance) => {
            ("C_a", "define the coherence of assistance")
        }
        (MeasureKind::Entanglement, Extension::PureOnly) => {
            ("E_f", "yields an entanglement monotone")
        }
        (MeasureKind::Entanglement, Extension::ConvexRoof) => {
            ("E_c", "entanglement of convex roof")
        }
        (MeasureKind::Entanglement, Extension::Assistance) => {
            ("E_a", "entanglement of assistance can be defined")
        }
    };
    (format!("{sym}[{f}]"), anchor)
}

fn compute(a: ComputeArgs) -> ExitCode {
    let budget = match a.budget.resolve() {
        Ok(b) => b,
        Err(e) => return fail(EXIT_BUDGET, e),
    };
    let (bytes, file) = match load_state(&a.state) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let result = match a.measure {
        MeasureKind::Coherence => {
            measures::coherence(&file.density(), &a.f, a.extension, budget, a.cardinality)
        }
        MeasureKind::Entanglement => {
            let Some(st) = file.bipartite() else {
                return fail(
                    EXIT_VALIDATION,
                    format!(
                        "entanglement needs bipartite dims [nA, nB], got {:?}",
                        file.dims
                    ),
                );
            };
            measures::entanglement(&st, &a.f, a.extension, budget, a.cardinality)
        }
    };
    let result = match result {
        Ok(r) => r,
        Err(e) => return fail(measure_exit(&e), e),
    };
    if let Some(path) = &a.emit_witness {
        if let Err(e) = fs::write(path, io::ensemble_to_json(&result.witness, &file.dims)) {
            return fail(EXIT_VALIDATION, format!("{}: {e}", path.display()));
        }
    }
    let (quantity, anchor) = quantity_name(a.measure, a.extension, a.f);
    let mut row = Row::new("value", anchor, quantity);
    row.value = result.value;
    row.bracket = result.bracket;
    row.tolerance = roofkit::roofs::TIGHT_TOL;
    row.pass = result.converged;
    row.detail = format!(
        "converged {}, tight {}, members {}, sweeps {}",
        result.converged,
        result.tight(),
        result.witness.len(),
        result.iterations
    );
    let report = RunReport {
        command: command_echo(),
        inputs_digest: sha256_hex(&bytes),
        seed: budget.seed,
        rows: vec![row],
    };
    print_report(&report, &a.output);
    ExitCode::SUCCESS
}

fn certify(a: CertifyArgs) -> ExitCode {
    let budget = match a.budget.resolve() {
        Ok(b) => b,
        Err(e) => return fail(EXIT_BUDGET, e),
    };
    let (_, file) = match load_state(&a.state) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let cert = if a.ame {
        let Some(st) = file.bipartite() else {
            return fail(
                EXIT_VALIDATION,
                format!("--ame needs bipartite dims [n, n], got {:?}", file.dims),
            );
        };
        match maximal::certify_ame(&st, budget) {
            Ok(c) => c,
            Err(e) => return fail(EXIT_VALIDATION, e),
        }
    } else {
        maximal::certify_amc(&file.density(), budget)
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&io::certificate_json(&cert)).expect("certificate serializes")
    );
    match cert.verdict {
        Verdict::Amc | Verdict::Ame => ExitCode::SUCCESS,
        Verdict::NotAmc | Verdict::NotAme => ExitCode::from(EXIT_NEGATIVE),
        Verdict::Inconclusive => ExitCode::from(EXIT_INCONCLUSIVE),
    }
}

fn random_state(a: RandomArgs) -> ExitCode {
    let n = a.dim as usize;
    let mut rng = random::named_rng(a.seed, "random-state");
    let mut sidecar = None;
    let file = match a.kind {
        RandomKind::GinibreFullRank => StateFile::from_density(
            vec![n],
            random::ginibre_full_rank(n, FULL_RANK_FLOOR, &mut rng),
        ),
        RandomKind::HaarPure => StateFile::from_pure(vec![n], random::haar_pure(n, &mut rng)),
        RandomKind::SchmidtCorrelated => {
            let mc = measures::embed_mc(&random::ginibre(n, &mut rng));
            let st: BipartiteState = mc.to_bipartite();
            StateFile::from_density(vec![n, n], st.density())
        }
        RandomKind::AmcWitnessed => {
            let ens = random::amc_witnessed(n, n + 1, &mut rng);
            let rho: DensityMatrix = ens.target().clone();
            sidecar = Some(io::ensemble_to_json(&ens, &[n]));
            StateFile::from_density(vec![n], rho)
        }
    };
    let text = file.to_json();
    match &a.out {
        None => println!("{text}"),
        Some(path) => {
            if let Err(e) = fs::write(path, text + "\n") {
                return fail(EXIT_VALIDATION, format!("{}: {e}", path.display()));
            }
        }
    }
    if let Some(ens) = sidecar {
        let target = a.ensemble_out.clone().or_else(|| {
            a.out.as_ref().map(|p| {
                let mut s = p.clone().into_os_string();
                s.push(".ensemble.json");
                PathBuf::from(s)
            })
        });
        if let Some(path) = target {
            if let Err(e) = fs::write(&path, ens + "\n") {
                return fail(EXIT_VALIDATION, format!("{}: {e}", path.display()));
            }
        }
    }
    ExitCode::SUCCESS
}

fn verify(a: VerifyArgs) -> ExitCode {
    let budget = match a.budget.resolve() {
        Ok(b) => b,
        Err(e) => return fail(EXIT_BUDGET, e),
    };
    let command = command_echo();
    let report = RunReport {
        inputs_digest: sha256_hex(command.as_bytes()),
        command,
        seed: budget.seed,
        rows: claims::run(budget.seed, budget),
    };
    print_report(&report, &a.output);
    match report.first_failure() {
        None => ExitCode::SUCCESS,
        Some(row) => fail(1, format!("row {} failed", row.name)),
    }
}
