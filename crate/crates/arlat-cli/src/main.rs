use arlat::ars::{almost_split_sequence_with, AssOptions};
use arlat::dvr::{DvrContext, ElementJson};
use arlat::heller::{closed_form_zi, heller_lattice, module_mi, FiniteModuleJson};
use arlat::lattice::{iso_test, IsoOptions, IsoResult, Lattice, LatticeJson};
use arlat::quiver::{build_component_with, subadditive_check, tube_report, ComponentOptions, SubadditiveEntry, TubeReport};
use arlat::verify::{run, Report, VerifyConfig};
use arlat::Error;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "arlat", version, about = "Heller lattices, almost split sequences and AR components over O[X]/(X^n)")]
struct Cli {
    /// Characteristic of the residue field.
    #[arg(long, global = true, default_value_t = 101)]
    p: u32,
    /// Absolute ε-adic precision; defaults to max(32, 6n).
    #[arg(long, global = true, env = "ARLAT_PRECISION")]
    precision: Option<usize>,
    /// Seed for randomized isomorphism tests.
    #[arg(long, global = true, default_value_t = 0)]
    random_seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Heller lattice of M_i = κ[X]/(X^{n−i}) with its closed form.
    Heller {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Almost split sequence ending at a lattice.
    Ass {
        #[command(flatten)]
        seed: SeedSpec,
        /// Skip the explicit section search (the remaining certificate is still checked).
        #[arg(long)]
        no_section_check: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explore the stable AR component containing a lattice.
    Component {
        #[command(flatten)]
        seed: SeedSpec,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Maximum number of vertices before giving up.
        #[arg(long, default_value_t = 200)]
        max_vertices: usize,
    },
    /// Run every reproducible claim and report per-claim verdicts.
    VerifyPaper {
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, value_delimiter = ',', default_value = "101")]
        p_list: Vec<u32>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Random matrices per size for the Smith form property.
        #[arg(long, default_value_t = 1000)]
        snf_samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SeedSpec {
    /// Use the closed form Z_i for the given n and i.
    #[arg(long, num_args = 2, value_names = ["N", "I"])]
    zi: Option<Vec<usize>>,
    /// Read a lattice JSON file.
    #[arg(long)]
    lattice: Option<PathBuf>,
}

/// Write a line to stdout; a closed pipe (e.g. `| head`) is not an error.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = writeln!(out, "{line}") {
        if e.kind() != std::io::ErrorKind::BrokenPipe {
            eprintln!("error: {e}");
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Range(_) | Error::InvalidContext(_) | Error::Parse(_) | Error::DimensionMismatch(_) | Error::ContextMismatch => 2,
            Error::NoPhiExists => 4,
            Error::PrecisionExhausted(_) => 5,
            _ => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn context(cli: &Cli, n: usize) -> Result<DvrContext, Failure> {
    let prec = cli.precision.unwrap_or_else(|| DvrContext::default_precision(n));
    Ok(DvrContext::new(cli.p, prec)?)
}

fn load_seed(cli: &Cli, spec: &SeedSpec) -> Result<Lattice, Failure> {
    if let Some(v) = &spec.zi {
        let (n, i) = (v[0], v[1]);
        return Ok(closed_form_zi(context(cli, n)?, n, i)?);
    }
    let path = spec.lattice.as_ref().ok_or_else(|| usage("give --zi N I or --lattice FILE"))?;
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let j: LatticeJson = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(Lattice::from_json(&j)?)
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    write_or_print(&text, out)
}

fn write_or_print(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            say(text.trim_end_matches('\n'));
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct HellerOutput {
    module: FiniteModuleJson,
    closed_form: LatticeJson,
    computed: LatticeJson,
    /// Matrix of the isomorphism from the computed lattice onto the closed form.
    witness: Vec<Vec<ElementJson>>,
    summand_ranks: Vec<usize>,
}

fn cmd_heller(cli: &Cli, n: usize, i: usize, out: Option<&Path>) -> Result<(), Failure> {
    if n < 2 || i == 0 || i >= n {
        return Err(usage(format!("need 1 ≤ i ≤ n−1, got n = {n}, i = {i}")));
    }
    let ctx = context(cli, n)?;
    let module = module_mi(ctx, n, i)?;
    let h = heller_lattice(ctx, &module)?;
    let z = closed_form_zi(ctx, n, i)?;
    let witness = match iso_test(&h.lattice, &z)? {
        IsoResult::ProvenIso(w) => w,
        other => {
            return Err(Error::CertificationFailure(format!("Heller lattice not isomorphic to Z_{i}: {other:?}")).into())
        }
    };
    emit(
        &HellerOutput {
            module: module.to_json(),
            closed_form: z.to_json(),
            computed: h.lattice.to_json(),
            witness: witness.mat().to_json(),
            summand_ranks: h.decomposition.ranks(),
        },
        out,
    )
}

fn cmd_ass(cli: &Cli, seed: &SeedSpec, no_section_check: bool, out: Option<&Path>) -> Result<(), Failure> {
    let m = load_seed(cli, seed)?;
    let ass = almost_split_sequence_with(&m, &AssOptions { check_section: !no_section_check })?;
    emit(&ass.to_json(), out)?;
    if !ass.cert.ok() {
        return Err(Error::CertificationFailure(format!("{:?}", ass.cert)).into());
    }
    Ok(())
}

#[derive(Serialize)]
struct ComponentSummary<'a> {
    report: &'a TubeReport,
    subadditive: &'a [SubadditiveEntry],
}

fn cmd_component(
    cli: &Cli,
    seed: &SeedSpec,
    depth: usize,
    dot: Option<&Path>,
    json: Option<&Path>,
    max_vertices: usize,
) -> Result<(), Failure> {
    let m = load_seed(cli, seed)?;
    let opts = ComponentOptions {
        max_vertices,
        iso: IsoOptions { seed: cli.random_seed, ..Default::default() },
        ..Default::default()
    };
    let comp = build_component_with(&m, depth, &opts)?;
    if let Some(path) = dot {
        write_or_print(&comp.to_dot(), Some(path))?;
    }
    if let Some(path) = json {
        emit(&comp.to_json(), Some(path))?;
    }
    let report = tube_report(&comp)?;
    say(&report.summary_line());
    for note in &report.notes {
        say(&format!("note: {note}"));
    }
    if comp.confidence_qualified {
        say("note: some vertices were separated only probabilistically");
    }
    let sub = subadditive_check(&comp);
    if dot.is_none() && json.is_none() {
        emit(&ComponentSummary { report: &report, subadditive: &sub }, None)?;
    }
    if !comp.certificates.values().all(|c| c.ok()) {
        return Err(Error::CertificationFailure("an almost split sequence failed certification".into()).into());
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, n_max: usize, primes: &[u32], depth: usize, snf_samples: usize, out: Option<&Path>) -> Result<(), Failure> {
    if n_max < 2 {
        return Err(usage("--n-max must be at least 2"));
    }
    let cfg = VerifyConfig {
        n_max,
        primes: primes.to_vec(),
        precision: cli.precision,
        depth,
        random_seed: cli.random_seed,
        snf_samples,
        ..Default::default()
    };
    let report: Report = run(&cfg);
    for section in &report.sections {
        say(&format!("p = {}", section.p));
        for k in 1..=10u8 {
            let cs: Vec<_> = section.claims.iter().filter(|c| c.criterion == k).collect();
            if cs.is_empty() {
                continue;
            }
            let passed = cs.iter().filter(|c| c.pass).count();
            let verdict = if passed == cs.len() { "pass" } else { "FAIL" };
            say(&format!("  criterion {k:>2}: {verdict} ({passed}/{})", cs.len()));
        }
    }
    if let Some(path) = out {
        emit(&report, Some(path))?;
    }
    match report.first_failure() {
        None => {
            say("all claims pass");
            Ok(())
        }
        Some(c) => {
            let code = c.error.clone().map_or(3, |e| Failure::from(e).code);
            Err(Failure { code, message: format!("claim {} failed (p = {}, n = {:?}, i = {:?}): {}", c.id, c.p, c.n, c.i, c.detail) })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Heller { n, i, out } => cmd_heller(&cli, *n, *i, out.as_deref()),
        Command::Ass { seed, no_section_check, out } => cmd_ass(&cli, seed, *no_section_check, out.as_deref()),
        Command::Component { seed, depth, dot, json, max_vertices } => {
            cmd_component(&cli, seed, *depth, dot.as_deref(), json.as_deref(), *max_vertices)
        }
        Command::VerifyPaper { n_max, p_list, depth, snf_samples, out } => {
            cmd_verify(&cli, *n_max, p_list, *depth, *snf_samples, out.as_deref())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
