//! `symnet`: controllability analysis of linear networks with symmetry.
//!
//! Exit codes: 0 success (and controllable/observable where a verdict is
//! produced), 1 usage, parse or analysis error, 2 not controllable or
//! design exhausted, 3 enumeration cap exceeded.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use symnet::control::{self, DesignOptions, RankMethod, DEFAULT_ENUMERATION_CAP};
use symnet::io::{self, DesignReport, LoadedNetwork, Mode};
use symnet::isotypic::{block_diagonalize, IsotypicDecomposition};
use symnet::network::EquivariantSystem;
use symnet::{Error, Tolerance};

#[derive(Parser, Debug)]
#[command(name = "symnet", version, allow_negative_numbers = true, about = "Controllability of linear networks with finite symmetry groups")]
struct Cli {
    /// Entrywise tolerance for zero tests and residual checks.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    tol: f64,
    /// Relative singular value threshold factor for rank decisions.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    rank_tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Isotypic decomposition, block structure and the bound N_Γ.
    Analyze {
        spec: PathBuf,
        /// Irreps to use instead of those named by the spec.
        #[arg(long)]
        irreps: Option<PathBuf>,
    },
    /// Greedy sparse input (or output) matrix.
    Design {
        spec: PathBuf,
        #[arg(long)]
        irreps: Option<PathBuf>,
        /// Place sensors for observability instead of inputs.
        #[arg(long)]
        observe: bool,
        /// Skip candidates that do not enlarge the controllable subspace.
        #[arg(long)]
        rank_greedy: bool,
        /// Method for the final verdict.
        #[arg(long, value_enum, default_value_t = Method::Subspace)]
        method: Method,
    },
    /// Rank tests for a given set of input (or output) states.
    Check {
        spec: PathBuf,
        /// 1-based state indices, e.g. 1,2,3,6,9.
        #[arg(long, required_unless_present = "design", conflicts_with = "design")]
        inputs: Option<String>,
        /// Re-check a JSON report written by `design --format json`.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long)]
        observe: bool,
        /// Run one method instead of all three.
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Test every k-subset of states.
    Enumerate {
        spec: PathBuf,
        k: usize,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u128,
        #[arg(long)]
        observe: bool,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Kalman,
    Subspace,
    Pbh,
}

impl From<Method> for RankMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Kalman => RankMethod::Kalman,
            Method::Subspace => RankMethod::Subspace,
            Method::Pbh => RankMethod::Pbh,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err("must be a positive number".into())
    }
}

/// Process exit status together with what to print.
struct Outcome {
    stdout: String,
    code: u8,
}

struct Pipeline {
    net: LoadedNetwork,
    system: EquivariantSystem,
    dec: IsotypicDecomposition,
    warnings: Vec<String>,
}

fn load(spec: &Path) -> Result<LoadedNetwork, Error> {
    LoadedNetwork::load(spec).map_err(|e| match e {
        Error::Io(e) => Error::Parse(format!("{}: {e}", spec.display())),
        e => e,
    })
}

fn pipeline(spec: &Path, irreps: Option<&Path>, tol: &Tolerance) -> Result<Pipeline, Error> {
    let net = load(spec)?;
    let system = net.system(tol)?;
    let (irreps, mut warnings) = net.irreps(&system.group, irreps, tol)?;
    let dec = net.decompose(&system, &irreps, tol)?;
    warnings.extend(dec.warnings.iter().cloned());
    Ok(Pipeline {
        net,
        system,
        dec,
        warnings,
    })
}

fn fmt_num(x: f64) -> String {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        format!("{}", r as i64)
    } else {
        format!("{x:.6}")
    }
}

fn fmt_matrix(m: &[Vec<f64>]) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| format!("[{}]", r.iter().map(|&x| fmt_num(x)).collect::<Vec<_>>().join(", ")))
        .collect();
    format!("[{}]", rows.join(", "))
}

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>) -> Result<String, Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w).map_err(|e| Error::Parse(e.to_string()))?;
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn analyze(spec: &Path, irreps: Option<&Path>, format: Format, tol: &Tolerance) -> Result<Outcome, Error> {
    let p = pipeline(spec, irreps, tol)?;
    let bd = block_diagonalize(&p.system.a, &p.dec, tol)?;
    let mut report = io::analysis_report(&p.net.name, &p.system, &p.dec, &bd, tol);
    report.warnings.splice(0..0, p.warnings);
    let stdout = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_string(|w| {
            w.write_record(["label", "n", "d", "m", "type", "price"])?;
            for r in &report.irreps {
                w.write_record([
                    r.label.clone(),
                    r.dim.to_string(),
                    r.multiplicity.to_string(),
                    r.isotypic_dim.to_string(),
                    r.kind.to_string(),
                    r.price.to_string(),
                ])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "network: {}", report.name);
            let _ = writeln!(s, "group order: {}", report.group_order);
            let _ = writeln!(s, "state dimension: {}", report.state_dim);
            let _ = writeln!(s, "equivariance residual: {:.2e}", report.residuals.equivariance);
            let _ = writeln!(s, "\nirrep          n    d    m  type          price");
            for r in &report.irreps {
                let _ = writeln!(
                    s,
                    "{:<12} {:>3}  {:>3}  {:>3}  {:<12}  {:>5}",
                    r.label, r.dim, r.multiplicity, r.isotypic_dim, r.kind.to_string(), r.price
                );
            }
            let _ = writeln!(
                s,
                "\nN_Γ = {}{}",
                report.n_gamma.value,
                report.n_gamma.irrep.as_ref().map_or(String::new(), |l| format!(" (from {l})"))
            );
            let _ = writeln!(s, "\nblocks:");
            for b in &report.blocks {
                let _ = writeln!(s, "  {} μ={}: {}", b.label, b.mu, fmt_matrix(&b.matrix));
            }
            let _ = writeln!(s, "off-block residual: {:.2e}", report.residuals.off_block);
            let _ = writeln!(s, "\neigenvalues (algebraic / geometric multiplicity):");
            for e in &report.spectrum {
                let value = if e.im == 0.0 {
                    fmt_num(e.re)
                } else {
                    format!("{} {} {}i", fmt_num(e.re), if e.im < 0.0 { "-" } else { "+" }, fmt_num(e.im.abs()))
                };
                let _ = writeln!(s, "  {value:>12}  {} / {}", e.algebraic, e.geometric);
            }
            for w in &report.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            s
        }
    };
    Ok(Outcome { stdout, code: 0 })
}

fn verdict_word(mode: Mode, ok: bool) -> &'static str {
    match (mode, ok) {
        (Mode::Input, true) => "controllable",
        (Mode::Input, false) => "not controllable",
        (Mode::Output, true) => "observable",
        (Mode::Output, false) => "not observable",
    }
}

fn design(
    spec: &Path,
    irreps: Option<&Path>,
    observe: bool,
    rank_greedy: bool,
    method: RankMethod,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, Error> {
    let p = pipeline(spec, irreps, tol)?;
    let opts = DesignOptions { rank_greedy };
    let a = &p.system.a;
    let (mode, d) = if observe {
        (Mode::Output, control::design_output_matrix(a, &p.dec, opts, tol)?)
    } else {
        (Mode::Input, control::design_input_matrix(a, &p.dec, opts, tol)?)
    };
    let check = io::check_report(&p.net.name, a, &d.selected, mode, &[method], tol)?;
    let rank = check.results[0].rank;
    let report = DesignReport::new(&p.net.name, mode, &d, method, rank, a.nrows());
    let stdout = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_string(|w| {
            w.write_record(["step", "irrep", "mu", "column", "state", "rank", "fallback"])?;
            for (k, s) in report.trace.iter().enumerate() {
                w.write_record([
                    (k + 1).to_string(),
                    s.irrep.clone(),
                    s.mu.to_string(),
                    s.column.to_string(),
                    s.row.to_string(),
                    s.rank.to_string(),
                    s.fallback.to_string(),
                ])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = String::new();
            let what = if observe { "sensors" } else { "inputs" };
            let _ = writeln!(s, "network: {}", report.name);
            let _ = writeln!(s, "N_Γ = {}", report.n_gamma);
            for (k, step) in report.trace.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "step {}: {} μ={} column {} -> e{} (rank {}){}",
                    k + 1,
                    step.irrep,
                    step.mu,
                    step.column,
                    step.row,
                    step.rank,
                    if step.fallback { " [sweep]" } else { "" }
                );
            }
            let _ = writeln!(s, "{what} at states: {:?}", report.selected_state_indices);
            let _ = writeln!(
                s,
                "{} ({} rank {}/{})",
                verdict_word(mode, report.controllable),
                method,
                report.rank,
                report.state_dim
            );
            for w in &p.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            s
        }
    };
    Ok(Outcome {
        stdout,
        code: if report.controllable { 0 } else { 2 },
    })
}

fn check(
    spec: &Path,
    inputs: Option<&str>,
    design_file: Option<&Path>,
    observe: bool,
    method: Option<RankMethod>,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, Error> {
    let net = load(spec)?;
    let system = net.system(tol)?;
    let n = system.state_dim();
    let (indices, mode, expected) = match (inputs, design_file) {
        (Some(list), _) => (
            io::parse_index_list(list, n)?,
            if observe { Mode::Output } else { Mode::Input },
            None,
        ),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let r = DesignReport::parse(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            let list: Vec<String> = r.selected_state_indices.iter().map(|i| i.to_string()).collect();
            (io::parse_index_list(&list.join(","), n)?, r.mode, Some(r.controllable))
        }
        (None, None) => return Err(Error::Parse("give --inputs or --design".into())),
    };
    let methods: Vec<RankMethod> = method.map_or(RankMethod::ALL.to_vec(), |m| vec![m]);
    let report = io::check_report(&net.name, &system.a, &indices, mode, &methods, tol)?;
    if let Some(exp) = expected {
        if exp != report.controllable {
            return Err(Error::Decomposition(format!(
                "design report says {}, re-check says {}",
                verdict_word(mode, exp),
                verdict_word(mode, report.controllable)
            )));
        }
    }
    let stdout = match format {
        Format::Json => json(&report)?,
        Format::Csv => csv_string(|w| {
            w.write_record(["method", "rank", "state_dim", "full"])?;
            for r in &report.results {
                w.write_record([
                    r.method.to_string(),
                    r.rank.to_string(),
                    r.state_dim.to_string(),
                    r.full().to_string(),
                ])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "network: {}", report.name);
            let _ = writeln!(s, "states: {:?}", report.state_indices);
            for r in &report.results {
                let _ = writeln!(
                    s,
                    "{:<9} rank {}/{}  {}",
                    r.method.to_string(),
                    r.rank,
                    r.state_dim,
                    verdict_word(mode, r.full())
                );
            }
            if !report.methods_agree {
                let _ = writeln!(s, "warning: methods disagree; consider adjusting --rank-tol");
            }
            let _ = writeln!(s, "verdict: {}", verdict_word(mode, report.controllable));
            s
        }
    };
    Ok(Outcome {
        stdout,
        code: if report.controllable { 0 } else { 2 },
    })
}

fn enumerate(
    spec: &Path,
    k: usize,
    cap: u128,
    observe: bool,
    format: Format,
    tol: &Tolerance,
) -> Result<Outcome, Error> {
    let net = load(spec)?;
    let system = net.system(tol)?;
    let n = system.state_dim();
    if k == 0 || k > n {
        return Err(Error::Parse(format!("k must be in 1..={n}")));
    }
    let a = if observe { system.a.transpose() } else { system.a.clone() };
    let configs = control::enumerate_input_configs(&a, k, cap, tol)?;
    let hits = configs.iter().filter(|c| c.controllable).count();
    let join = |idx: &[usize]| idx.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(" ");
    let stdout = match format {
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Row {
                states: Vec<usize>,
                controllable: bool,
            }
            #[derive(serde::Serialize)]
            struct Summary {
                name: String,
                k: usize,
                total: usize,
                controllable: usize,
                configs: Vec<Row>,
            }
            json(&Summary {
                name: net.name.clone(),
                k,
                total: configs.len(),
                controllable: hits,
                configs: configs
                    .iter()
                    .map(|c| Row {
                        states: c.indices.iter().map(|i| i + 1).collect(),
                        controllable: c.controllable,
                    })
                    .collect(),
            })?
        }
        Format::Csv => csv_string(|w| {
            w.write_record(["subset", "controllable"])?;
            for c in &configs {
                w.write_record([join(&c.indices), c.controllable.to_string()])?;
            }
            Ok(())
        })?,
        Format::Text => {
            let mut s = String::new();
            for c in configs.iter().filter(|c| c.controllable) {
                let _ = writeln!(s, "{}", join(&c.indices));
            }
            let _ = writeln!(
                s,
                "{hits} of {} subsets of size {k} are {}",
                configs.len(),
                verdict_word(if observe { Mode::Output } else { Mode::Input }, true)
            );
            s
        }
    };
    Ok(Outcome { stdout, code: 0 })
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    let tol = Tolerance {
        rank_factor: cli.rank_tol,
        entry: cli.tol,
    };
    match cli.command {
        Command::Analyze { spec, irreps } => analyze(&spec, irreps.as_deref(), cli.format, &tol),
        Command::Design {
            spec,
            irreps,
            observe,
            rank_greedy,
            method,
        } => design(&spec, irreps.as_deref(), observe, rank_greedy, method.into(), cli.format, &tol),
        Command::Check {
            spec,
            inputs,
            design: design_file,
            observe,
            method,
        } => check(
            &spec,
            inputs.as_deref(),
            design_file.as_deref(),
            observe,
            method.map(Into::into),
            cli.format,
            &tol,
        ),
        Command::Enumerate {
            spec,
            k,
            cap,
            observe,
        } => enumerate(&spec, k, cap, observe, cli.format, &tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::CapExceeded { .. } => 3,
                _ => 1,
            })
        }
    }
}
