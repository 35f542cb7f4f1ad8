//! The `pdsearch` command line.
//!
//! Exit codes: 0 for a hit or a passing certificate, 1 for no hit or a
//! failing certificate, 2 for usage and I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::group::{
    cyclic_group, dihedral_group, direct_product, elementary_abelian, parse_table, GroupError,
    GroupTable,
};
use crate::params::{check_feasible, enumerate_feasible};
use crate::pds::Params;
use crate::record::{RunRecord, UnverifiedHit};
use crate::search::{
    run_search, schedule_preset, ProposalMode, SearchConfig, SearchError, StopMode,
};
use crate::verify::certify;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PDSEARCH_WORKERS";

pub const EXIT_HIT: i32 = 0;
pub const EXIT_MISS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pdsearch",
    version,
    about = "Local search for regular partial difference sets, with independent certification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a group multiplication table (1-indexed text format).
    GenGroup {
        /// `cyclic:m`, `dihedral:m`, `elementary:p^d` or `product:<atom>x<spec>`.
        spec: String,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Hill-climb for a PDS and write a JSON run record.
    Search(SearchArgs),
    /// Certify a set as a PDS and its Cayley graph as an SRG.
    Verify(VerifyArgs),
    /// List parameter sets passing the feasibility screen.
    Enumerate {
        n: usize,
        /// Only list k <= (n-1)/2.
        #[arg(long)]
        half: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    First,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProposalArg {
    Random,
    Sweep,
}

#[derive(Debug, clap::Args)]
pub struct SearchArgs {
    /// Table file, group spec, or a directory of table files.
    #[arg(short, long)]
    pub group: String,
    /// `n,k,lambda,mu`.
    #[arg(short, long)]
    pub params: Params,
    /// Consecutive failed proposals ending a trial [default: (n-1)k].
    #[arg(long)]
    pub alpha: Option<u64>,
    #[arg(long)]
    pub max_trials: Option<u64>,
    /// Budget from the built-in trial schedule for this order.
    #[arg(long, conflicts_with = "max_trials")]
    pub preset_schedule: bool,
    /// With --preset-schedule: no SRG with these parameters is known.
    #[arg(long, requires = "preset_schedule")]
    pub srg_unknown: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = StopArg::First)]
    pub stop: StopArg,
    #[arg(long, value_enum, default_value_t = ProposalArg::Random)]
    pub proposals: ProposalArg,
    /// Search even if the parameters fail the feasibility screen.
    #[arg(long)]
    pub skip_feasibility: bool,
    /// Include worker count and wall time in the record.
    #[arg(long)]
    pub timing: bool,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    /// Table file or group spec.
    #[arg(short, long)]
    pub group: String,
    #[arg(short, long)]
    pub params: Params,
    /// Elements, e.g. "[2, 4, 5]" or "2 4 5".
    #[arg(
        long,
        conflicts_with = "set_file",
        required_unless_present = "set_file"
    )]
    pub set: Option<String>,
    #[arg(long)]
    pub set_file: Option<PathBuf>,
    /// Elements are 0-indexed rather than 1-indexed.
    #[arg(long)]
    pub zero_indexed: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Table { path: PathBuf, source: GroupError },
    #[error("bad group spec {spec:?}: {reason}")]
    GroupSpec { spec: String, reason: String },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("parameters are for order {params} but group {label} has order {group}")]
    OrderMismatch {
        params: usize,
        group: usize,
        label: String,
    },
    #[error("infeasible parameters {params}: {reason} (use --skip-feasibility to search anyway)")]
    Infeasible { params: Params, reason: String },
    #[error("no trial budget: pass --max-trials or --preset-schedule")]
    NoBudget,
    #[error("no preset schedule covers n = {n}, k = {k}; pass --max-trials")]
    NoPreset { n: usize, k: usize },
    #[error("bad element list: {0}")]
    SetSyntax(String),
    #[error("element {value} is out of range 1..={n} (1-indexed)")]
    SetOutOfRange { value: usize, n: usize },
    #[error("element {0} appears more than once")]
    SetDuplicate(usize),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Unverified(#[from] UnverifiedHit),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
    #[error("serializing output: {0}")]
    Json(#[from] serde_json::Error),
}

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run_from_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_HIT };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match run(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::GenGroup { spec, out } => {
            let g = parse_group_spec(&spec)?;
            emit(out.as_deref(), &g.to_table_string(), stdout)?;
            Ok(EXIT_HIT)
        }
        Command::Search(args) => cmd_search(args, stdout, stderr),
        Command::Verify(args) => cmd_verify(args, stdout, stderr),
        Command::Enumerate { n, half, json } => {
            let list = enumerate_feasible(n, half);
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&list)?)?;
            } else {
                writeln!(stdout, "n\tk\tlambda\tmu\tm+\tm-\tconference")?;
                for f in &list {
                    let p = f.params;
                    writeln!(
                        stdout,
                        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                        p.n(),
                        p.k(),
                        p.lambda(),
                        p.mu(),
                        f.multiplicities.0,
                        f.multiplicities.1,
                        f.conference
                    )?;
                }
            }
            Ok(EXIT_HIT)
        }
    }
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

/// Parses the group spec grammar. `product:` is right-associative and its
/// left operand is an atom, so the first `x` splits it.
pub fn parse_group_spec(spec: &str) -> Result<GroupTable, CliError> {
    let bad = |reason: &str| CliError::GroupSpec {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    if let Some(rest) = spec.strip_prefix("product:") {
        let (left, right) = rest
            .split_once('x')
            .ok_or_else(|| bad("product needs two factors joined by 'x'"))?;
        let a = parse_atom(left).map_err(|r| bad(&r))?;
        let b = parse_group_spec(right)?;
        return Ok(direct_product(&a, &b)?);
    }
    parse_atom(spec).map_err(|r| bad(&r))
}

fn parse_atom(atom: &str) -> Result<GroupTable, String> {
    let (kind, arg) = atom
        .split_once(':')
        .ok_or_else(|| format!("expected kind:argument, got {atom:?}"))?;
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("not a number: {s:?}"))
    };
    let result = match kind {
        "cyclic" => cyclic_group(num(arg)?),
        "dihedral" => dihedral_group(num(arg)?),
        "elementary" => {
            let (p, d) = arg
                .split_once('^')
                .ok_or_else(|| format!("expected p^d, got {arg:?}"))?;
            elementary_abelian(num(p)?, num(d)?)
        }
        other => return Err(format!("unknown group kind {other:?}")),
    };
    result.map_err(|e| e.to_string())
}

/// Reads a table file, or falls back to the spec grammar when no such path
/// exists.
pub fn load_group(arg: &str) -> Result<GroupTable, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_table_file(path);
    }
    if arg.contains(':') {
        return parse_group_spec(arg);
    }
    Err(CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(std::io::ErrorKind::NotFound, "no such table file"),
    })
}

fn load_table_file(path: &Path) -> Result<GroupTable, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let has_label = text.lines().any(|l| {
        l.trim()
            .strip_prefix('#')
            .is_some_and(|c| c.trim().starts_with("label:"))
    });
    let g = parse_table(&text).map_err(|source| CliError::Table {
        path: path.to_path_buf(),
        source,
    })?;
    if has_label {
        return Ok(g);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(g.with_label(stem))
}

fn default_workers() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn cmd_search(
    args: SearchArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let params = args.params;
    if !args.skip_feasibility {
        if let Err(reason) = check_feasible(params) {
            return Err(CliError::Infeasible {
                params,
                reason: reason.to_string(),
            });
        }
    }
    let (max_trials, schedule) = if args.preset_schedule {
        let passes = schedule_preset(params.n(), params.k(), !args.srg_unknown).ok_or(
            CliError::NoPreset {
                n: params.n(),
                k: params.k(),
            },
        )?;
        (passes.iter().sum(), Some(passes))
    } else {
        (args.max_trials.ok_or(CliError::NoBudget)?, None)
    };

    let mut config = SearchConfig::new(params, max_trials);
    if let Some(alpha) = args.alpha {
        config.alpha = alpha;
    }
    config.base_seed = args.seed;
    config.workers = args.workers.unwrap_or_else(default_workers);
    config.stop_mode = match args.stop {
        StopArg::First => StopMode::FirstHit,
        StopArg::All => StopMode::CollectAll,
    };
    config.proposal_mode = match args.proposals {
        ProposalArg::Random => ProposalMode::Random,
        ProposalArg::Sweep => ProposalMode::Sweep,
    };
    config.require_feasible = !args.skip_feasibility;

    let dir = Path::new(&args.group);
    let groups = if dir.is_dir() {
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|source| CliError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        files
            .iter()
            .map(|p| load_table_file(p))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        vec![load_group(&args.group)?]
    };

    let mut records = Vec::with_capacity(groups.len());
    for group in &groups {
        if group.order() != params.n() {
            return Err(CliError::OrderMismatch {
                params: params.n(),
                group: group.order(),
                label: group.label().to_string(),
            });
        }
        let outcome = run_search(group, params, &config)?;
        let record = RunRecord::from_outcome(
            group,
            params,
            &config,
            schedule.clone(),
            &outcome,
            args.timing,
        )?;
        writeln!(
            stderr,
            "{}: {} hit(s) in {} trial(s), {:.2?}",
            group.label(),
            record.hits.len(),
            record.trials_used,
            outcome.summary.wall_time
        )?;
        records.push(record);
    }

    let any_hit = records.iter().any(|r| !r.hits.is_empty());
    let text = if dir.is_dir() {
        serde_json::to_string_pretty(&records)?
    } else {
        serde_json::to_string_pretty(&records[0])?
    };
    emit(args.out.as_deref(), &(text + "\n"), stdout)?;
    Ok(if any_hit { EXIT_HIT } else { EXIT_MISS })
}

/// Pulls every integer out of `text`; brackets, commas and whitespace all
/// separate.
pub fn parse_element_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(|c: char| c.is_whitespace() || matches!(c, ',' | '[' | ']' | '{' | '}' | '(' | ')'))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| CliError::SetSyntax(format!("not a nonnegative integer: {t:?}")))
        })
        .collect()
}

fn cmd_verify(
    args: VerifyArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let group = load_group(&args.group)?;
    let n = group.order();
    if args.params.n() != n {
        return Err(CliError::OrderMismatch {
            params: args.params.n(),
            group: n,
            label: group.label().to_string(),
        });
    }
    let text = match (&args.set, &args.set_file) {
        (Some(s), _) => s.clone(),
        (None, Some(p)) => fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?,
        (None, None) => unreachable!("clap requires one of --set and --set-file"),
    };
    let raw = parse_element_list(&text)?;
    let mut set = Vec::with_capacity(raw.len());
    let mut seen = vec![false; n];
    for &v in &raw {
        let g = if args.zero_indexed {
            Some(v)
        } else {
            v.checked_sub(1)
        };
        let g = g.filter(|&g| g < n).ok_or(CliError::SetOutOfRange {
            value: if args.zero_indexed { v + 1 } else { v },
            n,
        })?;
        if seen[g] {
            return Err(CliError::SetDuplicate(v));
        }
        seen[g] = true;
        set.push(g);
    }

    let cert = certify(&group, args.params, &set);
    for v in &cert.pds_check.violations {
        writeln!(stderr, "pds check: {v}")?;
    }
    if let Some(v) = &cert.srg_check.violation {
        writeln!(stderr, "srg check: {v}")?;
    }
    writeln!(stdout, "{}", serde_json::to_string_pretty(&cert.to_json())?)?;
    Ok(if cert.passed() { EXIT_HIT } else { EXIT_MISS })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_specs() {
        assert_eq!(parse_group_spec("cyclic:13").unwrap().order(), 13);
        let g = parse_group_spec("product:cyclic:4xcyclic:4").unwrap();
        assert_eq!(g.order(), 16);
        let ea8 = parse_group_spec("product:cyclic:2xproduct:cyclic:2xcyclic:2").unwrap();
        assert_eq!(ea8.order(), 8);
        assert!((0..8).all(|x| ea8.inv(x) == x));
        assert_eq!(parse_group_spec("elementary:2^6").unwrap().order(), 64);
        assert_eq!(parse_group_spec("dihedral:5").unwrap().order(), 10);
        for bad in [
            "cyclic",
            "cyclic:x",
            "cyclic:0",
            "torus:3",
            "product:cyclic:2",
        ] {
            assert!(parse_group_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn element_lists() {
        assert_eq!(parse_element_list("[2, 3, 5]").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_element_list(" 2 3\n5 ").unwrap(), vec![2, 3, 5]);
        assert_eq!(parse_element_list("{1,2}").unwrap(), vec![1, 2]);
        assert!(parse_element_list("[2, -3]").is_err());
    }
}
