use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use supobf::attack::{analyze, brute_force_attackable, oracle, OracleVerdict, Verdict};
use supobf::automata::dot::to_dot;
use supobf::automata::Alphabet;
use supobf::exec::Execution;
use supobf::obfuscate::{
    obfuscate_with_progress, supbp, ObfuscationOptions, ObfuscationRequest, Outcome,
};
use supobf::problem::{
    describe_violations, inputs_digest, load, parse_problem, supervisor_violations,
    write_automaton, Loaded,
};
use supobf::satenc::export_dimacs;

#[derive(Parser)]
#[command(
    name = "supobf",
    version,
    about = "Verify and obfuscate discrete-event supervisors against actuator attacks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Problem file.
    file: PathBuf,
    /// Replace the problem's supervisor with the one in this file.
    #[arg(long)]
    supervisor: Option<PathBuf>,
    /// Add missing unobservable self-loops to the supervisor before checking it.
    #[arg(long)]
    repair_selfloops: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run all structural checks on a problem file.
    Validate {
        #[command(flatten)]
        input: Input,
    },
    /// Print the closed loop S ∥ G.
    ClosedLoop {
        #[command(flatten)]
        input: Input,
        /// Also write the closed loop as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Decide non-attackability (exit 0 non-attackable, 1 attackable).
    Check {
        #[command(flatten)]
        input: Input,
        /// Print the attacker observation and attack event.
        #[arg(long)]
        witness: bool,
        /// Write the attacker-view subset automaton as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// List behavior-preserving supervisors with exactly K states.
    SynthBp {
        #[command(flatten)]
        input: Input,
        /// Number of supervisor states K.
        #[arg(short = 'n', value_name = "K")]
        n: usize,
        /// Stop after this many solver models.
        #[arg(long)]
        limit: Option<usize>,
        /// Write the CNF for size K in DIMACS format.
        #[arg(long)]
        dimacs: Option<PathBuf>,
        /// Keep supervisors isomorphic to an earlier one.
        #[arg(long)]
        no_dedupe: bool,
    },
    /// Search for a minimum-state resilient behavior-preserving supervisor
    /// (exit 0 found, 1 not found).
    Obfuscate {
        #[command(flatten)]
        input: Input,
        /// Largest size to try; defaults to the supervisor's reachable state count.
        #[arg(long)]
        nmax: Option<usize>,
        /// Start at the smallest feasible size, found by bisection.
        #[arg(long)]
        bisect: bool,
        /// Write the supervisor found here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a JSON run summary.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Keep candidates isomorphic to an earlier one.
        #[arg(long)]
        no_dedupe: bool,
        /// Stop enumerating each size after this many solver models.
        #[arg(long)]
        limit: Option<usize>,
        /// Test candidates on one thread.
        #[arg(long)]
        sequential: bool,
        /// Include wall-clock time in the JSON summary.
        #[arg(long)]
        timing: bool,
    },
    /// Brute-force attackability check on bounded strings (exit 0 no attack found, 1 attackable).
    Oracle {
        #[command(flatten)]
        input: Input,
        /// Longest closed-loop string considered; defaults to |Q|·|X|·|Z| + 2.
        #[arg(long)]
        bound: Option<usize>,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

struct Session {
    loaded: Loaded,
    digest: String,
}

fn open(input: &Input) -> Result<Session, Failure> {
    let text = read(&input.file)?;
    let sup = input.supervisor.as_deref().map(read).transpose()?;
    let digest = inputs_digest(&[text.as_bytes(), sup.as_deref().unwrap_or("").as_bytes()]);
    let loaded = match load(&text, sup.as_deref(), input.repair_selfloops) {
        Ok(l) => l,
        Err(e) => {
            let mut msg = format!("{}: {e}", input.file.display());
            if let supobf::problem::LoadError::Supervisor(_) = e {
                if let Ok(mut p) = parse_problem(&text) {
                    if let Some(s) = &sup {
                        if let Ok(a) = supobf::problem::parse_supervisor(s, &p.alphabet) {
                            p.supervisor = a;
                        }
                    }
                    for line in describe_violations(&p.supervisor, &supervisor_violations(&p)) {
                        msg.push_str("\n  ");
                        msg.push_str(&line);
                    }
                }
            }
            return Err(Failure(msg));
        }
    };
    if let Some(w) = &loaded.damage_warning {
        eprintln!(
            "warning: damage automaton marks a string the plant cannot generate: {}",
            loaded.problem.alphabet.render(w)
        );
    }
    Ok(Session { loaded, digest })
}

fn print_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write(path, &text)
}

fn validate(input: &Input) -> CmdResult {
    let s = open(input)?;
    let p = &s.loaded.problem;
    println!("ok");
    println!("events: {}", p.alphabet.len());
    println!("plant states: {}", p.plant.num_states());
    println!(
        "supervisor states: {} ({} reachable)",
        p.supervisor.num_states(),
        p.supervisor.num_reachable()
    );
    println!(
        "damage states: {}{}",
        p.damage.num_states(),
        if p.damage_completed {
            " (with added sink)"
        } else {
            ""
        }
    );
    println!("closed-loop states: {}", s.loaded.closed_loop.num_states());
    Ok(ExitCode::SUCCESS)
}

fn closed_loop_cmd(input: &Input, dot: Option<&Path>) -> CmdResult {
    let s = open(input)?;
    print!("{}", write_automaton("closed-loop", &s.loaded.closed_loop));
    if let Some(path) = dot {
        write(path, &to_dot(&s.loaded.closed_loop, "closed-loop"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn check(input: &Input, witness: bool, dot: Option<&Path>) -> CmdResult {
    let s = open(input)?;
    let l = &s.loaded;
    let p = &l.problem;
    let analysis = analyze(&p.plant, &l.supervisor, &p.damage, &p.attack);
    if let Some(path) = dot {
        write(
            path,
            &analysis.sub.to_dot(
                &analysis.gp,
                &analysis.annotated.commands,
                &p.alphabet,
                "sub",
            ),
        )?;
    }
    match analysis.verdict() {
        Verdict::NonAttackable => {
            println!("non-attackable");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Attackable(w) => {
            println!("attackable");
            if witness {
                for line in w.render(&p.alphabet) {
                    println!("{line}");
                }
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn synth_bp(
    input: &Input,
    n: usize,
    limit: Option<usize>,
    dimacs: Option<&Path>,
    no_dedupe: bool,
) -> CmdResult {
    if n == 0 {
        return Err(Failure("-n must be at least 1".into()));
    }
    let s = open(input)?;
    let p = &s.loaded.problem;
    if let Some(path) = dimacs {
        let gds = supobf::automata::build_gds(
            &supobf::automata::complete(&p.plant),
            &supobf::automata::complete(s.loaded.supervisor.automaton()),
        );
        let (cnf, vt) = supobf::satenc::encode(n, &gds, &p.alphabet, &p.target);
        let mut buf = Vec::new();
        export_dimacs(&cnf, &vt, &mut buf)?;
        write(path, std::str::from_utf8(&buf)?)?;
    }
    let options = ObfuscationOptions {
        dedupe_isomorphic: !no_dedupe,
        enumeration_limit: limit,
        ..Default::default()
    };
    let bp = supbp(&p.plant, &s.loaded.supervisor, &p.target, n, &options);
    for (i, c) in bp.candidates.iter().enumerate() {
        println!("# candidate {i}");
        print!("{}", write_automaton("supervisor", c.automaton()));
    }
    eprintln!(
        "n={n} models={} candidates={}{}",
        bp.models,
        bp.candidates.len(),
        if bp.truncated { " (truncated)" } else { "" }
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn obfuscate_cmd(
    input: &Input,
    nmax: Option<usize>,
    bisect: bool,
    out: Option<&Path>,
    json_path: Option<&Path>,
    no_dedupe: bool,
    limit: Option<usize>,
    sequential: bool,
    timing: bool,
) -> CmdResult {
    let start = Instant::now();
    let s = open(input)?;
    let l = s.loaded;
    let p = l.problem;
    let mut req = ObfuscationRequest::new(p.plant, l.supervisor, p.target, p.attack, p.damage);
    if let Some(n) = nmax {
        req.n_max = n;
    }
    req.options = ObfuscationOptions {
        bisect,
        dedupe_isomorphic: !no_dedupe,
        enumeration_limit: limit,
        execution: if sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
    };
    let result = obfuscate_with_progress(&req, |e| {
        eprintln!(
            "n={} models={} candidates={} tested={} resilient={}{}",
            e.n,
            e.models,
            e.candidates,
            e.tested,
            e.resilient,
            if e.truncated { " (truncated)" } else { "" }
        );
    })?;
    let (code, result_json) = match &result.outcome {
        Outcome::Found {
            supervisor,
            size,
            candidates_tested,
        } => {
            let text = write_automaton("supervisor", supervisor.automaton());
            match out {
                Some(path) => write(path, &text)?,
                None => print!("{text}"),
            }
            eprintln!("found a resilient supervisor with {size} state(s)");
            (
                ExitCode::SUCCESS,
                json!({
                    "outcome": "found",
                    "size": size,
                    "candidates_tested": candidates_tested,
                    "supervisor": text,
                }),
            )
        }
        Outcome::NotFoundUpTo(n) => {
            eprintln!("no resilient behavior-preserving supervisor with at most {n} state(s)");
            (
                ExitCode::from(1),
                json!({ "outcome": "not_found", "n_max": n }),
            )
        }
    };
    if let Some(path) = json_path {
        let mut summary = json!({
            "command": "obfuscate",
            "inputs_digest": s.digest,
            "options": {
                "n_max": req.n_max,
                "bisect": bisect,
                "dedupe_isomorphic": !no_dedupe,
                "enumeration_limit": limit,
            },
            "n_start": result.n_start,
            "result": result_json,
            "trace": result.trace,
            "solver": result.stats,
        });
        if timing {
            summary["timing_ms"] = json!(start.elapsed().as_millis() as u64);
        }
        print_json(path, &summary)?;
    }
    Ok(code)
}

fn render_observation(obs: &[oracle::ObsStep], alphabet: &Alphabet) -> Vec<String> {
    obs.iter()
        .map(|(seen, cmd)| {
            format!(
                "({}, {})",
                seen.map_or("ε", |e| alphabet.name(e)),
                cmd.render(alphabet)
            )
        })
        .collect()
}

fn oracle_cmd(input: &Input, bound: Option<usize>) -> CmdResult {
    let s = open(input)?;
    let l = &s.loaded;
    let p = &l.problem;
    let bound = bound
        .unwrap_or(p.plant.num_states() * p.supervisor.num_states() * p.damage.num_states() + 2);
    let report = brute_force_attackable(
        &p.plant,
        &l.supervisor,
        &p.damage,
        &p.attack,
        bound,
        oracle::DEFAULT_BUDGET,
    );
    match report.verdict {
        OracleVerdict::Attackable { observation, event } => {
            println!("attackable");
            for line in render_observation(&observation, &p.alphabet) {
                println!("{line}");
            }
            println!("ATTACK {}", p.alphabet.name(event));
            Ok(ExitCode::from(1))
        }
        OracleVerdict::NoAttackUpTo(d) => {
            println!("no attack with observations of length <= {d} (string bound {bound})");
            if d < report.max_depth {
                println!(
                    "inconclusive: search budget reached after {} product states",
                    report.explored
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { input } => validate(input),
        Command::ClosedLoop { input, dot } => closed_loop_cmd(input, dot.as_deref()),
        Command::Check {
            input,
            witness,
            dot,
        } => check(input, *witness, dot.as_deref()),
        Command::SynthBp {
            input,
            n,
            limit,
            dimacs,
            no_dedupe,
        } => synth_bp(input, *n, *limit, dimacs.as_deref(), *no_dedupe),
        Command::Obfuscate {
            input,
            nmax,
            bisect,
            out,
            json,
            no_dedupe,
            limit,
            sequential,
            timing,
        } => obfuscate_cmd(
            input,
            *nmax,
            *bisect,
            out.as_deref(),
            json.as_deref(),
            *no_dedupe,
            *limit,
            *sequential,
            *timing,
        ),
        Command::Oracle { input, bound } => oracle_cmd(input, *bound),
    };
    match result {
        Ok(code) => code,
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
