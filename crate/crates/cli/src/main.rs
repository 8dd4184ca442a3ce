use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use codecnf::cnfgen::{
    abstract_blocked, abstract_naive, abstract_nd, formula_size, parse_dimacs, write_dimacs, AbstractInstance,
    CnfFormula, GeneratorMode, GeneratorParams, VarRole, DEFAULT_SCOPE_CAP,
};
use codecnf::compile::experiment::scaling_experiment;
use codecnf::compile::{compile_dpll, BranchingPolicy, CompileOptions};
use codecnf::dnnf::{parse_nnf, write_nnf, NnfCircuit, BRUTE_FORCE_CIRCUIT_VARS};
use codecnf::f2code::{affine_model_count, sample_parity_check, F2Matrix, LinearCode};
use codecnf::graphwidth::{
    exact_pathwidth, incidence_graph, modular_contraction, neighborhood_partition, resolve_claim_decomposition,
    EXACT_PATHWIDTH_LIMIT,
};
use codecnf::rectcover::{min_cover_with, parse_cover, verify_cover, write_cover, Fraction, TruthTable};
use codecnf::{Error, Exec};

mod grid;
mod output;

use output::write_atomic;

#[derive(Parser)]
#[command(name = "codecnf", version, about = "CNF encodings of linear codes: generation, widths, compilation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a DIMACS encoding of a parity-check matrix.
    Generate(GenerateArgs),
    /// Report incidence-graph widths of a DIMACS file.
    Analyze { input: PathBuf },
    /// Count models by compilation, checked against the linear-algebra count.
    Count {
        input: PathBuf,
        #[command(flatten)]
        compile: CompileArgs,
    },
    /// Compile a DIMACS file into a decision-DNNF.
    Compile {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        compile: CompileArgs,
    },
    /// Check decomposability and, on small circuits, determinism of an NNF file.
    Check { input: PathBuf },
    /// Existentially quantify variables of an NNF file.
    Forget {
        input: PathBuf,
        /// Comma-separated variable indices.
        #[arg(long, value_delimiter = ',', required_unless_present = "keep_x_of")]
        vars: Vec<u32>,
        /// Forget every variable except the code variables of this DIMACS file.
        #[arg(long, conflicts_with = "vars")]
        keep_x_of: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Minimum or verified rectangle covers of a truth table.
    Rectcover {
        input: PathBuf,
        #[arg(long, default_value = "1/3")]
        beta: Fraction,
        /// Set-cover search node limit.
        #[arg(long, default_value_t = 10_000_000)]
        cap: u64,
        /// Verify this cover instead of searching.
        #[arg(long)]
        cover: Option<PathBuf>,
        /// Write the minimum cover found.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a scaling grid and write the report.
    Experiment {
        grid: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Append wall-clock times per cell.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    mode: GeneratorMode,
    #[arg(short)]
    k: Option<usize>,
    #[arg(short)]
    b: Option<usize>,
    #[arg(short)]
    n: Option<usize>,
    #[arg(short)]
    c: Option<usize>,
    /// Seed for the random parity-check matrix.
    #[arg(long)]
    seed: Option<u64>,
    /// Parity-check matrix file (`m n` header, then rows of 0/1).
    #[arg(long, conflicts_with = "seed")]
    matrix: Option<PathBuf>,
    /// Column block width for nd mode.
    #[arg(long)]
    width: Option<usize>,
    /// Largest constraint scope expanded into clauses.
    #[arg(long, default_value_t = DEFAULT_SCOPE_CAP)]
    cap: usize,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the instance before clause expansion.
    #[arg(long = "abstract")]
    abstract_out: Option<PathBuf>,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long, default_value = "fixed")]
    policy: BranchingPolicy,
    #[arg(long)]
    no_cache: bool,
    /// Maximum number of decisions.
    #[arg(long)]
    budget: Option<u64>,
}

impl CompileArgs {
    fn options(&self) -> CompileOptions {
        CompileOptions { policy: self.policy, cache: !self.no_cache, budget: self.budget }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` when a requested check failed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Generate(args) => generate(args),
        Command::Analyze { input } => analyze(&read_cnf(&input)?),
        Command::Count { input, compile } => count(&read_cnf(&input)?, compile.options()),
        Command::Compile { input, output, compile } => {
            let f = read_cnf(&input)?;
            let (circuit, s) = compile_dpll(&f, compile.options())?;
            write_atomic(&output, &write_nnf(&circuit))?;
            println!(
                "nodes={} edges={} decisions={} cache_hits={} splits={} wall_ms={}",
                s.nodes,
                s.edges,
                s.decisions,
                s.cache_hits,
                s.component_splits,
                s.wall.as_millis()
            );
            Ok(true)
        }
        Command::Check { input } => check(&read_nnf(&input)?),
        Command::Forget { input, vars, keep_x_of, output } => {
            let circuit = read_nnf(&input)?;
            let vars: BTreeSet<u32> = match keep_x_of {
                Some(cnf) => {
                    let f = read_cnf(&cnf)?;
                    let xs: BTreeSet<u32> = f.vars.x_vars().into_iter().collect();
                    if xs.is_empty() {
                        bail!("{} has no code-variable comments", cnf.display());
                    }
                    circuit.vars().into_iter().filter(|v| !xs.contains(v)).collect()
                }
                None => vars.into_iter().collect(),
            };
            let out = circuit.forget(&vars)?;
            write_atomic(&output, &write_nnf(&out))?;
            println!("forgot {} variables; nodes={} edges={}", vars.len(), out.num_nodes(), out.num_edges());
            Ok(true)
        }
        Command::Rectcover { input, beta, cap, cover, output } => {
            let f = TruthTable::parse(&read(&input)?)?;
            if let Some(path) = cover {
                let cover = parse_cover(&f, &read(&path)?)?;
                return Ok(match verify_cover(&f, &cover, beta) {
                    Ok(()) => {
                        println!("cover of size {} verified at beta={beta}", cover.len());
                        true
                    }
                    Err(v) => {
                        println!("cover rejected: {v}");
                        false
                    }
                });
            }
            let best = min_cover_with(&f, beta, cap, Exec::default())?;
            println!("min cover: {} (beta={beta})", best.len());
            if let Some(out) = output {
                write_atomic(&out, &write_cover(&f, &best))?;
            }
            Ok(true)
        }
        Command::Experiment { grid, output, timing, sequential } => {
            let grid = grid::parse_grid(&read(&grid)?)?;
            let exec = if sequential { Exec::Sequential } else { Exec::default() };
            let report = scaling_experiment(&grid, exec);
            let text = report.render(timing);
            match output {
                Some(path) => write_atomic(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(report.all_passed())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_cnf(path: &Path) -> Result<CnfFormula> {
    parse_dimacs(&read(path)?).with_context(|| format!("{} is not valid DIMACS", path.display()))
}

fn read_nnf(path: &Path) -> Result<NnfCircuit> {
    parse_nnf(&read(path)?).with_context(|| format!("{} is not a valid NNF file", path.display()))
}

fn need(value: Option<usize>, flag: &str, mode: GeneratorMode) -> Result<usize> {
    value.ok_or_else(|| anyhow!("{mode} mode requires {flag}"))
}

fn generate(args: GenerateArgs) -> Result<bool> {
    let mode = args.mode;
    // a given matrix fixes everything the naive encoding needs
    let (k, b) = match (mode, &args.matrix) {
        (GeneratorMode::Naive, Some(_)) => (args.k.unwrap_or(1), args.b.unwrap_or(0)),
        _ => (need(args.k, "-k", mode)?, need(args.b, "-b", mode)?),
    };
    let mut params = GeneratorParams::new(k, b, 0);
    params.seed = args.seed;
    params.block_width = args.width;
    if args.width.is_some() && mode != GeneratorMode::Nd {
        bail!("--width applies to nd mode only");
    }
    let n = match mode {
        GeneratorMode::Nd => {
            params.c = need(args.c, "-c", mode)?;
            if args.n.is_some_and(|n| n != params.nd_len()) {
                bail!("nd mode fixes n = c*k*b = {}", params.nd_len());
            }
            Some(params.nd_len())
        }
        _ => {
            if args.c.is_some() {
                bail!("-c applies to nd mode only");
            }
            if args.matrix.is_some() {
                args.n
            } else {
                Some(need(args.n, "-n", mode)?)
            }
        }
    };
    let a = match (&args.matrix, args.seed) {
        (Some(path), _) => {
            let a = F2Matrix::parse(&read(path)?)?;
            if n.is_some_and(|n| n != a.num_cols()) {
                bail!("-n {} does not match the {} columns of {}", n.unwrap(), a.num_cols(), path.display());
            }
            a
        }
        (None, Some(seed)) => sample_parity_check(params.m(), n.expect("n is set without --matrix"), seed),
        (None, None) => bail!("a random matrix needs --seed (or pass --matrix)"),
    };
    let mut inst: AbstractInstance = match mode {
        GeneratorMode::Naive => abstract_naive(&a),
        GeneratorMode::BlockPw => abstract_blocked(&a, &params)?,
        GeneratorMode::Nd => abstract_nd(&a, &params)?,
    };
    inst.provenance.params.seed = args.seed;
    if let Some(path) = &args.abstract_out {
        write_atomic(path, &inst.render())?;
    }
    let f = match inst.materialize(args.cap) {
        Err(e @ Error::ScopeTooLarge { .. }) => {
            return Err(anyhow!(e)).context(
                "lower -b (scopes grow with the block height) or raise --cap up to 30; \
                 --abstract FILE writes the instance without clause expansion",
            )
        }
        r => r?,
    };
    write_atomic(&args.output, &write_dimacs(&f))?;
    println!("vars={} clauses={} size={}", f.num_vars(), f.num_clauses(), formula_size(&f));
    Ok(true)
}

fn analyze(f: &CnfFormula) -> Result<bool> {
    let g = incidence_graph(f);
    let nd = neighborhood_partition(&g).diversity();
    let contracted = modular_contraction(&g);
    println!("vars={} clauses={} size={}", f.num_vars(), f.num_clauses(), formula_size(f));
    println!("incidence graph: vertices={} edges={}", g.num_vertices(), g.num_edges());
    println!("neighborhood diversity: {nd}");
    println!("contracted graph: vertices={} edges={}", contracted.num_vertices(), contracted.num_edges());
    if contracted.num_vertices() <= EXACT_PATHWIDTH_LIMIT {
        println!("exact modular pathwidth: {}", exact_pathwidth(&contracted)?);
    }
    let Some(prov) = f.provenance.as_ref().filter(|p| p.mode == GeneratorMode::BlockPw) else {
        println!("decomposition: n/a");
        return Ok(true);
    };
    let resolved = resolve_claim_decomposition(f)?;
    let bound = 2 * prov.params.k - 1;
    match resolved.validation.width() {
        Some(w) if w <= bound => {
            println!("modular pathwidth bound: {w} (validated)");
            Ok(true)
        }
        Some(w) => {
            println!("modular pathwidth bound: {w} exceeds {bound}");
            Ok(false)
        }
        None => {
            println!("modular pathwidth bound: invalid decomposition ({:?})", resolved.validation);
            Ok(false)
        }
    }
}

fn count(f: &CnfFormula, options: CompileOptions) -> Result<bool> {
    let (circuit, _) = compile_dpll(f, options)?;
    let over: BTreeSet<u32> = (1..=f.num_vars() as u32).collect();
    let models = circuit.count_models(&over)?;
    let oracle: Option<BigUint> = f.provenance.as_ref().map(|p| affine_model_count(&LinearCode::new(p.matrix.clone())));
    // the affine count equals the model count only when every auxiliary
    // variable is determined by the code variables, as in generated files
    let determined = f.vars.iter().all(|(_, r)| matches!(r, Some(VarRole::X(_)) | Some(VarRole::Z(..))));
    match oracle.filter(|_| determined) {
        Some(o) => {
            let ok = o == models;
            println!("models={models} oracle={o} {}", if ok { "MATCH" } else { "MISMATCH" });
            Ok(ok)
        }
        None => {
            println!("models={models} oracle=n/a");
            Ok(true)
        }
    }
}

fn check(circuit: &NnfCircuit) -> Result<bool> {
    let bad_and = circuit.check_decomposable();
    println!("nodes={} edges={} vars={}", circuit.num_nodes(), circuit.num_edges(), circuit.vars().len());
    if bad_and.is_empty() {
        println!("decomposable: ok");
    } else {
        println!("decomposable: FAIL at nodes {bad_and:?}");
    }
    let det_ok = if circuit.vars().len() <= BRUTE_FORCE_CIRCUIT_VARS {
        let bad_or = circuit.check_deterministic()?;
        if bad_or.is_empty() {
            println!("deterministic: ok");
        } else {
            println!("deterministic: FAIL at nodes {bad_or:?}");
        }
        bad_or.is_empty()
    } else {
        println!("deterministic: skipped (more than {BRUTE_FORCE_CIRCUIT_VARS} variables)");
        true
    };
    Ok(bad_and.is_empty() && det_ok)
}
