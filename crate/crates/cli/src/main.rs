//! `esp-router`: compile circuits for noisy devices, rank remote-CNOT
//! realizations, and measure compiled circuits under simulated noise.
//!
//! Exit codes: 0 success, 1 internal error or failed verification,
//! 2 bad usage or input.

mod manifest;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use esp_router::circuit::{emit_circuit, gen_cuccaro_adder, parse_circuit};
use esp_router::device::load_device;
use esp_router::evaluator::{ideal_of_compiled, run_experiment, ExperimentInput};
use esp_router::mapper::{compile_beam, compile_random, verify_compiled, CompileReport, CompiledCircuit, CompilerConfig};
use esp_router::remote::{candidate_set, shipped_templates, verify_template, MAX_HOPS};
use esp_router::{Circuit, DeviceModel};
use log::info;
use serde::{Deserialize, Serialize};

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "esp-router", version, about = "Noise-aware qubit mapping and routing")]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map and route a circuit onto a device.
    Compile(CompileArgs),
    /// Write the Cuccaro adder testbench.
    GenAdder(GenAdderArgs),
    /// Rank realizations of a CNOT between two device qubits.
    SelectCircuit(SelectArgs),
    /// Sample compiled circuits under device noise and compare with ideal.
    Evaluate(EvaluateArgs),
    /// Check a compiled circuit against its source, or the shipped templates.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Strategy {
    Beam,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Beam => "beam",
            Strategy::Random => "random",
        })
    }
}

#[derive(Args, Debug, Serialize)]
struct CompileArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long)]
    device: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    beam_width: usize,
    #[arg(long, default_value_t = 1_000)]
    random_mappings: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the greatest-connecting-edge start mapping.
    #[arg(long)]
    no_gce: bool,
    #[arg(long, value_enum, default_value_t = Strategy::Beam)]
    strategy: Strategy,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct GenAdderArgs {
    /// Input register width.
    #[arg(long)]
    n: usize,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SelectArgs {
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    control: usize,
    #[arg(long)]
    target: usize,
    #[arg(long, default_value_t = MAX_HOPS)]
    max_hops: usize,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    /// Directory of `<id>.qasm` files with `<id>.report.json` sidecars.
    #[arg(long)]
    compiled: PathBuf,
    #[arg(long)]
    device: PathBuf,
    #[arg(long, default_value_t = 5000)]
    shots: u64,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; defaults to the compiled directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// Source circuit.
    #[arg(long, requires_all = ["compiled", "device"])]
    circuit: Option<PathBuf>,
    /// Compiled circuit; its `.report.json` sidecar must sit next to it.
    #[arg(long)]
    compiled: Option<PathBuf>,
    #[arg(long)]
    device: Option<PathBuf>,
    /// Verify every shipped remote-CNOT template instead.
    #[arg(long, conflicts_with_all = ["circuit", "compiled", "device"])]
    templates: bool,
}

/// Sidecar written next to each compiled circuit.
#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    strategy: Strategy,
    #[serde(flatten)]
    report: CompileReport,
}

/// Problems with flags or input files (exit code 2).
#[derive(Debug)]
struct InputError(String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(msg: impl fmt::Display) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.to_string()))
}

/// Failed verification (exit code 1, not an internal error).
#[derive(Debug)]
struct VerificationFailed;

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn read_input(path: &Path, manifest: Option<&mut RunManifest>) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    if let Some(m) = manifest {
        m.add_input(path, &bytes);
    }
    String::from_utf8(bytes).map_err(|_| input_err(format!("{} is not UTF-8", path.display())))
}

fn read_device(path: &Path, manifest: Option<&mut RunManifest>) -> Result<DeviceModel> {
    let text = read_input(path, manifest)?;
    load_device(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

fn read_circuit(path: &Path, manifest: Option<&mut RunManifest>) -> Result<Circuit> {
    let text = read_input(path, manifest)?;
    parse_circuit(&text).map_err(|e| input_err(format!("{}: {e}", path.display())))
}

/// Writes bulk output to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| input_err(format!("cannot create {}: {e}", dir.display())))
}

fn stem(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| input_err(format!("no file name in {}", path.display())))
}

fn compile(args: &CompileArgs, threads: Option<usize>) -> Result<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("compile", args, Some(args.seed), threads)?;
    let circuit = read_circuit(&args.circuit, Some(&mut manifest))?;
    let device = read_device(&args.device, Some(&mut manifest))?;
    if circuit.num_qubits() > device.num_qubits() {
        return Err(input_err(format!(
            "circuit has {} variables but the device only {} qubits",
            circuit.num_qubits(),
            device.num_qubits()
        )));
    }
    let cfg = CompilerConfig {
        beam_width: args.beam_width,
        random_mappings: args.random_mappings,
        seed: args.seed,
        use_gce: !args.no_gce,
    };
    if args.strategy == Strategy::Beam {
        cfg.validate().map_err(input_err)?;
    }
    info!("compiling {} ({} gates) with {}", args.circuit.display(), circuit.len(), args.strategy);
    let t = Instant::now();
    let out = match args.strategy {
        Strategy::Beam => compile_beam(&circuit, &device, &cfg)?,
        Strategy::Random => compile_random(&circuit, &device, args.seed)?,
    };
    let seconds = t.elapsed().as_secs_f64();
    out.check_adjacency(&device)?;

    ensure_dir(&args.out)?;
    let name = stem(&args.circuit)?;
    let qasm = args.out.join(format!("{name}.qasm"));
    let report_path = args.out.join(format!("{name}.report.json"));
    let mut report = out.report((args.strategy == Strategy::Beam).then_some(cfg), seconds);
    if args.strategy == Strategy::Random {
        report.seed = Some(args.seed);
    }
    let sidecar = Sidecar {
        strategy: args.strategy,
        report,
    };
    write_file(&qasm, &out.to_qasm())?;
    write_file(&report_path, &(serde_json::to_string_pretty(&sidecar)? + "\n"))?;
    manifest.outputs = vec![qasm.display().to_string(), report_path.display().to_string()];
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.write(&args.out)?;
    println!(
        "{name}: {} gates, esp {:.6}, {seconds:.3}s -> {}",
        out.gate_count(),
        out.esp(),
        qasm.display()
    );
    Ok(())
}

fn gen_adder(args: &GenAdderArgs) -> Result<()> {
    let c = gen_cuccaro_adder(args.n).map_err(input_err)?;
    let text = emit_circuit(&c);
    match &args.out {
        Some(path) => {
            write_file(path, &text)?;
            println!("{}: {} gates on {} qubits", path.display(), c.len(), c.num_qubits());
        }
        None => emit(&text)?,
    }
    Ok(())
}

fn select_circuit(args: &SelectArgs) -> Result<()> {
    let device = read_device(&args.device, None)?;
    for q in [args.control, args.target] {
        if q >= device.num_qubits() {
            return Err(input_err(format!("qubit {q} is not on the device")));
        }
    }
    if args.control == args.target {
        return Err(input_err("control and target must differ"));
    }
    let set = candidate_set(&device, args.control, args.target, args.max_hops).map_err(input_err)?;
    if set.candidates.is_empty() {
        println!(
            "no candidates: qubits {} and {} are more than {} hop(s) apart",
            args.control, args.target, args.max_hops
        );
        return Ok(());
    }
    let mut table = String::from("rank\tname\tpath\thops\tgates\tesp\n");
    for (i, c) in set.candidates.iter().enumerate() {
        let path: Vec<String> = c.template.path.iter().map(usize::to_string).collect();
        table += &format!(
            "{}\t{}\t{}\t{}\t{}\t{:.6}\n",
            i + 1,
            c.template.name,
            path.join("-"),
            c.template.hop_count(),
            c.template.gates.len(),
            c.esp
        );
    }
    emit(&table)
}

fn evaluate(args: &EvaluateArgs, threads: Option<usize>) -> Result<()> {
    let start = Instant::now();
    if args.shots == 0 {
        return Err(input_err("--shots must be at least 1"));
    }
    if args.runs == 0 {
        return Err(input_err("--runs must be at least 1"));
    }
    let mut manifest = RunManifest::new("evaluate", args, Some(args.seed), threads)?;
    let device = read_device(&args.device, Some(&mut manifest))?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.compiled)
        .map_err(|e| input_err(format!("cannot read {}: {e}", args.compiled.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "qasm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(input_err(format!("no .qasm files in {}", args.compiled.display())));
    }
    let mut inputs = Vec::new();
    for path in &files {
        let id = stem(path)?;
        let circuit = read_circuit(path, Some(&mut manifest))?;
        let side_path = path.with_file_name(format!("{id}.report.json"));
        let side_text = read_input(&side_path, Some(&mut manifest))?;
        let side: Sidecar =
            serde_json::from_str(&side_text).map_err(|e| input_err(format!("{}: {e}", side_path.display())))?;
        let compiled = CompiledCircuit::from_report(&device, &circuit, &side.report)
            .map_err(|e| input_err(format!("{}: {e}", path.display())))?;
        inputs.push(ExperimentInput {
            circuit_id: id,
            compiler: side.strategy.to_string(),
            compiled,
        });
    }
    info!("evaluating {} circuits, {} runs of {} shots", inputs.len(), args.runs, args.shots);
    let result = run_experiment(&inputs, &device, args.runs, args.shots, args.seed).map_err(|e| match e {
        esp_router::evaluator::EvalError::TooManyQubits { .. } => input_err(e),
        other => anyhow!(other),
    })?;

    let out_dir = args.out.clone().unwrap_or_else(|| args.compiled.clone());
    ensure_dir(&out_dir)?;
    let tsv = result.to_tsv();
    let tsv_path = out_dir.join("experiment.tsv");
    write_file(&tsv_path, &tsv)?;
    manifest.outputs.push(tsv_path.display().to_string());
    for input in &inputs {
        let p = out_dir.join(format!("{}.ideal.csv", input.circuit_id));
        write_file(&p, &ideal_of_compiled(&input.compiled)?.to_csv())?;
        manifest.outputs.push(p.display().to_string());
    }
    manifest.wall_seconds = start.elapsed().as_secs_f64();
    manifest.write(&out_dir)?;
    emit(&tsv)?;
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<()> {
    if args.templates {
        let mut failed = 0;
        for t in shipped_templates() {
            let r = verify_template(&t);
            println!(
                "{}\t{}\t{:?}\t{:?}\t{:.2e}",
                if r.passed { "PASS" } else { "FAIL" },
                t.name,
                t.path,
                t.domain,
                r.max_deviation
            );
            failed += !r.passed as usize;
        }
        if failed > 0 {
            return Err(VerificationFailed.into());
        }
        return Ok(());
    }
    let (Some(src), Some(compiled), Some(dev)) = (&args.circuit, &args.compiled, &args.device) else {
        return Err(input_err("give --circuit, --compiled and --device, or --templates"));
    };
    let source = read_circuit(src, None)?;
    let device = read_device(dev, None)?;
    let placed = read_circuit(compiled, None)?;
    let side_path = compiled.with_file_name(format!("{}.report.json", stem(compiled)?));
    let side: Sidecar = serde_json::from_str(&read_input(&side_path, None)?)
        .map_err(|e| input_err(format!("{}: {e}", side_path.display())))?;
    let out = CompiledCircuit::from_report(&device, &placed, &side.report).map_err(input_err)?;
    let r = verify_compiled(&source, &out).map_err(input_err)?;
    if r.passed {
        println!("PASS max deviation {:.2e}", r.max_deviation);
        Ok(())
    } else {
        println!("FAIL {}", r.message.unwrap_or_default());
        Err(VerificationFailed.into())
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(InputError("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Compile(a) => compile(a, cli.threads),
        Command::GenAdder(a) => gen_adder(a),
        Command::SelectCircuit(a) => select_circuit(a),
        Command::Evaluate(a) => evaluate(a, cli.threads),
        Command::Verify(a) => verify(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ESP_ROUTER_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<VerificationFailed>() => ExitCode::from(1),
        Err(e) if e.is::<InputError>() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
