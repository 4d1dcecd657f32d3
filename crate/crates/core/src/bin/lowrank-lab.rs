use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::{fs, io};

use clap::{Args, Parser, Subcommand};

use lowrank_lab::exp::{
    compare, dataset_for, run, write_dataset, ExpError, ExperimentConfig, CONFIG_FILE,
};
use lowrank_lab::oracle::{
    conjecture1_linear, conjecture1_probe, conjecture1_scale_sweep, lazy_weight_sweep,
    lemma1_sweep, theorem1_empirical, theorem1_exact, theorem3_gradient_identity,
    Conjecture1Config, LazyWeightConfig, Theorem1Config, TheoremReport, Verdict,
};

/// Output directory used when `--out` is not given.
const OUT_ENV: &str = "LOWRANK_LAB_OUT";

#[derive(Parser)]
#[command(
    name = "lowrank-lab",
    version,
    about = "Low-rank regularization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write train/val/test CSV files.
    Gen(Single),
    /// Train one configuration and write metrics.csv, report.json, config.txt.
    Run(Single),
    /// Run several configurations over several seeds and tabulate the results.
    Compare(CompareArgs),
    /// Run a verification experiment; exits with 3 if an asserted check fails.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Single {
    /// Config file with `key = value` lines; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $LOWRANK_LAB_OUT, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: ConfigFlags,
}

#[derive(Args)]
struct CompareArgs {
    /// Config files to compare; they may differ only in regularizer and damping.
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    /// Regularizer variants applied to the shared flags, e.g. `none`, `dlr`,
    /// `alr/inv_t`, `dropout:0.2`. Used when no config files are given.
    #[arg(long = "variant", value_delimiter = ',')]
    variants: Vec<String>,
    /// Seeds to average over.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fields: ConfigFlags,
}

#[derive(Args)]
struct OracleArgs {
    /// theorem1, theorem1-empirical, lemma1, theorem3, lazy-weight,
    /// conjecture1, conjecture1-linear, conjecture1-sweep or all.
    name: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One flag per config key.
#[derive(Args, Default)]
struct ConfigFlags {
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    dims: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    #[arg(long)]
    outputs: Option<String>,
    #[arg(long)]
    n_train: Option<String>,
    #[arg(long)]
    n_val: Option<String>,
    #[arg(long)]
    n_test: Option<String>,
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    input_scale: Option<String>,
    #[arg(long)]
    data_dir: Option<String>,
    #[arg(long)]
    target_columns: Option<String>,
    #[arg(long)]
    layers: Option<String>,
    #[arg(long)]
    input_shape: Option<String>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    regularizer: Option<String>,
    #[arg(long)]
    damping: Option<String>,
    #[arg(long)]
    patience: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    step_size: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    max_epochs: Option<String>,
    #[arg(long)]
    rank: Option<String>,
    #[arg(long)]
    probe_size: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl ConfigFlags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let all = [
            ("dataset", &self.dataset),
            ("dims", &self.dims),
            ("classes", &self.classes),
            ("outputs", &self.outputs),
            ("n_train", &self.n_train),
            ("n_val", &self.n_val),
            ("n_test", &self.n_test),
            ("noise", &self.noise),
            ("input_scale", &self.input_scale),
            ("data_dir", &self.data_dir),
            ("target_columns", &self.target_columns),
            ("layers", &self.layers),
            ("input_shape", &self.input_shape),
            ("loss", &self.loss),
            ("regularizer", &self.regularizer),
            ("damping", &self.damping),
            ("patience", &self.patience),
            ("epsilon", &self.epsilon),
            ("step_size", &self.step_size),
            ("batch_size", &self.batch_size),
            ("max_epochs", &self.max_epochs),
            ("rank", &self.rank),
            ("probe_size", &self.probe_size),
            ("seed", &self.seed),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
            .collect()
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
    Assert(String),
}

impl From<ExpError> for Failure {
    fn from(e: ExpError) -> Self {
        match e.exit_code() {
            2 => Failure::Numeric(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Usage(format!("{}: {e}", path.display()))
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// File entries first, then flags replacing keys they repeat.
fn load_config(
    file: Option<&Path>,
    flags: &ConfigFlags,
    extra: &[(&str, String)],
) -> Result<ExperimentConfig, Failure> {
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Failure::Usage(format!(
                    "{} line {}: expected 'key = value'",
                    path.display(),
                    i + 1
                ))
            })?;
            pairs.push((i + 1, k.trim().to_string(), v.trim().to_string()));
        }
    }
    for (k, v) in flags.pairs().into_iter().chain(extra.iter().cloned()) {
        pairs.retain(|(_, key, _)| key != k);
        pairs.push((0, k.to_string(), v));
    }
    ExperimentConfig::from_pairs(&pairs).map_err(|e| match file {
        Some(p) => Failure::Usage(format!("{}: {e}", p.display())),
        None => Failure::Usage(e.to_string()),
    })
}

fn cmd_gen(args: Single) -> Result<(), Failure> {
    let cfg = load_config(args.config.as_deref(), &args.fields, &[])?;
    let ds = dataset_for(&cfg)?;
    let dir = out_dir(args.out);
    write_dataset(&ds, &dir)?;
    fs::write(dir.join(CONFIG_FILE), cfg.to_string()).map_err(io_err(&dir))?;
    println!(
        "wrote {} train / {} val / {} test samples to {}",
        ds.train.len(),
        ds.val.len(),
        ds.test.as_ref().map_or(0, |t| t.len()),
        dir.display()
    );
    Ok(())
}

fn cmd_run(args: Single) -> Result<(), Failure> {
    let cfg = load_config(args.config.as_deref(), &args.fields, &[])?;
    let dir = out_dir(args.out);
    let out = run(&cfg, Some(&dir))?;
    let m = out
        .report
        .final_metrics
        .as_ref()
        .expect("at least one epoch");
    println!(
        "{}: {} epochs ({:?}), train loss {}, val loss {}{}",
        out.report.label,
        out.report.epochs,
        out.report.stop.expect("finished"),
        num(m.train_loss),
        num(m.val_loss),
        m.test_loss
            .map(|t| format!(", test loss {}", num(t)))
            .unwrap_or_default()
    );
    println!("results in {}", dir.display());
    Ok(())
}

fn num(x: f64) -> String {
    if x.abs() < 1e4 {
        format!("{x:.5}")
    } else {
        format!("{x:.4e}")
    }
}

fn variant_pairs(v: &str) -> Vec<(&'static str, String)> {
    match v.split_once('/') {
        Some((r, d)) => vec![("regularizer", r.to_string()), ("damping", d.to_string())],
        None => vec![("regularizer", v.to_string())],
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let configs: Vec<ExperimentConfig> = if !args.configs.is_empty() {
        args.configs
            .iter()
            .map(|p| load_config(Some(p), &args.fields, &[]))
            .collect::<Result<_, _>>()?
    } else if !args.variants.is_empty() {
        let mut flags = args.fields;
        flags.seed.get_or_insert_with(|| "0".into());
        flags.regularizer = None;
        flags.damping = None;
        args.variants
            .iter()
            .map(|v| load_config(None, &flags, &variant_pairs(v)))
            .collect::<Result<_, _>>()?
    } else {
        return Err(Failure::Usage(
            "compare needs --config files or --variant list".into(),
        ));
    };
    let table = compare(&configs, &args.seeds)?;
    let dir = out_dir(args.out);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let path = dir.join("comparison.csv");
    fs::write(&path, table.to_csv()).map_err(io_err(&path))?;
    print!("{}", table.to_text());
    println!("table written to {}", path.display());
    Ok(())
}

fn oracle_reports(name: &str, seed: u64) -> Result<Vec<(&'static str, TheoremReport)>, Failure> {
    let t1 = Theorem1Config {
        seed,
        ..Theorem1Config::default()
    };
    let c1 = Conjecture1Config {
        seed,
        ..Conjecture1Config::default()
    };
    let ex = |r: Result<TheoremReport, lowrank_lab::oracle::OracleError>| {
        r.map_err(|e| Failure::from(ExpError::from(e)))
    };
    let one = |n: &'static str| -> Result<(&'static str, TheoremReport), Failure> {
        let r = match n {
            "theorem1" => ex(theorem1_exact(&t1))?,
            "theorem1-empirical" => ex(theorem1_empirical(&t1))?,
            "lemma1" => ex(lemma1_sweep(100, seed))?,
            "theorem3" => ex(theorem3_gradient_identity(20, seed))?,
            "lazy-weight" => {
                let seeds: Vec<u64> = (seed..seed + 5).collect();
                ex(lazy_weight_sweep(&LazyWeightConfig::default(), &seeds, 4))?
            }
            "conjecture1" => ex(conjecture1_probe(&c1))?,
            "conjecture1-linear" => ex(conjecture1_linear(&Conjecture1Config {
                samples: 20_000,
                ..c1.clone()
            }))?,
            "conjecture1-sweep" => {
                let seeds: Vec<u64> = (seed..seed + 5).collect();
                ex(conjecture1_scale_sweep(&c1, &[0.5, 1.0, 2.0], &seeds))?
            }
            other => return Err(Failure::Usage(format!("unknown oracle '{other}'"))),
        };
        Ok((n, r))
    };
    if name == "all" {
        [
            "theorem1",
            "theorem1-empirical",
            "lemma1",
            "theorem3",
            "lazy-weight",
            "conjecture1",
            "conjecture1-linear",
        ]
        .into_iter()
        .map(one)
        .collect()
    } else {
        let known = [
            "theorem1",
            "theorem1-empirical",
            "lemma1",
            "theorem3",
            "lazy-weight",
            "conjecture1",
            "conjecture1-linear",
            "conjecture1-sweep",
        ];
        match known.into_iter().find(|k| *k == name) {
            Some(k) => Ok(vec![one(k)?]),
            None => Err(Failure::Usage(format!("unknown oracle '{name}'"))),
        }
    }
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let reports = oracle_reports(&args.name, args.seed)?;
    let dir = out_dir(args.out);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut failed = Vec::new();
    for (name, r) in &reports {
        println!("{r}");
        let path = dir.join(format!("oracle-{name}.json"));
        let json = serde_json::to_string_pretty(r).expect("report serializes");
        fs::write(&path, json + "\n").map_err(io_err(&path))?;
        if r.verdict == Verdict::Fail {
            failed.push(format!("{name}: {}", r.failures().join("; ")));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assert(failed.join("\n")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Assert(m)) => {
            eprintln!("check failed:\n{m}");
            ExitCode::from(3)
        }
    }
}
