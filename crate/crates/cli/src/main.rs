use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use coot_mvsihe::enhancement::PartitionChoice;
use coot_mvsihe::harness::{batch_evaluate, enhance_one, export_trace, stability_run, train_niqe, Method, RunConfig};
use coot_mvsihe::image::{load_image, save_image};
use coot_mvsihe::metrics::{evaluate_with, PsnrDenominator};
use coot_mvsihe::nr_quality::{
    brisque_features, brisque_score, niqe_score, FitnessMode, DEFAULT_PATCH_SIZE, DEFAULT_THRESHOLD, FEATURE_NAMES,
};
use coot_mvsihe::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "coot-mvsihe", version, about = "Contrast enhancement with coot-tuned MVSIHE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one image with optimizer-selected parameters.
    Enhance {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Convergence trace CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// One-row CSV with the chosen parameters and full-reference metrics.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare enhancement methods over a directory of images.
    Batch {
        dir: PathBuf,
        /// Comma-separated subset of he,bbhe,dsihe,mvsihe,coa.
        #[arg(long, default_value = "he,bbhe,dsihe,mvsihe,coa")]
        methods: String,
        #[command(flatten)]
        run: RunArgs,
        /// Per-image CSV; averages go to <stem>_averages.csv.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Metric spread over repeated optimizer runs with derived seeds.
    Stability {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        /// Seed increment between runs (0 repeats the base seed).
        #[arg(long)]
        seed_stride: Option<u64>,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Fit a NIQE model to the patches of a pristine image corpus.
    TrainNiqe {
        dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PATCH_SIZE)]
        patch: usize,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, short, default_value = "niqe_model.txt")]
        out: PathBuf,
    },
    /// Print NIQE and BRISQUE scores.
    Score {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Dump raw BRISQUE feature vectors as CSV.
    BrisqueFeatures {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitnessArg {
    Niqe,
    BrisqueNiqe,
}

#[derive(Clone, Copy, ValueEnum)]
enum PsnrArg {
    Mse,
    Sqrt,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long, value_enum)]
    fitness: Option<FitnessArg>,
    #[arg(long)]
    svr_model: Option<PathBuf>,
    #[arg(long)]
    niqe_model: Option<PathBuf>,
    #[arg(long, value_enum)]
    psnr: Option<PsnrArg>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            c.coot.seed = s;
        }
        if let Some(i) = self.iters {
            c.coot.max_iters = i;
        }
        if let Some(p) = self.pop {
            c.coot.population = p;
        }
        if let Some(f) = self.fitness {
            c.fitness_mode = match f {
                FitnessArg::Niqe => FitnessMode::NiqeOnly,
                FitnessArg::BrisqueNiqe => FitnessMode::BrisqueNiqe,
            };
        }
        if let Some(p) = &self.svr_model {
            c.svr_model = Some(p.clone());
        }
        if let Some(p) = &self.niqe_model {
            c.niqe_model = Some(p.clone());
        }
        if let Some(p) = self.psnr {
            c.psnr_denominator = match p {
                PsnrArg::Mse => PsnrDenominator::Mse,
                PsnrArg::Sqrt => PsnrDenominator::Sqrt,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Report(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Enhance {
            input,
            output,
            run,
            trace,
            report,
        } => {
            let config = run.resolve()?;
            let models = config.load_models()?;
            let img = load_image(&input)?;
            let out = enhance_one(&img, &config, &models)?;
            save_image(&out.enhanced, &output)?;
            if let Some(p) = trace.as_ref().or(config.trace_path.as_ref()) {
                export_trace(&out.trace, p)?;
            }
            let metrics = evaluate_with(&img, &out.enhanced, config.psnr_denominator)?;
            let PartitionChoice::Fixed(p) = out.params.partition else {
                unreachable!("optimized parameters always carry a fixed partition")
            };
            let row = format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                input.display(),
                output.display(),
                out.params.delta,
                p.k_h1(),
                p.k_h2(),
                p.k_h3(),
                out.best_fitness,
                metrics.ambe,
                metrics.psnr,
                metrics.ssi
            );
            if let Some(path) = report.as_ref().or(config.report_path.as_ref()) {
                write_file(
                    path,
                    &format!("input,output,delta,k_h1,k_h2,k_h3,fitness,ambe,psnr,ssi\n{row}"),
                )?;
            }
            println!(
                "delta={:.4} partition=({}, {}, {}) fitness={} ambe={:.4} psnr={:.4} ssi={:.4}",
                out.params.delta,
                p.k_h1(),
                p.k_h2(),
                p.k_h3(),
                out.best_fitness,
                metrics.ambe,
                metrics.psnr,
                metrics.ssi
            );
        }
        Command::Batch {
            dir,
            methods,
            run,
            report,
        } => {
            let config = run.resolve()?;
            let methods = methods
                .split(',')
                .filter(|m| !m.trim().is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Method>>>()?;
            let result = batch_evaluate(&dir, &methods, &config)?;
            if let Some(path) = report.as_ref().or(config.report_path.as_ref()) {
                result.write(path)?;
            }
            print!("{}", result.averages_csv()?);
        }
        Command::Stability {
            images,
            runs,
            seed_stride,
            run,
            report,
        } => {
            let mut config = run.resolve()?;
            if let Some(s) = seed_stride {
                config.seed_stride = s;
            }
            let models = config.load_models()?;
            let result = stability_run(&images, runs, &config, &models)?;
            let csv = result.to_csv();
            if let Some(path) = report.as_ref().or(config.report_path.as_ref()) {
                write_file(path, &csv)?;
            }
            print!("{csv}");
        }
        Command::TrainNiqe {
            dir,
            patch,
            threshold,
            out,
        } => {
            let model = train_niqe(&dir, patch, threshold)?;
            model.save(&out)?;
            println!("wrote {}", out.display());
        }
        Command::Score { images, run } => {
            let mut config = run.resolve()?;
            config.fitness_mode = FitnessMode::BrisqueNiqe;
            let models = config.load_models()?;
            let svr = models.svr.as_ref().expect("brisque mode loads an svr");
            println!("path,niqe,brisque");
            for path in images {
                let img = load_image(&path)?;
                let niqe = niqe_score(&img, &models.niqe)?;
                let brisque = brisque_score(&brisque_features(&img)?, svr)?;
                println!("{},{niqe},{brisque}", path.display());
            }
        }
        Command::BrisqueFeatures { images, out } => {
            let mut csv = format!("path,{}\n", FEATURE_NAMES.join(","));
            for path in images {
                let f = brisque_features(&load_image(&path)?)?;
                write!(csv, "{}", path.display()).expect("string write");
                for v in f.iter() {
                    write!(csv, ",{v}").expect("string write");
                }
                csv.push('\n');
            }
            match out {
                Some(p) => write_file(&p, &csv)?,
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Configuration => 2,
                ErrorClass::Data => 3,
                ErrorClass::Internal => 4,
            })
        }
    }
}
