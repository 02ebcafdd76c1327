use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crosseai::eval::DEFAULT_THRESHOLDS;
use crosseai::io::{load_map, save_map};
use crosseai::map::{fuse, scale_to_255, FusionParams};
use crosseai::pipeline::{self, DemoReport, RunConfig};
use crosseai::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_DEMO: u8 = 3;

#[derive(Parser)]
#[command(name = "crosseai", version, about = "Fuse saliency maps into disease bounding boxes and score them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FusionArgs {
    /// Heatmap weight in the fused map
    #[arg(long = "t", default_value_t = FusionParams::DEFAULT_T)]
    t: f64,
    /// Mask cutoff as a fraction of the fused maximum
    #[arg(long, default_value_t = FusionParams::DEFAULT_THRESHOLD_FRAC)]
    threshold_frac: f64,
    /// Candidate rectangles per map
    #[arg(long, default_value_t = FusionParams::DEFAULT_TOP_K)]
    top_k: usize,
    /// Skip ring expansion of candidates
    #[arg(long)]
    no_expand: bool,
}

impl FusionArgs {
    fn params(&self) -> FusionParams {
        FusionParams {
            t: self.t,
            threshold_frac: self.threshold_frac,
            top_k: self.top_k,
            expand: !self.no_expand,
        }
    }
}

#[derive(Args, Clone)]
struct BatchArgs {
    /// Directory of heatmaps named <image_id>__<label>.npy|.pgm
    #[arg(long)]
    heat_dir: PathBuf,
    /// Directory of gradient maps with matching names
    #[arg(long)]
    grad_dir: PathBuf,
    /// Annotation CSV (image_id,label,x,y,w,h,img_w,img_h)
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker threads
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    /// IoU cutoffs for evaluation
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
    thresholds: Vec<f64>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Subcommand)]
enum Command {
    /// Scale a heatmap and a gradient map and write their weighted blend
    Fuse {
        #[arg(long)]
        heat: PathBuf,
        #[arg(long)]
        grad: PathBuf,
        #[arg(long = "t", default_value_t = FusionParams::DEFAULT_T)]
        t: f64,
        /// Output map (.npy or .pgm)
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate one bounding box per map pair
    Boxgen {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        fusion: FusionArgs,
        /// Write PNG overlays next to the predictions
        #[arg(long)]
        overlay: bool,
    },
    /// Score predictions against annotations at several IoU cutoffs
    Eval {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS)]
        thresholds: Vec<f64>,
        /// Directory for eval.csv
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search the heatmap weight and mask cutoff
    Sweep {
        #[command(flatten)]
        batch: BatchArgs,
        #[command(flatten)]
        fusion: FusionArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        t_values: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        frac_values: Vec<f64>,
    },
    /// Run the pipeline on a built-in synthetic fixture
    Demo {
        #[arg(long, default_value = "crosseai-demo")]
        out: PathBuf,
        #[command(flatten)]
        fusion: FusionArgs,
    },
}

fn run_config(batch: &BatchArgs, fusion: &FusionArgs) -> RunConfig {
    RunConfig {
        params: fusion.params(),
        heat_dir: batch.heat_dir.clone(),
        grad_dir: batch.grad_dir.clone(),
        annotations: batch.annotations.clone(),
        out_dir: batch.out.clone(),
        thresholds: batch.thresholds.clone(),
        workers: batch.workers,
        overlays: false,
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Fuse { heat, grad, t, out } => {
            let fused = fuse(&scale_to_255(&load_map(&heat)?), &scale_to_255(&load_map(&grad)?), t)?;
            save_map(&fused, &out)?;
            println!("wrote {}", out.display());
        }
        Command::Boxgen { batch, fusion, overlay } => {
            let mut config = run_config(&batch, &fusion);
            config.overlays = overlay;
            let outcome = pipeline::cmd_boxgen(&config)?;
            warn_all(&outcome.warnings);
            for f in &outcome.failures {
                eprintln!("failed: {} {}: {}", f.image_id, f.label, f.error);
            }
            println!(
                "{} predictions, {} failures -> {}",
                outcome.predictions.len(),
                outcome.failures.len(),
                config.out_dir.display()
            );
        }
        Command::Eval {
            predictions,
            annotations,
            thresholds,
            out,
        } => {
            let report = pipeline::cmd_eval(&predictions, &annotations, &thresholds, out.as_deref())?;
            warn_all(&report.warnings);
            print!("{}", pipeline::render_table(&report.table));
        }
        Command::Sweep {
            batch,
            fusion,
            t_values,
            frac_values,
        } => {
            let config = run_config(&batch, &fusion);
            let report = pipeline::cmd_sweep(&config, &t_values, &frac_values)?;
            println!("{:>6} {:>8} {:>10} {:>10}", "t", "frac", "mean_acc", "mean_iou");
            for r in &report.rows {
                println!("{:>6.2} {:>8.2} {:>10.4} {:>10.4}", r.t, r.threshold_frac, r.mean_accuracy, r.mean_iou);
            }
            let best = &report.rows[report.best];
            println!(
                "best: t={} threshold_frac={} mean_iou={:.4}",
                best.t, best.threshold_frac, best.mean_iou
            );
        }
        Command::Demo { out, fusion } => {
            let report = pipeline::cmd_demo(&out, &fusion.params())?;
            match report.predicted {
                Some(b) => println!("generated box {b}, lesion box {}", report.lesion),
                None => println!("no box generated, lesion box {}", report.lesion),
            }
            println!("IoU = {:.4}", report.iou);
            println!(
                "off-class edge {}",
                if report.edge_excluded { "excluded" } else { "NOT excluded" }
            );
            print!("{}", pipeline::render_table(&report.table));
            if !report.passed() {
                eprintln!("demo failed: need IoU >= {} with the edge excluded", DemoReport::MIN_IOU);
                return Ok(EXIT_DEMO);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
