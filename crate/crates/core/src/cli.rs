//! `grasspack` command line: `gen`, `refine`, `eval`, `export` and `stats`.
//!
//! Exit status is 0 on success, 1 on usage errors and 2 on runtime errors.
//! Runtime errors are printed to stderr as `error[<Kind>]: <message>`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, SparsityConfig};
use crate::codebook_io::{self, ExportConfig, KernelTensor, ScaleMode};
use crate::error::Result;
use crate::grassmann::Metric;
use crate::packing::{self, Codebook, PackingProblem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "grasspack", version, about = "Grassmannian subspace packings for conv kernel initialization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a packing and write it as a codebook file.
    Gen(GenArgs),
    /// Continue optimizing an existing codebook.
    Refine(RefineArgs),
    /// Print a codebook's manifest and distance statistics.
    Eval(EvalArgs),
    /// Reshape a codebook into a conv weight tensor.
    Export(ExportArgs),
    /// Per-kernel mean, variance, norm and sparsity.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "fs")]
    metric: Metric,
    #[arg(long, default_value_t = packing::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long = "max-iters", default_value_t = packing::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    #[arg(long = "tol", default_value_t = packing::DEFAULT_TOLERANCE)]
    tolerance: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct RefineArgs {
    input: PathBuf,
    #[arg(long, default_value_t = packing::DEFAULT_MAX_ITERS)]
    iters: usize,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    input: PathBuf,
    /// Machine-readable output.
    #[arg(long)]
    csv: bool,
    /// Histogram bin count.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Also print every basis vector (one row per subspace column).
    #[arg(long)]
    coords: bool,
}

#[derive(Debug, Args)]
struct ExportArgs {
    input: PathBuf,
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long, default_value = "raw")]
    scale: ScaleMode,
    /// Write the plain-text CSV layout instead of the binary one.
    #[arg(long)]
    csv: bool,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    /// A kernel export (binary) or a codebook file.
    input: PathBuf,
    #[arg(long)]
    csv: bool,
    /// Absolute sparsity threshold; defaults to 1e-2 × median kernel norm.
    #[arg(long)]
    threshold: Option<f64>,
    /// Scale applied when the input is a codebook.
    #[arg(long, default_value = "raw")]
    scale: ScaleMode,
}

/// Runs the CLI with explicit argument list and output streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.kind());
            EXIT_RUNTIME
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Refine(a) => refine(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Export(a) => export(a, out),
        Command::Stats(a) => stats(a, out),
    }
}

fn summary_line(c: &Codebook) -> String {
    let p = c.problem();
    let delta = c
        .min_distance()
        .map_or_else(|| "undefined".to_string(), |d| format!("{d:.10}"));
    format!(
        "G({}, {}) N={} {}: min_distance {delta}, iterations {}, converged {}",
        p.m,
        p.k,
        p.n,
        p.metric,
        c.iterations_used(),
        c.converged()
    )
}

fn gen(a: GenArgs, out: &mut dyn Write) -> Result<()> {
    let problem = PackingProblem {
        m: a.m,
        k: a.k,
        n: a.n,
        metric: a.metric,
        restarts: a.restarts,
        max_iters: a.max_iters,
        tolerance: a.tolerance,
        seed: a.seed,
    };
    let codebook = packing::optimize(&problem)?;
    codebook_io::save_codebook(&codebook, &a.output)?;
    writeln!(out, "{}", summary_line(&codebook))?;
    Ok(())
}

fn refine(a: RefineArgs, out: &mut dyn Write) -> Result<()> {
    let codebook = codebook_io::load_codebook(&a.input)?;
    let refined = packing::refine(&codebook, a.iters)?;
    codebook_io::save_codebook(&refined, &a.output)?;
    writeln!(out, "{}", summary_line(&refined))?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |x| x.to_string())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let c = codebook_io::load_codebook(&a.input)?;
    let p = c.problem();
    let fields: Vec<(&str, String)> = vec![
        ("m", p.m.to_string()),
        ("k", p.k.to_string()),
        ("N", p.n.to_string()),
        ("metric", p.metric.to_string()),
        ("min_distance", fmt_opt(c.min_distance())),
        ("rankin_bound", fmt_opt(c.rankin_bound())),
        ("generalized_rankin_bound", fmt_opt(c.generalized_rankin_bound())),
        ("seed", p.seed.to_string()),
        ("restarts", p.restarts.to_string()),
        ("max_iters", p.max_iters.to_string()),
        ("iterations_used", c.iterations_used().to_string()),
        ("converged", c.converged().to_string()),
    ];
    let spectrum = if c.len() >= 2 {
        analysis::distance_spectrum(&c, p.metric)?
    } else {
        Vec::new()
    };

    let mut text = String::new();
    if a.csv {
        text.push_str("field,value\n");
        for (k, v) in &fields {
            let _ = writeln!(text, "{k},{v}");
        }
    } else {
        for (k, v) in &fields {
            let _ = writeln!(text, "{k:<25}{v}");
        }
        if let Some(s) = spectrum.last() {
            let _ = writeln!(text, "{:<25}{s}", "max_distance");
        }
        text.push_str("\ndistance histogram:\n");
    }
    if let (Some(lo), Some(hi)) = (spectrum.first(), spectrum.last()) {
        if a.csv {
            text.push('\n');
        }
        text.push_str("bin_lo,bin_hi,count\n");
        for (l, h, n) in analysis::histogram(&spectrum, a.bins, *lo, *hi) {
            let _ = writeln!(text, "{l},{h},{n}");
        }
    }
    if a.coords {
        text.push('\n');
        text.push_str("subspace,column");
        for r in 0..p.m {
            let _ = write!(text, ",x{r}");
        }
        text.push('\n');
        for (i, s) in c.subspaces().iter().enumerate() {
            for j in 0..p.k {
                let _ = write!(text, "{i},{j}");
                for r in 0..p.m {
                    let _ = write!(text, ",{}", s.basis()[(r, j)]);
                }
                text.push('\n');
            }
        }
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn export(a: ExportArgs, out: &mut dyn Write) -> Result<()> {
    let c = codebook_io::load_codebook(&a.input)?;
    let tensor = codebook_io::export_kernels(&c, &ExportConfig::new(a.height, a.width, a.scale))?;
    if a.csv {
        std::fs::write(&a.output, tensor.to_csv())?;
    } else {
        std::fs::write(&a.output, tensor.to_bytes())?;
    }
    let [o, i, h, w] = tensor.shape();
    writeln!(out, "wrote {o}x{i}x{h}x{w} {} kernels to {}", a.scale, a.output.display())?;
    Ok(())
}

fn stats(a: StatsArgs, out: &mut dyn Write) -> Result<()> {
    let bytes = std::fs::read(&a.input)?;
    let tensor = if codebook_io::is_codebook(&bytes) {
        let c = codebook_io::decode_codebook(&bytes)?;
        let m = c.problem().m;
        codebook_io::export_kernels(&c, &ExportConfig::new(1, m, a.scale))?
    } else {
        KernelTensor::from_bytes(&bytes)?
    };
    let cfg = SparsityConfig {
        norm_threshold: a.threshold,
    };
    let report = analysis::compute_stats(&tensor, &cfg)?;
    let text = if a.csv { report.to_csv() } else { report.to_text() };
    out.write_all(text.as_bytes())?;
    Ok(())
}
