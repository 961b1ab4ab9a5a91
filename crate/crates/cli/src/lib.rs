//! Command-line front end for `morsecover`: packing bounds, covers, integral
//! certificates, the principal-value demo and shape validation.

mod commands;
mod config;
mod expr;
mod report;
mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Failure;

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// YAML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for randomized steps; 0 when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Error budget (integrate) or excess budget (cover).
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Residual mass left uncovered.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Also write the report (or certificate) here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// SVG drawing of a planar cover; coordinate table otherwise.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Bracket maximal packings of a ball and print the kappa bounds.
    Pack(commands::PackArgs),
    /// Build an a.e. cover, or select and partition an explicit family.
    Cover,
    /// Integrate a function and write its certificate.
    Integrate(commands::IntegrateArgs),
    /// Riemann and absolute sums of the principal-value counterexample.
    PvDemo(commands::PvArgs),
    /// Check Morse sets and satellite configurations.
    Validate(commands::ValidateArgs),
}

#[derive(Parser, Debug)]
#[command(name = "morsecover", version, about = "Morse covers and gauge-controlled Riemann sums")]
struct Top {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

fn init_threads() {
    if let Some(n) = std::env::var("MORSECOVER_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // Fails only if the pool already exists, e.g. on a second call.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Output paths from the config fill in for absent flags.
fn with_config_outputs(mut c: Common) -> Result<Common, Failure> {
    if let Some(path) = &c.config {
        let l = config::Loaded::from_path(path)?;
        c.out = c.out.or_else(|| l.cfg.out.map(|p| l.base.join(p)));
        c.svg = c.svg.or_else(|| l.cfg.svg.map(|p| l.base.join(p)));
    }
    Ok(c)
}

/// Run with `args` (including the program name), writing the report to `out`
/// and diagnostics to `err`. Returns the process exit code: 0 on success, 1
/// when a guarantee fails and 2 on bad input.
pub fn run_with(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let top = match Top::try_parse_from(args) {
        Ok(t) => t,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    init_threads();
    let c = match with_config_outputs(top.common.clone()) {
        Ok(c) => c,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            return f.code();
        }
    };
    let c = &c;
    let result = match &top.cmd {
        Cmd::Pack(a) => commands::pack(a, c),
        Cmd::Cover => commands::cover(c),
        Cmd::Integrate(a) => commands::integrate(a, c),
        Cmd::PvDemo(a) => commands::pv_demo(a, c),
        Cmd::Validate(a) => commands::validate(a, c),
    };
    let (text, code) = match result {
        Ok(o) => (o.report, if o.ok { 0 } else { 1 }),
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            return f.code();
        }
    };
    let _ = out.write_all(text.as_bytes());
    code
}

/// [`run_with`] on the process streams.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}
