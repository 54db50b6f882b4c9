//! Command-line front end: `series`, `profile`, `field` and `verify`.
//!
//! Exit codes: 0 success, 1 a verification suite failed, 2 usage error,
//! 3 numeric or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use helixflow::field::Variant;
use helixflow::grid::{parse_counts, parse_extent};
use helixflow::io::{export_samples, write_report, Format, RunConfig};
use helixflow::series::{expand_profile_series, parse_rational, series_ode_residual};
use helixflow::verify::{run_suite, Suite, VerifyOptions};
use helixflow::{Branch, Error, FlowSampler, GridSpec, HelixConfig, Profile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

const DEFAULT_EXTENT: &str = "0.92,1.08,-0.1,0.1,-0.1,0.1";

#[derive(Debug, Parser)]
#[command(
    name = "helixflow",
    version,
    about = "Steady helically symmetric Euler flow near a helix"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Puiseux coefficients of the profile functions.
    Series(SeriesArgs),
    /// Numerically continued profile functions h(t), c(t).
    Profile(ProfileArgs),
    /// Sample the flow on a cylindrical grid and export it.
    Field(FieldArgs),
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Helix slope k >= 0 (the helix is rho = 1, z = k phi).
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    k: String,
    /// Branch: + or -.
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    branch: String,
    /// Start of the cutoff window [eps, 2 eps].
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    /// Integrator and root-finding tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl Common {
    fn config(&self) -> Result<HelixConfig, Error> {
        let k: f64 = self
            .k
            .parse()
            .or_else(|_| {
                parse_rational(&self.k).map(|r| helixflow::series::Coefficient::to_f64(&r))
            })
            .map_err(|_| Error::InvalidConfig(format!("cannot read k = {:?}", self.k)))?;
        HelixConfig::new(k, self.branch.parse::<Branch>()?, self.eps, self.tol)
    }
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: Common,
    /// Highest power of s.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Exact rational coefficients (k is read as an exact rational).
    #[arg(long)]
    exact: bool,
    /// Also evaluate h, c, S at these signed abscissae s.
    #[arg(long = "eval", value_delimiter = ',', allow_hyphen_values = true)]
    eval: Vec<f64>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    common: Common,
    /// Requested end of the continuation.
    #[arg(long, default_value_t = 0.05)]
    t_max: f64,
    /// Number of log-spaced output points; 0 prints the integrator nodes.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    /// CSV output path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[command(flatten)]
    common: Common,
    /// raw, cutoff or beltrami.
    #[arg(long, default_value = "raw")]
    variant: Variant,
    /// Points per axis: N_rho,N_phi,N_z.
    #[arg(long, default_value = "16,16,16")]
    grid: String,
    /// rho0,rho1,phi0,phi1,z0,z1.
    #[arg(long, default_value = DEFAULT_EXTENT, allow_hyphen_values = true)]
    extent: String,
    /// csv, vtk or json.
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// all, series, ode, reduced, fd, beltrami, gs, identities or asymptotic.
    #[arg(long, default_value = "all")]
    suite: Suite,
    /// JSON report path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Seed for every randomly sampled check.
    #[arg(long)]
    seed: Option<u64>,
    /// Smaller grids for a fast smoke run.
    #[arg(long)]
    quick: bool,
}

enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::InvalidConfig(msg) => Failure::Usage(msg),
            other => Failure::Numeric(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Numeric(Error::Io(e))
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Series(a) => series(&a, out),
        Command::Profile(a) => profile(&a, out),
        Command::Field(a) => field(&a, out),
        Command::Verify(a) => verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_NUMERIC
        }
    }
}

fn series(a: &SeriesArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = a.common.config()?;
    if a.order < 1 {
        return Err(Failure::Usage("--order must be at least 1".into()));
    }
    let (h, c): (Vec<String>, Vec<String>) = if a.exact {
        let k = parse_rational(&a.common.k)?;
        let s = expand_profile_series(k, a.order)?;
        (
            s.h_coeffs.iter().map(|v| v.to_string()).collect(),
            s.c_coeffs.iter().map(|v| v.to_string()).collect(),
        )
    } else {
        let s = expand_profile_series(cfg.k, a.order)?;
        (
            s.h_coeffs.iter().map(|v| format!("{v:e}")).collect(),
            s.c_coeffs.iter().map(|v| format!("{v:e}")).collect(),
        )
    };
    writeln!(
        out,
        "# k = {}, order {}, {}",
        a.common.k,
        a.order,
        if a.exact { "exact" } else { "floating point" }
    )?;
    writeln!(out, "i\th_i\tc_i")?;
    for (i, (hi, ci)) in h.iter().zip(&c).enumerate() {
        writeln!(out, "{i}\t{hi}\t{ci}")?;
    }
    if !a.eval.is_empty() {
        let s = expand_profile_series(cfg.k, a.order)?;
        writeln!(out, "s\th\tc\tS\tresidual")?;
        for &x in &a.eval {
            let v = s.eval(x);
            let r = series_ode_residual(&s, &[x])?;
            writeln!(
                out,
                "{x:e}\t{:.16e}\t{:.16e}\t{:.16e}\t{r:.3e}",
                v.h, v.c, v.s_fn
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn profile(a: &ProfileArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = a.common.config()?;
    if a.t_max.is_nan() || a.t_max <= 0.0 {
        return Err(Failure::Usage(format!(
            "--t-max must be positive, got {}",
            a.t_max
        )));
    }
    let p = Profile::build(&cfg, a.t_max)?;
    let curve = p.curve(cfg.branch);
    let ts: Vec<f64> = if a.samples == 0 {
        curve.nodes.iter().map(|n| n.t).collect()
    } else if a.samples == 1 {
        vec![curve.t_start]
    } else {
        let (lo, hi) = (curve.t_start, curve.t_cap);
        (0..a.samples)
            .map(|i| {
                if i + 1 == a.samples {
                    hi
                } else {
                    lo * (hi / lo).powf(i as f64 / (a.samples - 1) as f64)
                }
            })
            .collect()
    };
    let mut text = String::new();
    text.push_str(&format!(
        "# k = {}, branch {}, t_cap = {:.16e} ({})\nt,h,c,S,dh,dc\n",
        cfg.k, cfg.branch, curve.t_cap, curve.stop
    ));
    for t in ts {
        let st = curve.at(t)?;
        text.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            st.t, st.h, st.c, st.s_fn, st.dh, st.dc
        ));
    }
    match &a.output {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    // the reachable part is still written before reporting the shortfall
    if curve.t_cap < a.t_max {
        return Err(Failure::Numeric(Error::OutOfRange {
            t: a.t_max,
            lo: curve.t_start,
            hi: curve.t_cap,
        }));
    }
    Ok(EXIT_OK)
}

fn field(a: &FieldArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = a.common.config()?;
    let grid = GridSpec::new(parse_counts(&a.grid)?, parse_extent(&a.extent)?)?;
    let started = Instant::now();
    let sampler = FlowSampler::from_config(&cfg, a.variant)?;
    let samples = sampler.sample_grid(&grid)?;
    let title = format!(
        "helixflow {} k={} branch {} eps={:e}",
        a.variant, cfg.k, cfg.branch, cfg.eps
    );
    export_samples(&samples, &grid, a.format, &a.output, &title)?;
    let active = samples.iter().filter(|s| s.in_support).count();
    writeln!(
        out,
        "wrote {} samples ({} in support) to {} in {:.2?}",
        samples.len(),
        active,
        a.output.display(),
        started.elapsed()
    )?;
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = a.common.config()?;
    let mut options = if a.quick {
        VerifyOptions::quick()
    } else {
        VerifyOptions::default()
    };
    if let Some(seed) = a.seed {
        options.seed = seed;
    }
    let started = Instant::now();
    let reports = run_suite(&cfg, a.suite, &options)?;
    for r in &reports {
        writeln!(
            out,
            "{:<12} {}  max {:.3e}  mean {:.3e}  tol {:.1e}  skipped {}/{}",
            r.suite,
            if r.passed { "PASS" } else { "FAIL" },
            r.max_residual,
            r.mean_residual,
            r.tolerance,
            r.skipped_points,
            r.requested_points
        )?;
        for c in r.components.iter().filter(|c| !c.passed) {
            writeln!(
                out,
                "    failed {}: {:.3e} > {:.1e}",
                c.name, c.max, c.tolerance
            )?;
        }
    }
    writeln!(out, "elapsed {:.2?}", started.elapsed())?;
    if let Some(path) = &a.report {
        let mut run = RunConfig::new("verify", &cfg, options.seed);
        run.suite = Some(a.suite.to_string());
        write_report(path, &run, &reports)?;
    }
    Ok(if reports.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_FAILED
    })
}
