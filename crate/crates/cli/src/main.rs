//! `ccs`: sparse-grid cubature from the command line.
//!
//! Every command writes plain CSV (or a JSON grid) to stdout or `--output`.
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 point cap exceeded,
//! 4 failed diagnostic.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use ccs_core::gridfile::format_real;
use ccs_core::smolyak::DEFAULT_POINT_CAP;
use ccs_core::{
    ccs_error_bound, exactness_check, integrate, node_count_bound, norm_bound, operator_norm,
    parse_integrand, plan, BuildOptions, Construction, CubatureRule, GridFile, GridFormat,
    Integrand, Variant,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccs", version, about = "Clenshaw-Curtis Smolyak sparse-grid cubature")]
struct Cli {
    /// Refuse to build rules predicted to have more points than this.
    #[arg(long, global = true, env = "CCS_POINT_CAP", default_value_t = DEFAULT_POINT_CAP)]
    cap: u128,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the points and weights of A(d+k, d).
    Grid {
        #[arg(long)]
        dim: usize,
        /// Smolyak level k (q = dim + k).
        #[arg(long)]
        level: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Drop points whose merged weight cancels to (numerically) zero.
        #[arg(long)]
        prune_zero: bool,
        #[arg(long, value_enum, default_value_t = ConstructionArg::Delta)]
        construction: ConstructionArg,
    },
    /// Apply A(d+k, d) to a test function.
    Integrate {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// Integrand, e.g. `ridge-cos:1,0.3` or `monomial:3,0`.
        #[arg(long = "fn")]
        func: String,
        #[arg(long, value_enum, default_value_t = ConstructionArg::Delta)]
        construction: ConstructionArg,
    },
    /// Level and point-count bounds needed for accuracy eps.
    Plan {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::All)]
        variant: VariantArg,
    },
    /// Error of A(d+k, d) against the exact integral for k = 0..=k_max.
    Convergence {
        #[arg(long)]
        dim: usize,
        #[arg(long = "fn")]
        func: String,
        #[arg(long)]
        k_max: u32,
    },
    /// Check norm, point count and exactness of A(d+k, d) against their bounds.
    Diagnostics {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        level: u32,
        /// Total degree for the exactness check; defaults to 2k+1.
        #[arg(long)]
        degree: Option<u32>,
        /// Largest number of monomials tested (sampled beyond that).
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Relative residual tolerated by the exactness check.
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionArg {
    Delta,
    Combination,
    Recursive,
}

impl From<ConstructionArg> for Construction {
    fn from(c: ConstructionArg) -> Self {
        match c {
            ConstructionArg::Delta => Construction::Delta,
            ConstructionArg::Combination => Construction::Combination,
            ConstructionArg::Recursive => Construction::Recursive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    All,
    Ccs,
    PositiveCubature,
}

/// A diagnostic check failed; the report has already been written.
#[derive(Debug)]
struct DiagnosticFailure(usize);

impl std::fmt::Display for DiagnosticFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} diagnostic check(s) failed", self.0)
    }
}

impl std::error::Error for DiagnosticFailure {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ccs_core::Error as E;
    if err.downcast_ref::<DiagnosticFailure>().is_some() {
        return 4;
    }
    match err.downcast_ref::<E>() {
        Some(E::PointCapExceeded { .. }) => 3,
        Some(E::NonFiniteValue { .. }) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn build(dim: usize, k: u32, construction: Construction, cap: u128, prune_zero: bool) -> Result<CubatureRule> {
    let opts = BuildOptions {
        point_cap: cap,
        prune_zero,
    };
    Ok(CubatureRule::build(dim, k, construction, &opts)?)
}

fn real(v: f64) -> String {
    format_real(v)
}

fn opt_real(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), real)
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cap = cli.cap;
    match cli.command {
        Command::Grid {
            dim,
            level,
            format,
            output,
            prune_zero,
            construction,
        } => {
            let rule = build(dim, level, construction.into(), cap, prune_zero)?;
            let fmt = match format {
                Format::Csv => GridFormat::Csv,
                Format::Json => GridFormat::Json,
            };
            emit(&GridFile::from_rule(&rule).write(fmt), output.as_ref())
        }
        Command::Integrate {
            dim,
            level,
            func,
            construction,
        } => {
            let f = parse_integrand(&func, dim)?;
            let rule = build(dim, level, construction.into(), cap, false)?;
            let value = integrate(&rule, &f)?;
            let exact = f.exact_integral();
            let bound = (f.is_fd_member() && level >= 1)
                .then(|| ccs_error_bound(level, dim))
                .transpose()?;
            let mut s = String::from("fn,dim,k,n_points,norm,value,exact,abs_error,error_bound\n");
            writeln!(
                s,
                "\"{f}\",{dim},{level},{},{},{},{},{},{}",
                rule.len(),
                real(operator_norm(&rule)),
                real(value),
                opt_real(exact),
                opt_real(exact.map(|e| (value - e).abs())),
                opt_real(bound),
            )?;
            emit(&s, None)
        }
        Command::Plan { eps, dim, variant } => {
            let variants: &[Variant] = match variant {
                VariantArg::All => &[Variant::Ccs, Variant::PositiveCubature],
                VariantArg::Ccs => &[Variant::Ccs],
                VariantArg::PositiveCubature => &[Variant::PositiveCubature],
            };
            let mut s = String::from(
                "variant,eps,dim,k,error_bound,point_bound,ln_point_bound,binomial_bound\n",
            );
            for &v in variants {
                let p = plan(eps, dim, v)?;
                writeln!(
                    s,
                    "{},{},{dim},{},{},{},{},{}",
                    v.name(),
                    real(eps),
                    p.k,
                    real(p.error_bound),
                    real(p.point_bound()),
                    real(p.ln_point_bound),
                    real(p.binomial_bound().round_ties_even_if_small()),
                )?;
            }
            emit(&s, None)
        }
        Command::Convergence { dim, func, k_max } => {
            let f = parse_integrand(&func, dim)?;
            let exact = f.exact_integral();
            let mut s = String::from("k,n_points,norm,value,abs_error,ccs_error_bound\n");
            for k in 0..=k_max {
                let rule = build(dim, k, Construction::Delta, cap, false)?;
                let value = integrate(&rule, &f)?;
                let bound = (k >= 1).then(|| ccs_error_bound(k, dim)).transpose()?;
                writeln!(
                    s,
                    "{k},{},{},{},{},{}",
                    rule.len(),
                    real(operator_norm(&rule)),
                    real(value),
                    opt_real(exact.map(|e| (value - e).abs())),
                    opt_real(bound),
                )?;
            }
            emit(&s, None)
        }
        Command::Diagnostics {
            dim,
            level,
            degree,
            trials,
            tolerance,
        } => diagnostics(dim, level, degree, trials, tolerance, cap),
    }
}

fn diagnostics(dim: usize, k: u32, degree: Option<u32>, trials: usize, tol: f64, cap: u128) -> Result<()> {
    let rule = build(dim, k, Construction::Delta, cap, false)?;
    let norm = operator_norm(&rule);
    let nb = norm_bound(dim, k)?;
    let n = rule.len() as f64;
    let degree = degree.unwrap_or(2 * k + 1);
    let report = exactness_check(&rule, degree, trials);

    let mut checks: Vec<(String, f64, f64)> = vec![("norm<=binomial".into(), norm, nb.binomial_value())];
    if let Some(m) = nb.majorant_value() {
        checks.push(("norm<=exp_majorant".into(), norm, m));
    }
    let count_bound = if k == 0 { 1.0 } else { node_count_bound(dim, k)? };
    checks.push(("n_points<=count_bound".into(), n, count_bound));
    checks.push(("weight_sum_error".into(), (rule.weight_sum() - 1.0).abs(), 1e-12 * n));
    checks.push((format!("exactness_residual_degree_{degree}"), report.max_residual, tol));

    let mut s = String::from("check,measured,bound,status\n");
    let mut failed = 0;
    for (name, measured, bound) in &checks {
        // a small relative slack absorbs rounding in the measured norm
        let ok = *measured <= bound * (1.0 + 1e-12);
        failed += usize::from(!ok);
        writeln!(
            s,
            "{name},{},{},{}",
            real(*measured),
            real(*bound),
            if ok { "PASS" } else { "FAIL" }
        )?;
    }
    emit(&s, None)?;
    if failed > 0 {
        if let Some(w) = report.worst().filter(|w| w.residual > tol) {
            eprintln!("worst monomial {:?}: residual {}", w.exponents, real(w.residual));
        }
        return Err(DiagnosticFailure(failed).into());
    }
    Ok(())
}

trait RoundIfSmall {
    fn round_ties_even_if_small(self) -> f64;
}

impl RoundIfSmall for f64 {
    /// Binomials below 2^53 are integers; undo the rounding of exp(ln C).
    fn round_ties_even_if_small(self) -> f64 {
        if self < 9.0e15 {
            self.round()
        } else {
            self
        }
    }
}
