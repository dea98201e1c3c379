//! Command-line front end: coefficient tables at any cusp (exact engine or
//! numerical oracle), generator matrix dumps, absolute-value pattern
//! verification for the five-twist, and engine-vs-oracle comparison.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::io::Write;
use std::process::ExitCode;
use theta_cusps::characters::default_generator;
use theta_cusps::cyclotomic::Cyclo;
use theta_cusps::engine::{
    self, coeff_first_twist, coeff_from_vector, gg_check, higher_twist_vector, xi_global,
    HigherTwist,
};
use theta_cusps::metaplectic::{cusps_of_gamma0, scaling_matrix, Cusp, Mat2Q};
use theta_cusps::numeric::rat;
use theta_cusps::oracle::{fourier_extract, ExtractOptions, SeriesSpec};
use theta_cusps::table::{CoefficientTable, TwistSpec};
use theta_cusps::weil::{
    rho_generator, to_basis, xi2_diag, xi2_flip, xi2_upper, xi3_diag, xi3_flip, xi3_upper,
    BasisTag, GenKind,
};

#[derive(Parser)]
#[command(
    name = "theta-cusps",
    about = "Fourier coefficients of twisted theta series at arbitrary cusps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Source {
    Engine,
    Oracle,
}

#[derive(Args)]
struct TwistArgs {
    /// Twist prime (5, 7, 11 or 13); omit for the level-576 series
    #[arg(long)]
    p: Option<u64>,
    /// Index of the even character mod p (1..=(p-3)/2)
    #[arg(long, default_value_t = 1)]
    j: u64,
    /// Override the generator of the units mod p used for the basis order
    #[arg(long)]
    generator: Option<u64>,
}

impl TwistArgs {
    fn resolve(&self) -> Result<Option<HigherTwist>, String> {
        match self.p {
            None => Ok(None),
            Some(p) => {
                let g = self.generator.unwrap_or_else(|| default_generator(p));
                HigherTwist::with_generator(p, self.j, g)
                    .map(Some)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact coefficient tables at one or all cusps
    Coeffs {
        #[command(flatten)]
        twist: TwistArgs,
        /// Level (576 or (24p)^2); inferred from --p when omitted
        #[arg(long)]
        level: Option<u64>,
        /// Cusp selection: "inf", "u/w", or "all"
        #[arg(long, default_value = "all")]
        cusp: String,
        /// Largest frequency (cap 400)
        #[arg(long, default_value_t = 100)]
        nmax: u64,
        /// Exact engine values or numerical horocycle extraction
        #[arg(long, value_enum, default_value_t = Source::Engine)]
        source: Source,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
    },
    /// Exact generator matrices and character values
    Matrix {
        /// Prime: 2 and 3 print the scalar character values, 5..13 the
        /// representation matrices in both bases
        #[arg(long)]
        p: u64,
        /// Generator kind
        #[arg(long, value_parser = ["flip", "upper", "diag"])]
        gen: String,
        /// Parameter for upper/diag (numerator; use --a-den for fractions)
        #[arg(long, default_value_t = 1)]
        a: i64,
        #[arg(long, default_value_t = 1)]
        a_den: i64,
        #[arg(long)]
        generator: Option<u64>,
    },
    /// Verify the conjectured five-twist absolute-value patterns
    VerifyGg {
        #[arg(long, default_value_t = 5)]
        p: u64,
    },
    /// Run engine and oracle on the same grid and report deviations
    OracleCompare {
        #[command(flatten)]
        twist: TwistArgs,
        #[arg(long)]
        level: Option<u64>,
        #[arg(long, default_value = "all")]
        cusp: String,
        #[arg(long, default_value_t = 100)]
        nmax: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// List cusp representatives of Gamma_0(level)
    Cusps {
        #[arg(long)]
        level: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn parse_cusp(s: &str) -> Result<Cusp, String> {
    if s == "inf" || s == "oo" {
        return Ok(Cusp::infinity());
    }
    let (u, w) = match s.split_once('/') {
        Some((u, w)) => (
            u.parse::<i64>().map_err(|e| e.to_string())?,
            w.parse::<u64>().map_err(|e| e.to_string())?,
        ),
        None => (s.parse::<i64>().map_err(|e| e.to_string())?, 1),
    };
    Cusp::new(u, w).map_err(|e| e.to_string())
}

fn selected_cusps(sel: &str, level: u64) -> Result<Vec<Cusp>, String> {
    if sel == "all" {
        Ok(cusps_of_gamma0(level))
    } else {
        Ok(vec![parse_cusp(sel)?])
    }
}

struct Run {
    twist: Option<HigherTwist>,
    level: u64,
    m: u64,
}

fn resolve_run(twist: &TwistArgs, level: Option<u64>) -> Result<Run, String> {
    let tw = twist.resolve()?;
    let (level_inferred, m) = match &tw {
        None => (576, 24),
        Some(t) => (t.level(), 24 * t.p),
    };
    if let Some(l) = level {
        if l != level_inferred {
            return Err(format!(
                "level {l} inconsistent with the requested twist (expected {level_inferred})"
            ));
        }
    }
    Ok(Run {
        twist: tw,
        level: level_inferred,
        m,
    })
}

fn engine_coeffs(
    run: &Run,
    sigma: &Mat2Q,
    nmax: u64,
) -> Result<Vec<engine::CoeffResult>, String> {
    match &run.twist {
        None => (0..=nmax)
            .map(|nu| coeff_first_twist(sigma, nu).map_err(|e| e.to_string()))
            .collect(),
        Some(tw) => {
            let vec = higher_twist_vector(tw, sigma).map_err(|e| e.to_string())?;
            let xi = xi_global(&sigma.inverse()).map_err(|e| e.to_string())?;
            Ok((0..=nmax)
                .map(|nu| coeff_from_vector(tw, &xi, &vec, nu))
                .collect())
        }
    }
}

fn write_out(path: &Option<String>, content: &str) -> Result<(), String> {
    match path {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(p) => {
            let mut f = std::fs::File::create(p).map_err(|e| e.to_string())?;
            f.write_all(content.as_bytes()).map_err(|e| e.to_string())
        }
    }
}

fn cyclo_json(x: &Cyclo) -> serde_json::Value {
    let e = x.embed();
    serde_json::json!({
        "order": x.order(),
        "coeffs": x.coeffs().iter().map(theta_cusps::table::rat_str).collect::<Vec<_>>(),
        "re": e.re,
        "im": e.im,
    })
}

fn cmd_coeffs(
    twist: TwistArgs,
    level: Option<u64>,
    cusp: String,
    nmax: u64,
    source: Source,
    format: Format,
    out: Option<String>,
) -> Result<(), String> {
    if nmax > 400 {
        return Err("nmax capped at 400".into());
    }
    let run = resolve_run(&twist, level)?;
    let cusps = selected_cusps(&cusp, run.level)?;
    let twist_spec = run.twist.as_ref().map(|t| TwistSpec { p: t.p, j: t.j });
    let spec = match &run.twist {
        None => SeriesSpec::first_twist(),
        Some(tw) => SeriesSpec::higher_twist(&tw.psi()),
    };
    let mut blocks = Vec::new();
    for c in cusps {
        let sm = scaling_matrix(c.u, c.w, run.m).map_err(|e| e.to_string())?;
        let table = match source {
            Source::Engine => {
                let coeffs = engine_coeffs(&run, &sm.sigma, nmax)?;
                CoefficientTable::from_engine(run.level, twist_spec, c, &sm.sigma, &coeffs)
            }
            Source::Oracle => {
                let freqs: Vec<(i64, u64)> = (0..=nmax as i64).map(|n| (n, 1)).collect();
                let values =
                    fourier_extract(&spec, &sm.sigma, &freqs, ExtractOptions::default())
                        .map_err(|e| e.to_string())?;
                let rows: Vec<_> = values
                    .iter()
                    .map(|v| (v.nu_num as u64, v.value))
                    .collect();
                CoefficientTable::from_oracle(run.level, twist_spec, c, &sm.sigma, &rows)
            }
        };
        blocks.push(match format {
            Format::Json => table.to_json(),
            Format::Csv => table.to_csv(),
        });
    }
    let joined = match format {
        Format::Json => format!("[{}]\n", blocks.join(",\n")),
        Format::Csv => {
            let mut lines = Vec::new();
            for (i, b) in blocks.iter().enumerate() {
                for (k, line) in b.lines().enumerate() {
                    if i == 0 || k > 0 {
                        lines.push(line.to_string());
                    }
                }
            }
            lines.join("\n") + "\n"
        }
    };
    write_out(&out, &joined)
}

fn cmd_matrix(p: u64, gen: String, a: i64, a_den: i64, generator: Option<u64>) -> Result<(), String> {
    let arg = rat(a, a_den);
    if p == 2 || p == 3 {
        let value = match (p, gen.as_str()) {
            (2, "flip") => xi2_flip(),
            (2, "upper") => xi2_upper(&arg),
            (2, "diag") => xi2_diag(&arg).map_err(|e| e.to_string())?,
            (3, "flip") => xi3_flip(),
            (3, "upper") => xi3_upper(&arg),
            (3, "diag") => xi3_diag(&arg).map_err(|e| e.to_string())?,
            _ => return Err("gen must be flip, upper or diag".into()),
        };
        let doc = serde_json::json!({
            "p": p,
            "gen": gen,
            "a": format!("{arg}"),
            "value": cyclo_json(&value),
        });
        println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        return Ok(());
    }
    let g = generator.unwrap_or_else(|| default_generator(p));
    let kind = match gen.as_str() {
        "flip" => GenKind::Flip,
        "upper" => GenKind::Upper(arg.clone()),
        "diag" => GenKind::DiagUnit(arg.clone()),
        _ => return Err("gen must be flip, upper or diag".into()),
    };
    let b1 = rho_generator(p, g, &kind).map_err(|e| e.to_string())?;
    let b2 = to_basis(&b1, BasisTag::B2, g).map_err(|e| e.to_string())?;
    let dump = |m: &theta_cusps::weil::CycloMat| {
        (0..m.n)
            .map(|i| (0..m.n).map(|j| cyclo_json(m.get(i, j))).collect::<Vec<_>>())
            .collect::<Vec<_>>()
    };
    let doc = serde_json::json!({
        "p": p,
        "gen": gen,
        "a": format!("{arg}"),
        "generator": g,
        "b1": dump(&b1.mat),
        "b2": dump(&b2.mat),
    });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    Ok(())
}

fn cmd_verify_gg(p: u64) -> Result<bool, String> {
    let report = gg_check(p).map_err(|e| e.to_string())?;
    print!("{report}");
    if !report.asserted {
        println!("(patterns at p = {p} are reported, not asserted)");
    }
    Ok(report.ok())
}

fn cmd_oracle_compare(
    twist: TwistArgs,
    level: Option<u64>,
    cusp: String,
    nmax: u64,
    tol: f64,
) -> Result<bool, String> {
    if nmax > 400 {
        return Err("nmax capped at 400".into());
    }
    let run = resolve_run(&twist, level)?;
    let cusps = selected_cusps(&cusp, run.level)?;
    let spec = match &run.twist {
        None => SeriesSpec::first_twist(),
        Some(tw) => SeriesSpec::higher_twist(&tw.psi()),
    };
    let freqs: Vec<(i64, u64)> = (0..=nmax as i64).map(|n| (n, 1)).collect();
    let mut max_dev = 0.0f64;
    let mut breaches = Vec::new();
    for c in &cusps {
        let sm = scaling_matrix(c.u, c.w, run.m).map_err(|e| e.to_string())?;
        let engine_vals = engine_coeffs(&run, &sm.sigma, nmax)?;
        let oracle_vals = fourier_extract(&spec, &sm.sigma, &freqs, ExtractOptions::default())
            .map_err(|e| e.to_string())?;
        let mut cusp_dev = 0.0f64;
        for (e, o) in engine_vals.iter().zip(oracle_vals.iter()) {
            let d = (e.approx - o.value).norm();
            cusp_dev = cusp_dev.max(d);
            if d > tol {
                breaches.push(format!(
                    "cusp {c} nu={}: engine {:+.9}{:+.9}i vs oracle {:+.9}{:+.9}i (|diff| = {d:.3e})",
                    e.nu, e.approx.re, e.approx.im, o.value.re, o.value.im
                ));
            }
        }
        max_dev = max_dev.max(cusp_dev);
        println!("cusp {c}: max |engine - oracle| = {cusp_dev:.3e}");
    }
    println!(
        "overall max deviation over {} cusps, nu <= {nmax}: {max_dev:.3e} (tolerance {tol:.1e})",
        cusps.len()
    );
    for b in &breaches {
        println!("BREACH {b}");
    }
    Ok(breaches.is_empty())
}

fn cmd_cusps(level: u64, format: Format) -> Result<(), String> {
    let cusps = cusps_of_gamma0(level);
    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "level": level,
                "count": cusps.len(),
                "cusps": cusps.iter().map(|c| serde_json::json!({"u": c.u, "w": c.w})).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        Format::Csv => {
            println!("u,w");
            for c in &cusps {
                println!("{},{}", c.u, c.w);
            }
        }
    }
    Ok(())
}

fn configure_threads() {
    if let Ok(v) = std::env::var("THETA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap help/version requests are success, everything else usage
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Coeffs {
            twist,
            level,
            cusp,
            nmax,
            source,
            format,
            out,
        } => cmd_coeffs(twist, level, cusp, nmax, source, format, out).map(|_| true),
        Command::Matrix {
            p,
            gen,
            a,
            a_den,
            generator,
        } => cmd_matrix(p, gen, a, a_den, generator).map(|_| true),
        Command::VerifyGg { p } => cmd_verify_gg(p),
        Command::OracleCompare {
            twist,
            level,
            cusp,
            nmax,
            tol,
        } => cmd_oracle_compare(twist, level, cusp, nmax, tol),
        Command::Cusps { level, format } => cmd_cusps(level, format).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
