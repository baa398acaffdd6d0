//! `icnet`: construct, verify, classify and render checkerboard IC-nets.
//!
//! Exit codes: 0 success, 1 domain or verification failure, 2 usage or I/O.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod document;
mod svg;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use document::NetDocument;
use icnet::confocal::{ConfocalConic, ConicKind, NetParams, PeriodicSpec};
use icnet::dynamics::{
    generalized_net, qrt_invariant, qrt_step, qrt_step_on, NormalizedPencil, QrtParams, Schedule,
};
use icnet::net::{fill_incircles, verify_net, Branch, CheckerboardNet, DEFAULT_TOLERANCE};
use icnet::pencil::{
    analyze, diagonalize, to_confocal, ConicForm, PencilError, QuadricForm, Ruling,
};
use icnet::Execution;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "icnet", version, about = "Checkerboard incircular nets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a net and write it as JSON.
    Construct(ConstructArgs),
    /// Check a net file: cylinder, pencil, contact and coplanarity residuals.
    Verify {
        file: PathBuf,
        /// Defaults to the tolerance stored in the file.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Classify the pencil spanned by a conic or quadric and the cylinder.
    Classify(ClassifyArgs),
    /// Draw a net file as SVG.
    Render {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 800)]
        width: u32,
        #[arg(long)]
        show_conic: bool,
        #[arg(long)]
        show_envelope: bool,
    },
    /// Iterate the symmetric QRT map and print the orbit as CSV.
    Qrt {
        #[arg(long, allow_negative_numbers = true)]
        abdiff: f64,
        #[arg(long = "A", allow_negative_numbers = true)]
        a_scale: f64,
        #[arg(long, allow_negative_numbers = true)]
        f0: f64,
        #[arg(long, allow_negative_numbers = true)]
        fhalf: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Elliptic,
    Hyperbolic,
    Generalized,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    stilde: Option<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    psi0v: f64,
    #[arg(long, allow_negative_numbers = true)]
    psi0h: Option<f64>,
    /// Closing net with N lines around the conic; fixes s, s~ and psi0h.
    #[arg(long, value_name = "N", conflicts_with_all = ["s", "stilde", "psi0h", "schedule"])]
    periodic: Option<u32>,
    #[arg(long, allow_negative_numbers = true, requires = "periodic")]
    kappa: Option<f64>,
    /// Number of horizontal lines.
    #[arg(long)]
    rows: Option<usize>,
    /// Number of vertical lines.
    #[arg(long)]
    cols: Option<usize>,
    /// Pencil parameters repeated along both families (generalized nets).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    schedule: Option<Vec<f64>>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ClassifyArgs {
    /// s11,s12,s13,s22,s23,s33
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    conic: Option<Vec<f64>>,
    /// q11,q12,q13,q14,q22,q23,q24,q33,q34,q44
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    quadric: Option<Vec<f64>>,
}

/// A failed command and its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn usage(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn domain(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(args) => construct(&args),
        Command::Verify { file, tol } => verify(&file, tol),
        Command::Classify(args) => classify(&args),
        Command::Render {
            file,
            out,
            width,
            show_conic,
            show_envelope,
        } => render(&file, out.as_deref(), width, show_conic, show_envelope),
        Command::Qrt {
            abdiff,
            a_scale,
            f0,
            fhalf,
            steps,
        } => qrt(abdiff, a_scale, f0, fhalf, steps),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing stdout"),
    }
    .map_err(usage)
}

fn read_document(path: &Path) -> Result<(NetDocument, CheckerboardNet), Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    let doc = NetDocument::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(usage)?;
    let net = doc
        .to_net()
        .with_context(|| format!("loading {}", path.display()))
        .map_err(usage)?;
    Ok((doc, net))
}

fn construct(args: &ConstructArgs) -> Outcome {
    if !(args.tol > 0.0) {
        return Err(usage(anyhow!("--tol must be positive")));
    }
    let exec = Execution::default();
    let net = match args.kind {
        Kind::Elliptic | Kind::Hyperbolic => {
            let kind = if args.kind == Kind::Elliptic {
                ConicKind::Elliptic
            } else {
                ConicKind::Hyperbolic
            };
            if args.schedule.is_some() {
                return Err(usage(anyhow!(
                    "--schedule applies to --kind generalized only"
                )));
            }
            let conic = ConfocalConic::new(kind, args.alpha, args.beta).map_err(usage)?;
            let (params, default_count) = match args.periodic {
                Some(n) => {
                    let spec = PeriodicSpec {
                        n_azimuthal: n,
                        kappa: args.kappa.unwrap_or(0.0),
                        psi0v: args.psi0v,
                    };
                    (
                        NetParams::periodic(conic, spec).map_err(usage)?,
                        2 * n as usize + 1,
                    )
                }
                None => {
                    let (Some(s), Some(s_tilde)) = (args.s, args.stilde) else {
                        return Err(usage(anyhow!(
                            "--s and --stilde are required unless --periodic is given"
                        )));
                    };
                    let params =
                        NetParams::new(conic, s, s_tilde, args.psi0v, args.psi0h.unwrap_or(0.0))
                            .map_err(domain)?;
                    (params, 16)
                }
            };
            let cols = args.cols.unwrap_or(default_count) as i64;
            let rows = args.rows.unwrap_or(default_count) as i64;
            params.net(0..cols, 0..rows, exec).map_err(domain)?
        }
        Kind::Generalized => {
            if args.periodic.is_some() || args.s.is_some() || args.stilde.is_some() {
                return Err(usage(anyhow!(
                    "--kind generalized takes --schedule instead of shifts"
                )));
            }
            let Some(values) = &args.schedule else {
                return Err(usage(anyhow!("--kind generalized requires --schedule")));
            };
            let conic = ConfocalConic::elliptic(args.alpha, args.beta).map_err(usage)?;
            let sh = Schedule::from_lambdas(values, Ruling::Plus, true).map_err(usage)?;
            let sv = Schedule::from_lambdas(values, Ruling::Minus, true).map_err(usage)?;
            let l0 = conic.base_point(args.psi0v, Branch::Plus);
            let m0 = conic.base_point(args.psi0h.unwrap_or(0.0), Branch::Plus);
            let default_count = 4 * values.len() + 1;
            generalized_net(
                NormalizedPencil::from_conic(&conic),
                &sh,
                &sv,
                l0,
                m0,
                args.cols.unwrap_or(default_count),
                args.rows.unwrap_or(default_count),
                exec,
            )
            .map_err(domain)?
        }
    };
    let mut net = if args.tol == DEFAULT_TOLERANCE {
        net
    } else {
        fill_incircles(net, args.tol, exec)
    };
    net.meta.tolerance = args.tol;
    if !net.degenerate.is_empty() {
        eprintln!(
            "{} degenerate cell(s) left without a circle",
            net.degenerate.len()
        );
    }
    write_output(args.out.as_deref(), &NetDocument::from_net(&net).to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn verify(file: &Path, tol: Option<f64>) -> Outcome {
    let (_, net) = read_document(file)?;
    let tol = tol.unwrap_or(net.meta.tolerance);
    if !(tol > 0.0) {
        return Err(usage(anyhow!("tolerance must be positive")));
    }
    let report = verify_net(&net, tol, Execution::default());
    println!("{report}");
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Rounds away last-bit noise for display.
fn tidy(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn fixed<const N: usize>(values: &[f64], what: &str) -> Result<[f64; N], Failure> {
    <[f64; N]>::try_from(values).map_err(|_| {
        usage(anyhow!(
            "{what} needs {N} comma-separated entries, got {}",
            values.len()
        ))
    })
}

fn classify(args: &ClassifyArgs) -> Outcome {
    let (conic, normalization) = match (&args.conic, &args.quadric) {
        (Some(c), _) => {
            let s = ConicForm::from_upper(fixed::<6>(c, "--conic")?);
            (s, None)
        }
        (_, Some(q)) => {
            let q = QuadricForm::from_upper(fixed::<10>(q, "--quadric")?);
            if !q.is_generic() {
                return Err(usage(anyhow!("non-generic quadric: q44 must be nonzero")));
            }
            let (pre, _) = icnet::pencil::pre_normalize(&q).map_err(usage)?;
            println!("q44 sign: {}", if q.q44() > 0.0 { "+" } else { "-" });
            (pre.conic_block(), Some(to_confocal(&q)))
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    if conic.matrix().iter().any(|x| !x.is_finite()) {
        return Err(usage(anyhow!("entries must be finite")));
    }
    let analysis = analyze(&conic).map_err(|e| match e {
        PencilError::Unresolved { .. } => domain(e),
        _ => usage(e),
    })?;
    let kind = analysis.pencil_type;
    let real = analysis
        .base_points
        .points
        .iter()
        .map(|p| p.multiplicity)
        .sum::<usize>();
    let confocal = match normalization {
        Some(n) => n.ok().map(|n| (n.a, n.b)),
        None => diagonalize(&conic).ok().map(|d| {
            let [s1, s2, s3] = d.values;
            (s1 + s3, s2 + s3)
        }),
    };
    let mut summary = kind.label().to_owned();
    if real > 0 || !kind.is_diagonalizable() {
        summary.push_str(&format!(", {real} real base points"));
    }
    if let Some((a, b)) = confocal.filter(|_| kind.is_diagonalizable()) {
        summary.push_str(&format!(", diagonalizable, a={} b={}", tidy(a), tidy(b)));
    }
    println!("{summary}");
    println!("base points:");
    for p in &analysis.base_points.points {
        println!(
            "  v={} w={} multiplicity={}",
            tidy(p.v),
            tidy(p.w),
            p.multiplicity
        );
    }
    if analysis.base_points.complex > 0 {
        println!("  {} non-real", analysis.base_points.complex);
    }
    let roots: Vec<String> = analysis
        .roots
        .iter()
        .map(|r| {
            // a double root comes back as a pair split by about sqrt(eps)
            if r.im.abs() <= 1e-7 * (1.0 + r.re.abs()) {
                format!("{}", tidy(r.re))
            } else {
                format!("{}{:+}i", tidy(r.re), tidy(r.im))
            }
        })
        .collect();
    println!("cubic roots: {}", roots.join(", "));
    if kind.is_diagonalizable() {
        if let Ok(d) = diagonalize(&conic) {
            println!("B:");
            for r in 0..3 {
                println!(
                    "  {} {} {}",
                    tidy(d.b[(r, 0)]),
                    tidy(d.b[(r, 1)]),
                    tidy(d.b[(r, 2)])
                );
            }
            println!(
                "diagonal: {} {} {}",
                tidy(d.values[0]),
                tidy(d.values[1]),
                tidy(d.values[2])
            );
        }
    } else {
        println!("not diagonalizable by a Laguerre transformation");
    }
    Ok(ExitCode::SUCCESS)
}

/// Conic to overlay, from the parameters stored with the net.
fn document_conic(doc: &NetDocument) -> Option<ConfocalConic> {
    match doc.meta.kind.as_str() {
        "elliptic" => ConfocalConic::elliptic(doc.parameter("alpha")?, doc.parameter("beta")?).ok(),
        "hyperbolic" => {
            ConfocalConic::hyperbolic(doc.parameter("alpha")?, doc.parameter("beta")?).ok()
        }
        "generalized" => {
            let (a, b) = (doc.parameter("a")?, doc.parameter("b")?);
            if b > 0.0 {
                ConfocalConic::elliptic(a.sqrt(), b.sqrt()).ok()
            } else {
                ConfocalConic::hyperbolic(a.sqrt(), (-b).sqrt()).ok()
            }
        }
        _ => None,
    }
}

fn render(
    file: &Path,
    out: Option<&Path>,
    width: u32,
    show_conic: bool,
    show_envelope: bool,
) -> Outcome {
    let (doc, net) = read_document(file)?;
    let conic = document_conic(&doc);
    if (show_conic || show_envelope) && conic.is_none() {
        eprintln!(
            "warning: no conic recorded for kind '{}', overlays skipped",
            doc.meta.kind
        );
    }
    let text = svg::render(
        &net,
        &svg::RenderOptions {
            width_px: width,
            conic,
            show_conic,
            show_envelope,
        },
    );
    write_output(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn qrt(ab_diff: f64, a_scale: f64, f0: f64, f_half: f64, steps: usize) -> Outcome {
    let params = QrtParams::new(ab_diff, a_scale).map_err(usage)?;
    let mut rows = String::from("step,f,invariant\n");
    let (mut f, mut fh) = (f0, f_half);
    let mut first: Option<f64> = None;
    let mut drift = 0.0f64;
    for n in 0..=steps {
        // undefined at fixed points, where numerator and denominator vanish
        let b2 = qrt_invariant(f, fh, &params).ok();
        if let Some(b2) = b2 {
            let reference = *first.get_or_insert(b2);
            drift = drift.max((b2 - reference).abs() / reference.abs().max(f64::MIN_POSITIVE));
        }
        rows.push_str(&format!(
            "{n},{f},{}\n",
            b2.map_or("nan".to_owned(), |v| v.to_string())
        ));
        if n == steps {
            break;
        }
        // stepping on the starting curve keeps rounding from drifting across curves
        let stepped = match first {
            Some(b2) => qrt_step_on(f, fh, b2, &params),
            None => qrt_step(f, fh, &params),
        };
        let next = match stepped {
            Ok(x) => x,
            Err(e) => {
                print!("{rows}");
                return Err(domain(anyhow!(e).context(format!("step {}", n + 1))));
            }
        };
        (f, fh) = (fh, next);
    }
    print!("{rows}");
    eprintln!("drift {drift:e}");
    Ok(ExitCode::SUCCESS)
}
