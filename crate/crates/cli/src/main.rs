use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ncsym::rep::{matrix_from_json, matrix_to_json, parse_rational, rational_to_json};
use ncsym::verify::{run_verification_suite, Check, CheckConfig, Suite};
use ncsym::{
    cm_membership, cm_point, coadjoint_eval, darboux_normalize, darboux_residual, moment_map, parse_expression,
    trace_evaluate, DoubledQuiver, Form, Necklace, Quiver, Rational, RepPoint, SymplecticData,
};

#[derive(Parser)]
#[command(name = "ncsym", version, about = "Exact noncommutative symplectic geometry on quivers")]
struct Cli {
    /// Base quiver as JSON, inline or a file path; defaults to one loop `x`.
    #[arg(long, global = true)]
    quiver: Option<String>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quiver utilities.
    #[command(subcommand)]
    Quiver(QuiverCommand),
    /// Necklace Lie bracket `{f, g}`.
    Bracket {
        f: String,
        g: String,
        /// Use the tensor-pairing formula instead.
        #[arg(long)]
        oracle: bool,
    },
    /// Cyclic derivative of a necklace along an arrow.
    Cycder { f: String, arrow: String },
    /// De Rham differential of a necklace or cyclic form.
    D { expr: String },
    /// Hamiltonian derivation of a necklace.
    Ham { f: String },
    /// Normalize a closed 2-form to its constant part.
    Darboux {
        #[arg(long)]
        form: String,
        /// Truncation weight.
        #[arg(long, default_value_t = 5)]
        degree: usize,
        /// Print the automorphism with its pullback and residual as JSON.
        #[arg(long)]
        emit_certificate: bool,
    },
    /// Trace of a necklace at a representation.
    TraceEval {
        f: String,
        /// Representation point JSON, inline or a file path.
        #[arg(long)]
        point: String,
    },
    /// Moment map at a representation.
    Moment {
        #[arg(long)]
        point: String,
    },
    /// Calogero-Moser space.
    #[command(subcommand)]
    Cm(CmCommand),
    /// Run randomized exact checks; prints one JSON line per check.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum QuiverCommand {
    /// Print the doubled quiver.
    Double,
}

#[derive(Subcommand)]
enum CmCommand {
    /// The point with positions `x` and momenta `p`.
    Point(CmCoords),
    /// Membership test for matrices `{"x": [[..]], "y": [[..]]}`.
    Check {
        #[arg(long)]
        point: String,
    },
    /// Trace of a one-loop necklace at a point.
    Eval {
        f: String,
        #[command(flatten)]
        coords: CmCoords,
    },
}

#[derive(Args)]
struct CmCoords {
    /// Comma-separated distinct rationals.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Comma-separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    p: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// A check name or `all`.
    check: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    /// Comma-separated dimension vector.
    #[arg(long)]
    dims: Option<String>,
    /// Include wall-clock timings; reports are then no longer byte-reproducible.
    #[arg(long)]
    timings: bool,
}

struct Output {
    text: String,
    ok: bool,
}

impl From<String> for Output {
    fn from(text: String) -> Self {
        Self { text, ok: true }
    }
}

type Res<T> = Result<T, String>;

fn err<E: ToString>(e: E) -> String {
    e.to_string()
}

fn read_json(src: &str) -> Res<Value> {
    let text = if src.trim_start().starts_with(['{', '[']) {
        src.to_owned()
    } else {
        fs::read_to_string(src).map_err(|e| format!("{src}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("{src}: {e}"))
}

fn symplectic(quiver: Option<&str>) -> Res<SymplecticData> {
    let base = match quiver {
        None => Quiver::loops(&["x"]).map_err(err)?,
        Some(src) => {
            let v = read_json(src)?;
            Quiver::from_json_str(&v.to_string()).map_err(err)?
        }
    };
    Ok(SymplecticData::new(DoubledQuiver::new(base).map_err(err)?))
}

fn necklace(src: &str, omega: &SymplecticData) -> Res<Necklace> {
    parse_expression(src, omega.quiver())
        .and_then(|e| e.into_necklace())
        .map_err(err)
}

fn rationals(list: &str) -> Res<Vec<Rational>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_rational(s).map_err(err))
        .collect()
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn run(cli: &Cli) -> Res<Output> {
    let omega = symplectic(cli.quiver.as_deref())?;
    let q = omega.quiver();
    let text = match &cli.command {
        Command::Quiver(QuiverCommand::Double) => pretty(&serde_json::to_value(q.to_json()).map_err(err)?),
        Command::Bracket { f, g, oracle } => {
            let (f, g) = (necklace(f, &omega)?, necklace(g, &omega)?);
            let b = if *oracle {
                omega.bracket_tensor_oracle(&f, &g)
            } else {
                omega.bracket(&f, &g)
            };
            b.to_string()
        }
        Command::Cycder { f, arrow } => {
            let a = q.find_arrow(arrow).map_err(err)?;
            necklace(f, &omega)?.cyclic_derivative(a).map_err(err)?.to_string()
        }
        Command::D { expr } => {
            let form = parse_expression(expr, q).and_then(|e| e.into_form()).map_err(err)?;
            form.d().to_string()
        }
        Command::Ham { f } => omega.hamiltonian_derivation(&necklace(f, &omega)?).to_string(),
        Command::Darboux {
            form,
            degree,
            emit_certificate,
        } => {
            let form: Form = parse_expression(form, q).and_then(|e| e.into_form()).map_err(err)?;
            let phi = darboux_normalize(&form, *degree).map_err(err)?;
            if *emit_certificate {
                let images: serde_json::Map<String, Value> = phi
                    .images()
                    .iter()
                    .map(|(a, img)| (q.arrow_name(*a).to_owned(), json!(img.to_string())))
                    .collect();
                let pulled = phi.pullback(&form, *degree).map_err(err)?;
                let residual = darboux_residual(&phi, &form, *degree).map_err(err)?;
                pretty(&json!({
                    "omega": form.to_string(),
                    "truncation": degree,
                    "phi": images,
                    "pullback": pulled.to_string(),
                    "omega0": form.weight_component(2).to_string(),
                    "residual": residual.to_string(),
                }))
            } else {
                phi.to_string()
            }
        }
        Command::TraceEval { f, point } => {
            let rho = RepPoint::from_json(q, &read_json(point)?).map_err(err)?;
            trace_evaluate(&necklace(f, &omega)?, &rho).map_err(err)?.to_string()
        }
        Command::Moment { point } => {
            let rho = RepPoint::from_json(q, &read_json(point)?).map_err(err)?;
            let mu = moment_map(&rho, &omega).map_err(err)?;
            let comps: serde_json::Map<String, Value> = q
                .vertices()
                .map(|v| (q.vertex_name(v).to_owned(), matrix_to_json(mu.component(v))))
                .collect();
            pretty(&json!({ "mu": comps, "trace_sum": rational_to_json(&mu.trace_sum()) }))
        }
        Command::Cm(cmd) => run_cm(cmd)?,
        Command::Verify(args) => return run_verify(args, omega),
    };
    Ok(text.into())
}

fn run_cm(cmd: &CmCommand) -> Res<String> {
    let point = |c: &CmCoords| cm_point(&rationals(&c.x)?, &rationals(&c.p)?).map_err(err);
    Ok(match cmd {
        CmCommand::Point(c) => {
            let pt = point(c)?;
            pretty(&json!({ "x": matrix_to_json(&pt.x), "y": matrix_to_json(&pt.y) }))
        }
        CmCommand::Check { point } => {
            let v = read_json(point)?;
            let x = matrix_from_json(&v["x"], "x").map_err(err)?;
            let y = matrix_from_json(&v["y"], "y").map_err(err)?;
            json!({ "member": cm_membership(&x, &y).map_err(err)? }).to_string()
        }
        CmCommand::Eval { f, coords } => {
            let cm = SymplecticData::one_loop();
            let f = necklace(f, &cm)?;
            coadjoint_eval(&f, &point(coords)?).map_err(err)?.to_string()
        }
    })
}

fn run_verify(args: &VerifyArgs, omega: SymplecticData) -> Res<Output> {
    let one_vertex = omega.quiver().vertex_count() == 1;
    let checks: Vec<Check> = if args.check == "all" {
        Check::ALL
            .into_iter()
            .filter(|c| one_vertex || !matches!(c, Check::TraceKernel | Check::Darboux))
            .collect()
    } else {
        let c = Check::from_name(&args.check).ok_or_else(|| {
            let names: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
            format!("unknown check `{}`; expected `all` or one of {}", args.check, names.join(", "))
        })?;
        vec![c]
    };
    let dims = match &args.dims {
        Some(d) => Some(
            d.split(',')
                .map(|s| s.trim().parse::<usize>().map_err(|e| format!("--dims: {e}")))
                .collect::<Res<Vec<_>>>()?,
        ),
        None => None,
    };
    let configs = checks
        .into_iter()
        .map(|c| {
            let mut cfg = CheckConfig::new(c);
            if let Some(t) = args.trials {
                cfg.trials = t;
            }
            if let Some(d) = args.degree {
                cfg.max_degree = d;
            }
            cfg.dims = dims.clone();
            cfg
        })
        .collect();
    let mut suite = Suite::new(args.seed, omega, configs);
    suite.timings = args.timings;
    let reports = run_verification_suite(&suite);
    let ok = reports.iter().all(|r| r.ok());
    let text = reports
        .iter()
        .map(|r| r.to_json().to_string())
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Output { text, ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = format!("{}\n", out.text);
            match &cli.out {
                Some(path) => {
                    if let Err(e) = fs::write(path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
