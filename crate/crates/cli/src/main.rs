//! `dmtrace`: file-based front end for traces, Arens-Eells norms, lifts,
//! extensions and curve decompositions.
//!
//! Results are JSON on stdout (or `--out`), the log goes to stderr. Exit codes:
//! 0 on success, 1 for invalid input or usage, 2 when a construction fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dmtrace::acceptance;
use dmtrace::domain::presets;
use dmtrace::smirnov::{
    decomposition_file, divfree_preset, graph_decompose, lifted_decomposition, mollify, reconstruct_check,
    snap_to_graph, GridSpec,
};
use dmtrace::{
    ae_norm, bound_constant, divergence_in, extend_divfree, extend_field, lift_surject, normal_trace,
    pairing_over_set, AEElement, CurveField, Error, LiftConfig, LipFunc, Point, Point2, PolyRegion, PolygonalDomain,
};
use log::info;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "dmtrace", version, about = "Divergence-measure fields on polygonal curves")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Debug, Clone)]
struct Options {
    /// Routing grid spacing (lift, extend) or mollifier grid spacing (smirnov-sim).
    #[arg(long, global = true, default_value_t = 0.02)]
    grid_h: f64,
    /// Overrides the domain's LRC constant.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Overrides the domain's net spacing.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// JSON array of points used as the net instead of the automatic one.
    #[arg(long, global = true)]
    lambda: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Gauss-Legendre points per segment for vector pairings.
    #[arg(long, global = true, default_value_t = 16)]
    quadrature_order: usize,
    /// Snapping and atom comparison tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Normal trace of a field on the boundary of a region.
    Trace {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        region: PathBuf,
    },
    /// Pairing measure of a region against a Lipschitz function, or the
    /// pairing with a vector test function given as two Lipschitz components.
    Pairing {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, requires = "phi")]
        region: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long, conflicts_with = "phi")]
        vector: Option<PathBuf>,
    },
    /// Arens-Eells norm with optimal dipoles and dual certificate.
    AeNorm {
        #[arg(long)]
        element: PathBuf,
    },
    /// A field on the domain with the given boundary trace.
    Lift {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        element: PathBuf,
    },
    /// Extension of a field on the domain to the box.
    Extend {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long = "box")]
        bx: PathBuf,
    },
    /// Extension of a divergence-free field.
    ExtendDivfree {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        domain: PathBuf,
        #[arg(long = "box")]
        bx: PathBuf,
        /// The complement inside the box is not connected: puncture at the net.
        #[arg(long)]
        disconnected: bool,
    },
    /// Decomposition into source-to-sink paths and cycles.
    Decompose {
        #[arg(long)]
        field: PathBuf,
        /// Decompose through the divergence-free lift instead.
        #[arg(long)]
        lifted: bool,
    },
    /// Mollify, follow flow lines and check the reconstruction by Monte Carlo.
    SmirnovSim {
        /// Field file, or one of `circle`, `square-loop`, `double-loop`.
        #[arg(long)]
        field: String,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        time: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Vector test function as two Lipschitz components; rotation if absent.
        #[arg(long)]
        vector: Option<PathBuf>,
        /// Also write the mollified grid field here.
        #[arg(long)]
        grid_out: Option<PathBuf>,
    },
    /// Run acceptance criteria (all when none are named).
    Verify { criteria: Vec<String> },
    /// Print a preset domain.
    DomainPreset { name: String },
}

/// Failures sorted by exit code.
enum Failure {
    Usage(String),
    Module(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Usage(e.to_string())
        } else {
            Failure::Module(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read_json<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_constants(mut d: PolygonalDomain, opts: &Options) -> Outcome<PolygonalDomain> {
    if opts.eps.is_some() {
        d.eps = opts.eps;
    }
    if opts.delta.is_some() {
        d.delta = opts.delta;
    }
    d.validate()?;
    Ok(d)
}

fn config(d: &PolygonalDomain, opts: &Options) -> Outcome<LiftConfig> {
    Ok(match &opts.lambda {
        Some(path) => LiftConfig::with_lambda(d, opts.grid_h, read_json::<Vec<Point2>>(path)?, None)?,
        None => LiftConfig::build(d, opts.grid_h)?,
    })
}

/// Complement in the box with the constants of `U` unless overridden.
fn complement(u: &PolygonalDomain, bx: &PolyRegion, opts: &Options) -> Outcome<PolygonalDomain> {
    let mut out = u.complement_region(bx)?;
    out.eps = u.eps;
    out.delta = u.delta;
    with_constants(out, opts)
}

fn vector_field(components: &[LipFunc]) -> Outcome<impl Fn(Point2) -> Point2 + Sync + '_> {
    if components.len() != 2 {
        return Err(Failure::Usage(format!("vector test function needs 2 components, got {}", components.len())));
    }
    for c in components {
        c.validate(2)?;
    }
    Ok(move |x: Point2| Point([components[0].eval(x.coords()).unwrap(), components[1].eval(x.coords()).unwrap()]))
}

fn run(verb: Verb, opts: &Options) -> Outcome<serde_json::Value> {
    let value = match verb {
        Verb::Trace { field, region } => {
            let f: CurveField<2> = read_json(&field)?;
            let e: PolyRegion = read_json(&region)?;
            let m = normal_trace(&f, &e)?.normalized(opts.tolerance);
            info!("trace has {} atoms, total {}", m.len(), m.total());
            serde_json::to_value(m)
        }
        Verb::Pairing { field, region, phi, vector } => {
            let f: CurveField<2> = read_json(&field)?;
            match (phi, vector) {
                (Some(phi), _) => {
                    let phi: LipFunc = read_json(&phi)?;
                    let e: PolyRegion = match region {
                        Some(r) => read_json(&r)?,
                        None => return Err(Failure::Usage("--phi needs --region".into())),
                    };
                    let v = pairing_over_set(&f, &phi, &e)?;
                    let t = normal_trace(&f, &e)?.integrate(|x| phi.eval(x.coords()).unwrap());
                    let d = divergence_in(&f, &e).integrate(|x| phi.eval(x.coords()).unwrap());
                    info!("pairing over the region {v}");
                    Ok(json!({ "pairing": v, "trace_pairing": t, "divergence_pairing": d }))
                }
                (None, Some(vector)) => {
                    let comps: Vec<LipFunc> = read_json(&vector)?;
                    let phi = vector_field(&comps)?;
                    let v = f.pair_vector(&|x: &Point2| Ok(phi(*x)), opts.quadrature_order)?;
                    info!("vector pairing {v}");
                    Ok(json!({ "pair_vector": v }))
                }
                (None, None) => return Err(Failure::Usage("pairing needs --phi or --vector".into())),
            }
        }
        Verb::AeNorm { element } => {
            let m: AEElement<2> = read_json(&element)?;
            let r = ae_norm(&m);
            info!("norm {} with {} dipoles", r.value, r.rep.terms.len());
            for d in &r.dual {
                info!("  dual {:?} = {}", d.node, d.value);
            }
            serde_json::to_value(r)
        }
        Verb::Lift { domain, element } => {
            let d = with_constants(read_json(&domain)?, opts)?;
            let m: AEElement<2> = read_json(&element)?;
            let cfg = config(&d, opts)?;
            let c = bound_constant(&cfg)?;
            let lift = lift_surject(&cfg, &m)?;
            let cost = lift.cost(&d.region);
            info!("lift of norm {} costs {cost} (bound {})", lift.norm, c * lift.norm);
            Ok(json!({ "lift": lift, "cost": cost, "bound_constant": c, "lambda": cfg.lambda() }))
        }
        Verb::Extend { field, domain, bx } => {
            let f: CurveField<2> = read_json(&field)?;
            let u = with_constants(read_json(&domain)?, opts)?;
            let bx: PolyRegion = read_json(&bx)?;
            let out = complement(&u, &bx, opts)?;
            let ext = extend_field(&f, &u, &config(&out, opts)?)?;
            info!("extension adds {} exterior curves", ext.exterior.len());
            serde_json::to_value(ext)
        }
        Verb::ExtendDivfree { field, domain, bx, disconnected } => {
            let f: CurveField<2> = read_json(&field)?;
            let u = with_constants(read_json(&domain)?, opts)?;
            let bx: PolyRegion = read_json(&bx)?;
            let out = complement(&u, &bx, opts)?;
            let ext = extend_divfree(&f, &u, &config(&out, opts)?, &bx, !disconnected)?;
            info!("divergence-free extension with {} punctures", ext.domain.punctures.len());
            serde_json::to_value(ext)
        }
        Verb::Decompose { field, lifted } => {
            let f: CurveField<2> = read_json(&field)?;
            if lifted {
                let curves = lifted_decomposition(&f, opts.tolerance)?;
                info!("lifted decomposition into {} curves", curves.len());
                serde_json::to_value(CurveField::new(curves))
            } else {
                let pieces = graph_decompose(&snap_to_graph(&f, opts.tolerance));
                info!("decomposition into {} pieces", pieces.len());
                serde_json::to_value(decomposition_file(&pieces))
            }
        }
        Verb::SmirnovSim { field, samples, time, dt, vector, grid_out } => {
            let seed = opts.seed.ok_or_else(|| Failure::Usage("smirnov-sim needs --seed".into()))?;
            let f: CurveField<2> = match divfree_preset(&field) {
                Ok(f) => f,
                Err(_) => read_json(Path::new(&field))?,
            };
            let eps = opts.eps.unwrap_or(0.1);
            let gf = mollify(&f, eps, GridSpec::covering(&f, eps, opts.grid_h)?)?;
            let comps: Vec<LipFunc> = match vector {
                Some(v) => read_json(&v)?,
                None => vec![LipFunc::linear(vec![0.0, -1.0]), LipFunc::linear(vec![1.0, 0.0])],
            };
            let phi = vector_field(&comps)?;
            let r = reconstruct_check(&gf, &phi, samples, time, dt, seed)?;
            info!("lhs {} estimate {} stderr {} (left grid {})", r.lhs, r.estimate, r.stderr, r.left_grid);
            if let Some(path) = grid_out {
                write_json(&path, &gf)?;
            }
            Ok(json!({ "report": r, "within_3_stderr": r.within(3.0) }))
        }
        Verb::Verify { criteria } => {
            let ids: Vec<String> = if criteria.is_empty() {
                acceptance::CRITERIA.iter().map(|c| c.0.to_string()).collect()
            } else {
                criteria
            };
            let mut reports = Vec::new();
            for id in &ids {
                let r = acceptance::run(id)?;
                eprintln!("{r}");
                reports.push(r);
            }
            let passed = reports.iter().all(|r| r.passed);
            let value = json!({ "passed": passed, "criteria": reports });
            emit(opts, &value)?;
            return if passed {
                Ok(serde_json::Value::Null)
            } else {
                Err(Failure::Module("acceptance criteria failed".into()))
            };
        }
        Verb::DomainPreset { name } => serde_json::to_value(with_constants(presets::by_name(&name)?, opts)?),
    };
    value.map_err(|e| Failure::Usage(e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(opts: &Options, value: &serde_json::Value) -> Outcome<()> {
    match &opts.out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).format_timestamp(None).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(cli.verb, &cli.opts).and_then(|v| if v.is_null() { Ok(()) } else { emit(&cli.opts, &v) });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Module(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
