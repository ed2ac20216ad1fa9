//! Batch experiment runner: reproducible CSV (and optional SVG) emitters
//! for the stability map, slowness curves, discrete spectra, 1D time-domain
//! runs, the semi-analytic layer error, stagnation sweeps and the
//! Hardy-matrix cross-check.

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector2;
use radpml::anisotropy::{self, Anisotropy};
use radpml::erroracle::{self, CqKind, CqScheme, ErrorSeriesParams};
use radpml::fundsol::{self, Verdict};
use radpml::hardy::RadialBasisSpec;
use radpml::output::{Cell, Config, CsvTable};
use radpml::scaling::{DampingProfile, ShiftedScaling};
use radpml::solver1d::{
    assemble_halfline_system, assemble_radial_system, discrete_spectrum, ExteriorTreatment,
    Signal, Solver1dState, SpaceProfile, System1d,
};
use radpml::{Error, Result};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "radpml", version, about = "radial layer and infinite-element experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify interior source points into stable/unstable sets on a grid
    StabilityMap(CommonArgs),
    /// Sample the slowness curve of the material tensor
    Slowness(CommonArgs),
    /// Discrete resonance spectrum of an assembled radial system
    Spectrum(CommonArgs),
    /// Time-domain 1D run with energy (and optional reference error) trace
    Run1d(CommonArgs),
    /// Layer error: explicit series vs convolution quadrature
    CqError(CommonArgs),
    /// Error stagnation sweep over sigma_c at fixed nu
    SweepSigma(CommonArgs),
    /// Hardy radial matrices: closed forms vs the quadrature oracle
    HardyCheck(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// flat key/value config file (one `dotted.key = value` per line)
    #[arg(long)]
    config: Option<PathBuf>,
    /// output CSV path
    #[arg(long)]
    out: PathBuf,
    /// additionally render <out>.svg
    #[arg(long)]
    svg: bool,
    /// worker threads for parameter sweeps
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// seed for randomized drivers (recorded for reproducibility)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// config overrides, e.g. --set pml.sigma_c=30
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidArgument(_)
                | Error::MeshMismatch(_)
                | Error::Unsupported(_)
                | Error::NotSpd(_) => 2,
                _ => 3,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<()> {
    let args = match &cli.command {
        Command::StabilityMap(a)
        | Command::Slowness(a)
        | Command::Spectrum(a)
        | Command::Run1d(a)
        | Command::CqError(a)
        | Command::SweepSigma(a)
        | Command::HardyCheck(a) => a,
    };
    let mut config = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for kv in &args.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("--set expects KEY=VALUE, got '{kv}'"))
        })?;
        config.set(k.trim(), v.trim());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let table = pool.install(|| match &cli.command {
        Command::StabilityMap(_) => cmd_stability_map(&config),
        Command::Slowness(_) => cmd_slowness(&config),
        Command::Spectrum(_) => cmd_spectrum(&config),
        Command::Run1d(_) => cmd_run1d(&config),
        Command::CqError(_) => cmd_cq_error(&config),
        Command::SweepSigma(_) => cmd_sweep_sigma(&config),
        Command::HardyCheck(_) => cmd_hardy_check(&config),
    })?;
    table.write_file(&args.out)?;
    if args.svg {
        let mut svg_path = args.out.clone().into_os_string();
        svg_path.push(".svg");
        std::fs::write(Path::new(&svg_path), table.to_svg())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// config pieces
// ---------------------------------------------------------------------------

const ANISO_KEYS: [&str; 6] = [
    "anisotropy.a11",
    "anisotropy.a12",
    "anisotropy.a22",
    "anisotropy.b11",
    "anisotropy.b12",
    "anisotropy.b22",
];

fn parse_aniso(config: &Config) -> Result<Anisotropy> {
    let has_a = config.get_f64("anisotropy.a11")?.is_some();
    let has_b = config.get_f64("anisotropy.b11")?.is_some();
    if has_a && has_b {
        return Err(Error::InvalidArgument(
            "give either anisotropy.a11/a12/a22 or anisotropy.b11/b12/b22, not both".into(),
        ));
    }
    if has_b {
        Anisotropy::from_inverse_tensor(
            config.require_f64("anisotropy.b11")?,
            config.get_f64("anisotropy.b12")?.unwrap_or(0.0),
            config.require_f64("anisotropy.b22")?,
        )
    } else {
        Anisotropy::from_tensor(
            config.require_f64("anisotropy.a11")?,
            config.get_f64("anisotropy.a12")?.unwrap_or(0.0),
            config.require_f64("anisotropy.a22")?,
        )
    }
}

fn parse_signal(config: &Config) -> Result<Signal> {
    match config.get_str("signal.kind").unwrap_or("gauss-t2") {
        "zero" => Ok(Signal::Zero),
        "gauss-t2" => Ok(Signal::GaussT2),
        "sine-burst" => Ok(Signal::SineBurst {
            amplitude: config.get_f64("signal.amplitude")?.unwrap_or(1.0),
            omega: config.get_f64("signal.omega")?.unwrap_or(10.0),
        }),
        "gaussian-pulse" => Ok(Signal::GaussianPulse {
            amplitude: config.get_f64("signal.amplitude")?.unwrap_or(1.0),
            center: config.get_f64("signal.center")?.unwrap_or(0.5),
            width: config.get_f64("signal.width")?.unwrap_or(0.1),
        }),
        "samples" => {
            let path = config.get_str("signal.path").ok_or_else(|| {
                Error::InvalidArgument("signal.kind = samples needs signal.path".into())
            })?;
            let dt = config.require_f64("signal.dt")?;
            let text = std::fs::read_to_string(path)?;
            let values: std::result::Result<Vec<f64>, _> = text
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| l.trim().parse::<f64>())
                .collect();
            let values = values
                .map_err(|e| Error::InvalidArgument(format!("bad sample in {path}: {e}")))?;
            Ok(Signal::Samples { dt, values })
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown signal.kind '{other}' (zero, gauss-t2, sine-burst, gaussian-pulse, samples)"
        ))),
    }
}

const SIGNAL_KEYS: [&str; 7] = [
    "signal.kind",
    "signal.amplitude",
    "signal.omega",
    "signal.center",
    "signal.width",
    "signal.path",
    "signal.dt",
];

fn parse_basis(config: &Config) -> Result<RadialBasisSpec> {
    let n = config.get_usize("basis.N")?.unwrap_or(5);
    match config.get_str("basis.kind").unwrap_or("two-pole") {
        "one-pole" => Ok(RadialBasisSpec::one_pole(n)),
        "two-pole" => RadialBasisSpec::two_pole(config.get_f64("basis.eta")?.unwrap_or(20.0), n),
        other => Err(Error::InvalidArgument(format!(
            "unknown basis.kind '{other}' (one-pole, two-pole)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

fn cmd_stability_map(config: &Config) -> Result<CsvTable> {
    let mut allowed = vec![
        "pml.R",
        "pml.sigma_c",
        "grid.resolution",
        "classify.samples",
    ];
    allowed.extend(ANISO_KEYS);
    config.validate_keys(&allowed)?;
    let aniso = parse_aniso(config)?;
    let radius = config.get_f64("pml.R")?.unwrap_or(1.0);
    let sigma_c = config.get_f64("pml.sigma_c")?.unwrap_or(20.0);
    let res = config.get_usize("grid.resolution")?.unwrap_or(101);
    if res < 16 {
        return Err(Error::InvalidArgument(
            "grid.resolution must be at least 16".into(),
        ));
    }
    let samples = config.get_usize("classify.samples")?.unwrap_or(720);
    let profile = DampingProfile::piecewise_constant(radius, sigma_c)?;
    let pts: Vec<(f64, f64)> = (0..res)
        .flat_map(|i| (0..res).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                -radius + 2.0 * radius * i as f64 / (res - 1) as f64,
                -radius + 2.0 * radius * j as f64 / (res - 1) as f64,
            )
        })
        .collect();
    use rayon::prelude::*;
    let rows: Vec<Option<(f64, f64, i64, f64)>> = pts
        .par_iter()
        .map(|&(y1, y2)| {
            let y = Vector2::new(y1, y2);
            if y.norm() >= radius * (1.0 - 1e-12) {
                return None;
            }
            let class = fundsol::classify_point(&aniso, &profile, &y, samples).ok()?;
            Some((
                y1,
                y2,
                (class.verdict == Verdict::Unstable) as i64,
                class.min_angle,
            ))
        })
        .collect();
    let mut table = CsvTable::new(&["y1", "y2", "verdict", "witness_angle"]);
    for row in rows.into_iter().flatten() {
        table.push(vec![
            Cell::Float(row.0),
            Cell::Float(row.1),
            Cell::Int(row.2),
            Cell::Float(row.3),
        ]);
    }
    Ok(table)
}

fn cmd_slowness(config: &Config) -> Result<CsvTable> {
    let mut allowed = vec!["slowness.n"];
    allowed.extend(ANISO_KEYS);
    config.validate_keys(&allowed)?;
    let aniso = parse_aniso(config)?;
    let n = config.get_usize("slowness.n")?.unwrap_or(360);
    let pts = anisotropy::slowness_curve(&aniso, n)?;
    let mut table = CsvTable::new(&["angle", "p1", "p2"]);
    for (i, p) in pts.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        table.push(vec![
            Cell::Float(angle),
            Cell::Float(p.x),
            Cell::Float(p.y),
        ]);
    }
    Ok(table)
}

/// Shared radial-system construction for spectrum and run-1d.
fn build_radial(config: &Config) -> Result<System1d> {
    let speed = config.get_f64("anisotropy.a")?.unwrap_or(1.0);
    let aniso = Anisotropy::isotropic(speed)?;
    let radius = config.get_f64("pml.R")?.unwrap_or(1.0);
    let sigma_c = config.get_f64("pml.sigma_c")?.unwrap_or(20.0);
    let gamma = config.get_f64("pml.gamma")?.unwrap_or(10.0);
    let width = config.get_f64("pml.L")?.unwrap_or(1.0);
    let h = config.get_f64("mesh.h")?.unwrap_or(0.05);
    let order = config.get_usize("mesh.order")?.unwrap_or(3);
    let profile = DampingProfile::piecewise_constant(radius, sigma_c)?;
    let scaling = ShiftedScaling::new(profile, gamma)?;
    let n_int = (radius / h).round().max(2.0) as usize;
    let kind = config.get_str("exterior.kind").unwrap_or("infinite-element");
    let (mesh, treatment) = match kind {
        "truncated" => (
            radpml::fem::Mesh1D::uniform_with_layer(0.0, radius, n_int, width, order)?,
            ExteriorTreatment::TruncatedPml { width },
        ),
        "mapped" => (
            radpml::fem::Mesh1D::uniform_with_layer(0.0, radius, n_int, width, order)?,
            ExteriorTreatment::MappedPml { width },
        ),
        "infinite-element" => (
            radpml::fem::Mesh1D::uniform_with_layer(0.0, radius, n_int, 0.0, order)?,
            ExteriorTreatment::InfiniteElement {
                spec: parse_basis(config)?,
            },
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown exterior.kind '{other}' (truncated, mapped, infinite-element)"
            )))
        }
    };
    assemble_radial_system(&aniso, &scaling, &mesh, &treatment)
}

const RADIAL_KEYS: [&str; 11] = [
    "anisotropy.a",
    "pml.R",
    "pml.L",
    "pml.sigma_c",
    "pml.gamma",
    "mesh.h",
    "mesh.order",
    "exterior.kind",
    "basis.kind",
    "basis.eta",
    "basis.N",
];

fn cmd_spectrum(config: &Config) -> Result<CsvTable> {
    config.validate_keys(&RADIAL_KEYS)?;
    let sys = build_radial(config)?;
    let spec = discrete_spectrum(&sys)?;
    let mut table = CsvTable::new(&["re_s", "im_s"]);
    for s in &spec.eigenvalues {
        table.push(vec![Cell::Float(s.re), Cell::Float(s.im)]);
    }
    if spec.defective {
        return Err(Error::EigenFailed(format!(
            "defective pencil: max eigen-residual {:.3e} exceeds 1e-8",
            spec.max_residual
        )));
    }
    Ok(table)
}

fn cmd_run1d(config: &Config) -> Result<CsvTable> {
    let mut allowed = vec![
        "problem.kind",
        "time.dt",
        "time.T",
        "output.every",
        "source.amplitude",
        "source.alpha",
        "reference.enabled",
        "reference.domain",
    ];
    allowed.extend(RADIAL_KEYS);
    allowed.extend(SIGNAL_KEYS);
    config.validate_keys(&allowed)?;
    let dt = config.get_f64("time.dt")?.unwrap_or(0.01);
    let t_end = config.get_f64("time.T")?.unwrap_or(10.0);
    let every = config.get_usize("output.every")?.unwrap_or(1).max(1);
    let n_steps = (t_end / dt).round() as usize;
    let problem = config.get_str("problem.kind").unwrap_or("radial");
    let reference = config.get_str("reference.enabled").unwrap_or("false") == "true";

    let mut sys = match problem {
        "radial" => {
            let mut sys = build_radial(config)?;
            sys.set_source(
                parse_signal(config)?,
                SpaceProfile::GaussianRadial {
                    amplitude: config.get_f64("source.amplitude")?.unwrap_or(1200.0),
                    alpha: config.get_f64("source.alpha")?.unwrap_or(200.0),
                },
            );
            sys
        }
        "halfline" => {
            let radius = config.get_f64("pml.R")?.unwrap_or(1.0);
            let width = config.get_f64("pml.L")?.unwrap_or(1.0);
            let sigma_c = config.get_f64("pml.sigma_c")?.unwrap_or(20.0);
            let gamma = config.get_f64("pml.gamma")?.unwrap_or(0.0);
            let h = config.get_f64("mesh.h")?.unwrap_or(0.01);
            let order = config.get_usize("mesh.order")?.unwrap_or(3);
            let profile = DampingProfile::piecewise_constant(radius, sigma_c)?;
            let scaling = ShiftedScaling::new(profile, gamma)?;
            let n_int = (radius / h).round().max(2.0) as usize;
            let mesh =
                radpml::fem::Mesh1D::uniform_with_layer(0.0, radius, n_int, width, order)?;
            assemble_halfline_system(
                &scaling,
                &mesh,
                &ExteriorTreatment::TruncatedPml { width },
                parse_signal(config)?,
            )?
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown problem.kind '{other}' (radial, halfline)"
            )))
        }
    };

    // optional enlarged-domain reference: same discretization, no damping,
    // Dirichlet far enough away that reflections stay out of (0, T)
    let mut reference_sys = if reference {
        let domain = config
            .get_f64("reference.domain")?
            .unwrap_or(2.0 * t_end.max(1.0));
        let h = config.get_f64("mesh.h")?.unwrap_or(0.05);
        let order = config.get_usize("mesh.order")?.unwrap_or(3);
        let n = (domain / h).round() as usize;
        let profile = DampingProfile::piecewise_constant(domain, 0.0)?;
        let scaling = ShiftedScaling::classical(profile);
        let mesh = radpml::fem::Mesh1D::uniform_with_layer(0.0, domain, n, 0.0, order)?;
        let mut rsys = match problem {
            "radial" => assemble_radial_system(
                &Anisotropy::isotropic(config.get_f64("anisotropy.a")?.unwrap_or(1.0))?,
                &scaling,
                &mesh,
                &ExteriorTreatment::TruncatedPml { width: 0.0 },
            )?,
            _ => assemble_halfline_system(
                &scaling,
                &mesh,
                &ExteriorTreatment::TruncatedPml { width: 0.0 },
                parse_signal(config)?,
            )?,
        };
        if problem == "radial" {
            rsys.set_source(
                parse_signal(config)?,
                SpaceProfile::GaussianRadial {
                    amplitude: config.get_f64("source.amplitude")?.unwrap_or(1200.0),
                    alpha: config.get_f64("source.alpha")?.unwrap_or(200.0),
                },
            );
        }
        Some(rsys)
    } else {
        None
    };

    let mut st = Solver1dState::zero(&sys);
    let mut rst = reference_sys.as_ref().map(Solver1dState::zero);
    let header: Vec<&str> = if reference {
        vec!["t", "interior_energy", "interior_error"]
    } else {
        vec!["t", "interior_energy"]
    };
    let mut table = CsvTable::new(&header);
    let interior_end = sys.scaling().profile().radius();
    for step in 1..=n_steps {
        sys.step_crank_nicolson(&mut st, dt)?;
        if let (Some(rsys), Some(rstate)) = (reference_sys.as_mut(), rst.as_mut()) {
            rsys.step_crank_nicolson(rstate, dt)?;
        }
        if step % every == 0 {
            let e = sys.energy(&st);
            let mut row = vec![Cell::Float(st.t), Cell::Float(e.interior)];
            if let (Some(rsys), Some(rstate)) = (reference_sys.as_ref(), rst.as_ref()) {
                let err = interior_l2_difference(&sys, &st, rsys, rstate, interior_end);
                row.push(Cell::Float(err));
            }
            table.push(row);
        }
    }
    Ok(table)
}

/// L2 norm (with the radial measure) of u_sys - u_ref over (0, end).
fn interior_l2_difference(
    sys: &System1d,
    st: &Solver1dState,
    rsys: &System1d,
    rst: &Solver1dState,
    end: f64,
) -> f64 {
    let n = 200;
    let (qx, qw) = radpml::quad::gauss_legendre(4);
    let mut acc = 0.0;
    for e in 0..n {
        let a = end * e as f64 / n as f64;
        let b = end * (e + 1) as f64 / n as f64;
        let jac = 0.5 * (b - a);
        for (i, &x) in qx.iter().enumerate() {
            let r = 0.5 * (a + b) + jac * x;
            let d = sys.eval_u(st, r) - rsys.eval_u(rst, r);
            acc += qw[i] * jac * r * d * d;
        }
    }
    acc.sqrt()
}

const ERROR_KEYS: [&str; 5] = [
    "error.R",
    "error.L",
    "error.sigma_c",
    "error.gamma",
    "error.x",
];

fn parse_error_params(config: &Config) -> Result<ErrorSeriesParams> {
    Ok(ErrorSeriesParams {
        radius_pml: config.get_f64("error.R")?.unwrap_or(0.2),
        width: config.get_f64("error.L")?.unwrap_or(1.0),
        sigma_c: config.get_f64("error.sigma_c")?.unwrap_or(1.0),
        gamma: config.get_f64("error.gamma")?.unwrap_or(1.0),
        g: parse_signal(config)?,
        x: config.get_f64("error.x")?.unwrap_or(0.1),
    })
}

fn cmd_cq_error(config: &Config) -> Result<CsvTable> {
    let mut allowed = vec!["cq.kind", "cq.dt", "cq.steps", "output.every"];
    allowed.extend(ERROR_KEYS);
    allowed.extend(SIGNAL_KEYS);
    config.validate_keys(&allowed)?;
    let params = parse_error_params(config)?;
    let scheme = CqScheme {
        kind: match config.get_str("cq.kind").unwrap_or("bdf2") {
            "bdf2" => CqKind::Bdf2,
            "trapezoidal" => CqKind::Trapezoidal,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown cq.kind '{other}' (bdf2, trapezoidal)"
                )))
            }
        },
        dt: config.get_f64("cq.dt")?.unwrap_or(1.0 / 400.0),
        n_steps: config.get_usize("cq.steps")?.unwrap_or(4000),
    };
    let every = config.get_usize("output.every")?.unwrap_or(1).max(1);
    let cq = erroracle::cq_invert(&params, &scheme)?;
    let mut table = CsvTable::new(&["t", "series", "cq", "abs_diff"]);
    for (n, &cqv) in cq.iter().enumerate() {
        if n % every != 0 {
            continue;
        }
        let t = n as f64 * scheme.dt;
        let se = erroracle::error_series(&params, t, 1e-10)?;
        table.push(vec![
            Cell::Float(t),
            Cell::Float(se),
            Cell::Float(cqv),
            Cell::Float((se - cqv).abs()),
        ]);
    }
    Ok(table)
}

fn cmd_sweep_sigma(config: &Config) -> Result<CsvTable> {
    let mut allowed = vec!["sweep.sigmas", "sweep.t"];
    allowed.extend(ERROR_KEYS);
    allowed.extend(SIGNAL_KEYS);
    config.validate_keys(&allowed)?;
    let params = parse_error_params(config)?;
    let t = config.get_f64("sweep.t")?.unwrap_or(10.0);
    let sigmas: Vec<f64> = match config.get_str("sweep.sigmas") {
        Some(list) => list
            .split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("sweep.sigmas: bad value '{v}'"))
                })
            })
            .collect::<Result<_>>()?,
        None => (0..13).map(|i| 10f64.powf(i as f64 / 4.0)).collect(),
    };
    let table_data = erroracle::sigma_sweep(&params, &sigmas, t, params.x)?;
    let mut table = CsvTable::new(&["sigma_c", "abs_error"]);
    for (sc, err) in table_data {
        table.push(vec![Cell::Float(sc), Cell::Float(err)]);
    }
    Ok(table)
}

fn cmd_hardy_check(config: &Config) -> Result<CsvTable> {
    config.validate_keys(&["basis.kind", "basis.eta", "basis.N"])?;
    let spec = parse_basis(config)?;
    let h = spec.matrices()?;
    let (mass_o, rmass_o, rderiv_o) = radpml::hardy::quadrature_oracle(&spec)?;
    let devs = [
        ("mass", (h.mass() - &mass_o).amax()),
        ("r_mass", (h.r_mass() - &rmass_o).amax()),
        ("r_deriv", (h.r_deriv() - &rderiv_o).amax()),
    ];
    let tol = match spec.kind() {
        radpml::hardy::BasisKind::OnePole => 1e-10,
        radpml::hardy::BasisKind::TwoPole => 1e-9,
    };
    let mut table = CsvTable::new(&["matrix", "max_abs_dev"]);
    let mut worst = 0.0f64;
    for (name, dev) in devs {
        worst = worst.max(dev);
        table.push(vec![Cell::Text(name.into()), Cell::Float(dev)]);
    }
    if worst > tol {
        return Err(Error::QuadratureFailed { tol, best: worst });
    }
    Ok(table)
}
