use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use exobasin::exotic::{exotic_verdict, ExoticConfig, MaskConfig};
use exobasin::family::{to_kw, Complex, KwParams, MapParams};
use exobasin::orbits::{classify_orbit, critical_fates_kw, ClassifierConfig};
use exobasin::potential::{
    escape_window, figure_eight_level, green_grid, green_infinity, saddle_levels, trace_level, FigureEightConfig,
};
use exobasin::raster::{Grid, Window};
use exobasin::render::{image_file_name, render_mask, render_scan, to_json, write_f32_raster, write_label_raster, Palette};
use exobasin::scan::{scan, solve_event, EventKind, ScanGrid};
use exobasin::symbolic::{build_trap, verify_full_shift, ShiftConfig, TrapConfig};
use exobasin::{Error, ErrorClass};
use exobasin_cli::config::{pick, RunConfig};
use exobasin_cli::repro;
use serde_json::json;

/// Output directory override for files written without an explicit path.
const OUT_DIR_ENV: &str = "EXOBASIN_OUT_DIR";

#[derive(Parser)]
#[command(name = "exobasin", version, about = "Critical orbits, potentials, symbolic coding and exotic basins of z^2 + c + b/(z - a)")]
struct Cli {
    /// JSON config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for grid workloads (output does not depend on it).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct MapArgs {
    /// Slice parameter k (with --w).
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Slice parameter w (with --k).
    #[arg(long, allow_hyphen_values = true)]
    w: Option<f64>,
    /// Pole location, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    a: Option<Complex>,
    /// Pole residue, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    b: Option<Complex>,
    /// Constant term, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    c: Option<Complex>,
    /// Use the quadratic map z^2 + c (b = 0); needs --c.
    #[arg(long)]
    quadratic: bool,
}

#[derive(Args, Clone, Default)]
struct GridArgs {
    /// Plane window: re_min re_max im_min im_max.
    #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["RE_MIN", "RE_MAX", "IM_MIN", "IM_MAX"])]
    window: Option<Vec<f64>>,
    /// Pixels along the longer side.
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fates of the critical points (JSON).
    Classify {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Fixed points, multipliers and the Newton-like test (JSON).
    FixedPoints {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        newton_tol: Option<f64>,
    },
    /// Basin picture as PPM (white: w, grey: infinity, black: other cycles).
    RenderJulia {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the label raster and its JSON sidecar here.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Nine-color parameter-plane picture as PPM.
    RenderScan {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nine-color parameter-plane scan as CSV.
    Scan {
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locates an event along real w at fixed k (JSON).
    SolveEvent {
        #[arg(long, allow_hyphen_values = true)]
        k: Option<f64>,
        /// period2-v | fixed-u | fixed-v | leave-mc3 | mc2-onset
        #[arg(long)]
        event: Option<String>,
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
        bracket: Option<Vec<f64>>,
    },
    /// Full-shift coding report for a Cantor Julia set (JSON).
    VerifyShift {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Trap grid resolution.
        #[arg(long)]
        resolution: Option<usize>,
        #[arg(long)]
        no_recheck: bool,
    },
    /// Exotic-basin verdict with its connectivity evidence (JSON).
    Exotic {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        thin_factor: Option<f64>,
        #[arg(long)]
        no_stability: bool,
        /// Also write the basin label raster and its JSON sidecar here.
        #[arg(long)]
        mask_out: Option<PathBuf>,
    },
    /// Green-function queries (JSON).
    Potential {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Evaluate G at this point.
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["RE", "IM"])]
        z: Option<Vec<f64>>,
        /// Trace the level curve {G = level}.
        #[arg(long)]
        level: Option<f64>,
        /// Write the traced level curve here instead of inlining it.
        #[arg(long)]
        level_out: Option<PathBuf>,
        #[arg(long)]
        figure_eight: bool,
        /// Saddle levels from critical preimages up to this depth.
        #[arg(long)]
        saddles: Option<usize>,
        /// Write G over the window as a raw f32 raster plus sidecar.
        #[arg(long)]
        green_raster: Option<PathBuf>,
    },
    /// Runs the full milestone suite and writes a summary table.
    ReproPaper {
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Default)]
struct ScanArgs {
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    k_range: Option<Vec<f64>>,
    #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["LO", "HI"])]
    w_range: Option<Vec<f64>>,
    #[arg(long)]
    nk: Option<usize>,
    #[arg(long)]
    nw: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
}

fn parse_complex(s: &str) -> std::result::Result<Complex, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match parts.as_slice() {
        [re] => Ok(Complex::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex::new(num(re)?, num(im)?)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let class = err.chain().find_map(|e| e.downcast_ref::<Error>()).map(Error::class);
            ExitCode::from(match class {
                Some(ErrorClass::Validation) => 2,
                Some(ErrorClass::Numerical) => 3,
                Some(ErrorClass::Hypothesis) => 4,
                Some(ErrorClass::Io) | None => 1,
            })
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Invalid("--jobs must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting the worker pool")?;
    }
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Classify { map, max_iter } => {
            let p = resolve_map(&map, &cfg)?;
            let classifier = classifier(max_iter, &cfg)?;
            let crits = p.critical_points()?;
            let fates: Vec<_> = crits
                .points()
                .into_iter()
                .map(|z| json!({ "point": [z.re, z.im], "fate": classify_orbit(&p, z, &classifier) }))
                .collect();
            let slice = match to_kw(&p) {
                Ok(kw) => Some(critical_fates_kw(&kw, &p, &classifier)?),
                Err(_) => None,
            };
            print_json(&json!({ "map": p, "critical_points": fates, "slice": slice }))?;
        }
        Command::FixedPoints { map, newton_tol } => {
            let p = resolve_map(&map, &cfg)?;
            let report = p.is_newton(pick(newton_tol, cfg.newton_tol, 1e-6))?;
            print_json(&json!({ "map": p, "newton": report }))?;
        }
        Command::RenderJulia { map, grid, out, mask_out } => {
            let p = resolve_map(&map, &cfg)?;
            let window = window(&grid, &cfg)?.unwrap_or_else(|| Window::new(-2.0, 2.0, -2.0, 2.0).expect("valid"));
            let res = pick(grid.resolution, cfg.resolution, 512);
            let mask_cfg = mask_config(None, &cfg)?;
            let mask = exobasin::exotic::basin_mask(&p, window, res, &mask_cfg)?;
            let img = render_mask(&mask, &Palette::default());
            let path = out_path(out, &cfg, || julia_name(&map, &p, res))?;
            img.write_ppm(&path).with_context(|| format!("writing {}", path.display()))?;
            if let Some(m) = mask_out {
                write_label_raster(&m, &mask.grid, &mask.labels)?;
            }
            print_json(&json!({ "image": path, "width": img.width, "height": img.height }))?;
        }
        Command::RenderScan { scan: s, out } => {
            let grid = scan_grid(&s, &cfg)?;
            let map = scan(&grid)?;
            let name = format!(
                "scan_k{}-{}_w{}-{}_{}.ppm",
                grid.k_range.0, grid.k_range.1, grid.w_range.0, grid.w_range.1, grid.nk
            );
            let path = out_path(out, &cfg, || name)?;
            render_scan(&map).write_ppm(&path).with_context(|| format!("writing {}", path.display()))?;
            print_json(&json!({ "image": path, "undecided_fraction": map.undecided_fraction }))?;
        }
        Command::Scan { scan: s, out } => {
            let grid = scan_grid(&s, &cfg)?;
            let csv = scan(&grid)?.to_csv();
            match out.or_else(|| cfg.out.as_ref().map(PathBuf::from)) {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => emit(&csv)?,
            }
        }
        Command::SolveEvent { k, event, bracket } => {
            let k = k.or(cfg.k).ok_or_else(|| invalid("--k is required"))?;
            let event: EventKind =
                event.or(cfg.event.clone()).ok_or_else(|| invalid("--event is required"))?.parse()?;
            let bracket = match bracket {
                Some(v) => (v[0], v[1]),
                None => cfg.bracket.ok_or_else(|| invalid("--bracket is required"))?,
            };
            print_json(&solve_event(event, k, bracket)?)?;
        }
        Command::VerifyShift { map, depth, samples, seed, resolution, no_recheck } => {
            let p = resolve_map(&map, &cfg)?;
            let defaults = ShiftConfig::default();
            let shift = ShiftConfig {
                depth: pick(depth, cfg.depth, defaults.depth),
                samples: pick(samples, cfg.samples, defaults.samples),
                seed: pick(seed, cfg.seed, defaults.seed),
                recheck: if no_recheck { false } else { cfg.recheck.unwrap_or(defaults.recheck) },
            };
            let trap_cfg = TrapConfig {
                resolution: pick(resolution, cfg.resolution, TrapConfig::default().resolution),
                window: cfg.window,
            };
            let trap = build_trap(&p, &trap_cfg)?;
            print_json(&verify_full_shift(&p, &trap, &shift)?)?;
        }
        Command::Exotic { map, grid, thin_factor, no_stability, mask_out } => {
            let p = resolve_map(&map, &cfg)?;
            let ecfg = ExoticConfig {
                resolution: pick(grid.resolution, cfg.resolution, ExoticConfig::default().resolution),
                mask: mask_config(thin_factor, &cfg)?,
                window: window(&grid, &cfg)?,
                check_stability: !no_stability && cfg.check_stability.unwrap_or(true),
                figure_eight: true,
            };
            let verdict = exotic_verdict(&p, &ecfg)?;
            if let Some(m) = mask_out {
                let w = ecfg.window.unwrap_or_else(|| escape_window(&p));
                let mask = exobasin::exotic::basin_mask(&p, w, ecfg.resolution, &ecfg.mask)?;
                write_label_raster(&m, &mask.grid, &mask.labels)?;
            }
            print_json(&verdict)?;
        }
        Command::Potential { map, grid, z, level, level_out, figure_eight, saddles, green_raster } => {
            let p = resolve_map(&map, &cfg)?;
            let win = window(&grid, &cfg)?.unwrap_or_else(|| escape_window(&p));
            let res = pick(grid.resolution, cfg.resolution, 512);
            let mut out = serde_json::Map::new();
            out.insert("map".into(), serde_json::to_value(p)?);
            if let Some(z) = z {
                let v = green_infinity(&p, Complex::new(z[0], z[1]), pick(None, cfg.max_iter, 10_000))?;
                out.insert("green".into(), json!({ "z": z, "value": v }));
            }
            if let Some(t) = level {
                let curve = trace_level(&p, t, win, res)?;
                match level_out {
                    Some(path) => {
                        std::fs::write(&path, to_json(&curve)?)?;
                        out.insert(
                            "level".into(),
                            json!({ "level": t, "file": path, "sublevel_components": curve.sublevel_components }),
                        );
                    }
                    None => {
                        out.insert("level".into(), serde_json::to_value(&curve)?);
                    }
                }
            }
            if figure_eight {
                let f = figure_eight_level(&p, &FigureEightConfig { resolution: res, ..FigureEightConfig::default() })?;
                out.insert("figure_eight".into(), serde_json::to_value(&f)?);
            }
            if let Some(depth) = saddles {
                out.insert("saddles".into(), serde_json::to_value(saddle_levels(&p, depth)?)?);
            }
            if let Some(path) = green_raster {
                let g = Grid::with_resolution(win, res)?;
                write_f32_raster(&path, &g, &green_grid(&p, &g, 0.0))?;
                out.insert("green_raster".into(), json!(path));
            }
            print_json(&serde_json::Value::Object(out))?;
        }
        Command::ReproPaper { out_dir } => {
            let dir = out_dir.unwrap_or_else(|| base_dir().join("repro"));
            let rows = repro::run(&dir)?;
            emit(&repro::summary_markdown(&rows))?;
            if rows.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn invalid(msg: &str) -> anyhow::Error {
    Error::Invalid(msg.into()).into()
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    emit(&format!("{}\n", to_json(value)?))
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    use std::io::Write;
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn resolve_map(m: &MapArgs, cfg: &RunConfig) -> Result<MapParams> {
    let from_flags = match (m.k, m.w, m.a, m.b, m.c, m.quadratic) {
        (None, None, None, None, None, false) => None,
        (Some(k), Some(w), None, None, None, false) => Some(KwParams::new(k, w).to_map()?),
        (None, None, None, None, Some(c), true) => Some(MapParams::quadratic(c)),
        (None, None, Some(a), Some(b), Some(c), false) => Some(MapParams::new(a, b, c)?),
        _ => return Err(invalid("give either --k and --w, or --a, --b and --c, or --quadratic with --c")),
    };
    match from_flags {
        Some(p) => Ok(p),
        None => cfg.map()?.ok_or_else(|| invalid("no map given (flags or `map` in --config)")),
    }
}

fn classifier(max_iter: Option<usize>, cfg: &RunConfig) -> Result<ClassifierConfig> {
    let mut c = ClassifierConfig::default();
    c.max_iter = pick(max_iter, cfg.max_iter, c.max_iter);
    c.validate()?;
    Ok(c)
}

fn mask_config(thin_factor: Option<f64>, cfg: &RunConfig) -> Result<MaskConfig> {
    let mut m = MaskConfig::default();
    m.thin_factor = pick(thin_factor, cfg.thin_factor, m.thin_factor);
    m.classifier.max_iter = pick(None, cfg.max_iter, m.classifier.max_iter);
    if !(m.thin_factor >= 0.0) {
        return Err(invalid("thin factor must be non-negative"));
    }
    m.classifier.validate()?;
    Ok(m)
}

fn window(g: &GridArgs, cfg: &RunConfig) -> Result<Option<Window>> {
    match &g.window {
        Some(v) => Ok(Some(Window::new(v[0], v[1], v[2], v[3])?)),
        None => {
            if let Some(w) = cfg.window {
                w.validate()?;
            }
            Ok(cfg.window)
        }
    }
}

fn scan_grid(s: &ScanArgs, cfg: &RunConfig) -> Result<ScanGrid> {
    let pair = |v: &Option<Vec<f64>>| v.as_ref().map(|v| (v[0], v[1]));
    let mut grid = ScanGrid::new(
        pick(pair(&s.k_range), cfg.k_range, (0.80, 0.90)),
        pick(pair(&s.w_range), cfg.w_range, (0.2, 2.2)),
        pick(s.nk, cfg.nk, 256),
        pick(s.nw, cfg.nw, 256),
    )?;
    grid.classifier.max_iter = pick(s.max_iter, cfg.max_iter, grid.classifier.max_iter);
    grid.validate()?;
    Ok(grid)
}

fn base_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn out_path(out: Option<PathBuf>, cfg: &RunConfig, default_name: impl FnOnce() -> String) -> Result<PathBuf> {
    if let Some(p) = out.or_else(|| cfg.out.as_ref().map(PathBuf::from)) {
        return Ok(p);
    }
    let dir = base_dir();
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir.join(default_name()))
}

fn julia_name(m: &MapArgs, p: &MapParams, res: usize) -> String {
    match (m.k, m.w) {
        (Some(k), Some(w)) => image_file_name("julia", k, w, res),
        _ => format!("julia_a{}_b{}_c{}_{res}.ppm", fmt_c(p.a), fmt_c(p.b), fmt_c(p.c)),
    }
}

fn fmt_c(z: Complex) -> String {
    if z.im == 0.0 {
        z.re.to_string()
    } else {
        format!("{},{}", z.re, z.im)
    }
}
