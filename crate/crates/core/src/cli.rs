//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::integrators::{Algorithm, RenderConfig, Renderer};
use crate::metrics::{mse, ConvergenceLog, LogRow};
use crate::par;
use crate::scene::{parse_scene_with, Scene};

#[derive(Parser, Debug)]
#[command(name = "fppm", version, about = "Progressive photon mapping with hypothesis-tested kernel radii")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a scene progressively.
    Render(RenderArgs),
    /// Print the MSE (x 255^2) between two PFM images.
    Mse { a: PathBuf, b: PathBuf },
    /// Print the log-log MSE slope of a convergence log over [from, to].
    Slope { log: PathBuf, from: u64, to: u64 },
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_parser = parse_algorithm)]
    pub algo: Algorithm,
    #[arg(long)]
    pub iters: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 0.002)]
    pub r0_frac: f64,
    #[arg(long, default_value_t = 0.7)]
    pub k: f64,
    #[arg(long, default_value_t = 0.75)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub alpha_f: f64,
    #[arg(long, default_value_t = 2)]
    pub na: usize,
    #[arg(long, default_value_t = 6)]
    pub ns: usize,
    #[arg(long, default_value_t = 10)]
    pub max_depth: u32,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reference image for the log's MSE column.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Prefix for radius, VM-share and squared-error maps and a PNG preview.
    #[arg(long)]
    pub aux_prefix: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

/// Loads a scene file, resolving mesh and texture paths against its directory.
pub fn load_scene(path: &Path) -> Result<Scene> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |name: &str| std::fs::read(dir.join(name));
    parse_scene_with(&text, &resolve).map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Format { path: path.to_path_buf(), message: e.to_string() })
}

/// Writes an 8-bit RGB PNG (gamma 2.2, clamped).
pub fn write_png(img: &Image, path: &Path) -> Result<()> {
    let fmt = |e: png::EncodingError| Error::Format { path: path.to_path_buf(), message: e.to_string() };
    let mut enc = png::Encoder::new(create(path)?, img.width as u32, img.height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut w = enc.write_header().map_err(fmt)?;
    w.write_image_data(&img.to_rgb8()).map_err(fmt)?;
    w.finish().map_err(fmt)
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn render(args: &RenderArgs) -> Result<()> {
    let scene = load_scene(&args.scene)?;
    let reference = match &args.reference {
        Some(p) => Some(Image::read_pfm(p)?),
        None => None,
    };
    let config = RenderConfig {
        algorithm: args.algo,
        iterations: args.iters,
        seed: args.seed,
        r0_frac: args.r0_frac,
        k: args.k,
        alpha: args.alpha,
        alpha_f: args.alpha_f,
        n_a: args.na,
        n_s: args.ns,
        max_depth: args.max_depth,
        ..RenderConfig::default()
    };
    // Fail on unwritable outputs before spending time on rendering.
    let log_out = match &args.log {
        Some(p) => Some(create(p)?),
        None => None,
    };
    let out = create(&args.out)?;

    let (film, log, schedule) = par::with_threads(args.threads, || -> Result<_> {
        let mut r = Renderer::new(&scene, config)?;
        for w in r.warnings() {
            eprintln!("warning: {w}");
        }
        let mut log = ConvergenceLog::new();
        for _ in 0..args.iters {
            let rep = r.step()?;
            let err = match &reference {
                Some(img) => mse(&r.film().image(), img)?,
                None => f64::NAN,
            };
            log.push(LogRow {
                iteration: rep.iteration,
                seconds: rep.seconds,
                mse: err,
                mean_radius: rep.mean_radius(),
                vm_share: rep.vm_share(None),
            })?;
        }
        let schedule = *r.schedule();
        Ok((r.into_film(), log, schedule))
    })?;

    let img = film.image();
    let mut out = out;
    out.write_all(&img.encode_pfm())?;
    out.flush()?;
    if let Some(w) = log_out {
        log.write_csv(w)?;
    }
    if let Some(prefix) = &args.aux_prefix {
        let (w, h) = (film.width, film.height);
        write_png(&img, &with_suffix(prefix, "preview.png"))?;
        if args.algo.uses_kernel() {
            let radius = Image::from_scalar(w, h, &film.radius_map(schedule.r_min_base, schedule.initial_radius));
            radius.write_pfm(&with_suffix(prefix, "radius.pfm"))?;
            write_png(&radius, &with_suffix(prefix, "radius.png"))?;
        }
        Image::from_scalar(w, h, &film.vm_share()).write_pfm(&with_suffix(prefix, "vm_share.pfm"))?;
        if let Some(reference) = &reference {
            let se = film.squared_error_map(reference)?;
            Image::from_scalar(w, h, &se).write_pfm(&with_suffix(prefix, "sqerr.pfm"))?;
        }
    }
    Ok(())
}

/// Runs a parsed command, writing results to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Render(args) => render(args),
        Command::Mse { a, b } => {
            let m = mse(&Image::read_pfm(a)?, &Image::read_pfm(b)?)?;
            writeln!(stdout, "{m}")?;
            Ok(())
        }
        Command::Slope { log, from, to } => {
            let f = File::open(log).map_err(|e| Error::Format { path: log.clone(), message: e.to_string() })?;
            let s = ConvergenceLog::read_csv(f)?.slope(*from, *to)?;
            writeln!(stdout, "{s}")?;
            Ok(())
        }
    }
}

/// Entry point: parses `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            if !matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                // Usage of the subcommand being invoked, else the top level.
                let mut cmd = Cli::command();
                cmd.build();
                let name = argv.get(1).and_then(|a| a.to_str()).unwrap_or("");
                let usage = match cmd.find_subcommand_mut(name) {
                    Some(sub) => sub.render_help(),
                    None => cmd.render_help(),
                };
                eprintln!("\n{usage}");
            }
            return e.exit_code();
        }
    };
    match execute(&cli, &mut std::io::stdout()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
