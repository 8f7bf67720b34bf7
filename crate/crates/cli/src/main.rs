use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use extrinsic::config::{self, RunConfig, Source};
use extrinsic::{cmd_defect, cmd_mesh, cmd_sweep, cmd_verify, CommandError, Exit, Outcome};

/// Extrinsic-ball area growth, monotone quantities and total curvature on
/// parametric surfaces and triangle meshes.
///
/// Exit codes: 0 pass, 1 identity failure, 2 configuration error,
/// 3 hypothesis violated.
#[derive(Parser)]
#[command(name = "extrinsic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every identity at every regular level.
    Verify(Opts),
    /// Write one CSV row per level.
    Sweep(Opts),
    /// Compare the area-growth limit with the total-curvature defect.
    Defect(Opts),
    /// Report on an OBJ mesh, or a tessellated catalog surface.
    Mesh(Opts),
}

#[derive(Args)]
struct Opts {
    /// Catalog surface name, or an OBJ path for `mesh`.
    source: Option<String>,
    /// Configuration file; command-line flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "V")]
    v: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "U")]
    u: Option<f64>,
    #[arg(long = "W")]
    w: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    /// Base point, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Grid cells, `N` or `NxM`.
    #[arg(long)]
    grid: Option<String>,
    /// Keep the base point on the surface instead of offsetting it.
    #[arg(long)]
    on_surface: bool,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of levels (at least 8).
    #[arg(long)]
    levels: Option<usize>,
    /// `log` or `linear`.
    #[arg(long)]
    spacing: Option<String>,
    #[arg(long)]
    identity_tol: Option<f64>,
    #[arg(long)]
    monotonicity_slack: Option<f64>,
    #[arg(long)]
    fit_gate: Option<f64>,
    /// CSV output path (default: stdout for `sweep` and `mesh`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON output path (default: stdout for `defect`).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads; overrides the environment variable.
    #[arg(long)]
    threads: Option<usize>,
    /// Mesh runs: Dijkstra source vertex, 0-based.
    #[arg(long)]
    source_vertex: Option<usize>,
    /// Mesh runs from a surface: tessellation `NxM`.
    #[arg(long)]
    tessellation: Option<String>,
}

impl Opts {
    fn to_config(&self, mesh: bool) -> Result<RunConfig, CommandError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = &self.source {
            c.source = Some(if mesh && s.ends_with(".obj") {
                Source::Mesh(PathBuf::from(s))
            } else {
                Source::Surface {
                    name: s.clone(),
                    params: Vec::new(),
                    user: None,
                }
            });
        }
        let flags = [
            ("R", self.r),
            ("V", self.v),
            ("L", self.l),
            ("U", self.u),
            ("W", self.w),
            ("scale", self.scale),
        ];
        for (k, v) in flags {
            let Some(v) = v else { continue };
            match &mut c.source {
                Some(Source::Surface { params, .. }) => {
                    params.retain(|(n, _)| n != k);
                    params.push((k.to_string(), v));
                }
                _ => return Err(CommandError::Config(format!("--{k} needs a surface"))),
            }
        }
        if let Some(x) = &self.x0 {
            c.x0 = Some(config::parse_point(x)?);
        }
        if let Some(g) = &self.grid {
            c.resolution = config::parse_resolution(g)?;
        }
        if self.on_surface {
            c.policy = extrinsic_core::sublevel::BasePointPolicy::OnSurface;
        }
        if let Some(s) = &self.spacing {
            c.spacing = config::parse_spacing(s)?;
        }
        if let Some(s) = &self.tessellation {
            c.tessellation = config::parse_resolution(s)?;
        }
        c.t_min = self.t_min.or(c.t_min);
        c.t_max = self.t_max.or(c.t_max);
        c.levels = self.levels.unwrap_or(c.levels);
        c.identity_tol = self.identity_tol.unwrap_or(c.identity_tol);
        c.monotonicity_slack = self.monotonicity_slack.unwrap_or(c.monotonicity_slack);
        c.fit_gate = self.fit_gate.unwrap_or(c.fit_gate);
        c.csv = self.csv.clone().or(c.csv);
        c.json = self.json.clone().or(c.json);
        c.threads = self.threads.or(c.threads);
        c.source_vertex = self.source_vertex.or(c.source_vertex);
        Ok(c)
    }
}

fn emit(out: &Outcome, cfg: &RunConfig, csv_to_stdout: bool, json_to_stdout: bool) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(&out.json)? + "\n";
    match &cfg.json {
        Some(p) => std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?,
        None if json_to_stdout => print!("{json}"),
        None => {}
    }
    let mut summary_to_stdout = !json_to_stdout || cfg.json.is_some();
    if let Some(csv) = &out.csv {
        match &cfg.csv {
            Some(p) => std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
            None if csv_to_stdout => {
                print!("{csv}");
                summary_to_stdout = false;
            }
            None => {}
        }
    }
    if summary_to_stdout {
        print!("{}", out.summary);
    } else {
        eprint!("{}", out.summary);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (opts, mesh) = match &cli.command {
        Command::Mesh(o) => (o, true),
        Command::Verify(o) | Command::Sweep(o) | Command::Defect(o) => (o, false),
    };
    let result = opts.to_config(mesh).and_then(|cfg| {
        let out = match cli.command {
            Command::Verify(_) => cmd_verify(&cfg),
            Command::Sweep(_) => cmd_sweep(&cfg),
            Command::Defect(_) => cmd_defect(&cfg),
            Command::Mesh(_) => cmd_mesh(&cfg),
        }?;
        Ok((cfg, out))
    });
    match result {
        Ok((cfg, out)) => {
            let to_stdout = matches!(cli.command, Command::Sweep(_) | Command::Mesh(_));
            let json_stdout = matches!(cli.command, Command::Defect(_));
            if let Err(e) = emit(&out, &cfg, to_stdout, json_stdout) {
                eprintln!("error: {e:#}");
                return ExitCode::from(Exit::Config as u8);
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
