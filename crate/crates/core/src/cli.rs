//! Command-line front end: `simplify` and `metrics`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex_build::build_complex;
use crate::core_types::SimplicialComplex2;
use crate::decimator::{decimate, Accumulation, DecimationConfig, Target};
use crate::mesh_io::{load_mesh, save_mesh, RawMesh, TextureImage};
use crate::metrics::{compare, MetricOptions, Normalization, Surface, DEFAULT_SAMPLES};
use crate::quadrics::AreaSupport;
use crate::texture_transfer::{
    transfer_texture, write_mesh_colors, ColorSource, Projection, TextureOptions,
};

pub const REPORT_SCHEMA: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TARGET_UNREACHED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "decimesh",
    version,
    about = "Simplify non-manifold, multi-component, textured triangle meshes"
)]
pub struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decimate a mesh, optionally transferring its texture.
    Simplify(SimplifyArgs),
    /// Compare two meshes.
    Metrics(MetricsArgs),
}

fn serde_value<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct SimplifyArgs {
    pub input: PathBuf,
    /// Output mesh; defaults to `<stem>_simplified.<ext>` next to the input.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// JSON config (the `config` object of a report); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target as a fraction of the input face count [default: 0.1].
    #[arg(long, conflicts_with = "target_faces")]
    pub ratio: Option<f64>,
    #[arg(long)]
    pub target_faces: Option<usize>,
    /// Virtual-edge distance as a fraction of the bounding-box diagonal [default: 1e-3].
    #[arg(long)]
    pub epsilon_rel: Option<f64>,
    /// Area quadric weight [default: 1.0].
    #[arg(long)]
    pub area_weight: Option<f64>,
    /// memory | memoryless [default: memory].
    #[arg(long)]
    pub edge_acc: Option<Accumulation>,
    /// memory | memoryless [default: memoryless].
    #[arg(long)]
    pub area_acc: Option<Accumulation>,
    /// boundary | full-link [default: boundary].
    #[arg(long, value_parser = serde_value::<AreaSupport>)]
    pub area_support: Option<AreaSupport>,
    #[arg(long)]
    pub no_virtual_edges: bool,
    /// Most virtual edges per vertex [default: 32].
    #[arg(long)]
    pub virtual_edge_cap: Option<usize>,
    #[arg(long)]
    pub preserve_topology: bool,
    /// Tikhonov weight pulling placements toward the edge midpoint [default: 0].
    #[arg(long)]
    pub regularization: Option<f64>,
    /// Vertex weld distance on load [default: 0, exact matches only].
    #[arg(long)]
    pub weld_eps: Option<f64>,
    /// Check the stars around each collapse and the whole complex at the end.
    #[arg(long)]
    pub validate: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Transfer colors to a freshly baked atlas.
    #[arg(long)]
    pub texture: bool,
    /// Color samples per face edge [default: 4].
    #[arg(long)]
    pub samples_per_edge: Option<u32>,
    /// Gutter texels around each chart [default: 2].
    #[arg(long)]
    pub gutter: Option<u32>,
    /// Largest atlas side in texels [default: 8192].
    #[arg(long)]
    pub atlas_max: Option<u32>,
    /// successive | global [default: successive].
    #[arg(long, value_parser = serde_value::<Projection>)]
    pub projection: Option<Projection>,
    /// Also dump raw per-face sample colors here.
    #[arg(long, requires = "texture")]
    pub mesh_colors: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Random surface samples per mesh.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// unit-diagonal | none.
    #[arg(long, value_parser = serde_value::<Normalization>, default_value = "unit-diagonal")]
    pub normalization: Normalization,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Fully resolved `simplify` settings, echoed in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplifyConfig {
    pub decimation: DecimationConfig,
    pub texture: Option<TextureOptions>,
    pub weld_eps: f64,
}

impl Default for SimplifyConfig {
    fn default() -> Self {
        Self {
            decimation: DecimationConfig::default(),
            texture: None,
            weld_eps: 0.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Mesh(#[from] crate::mesh_io::MeshIoError),
    #[error(transparent)]
    Build(#[from] crate::complex_build::BuildError),
    #[error(transparent)]
    Decimate(#[from] crate::decimator::DecimateError),
    #[error(transparent)]
    Transfer(#[from] crate::texture_transfer::TransferError),
    #[error(transparent)]
    Metrics(#[from] crate::metrics::MetricsError),
}

impl SimplifyArgs {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<SimplifyConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str(&text).map_err(|source| CliError::Config {
                    path: path.clone(),
                    source,
                })?
            }
            None => SimplifyConfig::default(),
        };
        let d = &mut cfg.decimation;
        if let Some(r) = self.ratio {
            d.target = Target::Ratio(r);
        }
        if let Some(n) = self.target_faces {
            d.target = Target::Faces(n);
        }
        macro_rules! overlay {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag {
                    d.$field = v;
                }
            )*};
        }
        overlay!(
            epsilon_rel => eps_rel,
            area_weight => area_weight,
            edge_acc => edge_quadric_mode,
            area_acc => area_quadric_mode,
            area_support => area_support,
            virtual_edge_cap => virtual_edge_cap,
            regularization => regularization,
            seed => seed
        );
        if self.no_virtual_edges {
            d.enable_virtual_edges = false;
        }
        if self.preserve_topology {
            d.preserve_topology = true;
        }
        if self.validate {
            d.validate = true;
        }
        if let Some(w) = self.weld_eps {
            cfg.weld_eps = w;
        }
        let texture_flags = self.samples_per_edge.is_some()
            || self.gutter.is_some()
            || self.atlas_max.is_some()
            || self.projection.is_some();
        if self.texture || (cfg.texture.is_some() && texture_flags) {
            let t = cfg.texture.get_or_insert_with(TextureOptions::default);
            if let Some(r) = self.samples_per_edge {
                t.samples_per_edge = r;
            }
            if let Some(g) = self.gutter {
                t.gutter = g;
            }
            if let Some(m) = self.atlas_max {
                t.atlas_max = m;
            }
            if let Some(p) = self.projection {
                t.projection = p;
            }
        }
        if cfg.texture.is_some() {
            cfg.decimation.record_history = true;
        }
        Ok(cfg)
    }

    pub fn output_path(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| {
            let stem = self.input.file_stem().unwrap_or_default().to_string_lossy();
            let ext = self.input.extension().unwrap_or_default().to_string_lossy();
            self.input
                .with_file_name(format!("{stem}_simplified.{ext}"))
        })
    }
}

fn counts(m: &SimplicialComplex2) -> serde_json::Value {
    json!({
        "vertices": m.live_vertex_count(),
        "edges": m.live_edge_count(),
        "faces": m.live_face_count(),
    })
}

fn write_report(path: &Path, report: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_texture(raw: &RawMesh) -> Result<Option<TextureImage>, CliError> {
    match &raw.texture {
        Some(p) if raw.has_uvs() => Ok(Some(TextureImage::load(p)?)),
        _ => Ok(None),
    }
}

/// Runs the whole pipeline; returns the report and the exit code.
pub fn run_simplify(args: &SimplifyArgs) -> Result<(serde_json::Value, i32), CliError> {
    let cfg = args.resolve()?;
    let output = args.output_path();

    let t0 = Instant::now();
    let raw = load_mesh(&args.input)?;
    let built = build_complex(&raw, cfg.weld_eps)?;
    let input_counts = counts(&built.complex);
    let load_time = t0.elapsed().as_secs_f64();

    let result = decimate(built.complex.clone(), &cfg.decimation)?;
    log::info!(
        "{} collapses, {} -> {} faces",
        result.history.len(),
        built.complex.live_face_count(),
        result.mesh.live_face_count()
    );

    let mut texture_time = None;
    let mut texture_report = serde_json::Value::Null;
    let t_write;
    let (mesh, files) = match &cfg.texture {
        Some(opts) => {
            let t = Instant::now();
            let image = load_texture(&raw)?;
            let colors = ColorSource::new(&raw, &built.source, image.as_ref());
            if !colors.has_colors() {
                log::warn!("input has no texture or vertex colors; baking white");
            }
            let out = transfer_texture(&result, &colors, opts)?;
            if let Some(path) = &args.mesh_colors {
                write_mesh_colors(path, &out.samples, opts.samples_per_edge).map_err(|source| {
                    CliError::Io {
                        path: path.clone(),
                        source,
                    }
                })?;
            }
            texture_time = Some(t.elapsed().as_secs_f64());
            texture_report = json!({
                "stats": out.stats,
                "atlas_size": out.layout.size,
                "charts": out.layout.charts,
            });
            t_write = Instant::now();
            let files = save_mesh(&out.mesh, Some(&out.uvs), Some(&out.image), &output)?;
            (out.mesh, files)
        }
        None => {
            let (mesh, _) = result.mesh.compacted();
            t_write = Instant::now();
            let files = save_mesh(&mesh, None, None, &output)?;
            (mesh, files)
        }
    };
    let write_time = t_write.elapsed().as_secs_f64();

    let report = json!({
        "schema": REPORT_SCHEMA,
        "command": "simplify",
        "input": args.input,
        "output": output,
        "files": files,
        "config": cfg,
        "input_counts": input_counts,
        "output_counts": counts(&mesh),
        "collapses": result.history.len(),
        "rejected_collapses": result.rejected,
        "virtual_edges": result.virtual_edges,
        "target_faces": result.target_faces,
        "target_reached": result.target_reached,
        "timings": {
            "load": load_time,
            "virtual_edges": result.timings.virtual_edges,
            "collapses": result.timings.collapses,
            "texture": texture_time,
            "write": write_time,
        },
        "texture": texture_report,
    });
    if let Some(path) = &args.report {
        write_report(path, &report)?;
    }
    let code = if result.target_reached {
        EXIT_OK
    } else {
        log::warn!(
            "target of {} faces not reached ({} remain)",
            result.target_faces,
            mesh.live_face_count()
        );
        EXIT_TARGET_UNREACHED
    };
    Ok((report, code))
}

/// Loads a mesh for comparison, with its colors when it has any.
struct Loaded {
    raw: RawMesh,
    built: crate::complex_build::BuiltComplex,
    texture: Option<TextureImage>,
}

impl Loaded {
    fn new(path: &Path) -> Result<Self, CliError> {
        let raw = load_mesh(path)?;
        let built = build_complex(&raw, 0.0)?;
        let texture = load_texture(&raw)?;
        Ok(Self {
            raw,
            built,
            texture,
        })
    }

    fn colors(&self) -> Option<ColorSource<'_>> {
        let c = ColorSource::new(&self.raw, &self.built.source, self.texture.as_ref());
        c.has_colors().then_some(c)
    }
}

pub fn run_metrics(args: &MetricsArgs) -> Result<serde_json::Value, CliError> {
    let (a, b) = (Loaded::new(&args.a)?, Loaded::new(&args.b)?);
    let (ca, cb) = (a.colors(), b.colors());
    // Texture error only when both sides have colors.
    let both = ca.is_some() && cb.is_some();
    let sa = Surface {
        mesh: &a.built.complex,
        colors: ca.as_ref().filter(|_| both),
    };
    let sb = Surface {
        mesh: &b.built.complex,
        colors: cb.as_ref().filter(|_| both),
    };
    let opts = MetricOptions {
        samples: args.samples,
        seed: args.seed,
        normalization: args.normalization,
    };
    let r = compare(&sa, &sb, &opts)?;
    let report = json!({
        "schema": REPORT_SCHEMA,
        "command": "metrics",
        "a": args.a,
        "b": args.b,
        "hausdorff": r.hausdorff,
        "chamfer_ms": r.chamfer_ms,
        "texture_chamfer": r.texture_chamfer,
        "N": r.samples,
        "seed": r.seed,
        "normalization": r.normalization,
    });
    if let Some(path) = &args.report {
        write_report(path, &report)?;
    }
    Ok(report)
}

/// Dispatches a parsed command line and returns the exit code. Errors go
/// to stderr.
pub fn run(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Simplify(args) => run_simplify(args).map(|(report, code)| {
            if args.report.is_none() {
                log::info!("{report}");
            }
            code
        }),
        Command::Metrics(args) => run_metrics(args).map(|report| {
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            EXIT_OK
        }),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

pub fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}
