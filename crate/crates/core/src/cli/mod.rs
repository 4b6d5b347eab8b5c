//! Command-line front end.
//!
//! Every artifact starts with the run configuration as a single JSON line
//! (a `#` comment in CSV, an XML comment in SVG, a `config` field in JSON).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::correspondence::{consistency_scores, filter_top, plot_svg, write_correspondences_csv, Keep, ScoredMatch};
use crate::error::{Error, Result};
use crate::mesh::{build_mid_edge, load_mesh, MeshFormat, Topology, TriangleMesh};
use crate::sphere::{prepare_sphere, sphere_distance_prepared, SphereParams};
use crate::transport::{
    combine_scales, dissimilarity_prepared, distance_prepared, extract_permutation, normalize_dissimilarity,
    prepare_surface, sample_disk, uniform_transport, write_matrix_csv, DistanceParams, PreparedSurface,
};
use crate::uniformization::{uniformize, UniformizeParams};

#[derive(Parser, Debug)]
#[command(name = "cwd", version, about = "Conformal Wasserstein distances between surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Map a disk-type mesh to the unit disk and fit its density.
    Uniformize {
        #[arg(long, value_parser = existing_file)]
        input: PathBuf,
        #[command(flatten)]
        fit: FitOpts,
        #[arg(long, default_value = "flat.json")]
        output: PathBuf,
    },
    /// Farthest point samples on the mid-edge mesh.
    Sample {
        #[arg(long, value_parser = existing_file)]
        input: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[command(flatten)]
        fit: FitOpts,
        #[arg(long, default_value = "samples.csv")]
        output: PathBuf,
    },
    /// Local cost matrix between two disk-type meshes.
    Cost {
        #[arg(value_parser = existing_file)]
        a: PathBuf,
        #[arg(value_parser = existing_file)]
        b: PathBuf,
        #[command(flatten)]
        disk: DiskOpts,
        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Distance between two disk-type meshes.
    Compare {
        #[arg(value_parser = existing_file)]
        a: PathBuf,
        #[arg(value_parser = existing_file)]
        b: PathBuf,
        #[command(flatten)]
        disk: DiskOpts,
        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Distance between two sphere-type meshes.
    SphereCompare {
        #[arg(value_parser = existing_file)]
        a: PathBuf,
        #[arg(value_parser = existing_file)]
        b: PathBuf,
        #[command(flatten)]
        sphere: SphereOpts,
        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Pairwise dissimilarities of every mesh in a directory.
    Batch {
        #[arg(long, value_parser = existing_dir)]
        dir: PathBuf,
        /// Comma separated radii; defaults to `--radius`.
        #[arg(long, value_delimiter = ',')]
        scales: Vec<f64>,
        /// Also write the entrywise product over scales.
        #[arg(long)]
        combine: bool,
        #[command(flatten)]
        disk: DiskOpts,
        /// Output directory.
        #[arg(long, default_value = ".")]
        output: PathBuf,
    },
    /// Consistency-filtered correspondences between two disk-type meshes.
    Correspond {
        #[arg(value_parser = existing_file)]
        a: PathBuf,
        #[arg(value_parser = existing_file)]
        b: PathBuf,
        #[command(flatten)]
        disk: DiskOpts,
        /// Fraction of matches kept after filtering.
        #[arg(long, default_value_t = 0.5)]
        keep: f64,
        #[arg(long, default_value = "correspondences.csv")]
        output: PathBuf,
    },
    /// SVG of both flattened disks with their filtered correspondences.
    Plot {
        #[arg(value_parser = existing_file)]
        a: PathBuf,
        #[arg(value_parser = existing_file)]
        b: PathBuf,
        #[command(flatten)]
        disk: DiskOpts,
        #[arg(long, default_value_t = 0.5)]
        keep: f64,
        #[arg(long, default_value = "plot.svg")]
        output: PathBuf,
    },
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct FitOpts {
    /// TPS smoothing weight.
    #[arg(long, default_value_t = 0.97)]
    pub lambda: f64,
    #[arg(long, default_value_t = 200)]
    pub tps_centers: usize,
    /// Mid-edge vertex seeding farthest point sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: usize,
}

impl FitOpts {
    fn params(&self) -> UniformizeParams {
        UniformizeParams { lambda: self.lambda, tps_centers: self.tps_centers, seed: self.seed }
    }
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct DiskOpts {
    #[arg(long, default_value_t = 0.5)]
    pub radius: f64,
    #[arg(long, default_value_t = 64)]
    pub rotations: usize,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.05)]
    pub quad_h: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mass_fraction: f64,
    #[command(flatten)]
    pub fit: FitOpts,
}

impl DiskOpts {
    fn params(&self) -> DistanceParams {
        DistanceParams {
            radius: self.radius,
            rotations: self.rotations,
            quad_h: self.quad_h,
            samples: self.samples,
            seed: self.fit.seed,
            mass_fraction: self.mass_fraction,
            uniformize: self.fit.params(),
        }
    }
}

#[derive(Args, Debug, Clone, Copy, Serialize)]
pub struct SphereOpts {
    /// Neighborhood area as a fraction of the surface.
    #[arg(long, default_value_t = 0.3)]
    pub area: f64,
    #[arg(long, default_value_t = 64)]
    pub rotations: usize,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Size of the density point cloud.
    #[arg(long, default_value_t = 1000)]
    pub cloud: usize,
    /// Tolerance on neighborhood mass.
    #[arg(long, default_value_t = 0.02)]
    pub eps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: usize,
}

impl SphereOpts {
    fn params(&self) -> SphereParams {
        SphereParams {
            area: self.area,
            rotations: self.rotations,
            samples: self.samples,
            cloud: self.cloud,
            eps: self.eps,
            seed: self.seed,
        }
    }
}

fn existing_file(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if !p.is_file() {
        return Err(format!("no such file: {s}"));
    }
    if MeshFormat::from_path(&p).is_none() {
        return Err(format!("unknown mesh format: {s} (expected .off or .obj)"));
    }
    Ok(p)
}

fn existing_dir(s: &str) -> std::result::Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_dir() {
        Ok(p)
    } else {
        Err(format!("no such directory: {s}"))
    }
}

/// Configuration echoed into artifact headers.
#[derive(Serialize)]
struct RunConfig<'a, O: Serialize> {
    command: &'a str,
    inputs: Vec<String>,
    options: O,
}

struct Run {
    header: String,
}

impl Run {
    fn new<O: Serialize>(command: &str, inputs: &[&Path], options: O) -> Result<Self> {
        let cfg = RunConfig { command, inputs: inputs.iter().map(|p| p.display().to_string()).collect(), options };
        Ok(Run { header: serde_json::to_string(&cfg)? })
    }

    fn write_csv(&self, path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "# config: {}", self.header)?;
        body(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

fn load(path: &Path) -> Result<TriangleMesh> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown mesh format: {}", path.display())))?;
    load_mesh(path, format)
}

fn mesh_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && MeshFormat::from_path(p).is_some())
        .collect();
    files.sort();
    Ok(files)
}

fn scale_name(r: f64) -> String {
    format!("{r}").replace('.', "_")
}

fn prepare_pair(a: &Path, b: &Path, params: &DistanceParams) -> Result<(PreparedSurface, PreparedSurface)> {
    let (ma, mb) = (load(a)?, load(b)?);
    let (pa, pb) = rayon::join(|| prepare_surface(&ma, params), || prepare_surface(&mb, params));
    Ok((pa?, pb?))
}

/// Mesh vertex standing for each sample: the first endpoint of its parent edge.
fn sample_vertices(s: &PreparedSurface) -> Vec<usize> {
    s.samples.points.iter().map(|&r| s.mesh.edges()[r][0]).collect()
}

fn filtered_matches(pa: &PreparedSurface, pb: &PreparedSurface, disk: &DiskOpts, keep: f64) -> Result<Vec<ScoredMatch>> {
    let params = disk.params();
    let costs = crate::cost::cost_matrix(
        &pa.uniformized.density,
        &pb.uniformized.density,
        &pa.measure.points,
        &pb.measure.points,
        &params.cost_config()?,
    )?;
    let matches = extract_permutation(&uniform_transport(&costs, params.mass_fraction)?)?;
    let scores = consistency_scores(&matches, &costs)?;
    filter_top(&matches, &scores.scores, Keep::Fraction(keep))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Uniformize { input, fit, output } => {
            let run = Run::new("uniformize", &[&input], fit)?;
            let mesh = load(&input)?.normalize_area()?;
            let u = uniformize(&mesh, &fit.params())?;
            let config: serde_json::Value = serde_json::from_str(&run.header)?;
            let doc = serde_json::json!({ "config": config, "map": u.map, "density": u.density });
            let mut w = BufWriter::new(File::create(&output)?);
            serde_json::to_writer(&mut w, &doc)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Sample { input, samples, fit, output } => {
            let run = Run::new("sample", &[&input], serde_json::json!({ "samples": samples, "fit": fit }))?;
            let mesh = load(&input)?.normalize_area()?;
            let set = if mesh.topology() == Topology::Sphere {
                crate::mesh::farthest_point_sample_graph(&build_mid_edge(&mesh).graph(), samples, fit.seed, None)?
            } else {
                let u = uniformize(&mesh, &fit.params())?;
                sample_disk(&u, samples, fit.seed)?
            };
            let positions = build_mid_edge(&mesh).vertices;
            run.write_csv(&output, |w| set.write_csv(&positions, w))?;
        }
        Command::Cost { a, b, disk, output } => {
            let run = Run::new("cost", &[&a, &b], disk)?;
            let params = disk.params();
            let cfg = params.cost_config()?;
            let (pa, pb) = prepare_pair(&a, &b, &params)?;
            let costs = crate::cost::cost_matrix(
                &pa.uniformized.density,
                &pb.uniformized.density,
                &pa.measure.points,
                &pb.measure.points,
                &cfg,
            )?;
            std::fs::create_dir_all(&output)?;
            run.write_csv(&output.join("costs.csv"), |w| costs.write_costs_csv(w))?;
            run.write_csv(&output.join("argmin.csv"), |w| costs.write_argmin_csv(w))?;
        }
        Command::Compare { a, b, disk, output } => {
            let run = Run::new("compare", &[&a, &b], disk)?;
            let params = disk.params();
            let cfg = params.cost_config()?;
            let (pa, pb) = prepare_pair(&a, &b, &params)?;
            let result = distance_prepared(&pa, &pb, &cfg, params.mass_fraction)?;
            std::fs::create_dir_all(&output)?;
            run.write_csv(&output.join("distance.csv"), |w| {
                writeln!(w, "distance\n{:?}", result.value)?;
                Ok(())
            })?;
            run.write_csv(&output.join("plan.csv"), |w| result.plan.write_csv(w))?;
            run.write_csv(&output.join("costs.csv"), |w| result.costs.write_costs_csv(w))?;
            run.write_csv(&output.join("argmin.csv"), |w| result.costs.write_argmin_csv(w))?;
            println!("{:?}", result.value);
        }
        Command::SphereCompare { a, b, sphere, output } => {
            let run = Run::new("sphere-compare", &[&a, &b], sphere)?;
            let params = sphere.params();
            let (ma, mb) = (load(&a)?, load(&b)?);
            let (pa, pb) = rayon::join(|| prepare_sphere(&ma, &params), || prepare_sphere(&mb, &params));
            let (pa, pb) = (pa?, pb?);
            let result = sphere_distance_prepared(&pa, &pb, params.rotations)?;
            let cols = pb.samples.len();
            std::fs::create_dir_all(&output)?;
            run.write_csv(&output.join("distance.csv"), |w| {
                writeln!(w, "distance\n{:?}", result.value)?;
                Ok(())
            })?;
            run.write_csv(&output.join("plan.csv"), |w| result.plan.write_csv(w))?;
            run.write_csv(&output.join("costs.csv"), |w| {
                let mut c = csv::Writer::from_writer(w);
                for row in result.costs.chunks(cols) {
                    c.write_record(row.iter().map(|v| format!("{v:?}")))?;
                }
                c.flush()?;
                Ok(())
            })?;
            println!("{:?}", result.value);
        }
        Command::Batch { dir, scales, combine, disk, output } => {
            let scales = if scales.is_empty() { vec![disk.radius] } else { scales };
            let run = Run::new("batch", &[&dir], serde_json::json!({ "scales": scales, "combine": combine, "disk": disk }))?;
            let files = mesh_files(&dir)?;
            if files.len() < 2 {
                return Err(Error::InvalidParameter(format!("{} holds fewer than two meshes", dir.display())));
            }
            let params = disk.params();
            let meshes: Vec<TriangleMesh> = files.iter().map(|p| load(p)).collect::<Result<_>>()?;
            let surfaces: Vec<PreparedSurface> =
                meshes.par_iter().map(|m| prepare_surface(m, &params)).collect::<Result<_>>()?;
            std::fs::create_dir_all(&output)?;
            run.write_csv(&output.join("meshes.csv"), |w| {
                writeln!(w, "index,path")?;
                for (k, p) in files.iter().enumerate() {
                    writeln!(w, "{k},{}", p.display())?;
                }
                Ok(())
            })?;
            let mut raws = Vec::with_capacity(scales.len());
            for &r in &scales {
                let cfg = DistanceParams { radius: r, ..params }.cost_config()?;
                let d = dissimilarity_prepared(&surfaces, &cfg, params.mass_fraction)?;
                let name = scale_name(r);
                run.write_csv(&output.join(format!("raw_R{name}.csv")), |w| write_matrix_csv(&d.raw, w))?;
                run.write_csv(&output.join(format!("dissimilarity_R{name}.csv")), |w| {
                    write_matrix_csv(&d.normalized, w)
                })?;
                raws.push(d.raw);
            }
            if combine {
                let product = normalize_dissimilarity(&combine_scales(&raws)?);
                run.write_csv(&output.join("combined.csv"), |w| write_matrix_csv(&product, w))?;
            }
        }
        Command::Correspond { a, b, disk, keep, output } => {
            let run = Run::new("correspond", &[&a, &b], serde_json::json!({ "disk": disk, "keep": keep }))?;
            let (pa, pb) = prepare_pair(&a, &b, &disk.params())?;
            let kept = filtered_matches(&pa, &pb, &disk, keep)?;
            run.write_csv(&output, |w| write_correspondences_csv(&kept, &sample_vertices(&pa), &sample_vertices(&pb), w))?;
        }
        Command::Plot { a, b, disk, keep, output } => {
            let run = Run::new("plot", &[&a, &b], serde_json::json!({ "disk": disk, "keep": keep }))?;
            let (pa, pb) = prepare_pair(&a, &b, &disk.params())?;
            let kept = filtered_matches(&pa, &pb, &disk, keep)?;
            let svg = plot_svg((&pa.uniformized, &pa.measure), (&pb.uniformized, &pb.measure), &kept);
            let mut w = BufWriter::new(File::create(&output)?);
            // the header must not contain "--" inside an XML comment
            writeln!(w, "<!-- config: {} -->", run.header.replace("--", "- -"))?;
            w.write_all(svg.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Caps the global rayon pool at `CWD_THREADS` when set.
fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("CWD_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("CWD_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("CWD_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

/// Exit status 2 for usage errors, 1 for pipeline errors.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
