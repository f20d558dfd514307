//! Command line front end for the `ifgf` library: benchmark, verification,
//! diagnostic, and cloud generation commands with machine-readable output.

use std::error::Error;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ifgf::cone::ConeGrid;
use ifgf::evaluator::EvalError;
use ifgf::geometry::points_per_wavelength;
use ifgf::{EvalMode, EvalParams, EvaluationPlan, PointCloud};

/// Bumped whenever the record layout changes incompatibly.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "ifgf",
    version,
    about = "Fast Helmholtz and Laplace potential sums over surface point clouds",
    after_help = "Exit codes: 0 success, 1 verification failure, 2 usage or runtime error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time one accelerated operator application and estimate its error
    /// against direct summation on a point subset.
    Bench(BenchArgs),
    /// Check the accelerated evaluation against direct summation at every
    /// point; exits 1 when the error exceeds the threshold.
    Verify(VerifyArgs),
    /// Compare kernel interpolation strategies across acoustic box sizes.
    DiagFactorization(DiagFactorizationArgs),
    /// Compare radial against reciprocal interpolation cells as the cell
    /// approaches the radial-width singularity.
    DiagRVsS(DiagRVsSArgs),
    /// Generate a surface point cloud file.
    Gen(GenArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum GeometryKind {
    Sphere,
    Spheroid,
    RoughSphere,
    File,
}

impl GeometryKind {
    fn name(self) -> &'static str {
        match self {
            GeometryKind::Sphere => "sphere",
            GeometryKind::Spheroid => "spheroid",
            GeometryKind::RoughSphere => "rough-sphere",
            GeometryKind::File => "file",
        }
    }
}

#[derive(Args)]
struct GeometryArgs {
    /// Surface to generate, or `file` to read `--input`.
    #[arg(long, value_enum, default_value_t = GeometryKind::Sphere)]
    geometry: GeometryKind,

    /// Points per cube-face edge; generated clouds have 6 n^2 points.
    #[arg(long, default_value_t = 16)]
    n: usize,

    /// Base radius of the generated surface.
    #[arg(long, default_value_t = 1.0)]
    a: f64,

    /// Spheroid semi-axis scale along x.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,

    /// Spheroid semi-axis scale along y.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,

    /// Spheroid semi-axis scale along z.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,

    /// Cloud file to load when `--geometry file`.
    #[arg(long, required_if_eq("geometry", "file"))]
    input: Option<PathBuf>,
}

impl GeometryArgs {
    fn build(&self, coeffs: CoeffKind, seed: u64) -> Result<PointCloud, Box<dyn Error>> {
        let mut cloud = match self.geometry {
            GeometryKind::Sphere => ifgf::gen_sphere(self.a, self.n)?,
            GeometryKind::Spheroid => {
                ifgf::gen_spheroid(self.a, self.alpha, self.beta, self.gamma, self.n)?
            }
            GeometryKind::RoughSphere => ifgf::gen_rough_sphere(self.a, self.n)?,
            GeometryKind::File => {
                let path = self.input.as_ref().expect("clap enforces --input");
                ifgf::load_cloud(path)?
            }
        };
        if coeffs == CoeffKind::Random {
            cloud.randomize_coefficients(seed);
        }
        Ok(cloud)
    }

    /// Points along the generated surface's equator, which carries 4 n of
    /// the 6 n^2 cloud points. Unknown for file-loaded clouds.
    fn equator_points(&self) -> Option<usize> {
        match self.geometry {
            GeometryKind::File => None,
            _ => Some(4 * self.n),
        }
    }
}

#[derive(Args)]
struct WavenumberArgs {
    /// Acoustic size `kappa * a`; accepts plain numbers or multiples of pi
    /// such as `4pi`.
    #[arg(long, value_parser = parse_pi, default_value = "pi", conflicts_with = "kappa0")]
    ka: f64,

    /// Use the Laplace kernel (kappa = 0).
    #[arg(long)]
    kappa0: bool,
}

impl WavenumberArgs {
    fn kappa(&self, a: f64) -> f64 {
        if self.kappa0 {
            0.0
        } else {
            self.ka / a
        }
    }

    fn ka(&self) -> f64 {
        if self.kappa0 {
            0.0
        } else {
            self.ka
        }
    }
}

#[derive(Args)]
struct OperatorArgs {
    /// Radial interpolation order per cone segment.
    #[arg(long, default_value_t = 3)]
    ps: usize,

    /// Angular interpolation order per cone segment.
    #[arg(long, default_value_t = 5)]
    pang: usize,

    /// Radial cone segments per leaf box.
    #[arg(long, default_value_t = 1)]
    leaf_ns: u32,

    /// Polar cone segments per leaf box; the azimuthal count is twice this.
    #[arg(long, default_value_t = 2)]
    leaf_nc: u32,

    /// Fixed tree depth, overriding the wavenumber-based choice.
    #[arg(long)]
    depth: Option<u8>,

    /// Worker threads for evaluation; 0 runs the sequential reference path.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl OperatorArgs {
    fn eval_params(&self) -> Result<EvalParams, Box<dyn Error>> {
        Ok(EvalParams {
            p_s: self.ps,
            p_ang: self.pang,
            leaf_grid: ConeGrid::new(self.leaf_ns, self.leaf_nc)?,
            depth_override: self.depth,
            ..EvalParams::default()
        })
    }

    /// Runs `evaluate` in the requested execution mode, inside a dedicated
    /// thread pool when a thread count is given.
    fn evaluate(
        &self,
        plan: &EvaluationPlan,
        coefficients: &[ifgf::Complex],
    ) -> Result<Vec<ifgf::Complex>, Box<dyn Error>> {
        if self.threads == 0 {
            return Ok(ifgf::evaluate_with_mode(plan, coefficients, EvalMode::Reference)?);
        }
        #[cfg(feature = "parallel")]
        {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(self.threads).build()?;
            let out: Result<_, EvalError> =
                pool.install(|| ifgf::evaluate_with_mode(plan, coefficients, EvalMode::Parallel));
            Ok(out?)
        }
        #[cfg(not(feature = "parallel"))]
        Err("this binary was built without the `parallel` feature; use --threads 0".into())
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CoeffKind {
    /// Every source strength is 1 + 0i.
    Ones,
    /// Seeded complex standard normal strengths.
    Random,
}

impl CoeffKind {
    fn name(self) -> &'static str {
        match self {
            CoeffKind::Ones => "ones",
            CoeffKind::Random => "random",
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Append result records to this file.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Record format for `--out`.
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    wavenumber: WavenumberArgs,
    #[command(flatten)]
    operator: OperatorArgs,

    /// Source coefficients.
    #[arg(long, value_enum, default_value_t = CoeffKind::Ones)]
    coeffs: CoeffKind,

    /// Seed for the error subset and random coefficients.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Error-subset size; clamped to the cloud size.
    #[arg(long, default_value_t = 1000)]
    subset: usize,

    /// Print the resolved configuration and exit.
    #[arg(long)]
    dry_run: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    geometry: GeometryArgs,
    #[command(flatten)]
    wavenumber: WavenumberArgs,
    #[command(flatten)]
    operator: OperatorArgs,

    /// Source coefficients.
    #[arg(long, value_enum, default_value_t = CoeffKind::Ones)]
    coeffs: CoeffKind,

    /// Seed for random coefficients.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Largest cloud the quadratic-cost check will accept.
    #[arg(long, default_value_t = 8192)]
    cap: usize,

    /// Relative error above which verification fails.
    #[arg(long, default_value_t = 1e-3)]
    threshold: f64,

    /// Corrupt the accelerated result before comparing (negative control).
    #[arg(long, hide = true)]
    corrupt: bool,
}

#[derive(Args)]
struct DiagFactorizationArgs {
    /// Comma-separated acoustic box sizes `kappa * H` to test.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,1,10,100")]
    kappa_h: Vec<f64>,

    /// Seed for source and evaluation point draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct DiagRVsSArgs {
    /// Wavenumber for the unit source box; accepts multiples of pi.
    #[arg(long, value_parser = parse_pi, default_value = "2pi")]
    kappa: f64,

    /// Reciprocal-variable width of every interpolation cell.
    #[arg(long, default_value_t = ifgf::kernel::ETA / 4.0)]
    delta_s: f64,

    /// Number of sweep positions.
    #[arg(long, default_value_t = 12)]
    points: usize,

    /// Seed for source and evaluation point draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    geometry: GeometryArgs,

    /// Source coefficients stored in the file.
    #[arg(long, value_enum, default_value_t = CoeffKind::Ones)]
    coeffs: CoeffKind,

    /// Seed for random coefficients.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Destination path.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `4pi`, `0.5pi`, `pi`, or a plain number.
fn parse_pi(text: &str) -> Result<f64, String> {
    let trimmed = text.trim();
    let parse = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    if let Some(head) = trimmed.strip_suffix("pi") {
        let factor = match head.trim_end() {
            "" => 1.0,
            "-" => -1.0,
            other => parse(other)?,
        };
        Ok(factor * std::f64::consts::PI)
    } else {
        parse(trimmed)
    }
}

/// Resolved configuration embedded in every result record.
#[derive(Serialize)]
struct ResolvedConfig {
    geometry: &'static str,
    n: usize,
    a: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    input: Option<String>,
    kappa: f64,
    ka: f64,
    ps: usize,
    pang: usize,
    leaf_ns: u32,
    leaf_nc: u32,
    depth_override: Option<u8>,
    coeffs: &'static str,
    seed: u64,
    subset: usize,
    threads: usize,
}

impl ResolvedConfig {
    fn new(
        geometry: &GeometryArgs,
        wavenumber: &WavenumberArgs,
        operator: &OperatorArgs,
        coeffs: CoeffKind,
        seed: u64,
        subset: usize,
    ) -> ResolvedConfig {
        ResolvedConfig {
            geometry: geometry.geometry.name(),
            n: geometry.n,
            a: geometry.a,
            alpha: geometry.alpha,
            beta: geometry.beta,
            gamma: geometry.gamma,
            input: geometry.input.as_ref().map(|p| p.display().to_string()),
            kappa: wavenumber.kappa(geometry.a),
            ka: wavenumber.ka(),
            ps: operator.ps,
            pang: operator.pang,
            leaf_ns: operator.leaf_ns,
            leaf_nc: operator.leaf_nc,
            depth_override: operator.depth,
            coeffs: coeffs.name(),
            seed,
            subset,
            threads: operator.threads,
        }
    }
}

#[derive(Serialize)]
struct LevelRecord {
    level: u8,
    side: f64,
    boxes: usize,
    segments: usize,
}

#[derive(Serialize)]
struct BenchRecord {
    schema_version: u32,
    command: &'static str,
    #[serde(flatten)]
    config: ResolvedConfig,
    n_points: usize,
    ppw: Option<f64>,
    depth: u8,
    m: usize,
    eps_m: f64,
    t_pre_s: f64,
    t_acc_s: f64,
    peak_mem_bytes: Option<u64>,
    levels: Vec<LevelRecord>,
}

/// Fixed CSV column order for `bench` records; `levels` is jsonl-only.
const BENCH_CSV_HEADER: &str = "schema_version,command,geometry,n,a,alpha,beta,gamma,input,\
     kappa,ka,ps,pang,leaf_ns,leaf_nc,depth_override,coeffs,seed,subset,threads,\
     n_points,ppw,depth,m,eps_m,t_pre_s,t_acc_s,peak_mem_bytes";

impl BenchRecord {
    fn csv_row(&self) -> String {
        let c = &self.config;
        let cells = [
            self.schema_version.to_string(),
            self.command.to_string(),
            c.geometry.to_string(),
            c.n.to_string(),
            c.a.to_string(),
            c.alpha.to_string(),
            c.beta.to_string(),
            c.gamma.to_string(),
            c.input.clone().unwrap_or_default(),
            c.kappa.to_string(),
            c.ka.to_string(),
            c.ps.to_string(),
            c.pang.to_string(),
            c.leaf_ns.to_string(),
            c.leaf_nc.to_string(),
            c.depth_override.map(|d| d.to_string()).unwrap_or_default(),
            c.coeffs.to_string(),
            c.seed.to_string(),
            c.subset.to_string(),
            c.threads.to_string(),
            self.n_points.to_string(),
            self.ppw.map(|p| format!("{p:.4}")).unwrap_or_default(),
            self.depth.to_string(),
            self.m.to_string(),
            format!("{:.6e}", self.eps_m),
            format!("{:.6e}", self.t_pre_s),
            format!("{:.6e}", self.t_acc_s),
            self.peak_mem_bytes.map(|b| b.to_string()).unwrap_or_default(),
        ];
        join_csv(&cells)
    }
}

#[derive(Serialize)]
struct FactorizationRecord {
    schema_version: u32,
    command: &'static str,
    kappa_h: f64,
    strategy: &'static str,
    max_rel_error: f64,
    radial_cell_truncated: bool,
    seed: u64,
}

/// Fixed CSV column order for `diag-factorization` records.
const FACTORIZATION_CSV_HEADER: &str =
    "schema_version,command,kappa_h,strategy,max_rel_error,radial_cell_truncated,seed";

impl FactorizationRecord {
    fn csv_row(&self) -> String {
        join_csv(&[
            self.schema_version.to_string(),
            self.command.to_string(),
            self.kappa_h.to_string(),
            self.strategy.to_string(),
            format!("{:.6e}", self.max_rel_error),
            self.radial_cell_truncated.to_string(),
            self.seed.to_string(),
        ])
    }
}

#[derive(Serialize)]
struct RadialRecord {
    schema_version: u32,
    command: &'static str,
    kappa: f64,
    delta_s: f64,
    r0: f64,
    delta_r: f64,
    err_r: f64,
    err_s: f64,
    seed: u64,
}

/// Fixed CSV column order for `diag-r-vs-s` records.
const RADIAL_CSV_HEADER: &str =
    "schema_version,command,kappa,delta_s,r0,delta_r,err_r,err_s,seed";

impl RadialRecord {
    fn csv_row(&self) -> String {
        join_csv(&[
            self.schema_version.to_string(),
            self.command.to_string(),
            self.kappa.to_string(),
            self.delta_s.to_string(),
            format!("{:.6e}", self.r0),
            format!("{:.6e}", self.delta_r),
            format!("{:.6e}", self.err_r),
            format!("{:.6e}", self.err_s),
            self.seed.to_string(),
        ])
    }
}

fn join_csv(cells: &[String]) -> String {
    let quoted: Vec<String> = cells
        .iter()
        .map(|cell| {
            if cell.contains([',', '"', '\n']) {
                format!("\"{}\"", cell.replace('"', "\"\""))
            } else {
                cell.clone()
            }
        })
        .collect();
    quoted.join(",")
}

/// Appends records to `path`, writing the CSV header only when the file is
/// new or empty.
fn append_records(
    output: &OutputArgs,
    header: &str,
    csv_rows: &[String],
    json_rows: &[String],
) -> Result<(), Box<dyn Error>> {
    let Some(path) = &output.out else {
        return Ok(());
    };
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut text = String::new();
    match output.format {
        Format::Jsonl => {
            for row in json_rows {
                text.push_str(row);
                text.push('\n');
            }
        }
        Format::Csv => {
            if file.metadata()?.len() == 0 {
                text.push_str(header);
                text.push('\n');
            }
            for row in csv_rows {
                text.push_str(row);
                text.push('\n');
            }
        }
    }
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Process peak resident set size, read from the OS where available.
fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

fn cmd_bench(args: &BenchArgs) -> Result<ExitCode, Box<dyn Error>> {
    let config = ResolvedConfig::new(
        &args.geometry,
        &args.wavenumber,
        &args.operator,
        args.coeffs,
        args.seed,
        args.subset,
    );
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&config)?);
        return Ok(ExitCode::SUCCESS);
    }

    let cloud = args.geometry.build(args.coeffs, args.seed)?;
    let kappa = args.wavenumber.kappa(args.geometry.a);
    let params = args.operator.eval_params()?;

    let start = Instant::now();
    let plan = ifgf::precompute(&cloud, kappa, params)?;
    let t_pre_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let accelerated = args.operator.evaluate(&plan, cloud.coefficients())?;
    let t_acc_s = start.elapsed().as_secs_f64();
    let peak_mem_bytes = peak_rss_bytes();

    let m = args.subset.min(cloud.len());
    let subset = ifgf::random_subset(cloud.len(), m, args.seed);
    let exact = ifgf::direct_oracle(&cloud, kappa, &subset);
    let at_subset: Vec<ifgf::Complex> = subset.iter().map(|&i| accelerated[i]).collect();
    let eps_m = ifgf::relative_error(&at_subset, &exact)?;

    let ppw = args
        .geometry
        .equator_points()
        .map(|n_eq| points_per_wavelength(n_eq, kappa, args.geometry.a))
        .filter(|p| p.is_finite());

    let record = BenchRecord {
        schema_version: SCHEMA_VERSION,
        command: "bench",
        config,
        n_points: cloud.len(),
        ppw,
        depth: plan.depth(),
        m,
        eps_m,
        t_pre_s,
        t_acc_s,
        peak_mem_bytes,
        levels: plan
            .level_stats()
            .into_iter()
            .map(|s| LevelRecord {
                level: s.level,
                side: s.side,
                boxes: s.boxes,
                segments: s.segments,
            })
            .collect(),
    };

    println!(
        "geometry      {} (n = {}, {} points)",
        record.config.geometry, record.config.n, record.n_points
    );
    match record.ppw {
        Some(ppw) => println!(
            "wavenumber    kappa = {:.4} ({:.1} points per wavelength)",
            kappa, ppw
        ),
        None => println!("wavenumber    kappa = {kappa:.4}"),
    }
    println!(
        "interpolation orders ({}, {}), leaf cone grid ({}, {})",
        record.config.ps, record.config.pang, record.config.leaf_ns, record.config.leaf_nc
    );
    for level in &record.levels {
        println!(
            "level {:>2}      side {:.4}, {} boxes, {} cone segments",
            level.level, level.side, level.boxes, level.segments
        );
    }
    println!("error         eps_{} = {:.3e}", record.m, record.eps_m);
    println!(
        "timings       precompute {:.3} s, apply {:.3} s ({})",
        record.t_pre_s,
        record.t_acc_s,
        if record.config.threads == 0 {
            "sequential".to_string()
        } else {
            format!("{} threads", record.config.threads)
        }
    );
    if let Some(bytes) = record.peak_mem_bytes {
        println!("peak memory   {:.0} MiB", bytes as f64 / (1024.0 * 1024.0));
    }

    append_records(
        &args.output,
        BENCH_CSV_HEADER,
        &[record.csv_row()],
        &[serde_json::to_string(&record)?],
    )?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: &VerifyArgs) -> Result<ExitCode, Box<dyn Error>> {
    let cloud = args.geometry.build(args.coeffs, args.seed)?;
    if cloud.len() > args.cap {
        return Err(format!(
            "cloud has {} points but the full direct check is capped at {}; \
             raise --cap or shrink the cloud",
            cloud.len(),
            args.cap
        )
        .into());
    }
    let kappa = args.wavenumber.kappa(args.geometry.a);
    let params = args.operator.eval_params()?;
    let plan = ifgf::precompute(&cloud, kappa, params)?;
    let mut accelerated = args.operator.evaluate(&plan, cloud.coefficients())?;
    if args.corrupt {
        for value in &mut accelerated {
            *value *= 1.01;
        }
    }
    let all: Vec<usize> = (0..cloud.len()).collect();
    let exact = ifgf::direct_oracle(&cloud, kappa, &all);
    let eps = ifgf::relative_error(&accelerated, &exact)?;
    let pass = eps <= args.threshold;
    println!(
        "verify {}: eps_{} = {:.3e} (threshold {:.1e}, {} points)",
        if pass { "PASS" } else { "FAIL" },
        cloud.len(),
        eps,
        args.threshold,
        cloud.len()
    );
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_diag_factorization(args: &DiagFactorizationArgs) -> Result<ExitCode, Box<dyn Error>> {
    let rows = ifgf::diag::factorization_experiment(&args.kappa_h, args.seed);
    println!("kappa_h   no-factorization  exponential-only  full-in-r   full-in-s");
    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for row in &rows {
        println!(
            "{:<9} {:<17.3e} {:<17.3e} {:<11.3e} {:<11.3e}{}",
            row.kappa_h,
            row.err_r_none,
            row.err_r_exp,
            row.err_r_full,
            row.err_s_full,
            if row.radial_cell_truncated {
                "  (radial cell truncated)"
            } else {
                ""
            }
        );
        let strategies = [
            ("no-factorization", row.err_r_none),
            ("exponential-only", row.err_r_exp),
            ("full-in-r", row.err_r_full),
            ("full-in-s", row.err_s_full),
        ];
        for (strategy, max_rel_error) in strategies {
            let record = FactorizationRecord {
                schema_version: SCHEMA_VERSION,
                command: "diag-factorization",
                kappa_h: row.kappa_h,
                strategy,
                max_rel_error,
                radial_cell_truncated: row.radial_cell_truncated,
                seed: args.seed,
            };
            csv_rows.push(record.csv_row());
            json_rows.push(serde_json::to_string(&record)?);
        }
    }
    append_records(&args.output, FACTORIZATION_CSV_HEADER, &csv_rows, &json_rows)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_diag_r_vs_s(args: &DiagRVsSArgs) -> Result<ExitCode, Box<dyn Error>> {
    let rows =
        ifgf::diag::radial_vs_s_experiment(args.kappa, args.delta_s, args.points, args.seed);
    println!("r0          delta_r     err_r       err_s");
    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for row in &rows {
        println!(
            "{:<11.4e} {:<11.4e} {:<11.3e} {:<11.3e}",
            row.r0, row.delta_r, row.err_r, row.err_s
        );
        let record = RadialRecord {
            schema_version: SCHEMA_VERSION,
            command: "diag-r-vs-s",
            kappa: args.kappa,
            delta_s: args.delta_s,
            r0: row.r0,
            delta_r: row.delta_r,
            err_r: row.err_r,
            err_s: row.err_s,
            seed: args.seed,
        };
        csv_rows.push(record.csv_row());
        json_rows.push(serde_json::to_string(&record)?);
    }
    append_records(&args.output, RADIAL_CSV_HEADER, &csv_rows, &json_rows)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(args: &GenArgs) -> Result<ExitCode, Box<dyn Error>> {
    let cloud = args.geometry.build(args.coeffs, args.seed)?;
    ifgf::save_cloud(&cloud, Path::new(&args.out))?;
    println!("wrote {} points to {}", cloud.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
        Command::DiagFactorization(args) => cmd_diag_factorization(args),
        Command::DiagRVsS(args) => cmd_diag_r_vs_s(args),
        Command::Gen(args) => cmd_gen(args),
    };
    match result {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(2)
        }
    }
}
