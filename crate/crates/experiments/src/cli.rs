//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use specgeo_core::cluster::{kmeans_run, misclustering, ocs_search};
use specgeo_core::embedding::{embed, embed_nd};
use specgeo_core::numerics::{derive_seed, Rng};
use specgeo_core::Kernel;

use crate::artifact::Artifact;
use crate::config::{MethodSpec, MixtureSpec, RunConfig};
use crate::error::{ExpError, Result};
use crate::figures::{self, streams};
use crate::output::{provenance_header, ParsedCsv, Table, Value};
use crate::report;

const DEFAULT_OUT: &str = "specgeo-out";

#[derive(Debug, Parser)]
#[command(name = "specgeo", version, about = "Spectral clustering geometry experiments")]
pub struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for independent sweep points.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub grid_nodes: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Difficulty parameters of one preset mixture as a one-row CSV.
    Params(ParamsArgs),
    /// Normalized Laplacian embedding of a points CSV.
    Embed(EmbedArgs),
    /// Spherical K-means on an embedding CSV.
    Cluster(ClusterArgs),
    /// Subspace distance and its bound over the Gaussian-pair offsets.
    RhoSweep,
    /// Tail-decay curves for the standard Gaussian.
    TailDecay,
    /// One figure experiment.
    Figure {
        #[arg(value_enum)]
        name: FigureName,
    },
    /// Every experiment plus a manifest of file digests.
    ReportAll,
    /// Lemma, theorem, Cheeger and recovery-rate suites.
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    TriangularDensity,
    Similarity,
    Coupling,
    RhoLinearity,
    TailDecay,
    EmbeddingOcs,
    Params,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PresetName {
    GaussianPair,
    TriangularPair,
    TriangularBad,
    UniformLinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodName {
    Closed,
    Quadrature,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelName {
    Gaussian,
    Box,
}

#[derive(Debug, clap::Args)]
pub struct ParamsArgs {
    #[arg(long, value_enum)]
    pub preset: Option<PresetName>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Constant added to the kernel.
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
}

#[derive(Debug, clap::Args)]
pub struct EmbedArgs {
    /// CSV with columns x[,y][,label]; labels are 1-based.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = KernelName::Gaussian)]
    pub kernel: KernelName,
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.0)]
    pub offset: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ClusterArgs {
    /// CSV with columns phi_1..phi_K[,label].
    #[arg(long)]
    pub input: PathBuf,
    /// Cone half-angle for the OCS certificate.
    #[arg(long, default_value_t = std::f64::consts::PI / 8.0)]
    pub theta: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses arguments, runs the command and maps the outcome to an exit code:
/// 0 success, 1 failed assertion, 2 bad configuration or input.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.grid_nodes {
        cfg.grid_nodes = n;
    }
    if let Some(o) = &cli.out {
        cfg.output_dir = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Returns whether every assertion passed.
pub fn run(cli: &Cli) -> Result<bool> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| ExpError::Config(e.to_string()))?;
    }
    let mut cfg = load_config(cli)?;
    match &cli.command {
        Command::Params(args) => {
            apply_params_args(&mut cfg, args)?;
            let a = figures::params_table(&cfg)?;
            print!("{}", a.tables[0].render(&provenance_header("params", &cfg.hash(), cfg.seed))?);
            emit(&cfg, vec![a])
        }
        Command::Embed(args) => embed_command(&cfg, args).map(|_| true),
        Command::Cluster(args) => cluster_command(&cfg, args).map(|_| true),
        Command::RhoSweep => {
            let points = figures::rho_sweep_points(&cfg)?;
            let mut a = Artifact::new("rho_sweep");
            a.tables.push(figures::rho_sweep_table(&points));
            a.checks.push(figures::theorem1_check_summary(&points));
            emit(&cfg, vec![a])
        }
        Command::TailDecay => emit(&cfg, vec![figures::tail_decay(&cfg)?]),
        Command::Figure { name } => emit(&cfg, vec![figure(&cfg, *name)?]),
        Command::ReportAll => {
            let dir = out_dir(&cfg);
            let start = Instant::now();
            let m = report::report_all(&cfg, &dir)?;
            for c in &m.checks {
                print_check(&c.experiment, &c.name, c.passed, &c.detail);
            }
            eprintln!(
                "wrote {} files to {} in {:.1} s",
                m.files.len() + 1,
                dir.display(),
                start.elapsed().as_secs_f64()
            );
            Ok(m.passed)
        }
        Command::Check => emit(&cfg, report::check_suite(&cfg)?),
    }
}

pub fn figure(cfg: &RunConfig, name: FigureName) -> Result<Artifact> {
    match name {
        FigureName::TriangularDensity => figures::triangular_density(cfg),
        FigureName::Similarity => figures::similarity(cfg),
        FigureName::Coupling => figures::coupling_figure(cfg),
        FigureName::RhoLinearity => {
            let points = figures::rho_sweep_points(cfg)?;
            Ok(figures::rho_linearity(cfg, &points))
        }
        FigureName::TailDecay => figures::tail_decay(cfg),
        FigureName::EmbeddingOcs => figures::embedding_ocs(cfg),
        FigureName::Params => figures::params_table(cfg),
    }
}

fn print_check(experiment: &str, name: &str, passed: bool, detail: &str) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!("{status} {experiment}/{name}: {detail}");
}

/// Writes the artifacts and prints one line per check.
fn emit(cfg: &RunConfig, artifacts: Vec<Artifact>) -> Result<bool> {
    let dir = out_dir(cfg);
    let mut passed = true;
    for a in &artifacts {
        for f in a.write(&dir, cfg)? {
            eprintln!("wrote {}", dir.join(&f.path).display());
        }
        for c in &a.checks {
            print_check(&a.experiment, &c.name, c.passed, &c.detail);
        }
        passed &= a.passed();
    }
    Ok(passed)
}

fn apply_params_args(cfg: &mut RunConfig, a: &ParamsArgs) -> Result<()> {
    let p = &mut cfg.params;
    if let Some(preset) = a.preset {
        let (mu, nu) = match p.mixture {
            MixtureSpec::GaussianPair { mu, nu } | MixtureSpec::TriangularPair { mu, nu } | MixtureSpec::TriangularBad { mu, nu } => {
                (mu, nu)
            }
            MixtureSpec::UniformLinear { .. } => (6.0, 2.0),
        };
        p.mixture = match preset {
            PresetName::GaussianPair => MixtureSpec::GaussianPair { mu, nu },
            PresetName::TriangularPair => MixtureSpec::TriangularPair { mu: 3.0, nu: 0.05 },
            PresetName::TriangularBad => MixtureSpec::TriangularBad { mu: 3.0, nu: 0.05 },
            PresetName::UniformLinear => MixtureSpec::UniformLinear { delta: 0.5 },
        };
    }
    match &mut p.mixture {
        MixtureSpec::GaussianPair { mu, nu } | MixtureSpec::TriangularPair { mu, nu } | MixtureSpec::TriangularBad { mu, nu } => {
            *mu = a.mu.unwrap_or(*mu);
            *nu = a.nu.unwrap_or(*nu);
        }
        MixtureSpec::UniformLinear { delta } => *delta = a.delta.unwrap_or(*delta),
    }
    if let Some(o) = a.offset {
        p.offset = o;
    }
    if let Some(m) = a.method {
        p.method = match m {
            MethodName::Closed => MethodSpec::Closed,
            MethodName::Quadrature => MethodSpec::Quadrature,
            MethodName::MonteCarlo => MethodSpec::MonteCarlo { samples: a.samples },
        };
    }
    cfg.validate()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn embed_command(cfg: &RunConfig, a: &EmbedArgs) -> Result<()> {
    let csv = ParsedCsv::read(&a.input)?;
    let x = csv
        .f64_column("x")?
        .ok_or_else(|| ExpError::Input("input needs an x column".into()))?;
    let y = csv.f64_column("y")?;
    let labels = csv.label_column("label")?;
    let base = match a.kernel {
        KernelName::Gaussian => Kernel::gaussian(a.nu)?,
        KernelName::Box => Kernel::uniform_box(a.nu)?,
    };
    let kernel = if a.offset > 0.0 { base.regularized(a.offset)? } else { base };
    let e = match &y {
        Some(y) => {
            let pts: Vec<Vec<f64>> = x.iter().zip(y).map(|(&u, &v)| vec![u, v]).collect();
            embed_nd(&pts, &kernel, a.k)?
        }
        None => embed(&x, &kernel, a.k)?,
    };
    let names: Vec<String> = (1..=a.k).map(|j| format!("phi_{j}")).chain(["label".to_string()]).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut t = Table::new("embedding.csv", &refs);
    t.notes.push(format!(
        "eigenvalues={}",
        e.eigenvalues.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(";")
    ));
    if let Some((lk, lk1)) = e.gap_warning {
        t.notes.push(format!("warning=eigengap lambda_K={lk:?} lambda_K+1={lk1:?}"));
        eprintln!("warning: eigengap collapse between {lk:?} and {lk1:?}");
    }
    for (i, p) in e.points.iter().enumerate() {
        let mut row: Vec<Value> = p.iter().map(|&v| Value::F(v)).collect();
        row.push(match &labels {
            Some(l) => (l[i] + 1).into(),
            None => "".into(),
        });
        t.push(row);
    }
    write_output(a.output.as_deref(), &t.render(&provenance_header("embed", &cfg.hash(), cfg.seed))?)
}

pub fn cluster_command(cfg: &RunConfig, a: &ClusterArgs) -> Result<()> {
    let csv = ParsedCsv::read(&a.input)?;
    let mut cols = Vec::new();
    while let Some(c) = csv.f64_column(&format!("phi_{}", cols.len() + 1))? {
        cols.push(c);
    }
    if cols.is_empty() {
        return Err(ExpError::Input("input needs columns phi_1..phi_K".into()));
    }
    let k = cols.len();
    let n = cols[0].len();
    let points: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let labels = if csv.index("label").is_some() && csv.rows.iter().all(|r| !r[csv.index("label").unwrap_or(0)].is_empty()) {
        csv.label_column("label")?
    } else {
        None
    };
    let mut rng = Rng::new(derive_seed(cfg.seed, streams::CLUSTER));
    let run = kmeans_run(&points, k, &mut rng, a.max_iter);
    let mut assignment = vec![None; n];
    for (&i, &z) in run.kept.iter().zip(&run.assignments) {
        assignment[i] = Some(z);
    }
    for &i in &run.dropped {
        eprintln!("warning: dropped zero vector at row {}", i + 1);
    }

    let mut t = Table::new("assignments.csv", &["index", "assignment", "label", "correct_after_matching"]);
    let summary = match &labels {
        Some(l) => {
            let kept_labels: Vec<usize> = run.kept.iter().map(|&i| l[i]).collect();
            let mis = misclustering(&run.assignments, &kept_labels)?;
            let matching = best_matching(&run.assignments, &kept_labels, k);
            for i in 0..n {
                let correct = assignment[i].map(|z| matching[z] == Some(l[i]));
                t.push(vec![
                    (i + 1).into(),
                    assignment[i].map_or(Value::S(String::new()), |z| (z + 1).into()),
                    (l[i] + 1).into(),
                    correct.map_or(Value::S(String::new()), Value::B),
                ]);
            }
            let alpha = if a.theta > 0.0 && a.theta < std::f64::consts::FRAC_PI_4 {
                match ocs_search(&points, l, a.theta) {
                    Ok(c) => format!("{:?}", c.alpha),
                    Err(e) => format!("unavailable ({e})"),
                }
            } else {
                "unavailable (theta outside (0, pi/4))".into()
            };
            format!("alpha={alpha} theta={:?} misclustering={mis:?}", a.theta)
        }
        None => {
            for (i, z) in assignment.iter().enumerate() {
                t.push(vec![
                    (i + 1).into(),
                    z.map_or(Value::S(String::new()), |z| (z + 1).into()),
                    "".into(),
                    "".into(),
                ]);
            }
            format!("alpha=unavailable theta={:?} misclustering=unavailable", a.theta)
        }
    };
    t.footer.push(summary.clone());
    eprintln!("{summary}");
    write_output(a.output.as_deref(), &t.render(&provenance_header("cluster", &cfg.hash(), cfg.seed))?)
}

/// Label assigned to each cluster by the permutation with most agreements.
fn best_matching(assignments: &[usize], labels: &[usize], k: usize) -> Vec<Option<usize>> {
    let kk = k.max(labels.iter().copied().max().map_or(0, |m| m + 1));
    let mut counts = vec![vec![0usize; kk]; kk];
    for (&z, &l) in assignments.iter().zip(labels) {
        counts[z][l] += 1;
    }
    let mut best = (0usize, Vec::new());
    if kk <= 8 {
        for perm in itertools::Itertools::permutations(0..kk, kk) {
            let s: usize = perm.iter().enumerate().map(|(z, &l)| counts[z][l]).sum();
            if best.1.is_empty() || s > best.0 {
                best = (s, perm);
            }
        }
    } else {
        let mut used = vec![false; kk];
        let mut perm = vec![0; kk];
        for (z, slot) in perm.iter_mut().enumerate() {
            let l = (0..kk).filter(|&l| !used[l]).max_by_key(|&l| (counts[z][l], std::cmp::Reverse(l))).unwrap_or(0);
            used[l] = true;
            *slot = l;
        }
        best.1 = perm;
    }
    best.1.into_iter().map(Some).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn matching_recovers_a_swap() {
        let m = best_matching(&[1, 1, 0, 0], &[0, 0, 1, 1], 2);
        assert_eq!(m, vec![Some(1), Some(0)]);
    }

    #[test]
    fn params_overrides_apply() {
        let mut cfg = RunConfig::default();
        let args = ParamsArgs {
            preset: Some(PresetName::TriangularPair),
            mu: Some(2.5),
            nu: None,
            delta: None,
            offset: None,
            method: Some(MethodName::Quadrature),
            samples: 10,
        };
        apply_params_args(&mut cfg, &args).unwrap();
        assert_eq!(cfg.params.mixture, MixtureSpec::TriangularPair { mu: 2.5, nu: 0.05 });
        assert_eq!(cfg.params.method, MethodSpec::Quadrature);
    }
}
