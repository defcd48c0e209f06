//! Figure experiments. Each returns an [`Artifact`] holding CSV tables, SVG
//! plots and the assertions evaluated on the computed values.

use rayon::prelude::*;
use specgeo_core::cluster::{kmeans_run, misclustering, ocs_search, theta_orthogonal_fraction, OcsCertificate};
use specgeo_core::density::{triangular_box_q_sq, working_grid, KernelizedDensity};
use specgeo_core::embedding::{embed, embed_nd, EmbeddedDataset};
use specgeo_core::mixture::{gaussian_pair, triangular_pair};
use specgeo_core::numerics::{derive_seed, linear_fit, LinearFit, Rng};
use specgeo_core::params::{
    self, coupling, gaussian_pair_coupling_bound, gaussian_pair_s_max, s_max, triangular_pair_s_max,
    triangular_pair_s_max_published, Method, TailDecay,
};
use specgeo_core::popoperator::{diagnostics_for, lemma_checks, theorem1_check, DiscretizedOperator, LemmaReport, Theorem1Report};
use specgeo_core::{Component, Kernel, Mixture};

use crate::artifact::{Artifact, Check};
use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{Table, Value};
use crate::svg::{Plot, Series};

/// Seed stream indices, one per randomized experiment.
pub mod streams {
    pub const PARAMS: u64 = 1;
    pub const SIMILARITY: u64 = 2;
    pub const COUPLING: u64 = 3;
    pub const EMBEDDING_PAIR: u64 = 4;
    pub const EMBEDDING_BLOBS: u64 = 5;
    pub const PROPOSITION1: u64 = 6;
    pub const CLUSTER: u64 = 7;
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

fn fit_note(prefix: &str, fit: &LinearFit) -> String {
    format!(
        "{prefix}slope={:?} intercept={:?} r_squared={:?}",
        fit.slope, fit.intercept, fit.r_squared
    )
}

/// Relative error that treats two zeros as agreement.
fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// The one-row parameter table for the configured mixture.
pub fn params_table(cfg: &RunConfig) -> Result<Artifact> {
    let preset = cfg.params.mixture.preset()?;
    let kernel = if cfg.params.offset > 0.0 {
        preset.kernel.regularized(cfg.params.offset)?
    } else {
        preset.kernel
    };
    let grid = working_grid(&preset.mixture, cfg.grid_nodes)?;
    let method = cfg.params.method.method(derive_seed(cfg.seed, streams::PARAMS));
    let d = params::difficulty(&preset.mixture, &kernel, method, grid.nodes())?;
    let mut t = Table::new(
        "params.csv",
        &[
            "s_max",
            "coupling",
            "gamma",
            "w_min",
            "b_max",
            "phi",
            "s_max_provenance",
            "coupling_provenance",
            "gamma_provenance",
        ],
    );
    t.notes.push(format!("mixture={} kernel={}", preset.mixture.describe(), kernel.describe()));
    t.push(vec![
        d.s_max.value.into(),
        d.coupling.value.into(),
        d.gamma.value.into(),
        d.w_min.into(),
        d.b_max.into(),
        d.phi.into(),
        d.s_max.provenance.name().into(),
        d.coupling.provenance.name().into(),
        d.gamma.provenance.name().into(),
    ]);
    let mut a = Artifact::new("params");
    a.checks.push(Check::new(
        "phi_recomputable",
        (d.recompute_phi() - d.phi).abs() <= 1e-12 * d.phi.abs().max(1.0),
        format!("phi={:?}", d.phi),
    ));
    a.checks.push(Check::new(
        "ranges",
        (0.0..=1.0).contains(&d.s_max.value) && (0.0..=1.0).contains(&d.gamma.value) && d.coupling.value >= 0.0,
        format!("s_max={:?} gamma={:?} coupling={:?}", d.s_max.value, d.gamma.value, d.coupling.value),
    ));
    a.tables.push(t);
    Ok(a)
}

/// Kernelized triangular density under the box kernel, closed form against
/// quadrature.
pub fn triangular_density(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.triangular_density;
    let nu = c.nu;
    let q = KernelizedDensity::quadrature(&Kernel::uniform_box(nu)?, &Component::triangular(0.0)?)?;
    let xs = linspace(c.x_min, c.x_max, c.nodes);
    let mut t = Table::new("triangular_density.csv", &["x", "q1_sq_closed", "q1_sq_quadrature"]);
    let mut sup: f64 = 0.0;
    let mut outside_max: f64 = 0.0;
    let mut closed_pts = Vec::new();
    for &x in &xs {
        let closed = triangular_box_q_sq(x, nu);
        let quad = q.q_sq(x);
        sup = sup.max((closed - quad).abs());
        if x.abs() >= 1.0 + nu {
            outside_max = outside_max.max(closed.abs()).max(quad.abs());
        }
        closed_pts.push((x, closed));
        t.push(vec![x.into(), closed.into(), quad.into()]);
    }
    let peak = triangular_box_q_sq(0.0, nu);
    let mut a = Artifact::new("triangular_density");
    a.checks.push(Check::new(
        "closed_vs_quadrature_sup",
        sup <= 1e-6,
        format!("sup_abs_diff={sup:?} tolerance=1e-6 nodes={}", c.nodes),
    ));
    a.checks.push(Check::new(
        "peak_value",
        rel_err(peak, 1.0 - nu / 2.0) <= 1e-12,
        format!("q1_sq(0)={peak:?} expected={:?}", 1.0 - nu / 2.0),
    ));
    a.checks.push(Check::new(
        "zero_outside_support",
        outside_max <= 1e-15,
        format!("max_outside={outside_max:?}"),
    ));
    t.footer.push(format!("sup_abs_diff={sup:?}"));
    a.tables.push(t);
    a.plots.push((
        "triangular_density.svg".into(),
        Plot::new(&format!("Kernelized triangular density, nu = {nu}"), "x", "q1^2(x)")
            .with(Series::line("closed form", closed_pts)),
    ));
    Ok(a)
}

/// Similarity: Gaussian pair closed form against quadrature and Monte
/// Carlo; triangular pair published and edge-overlap expressions against
/// quadrature.
pub fn similarity(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.similarity;
    let root = derive_seed(cfg.seed, streams::SIMILARITY);
    let gauss_rows: Vec<[f64; 5]> = c
        .gaussian_mu
        .par_iter()
        .enumerate()
        .map(|(i, &mu)| -> Result<[f64; 5]> {
            let p = gaussian_pair(mu, c.gaussian_nu)?;
            let closed = gaussian_pair_s_max(mu, c.gaussian_nu);
            let quad = s_max(&p.mixture, &p.kernel, Method::Quadrature)?.value;
            let mc = s_max(
                &p.mixture,
                &p.kernel,
                Method::MonteCarlo {
                    n: c.mc_samples,
                    seed: derive_seed(root, i as u64),
                },
            )?;
            Ok([mu, closed, quad, mc.value, mc.std_error.unwrap_or(f64::NAN)])
        })
        .collect::<Result<_>>()?;
    let mut g = Table::new(
        "similarity_gaussian.csv",
        &["mu", "s_max_closed", "s_max_quadrature", "s_max_mc", "s_max_mc_se", "rel_err_quadrature", "mc_z"],
    );
    g.notes.push(format!("nu={:?} mc_samples={}", c.gaussian_nu, c.mc_samples));
    let (mut worst_rel, mut worst_z): (f64, f64) = (0.0, 0.0);
    for r in &gauss_rows {
        let rel = rel_err(r[2], r[1]);
        let z = (r[3] - r[1]).abs() / r[4];
        worst_rel = worst_rel.max(rel);
        worst_z = worst_z.max(z);
        g.push(vec![r[0].into(), r[1].into(), r[2].into(), r[3].into(), r[4].into(), rel.into(), z.into()]);
    }

    let mut tri = Table::new(
        "similarity_triangular.csv",
        &["nu", "mu", "s_max_quadrature", "s_max_published", "s_max_edge_overlap", "edge_overlap_valid", "rel_err_published"],
    );
    let mut worst_published: f64 = 0.0;
    let mut worst_corrected: f64 = 0.0;
    for &nu in &c.triangular_nu {
        for &mu in &c.triangular_mu {
            let p = triangular_pair(mu, nu)?;
            let quad = s_max(&p.mixture, &p.kernel, Method::Quadrature)?.value;
            let published = triangular_pair_s_max_published(mu, nu);
            let corrected = triangular_pair_s_max(mu, nu);
            let valid = mu >= 2.0 - nu;
            let rel = rel_err(published, quad);
            worst_published = worst_published.max(rel);
            if valid {
                worst_corrected = worst_corrected.max(rel_err(corrected, quad));
            }
            tri.push(vec![nu.into(), mu.into(), quad.into(), published.into(), corrected.into(), valid.into(), rel.into()]);
        }
    }

    let mut a = Artifact::new("similarity");
    a.checks.push(Check::new(
        "gaussian_closed_vs_quadrature",
        worst_rel <= 1e-3,
        format!("max_rel_err={worst_rel:?} tolerance=1e-3"),
    ));
    a.checks.push(Check::new(
        "gaussian_closed_vs_mc",
        worst_z <= 3.0,
        format!("max_abs_z={worst_z:?} allowance=3"),
    ));
    a.checks.push(Check::new(
        "triangular_published_vs_quadrature",
        worst_published <= 1e-3,
        format!("max_rel_err={worst_published:?} tolerance=1e-3"),
    ));
    a.checks.push(Check::new(
        "triangular_edge_overlap_vs_quadrature",
        worst_corrected <= 1e-3,
        format!("max_rel_err={worst_corrected:?} tolerance=1e-3 (mu >= 2 - nu)"),
    ));
    a.plots.push((
        "similarity_gaussian.svg".into(),
        Plot::new(&format!("S_max, Gaussian pair, nu = {}", c.gaussian_nu), "mu", "S_max")
            .with(Series::line("closed form", gauss_rows.iter().map(|r| (r[0], r[1])).collect()))
            .with(Series::markers("Monte Carlo", gauss_rows.iter().map(|r| (r[0], r[3])).collect())),
    ));
    a.tables.push(g);
    a.tables.push(tri);
    Ok(a)
}

/// Coupling of the Gaussian pair as a function of the offset.
pub fn coupling_figure(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.coupling;
    let root = derive_seed(cfg.seed, streams::COUPLING);
    let rows: Vec<[f64; 5]> = c
        .mu
        .par_iter()
        .enumerate()
        .map(|(i, &mu)| -> Result<[f64; 5]> {
            let p = gaussian_pair(mu, c.nu)?;
            let mc = coupling(
                &p.mixture,
                &p.kernel,
                Method::MonteCarlo {
                    n: c.mc_samples,
                    seed: derive_seed(root, i as u64),
                },
            )?;
            let quad = coupling(&p.mixture, &p.kernel, Method::Quadrature)?.value;
            let bound = gaussian_pair_coupling_bound(mu, c.nu);
            Ok([mu, mc.value, mc.std_error.unwrap_or(f64::NAN), bound, quad])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(
        "coupling.csv",
        &["mu", "coupling_mc", "coupling_se", "analytic_style_bound", "coupling_quadrature"],
    );
    t.notes.push(format!("nu={:?} mc_samples={}", c.nu, c.mc_samples));
    for r in &rows {
        t.push(r.iter().map(|&v| Value::F(v)).collect());
    }
    let decreasing = rows.windows(2).all(|w| w[1][1] < w[0][1]);
    let below = rows.iter().all(|r| r[1] <= r[3]);
    let agree = rows.iter().map(|r| (r[1] - r[4]).abs() / r[2]).fold(0.0, f64::max);
    let mut a = Artifact::new("coupling");
    a.checks.push(Check::new(
        "mc_decreasing_in_mu",
        decreasing,
        format!("values={:?}", rows.iter().map(|r| r[1]).collect::<Vec<_>>()),
    ));
    a.checks.push(Check::new("mc_below_bound", below, format!("points={}", rows.len())));
    a.checks.push(Check::new(
        "mc_vs_quadrature",
        agree <= 4.0,
        format!("max_abs_z={agree:?} allowance=4"),
    ));
    a.plots.push((
        "coupling.svg".into(),
        Plot {
            log_y: true,
            ..Plot::new(&format!("Coupling, Gaussian pair, nu = {}", c.nu), "mu", "C")
        }
        .with(Series::markers("Monte Carlo", rows.iter().map(|r| (r[0], r[1])).collect()))
        .with(Series::line("quadrature", rows.iter().map(|r| (r[0], r[4])).collect()))
        .with(Series::line("bound", rows.iter().map(|r| (r[0], r[3])).collect())),
    ));
    a.tables.push(t);
    Ok(a)
}

/// One point of the Gaussian-pair offset sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub mu: f64,
    pub theorem: Theorem1Report,
    pub lemma: LemmaReport,
}

pub fn rho_sweep_points(cfg: &RunConfig) -> Result<Vec<SweepPoint>> {
    let c = &cfg.rho;
    c.mu
        .par_iter()
        .map(|&mu| {
            let p = gaussian_pair(mu, c.nu)?;
            let op = DiscretizedOperator::on_default_grid(&p.mixture, &p.kernel, cfg.grid_nodes)?;
            let d = diagnostics_for(&op)?;
            let theorem = theorem1_check(&op, &d)?;
            let lemma = lemma_checks(&op, &d)?;
            Ok(SweepPoint { mu, theorem, lemma })
        })
        .collect()
}

/// The sweep table with the bound on ρ.
pub fn rho_sweep_table(points: &[SweepPoint]) -> Table {
    let mut t = Table::new(
        "rho_sweep.csv",
        &["mu", "s_max", "coupling", "gamma", "phi", "rho", "bound", "hypothesis_ok"],
    );
    for p in points {
        let d = &p.theorem.diagnostics;
        t.push(vec![
            p.mu.into(),
            d.s_max.value.into(),
            d.coupling.value.into(),
            d.gamma.value.into(),
            d.phi.into(),
            p.theorem.rho.into(),
            p.theorem.bound.into(),
            p.theorem.hypothesis_ok.into(),
        ]);
    }
    t
}

pub fn theorem1_check_summary(points: &[SweepPoint]) -> Check {
    let eligible: Vec<&SweepPoint> = points.iter().filter(|p| p.theorem.hypothesis_ok).collect();
    let violations = eligible.iter().filter(|p| p.theorem.rho > p.theorem.bound).count();
    Check::new(
        "theorem1_bound",
        violations == 0,
        format!(
            "hypothesis_points={} violations={violations} sweep_points={}",
            eligible.len(),
            points.len()
        ),
    )
}

/// ρ against `S_max + C` over the sweep, with a least-squares line.
pub fn rho_linearity(cfg: &RunConfig, points: &[SweepPoint]) -> Artifact {
    let xs: Vec<f64> = points.iter().map(|p| p.theorem.diagnostics.overlap()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.theorem.rho).collect();
    let fit = linear_fit(&xs, &ys);
    let mut t = Table::new("rho_linearity.csv", &["mu", "overlap", "rho"]);
    t.notes.push(format!("nu={:?} grid_nodes={}", cfg.rho.nu, cfg.grid_nodes));
    for ((p, x), y) in points.iter().zip(&xs).zip(&ys) {
        t.push(vec![p.mu.into(), (*x).into(), (*y).into()]);
    }
    t.footer.push(fit_note("", &fit));
    let mut a = Artifact::new("rho_linearity");
    a.checks.push(Check::new(
        "linear_fit_r_squared",
        fit.r_squared >= cfg.rho.min_r_squared,
        format!("r_squared={:?} threshold={:?}", fit.r_squared, cfg.rho.min_r_squared),
    ));
    a.checks.push(theorem1_check_summary(points));
    let line: Vec<(f64, f64)> = {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        vec![(lo, fit.intercept + fit.slope * lo), (hi, fit.intercept + fit.slope * hi)]
    };
    a.plots.push((
        "rho_linearity.svg".into(),
        Plot::new("Subspace distance against overlap", "S_max + C", "rho(Q, R)")
            .with(Series::markers("sweep", xs.iter().copied().zip(ys.iter().copied()).collect()))
            .with(Series::line("least squares", line)),
    ));
    a.tables.push(rho_sweep_table(points));
    a.tables.push(t);
    a
}

/// ψ(t) for the standard Gaussian under Gaussian kernels of several
/// bandwidths, with log-log fits. Scaling the kernel by `c` scales the level
/// function `q²/‖q‖` by `√c`, so the scaled curve is `ψ(t/√c)`.
pub fn tail_decay(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.tail;
    let ts = logspace(c.t_min, c.t_max, c.points);
    let root_scale = c.kernel_scale.sqrt();
    let single = Mixture::new(vec![Component::gaussian(0.0, 1.0)?], vec![1.0])?;
    let curves: Vec<(f64, Vec<f64>, Vec<f64>)> = c
        .bandwidths
        .par_iter()
        .map(|&nu| -> Result<(f64, Vec<f64>, Vec<f64>)> {
            let psi = TailDecay::quadrature(&single, &Kernel::gaussian(nu)?)?;
            let scaled = ts.iter().map(|&t| psi.eval(t / root_scale)).collect();
            let unit = ts.iter().map(|&t| psi.eval(t)).collect();
            Ok((nu, scaled, unit))
        })
        .collect::<Result<_>>()?;
    let loglog = |ys: &[f64]| {
        let lx: Vec<f64> = ts.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        linear_fit(&lx, &ly)
    };
    let mut t = Table::new("tail_decay.csv", &["nu", "t", "psi"]);
    t.notes.push(format!("kernel_scale={:?}", c.kernel_scale));
    let mut a = Artifact::new("tail_decay");
    let mut plot = Plot::new("Tail decay of the standard Gaussian", "t", "psi(t)").log_log();
    for (nu, psi, unit) in &curves {
        for (tv, pv) in ts.iter().zip(psi) {
            t.push(vec![(*nu).into(), (*tv).into(), (*pv).into()]);
        }
        let fit = loglog(psi);
        t.footer.push(fit_note(&format!("nu={nu:?} "), &fit));
        t.footer.push(fit_note(&format!("nu={nu:?} kernel_scale=1 "), &loglog(unit)));
        a.checks.push(Check::new(
            &format!("loglog_r_squared_nu_{nu}"),
            fit.r_squared >= c.min_r_squared,
            format!("r_squared={:?} slope={:?} threshold={:?}", fit.r_squared, fit.slope, c.min_r_squared),
        ));
        plot = plot.with(Series::line(&format!("nu = {nu}"), ts.iter().copied().zip(psi.iter().copied()).collect()));
    }
    a.tables.push(t);
    a.plots.push(("tail_decay.svg".into(), plot));
    Ok(a)
}

/// Embedding and OCS summary of one labeled dataset.
#[derive(Clone, Debug)]
pub struct OcsRun {
    pub embedded: EmbeddedDataset,
    pub labels: Vec<usize>,
    pub certificate: OcsCertificate,
    pub pair_fraction: f64,
    pub kmeans_misclustering: f64,
}

fn ocs_run(embedded: EmbeddedDataset, labels: Vec<usize>, cfg: &RunConfig, stream: u64) -> Result<OcsRun> {
    let c = &cfg.embedding;
    let root = derive_seed(cfg.seed, stream);
    let certificate = ocs_search(&embedded.points, &labels, c.theta)?;
    let mut rng = Rng::new(derive_seed(root, 1));
    let pair_fraction = theta_orthogonal_fraction(&embedded.points, &labels, c.pair_theta, c.n_tuples, &mut rng)?;
    let mut rng = Rng::new(derive_seed(root, 2));
    let k = embedded.dim();
    let run = kmeans_run(&embedded.points, k, &mut rng, 100);
    let kept_labels: Vec<usize> = run.kept.iter().map(|&i| labels[i]).collect();
    let kmeans_misclustering = misclustering(&run.assignments, &kept_labels)?;
    Ok(OcsRun {
        embedded,
        labels,
        certificate,
        pair_fraction,
        kmeans_misclustering,
    })
}

/// Samples of the Gaussian pair embedded with the regularized kernel.
pub fn embedding_pair_run(cfg: &RunConfig) -> Result<OcsRun> {
    let c = &cfg.embedding;
    let p = gaussian_pair(c.mu, c.nu)?;
    let kernel = p.kernel.regularized(c.offset)?;
    let mut rng = Rng::new(derive_seed(derive_seed(cfg.seed, streams::EMBEDDING_PAIR), 0));
    let sample = p.mixture.sample(c.n, &mut rng);
    let xs: Vec<f64> = sample.iter().map(|s| s.x).collect();
    let labels: Vec<usize> = sample.iter().map(|s| s.z).collect();
    let e = embed(&xs, &kernel, 2)?.with_labels(labels.clone(), Some(cfg.seed))?;
    ocs_run(e, labels, cfg, streams::EMBEDDING_PAIR)
}

/// Three isotropic Gaussian blobs in the plane.
pub fn blob_sample(cfg: &RunConfig) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let c = &cfg.embedding;
    let k = c.blob_centers.len();
    let weights = vec![1.0 / k as f64; k];
    let mut rng = Rng::new(derive_seed(derive_seed(cfg.seed, streams::EMBEDDING_BLOBS), 0));
    Ok((0..c.blobs_n)
        .map(|_| {
            let z = rng.categorical(&weights);
            let [cx, cy] = c.blob_centers[z];
            let x = cx + c.blob_sigma * rng.gaussian();
            let y = cy + c.blob_sigma * rng.gaussian();
            (vec![x, y], z)
        })
        .unzip())
}

pub fn embedding_blobs_run(cfg: &RunConfig) -> Result<(Vec<Vec<f64>>, OcsRun)> {
    let c = &cfg.embedding;
    let (pts, labels) = blob_sample(cfg)?;
    let kernel = Kernel::gaussian(c.blob_nu)?.regularized(c.offset)?;
    let e = embed_nd(&pts, &kernel, c.blob_centers.len())?.with_labels(labels.clone(), Some(cfg.seed))?;
    Ok((pts, ocs_run(e, labels, cfg, streams::EMBEDDING_BLOBS)?))
}

fn embedding_table(file: &str, run: &OcsRun) -> Table {
    let k = run.embedded.dim();
    let names: Vec<String> = (1..=k).map(|j| format!("phi_{j}")).chain(["label".to_string()]).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut t = Table::new(file, &refs);
    t.notes.push(format!(
        "eigenvalues={}",
        run.embedded.eigenvalues.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(";")
    ));
    for (p, &z) in run.embedded.points.iter().zip(&run.labels) {
        let mut row: Vec<Value> = p.iter().map(|&v| Value::F(v)).collect();
        row.push((z + 1).into());
        t.push(row);
    }
    t
}

fn labeled_series(points: &[(f64, f64)], labels: &[usize], k: usize) -> Vec<Series> {
    (0..k)
        .map(|m| {
            Series::markers(
                &format!("label {}", m + 1),
                points.iter().zip(labels).filter(|(_, &z)| z == m).map(|(p, _)| *p).collect(),
            )
        })
        .collect()
}

fn ocs_row(name: &str, cfg: &RunConfig, run: &OcsRun) -> Vec<Value> {
    vec![
        name.into(),
        run.embedded.dim().into(),
        run.embedded.len().into(),
        run.certificate.theta.into(),
        run.certificate.alpha.into(),
        run.certificate
            .per_cluster_alpha
            .iter()
            .map(|v| format!("{v:?}"))
            .collect::<Vec<_>>()
            .join(";")
            .into(),
        cfg.embedding.pair_theta.into(),
        run.pair_fraction.into(),
        run.kmeans_misclustering.into(),
    ]
}

/// Finite-sample embeddings with OCS certificates.
pub fn embedding_ocs(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.embedding;
    let (pair, blobs) = rayon::join(|| embedding_pair_run(cfg), || embedding_blobs_run(cfg));
    let pair = pair?;
    let (blob_pts, blobs) = blobs?;

    let mut a = Artifact::new("embedding_ocs");
    let mut input = Table::new("embedding_blobs_input.csv", &["x", "y", "label"]);
    for (p, &z) in blob_pts.iter().zip(&blobs.labels) {
        input.push(vec![p[0].into(), p[1].into(), (z + 1).into()]);
    }
    let mut summary = Table::new(
        "ocs_summary.csv",
        &["run", "k", "n", "theta", "alpha", "per_cluster_alpha", "pair_theta", "pair_fraction", "kmeans_misclustering"],
    );
    summary.push(ocs_row("gaussian_pair", cfg, &pair));
    summary.push(ocs_row("blobs", cfg, &blobs));

    a.checks.push(Check::new(
        "pair_alpha",
        pair.certificate.alpha <= c.max_alpha,
        format!("alpha={:?} threshold={:?} theta={:?}", pair.certificate.alpha, c.max_alpha, c.theta),
    ));
    a.checks.push(Check::new(
        "pair_theta_orthogonal_fraction",
        pair.pair_fraction >= c.min_pair_fraction,
        format!("fraction={:?} threshold={:?} theta={:?}", pair.pair_fraction, c.min_pair_fraction, c.pair_theta),
    ));
    a.checks.push(Check::new(
        "blobs_dimension",
        blobs.embedded.points.iter().all(|p| p.len() == c.blob_centers.len()),
        format!("k={}", blobs.embedded.dim()),
    ));

    let pair_xy: Vec<(f64, f64)> = pair.embedded.points.iter().map(|p| (p[0], p[1])).collect();
    let blob_in: Vec<(f64, f64)> = blob_pts.iter().map(|p| (p[0], p[1])).collect();
    let k3 = blobs.embedded.dim();
    let proj = |i: usize, j: usize| -> Vec<(f64, f64)> { blobs.embedded.points.iter().map(|p| (p[i], p[j])).collect() };
    let mut plots = vec![
        ("embedding_pair.svg", Plot::new("Embedding of the Gaussian pair", "phi_1", "phi_2"), pair_xy, &pair.labels, 2),
        ("embedding_blobs_input.svg", Plot::new("Three Gaussian blobs", "x", "y"), blob_in, &blobs.labels, k3),
    ];
    if k3 >= 3 {
        plots.push(("embedding_blobs_12.svg", Plot::new("Embedding of the blobs", "phi_1", "phi_2"), proj(0, 1), &blobs.labels, k3));
        plots.push(("embedding_blobs_23.svg", Plot::new("Embedding of the blobs", "phi_2", "phi_3"), proj(1, 2), &blobs.labels, k3));
    }
    for (file, mut plot, pts, labels, k) in plots {
        plot.series = labeled_series(&pts, labels, k);
        a.plots.push((file.to_string(), plot));
    }
    a.tables.push(embedding_table("embedding_pair.csv", &pair));
    a.tables.push(embedding_table("embedding_blobs.csv", &blobs));
    a.tables.push(input);
    a.tables.push(summary);
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut c = RunConfig {
            grid_nodes: 201,
            ..Default::default()
        };
        c.similarity.gaussian_mu = vec![4.0, 8.0];
        c.similarity.mc_samples = 20_000;
        c.similarity.triangular_mu = vec![2.0, 2.2];
        c.coupling.mu = vec![4.0, 8.0, 12.0];
        c.coupling.mc_samples = 20_000;
        c.rho.mu = vec![6.0, 8.0, 10.0];
        c.embedding.n = 300;
        c.embedding.blobs_n = 150;
        c.embedding.n_tuples = 2000;
        c
    }

    #[test]
    fn triangular_density_checks_pass() {
        let a = triangular_density(&RunConfig::default()).unwrap();
        assert!(a.passed(), "{:?}", a.checks);
        assert_eq!(a.tables[0].rows.len(), 601);
    }

    #[test]
    fn similarity_gaussian_checks_pass() {
        let a = similarity(&small()).unwrap();
        assert!(a.check("gaussian_closed_vs_quadrature").unwrap().passed);
        assert!(a.check("triangular_edge_overlap_vs_quadrature").unwrap().passed);
    }

    #[test]
    fn coupling_trend_and_bound() {
        let a = coupling_figure(&small()).unwrap();
        assert!(a.check("mc_decreasing_in_mu").unwrap().passed, "{:?}", a.checks);
        assert!(a.check("mc_below_bound").unwrap().passed, "{:?}", a.checks);
    }

    #[test]
    fn sweep_tables_have_expected_shape() {
        let cfg = small();
        let pts = rho_sweep_points(&cfg).unwrap();
        let a = rho_linearity(&cfg, &pts);
        assert_eq!(a.table("rho_sweep.csv").unwrap().rows.len(), 3);
        assert!(a.check("theorem1_bound").unwrap().passed);
        let rho = a.table("rho_linearity.csv").unwrap().column_f64("rho").unwrap();
        assert!(rho.iter().all(|r| *r >= 0.0));
    }

    #[test]
    fn tail_fits_match_closed_form_oracle() {
        // For N(0,1) with kernel c·k_ν the level set {q²/‖q‖ < t} is
        // {|x| > s·√(−2 ln(t·a))} with s² = ν² + 1 and a = ‖q‖/q²(0).
        let cfg = RunConfig::default();
        let a = tail_decay(&cfg).unwrap();
        let t = a.table("tail_decay.csv").unwrap();
        let nus = t.column_f64("nu").unwrap();
        let ts = t.column_f64("t").unwrap();
        let psi = t.column_f64("psi").unwrap();
        for ((nu, tv), p) in nus.iter().zip(&ts).zip(&psi) {
            let s2 = nu * nu + 1.0;
            let peak = cfg.tail.kernel_scale / (2.0 * std::f64::consts::PI * s2).sqrt();
            let norm = (peak / (1.0 + 1.0 / s2).sqrt()).sqrt();
            let arg = tv * norm / peak;
            let expect = if arg >= 1.0 {
                1.0
            } else {
                2.0 * specgeo_core::numerics::normal_cdf(-(-2.0 * s2 * arg.ln()).sqrt())
            };
            assert!((p - expect).abs() <= 1e-6 * expect.max(1e-3), "nu={nu} t={tv} {p} vs {expect}");
        }
        assert!(a.passed(), "{:?}", a.checks);
    }

    #[test]
    fn params_row() {
        let a = params_table(&small()).unwrap();
        assert!(a.passed());
        let t = &a.tables[0];
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0][6], Value::S("closed".into()));
    }

    #[test]
    fn embedding_shapes_and_determinism() {
        let cfg = small();
        let a = embedding_ocs(&cfg).unwrap();
        let b = embedding_ocs(&cfg).unwrap();
        let t = a.table("embedding_blobs.csv").unwrap();
        assert_eq!(t.columns, vec!["phi_1", "phi_2", "phi_3", "label"]);
        assert_eq!(t, b.table("embedding_blobs.csv").unwrap());
        assert_eq!(a.table("embedding_pair.csv"), b.table("embedding_pair.csv"));
    }
}
