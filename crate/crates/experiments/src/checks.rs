//! Verification suites: indivisibility closed forms, the block bounds on the
//! sweep, Cheeger sandwiches and the empirical K-means recovery rate.

use std::f64::consts::PI;

use rayon::prelude::*;
use specgeo_core::cluster::{kmeans_run, misclustering, ocs_alpha, proposition1_condition};
use specgeo_core::mixture::bimodal_component;
use specgeo_core::numerics::{derive_seed, Rng};
use specgeo_core::params::{
    gaussian_indivisibility, indivisibility, triangular_indivisibility, GammaMethod, DEFAULT_THRESHOLDS,
};
use specgeo_core::popoperator::cheeger_check;
use specgeo_core::{Component, Kernel};

use crate::artifact::{Artifact, Check};
use crate::config::RunConfig;
use crate::error::Result;
use crate::figures::{streams, SweepPoint};
use crate::output::Table;

const SCAN: GammaMethod = GammaMethod::HalflineScan {
    thresholds: DEFAULT_THRESHOLDS,
};

/// Half-line scan against the closed forms of Γ.
pub fn indivisibility_suite() -> Result<Artifact> {
    let mut t = Table::new("indivisibility.csv", &["family", "nu", "gamma_scan", "gamma_closed", "rel_err"]);
    let mut a = Artifact::new("indivisibility");
    let mut worst: f64 = 0.0;
    for nu in [0.5, 1.0, 2.0] {
        let scan = indivisibility(&Component::gaussian(0.0, 1.0)?, &Kernel::gaussian(nu)?, SCAN)?.value;
        let closed = gaussian_indivisibility(nu);
        let rel = (scan - closed).abs() / closed;
        worst = worst.max(rel);
        t.push(vec!["gaussian".into(), nu.into(), scan.into(), closed.into(), rel.into()]);
    }
    a.checks.push(Check::new(
        "gaussian_scan_vs_closed",
        worst <= 1e-3,
        format!("max_rel_err={worst:?} tolerance=1e-3"),
    ));
    let at_one = gaussian_indivisibility(1.0);
    a.checks.push(Check::new(
        "gaussian_unit_bandwidth",
        (at_one - 2.0 / 3.0).abs() <= 1e-15,
        format!("gamma={at_one:?} expected=2/3"),
    ));
    // the triangular expression is the ratio of the centred split, so the
    // scanned infimum never exceeds it
    let mut above = 0usize;
    for nu in [0.05, 0.5, 1.0] {
        let scan = indivisibility(&Component::triangular(0.0)?, &Kernel::uniform_box(nu)?, SCAN)?.value;
        let closed = triangular_indivisibility(nu);
        if scan > closed * (1.0 + 1e-6) {
            above += 1;
        }
        let rel = (scan - closed).abs() / closed;
        t.push(vec!["triangular".into(), nu.into(), scan.into(), closed.into(), rel.into()]);
    }
    a.checks.push(Check::new(
        "triangular_scan_below_centred_split",
        above == 0,
        format!("violations={above}"),
    ));
    a.tables.push(t);
    Ok(a)
}

/// Block bounds for every sweep point.
pub fn lemma_suite(points: &[SweepPoint]) -> Artifact {
    let mut t = Table::new(
        "lemma_checks.csv",
        &[
            "mu",
            "hs_g",
            "hs_g_bound",
            "sigma_min_a",
            "sigma_min_a_bound",
            "sigma_max_b",
            "sigma_max_b_bound",
            "sep",
            "sep_bound",
            "hypothesis_ok",
        ],
    );
    let mut bad = [0usize; 4];
    let mut eligible = 0usize;
    for p in points {
        let l = &p.lemma;
        bad[0] += usize::from(!l.hs_bound_holds());
        bad[1] += usize::from(!l.sigma_min_holds());
        bad[2] += usize::from(!l.sigma_max_holds());
        if p.theorem.hypothesis_ok {
            eligible += 1;
            bad[3] += usize::from(!l.sep_holds());
        }
        t.push(vec![
            p.mu.into(),
            l.hs_g.into(),
            l.hs_g_bound.into(),
            l.sigma_min_a.into(),
            l.sigma_min_a_bound.into(),
            l.sigma_max_b.into(),
            l.sigma_max_b_bound.into(),
            l.sep.into(),
            l.sep_bound.into(),
            p.theorem.hypothesis_ok.into(),
        ]);
    }
    let mut a = Artifact::new("lemma_checks");
    let n = points.len();
    a.checks.push(Check::new("hs_g_bound", bad[0] == 0, format!("violations={} points={n}", bad[0])));
    a.checks.push(Check::new("sigma_min_a_bound", bad[1] == 0, format!("violations={} points={n}", bad[1])));
    a.checks.push(Check::new("sigma_max_b_bound", bad[2] == 0, format!("violations={} points={n}", bad[2])));
    a.checks.push(Check::new(
        "separation_bound",
        bad[3] == 0,
        format!("violations={} hypothesis_points={eligible}", bad[3]),
    ));
    a.tables.push(t);
    a
}

fn cheeger_cases() -> Result<Vec<(String, Component, Kernel)>> {
    let mut cases = Vec::new();
    for nu in [0.5, 1.0, 2.0] {
        cases.push((format!("gaussian nu={nu}"), Component::gaussian(0.0, 1.0)?, Kernel::gaussian(nu)?));
    }
    for nu in [1.0, 0.5, 0.05] {
        cases.push((format!("triangular nu={nu}"), Component::triangular(0.0)?, Kernel::uniform_box(nu)?));
    }
    cases.push(("bimodal mu=4 nu=0.05".into(), bimodal_component(4.0)?, Kernel::uniform_box(0.05)?));
    Ok(cases)
}

/// `1 − Γ²/8 ≥ λ₂ ≥ 1 − Γ` for single distributions.
pub fn cheeger_suite(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.checks;
    let cases = cheeger_cases()?;
    let reports = cases
        .par_iter()
        .map(|(_, d, k)| cheeger_check(d, k, c.cheeger_nodes))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut t = Table::new("cheeger.csv", &["case", "gamma", "lambda2", "upper", "lower", "holds"]);
    t.notes.push(format!("nodes={} allowance={:?}", c.cheeger_nodes, c.allowance));
    let mut failed = Vec::new();
    for ((name, _, _), r) in cases.iter().zip(&reports) {
        let ok = r.holds(c.allowance);
        if !ok {
            failed.push(name.clone());
        }
        t.push(vec![name.as_str().into(), r.gamma.into(), r.lambda2.into(), r.upper.into(), r.lower.into(), ok.into()]);
    }
    let mut a = Artifact::new("cheeger");
    a.checks.push(Check::new(
        "cheeger_sandwich",
        failed.is_empty(),
        format!("cases={} failed=[{}]", cases.len(), failed.join(", ")),
    ));
    a.tables.push(t);
    Ok(a)
}

/// A two-cluster cloud in the plane: per cluster, `(1 − α)` of the points
/// lie within `θ` of their axis and the rest at uniformly random angles.
pub fn proposition1_cloud(cfg: &RunConfig) -> (Vec<Vec<f64>>, Vec<usize>) {
    let c = &cfg.proposition1;
    let mut rng = Rng::new(derive_seed(derive_seed(cfg.seed, streams::PROPOSITION1), 0));
    let outliers = (c.alpha * c.cluster_size as f64).floor() as usize;
    let mut pts = Vec::with_capacity(2 * c.cluster_size);
    let mut labels = Vec::with_capacity(2 * c.cluster_size);
    for m in 0..2 {
        let axis = m as f64 * PI / 2.0;
        for i in 0..c.cluster_size {
            let angle = if i < c.cluster_size - outliers {
                axis + (2.0 * rng.uniform() - 1.0) * 0.999 * c.theta
            } else {
                2.0 * PI * rng.uniform()
            };
            let r = 0.5 + rng.uniform();
            pts.push(vec![r * angle.cos(), r * angle.sin()]);
            labels.push(m);
        }
    }
    (pts, labels)
}

/// Fraction of random orthonormal initializations after which K-means
/// misclusters more than `αn` points.
pub fn proposition1(cfg: &RunConfig) -> Result<Artifact> {
    let c = &cfg.proposition1;
    let (pts, labels) = proposition1_cloud(cfg);
    let n = pts.len();
    let axes = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let cert = ocs_alpha(&pts, &labels, &axes, c.theta)?;
    let condition = proposition1_condition(c.alpha, c.theta, &[c.cluster_size, c.cluster_size], n);
    let root = derive_seed(derive_seed(cfg.seed, streams::PROPOSITION1), 1);
    let limit = c.alpha * n as f64;
    let runs: Vec<(usize, usize, bool)> = (0..c.inits)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize, bool)> {
            let mut rng = Rng::new(derive_seed(root, i as u64));
            let run = kmeans_run(&pts, 2, &mut rng, c.max_iter);
            let kept: Vec<usize> = run.kept.iter().map(|&j| labels[j]).collect();
            let wrong = (misclustering(&run.assignments, &kept)? * n as f64).round() as usize;
            Ok((run.n_iterations, wrong, wrong as f64 > limit))
        })
        .collect::<Result<_>>()?;
    let failures = runs.iter().filter(|r| r.2).count();
    let rate = failures as f64 / c.inits as f64;
    let p = 4.0 * c.theta / (2.0 * PI);
    let se = (p * (1.0 - p) / c.inits as f64).sqrt();
    let bound = p + 3.0 * se;

    let mut summary = Table::new(
        "proposition1.csv",
        &["alpha", "theta", "n", "ocs_alpha", "condition", "inits", "failures", "failure_rate", "bound"],
    );
    summary.push(vec![
        c.alpha.into(),
        c.theta.into(),
        n.into(),
        cert.alpha.into(),
        condition.into(),
        c.inits.into(),
        failures.into(),
        rate.into(),
        bound.into(),
    ]);
    let mut per_run = Table::new("prop1_runs.csv", &["init", "n_iterations", "misclustered", "failed"]);
    for (i, r) in runs.iter().enumerate() {
        per_run.push(vec![i.into(), r.0.into(), r.1.into(), r.2.into()]);
    }
    let mut a = Artifact::new("proposition1");
    a.checks.push(Check::new(
        "cloud_satisfies_assumptions",
        condition && cert.alpha <= c.alpha,
        format!("ocs_alpha={:?} condition={condition}", cert.alpha),
    ));
    a.checks.push(Check::new(
        "failure_rate_bound",
        rate <= bound,
        format!("failure_rate={rate:?} bound={bound:?} failures={failures} inits={}", c.inits),
    ));
    a.tables.push(summary);
    a.tables.push(per_run);
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indivisibility_suite_passes() {
        let a = indivisibility_suite().unwrap();
        assert!(a.passed(), "{:?}", a.checks);
        assert_eq!(a.tables[0].rows.len(), 6);
    }

    #[test]
    fn cloud_has_the_requested_structure() {
        let cfg = RunConfig::default();
        let (pts, labels) = proposition1_cloud(&cfg);
        assert_eq!(pts.len(), 2 * cfg.proposition1.cluster_size);
        assert_eq!(labels.iter().filter(|&&z| z == 1).count(), cfg.proposition1.cluster_size);
        let axes = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let cert = ocs_alpha(&pts, &labels, &axes, cfg.proposition1.theta).unwrap();
        assert!(cert.alpha <= cfg.proposition1.alpha);
        assert_eq!(cfg.proposition1.cluster_size, 500);
    }

    #[test]
    fn proposition1_small_run_is_deterministic() {
        let mut cfg = RunConfig::default();
        cfg.proposition1.inits = 50;
        let a = proposition1(&cfg).unwrap();
        let b = proposition1(&cfg).unwrap();
        assert_eq!(a.tables, b.tables);
        assert!(a.check("cloud_satisfies_assumptions").unwrap().passed);
    }

    #[test]
    fn cheeger_cases_cover_the_three_families() {
        let cases = cheeger_cases().unwrap();
        assert_eq!(cases.len(), 7);
    }
}
