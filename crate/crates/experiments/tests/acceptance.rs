//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.
//! Criteria recorded as unattainable are printed as expected failures and do
//! not fail the run; any other failure exits non-zero.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use specgeo::checks;
use specgeo::config::RunConfig;
use specgeo::figures::{self, SweepPoint};
use specgeo::report;
use specgeo_core::numerics::{make_grid, sym_eigen, GaussLegendre, Matrix, Rng, Rule};
use specgeo_core::params::{gaussian_indivisibility, indivisibility, GammaMethod, DEFAULT_THRESHOLDS};
use specgeo_core::{Component, Kernel};

/// Criteria that cannot be met as specified; see the decisions ledger.
const EXPECTED_FAILURES: [u32; 3] = [2, 5, 8];

struct Outcome {
    id: u32,
    passed: bool,
    detail: String,
    elapsed: Duration,
    budget: Option<Duration>,
}

impl Outcome {
    fn within_budget(&self) -> bool {
        self.budget.is_none_or(|b| self.elapsed <= b)
    }

    fn line(&self) -> String {
        let ok = self.passed && self.within_budget();
        let status = match (ok, EXPECTED_FAILURES.contains(&self.id)) {
            (true, false) => "PASS",
            (true, true) => "PASS (listed as expected failure)",
            (false, true) => "FAIL (expected; see ledger)",
            (false, false) => "FAIL",
        };
        let budget = match self.budget {
            Some(b) => format!(" budget={:.0}s", b.as_secs_f64()),
            None => String::new(),
        };
        format!(
            "criterion {}: {status} [{:.2}s{budget}] {}",
            self.id,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }

    fn blocking(&self) -> bool {
        !(self.passed && self.within_budget()) && !EXPECTED_FAILURES.contains(&self.id)
    }
}

fn timed(id: u32, budget: Option<u64>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome {
        id,
        passed,
        detail,
        elapsed: start.elapsed(),
        budget: budget.map(Duration::from_secs),
    }
}

fn criterion1() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for nu in [0.5, 1.0, 2.0] {
        let scan = indivisibility(
            &Component::gaussian(0.0, 1.0).unwrap(),
            &Kernel::gaussian(nu).unwrap(),
            GammaMethod::HalflineScan {
                thresholds: DEFAULT_THRESHOLDS,
            },
        )
        .unwrap()
        .value;
        let closed = 2.0 / PI * (nu * (2.0 + nu * nu).sqrt()).atan();
        worst = worst.max((scan - closed).abs() / closed);
    }
    let at_one = gaussian_indivisibility(1.0);
    let exact = (at_one - 2.0 / 3.0).abs() <= 1e-15;
    (
        worst <= 1e-3 && exact,
        format!("max_rel_err={worst:.3e} (tol 1e-3); gamma(nu=1)={at_one:?}"),
    )
}

fn criterion2(cfg: &RunConfig) -> (bool, String) {
    let a = figures::similarity(cfg).unwrap();
    let parts = [
        "gaussian_closed_vs_quadrature",
        "gaussian_closed_vs_mc",
        "triangular_published_vs_quadrature",
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for p in parts {
        let c = a.check(p).unwrap();
        ok &= c.passed;
        detail.push(format!("{p}={} ({})", if c.passed { "ok" } else { "fail" }, c.detail));
    }
    (ok, detail.join("; "))
}

fn criterion3(cfg: &RunConfig) -> (bool, String) {
    let a = figures::triangular_density(cfg).unwrap();
    let c = a.check("closed_vs_quadrature_sup").unwrap();
    let nodes = a.tables[0].rows.len();
    (c.passed && nodes == 601, format!("{} on {nodes} nodes", c.detail))
}

fn criterion4(points: &[SweepPoint]) -> (bool, String) {
    let c = figures::theorem1_check_summary(points);
    (c.passed, c.detail)
}

fn criterion5(cfg: &RunConfig, points: &[SweepPoint]) -> (bool, String) {
    let a = figures::rho_linearity(cfg, points);
    let c = a.check("linear_fit_r_squared").unwrap();
    (c.passed, c.detail.clone())
}

fn criterion6(cfg: &RunConfig, points: &[SweepPoint]) -> (bool, String) {
    let lemmas = checks::lemma_suite(points);
    let cheeger = checks::cheeger_suite(cfg).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["hs_g_bound", "sigma_min_a_bound", "sigma_max_b_bound"] {
        let c = lemmas.check(name).unwrap();
        ok &= c.passed;
        detail.push(format!("{name}: {}", c.detail));
    }
    let c = cheeger.check("cheeger_sandwich").unwrap();
    ok &= c.passed;
    detail.push(format!("cheeger: {} allowance={:?}", c.detail, cfg.checks.allowance));
    (ok, detail.join("; "))
}

fn criterion7(cfg: &RunConfig) -> (bool, String) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ocs_pilot.json");
    let fixture: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let max_alpha = fixture["max_alpha"].as_f64().unwrap();
    let min_fraction = fixture["min_pair_fraction"].as_f64().unwrap();
    let mut cfg = cfg.clone();
    cfg.seed = 42;
    let run = figures::embedding_pair_run(&cfg).unwrap();
    let alpha = run.certificate.alpha;
    let ok = alpha <= max_alpha && run.pair_fraction >= min_fraction && run.embedded.len() == 2000;
    (
        ok,
        format!(
            "alpha={alpha:.4} (<= {max_alpha}) at theta=pi/8; pair_fraction={:.4} (>= {min_fraction}) at theta=pi/4",
            run.pair_fraction
        ),
    )
}

fn criterion8(cfg: &RunConfig) -> (bool, String) {
    let a = checks::proposition1(cfg).unwrap();
    let cloud = a.check("cloud_satisfies_assumptions").unwrap();
    let rate = a.check("failure_rate_bound").unwrap();
    (cloud.passed && rate.passed, format!("{}; {}", cloud.detail, rate.detail))
}

fn criterion9(cfg: &RunConfig) -> (bool, String) {
    let a = figures::tail_decay(cfg).unwrap();
    let worst = a
        .checks
        .iter()
        .map(|c| {
            c.detail
                .split_whitespace()
                .find_map(|w| w.strip_prefix("r_squared="))
                .and_then(|v| v.parse::<f64>().ok())
                .unwrap()
        })
        .fold(f64::INFINITY, f64::min);
    (
        a.passed() && a.checks.len() == 6,
        format!("curves={} min_r_squared={worst:.4} (>= 0.98)", a.checks.len()),
    )
}

fn criterion10(cfg: &RunConfig) -> (bool, String) {
    let mut cfg = cfg.clone();
    cfg.seed = 42;
    let run = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| report::report_all(&cfg, dir.path())).unwrap();
        let manifest = std::fs::read(dir.path().join("manifest.json")).unwrap();
        (manifest, dir)
    };
    let (a, dir_a) = run(1);
    let (b, dir_b) = run(4);
    let manifest: serde_json::Value = serde_json::from_slice(&a).unwrap();
    let files = manifest["files"].as_array().unwrap();
    let mut identical = a == b;
    for f in files {
        let name = f["path"].as_str().unwrap();
        identical &= std::fs::read(dir_a.path().join(name)).unwrap() == std::fs::read(dir_b.path().join(name)).unwrap();
    }
    (
        identical,
        format!("two report-all runs (1 and 4 threads): {} files, manifests identical={}", files.len(), a == b),
    )
}

fn random_symmetric(n: usize, rng: &mut Rng) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = rng.gaussian();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Random symmetric, kernel Gram, low-rank, diagonal and clustered-spectrum
/// matrices of sizes 1 to 150.
fn corpus() -> Vec<Matrix> {
    let mut rng = Rng::new(2024);
    (0..200)
        .map(|i| {
            let n = 1 + (i * 37) % 150;
            match i % 5 {
                0 => random_symmetric(n, &mut rng),
                1 => {
                    let x: Vec<f64> = (0..n).map(|_| 3.0 * rng.gaussian()).collect();
                    let k = Kernel::gaussian(0.5 + rng.uniform()).unwrap();
                    Matrix::from_fn(n, n, |a, b| k.eval(x[a], x[b]))
                }
                2 => {
                    let r = 1 + n / 10;
                    let u = Matrix::from_fn(n, r, |_, _| rng.gaussian());
                    u.matmul(&u.transpose())
                }
                3 => {
                    let d: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
                    Matrix::from_fn(n, n, |a, b| if a == b { d[a] } else { 0.0 })
                }
                _ => {
                    let mut m = random_symmetric(n, &mut rng).scale(1e-8);
                    for j in 0..n {
                        m[(j, j)] += (j % 3) as f64;
                    }
                    m
                }
            }
        })
        .collect()
}

fn criterion11() -> (bool, String) {
    let mut worst_residual: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for m in corpus() {
        let e = sym_eigen(&m, None).unwrap();
        let n = m.rows();
        let mv = m.matmul(&e.vectors);
        let mut res = 0.0;
        for j in 0..n {
            for i in 0..n {
                let d = mv[(i, j)] - e.values[j] * e.vectors[(i, j)];
                res += d * d;
            }
        }
        let scale = m.frobenius_norm().max(f64::MIN_POSITIVE);
        worst_residual = worst_residual.max(res.sqrt() / scale);
        worst_orth = worst_orth.max(e.orthogonality_error());
    }
    let residual_ok = worst_residual <= 1e-10;

    // observed orders from successive halvings on a smooth integrand
    let order = |rule: Rule, n: usize| {
        let err = |nodes: usize| (make_grid((0.0, PI), nodes, rule).unwrap().integrate(f64::sin) - 2.0).abs();
        (err(n) / err(2 * n - 1)).log2()
    };
    let simpson = order(Rule::Simpson, 33);
    let trapezoid = order(Rule::Trapezoid, 33);
    let gl = GaussLegendre::new(20);
    let poly = |x: f64| (0..40).map(|p| x.powi(p)).sum::<f64>();
    let exact: f64 = (0..40).map(|p| 1.0 / (p + 1) as f64).sum();
    let gl_err = (gl.integrate(0.0, 1.0, poly) - exact).abs() / exact;
    let quad_ok = (3.8..4.2).contains(&simpson) && (1.9..2.1).contains(&trapezoid) && gl_err <= 1e-13;
    (
        residual_ok && quad_ok && worst_orth <= 1e-10,
        format!(
            "corpus=200 max_residual/||M||_F={worst_residual:.2e} max_orthogonality_err={worst_orth:.2e}; \
             simpson_order={simpson:.3} trapezoid_order={trapezoid:.3} gauss_legendre_20_deg39_rel_err={gl_err:.1e}"
        ),
    )
}

fn main() {
    let cfg = RunConfig::default();
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("{}", o.line());
        outcomes.push(o);
    };

    report(timed(1, Some(10), criterion1));
    report(timed(2, Some(30), || criterion2(&cfg)));
    report(timed(3, None, || criterion3(&cfg)));

    let start = Instant::now();
    let points = figures::rho_sweep_points(&cfg).unwrap();
    let sweep = start.elapsed();
    println!(
        "sweep: gaussian pair nu={} mu={:?} computed in {:.2}s (shared by criteria 4-6)",
        cfg.rho.nu,
        cfg.rho.mu,
        sweep.as_secs_f64()
    );
    report(timed(4, None, || criterion4(&points)));
    let mut c5 = timed(5, Some(120), || criterion5(&cfg, &points));
    c5.elapsed += sweep;
    report(c5);
    report(timed(6, None, || criterion6(&cfg, &points)));
    report(timed(7, Some(60), || criterion7(&cfg)));
    report(timed(8, None, || criterion8(&cfg)));
    report(timed(9, None, || criterion9(&cfg)));
    report(timed(10, None, || criterion10(&cfg)));
    report(timed(11, None, criterion11));

    let blocking: Vec<u32> = outcomes.iter().filter(|o| o.blocking()).map(|o| o.id).collect();
    let expected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.blocking() && !(o.passed && o.within_budget()))
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {} passed, {} expected failures {:?}, {} unexpected failures {:?}",
        outcomes.len() - blocking.len() - expected.len(),
        expected.len(),
        expected,
        blocking.len(),
        blocking
    );
    if !blocking.is_empty() {
        std::process::exit(1);
    }
}
