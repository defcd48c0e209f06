//! Mixture difficulty parameters: similarity, coupling, indivisibility,
//! the difficulty function φ, `b_max`, and the tail-decay function ψ.

use std::f64::consts::{FRAC_2_PI, PI};

use crate::density::{KernelizedDensity, MixtureDensities};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::mixture::{Component, Mixture};
use crate::numerics::{bisect, GaussLegendre, Rng};

const GL_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Closed,
    Quadrature,
    MonteCarlo,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Closed => "closed",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte_carlo",
        }
    }
}

/// How a parameter is estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Closed form where one is known, quadrature otherwise.
    Closed,
    Quadrature,
    MonteCarlo { n: usize, seed: u64 },
}

/// A value with its provenance and, for Monte Carlo, its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: Option<f64>,
    pub provenance: Provenance,
}

impl Estimate {
    fn exact(value: f64, provenance: Provenance) -> Self {
        Self {
            value,
            std_error: None,
            provenance,
        }
    }
}

/// `∫_{lo}^{hi} f(x) dP(x)` by piecewise Gauss–Legendre over each part of
/// the support, split at the density kinks and at `breaks`.
pub fn integrate_against(
    dist: &Component,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    panel: f64,
    f: &dyn Fn(f64) -> f64,
) -> f64 {
    let rule = GaussLegendre::new(GL_ORDER);
    integrate_with(&rule, dist, lo, hi, breaks, panel, f)
}

fn integrate_with(
    rule: &GaussLegendre,
    dist: &Component,
    lo: f64,
    hi: f64,
    breaks: &[f64],
    panel: f64,
    f: &dyn Fn(f64) -> f64,
) -> f64 {
    if let Component::Composite(parts) = dist {
        return parts
            .iter()
            .map(|(w, c)| w * integrate_with(rule, c, lo, hi, breaks, panel, f))
            .sum();
    }
    let (s0, s1) = dist.support();
    let (a, b) = (s0.max(lo), s1.min(hi));
    if a >= b {
        return 0.0;
    }
    let mut cuts = dist.kinks();
    cuts.extend_from_slice(breaks);
    rule.integrate_piecewise(a, b, &cuts, panel, |x| f(x) * dist.density(x))
}

/// Default panel length for integrals involving `dist` under `kernel`.
fn panel_for(kernel: &Kernel, dist: &Component) -> f64 {
    0.25 * dist.length_scale().min(kernel.nu())
}

// ---------------------------------------------------------------------------
// similarity

/// `S(P_ℓ, P_m) = ∫∫ k dP_m dP_ℓ / ∫∫ k dP̄ dP_ℓ`.
pub fn similarity(
    mixture: &Mixture,
    kernel: &Kernel,
    l: usize,
    m: usize,
    method: Method,
) -> Result<Estimate> {
    check_index(mixture, l)?;
    check_index(mixture, m)?;
    if l == m {
        return Err(Error::BadParameter {
            name: "m",
            value: m as f64,
            reason: "similarity needs two distinct components",
        });
    }
    match method {
        Method::MonteCarlo { n, seed } => Ok(similarity_mc(mixture, kernel, l, m, n, seed)),
        _ => {
            let cross = cross_integrals(mixture, kernel, l)?;
            let denom: f64 = cross.iter().zip(mixture.weights()).map(|(c, w)| w * c).sum();
            Ok(Estimate::exact(cross[m] / denom, Provenance::Quadrature))
        }
    }
}

/// `I_j = ∫∫ k(x,y) dP_j(y) dP_ℓ(x)` for every `j`.
fn cross_integrals(mixture: &Mixture, kernel: &Kernel, l: usize) -> Result<Vec<f64>> {
    let p_l = mixture.component(l);
    if kernel.family() == KernelFamily::Linear {
        // ∫∫ xy dP_j dP_ℓ = E_ℓ[X] E_j[Y]
        let mean = |c: &Component| {
            let (a, b) = c.support();
            integrate_against(c, a, b, &[], 0.25 * c.length_scale(), &|x| x)
        };
        let ml = mean(p_l);
        return Ok(mixture
            .components()
            .iter()
            .map(|c| ml * mean(c) + kernel.offset())
            .collect());
    }
    let (a, b) = p_l.support();
    mixture
        .components()
        .iter()
        .map(|c| {
            let q = KernelizedDensity::new(kernel, c)?;
            let panel = panel_for(kernel, p_l).min(panel_for(kernel, c));
            Ok(integrate_against(p_l, a, b, &q.kinks(), panel, &|x| q.q_sq(x)))
        })
        .collect()
}

/// Paired ratio estimator: `X ~ P_ℓ`, `Y ~ P_m`, `Ȳ ~ P̄` drawn together;
/// the ratio of the sample means of `k(X,Y)` and `k(X,Ȳ)` with a
/// delta-method standard error.
fn similarity_mc(mixture: &Mixture, kernel: &Kernel, l: usize, m: usize, n: usize, seed: u64) -> Estimate {
    let mut rng = Rng::new(seed);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let p_bar = mixture.as_component();
    for _ in 0..n {
        let x = mixture.component(l).sample(&mut rng);
        let y = mixture.component(m).sample(&mut rng);
        let y_bar = p_bar.sample(&mut rng);
        a.push(kernel.eval(x, y));
        b.push(kernel.eval(x, y_bar));
    }
    let nf = n as f64;
    let ma = a.iter().sum::<f64>() / nf;
    let mb = b.iter().sum::<f64>() / nf;
    let ratio = ma / mb;
    let mut var = 0.0;
    for (ai, bi) in a.iter().zip(&b) {
        let r = (ai - ma) - ratio * (bi - mb);
        var += r * r;
    }
    var /= nf - 1.0;
    Estimate {
        value: ratio,
        std_error: Some((var / nf).sqrt() / mb.abs()),
        provenance: Provenance::MonteCarlo,
    }
}

/// `max_{ℓ≠m} S(P_ℓ, P_m)`.
pub fn s_max(mixture: &Mixture, kernel: &Kernel, method: Method) -> Result<Estimate> {
    let k = mixture.k();
    if k < 2 {
        return Err(Error::BadParameter {
            name: "K",
            value: k as f64,
            reason: "at least two components are required",
        });
    }
    if method == Method::Closed {
        if let Some(v) = closed_s_max(mixture, kernel) {
            return Ok(Estimate::exact(v, Provenance::Closed));
        }
    }
    let mut best: Option<Estimate> = None;
    for l in 0..k {
        let per_l: Vec<Estimate> = match method {
            Method::MonteCarlo { n, seed } => (0..k)
                .filter(|&m| m != l)
                .map(|m| {
                    let pair_seed = crate::numerics::derive_seed(seed, (l * k + m) as u64);
                    similarity_mc(mixture, kernel, l, m, n, pair_seed)
                })
                .collect(),
            _ => {
                let cross = cross_integrals(mixture, kernel, l)?;
                let denom: f64 = cross.iter().zip(mixture.weights()).map(|(c, w)| w * c).sum();
                (0..k)
                    .filter(|&m| m != l)
                    .map(|m| Estimate::exact(cross[m] / denom, Provenance::Quadrature))
                    .collect()
            }
        };
        for e in per_l {
            if best.is_none_or(|b| e.value > b.value) {
                best = Some(e);
            }
        }
    }
    Ok(best.expect("K ≥ 2 gives at least one pair"))
}

/// Closed-form `S_max` for recognised two-component equal-weight mixtures.
pub fn closed_s_max(mixture: &Mixture, kernel: &Kernel) -> Option<f64> {
    if mixture.k() != 2 || kernel.offset() != 0.0 || mixture.weights()[0] != mixture.weights()[1] {
        return None;
    }
    match (kernel.family(), mixture.component(0), mixture.component(1)) {
        (
            KernelFamily::Gaussian,
            Component::Gaussian { mu: a, sigma: s1 },
            Component::Gaussian { mu: b, sigma: s2 },
        ) if *s1 == 1.0 && *s2 == 1.0 => Some(gaussian_pair_s_max(b - a, kernel.nu())),
        (KernelFamily::UniformBox, Component::Triangular { mu: a }, Component::Triangular { mu: b }) => {
            let mu = (b - a).abs();
            let nu = kernel.nu();
            (nu < 1.0 && mu >= 2.0 - nu).then(|| triangular_pair_s_max(mu, nu))
        }
        _ => None,
    }
}

/// `S_max` of `½N(0,1) + ½N(μ,1)` under the Gaussian kernel:
/// `2e/(1 + e)` with `e = exp(−μ²/(2ν² + 4))`.
pub fn gaussian_pair_s_max(mu: f64, nu: f64) -> f64 {
    let e = (-mu * mu / (2.0 * nu * nu + 4.0)).exp();
    2.0 * e / (1.0 + e)
}

/// `S_max` of `½T₀ + ½T_μ` under the box kernel for `μ ≥ 2 − ν`, where the
/// two kernelized supports overlap only through their linear edges:
/// `2t⁴/(2ν(16 − 8ν² + 3ν³) + t⁴)` with `t = (2 + ν − μ)₊`.
pub fn triangular_pair_s_max(mu: f64, nu: f64) -> f64 {
    let t4 = (2.0 + nu - mu).max(0.0).powi(4);
    2.0 * t4 / (2.0 * nu * (16.0 - 8.0 * nu * nu + 3.0 * nu.powi(3)) + t4)
}

/// The published expression `2t⁴/(ν(16 − 8ν² + 3ν³) + t⁴)` for the same
/// quantity, kept for comparison; it double counts the cross term and is
/// applied there for `μ` down to 1, outside the edge-overlap regime.
pub fn triangular_pair_s_max_published(mu: f64, nu: f64) -> f64 {
    let t4 = (2.0 + nu - mu).max(0.0).powi(4);
    2.0 * t4 / (nu * (16.0 - 8.0 * nu * nu + 3.0 * nu.powi(3)) + t4)
}

// ---------------------------------------------------------------------------
// coupling

/// `C = max_m ∫∫ (k_m − w_m k̄)² dP_m dP_m`.
pub fn coupling(mixture: &Mixture, kernel: &Kernel, method: Method) -> Result<Estimate> {
    if mixture.k() == 1 {
        return Ok(Estimate::exact(0.0, Provenance::Closed));
    }
    let dens = MixtureDensities::new(kernel, mixture)?;
    let mut best: Option<Estimate> = None;
    for m in 0..mixture.k() {
        let e = match method {
            Method::MonteCarlo { n, seed } => coupling_mc(mixture, kernel, &dens, m, n, crate::numerics::derive_seed(seed, m as u64)),
            _ => Estimate::exact(coupling_quadrature(mixture, kernel, &dens, m), Provenance::Quadrature),
        };
        if best.is_none_or(|b| e.value > b.value) {
            best = Some(e);
        }
    }
    Ok(best.expect("K ≥ 1"))
}

fn coupling_integrand(kernel: &Kernel, w: f64, qm: (f64, f64), qb: (f64, f64), x: f64, y: f64) -> f64 {
    let k = kernel.eval(x, y);
    if k == 0.0 {
        return 0.0;
    }
    let d = k / (qm.0 * qm.1) - w * k / (qb.0 * qb.1);
    d * d
}

fn coupling_quadrature(mixture: &Mixture, kernel: &Kernel, dens: &MixtureDensities, m: usize) -> f64 {
    let p_m = mixture.component(m);
    let w = mixture.weights()[m];
    let q_m = &dens.components[m];
    let q_b = &dens.mixture;
    let (a, b) = p_m.support();
    let mut breaks = q_m.kinks();
    breaks.extend(q_b.kinks());
    let panel = panel_for(kernel, p_m);
    let rule = GaussLegendre::new(GL_ORDER);
    let nu = kernel.nu();
    integrate_with(&rule, p_m, a, b, &breaks, panel, &|x| {
        let qx = (q_m.q(x), q_b.q(x));
        if qx.0 == 0.0 || qx.1 == 0.0 {
            return 0.0;
        }
        let mut inner_breaks = breaks.clone();
        inner_breaks.extend(kernel.kinks(x));
        let (lo, hi) = match kernel.family() {
            KernelFamily::UniformBox if kernel.offset() == 0.0 => (x - nu, x + nu),
            _ => (a, b),
        };
        integrate_with(&rule, p_m, lo, hi, &inner_breaks, panel, &|y| {
            let qy = (q_m.q(y), q_b.q(y));
            if qy.0 == 0.0 || qy.1 == 0.0 {
                return 0.0;
            }
            coupling_integrand(kernel, w, (qx.0, qy.0), (qx.1, qy.1), x, y)
        })
    })
}

fn coupling_mc(
    mixture: &Mixture,
    kernel: &Kernel,
    dens: &MixtureDensities,
    m: usize,
    n: usize,
    seed: u64,
) -> Estimate {
    let mut rng = Rng::new(seed);
    let p_m = mixture.component(m);
    let w = mixture.weights()[m];
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = p_m.sample(&mut rng);
        let y = p_m.sample(&mut rng);
        let qm = (dens.components[m].q(x), dens.components[m].q(y));
        let qb = (dens.mixture.q(x), dens.mixture.q(y));
        let v = if qm.0 * qm.1 * qb.0 * qb.1 == 0.0 {
            0.0
        } else {
            coupling_integrand(kernel, w, qm, qb, x, y)
        };
        s1 += v;
        s2 += v * v;
    }
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Estimate {
        value: mean,
        std_error: Some((var / nf).sqrt()),
        provenance: Provenance::MonteCarlo,
    }
}

/// Upper bound on the coupling of `½N(0,1) + ½N(μ,1)` under the Gaussian
/// kernel.
///
/// With `r(x) = q₂²(x)/q₁²(x) = exp((2μx − μ²)/(2s))`, `s = 1 + ν²`, the
/// integrand equals `k²/(q₁q₁)² · g` where `g = (1 − 1/√((1+r_x)(1+r_y)))²`
/// lies in `[0, 1]` and is at most `(a_R/2)²` with `a_R = 2r_R + r_R²` on
/// `{x, y ≤ R}`. Splitting the plane at `R` gives
/// `C ≤ (a_R/2)² E + 2 T(R)` where `E = ∫∫ k²/(q₁²q₁²) dP₁dP₁` and `T(R)`
/// is its mass with `x > R`; both are Gaussian integrals. The bound is
/// minimised over `R`.
pub fn gaussian_pair_coupling_bound(mu: f64, nu: f64) -> f64 {
    let s = 1.0 + nu * nu;
    let a = nu * nu / (2.0 * s);
    let beta = 1.0 / (nu * nu) + a;
    let gamma = a + a / (nu * nu * beta);
    let ck2 = 1.0 / (2.0 * PI * nu * nu);
    let e_full = ck2 * s * (PI / beta).sqrt() * (PI / gamma).sqrt();
    let bound_at = |r: f64| {
        let rho = ((2.0 * mu * r - mu * mu) / (2.0 * s)).exp();
        let a_r = 2.0 * rho + rho * rho;
        let tail = e_full * 0.5 * libm::erfc(r * gamma.sqrt());
        (0.5 * a_r).powi(2) * e_full + 2.0 * tail
    };
    let mut best = f64::INFINITY;
    let steps = 4000;
    for i in 0..=steps {
        let r = -5.0 + (mu + 10.0) * i as f64 / steps as f64;
        best = best.min(bound_at(r));
    }
    best.min(e_full)
}

// ---------------------------------------------------------------------------
// indivisibility

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaMethod {
    /// Closed form; fails when none is known.
    Closed,
    /// Scan of half-line sets `(−∞, s]` over this many thresholds (plus
    /// interval sets for composite distributions), with local refinement.
    HalflineScan { thresholds: usize },
    /// Closed form if known, scan with 201 thresholds otherwise.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaEstimate {
    pub value: f64,
    pub provenance: Provenance,
    /// Minimizing set `(lo, hi]`, with infinite ends for half-lines.
    pub set: Option<(f64, f64)>,
}

pub const DEFAULT_THRESHOLDS: usize = 201;

/// `Γ(P) = inf_S p(X) ∫_S∫_{S^c} k dP dP / (p(S) p(S^c))` with
/// `p(S) = ∫_S q² dP`.
pub fn indivisibility(dist: &Component, kernel: &Kernel, method: GammaMethod) -> Result<GammaEstimate> {
    let closed = closed_gamma(dist, kernel);
    match (method, closed) {
        (GammaMethod::Auto, Some(v)) if matches!(dist, Component::Triangular { .. }) => {
            // the triangular expression is the centred-split ratio; it is the
            // infimum only when no off-centre half-line does better
            let scan = scan_gamma(dist, kernel, DEFAULT_THRESHOLDS)?;
            if scan.value < v * (1.0 - 1e-6) {
                Ok(scan)
            } else {
                Ok(GammaEstimate {
                    value: v,
                    provenance: Provenance::Closed,
                    set: scan.set,
                })
            }
        }
        (GammaMethod::Closed | GammaMethod::Auto, Some(v)) => Ok(GammaEstimate {
            value: v,
            provenance: Provenance::Closed,
            set: None,
        }),
        (GammaMethod::Closed, None) => Err(Error::Unsupported(format!(
            "no closed-form indivisibility for {} under {}",
            dist.describe(),
            kernel.describe()
        ))),
        (GammaMethod::HalflineScan { thresholds }, _) => scan_gamma(dist, kernel, thresholds),
        (GammaMethod::Auto, None) => scan_gamma(dist, kernel, DEFAULT_THRESHOLDS),
    }
}

/// `Γ(ℙ) = min_m Γ(P_m)`.
pub fn gamma_min(mixture: &Mixture, kernel: &Kernel, method: GammaMethod) -> Result<GammaEstimate> {
    let mut best: Option<GammaEstimate> = None;
    for c in mixture.components() {
        let g = indivisibility(c, kernel, method)?;
        if best.is_none_or(|b| g.value < b.value) {
            best = Some(g);
        }
    }
    Ok(best.expect("mixture has components"))
}

pub fn closed_gamma(dist: &Component, kernel: &Kernel) -> Option<f64> {
    if kernel.offset() != 0.0 {
        return None;
    }
    match (kernel.family(), dist) {
        (KernelFamily::Gaussian, Component::Gaussian { sigma, .. }) => {
            Some(gaussian_indivisibility(kernel.nu() / sigma))
        }
        (KernelFamily::UniformBox, Component::Triangular { .. }) if kernel.nu() <= 1.0 => {
            Some(triangular_indivisibility(kernel.nu()))
        }
        _ => None,
    }
}

/// `Γ(N(μ,1)) = (2/π) arctan(ν√(2 + ν²))` under the Gaussian kernel.
pub fn gaussian_indivisibility(nu: f64) -> f64 {
    FRAC_2_PI * (nu * (2.0 + nu * nu).sqrt()).atan()
}

/// `2ν(6 − ν)(2 − ν)/(16 − 8ν² + 3ν³)`: the ratio of `T_μ` under the box
/// kernel for the split at its mode. This is `Γ(T_μ)` for `ν ≳ 0.45`; for
/// smaller `ν` an off-centre half-line attains a lower ratio.
pub fn triangular_indivisibility(nu: f64) -> f64 {
    2.0 * nu * (6.0 - nu) * (2.0 - nu) / (16.0 - 8.0 * nu * nu + 3.0 * nu.powi(3))
}

struct CheegerRatio<'a> {
    dist: &'a Component,
    q: KernelizedDensity,
    breaks: Vec<f64>,
    panel: f64,
    total: f64,
    rule: GaussLegendre,
    nu: f64,
}

impl<'a> CheegerRatio<'a> {
    fn new(dist: &'a Component, kernel: &Kernel) -> Result<Self> {
        let q = KernelizedDensity::new(kernel, dist)?;
        let breaks = q.kinks();
        let panel = panel_for(kernel, dist);
        let rule = GaussLegendre::new(GL_ORDER);
        let (a, b) = dist.support();
        let total = integrate_with(&rule, dist, a, b, &breaks, panel, &|x| q.q_sq(x));
        Ok(Self {
            dist,
            q,
            breaks,
            panel,
            total,
            rule,
            nu: kernel.nu(),
        })
    }

    fn p(&self, lo: f64, hi: f64) -> f64 {
        integrate_with(&self.rule, self.dist, lo, hi, &self.breaks, self.panel, &|x| self.q.q_sq(x))
    }

    /// Ratio for `S = (lo, hi]`; `None` if `S` or its complement is
    /// negligible.
    fn ratio(&self, lo: f64, hi: f64) -> Option<f64> {
        let (a, b) = self.dist.support();
        let p_s = self.p(lo.max(a), hi.min(b));
        let p_c = self.total - p_s;
        if p_s <= 1e-10 * self.total || p_c <= 1e-10 * self.total {
            return None;
        }
        let mut breaks = self.breaks.clone();
        breaks.extend([lo - self.nu, lo + self.nu, hi - self.nu, hi + self.nu]);
        let cross = integrate_with(&self.rule, self.dist, lo.max(a), hi.min(b), &breaks, self.panel, &|x| {
            self.q.window_integral(x, f64::NEG_INFINITY, lo) + self.q.window_integral(x, hi, f64::INFINITY)
        });
        Some(self.total * cross / (p_s * p_c))
    }
}

/// The indivisibility ratio of the set `(lo, hi]`; `None` when the set or its
/// complement carries negligible `q²`-mass.
pub fn split_ratio(dist: &Component, kernel: &Kernel, lo: f64, hi: f64) -> Result<Option<f64>> {
    Ok(CheegerRatio::new(dist, kernel)?.ratio(lo, hi))
}

fn scan_gamma(dist: &Component, kernel: &Kernel, thresholds: usize) -> Result<GammaEstimate> {
    if kernel.family() == KernelFamily::Linear {
        return Err(Error::Unsupported("indivisibility needs a positive kernel".into()));
    }
    let thresholds = thresholds.max(3);
    let cr = CheegerRatio::new(dist, kernel)?;
    let (a, b) = dist.support();
    let half = |s: f64| cr.ratio(f64::NEG_INFINITY, s);
    let ss: Vec<f64> = (0..thresholds)
        .map(|i| a + (b - a) * i as f64 / (thresholds - 1) as f64)
        .collect();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut best_idx = 0;
    for (i, &s) in ss.iter().enumerate() {
        if let Some(r) = half(s) {
            if best.is_none_or(|bst| r < bst.0) {
                best = Some((r, f64::NEG_INFINITY, s));
                best_idx = i;
            }
        }
    }
    let Some(mut best) = best else {
        return Err(Error::DegenerateSplit);
    };
    // golden-section refinement between the neighbouring thresholds
    let lo = ss[best_idx.saturating_sub(1)];
    let hi = ss[(best_idx + 1).min(ss.len() - 1)];
    let f = |s: f64| half(s).unwrap_or(f64::INFINITY);
    let (s_opt, r_opt) = golden_min(lo, hi, f);
    if r_opt < best.0 {
        best = (r_opt, f64::NEG_INFINITY, s_opt);
    }

    if let Component::Composite(_) = dist {
        let coarse = 41;
        let pts: Vec<f64> = (0..coarse)
            .map(|i| a + (b - a) * i as f64 / (coarse - 1) as f64)
            .collect();
        for i in 1..coarse {
            for j in (i + 1)..(coarse - 1) {
                if let Some(r) = cr.ratio(pts[i], pts[j]) {
                    if r < best.0 {
                        best = (r, pts[i], pts[j]);
                    }
                }
            }
        }
    }
    Ok(GammaEstimate {
        value: best.0.max(0.0),
        provenance: Provenance::Quadrature,
        set: Some((best.1, best.2)),
    })
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

// ---------------------------------------------------------------------------
// b_max and the difficulty function

/// `max_m sup_x ∫ k_m(x,y) dP_m(y)` over the nodes inside each component's
/// support where its density is positive.
pub fn b_max(mixture: &Mixture, kernel: &Kernel, nodes: &[f64]) -> Result<f64> {
    let dens = MixtureDensities::new(kernel, mixture)?;
    let rule = GaussLegendre::new(GL_ORDER);
    let mut best: f64 = 0.0;
    for (m, c) in mixture.components().iter().enumerate() {
        let q = &dens.components[m];
        let (a, b) = c.support();
        let panel = panel_for(kernel, c);
        for &x in nodes {
            if x < a || x > b || c.density(x) <= 0.0 {
                continue;
            }
            let qx = q.q(x);
            let mut breaks = q.kinks();
            breaks.extend(kernel.kinks(x));
            let v = integrate_with(&rule, c, a, b, &breaks, panel, &|y| {
                let qy = q.q(y);
                if qy == 0.0 {
                    0.0
                } else {
                    kernel.eval(x, y) / qy
                }
            }) / qx;
            best = best.max(v);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub k: usize,
    pub s_max: Estimate,
    pub coupling: Estimate,
    pub gamma: GammaEstimate,
    pub w_min: f64,
    pub b_max: f64,
    pub phi: f64,
}

/// `φ = √K √(S + C)/(w_min Γ²)`.
pub fn difficulty_value(k: usize, s_max: f64, coupling: f64, w_min: f64, gamma: f64) -> f64 {
    (k as f64).sqrt() * (s_max + coupling).sqrt() / (w_min * gamma * gamma)
}

impl Diagnostics {
    pub fn recompute_phi(&self) -> f64 {
        difficulty_value(self.k, self.s_max.value, self.coupling.value, self.w_min, self.gamma.value)
    }

    /// `S_max + C`.
    pub fn overlap(&self) -> f64 {
        self.s_max.value + self.coupling.value
    }
}

/// The full parameter bundle; `nodes` is the grid on which `b_max` is
/// maximised.
pub fn difficulty(mixture: &Mixture, kernel: &Kernel, method: Method, nodes: &[f64]) -> Result<Diagnostics> {
    let s = s_max(mixture, kernel, method)?;
    let c = coupling(mixture, kernel, method)?;
    let gamma_method = match method {
        Method::Closed => GammaMethod::Auto,
        _ => GammaMethod::HalflineScan {
            thresholds: DEFAULT_THRESHOLDS,
        },
    };
    let g = gamma_min(mixture, kernel, gamma_method)?;
    let w_min = mixture.w_min();
    let b = b_max(mixture, kernel, nodes)?;
    let phi = difficulty_value(mixture.k(), s.value, c.value, w_min, g.value);
    Ok(Diagnostics {
        k: mixture.k(),
        s_max: s,
        coupling: c,
        gamma: g,
        w_min,
        b_max: b,
        phi,
    })
}

/// `φ_n(δ) = φ + (1/Γ²)(1/√n + δ)`.
pub fn phi_n(diag: &Diagnostics, n: usize, delta: f64) -> f64 {
    let g2 = diag.gamma.value * diag.gamma.value;
    diag.phi + (1.0 / (n as f64).sqrt() + delta) / g2
}

/// Whether `φ_n(δ) ≤ c Γ²`.
pub fn phi_n_condition(diag: &Diagnostics, n: usize, delta: f64, c: f64) -> bool {
    phi_n(diag, n, delta) <= c * diag.gamma.value * diag.gamma.value
}

// ---------------------------------------------------------------------------
// tail decay

#[derive(Clone, Debug)]
enum TailForm {
    Quadrature,
    Empirical { samples: Vec<(f64, usize)> },
}

/// `ψ(t) = Σ_m P_m[q_m²(X)/‖q_m‖ < t]` with `‖q_m‖` the `L²(P_m)` norm.
#[derive(Clone, Debug)]
pub struct TailDecay {
    components: Vec<Component>,
    densities: Vec<KernelizedDensity>,
    norms: Vec<f64>,
    form: TailForm,
}

impl TailDecay {
    pub fn quadrature(mixture: &Mixture, kernel: &Kernel) -> Result<Self> {
        let mut densities = Vec::new();
        let mut norms = Vec::new();
        for c in mixture.components() {
            let q = KernelizedDensity::new(kernel, c)?;
            let (a, b) = c.support();
            let norm_sq = integrate_against(c, a, b, &q.kinks(), panel_for(kernel, c), &|x| q.q_sq(x));
            norms.push(norm_sq.sqrt());
            densities.push(q);
        }
        Ok(Self {
            components: mixture.components().to_vec(),
            densities,
            norms,
            form: TailForm::Quadrature,
        })
    }

    /// Per-label sample fractions instead of exact masses; labels in `0..K`.
    pub fn empirical(mixture: &Mixture, kernel: &Kernel, samples: &[(f64, usize)]) -> Result<Self> {
        let mut t = Self::quadrature(mixture, kernel)?;
        t.form = TailForm::Empirical {
            samples: samples.to_vec(),
        };
        Ok(t)
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// `q_m²(x)/‖q_m‖`.
    pub fn level(&self, m: usize, x: f64) -> f64 {
        self.densities[m].q_sq(x) / self.norms[m]
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.form {
            TailForm::Quadrature => (0..self.components.len()).map(|m| self.sublevel_mass(m, t)).sum(),
            TailForm::Empirical { samples } => {
                let k = self.components.len();
                let mut counts = vec![0usize; k];
                let mut below = vec![0usize; k];
                for &(x, z) in samples {
                    counts[z] += 1;
                    if self.level(z, x) < t {
                        below[z] += 1;
                    }
                }
                (0..k)
                    .filter(|&m| counts[m] > 0)
                    .map(|m| below[m] as f64 / counts[m] as f64)
                    .sum()
            }
        }
    }

    /// `P_m[level < t]`: the level function is tabulated on a fine grid over
    /// the truncated support, sign changes are refined by bisection, and
    /// the mass beyond the truncation is assigned by the boundary value.
    fn sublevel_mass(&self, m: usize, t: f64) -> f64 {
        let c = &self.components[m];
        let (a, b) = c.support();
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
        let below: Vec<bool> = xs.iter().map(|&x| self.level(m, x) < t).collect();
        let mut mass = 0.0;
        if below[0] {
            mass += c.mass(f64::NEG_INFINITY, a);
        }
        if below[n - 1] {
            mass += c.mass(b, f64::INFINITY);
        }
        let mut start: Option<f64> = if below[0] { Some(a) } else { None };
        for i in 1..n {
            if below[i] != below[i - 1] {
                let g = |x: f64| self.level(m, x) - t;
                let root = bisect(xs[i - 1], xs[i], g);
                if below[i] {
                    start = Some(root);
                } else if let Some(s) = start.take() {
                    mass += c.mass(s, root);
                }
            }
        }
        if let Some(s) = start {
            mass += c.mass(s, b);
        }
        mass
    }
}

fn check_index(mixture: &Mixture, i: usize) -> Result<()> {
    if i < mixture.k() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: mixture.k(),
            found: i,
        })
    }
}
