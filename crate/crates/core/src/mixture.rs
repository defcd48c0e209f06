//! Finite mixtures of one-dimensional component distributions, their
//! samplers, and the worked-example mixtures as presets.

use crate::error::{Error, Result};
use crate::kernel::Kernel;
use crate::numerics::{normal_cdf, normal_pdf, Rng};

/// Gaussian components are truncated at this many standard deviations for
/// every integral.
pub const GAUSSIAN_TRUNCATION: f64 = 8.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Gaussian { mu: f64, sigma: f64 },
    /// Density `1 − |x − μ|` on `(μ − 1, μ + 1)`.
    Triangular { mu: f64 },
    Uniform { a: f64, b: f64 },
    /// Weighted combination of other components (weights sum to one).
    Composite(Vec<(f64, Component)>),
}

impl Component {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::BadParameter {
                name: "sigma",
                value: sigma,
                reason: "standard deviation must be positive",
            });
        }
        Ok(Component::Gaussian { mu, sigma })
    }

    pub fn triangular(mu: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        Ok(Component::Triangular { mu })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_finite("a", a)?;
        check_finite("b", b)?;
        if a >= b {
            return Err(Error::BadParameter {
                name: "b",
                value: b,
                reason: "uniform support needs a < b",
            });
        }
        Ok(Component::Uniform { a, b })
    }

    pub fn composite(parts: Vec<(f64, Component)>) -> Result<Self> {
        check_weights(parts.iter().map(|p| p.0))?;
        Ok(Component::Composite(parts))
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            Component::Gaussian { mu, sigma } => normal_pdf((x - mu) / sigma) / sigma,
            Component::Triangular { mu } => (1.0 - (x - mu).abs()).max(0.0),
            Component::Uniform { a, b } => {
                if x >= *a && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Component::Composite(parts) => parts.iter().map(|(w, c)| w * c.density(x)).sum(),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Component::Gaussian { mu, sigma } => normal_cdf((x - mu) / sigma),
            Component::Triangular { mu } => triangular_cdf(x - mu),
            Component::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Component::Composite(parts) => parts.iter().map(|(w, c)| w * c.cdf(x)).sum(),
        }
    }

    /// `P(lo < X ≤ hi)`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        match self {
            // upper tail through the complementary function to keep precision
            Component::Gaussian { mu, sigma } => {
                let (a, b) = ((lo - mu) / sigma, (hi - mu) / sigma);
                if a > 0.0 {
                    normal_cdf(-a) - normal_cdf(-b)
                } else {
                    normal_cdf(b) - normal_cdf(a)
                }
            }
            Component::Composite(parts) => parts.iter().map(|(w, c)| w * c.mass(lo, hi)).sum(),
            _ => self.cdf(hi) - self.cdf(lo),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Component::Gaussian { mu, .. } | Component::Triangular { mu } => *mu,
            Component::Uniform { a, b } => 0.5 * (a + b),
            Component::Composite(parts) => parts.iter().map(|(w, c)| w * c.mean()).sum(),
        }
    }

    /// Closed support, with Gaussians truncated at `μ ± 8σ`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Component::Gaussian { mu, sigma } => (
                mu - GAUSSIAN_TRUNCATION * sigma,
                mu + GAUSSIAN_TRUNCATION * sigma,
            ),
            Component::Triangular { mu } => (mu - 1.0, mu + 1.0),
            Component::Uniform { a, b } => (*a, *b),
            Component::Composite(parts) => parts
                .iter()
                .map(|(_, c)| c.support())
                .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, s| {
                    (acc.0.min(s.0), acc.1.max(s.1))
                }),
        }
    }

    /// Disjoint intervals whose union is the support.
    pub fn support_intervals(&self) -> Vec<(f64, f64)> {
        match self {
            Component::Composite(parts) => {
                let mut ivs: Vec<(f64, f64)> =
                    parts.iter().flat_map(|(_, c)| c.support_intervals()).collect();
                merge_intervals(&mut ivs)
            }
            other => vec![other.support()],
        }
    }

    /// Points where the density is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Component::Gaussian { .. } => Vec::new(),
            Component::Triangular { mu } => vec![mu - 1.0, *mu, mu + 1.0],
            Component::Uniform { a, b } => vec![*a, *b],
            Component::Composite(parts) => parts.iter().flat_map(|(_, c)| c.kinks()).collect(),
        }
    }

    /// Smallest length scale on which the density varies.
    pub fn length_scale(&self) -> f64 {
        match self {
            Component::Gaussian { sigma, .. } => *sigma,
            Component::Triangular { .. } => 1.0,
            Component::Uniform { a, b } => b - a,
            Component::Composite(parts) => parts
                .iter()
                .map(|(_, c)| c.length_scale())
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// One draw. Gaussian: `μ + σ·Z` with `Z` from Box–Muller (two uniforms);
    /// triangular: inverse CDF of one uniform; uniform: `a + (b − a)u`;
    /// composite: categorical part index, then a draw from that part.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            Component::Gaussian { mu, sigma } => mu + sigma * rng.gaussian(),
            Component::Triangular { mu } => mu + triangular_inverse_cdf(rng.uniform()),
            Component::Uniform { a, b } => a + (b - a) * rng.uniform(),
            Component::Composite(parts) => {
                let weights: Vec<f64> = parts.iter().map(|p| p.0).collect();
                parts[rng.categorical(&weights)].1.sample(rng)
            }
        }
    }

    /// Largest `x` with `P(X ≤ x) ≤ p`, by bisection on the CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        let (lo, hi) = self.support();
        crate::numerics::bisect(lo, hi, |x| self.cdf(x) - p)
    }

    pub fn describe(&self) -> String {
        match self {
            Component::Gaussian { mu, sigma } => format!("N({mu}, {sigma}^2)"),
            Component::Triangular { mu } => format!("T({mu})"),
            Component::Uniform { a, b } => format!("U({a}, {b})"),
            Component::Composite(parts) => parts
                .iter()
                .map(|(w, c)| format!("{w}*{}", c.describe()))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }
}

/// CDF of the triangular density centred at zero.
fn triangular_cdf(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t <= 0.0 {
        0.5 * (t + 1.0) * (t + 1.0)
    } else if t < 1.0 {
        1.0 - 0.5 * (1.0 - t) * (1.0 - t)
    } else {
        1.0
    }
}

/// Inverse of [`triangular_cdf`]: `−1 + √(2u)` for `u < ½`, else
/// `1 − √(2(1 − u))`.
pub fn triangular_inverse_cdf(u: f64) -> f64 {
    if u < 0.5 {
        -1.0 + (2.0 * u).sqrt()
    } else {
        1.0 - (2.0 * (1.0 - u)).sqrt()
    }
}

fn merge_intervals(ivs: &mut [(f64, f64)]) -> Vec<(f64, f64)> {
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for &(a, b) in ivs.iter() {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name,
            value: v,
            reason: "must be finite",
        })
    }
}

fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut sum = 0.0;
    let mut count = 0;
    for w in weights {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::BadParameter {
                name: "weight",
                value: w,
                reason: "weights must be strictly positive",
            });
        }
        sum += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::BadParameter {
            name: "weights",
            value: 0.0,
            reason: "at least one component is required",
        });
    }
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadParameter {
            name: "weights",
            value: sum,
            reason: "weights must sum to one",
        });
    }
    Ok(())
}

/// `P̄ = Σ_m w_m P_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    components: Vec<Component>,
    weights: Vec<f64>,
}

/// A draw with its latent component label (`0..K`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledSample {
    pub x: f64,
    pub z: usize,
}

impl Mixture {
    pub fn new(components: Vec<Component>, weights: Vec<f64>) -> Result<Self> {
        if components.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: components.len(),
                right: weights.len(),
            });
        }
        check_weights(weights.iter().copied())?;
        Ok(Self {
            components,
            weights,
        })
    }

    pub fn equal_weights(components: Vec<Component>) -> Result<Self> {
        let k = components.len();
        Self::new(components, vec![1.0 / k as f64; k])
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, m: usize) -> &Component {
        &self.components[m]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn w_min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The mixture viewed as a single composite distribution.
    pub fn as_component(&self) -> Component {
        if self.k() == 1 {
            return self.components[0].clone();
        }
        Component::Composite(
            self.weights
                .iter()
                .copied()
                .zip(self.components.iter().cloned())
                .collect(),
        )
    }

    pub fn density(&self, x: f64) -> f64 {
        self.components
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.density(x))
            .sum()
    }

    /// Union of the (truncated) component supports as one interval.
    pub fn support(&self) -> (f64, f64) {
        self.as_component().support()
    }

    pub fn kinks(&self) -> Vec<f64> {
        self.components.iter().flat_map(Component::kinks).collect()
    }

    /// `n` i.i.d. labeled draws: a categorical label (one uniform) followed
    /// by a draw from that component.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Vec<LabeledSample> {
        (0..n)
            .map(|_| {
                let z = rng.categorical(&self.weights);
                LabeledSample {
                    x: self.components[z].sample(rng),
                    z,
                }
            })
            .collect()
    }

    pub fn describe(&self) -> String {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| format!("{w}*[{}]", c.describe()))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// A mixture bundled with the kernel it is analysed under.
#[derive(Clone, Debug, PartialEq)]
pub struct Preset {
    pub name: String,
    pub mixture: Mixture,
    pub kernel: Kernel,
}

fn check_triangular_nu(nu: f64) -> Result<()> {
    if nu > 0.0 && nu < 1.0 {
        Ok(())
    } else {
        Err(Error::BadParameter {
            name: "nu",
            value: nu,
            reason: "box bandwidth must lie in (0, 1)",
        })
    }
}

/// `½T₀ + ½T_μ` with the box kernel of bandwidth `ν`.
pub fn triangular_pair(mu: f64, nu: f64) -> Result<Preset> {
    check_triangular_nu(nu)?;
    Ok(Preset {
        name: format!("triangular_pair(mu={mu}, nu={nu})"),
        mixture: Mixture::equal_weights(vec![
            Component::triangular(0.0)?,
            Component::triangular(mu)?,
        ])?,
        kernel: Kernel::uniform_box(nu)?,
    })
}

/// `½N(0,1) + ½N(μ,1)` with the Gaussian kernel of bandwidth `ν`.
pub fn gaussian_pair(mu: f64, nu: f64) -> Result<Preset> {
    Ok(Preset {
        name: format!("gaussian_pair(mu={mu}, nu={nu})"),
        mixture: Mixture::equal_weights(vec![
            Component::gaussian(0.0, 1.0)?,
            Component::gaussian(mu, 1.0)?,
        ])?,
        kernel: Kernel::gaussian(nu)?,
    })
}

/// The bimodal component `½T₀ + ½T_μ`.
pub fn bimodal_component(mu: f64) -> Result<Component> {
    Component::composite(vec![
        (0.5, Component::triangular(0.0)?),
        (0.5, Component::triangular(mu)?),
    ])
}

/// `½(½T₀ + ½T_μ) + ½T_{2μ}` with the box kernel.
pub fn triangular_bad(mu: f64, nu: f64) -> Result<Preset> {
    check_triangular_nu(nu)?;
    Ok(Preset {
        name: format!("triangular_bad(mu={mu}, nu={nu})"),
        mixture: Mixture::equal_weights(vec![
            bimodal_component(mu)?,
            Component::triangular(2.0 * mu)?,
        ])?,
        kernel: Kernel::uniform_box(nu)?,
    })
}

/// `½U(1,2) + ½U(2+δ, 3+δ)` with the linear kernel.
pub fn uniform_linear(delta: f64) -> Result<Preset> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::BadParameter {
            name: "delta",
            value: delta,
            reason: "gap must be nonnegative",
        });
    }
    Ok(Preset {
        name: format!("uniform_linear(delta={delta})"),
        mixture: Mixture::equal_weights(vec![
            Component::uniform(1.0, 2.0)?,
            Component::uniform(2.0 + delta, 3.0 + delta)?,
        ])?,
        kernel: Kernel::linear(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_grid, Rule};
    use approx::assert_abs_diff_eq;

    #[test]
    fn triangular_density_shape() {
        let t = Component::triangular(2.0).unwrap();
        assert_eq!(t.density(2.0), 1.0);
        assert_abs_diff_eq!(t.density(1.5), 0.5);
        assert_abs_diff_eq!(t.density(2.25), 0.75);
        assert_eq!(t.density(3.5), 0.0);
    }

    #[test]
    fn densities_integrate_to_one() {
        let comps = [
            Component::gaussian(1.0, 0.7).unwrap(),
            Component::triangular(-3.0).unwrap(),
            Component::uniform(0.0, 4.0).unwrap(),
            bimodal_component(3.0).unwrap(),
        ];
        for c in comps {
            let (a, b) = c.support();
            let gl = crate::numerics::GaussLegendre::new(16);
            let mass = gl.integrate_piecewise(a, b, &c.kinks(), 0.25, |x| c.density(x));
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
            assert_abs_diff_eq!(c.mass(a - 1.0, b + 1.0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mixture_density_examples() {
        let p = triangular_pair(3.0, 0.05).unwrap();
        assert_abs_diff_eq!(p.mixture.density(0.0), 0.5);
        let g = gaussian_pair(6.0, 2.0).unwrap();
        assert!(g.mixture.density(1e3) == 0.0);
        let expected = 0.5 * normal_pdf(3.0) + 0.5 * normal_pdf(-3.0);
        assert_abs_diff_eq!(g.mixture.density(3.0), expected, epsilon = 1e-16);
        // independent oracle through the derivative of the error function
        let erf_deriv = 2.0 / std::f64::consts::PI.sqrt() * (-4.5f64).exp();
        assert_abs_diff_eq!(g.mixture.density(3.0), erf_deriv / (2.0 * 2f64.sqrt()), epsilon = 1e-16);
    }

    #[test]
    fn composite_is_weighted_sum() {
        let c = bimodal_component(2.5).unwrap();
        for x in [-0.5, 0.3, 2.0, 2.6, 5.0] {
            let parts = 0.5 * Component::Triangular { mu: 0.0 }.density(x)
                + 0.5 * Component::Triangular { mu: 2.5 }.density(x);
            assert_eq!(c.density(x), parts);
        }
    }

    #[test]
    fn weights_validated() {
        let c = vec![Component::triangular(0.0).unwrap(), Component::triangular(1.0).unwrap()];
        assert!(Mixture::new(c.clone(), vec![0.5, 0.6]).is_err());
        assert!(Mixture::new(c.clone(), vec![1.0, 0.0]).is_err());
        assert!(Mixture::new(c, vec![1.0]).is_err());
        assert!(triangular_pair(3.0, 1.5).is_err());
    }

    #[test]
    fn label_frequencies() {
        let g = gaussian_pair(6.0, 2.0).unwrap();
        let mut rng = Rng::new(4);
        let s = g.mixture.sample(100_000, &mut rng);
        let frac = s.iter().filter(|d| d.z == 0).count() as f64 / 1e5;
        assert!((frac - 0.5).abs() < 0.01);
    }

    #[test]
    fn single_component_labels() {
        let m = Mixture::new(vec![Component::triangular(0.0).unwrap()], vec![1.0]).unwrap();
        let s = m.sample(100, &mut Rng::new(1));
        assert!(s.iter().all(|d| d.z == 0 && d.x > -1.0 && d.x < 1.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = triangular_bad(3.0, 0.05).unwrap().mixture;
        assert_eq!(m.sample(500, &mut Rng::new(8)), m.sample(500, &mut Rng::new(8)));
    }

    #[test]
    fn triangular_inverse_cdf_roundtrip() {
        for i in 0..100 {
            let u = i as f64 / 100.0;
            let x = triangular_inverse_cdf(u);
            assert_abs_diff_eq!(triangular_cdf(x), u, epsilon = 1e-14);
        }
    }

    #[test]
    fn histogram_matches_density() {
        let mix = triangular_bad(2.5, 0.05).unwrap().mixture;
        let n = 1_000_000;
        let samples = mix.sample(n, &mut Rng::new(12));
        let (a, b) = mix.support();
        let bins = 50;
        let width = (b - a) / bins as f64;
        let mut counts = vec![0usize; bins];
        for s in &samples {
            let i = (((s.x - a) / width) as usize).min(bins - 1);
            counts[i] += 1;
        }
        let max_density = 0.5;
        let tol = 3.0 * (max_density / (n as f64 * width)).sqrt();
        let grid = make_grid((0.0, width), 41, Rule::Simpson).unwrap();
        for (i, &c) in counts.iter().enumerate() {
            let lo = a + i as f64 * width;
            let expected = grid.integrate(|t| mix.density(lo + t)) / width;
            let empirical = c as f64 / (n as f64 * width);
            assert!((empirical - expected).abs() <= tol, "bin {i}: {empirical} vs {expected}");
        }
    }

    #[test]
    fn support_intervals_of_bimodal() {
        let c = bimodal_component(3.0).unwrap();
        assert_eq!(c.support_intervals(), vec![(-1.0, 1.0), (2.0, 4.0)]);
        let touching = bimodal_component(1.5).unwrap();
        assert_eq!(touching.support_intervals(), vec![(-1.0, 2.5)]);
    }
}
