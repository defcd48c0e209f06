//! Quadrature rules: composite Newton–Cotes grids (used wherever integrals
//! must be discretized on a shared set of nodes) and piecewise
//! Gauss–Legendre (used for one-off integrals of piecewise-smooth functions
//! with known kinks).

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Rule {
    Trapezoid,
    #[default]
    Simpson,
}

/// Nodes and positive weights of a composite rule on a closed interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: (f64, f64),
    rule: Rule,
}

/// Equispaced composite grid with `n_nodes` nodes on `[a, b]`.
pub fn make_grid(domain: (f64, f64), n_nodes: usize, rule: Rule) -> Result<QuadratureGrid> {
    let (a, b) = domain;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::BadDomain { a, b });
    }
    if n_nodes < 3 {
        return Err(Error::BadNodeCount {
            n: n_nodes,
            reason: "at least 3 nodes required",
        });
    }
    if rule == Rule::Simpson && n_nodes.is_multiple_of(2) {
        return Err(Error::BadNodeCount {
            n: n_nodes,
            reason: "Simpson's rule needs an odd node count",
        });
    }
    let m = n_nodes - 1;
    let h = (b - a) / m as f64;
    let nodes: Vec<f64> = (0..n_nodes)
        .map(|i| if i == m { b } else { a + i as f64 * h })
        .collect();
    let weights = match rule {
        Rule::Trapezoid => (0..n_nodes)
            .map(|i| if i == 0 || i == m { 0.5 * h } else { h })
            .collect(),
        Rule::Simpson => (0..n_nodes)
            .map(|i| {
                if i == 0 || i == m {
                    h / 3.0
                } else if i % 2 == 1 {
                    4.0 * h / 3.0
                } else {
                    2.0 * h / 3.0
                }
            })
            .collect(),
    };
    Ok(QuadratureGrid {
        nodes,
        weights,
        domain,
        rule,
    })
}

impl QuadratureGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        (self.domain.1 - self.domain.0) / (self.len() - 1) as f64
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Weighted sum of values tabulated on the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        values.iter().zip(&self.weights).map(|(v, w)| v * w).sum()
    }

    /// Same rule with the step halved (`2n − 1` nodes).
    pub fn refined(&self) -> QuadratureGrid {
        make_grid(self.domain, 2 * self.len() - 1, self.rule)
            .expect("refining a valid grid yields a valid grid")
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_order`, found by Newton's method from the
    /// Chebyshev-like initial guesses.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
    }

    /// Integral over `[a, b]` split at every breakpoint inside the interval
    /// and further into panels no longer than `max_panel`.
    pub fn integrate_piecewise(
        &self,
        a: f64,
        b: f64,
        breakpoints: &[f64],
        max_panel: f64,
        f: impl Fn(f64) -> f64,
    ) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&c| c > a && c < b)
            .collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let panels = ((hi - lo) / max_panel).ceil().max(1.0) as usize;
            let step = (hi - lo) / panels as f64;
            for p in 0..panels {
                let p_lo = lo + p as f64 * step;
                let p_hi = if p + 1 == panels { hi } else { p_lo + step };
                total += self.integrate(p_lo, p_hi, &f);
            }
        }
        total
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
