//! Gauss–Legendre quadrature: plain rules, composite panels, and
//! endpoint-graded panel layouts for integrands with algebraic
//! endpoint singularities.

/// A Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2, "rule needs at least two nodes");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// ∫_a^b f(x) dx with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// ∫_a^b f with `panels` equal panels.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            total += self.integrate(a + p as f64 * h, a + (p + 1) as f64 * h, &mut f);
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, 0.0f64);
    for j in 0..n {
        let p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
    }
    let dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
    (p0, dp)
}

/// Panel edges on [0, 1], geometrically refined toward both endpoints so
/// that integrands with x^p or (1−x)^p endpoint behavior (p > −1, fractional)
/// integrate to near machine accuracy. `levels` halvings on each side.
pub fn graded_unit_edges(levels: usize) -> Vec<f64> {
    let mut edges = Vec::with_capacity(2 * levels + 2);
    edges.push(0.0);
    for k in (1..=levels).rev() {
        edges.push(0.5f64.powi(k as i32 + 1));
    }
    edges.push(0.5);
    for k in 1..=levels {
        edges.push(1.0 - 0.5f64.powi(k as i32 + 1));
    }
    edges.push(1.0);
    edges
}

/// Quadrature points over [0, 1] with endpoint grading: returns (points,
/// weights) ready for tensorization.
pub fn graded_unit_points(rule: &GaussLegendre, levels: usize) -> (Vec<f64>, Vec<f64>) {
    let edges = graded_unit_edges(levels);
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, w) in rule.nodes().iter().zip(rule.weights().iter()) {
            pts.push(mid + half * x);
            wts.push(w * half);
        }
    }
    (pts, wts)
}

/// Tensorized integral of `f` over [0,1]^dim on a shared 1-D point set.
pub fn tensor_unit_cube<F>(points: &[f64], weights: &[f64], dim: usize, mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    assert!((1..=3).contains(&dim), "tensor rule supports dim 1..=3");
    let n = points.len();
    let mut total = 0.0;
    match dim {
        1 => {
            for i in 0..n {
                total += weights[i] * f(&[points[i]]);
            }
        }
        2 => {
            for i in 0..n {
                for j in 0..n {
                    total += weights[i] * weights[j] * f(&[points[i], points[j]]);
                }
            }
        }
        _ => {
            for i in 0..n {
                let wi = weights[i];
                for j in 0..n {
                    let wij = wi * weights[j];
                    for k in 0..n {
                        total += wij * weights[k] * f(&[points[i], points[j], points[k]]);
                    }
                }
            }
        }
    }
    total
}
