use crate::{lit, to_f64, Error, Real, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureKind {
    Trapezoid,
    GaussLegendre,
}

/// Nodes and positive weights on a bounded interval.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> QuadratureRule<T> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).fold(T::zero(), |acc, (&x, &w)| acc + w * f(x))
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    fn extend(&mut self, other: QuadratureRule<T>) {
        self.nodes.extend(other.nodes);
        self.weights.extend(other.weights);
    }
}

/// `n`-point rule on `[a, b]`.
pub fn quadrature<T: Real>(kind: QuadratureKind, a: T, b: T, n: usize) -> Result<QuadratureRule<T>> {
    if !(a < b) || n < 2 {
        return Err(Error::BadInterval { a: to_f64(a), b: to_f64(b), n });
    }
    Ok(match kind {
        QuadratureKind::Trapezoid => trapezoid(a, b, n),
        QuadratureKind::GaussLegendre => gauss_legendre(a, b, n),
    })
}

fn trapezoid<T: Real>(a: T, b: T, n: usize) -> QuadratureRule<T> {
    let h = (b - a) / T::from_usize(n - 1).unwrap();
    let nodes = (0..n).map(|i| a + h * T::from_usize(i).unwrap()).collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { h * lit(0.5) } else { h })
        .collect();
    QuadratureRule { nodes, weights }
}

/// Newton iteration on the three-term recurrence of the Legendre polynomials.
fn gauss_legendre<T: Real>(a: T, b: T, n: usize) -> QuadratureRule<T> {
    let half = (b - a) * lit(0.5);
    let mid = (a + b) * lit(0.5);
    let nf = n as f64;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
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
        // x runs from +1 downwards; store ascending
        nodes[i] = mid - half * lit(x);
        nodes[n - 1 - i] = mid + half * lit(x);
        weights[i] = half * lit(w);
        weights[n - 1 - i] = half * lit(w);
    }
    QuadratureRule { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre with `n` nodes on each panel `[edges[k], edges[k+1]]`.
pub fn composite_gauss_legendre<T: Real>(edges: &[T], n: usize) -> Result<QuadratureRule<T>> {
    let mut rule = QuadratureRule { nodes: Vec::new(), weights: Vec::new() };
    for pair in edges.windows(2) {
        rule.extend(quadrature(QuadratureKind::GaussLegendre, pair[0], pair[1], n)?);
    }
    Ok(rule)
}
