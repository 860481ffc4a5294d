//! Product quadrature on `S^{2n-1}_s ⊂ ℂⁿ`.
//!
//! A point is written `ω_k = √t_k e^{iθ_k}` where `t` lies on the standard
//! simplex (uniformly distributed under the sphere measure) and the phases
//! are independent. Phases use the trapezoidal rule; the simplex uses
//! collapsed coordinates with Gauss-Legendre in each direction.

use std::f64::consts::PI;

use gauss_quad::GaussLegendre;
use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::sum::pairwise_sum_f64;

#[derive(Clone, Debug, PartialEq)]
pub struct SphereRule {
    n: usize,
    radius: f64,
    order: usize,
    /// Row-major: node `i` occupies `points[i*n..(i+1)*n]`.
    points: Vec<Complex64>,
    weights: Vec<f64>,
}

fn gauss_legendre_unit(count: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(count.max(2)).expect("degree >= 2");
    let mut out: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

// Simplex nodes (t_1..t_n) with weights summing to one, exact for
// polynomials in t of total degree <= degree.
fn simplex_rule(n: usize, degree: usize) -> Vec<(Vec<f64>, f64)> {
    if n == 1 {
        return vec![(vec![1.0], 1.0)];
    }
    let dims = n - 1;
    // Direction j (0-based) carries Jacobian factor (1-u_j)^{dims-1-j}.
    let per_dim: Vec<Vec<(f64, f64)>> = (0..dims)
        .map(|j| gauss_legendre_unit((degree + dims - 1 - j + 2) / 2))
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; dims];
    loop {
        let mut t = Vec::with_capacity(n);
        let mut rest = 1.0;
        let mut w = 1.0;
        for j in 0..dims {
            let (u, wu) = per_dim[j][idx[j]];
            t.push(rest * u);
            w *= wu * (1.0 - u).powi((dims - 1 - j) as i32);
            rest *= 1.0 - u;
        }
        t.push(rest);
        out.push((t, w));
        let mut k = dims;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < per_dim[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

impl SphereRule {
    /// Exact for every monomial `ω^α ω̄^β` with `|α| + |β| <= order`.
    pub fn build(n: usize, s: f64, order: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Contract("n must be at least 1".into()));
        }
        if order < 1 {
            return Err(Error::Contract("quadrature order must be at least 1".into()));
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Contract(format!("sphere radius must be positive, got {s}")));
        }
        let phases = order + 1;
        let simplex = simplex_rule(n, order / 2);
        let angle: Vec<Complex64> = (0..phases)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / phases as f64))
            .collect();
        let total_phase = phases.pow(n as u32);
        let mut points = Vec::with_capacity(simplex.len() * total_phase * n);
        let mut raw = Vec::with_capacity(simplex.len() * total_phase);
        for (t, wt) in &simplex {
            let mags: Vec<f64> = t.iter().map(|x| x.max(0.0).sqrt()).collect();
            for code in 0..total_phase {
                let mut c = code;
                for mag in &mags {
                    points.push(angle[c % phases] * (mag * s));
                    c /= phases;
                }
                raw.push(*wt);
            }
        }
        let total = pairwise_sum_f64(&raw);
        let weights = raw.into_iter().map(|w| w / total).collect();
        Ok(Self { n, radius: s, order, points, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[Complex64] {
        &self.points[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same rule on the sphere of radius `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let k = s / self.radius;
        Self {
            n: self.n,
            radius: s,
            order: self.order,
            points: self.points.iter().map(|p| p * k).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Header `n,s,order`, then `x1,y1,…,xn,yn,weight` per node. Floats use
    /// shortest round-trip formatting so the dump reloads bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},{}\n", self.n, self.radius, self.order);
        for i in 0..self.len() {
            let mut row: Vec<String> = Vec::with_capacity(2 * self.n + 1);
            for c in self.node(i) {
                row.push(format!("{}", c.re));
                row.push(format!("{}", c.im));
            }
            row.push(format!("{}", self.weights[i]));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, message: &str| Error::Parse { line: line + 1, message: message.to_string() };
        let (h, header) = lines.next().ok_or_else(|| bad(0, "empty rule file"))?;
        let head: Vec<&str> = header.split(',').map(str::trim).collect();
        if head.len() != 3 {
            return Err(bad(h, "header must be `n,s,order`"));
        }
        let n: usize = head[0].parse().map_err(|_| bad(h, "invalid n"))?;
        let radius: f64 = head[1].parse().map_err(|_| bad(h, "invalid s"))?;
        let order: usize = head[2].parse().map_err(|_| bad(h, "invalid order"))?;
        if n == 0 {
            return Err(bad(h, "n must be at least 1"));
        }
        let mut points = Vec::new();
        let mut weights = Vec::new();
        for (i, line) in lines {
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad(i, "invalid number"))?;
            if vals.len() != 2 * n + 1 {
                return Err(bad(i, &format!("expected {} fields", 2 * n + 1)));
            }
            for k in 0..n {
                points.push(Complex64::new(vals[2 * k], vals[2 * k + 1]));
            }
            weights.push(vals[2 * n]);
        }
        Ok(Self { n, radius, order, points, weights })
    }
}

pub fn build_sphere_rule(n: usize, s: f64, order: usize) -> Result<SphereRule> {
    SphereRule::build(n, s, order)
}
