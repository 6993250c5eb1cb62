//! Discretization of the variational problem: mesh construction, the
//! discretized objective Ψ, its gradient (the stationarity residual), and the
//! discrete fractional Euler–Lagrange residual.

use crate::error::{Error, Result};
use crate::fracnum::{gl_left, GridSamples};
use crate::model::{Trajectory, VariationalProblem};
use crate::special::GlWeights;

/// Equispaced mesh a = t_0 < t_1 < … < t_n = b with step h = (b − a)/n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Mesh {
    /// Builds a mesh with n ≥ 2 subintervals over [a, b], b > a.
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain(format!(
                "mesh endpoints must be finite, got [{a}, {b}]"
            )));
        }
        if !(b > a) {
            return Err(Error::Domain(format!(
                "mesh endpoints must satisfy b > a, got [{a}, {b}]"
            )));
        }
        if n < 2 {
            return Err(Error::Domain(format!(
                "mesh needs at least 2 subintervals, got {n}"
            )));
        }
        let h = (b - a) / n as f64;
        Ok(Mesh { a, b, n, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Step size h.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Node t_i; the last node is b itself, not an accumulated sum.
    pub fn node(&self, i: usize) -> f64 {
        if i == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    /// All nodes t_0..t_n.
    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }
}

/// A variational problem paired with a mesh and a weight table covering it.
pub struct DiscretizedProblem<'p> {
    problem: &'p VariationalProblem,
    mesh: Mesh,
    weights: GlWeights,
}

struct NodePartials {
    d_x: Vec<f64>,
    d_dax: Vec<f64>,
    d_xdot: Vec<f64>,
}

impl<'p> DiscretizedProblem<'p> {
    /// Discretizes `problem` on n subintervals, precomputing the weights.
    pub fn new(problem: &'p VariationalProblem, n: usize) -> Result<Self> {
        let mesh = Mesh::new(problem.a(), problem.b(), n)?;
        let weights = GlWeights::new(problem.alpha(), n)?;
        Ok(DiscretizedProblem {
            problem,
            mesh,
            weights,
        })
    }

    pub fn problem(&self) -> &VariationalProblem {
        self.problem
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn weights(&self) -> &GlWeights {
        &self.weights
    }

    /// Prepends xa and appends xb to the interior unknowns.
    pub fn full_values(&self, interior: &[f64]) -> Result<Vec<f64>> {
        let m = self.mesh.n() - 1;
        if interior.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: interior.len(),
            });
        }
        let mut values = Vec::with_capacity(self.mesh.n() + 1);
        values.push(self.problem.xa());
        values.extend_from_slice(interior);
        values.push(self.problem.xb());
        Ok(values)
    }

    fn node_partials(&self, values: &[f64]) -> Result<NodePartials> {
        let n = self.mesh.n();
        let h = self.mesh.h();
        let lagrangian = self.problem.lagrangian();
        let samples = GridSamples::new(h, values.to_vec())?;
        let mut d_x = vec![0.0; n + 1];
        let mut d_dax = vec![0.0; n + 1];
        let mut d_xdot = vec![0.0; n + 1];
        for j in 1..=n {
            let t = self.mesh.node(j);
            let dax = gl_left(&samples, &self.weights, j)?;
            let xdot = (values[j] - values[j - 1]) / h;
            d_x[j] = lagrangian.d_x(t, values[j], dax, xdot);
            d_dax[j] = lagrangian.d_dax(t, values[j], dax, xdot);
            if lagrangian.uses_xdot() {
                d_xdot[j] = lagrangian.d_xdot(t, values[j], dax, xdot);
            }
        }
        Ok(NodePartials { d_x, d_dax, d_xdot })
    }

    /// Discretized objective
    /// Ψ(x) = Σ_{i=1}^{n} h·L(tᵢ, xᵢ, gl_left(i), (xᵢ − xᵢ₋₁)/h)
    /// with the boundary values taken from the problem (right-endpoint
    /// rectangle quadrature).
    pub fn psi(&self, interior: &[f64]) -> Result<f64> {
        let values = self.full_values(interior)?;
        let n = self.mesh.n();
        let h = self.mesh.h();
        let lagrangian = self.problem.lagrangian();
        let samples = GridSamples::new(h, values.clone())?;
        let mut sum = 0.0;
        for j in 1..=n {
            let t = self.mesh.node(j);
            let dax = gl_left(&samples, &self.weights, j)?;
            let xdot = (values[j] - values[j - 1]) / h;
            sum += h * lagrangian.eval(t, values[j], dax, xdot);
        }
        Ok(sum)
    }

    /// Gradient of Ψ with respect to the interior unknowns:
    /// Fᵢ = h·d_x[i] + h^{1−α} Σ_{k=0}^{n−i} w_k·d_dax[i+k]
    ///      + (d_xdot[i] − d_xdot[i+1]),   i = 1..n−1,
    /// where [j] denotes evaluation at (tⱼ, xⱼ, gl_left(j), (xⱼ−xⱼ₋₁)/h).
    /// The solvers drive F to zero.
    pub fn stationarity_residual(&self, interior: &[f64]) -> Result<Vec<f64>> {
        let values = self.full_values(interior)?;
        let partials = self.node_partials(&values)?;
        let n = self.mesh.n();
        let h = self.mesh.h();
        let uses_xdot = self.problem.lagrangian().uses_xdot();
        let h_pow = h.powf(1.0 - self.weights.alpha());
        let w = self.weights.weights();
        let mut residual = Vec::with_capacity(n - 1);
        for i in 1..n {
            let conv: f64 = w[..=n - i]
                .iter()
                .zip(&partials.d_dax[i..])
                .map(|(weight, partial)| weight * partial)
                .sum();
            let mut f = h * partials.d_x[i] + h_pow * conv;
            if uses_xdot {
                f += partials.d_xdot[i] - partials.d_xdot[i + 1];
            }
            residual.push(f);
        }
        Ok(residual)
    }

    /// Discrete fractional Euler–Lagrange residual on a full trajectory:
    /// Rᵢ = d_x[i] + h^{−α} Σ_{k=0}^{n−i} w_k·d_dax[i+k]
    ///      − (d_xdot[i+1] − d_xdot[i])/h,   i = 1..n−1.
    /// The middle term is the right-GL operator applied to the sampled
    /// function j ↦ d_dax[j]; note Rᵢ = Fᵢ/h.
    pub fn el_residual(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = self.mesh.n();
        if values.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                actual: values.len(),
            });
        }
        let partials = self.node_partials(values)?;
        let h = self.mesh.h();
        let uses_xdot = self.problem.lagrangian().uses_xdot();
        let h_alpha = h.powf(self.weights.alpha());
        let w = self.weights.weights();
        let mut residual = Vec::with_capacity(n - 1);
        for i in 1..n {
            let conv: f64 = w[..=n - i]
                .iter()
                .zip(&partials.d_dax[i..])
                .map(|(weight, partial)| weight * partial)
                .sum();
            let mut r = partials.d_x[i] + conv / h_alpha;
            if uses_xdot {
                r -= (partials.d_xdot[i + 1] - partials.d_xdot[i]) / h;
            }
            residual.push(r);
        }
        Ok(residual)
    }
}

/// Straight line between the boundary values: xᵢ = xa + (xb − xa)·i/n.
pub fn linear_interp_trajectory(problem: &VariationalProblem, mesh: &Mesh) -> Trajectory {
    let n = mesh.n();
    let values = (0..=n)
        .map(|i| {
            if i == 0 {
                problem.xa()
            } else if i == n {
                problem.xb()
            } else {
                problem.xa() + (problem.xb() - problem.xa()) * i as f64 / n as f64
            }
        })
        .collect();
    Trajectory::new(*mesh, values).unwrap()
}
