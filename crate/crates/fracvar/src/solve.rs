//! Solvers for the stationarity system F(x) = 0: a linear path for affine
//! residuals (quadratic Lagrangians) and damped Newton with a
//! finite-difference Jacobian otherwise.

use crate::assemble::{linear_interp_trajectory, DiscretizedProblem};
use crate::error::{Error, Result};
use crate::model::{Trajectory, VariationalProblem};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::fmt;
use std::time::Instant;

/// Which solver path to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcePath {
    /// Probe the residual for affinity and dispatch accordingly.
    #[default]
    Auto,
    Linear,
    Newton,
}

/// Path a solve actually took.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolvePath {
    Linear,
    Newton,
}

impl fmt::Display for SolvePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolvePath::Linear => write!(f, "linear"),
            SolvePath::Newton => write!(f, "newton"),
        }
    }
}

/// Tuning knobs for the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Success threshold on ‖F‖∞.
    pub tol_residual: f64,
    /// Iteration cap for the Newton path.
    pub max_newton_iters: usize,
    /// Base step for the finite-difference Jacobian, scaled by max(1, |xᵢ|).
    pub fd_jacobian_step: f64,
    /// Smallest damping factor tried before declaring a stall.
    pub damping_min: f64,
    /// Path selection override.
    pub force_path: ForcePath,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol_residual: 1e-10,
            max_newton_iters: 100,
            fd_jacobian_step: 1e-7,
            damping_min: 1.0 / 1024.0,
            force_path: ForcePath::Auto,
        }
    }
}

/// Outcome of a successful solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub trajectory: Trajectory,
    pub residual_inf_norm: f64,
    /// Accepted Newton steps; 0 on the linear path.
    pub iterations: usize,
    pub path: SolvePath,
    /// Wall time of the numeric work, excluding I/O.
    pub wall_seconds: f64,
    /// Max-norm error against the exact solution over interior nodes,
    /// when the problem carries one.
    pub error_vs_exact: Option<f64>,
}

/// Dense square matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    /// Infinity norm: largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum())
            .fold(0.0, f64::max)
    }

    /// True when every entry off the three central diagonals is at most
    /// `tol` in magnitude.
    pub fn is_tridiagonal(&self, tol: f64) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                if i.abs_diff(j) > 1 && self.get(i, j).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    let mut acc: f64 = 0.0;
    for &value in v {
        if !value.is_finite() {
            return f64::INFINITY;
        }
        acc = acc.max(value.abs());
    }
    acc
}

const SINGULARITY_RELATIVE_PIVOT: f64 = 1e-13;
const TRIDIAGONAL_TOL: f64 = 1e-14;

struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

fn lu_factor(a: &DenseMatrix) -> Result<LuFactors> {
    let n = a.n();
    let threshold = SINGULARITY_RELATIVE_PIVOT * a.inf_norm();
    let mut lu = a.data.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = lu[col * n + col].abs();
        for row in col + 1..n {
            let candidate = lu[row * n + col].abs();
            if candidate > pivot_val {
                pivot_val = candidate;
                pivot_row = row;
            }
        }
        if !(pivot_val > threshold) {
            return Err(Error::Singular { pivot: col });
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap(col * n + j, pivot_row * n + j);
            }
            perm.swap(col, pivot_row);
        }
        let pivot = lu[col * n + col];
        for row in col + 1..n {
            let factor = lu[row * n + col] / pivot;
            lu[row * n + col] = factor;
            for j in col + 1..n {
                lu[row * n + j] -= factor * lu[col * n + j];
            }
        }
    }
    Ok(LuFactors { n, lu, perm })
}

fn lu_solve(factors: &LuFactors, b: &[f64]) -> Vec<f64> {
    let n = factors.n;
    let mut x: Vec<f64> = factors.perm.iter().map(|&p| b[p]).collect();
    for i in 1..n {
        for j in 0..i {
            x[i] -= factors.lu[i * n + j] * x[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= factors.lu[i * n + j] * x[j];
        }
        x[i] /= factors.lu[i * n + i];
    }
    x
}

fn thomas_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n();
    let threshold = SINGULARITY_RELATIVE_PIVOT * a.inf_norm();
    let mut diag: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut rhs = b.to_vec();
    for i in 0..n {
        if !(diag[i].abs() > threshold) {
            return Err(Error::Singular { pivot: i });
        }
        if i + 1 < n {
            let factor = a.get(i + 1, i) / diag[i];
            diag[i + 1] -= factor * a.get(i, i + 1);
            rhs[i + 1] -= factor * rhs[i];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let upper = if i + 1 < n {
            a.get(i, i + 1) * x[i + 1]
        } else {
            0.0
        };
        x[i] = (rhs[i] - upper) / diag[i];
    }
    Ok(x)
}

/// Probes whether the stationarity residual is affine in the unknowns:
/// F(x+y) − F(x) − F(y) + F(0) must vanish (within 1e−9·(1 + ‖F(0)‖∞))
/// for three independent random probe pairs.
pub fn detect_affine(dp: &DiscretizedProblem) -> bool {
    let m = dp.mesh().n() - 1;
    let Ok(f0) = dp.stationarity_residual(&vec![0.0; m]) else {
        return false;
    };
    let tol = 1e-9 * (1.0 + inf_norm(&f0));
    let mut rng = StdRng::seed_from_u64(0x5EED_AFF1);
    for _ in 0..3 {
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let (Ok(fx), Ok(fy), Ok(fxy)) = (
            dp.stationarity_residual(&x),
            dp.stationarity_residual(&y),
            dp.stationarity_residual(&xy),
        ) else {
            return false;
        };
        let defect = (0..m)
            .map(|i| (fxy[i] - fx[i] - fy[i] + f0[i]).abs())
            .fold(0.0, f64::max);
        if !(defect <= tol) {
            return false;
        }
    }
    true
}

/// Builds the linear system A·x = b equivalent to F(x) = 0 for affine F,
/// by column probing: A's j-th column is F(eⱼ) − F(0), b = −F(0).
pub fn assemble_linear(dp: &DiscretizedProblem) -> Result<(DenseMatrix, Vec<f64>)> {
    if !detect_affine(dp) {
        return Err(Error::NotAffine);
    }
    let m = dp.mesh().n() - 1;
    let f0 = dp.stationarity_residual(&vec![0.0; m])?;
    let mut a = DenseMatrix::zeros(m);
    let mut probe = vec![0.0; m];
    for j in 0..m {
        probe[j] = 1.0;
        let fj = dp.stationarity_residual(&probe)?;
        probe[j] = 0.0;
        for i in 0..m {
            a.set(i, j, fj[i] - f0[i]);
        }
    }
    let b = f0.iter().map(|v| -v).collect();
    Ok((a, b))
}

/// Solves A·x = b by dense LU with partial pivoting, switching to the
/// Thomas algorithm when A is numerically tridiagonal. One step of
/// iterative refinement keeps ‖Ax − b‖∞ within 1e−10·(1 + ‖b‖∞).
pub fn solve_linear(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            actual: b.len(),
        });
    }
    let tridiagonal = a.is_tridiagonal(TRIDIAGONAL_TOL);
    let factors = if tridiagonal {
        None
    } else {
        Some(lu_factor(a)?)
    };
    let resolve = |rhs: &[f64]| -> Result<Vec<f64>> {
        match &factors {
            Some(f) => Ok(lu_solve(f, rhs)),
            None => thomas_solve(a, rhs),
        }
    };
    let mut x = resolve(b)?;
    let ax = a.mul_vec(&x);
    let residual: Vec<f64> = b.iter().zip(&ax).map(|(bi, axi)| bi - axi).collect();
    if inf_norm(&residual) > 0.5e-10 * (1.0 + inf_norm(b)) {
        let correction = resolve(&residual)?;
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi += ci;
        }
    }
    Ok(x)
}

fn max_norm_error_interior(problem: &VariationalProblem, trajectory: &Trajectory) -> Option<f64> {
    if !problem.has_exact() {
        return None;
    }
    let mesh = trajectory.mesh();
    let mut worst = 0.0_f64;
    for i in 1..mesh.n() {
        let reference = problem.exact_at(mesh.node(i)).unwrap();
        worst = worst.max((reference - trajectory.values()[i]).abs());
    }
    Some(worst)
}

/// Max-norm error of a trajectory against the problem's exact solution over
/// the interior nodes, when an exact solution is attached.
pub fn max_norm_error(problem: &VariationalProblem, trajectory: &Trajectory) -> Option<f64> {
    max_norm_error_interior(problem, trajectory)
}

fn build_report(
    dp: &DiscretizedProblem,
    interior: Vec<f64>,
    residual_inf_norm: f64,
    iterations: usize,
    path: SolvePath,
    start: Instant,
) -> Result<SolveReport> {
    let values = dp.full_values(&interior)?;
    let trajectory = Trajectory::new(dp.mesh(), values)?;
    let error_vs_exact = max_norm_error_interior(dp.problem(), &trajectory);
    Ok(SolveReport {
        trajectory,
        residual_inf_norm,
        iterations,
        path,
        wall_seconds: start.elapsed().as_secs_f64(),
        error_vs_exact,
    })
}

fn solve_via_linear(dp: &DiscretizedProblem, start: Instant) -> Result<SolveReport> {
    let (a, b) = assemble_linear(dp)?;
    let x = solve_linear(&a, &b)?;
    let f = dp.stationarity_residual(&x)?;
    build_report(dp, x, inf_norm(&f), 0, SolvePath::Linear, start)
}

/// Damped Newton iteration on F from the straight-line initial guess.
///
/// The Jacobian is assembled column-wise by forward differences; each step
/// is accepted only if it strictly decreases ‖F‖∞, halving the damping
/// factor down to `damping_min` before declaring a stall.
pub fn solve_newton(dp: &DiscretizedProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let start = Instant::now();
    let mesh = dp.mesh();
    let m = mesh.n() - 1;
    let line = linear_interp_trajectory(dp.problem(), &mesh);
    let mut x = line.values()[1..mesh.n()].to_vec();
    let mut f = dp.stationarity_residual(&x)?;
    let mut f_norm = inf_norm(&f);
    let mut best = (x.clone(), f_norm);
    let mut iterations = 0;
    loop {
        if f_norm <= opts.tol_residual {
            return build_report(dp, x, f_norm, iterations, SolvePath::Newton, start);
        }
        if iterations >= opts.max_newton_iters {
            return Err(Error::NoConvergence {
                iterations,
                residual: f_norm,
                best: best.0,
            });
        }
        let mut jacobian = DenseMatrix::zeros(m);
        for j in 0..m {
            let saved = x[j];
            let step = opts.fd_jacobian_step * saved.abs().max(1.0);
            x[j] = saved + step;
            let f_probe = dp.stationarity_residual(&x)?;
            x[j] = saved;
            for i in 0..m {
                jacobian.set(i, j, (f_probe[i] - f[i]) / step);
            }
        }
        let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = solve_linear(&jacobian, &neg_f)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda >= opts.damping_min {
            let trial: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(xi, di)| xi + lambda * di)
                .collect();
            if let Ok(f_trial) = dp.stationarity_residual(&trial) {
                let trial_norm = inf_norm(&f_trial);
                if trial_norm < f_norm {
                    x = trial;
                    f = f_trial;
                    f_norm = trial_norm;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                residual: f_norm,
                best: best.0,
            });
        }
        iterations += 1;
        if f_norm < best.1 {
            best = (x.clone(), f_norm);
        }
    }
}

/// Discretizes the problem on n subintervals and solves the stationarity
/// system, dispatching between the linear and Newton paths per
/// `opts.force_path` (affinity-probed when auto). E is the max-norm error
/// against the exact solution when one is attached.
pub fn solve(problem: &VariationalProblem, n: usize, opts: &SolveOptions) -> Result<SolveReport> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "solving needs at least 3 subintervals, got {n}"
        )));
    }
    let start = Instant::now();
    let dp = DiscretizedProblem::new(problem, n)?;
    let mut report = match opts.force_path {
        ForcePath::Linear => solve_via_linear(&dp, start)?,
        ForcePath::Newton => solve_newton(&dp, opts)?,
        ForcePath::Auto => {
            if detect_affine(&dp) {
                solve_via_linear(&dp, start)?
            } else {
                solve_newton(&dp, opts)?
            }
        }
    };
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
