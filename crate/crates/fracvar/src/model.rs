//! Problem statement types: Lagrangians with partial derivatives, boundary
//! data, optional exact solutions, and three built-in benchmark problems.

use crate::assemble::Mesh;
use crate::error::{Error, Result};
use crate::special::gamma;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type PointFn = Box<dyn Fn(f64, f64, f64, f64) -> f64 + Send + Sync>;

/// Integrand L(t, x, dax, xdot) together with its partial derivatives.
///
/// `dax` stands for the left fractional derivative of x at t, `xdot` for the
/// ordinary first derivative. Problems without an xdot term set `uses_xdot`
/// to false and the xdot argument is ignored.
pub struct Lagrangian {
    eval_fn: PointFn,
    d_x_fn: PointFn,
    d_dax_fn: PointFn,
    d_xdot_fn: PointFn,
    uses_xdot: bool,
}

impl Lagrangian {
    /// Builds a Lagrangian that depends on xdot.
    pub fn new(
        eval: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_x: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_dax: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_xdot: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lagrangian {
            eval_fn: Box::new(eval),
            d_x_fn: Box::new(d_x),
            d_dax_fn: Box::new(d_dax),
            d_xdot_fn: Box::new(d_xdot),
            uses_xdot: true,
        }
    }

    /// Builds a Lagrangian with no xdot dependence; d_xdot is identically 0.
    pub fn without_xdot(
        eval: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_x: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
        d_dax: impl Fn(f64, f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Lagrangian {
            eval_fn: Box::new(eval),
            d_x_fn: Box::new(d_x),
            d_dax_fn: Box::new(d_dax),
            d_xdot_fn: Box::new(|_, _, _, _| 0.0),
            uses_xdot: false,
        }
    }

    /// L(t, x, dax, xdot).
    pub fn eval(&self, t: f64, x: f64, dax: f64, xdot: f64) -> f64 {
        (self.eval_fn)(t, x, dax, xdot)
    }

    /// ∂L/∂x.
    pub fn d_x(&self, t: f64, x: f64, dax: f64, xdot: f64) -> f64 {
        (self.d_x_fn)(t, x, dax, xdot)
    }

    /// ∂L/∂(dax).
    pub fn d_dax(&self, t: f64, x: f64, dax: f64, xdot: f64) -> f64 {
        (self.d_dax_fn)(t, x, dax, xdot)
    }

    /// ∂L/∂(xdot).
    pub fn d_xdot(&self, t: f64, x: f64, dax: f64, xdot: f64) -> f64 {
        (self.d_xdot_fn)(t, x, dax, xdot)
    }

    /// Whether the integrand depends on xdot.
    pub fn uses_xdot(&self) -> bool {
        self.uses_xdot
    }
}

/// Fixed-endpoint fractional variational problem: minimize the integral of
/// L(t, x, dax, xdot) over [a, b] subject to x(a) = xa and x(b) = xb.
pub struct VariationalProblem {
    a: f64,
    b: f64,
    alpha: f64,
    xa: f64,
    xb: f64,
    lagrangian: Lagrangian,
    exact: Option<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for VariationalProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VariationalProblem")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("alpha", &self.alpha)
            .field("xa", &self.xa)
            .field("xb", &self.xb)
            .field("has_exact", &self.exact.is_some())
            .finish_non_exhaustive()
    }
}

impl VariationalProblem {
    /// Assembles a problem statement. Use [`validate`] to check invariants.
    pub fn new(a: f64, b: f64, alpha: f64, xa: f64, xb: f64, lagrangian: Lagrangian) -> Self {
        VariationalProblem {
            a,
            b,
            alpha,
            xa,
            xb,
            lagrangian,
            exact: None,
        }
    }

    /// Attaches a known exact solution, enabling error reporting.
    pub fn with_exact(mut self, exact: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Box::new(exact));
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn xa(&self) -> f64 {
        self.xa
    }

    pub fn xb(&self) -> f64 {
        self.xb
    }

    pub fn lagrangian(&self) -> &Lagrangian {
        &self.lagrangian
    }

    /// Exact solution at t, when one is attached.
    pub fn exact_at(&self, t: f64) -> Option<f64> {
        self.exact.as_ref().map(|f| f(t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }
}

/// Node values x_0..x_n attached to the mesh they were computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    mesh: Mesh,
    values: Vec<f64>,
}

impl Trajectory {
    /// Pairs a mesh with its node values; the lengths must agree.
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n() + 1 {
            return Err(Error::DimensionMismatch {
                expected: mesh.n() + 1,
                actual: values.len(),
            });
        }
        Ok(Trajectory { mesh, values })
    }

    pub fn mesh(&self) -> Mesh {
        self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Minimize ∫₀¹ (dax − (2/Γ(2.5)) t^1.5)² dt with x(0) = 0, x(1) = 1,
/// α = 0.5; the exact minimizer is x(t) = t².
pub fn example1() -> VariationalProblem {
    let c = 2.0 / gamma(2.5).unwrap();
    let target = move |t: f64| c * t.powf(1.5);
    let lagrangian = Lagrangian::without_xdot(
        move |t, _x, dax, _xdot| {
            let r = dax - target(t);
            r * r
        },
        |_t, _x, _dax, _xdot| 0.0,
        move |t, _x, dax, _xdot| 2.0 * (dax - target(t)),
    );
    VariationalProblem::new(0.0, 1.0, 0.5, 0.0, 1.0, lagrangian).with_exact(|t| t * t)
}

/// Extremize ∫₀¹ (dax − xdot²) dt with x(0) = 0, x(1) = 1, α = 0.5.
///
/// The stationary trajectory is
/// x(t) = −c (1−t)^1.5 + (1−c) t + c with c = 1/(2Γ(2.5)).
pub fn example2() -> VariationalProblem {
    let c = 1.0 / (2.0 * gamma(2.5).unwrap());
    let lagrangian = Lagrangian::new(
        |_t, _x, dax, xdot| dax - xdot * xdot,
        |_t, _x, _dax, _xdot| 0.0,
        |_t, _x, _dax, _xdot| 1.0,
        |_t, _x, _dax, xdot| -2.0 * xdot,
    );
    VariationalProblem::new(0.0, 1.0, 0.5, 0.0, 1.0, lagrangian)
        .with_exact(move |t| -c * (1.0 - t).powf(1.5) + (1.0 - c) * t + c)
}

/// Minimize ∫₀¹ (dax − φ(t))⁴ dt with x(0) = 0, x(1) = 1, α = 0.5, where
/// φ is the left fractional half-derivative of the exact minimizer
/// x(t) = 16t⁵ − 20t³ + 5t:
/// φ(t) = (16Γ(6)/Γ(5.5)) t^4.5 − (20Γ(4)/Γ(3.5)) t^2.5 + (5/Γ(1.5)) t^0.5.
pub fn example3() -> VariationalProblem {
    let c5 = 16.0 * gamma(6.0).unwrap() / gamma(5.5).unwrap();
    let c3 = 20.0 * gamma(4.0).unwrap() / gamma(3.5).unwrap();
    let c1 = 5.0 / gamma(1.5).unwrap();
    let phi = move |t: f64| c5 * t.powf(4.5) - c3 * t.powf(2.5) + c1 * t.powf(0.5);
    let lagrangian = Lagrangian::without_xdot(
        move |t, _x, dax, _xdot| {
            let r = dax - phi(t);
            let r2 = r * r;
            r2 * r2
        },
        |_t, _x, _dax, _xdot| 0.0,
        move |t, _x, dax, _xdot| {
            let r = dax - phi(t);
            4.0 * r * r * r
        },
    );
    VariationalProblem::new(0.0, 1.0, 0.5, 0.0, 1.0, lagrangian)
        .with_exact(|t| 16.0 * t.powi(5) - 20.0 * t.powi(3) + 5.0 * t)
}

/// Looks up a built-in problem by name ("example1", "example2", "example3").
pub fn by_name(name: &str) -> Option<VariationalProblem> {
    match name {
        "example1" => Some(example1()),
        "example2" => Some(example2()),
        "example3" => Some(example3()),
        _ => None,
    }
}

fn eval_at_slot(lagrangian: &Lagrangian, mut args: [f64; 4], slot: usize, value: f64) -> f64 {
    args[slot] = value;
    lagrangian.eval(args[0], args[1], args[2], args[3])
}

fn central_fd(lagrangian: &Lagrangian, args: [f64; 4], slot: usize) -> f64 {
    let v = args[slot];
    let step = 1e-6 * v.abs().max(1.0);
    let plus = eval_at_slot(lagrangian, args, slot, v + step);
    let minus = eval_at_slot(lagrangian, args, slot, v - step);
    (plus - minus) / (2.0 * step)
}

/// Checks problem invariants and returns human-readable findings
/// (empty means valid): interval order, alpha range, boundary consistency
/// of the exact solution, and agreement of the analytic partials with
/// central finite differences of eval at 20 randomized points.
pub fn validate(problem: &VariationalProblem) -> Vec<String> {
    let mut findings = Vec::new();
    if !(problem.b() > problem.a()) {
        findings.push(format!(
            "interval order: b = {} must exceed a = {}",
            problem.b(),
            problem.a()
        ));
    }
    if !(problem.alpha() > 0.0 && problem.alpha() < 1.0) {
        findings.push(format!(
            "alpha out of range: {} is outside (0, 1)",
            problem.alpha()
        ));
    }
    if let Some(at_a) = problem.exact_at(problem.a()) {
        if !((at_a - problem.xa()).abs() <= 1e-9) {
            findings.push(format!(
                "boundary mismatch at t = a: exact gives {}, expected {}",
                at_a,
                problem.xa()
            ));
        }
    }
    if let Some(at_b) = problem.exact_at(problem.b()) {
        if !((at_b - problem.xb()).abs() <= 1e-9) {
            findings.push(format!(
                "boundary mismatch at t = b: exact gives {}, expected {}",
                at_b,
                problem.xb()
            ));
        }
    }
    if problem.b() > problem.a() {
        check_partials(problem, &mut findings);
    }
    findings
}

fn check_partials(problem: &VariationalProblem, findings: &mut Vec<String>) {
    let lagrangian = problem.lagrangian();
    let mut rng = StdRng::seed_from_u64(0x9E37_79B9);
    let mut partials: Vec<(&str, usize, &PointFn)> = vec![
        ("d_x", 1, &lagrangian.d_x_fn),
        ("d_dax", 2, &lagrangian.d_dax_fn),
    ];
    if lagrangian.uses_xdot() {
        partials.push(("d_xdot", 3, &lagrangian.d_xdot_fn));
    }
    let mut worst: Vec<(f64, [f64; 4], f64, f64)> =
        vec![(0.0, [0.0; 4], 0.0, 0.0); partials.len()];
    for _ in 0..20 {
        let args = [
            rng.random_range(problem.a()..=problem.b()),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        ];
        if !lagrangian.eval(args[0], args[1], args[2], args[3]).is_finite() {
            findings.push(format!("non-finite eval at (t, x, dax, xdot) = {args:?}"));
            return;
        }
        for (p, (_, slot, analytic_fn)) in partials.iter().enumerate() {
            let analytic = analytic_fn(args[0], args[1], args[2], args[3]);
            let fd = central_fd(lagrangian, args, *slot);
            let scale = analytic.abs().max(fd.abs()).max(1.0);
            let deviation = (analytic - fd).abs() / scale;
            if deviation > worst[p].0 {
                worst[p] = (deviation, args, analytic, fd);
            }
        }
    }
    for (p, (name, _, _)) in partials.iter().enumerate() {
        let (deviation, args, analytic, fd) = worst[p];
        if deviation > 1e-5 {
            findings.push(format!(
                "partial mismatch ({name}) at (t, x, dax, xdot) = {args:?}: \
                 analytic {analytic}, finite difference {fd}"
            ));
        }
    }
}
