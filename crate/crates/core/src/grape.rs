//! Piecewise-constant pulse optimization of gate errors for dissipative
//! bilinear control systems, with exact slice gradients.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{reduced_error, system_swap};
use crate::error::{Error, Result};
use crate::lindblad::{dissipator_matrix, LindbladSpec, Superoperator};
use crate::ops::{expm, expm_frechet, CMatrix, DensityMatrix, HilbertSpace, Operator, C64};

/// Controls `H_1 … H_m` with amplitudes `f_l(t)`, an optional fixed drift and
/// a dissipator, over total time `T`.
#[derive(Clone, Debug)]
pub struct ControlSystem {
    space: HilbertSpace,
    drift: Option<Operator>,
    controls: Vec<Operator>,
    dissipator: LindbladSpec,
    total_time: f64,
    control_generators: Vec<CMatrix>,
    static_generator: CMatrix,
}

impl ControlSystem {
    /// The drift, if given, is always on with unit amplitude; pass it among
    /// `controls` to treat it as a control.
    pub fn new(drift: Option<Operator>, controls: Vec<Operator>, dissipator: LindbladSpec, total_time: f64) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::InvalidParameter(format!("total time must be positive, got {total_time}")));
        }
        if controls.is_empty() {
            return Err(Error::InvalidParameter("at least one control is required".into()));
        }
        let space = dissipator.space().clone();
        for h in drift.iter().chain(&controls) {
            if h.dim() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), found: h.dim() });
            }
            let defect = h.hermiticity_defect();
            if defect > LindbladSpec::HERMITIAN_TOL {
                return Err(Error::NotHermitian(defect));
            }
        }
        let dissipator = dissipator.dissipative_part();
        let mut static_generator = dissipator_matrix(&dissipator).into_matrix();
        if let Some(h) = &drift {
            static_generator += Superoperator::hamiltonian(h).into_matrix();
        }
        let control_generators = controls.iter().map(|h| Superoperator::hamiltonian(h).into_matrix()).collect();
        Ok(Self { space, drift, controls, dissipator, total_time, control_generators, static_generator })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn drift(&self) -> Option<&Operator> {
        self.drift.as_ref()
    }

    pub fn controls(&self) -> &[Operator] {
        &self.controls
    }

    pub fn dissipator(&self) -> &LindbladSpec {
        &self.dissipator
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn num_controls(&self) -> usize {
        self.controls.len()
    }

    fn slice_generator(&self, amps: impl Iterator<Item = f64>) -> CMatrix {
        let mut g = self.static_generator.clone();
        for (k, f) in self.control_generators.iter().zip(amps) {
            g += k * C64::new(f, 0.0);
        }
        g
    }
}

/// Amplitudes on equidistant slices: row `l` holds control `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PulseSchedule {
    #[serde(serialize_with = "rows")]
    amplitudes: DMatrix<f64>,
}

fn rows<S: serde::Serializer>(m: &DMatrix<f64>, ser: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().cloned().collect()).collect();
    serde::Serialize::serialize(&rows, ser)
}

impl PulseSchedule {
    pub fn new(amplitudes: DMatrix<f64>) -> Result<Self> {
        if amplitudes.ncols() == 0 {
            return Err(Error::InvalidParameter("schedule needs at least one slice".into()));
        }
        if amplitudes.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { amplitudes })
    }

    pub fn zeros(controls: usize, slices: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(controls, slices))
    }

    /// Amplitudes i.i.d. uniform in `[-1/T, 1/T]`.
    pub fn random<R: Rng + ?Sized>(controls: usize, slices: usize, total_time: f64, rng: &mut R) -> Result<Self> {
        let scale = 1.0 / total_time;
        Self::new(DMatrix::from_fn(controls, slices, |_, _| rng.gen_range(-1.0..=1.0) * scale))
    }

    pub fn amplitudes(&self) -> &DMatrix<f64> {
        &self.amplitudes
    }

    pub fn num_controls(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn num_slices(&self) -> usize {
        self.amplitudes.ncols()
    }

    fn to_flat(&self) -> Vec<f64> {
        self.amplitudes.transpose().iter().cloned().collect()
    }

    fn from_flat(controls: usize, slices: usize, x: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_fn(controls, slices, |l, s| x[l * slices + s]))
    }
}

fn check_schedule(sys: &ControlSystem, sched: &PulseSchedule) -> Result<()> {
    if sched.num_controls() != sys.num_controls() {
        return Err(Error::DimensionMismatch { expected: sys.num_controls(), found: sched.num_controls() });
    }
    Ok(())
}

/// `E_T = exp(dt L_n) ⋯ exp(dt L_1)`.
pub fn propagate_schedule(sys: &ControlSystem, sched: &PulseSchedule) -> Result<Superoperator> {
    check_schedule(sys, sched)?;
    let n = sched.num_slices();
    let dt = C64::new(sys.total_time / n as f64, 0.0);
    let size = sys.space.dim().pow(2);
    let mut e = CMatrix::identity(size, size);
    for s in 0..n {
        let g = sys.slice_generator(sched.amplitudes.column(s).iter().cloned());
        e = expm(&(g * dt))? * e;
    }
    Superoperator::new(sys.space.clone(), e)
}

/// Objective to minimize.
#[derive(Clone, Debug)]
pub enum Target {
    /// `||E_T - E_G||²` against a full goal map.
    Epsilon1(Superoperator),
    /// Subsystem lower bound for a goal unitary on the leading factor.
    Epsilon2(Operator),
}

impl Target {
    fn prepare(&self, space: &HilbertSpace) -> Result<Prepared> {
        let d = space.dim();
        match self {
            Target::Epsilon1(g) => {
                if g.dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: g.dim() });
                }
                Ok(Prepared::Epsilon1(g.matrix().clone()))
            }
            Target::Epsilon2(u) => {
                let d1 = u.dim();
                if d1 == 0 || d % d1 != 0 {
                    return Err(Error::DimensionMismatch { expected: d1, found: d });
                }
                let d2 = d / d1;
                let jg = crate::channels::choi(&Superoperator::from_unitary(u));
                let s = system_swap(d1, d2);
                let embedded = &s * jg.matrix().kronecker(&CMatrix::identity(d2 * d2, d2 * d2)) * s.transpose();
                let n = d * d;
                Ok(Prepared::Epsilon2 { d, complement: CMatrix::identity(n, n) - embedded })
            }
        }
    }
}

enum Prepared {
    Epsilon1(CMatrix),
    Epsilon2 { d: usize, complement: CMatrix },
}

impl Prepared {
    /// Objective value and the matrix `C` with `df = Re sum C ∘ dE_T`.
    fn value_and_sensitivity(&self, e: &CMatrix) -> (f64, CMatrix) {
        match self {
            Prepared::Epsilon1(goal) => {
                let r = e - goal;
                (r.norm_squared(), r.conjugate() * C64::new(2.0, 0.0))
            }
            Prepared::Epsilon2 { d, complement } => {
                let d = *d;
                let j = crate::channels::choi(&Superoperator::from_parts(HilbertSpace::single(d), e.clone())).into_matrix();
                let jq = &j * complement;
                let value = (&j * &jq).trace().re;
                let w = &jq + complement * &j;
                let inv = C64::new(1.0 / d as f64, 0.0);
                let c = CMatrix::from_fn(d * d, d * d, |r, q| {
                    let (a, b, i, k) = (r / d, r % d, q / d, q % d);
                    w[(b * d + k, a * d + i)] * inv
                });
                (value, c)
            }
        }
    }

    fn value(&self, e: &CMatrix) -> f64 {
        self.value_and_sensitivity(e).0
    }
}

/// Objective and its exact gradient, `grad[(l, s)] = d obj / d f_{l,s}`.
pub fn objective_and_gradient(sys: &ControlSystem, sched: &PulseSchedule, target: &Target) -> Result<(f64, DMatrix<f64>)> {
    check_schedule(sys, sched)?;
    let prepared = target.prepare(&sys.space)?;
    evaluate(sys, sched, &prepared)
}

/// Objective value alone.
pub fn objective(sys: &ControlSystem, sched: &PulseSchedule, target: &Target) -> Result<f64> {
    let e = propagate_schedule(sys, sched)?;
    Ok(target.prepare(&sys.space)?.value(e.matrix()))
}

fn evaluate(sys: &ControlSystem, sched: &PulseSchedule, prepared: &Prepared) -> Result<(f64, DMatrix<f64>)> {
    let n = sched.num_slices();
    let m = sched.num_controls();
    let dt = C64::new(sys.total_time / n as f64, 0.0);
    let size = sys.space.dim().pow(2);
    let scaled: Vec<CMatrix> = (0..n).map(|s| sys.slice_generator(sched.amplitudes.column(s).iter().cloned()) * dt).collect();
    let steps: Vec<CMatrix> = scaled.iter().map(expm).collect::<Result<_>>()?;

    let mut forward = Vec::with_capacity(n + 1);
    forward.push(CMatrix::identity(size, size));
    for s in 0..n {
        let next = &steps[s] * &forward[s];
        forward.push(next);
    }
    let (value, c) = prepared.value_and_sensitivity(&forward[n]);

    let mut backward = vec![CMatrix::identity(size, size); n];
    for s in (0..n.saturating_sub(1)).rev() {
        backward[s] = &backward[s + 1] * &steps[s + 1];
    }
    let directions: Vec<CMatrix> = sys.control_generators.iter().map(|k| k * dt).collect();
    let mut grad = DMatrix::zeros(m, n);
    for s in 0..n {
        let weight = backward[s].transpose() * &c * forward[s].transpose();
        for (l, dir) in directions.iter().enumerate() {
            let (_, frechet) = expm_frechet(&scaled[s], dir)?;
            grad[(l, s)] = weight.iter().zip(frechet.iter()).map(|(w, f)| (w * f).re).sum();
        }
    }
    Ok((value, grad))
}

/// Stopping rules and sizes for [`optimize`].
#[derive(Clone, Debug)]
pub struct OptimizeOptions {
    pub slices: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub objective_tol: f64,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self { slices: 20, restarts: 10, seed: 0, max_iterations: 500, gradient_tol: 1e-8, objective_tol: 1e-12 }
    }
}

/// History of one restart.
#[derive(Clone, Debug, Serialize)]
pub struct RestartTrace {
    /// Objective after each accepted step, starting with the initial value.
    pub values: Vec<f64>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult {
    pub best: PulseSchedule,
    pub best_value: f64,
    pub best_restart: usize,
    pub traces: Vec<RestartTrace>,
    pub evaluations: usize,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn iterations(&self) -> usize {
        self.traces[self.best_restart].iterations
    }
}

struct Problem<'a> {
    sys: &'a ControlSystem,
    prepared: Prepared,
    controls: usize,
    slices: usize,
    evaluations: usize,
}

impl Problem<'_> {
    fn eval(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.evaluations += 1;
        let sched = PulseSchedule::from_flat(self.controls, self.slices, x)?;
        let (v, g) = evaluate(self.sys, &sched, &self.prepared)?;
        Ok((v, g.transpose().iter().cloned().collect()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

struct LinePoint {
    alpha: f64,
    value: f64,
    slope: f64,
    grad: Vec<f64>,
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Minimizer of the cubic through two points with values and slopes,
/// safeguarded to the inner part of the bracket.
fn cubic_step(lo: &LinePoint, hi: &LinePoint) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let mid = 0.5 * (a + b);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
    let (lower, upper) = (a.min(b), a.max(b));
    let margin = 0.1 * (upper - lower);
    if t.is_finite() && t > lower + margin && t < upper - margin {
        t
    } else {
        mid
    }
}

/// Line search satisfying the strong Wolfe conditions.
fn wolfe_search(problem: &mut Problem, x: &[f64], f0: f64, slope0: f64, p: &[f64], alpha0: f64) -> Result<Option<LinePoint>> {
    let probe = |problem: &mut Problem, alpha: f64| -> Result<LinePoint> {
        let (value, grad) = problem.eval(&axpy(x, alpha, p))?;
        Ok(LinePoint { alpha, value, slope: dot(&grad, p), grad })
    };
    let mut prev = LinePoint { alpha: 0.0, value: f0, slope: slope0, grad: Vec::new() };
    let mut alpha = alpha0;
    for i in 0..30 {
        let cur = probe(problem, alpha)?;
        if !cur.value.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if cur.value > f0 + C1 * alpha * slope0 || (i > 0 && cur.value >= prev.value) {
            return zoom(problem, x, f0, slope0, p, prev, cur, &probe);
        }
        if cur.slope.abs() <= -C2 * slope0 {
            return Ok(Some(cur));
        }
        if cur.slope >= 0.0 {
            return zoom(problem, x, f0, slope0, p, cur, prev, &probe);
        }
        alpha *= 2.0;
        prev = cur;
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn zoom(
    problem: &mut Problem,
    _x: &[f64],
    f0: f64,
    slope0: f64,
    _p: &[f64],
    mut lo: LinePoint,
    mut hi: LinePoint,
    probe: &dyn Fn(&mut Problem, f64) -> Result<LinePoint>,
) -> Result<Option<LinePoint>> {
    for _ in 0..40 {
        if (hi.alpha - lo.alpha).abs() < 1e-14 * lo.alpha.abs().max(1.0) {
            break;
        }
        let alpha = cubic_step(&lo, &hi);
        let cur = probe(problem, alpha)?;
        if cur.value > f0 + C1 * alpha * slope0 || cur.value >= lo.value {
            hi = cur;
        } else {
            if cur.slope.abs() <= -C2 * slope0 {
                return Ok(Some(cur));
            }
            if cur.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = cur;
        }
    }
    Ok(if lo.alpha > 0.0 && lo.value < f0 { Some(lo) } else { None })
}

/// BFGS from `x0`; returns the final point and its trace.
fn bfgs(problem: &mut Problem, x0: Vec<f64>, opts: &OptimizeOptions) -> Result<(Vec<f64>, f64, RestartTrace)> {
    let n = x0.len();
    let mut x = x0;
    let (mut f, mut g) = problem.eval(&x)?;
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut values = vec![f];
    let mut converged = false;
    let mut iterations = 0;
    let mut fresh = true;
    while iterations < opts.max_iterations {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm <= opts.gradient_tol || f <= opts.objective_tol {
            converged = true;
            break;
        }
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut p: Vec<f64> = (-(&h * &gv)).iter().cloned().collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            fresh = true;
        }
        let alpha0 = if fresh { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let found = wolfe_search(problem, &x, f, slope, &p, alpha0)?;
        let Some(point) = found else {
            if fresh {
                converged = gnorm <= opts.gradient_tol.sqrt();
                break;
            }
            h = DMatrix::identity(n, n);
            fresh = true;
            continue;
        };
        iterations += 1;
        let x_new = axpy(&x, point.alpha, &p);
        let s: Vec<f64> = p.iter().map(|v| v * point.alpha).collect();
        let y: Vec<f64> = point.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                h *= sy / dot(&y, &y);
            }
            let rho = 1.0 / sy;
            let sv = nalgebra::DVector::from_column_slice(&s);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            h += (&sv * sv.transpose()) * (rho * rho * yhy + rho) - (&hy * sv.transpose() + &sv * hy.transpose()) * rho;
            fresh = false;
        }
        let decrease = f - point.value;
        x = x_new;
        f = point.value;
        g = point.grad;
        values.push(f);
        if decrease <= 1e-16 * f.abs().max(1e-300) {
            converged = true;
            break;
        }
    }
    let trace = RestartTrace { values, iterations, evaluations: 0, converged };
    Ok((x, f, trace))
}

/// Worker pool capped by `ZENOFORGE_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("ZENOFORGE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("ZENOFORGE_THREADS must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn run_restart(sys: &ControlSystem, target: &Target, opts: &OptimizeOptions, restart: usize) -> Result<(PulseSchedule, f64, RestartTrace)> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let init = PulseSchedule::random(sys.num_controls(), opts.slices, sys.total_time, &mut rng)?;
    let mut problem =
        Problem { sys, prepared: target.prepare(&sys.space)?, controls: sys.num_controls(), slices: opts.slices, evaluations: 0 };
    let (x, f, mut trace) = bfgs(&mut problem, init.to_flat(), opts)?;
    trace.evaluations = problem.evaluations;
    Ok((PulseSchedule::from_flat(sys.num_controls(), opts.slices, &x)?, f, trace))
}

/// Best of `opts.restarts` BFGS runs from seeded random pulses; restarts run
/// in parallel and the result depends only on the seed.
pub fn optimize(sys: &ControlSystem, target: &Target, opts: &OptimizeOptions) -> Result<OptimizationResult> {
    if opts.restarts == 0 || opts.slices == 0 {
        return Err(Error::InvalidParameter("restarts and slices must be positive".into()));
    }
    let pool = worker_pool()?;
    let runs: Vec<_> =
        pool.install(|| (0..opts.restarts).into_par_iter().map(|r| run_restart(sys, target, opts, r)).collect::<Result<Vec<_>>>())?;
    let best_restart = runs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(k, _)| k)
        .expect("at least one restart");
    let evaluations = runs.iter().map(|r| r.2.evaluations).sum();
    let best_value = runs[best_restart].1;
    let converged = runs[best_restart].2.converged;
    let best = runs[best_restart].0.clone();
    let traces = runs.into_iter().map(|r| r.2).collect();
    Ok(OptimizationResult { best, best_value, best_restart, traces, evaluations, converged })
}

/// One point of a noise-strength sweep.
#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub best_eps: f64,
    pub reduced_error: f64,
    pub restarts: usize,
    pub iterations: usize,
}

/// Optimize at each rate and report the reduced gate error of the best
/// schedule with the trailing factor in the totally mixed state.
pub fn gamma_sweep<F>(build: F, gammas: &[f64], goal: &Operator, opts: &OptimizeOptions) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<(ControlSystem, Target)>,
{
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("empty rate list".into()));
    }
    let mut rows = Vec::with_capacity(gammas.len());
    for &gamma in gammas {
        let (sys, target) = build(gamma)?;
        let d = sys.space().dim();
        let d1 = goal.dim();
        if d1 == 0 || d % d1 != 0 {
            return Err(Error::DimensionMismatch { expected: d1, found: d });
        }
        let rho2 = DensityMatrix::maximally_mixed(&HilbertSpace::single(d / d1));
        let result = optimize(&sys, &target, opts)?;
        let channel = propagate_schedule(&sys, &result.best)?;
        rows.push(SweepRow {
            gamma,
            best_eps: result.best_value,
            reduced_error: reduced_error(&channel, goal, &rho2)?,
            restarts: opts.restarts,
            iterations: result.iterations(),
        });
    }
    Ok(rows)
}

/// The Hadamard gate.
pub fn hadamard() -> Operator {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Operator::from_matrix(CMatrix::from_row_slice(2, 2, &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)]))
        .expect("square")
}
