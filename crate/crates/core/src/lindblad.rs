//! Photon loss in the vacuum ⊕ single-excitation subspace.
//!
//! Basis index 0 is the vacuum, index `i ≥ 1` is one photon in cavity `i`.
//! With `L_i = |0⟩⟨i|` the master equation
//! `dρ/dt = −i[H, ρ] + γ Σ_i (L_i ρ L_i† − ½{L_i†L_i, ρ})`
//! reduces to
//! `dρ/dt = −i[H, ρ] − γ/2 (Pρ + ρP) + γ tr(Pρ) |0⟩⟨0|`, `P = 1 − |0⟩⟨0|`.
//! The subspace is closed under both terms, so nothing is truncated.
//!
//! Integration is classical RK4 with the step shortened to land exactly on
//! every requested time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, CcaError, Result};
use crate::fock::CavityCount;
use crate::spectral::ModelParams;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_THETA_POINTS: usize = 181;

pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
pub const HERMITICITY_LIMIT: f64 = 1e-10;
pub const POSITIVITY_FLOOR: f64 = -1e-8;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Density operator on `{vacuum, site 1, …, site n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and positivity (−1e-9).
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 3 {
            return invalid(format!(
                "density matrix must be square over vacuum + ≥ 2 sites, got {}×{}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        let rho = DensityMatrix { matrix };
        let herm = rho.hermiticity_error();
        if herm > 1e-12 {
            return invalid(format!(
                "density matrix not Hermitian (‖ρ − ρ†‖ = {herm:e})"
            ));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return invalid(format!("density matrix trace {tr} ≠ 1"));
        }
        let min = rho.min_eigenvalue();
        if min < -1e-9 {
            return invalid(format!("density matrix has eigenvalue {min:e}"));
        }
        Ok(rho)
    }

    pub fn from_pure(amplitudes: &DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > 1e-12 {
            return invalid(format!("state vector has norm² {norm}"));
        }
        DensityMatrix::new(amplitudes * amplitudes.adjoint())
    }

    /// `sinθ|1 0 … 0⟩ + cosθ|0 1 0 … 0⟩` as a density matrix.
    pub fn initial_pair(theta: f64, cavities: CavityCount) -> Result<Self> {
        if !theta.is_finite() {
            return invalid("θ must be finite");
        }
        DensityMatrix::from_pure(&pair_vector(theta, cavities.get(), 1))
    }

    pub(crate) fn unchecked(matrix: DMatrix<Complex64>) -> Self {
        DensityMatrix { matrix }
    }

    pub fn cavities(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn labels(&self) -> Vec<String> {
        std::iter::once("vacuum".to_string())
            .chain((1..=self.cavities()).map(|i| format!("site{i}")))
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Population of basis entry `index` (0 = vacuum).
    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    /// Mean photon number `tr(Σ n_i ρ)`.
    pub fn excitation(&self) -> f64 {
        (1..self.matrix.nrows()).map(|i| self.population(i)).sum()
    }

    /// `⟨φ|ρ|φ⟩` for a vector in the same basis.
    pub fn expectation(&self, phi: &DVector<Complex64>) -> f64 {
        (phi.adjoint() * &self.matrix * phi)[(0, 0)].re
    }
}

/// Same as [`DensityMatrix::initial_pair`].
pub fn initial_density(theta: f64, cavities: CavityCount) -> Result<DensityMatrix> {
    DensityMatrix::initial_pair(theta, cavities)
}

/// `sinθ` on site `first`, `cosθ` on site `first + 1` (1-based sites).
fn pair_vector(theta: f64, n: usize, first: usize) -> DVector<Complex64> {
    let mut v = DVector::from_element(n + 1, ZERO);
    v[first] = Complex64::new(theta.sin(), 0.0);
    v[first + 1] = Complex64::new(theta.cos(), 0.0);
    v
}

/// `sinθ|site n−1⟩ + cosθ|site n⟩`: the input pair mirrored onto the last two cavities.
pub fn transfer_target(theta: f64, cavities: CavityCount) -> DVector<Complex64> {
    let n = cavities.get();
    pair_vector(theta, n, n - 1)
}

fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..=i {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(sym).eigenvalues.min()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    gamma: f64,
}

impl LossParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return invalid(format!("damping rate must be finite and ≥ 0, got {gamma}"));
        }
        Ok(LossParams { gamma })
    }

    pub fn lossless() -> Self {
        LossParams { gamma: 0.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// `0 ⊕ H₁`: the vacuum has zero energy, the single-excitation block is the hopping matrix.
pub fn subspace_hamiltonian(params: &ModelParams) -> DMatrix<Complex64> {
    let n = params.n();
    let h1 = params.single_particle_hamiltonian();
    let mut h = DMatrix::from_element(n + 1, n + 1, ZERO);
    h.view_mut((1, 1), (n, n))
        .copy_from(&h1.map(|x| Complex64::new(x, 0.0)));
    h
}

#[derive(Debug, Clone)]
struct Generator {
    h: DMatrix<Complex64>,
    gamma: f64,
}

impl Generator {
    fn new(params: &ModelParams, loss: &LossParams) -> Self {
        Generator {
            h: subspace_hamiltonian(params),
            gamma: loss.gamma(),
        }
    }

    fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut d = (&self.h * rho - rho * &self.h) * (-I);
        if self.gamma > 0.0 {
            let dim = rho.nrows();
            let half = 0.5 * self.gamma;
            for j in 0..dim {
                for i in 0..dim {
                    let rate = half * (usize::from(i > 0) + usize::from(j > 0)) as f64;
                    d[(i, j)] -= rho[(i, j)] * rate;
                }
            }
            let drained: Complex64 = (1..dim).map(|i| rho[(i, i)]).sum();
            d[(0, 0)] += drained * self.gamma;
        }
        d
    }

    fn rk4(&self, x: &DMatrix<Complex64>, h: f64) -> DMatrix<Complex64> {
        let k1 = self.apply(x);
        let k2 = self.apply(&(x + &k1 * Complex64::from(0.5 * h)));
        let k3 = self.apply(&(x + &k2 * Complex64::from(0.5 * h)));
        let k4 = self.apply(&(x + &k3 * Complex64::from(h)));
        x + (k1 + (k2 + k3) * Complex64::from(2.0) + k4) * Complex64::from(h / 6.0)
    }

    /// Integrates from `t = 0` and returns the state at each of `times`
    /// (non-decreasing). `check` sees every intermediate step.
    fn run(
        &self,
        x0: &DMatrix<Complex64>,
        times: &[f64],
        dt: f64,
        mut check: impl FnMut(f64, &DMatrix<Complex64>) -> Result<()>,
    ) -> Result<(Vec<DMatrix<Complex64>>, usize)> {
        let mut x = x0.clone();
        let mut t = 0.0;
        let mut steps = 0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            let span = target - t;
            if span > 0.0 {
                let n = (span / dt - 1e-9).ceil().max(1.0) as usize;
                let h = span / n as f64;
                for s in 1..=n {
                    x = self.rk4(&x, h);
                    steps += 1;
                    check(t + s as f64 * h, &x)?;
                }
                t = target;
            }
            out.push(x.clone());
        }
        Ok((out, steps))
    }
}

/// `dρ/dt` at `rho`.
pub fn lindblad_rhs(
    rho: &DensityMatrix,
    params: &ModelParams,
    loss: &LossParams,
) -> Result<DMatrix<Complex64>> {
    if rho.cavities() != params.n() {
        return Err(CcaError::SectorMismatch(format!(
            "density matrix over {} cavities, model has {}",
            rho.cavities(),
            params.n()
        )));
    }
    Ok(Generator::new(params, loss).apply(rho.matrix()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    /// Evenly spaced samples on `[0, t_final]`, endpoints included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: DEFAULT_DT,
            samples: 101,
        }
    }
}

/// Worst invariant violations seen along a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub dt: f64,
    pub max_trace_drift: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    fn new(dt: f64) -> Self {
        Diagnostics {
            steps: 0,
            dt,
            max_trace_drift: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
        }
    }

    fn merge(&mut self, other: &Diagnostics) {
        self.steps = self.steps.max(other.steps);
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        self.min_eigenvalue = self.min_eigenvalue.min(other.min_eigenvalue);
    }

    /// Cheap per-step guard: finiteness, trace, and the `|ρ_ij| ≤ 1` bound
    /// that every density matrix obeys (an unstable step violates it first).
    fn step(&mut self, t: f64, m: &DMatrix<Complex64>) -> Result<()> {
        let mut tr = 0.0;
        for i in 0..m.nrows() {
            tr += m[(i, i)].re;
        }
        let largest = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !largest.is_finite() || !tr.is_finite() {
            return Err(CcaError::NumericalGuard(format!(
                "non-finite density matrix at t = {t}"
            )));
        }
        let drift = (tr - 1.0).abs();
        self.max_trace_drift = self.max_trace_drift.max(drift);
        if drift > TRACE_DRIFT_LIMIT {
            return Err(CcaError::NumericalGuard(format!(
                "trace drift {drift:e} at t = {t}; reduce the time step"
            )));
        }
        if largest > 1.0 + TRACE_DRIFT_LIMIT {
            return Err(CcaError::NumericalGuard(format!(
                "density matrix entry {largest} exceeds 1 at t = {t}; reduce the time step"
            )));
        }
        Ok(())
    }

    /// Full check on a sampled state.
    fn sample(&mut self, t: f64, m: &DMatrix<Complex64>) -> Result<()> {
        self.step(t, m)?;
        let herm = hermiticity_error(m);
        self.max_hermiticity_error = self.max_hermiticity_error.max(herm);
        if herm > HERMITICITY_LIMIT {
            return Err(CcaError::NumericalGuard(format!(
                "Hermiticity lost at t = {t}: {herm:e}"
            )));
        }
        let min = min_eigenvalue(m);
        self.min_eigenvalue = self.min_eigenvalue.min(min);
        if min < POSITIVITY_FLOOR {
            return Err(CcaError::NumericalGuard(format!(
                "negative eigenvalue {min:e} at t = {t}"
            )));
        }
        Ok(())
    }
}

fn component_guard(t: f64, m: &DMatrix<Complex64>, trace: f64, bound: f64) -> Result<()> {
    let tr: f64 = m.diagonal().iter().map(|z| z.re).sum();
    let largest = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(tr.is_finite() && largest.is_finite())
        || (tr - trace).abs() > TRACE_DRIFT_LIMIT
        || largest > bound + TRACE_DRIFT_LIMIT
    {
        return Err(CcaError::NumericalGuard(format!(
            "integration unstable at t = {t}; reduce the time step"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Diagnostics,
}

fn check_times(times: &[f64], dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("sample times must be finite and ≥ 0");
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return invalid("sample times must be non-decreasing");
    }
    Ok(())
}

/// Samples `ρ(t)` at the given non-decreasing times.
pub fn integrate_at(
    rho0: &DensityMatrix,
    params: &ModelParams,
    loss: &LossParams,
    times: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    check_times(times, dt)?;
    if rho0.cavities() != params.n() {
        return Err(CcaError::SectorMismatch(format!(
            "density matrix over {} cavities, model has {}",
            rho0.cavities(),
            params.n()
        )));
    }
    let gen = Generator::new(params, loss);
    let mut diag = Diagnostics::new(dt);
    let (states, steps) = gen.run(rho0.matrix(), times, dt, |t, m| diag.step(t, m))?;
    for (t, m) in times.iter().zip(&states) {
        diag.sample(*t, m)?;
    }
    diag.steps = steps;
    Ok(Trajectory {
        times: times.to_vec(),
        states: states.into_iter().map(DensityMatrix::unchecked).collect(),
        diagnostics: diag,
    })
}

/// Evenly sampled trajectory on `[0, t_final]`.
pub fn integrate(
    rho0: &DensityMatrix,
    params: &ModelParams,
    loss: &LossParams,
    t_final: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(t_final.is_finite() && t_final >= 0.0) {
        return invalid(format!("final time must be finite and ≥ 0, got {t_final}"));
    }
    let times = if t_final == 0.0 {
        vec![0.0]
    } else {
        if cfg.samples < 2 {
            return invalid("need at least 2 samples");
        }
        let last = cfg.samples - 1;
        (0..=last)
            .map(|k| t_final * k as f64 / last as f64)
            .collect()
    };
    integrate_at(rho0, params, loss, &times, cfg.dt)
}

fn require_transfer_chain(params: &ModelParams) -> Result<()> {
    if params.n() < 3 {
        return invalid(format!(
            "transfer needs at least 3 cavities, got {}",
            params.n()
        ));
    }
    Ok(())
}

/// `⟨Φ|ρ(t)|Φ⟩` with the pair started on the first two cavities and `Φ` the
/// same pair on the last two.
pub fn dissipative_transfer_probability(
    theta: f64,
    params: &ModelParams,
    loss: &LossParams,
    t: f64,
    dt: f64,
) -> Result<f64> {
    require_transfer_chain(params)?;
    let rho0 = DensityMatrix::initial_pair(theta, params.cavities())?;
    let traj = integrate_at(&rho0, params, loss, &[t], dt)?;
    Ok(traj.states[0].expectation(&transfer_target(theta, params.cavities())))
}

/// Midpoint grid of `points` angles on `(0, π/2)`; odd `points` puts π/4 in the middle.
pub fn theta_grid(points: usize) -> Vec<f64> {
    let step = std::f64::consts::FRAC_PI_2 / points as f64;
    (0..points).map(|i| (i as f64 + 0.5) * step).collect()
}

#[derive(Debug, Clone)]
pub struct TransferSweep {
    pub thetas: Vec<f64>,
    pub times: Vec<f64>,
    /// Rows follow `times`, columns follow `thetas`.
    pub probabilities: DMatrix<f64>,
    pub diagnostics: Diagnostics,
}

impl TransferSweep {
    /// `(θ, p)` of the largest probability at time row `row`; first wins on ties.
    pub fn argmax(&self, row: usize) -> (f64, f64) {
        let mut best = (self.thetas[0], self.probabilities[(row, 0)]);
        for (j, &theta) in self.thetas.iter().enumerate().skip(1) {
            let p = self.probabilities[(row, j)];
            if p > best.1 {
                best = (theta, p);
            }
        }
        best
    }
}

/// `p_tθ` over a θ × t grid.
///
/// The equation is linear in ρ, and `ρ_θ(0) = s²E₁₁ + c²E₂₂ + sc(E₁₂ + E₂₁)`,
/// so three integrations cover every θ. Each recombined `ρ_θ(t)` is checked
/// against the same guards as a direct run.
pub fn dissipative_transfer_sweep(
    thetas: &[f64],
    times: &[f64],
    params: &ModelParams,
    loss: &LossParams,
    dt: f64,
) -> Result<TransferSweep> {
    require_transfer_chain(params)?;
    check_times(times, dt)?;
    if thetas.is_empty() || thetas.iter().any(|t| !t.is_finite()) {
        return invalid("θ grid must be non-empty and finite");
    }
    let n = params.n();
    let unit = |i: usize, j: usize| {
        let mut m = DMatrix::from_element(n + 1, n + 1, ZERO);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        if i != j {
            m[(j, i)] = Complex64::new(1.0, 0.0);
        }
        m
    };
    let gen = Generator::new(params, loss);
    // E₁₁ and E₂₂ are states; E₁₂ + E₂₁ = |+⟩⟨+| − |−⟩⟨−| is traceless with entries ≤ 2.
    let components: Vec<Vec<DMatrix<Complex64>>> = [
        (unit(1, 1), 1.0, 1.0),
        (unit(2, 2), 1.0, 1.0),
        (unit(1, 2), 0.0, 2.0),
    ]
    .par_iter()
    .map(|(x0, trace, bound)| {
        gen.run(x0, times, dt, |t, m| component_guard(t, m, *trace, *bound))
            .map(|(v, _)| v)
    })
    .collect::<Result<_>>()?;
    let steps = times
        .last()
        .map_or(0, |&t| (t / dt - 1e-9).ceil().max(0.0) as usize);

    let rows: Vec<(Vec<f64>, Diagnostics)> = (0..times.len())
        .into_par_iter()
        .map(|r| {
            let mut diag = Diagnostics::new(dt);
            let mut row = Vec::with_capacity(thetas.len());
            for &theta in thetas {
                let (s, c) = theta.sin_cos();
                let rho = &components[0][r] * Complex64::from(s * s)
                    + &components[1][r] * Complex64::from(c * c)
                    + &components[2][r] * Complex64::from(s * c);
                diag.sample(times[r], &rho)?;
                let phi = transfer_target(theta, params.cavities());
                row.push(DensityMatrix::unchecked(rho).expectation(&phi));
            }
            Ok((row, diag))
        })
        .collect::<Result<_>>()?;

    let mut diagnostics = Diagnostics::new(dt);
    diagnostics.steps = steps;
    let mut probabilities = DMatrix::zeros(times.len(), thetas.len());
    for (r, (row, diag)) in rows.iter().enumerate() {
        diagnostics.merge(diag);
        for (j, p) in row.iter().enumerate() {
            probabilities[(r, j)] = *p;
        }
    }
    Ok(TransferSweep {
        thetas: thetas.to_vec(),
        times: times.to_vec(),
        probabilities,
        diagnostics,
    })
}
