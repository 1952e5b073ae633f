//! Normal modes of the uniform hopping chain.
//!
//! The single-particle hopping matrix (ω on the diagonal, J on both
//! off-diagonals, open ends) is diagonalized by the orthogonal sine transform
//! `S(j,k) = √(2/(n+1)) sin(kjπ/(n+1))` with mode frequencies
//! `Ω_k = ω + 2J cos(kπ/(n+1))`. Modes are labelled `k = 1..n` in anything
//! user-facing; storage is zero-based.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::fock::CavityCount;

/// Default tolerance for [`SpectralData::evolution_period`].
pub const DEFAULT_PERIOD_TOL: f64 = 1e-9;
/// Default largest integer multiple searched by the period analysis.
pub const DEFAULT_PERIOD_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    cavities: CavityCount,
    omega: f64,
    coupling: f64,
}

impl ModelParams {
    pub fn new(n: usize, omega: f64, coupling: f64) -> Result<Self> {
        let cavities = CavityCount::new(n)?;
        if !(omega.is_finite() && omega > 0.0) {
            return invalid(format!("cavity frequency must be positive, got {omega}"));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return invalid(format!(
                "hopping strength must be non-negative, got {coupling}"
            ));
        }
        Ok(ModelParams {
            cavities,
            omega,
            coupling,
        })
    }

    /// ω = 1, J = 0.5 ω.
    pub fn reference(n: usize) -> Result<Self> {
        Self::new(n, 1.0, 0.5)
    }

    pub fn cavities(&self) -> CavityCount {
        self.cavities
    }

    pub fn n(&self) -> usize {
        self.cavities.get()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn single_particle_hamiltonian(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.omega
            } else if i.abs_diff(j) == 1 {
                self.coupling
            } else {
                0.0
            }
        })
    }
}

/// Outcome of the revival-period analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    /// All mode frequencies coincide; every state is stationary up to a phase.
    Stationary,
    /// Smallest revival time, `multiple` times the longest gap period.
    Periodic { period: f64, multiple: u64 },
    /// No common multiple of the gap periods within the search bound.
    Aperiodic,
}

impl Period {
    /// `Stationary` maps to `Some(0.0)`.
    pub fn as_option(&self) -> Option<f64> {
        match *self {
            Period::Stationary => Some(0.0),
            Period::Periodic { period, .. } => Some(period),
            Period::Aperiodic => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    params: ModelParams,
    transform: DMatrix<f64>,
    frequencies: DVector<f64>,
}

impl SpectralData {
    pub fn new(params: ModelParams) -> Self {
        let n = params.n();
        let norm = (2.0 / (n as f64 + 1.0)).sqrt();
        let arg = PI / (n as f64 + 1.0);
        let transform =
            DMatrix::from_fn(n, n, |j, k| norm * (((j + 1) * (k + 1)) as f64 * arg).sin());
        let frequencies = DVector::from_fn(n, |k, _| {
            params.omega + 2.0 * params.coupling * ((k + 1) as f64 * arg).cos()
        });
        SpectralData {
            params,
            transform,
            frequencies,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `S(j,k)` with rows indexed by site and columns by mode.
    pub fn transform(&self) -> &DMatrix<f64> {
        &self.transform
    }

    pub fn frequencies(&self) -> &DVector<f64> {
        &self.frequencies
    }

    /// `Ω_k` for the 1-based mode label `k`.
    pub fn frequency(&self, k: usize) -> Option<f64> {
        k.checked_sub(1)
            .and_then(|i| self.frequencies.get(i).copied())
    }

    /// `U(t) = S · diag(e^{-iΩ_k t}) · Sᵀ`; entry `(l, j)` is the amplitude
    /// for a photon starting at site `j` to be found at site `l`.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let n = self.params.n();
        let phases: Vec<Complex64> = self
            .frequencies
            .iter()
            .map(|&w| Complex64::from_polar(1.0, -w * t))
            .collect();
        DMatrix::from_fn(n, n, |l, j| {
            (0..n)
                .map(|k| phases[k] * (self.transform[(l, k)] * self.transform[(j, k)]))
                .sum()
        })
    }

    pub fn evolution_period(&self, tol: f64) -> Result<Period> {
        self.evolution_period_bounded(tol, DEFAULT_PERIOD_BOUND)
    }

    /// Smallest `T` at which every gap period `2π/|Ω_i − Ω_k|` fits an integer
    /// number of times, each to within `tol` cycles.
    ///
    /// Gap ratios against the smallest gap are resolved by continued-fraction
    /// convergents; a common multiple larger than `bound` means aperiodic.
    pub fn evolution_period_bounded(&self, tol: f64, bound: u64) -> Result<Period> {
        if !(tol.is_finite() && tol > 0.0) {
            return invalid(format!("period tolerance must be positive, got {tol}"));
        }
        if bound == 0 {
            return invalid("period search bound must be positive");
        }

        let mut freqs: Vec<f64> = self.frequencies.iter().copied().collect();
        freqs.sort_by(|a, b| a.total_cmp(b));
        let scale = self.params.omega.abs() + 2.0 * self.params.coupling;
        freqs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
        if freqs.len() < 2 {
            return Ok(Period::Stationary);
        }

        let mut gaps = Vec::new();
        for (i, a) in freqs.iter().enumerate() {
            for b in &freqs[i + 1..] {
                gaps.push((b - a).abs());
            }
        }
        let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let ratios: Vec<f64> = gaps.iter().map(|g| g / min_gap).collect();

        let mut lcm: u64 = 1;
        for &r in &ratios {
            match smallest_multiplier(r, tol, bound) {
                Some(q) => {
                    lcm = lcm / gcd(lcm, q) * q;
                    if lcm > bound {
                        return Ok(Period::Aperiodic);
                    }
                }
                None => return Ok(Period::Aperiodic),
            }
        }

        let fits = |m: u64| {
            ratios.iter().all(|&r| {
                let x = m as f64 * r;
                (x - x.round()).abs() <= tol
            })
        };
        let mut multiple = lcm;
        while multiple <= bound {
            if fits(multiple) {
                return Ok(Period::Periodic {
                    period: multiple as f64 * 2.0 * PI / min_gap,
                    multiple,
                });
            }
            multiple += lcm;
        }
        Ok(Period::Aperiodic)
    }
}

/// Denominator of the first continued-fraction convergent `p/q` of `r` with
/// `|q·r − p| ≤ tol`. Convergents are best approximations, so no smaller `q`
/// satisfies the bound.
fn smallest_multiplier(r: f64, tol: f64, bound: u64) -> Option<u64> {
    let (mut h_prev, mut h) = (0.0_f64, 1.0_f64);
    let (mut k_prev, mut k) = (1u64, 0u64);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        let h_next = a * h + h_prev;
        let k_next = (a as u64).checked_mul(k)?.checked_add(k_prev)?;
        if k_next > bound {
            return None;
        }
        (h_prev, h) = (h, h_next);
        (k_prev, k) = (k, k_next);
        if (k as f64 * r - h).abs() <= tol {
            return Some(k);
        }
        let frac = x - a;
        if frac <= f64::EPSILON {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
