//! Exact unitary evolution, one photon-number sector at a time.
//!
//! The hopping Hamiltonian is block diagonal in total photon number. Each
//! block is assembled from ladder operators, diagonalized once, and then
//! evolved for any `t` as `V · diag(e^{-iλt}) · Vᵀ`. An independent route,
//! [`multinomial_amplitude`], pushes every photon through the single-particle
//! propagator and collects the bosonic combinatorial factors.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, CcaError, Result};
use crate::fock::{ladder_matrix, number_operator, FockBasis, LadderKind, OccupationState};
use crate::spectral::{ModelParams, SpectralData};
use crate::states::{PureState, SectorState};

/// Photon count above which [`multinomial_amplitude`] refuses to expand.
pub const ORACLE_PHOTON_LIMIT: u32 = 6;

/// Grid density used for figure-style series over one period.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// `ω Σ a_j†a_j + J Σ (a_j†a_{j+1} + a_{j+1}†a_j)` restricted to `basis`.
pub fn sector_hamiltonian(params: &ModelParams, basis: &FockBasis) -> Result<DMatrix<f64>> {
    if basis.cavities() != params.cavities() {
        return Err(CcaError::SectorMismatch(format!(
            "basis over {} cavities, model has {}",
            basis.cavities(),
            params.n()
        )));
    }
    let n = params.n();
    let dim = basis.dim();
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..n {
        h += number_operator(basis, j)? * params.omega();
    }
    if basis.total_photons() == 0 || params.coupling() == 0.0 {
        return Ok(h);
    }

    let lower = FockBasis::enumerate(basis.cavities(), basis.total_photons() - 1)?;
    let lowered: Vec<DMatrix<f64>> = (0..n)
        .map(|j| ladder_matrix(basis, &lower, j, LadderKind::Annihilate).map(|m| m.map(|z| z.re)))
        .collect::<Result<_>>()?;
    for j in 0..n - 1 {
        // a_j† a_{j+1}: annihilate at j+1, then create at j (= transpose of a_j).
        let hop = lowered[j].transpose() * &lowered[j + 1];
        h += (&hop + hop.transpose()) * params.coupling();
    }
    Ok(h)
}

/// Eigendecomposition of one sector Hamiltonian.
#[derive(Debug, Clone)]
pub struct SectorEvolver {
    basis: Arc<FockBasis>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SectorEvolver {
    pub fn new(params: &ModelParams, basis: Arc<FockBasis>) -> Result<Self> {
        let h = sector_hamiltonian(params, &basis)?;
        let eig = SymmetricEigen::new(h);
        Ok(SectorEvolver {
            basis,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Coefficients of `v` in the eigenbasis.
    pub fn to_modes(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let vt = &self.eigenvectors;
        DVector::from_fn(vt.ncols(), |e, _| {
            (0..vt.nrows()).map(|i| v[i] * vt[(i, e)]).sum()
        })
    }

    /// Phases the eigen-coefficients to time `t` and maps back to Fock amplitudes.
    pub fn from_modes(&self, modes: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let phased: Vec<Complex64> = modes
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, &l)| c * Complex64::from_polar(1.0, -l * t))
            .collect();
        let vt = &self.eigenvectors;
        DVector::from_fn(vt.nrows(), |i, _| {
            phased.iter().enumerate().map(|(e, c)| c * vt[(i, e)]).sum()
        })
    }

    pub fn propagate(&self, v: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        self.from_modes(&self.to_modes(v), t)
    }
}

struct PreparedSector {
    evolver: SectorEvolver,
    modes: DVector<Complex64>,
}

/// An initial state decomposed into sector eigenmodes, ready to be sampled
/// at arbitrary times.
pub struct StateEvolution {
    state: PureState,
    sectors: BTreeMap<u32, PreparedSector>,
}

impl StateEvolution {
    pub fn new(state: &PureState, params: &ModelParams) -> Result<Self> {
        if state.cavities() != params.cavities() {
            return invalid(format!(
                "state over {} cavities, model has {}",
                state.cavities(),
                params.n()
            ));
        }
        let sectors = state
            .sectors()
            .map(|(k, s)| {
                let evolver = SectorEvolver::new(params, s.basis().clone())?;
                let modes = evolver.to_modes(s.amplitudes());
                Ok((k, PreparedSector { evolver, modes }))
            })
            .collect::<Result<_>>()?;
        Ok(StateEvolution {
            state: state.clone(),
            sectors,
        })
    }

    pub fn initial(&self) -> &PureState {
        &self.state
    }

    pub fn at(&self, t: f64) -> PureState {
        let sectors = self
            .sectors
            .iter()
            .map(|(&k, p)| {
                let amps = p.evolver.from_modes(&p.modes, t);
                let s = SectorState::new(p.evolver.basis.clone(), amps)
                    .expect("evolved amplitudes keep the sector dimension");
                (k, s)
            })
            .collect();
        PureState::from_parts(self.state.cavities(), sectors)
    }

    pub fn amplitude(&self, occupation: &OccupationState, t: f64) -> Complex64 {
        let Some(p) = self.sectors.get(&occupation.total()) else {
            return Complex64::default();
        };
        let Some(row) = p.evolver.basis.index_of(occupation) else {
            return Complex64::default();
        };
        p.modes
            .iter()
            .zip(p.evolver.eigenvalues.iter())
            .enumerate()
            .map(|(e, (c, &l))| c * Complex64::from_polar(p.evolver.eigenvectors[(row, e)], -l * t))
            .sum()
    }

    pub fn probability(&self, occupation: &OccupationState, t: f64) -> f64 {
        self.amplitude(occupation, t).norm_sqr()
    }

    /// `d/dt ⟨occupation|ψ(t)⟩`.
    pub fn amplitude_derivative(&self, occupation: &OccupationState, t: f64) -> Complex64 {
        let Some(p) = self.sectors.get(&occupation.total()) else {
            return Complex64::default();
        };
        let Some(row) = p.evolver.basis.index_of(occupation) else {
            return Complex64::default();
        };
        p.modes
            .iter()
            .zip(p.evolver.eigenvalues.iter())
            .enumerate()
            .map(|(e, (c, &l))| {
                c * Complex64::from_polar(p.evolver.eigenvectors[(row, e)], -l * t)
                    * Complex64::new(0.0, -l)
            })
            .sum()
    }

    pub fn probability_derivative(&self, occupation: &OccupationState, t: f64) -> f64 {
        let a = self.amplitude(occupation, t);
        2.0 * (a.conj() * self.amplitude_derivative(occupation, t)).re
    }
}

pub fn evolve(state: &PureState, params: &ModelParams, t: f64) -> Result<PureState> {
    if !t.is_finite() {
        return invalid(format!("time must be finite, got {t}"));
    }
    Ok(StateEvolution::new(state, params)?.at(t))
}

/// `|⟨initial|e^{-iHt}|initial⟩|²` for a Fock initial state.
pub fn survival_probability(
    initial: &OccupationState,
    params: &ModelParams,
    t: f64,
) -> Result<f64> {
    let state = PureState::fock(params.cavities(), initial)?;
    Ok(evolve(&state, params, t)?.probability(initial))
}

/// `cos^{4m}(Jt/√2)`: survival of `|m00⟩` in a three-cavity array, usable
/// for photon numbers far beyond what sector evolution can hold.
pub fn closed_form_survival(photons: u32, params: &ModelParams, t: f64) -> Result<f64> {
    if params.n() != 3 {
        return invalid(format!(
            "closed-form survival holds for 3 cavities, got {}",
            params.n()
        ));
    }
    let c = (params.coupling() * t / std::f64::consts::SQRT_2).cos();
    let exponent = 4 * u64::from(photons);
    Ok(match i32::try_from(exponent) {
        Ok(e) => c.powi(e),
        Err(_) => c.abs().powf(exponent as f64),
    })
}

/// `⟨final|U(t)|initial⟩` by expanding each initial photon through the
/// single-particle propagator:
/// `Σ_{assignments} Π U(dest, src) · √(Π final_l!) / √(Π initial_j!)`.
pub fn multinomial_amplitude(
    initial: &OccupationState,
    final_state: &OccupationState,
    spectral: &SpectralData,
    t: f64,
) -> Result<Complex64> {
    let n = spectral.params().cavities();
    initial.check_cavities(n)?;
    final_state.check_cavities(n)?;
    let photons = initial.total();
    if final_state.total() != photons {
        return Err(CcaError::SectorMismatch(format!(
            "{initial} has {photons} photons, {final_state} has {}",
            final_state.total()
        )));
    }
    if photons > ORACLE_PHOTON_LIMIT {
        return Err(CcaError::OracleTooLarge {
            photons,
            limit: ORACLE_PHOTON_LIMIT,
        });
    }

    let u = spectral.propagator(t);
    let sources: Vec<usize> = initial
        .occupations()
        .iter()
        .enumerate()
        .flat_map(|(j, &m)| std::iter::repeat_n(j, m as usize))
        .collect();
    let target = final_state.occupations();
    let sites = n.get();

    let mut dest = vec![0usize; sources.len()];
    let mut counts = vec![0u32; sites];
    let mut sum = Complex64::default();
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        dest.iter().for_each(|&d| counts[d] += 1);
        if counts == target {
            sum += dest
                .iter()
                .zip(&sources)
                .fold(Complex64::new(1.0, 0.0), |acc, (&d, &s)| acc * u[(d, s)]);
        }
        // Odometer over all sites^photons assignments.
        let mut i = 0;
        while i < dest.len() {
            dest[i] += 1;
            if dest[i] < sites {
                break;
            }
            dest[i] = 0;
            i += 1;
        }
        if i == dest.len() {
            break;
        }
    }

    let fact = |m: u32| (1..=m).map(f64::from).product::<f64>();
    let out: f64 = target.iter().map(|&m| fact(m)).product();
    let inp: f64 = initial.occupations().iter().map(|&m| fact(m)).product();
    Ok(sum * (out / inp).sqrt())
}

/// Weights `|⟨c_k|ψ⟩|²` of a single-excitation state on the normal modes,
/// listed for `k = 1..n`.
pub fn mode_weights(spectral: &SpectralData, state: &PureState) -> Result<Vec<f64>> {
    if state.cavities() != spectral.params().cavities() {
        return invalid("state and spectrum disagree on the number of cavities");
    }
    let Some(one) = state.sector(1) else {
        return invalid("state has no single-excitation component");
    };
    if (one.norm_sqr() - state.norm_sqr()).abs() > 1e-12 {
        return invalid("mode weights need a state confined to the single-excitation sector");
    }
    let s = spectral.transform();
    let amps = one.amplitudes();
    Ok((0..s.ncols())
        .map(|k| {
            (0..s.nrows())
                .map(|j| amps[j] * s[(j, k)])
                .sum::<Complex64>()
                .norm_sqr()
        })
        .collect())
}

/// Occupation probabilities sampled on a time grid; rows are times.
#[derive(Debug, Clone)]
pub struct ProbabilitySeries {
    pub times: Vec<f64>,
    pub labels: Vec<OccupationState>,
    pub probabilities: DMatrix<f64>,
}

impl ProbabilitySeries {
    pub fn column(&self, label: &OccupationState) -> Option<Vec<f64>> {
        let c = self.labels.iter().position(|l| l == label)?;
        Some(self.probabilities.column(c).iter().copied().collect())
    }
}

pub fn probability_series(
    state: &PureState,
    params: &ModelParams,
    times: &[f64],
    labels: &[OccupationState],
) -> Result<ProbabilitySeries> {
    for l in labels {
        l.check_cavities(params.cavities())?;
    }
    if let Some(t) = times.iter().find(|t| !t.is_finite()) {
        return invalid(format!("time must be finite, got {t}"));
    }
    let evo = StateEvolution::new(state, params)?;
    let rows: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| labels.iter().map(|l| evo.probability(l, t)).collect())
        .collect();
    let probabilities = DMatrix::from_fn(times.len(), labels.len(), |i, j| rows[i][j]);
    Ok(ProbabilitySeries {
        times: times.to_vec(),
        labels: labels.to_vec(),
        probabilities,
    })
}

/// `points` evenly spaced times from `start` to `stop` inclusive.
pub fn uniform_grid(start: f64, stop: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return invalid(format!("time grid needs at least 2 points, got {points}"));
    }
    if !(start.is_finite() && stop.is_finite() && start >= 0.0 && stop > start) {
        return invalid(format!(
            "time grid needs 0 ≤ start < stop, got [{start}, {stop}]"
        ));
    }
    let step = (stop - start) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                stop
            } else {
                start + step * i as f64
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::CavityCount;
    use proptest::prelude::*;
    use std::f64::consts::{PI, SQRT_2};

    fn occ(s: &str) -> OccupationState {
        s.parse().unwrap()
    }

    fn reference(n: usize) -> ModelParams {
        ModelParams::reference(n).unwrap()
    }

    fn basis(n: usize, k: u32) -> Arc<FockBasis> {
        Arc::new(FockBasis::enumerate(CavityCount::new(n).unwrap(), k).unwrap())
    }

    #[test]
    fn single_excitation_block_is_the_hopping_matrix() {
        for n in 2..7 {
            let p = ModelParams::new(n, 1.3, 0.4).unwrap();
            let h = sector_hamiltonian(&p, &basis(n, 1)).unwrap();
            assert!((h - p.single_particle_hamiltonian()).norm() < 1e-14);
        }
    }

    #[test]
    fn single_excitation_eigenvalues_match_mode_frequencies() {
        let p = reference(3);
        let ev = SectorEvolver::new(&p, basis(3, 1)).unwrap();
        let mut got: Vec<f64> = ev.eigenvalues().iter().copied().collect();
        got.sort_by(|a, b| b.total_cmp(a));
        let h = SQRT_2 / 2.0;
        for (g, e) in got.iter().zip([1.0 + h, 1.0, 1.0 - h]) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn two_photon_hopping_element() {
        let p = reference(3);
        let b = basis(3, 2);
        let h = sector_hamiltonian(&p, &b).unwrap();
        let i = b.index_of(&occ("110")).unwrap();
        let j = b.index_of(&occ("200")).unwrap();
        assert!((h[(i, j)] - SQRT_2 * 0.5).abs() < 1e-15);
        assert!((h[(j, i)] - h[(i, j)]).abs() < 1e-15);
        assert!((h[(j, j)] - 2.0).abs() < 1e-15);
        // |200⟩ and |011⟩ are not connected by a single hop.
        assert_eq!(h[(j, b.index_of(&occ("011")).unwrap())], 0.0);
    }

    #[test]
    fn evolver_reconstructs_hamiltonian() {
        let p = ModelParams::new(4, 1.0, 0.7).unwrap();
        for k in 0..4 {
            let b = basis(4, k);
            let h = sector_hamiltonian(&p, &b).unwrap();
            let ev = SectorEvolver::new(&p, b).unwrap();
            let v = ev.eigenvectors();
            let id = DMatrix::<f64>::identity(v.ncols(), v.ncols());
            assert!((v.transpose() * v - id).norm() < 1e-10);
            let rebuilt = v * DMatrix::from_diagonal(ev.eigenvalues()) * v.transpose();
            assert!((rebuilt - h).norm() < 1e-10);
        }
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let st = PureState::weak_coherent(
            CavityCount::new(3).unwrap(),
            &[
                Complex64::new(0.0, 0.1),
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, -0.3),
            ],
        )
        .unwrap();
        let out = evolve(&st, &reference(3), 0.0).unwrap();
        for (k, s) in st.sectors() {
            let d = out.sector(k).unwrap().amplitudes() - s.amplitudes();
            assert!(d.norm() < 1e-12);
        }
        assert!(evolve(&st, &reference(3), f64::NAN).is_err());
    }

    #[test]
    fn mode_weights_of_edge_photon() {
        let sp = SpectralData::new(reference(3));
        let st = PureState::fock(sp.params().cavities(), &occ("100")).unwrap();
        let w = mode_weights(&sp, &st).unwrap();
        for (g, e) in w.iter().zip([0.25, 0.5, 0.25]) {
            assert!((g - e).abs() < 1e-12);
        }
        let two = PureState::fock(sp.params().cavities(), &occ("200")).unwrap();
        assert!(mode_weights(&sp, &two).is_err());
    }

    #[test]
    fn middle_photon_population() {
        let p = reference(3);
        let st = PureState::fock(p.cavities(), &occ("010")).unwrap();
        let evo = StateEvolution::new(&st, &p).unwrap();
        for i in 0..50 {
            let t = 0.173 * i as f64;
            let x = t / SQRT_2;
            assert!((evo.probability(&occ("010"), t) - x.cos().powi(2)).abs() < 1e-12);
            assert!((evo.probability(&occ("100"), t) - 0.5 * x.sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn probability_derivative_matches_finite_difference() {
        let p = reference(3);
        let st = PureState::weak_coherent(
            p.cavities(),
            &[
                Complex64::new(0.0, 0.1),
                Complex64::new(0.0, 0.01),
                Complex64::new(0.0, 0.1),
            ],
        )
        .unwrap();
        let evo = StateEvolution::new(&st, &p).unwrap();
        let h = 1e-5;
        for label in ["100", "010", "110", "111"] {
            let o = occ(label);
            for t in [0.3, 1.7, 4.0] {
                let fd = (evo.probability(&o, t + h) - evo.probability(&o, t - h)) / (2.0 * h);
                let d = evo.probability_derivative(&o, t);
                assert!(
                    (fd - d).abs() < 1e-9 * (1.0 + d.abs()),
                    "{label} at {t}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn survival_quarter_point() {
        let t = PI / SQRT_2;
        let p = survival_probability(&occ("100"), &reference(3), t).unwrap();
        assert!((p - 0.25).abs() < 1e-12);
        assert!(
            (survival_probability(&occ("0201"), &reference(4), 0.0).unwrap() - 1.0).abs() < 1e-12
        );
    }

    #[test]
    fn closed_form_survival_values() {
        let p = reference(3);
        // Jt/√2 = π/2
        let t = PI * SQRT_2 / p.coupling() / 2.0;
        assert!(closed_form_survival(1, &p, t).unwrap().abs() < 1e-30);
        let period = SQRT_2 * PI / p.coupling();
        assert!((closed_form_survival(3000, &p, period).unwrap() - 1.0).abs() < 1e-9);
        assert!(closed_form_survival(1, &reference(4), 0.1).is_err());
        for t in uniform_grid(0.0, period, 101).unwrap() {
            let a = closed_form_survival(2, &p, t).unwrap();
            let b = survival_probability(&occ("200"), &p, t).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_reduces_to_propagator_for_one_photon() {
        let sp = SpectralData::new(reference(4));
        let u = sp.propagator(2.7);
        let a = multinomial_amplitude(&occ("0100"), &occ("0001"), &sp, 2.7).unwrap();
        assert!((a - u[(3, 1)]).norm() < 1e-14);
    }

    #[test]
    fn oracle_two_photons_from_one_site() {
        let sp = SpectralData::new(reference(3));
        let t = 1.234;
        let u = sp.propagator(t);
        let a = multinomial_amplitude(&occ("200"), &occ("110"), &sp, t).unwrap();
        let expected = u[(0, 0)] * u[(1, 0)] * SQRT_2;
        assert!((a - expected).norm() < 1e-14);
    }

    #[test]
    fn oracle_guards() {
        let sp = SpectralData::new(reference(3));
        assert!(matches!(
            multinomial_amplitude(&occ("100"), &occ("110"), &sp, 0.0),
            Err(CcaError::SectorMismatch(_))
        ));
        assert!(matches!(
            multinomial_amplitude(&occ("700"), &occ("070"), &sp, 0.0),
            Err(CcaError::OracleTooLarge { .. })
        ));
        assert!(multinomial_amplitude(&occ("1000"), &occ("0100"), &sp, 0.0).is_err());
    }

    #[test]
    fn oracle_matches_evolution_on_two_photon_sector() {
        let p = reference(3);
        let sp = SpectralData::new(p);
        let b = basis(3, 2);
        for init in b.states() {
            let evo =
                StateEvolution::new(&PureState::fock(p.cavities(), init).unwrap(), &p).unwrap();
            for i in 0..20 {
                let t = 0.37 * i as f64;
                for fin in b.states() {
                    let a = multinomial_amplitude(init, fin, &sp, t).unwrap();
                    assert!((a - evo.amplitude(fin, t)).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn series_completeness_and_mirror_symmetry() {
        let p = reference(3);
        let st = PureState::fock(p.cavities(), &occ("020")).unwrap();
        let b = basis(3, 2);
        let times = uniform_grid(0.0, 10.0, 41).unwrap();
        let s = probability_series(&st, &p, &times, b.states()).unwrap();
        for i in 0..times.len() {
            let row_sum: f64 = s.probabilities.row(i).sum();
            assert!((row_sum - 1.0).abs() < 1e-10);
        }
        let a = s.column(&occ("200")).unwrap();
        let c = s.column(&occ("002")).unwrap();
        assert!(a.iter().zip(&c).all(|(x, y)| (x - y).abs() < 1e-12));
        assert!(s.column(&occ("300")).is_none());
        assert!(probability_series(&st, &p, &times, &[occ("10")]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert_eq!(uniform_grid(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(uniform_grid(0.0, 1.0, 1).is_err());
        assert!(uniform_grid(1.0, 1.0, 3).is_err());
        assert!(uniform_grid(-1.0, 1.0, 3).is_err());
    }

    proptest! {
        #[test]
        fn evolution_preserves_norm(t in -50.0f64..50.0, a in 0.0f64..0.6, b in 0.0f64..0.6) {
            let p = ModelParams::new(4, 1.0, 0.5).unwrap();
            let st = PureState::weak_coherent(
                p.cavities(),
                &[Complex64::new(a, 0.1), Complex64::new(0.0, b), Complex64::new(0.1, 0.0), Complex64::new(-a, b)],
            ).unwrap();
            let out = evolve(&st, &p, t).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
            // Sector weights are conserved individually.
            for (k, s) in st.sectors() {
                prop_assert!((out.sector_probability(k) - s.norm_sqr()).abs() < 1e-12);
            }
        }
    }
}
