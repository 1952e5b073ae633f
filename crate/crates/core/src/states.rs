//! Initial states: Fock products, weak coherent products and the two-site
//! entangled pair, plus the pair's concurrence.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{invalid, CcaError, Result};
use crate::fock::{CavityCount, FockBasis, OccupationState};

/// Amplitudes of one fixed-photon-number sector together with its basis.
#[derive(Debug, Clone)]
pub struct SectorState {
    basis: Arc<FockBasis>,
    amplitudes: DVector<Complex64>,
}

impl SectorState {
    pub fn new(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(CcaError::SectorMismatch(format!(
                "{} amplitudes for a sector of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(SectorState { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Pure state of the array as a direct sum of photon-number sectors.
#[derive(Debug, Clone)]
pub struct PureState {
    cavities: CavityCount,
    sectors: BTreeMap<u32, SectorState>,
}

const NORM_TOL: f64 = 1e-12;

impl PureState {
    /// Validates dimensions and unit norm.
    pub fn from_sectors(cavities: CavityCount, sectors: Vec<SectorState>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for s in sectors {
            if s.basis.cavities() != cavities {
                return Err(CcaError::SectorMismatch(format!(
                    "sector over {} cavities in a {}-cavity state",
                    s.basis.cavities(),
                    cavities
                )));
            }
            let k = s.basis.total_photons();
            if map.insert(k, s).is_some() {
                return Err(CcaError::SectorMismatch(format!("sector {k} given twice")));
            }
        }
        let state = PureState {
            cavities,
            sectors: map,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return invalid(format!("state norm² is {norm}, expected 1"));
        }
        Ok(state)
    }

    /// Rebuilds a state from evolved sectors without re-checking the norm.
    pub(crate) fn from_parts(cavities: CavityCount, sectors: BTreeMap<u32, SectorState>) -> Self {
        PureState { cavities, sectors }
    }

    pub fn fock(cavities: CavityCount, occupation: &OccupationState) -> Result<Self> {
        occupation.check_cavities(cavities)?;
        let basis = Arc::new(FockBasis::enumerate(cavities, occupation.total())?);
        let mut amps = DVector::zeros(basis.dim());
        let idx = basis
            .index_of(occupation)
            .expect("occupation lies in its own sector");
        amps[idx] = Complex64::new(1.0, 0.0);
        Self::from_sectors(cavities, vec![SectorState::new(basis, amps)?])
    }

    /// Product of per-cavity truncated coherent states
    /// `(|0⟩ + α_i|1⟩)/√(1+|α_i|²)`, expanded over sectors `0..=n`.
    ///
    /// Each `|α_i|` must be below 1; values above 0.5 are accepted with a
    /// warning since the two-term truncation is then a poor approximation.
    pub fn weak_coherent(cavities: CavityCount, alphas: &[Complex64]) -> Result<Self> {
        let n = cavities.get();
        if alphas.len() != n {
            return invalid(format!("{} amplitudes for {n} cavities", alphas.len()));
        }
        for (i, a) in alphas.iter().enumerate() {
            let r = a.norm();
            if !r.is_finite() || r >= 1.0 {
                return invalid(format!("|α_{}| = {r} outside the weak-field range", i + 1));
            }
            if r > 0.5 {
                log::warn!("|α_{}| = {r} is large for a one-photon truncation", i + 1);
            }
        }

        let norm: f64 = alphas
            .iter()
            .map(|a| 1.0 / (1.0 + a.norm_sqr()).sqrt())
            .product();
        let mut sectors = Vec::with_capacity(n + 1);
        for k in 0..=n as u32 {
            let basis = Arc::new(FockBasis::enumerate(cavities, k)?);
            let amps = DVector::from_iterator(
                basis.dim(),
                basis.states().iter().map(|s| {
                    let occ = s.occupations();
                    if occ.iter().any(|&m| m > 1) {
                        return Complex64::new(0.0, 0.0);
                    }
                    occ.iter()
                        .zip(alphas)
                        .filter(|(&m, _)| m == 1)
                        .fold(Complex64::new(norm, 0.0), |acc, (_, a)| acc * a)
                }),
            );
            sectors.push(SectorState::new(basis, amps)?);
        }
        Self::from_sectors(cavities, sectors)
    }

    /// `sinθ|1⟩|0⟩ + cosθ|0⟩|1⟩` on two adjacent sites, vacuum elsewhere.
    pub fn entangled_pair(
        cavities: CavityCount,
        pair: EntangledPair,
        placement: Placement,
    ) -> Result<Self> {
        let basis = Arc::new(FockBasis::enumerate(cavities, 1)?);
        let first = placement.first_site(cavities);
        let mut amps = DVector::zeros(basis.dim());
        // Single-excitation sector is ordered by site.
        amps[first] = Complex64::new(pair.theta.sin(), 0.0);
        amps[first + 1] = Complex64::new(pair.theta.cos(), 0.0);
        Self::from_sectors(cavities, vec![SectorState::new(basis, amps)?])
    }

    pub fn cavities(&self) -> CavityCount {
        self.cavities
    }

    pub fn sectors(&self) -> impl Iterator<Item = (u32, &SectorState)> {
        self.sectors.iter().map(|(&k, s)| (k, s))
    }

    pub fn sector(&self, photons: u32) -> Option<&SectorState> {
        self.sectors.get(&photons)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sectors.values().map(SectorState::norm_sqr).sum()
    }

    /// Probability of finding exactly `photons` in the whole array.
    pub fn sector_probability(&self, photons: u32) -> f64 {
        self.sector(photons).map_or(0.0, SectorState::norm_sqr)
    }

    pub fn amplitude(&self, occupation: &OccupationState) -> Complex64 {
        self.sector(occupation.total())
            .and_then(|s| s.basis.index_of(occupation).map(|i| s.amplitudes[i]))
            .unwrap_or_default()
    }

    pub fn probability(&self, occupation: &OccupationState) -> f64 {
        self.amplitude(occupation).norm_sqr()
    }
}

/// Mixing angle of the two-site pair, restricted to `0 < θ < π/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledPair {
    theta: f64,
}

impl EntangledPair {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < FRAC_PI_2) {
            return invalid(format!("pair angle must lie in (0, π/2), got {theta}"));
        }
        Ok(EntangledPair { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn concurrence(&self) -> f64 {
        concurrence(*self)
    }
}

/// `C(θ) = |sin 2θ|`.
pub fn concurrence(pair: EntangledPair) -> f64 {
    (2.0 * pair.theta).sin().abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    FirstTwo,
    LastTwo,
}

impl Placement {
    /// Zero-based index of the site carrying the `sinθ` amplitude.
    pub fn first_site(self, cavities: CavityCount) -> usize {
        match self {
            Placement::FirstTwo => 0,
            Placement::LastTwo => cavities.get() - 2,
        }
    }
}

impl FromStr for Placement {
    type Err = CcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "first" | "first_two" => Ok(Placement::FirstTwo),
            "last" | "last_two" => Ok(Placement::LastTwo),
            other => invalid(format!(
                "placement must be 'first' or 'last', got '{other}'"
            )),
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::FirstTwo => "first",
            Placement::LastTwo => "last",
        })
    }
}

/// Parses `a+bi`, `a-bi`, `bi`, `-i`, `a` style complex literals.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CcaError::InvalidParameter(format!("bad complex literal '{s}'"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t
            .parse::<f64>()
            .map(|re| Complex64::new(re, 0.0))
            .map_err(|_| bad());
    };
    // Split at the last sign that is not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => x.parse::<f64>().map_err(|_| bad())?,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

/// Text descriptor of an initial state:
/// `fock m1 … mn`, `coherent α1 … αn` or `pair θ first|last`.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Fock(OccupationState),
    Coherent(Vec<Complex64>),
    Pair { theta: f64, placement: Placement },
}

impl StateSpec {
    pub fn build(&self, cavities: CavityCount) -> Result<PureState> {
        match self {
            StateSpec::Fock(occ) => PureState::fock(cavities, occ),
            StateSpec::Coherent(alphas) => PureState::weak_coherent(cavities, alphas),
            StateSpec::Pair { theta, placement } => {
                PureState::entangled_pair(cavities, EntangledPair::new(*theta)?, *placement)
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = CcaError;

    fn from_str(s: &str) -> Result<Self> {
        let mut toks = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty());
        let kind = toks
            .next()
            .ok_or_else(|| CcaError::InvalidParameter("empty state descriptor".into()))?;
        let rest: Vec<&str> = toks.collect();
        match kind {
            "fock" => {
                let occ = rest
                    .iter()
                    .map(|t| {
                        t.parse::<u32>().map_err(|_| {
                            CcaError::InvalidParameter(format!("bad occupation '{t}'"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                if occ.is_empty() {
                    return invalid("fock descriptor needs occupations");
                }
                Ok(StateSpec::Fock(OccupationState::new(occ)))
            }
            "coherent" => {
                let alphas = rest
                    .iter()
                    .map(|t| parse_complex(t))
                    .collect::<Result<Vec<_>>>()?;
                if alphas.is_empty() {
                    return invalid("coherent descriptor needs amplitudes");
                }
                Ok(StateSpec::Coherent(alphas))
            }
            "pair" => {
                let [theta, placement] = rest[..] else {
                    return invalid("pair descriptor is 'pair θ first|last'");
                };
                let theta = theta
                    .parse::<f64>()
                    .map_err(|_| CcaError::InvalidParameter(format!("bad angle '{theta}'")))?;
                Ok(StateSpec::Pair {
                    theta,
                    placement: placement.parse()?,
                })
            }
            other => invalid(format!("unknown state kind '{other}'")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn cc(n: usize) -> CavityCount {
        CavityCount::new(n).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fock_states_sit_on_one_basis_vector() {
        for (n, label) in [(3, "100"), (3, "200"), (3, "010"), (4, "0300")] {
            let occ: OccupationState = label.parse().unwrap();
            let st = PureState::fock(cc(n), &occ).unwrap();
            assert_eq!(st.probability(&occ), 1.0);
            assert_eq!(st.sectors().count(), 1);
            assert_eq!(
                st.sector(occ.total()).unwrap().basis().total_photons(),
                occ.total()
            );
        }
        assert!(PureState::fock(cc(3), &"10".parse().unwrap()).is_err());
    }

    #[test]
    fn vacuum_coherent_state() {
        let st = PureState::weak_coherent(cc(3), &[c(0.0, 0.0); 3]).unwrap();
        assert_eq!(st.sector_probability(0), 1.0);
    }

    #[test]
    fn coherent_vacuum_weight() {
        let st = PureState::weak_coherent(cc(3), &[c(0.0, 0.1); 3]).unwrap();
        let p0 = st.sector_probability(0);
        assert!((p0 - 1.0 / 1.01f64.powi(3)).abs() < 1e-15);
        assert!((p0 - 0.970590147).abs() < 1e-9);
    }

    #[test]
    fn coherent_single_photon_amplitudes_follow_alphas() {
        let alphas = [c(0.0, 0.01), c(0.0, 0.1), c(0.0, 0.01)];
        let st = PureState::weak_coherent(cc(3), &alphas).unwrap();
        let amps = st.sector(1).unwrap().amplitudes();
        let scale = amps[1] / alphas[1];
        for i in 0..3 {
            assert!((amps[i] - alphas[i] * scale).norm() < 1e-15);
        }
        // Sector 2 never populates doubly-occupied sites.
        assert_eq!(st.probability(&"200".parse().unwrap()), 0.0);
        assert!(st.probability(&"110".parse().unwrap()) > 0.0);
    }

    #[test]
    fn coherent_rejects_strong_fields() {
        assert!(PureState::weak_coherent(cc(3), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(PureState::weak_coherent(cc(3), &[c(0.1, 0.0); 2]).is_err());
        assert!(PureState::weak_coherent(cc(3), &[c(0.7, 0.0); 3]).is_ok());
    }

    #[test]
    fn pair_states() {
        let st = PureState::entangled_pair(
            cc(4),
            EntangledPair::new(FRAC_PI_4).unwrap(),
            Placement::FirstTwo,
        )
        .unwrap();
        let a = st.sector(1).unwrap().amplitudes();
        let h = FRAC_PI_4.sin();
        assert!((a[0].re - h).abs() < 1e-15 && (a[1].re - h).abs() < 1e-15);
        assert_eq!(a[2].norm() + a[3].norm(), 0.0);

        let st = PureState::entangled_pair(
            cc(4),
            EntangledPair::new(1e-12).unwrap(),
            Placement::FirstTwo,
        )
        .unwrap();
        let a = st.sector(1).unwrap().amplitudes();
        assert!(a[0].norm() < 1e-11 && (a[1].re - 1.0).abs() < 1e-15);

        let st = PureState::entangled_pair(
            cc(3),
            EntangledPair::new(FRAC_PI_6).unwrap(),
            Placement::LastTwo,
        )
        .unwrap();
        let a = st.sector(1).unwrap().amplitudes();
        assert!(a[0].norm() < 1e-15);
        assert!((a[1].re - 0.5).abs() < 1e-15);
        assert!((a[2].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn pair_angle_is_open_interval() {
        assert!(EntangledPair::new(0.0).is_err());
        assert!(EntangledPair::new(FRAC_PI_2).is_err());
        assert!(EntangledPair::new(f64::NAN).is_err());
    }

    #[test]
    fn concurrence_values() {
        assert!((EntangledPair::new(FRAC_PI_4).unwrap().concurrence() - 1.0).abs() < 1e-15);
        assert!(EntangledPair::new(1e-9).unwrap().concurrence() < 1e-8);
        let v = EntangledPair::new(FRAC_PI_6).unwrap().concurrence();
        assert!((v - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.1i").unwrap(), c(0.0, 0.1));
        assert_eq!(parse_complex("1+2i").unwrap(), c(1.0, 2.0));
        assert_eq!(parse_complex("1-2.5i").unwrap(), c(1.0, -2.5));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("0.3").unwrap(), c(0.3, 0.0));
        assert_eq!(parse_complex("1e-2+1e-3i").unwrap(), c(0.01, 0.001));
        assert!(parse_complex("x+i").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            "fock 1 0 0".parse::<StateSpec>().unwrap(),
            StateSpec::Fock(OccupationState::new(vec![1, 0, 0]))
        );
        assert_eq!(
            "coherent 0.1i 0.01i 0.1i".parse::<StateSpec>().unwrap(),
            StateSpec::Coherent(vec![c(0.0, 0.1), c(0.0, 0.01), c(0.0, 0.1)])
        );
        assert_eq!(
            "pair 0.5 last".parse::<StateSpec>().unwrap(),
            StateSpec::Pair {
                theta: 0.5,
                placement: Placement::LastTwo
            }
        );
        assert!("pair 0.5".parse::<StateSpec>().is_err());
        assert!("thermal 1".parse::<StateSpec>().is_err());
        assert!("pair 0 first"
            .parse::<StateSpec>()
            .unwrap()
            .build(cc(3))
            .is_err());
    }

    proptest! {
        #[test]
        fn constructors_are_normalized(
            re in proptest::collection::vec(-0.6f64..0.6, 4),
            im in proptest::collection::vec(-0.6f64..0.6, 4),
            theta in 0.001f64..1.5,
        ) {
            let alphas: Vec<_> = re.iter().zip(&im).map(|(&a, &b)| c(a, b) * 0.7).collect();
            let st = PureState::weak_coherent(cc(4), &alphas).unwrap();
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
            let p0: f64 = alphas.iter().map(|a| 1.0 / (1.0 + a.norm_sqr())).product();
            prop_assert!((st.sector_probability(0) - p0).abs() < 1e-14);

            let pair = EntangledPair::new(theta).unwrap();
            let st = PureState::entangled_pair(cc(4), pair, Placement::LastTwo).unwrap();
            prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
            let mirror = EntangledPair::new(FRAC_PI_2 - theta).unwrap();
            prop_assert!((pair.concurrence() - mirror.concurrence()).abs() < 1e-12);
        }

        #[test]
        fn single_alpha_is_one_cavity_state(site in 0usize..3, re in -0.9f64..0.9, im in -0.4f64..0.4) {
            let mut alphas = vec![c(0.0, 0.0); 3];
            alphas[site] = c(re, im) * 0.9;
            prop_assume!(alphas[site].norm() < 1.0);
            let st = PureState::weak_coherent(cc(3), &alphas).unwrap();
            let norm = 1.0 / (1.0 + alphas[site].norm_sqr()).sqrt();
            prop_assert!((st.probability(&"000".parse().unwrap()) - norm * norm).abs() < 1e-14);
            let one = OccupationState::single_site(cc(3), site, 1).unwrap();
            prop_assert!((st.amplitude(&one) - alphas[site] * norm).norm() < 1e-14);
            prop_assert!(st.sector_probability(2) + st.sector_probability(3) < 1e-28);
        }
    }
}
