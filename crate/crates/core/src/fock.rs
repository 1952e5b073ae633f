//! Bosonic occupation-number bases and the ladder/number operators on them.
//!
//! The hopping Hamiltonian conserves the total photon number, so every basis
//! here is a single fixed-photon-number sector. States inside a sector are
//! ordered lexicographically descending on the occupation vector, which puts
//! the single-excitation sector in site order: `|100…⟩, |010…⟩, …`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, CcaError, Result};

/// Largest sector dimension that [`FockBasis::enumerate`] will build.
pub const DEFAULT_DIMENSION_CAP: usize = 100_000;

/// Number of cavities in the array (at least two).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CavityCount(usize);

impl CavityCount {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return invalid(format!("need at least 2 cavities, got {n}"));
        }
        Ok(CavityCount(n))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

impl fmt::Display for CavityCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Photon count per cavity, e.g. `[1, 0, 0]` for `|100⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState(Vec<u32>);

impl OccupationState {
    pub fn new(occupations: Vec<u32>) -> Self {
        OccupationState(occupations)
    }

    /// `|0…0 m 0…0⟩` with `photons` in `cavity` (zero-based).
    pub fn single_site(n: CavityCount, cavity: usize, photons: u32) -> Result<Self> {
        check_cavity(n, cavity)?;
        let mut occ = vec![0; n.get()];
        occ[cavity] = photons;
        Ok(OccupationState(occ))
    }

    pub fn occupations(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn check_cavities(&self, n: CavityCount) -> Result<()> {
        if self.len() != n.get() {
            return invalid(format!(
                "occupation {self} has {} entries, expected {}",
                self.len(),
                n
            ));
        }
        Ok(())
    }

    /// Compact label used in CSV headers: digits run together when every
    /// occupation is below ten (`101`), otherwise dash-separated (`12-0-3`).
    pub fn label(&self) -> String {
        if self.0.iter().all(|&m| m < 10) {
            self.0.iter().map(|m| m.to_string()).collect()
        } else {
            self.0
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("-")
        }
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.label())
    }
}

impl FromStr for OccupationState {
    type Err = CcaError;

    /// Accepts `1,0,0`, `1 0 0`, `12-0-3` or the compact digit form `100`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |tok: &str| {
            tok.parse::<u32>()
                .map_err(|_| CcaError::InvalidParameter(format!("bad occupation '{tok}' in '{s}'")))
        };
        let occ = if s.contains([',', ' ', '-']) {
            s.split([',', ' ', '-'])
                .filter(|t| !t.is_empty())
                .map(parse)
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10).ok_or_else(|| {
                        CcaError::InvalidParameter(format!("bad occupation '{c}' in '{s}'"))
                    })
                })
                .collect::<Result<Vec<_>>>()?
        };
        if occ.is_empty() {
            return invalid("empty occupation list");
        }
        Ok(OccupationState(occ))
    }
}

/// Number of ways to put `photons` bosons into `n` modes, or `None` on overflow.
pub fn sector_dimension(n: CavityCount, photons: u32) -> Option<u128> {
    // C(photons + n - 1, n - 1), accumulated so every partial product is exact.
    let k = (n.get() - 1) as u128;
    let m = photons as u128;
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul(m + i)? / i;
    }
    Some(acc)
}

/// All occupation states of `n` cavities holding exactly `total_photons`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    cavities: CavityCount,
    total_photons: u32,
    states: Vec<OccupationState>,
    index_of: HashMap<OccupationState, usize>,
}

impl FockBasis {
    pub fn enumerate(n: CavityCount, total_photons: u32) -> Result<Self> {
        Self::enumerate_with_cap(n, total_photons, DEFAULT_DIMENSION_CAP)
    }

    pub fn enumerate_with_cap(n: CavityCount, total_photons: u32, cap: usize) -> Result<Self> {
        let dimension = sector_dimension(n, total_photons).unwrap_or(u128::MAX);
        if dimension > cap as u128 {
            return Err(CcaError::DimensionCap { dimension, cap });
        }

        let mut states = Vec::with_capacity(dimension as usize);
        let mut scratch = vec![0u32; n.get()];
        fill_descending(&mut scratch, 0, total_photons, &mut states);
        debug_assert_eq!(states.len() as u128, dimension);

        let index_of = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Ok(FockBasis {
            cavities: n,
            total_photons,
            states,
            index_of,
        })
    }

    pub fn cavities(&self) -> CavityCount {
        self.cavities
    }

    pub fn total_photons(&self) -> u32 {
        self.total_photons
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &OccupationState {
        &self.states[index]
    }

    pub fn index_of(&self, state: &OccupationState) -> Option<usize> {
        self.index_of.get(state).copied()
    }
}

fn fill_descending(
    scratch: &mut [u32],
    site: usize,
    remaining: u32,
    out: &mut Vec<OccupationState>,
) {
    if site + 1 == scratch.len() {
        scratch[site] = remaining;
        out.push(OccupationState(scratch.to_vec()));
        return;
    }
    for m in (0..=remaining).rev() {
        scratch[site] = m;
        fill_descending(scratch, site + 1, remaining - m, out);
    }
    scratch[site] = 0;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LadderKind {
    Create,
    Annihilate,
}

fn check_cavity(n: CavityCount, cavity: usize) -> Result<()> {
    if cavity >= n.get() {
        return Err(CcaError::CavityOutOfRange {
            index: cavity,
            cavities: n.get(),
        });
    }
    Ok(())
}

/// Matrix of `a_j†` (or `a_j`) from `from` into `to`, shaped `to.dim() × from.dim()`.
///
/// `cavity` is zero-based.
pub fn ladder_matrix(
    from: &FockBasis,
    to: &FockBasis,
    cavity: usize,
    kind: LadderKind,
) -> Result<DMatrix<Complex64>> {
    if from.cavities != to.cavities {
        return Err(CcaError::SectorMismatch(format!(
            "bases over {} and {} cavities",
            from.cavities, to.cavities
        )));
    }
    check_cavity(from.cavities, cavity)?;
    let expected = match kind {
        LadderKind::Create => from.total_photons.checked_add(1),
        LadderKind::Annihilate => from.total_photons.checked_sub(1),
    };
    if expected != Some(to.total_photons) {
        return Err(CcaError::SectorMismatch(format!(
            "{kind:?} maps sector {} to {:?}, target basis is sector {}",
            from.total_photons, expected, to.total_photons
        )));
    }

    let mut m = DMatrix::zeros(to.dim(), from.dim());
    let mut image = vec![0u32; from.cavities.get()];
    for (col, state) in from.states.iter().enumerate() {
        let occ = state.occupations()[cavity];
        let (new_occ, factor) = match kind {
            LadderKind::Create => (occ + 1, f64::from(occ + 1).sqrt()),
            LadderKind::Annihilate if occ == 0 => continue,
            LadderKind::Annihilate => (occ - 1, f64::from(occ).sqrt()),
        };
        image.copy_from_slice(state.occupations());
        image[cavity] = new_occ;
        let row = to
            .index_of(&OccupationState(image.clone()))
            .expect("image lies in the target sector");
        m[(row, col)] = Complex64::new(factor, 0.0);
    }
    Ok(m)
}

/// Diagonal matrix of `a_j† a_j` on `basis` (`cavity` zero-based).
pub fn number_operator(basis: &FockBasis, cavity: usize) -> Result<DMatrix<f64>> {
    check_cavity(basis.cavities, cavity)?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        basis.dim(),
        basis
            .states
            .iter()
            .map(|s| f64::from(s.occupations()[cavity])),
    )))
}
