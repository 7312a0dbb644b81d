use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DickeSpace, FockSpace, SpinRotator};
use crate::linalg::{c, CVector, C64};

/// Default bound on the probability discarded by Fock truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Which Hilbert space a state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Dicke { num_atoms: u32 },
    Fock { cutoff: usize },
    Joint { num_atoms: u32, cutoff: usize },
}

impl Space {
    pub fn dicke(space: DickeSpace) -> Self {
        Space::Dicke {
            num_atoms: space.num_atoms(),
        }
    }

    pub fn fock(space: FockSpace) -> Self {
        Space::Fock {
            cutoff: space.cutoff(),
        }
    }

    pub fn joint(dicke: DickeSpace, fock: FockSpace) -> Self {
        Space::Joint {
            num_atoms: dicke.num_atoms(),
            cutoff: fock.cutoff(),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Space::Dicke { num_atoms } => num_atoms as usize + 1,
            Space::Fock { cutoff } => cutoff + 1,
            Space::Joint { num_atoms, cutoff } => (num_atoms as usize + 1) * (cutoff + 1),
        }
    }

    pub fn as_dicke(&self) -> Result<DickeSpace> {
        match *self {
            Space::Dicke { num_atoms } => DickeSpace::new(num_atoms),
            other => Err(Error::mismatch("atomic (Dicke) state", format!("{other:?}"))),
        }
    }

    pub fn as_fock(&self) -> Result<FockSpace> {
        match *self {
            Space::Fock { cutoff } => Ok(FockSpace::new(cutoff)),
            other => Err(Error::mismatch("field (Fock) state", format!("{other:?}"))),
        }
    }

    pub fn as_joint(&self) -> Result<(DickeSpace, FockSpace)> {
        match *self {
            Space::Joint { num_atoms, cutoff } => {
                Ok((DickeSpace::new(num_atoms)?, FockSpace::new(cutoff)))
            }
            other => Err(Error::mismatch("joint state", format!("{other:?}"))),
        }
    }

    /// Human-readable label of basis index `i`.
    pub fn basis_label(&self, index: usize) -> String {
        match *self {
            Space::Dicke { num_atoms } => format!("m={}", half_integer(2 * index as i64 - i64::from(num_atoms))),
            Space::Fock { .. } => format!("n={index}"),
            Space::Joint { num_atoms, cutoff } => {
                let spin_index = index / (cutoff + 1);
                let n = index % (cutoff + 1);
                format!(
                    "m={},n={n}",
                    half_integer(2 * spin_index as i64 - i64::from(num_atoms))
                )
            }
        }
    }
}

fn half_integer(twice: i64) -> String {
    if twice % 2 == 0 {
        format!("{}", twice / 2)
    } else {
        format!("{twice}/2")
    }
}

/// Normalized state vector in a fixed basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: Space,
    amplitudes: CVector,
    tail_mass: f64,
}

impl PureState {
    /// Normalizes `amplitudes`; fails on a wrong length or a zero vector.
    pub fn new(space: Space, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::mismatch(space.dim(), amplitudes.len()));
        }
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("amplitudes", "state vector has zero or non-finite norm"));
        }
        Ok(PureState {
            space,
            amplitudes: amplitudes.unscale(norm),
            tail_mass: 0.0,
        })
    }

    pub(crate) fn from_normalized(space: Space, amplitudes: CVector) -> Self {
        PureState {
            space,
            amplitudes,
            tail_mass: 0.0,
        }
    }

    pub fn basis(space: Space, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::invalid("index", format!("basis index {index} outside dimension {}", space.dim())));
        }
        let mut v = CVector::zeros(space.dim());
        v[index] = c(1.0, 0.0);
        Ok(PureState::from_normalized(space, v))
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Probability discarded by Fock truncation before renormalization.
    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn with_tail_mass(mut self, tail: f64) -> Self {
        self.tail_mass = tail;
        self
    }

    /// `|<self|other>|`
    pub fn overlap_abs(&self, other: &PureState) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::mismatch(format!("{:?}", self.space), format!("{:?}", other.space)));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes).norm())
    }
}

/// Bloch (spin-coherent) state `e^{-iφSz} e^{-iθSy} |S, S>`.
pub fn bloch_state(theta: f64, phi: f64, space: &DickeSpace) -> PureState {
    let rot = SpinRotator::new(*space);
    let column = rot.bloch_column(theta, phi);
    let v = CVector::from_vec(column);
    let norm = v.norm();
    PureState::from_normalized(Space::dicke(*space), v.unscale(norm))
}

/// `ln|<n|α>|` for n = 0..len, via accumulated log-factorials.
pub(crate) fn coherent_log_moduli(alpha_abs: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let half_mean = -0.5 * alpha_abs * alpha_abs;
    let log_abs = alpha_abs.ln();
    let mut log_fact = 0.0;
    for n in 0..len {
        if n > 0 {
            log_fact += (n as f64).ln();
        }
        let term = if alpha_abs == 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            half_mean + n as f64 * log_abs - 0.5 * log_fact
        };
        out.push(term);
    }
    out
}

/// Unnormalized coherent amplitudes `e^{-|α|²/2} αⁿ/√(n!)` for n ≤ cutoff.
pub(crate) fn coherent_amplitudes(alpha: C64, cutoff: usize) -> Vec<C64> {
    let arg = alpha.arg();
    coherent_log_moduli(alpha.norm(), cutoff + 1)
        .into_iter()
        .enumerate()
        .map(|(n, lm)| C64::from_polar(lm.exp(), arg * n as f64))
        .collect()
}

/// Poisson mass of a coherent state beyond `cutoff`.
pub fn coherent_tail_mass(alpha_abs: f64, cutoff: usize) -> f64 {
    if alpha_abs == 0.0 {
        return 0.0;
    }
    let mean = alpha_abs * alpha_abs;
    let log_abs2 = 2.0 * alpha_abs.ln();
    let mut log_fact: f64 = (1..=cutoff + 1).map(|k| (k as f64).ln()).sum();
    let mut n = cutoff + 1;
    let mut tail = 0.0;
    loop {
        let log_p = -mean + n as f64 * log_abs2 - log_fact;
        let p = log_p.exp();
        tail += p;
        if n as f64 > mean && p < 1e-40 * tail.max(1e-300) {
            break;
        }
        if n as f64 > mean + 50.0 * (mean.sqrt() + 1.0) + 100.0 {
            break;
        }
        n += 1;
        log_fact += (n as f64).ln();
    }
    tail
}

/// Smallest cutoff whose coherent-state tail mass is at most `tail_tol`.
pub fn required_cutoff(alpha_abs: f64, tail_tol: f64) -> usize {
    let mut cutoff = alpha_abs.powi(2).floor() as usize;
    while coherent_tail_mass(alpha_abs, cutoff) > tail_tol {
        cutoff += 1;
    }
    // step back in case the starting point already satisfied the bound
    while cutoff > 0 && coherent_tail_mass(alpha_abs, cutoff - 1) <= tail_tol {
        cutoff -= 1;
    }
    cutoff
}

/// Field coherent state `|α>`, renormalized after truncation.
pub fn coherent_state(alpha: C64, space: &FockSpace, tail_tol: f64) -> Result<PureState> {
    let tail = coherent_tail_mass(alpha.norm(), space.cutoff());
    if tail > tail_tol {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            tail,
            tolerance: tail_tol,
        });
    }
    let v = CVector::from_vec(coherent_amplitudes(alpha, space.cutoff()));
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            tail: 1.0,
            tolerance: tail_tol,
        });
    }
    Ok(PureState::from_normalized(Space::fock(*space), v.unscale(norm)).with_tail_mass(tail))
}

pub fn vacuum(space: &FockSpace) -> PureState {
    let mut v = CVector::zeros(space.dim());
    v[0] = c(1.0, 0.0);
    PureState::from_normalized(Space::fock(*space), v)
}

/// Dicke basis state by index (0 is m = -S).
pub fn dicke_basis(space: &DickeSpace, index: usize) -> Result<PureState> {
    PureState::basis(Space::dicke(*space), index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    #[test]
    fn labels() {
        let s = Space::Dicke { num_atoms: 1 };
        assert_eq!(s.basis_label(0), "m=-1/2");
        let j = Space::Joint { num_atoms: 2, cutoff: 3 };
        assert_eq!(j.basis_label(5), "m=0,n=1");
    }

    #[test]
    fn tail_mass_matches_direct_sum() {
        let alpha: f64 = 2.3;
        let cutoff = 12;
        let head: f64 = coherent_amplitudes(c(alpha, 0.0), cutoff).iter().map(|z| z.norm_sqr()).sum();
        let tail = coherent_tail_mass(alpha, cutoff);
        assert!((head + tail - 1.0).abs() < 1e-14);
    }

    #[test]
    fn required_cutoff_is_minimal() {
        for alpha in [0.0, 0.5, 2.0, 5.8, 9.0] {
            let n = required_cutoff(alpha, DEFAULT_TAIL_TOL);
            assert!(coherent_tail_mass(alpha, n) <= DEFAULT_TAIL_TOL);
            if n > 0 {
                assert!(coherent_tail_mass(alpha, n - 1) > DEFAULT_TAIL_TOL);
            }
        }
    }

    #[test]
    fn coherent_rejects_small_cutoff() {
        let err = coherent_state(c(3.0, 0.0), &FockSpace::new(5), DEFAULT_TAIL_TOL).unwrap_err();
        assert!(matches!(err, Error::CutoffTooSmall { cutoff: 5, .. }));
    }

    #[test]
    fn zero_alpha_is_vacuum() {
        let s = coherent_state(c(0.0, 0.0), &FockSpace::new(4), DEFAULT_TAIL_TOL).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert!(s.amplitudes().iter().skip(1).all(|z| *z == ZERO));
    }

    #[test]
    fn zero_vector_rejected() {
        let err = PureState::new(Space::Fock { cutoff: 2 }, CVector::zeros(3));
        assert!(err.is_err());
        let err = PureState::new(Space::Fock { cutoff: 2 }, CVector::zeros(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }
}
