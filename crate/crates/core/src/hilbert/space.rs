use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric (Dicke) subspace of `N` two-level atoms, collective spin `S = N/2`.
///
/// The spin is stored as the integer `2S`; basis index `i` labels `m = i - S`
/// in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DickeSpace {
    twice_spin: u32,
}

impl DickeSpace {
    pub fn new(num_atoms: u32) -> Result<Self> {
        if num_atoms == 0 {
            return Err(Error::invalid("num_atoms", "must be at least 1"));
        }
        Ok(DickeSpace {
            twice_spin: num_atoms,
        })
    }

    pub fn num_atoms(&self) -> u32 {
        self.twice_spin
    }

    pub fn twice_spin(&self) -> u32 {
        self.twice_spin
    }

    pub fn spin(&self) -> f64 {
        f64::from(self.twice_spin) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_spin as usize + 1
    }

    /// Magnetic quantum number of basis index `i`.
    pub fn m(&self, index: usize) -> f64 {
        index as f64 - self.spin()
    }

    /// `2m` of basis index `i`, exact.
    pub fn twice_m(&self, index: usize) -> i64 {
        2 * index as i64 - i64::from(self.twice_spin)
    }

    pub fn index_of_twice_m(&self, twice_m: i64) -> Option<usize> {
        let shifted = twice_m + i64::from(self.twice_spin);
        if shifted < 0 || shifted % 2 != 0 {
            return None;
        }
        let index = (shifted / 2) as usize;
        (index < self.dim()).then_some(index)
    }

    /// Index of `m = +S` (all atoms excited).
    pub fn top(&self) -> usize {
        self.twice_spin as usize
    }
}

/// Truncated single-mode Fock space `{|0>, ..., |n_max>}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Self {
        FockSpace { cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// Joint basis label `(m, n)` stored as spin index and photon number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointLabel {
    pub spin_index: usize,
    pub photons: usize,
}

/// Eigenspace of `a†a + Sz + S` with eigenvalue `k`, members in ascending `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcitationSector {
    pub k: usize,
    pub members: Vec<JointLabel>,
    /// Joint (m-major) indices of the members, same order.
    pub indices: Vec<usize>,
}

impl ExcitationSector {
    pub fn dim(&self) -> usize {
        self.members.len()
    }
}

/// Serializable row of the sector table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SectorRecord {
    pub k: usize,
    pub dim: usize,
    pub members: Vec<MemberRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MemberRecord {
    pub m: f64,
    pub n: usize,
}

/// Tensor product of a Dicke space and a truncated Fock space, with the
/// excitation-sector decomposition. Joint index is m-major:
/// `index = spin_index * (n_max + 1) + n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointSpace {
    dicke: DickeSpace,
    fock: FockSpace,
    sectors: Vec<ExcitationSector>,
    locator: Vec<(usize, usize)>,
}

impl JointSpace {
    pub fn new(dicke: DickeSpace, fock: FockSpace) -> Self {
        let two_s = dicke.twice_spin() as usize;
        let n_max = fock.cutoff();
        let mut locator = vec![(usize::MAX, usize::MAX); dicke.dim() * fock.dim()];
        let sectors = (0..=two_s + n_max)
            .map(|k| {
                let lo = k.saturating_sub(n_max);
                let hi = k.min(two_s);
                let members: Vec<JointLabel> = (lo..=hi)
                    .map(|spin_index| JointLabel {
                        spin_index,
                        photons: k - spin_index,
                    })
                    .collect();
                let indices: Vec<usize> = members
                    .iter()
                    .map(|l| l.spin_index * fock.dim() + l.photons)
                    .collect();
                for (pos, &idx) in indices.iter().enumerate() {
                    locator[idx] = (k, pos);
                }
                ExcitationSector { k, members, indices }
            })
            .collect();
        JointSpace {
            dicke,
            fock,
            sectors,
            locator,
        }
    }

    pub fn dicke(&self) -> DickeSpace {
        self.dicke
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn dim(&self) -> usize {
        self.dicke.dim() * self.fock.dim()
    }

    pub fn sectors(&self) -> &[ExcitationSector] {
        &self.sectors
    }

    pub fn index(&self, spin_index: usize, photons: usize) -> usize {
        spin_index * self.fock.dim() + photons
    }

    pub fn label(&self, index: usize) -> JointLabel {
        JointLabel {
            spin_index: index / self.fock.dim(),
            photons: index % self.fock.dim(),
        }
    }

    /// `(k, position within sector)` of a joint index.
    pub fn locate(&self, index: usize) -> (usize, usize) {
        self.locator[index]
    }

    /// Excitation number `n + m + S` of a joint index.
    pub fn excitation(&self, index: usize) -> usize {
        let l = self.label(index);
        l.photons + l.spin_index
    }

    /// Sectors whose every physically reachable member lies inside the cutoff.
    pub fn is_sector_complete(&self, k: usize) -> bool {
        k <= self.fock.cutoff()
    }

    pub fn sector_table(&self) -> Vec<SectorRecord> {
        self.sectors
            .iter()
            .map(|s| SectorRecord {
                k: s.k,
                dim: s.dim(),
                members: s
                    .members
                    .iter()
                    .map(|l| MemberRecord {
                        m: self.dicke.m(l.spin_index),
                        n: l.photons,
                    })
                    .collect(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dicke_dims_are_exact() {
        for n in 1..=12 {
            let d = DickeSpace::new(n).unwrap();
            assert_eq!(d.dim(), n as usize + 1);
            assert_eq!(d.spin() * 2.0, f64::from(n));
            assert_eq!(d.m(0), -d.spin());
            assert_eq!(d.m(d.top()), d.spin());
        }
        assert!(DickeSpace::new(0).is_err());
    }

    #[test]
    fn twice_m_round_trips() {
        let d = DickeSpace::new(5).unwrap();
        for i in 0..d.dim() {
            assert_eq!(d.index_of_twice_m(d.twice_m(i)), Some(i));
        }
        assert_eq!(d.index_of_twice_m(0), None);
        assert_eq!(d.index_of_twice_m(7), None);
    }

    #[test]
    fn sectors_partition_the_joint_basis() {
        for (n_atoms, n_max) in [(1, 0), (1, 4), (3, 2), (6, 9), (10, 3)] {
            let joint = JointSpace::new(DickeSpace::new(n_atoms).unwrap(), FockSpace::new(n_max));
            let total: usize = joint.sectors().iter().map(|s| s.dim()).sum();
            assert_eq!(total, joint.dim());
            let mut seen = vec![0u8; joint.dim()];
            for s in joint.sectors() {
                let two_s = n_atoms as usize;
                let expected = s.k.min(two_s).min(n_max).min(two_s + n_max - s.k) + 1;
                assert_eq!(s.dim(), expected, "k={}", s.k);
                for (l, &idx) in s.members.iter().zip(&s.indices) {
                    assert_eq!(l.photons + l.spin_index, s.k);
                    assert!(l.photons <= n_max && l.spin_index <= two_s);
                    assert_eq!(joint.locate(idx).0, s.k);
                    seen[idx] += 1;
                }
                assert!(s.members.windows(2).all(|w| w[0].spin_index < w[1].spin_index));
            }
            assert!(seen.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn sector_table_lists_members() {
        let joint = JointSpace::new(DickeSpace::new(1).unwrap(), FockSpace::new(1));
        let table = joint.sector_table();
        assert_eq!(table.len(), 3);
        assert_eq!(
            table[1].members,
            vec![MemberRecord { m: -0.5, n: 1 }, MemberRecord { m: 0.5, n: 0 }]
        );
    }
}
