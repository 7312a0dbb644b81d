use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rayon::prelude::*;

use super::field::build_field_matrices;
use super::space::{DickeSpace, FockSpace, JointSpace};
use super::spin::{build_spin_matrices, ladder_coefficient};
use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_error, kron, CMatrix, CVector, C64, ONE, ZERO};

/// One term `coeff · A ⊗ B`; a `None` factor is the identity.
#[derive(Debug, Clone)]
pub struct TensorTerm {
    pub coeff: C64,
    pub atom: Option<CMatrix>,
    pub field: Option<CMatrix>,
}

/// Operator on the joint space kept as a sum of tensor products.
///
/// Products and commutators stay in factored form, which keeps exact
/// operator identities cheap to check on spaces whose dense joint matrix
/// would be large.
#[derive(Debug, Clone)]
pub struct TensorOperator {
    dicke: DickeSpace,
    fock: FockSpace,
    terms: Vec<TensorTerm>,
}

fn mul_factor(x: &Option<CMatrix>, y: &Option<CMatrix>) -> Option<CMatrix> {
    match (x, y) {
        (None, None) => None,
        (Some(a), None) => Some(a.clone()),
        (None, Some(b)) => Some(b.clone()),
        (Some(a), Some(b)) => Some(a * b),
    }
}

/// Both factors when neither is the identity.
fn both<'a>(x: &'a Option<CMatrix>, y: &'a Option<CMatrix>) -> Option<(&'a CMatrix, &'a CMatrix)> {
    x.as_ref().zip(y.as_ref())
}

fn term(coeff: C64, atom: Option<CMatrix>, field: Option<CMatrix>) -> TensorTerm {
    TensorTerm { coeff, atom, field }
}

impl TensorOperator {
    pub fn zero(dicke: DickeSpace, fock: FockSpace) -> Self {
        TensorOperator {
            dicke,
            fock,
            terms: Vec::new(),
        }
    }

    pub fn identity(dicke: DickeSpace, fock: FockSpace) -> Self {
        Self::from_term(dicke, fock, None, None)
    }

    /// `A ⊗ I`
    pub fn atom(dicke: DickeSpace, fock: FockSpace, a: CMatrix) -> Self {
        assert_eq!(a.nrows(), dicke.dim());
        Self::from_term(dicke, fock, Some(a), None)
    }

    /// `I ⊗ B`
    pub fn field(dicke: DickeSpace, fock: FockSpace, b: CMatrix) -> Self {
        assert_eq!(b.nrows(), fock.dim());
        Self::from_term(dicke, fock, None, Some(b))
    }

    /// `A ⊗ B`
    pub fn product(dicke: DickeSpace, fock: FockSpace, a: CMatrix, b: CMatrix) -> Self {
        assert_eq!(a.nrows(), dicke.dim());
        assert_eq!(b.nrows(), fock.dim());
        Self::from_term(dicke, fock, Some(a), Some(b))
    }

    fn from_term(
        dicke: DickeSpace,
        fock: FockSpace,
        atom: Option<CMatrix>,
        field: Option<CMatrix>,
    ) -> Self {
        TensorOperator {
            dicke,
            fock,
            terms: vec![TensorTerm {
                coeff: ONE,
                atom,
                field,
            }],
        }
    }

    pub fn dicke(&self) -> DickeSpace {
        self.dicke
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn terms(&self) -> &[TensorTerm] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        self.dicke.dim() * self.fock.dim()
    }

    pub fn scale(mut self, factor: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= factor;
        }
        self
    }

    pub fn adjoint(&self) -> Self {
        TensorOperator {
            dicke: self.dicke,
            fock: self.fock,
            terms: self
                .terms
                .iter()
                .map(|t| TensorTerm {
                    coeff: t.coeff.conj(),
                    atom: t.atom.as_ref().map(|m| m.adjoint()),
                    field: t.field.as_ref().map(|m| m.adjoint()),
                })
                .collect(),
        }
    }

    /// `[X, Y]`, formed factor by factor:
    /// `[A⊗B, C⊗D] = ½([A,C]⊗{B,D} + {A,C}⊗[B,D])`.
    ///
    /// Cancellations then happen in the small factor matrices instead of
    /// between large joint entries.
    pub fn commutator(&self, other: &Self) -> Self {
        self.pairwise(other, |x, y, out| {
            let coeff = x.coeff * y.coeff;
            match (both(&x.atom, &y.atom), both(&x.field, &y.field)) {
                (None, _) => {
                    if let Some((b, d)) = both(&x.field, &y.field) {
                        out.push(term(coeff, mul_factor(&x.atom, &y.atom), Some(b * d - d * b)));
                    }
                }
                (Some((a, cc)), None) => out.push(term(coeff, Some(a * cc - cc * a), mul_factor(&x.field, &y.field))),
                (Some((a, cc)), Some((b, d))) => {
                    let half = coeff * 0.5;
                    out.push(term(half, Some(a * cc - cc * a), Some(b * d + d * b)));
                    out.push(term(half, Some(a * cc + cc * a), Some(b * d - d * b)));
                }
            }
        })
    }

    /// ½(XY + YX), formed factor by factor like [`TensorOperator::commutator`].
    pub fn sym_product(&self, other: &Self) -> Self {
        self.pairwise(other, |x, y, out| {
            let coeff = x.coeff * y.coeff;
            match (both(&x.atom, &y.atom), both(&x.field, &y.field)) {
                (None, Some((b, d))) => out.push(term(coeff * 0.5, mul_factor(&x.atom, &y.atom), Some(b * d + d * b))),
                (Some((a, cc)), None) => out.push(term(coeff * 0.5, Some(a * cc + cc * a), mul_factor(&x.field, &y.field))),
                (None, None) => out.push(term(coeff, mul_factor(&x.atom, &y.atom), mul_factor(&x.field, &y.field))),
                (Some((a, cc)), Some((b, d))) => {
                    let quarter = coeff * 0.25;
                    out.push(term(quarter, Some(a * cc + cc * a), Some(b * d + d * b)));
                    out.push(term(quarter, Some(a * cc - cc * a), Some(b * d - d * b)));
                }
            }
        })
    }

    fn pairwise(&self, other: &Self, f: impl Fn(&TensorTerm, &TensorTerm, &mut Vec<TensorTerm>)) -> Self {
        assert_eq!((self.dicke, self.fock), (other.dicke, other.fock));
        let mut terms = Vec::new();
        for x in &self.terms {
            for y in &other.terms {
                f(x, y, &mut terms);
            }
        }
        TensorOperator {
            dicke: self.dicke,
            fock: self.fock,
            terms,
        }
    }

    /// Matrix of joint entries `<i, n| O |j, n'>` over field indices for a fixed atom pair.
    pub fn field_block(&self, i: usize, j: usize) -> CMatrix {
        let df = self.fock.dim();
        let mut out = CMatrix::zeros(df, df);
        for t in &self.terms {
            let a = match &t.atom {
                Some(m) => m[(i, j)],
                None if i == j => ONE,
                None => ZERO,
            } * t.coeff;
            if a == ZERO {
                continue;
            }
            match &t.field {
                Some(b) => out += b * a,
                None => {
                    for n in 0..df {
                        out[(n, n)] += a;
                    }
                }
            }
        }
        out
    }

    /// Largest entry modulus among joint entries whose photon numbers
    /// `(n, n')` satisfy `keep`.
    pub fn max_abs_entry_where(&self, keep: impl Fn(usize, usize) -> bool + Sync) -> f64 {
        let da = self.dicke.dim();
        let df = self.fock.dim();
        (0..da)
            .into_par_iter()
            .map(|i| {
                let mut best = 0.0f64;
                for j in 0..da {
                    let block = self.field_block(i, j);
                    for n in 0..df {
                        for np in 0..df {
                            if keep(n, np) {
                                best = best.max(block[(n, np)].norm());
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.max_abs_entry_where(|_, _| true)
    }

    pub fn to_dense(&self) -> CMatrix {
        let da = self.dicke.dim();
        let df = self.fock.dim();
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for t in &self.terms {
            let a = t.atom.clone().unwrap_or_else(|| CMatrix::identity(da, da));
            let b = t.field.clone().unwrap_or_else(|| CMatrix::identity(df, df));
            out += kron(&a, &b) * t.coeff;
        }
        out
    }

    /// `O |ψ>` for a joint vector in m-major order.
    pub fn apply(&self, psi: &CVector) -> Result<CVector> {
        if psi.len() != self.dim() {
            return Err(Error::mismatch(self.dim(), psi.len()));
        }
        let da = self.dicke.dim();
        let df = self.fock.dim();
        let grid = joint_matrix(psi, da, df);
        let mut acc = CMatrix::zeros(da, df);
        for t in &self.terms {
            let left = match &t.atom {
                Some(a) => a * &grid,
                None => grid.clone(),
            };
            let both = match &t.field {
                Some(b) => left * b.transpose(),
                None => left,
            };
            acc += both * t.coeff;
        }
        Ok(flatten_joint(&acc))
    }

    pub fn expect(&self, psi: &CVector) -> Result<C64> {
        let o = self.apply(psi)?;
        Ok(psi.dotc(&o))
    }
}

/// View a joint m-major vector as the `(spin, photon)` amplitude matrix.
pub fn joint_matrix(psi: &CVector, da: usize, df: usize) -> CMatrix {
    CMatrix::from_row_slice(da, df, psi.as_slice())
}

pub fn flatten_joint(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.transpose().iter().copied())
}

impl Add for &TensorOperator {
    type Output = TensorOperator;

    fn add(self, rhs: &TensorOperator) -> TensorOperator {
        assert_eq!((self.dicke, self.fock), (rhs.dicke, rhs.fock));
        let mut terms = self.terms.clone();
        terms.extend(rhs.terms.iter().cloned());
        TensorOperator {
            dicke: self.dicke,
            fock: self.fock,
            terms,
        }
    }
}

impl Sub for &TensorOperator {
    type Output = TensorOperator;

    fn sub(self, rhs: &TensorOperator) -> TensorOperator {
        self + &rhs.clone().scale(c(-1.0, 0.0))
    }
}

impl Mul for &TensorOperator {
    type Output = TensorOperator;

    fn mul(self, rhs: &TensorOperator) -> TensorOperator {
        assert_eq!((self.dicke, self.fock), (rhs.dicke, rhs.fock));
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for x in &self.terms {
            for y in &rhs.terms {
                terms.push(TensorTerm {
                    coeff: x.coeff * y.coeff,
                    atom: mul_factor(&x.atom, &y.atom),
                    field: mul_factor(&x.field, &y.field),
                });
            }
        }
        TensorOperator {
            dicke: self.dicke,
            fock: self.fock,
            terms,
        }
    }
}

/// Operator stored as one dense block per excitation sector.
#[derive(Debug, Clone)]
pub struct BlockedOperator {
    joint: Arc<JointSpace>,
    blocks: Vec<CMatrix>,
    hermitian: bool,
}

impl BlockedOperator {
    pub fn new(joint: Arc<JointSpace>, blocks: Vec<CMatrix>, hermitian: bool) -> Result<Self> {
        if blocks.len() != joint.sectors().len() {
            return Err(Error::mismatch(
                format!("{} sector blocks", joint.sectors().len()),
                blocks.len(),
            ));
        }
        for (b, s) in blocks.iter().zip(joint.sectors()) {
            if b.shape() != (s.dim(), s.dim()) {
                return Err(Error::mismatch(
                    format!("{0}x{0} block for k={1}", s.dim(), s.k),
                    format!("{}x{}", b.nrows(), b.ncols()),
                ));
            }
        }
        Ok(BlockedOperator {
            joint,
            blocks,
            hermitian,
        })
    }

    /// Extract the sector blocks of a tensor operator.
    ///
    /// Returns the operator and the largest modulus of any matrix element
    /// connecting two different sectors (zero for excitation-conserving operators).
    pub fn from_tensor(op: &TensorOperator, joint: Arc<JointSpace>) -> Result<(Self, f64)> {
        if op.dicke() != joint.dicke() || op.fock() != joint.fock() {
            return Err(Error::mismatch("operator on the same joint space", "foreign operator"));
        }
        let dense = op.to_dense();
        let mut off_sector = 0.0f64;
        for r in 0..dense.nrows() {
            for col in 0..dense.ncols() {
                if joint.locate(r).0 != joint.locate(col).0 {
                    off_sector = off_sector.max(dense[(r, col)].norm());
                }
            }
        }
        let blocks = joint
            .sectors()
            .iter()
            .map(|s| CMatrix::from_fn(s.dim(), s.dim(), |r, col| dense[(s.indices[r], s.indices[col])]))
            .collect();
        let hermitian = hermiticity_error(&dense) == 0.0;
        Ok((BlockedOperator::new(joint, blocks, hermitian)?, off_sector))
    }

    pub fn joint(&self) -> &Arc<JointSpace> {
        &self.joint
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.blocks.iter().map(hermiticity_error).fold(0.0, f64::max)
    }

    /// Dense matrix in the joint m-major ordering.
    pub fn to_dense(&self) -> CMatrix {
        let d = self.joint.dim();
        let mut out = CMatrix::zeros(d, d);
        for (b, s) in self.blocks.iter().zip(self.joint.sectors()) {
            for (r, &gr) in s.indices.iter().enumerate() {
                for (col, &gc) in s.indices.iter().enumerate() {
                    out[(gr, gc)] = b[(r, col)];
                }
            }
        }
        out
    }

    pub fn apply(&self, psi: &CVector) -> Result<CVector> {
        if psi.len() != self.joint.dim() {
            return Err(Error::mismatch(self.joint.dim(), psi.len()));
        }
        let mut out = CVector::zeros(psi.len());
        for (b, s) in self.blocks.iter().zip(self.joint.sectors()) {
            let local = CVector::from_iterator(s.dim(), s.indices.iter().map(|&i| psi[i]));
            let image = b * local;
            for (v, &i) in image.iter().zip(&s.indices) {
                out[i] = *v;
            }
        }
        Ok(out)
    }

    pub fn expect(&self, psi: &CVector) -> Result<C64> {
        Ok(psi.dotc(&self.apply(psi)?))
    }

    /// Induced ∞-norm (max absolute row sum) over all blocks.
    pub fn norm_inf(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                b.row_iter()
                    .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Resonant interaction `g (a S+ + a† S-)` as a tensor operator.
pub fn interaction_tensor(dicke: DickeSpace, fock: FockSpace, coupling: f64) -> TensorOperator {
    let s = build_spin_matrices(&dicke);
    let f = build_field_matrices(&fock);
    let h = &TensorOperator::product(dicke, fock, s.splus, f.a)
        + &TensorOperator::product(dicke, fock, s.sminus, f.a_dag);
    h.scale(c(coupling, 0.0))
}

/// Dimensionless interaction Hamiltonian `a S+ + a† S-` (g = ħ = 1),
/// assembled sector by sector. Each block is real symmetric tridiagonal:
/// `<i+1, n-1| a S+ |i, n> = √n · √((2S - i)(i + 1))`.
pub fn interaction_hamiltonian(joint: &Arc<JointSpace>) -> BlockedOperator {
    let dicke = joint.dicke();
    let blocks: Vec<CMatrix> = joint
        .sectors()
        .par_iter()
        .map(|s| {
            let d = s.dim();
            let mut b = CMatrix::zeros(d, d);
            for p in 0..d.saturating_sub(1) {
                let l = s.members[p];
                let value = (l.photons as f64).sqrt() * ladder_coefficient(&dicke, l.spin_index);
                b[(p + 1, p)] = c(value, 0.0);
                b[(p, p + 1)] = c(value, 0.0);
            }
            b
        })
        .collect();
    BlockedOperator {
        joint: Arc::clone(joint),
        blocks,
        hermitian: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn joint(n: u32, n_max: usize) -> Arc<JointSpace> {
        Arc::new(JointSpace::new(DickeSpace::new(n).unwrap(), FockSpace::new(n_max)))
    }

    #[test]
    fn single_excitation_block_spin_half() {
        let j = joint(1, 3);
        let h = interaction_hamiltonian(&j);
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        assert_eq!(h.block(1), &expected);
        assert_eq!(j.sectors()[1].members[0].photons, 1);
    }

    #[test]
    fn single_excitation_block_spin_one() {
        let j = joint(2, 3);
        let h = interaction_hamiltonian(&j);
        let b = h.block(1);
        assert!((b[(0, 1)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn blocked_matches_dense_tensor_product() {
        for (n, n_max) in [(1, 4), (3, 5), (6, 2), (50, 60)] {
            let j = joint(n, n_max);
            let blocked = interaction_hamiltonian(&j).to_dense();
            let dense = interaction_tensor(j.dicke(), j.fock(), 1.0).to_dense();
            assert!(max_abs_diff(&blocked, &dense) < 1e-14, "N={n} n_max={n_max}");
        }
    }

    #[test]
    fn off_sector_elements_vanish_exactly() {
        let j = joint(4, 6);
        let op = interaction_tensor(j.dicke(), j.fock(), 1.0);
        let (blocked, off) = BlockedOperator::from_tensor(&op, Arc::clone(&j)).unwrap();
        assert_eq!(off, 0.0);
        assert!(blocked.is_hermitian());
        assert_eq!(blocked.hermiticity_error(), 0.0);
    }

    #[test]
    fn tensor_apply_matches_dense() {
        let j = joint(3, 4);
        let s = build_spin_matrices(&j.dicke());
        let f = build_field_matrices(&j.fock());
        let op = &TensorOperator::product(j.dicke(), j.fock(), s.sx.clone(), f.a.clone())
            + &TensorOperator::atom(j.dicke(), j.fock(), s.sz.clone());
        let psi = CVector::from_fn(j.dim(), |i, _| c((i as f64).sin(), (i as f64 * 0.3).cos()));
        let dense = op.to_dense() * &psi;
        let fast = op.apply(&psi).unwrap();
        assert!((dense - fast).camax() < 1e-13);
    }

    #[test]
    fn tensor_entry_scan_matches_dense() {
        let j = joint(2, 3);
        let h = interaction_tensor(j.dicke(), j.fock(), 1.0);
        let f = build_field_matrices(&j.fock());
        let x = TensorOperator::field(j.dicke(), j.fock(), f.a.clone());
        let comm = h.commutator(&x);
        let dense = comm.to_dense();
        let max_dense = dense.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!((comm.max_abs_entry() - max_dense).abs() < 1e-14);
    }
}
