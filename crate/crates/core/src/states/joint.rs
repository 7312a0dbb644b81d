use super::density::DensityMatrix;
use super::pure::{PureState, Space};
use crate::error::{Error, Result};
use crate::hilbert::{flatten_joint, joint_matrix, DickeSpace, FockSpace, TensorOperator};
use crate::linalg::{kron, CMatrix, CVector, C64, ZERO};

/// Weights below this are dropped when a mixed state is split into pure components.
const WEIGHT_FLOOR: f64 = 1e-15;

/// Either factor of a product state.
#[derive(Debug, Clone)]
pub enum LocalState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl From<PureState> for LocalState {
    fn from(s: PureState) -> Self {
        LocalState::Pure(s)
    }
}

impl From<DensityMatrix> for LocalState {
    fn from(r: DensityMatrix) -> Self {
        LocalState::Mixed(r)
    }
}

impl LocalState {
    fn space(&self) -> Space {
        match self {
            LocalState::Pure(s) => s.space(),
            LocalState::Mixed(r) => r.space(),
        }
    }

    /// Spectral decomposition as `(weight, vector)` pairs.
    fn components(&self) -> Result<Vec<(f64, CVector)>> {
        match self {
            LocalState::Pure(s) => Ok(vec![(1.0, s.amplitudes().clone())]),
            LocalState::Mixed(r) => spectral_components(r.matrix()),
        }
    }
}

fn spectral_components(m: &CMatrix) -> Result<Vec<(f64, CVector)>> {
    let (values, vectors) = crate::linalg::hermitian_eigen(m).ok_or(Error::ConvergenceFailure {
        sector: 0,
        reason: "mixed-state decomposition".into(),
    })?;
    let mut out: Vec<(f64, CVector)> = values
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > WEIGHT_FLOOR)
        .map(|(j, &w)| (w, vectors.column(j).into_owned()))
        .collect();
    let total: f64 = out.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(Error::invalid("state", "density matrix has no positive weight"));
    }
    for (w, _) in &mut out {
        *w /= total;
    }
    // largest weights first
    out.reverse();
    Ok(out)
}

/// Mixed joint state kept as a convex combination of pure joint vectors.
///
/// This is the spectral form of the joint density operator; the dense matrix
/// is only built on request, so mixed states stay cheap on large joint spaces.
#[derive(Debug, Clone)]
pub struct JointEnsemble {
    dicke: DickeSpace,
    fock: FockSpace,
    components: Vec<(f64, CVector)>,
}

impl JointEnsemble {
    pub fn new(dicke: DickeSpace, fock: FockSpace, components: Vec<(f64, CVector)>) -> Result<Self> {
        let dim = dicke.dim() * fock.dim();
        if let Some((_, v)) = components.iter().find(|(_, v)| v.len() != dim) {
            return Err(Error::mismatch(dim, v.len()));
        }
        let total: f64 = components.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("weights", format!("sum to {total}, not 1")));
        }
        Ok(JointEnsemble {
            dicke,
            fock,
            components,
        })
    }

    pub fn dicke(&self) -> DickeSpace {
        self.dicke
    }

    pub fn fock(&self) -> FockSpace {
        self.fock
    }

    pub fn components(&self) -> &[(f64, CVector)] {
        &self.components
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.dicke.dim() * self.fock.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, v) in &self.components {
            m += (v * v.adjoint()).scale(*w);
        }
        DensityMatrix::from_parts(Space::joint(self.dicke, self.fock), m)
    }
}

/// State of the coupled atom–field system.
#[derive(Debug, Clone)]
pub enum JointState {
    Pure(PureState),
    Mixed(JointEnsemble),
}

impl JointState {
    pub fn spaces(&self) -> (DickeSpace, FockSpace) {
        match self {
            JointState::Pure(s) => s
                .space()
                .as_joint()
                .expect("joint pure state carries a joint space tag"),
            JointState::Mixed(e) => (e.dicke, e.fock),
        }
    }

    /// Convert a dense joint density matrix into spectral form.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let (dicke, fock) = rho.space().as_joint()?;
        let components = spectral_components(rho.matrix())?;
        Ok(JointState::Mixed(JointEnsemble {
            dicke,
            fock,
            components,
        }))
    }

    /// Weighted pure components (a pure state is one component of weight 1).
    pub fn components(&self) -> Vec<(f64, &CVector)> {
        match self {
            JointState::Pure(s) => vec![(1.0, s.amplitudes())],
            JointState::Mixed(e) => e.components.iter().map(|(w, v)| (*w, v)).collect(),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            JointState::Pure(s) => DensityMatrix::from_pure(s),
            JointState::Mixed(e) => e.to_density(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.components()
            .iter()
            .map(|(w, v)| w * v.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn expect(&self, op: &TensorOperator) -> Result<C64> {
        let (d, f) = self.spaces();
        if op.dicke() != d || op.fock() != f {
            return Err(Error::mismatch("operator on the state's joint space", "foreign operator"));
        }
        let mut acc = ZERO;
        for (w, v) in self.components() {
            acc += op.expect(v)? * w;
        }
        Ok(acc)
    }
}

/// Which subsystem survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Atom,
    Field,
}

/// Tensor product in the m-major joint ordering.
///
/// Pure ⊗ pure stays pure; any mixed factor yields a mixed joint state.
pub fn product_state(spin: impl Into<LocalState>, field: impl Into<LocalState>) -> Result<JointState> {
    let spin = spin.into();
    let field = field.into();
    let dicke = spin.space().as_dicke()?;
    let fock = field.space().as_fock()?;
    match (&spin, &field) {
        (LocalState::Pure(a), LocalState::Pure(b)) => {
            let v = kron_vec(a.amplitudes(), b.amplitudes());
            let state = PureState::from_normalized(Space::joint(dicke, fock), v)
                .with_tail_mass(a.tail_mass() + b.tail_mass());
            Ok(JointState::Pure(state))
        }
        _ => {
            let mut components = Vec::new();
            for (wa, va) in spin.components()? {
                for (wf, vf) in field.components()? {
                    components.push((wa * wf, kron_vec(&va, &vf)));
                }
            }
            Ok(JointState::Mixed(JointEnsemble {
                dicke,
                fock,
                components,
            }))
        }
    }
}

fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    let m = kron(
        &CMatrix::from_column_slice(a.len(), 1, a.as_slice()),
        &CMatrix::from_column_slice(b.len(), 1, b.as_slice()),
    );
    CVector::from_column_slice(m.as_slice())
}

/// Reduced density matrix of one subsystem.
pub fn partial_trace(state: &JointState, keep: Keep) -> DensityMatrix {
    let (dicke, fock) = state.spaces();
    let (da, df) = (dicke.dim(), fock.dim());
    let dim = match keep {
        Keep::Atom => da,
        Keep::Field => df,
    };
    let mut acc = CMatrix::zeros(dim, dim);
    for (w, v) in state.components() {
        let grid = joint_matrix(v, da, df);
        match keep {
            // ρ_atom = Ψ Ψ†
            Keep::Atom => acc += (&grid * grid.adjoint()).scale(w),
            // ρ_field[n, n'] = Σ_i Ψ[i, n] conj(Ψ[i, n'])
            Keep::Field => acc += (grid.transpose() * grid.conjugate()).scale(w),
        }
    }
    let herm = (&acc + acc.adjoint()).scale(0.5);
    let space = match keep {
        Keep::Atom => Space::dicke(dicke),
        Keep::Field => Space::fock(fock),
    };
    DensityMatrix::from_parts(space, herm)
}

/// Partial trace of a dense joint density matrix.
pub fn partial_trace_dense(rho: &DensityMatrix, keep: Keep) -> Result<DensityMatrix> {
    let (dicke, fock) = rho.space().as_joint()?;
    let (da, df) = (dicke.dim(), fock.dim());
    let m = rho.matrix();
    let out = match keep {
        Keep::Atom => CMatrix::from_fn(da, da, |i, j| (0..df).map(|n| m[(i * df + n, j * df + n)]).sum()),
        Keep::Field => CMatrix::from_fn(df, df, |n, np| (0..da).map(|i| m[(i * df + n, i * df + np)]).sum()),
    };
    let space = match keep {
        Keep::Atom => Space::dicke(dicke),
        Keep::Field => Space::fock(fock),
    };
    Ok(DensityMatrix::from_parts(space, out))
}

/// Joint pure state from an m-major amplitude matrix `Ψ[i, n]`.
pub fn joint_from_grid(dicke: DickeSpace, fock: FockSpace, grid: &CMatrix) -> Result<PureState> {
    PureState::new(Space::joint(dicke, fock), flatten_joint(grid))
}
