use std::cell::OnceCell;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagator::SpectralPropagator;
use crate::error::{Error, Result};
use crate::hilbert::{joint_matrix, DickeSpace, FockSpace, TensorOperator};
use crate::linalg::{CMatrix, CVector, C64, ZERO};
use crate::states::JointState;

/// Quantity tracked along a time series.
#[derive(Debug, Clone)]
pub enum Observable {
    Mean(TensorOperator),
    /// `<O²> − <O>²`
    Variance(TensorOperator),
    /// `½<AB + BA> − <A><B>`
    Covariance(TensorOperator, TensorOperator),
}

#[derive(Debug, Clone)]
pub struct NamedObservable {
    pub name: String,
    pub observable: Observable,
}

impl NamedObservable {
    pub fn mean(name: impl Into<String>, op: TensorOperator) -> Self {
        NamedObservable {
            name: name.into(),
            observable: Observable::Mean(op),
        }
    }

    pub fn variance(name: impl Into<String>, op: TensorOperator) -> Self {
        NamedObservable {
            name: name.into(),
            observable: Observable::Variance(op),
        }
    }

    pub fn covariance(name: impl Into<String>, a: TensorOperator, b: TensorOperator) -> Self {
        NamedObservable {
            name: name.into(),
            observable: Observable::Covariance(a, b),
        }
    }
}

/// Where a series came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub initial_state: String,
    pub observables: Vec<String>,
}

/// Expectation values on a τ grid, one complex column per observable.
#[derive(Debug, Clone)]
pub struct ObservableSeries {
    pub tau: Vec<f64>,
    pub values: Vec<Vec<C64>>,
    pub provenance: Provenance,
}

/// Run metadata written next to a series CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMetadata {
    pub spin: f64,
    pub num_atoms: u32,
    pub cutoff: usize,
    pub sector_count: usize,
    pub max_eigen_residual: f64,
    pub max_unitarity_error: f64,
    pub points: usize,
    pub provenance: Provenance,
}

/// Expectation values of one (possibly mixed) joint state. Reduced density
/// matrices are formed lazily so purely local observables stay cheap.
pub(crate) struct Moments<'a> {
    dicke: DickeSpace,
    fock: FockSpace,
    components: Vec<(f64, &'a CVector)>,
    atom: OnceCell<CMatrix>,
    field: OnceCell<CMatrix>,
}

fn trace_product(rho: &CMatrix, op: &CMatrix) -> C64 {
    let mut acc = ZERO;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            acc += rho[(i, j)] * op[(j, i)];
        }
    }
    acc
}

impl<'a> Moments<'a> {
    pub(crate) fn new(dicke: DickeSpace, fock: FockSpace, components: Vec<(f64, &'a CVector)>) -> Self {
        Moments {
            dicke,
            fock,
            components,
            atom: OnceCell::new(),
            field: OnceCell::new(),
        }
    }

    fn reduced_atom(&self) -> &CMatrix {
        self.atom.get_or_init(|| {
            let (da, df) = (self.dicke.dim(), self.fock.dim());
            let mut acc = CMatrix::zeros(da, da);
            for (w, v) in &self.components {
                let g = joint_matrix(v, da, df);
                acc += (&g * g.adjoint()).scale(*w);
            }
            acc
        })
    }

    fn reduced_field(&self) -> &CMatrix {
        self.field.get_or_init(|| {
            let (da, df) = (self.dicke.dim(), self.fock.dim());
            let mut acc = CMatrix::zeros(df, df);
            for (w, v) in &self.components {
                let g = joint_matrix(v, da, df);
                acc += (g.transpose() * g.conjugate()).scale(*w);
            }
            acc
        })
    }

    fn weight(&self) -> f64 {
        self.components.iter().map(|(w, v)| w * v.norm_squared()).sum()
    }

    pub(crate) fn expect(&self, op: &TensorOperator) -> C64 {
        let mut acc = ZERO;
        let mut joint_terms = Vec::new();
        for t in op.terms() {
            match (&t.atom, &t.field) {
                (None, None) => acc += t.coeff * self.weight(),
                (Some(a), None) => acc += t.coeff * trace_product(self.reduced_atom(), a),
                (None, Some(b)) => acc += t.coeff * trace_product(self.reduced_field(), b),
                (Some(_), Some(_)) => joint_terms.push(t.clone()),
            }
        }
        if !joint_terms.is_empty() {
            let (da, df) = (self.dicke.dim(), self.fock.dim());
            for (w, v) in &self.components {
                let g = joint_matrix(v, da, df);
                for t in &joint_terms {
                    let (a, b) = (t.atom.as_ref().unwrap(), t.field.as_ref().unwrap());
                    // <ψ| A⊗B |ψ> = tr(Ψ† A Ψ Bᵀ)
                    let image = a * &g * b.transpose();
                    acc += t.coeff * g.dotc(&image) * *w;
                }
            }
        }
        acc
    }

    pub(crate) fn evaluate(&self, obs: &Observable) -> C64 {
        match obs {
            Observable::Mean(op) => self.expect(op),
            Observable::Variance(op) => {
                let m = self.expect(op);
                self.expect(&(op * op)) - m * m
            }
            Observable::Covariance(a, b) => {
                let sym = self.expect(&a.sym_product(b));
                sym - self.expect(a) * self.expect(b)
            }
        }
    }
}

fn check_observable(op: &TensorOperator, dicke: DickeSpace, fock: FockSpace, name: &str) -> Result<()> {
    if op.dicke() != dicke || op.fock() != fock {
        return Err(Error::mismatch(
            "observable on the state's joint space",
            format!("observable '{name}' on a different space"),
        ));
    }
    Ok(())
}

/// Expectation values of `observables` along `tau_grid`, starting from `state0`.
pub fn series(
    propagator: &SpectralPropagator,
    state0: &JointState,
    observables: &[NamedObservable],
    tau_grid: &[f64],
    initial_state: &str,
) -> Result<ObservableSeries> {
    propagator.check_state(state0)?;
    let (dicke, fock) = state0.spaces();
    for o in observables {
        match &o.observable {
            Observable::Mean(op) | Observable::Variance(op) => check_observable(op, dicke, fock, &o.name)?,
            Observable::Covariance(a, b) => {
                check_observable(a, dicke, fock, &o.name)?;
                check_observable(b, dicke, fock, &o.name)?;
            }
        }
    }
    let expansions = state0
        .components()
        .into_iter()
        .map(|(w, v)| Ok((w, propagator.expand(v)?)))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<C64>> = tau_grid
        .par_iter()
        .map(|&tau| {
            let vectors: Vec<(f64, CVector)> = expansions.iter().map(|(w, e)| (*w, e.at(tau))).collect();
            let moments = Moments::new(dicke, fock, vectors.iter().map(|(w, v)| (*w, v)).collect());
            observables.iter().map(|o| moments.evaluate(&o.observable)).collect()
        })
        .collect();
    let values = (0..observables.len())
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    Ok(ObservableSeries {
        tau: tau_grid.to_vec(),
        values,
        provenance: Provenance {
            initial_state: initial_state.to_string(),
            observables: observables.iter().map(|o| o.name.clone()).collect(),
        },
    })
}

impl ObservableSeries {
    pub fn names(&self) -> &[String] {
        &self.provenance.observables
    }

    pub fn get(&self, name: &str) -> Option<&[C64]> {
        let j = self.names().iter().position(|n| n == name)?;
        Some(&self.values[j])
    }

    pub fn real(&self, name: &str) -> Option<Vec<f64>> {
        self.get(name).map(|v| v.iter().map(|z| z.re).collect())
    }

    /// Largest imaginary part across every column.
    pub fn max_imaginary(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }

    /// Appends a derived real column.
    pub fn push_column(&mut self, name: impl Into<String>, values: &[f64]) -> Result<()> {
        if values.len() != self.tau.len() {
            return Err(Error::mismatch(self.tau.len(), values.len()));
        }
        self.provenance.observables.push(name.into());
        self.values.push(values.iter().map(|&x| C64::new(x, 0.0)).collect());
        Ok(())
    }

    pub fn metadata(&self, propagator: &SpectralPropagator) -> SeriesMetadata {
        let joint = propagator.joint();
        SeriesMetadata {
            spin: joint.dicke().spin(),
            num_atoms: joint.dicke().num_atoms(),
            cutoff: joint.fock().cutoff(),
            sector_count: joint.sectors().len(),
            max_eigen_residual: propagator.max_residual(),
            max_unitarity_error: propagator.max_unitarity_error(),
            points: self.tau.len(),
            provenance: self.provenance.clone(),
        }
    }

    /// CSV with `tau` then `<name>_re`, `<name>_im` per observable.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["tau".to_string()];
        for n in self.names() {
            header.push(format!("{n}_re"));
            header.push(format!("{n}_im"));
        }
        w.write_record(&header)?;
        for (i, tau) in self.tau.iter().enumerate() {
            let mut row = vec![format!("{tau:.17e}")];
            for col in &self.values {
                row.push(format!("{:.17e}", col[i].re));
                row.push(format!("{:.17e}", col[i].im));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the CSV and a `.json` metadata sidecar; returns both paths.
    pub fn write_with_metadata(&self, path: &Path, propagator: &SpectralPropagator) -> Result<(PathBuf, PathBuf)> {
        self.write_csv(path)?;
        let sidecar = path.with_extension("json");
        let f = BufWriter::new(File::create(&sidecar)?);
        serde_json::to_writer_pretty(f, &self.metadata(propagator))?;
        Ok((path.to_path_buf(), sidecar))
    }
}
