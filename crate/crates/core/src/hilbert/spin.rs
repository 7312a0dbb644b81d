use nalgebra::DVector;

use super::space::DickeSpace;
use crate::linalg::{apply_phases, c, cis, hermitian_eigen, CMatrix, ZERO};

/// Collective spin operators in the ascending-m Dicke basis.
#[derive(Debug, Clone)]
pub struct SpinMatrices {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub splus: CMatrix,
    pub sminus: CMatrix,
}

impl SpinMatrices {
    /// Cartesian component along `axis` (0 = x, 1 = y, 2 = z).
    pub fn component(&self, axis: usize) -> &CMatrix {
        match axis {
            0 => &self.sx,
            1 => &self.sy,
            2 => &self.sz,
            _ => panic!("spin axis out of range: {axis}"),
        }
    }

    /// `n·S` for a real direction vector.
    pub fn along(&self, n: [f64; 3]) -> CMatrix {
        self.sx.scale(n[0]) + self.sy.scale(n[1]) + self.sz.scale(n[2])
    }
}

/// `<S, m+1| S+ |S, m>` for basis index `i` (m = i - S).
///
/// `S(S+1) - m(m+1) = (2S - i)(i + 1)`, an exact integer product.
pub fn ladder_coefficient(space: &DickeSpace, index: usize) -> f64 {
    let two_s = space.twice_spin() as usize;
    debug_assert!(index < two_s + 1);
    (((two_s - index) * (index + 1)) as f64).sqrt()
}

pub fn build_spin_matrices(space: &DickeSpace) -> SpinMatrices {
    let d = space.dim();
    let mut splus = CMatrix::zeros(d, d);
    for i in 0..d - 1 {
        splus[(i + 1, i)] = c(ladder_coefficient(space, i), 0.0);
    }
    let sminus = splus.transpose();
    let sz = CMatrix::from_diagonal(&DVector::from_fn(d, |i, _| c(space.m(i), 0.0)));
    let sx = (&splus + &sminus).scale(0.5);
    // (S+ - S-)/(2i) = -i/2 (S+ - S-)
    let sy = (&splus - &sminus) * c(0.0, -0.5);
    SpinMatrices {
        sx,
        sy,
        sz,
        splus,
        sminus,
    }
}

/// `S_φ = (S+ e^{-iφ} + S- e^{iφ}) / 2`
pub fn directional_spin_op(phi: f64, space: &DickeSpace) -> CMatrix {
    let ops = build_spin_matrices(space);
    directional_from(&ops, phi)
}

pub(crate) fn directional_from(ops: &SpinMatrices, phi: f64) -> CMatrix {
    (&ops.splus * cis(-phi) + &ops.sminus * cis(phi)).scale(0.5)
}

/// Spin rotations built from a cached spectral decomposition of `Sy`.
#[derive(Debug, Clone)]
pub struct SpinRotator {
    space: DickeSpace,
    sy_values: DVector<f64>,
    sy_vectors: CMatrix,
}

impl SpinRotator {
    pub fn new(space: DickeSpace) -> Self {
        let ops = build_spin_matrices(&space);
        // Sy has the non-degenerate spectrum {-S, ..., S}; the eigensolver cannot fail here.
        let (sy_values, sy_vectors) =
            hermitian_eigen(&ops.sy).expect("eigen-decomposition of Sy");
        SpinRotator {
            space,
            sy_values,
            sy_vectors,
        }
    }

    pub fn space(&self) -> DickeSpace {
        self.space
    }

    /// `e^{-iθ Sy}`
    pub fn about_y(&self, theta: f64) -> CMatrix {
        let u = apply_phases(&self.sy_values, &self.sy_vectors, theta);
        // exact for θ = 0 regardless of eigenvector roundoff
        if theta == 0.0 {
            CMatrix::identity(u.nrows(), u.ncols())
        } else {
            u
        }
    }

    /// `e^{-iφ Sz}` is diagonal with entries `e^{-iφ m}`.
    pub fn about_z(&self, phi: f64) -> CMatrix {
        let d = self.space.dim();
        let mut u = CMatrix::zeros(d, d);
        for i in 0..d {
            u[(i, i)] = cis(-phi * self.space.m(i));
        }
        u
    }

    /// `e^{-iφ Sz} e^{-iθ Sy}`
    pub fn operator(&self, theta: f64, phi: f64) -> CMatrix {
        left_diag_mul(&self.about_z(phi), self.about_y(theta))
    }

    /// ZYZ Euler rotation `e^{-iα Sz} e^{-iβ Sy} e^{-iγ Sz}`; it acts on the
    /// mean spin vector as the active rotation `Rz(α) Ry(β) Rz(γ)`.
    pub fn euler(&self, alpha: f64, beta: f64, gamma: f64) -> CMatrix {
        let inner = self.about_y(beta) * self.about_z(gamma);
        left_diag_mul(&self.about_z(alpha), inner)
    }

    /// Unitary implementing a proper rotation matrix `r` (row-major 3×3).
    pub fn from_rotation_matrix(&self, r: &[[f64; 3]; 3]) -> CMatrix {
        let (alpha, beta, gamma) = zyz_angles(r);
        self.euler(alpha, beta, gamma)
    }

    /// Column `e^{-iφSz} e^{-iθSy}|S, S>` without forming the full operator.
    pub fn bloch_column(&self, theta: f64, phi: f64) -> Vec<crate::linalg::C64> {
        let d = self.space.dim();
        let top = self.space.top();
        // V diag(e^{-iθλ}) V† e_top
        let mut col = vec![ZERO; d];
        for j in 0..d {
            let w = cis(-self.sy_values[j] * theta) * self.sy_vectors[(top, j)].conj();
            for (i, out) in col.iter_mut().enumerate() {
                *out += self.sy_vectors[(i, j)] * w;
            }
        }
        for (i, out) in col.iter_mut().enumerate() {
            *out *= cis(-phi * self.space.m(i));
        }
        col
    }
}

fn left_diag_mul(diag: &CMatrix, mut m: CMatrix) -> CMatrix {
    for i in 0..m.nrows() {
        let d = diag[(i, i)];
        for z in m.row_mut(i).iter_mut() {
            *z *= d;
        }
    }
    m
}

/// ZYZ Euler angles of a rotation matrix.
pub fn zyz_angles(r: &[[f64; 3]; 3]) -> (f64, f64, f64) {
    let beta = r[2][2].clamp(-1.0, 1.0).acos();
    let sin_beta = (r[0][2].powi(2) + r[1][2].powi(2)).sqrt();
    if sin_beta < 1e-12 {
        if r[2][2] > 0.0 {
            (r[1][0].atan2(r[0][0]), 0.0, 0.0)
        } else {
            ((-r[1][0]).atan2(-r[0][0]), std::f64::consts::PI, 0.0)
        }
    } else {
        let alpha = r[1][2].atan2(r[0][2]);
        let gamma = r[2][1].atan2(-r[2][0]);
        (alpha, beta, gamma)
    }
}

/// `e^{-iφ Sz} e^{-iθ Sy}` on the given Dicke space.
pub fn rotation_operator(theta: f64, phi: f64, space: &DickeSpace) -> CMatrix {
    SpinRotator::new(*space).operator(theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs, max_abs_diff, unitarity_error, I, ONE};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn space(n: u32) -> DickeSpace {
        DickeSpace::new(n).unwrap()
    }

    // Error-free two-product and two-sum, so the only rounding left in a
    // product entry is the final one.
    fn two_prod(a: f64, b: f64) -> (f64, f64) {
        let p = a * b;
        (p, a.mul_add(b, -p))
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn compensated_dot(terms: impl Iterator<Item = (f64, f64)>) -> f64 {
        let (mut sum, mut err) = (0.0, 0.0);
        for (x, y) in terms {
            let (p, pe) = two_prod(x, y);
            let (s, se) = two_sum(sum, p);
            sum = s;
            err += pe + se;
        }
        sum + err
    }

    fn exact_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
        let n = a.ncols();
        CMatrix::from_fn(a.nrows(), b.ncols(), |i, j| {
            let re = compensated_dot(
                (0..n).flat_map(|k| [(a[(i, k)].re, b[(k, j)].re), (-a[(i, k)].im, b[(k, j)].im)]),
            );
            let im = compensated_dot(
                (0..n).flat_map(|k| [(a[(i, k)].re, b[(k, j)].im), (a[(i, k)].im, b[(k, j)].re)]),
            );
            c(re, im)
        })
    }

    #[test]
    fn spin_half_raising_matrix() {
        let ops = build_spin_matrices(&space(1));
        let expected = CMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ONE, ZERO]);
        assert_eq!(ops.splus, expected);
    }

    #[test]
    fn spin_one_ladder_element() {
        let ops = build_spin_matrices(&space(2));
        // <1,1|S+|1,0>: row m=1 (index 2), column m=0 (index 1)
        assert!((ops.splus[(2, 1)].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spin_25_commutators_by_direct_multiplication() {
        let ops = build_spin_matrices(&space(50));
        let lhs = exact_product(&ops.sx, &ops.sy) - exact_product(&ops.sy, &ops.sx);
        assert!(max_abs_diff(&lhs, &(&ops.sz * I)) < 1e-13);
        assert!(max_abs_diff(&commutator(&ops.sz, &ops.splus), &ops.splus) < 1e-13);
        assert!(max_abs_diff(&commutator(&ops.sz, &ops.sminus), &(-&ops.sminus)) < 1e-13);
    }

    #[test]
    fn directional_spin_special_angles() {
        let s = space(2);
        let ops = build_spin_matrices(&s);
        assert!(max_abs_diff(&directional_spin_op(0.0, &s), &ops.sx) == 0.0);
        assert!(max_abs_diff(&directional_spin_op(PI, &s), &(-&ops.sx)) < 1e-15);
        let diag = (&ops.sx + &ops.sy).scale(1.0 / 2f64.sqrt());
        assert!(max_abs_diff(&directional_spin_op(FRAC_PI_4, &s), &diag) < 1e-14);
        assert!(max_abs_diff(&directional_spin_op(FRAC_PI_2, &s), &ops.sy) < 1e-15);
    }

    #[test]
    fn identity_rotation() {
        let u = rotation_operator(0.0, 0.0, &space(7));
        assert_eq!(max_abs_diff(&u, &CMatrix::identity(8, 8)), 0.0);
    }

    #[test]
    fn spin_half_rotation_about_y() {
        let theta = 0.83;
        let u = rotation_operator(theta, 0.0, &space(1));
        // |up> is index 1, |down> is index 0
        assert!((u[(1, 1)] - c((theta / 2.0).cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - c((theta / 2.0).sin(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn rotated_top_state_sz_for_spin_25() {
        let s = space(50);
        let u = rotation_operator(PI / 6.0, 0.4, &s);
        assert!(unitarity_error(&u) < 1e-12);
        let psi = u.column(s.top()).into_owned();
        let ops = build_spin_matrices(&s);
        let sz = (psi.adjoint() * &ops.sz * &psi)[(0, 0)].re;
        assert!((sz - 25.0 * (PI / 6.0).cos()).abs() < 1e-10);
    }

    #[test]
    fn bloch_column_matches_operator() {
        let s = space(9);
        let rot = SpinRotator::new(s);
        let u = rot.operator(1.1, -0.7);
        let col = rot.bloch_column(1.1, -0.7);
        for i in 0..s.dim() {
            assert!((u[(i, s.top())] - col[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn euler_angles_reconstruct_rotation() {
        let cases = [(0.3, 1.2, -2.0), (0.0, 0.0, 0.0), (1.0, PI, 0.0), (-2.5, 0.4, 0.9)];
        for (a, b, g) in cases {
            let r = rot_zyz(a, b, g);
            let (a2, b2, g2) = zyz_angles(&r);
            let r2 = rot_zyz(a2, b2, g2);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((r[i][j] - r2[i][j]).abs() < 1e-12);
                }
            }
        }
    }

    fn rot_zyz(a: f64, b: f64, g: f64) -> [[f64; 3]; 3] {
        let rz = |t: f64| [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]];
        let ry = |t: f64| [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]];
        mul3(&mul3(&rz(a), &ry(b)), &rz(g))
    }

    fn mul3(x: &[[f64; 3]; 3], y: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3).map(|k| x[i][k] * y[k][j]).sum();
            }
        }
        out
    }

    #[test]
    fn periodicity_of_directional_op() {
        let s = space(6);
        let a = directional_spin_op(0.37, &s);
        let b = directional_spin_op(0.37 + 2.0 * PI, &s);
        assert!(max_abs(&(a - b)) < 1e-14);
    }
}
