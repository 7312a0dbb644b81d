use super::config::Rotation;
use crate::error::Result;
use crate::hilbert::SpinRotator;
use crate::linalg::CMatrix;
use crate::squeezing::min_transverse_variance;
use crate::states::DensityMatrix;

fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Proper rotation taking the orthonormal triad `from` onto `to`.
fn triad_rotation(from: [[f64; 3]; 3], to: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut r = [[0.0; 3]; 3];
    for (row_i, row) in r.iter_mut().enumerate() {
        for (col_j, entry) in row.iter_mut().enumerate() {
            *entry = (0..3).map(|k| to[k][row_i] * from[k][col_j]).sum();
        }
    }
    r
}

/// Target triad for auto-orientation: mean spin at `theta` from `−z` in the
/// `y–z` plane, squeezed axis turned by `chi` from `x` toward the in-plane
/// transverse direction.
pub fn auto_frame(theta: f64, chi: f64) -> [[f64; 3]; 3] {
    let (st, ct) = theta.sin_cos();
    let mean = [0.0, st, -ct];
    let in_plane = [0.0, ct, st];
    let (sc, cc) = chi.sin_cos();
    let squeezed = [cc, sc * in_plane[1], sc * in_plane[2]];
    [mean, squeezed, cross(mean, squeezed)]
}

/// Unitary for `rotation` acting on `rho`.
pub fn rotation_unitary(rho: &DensityMatrix, rotation: Rotation) -> Result<CMatrix> {
    let space = rho.space().as_dicke()?;
    let rotator = SpinRotator::new(space);
    match rotation {
        Rotation::Angles { theta, phi } => Ok(rotator.operator(theta, phi)),
        Rotation::Auto { theta, chi } => {
            let t = min_transverse_variance(rho)?;
            let from = [t.direction, t.min_axis, t.max_axis()];
            let r = triad_rotation(from, auto_frame(theta, chi));
            Ok(rotator.from_rotation_matrix(&r))
        }
    }
}

/// `U ρ U†` for the given rotation; `None` leaves the state untouched.
pub fn stage2_rotate(rho: &DensityMatrix, rotation: Option<Rotation>) -> Result<DensityMatrix> {
    match rotation {
        None => Ok(rho.clone()),
        Some(r) => rho.transformed(&rotation_unitary(rho, r)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::DickeSpace;
    use crate::linalg::{c, max_abs_diff};
    use crate::pipeline::prepare::stage1_prepare;
    use crate::pipeline::config::{PrepConfig, RotationConfig, RotationKeyword};
    use crate::states::{bloch_state, spin_vector};
    use std::f64::consts::PI;

    fn squeezed(n: u32) -> DensityMatrix {
        let mut cfg = PrepConfig::new(n, c(2.0, 0.0), 0.3);
        cfg.rotation = RotationConfig::Keyword(RotationKeyword::None);
        stage1_prepare(&cfg).unwrap().rho
    }

    #[test]
    fn identity_rotation_keeps_state() {
        let rho = squeezed(6);
        let out = stage2_rotate(&rho, Some(Rotation::Angles { theta: 0.0, phi: 0.0 })).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
        assert_eq!(stage2_rotate(&rho, None).unwrap(), rho);
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let rho = squeezed(8);
        let out = stage2_rotate(&rho, Some(Rotation::Angles { theta: 1.1, phi: -0.4 })).unwrap();
        let (a, _) = rho.spectrum().unwrap();
        let (b, _) = out.spectrum().unwrap();
        let mut a: Vec<f64> = a.iter().copied().collect();
        let mut b: Vec<f64> = b.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn auto_orientation_places_mean_and_squeezed_axis() {
        let rho = squeezed(12);
        let len = spin_vector(&rho).unwrap().magnitude();
        for chi in [0.0, PI / 2.0] {
            let out = stage2_rotate(&rho, Some(Rotation::Auto { theta: PI / 6.0, chi })).unwrap();
            let s = spin_vector(&out).unwrap();
            assert!((s.sz + len * (PI / 6.0).cos()).abs() < 1e-8, "{s:?}");
            assert!(s.sx.abs() < 1e-8);
            let t = min_transverse_variance(&out).unwrap();
            let want = auto_frame(PI / 6.0, chi)[1];
            let dot: f64 = (0..3).map(|k| t.min_axis[k] * want[k]).sum();
            assert!((dot.abs() - 1.0).abs() < 1e-8, "{chi}: {:?}", t.min_axis);
        }
    }

    #[test]
    fn auto_frame_is_right_handed() {
        let f = auto_frame(0.7, 0.3);
        let c = cross(f[0], f[1]);
        for k in 0..3 {
            assert!((c[k] - f[2][k]).abs() < 1e-15);
        }
    }

    #[test]
    fn bloch_state_auto_orients_to_the_requested_tilt() {
        let d = DickeSpace::new(10).unwrap();
        let rho = DensityMatrix::from_pure(&bloch_state(0.4, 1.0, &d));
        let out = stage2_rotate(&rho, Some(Rotation::Auto { theta: PI / 6.0, chi: 0.0 })).unwrap();
        let s = spin_vector(&out).unwrap();
        assert!((s.sz + 5.0 * (PI / 6.0).cos()).abs() < 1e-8);
        assert!((s.sy - 5.0 * (PI / 6.0).sin()).abs() < 1e-8);
    }
}
