use serde::{Deserialize, Serialize};

use super::field::QGrid;
use super::husimi::BlochGrid;
use crate::error::{Error, Result};

/// How field phase space is laid over the projected spin distribution.
///
/// A field point `α = x + iy` is compared with the spin point whose transverse
/// components are `(Sx, Sy) = scale · (−y, −x)`, seen from the −z pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileMapping {
    pub scale: f64,
}

impl ProfileMapping {
    /// Scale `√(2 S0)`: field variances are spin variances divided by `2 S0`.
    pub fn for_mean_spin(s0: f64) -> Self {
        ProfileMapping {
            scale: (2.0 * s0).sqrt(),
        }
    }
}

/// Husimi value seen from the −z pole at transverse point `(sx, sy)`, or 0
/// outside the projected disk.
pub fn southern_projection(husimi: &BlochGrid, sx: f64, sy: f64) -> f64 {
    let r = sx.hypot(sy);
    if r > husimi.spin {
        return 0.0;
    }
    let theta = std::f64::consts::PI - (r / husimi.spin).asin();
    husimi.sample(theta, sy.atan2(sx))
}

/// Pearson correlation between Q and the mapped, projected Husimi function
/// over the nodes of the field grid.
pub fn profile_match(q: &QGrid, husimi: &BlochGrid, mapping: &ProfileMapping) -> Result<f64> {
    if q.re.len() < 2 || q.im.len() < 2 || q.values.len() != q.im.len() {
        return Err(Error::GridMismatch("field grid is empty or ragged".into()));
    }
    if husimi.theta.len() < 2 || husimi.phi.is_empty() || husimi.values.len() != husimi.theta.len() {
        return Err(Error::GridMismatch("Bloch grid is empty or ragged".into()));
    }
    if !(mapping.scale > 0.0 && mapping.scale.is_finite()) {
        return Err(Error::invalid("scale", "mapping scale must be positive"));
    }
    let mut a = Vec::with_capacity(q.re.len() * q.im.len());
    let mut b = Vec::with_capacity(a.capacity());
    for (j, row) in q.values.iter().enumerate() {
        if row.len() != q.re.len() {
            return Err(Error::GridMismatch(format!("field grid row {j} has {} entries", row.len())));
        }
        for (i, v) in row.iter().enumerate() {
            let (x, y) = (q.re[i], q.im[j]);
            a.push(*v);
            b.push(southern_projection(husimi, -mapping.scale * y, -mapping.scale * x));
        }
    }
    Ok(pearson(&a, &b))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}
