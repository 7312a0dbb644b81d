use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Bose–Einstein mean occupation `1 / (e^{hν/kT} − 1)`; zero at `T = 0`.
pub fn thermal_occupancy(frequency_hz: f64, temperature_k: f64) -> Result<f64> {
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::invalid("frequency_hz", "must be positive and finite"));
    }
    if !(temperature_k >= 0.0 && temperature_k.is_finite()) {
        return Err(Error::invalid("temperature_k", "must be non-negative and finite"));
    }
    if temperature_k == 0.0 {
        return Ok(0.0);
    }
    let x = PLANCK * frequency_hz / (BOLTZMANN * temperature_k);
    Ok(1.0 / x.exp_m1())
}

/// Physical duration of an interaction time and whether it fits the lifetimes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub coupling_hz: f64,
    pub tau: f64,
    pub time_s: f64,
    pub atomic_lifetime_s: f64,
    pub cavity_lifetime_s: f64,
    pub within_atomic_lifetime: bool,
    pub within_cavity_lifetime: bool,
}

impl FeasibilityReport {
    pub fn feasible(&self) -> bool {
        self.within_atomic_lifetime && self.within_cavity_lifetime
    }

    pub fn to_text(&self) -> String {
        let mark = |ok: bool| if ok { "ok" } else { "EXCEEDED" };
        format!(
            "coupling g        : {:.3e} Hz\n\
             interaction g t   : {:.4}\n\
             physical time t   : {:.3e} s\n\
             atomic lifetime   : {:.3e} s ({})\n\
             cavity lifetime   : {:.3e} s ({})\n\
             feasible          : {}\n",
            self.coupling_hz,
            self.tau,
            self.time_s,
            self.atomic_lifetime_s,
            mark(self.within_atomic_lifetime),
            self.cavity_lifetime_s,
            mark(self.within_cavity_lifetime),
            if self.feasible() { "yes" } else { "no" },
        )
    }
}

/// `t = τ / g`, compared with the atomic and cavity lifetimes.
pub fn feasibility_report(coupling_hz: f64, tau: f64, lifetime_s: f64, cavity_lifetime_s: f64) -> Result<FeasibilityReport> {
    for (name, v) in [
        ("coupling_hz", coupling_hz),
        ("lifetime_s", lifetime_s),
        ("cavity_lifetime_s", cavity_lifetime_s),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(name, "must be positive and finite"));
        }
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::invalid("tau", "must be non-negative and finite"));
    }
    let time_s = tau / coupling_hz;
    Ok(FeasibilityReport {
        coupling_hz,
        tau,
        time_s,
        atomic_lifetime_s: lifetime_s,
        cavity_lifetime_s,
        within_atomic_lifetime: time_s < lifetime_s,
        within_cavity_lifetime: time_s < cavity_lifetime_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_temperature() {
        assert_eq!(thermal_occupancy(21.5e9, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn unit_occupancy_at_ln2() {
        // hν/kT = ln 2 gives 1/(2 − 1)
        let temperature = 1.0;
        let nu = std::f64::consts::LN_2 * BOLTZMANN * temperature / PLANCK;
        assert!((thermal_occupancy(nu, temperature).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(thermal_occupancy(-1.0, 1.0).is_err());
        assert!(thermal_occupancy(1.0, -1.0).is_err());
        assert!(feasibility_report(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn millisecond_lifetime() {
        let r = feasibility_report(1e4, 1.0, 1e-3, 1e-1).unwrap();
        assert!((r.time_s - 1e-4).abs() < 1e-18);
        assert!(r.feasible());
        assert!(r.to_text().contains("feasible          : yes"));
        let r = feasibility_report(1e4, 0.0, 1e-3, 1e-1).unwrap();
        assert_eq!(r.time_s, 0.0);
        assert!(r.feasible());
    }
}
