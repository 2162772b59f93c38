//! Physical (SI) parameters and their normalized form.
//!
//! All solvers work in units where the dressed frequency of resonator 1 is
//! one. `normalize` is the only place SI quantities enter.

use serde::{Deserialize, Serialize};

use crate::adiabatic::{effective_rates, KappaBridge};
use crate::error::{Error, Result};
use crate::linearize::OperatingPoint;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const C_LIGHT: f64 = 299_792_458.0;

/// Thermal bath occupation, either given directly or through a temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathSpec {
    Occupation(f64),
    /// Kelvin.
    Temperature(f64),
}

/// Bose occupation at angular frequency `omega` [rad/s] and temperature `t` [K].
pub fn thermal_occupation(t: f64, omega: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (K_B * t);
    1.0 / x.exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mechanics {
    /// kg
    pub mass: [f64; 2],
    /// Bare frequencies before the spring coupling, rad/s.
    pub omega_bare: [f64; 2],
    /// Spring constant between the resonators, N/m.
    pub eta: f64,
    /// Damping rates, rad/s.
    pub gamma: [f64; 2],
    pub bath: [Option<BathSpec>; 2],
}

impl Mechanics {
    /// Builds the mechanics from dressed frequencies and the normalized
    /// coupling `eta0` (rad/s), inverting the dressing relations.
    pub fn from_dressed(
        mass: [f64; 2],
        omega: [f64; 2],
        eta0: f64,
        gamma: [f64; 2],
        bath: [Option<BathSpec>; 2],
    ) -> Result<Self> {
        for (i, (&m, &w)) in mass.iter().zip(&omega).enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::param(["mass1", "mass2"][i], "must be positive"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::param(["omega1", "omega2"][i], "must be positive"));
            }
        }
        let eta = eta0 * (mass[0] * omega[0] * mass[1] * omega[1]).sqrt();
        let mut omega_bare = [0.0; 2];
        for l in 0..2 {
            let w2 = omega[l] * omega[l] - 2.0 * eta / mass[l];
            if w2 < 0.0 {
                return Err(Error::param(
                    "eta0",
                    "dressed frequency below the spring shift",
                ));
            }
            omega_bare[l] = w2.sqrt();
        }
        Ok(Self {
            mass,
            omega_bare,
            eta,
            gamma,
            bath,
        })
    }

    pub fn dressed(&self) -> [f64; 2] {
        [0, 1].map(|l| (self.omega_bare[l].powi(2) + 2.0 * self.eta / self.mass[l]).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cavity {
    /// m
    pub length: f64,
    /// Cavity resonance, rad/s.
    pub omega_c: f64,
    /// m
    pub laser_wavelength: f64,
    /// W
    pub power: f64,
    /// Amplitude decay rate, rad/s.
    pub kappa: f64,
}

impl Cavity {
    pub fn omega_laser(&self) -> f64 {
        2.0 * std::f64::consts::PI * C_LIGHT / self.laser_wavelength
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub mechanics: Mechanics,
    pub cavity: Cavity,
}

/// Dimensionless parameters, every rate divided by the dressed `omega1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedParams {
    pub omega1: f64,
    pub omega2: f64,
    pub eta0: f64,
    /// Single-photon optomechanical coupling.
    pub lambda0: f64,
    /// Drive amplitude Omega.
    pub drive: f64,
    /// Bare detuning omega_c - omega_L.
    pub delta_c: f64,
    pub kappa: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub nbar1: f64,
    pub nbar2: f64,
    /// Dressed omega1 in rad/s; multiply a normalized rate by this for SI.
    pub omega_scale: f64,
}

impl NormalizedParams {
    /// Mechanics and cavity decay only, for use with
    /// [`OperatingPoint::from_coupling`]. Optical fields are zero.
    pub fn mechanical(
        omega2: f64,
        eta0: f64,
        kappa: f64,
        gamma: [f64; 2],
        nbar: [f64; 2],
    ) -> Self {
        Self {
            omega1: 1.0,
            omega2,
            eta0,
            lambda0: 0.0,
            drive: 0.0,
            delta_c: 0.0,
            kappa,
            gamma1: gamma[0],
            gamma2: gamma[1],
            nbar1: nbar[0],
            nbar2: nbar[1],
            omega_scale: 1.0,
        }
    }

    pub fn omega(&self, l: usize) -> f64 {
        [self.omega1, self.omega2][l]
    }

    pub fn gamma(&self, l: usize) -> f64 {
        [self.gamma1, self.gamma2][l]
    }

    pub fn nbar(&self, l: usize) -> f64 {
        [self.nbar1, self.nbar2][l]
    }

    /// omega1*omega2 - 4 eta0^2; must be positive.
    pub fn potential_margin(&self) -> f64 {
        self.omega1 * self.omega2 - 4.0 * self.eta0 * self.eta0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("kappa", self.kappa),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("nbar1", self.nbar1),
            ("nbar2", self.nbar2),
            ("lambda0", self.lambda0),
            ("drive", self.drive),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be non-negative, got {v}")));
            }
        }
        if !self.eta0.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::param("eta0", "must be finite"));
        }
        let margin = self.potential_margin();
        if margin <= 0.0 {
            return Err(Error::InvalidPotential(margin));
        }
        Ok(())
    }
}

/// Converts SI parameters to normalized form.
pub fn normalize(p: &PhysicalParams) -> Result<NormalizedParams> {
    let m = &p.mechanics;
    let c = &p.cavity;
    for (name, v) in [
        ("mass1", m.mass[0]),
        ("mass2", m.mass[1]),
        ("cavity_length", c.length),
        ("omega_c", c.omega_c),
        ("laser_wavelength", c.laser_wavelength),
        ("kappa", c.kappa),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
    }
    if !(c.power >= 0.0 && c.power.is_finite()) {
        return Err(Error::param("power", "must be non-negative"));
    }
    let [w1, w2] = m.dressed();
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::param("omega_bare", "dressed frequencies must be positive"));
    }
    let mut nbar = [0.0; 2];
    for l in 0..2 {
        nbar[l] = match m.bath[l] {
            Some(BathSpec::Occupation(n)) => n,
            Some(BathSpec::Temperature(t)) => thermal_occupation(t, [w1, w2][l]),
            None => return Err(Error::IncompleteBath(l + 1)),
        };
    }
    let eta0 = m.eta / (m.mass[0] * w1 * m.mass[1] * w2).sqrt();
    let lambda0 = (c.omega_c / c.length) * (HBAR / (m.mass[0] * w1)).sqrt();
    let omega_l = c.omega_laser();
    let drive = (2.0 * c.power * c.kappa / (HBAR * omega_l)).sqrt();
    let n = NormalizedParams {
        omega1: 1.0,
        omega2: w2 / w1,
        eta0: eta0 / w1,
        lambda0: lambda0 / w1,
        drive: drive / w1,
        delta_c: (c.omega_c - omega_l) / w1,
        kappa: c.kappa / w1,
        gamma1: m.gamma[0] / w1,
        gamma2: m.gamma[1] / w1,
        nbar1: nbar[0],
        nbar2: nbar[1],
        omega_scale: w1,
    };
    n.validate()?;
    Ok(n)
}

/// How well the adiabatic hierarchy omega >> kappa >> |G~| >> {Gamma1, gamma_opt} >> gamma holds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub ratios: Vec<(String, f64)>,
    pub threshold: f64,
    pub hierarchy_ok: bool,
    pub resolved_sideband: bool,
    /// Ratios above the threshold but below 10.
    pub marginal: Vec<String>,
}

pub const DEFAULT_REGIME_THRESHOLD: f64 = 3.0;

pub fn check_regime(n: &NormalizedParams, op: &OperatingPoint) -> RegimeReport {
    check_regime_with(n, op, DEFAULT_REGIME_THRESHOLD)
}

/// The linewidth comparisons use the amplitude decay `kappa`; the rates
/// come from [`effective_rates`] with the default bridge.
pub fn check_regime_with(n: &NormalizedParams, op: &OperatingPoint, threshold: f64) -> RegimeReport {
    let r = effective_rates(op, n, KappaBridge::default());
    let g = r.g_tilde.norm();
    let gamma_max = n.gamma1.max(n.gamma2);
    let omega_min = n.omega1.min(n.omega2);
    let ratios = vec![
        ("omega/kappa".to_string(), omega_min / n.kappa),
        ("kappa/G".to_string(), n.kappa / g),
        ("G/Gamma1".to_string(), g / r.gamma1_eff),
        ("G/gamma_opt".to_string(), g / r.gamma_opt),
        ("Gamma1/gamma".to_string(), r.gamma1_eff / gamma_max),
        ("gamma_opt/gamma".to_string(), r.gamma_opt / gamma_max),
    ];
    let hierarchy_ok = ratios.iter().all(|(_, v)| *v >= threshold);
    let marginal = ratios
        .iter()
        .filter(|(_, v)| *v >= threshold && *v < 10.0)
        .map(|(k, _)| k.clone())
        .collect();
    RegimeReport {
        ratios,
        threshold,
        hierarchy_ok,
        resolved_sideband: n.kappa < n.omega1,
        marginal,
    }
}
