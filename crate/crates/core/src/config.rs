//! TOML configuration with unit-suffixed keys.
//!
//! Rates given with `_rel` are in units of the dressed `omega1`. Every
//! physical quantity accepts exactly one of its spellings, e.g. `mass1_ng`
//! or `mass1_kg`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adiabatic::KappaBridge;
use crate::chain::ChainParams;
use crate::error::{Error, Result};
use crate::linearize::{operating_point_effective, operating_point_selfconsistent, OperatingPoint};
use crate::params::{normalize, BathSpec, Cavity, Mechanics, NormalizedParams, PhysicalParams};
use crate::result::Method;
use crate::spectra::NoiseModel;
use crate::sweep::{Axis, Format, Scale, SweepSpec, Target};

const TAU: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanics {
    mass1_ng: Option<f64>,
    mass1_kg: Option<f64>,
    mass2_ng: Option<f64>,
    mass2_kg: Option<f64>,
    #[serde(rename = "freq1_MHz")]
    freq1_mhz: Option<f64>,
    freq1_rad_per_s: Option<f64>,
    #[serde(rename = "freq2_MHz")]
    freq2_mhz: Option<f64>,
    freq2_rad_per_s: Option<f64>,
    freq2_rel: Option<f64>,
    eta0_rel: Option<f64>,
    #[serde(rename = "eta_N_per_m")]
    eta_n_per_m: Option<f64>,
    gamma1_rel: Option<f64>,
    gamma1_per_s: Option<f64>,
    gamma2_rel: Option<f64>,
    gamma2_per_s: Option<f64>,
    nbar1: Option<f64>,
    #[serde(rename = "temperature1_K")]
    temperature1_k: Option<f64>,
    nbar2: Option<f64>,
    #[serde(rename = "temperature2_K")]
    temperature2_k: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCavity {
    length_mm: Option<f64>,
    length_m: Option<f64>,
    omega_c_rel: Option<f64>,
    #[serde(rename = "freq_c_THz")]
    freq_c_thz: Option<f64>,
    wavelength_nm: Option<f64>,
    wavelength_m: Option<f64>,
    #[serde(rename = "power_mW")]
    power_mw: Option<f64>,
    #[serde(rename = "power_W")]
    power_w: Option<f64>,
    kappa_rel: Option<f64>,
    kappa_per_s: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    delta_rel: Option<f64>,
    mode: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    n: Option<usize>,
    delta_rel: Option<f64>,
    coupling_rel: Option<f64>,
    coupling_phase_rad: Option<f64>,
    eta0_rel: Option<f64>,
    kappa_energy_rel: Option<f64>,
    kappa_amp_rel: Option<f64>,
    gamma_rel: Option<f64>,
    nbar: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAxis {
    name: String,
    min: f64,
    max: f64,
    count: usize,
    scale: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    target: Option<String>,
    methods: Option<Vec<String>>,
    format: Option<String>,
    out: Option<String>,
    noise: Option<String>,
    drude_cutoff_rel: Option<f64>,
    rel_tol: Option<f64>,
    bridge: Option<String>,
    #[serde(default)]
    axis: Vec<RawAxis>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    title: Option<String>,
    mechanics: Option<RawMechanics>,
    cavity: Option<RawCavity>,
    point: Option<RawPoint>,
    chain: Option<RawChain>,
    sweep: Option<RawSweep>,
}

fn cfg_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Exactly one of the alternatives must be present; returns it scaled.
fn one_of(path: &str, alts: &[(&str, Option<f64>, f64)]) -> Result<f64> {
    let given: Vec<_> = alts.iter().filter(|(_, v, _)| v.is_some()).collect();
    match given.as_slice() {
        [(_, Some(v), scale)] => {
            if v.is_finite() {
                Ok(v * scale)
            } else {
                Err(cfg_err(path, "value must be finite"))
            }
        }
        [] => {
            let keys: Vec<&str> = alts.iter().map(|a| a.0).collect();
            Err(cfg_err(path, format!("missing; give one of {}", keys.join(", "))))
        }
        more => {
            let keys: Vec<&str> = more.iter().map(|a| a.0).collect();
            Err(cfg_err(path, format!("conflicting keys {}", keys.join(", "))))
        }
    }
}

/// How the operating point follows from the configured detuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PointMode {
    /// `delta_rel` is the effective detuning.
    #[default]
    Effective,
    /// `delta_rel` is the bare detuning `omega_c - omega_L`; the effective
    /// detuning is solved self-consistently.
    SelfConsistent,
}

/// A fully resolved two-mode parameter set in caption-style units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModeScenario {
    /// kg
    pub mass: [f64; 2],
    /// Dressed omega1, rad/s.
    pub omega1: f64,
    pub omega2_rel: f64,
    pub eta0_rel: f64,
    pub gamma_rel: [f64; 2],
    pub bath: [BathSpec; 2],
    /// m
    pub length: f64,
    pub omega_c_rel: f64,
    /// m
    pub wavelength: f64,
    /// W
    pub power: f64,
    pub kappa_rel: f64,
    pub delta_rel: f64,
    pub mode: PointMode,
}

/// Identifiers accepted as two-mode sweep axes.
pub const TWO_MODE_PARAMETERS: [&str; 11] = [
    "delta", "kappa", "eta0", "omega2", "gamma", "gamma1", "gamma2", "nbar", "nbar1", "nbar2",
    "power_mW",
];

/// Identifiers accepted as chain sweep axes.
pub const CHAIN_PARAMETERS: [&str; 6] = ["delta", "coupling", "eta0", "kappa_energy", "gamma", "nbar"];

impl TwoModeScenario {
    pub fn physical(&self) -> Result<PhysicalParams> {
        let w1 = self.omega1;
        let mechanics = Mechanics::from_dressed(
            self.mass,
            [w1, self.omega2_rel * w1],
            self.eta0_rel * w1,
            self.gamma_rel.map(|g| g * w1),
            self.bath.map(Some),
        )?;
        Ok(PhysicalParams {
            mechanics,
            cavity: Cavity {
                length: self.length,
                omega_c: self.omega_c_rel * w1,
                laser_wavelength: self.wavelength,
                power: self.power,
                kappa: self.kappa_rel * w1,
            },
        })
    }

    pub fn normalized(&self) -> Result<NormalizedParams> {
        let mut n = normalize(&self.physical()?)?;
        if self.mode == PointMode::SelfConsistent {
            n.delta_c = self.delta_rel;
        }
        Ok(n)
    }

    pub fn operating_point(&self, n: &NormalizedParams) -> Result<OperatingPoint> {
        match self.mode {
            PointMode::Effective => operating_point_effective(self.delta_rel, n),
            PointMode::SelfConsistent => Ok(operating_point_selfconsistent(n)?.point()),
        }
    }

    /// Normalized parameters and operating point in one call.
    pub fn resolve(&self) -> Result<(NormalizedParams, OperatingPoint)> {
        let n = self.normalized()?;
        let op = self.operating_point(&n)?;
        Ok((n, op))
    }

    pub fn set(&mut self, name: &str, v: f64) -> Result<()> {
        match name {
            "delta" => self.delta_rel = v,
            "kappa" => self.kappa_rel = v,
            "eta0" => self.eta0_rel = v,
            "omega2" => self.omega2_rel = v,
            "gamma" => self.gamma_rel = [v, v],
            "gamma1" => self.gamma_rel[0] = v,
            "gamma2" => self.gamma_rel[1] = v,
            "nbar" => self.bath = [BathSpec::Occupation(v); 2],
            "nbar1" => self.bath[0] = BathSpec::Occupation(v),
            "nbar2" => self.bath[1] = BathSpec::Occupation(v),
            "power_mW" => self.power = v * 1e-3,
            _ => {
                return Err(cfg_err(
                    "sweep.axis.name",
                    format!("unknown two-mode parameter `{name}`"),
                ))
            }
        }
        Ok(())
    }
}

/// Sets a named chain parameter.
pub fn set_chain(p: &mut ChainParams, name: &str, v: f64) -> Result<()> {
    match name {
        "delta" => p.delta = v,
        "coupling" => {
            let phase = p.coupling.arg();
            p.coupling = Complex64::from_polar(v, phase);
        }
        "eta0" => p.eta0 = v,
        "kappa_energy" => p.kappa = v,
        "gamma" => p.gamma = v,
        "nbar" => p.nbar = v,
        _ => {
            return Err(cfg_err(
                "sweep.axis.name",
                format!("unknown chain parameter `{name}`"),
            ))
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub title: Option<String>,
    pub two_mode: Option<TwoModeScenario>,
    pub chain: Option<ChainParams>,
    pub sweep: Option<SweepSpec>,
}

fn resolve_mechanics_cavity(
    m: &RawMechanics,
    c: &RawCavity,
    p: Option<&RawPoint>,
) -> Result<TwoModeScenario> {
    let mass1 = one_of("mechanics.mass1", &[("mass1_ng", m.mass1_ng, 1e-12), ("mass1_kg", m.mass1_kg, 1.0)])?;
    let mass2 = one_of("mechanics.mass2", &[("mass2_ng", m.mass2_ng, 1e-12), ("mass2_kg", m.mass2_kg, 1.0)])?;
    let omega1 = one_of(
        "mechanics.freq1",
        &[("freq1_MHz", m.freq1_mhz, TAU * 1e6), ("freq1_rad_per_s", m.freq1_rad_per_s, 1.0)],
    )?;
    if omega1.is_nan() || omega1 <= 0.0 {
        return Err(cfg_err("mechanics.freq1", "must be positive"));
    }
    let omega2_rel = one_of(
        "mechanics.freq2",
        &[
            ("freq2_MHz", m.freq2_mhz, TAU * 1e6 / omega1),
            ("freq2_rad_per_s", m.freq2_rad_per_s, 1.0 / omega1),
            ("freq2_rel", m.freq2_rel, 1.0),
        ],
    )?;
    let eta0_rel = match (m.eta0_rel, m.eta_n_per_m) {
        (Some(e), None) => e,
        (None, Some(eta)) => eta / (mass1 * omega1 * mass2 * omega2_rel * omega1).sqrt() / omega1,
        (None, None) => return Err(cfg_err("mechanics.eta0", "missing; give eta0_rel or eta_N_per_m")),
        _ => return Err(cfg_err("mechanics.eta0", "conflicting keys eta0_rel, eta_N_per_m")),
    };
    let gamma1 = one_of(
        "mechanics.gamma1",
        &[("gamma1_rel", m.gamma1_rel, 1.0), ("gamma1_per_s", m.gamma1_per_s, 1.0 / omega1)],
    )?;
    let gamma2 = one_of(
        "mechanics.gamma2",
        &[("gamma2_rel", m.gamma2_rel, 1.0), ("gamma2_per_s", m.gamma2_per_s, 1.0 / omega1)],
    )?;
    let bath = |l: usize, nb: Option<f64>, t: Option<f64>| -> Result<BathSpec> {
        match (nb, t) {
            (Some(n), None) => Ok(BathSpec::Occupation(n)),
            (None, Some(t)) => Ok(BathSpec::Temperature(t)),
            (None, None) => Err(Error::IncompleteBath(l)),
            _ => Err(cfg_err(
                &format!("mechanics.bath{l}"),
                "give exactly one of occupation and temperature",
            )),
        }
    };
    let bath = [bath(1, m.nbar1, m.temperature1_k)?, bath(2, m.nbar2, m.temperature2_k)?];
    let length = one_of("cavity.length", &[("length_mm", c.length_mm, 1e-3), ("length_m", c.length_m, 1.0)])?;
    let omega_c_rel = one_of(
        "cavity.omega_c",
        &[("omega_c_rel", c.omega_c_rel, 1.0), ("freq_c_THz", c.freq_c_thz, TAU * 1e12 / omega1)],
    )?;
    let wavelength = one_of(
        "cavity.wavelength",
        &[("wavelength_nm", c.wavelength_nm, 1e-9), ("wavelength_m", c.wavelength_m, 1.0)],
    )?;
    let power = one_of("cavity.power", &[("power_mW", c.power_mw, 1e-3), ("power_W", c.power_w, 1.0)])?;
    let kappa_rel = one_of(
        "cavity.kappa",
        &[("kappa_rel", c.kappa_rel, 1.0), ("kappa_per_s", c.kappa_per_s, 1.0 / omega1)],
    )?;
    let delta_rel = p.and_then(|p| p.delta_rel).unwrap_or(1.0);
    let mode = match p.and_then(|p| p.mode.as_deref()) {
        None | Some("effective") => PointMode::Effective,
        Some("selfconsistent") => PointMode::SelfConsistent,
        Some(other) => return Err(cfg_err("point.mode", format!("unknown mode `{other}`"))),
    };
    Ok(TwoModeScenario {
        mass: [mass1, mass2],
        omega1,
        omega2_rel,
        eta0_rel,
        gamma_rel: [gamma1, gamma2],
        bath,
        length,
        omega_c_rel,
        wavelength,
        power,
        kappa_rel,
        delta_rel,
        mode,
    })
}

fn resolve_chain(c: &RawChain) -> Result<ChainParams> {
    let n = c.n.ok_or_else(|| cfg_err("chain.n", "missing"))?;
    let g = c.coupling_rel.ok_or_else(|| cfg_err("chain.coupling_rel", "missing"))?;
    let phase = c.coupling_phase_rad.unwrap_or(0.0);
    let kappa = one_of(
        "chain.kappa",
        &[("kappa_energy_rel", c.kappa_energy_rel, 1.0), ("kappa_amp_rel", c.kappa_amp_rel, 2.0)],
    )?;
    let p = ChainParams {
        n_resonators: n,
        delta: c.delta_rel.unwrap_or(1.0),
        coupling: Complex64::from_polar(g, phase),
        eta0: c.eta0_rel.ok_or_else(|| cfg_err("chain.eta0_rel", "missing"))?,
        omega_m: 1.0,
        kappa,
        gamma: c.gamma_rel.ok_or_else(|| cfg_err("chain.gamma_rel", "missing"))?,
        nbar: c.nbar.ok_or_else(|| cfg_err("chain.nbar", "missing"))?,
    };
    p.validate().map_err(|e| cfg_err("chain", e.to_string()))?;
    Ok(p)
}

fn resolve_sweep(
    s: &RawSweep,
    two_mode: &Option<TwoModeScenario>,
    chain: &Option<ChainParams>,
) -> Result<SweepSpec> {
    let target = match s.target.as_deref() {
        Some(t) => Target::parse(t).ok_or_else(|| cfg_err("sweep.target", format!("unknown target `{t}`")))?,
        None => return Err(cfg_err("sweep.target", "missing")),
    };
    let methods = match &s.methods {
        None => target.default_methods(),
        Some(list) => list
            .iter()
            .map(|m| Method::parse(m).ok_or_else(|| cfg_err("sweep.methods", format!("unknown method `{m}`"))))
            .collect::<Result<Vec<_>>>()?,
    };
    let format = match s.format.as_deref() {
        None | Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        Some(f) => return Err(cfg_err("sweep.format", format!("unknown format `{f}`"))),
    };
    let noise = match s.noise.as_deref() {
        None | Some("flat_high_t") => NoiseModel::FlatHighT,
        Some("full_coth") => NoiseModel::FullCoth {
            cutoff: s
                .drude_cutoff_rel
                .ok_or_else(|| cfg_err("sweep.drude_cutoff_rel", "required with noise = \"full_coth\""))?,
        },
        Some(n) => return Err(cfg_err("sweep.noise", format!("unknown noise model `{n}`"))),
    };
    let bridge = match s.bridge.as_deref() {
        None | Some("energy_rate") => KappaBridge::EnergyRate,
        Some("same_rate") => KappaBridge::SameRate,
        Some(b) => return Err(cfg_err("sweep.bridge", format!("unknown bridge `{b}`"))),
    };
    let mut axes = Vec::new();
    for (i, a) in s.axis.iter().enumerate() {
        let path = format!("sweep.axis[{i}]");
        let scale = match a.scale.as_deref() {
            None | Some("linear") => Scale::Linear,
            Some("log") => Scale::Log,
            Some(x) => return Err(cfg_err(&format!("{path}.scale"), format!("unknown scale `{x}`"))),
        };
        axes.push(Axis {
            name: a.name.clone(),
            min: a.min,
            max: a.max,
            count: a.count,
            scale,
        });
    }
    let spec = SweepSpec {
        target,
        axes,
        methods,
        two_mode: two_mode.clone(),
        chain: *chain,
        noise,
        rel_tol: s.rel_tol.unwrap_or(1e-8),
        bridge,
        output: s.out.clone().map(Into::into),
        format,
        execution: Default::default(),
        workers: None,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let path = e
            .span()
            .map(|s| {
                let line = text[..s.start].matches('\n').count() + 1;
                format!("line {line}")
            })
            .unwrap_or_else(|| "<root>".into());
        cfg_err(&path, msg)
    })?;
    let two_mode = match (&raw.mechanics, &raw.cavity) {
        (Some(m), Some(c)) => Some(resolve_mechanics_cavity(m, c, raw.point.as_ref())?),
        (None, None) => None,
        (Some(_), None) => return Err(cfg_err("cavity", "section missing")),
        (None, Some(_)) => return Err(cfg_err("mechanics", "section missing")),
    };
    let chain = raw.chain.as_ref().map(resolve_chain).transpose()?;
    let sweep = raw
        .sweep
        .as_ref()
        .map(|s| resolve_sweep(s, &two_mode, &chain))
        .transpose()?;
    Ok(Config {
        title: raw.title,
        two_mode,
        chain,
        sweep,
    })
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| cfg_err(&path.display().to_string(), e.to_string()))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[mechanics]
mass1_ng = 250.0
mass2_ng = 250.0
freq1_MHz = 10.0
freq2_rel = 1.0
eta0_rel = 0.04
gamma1_rel = 1e-5
gamma2_rel = 1e-5
nbar1 = 1000.0
nbar2 = 1000.0

[cavity]
length_mm = 0.5
omega_c_rel = 2.817e7
wavelength_nm = 1064.0
power_mW = 50.0
kappa_rel = 0.2

[point]
delta_rel = 1.0
"#;

    #[test]
    fn resolves_reference_point() {
        let c = parse_config(BASE).unwrap();
        let s = c.two_mode.unwrap();
        let (n, op) = s.resolve().unwrap();
        assert!((n.lambda0 / 4.61631e-6 - 1.0).abs() < 1e-5);
        assert!((op.coupling.norm() - 0.186911).abs() < 2e-6);
    }

    #[test]
    fn conflicting_units_rejected() {
        let text = BASE.replace("mass1_ng = 250.0", "mass1_ng = 250.0\nmass1_kg = 2.5e-10");
        match parse_config(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "mechanics.mass1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_bath_reported() {
        let text = BASE.replace("nbar2 = 1000.0", "");
        assert_eq!(parse_config(&text).unwrap_err(), Error::IncompleteBath(2));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = BASE.replace("[point]", "[point]\nspeed = 3");
        assert!(matches!(parse_config(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn eta_in_newtons_per_metre() {
        let w = TAU * 1e7;
        let m = 250e-12;
        let eta = 0.04 * w * (m * w * m * w).sqrt();
        let text = BASE.replace("eta0_rel = 0.04", &format!("eta_N_per_m = {eta:e}"));
        let s = parse_config(&text).unwrap().two_mode.unwrap();
        assert!((s.eta0_rel - 0.04).abs() < 1e-12);
    }

    #[test]
    fn chain_kappa_conventions() {
        let a = "[chain]\nn = 2\ncoupling_rel = 0.2\neta0_rel = 0.1\nkappa_amp_rel = 0.15\ngamma_rel = 1e-5\nnbar = 1000\n";
        let p = parse_config(a).unwrap().chain.unwrap();
        assert!((p.kappa - 0.3).abs() < 1e-15);
        let b = a.replace("kappa_amp_rel = 0.15", "kappa_amp_rel = 0.15\nkappa_energy_rel = 0.3");
        assert!(matches!(parse_config(&b), Err(Error::Config { .. })));
    }
}
