//! Grid sweeps over one or two parameters.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::adiabatic::{
    effective_rates, phonons_adiabatic_corrected_with, phonons_adiabatic_full_with,
    phonons_adiabatic_simplified, KappaBridge,
};
use crate::chain::{chain_occupations, ChainParams};
use crate::closedform::exact_phonons;
use crate::config::{set_chain, TwoModeScenario, CHAIN_PARAMETERS, TWO_MODE_PARAMETERS};
use crate::error::{Error, Result};
use crate::linearize::{delta6_criterion, drift_matrix, phonons_lyapunov, OperatingPoint, STABILITY_MARGIN};
use crate::par::{par_map, with_workers, Execution};
use crate::params::NormalizedParams;
use crate::quadrature::QuadOptions;
use crate::result::{CoolingResult, Method};
use crate::spectra::{phonons_quadrature, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    TwoMode,
    Chain,
    AdiabaticCompare,
    StabilityMap,
}

impl Target {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "two_mode" => Target::TwoMode,
            "chain" => Target::Chain,
            "adiabatic_compare" => Target::AdiabaticCompare,
            "stability_map" => Target::StabilityMap,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Target::TwoMode => "two_mode",
            Target::Chain => "chain",
            Target::AdiabaticCompare => "adiabatic_compare",
            Target::StabilityMap => "stability_map",
        }
    }

    pub fn default_methods(self) -> Vec<Method> {
        match self {
            Target::TwoMode => vec![Method::Closedform],
            Target::AdiabaticCompare => {
                vec![Method::Closedform, Method::AdiabaticFull, Method::AdiabaticSimplified]
            }
            Target::Chain | Target::StabilityMap => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: Scale,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let t = k as f64 / last;
                match self.scale {
                    Scale::Linear => {
                        if k + 1 == self.count {
                            self.max
                        } else {
                            self.min + (self.max - self.min) * t
                        }
                    }
                    Scale::Log => {
                        if k + 1 == self.count {
                            self.max
                        } else {
                            (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp()
                        }
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub target: Target,
    pub axes: Vec<Axis>,
    pub methods: Vec<Method>,
    pub two_mode: Option<TwoModeScenario>,
    pub chain: Option<ChainParams>,
    pub noise: NoiseModel,
    /// Relative tolerance of the quadrature path.
    pub rel_tol: f64,
    pub bridge: KappaBridge,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub execution: Execution,
    pub workers: Option<usize>,
}

fn spec_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(spec_err("sweep.axis", "need one or two axes"));
        }
        let names: &[&str] = match self.target {
            Target::Chain => &CHAIN_PARAMETERS,
            _ => &TWO_MODE_PARAMETERS,
        };
        for (i, a) in self.axes.iter().enumerate() {
            let path = format!("sweep.axis[{i}]");
            if !names.contains(&a.name.as_str()) {
                return Err(spec_err(
                    format!("{path}.name"),
                    format!("`{}` is not a {} parameter", a.name, self.target.name()),
                ));
            }
            if a.count < 2 {
                return Err(spec_err(format!("{path}.count"), "must be at least 2"));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.min > a.max {
                return Err(spec_err(format!("{path}.min"), "need finite min <= max"));
            }
            if a.scale == Scale::Log && a.min <= 0.0 {
                return Err(spec_err(format!("{path}.min"), "log scale needs min > 0"));
            }
        }
        if self.axes.len() == 2 && self.axes[0].name == self.axes[1].name {
            return Err(spec_err("sweep.axis[1].name", "axes must differ"));
        }
        match self.target {
            Target::Chain => {
                if self.chain.is_none() {
                    return Err(spec_err("chain", "chain target needs a [chain] section"));
                }
                if !self.methods.is_empty() {
                    return Err(spec_err("sweep.methods", "chain sweeps take no methods"));
                }
            }
            _ => {
                if self.two_mode.is_none() {
                    return Err(spec_err("mechanics", "two-mode target needs [mechanics] and [cavity]"));
                }
            }
        }
        if self.target == Target::AdiabaticCompare
            && !self
                .methods
                .iter()
                .any(|m| matches!(m, Method::Closedform | Method::Quadrature | Method::Lyapunov))
        {
            return Err(spec_err("sweep.methods", "adiabatic_compare needs an exact method"));
        }
        if self.target == Target::TwoMode && self.methods.is_empty() {
            return Err(spec_err("sweep.methods", "at least one method required"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(spec_err("sweep.rel_tol", "must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<Vec<f64>> {
        let v0 = self.axes[0].values();
        match self.axes.get(1) {
            None => v0.into_iter().map(|x| vec![x]).collect(),
            Some(a1) => {
                let v1 = a1.values();
                v0.iter()
                    .flat_map(|&x| v1.iter().map(move |&y| vec![x, y]))
                    .collect()
            }
        }
    }
}

/// Solver settings shared by every two-mode method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOptions {
    pub noise: NoiseModel,
    pub quad: QuadOptions,
    pub bridge: KappaBridge,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            noise: NoiseModel::FlatHighT,
            quad: QuadOptions::default(),
            bridge: KappaBridge::default(),
        }
    }
}

/// Final phonon numbers of the two-mode system by the chosen method.
pub fn two_mode_phonons(
    method: Method,
    op: &OperatingPoint,
    n: &NormalizedParams,
    opts: &MethodOptions,
) -> Result<CoolingResult> {
    match method {
        Method::Closedform => exact_phonons(op, n),
        Method::Quadrature => phonons_quadrature(op, n, opts.noise, &opts.quad),
        Method::Lyapunov => phonons_lyapunov(op, n),
        Method::AdiabaticFull => phonons_adiabatic_full_with(&effective_rates(op, n, opts.bridge), n),
        Method::AdiabaticCorrected => {
            phonons_adiabatic_corrected_with(&effective_rates(op, n, opts.bridge), n)
        }
        Method::AdiabaticSimplified => {
            phonons_adiabatic_simplified(&effective_rates(op, n, opts.bridge), n)
        }
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
    Bool(bool),
    Missing,
}

impl Cell {
    pub fn num(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    pub fn text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
    pub target: Target,
    pub axes: Vec<Axis>,
    pub methods: Vec<Method>,
    pub two_mode: Option<TwoModeScenario>,
    pub chain: Option<ChainParams>,
    pub noise: NoiseModel,
    pub rel_tol: f64,
    pub bridge: KappaBridge,
    /// Seconds since the Unix epoch.
    pub created_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub target: Target,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, `None` where missing.
    pub fn values(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].num()).collect())
    }
}

pub const STATUS_OK: &str = "ok";
pub const STATUS_UNSTABLE: &str = "unstable";

fn status_of(e: &Error) -> String {
    match e {
        Error::UnstableSystem { .. } => STATUS_UNSTABLE.to_string(),
        other => other.code().to_string(),
    }
}

fn two_mode_columns(spec: &SweepSpec) -> Vec<String> {
    let mut cols: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    cols.push("status".into());
    match spec.target {
        Target::StabilityMap => {
            for c in ["max_re", "eig_stable", "delta6_rotated", "delta6_passes", "agree"] {
                cols.push(c.into());
            }
        }
        _ => {
            cols.push("max_re".into());
            for m in &spec.methods {
                cols.push(format!("n1_{}", m.name()));
                cols.push(format!("n2_{}", m.name()));
                cols.push(format!("status_{}", m.name()));
            }
            if spec.target == Target::AdiabaticCompare {
                for m in spec.methods.iter().filter(|m| is_adiabatic(**m)) {
                    cols.push(format!("gap1_{}", m.name()));
                    cols.push(format!("gap2_{}", m.name()));
                }
            }
        }
    }
    cols
}

fn is_adiabatic(m: Method) -> bool {
    matches!(
        m,
        Method::AdiabaticFull | Method::AdiabaticCorrected | Method::AdiabaticSimplified
    )
}

fn two_mode_row(spec: &SweepSpec, base: &TwoModeScenario, coords: &[f64], opts: &MethodOptions) -> Vec<Cell> {
    let mut row: Vec<Cell> = coords.iter().map(|&x| Cell::Num(x)).collect();
    let width = two_mode_columns(spec).len();
    let fail = |mut row: Vec<Cell>, status: String| {
        row.push(Cell::Text(status));
        row.resize(width, Cell::Missing);
        row
    };
    let mut s = base.clone();
    for (a, &x) in spec.axes.iter().zip(coords) {
        if let Err(e) = s.set(&a.name, x) {
            return fail(row, e.code().to_string());
        }
    }
    let (n, op) = match s.resolve() {
        Ok(v) => v,
        Err(e) => return fail(row, e.code().to_string()),
    };
    let max_re = match drift_matrix(&op, &n).max_real_part() {
        Ok(v) => v,
        Err(e) => return fail(row, e.code().to_string()),
    };
    let stable = max_re < -STABILITY_MARGIN;

    if spec.target == Target::StabilityMap {
        let d6 = delta6_criterion(&op, &n);
        row.push(Cell::Text(STATUS_OK.into()));
        row.push(Cell::Num(max_re));
        row.push(Cell::Bool(stable));
        row.push(Cell::Num(d6.rotated.re));
        row.push(Cell::Bool(d6.passes));
        row.push(Cell::Bool(d6.passes == stable));
        return row;
    }
    if !stable {
        let mut r = fail(row, STATUS_UNSTABLE.into());
        r[coords.len() + 1] = Cell::Num(max_re);
        return r;
    }
    let results: Vec<Result<CoolingResult>> = spec
        .methods
        .iter()
        .map(|&m| two_mode_phonons(m, &op, &n, opts))
        .collect();
    let overall = results
        .iter()
        .find_map(|r| r.as_ref().err().map(status_of))
        .unwrap_or_else(|| STATUS_OK.into());
    row.push(Cell::Text(overall));
    row.push(Cell::Num(max_re));
    for r in &results {
        match r {
            Ok(c) => {
                row.push(Cell::Num(c.n1));
                row.push(Cell::Num(c.n2));
                row.push(Cell::Text(STATUS_OK.into()));
            }
            Err(e) => {
                row.push(Cell::Missing);
                row.push(Cell::Missing);
                row.push(Cell::Text(status_of(e)));
            }
        }
    }
    if spec.target == Target::AdiabaticCompare {
        let exact = spec
            .methods
            .iter()
            .zip(&results)
            .find(|(m, _)| !is_adiabatic(**m))
            .and_then(|(_, r)| r.as_ref().ok());
        for (m, r) in spec.methods.iter().zip(&results) {
            if !is_adiabatic(*m) {
                continue;
            }
            let gap = |l: usize| match (exact, r) {
                (Some(e), Ok(a)) => Some((a.occupation(l) - e.occupation(l)).abs() / e.occupation(l)),
                _ => None,
            };
            row.push(Cell::opt(gap(0)));
            row.push(Cell::opt(gap(1)));
        }
    }
    row
}

fn chain_columns(spec: &SweepSpec, n_res: usize) -> Vec<String> {
    let mut cols: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    cols.push("status".into());
    cols.push("n_a".into());
    for j in 1..=n_res {
        cols.push(format!("n_{j}"));
    }
    cols
}

fn chain_row(spec: &SweepSpec, base: &ChainParams, coords: &[f64]) -> Vec<Cell> {
    let mut row: Vec<Cell> = coords.iter().map(|&x| Cell::Num(x)).collect();
    let mut p = *base;
    let mut status = None;
    for (a, &x) in spec.axes.iter().zip(coords) {
        if let Err(e) = set_chain(&mut p, &a.name, x) {
            status = Some(e.code().to_string());
        }
    }
    let result = match status {
        Some(s) => Err(s),
        None => chain_occupations(&p).map_err(|e| e.code().to_string()),
    };
    match result {
        Ok(c) => {
            row.push(Cell::Text(STATUS_OK.into()));
            row.push(Cell::Num(c.cavity_occupation()));
            row.extend(c.resonator_occupations().into_iter().map(Cell::Num));
        }
        Err(s) => {
            row.push(Cell::Text(s));
            row.resize(coords.len() + 2 + base.n_resonators, Cell::Missing);
        }
    }
    row
}

/// Evaluates every grid point with every requested method. Row order is
/// the grid order (first axis outermost) whatever the execution mode.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let grid = spec.grid();
    let opts = MethodOptions {
        noise: spec.noise,
        quad: QuadOptions {
            rel_tol: spec.rel_tol,
            ..QuadOptions::default()
        },
        bridge: spec.bridge,
    };
    let (columns, rows) = match spec.target {
        Target::Chain => {
            let base = spec.chain.as_ref().expect("validated");
            let rows = with_workers(spec.workers, || {
                par_map(&grid, spec.execution, |c| chain_row(spec, base, c))
            });
            (chain_columns(spec, base.n_resonators), rows)
        }
        _ => {
            let base = spec.two_mode.as_ref().expect("validated");
            let rows = with_workers(spec.workers, || {
                par_map(&grid, spec.execution, |c| two_mode_row(spec, base, c, &opts))
            });
            (two_mode_columns(spec), rows)
        }
    };
    let status_col = spec.axes.len();
    let mut warnings = Vec::new();
    if rows
        .iter()
        .all(|r| r[status_col].text().is_some_and(|s| s != STATUS_OK))
    {
        let msg = "empty result: no grid point evaluated successfully".to_string();
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let created_unix = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(SweepResult {
        target: spec.target,
        columns,
        rows,
        warnings,
        provenance: Provenance {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            target: spec.target,
            axes: spec.axes.clone(),
            methods: spec.methods.clone(),
            two_mode: spec.two_mode.clone(),
            chain: spec.chain,
            noise: spec.noise,
            rel_tol: spec.rel_tol,
            bridge: spec.bridge,
            created_unix,
        },
    })
}
