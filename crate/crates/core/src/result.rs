use serde::{Deserialize, Serialize};

/// Which computational path produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Closedform,
    Quadrature,
    Lyapunov,
    AdiabaticFull,
    AdiabaticCorrected,
    AdiabaticSimplified,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Closedform => "closedform",
            Method::Quadrature => "quadrature",
            Method::Lyapunov => "lyapunov",
            Method::AdiabaticFull => "adiabatic_full",
            Method::AdiabaticCorrected => "adiabatic_corrected",
            Method::AdiabaticSimplified => "adiabatic_simplified",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "closedform" => Method::Closedform,
            "quadrature" => Method::Quadrature,
            "lyapunov" => Method::Lyapunov,
            "adiabatic_full" => Method::AdiabaticFull,
            "adiabatic_corrected" => Method::AdiabaticCorrected,
            "adiabatic_simplified" => Method::AdiabaticSimplified,
            _ => return None,
        })
    }

    pub const ALL: [Method; 6] = [
        Method::Closedform,
        Method::Quadrature,
        Method::Lyapunov,
        Method::AdiabaticFull,
        Method::AdiabaticCorrected,
        Method::AdiabaticSimplified,
    ];
}

/// Final phonon numbers and the symmetrized quadrature variances behind them.
///
/// Adiabatic paths work with ladder operators only; their variances are
/// reported as `n + 1/2` for both quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingResult {
    pub n1: f64,
    pub n2: f64,
    pub var_q: [f64; 2],
    pub var_p: [f64; 2],
    pub method: Method,
    /// Absolute error estimate on the variances, when the method has one.
    pub error_estimate: Option<f64>,
}

impl CoolingResult {
    pub fn from_variances(var_q: [f64; 2], var_p: [f64; 2], method: Method) -> Self {
        Self {
            n1: 0.5 * (var_q[0] + var_p[0] - 1.0),
            n2: 0.5 * (var_q[1] + var_p[1] - 1.0),
            var_q,
            var_p,
            method,
            error_estimate: None,
        }
    }

    pub fn from_occupations(n1: f64, n2: f64, method: Method) -> Self {
        Self {
            n1,
            n2,
            var_q: [n1 + 0.5, n2 + 0.5],
            var_p: [n1 + 0.5, n2 + 0.5],
            method,
            error_estimate: None,
        }
    }

    pub fn occupation(&self, l: usize) -> f64 {
        [self.n1, self.n2][l]
    }
}
