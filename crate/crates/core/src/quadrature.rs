//! Globally adaptive 21-point Gauss-Kronrod integration of vector-valued
//! integrands on a finite interval with user breakpoints.

#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_intervals: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub evaluations: usize,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    score: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, o: &Self) -> bool {
        self.score == o.score
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.score.total_cmp(&o.score)
    }
}

/// One 21-point Kronrod panel with the QUADPACK error heuristic.
pub fn qk21<const N: usize, F: Fn(f64) -> [f64; N]>(f: &F, a: f64, b: f64) -> ([f64; N], [f64; N]) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = [0.0; N];
    let mut resg = [0.0; N];
    let mut resabs = [0.0; N];
    let mut fv1 = [[0.0; N]; 10];
    let mut fv2 = [[0.0; N]; 10];
    for c in 0..N {
        resk[c] = fc[c] * WGK[10];
        resabs[c] = fc[c].abs() * WGK[10];
    }
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (f(center - dx), f(center + dx));
        for c in 0..N {
            resg[c] += WG[j] * (f1[c] + f2[c]);
            resk[c] += WGK[jtw] * (f1[c] + f2[c]);
            resabs[c] += WGK[jtw] * (f1[c].abs() + f2[c].abs());
        }
        fv1[jtw] = f1;
        fv2[jtw] = f2;
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (f(center - dx), f(center + dx));
        for c in 0..N {
            resk[c] += WGK[jtwm1] * (f1[c] + f2[c]);
            resabs[c] += WGK[jtwm1] * (f1[c].abs() + f2[c].abs());
        }
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
    }
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for c in 0..N {
        let mean = 0.5 * resk[c];
        let mut resasc = WGK[10] * (fc[c] - mean).abs();
        for j in 0..10 {
            resasc += WGK[j] * ((fv1[j][c] - mean).abs() + (fv2[j][c] - mean).abs());
        }
        let hl = half.abs();
        let resabs_c = resabs[c] * hl;
        resasc *= hl;
        let mut err = ((resk[c] - resg[c]) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        if resabs_c > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * resabs_c);
        }
        value[c] = resk[c] * half;
        error[c] = err;
    }
    (value, error)
}

/// Integrates `f` over `[points[0], points[last]]`, seeding the partition
/// with every interior point. Convergence requires each component to meet
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<const N: usize, F: Fn(f64) -> [f64; N]>(
    f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<QuadResult<N>> {
    let mut pts: Vec<f64> = points.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::param("points", "need a non-empty interval"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = [0.0; N];
    let mut total_err = [0.0; N];
    let mut evaluations = 0;
    let mut pieces = Vec::new();
    for w in pts.windows(2) {
        let (v, e) = qk21(&f, w[0], w[1]);
        evaluations += 21;
        for c in 0..N {
            total[c] += v[c];
            total_err[c] += e[c];
        }
        pieces.push(Piece {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
            score: 0.0,
        });
    }
    let score = |e: &[f64; N], tot: &[f64; N]| {
        (0..N)
            .map(|c| e[c] / tot[c].abs().max(opts.abs_tol).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    };
    for mut p in pieces {
        p.score = score(&p.error, &total);
        heap.push(p);
    }
    let converged = |tot: &[f64; N], err: &[f64; N]| {
        (0..N).all(|c| err[c] <= opts.abs_tol.max(opts.rel_tol * tot[c].abs()))
    };
    let mut frozen: Vec<Piece<N>> = Vec::new();
    let span = pts[pts.len() - 1] - pts[0];
    while !converged(&total, &total_err) {
        if heap.len() + frozen.len() >= opts.max_intervals {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if (p.b - p.a) <= 1e-14 * span || mid <= p.a || mid >= p.b {
            frozen.push(p);
            continue;
        }
        let (v1, e1) = qk21(&f, p.a, mid);
        let (v2, e2) = qk21(&f, mid, p.b);
        evaluations += 42;
        for c in 0..N {
            total[c] += v1[c] + v2[c] - p.value[c];
            total_err[c] += e1[c] + e2[c] - p.error[c];
        }
        for (a, b, v, e) in [(p.a, mid, v1, e1), (mid, p.b, v2, e2)] {
            heap.push(Piece {
                a,
                b,
                value: v,
                error: e,
                score: score(&e, &total),
            });
        }
    }
    // re-sum to shed accumulated update rounding
    let all: Vec<Piece<N>> = heap.into_iter().chain(frozen).collect();
    let mut value = [0.0; N];
    let mut error = [0.0; N];
    for p in &all {
        for c in 0..N {
            value[c] += p.value[c];
            error[c] += p.error[c];
        }
    }
    if value.iter().chain(&error).any(|x| !x.is_finite()) {
        return Err(Error::NumericalError("non-finite integrand".into()));
    }
    if !converged(&value, &error) {
        let (worst, target) = (0..N)
            .map(|c| (error[c], opts.abs_tol.max(opts.rel_tol * value[c].abs())))
            .max_by(|x, y| (x.0 / x.1).total_cmp(&(y.0 / y.1)))
            .unwrap();
        return Err(Error::IntegrationError {
            estimate: worst,
            target,
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
        intervals: all.len(),
    })
}
