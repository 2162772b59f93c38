//! Truncated-Fock master-equation solver for the chain, used as an oracle
//! for the moment equations.
//!
//! The chain dynamics conserve total excitation number, so from a state
//! diagonal in that number the density matrix stays block diagonal. Each
//! block is evolved as a dense matrix in the frame rotating at `omega_m`
//! until the Liouvillian residual vanishes.

use num_complex::Complex64;
use serde::Serialize;

use crate::chain::ChainParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockOptions {
    /// Stop when every entry of `d rho / dt` is below this.
    pub residual_tol: f64,
    pub max_time: f64,
    /// Largest allowed population in the top level of any mode.
    pub top_population_limit: f64,
}

impl Default for FockOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-12,
            max_time: 5e4,
            top_population_limit: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FockSteadyState {
    pub cavity: f64,
    pub resonators: Vec<f64>,
    /// Population in the highest kept level, per mode (cavity first).
    pub top_population: Vec<f64>,
    pub residual: f64,
    pub time: f64,
}

/// `(from, to, amplitude)` for one mode's lowering operator between blocks.
type Transition = (usize, usize, f64);

struct Space {
    /// Occupation tuples, grouped by block.
    blocks: Vec<Vec<Vec<usize>>>,
    /// `lower[k][b]`: lowering of mode `k` from block `b` into `b - 1`.
    lower: Vec<Vec<Vec<Transition>>>,
}

impl Space {
    fn new(dims: &[usize]) -> Self {
        let total: usize = dims.iter().map(|d| d - 1).sum();
        let mut blocks: Vec<Vec<Vec<usize>>> = vec![Vec::new(); total + 1];
        let count: usize = dims.iter().product();
        for code in 0..count {
            let mut c = code;
            let occ: Vec<usize> = dims
                .iter()
                .map(|&d| {
                    let v = c % d;
                    c /= d;
                    v
                })
                .collect();
            let s: usize = occ.iter().sum();
            blocks[s].push(occ);
        }
        let index = |b: usize, occ: &[usize]| blocks[b].iter().position(|o| o == occ);
        let mut lower = vec![vec![Vec::new(); total + 1]; dims.len()];
        for k in 0..dims.len() {
            for b in 1..=total {
                for (i, occ) in blocks[b].iter().enumerate() {
                    if occ[k] == 0 {
                        continue;
                    }
                    let mut o = occ.clone();
                    o[k] -= 1;
                    let j = index(b - 1, &o).expect("lowered state exists");
                    lower[k][b].push((i, j, (occ[k] as f64).sqrt()));
                }
            }
        }
        Self { blocks, lower }
    }
}

struct Model {
    space: Space,
    /// Hamiltonian entries per block, `(row, col, value)`.
    ham: Vec<Vec<(usize, usize, Complex64)>>,
    /// Half the summed `c^dag c` rates per state.
    damp: Vec<Vec<f64>>,
    /// `(mode, rate)` for lowering and raising jump operators.
    down: Vec<(usize, f64)>,
    up: Vec<(usize, f64)>,
}

impl Model {
    fn new(p: &ChainParams, dims: &[usize]) -> Self {
        let space = Space::new(dims);
        let modes = dims.len();
        let det = p.delta - p.omega_m;
        let mut ham = Vec::with_capacity(space.blocks.len());
        let mut damp = Vec::with_capacity(space.blocks.len());
        for states in space.blocks.iter() {
            let mut h = Vec::new();
            let mut d = Vec::with_capacity(states.len());
            for (i, occ) in states.iter().enumerate() {
                h.push((i, i, Complex64::new(det * occ[0] as f64, 0.0)));
                let mut g = 0.5 * p.kappa * occ[0] as f64;
                for k in 1..modes {
                    let nk = occ[k] as f64;
                    g += 0.5 * p.gamma * (p.nbar + 1.0) * nk;
                    if occ[k] + 1 < dims[k] {
                        g += 0.5 * p.gamma * p.nbar * (nk + 1.0);
                    }
                }
                d.push(g);
            }
            // hopping x^dag y with x the mode gaining an excitation
            let mut hop = |x: usize, y: usize, c: Complex64| {
                for (i, occ) in states.iter().enumerate() {
                    if occ[y] == 0 || occ[x] + 1 >= dims[x] {
                        continue;
                    }
                    let mut o = occ.clone();
                    o[y] -= 1;
                    o[x] += 1;
                    let j = states.iter().position(|s| *s == o).unwrap();
                    let amp = ((occ[y] as f64) * (occ[x] as f64 + 1.0)).sqrt();
                    h.push((j, i, c * amp));
                    h.push((i, j, c.conj() * amp));
                }
            };
            hop(0, 1, -p.coupling);
            for k in 1..modes - 1 {
                hop(k, k + 1, Complex64::new(-p.eta0, 0.0));
            }
            ham.push(h);
            damp.push(d);
        }
        let mut down = vec![(0, p.kappa)];
        let mut up = Vec::new();
        for k in 1..modes {
            down.push((k, p.gamma * (p.nbar + 1.0)));
            if p.nbar > 0.0 {
                up.push((k, p.gamma * p.nbar));
            }
        }
        Self {
            space,
            ham,
            damp,
            down,
            up,
        }
    }

    fn rate_bound(&self) -> f64 {
        let mut bound: f64 = 0.0;
        for (b, h) in self.ham.iter().enumerate() {
            let m = self.space.blocks[b].len();
            let mut row = vec![0.0; m];
            for &(r, _, v) in h {
                row[r] += v.norm();
            }
            let hmax = row.iter().copied().fold(0.0, f64::max);
            let dmax = self.damp[b].iter().copied().fold(0.0, f64::max);
            bound = bound.max(2.0 * hmax + 2.0 * dmax);
        }
        let jumps: f64 = self.down.iter().chain(&self.up).map(|&(_, r)| r).sum();
        let maxn = self.space.blocks.len() as f64;
        bound + jumps * maxn
    }

    /// `d rho / dt` for the block-diagonal state.
    fn apply(&self, rho: &[Vec<Complex64>], out: &mut [Vec<Complex64>]) {
        let i = Complex64::new(0.0, 1.0);
        let nb = rho.len();
        for b in 0..nb {
            let m = self.space.blocks[b].len();
            let r = &rho[b];
            let o = &mut out[b];
            for x in 0..m {
                for y in 0..m {
                    o[x * m + y] = -(self.damp[b][x] + self.damp[b][y]) * r[x * m + y];
                }
            }
            // -i (H rho - rho H)
            for &(row, col, h) in &self.ham[b] {
                let hi = -i * h;
                for y in 0..m {
                    o[row * m + y] += hi * r[col * m + y];
                }
                for x in 0..m {
                    o[x * m + col] -= hi * r[x * m + row];
                }
            }
            if b + 1 < nb {
                let src = &rho[b + 1];
                let ms = self.space.blocks[b + 1].len();
                for &(k, rate) in &self.down {
                    let t = &self.space.lower[k][b + 1];
                    for &(i1, j1, a1) in t {
                        for &(i2, j2, a2) in t {
                            o[j1 * m + j2] += rate * a1 * a2 * src[i1 * ms + i2];
                        }
                    }
                }
            }
            if b > 0 {
                let src = &rho[b - 1];
                let ms = self.space.blocks[b - 1].len();
                for &(k, rate) in &self.up {
                    let t = &self.space.lower[k][b];
                    for &(i1, j1, a1) in t {
                        for &(i2, j2, a2) in t {
                            o[i1 * m + i2] += rate * a1 * a2 * src[j1 * ms + j2];
                        }
                    }
                }
            }
        }
    }
}

/// Steady-state occupations from the truncated master equation. `dims`
/// lists the kept levels per mode, cavity first.
pub fn fock_oracle(p: &ChainParams, dims: &[usize]) -> Result<FockSteadyState> {
    fock_oracle_with(p, dims, &FockOptions::default())
}

pub fn fock_oracle_with(p: &ChainParams, dims: &[usize], opts: &FockOptions) -> Result<FockSteadyState> {
    p.validate()?;
    if dims.len() != p.n_resonators + 1 {
        return Err(Error::param("dims", format!("need {} entries", p.n_resonators + 1)));
    }
    if dims.iter().any(|&d| d < 2) {
        return Err(Error::param("dims", "each mode needs at least two levels"));
    }
    let states: usize = dims.iter().product();
    if states > 20_000 {
        return Err(Error::param("dims", "truncated space too large"));
    }
    let model = Model::new(p, dims);
    let blocks = &model.space.blocks;

    // vacuum cavity, truncated thermal resonators
    let z = Complex64::new(0.0, 0.0);
    let mut rho: Vec<Vec<Complex64>> = blocks.iter().map(|s| vec![z; s.len() * s.len()]).collect();
    let ratio = p.nbar / (p.nbar + 1.0);
    for (b, s) in blocks.iter().enumerate() {
        let m = s.len();
        for (x, occ) in s.iter().enumerate() {
            if occ[0] != 0 {
                continue;
            }
            let w: f64 = occ[1..].iter().map(|&n| ratio.powi(n as i32)).product();
            rho[b][x * m + x] = Complex64::new(w, 0.0);
        }
    }
    normalize(&mut rho, blocks);

    let dt = 2.0 / model.rate_bound();
    let mut t = 0.0;
    let mut k: Vec<Vec<Vec<Complex64>>> = (0..4).map(|_| rho.clone()).collect();
    let mut tmp = rho.clone();
    let mut residual;
    let mut step = 0usize;
    loop {
        model.apply(&rho, &mut k[0]);
        if step.is_multiple_of(50) {
            residual = k[0].iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
            if residual < opts.residual_tol {
                break;
            }
            if t > opts.max_time {
                return Err(Error::NumericalError(format!(
                    "Fock relaxation stalled at residual {residual:.3e}"
                )));
            }
        }
        for (stage, c) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            for b in 0..rho.len() {
                for (x, v) in tmp[b].iter_mut().enumerate() {
                    *v = rho[b][x] + k[stage - 1][b][x] * (c * dt);
                }
            }
            model.apply(&tmp, &mut k[stage]);
        }
        for b in 0..rho.len() {
            for x in 0..rho[b].len() {
                rho[b][x] += (k[0][b][x] + 2.0 * k[1][b][x] + 2.0 * k[2][b][x] + k[3][b][x]) * (dt / 6.0);
            }
        }
        t += dt;
        step += 1;
        if step.is_multiple_of(500) {
            normalize(&mut rho, blocks);
        }
    }
    normalize(&mut rho, blocks);

    let modes = dims.len();
    let mut occ = vec![0.0; modes];
    let mut top = vec![0.0; modes];
    for (b, s) in blocks.iter().enumerate() {
        let m = s.len();
        for (x, o) in s.iter().enumerate() {
            let pop = rho[b][x * m + x].re;
            for j in 0..modes {
                occ[j] += pop * o[j] as f64;
                if o[j] + 1 == dims[j] {
                    top[j] += pop;
                }
            }
        }
    }
    if let Some((mode, &population)) = top
        .iter()
        .enumerate()
        .find(|(_, &v)| v > opts.top_population_limit)
    {
        return Err(Error::TruncationTooTight { mode, population });
    }
    Ok(FockSteadyState {
        cavity: occ[0],
        resonators: occ[1..].to_vec(),
        top_population: top,
        residual,
        time: t,
    })
}

fn normalize(rho: &mut [Vec<Complex64>], blocks: &[Vec<Vec<usize>>]) {
    let mut tr = 0.0;
    for (b, s) in blocks.iter().enumerate() {
        let m = s.len();
        for x in 0..m {
            tr += rho[b][x * m + x].re;
        }
    }
    for block in rho.iter_mut() {
        for v in block.iter_mut() {
            *v /= tr;
        }
    }
}
