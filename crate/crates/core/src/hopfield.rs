//! Analogue Hopfield-Tank dynamics: explicit-Euler integration of
//! dx/dt = -x/tau + J v + h + I_b with v = tanh(x / x0), the matching
//! Lyapunov function, ground-state-probability estimation over seeded
//! restarts, and the iteration-budget search used by the scaling study.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Adjacency, IsingInstance, SpinConfig};
use crate::seed::derive;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HTParams {
    pub dt: f64,
    pub tau: f64,
    pub x0: f64,
    pub bias: f64,
    pub max_iters: u64,
    /// Residual threshold on ||dx/dt||_inf; 0 disables the fixed-point stop
    /// (pure budget mode).
    pub fixpoint_tol: f64,
    /// Half-width of the uniform initial distribution of x.
    pub init_amplitude: f64,
    /// Sample the trace histories every this many iterations; 0 records
    /// nothing.
    pub record_every: u64,
    /// When known, proximity (energy / ground) is recorded alongside energy.
    pub ground_energy: Option<f64>,
}

impl Default for HTParams {
    fn default() -> Self {
        HTParams {
            dt: 0.9,
            tau: 1.0,
            x0: 3.0,
            bias: 0.0,
            max_iters: 10_000,
            fixpoint_tol: 1e-6,
            init_amplitude: 0.25,
            record_every: 0,
            ground_energy: None,
        }
    }
}

impl HTParams {
    pub fn validate(&self) -> Result<()> {
        if self.dt <= 0.0 || self.tau <= 0.0 || self.x0 <= 0.0 || self.init_amplitude <= 0.0 {
            return Err(Error::InvalidParam(
                "dt, tau, x0, init_amplitude must all be positive".into(),
            ));
        }
        if self.fixpoint_tol < 0.0 {
            return Err(Error::InvalidParam("fixpoint_tol must be >= 0".into()));
        }
        Ok(())
    }

    /// Budget-only variant used by the fixed-iteration studies.
    pub fn with_budget(mut self, iters: u64) -> Self {
        self.max_iters = iters;
        self.fixpoint_tol = 0.0;
        self
    }
}

#[derive(Debug, Clone)]
pub struct HTState {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl HTState {
    pub fn from_x(x: Vec<f64>, params: &HTParams) -> HTState {
        let v = x.iter().map(|&xi| (xi / params.x0).tanh()).collect();
        HTState { x, v }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HTTrace {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub energy_history: Vec<(u64, f64)>,
    pub proximity_history: Vec<(u64, f64)>,
    pub iterations_run: u64,
    pub converged: bool,
}

/// One Euler step; returns ||dx||_inf / dt, the residual of the flow.
fn step_inner(
    adj: &Adjacency,
    fields: &[f64],
    params: &HTParams,
    x: &mut [f64],
    v: &mut [f64],
    jv: &mut [f64],
) -> f64 {
    adj.matvec(v, jv);
    let mut max_rhs: f64 = 0.0;
    for i in 0..x.len() {
        let rhs = -x[i] / params.tau + jv[i] + fields[i] + params.bias;
        max_rhs = max_rhs.max(rhs.abs());
        x[i] += params.dt * rhs;
        v[i] = (x[i] / params.x0).tanh();
    }
    max_rhs
}

/// Single integration step. Builds the neighbour structure on the fly, so
/// loops should prefer [`ht_run`], which hoists it.
pub fn ht_step(inst: &IsingInstance, state: &mut HTState, params: &HTParams) -> Result<()> {
    params.validate()?;
    if state.x.len() != inst.n || state.v.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: state.x.len(),
        });
    }
    let adj = inst.adjacency();
    let mut jv = vec![0.0; inst.n];
    step_inner(&adj, &inst.fields, params, &mut state.x, &mut state.v, &mut jv);
    if state.x.iter().any(|xi| !xi.is_finite()) {
        return Err(Error::Divergence { iteration: 1 });
    }
    Ok(())
}

/// Inverse-activation integral: F(u) = x0 * (u atanh u + ln(1 - u^2) / 2),
/// the antiderivative of g^{-1} for g(x) = tanh(x / x0).
pub fn activation_penalty(u: f64, x0: f64) -> Result<f64> {
    if u.abs() >= 1.0 {
        return Err(Error::InvalidParam(format!(
            "activation penalty needs |v| < 1, got {u}"
        )));
    }
    Ok(x0 * (u * u.atanh() + 0.5 * (1.0 - u * u).ln()))
}

/// Lyapunov value of an activation vector:
/// E = -1/2 v'Jv - sum (h + I_b) v + (1/tau) sum F(v_i).
pub fn lyapunov(inst: &IsingInstance, v: &[f64], params: &HTParams) -> Result<f64> {
    params.validate()?;
    if v.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: v.len(),
        });
    }
    let mut interaction = 0.0;
    for e in &inst.edges {
        interaction += e.2 * v[e.i()] * v[e.j()];
    }
    let mut total = -interaction;
    for (i, &vi) in v.iter().enumerate() {
        total -= (inst.fields[i] + params.bias) * vi;
        total += activation_penalty(vi, params.x0)? / params.tau;
    }
    Ok(total)
}

fn neumaier_add(sum: &mut f64, comp: &mut f64, term: f64) {
    let t = *sum + term;
    if sum.abs() >= term.abs() {
        *comp += (*sum - t) + term;
    } else {
        *comp += (term - t) + *sum;
    }
    *sum = t;
}

/// Lyapunov value evaluated from the internal state x rather than v.
/// Identical to [`lyapunov`] at v = tanh(x / x0) in exact arithmetic, but
/// stays accurate when amplitudes saturate: with u = x / x0 the penalty is
/// x0 * (v u - ln cosh u), and ln cosh u = |u| - ln 2 + ln(1 + e^(-2|u|))
/// avoids the cancellation that makes atanh(v) and ln(1 - v^2) noisy near
/// |v| = 1. Sums are compensated, so step-to-step differences along a
/// trajectory are trustworthy down to ~1e-13 even for large energies.
pub fn lyapunov_from_x(inst: &IsingInstance, x: &[f64], params: &HTParams) -> Result<f64> {
    params.validate()?;
    if x.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: x.len(),
        });
    }
    let v: Vec<f64> = x.iter().map(|&xi| (xi / params.x0).tanh()).collect();
    let (mut sum, mut comp) = (0.0, 0.0);
    for e in &inst.edges {
        neumaier_add(&mut sum, &mut comp, -e.2 * v[e.i()] * v[e.j()]);
    }
    for i in 0..inst.n {
        neumaier_add(&mut sum, &mut comp, -(inst.fields[i] + params.bias) * v[i]);
        let u = x[i] / params.x0;
        let ln_cosh = u.abs() - std::f64::consts::LN_2 + (-2.0 * u.abs()).exp().ln_1p();
        neumaier_add(
            &mut sum,
            &mut comp,
            params.x0 * (v[i] * u - ln_cosh) / params.tau,
        );
    }
    Ok(sum + comp)
}

/// The flow settles exponentially once trapped near a corner; below this
/// residual the sign readout can no longer change, so budget mode may stop.
const SETTLED_RESIDUAL: f64 = 1e-13;

/// Integrates from uniform random x in [-amp, amp] until the fixed-point
/// criterion or the budget; returns the sign readout, its energy, and a
/// trace. Bitwise deterministic in (instance, params, seed).
pub fn ht_run(
    inst: &IsingInstance,
    params: &HTParams,
    seed: u64,
) -> Result<(SpinConfig, f64, HTTrace)> {
    params.validate()?;
    let adj = inst.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = params.init_amplitude;
    let mut x: Vec<f64> = (0..inst.n)
        .map(|_| rng.gen_range(-amp..=amp))
        .collect();
    let mut v: Vec<f64> = x.iter().map(|&xi| (xi / params.x0).tanh()).collect();
    let mut jv = vec![0.0; inst.n];

    let mut energy_history = Vec::new();
    let mut proximity_history = Vec::new();
    let mut record = |iter: u64, v: &[f64]| -> Result<()> {
        if params.record_every > 0 && iter % params.record_every == 0 {
            let e = inst.energy(&SpinConfig::from_signs(v))?;
            energy_history.push((iter, e));
            if let Some(g) = params.ground_energy {
                if g != 0.0 {
                    proximity_history.push((iter, e / g));
                }
            }
        }
        Ok(())
    };
    record(0, &v)?;

    let mut converged = false;
    let mut iterations_run = 0;
    for iter in 1..=params.max_iters {
        let residual = step_inner(&adj, &inst.fields, params, &mut x, &mut v, &mut jv);
        iterations_run = iter;
        if !residual.is_finite() {
            return Err(Error::Divergence {
                iteration: iter as usize,
            });
        }
        record(iter, &v)?;
        if params.fixpoint_tol > 0.0 && residual < params.fixpoint_tol {
            converged = true;
            break;
        }
        if residual < SETTLED_RESIDUAL {
            converged = params.fixpoint_tol > 0.0;
            break;
        }
    }
    let spins = SpinConfig::from_signs(&v);
    let energy = inst.energy(&spins)?;
    Ok((
        spins,
        energy,
        HTTrace {
            x,
            v,
            energy_history,
            proximity_history,
            iterations_run,
            converged,
        },
    ))
}

/// Fraction of `runs` seeded restarts whose readout attains `ground_energy`.
pub fn ground_state_probability(
    inst: &IsingInstance,
    ground_energy: f64,
    runs: usize,
    params: &HTParams,
    seed: u64,
) -> Result<f64> {
    let (hits, total) = count_ground_hits(inst, ground_energy, runs, params, seed, None)?;
    debug_assert_eq!(total, runs);
    Ok(hits as f64 / runs as f64)
}

fn energy_matches(e: f64, ground: f64) -> bool {
    (e - ground).abs() <= 1e-9 * ground.abs().max(1.0)
}

/// Shared evaluator with an optional decision pair (lo_hits, hi_hits): stop
/// as soon as the hit count provably lands below lo_hits or above hi_hits.
fn count_ground_hits(
    inst: &IsingInstance,
    ground_energy: f64,
    runs: usize,
    params: &HTParams,
    seed: u64,
    decision: Option<(usize, usize)>,
) -> Result<(usize, usize)> {
    let mut hits = 0;
    for r in 0..runs {
        let run_seed = derive(seed, &[r as u64]);
        let (_, e, _) = ht_run(inst, params, run_seed)?;
        if energy_matches(e, ground_energy) {
            hits += 1;
        }
        if let Some((lo_hits, hi_hits)) = decision {
            if hits > hi_hits {
                return Ok((hits, r + 1));
            }
            if hits + (runs - r - 1) < lo_hits {
                return Ok((hits, r + 1));
            }
        }
    }
    Ok((hits, runs))
}

enum BandPosition {
    Below,
    Inside(f64),
    Above,
}

fn probe_band(
    inst: &IsingInstance,
    ground: f64,
    iters: u64,
    band: (f64, f64),
    runs: usize,
    params: &HTParams,
    seed: u64,
) -> Result<BandPosition> {
    let budgeted = params.with_budget(iters);
    let lo_hits = (band.0 * runs as f64).ceil() as usize;
    let hi_hits = (band.1 * runs as f64).floor() as usize;
    let (hits, done) =
        count_ground_hits(inst, ground, runs, &budgeted, seed, Some((lo_hits, hi_hits)))?;
    if done < runs {
        // early decision: the full count could only confirm it
        return Ok(if hits > hi_hits {
            BandPosition::Above
        } else {
            BandPosition::Below
        });
    }
    Ok(if hits < lo_hits {
        BandPosition::Below
    } else if hits > hi_hits {
        BandPosition::Above
    } else {
        BandPosition::Inside(hits as f64 / runs as f64)
    })
}

const ITERS_CEILING: u64 = 1 << 24;
const COLLAPSE_RESAMPLES: usize = 8;

/// Searches for an iteration budget whose ground-state probability over
/// `runs` restarts lands in `band`, by doubling from `start_iters` and then
/// bisecting. Measurement noise near a collapsed bracket is absorbed by
/// re-probing midpoints with fresh seed streams. Returns (iters, measured p).
pub fn iterations_for_probability(
    inst: &IsingInstance,
    ground_energy: f64,
    band: (f64, f64),
    runs: usize,
    params: &HTParams,
    seed: u64,
    start_iters: u64,
) -> Result<(u64, f64)> {
    if !(band.0 > 0.0 && band.0 < band.1 && band.1 <= 1.0) {
        return Err(Error::InvalidParam(format!(
            "probability band ({}, {}) must satisfy 0 < lo < hi <= 1",
            band.0, band.1
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidParam("runs must be >= 1".into()));
    }
    let mut eval = 0u64;
    let mut probe = |iters: u64| -> Result<BandPosition> {
        eval += 1;
        probe_band(
            inst,
            ground_energy,
            iters,
            band,
            runs,
            params,
            derive(seed, &[eval]),
        )
    };

    let mut lo = None; // largest budget measured below the band
    let mut iters = start_iters.max(2);
    let mut hi_it = loop {
        match probe(iters)? {
            BandPosition::Inside(p) => return Ok((iters, p)),
            BandPosition::Below => lo = Some(iters),
            BandPosition::Above => break iters,
        }
        if iters >= ITERS_CEILING {
            return Err(Error::BandUnreachable {
                lo: band.0,
                hi: band.1,
                ceiling: ITERS_CEILING,
            });
        }
        iters = (iters * 2).min(ITERS_CEILING);
    };
    // a budget above the band exists; walk down if doubling overshot at the
    // first probe
    let mut lo_it = match lo {
        Some(l) => l,
        None => {
            let mut l = hi_it / 2;
            loop {
                if l < 2 {
                    l = 1;
                    break;
                }
                match probe(l)? {
                    BandPosition::Inside(p) => return Ok((l, p)),
                    BandPosition::Below => break,
                    BandPosition::Above => {
                        hi_it = l;
                        l /= 2;
                    }
                }
            }
            l
        }
    };
    let mut resamples = 0;
    loop {
        if hi_it - lo_it <= 1 {
            // the bracket collapsed without an inside hit: measurement
            // noise straddles the band edge, so re-probe with fresh seeds
            resamples += 1;
            if resamples > COLLAPSE_RESAMPLES {
                return Err(Error::BandUnreachable {
                    lo: band.0,
                    hi: band.1,
                    ceiling: hi_it,
                });
            }
            for candidate in [hi_it, lo_it.max(2)] {
                if let BandPosition::Inside(p) = probe(candidate)? {
                    return Ok((candidate, p));
                }
            }
            lo_it = (lo_it.saturating_sub(lo_it / 8)).max(1);
            hi_it += (hi_it / 8).max(2);
            continue;
        }
        let mid = lo_it + (hi_it - lo_it) / 2;
        match probe(mid)? {
            BandPosition::Inside(p) => return Ok((mid, p)),
            BandPosition::Below => lo_it = mid,
            BandPosition::Above => hi_it = mid,
        }
    }
}
