//! Exact ground-state solvers: Gray-code exhaustive enumeration and (below)
//! branch-and-bound with admissible bounds, plus optimality-gap accounting.

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::instance::{IsingInstance, SpinConfig};

pub const BRUTE_FORCE_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    TimeLimit,
    Budget,
}

/// One lower-bound improvement event during a solve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GapSample {
    pub elapsed_s: f64,
    pub nodes: u64,
    pub gap: f64,
    pub best_energy: f64,
    pub lower_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub best_energy: f64,
    pub best_config: SpinConfig,
    pub lower_bound: f64,
    pub gap: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
    pub elapsed_s: f64,
    pub ground_degeneracy: Option<u64>,
    pub gap_trace: Vec<GapSample>,
    pub time_to_zero_gap: Option<f64>,
    pub nodes_to_zero_gap: Option<u64>,
}

/// (best - lower) / |best|; infinite when the bound is strictly below a
/// zero best.
pub fn optimality_gap(best_energy: f64, lower_bound: f64) -> Result<f64> {
    if lower_bound > best_energy {
        return Err(Error::BoundAboveBest {
            lower: lower_bound,
            best: best_energy,
        });
    }
    let num = best_energy - lower_bound;
    if num == 0.0 {
        Ok(0.0)
    } else if best_energy == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(num / best_energy.abs())
    }
}

/// Spin layout shared by the enumeration paths: when `fix_first` the first
/// spin is pinned to +1 and only the rest enumerate (global-flip symmetry).
struct EnumLayout {
    fix_first: bool,
    free: usize,
}

impl EnumLayout {
    fn of(inst: &IsingInstance) -> EnumLayout {
        let fix_first = !inst.has_fields() && inst.n > 1;
        EnumLayout {
            fix_first,
            free: if fix_first { inst.n - 1 } else { inst.n },
        }
    }

    fn spin_index(&self, bit: usize) -> usize {
        if self.fix_first {
            bit + 1
        } else {
            bit
        }
    }
}

fn config_from_bits(inst: &IsingInstance, layout: &EnumLayout, bits: u64) -> SpinConfig {
    let mut s = vec![1i8; inst.n];
    for b in 0..layout.free {
        if bits >> b & 1 == 1 {
            s[layout.spin_index(b)] = -1;
        }
    }
    SpinConfig::new(s).expect("entries are +-1")
}

/// All weights in {-1, +1} and integral fields: neighbour sums reduce to
/// popcounts over adjacency bitmasks, O(1) per Gray flip.
struct BitmaskPath {
    plus: Vec<u64>,
    minus: Vec<u64>,
    offset: Vec<i64>,
    fields: Vec<i64>,
}

impl BitmaskPath {
    fn build(inst: &IsingInstance) -> Option<BitmaskPath> {
        if inst.n > 64 {
            return None;
        }
        let mut plus = vec![0u64; inst.n];
        let mut minus = vec![0u64; inst.n];
        for e in &inst.edges {
            let (i, j) = (e.i(), e.j());
            if e.2 == 1.0 {
                plus[i] |= 1 << j;
                plus[j] |= 1 << i;
            } else if e.2 == -1.0 {
                minus[i] |= 1 << j;
                minus[j] |= 1 << i;
            } else {
                return None;
            }
        }
        let mut fields = Vec::with_capacity(inst.n);
        for &h in &inst.fields {
            if h.fract() != 0.0 || h.abs() > 1e15 {
                return None;
            }
            fields.push(h as i64);
        }
        let offset = (0..inst.n)
            .map(|i| minus[i].count_ones() as i64 - plus[i].count_ones() as i64)
            .collect();
        Some(BitmaskPath {
            plus,
            minus,
            offset,
            fields,
        })
    }

    /// Local field L_p = sum_j w_pj s_j for the +1-bit convention.
    #[inline]
    fn local(&self, p: usize, up: u64) -> i64 {
        let pp = (self.plus[p] & up).count_ones() as i64;
        let mm = (self.minus[p] & up).count_ones() as i64;
        2 * (pp - mm) + self.offset[p]
    }
}

/// Exhaustive minimum by Gray-code enumeration with incremental updates.
/// Exact integer arithmetic whenever weights and fields are integral.
pub fn brute_force(inst: &IsingInstance, count_degeneracy: bool) -> Result<SolveReport> {
    if inst.n > BRUTE_FORCE_CAP {
        return Err(Error::SizeCap {
            n: inst.n,
            cap: BRUTE_FORCE_CAP,
        });
    }
    let started = Instant::now();
    let layout = EnumLayout::of(inst);
    let states: u64 = 1 << layout.free;

    let (best_bits, best_energy, mut degeneracy) = if let Some(masks) = BitmaskPath::build(inst) {
        enumerate_bitmask(inst, &layout, &masks, count_degeneracy)
    } else if inst.is_integral() {
        enumerate_incremental(inst, &layout, count_degeneracy, IntArith)
    } else {
        enumerate_incremental(inst, &layout, count_degeneracy, FloatArith)
    };

    if layout.fix_first {
        // each minimizer pairs with its global flip
        degeneracy = degeneracy.map(|d| 2 * d);
    }
    let best_config = config_from_bits(inst, &layout, best_bits);
    // the incremental energy is re-derived from the configuration so float
    // drift cannot leak into the report
    let best_energy_exact = inst.energy(&best_config)?;
    debug_assert!((best_energy - best_energy_exact).abs() <= 1e-6 * best_energy.abs().max(1.0));
    let elapsed = started.elapsed().as_secs_f64();
    Ok(SolveReport {
        best_energy: best_energy_exact,
        best_config,
        lower_bound: best_energy_exact,
        gap: 0.0,
        status: SolveStatus::Optimal,
        nodes_explored: states,
        elapsed_s: elapsed,
        ground_degeneracy: degeneracy,
        gap_trace: vec![GapSample {
            elapsed_s: elapsed,
            nodes: states,
            gap: 0.0,
            best_energy: best_energy_exact,
            lower_bound: best_energy_exact,
        }],
        time_to_zero_gap: Some(elapsed),
        nodes_to_zero_gap: Some(states),
    })
}

fn enumerate_bitmask(
    inst: &IsingInstance,
    layout: &EnumLayout,
    masks: &BitmaskPath,
    count_degeneracy: bool,
) -> (u64, f64, Option<u64>) {
    // state: bit set => spin +1; enumeration flips bits of the free block
    let all_up: u64 = if inst.n == 64 {
        u64::MAX
    } else {
        (1 << inst.n) - 1
    };
    let mut up = all_up;
    let mut energy: i64 = {
        let mut e = 0i64;
        for edge in &inst.edges {
            e -= edge.2 as i64;
        }
        e - masks.fields.iter().sum::<i64>()
    };
    let mut best = energy;
    let mut best_bits = 0u64;
    let mut count = 1u64;
    let states: u64 = 1 << layout.free;
    for g in 1..states {
        let p = layout.spin_index(g.trailing_zeros() as usize);
        let s_old = if up >> p & 1 == 1 { 1 } else { -1 };
        energy += 2 * s_old * (masks.local(p, up) + masks.fields[p]);
        up ^= 1 << p;
        if energy < best {
            best = energy;
            best_bits = g ^ (g >> 1);
            count = 1;
        } else if count_degeneracy && energy == best {
            count += 1;
        }
    }
    (
        best_bits,
        best as f64,
        count_degeneracy.then_some(count),
    )
}

trait Arith {
    type Num: Copy + PartialOrd + PartialEq;
    fn weight(w: f64) -> Self::Num;
    fn zero() -> Self::Num;
    fn add(a: Self::Num, b: Self::Num) -> Self::Num;
    fn sub(a: Self::Num, b: Self::Num) -> Self::Num;
    fn twice(a: Self::Num) -> Self::Num;
    fn neg(a: Self::Num) -> Self::Num;
    fn to_f64(a: Self::Num) -> f64;
    const RESYNC: bool;
}

struct IntArith;
impl Arith for IntArith {
    type Num = i64;
    fn weight(w: f64) -> i64 {
        w as i64
    }
    fn zero() -> i64 {
        0
    }
    fn add(a: i64, b: i64) -> i64 {
        a + b
    }
    fn sub(a: i64, b: i64) -> i64 {
        a - b
    }
    fn twice(a: i64) -> i64 {
        2 * a
    }
    fn neg(a: i64) -> i64 {
        -a
    }
    fn to_f64(a: i64) -> f64 {
        a as f64
    }
    const RESYNC: bool = false;
}

struct FloatArith;
impl Arith for FloatArith {
    type Num = f64;
    fn weight(w: f64) -> f64 {
        w
    }
    fn zero() -> f64 {
        0.0
    }
    fn add(a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(a: f64, b: f64) -> f64 {
        a - b
    }
    fn twice(a: f64) -> f64 {
        2.0 * a
    }
    fn neg(a: f64) -> f64 {
        -a
    }
    fn to_f64(a: f64) -> f64 {
        a
    }
    const RESYNC: bool = true;
}

fn enumerate_incremental<A: Arith>(
    inst: &IsingInstance,
    layout: &EnumLayout,
    count_degeneracy: bool,
    _: A,
) -> (u64, f64, Option<u64>) {
    let adj = inst.adjacency();
    let n = inst.n;
    let mut spins = vec![1i8; n];
    let fields: Vec<A::Num> = inst.fields.iter().map(|&h| A::weight(h)).collect();
    let recompute = |spins: &[i8]| -> (Vec<A::Num>, A::Num) {
        let mut local = vec![A::zero(); n];
        for (i, l) in local.iter_mut().enumerate() {
            for &(j, w) in adj.neighbors(i) {
                let term = A::weight(w);
                *l = if spins[j as usize] > 0 {
                    A::add(*l, term)
                } else {
                    A::sub(*l, term)
                };
            }
        }
        let mut e = A::zero();
        for edge in &inst.edges {
            let term = A::weight(edge.2);
            let aligned = spins[edge.i()] == spins[edge.j()];
            e = if aligned { A::sub(e, term) } else { A::add(e, term) };
        }
        for (i, h) in fields.iter().enumerate() {
            e = if spins[i] > 0 {
                A::sub(e, *h)
            } else {
                A::add(e, *h)
            };
        }
        (local, e)
    };
    let (mut local, mut energy) = recompute(&spins);
    let mut best = energy;
    let mut best_bits = 0u64;
    let mut count = 1u64;
    let states: u64 = 1 << layout.free;
    for g in 1..states {
        let p = layout.spin_index(g.trailing_zeros() as usize);
        let delta = A::add(local[p], fields[p]);
        let delta = if spins[p] > 0 { delta } else { A::neg(delta) };
        energy = A::add(energy, A::twice(delta));
        spins[p] = -spins[p];
        for &(q, w) in adj.neighbors(p) {
            let step = A::twice(A::weight(w));
            let q = q as usize;
            local[q] = if spins[p] > 0 {
                A::add(local[q], step)
            } else {
                A::sub(local[q], step)
            };
        }
        if A::RESYNC && g & 0xf_ffff == 0 {
            let (l2, e2) = recompute(&spins);
            local = l2;
            energy = e2;
        }
        if energy < best {
            best = energy;
            best_bits = g ^ (g >> 1);
            count = 1;
        } else if count_degeneracy && energy == best {
            count += 1;
        }
    }
    (
        best_bits,
        A::to_f64(best),
        count_degeneracy.then_some(count),
    )
}

// ---------------------------------------------------------------------------
// branch and bound

/// Termination controls for [`branch_and_bound`]. The node budget is the
/// deterministic alternative to wall-clock limits: runs with the same budget
/// reproduce bit-identically.
#[derive(Debug, Clone, Copy)]
pub struct BnbOptions {
    pub time_limit_s: Option<f64>,
    pub node_budget: Option<u64>,
    /// Stop once (best - lower) / |best| falls to this value; 0 proves the
    /// optimum.
    pub target_gap: f64,
    /// Strengthen bounds by packing edge-disjoint frustrated cycles over the
    /// free vertices plus one terminal vertex that contracts the fixed
    /// prefix. A cycle whose signed edges cannot all be satisfied forfeits
    /// at least twice its smallest coupling magnitude; disjoint cycles add.
    /// Handles arbitrary weights and fields. Costs O(edges) per node, so it
    /// is off by default and worth enabling on sparse frustrated graphs.
    pub odd_cycle_bound: bool,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            time_limit_s: None,
            node_budget: None,
            target_gap: 0.0,
            odd_cycle_bound: false,
        }
    }
}

/// One pruning decision, kept for admissibility replay.
struct PruneRecord {
    fixed: Vec<(u32, i8)>,
    lb: f64,
}

/// Result of replaying every pruning decision of a solve against exhaustive
/// enumeration of the pruned subcubes.
#[derive(Debug, Clone, Copy)]
pub struct PruneAudit {
    pub prunes_replayed: usize,
    /// Prunes whose subcube contains a state below the claimed bound.
    pub violations: usize,
    /// Smallest (subcube minimum - claimed bound); admissible bounds keep
    /// this non-negative up to float noise.
    pub worst_slack: f64,
}

const TIME_CHECK_MASK: u64 = 1023;
const SUFFIX_SPECTRA_CAP: usize = 256;
const SUFFIX_SPECTRA_STRIDE: usize = 8;

struct Bnb<'a> {
    inst: &'a IsingInstance,
    adj: crate::instance::Adjacency,
    order: Vec<usize>,
    pos: Vec<usize>,
    /// Interaction of each free spin with the fixed prefix plus its field.
    c: Vec<f64>,
    s: Vec<i8>,
    h_fixed: f64,
    sum_abs_c: f64,
    w_free: f64,
    undo: Vec<(u32, f64)>,
    /// Certified upper bound on lambda_max of the free-free submatrix at
    /// each depth; +inf disables the spectral term.
    level_lambda: Vec<f64>,
    integral: bool,
    parity_ref: i64,
    best: f64,
    best_config: Vec<i8>,
    lower: f64,
    nodes: u64,
    start: Instant,
    time_limit_s: Option<f64>,
    node_budget: Option<u64>,
    target_gap: f64,
    /// Running minimum over bounds of unexplored sibling subtrees.
    open_min: Vec<f64>,
    trace: Vec<GapSample>,
    next_sample: u64,
    time_to_zero_gap: Option<f64>,
    nodes_to_zero_gap: Option<u64>,
    halted: Option<SolveStatus>,
    prune_log: Option<Vec<PruneRecord>>,
    cycles: Option<CyclePacker>,
}

/// Greedy packing of edge-disjoint frustrated cycles in the reduced problem
/// at a node: free vertices, their remaining couplings, and one virtual
/// terminal standing for the whole fixed prefix (pinned +1, attached to
/// each free spin q by a weight-c_q edge, which also carries the field). A
/// cycle is frustrated when it has an odd number of negative weights; no
/// assignment satisfies all its couplings, so each packed cycle raises the
/// subproblem minimum by 2 min |w| over its edges.
struct CyclePacker {
    /// Per vertex: (neighbor, edge id); the terminal's edges are implicit.
    elist: Vec<Vec<(u32, u32)>>,
    /// |w| and sign per coupling edge; terminal edges read c live instead.
    mag: Vec<f64>,
    neg: Vec<bool>,
    // stamped scratch; a slot is live when its stamp equals the current
    // generation, so no clearing between calls
    consumed: Vec<u64>,
    visited: Vec<u64>,
    node_gen: u64,
    bfs_gen: u64,
    parity: Vec<bool>,
    parent: Vec<(u32, u32)>,
    tdepth: Vec<u32>,
    tree: Vec<u32>,
    queue: Vec<u32>,
}

const NO_EDGE: u32 = u32::MAX;

impl CyclePacker {
    fn for_instance(inst: &IsingInstance) -> Option<CyclePacker> {
        if inst.edges.is_empty() {
            return None;
        }
        let n = inst.n;
        let m = inst.edges.len();
        let mut elist = vec![Vec::new(); n];
        for (id, e) in inst.edges.iter().enumerate() {
            elist[e.0 as usize].push((e.1, id as u32));
            elist[e.1 as usize].push((e.0, id as u32));
        }
        Some(CyclePacker {
            elist,
            mag: inst.edges.iter().map(|e| e.2.abs()).collect(),
            neg: inst.edges.iter().map(|e| e.2 < 0.0).collect(),
            // edge ids m..m+n are the terminal edges, one per vertex
            consumed: vec![0; m + n],
            visited: vec![0; n + 1],
            node_gen: 0,
            bfs_gen: 0,
            parity: vec![false; n + 1],
            parent: vec![(0, NO_EDGE); n + 1],
            tdepth: vec![0; n + 1],
            tree: vec![0; n + 1],
            queue: Vec::with_capacity(n + 1),
        })
    }

    fn edge_mag(&self, eid: usize, c: &[f64]) -> f64 {
        let m = self.mag.len();
        if eid < m {
            self.mag[eid]
        } else {
            c[eid - m].abs()
        }
    }

    fn edge_neg(&self, eid: usize, c: &[f64]) -> bool {
        let m = self.mag.len();
        if eid < m {
            self.neg[eid]
        } else {
            c[eid - m] < 0.0
        }
    }

    /// Total certified penalty: the sum of min |w| over the frustrated
    /// cycles packed (the caller doubles it). Greedy: BFS forests over the
    /// free subgraph plus the terminal detect a frustrated cycle, retire its
    /// edges, repeat until none are found.
    fn pack(
        &mut self,
        order: &[usize],
        pos: &[usize],
        depth: usize,
        c: &[f64],
    ) -> f64 {
        self.node_gen += 1;
        let n = self.elist.len();
        let m = self.mag.len();
        let t = n; // virtual terminal vertex
        let mut credit = 0.0;
        'restart: loop {
            self.bfs_gen += 1;
            // the terminal roots the first tree so boundary cycles close
            // early; remaining components root at free vertices
            for root_slot in 0..=(order.len() - depth) {
                let root = if root_slot == 0 {
                    t
                } else {
                    order[depth + root_slot - 1]
                };
                if self.visited[root] == self.bfs_gen {
                    continue;
                }
                self.visited[root] = self.bfs_gen;
                self.parity[root] = false;
                self.parent[root] = (root as u32, NO_EDGE);
                self.tdepth[root] = 0;
                self.tree[root] = root as u32;
                self.queue.clear();
                self.queue.push(root as u32);
                let mut head = 0;
                while head < self.queue.len() {
                    let v = self.queue[head] as usize;
                    head += 1;
                    let deg = if v == t {
                        order.len() - depth
                    } else {
                        self.elist[v].len() + 1
                    };
                    for k in 0..deg {
                        // neighbors: coupling edges first, then the
                        // terminal edge; the terminal sees every free spin
                        let (q, eid) = if v == t {
                            let q = order[depth + k];
                            (q, m + q)
                        } else if k < self.elist[v].len() {
                            let (q, eid) = self.elist[v][k];
                            (q as usize, eid as usize)
                        } else {
                            (t, m + v)
                        };
                        if self.consumed[eid] == self.node_gen
                            || eid as u32 == self.parent[v].1
                            || (q != t && pos[q] < depth)
                            || self.edge_mag(eid, c) == 0.0
                        {
                            continue;
                        }
                        let step = self.edge_neg(eid, c);
                        if self.visited[q] != self.bfs_gen {
                            self.visited[q] = self.bfs_gen;
                            self.parity[q] = self.parity[v] ^ step;
                            self.parent[q] = (v as u32, eid as u32);
                            self.tdepth[q] = self.tdepth[v] + 1;
                            self.tree[q] = self.tree[v];
                            self.queue.push(q as u32);
                        } else if self.tree[q] == self.tree[v]
                            && self.parity[q] == self.parity[v] ^ step
                        {
                            // even total sign flips around the closed walk
                            // would mean satisfiable; this one is odd
                        } else if self.tree[q] == self.tree[v] {
                            credit += self.retire_cycle(v, q, eid, c);
                            continue 'restart;
                        }
                    }
                }
            }
            return credit;
        }
    }

    /// Consumes the closing edge and both tree paths up to their lowest
    /// common ancestor (one frustrated cycle) and returns its min |w|.
    fn retire_cycle(&mut self, u: usize, v: usize, closing: usize, c: &[f64]) -> f64 {
        let mut low = self.edge_mag(closing, c);
        self.consumed[closing] = self.node_gen;
        let mut take = |packer: &mut Self, x: usize| -> usize {
            let (p, e) = packer.parent[x];
            packer.consumed[e as usize] = packer.node_gen;
            let w = packer.edge_mag(e as usize, c);
            if w < low {
                low = w;
            }
            p as usize
        };
        let (mut a, mut b) = (u, v);
        while self.tdepth[a] > self.tdepth[b] {
            a = take(self, a);
        }
        while self.tdepth[b] > self.tdepth[a] {
            b = take(self, b);
        }
        while a != b {
            a = take(self, a);
            b = take(self, b);
        }
        low
    }
}

impl<'a> Bnb<'a> {
    fn new(inst: &'a IsingInstance, opts: &BnbOptions, log_prunes: bool) -> Bnb<'a> {
        let n = inst.n;
        let adj = inst.adjacency();
        // static connected order: greedily take the spin with the largest
        // total |coupling| into the prefix (weighted degree breaks ties), so
        // every fixed spin tightens the interval term of its free neighbors
        let wd: Vec<f64> = (0..n)
            .map(|i| {
                adj.neighbors(i).iter().map(|&(_, w)| w.abs()).sum::<f64>()
                    + inst.fields[i].abs()
            })
            .collect();
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut pos = vec![usize::MAX; n];
        let mut attach = vec![0.0f64; n];
        for _ in 0..n {
            let mut pick = usize::MAX;
            for q in 0..n {
                if pos[q] != usize::MAX {
                    continue;
                }
                if pick == usize::MAX
                    || (attach[q], wd[q]) > (attach[pick], wd[pick])
                {
                    pick = q;
                }
            }
            pos[pick] = order.len();
            order.push(pick);
            for &(q, w) in adj.neighbors(pick) {
                attach[q as usize] += w.abs();
            }
        }
        let c: Vec<f64> = inst.fields.clone();
        let sum_abs_c = c.iter().map(|x| x.abs()).sum();
        let w_free = inst.edges.iter().map(|e| e.2.abs()).sum();
        let integral = inst.is_integral();
        let all_plus = SpinConfig(vec![1i8; n]);
        let parity_ref = inst.energy(&all_plus).expect("valid config") as i64;
        let level_lambda = suffix_lambda_bounds(inst, &adj, &order, &pos);
        let cycles = if opts.odd_cycle_bound {
            CyclePacker::for_instance(inst)
        } else {
            None
        };
        Bnb {
            inst,
            adj,
            order,
            pos,
            c,
            s: vec![1i8; n],
            h_fixed: 0.0,
            sum_abs_c,
            w_free,
            undo: Vec::with_capacity(4 * n),
            level_lambda,
            integral,
            parity_ref,
            best: f64::INFINITY,
            best_config: vec![1i8; n],
            lower: f64::NEG_INFINITY,
            nodes: 0,
            start: Instant::now(),
            time_limit_s: opts.time_limit_s,
            node_budget: opts.node_budget,
            target_gap: opts.target_gap,
            open_min: Vec::with_capacity(n + 1),
            trace: Vec::new(),
            next_sample: 1,
            time_to_zero_gap: None,
            nodes_to_zero_gap: None,
            halted: None,
            prune_log: if log_prunes { Some(Vec::new()) } else { None },
            cycles,
        }
    }

    fn offer(&mut self, cand: &[i8], energy: f64) {
        if energy < self.best {
            self.best = energy;
            self.best_config.copy_from_slice(cand);
        }
    }

    fn round_up_to_parity(&self, x: f64) -> f64 {
        let mut k = x.ceil() as i64;
        if (k - self.parity_ref).rem_euclid(2) != 0 {
            k += 1;
        }
        k as f64
    }

    fn node_bound(&mut self, depth: usize) -> f64 {
        let mut term3 = -self.w_free;
        let lam = self.level_lambda[depth];
        if lam.is_finite() {
            let spectral = -0.5 * lam * (self.inst.n - depth) as f64;
            if spectral > term3 {
                term3 = spectral;
            }
        }
        let mut tail = -self.sum_abs_c + term3;
        if let Some(packer) = &mut self.cycles {
            let credit = packer.pack(&self.order, &self.pos, depth, &self.c);
            // frustrated-cycle penalties raise the all-satisfied baseline
            let cyc = -self.sum_abs_c - self.w_free + 2.0 * credit;
            if cyc > tail {
                tail = cyc;
            }
        }
        let lb = self.h_fixed + tail;
        if self.integral {
            self.round_up_to_parity(lb)
        } else {
            lb
        }
    }

    fn open_floor(&self) -> f64 {
        self.open_min.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Updates the monotone global lower bound given the bound of the
    /// subtree currently being expanded, then records zero-gap and trace
    /// events and evaluates every stop condition.
    fn checkpoint(&mut self, current_subtree_lb: f64) {
        let global = self
            .best
            .min(self.open_floor().min(current_subtree_lb));
        if global > self.lower {
            self.lower = global;
        }
        let gap = gap_of(self.best, self.lower);
        if gap == 0.0 && self.time_to_zero_gap.is_none() {
            self.time_to_zero_gap = Some(self.start.elapsed().as_secs_f64());
            self.nodes_to_zero_gap = Some(self.nodes);
        }
        if self.nodes >= self.next_sample {
            self.sample(gap);
            while self.next_sample <= self.nodes {
                self.next_sample *= 2;
            }
        }
        if gap <= self.target_gap {
            self.halted = Some(SolveStatus::Optimal);
            return;
        }
        if let Some(budget) = self.node_budget {
            if self.nodes >= budget {
                self.halted = Some(SolveStatus::Budget);
                return;
            }
        }
        if let Some(limit) = self.time_limit_s {
            if self.nodes & TIME_CHECK_MASK == 0
                && self.start.elapsed().as_secs_f64() >= limit
            {
                self.halted = Some(SolveStatus::TimeLimit);
            }
        }
    }

    fn sample(&mut self, gap: f64) {
        self.trace.push(GapSample {
            elapsed_s: self.start.elapsed().as_secs_f64(),
            nodes: self.nodes,
            gap,
            best_energy: self.best,
            lower_bound: self.lower,
        });
    }

    fn fix(&mut self, p: usize, depth: usize, sigma: i8) {
        let sf = sigma as f64;
        self.h_fixed -= sf * self.c[p];
        self.sum_abs_c -= self.c[p].abs();
        self.s[p] = sigma;
        for k in 0..self.adj.neighbors(p).len() {
            let (q, w) = self.adj.neighbors(p)[k];
            let q = q as usize;
            if self.pos[q] > depth {
                self.undo.push((q as u32, self.c[q]));
                self.w_free -= w.abs();
                self.sum_abs_c -= self.c[q].abs();
                self.c[q] += w * sf;
                self.sum_abs_c += self.c[q].abs();
            }
        }
    }

    fn descend(&mut self, depth: usize, p: usize, sigma: i8) {
        let mark = self.undo.len();
        let saved = (self.h_fixed, self.sum_abs_c, self.w_free);
        self.fix(p, depth, sigma);
        self.solve(depth + 1);
        while self.undo.len() > mark {
            let (q, old) = self.undo.pop().expect("marked");
            self.c[q as usize] = old;
        }
        (self.h_fixed, self.sum_abs_c, self.w_free) = saved;
    }

    fn solve(&mut self, depth: usize) {
        if self.halted.is_some() {
            return;
        }
        self.nodes += 1;
        if depth == self.inst.n {
            let energy = self.h_fixed;
            if energy < self.best {
                self.best = energy;
                self.best_config.copy_from_slice(&self.s);
            }
            self.checkpoint(energy);
            return;
        }
        let lb = self.node_bound(depth);
        self.checkpoint(lb);
        if self.halted.is_some() {
            return;
        }
        if lb >= self.best {
            if let Some(log) = &mut self.prune_log {
                let fixed = self.order[..depth]
                    .iter()
                    .map(|&q| (q as u32, self.s[q]))
                    .collect();
                log.push(PruneRecord { fixed, lb });
            }
            return;
        }
        let p = self.order[depth];
        let first: i8 = if self.c[p] >= 0.0 { 1 } else { -1 };
        // global spin-flip symmetry: explore a single root branch
        let single_branch = depth == 0 && !self.inst.has_fields();
        if single_branch {
            self.descend(depth, p, 1);
            return;
        }
        self.open_min
            .push(self.open_floor().min(lb));
        self.descend(depth, p, first);
        self.open_min.pop();
        if self.halted.is_none() {
            self.descend(depth, p, -first);
        }
    }

    fn into_report(mut self, status_if_done: SolveStatus) -> SolveReport {
        let exhausted = self.halted.is_none() && status_if_done == SolveStatus::Optimal;
        let status = self.halted.unwrap_or(status_if_done);
        if exhausted {
            // the whole cube was enumerated or pruned against the incumbent
            self.lower = self.best;
        }
        if self.lower > self.best {
            self.lower = self.best;
        }
        let gap = gap_of(self.best, self.lower);
        if gap == 0.0 && self.time_to_zero_gap.is_none() {
            self.time_to_zero_gap = Some(self.start.elapsed().as_secs_f64());
            self.nodes_to_zero_gap = Some(self.nodes);
        }
        self.sample(gap);
        SolveReport {
            best_energy: self.best,
            best_config: SpinConfig(self.best_config.clone()),
            lower_bound: self.lower,
            gap,
            status,
            nodes_explored: self.nodes,
            elapsed_s: self.start.elapsed().as_secs_f64(),
            ground_degeneracy: None,
            gap_trace: self.trace,
            time_to_zero_gap: self.time_to_zero_gap,
            nodes_to_zero_gap: self.nodes_to_zero_gap,
        }
    }
}

/// (best - lower) / |best| with the conventions of [`optimality_gap`], but
/// total: clamps bound noise instead of erroring.
fn gap_of(best: f64, lower: f64) -> f64 {
    if !best.is_finite() || !lower.is_finite() {
        return f64::INFINITY;
    }
    let num = (best - lower).max(0.0);
    if num == 0.0 {
        0.0
    } else if best == 0.0 {
        f64::INFINITY
    } else {
        num / best.abs()
    }
}

/// Certified upper bounds on lambda_max of the free-free coupling submatrix
/// per depth, computed on suffix principal submatrices every few levels.
/// Interlacing makes a shallower level's value valid for all deeper ones.
fn suffix_lambda_bounds(
    inst: &IsingInstance,
    adj: &crate::instance::Adjacency,
    order: &[usize],
    pos: &[usize],
) -> Vec<f64> {
    let n = inst.n;
    let mut lam = vec![f64::INFINITY; n + 1];
    if n > SUFFIX_SPECTRA_CAP || n < 3 {
        return lam;
    }
    let mut current = f64::INFINITY;
    for start in (0..n).step_by(SUFFIX_SPECTRA_STRIDE) {
        let k = n - start;
        if k < 3 {
            break;
        }
        let mut dense = vec![0.0f64; k * k];
        for a in 0..k {
            let p = order[start + a];
            for &(q, w) in adj.neighbors(p) {
                let q = q as usize;
                if pos[q] >= start {
                    dense[a * k + (pos[q] - start)] = w;
                }
            }
        }
        if let Ok((top, err)) = crate::spectral::dense_lambda_max(&dense, k) {
            let certified = top + err + 1e-12 * top.abs().max(1.0);
            current = if current.is_finite() {
                current.min(certified)
            } else {
                certified
            };
        }
        let stop = (start + SUFFIX_SPECTRA_STRIDE).min(n);
        for d in start..stop {
            lam[d] = current;
        }
    }
    // deeper levels inherit the last certified suffix bound
    let mut carry = f64::INFINITY;
    for d in 0..=n {
        if lam[d].is_finite() {
            carry = lam[d];
        } else if carry.is_finite() {
            lam[d] = carry;
        }
    }
    lam
}

/// Greedy single-flip descent to a local minimum; returns the final energy.
fn one_opt_polish(inst: &IsingInstance, adj: &crate::instance::Adjacency, s: &mut [i8]) -> f64 {
    loop {
        let mut improved = false;
        for p in 0..inst.n {
            let mut local = inst.fields[p];
            for &(q, w) in adj.neighbors(p) {
                local += w * s[q as usize] as f64;
            }
            // flipping p changes the energy by 2 s_p local
            if 2.0 * s[p] as f64 * local < -1e-12 {
                s[p] = -s[p];
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    inst.energy(&SpinConfig(s.to_vec())).expect("valid config")
}

/// Sign pattern of a top eigenvector, mapped back through the auxiliary
/// spin when fields had to be absorbed.
fn spectral_candidate(inst: &IsingInstance) -> Option<Vec<i8>> {
    let absorbed_store;
    let (work, has_aux) = if inst.has_fields() {
        absorbed_store = inst.absorb_fields();
        (&absorbed_store, true)
    } else {
        (inst, false)
    };
    let top = crate::spectral::top_eigenspace(work).ok()?;
    let v = top.basis.first()?;
    let mut signs: Vec<i8> = v.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect();
    if has_aux {
        if signs[0] < 0 {
            for s in signs.iter_mut() {
                *s = -*s;
            }
        }
        signs.remove(0);
    }
    Some(signs)
}

const INCUMBENT_SEED: u64 = 0x62_6e_62_5f_73_65_65;

/// Depth-first branch and bound over spin assignments in decreasing
/// weighted-degree order, exploring the locally better child first.
///
/// Node bound: fixed-pair energy, minus the attainable magnitude of each
/// free spin's interaction with the fixed prefix and its field, plus the
/// tighter of the free-free interval bound -sum|w| and the spectral bound
/// -(|free|/2) lambda_max over the free-free submatrix (at the root this is
/// the whole-matrix bound -(n/2) lambda_max - sum|h|). The incumbent starts
/// from the top-eigenvector sign pattern and one analogue-dynamics run, both
/// polished by single-flip descent.
///
/// Stops at gap <= target_gap (status `Optimal`), or reports truncation via
/// `TimeLimit`/`Budget`. A zero time limit skips the search and reports the
/// incumbent against the root bound.
pub fn branch_and_bound(inst: &IsingInstance, opts: &BnbOptions) -> Result<SolveReport> {
    Ok(run_bnb(inst, opts, false)?.0)
}

/// [`branch_and_bound`] with every pruning decision replayed against
/// exhaustive enumeration of its subcube. Capped at n <= 24.
pub fn branch_and_bound_audited(
    inst: &IsingInstance,
    opts: &BnbOptions,
) -> Result<(SolveReport, PruneAudit)> {
    if inst.n > 24 {
        return Err(Error::SizeCap { n: inst.n, cap: 24 });
    }
    let (report, log) = run_bnb(inst, opts, true)?;
    let log = log.expect("prune log requested");
    let scale = report.best_energy.abs().max(1.0);
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    for rec in &log {
        let submin = pruned_subcube_minimum(inst, &rec.fixed);
        let slack = submin - rec.lb;
        worst_slack = worst_slack.min(slack);
        if slack < -1e-9 * scale {
            violations += 1;
        }
    }
    Ok((
        report,
        PruneAudit {
            prunes_replayed: log.len(),
            violations,
            worst_slack: if log.is_empty() { 0.0 } else { worst_slack },
        },
    ))
}

fn run_bnb(
    inst: &IsingInstance,
    opts: &BnbOptions,
    log_prunes: bool,
) -> Result<(SolveReport, Option<Vec<PruneRecord>>)> {
    if opts.target_gap < 0.0 {
        return Err(Error::InvalidParam("target_gap must be >= 0".into()));
    }
    let mut bnb = Bnb::new(inst, opts, log_prunes);

    // incumbent: all-plus, top-eigenvector pattern, one analogue run, each
    // polished by single-flip descent
    let mut cand = vec![1i8; inst.n];
    let e = one_opt_polish(inst, &bnb.adj, &mut cand);
    bnb.offer(&cand, e);
    if let Some(mut cand) = spectral_candidate(inst) {
        let e = one_opt_polish(inst, &bnb.adj, &mut cand);
        bnb.offer(&cand, e);
    }
    let ht_params = crate::hopfield::HTParams {
        max_iters: 400,
        ..Default::default()
    };
    if let Ok((spins, _, _)) = crate::hopfield::ht_run(inst, &ht_params, INCUMBENT_SEED) {
        let mut cand = spins.0;
        let e = one_opt_polish(inst, &bnb.adj, &mut cand);
        bnb.offer(&cand, e);
    }

    let root_lb = bnb.node_bound(0);
    bnb.lower = root_lb.min(bnb.best);
    let mut fallback = SolveStatus::Optimal;
    if gap_of(bnb.best, bnb.lower) <= opts.target_gap {
        bnb.halted = Some(SolveStatus::Optimal);
    } else if opts.time_limit_s == Some(0.0) {
        // skip the search: incumbent reported against the root bound
        fallback = SolveStatus::TimeLimit;
    } else {
        bnb.solve(0);
    }
    let log = bnb.prune_log.take();
    let report = bnb.into_report(fallback);
    Ok((report, log))
}

/// Exhaustive minimum over all completions of a fixed partial assignment.
fn pruned_subcube_minimum(inst: &IsingInstance, fixed: &[(u32, i8)]) -> f64 {
    let mut s = vec![0i8; inst.n];
    let mut free: Vec<usize> = Vec::new();
    for (q, sigma) in fixed {
        s[*q as usize] = *sigma;
    }
    for i in 0..inst.n {
        if s[i] == 0 {
            free.push(i);
        }
    }
    let mut best = f64::INFINITY;
    for bits in 0u64..(1u64 << free.len()) {
        for (b, &i) in free.iter().enumerate() {
            s[i] = if bits >> b & 1 == 1 { -1 } else { 1 };
        }
        let e = inst
            .energy(&SpinConfig(s.clone()))
            .expect("valid completion");
        best = best.min(e);
    }
    best
}
