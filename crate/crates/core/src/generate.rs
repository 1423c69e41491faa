//! Instance generators: structured ladders and circulants, random regular
//! graphs, dense spin glasses, gauged ferromagnets, lattices, bipartite-cell
//! hardware graphs, and degree-preserving rewiring between them.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::instance::{Edge, IsingInstance, Meta, SpinConfig};
use crate::planar::is_planar;

/// Coupling weight distribution. Unweighted means antiferromagnetic w = -1
/// on every edge (the MaxCut convention).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Dist {
    Unweighted,
    Bimodal,
    Gaussian { mean: f64, variance: f64 },
}

impl Dist {
    pub fn validate(&self) -> Result<()> {
        if let Dist::Gaussian { mean, variance } = self {
            if !mean.is_finite() || !variance.is_finite() || *variance <= 0.0 {
                return Err(Error::InvalidParam(format!(
                    "gaussian({mean}, {variance}) needs finite mean and positive variance"
                )));
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Dist::Unweighted => -1.0,
            Dist::Bimodal => {
                if rng.gen_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            Dist::Gaussian { mean, variance } => {
                let normal = Normal::new(mean, variance.sqrt()).expect("validated parameters");
                loop {
                    let x: f64 = normal.sample(rng);
                    // zero weights are unstorable; measure-zero event
                    if x != 0.0 && x.is_finite() {
                        return x;
                    }
                }
            }
        }
    }

    /// Sign sample for planted-state entries; sign(0) = +1.
    fn sample_sign<R: Rng>(&self, rng: &mut R) -> i8 {
        match *self {
            Dist::Unweighted => 1,
            Dist::Bimodal => {
                if rng.gen_bool(0.5) {
                    1
                } else {
                    -1
                }
            }
            Dist::Gaussian { .. } => {
                if self.sample(rng) < 0.0 {
                    -1
                } else {
                    1
                }
            }
        }
    }
}

impl std::fmt::Display for Dist {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dist::Unweighted => write!(f, "unweighted"),
            Dist::Bimodal => write!(f, "bimodal"),
            Dist::Gaussian { mean, variance } => write!(f, "gaussian:{mean},{variance}"),
        }
    }
}

impl FromStr for Dist {
    type Err = Error;

    fn from_str(s: &str) -> Result<Dist> {
        let d = match s {
            "unweighted" => Dist::Unweighted,
            "bimodal" => Dist::Bimodal,
            "gaussian" => Dist::Gaussian {
                mean: 0.0,
                variance: 1.0,
            },
            other => {
                let body = other.strip_prefix("gaussian:").ok_or_else(|| {
                    Error::InvalidParam(format!(
                        "unknown distribution '{other}' (unweighted | bimodal | gaussian[:mean,variance])"
                    ))
                })?;
                let (m, v) = body.split_once(',').ok_or_else(|| {
                    Error::InvalidParam(format!("gaussian needs 'mean,variance', got '{body}'"))
                })?;
                Dist::Gaussian {
                    mean: m.trim().parse().map_err(|_| {
                        Error::InvalidParam(format!("bad gaussian mean '{m}'"))
                    })?,
                    variance: v.trim().parse().map_err(|_| {
                        Error::InvalidParam(format!("bad gaussian variance '{v}'"))
                    })?,
                }
            }
        };
        d.validate()?;
        Ok(d)
    }
}

/// Base graph for the gauged-ferromagnet family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MattisTopology {
    Complete { n: usize },
    Torus { rows: usize, cols: usize },
    Regular { n: usize, k: usize },
}

/// Planted gauge vector returned with each Mattis instance; flipping spins
/// to epsilon removes all frustration, so it is a ground state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MattisSeed {
    pub epsilon: SpinConfig,
}

/// One record per supported generator family, serializable for meta/CLI use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Mobius {
        n_half: usize,
    },
    Circulant {
        n: usize,
        offsets: Vec<usize>,
        weights: Vec<f64>,
    },
    RandomCirculant {
        n: usize,
        k: usize,
        dist: Dist,
    },
    RandomRegular {
        n: usize,
        k: usize,
        dist: Dist,
    },
    Sk {
        n: usize,
        dist: Dist,
    },
    Mattis {
        topology: MattisTopology,
        dist: Dist,
    },
    Torus {
        rows: usize,
        cols: usize,
        dist: Dist,
    },
    ChimeraBf {
        cells_x: usize,
        cells_y: usize,
        p0: f64,
        p1: f64,
    },
    LadderField {
        n_half: usize,
    },
    Planar3rField {
        n: usize,
        rewire_count: usize,
    },
}

impl ModelSpec {
    pub fn generate(&self, seed: u64) -> Result<IsingInstance> {
        match self {
            ModelSpec::Mobius { n_half } => gen_mobius_ladder(*n_half),
            ModelSpec::Circulant {
                n,
                offsets,
                weights,
            } => gen_circulant(*n, offsets, weights),
            ModelSpec::RandomCirculant { n, k, dist } => gen_random_circulant(*n, *k, *dist, seed),
            ModelSpec::RandomRegular { n, k, dist } => gen_random_regular(*n, *k, *dist, seed),
            ModelSpec::Sk { n, dist } => gen_sk(*n, *dist, seed),
            ModelSpec::Mattis { topology, dist } => {
                gen_mattis(*topology, *dist, seed).map(|(inst, _)| inst)
            }
            ModelSpec::Torus { rows, cols, dist } => gen_torus(*rows, *cols, *dist, seed),
            ModelSpec::ChimeraBf {
                cells_x,
                cells_y,
                p0,
                p1,
            } => gen_chimera_bf(*cells_x, *cells_y, *p0, *p1, seed),
            ModelSpec::LadderField { n_half } => gen_ladder_field(*n_half),
            ModelSpec::Planar3rField { n, rewire_count } => {
                gen_planar3r_field(*n, *rewire_count, seed)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Mobius { .. } => "mobius",
            ModelSpec::Circulant { .. } => "circulant",
            ModelSpec::RandomCirculant { .. } => "random_circulant",
            ModelSpec::RandomRegular { .. } => "random_regular",
            ModelSpec::Sk { .. } => "sk",
            ModelSpec::Mattis { .. } => "mattis",
            ModelSpec::Torus { .. } => "torus",
            ModelSpec::ChimeraBf { .. } => "chimera_bf",
            ModelSpec::LadderField { .. } => "ladder_field",
            ModelSpec::Planar3rField { .. } => "planar3r_field",
        }
    }

    /// Spin count of the generated instance.
    pub fn size(&self) -> usize {
        match self {
            ModelSpec::Mobius { n_half } | ModelSpec::LadderField { n_half } => 2 * n_half,
            ModelSpec::Circulant { n, .. }
            | ModelSpec::RandomCirculant { n, .. }
            | ModelSpec::RandomRegular { n, .. }
            | ModelSpec::Sk { n, .. }
            | ModelSpec::Planar3rField { n, .. } => *n,
            ModelSpec::Mattis { topology, .. } => match topology {
                MattisTopology::Complete { n } | MattisTopology::Regular { n, .. } => *n,
                MattisTopology::Torus { rows, cols } => rows * cols,
            },
            ModelSpec::Torus { rows, cols, .. } => rows * cols,
            ModelSpec::ChimeraBf { cells_x, cells_y, .. } => 8 * cells_x * cells_y,
        }
    }

    /// Coupling-distribution label for result tables.
    pub fn dist_label(&self) -> String {
        fn of(d: &Dist) -> String {
            d.to_string()
        }
        match self {
            ModelSpec::Mobius { .. } | ModelSpec::LadderField { .. } => "unweighted".into(),
            ModelSpec::Circulant { .. } => "explicit".into(),
            ModelSpec::RandomCirculant { dist, .. }
            | ModelSpec::RandomRegular { dist, .. }
            | ModelSpec::Sk { dist, .. }
            | ModelSpec::Mattis { dist, .. }
            | ModelSpec::Torus { dist, .. } => of(dist),
            ModelSpec::ChimeraBf { p0, p1, .. } => format!("bf({p0},{p1})"),
            ModelSpec::Planar3rField { .. } => "unweighted".into(),
        }
    }
}

fn meta_for(model: &str, params: serde_json::Value, seed: u64) -> Meta {
    Meta {
        model: model.into(),
        params,
        seed,
    }
}

/// Ring of N = 2*n_half vertices plus all antipodal chords, w = -1.
pub fn gen_mobius_ladder(n_half: usize) -> Result<IsingInstance> {
    if n_half < 2 {
        return Err(Error::InvalidParam(format!(
            "mobius ladder needs n_half >= 2, got {n_half}"
        )));
    }
    let n = 2 * n_half;
    gen_circulant_with_meta(
        n,
        &[1, n_half],
        &[-1.0, -1.0],
        meta_for("mobius", serde_json::json!({ "n_half": n_half }), 0),
    )
}

/// Symmetric circulant coupling graph: vertex i connects to (i +- d) mod N
/// with the weight given per offset d.
pub fn gen_circulant(n: usize, offsets: &[usize], weights: &[f64]) -> Result<IsingInstance> {
    gen_circulant_with_meta(
        n,
        offsets,
        weights,
        meta_for(
            "circulant",
            serde_json::json!({ "n": n, "offsets": offsets, "weights": weights }),
            0,
        ),
    )
}

fn gen_circulant_with_meta(
    n: usize,
    offsets: &[usize],
    weights: &[f64],
    meta: Meta,
) -> Result<IsingInstance> {
    if n < 2 {
        return Err(Error::InvalidParam(format!(
            "circulant needs n >= 2, got {n}"
        )));
    }
    if offsets.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: offsets.len(),
            got: weights.len(),
        });
    }
    let mut seen = HashSet::new();
    for &d in offsets {
        if d == 0 || 2 * d > n {
            return Err(Error::InvalidParam(format!(
                "offset {d} outside [1, {}/2]",
                n
            )));
        }
        if !seen.insert(d) {
            return Err(Error::InvalidParam(format!("duplicate offset {d}")));
        }
    }
    let mut edges = Vec::new();
    for (&d, &w) in offsets.iter().zip(weights) {
        if 2 * d == n {
            for i in 0..n / 2 {
                edges.push(Edge(i as u32, (i + d) as u32, w));
            }
        } else {
            for i in 0..n {
                let j = (i + d) % n;
                edges.push(Edge(i.min(j) as u32, i.max(j) as u32, w));
            }
        }
    }
    IsingInstance::new(n, edges, vec![0.0; n], meta)
}

/// Circulant with ceil(k/2) offsets drawn uniformly; an odd k uses the
/// antipodal offset N/2 (so N must be even) plus (k-1)/2 random ones.
pub fn gen_random_circulant(n: usize, k: usize, dist: Dist, seed: u64) -> Result<IsingInstance> {
    dist.validate()?;
    if k == 0 || k >= n {
        return Err(Error::InvalidParam(format!(
            "connectivity k = {k} outside [1, n-1] for n = {n}"
        )));
    }
    let half = if n % 2 == 0 { n / 2 - 1 } else { n / 2 };
    let (need, with_antipode) = if k % 2 == 0 {
        (k / 2, false)
    } else {
        if n % 2 != 0 {
            return Err(Error::InvalidParam(format!(
                "odd connectivity {k} needs even n, got {n}"
            )));
        }
        ((k - 1) / 2, true)
    };
    if need > half {
        return Err(Error::InvalidParam(format!(
            "k = {k} needs {need} distinct offsets but only {half} exist for n = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (1..=half).collect();
    pool.shuffle(&mut rng);
    let mut offsets: Vec<usize> = pool.into_iter().take(need).collect();
    if with_antipode {
        offsets.push(n / 2);
    }
    offsets.sort_unstable();
    let weights: Vec<f64> = offsets.iter().map(|_| dist.sample(&mut rng)).collect();
    gen_circulant_with_meta(
        n,
        &offsets,
        &weights,
        meta_for(
            "random_circulant",
            serde_json::json!({
                "n": n, "k": k, "dist": dist.to_string(), "offsets": offsets, "weights": weights
            }),
            seed,
        ),
    )
}

const PAIRING_RESTARTS: usize = 100_000;

fn random_regular_edges(
    n: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Vec<(u32, u32)>, usize> {
    let mut attempts = 0;
    'restart: loop {
        attempts += 1;
        if attempts > PAIRING_RESTARTS {
            return Err(attempts - 1);
        }
        let mut stubs: Vec<u32> = Vec::with_capacity(n * k);
        for v in 0..n as u32 {
            stubs.extend(std::iter::repeat(v).take(k));
        }
        stubs.shuffle(rng);
        let mut seen = HashSet::with_capacity(n * k / 2);
        let mut edges = Vec::with_capacity(n * k / 2);
        for pair in stubs.chunks(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'restart;
            }
            edges.push((a, b));
        }
        return Ok(edges);
    }
}

/// Uniformish k-regular graph via the configuration model with full restart
/// on any self-loop or duplicate pairing.
pub fn gen_random_regular(n: usize, k: usize, dist: Dist, seed: u64) -> Result<IsingInstance> {
    dist.validate()?;
    if k >= n || k == 0 {
        return Err(Error::InvalidParam(format!(
            "degree k = {k} outside [1, n-1] for n = {n}"
        )));
    }
    if n * k % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "n*k = {}*{} is odd; no regular graph exists",
            n, k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = random_regular_edges(n, k, &mut rng)
        .map_err(|attempts| Error::PairingFailed { n, k, attempts })?;
    let edges = pairs
        .into_iter()
        .map(|(a, b)| Edge(a, b, dist.sample(&mut rng)))
        .collect();
    IsingInstance::new(
        n,
        edges,
        vec![0.0; n],
        meta_for(
            "random_regular",
            serde_json::json!({ "n": n, "k": k, "dist": dist.to_string() }),
            seed,
        ),
    )
}

/// Dense spin glass: complete graph with i.i.d. weights.
pub fn gen_sk(n: usize, dist: Dist, seed: u64) -> Result<IsingInstance> {
    dist.validate()?;
    if n < 2 {
        return Err(Error::InvalidParam(format!("sk needs n >= 2, got {n}")));
    }
    if dist == Dist::Unweighted {
        return Err(Error::InvalidParam(
            "sk weights must be random (bimodal or gaussian); an unweighted complete \
             graph is a circulant"
                .into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            edges.push(Edge(i, j, dist.sample(&mut rng)));
        }
    }
    IsingInstance::new(
        n,
        edges,
        vec![0.0; n],
        meta_for(
            "sk",
            serde_json::json!({ "n": n, "dist": dist.to_string() }),
            seed,
        ),
    )
}

fn topology_edges(
    topology: MattisTopology,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, Vec<(u32, u32)>)> {
    match topology {
        MattisTopology::Complete { n } => {
            if n < 2 {
                return Err(Error::InvalidParam(format!(
                    "complete topology needs n >= 2, got {n}"
                )));
            }
            let mut e = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n as u32 {
                for j in i + 1..n as u32 {
                    e.push((i, j));
                }
            }
            Ok((n, e))
        }
        MattisTopology::Torus { rows, cols } => Ok((rows * cols, torus_edges(rows, cols)?)),
        MattisTopology::Regular { n, k } => {
            if k >= n || k == 0 || n * k % 2 != 0 {
                return Err(Error::InvalidParam(format!(
                    "regular topology ({n}, {k}) infeasible"
                )));
            }
            random_regular_edges(n, k, rng)
                .map(|e| (n, e))
                .map_err(|attempts| Error::PairingFailed { n, k, attempts })
        }
    }
}

/// Gauged ferromagnet: J_ij = epsilon_i * epsilon_j on the base adjacency.
/// The gauge vector epsilon is the planted, frustration-free ground state.
pub fn gen_mattis(
    topology: MattisTopology,
    dist: Dist,
    seed: u64,
) -> Result<(IsingInstance, MattisSeed)> {
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, pairs) = topology_edges(topology, &mut rng)?;
    let epsilon: Vec<i8> = (0..n).map(|_| dist.sample_sign(&mut rng)).collect();
    let edges = pairs
        .into_iter()
        .map(|(a, b)| {
            Edge(
                a,
                b,
                f64::from(epsilon[a as usize] * epsilon[b as usize]),
            )
        })
        .collect();
    let inst = IsingInstance::new(
        n,
        edges,
        vec![0.0; n],
        meta_for(
            "mattis",
            serde_json::json!({
                "topology": topology,
                "dist": dist.to_string(),
                "epsilon": epsilon,
            }),
            seed,
        ),
    )?;
    let planted = SpinConfig::new(epsilon).expect("signs are +-1");
    Ok((inst, MattisSeed { epsilon: planted }))
}

fn torus_edges(rows: usize, cols: usize) -> Result<Vec<(u32, u32)>> {
    if rows < 3 || cols < 3 {
        return Err(Error::InvalidParam(format!(
            "torus needs rows, cols >= 3 (wrap edges duplicate otherwise), got {rows}x{cols}"
        )));
    }
    let at = |r: usize, c: usize| (r * cols + c) as u32;
    let mut e = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            e.push((at(r, c), at(r, (c + 1) % cols)));
            e.push((at(r, c), at((r + 1) % rows, c)));
        }
    }
    Ok(e)
}

/// Nearest-neighbour couplings on a rows x cols lattice with periodic
/// boundaries; 4-regular.
pub fn gen_torus(rows: usize, cols: usize, dist: Dist, seed: u64) -> Result<IsingInstance> {
    dist.validate()?;
    let pairs = torus_edges(rows, cols)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = pairs
        .into_iter()
        .map(|(a, b)| Edge(a, b, dist.sample(&mut rng)))
        .collect();
    let n = rows * cols;
    IsingInstance::new(
        n,
        edges,
        vec![0.0; n],
        meta_for(
            "torus",
            serde_json::json!({ "rows": rows, "cols": cols, "dist": dist.to_string() }),
            seed,
        ),
    )
}

/// Grid of complete-bipartite 4+4 cells, ferromagnetic w = +1 throughout,
/// with sparse binary fields biasing the all-up state. Spins 0..4 of a cell
/// couple to the vertical neighbours, spins 4..8 to the horizontal ones.
pub fn gen_chimera_bf(
    cells_x: usize,
    cells_y: usize,
    p0: f64,
    p1: f64,
    seed: u64,
) -> Result<IsingInstance> {
    if cells_x == 0 || cells_y == 0 {
        return Err(Error::InvalidParam("cell grid must be non-empty".into()));
    }
    if !(p0 + p1 - 1.0).abs().le(&1e-9) || p0 <= p1 || p1 <= 0.0 {
        return Err(Error::InvalidParam(format!(
            "field probabilities need p0 + p1 = 1 and p0 > p1 > 0, got ({p0}, {p1})"
        )));
    }
    let cell = |cx: usize, cy: usize| 8 * (cy * cells_x + cx);
    let mut edges = Vec::new();
    for cy in 0..cells_y {
        for cx in 0..cells_x {
            let base = cell(cx, cy);
            for l in 0..4 {
                for r in 4..8 {
                    edges.push(Edge((base + l) as u32, (base + r) as u32, 1.0));
                }
            }
            if cy + 1 < cells_y {
                let below = cell(cx, cy + 1);
                for l in 0..4 {
                    edges.push(Edge((base + l) as u32, (below + l) as u32, 1.0));
                }
            }
            if cx + 1 < cells_x {
                let right = cell(cx + 1, cy);
                for r in 4..8 {
                    edges.push(Edge((base + r) as u32, (right + r) as u32, 1.0));
                }
            }
        }
    }
    let n = 8 * cells_x * cells_y;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields = loop {
        let draw: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(p1) { 1.0 } else { 0.0 })
            .collect();
        // an all-zero draw has no bias to break the +-symmetry; resample
        if draw.iter().any(|&h| h != 0.0) {
            break draw;
        }
    };
    IsingInstance::new(
        n,
        edges,
        fields,
        meta_for(
            "chimera_bf",
            serde_json::json!({
                "cells_x": cells_x, "cells_y": cells_y, "p0": p0, "p1": p1
            }),
            seed,
        ),
    )
}

/// Prism (circular ladder) with w = -1 and uniform field h = -1.
pub fn gen_ladder_field(n_half: usize) -> Result<IsingInstance> {
    if n_half < 3 {
        return Err(Error::InvalidParam(format!(
            "ladder needs n_half >= 3, got {n_half}"
        )));
    }
    let nh = n_half as u32;
    let mut edges = Vec::with_capacity(3 * n_half);
    for i in 0..nh {
        edges.push(Edge(i, (i + 1) % nh, -1.0));
        edges.push(Edge(nh + i, nh + (i + 1) % nh, -1.0));
        edges.push(Edge(i, nh + i, -1.0));
    }
    let n = 2 * n_half;
    IsingInstance::new(
        n,
        edges,
        vec![-1.0; n],
        meta_for(
            "ladder_field",
            serde_json::json!({ "n_half": n_half }),
            0,
        ),
    )
}

/// Random planar cubic graph in a field: starts from the prism and applies
/// `rewire_count` double-edge swaps, each accepted only if the graph stays
/// simple and planar. Fields stay at -1.
pub fn gen_planar3r_field(n: usize, rewire_count: usize, seed: u64) -> Result<IsingInstance> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::InvalidParam(format!(
            "planar cubic family needs even n >= 6, got {n}"
        )));
    }
    let base = gen_ladder_field(n / 2)?;
    let mut edges: Vec<(u32, u32)> = base.edges.iter().map(|e| (e.0, e.1)).collect();
    let mut present: HashSet<(u32, u32)> = edges.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = 1_000 + 500 * rewire_count;
    let mut attempts = 0;
    let mut accepted = 0;
    while accepted < rewire_count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::RewireExhausted(format!(
                "no planar swap accepted within {budget} attempts \
                 ({accepted}/{rewire_count} done, n = {n})"
            )));
        }
        let a = rng.gen_range(0..edges.len());
        let b = rng.gen_range(0..edges.len());
        if a == b {
            continue;
        }
        let (u, v) = edges[a];
        let (mut x, mut y) = edges[b];
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut x, &mut y);
        }
        if u == x || u == y || v == x || v == y {
            continue;
        }
        let new1 = (u.min(x), u.max(x));
        let new2 = (v.min(y), v.max(y));
        if present.contains(&new1) || present.contains(&new2) {
            continue;
        }
        let mut candidate = edges.clone();
        candidate[a] = new1;
        candidate[b] = new2;
        if !is_planar(n, &candidate) {
            continue;
        }
        present.remove(&edges[a]);
        present.remove(&edges[b]);
        present.insert(new1);
        present.insert(new2);
        edges = candidate;
        accepted += 1;
    }
    let edge_list = edges.into_iter().map(|(a, b)| Edge(a, b, -1.0)).collect();
    IsingInstance::new(
        n,
        edge_list,
        vec![-1.0; n],
        meta_for(
            "planar3r_field",
            serde_json::json!({ "n": n, "rewire_count": rewire_count }),
            seed,
        ),
    )
}

/// Result of a rewiring pass; the percentage counts seed-graph edges that
/// are no longer present.
#[derive(Debug, Clone)]
pub struct Rewired {
    pub instance: IsingInstance,
    pub swaps_done: usize,
    pub original_edges_rewired: usize,
    pub percent_original_rewired: f64,
}

/// One deterministic double-edge swap: removes ordered pairs (u, v) and
/// (x, y), adds {u, x} and {v, y} carrying the removed weights.
pub fn swap_edge_pair(
    inst: &IsingInstance,
    (u, v): (u32, u32),
    (x, y): (u32, u32),
) -> Result<IsingInstance> {
    let endpoints = [u, v, x, y];
    for (i, a) in endpoints.iter().enumerate() {
        if endpoints[i + 1..].contains(a) {
            return Err(Error::InvalidParam(format!(
                "swap endpoints must be distinct, got ({u},{v}) ({x},{y})"
            )));
        }
    }
    let key = |a: u32, b: u32| (a.min(b), a.max(b));
    let find = |a: u32, b: u32| -> Result<usize> {
        let k = key(a, b);
        inst.edges
            .iter()
            .position(|e| (e.0, e.1) == k)
            .ok_or_else(|| Error::BadInstance(format!("edge ({a}, {b}) not present")))
    };
    let ia = find(u, v)?;
    let ib = find(x, y)?;
    let new1 = key(u, x);
    let new2 = key(v, y);
    if inst.edges.iter().any(|e| (e.0, e.1) == new1 || (e.0, e.1) == new2) {
        return Err(Error::BadInstance(format!(
            "swap target ({},{}) or ({},{}) already present",
            new1.0, new1.1, new2.0, new2.1
        )));
    }
    let mut edges = inst.edges.clone();
    edges[ia] = Edge(new1.0, new1.1, inst.edges[ia].2);
    edges[ib] = Edge(new2.0, new2.1, inst.edges[ib].2);
    IsingInstance::new(inst.n, edges, inst.fields.clone(), inst.meta.clone())
}

/// The two-edge probe with a closed recipe: ring edges (0, 1) and
/// (N-4, N-3) become chords (0, N-4) and (1, N-3). For odd n_half this
/// breaks spectral simplicity at every size N >= 10.
pub fn gen_mobius_two_edge_rewired(n_half: usize) -> Result<IsingInstance> {
    if n_half < 5 {
        return Err(Error::InvalidParam(format!(
            "two-edge recipe needs n_half >= 5 (N >= 10), got {n_half}"
        )));
    }
    let inst = gen_mobius_ladder(n_half)?;
    let n = inst.n as u32;
    let mut probed = swap_edge_pair(&inst, (0, 1), (n - 4, n - 3))?;
    probed.meta = meta_for(
        "mobius_two_edge",
        serde_json::json!({ "n_half": n_half }),
        0,
    );
    Ok(probed)
}

const SWAP_ATTEMPTS_PER_TIER: usize = 600;

/// Degree-preserving randomization: `count` double-edge swaps. With
/// `restrict_to_original`, swaps prefer pairs of still-original edges, then
/// pairs touching one original, then any pair, so a requested rewiring
/// depth stays reachable when few original edges remain.
pub fn rewire(
    inst: &IsingInstance,
    count: usize,
    seed: u64,
    restrict_to_original: bool,
) -> Result<Rewired> {
    let mut edges: Vec<Edge> = inst.edges.clone();
    let m = edges.len();
    if count > 0 && m < 2 {
        return Err(Error::RewireExhausted(format!(
            "cannot swap with {m} edges"
        )));
    }
    let original: HashSet<(u32, u32)> = edges.iter().map(|e| (e.0, e.1)).collect();
    let mut present = original.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..count {
        let mut done = false;
        let tiers: &[usize] = if restrict_to_original { &[2, 1, 0] } else { &[0] };
        'tier: for &min_original in tiers {
            for _ in 0..SWAP_ATTEMPTS_PER_TIER {
                let a = rng.gen_range(0..m);
                let b = rng.gen_range(0..m);
                if a == b {
                    continue;
                }
                let orig_count = [a, b]
                    .iter()
                    .filter(|&&i| original.contains(&(edges[i].0, edges[i].1)))
                    .count();
                if orig_count < min_original {
                    continue;
                }
                let Edge(u, v, wa) = edges[a];
                let Edge(mut x, mut y, wb) = edges[b];
                if rng.gen_bool(0.5) {
                    std::mem::swap(&mut x, &mut y);
                }
                if u == x || u == y || v == x || v == y {
                    continue;
                }
                let new1 = (u.min(x), u.max(x));
                let new2 = (v.min(y), v.max(y));
                if present.contains(&new1) || present.contains(&new2) {
                    continue;
                }
                present.remove(&(edges[a].0, edges[a].1));
                present.remove(&(edges[b].0, edges[b].1));
                present.insert(new1);
                present.insert(new2);
                edges[a] = Edge(new1.0, new1.1, wa);
                edges[b] = Edge(new2.0, new2.1, wb);
                done = true;
                break 'tier;
            }
        }
        if !done {
            return Err(Error::RewireExhausted(format!(
                "no eligible swap after {SWAP_ATTEMPTS_PER_TIER} attempts per tier \
                 (restrict_to_original = {restrict_to_original})"
            )));
        }
    }
    let still_original = edges
        .iter()
        .filter(|e| original.contains(&(e.0, e.1)))
        .count();
    let rewired = m - still_original;
    let percent = if m == 0 {
        0.0
    } else {
        100.0 * rewired as f64 / m as f64
    };
    let mut meta = inst.meta.clone();
    if let serde_json::Value::Object(map) = &mut meta.params {
        map.insert(
            "rewired".into(),
            serde_json::json!({
                "count": count,
                "seed": seed,
                "restrict_to_original": restrict_to_original,
                "percent_original_rewired": percent,
            }),
        );
    }
    let instance = IsingInstance::new(inst.n, edges, inst.fields.clone(), meta)?;
    Ok(Rewired {
        instance,
        swaps_done: count,
        original_edges_rewired: rewired,
        percent_original_rewired: percent,
    })
}
