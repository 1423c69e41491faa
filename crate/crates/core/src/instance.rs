//! Ising instance data model: coupling graph, external fields, spin
//! configurations, and energy/frustration evaluation.
//!
//! The energy convention is
//!
//! ```text
//! H(s) = - sum_{(i,j,w) in edges} w * s_i * s_j  -  sum_i h_i * s_i
//! ```
//!
//! with every unordered coupling pair stored exactly once. Antiferromagnetic
//! couplings are negative, so an unweighted MaxCut instance carries `w = -1`
//! on every edge.

use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// One stored coupling: `i < j` and a real weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge(pub u32, pub u32, pub f64);

impl Edge {
    pub fn i(&self) -> usize {
        self.0 as usize
    }
    pub fn j(&self) -> usize {
        self.1 as usize
    }
    pub fn w(&self) -> f64 {
        self.2
    }
}

/// Generator provenance carried by every instance.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct Meta {
    pub model: String,
    pub params: serde_json::Value,
    pub seed: u64,
}

/// A symmetric weighted coupling graph plus external fields.
///
/// Invariants enforced at construction: no self-loops, no duplicate pairs,
/// edges sorted lexicographically with `i < j`, and `fields.len() == n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingInstance {
    pub n: usize,
    pub edges: Vec<Edge>,
    pub fields: Vec<f64>,
    pub meta: Meta,
}

/// A full assignment of +-1 spins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinConfig(pub Vec<i8>);

impl SpinConfig {
    pub fn new(s: Vec<i8>) -> Result<Self> {
        if s.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidParam("spins must be exactly -1 or +1".into()));
        }
        Ok(SpinConfig(s))
    }

    /// Sign projection of a real vector; `sign(0) = +1` by convention.
    pub fn from_signs(v: &[f64]) -> Self {
        SpinConfig(v.iter().map(|&x| if x < 0.0 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn flipped(&self) -> Self {
        SpinConfig(self.0.iter().map(|&v| -v).collect())
    }

    /// Prepends a +1 spin, the layout produced by [`IsingInstance::absorb_fields`].
    pub fn prepend_plus(&self) -> Self {
        let mut s = Vec::with_capacity(self.0.len() + 1);
        s.push(1);
        s.extend_from_slice(&self.0);
        SpinConfig(s)
    }
}

/// Compressed neighbour lists for O(|edges|) sweeps.
pub struct Adjacency {
    offsets: Vec<usize>,
    entries: Vec<(u32, f64)>,
}

impl Adjacency {
    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }

    /// y = J x using the stored couplings.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &(j, w) in self.neighbors(i) {
                acc += w * x[j as usize];
            }
            *yi = acc;
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }
}

impl IsingInstance {
    /// Validates, sorts, and wraps raw edge data.
    pub fn new(n: usize, mut edges: Vec<Edge>, fields: Vec<f64>, meta: Meta) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParam("spin count must be positive".into()));
        }
        if fields.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: fields.len(),
            });
        }
        for e in &mut edges {
            if e.0 == e.1 {
                return Err(Error::BadInstance(format!("self-loop at vertex {}", e.0)));
            }
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
            if e.j() >= n {
                return Err(Error::BadInstance(format!(
                    "edge ({}, {}) out of range for n = {n}",
                    e.0, e.1
                )));
            }
            if !e.2.is_finite() || e.2 == 0.0 {
                return Err(Error::BadInstance(format!(
                    "edge ({}, {}) has weight {}",
                    e.0, e.1, e.2
                )));
            }
        }
        edges.sort_by_key(|e| (e.0, e.1));
        if edges.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::BadInstance("duplicate coupling pair".into()));
        }
        Ok(IsingInstance {
            n,
            edges,
            fields,
            meta,
        })
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&h| h != 0.0)
    }

    /// True when all weights and fields are integers, so energies are exact.
    pub fn is_integral(&self) -> bool {
        self.edges.iter().all(|e| e.2.fract() == 0.0) && self.fields.iter().all(|h| h.fract() == 0.0)
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0usize; self.n];
        for e in &self.edges {
            d[e.i()] += 1;
            d[e.j()] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut counts = vec![0usize; self.n + 1];
        for e in &self.edges {
            counts[e.i() + 1] += 1;
            counts[e.j() + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut entries = vec![(0u32, 0.0); 2 * self.edges.len()];
        for e in &self.edges {
            entries[cursor[e.i()]] = (e.1, e.2);
            cursor[e.i()] += 1;
            entries[cursor[e.j()]] = (e.0, e.2);
            cursor[e.j()] += 1;
        }
        Adjacency { offsets, entries }
    }

    /// Dense symmetric coupling matrix, row-major.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for e in &self.edges {
            m[e.i() * n + e.j()] = e.2;
            m[e.j() * n + e.i()] = e.2;
        }
        m
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    /// Ising energy of a spin configuration.
    pub fn energy(&self, s: &SpinConfig) -> Result<f64> {
        self.check_len(s.len())?;
        let spins = s.as_slice();
        let mut e = 0.0;
        for edge in &self.edges {
            e -= edge.2 * f64::from(spins[edge.i()] * spins[edge.j()]);
        }
        for (h, &si) in self.fields.iter().zip(spins) {
            e -= h * f64::from(si);
        }
        Ok(e)
    }

    /// Energy of the sign projection of a real amplitude vector.
    pub fn energy_of_signs(&self, v: &[f64]) -> Result<f64> {
        self.energy(&SpinConfig::from_signs(v))
    }

    /// Cut value `(|edges| - sum s_i s_j) / 2` for unweighted MaxCut
    /// instances (every coupling -1).
    pub fn maxcut_value(&self, s: &SpinConfig) -> Result<f64> {
        self.check_len(s.len())?;
        let spins = s.as_slice();
        let mut aligned = 0i64;
        for edge in &self.edges {
            aligned += i64::from(spins[edge.i()] * spins[edge.j()]);
        }
        Ok((self.edges.len() as f64 - aligned as f64) / 2.0)
    }

    /// Counts edges whose coupling preference (align for `w > 0`,
    /// anti-align for `w < 0`) is violated by `s`.
    pub fn frustration(&self, s: &SpinConfig) -> Result<(usize, f64)> {
        self.check_len(s.len())?;
        let spins = s.as_slice();
        let count = self
            .edges
            .iter()
            .filter(|e| e.2 * f64::from(spins[e.i()] * spins[e.j()]) < 0.0)
            .count();
        let fraction = if self.edges.is_empty() {
            0.0
        } else {
            count as f64 / self.edges.len() as f64
        };
        Ok((count, fraction))
    }

    /// Folds the external fields into the couplings of an auxiliary spin.
    ///
    /// The new spin takes index 0 and couples to former spin `i` (now
    /// `i + 1`) with weight `h_i`, so `H_self(s) = H_ext(+1 ++ s)` and the
    /// extended instance has the global-flip symmetry.
    pub fn absorb_fields(&self) -> IsingInstance {
        let mut edges = Vec::with_capacity(self.edges.len() + self.n);
        for (i, &h) in self.fields.iter().enumerate() {
            if h != 0.0 {
                edges.push(Edge(0, i as u32 + 1, h));
            }
        }
        for e in &self.edges {
            edges.push(Edge(e.0 + 1, e.1 + 1, e.2));
        }
        let mut meta = self.meta.clone();
        meta.model = format!("{}+absorbed", self.meta.model);
        IsingInstance::new(self.n + 1, edges, vec![0.0; self.n + 1], meta)
            .expect("field absorption preserves instance invariants")
    }

    /// Audits the structural invariants (used by generator tests).
    pub fn validate(&self) -> Result<()> {
        let copy = IsingInstance::new(
            self.n,
            self.edges.clone(),
            self.fields.clone(),
            self.meta.clone(),
        )?;
        if copy.edges != self.edges {
            return Err(Error::BadInstance("edges not in canonical order".into()));
        }
        Ok(())
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> Result<()> {
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_json(BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<IsingInstance> {
        let f = std::fs::File::open(path)?;
        let inst: IsingInstance = serde_json::from_reader(BufReader::new(f))?;
        // Re-validate: files may come from outside.
        IsingInstance::new(inst.n, inst.edges, inst.fields, inst.meta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> Meta {
        Meta {
            model: "test".into(),
            params: serde_json::json!({}),
            seed: 0,
        }
    }

    fn cycle4() -> IsingInstance {
        let edges = vec![Edge(0, 1, -1.0), Edge(1, 2, -1.0), Edge(2, 3, -1.0), Edge(0, 3, -1.0)];
        IsingInstance::new(4, edges, vec![0.0; 4], meta()).unwrap()
    }

    #[test]
    fn rejects_self_loops_and_duplicates() {
        assert!(IsingInstance::new(3, vec![Edge(1, 1, 1.0)], vec![0.0; 3], meta()).is_err());
        assert!(IsingInstance::new(
            3,
            vec![Edge(0, 1, 1.0), Edge(1, 0, 1.0)],
            vec![0.0; 3],
            meta()
        )
        .is_err());
        assert!(IsingInstance::new(3, vec![Edge(0, 5, 1.0)], vec![0.0; 3], meta()).is_err());
    }

    #[test]
    fn canonicalizes_edge_order() {
        let inst = IsingInstance::new(
            3,
            vec![Edge(2, 1, 1.0), Edge(1, 0, 2.0)],
            vec![0.0; 3],
            meta(),
        )
        .unwrap();
        assert_eq!(inst.edges, vec![Edge(0, 1, 2.0), Edge(1, 2, 1.0)]);
    }

    #[test]
    fn energy_empty_graph_is_zero() {
        let inst = IsingInstance::new(3, vec![], vec![0.0; 3], meta()).unwrap();
        let s = SpinConfig::new(vec![1, -1, 1]).unwrap();
        assert_eq!(inst.energy(&s).unwrap(), 0.0);
    }

    #[test]
    fn cycle4_alternating_state() {
        let inst = cycle4();
        let s = SpinConfig::new(vec![1, -1, 1, -1]).unwrap();
        assert_eq!(inst.energy(&s).unwrap(), -4.0);
        assert_eq!(inst.maxcut_value(&s).unwrap(), 4.0);
        assert_eq!(inst.frustration(&s).unwrap(), (0, 0.0));
    }

    #[test]
    fn ferromagnetic_ring_all_up_is_unfrustrated() {
        let edges = vec![Edge(0, 1, 1.0), Edge(1, 2, 1.0), Edge(0, 2, 1.0)];
        let inst = IsingInstance::new(3, edges, vec![0.0; 3], meta()).unwrap();
        let s = SpinConfig::new(vec![1, 1, 1]).unwrap();
        assert_eq!(inst.frustration(&s).unwrap().0, 0);
        assert_eq!(inst.energy(&s).unwrap(), -3.0);
    }

    #[test]
    fn absorb_fields_matches_direct_energy() {
        let edges = vec![Edge(0, 1, -1.0), Edge(1, 2, 2.0)];
        let inst = IsingInstance::new(3, edges, vec![0.5, 0.0, -1.5], meta()).unwrap();
        let ext = inst.absorb_fields();
        assert_eq!(ext.n, 4);
        // h_1 = 0 adds no coupler.
        assert_eq!(ext.num_edges(), 4);
        assert!(!ext.has_fields());
        for bits in 0..8u32 {
            let s = SpinConfig::new(
                (0..3).map(|b| if bits >> b & 1 == 1 { 1 } else { -1 }).collect(),
            )
            .unwrap();
            let direct = inst.energy(&s).unwrap();
            let extended = ext.energy(&s.prepend_plus()).unwrap();
            assert_eq!(direct, extended);
        }
    }

    #[test]
    fn absorb_zero_fields_adds_isolated_spin() {
        let inst = cycle4();
        let ext = inst.absorb_fields();
        assert_eq!(ext.n, 5);
        assert_eq!(ext.num_edges(), inst.num_edges());
        assert_eq!(ext.degrees()[0], 0);
    }

    #[test]
    fn z2_symmetry_without_fields() {
        let inst = cycle4();
        let s = SpinConfig::new(vec![1, 1, -1, 1]).unwrap();
        assert_eq!(inst.energy(&s).unwrap(), inst.energy(&s.flipped()).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let inst = cycle4();
        let s = SpinConfig::new(vec![1, -1]).unwrap();
        assert!(inst.energy(&s).is_err());
        assert!(inst.frustration(&s).is_err());
    }

    #[test]
    fn json_round_trip_preserves_weights() {
        let edges = vec![Edge(0, 1, 0.1234567890123456789), Edge(1, 2, -1.0)];
        let inst = IsingInstance::new(3, edges, vec![0.25, 0.0, -0.1], meta()).unwrap();
        let mut buf = Vec::new();
        inst.write_json(&mut buf).unwrap();
        let back: IsingInstance = serde_json::from_slice(&buf).unwrap();
        assert_eq!(back.edges[0].2, inst.edges[0].2);
        assert_eq!(back.fields, inst.fields);
        // Canonical order in the serialized form.
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("{\"n\":3,\"edges\":[[0,1,"));
    }

    #[test]
    fn matvec_matches_dense() {
        let inst = cycle4();
        let adj = inst.adjacency();
        let x = vec![0.3, -0.7, 0.2, 0.9];
        let mut y = vec![0.0; 4];
        adj.matvec(&x, &mut y);
        let m = inst.dense_matrix();
        for i in 0..4 {
            let want: f64 = (0..4).map(|j| m[i * 4 + j] * x[j]).sum();
            assert!((y[i] - want).abs() < 1e-15);
        }
    }
}
