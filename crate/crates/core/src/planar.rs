//! Left-right planarity test (edge-addition method).
//!
//! Phase one orients the graph by DFS and computes lowpoints and nesting
//! depths per oriented edge. Phase two re-traverses in nesting order and
//! maintains a stack of conflict pairs of return-edge intervals; the graph
//! is planar iff every interval constraint can be satisfied. Only the
//! boolean verdict is produced; no embedding is constructed.

use crate::instance::IsingInstance;

const UNVISITED: usize = usize::MAX;

/// Half-open interval of return edges on one side of a conflict pair.
/// Either both ends are set or the interval is empty.
#[derive(Clone, Copy, Default, PartialEq)]
struct Interval {
    low: Option<u32>,
    high: Option<u32>,
}

impl Interval {
    fn is_empty(&self) -> bool {
        self.low.is_none() && self.high.is_none()
    }
}

#[derive(Clone, Copy, Default)]
struct ConflictPair {
    left: Interval,
    right: Interval,
}

impl ConflictPair {
    fn swap(&mut self) {
        std::mem::swap(&mut self.left, &mut self.right);
    }
}

struct Lr {
    adj: Vec<Vec<(u32, u32)>>,
    // per vertex
    height: Vec<usize>,
    parent_edge: Vec<Option<u32>>,
    // per undirected edge; an edge is oriented at most once
    oriented: Vec<bool>,
    src: Vec<u32>,
    dst: Vec<u32>,
    lowpt: Vec<usize>,
    lowpt2: Vec<usize>,
    nesting: Vec<i64>,
    out: Vec<Vec<u32>>,
    // phase two
    refs: Vec<Option<u32>>,
    lowpt_edge: Vec<Option<u32>>,
    stack: Vec<ConflictPair>,
    stack_bottom: Vec<usize>,
}

impl Lr {
    fn new(n: usize, edges: &[(u32, u32)]) -> Lr {
        let m = edges.len();
        let mut adj = vec![Vec::new(); n];
        for (id, &(a, b)) in edges.iter().enumerate() {
            adj[a as usize].push((b, id as u32));
            adj[b as usize].push((a, id as u32));
        }
        Lr {
            adj,
            height: vec![UNVISITED; n],
            parent_edge: vec![None; n],
            oriented: vec![false; m],
            src: vec![0; m],
            dst: vec![0; m],
            lowpt: vec![0; m],
            lowpt2: vec![0; m],
            nesting: vec![0; m],
            out: vec![Vec::new(); n],
            refs: vec![None; m],
            lowpt_edge: vec![None; m],
            stack: Vec::new(),
            stack_bottom: vec![0; m],
        }
    }

    fn run(&mut self) -> bool {
        let n = self.adj.len();
        let mut roots = Vec::new();
        for v in 0..n {
            if self.height[v] == UNVISITED {
                self.height[v] = 0;
                roots.push(v);
                self.orient(v);
            }
        }
        for v in 0..n {
            // Stable sort keeps DFS discovery order among equal depths.
            let mut order = std::mem::take(&mut self.out[v]);
            order.sort_by_key(|&e| self.nesting[e as usize]);
            self.out[v] = order;
        }
        roots.into_iter().all(|r| self.test(r))
    }

    fn orient(&mut self, v: usize) {
        let parent = self.parent_edge[v];
        for idx in 0..self.adj[v].len() {
            let (w, eid) = self.adj[v][idx];
            let (w, e) = (w as usize, eid as usize);
            if self.oriented[e] {
                continue;
            }
            self.oriented[e] = true;
            self.src[e] = v as u32;
            self.dst[e] = w as u32;
            self.out[v].push(eid);
            self.lowpt[e] = self.height[v];
            self.lowpt2[e] = self.height[v];
            if self.height[w] == UNVISITED {
                self.parent_edge[w] = Some(eid);
                self.height[w] = self.height[v] + 1;
                self.orient(w);
            } else {
                self.lowpt[e] = self.height[w];
            }
            // Chordal edges nest inside their sibling at equal lowpoint.
            self.nesting[e] = 2 * self.lowpt[e] as i64;
            if self.lowpt2[e] < self.height[v] {
                self.nesting[e] += 1;
            }
            if let Some(pe) = parent {
                let p = pe as usize;
                if self.lowpt[e] < self.lowpt[p] {
                    self.lowpt2[p] = self.lowpt[p].min(self.lowpt2[e]);
                    self.lowpt[p] = self.lowpt[e];
                } else if self.lowpt[e] > self.lowpt[p] {
                    self.lowpt2[p] = self.lowpt2[p].min(self.lowpt[e]);
                } else {
                    self.lowpt2[p] = self.lowpt2[p].min(self.lowpt2[e]);
                }
            }
        }
    }

    /// True when the interval's return edges land strictly below edge `b`'s
    /// lowpoint, so the two cannot share a side.
    fn conflicting(&self, i: &Interval, b: u32) -> bool {
        match i.high {
            Some(h) => self.lowpt[h as usize] > self.lowpt[b as usize],
            None => false,
        }
    }

    fn lowest(&self, p: &ConflictPair) -> usize {
        let side = |i: &Interval| i.low.map(|e| self.lowpt[e as usize]);
        match (side(&p.left), side(&p.right)) {
            (Some(l), Some(r)) => l.min(r),
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => unreachable!("empty conflict pair on stack"),
        }
    }

    fn test(&mut self, v: usize) -> bool {
        let parent = self.parent_edge[v];
        for idx in 0..self.out[v].len() {
            let eid = self.out[v][idx];
            let e = eid as usize;
            let w = self.dst[e] as usize;
            self.stack_bottom[e] = self.stack.len();
            if self.parent_edge[w] == Some(eid) {
                if !self.test(w) {
                    return false;
                }
            } else {
                self.lowpt_edge[e] = Some(eid);
                self.stack.push(ConflictPair {
                    left: Interval::default(),
                    right: Interval {
                        low: Some(eid),
                        high: Some(eid),
                    },
                });
            }
            if self.lowpt[e] < self.height[v] {
                // Return edges escape above v; a root at height 0 never
                // reaches here, so the parent edge exists.
                let pe = parent.expect("return edge implies non-root");
                if idx == 0 {
                    self.lowpt_edge[pe as usize] = self.lowpt_edge[e];
                } else if !self.add_constraints(eid, pe) {
                    return false;
                }
            }
        }
        if let Some(pe) = parent {
            self.remove_back_edges(pe);
        }
        true
    }

    fn add_constraints(&mut self, eid: u32, pe: u32) -> bool {
        let mut p = ConflictPair::default();
        // Merge the return edges of eid into p.right; anything forced to
        // both sides is a contradiction.
        loop {
            let mut q = self.stack.pop().expect("eid left pairs on the stack");
            if !q.left.is_empty() {
                q.swap();
            }
            if !q.left.is_empty() {
                return false;
            }
            let q_low = q.right.low.expect("stack intervals are two-ended");
            if self.lowpt[q_low as usize] > self.lowpt[pe as usize] {
                if p.right.is_empty() {
                    p.right.high = q.right.high;
                } else {
                    let p_low = p.right.low.expect("non-empty interval");
                    self.refs[p_low as usize] = q.right.high;
                }
                p.right.low = q.right.low;
            } else {
                // Return edge stays below the parent's lowpoint; chain it
                // under the parent's own lowpoint edge.
                self.refs[q_low as usize] = self.lowpt_edge[pe as usize];
            }
            if self.stack.len() == self.stack_bottom[eid as usize] {
                break;
            }
        }
        // Siblings processed before eid whose return edges conflict with it
        // must all flip to the left side.
        while let Some(top) = self.stack.last() {
            if !self.conflicting(&top.left, eid) && !self.conflicting(&top.right, eid) {
                break;
            }
            let mut q = self.stack.pop().expect("checked non-empty");
            if self.conflicting(&q.right, eid) {
                q.swap();
            }
            if self.conflicting(&q.right, eid) {
                return false;
            }
            if let Some(p_low) = p.right.low {
                self.refs[p_low as usize] = q.right.high;
            }
            if q.right.low.is_some() {
                p.right.low = q.right.low;
            }
            if p.left.is_empty() {
                p.left.high = q.left.high;
            } else {
                let p_low = p.left.low.expect("non-empty interval");
                self.refs[p_low as usize] = q.left.high;
            }
            p.left.low = q.left.low;
        }
        if !(p.left.is_empty() && p.right.is_empty()) {
            self.stack.push(p);
        }
        true
    }

    fn remove_back_edges(&mut self, pe: u32) {
        let u = self.src[pe as usize] as usize;
        // Pairs consisting solely of return edges into u are resolved.
        while let Some(top) = self.stack.last() {
            if self.lowest(top) == self.height[u] {
                self.stack.pop();
            } else {
                break;
            }
        }
        if let Some(mut p) = self.stack.pop() {
            while let Some(h) = p.left.high {
                if self.dst[h as usize] as usize == u {
                    p.left.high = self.refs[h as usize];
                } else {
                    break;
                }
            }
            if p.left.high.is_none() {
                if let Some(low) = p.left.low {
                    self.refs[low as usize] = p.right.low;
                    p.left.low = None;
                }
            }
            while let Some(h) = p.right.high {
                if self.dst[h as usize] as usize == u {
                    p.right.high = self.refs[h as usize];
                } else {
                    break;
                }
            }
            if p.right.high.is_none() {
                if let Some(low) = p.right.low {
                    self.refs[low as usize] = p.left.low;
                    p.right.low = None;
                }
            }
            self.stack.push(p);
        }
        if self.lowpt[pe as usize] < self.height[u] {
            if let Some(top) = self.stack.last() {
                let hl = top.left.high;
                let hr = top.right.high;
                self.refs[pe as usize] = match (hl, hr) {
                    (Some(l), Some(r)) => {
                        if self.lowpt[l as usize] > self.lowpt[r as usize] {
                            Some(l)
                        } else {
                            Some(r)
                        }
                    }
                    (Some(l), None) => Some(l),
                    (None, r) => r,
                };
            }
        }
    }
}

/// Decides planarity of the simple graph on `n` vertices given by `edges`.
/// Self-loops and duplicate pairs are ignored; vertex ids must be < n.
pub fn is_planar(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut uniq: Vec<(u32, u32)> = edges
        .iter()
        .filter(|&&(a, b)| a != b)
        .map(|&(a, b)| if a < b { (a, b) } else { (b, a) })
        .collect();
    uniq.sort_unstable();
    uniq.dedup();
    if n >= 3 && uniq.len() > 3 * n - 6 {
        return false;
    }
    if uniq.len() < 9 {
        // Smallest non-planar graphs need nine edges.
        return true;
    }
    Lr::new(n, &uniq).run()
}

/// Planarity of an instance's coupling graph (weights ignored).
pub fn instance_is_planar(inst: &IsingInstance) -> bool {
    let edges: Vec<(u32, u32)> = inst.edges.iter().map(|e| (e.0, e.1)).collect();
    is_planar(inst.n, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                e.push((i, j));
            }
        }
        e
    }

    fn complete_bipartite(a: u32, b: u32) -> Vec<(u32, u32)> {
        let mut e = Vec::new();
        for i in 0..a {
            for j in 0..b {
                e.push((i, a + j));
            }
        }
        e
    }

    fn grid(rows: u32, cols: u32) -> (usize, Vec<(u32, u32)>) {
        let mut e = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let v = r * cols + c;
                if c + 1 < cols {
                    e.push((v, v + 1));
                }
                if r + 1 < rows {
                    e.push((v, v + cols));
                }
            }
        }
        ((rows * cols) as usize, e)
    }

    fn mobius(n_half: u32) -> (usize, Vec<(u32, u32)>) {
        // Ring plus antipodal chords; the prism uses rungs instead.
        let n = 2 * n_half;
        let mut e: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        e.extend((0..n_half).map(|i| (i, i + n_half)));
        (n as usize, e)
    }

    fn prism(n_half: u32) -> (usize, Vec<(u32, u32)>) {
        let mut e = Vec::new();
        for i in 0..n_half {
            e.push((i, (i + 1) % n_half));
            e.push((n_half + i, n_half + (i + 1) % n_half));
            e.push((i, n_half + i));
        }
        (2 * n_half as usize, e)
    }

    fn petersen() -> (usize, Vec<(u32, u32)>) {
        let mut e = Vec::new();
        for i in 0..5u32 {
            e.push((i, (i + 1) % 5));
            e.push((5 + i, 5 + (i + 2) % 5));
            e.push((i, 5 + i));
        }
        (10, e)
    }

    #[test]
    fn small_known_graphs() {
        assert!(is_planar(4, &complete(4)));
        assert!(!is_planar(5, &complete(5)));
        assert!(!is_planar(6, &complete(6)));
        assert!(!is_planar(6, &complete_bipartite(3, 3)));
        assert!(is_planar(5, &complete_bipartite(2, 3)));
        let (n, e) = petersen();
        assert!(!is_planar(n, &e));
    }

    #[test]
    fn k5_minus_edge_is_planar() {
        let mut e = complete(5);
        e.pop();
        assert!(is_planar(5, &e));
    }

    #[test]
    fn octahedron_hits_euler_bound() {
        // 6 vertices, 12 = 3*6-6 edges, planar.
        let mut e = Vec::new();
        for i in 0..6u32 {
            e.push((i, (i + 1) % 6));
            e.push((i, (i + 2) % 6));
        }
        let e: Vec<_> = e
            .into_iter()
            .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
            .collect();
        assert!(is_planar(6, &e));
    }

    #[test]
    fn grids_are_planar() {
        for (r, c) in [(2, 2), (3, 5), (7, 7), (4, 20)] {
            let (n, e) = grid(r, c);
            assert!(is_planar(n, &e), "{r}x{c} grid");
        }
    }

    #[test]
    fn prisms_planar_mobius_not() {
        for n_half in 3..12u32 {
            let (n, e) = prism(n_half);
            assert!(is_planar(n, &e), "prism {n_half}");
            let (n, e) = mobius(n_half);
            assert!(!is_planar(n, &e), "mobius {n_half}");
        }
        // n_half = 2 gives K4: the twist degenerates and stays planar.
        let (n, e) = mobius(2);
        assert!(is_planar(n, &e));
    }

    #[test]
    fn disconnected_components() {
        // K5 plus an isolated K4 copy: still non-planar.
        let mut e = complete(5);
        for &(a, b) in complete(4).iter() {
            e.push((a + 5, b + 5));
        }
        assert!(!is_planar(9, &e));
        // Two K4 copies: planar.
        let mut e2 = complete(4);
        for &(a, b) in complete(4).iter() {
            e2.push((a + 4, b + 4));
        }
        assert!(is_planar(8, &e2));
    }

    #[test]
    fn empty_and_trees() {
        assert!(is_planar(1, &[]));
        assert!(is_planar(10, &[]));
        let path: Vec<(u32, u32)> = (0..9).map(|i| (i, i + 1)).collect();
        assert!(is_planar(10, &path));
    }

    /// Independent oracle for connected graphs: a connected graph is planar
    /// iff some rotation system traces E - V + 2 faces (Euler's formula).
    /// Exponential in total degree, so only for tiny inputs.
    fn planar_by_rotation_search(n: usize, edges: &[(u32, u32)]) -> bool {
        let m = edges.len();
        let target = m as i64 - n as i64 + 2;
        let mut adj = vec![Vec::new(); n];
        for (id, &(a, b)) in edges.iter().enumerate() {
            adj[a as usize].push(2 * id); // dart a->b
            adj[b as usize].push(2 * id + 1); // dart b->a
        }
        // Enumerate cyclic orders per vertex as permutations with the first
        // dart fixed.
        fn perms(k: usize) -> Vec<Vec<usize>> {
            fn rec(rest: &mut Vec<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if rest.is_empty() {
                    out.push(cur.clone());
                    return;
                }
                for i in 0..rest.len() {
                    let x = rest.remove(i);
                    cur.push(x);
                    rec(rest, cur, out);
                    cur.pop();
                    rest.insert(i, x);
                }
            }
            let mut rest: Vec<usize> = (1..k).collect();
            let mut out = Vec::new();
            rec(&mut rest, &mut vec![0], &mut out);
            out
        }
        let vertex_orders: Vec<Vec<Vec<usize>>> =
            adj.iter().map(|d| perms(d.len().max(1))).collect();
        let mut choice = vec![0usize; n];
        loop {
            // next[dart] by the chosen rotations: entering dart d = (u->v),
            // the next dart leaves v after d's reverse in v's cyclic order.
            let mut next = vec![0usize; 2 * m];
            for v in 0..n {
                let order = &vertex_orders[v][choice[v]];
                let darts = &adj[v];
                if darts.is_empty() {
                    continue;
                }
                for (pos, &oi) in order.iter().enumerate() {
                    let d = darts[oi];
                    let succ = darts[order[(pos + 1) % order.len()]];
                    next[d ^ 1] = succ;
                }
            }
            let mut seen = vec![false; 2 * m];
            let mut faces = 0i64;
            for start in 0..2 * m {
                if seen[start] {
                    continue;
                }
                faces += 1;
                let mut d = start;
                while !seen[d] {
                    seen[d] = true;
                    d = next[d];
                }
            }
            if faces == target {
                return true;
            }
            // advance mixed-radix counter over rotation choices
            let mut v = 0;
            loop {
                if v == n {
                    return false;
                }
                choice[v] += 1;
                if choice[v] < vertex_orders[v].len() {
                    break;
                }
                choice[v] = 0;
                v += 1;
            }
        }
    }

    #[test]
    fn oracle_agrees_on_tiny_known_graphs() {
        assert!(!planar_by_rotation_search(5, &complete(5)));
        assert!(!planar_by_rotation_search(6, &complete_bipartite(3, 3)));
        assert!(planar_by_rotation_search(4, &complete(4)));
        let (n, e) = prism(3);
        assert!(planar_by_rotation_search(n, &e));
        let (n, e) = mobius(3);
        assert!(!planar_by_rotation_search(n, &e));
    }

    #[test]
    fn oracle_agrees_on_random_cubic_graphs() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a_17);
        let mut tested = 0;
        for trial in 0..240 {
            let n: usize = [6, 8, 10][trial % 3];
            // configuration-model cubic graph, restart on collision
            let edges = 'sample: loop {
                let mut stubs: Vec<u32> = (0..n as u32).flat_map(|v| [v, v, v]).collect();
                stubs.shuffle(&mut rng);
                let mut edges: Vec<(u32, u32)> = Vec::new();
                for pair in stubs.chunks(2) {
                    let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                    if a == b || edges.contains(&(a, b)) {
                        continue 'sample;
                    }
                    edges.push((a, b));
                }
                break edges;
            };
            // oracle requires connectivity
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &(a, b) in &edges {
                    let (a, b) = (a as usize, b as usize);
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    } else if b == v && !seen[a] {
                        seen[a] = true;
                        stack.push(a);
                    }
                }
            }
            if !seen.iter().all(|&s| s) {
                continue;
            }
            let want = planar_by_rotation_search(n, &edges);
            assert_eq!(is_planar(n, &edges), want, "n={n} edges={edges:?}");
            tested += 1;
        }
        assert!(tested >= 60, "only {tested} connected samples");
    }

    #[test]
    fn oracle_agrees_on_random_sparse_graphs() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(0x51_03);
        let mut tested = 0;
        'outer: for _ in 0..500 {
            let n = 6usize;
            let mut all: Vec<(u32, u32)> = complete(6);
            all.shuffle(&mut rng);
            let m = rng.gen_range(8..=11);
            let edges: Vec<_> = all.into_iter().take(m).collect();
            let mut deg = [0usize; 6];
            for &(a, b) in &edges {
                deg[a as usize] += 1;
                deg[b as usize] += 1;
            }
            // keep the rotation search cheap
            if deg.iter().any(|&d| d > 4) {
                continue;
            }
            let mut seen = [false; 6];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &(a, b) in &edges {
                    let (a, b) = (a as usize, b as usize);
                    if a == v && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    } else if b == v && !seen[a] {
                        seen[a] = true;
                        stack.push(a);
                    }
                }
            }
            if !seen.iter().all(|&s| s) {
                continue 'outer;
            }
            let want = planar_by_rotation_search(n, &edges);
            assert_eq!(is_planar(n, &edges), want, "edges={edges:?}");
            tested += 1;
        }
        assert!(tested >= 100, "only {tested} connected samples");
    }
}
