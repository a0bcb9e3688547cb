//! Minimum vertex cover (vertex-set encoding). Every operator ends with a
//! repair step so that only valid covers circulate.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{EvalError, LoadError};
use crate::genome::{EncodingSpec, Genome, VertexSet};

use super::{advance_counter, wrong_encoding, Cursor, DynRng, MoveState, Problem};

/// Vertices dropped by the neighbourhood move before repair.
pub const UNARY_REMOVALS: usize = 5;
/// Vertices dropped by the EA mutation before repair.
pub const MUTATION_REMOVALS: usize = 3;

#[derive(Clone, Debug)]
pub struct VcInstance {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl VcInstance {
    /// Builds a simple graph; duplicate edges are merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, LoadError> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(LoadError::Invariant(format!("edge {u}-{v} references a vertex >= {n}")));
            }
            if u == v {
                return Err(LoadError::Invariant(format!("self-loop on vertex {u}")));
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self { n, edges: list, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn is_cover(&self, set: &VertexSet) -> bool {
        self.edges.iter().all(|&(u, v)| set.contains(u) || set.contains(v))
    }

    fn uncovered_edges(&self, set: &VertexSet) -> Vec<(usize, usize)> {
        self.edges.iter().copied().filter(|&(u, v)| !set.contains(u) && !set.contains(v)).collect()
    }

    /// Uncovered edges incident to `removed`, assuming the set was a cover
    /// before those vertices were taken out.
    fn uncovered_after_removal(&self, set: &VertexSet, removed: &[usize]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &r in removed {
            for &w in &self.adj[r] {
                if !set.contains(w) && (w > r || !removed.contains(&w)) {
                    out.push((r.min(w), r.max(w)));
                }
            }
        }
        out
    }

    /// Greedy completion: repeatedly adds the vertex covering the most
    /// uncovered edges, breaking ties uniformly at random. When `allowed` is
    /// given only its members are candidates (falling back to any endpoint
    /// if an edge has no allowed endpoint).
    fn complete(
        &self,
        set: &mut VertexSet,
        uncovered: &[(usize, usize)],
        allowed: Option<&VertexSet>,
        rng: &mut DynRng,
    ) {
        if uncovered.is_empty() {
            return;
        }
        let mut unc_adj: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for &(u, v) in uncovered {
            unc_adj.entry(u).or_default().push(v);
            unc_adj.entry(v).or_default().push(u);
        }
        let mut degree: std::collections::BTreeMap<usize, usize> =
            unc_adj.iter().map(|(&v, ns)| (v, ns.len())).collect();
        let mut remaining = uncovered.len();
        let mut ties = Vec::new();
        while remaining > 0 {
            let eligible = |v: usize| allowed.is_none_or(|a| a.contains(v));
            let mut best = 0;
            ties.clear();
            for (&v, &d) in &degree {
                if d == 0 || !eligible(v) {
                    continue;
                }
                if d > best {
                    best = d;
                    ties.clear();
                }
                if d == best {
                    ties.push(v);
                }
            }
            if ties.is_empty() {
                // no allowed endpoint left; take any
                for (&v, &d) in &degree {
                    if d > best {
                        best = d;
                        ties.clear();
                    }
                    if d == best && d > 0 {
                        ties.push(v);
                    }
                }
            }
            let pick = *ties.choose(rng).expect("uncovered edges remain");
            set.insert(pick);
            for &w in &unc_adj[&pick] {
                // edges to vertices added earlier were already counted
                if !set.contains(w) {
                    if let Some(d) = degree.get_mut(&w) {
                        *d -= 1;
                    }
                    remaining -= 1;
                }
            }
            degree.insert(pick, 0);
        }
    }

    pub fn repair(&self, set: &mut VertexSet, rng: &mut DynRng) {
        let uncovered = self.uncovered_edges(set);
        self.complete(set, &uncovered, None, rng);
    }

    fn remove_and_repair(&self, set: &VertexSet, count: usize, rng: &mut DynRng) -> VertexSet {
        let members: Vec<usize> = set.iter().collect();
        let removed: Vec<usize> = members.choose_multiple(rng, count.min(members.len())).copied().collect();
        let mut out = set.clone();
        for &r in &removed {
            out.remove(r);
        }
        let uncovered = self.uncovered_after_removal(&out, &removed);
        self.complete(&mut out, &uncovered, None, rng);
        out
    }

    /// DIMACS edge format (`p edge n m`, `e u v`, 1-based ids).
    pub fn parse_dimacs(text: &str) -> Result<Self, LoadError> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let fields: Vec<&str> = raw.split_whitespace().collect();
            match fields.first() {
                None | Some(&"c") => continue,
                Some(&"p") => {
                    if fields.len() != 4 {
                        return Err(LoadError::parse(line_no, "expected `p edge <n> <m>`"));
                    }
                    n = Some(fields[2].parse::<usize>().map_err(|_| LoadError::parse(line_no, "bad vertex count"))?);
                }
                Some(&"e") => {
                    let nv = n.ok_or_else(|| LoadError::parse(line_no, "edge before problem line"))?;
                    if fields.len() != 3 {
                        return Err(LoadError::parse(line_no, "expected `e <u> <v>`"));
                    }
                    let parse = |s: &str| -> Result<usize, LoadError> {
                        let v: usize = s.parse().map_err(|_| LoadError::parse(line_no, format!("bad vertex {s:?}")))?;
                        if v == 0 || v > nv {
                            return Err(LoadError::parse(line_no, format!("vertex {v} out of range")));
                        }
                        Ok(v - 1)
                    };
                    edges.push((parse(fields[1])?, parse(fields[2])?));
                }
                Some(other) => return Err(LoadError::parse(line_no, format!("unknown record {other:?}"))),
            }
        }
        let n = n.ok_or_else(|| LoadError::Invariant("missing problem line".into()))?;
        Self::new(n, edges)
    }

    pub fn load_dimacs(path: &Path) -> Result<Self, LoadError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })?;
        Self::parse_dimacs(&text)
    }

    /// Erdős–Rényi graph G(n, p).
    pub fn random(n: usize, p: f64, rng: &mut DynRng) -> Self {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        Self::new(n, edges).expect("generated graph is simple")
    }
}

pub struct VcProblem {
    name: String,
    instance: VcInstance,
    encoding: EncodingSpec,
}

impl VcProblem {
    pub fn new(name: impl Into<String>, instance: VcInstance) -> Self {
        let encoding = EncodingSpec::VertexSet { n: instance.n() };
        Self { name: name.into(), instance, encoding }
    }

    pub fn instance(&self) -> &VcInstance {
        &self.instance
    }

    fn set<'a>(&self, g: &'a Genome) -> &'a VertexSet {
        g.as_vertex_set().unwrap_or_else(|| wrong_encoding(&self.name, g))
    }
}

impl Problem for VcProblem {
    fn name(&self) -> &str {
        &self.name
    }

    fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    fn evaluate(&self, genome: &Genome) -> Result<f64, EvalError> {
        crate::genome::validate_genome(genome, &self.encoding).map_err(|v| EvalError::Contract(v.to_string()))?;
        let set = self.set(genome);
        if !self.instance.is_cover(set) {
            return Err(EvalError::Contract("vertex set is not a cover".into()));
        }
        Ok(set.len() as f64)
    }

    /// Random start, then uncovered edges (in random order) get a random
    /// endpoint until the set covers the graph.
    fn random_solution(&self, rng: &mut DynRng) -> Genome {
        let n = self.instance.n();
        let mut set = VertexSet::empty(n);
        for v in 0..n {
            if rng.gen_bool(0.5) {
                set.insert(v);
            }
        }
        let mut uncovered = self.instance.uncovered_edges(&set);
        uncovered.shuffle(rng);
        for (u, v) in uncovered {
            if !set.contains(u) && !set.contains(v) {
                set.insert(if rng.gen_bool(0.5) { u } else { v });
            }
        }
        Genome::VertexSet(set)
    }

    /// Binary counter over inclusion masks; each mask is repaired.
    fn next_solution(&self, cursor: &mut Cursor, rng: &mut DynRng) -> Option<Genome> {
        if cursor.exhausted {
            return None;
        }
        let n = self.instance.n();
        if !cursor.started {
            cursor.started = true;
            cursor.digits = vec![0; n];
        } else if !advance_counter(&mut cursor.digits, |_| 2) {
            cursor.exhausted = true;
            return None;
        }
        let mut set = VertexSet::empty(n);
        for (v, &bit) in cursor.digits.iter().enumerate() {
            if bit == 1 {
                set.insert(v);
            }
        }
        self.instance.repair(&mut set, rng);
        Some(Genome::VertexSet(set))
    }

    fn unary(&self, genome: &Genome, _state: &MoveState, rng: &mut DynRng) -> Genome {
        Genome::VertexSet(self.instance.remove_and_repair(self.set(genome), UNARY_REMOVALS, rng))
    }

    fn mutate(&self, genome: &Genome, rng: &mut DynRng) -> Genome {
        Genome::VertexSet(self.instance.remove_and_repair(self.set(genome), MUTATION_REMOVALS, rng))
    }

    /// Keeps vertices shared by both parents, inherits the others with
    /// probability 1/2, then repairs.
    fn binary(&self, a: &Genome, b: &Genome, rng: &mut DynRng) -> Genome {
        let (sa, sb) = (self.set(a), self.set(b));
        let mut child = VertexSet::empty(self.instance.n());
        for v in 0..self.instance.n() {
            let keep = match (sa.contains(v), sb.contains(v)) {
                (true, true) => true,
                (false, false) => false,
                _ => rng.gen_bool(0.5),
            };
            if keep {
                child.insert(v);
            }
        }
        self.instance.repair(&mut child, rng);
        Genome::VertexSet(child)
    }

    /// Intersection of the first two covers completed with vertices of the
    /// third.
    fn ternary(&self, a: &Genome, b: &Genome, c: &Genome, _f: f64, rng: &mut DynRng) -> Genome {
        let (sa, sb, sc) = (self.set(a), self.set(b), self.set(c));
        let mut child = VertexSet::empty(self.instance.n());
        for v in sa.iter().filter(|&v| sb.contains(v)) {
            child.insert(v);
        }
        let uncovered = self.instance.uncovered_edges(&child);
        self.instance.complete(&mut child, &uncovered, Some(sc), rng);
        Genome::VertexSet(child)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> VcProblem {
        VcProblem::new("tri", VcInstance::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap())
    }

    fn set(n: usize, ids: &[usize]) -> Genome {
        Genome::VertexSet(VertexSet::from_members(n, ids.iter().copied()).unwrap())
    }

    #[test]
    fn triangle_cover() {
        let p = triangle();
        assert_eq!(p.evaluate(&set(3, &[0, 1])).unwrap(), 2.0);
        assert_eq!(p.evaluate(&set(3, &[0, 1, 2])).unwrap(), 3.0);
        assert!(matches!(p.evaluate(&set(3, &[0])), Err(EvalError::Contract(_))));
    }

    #[test]
    fn empty_graph_has_empty_cover() {
        let p = VcProblem::new("empty", VcInstance::new(4, []).unwrap());
        assert_eq!(p.evaluate(&set(4, &[])).unwrap(), 0.0);
    }

    #[test]
    fn self_loops_rejected() {
        assert!(VcInstance::new(3, [(1, 1)]).is_err());
        assert!(VcInstance::new(3, [(1, 3)]).is_err());
    }

    #[test]
    fn star_cover_survives_removal() {
        let inst = VcInstance::new(8, (1..8).map(|v| (0, v))).unwrap();
        let p = VcProblem::new("star", inst);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let start = set(8, &[0, 1, 2, 3, 4, 5, 6, 7]);
        for _ in 0..100 {
            let out = p.unary(&start, &MoveState::fixed(), &mut rng);
            assert!(p.instance().is_cover(out.as_vertex_set().unwrap()));
        }
    }

    #[test]
    fn greedy_prefers_high_uncovered_degree() {
        let inst = VcInstance::new(8, (1..8).map(|v| (0, v))).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = VertexSet::empty(8);
        inst.repair(&mut s, &mut rng);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn ternary_of_identical_covers_is_identity() {
        let p = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = set(3, &[0, 2]);
        assert_eq!(p.ternary(&s, &s, &s, 1.0, &mut rng), s);
    }

    #[test]
    fn ternary_draws_from_third_parent() {
        // path 0-1-2-3; intersection empty, third parent {1, 2}
        let p = VcProblem::new("path", VcInstance::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let out = p.ternary(&set(4, &[0, 2]), &set(4, &[1, 3]), &set(4, &[1, 2]), 1.0, &mut rng);
        assert_eq!(out, set(4, &[1, 2]));
    }

    #[test]
    fn operators_keep_covers_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let p = VcProblem::new("g50", VcInstance::random(50, 0.1, &mut rng));
        let inst = p.instance().clone();
        let mut pool: Vec<Genome> = (0..3).map(|_| p.random_solution(&mut rng)).collect();
        for i in 0..1000 {
            let a = &pool[i % 3];
            let b = &pool[(i + 1) % 3];
            let c = &pool[(i + 2) % 3];
            let out = match i % 4 {
                0 => p.unary(a, &MoveState::fixed(), &mut rng),
                1 => p.mutate(a, &mut rng),
                2 => p.binary(a, b, &mut rng),
                _ => p.ternary(a, b, c, 1.0, &mut rng),
            };
            assert!(inst.is_cover(out.as_vertex_set().unwrap()), "operator {} broke the cover", i % 4);
            pool[i % 3] = out;
        }
    }

    #[test]
    fn dimacs_parsing() {
        let inst = VcInstance::parse_dimacs("c triangle\np edge 3 3\ne 1 2\ne 2 3\ne 1 3\n").unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.edges().len(), 3);
        assert!(matches!(VcInstance::parse_dimacs("p edge 3 1\ne 1 4\n"), Err(LoadError::Parse { line: 2, .. })));
        assert!(matches!(VcInstance::parse_dimacs("p edge 3 1\ne 2 2\n"), Err(LoadError::Invariant(_))));
        assert!(VcInstance::parse_dimacs("e 1 2\n").is_err());
    }

    #[test]
    fn enumeration_starts_from_repaired_empty_set() {
        let p = triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cursor = Cursor::default();
        let first = p.next_solution(&mut cursor, &mut rng).unwrap();
        assert!(p.instance().is_cover(first.as_vertex_set().unwrap()));
        let mut count = 1;
        while p.next_solution(&mut cursor, &mut rng).is_some() {
            count += 1;
        }
        assert_eq!(count, 8);
    }
}
