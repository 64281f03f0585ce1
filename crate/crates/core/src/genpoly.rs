//! Black-box generating polynomials whose multilinear coefficients count
//! closed walks without repeated vertices, permanents, set partitions and
//! injective homomorphisms.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::gf2m::Gf2m;
use crate::numeric::{eval_exact, pow, Kernel, Scalar};
use crate::polycore::{BlackBoxPolynomial, Limits, Rational, SparsePolynomial};

/// Adjacency structure on `0..n`. Undirected graphs keep both orientations
/// of every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    out: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, ignoring duplicate edges. Self-loops are rejected.
    pub fn new(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::domain(format!("edge ({u},{v}) outside vertex range 0..{n}")));
            }
            if u == v {
                return Err(Error::domain(format!("self-loop at vertex {u}")));
            }
            sets[u].insert(v);
            if !directed {
                sets[v].insert(u);
            }
        }
        Ok(Graph { n, directed, out: sets.into_iter().map(|s| s.into_iter().collect()).collect() })
    }

    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::new(n, false, &edges).expect("valid edges")
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Graph::new(n, false, &edges).expect("valid edges")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|u| (u - 1, u)).collect();
        Graph::new(n, false, &edges).expect("valid edges")
    }

    /// Undirected G(n, p) with `p = num/den`, seeded.
    pub fn erdos_renyi(n: usize, num: u32, den: u32, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_range(0..den) < num {
                    edges.push((u, v));
                }
            }
        }
        Graph::new(n, false, &edges).expect("valid edges")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_neighbours(&self, u: usize) -> &[usize] {
        &self.out[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].binary_search(&v).is_ok()
    }

    /// Every stored ordered pair.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Neighbourhoods of the underlying undirected graph.
    pub fn undirected_neighbours(&self) -> Vec<BTreeSet<usize>> {
        let mut nb = vec![BTreeSet::new(); self.n];
        for (u, v) in self.arcs() {
            nb[u].insert(v);
            nb[v].insert(u);
        }
        nb
    }
}

fn check_point(expected: usize, got: usize) {
    assert_eq!(expected, got, "point has {got} coordinates, polynomial has {expected} variables");
}

/// `trace(M(v)^d)` with `M(v)_{ij} = v_i` on arcs `(i, j)`.
#[derive(Debug, Clone)]
pub struct CyclePoly {
    graph: Graph,
    d: usize,
}

pub fn cycle_poly(graph: &Graph, d: usize) -> Result<CyclePoly> {
    if d == 0 {
        return Err(Error::domain("closed walks need length d >= 1"));
    }
    Ok(CyclePoly { graph: graph.clone(), d })
}

impl CyclePoly {
    /// `P = M^{d-1}` by repeated sparse products, then
    /// `trace(P M) = sum_{arcs (j,i)} P_{ij} v_j`.
    fn trace<T: Clone>(&self, v: &[T], zero: &T, add: impl Fn(&T, &T) -> Option<T>, mul: impl Fn(&T, &T) -> Option<T>) -> Option<T> {
        let n = self.graph.n;
        let mut p = vec![zero.clone(); n * n];
        for (i, j) in self.graph.arcs() {
            p[i * n + j] = v[i].clone();
        }
        for _ in 1..self.d - 1 {
            let mut next = vec![zero.clone(); n * n];
            for i in 0..n {
                let row = &p[i * n..(i + 1) * n];
                let out = &mut next[i * n..(i + 1) * n];
                for (j, pij) in row.iter().enumerate() {
                    if self.graph.out[j].is_empty() {
                        continue;
                    }
                    let step = mul(pij, &v[j])?;
                    for &k in &self.graph.out[j] {
                        out[k] = add(&out[k], &step)?;
                    }
                }
            }
            p = next;
        }
        if self.d == 1 {
            // M has a zero diagonal
            return Some(zero.clone());
        }
        let mut total = zero.clone();
        for (j, i) in self.graph.arcs() {
            total = add(&total, &mul(&p[i * n + j], &v[j])?)?;
        }
        Some(total)
    }
}

impl Kernel for CyclePoly {
    fn run<T: Scalar>(&self, point: &[T]) -> Option<T> {
        self.trace(point, &T::zero(), |a, b| a.add(b), |a, b| a.mul(b))
    }
}

impl BlackBoxPolynomial for CyclePoly {
    fn nvars(&self) -> usize {
        self.graph.n
    }
    fn degree(&self) -> usize {
        self.d
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        check_point(self.graph.n, point.len());
        eval_exact(self, point)
    }
}

/// A polynomial evaluated over GF(2^m).
pub trait GfBlackBox: Send + Sync {
    fn nvars(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval_gf(&self, field: &Gf2m, point: &[u64]) -> u64;
}

impl GfBlackBox for CyclePoly {
    fn nvars(&self) -> usize {
        self.graph.n
    }
    fn degree(&self) -> usize {
        self.d
    }
    fn eval_gf(&self, field: &Gf2m, point: &[u64]) -> u64 {
        check_point(self.graph.n, point.len());
        self.trace(point, &0, |a, b| Some(field.add(*a, *b)), |a, b| Some(field.mul(*a, *b)))
            .expect("field arithmetic is total")
    }
}

/// `prod_i (sum_j A_ij v_j)`; its `x_1 ... x_n` coefficient is `per(A)`.
#[derive(Debug, Clone)]
pub struct ProdPoly {
    rows: Vec<Vec<Rational>>,
}

pub fn prod_poly(a: &[Vec<Rational>]) -> Result<ProdPoly> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::domain("matrix must be square and nonempty"));
    }
    Ok(ProdPoly { rows: a.to_vec() })
}

impl Kernel for ProdPoly {
    fn run<T: Scalar>(&self, point: &[T]) -> Option<T> {
        let mut acc = T::one();
        for row in &self.rows {
            let mut s = T::zero();
            for (a, x) in row.iter().zip(point) {
                if !num_traits::Zero::is_zero(a) {
                    s = s.add(&T::from_rational(a)?.mul(x)?)?;
                }
            }
            acc = acc.mul(&s)?;
        }
        Some(acc)
    }
}

impl BlackBoxPolynomial for ProdPoly {
    fn nvars(&self) -> usize {
        self.rows.len()
    }
    fn degree(&self) -> usize {
        self.rows.len()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        check_point(self.rows.len(), point.len());
        eval_exact(self, point)
    }
}

/// `k` parts chosen from equal-size subsets of a ground set of size `k r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSystem {
    ground: usize,
    k: usize,
    sets: Vec<Vec<usize>>,
}

impl SetSystem {
    pub fn new(ground: usize, k: usize, sets: Vec<Vec<usize>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("need at least one part"));
        }
        let r = sets.first().map_or(0, Vec::len);
        if r == 0 {
            return Err(Error::domain("need at least one nonempty set"));
        }
        let mut clean = Vec::with_capacity(sets.len());
        for s in sets {
            let uniq: BTreeSet<usize> = s.iter().copied().collect();
            if uniq.len() != s.len() || s.len() != r {
                return Err(Error::domain(format!("all sets must have {r} distinct elements")));
            }
            if let Some(x) = uniq.iter().find(|&&x| x >= ground) {
                return Err(Error::domain(format!("element {x} outside ground set 0..{ground}")));
            }
            clean.push(uniq.into_iter().collect());
        }
        if k * r != ground {
            return Err(Error::domain(format!("ground size {ground} must equal k*r = {k}*{r}")));
        }
        Ok(SetSystem { ground, k, sets: clean })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
}

/// `(sum_i prod_{j in S_i} v_j)^k`.
#[derive(Debug, Clone)]
pub struct PartitionPoly {
    system: SetSystem,
}

pub fn partition_poly(system: &SetSystem) -> PartitionPoly {
    PartitionPoly { system: system.clone() }
}

impl Kernel for PartitionPoly {
    fn run<T: Scalar>(&self, point: &[T]) -> Option<T> {
        let mut s = T::zero();
        for set in &self.system.sets {
            let mut p = T::one();
            for &j in set {
                p = p.mul(&point[j])?;
            }
            s = s.add(&p)?;
        }
        pow(&s, self.system.k)
    }
}

impl BlackBoxPolynomial for PartitionPoly {
    fn nvars(&self) -> usize {
        self.system.ground
    }
    fn degree(&self) -> usize {
        self.system.ground
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        check_point(self.system.ground, point.len());
        eval_exact(self, point)
    }
}

/// Bags over the vertices of a pattern graph joined into a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn new(bags: Vec<Vec<usize>>, edges: Vec<(usize, usize)>) -> Self {
        let bags = bags
            .into_iter()
            .map(|b| b.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        TreeDecomposition { bags, edges }
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(1).saturating_sub(1)
    }

    /// One bag holding every vertex.
    pub fn trivial(h: &Graph) -> Self {
        TreeDecomposition::new(vec![(0..h.n).collect()], vec![])
    }

    /// The decomposition induced by eliminating vertices in `order`.
    pub fn from_elimination_order(h: &Graph, order: &[usize]) -> Result<Self> {
        let n = h.n;
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
            return Err(Error::domain("elimination order must be a permutation of the vertices"));
        }
        if n == 0 {
            return Ok(TreeDecomposition::new(vec![vec![]], vec![]));
        }
        let mut position = vec![0; n];
        order.iter().enumerate().for_each(|(i, &v)| position[v] = i);
        let mut nb = h.undirected_neighbours();
        let mut bags = Vec::with_capacity(n);
        let mut edges = Vec::new();
        for (i, &v) in order.iter().enumerate() {
            let later: Vec<usize> = nb[v].iter().copied().filter(|&u| position[u] > i).collect();
            for &a in &later {
                for &b in &later {
                    if a != b {
                        nb[a].insert(b);
                    }
                }
            }
            let mut bag = later.clone();
            bag.push(v);
            bags.push(bag);
            if i + 1 < n {
                let parent = later.iter().map(|&u| position[u]).min().unwrap_or(i + 1);
                edges.push((i, parent));
            }
        }
        Ok(TreeDecomposition::new(bags, edges))
    }

    /// Greedy minimum-degree elimination; optimal on forests and cycles.
    pub fn min_degree(h: &Graph) -> Self {
        let mut nb = h.undirected_neighbours();
        let mut alive: BTreeSet<usize> = (0..h.n).collect();
        let mut order = Vec::with_capacity(h.n);
        while let Some(&v) = alive.iter().min_by_key(|&&v| (nb[v].len(), v)) {
            alive.remove(&v);
            let later: Vec<usize> = nb[v].iter().copied().collect();
            for &a in &later {
                nb[a].remove(&v);
                for &b in &later {
                    if a != b {
                        nb[a].insert(b);
                    }
                }
            }
            order.push(v);
        }
        TreeDecomposition::from_elimination_order(h, &order).expect("order is a permutation")
    }

    /// Minimum-width decomposition by dynamic programming over vertex
    /// subsets; needs `|H| <= limits.permutation_vertices`.
    pub fn optimal(h: &Graph, limits: &Limits) -> Result<Self> {
        let n = h.n;
        if n > limits.permutation_vertices || n > 20 {
            return Err(Error::budget("exact treewidth search vertices", n as u128, limits.permutation_vertices as u128));
        }
        let nb: Vec<u32> = h
            .undirected_neighbours()
            .iter()
            .map(|s| s.iter().fold(0u32, |m, &u| m | (1 << u)))
            .collect();
        // q(S, v): vertices outside S + v reachable from v through S
        let q = |s: u32, v: usize| -> u32 {
            let mut reached = 1u32 << v;
            let mut frontier = 1u32 << v;
            let mut outside = 0u32;
            while frontier != 0 {
                let u = frontier.trailing_zeros() as usize;
                frontier &= frontier - 1;
                let next = nb[u] & !reached;
                reached |= next;
                outside |= next & !s;
                frontier |= next & s;
            }
            outside & !(1 << v)
        };
        let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
        let mut best = vec![u32::MAX; 1 << n];
        let mut choice = vec![0usize; 1 << n];
        best[0] = 0;
        for s in 1..=full {
            let mut bits = s;
            while bits != 0 {
                let v = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let rest = s & !(1 << v);
                let w = best[rest as usize].max(q(rest, v).count_ones());
                if w < best[s as usize] {
                    best[s as usize] = w;
                    choice[s as usize] = v;
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut s = full;
        while s != 0 {
            let v = choice[s as usize];
            order.push(v);
            s &= !(1 << v);
        }
        order.reverse();
        TreeDecomposition::from_elimination_order(h, &order)
    }

    /// Checks the bag tree is a tree and the three decomposition properties.
    pub fn validate(&self, h: &Graph) -> Result<()> {
        let b = self.bags.len();
        if b == 0 {
            return Err(Error::TreeDecomposition("no bags".into()));
        }
        if let Some(v) = self.bags.iter().flatten().find(|&&v| v >= h.n) {
            return Err(Error::TreeDecomposition(format!("bag mentions vertex {v}, pattern has {}", h.n)));
        }
        if self.edges.len() != b - 1 {
            return Err(Error::TreeDecomposition(format!(
                "bag tree has {} edges, a tree on {b} bags needs {}",
                self.edges.len(),
                b - 1
            )));
        }
        let mut adj = vec![Vec::new(); b];
        for &(x, y) in &self.edges {
            if x >= b || y >= b || x == y {
                return Err(Error::TreeDecomposition(format!("bad tree edge ({x},{y})")));
            }
            adj[x].push(y);
            adj[y].push(x);
        }
        if connected_count(&adj, &vec![true; b]) != 1 {
            return Err(Error::TreeDecomposition("bag tree is not connected".into()));
        }
        for v in 0..h.n {
            let holds: Vec<bool> = self.bags.iter().map(|bag| bag.contains(&v)).collect();
            if !holds.iter().any(|&x| x) {
                return Err(Error::TreeDecomposition(format!("vertex {v} is in no bag (vertex coverage)")));
            }
            if connected_count(&adj, &holds) != 1 {
                return Err(Error::TreeDecomposition(format!(
                    "bags containing vertex {v} are not connected (running intersection)"
                )));
            }
        }
        for (u, v) in h.arcs() {
            if !self.bags.iter().any(|bag| bag.contains(&u) && bag.contains(&v)) {
                return Err(Error::TreeDecomposition(format!("edge ({u},{v}) is in no bag (edge coverage)")));
            }
        }
        Ok(())
    }
}

/// Number of connected components of the subgraph induced by `keep`.
fn connected_count(adj: &[Vec<usize>], keep: &[bool]) -> usize {
    let mut seen = vec![false; adj.len()];
    let mut components = 0;
    for start in 0..adj.len() {
        if !keep[start] || seen[start] {
            continue;
        }
        components += 1;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            for &y in &adj[x] {
                if keep[y] && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    components
}

#[derive(Debug, Clone)]
struct BagPlan {
    vertices: Vec<usize>,
    // pattern arcs inside the bag, as positions into `vertices`
    arcs: Vec<(usize, usize)>,
    children: Vec<ChildLink>,
}

#[derive(Debug, Clone)]
struct ChildLink {
    bag: usize,
    // for each position of the child bag: Some(parent position) if shared
    shared: Vec<Option<usize>>,
    // number of shared vertices; the message table has n^shared entries
    shared_count: usize,
}

/// `sum_{hom phi: H -> G} prod_u v_{phi(u)}` by dynamic programming over a
/// rooted tree decomposition of `H`.
#[derive(Debug, Clone)]
pub struct HomPoly {
    pattern_size: usize,
    target: Graph,
    plans: Vec<BagPlan>,
    // bags in post-order (children first)
    order: Vec<usize>,
}

pub fn hom_poly(h: &Graph, g: &Graph, td: &TreeDecomposition, limits: &Limits) -> Result<HomPoly> {
    td.validate(h)?;
    if h.n == 0 {
        return Err(Error::domain("pattern graph has no vertices"));
    }
    let n = g.n as u128;
    let biggest = td.bags.iter().map(Vec::len).max().unwrap_or(0);
    let entries = n.checked_pow(biggest as u32).unwrap_or(u128::MAX);
    if entries > limits.table_entries {
        return Err(Error::budget("homomorphism table entries", entries, limits.table_entries));
    }
    let b = td.bags.len();
    let mut adj = vec![Vec::new(); b];
    for &(x, y) in &td.edges {
        adj[x].push(y);
        adj[y].push(x);
    }
    let mut parent = vec![usize::MAX; b];
    let mut order = Vec::with_capacity(b);
    let mut stack = vec![(0usize, false)];
    let mut visited = vec![false; b];
    visited[0] = true;
    while let Some((x, done)) = stack.pop() {
        if done {
            order.push(x);
            continue;
        }
        stack.push((x, true));
        for &y in &adj[x] {
            if !visited[y] {
                visited[y] = true;
                parent[y] = x;
                stack.push((y, false));
            }
        }
    }
    let mut plans: Vec<BagPlan> = td
        .bags
        .iter()
        .map(|bag| {
            let pos = |u: usize| bag.iter().position(|&w| w == u);
            let arcs = h
                .arcs()
                .filter_map(|(u, v)| Some((pos(u)?, pos(v)?)))
                .collect();
            BagPlan { vertices: bag.clone(), arcs, children: Vec::new() }
        })
        .collect();
    for c in 0..b {
        if parent[c] == usize::MAX {
            continue;
        }
        let p = parent[c];
        let shared: Vec<Option<usize>> = td.bags[c]
            .iter()
            .map(|u| td.bags[p].iter().position(|w| w == u))
            .collect();
        let shared_count = shared.iter().flatten().count();
        plans[p].children.push(ChildLink { bag: c, shared, shared_count });
    }
    Ok(HomPoly { pattern_size: h.n, target: g.clone(), plans, order })
}

/// Decodes a mixed-radix index into vertex images.
fn decode(mut idx: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut() {
        *slot = idx % n;
        idx /= n;
    }
}

impl HomPoly {
    fn run_with<T: Clone>(
        &self,
        point: &[T],
        zero: &T,
        one: &T,
        add: impl Fn(&T, &T) -> Option<T>,
        mul: impl Fn(&T, &T) -> Option<T>,
    ) -> Option<T> {
        let n = self.target.n;
        if n == 0 {
            return Some(zero.clone());
        }
        let mut tables: Vec<Option<Vec<T>>> = vec![None; self.plans.len()];
        // messages[c] is the table of child c summed onto its shared vertices
        let mut messages: Vec<Option<Vec<T>>> = vec![None; self.plans.len()];
        let mut images = Vec::new();
        let mut shared_images = Vec::new();
        for &t in &self.order {
            let plan = &self.plans[t];
            let size = n.pow(plan.vertices.len() as u32);
            let mut table = vec![zero.clone(); size];
            images.resize(plan.vertices.len(), 0);
            'assign: for (idx, slot) in table.iter_mut().enumerate() {
                decode(idx, n, &mut images);
                for &(a, b) in &plan.arcs {
                    if !self.target.has_edge(images[a], images[b]) {
                        continue 'assign;
                    }
                }
                let mut value = one.clone();
                for link in &plan.children {
                    let msg = messages[link.bag].as_ref().expect("children are processed first");
                    // shared vertices appear in the message index in child order
                    let mut key = 0usize;
                    let mut radix = 1usize;
                    for &p in link.shared.iter().flatten() {
                        key += images[p] * radix;
                        radix *= n;
                    }
                    value = mul(&value, &msg[key])?;
                }
                *slot = value;
            }
            if let Some(link) = self.plans.iter().flat_map(|p| p.children.iter()).find(|l| l.bag == t) {
                let mut msg = vec![zero.clone(); n.pow(link.shared_count as u32)];
                shared_images.resize(plan.vertices.len(), 0);
                for (idx, value) in table.iter().enumerate() {
                    decode(idx, n, &mut shared_images);
                    let mut key = 0usize;
                    let mut radix = 1usize;
                    let mut weight = value.clone();
                    for (pos, s) in link.shared.iter().enumerate() {
                        match s {
                            Some(_) => {
                                key += shared_images[pos] * radix;
                                radix *= n;
                            }
                            None => weight = mul(&weight, &point[shared_images[pos]])?,
                        }
                    }
                    msg[key] = add(&msg[key], &weight)?;
                }
                messages[t] = Some(msg);
            } else {
                tables[t] = Some(table);
            }
        }
        let root = *self.order.last().expect("at least one bag");
        let table = tables[root].take().expect("root table");
        let root_len = self.plans[root].vertices.len();
        images.resize(root_len, 0);
        let mut total = zero.clone();
        for (idx, value) in table.iter().enumerate() {
            decode(idx, n, &mut images);
            let mut w = value.clone();
            for &u in &images {
                w = mul(&w, &point[u])?;
            }
            total = add(&total, &w)?;
        }
        Some(total)
    }
}

impl Kernel for HomPoly {
    fn run<T: Scalar>(&self, point: &[T]) -> Option<T> {
        self.run_with(point, &T::zero(), &T::one(), |a, b| a.add(b), |a, b| a.mul(b))
    }
}

impl BlackBoxPolynomial for HomPoly {
    fn nvars(&self) -> usize {
        self.target.n
    }
    fn degree(&self) -> usize {
        self.pattern_size
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        check_point(self.target.n, point.len());
        eval_exact(self, point)
    }
}

/// Black box over an explicit polynomial.
#[derive(Debug, Clone)]
pub struct SparseBlackBox {
    poly: SparsePolynomial,
}

pub fn sparse_blackbox(f: &SparsePolynomial) -> SparseBlackBox {
    SparseBlackBox { poly: f.clone() }
}

impl SparseBlackBox {
    pub fn polynomial(&self) -> &SparsePolynomial {
        &self.poly
    }
}

impl BlackBoxPolynomial for SparseBlackBox {
    fn nvars(&self) -> usize {
        self.poly.nvars()
    }
    fn degree(&self) -> usize {
        self.poly.degree()
    }
    fn eval(&self, point: &[Rational]) -> Rational {
        check_point(self.poly.nvars(), point.len());
        self.poly.eval(point)
    }
}

impl GfBlackBox for SparseBlackBox {
    fn nvars(&self) -> usize {
        self.poly.nvars()
    }
    fn degree(&self) -> usize {
        self.poly.degree()
    }
    /// Coefficients are mapped into GF(2) by the parity of their numerators;
    /// callers should pass integer coefficients.
    fn eval_gf(&self, field: &Gf2m, point: &[u64]) -> u64 {
        check_point(self.poly.nvars(), point.len());
        let mut total = 0u64;
        for (e, c) in self.poly.terms() {
            if field.from_parity(c.numer()) == 0 {
                continue;
            }
            let mut term = 1u64;
            for (&x, &k) in point.iter().zip(e) {
                if k > 0 {
                    term = field.mul(term, field.pow(x, k as u128));
                }
            }
            total = field.add(total, term);
        }
        total
    }
}
