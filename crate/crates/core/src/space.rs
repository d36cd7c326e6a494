//! Finite truncations of pointed proper metric spaces.
//!
//! Every space stores its distances as integer ticks of a rational `unit`.
//! Graph-generated spaces (lattices, trees, sampled lines, JSON graphs) have
//! unit-length edges measured in ticks, so hop counts are tick counts.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_ticks, qgcd, qi, strict_ticks, Q};

/// Default cap on the number of points a generator may produce.
pub const DEFAULT_POINT_LIMIT: usize = 20_000_000;
/// Graph and explicit spaces store a full distance matrix.
pub const MATRIX_POINT_LIMIT: usize = 6_000;

/// A finite metric domain with quantized distances: spaces, subsets and
/// cylinders all implement it, so every verifier works on all three.
pub trait Domain: Send + Sync {
    fn len(&self) -> usize;
    fn unit(&self) -> Q;
    fn dist_ticks(&self, i: usize, j: usize) -> u64;
    fn norm_ticks(&self, i: usize) -> u64;
    /// Identifies the domain for signature checks between samples.
    fn signature(&self) -> String;
    /// Smallest tick value at or beyond the interior radius.
    fn interior_ticks(&self) -> u64;
    fn max_norm_ticks(&self) -> u64 {
        (0..self.len()).map(|i| self.norm_ticks(i)).max().unwrap_or(0)
    }
    /// Every point within `ticks` of `i`, including `i` itself.
    fn close_points(&self, i: usize, ticks: u64, out: &mut Vec<usize>) {
        out.clear();
        for j in 0..self.len() {
            if self.dist_ticks(i, j) <= ticks {
                out.push(j);
            }
        }
    }
    /// Points whose norm lies in `[lo, hi)` ticks.
    fn shell_points(&self, lo: u64, hi: u64, out: &mut Vec<usize>) {
        out.clear();
        for i in 0..self.len() {
            let n = self.norm_ticks(i);
            if n >= lo && n < hi {
                out.push(i);
            }
        }
    }
    fn describe_point(&self, i: usize) -> String {
        format!("#{i}")
    }
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How a bundled space was generated, so JSON files can rebuild structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Generator {
    Grid { dim: usize, radius: u32 },
    Tree { arity: usize, depth: u32 },
    Line { step: Q, radius: Q },
    HalfLine { step: Q, radius: Q },
}

#[derive(Clone, Debug)]
pub struct Grid {
    dim: usize,
    radius: u32,
    coords: Vec<i32>,
    /// `cum[d][m]`: number of points of the l1 ball of radius `m` in `Z^d`.
    cum: Vec<Vec<u64>>,
}

#[derive(Clone, Debug)]
pub struct Tree {
    arity: usize,
    depth: u32,
}

#[derive(Clone, Debug)]
pub struct Line {
    /// Index of the point `0`; point `i` sits at `(i - origin) * step`.
    origin: usize,
    count: usize,
}

#[derive(Clone, Debug)]
pub struct GraphMetric {
    names: Vec<String>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    dist: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct ExplicitMetric {
    names: Vec<String>,
    dist: Vec<u64>,
}

#[derive(Clone, Debug)]
pub enum Kind {
    Grid(Grid),
    Tree(Tree),
    Line(Line),
    Graph(GraphMetric),
    Explicit(ExplicitMetric),
}

#[derive(Clone, Debug)]
pub struct Space {
    label: String,
    kind: Kind,
    unit: Q,
    r_max: Q,
    basepoint: usize,
    norms: Vec<u32>,
    generator: Option<Generator>,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({} points)", self.label, self.len())
    }
}

fn ball_count_table(dim: usize, radius: u32, limit: usize) -> Result<Vec<Vec<u64>>> {
    let r = radius as usize;
    let mut count = vec![vec![0u128; r + 1]; dim + 1];
    count[0].iter_mut().for_each(|c| *c = 1);
    for d in 1..=dim {
        let mut below = 0u128;
        for m in 0..=r {
            count[d][m] = count[d - 1][m] + 2 * below;
            below += count[d - 1][m];
            if count[d][m] > u64::MAX as u128 / 4 {
                return Err(Error::capacity("grid sphere", count[d][m], limit as u128));
            }
        }
    }
    // count[d][m] is the size of the d-dimensional ball of radius m.
    let total = count[dim][r];
    if total > limit as u128 {
        return Err(Error::capacity(format!("grid({dim},{radius})"), total, limit as u128));
    }
    Ok(count
        .iter()
        .map(|row| {
            let mut acc = 0u64;
            row.iter()
                .map(|&c| {
                    acc += c as u64;
                    acc
                })
                .collect()
        })
        .collect())
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn coords(&self, i: usize) -> &[i32] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn cum(&self, d: usize, m: i64) -> u64 {
        if m < 0 {
            0
        } else {
            self.cum[d][m as usize]
        }
    }

    /// Lexicographic rank of a lattice point, or `None` outside the ball.
    pub fn index_of(&self, x: &[i32]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let norm: i64 = x.iter().map(|v| v.unsigned_abs() as i64).sum();
        if norm > self.radius as i64 {
            return None;
        }
        let mut rem = self.radius as i64;
        let mut acc = 0u64;
        for (k, &v) in x.iter().enumerate() {
            let d = self.dim - k - 1;
            let v = v as i64;
            // Points whose k-th coordinate u < v, with |u| <= rem.
            if v > -rem {
                let hi = (v - 1).min(-1);
                acc += self.cum(d, rem + hi);
            }
            if v >= 1 {
                acc += self.cum(d, rem) - self.cum(d, rem - v);
            }
            rem -= v.abs();
        }
        Some(acc as usize)
    }

    fn dist(&self, i: usize, j: usize) -> u64 {
        self.coords(i)
            .iter()
            .zip(self.coords(j))
            .map(|(a, b)| (a - b).unsigned_abs() as u64)
            .sum()
    }

    fn neighbors(&self, i: usize, norm: u32, out: &mut Vec<usize>) {
        let mut x: Vec<i32> = self.coords(i).to_vec();
        for k in 0..self.dim {
            for delta in [-1i32, 1] {
                let old = x[k];
                let new = old + delta;
                let new_norm = norm as i64 - old.unsigned_abs() as i64 + new.unsigned_abs() as i64;
                if new_norm <= self.radius as i64 {
                    x[k] = new;
                    out.push(self.index_of(&x).expect("neighbor inside ball"));
                    x[k] = old;
                }
            }
        }
    }
}

impl Tree {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        (i > 0).then(|| (i - 1) / self.arity)
    }

    pub fn child(&self, i: usize, c: usize) -> usize {
        i * self.arity + 1 + c
    }
}

impl Space {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn generator(&self) -> Option<&Generator> {
        self.generator.as_ref()
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn r_max(&self) -> Q {
        self.r_max
    }

    /// `ceil(3 R_max / 4)`: asymptotic claims are certified only inside it.
    pub fn interior_radius(&self) -> Q {
        qi((self.r_max * qi(3) / qi(4)).ceil().to_integer())
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.kind {
            Kind::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn tree(&self) -> Option<&Tree> {
        match &self.kind {
            Kind::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_line(&self) -> bool {
        matches!(self.kind, Kind::Line(_))
    }

    /// Graph kinds have unit-tick edges and support breadth-first search.
    pub fn is_graph(&self) -> bool {
        !matches!(self.kind, Kind::Explicit(_))
    }

    pub fn dist(&self, i: usize, j: usize) -> Q {
        from_ticks(self.dist_ticks(i, j), self.unit)
    }

    pub fn norm(&self, i: usize) -> Q {
        from_ticks(self.norms[i] as u64, self.unit)
    }

    pub fn norms(&self) -> &[u32] {
        &self.norms
    }

    /// Appends the graph neighbors of `i`; explicit spaces have none.
    pub fn neighbors(&self, i: usize, out: &mut Vec<usize>) {
        match &self.kind {
            Kind::Grid(g) => g.neighbors(i, self.norms[i], out),
            Kind::Tree(t) => {
                if let Some(p) = t.parent(i) {
                    out.push(p);
                }
                if self.norms[i] < t.depth {
                    out.extend((0..t.arity).map(|c| t.child(i, c)));
                }
            }
            Kind::Line(l) => {
                if i > 0 {
                    out.push(i - 1);
                }
                if i + 1 < l.count {
                    out.push(i + 1);
                }
            }
            Kind::Graph(g) => out.extend(g.targets[g.offsets[i]..g.offsets[i + 1]].iter().map(|&v| v as usize)),
            Kind::Explicit(_) => {}
        }
    }

    /// Point at lattice coordinates `x`, for grids.
    pub fn grid_point(&self, x: &[i32]) -> Option<usize> {
        self.grid()?.index_of(x)
    }

    /// Point at position `k * step`, for sampled lines and half-lines.
    pub fn line_point(&self, k: i64) -> Option<usize> {
        match &self.kind {
            Kind::Line(l) => {
                let i = k + l.origin as i64;
                (0..l.count as i64).contains(&i).then_some(i as usize)
            }
            _ => None,
        }
    }

    /// Signed lattice position of a line point, in steps.
    pub fn line_position(&self, i: usize) -> Option<i64> {
        match &self.kind {
            Kind::Line(l) => Some(i as i64 - l.origin as i64),
            _ => None,
        }
    }

    /// Exact coordinate of a line point.
    pub fn line_value(&self, i: usize) -> Option<Q> {
        self.line_position(i).map(|k| self.unit * qi(k))
    }

    pub fn point_name(&self, i: usize) -> String {
        match &self.kind {
            Kind::Grid(g) => {
                let c: Vec<String> = g.coords(i).iter().map(|v| v.to_string()).collect();
                format!("({})", c.join(","))
            }
            Kind::Tree(_) => format!("node{i}"),
            Kind::Line(_) => format!("{}", self.line_value(i).unwrap()),
            Kind::Graph(g) => g.names[i].clone(),
            Kind::Explicit(e) => e.names[i].clone(),
        }
    }

    /// Undirected edges `(a, b)` with `a < b` of a graph space.
    pub fn graph_edges(&self) -> Option<Vec<(usize, usize)>> {
        let Kind::Graph(g) = &self.kind else { return None };
        let mut out = Vec::new();
        for a in 0..g.names.len() {
            for &b in &g.targets[g.offsets[a]..g.offsets[a + 1]] {
                if a < b as usize {
                    out.push((a, b as usize));
                }
            }
        }
        Some(out)
    }

    /// Exact diameter of a set of points.
    pub fn diameter_of(&self, members: &[u32]) -> u64 {
        if members.len() < 2 {
            return 0;
        }
        match &self.kind {
            Kind::Grid(g) => {
                // l1 diameter is the largest spread of a signed coordinate sum.
                let mut best = 0i64;
                for signs in 0..(1u32 << g.dim) {
                    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
                    for &m in members {
                        let s: i64 = g
                            .coords(m as usize)
                            .iter()
                            .enumerate()
                            .map(|(k, &v)| if signs >> k & 1 == 1 { -(v as i64) } else { v as i64 })
                            .sum();
                        lo = lo.min(s);
                        hi = hi.max(s);
                    }
                    best = best.max(hi - lo);
                }
                best as u64
            }
            Kind::Line(_) => (members[members.len() - 1] - members[0]) as u64,
            Kind::Tree(_) => {
                // Double sweep is exact for subsets of a tree metric.
                let far = |from: usize| {
                    members
                        .iter()
                        .map(|&m| (self.dist_ticks(from, m as usize), m as usize))
                        .max_by_key(|&(d, m)| (d, std::cmp::Reverse(m)))
                        .unwrap()
                };
                let (_, u) = far(members[0] as usize);
                far(u).0
            }
            _ => {
                let mut best = 0;
                for (a, &x) in members.iter().enumerate() {
                    for &y in &members[a + 1..] {
                        best = best.max(self.dist_ticks(x as usize, y as usize));
                    }
                }
                best
            }
        }
    }

    /// Breadth-first distances (ticks) from a set of sources, capped at `limit`
    /// ticks; unreached points stay at `u32::MAX`. `blocked` points are never entered.
    pub fn bfs_from(&self, sources: &[usize], limit: u64, blocked: Option<&dyn Fn(usize) -> bool>) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if blocked.is_some_and(|b| b(s)) || dist[s] == 0 {
                continue;
            }
            dist[s] = 0;
            queue.push_back(s);
        }
        let mut nb = Vec::new();
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du as u64 >= limit {
                continue;
            }
            nb.clear();
            self.neighbors(u, &mut nb);
            for &v in &nb {
                if dist[v] == u32::MAX && !blocked.is_some_and(|b| b(v)) {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn dist_impl(&self, i: usize, j: usize) -> u64 {
        match &self.kind {
            Kind::Grid(g) => g.dist(i, j),
            Kind::Tree(t) => {
                let (mut a, mut b) = (i, j);
                let mut steps = 0u64;
                while a != b {
                    if self.norms[a] >= self.norms[b] {
                        a = t.parent(a).unwrap();
                    } else {
                        b = t.parent(b).unwrap();
                    }
                    steps += 1;
                }
                steps
            }
            Kind::Line(_) => (i as i64 - j as i64).unsigned_abs(),
            Kind::Graph(g) => g.dist[i * self.norms.len() + j] as u64,
            Kind::Explicit(e) => e.dist[i * self.norms.len() + j],
        }
    }

    fn finish(label: String, kind: Kind, unit: Q, r_max: Q, basepoint: usize, generator: Option<Generator>) -> Self {
        let mut s = Space { label, kind, unit, r_max, basepoint, norms: Vec::new(), generator };
        let n = match &s.kind {
            Kind::Grid(g) => g.coords.len() / g.dim.max(1),
            Kind::Tree(t) => tree_size(t.arity, t.depth) as usize,
            Kind::Line(l) => l.count,
            Kind::Graph(g) => g.names.len(),
            Kind::Explicit(e) => e.names.len(),
        };
        s.norms = match &s.kind {
            Kind::Tree(t) => {
                let mut norms = vec![0u32; n];
                for i in 1..n {
                    norms[i] = norms[t.parent(i).unwrap()] + 1;
                }
                norms
            }
            Kind::Grid(g) => (0..n).map(|i| g.coords(i).iter().map(|v| v.unsigned_abs()).sum()).collect(),
            _ => (0..n).map(|i| s.dist_impl(i, basepoint) as u32).collect(),
        };
        s
    }
}

fn tree_size(arity: usize, depth: u32) -> u128 {
    let mut total = 0u128;
    let mut level = 1u128;
    for _ in 0..=depth {
        total += level;
        level = level.saturating_mul(arity as u128);
        if total > u64::MAX as u128 {
            break;
        }
    }
    total
}

impl Domain for Space {
    fn len(&self) -> usize {
        self.norms.len()
    }

    fn unit(&self) -> Q {
        self.unit
    }

    fn dist_ticks(&self, i: usize, j: usize) -> u64 {
        self.dist_impl(i, j)
    }

    fn norm_ticks(&self, i: usize) -> u64 {
        self.norms[i] as u64
    }

    fn signature(&self) -> String {
        format!("{}#{}", self.label, self.len())
    }

    fn interior_ticks(&self) -> u64 {
        strict_ticks(self.interior_radius(), self.unit)
    }

    fn max_norm_ticks(&self) -> u64 {
        self.norms.iter().copied().max().unwrap_or(0) as u64
    }

    fn close_points(&self, i: usize, ticks: u64, out: &mut Vec<usize>) {
        out.clear();
        match &self.kind {
            Kind::Line(l) => {
                let lo = i.saturating_sub(ticks as usize);
                let hi = (i + ticks as usize).min(l.count - 1);
                out.extend(lo..=hi);
            }
            Kind::Explicit(_) => {
                for j in 0..self.len() {
                    if self.dist_ticks(i, j) <= ticks {
                        out.push(j);
                    }
                }
            }
            _ => {
                let mut seen = HashSet::new();
                seen.insert(i);
                out.push(i);
                let mut frontier = vec![i];
                let mut nb = Vec::new();
                for _ in 0..ticks {
                    let mut next = Vec::new();
                    for &u in &frontier {
                        nb.clear();
                        self.neighbors(u, &mut nb);
                        for &v in &nb {
                            if seen.insert(v) {
                                next.push(v);
                                out.push(v);
                            }
                        }
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                out.sort_unstable();
            }
        }
    }

    fn describe_point(&self, i: usize) -> String {
        self.point_name(i)
    }
}

pub fn build_grid_space(dim: usize, radius: u32) -> Result<Arc<Space>> {
    build_grid_space_with_limit(dim, radius, DEFAULT_POINT_LIMIT)
}

pub fn build_grid_space_with_limit(dim: usize, radius: u32, limit: usize) -> Result<Arc<Space>> {
    if dim == 0 {
        return Err(Error::Precondition("grid dimension must be at least 1".into()));
    }
    let cum = ball_count_table(dim, radius, limit)?;
    let r = radius as usize;
    let total = (cum[dim][r] - if r > 0 { cum[dim][r - 1] } else { 0 }) as usize;
    let mut coords = Vec::with_capacity(total * dim);
    let mut x = vec![0i32; dim];
    fn rec(k: usize, rem: i32, x: &mut [i32], out: &mut Vec<i32>) {
        if k == x.len() {
            out.extend_from_slice(x);
            return;
        }
        for v in -rem..=rem {
            x[k] = v;
            rec(k + 1, rem - v.abs(), x, out);
        }
        x[k] = 0;
    }
    rec(0, radius as i32, &mut x, &mut coords);
    let grid = Grid { dim, radius, coords, cum };
    let origin = grid.index_of(&vec![0; dim]).unwrap();
    Ok(Arc::new(Space::finish(
        format!("grid({dim},{radius})"),
        Kind::Grid(grid),
        qi(1),
        qi(radius as i64),
        origin,
        Some(Generator::Grid { dim, radius }),
    )))
}

pub fn build_tree_space(arity: usize, depth: u32) -> Result<Arc<Space>> {
    build_tree_space_with_limit(arity, depth, DEFAULT_POINT_LIMIT)
}

pub fn build_tree_space_with_limit(arity: usize, depth: u32, limit: usize) -> Result<Arc<Space>> {
    if arity < 2 {
        return Err(Error::Precondition("tree arity must be at least 2".into()));
    }
    let n = tree_size(arity, depth);
    if n > limit as u128 {
        return Err(Error::capacity(format!("tree({arity},{depth})"), n, limit as u128));
    }
    Ok(Arc::new(Space::finish(
        format!("tree({arity},{depth})"),
        Kind::Tree(Tree { arity, depth }),
        qi(1),
        qi(depth as i64),
        0,
        Some(Generator::Tree { arity, depth }),
    )))
}

fn line_count(step: Q, radius: Q, limit: usize) -> Result<u64> {
    if step <= Q::zero() || step > qi(1) {
        return Err(Error::Precondition(format!("line step {step} must lie in (0,1]")));
    }
    if radius < Q::zero() {
        return Err(Error::Precondition("line radius must be nonnegative".into()));
    }
    let k = (radius / step).floor().to_integer();
    if k as u128 * 2 + 1 > limit as u128 {
        return Err(Error::capacity("sampled line", k as u128 * 2 + 1, limit as u128));
    }
    Ok(k as u64)
}

/// Multiples of `step` in `[-radius, radius]` with the absolute-value metric.
pub fn build_sampled_line(step: Q, radius: Q) -> Result<Arc<Space>> {
    let k = line_count(step, radius, DEFAULT_POINT_LIMIT)? as usize;
    Ok(Arc::new(Space::finish(
        format!("line({step},{radius})"),
        Kind::Line(Line { origin: k, count: 2 * k + 1 }),
        step,
        radius,
        k,
        Some(Generator::Line { step, radius }),
    )))
}

/// Multiples of `step` in `[0, radius]`: the truncated half-line target of rays
/// and projections.
pub fn build_half_line(step: Q, radius: Q) -> Result<Arc<Space>> {
    let k = line_count(step, radius, DEFAULT_POINT_LIMIT)? as usize;
    Ok(Arc::new(Space::finish(
        format!("halfline({step},{radius})"),
        Kind::Line(Line { origin: 0, count: k + 1 }),
        step,
        radius,
        0,
        Some(Generator::HalfLine { step, radius }),
    )))
}

pub fn build_from_generator(g: &Generator) -> Result<Arc<Space>> {
    match *g {
        Generator::Grid { dim, radius } => build_grid_space(dim, radius),
        Generator::Tree { arity, depth } => build_tree_space(arity, depth),
        Generator::Line { step, radius } => build_sampled_line(step, radius),
        Generator::HalfLine { step, radius } => build_half_line(step, radius),
    }
}

/// Word-metric space of an explicit connected graph.
pub fn build_graph_space(label: &str, names: Vec<String>, edges: &[(usize, usize)], basepoint: usize) -> Result<Arc<Space>> {
    let n = names.len();
    if n == 0 || basepoint >= n {
        return Err(Error::Malformed("graph needs points and a valid basepoint".into()));
    }
    if n > MATRIX_POINT_LIMIT {
        return Err(Error::capacity("graph distance matrix", n as u128, MATRIX_POINT_LIMIT as u128));
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a >= n || b >= n {
            return Err(Error::Malformed(format!("edge ({a},{b}) references a missing point")));
        }
        if a != b {
            adj[a].push(b as u32);
            adj[b].push(a as u32);
        }
    }
    let mut offsets = vec![0];
    let mut targets = Vec::new();
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
        targets.extend_from_slice(list);
        offsets.push(targets.len());
    }
    let mut graph = GraphMetric { names, offsets, targets, dist: Vec::new() };
    let probe = Space {
        label: String::new(),
        kind: Kind::Graph(graph.clone()),
        unit: qi(1),
        r_max: qi(0),
        basepoint,
        norms: vec![0; n],
        generator: None,
    };
    let mut dist = Vec::with_capacity(n * n);
    for s in 0..n {
        let row = probe.bfs_from(&[s], u64::MAX, None);
        if let Some(u) = row.iter().position(|&d| d == u32::MAX) {
            return Err(Error::Malformed(format!("graph is disconnected: point {u} unreachable")));
        }
        dist.extend_from_slice(&row);
    }
    graph.dist = dist;
    let r_max = (0..n).map(|i| graph.dist[i * n + basepoint]).max().unwrap_or(0);
    Ok(Arc::new(Space::finish(
        label.to_string(),
        Kind::Graph(graph),
        qi(1),
        qi(r_max as i64),
        basepoint,
        None,
    )))
}

/// Space from an explicit rational distance matrix, checked to be a metric.
pub fn build_explicit_space(label: &str, names: Vec<String>, matrix: &[Vec<Q>], basepoint: usize) -> Result<Arc<Space>> {
    let n = names.len();
    if n == 0 || basepoint >= n || matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
        return Err(Error::Malformed("distance matrix must be square with a valid basepoint".into()));
    }
    if n > MATRIX_POINT_LIMIT {
        return Err(Error::capacity("explicit distance matrix", n as u128, MATRIX_POINT_LIMIT as u128));
    }
    let mut unit = Q::zero();
    for row in matrix {
        for &d in row {
            if d < Q::zero() {
                return Err(Error::Malformed("negative distance".into()));
            }
            unit = qgcd(unit, d);
        }
    }
    if unit.is_zero() {
        unit = qi(1);
    }
    let mut dist = Vec::with_capacity(n * n);
    for (i, row) in matrix.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            if d != matrix[j][i] {
                return Err(Error::Malformed(format!("asymmetric distance between {i} and {j}")));
            }
            if (i == j) != d.is_zero() {
                return Err(Error::Malformed(format!("distance between {i} and {j} violates d(x,y)=0 iff x=y")));
            }
            dist.push((d / unit).to_integer().to_u64().unwrap());
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if dist[i * n + k] > dist[i * n + j] + dist[j * n + k] {
                    return Err(Error::Malformed(format!("triangle inequality fails at ({i},{j},{k})")));
                }
            }
        }
    }
    let r_max = (0..n).map(|i| dist[i * n + basepoint]).max().unwrap_or(0);
    Ok(Arc::new(Space::finish(
        label.to_string(),
        Kind::Explicit(ExplicitMetric { names, dist }),
        unit,
        unit * qi(r_max as i64),
        basepoint,
        None,
    )))
}

/// Sorted duplicate-free set of points of one space.
#[derive(Clone, Debug)]
pub struct PointSubset {
    space: Arc<Space>,
    members: Vec<u32>,
}

impl PartialEq for PointSubset {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) && self.members == other.members
    }
}

impl PointSubset {
    pub fn new(space: &Arc<Space>, mut members: Vec<u32>) -> Result<Self> {
        members.sort_unstable();
        members.dedup();
        if let Some(&m) = members.last() {
            if m as usize >= space.len() {
                return Err(Error::Precondition(format!("point {m} outside {}", space.label())));
            }
        }
        Ok(PointSubset { space: space.clone(), members })
    }

    /// Caller guarantees `members` is sorted, unique and in range.
    pub fn from_sorted(space: &Arc<Space>, members: Vec<u32>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        PointSubset { space: space.clone(), members }
    }

    pub fn full(space: &Arc<Space>) -> Self {
        PointSubset { space: space.clone(), members: (0..space.len() as u32).collect() }
    }

    pub fn empty(space: &Arc<Space>) -> Self {
        PointSubset { space: space.clone(), members: Vec::new() }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn into_members(self) -> Vec<u32> {
        self.members
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&(x as u32)).is_ok()
    }

    /// Position of ambient point `x` inside the subset.
    pub fn position(&self, x: usize) -> Option<usize> {
        self.members.binary_search(&(x as u32)).ok()
    }

    pub fn union(&self, other: &PointSubset) -> PointSubset {
        let mut m = self.members.clone();
        m.extend_from_slice(&other.members);
        m.sort_unstable();
        m.dedup();
        PointSubset { space: self.space.clone(), members: m }
    }

    pub fn difference(&self, other: &PointSubset) -> PointSubset {
        let m = self.members.iter().copied().filter(|&x| !other.contains(x as usize)).collect();
        PointSubset { space: self.space.clone(), members: m }
    }

    pub fn intersection(&self, other: &PointSubset) -> PointSubset {
        let m = self.members.iter().copied().filter(|&x| other.contains(x as usize)).collect();
        PointSubset { space: self.space.clone(), members: m }
    }

    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> PointSubset {
        let m = self.members.iter().copied().filter(|&x| keep(x as usize)).collect();
        PointSubset { space: self.space.clone(), members: m }
    }

    pub fn diameter_ticks(&self) -> u64 {
        self.space.diameter_of(&self.members)
    }

    pub fn diameter(&self) -> Q {
        from_ticks(self.diameter_ticks(), self.space.unit())
    }

    /// Member of least norm, ties to the lowest index.
    pub fn min_norm_member(&self) -> Option<usize> {
        self.members.iter().map(|&m| m as usize).min_by_key(|&m| (self.space.norm_ticks(m), m))
    }
}

impl Domain for PointSubset {
    fn len(&self) -> usize {
        self.members.len()
    }

    fn unit(&self) -> Q {
        self.space.unit()
    }

    fn dist_ticks(&self, i: usize, j: usize) -> u64 {
        self.space.dist_ticks(self.members[i] as usize, self.members[j] as usize)
    }

    fn norm_ticks(&self, i: usize) -> u64 {
        self.space.norm_ticks(self.members[i] as usize)
    }

    fn signature(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for &m in &self.members {
            h = (h ^ m as u64).wrapping_mul(0x100000001b3);
        }
        format!("{}|subset:{}:{h:016x}", self.space.signature(), self.members.len())
    }

    fn interior_ticks(&self) -> u64 {
        self.space.interior_ticks()
    }

    fn close_points(&self, i: usize, ticks: u64, out: &mut Vec<usize>) {
        let mut ambient = Vec::new();
        self.space.close_points(self.members[i] as usize, ticks, &mut ambient);
        out.clear();
        out.extend(ambient.into_iter().filter_map(|x| self.position(x)));
    }

    fn describe_point(&self, i: usize) -> String {
        self.space.point_name(self.members[i] as usize)
    }
}

/// Strict ball `{x : d(x, center) < r}`.
pub fn ball(space: &Arc<Space>, center: usize, r: Q) -> PointSubset {
    let bound = strict_ticks(r, space.unit());
    let members = if center == space.basepoint() {
        (0..space.len() as u32).filter(|&x| (space.norms[x as usize] as u64) < bound).collect()
    } else {
        (0..space.len() as u32).filter(|&x| space.dist_ticks(center, x as usize) < bound).collect()
    };
    PointSubset { space: space.clone(), members }
}

/// Annulus `B_p(R) \ B_p(r)` about the basepoint.
pub fn annulus(space: &Arc<Space>, r: Q, big_r: Q) -> Result<PointSubset> {
    if r > big_r {
        return Err(Error::Precondition(format!("annulus needs r <= R, got {r} > {big_r}")));
    }
    let lo = strict_ticks(r, space.unit());
    let hi = strict_ticks(big_r, space.unit());
    let members = (0..space.len() as u32)
        .filter(|&x| {
            let n = space.norms[x as usize] as u64;
            n >= lo && n < hi
        })
        .collect();
    Ok(PointSubset { space: space.clone(), members })
}

pub fn norm(space: &Space, x: usize) -> Q {
    space.norm(x)
}

/// A coarse ray: a point sequence from the basepoint with bounded steps and
/// nondecreasing norm, reaching the truncation boundary.
#[derive(Clone, Debug)]
pub struct Ray {
    space: Arc<Space>,
    points: Vec<u32>,
    step: u64,
    index: HashMap<u32, u32>,
    label: String,
}

impl Ray {
    pub fn new(space: &Arc<Space>, points: Vec<u32>, label: &str) -> Result<Self> {
        if points.first().map(|&p| p as usize) != Some(space.basepoint()) {
            return Err(Error::Precondition("ray must start at the basepoint".into()));
        }
        let mut step = 0;
        for w in points.windows(2) {
            let (a, b) = (w[0] as usize, w[1] as usize);
            step = step.max(space.dist_ticks(a, b));
            if space.norm_ticks(b) < space.norm_ticks(a) {
                return Err(Error::Precondition(format!("ray norm decreases at {}", space.point_name(b))));
            }
        }
        let last = space.norm_ticks(*points.last().unwrap() as usize);
        if last + step < space.max_norm_ticks() {
            return Err(Error::Precondition("ray stops short of the truncation radius".into()));
        }
        let mut index = HashMap::new();
        for (k, &p) in points.iter().enumerate() {
            index.entry(p).or_insert(k as u32);
        }
        Ok(Ray { space: space.clone(), points, step, index, label: label.to_string() })
    }

    /// Ray along coordinate `axis` of a grid, in direction `sign`.
    pub fn grid_axis(space: &Arc<Space>, axis: usize, sign: i32) -> Result<Self> {
        let g = space.grid().ok_or_else(|| Error::Precondition("axis rays need a grid".into()))?;
        if axis >= g.dim() || sign.abs() != 1 {
            return Err(Error::Precondition("bad axis or sign".into()));
        }
        let mut x = vec![0i32; g.dim()];
        let points = (0..=g.radius() as i32)
            .map(|k| {
                x[axis] = sign * k;
                g.index_of(&x).unwrap() as u32
            })
            .collect();
        let name = format!("{}{}-axis", if sign > 0 { "+" } else { "-" }, axis_name(axis));
        Ray::new(space, points, &name)
    }

    /// Tree ray always descending into child `c`.
    pub fn tree_branch(space: &Arc<Space>, c: usize) -> Result<Self> {
        let t = space.tree().ok_or_else(|| Error::Precondition("branch rays need a tree".into()))?;
        if c >= t.arity() {
            return Err(Error::Precondition("child index out of range".into()));
        }
        let mut points = vec![0u32];
        let mut v = 0usize;
        for _ in 0..t.depth() {
            v = t.child(v, c);
            points.push(v as u32);
        }
        Ray::new(space, points, &format!("branch{c}"))
    }

    /// Nonnegative or nonpositive half of a sampled line.
    pub fn line_half(space: &Arc<Space>, positive: bool) -> Result<Self> {
        let mut points = Vec::new();
        let mut k = 0i64;
        while let Some(p) = space.line_point(k) {
            points.push(p as u32);
            k += if positive { 1 } else { -1 };
        }
        if points.is_empty() {
            return Err(Error::Precondition("line rays need a sampled line".into()));
        }
        Ray::new(space, points, if positive { "+line" } else { "-line" })
    }

    /// The bundled default ray of a generated space.
    pub fn standard(space: &Arc<Space>) -> Result<Self> {
        match space.kind() {
            Kind::Grid(_) => Ray::grid_axis(space, 0, 1),
            Kind::Tree(_) => Ray::tree_branch(space, 0),
            Kind::Line(_) => Ray::line_half(space, true),
            _ => Err(Error::Precondition(format!("no bundled ray for {}", space.label()))),
        }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn points(&self) -> &[u32] {
        &self.points
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn step_ticks(&self) -> u64 {
        self.step
    }

    pub fn step(&self) -> Q {
        from_ticks(self.step, self.space.unit())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> usize {
        self.points[k] as usize
    }

    /// First ray parameter at which the ray visits `x`.
    pub fn parameter_of(&self, x: usize) -> Option<usize> {
        self.index.get(&(x as u32)).map(|&k| k as usize)
    }

    pub fn as_subset(&self) -> PointSubset {
        PointSubset::new(&self.space, self.points.clone()).unwrap()
    }
}

fn axis_name(axis: usize) -> String {
    match axis {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        k => format!("e{k}"),
    }
}
