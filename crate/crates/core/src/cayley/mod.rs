//! Truncated Cayley graphs built by breadth-first search.
//!
//! [`build_g`] keeps the first `N` group elements met by a FIFO search that
//! expands generators in alphabet order, with every Cayley edge between
//! retained vertices. [`build_h`] lists states `(g, s)` (element, last
//! letter read) along the same search, so that walks from the root spell
//! exactly the freely reduced paths inside a truncated Cayley graph.

mod checkpoint;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupId};
use crate::words::{Symbol, Word};

pub use checkpoint::FORMAT_VERSION;

/// Default cap on retained vertices.
pub const DEFAULT_VERTEX_BUDGET: usize = 10_000_000;
/// Default cap on the bytes held by the canonical-key table during a build.
pub const DEFAULT_KEY_BYTES_BUDGET: usize = 2_000_000_000;

/// Tag stored as the last letter of the root state of an H graph.
pub const NO_SYMBOL: u8 = u8::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// Cayley graph vertices are group elements.
    G,
    /// Vertices are (element, last letter) states; edges never backtrack.
    H,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::G => "G",
            GraphKind::H => "H",
        }
    }
}

impl std::str::FromStr for GraphKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "G" | "g" => Ok(GraphKind::G),
            "H" | "h" => Ok(GraphKind::H),
            other => Err(Error::Parse(format!("unknown graph kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_vertices: usize,
    pub max_key_bytes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_vertices: DEFAULT_VERTEX_BUDGET,
            max_key_bytes: DEFAULT_KEY_BYTES_BUDGET,
        }
    }
}

/// Concatenated bit-packed words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct WitnessStore {
    bits_per_symbol: u32,
    blocks: Vec<u64>,
    /// Symbol offsets; `starts[i]..starts[i + 1]` is word `i`.
    starts: Vec<u64>,
    /// End of the word being appended.
    end: u64,
}

impl WitnessStore {
    fn new(bits_per_symbol: u32) -> Self {
        WitnessStore {
            bits_per_symbol,
            blocks: Vec::new(),
            starts: vec![0],
            end: 0,
        }
    }

    fn word_len(&self, i: usize) -> usize {
        (self.starts[i + 1] - self.starts[i]) as usize
    }

    fn symbol_at(&self, pos: u64) -> u8 {
        let bit = pos * self.bits_per_symbol as u64;
        let (block, offset) = ((bit / 64) as usize, bit % 64);
        let mask = (1u64 << self.bits_per_symbol) - 1;
        // symbol widths divide 64 for alphabets up to 16 letters only, so a
        // symbol may straddle two blocks
        let mut v = self.blocks[block] >> offset;
        if offset + self.bits_per_symbol as u64 > 64 {
            v |= self.blocks[block + 1] << (64 - offset);
        }
        (v & mask) as u8
    }

    fn push_symbol(&mut self, s: u8) {
        let bit = self.end * self.bits_per_symbol as u64;
        let (block, offset) = ((bit / 64) as usize, bit % 64);
        while self.blocks.len() <= ((bit + self.bits_per_symbol as u64 - 1) / 64) as usize {
            self.blocks.push(0);
        }
        self.blocks[block] |= (s as u64) << offset;
        if offset + self.bits_per_symbol as u64 > 64 {
            self.blocks[block + 1] |= (s as u64) >> (64 - offset);
        }
        self.end += 1;
    }

    fn finish_word(&mut self) {
        self.starts.push(self.end);
    }

    /// Appends `word(parent) · s`.
    fn push_extension(&mut self, parent: Option<usize>, s: Option<u8>) {
        if let Some(p) = parent {
            for pos in self.starts[p]..self.starts[p + 1] {
                let sym = self.symbol_at(pos);
                self.push_symbol(sym);
            }
        }
        if let Some(s) = s {
            self.push_symbol(s);
        }
        self.finish_word();
    }

    /// Appends `tail` to the open word and closes it.
    fn finish_word_from(&mut self, tail: &[u8]) {
        for &s in tail {
            self.push_symbol(s);
        }
        self.finish_word();
    }

    fn symbols(&self, i: usize) -> Vec<u8> {
        (self.starts[i]..self.starts[i + 1])
            .map(|pos| self.symbol_at(pos))
            .collect()
    }
}

/// Compressed sparse rows: out-neighbours of `v` are
/// `targets[offsets[v]..offsets[v + 1]]`, with matching generator labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csr {
    pub offsets: Vec<u64>,
    pub targets: Vec<u32>,
    pub labels: Vec<u8>,
}

impl Csr {
    pub fn empty() -> Csr {
        Csr {
            offsets: vec![0],
            targets: Vec::new(),
            labels: Vec::new(),
        }
    }

    /// Builds rows from an unlabeled edge list (labels are all zero).
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Csr> {
        let mut rows = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) outside a graph on {n} vertices"
                )));
            }
            rows[u as usize].push(v);
        }
        let mut csr = Csr::empty();
        for row in rows {
            for v in row {
                csr.targets.push(v);
                csr.labels.push(0);
            }
            csr.offsets.push(csr.targets.len() as u64);
        }
        Ok(csr)
    }

    pub fn vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edges(&self) -> usize {
        self.targets.len()
    }

    pub fn row(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn row_labels(&self, v: usize) -> &[u8] {
        &self.labels[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        (self.offsets[v + 1] - self.offsets[v]) as usize
    }

    /// Induced subgraph on the first `n` vertices.
    pub fn prefix(&self, n: usize) -> Csr {
        let mut out = Csr::empty();
        for v in 0..n.min(self.vertices()) {
            for (&t, &l) in self.row(v).iter().zip(self.row_labels(v)) {
                if (t as usize) < n {
                    out.targets.push(t);
                    out.labels.push(l);
                }
            }
            out.offsets.push(out.targets.len() as u64);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedGraph {
    pub group: GroupId,
    pub kind: GraphKind,
    pub(crate) witnesses: WitnessStore,
    /// Last letter per vertex for kind H ([`NO_SYMBOL`] at the root); empty for G.
    pub(crate) last: Vec<u8>,
    /// Vertices whose element is the identity: vertex 0 for G, the
    /// identity states for H.
    pub(crate) identity_vertices: Vec<u32>,
    pub adjacency: Csr,
    /// Prefix sizes at which ladder values are requested.
    pub checkpoints: Vec<usize>,
    /// Every vertex of depth at most this was retained.
    pub(crate) covered: usize,
}

impl TruncatedGraph {
    pub fn vertices(&self) -> usize {
        self.adjacency.vertices()
    }

    pub fn edges(&self) -> usize {
        self.adjacency.edges()
    }

    /// Word reaching vertex `v`: the BFS discovery word for kind G; for kind
    /// H the discovery word of the state's predecessor followed by its last
    /// letter.
    pub fn witness(&self, v: usize) -> Word {
        let syms: Vec<Symbol> = self.witnesses.symbols(v).into_iter().map(Symbol::new).collect();
        Word::from_symbols(&self.group.alphabet(), &syms).expect("stored symbols are in range")
    }

    /// Witness length. For kind G this is the word length of the element.
    pub fn depth(&self, v: usize) -> usize {
        self.witnesses.word_len(v)
    }

    pub fn last_symbol(&self, v: usize) -> Option<Symbol> {
        match self.kind {
            GraphKind::G => None,
            GraphKind::H => match self.last[v] {
                NO_SYMBOL => None,
                s => Some(Symbol::new(s)),
            },
        }
    }

    pub fn element(&self, v: usize) -> GroupElement {
        self.group.evaluate(&self.witness(v))
    }

    pub fn identity_vertices(&self) -> &[u32] {
        &self.identity_vertices
    }

    /// For kind G, the radius of the largest ball inside the graph. For
    /// kind H, the largest `R` such that every state whose element and
    /// predecessor both lie in that ball was retained.
    pub fn covered_radius(&self) -> usize {
        self.covered
    }

    /// Induced subgraph on the first `n` vertices (a BFS prefix).
    pub fn prefix(&self, n: usize) -> TruncatedGraph {
        let n = n.min(self.vertices());
        let mut witnesses = WitnessStore::new(self.witnesses.bits_per_symbol);
        for v in 0..n {
            for s in self.witnesses.symbols(v) {
                witnesses.push_symbol(s);
            }
            witnesses.finish_word();
        }
        TruncatedGraph {
            group: self.group,
            kind: self.kind,
            witnesses,
            last: self.last.iter().take(n).copied().collect(),
            identity_vertices: self
                .identity_vertices
                .iter()
                .copied()
                .filter(|&v| (v as usize) < n)
                .collect(),
            adjacency: self.adjacency.prefix(n),
            checkpoints: self.checkpoints.iter().copied().filter(|&c| c <= n).collect(),
            covered: match self.kind {
                _ if n == self.vertices() => self.covered,
                GraphKind::G if self.depth(n) > self.depth(n - 1) => self.covered.min(self.depth(n - 1)),
                GraphKind::G => self.covered.min(self.depth(n - 1) - 1),
                // a state's witness is at most one longer than the layer
                // of the element that introduced it
                GraphKind::H => self.covered.min(self.depth(n - 1).saturating_sub(2)),
            },
        }
    }

    /// Number of walks of each length `0..=max_len` from vertex 0 that end
    /// on an identity vertex. For kind G these are the returns `r_{N,n}`;
    /// for kind H the freely reduced returns `p_{N,n}`.
    pub fn root_return_counts(&self, max_len: usize) -> Result<Vec<u128>> {
        let n = self.vertices();
        let mut target = vec![false; n];
        for &v in &self.identity_vertices {
            target[v as usize] = true;
        }
        let mut cur = vec![0u128; n];
        cur[0] = 1;
        let mut out = Vec::with_capacity(max_len + 1);
        for len in 0..=max_len {
            out.push(
                cur.iter()
                    .zip(&target)
                    .filter(|(_, &t)| t)
                    .try_fold(0u128, |acc, (&c, _)| acc.checked_add(c))
                    .ok_or_else(|| Error::BudgetExceeded("walk count overflows u128".into()))?,
            );
            if len == max_len {
                break;
            }
            let mut next = vec![0u128; n];
            for (v, &c) in cur.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for &t in self.adjacency.row(v) {
                    let slot = &mut next[t as usize];
                    *slot = slot
                        .checked_add(c)
                        .ok_or_else(|| Error::BudgetExceeded("walk count overflows u128".into()))?;
                }
            }
            cur = next;
        }
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        checkpoint::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<TruncatedGraph> {
        checkpoint::decode(bytes)
    }
}

/// Stopping rule for a build: a vertex count, a depth limit, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limit {
    pub vertices: Option<usize>,
    pub depth: Option<usize>,
}

impl Limit {
    pub fn vertices(n: usize) -> Limit {
        Limit {
            vertices: Some(n),
            depth: None,
        }
    }

    pub fn depth(d: usize) -> Limit {
        Limit {
            vertices: None,
            depth: Some(d),
        }
    }
}

/// First `n` vertices of the breadth-first search of the Cayley graph.
pub fn build_g(g: GroupId, n: usize) -> Result<TruncatedGraph> {
    build(g, GraphKind::G, Limit::vertices(n), Budget::default())
}

/// First `n` states of the reduced-path graph, in element search order.
pub fn build_h(g: GroupId, n: usize) -> Result<TruncatedGraph> {
    build(g, GraphKind::H, Limit::vertices(n), Budget::default())
}

/// Builds a truncated graph.
///
/// For kind H the vertex limit counts states. The element search runs as
/// for kind G; expanding element `i` appends, for every edge `i -t-> j`
/// with `j < i`, the two states `(g_i, t⁻¹)` and `(g_j, t)`. The elements
/// that occur in states therefore fill a ball up to the last layer, and
/// a depth limit of `d` yields every state over the ball of radius `d`.
pub fn build(g: GroupId, kind: GraphKind, limit: Limit, budget: Budget) -> Result<TruncatedGraph> {
    if limit.vertices == Some(0) {
        return Err(Error::InvalidArgument("a graph needs at least one vertex".into()));
    }
    if let Some(n) = limit.vertices {
        if n > budget.max_vertices {
            return Err(Error::BudgetExceeded(format!(
                "{n} vertices requested, budget is {}",
                budget.max_vertices
            )));
        }
    }
    match (kind, limit.vertices) {
        (GraphKind::G, _) => search(g, limit, budget, |_, _| false).map(|(graph, _)| graph),
        (GraphKind::H, None) => {
            let (graph, _) = search(g, limit, budget, |_, _| false)?;
            Ok(states_over(&graph, usize::MAX))
        }
        (GraphKind::H, Some(n)) => {
            let mut states = 1usize;
            let element_limit = Limit {
                vertices: Some(budget.max_vertices),
                depth: limit.depth,
            };
            let (graph, expanded) = search(g, element_limit, budget, |v, row| {
                states += 2 * row.iter().filter(|&&j| (j as usize) < v).count();
                states >= n
            })?;
            if states < n && limit.depth.is_none() {
                return Err(Error::BudgetExceeded(format!(
                    "{n} states need more than {} elements",
                    budget.max_vertices
                )));
            }
            Ok(states_over(&graph.prefix(expanded), n))
        }
    }
}

/// Breadth-first search over group elements. `stop(v, row)` is called after
/// vertex `v` is expanded; returning true ends the search there. Returns
/// the graph and the number of expanded vertices (unexpanded vertices get
/// empty rows).
fn search(
    g: GroupId,
    limit: Limit,
    budget: Budget,
    mut stop: impl FnMut(usize, &[u32]) -> bool,
) -> Result<(TruncatedGraph, usize)> {
    let cap = limit.vertices.unwrap_or(usize::MAX).min(budget.max_vertices);
    let size = g.alphabet_size();

    // Elements are not kept: a vertex is re-derived from its witness when
    // it is expanded, which keeps memory at a few dozen bytes per vertex.
    let mut keys: HashMap<Box<[u8]>, u32> = HashMap::new();
    let mut key_bytes = 0usize;
    let mut witnesses = WitnessStore::new(g.alphabet().bits_per_symbol());
    let mut adjacency = Csr::empty();

    keys.insert(g.identity().key().into_bytes().into_boxed_slice(), 0);
    witnesses.push_extension(None, None);
    let mut count = 1usize;
    // the search is "closed" once no further vertex may be added
    let mut closed = count >= cap;
    // shallowest depth at which a vertex was turned away for lack of room
    let mut rejected_depth = usize::MAX;

    let alphabet = g.alphabet();
    let mut v = 0;
    while v < count {
        let syms: Vec<Symbol> = witnesses.symbols(v).into_iter().map(Symbol::new).collect();
        let x = g.evaluate(&Word::from_symbols(&alphabet, &syms).expect("stored symbols are in range"));
        let depth = witnesses.word_len(v);
        let inside = limit.depth.is_none_or(|d| depth < d);
        for t in 0..size as u8 {
            let key = g.apply_gen(&x, Symbol::new(t)).key().into_bytes().into_boxed_slice();
            let target = match keys.get(&key) {
                Some(&j) => Some(j),
                None if inside && !closed => {
                    key_bytes += key.len() + 32;
                    if key_bytes > budget.max_key_bytes {
                        return Err(Error::BudgetExceeded(format!(
                            "canonical keys exceed {} bytes",
                            budget.max_key_bytes
                        )));
                    }
                    let j = count as u32;
                    keys.insert(key, j);
                    witnesses.push_extension(Some(v), Some(t));
                    count += 1;
                    closed = count >= cap;
                    Some(j)
                }
                None => {
                    if closed && inside {
                        rejected_depth = rejected_depth.min(depth + 1);
                    }
                    None
                }
            };
            if let Some(j) = target {
                adjacency.targets.push(j);
                adjacency.labels.push(t);
            }
        }
        let row_start = adjacency.offsets[v] as usize;
        adjacency.offsets.push(adjacency.targets.len() as u64);
        if rejected_depth != usize::MAX && limit.vertices.is_none() {
            // a depth-limited build must not be cut short by the budget
            return Err(Error::BudgetExceeded(format!(
                "ball of depth {} exceeds {cap} vertices",
                limit.depth.unwrap_or(0)
            )));
        }
        v += 1;
        if stop(v - 1, &adjacency.targets[row_start..]) {
            break;
        }
    }
    let expanded = v;
    while adjacency.vertices() < count {
        adjacency.offsets.push(adjacency.targets.len() as u64);
    }
    let mut graph = TruncatedGraph {
        group: g,
        kind: GraphKind::G,
        witnesses,
        last: Vec::new(),
        identity_vertices: vec![0],
        adjacency,
        checkpoints: Vec::new(),
        covered: 0,
    };
    let max_depth = graph.depth(graph.vertices() - 1);
    graph.covered = max_depth.min(rejected_depth.saturating_sub(1));
    graph.checkpoints = geometric_checkpoints(graph.vertices(), 50);
    Ok((graph, expanded))
}

/// The first `max_states` states over a kind-G graph whose rows are all
/// complete, in the order described at [`build`].
fn states_over(graph: &TruncatedGraph, max_states: usize) -> TruncatedGraph {
    let csr = &graph.adjacency;
    let size = graph.group.alphabet_size();
    let inverse: Vec<u8> = (0..size as u8).map(|s| Symbol::new(s).inverse().index() as u8).collect();
    // (element, last letter) of every state; the root is (0, NO_SYMBOL)
    let mut states: Vec<(u32, u8)> = vec![(0, NO_SYMBOL)];
    let mut witnesses = WitnessStore::new(graph.witnesses.bits_per_symbol);
    witnesses.finish_word_from(&[]);
    let mut state_of = vec![u32::MAX; csr.vertices() * size];
    // elements whose states were all emitted; ball radius bookkeeping
    let mut complete = 1;
    'outer: for i in 0..csr.vertices() {
        for (&j, &t) in csr.row(i).iter().zip(csr.row_labels(i)) {
            if j as usize >= i {
                continue;
            }
            for (element, letter, pred) in [(i as u32, inverse[t as usize], j as usize), (j, t, i)] {
                if states.len() >= max_states {
                    break 'outer;
                }
                state_of[element as usize * size + letter as usize] = states.len() as u32;
                states.push((element, letter));
                for p in graph.witnesses.symbols(pred) {
                    witnesses.push_symbol(p);
                }
                witnesses.finish_word_from(&[letter]);
            }
        }
        complete = i + 1;
    }

    let mut adjacency = Csr::empty();
    let mut last = Vec::with_capacity(states.len());
    let mut identity_vertices = Vec::new();
    for (k, &(element, letter)) in states.iter().enumerate() {
        last.push(letter);
        if element == 0 {
            identity_vertices.push(k as u32);
        }
        let e = element as usize;
        for (&w, &l) in csr.row(e).iter().zip(csr.row_labels(e)) {
            if letter != NO_SYMBOL && l == inverse[letter as usize] {
                continue;
            }
            let target = state_of[w as usize * size + l as usize];
            if target != u32::MAX {
                adjacency.targets.push(target);
                adjacency.labels.push(l);
            }
        }
        adjacency.offsets.push(adjacency.targets.len() as u64);
    }
    // a state over elements of depth at most R is present once every
    // element of the ball of radius R has been processed
    let covered = if complete == csr.vertices() {
        graph.covered
    } else {
        let next = graph.depth(complete);
        graph.covered.min(next.saturating_sub(1))
    };
    let mut h = TruncatedGraph {
        group: graph.group,
        kind: GraphKind::H,
        witnesses,
        last,
        identity_vertices,
        adjacency,
        checkpoints: Vec::new(),
        covered,
    };
    h.checkpoints = geometric_checkpoints(h.vertices(), 50);
    h
}

/// Geometric grid of prefix sizes with `per_decade` points per factor of
/// ten, always ending at `n`.
pub fn geometric_checkpoints(n: usize, per_decade: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut i = 0u32;
    loop {
        let v = 10f64.powf(i as f64 / per_decade as f64).round() as usize;
        if v >= n {
            break;
        }
        if out.last() != Some(&v) {
            out.push(v);
        }
        i += 1;
    }
    out.push(n);
    out
}

/// Non-backtracking graph of a kind-G graph: one state per edge `v → w`
/// (labelled by its generator), plus a root, with `(v→w) → (w→x)` whenever
/// the second label is not the inverse of the first. Walks from the root
/// are the freely reduced paths from the identity inside `graph`. States
/// are ordered as in [`build`].
pub fn reduced_path_graph(graph: &TruncatedGraph) -> Result<TruncatedGraph> {
    if graph.kind != GraphKind::G {
        return Err(Error::InvalidArgument("reduced_path_graph needs a kind-G graph".into()));
    }
    Ok(states_over(graph, usize::MAX))
}
