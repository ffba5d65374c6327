//! Chimera qubit topology and the regular embedding patterns.
//!
//! The grid is `rows × cols` unit cells of 4 + 4 qubits. Inside a cell every
//! left-column qubit couples to every right-column qubit. Left-column qubit
//! `k` also couples to left-column qubit `k` of the cells directly above and
//! below; right-column qubit `k` couples to right-column qubit `k` of the
//! cells to its left and right. No qubit has more than six couplers.
//!
//! Qubit ids are `((row · cols + col) · 2 + side) · 4 + k` with side 0 for
//! the left column.
//!
//! A TRIAD over `c ≥ 6` chains uses `k = ⌈c/4⌉` blocks of four chains laid
//! over the lower triangle (diagonal included) of a `k × k` cell square.
//! Chain `j` of block `b` runs along the right column of row `b` from cell
//! column 0 to `b`, crosses to the left column in the diagonal cell and runs
//! down column `b` to the last row, so every chain has `k + 1` qubits and any
//! two chains meet in one cell. Up to five chains fit in a single cell.
//! Mirroring a TRIAD across the diagonal (swapping rows with columns and
//! left with right) gives an upper-triangle TRIAD; a lower and an upper TRIAD
//! interlock with a one-column offset, which is how the clustered pattern
//! packs pairs of clusters.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::qubo::Qubo;
use crate::{Error, Result};

pub const CELL_QUBITS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub u32);

impl std::fmt::Display for QubitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left = 0,
    Right = 1,
}

impl Side {
    fn flip(self) -> Self {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitCoord {
    pub row: usize,
    pub col: usize,
    pub side: Side,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    broken: BTreeSet<QubitId>,
}

impl Default for ChimeraGraph {
    /// The 12 × 12 grid (1152 qubits) with every qubit intact.
    fn default() -> Self {
        Self::new(12, 12)
    }
}

impl ChimeraGraph {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, broken: BTreeSet::new() }
    }

    pub fn with_broken(mut self, broken: impl IntoIterator<Item = QubitId>) -> Result<Self> {
        for q in broken {
            self.check(q)?;
            self.broken.insert(q);
        }
        Ok(self)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols * CELL_QUBITS
    }

    pub fn broken(&self) -> &BTreeSet<QubitId> {
        &self.broken
    }

    pub fn working_qubits(&self) -> usize {
        self.num_qubits() - self.broken.len()
    }

    pub fn is_broken(&self, q: QubitId) -> bool {
        self.broken.contains(&q)
    }

    fn check(&self, q: QubitId) -> Result<()> {
        if (q.0 as usize) < self.num_qubits() {
            Ok(())
        } else {
            Err(Error::QubitOutOfRange { qubit: q.0, rows: self.rows, cols: self.cols })
        }
    }

    pub fn qubit(&self, row: usize, col: usize, side: Side, k: usize) -> QubitId {
        debug_assert!(row < self.rows && col < self.cols && k < 4);
        QubitId((((row * self.cols + col) * 2 + side as usize) * 4 + k) as u32)
    }

    pub fn coord(&self, q: QubitId) -> QubitCoord {
        let i = q.0 as usize;
        let k = i % 4;
        let side = if (i / 4).is_multiple_of(2) { Side::Left } else { Side::Right };
        let cell = i / 8;
        QubitCoord { row: cell / self.cols, col: cell % self.cols, side, k }
    }

    /// Couplers of `q` ignoring the broken mask.
    fn structural_neighbors(&self, q: QubitId) -> Vec<QubitId> {
        let c = self.coord(q);
        let mut out: Vec<QubitId> = (0..4).map(|k| self.qubit(c.row, c.col, c.side.flip(), k)).collect();
        match c.side {
            Side::Left => {
                if c.row > 0 {
                    out.push(self.qubit(c.row - 1, c.col, Side::Left, c.k));
                }
                if c.row + 1 < self.rows {
                    out.push(self.qubit(c.row + 1, c.col, Side::Left, c.k));
                }
            }
            Side::Right => {
                if c.col > 0 {
                    out.push(self.qubit(c.row, c.col - 1, Side::Right, c.k));
                }
                if c.col + 1 < self.cols {
                    out.push(self.qubit(c.row, c.col + 1, Side::Right, c.k));
                }
            }
        }
        out
    }

    /// Working neighbors of `q`; a broken qubit has none.
    pub fn adjacency(&self, q: QubitId) -> Result<BTreeSet<QubitId>> {
        self.check(q)?;
        if self.is_broken(q) {
            return Ok(BTreeSet::new());
        }
        Ok(self.structural_neighbors(q).into_iter().filter(|n| !self.is_broken(*n)).collect())
    }

    /// Whether a working coupler joins `a` and `b`.
    pub fn are_adjacent(&self, a: QubitId, b: QubitId) -> bool {
        if self.check(a).is_err() || self.check(b).is_err() || self.is_broken(a) || self.is_broken(b) {
            return false;
        }
        self.structural_neighbors(a).contains(&b)
    }

    /// Every working coupler as `(low, high)`, ascending.
    pub fn edges(&self) -> Vec<(QubitId, QubitId)> {
        let mut out = Vec::new();
        for i in 0..self.num_qubits() as u32 {
            let q = QubitId(i);
            if self.is_broken(q) {
                continue;
            }
            for n in self.structural_neighbors(q) {
                if n > q && !self.is_broken(n) {
                    out.push((q, n));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Logical variable → ordered chain of physical qubits.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Embedding {
    pub chains: BTreeMap<usize, Vec<QubitId>>,
}

impl Embedding {
    pub fn from_chains(chains: impl IntoIterator<Item = Vec<QubitId>>) -> Self {
        Self { chains: chains.into_iter().enumerate().collect() }
    }

    pub fn chain(&self, var: usize) -> Option<&[QubitId]> {
        self.chains.get(&var).map(Vec::as_slice)
    }

    pub fn num_chains(&self) -> usize {
        self.chains.len()
    }

    /// One past the largest variable with a chain.
    pub fn num_vars(&self) -> usize {
        self.chains.keys().next_back().map_or(0, |v| v + 1)
    }

    pub fn qubit_count(&self) -> usize {
        self.chains.values().map(Vec::len).sum()
    }

    pub fn chain_lengths(&self) -> Vec<usize> {
        self.chains.values().map(Vec::len).collect()
    }

    /// Distinct unit cells touched by any chain.
    pub fn cells_used(&self, graph: &ChimeraGraph) -> usize {
        self.chains
            .values()
            .flatten()
            .map(|&q| {
                let c = graph.coord(q);
                (c.row, c.col)
            })
            .collect::<HashSet<_>>()
            .len()
    }

    /// Qubits in every touched cell, used or not.
    pub fn footprint_qubits(&self, graph: &ChimeraGraph) -> usize {
        self.cells_used(graph) * CELL_QUBITS
    }

    pub fn owner_of(&self) -> BTreeMap<QubitId, usize> {
        self.chains.iter().flat_map(|(&v, c)| c.iter().map(move |&q| (q, v))).collect()
    }

    pub fn to_doc(&self, graph: &ChimeraGraph) -> EmbeddingDoc {
        EmbeddingDoc {
            grid: [graph.rows(), graph.cols()],
            chains: self.chains.iter().map(|(&v, c)| (v, c.iter().map(|q| q.0).collect())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub grid: [usize; 2],
    pub chains: Vec<(usize, Vec<u32>)>,
}

impl EmbeddingDoc {
    pub fn embedding(&self) -> Embedding {
        Embedding { chains: self.chains.iter().map(|(v, c)| (*v, c.iter().map(|&q| QubitId(q)).collect())).collect() }
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn load_broken_mask(path: impl AsRef<std::path::Path>) -> Result<Vec<QubitId>> {
    let ids: Vec<u32> = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    Ok(ids.into_iter().map(QubitId).collect())
}

pub fn save_broken_mask(path: impl AsRef<std::path::Path>, graph: &ChimeraGraph) -> Result<()> {
    let ids: Vec<u32> = graph.broken().iter().map(|q| q.0).collect();
    std::fs::write(path, serde_json::to_string(&ids)? + "\n")?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Slot {
    row: usize,
    col: usize,
    side: Side,
    k: usize,
}

/// Chains in cell-relative coordinates over a `size × size` square.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Template {
    size: usize,
    chains: Vec<Vec<Slot>>,
}

impl Template {
    fn triad(num_chains: usize) -> Self {
        let slot = |row, col, side, k| Slot { row, col, side, k };
        if num_chains <= 5 {
            let mut chains = vec![vec![slot(0, 0, Side::Left, 0)], vec![slot(0, 0, Side::Right, 0)]];
            for k in 1..4 {
                chains.push(vec![slot(0, 0, Side::Left, k), slot(0, 0, Side::Right, k)]);
            }
            chains.truncate(num_chains);
            return Self { size: 1, chains };
        }
        let size = num_chains.div_ceil(4);
        let chains = (0..num_chains)
            .map(|i| {
                let (block, k) = (i / 4, i % 4);
                let across = (0..=block).map(|col| slot(block, col, Side::Right, k));
                let down = (block..size).map(|row| slot(row, block, Side::Left, k));
                across.chain(down).collect()
            })
            .collect();
        Self { size, chains }
    }

    fn transposed(&self) -> Self {
        let chains = self
            .chains
            .iter()
            .map(|c| c.iter().map(|s| Slot { row: s.col, col: s.row, side: s.side.flip(), k: s.k }).collect())
            .collect();
        Self { size: self.size, chains }
    }

    fn place(&self, graph: &ChimeraGraph, row: usize, col: usize) -> Vec<Vec<QubitId>> {
        self.chains
            .iter()
            .map(|c| c.iter().map(|s| graph.qubit(row + s.row, col + s.col, s.side, s.k)).collect())
            .collect()
    }
}

/// Cell square occupied by a TRIAD over `num_chains` chains.
pub fn triad_size(num_chains: usize) -> usize {
    Template::triad(num_chains).size
}

/// TRIAD over `num_chains` chains with its top-left cell at `anchor`
/// (`(row, col)`). Broken qubits are not avoided here; see
/// [`drop_broken_chains`] and [`fit_triad`].
pub fn triad_embedding(num_chains: usize, graph: &ChimeraGraph, anchor: (usize, usize)) -> Result<Embedding> {
    if num_chains == 0 {
        return Err(Error::InvalidParameter("a TRIAD needs at least one chain".into()));
    }
    let t = Template::triad(num_chains);
    let (row, col) = anchor;
    if row + t.size > graph.rows() || col + t.size > graph.cols() {
        return Err(Error::DoesNotFit {
            cluster: 0,
            reason: format!(
                "{num_chains} chains need {0}x{0} cells from cell ({row}, {col}) on a {1}x{2} grid",
                t.size,
                graph.rows(),
                graph.cols()
            ),
        });
    }
    Ok(Embedding::from_chains(t.place(graph, row, col)))
}

/// Removes every chain that touches a broken qubit; remaining chains keep
/// their variable ids.
pub fn drop_broken_chains(embedding: &Embedding, graph: &ChimeraGraph) -> Embedding {
    Embedding {
        chains: embedding
            .chains
            .iter()
            .filter(|(_, c)| c.iter().all(|q| !graph.is_broken(*q)))
            .map(|(&v, c)| (v, c.clone()))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClusterPlacement {
    pub anchor: (usize, usize),
    pub size: usize,
    /// Upper-triangle orientation, interlocked with the previous cluster.
    pub mirrored: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusteredLayout {
    pub embedding: Embedding,
    pub placements: Vec<ClusterPlacement>,
    /// Variable range of every cluster.
    pub ranges: Vec<std::ops::Range<usize>>,
}

/// One TRIAD per cluster, packed left to right in bands. Each lower-triangle
/// TRIAD is followed, when room allows, by a mirrored TRIAD shifted one cell
/// column to the right so that the two interlock.
pub fn clustered_layout(chains_per_cluster: &[usize], graph: &ChimeraGraph) -> Result<ClusteredLayout> {
    let mut chains = Vec::new();
    let mut placements = Vec::new();
    let mut ranges = Vec::new();
    let (mut band_top, mut band_height, mut next_col) = (0usize, 0usize, 0usize);
    let mut interlock: Option<usize> = None;

    for (i, &count) in chains_per_cluster.iter().enumerate() {
        if count == 0 {
            return Err(Error::DoesNotFit { cluster: i, reason: "cluster has no chains".into() });
        }
        let t = Template::triad(count);
        let size = t.size;
        let placement = loop {
            let rows_ok = band_top + size <= graph.rows();
            if let Some(c) = interlock.filter(|&c| rows_ok && c + size <= graph.cols()) {
                next_col = next_col.max(c + size);
                interlock = None;
                break ClusterPlacement { anchor: (band_top, c), size, mirrored: true };
            }
            if rows_ok && next_col + size <= graph.cols() {
                let p = ClusterPlacement { anchor: (band_top, next_col), size, mirrored: false };
                interlock = Some(next_col + 1);
                next_col += size;
                break p;
            }
            if band_height == 0 {
                return Err(Error::DoesNotFit {
                    cluster: i,
                    reason: format!(
                        "TRIAD of {count} chains needs {size}x{size} cells; {} rows left on a {}x{} grid",
                        graph.rows() - band_top.min(graph.rows()),
                        graph.rows(),
                        graph.cols()
                    ),
                });
            }
            band_top += band_height;
            band_height = 0;
            next_col = 0;
            interlock = None;
        };
        band_height = band_height.max(size);
        let (row, col) = placement.anchor;
        let placed = if placement.mirrored { t.transposed().place(graph, row, col) } else { t.place(graph, row, col) };
        ranges.push(chains.len()..chains.len() + placed.len());
        chains.extend(placed);
        placements.push(placement);
    }
    Ok(ClusteredLayout { embedding: Embedding::from_chains(chains), placements, ranges })
}

pub fn clustered_embedding(chains_per_cluster: &[usize], graph: &ChimeraGraph) -> Result<Embedding> {
    clustered_layout(chains_per_cluster, graph).map(|l| l.embedding)
}

/// Embedding that survives the broken mask, plus how many allocated chains
/// had to be discarded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitOutcome {
    pub embedding: Embedding,
    pub dropped_chains: usize,
    pub chains_per_cluster: Vec<usize>,
}

/// Grows each cluster's TRIAD until enough chains avoid broken qubits, then
/// assigns the cluster's variables to the surviving chains in order.
pub fn fit_clustered(vars_per_cluster: &[usize], graph: &ChimeraGraph) -> Result<FitOutcome> {
    let mut alloc = vars_per_cluster.to_vec();
    loop {
        let layout = clustered_layout(&alloc, graph)?;
        let mut grown = false;
        let mut surviving: Vec<Vec<Vec<QubitId>>> = Vec::with_capacity(alloc.len());
        for (i, range) in layout.ranges.iter().enumerate() {
            let ok: Vec<Vec<QubitId>> = range
                .clone()
                .map(|v| layout.embedding.chains[&v].clone())
                .filter(|c| c.iter().all(|q| !graph.is_broken(*q)))
                .collect();
            if ok.len() < vars_per_cluster[i] {
                alloc[i] += vars_per_cluster[i] - ok.len();
                grown = true;
            }
            surviving.push(ok);
        }
        if grown {
            continue;
        }
        let dropped = alloc.iter().sum::<usize>() - surviving.iter().map(Vec::len).sum::<usize>();
        let chains = surviving.into_iter().zip(vars_per_cluster).flat_map(|(ok, &need)| ok.into_iter().take(need));
        return Ok(FitOutcome {
            embedding: Embedding::from_chains(chains),
            dropped_chains: dropped,
            chains_per_cluster: alloc,
        });
    }
}

/// Single-TRIAD variant of [`fit_clustered`] anchored at the top-left cell.
pub fn fit_triad(num_vars: usize, graph: &ChimeraGraph) -> Result<FitOutcome> {
    fit_clustered(&[num_vars], graph)
}

/// Couplers joining two chains, as `(low, high)` ascending.
pub fn couplers_between(graph: &ChimeraGraph, a: &[QubitId], b: &[QubitId]) -> Vec<(QubitId, QubitId)> {
    let set_b: HashSet<QubitId> = b.iter().copied().collect();
    let mut out: Vec<(QubitId, QubitId)> = a
        .iter()
        .filter(|q| !graph.is_broken(**q) && (q.0 as usize) < graph.num_qubits())
        .flat_map(|&q| graph.structural_neighbors(q).into_iter().map(move |n| (q, n)))
        .filter(|(q, n)| set_b.contains(n) && !graph.is_broken(*n) && q != n)
        .map(|(q, n)| (q.min(n), q.max(n)))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    MissingChain { var: usize },
    EmptyChain { var: usize },
    QubitOutOfRange { var: usize, qubit: QubitId },
    BrokenQubit { var: usize, qubit: QubitId },
    SharedQubit { qubit: QubitId, vars: (usize, usize) },
    Disconnected { var: usize, from: QubitId, to: QubitId },
    MissingCoupler { u: usize, v: usize },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MissingChain { var } => write!(f, "variable {var} has no chain"),
            Violation::EmptyChain { var } => write!(f, "chain of variable {var} is empty"),
            Violation::QubitOutOfRange { var, qubit } => write!(f, "chain {var} uses qubit {qubit} outside the grid"),
            Violation::BrokenQubit { var, qubit } => write!(f, "chain {var} uses broken qubit {qubit}"),
            Violation::SharedQubit { qubit, vars } => {
                write!(f, "qubit {qubit} shared by chains {} and {}", vars.0, vars.1)
            }
            Violation::Disconnected { var, from, to } => write!(f, "chain {var}: {from} and {to} are not coupled"),
            Violation::MissingCoupler { u, v } => write!(f, "no coupler between chains {u} and {v}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub violations: Vec<Violation>,
}

impl EmbeddingReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_ok() {
            return Ok(());
        }
        let shown: Vec<String> = self.violations.iter().take(5).map(ToString::to_string).collect();
        let more = self.violations.len().saturating_sub(5);
        let suffix = if more > 0 { format!(" (+{more} more)") } else { String::new() };
        Err(Error::InvalidEmbedding(shown.join("; ") + &suffix))
    }
}

/// Checks chain shape, disjointness, the broken mask and that every quadratic
/// term of `qubo` has a working coupler between its two chains.
pub fn verify_embedding(embedding: &Embedding, qubo: &Qubo, graph: &ChimeraGraph) -> EmbeddingReport {
    let mut violations = Vec::new();
    let mut owner: BTreeMap<QubitId, usize> = BTreeMap::new();
    for var in 0..qubo.num_vars() {
        if !embedding.chains.contains_key(&var) {
            violations.push(Violation::MissingChain { var });
        }
    }
    for (&var, chain) in &embedding.chains {
        if chain.is_empty() {
            violations.push(Violation::EmptyChain { var });
        }
        for &q in chain {
            if (q.0 as usize) >= graph.num_qubits() {
                violations.push(Violation::QubitOutOfRange { var, qubit: q });
            } else if graph.is_broken(q) {
                violations.push(Violation::BrokenQubit { var, qubit: q });
            }
            if let Some(other) = owner.insert(q, var) {
                violations.push(Violation::SharedQubit { qubit: q, vars: (other, var) });
            }
        }
        for w in chain.windows(2) {
            if !graph.are_adjacent(w[0], w[1]) {
                violations.push(Violation::Disconnected { var, from: w[0], to: w[1] });
            }
        }
    }
    for &(u, v) in qubo.quadratic().keys() {
        if let (Some(a), Some(b)) = (embedding.chain(u), embedding.chain(v)) {
            if couplers_between(graph, a, b).is_empty() {
                violations.push(Violation::MissingCoupler { u, v });
            }
        }
    }
    EmbeddingReport { violations }
}

/// Random disjoint path-shaped chains of the given lengths, or `None` after
/// `attempts` failed tries.
pub fn random_chain_embedding(
    graph: &ChimeraGraph,
    lengths: &[usize],
    rng: &mut impl Rng,
    attempts: usize,
) -> Option<Embedding> {
    let working: Vec<QubitId> = (0..graph.num_qubits() as u32).map(QubitId).filter(|q| !graph.is_broken(*q)).collect();
    'attempt: for _ in 0..attempts {
        let mut used: HashSet<QubitId> = HashSet::new();
        let mut chains = Vec::with_capacity(lengths.len());
        for &len in lengths {
            let free: Vec<QubitId> = working.iter().copied().filter(|q| !used.contains(q)).collect();
            let Some(&start) = free.choose(rng) else { continue 'attempt };
            let mut chain = vec![start];
            used.insert(start);
            while chain.len() < len {
                let tail = *chain.last().expect("non-empty");
                let next: Vec<QubitId> =
                    graph.adjacency(tail).ok()?.into_iter().filter(|q| !used.contains(q)).collect();
                let Some(&n) = next.choose(rng) else { continue 'attempt };
                used.insert(n);
                chain.push(n);
            }
            chains.push(chain);
        }
        return Some(Embedding::from_chains(chains));
    }
    None
}
