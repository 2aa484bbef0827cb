use rayon::prelude::*;
use rustc_hash::FxHashSet;

use super::initiator::InitiatorMatrix;
use crate::error::{Error, Result};
use crate::harness::build_pool;
use crate::rng::{derive_stream, dist, domain_seed, CumulativeTable, RandomStream};

/// Candidate edges drawn per chunk stream.
pub const CHUNK_EDGES: u64 = 4096;
/// Attempts allowed per requested edge before giving up on deduplication.
const MAX_ATTEMPTS_PER_EDGE: u64 = 100;
const EDGE_DOMAIN: u64 = 0x4B52_4F4E; // "KRON"

/// A graph as a list of 0-based `(src, dst)` pairs.
///
/// Undirected graphs store each edge once as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub node_count: u64,
    pub directed: bool,
    pub edges: Vec<(u64, u64)>,
}

impl EdgeList {
    pub fn new(node_count: u64, directed: bool, edges: Vec<(u64, u64)>) -> Result<Self> {
        let g = Self {
            node_count,
            directed,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &(s, d)) in self.edges.iter().enumerate() {
            if s >= self.node_count || d >= self.node_count {
                return Err(Error::Format(format!(
                    "edge {i} ({s}, {d}) references a node >= node count {}",
                    self.node_count
                )));
            }
        }
        Ok(())
    }

    pub fn edge_count(&self) -> u64 {
        self.edges.len() as u64
    }
}

/// Draws distinct Kronecker edges in a fixed order.
///
/// Candidate chunk `c` is drawn from its own stream, chunks are merged in
/// index order and repeats are skipped, so the accepted sequence is the same
/// however many workers render chunks.
pub struct EdgeSampler {
    cells: CumulativeTable,
    n: u64,
    k: u32,
    directed: bool,
    seed: u64,
    next_chunk: u64,
    seen: FxHashSet<(u64, u64)>,
    pool: Option<rayon::ThreadPool>,
    workers: usize,
    examined: u64,
    accepted: u64,
    max_distinct: u128,
    /// Candidates drawn but not yet examined, kept so that call boundaries
    /// do not change the accepted sequence.
    pending: Vec<(u64, u64)>,
    pending_pos: usize,
}

impl EdgeSampler {
    pub fn new(theta: &InitiatorMatrix, k: u32, seed: u64, workers: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("kronecker power k must be >= 1"));
        }
        if theta.sum() <= 0.0 {
            return Err(Error::param("initiator has no probability mass"));
        }
        let nodes = theta.node_count(k)?;
        let cells = CumulativeTable::new(theta.entries())?;
        let nodes = u128::from(nodes);
        let max_distinct = if theta.directed() {
            nodes * nodes
        } else {
            nodes * (nodes + 1) / 2
        };
        Ok(Self {
            cells,
            n: theta.n() as u64,
            k,
            directed: theta.directed(),
            seed: domain_seed(seed, EDGE_DOMAIN),
            next_chunk: 0,
            seen: FxHashSet::default(),
            pool: build_pool(workers)?,
            workers: workers.max(1),
            examined: 0,
            accepted: 0,
            max_distinct,
            pending: Vec::new(),
            pending_pos: 0,
        })
    }

    /// Draws one edge by `k` rounds of cell selection, most significant digit first.
    #[inline]
    fn place(&self, s: &mut RandomStream) -> (u64, u64) {
        let total = self.cells.total();
        let mut src = 0u64;
        let mut dst = 0u64;
        for _ in 0..self.k {
            let cell = if self.cells.len() == 1 {
                0
            } else {
                let u = f64::from(s.next_u32()) * (1.0 / 4_294_967_296.0) * total;
                self.cells.sample_at(u)
            } as u64;
            src = src * self.n + cell / self.n;
            dst = dst * self.n + cell % self.n;
        }
        if !self.directed && src > dst {
            (dst, src)
        } else {
            (src, dst)
        }
    }

    fn candidates(&self, chunk: u64) -> Vec<(u64, u64)> {
        let mut s = derive_stream(self.seed, chunk);
        (0..CHUNK_EDGES).map(|_| self.place(&mut s)).collect()
    }

    /// Appends up to `want` newly accepted edges to `out`; returns how many
    /// were appended. Fails once the attempt budget for `budget_edges`
    /// requested edges is exhausted.
    pub fn fill(&mut self, out: &mut Vec<(u64, u64)>, want: u64, budget_edges: u64) -> Result<u64> {
        let budget = budget_edges.max(1).saturating_mul(MAX_ATTEMPTS_PER_EDGE);
        let mut added = 0u64;
        while added < want {
            if u128::from(self.accepted) >= self.max_distinct {
                return Err(Error::param(format!(
                    "requested more edges than the {} distinct pairs available",
                    self.max_distinct
                )));
            }
            if self.pending_pos == self.pending.len() {
                self.refill();
            }
            while self.pending_pos < self.pending.len() {
                let edge = self.pending[self.pending_pos];
                self.pending_pos += 1;
                self.examined += 1;
                if self.seen.insert(edge) {
                    self.accepted += 1;
                    out.push(edge);
                    added += 1;
                    if added == want {
                        return Ok(added);
                    }
                }
                if self.examined > budget {
                    return Err(Error::param(format!(
                        "gave up after {} attempts placing {} distinct edges",
                        self.examined, budget_edges
                    )));
                }
            }
        }
        Ok(added)
    }

    /// Draws the next batch of candidate chunks into `pending`.
    fn refill(&mut self) {
        let first = self.next_chunk;
        let count = (self.workers * 2) as u64;
        self.next_chunk += count;
        let batches: Vec<Vec<(u64, u64)>> = match &self.pool {
            Some(pool) => pool.install(|| {
                (first..first + count)
                    .into_par_iter()
                    .map(|c| self.candidates(c))
                    .collect()
            }),
            None => (first..first + count).map(|c| self.candidates(c)).collect(),
        };
        self.pending.clear();
        self.pending.extend(batches.into_iter().flatten());
        self.pending_pos = 0;
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }
}

/// Generates exactly `edges` distinct edges of the `k`-th Kronecker power.
pub fn generate_edges(
    theta: &InitiatorMatrix,
    k: u32,
    edges: u64,
    seed: u64,
    workers: usize,
) -> Result<EdgeList> {
    let node_count = theta.node_count(k)?;
    let mut sampler = EdgeSampler::new(theta, k, seed, workers)?;
    if u128::from(edges) > sampler.max_distinct {
        return Err(Error::param(format!(
            "{edges} edges requested but only {} distinct pairs exist for {node_count} nodes",
            sampler.max_distinct
        )));
    }
    let mut out = Vec::with_capacity(edges as usize);
    sampler.fill(&mut out, edges, edges)?;
    Ok(EdgeList {
        node_count,
        directed: theta.directed(),
        edges: out,
    })
}

/// Stochastic Kronecker graph with `n^k` nodes.
///
/// Cells whose probability is exactly one (products of unit initiator
/// entries) are counted deterministically; the remaining expected mass
/// `(Σθ)^k - certain` contributes a Poisson number of edges. The resulting
/// count is capped at the number of distinct pairs, and edges are placed by
/// per-level cell selection with repeats re-drawn.
pub fn generate_graph(theta: &InitiatorMatrix, k: u32, s: &mut RandomStream) -> Result<EdgeList> {
    let nodes = u128::from(theta.node_count(k)?);
    let expected = theta.expected_edge_count(k);
    if expected <= 0.0 {
        return Err(Error::param("initiator has no probability mass"));
    }
    let max_distinct = if theta.directed() {
        nodes * nodes
    } else {
        nodes * (nodes + 1) / 2
    };
    if expected > max_distinct as f64 {
        return Err(Error::param(format!(
            "expected {expected} edges exceeds the {max_distinct} distinct pairs available"
        )));
    }
    let ones = theta.entries().iter().filter(|&&t| t == 1.0).count() as f64;
    let certain = libm::pow(ones, f64::from(k));
    let uncertain = expected - certain;
    let random = if uncertain > 1e-9 * expected {
        dist::poisson(s, uncertain)
    } else {
        0
    };
    let count = (certain as u64).saturating_add(random).min(max_distinct.min(u128::from(u64::MAX)) as u64);
    let seed = s.next_u64();
    generate_edges(theta, k, count, seed, 1)
}

/// Smallest power whose expected edge count reaches `edges`.
pub fn power_for_edges(theta: &InitiatorMatrix, edges: u64) -> Result<u32> {
    let sum = theta.sum();
    if sum <= 1.0 {
        return Err(Error::param(format!(
            "initiator entries sum to {sum}; the expected edge count never grows past 1"
        )));
    }
    let mut k = 1u32;
    while theta.expected_edge_count(k) < edges as f64 {
        k += 1;
    }
    theta.node_count(k)?;
    Ok(k)
}
