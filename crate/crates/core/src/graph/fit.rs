//! Initiator estimation by permutation-sampled gradient ascent.
//!
//! The likelihood of a graph under a Kronecker power depends on how graph
//! nodes map onto Kronecker positions. Each iteration runs a Metropolis chain
//! over node permutations (random transpositions), averages the gradient of
//! the approximate log-likelihood over several sampled permutations and takes
//! a diagonally preconditioned ascent step on the initiator entries.
//!
//! Non-edge terms use the second-order expansion
//! `log(1 - p) ≈ -p - p²/2`, which sums in closed form over all node pairs:
//!
//! * directed: `LL ≈ -S^k - S₂^k/2 + Σ_edges (log P + P + P²/2)`
//! * undirected: `LL ≈ -S^k - S₂^k + T₂^k/2 + Σ_edges (log Q + Q + Q²/2)`
//!
//! where `S = Σθ`, `S₂ = Σθ²`, `T₂ = Σθᵢᵢ²` and, for an undirected pair,
//! `Q = 2P` off the diagonal (either orientation can produce the edge) and
//! `Q = P` for self-loops.

use libm::{exp, log, pow};

use super::generate::EdgeList;
use super::initiator::InitiatorMatrix;
use crate::error::{Error, Result};
use crate::rng::RandomStream;

pub const MIN_ENTRY: f64 = 0.001;
pub const MAX_ENTRY: f64 = 0.999;
const MAX_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    /// Initiator side length.
    pub n: usize,
    pub iterations: usize,
    /// Scale of the preconditioned step; 1.0 is a full diagonal Newton step.
    pub learning_rate: f64,
    /// Permutations averaged per gradient estimate.
    pub permutation_samples: usize,
    /// Metropolis proposals between consecutive permutation samples.
    pub swaps_per_sample: usize,
    /// Proposals run once before the first iteration.
    pub warmup_swaps: usize,
    /// Starting point; `None` uses [`default_initiator`].
    pub init: Option<InitiatorMatrix>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            n: 2,
            iterations: 100,
            learning_rate: 0.25,
            permutation_samples: 8,
            swaps_per_sample: 1000,
            warmup_swaps: 10_000,
            init: None,
        }
    }
}

/// `[[0.9, 0.6], [0.6, 0.2]]` for `n = 2`; larger sides decay linearly from
/// the top-left corner.
pub fn default_initiator(n: usize, directed: bool) -> InitiatorMatrix {
    let rows = if n == 2 {
        vec![vec![0.9, 0.6], vec![0.6, 0.2]]
    } else {
        let span = (2 * (n.max(2) - 1)) as f64;
        (0..n)
            .map(|i| (0..n).map(|j| 0.9 - 0.7 * (i + j) as f64 / span).collect())
            .collect()
    };
    InitiatorMatrix::new(rows, directed).expect("default initiator is valid")
}

/// Smallest `k ≥ 1` with `n^k ≥ node_count`.
pub fn admissible_power(n: usize, node_count: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::param("initiator side length must be >= 2 for fitting"));
    }
    let mut k = 1u32;
    let mut size = n as u64;
    while size < node_count {
        size = size
            .checked_mul(n as u64)
            .ok_or_else(|| Error::param(format!("{n}^{} overflows 64 bits", k + 1)))?;
        k += 1;
    }
    Ok(k)
}

struct Model {
    n: usize,
    k: u32,
    directed: bool,
    log_theta: Vec<f64>,
}

impl Model {
    fn new(theta: &[f64], n: usize, k: u32, directed: bool) -> Self {
        Self {
            n,
            k,
            directed,
            log_theta: theta.iter().map(|&t| log(t)).collect(),
        }
    }

    /// Edge probability `Q` for positions `(a, b)`.
    #[inline]
    fn q(&self, mut a: u64, mut b: u64) -> f64 {
        let n = self.n as u64;
        let pair_factor = if !self.directed && a != b { 2.0 } else { 1.0 };
        let mut lp = 0.0;
        for _ in 0..self.k {
            lp += self.log_theta[((a % n) * n + b % n) as usize];
            a /= n;
            b /= n;
        }
        pair_factor * exp(lp)
    }

    #[inline]
    fn edge_term(&self, a: u64, b: u64) -> f64 {
        let q = self.q(a, b);
        log(q) + q + 0.5 * q * q
    }
}

struct Chain<'g> {
    edges: &'g [(u64, u64)],
    incident: Vec<Vec<u32>>,
    real_nodes: usize,
    pos: Vec<u64>,
    scratch: Vec<u32>,
}

impl<'g> Chain<'g> {
    fn new(graph: &'g EdgeList, positions: u64, theta: &InitiatorMatrix, k: u32) -> Result<Self> {
        let real_nodes = usize::try_from(graph.node_count)
            .map_err(|_| Error::param("graph too large to fit"))?;
        let slots = usize::try_from(positions).map_err(|_| Error::param("graph too large to fit"))?;
        let mut incident = vec![Vec::new(); real_nodes];
        for (i, &(s, d)) in graph.edges.iter().enumerate() {
            incident[s as usize].push(i as u32);
            if d != s {
                incident[d as usize].push(i as u32);
            }
        }

        // Highest-degree nodes go to the positions with the highest expected degree.
        let n = theta.n();
        let row: Vec<f64> = (0..n).map(|i| (0..n).map(|j| theta.get(i, j)).sum()).collect();
        let col: Vec<f64> = (0..n).map(|j| (0..n).map(|i| theta.get(i, j)).sum()).collect();
        let expected = |mut p: u64| {
            let (mut r, mut c) = (1.0, 1.0);
            for _ in 0..k {
                let digit = (p % n as u64) as usize;
                r *= row[digit];
                c *= col[digit];
                p /= n as u64;
            }
            r + c
        };
        let mut slot_order: Vec<u64> = (0..positions).collect();
        let weights: Vec<f64> = slot_order.iter().map(|&p| expected(p)).collect();
        slot_order.sort_by(|&a, &b| weights[b as usize].total_cmp(&weights[a as usize]).then(a.cmp(&b)));
        let mut node_order: Vec<usize> = (0..slots).collect();
        let degree = |u: usize| incident.get(u).map_or(0, Vec::len);
        node_order.sort_by(|&a, &b| degree(b).cmp(&degree(a)).then(a.cmp(&b)));
        let mut pos = vec![0u64; slots];
        for (node, slot) in node_order.into_iter().zip(slot_order) {
            pos[node] = slot;
        }

        Ok(Self {
            edges: &graph.edges,
            incident,
            real_nodes,
            pos,
            scratch: Vec::new(),
        })
    }

    fn local_terms(&self, model: &Model, edges: &[u32]) -> f64 {
        edges
            .iter()
            .map(|&e| {
                let (s, d) = self.edges[e as usize];
                model.edge_term(self.pos[s as usize], self.pos[d as usize])
            })
            .sum()
    }

    /// One Metropolis proposal swapping the positions of two nodes.
    fn propose(&mut self, model: &Model, s: &mut RandomStream) {
        let slots = self.pos.len() as u64;
        let u = s.next_below(slots) as usize;
        let v = s.next_below(slots) as usize;
        let u_accept = s.next_open_f64();
        if u == v || (u >= self.real_nodes && v >= self.real_nodes) {
            return;
        }
        let mut touched = std::mem::take(&mut self.scratch);
        touched.clear();
        if u < self.real_nodes {
            touched.extend_from_slice(&self.incident[u]);
        }
        if v < self.real_nodes {
            for &e in &self.incident[v] {
                let (a, b) = self.edges[e as usize];
                if a as usize != u && b as usize != u {
                    touched.push(e);
                }
            }
        }
        let before = self.local_terms(model, &touched);
        self.pos.swap(u, v);
        let after = self.local_terms(model, &touched);
        if log(u_accept) >= after - before {
            self.pos.swap(u, v);
        }
        self.scratch = touched;
    }

    /// Adds `Σ_edges cnt_ij (1 + Q + Q²)` into `acc` and `Σ_edges cnt_ij` into `cnt`.
    fn edge_sums(&self, model: &Model, acc: &mut [f64], cnt: &mut [f64]) {
        let n = model.n as u64;
        for &(s, d) in self.edges {
            let (mut a, mut b) = (self.pos[s as usize], self.pos[d as usize]);
            let q = model.q(a, b);
            let f = 1.0 + q + q * q;
            for _ in 0..model.k {
                let cell = ((a % n) * n + b % n) as usize;
                acc[cell] += f;
                cnt[cell] += 1.0;
                a /= n;
                b /= n;
            }
        }
    }
}

/// Fits an `n × n` initiator to `graph`.
pub fn estimate_initiator(graph: &EdgeList, config: &FitConfig, s: &mut RandomStream) -> Result<InitiatorMatrix> {
    let n = config.n;
    if graph.edges.is_empty() {
        return Err(Error::param("cannot fit an initiator to a graph without edges"));
    }
    if config.iterations == 0 || config.permutation_samples == 0 {
        return Err(Error::param("iterations and permutation samples must be >= 1"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::param(format!("learning rate {} must be > 0", config.learning_rate)));
    }
    graph.validate()?;
    let k = admissible_power(n, graph.node_count.max(1))?;
    let positions = (n as u64).pow(k);

    let init = match &config.init {
        Some(m) if m.n() != n => {
            return Err(Error::param(format!("initial initiator is {}x{0}, expected {n}x{n}", m.n())))
        }
        Some(m) => m.clone(),
        None => default_initiator(n, graph.directed),
    };
    let directed = graph.directed;
    let mut theta: Vec<f64> = init
        .entries()
        .iter()
        .map(|t| t.clamp(MIN_ENTRY, MAX_ENTRY))
        .collect();
    if !directed {
        symmetrize(&mut theta, n);
    }

    let init_matrix = InitiatorMatrix::new(theta.chunks(n).map(<[f64]>::to_vec).collect(), directed)?;
    let mut chain = Chain::new(graph, positions, &init_matrix, k)?;
    let kf = f64::from(k);
    let cells = n * n;

    let mut model = Model::new(&theta, n, k, directed);
    for _ in 0..config.warmup_swaps {
        chain.propose(&model, s);
    }

    let mut acc = vec![0.0; cells];
    let mut cnt = vec![0.0; cells];
    for _ in 0..config.iterations {
        acc.iter_mut().for_each(|x| *x = 0.0);
        cnt.iter_mut().for_each(|x| *x = 0.0);
        for _ in 0..config.permutation_samples {
            for _ in 0..config.swaps_per_sample {
                chain.propose(&model, s);
            }
            chain.edge_sums(&model, &mut acc, &mut cnt);
        }
        let samples = config.permutation_samples as f64;

        let sum: f64 = theta.iter().sum();
        let sum_sq: f64 = theta.iter().map(|t| t * t).sum();
        let diag_sq: f64 = (0..n).map(|i| theta[i * n + i].powi(2)).sum();
        let pair_weight = if directed { 1.0 } else { 2.0 };
        let s_grad = kf * pow(sum, kf - 1.0);
        let s_curv = kf * (kf - 1.0) * pow(sum, (kf - 2.0).max(0.0));
        let sq_grad = pair_weight * kf * pow(sum_sq, kf - 1.0);

        let mut grad = vec![0.0; cells];
        let mut curv = vec![0.0; cells];
        for c in 0..cells {
            let t = theta[c];
            grad[c] = acc[c] / samples / t - s_grad - sq_grad * t;
            curv[c] = cnt[c] / samples / (t * t) + s_curv + sq_grad;
            if !directed && c / n == c % n {
                grad[c] += kf * pow(diag_sq, kf - 1.0) * t;
            }
        }
        if !directed {
            for i in 0..n {
                for j in (i + 1)..n {
                    let (a, b) = (i * n + j, j * n + i);
                    let (g, h) = (grad[a] + grad[b], curv[a] + curv[b]);
                    grad[a] = g;
                    grad[b] = g;
                    curv[a] = h;
                    curv[b] = h;
                }
            }
        }
        for c in 0..cells {
            let step = (config.learning_rate * grad[c] / curv[c]).clamp(-MAX_STEP, MAX_STEP);
            theta[c] = (theta[c] + step).clamp(MIN_ENTRY, MAX_ENTRY);
        }
        model = Model::new(&theta, n, k, directed);
    }

    InitiatorMatrix::new(theta.chunks(n).map(<[f64]>::to_vec).collect(), directed)
}

fn symmetrize(theta: &mut [f64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (theta[i * n + j] + theta[j * n + i]);
            theta[i * n + j] = m;
            theta[j * n + i] = m;
        }
    }
}
