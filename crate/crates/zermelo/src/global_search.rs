//! Global initialization stage: a locally densely connected digraph over
//! the flight domain, wind-aware edge costs, loopless K-shortest-path
//! enumeration, and Newton refinement of the candidates.
//!
//! Node layout is a uniform grid (spacing `h`) clipped to the elliptic
//! domain, anchored at the origin so routes along the focal axis hit grid
//! rows exactly; edges connect nodes up to the connectivity length `ell`.
//! Ties in the path enumeration are broken by lexicographic node order, so
//! the output is deterministic.

use crate::functional::{KKTIterate, PointwiseKernel};
use crate::geometry::Vec2;
use crate::kkt::{solve, SolveOptions, SolveStatus};
use crate::trajectory::{resample, Ellipse, Path, State};
use crate::windfield::WindField;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

/// Sub-samples of the midpoint rule used for edge costs; matches the
/// travel-time quadrature so a one-interval state reproduces an edge cost
/// exactly.
pub const EDGE_QUAD_SUBSAMPLES: usize = crate::functional::QUAD_SUBSAMPLES;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphError {
    BadSpacing,
    WindExceedsAirspeed,
    Disconnected,
}

impl fmt::Display for GraphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphError::BadSpacing => {
                write!(f, "need h > 0 and ell >= h sqrt(2) for a connected grid")
            }
            GraphError::WindExceedsAirspeed => {
                write!(f, "wind reaches the airspeed on an edge")
            }
            GraphError::Disconnected => {
                write!(f, "origin and destination are not connected in the graph")
            }
        }
    }
}

impl std::error::Error for GraphError {}

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub h: f64,
    pub ell: f64,
}

/// Directed flight graph over the domain. Node 0 is the origin, node 1 the
/// destination, grid nodes follow in row-major order.
#[derive(Debug, Clone)]
pub struct FlightGraph {
    pub nodes: Vec<Vec2>,
    /// Out-edges per node: `(target, cost)`.
    pub out: Vec<Vec<(u32, f64)>>,
    pub source: u32,
    pub target: u32,
    pub h: f64,
    pub ell: f64,
}

impl FlightGraph {
    pub fn stats(&self) -> GraphStats {
        GraphStats {
            node_count: self.nodes.len(),
            edge_count: self.out.iter().map(|e| e.len()).sum(),
            h: self.h,
            ell: self.ell,
        }
    }
}

/// Travel time of the straight segment from `a` to `b` by the midpoint
/// rule; the segment is one pseudo-time interval, so the path derivative
/// equals the chord.
pub fn edge_cost(field: &WindField, v_bar: f64, a: Vec2, b: Vec2) -> Result<f64, GraphError> {
    let d = b - a;
    let mut cost = 0.0;
    for q in 0..EDGE_QUAD_SUBSAMPLES {
        let s = (q as f64 + 0.5) / EDGE_QUAD_SUBSAMPLES as f64;
        let k = PointwiseKernel::new(field, a.lerp(b, s), d, v_bar)
            .map_err(|_| GraphError::WindExceedsAirspeed)?;
        cost += crate::functional::kernel_f(&k).f / EDGE_QUAD_SUBSAMPLES as f64;
    }
    Ok(cost)
}

/// Build the digraph: grid nodes inside `domain` plus the two foci, edges
/// between all ordered pairs within distance `ell`.
pub fn build_graph(
    field: &WindField,
    v_bar: f64,
    x_o: Vec2,
    x_d: Vec2,
    domain: &Ellipse,
    h: f64,
    ell: f64,
) -> Result<FlightGraph, GraphError> {
    if !(h > 0.0) || ell < h * 2.0f64.sqrt() {
        return Err(GraphError::BadSpacing);
    }
    let mut nodes = vec![x_o, x_d];
    let (lo, hi) = domain.bounding_box();
    let ix_lo = ((lo.x - x_o.x) / h).floor() as i64;
    let ix_hi = ((hi.x - x_o.x) / h).ceil() as i64;
    let iy_lo = ((lo.y - x_o.y) / h).floor() as i64;
    let iy_hi = ((hi.y - x_o.y) / h).ceil() as i64;
    for iy in iy_lo..=iy_hi {
        for ix in ix_lo..=ix_hi {
            let p = x_o + Vec2::new(ix as f64 * h, iy as f64 * h);
            if !domain.contains(p) {
                continue;
            }
            // Skip duplicates of the endpoints.
            if p.dist(x_o) < 1e-12 * h || p.dist(x_d) < 1e-12 * h {
                continue;
            }
            nodes.push(p);
        }
    }
    let mut out = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            if i == j {
                continue;
            }
            let d = nodes[i].dist(nodes[j]);
            if d > 0.0 && d <= ell {
                let c = edge_cost(field, v_bar, nodes[i], nodes[j])?;
                out[i].push((j as u32, c));
            }
        }
    }
    let graph = FlightGraph {
        nodes,
        out,
        source: 0,
        target: 1,
        h,
        ell,
    };
    if dijkstra(&graph, graph.source, graph.target, &HashSet::new(), &[]).is_none() {
        return Err(GraphError::Disconnected);
    }
    Ok(graph)
}

/// Heap entry ordered by (cost, lexicographic node sequence); BinaryHeap
/// is a max-heap, so the ordering is reversed.
#[derive(PartialEq)]
struct QueueEntry {
    cost: f64,
    nodes: Vec<u32>,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.nodes.cmp(&self.nodes))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Uniform-cost search carrying the path in the priority key: among
/// equal-cost shortest paths it returns the lexicographically smallest,
/// which keeps the whole pipeline deterministic.
fn dijkstra(
    graph: &FlightGraph,
    from: u32,
    to: u32,
    removed_edges: &HashSet<(u32, u32)>,
    removed_nodes: &[bool],
) -> Option<(Vec<u32>, f64)> {
    let n = graph.nodes.len();
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    heap.push(QueueEntry {
        cost: 0.0,
        nodes: vec![from],
    });
    while let Some(QueueEntry { cost, nodes }) = heap.pop() {
        let u = *nodes.last().unwrap();
        if u == to {
            return Some((nodes, cost));
        }
        if settled[u as usize] {
            continue;
        }
        settled[u as usize] = true;
        for &(v, c) in &graph.out[u as usize] {
            if settled[v as usize]
                || removed_nodes.get(v as usize).copied().unwrap_or(false)
                || removed_edges.contains(&(u, v))
            {
                continue;
            }
            let mut path = nodes.clone();
            path.push(v);
            heap.push(QueueEntry {
                cost: cost + c,
                nodes: path,
            });
        }
    }
    None
}

/// A loopless route candidate from the graph stage.
#[derive(Debug, Clone, Serialize)]
pub struct CandidatePath {
    pub node_ids: Vec<u32>,
    pub discrete_cost: f64,
    pub refined: Option<RefinedCandidate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinedCandidate {
    pub t: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Final state of a converged refinement.
    #[serde(skip)]
    pub state: Option<State>,
}

impl CandidatePath {
    pub fn points(&self, graph: &FlightGraph) -> Vec<Vec2> {
        self.node_ids
            .iter()
            .map(|i| graph.nodes[*i as usize])
            .collect()
    }
}

fn path_cost(graph: &FlightGraph, nodes: &[u32]) -> f64 {
    nodes
        .windows(2)
        .map(|w| {
            graph.out[w[0] as usize]
                .iter()
                .find(|(v, _)| *v == w[1])
                .expect("edge of an enumerated path must exist")
                .1
        })
        .sum()
}

/// K shortest loopless paths from source to target by deviation-path
/// enumeration: the spur pool is a min-heap keyed (cost, lexicographic
/// node order), root edges and root nodes of already accepted paths are
/// masked per spur iteration. The first path is the plain shortest path.
pub fn k_shortest(graph: &FlightGraph, k: usize) -> Result<Vec<CandidatePath>, GraphError> {
    assert!(k >= 1);
    let (first, first_cost) = dijkstra(graph, graph.source, graph.target, &HashSet::new(), &[])
        .ok_or(GraphError::Disconnected)?;
    let mut accepted: Vec<(Vec<u32>, f64)> = vec![(first, first_cost)];
    let mut pool: BinaryHeap<QueueEntry> = BinaryHeap::new();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(accepted[0].0.clone());

    while accepted.len() < k {
        let (prev, _) = accepted.last().unwrap().clone();
        for spur_idx in 0..prev.len() - 1 {
            let spur_node = prev[spur_idx];
            let root = &prev[..=spur_idx];
            let mut removed_edges = HashSet::new();
            for (p, _) in &accepted {
                if p.len() > spur_idx && p[..=spur_idx] == *root {
                    removed_edges.insert((p[spur_idx], p[spur_idx + 1]));
                }
            }
            let mut removed_nodes = vec![false; graph.nodes.len()];
            for &u in &root[..spur_idx] {
                removed_nodes[u as usize] = true;
            }
            if let Some((spur, _)) = dijkstra(
                graph,
                spur_node,
                graph.target,
                &removed_edges,
                &removed_nodes,
            ) {
                let mut total = root[..spur_idx].to_vec();
                total.extend_from_slice(&spur);
                if seen.insert(total.clone()) {
                    let cost = path_cost(graph, &total);
                    pool.push(QueueEntry { cost, nodes: total });
                }
            }
        }
        match pool.pop() {
            Some(QueueEntry { cost, nodes }) => accepted.push((nodes, cost)),
            None => break,
        }
    }

    Ok(accepted
        .into_iter()
        .map(|(nodes, cost)| CandidatePath {
            node_ids: nodes,
            discrete_cost: cost,
            refined: None,
        })
        .collect())
}

/// Refine a candidate: resample its polyline onto `n` uniform intervals at
/// constant ground speed, start the multiplier at zero, and run the Newton
/// solver. Solver failures are recorded on the candidate, not raised.
pub fn refine(
    graph: &FlightGraph,
    field: &WindField,
    v_bar: f64,
    candidate: &CandidatePath,
    n: usize,
    opts: &SolveOptions,
) -> CandidatePath {
    let polyline = candidate.points(graph);
    let geom = Path::from_polyline(&polyline);
    let start: State = match resample(&State::new(geom.arc_length(), geom), n) {
        Ok(s) => s,
        Err(_) => {
            return CandidatePath {
                node_ids: candidate.node_ids.clone(),
                discrete_cost: candidate.discrete_cost,
                refined: Some(RefinedCandidate {
                    t: f64::INFINITY,
                    iterations: 0,
                    status: SolveStatus::InfeasibleKernel,
                    state: None,
                }),
            }
        }
    };
    let report = solve(&KKTIterate::feasible_start(start), field, v_bar, opts);
    let (t, state) = if report.converged() {
        (
            report.final_t(field, v_bar).unwrap_or(f64::INFINITY),
            Some(report.final_iterate.z.clone()),
        )
    } else {
        (f64::INFINITY, None)
    };
    CandidatePath {
        node_ids: candidate.node_ids.clone(),
        discrete_cost: candidate.discrete_cost,
        refined: Some(RefinedCandidate {
            t,
            iterations: report.iterations(),
            status: report.status,
            state,
        }),
    }
}

/// Ranked output of the two-stage pipeline.
#[derive(Debug, Clone)]
pub struct GlobalResult {
    /// Candidates sorted by refined travel time; failed refinements sink
    /// to the bottom ordered by discrete cost.
    pub ranked: Vec<CandidatePath>,
    pub stats: GraphStats,
}

impl GlobalResult {
    pub fn best(&self) -> &CandidatePath {
        &self.ranked[0]
    }

    /// CSV table `rank,discrete_cost,refined_T,iterations,status`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,discrete_cost,refined_T,iterations,status\n");
        for (i, c) in self.ranked.iter().enumerate() {
            let (t, iters, status) = match &c.refined {
                Some(r) => (
                    if r.t.is_finite() {
                        crate::trajectory::fmt_f64(r.t)
                    } else {
                        "inf".to_string()
                    },
                    r.iterations,
                    serde_json::to_value(r.status)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_string))
                        .unwrap_or_default(),
                ),
                None => ("".to_string(), 0, "unrefined".to_string()),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                crate::trajectory::fmt_f64(c.discrete_cost),
                t,
                iters,
                status
            ));
        }
        out
    }
}

/// Full two-stage pipeline: build the graph, enumerate `k` candidates,
/// refine each on an `n`-interval grid, and rank by refined travel time.
#[allow(clippy::too_many_arguments)]
pub fn global_optimize(
    field: &WindField,
    v_bar: f64,
    x_o: Vec2,
    x_d: Vec2,
    domain: &Ellipse,
    h: f64,
    ell: f64,
    k: usize,
    n: usize,
    opts: &SolveOptions,
) -> Result<GlobalResult, GraphError> {
    let graph = build_graph(field, v_bar, x_o, x_d, domain, h, ell)?;
    let candidates = k_shortest(&graph, k)?;
    let mut refined: Vec<CandidatePath> = candidates
        .iter()
        .map(|c| refine(&graph, field, v_bar, c, n, opts))
        .collect();
    refined.sort_by(|a, b| {
        let ta = a.refined.as_ref().map_or(f64::INFINITY, |r| r.t);
        let tb = b.refined.as_ref().map_or(f64::INFINITY, |r| r.t);
        ta.partial_cmp(&tb)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                a.discrete_cost
                    .partial_cmp(&b.discrete_cost)
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| a.node_ids.cmp(&b.node_ids))
    });
    Ok(GlobalResult {
        ranked: refined,
        stats: graph.stats(),
    })
}
