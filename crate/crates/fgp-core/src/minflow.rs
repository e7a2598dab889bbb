//! Exact network simplex for balanced transportation problems.
//!
//! Costs are integer pairs ordered lexicographically: the first component
//! carries the scaled cost, the second a strictly monotone tie-break, so
//! the optimal basis is unique whenever the tie-break separates supports
//! and every pivot decision is deterministic.  Masked pairs (infeasible
//! arcs) are excluded from pricing; feasibility is established through
//! artificial arcs to a root node priced at a Big-M on the first
//! component only.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Lexicographically ordered additive cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub(crate) struct PairCost(pub i128, pub i128);

impl core::ops::Add for PairCost {
    type Output = PairCost;
    fn add(self, o: PairCost) -> PairCost {
        PairCost(self.0 + o.0, self.1 + o.1)
    }
}

impl core::ops::Sub for PairCost {
    type Output = PairCost;
    fn sub(self, o: PairCost) -> PairCost {
        PairCost(self.0 - o.0, self.1 - o.1)
    }
}

/// A balanced transportation problem: `supplies` must sum to the same
/// total as `demands` (caller-checked to 1e-9); `costs` is row-major
/// `m x n` with `None` marking infeasible arcs.
pub(crate) struct FlowProblem {
    pub supplies: Vec<f64>,
    pub demands: Vec<f64>,
    pub costs: Vec<Option<PairCost>>,
}

/// Row-major arc flows of an optimal solution.
pub(crate) struct FlowSolution {
    pub flows: Vec<f64>,
}

/// Residual tolerance on artificial arcs: anything larger means the
/// masked pattern admits no feasible coupling.
const ARTIFICIAL_TOL: f64 = 1e-9;

struct Arc {
    from: usize,
    to: usize,
    cost: PairCost,
}

pub(crate) fn solve(p: &FlowProblem) -> Result<FlowSolution> {
    let m = p.supplies.len();
    let n = p.demands.len();
    if m == 0 || n == 0 {
        return Err(Error::Shape("transportation problem needs atoms on both sides"));
    }
    if p.costs.len() != m * n {
        return Err(Error::Shape("cost matrix size mismatch"));
    }
    if p.supplies.iter().chain(&p.demands).any(|&s| !(s >= 0.0) || !s.is_finite()) {
        return Err(Error::Domain("supplies and demands must be nonnegative and finite"));
    }

    let max_abs = p
        .costs
        .iter()
        .flatten()
        .map(|c| c.0.abs())
        .max()
        .unwrap_or(0);
    let big = (max_abs + 1) * (m + n + 1) as i128;

    // Nodes: sources 0..m, sinks m..m+n, root m+n.
    let root = m + n;
    let node_count = m + n + 1;

    // Arcs: the real grid first (id = i*n + j, masked kept as placeholders
    // so ids stay aligned), then source->root and root->sink artificials.
    let mut arcs: Vec<Option<Arc>> = Vec::with_capacity(m * n + node_count - 1);
    for i in 0..m {
        for j in 0..n {
            arcs.push(p.costs[i * n + j].map(|cost| Arc { from: i, to: m + j, cost }));
        }
    }
    for i in 0..m {
        arcs.push(Some(Arc { from: i, to: root, cost: PairCost(big, 0) }));
    }
    for j in 0..n {
        arcs.push(Some(Arc { from: root, to: m + j, cost: PairCost(big, 0) }));
    }

    let mut flow = vec![0.0f64; arcs.len()];
    let mut in_tree = vec![false; arcs.len()];
    // Initial basis: the artificial star, loaded with the marginals.
    for i in 0..m {
        in_tree[m * n + i] = true;
        flow[m * n + i] = p.supplies[i];
    }
    for j in 0..n {
        in_tree[m * n + m + j] = true;
        flow[m * n + m + j] = p.demands[j];
    }

    // Generous cap; Bland's rule guarantees finite termination anyway.
    let max_pivots = 1000 * (m + n + 2) * (m + n + 2);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for _pivot in 0..max_pivots {
        // Potentials relative to the root along tree arcs.
        for a in &mut adjacency {
            a.clear();
        }
        for (id, arc) in arcs.iter().enumerate() {
            if in_tree[id] {
                let arc = arc.as_ref().expect("masked arcs never enter the tree");
                adjacency[arc.from].push(id);
                adjacency[arc.to].push(id);
            }
        }
        let mut pot = vec![None::<PairCost>; node_count];
        let mut parent_arc = vec![usize::MAX; node_count];
        pot[root] = Some(PairCost(0, 0));
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            let pu = pot[u].expect("visited nodes have potentials");
            for &id in &adjacency[u] {
                let arc = arcs[id].as_ref().expect("tree arc");
                let (v, pv) = if arc.from == u {
                    (arc.to, pu + arc.cost)
                } else {
                    (arc.from, pu - arc.cost)
                };
                if pot[v].is_none() {
                    pot[v] = Some(pv);
                    parent_arc[v] = id;
                    stack.push(v);
                }
            }
        }
        if pot.iter().any(Option::is_none) {
            return Err(Error::NumericDegeneracy("basis lost tree connectivity"));
        }

        // Entering arc: smallest id with negative reduced cost (Bland).
        let mut entering = None;
        for (id, arc) in arcs.iter().enumerate() {
            if in_tree[id] {
                continue;
            }
            let Some(arc) = arc else { continue };
            let reduced = arc.cost + pot[arc.from].unwrap() - pot[arc.to].unwrap();
            if reduced < PairCost(0, 0) {
                entering = Some(id);
                break;
            }
        }
        let Some(entering_id) = entering else {
            // Optimal: verify no artificial arc still carries mass.
            for id in m * n..arcs.len() {
                if flow[id] > ARTIFICIAL_TOL {
                    return Err(Error::Infeasible(
                        "masked cost pattern admits no feasible coupling",
                    ));
                }
            }
            return Ok(FlowSolution { flows: flow[..m * n].to_vec() });
        };

        // The unique tree path from the entering arc's head back to its
        // tail closes the pivot cycle.
        let e = arcs[entering_id].as_ref().unwrap();
        let path_to_root = |mut u: usize| -> Vec<usize> {
            let mut path = Vec::new();
            while u != root {
                let id = parent_arc[u];
                path.push(id);
                let arc = arcs[id].as_ref().unwrap();
                u = if arc.from == u { arc.to } else { arc.from };
            }
            path
        };
        let from_path = path_to_root(e.from);
        let to_path = path_to_root(e.to);
        // Drop the shared suffix so the cycle does not detour via the root.
        let mut fi = from_path.len();
        let mut ti = to_path.len();
        while fi > 0 && ti > 0 && from_path[fi - 1] == to_path[ti - 1] {
            fi -= 1;
            ti -= 1;
        }

        // Orient the cycle along the entering arc: tail -> head on the
        // entering arc, then head's path up, shared apex, tail's path down.
        // Walk and classify each tree arc as forward (gains flow) or
        // backward (loses flow).
        let mut backward: Vec<usize> = Vec::new();
        let mut forward: Vec<usize> = Vec::new();
        {
            let mut u = e.to;
            for &id in &to_path[..ti] {
                let arc = arcs[id].as_ref().unwrap();
                if arc.from == u {
                    // Traversing with the arc's direction while walking the
                    // cycle, so augmenting adds flow here.
                    forward.push(id);
                    u = arc.to;
                } else {
                    backward.push(id);
                    u = arc.from;
                }
            }
            let mut u = e.from;
            for &id in &from_path[..fi] {
                let arc = arcs[id].as_ref().unwrap();
                if arc.to == u {
                    forward.push(id);
                    u = arc.from;
                } else {
                    backward.push(id);
                    u = arc.to;
                }
            }
        }

        if backward.is_empty() {
            return Err(Error::NumericDegeneracy("unbounded pivot in a balanced problem"));
        }
        let mut delta = f64::INFINITY;
        let mut leaving_id = usize::MAX;
        for &id in &backward {
            if flow[id] < delta || (flow[id] == delta && id < leaving_id) {
                delta = flow[id];
                leaving_id = id;
            }
        }

        flow[entering_id] += delta;
        for &id in &forward {
            flow[id] += delta;
        }
        for &id in &backward {
            flow[id] -= delta;
        }
        flow[leaving_id] = 0.0;
        in_tree[entering_id] = true;
        in_tree[leaving_id] = false;
    }
    Err(Error::NumericDegeneracy("pivot limit exceeded"))
}
