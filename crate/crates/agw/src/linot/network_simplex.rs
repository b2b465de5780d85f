//! Network simplex specialized to the dense transportation problem.
//!
//! Nodes are the n sources, the m sinks, and one artificial root. The
//! initial basis is the star through the root with large artificial costs;
//! pivoting drives the artificial arcs out. The entering arc is chosen by a
//! rolling block search over the real arcs in row-major order (ties within a
//! block break to the lowest (row, column) index), and the leaving arc is
//! the last blocking arc met when walking the pivot cycle from its apex in
//! the direction of augmentation, which keeps the basis strongly feasible
//! and the pivot sequence deterministic.

use ndarray::Array2;

use crate::error::{AgwError, Result};

/// Reduced costs below `-pivot_tol(scale)` qualify as entering candidates.
fn pivot_tol(cost_scale: f64) -> f64 {
    1e-13 * cost_scale.max(1.0)
}

pub struct SimplexSolution {
    pub plan: Array2<f64>,
    pub pivots: usize,
}

/// Solves `min <C, X>` over `X >= 0` with row sums `a` and column sums `b`.
/// Requires balanced, strictly positive marginals (callers strip zero-mass
/// rows and columns first).
pub fn solve_transportation(cost: &Array2<f64>, a: &[f64], b: &[f64]) -> Result<SimplexSolution> {
    let (n, m) = cost.dim();
    assert_eq!(a.len(), n);
    assert_eq!(b.len(), m);

    let mut net = Net::new(cost, a, b);
    net.run()?;

    let mut plan = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            plan[[i, j]] = net.flow[i * m + j];
        }
    }
    Ok(SimplexSolution {
        plan,
        pivots: net.pivots,
    })
}

const NO_NODE: usize = usize::MAX;

struct Net<'a> {
    n: usize,
    m: usize,
    cost: &'a Array2<f64>,
    /// Arc ids: `i*m + j` for real arcs source i -> sink j, then
    /// `nm + i` for source i -> root, then `nm + n + j` for root -> sink j.
    flow: Vec<f64>,
    big: f64,
    tol: f64,
    // spanning tree state; node ids: sources 0..n, sinks n..n+m, root n+m
    parent: Vec<usize>,
    parent_arc: Vec<usize>,
    depth: Vec<usize>,
    pi: Vec<f64>,
    basic: Vec<bool>,
    basic_arcs: Vec<usize>,
    next_arc: usize,
    block_size: usize,
    pivots: usize,
}

impl<'a> Net<'a> {
    fn new(cost: &'a Array2<f64>, a: &[f64], b: &[f64]) -> Self {
        let (n, m) = cost.dim();
        let nm = n * m;
        let max_cost = cost.iter().fold(0.0_f64, |acc, &c| acc.max(c.abs()));
        let big = (1.0 + max_cost) * (n + m) as f64;

        let mut flow = vec![0.0; nm + n + m];
        let mut basic = vec![false; nm + n + m];
        let mut basic_arcs = Vec::with_capacity(n + m);
        for i in 0..n {
            flow[nm + i] = a[i];
            basic[nm + i] = true;
            basic_arcs.push(nm + i);
        }
        for j in 0..m {
            flow[nm + n + j] = b[j];
            basic[nm + n + j] = true;
            basic_arcs.push(nm + n + j);
        }

        let mut net = Self {
            n,
            m,
            cost,
            flow,
            big,
            tol: pivot_tol(max_cost),
            parent: vec![NO_NODE; n + m + 1],
            parent_arc: vec![usize::MAX; n + m + 1],
            depth: vec![0; n + m + 1],
            pi: vec![0.0; n + m + 1],
            basic,
            basic_arcs,
            next_arc: 0,
            block_size: ((nm as f64).sqrt() as usize).max(64),
            pivots: 0,
        };
        net.rebuild_tree();
        net
    }

    fn root(&self) -> usize {
        self.n + self.m
    }

    /// Arc endpoints as (tail, head) in node ids.
    fn arc_ends(&self, arc: usize) -> (usize, usize) {
        let nm = self.n * self.m;
        if arc < nm {
            (arc / self.m, self.n + arc % self.m)
        } else if arc < nm + self.n {
            (arc - nm, self.root())
        } else {
            (self.root(), self.n + (arc - nm - self.n))
        }
    }

    fn arc_cost(&self, arc: usize) -> f64 {
        let nm = self.n * self.m;
        if arc < nm {
            self.cost[[arc / self.m, arc % self.m]]
        } else {
            self.big
        }
    }

    /// BFS from the root through basic arcs, refreshing parents, depths and
    /// potentials. Potentials satisfy `pi[tail] - pi[head] = cost` on every
    /// basic arc, anchored at `pi[root] = 0`.
    fn rebuild_tree(&mut self) {
        let v = self.n + self.m + 1;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v];
        for &arc in &self.basic_arcs {
            let (t, h) = self.arc_ends(arc);
            adj[t].push((h, arc));
            adj[h].push((t, arc));
        }
        let root = self.root();
        self.parent[root] = NO_NODE;
        self.parent_arc[root] = usize::MAX;
        self.depth[root] = 0;
        self.pi[root] = 0.0;
        let mut stack = vec![root];
        let mut seen = vec![false; v];
        seen[root] = true;
        while let Some(p) = stack.pop() {
            for &(q, arc) in &adj[p] {
                if seen[q] {
                    continue;
                }
                seen[q] = true;
                self.parent[q] = p;
                self.parent_arc[q] = arc;
                self.depth[q] = self.depth[p] + 1;
                let (tail, _) = self.arc_ends(arc);
                // tail -> head: pi[tail] = cost + pi[head]
                self.pi[q] = if tail == q {
                    self.arc_cost(arc) + self.pi[p]
                } else {
                    self.pi[p] - self.arc_cost(arc)
                };
                stack.push(q);
            }
        }
        debug_assert!(seen.iter().all(|&s| s), "basis does not span all nodes");
    }

    fn reduced_cost(&self, arc: usize) -> f64 {
        let (t, h) = self.arc_ends(arc);
        self.arc_cost(arc) - self.pi[t] + self.pi[h]
    }

    /// Rolling block search over real arcs; most negative in the first block
    /// containing a candidate, ties to the lowest arc id.
    fn find_entering(&mut self) -> Option<usize> {
        let nm = self.n * self.m;
        let mut scanned = 0;
        let mut cursor = self.next_arc;
        while scanned < nm {
            let block_end = (scanned + self.block_size).min(nm);
            let mut best: Option<(usize, f64)> = None;
            while scanned < block_end {
                let arc = cursor;
                cursor = if cursor + 1 == nm { 0 } else { cursor + 1 };
                scanned += 1;
                if self.basic[arc] {
                    continue;
                }
                let rc = self.reduced_cost(arc);
                if rc < -self.tol {
                    let better = match best {
                        None => true,
                        Some((barc, brc)) => rc < brc || (rc == brc && arc < barc),
                    };
                    if better {
                        best = Some((arc, rc));
                    }
                }
            }
            if let Some((arc, _)) = best {
                self.next_arc = cursor;
                return Some(arc);
            }
        }
        None
    }

    fn run(&mut self) -> Result<()> {
        // Generous cap; block search with a strongly feasible basis
        // terminates far below it in practice.
        let cap = 1000 + 200 * (self.n + self.m) + self.n * self.m;
        while let Some(entering) = self.find_entering() {
            self.pivot(entering)?;
            self.pivots += 1;
            if self.pivots > cap {
                return Err(AgwError::invalid(
                    "network simplex exceeded its pivot cap (numerically degenerate instance)",
                ));
            }
        }
        Ok(())
    }

    /// One pivot: push flow around the unique cycle closed by `entering`.
    fn pivot(&mut self, entering: usize) -> Result<()> {
        let (tail, head) = self.arc_ends(entering);

        // Tree paths from both endpoints up to their lowest common ancestor.
        let mut up_tail = Vec::new(); // arcs on tail -> apex
        let mut up_head = Vec::new(); // arcs on head -> apex
        let (mut x, mut y) = (tail, head);
        while self.depth[x] > self.depth[y] {
            up_tail.push(self.parent_arc[x]);
            x = self.parent[x];
        }
        while self.depth[y] > self.depth[x] {
            up_head.push(self.parent_arc[y]);
            y = self.parent[y];
        }
        while x != y {
            up_tail.push(self.parent_arc[x]);
            x = self.parent[x];
            up_head.push(self.parent_arc[y]);
            y = self.parent[y];
        }

        // Augmenting theta flows tail -> head across the entering arc and
        // returns head -> apex -> tail through the tree. An arc gains flow
        // when it points along that circulation, loses flow otherwise.
        // Walking node-by-node keeps each arc's orientation explicit.
        let mut cycle: Vec<(usize, bool)> = Vec::with_capacity(up_tail.len() + up_head.len());
        // Segment apex -> tail, in apex-first order (augmentation runs
        // apex -> tail here, i.e. parent -> child at every step).
        let mut node = tail;
        let mut seg = Vec::with_capacity(up_tail.len());
        for &arc in &up_tail {
            let (t, _) = self.arc_ends(arc);
            // child -> parent step; augmentation direction is parent -> child,
            // so the arc is forward iff its tail is the parent.
            seg.push((arc, t != node));
            node = self.parent[node];
        }
        seg.reverse();
        cycle.extend(seg);
        // Segment head -> apex: augmentation runs child -> parent.
        let mut node = head;
        for &arc in &up_head {
            let (t, _) = self.arc_ends(arc);
            cycle.push((arc, t == node));
            node = self.parent[node];
        }

        let mut theta = f64::INFINITY;
        for &(arc, forward) in &cycle {
            if !forward {
                theta = theta.min(self.flow[arc]);
            }
        }
        if !theta.is_finite() {
            return Err(AgwError::invalid(
                "transportation problem is unbounded (corrupt basis)",
            ));
        }

        // Leaving arc: last blocking arc in cycle order from the apex. The
        // cycle list is ordered apex->tail then head->apex; augmentation
        // order from the apex is exactly that list.
        let mut leaving = None;
        for &(arc, forward) in &cycle {
            if !forward && self.flow[arc] == theta {
                leaving = Some(arc);
            }
        }

        for &(arc, forward) in &cycle {
            if forward {
                self.flow[arc] += theta;
            } else {
                self.flow[arc] -= theta;
            }
        }
        self.flow[entering] += theta;

        let leaving = leaving
            .ok_or_else(|| AgwError::invalid("pivot cycle has no blocking arc (corrupt basis)"))?;
        self.basic[leaving] = false;
        self.basic[entering] = true;
        let slot = self
            .basic_arcs
            .iter()
            .position(|&a| a == leaving)
            .expect("leaving arc tracked as basic");
        self.basic_arcs[slot] = entering;
        self.flow[leaving] = 0.0;
        self.rebuild_tree();
        Ok(())
    }
}
