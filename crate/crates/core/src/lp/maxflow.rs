//! Dinic's maximum flow on `f64` capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    max_finite_cap: f64,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
            max_finite_cap: 0.0,
        }
    }

    fn push_arc_pair(&mut self, u: usize, v: usize, forward: f64, backward: f64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(forward);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(backward);
        for c in [forward, backward] {
            if c.is_finite() {
                self.max_finite_cap = self.max_finite_cap.max(c);
            }
        }
    }

    /// Directed arc; `capacity` may be `f64::INFINITY`.
    pub fn add_arc(&mut self, u: usize, v: usize, capacity: f64) {
        if capacity > 0.0 {
            self.push_arc_pair(u, v, capacity, 0.0);
        }
    }

    /// Undirected edge: capacity `capacity` in both directions.
    pub fn add_edge(&mut self, u: usize, v: usize, capacity: f64) {
        if capacity > 0.0 {
            self.push_arc_pair(u, v, capacity, capacity);
        }
    }

    fn eps(&self) -> f64 {
        1e-12 * self.max_finite_cap.max(1.0)
    }

    fn levels(&self, s: usize, eps: f64) -> Vec<i64> {
        let mut level = vec![-1i64; self.adj.len()];
        let mut queue = VecDeque::new();
        level[s] = 0;
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if level[v] < 0 && self.cap[a] > eps {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    /// Saturates the network from `s` to `t` and returns the flow value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        let eps = self.eps();
        let mut total = 0.0;
        loop {
            let mut level = self.levels(s, eps);
            if level[t] < 0 {
                return total;
            }
            let mut next = vec![0usize; self.adj.len()];
            // blocking flow via repeated iterative DFS in the level graph
            loop {
                let mut path: Vec<usize> = Vec::new();
                let mut u = s;
                let found = loop {
                    if u == t {
                        break true;
                    }
                    let mut advanced = false;
                    while next[u] < self.adj[u].len() {
                        let a = self.adj[u][next[u]];
                        let v = self.to[a];
                        if self.cap[a] > eps && level[v] == level[u] + 1 {
                            path.push(a);
                            u = v;
                            advanced = true;
                            break;
                        }
                        next[u] += 1;
                    }
                    if advanced {
                        continue;
                    }
                    // dead end: prune u and retreat
                    level[u] = -1;
                    match path.pop() {
                        Some(a) => {
                            u = self.to[a ^ 1];
                            next[u] += 1;
                        }
                        None => break false,
                    }
                };
                if !found {
                    break;
                }
                let bottleneck = path
                    .iter()
                    .map(|&a| self.cap[a])
                    .fold(f64::INFINITY, f64::min);
                for &a in &path {
                    self.cap[a] -= bottleneck;
                    self.cap[a ^ 1] += bottleneck;
                }
                total += bottleneck;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network (the source side of
    /// a minimum cut once `max_flow` has run).
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        let eps = self.eps();
        self.levels(s, eps).into_iter().map(|l| l >= 0).collect()
    }
}
