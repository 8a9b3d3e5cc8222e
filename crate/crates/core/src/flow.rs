//! Real-capacity network flow: Dinic's maximum flow and successive
//! shortest paths for minimum-cost flow.
//!
//! Both solvers treat residual capacities below [`FLOW_EPS`] as exhausted.

use std::collections::VecDeque;

pub const FLOW_EPS: f64 = 1e-15;

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

/// Directed graph with paired residual edges.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        Self {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    /// Adds `from -> to` and returns the edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge {
            to: from,
            cap: 0.0,
            cost: -cost,
        });
        self.adj[to].push(id + 1);
        id
    }

    /// Flow currently pushed through edge `id`.
    pub fn flow_on(&self, id: usize) -> f64 {
        self.edges[id ^ 1].cap
    }

    /// Maximum `source -> sink` flow (Dinic).
    pub fn max_flow(&mut self, source: usize, sink: usize) -> f64 {
        let n = self.node_count();
        let mut total = 0.0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[source] = 0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.edges[e].to;
                    if self.edges[e].cap > FLOW_EPS && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
            if level[sink] == usize::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let pushed = self.augment(source, sink, f64::INFINITY, &level, &mut next);
                if pushed <= FLOW_EPS {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        sink: usize,
        limit: f64,
        level: &[usize],
        next: &mut [usize],
    ) -> f64 {
        if u == sink {
            return limit;
        }
        while next[u] < self.adj[u].len() {
            let e = self.adj[u][next[u]];
            let v = self.edges[e].to;
            if self.edges[e].cap > FLOW_EPS && level[v] == level[u] + 1 {
                let pushed = self.augment(v, sink, limit.min(self.edges[e].cap), level, next);
                if pushed > FLOW_EPS {
                    self.edges[e].cap -= pushed;
                    self.edges[e ^ 1].cap += pushed;
                    return pushed;
                }
            }
            next[u] += 1;
        }
        0.0
    }

    /// Sends up to `demand` units from `source` to `sink` at minimum total
    /// cost. Returns `(flow, cost)`. Negative cycles are not supported.
    pub fn min_cost_flow(&mut self, source: usize, sink: usize, demand: f64) -> (f64, f64) {
        let n = self.node_count();
        let mut flow = 0.0;
        let mut cost = 0.0;
        while flow < demand - FLOW_EPS {
            // Bellman-Ford with a FIFO queue; residual costs may be negative.
            let mut dist = vec![f64::INFINITY; n];
            let mut prev_edge = vec![usize::MAX; n];
            let mut in_queue = vec![false; n];
            dist[source] = 0.0;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                in_queue[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > FLOW_EPS && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        prev_edge[edge.to] = e;
                        if !in_queue[edge.to] {
                            in_queue[edge.to] = true;
                            queue.push_back(edge.to);
                        }
                    }
                }
            }
            if dist[sink].is_infinite() {
                break;
            }
            let mut push = demand - flow;
            let mut v = sink;
            while v != source {
                let e = prev_edge[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = sink;
            while v != source {
                let e = prev_edge[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
            cost += push * dist[sink];
        }
        (flow, cost)
    }
}
