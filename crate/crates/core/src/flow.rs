//! Min-cost flow by successive shortest paths with Dijkstra potentials, on
//! real-valued capacities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone)]
pub struct MinCostFlow {
    adjacency: Vec<Vec<usize>>,
    head: Vec<usize>,
    residual: Vec<f64>,
    capacity: Vec<f64>,
    cost: Vec<f64>,
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            adjacency: vec![Vec::new(); nodes],
            head: Vec::new(),
            residual: Vec::new(),
            capacity: Vec::new(),
            cost: Vec::new(),
        }
    }

    /// Adds an arc and returns its id. Costs must be nonnegative.
    pub fn add_arc(&mut self, from: usize, to: usize, capacity: f64, cost: f64) -> usize {
        let id = self.head.len();
        for (a, b, c, k) in [(from, to, capacity, cost), (to, from, 0.0, -cost)] {
            self.adjacency[a].push(self.head.len());
            self.head.push(b);
            self.residual.push(c);
            self.capacity.push(c);
            self.cost.push(k);
        }
        id
    }

    pub fn flow(&self, arc: usize) -> f64 {
        (self.capacity[arc] - self.residual[arc]).max(0.0)
    }

    /// Pushes up to `limit` units from `source` to `sink` at minimum cost.
    /// Residual capacities below `eps` count as saturated. Returns the
    /// amount sent.
    pub fn run(&mut self, source: usize, sink: usize, limit: f64, eps: f64) -> f64 {
        let n = self.adjacency.len();
        let mut potential = vec![0.0; n];
        let mut sent = 0.0;
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        while sent < limit - eps {
            dist.iter_mut().for_each(|d| *d = f64::INFINITY);
            parent.iter_mut().for_each(|p| *p = usize::MAX);
            dist[source] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Entry { dist: 0.0, node: source });
            while let Some(Entry { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &arc in &self.adjacency[u] {
                    if self.residual[arc] <= eps {
                        continue;
                    }
                    let v = self.head[arc];
                    let reduced = (self.cost[arc] + potential[u] - potential[v]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[v] {
                        dist[v] = nd;
                        parent[v] = arc;
                        heap.push(Entry { dist: nd, node: v });
                    }
                }
            }
            if !dist[sink].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = limit - sent;
            let mut v = sink;
            while v != source {
                let arc = parent[v];
                push = push.min(self.residual[arc]);
                v = self.head[arc ^ 1];
            }
            let mut v = sink;
            while v != source {
                let arc = parent[v];
                self.residual[arc] -= push;
                self.residual[arc ^ 1] += push;
                v = self.head[arc ^ 1];
            }
            sent += push;
        }
        sent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefers_cheap_path() {
        let mut g = MinCostFlow::new(4);
        let cheap = g.add_arc(0, 1, 1.0, 0.0);
        let dear = g.add_arc(0, 2, 5.0, 3.0);
        g.add_arc(1, 3, 5.0, 0.0);
        g.add_arc(2, 3, 5.0, 0.0);
        let sent = g.run(0, 3, 2.0, 1e-12);
        assert!((sent - 2.0).abs() < 1e-12);
        assert!((g.flow(cheap) - 1.0).abs() < 1e-12);
        assert!((g.flow(dear) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reroutes_through_reverse_arcs() {
        // 0 -> {1,2} -> {3,4} -> 5 where the greedy first path blocks
        let mut g = MinCostFlow::new(6);
        g.add_arc(0, 1, 1.0, 0.0);
        g.add_arc(0, 2, 1.0, 0.0);
        g.add_arc(1, 3, 1.0, 0.0);
        g.add_arc(1, 4, 1.0, 1.0);
        g.add_arc(2, 3, 1.0, 0.0);
        g.add_arc(3, 5, 1.0, 0.0);
        g.add_arc(4, 5, 1.0, 0.0);
        let sent = g.run(0, 5, 10.0, 1e-12);
        assert!((sent - 2.0).abs() < 1e-12);
    }
}
