//! Per-snapshot shortest paths between city pairs.
//!
//! One Dijkstra run per source city. Cities other than the source are
//! never expanded, so traffic only transits satellites. Among equal-length
//! paths the lexicographically smallest node sequence wins.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::topology::{Millimeters, SnapshotGraph};
use crate::traffic::TrafficMatrix;

/// A concrete route through a snapshot graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoutePath {
    pub nodes: Vec<u32>,
    pub length_mm: Millimeters,
}

impl RoutePath {
    pub fn length_m(&self) -> f64 {
        self.length_mm as f64 / 1000.0
    }

    /// Number of edges traversed, including both ground links.
    pub fn hop_count(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairRoute {
    Reachable(RoutePath),
    Unreachable,
}

impl PairRoute {
    pub fn path(&self) -> Option<&RoutePath> {
        match self {
            PairRoute::Reachable(p) => Some(p),
            PairRoute::Unreachable => None,
        }
    }
}

const NO_PRED: u32 = u32::MAX;

/// Reusable Dijkstra buffers.
#[derive(Debug, Default)]
pub struct Router {
    dist: Vec<Millimeters>,
    pred: Vec<u32>,
    settled: Vec<bool>,
    heap: BinaryHeap<Reverse<(Millimeters, u32)>>,
    scratch_a: Vec<u32>,
    scratch_b: Vec<u32>,
}

fn trace(pred: &[u32], mut node: u32, out: &mut Vec<u32>) {
    out.clear();
    while node != NO_PRED {
        out.push(node);
        node = pred[node as usize];
    }
    out.reverse();
}

impl Router {
    pub fn new() -> Self {
        Self::default()
    }

    /// Settles every node reachable from `source`, stopping once all
    /// `targets` are settled.
    pub fn run(&mut self, g: &SnapshotGraph, source: u32, targets: &[u32]) {
        let n = g.node_count();
        self.dist.clear();
        self.dist.resize(n, Millimeters::MAX);
        self.pred.clear();
        self.pred.resize(n, NO_PRED);
        self.settled.clear();
        self.settled.resize(n, false);
        self.heap.clear();

        let mut remaining = targets.iter().filter(|&&t| t != source).count();
        self.dist[source as usize] = 0;
        self.heap.push(Reverse((0, source)));
        while let Some(Reverse((d, u))) = self.heap.pop() {
            if self.settled[u as usize] || d > self.dist[u as usize] {
                continue;
            }
            self.settled[u as usize] = true;
            if u != source && g.is_city(u) {
                if targets.contains(&u) {
                    remaining -= 1;
                    if remaining == 0 {
                        break;
                    }
                }
                continue;
            }
            for &(v, w) in g.neighbors(u) {
                if self.settled[v as usize] {
                    continue;
                }
                let nd = d + w;
                let vi = v as usize;
                if nd < self.dist[vi] {
                    self.dist[vi] = nd;
                    self.pred[vi] = u;
                    self.heap.push(Reverse((nd, v)));
                } else if nd == self.dist[vi] && self.pred[vi] != u && self.prefers(u, self.pred[vi], v) {
                    self.pred[vi] = u;
                }
            }
        }
    }

    // Compares the two full candidate sequences ending in `target`.
    fn prefers(&mut self, candidate: u32, incumbent: u32, target: u32) -> bool {
        trace(&self.pred, candidate, &mut self.scratch_a);
        trace(&self.pred, incumbent, &mut self.scratch_b);
        self.scratch_a.push(target);
        self.scratch_b.push(target);
        self.scratch_a < self.scratch_b
    }

    pub fn distance(&self, node: u32) -> Option<Millimeters> {
        self.settled[node as usize].then(|| self.dist[node as usize])
    }

    pub fn path_to(&self, node: u32) -> Option<RoutePath> {
        let length_mm = self.distance(node)?;
        let mut nodes = Vec::new();
        trace(&self.pred, node, &mut nodes);
        Some(RoutePath { nodes, length_mm })
    }
}

/// Shortest route for every pair of `matrix`, indexed by pair id. Graph city
/// nodes must follow the order of `matrix.cities`.
pub fn shortest_paths_snapshot(g: &SnapshotGraph, matrix: &TrafficMatrix) -> Vec<PairRoute> {
    assert_eq!(g.num_cities, matrix.cities.len(), "graph and matrix disagree on cities");
    let mut router = Router::new();
    let mut routes = vec![PairRoute::Unreachable; matrix.len()];
    let city_nodes: Vec<u32> = (0..g.num_cities).map(|i| g.city_node(i)).collect();

    // pairs are grouped by source; one search per source
    let mut start = 0;
    while start < matrix.pairs.len() {
        let src = matrix.pairs[start].src;
        let end = start + matrix.pairs[start..].iter().take_while(|p| p.src == src).count();
        let targets: Vec<u32> = matrix.pairs[start..end].iter().map(|p| city_nodes[p.dst]).collect();
        router.run(g, city_nodes[src], &targets);
        for (offset, &t) in targets.iter().enumerate() {
            if let Some(path) = router.path_to(t) {
                routes[start + offset] = PairRoute::Reachable(path);
            }
        }
        start = end;
    }
    routes
}

/// Number of snapshot-to-snapshot differences in a time-ordered series.
/// Moving into or out of "unreachable" (`None`) counts as a change.
pub fn count_changes<T: PartialEq>(series: &[Option<T>]) -> Result<usize> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok(series.windows(2).filter(|w| w[0] != w[1]).count())
}

/// Path changes across a time-ordered route series, comparing node sequences.
pub fn count_path_changes(routes: &[PairRoute]) -> Result<usize> {
    let seq: Vec<Option<&[u32]>> = routes.iter().map(|r| r.path().map(|p| p.nodes.as_slice())).collect();
    count_changes(&seq)
}

/// One path-dump CSV line: `t,pair_id,node0|node1|...|nodeK,length_m`.
pub fn path_dump_line(t_s: f64, pair_id: usize, path: &RoutePath) -> String {
    let mut line = format!("{t_s},{pair_id},");
    for (i, n) in path.nodes.iter().enumerate() {
        if i > 0 {
            line.push('|');
        }
        let _ = write!(line, "{n}");
    }
    let _ = write!(line, ",{:.3}", path.length_m());
    line
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoCoord;
    use crate::topology::GraphEdge;
    use crate::traffic::{build_matrix, City};

    fn cities(n: usize) -> Vec<City> {
        (0..n)
            .map(|i| City {
                id: i as u32 + 1,
                name: format!("c{i}"),
                coord: GeoCoord::surface(i as f64, i as f64),
                rank: i as u32 + 1,
            })
            .collect()
    }

    fn edge(a: u32, b: u32, w: u64) -> GraphEdge {
        GraphEdge { a, b, weight_mm: w }
    }

    #[test]
    fn single_relay() {
        // sats 0..3, cities 3 and 4 both see satellite 1
        let edges = vec![edge(0, 1, 10), edge(1, 2, 10), edge(1, 3, 5), edge(1, 4, 7), edge(0, 3, 50)];
        let g = SnapshotGraph::from_edges(0.0, 3, 2, 2, edges);
        let m = build_matrix(&cities(2)).unwrap();
        let routes = shortest_paths_snapshot(&g, &m);
        let p = routes[0].path().unwrap();
        assert_eq!(p.nodes, vec![3, 1, 4]);
        assert_eq!(p.length_mm, 12);
        assert_eq!(p.hop_count(), 2);
        assert_eq!(routes[1].path().unwrap().nodes, vec![4, 1, 3]);
    }

    #[test]
    fn cities_are_not_transit_nodes() {
        // c3 - s0 - c4 - s1 - c5 : c3 to c5 must not pass through c4
        let edges = vec![edge(0, 3, 1), edge(0, 4, 1), edge(1, 4, 1), edge(1, 5, 1)];
        let g = SnapshotGraph::from_edges(0.0, 3, 3, 0, edges);
        let m = build_matrix(&cities(3)).unwrap();
        let routes = shortest_paths_snapshot(&g, &m);
        let pid = m.pairs.iter().position(|p| p.src == 0 && p.dst == 2).unwrap();
        assert_eq!(routes[pid], PairRoute::Unreachable);
    }

    #[test]
    fn lexicographic_ties() {
        // square 0-1-3 and 0-2-3 of equal length, cities 4 (at 0) and 5 (at 3)
        let edges = vec![edge(0, 2, 5), edge(2, 3, 5), edge(0, 1, 5), edge(1, 3, 5), edge(0, 4, 1), edge(3, 5, 1)];
        let g = SnapshotGraph::from_edges(0.0, 4, 2, 4, edges);
        let m = build_matrix(&cities(2)).unwrap();
        let routes = shortest_paths_snapshot(&g, &m);
        assert_eq!(routes[0].path().unwrap().nodes, vec![4, 0, 1, 3, 5]);
        assert_eq!(routes[1].path().unwrap().nodes, vec![5, 3, 1, 0, 4]);

        // same graph with edges listed in a different order
        let edges = vec![edge(3, 5, 1), edge(1, 3, 5), edge(0, 4, 1), edge(0, 1, 5), edge(2, 3, 5), edge(0, 2, 5)];
        let g2 = SnapshotGraph::from_edges(0.0, 4, 2, 4, edges);
        assert_eq!(shortest_paths_snapshot(&g2, &m), routes);
    }

    #[test]
    fn change_counting() {
        let a = PairRoute::Reachable(RoutePath {
            nodes: vec![5, 0, 6],
            length_mm: 3,
        });
        let b = PairRoute::Reachable(RoutePath {
            nodes: vec![5, 1, 6],
            length_mm: 3,
        });
        assert_eq!(count_path_changes(&vec![a.clone(); 400]).unwrap(), 0);
        let alt = vec![a.clone(), b.clone(), a.clone(), b.clone(), a.clone()];
        assert_eq!(count_path_changes(&alt).unwrap(), 4);
        assert_eq!(count_path_changes(&[a.clone(), PairRoute::Unreachable, a.clone()]).unwrap(), 2);
        assert_eq!(count_path_changes(&[PairRoute::Unreachable, PairRoute::Unreachable]).unwrap(), 0);
        assert!(matches!(count_path_changes(&[]), Err(Error::EmptySeries)));
    }

    #[test]
    fn dump_line() {
        let p = RoutePath {
            nodes: vec![10, 2, 3, 11],
            length_mm: 1_234_567,
        };
        assert_eq!(path_dump_line(3.0, 7, &p), "3,7,10|2|3|11,1234.567");
    }
}
