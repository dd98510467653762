//! +Grid inter-satellite links, ground visibility and per-snapshot graphs.

use std::fmt::Write as _;

use crate::constellation::{propagate, SatelliteId, ShellConfig};
use crate::error::{Error, Result};
use crate::geo::{surface_to_cartesian, CartesianPos, EarthModel};
use crate::traffic::City;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    IntraOrbit,
    InterOrbit,
}

/// An undirected ISL between flat satellite indices, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IslEdge {
    pub a: u32,
    pub b: u32,
    pub kind: LinkKind,
}

impl IslEdge {
    fn new(x: u32, y: u32, kind: LinkKind) -> Self {
        IslEdge {
            a: x.min(y),
            b: x.max(y),
            kind,
        }
    }
}

/// Builds the degree-4 +Grid: each satellite links to its in-plane
/// neighbours and to the same slot in both adjacent planes, wrapping in both
/// dimensions.
pub fn build_plus_grid(shell: &ShellConfig) -> Result<Vec<IslEdge>> {
    let (m, n) = (shell.num_orbits, shell.sats_per_orbit);
    if m < 3 || n < 3 {
        return Err(Error::Config(format!(
            "shell {}: +Grid needs at least 3 orbits and 3 satellites per orbit, got {m} x {n}",
            shell.name
        )));
    }
    let mut edges = Vec::with_capacity(2 * (m * n) as usize);
    for id in shell.satellite_ids() {
        let here = id.flat(n);
        let next_slot = SatelliteId {
            orbit: id.orbit,
            slot: (id.slot + 1) % n,
        };
        let next_orbit = SatelliteId {
            orbit: (id.orbit + 1) % m,
            slot: id.slot,
        };
        edges.push(IslEdge::new(here, next_slot.flat(n), LinkKind::IntraOrbit));
        edges.push(IslEdge::new(here, next_orbit.flat(n), LinkKind::InterOrbit));
    }
    edges.sort_by_key(|e| (e.a, e.b));
    Ok(edges)
}

/// Renders the ISL file: one `a b` line per edge.
pub fn isl_file(edges: &[IslEdge]) -> String {
    let mut out = String::with_capacity(edges.len() * 12);
    for e in edges {
        let _ = writeln!(out, "{} {}", e.a, e.b);
    }
    out
}

/// Ground-to-satellite attachment rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GslPolicy {
    pub min_elevation_deg: f64,
}

impl GslPolicy {
    pub const DEFAULT_MIN_ELEVATION_DEG: f64 = 25.0;

    pub fn new(min_elevation_deg: f64) -> Result<Self> {
        if !(0.0..90.0).contains(&min_elevation_deg) {
            return Err(Error::Config(format!(
                "minimum elevation {min_elevation_deg} outside [0, 90)"
            )));
        }
        Ok(GslPolicy { min_elevation_deg })
    }
}

impl Default for GslPolicy {
    fn default() -> Self {
        GslPolicy {
            min_elevation_deg: Self::DEFAULT_MIN_ELEVATION_DEG,
        }
    }
}

/// Elevation of `sat` above the local horizon at `gs`, in degrees.
pub fn elevation_deg(sat: CartesianPos, gs: CartesianPos) -> f64 {
    let look = sat - gs;
    let sin_elev = gs.dot(look) / (gs.norm() * look.norm());
    sin_elev.clamp(-1.0, 1.0).asin().to_degrees()
}

// absorbs rounding when a satellite is placed exactly on the mask angle
const ELEVATION_EPS_DEG: f64 = 1e-9;

pub fn visible(sat: CartesianPos, gs: CartesianPos, policy: &GslPolicy) -> bool {
    elevation_deg(sat, gs) >= policy.min_elevation_deg - ELEVATION_EPS_DEG
}

/// Edge weight in whole millimetres. Integer weights keep path sums exact
/// and independent of summation order.
pub type Millimeters = u64;

pub fn to_millimeters(meters: f64) -> Millimeters {
    (meters * 1000.0).round() as Millimeters
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphEdge {
    pub a: u32,
    pub b: u32,
    pub weight_mm: Millimeters,
}

/// Network at one instant. Nodes `0..num_sats` are satellites by flat index;
/// nodes `num_sats..num_sats + num_cities` are cities in the order given.
#[derive(Debug, Clone)]
pub struct SnapshotGraph {
    pub t_s: f64,
    pub num_sats: usize,
    pub num_cities: usize,
    pub isl_count: usize,
    /// ISL edges first (in ISL order), then GSL edges grouped by city.
    pub edges: Vec<GraphEdge>,
    offsets: Vec<usize>,
    adjacency: Vec<(u32, Millimeters)>,
}

impl SnapshotGraph {
    pub fn from_edges(t_s: f64, num_sats: usize, num_cities: usize, isl_count: usize, edges: Vec<GraphEdge>) -> Self {
        let n = num_sats + num_cities;
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0u32, 0); offsets[n]];
        for e in &edges {
            adjacency[fill[e.a as usize]] = (e.b, e.weight_mm);
            fill[e.a as usize] += 1;
            adjacency[fill[e.b as usize]] = (e.a, e.weight_mm);
            fill[e.b as usize] += 1;
        }
        // neighbours in ascending node order
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        SnapshotGraph {
            t_s,
            num_sats,
            num_cities,
            isl_count,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.num_sats + self.num_cities
    }

    pub fn city_node(&self, city_index: usize) -> u32 {
        (self.num_sats + city_index) as u32
    }

    pub fn is_city(&self, node: u32) -> bool {
        node as usize >= self.num_sats
    }

    pub fn neighbors(&self, node: u32) -> &[(u32, Millimeters)] {
        let i = node as usize;
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn weight(&self, a: u32, b: u32) -> Option<Millimeters> {
        self.neighbors(a)
            .binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|i| self.neighbors(a)[i].1)
    }

    pub fn gsl_edges(&self) -> &[GraphEdge] {
        &self.edges[self.isl_count..]
    }
}

/// Builds the graph at `t_s`: ISLs weighted by satellite separation and
/// every visible city-satellite link weighted by slant range.
pub fn snapshot_graph(
    earth: &EarthModel,
    shell: &ShellConfig,
    isl_edges: &[IslEdge],
    cities: &[City],
    policy: &GslPolicy,
    t_s: f64,
) -> SnapshotGraph {
    let sats = propagate(earth, shell, t_s);
    snapshot_from_positions(earth, &sats, isl_edges, cities, policy, t_s)
}

pub fn snapshot_from_positions(
    earth: &EarthModel,
    sats: &[CartesianPos],
    isl_edges: &[IslEdge],
    cities: &[City],
    policy: &GslPolicy,
    t_s: f64,
) -> SnapshotGraph {
    let num_sats = sats.len();
    let mut edges: Vec<GraphEdge> = isl_edges
        .iter()
        .map(|e| GraphEdge {
            a: e.a,
            b: e.b,
            weight_mm: to_millimeters(sats[e.a as usize].distance(sats[e.b as usize])),
        })
        .collect();
    let isl_count = edges.len();
    let min_sin = (policy.min_elevation_deg - ELEVATION_EPS_DEG).to_radians().sin();
    for (ci, city) in cities.iter().enumerate() {
        let gs = surface_to_cartesian(earth, &city.coord, t_s);
        let gs_norm = gs.norm();
        let node = (num_sats + ci) as u32;
        for (si, &sat) in sats.iter().enumerate() {
            let look = sat - gs;
            let range = look.norm();
            // same predicate as `visible`, without the asin
            if gs.dot(look) >= min_sin * gs_norm * range {
                edges.push(GraphEdge {
                    a: si as u32,
                    b: node,
                    weight_mm: to_millimeters(range),
                });
            }
        }
    }
    SnapshotGraph::from_edges(t_s, num_sats, cities.len(), isl_count, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ShellCatalog;
    use crate::geo::{GeoCoord, Vec3};
    use std::collections::HashMap;

    fn degree_map(edges: &[IslEdge]) -> HashMap<u32, usize> {
        let mut d = HashMap::new();
        for e in edges {
            *d.entry(e.a).or_default() += 1;
            *d.entry(e.b).or_default() += 1;
        }
        d
    }

    #[test]
    fn grid_counts() {
        let e1 = ShellConfig::new("E", 570.0, 20, 36, 70.0).unwrap();
        assert_eq!(build_plus_grid(&e1).unwrap().len(), 1440);
        let s1 = ShellCatalog::builtin().get("S1").unwrap().clone();
        let edges = build_plus_grid(&s1).unwrap();
        assert_eq!(edges.len(), 3168);
        let deg = degree_map(&edges);
        assert_eq!(deg.len(), 1584);
        assert!(deg.values().all(|&d| d == 4));
        assert!(edges.iter().all(|e| e.a < e.b));
    }

    #[test]
    fn grid_rejects_small_shells() {
        let s5 = ShellConfig::new("tiny", 560.0, 2, 43, 97.6).unwrap();
        assert!(matches!(build_plus_grid(&s5), Err(Error::Config(_))));
        let s = ShellConfig::new("tiny", 560.0, 5, 2, 97.6).unwrap();
        assert!(build_plus_grid(&s).is_err());
    }

    #[test]
    fn isl_file_format() {
        let s = ShellConfig::new("g", 560.0, 3, 3, 60.0).unwrap();
        let text = isl_file(&build_plus_grid(&s).unwrap());
        assert_eq!(text.lines().count(), 18);
        assert_eq!(text.lines().next(), Some("0 1"));
    }

    #[test]
    fn visibility_cases() {
        let policy = GslPolicy::default();
        let gs = Vec3::new(6_371_000.0, 0.0, 0.0);
        assert!(visible(gs * 1.1, gs, &GslPolicy::new(89.9).unwrap()));
        assert!(visible(gs * 1.1, gs, &policy));
        assert!(!visible(gs * -1.1, gs, &policy));

        // Satellite at radius r seen from a ground point of radius R at elevation e:
        // the earth-central angle is psi = acos(R cos e / r) - e.
        let (r_gs, r_sat) = (6_371_000.0_f64, 6_921_000.0_f64);
        for elev in [0.0_f64, 10.0, 25.0, 40.0, 75.0] {
            let e = elev.to_radians();
            let psi = (r_gs * e.cos() / r_sat).acos() - e;
            let sat = Vec3::new(r_sat * psi.cos(), r_sat * psi.sin(), 0.0);
            assert!((elevation_deg(sat, gs) - elev).abs() < 1e-9);
            let p = GslPolicy::new(elev).unwrap();
            assert!(visible(sat, gs, &p), "boundary at {elev} must be inclusive");
            let slightly_lower = Vec3::new(r_sat * (psi + 1e-4).cos(), r_sat * (psi + 1e-4).sin(), 0.0);
            assert!(!visible(slightly_lower, gs, &p));
        }
        assert!(GslPolicy::new(90.0).is_err());
        assert!(GslPolicy::new(-1.0).is_err());
    }

    fn city(id: u32, lat: f64, lon: f64) -> City {
        City {
            id,
            name: format!("c{id}"),
            coord: GeoCoord::surface(lat, lon),
            rank: id,
        }
    }

    #[test]
    fn intra_orbit_weights_constant_and_chord() {
        let earth = EarthModel::default();
        let s1 = ShellCatalog::builtin().get("S1").unwrap().clone();
        let isl = build_plus_grid(&s1).unwrap();
        let cities = vec![city(1, 40.7, -74.0), city(2, 51.5, -0.1)];
        // Frozen from 2 a sin(pi/22), a = 6_921_000 m.
        let chord = 1_969_921.991_378_813;
        let mut reference: Option<Vec<Millimeters>> = None;
        for t in [0.0, 37.0, 211.0] {
            let g = snapshot_graph(&earth, &s1, &isl, &cities, &GslPolicy::default(), t);
            let intra: Vec<_> = isl
                .iter()
                .zip(&g.edges)
                .filter(|(e, _)| e.kind == LinkKind::IntraOrbit)
                .map(|(_, ge)| ge.weight_mm)
                .collect();
            for &w in &intra {
                assert!((w as f64 / 1000.0 - chord).abs() <= 1e-3);
            }
            match &reference {
                None => reference = Some(intra),
                Some(r) => assert_eq!(r, &intra),
            }
            assert_eq!(g.isl_count, 3168);
        }
    }

    #[test]
    fn inter_orbit_weights_follow_latitude() {
        // Brute-force oracle: the inter-plane separation of co-rotating same-slot
        // satellites is largest at the equator crossing and shrinks toward the vertex.
        let earth = EarthModel::default();
        let shell = ShellConfig::new("X", 550.0, 12, 12, 53.0).unwrap();
        let a = SatelliteId { orbit: 0, slot: 0 };
        let b = SatelliteId { orbit: 1, slot: 0 };
        let period = crate::constellation::orbital_period(&earth, &shell);
        let quarter = period / 4.0;
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let t = quarter * k as f64 / 20.0;
            let pa = crate::constellation::satellite_position(&earth, &shell, a, t);
            let pb = crate::constellation::satellite_position(&earth, &shell, b, t);
            let d = pa.distance(pb);
            assert!(d <= last + 1e-6, "separation must shrink from node to vertex");
            last = d;
        }
        // and the graph weight agrees with the direct position computation
        let isl = build_plus_grid(&shell).unwrap();
        let g = snapshot_graph(&earth, &shell, &isl, &[], &GslPolicy::default(), 100.0);
        let pa = crate::constellation::satellite_position(&earth, &shell, a, 100.0);
        let pb = crate::constellation::satellite_position(&earth, &shell, b, 100.0);
        assert_eq!(g.weight(a.flat(12), b.flat(12)), Some(to_millimeters(pa.distance(pb))));
    }

    #[test]
    fn gsl_edges_are_visible_and_long_enough() {
        let earth = EarthModel::default();
        let shell = ShellCatalog::builtin().get("K3").unwrap().clone();
        let isl = build_plus_grid(&shell).unwrap();
        let cities = vec![city(1, 35.7, 139.7), city(2, -23.5, -46.6), city(3, 1.35, 103.8)];
        let policy = GslPolicy::default();
        let g = snapshot_graph(&earth, &shell, &isl, &cities, &policy, 50.0);
        let sats = propagate(&earth, &shell, 50.0);
        assert!(!g.gsl_edges().is_empty());
        for e in g.gsl_edges() {
            let ci = e.b as usize - g.num_sats;
            let gs = surface_to_cartesian(&earth, &cities[ci].coord, 50.0);
            assert!(visible(sats[e.a as usize], gs, &policy));
            assert!(e.weight_mm as f64 >= shell.altitude_km * 1e6 - 1.0);
        }
        assert!(g.edges.iter().all(|e| e.weight_mm > 0));
    }
}
