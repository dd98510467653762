//! Reference implementations used only by tests. They favour obviousness
//! over speed and share no code paths with the library beyond its types.

#![allow(dead_code)]

use leo_topo::constellation::ShellConfig;
use leo_topo::geo::{EarthModel, GeoCoord};
use leo_topo::routing::PairRoute;
use leo_topo::topology::SnapshotGraph;
use leo_topo::traffic::{City, TrafficMatrix};
use rand::Rng;

pub const INF: u64 = u64::MAX / 4;

/// All-pairs satellite distances by Floyd-Warshall over ISL edges only.
pub fn floyd_warshall_sats(g: &SnapshotGraph) -> Vec<Vec<u64>> {
    let n = g.num_sats;
    let mut d = vec![vec![INF; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for e in &g.edges[..g.isl_count] {
        let (a, b) = (e.a as usize, e.b as usize);
        d[a][b] = d[a][b].min(e.weight_mm);
        d[b][a] = d[b][a].min(e.weight_mm);
    }
    for k in 0..n {
        for i in 0..n {
            if d[i][k] == INF {
                continue;
            }
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Ground links of each city as (satellite, weight).
fn uplinks(g: &SnapshotGraph) -> Vec<Vec<(usize, u64)>> {
    let mut up = vec![Vec::new(); g.num_cities];
    for e in g.gsl_edges() {
        let (sat, city) = if g.is_city(e.b) { (e.a, e.b) } else { (e.b, e.a) };
        up[city as usize - g.num_sats].push((sat as usize, e.weight_mm));
    }
    up
}

/// Reference route for every pair: the shortest length through satellites
/// only, and among equal lengths the lexicographically smallest node list,
/// built greedily from exact distances-to-target.
pub fn reference_routes(g: &SnapshotGraph, matrix: &TrafficMatrix) -> Vec<Option<(u64, Vec<u32>)>> {
    let d = floyd_warshall_sats(g);
    let up = uplinks(g);
    let ns = g.num_sats;
    matrix
        .pairs
        .iter()
        .map(|p| {
            // distance from each satellite to the destination city
            let to_dst: Vec<u64> = (0..ns)
                .map(|s| up[p.dst].iter().map(|&(t, w)| d[s][t].saturating_add(w)).min().unwrap_or(INF))
                .collect();
            let total = up[p.src].iter().map(|&(s, w)| w.saturating_add(to_dst[s])).min().unwrap_or(INF);
            if total >= INF {
                return None;
            }
            let src_node = (ns + p.src) as u32;
            let dst_node = (ns + p.dst) as u32;
            let mut nodes = vec![src_node];
            let mut travelled = 0u64;
            let mut here = src_node;
            while here != dst_node {
                let next = g
                    .neighbors(here)
                    .iter()
                    .filter(|&&(v, w)| {
                        let rest = if v == dst_node {
                            0
                        } else if g.is_city(v) {
                            INF
                        } else {
                            to_dst[v as usize]
                        };
                        travelled + w + rest == total
                    })
                    .map(|&(v, w)| (v, w))
                    .min()
                    .expect("a tight edge exists on a shortest path");
                travelled += next.1;
                here = next.0;
                nodes.push(here);
            }
            Some((total, nodes))
        })
        .collect()
}

pub fn as_reference(routes: &[PairRoute]) -> Vec<Option<(u64, Vec<u32>)>> {
    routes
        .iter()
        .map(|r| r.path().map(|p| (p.length_mm, p.nodes.clone())))
        .collect()
}

/// Satellite position from explicit rotation matrices.
pub fn reference_position(earth: &EarthModel, shell: &ShellConfig, orbit: u32, slot: u32, t: f64) -> [f64; 3] {
    let a = earth.radius_m + shell.altitude_km * 1000.0;
    let period = 2.0 * std::f64::consts::PI * (a.powi(3) / earth.mu_m3s2).sqrt();
    let (m, n) = (f64::from(shell.num_orbits), f64::from(shell.sats_per_orbit));
    let raan = 2.0 * std::f64::consts::PI * f64::from(orbit) / m;
    let u = 2.0 * std::f64::consts::PI * (f64::from(slot) + f64::from(orbit) * shell.inter_plane_phase_fraction) / n
        + 2.0 * std::f64::consts::PI * t / period;
    let inc = shell.inclination_deg.to_radians();
    let rz = [[raan.cos(), -raan.sin(), 0.0], [raan.sin(), raan.cos(), 0.0], [0.0, 0.0, 1.0]];
    let rx = [[1.0, 0.0, 0.0], [0.0, inc.cos(), -inc.sin()], [0.0, inc.sin(), inc.cos()]];
    let v = [a * u.cos(), a * u.sin(), 0.0];
    let mul = |m: &[[f64; 3]; 3], v: [f64; 3]| -> [f64; 3] {
        [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
    };
    mul(&rz, mul(&rx, v))
}

/// Unit vector of a surface point (lat, lon) in the Earth-fixed frame.
pub fn unit(lat_deg: f64, lon_deg: f64) -> [f64; 3] {
    let (la, lo) = (lat_deg.to_radians(), lon_deg.to_radians());
    [la.cos() * lo.cos(), la.cos() * lo.sin(), la.sin()]
}

/// Great-circle distance by the haversine formula.
pub fn haversine_m(radius: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let dp = p2 - p1;
    let dl = (b.1 - a.1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * radius * h.sqrt().min(1.0).asin()
}

pub fn random_shell(rng: &mut impl Rng, name: &str, max_dim: u32) -> ShellConfig {
    let m = rng.gen_range(3..=max_dim);
    let n = rng.gen_range(3..=max_dim);
    let alt = rng.gen_range(300.0..2000.0);
    let inc = rng.gen_range(1.0..179.0);
    ShellConfig::new(name, alt, m, n, inc)
        .unwrap()
        .with_phase_fraction(rng.gen_range(0.0..1.0))
        .unwrap()
}

pub fn random_cities(rng: &mut impl Rng, count: usize) -> Vec<City> {
    (0..count)
        .map(|i| City {
            id: i as u32 + 1,
            name: format!("city{i}"),
            coord: GeoCoord::surface(rng.gen_range(-70.0..70.0), rng.gen_range(-180.0..180.0)),
            rank: i as u32 + 1,
        })
        .collect()
}
