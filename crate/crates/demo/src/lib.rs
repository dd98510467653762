//! Browser bindings for the static demo page in `www/`.

use leo_topo::constellation::{propagate, ShellCatalog, ShellConfig};
use leo_topo::geo::{cartesian_to_geo, geographic_angle, EarthModel, GeoCoord};
use leo_topo::metrics::rtt_of_path;
use leo_topo::routing::shortest_paths_snapshot;
use leo_topo::topology::{build_plus_grid, snapshot_graph, GslPolicy};
use leo_topo::traffic::{build_matrix, bundled_cities, City};
use wasm_bindgen::prelude::*;

fn shell(name: &str) -> Result<ShellConfig, String> {
    ShellCatalog::builtin()
        .get(name)
        .cloned()
        .ok_or_else(|| format!("unknown shell {name}"))
}

fn city(id: u32) -> Result<City, String> {
    bundled_cities()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| format!("unknown city id {id}"))
}

/// Comma-separated catalog shell names.
#[wasm_bindgen]
pub fn shell_names() -> String {
    ShellCatalog::builtin().names().collect::<Vec<_>>().join(",")
}

/// Bundled cities as `id,name,lat,lon` lines.
#[wasm_bindgen]
pub fn city_list() -> String {
    bundled_cities()
        .iter()
        .map(|c| format!("{},{},{},{}", c.id, c.name, c.coord.latitude_deg, c.coord.longitude_deg))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn subsatellite_points_inner(name: &str, t_s: f64) -> Result<Vec<f64>, String> {
    let shell = shell(name)?;
    let earth = EarthModel::default();
    Ok(propagate(&earth, &shell, t_s)
        .into_iter()
        .flat_map(|p| {
            let g = cartesian_to_geo(&earth, p, t_s);
            [g.latitude_deg, g.longitude_deg]
        })
        .collect())
}

/// Flat `[lat0, lon0, lat1, lon1, ...]` of every satellite's ground point at `t_s`.
#[wasm_bindgen]
pub fn subsatellite_points(name: &str, t_s: f64) -> Result<Vec<f64>, JsValue> {
    subsatellite_points_inner(name, t_s).map_err(|e| JsValue::from_str(&e))
}

pub fn geographic_angle_inner(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64, String> {
    let a = GeoCoord::new(lat1, lon1, 0.0).map_err(|e| e.to_string())?;
    let b = GeoCoord::new(lat2, lon2, 0.0).map_err(|e| e.to_string())?;
    geographic_angle(&a, &b).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn geographic_angle_deg(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> Result<f64, JsValue> {
    geographic_angle_inner(lat1, lon1, lat2, lon2).map_err(|e| JsValue::from_str(&e))
}

pub fn rtt_series_inner(name: &str, src_id: u32, dst_id: u32, duration_s: f64, step_s: f64) -> Result<Vec<f64>, String> {
    let shell = shell(name)?;
    if src_id == dst_id {
        return Err("pick two different cities".into());
    }
    let times = leo_topo::experiment::snapshot_times(duration_s, step_s).map_err(|e| e.to_string())?;
    let cities = vec![city(src_id)?, city(dst_id)?];
    let matrix = build_matrix(&cities).map_err(|e| e.to_string())?;
    let pair = matrix
        .pairs
        .iter()
        .position(|p| cities[p.src].id == src_id)
        .expect("two-city matrix holds both directions");
    let earth = EarthModel::default();
    let isl = build_plus_grid(&shell).map_err(|e| e.to_string())?;
    let policy = GslPolicy::default();
    Ok(times
        .iter()
        .map(|&t| {
            let g = snapshot_graph(&earth, &shell, &isl, &cities, &policy, t);
            shortest_paths_snapshot(&g, &matrix)[pair]
                .path()
                .map_or(f64::NAN, |p| rtt_of_path(p) * 1e3)
        })
        .collect())
}

/// Round-trip time in ms per snapshot between two bundled cities; NaN when unreachable.
#[wasm_bindgen]
pub fn rtt_series(name: &str, src_id: u32, dst_id: u32, duration_s: f64, step_s: f64) -> Result<Vec<f64>, JsValue> {
    rtt_series_inner(name, src_id, dst_id, duration_s, step_s).map_err(|e| JsValue::from_str(&e))
}
