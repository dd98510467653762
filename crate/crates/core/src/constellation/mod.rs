//! Shell parameterization and circular-orbit propagation.

mod catalog;
pub mod tle;

use std::f64::consts::TAU;
use std::fmt;

pub use catalog::{ShellCatalog, ALT_SWEEP_KM, FINE_SWEEP_SATS, INCL_SWEEP_DEG, SWEEP_ORBITS, SWEEP_SATS};

use crate::error::{Error, Result};
use crate::geo::{CartesianPos, EarthModel, Vec3};

/// The design parameters of one shell.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellConfig {
    pub name: String,
    pub altitude_km: f64,
    pub num_orbits: u32,
    pub sats_per_orbit: u32,
    pub inclination_deg: f64,
    /// Fraction of the in-orbit slot spacing by which plane `p + 1` leads plane `p`.
    pub inter_plane_phase_fraction: f64,
}

impl ShellConfig {
    pub const MIN_ALTITUDE_KM: f64 = 300.0;
    pub const MAX_ALTITUDE_KM: f64 = 2000.0;

    pub fn new(
        name: impl Into<String>,
        altitude_km: f64,
        num_orbits: u32,
        sats_per_orbit: u32,
        inclination_deg: f64,
    ) -> Result<Self> {
        let shell = ShellConfig {
            name: name.into(),
            altitude_km,
            num_orbits,
            sats_per_orbit,
            inclination_deg,
            inter_plane_phase_fraction: 0.0,
        };
        shell.validate()?;
        Ok(shell)
    }

    pub fn with_phase_fraction(mut self, fraction: f64) -> Result<Self> {
        self.inter_plane_phase_fraction = fraction;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("shell {}: {msg}", self.name)));
        if self.name.is_empty() || self.name.chars().any(|c| c.is_whitespace() || c == ',') {
            return bad("name must be non-empty without whitespace or commas".into());
        }
        if !(Self::MIN_ALTITUDE_KM..=Self::MAX_ALTITUDE_KM).contains(&self.altitude_km) {
            return bad(format!(
                "altitude {} km outside [{}, {}]",
                self.altitude_km,
                Self::MIN_ALTITUDE_KM,
                Self::MAX_ALTITUDE_KM
            ));
        }
        if self.num_orbits == 0 || self.sats_per_orbit == 0 {
            return bad("orbit and satellite counts must be >= 1".into());
        }
        if !(self.inclination_deg > 0.0 && self.inclination_deg < 180.0) {
            return bad(format!("inclination {} outside (0, 180)", self.inclination_deg));
        }
        if !(0.0..1.0).contains(&self.inter_plane_phase_fraction) {
            return bad(format!(
                "phase fraction {} outside [0, 1)",
                self.inter_plane_phase_fraction
            ));
        }
        Ok(())
    }

    pub fn total_satellites(&self) -> usize {
        self.num_orbits as usize * self.sats_per_orbit as usize
    }

    pub fn semi_major_axis_m(&self, earth: &EarthModel) -> f64 {
        earth.radius_m + self.altitude_km * 1000.0
    }

    pub fn raan_rad(&self, orbit: u32) -> f64 {
        TAU * f64::from(orbit) / f64::from(self.num_orbits)
    }

    /// Argument of latitude of a satellite at t = 0.
    pub fn initial_arg_of_latitude_rad(&self, id: SatelliteId) -> f64 {
        TAU * (f64::from(id.slot) + f64::from(id.orbit) * self.inter_plane_phase_fraction)
            / f64::from(self.sats_per_orbit)
    }

    pub fn satellite_ids(&self) -> impl Iterator<Item = SatelliteId> + '_ {
        (0..self.num_orbits).flat_map(move |orbit| (0..self.sats_per_orbit).map(move |slot| SatelliteId { orbit, slot }))
    }
}

impl fmt::Display for ShellConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} km, {} x {}, {} deg)",
            self.name, self.altitude_km, self.num_orbits, self.sats_per_orbit, self.inclination_deg
        )
    }
}

/// A satellite addressed by (orbit plane, slot within plane).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatelliteId {
    pub orbit: u32,
    pub slot: u32,
}

impl SatelliteId {
    pub fn flat(self, sats_per_orbit: u32) -> u32 {
        self.orbit * sats_per_orbit + self.slot
    }

    pub fn from_flat(index: u32, sats_per_orbit: u32) -> Self {
        SatelliteId {
            orbit: index / sats_per_orbit,
            slot: index % sats_per_orbit,
        }
    }
}

/// Kepler period of a circular orbit at the shell's altitude.
pub fn orbital_period(earth: &EarthModel, shell: &ShellConfig) -> f64 {
    let a = shell.semi_major_axis_m(earth);
    TAU * (a * a * a / earth.mu_m3s2).sqrt()
}

/// Inertial position of one satellite at `t_s`.
pub fn satellite_position(earth: &EarthModel, shell: &ShellConfig, id: SatelliteId, t_s: f64) -> CartesianPos {
    let a = shell.semi_major_axis_m(earth);
    let motion = TAU / orbital_period(earth, shell);
    let u = shell.initial_arg_of_latitude_rad(id) + motion * t_s;
    let (sin_i, cos_i) = shell.inclination_deg.to_radians().sin_cos();
    let (sin_o, cos_o) = shell.raan_rad(id.orbit).sin_cos();
    let (sin_u, cos_u) = u.sin_cos();
    let x = a * cos_u;
    let y = a * sin_u * cos_i;
    let z = a * sin_u * sin_i;
    Vec3::new(x * cos_o - y * sin_o, x * sin_o + y * cos_o, z)
}

/// Positions of every satellite at `t_s`, indexed by flat satellite index.
pub fn propagate(earth: &EarthModel, shell: &ShellConfig, t_s: f64) -> Vec<CartesianPos> {
    shell
        .satellite_ids()
        .map(|id| satellite_position(earth, shell, id, t_s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn earth() -> EarthModel {
        EarthModel::default()
    }

    #[test]
    fn period_closed_form() {
        let s1 = ShellCatalog::builtin().get("S1").unwrap().clone();
        // Frozen from an independent evaluation of 2*pi*sqrt(a^3/mu).
        assert!((orbital_period(&earth(), &s1) - 5_730.127_089_334_606).abs() < 1e-6);

        let ground = ShellConfig {
            altitude_km: 0.0,
            ..s1.clone()
        };
        assert!((orbital_period(&earth(), &ground) - 5_060.837_447_340_496).abs() < 1e-6);

        let other = ShellConfig::new("X", 550.0, 3, 3, 97.0).unwrap();
        assert_eq!(orbital_period(&earth(), &other), orbital_period(&earth(), &s1));
    }

    #[test]
    fn validation_guards() {
        assert!(ShellConfig::new("A", 299.0, 3, 3, 53.0).is_err());
        assert!(ShellConfig::new("A", 2001.0, 3, 3, 53.0).is_err());
        assert!(ShellConfig::new("A", 550.0, 0, 3, 53.0).is_err());
        assert!(ShellConfig::new("A", 550.0, 3, 3, 0.0).is_err());
        assert!(ShellConfig::new("A", 550.0, 3, 3, 180.0).is_err());
        assert!(ShellConfig::new("A B", 550.0, 3, 3, 53.0).is_err());
        let ok = ShellConfig::new("A", 550.0, 3, 3, 53.0).unwrap();
        assert!(ok.clone().with_phase_fraction(1.0).is_err());
        assert!(ok.with_phase_fraction(0.5).is_ok());
    }

    #[test]
    fn flat_index_bijection() {
        let shell = ShellConfig::new("A", 550.0, 7, 5, 53.0).unwrap();
        for (i, id) in shell.satellite_ids().enumerate() {
            assert_eq!(id.flat(5) as usize, i);
            assert_eq!(SatelliteId::from_flat(i as u32, 5), id);
        }
    }

    #[test]
    fn periodic_in_orbital_period() {
        let shell = ShellConfig::new("A", 780.0, 6, 11, 86.4).unwrap().with_phase_fraction(0.3).unwrap();
        let t = orbital_period(&earth(), &shell);
        let p0 = propagate(&earth(), &shell, 0.0);
        let p1 = propagate(&earth(), &shell, t);
        for (a, b) in p0.iter().zip(&p1) {
            assert!(a.distance(*b) < 1e-6);
        }
    }

    #[test]
    fn single_polar_plane_is_square() {
        let shell = ShellConfig::new("P", 550.0, 1, 4, 90.0).unwrap();
        let p = propagate(&earth(), &shell, 0.0);
        for i in 0..4 {
            let ang = p[i].angle_to(p[(i + 1) % 4]);
            assert!((ang - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
            // polar plane through the x axis: no y component at RAAN 0
            assert!(p[i].y.abs() < 1e-6);
        }
    }

    #[test]
    fn s1_positions() {
        let s1 = ShellCatalog::builtin().get("S1").unwrap().clone();
        let p = propagate(&earth(), &s1, 123.0);
        assert_eq!(p.len(), 1584);
        for v in &p {
            assert!((v.norm() - 6_921_000.0).abs() < 1e-3);
        }
    }

    #[test]
    fn epoch_convention() {
        let shell = ShellConfig::new("A", 550.0, 4, 6, 53.0).unwrap();
        let p = satellite_position(&earth(), &shell, SatelliteId { orbit: 0, slot: 0 }, 0.0);
        assert!((p.x - 6_921_000.0).abs() < 1e-6 && p.y.abs() < 1e-6 && p.z.abs() < 1e-6);
    }

    #[test]
    fn deterministic() {
        let shell = ShellConfig::new("A", 550.0, 4, 6, 53.0).unwrap();
        assert_eq!(propagate(&earth(), &shell, 17.5), propagate(&earth(), &shell, 17.5));
    }
}
