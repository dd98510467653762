//! Spherical-Earth geometry.
//!
//! The inertial frame has its z axis on the north pole and its x axis
//! through the prime meridian at t = 0. Ground points rotate eastward with
//! the Earth; satellites are propagated directly in this frame.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Spherical Earth constants used throughout a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EarthModel {
    pub radius_m: f64,
    pub mu_m3s2: f64,
    pub rotation_rate_rad_s: f64,
}

impl EarthModel {
    pub const RADIUS_M: f64 = 6_371_000.0;
    pub const MU_M3S2: f64 = 3.986_004_418e14;
    pub const ROTATION_RATE_RAD_S: f64 = 7.292_115_9e-5;
}

impl Default for EarthModel {
    fn default() -> Self {
        EarthModel {
            radius_m: Self::RADIUS_M,
            mu_m3s2: Self::MU_M3S2,
            rotation_rate_rad_s: Self::ROTATION_RATE_RAD_S,
        }
    }
}

/// A point on or above the surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoCoord {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
}

impl GeoCoord {
    /// Validates latitude and altitude and normalizes longitude into (-180, 180].
    pub fn new(latitude_deg: f64, longitude_deg: f64, altitude_m: f64) -> Result<Self> {
        if !latitude_deg.is_finite() || !(-90.0..=90.0).contains(&latitude_deg) {
            return Err(Error::Config(format!("latitude {latitude_deg} outside [-90, 90]")));
        }
        if !longitude_deg.is_finite() {
            return Err(Error::Config(format!("longitude {longitude_deg} is not finite")));
        }
        if !altitude_m.is_finite() || altitude_m < 0.0 {
            return Err(Error::Config(format!("altitude {altitude_m} must be >= 0")));
        }
        Ok(GeoCoord {
            latitude_deg,
            longitude_deg: normalize_longitude(longitude_deg),
            altitude_m,
        })
    }

    /// Surface point; panics on out-of-range latitude. Meant for constants and tests.
    pub fn surface(latitude_deg: f64, longitude_deg: f64) -> Self {
        Self::new(latitude_deg, longitude_deg, 0.0).expect("valid surface coordinate")
    }

    fn unit_vector(&self) -> Vec3 {
        let lat = self.latitude_deg.to_radians();
        let lon = self.longitude_deg.to_radians();
        Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
    }
}

pub fn normalize_longitude(lon_deg: f64) -> f64 {
    let mut lon = lon_deg % 360.0;
    if lon <= -180.0 {
        lon += 360.0;
    } else if lon > 180.0 {
        lon -= 360.0;
    }
    lon
}

/// Cartesian 3-vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Position in the Earth-centered inertial frame.
pub type CartesianPos = Vec3;

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Angle between two vectors in radians, robust near 0 and pi.
    pub fn angle_to(self, o: Vec3) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Great-circle arc length between the surface projections of `a` and `b`.
pub fn geodesic_distance(earth: &EarthModel, a: &GeoCoord, b: &GeoCoord) -> f64 {
    earth.radius_m * a.unit_vector().angle_to(b.unit_vector())
}

/// Angle in degrees between the plane through `a`, `b` and the Earth's
/// center, and the equatorial plane. Symmetric in its arguments.
pub fn geographic_angle(a: &GeoCoord, b: &GeoCoord) -> Result<f64> {
    let normal = a.unit_vector().cross(b.unit_vector());
    let len = normal.norm();
    // |a x b| = sin(separation); below this the plane is not unique.
    if len < 1e-12 {
        return Err(Error::DegeneratePair(format!(
            "({}, {}) and ({}, {}) are coincident or antipodal",
            a.latitude_deg, a.longitude_deg, b.latitude_deg, b.longitude_deg
        )));
    }
    let cos = (normal.z.abs() / len).min(1.0);
    Ok(cos.acos().to_degrees().clamp(0.0, 90.0))
}

/// Position of a ground point in the inertial frame at time `t_s`.
pub fn surface_to_cartesian(earth: &EarthModel, c: &GeoCoord, t_s: f64) -> CartesianPos {
    let r = earth.radius_m + c.altitude_m;
    let lat = c.latitude_deg.to_radians();
    let lon = c.longitude_deg.to_radians() + earth.rotation_rate_rad_s * t_s;
    Vec3::new(r * lat.cos() * lon.cos(), r * lat.cos() * lon.sin(), r * lat.sin())
}

/// Inverse of [`surface_to_cartesian`] at time `t_s` (spherical, altitude from the norm).
pub fn cartesian_to_geo(earth: &EarthModel, p: CartesianPos, t_s: f64) -> GeoCoord {
    let r = p.norm();
    let lat = (p.z / r).clamp(-1.0, 1.0).asin().to_degrees();
    let lon = (p.y.atan2(p.x) - earth.rotation_rate_rad_s * t_s).to_degrees();
    GeoCoord {
        latitude_deg: lat,
        longitude_deg: normalize_longitude(lon),
        altitude_m: (r - earth.radius_m).max(0.0),
    }
}
