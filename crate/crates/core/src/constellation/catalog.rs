use super::ShellConfig;

/// Orbit counts of the synthetic sats-per-orbit / orbit-count grid.
pub const SWEEP_ORBITS: [u32; 4] = [20, 33, 46, 59];
/// Satellites per orbit of the synthetic grid.
pub const SWEEP_SATS: [u32; 4] = [20, 28, 36, 44];
/// Inclinations of the inclination sweep (33 orbits x 28 sats).
pub const INCL_SWEEP_DEG: [f64; 4] = [45.0, 55.0, 65.0, 75.0];
/// Altitudes of the altitude sweep (33 x 28, 53 deg).
pub const ALT_SWEEP_KM: [f64; 4] = [540.0, 740.0, 940.0, 1140.0];
/// Satellites per orbit of the fine sweep, crossed with [`SWEEP_ORBITS`].
pub const FINE_SWEEP_SATS: [u32; 4] = [20, 22, 24, 26];

const SYNTHETIC_ALTITUDE_KM: f64 = 570.0;
const SYNTHETIC_INCLINATION_DEG: f64 = 53.0;

// name, altitude km, orbits, sats/orbit, inclination deg
const COMMERCIAL: [(&str, f64, u32, u32, f64); 10] = [
    ("S1", 550.0, 72, 22, 53.0),
    ("S2", 570.0, 20, 36, 70.0),
    ("S3", 560.0, 6, 58, 97.6),
    ("S4", 540.0, 72, 22, 53.2),
    ("S5", 560.0, 4, 43, 97.6),
    ("K1", 630.0, 34, 34, 51.9),
    ("K2", 610.0, 36, 36, 42.0),
    ("K3", 590.0, 28, 28, 33.0),
    ("T1", 1015.0, 27, 13, 98.98),
    ("T2", 1325.0, 40, 33, 50.88),
];

/// Named collection of built-in shells.
#[derive(Debug, Clone, Default)]
pub struct ShellCatalog {
    shells: Vec<ShellConfig>,
}

fn shell(name: String, altitude_km: f64, orbits: u32, sats: u32, incl: f64) -> ShellConfig {
    ShellConfig::new(name, altitude_km, orbits, sats, incl).expect("catalog shells are valid")
}

impl ShellCatalog {
    pub fn builtin() -> Self {
        let mut shells: Vec<ShellConfig> = COMMERCIAL
            .iter()
            .map(|&(n, h, o, s, i)| shell(n.to_string(), h, o, s, i))
            .collect();
        shells.push(shell("E1".into(), 570.0, 20, 36, 70.0));
        for &o in &SWEEP_ORBITS {
            for &s in &SWEEP_SATS {
                shells.push(shell(Self::grid_name(o, s), SYNTHETIC_ALTITUDE_KM, o, s, SYNTHETIC_INCLINATION_DEG));
            }
        }
        for &i in &INCL_SWEEP_DEG {
            shells.push(shell(Self::incl_name(i), SYNTHETIC_ALTITUDE_KM, 33, 28, i));
        }
        for &h in &ALT_SWEEP_KM {
            shells.push(shell(Self::alt_name(h), h, 33, 28, SYNTHETIC_INCLINATION_DEG));
        }
        for &o in &SWEEP_ORBITS {
            for &s in FINE_SWEEP_SATS.iter().filter(|s| !SWEEP_SATS.contains(s)) {
                shells.push(shell(Self::grid_name(o, s), SYNTHETIC_ALTITUDE_KM, o, s, SYNTHETIC_INCLINATION_DEG));
            }
        }
        ShellCatalog { shells }
    }

    /// Name of a 53 deg / 570 km grid cell, e.g. `SYN-O20-S28`.
    pub fn grid_name(orbits: u32, sats: u32) -> String {
        format!("SYN-O{orbits}-S{sats}")
    }

    pub fn incl_name(incl_deg: f64) -> String {
        format!("INC-{incl_deg}")
    }

    pub fn alt_name(alt_km: f64) -> String {
        format!("ALT-{alt_km}")
    }

    /// The ten commercial rows.
    pub fn commercial_names() -> Vec<&'static str> {
        COMMERCIAL.iter().map(|r| r.0).collect()
    }

    pub fn get(&self, name: &str) -> Option<&ShellConfig> {
        self.shells.iter().find(|s| s.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.shells.iter().map(|s| s.name.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &ShellConfig> {
        self.shells.iter()
    }

    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }
}
