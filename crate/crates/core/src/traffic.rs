//! City endpoints, the all-pairs traffic matrix and geographic-angle buckets.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::{geographic_angle, GeoCoord};

/// Bundled top-100 GDP metro dataset.
pub const BUNDLED_CITIES_CSV: &str = include_str!("../data/cities.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct City {
    pub id: u32,
    pub name: String,
    pub coord: GeoCoord,
    pub rank: u32,
}

#[derive(Debug, Deserialize)]
struct CityRow {
    id: u32,
    name: String,
    lat_deg: f64,
    lon_deg: f64,
    gdp_rank: u32,
}

/// Reads a city CSV with header `id,name,lat_deg,lon_deg,gdp_rank`.
pub fn load_cities(path: impl AsRef<Path>) -> Result<Vec<City>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cities(&text, &path.display().to_string())
}

pub fn bundled_cities() -> Vec<City> {
    parse_cities(BUNDLED_CITIES_CSV, "<bundled>").expect("bundled city dataset is valid")
}

/// Parses city CSV text; `origin` names the source in error messages.
pub fn parse_cities(text: &str, origin: &str) -> Result<Vec<City>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let parse_err = |line: u64, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let headers = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if headers.is_empty() || headers.iter().all(str::is_empty) {
        return Err(parse_err(1, "missing header id,name,lat_deg,lon_deg,gdp_rank".into()));
    }
    let mut cities = Vec::new();
    let mut ids = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row: CityRow = record
            .deserialize(Some(&headers))
            .map_err(|e| parse_err(line, e.to_string()))?;
        let coord = GeoCoord::new(row.lat_deg, row.lon_deg, 0.0).map_err(|e| Error::CoordinateRange {
            line,
            msg: e.to_string(),
        })?;
        if row.gdp_rank == 0 {
            return Err(parse_err(line, "gdp_rank must be >= 1".into()));
        }
        if !ids.insert(row.id) {
            return Err(Error::DuplicateId(row.id));
        }
        cities.push(City {
            id: row.id,
            name: row.name,
            coord,
            rank: row.gdp_rank,
        });
    }
    if cities.is_empty() {
        return Err(parse_err(1, "no cities".into()));
    }
    cities.sort_by_key(|c| c.id);
    Ok(cities)
}

/// SHA-256 of the cities as loaded, for run manifests.
pub fn dataset_hash(cities: &[City]) -> String {
    let mut hasher = Sha256::new();
    for c in cities {
        hasher.update(format!(
            "{},{},{},{},{}\n",
            c.id, c.name, c.coord.latitude_deg, c.coord.longitude_deg, c.rank
        ));
    }
    hasher
        .finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// One ordered source/destination pair, as indices into [`TrafficMatrix::cities`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CityPair {
    pub src: usize,
    pub dst: usize,
}

/// All ordered pairs of distinct cities. Pair id = position in `pairs`.
#[derive(Debug, Clone)]
pub struct TrafficMatrix {
    pub cities: Vec<City>,
    pub pairs: Vec<CityPair>,
}

impl TrafficMatrix {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn endpoints(&self, pair_id: usize) -> (&City, &City) {
        let p = self.pairs[pair_id];
        (&self.cities[p.src], &self.cities[p.dst])
    }

    /// TM file: header plus one `city_id,lat_deg,lon_deg` line per endpoint.
    pub fn tm_file(&self) -> String {
        let mut out = String::from("city_id,lat_deg,lon_deg\n");
        for c in &self.cities {
            let _ = writeln!(out, "{},{},{}", c.id, c.coord.latitude_deg, c.coord.longitude_deg);
        }
        out
    }
}

/// Ordered pairs, sorted by (source rank, destination rank).
pub fn build_matrix(cities: &[City]) -> Result<TrafficMatrix> {
    if cities.len() < 2 {
        return Err(Error::Config(format!("need at least 2 cities, got {}", cities.len())));
    }
    let mut order: Vec<usize> = (0..cities.len()).collect();
    order.sort_by_key(|&i| (cities[i].rank, cities[i].id));
    let pairs = order
        .iter()
        .flat_map(|&src| order.iter().filter(move |&&dst| dst != src).map(move |&dst| CityPair { src, dst }))
        .collect();
    Ok(TrafficMatrix {
        cities: cities.to_vec(),
        pairs,
    })
}

/// One of nine 10-degree geographic-angle intervals; the last is closed at 90.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AngleBucket(u8);

impl AngleBucket {
    pub const COUNT: usize = 9;

    pub fn all() -> impl Iterator<Item = AngleBucket> {
        (0..Self::COUNT as u8).map(AngleBucket)
    }

    pub fn of(angle_deg: f64) -> AngleBucket {
        AngleBucket(((angle_deg / 10.0).floor().clamp(0.0, 8.0)) as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn lower_deg(self) -> f64 {
        f64::from(self.0) * 10.0
    }

    pub fn upper_deg(self) -> f64 {
        self.lower_deg() + 10.0
    }

    pub fn center_deg(self) -> f64 {
        self.lower_deg() + 5.0
    }
}

/// Unordered pairs grouped by bucket.
#[derive(Debug, Clone)]
pub struct AngleBuckets {
    pub pairs: Vec<Vec<(usize, usize)>>,
}

impl AngleBuckets {
    pub fn histogram(&self) -> [usize; AngleBucket::COUNT] {
        let mut h = [0; AngleBucket::COUNT];
        for (i, b) in self.pairs.iter().enumerate() {
            h[i] = b.len();
        }
        h
    }

    pub fn total(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }
}

pub fn pair_angle(matrix: &TrafficMatrix, pair: CityPair) -> Result<f64> {
    geographic_angle(&matrix.cities[pair.src].coord, &matrix.cities[pair.dst].coord)
}

/// Assigns every unordered pair `(i, j)`, `i < j` (city indices), to its bucket.
pub fn bucket_pairs(matrix: &TrafficMatrix) -> Result<AngleBuckets> {
    let mut pairs = vec![Vec::new(); AngleBucket::COUNT];
    for p in matrix.pairs.iter().filter(|p| p.src < p.dst) {
        let angle = pair_angle(matrix, *p)?;
        pairs[AngleBucket::of(angle).index()].push((p.src, p.dst));
    }
    Ok(AngleBuckets { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn city(id: u32, lat: f64, lon: f64) -> City {
        City {
            id,
            name: format!("c{id}"),
            coord: GeoCoord::surface(lat, lon),
            rank: id,
        }
    }

    #[test]
    fn bundled_dataset() {
        let cities = bundled_cities();
        assert_eq!(cities.len(), 100);
        let mut ranks: Vec<u32> = cities.iter().map(|c| c.rank).collect();
        ranks.sort_unstable();
        assert_eq!(ranks, (1..=100).collect::<Vec<_>>());
        assert_eq!(dataset_hash(&cities), dataset_hash(&bundled_cities()));
    }

    #[test]
    fn load_errors() {
        let header = "id,name,lat_deg,lon_deg,gdp_rank\n";
        let e = parse_cities(&format!("{header}1,A,95,0,1\n"), "t").unwrap_err();
        assert!(matches!(e, Error::CoordinateRange { line: 2, .. }), "{e}");
        assert!(matches!(parse_cities("", "t"), Err(Error::Parse { .. })));
        assert!(matches!(parse_cities(header, "t"), Err(Error::Parse { .. })));
        let e = parse_cities(&format!("{header}1,A,10,0,1\n1,B,20,0,2\n"), "t").unwrap_err();
        assert!(matches!(e, Error::DuplicateId(1)));
        let e = parse_cities(&format!("{header}1,A,10,0,1\n2,B,abc,0,2\n"), "t").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn load_sorts_by_id_and_reads_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        std::fs::write(&path, "id,name,lat_deg,lon_deg,gdp_rank\n7,\"Foo, Bar\",1,2,2\n3,Baz,-4,200,1\n").unwrap();
        let cities = load_cities(&path).unwrap();
        assert_eq!(cities.iter().map(|c| c.id).collect::<Vec<_>>(), vec![3, 7]);
        assert_eq!(cities[1].name, "Foo, Bar");
        assert_eq!(cities[0].coord.longitude_deg, -160.0);
        assert!(matches!(load_cities(dir.path().join("missing.csv")), Err(Error::Io { .. })));
    }

    #[test]
    fn matrix_sizes_and_order() {
        assert_eq!(build_matrix(&bundled_cities()).unwrap().len(), 9900);
        let two = vec![city(1, 0.0, 0.0), city(2, 0.0, 10.0)];
        assert_eq!(build_matrix(&two).unwrap().len(), 2);
        let five: Vec<City> = (1..=5).map(|i| city(i, i as f64, 0.0)).collect();
        let m = build_matrix(&five).unwrap();
        assert_eq!(m.len(), 20);
        assert_eq!((m.pairs[0].src, m.pairs[0].dst), (0, 1));
        assert_eq!((m.pairs[4].src, m.pairs[4].dst), (1, 0));
        assert!(build_matrix(&two[..1]).is_err());
    }

    #[test]
    fn buckets() {
        assert_eq!(AngleBucket::of(90.0).index(), 8);
        assert_eq!(AngleBucket::of(80.0).index(), 8);
        assert_eq!(AngleBucket::of(79.999).index(), 7);
        assert_eq!(AngleBucket::of(0.0).index(), 0);

        let eq = build_matrix(&[city(1, 0.0, 10.0), city(2, 0.0, 40.0)]).unwrap();
        assert_eq!(bucket_pairs(&eq).unwrap().histogram()[0], 1);
        let mer = build_matrix(&[city(1, 10.0, 30.0), city(2, 50.0, 30.0)]).unwrap();
        assert_eq!(bucket_pairs(&mer).unwrap().histogram()[8], 1);

        let dup = build_matrix(&[city(1, 10.0, 30.0), city(2, 10.0, 30.0)]).unwrap();
        assert!(matches!(bucket_pairs(&dup), Err(Error::DegeneratePair(_))));
    }

    #[test]
    fn bundled_bucket_distribution() {
        let m = build_matrix(&bundled_cities()).unwrap();
        let b = bucket_pairs(&m).unwrap();
        let h = b.histogram();
        assert_eq!(b.total(), 4950);
        // Most pairs lie between 20 and 90 degrees.
        let above_20: usize = h[2..].iter().sum();
        assert!(above_20 as f64 > 0.9 * 4950.0, "{h:?}");
        let modal = (0..9).max_by_key(|&i| h[i]).unwrap();
        if modal != 3 {
            eprintln!(
                "soft check: bundled dataset modal angle bucket is {}-{} deg (reference dataset: 30-40 deg); histogram {h:?}",
                modal * 10,
                modal * 10 + 10
            );
        }
    }

    #[test]
    fn tm_file_format() {
        let m = build_matrix(&[city(1, 1.5, 2.0), city(2, -3.0, 4.25)]).unwrap();
        assert_eq!(m.tm_file(), "city_id,lat_deg,lon_deg\n1,1.5,2\n2,-3,4.25\n");
    }
}
