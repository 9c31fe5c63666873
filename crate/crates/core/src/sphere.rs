//! Points, polylines and icosahedral grids on the Poisson sphere.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::UNIT_TOLERANCE;
use crate::Vec3;

/// A unit vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct SpherePoint(Vec3);

impl SpherePoint {
    /// Fails unless `|v|^2 = 1` to [`UNIT_TOLERANCE`].
    pub fn new(v: Vec3) -> Result<Self> {
        let n2 = v.norm_squared();
        if !n2.is_finite() || (n2 - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnit(n2));
        }
        Ok(Self(v))
    }

    pub fn from_normalized(v: Vec3) -> Result<Self> {
        let n = v.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotUnit(n * n));
        }
        Ok(Self(v / n))
    }

    pub fn vec(&self) -> Vec3 {
        self.0
    }

    /// Great-circle distance.
    pub fn angle_to(&self, other: &SpherePoint) -> f64 {
        self.0.cross(&other.0).norm().atan2(self.0.dot(&other.0))
    }
}

impl TryFrom<[f64; 3]> for SpherePoint {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        SpherePoint::new(v.into())
    }
}

impl From<SpherePoint> for [f64; 3] {
    fn from(p: SpherePoint) -> Self {
        p.0.into()
    }
}

/// A polyline on the sphere.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SphereCurve {
    pub points: Vec<SpherePoint>,
    /// The last point connects back to the first.
    pub closed: bool,
}

impl SphereCurve {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Requested grid resolution, as the latitude x longitude count of an
/// equivalent lat/long grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_lat: usize,
    pub n_lon: usize,
}

impl GridSpec {
    pub const MIN: GridSpec = GridSpec { n_lat: 16, n_lon: 32 };

    pub fn new(n_lat: usize, n_lon: usize) -> Result<Self> {
        if n_lat < Self::MIN.n_lat || n_lon < Self::MIN.n_lon {
            return Err(Error::InvalidResolution { n_lat, n_lon });
        }
        Ok(Self { n_lat, n_lon })
    }

    /// Icosahedral subdivision frequency with about `n_lat * n_lon` vertices
    /// (a frequency-`f` icosphere has `10 f^2 + 2`).
    pub fn frequency(&self) -> usize {
        ((self.n_lat * self.n_lon) as f64 / 10.0).sqrt().round().max(1.0) as usize
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected NLATxNLON, got {s:?}"))?;
        let n_lat = a.trim().parse().map_err(|e| format!("{e}"))?;
        let n_lon = b.trim().parse().map_err(|e| format!("{e}"))?;
        GridSpec::new(n_lat, n_lon).map_err(|e| e.to_string())
    }
}

/// Summary of an icosphere, enough to rebuild it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub kind: &'static str,
    pub frequency: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub requested: GridSpec,
}

/// Geodesic icosphere: every icosahedron face split into `f^2` triangles and
/// projected radially onto the unit sphere.
#[derive(Debug, Clone)]
pub struct Icosphere {
    pub frequency: usize,
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    neighbors: Vec<Vec<u32>>,
}

const ICO_FACES: [[usize; 3]; 20] = [
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
];

fn icosahedron() -> [Vec3; 12] {
    let t = 0.5 * (1.0 + 5f64.sqrt());
    [
        Vec3::new(-1.0, t, 0.0), Vec3::new(1.0, t, 0.0),
        Vec3::new(-1.0, -t, 0.0), Vec3::new(1.0, -t, 0.0),
        Vec3::new(0.0, -1.0, t), Vec3::new(0.0, 1.0, t),
        Vec3::new(0.0, -1.0, -t), Vec3::new(0.0, 1.0, -t),
        Vec3::new(t, 0.0, -1.0), Vec3::new(t, 0.0, 1.0),
        Vec3::new(-t, 0.0, -1.0), Vec3::new(-t, 0.0, 1.0),
    ]
    .map(|v| v.normalize())
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Corner(usize),
    Edge(usize, usize, usize),
    Interior(usize, usize, usize),
}

impl Icosphere {
    pub fn new(frequency: usize) -> Self {
        let f = frequency.max(1);
        let base = icosahedron();
        let mut vertices = Vec::with_capacity(10 * f * f + 2);
        let mut index: HashMap<Key, u32> = HashMap::new();
        let mut triangles = Vec::with_capacity(20 * f * f);

        for (face, &[c0, c1, c2]) in ICO_FACES.iter().enumerate() {
            // Lattice point (i, j) has barycentric weights (f-i-j, i, j).
            let mut id = |i: usize, j: usize| -> u32 {
                let w = [f - i - j, i, j];
                let corners = [c0, c1, c2];
                let nonzero: Vec<usize> = (0..3).filter(|&q| w[q] > 0).collect();
                let key = match nonzero.as_slice() {
                    [q] => Key::Corner(corners[*q]),
                    [q, r] => {
                        let (a, b) = (corners[*q], corners[*r]);
                        // Position counted from the lower-numbered corner.
                        if a < b {
                            Key::Edge(a, b, w[*r])
                        } else {
                            Key::Edge(b, a, w[*q])
                        }
                    }
                    _ => Key::Interior(face, i, j),
                };
                *index.entry(key).or_insert_with(|| {
                    let p = base[c0] * w[0] as f64 + base[c1] * w[1] as f64 + base[c2] * w[2] as f64;
                    vertices.push(p.normalize());
                    (vertices.len() - 1) as u32
                })
            };
            for i in 0..f {
                for j in 0..f - i {
                    let a = id(i, j);
                    let b = id(i + 1, j);
                    let c = id(i, j + 1);
                    triangles.push([a, b, c]);
                    if i + j + 1 < f {
                        let d = id(i + 1, j + 1);
                        triangles.push([b, d, c]);
                    }
                }
            }
        }

        let mut neighbors = vec![Vec::new(); vertices.len()];
        for t in &triangles {
            for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                neighbors[u as usize].push(v);
                neighbors[v as usize].push(u);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Self { frequency: f, vertices, triangles, neighbors }
    }

    pub fn from_spec(spec: GridSpec) -> Self {
        Self::new(spec.frequency())
    }

    pub fn descriptor(&self, requested: GridSpec) -> GridDescriptor {
        GridDescriptor {
            kind: "icosphere",
            frequency: self.frequency,
            vertices: self.vertices.len(),
            triangles: self.triangles.len(),
            requested,
        }
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[v]
    }

    /// Each undirected edge once, as `(lo, hi)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| v as usize > u).map(move |&v| (u, v as usize)))
    }

    /// Mean edge length (chord), the grid cell size.
    pub fn cell_size(&self) -> f64 {
        let (sum, n) = self
            .edges()
            .fold((0.0, 0usize), |(s, n), (u, v)| (s + (self.vertices[u] - self.vertices[v]).norm(), n + 1));
        sum / n as f64
    }

    /// Index of the vertex closest to `p`.
    pub fn locator(&self) -> PointLocator {
        PointLocator::new(&self.vertices, 2.0 * self.cell_size())
    }
}

/// Uniform-bucket nearest-point lookup in R^3.
#[derive(Debug, Clone)]
pub struct PointLocator {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<u32>>,
    points: Vec<Vec3>,
}

impl PointLocator {
    pub fn new(points: &[Vec3], cell: f64) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        Self { cell, buckets, points: points.to_vec() }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [p.x, p.y, p.z].map(|c| (c / cell).floor() as i64)
    }

    /// Nearest point and its distance; searches the surrounding buckets first
    /// and falls back to a full scan when they are empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        let k = Self::key(q, self.cell);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        for &i in ids {
                            let d = (self.points[i as usize] - q).norm();
                            if best.map_or(true, |(_, b)| d < b) {
                                best = Some((i as usize, d));
                            }
                        }
                    }
                }
            }
        }
        // A hit farther than one cell may not be the true nearest.
        if best.map_or(true, |(_, d)| d > self.cell) {
            best = self
                .points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - q).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
        }
        best
    }

    /// All points within `radius` of `q` (`radius` at most one cell).
    pub fn within(&self, q: &Vec3, radius: f64) -> Vec<usize> {
        let k = Self::key(q, self.cell);
        let reach = (radius / self.cell).ceil() as i64;
        let mut out = Vec::new();
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                for dz in -reach..=reach {
                    if let Some(ids) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        out.extend(
                            ids.iter()
                                .map(|&i| i as usize)
                                .filter(|&i| (self.points[i] - q).norm() <= radius),
                        );
                    }
                }
            }
        }
        out
    }
}

/// Orthonormal `(e1, e2)` spanning the plane orthogonal to the unit vector `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.6 { Vec3::x() } else if n.y.abs() < 0.6 { Vec3::y() } else { Vec3::z() };
    let e1 = n.cross(&helper).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}
