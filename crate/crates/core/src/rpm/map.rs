use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rpm::boundary::{boundary_from_curves, BoundaryCurve};
use crate::rpm::fiber::admissible_velocities;
use crate::rpm::trace::{trace_omega_curve, OmegaCurve};
use crate::sphere::{GridDescriptor, GridSpec, Icosphere, PointLocator, SpherePoint};
use crate::system::{GyrostatParams, IntegralConstants};
use crate::Vec3;

/// A connected piece of the region of possible motion, lifted to one torus
/// of `J_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpmComponent {
    /// ω-curve index, or `None` for solutions no traced curve claimed.
    pub torus: Option<usize>,
    pub vertices: usize,
    /// Histogram: number of admissible velocities from this torus -> vertices.
    pub count_profile: BTreeMap<u8, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RpmReport {
    pub k: IntegralConstants,
    pub grid: GridDescriptor,
    /// Admissible-velocity count per grid vertex.
    pub counts: Vec<u8>,
    /// Vertices whose count sits at a fold and is not trusted.
    pub uncertain: Vec<u32>,
    /// Components of the level curve `{K1 = k1, K2 = k2}`.
    pub tori: usize,
    pub components: Vec<RpmComponent>,
    /// Connected components of `{count > 0}` on the sphere, ignoring which
    /// torus the velocities belong to.
    pub support_components: usize,
    pub boundary: Vec<BoundaryCurve>,
    #[serde(skip)]
    pub mesh: Icosphere,
    #[serde(skip)]
    per_torus: Vec<Vec<u8>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Fiber counts over an icosphere, RPM components and the generalized boundary.
///
/// Components are counted on the lift of the region to `J_k`: a grid node is
/// a vertex together with one torus that has admissible velocities there, and
/// nodes of the same torus at adjacent vertices are joined. Uncertain vertices
/// take no part in the adjacency.
pub fn rpm_map(k: &IntegralConstants, p: &GyrostatParams, grid: GridSpec) -> Result<RpmReport> {
    p.require_generic()?;
    let grid = GridSpec::new(grid.n_lat, grid.n_lon)?;
    let mesh = Icosphere::from_spec(grid);
    let descriptor = mesh.descriptor(grid);

    let curves: Vec<OmegaCurve> = if k.is_feasible() && k.k1 > 0.0 {
        match trace_omega_curve(k.k1, k.k2, p) {
            Ok(c) => c,
            Err(Error::EmptyLevel { .. }) => Vec::new(),
            Err(e) => return Err(e),
        }
    } else {
        Vec::new()
    };
    let tori = curves.len();

    let fibers = mesh
        .vertices
        .par_iter()
        .map(|v| admissible_velocities(&SpherePoint::from_normalized(*v)?, k, p))
        .collect::<Result<Vec<_>>>()?;

    let labeller = CurveLabeller::new(&curves);
    // Torus slot `tori` collects unlabelled solutions.
    let slots = tori + 1;
    let mut per_torus = vec![vec![0u8; slots]; mesh.vertices.len()];
    let mut counts = Vec::with_capacity(fibers.len());
    let mut uncertain = Vec::new();
    for (v, f) in fibers.iter().enumerate() {
        counts.push(f.count() as u8);
        if f.uncertain {
            uncertain.push(v as u32);
        }
        for w in &f.omegas {
            let slot = labeller.label(w).unwrap_or(tori);
            per_torus[v][slot] += 1;
        }
    }
    let is_uncertain = {
        let mut flags = vec![false; mesh.vertices.len()];
        for &v in &uncertain {
            flags[v as usize] = true;
        }
        flags
    };

    let node = |v: usize, t: usize| v * slots + t;
    let mut uf = UnionFind::new(mesh.vertices.len() * slots);
    let mut support = UnionFind::new(mesh.vertices.len());
    for (u, w) in mesh.edges() {
        if is_uncertain[u] || is_uncertain[w] {
            continue;
        }
        for t in 0..slots {
            if per_torus[u][t] > 0 && per_torus[w][t] > 0 {
                uf.union(node(u, t), node(w, t));
            }
        }
        if counts[u] > 0 && counts[w] > 0 {
            support.union(u, w);
        }
    }

    let mut groups: BTreeMap<usize, RpmComponent> = BTreeMap::new();
    let mut support_roots = std::collections::BTreeSet::new();
    for v in 0..mesh.vertices.len() {
        if is_uncertain[v] {
            continue;
        }
        if counts[v] > 0 {
            support_roots.insert(support.find(v));
        }
        for t in 0..slots {
            let c = per_torus[v][t];
            if c == 0 {
                continue;
            }
            let root = uf.find(node(v, t));
            let comp = groups.entry(root).or_insert_with(|| RpmComponent {
                torus: (t < tori).then_some(t),
                vertices: 0,
                count_profile: BTreeMap::new(),
            });
            comp.vertices += 1;
            *comp.count_profile.entry(c).or_default() += 1;
        }
    }

    let boundary = if curves.is_empty() {
        Vec::new()
    } else {
        boundary_from_curves(k, p, &curves)?.curves
    };

    Ok(RpmReport {
        k: *k,
        grid: descriptor,
        counts,
        uncertain,
        tori,
        components: groups.into_values().collect(),
        support_components: support_roots.len(),
        boundary,
        mesh,
        per_torus,
    })
}

impl RpmReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Admissible velocities from torus `torus` at vertex `v`.
    pub fn torus_count(&self, v: usize, torus: usize) -> u8 {
        self.per_torus[v].get(torus).copied().unwrap_or(0)
    }

    /// Vertices on a count discontinuity: a neighbour with a different count,
    /// or an uncertain count.
    pub fn jump_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.counts.len()];
        for (u, w) in self.mesh.edges() {
            if self.counts[u] != self.counts[w] {
                flags[u] = true;
                flags[w] = true;
            }
        }
        for &v in &self.uncertain {
            flags[v as usize] = true;
        }
        flags
    }

    /// Whether a count discontinuity lies within `cells` grid cells of `nu`.
    pub fn near_count_jump(&self, nu: &Vec3, jumps: &[bool], locator: &PointLocator, cells: f64) -> bool {
        let radius = cells * self.mesh.cell_size();
        locator.within(nu, radius).into_iter().any(|v| jumps[v])
    }
}

/// Assigns an ω on the level curve to the traced component it lies on.
struct CurveLabeller {
    locator: Option<PointLocator>,
    owner: Vec<usize>,
    reach: f64,
}

impl CurveLabeller {
    fn new(curves: &[OmegaCurve]) -> Self {
        let mut points = Vec::new();
        let mut owner = Vec::new();
        let mut step: f64 = 0.0;
        for (i, c) in curves.iter().enumerate() {
            points.extend_from_slice(&c.points);
            owner.extend(std::iter::repeat(i).take(c.points.len()));
            step = step.max(c.step);
        }
        let locator = (!points.is_empty()).then(|| PointLocator::new(&points, 4.0 * step));
        Self { locator, owner, reach: 10.0 * step }
    }

    fn label(&self, omega: &Vec3) -> Option<usize> {
        let (i, d) = self.locator.as_ref()?.nearest(omega)?;
        (d <= self.reach).then(|| self.owner[i])
    }
}
