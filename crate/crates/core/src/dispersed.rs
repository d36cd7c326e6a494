//! Dispersed sets and families, ray-avoiding paths, and categoricity of
//! dispersed sets and of half-space covers.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combing::Bicombing;
use crate::cover::{voronoi_min_gap, SubsetFamily};
use crate::cylinder::{
    verify_categorical, verify_homotopy, CategoricityCertificate, CategoricityReport, CylinderMap, CylinderSample,
    FnHomotopy, HomotopyCertificate, HomotopySample,
};
use crate::error::{Error, Result};
use crate::maps::{CertConfig, MapSample};
use crate::rational::{from_ticks, qi, strict_ticks, Q};
use crate::space::{Domain, PointSubset, Ray, Space};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispersionProfile {
    pub radii: Vec<Q>,
    /// `∂(r)`; `None` is `+inf` (fewer than two eligible elements).
    pub values: Vec<Option<Q>>,
    /// Running minimum from the right, up to the interior radius.
    pub monotone: Vec<Option<Q>>,
    pub interior_radius: Q,
}

fn gap_among(space: &Space, members: &[PointSubset]) -> Option<u64> {
    if members.len() < 2 {
        return None;
    }
    if space.is_graph() {
        return voronoi_min_gap(space, members).0;
    }
    let mut best = None::<u64>;
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            for &x in members[a].members() {
                for &y in members[b].members() {
                    let d = space.dist_ticks(x as usize, y as usize);
                    best = Some(best.map_or(d, |v| v.min(d)));
                }
            }
        }
    }
    best
}

fn profile(space: &Space, radii: &[Q], gap_at: impl Fn(Q) -> Option<u64> + Sync) -> DispersionProfile {
    let values: Vec<Option<Q>> = radii.par_iter().map(|&r| gap_at(r).map(|d| from_ticks(d, space.unit()))).collect();
    let interior = space.interior_radius();
    let mut monotone = values.clone();
    // inf over larger radii in the interior; +inf is the identity for min.
    let mut run: Option<Q> = None;
    for k in (0..radii.len()).rev() {
        if radii[k] > interior {
            continue;
        }
        run = match (run, values[k]) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        monotone[k] = run;
    }
    DispersionProfile { radii: radii.to_vec(), values, monotone, interior_radius: interior }
}

/// `∂(r) = min d(x1, x2)` over distinct `x1, x2 ∈ U \ B_p(r)`.
pub fn dispersion_profile(u: &PointSubset, radii: &[Q]) -> DispersionProfile {
    let space = u.space();
    profile(space, radii, |r| {
        let lo = strict_ticks(r, space.unit());
        let eligible: Vec<PointSubset> = u
            .members()
            .iter()
            .filter(|&&x| space.norm_ticks(x as usize) >= lo)
            .map(|&x| PointSubset::from_sorted(space, vec![x]))
            .collect();
        gap_among(space, &eligible)
    })
}

/// `∂(r) = min d(D1, D2)` over distinct members with `d(p, Di) > r`.
pub fn family_dispersion_profile(f: &SubsetFamily, radii: &[Q]) -> DispersionProfile {
    let space = &f.space;
    let min_norms: Vec<Option<u64>> =
        f.members.iter().map(|m| m.members().iter().map(|&x| space.norm_ticks(x as usize)).min()).collect();
    profile(space, radii, |r| {
        let eligible: Vec<PointSubset> = f
            .members
            .iter()
            .zip(&min_norms)
            .filter(|(_, n)| n.is_some_and(|n| from_ticks(n, space.unit()) > r))
            .map(|(m, _)| m.clone())
            .collect();
        gap_among(space, &eligible)
    })
}

/// Pasted contraction of every member `A` to its base point `e(A)` along the
/// bicombing slice at `e(A)`: `H(x,t) = C_e(x, d(e,x) - t)`.
pub struct PastedContraction {
    bicombing: Bicombing,
    union: PointSubset,
    owner: Vec<u32>,
    cylinder: CylinderSample,
}

impl PastedContraction {
    pub fn union(&self) -> &PointSubset {
        &self.union
    }

    /// `e(A)` for the member containing the `i`-th union point.
    pub fn owner(&self, i: usize) -> usize {
        self.owner[i] as usize
    }
}

impl CylinderMap for PastedContraction {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        self.bicombing.space()
    }

    fn eval(&self, i: usize, t: u64) -> usize {
        let space = self.bicombing.space();
        let x = self.union.members()[i] as usize;
        let e = self.owner[i] as usize;
        let steps = t / self.cylinder.factor();
        let d = space.dist_ticks(e, x);
        self.bicombing.at(e, x, d.saturating_sub(steps))
    }

    fn label(&self) -> String {
        "family contraction".into()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContractionCertificate {
    pub members: usize,
    pub homotopy: HomotopyCertificate,
    pub input_profile: DispersionProfile,
    pub output_profile: DispersionProfile,
    /// `∂_out(r) >= ∂_F(r - unit) - 2·diam_bound` at every sampled radius;
    /// the shifted radius makes `‖e(A)‖ >= r` and `d(p,A) > r - unit` coincide.
    pub dominated: bool,
    pub passed: bool,
}

pub struct FamilyContraction {
    pub points: PointSubset,
    pub homotopy: PastedContraction,
    pub certificate: ContractionCertificate,
}

/// Contracts each member of a disjoint family to its least-norm member
/// (ties to the lowest index) and certifies the pasted homotopy.
pub fn contract_family_to_points(
    f: &SubsetFamily,
    bicombing: &Bicombing,
    radii: &[Q],
    cfg: &CertConfig,
) -> Result<FamilyContraction> {
    let space = &f.space;
    if bicombing.space().signature() != space.signature() {
        return Err(Error::DomainMismatch("bicombing and family live on different spaces".into()));
    }
    let members: Vec<&PointSubset> = f.members.iter().filter(|m| !m.members().is_empty()).collect();
    let mut owner_of = vec![u32::MAX; space.len()];
    let mut points = Vec::with_capacity(members.len());
    for m in &members {
        let e = m.min_norm_member().unwrap() as u32;
        points.push(e);
        for &x in m.members() {
            if owner_of[x as usize] != u32::MAX {
                return Err(Error::Certification(format!(
                    "family members overlap at {}",
                    space.point_name(x as usize)
                )));
            }
            owner_of[x as usize] = e;
        }
    }
    let union = f.union();
    let owner: Vec<u32> = union.members().iter().map(|&x| owner_of[x as usize]).collect();
    let lengths: Vec<Q> = union
        .members()
        .iter()
        .zip(&owner)
        .map(|(&x, &e)| space.dist(x as usize, e as usize))
        .collect();
    let cylinder = CylinderSample::new(Arc::new(union.clone()), &lengths, space.unit(), "d(x,e)")?;
    let homotopy = PastedContraction { bicombing: bicombing.clone(), union: union.clone(), owner, cylinder };
    let points = PointSubset::new(space, points)?;
    let inclusion = MapSample::inclusion(&union);
    let to_points = MapSample::new(Arc::new(union.clone()), space, homotopy.owner.clone(), "e")?;
    let hcert = verify_homotopy(&homotopy, &inclusion, &to_points, qi(0), cfg)?;
    let input_profile = family_dispersion_profile(f, &radii.iter().map(|&r| r - space.unit()).collect::<Vec<_>>());
    let output_profile = dispersion_profile(&points, radii);
    let slack = qi(2) * f.diam_bound;
    let dominated = input_profile.values.iter().zip(&output_profile.values).all(|(i, o)| match (i, o) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(i), Some(o)) => *o >= *i - slack,
    });
    let passed = hcert.passed && dominated;
    Ok(FamilyContraction {
        points,
        homotopy,
        certificate: ContractionCertificate {
            members: members.len(),
            homotopy: hcert,
            input_profile,
            output_profile,
            dominated,
            passed,
        },
    })
}

/// Shortest paths to a ray inside the complement of the strict ball `B_p(R)`.
pub struct AvoidancePaths {
    space: Arc<Space>,
    ray: Ray,
    radius: Q,
    /// Steps to the ray inside the complement; `u32::MAX` when unreachable.
    dist: Vec<u32>,
    /// Least radius beyond which every point of `A` has an admissible path.
    pub gamma: Q,
    /// Points of `A` whose shortest path breaks `k_x <= 2‖x‖`.
    pub rejected: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub start: usize,
    pub points: Vec<usize>,
    pub k: u64,
    pub ray_parameter: usize,
}

impl AvoidancePaths {
    pub fn radius(&self) -> Q {
        self.radius
    }

    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn k(&self, x: usize) -> Option<u64> {
        (self.dist[x] != u32::MAX).then(|| self.dist[x] as u64)
    }

    /// `h_x(0) = x, ..., h_x(k_x)` on the ray; each step descends the distance
    /// field through the lowest-index neighbor.
    pub fn path(&self, x: usize) -> Option<PathRecord> {
        let k = self.k(x)?;
        let mut points = Vec::with_capacity(k as usize + 1);
        let mut nb = Vec::new();
        let mut w = x;
        points.push(w);
        while self.dist[w] > 0 {
            nb.clear();
            self.space.neighbors(w, &mut nb);
            w = nb.iter().copied().filter(|&v| self.dist[v] != u32::MAX && self.dist[v] + 1 == self.dist[w]).min().unwrap();
            points.push(w);
        }
        let ray_parameter = self.ray.parameter_of(w).unwrap();
        Some(PathRecord { start: x, points, k, ray_parameter })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathAudit {
    pub starts_at_x: bool,
    pub ends_on_ray: bool,
    pub unit_steps: bool,
    pub length_bound: bool,
    pub avoids_ball: bool,
}

impl PathAudit {
    pub fn ok(&self) -> bool {
        self.starts_at_x && self.ends_on_ray && self.unit_steps && self.length_bound && self.avoids_ball
    }
}

/// Re-checks the four path conditions directly on a path record.
pub fn audit_path(space: &Space, ray: &Ray, radius: Q, p: &PathRecord) -> PathAudit {
    let lo = strict_ticks(radius, space.unit());
    PathAudit {
        starts_at_x: p.points.first() == Some(&p.start),
        ends_on_ray: p.points.last().is_some_and(|&e| ray.parameter_of(e).is_some()) && p.points.len() as u64 == p.k + 1,
        unit_steps: p.points.windows(2).all(|w| space.dist_ticks(w[0], w[1]) <= 1),
        length_bound: qi(p.k as i64) <= qi(2) * space.norm(p.start),
        avoids_ball: p.points.iter().all(|&v| space.norm_ticks(v) >= lo),
    }
}

/// Breadth-first search from the ray inside `{‖x‖ >= R}`. Fails with
/// `NoPath` for the first point of `A` outside the ball that cannot reach the ray.
pub fn find_avoiding_paths(space: &Arc<Space>, ray: &Ray, a: &PointSubset, radius: Q) -> Result<AvoidancePaths> {
    if !space.is_graph() {
        return Err(Error::Precondition("avoiding paths need a graph space".into()));
    }
    if ray.space().signature() != space.signature() || a.space().signature() != space.signature() {
        return Err(Error::DomainMismatch("ray, set and space must agree".into()));
    }
    let lo = strict_ticks(radius, space.unit());
    let sources: Vec<usize> = ray.points().iter().map(|&p| p as usize).filter(|&p| space.norm_ticks(p) >= lo).collect();
    let blocked = |v: usize| space.norm_ticks(v) < lo;
    let dist = space.bfs_from(&sources, u64::MAX, Some(&blocked));
    let mut worst: Option<u64> = None;
    let mut rejected = Vec::new();
    for &x in a.members() {
        let x = x as usize;
        let n = space.norm_ticks(x);
        if n < lo {
            continue;
        }
        if dist[x] == u32::MAX {
            return Err(Error::NoPath { point: x, radius });
        }
        if qi(dist[x] as i64) > qi(2) * space.norm(x) {
            rejected.push(x);
            worst = Some(worst.map_or(n, |w| w.max(n)));
        }
    }
    let gamma = match worst {
        Some(n) => from_ticks(n + 1, space.unit()).max(radius + space.unit()),
        None => radius + space.unit(),
    };
    Ok(AvoidancePaths { space: space.clone(), ray: ray.clone(), radius, dist, gamma, rejected })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderRung {
    /// Avoided radius `R_i`.
    pub radius: Q,
    /// Points with `‖x‖ >= R_{i+1}` use paths avoiding `B_p(R_i)`.
    pub applies_from: Q,
    pub gamma: Q,
    pub points: usize,
}

pub struct DispersedWitness {
    pub certificate: CategoricityCertificate,
    pub ladder: Vec<LadderRung>,
    pub report: CategoricityReport,
}

/// Ladder `R_0 = 0, R_1 = 1, R_{i+1} = max(i+1, γ(R_i), 2R_i)`; each point of
/// `U` follows the path avoiding the largest `B_p(R_i)` with `R_{i+1} <= ‖x‖`.
pub fn dispersed_categorical_witness(
    space: &Arc<Space>,
    ray: &Ray,
    u: &PointSubset,
    cfg: &CertConfig,
) -> Result<DispersedWitness> {
    let top = u.members().iter().map(|&x| space.norm(x as usize)).max().unwrap_or(qi(0));
    let mut rungs: Vec<(Q, AvoidancePaths)> = Vec::new();
    let mut r = qi(0);
    let mut i = 0i64;
    loop {
        let paths = find_avoiding_paths(space, ray, u, r)?;
        let next = if i == 0 { qi(1) } else { qi(i + 1).max(paths.gamma).max(qi(2) * r) };
        rungs.push((next, paths));
        if next > top {
            break;
        }
        r = next;
        i += 1;
    }
    let mut records = Vec::with_capacity(u.len());
    let mut ladder: Vec<LadderRung> = rungs
        .iter()
        .map(|(next, p)| LadderRung { radius: p.radius(), applies_from: *next, gamma: p.gamma, points: 0 })
        .collect();
    for &x in u.members() {
        let n = space.norm(x as usize);
        // Rung 0 serves every point below R_2.
        let k = (0..rungs.len()).rev().find(|&k| rungs[k].0 <= n).unwrap_or(0);
        let rec = rungs[k].1.path(x as usize).ok_or(Error::NoPath { point: x as usize, radius: rungs[k].1.radius() })?;
        if qi(rec.k as i64) > qi(2) * n {
            return Err(Error::Certification(format!(
                "path from {} has {} steps, more than twice its norm",
                space.point_name(x as usize),
                rec.k
            )));
        }
        ladder[k].points += 1;
        records.push(rec);
    }
    let certificate = paths_certificate(space, ray, u, &records)?;
    let report = verify_categorical(&certificate, qi(0), cfg)?;
    Ok(DispersedWitness { certificate, ladder, report })
}

/// Tabulates `H(x,t) = h_x(t)` over the cylinder with projection `k_x`.
fn paths_certificate(space: &Arc<Space>, ray: &Ray, u: &PointSubset, records: &[PathRecord]) -> Result<CategoricityCertificate> {
    let lengths: Vec<Q> = records.iter().map(|r| from_ticks(r.k, space.unit())).collect();
    let cylinder = Arc::new(CylinderSample::new(Arc::new(u.clone()), &lengths, space.unit(), "k")?);
    let values = (0..cylinder.len())
        .map(|i| {
            let (x, t) = cylinder.locate(i);
            let step = (t / cylinder.factor()) as usize;
            records[x].points[step] as u32
        })
        .collect();
    let homotopy = HomotopySample::new(cylinder, space, values, "avoiding paths")?;
    Ok(CategoricityCertificate {
        subset: u.clone(),
        ray: ray.clone(),
        j_map: records.iter().map(|r| r.ray_parameter as u32).collect(),
        homotopy: Arc::new(homotopy),
    })
}

/// A cover member with the ray it is pushed onto.
pub struct Half {
    pub subset: PointSubset,
    pub ray: Ray,
}

/// `{x_n >= 0}` and `{x_n < 0}` for a grid (last coordinate), or the two
/// sides of a sampled line.
pub fn two_halves(space: &Arc<Space>) -> Result<Vec<Half>> {
    if let Some(g) = space.grid() {
        let last = g.dim() - 1;
        let up = PointSubset::full(space).filter(|x| g.coords(x)[last] >= 0);
        let down = PointSubset::full(space).filter(|x| g.coords(x)[last] < 0);
        return Ok(vec![
            Half { subset: up, ray: Ray::grid_axis(space, last, 1)? },
            Half { subset: down, ray: Ray::grid_axis(space, last, -1)? },
        ]);
    }
    if space.is_line() {
        let up = PointSubset::full(space).filter(|x| space.line_position(x).unwrap() >= 0);
        let down = PointSubset::full(space).filter(|x| space.line_position(x).unwrap() < 0);
        return Ok(vec![
            Half { subset: up, ray: Ray::line_half(space, true)? },
            Half { subset: down, ray: Ray::line_half(space, false)? },
        ]);
    }
    Err(Error::Precondition(format!("no two-halves cover for {}", space.label())))
}

/// Constant-norm staircase pushing the free coordinates of a grid point to
/// zero one unit at a time, each followed by one unit along the half's axis.
fn staircase_step(c: &[i32], up: bool, s: u64) -> Vec<i32> {
    let last = c.len() - 1;
    let mut out = c.to_vec();
    let sign = if up { 1 } else { -1 };
    let mut moved = 0i64;
    let half = (s / 2) as i64;
    let mut left = half + (s % 2) as i64;
    for k in 0..last {
        let used = left.min(out[k].abs() as i64);
        out[k] -= out[k].signum() * used as i32;
        left -= used;
        moved += used;
        if left == 0 {
            break;
        }
    }
    out[last] += sign * half.min(moved) as i32;
    out
}

pub struct HalfWitness {
    pub certificate: CategoricityCertificate,
    pub report: CategoricityReport,
}

/// Certifies each half as coarsely categorical with its staircase homotopy.
pub fn two_halves_witness(space: &Arc<Space>, cfg: &CertConfig) -> Result<Vec<HalfWitness>> {
    two_halves(space)?
        .into_iter()
        .map(|half| {
            let certificate = half_certificate(space, &half)?;
            let report = verify_categorical(&certificate, qi(0), cfg)?;
            Ok(HalfWitness { certificate, report })
        })
        .collect()
}

fn half_certificate(space: &Arc<Space>, half: &Half) -> Result<CategoricityCertificate> {
    let base = Arc::new(half.subset.clone());
    if let Some(g) = space.grid() {
        let last = g.dim() - 1;
        let up = half.ray.label().starts_with('+');
        let lengths: Vec<Q> = half
            .subset
            .members()
            .iter()
            .map(|&x| qi(2 * g.coords(x as usize)[..last].iter().map(|v| v.abs() as i64).sum::<i64>()))
            .collect();
        let cylinder = CylinderSample::new(base, &lengths, qi(1), "2·free")?;
        let members = half.subset.members().to_vec();
        let target = space.clone();
        let j_map = members.iter().map(|&x| space.norm_ticks(x as usize) as u32).collect();
        let homotopy = FnHomotopy {
            cylinder,
            target: space.clone(),
            label: "staircase sweep".into(),
            f: move |i: usize, t: u64| {
                let g = target.grid().unwrap();
                g.index_of(&staircase_step(g.coords(members[i] as usize), up, t)).unwrap()
            },
        };
        return Ok(CategoricityCertificate {
            subset: half.subset.clone(),
            ray: half.ray.clone(),
            j_map,
            homotopy: Arc::new(homotopy),
        });
    }
    // A side of a line already lies on its ray: the constant homotopy.
    let cylinder = CylinderSample::new(base, &vec![qi(0); half.subset.len()], space.unit(), "0")?;
    let members = half.subset.members().to_vec();
    let j_map = members.iter().map(|&x| half.ray.parameter_of(x as usize).unwrap() as u32).collect();
    let homotopy = FnHomotopy {
        cylinder,
        target: space.clone(),
        label: "constant".into(),
        f: move |i: usize, _t: u64| members[i] as usize,
    };
    Ok(CategoricityCertificate { subset: half.subset.clone(), ray: half.ray.clone(), j_map, homotopy: Arc::new(homotopy) })
}
