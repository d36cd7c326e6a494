//! Combings, bicombings, ball contractions and shrinking maps.
//!
//! A combing is evaluated lazily: geodesic combings are formulas over the
//! space's coordinates, and tabulated combings store one path per point.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{CylinderMap, CylinderSample, FnHomotopy, HomotopySample, OnCylinder};
use crate::error::{Error, Result};
use crate::maps::{certify_control, estimate_control, CertConfig, ControlBounds, ControlCertificate, MapSample};
use crate::rational::{from_ticks, qi, Q};
use crate::space::{Domain, Kind, PointSubset, Space};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geodesic {
    /// Shrinking coordinate moves first, then growing moves, each phase in
    /// coordinate order.
    Grid,
    /// The unique tree geodesic through the last common ancestor.
    Tree,
    Line,
}

impl Geodesic {
    pub fn for_space(space: &Space) -> Result<Self> {
        match space.kind() {
            Kind::Grid(_) => Ok(Geodesic::Grid),
            Kind::Tree(_) => Ok(Geodesic::Tree),
            Kind::Line(_) => Ok(Geodesic::Line),
            _ => Err(Error::Precondition(format!("no geodesic bicombing bundled for {}", space.label()))),
        }
    }

    /// `C_q(x, n)`.
    pub fn at(self, space: &Space, q: usize, x: usize, n: u64) -> usize {
        let d = space.dist_ticks(q, x);
        if n >= d {
            return x;
        }
        if n == 0 {
            return q;
        }
        match self {
            Geodesic::Grid => {
                let g = space.grid().unwrap();
                let (a, b) = (g.coords(q), g.coords(x));
                let mut out = a.to_vec();
                let mut left = n as i64;
                // Phase 1: move each coordinate toward the point of [a_i, b_i] closest to 0.
                for k in 0..a.len() {
                    let m = closest_to_zero(a[k], b[k]);
                    let len = (m - a[k]).abs() as i64;
                    let used = left.min(len);
                    out[k] = a[k] + (m - a[k]).signum() * used as i32;
                    left -= used;
                    if left == 0 {
                        return g.index_of(&out).unwrap();
                    }
                }
                for k in 0..a.len() {
                    let m = out[k];
                    let len = (b[k] - m).abs() as i64;
                    let used = left.min(len);
                    out[k] = m + (b[k] - m).signum() * used as i32;
                    left -= used;
                    if left == 0 {
                        break;
                    }
                }
                g.index_of(&out).unwrap()
            }
            Geodesic::Tree => {
                let t = space.tree().unwrap();
                let depth = |v: usize| space.norm_ticks(v);
                let (mut u, mut v) = (q, x);
                while u != v {
                    if depth(u) >= depth(v) {
                        u = t.parent(u).unwrap();
                    } else {
                        v = t.parent(v).unwrap();
                    }
                }
                let up = depth(q) - depth(u);
                if n <= up {
                    let mut w = q;
                    for _ in 0..n {
                        w = t.parent(w).unwrap();
                    }
                    w
                } else {
                    let mut w = x;
                    for _ in 0..(d - n) {
                        w = t.parent(w).unwrap();
                    }
                    w
                }
            }
            Geodesic::Line => {
                if x > q {
                    q + n as usize
                } else {
                    q - n as usize
                }
            }
        }
    }
}

fn closest_to_zero(a: i32, b: i32) -> i32 {
    let (lo, hi) = (a.min(b), a.max(b));
    0.clamp(lo, hi)
}

#[derive(Clone, Debug)]
enum CombingKind {
    Geodesic(Geodesic),
    /// `rows[x] = [C(x,0), ..., C(x,N_x)]`.
    Table(Vec<Vec<u32>>),
}

/// A combing `C : X × N -> X` starting at `basepoint`.
#[derive(Clone, Debug)]
pub struct Combing {
    space: Arc<Space>,
    basepoint: usize,
    kind: CombingKind,
}

impl Combing {
    pub fn geodesic(space: &Arc<Space>, basepoint: usize) -> Result<Self> {
        Ok(Combing { space: space.clone(), basepoint, kind: CombingKind::Geodesic(Geodesic::for_space(space)?) })
    }

    /// Tabulated combing; row `x` lists `C(x,0..=N_x)` and is constant beyond.
    pub fn from_table(space: &Arc<Space>, basepoint: usize, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() != space.len() || rows.iter().any(|r| r.is_empty()) {
            return Err(Error::Malformed("combing table needs a nonempty row per point".into()));
        }
        if rows.iter().flatten().any(|&v| v as usize >= space.len()) {
            return Err(Error::Malformed("combing table value outside the space".into()));
        }
        Ok(Combing { space: space.clone(), basepoint, kind: CombingKind::Table(rows) })
    }

    /// Paths down a breadth-first tree from `basepoint`, for arbitrary graphs.
    pub fn bfs_tree(space: &Arc<Space>, basepoint: usize) -> Result<Self> {
        if !space.is_graph() {
            return Err(Error::Precondition("breadth-first combings need a graph space".into()));
        }
        let n = space.len();
        let dist = space.bfs_from(&[basepoint], u64::MAX, None);
        let mut parent = vec![usize::MAX; n];
        let mut nb = Vec::new();
        for x in 0..n {
            if x == basepoint {
                continue;
            }
            nb.clear();
            space.neighbors(x, &mut nb);
            parent[x] = *nb.iter().filter(|&&y| dist[y] + 1 == dist[x]).min().unwrap();
        }
        let rows = (0..n)
            .map(|x| {
                let mut path = vec![x as u32];
                let mut v = x;
                while v != basepoint {
                    v = parent[v];
                    path.push(v as u32);
                }
                path.reverse();
                path
            })
            .collect();
        Combing::from_table(space, basepoint, rows)
    }

    /// The same paths with entry `C(x, n)` replaced, for negative tests.
    pub fn with_entry(&self, x: usize, n: usize, y: usize) -> Combing {
        let mut rows = self.rows();
        let last = *rows[x].last().unwrap();
        while rows[x].len() <= n {
            rows[x].push(last);
        }
        rows[x][n] = y as u32;
        Combing { space: self.space.clone(), basepoint: self.basepoint, kind: CombingKind::Table(rows) }
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn is_geodesic(&self) -> bool {
        matches!(self.kind, CombingKind::Geodesic(_))
    }

    pub fn geodesic_kind(&self) -> Option<Geodesic> {
        match self.kind {
            CombingKind::Geodesic(g) => Some(g),
            CombingKind::Table(_) => None,
        }
    }

    /// Stored path length: `N_p(x)` for valid combings.
    pub fn length(&self, x: usize) -> u64 {
        match &self.kind {
            CombingKind::Geodesic(_) => self.space.dist_ticks(self.basepoint, x),
            CombingKind::Table(rows) => rows[x].len() as u64 - 1,
        }
    }

    pub fn at(&self, x: usize, n: u64) -> usize {
        match &self.kind {
            CombingKind::Geodesic(g) => g.at(&self.space, self.basepoint, x, n),
            CombingKind::Table(rows) => {
                let row = &rows[x];
                row[(n as usize).min(row.len() - 1)] as usize
            }
        }
    }

    pub fn max_length(&self) -> u64 {
        (0..self.space.len()).map(|x| self.length(x)).max().unwrap_or(0)
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        (0..self.space.len())
            .map(|x| (0..=self.length(x)).map(|n| self.at(x, n) as u32).collect())
            .collect()
    }
}

/// A bicombing: one combing per admissible basepoint.
#[derive(Clone, Debug)]
pub struct Bicombing {
    space: Arc<Space>,
    kind: Geodesic,
}

impl Bicombing {
    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn geodesic(&self) -> Geodesic {
        self.kind
    }

    /// `C_q(x, n)`.
    pub fn at(&self, q: usize, x: usize, n: u64) -> usize {
        self.kind.at(&self.space, q, x, n)
    }

    pub fn slice(&self, q: usize) -> Combing {
        Combing { space: self.space.clone(), basepoint: q, kind: CombingKind::Geodesic(self.kind) }
    }
}

/// Monotone lattice bicombing on a grid; every point is an admissible basepoint.
pub fn geodesic_bicombing_grid(space: &Arc<Space>) -> Result<Bicombing> {
    if space.grid().is_none() {
        return Err(Error::Precondition("grid bicombing needs a grid space".into()));
    }
    Ok(Bicombing { space: space.clone(), kind: Geodesic::Grid })
}

/// Geodesic bicombing of any bundled generator (grid, tree or line).
pub fn geodesic_bicombing(space: &Arc<Space>) -> Result<Bicombing> {
    Ok(Bicombing { space: space.clone(), kind: Geodesic::for_space(space)? })
}

/// `C(x, n)` = ancestor of `x` at depth `min(n, depth x)`.
pub fn geodesic_combing_tree(space: &Arc<Space>) -> Result<Combing> {
    if space.tree().is_none() {
        return Err(Error::Precondition("tree combing needs a tree space".into()));
    }
    Combing::geodesic(space, space.basepoint())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomViolation {
    pub axiom: String,
    pub basepoint: String,
    pub point: String,
    pub n: u64,
    pub found: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SliceProperness {
    pub radius: Q,
    /// First time from which every slice pulls `B_p(radius)` back into a
    /// ball of radius `preimage_radius`.
    pub from_time: u64,
    pub preimage_radius: Q,
    pub bounded_inside_interior: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombingCertificate {
    pub basepoint: String,
    pub max_length: u64,
    pub axiom1_violations: u64,
    pub axiom2_violations: u64,
    pub minimality_violations: u64,
    pub witnesses: Vec<AxiomViolation>,
    pub control: ControlCertificate,
    pub rho_upper_1: Q,
    pub slice_properness: Vec<SliceProperness>,
    pub passed: bool,
}

const WITNESS_CAP: usize = 8;

struct AxiomScan {
    a1: u64,
    a2: u64,
    min: u64,
    witnesses: Vec<AxiomViolation>,
}

fn scan_axioms(space: &Space, q: usize, n_max: u64, len: impl Fn(usize) -> u64, at: impl Fn(usize, u64) -> usize) -> AxiomScan {
    let mut s = AxiomScan { a1: 0, a2: 0, min: 0, witnesses: Vec::new() };
    let note = |s: &mut AxiomScan, axiom: &str, x: usize, n: u64, y: usize| {
        if s.witnesses.len() < WITNESS_CAP {
            s.witnesses.push(AxiomViolation {
                axiom: axiom.into(),
                basepoint: space.point_name(q),
                point: space.point_name(x),
                n,
                found: space.point_name(y),
            });
        }
    };
    for x in 0..space.len() {
        let y = at(x, 0);
        if y != q {
            s.a1 += 1;
            note(&mut s, "C(x,0) = p", x, 0, y);
        }
    }
    for n in 0..=n_max {
        let y = at(q, n);
        if y != q {
            s.a1 += 1;
            note(&mut s, "C(p,n) = p", q, n, y);
        }
    }
    for x in 0..space.len() {
        let nx = len(x);
        for n in nx..=n_max.max(nx) {
            let y = at(x, n);
            if y != x {
                s.a2 += 1;
                note(&mut s, "C(x,n) = x for n >= N(x)", x, n, y);
                break;
            }
        }
        if nx > 0 && at(x, nx - 1) == x {
            s.min += 1;
            note(&mut s, "N(x) minimal", x, nx - 1, x);
        }
    }
    s
}

/// Combing as a map on `X × {0..N_max}` with the sup metric.
fn product_map(c: &Combing) -> Result<FnHomotopy<impl Fn(usize, u64) -> usize + Sync + Send + '_>> {
    let n_max = c.max_length();
    let space: Arc<dyn Domain> = c.space.clone();
    let cyl = CylinderSample::new(space, &vec![qi(n_max as i64); c.space.len()], qi(1), "const")?;
    let unit = cyl.unit();
    Ok(FnHomotopy { cylinder: cyl, target: c.space.clone(), label: "C".into(), f: move |x, t| c.at(x, whole_time(t, unit)) })
}

fn slice_properness(c: &Combing) -> Vec<SliceProperness> {
    let space = &c.space;
    let n_max = c.max_length();
    if space.len() as u64 * (n_max + 1) > 50_000_000 {
        return Vec::new();
    }
    let r_int = space.interior_ticks();
    let mut out = Vec::new();
    for k in [r_int / 4, r_int / 2] {
        if k == 0 {
            continue;
        }
        // Preimage radius of B_p(k) under each slice n >= k.
        let worst = (k..=n_max.max(k))
            .into_par_iter()
            .map(|n| {
                (0..space.len())
                    .filter(|&x| space.norm_ticks(c.at(x, n)) < k)
                    .map(|x| space.norm_ticks(x))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0);
        out.push(SliceProperness {
            radius: from_ticks(k, space.unit()),
            from_time: k,
            preimage_radius: from_ticks(worst, space.unit()),
            bounded_inside_interior: worst < r_int,
        });
    }
    out
}

/// Axioms 1 and 2 exactly, axiom 3 through control of the product map.
pub fn verify_combing(c: &Combing, cfg: &CertConfig) -> Result<CombingCertificate> {
    let n_max = c.max_length();
    let scan = scan_axioms(&c.space, c.basepoint, n_max, |x| c.length(x), |x, n| c.at(x, n));
    let product = product_map(c)?;
    let control = if product.cylinder().len() >= 2 {
        certify_control(&OnCylinder(&product), cfg)?
    } else {
        trivial_control()
    };
    let rho_upper_1 = control.bounds.rho_upper_at(qi(1));
    let passed = scan.a1 == 0 && scan.a2 == 0 && scan.min == 0 && control.controlled;
    Ok(CombingCertificate {
        basepoint: c.space.point_name(c.basepoint),
        max_length: n_max,
        axiom1_violations: scan.a1,
        axiom2_violations: scan.a2,
        minimality_violations: scan.min,
        witnesses: scan.witnesses,
        control,
        rho_upper_1,
        slice_properness: slice_properness(c),
        passed,
    })
}

fn trivial_control() -> ControlCertificate {
    let bounds = ControlBounds {
        source_unit: qi(1),
        target_unit: qi(1),
        grid_ticks: Vec::new(),
        upper_ticks: Vec::new(),
        lower_ticks: Vec::new(),
        pairs_scanned: 0,
        scan: crate::maps::ScanMode::Exact,
    };
    ControlCertificate {
        bounds,
        interior_radius: qi(0),
        upper_at_interior: qi(0),
        slope_limit: qi(0),
        controlled: true,
        lower_at_half_interior: None,
        growth_threshold: qi(0),
        lower_growth: true,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BicombingCertificate {
    pub basepoints: u64,
    pub triples_checked: u64,
    pub axiom_violations: u64,
    pub witnesses: Vec<AxiomViolation>,
    /// Largest `d(C_q(x,n), C_q(x',n'))` over `d(x,x') <= 1`, `|n-n'| <= 1`, all `q`.
    pub slice_rho_upper_1: Q,
    /// Largest `d(C_q(x,n), C_q'(x,n))` over `d(q,q') <= 1`.
    pub basepoint_modulus_1: Q,
    /// Triangle-inequality bound for the full map at sup distance 1.
    pub combined_rho_upper_1: Q,
    pub base_slice: CombingCertificate,
    pub passed: bool,
}

/// Every basepoint slice is scanned exhaustively for the axioms and for
/// distance-1 control; the slice at the space's basepoint also gets a full
/// control certificate.
pub fn verify_bicombing(b: &Bicombing, cfg: &CertConfig) -> Result<BicombingCertificate> {
    let space = &b.space;
    let n = space.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, list) in nbrs.iter_mut().enumerate() {
        space.close_points(x, 1, list);
        list.retain(|&y| y != x);
    }
    struct Acc {
        triples: u64,
        violations: u64,
        witnesses: Vec<AxiomViolation>,
        slice: u64,
        cross: u64,
    }
    let acc = (0..n)
        .into_par_iter()
        .map(|q| {
            let n_max = (0..n).map(|x| space.dist_ticks(q, x)).max().unwrap_or(0);
            let width = n_max as usize + 1;
            let mut table = vec![0u32; n * width];
            for x in 0..n {
                for t in 0..width {
                    table[x * width + t] = b.at(q, x, t as u64) as u32;
                }
            }
            let at = |x: usize, t: u64| table[x * width + (t as usize).min(width - 1)] as usize;
            let scan = scan_axioms(space, q, n_max, |x| space.dist_ticks(q, x), at);
            let mut slice = 0;
            for x in 0..n {
                for t in 0..width {
                    let y = table[x * width + t] as usize;
                    if t + 1 < width {
                        slice = slice.max(space.dist_ticks(y, table[x * width + t + 1] as usize));
                    }
                    for &x2 in nbrs[x].iter().filter(|&&x2| x2 > x) {
                        for t2 in t.saturating_sub(1)..(t + 2).min(width) {
                            slice = slice.max(space.dist_ticks(y, table[x2 * width + t2] as usize));
                        }
                    }
                }
            }
            let mut cross = 0;
            for &q2 in nbrs[q].iter().filter(|&&q2| q2 > q) {
                for x in 0..n {
                    for t in 0..width as u64 {
                        cross = cross.max(space.dist_ticks(at(x, t), b.at(q2, x, t)));
                    }
                }
            }
            Acc {
                triples: (n * width) as u64,
                violations: scan.a1 + scan.a2 + scan.min,
                witnesses: scan.witnesses,
                slice,
                cross,
            }
        })
        .reduce(
            || Acc { triples: 0, violations: 0, witnesses: Vec::new(), slice: 0, cross: 0 },
            |mut a, b| {
                a.triples += b.triples;
                a.violations += b.violations;
                a.witnesses.extend(b.witnesses);
                a.witnesses.truncate(WITNESS_CAP);
                a.slice = a.slice.max(b.slice);
                a.cross = a.cross.max(b.cross);
                a
            },
        );
    let base_slice = verify_combing(&b.slice(space.basepoint()), cfg)?;
    let unit = space.unit();
    let passed = acc.violations == 0 && base_slice.passed;
    Ok(BicombingCertificate {
        basepoints: n as u64,
        triples_checked: acc.triples,
        axiom_violations: acc.violations,
        witnesses: acc.witnesses,
        slice_rho_upper_1: from_ticks(acc.slice, unit),
        basepoint_modulus_1: from_ticks(acc.cross, unit),
        combined_rho_upper_1: from_ticks(acc.slice + acc.cross, unit),
        base_slice,
        passed,
    })
}

/// `h'(x,t) = C(x, N(x) - t)` on the cylinder with projection `N`.
pub struct Contraction<'a> {
    combing: &'a Combing,
    cylinder: CylinderSample,
    subset: PointSubset,
}

impl<'a> Contraction<'a> {
    pub fn new(combing: &'a Combing, subset: &PointSubset) -> Result<Self> {
        let lengths: Vec<Q> = subset.members().iter().map(|&x| qi(combing.length(x as usize) as i64)).collect();
        let cylinder = CylinderSample::new(Arc::new(subset.clone()), &lengths, qi(1), "N")?;
        Ok(Contraction { combing, cylinder, subset: subset.clone() })
    }
}

impl CylinderMap for Contraction<'_> {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        self.combing.space()
    }

    fn eval(&self, i: usize, t: u64) -> usize {
        let x = self.subset.members()[i] as usize;
        let steps = whole_time(t, self.cylinder.unit());
        let nx = self.combing.length(x);
        self.combing.at(x, nx.saturating_sub(steps))
    }

    fn label(&self) -> String {
        "ball contraction".into()
    }
}

pub struct BallContraction {
    pub homotopy: HomotopySample,
    pub bounds: Option<ControlBounds>,
}

/// Tabulated contraction of `subset` to the combing's basepoint along the
/// combing paths, with its measured control bounds.
pub fn ball_contraction(c: &Combing, subset: &PointSubset, cfg: &CertConfig) -> Result<BallContraction> {
    let h = Contraction::new(c, subset)?;
    let homotopy = HomotopySample::tabulate(&h)?;
    let bounds = if homotopy.cylinder().len() >= 2 {
        Some(estimate_control(&OnCylinder(&homotopy), cfg)?)
    } else {
        None
    };
    Ok(BallContraction { homotopy, bounds })
}

/// Integer part of the time value `t * unit`.
pub(crate) fn whole_time(t: u64, unit: Q) -> u64 {
    t * *unit.numer() as u64 / *unit.denom() as u64
}

fn check_rho(rho: &dyn Fn(u64) -> u64, up_to: u64) -> Result<()> {
    for t in 0..=up_to {
        if rho(t) > t {
            return Err(Error::Precondition(format!("rho({t}) = {} exceeds {t}", rho(t))));
        }
    }
    Ok(())
}

/// `Sh(x) = C(x, rho(N(x)))`.
pub fn shrinking_map(c: &Combing, rho: &(dyn Fn(u64) -> u64 + Sync)) -> Result<MapSample> {
    check_rho(rho, c.max_length())?;
    MapSample::from_fn(c.space().clone(), c.space(), "Sh", |x| c.at(x, rho(c.length(x))))
}

/// `H(x,s) = C(x, N(x) - min(s, N(x) - rho(N(x))))` over the norm cylinder,
/// `s` counted in lattice steps.
pub struct ShrinkingHomotopy<'a> {
    combing: &'a Combing,
    rho: &'a (dyn Fn(u64) -> u64 + Sync),
    cylinder: CylinderSample,
}

impl CylinderMap for ShrinkingHomotopy<'_> {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        self.combing.space()
    }

    fn eval(&self, x: usize, t: u64) -> usize {
        let steps = t / self.cylinder.factor();
        let nx = self.combing.length(x);
        let back = steps.min(nx - (self.rho)(nx));
        self.combing.at(x, nx - back)
    }

    fn label(&self) -> String {
        "shrinking homotopy".into()
    }
}

pub fn shrinking_homotopy<'a>(c: &'a Combing, rho: &'a (dyn Fn(u64) -> u64 + Sync)) -> Result<ShrinkingHomotopy<'a>> {
    check_rho(rho, c.max_length())?;
    for x in 0..c.space().len() {
        let nx = c.length(x);
        if nx - rho(nx) > c.space().norm_ticks(x) {
            return Err(Error::Precondition(format!(
                "combing path of {} is longer than its norm allows on the norm cylinder",
                c.space().point_name(x)
            )));
        }
    }
    let space = c.space().clone();
    let unit = space.unit();
    let cylinder = CylinderSample::over_norm(space, unit)?;
    Ok(ShrinkingHomotopy { combing: c, rho, cylinder })
}

/// Monotone integer reparametrization with `rho(b_k) = k`, where
/// `b_k = L_1 + 2 L_2 + ... + k L_k`, linear with floor rounding in between.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaircaseRho {
    pub l: Vec<u64>,
    pub breakpoints: Vec<u64>,
}

pub fn staircase_rho(l: &[u64]) -> Result<StaircaseRho> {
    if l.is_empty() {
        return Err(Error::Precondition("staircase needs at least one modulus".into()));
    }
    if l.contains(&0) {
        return Err(Error::Precondition("staircase moduli must be at least 1".into()));
    }
    if let Some(k) = l.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::Precondition(format!("staircase moduli must be nondecreasing: L_{} > L_{}", k + 1, k + 2)));
    }
    let mut b = Vec::with_capacity(l.len());
    let mut acc = 0;
    for (j, &lj) in l.iter().enumerate() {
        acc += (j as u64 + 1) * lj;
        b.push(acc);
    }
    Ok(StaircaseRho { l: l.to_vec(), breakpoints: b })
}

impl StaircaseRho {
    /// Beyond the last breakpoint the last modulus repeats.
    pub fn modulus(&self, k: usize) -> u64 {
        self.l[(k - 1).min(self.l.len() - 1)]
    }

    pub fn eval(&self, t: u64) -> u64 {
        let mut prev = 0u64;
        let mut k = 1usize;
        loop {
            let seg = k as u64 * self.modulus(k);
            if t < prev + seg {
                return (k as u64 - 1) + (t - prev) / seg;
            }
            prev += seg;
            k += 1;
        }
    }

    /// Breakpoint `b_k`, extended past the tabulated moduli.
    pub fn breakpoint(&self, k: usize) -> u64 {
        (1..=k).map(|j| j as u64 * self.modulus(j)).sum()
    }

    pub fn as_fn(&self) -> impl Fn(u64) -> u64 + Sync + '_ {
        move |t| self.eval(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_grid_space, build_tree_space};

    #[test]
    fn grid_geodesic_walks_first_coordinate() {
        let s = build_grid_space(2, 8).unwrap();
        let c = Combing::geodesic(&s, s.basepoint()).unwrap();
        let x = s.grid_point(&[3, 4]).unwrap();
        assert_eq!(c.at(x, 3), s.grid_point(&[3, 0]).unwrap());
        assert_eq!(c.length(x), 7);
    }

    #[test]
    fn grid_bicombing_stays_in_the_ball() {
        let s = build_grid_space(2, 5).unwrap();
        let b = geodesic_bicombing_grid(&s).unwrap();
        let q = s.grid_point(&[0, 5]).unwrap();
        let x = s.grid_point(&[5, 0]).unwrap();
        for n in 0..=10 {
            let y = b.at(q, x, n);
            assert_eq!(s.dist_ticks(q, y), n);
            assert_eq!(s.dist_ticks(y, x), 10 - n);
        }
    }

    #[test]
    fn tree_combing_is_ancestor() {
        let s = build_tree_space(2, 6).unwrap();
        let c = geodesic_combing_tree(&s).unwrap();
        let t = s.tree().unwrap();
        let mut leaf = 0;
        for _ in 0..5 {
            leaf = t.child(leaf, 1);
        }
        let mut anc = leaf;
        for _ in 0..3 {
            anc = t.parent(anc).unwrap();
        }
        assert_eq!(c.at(leaf, 2), anc);
        assert_eq!(c.length(leaf), 5);
        assert_eq!(c.length(0), 0);
    }

    #[test]
    fn staircase_breakpoints() {
        let r = staircase_rho(&[2, 3, 4]).unwrap();
        assert_eq!(r.breakpoints, vec![2, 8, 20]);
        assert_eq!((r.eval(0), r.eval(2), r.eval(5), r.eval(8), r.eval(20)), (0, 1, 1, 2, 3));
        assert!(staircase_rho(&[3, 2]).is_err());
    }

    #[test]
    fn shrinking_examples() {
        let s = build_grid_space(1, 20).unwrap();
        let c = Combing::geodesic(&s, s.basepoint()).unwrap();
        let half = |t: u64| t / 2;
        let h = shrinking_homotopy(&c, &half).unwrap();
        let x = s.grid_point(&[10]).unwrap();
        assert_eq!(h.eval(x, 3), s.grid_point(&[7]).unwrap());
        let too_big = |t: u64| t + 1;
        assert!(shrinking_map(&c, &too_big).is_err());
    }
}
