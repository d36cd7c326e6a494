//! The multiscale construction turning asymptotic-dimension witness covers
//! into dispersed families, and the resulting upper bound on coarse category.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combing::geodesic_bicombing;
use crate::cover::{asdim_witness, voronoi_min_gap, SubsetFamily, WitnessCover};
use crate::cylinder::CategoricityReport;
use crate::dispersed::{
    contract_family_to_points, dispersed_categorical_witness, two_halves_witness, ContractionCertificate, LadderRung,
};
use crate::error::{Error, Result};
use crate::maps::CertConfig;
use crate::rational::{from_ticks, q, qi, strict_ticks, Q};
use crate::space::{Domain, PointSubset, Ray, Space};

/// Radii `R_1 < R_2 < ...`, scales `λ_1, λ_2, ...` and witness diameters
/// `D_1, D_2, ...`; entry `k` belongs to level `k+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub c_lambda: Q,
    pub c_r: Q,
    pub radii: Vec<Q>,
    pub scales: Vec<Q>,
    pub diameters: Vec<Q>,
    pub interior_radius: Q,
}

impl Schedule {
    pub fn levels(&self) -> usize {
        self.radii.len()
    }

    /// `R_j` with `R_0 = 0`.
    pub fn radius(&self, j: usize) -> Q {
        if j == 0 {
            qi(0)
        } else {
            self.radii[j - 1]
        }
    }

    /// `λ_j` with `λ_0 = 0`.
    pub fn scale(&self, j: usize) -> Q {
        if j == 0 {
            qi(0)
        } else {
            self.scales[j - 1]
        }
    }

    /// `D_j` with `D_0 = 0`.
    pub fn diameter(&self, j: usize) -> Q {
        if j == 0 {
            qi(0)
        } else {
            self.diameters[j - 1]
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScheduleCheck {
    /// `λ_{k+1} / R_k` per level pair; the separation argument needs `> 2`.
    pub scale_ratios: Vec<Q>,
    /// `R_k / max(λ_k, D_k)` per level; the absorption argument needs `> 3`.
    pub radius_ratios: Vec<Q>,
    /// First level whose ratio is too small.
    pub witness: Option<String>,
    pub passed: bool,
}

pub fn check_schedule(s: &Schedule) -> ScheduleCheck {
    let scale_ratios: Vec<Q> = (1..s.levels()).map(|k| s.scale(k + 1) / s.radius(k)).collect();
    let radius_ratios: Vec<Q> = (1..=s.levels()).map(|k| s.radius(k) / s.scale(k).max(s.diameter(k))).collect();
    let mut witness = None;
    if let Some(k) = scale_ratios.iter().position(|&r| r <= qi(2)) {
        witness = Some(format!(
            "λ_{} = {} is not more than twice R_{} = {}",
            k + 2,
            s.scale(k + 2),
            k + 1,
            s.radius(k + 1)
        ));
    } else if let Some(k) = radius_ratios.iter().position(|&r| r <= qi(3)) {
        witness = Some(format!(
            "R_{} = {} is not more than three times max(λ, D) = {}",
            k + 1,
            s.radius(k + 1),
            s.scale(k + 1).max(s.diameter(k + 1))
        ));
    }
    ScheduleCheck { scale_ratios, radius_ratios, passed: witness.is_none(), witness }
}

/// `λ_1 = c_λ`, `R_k = c_R·max(λ_k, D_k)`, `λ_{k+1} = c_λ·R_k`, until `R_k`
/// passes the interior radius.
pub fn build_schedule(
    space: &Arc<Space>,
    witness_maker: &dyn Fn(&Arc<Space>, Q) -> Result<WitnessCover>,
    c_lambda: Q,
    c_r: Q,
) -> Result<(Schedule, Vec<WitnessCover>)> {
    if c_lambda <= qi(0) || c_r <= qi(0) {
        return Err(Error::Precondition("schedule constants must be positive".into()));
    }
    let interior = space.interior_radius();
    let mut s = Schedule { c_lambda, c_r, radii: vec![], scales: vec![], diameters: vec![], interior_radius: interior };
    let mut covers = Vec::new();
    let mut lambda = c_lambda;
    loop {
        let cover = witness_maker(space, lambda)?;
        let d = cover.diam_bound();
        let r = c_r * lambda.max(d);
        if s.radii.last().is_some_and(|&prev| r <= prev) {
            return Err(Error::DegenerateSchedule(format!("radii stop increasing at λ = {lambda}")));
        }
        s.scales.push(lambda);
        s.diameters.push(d);
        s.radii.push(r);
        covers.push(cover);
        if r > interior {
            break;
        }
        lambda = c_lambda * r;
    }
    if s.levels() < 2 {
        return Err(Error::DegenerateSchedule(format!(
            "R_1 = {} already exceeds the interior radius {interior}; fewer than two annuli fit",
            s.radii[0]
        )));
    }
    Ok((s, covers))
}

/// `C[j][i]`: level-`j` slices of the `i`-th family (0-based `j` for level `j+1`).
pub type Levels = Vec<Vec<SubsetFamily>>;

/// `C_1^i = {B ∩ B_p(R_1)}` and `C_{k+1}^i = {B ∩ A_p(R_k, R_{k+1})}`,
/// empty slices dropped; covers with fewer families are padded with empty ones.
pub fn annulus_families(space: &Arc<Space>, schedule: &Schedule, covers: &[WitnessCover]) -> Levels {
    let width = covers.iter().map(|c| c.families.len()).max().unwrap_or(0);
    covers
        .iter()
        .enumerate()
        .map(|(k, cover)| {
            let j = k + 1;
            let lo = strict_ticks(schedule.radius(j - 1), space.unit());
            let hi = strict_ticks(schedule.radius(j), space.unit());
            (0..width)
                .map(|i| {
                    let members = cover
                        .families
                        .get(i)
                        .map(|f| {
                            f.members
                                .iter()
                                .map(|m| {
                                    m.filter(|x| {
                                        let n = space.norm_ticks(x);
                                        n >= lo && n < hi
                                    })
                                })
                                .filter(|m| !m.members().is_empty())
                                .collect()
                        })
                        .unwrap_or_default();
                    SubsetFamily::new(space, members, schedule.scale(j), schedule.diameter(j))
                })
                .collect()
        })
        .collect()
}

/// Points within `limit` ticks of `sources`, by local breadth-first search.
fn local_ball(space: &Space, sources: &[u32], limit: u64) -> Vec<usize> {
    if !space.is_graph() {
        return (0..space.len())
            .filter(|&x| sources.iter().any(|&s| space.dist_ticks(x, s as usize) <= limit))
            .collect();
    }
    let mut seen: HashMap<usize, u64> = sources.iter().map(|&s| (s as usize, 0)).collect();
    let mut queue: VecDeque<usize> = sources.iter().map(|&s| s as usize).collect();
    let mut nb = Vec::new();
    while let Some(u) = queue.pop_front() {
        let d = seen[&u];
        if d >= limit {
            continue;
        }
        nb.clear();
        space.neighbors(u, &mut nb);
        for &v in &nb {
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(v) {
                e.insert(d + 1);
                queue.push_back(v);
            }
        }
    }
    seen.into_keys().collect()
}

/// For each member of `lower`, the members of `upper` at distance `< lambda`.
fn near_up(space: &Space, lower: &SubsetFamily, upper: &SubsetFamily, lambda: Q) -> Vec<Vec<usize>> {
    let bound = strict_ticks(lambda, space.unit());
    if bound == 0 || upper.members.is_empty() {
        return vec![Vec::new(); lower.members.len()];
    }
    let mut owner = vec![u32::MAX; space.len()];
    for (k, m) in upper.members.iter().enumerate() {
        for &x in m.members() {
            owner[x as usize] = k as u32;
        }
    }
    lower
        .members
        .par_iter()
        .map(|m| {
            let mut hits: Vec<usize> = local_ball(space, m.members(), bound - 1)
                .into_iter()
                .filter_map(|x| (owner[x] != u32::MAX).then_some(owner[x] as usize))
                .collect();
            hits.sort_unstable();
            hits.dedup();
            hits
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Redistribution {
    /// Members of `C_j^i` kept (not absorbed upward), per level and family.
    pub kept: Vec<Vec<usize>>,
    /// Members of `C_j^i` absorbed into a saturation one level up.
    pub absorbed: Vec<Vec<usize>>,
    /// Points of `⋃ C` outside every `D` member.
    pub absorption_gap: Vec<usize>,
}

/// `D_1^i = {C ∈ C_1^i : d(C, C') >= λ_1 for all C' ∈ C_2^i}` and, for
/// `j >= 2`, `D_j^i = {N_{λ_{j-1}}(C, C_{j-1}^i) : C ∈ C_j^i, d(C, C') >= λ_j
/// for all C' ∈ C_{j+1}^i}`.
pub fn redistribute(space: &Arc<Space>, c: &Levels, schedule: &Schedule) -> Result<(Levels, Redistribution)> {
    let levels = c.len();
    let width = c.first().map_or(0, |l| l.len());
    let mut d: Levels = vec![Vec::with_capacity(width); levels];
    let mut kept = vec![vec![0; width]; levels];
    let mut absorbed = vec![vec![0; width]; levels];
    let mut gap = Vec::new();
    for i in 0..width {
        // near[k][m]: members of level k+2 within λ_{k+1} of member m of level k+1.
        let near: Vec<Vec<Vec<usize>>> = (0..levels)
            .map(|k| {
                if k + 1 < levels {
                    near_up(space, &c[k][i], &c[k + 1][i], schedule.scale(k + 1))
                } else {
                    vec![Vec::new(); c[k][i].members.len()]
                }
            })
            .collect();
        for k in 0..levels {
            let mut members = Vec::new();
            for (m, cm) in c[k][i].members.iter().enumerate() {
                if !near[k][m].is_empty() {
                    absorbed[k][i] += 1;
                    continue;
                }
                kept[k][i] += 1;
                let mut sat = cm.clone();
                if k > 0 {
                    for (low, lm) in c[k - 1][i].members.iter().enumerate() {
                        if near[k - 1][low].binary_search(&m).is_ok() {
                            sat = sat.union(lm);
                        }
                    }
                }
                members.push(sat);
            }
            let j = k + 1;
            let bound = schedule.diameter(j) + qi(2) * schedule.scale(j - 1) + qi(2) * schedule.diameter(j - 1);
            d[k].push(SubsetFamily::new(space, members, schedule.scale(j), bound));
        }
        let mut covered = vec![false; space.len()];
        for level in &d {
            for m in &level[i].members {
                for &x in m.members() {
                    covered[x as usize] = true;
                }
            }
        }
        for level in c {
            for m in &level[i].members {
                gap.extend(m.members().iter().map(|&x| x as usize).filter(|&x| !covered[x]));
            }
        }
    }
    gap.sort_unstable();
    gap.dedup();
    let red = Redistribution { kept, absorbed, absorption_gap: gap.iter().copied().take(16).collect() };
    if let Some(&x) = gap.first() {
        return Err(Error::Certification(format!(
            "absorption gap: {} lies in no redistributed member ({} points missed)",
            space.point_name(x),
            gap.len()
        )));
    }
    Ok((d, red))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LadderCheck {
    pub level: usize,
    pub members: usize,
    pub min_gap: Option<Q>,
    pub required: Q,
    pub witness: Option<(String, String)>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssembledFamily {
    pub members: usize,
    pub disjoint: bool,
    pub overlap: Option<String>,
    pub max_diam: Q,
    pub diam_bound: Q,
    pub bounded: bool,
    pub ladder: Vec<LadderCheck>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssemblyCertificate {
    pub families: Vec<AssembledFamily>,
    pub interior_covered: bool,
    pub uncovered: Vec<String>,
    pub passed: bool,
}

/// `U^i = D_1^i ∪ D_2^i ∪ ...` with disjointness, boundedness, ladder
/// dispersion (`d(M, M') >= λ_{j-1}` for members meeting the `j`-th annulus)
/// and interior cover certificates.
pub fn assemble_and_certify(space: &Arc<Space>, d: &Levels, schedule: &Schedule) -> (Vec<SubsetFamily>, AssemblyCertificate) {
    let width = d.first().map_or(0, |l| l.len());
    let unit = space.unit();
    let mut families = Vec::with_capacity(width);
    let mut certs = Vec::with_capacity(width);
    let mut covered = vec![false; space.len()];
    for i in 0..width {
        let members: Vec<PointSubset> = d.iter().flat_map(|level| level[i].members.iter().cloned()).collect();
        let diam_bound = d.iter().map(|level| level[i].diam_bound).max().unwrap_or(qi(0));
        let mut owner = vec![u32::MAX; space.len()];
        let mut overlap = None;
        for (k, m) in members.iter().enumerate() {
            for &x in m.members() {
                covered[x as usize] = true;
                if owner[x as usize] != u32::MAX && overlap.is_none() {
                    overlap = Some(space.point_name(x as usize));
                }
                owner[x as usize] = k as u32;
            }
        }
        let max_diam = from_ticks(members.par_iter().map(|m| m.diameter_ticks()).max().unwrap_or(0), unit);
        let ladder: Vec<LadderCheck> = (2..=schedule.levels())
            .map(|j| {
                let lo = strict_ticks(schedule.radius(j - 1), unit);
                let hi = strict_ticks(schedule.radius(j), unit);
                let meeting: Vec<PointSubset> = members
                    .iter()
                    .filter(|m| {
                        m.members().iter().any(|&x| {
                            let n = space.norm_ticks(x as usize);
                            n >= lo && n < hi
                        })
                    })
                    .cloned()
                    .collect();
                let required = schedule.scale(j - 1);
                let (gap, witness, _) = voronoi_or_scan(space, &meeting);
                let min_gap = gap.map(|g| from_ticks(g, unit));
                LadderCheck {
                    level: j,
                    members: meeting.len(),
                    passed: min_gap.is_none_or(|g| g >= required),
                    witness: witness.map(|(a, b)| (space.point_name(a), space.point_name(b))),
                    min_gap,
                    required,
                }
            })
            .collect();
        let bounded = max_diam <= diam_bound;
        let passed = overlap.is_none() && bounded && ladder.iter().all(|l| l.passed);
        certs.push(AssembledFamily {
            members: members.len(),
            disjoint: overlap.is_none(),
            overlap,
            max_diam,
            diam_bound,
            bounded,
            ladder,
            passed,
        });
        families.push(SubsetFamily::new(space, members, schedule.scale(1), diam_bound));
    }
    let interior = space.interior_ticks();
    let uncovered: Vec<String> = (0..space.len())
        .filter(|&x| space.norm_ticks(x) <= interior && !covered[x])
        .take(16)
        .map(|x| space.point_name(x))
        .collect();
    let interior_covered = uncovered.is_empty();
    let passed = interior_covered && certs.iter().all(|c| c.passed);
    (families, AssemblyCertificate { families: certs, interior_covered, uncovered, passed })
}

fn voronoi_or_scan(space: &Arc<Space>, members: &[PointSubset]) -> (Option<u64>, Option<(usize, usize)>, bool) {
    if members.len() < 2 {
        return (None, None, true);
    }
    if space.is_graph() {
        return voronoi_min_gap(space, members);
    }
    let fam = SubsetFamily::new(space, members.to_vec(), qi(0), qi(0));
    let c = crate::cover::check_family(&fam);
    (c.min_gap.map(|g| crate::rational::exact_ticks(g, space.unit()).unwrap()), c.gap_witness, c.disjoint)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub c_lambda: Q,
    pub c_r: Q,
    pub cert: CertConfig,
    /// Also certify the two-halves cover when the space has one.
    pub two_halves: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { c_lambda: qi(4), c_r: qi(8), cert: CertConfig::default(), two_halves: true }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyOutcome {
    pub family: usize,
    pub members: usize,
    pub contraction: Option<ContractionCertificate>,
    pub ladder: Vec<LadderRung>,
    pub categorical: Option<CategoricityReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwoHalvesOutcome {
    pub halves: Vec<CategoricityReport>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PipelineReport {
    pub space: String,
    pub schedule: Option<Schedule>,
    pub schedule_check: Option<ScheduleCheck>,
    pub redistribution: Option<Redistribution>,
    pub assembly: Option<AssemblyCertificate>,
    pub families: Vec<FamilyOutcome>,
    /// `number of families - 1` when every pipeline stage certified.
    pub pipeline_bound: Option<usize>,
    pub two_halves: Option<TwoHalvesOutcome>,
    /// Least certified bound.
    pub bound: Option<usize>,
    pub failures: Vec<StageFailure>,
}

impl PipelineReport {
    fn fail(&mut self, stage: &str, detail: impl Into<String>) {
        self.failures.push(StageFailure { stage: stage.into(), detail: detail.into() });
    }
}

fn profile_radii(schedule: &Schedule) -> Vec<Q> {
    let mut r: Vec<Q> = (0..=8).map(|k| schedule.interior_radius * q(k, 8)).collect();
    r.extend(schedule.radii.iter().copied().filter(|&x| x <= schedule.interior_radius));
    r.sort();
    r.dedup();
    r
}

/// Schedule, annuli, redistribution, assembly, contraction and categoricity
/// in order. Certificate failures are logged with their stage and the run
/// continues while the next stage still has input.
pub fn ccat_upper_bound(space: &Arc<Space>, cfg: &PipelineConfig) -> Result<PipelineReport> {
    ccat_upper_bound_along(space, &Ray::standard(space)?, cfg)
}

/// [`ccat_upper_bound`] with dispersed families pushed onto `ray`.
pub fn ccat_upper_bound_along(space: &Arc<Space>, ray: &Ray, cfg: &PipelineConfig) -> Result<PipelineReport> {
    if ray.space().signature() != space.signature() {
        return Err(Error::DomainMismatch("ray lives on a different space".into()));
    }
    let mut report = PipelineReport {
        space: space.label().to_string(),
        schedule: None,
        schedule_check: None,
        redistribution: None,
        assembly: None,
        families: Vec::new(),
        pipeline_bound: None,
        two_halves: None,
        bound: None,
        failures: Vec::new(),
    };
    if cfg.two_halves && (space.grid().is_some() || space.is_line()) {
        let halves = two_halves_witness(space, &cfg.cert)?;
        let passed = halves.iter().all(|h| h.report.passed);
        for h in halves.iter().filter(|h| !h.report.passed) {
            report.fail("two-halves", format!("{}: {}", h.report.ray, h.report.failures.join("; ")));
        }
        report.two_halves = Some(TwoHalvesOutcome { halves: halves.into_iter().map(|h| h.report).collect(), passed });
    }
    let run = pipeline_stages(space, ray, cfg, &mut report);
    if let Err(e) = run {
        match e {
            Error::DegenerateSchedule(_) | Error::Certification(_) | Error::NoPath { .. } => {
                report.fail("pipeline", e.to_string())
            }
            other => return Err(other),
        }
    }
    let halves_bound = report.two_halves.as_ref().filter(|t| t.passed).map(|_| 1);
    report.bound = match (report.pipeline_bound, halves_bound) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(report)
}

fn pipeline_stages(space: &Arc<Space>, ray: &Ray, cfg: &PipelineConfig, report: &mut PipelineReport) -> Result<()> {
    let (schedule, covers) = build_schedule(space, &asdim_witness, cfg.c_lambda, cfg.c_r)?;
    let check = check_schedule(&schedule);
    if let Some(w) = &check.witness {
        report.fail("schedule", w.clone());
    }
    report.schedule = Some(schedule.clone());
    report.schedule_check = Some(check);
    let c = annulus_families(space, &schedule, &covers);
    let (d, red) = redistribute(space, &c, &schedule)?;
    report.redistribution = Some(red);
    let (families, assembly) = assemble_and_certify(space, &d, &schedule);
    for (i, f) in assembly.families.iter().enumerate().filter(|(_, f)| !f.passed) {
        let why = if let Some(p) = &f.overlap {
            format!("members overlap at {p}")
        } else if !f.bounded {
            format!("diameter {} over bound {}", f.max_diam, f.diam_bound)
        } else {
            let l = f.ladder.iter().find(|l| !l.passed).unwrap();
            format!("level {} gap {:?} below {} at {:?}", l.level, l.min_gap, l.required, l.witness)
        };
        report.fail("assemble", format!("family {i}: {why}"));
    }
    if !assembly.interior_covered {
        report.fail("assemble", format!("interior points uncovered: {:?}", assembly.uncovered));
    }
    report.assembly = Some(assembly);
    let bicombing = geodesic_bicombing(space)?;
    let radii = profile_radii(&schedule);
    let mut all_passed = report.failures.iter().all(|f| f.stage == "two-halves");
    for (i, fam) in families.iter().enumerate() {
        let mut outcome =
            FamilyOutcome { family: i, members: fam.len(), contraction: None, ladder: vec![], categorical: None, passed: false };
        if fam.is_empty() {
            outcome.passed = true;
            report.families.push(outcome);
            continue;
        }
        let contraction = contract_family_to_points(fam, &bicombing, &radii, &cfg.cert)?;
        if !contraction.certificate.passed {
            let mut why = contraction.certificate.homotopy.failures.join("; ");
            if !contraction.certificate.dominated {
                why.push_str("; output dispersion below the input profile");
            }
            report.fail("contract", format!("family {i}: {why}"));
        }
        let points = contraction.points.clone();
        outcome.contraction = Some(contraction.certificate);
        let w = dispersed_categorical_witness(space, ray, &points, &cfg.cert);
        match w {
            Ok(w) => {
                if !w.report.passed {
                    report.fail("categorical", format!("family {i}: {}", w.report.failures.join("; ")));
                }
                outcome.ladder = w.ladder;
                outcome.categorical = Some(w.report);
            }
            Err(Error::NoPath { point, radius }) => report.fail(
                "categorical",
                format!("family {i}: no path from {} to {} avoiding B_p({radius})", space.point_name(point), ray.label()),
            ),
            Err(e) => return Err(e),
        }
        outcome.passed = outcome.contraction.as_ref().is_some_and(|c| c.passed)
            && outcome.categorical.as_ref().is_some_and(|c| c.passed);
        all_passed &= outcome.passed;
        report.families.push(outcome);
    }
    if all_passed {
        report.pipeline_bound = Some(families.len().saturating_sub(1));
    }
    Ok(())
}
