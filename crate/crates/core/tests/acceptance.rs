//! The ten acceptance criteria, one PASS/FAIL line each.
//!
//! Two criteria cannot pass at desk scale and are reported as FAIL. For
//! those the run instead checks that the recorded failure witnesses are
//! still the ones analysed (see the README); any other outcome, including an
//! unexpected pass, makes the target exit nonzero so the analysis gets
//! revisited.

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use coarsecat::combing::{
    geodesic_bicombing_grid, shrinking_homotopy, shrinking_map, verify_bicombing, verify_combing, Combing,
};
use coarsecat::cover::{grid_asdim_witness, tree_asdim_witness, verify_cover, Construction, SubsetFamily, WitnessCover};
use coarsecat::cylinder::verify_homotopy;
use coarsecat::dispersed::find_avoiding_paths;
use coarsecat::maps::{certify_control, check_coarse_equivalence, CertConfig, MapSample};
use coarsecat::pipeline::{ccat_upper_bound, PipelineConfig, PipelineReport};
use coarsecat::rational::{exact_ticks, q, qi};
use coarsecat::space::{build_grid_space, build_sampled_line, build_tree_space, Domain, PointSubset, Ray, Space};
use coarsecat::upgrade::{measure_modulus, upgrade_proper_homotopy, ProperHomotopy, Reparametrized, Rotation};
use coarsecat::Error;

enum Verdict {
    Pass(String),
    /// Fails as analysed; the witnesses matched the recorded analysis.
    KnownFail(String),
    Fail(String),
}

type Outcome = coarsecat::Result<Verdict>;

fn pass_if(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn cfg() -> CertConfig {
    CertConfig::default()
}

fn floor_pair() -> coarsecat::Result<(MapSample, MapSample)> {
    let line = build_sampled_line(q(1, 2), qi(100))?;
    let ints = build_grid_space(1, 100)?;
    Ok((MapSample::floor_map(&line, &ints)?, MapSample::integer_inclusion(&ints, &line)?))
}

fn criterion_1() -> Outcome {
    let (f, g) = floor_pair()?;
    let cert = check_coarse_equivalence(&f, &g, qi(1), &cfg())?;
    let ok = cert.passed && cert.closeness_gf == q(1, 2);
    Ok(pass_if(ok, format!("floor/inclusion equivalence {}, d(g∘f, id) = {}", cert.passed, cert.closeness_gf)))
}

fn criterion_2() -> Outcome {
    let (f, _) = floor_pair()?;
    let cert = certify_control(&f, &cfg())?;
    let b = &cert.bounds;
    let line = f.source().clone();
    let ints = f.target_space().clone();
    // Naive double loop: every pair must sit inside the bracket at its distance.
    let mut outside = 0u64;
    for i in 0..line.len() {
        for j in i + 1..line.len() {
            let d = coarsecat::rational::from_ticks(line.dist_ticks(i, j), line.unit());
            let img = ints.dist(f.values()[i] as usize, f.values()[j] as usize);
            if img > b.rho_upper_at(d) || b.rho_lower_at(d).is_none_or(|l| img < l) {
                outside += 1;
            }
        }
    }
    let within = b
        .sample_grid()
        .into_iter()
        .zip(b.rho_upper().into_iter().zip(b.rho_lower()))
        .all(|(r, (u, l))| u <= r + qi(1) && l >= r - qi(1));
    Ok(pass_if(
        within && outside == 0 && b.is_exact(),
        format!("{} sampled radii within r ± 1, {} pairs re-scanned, {outside} outside the bracket", b.grid_ticks.len(), b.pairs_scanned),
    ))
}

fn criterion_3() -> Outcome {
    let s = build_grid_space(2, 30)?;
    let b = geodesic_bicombing_grid(&s)?;
    let cert = verify_bicombing(&b, &cfg())?;
    let base = verify_combing(&b.slice(s.basepoint()), &cfg())?;
    let v = cert.axiom_violations + base.axiom1_violations + base.axiom2_violations + base.minimality_violations;
    Ok(pass_if(
        cert.passed && v == 0 && cert.slice_rho_upper_1 <= qi(3),
        format!("{} triples, {v} violations, rho_upper(1) = {}", cert.triples_checked, cert.slice_rho_upper_1),
    ))
}

fn criterion_4() -> Outcome {
    let s = build_grid_space(2, 20)?;
    let c = Combing::geodesic(&s, s.basepoint())?;
    let rho = |t: u64| t / 2;
    let h = shrinking_homotopy(&c, &rho)?;
    let cert = verify_homotopy(&h, &MapSample::identity(&s), &shrinking_map(&c, &rho)?, qi(0), &cfg())?;
    Ok(pass_if(
        cert.passed && cert.control.controlled,
        format!("{} cylinder points, endpoints exact, rho_upper(R_int) = {}", cert.cylinder_points, cert.control.upper_at_interior),
    ))
}

fn criterion_5() -> Outcome {
    let rot = Rotation::new(60)?;
    let m = measure_modulus(&Reparametrized::new(&rot, 4)?, 60)?;
    let combing = Combing::geodesic(rot.source(), rot.source().basepoint())?;
    let up = upgrade_proper_homotopy(&rot, &combing, &m)?;
    let c = &up.claim;
    let detail = format!(
        "{} pairs, {} violations ({} within a level, {} across a step of rho), max image distance {}",
        c.pairs_scanned, c.violations, c.violations_same_level, c.violations_across_step, c.max_image_distance
    );
    if c.passed {
        return Ok(Verdict::Pass(detail));
    }
    // Recorded analysis: the violations come from the lattice rotation
    // itself, where consecutive staircase times meet a step of rho and the
    // image jumps by 2; they are not scan artefacts.
    let as_analysed = c.violations > 0
        && c.violations_across_step > c.violations_same_level
        && c.max_image_distance == qi(2)
        && !c.witnesses.is_empty();
    Ok(if as_analysed { Verdict::KnownFail(detail) } else { Verdict::Fail(detail) })
}

fn independent_gaps(w: &WitnessCover) -> (bool, bool, bool) {
    let s = &w.space;
    let r = exact_ticks(w.scale_r, s.unit()).unwrap();
    let mut covered = vec![false; s.len()];
    let mut gaps_ok = true;
    let mut bounded = true;
    for f in &w.families {
        let mut owner = vec![usize::MAX; s.len()];
        for (k, m) in f.members.iter().enumerate() {
            for &x in m.members() {
                owner[x as usize] = k;
                covered[x as usize] = true;
            }
            bounded &= m.diameter() <= f.diam_bound;
        }
        // Multi-source BFS to depth r from every member at once; two labels meeting means a gap <= r.
        let mut label = owner.clone();
        let mut depth = vec![u64::MAX; s.len()];
        let mut queue: VecDeque<usize> = (0..s.len()).filter(|&x| owner[x] != usize::MAX).collect();
        for &x in &queue {
            depth[x] = 0;
        }
        let mut nb = Vec::new();
        while let Some(x) = queue.pop_front() {
            nb.clear();
            s.neighbors(x, &mut nb);
            for &y in &nb {
                if label[y] != usize::MAX && label[y] != label[x] && depth[x] + depth[y] < r {
                    gaps_ok = false;
                }
                if depth[y] == u64::MAX && depth[x] < r {
                    depth[y] = depth[x] + 1;
                    label[y] = label[x];
                    queue.push_back(y);
                }
            }
        }
    }
    (gaps_ok, covered.iter().all(|&c| c), bounded)
}

fn criterion_6() -> Outcome {
    let g = build_grid_space(2, 300)?;
    let gw = grid_asdim_witness(&g, qi(5))?;
    let (gaps, covers, bounded) = independent_gaps(&gw);
    let grid_ok = gw.families.len() == 3 && gaps && covers && bounded && verify_cover(&gw).passed;
    let t = build_tree_space(2, 12)?;
    let tw = tree_asdim_witness(&t, qi(2))?;
    let (tg, tc, tb) = independent_gaps(&tw);
    let tree_ok = tw.families.len() == 2 && tg && tc && tb && verify_cover(&tw).passed;
    Ok(pass_if(
        grid_ok && tree_ok,
        format!(
            "grid(2,300) r=5: {} families re-certified {grid_ok}; tree(2,12) r=2: {} families re-certified {tree_ok}",
            gw.families.len(),
            tw.families.len()
        ),
    ))
}

fn family_sizes(r: &PipelineReport) -> Vec<usize> {
    r.assembly.as_ref().map(|a| a.families.iter().map(|f| f.members).collect()).unwrap_or_default()
}

fn criterion_7(z: &PipelineReport) -> Outcome {
    let z_ok = family_sizes(z).len() == 2 && z.assembly.as_ref().is_some_and(|a| a.passed) && z.bound == Some(1);
    let plane = build_grid_space(2, 2000)?;
    let p = ccat_upper_bound(&plane, &PipelineConfig::default())?;
    let p_assembled = family_sizes(&p).len() == 3 && p.assembly.as_ref().is_some_and(|a| a.passed);
    let halves = p.two_halves.as_ref().is_some_and(|t| t.passed);
    let detail = format!(
        "grid(1,1e5): families {:?}, bound {:?}; grid(2,2000): families {:?} certified {p_assembled}, pipeline bound {:?}, two halves {halves}, bound {:?}",
        family_sizes(z),
        z.bound,
        family_sizes(&p),
        p.pipeline_bound,
        p.bound
    );
    if z_ok && p_assembled && halves && p.pipeline_bound == Some(2) {
        return Ok(Verdict::Pass(detail));
    }
    // Recorded analysis: at radius 2000 the second scale exceeds the interior
    // radius, so redistribution hands the whole first level, origin included,
    // to level-2 members; contracting such a member to its least-norm point
    // is then not proper. Only families 1 and 2 fail, and only there.
    let s = p.schedule.as_ref();
    let lambda_past_interior = s.is_some_and(|s| s.scales.len() >= 2 && s.scales[1] > s.interior_radius);
    let contract_only = !p.failures.is_empty()
        && p.failures.iter().all(|f| f.stage == "contract")
        && p.failures.iter().any(|f| f.detail.starts_with("family 1"))
        && p.failures.iter().any(|f| f.detail.starts_with("family 2"));
    let as_analysed = z_ok && p_assembled && halves && p.bound == Some(1) && lambda_past_interior && contract_only;
    Ok(if as_analysed { Verdict::KnownFail(detail) } else { Verdict::Fail(detail) })
}

fn brute_reaches(s: &Space, ray: &Ray, x: usize, r: u64) -> bool {
    let mut seen = vec![false; s.len()];
    let mut queue = VecDeque::from([x]);
    seen[x] = true;
    let mut nb = Vec::new();
    while let Some(y) = queue.pop_front() {
        if ray.parameter_of(y).is_some() {
            return true;
        }
        nb.clear();
        s.neighbors(y, &mut nb);
        for &z in &nb {
            if !seen[z] && s.norm_ticks(z) >= r {
                seen[z] = true;
                queue.push_back(z);
            }
        }
    }
    false
}

fn criterion_8() -> Outcome {
    let t = build_tree_space(2, 12)?;
    let left = Ray::tree_branch(&t, 0)?;
    let right = Ray::tree_branch(&t, 1)?;
    let mut no_path = 0;
    let mut false_paths = 0;
    let mut tried = 0;
    for k in 1..right.len() {
        let x = right.point(k);
        let a = PointSubset::new(&t, vec![x as u32])?;
        for r in 1..=k as i64 {
            tried += 1;
            match find_avoiding_paths(&t, &left, &a, qi(r)) {
                Err(Error::NoPath { .. }) => no_path += 1,
                Ok(_) => {}
                Err(e) => return Err(e),
            }
            if brute_reaches(&t, &left, x, r as u64) {
                false_paths += 1;
            }
        }
    }
    Ok(pass_if(
        no_path == tried && false_paths == 0,
        format!("{no_path}/{tried} (point, R) pairs give NoPath, exhaustive search finds {false_paths} paths"),
    ))
}

fn criterion_9(z: &PipelineReport) -> Outcome {
    let line = build_sampled_line(q(1, 2), qi(10_000))?;
    let l = ccat_upper_bound(&line, &PipelineConfig::default())?;
    Ok(pass_if(
        z.bound == Some(1) && l.bound == Some(1),
        format!("grid(1,1e5) bound {:?}, line(1/2,1e4) bound {:?}", z.bound, l.bound),
    ))
}

fn criterion_10() -> Outcome {
    // A cover with the origin removed from every member.
    let s = build_grid_space(2, 60)?;
    let w = grid_asdim_witness(&s, qi(3))?;
    let origin = s.basepoint();
    let families = w
        .families
        .iter()
        .map(|f| {
            let members = f.members.iter().map(|m| m.filter(|x| x != origin)).collect();
            SubsetFamily::new(&s, members, f.scale_r, f.diam_bound)
        })
        .collect();
    let holed = WitnessCover { space: s.clone(), scale_r: w.scale_r, families, construction: Construction::Given, covers: false };
    let cover = verify_cover(&holed);
    let cover_caught = !cover.passed && cover.uncovered.contains(&origin);

    // c_lambda = 1 leaves consecutive scales too close to separate the ladder.
    let z = build_grid_space(1, 3000)?;
    let loose = PipelineConfig { c_lambda: qi(1), two_halves: false, ..PipelineConfig::default() };
    let sched_report = ccat_upper_bound(&z, &loose)?;
    let sched_caught = sched_report.bound.is_none() && !sched_report.failures.is_empty();
    let sched_witness = sched_report.failures.first().map(|f| format!("{}: {}", f.stage, f.detail)).unwrap_or_default();

    // A combing whose path to (5,5) does not start at the basepoint.
    let g = build_grid_space(2, 10)?;
    let c = Combing::geodesic(&g, g.basepoint())?;
    let x = g.grid_point(&[5, 5]).unwrap();
    let broken = c.with_entry(x, 0, g.grid_point(&[1, 0]).unwrap());
    let cc = verify_combing(&broken, &cfg())?;
    let combing_caught = !cc.passed && !cc.witnesses.is_empty();

    let ok = cover_caught && sched_caught && combing_caught;
    Ok(pass_if(
        ok,
        format!(
            "cover: uncovered {:?}; schedule: {}; combing: {}",
            cover.uncovered.iter().map(|&x| s.point_name(x)).collect::<Vec<_>>(),
            truncate(&sched_witness, 120),
            cc.witnesses.first().map(|v| format!("{} at {} n={}", v.axiom, v.point, v.n)).unwrap_or_default()
        ),
    ))
}

fn truncate(s: &str, n: usize) -> String {
    if s.chars().count() <= n {
        s.to_string()
    } else {
        format!("{}…", s.chars().take(n).collect::<String>())
    }
}

fn report(n: usize, budget: Duration, start: Instant, outcome: Outcome) -> bool {
    let took = start.elapsed();
    let time = format!("{:.1}s of {}s", took.as_secs_f64(), budget.as_secs());
    let slow = took > budget;
    let (line, ok) = match outcome {
        Ok(Verdict::Pass(d)) if !slow => (format!("PASS criterion {n}: {d} [{time}]"), true),
        Ok(Verdict::Pass(d)) => (format!("FAIL criterion {n}: over time budget; {d} [{time}]"), false),
        Ok(Verdict::KnownFail(d)) => (format!("FAIL criterion {n}: {d} (failure as analysed) [{time}]"), true),
        Ok(Verdict::Fail(d)) => (format!("FAIL criterion {n}: {d} [{time}]"), false),
        Err(e) => (format!("FAIL criterion {n}: error {e} [{time}]"), false),
    };
    println!("{line}");
    ok
}

/// `COARSECAT_CRITERIA=3,6` runs a subset; the default is all ten.
fn selected() -> Vec<usize> {
    match std::env::var("COARSECAT_CRITERIA") {
        Ok(v) if !v.trim().is_empty() => v.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        _ => (1..=10).collect(),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let want = selected();
    let mut all = true;
    // The grid(1,1e5) pipeline run is shared by criteria 7 and 9; both are charged for it.
    let mut z: Option<(coarsecat::Result<PipelineReport>, Duration)> = None;
    for n in want {
        let start = Instant::now();
        let (budget, outcome) = match n {
            1 => (5, criterion_1()),
            2 => (30, criterion_2()),
            3 => (60, criterion_3()),
            4 => (30, criterion_4()),
            5 => (120, criterion_5()),
            6 => (120, criterion_6()),
            8 => (10, criterion_8()),
            10 => (30, criterion_10()),
            7 | 9 => {
                let (run, took) = z.get_or_insert_with(|| {
                    let t = Instant::now();
                    let r = build_grid_space(1, 100_000).and_then(|s| ccat_upper_bound(&s, &PipelineConfig::default()));
                    (r, t.elapsed())
                });
                let start = Instant::now().checked_sub(*took).unwrap_or(start);
                let outcome = match run {
                    Ok(r) if n == 7 => criterion_7(r),
                    Ok(r) => criterion_9(r),
                    Err(e) => Err(Error::Certification(format!("grid(1,1e5) pipeline: {e}"))),
                };
                all &= report(n, secs(if n == 7 { 600 } else { 300 }), start, outcome);
                continue;
            }
            _ => continue,
        };
        all &= report(n, secs(budget), start, outcome);
    }
    if !all {
        std::process::exit(1);
    }
}
