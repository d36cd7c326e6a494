//! Property tests for the invariants every module promises.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use coarsecat::combing::{
    geodesic_combing_tree, shrinking_homotopy, shrinking_map, staircase_rho, verify_combing, Combing,
};
use coarsecat::cover::{asdim_witness, multiplicity, saturation, verify_cover, SubsetFamily};
use coarsecat::cylinder::{top_slice, two_slice_homotopy, verify_homotopy, CylinderSample};
use coarsecat::dispersed::{audit_path, dispersion_profile, find_avoiding_paths};
use coarsecat::io::{from_json, to_json, CombingDoc, CoverDoc, MapDoc, SpaceDoc};
use coarsecat::maps::{closeness, estimate_control, CertConfig, MapSample};
use coarsecat::rational::{from_ticks, q, qi, Q};
use coarsecat::space::{
    annulus, ball, build_grid_space, build_half_line, build_sampled_line, build_tree_space, Domain, PointSubset, Ray,
    Space,
};
use coarsecat::upgrade::{measure_modulus, upgrade_proper_homotopy, Reparametrized, Stationary};

fn small_space() -> impl Strategy<Value = Arc<Space>> {
    prop_oneof![
        (1usize..=3, 1u32..=6).prop_map(|(d, r)| build_grid_space(d, r).unwrap()),
        (2usize..=3, 1u32..=4).prop_map(|(a, d)| build_tree_space(a, d).unwrap()),
        (1i64..=4, 1i64..=6).prop_map(|(k, r)| build_sampled_line(q(1, k), qi(r)).unwrap()),
        (1i64..=3, 1i64..=6).prop_map(|(k, r)| build_half_line(q(1, k), qi(r)).unwrap()),
    ]
}

fn random_map(space: &Arc<Space>, seed: u64) -> MapSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.len();
    let values = (0..n).map(|_| rng.gen_range(0..n) as u32).collect();
    MapSample::new(space.clone(), space, values, "random").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn triangle_inequality_on_random_triples(s in small_space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = s.len();
        for _ in 0..2000 {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            prop_assert!(s.dist_ticks(a, c) <= s.dist_ticks(a, b) + s.dist_ticks(b, c));
            prop_assert_eq!(s.dist_ticks(a, b), s.dist_ticks(b, a));
            prop_assert_eq!(s.dist_ticks(a, b) == 0, a == b);
        }
    }

    #[test]
    fn balls_at_the_extremes(s in small_space()) {
        let p = s.basepoint();
        prop_assert_eq!(ball(&s, p, s.r_max() + s.unit()).len(), s.len());
        prop_assert_eq!(ball(&s, p, qi(0)).len(), 0);
    }

    #[test]
    fn annulus_is_a_difference_of_balls(s in small_space(), a in 0i64..8, b in 0i64..8) {
        let (r, big) = (qi(a.min(b)), qi(a.max(b)));
        let p = s.basepoint();
        let ann = annulus(&s, r, big).unwrap();
        let diff = ball(&s, p, big).difference(&ball(&s, p, r));
        prop_assert_eq!(ann.members(), diff.members());
    }

    #[test]
    fn control_bounds_bracket_every_pair(s in small_space(), seed in any::<u64>()) {
        let f = random_map(&s, seed);
        let b = estimate_control(&f, &CertConfig::default()).unwrap();
        prop_assert!(b.is_exact());
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                let d = s.dist(i, j);
                let img = s.dist(f.values()[i] as usize, f.values()[j] as usize);
                prop_assert!(b.rho_upper_at(d) >= img);
                prop_assert!(b.rho_lower_at(d).unwrap() <= img);
            }
        }
    }

    #[test]
    fn closeness_is_a_pseudometric(s in small_space(), seeds in any::<[u64; 3]>()) {
        let [f, g, h] = seeds.map(|x| random_map(&s, x));
        let fg = closeness(&f, &g).unwrap();
        prop_assert_eq!(fg, closeness(&g, &f).unwrap());
        prop_assert_eq!(closeness(&f, &f).unwrap(), qi(0));
        prop_assert!(closeness(&f, &h).unwrap() <= fg + closeness(&g, &h).unwrap());
    }

    #[test]
    fn identity_control_is_the_identity(s in small_space()) {
        let b = estimate_control(&MapSample::identity(&s), &CertConfig::default()).unwrap();
        prop_assert_eq!(b.sample_grid(), b.rho_upper());
    }

    #[test]
    fn cylinder_slices_project_to_the_base(s in small_space(), k in 1i64..4) {
        let cyl = CylinderSample::over_norm(s.clone(), q(1, k)).unwrap();
        for x in 0..s.len() {
            prop_assert_eq!(cyl.locate(cyl.bottom(x)), (x, 0));
            prop_assert_eq!(cyl.locate(cyl.top(x)), (x, cyl.projection_ticks(x)));
        }
    }

    #[test]
    fn cylinder_metric_triangle(s in small_space(), seed in any::<u64>()) {
        let cyl = CylinderSample::over_norm(s.clone(), q(1, 2)).unwrap();
        let n = cyl.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2000 {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            prop_assert!(cyl.dist_ticks(a, c) <= cyl.dist_ticks(a, b) + cyl.dist_ticks(b, c));
        }
    }

    #[test]
    fn close_maps_are_homotopic(r in 40u32..80, m in 1i32..=3) {
        // g pulls every integer m steps toward 0, so d(f, g) = m.
        let s = build_grid_space(1, r).unwrap();
        let f = MapSample::identity(&s);
        let g = MapSample::from_fn(s.clone(), &s, "pull", |i| {
            let x = s.grid().unwrap().coords(i)[0];
            s.grid_point(&[x.signum() * (x.abs() - m).max(0)]).unwrap()
        }).unwrap();
        let big_m = closeness(&f, &g).unwrap();
        prop_assert_eq!(big_m, qi(m as i64));
        let h = two_slice_homotopy(&f, &g).unwrap();
        let cfg = CertConfig::default();
        let cert = verify_homotopy(&h, &f, &g, qi(0), &cfg).unwrap();
        prop_assert!(cert.passed, "{:?}", cert.failures);
        let (bf, bg) = (estimate_control(&f, &cfg).unwrap(), estimate_control(&g, &cfg).unwrap());
        let bh = &cert.control.bounds;
        for rr in bh.sample_grid() {
            prop_assert!(bh.rho_upper_at(rr) <= bf.rho_upper_at(rr).max(bg.rho_upper_at(rr)) + big_m);
        }
    }

    #[test]
    fn bundled_combings_are_valid_and_minimal(s in small_space(), pick in any::<prop::sample::Index>()) {
        let c = if s.tree().is_some() { geodesic_combing_tree(&s).unwrap() } else { Combing::geodesic(&s, s.basepoint()).unwrap() };
        let cert = verify_combing(&c, &CertConfig::default()).unwrap();
        prop_assert!(cert.passed);
        prop_assert_eq!(cert.axiom1_violations + cert.axiom2_violations + cert.minimality_violations, 0);
        let far: Vec<usize> = (0..s.len()).filter(|&x| c.length(x) > 0).collect();
        let x = far[pick.index(far.len())];
        let mut rows = c.rows();
        rows[x].pop();
        let shortened = Combing::from_table(&s, s.basepoint(), rows).unwrap();
        prop_assert!(!verify_combing(&shortened, &CertConfig::default()).unwrap().passed);
    }

    #[test]
    fn staircase_laws(steps in prop::collection::vec(0u64..3, 1..8), first in 1u64..4) {
        let mut l = vec![first];
        for s in steps {
            l.push(l.last().unwrap() + s);
        }
        let rho = staircase_rho(&l).unwrap();
        let end = *rho.breakpoints.last().unwrap() + 10;
        let mut prev = 0;
        for t in 0..=end {
            let v = rho.eval(t);
            prop_assert!(v <= t);
            prop_assert!(v >= prev);
            prev = v;
        }
        for (k, &b) in rho.breakpoints.iter().enumerate() {
            prop_assert_eq!(rho.eval(b), k as u64 + 1);
        }
    }

    #[test]
    fn shrinking_top_slice_is_sh(d in 1usize..=2, r in 2u32..=8, k in 1u64..=3) {
        let s = build_grid_space(d, r).unwrap();
        let c = Combing::geodesic(&s, s.basepoint()).unwrap();
        let rho = move |t: u64| t / (k + 1);
        let h = shrinking_homotopy(&c, &rho).unwrap();
        let (top, sh) = (top_slice(&h), shrinking_map(&c, &rho).unwrap());
        prop_assert_eq!(top.values(), sh.values());
    }

    #[test]
    fn stationary_upgrades_keep_unit_distances(r in 4u32..20) {
        let src = build_half_line(qi(1), qi(r as i64 - 1)).unwrap();
        let tgt = build_grid_space(2, r).unwrap();
        let f = MapSample::from_fn(src.clone(), &tgt, "x-axis", |s| tgt.grid_point(&[s as i32, 0]).unwrap()).unwrap();
        let h = Stationary::new(f, &src).unwrap();
        let m = measure_modulus(&Reparametrized::new(&h, 4).unwrap(), r as usize).unwrap();
        let c = Combing::geodesic(&src, src.basepoint()).unwrap();
        let up = upgrade_proper_homotopy(&h, &c, &m).unwrap();
        prop_assert!(up.claim.passed);
        prop_assert_eq!(up.claim.violations, 0);
    }

    #[test]
    fn saturation_is_monotone(lo in 0i32..20, len in 0i32..10, r1 in 0i64..15, r2 in 0i64..15, seed in any::<u64>()) {
        let s = build_grid_space(1, 60).unwrap();
        let pt = |v: i32| s.grid_point(&[v]).unwrap() as u32;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut members = Vec::new();
        let mut at = -60;
        while at < 55 {
            let w = rng.gen_range(0..4);
            members.push(PointSubset::new(&s, (at..=at + w).map(pt).collect()).unwrap());
            at += w + rng.gen_range(2..9);
        }
        let v = SubsetFamily::new(&s, members, qi(1), qi(4));
        let u = PointSubset::new(&s, (lo..=lo + len).map(pt).collect()).unwrap();
        let u_big = PointSubset::new(&s, (lo - 3..=lo + len).map(pt).collect()).unwrap();
        let (ra, rb) = (qi(r1.min(r2)), qi(r1.max(r2)));
        let small = saturation(&u, &v, ra);
        prop_assert!(u.members().iter().all(|&x| small.contains(x as usize)));
        let by_r = saturation(&u, &v, rb);
        prop_assert!(small.members().iter().all(|&x| by_r.contains(x as usize)));
        let by_u = saturation(&u_big, &v, ra);
        prop_assert!(small.members().iter().all(|&x| by_u.contains(x as usize)));
    }

    #[test]
    fn witness_multiplicity_is_at_most_the_family_count(kind in 0usize..3, r in 1i64..4) {
        let s = match kind {
            0 => build_grid_space(1, 80).unwrap(),
            1 => build_grid_space(2, 30).unwrap(),
            _ => build_tree_space(2, 9).unwrap(),
        };
        let w = asdim_witness(&s, qi(r)).unwrap();
        let cert = verify_cover(&w);
        prop_assert!(cert.passed);
        prop_assert!(multiplicity(&w.all_members()) <= w.families.len());
    }

    #[test]
    fn dispersion_profile_is_the_definitional_minimum(pts in prop::collection::btree_set(-200i32..=200, 0..12), radii in prop::collection::vec(0i64..220, 1..6)) {
        let s = build_grid_space(1, 200).unwrap();
        let u = PointSubset::new(&s, pts.iter().map(|&v| s.grid_point(&[v]).unwrap() as u32).collect()).unwrap();
        let radii: Vec<Q> = radii.into_iter().map(qi).collect();
        let p = dispersion_profile(&u, &radii);
        for (i, &r) in radii.iter().enumerate() {
            let outside: Vec<i32> = pts.iter().copied().filter(|v| qi(v.abs() as i64) >= r).collect();
            let mut best = None::<i64>;
            for a in 0..outside.len() {
                for b in a + 1..outside.len() {
                    let d = (outside[a] - outside[b]).abs() as i64;
                    best = Some(best.map_or(d, |x| x.min(d)));
                }
            }
            prop_assert_eq!(p.values[i], best.map(qi));
        }
    }

    #[test]
    fn avoiding_paths_satisfy_the_path_conditions(r in 10u32..30, radius in 1i64..8, seed in any::<u64>()) {
        let s = build_grid_space(2, r).unwrap();
        let ray = Ray::grid_axis(&s, 0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<u32> = (0..10).map(|_| rng.gen_range(0..s.len()) as u32).collect();
        let a = PointSubset::new(&s, pts).unwrap();
        let paths = find_avoiding_paths(&s, &ray, &a, qi(radius)).unwrap();
        for &x in a.members() {
            let x = x as usize;
            if s.norm(x) < qi(radius) {
                continue;
            }
            let rec = paths.path(x).unwrap();
            let audit = audit_path(&s, &ray, qi(radius), &rec);
            prop_assert!(audit.starts_at_x && audit.ends_on_ray && audit.unit_steps && audit.avoids_ball);
            prop_assert_eq!(audit.length_bound, !paths.rejected.contains(&x));
        }
    }

    #[test]
    fn json_documents_round_trip(s in small_space(), seed in any::<u64>()) {
        let doc = SpaceDoc::from_space(&s);
        let text = to_json(&doc).unwrap();
        let back: SpaceDoc = from_json(&text, SpaceDoc::SCHEMA).unwrap();
        prop_assert_eq!(&back, &doc);
        let s2 = back.to_space().unwrap();
        prop_assert_eq!(s2.signature(), s.signature());

        let f = random_map(&s, seed);
        let md = MapDoc::from_map(&f, &s);
        let back: MapDoc = from_json(&to_json(&md).unwrap(), MapDoc::SCHEMA).unwrap();
        let g = back.to_map(&s2, &s2).unwrap();
        prop_assert_eq!(g.values(), f.values());

        let c = Combing::geodesic(&s, s.basepoint()).or_else(|_| geodesic_combing_tree(&s)).unwrap();
        let mut rows = c.rows();
        let x = seed as usize % s.len();
        let end = *rows[x].last().unwrap();
        rows[x].push(end);
        let table = Combing::from_table(&s, s.basepoint(), rows).unwrap();
        let cd = CombingDoc::from_combing(&table, false);
        let back: CombingDoc = from_json(&to_json(&cd).unwrap(), CombingDoc::SCHEMA).unwrap();
        prop_assert_eq!(back.to_combing(&s2).unwrap().rows(), table.rows());
        prop_assert_eq!(to_json(&back).unwrap(), to_json(&cd).unwrap());
    }
}

#[test]
fn hundred_thousand_triples_per_generator() {
    let spaces = [
        build_grid_space(2, 40).unwrap(),
        build_grid_space(3, 12).unwrap(),
        build_tree_space(2, 10).unwrap(),
        build_tree_space(3, 6).unwrap(),
        build_sampled_line(q(1, 4), qi(50)).unwrap(),
        build_half_line(q(1, 2), qi(50)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in spaces {
        let n = s.len();
        let bad = (0..100_000)
            .filter(|_| {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                s.dist_ticks(a, c) > s.dist_ticks(a, b) + s.dist_ticks(b, c)
            })
            .count();
        assert_eq!(bad, 0, "{}", s.label());
    }
}

#[test]
fn cover_documents_round_trip() {
    let s = build_tree_space(2, 8).unwrap();
    let w = asdim_witness(&s, qi(2)).unwrap();
    let doc = CoverDoc::from_cover(&w);
    let back: CoverDoc = from_json(&to_json(&doc).unwrap(), CoverDoc::SCHEMA).unwrap();
    assert_eq!(back, doc);
    let w2 = back.to_cover(&s).unwrap();
    assert!(verify_cover(&w2).passed);
    assert_eq!(from_ticks(1, s.unit()), qi(1));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    // Checked from coordinates alone: every interior integer lies in some
    // member, members of a family are disjoint, and members meeting the
    // `j`-th annulus sit at least `λ_{j-1}` apart.
    #[test]
    fn assembled_families_cover_and_keep_their_ladder_gaps(r in 8000u32..=20000, c_lambda in 3i64..=5) {
        use coarsecat::pipeline::{annulus_families, assemble_and_certify, build_schedule, redistribute};
        let s = build_grid_space(1, r).unwrap();
        let (sched, covers) = build_schedule(&s, &asdim_witness, qi(c_lambda), qi(8)).unwrap();
        let c = annulus_families(&s, &sched, &covers);
        let (d, _) = redistribute(&s, &c, &sched).unwrap();
        let (families, cert) = assemble_and_certify(&s, &d, &sched);
        prop_assert!(cert.passed);
        let coord = |x: u32| s.grid().unwrap().coords(x as usize)[0] as i64;
        let interior = sched.interior_radius;
        let mut seen = std::collections::HashSet::new();
        for fam in &families {
            let mut owned: Vec<(i64, usize)> = Vec::new();
            for (k, m) in fam.members.iter().enumerate() {
                owned.extend(m.members().iter().map(|&x| (coord(x), k)));
            }
            owned.sort();
            prop_assert!(owned.windows(2).all(|w| w[0].0 != w[1].0));
            seen.extend(owned.iter().map(|&(v, _)| v));
            for j in 2..=sched.levels() {
                let (lo, hi) = (sched.radius(j - 1), sched.radius(j));
                let meets: Vec<bool> = fam.members.iter().map(|m| {
                    m.members().iter().any(|&x| { let n = qi(coord(x).abs()); n >= lo && n < hi })
                }).collect();
                let pts: Vec<&(i64, usize)> = owned.iter().filter(|p| meets[p.1]).collect();
                for w in pts.windows(2) {
                    if w[0].1 != w[1].1 {
                        prop_assert!(qi(w[1].0 - w[0].0) >= sched.scale(j - 1));
                    }
                }
            }
        }
        for v in -(r as i64)..=(r as i64) {
            if qi(v.abs()) <= interior {
                prop_assert!(seen.contains(&v), "{v} uncovered");
            }
        }
    }
}
