//! Worked values, each recomputed by an independent brute-force loop and
//! frozen against the library's answer.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use coarsecat::combing::{
    geodesic_bicombing, geodesic_bicombing_grid, geodesic_combing_tree, shrinking_homotopy, shrinking_map,
    staircase_rho, verify_bicombing, verify_combing, Combing,
};
use coarsecat::cover::{
    check_family, grid_asdim_witness, multiplicity, saturation, tree_asdim_witness, verify_cover, Construction,
    SubsetFamily,
};
use coarsecat::cylinder::{verify_homotopy, CylinderMap, CylinderSample, FnHomotopy, OnCylinder};
use coarsecat::dispersed::{
    audit_path, contract_family_to_points, dispersed_categorical_witness, dispersion_profile,
    family_dispersion_profile, find_avoiding_paths,
};
use coarsecat::maps::{
    check_coarse_equivalence, check_proper, closeness, default_proper_threshold, estimate_control, CertConfig,
    MapSample,
};
use coarsecat::pipeline::build_schedule;
use coarsecat::rational::{q, qi, Q};
use coarsecat::space::{
    annulus, build_grid_space, build_sampled_line, build_tree_space, Domain, PointSubset, Ray, Space,
};
use coarsecat::upgrade::{measure_modulus, Reparametrized, Rotation};
use coarsecat::Error;

fn cfg() -> CertConfig {
    CertConfig::default()
}

fn ints(s: &Arc<Space>, vals: impl IntoIterator<Item = i32>) -> PointSubset {
    PointSubset::new(s, vals.into_iter().map(|v| s.grid_point(&[v]).unwrap() as u32).collect()).unwrap()
}

fn coords(s: &Space, x: usize) -> Vec<i32> {
    s.grid().unwrap().coords(x).to_vec()
}

#[test]
fn point_counts() {
    let brute_grid = (-2i32..=2).flat_map(|x| (-2i32..=2).map(move |y| (x, y))).filter(|(x, y)| x.abs() + y.abs() <= 2).count();
    assert_eq!(brute_grid, 13);
    assert_eq!(build_grid_space(2, 2).unwrap().len(), 13);

    let brute_tree: usize = (0..=2).map(|d| 3usize.pow(d)).sum();
    assert_eq!(brute_tree, 13);
    assert_eq!(build_tree_space(3, 2).unwrap().len(), 13);

    let brute_line = (-8i32..=8).filter(|k| (*k as f64 * 0.25).abs() <= 2.0).count();
    assert_eq!(brute_line, 17);
    assert_eq!(build_sampled_line(q(1, 4), qi(2)).unwrap().len(), 17);
}

#[test]
fn annulus_and_norm() {
    let s = build_grid_space(1, 5).unwrap();
    let got: Vec<i32> = annulus(&s, qi(1), qi(3)).unwrap().members().iter().map(|&x| coords(&s, x as usize)[0]).collect();
    let mut want: Vec<i32> = (-5..=5).filter(|v: &i32| (1..3).contains(&v.abs())).collect();
    let mut got_sorted = got.clone();
    got_sorted.sort();
    want.sort();
    assert_eq!(got_sorted, vec![-2, -1, 1, 2]);
    assert_eq!(got_sorted, want);

    let p = build_grid_space(2, 5).unwrap();
    assert_eq!(p.norm(p.grid_point(&[3, 1]).unwrap()), qi(4));
}

#[test]
fn floor_map_control_matches_a_naive_double_loop() {
    let line = build_sampled_line(q(1, 2), qi(100)).unwrap();
    let z = build_grid_space(1, 100).unwrap();
    let f = MapSample::floor_map(&line, &z).unwrap();
    let b = estimate_control(&f, &cfg()).unwrap();
    assert!(b.is_exact());

    // Per source distance: largest and least image distance.
    let mut hi: HashMap<Q, Q> = HashMap::new();
    let mut lo: HashMap<Q, Q> = HashMap::new();
    for i in 0..line.len() {
        for j in i + 1..line.len() {
            let d = line.dist(i, j);
            let img = z.dist(f.values()[i] as usize, f.values()[j] as usize);
            let e = hi.entry(d).or_insert(img);
            *e = (*e).max(img);
            let e = lo.entry(d).or_insert(img);
            *e = (*e).min(img);
        }
    }
    let mut ds: Vec<Q> = hi.keys().copied().collect();
    ds.sort();
    let mut run = qi(0);
    for &d in &ds {
        run = run.max(hi[&d]);
        assert_eq!(b.rho_upper_at(d), run, "upper at {d}");
        assert!(run <= d + qi(1));
    }
    let mut run = None::<Q>;
    for &d in ds.iter().rev() {
        run = Some(run.map_or(lo[&d], |r: Q| r.min(lo[&d])));
        assert_eq!(b.rho_lower_at(d), run, "lower at {d}");
        assert!(run.unwrap() >= d - qi(1));
    }
}

#[test]
fn floor_map_is_proper_with_envelope_at_least_n_minus_one() {
    let line = build_sampled_line(q(1, 2), qi(100)).unwrap();
    let z = build_grid_space(1, 100).unwrap();
    let f = MapSample::floor_map(&line, &z).unwrap();
    let p = check_proper(&f, qi(50), &cfg());
    assert!(p.passed);
    for row in &p.lower_envelope {
        let brute = (0..line.len())
            .filter(|&x| line.norm(x) >= row.shell_start && line.norm(x) < row.shell_start + p.shell_width)
            .map(|x| z.norm(f.values()[x] as usize))
            .min()
            .unwrap();
        assert_eq!(row.raw, brute);
        assert!(row.raw >= row.shell_start - qi(1));
    }
}

#[test]
fn closeness_values() {
    let line = build_sampled_line(q(1, 2), qi(100)).unwrap();
    let z = build_grid_space(1, 100).unwrap();
    let gf = MapSample::floor_map(&line, &z).unwrap().then(&MapSample::integer_inclusion(&z, &line).unwrap()).unwrap();
    let brute = (0..line.len()).map(|x| {
        let v = line.line_value(x).unwrap();
        v - v.floor()
    }).max().unwrap();
    assert_eq!(brute, q(1, 2));
    assert_eq!(closeness(&gf, &MapSample::identity(&line)).unwrap(), q(1, 2));

    let s = build_grid_space(1, 50).unwrap();
    let c = MapSample::constant(s.clone(), &s, s.basepoint());
    assert_eq!(closeness(&c.then(&c).unwrap(), &MapSample::identity(&s)).unwrap(), qi(50));
    let cert = check_coarse_equivalence(&c, &c, qi(5), &cfg()).unwrap();
    assert!(!cert.passed);
    assert!(!cert.failures.is_empty());
}

#[test]
fn norm_cylinder_over_grid_1_3_has_19_points() {
    // x in -3..=3 contributes |x| + 1 times.
    let brute: usize = (-3i32..=3).map(|x| x.unsigned_abs() as usize + 1).sum();
    assert_eq!(brute, 19);
    let s = build_grid_space(1, 3).unwrap();
    assert_eq!(CylinderSample::over_norm(s, qi(1)).unwrap().len(), 19);
}

#[test]
fn collapse_to_the_basepoint_is_not_proper() {
    let s = build_grid_space(2, 50).unwrap();
    let p = s.basepoint();
    let h = FnHomotopy { cylinder: CylinderSample::over_norm(s.clone(), qi(1)).unwrap(), target: s.clone(), label: "collapse".into(), f: move |_, _| p };
    let threshold = default_proper_threshold(h.cylinder(), &cfg());
    let cert = check_proper(&OnCylinder(&h), threshold, &cfg());
    assert!(!cert.passed);
    assert!(cert.lower_envelope.iter().all(|r| r.raw == qi(0)));
    assert!(cert.witness.is_some());
}

#[test]
fn lattice_combing_values() {
    let s = build_grid_space(2, 8).unwrap();
    let c = Combing::geodesic(&s, s.basepoint()).unwrap();
    let x = s.grid_point(&[3, 4]).unwrap();
    assert_eq!(coords(&s, c.at(x, 3)), vec![3, 0]);
    assert_eq!(c.length(x), 7);
    for y in 0..s.len() {
        let brute: i32 = coords(&s, y).iter().map(|v| v.abs()).sum();
        assert_eq!(c.length(y), brute as u64);
    }
}

#[test]
fn tree_combing_follows_ancestors() {
    let s = build_tree_space(2, 8).unwrap();
    let c = geodesic_combing_tree(&s).unwrap();
    let t = s.tree().unwrap();
    for x in 0..s.len() {
        let mut depth = 0;
        let mut y = x;
        while let Some(p) = t.parent(y) {
            y = p;
            depth += 1;
        }
        assert_eq!(c.length(x), depth);
    }
    let cert = verify_combing(&c, &cfg()).unwrap();
    assert!(cert.passed);
    assert!(cert.rho_upper_1 <= qi(3));
}

#[test]
fn bicombing_fellow_travels_on_a_small_grid() {
    let s = build_grid_space(2, 6).unwrap();
    let b = geodesic_bicombing_grid(&s).unwrap();
    let mut worst = 0u64;
    for qp in 0..s.len() {
        for x in 0..s.len() {
            for y in 0..s.len() {
                if s.dist_ticks(x, y) > 1 {
                    continue;
                }
                for n in 0..=24u64 {
                    for m in n.saturating_sub(1)..=n + 1 {
                        worst = worst.max(s.dist_ticks(b.at(qp, x, n), b.at(qp, y, m)));
                    }
                }
            }
        }
    }
    let cert = verify_bicombing(&b, &cfg()).unwrap();
    assert_eq!(cert.axiom_violations, 0);
    assert_eq!(cert.slice_rho_upper_1, qi(worst as i64));
    assert_eq!(worst, 3);

    let ten = build_grid_space(2, 10).unwrap();
    let cert = verify_bicombing(&geodesic_bicombing_grid(&ten).unwrap(), &cfg()).unwrap();
    assert!(cert.passed);
    assert!(cert.combined_rho_upper_1 <= qi(4));
}

#[test]
fn shrinking_values() {
    let rho = |t: u64| t / 2;
    let s = build_grid_space(2, 10).unwrap();
    let c = Combing::geodesic(&s, s.basepoint()).unwrap();
    let sh = shrinking_map(&c, &rho).unwrap();
    assert_eq!(coords(&s, sh.values()[s.grid_point(&[3, 4]).unwrap()] as usize), vec![3, 0]);

    let line = build_grid_space(1, 20).unwrap();
    let c = Combing::geodesic(&line, line.basepoint()).unwrap();
    let h = shrinking_homotopy(&c, &rho).unwrap();
    assert_eq!(coords(&line, h.eval(line.grid_point(&[10]).unwrap(), 3)), vec![7]);

    let s = build_grid_space(2, 15).unwrap();
    let c = Combing::geodesic(&s, s.basepoint()).unwrap();
    let h = shrinking_homotopy(&c, &rho).unwrap();
    let sh = shrinking_map(&c, &rho).unwrap();
    assert!(verify_homotopy(&h, &MapSample::identity(&s), &sh, qi(0), &cfg()).unwrap().passed);
}

#[test]
fn staircase_breakpoints() {
    let r = staircase_rho(&[2, 3, 4]).unwrap();
    let brute: Vec<u64> = (1..=3u64).map(|k| (1..=k).map(|j| j * [2, 3, 4][j as usize - 1]).sum()).collect();
    assert_eq!(brute, vec![2, 8, 20]);
    assert_eq!(r.breakpoints, brute);
    assert_eq!((r.eval(2), r.eval(8), r.eval(20), r.eval(5)), (1, 2, 3, 1));
}

#[test]
fn rotation_moduli_grow() {
    let rot = Rotation::new(20).unwrap();
    let m = measure_modulus(&Reparametrized::new(&rot, 4).unwrap(), 20).unwrap();
    assert!(m.l.windows(2).all(|w| w[0] <= w[1]));
    assert!(m.l.last() > m.l.first());
}

#[test]
fn family_checks_on_intervals() {
    let s = build_grid_space(1, 60).unwrap();
    let f = SubsetFamily::new(&s, vec![ints(&s, 0..=4), ints(&s, 10..=14)], qi(5), qi(4));
    let c = check_family(&f);
    assert_eq!((c.min_gap, c.max_diam, c.disjoint), (Some(qi(6)), qi(4), true));

    let cover: Vec<PointSubset> = (-15..15).map(|k| ints(&s, 2 * k..=2 * k + 2)).collect();
    let brute = (-30..=30).map(|v| cover.iter().filter(|m| m.contains(s.grid_point(&[v]).unwrap())).count()).max().unwrap();
    assert_eq!(brute, 2);
    assert_eq!(multiplicity(&cover), 2);

    let v = SubsetFamily::new(&s, vec![ints(&s, 12..=15), ints(&s, 30..=40)], qi(1), qi(10));
    let sat = saturation(&ints(&s, 0..=10), &v, qi(5));
    assert_eq!(sat.members(), ints(&s, (0..=10).chain(12..=15)).members());
}

fn independent_cover_check(w: &coarsecat::cover::WitnessCover) -> (usize, Q) {
    let s = &w.space;
    let mut covered = vec![false; s.len()];
    let mut worst = qi(0);
    for f in &w.families {
        let mut owner = vec![usize::MAX; s.len()];
        for (k, m) in f.members.iter().enumerate() {
            for &x in m.members() {
                assert_eq!(owner[x as usize], usize::MAX, "members overlap");
                owner[x as usize] = k;
                covered[x as usize] = true;
            }
            worst = worst.max(m.diameter());
        }
        // A gap of at most r would show up as two owners within r.
        let r_ticks = coarsecat::rational::exact_ticks(w.scale_r, s.unit()).unwrap();
        for x in 0..s.len() {
            if owner[x] == usize::MAX {
                continue;
            }
            let dist = s.bfs_from(&[x], r_ticks, None);
            for (y, &d) in dist.iter().enumerate() {
                if d != u32::MAX && owner[y] != usize::MAX && owner[y] != owner[x] {
                    panic!("members {} and {} within {}", owner[x], owner[y], w.scale_r);
                }
            }
        }
        assert!(worst <= f.diam_bound);
    }
    assert!(covered.iter().all(|&c| c));
    (w.families.len(), worst)
}

#[test]
fn line_witness_at_r3() {
    let s = build_grid_space(1, 200).unwrap();
    let w = grid_asdim_witness(&s, qi(3)).unwrap();
    assert!(matches!(w.construction, Construction::ShiftedCubes { cube_side: 16, .. }));
    assert_eq!(independent_cover_check(&w).0, 2);
    assert!(verify_cover(&w).passed);
}

#[test]
fn plane_and_tree_witnesses() {
    let g = build_grid_space(2, 300).unwrap();
    let w = grid_asdim_witness(&g, qi(5)).unwrap();
    let (n, diam) = independent_cover_check(&w);
    assert_eq!((n, diam), (3, qi(46)));
    assert!(multiplicity(&w.all_members()) <= 3);
    assert!(matches!(w.construction, Construction::ShiftedCubes { cube_side: 36, depth: 6, shift: 12 }));

    let t = build_tree_space(2, 12).unwrap();
    let w = tree_asdim_witness(&t, qi(2)).unwrap();
    assert_eq!(independent_cover_check(&w).0, 2);
    assert_eq!(w.families.iter().map(|f| f.len()).collect::<Vec<_>>(), vec![2049, 32]);
}

#[test]
fn powers_of_two_dispersion() {
    let s = build_grid_space(1, 5000).unwrap();
    let pts: Vec<i32> = (0..=12).map(|k| 1 << k).collect();
    let u = ints(&s, pts.iter().copied());
    let outside: Vec<i32> = pts.iter().copied().filter(|&v| v >= 10).collect();
    let brute = outside.iter().flat_map(|a| outside.iter().filter(move |b| *b != a).map(move |b| (a - b).abs())).min().unwrap();
    assert_eq!(brute, 16);
    assert_eq!(dispersion_profile(&u, &[qi(10)]).values, vec![Some(qi(16))]);
}

#[test]
fn contracting_intervals_to_points_shifts_gaps_by_their_diameter() {
    let s = build_grid_space(1, 600).unwrap();
    let members: Vec<PointSubset> = (2..=9).map(|k| ints(&s, (1 << k)..=(1 << k) + 3)).collect();
    let fam = SubsetFamily::new(&s, members, qi(1), qi(3));
    let radii: Vec<Q> = [0, 8, 40, 100, 300].into_iter().map(qi).collect();
    let b = geodesic_bicombing(&s).unwrap();
    let fc = contract_family_to_points(&fam, &b, &radii, &cfg()).unwrap();
    assert!(fc.certificate.passed);
    let want: Vec<u32> = (2..=9).map(|k| s.grid_point(&[1 << k]).unwrap() as u32).collect();
    assert_eq!(fc.points.members(), &want[..]);
    let before = family_dispersion_profile(&fam, &radii);
    let after = dispersion_profile(&fc.points, &radii);
    for (i, &r) in radii.iter().enumerate() {
        // Members strictly beyond r, and base points at norm at least r.
        let far: Vec<i64> = (2..=9).map(|k| 1i64 << k).filter(|&a| qi(a) > r).collect();
        let fam_gap = far.windows(2).map(|w| w[1] - w[0] - 3).min();
        let pts: Vec<i64> = (2..=9).map(|k| 1i64 << k).filter(|&a| qi(a) >= r).collect();
        let pt_gap = pts.windows(2).map(|w| w[1] - w[0]).min();
        assert_eq!(before.values[i], fam_gap.map(qi));
        assert_eq!(after.values[i], pt_gap.map(qi));
        // Over the same members, contracting to base points widens each gap by exactly 3.
        let far_pts = far.windows(2).map(|w| w[1] - w[0]).min();
        assert_eq!(far_pts, fam_gap.map(|g| g + 3));
    }
}

/// Shortest unit-step path in the lattice complement of `B_p(r)` from `x`
/// to any point of the ray.
fn brute_avoiding_length(s: &Space, ray: &Ray, x: usize, r: Q) -> Option<u64> {
    let on_ray: Vec<bool> = (0..s.len()).map(|y| ray.parameter_of(y).is_some()).collect();
    let mut dist = vec![u64::MAX; s.len()];
    let mut queue = VecDeque::from([x]);
    dist[x] = 0;
    let mut nb = Vec::new();
    while let Some(y) = queue.pop_front() {
        if on_ray[y] {
            return Some(dist[y]);
        }
        nb.clear();
        s.neighbors(y, &mut nb);
        for &z in &nb {
            if dist[z] == u64::MAX && s.norm(z) >= r {
                dist[z] = dist[y] + 1;
                queue.push_back(z);
            }
        }
    }
    None
}

#[test]
fn plane_avoiding_path_goes_round_the_ball() {
    let s = build_grid_space(2, 40).unwrap();
    let ray = Ray::grid_axis(&s, 0, 1).unwrap();
    let x = s.grid_point(&[0, 20]).unwrap();
    let paths = find_avoiding_paths(&s, &ray, &PointSubset::new(&s, vec![x as u32]).unwrap(), qi(5)).unwrap();
    let rec = paths.path(x).unwrap();
    assert_eq!(Some(rec.k), brute_avoiding_length(&s, &ray, x, qi(5)));
    assert_eq!(rec.k, 25);
    assert_eq!(coords(&s, *rec.points.last().unwrap()), vec![5, 0]);
    assert!(audit_path(&s, &ray, qi(5), &rec).ok());
}

#[test]
fn tree_branches_have_no_avoiding_path() {
    let t = build_tree_space(2, 10).unwrap();
    let left = Ray::tree_branch(&t, 0).unwrap();
    let right = Ray::tree_branch(&t, 1).unwrap();
    let x = right.point(8);
    assert_eq!(brute_avoiding_length(&t, &left, x, qi(2)), None);
    let a = PointSubset::new(&t, vec![x as u32]).unwrap();
    assert!(matches!(find_avoiding_paths(&t, &left, &a, qi(2)), Err(Error::NoPath { .. })));

    let both = left.as_subset().union(&right.as_subset());
    assert!(matches!(dispersed_categorical_witness(&t, &left, &both, &cfg()), Err(Error::NoPath { .. })));
}

#[test]
fn diagonal_powers_of_two_are_categorical() {
    // The diagonal points (2^k, 2^k), kept inside the interior radius so the
    // outermost rung has room to go around its ball.
    let s = build_grid_space(2, 512).unwrap();
    let pts: Vec<u32> = (0..=7).map(|k| s.grid_point(&[1 << k, 1 << k]).unwrap() as u32).collect();
    let u = PointSubset::new(&s, pts).unwrap();
    let ray = Ray::grid_axis(&s, 0, 1).unwrap();
    let w = dispersed_categorical_witness(&s, &ray, &u, &cfg()).unwrap();
    assert!(w.report.passed, "{:?}", w.report.failures);
}

#[test]
fn schedule_on_the_integers() {
    let s = build_grid_space(1, 100_000).unwrap();
    let (sched, covers) = build_schedule(&s, &coarsecat::cover::asdim_witness, qi(4), qi(8)).unwrap();
    assert_eq!(sched.scales[0], qi(4));
    assert_eq!(sched.diameters[0], qi(20));
    assert_eq!(sched.radii[0], qi(160));
    assert_eq!(sched.scales[1], qi(640));
    // The recorded D_1 is the construction's bound; the members come in under it.
    let widest = covers[0].families.iter().flat_map(|f| &f.members).map(|m| m.diameter()).max().unwrap();
    assert_eq!(widest, qi(9));
    assert!(widest <= sched.diameters[0]);
}
