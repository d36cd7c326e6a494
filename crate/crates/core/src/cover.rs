//! Families of subsets, their disjointness and boundedness certificates, and
//! constructive asymptotic-dimension witness covers for grids and trees.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_ticks, qi, strict_ticks, Q};
use crate::space::{Domain, PointSubset, Space};

/// Members together with the scale and bound they claim; claims are checked
/// by [`check_family`], never assumed.
#[derive(Clone, Debug)]
pub struct SubsetFamily {
    pub space: Arc<Space>,
    pub members: Vec<PointSubset>,
    pub scale_r: Q,
    pub diam_bound: Q,
}

impl SubsetFamily {
    pub fn new(space: &Arc<Space>, members: Vec<PointSubset>, scale_r: Q, diam_bound: Q) -> Self {
        SubsetFamily { space: space.clone(), members, scale_r, diam_bound }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn union(&self) -> PointSubset {
        let mut all: Vec<u32> = self.members.iter().flat_map(|m| m.members().iter().copied()).collect();
        all.sort_unstable();
        all.dedup();
        PointSubset::from_sorted(&self.space, all)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCheck {
    /// Least distance between two distinct members; `None` is the `+inf`
    /// sentinel for fewer than two nonempty members.
    pub min_gap: Option<Q>,
    /// Points of two members realizing `min_gap`.
    pub gap_witness: Option<(usize, usize)>,
    pub max_diam: Q,
    pub disjoint: bool,
}

/// Distance in ticks from `sources` to every point, exact on graph spaces
/// and by scan otherwise; points farther than `limit` ticks stay `u32::MAX`.
pub fn distance_field(space: &Space, sources: &[u32], limit: u64) -> Vec<u32> {
    if space.is_graph() {
        let s: Vec<usize> = sources.iter().map(|&x| x as usize).collect();
        return space.bfs_from(&s, limit, None);
    }
    (0..space.len())
        .into_par_iter()
        .map(|x| {
            let d = sources.iter().map(|&s| space.dist_ticks(x, s as usize)).min().unwrap_or(u64::MAX);
            if d <= limit {
                d as u32
            } else {
                u32::MAX
            }
        })
        .collect()
}

/// Exact `d(A, B)` in ticks, with the realizing pair; `None` if either is empty.
pub fn set_distance(a: &PointSubset, b: &PointSubset) -> Option<(u64, usize, usize)> {
    let space = a.space();
    if a.members().is_empty() || b.members().is_empty() {
        return None;
    }
    if !space.is_graph() || a.members().len() * b.members().len() <= space.len() {
        let mut best: Option<(u64, usize, usize)> = None;
        for &x in a.members() {
            for &y in b.members() {
                let d = space.dist_ticks(x as usize, y as usize);
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, x as usize, y as usize));
                    if d == 0 {
                        return best;
                    }
                }
            }
        }
        return best;
    }
    let field = distance_field(space, a.members(), u64::MAX);
    let (d, y) = b.members().iter().map(|&y| (field[y as usize] as u64, y as usize)).min()?;
    let x = a.members().iter().map(|&x| x as usize).find(|&x| space.dist_ticks(x, y) == d).unwrap();
    Some((d, x, y))
}

/// Multi-source breadth-first search labelled by member: the least
/// `d(u) + 1 + d(v)` over edges joining two labels is the exact minimum gap.
pub(crate) fn voronoi_min_gap(space: &Space, members: &[PointSubset]) -> (Option<u64>, Option<(usize, usize)>, bool) {
    let n = space.len();
    let mut label = vec![u32::MAX; n];
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::new();
    for (k, m) in members.iter().enumerate() {
        for &x in m.members() {
            let x = x as usize;
            if label[x] != u32::MAX {
                return (Some(0), Some((x, x)), false);
            }
            label[x] = k as u32;
            dist[x] = 0;
            queue.push_back(x);
        }
    }
    let mut nb = Vec::new();
    while let Some(u) = queue.pop_front() {
        nb.clear();
        space.neighbors(u, &mut nb);
        for &v in &nb {
            if label[v] == u32::MAX {
                label[v] = label[u];
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let best = (0..n)
        .into_par_iter()
        .fold(
            || (None::<(u64, usize, usize)>, Vec::new()),
            |(mut best, mut nb), u| {
                if label[u] == u32::MAX {
                    return (best, nb);
                }
                nb.clear();
                space.neighbors(u, &mut nb);
                for &v in &nb {
                    if v > u && label[v] != u32::MAX && label[v] != label[u] {
                        let d = dist[u] as u64 + 1 + dist[v] as u64;
                        if best.is_none_or(|(b, _, _)| d < b) {
                            best = Some((d, u, v));
                        }
                    }
                }
                (best, nb)
            },
        )
        .map(|(b, _)| b)
        .reduce(|| None, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(if y.0 < x.0 { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        });
    match best {
        None => (None, None, true),
        Some((d, u, v)) => {
            // Trace each endpoint back to the member point it was labelled from.
            let back = |mut w: usize| {
                let mut nb = Vec::new();
                while dist[w] > 0 {
                    nb.clear();
                    space.neighbors(w, &mut nb);
                    w = *nb.iter().find(|&&z| label[z] == label[w] && dist[z] + 1 == dist[w]).unwrap();
                }
                w
            };
            (Some(d), Some((back(u), back(v))), true)
        }
    }
}

fn pair_scan_min_gap(members: &[PointSubset]) -> (Option<u64>, Option<(usize, usize)>, bool) {
    let mut best: Option<(u64, usize, usize)> = None;
    let mut disjoint = true;
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            if let Some((d, x, y)) = set_distance(&members[a], &members[b]) {
                if d == 0 {
                    disjoint = false;
                }
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, x, y));
                }
            }
        }
    }
    (best.map(|b| b.0), best.map(|b| (b.1, b.2)), disjoint)
}

pub fn check_family(f: &SubsetFamily) -> FamilyCheck {
    let space = &f.space;
    let nonempty: Vec<PointSubset> = f.members.iter().filter(|m| !m.members().is_empty()).cloned().collect();
    let (gap, witness, disjoint) =
        if space.is_graph() { voronoi_min_gap(space, &nonempty) } else { pair_scan_min_gap(&nonempty) };
    let max_diam = nonempty.par_iter().map(|m| m.diameter_ticks()).max().unwrap_or(0);
    FamilyCheck {
        min_gap: gap.map(|d| from_ticks(d, space.unit())),
        gap_witness: witness,
        max_diam: from_ticks(max_diam, space.unit()),
        disjoint,
    }
}

/// Largest number of members containing a single point.
pub fn multiplicity(cover: &[PointSubset]) -> usize {
    let Some(first) = cover.first() else { return 0 };
    let mut count = vec![0u32; first.space().len()];
    for m in cover {
        for &x in m.members() {
            count[x as usize] += 1;
        }
    }
    count.into_iter().max().unwrap_or(0) as usize
}

/// `U` together with every member of `V` at distance strictly less than `r`.
pub fn saturation(u: &PointSubset, v: &SubsetFamily, r: Q) -> PointSubset {
    let space = u.space();
    let bound = strict_ticks(r, space.unit());
    if bound == 0 || u.members().is_empty() || v.members.is_empty() {
        return u.clone();
    }
    let field = distance_field(space, u.members(), bound - 1);
    let mut out = u.clone();
    for m in &v.members {
        if m.members().iter().any(|&y| field[y as usize] != u32::MAX) {
            out = out.union(m);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case")]
pub enum Construction {
    /// The whole space as a single member; used when `r` exceeds its diameter.
    Whole,
    /// Cores of cubes of side `cube_side` ticks shifted diagonally by `shift` ticks.
    ShiftedCubes { cube_side: u64, depth: u64, shift: u64 },
    /// Depth bands of width `band` ticks, grouped by the ancestor `lift` above each band.
    TreeBands { band: u64, lift: u64 },
    /// Supplied from outside, e.g. read from a file.
    Given,
}

#[derive(Clone, Debug)]
pub struct WitnessCover {
    pub space: Arc<Space>,
    pub scale_r: Q,
    pub families: Vec<SubsetFamily>,
    pub construction: Construction,
    pub covers: bool,
}

impl WitnessCover {
    pub fn all_members(&self) -> Vec<PointSubset> {
        self.families.iter().flat_map(|f| f.members.iter().cloned()).collect()
    }

    /// Largest certified member diameter across families.
    pub fn diam_bound(&self) -> Q {
        self.families.iter().map(|f| f.diam_bound).max().unwrap_or(qi(0))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub members: usize,
    pub check: FamilyCheck,
    pub r_disjoint: bool,
    pub bounded: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverCertificate {
    pub scale_r: Q,
    pub families: Vec<FamilyVerdict>,
    pub multiplicity: usize,
    pub covers: bool,
    /// First points of the space outside every member.
    pub uncovered: Vec<usize>,
    pub passed: bool,
}

/// Independent re-certification of a cover: every family `r`-disjoint,
/// pairwise disjoint and within its claimed diameter, and the union is everything.
pub fn verify_cover(cover: &WitnessCover) -> CoverCertificate {
    let families: Vec<FamilyVerdict> = cover
        .families
        .iter()
        .map(|f| {
            let check = check_family(f);
            FamilyVerdict {
                members: f.members.len(),
                r_disjoint: check.disjoint && check.min_gap.is_none_or(|g| g > cover.scale_r),
                bounded: check.max_diam <= f.diam_bound,
                check,
            }
        })
        .collect();
    let mut seen = vec![false; cover.space.len()];
    let members = cover.all_members();
    for m in &members {
        for &x in m.members() {
            seen[x as usize] = true;
        }
    }
    let uncovered: Vec<usize> = (0..seen.len()).filter(|&x| !seen[x]).take(16).collect();
    let covers = uncovered.is_empty();
    let passed = covers && families.iter().all(|f| f.r_disjoint && f.bounded);
    CoverCertificate { scale_r: cover.scale_r, families, multiplicity: multiplicity(&members), covers, uncovered, passed }
}

fn certified(mut cover: WitnessCover) -> Result<WitnessCover> {
    let cert = verify_cover(&cover);
    if !cert.passed {
        let why = if let Some(&x) = cert.uncovered.first() {
            format!("point {} is uncovered", cover.space.point_name(x))
        } else {
            let (k, f) = cert.families.iter().enumerate().find(|(_, f)| !(f.r_disjoint && f.bounded)).unwrap();
            let pair = f.check.gap_witness.map(|(a, b)| {
                format!(" ({} vs {})", cover.space.point_name(a), cover.space.point_name(b))
            });
            format!(
                "family {k}: gap {:?}{}, diameter {} against bound {}",
                f.check.min_gap,
                pair.unwrap_or_default(),
                f.check.max_diam,
                cover.families[k].diam_bound
            )
        };
        return Err(Error::Certification(format!("witness cover at scale {}: {why}", cover.scale_r)));
    }
    cover.covers = true;
    Ok(cover)
}

fn whole_cover(space: &Arc<Space>, r: Q, diam: u64) -> Result<WitnessCover> {
    let fam = SubsetFamily::new(space, vec![PointSubset::full(space)], r, from_ticks(diam, space.unit()));
    certified(WitnessCover {
        space: space.clone(),
        scale_r: r,
        families: vec![fam],
        construction: Construction::Whole,
        covers: false,
    })
}

/// `n+1` families of cube cores for the lattice ball of dimension `n`.
pub fn grid_asdim_witness(space: &Arc<Space>, r: Q) -> Result<WitnessCover> {
    let g = space.grid().ok_or_else(|| Error::Precondition("grid witness needs a grid space".into()))?;
    if r < qi(1) {
        return Err(Error::Precondition(format!("witness scale must be at least 1, got {r}")));
    }
    let n = g.dim() as u64;
    let diameter = 2 * g.radius() as u64;
    if r >= from_ticks(diameter, space.unit()) {
        return whole_cover(space, r, diameter);
    }
    // Cores sit `depth` ticks inside their cube, so cores of one family are
    // at least 2*depth > r apart, and shifts are spaced 2*depth apart.
    let depth = (r + qi(1)).ceil().to_integer() as u64;
    let side = 2 * depth * (n + 1);
    let shift = side / (n + 1);
    let diam_bound = qi((n * side) as i64);
    let families = (0..=n)
        .map(|i| {
            let offset = (i * shift) as i64;
            let mut groups: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
            for x in 0..space.len() {
                let c = g.coords(x);
                let mut key = Vec::with_capacity(c.len());
                let mut core = true;
                for &v in c {
                    let w = v as i64 - offset;
                    let o = w.rem_euclid(side as i64) as u64;
                    if o < depth || o >= side - depth {
                        core = false;
                        break;
                    }
                    key.push(w.div_euclid(side as i64));
                }
                if core {
                    groups.entry(key).or_default().push(x as u32);
                }
            }
            let mut keys: Vec<_> = groups.into_iter().collect();
            keys.sort_unstable_by(|a, b| a.0.cmp(&b.0));
            let members = keys.into_iter().map(|(_, m)| PointSubset::from_sorted(space, m)).collect();
            SubsetFamily::new(space, members, r, diam_bound)
        })
        .collect();
    certified(WitnessCover {
        space: space.clone(),
        scale_r: r,
        families,
        construction: Construction::ShiftedCubes { cube_side: side, depth, shift },
        covers: false,
    })
}

/// Two families of depth bands for a regular tree.
pub fn tree_asdim_witness(space: &Arc<Space>, r: Q) -> Result<WitnessCover> {
    let t = space.tree().ok_or_else(|| Error::Precondition("tree witness needs a tree space".into()))?;
    if r < qi(1) {
        return Err(Error::Precondition(format!("witness scale must be at least 1, got {r}")));
    }
    let m = (r + qi(1)).ceil().to_integer() as u64;
    let band = 2 * m;
    // Members hang from an ancestor `lift` levels above their band, so two
    // members of one band meet only above it: distance >= 2(lift+1) > r.
    let lift = (r.floor().to_integer() as u64) / 2;
    let depth = t.depth() as u64;
    if depth < band {
        return whole_cover(space, r, 2 * depth);
    }
    let diam_bound = qi((2 * (band - 1 + lift)) as i64);
    let mut families = vec![Vec::new(), Vec::new()];
    let mut groups: HashMap<(u64, usize), Vec<u32>> = HashMap::new();
    for x in 0..space.len() {
        let d = space.norms()[x] as u64;
        let b = d / band;
        let top = (b * band).saturating_sub(lift);
        let mut a = x;
        for _ in top..d {
            a = t.parent(a).unwrap();
        }
        groups.entry((b, a)).or_default().push(x as u32);
    }
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_unstable_by_key(|a| a.0);
    for ((b, _), members) in keys {
        families[(b % 2) as usize].push(PointSubset::from_sorted(space, members));
    }
    let families = families.into_iter().map(|mem| SubsetFamily::new(space, mem, r, diam_bound)).collect();
    certified(WitnessCover {
        space: space.clone(),
        scale_r: r,
        families,
        construction: Construction::TreeBands { band, lift },
        covers: false,
    })
}

/// Dispatches on the space kind; lines use the one-dimensional grid recipe on
/// positions and explicit spaces take the whole-space cover only.
pub fn asdim_witness(space: &Arc<Space>, r: Q) -> Result<WitnessCover> {
    if space.grid().is_some() {
        grid_asdim_witness(space, r)
    } else if space.tree().is_some() {
        tree_asdim_witness(space, r)
    } else if space.is_line() {
        line_asdim_witness(space, r)
    } else {
        let diam = space.diameter_of(&(0..space.len() as u32).collect::<Vec<_>>());
        if r >= from_ticks(diam, space.unit()) {
            whole_cover(space, r, diam)
        } else {
            Err(Error::Precondition(format!("no witness construction for {}", space.label())))
        }
    }
}

/// Interval cores on a sampled line, measured in ticks.
pub fn line_asdim_witness(space: &Arc<Space>, r: Q) -> Result<WitnessCover> {
    let unit = space.unit();
    let positions: Vec<i64> = (0..space.len()).map(|x| space.line_position(x).unwrap()).collect();
    let diameter = (positions[positions.len() - 1] - positions[0]) as u64;
    if r >= from_ticks(diameter, unit) {
        return whole_cover(space, r, diameter);
    }
    let depth = strict_ticks(r + unit, unit).max(1);
    let side = 4 * depth;
    let shift = side / 2;
    let families = (0..2u64)
        .map(|i| {
            let offset = (i * shift) as i64;
            let mut members: Vec<(i64, Vec<u32>)> = Vec::new();
            for (x, &p) in positions.iter().enumerate() {
                let w = p - offset;
                let o = w.rem_euclid(side as i64) as u64;
                if o < depth || o >= side - depth {
                    continue;
                }
                let key = w.div_euclid(side as i64);
                match members.last_mut() {
                    Some((k, v)) if *k == key => v.push(x as u32),
                    _ => members.push((key, vec![x as u32])),
                }
            }
            let members = members.into_iter().map(|(_, m)| PointSubset::from_sorted(space, m)).collect();
            SubsetFamily::new(space, members, r, from_ticks(side, unit))
        })
        .collect();
    certified(WitnessCover {
        space: space.clone(),
        scale_r: r,
        families,
        construction: Construction::ShiftedCubes { cube_side: side, depth, shift },
        covers: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::space::{build_grid_space, build_sampled_line, build_tree_space};

    fn interval(s: &Arc<Space>, a: i32, b: i32) -> PointSubset {
        PointSubset::new(s, (a..=b).map(|k| s.grid_point(&[k]).unwrap() as u32).collect()).unwrap()
    }

    #[test]
    fn intervals_gap_and_diameter() {
        let s = build_grid_space(1, 20).unwrap();
        let f = SubsetFamily::new(&s, vec![interval(&s, 0, 4), interval(&s, 10, 14)], qi(3), qi(4));
        let c = check_family(&f);
        assert_eq!(c.min_gap, Some(qi(6)));
        assert_eq!(c.max_diam, qi(4));
        assert!(c.disjoint);
        let single = SubsetFamily::new(&s, vec![interval(&s, 0, 4)], qi(3), qi(4));
        assert_eq!(check_family(&single).min_gap, None);
        let overlap = SubsetFamily::new(&s, vec![interval(&s, 0, 4), interval(&s, 3, 6)], qi(0), qi(4));
        assert!(!check_family(&overlap).disjoint);
    }

    #[test]
    fn saturation_uses_strict_distance() {
        let s = build_grid_space(1, 50).unwrap();
        let u = interval(&s, 0, 10);
        let v = SubsetFamily::new(&s, vec![interval(&s, 12, 15), interval(&s, 30, 40)], qi(0), qi(10));
        assert_eq!(saturation(&u, &v, qi(5)), u.union(&interval(&s, 12, 15)));
        assert_eq!(saturation(&u, &v, qi(0)), u);
        assert_eq!(saturation(&u, &v, qi(2)), u);
    }

    #[test]
    fn grid_witnesses_certify() {
        let s = build_grid_space(1, 200).unwrap();
        let w = grid_asdim_witness(&s, qi(3)).unwrap();
        assert_eq!(w.families.len(), 2);
        assert_eq!(w.construction, Construction::ShiftedCubes { cube_side: 16, depth: 4, shift: 8 });
        let s2 = build_grid_space(2, 300).unwrap();
        let w2 = grid_asdim_witness(&s2, qi(5)).unwrap();
        assert_eq!(w2.families.len(), 3);
        assert!(multiplicity(&w2.all_members()) <= 3);
        let small = build_grid_space(2, 3).unwrap();
        assert_eq!(grid_asdim_witness(&small, qi(10)).unwrap().construction, Construction::Whole);
    }

    #[test]
    fn tree_and_line_witnesses_certify() {
        let t = build_tree_space(2, 12).unwrap();
        let w = tree_asdim_witness(&t, qi(2)).unwrap();
        assert_eq!(w.families.len(), 2);
        assert!(verify_cover(&w).passed);
        let l = build_sampled_line(q(1, 2), qi(30)).unwrap();
        assert!(verify_cover(&line_asdim_witness(&l, q(5, 2)).unwrap()).passed);
    }
}
