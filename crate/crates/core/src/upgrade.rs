//! Upgrading a proper homotopy on a combable space to a coarse homotopy.
//!
//! A proper homotopy `h : X × [0,1] -> Y` is reparametrized to the cylinder
//! as `h'(x,t) = h(x, t/||x||)`, its local modulus `L_k` is measured on the
//! cylinder lattice, and the upgrade `H(x,t) = h'(Sh(x), t·rho(||x||)/||x||)`
//! is built with the staircase `rho` of those moduli.

use std::sync::Arc;

use num_traits::Signed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combing::{shrinking_map, staircase_rho, Combing, StaircaseRho};
use crate::cylinder::{CylinderMap, CylinderSample, HomotopySample};
use crate::error::{Error, Result};
use crate::maps::MapSample;
use crate::rational::{from_ticks, q, qi, Q};
use crate::space::{build_grid_space, build_half_line, Domain, Space};

/// A homotopy with continuous time `u ∈ [0,1]`, sampled at exact rationals.
pub trait ProperHomotopy: Sync + Send {
    fn source(&self) -> &Arc<Space>;
    fn target(&self) -> &Arc<Space>;
    fn eval(&self, x: usize, u: Q) -> usize;
    fn label(&self) -> String;
}

/// Rotation of the half-line from the `+x` ray to the `+y` ray of the plane
/// lattice, along the l1 staircase `P_s(2i) = (s-i, i)`, `P_s(2i+1) = (s-i, i+1)`.
pub struct Rotation {
    source: Arc<Space>,
    target: Arc<Space>,
}

impl Rotation {
    /// Half-line `{0..R-1}` into `grid(2,R)`; the staircase of radius `s`
    /// reaches norm `s+1`, so the source stops one short of the target.
    pub fn new(radius: u32) -> Result<Self> {
        if radius < 2 {
            return Err(Error::Precondition("rotation needs radius at least 2".into()));
        }
        Ok(Rotation { source: build_half_line(qi(1), qi(radius as i64 - 1))?, target: build_grid_space(2, radius)? })
    }

    fn staircase(&self, s: i32, idx: i32) -> usize {
        let i = idx / 2;
        let pt = if idx % 2 == 0 { [s - i, i] } else { [s - i, i + 1] };
        self.target.grid_point(&pt).unwrap()
    }
}

impl ProperHomotopy for Rotation {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }

    fn target(&self) -> &Arc<Space> {
        &self.target
    }

    fn eval(&self, x: usize, u: Q) -> usize {
        let s = x as i64;
        let idx = (qi(2 * s) * u).floor().to_integer().clamp(0, 2 * s);
        self.staircase(s as i32, idx as i32)
    }

    fn label(&self) -> String {
        "rotation".into()
    }
}

/// `h(x,u) = f(x)` for all `u`.
pub struct Stationary {
    pub f: MapSample,
    source: Arc<Space>,
}

impl Stationary {
    pub fn new(f: MapSample, source: &Arc<Space>) -> Result<Self> {
        if f.source().signature() != source.signature() {
            return Err(Error::DomainMismatch("stationary homotopy source mismatch".into()));
        }
        Ok(Stationary { f, source: source.clone() })
    }
}

impl ProperHomotopy for Stationary {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }

    fn target(&self) -> &Arc<Space> {
        self.f.target_space()
    }

    fn eval(&self, x: usize, _u: Q) -> usize {
        self.f.values()[x] as usize
    }

    fn label(&self) -> String {
        format!("stationary {}", self.f.label())
    }
}

/// A proper homotopy read from a table over the constant projection 1;
/// `u` is rounded down to the nearest sampled time.
pub struct Tabulated {
    h: HomotopySample,
    source: Arc<Space>,
}

impl Tabulated {
    pub fn new(h: HomotopySample, source: &Arc<Space>) -> Result<Self> {
        let cyl = h.cylinder();
        if cyl.base().signature() != source.signature() {
            return Err(Error::DomainMismatch("tabulated homotopy is not over the given source".into()));
        }
        if let Some(x) = (0..source.len()).find(|&x| cyl.projection(x) != qi(1)) {
            return Err(Error::Precondition(format!("projection at {} is not 1", source.point_name(x))));
        }
        Ok(Tabulated { h, source: source.clone() })
    }
}

impl ProperHomotopy for Tabulated {
    fn source(&self) -> &Arc<Space> {
        &self.source
    }

    fn target(&self) -> &Arc<Space> {
        self.h.target()
    }

    fn eval(&self, x: usize, u: Q) -> usize {
        let cyl = self.h.cylinder();
        let j = (u / cyl.t_step()).floor().to_integer().max(0) as usize;
        self.h.values()[(cyl.bottom(x) + j).min(cyl.top(x))] as usize
    }

    fn label(&self) -> String {
        self.h.label()
    }
}

pub fn start_map(h: &dyn ProperHomotopy) -> MapSample {
    MapSample::from_fn(h.source().clone(), h.target(), "f", |x| h.eval(x, qi(0))).unwrap()
}

pub fn end_map(h: &dyn ProperHomotopy) -> MapSample {
    MapSample::from_fn(h.source().clone(), h.target(), "g", |x| h.eval(x, qi(1))).unwrap()
}

/// `h'(x,t) = h(x, t/||x||)` on the norm cylinder sampled at `1/lattice`.
pub struct Reparametrized<'a> {
    pub h: &'a dyn ProperHomotopy,
    cylinder: CylinderSample,
    lattice: u64,
}

impl<'a> Reparametrized<'a> {
    pub fn new(h: &'a dyn ProperHomotopy, lattice: u64) -> Result<Self> {
        if lattice == 0 {
            return Err(Error::Precondition("time lattice must be positive".into()));
        }
        let cylinder = CylinderSample::over_norm(h.source().clone(), q(1, lattice as i64))?;
        // Pair distances are read in cylinder ticks, so one tick must be 1/lattice.
        if cylinder.unit() != q(1, lattice as i64) {
            return Err(Error::Precondition(format!(
                "time lattice 1/{lattice} is not the cylinder resolution {}",
                cylinder.unit()
            )));
        }
        Ok(Reparametrized { h, cylinder, lattice })
    }

    pub fn lattice(&self) -> u64 {
        self.lattice
    }

    fn at(&self, x: usize, t: Q) -> usize {
        let n = self.h.source().norm(x);
        if n == qi(0) {
            self.h.eval(x, qi(0))
        } else {
            self.h.eval(x, (t / n).min(qi(1)))
        }
    }
}

impl CylinderMap for Reparametrized<'_> {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        self.h.target()
    }

    fn eval(&self, x: usize, t: u64) -> usize {
        self.at(x, from_ticks(t, self.cylinder.unit()))
    }

    fn label(&self) -> String {
        format!("{}'", self.h.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modulus {
    pub lattice: u64,
    /// Requirement from pairs first contained in the k-th region, `k = 1..`.
    pub raw: Vec<u64>,
    /// Running maximum of `raw`: the nondecreasing `L_k`.
    pub l: Vec<u64>,
}

fn pair_region(cyl: &CylinderSample, a: (usize, u64), b: (usize, u64)) -> usize {
    let base = cyl.base();
    let unit = cyl.unit();
    let norm_ticks = base.norm_ticks(a.0).max(base.norm_ticks(b.0));
    // x ∈ B_p(k) is strict; t ∈ [0,k] is closed.
    let by_norm = from_ticks(norm_ticks, base.unit()).floor().to_integer() + 1;
    let by_time = from_ticks(a.1.max(b.1), unit).ceil().to_integer();
    by_norm.max(by_time).max(1) as usize
}

/// Least `L_k` such that cylinder pairs within `1/L_k` inside
/// `B_p(k) × [0,k]` map within distance 1, for `k = 1..=k_max`.
pub fn measure_modulus(hprime: &Reparametrized<'_>, k_max: usize) -> Result<Modulus> {
    let cyl = hprime.cylinder();
    let tgt = hprime.target();
    let one = hprime.lattice();
    let raw = (0..cyl.len())
        .into_par_iter()
        .fold(
            || (vec![1u64; k_max + 1], Vec::new()),
            |(mut need, mut close), i| {
                let a = cyl.locate(i);
                cyl.close_points(i, one, &mut close);
                let fa = hprime.eval(a.0, a.1);
                for &j in close.iter().filter(|&&j| j > i) {
                    let b = cyl.locate(j);
                    let k = pair_region(cyl, a, b);
                    if k > k_max {
                        continue;
                    }
                    if tgt.dist_ticks(fa, hprime.eval(b.0, b.1)) > 1 {
                        // Valid L must satisfy 1/L < delta.
                        let delta = cyl.dist_ticks(i, j);
                        need[k] = need[k].max(one / delta + 1);
                    }
                }
                (need, close)
            },
        )
        .map(|(need, _)| need)
        .reduce(|| vec![1u64; k_max + 1], |a, b| a.iter().zip(&b).map(|(x, y)| *x.max(y)).collect());
    let raw: Vec<u64> = raw[1..].to_vec();
    if let Some(k) = raw.iter().position(|&l| l > one) {
        return Err(Error::TooCoarse(format!(
            "pairs at lattice spacing 1/{one} already break the modulus in region {}",
            k + 1
        )));
    }
    let mut l = raw.clone();
    for k in 1..l.len() {
        l[k] = l[k].max(l[k - 1]);
    }
    Ok(Modulus { lattice: one, raw, l })
}

/// `H(x,t) = h'(Sh(x), t·rho(||x||)/||x||)` over the norm cylinder of `X`.
pub struct Upgraded<'a> {
    h: &'a dyn ProperHomotopy,
    rho: StaircaseRho,
    sh: MapSample,
    cylinder: CylinderSample,
}

impl Upgraded<'_> {
    pub fn rho(&self) -> &StaircaseRho {
        &self.rho
    }

    pub fn shrink(&self) -> &MapSample {
        &self.sh
    }

    /// `(Sh(x), s)` with `s = t·rho(||x||)/||x||`.
    fn reparam(&self, x: usize, t: Q) -> (usize, Q) {
        let space = self.h.source();
        let y = self.sh.values()[x] as usize;
        let n = space.norm_ticks(x);
        if n == 0 {
            return (y, qi(0));
        }
        let s = t * qi(self.rho.eval(n) as i64) / space.norm(x);
        (y, s)
    }

    fn at(&self, x: usize, t: Q) -> usize {
        let (y, s) = self.reparam(x, t);
        let ny = self.h.source().norm(y);
        if ny == qi(0) {
            self.h.eval(y, qi(0))
        } else {
            self.h.eval(y, (s / ny).min(qi(1)))
        }
    }
}

impl CylinderMap for Upgraded<'_> {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        self.h.target()
    }

    fn eval(&self, x: usize, t: u64) -> usize {
        self.at(x, from_ticks(t, self.cylinder.unit()))
    }

    fn label(&self) -> String {
        format!("upgraded {}", self.h.label())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PairWitness {
    pub a: String,
    pub b: String,
    pub image_a: String,
    pub image_b: String,
    pub image_distance: Q,
}

/// The unit-distance inequality for `H`, scanned over every cylinder pair at
/// sup distance at most 1, with the two intermediate inequalities of its
/// argument counted on the same pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClaimCertificate {
    pub lattice: u64,
    pub pairs_scanned: u64,
    pub violations: u64,
    /// Violating pairs with `rho(||x||) = rho(||x'||)`.
    pub violations_same_level: u64,
    /// Violating pairs straddling a step of `rho`.
    pub violations_across_step: u64,
    pub max_image_distance: Q,
    /// Pairs with `d(Sh x, Sh x') > 1/L_k`.
    pub shrink_inequality_failures: u64,
    /// Pairs with `|s - s'| > 1/L_k`.
    pub time_inequality_failures: u64,
    pub witnesses: Vec<PairWitness>,
    pub passed: bool,
}

pub struct UpgradeResult<'a> {
    pub homotopy: Upgraded<'a>,
    pub claim: ClaimCertificate,
    /// `f ∘ Sh` and `g ∘ Sh`, the slices `H` connects.
    pub f_sh: MapSample,
    pub g_sh: MapSample,
}

/// Builds `rho` from `L`, the shrinking map along `combing`, and `H`; then
/// scans the unit-distance inequality on `H`'s cylinder sampled at `1/lattice`.
pub fn upgrade_proper_homotopy<'a>(
    h: &'a dyn ProperHomotopy,
    combing: &Combing,
    modulus: &Modulus,
) -> Result<UpgradeResult<'a>> {
    if combing.space().signature() != h.source().signature() {
        return Err(Error::DomainMismatch("combing and homotopy live on different spaces".into()));
    }
    let rho = staircase_rho(&modulus.l)?;
    let rho_fn = rho.as_fn();
    let sh = shrinking_map(combing, &rho_fn)?;
    let cylinder = CylinderSample::over_norm(h.source().clone(), q(1, modulus.lattice as i64))?;
    let f_sh = sh.then(&start_map(h))?.with_label("f∘Sh");
    let g_sh = sh.then(&end_map(h))?.with_label("g∘Sh");
    let homotopy = Upgraded { h, rho: rho.clone(), sh, cylinder };
    let claim = scan_claim(&homotopy, modulus.lattice);
    Ok(UpgradeResult { homotopy, claim, f_sh, g_sh })
}

fn region_index(rho: &StaircaseRho, n: u64) -> usize {
    let mut k = 1;
    while rho.breakpoint(k) < n {
        k += 1;
    }
    k
}

fn scan_claim(hh: &Upgraded<'_>, lattice: u64) -> ClaimCertificate {
    let cyl = &hh.cylinder;
    let space = hh.h.source();
    let tgt = hh.h.target();
    let unit = cyl.unit();
    struct Acc {
        pairs: u64,
        bad: u64,
        same: u64,
        across: u64,
        max: u64,
        ineq1: u64,
        ineq2: u64,
        witnesses: Vec<PairWitness>,
    }
    let empty = || Acc { pairs: 0, bad: 0, same: 0, across: 0, max: 0, ineq1: 0, ineq2: 0, witnesses: Vec::new() };
    let acc = (0..cyl.len())
        .into_par_iter()
        .fold(
            || (empty(), Vec::new()),
            |(mut acc, mut close), i| {
                let (x, t) = cyl.locate(i);
                let tq = from_ticks(t, unit);
                let hx = hh.at(x, tq);
                let (y, s) = hh.reparam(x, tq);
                cyl.close_points(i, lattice, &mut close);
                for &j in close.iter().filter(|&&j| j > i) {
                    let (x2, t2) = cyl.locate(j);
                    let tq2 = from_ticks(t2, unit);
                    let hx2 = hh.at(x2, tq2);
                    let d = tgt.dist_ticks(hx, hx2);
                    acc.pairs += 1;
                    acc.max = acc.max.max(d);
                    let (y2, s2) = hh.reparam(x2, tq2);
                    let k = region_index(&hh.rho, space.norm_ticks(x).min(space.norm_ticks(x2)));
                    let inv_l = q(1, hh.rho.modulus(k) as i64);
                    if space.dist(y, y2) > inv_l {
                        acc.ineq1 += 1;
                    }
                    if (s - s2).abs() > inv_l {
                        acc.ineq2 += 1;
                    }
                    if d > 1 {
                        acc.bad += 1;
                        if hh.rho.eval(space.norm_ticks(x)) == hh.rho.eval(space.norm_ticks(x2)) {
                            acc.same += 1;
                        } else {
                            acc.across += 1;
                        }
                        if acc.witnesses.len() < 8 {
                            acc.witnesses.push(PairWitness {
                                a: cyl.describe_point(i),
                                b: cyl.describe_point(j),
                                image_a: tgt.point_name(hx),
                                image_b: tgt.point_name(hx2),
                                image_distance: tgt.dist(hx, hx2),
                            });
                        }
                    }
                }
                (acc, close)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(empty, |mut a, b| {
            a.pairs += b.pairs;
            a.bad += b.bad;
            a.same += b.same;
            a.across += b.across;
            a.max = a.max.max(b.max);
            a.ineq1 += b.ineq1;
            a.ineq2 += b.ineq2;
            a.witnesses.extend(b.witnesses);
            a.witnesses.truncate(8);
            a
        });
    ClaimCertificate {
        lattice,
        pairs_scanned: acc.pairs,
        violations: acc.bad,
        violations_same_level: acc.same,
        violations_across_step: acc.across,
        max_image_distance: from_ticks(acc.max, tgt.unit()),
        shrink_inequality_failures: acc.ineq1,
        time_inequality_failures: acc.ineq2,
        witnesses: acc.witnesses,
        passed: acc.bad == 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_endpoints_are_the_axes() {
        let r = Rotation::new(10).unwrap();
        let g = r.target().grid().unwrap();
        for s in 0..r.source().len() {
            assert_eq!(g.coords(r.eval(s, qi(0))), &[s as i32, 0]);
            assert_eq!(g.coords(r.eval(s, qi(1))), &[0, s as i32]);
            // Proper: the staircase never dips below radius s.
            for k in 0..=8 {
                assert!(r.target().norm_ticks(r.eval(s, q(k, 8))) >= s as u64);
            }
        }
    }

    #[test]
    fn stationary_modulus_is_one() {
        let src = build_half_line(qi(1), qi(12)).unwrap();
        let tgt = build_grid_space(2, 12).unwrap();
        let f = MapSample::from_fn(src.clone(), &tgt, "x-axis", |s| tgt.grid_point(&[s as i32, 0]).unwrap()).unwrap();
        let h = Stationary::new(f, &src).unwrap();
        let hp = Reparametrized::new(&h, 4).unwrap();
        let m = measure_modulus(&hp, 8).unwrap();
        assert!(m.l.iter().all(|&l| l == 1));
    }

    #[test]
    fn rotation_modulus_is_measured() {
        let r = Rotation::new(12).unwrap();
        let hp = Reparametrized::new(&r, 4).unwrap();
        let m = measure_modulus(&hp, 8).unwrap();
        assert!(m.l.windows(2).all(|w| w[0] <= w[1]));
        assert!(m.l.iter().all(|&l| (1..=4).contains(&l)));
        assert!(matches!(measure_modulus(&Reparametrized::new(&r, 1).unwrap(), 8), Err(Error::TooCoarse(_))));
    }
}
