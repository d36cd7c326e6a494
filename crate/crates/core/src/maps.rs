//! Sampled maps and their certified coarse predicates.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{from_ticks, q, qi, strict_ticks, weak_ticks, Q};
use crate::space::{Domain, PointSubset, Space};

/// Thresholds and budgets shared by every certifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertConfig {
    /// Largest pair count scanned exhaustively.
    pub pair_budget: u64,
    /// Pairs drawn when the exhaustive scan is over budget.
    pub sample_pairs: u64,
    pub seed: u64,
    /// Pairs closer than this are always scanned exhaustively.
    pub local_radius: Q,
    pub local_point_budget: u64,
    /// Largest accepted `rho_upper(R_int) / R_int`.
    pub slope_limit: Q,
    /// Properness threshold as a fraction of `R_int`.
    pub proper_fraction: Q,
    /// Lower-growth threshold for `rho_lower(R_int / 2)`, as a fraction of `R_int`.
    pub growth_fraction: Q,
    pub shell_width: Q,
    /// Largest domain whose whole lower envelope is tabulated.
    pub envelope_point_budget: u64,
}

impl Default for CertConfig {
    fn default() -> Self {
        CertConfig {
            pair_budget: 100_000_000,
            sample_pairs: 1_000_000,
            seed: 0x5eed,
            local_radius: qi(1),
            local_point_budget: 50_000_000,
            slope_limit: qi(8),
            proper_fraction: q(1, 8),
            growth_fraction: q(1, 8),
            shell_width: qi(1),
            envelope_point_budget: 50_000_000,
        }
    }
}

/// A map given pointwise on a finite domain.
pub trait PointMap: Sync {
    fn domain(&self) -> &dyn Domain;
    fn target(&self) -> &Space;
    fn image(&self, i: usize) -> usize;
}

/// A map recorded on every point of its source.
#[derive(Clone)]
pub struct MapSample {
    source: Arc<dyn Domain>,
    target: Arc<Space>,
    values: Vec<u32>,
    label: String,
}

impl std::fmt::Debug for MapSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MapSample({}: {} -> {})", self.label, self.source.signature(), self.target.label())
    }
}

impl PointMap for MapSample {
    fn domain(&self) -> &dyn Domain {
        &*self.source
    }

    fn target(&self) -> &Space {
        &self.target
    }

    fn image(&self, i: usize) -> usize {
        self.values[i] as usize
    }
}

impl MapSample {
    pub fn new(source: Arc<dyn Domain>, target: &Arc<Space>, values: Vec<u32>, label: &str) -> Result<Self> {
        if values.len() != source.len() {
            return Err(Error::DomainMismatch(format!(
                "map has {} values for {} source points",
                values.len(),
                source.len()
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| v as usize >= target.len()) {
            return Err(Error::DomainMismatch(format!("value {v} is not a point of {}", target.label())));
        }
        Ok(MapSample { source, target: target.clone(), values, label: label.to_string() })
    }

    pub fn from_fn(source: Arc<dyn Domain>, target: &Arc<Space>, label: &str, f: impl Fn(usize) -> usize) -> Result<Self> {
        let values = (0..source.len()).map(|i| f(i) as u32).collect();
        MapSample::new(source, target, values, label)
    }

    pub fn identity(space: &Arc<Space>) -> Self {
        let values = (0..space.len() as u32).collect();
        MapSample { source: space.clone(), target: space.clone(), values, label: "id".into() }
    }

    pub fn constant(source: Arc<dyn Domain>, target: &Arc<Space>, point: usize) -> Self {
        let values = vec![point as u32; source.len()];
        MapSample { source, target: target.clone(), values, label: format!("const({})", target.point_name(point)) }
    }

    /// Inclusion of a subset into its ambient space.
    pub fn inclusion(subset: &PointSubset) -> Self {
        MapSample {
            source: Arc::new(subset.clone()),
            target: subset.space().clone(),
            values: subset.members().to_vec(),
            label: "inclusion".into(),
        }
    }

    /// `x -> floor(x)` from a sampled line onto a one-dimensional grid.
    pub fn floor_map(line: &Arc<Space>, ints: &Arc<Space>) -> Result<Self> {
        if ints.grid().is_none_or(|g| g.dim() != 1) {
            return Err(Error::Precondition("floor map targets grid(1,R)".into()));
        }
        MapSample::from_fn(line.clone(), ints, "floor", |i| {
            let v = line.line_value(i).expect("floor map needs a sampled line");
            let k = v.floor().to_integer() as i32;
            ints.grid_point(&[k]).expect("floor lands inside the integer ball")
        })
    }

    /// Inclusion of integers into a sampled line containing them.
    pub fn integer_inclusion(ints: &Arc<Space>, line: &Arc<Space>) -> Result<Self> {
        let step = line.unit();
        if !(qi(1) / step).is_integer() {
            return Err(Error::Precondition("line step must divide 1".into()));
        }
        let per = (qi(1) / step).to_integer();
        let g = ints.grid().ok_or_else(|| Error::Precondition("integer inclusion needs grid(1,R)".into()))?;
        MapSample::from_fn(ints.clone(), line, "inclusion", |i| {
            line.line_point(g.coords(i)[0] as i64 * per).expect("integer inside line")
        })
    }

    pub fn source(&self) -> &Arc<dyn Domain> {
        &self.source
    }

    pub fn target_space(&self) -> &Arc<Space> {
        &self.target
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.label = label.to_string();
        self
    }

    /// `g ∘ self`; `g` must be defined on this map's target.
    pub fn then(&self, g: &MapSample) -> Result<MapSample> {
        if g.source.signature() != self.target.signature() {
            return Err(Error::DomainMismatch(format!(
                "cannot compose: {} is not {}",
                g.source.signature(),
                self.target.signature()
            )));
        }
        let values = self.values.iter().map(|&v| g.values[v as usize]).collect();
        Ok(MapSample {
            source: self.source.clone(),
            target: g.target.clone(),
            values,
            label: format!("{}∘{}", g.label, self.label),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ScanMode {
    Exact,
    Sampled { seed: u64, pairs: u64, local_exact: bool },
}

/// Tightest control functions observed on the sampled distance grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlBounds {
    pub source_unit: Q,
    pub target_unit: Q,
    /// Observed source distances, in source ticks, ascending.
    pub grid_ticks: Vec<u64>,
    /// Prefix-maximum of image distances, in target ticks.
    pub upper_ticks: Vec<u64>,
    /// Suffix-minimum of image distances, in target ticks.
    pub lower_ticks: Vec<u64>,
    pub pairs_scanned: u64,
    pub scan: ScanMode,
}

impl ControlBounds {
    pub fn sample_grid(&self) -> Vec<Q> {
        self.grid_ticks.iter().map(|&t| from_ticks(t, self.source_unit)).collect()
    }

    pub fn rho_upper(&self) -> Vec<Q> {
        self.upper_ticks.iter().map(|&t| from_ticks(t, self.target_unit)).collect()
    }

    pub fn rho_lower(&self) -> Vec<Q> {
        self.lower_ticks.iter().map(|&t| from_ticks(t, self.target_unit)).collect()
    }

    /// `max{d(fx, fx') : d(x,x') <= r}`; zero below the first sample.
    pub fn rho_upper_at(&self, r: Q) -> Q {
        let Some(t) = weak_ticks(r, self.source_unit) else { return qi(0) };
        let k = self.grid_ticks.partition_point(|&g| g <= t);
        if k == 0 {
            qi(0)
        } else {
            from_ticks(self.upper_ticks[k - 1], self.target_unit)
        }
    }

    /// `min{d(fx, fx') : d(x,x') >= r}`; `None` when no pair is that far apart.
    pub fn rho_lower_at(&self, r: Q) -> Option<Q> {
        let t = strict_ticks(r, self.source_unit);
        let k = self.grid_ticks.partition_point(|&g| g < t);
        self.lower_ticks.get(k).map(|&v| from_ticks(v, self.target_unit))
    }

    pub fn is_exact(&self) -> bool {
        self.scan == ScanMode::Exact
    }
}

struct Extremes {
    max: Vec<u64>,
    min: Vec<u64>,
    pairs: u64,
}

impl Extremes {
    fn new(size: usize) -> Self {
        Extremes { max: vec![0; size], min: vec![u64::MAX; size], pairs: 0 }
    }

    #[inline]
    fn record(&mut self, s: u64, v: u64) {
        let s = s as usize;
        if v > self.max[s] {
            self.max[s] = v;
        }
        if v < self.min[s] {
            self.min[s] = v;
        }
        self.pairs += 1;
    }

    fn merge(mut self, other: Extremes) -> Extremes {
        for (a, b) in self.max.iter_mut().zip(other.max) {
            *a = (*a).max(b);
        }
        for (a, b) in self.min.iter_mut().zip(other.min) {
            *a = (*a).min(b);
        }
        self.pairs += other.pairs;
        self
    }
}

fn scan_size(dom: &dyn Domain) -> usize {
    2 * dom.max_norm_ticks() as usize + 2
}

/// Exact or seeded-sampled scan of image distances against source distances.
pub fn estimate_control(map: &dyn PointMap, cfg: &CertConfig) -> Result<ControlBounds> {
    let dom = map.domain();
    let tgt = map.target();
    let n = dom.len();
    if n < 2 {
        return Err(Error::Precondition("control estimation needs at least two source points".into()));
    }
    let size = scan_size(dom);
    let total_pairs = n as u128 * (n as u128 - 1) / 2;
    let (ext, scan) = if total_pairs <= cfg.pair_budget as u128 {
        let images: Vec<u32> = (0..n).into_par_iter().map(|i| map.image(i) as u32).collect();
        let ext = (0..n)
            .into_par_iter()
            .fold(
                || Extremes::new(size),
                |mut acc, i| {
                    let fi = images[i] as usize;
                    for j in i + 1..n {
                        acc.record(dom.dist_ticks(i, j), tgt.dist_ticks(fi, images[j] as usize));
                    }
                    acc
                },
            )
            .reduce(|| Extremes::new(size), Extremes::merge);
        (ext, ScanMode::Exact)
    } else {
        let local_ticks = weak_ticks(cfg.local_radius, dom.unit()).unwrap_or(0);
        let local_exact = (n as u64) <= cfg.local_point_budget && local_ticks > 0;
        let mut ext = if local_exact {
            (0..n)
                .into_par_iter()
                .fold(
                    || (Extremes::new(size), Vec::new()),
                    |(mut acc, mut close), i| {
                        dom.close_points(i, local_ticks, &mut close);
                        let fi = map.image(i);
                        for &j in close.iter().filter(|&&j| j > i) {
                            acc.record(dom.dist_ticks(i, j), tgt.dist_ticks(fi, map.image(j)));
                        }
                        (acc, close)
                    },
                )
                .map(|(acc, _)| acc)
                .reduce(|| Extremes::new(size), Extremes::merge)
        } else {
            Extremes::new(size)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut close = Vec::new();
        for k in 0..cfg.sample_pairs {
            let i = rng.gen_range(0..n);
            let j = if k % 2 == 0 || local_ticks == 0 {
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                j
            } else {
                dom.close_points(i, local_ticks, &mut close);
                close[rng.gen_range(0..close.len())]
            };
            if i != j {
                ext.record(dom.dist_ticks(i, j), tgt.dist_ticks(map.image(i), map.image(j)));
            }
        }
        (ext, ScanMode::Sampled { seed: cfg.seed, pairs: cfg.sample_pairs, local_exact })
    };
    let mut grid_ticks = Vec::new();
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut run_max = 0;
    for s in 0..size {
        if ext.min[s] != u64::MAX {
            run_max = run_max.max(ext.max[s]);
            grid_ticks.push(s as u64);
            upper.push(run_max);
            lower.push(ext.min[s]);
        }
    }
    for k in (0..lower.len().saturating_sub(1)).rev() {
        lower[k] = lower[k].min(lower[k + 1]);
    }
    Ok(ControlBounds {
        source_unit: dom.unit(),
        target_unit: tgt.unit(),
        grid_ticks,
        upper_ticks: upper,
        lower_ticks: lower,
        pairs_scanned: ext.pairs,
        scan,
    })
}

/// Truncation-relative control verdict: slope at `R_int` and lower growth.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlCertificate {
    pub bounds: ControlBounds,
    pub interior_radius: Q,
    pub upper_at_interior: Q,
    pub slope_limit: Q,
    pub controlled: bool,
    pub lower_at_half_interior: Option<Q>,
    pub growth_threshold: Q,
    pub lower_growth: bool,
}

pub fn certify_control(map: &dyn PointMap, cfg: &CertConfig) -> Result<ControlCertificate> {
    let bounds = estimate_control(map, cfg)?;
    let dom = map.domain();
    let r_int = from_ticks(dom.interior_ticks(), dom.unit());
    let upper = bounds.rho_upper_at(r_int);
    let controlled = r_int == qi(0) || upper <= cfg.slope_limit * r_int;
    let lower = bounds.rho_lower_at(r_int / qi(2));
    let growth_threshold = cfg.growth_fraction * r_int;
    let lower_growth = lower.is_some_and(|l| l >= growth_threshold);
    Ok(ControlCertificate {
        bounds,
        interior_radius: r_int,
        upper_at_interior: upper,
        slope_limit: cfg.slope_limit,
        controlled,
        lower_at_half_interior: lower,
        growth_threshold,
        lower_growth,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub shell_start: Q,
    /// `min ||f(x)||` over the shell.
    pub raw: Q,
    /// Suffix minimum up to the interior shell; absent beyond it.
    pub monotone: Option<Q>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tabulation {
    Full,
    /// Only the shells needed for the verdict were enumerated.
    InteriorOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointWitness {
    pub point: String,
    pub norm: Q,
    pub image: String,
    pub image_norm: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropernessCertificate {
    pub shell_width: Q,
    pub interior_radius: Q,
    pub threshold: Q,
    pub tabulation: Tabulation,
    pub lower_envelope: Vec<EnvelopeRow>,
    pub empty_shells: Vec<Q>,
    /// Envelope at the first nonempty shell at or beyond `R_int`.
    pub value_at_interior: Option<Q>,
    pub witness: Option<PointWitness>,
    pub vacuous: bool,
    pub passed: bool,
}

/// Shell-wise lower envelope of image norms; passes iff it exceeds
/// `threshold` at the interior radius.
pub fn check_proper(map: &dyn PointMap, threshold: Q, cfg: &CertConfig) -> PropernessCertificate {
    let dom = map.domain();
    let tgt = map.target();
    let width = strict_ticks(cfg.shell_width, dom.unit()).max(1);
    let int_shell = dom.interior_ticks() / width;
    let max_shell = dom.max_norm_ticks() / width;
    let shells = max_shell as usize + 1;
    let unit = dom.unit();

    // (min image norm, argmin) per shell.
    let mut best: Vec<(u64, usize)> = vec![(u64::MAX, usize::MAX); shells];
    let tabulation = if (dom.len() as u64) <= cfg.envelope_point_budget {
        best = (0..dom.len())
            .into_par_iter()
            .fold(
                || vec![(u64::MAX, usize::MAX); shells],
                |mut acc, i| {
                    let s = (dom.norm_ticks(i) / width) as usize;
                    let v = tgt.norm_ticks(map.image(i));
                    if (v, i) < acc[s] {
                        acc[s] = (v, i);
                    }
                    acc
                },
            )
            .reduce(
                || vec![(u64::MAX, usize::MAX); shells],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        if y < *x {
                            *x = y;
                        }
                    }
                    a
                },
            );
        Tabulation::Full
    } else {
        let mut pts = Vec::new();
        let mut s = int_shell;
        while s <= max_shell {
            dom.shell_points(s * width, (s + 1) * width, &mut pts);
            if !pts.is_empty() {
                best[s as usize] = pts
                    .par_iter()
                    .map(|&i| (tgt.norm_ticks(map.image(i)), i))
                    .min()
                    .unwrap();
                break;
            }
            s += 1;
        }
        Tabulation::InteriorOnly
    };

    let interior = (int_shell..=max_shell).map(|s| s as usize).find(|&s| best[s].0 != u64::MAX);
    let mut rows = Vec::new();
    let mut empty = Vec::new();
    let last = interior.unwrap_or(shells.saturating_sub(1).min(int_shell as usize));
    let mut suffix = u64::MAX;
    let mut mono = vec![None; shells];
    for s in (0..=last.min(shells - 1)).rev() {
        if best[s].0 != u64::MAX {
            suffix = suffix.min(best[s].0);
            mono[s] = Some(suffix);
        }
    }
    let listed = if tabulation == Tabulation::Full { shells } else { last + 1 };
    for s in 0..listed {
        let start = from_ticks(s as u64 * width, unit);
        if best[s].0 == u64::MAX {
            if tabulation == Tabulation::Full || s >= int_shell as usize {
                empty.push(start);
            }
            continue;
        }
        rows.push(EnvelopeRow {
            shell_start: start,
            raw: from_ticks(best[s].0, tgt.unit()),
            monotone: if s <= last { mono[s].map(|v| from_ticks(v, tgt.unit())) } else { None },
        });
    }
    let value = interior.map(|s| from_ticks(best[s].0, tgt.unit()));
    let witness = interior.map(|s| {
        let i = best[s].1;
        let y = map.image(i);
        PointWitness {
            point: dom.describe_point(i),
            norm: from_ticks(dom.norm_ticks(i), unit),
            image: tgt.point_name(y),
            image_norm: tgt.norm(y),
        }
    });
    let passed = value.is_none_or(|v| v > threshold);
    PropernessCertificate {
        shell_width: from_ticks(width, unit),
        interior_radius: from_ticks(dom.interior_ticks(), unit),
        threshold,
        tabulation,
        lower_envelope: rows,
        empty_shells: empty,
        value_at_interior: value,
        witness,
        vacuous: interior.is_none(),
        passed,
    }
}

/// Default properness threshold for a domain: `proper_fraction * R_int`.
pub fn default_proper_threshold(dom: &dyn Domain, cfg: &CertConfig) -> Q {
    cfg.proper_fraction * from_ticks(dom.interior_ticks(), dom.unit())
}

/// `max_x d(f(x), g(x))`.
pub fn closeness(f: &MapSample, g: &MapSample) -> Result<Q> {
    if f.source.signature() != g.source.signature() || f.target.signature() != g.target.signature() {
        return Err(Error::DomainMismatch(format!(
            "closeness needs a common signature: {} -> {} vs {} -> {}",
            f.source.signature(),
            f.target.label(),
            g.source.signature(),
            g.target.label()
        )));
    }
    let t = f
        .values
        .par_iter()
        .zip(&g.values)
        .map(|(&a, &b)| f.target.dist_ticks(a as usize, b as usize))
        .max()
        .unwrap_or(0);
    Ok(from_ticks(t, f.target.unit()))
}

/// Pointwise distance witness for closeness failures.
pub fn farthest_point(f: &MapSample, g: &MapSample) -> Option<(usize, Q)> {
    (0..f.values.len())
        .map(|i| (i, f.target.dist_ticks(f.values[i] as usize, g.values[i] as usize)))
        .max_by_key(|&(i, d)| (d, std::cmp::Reverse(i)))
        .map(|(i, d)| (i, from_ticks(d, f.target.unit())))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoarseEquivalenceCertificate {
    pub bound: Q,
    pub closeness_gf: Q,
    pub closeness_fg: Q,
    pub control_f: ControlCertificate,
    pub control_g: ControlCertificate,
    pub proper_f: PropernessCertificate,
    pub proper_g: PropernessCertificate,
    pub failures: Vec<String>,
    pub passed: bool,
}

pub fn check_coarse_equivalence(f: &MapSample, g: &MapSample, bound: Q, cfg: &CertConfig) -> Result<CoarseEquivalenceCertificate> {
    let x = f.source.clone();
    let y = f.target.clone();
    if g.source.signature() != y.signature() || g.target.signature() != x.signature() {
        return Err(Error::DomainMismatch("f and g must run between the same spaces in opposite directions".into()));
    }
    let gf = f.then(g)?;
    let fg = g.then(f)?;
    let id_x = MapSample::from_fn(x.clone(), g.target_space(), "id", |i| i)?;
    let id_y = MapSample::identity(&y);
    let closeness_gf = closeness(&gf, &id_x)?;
    let closeness_fg = closeness(&fg, &id_y)?;
    let control_f = certify_control(f, cfg)?;
    let control_g = certify_control(g, cfg)?;
    let proper_f = check_proper(f, default_proper_threshold(f.domain(), cfg), cfg);
    let proper_g = check_proper(g, default_proper_threshold(g.domain(), cfg), cfg);
    let mut failures = Vec::new();
    if closeness_gf > bound {
        let (i, d) = farthest_point(&gf, &id_x).unwrap();
        failures.push(format!("g∘f is {d} from id at {}", x.describe_point(i)));
    }
    if closeness_fg > bound {
        let (i, d) = farthest_point(&fg, &id_y).unwrap();
        failures.push(format!("f∘g is {d} from id at {}", y.point_name(i)));
    }
    for (name, c, p) in [("f", &control_f, &proper_f), ("g", &control_g, &proper_g)] {
        if !c.controlled {
            failures.push(format!("{name} exceeds the slope limit at R_int: rho_upper = {}", c.upper_at_interior));
        }
        if !c.lower_growth {
            failures.push(format!(
                "{name} lower control {:?} below growth threshold {}",
                c.lower_at_half_interior, c.growth_threshold
            ));
        }
        if !p.passed {
            failures.push(format!("{name} not proper at R_int: envelope {:?}", p.value_at_interior));
        }
    }
    Ok(CoarseEquivalenceCertificate {
        bound,
        closeness_gf,
        closeness_fg,
        control_f,
        control_g,
        proper_f,
        proper_g,
        passed: failures.is_empty(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_grid_space, build_sampled_line};

    #[test]
    fn identity_is_isometric() {
        let s = build_grid_space(2, 10).unwrap();
        let b = estimate_control(&MapSample::identity(&s), &CertConfig::default()).unwrap();
        assert!(b.is_exact());
        assert_eq!(b.rho_upper(), b.sample_grid());
        assert_eq!(b.rho_lower(), b.sample_grid());
    }

    #[test]
    fn constant_map_has_zero_upper_control() {
        let s = build_grid_space(2, 6).unwrap();
        let c = MapSample::constant(s.clone(), &s, s.basepoint());
        let b = estimate_control(&c, &CertConfig::default()).unwrap();
        assert!(b.upper_ticks.iter().all(|&v| v == 0));
        assert!(!check_proper(&c, qi(1), &CertConfig::default()).passed);
    }

    #[test]
    fn floor_closeness_is_half() {
        let line = build_sampled_line(q(1, 2), qi(100)).unwrap();
        let ints = build_grid_space(1, 100).unwrap();
        let f = MapSample::floor_map(&line, &ints).unwrap();
        let i = MapSample::integer_inclusion(&ints, &line).unwrap();
        let back = f.then(&i).unwrap();
        let id = MapSample::identity(&line);
        assert_eq!(closeness(&back, &id).unwrap(), q(1, 2));
        assert_eq!(closeness(&i.then(&f).unwrap(), &MapSample::identity(&ints)).unwrap(), qi(0));
    }

    #[test]
    fn sampled_mode_is_seeded() {
        let s = build_grid_space(2, 12).unwrap();
        let cfg = CertConfig { pair_budget: 10, sample_pairs: 5000, ..CertConfig::default() };
        let a = estimate_control(&MapSample::identity(&s), &cfg).unwrap();
        let b = estimate_control(&MapSample::identity(&s), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a.scan, ScanMode::Sampled { local_exact: true, .. }));
        assert_eq!(a.rho_upper_at(qi(1)), qi(1));
    }
}
