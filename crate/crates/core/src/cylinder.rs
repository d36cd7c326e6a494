//! Discretized p-cylinders, homotopies on them, and categoricity checks.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{
    certify_control, check_proper, closeness, default_proper_threshold, farthest_point, CertConfig, ControlCertificate,
    MapSample, PointMap, PropernessCertificate,
};
use crate::rational::{exact_ticks, from_ticks, qgcd, qi, Q};
use crate::space::{build_half_line, Domain, PointSubset, Ray, Space};

/// Cylinders at most this large cache a per-point decode table.
const DECODE_CACHE_LIMIT: u64 = 8_000_000;

/// `{(x,t) : t <= p(x)}` sampled at multiples of `t_step` plus the top
/// point `(x, p(x))`, with the sup metric.
pub struct CylinderSample {
    base: Arc<dyn Domain>,
    unit: Q,
    /// Cylinder ticks per base tick.
    factor: u64,
    t_step: u64,
    projection: Vec<u64>,
    offsets: Vec<u64>,
    projection_label: String,
    decode: Option<Vec<(u32, u32)>>,
}

impl std::fmt::Debug for CylinderSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cylinder(over {}, {} points)", self.base.signature(), self.len())
    }
}

impl CylinderSample {
    /// Cylinder over `base` with the norm projection.
    pub fn over_norm(base: Arc<dyn Domain>, t_step: Q) -> Result<Self> {
        let p: Vec<Q> = (0..base.len()).map(|i| from_ticks(base.norm_ticks(i), base.unit())).collect();
        CylinderSample::new(base, &p, t_step, "norm")
    }

    pub fn new(base: Arc<dyn Domain>, projection: &[Q], t_step: Q, label: &str) -> Result<Self> {
        if projection.len() != base.len() {
            return Err(Error::DomainMismatch("projection must be defined on every base point".into()));
        }
        if t_step <= qi(0) {
            return Err(Error::Precondition("t_step must be positive".into()));
        }
        let mut unit = qgcd(base.unit(), t_step);
        for &p in projection {
            if p < qi(0) {
                return Err(Error::Precondition(format!("negative projection value {p}")));
            }
            unit = qgcd(unit, p);
        }
        let factor = exact_ticks(base.unit(), unit).unwrap();
        let step = exact_ticks(t_step, unit).unwrap();
        let proj: Vec<u64> = projection.iter().map(|&p| exact_ticks(p, unit).unwrap()).collect();
        let mut offsets = Vec::with_capacity(proj.len() + 1);
        let mut total = 0u64;
        offsets.push(0);
        for &p in &proj {
            total = total
                .checked_add(p / step + 1 + u64::from(p % step != 0))
                .ok_or_else(|| Error::capacity("cylinder", u128::MAX, u64::MAX as u128))?;
            offsets.push(total);
        }
        let mut cyl = CylinderSample {
            base,
            unit,
            factor,
            t_step: step,
            projection: proj,
            offsets,
            projection_label: label.to_string(),
            decode: None,
        };
        if total <= DECODE_CACHE_LIMIT {
            let mut table = Vec::with_capacity(total as usize);
            for x in 0..cyl.base.len() {
                for j in 0..cyl.count(x) {
                    table.push((x as u32, j as u32));
                }
            }
            cyl.decode = Some(table);
        }
        Ok(cyl)
    }

    pub fn base(&self) -> &Arc<dyn Domain> {
        &self.base
    }

    pub fn t_step(&self) -> Q {
        from_ticks(self.t_step, self.unit)
    }

    pub fn t_step_ticks(&self) -> u64 {
        self.t_step
    }

    /// Cylinder ticks per base tick.
    pub fn factor(&self) -> u64 {
        self.factor
    }

    pub fn projection_label(&self) -> &str {
        &self.projection_label
    }

    pub fn projection_ticks(&self, x: usize) -> u64 {
        self.projection[x]
    }

    pub fn projection(&self, x: usize) -> Q {
        from_ticks(self.projection[x], self.unit)
    }

    fn count(&self, x: usize) -> u64 {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Time values (ticks) sampled above `x`, ascending.
    pub fn times(&self, x: usize) -> impl Iterator<Item = u64> + '_ {
        let p = self.projection[x];
        (0..self.count(x)).map(move |j| (j * self.t_step).min(p))
    }

    pub fn index(&self, x: usize, j: u64) -> usize {
        (self.offsets[x] + j) as usize
    }

    /// Index of `(x, t)` if `t` is a sampled time above `x`.
    pub fn index_of(&self, x: usize, t: u64) -> Option<usize> {
        let p = self.projection[x];
        if t == p {
            return Some(self.index(x, self.count(x) - 1));
        }
        (t < p && t.is_multiple_of(self.t_step)).then(|| self.index(x, t / self.t_step))
    }

    /// `(x, t)` of cylinder point `i`.
    pub fn locate(&self, i: usize) -> (usize, u64) {
        let (x, j) = match &self.decode {
            Some(table) => {
                let (x, j) = table[i];
                (x as usize, j as u64)
            }
            None => {
                let x = self.offsets.partition_point(|&o| o <= i as u64) - 1;
                (x, i as u64 - self.offsets[x])
            }
        };
        (x, (j * self.t_step).min(self.projection[x]))
    }

    pub fn bottom(&self, x: usize) -> usize {
        self.index(x, 0)
    }

    pub fn top(&self, x: usize) -> usize {
        self.index(x, self.count(x) - 1)
    }
}

impl Domain for CylinderSample {
    fn len(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    fn unit(&self) -> Q {
        self.unit
    }

    fn dist_ticks(&self, i: usize, j: usize) -> u64 {
        let (x, t) = self.locate(i);
        let (y, s) = self.locate(j);
        (self.base.dist_ticks(x, y) * self.factor).max(t.abs_diff(s))
    }

    fn norm_ticks(&self, i: usize) -> u64 {
        let (x, t) = self.locate(i);
        (self.base.norm_ticks(x) * self.factor).max(t)
    }

    fn signature(&self) -> String {
        format!("cyl[{}|{}|{}]", self.base.signature(), self.projection_label, self.t_step())
    }

    fn interior_ticks(&self) -> u64 {
        self.base.interior_ticks() * self.factor
    }

    fn max_norm_ticks(&self) -> u64 {
        (0..self.base.len())
            .map(|x| (self.base.norm_ticks(x) * self.factor).max(self.projection[x]))
            .max()
            .unwrap_or(0)
    }

    fn close_points(&self, i: usize, ticks: u64, out: &mut Vec<usize>) {
        let (x, t) = self.locate(i);
        let mut near = Vec::new();
        self.base.close_points(x, ticks / self.factor, &mut near);
        out.clear();
        let lo = t.saturating_sub(ticks);
        let hi = t + ticks;
        for y in near {
            let p = self.projection[y];
            let first = lo.div_ceil(self.t_step);
            let last = (hi / self.t_step).min(p / self.t_step);
            for j in first..=last {
                if j * self.t_step <= p {
                    out.push(self.index(y, j));
                }
            }
            if !p.is_multiple_of(self.t_step) && p >= lo && p <= hi {
                out.push(self.top(y));
            }
        }
    }

    fn shell_points(&self, lo: u64, hi: u64, out: &mut Vec<usize>) {
        out.clear();
        if hi == 0 {
            return;
        }
        for x in 0..self.base.len() {
            let n = self.base.norm_ticks(x) * self.factor;
            if n >= hi {
                continue;
            }
            // max(n, t) in [lo, hi) iff t < hi, and t >= lo unless n already is.
            let p = self.projection[x];
            let t_lo = if n >= lo { 0 } else { lo };
            let first = t_lo.div_ceil(self.t_step);
            let last = ((hi - 1) / self.t_step).min(p / self.t_step);
            for j in first..=last {
                out.push(self.index(x, j));
            }
            if !p.is_multiple_of(self.t_step) && p >= t_lo && p < hi {
                out.push(self.top(x));
            }
        }
    }

    fn describe_point(&self, i: usize) -> String {
        let (x, t) = self.locate(i);
        format!("({}, {})", self.base.describe_point(x), from_ticks(t, self.unit))
    }
}

/// A map on a cylinder, evaluated at `(x, t)` with `t` in cylinder ticks.
pub trait CylinderMap: Sync + Send {
    fn cylinder(&self) -> &CylinderSample;
    fn target(&self) -> &Arc<Space>;
    fn eval(&self, x: usize, t: u64) -> usize;
    fn label(&self) -> String {
        "H".into()
    }
}

/// Views a cylinder map as a point map on the cylinder domain.
pub struct OnCylinder<'a>(pub &'a dyn CylinderMap);

impl PointMap for OnCylinder<'_> {
    fn domain(&self) -> &dyn Domain {
        self.0.cylinder()
    }

    fn target(&self) -> &Space {
        self.0.target()
    }

    fn image(&self, i: usize) -> usize {
        let (x, t) = self.0.cylinder().locate(i);
        self.0.eval(x, t)
    }
}

/// A homotopy tabulated on every cylinder point.
pub struct HomotopySample {
    cylinder: Arc<CylinderSample>,
    target: Arc<Space>,
    values: Vec<u32>,
    label: String,
}

impl HomotopySample {
    pub fn new(cylinder: Arc<CylinderSample>, target: &Arc<Space>, values: Vec<u32>, label: &str) -> Result<Self> {
        if values.len() != cylinder.len() {
            return Err(Error::DomainMismatch("homotopy must be total on its cylinder".into()));
        }
        if values.iter().any(|&v| v as usize >= target.len()) {
            return Err(Error::DomainMismatch("homotopy value outside target".into()));
        }
        Ok(HomotopySample { cylinder, target: target.clone(), values, label: label.to_string() })
    }

    /// Tabulates any cylinder map.
    pub fn tabulate(h: &dyn CylinderMap) -> Result<Self>
    where
        Self: Sized,
    {
        let cyl = h.cylinder();
        let values = (0..cyl.len())
            .into_par_iter()
            .map(|i| {
                let (x, t) = cyl.locate(i);
                h.eval(x, t) as u32
            })
            .collect();
        // Rebuilding the cylinder keeps the sample self-contained.
        let projection: Vec<Q> = (0..cyl.base().len()).map(|x| cyl.projection(x)).collect();
        let copy = CylinderSample::new(cyl.base().clone(), &projection, cyl.t_step(), cyl.projection_label())?;
        HomotopySample::new(Arc::new(copy), h.target(), values, &h.label())
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn cylinder_arc(&self) -> &Arc<CylinderSample> {
        &self.cylinder
    }
}

impl CylinderMap for HomotopySample {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        &self.target
    }

    fn eval(&self, x: usize, t: u64) -> usize {
        let i = self.cylinder.index_of(x, t).expect("sampled cylinder time");
        self.values[i] as usize
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// A cylinder map given by a closure.
pub struct FnHomotopy<F> {
    pub cylinder: CylinderSample,
    pub target: Arc<Space>,
    pub label: String,
    pub f: F,
}

impl<F: Fn(usize, u64) -> usize + Sync + Send> CylinderMap for FnHomotopy<F> {
    fn cylinder(&self) -> &CylinderSample {
        &self.cylinder
    }

    fn target(&self) -> &Arc<Space> {
        &self.target
    }

    fn eval(&self, x: usize, t: u64) -> usize {
        (self.f)(x, t)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// `H ∘ i₀`.
pub fn bottom_slice(h: &dyn CylinderMap) -> MapSample {
    let base = h.cylinder().base().clone();
    let values = (0..base.len()).map(|x| h.eval(x, 0) as u32).collect();
    MapSample::new(base, h.target(), values, "H∘i0").unwrap()
}

/// `H ∘ i₁`.
pub fn top_slice(h: &dyn CylinderMap) -> MapSample {
    let cyl = h.cylinder();
    let base = cyl.base().clone();
    let values = (0..base.len()).map(|x| h.eval(x, cyl.projection_ticks(x)) as u32).collect();
    MapSample::new(base, h.target(), values, "H∘i1").unwrap()
}

/// Two-slice homotopy `H(x,0) = f(x)`, `H(x,p(x)) = g(x)` over the norm
/// projection; at the basepoint only the bottom slice exists.
pub fn two_slice_homotopy(f: &MapSample, g: &MapSample) -> Result<HomotopySample> {
    if f.source().signature() != g.source().signature() || f.target_space().signature() != g.target_space().signature() {
        return Err(Error::DomainMismatch("two-slice homotopy needs f and g with a common signature".into()));
    }
    let base = f.source().clone();
    let step = from_ticks(base.max_norm_ticks() + 1, base.unit());
    let cyl = CylinderSample::over_norm(base, step)?;
    let values = (0..cyl.len())
        .map(|i| {
            let (x, t) = cyl.locate(i);
            if t == 0 {
                f.values()[x]
            } else {
                g.values()[x]
            }
        })
        .collect();
    HomotopySample::new(Arc::new(cyl), f.target_space(), values, "two-slice")
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HomotopyCertificate {
    pub label: String,
    pub cylinder_points: u64,
    pub bound: Q,
    pub closeness_bottom: Q,
    pub closeness_top: Q,
    pub control: ControlCertificate,
    pub properness: PropernessCertificate,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Endpoint closeness to `f` and `g` plus control and properness of `H` as a
/// map from the cylinder.
pub fn verify_homotopy(h: &dyn CylinderMap, f: &MapSample, g: &MapSample, bound: Q, cfg: &CertConfig) -> Result<HomotopyCertificate> {
    let bottom = bottom_slice(h);
    let top = top_slice(h);
    let closeness_bottom = closeness(&bottom, f)?;
    let closeness_top = closeness(&top, g)?;
    let view = OnCylinder(h);
    let control = certify_control(&view, cfg)?;
    let properness = check_proper(&view, default_proper_threshold(h.cylinder(), cfg), cfg);
    let mut failures = Vec::new();
    let base = h.cylinder().base();
    if closeness_bottom > bound {
        let (x, d) = farthest_point(&bottom, f).unwrap();
        failures.push(format!("H∘i0 is {d} from f at {}", base.describe_point(x)));
    }
    if closeness_top > bound {
        let (x, d) = farthest_point(&top, g).unwrap();
        failures.push(format!("H∘i1 is {d} from g at {}", base.describe_point(x)));
    }
    if !control.controlled {
        failures.push(format!(
            "H exceeds slope {} at R_int: rho_upper = {}",
            control.slope_limit, control.upper_at_interior
        ));
    }
    if !properness.passed {
        let w = properness.witness.as_ref().unwrap();
        failures.push(format!(
            "H not proper: {} (norm {}) maps to {} (norm {}) <= {}",
            w.point, w.norm, w.image, w.image_norm, properness.threshold
        ));
    }
    Ok(HomotopyCertificate {
        label: h.label(),
        cylinder_points: h.cylinder().len() as u64,
        bound,
        closeness_bottom,
        closeness_top,
        control,
        properness,
        passed: failures.is_empty(),
        failures,
    })
}

/// Data witnessing that a subset is coarsely categorical.
pub struct CategoricityCertificate {
    pub subset: PointSubset,
    pub ray: Ray,
    /// Ray parameter per subset member.
    pub j_map: Vec<u32>,
    pub homotopy: Arc<dyn CylinderMap>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CategoricityReport {
    pub subset_size: u64,
    pub ray: String,
    pub j_control: Option<ControlCertificate>,
    pub j_properness: PropernessCertificate,
    pub homotopy: HomotopyCertificate,
    pub closeness_at_top: Q,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl CategoricityCertificate {
    /// `j` as a map into the half-line sampled at the ray step.
    pub fn j_sample(&self) -> Result<MapSample> {
        let half = build_half_line(self.ray.step(), self.ray.step() * qi(self.ray.len() as i64 - 1))?;
        MapSample::new(Arc::new(self.subset.clone()), &half, self.j_map.clone(), "j")
    }

    /// `α ∘ j` as a map into the ambient space.
    pub fn alpha_j(&self) -> MapSample {
        let values = self.j_map.iter().map(|&k| self.ray.point(k as usize) as u32).collect();
        MapSample::new(Arc::new(self.subset.clone()), self.ray.space(), values, "α∘j").unwrap()
    }
}

/// `j` must be a certified coarse map to the half-line and `H` a verified
/// homotopy from the inclusion to `α ∘ j`.
pub fn verify_categorical(cert: &CategoricityCertificate, bound: Q, cfg: &CertConfig) -> Result<CategoricityReport> {
    if cert.j_map.len() != cert.subset.len() {
        return Err(Error::DomainMismatch("j must be defined on every subset member".into()));
    }
    if let Some(&k) = cert.j_map.iter().find(|&&k| k as usize >= cert.ray.len()) {
        return Err(Error::DomainMismatch(format!("j value {k} beyond the ray")));
    }
    let j = cert.j_sample()?;
    let mut failures = Vec::new();
    let j_control = if cert.subset.len() >= 2 {
        let c = certify_control(&j, cfg)?;
        if !c.controlled {
            failures.push(format!("j exceeds slope at R_int: rho_upper = {}", c.upper_at_interior));
        }
        Some(c)
    } else {
        None
    };
    let j_properness = check_proper(&j, default_proper_threshold(&cert.subset, cfg), cfg);
    if !j_properness.passed {
        failures.push(format!("j not proper: envelope {:?}", j_properness.value_at_interior));
    }
    let inclusion = MapSample::inclusion(&cert.subset);
    let target = cert.alpha_j();
    let homotopy = verify_homotopy(&*cert.homotopy, &inclusion, &target, bound, cfg)?;
    failures.extend(homotopy.failures.iter().map(|f| format!("homotopy: {f}")));
    Ok(CategoricityReport {
        subset_size: cert.subset.len() as u64,
        ray: cert.ray.label().to_string(),
        j_control,
        j_properness,
        closeness_at_top: homotopy.closeness_top,
        homotopy,
        passed: failures.is_empty(),
        failures,
    })
}
