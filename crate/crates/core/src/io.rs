//! Versioned JSON documents for spaces, maps, homotopies, combings, covers,
//! rays, point sets and reports.
//!
//! Every document carries `schema` and `version`; readers accept any minor
//! version of [`SCHEMA_MAJOR`] and reject everything else. Rationals are
//! `[numerator, denominator]` pairs.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::combing::{Combing, Geodesic};
use crate::cover::{Construction, SubsetFamily, WitnessCover};
use crate::cylinder::{CylinderMap, CylinderSample, HomotopySample};
use crate::error::{Error, Result};
use crate::maps::MapSample;
use crate::upgrade::ProperHomotopy;
use crate::rational::{from_ticks, q, qi, Q};
use crate::space::{
    build_explicit_space, build_from_generator, build_graph_space, Domain, Generator, Kind, PointSubset, Ray, Space,
};

pub const SCHEMA_MAJOR: u32 = 1;
pub const SCHEMA_VERSION: &str = "1.0";

/// Documents below this compact size are pretty-printed.
const PRETTY_LIMIT: usize = 1 << 20;

/// Serializes with a trailing newline, pretty-printed unless large; output
/// bytes depend only on `doc`.
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let mut s = serde_json::to_string(doc)?;
    if s.len() < PRETTY_LIMIT {
        s = serde_json::to_string_pretty(doc)?;
    }
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    std::fs::write(path, to_json(doc)?)?;
    Ok(())
}

/// Parses a document of the given schema, checking the version header first
/// so that a foreign file fails with a header error instead of a field error.
pub fn from_json<T: DeserializeOwned>(text: &str, schema: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Header {
        schema: Option<String>,
        version: Option<String>,
    }
    let header: Header = serde_json::from_str(text)?;
    match header.schema.as_deref() {
        Some(s) if s == schema => {}
        Some(s) => return Err(Error::Malformed(format!("field `schema`: expected {schema:?}, found {s:?}"))),
        None => return Err(Error::Malformed(format!("missing field `schema` (expected {schema:?})"))),
    }
    let version = header.version.ok_or_else(|| Error::Malformed("missing field `version`".into()))?;
    let major = version.split('.').next().and_then(|m| m.parse::<u32>().ok());
    if major != Some(SCHEMA_MAJOR) {
        return Err(Error::Malformed(format!(
            "field `version`: unsupported schema version {version:?}, this reader understands {SCHEMA_MAJOR}.x"
        )));
    }
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path, schema: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text, schema).map_err(|e| match e {
        Error::Json(j) => Error::Malformed(format!("{}: {j}", path.display())),
        Error::Malformed(m) => Error::Malformed(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn header() -> String {
    SCHEMA_VERSION.to_string()
}

fn check_label(space: &Space, label: &str, what: &str) -> Result<()> {
    if space.label() != label {
        return Err(Error::DomainMismatch(format!("{what} refers to {label:?} but the space is {:?}", space.label())));
    }
    Ok(())
}

fn check_index(space: &Space, i: usize, what: &str) -> Result<u32> {
    if i >= space.len() {
        return Err(Error::Malformed(format!("{what}: point {i} outside {} ({} points)", space.label(), space.len())));
    }
    Ok(i as u32)
}

// ---------------------------------------------------------------- spaces

/// Generated spaces are stored by generator and rebuilt on load; graph and
/// explicit spaces list their points with edges or a distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceDoc {
    pub schema: String,
    pub version: String,
    pub label: String,
    /// `grid`, `tree`, `line`, `halfline`, `graph` or `explicit`.
    pub metric: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    pub point_count: usize,
    pub basepoint: usize,
    pub unit: Q,
    pub truncation_radius: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist_matrix: Option<Vec<Vec<Q>>>,
}

impl SpaceDoc {
    pub const SCHEMA: &'static str = "coarsecat.space";

    pub fn from_space(space: &Space) -> Self {
        let n = space.len();
        let (metric, points, edges, dist_matrix) = match space.kind() {
            Kind::Grid(_) => ("grid", None, None, None),
            Kind::Tree(_) => ("tree", None, None, None),
            Kind::Line(_) => {
                let half = matches!(space.generator(), Some(Generator::HalfLine { .. }));
                (if half { "halfline" } else { "line" }, None, None, None)
            }
            Kind::Graph(_) => {
                let names = (0..n).map(|i| space.point_name(i)).collect();
                let edges = space.graph_edges().unwrap().into_iter().map(|(a, b)| [a, b]).collect();
                ("graph", Some(names), Some(edges), None)
            }
            Kind::Explicit(_) => {
                let names = (0..n).map(|i| space.point_name(i)).collect();
                let matrix = (0..n).map(|i| (0..n).map(|j| space.dist(i, j)).collect()).collect();
                ("explicit", Some(names), None, Some(matrix))
            }
        };
        SpaceDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            label: space.label().to_string(),
            metric: metric.into(),
            generator: space.generator().cloned(),
            point_count: n,
            basepoint: space.basepoint(),
            unit: space.unit(),
            truncation_radius: space.r_max(),
            points,
            edges,
            dist_matrix,
        }
    }

    pub fn to_space(&self) -> Result<Arc<Space>> {
        let space = match (&self.generator, self.metric.as_str()) {
            (Some(g), _) => build_from_generator(g)?,
            (None, "graph") => {
                let names = self.points.clone().ok_or_else(|| Error::Malformed("graph space: missing field `points`".into()))?;
                let edges: Vec<(usize, usize)> = self
                    .edges
                    .as_ref()
                    .ok_or_else(|| Error::Malformed("graph space: missing field `edges`".into()))?
                    .iter()
                    .map(|e| (e[0], e[1]))
                    .collect();
                build_graph_space(&self.label, names, &edges, self.basepoint)?
            }
            (None, "explicit") => {
                let names = self.points.clone().ok_or_else(|| Error::Malformed("explicit space: missing field `points`".into()))?;
                let matrix = self
                    .dist_matrix
                    .as_ref()
                    .ok_or_else(|| Error::Malformed("explicit space: missing field `dist_matrix`".into()))?;
                build_explicit_space(&self.label, names, matrix, self.basepoint)?
            }
            (None, m) => return Err(Error::Malformed(format!("field `metric`: {m:?} needs a `generator`"))),
        };
        if space.len() != self.point_count {
            return Err(Error::Malformed(format!(
                "field `point_count`: file says {}, the space has {}",
                self.point_count,
                space.len()
            )));
        }
        if space.label() != self.label || space.basepoint() != self.basepoint {
            return Err(Error::Malformed("fields `label`/`basepoint` disagree with the generated space".into()));
        }
        Ok(space)
    }
}

// ---------------------------------------------------------------- maps

/// A map between two whole spaces, one pair per source point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapDoc {
    pub schema: String,
    pub version: String,
    pub label: String,
    pub source_label: String,
    pub target_label: String,
    pub pairs: Vec<[usize; 2]>,
}

impl MapDoc {
    pub const SCHEMA: &'static str = "coarsecat.map";

    pub fn from_map(map: &MapSample, source: &Space) -> Self {
        MapDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            label: map.label().to_string(),
            source_label: source.label().to_string(),
            target_label: map.target_space().label().to_string(),
            pairs: map.values().iter().enumerate().map(|(i, &v)| [i, v as usize]).collect(),
        }
    }

    pub fn to_map(&self, source: &Arc<Space>, target: &Arc<Space>) -> Result<MapSample> {
        check_label(source, &self.source_label, "map source")?;
        check_label(target, &self.target_label, "map target")?;
        let mut values = vec![u32::MAX; source.len()];
        for &[x, y] in &self.pairs {
            let x = check_index(source, x, "field `pairs`")? as usize;
            let y = check_index(target, y, "field `pairs`")?;
            if values[x] != u32::MAX && values[x] != y {
                return Err(Error::Malformed(format!("field `pairs`: point {x} has two images")));
            }
            values[x] = y;
        }
        if let Some(x) = values.iter().position(|&v| v == u32::MAX) {
            return Err(Error::Malformed(format!("field `pairs`: no image for point {x}")));
        }
        let src: Arc<dyn Domain> = source.clone();
        MapSample::new(src, target, values, &self.label)
    }
}

// ---------------------------------------------------------------- homotopies

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProjectionDoc {
    /// The literal string `"norm"`.
    Named(String),
    Explicit(Vec<Q>),
}

/// A tabulated homotopy into the space `space_label`. The base is the source
/// space (`source_label`, defaulting to the target), or the listed `members`
/// of it; `values` holds `[x, j, y]` with `x` a source point index and `j`
/// the sample index above `x`, at time `min(j * t_step, p(x))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyDoc {
    pub schema: String,
    pub version: String,
    pub label: String,
    pub space_label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<u32>>,
    pub projection: ProjectionDoc,
    pub t_step: Q,
    pub values: Vec<[usize; 3]>,
}

impl HomotopyDoc {
    pub const SCHEMA: &'static str = "coarsecat.homotopy";

    /// `members` must list the base subset when the cylinder is not over a
    /// whole space; `source` names the base space when it is not the target.
    pub fn from_homotopy(h: &dyn CylinderMap, members: Option<&[u32]>, source: Option<&Space>) -> Self {
        let cyl = h.cylinder();
        let base = cyl.base();
        let ambient = |x: usize| members.map_or(x, |m| m[x] as usize);
        let norm = (0..base.len()).all(|x| cyl.projection(x) == from_ticks(base.norm_ticks(x), base.unit()));
        let projection = if norm && cyl.projection_label() == "norm" {
            ProjectionDoc::Named("norm".into())
        } else {
            ProjectionDoc::Explicit((0..base.len()).map(|x| cyl.projection(x)).collect())
        };
        let mut values = Vec::with_capacity(cyl.len());
        for i in 0..cyl.len() {
            let (x, t) = cyl.locate(i);
            let j = i - cyl.bottom(x);
            values.push([ambient(x), j, h.eval(x, t)]);
        }
        HomotopyDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            label: h.label(),
            space_label: h.target().label().to_string(),
            source_label: source.filter(|s| s.label() != h.target().label()).map(|s| s.label().to_string()),
            members: members.map(|m| m.to_vec()),
            projection,
            t_step: cyl.t_step(),
            values,
        }
    }

    /// Tabulates a unit-interval homotopy at `u = j / steps` over the
    /// constant projection 1.
    pub fn from_proper(h: &dyn ProperHomotopy, steps: u64) -> Result<Self> {
        let src = h.source();
        let ones = vec![qi(1); src.len()];
        let base: Arc<dyn Domain> = src.clone();
        let cyl = CylinderSample::new(base, &ones, q(1, steps as i64), "unit")?;
        let mut values = Vec::with_capacity(cyl.len());
        for x in 0..src.len() {
            for j in 0..=steps {
                values.push([x, j as usize, h.eval(x, q(j as i64, steps as i64))]);
            }
        }
        Ok(HomotopyDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            label: h.label(),
            space_label: h.target().label().to_string(),
            source_label: Some(src.label().to_string()),
            members: None,
            projection: ProjectionDoc::Explicit(ones),
            t_step: q(1, steps as i64),
            values,
        })
    }

    pub fn to_homotopy(&self, source: &Arc<Space>, target: &Arc<Space>) -> Result<HomotopySample> {
        check_label(target, &self.space_label, "homotopy target")?;
        check_label(source, self.source_label.as_deref().unwrap_or(&self.space_label), "homotopy source")?;
        let (base, position): (Arc<dyn Domain>, Box<dyn Fn(usize) -> Option<usize>>) = match &self.members {
            Some(m) => {
                let subset = PointSubset::new(source, m.clone())?;
                if subset.len() != m.len() || subset.members() != m.as_slice() {
                    return Err(Error::Malformed("field `members` must be sorted and duplicate-free".into()));
                }
                let s2 = subset.clone();
                (Arc::new(subset), Box::new(move |x| s2.position(x)))
            }
            None => {
                let n = source.len();
                (source.clone(), Box::new(move |x| (x < n).then_some(x)))
            }
        };
        let projection: Vec<Q> = match &self.projection {
            ProjectionDoc::Named(s) if s == "norm" => {
                (0..base.len()).map(|x| from_ticks(base.norm_ticks(x), base.unit())).collect()
            }
            ProjectionDoc::Named(s) => return Err(Error::Malformed(format!("field `projection`: unknown {s:?}"))),
            ProjectionDoc::Explicit(p) => p.clone(),
        };
        let label = match &self.projection {
            ProjectionDoc::Named(s) => s.clone(),
            ProjectionDoc::Explicit(_) => "explicit".into(),
        };
        let cyl = CylinderSample::new(base, &projection, self.t_step, &label)?;
        let mut values = vec![u32::MAX; cyl.len()];
        for &[x, j, y] in &self.values {
            let bx = position(x).ok_or_else(|| Error::Malformed(format!("field `values`: point {x} not in the base")))?;
            let top = cyl.top(bx) - cyl.bottom(bx);
            if j > top {
                return Err(Error::Malformed(format!("field `values`: sample {j} above point {x} exceeds {top}")));
            }
            values[cyl.bottom(bx) + j] = check_index(target, y, "field `values`")?;
        }
        if let Some(i) = values.iter().position(|&v| v == u32::MAX) {
            let (x, t) = cyl.locate(i);
            return Err(Error::Malformed(format!("field `values`: missing value at base point {x}, time tick {t}")));
        }
        HomotopySample::new(Arc::new(cyl), target, values, &self.label)
    }
}

// ---------------------------------------------------------------- combings

/// Geodesic combings are stored by name; tabulated ones as `[x, n, y]` rows
/// with `C(x, n) = y` for `n = 0..=N_x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombingDoc {
    pub schema: String,
    pub version: String,
    pub space_label: String,
    /// `combing` or `bicombing`.
    pub kind: String,
    pub basepoint: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<Geodesic>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<[usize; 3]>,
}

impl CombingDoc {
    pub const SCHEMA: &'static str = "coarsecat.combing";

    pub fn from_combing(c: &Combing, bicombing: bool) -> Self {
        let (geodesic, table) = match c.geodesic_kind() {
            Some(g) => (Some(g), Vec::new()),
            None => {
                let mut table = Vec::new();
                for (x, row) in c.rows().iter().enumerate() {
                    table.extend(row.iter().enumerate().map(|(n, &y)| [x, n, y as usize]));
                }
                (None, table)
            }
        };
        CombingDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            space_label: c.space().label().to_string(),
            kind: if bicombing { "bicombing" } else { "combing" }.into(),
            basepoint: c.basepoint(),
            geodesic,
            table,
        }
    }

    pub fn to_combing(&self, space: &Arc<Space>) -> Result<Combing> {
        check_label(space, &self.space_label, "combing")?;
        check_index(space, self.basepoint, "field `basepoint`")?;
        if let Some(g) = self.geodesic {
            if Geodesic::for_space(space)? != g {
                return Err(Error::Malformed(format!("field `geodesic`: {g:?} does not fit {}", space.label())));
            }
            return Combing::geodesic(space, self.basepoint);
        }
        let mut rows: Vec<Vec<u32>> = vec![Vec::new(); space.len()];
        for &[x, n, y] in &self.table {
            let x = check_index(space, x, "field `table`")? as usize;
            let y = check_index(space, y, "field `table`")?;
            let row = &mut rows[x];
            if n != row.len() {
                return Err(Error::Malformed(format!("field `table`: rows for point {x} must list n = 0, 1, ... in order")));
            }
            row.push(y);
        }
        Combing::from_table(space, self.basepoint, rows)
    }
}

// ---------------------------------------------------------------- covers

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverDoc {
    pub schema: String,
    pub version: String,
    pub space_label: String,
    pub scale_r: Q,
    /// `families[i][j]` lists the points of member `j` of family `i`.
    pub families: Vec<Vec<Vec<u32>>>,
    pub diam_bound: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
}

impl CoverDoc {
    pub const SCHEMA: &'static str = "coarsecat.cover";

    pub fn from_cover(w: &WitnessCover) -> Self {
        CoverDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            space_label: w.space.label().to_string(),
            scale_r: w.scale_r,
            families: w.families.iter().map(|f| f.members.iter().map(|m| m.members().to_vec()).collect()).collect(),
            diam_bound: w.diam_bound(),
            construction: Some(w.construction.clone()),
        }
    }

    pub fn to_cover(&self, space: &Arc<Space>) -> Result<WitnessCover> {
        check_label(space, &self.space_label, "cover")?;
        let mut families = Vec::with_capacity(self.families.len());
        for (i, fam) in self.families.iter().enumerate() {
            let mut members = Vec::with_capacity(fam.len());
            for m in fam {
                for &x in m {
                    check_index(space, x as usize, &format!("family {i}"))?;
                }
                members.push(PointSubset::new(space, m.clone())?);
            }
            families.push(SubsetFamily::new(space, members, self.scale_r, self.diam_bound));
        }
        let all: Vec<u32> = families.iter().flat_map(|f| f.union().into_members()).collect();
        let covers = PointSubset::new(space, all)?.len() == space.len();
        Ok(WitnessCover {
            space: space.clone(),
            scale_r: self.scale_r,
            families,
            construction: self.construction.clone().unwrap_or(Construction::Given),
            covers,
        })
    }
}

// ---------------------------------------------------------------- rays and sets

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayDoc {
    pub schema: String,
    pub version: String,
    pub space_label: String,
    pub label: String,
    pub points: Vec<u32>,
}

impl RayDoc {
    pub const SCHEMA: &'static str = "coarsecat.ray";

    pub fn from_ray(r: &Ray) -> Self {
        RayDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            space_label: r.space().label().to_string(),
            label: r.label().to_string(),
            points: r.points().to_vec(),
        }
    }

    pub fn to_ray(&self, space: &Arc<Space>) -> Result<Ray> {
        check_label(space, &self.space_label, "ray")?;
        for &p in &self.points {
            check_index(space, p as usize, "field `points`")?;
        }
        Ray::new(space, self.points.clone(), &self.label)
    }
}

/// A point set, or a family of disjoint point sets, for dispersion profiles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetDoc {
    pub schema: String,
    pub version: String,
    pub space_label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub family: Vec<Vec<u32>>,
}

impl SetDoc {
    pub const SCHEMA: &'static str = "coarsecat.set";

    pub fn from_points(space: &Space, members: Vec<u32>) -> Self {
        SetDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            space_label: space.label().to_string(),
            members,
            family: Vec::new(),
        }
    }

    pub fn from_family(space: &Space, family: Vec<Vec<u32>>) -> Self {
        SetDoc {
            schema: Self::SCHEMA.into(),
            version: header(),
            space_label: space.label().to_string(),
            members: Vec::new(),
            family,
        }
    }

    pub fn is_family(&self) -> bool {
        !self.family.is_empty()
    }
}

// ---------------------------------------------------------------- reports

/// Output of every certifying command: the configuration echo, the results
/// with their witnesses, and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateBundle {
    pub schema: String,
    pub version: String,
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub results: serde_json::Value,
    pub passed: bool,
}

impl CertificateBundle {
    pub const SCHEMA: &'static str = "coarsecat.report";

    pub fn new(command: &str, config: serde_json::Value, results: serde_json::Value, passed: bool) -> Self {
        CertificateBundle {
            schema: Self::SCHEMA.into(),
            version: header(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            results,
            passed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combing::geodesic_combing_tree;
    use crate::cover::grid_asdim_witness;
    use crate::space::{build_grid_space, build_tree_space};

    fn round_trip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(doc: &T, schema: &str) {
        let text = to_json(doc).unwrap();
        let back: T = from_json(&text, schema).unwrap();
        assert_eq!(&back, doc);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn explicit_space_survives_a_round_trip() {
        let names = vec!["a".to_string(), "b".into(), "c".into()];
        let m = vec![vec![qi(0), q(1, 2), qi(1)], vec![q(1, 2), qi(0), q(1, 2)], vec![qi(1), q(1, 2), qi(0)]];
        let s = build_explicit_space("tri", names, &m, 0).unwrap();
        let doc = SpaceDoc::from_space(&s);
        round_trip(&doc, SpaceDoc::SCHEMA);
        let back = doc.to_space().unwrap();
        assert_eq!(back.dist(0, 2), qi(1));
        assert!(to_json(&doc).unwrap().contains("[\n        1,\n        2\n      ]"));
    }

    #[test]
    fn unknown_major_version_is_rejected() {
        let s = build_grid_space(1, 3).unwrap();
        let mut doc = SpaceDoc::from_space(&s);
        doc.version = "2.0".into();
        let err = from_json::<SpaceDoc>(&to_json(&doc).unwrap(), SpaceDoc::SCHEMA).unwrap_err();
        assert!(err.to_string().contains("unsupported schema version"));
        doc.version = "1.7".into();
        assert!(from_json::<SpaceDoc>(&to_json(&doc).unwrap(), SpaceDoc::SCHEMA).is_ok());
    }

    #[test]
    fn missing_field_reports_its_name_and_line() {
        let text = "{\n  \"schema\": \"coarsecat.map\",\n  \"version\": \"1.0\",\n  \"label\": \"f\"\n}";
        let err = from_json::<MapDoc>(text, MapDoc::SCHEMA).unwrap_err().to_string();
        assert!(err.contains("source_label") && err.contains("line"), "{err}");
    }

    #[test]
    fn tabulated_combing_and_cover_round_trip() {
        let t = build_tree_space(2, 3).unwrap();
        let c = geodesic_combing_tree(&t).unwrap().with_entry(3, 1, 1);
        let doc = CombingDoc::from_combing(&c, false);
        round_trip(&doc, CombingDoc::SCHEMA);
        assert_eq!(doc.to_combing(&t).unwrap().rows(), c.rows());

        let g = build_grid_space(2, 12).unwrap();
        let w = grid_asdim_witness(&g, qi(1)).unwrap();
        let doc = CoverDoc::from_cover(&w);
        round_trip(&doc, CoverDoc::SCHEMA);
        assert_eq!(CoverDoc::from_cover(&doc.to_cover(&g).unwrap()), doc);
    }
}
