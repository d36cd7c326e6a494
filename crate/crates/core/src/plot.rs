//! CSV tables for the tabulated functions a certificate carries.
//!
//! Rationals are written twice: exactly as `n/d` and as a float for
//! plotting tools. An absent value (the `+inf` sentinel, or a monotone
//! envelope beyond the interior radius) is an empty cell.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::combing::StaircaseRho;
use crate::dispersed::DispersionProfile;
use crate::error::Result;
use crate::io::CertificateBundle;
use crate::maps::{ControlBounds, EnvelopeRow};
use crate::rational::{to_f64, Q};

/// The tables a report may embed under `results.plot`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionProfile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub staircase: Option<StaircaseRho>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlBounds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_envelope: Option<Vec<EnvelopeRow>>,
}

impl PlotData {
    pub fn is_empty(&self) -> bool {
        self.dispersion.is_none() && self.staircase.is_none() && self.control.is_none() && self.lower_envelope.is_none()
    }

    /// Tables embedded in a report; an empty set when it carries none.
    pub fn from_bundle(bundle: &CertificateBundle) -> Result<Self> {
        match bundle.results.get("plot") {
            Some(v) => Ok(serde_json::from_value(v.clone())?),
            None => Ok(PlotData::default()),
        }
    }
}

fn exact(v: Option<Q>) -> String {
    v.map(|q| format!("{}/{}", q.numer(), q.denom())).unwrap_or_default()
}

fn float(v: Option<Q>) -> String {
    v.map(|q| to_f64(q).to_string()).unwrap_or_default()
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one CSV per table present in `data` into `dir` and returns the
/// paths in a fixed order: `dispersion`, `staircase`, `rho_upper`,
/// `lower_envelope`.
pub fn emit_plot_data(data: &PlotData, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    if let Some(p) = &data.dispersion {
        let path = dir.join("dispersion.csv");
        let rows = p.radii.iter().zip(&p.values).zip(&p.monotone).map(|((&r, &v), &m)| {
            vec![exact(Some(r)), float(Some(r)), exact(v), float(v), exact(m), float(m)]
        });
        write_table(&path, &["r", "r_float", "dispersion", "dispersion_float", "monotone", "monotone_float"], rows)?;
        out.push(path);
    }
    if let Some(s) = &data.staircase {
        // One row per integer time up to the last breakpoint; `k` marks `t = b_k`.
        let path = dir.join("staircase.csv");
        let last = s.breakpoints.last().copied().unwrap_or(0);
        let rows = (0..=last).map(|t| {
            let k = s.breakpoints.iter().position(|&b| b == t).map(|k| (k + 1).to_string()).unwrap_or_default();
            vec![t.to_string(), s.eval(t).to_string(), k]
        });
        write_table(&path, &["t", "rho", "breakpoint_k"], rows)?;
        out.push(path);
    }
    if let Some(c) = &data.control {
        let path = dir.join("rho_upper.csv");
        let rows = c.sample_grid().into_iter().zip(c.rho_upper()).zip(c.rho_lower()).map(|((r, u), l)| {
            vec![exact(Some(r)), float(Some(r)), exact(Some(u)), float(Some(u)), exact(Some(l)), float(Some(l))]
        });
        write_table(&path, &["r", "r_float", "rho_upper", "rho_upper_float", "rho_lower", "rho_lower_float"], rows)?;
        out.push(path);
    }
    if let Some(env) = &data.lower_envelope {
        let path = dir.join("lower_envelope.csv");
        let rows = env.iter().map(|e| {
            vec![
                exact(Some(e.shell_start)),
                float(Some(e.shell_start)),
                exact(Some(e.raw)),
                float(Some(e.raw)),
                exact(e.monotone),
                float(e.monotone),
            ]
        });
        write_table(&path, &["shell_start", "shell_start_float", "raw", "raw_float", "monotone", "monotone_float"], rows)?;
        out.push(path);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combing::staircase_rho;
    use crate::rational::qi;

    #[test]
    fn empty_profile_gives_a_header_only_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = DispersionProfile { radii: vec![], values: vec![], monotone: vec![], interior_radius: qi(3) };
        let data = PlotData { dispersion: Some(p), ..Default::default() };
        let files = emit_plot_data(&data, dir.path()).unwrap();
        let text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("r,r_float,dispersion"));
    }

    #[test]
    fn staircase_rows_mark_every_breakpoint() {
        let dir = tempfile::tempdir().unwrap();
        let s = staircase_rho(&[1, 2, 2]).unwrap();
        let data = PlotData { staircase: Some(s.clone()), ..Default::default() };
        let files = emit_plot_data(&data, dir.path()).unwrap();
        let mut r = csv::Reader::from_path(&files[0]).unwrap();
        let marked: Vec<(u64, u64, usize)> = r
            .records()
            .map(|rec| rec.unwrap())
            .filter(|rec| !rec[2].is_empty())
            .map(|rec| (rec[0].parse().unwrap(), rec[1].parse().unwrap(), rec[2].parse().unwrap()))
            .collect();
        assert_eq!(marked, vec![(1, 1, 1), (5, 2, 2), (11, 3, 3)]);
        assert!(marked.iter().all(|&(t, rho, k)| t == s.breakpoint(k) && rho == k as u64));
    }
}
