//! The `coarsecat` command line.
//!
//! Exit codes: 0 when every check passes, 1 for a certified failure (its
//! witness is printed and written to the report), 2 for usage, input or
//! capacity errors. Outputs depend only on the arguments and input files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::combing::{
    geodesic_bicombing, shrinking_homotopy, shrinking_map, staircase_rho, verify_bicombing, verify_combing, Combing,
};
use crate::cover::{asdim_witness, verify_cover, SubsetFamily};
use crate::cylinder::{bottom_slice, top_slice, verify_categorical, CategoricityCertificate, CylinderMap};
use crate::dispersed::{dispersed_categorical_witness, dispersion_profile, family_dispersion_profile};
use crate::error::{Error, Result};
use crate::io::{read_json, write_json, CertificateBundle, CombingDoc, CoverDoc, HomotopyDoc, MapDoc, RayDoc, SetDoc, SpaceDoc};
use crate::maps::{certify_control, check_proper, default_proper_threshold, CertConfig, MapSample};
use crate::pipeline::{ccat_upper_bound_along, PipelineConfig};
use crate::plot::{emit_plot_data, PlotData};
use crate::rational::{parse_q, qi, Q};
use crate::space::{build_from_generator, Domain, Generator, PointSubset, Ray, Space};
use crate::upgrade::{measure_modulus, upgrade_proper_homotopy, ProperHomotopy, Reparametrized, Rotation, Tabulated};

/// Overrides the exhaustive pair-scan budget unless `--pair-budget` is given.
pub const PAIR_BUDGET_ENV: &str = "COARSECAT_PAIR_BUDGET";

#[derive(Parser, Debug, Serialize)]
#[command(name = "coarsecat", version, about = "Certified coarse geometry on finite truncations of metric spaces")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Worker threads for parallel scans (a hint; 0 keeps the default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Seed for sampled pair scans.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest pair count scanned exhaustively.
    #[arg(long, global = true)]
    pair_budget: Option<u64>,
}

fn rat(s: &str) -> std::result::Result<Q, String> {
    parse_q(s).ok_or_else(|| format!("{s:?} is not a rational such as 3, -1/2 or 0.25"))
}

fn rat_list(s: &str) -> std::result::Result<Vec<Q>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| rat(p.trim())).collect()
}

fn u64_list(s: &str) -> std::result::Result<Vec<u64>, String> {
    s.split(',').map(|p| p.trim().parse::<u64>().map_err(|e| format!("{p:?}: {e}"))).collect()
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum SpaceKind {
    Grid,
    Tree,
    Line,
    Halfline,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq)]
enum CombingKindArg {
    Combing,
    Bicombing,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Generate a bundled space and write its JSON file.
    GenSpace {
        #[arg(long, value_enum)]
        kind: SpaceKind,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Truncation radius; an integer for grids, any rational for lines.
        #[arg(long, value_parser = rat, default_value = "10")]
        radius: Q,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 8)]
        depth: u32,
        /// Sampling step of a line or half-line.
        #[arg(long, value_parser = rat, default_value = "1")]
        step: Q,
        #[arg(long, default_value = "space.json")]
        out: PathBuf,
    },
    /// Certify control and properness of a map between two spaces.
    CheckMap {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        source: PathBuf,
        /// Defaults to the source space.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_parser = rat)]
        proper_threshold: Option<Q>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a tabulated homotopy between two maps.
    VerifyHomotopy {
        #[arg(long)]
        homotopy: PathBuf,
        /// Target space; also the source unless `--source` is given.
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        source: Option<PathBuf>,
        /// Map expected at the bottom slice; defaults to the bottom slice itself.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Map expected at the top slice; defaults to the top slice itself.
        #[arg(long)]
        to: Option<PathBuf>,
        #[arg(long, value_parser = rat, default_value = "0")]
        bound: Q,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify a subset as coarsely categorical along a ray.
    VerifyCategorical {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        ray: PathBuf,
        /// Homotopy over the subset whose top slice lies on the ray.
        #[arg(long, conflicts_with = "set")]
        homotopy: Option<PathBuf>,
        /// Dispersed set to push onto the ray with avoiding paths.
        #[arg(long, required_unless_present = "homotopy")]
        set: Option<PathBuf>,
        /// Writes the constructed homotopy when `--set` is used.
        #[arg(long)]
        homotopy_out: Option<PathBuf>,
        #[arg(long, value_parser = rat, default_value = "0")]
        bound: Q,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a geodesic (or breadth-first) combing, verify it and write it.
    MakeCombing {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_enum, default_value = "combing")]
        kind: CombingKindArg,
        /// Paths down a breadth-first tree, for graph spaces.
        #[arg(long)]
        bfs: bool,
        #[arg(long)]
        basepoint: Option<usize>,
        #[arg(long, default_value = "combing.json")]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify the shrinking homotopy from the identity to `Sh_rho`.
    Shrink {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        combing: PathBuf,
        /// Staircase moduli `L_1,L_2,...`.
        #[arg(long, conflicts_with = "rho_div")]
        moduli: Option<String>,
        /// Use `rho(t) = floor(t / k)`.
        #[arg(long)]
        rho_div: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upgrade a proper homotopy on a combable space to a coarse homotopy.
    UpgradeHomotopy {
        /// Proper homotopy over the unit interval (projection 1).
        #[arg(long, requires_all = ["combing", "source", "target"])]
        hprime: Option<PathBuf>,
        #[arg(long)]
        combing: Option<PathBuf>,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Use the bundled rotation of the half-line into grid(2, R).
        #[arg(long, conflicts_with = "hprime", required_unless_present = "hprime")]
        rotation: Option<u32>,
        /// Time lattice `M`: the cylinder is sampled at `1/M`.
        #[arg(long, default_value_t = 4)]
        lattice: u64,
        /// Number of moduli measured; defaults to the largest source norm.
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct an asdim witness cover at scale `r`.
    MakeWitness {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, value_parser = rat)]
        r: Q,
        #[arg(long, default_value = "cover.json")]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-certify a cover file.
    VerifyCover {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the multiscale pipeline and report the certified ccat bound.
    RunPipeline {
        #[arg(long)]
        space: PathBuf,
        /// Must be the geodesic bicombing of the space.
        #[arg(long)]
        combing: Option<PathBuf>,
        /// Ray the dispersed families are pushed onto; defaults to the standard ray.
        #[arg(long)]
        ray: Option<PathBuf>,
        #[arg(long = "c-lambda", value_parser = rat, default_value = "4")]
        c_lambda: Q,
        #[arg(long = "c-R", value_parser = rat, default_value = "8")]
        c_r: Q,
        /// Skip the two-halves cover.
        #[arg(long)]
        no_two_halves: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dispersion profile of a set or family, as CSV.
    Profile {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        set: PathBuf,
        /// Comma-separated radii, e.g. `0,1/2,1,2`.
        #[arg(long)]
        radii: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write the CSV tables embedded in a report.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Runs the command line on `argv` (program name first) and returns the
/// exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.global.threads > 0 {
        // A pool may already exist when called in-process; the flag is a hint.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global();
    }
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NoPath { .. } | Error::DegenerateSchedule(_) | Error::Certification(_) => 1,
                _ => 2,
            }
        }
    }
}

fn cert_config(g: &Global) -> Result<CertConfig> {
    let mut cfg = CertConfig::default();
    if let Ok(v) = std::env::var(PAIR_BUDGET_ENV) {
        cfg.pair_budget = v
            .trim()
            .parse()
            .map_err(|e| Error::Malformed(format!("{PAIR_BUDGET_ENV}={v:?}: {e}")))?;
    }
    if let Some(b) = g.pair_budget {
        cfg.pair_budget = b;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn load_space(path: &Path) -> Result<Arc<Space>> {
    read_json::<SpaceDoc>(path, SpaceDoc::SCHEMA)?.to_space()
}

/// Writes the bundle to `out` when given and prints the verdict line.
fn finish(cli: &Cli, cfg: &CertConfig, command: &str, results: serde_json::Value, passed: bool, out: Option<&Path>, summary: &str) -> Result<bool> {
    let config = json!({ "arguments": cli, "cert": cfg });
    let bundle = CertificateBundle::new(command, config, results, passed);
    if let Some(p) = out {
        write_json(p, &bundle)?;
    }
    println!("{} {command}: {summary}", if passed { "PASS" } else { "FAIL" });
    Ok(passed)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    let cfg = cert_config(&cli.global)?;
    match &cli.command {
        Command::GenSpace { kind, dim, radius, arity, depth, step, out } => {
            let generator = match kind {
                SpaceKind::Grid => {
                    if !radius.is_integer() || *radius < qi(0) {
                        return Err(Error::Precondition("grid radius must be a nonnegative integer".into()));
                    }
                    Generator::Grid { dim: *dim, radius: radius.to_integer() as u32 }
                }
                SpaceKind::Tree => Generator::Tree { arity: *arity, depth: *depth },
                SpaceKind::Line => Generator::Line { step: *step, radius: *radius },
                SpaceKind::Halfline => Generator::HalfLine { step: *step, radius: *radius },
            };
            let space = build_from_generator(&generator)?;
            write_json(out, &SpaceDoc::from_space(&space))?;
            println!("wrote {}: {} with {} points", out.display(), space.label(), space.len());
            Ok(true)
        }
        Command::CheckMap { map, source, target, proper_threshold, out } => {
            let src = load_space(source)?;
            let tgt = match target {
                Some(t) => load_space(t)?,
                None => src.clone(),
            };
            let f = read_json::<MapDoc>(map, MapDoc::SCHEMA)?.to_map(&src, &tgt)?;
            let control = certify_control(&f, &cfg)?;
            let threshold = proper_threshold.unwrap_or_else(|| default_proper_threshold(&*src, &cfg));
            let proper = check_proper(&f, threshold, &cfg);
            let passed = control.controlled && proper.passed;
            let mut summary = format!(
                "rho_upper(R_int) = {}, lower envelope at R_int = {:?}",
                control.upper_at_interior, proper.value_at_interior
            );
            if let Some(w) = &proper.witness {
                summary.push_str(&format!("; witness {} (norm {}) -> {} (norm {})", w.point, w.norm, w.image, w.image_norm));
            }
            let plot = PlotData {
                control: Some(control.bounds.clone()),
                lower_envelope: Some(proper.lower_envelope.clone()),
                ..Default::default()
            };
            let results = json!({ "control": control, "properness": proper, "plot": plot });
            finish(cli, &cfg, "check-map", results, passed, out.as_deref(), &summary)
        }
        Command::VerifyHomotopy { homotopy, space, source, from, to, bound, out } => {
            let tgt = load_space(space)?;
            let src = match source {
                Some(s) => load_space(s)?,
                None => tgt.clone(),
            };
            let doc = read_json::<HomotopyDoc>(homotopy, HomotopyDoc::SCHEMA)?;
            let h = doc.to_homotopy(&src, &tgt)?;
            let slice = |path: &Option<PathBuf>, fallback: MapSample| -> Result<MapSample> {
                let Some(p) = path else { return Ok(fallback) };
                let m = read_json::<MapDoc>(p, MapDoc::SCHEMA)?.to_map(&src, &tgt)?;
                let values = match &doc.members {
                    Some(mem) => mem.iter().map(|&x| m.values()[x as usize]).collect(),
                    None => m.values().to_vec(),
                };
                MapSample::new(h.cylinder().base().clone(), &tgt, values, m.label())
            };
            let f = slice(from, bottom_slice(&h))?;
            let g = slice(to, top_slice(&h))?;
            let cert = crate::cylinder::verify_homotopy(&h, &f, &g, *bound, &cfg)?;
            let summary = if cert.passed {
                format!("{} cylinder points, endpoint closeness {} / {}", cert.cylinder_points, cert.closeness_bottom, cert.closeness_top)
            } else {
                cert.failures.join("; ")
            };
            let passed = cert.passed;
            let plot = PlotData {
                control: Some(cert.control.bounds.clone()),
                lower_envelope: Some(cert.properness.lower_envelope.clone()),
                ..Default::default()
            };
            finish(cli, &cfg, "verify-homotopy", json!({ "homotopy": cert, "plot": plot }), passed, out.as_deref(), &summary)
        }
        Command::VerifyCategorical { space, ray, homotopy, set, homotopy_out, bound, out } => {
            let s = load_space(space)?;
            let ray = read_json::<RayDoc>(ray, RayDoc::SCHEMA)?.to_ray(&s)?;
            let (report, ladder) = match (homotopy, set) {
                (Some(hp), _) => {
                    let doc = read_json::<HomotopyDoc>(hp, HomotopyDoc::SCHEMA)?;
                    let members = doc.members.clone().unwrap_or_else(|| (0..s.len() as u32).collect());
                    let h = doc.to_homotopy(&s, &s)?;
                    let subset = PointSubset::new(&s, members)?;
                    let top = top_slice(&h);
                    let mut j_map = Vec::with_capacity(subset.len());
                    for (i, &y) in top.values().iter().enumerate() {
                        match ray.parameter_of(y as usize) {
                            Some(k) => j_map.push(k as u32),
                            None => {
                                let x = subset.members()[i] as usize;
                                let why = format!(
                                    "top slice at {} is {}, which is not on {}",
                                    s.point_name(x),
                                    s.point_name(y as usize),
                                    ray.label()
                                );
                                let results = json!({ "failure": why });
                                return finish(cli, &cfg, "verify-categorical", results, false, out.as_deref(), &why);
                            }
                        }
                    }
                    let cert = CategoricityCertificate { subset, ray: ray.clone(), j_map, homotopy: Arc::new(h) };
                    (verify_categorical(&cert, *bound, &cfg)?, None)
                }
                (None, Some(sp)) => {
                    let sd = read_json::<SetDoc>(sp, SetDoc::SCHEMA)?;
                    if sd.space_label != s.label() {
                        return Err(Error::DomainMismatch(format!("set refers to {:?}", sd.space_label)));
                    }
                    let u = PointSubset::new(&s, sd.members.clone())?;
                    let w = dispersed_categorical_witness(&s, &ray, &u, &cfg)?;
                    if let Some(p) = homotopy_out {
                        write_json(p, &HomotopyDoc::from_homotopy(&*w.certificate.homotopy, Some(u.members()), None))?;
                    }
                    (w.report, Some(w.ladder))
                }
                (None, None) => unreachable!("clap requires one of --homotopy and --set"),
            };
            let summary = if report.passed {
                format!("{} points pushed onto {}", report.subset_size, report.ray)
            } else {
                report.failures.join("; ")
            };
            let passed = report.passed;
            finish(cli, &cfg, "verify-categorical", json!({ "categoricity": report, "ladder": ladder }), passed, out.as_deref(), &summary)
        }
        Command::MakeCombing { space, kind, bfs, basepoint, out, report } => {
            let s = load_space(space)?;
            let p = basepoint.unwrap_or(s.basepoint());
            let c = if *bfs { Combing::bfs_tree(&s, p)? } else { Combing::geodesic(&s, p)? };
            let bicombing = *kind == CombingKindArg::Bicombing;
            let (results, passed, summary) = if bicombing {
                if *bfs {
                    return Err(Error::Precondition("breadth-first paths give a combing, not a bicombing".into()));
                }
                let b = geodesic_bicombing(&s)?;
                let cert = verify_bicombing(&b, &cfg)?;
                let summary = format!("{} triples, {} axiom violations", cert.triples_checked, cert.axiom_violations);
                let passed = cert.passed;
                (json!({ "bicombing": cert }), passed, summary)
            } else {
                let cert = verify_combing(&c, &cfg)?;
                let v = cert.axiom1_violations + cert.axiom2_violations + cert.minimality_violations;
                let summary = format!("{v} axiom violations, rho_upper(1) = {}", cert.rho_upper_1);
                let passed = cert.passed;
                (json!({ "combing": cert }), passed, summary)
            };
            write_json(out, &CombingDoc::from_combing(&c, bicombing))?;
            finish(cli, &cfg, "make-combing", results, passed, report.as_deref(), &summary)
        }
        Command::Shrink { space, combing, moduli, rho_div, out } => {
            let s = load_space(space)?;
            let c = read_json::<CombingDoc>(combing, CombingDoc::SCHEMA)?.to_combing(&s)?;
            let staircase = match (moduli, rho_div) {
                (Some(l), _) => Some(staircase_rho(&u64_list(l).map_err(Error::Malformed)?)?),
                (None, Some(0)) => return Err(Error::Precondition("--rho-div must be positive".into())),
                (None, Some(_)) => None,
                (None, None) => return Err(Error::Precondition("give --moduli or --rho-div".into())),
            };
            let k = rho_div.unwrap_or(1);
            let div = move |t: u64| t / k;
            let rho: &(dyn Fn(u64) -> u64 + Sync) = match &staircase {
                Some(st) => &move |t| st.eval(t),
                None => &div,
            };
            let sh = shrinking_map(&c, rho)?;
            let h = shrinking_homotopy(&c, rho)?;
            let cert = crate::cylinder::verify_homotopy(&h, &MapSample::identity(&s), &sh, qi(0), &cfg)?;
            let summary = if cert.passed {
                format!("identity ~ Sh over {} cylinder points", cert.cylinder_points)
            } else {
                cert.failures.join("; ")
            };
            let passed = cert.passed;
            let plot = PlotData { staircase: staircase.clone(), control: Some(cert.control.bounds.clone()), ..Default::default() };
            finish(cli, &cfg, "shrink", json!({ "homotopy": cert, "staircase": staircase, "plot": plot }), passed, out.as_deref(), &summary)
        }
        Command::UpgradeHomotopy { hprime, combing, source, target, rotation, lattice, k_max, out } => {
            let rot;
            let tab;
            let (h, comb): (&dyn ProperHomotopy, Combing) = match rotation {
                Some(r) => {
                    rot = Rotation::new(*r)?;
                    let c = match combing {
                        Some(p) => read_json::<CombingDoc>(p, CombingDoc::SCHEMA)?.to_combing(rot.source())?,
                        None => Combing::geodesic(rot.source(), rot.source().basepoint())?,
                    };
                    (&rot, c)
                }
                None => {
                    let src = load_space(source.as_ref().unwrap())?;
                    let tgt = load_space(target.as_ref().unwrap())?;
                    let doc = read_json::<HomotopyDoc>(hprime.as_ref().unwrap(), HomotopyDoc::SCHEMA)?;
                    tab = Tabulated::new(doc.to_homotopy(&src, &tgt)?, &src)?;
                    let c = read_json::<CombingDoc>(combing.as_ref().unwrap(), CombingDoc::SCHEMA)?.to_combing(&src)?;
                    (&tab, c)
                }
            };
            let hp = Reparametrized::new(h, *lattice)?;
            let k = k_max.unwrap_or_else(|| h.source().max_norm_ticks().max(1) as usize);
            let modulus = measure_modulus(&hp, k)?;
            let up = upgrade_proper_homotopy(h, &comb, &modulus)?;
            let claim = &up.claim;
            let summary = format!(
                "{} pairs at distance <= 1, {} violations ({} across a step of rho), max image distance {}",
                claim.pairs_scanned, claim.violations, claim.violations_across_step, claim.max_image_distance
            );
            let plot = PlotData { staircase: Some(up.homotopy.rho().clone()), ..Default::default() };
            let results = json!({ "modulus": modulus, "rho": up.homotopy.rho(), "claim": claim, "plot": plot });
            finish(cli, &cfg, "upgrade-homotopy", results, claim.passed, out.as_deref(), &summary)
        }
        Command::MakeWitness { space, r, out, report } => {
            let s = load_space(space)?;
            let w = asdim_witness(&s, *r)?;
            write_json(out, &CoverDoc::from_cover(&w))?;
            let cert = verify_cover(&w);
            let sizes: Vec<usize> = w.families.iter().map(|f| f.len()).collect();
            let summary = format!("{} families with {:?} members, diameter bound {}", sizes.len(), sizes, w.diam_bound());
            let passed = cert.passed;
            println!("wrote {}", out.display());
            finish(cli, &cfg, "make-witness", json!({ "cover": cert }), passed, report.as_deref(), &summary)
        }
        Command::VerifyCover { space, cover, out } => {
            let s = load_space(space)?;
            let w = read_json::<CoverDoc>(cover, CoverDoc::SCHEMA)?.to_cover(&s)?;
            let cert = verify_cover(&w);
            let summary = if cert.passed {
                format!("{} families, multiplicity {}", cert.families.len(), cert.multiplicity)
            } else if !cert.covers {
                let pts: Vec<String> = cert.uncovered.iter().map(|&x| s.point_name(x)).collect();
                format!("uncovered points: {}", pts.join(", "))
            } else {
                let bad: Vec<String> = cert
                    .families
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| !(f.r_disjoint && f.bounded && f.check.disjoint))
                    .map(|(i, f)| format!("family {i}: gap {:?} at {:?}, max diameter {}", f.check.min_gap, f.check.gap_witness, f.check.max_diam))
                    .collect();
                bad.join("; ")
            };
            let passed = cert.passed;
            finish(cli, &cfg, "verify-cover", json!({ "cover": cert }), passed, out.as_deref(), &summary)
        }
        Command::RunPipeline { space, combing, ray, c_lambda, c_r, no_two_halves, out } => {
            let s = load_space(space)?;
            if let Some(p) = combing {
                let doc = read_json::<CombingDoc>(p, CombingDoc::SCHEMA)?;
                if doc.kind != "bicombing" || doc.geodesic.is_none() {
                    return Err(Error::Precondition("the pipeline contracts along the geodesic bicombing only".into()));
                }
                doc.to_combing(&s)?;
            }
            let ray = match ray {
                Some(p) => read_json::<RayDoc>(p, RayDoc::SCHEMA)?.to_ray(&s)?,
                None => Ray::standard(&s)?,
            };
            let pcfg = PipelineConfig { c_lambda: *c_lambda, c_r: *c_r, cert: cfg.clone(), two_halves: !no_two_halves };
            let report = ccat_upper_bound_along(&s, &ray, &pcfg)?;
            let mut summary = match report.bound {
                Some(b) => format!("ccat <= {b}"),
                None => "no bound certified".into(),
            };
            for f in &report.failures {
                summary.push_str(&format!("\n  {}: {}", f.stage, f.detail));
            }
            let passed = report.bound.is_some();
            finish(cli, &cfg, "run-pipeline", json!({ "pipeline": report }), passed, out.as_deref(), &summary)
        }
        Command::Profile { space, set, radii, out_dir } => {
            let s = load_space(space)?;
            let sd = read_json::<SetDoc>(set, SetDoc::SCHEMA)?;
            if sd.space_label != s.label() {
                return Err(Error::DomainMismatch(format!("set refers to {:?}", sd.space_label)));
            }
            let radii = rat_list(radii).map_err(Error::Malformed)?;
            let radii = &radii;
            let profile = if sd.is_family() {
                let members = sd.family.iter().map(|m| PointSubset::new(&s, m.clone())).collect::<Result<Vec<_>>>()?;
                let fam = SubsetFamily::new(&s, members, qi(0), qi(0));
                family_dispersion_profile(&fam, radii)
            } else {
                dispersion_profile(&PointSubset::new(&s, sd.members.clone())?, radii)
            };
            let files = emit_plot_data(&PlotData { dispersion: Some(profile), ..Default::default() }, out_dir)?;
            println!("wrote {}", files[0].display());
            Ok(true)
        }
        Command::Report { report, out_dir } => {
            let bundle = read_json::<CertificateBundle>(report, CertificateBundle::SCHEMA)?;
            let data = PlotData::from_bundle(&bundle)?;
            for f in emit_plot_data(&data, out_dir)? {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
    }
}
