//! The multiscale pipeline on the integers (or the plane with `plane`), and
//! the two-halves cover that certifies ccat <= 1 directly.
//!
//! `cargo run --release --example pipeline -- [z|plane|line] [radius]`

use coarsecat::pipeline::{ccat_upper_bound, PipelineConfig};
use coarsecat::rational::{q, qi};
use coarsecat::space::{build_grid_space, build_sampled_line};

fn main() -> coarsecat::Result<()> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "z".into());
    let radius: u32 = args.next().and_then(|a| a.parse().ok()).unwrap_or(match which.as_str() {
        "plane" => 400,
        "line" => 2000,
        _ => 100_000,
    });
    let space = match which.as_str() {
        "plane" => build_grid_space(2, radius)?,
        "line" => build_sampled_line(q(1, 2), qi(radius as i64))?,
        _ => build_grid_space(1, radius)?,
    };
    let report = ccat_upper_bound(&space, &PipelineConfig::default())?;
    println!("{}", report.space);
    if let Some(s) = &report.schedule {
        println!("  R = {:?}", s.radii.iter().map(|r| r.to_string()).collect::<Vec<_>>());
        println!("  λ = {:?}", s.scales.iter().map(|r| r.to_string()).collect::<Vec<_>>());
    }
    if let Some(a) = &report.assembly {
        let sizes: Vec<usize> = a.families.iter().map(|f| f.members).collect();
        println!("  assembled families {sizes:?}, certified: {}", a.passed);
    }
    for f in &report.failures {
        println!("  {}: {}", f.stage, f.detail);
    }
    println!("  pipeline bound {:?}", report.pipeline_bound);
    if let Some(t) = &report.two_halves {
        println!("  two halves certified: {}", t.passed);
    }
    match report.bound {
        Some(b) => println!("ccat <= {b}"),
        None => println!("no bound certified"),
    }
    Ok(())
}
