//! Dispersion profiles of a sparse set and of a family, written as CSV.

use coarsecat::dispersed::{dispersion_profile, family_dispersion_profile};
use coarsecat::cover::SubsetFamily;
use coarsecat::plot::{emit_plot_data, PlotData};
use coarsecat::rational::qi;
use coarsecat::space::{build_grid_space, PointSubset};

fn main() -> coarsecat::Result<()> {
    let line = build_grid_space(1, 5000)?;
    let powers: Vec<u32> = (0..=12).map(|k| line.grid_point(&[1 << k]).unwrap() as u32).collect();
    let u = PointSubset::new(&line, powers)?;
    let radii: Vec<_> = [0, 4, 16, 64, 256, 1024, 3000].into_iter().map(qi).collect();
    let p = dispersion_profile(&u, &radii);
    for (r, v) in p.radii.iter().zip(&p.values) {
        println!("∂({r}) = {}", v.map_or("inf".to_string(), |v| v.to_string()));
    }

    // Intervals [4^k, 4^k + k] grow apart as they move out.
    let members = (1..=6)
        .map(|k: i32| {
            let start = 4i32.pow(k as u32);
            let pts = (start..=start + k).map(|v| line.grid_point(&[v]).unwrap() as u32).collect();
            PointSubset::new(&line, pts)
        })
        .collect::<coarsecat::Result<Vec<_>>>()?;
    let fam = SubsetFamily::new(&line, members, qi(1), qi(6));
    let fp = family_dispersion_profile(&fam, &radii);
    println!("family profile: {:?}", fp.values.iter().map(|v| v.map(|q| q.to_string())).collect::<Vec<_>>());

    let dir = std::env::temp_dir().join("coarsecat-dispersion");
    let files = emit_plot_data(&PlotData { dispersion: Some(p), ..Default::default() }, &dir)?;
    println!("wrote {}", files[0].display());
    Ok(())
}
