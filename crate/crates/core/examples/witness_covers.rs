//! Asymptotic-dimension witnesses: shifted cube cores on the plane lattice,
//! depth bands on a binary tree, each re-certified independently.

use coarsecat::cover::{grid_asdim_witness, tree_asdim_witness, verify_cover, WitnessCover};
use coarsecat::rational::qi;
use coarsecat::space::{build_grid_space, build_tree_space};

fn report(w: &WitnessCover) {
    let cert = verify_cover(w);
    println!("{} at r = {} ({:?})", w.space.label(), w.scale_r, w.construction);
    for (i, f) in cert.families.iter().enumerate() {
        println!(
            "  family {i}: {} members, min gap {}, max diameter {} (bound {})",
            f.members,
            f.check.min_gap.map_or("inf".into(), |g| g.to_string()),
            f.check.max_diam,
            w.families[i].diam_bound
        );
    }
    println!("  covers: {}, multiplicity {}, verdict {}", cert.covers, cert.multiplicity, cert.passed);
}

fn main() -> coarsecat::Result<()> {
    let grid = build_grid_space(2, 300)?;
    report(&grid_asdim_witness(&grid, qi(5))?);
    let tree = build_tree_space(2, 12)?;
    report(&tree_asdim_witness(&tree, qi(2))?);
    Ok(())
}
