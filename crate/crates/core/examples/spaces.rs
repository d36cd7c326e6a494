//! Bundled spaces: sizes, norms, balls, annuli and rays, plus a JSON round trip.

use coarsecat::io::{from_json, to_json, SpaceDoc};
use coarsecat::rational::{q, qi};
use coarsecat::space::{annulus, ball, build_grid_space, build_sampled_line, build_tree_space, Domain, Ray};

fn main() -> coarsecat::Result<()> {
    let grid = build_grid_space(2, 50)?;
    println!("{}: {} points, R_int = {}", grid.label(), grid.len(), grid.interior_radius());
    let p = grid.basepoint();
    for r in [1, 2, 10] {
        println!("  |B_p({r})| = {} (open ball)", ball(&grid, p, qi(r)).len());
    }
    println!("  annulus 10 <= |x| < 20 has {} points", annulus(&grid, qi(10), qi(20))?.len());

    let tree = build_tree_space(3, 6)?;
    println!("{}: {} points", tree.label(), tree.len());
    let ray = Ray::tree_branch(&tree, 2)?;
    println!("  {} ends at {}", ray.label(), tree.point_name(*ray.points().last().unwrap() as usize));

    let line = build_sampled_line(q(1, 2), qi(5))?;
    println!("{}: {} points with unit {}", line.label(), line.len(), line.unit());

    let doc = SpaceDoc::from_space(&grid);
    let text = to_json(&doc)?;
    let back = from_json::<SpaceDoc>(&text, SpaceDoc::SCHEMA)?.to_space()?;
    println!("JSON round trip: {} bytes, {} points back", text.len(), back.len());
    Ok(())
}
