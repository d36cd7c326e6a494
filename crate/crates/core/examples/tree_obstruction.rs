//! Two branches of a binary tree: no path from a point of one branch to the
//! other avoids a ball around the root, so the search returns NoPath. On the
//! plane the same search goes around the ball, within twice the norm only
//! when the ball is small enough.

use coarsecat::dispersed::{audit_path, find_avoiding_paths};
use coarsecat::rational::qi;
use coarsecat::space::{build_grid_space, build_tree_space, PointSubset, Ray};
use coarsecat::Error;

fn main() -> coarsecat::Result<()> {
    let tree = build_tree_space(2, 12)?;
    let left = Ray::tree_branch(&tree, 0)?;
    let right = Ray::tree_branch(&tree, 1)?;
    let x = right.point(10);
    let a = PointSubset::new(&tree, vec![x as u32])?;
    for r in 1..=4 {
        match find_avoiding_paths(&tree, &left, &a, qi(r)) {
            Err(Error::NoPath { point, radius }) => {
                println!("R = {r}: no path from {} to {} avoiding B_p({radius})", tree.point_name(point), left.label())
            }
            Ok(_) => println!("R = {r}: unexpected path"),
            Err(e) => return Err(e),
        }
    }

    let grid = build_grid_space(2, 40)?;
    let ray = Ray::grid_axis(&grid, 0, 1)?;
    let y = grid.grid_point(&[-20, 0]).unwrap();
    let a = PointSubset::new(&grid, vec![y as u32])?;
    for r in [5, 10] {
        let paths = find_avoiding_paths(&grid, &ray, &a, qi(r))?;
        let rec = paths.path(y).unwrap();
        let audit = audit_path(&grid, &ray, qi(r), &rec);
        println!(
            "plane, R = {r}: {} reaches {} in {} steps; length bound {}, gamma = {}",
            grid.point_name(y),
            grid.point_name(*rec.points.last().unwrap()),
            rec.k,
            if audit.length_bound { "met" } else { "exceeded, so the ladder moves this point to a larger rung" },
            paths.gamma
        );
    }
    Ok(())
}
