//! The monotone lattice bicombing of the plane, a ball contraction along it,
//! and the shrinking homotopy from the identity to `Sh_rho`.

use coarsecat::combing::{
    ball_contraction, geodesic_bicombing_grid, shrinking_homotopy, shrinking_map, verify_bicombing, verify_combing,
    Combing,
};
use coarsecat::cylinder::verify_homotopy;
use coarsecat::maps::{CertConfig, MapSample};
use coarsecat::rational::qi;
use coarsecat::space::{ball, build_grid_space, Domain};

fn main() -> coarsecat::Result<()> {
    let cfg = CertConfig::default();
    let small = build_grid_space(2, 10)?;
    let b = geodesic_bicombing_grid(&small)?;
    let bc = verify_bicombing(&b, &cfg)?;
    println!(
        "bicombing on {}: {} triples, {} violations, combined rho_upper(1) = {}",
        small.label(),
        bc.triples_checked,
        bc.axiom_violations, bc.combined_rho_upper_1
    );

    let grid = build_grid_space(2, 30)?;
    let c = Combing::geodesic(&grid, grid.basepoint())?;
    let cc = verify_combing(&c, &cfg)?;
    let v = cc.axiom1_violations + cc.axiom2_violations + cc.minimality_violations;
    println!("combing on {}: {v} violations, rho_upper(1) = {}", grid.label(), cc.rho_upper_1);

    let disc = ball(&grid, grid.basepoint(), qi(6));
    let bcon = ball_contraction(&c, &disc, &cfg)?;
    println!("contraction of B_p(6) tabulated on {} cylinder points", bcon.homotopy.cylinder_arc().len());

    let grid = build_grid_space(2, 20)?;
    let c = Combing::geodesic(&grid, grid.basepoint())?;
    let rho = |t: u64| t / 2;
    let sh = shrinking_map(&c, &rho)?;
    let h = shrinking_homotopy(&c, &rho)?;
    let cert = verify_homotopy(&h, &MapSample::identity(&grid), &sh, qi(0), &cfg)?;
    let x = grid.grid_point(&[7, -4]).unwrap();
    println!("Sh moves {} to {}", grid.point_name(x), grid.point_name(sh.values()[x] as usize));
    println!(
        "shrinking homotopy on {}: {} ({} cylinder points, rho_upper(R_int) = {})",
        grid.label(),
        if cert.passed { "certified" } else { "failed" },
        cert.cylinder_points,
        cert.control.upper_at_interior
    );
    Ok(())
}
