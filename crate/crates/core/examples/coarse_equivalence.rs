//! Floor and inclusion between a sampled line and the integers are a coarse
//! equivalence: both compositions stay within distance 1 of the identity.

use coarsecat::maps::{certify_control, check_coarse_equivalence, CertConfig, MapSample};
use coarsecat::rational::{q, qi};
use coarsecat::space::{build_grid_space, build_sampled_line};

fn main() -> coarsecat::Result<()> {
    let line = build_sampled_line(q(1, 2), qi(100))?;
    let ints = build_grid_space(1, 100)?;
    let f = MapSample::floor_map(&line, &ints)?;
    let g = MapSample::integer_inclusion(&ints, &line)?;
    let cfg = CertConfig::default();

    let cert = check_coarse_equivalence(&f, &g, qi(1), &cfg)?;
    println!("coarse equivalence with bound 1: {}", if cert.passed { "certified" } else { "failed" });
    println!("  d(g∘f, id) = {}, d(f∘g, id) = {}", cert.closeness_gf, cert.closeness_fg);

    let control = certify_control(&f, &cfg)?;
    let bounds = &control.bounds;
    println!("floor map control on {} sampled distances ({:?} scan):", bounds.grid_ticks.len(), bounds.scan);
    for (r, (up, lo)) in bounds.sample_grid().iter().zip(bounds.rho_upper().iter().zip(bounds.rho_lower())).take(6) {
        println!("  r = {r:>4}: rho_upper = {up}, rho_lower = {lo}");
    }
    Ok(())
}
