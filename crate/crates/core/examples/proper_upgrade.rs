//! Upgrading the rotation from the x-axis ray to the y-axis ray. The scan
//! reports every cylinder pair at distance at most 1 whose images are
//! farther apart, split by whether the pair straddles a step of rho.

use coarsecat::combing::Combing;
use coarsecat::upgrade::{measure_modulus, upgrade_proper_homotopy, ProperHomotopy, Reparametrized, Rotation};

fn main() -> coarsecat::Result<()> {
    let radius: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(60);
    let rot = Rotation::new(radius)?;
    let hp = Reparametrized::new(&rot, 4)?;
    let k_max = radius as usize;
    let modulus = measure_modulus(&hp, k_max)?;
    println!("moduli L_k (lattice 1/{}): {:?}", modulus.lattice, &modulus.l[..modulus.l.len().min(12)]);

    let combing = Combing::geodesic(rot.source(), rot.source().basepoint())?;
    let up = upgrade_proper_homotopy(&rot, &combing, &modulus)?;
    let rho = up.homotopy.rho();
    println!("staircase breakpoints b_k: {:?}", &rho.breakpoints[..rho.breakpoints.len().min(8)]);
    let c = &up.claim;
    println!(
        "{} pairs scanned, {} violations ({} at one level, {} across a step), max image distance {}",
        c.pairs_scanned, c.violations, c.violations_same_level, c.violations_across_step, c.max_image_distance
    );
    println!(
        "shrink inequality failures {}, time inequality failures {}",
        c.shrink_inequality_failures, c.time_inequality_failures
    );
    for w in c.witnesses.iter().take(3) {
        println!("  {} -> {}, {} -> {} (distance {})", w.a, w.image_a, w.b, w.image_b, w.image_distance);
    }
    println!("unit-distance bound {}", if c.passed { "holds" } else { "fails" });
    Ok(())
}
