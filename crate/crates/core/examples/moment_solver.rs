//! Forward moments of a known mixture, then every admissible root of the
//! moment system at the same component variances.
//!
//!     cargo run --release --example moment_solver

use fundsel::mixture::{forward_moments, solve_moments, PooledMoments};

fn main() -> fundsel::Result<()> {
    let (pi1, pi2, u1, u2, t1, t2) = (0.7, 0.2, -0.5, 1.2, 0.1, 0.1);
    let (e2, e4) = (0.4, 0.17);
    let m = forward_moments(pi1, pi2, u1, u2, t1, t2, e2, e4);
    println!("moments m1..m4 = {:.5?}", m);
    let mom = PooledMoments {
        m1: m[0],
        m2: m[1],
        m3: m[2],
        m4: m[3],
        eta_sq_bar: e2,
        eta_4_bar: e4,
    };
    for r in solve_moments(&mom, t1, t2)? {
        println!(
            "root: pi = ({:.4}, {:.4}, {:.4}), u = ({:+.4}, {:+.4}), residual {:.1e}",
            r.pi0, r.pi1, r.pi2, r.u1, r.u2, r.residual
        );
    }
    Ok(())
}
