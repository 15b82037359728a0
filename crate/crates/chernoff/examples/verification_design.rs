//! One-shot verification designs: the max-min LP on finite environments,
//! checked against the exhaustive grid oracle, plus the minimax family where
//! a single arm carries all discrimination power.
//!
//!     cargo run --release --example verification_design

use chernoff::design::{
    brute_force_design, solve_verification_lp, sparsify_design, DesignTarget, LpInstance,
};
use chernoff::envs::{build_minimax, build_three_group};

fn main() -> chernoff::Result<()> {
    let env = build_three_group(0);
    println!("three-group verification designs (50 arms):");
    for hyp in 0..env.means.hyp_count() {
        let inst = LpInstance::verification(&env.means, hyp)?;
        let sol = solve_verification_lp(&inst)?;
        let sparse = sparsify_design(&sol.design, DesignTarget::Lp(&inst));
        println!(
            "  hypothesis {hyp}: objective {:.3}, support {:?}",
            sol.objective,
            sparse.support()
        );
    }

    println!("\nminimax family (arm 1 is the only informative arm):");
    for j in [4usize, 6, 8] {
        let env = build_minimax(j, 5, 1.0, 0)?;
        let inst = LpInstance::verification(&env.means, 0)?;
        let sol = solve_verification_lp(&inst)?;
        let grid = brute_force_design(DesignTarget::Lp(&inst), 100)?;
        println!(
            "  J = {j}: design {:?}, objective {:.5} (= Gamma^2/J^2 = {:.5}), grid agrees to {:.1e}",
            sol.design.probs,
            sol.objective,
            1.0 / (j * j) as f64,
            (sol.objective - grid.objective).abs()
        );
    }
    Ok(())
}
