//! Active regression on the logistic three-group pool: the adaptive
//! min-eigenvalue sampler finds the informative actions and beats uniform
//! sampling on estimation error.
//!
//!     cargo run --release --example active_regression

use chernoff::envs::build_logistic_groups;
use chernoff::regression::{run_regression, RegressionPolicy};
use chernoff::report::summarize_regression;
use chernoff::rng::derive_stream;

fn main() -> chernoff::Result<()> {
    let (model, env) = build_logistic_groups(0);
    let horizon = 300;
    let trials = 20;
    println!(
        "logistic pool: {} actions in the plane, theta* = {:?}, horizon {horizon}, {trials} trials",
        model.arm_count(),
        env.theta_star
    );
    for policy in [RegressionPolicy::Cs, RegressionPolicy::EpsCs, RegressionPolicy::Uniform] {
        let runs: Vec<_> = (0..trials)
            .map(|trial| {
                let mut rng = derive_stream(3, policy.label(), trial);
                run_regression(&model, &env, policy, horizon, &mut rng)
            })
            .collect::<chernoff::Result<_>>()?;
        let curve = summarize_regression(policy.label().to_string(), &runs);
        println!("\npolicy {}:", policy.label());
        println!("  {:>6} {:>12} {:>12} {:>9}", "round", "est_err med", "pt_gap med", "support");
        for (i, cp) in curve.checkpoints.iter().enumerate() {
            println!(
                "  {cp:>6} {:>12.4} {:>12.5} {:>9.0}",
                curve.est_err_median[i], curve.pt_gap_median[i], curve.support_size_median[i]
            );
        }
    }
    Ok(())
}
