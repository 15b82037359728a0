//! Actively learning a two-unit ReLU network over a non-uniform planar point
//! cloud: per-round designs at the current estimate, four sign-pattern least
//! squares, estimation error tracked against uniform sampling.
//!
//!     cargo run --release --example neural_net

use chernoff::envs::build_relu_net;
use chernoff::regression::{run_regression, RegressionPolicy};
use chernoff::rng::derive_stream;

fn main() -> chernoff::Result<()> {
    let (model, env) = build_relu_net(0, 50)?;
    let horizon = 600;
    let trials = 4;
    println!(
        "relu network over {} points; ground truth signs ({}, {})",
        model.arm_count(),
        env.theta_star[6],
        env.theta_star[7]
    );
    for policy in [RegressionPolicy::Cs, RegressionPolicy::Uniform] {
        let mut finals = Vec::new();
        for trial in 0..trials {
            let mut rng = derive_stream(9, policy.label(), trial);
            let run = run_regression(&model, &env, policy, horizon, &mut rng)?;
            finals.push(*run.est_err.last().unwrap());
        }
        finals.sort_by(f64::total_cmp);
        println!(
            "  {:<8} final est_err over {trials} trials: {:?}",
            policy.label(),
            finals.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
        );
    }
    Ok(())
}
