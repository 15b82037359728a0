//! Compare the sequential testing policies on the three-group environment:
//! one highly informative arm, five singly informative arms, forty-four
//! near-useless ones.
//!
//!     cargo run --release --example active_testing

use chernoff::envs::build_three_group;
use chernoff::policies::{run_trial, PolicyConfig, PolicyKind, StoppingRule};
use chernoff::report::{box_stats, summarize_trials};
use chernoff::rng::derive_seed;

fn main() -> chernoff::Result<()> {
    let env = build_three_group(0);
    let delta = 0.1;
    let trials = 200;
    let rule = StoppingRule::gaussian(env.means.hyp_count(), delta)?;

    println!("three-group environment: n = {}, J = {}, delta = {delta}", env.means.arm_count(), env.means.hyp_count());
    println!("{:<14} {:>8} {:>8} {:>8} {:>8} {:>8}", "policy", "mean", "q1", "median", "q3", "errors");
    for kind in [
        PolicyKind::Cs,
        PolicyKind::Top2,
        PolicyKind::EpsCs,
        PolicyKind::BatchCs { b: 10 },
        PolicyKind::Uniform,
    ] {
        let label = kind.label();
        let reports: Vec<_> = (0..trials)
            .map(|trial| {
                let policy = PolicyConfig::new(kind, derive_seed(7, &label, trial));
                run_trial(&env, &policy, &rule)
            })
            .collect::<chernoff::Result<_>>()?;
        let summary = summarize_trials(label.clone(), &reports);
        let times: Vec<f64> = reports.iter().map(|r| r.stop_time as f64).collect();
        let stats = box_stats(&times);
        println!(
            "{label:<14} {:>8.1} {:>8.1} {:>8.1} {:>8.1} {:>8}",
            stats.mean,
            stats.q1,
            stats.median,
            stats.q3,
            (summary.error_rate * trials as f64).round() as u64,
        );
    }
    Ok(())
}
