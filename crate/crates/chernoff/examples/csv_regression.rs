//! Dataset-driven regression: write a synthetic linear CSV, ingest it (rows
//! become actions, the ground truth is the OLS fit), compute the
//! min-eigenvalue design over all rows, and sparsify its support.
//!
//!     cargo run --release --example csv_regression

use std::io::Write;

use chernoff::design::{solve_min_eig_design, sparsify_design, DesignTarget};
use chernoff::envs::{ingest_csv, ColumnRef, DatasetSpec, Normalize};
use chernoff::regression::{run_regression, RegressionPolicy};
use chernoff::rng::{derive_stream, stream_from_seed};
use rand::Rng;

fn main() -> chernoff::Result<()> {
    // Synthetic dataset: 400 rows, 6 features, exact linear target.
    let d = 6;
    let rows = 400;
    let mut rng = stream_from_seed(11);
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut file = tempfile::NamedTempFile::new().map_err(chernoff::Error::Io)?;
    writeln!(file, "f0,f1,f2,f3,f4,f5,target").map_err(chernoff::Error::Io)?;
    for _ in 0..rows {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
        let cells: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        writeln!(file, "{},{y:.6}", cells.join(",")).map_err(chernoff::Error::Io)?;
    }
    file.flush().map_err(chernoff::Error::Io)?;

    let data = ingest_csv(&DatasetSpec {
        path: file.path().to_string_lossy().into_owned(),
        target_column: ColumnRef::Name("target".into()),
        feature_columns: vec![],
        normalize: Normalize::None,
        noise_std: 0.5f64.sqrt(),
    })?;
    println!(
        "ingested {} actions x {} features ({} rows dropped); OLS theta* recovered to {:.1e}",
        data.model.arm_count(),
        d,
        data.rows_dropped,
        data.env
            .theta_star
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
    );

    let inst = data.model.eig_instance(&data.env.theta_star)?;
    let sol = solve_min_eig_design(&inst, 1500, 1e-8)?;
    let sparse = sparsify_design(&sol.design, DesignTarget::Eig(&inst));
    println!(
        "design over {rows} rows: objective {:.5}, support {} -> {} after reduction (bound {})",
        sol.objective,
        sol.design.support_size(),
        sparse.support_size(),
        d * (d + 1) / 2 + 1
    );

    let mut rng = derive_stream(11, "csv_cs", 0);
    let run = run_regression(&data.model, &data.env, RegressionPolicy::Cs, 200, &mut rng)?;
    println!(
        "200 rounds of adaptive sampling: est_err {:.4} -> {:.4}, final pt gap {:.2e}",
        run.est_err[0],
        run.est_err.last().unwrap(),
        run.pt_gap.last().unwrap()
    );
    Ok(())
}
