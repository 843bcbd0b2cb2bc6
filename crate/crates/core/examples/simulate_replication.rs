//! A small simulation study: how well does each estimator predict 50-class
//! accuracy from k = 5 or 10 training classes?

use acx::cli::summarize;
use acx::simlab::{run_replication, ClassifierSpec, ReplicationConfig};

fn main() -> acx::Result<()> {
    let mut cfg = ReplicationConfig {
        classifiers: vec![ClassifierSpec::qda(), ClassifierSpec::gnb()],
        k_list: vec![5, 10],
        replicates: 10,
        ..ReplicationConfig::default()
    };
    cfg.meta.seed = 2024;
    let run = run_replication(&cfg, false)?;
    println!("{:<8} {:<6} {:>3} {:>8} {:>8}", "model", "est", "k", "mean", "MAE");
    for row in summarize(&run.records) {
        println!(
            "{:<8} {:<6} {:>3} {:>8.4} {:>8.4}   (truth {:.4})",
            row.classifier,
            row.estimator,
            row.k,
            row.mean_p_hat.unwrap_or(f64::NAN),
            row.mae.unwrap_or(f64::NAN),
            row.mean_truth
        );
    }
    Ok(())
}
