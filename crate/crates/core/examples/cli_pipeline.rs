//! The command-line workflow driven from code: simulate, extrapolate from a
//! dumped win-count file, and render the report.

use acx::cli::{run, Command, RunManifest};

fn main() -> acx::Result<()> {
    let out = std::env::temp_dir().join("acx-cli-pipeline");

    let mut sim = RunManifest::new(Command::Simulate, out.join("sim"));
    sim.k = vec![5, 10];
    sim.target_k = Some(30);
    sim.replicates = Some(3);
    sim.seed = Some(9);
    sim.dump_wins = true;
    for line in run(&sim)?.messages {
        println!("simulate: {line}");
    }

    let mut ex = RunManifest::new(Command::Extrapolate, out.join("extrapolate"));
    ex.inputs = vec![out.join("sim/wins/rep000_qda_k10.csv")];
    ex.target_k = Some(30);
    let outcome = run(&ex)?;
    for line in &outcome.messages {
        println!("extrapolate: {line}");
    }
    println!("extrapolate exit status {}", outcome.code);

    let mut rep = RunManifest::new(Command::Report, out.join("report"));
    rep.inputs = vec![out.join("sim/replication.csv")];
    for f in run(&rep)?.files {
        println!("report wrote {}", f.display());
    }
    Ok(())
}
