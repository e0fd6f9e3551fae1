//! Runs the full experiment on the default synthetic corpus and prints the
//! per-strategy medians.
//!
//! cargo run --release -p splitlab --example synthetic_experiment -- [repeats] [seed]

use std::time::Instant;

use splitlab::{
    generate_synthetic, run_experiment, ExperimentConfig, Learner, Strategy, SynthConfig,
};

fn main() -> splitlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let repeats = args.next().and_then(|a| a.parse().ok()).unwrap_or(25);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let dataset = generate_synthetic(&SynthConfig::default_layout(), seed)?;
    let config = ExperimentConfig {
        repeats,
        seed,
        ..ExperimentConfig::default()
    };
    let start = Instant::now();
    let report = run_experiment(&dataset, &config)?;
    println!("{} rows in {:.1?}", report.rows.len(), start.elapsed());

    println!(
        "{:<14} {:<18} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "strategy", "learner", "BA", "BA iqr", "sens", "spec", "f1", "sim"
    );
    for s in Strategy::ALL {
        for l in Learner::ALL {
            let get = |m: &str| {
                report
                    .stat(s, l, m)
                    .map(|st| (st.median, st.iqr))
                    .unwrap_or((f64::NAN, f64::NAN))
            };
            let (ba, ba_iqr) = get("balanced_accuracy");
            println!(
                "{:<14} {:<18} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>8.3}",
                s.as_str(),
                l.as_str(),
                ba,
                ba_iqr,
                get("sensitivity").0,
                get("specificity").0,
                get("f1").0,
                get("similarity_fraction").0
            );
        }
    }
    let failures = report.rows.iter().filter(|r| !r.is_ok()).count();
    println!("failed rows: {failures}");
    Ok(())
}
