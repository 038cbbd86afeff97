// Reproduce the user-study comparison table from the bundled ratings.
//
//     cargo run --example study_stats

use std::error::Error;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use vtutor::stats::{independent_t_test, read_ratings_csv, reproduce_table};

pub fn run_example(out: &mut dyn Write) -> Result<(), Box<dyn Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/ratings.csv");
    let ratings = read_ratings_csv(File::open(path)?)?;
    let report = reproduce_table(&ratings, Some((36, 14)))?;
    write!(out, "{}", report.to_text())?;

    // The same test on hand-entered scores.
    let r = independent_t_test(&[6.0, 5.0, 7.0, 6.0, 5.0], &[4.0, 3.0, 5.0, 4.0, 4.0])?;
    writeln!(
        out,
        "toy example: t = {:.3}, p = {:.4}, d = {:.2}",
        r.t, r.p, r.cohens_d
    )?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example(&mut std::io::stdout())
}
