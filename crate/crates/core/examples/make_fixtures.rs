//! Regenerates the files under `data/`.
//!
//! ```text
//! cargo run -p occmob-core --example make_fixtures -- data
//! ```
//!
//! - `cohort_pairs.csv`: one unit-weight record per father–child pair.
//! - `cohort_counts.csv`: the same table as nine weighted rows per cohort.
//! - `incomes_cohort_i.csv`: log-normal income panel for the first cohort,
//!   nine waves, exact per-wave log moments.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use occmob_core::io::{default_cohorts, write_income_csv, write_micro_csv, MicroRecord};
use occmob_core::simulator::{simulate_income_panel, IncomePanelSpec};
use occmob_core::OccClass;

const COUNTS: [[[u32; 3]; 3]; 3] = [
    [[937, 789, 168], [353, 984, 302], [17, 74, 121]],
    [[2298, 1827, 323], [752, 2038, 566], [54, 255, 212]],
    [[1048, 603, 85], [370, 798, 159], [33, 141, 82]],
];

const INCOME_SEED: u64 = 1945;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;

    let mut pairs = Vec::new();
    let mut weighted = Vec::new();
    for (cohort, table) in default_cohorts().iter().zip(COUNTS) {
        let span = (cohort.birth_to - cohort.birth_from + 1) as u32;
        for father in OccClass::ALL {
            for child in OccClass::ALL {
                let n = table[father.index()][child.index()];
                for k in 0..n {
                    pairs.push(MicroRecord::new(cohort.birth_from + (k % span) as i32, father, child));
                }
                weighted.push(MicroRecord { weight: n as f64, ..MicroRecord::new(cohort.birth_from, father, child) });
            }
        }
    }
    write_micro_csv(&pairs, BufWriter::new(File::create(dir.join("cohort_pairs.csv"))?))?;
    write_micro_csv(&weighted, BufWriter::new(File::create(dir.join("cohort_counts.csv"))?))?;

    let spec = IncomePanelSpec {
        log_means: [6.0, 6.33, 6.64],
        log_variances: [0.64, 0.3072, 0.339456],
        waves: vec![1995, 1998, 2000, 2002, 2004, 2006, 2008, 2010, 2012],
        birth_year: 1945,
        per_cell: 60,
        exact_moments: true,
    };
    let panel = simulate_income_panel(&spec, INCOME_SEED)?;
    write_income_csv(&panel, BufWriter::new(File::create(dir.join("incomes_cohort_i.csv"))?))?;

    println!(
        "wrote {} pairs, {} weighted rows, {} incomes to {}",
        pairs.len(),
        weighted.len(),
        panel.len(),
        dir.display()
    );
    Ok(())
}
