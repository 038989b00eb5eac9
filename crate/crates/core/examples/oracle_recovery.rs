//! Recover planted item values from an additive oracle.
//!
//! Thirty training rows, five of which add 0.10 to the score while the rest
//! subtract 0.05. The engine only sees subset scores.

use vipcop::data::Table;
use vipcop::engine::{self, EngineConfig, ItemUniverse};
use vipcop::evaluator::{AdditiveOracle, Budget};

const POSITIVE: [usize; 5] = [2, 7, 13, 19, 26];

fn main() -> vipcop::Result<()> {
    let train = Table::new(
        (0..30).map(f64::from).collect(),
        1,
        (0..30).map(|i| i % 2).collect(),
        2,
    )?;
    let val = Table::new(vec![0.0, 1.0], 1, vec![0, 1], 2)?;
    let budget = Budget::new(10, 1)?;
    let universe = ItemUniverse::new(30, 1, &budget)?;
    let weights: Vec<f64> = (0..30)
        .map(|i| if POSITIVE.contains(&i) { 0.10 } else { -0.05 })
        .collect();
    let oracle = AdditiveOracle::from_item_weights(&weights, &universe, 0.5, 0.0, 0)?;

    let cfg = EngineConfig {
        rounds: 300,
        batch: 16,
        ..EngineConfig::default()
    };
    let out = engine::optimize(&train, &val, &oracle, &budget, &cfg)?;

    for run in &out.runs {
        let mut order: Vec<usize> = (0..30).collect();
        order.sort_by(|&a, &b| run.phi_final.0[b].total_cmp(&run.phi_final.0[a]));
        let top = &order[..5];
        let hits = top.iter().filter(|i| POSITIVE.contains(i)).count();
        println!(
            "run {} tau {:>8.3}: top five {:?} ({hits}/5 planted), estimate {:.4}",
            run.run, run.tau, top, run.estimated_val
        );
    }
    let rows = out.selection.samples();
    println!("selected rows {rows:?}");
    println!(
        "planted rows kept: {}/5",
        POSITIVE.iter().filter(|p| rows.contains(p)).count()
    );
    Ok(())
}
