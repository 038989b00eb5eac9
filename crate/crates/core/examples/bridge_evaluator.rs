//! Drive the engine through an external evaluator process.
//!
//! Any program that speaks the line-delimited JSON protocol works. By default
//! this runs the mock in `tests/fixtures/mock_bridge.py`, which predicts class
//! frequencies of the context. Pass a different command as arguments to use a
//! real model server.

use std::time::Duration;

use vipcop::data::two_gaussians;
use vipcop::engine::{self, EngineConfig};
use vipcop::evaluator::{balanced_accuracy, BridgeConfig, BridgeEvaluator, Budget, Evaluator};

fn main() -> vipcop::Result<()> {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() {
        let mock = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/mock_bridge.py");
        args = vec!["python3".into(), mock.into()];
    }
    let mut cfg = BridgeConfig::new(&args[0]);
    cfg.args = args[1..].to_vec();
    cfg.timeout = Duration::from_secs(30);
    let bridge = BridgeEvaluator::spawn(&cfg)?;
    println!("connected to {}", bridge.remote_name());

    let train = two_gaussians(200, 4, 1.0, 1)?;
    let val = two_gaussians(60, 4, 1.0, 2)?;
    let test = two_gaussians(100, 4, 1.0, 3)?;
    let budget = Budget::new(30, 4)?;
    let out = engine::optimize(
        &train,
        &val,
        &bridge,
        &budget,
        &EngineConfig {
            rounds: 10,
            batch: 8,
            ..EngineConfig::default()
        },
    )?;
    let calls: usize = out.runs.iter().map(|r| r.evaluator_calls).sum();
    let score = balanced_accuracy(
        &bridge.score_context(&train, &out.selection, &test)?,
        test.labels(),
    )?;
    println!(
        "{calls} evaluator calls, context {} rows, test bacc {score:.4}",
        out.selection.n_samples()
    );

    for status in bridge.shutdown()? {
        println!("evaluator exited with {status}");
    }
    Ok(())
}
