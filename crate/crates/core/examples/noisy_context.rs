//! Pick a clean context out of a training set padded with synthetic rows.
//!
//! Half of the rows are dropped and replaced by rows drawn from each column's
//! marginal, which carry no class signal. A 5-nearest-neighbour surrogate
//! scores contexts.

use vipcop::baselines::{run_baseline, BaselineKind, BaselineSpec, Inputs};
use vipcop::data::{inject_noise, two_gaussians, NoiseKind, NoiseSpec, Origin};
use vipcop::engine::{self, EngineConfig};
use vipcop::evaluator::{balanced_accuracy, Budget, Evaluator, KnnSurrogate};

fn main() -> vipcop::Result<()> {
    let clean = two_gaussians(800, 6, 1.0, 3)?;
    let train = inject_noise(
        &clean,
        &NoiseSpec {
            kind: NoiseKind::S1Marginal,
            drop_fraction: 0.5,
            seed: 3,
        },
    )?;
    let val = two_gaussians(300, 6, 1.0, 4)?;
    let test = two_gaussians(600, 6, 1.0, 5)?;
    let budget = Budget::new(80, 6)?;
    let knn = KnnSurrogate::new(5, None)?;

    let cfg = EngineConfig {
        rounds: 80,
        batch: 16,
        seed: 3,
        ..EngineConfig::default()
    };
    let out = engine::optimize(&train, &val, &knn, &budget, &cfg)?;
    let rows = out.selection.samples();
    let injected = rows
        .iter()
        .filter(|&&r| train.row_origins()[r] == Origin::Injected)
        .count();
    let pool = train
        .row_origins()
        .iter()
        .filter(|&&o| o == Origin::Injected)
        .count();
    let score = balanced_accuracy(&knn.score_context(&train, &out.selection, &test)?, test.labels())?;

    let inputs = Inputs {
        train: &train,
        val: &val,
        test: &test,
        evaluator: &knn,
        budget: &budget,
    };
    let random = run_baseline(
        &BaselineSpec::new(BaselineKind::from_id("h1").unwrap(), 3),
        inputs,
    )?;

    println!("training pool: {} rows, {} injected", train.n_rows(), pool);
    println!(
        "engine context: {} rows, {} injected ({:.1}%)",
        rows.len(),
        injected,
        100.0 * injected as f64 / rows.len() as f64
    );
    println!(
        "test balanced accuracy: engine {score:.4}, random contexts {:.4}",
        random.score
    );
    Ok(())
}
