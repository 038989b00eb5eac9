//! Every baseline next to the engine on one synthetic dataset.

use vipcop::baselines::{run_baseline, test_score, BaselineKind, BaselineSpec, Inputs};
use vipcop::data::two_gaussians;
use vipcop::engine::{self, EngineConfig};
use vipcop::evaluator::{Budget, KnnSurrogate};

fn main() -> vipcop::Result<()> {
    let train = two_gaussians(600, 8, 0.5, 10)?;
    let val = two_gaussians(200, 8, 0.5, 11)?;
    let test = two_gaussians(400, 8, 0.5, 12)?;
    let budget = Budget::new(60, 4)?;
    let knn = KnnSurrogate::new(5, Some(budget))?;
    let inputs = Inputs {
        train: &train,
        val: &val,
        test: &test,
        evaluator: &knn,
        budget: &budget,
    };

    for id in BaselineKind::IDS {
        let r = run_baseline(&BaselineSpec::new(BaselineKind::from_id(id).unwrap(), 7), inputs)?;
        println!(
            "{id:>6}  {:.4}  context {}x{}  {:.2}s",
            r.score, r.context_size.samples, r.context_size.features, r.wall_time
        );
    }

    let cfg = EngineConfig {
        rounds: 60,
        batch: 16,
        seed: 7,
        ..EngineConfig::default()
    };
    let out = engine::optimize(&train, &val, &knn, &budget, &cfg)?;
    let score = test_score(inputs, &out.selection)?;
    println!(
        "vipcop  {score:.4}  context {}x{}",
        out.selection.n_samples(),
        out.selection.n_features()
    );
    Ok(())
}
