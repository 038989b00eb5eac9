//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always print. Exits
//! non-zero if any criterion fails.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng;
use vipcop::baselines::{self, xl_context, BaselineKind, BaselineSpec, ContextSize, Inputs, Report};
use vipcop::data::{inject_noise, two_gaussians, NoiseKind, NoiseSpec, Origin, Table};
use vipcop::engine::{
    self, batch_gradient, batch_loss, run_single, sampling_distribution, sgd_step, temperature_schedule,
    EngineConfig, ItemUniverse, SubsetObservation, SubsetSampler, ValueVector,
};
use vipcop::evaluator::{
    balanced_accuracy, AdditiveOracle, Budget, ContextSelection, EvalError, Evaluator, KnnSurrogate, Metric,
    Prediction,
};
use vipcop::rng;
use vipcop::stats::{critical_difference, paired_permutation_test, rank_row};

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

// ---------------------------------------------------------------- helpers

fn midranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&midranks(a), &midranks(b))
}

fn top_k(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut top = idx[..k].to_vec();
    top.sort_unstable();
    top
}

// ------------------------------------------------------ 1. value recovery

const POSITIVE: [usize; 5] = [2, 7, 13, 19, 26];

fn recovery_fixture() -> (Table, Table, Budget, Vec<f64>) {
    let x: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let y: Vec<u32> = (0..30).map(|i| i % 2).collect();
    let train = Table::new(x, 1, y, 2).unwrap();
    let val = Table::new(vec![0.0, 1.0], 1, vec![0, 1], 2).unwrap();
    let weights: Vec<f64> = (0..30)
        .map(|i| if POSITIVE.contains(&i) { 0.10 } else { -0.05 })
        .collect();
    (train, val, Budget::new(10, 1).unwrap(), weights)
}

fn criterion_1() -> Vec<Outcome> {
    let (train, val, budget, weights) = recovery_fixture();
    let universe = ItemUniverse::new(30, 1, &budget).unwrap();
    assert_eq!(universe.len(), 30);
    let oracle = AdditiveOracle::from_item_weights(&weights, &universe, 0.5, 0.0, 0).unwrap();
    let mut rhos = Vec::new();
    let mut hits = 0;
    let mut covered = 0;
    let mut exact_runs = 0;
    let mut total_runs = 0;
    let mut slowest: f64 = 0.0;
    for seed in 42..47 {
        let cfg = EngineConfig {
            rounds: 500,
            batch: 16,
            seed,
            ..EngineConfig::default()
        };
        let start = Instant::now();
        let out = engine::optimize(&train, &val, &oracle, &budget, &cfg).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let phi = out.best_run().phi_final.as_slice();
        rhos.push(spearman(phi, &weights));
        if top_k(phi, 5) == POSITIVE {
            hits += 1;
        }
        if POSITIVE.iter().all(|i| out.selection.samples().contains(i)) {
            covered += 1;
        }
        total_runs += out.runs.len();
        exact_runs += out
            .runs
            .iter()
            .filter(|r| top_k(r.phi_final.as_slice(), 5) == POSITIVE)
            .count();
    }
    let mean_rho = rhos.iter().sum::<f64>() / rhos.len() as f64;
    let rho_text: Vec<String> = rhos.iter().map(|r| format!("{r:.3}")).collect();
    vec![
        outcome(
            "1a",
            "value recovery: spearman(phi, w) >= 0.9",
            rhos.iter().all(|&r| r >= 0.9),
            format!(
                "per seed [{}], mean {mean_rho:.3}; two tied weight levels cap the attainable value at {:.3}",
                rho_text.join(", "),
                spearman(
                    &weights,
                    &weights
                        .iter()
                        .enumerate()
                        .map(|(i, w)| w + i as f64 * 1e-9)
                        .collect::<Vec<_>>()
                )
            ),
        ),
        outcome(
            "1b",
            "value recovery: top-5 equals true top-5 on >= 4 of 5 seeds",
            hits >= 4,
            format!(
                "{hits}/5 seeds; returned context holds all five positive items on {covered}/5 seeds; \
                 {exact_runs}/{total_runs} temperature runs rank them first"
            ),
        ),
        outcome(
            "1c",
            "value recovery: runtime < 30 s per seed",
            slowest < 30.0,
            format!("slowest seed {slowest:.2} s"),
        ),
    ]
}

// ----------------------------------------------- 2. least squares agreement

fn random_observations(s: usize, m: usize, count: usize, seed: u64) -> Vec<SubsetObservation> {
    let mut r = rng::stream(seed, &[]);
    (0..count)
        .map(|_| {
            let mut members = index::sample(&mut r, s, m).into_vec();
            members.sort_unstable();
            SubsetObservation::new(members, r.random::<f64>())
        })
        .collect()
}

fn normal_equations(s: usize, obs: &[SubsetObservation], ridge: f64) -> DVector<f64> {
    let mut c = DMatrix::<f64>::zeros(obs.len(), s);
    for (b, o) in obs.iter().enumerate() {
        for &i in &o.members {
            c[(b, i)] = 1.0;
        }
    }
    let p = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.performance));
    let gram = c.transpose() * &c + DMatrix::identity(s, s) * ridge;
    gram.cholesky()
        .expect("positive definite")
        .solve(&(c.transpose() * p))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (s, m) = (20, 8);
    let obs = random_observations(s, m, 200, 2);
    let exact = normal_equations(s, &obs, 1e-9);
    let mut phi = ValueVector::uniform(s);
    let mut steps = 0;
    let mut gap = f64::INFINITY;
    while steps < 200_000 {
        for _ in 0..1000 {
            phi = sgd_step(&phi, &obs, 0.05, None).0;
        }
        steps += 1000;
        gap = phi
            .as_slice()
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap < 1e-6 {
            break;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        "2",
        "full-batch steps reach the normal-equations solution",
        gap <= 1e-4 && secs < 5.0,
        format!("L-inf gap {gap:.2e} after {steps} steps in {secs:.2} s"),
    )
}

// ------------------------------------------------------- 3. gradient check

fn criterion_3() -> Outcome {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for inst in 0..50u64 {
        let mut r = rng::stream(3, &[inst]);
        let s = r.random_range(3..40);
        let m = r.random_range(1..=s);
        let b = r.random_range(1..20);
        let obs = random_observations(s, m, b, 100 + inst);
        let phi: Vec<f64> = (0..s).map(|_| r.random_range(-1.0..1.0)).collect();
        let intercept = (inst % 2 == 1).then(|| r.random_range(-1.0..1.0));
        let (grad, grad_c) = batch_gradient(&phi, intercept, &obs);
        for i in 0..s {
            let (mut up, mut down) = (phi.clone(), phi.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (batch_loss(&up, intercept, &obs) - batch_loss(&down, intercept, &obs)) / (2.0 * h);
            worst = worst.max((fd - grad[i]).abs());
        }
        if let (Some(c), Some(g)) = (intercept, grad_c) {
            let fd = (batch_loss(&phi, Some(c + h), &obs) - batch_loss(&phi, Some(c - h), &obs)) / (2.0 * h);
            worst = worst.max((fd - g).abs());
        }
    }
    outcome(
        "3",
        "gradient matches central differences on 50 instances",
        worst <= 1e-6,
        format!("max abs error {worst:.2e}"),
    )
}

// -------------------------------------------------- 4. temperature schedule

fn floor_log(r: usize, eta: usize) -> i32 {
    let mut k = 0;
    let mut p = eta;
    while p <= r {
        k += 1;
        p *= eta;
    }
    k
}

fn criterion_4() -> Outcome {
    let mut problems = Vec::new();
    for r in [1, 10, 100, 1000] {
        for eta in [2usize, 3] {
            let sched = temperature_schedule(r, eta as f64);
            let top = floor_log(r, eta);
            if sched.len() != top as usize + 1 {
                problems.push(format!("R={r} eta={eta}: length {}", sched.len()));
            }
            let want: Vec<f64> = (0..=top).rev().map(|k| (eta as f64).powi(2 * k - top)).collect();
            if sched != want {
                problems.push(format!("R={r} eta={eta}: {sched:?}"));
            }
        }
    }
    let r100 = temperature_schedule(100, 2.0);
    let literal = [64.0, 16.0, 4.0, 1.0, 0.25, 0.0625, 0.015625];
    if r100 != literal {
        problems.push(format!("R=100 eta=2: {r100:?}"));
    }
    outcome(
        "4",
        "temperature schedules have floor(log_eta R)+1 exact powers",
        problems.is_empty(),
        if problems.is_empty() {
            format!("R=100, eta=2 -> {r100:?}")
        } else {
            problems.join("; ")
        },
    )
}

// ------------------------------------------------------ 5. sampling marginals

fn criterion_5() -> Outcome {
    let budget = Budget::new(3, 1).unwrap();
    let universe = ItemUniverse::new(10, 1, &budget).unwrap();
    let phi: [f64; 10] = [0.3, -0.2, 0.1, 0.5, -0.4, 0.0, 0.2, -0.1, 0.4, -0.3];
    let tau: f64 = 0.5;
    let z: f64 = phi.iter().map(|v| (v / tau).exp()).sum();
    let softmax: Vec<f64> = phi.iter().map(|v| (v / tau).exp() / z).collect();
    assert!(
        softmax.iter().all(|w| 3.0 * w < 1.0),
        "fixture must avoid capping"
    );
    let sampler = SubsetSampler::new(&sampling_distribution(&phi, tau), &universe);
    let draws = 100_000;
    let mut counts = [0usize; 10];
    for t in 0..draws {
        for i in sampler.draw(&mut rng::stream(5, &[t])) {
            counts[i] += 1;
        }
    }
    let worst = (0..10)
        .map(|i| (counts[i] as f64 / draws as f64 - 3.0 * softmax[i]).abs())
        .fold(0.0, f64::max);
    outcome(
        "5",
        "draw marginals match renormalized softmax within 1%",
        worst <= 0.01,
        format!("max abs deviation {worst:.4} over {draws} draws"),
    )
}

// ---------------------------------------- 6 and 7. noise isolation, anytime

struct NoiseSeed {
    noise_fraction: f64,
    engine_score: f64,
    random_score: f64,
    monotone: bool,
}

fn noise_seed(seed: u64) -> NoiseSeed {
    let clean = two_gaussians(2000, 10, 1.0, seed).unwrap();
    let train = inject_noise(
        &clean,
        &NoiseSpec {
            kind: NoiseKind::S1Marginal,
            drop_fraction: 0.5,
            seed,
        },
    )
    .unwrap();
    let val = two_gaussians(500, 10, 1.0, seed + 1000).unwrap();
    let test = two_gaussians(1000, 10, 1.0, seed + 2000).unwrap();
    let budget = Budget::new(200, 10).unwrap();
    let knn = KnnSurrogate::new(5, None).unwrap();
    let cfg = EngineConfig {
        rounds: 200,
        batch: 16,
        seed,
        ..EngineConfig::default()
    };
    let out = engine::optimize(&train, &val, &knn, &budget, &cfg).unwrap();
    let rows = out.selection.samples();
    let injected = rows
        .iter()
        .filter(|&&r| train.row_origins()[r] == Origin::Injected)
        .count();
    let pred = knn.score_context(&train, &out.selection, &test).unwrap();
    let engine_score = balanced_accuracy(&pred, test.labels()).unwrap();
    let inputs = Inputs {
        train: &train,
        val: &val,
        test: &test,
        evaluator: &knn,
        budget: &budget,
    };
    let h1 = baselines::run_baseline(
        &BaselineSpec::new(BaselineKind::from_id("h1").unwrap(), seed),
        inputs,
    )
    .unwrap();
    let monotone = out.runs.iter().all(|r| {
        r.trajectory
            .windows(2)
            .all(|w| w[1].best_so_far >= w[0].best_so_far)
    });
    NoiseSeed {
        noise_fraction: injected as f64 / rows.len() as f64,
        engine_score,
        random_score: h1.score,
        monotone,
    }
}

fn criteria_6_7() -> Vec<Outcome> {
    let start = Instant::now();
    let seeds: Vec<NoiseSeed> = (1..=5).map(noise_seed).collect();
    let secs = start.elapsed().as_secs_f64();
    let mean = |f: &dyn Fn(&NoiseSeed) -> f64| seeds.iter().map(f).sum::<f64>() / seeds.len() as f64;
    let frac = mean(&|s| s.noise_fraction);
    let engine_score = mean(&|s| s.engine_score);
    let random_score = mean(&|s| s.random_score);
    let gain = engine_score - random_score;
    let fracs: Vec<String> = seeds.iter().map(|s| format!("{:.3}", s.noise_fraction)).collect();
    vec![
        outcome(
            "6a",
            "noise isolation: injected fraction among selected rows < 0.30",
            frac < 0.30,
            format!("mean {frac:.3} (per seed [{}])", fracs.join(", ")),
        ),
        outcome(
            "6b",
            "noise isolation: test bacc exceeds random-context mean by >= 0.03",
            gain >= 0.03,
            format!(
                "engine {engine_score:.4} vs random {random_score:.4}, gain {gain:+.4}; a perfect score would gain {:+.4}",
                1.0 - random_score
            ),
        ),
        outcome(
            "6c",
            "noise isolation: runtime < 180 s",
            secs < 180.0,
            format!("{secs:.1} s for 5 seeds"),
        ),
        outcome(
            "7",
            "anytime: every best-so-far trajectory is non-decreasing",
            seeds.iter().all(|s| s.monotone),
            format!("{} seeds checked", seeds.len()),
        ),
    ]
}

// -------------------------------------------------------- 8. engine overhead

/// Constant scorer, so nearly all round time is engine time.
struct Flat;

impl Evaluator for Flat {
    fn score_context(&self, _: &Table, _: &ContextSelection, q: &Table) -> Result<Prediction, EvalError> {
        Prediction::from_flat(vec![0.5; q.n_rows() * 2], 2)
    }

    fn score_subset(
        &self,
        _: &Table,
        _: &ContextSelection,
        _: &Table,
        _: Metric,
        s: u64,
    ) -> Result<f64, EvalError> {
        Ok((s % 1000) as f64 / 1000.0)
    }

    fn name(&self) -> String {
        "flat".into()
    }
}

fn criterion_8() -> Outcome {
    let n = 10_000;
    let y: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
    let train = Table::new((0..n).map(|i| i as f64).collect(), 1, y, 2).unwrap();
    let val = Table::new(vec![0.0, 1.0], 1, vec![0, 1], 2).unwrap();
    let budget = Budget::new(1000, 1).unwrap();
    let cfg = EngineConfig {
        rounds: 30,
        batch: 32,
        ..EngineConfig::default()
    };
    let run = run_single(&train, &val, &Flat, &budget, &cfg, 0, 1.0).unwrap();
    let per_round: Vec<f64> = run.trajectory.iter().map(|r| r.engine_seconds()).collect();
    let mean = per_round.iter().sum::<f64>() / per_round.len() as f64;
    let worst = per_round.iter().copied().fold(0.0, f64::max);
    outcome(
        "8",
        "engine cost per round < 50 ms at S=10000, B=32",
        mean < 0.05,
        format!("mean {:.2} ms, worst {:.2} ms", mean * 1e3, worst * 1e3),
    )
}

// ------------------------------------------------------ 9. baseline checks

/// Class-1 probability for query `q` is the mean of the context's first
/// feature, shifted by the query's own value.
struct MeanProbe;

impl Evaluator for MeanProbe {
    fn score_context(
        &self,
        train: &Table,
        ctx: &ContextSelection,
        q: &Table,
    ) -> Result<Prediction, EvalError> {
        let mean = ctx.samples().iter().map(|&i| train.get(i, 0)).sum::<f64>() / ctx.n_samples() as f64;
        let rows = (0..q.n_rows())
            .map(|i| {
                let p = ((mean + q.get(i, 0)) / 2.0).clamp(0.0, 1.0);
                vec![1.0 - p, p]
            })
            .collect();
        Prediction::new(rows, 2)
    }

    fn name(&self) -> String {
        "mean-probe".into()
    }
}

fn same_report(a: &Report, b: &Report) -> bool {
    a.score.to_bits() == b.score.to_bits()
        && a.context_size == b.context_size
        && a.per_run_scores == b.per_run_scores
        && a.details == b.details
}

fn criterion_9() -> Outcome {
    let mut problems = Vec::new();

    // Two-member ensemble against a hand-averaged prediction.
    let train = Table::new(
        (0..8).map(|i| i as f64 / 7.0).collect(),
        1,
        (0..8).map(|i| (i >= 4) as u32).collect(),
        2,
    )
    .unwrap();
    let test = Table::new(vec![0.1, 0.45, 0.55, 0.9, 0.3, 0.7], 1, vec![0, 0, 1, 1, 0, 1], 2).unwrap();
    let budget = Budget::new(3, 1).unwrap();
    let inputs = Inputs {
        train: &train,
        val: &test,
        test: &test,
        evaluator: &MeanProbe,
        budget: &budget,
    };
    let h2 = baselines::ensemble(inputs, 2, 42).unwrap();
    let ctxs = baselines::random_contexts(8, 1, &budget, 2, 42, 0x42);
    let means: Vec<f64> = ctxs
        .iter()
        .map(|c| c.samples().iter().map(|&i| i as f64 / 7.0).sum::<f64>() / 3.0)
        .collect();
    let hand: Vec<Vec<f64>> = (0..test.n_rows())
        .map(|q| {
            let p: f64 = means
                .iter()
                .map(|m| ((m + test.get(q, 0)) / 2.0).clamp(0.0, 1.0))
                .sum::<f64>()
                / 2.0;
            vec![1.0 - p, p]
        })
        .collect();
    let hand_score = balanced_accuracy(&Prediction::new(hand.clone(), 2).unwrap(), test.labels()).unwrap();
    let averaged = Prediction::average(
        &ctxs
            .iter()
            .map(|c| MeanProbe.score_context(&train, c, &test).unwrap())
            .collect::<Vec<_>>(),
    )
    .unwrap();
    let max_gap = hand
        .iter()
        .enumerate()
        .map(|(q, row)| (row[1] - averaged.row(q)[1]).abs())
        .fold(0.0, f64::max);
    if max_gap > 1e-12 || (h2.score - hand_score).abs() > 1e-12 {
        problems.push(format!(
            "ensemble: gap {max_gap:.2e}, score {} vs {hand_score}",
            h2.score
        ));
    }

    // Single-leaf router equals scoring the full context.
    let small = two_gaussians(60, 3, 1.0, 9).unwrap();
    let small_test = two_gaussians(80, 3, 1.0, 10).unwrap();
    let knn = KnnSurrogate::new(5, None).unwrap();
    let roomy = Budget::new(100, 5).unwrap();
    let inputs = Inputs {
        train: &small,
        val: &small_test,
        test: &small_test,
        evaluator: &knn,
        budget: &roomy,
    };
    let o2 = baselines::run_baseline(
        &BaselineSpec::new(BaselineKind::from_id("o2").unwrap(), 42),
        inputs,
    )
    .unwrap();
    let full = knn
        .score_context(&small, &ContextSelection::full(&small), &small_test)
        .unwrap();
    let full_score = balanced_accuracy(&full, small_test.labels()).unwrap();
    if o2.score != full_score
        || o2.context_size
            != (ContextSize {
                samples: 60,
                features: 3,
            })
    {
        problems.push(format!("router: {} vs full {full_score}", o2.score));
    }

    // Backoff sizes against a capped surrogate.
    let big = two_gaussians(1500, 4, 1.0, 11).unwrap();
    let cap = Budget::new(1000, 4).unwrap();
    let capped = KnnSurrogate::new(5, Some(cap)).unwrap();
    let inputs = Inputs {
        train: &big,
        val: &small_test,
        test: &two_gaussians(50, 4, 1.0, 12).unwrap(),
        evaluator: &capped,
        budget: &cap,
    };
    let h3 = xl_context(inputs, 0.9, 42).unwrap();
    let mut want = Vec::new();
    let mut k = 0;
    loop {
        let size = (0.9f64.powi(k) * 1500.0 + 1e-9).floor() as usize;
        want.push(size);
        if size <= 1000 {
            break;
        }
        k += 1;
    }
    let got: Vec<usize> = serde_json::from_value(h3.details["attempts"].clone()).unwrap();
    if got != want || h3.context_size.samples != *want.last().unwrap() {
        problems.push(format!("backoff: {got:?} vs {want:?}"));
    }

    // Determinism of every baseline.
    let train = two_gaussians(400, 12, 0.5, 13).unwrap();
    let val = two_gaussians(100, 12, 0.5, 14).unwrap();
    let test = two_gaussians(100, 12, 0.5, 15).unwrap();
    let budget = Budget::new(60, 5).unwrap();
    let inputs = Inputs {
        train: &train,
        val: &val,
        test: &test,
        evaluator: &knn,
        budget: &budget,
    };
    for id in BaselineKind::IDS {
        let spec = BaselineSpec::new(BaselineKind::from_id(id).unwrap(), 42);
        let a = baselines::run_baseline(&spec, inputs).unwrap();
        let b = baselines::run_baseline(&spec, inputs).unwrap();
        if !same_report(&a, &b) {
            problems.push(format!("{id} differs between identical runs"));
        }
    }

    outcome(
        "9",
        "baselines: ensemble mean, single-leaf router, backoff sizes, determinism",
        problems.is_empty(),
        if problems.is_empty() {
            format!("backoff {want:?}")
        } else {
            problems.join("; ")
        },
    )
}

// ------------------------------------------------------------ 10. statistics

fn criterion_10() -> Outcome {
    let mut problems = Vec::new();
    let t = paired_permutation_test(&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0], 0, 0).unwrap();
    if !t.exact || t.p_value != 0.25 {
        problems.push(format!("permutation p {} (exact {})", t.p_value, t.exact));
    }
    let mut r = rng::stream(10, &[]);
    for k in 2..12 {
        let row: Vec<f64> = (0..k).map(|_| (r.random_range(0..4) as f64) / 4.0).collect();
        let sum: f64 = rank_row(&row).iter().sum();
        if sum != (k * (k + 1)) as f64 / 2.0 {
            problems.push(format!("rank sum {sum} for k={k}"));
        }
    }
    for n in [1usize, 5, 17, 38, 100] {
        let cd = critical_difference(2, n, 0.05).unwrap();
        if (cd - 1.960 / (n as f64).sqrt()).abs() > 1e-9 {
            problems.push(format!("CD(2, {n}) = {cd}"));
        }
    }
    outcome(
        "10",
        "statistics: exact p, rank sums, critical difference",
        problems.is_empty(),
        if problems.is_empty() {
            format!("p = {}", t.p_value)
        } else {
            problems.join("; ")
        },
    )
}

type Check = (&'static str, fn() -> Vec<Outcome>);

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let checks: Vec<Check> = vec![
        ("1", criterion_1),
        ("2", || vec![criterion_2()]),
        ("3", || vec![criterion_3()]),
        ("4", || vec![criterion_4()]),
        ("5", || vec![criterion_5()]),
        ("6", criteria_6_7),
        ("8", || vec![criterion_8()]),
        ("9", || vec![criterion_9()]),
        ("10", || vec![criterion_10()]),
    ];
    let mut failed = 0;
    let mut total = 0;
    for (key, check) in checks {
        if filter.as_ref().is_some_and(|f| f != key) {
            continue;
        }
        for o in check() {
            total += 1;
            if !o.pass {
                failed += 1;
            }
            println!(
                "{} [{}] {} ({})",
                if o.pass { "PASS" } else { "FAIL" },
                o.id,
                o.title,
                o.detail
            );
        }
    }
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
