//! The CLI pipeline from library code: CSV plus TOML config in, result
//! files out.

use std::fmt::Write as _;

use vipcop::data::two_gaussians;
use vipcop::experiment::{self, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("vipcop-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let t = two_gaussians(400, 3, 0.7, 9)?;
    let mut csv = String::from("x1,x2,x3,class\n");
    for i in 0..t.n_rows() {
        let r = t.row(i);
        writeln!(
            csv,
            "{:.4},{:.4},{:.4},{}",
            r[0],
            r[1],
            r[2],
            ["neg", "pos"][t.label(i) as usize]
        )
        .unwrap();
    }
    let csv_path = dir.join("blobs.csv");
    std::fs::write(&csv_path, csv)?;

    let toml = format!(
        r#"
seed = 5
out = "{out}"
baselines = ["h1", "o1"]

[dataset]
path = "{csv}"
label = "class"

[budget]
max_samples = 40
max_features = 3

[engine]
rounds = 30
batch = 8
"#,
        out = dir.join("results").display(),
        csv = csv_path.display()
    );
    let cfg = ExperimentConfig::from_toml(&toml)?;
    let prepared = experiment::prepare(&cfg)?;
    println!(
        "train {} / val {} / test {} rows",
        prepared.train.n_rows(),
        prepared.val.n_rows(),
        prepared.test.n_rows()
    );

    let mut reports = vec![experiment::optimize_prepared(&cfg, &prepared)?];
    for m in &cfg.baselines {
        reports.push(experiment::baseline_prepared(&cfg, &prepared, m)?);
    }
    for r in &reports {
        println!("{:>6}: {:.4}", r.method, r.score);
    }
    println!("results written under {}", cfg.out.display());
    Ok(())
}
