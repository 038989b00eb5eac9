//! Ranks, critical difference and paired permutation tests over a score table.

use vipcop::stats::{average_ranks, critical_difference, paired_permutation_test, summarize, ScoreMatrix};

fn main() -> vipcop::Result<()> {
    let datasets: Vec<String> = ["adult", "bank", "credit", "diabetes", "heart", "spam"]
        .map(String::from)
        .to_vec();
    let methods: Vec<String> = ["vipcop", "h1", "o1"].map(String::from).to_vec();
    let scores = vec![
        vec![0.81, 0.78, 0.79],
        vec![0.74, 0.73, 0.70],
        vec![0.69, 0.69, 0.66],
        vec![0.77, 0.72, 0.75],
        vec![0.84, 0.80, 0.82],
        vec![0.92, 0.91, 0.90],
    ];
    let matrix = ScoreMatrix::new(datasets, methods.clone(), scores)?;

    for (m, r) in methods.iter().zip(average_ranks(&matrix)) {
        println!("{m:>7}: mean rank {r:.2}");
    }
    println!(
        "critical difference at 0.05: {:.3}",
        critical_difference(3, 6, 0.05)?
    );

    let t = paired_permutation_test(&matrix.column(0), &matrix.column(1), 0, 1)?;
    println!("vipcop vs h1: p = {:.4} (exact: {})", t.p_value, t.exact);

    let summary = summarize(&matrix, Some("vipcop"), 10_000, 1, Vec::new())?;
    println!("\n{}", summary.to_markdown(&matrix));
    Ok(())
}
