//! The data transforms behind the augmented and noised settings.

use vipcop::data::{augment, inject_noise, two_gaussians, AugmentSpec, NoiseKind, NoiseSpec, Origin};

fn origins(o: &[Origin]) -> String {
    let synthetic = o.iter().filter(|x| x.is_synthetic()).count();
    format!("{} original, {synthetic} synthetic", o.len() - synthetic)
}

fn main() -> vipcop::Result<()> {
    let base = two_gaussians(100, 4, 1.0, 1)?;
    println!("base: {}x{}", base.n_rows(), base.n_cols());

    let more_rows = augment(&base, &AugmentSpec::samples(250, 1))?;
    println!("mixup to 250 rows: rows {}", origins(more_rows.row_origins()));

    let more_cols = augment(&base, &AugmentSpec::features(10, 1))?;
    println!(
        "random projections to 10 columns: columns {}",
        origins(more_cols.col_origins())
    );

    for kind in [NoiseKind::S1Marginal, NoiseKind::S2Gaussian] {
        let t = inject_noise(
            &base,
            &NoiseSpec {
                kind,
                drop_fraction: 0.3,
                seed: 1,
            },
        )?;
        println!(
            "{kind:?}: {}x{}, rows {}",
            t.n_rows(),
            t.n_cols(),
            origins(t.row_origins())
        );
    }
    for kind in [NoiseKind::F1Jitter, NoiseKind::F2Permute, NoiseKind::FMixed] {
        let t = inject_noise(
            &base,
            &NoiseSpec {
                kind,
                drop_fraction: 0.5,
                seed: 1,
            },
        )?;
        println!(
            "{kind:?}: {}x{}, columns {}",
            t.n_rows(),
            t.n_cols(),
            origins(t.col_origins())
        );
    }
    Ok(())
}
