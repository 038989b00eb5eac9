use rand::Rng;
use rand_distr::StandardNormal;

use super::Table;
use crate::error::Result;
use crate::rng;

/// Two classes with unit-covariance Gaussian features centred at
/// `-separation` and `+separation` on every coordinate. Labels are balanced
/// coin flips.
pub fn two_gaussians(n: usize, d: usize, separation: f64, seed: u64) -> Result<Table> {
    let mut r = rng::stream(seed, &[0x6A55]);
    let mut x = Vec::with_capacity(n * d);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let label = r.random_bool(0.5) as u32;
        let centre = if label == 1 { separation } else { -separation };
        y.push(label);
        x.extend((0..d).map(|_| centre + r.sample::<f64, _>(StandardNormal)));
    }
    Table::new(x, d, y, 2)
}
