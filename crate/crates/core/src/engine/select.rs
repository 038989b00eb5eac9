//! Turning a value vector into a context.

use super::universe::ItemUniverse;

/// Indices of `range` ordered by value descending, ties by lower index.
fn ranked(phi: &[f64], range: std::ops::Range<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = range.collect();
    idx.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
    idx
}

fn top_positive(phi: &[f64], range: std::ops::Range<usize>, cap: usize) -> Vec<usize> {
    let order = ranked(phi, range);
    let positive = order.iter().take_while(|&&i| phi[i] > 0.0).count();
    // A kind with no positive value still needs a non-empty context.
    let take = if positive == 0 { cap } else { positive.min(cap) };
    order.into_iter().take(take).collect()
}

/// Per active kind, the items with the largest positive values up to the
/// kind's budget. A kind without any positive value falls back to its top
/// items by raw value. Returns sorted item indices.
pub fn select_items(phi: &[f64], universe: &ItemUniverse) -> Vec<usize> {
    assert_eq!(
        phi.len(),
        universe.len(),
        "value vector does not match the universe"
    );
    let budget = universe.budget();
    let mut items = Vec::new();
    if universe.optimize_samples() {
        items.extend(top_positive(phi, universe.sample_range(), budget.max_samples));
    }
    if universe.optimize_features() {
        items.extend(top_positive(phi, universe.feature_range(), budget.max_features));
    }
    items.sort_unstable();
    items
}

/// Makes every class of `labels` appear among `selected` training rows when
/// the selection size allows it.
///
/// Missing classes are handled in order of their best representative's
/// value. Each one replaces the lowest-valued selected row whose class keeps
/// at least one other row, so no covered class is lost. `row_value` gives the
/// value of a training row. Returns the number of swaps; `selected` stays
/// sorted.
pub fn class_coverage_fixup(
    selected: &mut [usize],
    labels: &[u32],
    class_count: usize,
    row_value: impl Fn(usize) -> f64,
) -> usize {
    let mut chosen = vec![false; labels.len()];
    let mut per_class = vec![0usize; class_count];
    for &r in selected.iter() {
        chosen[r] = true;
        per_class[labels[r] as usize] += 1;
    }
    // Best unselected representative of each missing class.
    let mut best: Vec<Option<usize>> = vec![None; class_count];
    for (r, &y) in labels.iter().enumerate() {
        let c = y as usize;
        if per_class[c] > 0 || chosen[r] {
            continue;
        }
        if best[c].is_none_or(|b| row_value(r) > row_value(b)) {
            best[c] = Some(r);
        }
    }
    let mut missing: Vec<usize> = best.iter().flatten().copied().collect();
    missing.sort_by(|&a, &b| row_value(b).total_cmp(&row_value(a)).then(a.cmp(&b)));

    let mut swaps = 0;
    for rep in missing {
        let victim = selected
            .iter()
            .enumerate()
            .filter(|&(_, &r)| per_class[labels[r] as usize] >= 2)
            .min_by(|&(_, &a), &(_, &b)| row_value(a).total_cmp(&row_value(b)).then(a.cmp(&b)))
            .map(|(pos, _)| pos);
        let Some(pos) = victim else { break };
        per_class[labels[selected[pos]] as usize] -= 1;
        per_class[labels[rep] as usize] += 1;
        selected[pos] = rep;
        swaps += 1;
    }
    selected.sort_unstable();
    swaps
}
