use rand::seq::index;

use crate::data::LabeledExample;
use crate::seeding::{rng_for, stream};

/// k-nearest-neighbour vote under squared Euclidean distance. Distance ties
/// go to the lower training index and vote ties to the lower class. With
/// `bag_fraction < 1` the neighbours come from a seeded subsample of
/// `ceil(bag_fraction · N)` training points.
pub(super) fn predict(
    train: &[&LabeledExample],
    queries: &[&[f64]],
    num_classes: usize,
    k: usize,
    bag_fraction: f64,
    seed: u64,
) -> Vec<usize> {
    let bag: Vec<&LabeledExample> = if bag_fraction >= 1.0 {
        train.to_vec()
    } else {
        let size = ((bag_fraction * train.len() as f64).ceil() as usize).clamp(1, train.len());
        let mut rng = rng_for(&[seed, stream::LEARNER]);
        let mut picked = index::sample(&mut rng, train.len(), size).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| train[i]).collect()
    };
    let k = k.min(bag.len());
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(bag.len());
    queries
        .iter()
        .map(|q| {
            order.clear();
            order.extend(bag.iter().enumerate().map(|(i, e)| {
                let d: f64 = e.x.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, i)
            }));
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < order.len() {
                order.select_nth_unstable_by(k - 1, cmp);
            }
            let mut votes = vec![0usize; num_classes];
            for &(_, i) in &order[..k] {
                votes[bag[i].y] += 1;
            }
            let mut best = 0;
            for c in 1..num_classes {
                if votes[c] > votes[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}
