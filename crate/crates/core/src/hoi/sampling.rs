use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Positive/negative balancing for one image.
///
/// Keeps every positive and samples, without replacement, up to
/// `ratio * #positives` negatives. Images without positives keep
/// `min(#negatives, ratio)` negatives. Returns ascending indices into
/// `labels`; identical for identical seeds.
pub fn balance_sampling(labels: &[bool], ratio: usize, seed: u64) -> Vec<usize> {
    let positives: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let negatives: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let quota = if positives.is_empty() {
        ratio
    } else {
        ratio.saturating_mul(positives.len())
    };
    let take = quota.min(negatives.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = positives;
    out.extend(
        index::sample(&mut rng, negatives.len(), take)
            .into_iter()
            .map(|k| negatives[k]),
    );
    out.sort_unstable();
    out
}
