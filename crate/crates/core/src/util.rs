use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Ceiling of `ratio * count`, robust to representation error in the ratio
/// (0.3 * 10 must give 3, not 4).
pub(crate) fn ceil_fraction(ratio: f64, count: usize) -> usize {
    let x = ratio * count as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Scale `v` to unit length in place. Returns false for a zero (or non-finite) vector.
pub(crate) fn normalize_in_place(v: &mut [f64]) -> bool {
    let n = norm(v);
    if !(n.is_finite() && n > 0.0) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}
