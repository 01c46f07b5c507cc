//! Small helpers on dense coordinate slices.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Deterministic, roughly uniform unit directions in `R^n`.
///
/// Equispaced angles in the plane; elsewhere Halton points of the cube kept
/// when they fall inside the unit ball, then normalized.
pub fn sample_directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    if n == 2 {
        return (0..count)
            .map(|k| {
                let theta = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect();
    }
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let mut out = Vec::with_capacity(count);
    let mut index = 1u64;
    while out.len() < count {
        let v: Vec<f64> = PRIMES[..n].iter().map(|&b| 2.0 * radical_inverse(index, b) - 1.0).collect();
        index += 1;
        let r = norm(&v);
        if r > 0.05 && r <= 1.0 {
            out.push(v.into_iter().map(|c| c / r).collect());
        }
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    acc
}
