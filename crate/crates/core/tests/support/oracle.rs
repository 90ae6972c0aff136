//! Exhaustive 1-bit quantization oracle.

#![allow(dead_code)]

fn sse(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum()
}

/// Smallest squared error of any two-level representation: the best split
/// of the sorted data into a lower and upper run, each represented by its mean.
pub fn one_bit_optimum(data: &[f64]) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    (0..=sorted.len())
        .map(|i| sse(&sorted[..i]) + sse(&sorted[i..]))
        .fold(f64::INFINITY, f64::min)
}

/// Squared error of the cluster-mean representation induced by `codes`.
pub fn one_bit_split_cost(data: &[f64], codes: &[u32]) -> f64 {
    let pick = |c| data.iter().zip(codes).filter(|(_, &z)| z == c).map(|(&v, _)| v).collect::<Vec<_>>();
    sse(&pick(0)) + sse(&pick(1))
}
