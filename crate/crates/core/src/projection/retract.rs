use crate::error::{contract, Result};

/// Retraction of the positive cone of `ℓ∞` onto the positive part of the `ℓ₁` unit ball.
///
/// `g` is the least `t ≥ 0` with `Σ (yᵢ − t)⁺ ≤ 1`, found by scanning the
/// breakpoints of that piecewise-linear function in descending order; the
/// image is `r = (y − g)⁺`.
pub fn retract_l1_ball(y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return contract(format!("entry {i} is {v}; the retraction needs finite nonnegative entries"));
    }
    if y.iter().sum::<f64>() <= 1.0 {
        return Ok((0.0, y.to_vec()));
    }
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // On the segment where exactly the k largest entries exceed t, the mass is
    // prefix_k − k t, which equals 1 at t = (prefix_k − 1) / k.
    let mut prefix = 0.0;
    let mut g = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        prefix += v;
        let t = (prefix - 1.0) / (k + 1) as f64;
        let next = sorted.get(k + 1).copied().unwrap_or(0.0);
        if t >= next {
            g = t.max(0.0);
            break;
        }
    }
    let r = y.iter().map(|&v| (v - g).max(0.0)).collect();
    Ok((g, r))
}
