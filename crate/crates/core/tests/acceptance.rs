//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use krext_core::extension::{extend_by_projection, lip_norm, mcshane_extend, operator_norm};
use krext_core::gen::{self, InstanceRng};
use krext_core::measure::SignedMeasure;
use krext_core::metric::{FiniteMetricSpace, Subspace};
use krext_core::projection::{
    asymptotic_profile, gentle_constant, gentle_to_projection, nearest_point_projection, projection_constant,
    projection_to_gentle, retract_l1_ball, synthesize_min_k, uniform_discrete_projection, weighted_tv_constant,
    RandomProjection, SynthesisMode,
};
use krext_core::transport::{kr_norm, kr_norm_lp, verify_duality};
use krext_core::{PointFunction, Tolerances};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Alternates Euclidean and graph metrics with 2..=10 points.
fn random_space(seed: u64) -> Arc<FiniteMetricSpace> {
    let n = 2 + (seed as usize % 9);
    Arc::new(if seed % 2 == 0 {
        gen::random_euclidean_space(seed, n, 1 + seed as usize % 3)
    } else {
        gen::random_graph_space(seed, n)
    })
}

fn kr_duality() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut certificates_ok = true;
    for seed in 0..200 {
        let s = random_space(seed);
        let mut r = gen::rng(seed);
        let mu = gen::random_signed_measure(&mut r, &s);
        let flow = kr_norm(&mu, &tol()).unwrap();
        let (lp, _) = kr_norm_lp(&mu, &tol()).unwrap();
        let scale = (s.max_distance() * mu.total_variation_all()).max(1.0);
        worst = worst.max((flow.primal_cost() - lp).abs() / scale);
        certificates_ok &= verify_duality(&flow, 1e-9).ok;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && certificates_ok && secs < 10.0,
        format!("200 instances, worst scaled |flow - LP dual| = {worst:.2e}, certificates ok = {certificates_ok}, {secs:.2}s"),
    )
}

fn dirac_isometry() -> Outcome {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for seed in 0..200 {
        let s = random_space(seed);
        for x in 0..s.len() {
            for y in 0..s.len() {
                if x == y {
                    continue;
                }
                let mu = SignedMeasure::dirac(s.clone(), x).sub(&SignedMeasure::dirac(s.clone(), y)).unwrap();
                worst = worst.max((kr_norm(&mu, &tol()).unwrap().value - s.d(x, y)).abs());
                pairs += 1;
            }
        }
    }
    outcome(worst <= 1e-9, format!("{pairs} ordered pairs, worst |kr - d| = {worst:.2e}"))
}

fn mcshane() -> Outcome {
    let mut exact = true;
    let mut worst_lip = 0.0f64;
    let mut worst_competitor = f64::NEG_INFINITY;
    for seed in 0..100 {
        let s = Arc::new(gen::random_euclidean_space(1000 + seed, 3 + seed as usize % 6, 2));
        let mut r = gen::rng(1000 + seed);
        let k = 1 + r.gen_range(0..s.len());
        let m = gen::random_subset(&mut r, &s, k);
        let f = PointFunction::scalar(s.clone(), m.members().iter().map(|&i| (i, r.gen_range(-5.0..5.0)))).unwrap();
        let l = lip_norm(&f);
        let e = mcshane_extend(&f, l, &tol()).unwrap();
        exact &= f.iter().all(|(i, v)| e.value(i) == Some(v));
        worst_lip = worst_lip.max((lip_norm(&e) - l).abs());
        for _ in 0..50 {
            let g = random_extension(&mut r, &s, &f, l);
            for x in 0..s.len() {
                worst_competitor = worst_competitor.max(g[x] - e.value(x).unwrap()[0]);
            }
        }
    }
    outcome(
        exact && worst_lip <= 1e-9 && worst_competitor <= 1e-9,
        format!(
            "100 instances, restriction exact = {exact}, worst |lip change| = {worst_lip:.2e}, \
             largest competitor excess = {worst_competitor:.2e}"
        ),
    )
}

/// An `l`-Lipschitz extension built by fixing exterior points one at a time in random
/// order, each at a random value inside its feasible interval.
fn random_extension(r: &mut InstanceRng, s: &Arc<FiniteMetricSpace>, f: &PointFunction, l: f64) -> Vec<f64> {
    let mut g: Vec<Option<f64>> = (0..s.len()).map(|i| f.value(i).map(|v| v[0])).collect();
    let mut order: Vec<usize> = (0..s.len()).filter(|&i| g[i].is_none()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), r);
    for x in order {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (y, gy) in g.iter().enumerate() {
            if let Some(gy) = gy {
                lo = lo.max(gy - l * s.d(x, y));
                hi = hi.min(gy + l * s.d(x, y));
            }
        }
        // bias toward the ends, where maximality is tight
        g[x] = Some(match r.gen_range(0..3) {
            0 => hi,
            1 => lo,
            _ if hi > lo => r.gen_range(lo..=hi),
            _ => hi,
        });
    }
    g.into_iter().map(Option::unwrap).collect()
}

/// Random space of 2..=8 points with a proper subset (so some point lies outside `M`).
fn proper_instance(seed: u64) -> (Arc<FiniteMetricSpace>, Subspace, InstanceRng) {
    let s = Arc::new(gen::random_euclidean_space(seed, 2 + seed as usize % 7, 2));
    let mut r = gen::rng(seed);
    let k = r.gen_range(1..s.len());
    let m = gen::random_subset(&mut r, &s, k);
    (s, m, r)
}

fn gentle_implies_projection() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..100 {
        let (_, m, mut r) = proper_instance(2000 + seed);
        let omega = r.gen_range(1..=8);
        let g = gen::random_gentle_partition(&mut r, &m, omega);
        let p = gentle_to_projection(&g).unwrap();
        worst = worst.max(projection_constant(&p, &tol()).unwrap() - gentle_constant(&g).value);
    }
    outcome(worst <= 1e-9, format!("100 partitions, max(K_proj - K_gentle) = {worst:.3e}"))
}

fn strong_projection_pool() -> Vec<RandomProjection> {
    let mut pool = Vec::new();
    for seed in 0..100 {
        let (s, m, mut r) = proper_instance(3000 + seed);
        pool.push(gen::random_strong_projection(&mut r, &m));
        let omega = r.gen_range(1..=8);
        let g = gen::random_gentle_partition(&mut r, &m, omega);
        pool.push(gentle_to_projection(&g).unwrap());
        pool.push(nearest_point_projection(&m).unwrap());
        if let Some(eps) = s.separation_of(m.members()) {
            pool.push(uniform_discrete_projection(&m, eps, s.basepoint()).unwrap());
        }
    }
    pool
}

fn tv_dominance_and_equivalence() -> Outcome {
    let pool = strong_projection_pool();
    let mut worst_dominance = f64::NEG_INFINITY;
    let mut worst_equiv = 0.0f64;
    let mut mismatches = 0;
    let mut example = String::new();
    let mut round_trip = true;
    for p in &pool {
        let tv = weighted_tv_constant(p).value;
        let k = projection_constant(p, &tol()).unwrap();
        worst_dominance = worst_dominance.max(k - tv);
        let g = projection_to_gentle(p).unwrap();
        let gc = gentle_constant(&g).value;
        let diff = (gc - tv).abs();
        if diff > 1e-9 {
            mismatches += 1;
            if diff > worst_equiv {
                example = format!(" (e.g. gentle {gc:.6} vs weighted TV {tv:.6} on {} points)", p.space().len());
            }
        }
        worst_equiv = worst_equiv.max(diff);
        round_trip &= gentle_to_projection(&g).unwrap() == *p;
    }
    let parts = [
        (worst_dominance <= 1e-9, format!("dominance: max(K - TV) = {worst_dominance:.2e}")),
        (mismatches == 0, format!("equivalence: {mismatches}/{} differ by > 1e-9, worst {worst_equiv:.3}{example}", pool.len())),
        (round_trip, format!("round trip exact = {round_trip}")),
    ];
    outcome(
        parts.iter().all(|p| p.0),
        parts.iter().map(|p| format!("{} [{}]", p.1, if p.0 { "ok" } else { "fails" })).collect::<Vec<_>>().join("; "),
    )
}

/// Greedy `eps`-separated subset containing the basepoint, scanning points in a random order.
fn separated_subset(r: &mut InstanceRng, s: &Arc<FiniteMetricSpace>, eps: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).filter(|&i| i != s.basepoint()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), r);
    let mut m = vec![s.basepoint()];
    for x in order {
        if m.iter().all(|&t| s.d(x, t) >= eps) {
            m.push(x);
        }
    }
    m
}

fn uniform_discrete_bound() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    let mut seed = 4000u64;
    while count < 50 {
        seed += 1;
        let mut r = gen::rng(seed);
        let s = Arc::new(if seed % 2 == 0 {
            let mut coords: Vec<f64> = (0..r.gen_range(4..12)).map(|_| r.gen_range(0.0..20.0)).collect();
            coords[0] = 0.0;
            gen::line_space(&coords)
        } else {
            gen::grid_space(r.gen_range(2..4), r.gen_range(2..5), r.gen_range(0.5..2.0))
        });
        let eps = r.gen_range(0.2..0.6) * s.max_distance();
        let members = separated_subset(&mut r, &s, eps);
        if members.len() < 2 {
            continue;
        }
        let m = Subspace::new(s.clone(), &members).unwrap();
        let d = s.diameter_of(&members);
        if d < eps {
            continue;
        }
        let t0 = members[r.gen_range(0..members.len())];
        let p = uniform_discrete_projection(&m, eps, t0).unwrap();
        worst = worst.max(projection_constant(&p, &tol()).unwrap() - 2.0 * d / eps);
        count += 1;
    }
    outcome(worst <= 1e-9, format!("50 instances, max(K - 2D/eps) = {worst:.3}"))
}

/// Minimal `K` over strong projections onto `M = {a, b}`.
///
/// Exterior rows are `(1 − s_x) δ_a + s_x δ_b`; every constraint of the
/// definition becomes a bound on `s_x` or on `s_x − s_y`, and such a system is
/// feasible iff `lo_x ≤ hi_y + K d(x, y)/D` for all `x, y` (the offsets obey the
/// triangle inequality, so no longer cycles matter). Bisection on `K ≥ 1`.
fn two_point_oracle(s: &FiniteMetricSpace, a: usize, b: usize) -> f64 {
    let dab = s.d(a, b);
    let ext: Vec<usize> = (0..s.len()).filter(|&x| x != a && x != b).collect();
    let feasible = |k: f64| {
        let lo: Vec<f64> = ext.iter().map(|&x| (1.0 - k * s.d(x, b) / dab).max(0.0)).collect();
        let hi: Vec<f64> = ext.iter().map(|&x| (k * s.d(x, a) / dab).min(1.0)).collect();
        (0..ext.len()).all(|i| {
            (0..ext.len()).all(|j| lo[i] <= hi[j] + if i == j { 0.0 } else { k * s.d(ext[i], ext[j]) / dab })
        })
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    while !feasible(hi) {
        hi *= 2.0;
    }
    if hi == 1.0 {
        return 1.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn synthesis_optimality() -> Outcome {
    let mut worst_oracle = 0.0f64;
    let mut worst_signed = f64::NEG_INFINITY;

    // canonical instance: grid search over s for the exterior point c, together with the pair (a, b)
    let three = Arc::new(gen::three_point_space());
    let m = Subspace::new(three.clone(), &[0, 1]).unwrap();
    let grid = (0..=1_000_000)
        .map(|i| {
            let t = i as f64 / 1e6;
            (t / 2.0).max((1.0 - t) / 1.5)
        })
        .fold(f64::INFINITY, f64::min);
    let canonical_oracle = grid.max(1.0);
    let strong = synthesize_min_k(&m, SynthesisMode::Strong, &tol()).unwrap();
    let signed = synthesize_min_k(&m, SynthesisMode::Signed, &tol()).unwrap();
    worst_oracle = worst_oracle.max((strong.k_star - canonical_oracle).abs());
    worst_signed = worst_signed.max(signed.k_star - strong.k_star);

    for seed in 0..20 {
        let s = Arc::new(if seed % 2 == 0 {
            gen::random_euclidean_space(5000 + seed, 4 + seed as usize % 3, 2)
        } else {
            gen::random_graph_space(5000 + seed, 4 + seed as usize % 3)
        });
        let mut r = gen::rng(5000 + seed);
        let m = gen::random_subset(&mut r, &s, 2);
        let (a, b) = (m.members()[0], m.members()[1]);
        let strong = synthesize_min_k(&m, SynthesisMode::Strong, &tol()).unwrap();
        let signed = synthesize_min_k(&m, SynthesisMode::Signed, &tol()).unwrap();
        worst_oracle = worst_oracle.max((strong.k_star - two_point_oracle(&s, a, b)).abs());
        worst_signed = worst_signed.max(signed.k_star - strong.k_star);
    }

    let mut full_exact = true;
    for seed in 0..10 {
        let s = random_space(5100 + seed);
        for mode in [SynthesisMode::Strong, SynthesisMode::Signed] {
            full_exact &= synthesize_min_k(&Subspace::full(s.clone()), mode, &tol()).unwrap().k_star == 1.0;
        }
    }
    outcome(
        worst_oracle <= 1e-6 && worst_signed <= 1e-9 && full_exact,
        format!(
            "canonical K* = {:.9} (oracle {canonical_oracle}), worst |K* - oracle| = {worst_oracle:.2e}, \
             max(K_signed - K_strong) = {worst_signed:.2e}, K* = 1 when M = X: {full_exact}",
            strong.k_star
        ),
    )
}

fn extension_bound() -> Outcome {
    let mut worst_bound = f64::NEG_INFINITY;
    let mut worst_norm = 0.0f64;
    for seed in 0..100 {
        let (s, m, mut r) = proper_instance(6000 + seed);
        let base = s.basepoint();
        let p = if seed % 2 == 0 {
            gen::random_strong_projection(&mut r, &m)
        } else {
            random_signed_projection(&mut r, &m)
        };
        let f = PointFunction::scalar(
            s.clone(),
            m.members().iter().map(|&i| (i, if i == base { 0.0 } else { r.gen_range(-3.0..3.0) })),
        )
        .unwrap();
        let k = projection_constant(&p, &tol()).unwrap();
        let e = extend_by_projection(&p, &f).unwrap();
        worst_bound = worst_bound.max(lip_norm(&e) - k * lip_norm(&f));
        worst_norm = worst_norm.max((operator_norm(&p, &tol()).unwrap() - k).abs());
    }
    outcome(
        worst_bound <= 1e-9 && worst_norm <= 1e-9,
        format!("100 pairs, max(lip(Ef) - K lip(f)) = {worst_bound:.3e}, worst |operator norm - K| = {worst_norm:.2e}"),
    )
}

fn random_signed_projection(r: &mut InstanceRng, m: &Subspace) -> RandomProjection {
    let s = m.parent().clone();
    let rows = (0..s.len())
        .map(|x| {
            if m.contains(x) {
                SignedMeasure::dirac(s.clone(), x)
            } else {
                SignedMeasure::new(s.clone(), m.members().iter().map(|&t| (t, r.gen_range(-1.0..1.5)))).unwrap()
            }
        })
        .collect();
    RandomProjection::new(m.clone(), rows, false).unwrap()
}

fn retraction() -> Outcome {
    let mut r = gen::rng(7000);
    let sup = |y: &[f64], z: &[f64]| y.iter().zip(z).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut contraction = true;
    let mut ball = true;
    let mut lipschitz = 0.0f64;
    for i in 0..10_000 {
        let n = r.gen_range(1..=10);
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..2.0)).collect();
        // every other pair is a small perturbation, where local stretching shows up
        let z: Vec<f64> = if i % 2 == 0 {
            (0..n).map(|_| r.gen_range(0.0..2.0)).collect()
        } else {
            y.iter().map(|v| (v + r.gen_range(-1e-3..1e-3)).max(0.0)).collect()
        };
        let (gy, ry) = retract_l1_ball(&y).unwrap();
        let (gz, rz) = retract_l1_ball(&z).unwrap();
        let dyz = sup(&y, &z);
        contraction &= (gy - gz).abs() <= dyz + 1e-12;
        ball &= ry.iter().sum::<f64>() <= 1.0 + 1e-12 && rz.iter().sum::<f64>() <= 1.0 + 1e-12;
        if dyz > 0.0 {
            lipschitz = lipschitz.max(sup(&ry, &rz) / dyz);
        }
    }
    let mut fixed = true;
    for _ in 0..1000 {
        let n = r.gen_range(1..=10);
        let w = gen::random_simplex_weights(&mut r, n);
        let scale = r.gen_range(0.0..1.0);
        let y: Vec<f64> = w.iter().map(|v| v * scale).collect();
        fixed &= retract_l1_ball(&y).unwrap() == (0.0, y.clone());
    }
    let claim = if lipschitz <= 1.0 + 1e-9 {
        "sup-norm 1-Lipschitz claim confirmed".to_string()
    } else {
        format!("FLAGGED: retraction is not 1-Lipschitz in the sup norm on this sample (measured {lipschitz:.4})")
    };
    outcome(
        contraction && ball && fixed,
        format!("10^4 pairs, g-contraction = {contraction}, |r|_1 <= 1 = {ball}, fixed points kept = {fixed}; {claim}"),
    )
}

fn asymptotic() -> Outcome {
    let start = Instant::now();
    let s = Arc::new(gen::random_euclidean_space(8000, 8, 2));
    let mut r = gen::rng(8000);
    let mut rest: Vec<usize> = (1..8).collect();
    rand::seq::SliceRandom::shuffle(rest.as_mut_slice(), &mut r);
    let order: Vec<usize> = std::iter::once(0).chain(rest).collect();
    let prof = asymptotic_profile(&s, &order, &tol()).unwrap();
    let last = prof.last().unwrap();
    let terminal = last.k_star == 1.0 && last.deviations.iter().all(|&d| d == 0.0);
    let inside = prof
        .iter()
        .all(|e| e.subset.iter().all(|&x| e.deviations[x] == 0.0) && e.inside_deviation == 0.0);
    let mut worst = 0.0f64;
    for e in &prof {
        let m = Subspace::new(s.clone(), &e.subset).unwrap();
        let again = synthesize_min_k(&m, SynthesisMode::Strong, &tol()).unwrap();
        worst = worst.max((again.k_star - e.k_star).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let ks: Vec<String> = prof.iter().map(|e| format!("{:.4}", e.k_star)).collect();
    outcome(
        terminal && inside && worst <= 1e-9 && secs < 60.0,
        format!(
            "K sequence [{}], terminal ok = {terminal}, inside deviations zero = {inside}, \
             worst re-synthesis diff = {worst:.2e}, {secs:.2}s",
            ks.join(", ")
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("KR duality exactness", kr_duality),
        ("Dirac isometry", dirac_isometry),
        ("McShane extension", mcshane),
        ("gentle partition induces projection", gentle_implies_projection),
        ("weighted TV dominance and equivalence", tv_dominance_and_equivalence),
        ("uniformly discrete bound", uniform_discrete_bound),
        ("synthesis optimality", synthesis_optimality),
        ("extension operator bound", extension_bound),
        ("retraction", retraction),
        ("asymptotic profile", asymptotic),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, name, o.detail);
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
