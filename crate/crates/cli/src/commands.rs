use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use krext_core::extension::{extend_by_projection, lip_norm, mcshane_extend, PointFunction};
use krext_core::formats::{
    parse, FunctionFile, GentleFile, MeasureFile, ProjectionFile, SpaceFile, VectorFile,
};
use krext_core::metric::{doubling_estimate, validate_metric, FiniteMetricSpace, Subspace, Violation};
use krext_core::projection::{
    asymptotic_profile, gentle_constant, gentle_to_projection, projection_constant, projection_constant_by,
    projection_to_gentle, retract_l1_ball, synthesize_min_k, uniform_discrete_projection, weighted_tv_constant,
    RandomProjection, SynthesisMode,
};
use krext_core::registry::{kr_evaluators, projection_strategies, BuildParams};
use krext_core::transport::{kr_norm, w1, TransportResult};
use krext_core::{gen, Error};

use crate::args::Command;
use crate::{Failure, Output, RunConfig};

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|source| Failure::Read { path: path.to_path_buf(), source })
}

/// Malformed-input errors are tagged with the file they came from.
fn at(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| match e {
        Error::Malformed(message) => Failure::Data { path: path.to_path_buf(), message },
        other => Failure::Core(other),
    }
}

fn load<T: DeserializeOwned>(path: &Path) -> Res<T> {
    parse(&read(path)?).map_err(at(path))
}

fn load_unchecked_space(path: &Path) -> Res<FiniteMetricSpace> {
    load::<SpaceFile>(path)?.to_space().map_err(at(path))
}

/// Loads a space and rejects it unless it satisfies the metric axioms.
pub fn load_space(path: &Path, cfg: &RunConfig) -> Res<Arc<FiniteMetricSpace>> {
    let space = load_unchecked_space(path)?;
    let report = validate_metric(&space, cfg.tol.metric);
    if !report.is_valid() {
        return Err(Error::Contract(format!("{} is not a metric: {report}", path.display())).into());
    }
    Ok(Arc::new(space))
}

fn split_labels(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).filter(|l| !l.is_empty()).collect()
}

fn subset(space: &Arc<FiniteMetricSpace>, labels: &str) -> Res<Subspace> {
    Ok(Subspace::from_labels(space.clone(), &split_labels(labels))?)
}

fn label_index(space: &FiniteMetricSpace, label: &str) -> Res<usize> {
    space
        .index_of(label)
        .ok_or_else(|| Failure::Core(Error::Contract(format!("unknown label {label:?}"))))
}

fn labels_of(space: &FiniteMetricSpace, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| space.label(i).to_string()).collect()
}

fn by_label(space: &FiniteMetricSpace, values: &[f64]) -> Value {
    Value::Object(
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| (space.label(i).to_string(), json!(v)))
            .collect::<Map<_, _>>(),
    )
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("file types serialize")
}

fn pair_labels(space: &FiniteMetricSpace, pair: Option<(usize, usize)>) -> Value {
    pair.map_or(Value::Null, |(x, y)| json!([space.label(x), space.label(y)]))
}

pub fn transport_json(r: &TransportResult) -> Value {
    let s = r.space();
    let plan: Vec<Value> = r
        .plan
        .iter()
        .map(|e| json!({"from": s.label(e.from), "to": s.label(e.to), "mass": e.mass}))
        .collect();
    json!({"value": r.value, "plan": plan, "potentials": by_label(s, &r.potentials), "gap": r.gap})
}

pub fn projection_json(p: &RandomProjection) -> Value {
    to_value(&ProjectionFile::from_projection(p))
}

fn violation_json(space: &FiniteMetricSpace, v: &Violation) -> Value {
    let l = |i: usize| space.label(i).to_string();
    match *v {
        Violation::Diagonal { i, value } => json!({"kind": "diagonal", "points": [l(i)], "magnitude": value}),
        Violation::Asymmetric { i, j, excess } => {
            json!({"kind": "asymmetric", "points": [l(i), l(j)], "magnitude": excess})
        }
        Violation::NonPositive { i, j, value } => {
            json!({"kind": "nonpositive", "points": [l(i), l(j)], "magnitude": value})
        }
        Violation::Triangle { i, j, k, excess } => {
            json!({"kind": "triangle", "points": [l(i), l(j), l(k)], "magnitude": excess})
        }
    }
}

/// Runs a command. The second value is a failure to report after the output has been written.
pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Res<(Output, Option<Failure>)> {
    let tol = &cfg.tol;
    let out = match cmd {
        Command::Validate { space } => {
            let s = load_unchecked_space(space)?;
            let report = validate_metric(&s, tol.metric);
            let violations: Vec<Value> = report.violations.iter().map(|v| violation_json(&s, v)).collect();
            let status = (!report.is_valid())
                .then(|| Failure::Core(Error::Contract(format!("{} is not a metric", space.display()))));
            return Ok((Output::json(json!({"valid": report.is_valid(), "violations": violations})), status));
        }
        Command::Doubling { space } => {
            let s = load_space(space, cfg)?;
            Output::json(json!({"doubling_estimate": doubling_estimate(&s)}))
        }
        Command::W1 { space, mu, eta } => {
            let s = load_space(space, cfg)?;
            let mu = load::<MeasureFile>(mu)?.to_measure(&s).map_err(at(mu))?;
            let eta = load::<MeasureFile>(eta)?.to_measure(&s).map_err(at(eta))?;
            Output::json(transport_json(&w1(&mu, &eta, tol)?))
        }
        Command::Krnorm { space, mu, solver } => {
            let s = load_space(space, cfg)?;
            let mu = load::<MeasureFile>(mu)?.to_measure(&s).map_err(at(mu))?;
            let eval = kr_evaluators().get(solver)?;
            if eval.name() == "flow" {
                Output::json(transport_json(&kr_norm(&mu, tol)?))
            } else {
                Output::json(json!({"value": eval.evaluate(&mu, tol)?, "solver": eval.name()}))
            }
        }
        Command::Mcshane { space, f, subset: sub, l } => {
            let s = load_space(space, cfg)?;
            let fun = load::<FunctionFile>(f)?.to_function(&s).map_err(at(f))?;
            if let Some(sub) = sub {
                let m = subset(&s, sub)?;
                if m.members() != fun.domain() {
                    return Err(Error::Contract("--subset differs from the function's domain".into()).into());
                }
            }
            let l = l.unwrap_or_else(|| lip_norm(&fun));
            let e = mcshane_extend(&fun, l, tol)?;
            Output::json(json!({"L": l, "lip": lip_norm(&e), "function": to_value(&FunctionFile::from_function(&e))}))
        }
        Command::Extend { space, proj, f, shift } => {
            let s = load_space(space, cfg)?;
            let p = load::<ProjectionFile>(proj)?.to_projection(&s).map_err(at(proj))?;
            let fun = load::<FunctionFile>(f)?.to_function(&s).map_err(at(f))?;
            let e = if *shift { extend_shifted(&p, &fun)? } else { extend_by_projection(&p, &fun)? };
            let k = projection_constant(&p, tol)?;
            Output::json(json!({
                "function": to_value(&FunctionFile::from_function(&e)),
                "lip": lip_norm(&e),
                "lip_input": lip_norm(&fun),
                "projection_constant": k,
            }))
        }
        Command::Gentle2Proj { space, gentle } => {
            let s = load_space(space, cfg)?;
            let g = load::<GentleFile>(gentle)?.to_partition(&s).map_err(at(gentle))?;
            let p = gentle_to_projection(&g)?;
            Output::json(json!({
                "projection": projection_json(&p),
                "gentle_constant": gentle_constant(&g).value,
                "projection_constant": projection_constant(&p, tol)?,
            }))
        }
        Command::Proj2Gentle { space, proj } => {
            let s = load_space(space, cfg)?;
            let p = load::<ProjectionFile>(proj)?.to_projection(&s).map_err(at(proj))?;
            let g = projection_to_gentle(&p)?;
            Output::json(json!({
                "partition": to_value(&GentleFile::from_partition(&g)),
                "gentle_constant": gentle_constant(&g).value,
                "weighted_tv_constant": weighted_tv_constant(&p).value,
            }))
        }
        Command::Tvconst { space, proj } => {
            let s = load_space(space, cfg)?;
            let p = load::<ProjectionFile>(proj)?.to_projection(&s).map_err(at(proj))?;
            let tv = weighted_tv_constant(&p);
            let k = projection_constant_by(&p, &krext_core::registry::FlowEvaluator, tol)?;
            Output::json(json!({
                "weighted_tv_constant": tv.value,
                "weighted_tv_pair": pair_labels(&s, tv.pair),
                "projection_constant": k.value,
                "projection_pair": pair_labels(&s, k.pair),
            }))
        }
        Command::Udp { space, subset: sub, eps, t0 } => {
            let s = load_space(space, cfg)?;
            let m = subset(&s, sub)?;
            let t0 = match t0 {
                Some(l) => label_index(&s, l)?,
                None => s.basepoint(),
            };
            let p = uniform_discrete_projection(&m, *eps, t0)?;
            let d = s.diameter_of(m.members());
            Output::json(json!({
                "projection": projection_json(&p),
                "projection_constant": projection_constant(&p, tol)?,
                "diameter": d,
                "bound": 2.0 * d.max(*eps) / eps,
            }))
        }
        Command::Synthesize { space, subset: sub, mode } => {
            let s = load_space(space, cfg)?;
            let m = subset(&s, sub)?;
            let mode: SynthesisMode = mode.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let r = synthesize_min_k(&m, mode, tol)?;
            Output::json(json!({
                "K_star": r.k_star,
                "achieved": r.achieved,
                "projection": projection_json(&r.projection),
            }))
        }
        Command::Asymptotic { space, order } => {
            let s = load_space(space, cfg)?;
            let order = match order {
                Some(o) => split_labels(o).into_iter().map(|l| label_index(&s, l)).collect::<Res<Vec<_>>>()?,
                None => default_order(&s),
            };
            let prof = asymptotic_profile(&s, &order, tol)?;
            let header = vec!["n", "subset_size", "K_star", "inside_deviation", "outside_deviation"];
            let rows = prof
                .iter()
                .map(|e| {
                    vec![
                        json!(e.n),
                        json!(e.subset.len()),
                        json!(e.k_star),
                        json!(e.inside_deviation),
                        json!(e.outside_deviation),
                    ]
                })
                .collect();
            let entries: Vec<Value> = prof
                .iter()
                .map(|e| {
                    json!({
                        "n": e.n,
                        "subset": labels_of(&s, &e.subset),
                        "K_star": e.k_star,
                        "inside_deviation": e.inside_deviation,
                        "outside_deviation": e.outside_deviation,
                        "deviations": by_label(&s, &e.deviations),
                    })
                })
                .collect();
            Output { json: json!({"profile": entries}), table: Some((header, rows)) }
        }
        Command::Retract { vector } => {
            let y = load::<VectorFile>(vector)?.into_vec();
            let (g, r) = retract_l1_ball(&y)?;
            Output::json(json!({"g": g, "r": r}))
        }
        Command::Build { space, method, subset: sub, eps, t0 } => {
            let s = load_space(space, cfg)?;
            let m = subset(&s, sub)?;
            let params = BuildParams {
                eps: *eps,
                t0: t0.as_deref().map(|l| label_index(&s, l)).transpose()?,
            };
            let builder = projection_strategies().get(method)?;
            let p = builder.build(&m, &params, tol)?;
            Output::json(json!({
                "method": builder.name(),
                "projection": projection_json(&p),
                "projection_constant": projection_constant(&p, tol)?,
                "weighted_tv_constant": weighted_tv_constant(&p).value,
            }))
        }
        Command::Methods => {
            let list = |items: Vec<(&str, &str)>| -> Vec<Value> {
                items.into_iter().map(|(n, d)| json!({"name": n, "description": d})).collect()
            };
            let builders = projection_strategies().iter().map(|b| (b.name(), b.description())).collect();
            let evals = kr_evaluators().iter().map(|e| (e.name(), e.description())).collect();
            Output::json(json!({"projection_builders": list(builders), "kr_evaluators": list(evals)}))
        }
        Command::Report { space, subset: sub, samples } => report(&load_space(space, cfg)?, sub.as_deref(), *samples, cfg)?,
    };
    Ok((out, None))
}

/// `E(f − f(x̄)) + f(x̄)`.
fn extend_shifted(p: &RandomProjection, f: &PointFunction) -> Res<PointFunction> {
    let base = f.space().basepoint();
    let b = f
        .value(base)
        .ok_or_else(|| Failure::Core(Error::Contract("the basepoint is not in the function's domain".into())))?
        .to_vec();
    let e = extend_by_projection(p, &f.shift_to_basepoint()?)?;
    let entries = e
        .iter()
        .map(|(i, v)| (i, v.iter().zip(&b).map(|(x, y)| x + y).collect()))
        .collect();
    Ok(PointFunction::new(f.space().clone(), entries, f.norm())?)
}

fn default_order(s: &FiniteMetricSpace) -> Vec<usize> {
    std::iter::once(s.basepoint())
        .chain((0..s.len()).filter(|&i| i != s.basepoint()))
        .collect()
}

pub const REPORT_COLUMNS: [&str; 8] = [
    "n_points",
    "subset_size",
    "K_strong",
    "K_signed",
    "tv_const",
    "udp_bound",
    "doubling_est",
    "runtime_ms",
];

fn report(s: &Arc<FiniteMetricSpace>, sub: Option<&str>, samples: usize, cfg: &RunConfig) -> Res<Output> {
    let subsets = match sub {
        Some(l) => vec![subset(s, l)?],
        None => {
            let mut r = gen::rng(cfg.seed);
            (0..samples)
                .map(|_| {
                    let k = r.gen_range(1..=s.len());
                    gen::random_subset(&mut r, s, k)
                })
                .collect()
        }
    };
    let doubling = doubling_estimate(s);
    let mut rows = Vec::new();
    let mut objects = Vec::new();
    for m in &subsets {
        let start = Instant::now();
        let strong = synthesize_min_k(m, SynthesisMode::Strong, &cfg.tol)?;
        let signed = synthesize_min_k(m, SynthesisMode::Signed, &cfg.tol)?;
        let tv = weighted_tv_constant(&strong.projection).value;
        let udp_bound = s
            .separation_of(m.members())
            .map(|eps| 2.0 * s.diameter_of(m.members()).max(eps) / eps);
        let ms = start.elapsed().as_secs_f64() * 1e3;
        let row = vec![
            json!(s.len()),
            json!(m.len()),
            json!(strong.k_star),
            json!(signed.k_star),
            json!(tv),
            udp_bound.map_or(Value::Null, |b| json!(b)),
            json!(doubling),
            json!(ms),
        ];
        let mut obj: Map<String, Value> = REPORT_COLUMNS.iter().map(|c| c.to_string()).zip(row.iter().cloned()).collect();
        obj.insert("subset".into(), json!(m.labels()));
        objects.push(Value::Object(obj));
        rows.push(row);
    }
    Ok(Output { json: json!({"seed": cfg.seed, "rows": objects}), table: Some((REPORT_COLUMNS.to_vec(), rows)) })
}
