use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::averaging::{
    fixed_space_projection, folner_defect, transformed_average_check, weighted_mean_flow, Domain, MatrixFlow,
};
use crate::dual_system::{DualState, GroupAlgebraElement, L2Vector};
use crate::finite_systems::{
    build_section4, canonical_basis, real_functional, section4_states, tensor_product, thm215_limit_check,
    unique_es_ergodicity_check, unique_es_weak_mixing_check, CheckReport, FiniteSystem, Functional,
};
use crate::free_group::{Alphabet, FamilyKind, ReducedWord, Run};
use crate::joinings::{
    is_relatively_disjoint, joining_polytope, matrix_rows, weighted_coupling_average, Coupling,
};
use crate::mixing_lab::{
    bergelson_values, correlation_difference, furstenberg_average, higher_order_mixing_check_many,
    mixing_decay, multitime_correlation, CorrelationQuery, PositiveElement, ZERO_TOL,
};
use crate::Error;

use super::config::*;
use super::{Cell, ConfigError, Outcome, Table};

pub(super) fn run(cfg: &ExperimentConfig) -> Result<Outcome, ConfigError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match &cfg.experiment {
        Experiment::MeanErgodic(c) => mean_ergodic(c),
        Experiment::FolnerDefect(c) => folner(c),
        Experiment::MixingDecay(c) => decay(c),
        Experiment::Multitime(c) => multitime(c),
        Experiment::GapSearch(c) => gap_search(c, &mut rng),
        Experiment::Furstenberg(c) => furstenberg(c),
        Experiment::Bergelson(c) => bergelson(c),
        Experiment::Section4(c) => section4(c),
        Experiment::Tensor(c) => tensor(c),
        Experiment::Thm215(c) => thm215(c),
        Experiment::Joinings(c) => joinings(c),
    }
}

fn cx(v: Complex64) -> Value {
    json!([v.re, v.im])
}

fn window(n: f64) -> Cell {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        Cell::Int(n as i64)
    } else {
        Cell::Float(n)
    }
}

fn positive_windows(windows: &[f64]) -> Result<(), ConfigError> {
    if windows.is_empty() || windows.iter().any(|&n| !(n > 0.0 && n.is_finite())) {
        return Err(ConfigError::new("windows must be a non-empty list of positive numbers"));
    }
    Ok(())
}

fn mean_ergodic(c: &MeanErgodic) -> Result<Outcome, ConfigError> {
    let (flow, default) = match (&c.generator, &c.step) {
        (Some(h), None) => (MatrixFlow::continuous(complex_matrix(h)?)?, Domain::Continuous),
        (None, Some(u)) => (MatrixFlow::discrete(complex_matrix(u)?)?, Domain::Discrete),
        _ => return Err(ConfigError::new("give exactly one of `generator` and `step`")),
    };
    let x = complex_vector(&c.x);
    if x.len() != flow.dimension() {
        return Err(ConfigError::new(format!("x has length {}, flow has dimension {}", x.len(), flow.dimension())));
    }
    let windows = reals(&c.windows);
    positive_windows(&windows)?;
    if c.schemes.is_empty() {
        return Err(ConfigError::new("no schemes given"));
    }
    let px = fixed_space_projection(&flow)? * &x;
    let mut table = Table::new(&["N", "scheme", "error"]);
    let mut pass = true;
    let mut finals = Map::new();
    for sc in &c.schemes {
        let scheme = sc.build(default)?;
        let mut prev = f64::INFINITY;
        let mut monotone = true;
        let mut last = 0.0;
        for &n in &windows {
            let err = (weighted_mean_flow(&flow, &x, &scheme, n)? - &px).norm();
            table.push(vec![window(n), scheme.name().into(), err.into()]);
            monotone &= err <= prev;
            prev = err;
            last = err;
        }
        let ok = monotone && last < c.tol.0;
        pass &= ok;
        finals.insert(scheme.name(), json!({"error": last, "nonincreasing": monotone, "pass": ok}));
    }
    let sub_tol = c.substitution_tol.map_or(5e-3, |t| t.0);
    let mut subs = Vec::new();
    for s in &c.substitutions {
        let (w, u) = transformed_average_check(&flow, &x, s.build(), s.window())?;
        let diff = (w - u).norm();
        pass &= diff < sub_tol;
        subs.push(json!({"substitution": format!("{:?}", s.build()), "n": s.window(), "difference": diff}));
    }
    let mut results = Map::new();
    results.insert("schemes".into(), Value::Object(finals));
    results.insert("substitutions".into(), Value::Array(subs));
    results.insert("tol".into(), json!(c.tol.0));
    Ok(Outcome { pass, table, results })
}

fn folner(c: &FolnerConfig) -> Result<Outcome, ConfigError> {
    let windows = reals(&c.windows);
    positive_windows(&windows)?;
    let mut table = Table::new(&["N", "scheme", "defect"]);
    let mut pass = true;
    let mut per = Map::new();
    for sc in &c.schemes {
        let scheme = sc.build(Domain::Discrete)?;
        let mut defects = Vec::new();
        for &n in &windows {
            let d = folner_defect(&scheme, c.h.0, n)?;
            table.push(vec![window(n), scheme.name().into(), d.into()]);
            defects.push(d);
        }
        let ok = defects.windows(2).all(|w| match c.ratio {
            Some(r) => w[1] <= r.0 * w[0] * (1.0 + 1e-12),
            None => w[1] < w[0],
        });
        pass &= ok;
        per.insert(scheme.name(), json!({"defects": defects, "pass": ok}));
    }
    let mut results = Map::new();
    results.insert("schemes".into(), Value::Object(per));
    Ok(Outcome { pass, table, results })
}

fn decay(c: &MixingDecay) -> Result<Outcome, ConfigError> {
    let al = &c.alphabet;
    let state = c.state.build(al)?;
    let a = element(al, &c.operator)?;
    if c.n_max == 0 {
        return Err(ConfigError::new("n_max must be positive"));
    }
    let values = mixing_decay(al, &state, &a, c.n_max);
    let mut table = Table::new(&["n", "re", "im", "abs"]);
    let mut nonzero = Vec::new();
    for (i, v) in values.iter().enumerate() {
        table.push(vec![(i + 1).into(), v.re.into(), v.im.into(), v.norm().into()]);
        if v.norm() > ZERO_TOL {
            nonzero.push(i + 1);
        }
    }
    let last = values.last().copied().unwrap_or_default();
    let mut results = Map::new();
    results.insert("nonzero_count".into(), json!(nonzero.len()));
    results.insert("last_nonzero".into(), json!(nonzero.last()));
    results.insert("finite_orbit_supported".into(), json!(a.is_finite_orbit_supported(al)));
    Ok(Outcome { pass: last.norm() <= ZERO_TOL, table, results })
}

fn operators(al: &Alphabet, ops: &[Vec<crate::dual_system::TermRecord>]) -> Result<Vec<GroupAlgebraElement>, ConfigError> {
    if ops.is_empty() {
        return Err(ConfigError::new("no operators given"));
    }
    ops.iter().map(|o| element(al, o)).collect()
}

fn multitime(c: &Multitime) -> Result<Outcome, ConfigError> {
    let al = &c.alphabet;
    let ops = operators(al, &c.operators)?;
    let perm = c.permutation.clone().unwrap_or_else(|| (0..ops.len()).collect());
    let q = CorrelationQuery { state: c.state.build(al)?, operators: ops, times: c.times.clone(), permutation: perm };
    let value = multitime_correlation(al, &q)?;
    let diff = correlation_difference(al, &q.state, &q.operators, &q.times, &q.permutation)?;
    let mut table = Table::new(&["times", "re", "im", "abs", "difference_re", "difference_im", "difference_abs"]);
    let times = q.times.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
    table.push(vec![
        times.into(),
        value.re.into(),
        value.im.into(),
        value.norm().into(),
        diff.re.into(),
        diff.im.into(),
        diff.norm().into(),
    ]);
    let mut results = Map::new();
    results.insert("value".into(), cx(value));
    results.insert("difference".into(), cx(diff));
    Ok(Outcome { pass: true, table, results })
}

fn random_word(al: &Alphabet, rng: &mut ChaCha8Rng, max_len: u32) -> Result<ReducedWord, ConfigError> {
    let len = rng.random_range(0..=max_len);
    let mut runs = Vec::with_capacity(len as usize);
    for _ in 0..len {
        let fam = &al.families()[rng.random_range(0..al.families().len())];
        let index = match fam.kind {
            FamilyKind::Cycle { length } => rng.random_range(0..length as i64),
            FamilyKind::Shift => rng.random_range(-2..=2),
        };
        let exp = if rng.random_bool(0.5) { 1 } else { -1 };
        runs.push(Run { symbol: al.symbol(&fam.name, index)?, exp });
    }
    Ok(ReducedWord::from_runs(runs))
}

/// A unit vector with `support` random words and random complex amplitudes.
pub(super) fn random_state(al: &Alphabet, rng: &mut ChaCha8Rng, support: usize, max_len: u32) -> Result<DualState, ConfigError> {
    if support == 0 {
        return Err(ConfigError::new("random states need a positive support"));
    }
    let mut amps = Vec::with_capacity(support);
    for _ in 0..support {
        let w = random_word(al, rng, max_len)?;
        let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        amps.push((w, z));
    }
    let x = L2Vector::from_amplitudes(amps);
    if x.norm() == 0.0 {
        return Ok(DualState::Trace);
    }
    Ok(DualState::vector(x.normalized()?)?)
}

fn gap_search(c: &GapSearch, rng: &mut ChaCha8Rng) -> Result<Outcome, ConfigError> {
    let al = &c.alphabet;
    let ops = operators(al, &c.operators)?;
    if c.window == 0 || c.gap_max == 0 {
        return Err(ConfigError::new("window and gap_max must be positive"));
    }
    let mut states = c.states.iter().map(|s| s.build(al)).collect::<Result<Vec<_>, _>>()?;
    if let Some(r) = &c.random_states {
        for _ in 0..r.count {
            states.push(random_state(al, rng, r.support, r.max_len)?);
        }
    }
    if states.is_empty() {
        return Err(ConfigError::new("no states given"));
    }
    let mut perms = c.permutations.clone();
    for _ in 0..c.random_permutations {
        let mut p: Vec<usize> = (0..ops.len()).collect();
        p.shuffle(rng);
        perms.push(p);
    }
    if perms.is_empty() {
        perms.push((0..ops.len()).collect());
    }
    let mut table = Table::new(&["permutation", "state", "G", "valid", "nonzero_tuples"]);
    let mut pass = true;
    let mut g_max = 0;
    let mut all = Vec::new();
    for p in &perms {
        let label = p.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
        let found = higher_order_mixing_check_many(al, &states, &ops, p, c.window, c.gap_max)?;
        for (s, g) in found.iter().enumerate() {
            table.push(vec![label.clone().into(), s.into(), g.g.into(), g.valid.into(), g.nonzero_tuples.into()]);
            pass &= g.valid;
            g_max = g_max.max(g.g);
        }
        all.push(json!({"permutation": p, "thresholds": found}));
    }
    let mut results = Map::new();
    results.insert("max_gap_threshold".into(), json!(g_max));
    results.insert("scans".into(), Value::Array(all));
    Ok(Outcome { pass, table, results })
}

fn furstenberg(c: &Furstenberg) -> Result<Outcome, ConfigError> {
    let al = &c.alphabet;
    let a = PositiveElement::from_factor(element(al, &c.factor)?);
    let r = furstenberg_average(al, &a, c.k, c.n, c.absolute, None)?;
    let mut table = Table::new(&["n", "re", "im", "abs"]);
    for (i, v) in r.values.iter().enumerate() {
        table.push(vec![(i + 1).into(), v.re.into(), v.im.into(), v.norm().into()]);
    }
    let mu = DualState::Trace.evaluate(a.value()).re;
    let mut results = Map::new();
    results.insert("average".into(), json!(r.average.re));
    results.insert("average_im".into(), json!(r.average.im));
    results.insert("comparison".into(), json!(r.comparison));
    results.insert("trace_a".into(), json!(mu));
    let pass = mu <= 0.0 || r.average.norm() > 0.0;
    Ok(Outcome { pass, table, results })
}

fn bergelson(c: &Bergelson) -> Result<Outcome, ConfigError> {
    let al = &c.alphabet;
    let ops: [GroupAlgebraElement; 4] = [
        element(al, &c.operators[0])?,
        element(al, &c.operators[1])?,
        element(al, &c.operators[2])?,
        element(al, &c.operators[3])?,
    ];
    let values = bergelson_values(al, &ops, c.p, c.q, c.n)?;
    let mut table = Table::new(&["m", "n", "value", "e_value"]);
    let (mut s, mut e) = (0.0, 0.0);
    for &(m, n, v, ev) in &values {
        table.push(vec![m.into(), n.into(), v.into(), ev.into()]);
        s += v;
        e += ev;
    }
    let n2 = c.n as f64 * c.n as f64;
    let (avg, e_avg) = (s / n2, e / n2);
    let tol = c.tol.map_or(1e-12, |t| t.0);
    let mut results = Map::new();
    results.insert("average".into(), json!(avg));
    results.insert("e_average".into(), json!(e_avg));
    results.insert("difference".into(), json!((avg - e_avg).abs()));
    Ok(Outcome { pass: (avg - e_avg).abs() <= tol, table, results })
}

fn report_row(table: &mut Table, name: &str, r: &CheckReport) {
    let w = r.witness.as_ref();
    table.push(vec![
        name.into(),
        r.pass.into(),
        r.max_defect.into(),
        r.tol.into(),
        w.map_or(Cell::Empty, |w| w.state.into()),
        w.map_or(Cell::Empty, |w| w.probe.into()),
        w.map_or(Cell::Empty, |w| w.mean.into()),
        w.map_or(Cell::Empty, |w| w.running_liminf.into()),
    ]);
}

const REPORT_HEADER: [&str; 8] =
    ["check", "pass", "max_defect", "tol", "witness_state", "witness_probe", "witness_mean", "running_liminf"];

fn section4(c: &Section4) -> Result<Outcome, ConfigError> {
    let inst = build_section4(c.p.0)?;
    let scheme = c.scheme.build(Domain::Discrete)?;
    let mut states = section4_states(c.samples, false);
    states.push(real_functional(&[0.0, 1.0, 0.0, 0.0]));
    let mut probes = canonical_basis(4);
    probes.push(inst.k.clone());
    let el = unique_es_weak_mixing_check(&inst.system(inst.e_l.clone(), states.clone())?, &probes, &scheme, c.n, c.tol.0)?;
    let fix = unique_es_weak_mixing_check(&inst.system(inst.e_fix.clone(), states)?, &probes, &scheme, c.n, c.tol.0)?;
    let mut table = Table::new(&REPORT_HEADER);
    report_row(&mut table, "weak_mixing_EL", &el);
    report_row(&mut table, "weak_mixing_Efix", &fix);
    let mut results = Map::new();
    results.insert("weak_mixing_EL".into(), json!(el.pass));
    results.insert("weak_mixing_Efix".into(), json!(fix.pass));
    results.insert("eigenvalues".into(), Value::Array(inst.eigenvalues().into_iter().map(cx).collect()));
    results.insert("reports".into(), json!({"EL": el, "Efix": fix}));
    Ok(Outcome { pass: el.pass && !fix.pass, table, results })
}

fn build_system(c: &SystemConfig) -> Result<FiniteSystem, ConfigError> {
    match c {
        SystemConfig::Section4 { p, projection, states, samples } => {
            let inst = build_section4(p.0)?;
            let e = match projection {
                Section4Projection::El => inst.e_l.clone(),
                Section4Projection::Efix => inst.e_fix.clone(),
            };
            let states: Vec<Functional> = match states {
                Section4StateFamily::Probability => section4_states(*samples, false),
                Section4StateFamily::Unital => section4_states(*samples, true),
                Section4StateFamily::Basis => canonical_basis(4).iter().map(|e| real_functional(e.as_slice())).collect(),
            };
            Ok(inst.system(e, states)?)
        }
        SystemConfig::Explicit { alpha, projection, states, markov } => {
            let states = states.iter().map(|s| complex_vector(s)).collect();
            Ok(FiniteSystem::new(real_matrix(alpha)?, real_matrix(projection)?, states, *markov)?)
        }
    }
}

fn tensor(c: &Tensor) -> Result<Outcome, ConfigError> {
    let sys = tensor_product(&build_system(&c.left)?, &build_system(&c.right)?)?;
    let scheme = c.scheme.build(Domain::Discrete)?;
    let probes = canonical_basis(sys.dimension());
    let (name, report) = match c.check {
        TensorCheck::Ergodicity => ("ergodicity", unique_es_ergodicity_check(&sys, &probes, &scheme, c.n, c.tol.0)?),
        TensorCheck::WeakMixing => ("weak_mixing", unique_es_weak_mixing_check(&sys, &probes, &scheme, c.n, c.tol.0)?),
    };
    let mut table = Table::new(&REPORT_HEADER);
    report_row(&mut table, name, &report);
    let mut results = Map::new();
    results.insert("dimension".into(), json!(sys.dimension()));
    results.insert("states".into(), json!(sys.states().len()));
    results.insert("report".into(), json!(report));
    Ok(Outcome { pass: report.pass, table, results })
}

fn thm215(c: &Thm215) -> Result<Outcome, ConfigError> {
    let alpha = real_matrix(&c.alpha)?;
    let scheme = c.scheme.build(Domain::Discrete)?;
    let mut table = Table::new(&["row", "col", "value"]);
    let mut results = Map::new();
    let report = match thm215_limit_check(&alpha, &scheme, c.n, c.tol.0) {
        Ok(r) => r,
        Err(Error::NonConvergence(cauchy)) => {
            results.insert("converged".into(), json!(false));
            results.insert("cauchy".into(), json!(cauchy));
            return Ok(Outcome { pass: false, table, results });
        }
        Err(e) => return Err(e.into()),
    };
    for (i, row) in report.limit.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            table.push(vec![i.into(), j.into(), (*v).into()]);
        }
    }
    let mut pass = report.pass;
    results.insert("converged".into(), json!(true));
    if let Some(exp) = &c.expected {
        let exp = real_matrix(exp)?;
        if exp.shape() != report.limit.shape() {
            return Err(ConfigError::new("expected limit has the wrong shape"));
        }
        let err = (&report.limit - exp).amax();
        let tol = c.expected_tol.map_or(1e-3, |t| t.0);
        pass &= err < tol;
        results.insert("expected_error".into(), json!(err));
    }
    results.insert("report".into(), json!(report));
    Ok(Outcome { pass, table, results })
}

fn joinings(c: &Joinings) -> Result<Outcome, ConfigError> {
    let a = c.a.build()?;
    let b = c.b.build()?;
    let factor = c.factor.as_ref().map(|f| f.build(&a, &b)).transpose()?;
    let mut table = Table::new(&["N", "scheme", "residual", "error"]);
    let mut results = Map::new();
    let poly = match joining_polytope(&a, &b, factor.as_ref()) {
        Ok(p) => p,
        Err(Error::Infeasible(msg)) => {
            results.insert("feasible".into(), json!(false));
            results.insert("reason".into(), json!(msg));
            return Ok(Outcome { pass: false, table, results });
        }
        Err(e) => return Err(e.into()),
    };
    let report = is_relatively_disjoint(&poly)?;
    let mut pass = c.expect_disjoint.is_none_or(|d| d == report.disjoint);
    if let Some(net) = &c.coupling {
        let net = net.build()?;
        let schemes = if c.schemes.is_empty() { vec![uniform()] } else { c.schemes.clone() };
        if c.windows.is_empty() || c.windows.contains(&0) {
            return Err(ConfigError::new("coupling averages need positive windows"));
        }
        let windows: BTreeSet<usize> = c.windows.iter().copied().collect();
        let mut finals = Map::new();
        for sc in &schemes {
            let scheme = sc.build(Domain::Discrete)?;
            let mut last: Option<Coupling> = None;
            for &n in &windows {
                let avg = weighted_coupling_average(&a, &b, &net, factor.as_ref(), &scheme, n)?;
                let err = report.unique_joining.as_ref().map(|u| (&avg - u).amax());
                table.push(vec![n.into(), scheme.name().into(), poly.residual(&avg).into(), err.map_or(Cell::Empty, Cell::Float)]);
                if let (Some(e), Some(t)) = (err, c.tol) {
                    if n == *windows.last().expect("non-empty") {
                        pass &= e <= t.0;
                    }
                }
                last = Some(avg);
            }
            finals.insert(scheme.name(), json!(last.as_ref().map(matrix_rows)));
        }
        results.insert("averages".into(), Value::Object(finals));
    }
    results.insert("feasible".into(), json!(true));
    results.insert("disjoint".into(), json!(report.disjoint));
    results.insert("report".into(), json!(report));
    Ok(Outcome { pass, table, results })
}
