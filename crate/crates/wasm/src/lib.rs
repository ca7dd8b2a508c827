//! Browser bindings: word reduction, weighted mean ergodic errors and
//! disjointness of finite rotations. Every entry point returns JSON text,
//! `{"error": ...}` on bad input.

use num_complex::Complex64;
use relerg::averaging::{fixed_space_projection, weighted_mean_flow, CVector, Domain, MatrixFlow, WeightFamily, WeightScheme};
use relerg::free_group::Alphabet;
use relerg::joinings::{is_relatively_disjoint, joining_polytope, ClassicalSystem};
use serde_json::{json, Value};
use wasm_bindgen::prelude::wasm_bindgen;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

pub fn reduce_word_value(alphabet: &str, word: &str, shift: i64) -> Result<Value, String> {
    let al: Alphabet = serde_json::from_str(alphabet).map_err(|e| e.to_string())?;
    let w = al.parse_word(word).map_err(|e| e.to_string())?;
    let shifted = al.apply_t(&w, shift);
    Ok(json!({
        "reduced": al.format_word(&w),
        "length": w.len(),
        "inverse": al.format_word(&w.inverse()),
        "shifted": al.format_word(&shifted),
        "finite_orbit": al.in_finite_orbit_subgroup(&w),
    }))
}

/// Reduces `word` over the alphabet given as JSON and applies `T^shift`.
#[wasm_bindgen]
pub fn reduce_word(alphabet: &str, word: &str, shift: i32) -> String {
    respond(reduce_word_value(alphabet, word, shift as i64))
}

fn family(name: &str, s: f64) -> Result<WeightFamily, String> {
    Ok(match name {
        "uniform" => WeightFamily::Uniform,
        "power" => WeightFamily::Power { s },
        "log" => WeightFamily::Log,
        "voronoi" => WeightFamily::Voronoi { s },
        other => return Err(format!("unknown family `{other}`")),
    })
}

pub fn mean_ergodic_value(name: &str, s: f64, windows: &[f64]) -> Result<Value, String> {
    let scheme = WeightScheme::new(Domain::Continuous, family(name, s)?).map_err(|e| e.to_string())?;
    let flow = MatrixFlow::diagonal(&[0.0, 1.0, 2f64.sqrt()]);
    let x = CVector::from_element(3, Complex64::new(1.0 / 3f64.sqrt(), 0.0));
    let px = fixed_space_projection(&flow).map_err(|e| e.to_string())? * &x;
    let mut rows = Vec::new();
    for &n in windows {
        let mean = weighted_mean_flow(&flow, &x, &scheme, n).map_err(|e| e.to_string())?;
        rows.push(json!({ "n": n, "error": (mean - &px).norm() }));
    }
    Ok(json!({ "scheme": scheme.name(), "rows": rows }))
}

/// `‖A_N x − Px‖` for `H₀ = diag(0, 1, √2)`, `x = (1, 1, 1)/√3` at each window.
#[wasm_bindgen]
pub fn mean_ergodic_errors(family: &str, s: f64, windows: Vec<f64>) -> String {
    respond(mean_ergodic_value(family, s, &windows))
}

pub fn rotation_joinings_value(na: usize, nb: usize) -> Result<Value, String> {
    if na == 0 || nb == 0 || na * nb > 400 {
        return Err("rotation sizes must be positive with product at most 400".into());
    }
    let a = ClassicalSystem::cycle(na).map_err(|e| e.to_string())?;
    let b = ClassicalSystem::cycle(nb).map_err(|e| e.to_string())?;
    let poly = joining_polytope(&a, &b, None).map_err(|e| e.to_string())?;
    let report = is_relatively_disjoint(&poly).map_err(|e| e.to_string())?;
    serde_json::to_value(report).map_err(|e| e.to_string())
}

/// Disjointness report for the rotations of `na` and `nb` points.
#[wasm_bindgen]
pub fn rotation_joinings(na: usize, nb: usize) -> String {
    respond(rotation_joinings_value(na, nb))
}
