//! Browser bindings: three read-only operations over `crysect-core`, each
//! returning a JSON string for the page in `www/` to render.

use serde_json::json;
use wasm_bindgen::prelude::*;

use crysect_core::admissible::IndexSystem;
use crysect_core::crystal::SpecialEndo;
use crysect_core::curve::{CurveJson, FormalCurve};
use crysect_core::deformation::{compare, predicted_multiplicity, profile_from, Predicted, Pullbacks};
use crysect_core::qlattice::eisenstein::eisenstein_coeff;
use crysect_core::qlattice::QuadLattice;
use crysect_core::witt::WittRing;

/// Browsers get a smaller ceiling than the CLI.
const MAX_T: usize = 1500;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_list(s: &str) -> Result<Vec<u32>, JsError> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty()).map(|x| x.parse::<u32>().map_err(js_err)).collect()
}

fn parse_opt(s: &str) -> Result<Option<u32>, JsError> {
    let s = s.trim();
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(js_err)
    }
}

/// Decay profile and multiplicities `D_1..D_nmax` of a curve given as JSON,
/// at `p = 3`.
#[wasm_bindgen]
pub fn decay_profile(curve_json: &str, omega: &str, n_max: u32) -> Result<String, JsError> {
    let ring = WittRing::auto(3, 1).map_err(js_err)?;
    let j: CurveJson = serde_json::from_str(curve_json).map_err(js_err)?;
    let w = SpecialEndo::parse(omega).map_err(js_err)?;
    let n_max = n_max.clamp(1, 3);
    let mut t = 64;
    loop {
        let curve = FormalCurve::from_json(ring, &j, Some(t)).map_err(js_err)?;
        let pb = Pullbacks::new(&curve);
        let prof = profile_from(&pb, &curve, &w);
        let preds: Vec<Predicted> = (1..=n_max).map(|n| predicted_multiplicity(&prof, n)).collect();
        let need = preds.iter().filter_map(|p| if let Predicted::Finite(v) = p { Some(*v as usize + 2) } else { None }).max().unwrap_or(0);
        if need > t && t < MAX_T {
            t = need.min(MAX_T);
            continue;
        }
        let rows: Vec<_> = (1..=n_max)
            .zip(preds)
            .map(|(n, predicted)| {
                let computed = pb.defo(n, &w).t_valuation();
                json!({ "n": n, "predicted": predicted, "computed": computed, "agreement": compare(predicted, computed) })
            })
            .collect();
        return Ok(json!({ "profile": prof, "multiplicities": rows }).to_string());
    }
}

/// `q_L(m)` and `q_L(m)/m^{3/2}` for the ambient lattice, `m` in `lo..=hi`.
#[wasm_bindgen]
pub fn eisenstein_growth(lo: u32, hi: u32) -> Result<String, JsError> {
    if lo == 0 || hi < lo || hi - lo > 400 {
        return Err(JsError::new("need 1 ≤ lo ≤ hi and at most 400 values"));
    }
    let lat = QuadLattice::ambient();
    let mut rows = Vec::new();
    for m in lo..=hi {
        let q = eisenstein_coeff(&lat, m as u64, 1e-8).map_err(js_err)?;
        rows.push(json!({ "m": m, "q": q.value, "scaled": q.value / (m as f64).powf(1.5) }));
    }
    Ok(serde_json::Value::Array(rows).to_string())
}

/// Admissibility of an index system `(i₀; I; J; j_∞)` with degree at `p`.
#[wasm_bindgen]
pub fn check_admissible(lead: &str, i_set: &str, j_set: &str, trail: &str, p: u32) -> Result<String, JsError> {
    let sys = IndexSystem::new(parse_opt(lead)?, &parse_list(i_set)?, &parse_list(j_set)?, parse_opt(trail)?);
    let atoms = sys.atoms().map(|a| a.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>());
    Ok(json!({
        "admissible": sys.is_admissible(),
        "kind": format!("{:?}", sys.kind()),
        "length": sys.length(),
        "degree": sys.degree(p as u64),
        "atoms": atoms,
    })
    .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ops_return_json() {
        let d = decay_profile(r#"{"a":1,"b":1,"c":1,"beta":[1,0]}"#, "0,0,1,0,0", 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&d).unwrap();
        assert_eq!(v["multiplicities"][1]["computed"]["Exact"], 13);
        let e: serde_json::Value = serde_json::from_str(&eisenstein_growth(1, 3).unwrap()).unwrap();
        assert_eq!(e.as_array().unwrap().len(), 3);
        let a: serde_json::Value = serde_json::from_str(&check_admissible("", "1,2", "", "", 3).unwrap()).unwrap();
        assert!(a["admissible"].is_boolean());
    }
}
