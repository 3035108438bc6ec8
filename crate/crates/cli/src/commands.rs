//! One function per subcommand; each returns the text to print.

use std::path::Path;

use serde::Serialize;
use serde_json::json;

use crysect_core::admissible::{g_series, g_series_recursive, Star};
use crysect_core::crystal::{q_prime_upper, Crystal, SpecialEndo};
use crysect_core::curve::{CurveJson, FormalCurve};
use crysect_core::deformation::{compare, decay_classify, predicted_multiplicity, profile_from, Predicted, Pullbacks};
use crysect_core::intersection::{bound_report, LatticeModel};
use crysect_core::qlattice::density::{local_density_hanke, local_density_limit_budget, stabilized_density};
use crysect_core::qlattice::{eisenstein::eisenstein_coeff_budget, FormJson, QuadLattice};
use crysect_core::verify::run_suite;
use crysect_core::{Error, Result};

use crate::config::RunConfig;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// A lattice from a preset name or a JSON file.
pub fn load_lattice(spec: &str, cfg: &RunConfig) -> Result<QuadLattice> {
    match spec {
        "ambient" => Ok(QuadLattice::ambient()),
        "model-p3" => Ok(QuadLattice::model_p3()),
        "q-prime" => QuadLattice::new(q_prime_upper(cfg.p as i64, cfg.eps_residue()? as i64)),
        path => QuadLattice::from_json(&read_json::<FormJson>(Path::new(path))?),
    }
}

fn load_curve(path: &Path, cfg: &RunConfig, t: usize) -> Result<FormalCurve> {
    let j: CurveJson = read_json(path)?;
    FormalCurve::from_json(cfg.ring()?, &j, Some(t))
}

pub fn crystal(cfg: &RunConfig, f_infty: bool) -> Result<String> {
    let c = Crystal::new(cfg.ring()?, cfg.degree_bound())?;
    let (non_ordinary, supersingular) = c.strata_equations();
    let mut out = json!({
        "p": cfg.p,
        "eps": cfg.eps_residue()?,
        "precision": cfg.precision,
        "degree_bound": cfg.degree_bound(),
        "q_prime": q_prime_upper(cfg.p as i64, cfg.eps_residue()? as i64),
        "strata": {
            "non_ordinary": non_ordinary.to_json(),
            "supersingular": supersingular.to_json(),
        },
    });
    if f_infty {
        let graded = c.f_infty_graded(c.default_depth());
        let pieces: Vec<Vec<Vec<_>>> =
            graded.iter().map(|m| (0..5).map(|i| (0..5).map(|j| m.get(i, j).to_json()).collect()).collect()).collect();
        out["f_infty_graded"] = json!(pieces);
    }
    Ok(pretty(&out))
}

pub fn gseries(cfg: &RunConfig, n: u32, star: &str, omega: &str, recursive: Option<u32>) -> Result<String> {
    let c = Crystal::new(cfg.ring()?, cfg.degree_bound())?;
    let star = Star::parse(star)?;
    let w = SpecialEndo::parse(omega)?;
    let g = match recursive {
        Some(m) => g_series_recursive(n, star, &w, m, &c)?,
        None => g_series(n, star, &w, &c)?,
    };
    let series: Vec<_> = g.iter().map(|s| s.to_json()).collect();
    Ok(pretty(&json!({ "n": n, "star": star, "omega": w.to_string(), "series": series })))
}

#[derive(Serialize)]
struct DecayRow {
    n: u32,
    predicted: Predicted,
    computed: crysect_core::witt::Valuation,
    agreement: crysect_core::deformation::Agreement,
}

pub fn decay(cfg: &RunConfig, curve: &Path, omega: &str, n_max: u32, classify: bool) -> Result<String> {
    let w = SpecialEndo::parse(omega)?;
    if n_max == 0 {
        return Err(Error::Config("nmax must be at least 1".into()));
    }
    // raise t until every finite prediction is visible
    let mut t = 64.min(cfg.t_precision);
    let (prof, rows) = loop {
        let c = load_curve(curve, cfg, t)?;
        let pb = Pullbacks::new(&c);
        let prof = profile_from(&pb, &c, &w);
        let preds: Vec<Predicted> = (1..=n_max).map(|n| predicted_multiplicity(&prof, n)).collect();
        let need = preds.iter().filter_map(|p| if let Predicted::Finite(v) = p { Some(*v as usize + 2) } else { None }).max().unwrap_or(0);
        if need > t && t < cfg.t_precision {
            t = need.min(cfg.t_precision);
            continue;
        }
        let rows: Vec<DecayRow> = (1..=n_max)
            .zip(preds)
            .map(|(n, predicted)| {
                let computed = pb.defo(n, &w).t_valuation();
                DecayRow { n, predicted, computed, agreement: compare(predicted, computed) }
            })
            .collect();
        break (prof, rows);
    };
    let mut out = json!({ "omega": w.to_string(), "profile": prof, "multiplicities": rows });
    if classify {
        out["adapted_basis"] = json!(decay_classify(&load_curve(curve, cfg, t)?, n_max - 1)?);
    }
    Ok(pretty(&out))
}

pub fn density(cfg: &RunConfig, lattice: &str, l: u64, m: i64, level: Option<u32>, hanke: bool) -> Result<String> {
    let lat = load_lattice(lattice, cfg)?;
    let out = if hanke {
        let d = local_density_hanke(&lat, l, m)?;
        json!({ "l": l, "m": m, "method": "hanke", "value": format!("{}/{}", d.numer(), d.denom()) })
    } else if let Some(a) = level {
        let d = local_density_limit_budget(&lat, l, m, a, cfg.point_budget as u128)?;
        json!({ "l": l, "m": m, "method": "level", "a": a, "value": format!("{}/{}", d.numer(), d.denom()) })
    } else {
        let s = stabilized_density(&lat, l, m, cfg.point_budget as u128)?;
        json!({ "l": l, "m": m, "method": "stabilized", "a": s.a, "value": s.value })
    };
    Ok(pretty(&out))
}

pub fn eisenstein(cfg: &RunConfig, lattice: &str, ms: &[u64], tol: f64, csv: bool) -> Result<String> {
    let lat = load_lattice(lattice, cfg)?;
    let coeffs = ms.iter().map(|&m| eisenstein_coeff_budget(&lat, m, tol, cfg.point_budget as u128)).collect::<Result<Vec<_>>>()?;
    if !csv {
        return Ok(pretty(&coeffs));
    }
    let mut s = String::from("m,q,q_over_m32\n");
    for q in &coeffs {
        s.push_str(&format!("{},{:.10e},{:.10}\n", q.m, q.value, q.value / (q.m as f64).powf(1.5)));
    }
    Ok(s)
}

pub fn intersect(cfg: &RunConfig, curve: &Path, lattice: &str, ms: &[u64], n_max: u32, tol: f64, csv: bool) -> Result<String> {
    let model = LatticeModel::new(load_lattice(lattice, cfg)?, cfg.p, cfg.eps_residue()?)?;
    let j: CurveJson = read_json(curve)?;
    let t = j.tprec.unwrap_or(cfg.t_precision).min(cfg.t_precision);
    let c = FormalCurve::from_json(cfg.ring()?, &j, Some(t))?;
    let rep = bound_report(&c, &model, ms, n_max, tol)?;
    if !csv {
        return Ok(pretty(&rep));
    }
    let mut s = String::from("m,lP,gP,ratio,flags\n");
    for r in &rep.rows {
        let flag = match r.within_bound {
            None => "incomplete",
            Some(true) => "within",
            Some(false) => "above",
        };
        s.push_str(&format!("{},{},{:.6},{:.6},{}\n", r.m, r.l_p, r.g_p, r.ratio, flag));
    }
    Ok(s)
}

#[derive(Serialize)]
struct CheckLine {
    id: u32,
    name: String,
    passed: bool,
    detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seconds: Option<f64>,
}

/// The report and whether every check passed.
pub fn verify(cfg: &RunConfig, suite: &str, timings: bool) -> Result<(String, bool)> {
    let rep = run_suite(suite, cfg.seed)?;
    let lines: Vec<CheckLine> = rep
        .checks
        .iter()
        .map(|c| CheckLine { id: c.id, name: c.name.clone(), passed: c.passed, detail: c.detail.clone(), seconds: timings.then_some(c.seconds) })
        .collect();
    let ok = rep.passed();
    Ok((pretty(&json!({ "suite": suite, "seed": cfg.seed, "passed": ok, "checks": lines })), ok))
}

/// `"1,4,10"` or ranges `"1800..2000"`; an optional `/r` keeps only `m` that
/// are nonzero squares mod `r`.
pub fn parse_m_set(s: &str) -> Result<Vec<u64>> {
    let (body, filter) = match s.split_once('/') {
        Some((b, r)) => (b, Some(r.trim().parse::<i64>().map_err(|_| Error::Config(format!("bad residue filter in {s:?}")))?)),
        None => (s, None),
    };
    let mut out = Vec::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || Error::Config(format!("bad m-set entry {part:?}"));
        if let Some((a, b)) = part.split_once("..") {
            let (a, b) = (a.trim().parse::<u64>().map_err(|_| bad())?, b.trim().parse::<u64>().map_err(|_| bad())?);
            out.extend(a..=b);
        } else {
            out.push(part.parse::<u64>().map_err(|_| bad())?);
        }
    }
    if let Some(r) = filter {
        out.retain(|&m| crysect_core::qlattice::kronecker(m as i64, r) == 1);
    }
    if out.is_empty() {
        return Err(Error::Config("m-set is empty".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_sets() {
        assert_eq!(parse_m_set("1,4, 10").unwrap(), vec![1, 4, 10]);
        assert_eq!(parse_m_set("1..5/3").unwrap(), vec![1, 4]);
        assert!(parse_m_set("x").is_err());
        assert!(parse_m_set("3,6/3").is_err());
    }
}
