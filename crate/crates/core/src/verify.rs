//! The property suite: twelve numbered checks with fixed parameters, each
//! returning a pass/fail verdict, a one-line summary and its wall time.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::admissible::{a_product, closed_form, enumerate_systems, f_blocks_upto, fingerprint, g_series, g_series_recursive, lambda_generators, max_system_length, supports_disjoint, Kind, Star};
use crate::bump::check_induction;
use crate::crystal::{q_prime_upper, Crystal, SpecialEndo};
use crate::deformation::{
    a_n, check_strata, compare, decay_classify, defo_divisor, predicted_multiplicity, profile_from, Agreement, CurveCase, Predicted, Pullbacks, Stratum,
};
use crate::error::{Error, Result};
use crate::intersection::{bound_report, key_bound, LatticeModel};
use crate::qlattice::density::{local_density_hanke, stabilized_density, DEFAULT_BUDGET};
use crate::qlattice::{eisenstein_coeff, kronecker, QuadLattice};
use crate::samples::{random_almost_ordinary, random_supersingular, random_unit, with_ordinary_shift, CurveRecipe};
use crate::witness::witness_curve;
use crate::witt::{Valuation, WittRing};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub time_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// `(id, name, seconds allowed)`.
pub const CHECKS: [(u32, &str, f64); 12] = [
    (1, "f-infinity-identity", 30.0),
    (2, "closed-form-blocks", 10.0),
    (3, "recursion", 60.0),
    (4, "fingerprints", 10.0),
    (5, "strata", 5.0),
    (6, "decay", 300.0),
    (7, "bump-induction", 5.0),
    (8, "witness", 60.0),
    (9, "hanke-densities", 120.0),
    (10, "eisenstein-growth", 180.0),
    (11, "key-lemma-ratio", 300.0),
    (12, "shift-identity", 30.0),
];

/// Check ids for a suite name: `all`, a group, a check name or a number.
pub fn suite_ids(name: &str) -> Result<Vec<u32>> {
    let ids = match name {
        "all" => (1..=12).collect(),
        "admissible" => vec![1, 2, 4],
        "series" => vec![1, 2, 3, 4, 12],
        "deformation" => vec![5, 6, 7, 8, 12],
        "qlattice" => vec![9, 10],
        "intersection" => vec![11],
        _ => match CHECKS.iter().find(|c| c.1 == name) {
            Some(c) => vec![c.0],
            None => match name.parse::<u32>() {
                Ok(k) if (1..=12).contains(&k) => vec![k],
                _ => return Err(Error::Config(format!("unknown suite {name:?}"))),
            },
        },
    };
    Ok(ids)
}

pub fn run_suite(name: &str, seed: u64) -> Result<VerifyReport> {
    let checks = suite_ids(name)?.into_iter().map(|id| run_check(id, seed)).collect();
    Ok(VerifyReport { suite: name.to_string(), seed, checks })
}

pub fn run_check(id: u32, seed: u64) -> CheckOutcome {
    let (_, name, limit) = CHECKS[id as usize - 1];
    let start = Instant::now();
    let res = match id {
        1 => check_f_infinity(),
        2 => check_closed_forms(),
        3 => check_recursion(seed),
        4 => check_fingerprints(),
        5 => check_strata_lines(seed),
        6 => check_decay(seed),
        7 => check_bump(seed),
        8 => check_witness(),
        9 => check_hanke(seed),
        10 => check_eisenstein(),
        11 => check_key_lemma(),
        12 => check_shift(seed),
        _ => Err(Error::Config(format!("no check {id}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (ok, detail) = res.unwrap_or_else(|e| (false, format!("error: {e}")));
    let passed = ok && seconds < limit;
    let detail = if ok && !passed { format!("{detail}; too slow") } else { detail };
    CheckOutcome { id, name: name.to_string(), passed, detail, seconds, time_limit: limit }
}

type Verdict = Result<(bool, String)>;

fn random_endo<R: Rng>(rng: &mut R, range: i64) -> SpecialEndo {
    loop {
        let w = SpecialEndo::new(std::array::from_fn(|_| rng.gen_range(-range..=range)));
        if !w.is_zero() {
            return w;
        }
    }
}

fn check_f_infinity() -> Verdict {
    let c = Crystal::new(WittRing::auto(3, 3)?, 14)?;
    let graded = c.f_infty_graded(4);
    let blocks = f_blocks_upto(graded.len() as u32 + 1, Star::Void, &c);
    let mut ok = graded.len() >= 3;
    for (g, m) in blocks.iter().enumerate() {
        ok &= match graded.get(g) {
            Some(x) => x == m,
            None => m.is_zero(),
        };
    }
    Ok((ok, format!("p=3 N=3 D=14: {} graded pieces, p^-1 and p^-2 pieces {}", graded.len(), if ok { "equal" } else { "differ" })))
}

fn check_closed_forms() -> Verdict {
    let c = Crystal::new(WittRing::auto(3, 3)?, 14)?;
    let mut n = 0;
    let mut core = 0;
    for kind in [Kind::Core, Kind::Lead, Kind::Trail, Kind::Both] {
        for len in 0..=max_system_length(&c) + 2 {
            for sys in enumerate_systems(3, len, Star::Void, kind, 14) {
                if kind == Kind::Core && len == 0 {
                    continue;
                }
                if a_product(&sys, &c)? != closed_form(&sys, &c)? {
                    return Ok((false, format!("mismatch at {sys:?}")));
                }
                n += 1;
                core += usize::from(kind == Kind::Core);
            }
        }
    }
    Ok((core > 0, format!("{n} admissible systems below degree 14 at p=3 ({core} of the form (I,J)), products equal closed forms")))
}

fn check_recursion(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for (p, bound) in [(3u64, 14u32), (5, 32)] {
        let c = Crystal::new(WittRing::auto(p, 3)?, bound)?;
        for _ in 0..20 {
            let w = random_endo(&mut rng, (p * p) as i64);
            for n in 1..=3 {
                for star in [Star::Even, Star::Odd, Star::Void] {
                    let direct = g_series(n, star, &w, &c)?;
                    for m in 1..=n {
                        if g_series_recursive(n, star, &w, m, &c)? != direct {
                            return Ok((false, format!("p={p} ω={w} n={n} m={m} {star:?}")));
                        }
                        compared += 1;
                    }
                }
            }
        }
    }
    Ok((true, format!("{compared} (p, ω, n, ⋆, m) comparisons exact")))
}

fn check_fingerprints() -> Verdict {
    let c = Crystal::new(WittRing::auto(3, 3)?, 14)?;
    let gens = lambda_generators(&c);
    let r = c.ring();
    let mut monomials = 0;
    for (fam, sys, s) in &gens {
        for (e, v) in s.terms() {
            if !r.is_unit(*v) {
                return Ok((false, format!("non-unit coefficient at {e:?} in {sys:?}")));
            }
            if fingerprint(3, *e).as_ref() != Some(&(*fam, sys.clone())) {
                return Ok((false, format!("fingerprint of {e:?} does not recover {sys:?}")));
            }
            monomials += 1;
        }
    }
    let disjoint = supports_disjoint(&gens);
    Ok((disjoint, format!("{} generators, {monomials} monomials below degree 14, supports disjoint: {disjoint}", gens.len())))
}

fn check_strata_lines(seed: u64) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [3u64, 5] {
        let rep = check_strata(WittRing::auto(p, 2)?, 100, seed)?;
        ok &= rep.passed();
        notes.push(format!("p={p}: {} lines, multiplicity two {}, {} random directions off the locus {}", rep.line_count, rep.all_multiplicity_two, rep.random_directions_tested, rep.random_directions_ok));
    }
    Ok((ok, notes.join("; ")))
}

#[derive(Default)]
struct DecayTally {
    agree: usize,
    disagree: usize,
    inconclusive: usize,
    max_t: usize,
}

fn decay_one(recipe: &CurveRecipe, f: WittRing, omega: &SpecialEndo, supersingular: bool, tally: &mut DecayTally) -> Result<Option<String>> {
    const T_CAP: usize = 4000;
    let mut t = 60usize;
    loop {
        let curve = recipe.build(f, t)?;
        let pb = Pullbacks::new(&curve);
        let prof = profile_from(&pb, &curve, omega);
        let preds: Vec<Predicted> = (1..=3).map(|n| predicted_multiplicity(&prof, n)).collect();
        let need = preds.iter().filter_map(|p| if let Predicted::Finite(v) = p { Some(*v as usize + 2) } else { None }).max().unwrap_or(0);
        // raise T until every finite prediction is visible
        if (need > t || (prof.lower_bound_only && !supersingular)) && t < T_CAP {
            t = need.max(2 * t).min(T_CAP);
            continue;
        }
        tally.max_t = tally.max_t.max(t);
        for (n, pred) in (1..=3u32).zip(&preds) {
            match compare(*pred, pb.defo(n, omega).t_valuation()) {
                Agreement::Agree => tally.agree += 1,
                Agreement::Inconclusive => tally.inconclusive += 1,
                Agreement::Disagree => {
                    tally.disagree += 1;
                    return Ok(Some(format!("p={} ω={omega} n={n}: predicted {pred:?}, stratum {:?}", f.p(), prof.stratum)));
                }
            }
        }
        return Ok(None);
    }
}

fn check_decay(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = DecayTally::default();
    let mut first_bad = None;
    let mut per_stratum = [0usize; 3];
    let mut rotated = (0usize, 0usize);
    for (p, count) in [(3u64, 30usize), (5, 10)] {
        let f = WittRing::auto(p, 1)?;
        for (s, stratum) in [Stratum::Supersingular, Stratum::AlmostOrdinary, Stratum::Ordinary].into_iter().enumerate() {
            for i in 0..count {
                let case_two = i % 3 == 0;
                let recipe = match stratum {
                    Stratum::Supersingular => random_supersingular(&mut rng, f),
                    Stratum::AlmostOrdinary => random_almost_ordinary(&mut rng, f, case_two, 60)?,
                    Stratum::Ordinary => {
                        let r = random_almost_ordinary(&mut rng, f, case_two, 60)?;
                        let b = r.a + rng.gen_range(1..8);
                        with_ordinary_shift(&r, b, random_unit(&mut rng, f))
                    }
                };
                let omega = random_endo(&mut rng, p as i64 - 1);
                if let Some(msg) = decay_one(&recipe, f, &omega, stratum == Stratum::Supersingular, &mut tally)? {
                    first_bad.get_or_insert(msg);
                }
                per_stratum[s] += 1;
                // lifting degrees along the rotated basis of case II
                if stratum == Stratum::AlmostOrdinary && case_two {
                    let probe = recipe.build(f, 60)?;
                    let a = Pullbacks::new(&probe).alpha0(1).t_valuation().bound();
                    let n_max = if a_n(a, p, 2) < 4000 { 2 } else { 1 };
                    let t = a_n(a, p, n_max as i64) as usize + 3;
                    let rep = decay_classify(&recipe.build(f, t)?, n_max)?;
                    if !matches!(rep.case, CurveCase::SupersingularII { .. }) {
                        return Ok((false, format!("forced case II curve classified as {:?}", rep.case)));
                    }
                    for c in &rep.checks {
                        match c.agreement {
                            Agreement::Disagree => {
                                rotated.1 += 1;
                                first_bad.get_or_insert(format!("case II basis vector {} at k={}: {:?} vs {:?}", c.basis_index, c.k, c.computed, c.predicted));
                            }
                            Agreement::Agree => rotated.0 += 1,
                            Agreement::Inconclusive => {}
                        }
                    }
                }
            }
        }
    }
    let total = tally.agree + tally.disagree + tally.inconclusive;
    let ok = tally.disagree == 0 && rotated.1 == 0 && rotated.0 > 0 && tally.agree * 10 >= total * 9;
    let mut detail = format!(
        "{} curves (ss/ao/ord {:?}), {} agree, {} disagree, {} inconclusive, case II basis checks {} agree {} disagree, max T {}",
        per_stratum.iter().sum::<usize>(),
        per_stratum,
        tally.agree,
        tally.disagree,
        tally.inconclusive,
        rotated.0,
        rotated.1,
        tally.max_t
    );
    if let Some(b) = first_bad {
        detail.push_str(&format!("; first disagreement: {b}"));
    }
    Ok((ok, detail))
}

fn check_bump(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = check_induction(&mut rng, WittRing::auto(3, 1)?, 500, 12);
    Ok((rep.passed(), format!("{} sequences, premise hits {:?}, violations {:?}", rep.sequences, rep.premise_hits, rep.violations)))
}

fn check_witness() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    for (p, omega) in [(3u64, SpecialEndo::basis(3)), (3, SpecialEndo::basis(4)), (5, SpecialEndo::basis(3))] {
        let f = WittRing::auto(p, 1)?;
        let w = witness_curve(p, &omega, f.one(), None, 0)?;
        let good = w.b == w.a + p * (p - 1) * w.d
            && w.d1 == Valuation::Exact(w.d)
            && w.d2 == Valuation::AtLeast(w.tprec as u64)
            && w.tprec as u64 >= 3 * (w.a + w.d * p * p);
        ok &= good;
        notes.push(format!("p={p} ω={omega}: A={} B={} d={} D₂ {:?}", w.a, w.b, w.d, w.d2));
    }
    Ok((ok, notes.join("; ")))
}

fn random_form<R: Rng>(rng: &mut R) -> QuadLattice {
    loop {
        let mut u = vec![vec![0i64; 5]; 5];
        for (i, row) in u.iter_mut().enumerate() {
            for (j, c) in row.iter_mut().enumerate().skip(i) {
                *c = rng.gen_range(-3..=3);
                if i == j && *c == 0 {
                    *c = 1;
                }
            }
        }
        if let Ok(l) = QuadLattice::new(u) {
            return l;
        }
    }
}

fn check_hanke(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut compared = 0;
    for p in [3u64, 5] {
        let qp = QuadLattice::new(q_prime_upper(p as i64, crate::witt::least_nonresidue(p) as i64))?;
        let mut forms = vec![qp.clone()];
        forms.extend((0..10).map(|_| random_form(&mut rng)));
        for (k, lat) in forms.iter().enumerate() {
            for m in (1..25i64).filter(|m| m % p as i64 != 0) {
                let h = local_density_hanke(lat, p, m)?;
                let lim = stabilized_density(lat, p, m, DEFAULT_BUDGET)?.density;
                if h != lim {
                    return Ok((false, format!("p={p} form {k} m={m}: Hanke {h} vs limit {lim}")));
                }
                if k == 0 {
                    let pf = p as i128;
                    let want = match kronecker(m, p as i64) {
                        1 => num_rational::Ratio::new(pf - 1, pf),
                        _ => num_rational::Ratio::new(pf + 1, pf),
                    };
                    if h != want {
                        return Ok((false, format!("Q′ at p={p}, m={m}: δ = {h}, expected {want}")));
                    }
                }
                compared += 1;
            }
        }
    }
    Ok((true, format!("{compared} (p, form, m) densities equal; Q′ gives 1∓1/p")))
}

fn check_eisenstein() -> Verdict {
    let amb = QuadLattice::ambient();
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    for m in 1..=2000u64 {
        let q = eisenstein_coeff(&amb, m, 1e-6)?;
        if !(q.value < 0.0) {
            return Ok((false, format!("q_L({m}) = {} is not negative", q.value)));
        }
        let r = q.value.abs() / (m as f64).powf(1.5);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((hi / lo < 50.0, format!("q_L(m) < 0 for m ≤ 2000, |q_L|/m^1.5 in [{lo:.3}, {hi:.3}], ratio {:.3}", hi / lo)))
}

/// Supersingular case I curve `(a, b, c) = (1, 3, 2)`, `β = 1` at `p = 3`.
pub fn key_lemma_curve(t: usize) -> Result<crate::curve::FormalCurve> {
    let f = WittRing::auto(3, 1)?;
    let mut tail = vec![f.one()];
    tail.resize(8, f.zero());
    let r = CurveRecipe { kind: crate::samples::RecipeKind::Cone, a: 1, c: 2, beta: f.one(), line: 0, tails: [tail, vec![f.lambda()]], y_shift: None };
    r.build(f, t)
}

fn check_key_lemma() -> Verdict {
    let curve = key_lemma_curve(80)?;
    let model = LatticeModel::new(QuadLattice::model_p3(), 3, 2)?;
    let ms: Vec<u64> = (1801..=2000).filter(|&m| kronecker(m as i64, 3) == 1).collect();
    let rep = bound_report(&curve, &model, &ms, 1, 1e-8)?;
    let complete = rep.rows.iter().all(|r| r.complete);
    let limit = key_bound(3) + 0.1;
    let ok = complete && rep.top_decile_max < limit && matches!(rep.case, CurveCase::SupersingularI);
    Ok((
        ok,
        format!("{} values of m in (1800, 2000], l_P/g_P mean {:.4} max {:.4} (limit {limit:.2}), complete {complete}", rep.rows.len(), rep.top_decile_mean, rep.top_decile_max),
    ))
}

fn check_shift(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = Crystal::new(WittRing::auto(3, 3)?, 14)?;
    let curve = key_lemma_curve(200)?;
    let pb = Pullbacks::new(&curve);
    for _ in 0..20 {
        let w = random_endo(&mut rng, 8);
        let pw = w.scaled(3);
        for n in 1..=2 {
            if defo_divisor(n, &pw, &c)? != defo_divisor(n + 1, &w, &c)? {
                return Ok((false, format!("symbolic D_{n}(3ω) ≠ D_{}(ω) for ω={w}", n + 1)));
            }
            if pb.defo(n, &pw) != pb.defo(n + 1, &w) {
                return Ok((false, format!("pullback D_{n}(3ω) ≠ D_{}(ω) for ω={w}", n + 1)));
            }
        }
    }
    Ok((true, "20 random ω, n ∈ {1, 2}: equal as series at D=14 and along a curve to t^200".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!(suite_ids("admissible").unwrap(), vec![1, 2, 4]);
        assert_eq!(suite_ids("decay").unwrap(), vec![6]);
        assert_eq!(suite_ids("12").unwrap(), vec![12]);
        assert!(suite_ids("nope").is_err());
        assert_eq!(suite_ids("all").unwrap().len(), CHECKS.len());
    }

    #[test]
    fn quick_checks_pass() {
        for id in [5, 7, 12] {
            let c = run_check(id, 1);
            assert!(c.passed, "{c:?}");
        }
    }
}
