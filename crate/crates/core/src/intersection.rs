//! Local intersections `l_P(m)` of a curve with special divisors at a
//! superspecial point, global shares `g_P(m)`, and the comparison of the two.
//!
//! `l_P(m) = Σ_n #{s ∈ L″_n : Q′(s) = m} = Σ_{Q′(s)=m} deg(s)`, where
//! `deg(s)` is the largest `N` such that `s` lifts to `k[[t]]/(t^N)`.
//! Degrees of `p^k b_j` for the case-adapted basis are computed exactly from
//! the pullbacks of `D_{k+1}`; a general vector takes the minimum over its
//! coordinates.

use serde::{Deserialize, Serialize};

use crate::crystal::{q_prime_upper, SpecialEndo};
use crate::curve::{FormalCurve, Position};
use crate::deformation::{a_n, adapted_basis, curve_case, exact_lifting_degree, predicted_lifting_degree, CurveCase, Pullbacks};
use crate::error::{Error, Result};
use crate::qlattice::eisenstein::{eisenstein_coeff, kronecker};
use crate::qlattice::padic::{isometry_odd, mat_inv, Mat, Zmod};
use crate::qlattice::QuadLattice;
use crate::witt::Valuation;

/// A positive definite lattice with a chosen `Z_p`-isometry onto `(Z_p^5, Q′)`.
#[derive(Clone, Debug)]
pub struct LatticeModel {
    lattice: QuadLattice,
    p: u64,
    z: Zmod,
    to_omega: Mat,
}

impl LatticeModel {
    pub fn new(lattice: QuadLattice, p: u64, eps: u64) -> Result<Self> {
        if !lattice.is_positive_definite() || lattice.rank() != 5 {
            return Err(Error::Config("lattice model must be positive definite of rank 5".into()));
        }
        let z = Zmod::new(p, 16);
        let target = QuadLattice::new(q_prime_upper(p as i64, eps as i64))?.gram2();
        let to_omega = isometry_odd(&lattice.gram2(), &target, &z)?
            .ok_or_else(|| Error::Config(format!("lattice model is not isometric to Q′ over Z_{p}")))?;
        Ok(LatticeModel { lattice, p, z, to_omega })
    }

    pub fn lattice(&self) -> &QuadLattice {
        &self.lattice
    }
    pub fn p(&self) -> u64 {
        self.p
    }

    /// Coordinates of `s` in the basis `ω₁..ω₅`, modulo `p^K`.
    pub fn omega_coords(&self, s: &[i64]) -> [i128; 5] {
        std::array::from_fn(|i| self.z.red((0..5).map(|j| self.to_omega[i][j] * s[j] as i128).sum()))
    }
}

/// Exact degrees `deg(p^k b_j)` for `k ≤ n_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeTable {
    pub p: u64,
    pub case: CurveCase,
    pub position: Position,
    pub a: u64,
    pub n_max: u32,
    pub tprec: usize,
    pub basis: Vec<SpecialEndo>,
    /// `table[j][k] = deg(p^k b_j)`.
    pub table: Vec<Vec<Valuation>>,
    /// Closed-form values where one exists.
    pub predicted: Vec<Vec<Option<u64>>>,
    #[serde(skip)]
    from_omega: Option<Mat>,
    #[serde(skip)]
    z: Option<Zmod>,
    #[serde(skip)]
    pb: Option<std::rc::Rc<Pullbacks>>,
    #[serde(skip)]
    cache: std::cell::RefCell<std::collections::HashMap<(u32, [i64; 5]), Valuation>>,
}

impl DegreeTable {
    pub fn compute(curve: &FormalCurve, n_max: u32) -> Result<Self> {
        let f = curve.ring();
        let p = f.p();
        let probe = Pullbacks::new(curve);
        let a_val = probe.alpha0(1).t_valuation();
        if probe.beta0().t_valuation().exact().is_some() {
            return Err(Error::Precondition("the degree table needs a generically almost ordinary curve".into()));
        }
        let a_big = a_val.exact().ok_or_else(|| Error::Precondition("curve lies on the supersingular locus".into()))?;
        let (case, l) = curve_case(curve, a_val)?;
        let (basis, base) = adapted_basis(&case, &l, a_big, f.eps_residue(), p);
        let t = (a_n(a_big, p, n_max as i64) + 3).max(curve.tprec() as u64) as usize;
        if t > 20_000 {
            return Err(Error::budget("degree table", format!("t-precision {t} needed for n_max = {n_max}")));
        }
        let pb = if t > curve.tprec() { Pullbacks::new(&rebuild(curve, t)?) } else { probe };
        let mut table = Vec::new();
        let mut predicted = Vec::new();
        for (j, b) in basis.iter().enumerate() {
            table.push((0..=n_max).map(|k| exact_lifting_degree(&pb, b, k)).collect());
            predicted.push((0..=n_max).map(|k| base[j].map(|d| predicted_lifting_degree(a_big, d, p, k))).collect());
        }
        let z = Zmod::new(p, 16);
        let cols: Mat = (0..5).map(|i| basis.iter().map(|b| b.coords[i] as i128).collect()).collect();
        let from_omega = mat_inv(&z, &cols)?;
        Ok(DegreeTable {
            p,
            case,
            position: curve.position()?,
            a: a_big,
            n_max,
            tprec: pb.tprec(),
            basis: basis.to_vec(),
            table,
            predicted,
            from_omega: Some(from_omega),
            z: Some(z),
            pb: Some(std::rc::Rc::new(pb)),
            cache: Default::default(),
        })
    }

    /// Whether every finite closed-form value matches the computed degree.
    pub fn agrees_with_closed_forms(&self) -> bool {
        self.table.iter().zip(&self.predicted).all(|(row, pred)| row.iter().zip(pred).all(|(v, q)| q.map_or(true, |q| *v == Valuation::Exact(q))))
    }

    /// `deg(s)` from `ω`-coordinates mod `p^K`; the flag is false when the
    /// value is only a lower bound.
    ///
    /// For `s = p^v s′` with `v ≤ n_max` this is `deg_t D_{v+1}(s′)`, which
    /// only reads `s′` mod `p^{v+1}`. Deeper vectors get the lower bound
    /// `min_j deg(p^{n_max} b_j)`.
    pub fn degree(&self, omega: &[i128; 5]) -> (u64, bool) {
        let z = self.z.expect("built by compute");
        let v = omega.iter().map(|&c| z.val(c)).min().expect("rank 5");
        if v > self.n_max {
            let bound = self.table.iter().map(|row| row[self.n_max as usize].bound()).min().expect("rank 5");
            return (bound, false);
        }
        let modulus = (self.p as i128).pow(v + 1);
        let pv = (self.p as i128).pow(v);
        let key: [i64; 5] = std::array::from_fn(|i| ((omega[i] / pv) % modulus) as i64);
        let got = *self.cache.borrow_mut().entry((v, key)).or_insert_with(|| {
            let pb = self.pb.as_ref().expect("built by compute");
            pb.defo(v + 1, &SpecialEndo { coords: key }).t_valuation()
        });
        match got {
            Valuation::Exact(d) => (d, true),
            other => (other.bound(), false),
        }
    }

    /// Lower bound `min_j deg(c_j b_j)` from adapted coordinates.
    pub fn degree_lower_bound(&self, omega: &[i128; 5]) -> u64 {
        let z = self.z.expect("built by compute");
        let c = self.from_omega.as_ref().expect("built by compute");
        c.iter()
            .enumerate()
            .map(|(j, row)| {
                let v = z.val(z.red((0..5).map(|i| z.mul(row[i], omega[i])).sum())).min(self.n_max);
                self.table[j][v as usize].bound()
            })
            .min()
            .expect("rank 5")
    }

    /// `e_j(n) = min{k : deg(p^k b_j) ≥ n}` for `n = 1..=levels`; `None`
    /// where it exceeds `n_max`.
    pub fn filtration(&self, levels: u64) -> Vec<[Option<u32>; 5]> {
        (1..=levels)
            .map(|n| std::array::from_fn(|j| (0..=self.n_max).find(|&k| self.table[j][k as usize].bound() >= n)))
            .collect()
    }
}

fn rebuild(curve: &FormalCurve, t: usize) -> Result<FormalCurve> {
    if t <= curve.tprec() {
        return Ok(curve.with_tprec(t));
    }
    Err(Error::Precondition(format!("curve is only known below t^{}, the degree table needs t^{t}", curve.tprec())))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCount {
    pub m: u64,
    pub value: u64,
    pub vectors: u64,
    pub complete: bool,
}

/// `l_P(m)` for every `m` in `ms`, from one enumeration of the shell.
pub fn local_intersections(model: &LatticeModel, table: &DegreeTable, ms: &[u64]) -> Result<Vec<LocalCount>> {
    if ms.is_empty() {
        return Ok(Vec::new());
    }
    if ms.contains(&0) {
        return Err(Error::Precondition("local intersections are for m ≥ 1".into()));
    }
    let lo = *ms.iter().min().unwrap();
    let hi = *ms.iter().max().unwrap();
    let mut acc: Vec<Option<LocalCount>> = vec![None; (hi - lo + 1) as usize];
    for &m in ms {
        acc[(m - lo) as usize] = Some(LocalCount { m, value: 0, vectors: 0, complete: true });
    }
    // vectors with a unit ω-coordinate have a degree fixed by s mod p
    let p = model.p() as i64;
    let mut by_residue: Vec<Option<Option<(u64, bool)>>> = vec![None; p.pow(5) as usize];
    model.lattice().for_each_in_shell(lo, hi, &mut |s, q| {
        if let Some(c) = acc[(q - lo) as usize].as_mut() {
            let idx = s.iter().rev().fold(0i64, |a, &x| a * p + x.rem_euclid(p)) as usize;
            let fast = *by_residue[idx].get_or_insert_with(|| {
                let r: Vec<i64> = s.iter().map(|x| x.rem_euclid(p)).collect();
                let w = model.omega_coords(&r);
                w.iter().any(|&x| x % p as i128 != 0).then(|| table.degree(&w))
            });
            let (d, exact) = fast.unwrap_or_else(|| table.degree(&model.omega_coords(s)));
            c.value += d;
            c.vectors += 1;
            c.complete &= exact;
        }
    })?;
    Ok(ms.iter().map(|m| acc[(m - lo) as usize].clone().expect("filled")).collect())
}

pub fn local_intersection(model: &LatticeModel, table: &DegreeTable, m: u64) -> Result<LocalCount> {
    Ok(local_intersections(model, table, &[m])?.remove(0))
}

/// `g_P(m) = A/(p² − 1) · |q_L(m)|`.
pub fn global_density(a: u64, p: u64, m: u64, ambient: &QuadLattice, tol: f64) -> Result<f64> {
    let q = eisenstein_coeff(ambient, m, tol)?;
    Ok(a as f64 / (p * p - 1) as f64 * q.value.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub m: u64,
    pub l_p: u64,
    pub g_p: f64,
    pub ratio: f64,
    pub complete: bool,
    pub within_bound: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub p: u64,
    pub a: u64,
    pub case: CurveCase,
    pub position: Position,
    pub n_max: u32,
    pub bound: f64,
    pub rows: Vec<ReportRow>,
    /// Mean and maximum of `l_P/g_P` over the largest tenth of the tested `m`.
    pub top_decile_mean: f64,
    pub top_decile_max: f64,
    /// Least-squares exponent of the positive part of `l_P − bound·g_P`.
    pub slack_exponent: Option<f64>,
    pub closed_forms_agree: bool,
}

/// `(p − 1)²/(p² + 1)`.
pub fn key_bound(p: u64) -> f64 {
    let p = p as f64;
    (p - 1.0) * (p - 1.0) / (p * p + 1.0)
}

pub fn bound_report(curve: &FormalCurve, model: &LatticeModel, ms: &[u64], n_max: u32, tol: f64) -> Result<IntersectionReport> {
    let p = model.p();
    if curve.ring().p() != p {
        return Err(Error::Config("curve and lattice model use different primes".into()));
    }
    for &m in ms {
        if kronecker(m as i64, p as i64) != 1 {
            return Err(Error::Precondition(format!("m = {m} is not a nonzero square mod p")));
        }
    }
    let table = DegreeTable::compute(curve, n_max)?;
    let locals = local_intersections(model, &table, ms)?;
    let ambient = QuadLattice::ambient();
    let bound = key_bound(p);
    let mut rows = Vec::new();
    for lc in locals {
        let g = global_density(table.a, p, lc.m, &ambient, tol)?;
        let ratio = lc.value as f64 / g;
        rows.push(ReportRow { m: lc.m, l_p: lc.value, g_p: g, ratio, complete: lc.complete, within_bound: lc.complete.then_some(ratio <= bound) });
    }
    let mut sorted: Vec<&ReportRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.m);
    let top = &sorted[sorted.len() - (sorted.len() / 10).max(1)..];
    let top_decile_mean = top.iter().map(|r| r.ratio).sum::<f64>() / top.len() as f64;
    let top_decile_max = top.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            let s = r.l_p as f64 - bound * r.g_p;
            (s > 0.0).then(|| ((r.m as f64).ln(), s.ln()))
        })
        .collect();
    let slack_exponent = (pts.len() >= 2).then(|| {
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let cov: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let var: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        cov / var
    });
    Ok(IntersectionReport {
        p,
        a: table.a,
        case: table.case,
        position: table.position,
        n_max,
        bound,
        rows,
        top_decile_mean,
        top_decile_max,
        slack_exponent,
        closed_forms_agree: table.agrees_with_closed_forms(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples::{CurveRecipe, RecipeKind};
    use crate::witt::{WittRing, WittScalar};

    fn case_one_curve(t: usize) -> FormalCurve {
        let f = WittRing::auto(3, 1).unwrap();
        let mut r = CurveRecipe { kind: RecipeKind::Cone, a: 1, c: 2, beta: f.one(), line: 0, tails: [vec![f.one()], vec![f.lambda()]], y_shift: None };
        r.tails[0].resize(8, WittScalar::ZERO);
        r.build(f, t).unwrap()
    }

    #[test]
    fn model_coordinates_preserve_the_form() {
        let model = LatticeModel::new(QuadLattice::model_p3(), 3, 2).unwrap();
        let qp = QuadLattice::new(q_prime_upper(3, 2)).unwrap();
        let z = Zmod::new(3, 12);
        for s in [[1i64, 0, 0, 0, 0], [0, 1, 2, -1, 3], [2, -1, 1, 1, 0]] {
            let w = model.omega_coords(&s);
            let w64: Vec<i64> = w.iter().map(|&c| c as i64).collect();
            assert_eq!(z.red(qp.value(&w64)), z.red(model.lattice().value(&s)));
        }
    }

    #[test]
    fn table_case_one() {
        let table = DegreeTable::compute(&case_one_curve(80), 1).unwrap();
        assert_eq!(table.case, CurveCase::SupersingularI);
        assert_eq!(table.a, 6);
        assert!(table.agrees_with_closed_forms(), "{:?}", table.table);
        // levels 1..=min(a, b) are the full lattice
        assert!(table.filtration(1).iter().all(|e| e.iter().all(|&x| x == Some(0))));
    }

    #[test]
    fn brute_force_local_count() {
        let model = LatticeModel::new(QuadLattice::model_p3(), 3, 2).unwrap();
        let table = DegreeTable::compute(&case_one_curve(80), 1).unwrap();
        for m in [1u64, 4, 7, 10] {
            let lc = local_intersection(&model, &table, m).unwrap();
            let mut brute = 0;
            let b = 4i64;
            for v in 0..(2 * b + 1).pow(5) {
                let s: Vec<i64> = (0..5).map(|k| (v / (2 * b + 1).pow(k)) % (2 * b + 1) - b).collect();
                if model.lattice().value(&s) == m as i128 {
                    brute += table.degree(&model.omega_coords(&s)).0;
                }
            }
            assert_eq!(lc.value, brute);
            for s in [[1i64, 0, 0, 0, 0], [0, 1, 1, 0, 0]] {
                let w = model.omega_coords(&s);
                assert!(table.degree(&w).0 >= table.degree_lower_bound(&w));
            }
            assert!(lc.complete);
            // with (m/3) = 1 every vector has degree min(a, b) = 1
            assert_eq!(lc.value, lc.vectors);
        }
    }

    #[test]
    fn degree_reads_only_leading_digits() {
        let table = DegreeTable::compute(&case_one_curve(80), 1).unwrap();
        let z = Zmod::new(3, 16);
        for w in [[1i128, 2, 0, 1, 1], [0, 0, 1, 2, 0], [2, 1, 1, 1, 2]] {
            let (d0, _) = table.degree(&w);
            let shifted: [i128; 5] = std::array::from_fn(|i| z.red(w[i] + 3 * (i as i128 + 1)));
            let pb = table.pb.as_ref().unwrap();
            let key: [i64; 5] = std::array::from_fn(|i| shifted[i] as i64 % 81);
            assert_eq!(pb.defo(1, &SpecialEndo { coords: key }).t_valuation(), Valuation::Exact(d0));
            // p·w sits one level down
            let pw: [i128; 5] = std::array::from_fn(|i| z.red(3 * w[i]));
            let direct = pb.defo(2, &SpecialEndo { coords: w.map(|c| c as i64) }).t_valuation();
            assert_eq!(table.degree(&pw), (direct.bound(), direct.exact().is_some()));
        }
    }

    #[test]
    fn filtration_beta_one() {
        let f = WittRing::auto(3, 1).unwrap();
        let curve = FormalCurve::normal_form(f, 1, 1, 1, f.one(), [&[], &[], &[]], 60).unwrap();
        let table = DegreeTable::compute(&curve, 1).unwrap();
        assert!(matches!(table.case, CurveCase::SpecialNonSupersingular { .. }));
        let e = table.filtration(4);
        assert_eq!(e[0], [Some(0); 5]);
        // ω₃, ω₅ stop at t¹ while η = ω₃ + ω₄ keeps lifting along this line
        for level in &e[1..4] {
            assert_eq!(*level, [Some(0), Some(0), Some(1), Some(0), Some(1)]);
        }
        let index: u32 = e[1].iter().map(|x| x.unwrap()).sum();
        assert!(index >= 2);
    }

    #[test]
    fn bound_linear_in_a() {
        let amb = QuadLattice::ambient();
        let g1 = global_density(4, 3, 10, &amb, 1e-8).unwrap();
        let g2 = global_density(8, 3, 10, &amb, 1e-8).unwrap();
        assert!((g2 - 2.0 * g1).abs() < 1e-9 * g2);
        assert!((key_bound(3) - 0.4).abs() < 1e-15);
    }
}
