//! Admissible index systems and the block expansion of `F_∞`.
//!
//! A system `(I, J)` is stored as a sequence of atoms: a pair `(i₁, i₂)` of
//! consecutive elements of `I`, or a single element of `J`. Admissibility is
//! the parity rule between the last index of one atom and the first index of
//! the next. Optional lead and trail indices give the 3- and 4-tuples.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::crystal::{Crystal, SpecialEndo};
use crate::error::{Error, Result};
use crate::matrix::SeriesMatrix;
use crate::series::{Exp, TruncatedSeries};
use crate::witt::WittScalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Star {
    Even,
    Odd,
    Void,
}

impl Star {
    pub fn accepts(self, idx: u32) -> bool {
        match self {
            Star::Even => idx % 2 == 0,
            Star::Odd => idx % 2 == 1,
            Star::Void => true,
        }
    }

    pub fn parse(s: &str) -> Result<Star> {
        match s {
            "even" => Ok(Star::Even),
            "odd" => Ok(Star::Odd),
            "void" => Ok(Star::Void),
            _ => Err(Error::Parse(format!("star must be even, odd or void, got {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `(I, J)`
    Core,
    /// `(i, I, J)`
    Lead,
    /// `(I, J, j)`
    Trail,
    /// `(i, I, J, j)`
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Pair(u32, u32),
    Single(u32),
}

impl Atom {
    pub fn first(self) -> u32 {
        match self {
            Atom::Pair(a, _) | Atom::Single(a) => a,
        }
    }
    pub fn last(self) -> u32 {
        match self {
            Atom::Pair(_, b) | Atom::Single(b) => b,
        }
    }
    /// Total degree of `α_{i₁,i₂}` or `β_j`.
    pub fn degree(self, p: u64) -> u64 {
        match self {
            Atom::Pair(a, b) => p.pow(a) + p.pow(b),
            Atom::Single(j) => 2 * p.pow(j),
        }
    }
}

fn differ(a: u32, b: u32) -> bool {
    (a + b) % 2 == 1
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSystem {
    pub lead: Option<u32>,
    pub i_set: Vec<u32>,
    pub j_set: Vec<u32>,
    pub trail: Option<u32>,
}

impl IndexSystem {
    pub fn new(lead: Option<u32>, i_set: &[u32], j_set: &[u32], trail: Option<u32>) -> Self {
        IndexSystem { lead, i_set: i_set.to_vec(), j_set: j_set.to_vec(), trail }
    }

    pub fn from_atoms(lead: Option<u32>, atoms: &[Atom], trail: Option<u32>) -> Self {
        let mut s = IndexSystem { lead, trail, ..Default::default() };
        for a in atoms {
            match *a {
                Atom::Pair(x, y) => s.i_set.extend([x, y]),
                Atom::Single(j) => s.j_set.push(j),
            }
        }
        s
    }

    pub fn kind(&self) -> Kind {
        match (self.lead.is_some(), self.trail.is_some()) {
            (false, false) => Kind::Core,
            (true, false) => Kind::Lead,
            (false, true) => Kind::Trail,
            (true, true) => Kind::Both,
        }
    }

    /// Block decomposition of `I ∪ J` into atoms, or `None` when `I` and `J`
    /// are not strictly increasing, overlap, or an `I`-block has odd size.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        let inc = |v: &[u32]| v.windows(2).all(|w| w[0] < w[1]);
        if !inc(&self.i_set) || !inc(&self.j_set) {
            return None;
        }
        let mut merged: Vec<(u32, bool)> = self.i_set.iter().map(|&i| (i, true)).collect();
        merged.extend(self.j_set.iter().map(|&j| (j, false)));
        merged.sort();
        if merged.windows(2).any(|w| w[0].0 == w[1].0) {
            return None;
        }
        let mut atoms = Vec::new();
        let mut k = 0;
        while k < merged.len() {
            let (idx, in_i) = merged[k];
            if in_i {
                match merged.get(k + 1) {
                    Some(&(next, true)) => {
                        atoms.push(Atom::Pair(idx, next));
                        k += 2;
                    }
                    _ => return None,
                }
            } else {
                atoms.push(Atom::Single(idx));
                k += 1;
            }
        }
        Some(atoms)
    }

    pub fn is_admissible(&self) -> bool {
        let Some(atoms) = self.atoms() else { return false };
        if atoms.windows(2).any(|w| !differ(w[0].last(), w[1].first())) {
            return false;
        }
        match (atoms.first(), atoms.last()) {
            (Some(f), Some(l)) => {
                if let Some(i) = self.lead {
                    if !(i < f.first() && differ(i, f.first())) {
                        return false;
                    }
                }
                if let Some(j) = self.trail {
                    if !(j > l.last() && differ(j, l.last())) {
                        return false;
                    }
                }
                true
            }
            _ => match (self.lead, self.trail) {
                (Some(i), Some(j)) => i < j && differ(i, j),
                _ => true,
            },
        }
    }

    /// `#J + #I/2`, plus one for a trail.
    pub fn length(&self) -> u32 {
        (self.j_set.len() + self.i_set.len() / 2) as u32 + self.trail.is_some() as u32
    }

    /// Total degree of the associated monomial term.
    pub fn degree(&self, p: u64) -> u64 {
        let mut d: u64 = self.i_set.iter().map(|&i| p.pow(i)).sum::<u64>() + self.j_set.iter().map(|&j| 2 * p.pow(j)).sum::<u64>();
        d += self.lead.map_or(0, |i| p.pow(i));
        d += self.trail.map_or(0, |j| p.pow(j));
        d
    }

    fn all_indices(&self) -> impl Iterator<Item = u32> + '_ {
        self.lead.iter().chain(&self.i_set).chain(&self.j_set).chain(self.trail.iter()).copied()
    }

    pub fn min_index(&self) -> Option<u32> {
        self.all_indices().min()
    }
    pub fn max_index(&self) -> Option<u32> {
        self.all_indices().max()
    }
}

/// Largest index `i` with `p^i · unit < bound`.
pub fn max_index_below(p: u64, bound: u64) -> u32 {
    let mut i = 0;
    while p.pow(i + 1) < bound {
        i += 1;
    }
    i
}

/// Depth-first walk over admissible atom sequences with indices `≤ max_index`.
///
/// `extend` maps a state and a candidate next atom to the child state, or
/// `None` to prune that branch; `visit` sees every node including the root.
pub fn walk_cores<S>(
    max_index: u32,
    root: S,
    extend: &mut dyn FnMut(&S, Atom) -> Option<S>,
    visit: &mut dyn FnMut(&[Atom], &S),
) {
    let mut path = Vec::new();
    walk_rec(max_index, &root, &mut path, extend, visit);
}

fn walk_rec<S>(
    max_index: u32,
    state: &S,
    path: &mut Vec<Atom>,
    extend: &mut dyn FnMut(&S, Atom) -> Option<S>,
    visit: &mut dyn FnMut(&[Atom], &S),
) {
    visit(path, state);
    let (lo, last) = match path.last() {
        Some(a) => (a.last() + 1, Some(a.last())),
        None => (0, None),
    };
    for first in lo..=max_index {
        if let Some(l) = last {
            if !differ(l, first) {
                continue;
            }
        }
        let mut candidates = vec![Atom::Single(first)];
        candidates.extend((first + 1..=max_index).map(|second| Atom::Pair(first, second)));
        for a in candidates {
            if let Some(child) = extend(state, a) {
                path.push(a);
                walk_rec(max_index, &child, path, extend, visit);
                path.pop();
            }
        }
    }
}

/// Lead indices allowed in front of a core.
pub fn lead_choices(atoms: &[Atom], max_index: u32) -> Vec<u32> {
    match atoms.first() {
        Some(f) => (0..f.first()).filter(|&i| differ(i, f.first())).collect(),
        None => (0..=max_index).collect(),
    }
}

/// Trail indices allowed after a core.
pub fn trail_choices(atoms: &[Atom], max_index: u32) -> Vec<u32> {
    match atoms.last() {
        Some(l) => (l.last() + 1..=max_index).filter(|&j| differ(j, l.last())).collect(),
        None => (0..=max_index).collect(),
    }
}

/// All admissible systems of a kind and length whose degree is `< bound`,
/// ordered by maximal index and then lexicographically.
pub fn enumerate_systems(p: u64, length: u32, star: Star, kind: Kind, bound: u64) -> Vec<IndexSystem> {
    let mi = max_index_below(p, bound);
    let mut out = Vec::new();
    let core_target = match kind {
        Kind::Core | Kind::Lead => length,
        Kind::Trail | Kind::Both => match length.checked_sub(1) {
            Some(l) => l,
            None => return out,
        },
    };
    walk_cores(
        mi,
        (0u64, 0u32),
        &mut |&(d, l), a| {
            let nd = d + a.degree(p);
            (nd < bound && l < core_target).then_some((nd, l + 1))
        },
        &mut |atoms, &(d, l)| {
            if l != core_target {
                return;
            }
            let leads: Vec<Option<u32>> = match kind {
                Kind::Lead | Kind::Both => lead_choices(atoms, mi).into_iter().map(Some).collect(),
                _ => vec![None],
            };
            for lead in leads {
                let dl = d + lead.map_or(0, |i| p.pow(i));
                if dl >= bound {
                    continue;
                }
                let trails: Vec<Option<u32>> = match kind {
                    Kind::Trail | Kind::Both => trail_choices(atoms, mi).into_iter().map(Some).collect(),
                    _ => vec![None],
                };
                for trail in trails {
                    if let (Some(i), Some(j), true) = (lead, trail, atoms.is_empty()) {
                        if !(i < j && differ(i, j)) {
                            continue;
                        }
                    }
                    if dl + trail.map_or(0, |j| p.pow(j)) >= bound {
                        continue;
                    }
                    let sys = IndexSystem::from_atoms(lead, atoms, trail);
                    if sys.min_index().map_or(star == Star::Void, |m| star.accepts(m)) {
                        out.push(sys);
                    }
                }
            }
        },
    );
    out.sort_by_key(|s| (s.max_index(), s.clone()));
    out
}

fn neg2_pow(c: &Crystal, k: u32) -> WittScalar {
    let r = c.ring();
    r.pow(r.int(-2), k as u64)
}

/// `α_I β_J` for a list of atoms.
pub fn atom_product(c: &Crystal, atoms: &[Atom]) -> TruncatedSeries {
    let mut acc = c.one();
    for a in atoms {
        acc = acc.mul(&atom_series(c, *a));
    }
    acc
}

pub fn atom_series(c: &Crystal, a: Atom) -> TruncatedSeries {
    match a {
        Atom::Pair(i, j) => c.alpha(i, j),
        Atom::Single(j) => c.beta(j),
    }
}

fn const_col(c: &Crystal, v: [WittScalar; 2]) -> [TruncatedSeries; 2] {
    v.map(|s| c.constant(s))
}

/// The product `A^{(·)}` computed directly from the `B`, `C`, `E` blocks.
pub fn a_product(sys: &IndexSystem, c: &Crystal) -> Result<SeriesMatrix> {
    if !sys.is_admissible() {
        return Err(Error::Inadmissible(format!("{sys:?}")));
    }
    let atoms = sys.atoms().expect("checked");
    let mut a = SeriesMatrix::identity(c.ring(), c.bound(), 2);
    for atom in atoms {
        let m = match atom {
            Atom::Pair(i, j) => c.c_block(i).mul(&c.b_block(j)),
            Atom::Single(j) => c.e_block(j),
        };
        a = a.mul(&m);
    }
    if let Some(i) = sys.lead {
        a = c.b_block(i).mul(&a);
    }
    if let Some(j) = sys.trail {
        a = a.mul(&c.c_block(j));
    }
    Ok(a)
}

/// The closed form of `A^{(·)}` for any kind of nonempty system:
/// `(−2)^{|·|−1} α_I β_J D_{min,max}` for `(I, J)` and the analogous
/// rank-one expressions for the lead/trail kinds.
pub fn closed_form(sys: &IndexSystem, c: &Crystal) -> Result<SeriesMatrix> {
    if !sys.is_admissible() {
        return Err(Error::Inadmissible(format!("{sys:?}")));
    }
    let atoms = sys.atoms().expect("checked");
    let ab = atom_product(c, &atoms);
    closed_form_with(sys, &atoms, &ab, c)
}

fn closed_form_with(sys: &IndexSystem, atoms: &[Atom], ab: &TruncatedSeries, c: &Crystal) -> Result<SeriesMatrix> {
    let len = sys.length();
    let (mn, mx) = (sys.min_index(), sys.max_index());
    match sys.kind() {
        Kind::Core => {
            if atoms.is_empty() {
                return Err(Error::Precondition("closed form of the empty system".into()));
            }
            let (mn, mx) = (mn.unwrap(), mx.unwrap());
            Ok(c.d_matrix(mn, mx).scale_series(ab).scale(neg2_pow(c, len - 1)))
        }
        Kind::Trail => {
            let j = sys.trail.unwrap();
            let u = const_col(c, c.u_col(mn.unwrap()));
            let row: Vec<TruncatedSeries> = c.xyz_row(j).iter().map(|s| s.mul(ab)).collect();
            Ok(SeriesMatrix::outer(&u, &row).scale(neg2_pow(c, len - 1)))
        }
        Kind::Lead => {
            let i = sys.lead.unwrap();
            let w = const_col(c, c.w_row(mx.unwrap()));
            let col: Vec<TruncatedSeries> = c.v_col(i).iter().map(|s| s.mul(ab)).collect();
            Ok(SeriesMatrix::outer(&col, &w).scale(neg2_pow(c, len)))
        }
        Kind::Both => {
            let (i, j) = (sys.lead.unwrap(), sys.trail.unwrap());
            let col: Vec<TruncatedSeries> = c.v_col(i).iter().map(|s| s.mul(ab)).collect();
            Ok(SeriesMatrix::outer(&col, &c.xyz_row(j)).scale(neg2_pow(c, len)))
        }
    }
}

/// `(−2)^{|(I,J)|−1} α_I β_J D_{min,max}`.
pub fn closed_form_a(i_set: &[u32], j_set: &[u32], c: &Crystal) -> Result<SeriesMatrix> {
    closed_form(&IndexSystem::new(None, i_set, j_set, None), c)
}

/// `F_{n,⋆}` for `n = 0..=max_len`, assembled from closed forms:
/// `F_n = 2^{−n} [[X_n, Y_n], [Z_n, W_n]]`.
pub fn f_blocks_upto(max_len: u32, star: Star, c: &Crystal) -> Vec<SeriesMatrix> {
    let p = c.p();
    let bound = c.bound() as u64;
    let mi = max_index_below(p, bound);
    let zero5 = SeriesMatrix::zeros(c.ring(), c.bound(), 5, 5);
    let mut blocks = vec![zero5; max_len as usize + 1];
    walk_cores(
        mi,
        (0u64, 0u32, c.one()),
        &mut |(d, l, ab), a| {
            let nd = d + a.degree(p);
            (nd < bound && *l < max_len).then(|| (nd, l + 1, ab.mul(&atom_series(c, a))))
        },
        &mut |atoms, (d, l, ab)| {
            let (d, l) = (*d, *l);
            let mut add = |sys: IndexSystem, r0: usize, c0: usize| {
                let len = sys.length();
                if len > max_len || !sys.min_index().map_or(star == Star::Void, |m| star.accepts(m)) {
                    return;
                }
                if sys.degree(p) >= bound {
                    return;
                }
                let m = closed_form_with(&sys, atoms, ab, c).expect("admissible by construction");
                let b = &mut blocks[len as usize];
                for i in 0..m.rows() {
                    for j in 0..m.cols() {
                        let v = b.get(r0 + i, c0 + j).add(m.get(i, j));
                        b.set(r0 + i, c0 + j, v);
                    }
                }
            };
            if !atoms.is_empty() {
                add(IndexSystem::from_atoms(None, atoms, None), 0, 0);
            }
            let leads = lead_choices(atoms, mi);
            let trails = trail_choices(atoms, mi);
            for &j in &trails {
                if d + p.pow(j) < bound {
                    add(IndexSystem::from_atoms(None, atoms, Some(j)), 0, 2);
                }
            }
            for &i in &leads {
                if d + p.pow(i) >= bound {
                    continue;
                }
                add(IndexSystem::from_atoms(Some(i), atoms, None), 2, 0);
                for &j in &trails {
                    if atoms.is_empty() && !(i < j && differ(i, j)) {
                        continue;
                    }
                    add(IndexSystem::from_atoms(Some(i), atoms, Some(j)), 2, 2);
                }
            }
            let _ = l;
        },
    );
    let r = c.ring();
    let half = c.half();
    for (n, b) in blocks.iter_mut().enumerate() {
        if n == 0 {
            let mut id = b.clone();
            for k in 0..5 {
                id.set(k, k, id.get(k, k).add(&c.one()));
            }
            *b = id;
        } else {
            *b = b.scale(r.pow(half, n as u64));
        }
    }
    blocks
}

pub fn f_block(n: u32, star: Star, c: &Crystal) -> SeriesMatrix {
    f_blocks_upto(n, star, c).pop().expect("nonempty")
}

/// Longest system length that can occur below the degree bound.
pub fn max_system_length(c: &Crystal) -> u32 {
    max_index_below(c.p(), c.bound() as u64) + 2
}

/// `G^i_{n,⋆}(ω) = Σ_j Σ_k a_{j,k} (F_{n+k,⋆})_{i,j}` for `i = 1..5`.
pub fn g_series(n: u32, star: Star, omega: &SpecialEndo, c: &Crystal) -> Result<[TruncatedSeries; 5]> {
    if n == 0 {
        return Err(Error::Precondition("g_series needs n ≥ 1".into()));
    }
    let lmax = max_system_length(c).max(n);
    let blocks = f_blocks_upto(lmax, star, c);
    let count = (lmax - n + 1) as usize;
    let digits = omega.digits(c.p(), count);
    let r = c.ring();
    let mut out: [TruncatedSeries; 5] = std::array::from_fn(|_| c.zero());
    for k in 0..count {
        let f = &blocks[n as usize + k];
        for (j, dj) in digits.iter().enumerate() {
            let d = dj[k];
            if d == 0 {
                continue;
            }
            let t = r.teichmuller(d);
            for (i, o) in out.iter_mut().enumerate() {
                let e = f.get(i, j);
                if !e.is_zero() {
                    *o = o.add(&e.scale(t));
                }
            }
        }
    }
    for o in &out {
        o.check_precision("g_series")?;
    }
    Ok(out)
}

/// The same five series through the recursion driven by `G¹_{m,even}(ω)`.
pub fn g_series_recursive(n: u32, star: Star, omega: &SpecialEndo, m: u32, c: &Crystal) -> Result<[TruncatedSeries; 5]> {
    if m == 0 || m > n {
        return Err(Error::Precondition(format!("recursion needs 1 ≤ m ≤ n, got m={m}, n={n}")));
    }
    let r = c.ring();
    let p = c.p();
    let g = g_series(m, Star::Even, omega, c)?[0].clone();
    let twist = |s: u32| g.sigma_pow(s);
    let lam = r.lambda();
    let mut out: [TruncatedSeries; 5] = std::array::from_fn(|_| c.zero());
    let diff = n - m;
    let sgn = |k: u32| r.int(if k % 2 == 0 { 1 } else { -1 });
    if diff == 0 {
        let (g0, g1) = (g.clone(), twist(1));
        match star {
            Star::Void => {
                out[0] = g0.add(&g1);
                out[1] = g0.scale(lam).sub(&g1.scale(lam));
            }
            Star::Even => {
                out[0] = g0.clone();
                out[1] = g0.scale(lam);
            }
            Star::Odd => {
                out[0] = g1.clone();
                out[1] = g1.scale(r.neg(lam));
            }
        }
    } else {
        for sys in enumerate_systems(p, diff, star, Kind::Core, c.bound() as u64) {
            let atoms = sys.atoms().expect("admissible");
            let (mn, mx) = (sys.min_index().unwrap(), sys.max_index().unwrap());
            let term = atom_product(c, &atoms).mul(&twist(mx + 1)).scale(r.mul(sgn(diff), sgn(mx + 1)));
            out[0] = out[0].add(&term.scale(sgn(mn)));
            out[1] = out[1].add(&term.scale(lam));
        }
    }
    let pref = r.mul(r.mul(r.int(2), lam), sgn(diff + 1));
    for sys in enumerate_systems(p, diff, Star::Void, Kind::Lead, c.bound() as u64) {
        let i = sys.lead.unwrap();
        if !star.accepts(i) {
            continue;
        }
        let atoms = sys.atoms().expect("admissible");
        let mx = sys.max_index().unwrap();
        let term = atom_product(c, &atoms).mul(&twist(mx + 1)).scale(r.mul(pref, sgn(mx + 1)));
        for (k, v) in c.v_col(i).iter().enumerate() {
            out[2 + k] = out[2 + k].add(&term.mul(v));
        }
    }
    Ok(out)
}

/// Which family a generator belongs to: `Λ₀` or `Λ_x`, `Λ_y`, `Λ_z`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Zero,
    X,
    Y,
    Z,
}

/// Generators `α_I β_J` (family `Λ₀`) and `α_I β_J v^{[i]}` for `v = x, y, z`
/// with `(I, J, i)` admissible, below the degree bound.
pub fn lambda_generators(c: &Crystal) -> Vec<(Family, IndexSystem, TruncatedSeries)> {
    let p = c.p();
    let bound = c.bound() as u64;
    let maxlen = max_system_length(c);
    let mut out = Vec::new();
    for len in 0..=maxlen {
        for sys in enumerate_systems(p, len, Star::Void, Kind::Core, bound) {
            let s = atom_product(c, &sys.atoms().unwrap());
            out.push((Family::Zero, sys, s));
        }
        for sys in enumerate_systems(p, len + 1, Star::Void, Kind::Trail, bound) {
            let ab = atom_product(c, &sys.atoms().unwrap());
            let j = sys.trail.unwrap();
            for (fam, v) in [(Family::X, 0), (Family::Y, 1), (Family::Z, 2)] {
                out.push((fam, sys.clone(), ab.mul(&c.var_pow(v, j))));
            }
        }
    }
    out
}

fn base_digits(p: u64, mut v: u32) -> Vec<u32> {
    let mut d = Vec::new();
    while v > 0 {
        d.push(v % p as u32);
        v /= p as u32;
    }
    d
}

/// Recover the generator whose expansion contains the monomial `x^a y^b z^c`
/// from the base-`p` digits of `(a, b, c)`.
pub fn fingerprint(p: u64, e: Exp) -> Option<(Family, IndexSystem)> {
    let (a, b, cc) = (base_digits(p, e[0]), base_digits(p, e[1]), base_digits(p, e[2]));
    let len = a.len().max(b.len()).max(cc.len());
    let dig = |v: &Vec<u32>, k: usize| v.get(k).copied().unwrap_or(0) as i64;
    let csum: i64 = (0..len).map(|k| dig(&cc, k)).sum();
    let abdiff: i64 = (0..len).map(|k| dig(&a, k) - dig(&b, k)).sum();
    let fam = if csum % 2 == 1 {
        Family::Z
    } else {
        match abdiff {
            1 => Family::X,
            0 => Family::Zero,
            -1 => Family::Y,
            _ => return None,
        }
    };
    let total = |k: usize| dig(&a, k) + dig(&b, k) + dig(&cc, k);
    let trail = if fam == Family::Zero { None } else { (0..len).rev().find(|&k| total(k) > 0).map(|k| k as u32) };
    let mut i_set = Vec::new();
    let mut j_set = Vec::new();
    for k in 0..len {
        if Some(k as u32) == trail {
            continue;
        }
        match total(k) {
            0 => {}
            1 => i_set.push(k as u32),
            2 => j_set.push(k as u32),
            _ => return None,
        }
    }
    Some((fam, IndexSystem { lead: None, i_set, j_set, trail }))
}

/// Sets of exponent triples, used by the disjointness check.
pub fn supports_disjoint(gens: &[(Family, IndexSystem, TruncatedSeries)]) -> bool {
    let mut seen: BTreeSet<Exp> = BTreeSet::new();
    for (_, _, s) in gens {
        for e in s.support() {
            if !seen.insert(e) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::WittRing;

    fn crystal(p: u64, n: u32, d: u32) -> Crystal {
        Crystal::new(WittRing::auto(p, n).unwrap(), d).unwrap()
    }

    #[test]
    fn worked_examples() {
        let good = IndexSystem::new(Some(1), &[2, 3, 5, 7, 8, 9], &[4, 10, 13], Some(16));
        assert!(good.is_admissible());
        assert_eq!(good.length(), 7);
        let bad = IndexSystem::new(Some(1), &[2, 3, 5, 6, 8, 9], &[4, 10, 13], None);
        assert!(!bad.is_admissible());
        let empty = IndexSystem::default();
        assert!(empty.is_admissible());
        assert_eq!(empty.length(), 0);
    }

    #[test]
    fn lead_and_trail_rules() {
        assert!(IndexSystem::new(Some(4), &[], &[], None).is_admissible());
        assert!(IndexSystem::new(None, &[], &[], Some(0)).is_admissible());
        assert!(IndexSystem::new(Some(0), &[], &[], Some(3)).is_admissible());
        assert!(!IndexSystem::new(Some(0), &[], &[], Some(2)).is_admissible());
        assert!(!IndexSystem::new(Some(3), &[], &[], Some(0)).is_admissible());
        assert!(!IndexSystem::new(Some(2), &[], &[4], None).is_admissible());
        assert!(IndexSystem::new(Some(2), &[], &[3], None).is_admissible());
        assert!(IndexSystem::new(Some(2), &[], &[3], Some(4)).is_admissible());
        assert!(!IndexSystem::new(None, &[0, 1], &[3], None).is_admissible());
        assert!(IndexSystem::new(None, &[0, 1], &[2], None).is_admissible());
        assert!(IndexSystem::new(None, &[0, 2], &[3], None).is_admissible());
        assert!(!IndexSystem::new(None, &[0], &[2], None).is_admissible());
    }

    #[test]
    fn enumeration_examples() {
        let p = 3;
        let d = 2 * p + 2;
        let sys = enumerate_systems(p, 1, Star::Even, Kind::Core, d);
        assert!(sys.contains(&IndexSystem::new(None, &[0, 1], &[], None)));
        assert!(sys.contains(&IndexSystem::new(None, &[], &[0], None)));
        let zero = enumerate_systems(p, 0, Star::Void, Kind::Core, 50);
        assert_eq!(zero, vec![IndexSystem::default()]);
        let odd = enumerate_systems(p, 1, Star::Odd, Kind::Core, 2 * p + 1);
        assert!(odd.contains(&IndexSystem::new(None, &[], &[1], None)));
        for s in enumerate_systems(p, 2, Star::Void, Kind::Both, 40) {
            assert!(s.is_admissible() && s.length() == 2 && s.degree(p) < 40);
        }
    }

    #[test]
    fn closed_form_examples() {
        let c = crystal(3, 3, 20);
        let a = a_product(&IndexSystem::new(None, &[0, 1], &[], None), &c).unwrap();
        assert_eq!(a, c.d_matrix(0, 1).scale_series(&c.alpha(0, 1)));
        let e = a_product(&IndexSystem::new(None, &[], &[0], None), &c).unwrap();
        assert_eq!(e, c.d_matrix(0, 0).scale_series(&c.beta(0)));
        let id = a_product(&IndexSystem::default(), &c).unwrap();
        assert_eq!(id, SeriesMatrix::identity(c.ring(), 20, 2));
        let two = closed_form_a(&[], &[0, 1], &c).unwrap();
        let want = c.d_matrix(0, 1).scale_series(&c.beta(0).mul(&c.beta(1))).scale(c.ring().int(-2));
        assert_eq!(two, want);
        assert_eq!(two, a_product(&IndexSystem::new(None, &[], &[0, 1], None), &c).unwrap());
        assert!(closed_form_a(&[], &[], &c).is_err());
    }

    #[test]
    fn closed_forms_all_kinds() {
        let c = crystal(3, 3, 14);
        for kind in [Kind::Core, Kind::Lead, Kind::Trail, Kind::Both] {
            for len in 0..4 {
                for sys in enumerate_systems(3, len, Star::Void, kind, 14) {
                    if kind == Kind::Core && len == 0 {
                        continue;
                    }
                    assert_eq!(a_product(&sys, &c).unwrap(), closed_form(&sys, &c).unwrap(), "{sys:?}");
                }
            }
        }
    }

    #[test]
    fn parity_split_of_blocks() {
        let c = crystal(3, 3, 14);
        for n in 1..=3 {
            let e = f_block(n, Star::Even, &c);
            let o = f_block(n, Star::Odd, &c);
            assert_eq!(e.add(&o), f_block(n, Star::Void, &c));
        }
    }

    #[test]
    fn x_even_is_rank_one() {
        let c = crystal(3, 3, 14);
        let f = f_block(1, Star::Even, &c);
        let lam = c.ring().lambda();
        for j in 0..5 {
            assert_eq!(*f.get(1, j), f.get(0, j).scale(lam));
        }
    }

    #[test]
    fn g_series_basics() {
        let c = crystal(3, 3, 14);
        let g = g_series(1, Star::Even, &SpecialEndo::basis(3), &c).unwrap();
        assert_eq!(g[0].min_degree(), Some(1));
        assert!(g[0].terms().contains_key(&[1, 0, 0]));
        assert!(c.ring().is_unit(g[0].coeff(&[1, 0, 0])));
        let z = g_series(2, Star::Odd, &SpecialEndo::new([0; 5]), &c).unwrap();
        assert!(z.iter().all(|s| s.is_zero()));
        let f = f_block(2, Star::Even, &c);
        let g2 = g_series(2, Star::Even, &SpecialEndo::basis(4), &c).unwrap();
        for i in 0..5 {
            assert_eq!(g2[i].truncate(9), f.get(i, 3).truncate(9));
        }
    }

    #[test]
    fn recursion_small() {
        let c = crystal(3, 3, 30);
        let w = SpecialEndo::new([1, 2, 0, 1, 2]);
        for n in 1..=3 {
            for star in [Star::Even, Star::Odd, Star::Void] {
                let direct = g_series(n, star, &w, &c).unwrap();
                let rec = g_series_recursive(n, star, &w, 1, &c).unwrap();
                for k in 0..5 {
                    assert_eq!(direct[k], rec[k], "n={n} star={star:?} entry={k}");
                }
            }
        }
    }

    #[test]
    fn fingerprints_recover_systems() {
        let c = crystal(3, 2, 14);
        for (fam, sys, s) in lambda_generators(&c) {
            for e in s.support() {
                assert_eq!(fingerprint(3, e), Some((fam, sys.clone())), "monomial {e:?}");
            }
        }
    }
}
