//! Monoid homomorphisms and the integrality, exactness and locality tests.
//!
//! Integrality follows Kato's equational criterion: whenever
//! `h(a1) + b1 = h(a2) + b2` there are `a3, a4` in `Q` and `b` in `P` with
//! `a1 + a3 = a2 + a4`, `b1 = h(a3) + b` and `b2 = h(a4) + b`. Writing
//! `delta = a1 - a2`, this is the existence of `a3` in `Q` with
//! `a3 + delta` in `Q` and `b1 - h(a3)` in `P`.
//!
//! The decision procedure enumerates the minimal nonnegative solutions of the
//! equation in generator coefficients. A sum of two quadruples that satisfy
//! the criterion satisfies it with the summed witnesses, so checking the
//! minimal solutions decides integrality exactly.

use std::collections::{BTreeSet, HashMap, HashSet};

use num::bigint::BigInt;
use num::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, IntVector, Sublattice};
use crate::monoids::FineMonoid;
use crate::polyhedra::Cone;

/// A homomorphism of fine monoids induced by a lattice map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidHom {
    source: FineMonoid,
    target: FineMonoid,
    matrix: IntMatrix,
}

impl MonoidHom {
    /// `matrix` is `target.rank x source.rank` and must send every source
    /// generator into the target.
    pub fn new(source: FineMonoid, target: FineMonoid, matrix: IntMatrix) -> Result<MonoidHom> {
        if matrix.cols() != source.rank() || matrix.rows() != target.rank() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix from rank {} to rank {}",
                matrix.rows(),
                matrix.cols(),
                source.rank(),
                target.rank()
            )));
        }
        for g in source.generators() {
            let img = matrix.apply(g)?;
            if !target.contains(&img) {
                return Err(Error::NotAHomomorphism(g.to_string()));
            }
        }
        Ok(MonoidHom { source, target, matrix })
    }

    pub fn identity(m: &FineMonoid) -> MonoidHom {
        MonoidHom { source: m.clone(), target: m.clone(), matrix: IntMatrix::identity(m.rank()) }
    }

    pub fn source(&self) -> &FineMonoid {
        &self.source
    }

    pub fn target(&self) -> &FineMonoid {
        &self.target
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn apply(&self, v: &IntVector) -> IntVector {
        self.matrix.apply(v).expect("vector in source lattice")
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &MonoidHom) -> Result<MonoidHom> {
        if first.target.rank() != self.source.rank() || !self.source.contains_monoid(&first.target) {
            return Err(Error::ParentMismatch);
        }
        let m = self.matrix.mul(&first.matrix)?;
        MonoidHom::new(first.source.clone(), self.target.clone(), m)
    }

    /// Injectivity of `h^gp` on the source group.
    pub fn is_injective(&self) -> bool {
        let g = self.source.group();
        if g.rank() == 0 {
            return true;
        }
        let imgs: Vec<IntVector> = g.basis().iter().map(|b| self.apply(b)).collect();
        IntMatrix::from_row_vectors(self.target.rank(), &imgs).unwrap().rank() == g.rank()
    }

    /// `h^{-1}(P^×) = Q^×`.
    pub fn is_local(&self) -> bool {
        self.source
            .generators()
            .iter()
            .all(|g| !self.target.is_unit(&self.apply(g)) || self.source.is_unit(g))
    }

    /// `(h^gp)^{-1}(P) = Q`, for saturated source and target.
    pub fn is_exact(&self) -> Result<bool> {
        if !self.source.is_saturated() || !self.target.is_saturated() {
            return Err(Error::NotSaturated);
        }
        let g = self.source.group();
        let k = g.rank();
        if k == 0 {
            return Ok(true);
        }
        // y in Z^k ↦ h(B y); constraints <m, h(B y)> >= 0 for m in dual(cone P)
        let b = IntMatrix::from_row_vectors(self.source.rank(), g.basis())?.transpose();
        let hb = self.matrix.mul(&b)?;
        let hbt = hb.transpose();
        let cons: Vec<IntVector> =
            self.target.cone().dual_generators().iter().map(|m| hbt.apply(m)).collect::<Result<_>>()?;
        let pre = Cone::new(k, &cons)?.dual();
        for y in crate::monoids::lattice_point_generators(&pre)? {
            let x = b.apply(&y)?;
            if !self.source.contains(&x) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The induced map between sharp quotients.
    pub fn sharpen(&self) -> Result<MonoidHom> {
        Ok(self.sharpen_with_lifts()?.hom)
    }

    fn sharpen_with_lifts(&self) -> Result<Sharpened> {
        let uq = self.source.units()?;
        let up = self.target.units()?;
        let m = up.map.projection.mul(&self.matrix)?.mul(&uq.map.section)?;
        let hom = MonoidHom::new(uq.sharp.clone(), up.sharp.clone(), m)?;
        let lift = |sharp: &FineMonoid, orig: &FineMonoid, proj: &IntMatrix| -> Vec<IntVector> {
            sharp
                .generators()
                .iter()
                .map(|s| {
                    orig.generators()
                        .iter()
                        .find(|g| &proj.apply(g).unwrap() == s)
                        .expect("sharp generator has a preimage")
                        .clone()
                })
                .collect()
        };
        let source_lifts = lift(&uq.sharp, &self.source, &uq.map.projection);
        let target_lifts = lift(&up.sharp, &self.target, &up.map.projection);
        Ok(Sharpened { hom, source_lifts, target_lifts })
    }
}

struct Sharpened {
    hom: MonoidHom,
    source_lifts: Vec<IntVector>,
    target_lifts: Vec<IntVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntegralityStatus {
    Integral,
    NotIntegral,
    InconclusiveAtBound,
}

impl IntegralityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            IntegralityStatus::Integral => "Integral",
            IntegralityStatus::NotIntegral => "NotIntegral",
            IntegralityStatus::InconclusiveAtBound => "InconclusiveAtBound",
        }
    }

    pub fn parse(s: &str) -> Option<IntegralityStatus> {
        match s {
            "Integral" => Some(IntegralityStatus::Integral),
            "NotIntegral" => Some(IntegralityStatus::NotIntegral),
            "InconclusiveAtBound" => Some(IntegralityStatus::InconclusiveAtBound),
            _ => None,
        }
    }
}

/// `h(a1) + b1 = h(a2) + b2` with no witness.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Counterexample {
    pub a1: IntVector,
    pub a2: IntVector,
    pub b1: IntVector,
    pub b2: IntVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegralityVerdict {
    pub status: IntegralityStatus,
    pub counterexample: Option<Counterexample>,
    pub witness_bound: u64,
}

pub const DEFAULT_ORACLE_BOUND: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntegralityOptions {
    pub oracle_bound: u64,
    /// Report `InconclusiveAtBound` instead of `Integral` unless the oracle
    /// also finds no counterexample.
    pub conservative: bool,
}

impl Default for IntegralityOptions {
    fn default() -> Self {
        IntegralityOptions { oracle_bound: DEFAULT_ORACLE_BOUND, conservative: false }
    }
}

/// Membership cache for repeated oracle queries.
struct Members<'a> {
    monoid: &'a FineMonoid,
    cache: HashMap<IntVector, bool>,
}

impl<'a> Members<'a> {
    fn new(monoid: &'a FineMonoid) -> Self {
        // settles the saturation flag, which makes membership a cone test
        monoid.is_saturated();
        Members { monoid, cache: HashMap::new() }
    }

    fn contains(&mut self, v: &IntVector) -> bool {
        if let Some(&b) = self.cache.get(v) {
            return b;
        }
        let b = self.monoid.contains(v);
        self.cache.insert(v.clone(), b);
        b
    }
}

/// Brute-force oracle.
///
/// Runs over `a1, a2` in `Q` and `b1, b2` in `P` of generator-degree at most
/// `bound` (breadth-first order, `a1` outermost) and returns the first
/// equation without a witness `a3` of degree at most `2 * bound`. `a4` and `b`
/// are determined by `a3` and tested for membership exactly.
pub fn is_integral_bounded(h: &MonoidHom, bound: u64) -> IntegralityVerdict {
    let b = bound as usize;
    let eq = h.source.elements_up_to_degree(b);
    let ep = h.target.elements_up_to_degree(b);
    let witnesses = h.source.elements_up_to_degree(2 * b);
    let hw: Vec<IntVector> = witnesses.iter().map(|a| h.apply(a)).collect();
    let heq: Vec<IntVector> = eq.iter().map(|a| h.apply(a)).collect();
    let mut by_diff: HashMap<IntVector, Vec<(usize, usize)>> = HashMap::new();
    for (i, b1) in ep.iter().enumerate() {
        for (j, b2) in ep.iter().enumerate() {
            by_diff.entry(b2 - b1).or_default().push((i, j));
        }
    }
    let mut q = Members::new(&h.source);
    let mut p = Members::new(&h.target);
    let mut good: HashMap<(IntVector, usize), bool> = HashMap::new();
    // the test only depends on a1 - a2, and a repeated difference already passed
    let mut seen: HashSet<IntVector> = HashSet::new();
    for (i1, a1) in eq.iter().enumerate() {
        for (i2, a2) in eq.iter().enumerate() {
            let delta = a1 - a2;
            if !seen.insert(delta.clone()) {
                continue;
            }
            let diff = &heq[i1] - &heq[i2];
            let Some(pairs) = by_diff.get(&diff) else { continue };
            if q.contains(&delta) || q.contains(&-&delta) {
                continue;
            }
            for &(j1, j2) in pairs {
                let key = (delta.clone(), j1);
                let ok = match good.get(&key) {
                    Some(&ok) => ok,
                    None => {
                        // a3 = a2 (so a4 = a1) is tried first
                        let ok = p.contains(&(&ep[j1] - &heq[i2]))
                            || (0..witnesses.len())
                                .any(|k| p.contains(&(&ep[j1] - &hw[k])) && q.contains(&(&witnesses[k] + &delta)));
                        good.insert(key, ok);
                        ok
                    }
                };
                if !ok {
                    return IntegralityVerdict {
                        status: IntegralityStatus::NotIntegral,
                        counterexample: Some(Counterexample {
                            a1: a1.clone(),
                            a2: a2.clone(),
                            b1: ep[j1].clone(),
                            b2: ep[j2].clone(),
                        }),
                        witness_bound: bound,
                    };
                }
            }
        }
    }
    IntegralityVerdict { status: IntegralityStatus::InconclusiveAtBound, counterexample: None, witness_bound: bound }
}

/// Re-checks a counterexample: the equation holds and no witness `a3` of
/// degree at most `2 * bound` exists.
pub fn validate_counterexample(h: &MonoidHom, ce: &Counterexample, bound: u64) -> bool {
    let (q, p) = (&h.source, &h.target);
    if ![&ce.a1, &ce.a2].iter().all(|a| q.contains(a)) || ![&ce.b1, &ce.b2].iter().all(|b| p.contains(b)) {
        return false;
    }
    if &h.apply(&ce.a1) + &ce.b1 != &h.apply(&ce.a2) + &ce.b2 {
        return false;
    }
    let delta = &ce.a1 - &ce.a2;
    !q.elements_up_to_degree(2 * bound as usize)
        .iter()
        .any(|a3| q.contains(&(a3 + &delta)) && p.contains(&(&ce.b1 - &h.apply(a3))))
}

/// Exact integrality decision, with counterexamples re-validated by the oracle.
pub fn is_integral(h: &MonoidHom) -> Result<IntegralityVerdict> {
    is_integral_with(h, &IntegralityOptions::default())
}

pub fn is_integral_with(h: &MonoidHom, opts: &IntegralityOptions) -> Result<IntegralityVerdict> {
    let bound = opts.oracle_bound;
    match first_bad_quadruple(h)? {
        Some(ce) => {
            if validate_counterexample(h, &ce, bound) {
                Ok(IntegralityVerdict {
                    status: IntegralityStatus::NotIntegral,
                    counterexample: Some(ce),
                    witness_bound: bound,
                })
            } else {
                Ok(IntegralityVerdict {
                    status: IntegralityStatus::InconclusiveAtBound,
                    counterexample: None,
                    witness_bound: bound,
                })
            }
        }
        None => {
            if opts.conservative && is_integral_bounded(h, bound).status == IntegralityStatus::NotIntegral {
                return Ok(IntegralityVerdict {
                    status: IntegralityStatus::InconclusiveAtBound,
                    counterexample: None,
                    witness_bound: bound,
                });
            }
            Ok(IntegralityVerdict { status: IntegralityStatus::Integral, counterexample: None, witness_bound: bound })
        }
    }
}

/// The first minimal solution violating the criterion, lifted to `h`.
fn first_bad_quadruple(h: &MonoidHom) -> Result<Option<Counterexample>> {
    let sh = h.sharpen_with_lifts()?;
    let s = &sh.hom;
    let q = s.source.generators();
    let p = s.target.generators();
    let (nq, np) = (q.len(), p.len());
    let hq: Vec<IntVector> = q.iter().map(|g| s.apply(g)).collect();
    // columns: h(q) for a1, -h(q) for a2, p for b1, -p for b2
    let mut cols: Vec<IntVector> = Vec::with_capacity(2 * nq + 2 * np);
    cols.extend(hq.iter().cloned());
    cols.extend(hq.iter().map(|v| -v));
    cols.extend(p.iter().cloned());
    cols.extend(p.iter().map(|v| -v));
    let mut sols = minimal_solutions_with_repeats(&cols, s.target.rank());
    sols.sort_by(|x, y| {
        let dx: u64 = x.iter().map(|&c| c as u64).sum();
        let dy: u64 = y.iter().map(|&c| c as u64).sum();
        dx.cmp(&dy).then_with(|| y.cmp(x))
    });
    let mut checker = Goodness::new(s);
    let comb = |coef: &[u32], gens: &[IntVector], rank: usize| -> IntVector {
        coef.iter()
            .zip(gens)
            .fold(IntVector::zeros(rank), |acc, (&c, g)| &acc + &g.scale(&BigInt::from(c)))
    };
    for x in sols {
        let (c1, rest) = x.split_at(nq);
        let (c2, rest) = rest.split_at(nq);
        let (d1, d2) = rest.split_at(np);
        let a1 = comb(c1, q, s.source.rank());
        let a2 = comb(c2, q, s.source.rank());
        let b1 = comb(d1, p, s.target.rank());
        if checker.is_good(&(&a1 - &a2), &b1) {
            continue;
        }
        let a1 = comb(c1, &sh.source_lifts, h.source.rank());
        let a2 = comb(c2, &sh.source_lifts, h.source.rank());
        let b1 = comb(d1, &sh.target_lifts, h.target.rank());
        let b2 = comb(d2, &sh.target_lifts, h.target.rank());
        // the lifted equation can be off by a target unit; absorb it into b2
        let fix = &(&h.apply(&a1) + &b1) - &(&h.apply(&a2) + &b2);
        let b2 = &b2 + &fix;
        return Ok(Some(Counterexample { a1, a2, b1, b2 }));
    }
    Ok(None)
}

/// Same set as [`minimal_solutions`], solved on distinct columns: the minimal
/// solutions with repeated columns are exactly the ways of splitting each
/// coefficient of a minimal solution over the copies.
fn minimal_solutions_with_repeats(cols: &[IntVector], rank: usize) -> Vec<Vec<u32>> {
    let mut distinct: Vec<IntVector> = Vec::new();
    let mut copies: Vec<Vec<usize>> = Vec::new();
    for (j, c) in cols.iter().enumerate() {
        match distinct.iter().position(|d| d == c) {
            Some(k) => copies[k].push(j),
            None => {
                distinct.push(c.clone());
                copies.push(vec![j]);
            }
        }
    }
    if distinct.len() == cols.len() {
        return minimal_solutions(cols, rank);
    }
    let mut out = Vec::new();
    for x in minimal_solutions(&distinct, rank) {
        let mut partial = vec![vec![0u32; cols.len()]];
        for (k, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let mut next = Vec::new();
            for y in &partial {
                split(c, &copies[k], y.clone(), &mut next);
            }
            partial = next;
        }
        out.extend(partial);
    }
    out
}

/// Every way of writing `c` as a sum over the positions `slots` of `y`.
fn split(c: u32, slots: &[usize], y: Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if slots.len() == 1 {
        let mut y = y;
        y[slots[0]] += c;
        out.push(y);
        return;
    }
    for first in 0..=c {
        let mut z = y.clone();
        z[slots[0]] += first;
        split(c - first, &slots[1..], z, out);
    }
}

/// Minimal nonzero `x` in `N^n` with `sum x_j cols_j = 0` (Contejean–Devie).
fn minimal_solutions(cols: &[IntVector], rank: usize) -> Vec<Vec<u32>> {
    let n = cols.len();
    let mut basis: Vec<Vec<u32>> = Vec::new();
    let mut frontier: BTreeSet<Vec<u32>> = (0..n)
        .map(|j| {
            let mut e = vec![0u32; n];
            e[j] = 1;
            e
        })
        .collect();
    let value = |x: &[u32]| -> IntVector {
        x.iter()
            .zip(cols)
            .filter(|(&c, _)| c > 0)
            .fold(IntVector::zeros(rank), |acc, (&c, col)| &acc + &col.scale(&BigInt::from(c)))
    };
    let dominates = |x: &[u32], b: &[u32]| x.iter().zip(b).all(|(xi, bi)| xi >= bi);
    while !frontier.is_empty() {
        let mut next: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut fresh = Vec::new();
        let mut pending = Vec::new();
        for x in frontier {
            let v = value(&x);
            if v.is_zero() {
                fresh.push(x);
            } else {
                pending.push((x, v));
            }
        }
        basis.extend(fresh);
        for (x, v) in pending {
            for j in 0..n {
                if !v.dot(&cols[j]).is_negative() {
                    continue;
                }
                let mut y = x.clone();
                y[j] += 1;
                if basis.iter().any(|b| dominates(&y, b)) {
                    continue;
                }
                next.insert(y);
            }
        }
        frontier = next;
    }
    basis
}

/// Exact test of the criterion on `(delta, b1)` for a hom of sharp monoids.
struct Goodness<'a> {
    h: &'a MonoidHom,
    /// source generators with nonzero image, and the target degree of the image
    moving: Vec<(IntVector, IntVector, BigInt)>,
    localized: FineMonoid,
    memo: HashMap<(IntVector, IntVector), bool>,
}

impl<'a> Goodness<'a> {
    fn new(h: &'a MonoidHom) -> Self {
        let w = h.target.grading().clone();
        let mut moving = Vec::new();
        let mut gens = h.source.generators().to_vec();
        for g in h.source.generators() {
            let img = h.apply(g);
            if img.is_zero() {
                gens.push(-g);
            } else {
                let d = img.dot(&w);
                moving.push((g.clone(), img, d));
            }
        }
        let localized = FineMonoid::new(h.source.rank(), &gens).unwrap();
        Goodness { h, moving, localized, memo: HashMap::new() }
    }

    /// Some `a3` in `Q` has `a3 + delta` in `Q` and `b1 - h(a3)` in `P`.
    ///
    /// Generators killed by `h` can be added to `a3` freely, so they are
    /// absorbed by testing `a3 + delta` in the localization of `Q` at them.
    fn is_good(&mut self, delta: &IntVector, b1: &IntVector) -> bool {
        let key = (delta.clone(), b1.clone());
        if let Some(&g) = self.memo.get(&key) {
            return g;
        }
        let budget = b1.dot(self.h.target.grading());
        let zero = IntVector::zeros(self.h.source.rank());
        let g = self.search(0, &zero, b1, &budget, delta);
        self.memo.insert(key, g);
        g
    }

    fn search(&self, i: usize, a3: &IntVector, rest: &IntVector, budget: &BigInt, delta: &IntVector) -> bool {
        if !self.h.target.contains(rest) {
            return false;
        }
        if i == self.moving.len() {
            return self.localized.contains(&(a3 + delta));
        }
        let (g, img, d) = &self.moving[i];
        let mut a = a3.clone();
        let mut r = rest.clone();
        let mut left = budget.clone();
        loop {
            if self.search(i + 1, &a, &r, &left, delta) {
                return true;
            }
            left -= d;
            if left.is_negative() {
                return false;
            }
            a = &a + g;
            r = &r - img;
            if !self.h.target.contains(&r) {
                return false;
            }
        }
    }
}

/// The fine pushout of `h: Q -> P` and `g: Q -> Q'` with both structure maps.
pub fn pushout_fine(h: &MonoidHom, g: &MonoidHom) -> Result<(FineMonoid, MonoidHom, MonoidHom)> {
    if h.source != g.source && !h.source.same_set(&g.source) {
        return Err(Error::ParentMismatch);
    }
    let (np, nq) = (h.target.rank(), g.target.rank());
    let n = np + nq;
    let relations: Vec<IntVector> = h
        .source
        .generators()
        .iter()
        .map(|q| {
            let mut v = h.apply(q).0;
            v.extend(g.apply(q).0.into_iter().map(|x| -x));
            IntVector(v)
        })
        .collect();
    let rel = Sublattice::generated_by(n, &relations);
    let mut gens: Vec<IntVector> = Vec::new();
    for p in h.target.generators() {
        let mut v = p.0.clone();
        v.extend(std::iter::repeat_n(BigInt::zero(), nq));
        gens.push(IntVector(v));
    }
    for q in g.target.generators() {
        let mut v = vec![BigInt::zero(); np];
        v.extend(q.0.iter().cloned());
        gens.push(IntVector(v));
    }
    let group = Sublattice::generated_by(n, &gens);
    if !rel.is_saturated_in(&group) {
        return Err(Error::TorsionQuotient);
    }
    let map = rel.quotient_map();
    let img: Vec<IntVector> = gens.iter().map(|v| map.projection.apply(v)).collect::<Result<_>>()?;
    let m = map.projection.rows();
    let monoid = FineMonoid::new(m, &img)?;
    let left = map.projection.select_cols(0..np);
    let right = map.projection.select_cols(np..n);
    let to_p = MonoidHom::new(h.target.clone(), monoid.clone(), left)?;
    let to_q = MonoidHom::new(g.target.clone(), monoid.clone(), right)?;
    Ok((monoid, to_p, to_q))
}

/// The fs pushout: the saturation of the fine pushout.
pub fn pushout_fs(h: &MonoidHom, g: &MonoidHom) -> Result<(FineMonoid, MonoidHom, MonoidHom)> {
    let (fine, to_p, to_q) = pushout_fine(h, g)?;
    let sat = fine.saturate();
    let to_p = MonoidHom::new(to_p.source, sat.clone(), to_p.matrix)?;
    let to_q = MonoidHom::new(to_q.source, sat.clone(), to_q.matrix)?;
    Ok((sat, to_p, to_q))
}

/// `x ↦ n x`.
pub fn multiplication_map(q: &FineMonoid, n: u64) -> Result<MonoidHom> {
    if n == 0 {
        return Err(Error::InvalidInput("multiplication by zero".into()));
    }
    let m = IntMatrix::scalar(q.rank(), &BigInt::from(n));
    MonoidHom::new(q.clone(), q.clone(), m)
}

/// The structure map `P -> P/N` of a quotient.
pub fn quotient_map(p: &FineMonoid, n: &FineMonoid) -> Result<MonoidHom> {
    let (q, map) = p.quotient(n)?;
    MonoidHom::new(p.clone(), q, map.projection)
}
