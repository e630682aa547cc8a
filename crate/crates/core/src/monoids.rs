//! Fine and fs monoids: finitely generated submonoids of `Z^n`.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num::bigint::BigInt;
use num::{Integer, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{IntMatrix, IntVector, QuotientMap, Sublattice};
use crate::polyhedra::{parallelepiped_points, Cone};

#[derive(Debug)]
struct Analysis {
    cone: Cone,
    grading: IntVector,
    /// indices of generators that are units
    unit_gens: Vec<usize>,
    units: Sublattice,
    group: Sublattice,
}

/// A finitely generated submonoid of `Z^rank`.
///
/// Generators keep insertion order; duplicates and zero vectors are dropped.
#[derive(Clone)]
pub struct FineMonoid {
    rank: usize,
    generators: Vec<IntVector>,
    analysis: Arc<OnceLock<Analysis>>,
    saturated: Arc<OnceLock<bool>>,
}

impl PartialEq for FineMonoid {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.generators == other.generators
    }
}

impl Eq for FineMonoid {}

impl Hash for FineMonoid {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.generators.hash(state);
    }
}

impl fmt::Debug for FineMonoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid<{:?}>", self.generators)
    }
}

impl FineMonoid {
    pub fn new(rank: usize, gens: &[IntVector]) -> Result<FineMonoid> {
        let mut out: Vec<IntVector> = Vec::with_capacity(gens.len());
        for g in gens {
            if g.len() != rank {
                return Err(Error::DimensionMismatch(format!("generator {g} in rank {rank}")));
            }
            if !g.is_zero() && !out.contains(g) {
                out.push(g.clone());
            }
        }
        Ok(FineMonoid {
            rank,
            generators: out,
            analysis: Arc::new(OnceLock::new()),
            saturated: Arc::new(OnceLock::new()),
        })
    }

    pub fn from_i64(rank: usize, gens: &[&[i64]]) -> FineMonoid {
        let g: Vec<IntVector> = gens.iter().map(|r| IntVector::from_i64(r)).collect();
        FineMonoid::new(rank, &g).expect("valid generators")
    }

    /// `N^rank` with the standard basis.
    pub fn natural(rank: usize) -> FineMonoid {
        let g: Vec<IntVector> = (0..rank).map(|i| IntVector::unit(rank, i)).collect();
        FineMonoid::new(rank, &g).unwrap()
    }

    pub fn trivial(rank: usize) -> FineMonoid {
        FineMonoid::new(rank, &[]).unwrap()
    }

    /// Hilbert-basis style output: sorted, and known to be saturated.
    fn saturated_from(rank: usize, mut gens: Vec<IntVector>) -> FineMonoid {
        gens.sort_by(|a, b| b.cmp(a));
        gens.dedup();
        let m = FineMonoid::new(rank, &gens).unwrap();
        let _ = m.saturated.set(true);
        m
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[IntVector] {
        &self.generators
    }

    fn analysis(&self) -> &Analysis {
        self.analysis.get_or_init(|| {
            let cone = Cone::new(self.rank, &self.generators).unwrap();
            let mut grading = IntVector::zeros(self.rank);
            for m in cone.dual_generators() {
                grading = &grading + &m;
            }
            let unit_gens: Vec<usize> = (0..self.generators.len())
                .filter(|&i| self.generators[i].dot(&grading).is_zero())
                .collect();
            let ug: Vec<IntVector> = unit_gens.iter().map(|&i| self.generators[i].clone()).collect();
            let units = Sublattice::generated_by(self.rank, &ug);
            let group = Sublattice::generated_by(self.rank, &self.generators);
            Analysis { cone, grading, unit_gens, units, group }
        })
    }

    /// The rational cone spanned by the generators.
    pub fn cone(&self) -> &Cone {
        &self.analysis().cone
    }

    /// A functional vanishing exactly on the units and positive on every other generator.
    pub fn grading(&self) -> &IntVector {
        &self.analysis().grading
    }

    /// The group `P^gp` as a sublattice.
    pub fn group(&self) -> &Sublattice {
        &self.analysis().group
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.group().rank() == self.rank
    }

    /// The unit group `P ∩ (-P)` as a sublattice.
    pub fn unit_lattice(&self) -> &Sublattice {
        &self.analysis().units
    }

    pub fn is_sharp(&self) -> bool {
        self.analysis().unit_gens.is_empty()
    }

    pub fn is_unit(&self, v: &IntVector) -> bool {
        v.dot(self.grading()).is_zero() && self.unit_lattice().contains(v)
    }

    /// Membership, decided by a bounded search over degrees of non-unit generators.
    pub fn contains(&self, v: &IntVector) -> bool {
        if v.len() != self.rank {
            return false;
        }
        if v.is_zero() {
            return true;
        }
        let a = self.analysis();
        if !a.cone.contains(v) || !a.group.contains(v) {
            return false;
        }
        if self.saturated.get() == Some(&true) {
            return true;
        }
        let deg = v.dot(&a.grading);
        if deg.is_negative() {
            return false;
        }
        let nonunit: Vec<(IntVector, BigInt)> = (0..self.generators.len())
            .filter(|i| !a.unit_gens.contains(i))
            .map(|i| (self.generators[i].clone(), self.generators[i].dot(&a.grading)))
            .collect();
        let mut dead: HashSet<(usize, IntVector)> = HashSet::new();
        search(&nonunit, 0, v.clone(), deg, &a.units, &mut dead)
    }

    pub fn contains_monoid(&self, other: &FineMonoid) -> bool {
        other.generators.iter().all(|g| self.contains(g))
    }

    /// Equality as subsets of `Z^rank`.
    pub fn same_set(&self, other: &FineMonoid) -> bool {
        self.rank == other.rank && self.contains_monoid(other) && other.contains_monoid(self)
    }

    /// Drops generators lying in the monoid generated by the remaining ones.
    pub fn minimized(&self) -> FineMonoid {
        let mut gens = self.generators.clone();
        let mut i = 0;
        while i < gens.len() {
            let mut others = gens.clone();
            let g = others.remove(i);
            if FineMonoid::new(self.rank, &others).unwrap().contains(&g) {
                gens = others;
            } else {
                i += 1;
            }
        }
        let m = FineMonoid::new(self.rank, &gens).unwrap();
        if let Some(&s) = self.saturated.get() {
            let _ = m.saturated.set(s);
        }
        m
    }

    /// The units and the sharp quotient `P / P^×`.
    pub fn units(&self) -> Result<Units> {
        let units = self.unit_lattice().clone();
        if !units.is_saturated_in(self.group()) {
            return Err(Error::TorsionQuotient);
        }
        let map = units.quotient_map();
        let img: Vec<IntVector> = self
            .generators
            .iter()
            .map(|g| map.projection.apply(g))
            .collect::<Result<_>>()?;
        let sharp = FineMonoid::new(map.projection.rows(), &img)?;
        Ok(Units { basis: units.basis().to_vec(), map, sharp })
    }

    /// `cone(P) ∩ P^gp`.
    pub fn saturate(&self) -> FineMonoid {
        if self.saturated.get() == Some(&true) {
            return self.clone();
        }
        let group = self.group();
        let k = group.rank();
        let coords: Vec<IntVector> = self.generators.iter().map(|g| group.coords(g).expect("in group")).collect();
        let local = Cone::new(k, &coords).unwrap();
        let pts = lattice_point_generators(&local).expect("gp coordinates");
        let basis = IntMatrix::from_row_vectors(self.rank, group.basis()).unwrap().transpose();
        let gens: Vec<IntVector> = pts.iter().map(|c| basis.apply(c).unwrap()).collect();
        let sat = FineMonoid::saturated_from(self.rank, gens).minimized();
        let _ = self.saturated.set(self.contains_monoid(&sat));
        sat
    }

    pub fn is_saturated(&self) -> bool {
        if let Some(&s) = self.saturated.get() {
            return s;
        }
        let sat = self.saturate();
        let s = self.contains_monoid(&sat);
        let _ = self.saturated.set(s);
        s
    }

    /// Image of `P` in `P^gp / N^gp`.
    pub fn quotient(&self, n: &FineMonoid) -> Result<(FineMonoid, QuotientMap)> {
        if n.rank != self.rank || !self.contains_monoid(n) {
            return Err(Error::NotSubmonoid);
        }
        if !n.group().is_saturated_in(self.group()) {
            return Err(Error::TorsionQuotient);
        }
        let map = n.group().quotient_map();
        let img: Vec<IntVector> = self
            .generators
            .iter()
            .map(|g| map.projection.apply(g))
            .collect::<Result<_>>()?;
        Ok((FineMonoid::new(map.projection.rows(), &img)?, map))
    }

    /// The cone `sigma` in the dual lattice with `sigma^vee = cone(P)`.
    pub fn cone_of(&self) -> Result<Cone> {
        if !self.is_sharp() {
            return Err(Error::NotSharp);
        }
        Ok(self.cone().dual())
    }

    /// Distinct elements of generator-degree at most `bound`, breadth first:
    /// degree by degree, extending earlier elements by generators in order.
    pub fn elements_up_to_degree(&self, bound: usize) -> Vec<IntVector> {
        let mut seen: HashSet<IntVector> = HashSet::new();
        let zero = IntVector::zeros(self.rank);
        seen.insert(zero.clone());
        let mut out = vec![zero.clone()];
        let mut layer = vec![zero];
        for _ in 0..bound {
            let mut next = Vec::new();
            for x in &layer {
                for g in &self.generators {
                    let y = x + g;
                    if seen.insert(y.clone()) {
                        next.push(y);
                    }
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

fn search(
    gens: &[(IntVector, BigInt)],
    i: usize,
    residual: IntVector,
    remaining: BigInt,
    units: &Sublattice,
    dead: &mut HashSet<(usize, IntVector)>,
) -> bool {
    if i == gens.len() {
        return remaining.is_zero() && units.contains(&residual);
    }
    if dead.contains(&(i, residual.clone())) {
        return false;
    }
    let (g, d) = &gens[i];
    let found = if i + 1 == gens.len() {
        let (q, r) = remaining.div_rem(d);
        r.is_zero() && units.contains(&(&residual - &g.scale(&q)))
    } else {
        let max = &remaining / d;
        let mut c = BigInt::zero();
        let mut res = residual.clone();
        let mut rem = remaining.clone();
        let mut hit = false;
        while c <= max {
            if search(gens, i + 1, res.clone(), rem.clone(), units, dead) {
                hit = true;
                break;
            }
            res = &res - g;
            rem -= d;
            c += 1;
        }
        hit
    };
    if !found {
        dead.insert((i, residual));
    }
    found
}

/// Units of a fine monoid with the sharp quotient realized in `Z^(rank - k)`.
#[derive(Debug, Clone)]
pub struct Units {
    pub basis: Vec<IntVector>,
    pub map: QuotientMap,
    pub sharp: FineMonoid,
}

/// A group generating set for the lattice points of an arbitrary rational cone.
///
/// For a pointed cone this is its Hilbert basis. Otherwise a lattice basis of
/// the lineality space is added with both signs and the Hilbert basis of the
/// pointed quotient is lifted.
pub fn lattice_point_generators(c: &Cone) -> Result<Vec<IntVector>> {
    if c.is_pointed() {
        return pointed_hilbert_basis(c);
    }
    let rank = c.rank();
    let lin = Sublattice::generated_by(rank, c.lineality()).saturation();
    let map = lin.quotient_map();
    let img: Vec<IntVector> = c.rays().iter().map(|r| map.projection.apply(r)).collect::<Result<_>>()?;
    let q = Cone::new(map.projection.rows(), &img)?;
    let mut out = Vec::new();
    for h in pointed_hilbert_basis(&q)? {
        out.push(map.section.apply(&h)?);
    }
    for l in lin.basis() {
        out.push(l.clone());
        out.push(-l);
    }
    Ok(out)
}

fn pointed_hilbert_basis(c: &Cone) -> Result<Vec<IntVector>> {
    let rays = c.extremal_rays()?.to_vec();
    let rank = c.rank();
    let dim = c.dimension();
    let mut cands: Vec<IntVector> = rays.clone();
    if dim > 0 {
        for subset in independent_subsets(rank, &rays, dim) {
            for (p, _) in parallelepiped_points(rank, &subset)? {
                if !p.is_zero() {
                    cands.push(p);
                }
            }
        }
    }
    cands.sort();
    cands.dedup();
    let keep: Vec<IntVector> = cands
        .iter()
        .filter(|x| {
            !cands.iter().any(|g| {
                let d = *x - g;
                g != *x && !d.is_zero() && c.contains(&d)
            })
        })
        .cloned()
        .collect();
    Ok(keep)
}

/// Linearly independent `k`-subsets of `rays`, in lexicographic index order.
fn independent_subsets(rank: usize, rays: &[IntVector], k: usize) -> Vec<Vec<IntVector>> {
    let n = rays.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        let sub: Vec<IntVector> = idx.iter().map(|&i| rays[i].clone()).collect();
        if IntMatrix::from_row_vectors(rank, &sub).unwrap().rank() == k {
            out.push(sub);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimal generating set of `c ∩ Z^rank` for a pointed cone.
pub fn hilbert_basis(c: &Cone) -> Result<FineMonoid> {
    let hb = pointed_hilbert_basis(c)?;
    Ok(FineMonoid::saturated_from(c.rank(), hb))
}

/// An element of a fine monoid, certified at construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidElem {
    vector: IntVector,
    parent: FineMonoid,
}

impl MonoidElem {
    pub fn new(parent: &FineMonoid, v: IntVector) -> Result<MonoidElem> {
        if !parent.contains(&v) {
            return Err(Error::NotInMonoid(v.to_string()));
        }
        Ok(MonoidElem { vector: v, parent: parent.clone() })
    }

    pub fn vector(&self) -> &IntVector {
        &self.vector
    }

    pub fn parent(&self) -> &FineMonoid {
        &self.parent
    }
}
