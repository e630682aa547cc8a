//! Monoid ideals and piecewise linear support functions.
//!
//! Support functions follow the min-of-linear convention: on a cone `sigma`
//! the function is `phi(x) = min_tau <x, m_tau>`, which is superadditive. The
//! ideal of `phi` is `K_phi = {m : <x, m> >= phi(x) for all x in sigma}` and
//! the support function of an ideal `K` is `x ↦ min_{t in K} <x, t>`.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::homs::MonoidHom;
use crate::lattice::IntVector;
use crate::monoids::FineMonoid;
use crate::polyhedra::{Cone, Fan, FanMap};

/// An ideal of a fine monoid with a minimal, sorted generating set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MonoidIdeal {
    parent: FineMonoid,
    generators: Vec<IntVector>,
}

impl MonoidIdeal {
    /// The ideal generated by `gens` with generators lying in `g' + P` removed.
    pub fn minimal_generators(parent: &FineMonoid, gens: &[IntVector]) -> Result<MonoidIdeal> {
        for g in gens {
            if g.len() != parent.rank() || !parent.contains(g) {
                return Err(Error::NotInMonoid(g.to_string()));
            }
        }
        let mut sorted = gens.to_vec();
        sorted.sort();
        sorted.dedup();
        let keep: Vec<IntVector> = sorted
            .iter()
            .enumerate()
            .filter(|(i, g)| {
                !sorted.iter().enumerate().any(|(j, other)| {
                    // among associates the lexicographically first one survives
                    j != *i && parent.contains(&(*g - other)) && (j < *i || !parent.contains(&(other - *g)))
                })
            })
            .map(|(_, g)| g.clone())
            .collect();
        Ok(MonoidIdeal { parent: parent.clone(), generators: keep })
    }

    pub fn unit(parent: &FineMonoid) -> MonoidIdeal {
        MonoidIdeal { parent: parent.clone(), generators: vec![IntVector::zeros(parent.rank())] }
    }

    /// The ideal generated by the monoid generators (the maximal ideal when sharp).
    pub fn maximal(parent: &FineMonoid) -> MonoidIdeal {
        MonoidIdeal::minimal_generators(parent, parent.generators()).unwrap()
    }

    pub fn parent(&self) -> &FineMonoid {
        &self.parent
    }

    pub fn generators(&self) -> &[IntVector] {
        &self.generators
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.generators.iter().any(|g| self.parent.is_unit(g))
    }

    pub fn contains(&self, v: &IntVector) -> bool {
        self.generators.iter().any(|g| self.parent.contains(&(v - g)))
    }

    pub fn contains_ideal(&self, other: &MonoidIdeal) -> bool {
        other.generators.iter().all(|g| self.contains(g))
    }

    /// Equality as subsets.
    pub fn same_ideal(&self, other: &MonoidIdeal) -> bool {
        self.contains_ideal(other) && other.contains_ideal(self)
    }

    fn same_parent(&self, other: &MonoidIdeal) -> bool {
        self.parent == other.parent || self.parent.same_set(&other.parent)
    }

    pub fn product(&self, other: &MonoidIdeal) -> Result<MonoidIdeal> {
        if !self.same_parent(other) {
            return Err(Error::ParentMismatch);
        }
        let sums: Vec<IntVector> =
            self.generators.iter().flat_map(|a| other.generators.iter().map(move |b| a + b)).collect();
        MonoidIdeal::minimal_generators(&self.parent, &sums)
    }

    pub fn is_principal(&self) -> Option<IntVector> {
        if self.generators.len() == 1 {
            Some(self.generators[0].clone())
        } else {
            None
        }
    }

    /// The ideal of `h.target` generated by the images of the generators.
    pub fn extend(&self, h: &MonoidHom) -> Result<MonoidIdeal> {
        if &self.parent != h.source() && !self.parent.same_set(h.source()) {
            return Err(Error::ParentMismatch);
        }
        let imgs: Vec<IntVector> = self.generators.iter().map(|g| h.apply(g)).collect();
        MonoidIdeal::minimal_generators(h.target(), &imgs)
    }

    /// `l + K` for `l` in the parent.
    pub fn translate(&self, l: &IntVector) -> Result<MonoidIdeal> {
        let g: Vec<IntVector> = self.generators.iter().map(|g| g + l).collect();
        MonoidIdeal::minimal_generators(&self.parent, &g)
    }
}

pub fn ideal_contains(k: &MonoidIdeal, v: &IntVector) -> bool {
    k.contains(v)
}

pub fn product(k1: &MonoidIdeal, k2: &MonoidIdeal) -> Result<MonoidIdeal> {
    k1.product(k2)
}

pub fn is_principal(k: &MonoidIdeal) -> Option<IntVector> {
    k.is_principal()
}

pub fn extend(k: &MonoidIdeal, h: &MonoidHom) -> Result<MonoidIdeal> {
    k.extend(h)
}

/// A piecewise linear function on a full-dimensional pointed cone, linear on
/// each maximal cone of a subdividing fan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFunction {
    domain: Cone,
    fan: Fan,
    pieces: BTreeMap<Vec<usize>, IntVector>,
}

impl SupportFunction {
    /// Builds from explicit pieces, one per maximal cone of `fan`, and validates.
    pub fn new(domain: Cone, fan: Fan, pieces: BTreeMap<Vec<usize>, IntVector>) -> Result<SupportFunction> {
        let f = SupportFunction { domain: domain.canonical().map_err(|_| Error::NotFullDimensional)?, fan, pieces };
        f.validate()?;
        Ok(f)
    }

    /// `x ↦ min_i <x, m_i>` on `domain`, on its coarsest linearity fan.
    pub fn min_of(domain: &Cone, functionals: &[IntVector]) -> Result<SupportFunction> {
        if functionals.is_empty() {
            return Err(Error::EmptyIdeal);
        }
        if !domain.is_pointed() || !domain.is_full_dimensional() {
            return Err(Error::NotFullDimensional);
        }
        let rank = domain.rank();
        let mut ms = functionals.to_vec();
        ms.sort();
        ms.dedup();
        let mut cones: Vec<(Cone, IntVector)> = Vec::new();
        for m in &ms {
            let mut cons = domain.dual_generators();
            for other in &ms {
                if other != m {
                    cons.push(other - m);
                }
            }
            let piece = Cone::new(rank, &cons)?.dual().canonical()?;
            if piece.is_full_dimensional() {
                cones.push((piece, m.clone()));
            }
        }
        let mut rays: Vec<IntVector> = cones.iter().flat_map(|(c, _)| c.rays().to_vec()).collect();
        rays.sort();
        rays.dedup();
        let idx: Vec<Vec<usize>> = cones
            .iter()
            .map(|(c, _)| c.rays().iter().map(|r| rays.binary_search(r).unwrap()).collect())
            .collect();
        let fan = Fan::new(rank, &rays, &idx)?;
        let pieces: BTreeMap<Vec<usize>, IntVector> =
            idx.into_iter().zip(cones.into_iter().map(|(_, m)| m)).collect();
        Ok(SupportFunction { domain: domain.canonical()?, fan, pieces })
    }

    pub fn domain(&self) -> &Cone {
        &self.domain
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn pieces(&self) -> &BTreeMap<Vec<usize>, IntVector> {
        &self.pieces
    }

    pub fn rank(&self) -> usize {
        self.domain.rank()
    }

    /// `phi(x)` for `x` in the domain.
    pub fn evaluate(&self, x: &IntVector) -> Option<BigInt> {
        self.pieces
            .iter()
            .find(|(c, _)| self.fan.cone(c).contains(x))
            .map(|(_, m)| x.dot(m))
    }

    /// Checks the subdivision, agreement on shared rays, the min-of-pieces
    /// identity and nonnegativity.
    pub fn validate(&self) -> Result<()> {
        let violation = |s: String| Err(Error::ConventionViolation(s));
        if !self.fan.subdivides(&self.domain)? {
            return violation("fan does not subdivide the domain".into());
        }
        let maxes = self.fan.maximal_cones();
        if maxes.len() != self.pieces.len() || maxes.iter().any(|c| !self.pieces.contains_key(c)) {
            return violation("pieces do not match the maximal cones".into());
        }
        for (c, m) in &self.pieces {
            for &i in c {
                let r = &self.fan.rays()[i];
                let v = r.dot(m);
                if v.is_negative() {
                    return violation(format!("negative value at ray {r}"));
                }
                for (d, other) in &self.pieces {
                    let w = r.dot(other);
                    if d.contains(&i) && w != v {
                        return violation(format!("pieces disagree at ray {r}"));
                    }
                    if w < v {
                        return violation(format!("value at ray {r} is not the minimum of the pieces"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Values `phi(r)` at every fan ray.
    pub fn ray_values(&self) -> Vec<(IntVector, BigInt)> {
        self.fan
            .rays()
            .iter()
            .map(|r| (r.clone(), self.evaluate(r).expect("fan ray in domain")))
            .collect()
    }

    /// Distinct pieces, sorted.
    pub fn functionals(&self) -> Vec<IntVector> {
        let mut v: Vec<IntVector> = self.pieces.values().cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn sum(&self, other: &SupportFunction) -> Result<SupportFunction> {
        if !self.domain.same_set(&other.domain) {
            return Err(Error::ParentMismatch);
        }
        let sums: Vec<IntVector> = self
            .pieces
            .values()
            .flat_map(|a| other.pieces.values().map(move |b| a + b))
            .collect();
        SupportFunction::min_of(&self.domain, &sums)
    }

    pub fn add_linear(&self, l: &IntVector) -> SupportFunction {
        let pieces = self.pieces.iter().map(|(c, m)| (c.clone(), m + l)).collect();
        SupportFunction { domain: self.domain.clone(), fan: self.fan.clone(), pieces }
    }

    /// The coarsest fan on whose cones the function is linear.
    pub fn linearity_fan(&self) -> Result<Fan> {
        Ok(SupportFunction::min_of(&self.domain, &self.functionals())?.fan)
    }

    /// Pointwise equality, checked at the rays of the common refinement.
    pub fn agrees_with(&self, other: &SupportFunction) -> Result<bool> {
        if !self.domain.same_set(&other.domain) {
            return Ok(false);
        }
        let rank = self.rank();
        let refinement =
            FanMap::new(crate::lattice::IntMatrix::identity(rank), self.fan.clone(), other.fan.clone())?
                .common_refinement_with_preimage()?;
        Ok(refinement.rays().iter().all(|r| self.evaluate(r) == other.evaluate(r)))
    }

    /// The function is strictly convex across every wall of its fan, i.e. the
    /// fan is its own linearity fan.
    pub fn is_strict(&self) -> Result<bool> {
        Ok(self.linearity_fan()? == self.fan)
    }
}

/// `phi_K(x) = min_{t in K} <x, t>` on `cone_of(parent)`.
pub fn support_function_of_ideal(k: &MonoidIdeal) -> Result<SupportFunction> {
    if k.is_empty() {
        return Err(Error::EmptyIdeal);
    }
    let sigma = k.parent.cone_of()?;
    if !k.parent.is_full_dimensional() {
        return Err(Error::NotFullDimensional);
    }
    SupportFunction::min_of(&sigma, &k.generators)
}

/// Generators of `K_phi`, for `parent = sigma^vee ∩ M`.
///
/// `K_phi` is the set of lattice points of the polyhedron `conv(m_tau) +
/// sigma^vee`, so its minimal generators lie in `conv(m_tau)` plus the
/// zonotope of the extremal rays of `sigma^vee`.
pub fn ideal_of_support_function(f: &SupportFunction, parent: &FineMonoid) -> Result<MonoidIdeal> {
    f.validate()?;
    if !parent.is_full_dimensional() || !parent.is_sharp() || !parent.is_saturated() {
        return Err(Error::ParentMismatch);
    }
    if !parent.cone_of()?.same_set(f.domain()) {
        return Err(Error::ParentMismatch);
    }
    let rank = f.rank();
    let dual_rays = f.domain().dual().extremal_rays()?.to_vec();
    let constraints: Vec<(Vec<i128>, i128)> = f
        .ray_values()
        .into_iter()
        .map(|(r, v)| Ok((to_i128(&r)?, big_to_i128(&v)?)))
        .collect::<Result<_>>()?;
    let ms: Vec<Vec<i128>> = f.pieces.values().map(to_i128).collect::<Result<_>>()?;
    let mut rs: Vec<Vec<i128>> = dual_rays.iter().map(to_i128).collect::<Result<_>>()?;
    if !parent.group().is_saturated() || parent.group().rank() < rank {
        rs.extend(parent.generators().iter().map(to_i128).collect::<Result<Vec<_>>>()?);
    }
    let mut lo = vec![i128::MAX; rank];
    let mut hi = vec![i128::MIN; rank];
    for m in &ms {
        for i in 0..rank {
            lo[i] = lo[i].min(m[i]);
            hi[i] = hi[i].max(m[i]);
        }
    }
    for r in &rs {
        for i in 0..rank {
            lo[i] += r[i].min(0);
            hi[i] += r[i].max(0);
        }
    }
    let mut found: Vec<IntVector> = Vec::new();
    let mut point = lo.clone();
    let group = parent.group();
    enumerate_box(0, &lo, &hi, &mut point, &mut |p| {
        if constraints.iter().all(|(r, v)| dot_i128(r, p) >= *v) {
            let v = IntVector(p.iter().map(|&c| BigInt::from(c)).collect());
            // the parent group can be a proper sublattice
            if group.contains(&v) {
                found.push(v);
            }
        }
    });
    MonoidIdeal::minimal_generators(parent, &found)
}

fn enumerate_box(i: usize, lo: &[i128], hi: &[i128], point: &mut Vec<i128>, f: &mut impl FnMut(&[i128])) {
    if i == lo.len() {
        f(point);
        return;
    }
    let mut c = lo[i];
    while c <= hi[i] {
        point[i] = c;
        enumerate_box(i + 1, lo, hi, point, f);
        c += 1;
    }
}

fn dot_i128(a: &[i128], b: &[i128]) -> i128 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn big_to_i128(x: &BigInt) -> Result<i128> {
    x.to_i128().ok_or_else(|| Error::InvalidInput(format!("coordinate {x} too large for enumeration")))
}

fn to_i128(v: &IntVector) -> Result<Vec<i128>> {
    v.0.iter().map(big_to_i128).collect()
}

pub fn linearity_fan(f: &SupportFunction) -> Result<Fan> {
    f.linearity_fan()
}

/// Whether `phi` vanishes identically.
pub fn is_zero_function(f: &SupportFunction) -> bool {
    f.pieces.values().all(|m| m.is_zero()) || f.ray_values().iter().all(|(_, v)| v.is_zero())
}

/// Zero function on a cone.
pub fn zero_function(domain: &Cone) -> Result<SupportFunction> {
    SupportFunction::min_of(domain, &[IntVector::zeros(domain.rank())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::IntMatrix;

    fn v(c: &[i64]) -> IntVector {
        IntVector::from_i64(c)
    }

    fn n2() -> FineMonoid {
        FineMonoid::natural(2)
    }

    fn ideal(gens: &[&[i64]]) -> MonoidIdeal {
        let g: Vec<IntVector> = gens.iter().map(|c| v(c)).collect();
        MonoidIdeal::minimal_generators(&n2(), &g).unwrap()
    }

    #[test]
    fn minimal_generator_examples() {
        assert_eq!(ideal(&[&[2, 0], &[1, 1], &[3, 0]]).generators(), &[v(&[1, 1]), v(&[2, 0])]);
        assert_eq!(ideal(&[&[2, 3]]).generators(), &[v(&[2, 3])]);
        assert_eq!(ideal(&[&[1, 0], &[0, 1]]).generators().len(), 2);
        assert!(matches!(
            MonoidIdeal::minimal_generators(&n2(), &[v(&[-1, 0])]),
            Err(Error::NotInMonoid(_))
        ));
    }

    #[test]
    fn containment_examples() {
        let m = MonoidIdeal::maximal(&n2());
        assert!(m.contains(&v(&[3, 5])));
        assert!(!m.contains(&v(&[0, 0])));
        assert!(!ideal(&[&[2, 0]]).contains(&v(&[1, 1])));
    }

    #[test]
    fn product_examples() {
        let p = ideal(&[&[1, 0]]).product(&ideal(&[&[0, 1]])).unwrap();
        assert_eq!(p.generators(), &[v(&[1, 1])]);
        let k = ideal(&[&[2, 0], &[1, 1]]);
        assert_eq!(k.product(&MonoidIdeal::unit(&n2())).unwrap(), k);
        let m = MonoidIdeal::maximal(&n2());
        let sq = m.product(&m).unwrap();
        assert_eq!(sq.generators(), &[v(&[0, 2]), v(&[1, 1]), v(&[2, 0])]);
        let other = MonoidIdeal::maximal(&FineMonoid::natural(1));
        assert_eq!(m.product(&other), Err(Error::ParentMismatch));
    }

    #[test]
    fn principal_and_extension() {
        assert_eq!(ideal(&[&[2, 3]]).is_principal(), Some(v(&[2, 3])));
        assert_eq!(MonoidIdeal::maximal(&n2()).is_principal(), None);
        let chart = FineMonoid::from_i64(2, &[&[1, 0], &[-1, 1]]);
        let inc = MonoidHom::new(n2(), chart, IntMatrix::identity(2)).unwrap();
        let e = MonoidIdeal::maximal(&n2()).extend(&inc).unwrap();
        assert_eq!(e.is_principal(), Some(v(&[1, 0])));
        let id = MonoidHom::identity(&n2());
        let k = ideal(&[&[2, 0], &[1, 1]]);
        assert_eq!(k.extend(&id).unwrap(), k);
        assert!(MonoidIdeal::unit(&n2()).extend(&inc).unwrap().is_unit());
    }

    #[test]
    fn support_function_examples() {
        let f = support_function_of_ideal(&MonoidIdeal::maximal(&n2())).unwrap();
        assert_eq!(f.pieces().len(), 2);
        assert!(f.fan().ray_index(&v(&[1, 1])).is_some());
        assert_eq!(f.evaluate(&v(&[3, 5])), Some(BigInt::from(3)));
        let g = support_function_of_ideal(&ideal(&[&[1, 0]])).unwrap();
        assert_eq!(g.functionals(), vec![v(&[1, 0])]);
        let h = support_function_of_ideal(&ideal(&[&[2, 0], &[1, 1], &[0, 2]])).unwrap();
        assert_eq!(h.fan(), f.fan());
        assert_eq!(h.functionals(), vec![v(&[0, 2]), v(&[2, 0])]);
        assert_eq!(support_function_of_ideal(&MonoidIdeal::minimal_generators(&n2(), &[]).unwrap()), Err(Error::EmptyIdeal));
    }

    #[test]
    fn ideal_of_function_examples() {
        let q = Cone::orthant(2);
        let f = SupportFunction::min_of(&q, &[v(&[1, 0]), v(&[0, 1])]).unwrap();
        assert_eq!(ideal_of_support_function(&f, &n2()).unwrap(), MonoidIdeal::maximal(&n2()));
        let z = zero_function(&q).unwrap();
        assert!(ideal_of_support_function(&z, &n2()).unwrap().is_unit());
        let l = SupportFunction::min_of(&q, &[v(&[1, 0])]).unwrap();
        assert_eq!(ideal_of_support_function(&l, &n2()).unwrap().generators(), &[v(&[1, 0])]);
        // max of pieces breaks the convention
        let fan = f.fan().clone();
        let mut pieces = BTreeMap::new();
        for (c, m) in f.pieces() {
            let other = f.pieces().values().find(|x| *x != m).unwrap().clone();
            pieces.insert(c.clone(), other);
        }
        assert!(matches!(SupportFunction::new(q, fan, pieces), Err(Error::ConventionViolation(_))));
    }

    #[test]
    fn linearity_fan_examples() {
        let q = Cone::orthant(2);
        let f = SupportFunction::min_of(&q, &[v(&[1, 0]), v(&[0, 1])]).unwrap();
        let lf = f.linearity_fan().unwrap();
        assert_eq!(lf.maximal_cones().len(), 2);
        let l = SupportFunction::min_of(&q, &[v(&[2, 1])]).unwrap();
        assert_eq!(l.linearity_fan().unwrap(), Fan::face_fan(&q).unwrap());
        let a = SupportFunction::min_of(&q, &[v(&[2, 0]), v(&[0, 1])]).unwrap();
        let b = SupportFunction::min_of(&q, &[v(&[1, 0]), v(&[0, 2])]).unwrap();
        let s = a.sum(&b).unwrap();
        let walls: Vec<IntVector> = s.linearity_fan().unwrap().rays().to_vec();
        assert!(walls.contains(&v(&[1, 2])) && walls.contains(&v(&[2, 1])));
        assert_eq!(walls.len(), 4);
    }
}
