//! Rational polyhedral cones and fans.
//!
//! A [`Cone`] is given by generators; its dual and its extremal rays are
//! computed by the double description method and cached. A [`Fan`] stores a
//! sorted ray list and every face of every cone as a set of ray indices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{primitive_from_rational, smith_normal_form, solve_rational, IntMatrix, IntVector, Sublattice};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn insert(&mut self, i: usize) {
        let w = i / 64;
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << (i % 64);
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn is_subset(&self, other: &BitSet) -> bool {
        self.0.iter().enumerate().all(|(i, a)| a & !other.0.get(i).copied().unwrap_or(0) == 0)
    }
}

/// `cone(rays) + span(lineality)`, with `rays` orthogonal to `lineality`.
#[derive(Debug, Clone)]
struct Description {
    rays: Vec<IntVector>,
    lineality: Vec<IntVector>,
}

impl Description {
    fn generators(&self) -> Vec<IntVector> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(-l);
        }
        g.sort();
        g.dedup();
        g
    }
}

/// The cone `{m : <g, m> >= 0 for all g in constraints}`.
fn double_description(rank: usize, constraints: &[IntVector]) -> Description {
    let mut lineality: Vec<IntVector> = (0..rank).map(|i| IntVector::unit(rank, i)).collect();
    let mut rays: Vec<(IntVector, BitSet)> = Vec::new();
    for (k, g) in constraints.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        let values: Vec<BigInt> = lineality.iter().map(|l| g.dot(l)).collect();
        if let Some(p) = values.iter().position(|v| !v.is_zero()) {
            let mut l0 = lineality[p].clone();
            let mut a0 = values[p].clone();
            if a0.is_negative() {
                l0 = -&l0;
                a0 = -a0;
            }
            let mut new_lin = Vec::new();
            for (i, l) in lineality.iter().enumerate() {
                if i == p {
                    continue;
                }
                let w = &l.scale(&a0) - &l0.scale(&values[i]);
                if !w.is_zero() {
                    new_lin.push(w.primitive().unwrap());
                }
            }
            let mut new_rays = Vec::with_capacity(rays.len() + 1);
            for (r, z) in rays {
                let s = g.dot(&r);
                let w = (&r.scale(&a0) - &l0.scale(&s)).primitive().unwrap();
                let mut z = z;
                z.insert(k);
                new_rays.push((w, z));
            }
            let mut z0 = BitSet::default();
            for j in 0..k {
                z0.insert(j);
            }
            new_rays.push((l0.primitive().unwrap(), z0));
            lineality = new_lin;
            rays = new_rays;
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|(r, _)| g.dot(r)).collect();
        let mut next: Vec<(IntVector, BitSet)> = Vec::new();
        for (i, (r, z)) in rays.iter().enumerate() {
            if vals[i].is_positive() {
                next.push((r.clone(), z.clone()));
            } else if vals[i].is_zero() {
                let mut z = z.clone();
                z.insert(k);
                next.push((r.clone(), z));
            }
        }
        for (i, (p, zp)) in rays.iter().enumerate() {
            if !vals[i].is_positive() {
                continue;
            }
            for (j, (n, zn)) in rays.iter().enumerate() {
                if !vals[j].is_negative() {
                    continue;
                }
                let common = zp.and(zn);
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(t, (_, zt))| t == i || t == j || !common.is_subset(zt));
                if !adjacent {
                    continue;
                }
                let w = &n.scale(&vals[i]) - &p.scale(&vals[j]);
                let mut z = common;
                z.insert(k);
                next.push((w.primitive().unwrap(), z));
            }
        }
        rays = next;
    }
    let lin = if lineality.is_empty() {
        Vec::new()
    } else {
        Sublattice::generated_by(rank, &lineality).saturation().basis().to_vec()
    };
    let mut out: Vec<IntVector> = rays.into_iter().map(|(r, _)| project_off(&r, &lin)).collect();
    out.sort();
    out.dedup();
    Description { rays: out, lineality: lin }
}

/// Orthogonal projection of `r` onto the complement of `span(lin)`, made primitive.
fn project_off(r: &IntVector, lin: &[IntVector]) -> IntVector {
    if lin.is_empty() {
        return r.clone();
    }
    let k = lin.len();
    let gram = IntMatrix::new(
        k,
        k,
        lin.iter().flat_map(|a| lin.iter().map(move |b| a.dot(b))).collect(),
    )
    .unwrap();
    let rhs: Vec<BigRational> = lin.iter().map(|a| BigRational::from_integer(a.dot(r))).collect();
    let c = solve_rational(&gram, &rhs).expect("independent lineality basis");
    let p: Vec<BigRational> = (0..r.len())
        .map(|i| {
            let mut x = BigRational::from_integer(r.0[i].clone());
            for (j, l) in lin.iter().enumerate() {
                x -= &c[j] * BigRational::from_integer(l.0[i].clone());
            }
            x
        })
        .collect();
    primitive_from_rational(&p).expect("ray outside the lineality space")
}

#[derive(Debug)]
struct ConeData {
    dual: Description,
    primal: Description,
}

/// A rational polyhedral cone `cone(rays)` in `Z^rank`.
///
/// The stored generators are primitive, deduplicated and sorted; they need
/// not be extremal.
#[derive(Clone)]
pub struct Cone {
    rank: usize,
    rays: Vec<IntVector>,
    data: Arc<OnceLock<ConeData>>,
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.rays == other.rays
    }
}

impl Eq for Cone {}

impl Hash for Cone {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.rays.hash(state);
    }
}

impl PartialOrd for Cone {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cone {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank, &self.rays).cmp(&(other.rank, &other.rays))
    }
}

impl fmt::Debug for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cone{:?}", self.rays)
    }
}

impl Cone {
    /// Zero generators are dropped; the rest are made primitive.
    pub fn new(rank: usize, gens: &[IntVector]) -> Result<Cone> {
        let mut rays = Vec::with_capacity(gens.len());
        for g in gens {
            if g.len() != rank {
                return Err(Error::DimensionMismatch(format!("ray {g} in rank {rank}")));
            }
            if !g.is_zero() {
                rays.push(g.primitive()?);
            }
        }
        rays.sort();
        rays.dedup();
        Ok(Cone { rank, rays, data: Arc::new(OnceLock::new()) })
    }

    pub fn from_i64(rank: usize, gens: &[&[i64]]) -> Cone {
        let g: Vec<IntVector> = gens.iter().map(|r| IntVector::from_i64(r)).collect();
        Cone::new(rank, &g).expect("valid generators")
    }

    pub fn zero(rank: usize) -> Cone {
        Cone::new(rank, &[]).unwrap()
    }

    /// The positive orthant.
    pub fn orthant(rank: usize) -> Cone {
        let g: Vec<IntVector> = (0..rank).map(|i| IntVector::unit(rank, i)).collect();
        Cone::new(rank, &g).unwrap()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    fn data(&self) -> &ConeData {
        self.data.get_or_init(|| {
            let dual = double_description(self.rank, &self.rays);
            let primal = double_description(self.rank, &dual.generators());
            ConeData { dual, primal }
        })
    }

    /// Generators of the dual cone: its extremal rays plus both signs of a
    /// lineality basis.
    pub fn dual_generators(&self) -> Vec<IntVector> {
        self.data().dual.generators()
    }

    /// `{m : <x, m> >= 0 for all x in self}` in the dual lattice.
    pub fn dual(&self) -> Cone {
        Cone::new(self.rank, &self.dual_generators()).unwrap()
    }

    pub fn is_pointed(&self) -> bool {
        self.data().primal.lineality.is_empty()
    }

    /// A basis of the largest linear subspace contained in the cone.
    pub fn lineality(&self) -> &[IntVector] {
        &self.data().primal.lineality
    }

    /// Minimal generators of a pointed cone.
    pub fn extremal_rays(&self) -> Result<&[IntVector]> {
        if !self.is_pointed() {
            return Err(Error::NotPointed);
        }
        Ok(&self.data().primal.rays)
    }

    /// The same cone generated by its extremal rays.
    pub fn canonical(&self) -> Result<Cone> {
        Cone::new(self.rank, self.extremal_rays()?)
    }

    pub fn dimension(&self) -> usize {
        if self.rays.is_empty() {
            return 0;
        }
        IntMatrix::from_row_vectors(self.rank, &self.rays).unwrap().rank()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dimension() == self.rank
    }

    pub fn contains(&self, x: &IntVector) -> bool {
        x.len() == self.rank && self.data().dual.generators().iter().all(|m| !x.dot(m).is_negative())
    }

    /// `x` lies in the relative interior.
    pub fn contains_in_relative_interior(&self, x: &IntVector) -> bool {
        if !self.contains(x) {
            return false;
        }
        self.data().dual.rays.iter().all(|m| {
            let vanishes_on_cone = self.rays.iter().all(|r| r.dot(m).is_zero());
            vanishes_on_cone || x.dot(m).is_positive()
        })
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays.iter().all(|r| self.contains(r))
    }

    /// Equality as subsets of `R^rank`.
    pub fn same_set(&self, other: &Cone) -> bool {
        self.rank == other.rank && self.contains_cone(other) && other.contains_cone(self)
    }

    pub fn intersect(&self, other: &Cone) -> Result<Cone> {
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch("intersecting cones of different rank".into()));
        }
        let mut cons = self.dual_generators();
        cons.extend(other.dual_generators());
        let d = double_description(self.rank, &cons);
        Cone::new(self.rank, &d.generators())
    }

    /// `{x in self : a x in target}` for a lattice map `a`.
    pub fn preimage_within(&self, a: &IntMatrix, target: &Cone) -> Result<Cone> {
        if a.cols() != self.rank || a.rows() != target.rank {
            return Err(Error::DimensionMismatch("map does not match cone ranks".into()));
        }
        let at = a.transpose();
        let mut cons = self.dual_generators();
        for m in target.dual_generators() {
            cons.push(at.apply(&m)?);
        }
        let d = double_description(self.rank, &cons);
        Cone::new(self.rank, &d.generators())
    }

    /// `cone(a(rays))`.
    pub fn image(&self, a: &IntMatrix) -> Result<Cone> {
        let imgs = self.rays.iter().map(|r| a.apply(r)).collect::<Result<Vec<_>>>()?;
        Cone::new(a.rows(), &imgs)
    }

    /// Faces as subsets of the extremal ray list (indices into `extremal_rays`).
    pub fn face_index_sets(&self) -> Result<BTreeSet<Vec<usize>>> {
        let ext = self.extremal_rays()?;
        let all: Vec<usize> = (0..ext.len()).collect();
        let mut facets: BTreeSet<Vec<usize>> = BTreeSet::new();
        for m in &self.data().dual.rays {
            let f: Vec<usize> = all.iter().copied().filter(|&i| ext[i].dot(m).is_zero()).collect();
            if f.len() < ext.len() {
                facets.insert(f);
            }
        }
        let mut faces: BTreeSet<Vec<usize>> = BTreeSet::new();
        faces.insert(all.clone());
        let mut frontier: Vec<Vec<usize>> = vec![all];
        while let Some(f) = frontier.pop() {
            for g in &facets {
                let i: Vec<usize> = f.iter().copied().filter(|x| g.binary_search(x).is_ok()).collect();
                if faces.insert(i.clone()) {
                    frontier.push(i);
                }
            }
        }
        // the apex of a pointed cone is always a face
        faces.insert(Vec::new());
        Ok(faces)
    }

    pub fn faces(&self) -> Result<Vec<Cone>> {
        let ext = self.extremal_rays()?.to_vec();
        let mut fs: Vec<Cone> = self
            .face_index_sets()?
            .into_iter()
            .map(|s| Cone::new(self.rank, &s.iter().map(|&i| ext[i].clone()).collect::<Vec<_>>()).unwrap())
            .collect();
        fs.sort_by(|a, b| a.rays.len().cmp(&b.rays.len()).then_with(|| a.cmp(b)));
        Ok(fs)
    }

    pub fn is_simplicial(&self) -> Result<bool> {
        let ext = self.extremal_rays()?;
        Ok(ext.is_empty() || IntMatrix::from_row_vectors(self.rank, ext).unwrap().rank() == ext.len())
    }

    /// The extremal rays extend to a lattice basis.
    pub fn is_smooth(&self) -> Result<bool> {
        let ext = self.extremal_rays()?;
        if !self.is_simplicial()? {
            return Ok(false);
        }
        Ok(Sublattice::generated_by(self.rank, ext).is_saturated())
    }

    /// Index of the lattice generated by the extremal rays inside the lattice
    /// points of their span; only defined for simplicial cones.
    pub fn multiplicity(&self) -> Result<BigInt> {
        let ext = self.extremal_rays()?;
        if !self.is_simplicial()? {
            return Err(Error::InvalidInput("multiplicity of a non-simplicial cone".into()));
        }
        if ext.is_empty() {
            return Ok(BigInt::one());
        }
        // torsion of Z^n / L is sat(L) / L
        let m = IntMatrix::from_row_vectors(self.rank, ext).unwrap();
        let (d, _, _) = smith_normal_form(&m);
        let mut idx = BigInt::one();
        for i in 0..ext.len() {
            idx *= d.get(i, i);
        }
        Ok(idx)
    }
}

/// Lattice points `sum lambda_i r_i` with `0 <= lambda_i < 1` for linearly
/// independent `rays`, together with their coefficients. Includes the origin.
pub fn parallelepiped_points(rank: usize, rays: &[IntVector]) -> Result<Vec<(IntVector, Vec<BigRational>)>> {
    let k = rays.len();
    if k == 0 {
        return Ok(vec![(IntVector::zeros(rank), Vec::new())]);
    }
    let sat = Sublattice::generated_by(rank, rays).saturation();
    if sat.rank() != k {
        return Err(Error::InvalidInput("parallelepiped of dependent rays".into()));
    }
    let coords: Vec<IntVector> = rays.iter().map(|r| sat.coords(r).expect("ray in saturation")).collect();
    // columns are ray coordinates
    let a = IntMatrix::from_column_vectors(k, &coords)?;
    let (d, u, _) = smith_normal_form(&a);
    let uinv = u.inverse_unimodular()?;
    let diag: Vec<BigInt> = (0..k).map(|i| d.get(i, i).clone()).collect();
    let mut out = Vec::new();
    let mut z = vec![BigInt::zero(); k];
    loop {
        let x = uinv.apply(&IntVector(z.clone()))?;
        let xr: Vec<BigRational> = x.0.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        let lambda = solve_rational(&a, &xr).expect("independent");
        let frac: Vec<BigRational> = lambda.iter().map(|l| l - l.floor()).collect();
        let mut p = vec![BigRational::zero(); rank];
        for (i, f) in frac.iter().enumerate() {
            for (j, pj) in p.iter_mut().enumerate() {
                *pj += f * BigRational::from_integer(rays[i].0[j].clone());
            }
        }
        let pi = IntVector(p.into_iter().map(|c| c.to_integer()).collect());
        out.push((pi, frac));
        // odometer over z_i in [0, d_i)
        let mut i = 0;
        loop {
            if i == k {
                out.sort_by(|a, b| a.0.cmp(&b.0));
                return Ok(out);
            }
            z[i] += 1;
            if z[i] < diag[i] {
                break;
            }
            z[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// Whether the full-dimensional-within-`cone` pieces tile `cone`: every piece
/// lies in `cone`, pieces of top dimension exist (unless `cone` is the apex),
/// and every facet of a top piece that does not lie on the relative boundary
/// of `cone` is shared by exactly two top pieces. Pieces must meet along faces.
pub fn pieces_tile_cone(cone: &Cone, pieces: &[Cone]) -> Result<bool> {
    let dim = cone.dimension();
    if dim == 0 {
        return Ok(true);
    }
    if pieces.iter().any(|p| !cone.contains_cone(p)) {
        return Ok(false);
    }
    let top: Vec<&Cone> = pieces.iter().filter(|p| p.dimension() == dim).collect();
    if top.is_empty() {
        return Ok(false);
    }
    let mut facet_count: BTreeMap<Vec<IntVector>, usize> = BTreeMap::new();
    for p in &top {
        let ext = p.extremal_rays()?.to_vec();
        for f in p.face_index_sets()? {
            let fc = Cone::new(cone.rank, &f.iter().map(|&i| ext[i].clone()).collect::<Vec<_>>())?;
            if fc.dimension() + 1 != dim {
                continue;
            }
            *facet_count.entry(fc.rays.clone()).or_default() += 1;
        }
    }
    for (rays, n) in facet_count {
        let centre = rays.iter().fold(IntVector::zeros(cone.rank), |a, r| &a + r);
        let interior = cone.contains_in_relative_interior(&centre);
        if (interior && n != 2) || (!interior && n != 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A fan: a sorted list of primitive rays and all cones as ray-index sets,
/// closed under faces (the empty set is the apex).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fan {
    rank: usize,
    rays: Vec<IntVector>,
    cones: BTreeSet<Vec<usize>>,
}

impl fmt::Debug for Fan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fan{{rays: {:?}, maximal: {:?}}}", self.rays, self.maximal_cones())
    }
}

impl Fan {
    /// Builds the fan generated by the given cones.
    ///
    /// Each index set must list exactly the extremal rays of a pointed cone.
    /// Rays are re-sorted and faces are added. Every ray must occur in some cone.
    pub fn new(rank: usize, rays: &[IntVector], cones: &[Vec<usize>]) -> Result<Fan> {
        let mut prim = Vec::with_capacity(rays.len());
        for r in rays {
            if r.len() != rank {
                return Err(Error::DimensionMismatch(format!("ray {r} in rank {rank}")));
            }
            prim.push(r.primitive()?);
        }
        let mut order: Vec<usize> = (0..prim.len()).collect();
        order.sort_by(|&a, &b| prim[a].cmp(&prim[b]));
        let mut sorted: Vec<IntVector> = Vec::new();
        let mut remap = vec![0usize; prim.len()];
        for &i in &order {
            if sorted.last() != Some(&prim[i]) {
                sorted.push(prim[i].clone());
            }
            remap[i] = sorted.len() - 1;
        }
        let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
        all.insert(Vec::new());
        for c in cones {
            let mut idx: Vec<usize> = Vec::with_capacity(c.len());
            for &i in c {
                if i >= prim.len() {
                    return Err(Error::InvalidFan(format!("ray index {i} out of range")));
                }
                idx.push(remap[i]);
            }
            idx.sort_unstable();
            idx.dedup();
            if all.contains(&idx) {
                continue;
            }
            let cone = Cone::new(rank, &idx.iter().map(|&i| sorted[i].clone()).collect::<Vec<_>>())?;
            let ext = cone.extremal_rays().map_err(|_| Error::InvalidFan(format!("cone {idx:?} is not pointed")))?;
            if ext.len() != idx.len() {
                return Err(Error::InvalidFan(format!("cone {idx:?} lists non-extremal rays")));
            }
            // extremal rays are sorted the same way as idx
            for f in cone.face_index_sets()? {
                all.insert(f.iter().map(|&j| idx[j]).collect());
            }
        }
        for i in 0..sorted.len() {
            if !all.contains(&vec![i]) {
                return Err(Error::InvalidFan(format!("ray {} is not a cone", sorted[i])));
            }
        }
        Ok(Fan { rank, rays: sorted, cones: all })
    }

    /// The fan whose cones are the faces of `c`.
    pub fn face_fan(c: &Cone) -> Result<Fan> {
        let ext = c.extremal_rays()?.to_vec();
        let all: Vec<usize> = (0..ext.len()).collect();
        Fan::new(c.rank, &ext, &[all])
    }

    /// A fan with only the apex cone.
    pub fn trivial(rank: usize) -> Fan {
        let mut cones = BTreeSet::new();
        cones.insert(Vec::new());
        Fan { rank, rays: Vec::new(), cones }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVector] {
        &self.rays
    }

    /// All cones, including the apex, in index-set order.
    pub fn cone_index_sets(&self) -> &BTreeSet<Vec<usize>> {
        &self.cones
    }

    pub fn ray_index(&self, v: &IntVector) -> Option<usize> {
        self.rays.binary_search(v).ok()
    }

    pub fn cone(&self, idx: &[usize]) -> Cone {
        Cone::new(self.rank, &idx.iter().map(|&i| self.rays[i].clone()).collect::<Vec<_>>()).unwrap()
    }

    pub fn maximal_cones(&self) -> Vec<Vec<usize>> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|d| d.len() > c.len() && c.iter().all(|x| d.binary_search(x).is_ok())))
            .cloned()
            .collect()
    }

    pub fn dimension(&self) -> usize {
        self.maximal_cones().iter().map(|c| self.cone(c).dimension()).max().unwrap_or(0)
    }

    /// Every maximal cone is unimodular.
    pub fn is_smooth(&self) -> bool {
        self.maximal_cones().iter().all(|c| self.cone(c).is_smooth().unwrap_or(false))
    }

    /// The smallest cone containing `x`, if `x` is in the support.
    pub fn cone_containing(&self, x: &IntVector) -> Option<Vec<usize>> {
        self.cones.iter().filter(|c| self.cone(c).contains(x)).min_by_key(|c| c.len()).cloned()
    }

    pub fn support_contains(&self, x: &IntVector) -> bool {
        self.maximal_cones().iter().any(|c| self.cone(c).contains(x))
    }

    /// Checks pointedness, face closure, and that any two cones meet in a common face.
    pub fn check_axioms(&self) -> Result<()> {
        let mut faces: BTreeMap<&Vec<usize>, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for c in &self.cones {
            let cone = self.cone(c);
            let ext = cone
                .extremal_rays()
                .map_err(|_| Error::InvalidFan(format!("cone {c:?} is not pointed")))?;
            if ext.len() != c.len() {
                return Err(Error::InvalidFan(format!("cone {c:?} lists non-extremal rays")));
            }
            let fs: BTreeSet<Vec<usize>> =
                cone.face_index_sets()?.into_iter().map(|f| f.iter().map(|&j| c[j]).collect()).collect();
            for f in &fs {
                if !self.cones.contains(f) {
                    return Err(Error::InvalidFan(format!("face {f:?} of {c:?} missing")));
                }
            }
            faces.insert(c, fs);
        }
        let list: Vec<&Vec<usize>> = self.cones.iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                let common: Vec<usize> = a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect();
                if !faces[a].contains(&common) || !faces[b].contains(&common) {
                    return Err(Error::InvalidFan(format!("{a:?} and {b:?} share a non-face")));
                }
                let meet = self.cone(a).intersect(&self.cone(b))?;
                if !meet.same_set(&self.cone(&common)) {
                    return Err(Error::InvalidFan(format!("{a:?} and {b:?} overlap beyond {common:?}")));
                }
            }
        }
        Ok(())
    }

    /// Whether the support of this fan is exactly `c`.
    pub fn subdivides(&self, c: &Cone) -> Result<bool> {
        let pieces: Vec<Cone> = self.maximal_cones().iter().map(|m| self.cone(m)).collect();
        if c.dimension() == 0 {
            return Ok(pieces.iter().all(|p| p.dimension() == 0));
        }
        pieces_tile_cone(c, &pieces)
    }

    /// Star subdivision at a primitive vector of the support.
    pub fn stellar_subdivision(&self, v: &IntVector) -> Result<Fan> {
        if v.len() != self.rank {
            return Err(Error::DimensionMismatch(format!("vector {v} in rank {}", self.rank)));
        }
        if !v.is_primitive() {
            return Err(Error::NotPrimitive);
        }
        if self.ray_index(v).is_some() {
            return Ok(self.clone());
        }
        let containing: Vec<&Vec<usize>> = self.cones.iter().filter(|c| self.cone(c).contains(v)).collect();
        if containing.is_empty() {
            return Err(Error::NotInSupport);
        }
        let mut rays = self.rays.clone();
        rays.push(v.clone());
        let vi = rays.len() - 1;
        let mut cones: Vec<Vec<usize>> = self
            .cones
            .iter()
            .filter(|c| !containing.contains(c))
            .cloned()
            .collect();
        for c in &containing {
            for f in &self.cones {
                if containing.contains(&f) || !f.iter().all(|x| c.binary_search(x).is_ok()) {
                    continue;
                }
                let mut g = f.clone();
                g.push(vi);
                cones.push(g);
            }
        }
        Fan::new(self.rank, &rays, &cones)
    }
}

/// Refines `f` to a fan whose cones are all unimodular. Returns the fan and
/// the subdivision centres in order.
pub fn resolve_to_smooth(f: &Fan) -> Result<(Fan, Vec<IntVector>)> {
    let mut fan = f.clone();
    let mut centres = Vec::new();
    loop {
        let mut nonsimplicial: Vec<(usize, Vec<IntVector>)> = Vec::new();
        let mut singular: Vec<(BigInt, Vec<IntVector>)> = Vec::new();
        for c in fan.cone_index_sets() {
            let cone = fan.cone(c);
            if !cone.is_pointed() {
                return Err(Error::NotPointed);
            }
            if !cone.is_simplicial()? {
                nonsimplicial.push((cone.dimension(), cone.rays().to_vec()));
            } else if !cone.is_smooth()? {
                singular.push((cone.multiplicity()?, cone.rays().to_vec()));
            }
        }
        let centre = if let Some((_, rays)) = nonsimplicial.into_iter().min() {
            rays.iter().fold(IntVector::zeros(fan.rank()), |a, r| &a + r).primitive()?
        } else if let Some(best_mult) = singular.iter().map(|(m, _)| m.clone()).max() {
            let rays = singular
                .into_iter()
                .filter(|(m, _)| *m == best_mult)
                .map(|(_, r)| r)
                .min()
                .expect("nonempty");
            best_parallelepiped_point(fan.rank(), &rays)?
        } else {
            return Ok((fan, centres));
        };
        fan = fan.stellar_subdivision(&centre)?;
        centres.push(centre);
    }
}

/// The nonzero parallelepiped point minimizing the largest coefficient,
/// lexicographically least among ties.
fn best_parallelepiped_point(rank: usize, rays: &[IntVector]) -> Result<IntVector> {
    let pts = parallelepiped_points(rank, rays)?;
    pts.into_iter()
        .filter(|(p, _)| !p.is_zero())
        .map(|(p, l)| (l.into_iter().max().unwrap_or_else(BigRational::zero), p))
        .min()
        .map(|(_, p)| p)
        .ok_or(Error::InvalidInput("smooth cone has no interior parallelepiped point".into()))
}

/// A lattice map `matrix: Z^source.rank -> Z^target.rank` between fans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FanMap {
    pub matrix: IntMatrix,
    pub source: Fan,
    pub target: Fan,
}

/// Outcome of [`FanMap::maps_cones_onto_cones`]; `witness` is the first
/// source cone whose image is not a target cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeImageCheck {
    pub holds: bool,
    pub witness: Option<Vec<usize>>,
}

impl FanMap {
    pub fn new(matrix: IntMatrix, source: Fan, target: Fan) -> Result<FanMap> {
        if matrix.cols() != source.rank() || matrix.rows() != target.rank() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix between ranks {} and {}",
                matrix.rows(),
                matrix.cols(),
                source.rank(),
                target.rank()
            )));
        }
        Ok(FanMap { matrix, source, target })
    }

    /// The fan `{tau ∩ matrix^{-1}(sigma')}` refining the source.
    pub fn common_refinement_with_preimage(&self) -> Result<Fan> {
        let targets: Vec<Cone> = self.target.maximal_cones().iter().map(|c| self.target.cone(c)).collect();
        let mut pieces: Vec<Cone> = Vec::new();
        for t in self.source.maximal_cones() {
            let tau = self.source.cone(&t);
            let mut local = Vec::new();
            for s in &targets {
                let p = tau.preimage_within(&self.matrix, s)?.canonical()?;
                if !local.contains(&p) {
                    local.push(p);
                }
            }
            if !pieces_tile_cone(&tau, &local)? {
                return Err(Error::SupportNotMapped);
            }
            for p in local {
                if !pieces.contains(&p) {
                    pieces.push(p);
                }
            }
        }
        let mut rays: Vec<IntVector> = pieces.iter().flat_map(|p| p.rays().to_vec()).collect();
        rays.sort();
        rays.dedup();
        let cones: Vec<Vec<usize>> = pieces
            .iter()
            .map(|p| p.rays().iter().map(|r| rays.binary_search(r).unwrap()).collect())
            .collect();
        Fan::new(self.source.rank(), &rays, &cones)
    }

    /// Image of a source cone as a canonical cone of the target lattice.
    pub fn image_of(&self, idx: &[usize]) -> Result<Cone> {
        self.source.cone(idx).image(&self.matrix)?.canonical()
    }

    /// Whether every source cone maps onto a cone of the target fan.
    ///
    /// Cones are visited by decreasing dimension, then in index-set order.
    pub fn maps_cones_onto_cones(&self) -> ConeImageCheck {
        let mut order: Vec<&Vec<usize>> = self.source.cone_index_sets().iter().collect();
        order.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        for c in order {
            let ok = match self.image_of(c) {
                Ok(img) => {
                    let idx: Option<Vec<usize>> = img.rays().iter().map(|r| self.target.ray_index(r)).collect();
                    match idx {
                        Some(mut i) => {
                            i.sort_unstable();
                            self.target.cone_index_sets().contains(&i)
                        }
                        None => false,
                    }
                }
                Err(_) => false,
            };
            if !ok {
                return ConeImageCheck { holds: false, witness: Some(c.clone()) };
            }
        }
        ConeImageCheck { holds: true, witness: None }
    }
}

/// Primitive generator of a ray's image, or `None` when the image is zero.
pub fn primitive_image(a: &IntMatrix, r: &IntVector) -> Result<Option<IntVector>> {
    let img = a.apply(r)?;
    if img.is_zero() {
        Ok(None)
    } else {
        Ok(Some(img.primitive()?))
    }
}

/// `lcm` of denominators, used when clearing fractions of ray coefficients.
pub fn lcm_of_denominators(v: &[BigRational]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}
