//! Log blow-ups at chart level.
//!
//! The blow-up of `Spec P` along `K = (t_0, ..., t_r)` is covered by the
//! charts `P<t_j - t_i>`. Its combinatorics is the linearity fan of the
//! support function of `K`: the chart of `t_i` has cone the domain where
//! `t_i` attains the minimum.

use std::collections::BTreeMap;

use num::integer::Integer;
use num::rational::BigRational;
use num::{BigInt, One, Zero};

use crate::error::{Error, Result};
use crate::homs::MonoidHom;
use crate::ideals::{ideal_of_support_function, support_function_of_ideal, MonoidIdeal, SupportFunction};
use crate::lattice::{solve_rational, IntMatrix, IntVector};
use crate::lp::{LinearProgram, LpOutcome};
use crate::monoids::FineMonoid;
use crate::polyhedra::Fan;

pub const DEFAULT_HEIGHT_BOUND: u64 = 64;
pub const MAX_HEIGHT_BOUND: u64 = 4096;

/// `P<t_j - t : t_j in K>`, saturated on request.
pub fn chart_monoid(p: &FineMonoid, k: &MonoidIdeal, t: &IntVector, saturated: bool) -> Result<FineMonoid> {
    if !k.generators().contains(t) {
        return Err(Error::NotAGenerator);
    }
    let mut gens = p.generators().to_vec();
    gens.extend(k.generators().iter().map(|g| g - t));
    let m = FineMonoid::new(p.rank(), &gens)?;
    Ok(if saturated { m.saturate() } else { m.minimized() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chart {
    pub pivot: IntVector,
    /// Index set of the maximal fan cone dual to this chart.
    pub cone: Vec<usize>,
    pub monoid: FineMonoid,
    pub inclusion: MonoidHom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupModel {
    pub base: FineMonoid,
    pub ideal: MonoidIdeal,
    pub function: SupportFunction,
    pub fan: Fan,
    pub charts: Vec<Chart>,
    pub saturated: bool,
}

/// Charts are built for the generators whose linearity domain is
/// full-dimensional; the others lie on walls and give non-sharp charts that
/// are localisations of these.
pub fn blow_up(p: &FineMonoid, k: &MonoidIdeal, saturated: bool) -> Result<BlowupModel> {
    if k.parent() != p && !k.parent().same_set(p) {
        return Err(Error::ParentMismatch);
    }
    if k.is_empty() {
        return Err(Error::EmptyIdeal);
    }
    if !p.is_sharp() {
        return Err(Error::NotSharp);
    }
    let function = support_function_of_ideal(k)?;
    let fan = function.fan().clone();
    let mut charts = Vec::with_capacity(function.pieces().len());
    for (cone, pivot) in function.pieces() {
        let monoid = chart_monoid(p, k, pivot, saturated)?;
        let inclusion = MonoidHom::new(p.clone(), monoid.clone(), IntMatrix::identity(p.rank()))?;
        match k.extend(&inclusion)?.is_principal() {
            Some(g) if &g == pivot => {}
            other => {
                return Err(Error::InvertibilityFailure(format!(
                    "chart of {pivot}: extended ideal generated by {other:?}"
                )))
            }
        }
        charts.push(Chart { pivot: pivot.clone(), cone: cone.clone(), monoid, inclusion });
    }
    charts.sort_by(|a, b| a.pivot.cmp(&b.pivot));
    Ok(BlowupModel { base: p.clone(), ideal: k.clone(), function, fan, charts, saturated })
}

impl BlowupModel {
    /// Every chart sees the extended ideal as principal, generated by its pivot.
    pub fn verify_invertibility(&self) -> Result<bool> {
        for c in &self.charts {
            if self.ideal.extend(&c.inclusion)?.is_principal().as_ref() != Some(&c.pivot) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// A strictly superadditive integral function on `target`, as rational
/// coefficients of the ray values.
struct StrictProgram {
    /// `m_tau = coeffs * v` for each maximal cone.
    pieces: Vec<(Vec<usize>, Vec<Vec<BigRational>>)>,
    lp: LinearProgram,
}

fn q(n: &BigInt) -> BigRational {
    BigRational::from_integer(n.clone())
}

fn build_program(target: &Fan) -> Result<StrictProgram> {
    let rank = target.rank();
    let rays = target.rays();
    let nr = rays.len();
    let maxes = target.maximal_cones();
    let mut lp = LinearProgram::new(nr);
    let mut pieces = Vec::with_capacity(maxes.len());
    for c in &maxes {
        // a basis among the rays of c, greedily in index order
        let mut sel: Vec<usize> = Vec::new();
        for &i in c {
            let mut trial: Vec<IntVector> = sel.iter().map(|&j| rays[j].clone()).collect();
            trial.push(rays[i].clone());
            if IntMatrix::from_row_vectors(rank, &trial)?.rank() == trial.len() {
                sel.push(i);
            }
        }
        if sel.len() != rank {
            return Err(Error::NotFullDimensional);
        }
        let b = IntMatrix::from_row_vectors(rank, &sel.iter().map(|&j| rays[j].clone()).collect::<Vec<_>>())?;
        // column s of the inverse
        let mut coeffs = vec![vec![BigRational::zero(); nr]; rank];
        for (s, &j) in sel.iter().enumerate() {
            let mut e = vec![BigRational::zero(); rank];
            e[s] = BigRational::one();
            let col = solve_rational(&b, &e).ok_or(Error::NotABasis)?;
            for k in 0..rank {
                coeffs[k][j] = col[k].clone();
            }
        }
        for &i in c {
            if !sel.contains(&i) {
                let mut row = pair_row(&coeffs, &rays[i]);
                row[i] -= BigRational::one();
                lp.add_eq(row, BigRational::zero());
            }
        }
        pieces.push((c.clone(), coeffs));
    }
    for (a, (ca, coeffs)) in pieces.iter().enumerate() {
        for (b, (cb, _)) in pieces.iter().enumerate() {
            if a == b {
                continue;
            }
            let shared: Vec<IntVector> =
                ca.iter().filter(|x| cb.contains(x)).map(|&i| rays[i].clone()).collect();
            if shared.is_empty() || IntMatrix::from_row_vectors(rank, &shared)?.rank() + 1 != rank {
                continue;
            }
            for &i in cb {
                if !ca.contains(&i) {
                    let mut row = pair_row(coeffs, &rays[i]);
                    row[i] -= BigRational::one();
                    lp.add_ge(row, BigRational::one());
                }
            }
        }
    }
    lp.set_objective(vec![BigRational::one(); nr]);
    Ok(StrictProgram { pieces, lp })
}

/// Coefficients of `<r, m>` as a linear form in the ray values.
fn pair_row(coeffs: &[Vec<BigRational>], r: &IntVector) -> Vec<BigRational> {
    let nr = coeffs[0].len();
    let mut row = vec![BigRational::zero(); nr];
    for (k, rk) in r.coords().iter().enumerate() {
        if rk.is_zero() {
            continue;
        }
        let rk = q(rk);
        for (x, c) in row.iter_mut().zip(&coeffs[k]) {
            *x += &rk * c;
        }
    }
    row
}

/// A strictly superadditive integral support function with linearity fan
/// `target`: an optimal vertex of the exact program minimising the sum of
/// ray values, scaled to clear denominators.
pub fn strict_function(p: &FineMonoid, target: &Fan, height_bound: u64) -> Result<SupportFunction> {
    if !p.is_sharp() {
        return Err(Error::NotSharp);
    }
    if !p.is_full_dimensional() {
        return Err(Error::NotFullDimensional);
    }
    let sigma = p.cone_of()?;
    if target.rank() != p.rank() || !target.subdivides(&sigma)? {
        return Err(Error::NotASubdivision("support of the fan differs from the cone of the monoid".into()));
    }
    let program = build_program(target)?;
    let values = match program.lp.minimize() {
        LpOutcome::Optimal(v) => v,
        _ => return Err(Error::NoStrictFunctionWithinBound(height_bound)),
    };
    let mut pieces_q: Vec<(Vec<usize>, Vec<BigRational>)> = Vec::new();
    let mut lcm = BigInt::one();
    for x in &values {
        lcm = lcm.lcm(x.denom());
    }
    for (c, coeffs) in &program.pieces {
        let m: Vec<BigRational> = coeffs
            .iter()
            .map(|row| row.iter().zip(&values).map(|(a, b)| a * b).sum())
            .collect();
        for x in &m {
            lcm = lcm.lcm(x.denom());
        }
        pieces_q.push((c.clone(), m));
    }
    let height = values.iter().map(|x| (x * q(&lcm)).to_integer()).max().unwrap_or_default();
    let mut bound = height_bound.max(1);
    while BigInt::from(bound) < height {
        if bound >= MAX_HEIGHT_BOUND {
            return Err(Error::NoStrictFunctionWithinBound(bound));
        }
        bound = (bound * 2).min(MAX_HEIGHT_BOUND);
    }
    let pieces: BTreeMap<Vec<usize>, IntVector> = pieces_q
        .into_iter()
        .map(|(c, m)| {
            let v = IntVector(m.iter().map(|x| (x * q(&lcm)).to_integer()).collect());
            (c, v)
        })
        .collect();
    SupportFunction::new(sigma, target.clone(), pieces)
}

/// An ideal of `p` whose blow-up fan is `target`.
pub fn subdivision_to_ideal(p: &FineMonoid, target: &Fan, height_bound: u64) -> Result<MonoidIdeal> {
    let f = strict_function(p, target, height_bound)?;
    let k = ideal_of_support_function(&f, p)?;
    let got = support_function_of_ideal(&k)?;
    if got.fan() != target {
        return Err(Error::NotASubdivision("realised ideal has a different linearity fan".into()));
    }
    Ok(k)
}
