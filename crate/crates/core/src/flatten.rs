//! Toric flattening of an injective local homomorphism `h: Q -> P` of sharp
//! fs monoids.
//!
//! The dual map `Phi = h^T` sends the cone of `P` into the cone of `Q`. Each
//! ray of the source contributes a support function on the base with a wall
//! through its image; their sum cuts the base fan so that cones map onto
//! cones. After smoothing, every chart of the fs base change is checked for
//! integrality directly.

use num::BigInt;
use num::Signed;
use rayon::prelude::*;

use crate::blowup::{strict_function, DEFAULT_HEIGHT_BOUND};
use crate::error::{Error, Result};
use crate::homs::{
    is_integral_bounded, is_integral_with, validate_counterexample, IntegralityOptions, IntegralityStatus,
    IntegralityVerdict, MonoidHom, DEFAULT_ORACLE_BOUND,
};
use crate::ideals::{ideal_of_support_function, support_function_of_ideal, zero_function, MonoidIdeal, SupportFunction};
use crate::lattice::{dual_basis, extend_to_basis, IntMatrix, IntVector};
use crate::monoids::{hilbert_basis, lattice_point_generators, FineMonoid};
use crate::polyhedra::{resolve_to_smooth, Cone, Fan, FanMap};

pub const DEFAULT_MAX_ITERATIONS: usize = 8;
const SHIFT_DEGREE_CAP: u64 = 1 << 16;

/// `phi_rho` for the primitive image `n1` of a source ray.
///
/// `n1` is extended to a basis `n1..nr`; with `n0 = -(n1 + ... + nr)` the
/// projective-space fan carries `psi = min(0, m_1, ..., m_r)` for the dual
/// basis `m_i`, so that `psi(n_i) = 0` and `psi(n0) = -1`. The restriction to
/// `q_cone` is made nonnegative by the linear shift `l` of least degree
/// (against the sum of the rays of `q_cone`), lexicographically least among
/// those.
pub fn ray_support_function(q_cone: &Cone, n1: &IntVector) -> Result<SupportFunction> {
    if !n1.is_primitive() {
        return Err(Error::NotPrimitive);
    }
    if !q_cone.contains(n1) {
        return Err(Error::NotInCone);
    }
    let basis = extend_to_basis(n1)?;
    let mut functionals = vec![IntVector::zeros(n1.len())];
    functionals.extend(dual_basis(&basis)?);
    let psi = SupportFunction::min_of(q_cone, &functionals)?;
    let l = least_shift(q_cone, &psi)?;
    let shifted: Vec<IntVector> = functionals.iter().map(|m| m + &l).collect();
    SupportFunction::min_of(q_cone, &shifted)
}

/// Least-degree lattice `l` with `psi(r) + <r, l> >= 0` at every fan ray.
fn least_shift(q_cone: &Cone, psi: &SupportFunction) -> Result<IntVector> {
    let n = q_cone.rank();
    let rays = q_cone.extremal_rays()?.to_vec();
    let w = rays.iter().fold(IntVector::zeros(n), |acc, r| &acc + r);
    let need: Vec<(IntVector, BigInt)> = psi.ray_values().into_iter().map(|(r, v)| (r, -v)).collect();
    if need.iter().all(|(_, c)| !c.is_positive()) {
        return Ok(IntVector::zeros(n));
    }
    // values on a basis of cone rays pin down l; each lies in [0, degree]
    let mut sel: Vec<IntVector> = Vec::new();
    for r in &rays {
        let mut trial = sel.clone();
        trial.push(r.clone());
        if IntMatrix::from_row_vectors(n, &trial)?.rank() == trial.len() {
            sel = trial;
        }
    }
    let b = IntMatrix::from_row_vectors(n, &sel)?;
    let mut d: u64 = 1;
    loop {
        let mut best: Option<(BigInt, IntVector)> = None;
        let mut y = vec![0u64; n];
        loop {
            let rhs: Vec<num::rational::BigRational> =
                y.iter().map(|&c| num::rational::BigRational::from_integer(c.into())).collect();
            if let Some(x) = crate::lattice::solve_rational(&b, &rhs) {
                if x.iter().all(|c| c.is_integer()) {
                    let l = IntVector(x.iter().map(|c| c.to_integer()).collect());
                    let deg = w.dot(&l);
                    if deg <= BigInt::from(d) && need.iter().all(|(r, c)| &r.dot(&l) >= c) {
                        let better = match &best {
                            None => true,
                            Some((bd, bl)) => deg < *bd || (deg == *bd && l < *bl),
                        };
                        if better {
                            best = Some((deg, l));
                        }
                    }
                }
            }
            // odometer over [0, d]^n
            let mut i = 0;
            while i < n {
                y[i] += 1;
                if y[i] <= d {
                    break;
                }
                y[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        if let Some((_, l)) = best {
            return Ok(l);
        }
        if d >= SHIFT_DEGREE_CAP {
            return Err(Error::IterationCapExceeded(d as usize));
        }
        d *= 2;
    }
}

fn check_hom(h: &MonoidHom) -> Result<(Cone, Cone, IntMatrix)> {
    let (q, p) = (h.source(), h.target());
    if !q.is_sharp() || !p.is_sharp() {
        return Err(Error::NotSharp);
    }
    if !q.is_saturated() || !p.is_saturated() {
        return Err(Error::NotSaturated);
    }
    if !q.is_full_dimensional() || !p.is_full_dimensional() {
        return Err(Error::NotFullDimensional);
    }
    if !h.is_injective() {
        return Err(Error::NotInjective);
    }
    if !h.is_local() {
        return Err(Error::NotLocal);
    }
    Ok((q.cone_of()?, p.cone_of()?, h.matrix().transpose()))
}

/// `(K_phi, phi, linearity fan of phi)` with `phi` the sum of the ray functions.
pub fn flattening_ideal(h: &MonoidHom) -> Result<(MonoidIdeal, SupportFunction, Fan)> {
    let (sigma_q, sigma_p, phi_map) = check_hom(h)?;
    let mut phi = zero_function(&sigma_q)?;
    for r in sigma_p.extremal_rays()? {
        let img = phi_map.apply(r)?;
        if img.is_zero() {
            continue;
        }
        phi = phi.sum(&ray_support_function(&sigma_q, &img.primitive()?)?)?;
    }
    let k = ideal_of_support_function(&phi, h.source())?;
    let fan = phi.linearity_fan()?;
    Ok((k, phi, fan))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlattenOptions {
    pub oracle_bound: u64,
    pub height_bound: u64,
    pub max_iterations: usize,
    pub fast_exit: bool,
    pub conservative: bool,
}

impl Default for FlattenOptions {
    fn default() -> Self {
        FlattenOptions {
            oracle_bound: DEFAULT_ORACLE_BOUND,
            height_bound: DEFAULT_HEIGHT_BOUND,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            fast_exit: true,
            conservative: false,
        }
    }
}

impl FlattenOptions {
    fn integrality(&self) -> IntegralityOptions {
        IntegralityOptions { oracle_bound: self.oracle_bound, conservative: self.conservative }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Overall {
    Verified,
    Failed,
    Inconclusive,
}

impl Overall {
    pub fn as_str(&self) -> &'static str {
        match self {
            Overall::Verified => "Verified",
            Overall::Failed => "Failed",
            Overall::Inconclusive => "Inconclusive",
        }
    }

    pub fn parse(s: &str) -> Option<Overall> {
        match s {
            "Verified" => Some(Overall::Verified),
            "Failed" => Some(Overall::Failed),
            "Inconclusive" => Some(Overall::Inconclusive),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartCheck {
    /// Maximal base cone (index set into the base fan).
    pub base_cone: Vec<usize>,
    pub base_chart: FineMonoid,
    pub source_chart: FineMonoid,
    pub chart_hom: MonoidHom,
    pub verdict: IntegralityVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatteningCertificate {
    pub input: MonoidHom,
    pub phi: SupportFunction,
    pub ideal: MonoidIdeal,
    pub base_fan: Fan,
    pub source_fan: Fan,
    pub fan_map: FanMap,
    pub equidimensional: bool,
    pub base_smooth: bool,
    pub charts: Vec<ChartCheck>,
    pub overall: Overall,
    pub fast_exit: bool,
    pub fallback_iterations: usize,
    pub oracle_bound: u64,
    pub height_bound: u64,
}

fn overall_of(equidimensional: bool, base_smooth: bool, charts: &[ChartCheck]) -> Overall {
    if charts.iter().any(|c| c.verdict.status == IntegralityStatus::NotIntegral) {
        Overall::Failed
    } else if equidimensional && base_smooth && charts.iter().all(|c| c.verdict.status == IntegralityStatus::Integral)
    {
        Overall::Verified
    } else {
        Overall::Inconclusive
    }
}

/// The fs base change of `h` over one maximal base cone, without a verdict.
fn chart_data(h: &MonoidHom, sigma_p: &Cone, phi_map: &IntMatrix, base: &Cone) -> Result<(FineMonoid, FineMonoid, MonoidHom)> {
    let q_chart = hilbert_basis(&base.dual())?;
    let local = sigma_p.preimage_within(phi_map, base)?;
    let p_chart = FineMonoid::new(h.target().rank(), &lattice_point_generators(&local.dual())?)?;
    let hom = MonoidHom::new(q_chart.clone(), p_chart.clone(), h.matrix().clone())?;
    Ok((q_chart, p_chart, hom))
}

fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let threads = std::env::var("LOGFLATTEN_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    match threads.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn check_charts(
    h: &MonoidHom,
    sigma_p: &Cone,
    phi_map: &IntMatrix,
    base_fan: &Fan,
    opts: &IntegralityOptions,
) -> Result<Vec<ChartCheck>> {
    let maxes = base_fan.maximal_cones();
    with_pool(|| {
        maxes
            .par_iter()
            .map(|c| {
                let (base_chart, source_chart, chart_hom) = chart_data(h, sigma_p, phi_map, &base_fan.cone(c))?;
                let verdict = is_integral_with(&chart_hom, opts)?;
                Ok(ChartCheck { base_cone: c.clone(), base_chart, source_chart, chart_hom, verdict })
            })
            .collect()
    })
}

/// Runs the flattening pipeline and returns a certificate.
pub fn flatten(h: &MonoidHom, options: &FlattenOptions) -> Result<FlatteningCertificate> {
    let (sigma_q, sigma_p, phi_map) = check_hom(h)?;
    let iopts = options.integrality();
    let source_face = Fan::face_fan(&sigma_p)?;
    if options.fast_exit {
        let verdict = is_integral_with(h, &iopts)?;
        if verdict.status == IntegralityStatus::Integral {
            let base_fan = Fan::face_fan(&sigma_q)?;
            let fan_map = FanMap::new(phi_map, source_face.clone(), base_fan.clone())?;
            let equidimensional = fan_map.maps_cones_onto_cones().holds;
            let full = base_fan.maximal_cones().remove(0);
            let chart = ChartCheck {
                base_cone: full,
                base_chart: h.source().clone(),
                source_chart: h.target().clone(),
                chart_hom: h.clone(),
                verdict,
            };
            return Ok(FlatteningCertificate {
                input: h.clone(),
                phi: zero_function(&sigma_q)?,
                ideal: MonoidIdeal::unit(h.source()),
                base_smooth: base_fan.is_smooth(),
                base_fan,
                source_fan: source_face,
                fan_map,
                equidimensional,
                charts: vec![chart],
                overall: Overall::Verified,
                fast_exit: true,
                fallback_iterations: 0,
                oracle_bound: options.oracle_bound,
                height_bound: options.height_bound,
            });
        }
    }

    let (k0, phi0, fan0) = flattening_ideal(h)?;
    let mut fan = fan0.clone();
    let mut iterations = 0usize;
    loop {
        let (smooth, centres) = resolve_to_smooth(&fan)?;
        let (ideal, phi) = if centres.is_empty() && fan == fan0 {
            (k0.clone(), phi0.clone())
        } else {
            let f = strict_function(h.source(), &smooth, options.height_bound)?;
            let k = ideal_of_support_function(&f, h.source())?;
            (k, f)
        };
        let source_fan = FanMap::new(phi_map.clone(), source_face.clone(), smooth.clone())?
            .common_refinement_with_preimage()?;
        let fan_map = FanMap::new(phi_map.clone(), source_fan.clone(), smooth.clone())?;
        let check = fan_map.maps_cones_onto_cones();
        if !check.holds && iterations < options.max_iterations {
            let mut centres: Vec<IntVector> = Vec::new();
            for r in source_fan.rays() {
                let img = phi_map.apply(r)?;
                if !img.is_zero() {
                    let p = img.primitive()?;
                    if smooth.ray_index(&p).is_none() && !centres.contains(&p) {
                        centres.push(p);
                    }
                }
            }
            if !centres.is_empty() {
                centres.sort();
                let mut next = smooth.clone();
                for c in &centres {
                    next = next.stellar_subdivision(c)?;
                }
                fan = next;
                iterations += 1;
                continue;
            }
        }
        let charts = check_charts(h, &sigma_p, &phi_map, &smooth, &iopts)?;
        let base_smooth = smooth.is_smooth();
        let overall = overall_of(check.holds, base_smooth, &charts);
        return Ok(FlatteningCertificate {
            input: h.clone(),
            phi,
            ideal,
            base_fan: smooth,
            source_fan,
            fan_map,
            equidimensional: check.holds,
            base_smooth,
            charts,
            overall,
            fast_exit: false,
            fallback_iterations: iterations,
            oracle_bound: options.oracle_bound,
            height_bound: options.height_bound,
        });
    }
}

/// Chart verdicts agree with the bounded oracle: a recorded counterexample
/// must validate, and otherwise the oracle must find none.
fn verdict_consistent(h: &MonoidHom, v: &IntegralityVerdict, bound: u64) -> bool {
    if v.witness_bound != bound {
        return false;
    }
    match (&v.status, &v.counterexample) {
        (IntegralityStatus::NotIntegral, Some(ce)) => validate_counterexample(h, ce, bound),
        (IntegralityStatus::NotIntegral, None) => false,
        (_, Some(_)) => false,
        _ => is_integral_bounded(h, bound).status != IntegralityStatus::NotIntegral,
    }
}

/// Re-derives every claim of a certificate, using only the bounded oracle for integrality.
pub fn verify_certificate(c: &FlatteningCertificate) -> bool {
    verify_inner(c).unwrap_or(false)
}

fn verify_inner(c: &FlatteningCertificate) -> Result<bool> {
    let h = &c.input;
    let (sigma_q, sigma_p, phi_map) = check_hom(h)?;
    let bound = c.oracle_bound;
    if c.base_fan.check_axioms().is_err() || c.source_fan.check_axioms().is_err() {
        return Ok(false);
    }
    if !c.base_fan.subdivides(&sigma_q)? || !c.source_fan.subdivides(&sigma_p)? {
        return Ok(false);
    }
    let fan_map = FanMap::new(phi_map.clone(), c.source_fan.clone(), c.base_fan.clone())?;
    if fan_map != c.fan_map {
        return Ok(false);
    }
    if fan_map.maps_cones_onto_cones().holds != c.equidimensional || c.base_fan.is_smooth() != c.base_smooth {
        return Ok(false);
    }
    if c.ideal.parent() != h.source() || ideal_of_support_function(&c.phi, h.source())? != c.ideal {
        return Ok(false);
    }
    if c.fast_exit {
        if c.charts.len() != 1 || !c.ideal.is_unit() || c.overall != Overall::Verified {
            return Ok(false);
        }
        let ch = &c.charts[0];
        return Ok(ch.chart_hom == *h
            && ch.verdict.status == IntegralityStatus::Integral
            && verdict_consistent(h, &ch.verdict, bound));
    }
    if support_function_of_ideal(&c.ideal)?.fan() != &c.base_fan && !c.ideal.is_unit() {
        return Ok(false);
    }
    if c.ideal.is_unit() && Fan::face_fan(&sigma_q)? != c.base_fan {
        return Ok(false);
    }
    let source_fan = FanMap::new(phi_map.clone(), Fan::face_fan(&sigma_p)?, c.base_fan.clone())?
        .common_refinement_with_preimage()?;
    if source_fan != c.source_fan {
        return Ok(false);
    }
    let maxes = c.base_fan.maximal_cones();
    if maxes.len() != c.charts.len() {
        return Ok(false);
    }
    let charts_ok = with_pool(|| {
        maxes.par_iter().zip(c.charts.par_iter()).all(|(m, ch)| {
            let Ok((q, p, hom)) = chart_data(h, &sigma_p, &phi_map, &c.base_fan.cone(m)) else { return false };
            &ch.base_cone == m
                && ch.base_chart == q
                && ch.source_chart == p
                && ch.chart_hom == hom
                && verdict_consistent(&hom, &ch.verdict, bound)
        })
    });
    if !charts_ok {
        return Ok(false);
    }
    Ok(overall_of(c.equidimensional, c.base_smooth, &c.charts) == c.overall)
}
