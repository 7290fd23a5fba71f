//! α-z-Rényi divergences, D_max, monotonicity regions and the equality
//! battery for bistochastic maps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channels::{petz_pair, random_channel, random_state_rng, QuantumChannel};
use crate::error::{Error, Result};
use crate::fdiv::ExtendedReal;
use crate::linalg::{self, c, CMatrix};
use crate::operators::{HermitianOperator, PsdOperator};
use crate::reversibility::{
    algebra_block_structure, entry, rel_trace_dist, EqualityReport, OperatorSubspace, Verdict, OPERATOR_TOL, SCALAR_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AzParams {
    pub alpha: f64,
    pub z: f64,
}

impl AzParams {
    pub fn new(alpha: f64, z: f64) -> Result<Self> {
        if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("need α > 0, α ≠ 1, got {alpha}")));
        }
        if !(z > 0.0) || !z.is_finite() {
            return Err(Error::InvalidInput(format!("need z > 0, got {z}")));
        }
        Ok(AzParams { alpha, z })
    }

    pub fn sandwiched(alpha: f64) -> Result<Self> {
        Self::new(alpha, alpha)
    }
}

/// Q_{α,z} = Tr(ϱ^{α/2z} σ^{(1−α)/z} ϱ^{α/2z})^z, +∞ when α > 1 and supp ϱ ⊄ supp σ.
pub fn q_az(p: AzParams, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    if p.alpha > 1.0 && !rho.support_le(sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let a = rho.power(p.alpha / (2.0 * p.z));
    let m = &a * sigma.power((1.0 - p.alpha) / p.z) * &a;
    let q: f64 = linalg::eigvals_h(&m).iter().map(|&v| v.max(0.0).powf(p.z)).sum();
    ExtendedReal::new(q)
}

/// D_{α,z} = log Q_{α,z} / (α − 1), without normalization by Tr ϱ.
pub fn d_az(p: AzParams, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    log_ratio(p.alpha, q_az(p, rho, sigma)?, 1.0)
}

fn log_ratio(alpha: f64, q: ExtendedReal, tr: f64) -> Result<ExtendedReal> {
    match q {
        ExtendedReal::PosInf => Ok(ExtendedReal::PosInf),
        ExtendedReal::Finite(v) if v <= 0.0 => {
            if alpha < 1.0 {
                Ok(ExtendedReal::PosInf)
            } else {
                Err(Error::InvalidInput("Q vanishes for α > 1 (ϱ = 0?)".into()))
            }
        }
        ExtendedReal::Finite(v) => ExtendedReal::new((v.ln() - tr.ln()) / (alpha - 1.0)),
    }
}

/// Sandwiched Rényi divergence normalized by Tr ϱ (the convention of `renyi_alpha`).
pub fn sandwiched_normalized(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    let p = AzParams::sandwiched(alpha)?;
    log_ratio(alpha, q_az(p, rho, sigma)?, rho.trace())
}

/// F(ϱ, σ) = Tr|ϱ^{1/2}σ^{1/2}|.
pub fn fidelity(rho: &PsdOperator, sigma: &PsdOperator) -> f64 {
    linalg::trace_norm(&(rho.power(0.5) * sigma.power(0.5)))
}

/// D_max = log λ_max(σ^{-1/2}ϱσ^{-1/2}) on supp σ, +∞ if supp ϱ ⊄ supp σ.
pub fn d_max(rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    if !rho.support_le(sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let si = sigma.power(-0.5);
    let top = linalg::eigvals_h(&(&si * rho.matrix() * &si))[0];
    if top <= 0.0 {
        return Err(Error::InvalidInput("D_max is −∞ for ϱ = 0".into()));
    }
    ExtendedReal::new(top.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionContext {
    General,
    FixedSigma,
    FixedRho,
}

impl std::str::FromStr for RegionContext {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Self::General),
            "fixed-sigma" => Ok(Self::FixedSigma),
            "fixed-rho" => Ok(Self::FixedRho),
            other => Err(Error::Parse(format!("unknown region context {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionVerdict {
    pub general_conditions: Vec<&'static str>,
    pub fixedpoint_conditions: Vec<&'static str>,
    pub monotone_claimed: bool,
}

/// Which published sufficient conditions for monotonicity hold at (α, z).
pub fn monotonicity_region(p: AzParams, ctx: RegionContext) -> RegionVerdict {
    let (a, z) = (p.alpha, p.z);
    let mut general = Vec::new();
    if a < 1.0 && z >= a.max(1.0 - a) {
        general.push("a");
    }
    if a > 1.0 && a <= 2.0 && z == 1.0 {
        general.push("b");
    }
    if a > 1.0 && a == z {
        general.push("c");
    }
    if a > 1.0 && a <= 2.0 && z == a / 2.0 {
        general.push("d");
    }
    let mut fixed = Vec::new();
    match ctx {
        RegionContext::General => {}
        RegionContext::FixedSigma => {
            if a <= z && z <= 1.0 {
                fixed.push("i");
            }
            if a >= z && z >= 1f64.max(a / 2.0) {
                fixed.push("iii");
            }
        }
        RegionContext::FixedRho => {
            if 0.0 < 1.0 - a && 1.0 - a <= z && z <= 1.0 {
                fixed.push("ii");
            }
            if a > 1.0 && z >= 1f64.max(a - 1.0) {
                fixed.push("iv");
            }
        }
    }
    let monotone_claimed = !general.is_empty() || !fixed.is_empty();
    RegionVerdict { general_conditions: general, fixedpoint_conditions: fixed, monotone_claimed }
}

/// Mixture of random unitaries commuting with `x` (so x ∈ fix(Φ)).
pub fn random_fixing_channel<R: Rng + ?Sized>(x: &PsdOperator, n: usize, rng: &mut R) -> Result<QuantumChannel> {
    let d = x.dim();
    let sd = x.spectral();
    let mut us = Vec::with_capacity(n);
    let mut w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-2).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|t| *t /= total);
    for _ in 0..n {
        // A Haar unitary inside each eigenspace of x.
        let mut u = linalg::zeros(d, d);
        for p in &sd.projectors {
            let (vals, vecs) = linalg::eigh(p);
            let k = vals.iter().filter(|&&t| t > 0.5).count();
            let basis = vecs.columns(0, k).into_owned();
            let local = linalg::haar_unitary(k, rng);
            u += &basis * local * basis.adjoint();
        }
        if sd.projectors.is_empty() {
            u = linalg::identity(d);
        }
        us.push(u);
    }
    QuantumChannel::mixture_of_unitaries(&w, &us)
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionCell {
    pub alpha: f64,
    pub z: f64,
    pub verdict: RegionVerdict,
    /// max over samples of D_{α,z}(Φϱ‖Φσ) − D_{α,z}(ϱ‖σ), floored at 0.
    pub max_violation: f64,
    pub samples: usize,
}

/// Largest observed increase of D_{α,z} under sampled maps: random channels
/// for `General`, mixtures of unitaries commuting with σ (resp. ϱ) otherwise.
pub fn observed_violation(p: AzParams, ctx: RegionContext, dim: usize, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let rho = random_state_rng(dim, dim, &mut rng)?;
        let sigma = random_state_rng(dim, dim, &mut rng)?;
        let phi = match ctx {
            RegionContext::General => random_channel(dim, dim, dim, rng.random())?,
            RegionContext::FixedSigma => random_fixing_channel(&sigma, 3, &mut rng)?,
            RegionContext::FixedRho => random_fixing_channel(&rho, 3, &mut rng)?,
        };
        let before = d_az(p, &rho, &sigma)?;
        let after = d_az(p, &phi.apply_psd(&rho)?, &phi.apply_psd(&sigma)?)?;
        let v = match (before, after) {
            (ExtendedReal::Finite(b), ExtendedReal::Finite(a)) => a - b,
            (ExtendedReal::PosInf, _) => 0.0,
            (ExtendedReal::Finite(_), ExtendedReal::PosInf) => f64::INFINITY,
        };
        worst = worst.max(v);
    }
    Ok(worst)
}

pub fn region_scan(alphas: &[f64], zs: &[f64], ctx: RegionContext, dim: usize, samples: usize, seed: u64) -> Result<Vec<RegionCell>> {
    let mut out = Vec::with_capacity(alphas.len() * zs.len());
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &z) in zs.iter().enumerate() {
            let p = AzParams::new(alpha, z)?;
            let cell_seed = seed.wrapping_add((i * zs.len() + j) as u64);
            out.push(RegionCell {
                alpha,
                z,
                verdict: monotonicity_region(p, ctx),
                max_violation: observed_violation(p, ctx, dim, samples, cell_seed)?,
                samples,
            });
        }
    }
    Ok(out)
}

/// *-algebra generated by the given Hermitian matrices and the identity.
pub fn generated_algebra(d: usize, gens: &[CMatrix]) -> OperatorSubspace {
    let mut mats = vec![linalg::identity(d)];
    mats.extend(gens.iter().cloned());
    let mut sub = OperatorSubspace::from_spanning(d, &mats, 1e-10);
    loop {
        let mut next = sub.basis.clone();
        for a in &sub.basis {
            for g in gens {
                next.push(a * g);
            }
        }
        let grown = OperatorSubspace::from_spanning(d, &next, 1e-10);
        if grown.dimension() == sub.dimension() || grown.dimension() == d * d {
            return grown;
        }
        sub = grown;
    }
}

fn sorted_spectrum_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let x = linalg::eigvals_h(a);
    let y = linalg::eigvals_h(b);
    x.iter().zip(&y).fold(0.0, |m, (p, q)| m.max((p - q).abs()))
}

/// Unitary U with UXU† = Φ(X) on the algebra generated by `gens`, built from
/// the images of its matrix units.
pub fn implementing_unitary(phi: &QuantumChannel, gens: &[CMatrix]) -> Result<CMatrix> {
    let d = phi.in_dim;
    let alg = generated_algebra(d, gens);
    let dec = algebra_block_structure(&alg)?;
    let mut u = linalg::zeros(d, d);
    let mut src = linalg::zeros(d, 0);
    let mut dst = linalg::zeros(d, 0);
    for b in &dec.blocks {
        let unit = |i: usize, j: usize| {
            let mut e = linalg::zeros(b.d_l, b.d_l);
            e[(i, j)] = c(1.0);
            &b.isometry * linalg::kron(&e, &linalg::identity(b.d_r)) * b.isometry.adjoint()
        };
        let f11 = linalg::hermitian_part(&phi.apply(&unit(0, 0)));
        let (vals, vecs) = linalg::eigh(&f11);
        let r = vals.iter().filter(|&&t| t > 0.5).count();
        if r != b.d_r {
            return Err(Error::StructureExtraction("image of a minimal projection has the wrong rank".into()));
        }
        let range = vecs.columns(0, r).into_owned();
        for i in 0..b.d_l {
            let fi1 = phi.apply(&unit(i, 0));
            let img = &fi1 * &range;
            let pre = b.isometry.columns(i * b.d_r, b.d_r).into_owned();
            u += &img * pre.adjoint();
            src = concat_cols(&src, &pre);
            dst = concat_cols(&dst, &img);
        }
    }
    // Complete on the orthogonal complements.
    if src.ncols() < d {
        let cs = complement(&src, d);
        let cd = complement(&dst, d);
        u += cd * cs.adjoint();
    }
    if (u.adjoint() * &u - linalg::identity(d)).norm() > 1e-6 {
        return Err(Error::StructureExtraction("constructed map is not unitary".into()));
    }
    Ok(u)
}

fn concat_cols(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut m = linalg::zeros(a.nrows().max(b.nrows()), a.ncols() + b.ncols());
    m.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    m.view_mut((0, a.ncols()), (b.nrows(), b.ncols())).copy_from(b);
    m
}

fn complement(cols: &CMatrix, d: usize) -> CMatrix {
    let p = linalg::identity(d) - cols * cols.adjoint();
    let (vals, vecs) = linalg::eigh(&p);
    let k = vals.iter().filter(|&&t| t > 0.5).count();
    vecs.columns(0, k).into_owned()
}

fn gap(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (ExtendedReal::PosInf, ExtendedReal::PosInf) => 0.0,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
        _ => f64::INFINITY,
    }
}

pub const E_NAMES: [&str; 6] = [
    "(E0) D*_α preserved",
    "(E1) D_{α,z} preserved",
    "(E2) Φ*Φ fixes ϱ and σ",
    "(E3) σ-Petz recovers ϱ",
    "(E4) ϱ-Petz recovers σ",
    "(E5) common unitary",
];

/// Residuals of (E0)–(E5) for a bistochastic Φ.
pub fn az_equality_battery(phi: &QuantumChannel, rho: &PsdOperator, sigma: &PsdOperator, p: AzParams) -> Result<EqualityReport> {
    if !phi.is_bistochastic() {
        return Err(Error::ContractViolation("the α-z battery needs a unital trace-preserving map".into()));
    }
    let pr = phi.apply_psd(rho)?;
    let ps = phi.apply_psd(sigma)?;
    let mut entries = Vec::new();
    let mut notes = Vec::new();

    let sw = AzParams::sandwiched(p.alpha)?;
    entries.push(entry(E_NAMES[0], gap(d_az(sw, rho, sigma)?, d_az(sw, &pr, &ps)?), SCALAR_TOL));
    entries.push(entry(E_NAMES[1], gap(d_az(p, rho, sigma)?, d_az(p, &pr, &ps)?), SCALAR_TOL));

    let adj = phi.adjoint();
    let e2 = rel_trace_dist(&adj.apply(pr.matrix()), rho.matrix()).max(rel_trace_dist(&adj.apply(ps.matrix()), sigma.matrix()));
    entries.push(entry(E_NAMES[2], e2, OPERATOR_TOL));

    let e3 = match petz_pair(phi, sigma) {
        Ok(pm) => rel_trace_dist(&pm.recover(pr.matrix()), rho.matrix()),
        Err(e) => {
            notes.push(format!("(E3) unavailable: {e}"));
            f64::INFINITY
        }
    };
    let e3_entry = entry(E_NAMES[3], e3, OPERATOR_TOL);
    let e3_pass = e3_entry.pass;
    entries.push(e3_entry);
    let e4 = match petz_pair(phi, rho) {
        Ok(pm) => rel_trace_dist(&pm.recover(ps.matrix()), sigma.matrix()),
        Err(e) => {
            notes.push(format!("(E4) unavailable: {e}"));
            f64::INFINITY
        }
    };
    entries.push(entry(E_NAMES[4], e4, OPERATOR_TOL));

    let spec = sorted_spectrum_distance(rho.matrix(), pr.matrix()).max(sorted_spectrum_distance(sigma.matrix(), ps.matrix()));
    let e5 = if spec > OPERATOR_TOL {
        notes.push("(E5) fails the spectrum pre-check".into());
        spec
    } else if !phi.cp_certified {
        notes.push("(E5) decided by the (E2) residual for a non-CP map".into());
        spec.max(e2)
    } else {
        match implementing_unitary(phi, &[rho.matrix().clone(), sigma.matrix().clone()]) {
            Ok(u) => {
                let ur = &u * rho.matrix() * u.adjoint();
                let us = &u * sigma.matrix() * u.adjoint();
                rel_trace_dist(&ur, pr.matrix()).max(rel_trace_dist(&us, ps.matrix()))
            }
            Err(e) => {
                notes.push(format!("(E5) no unitary constructed: {e}"));
                spec.max(e2).max(1.0)
            }
        }
    };
    entries.push(entry(E_NAMES[5], e5, OPERATOR_TOL));

    let verdict = if e3_pass { Verdict::Reversible } else { Verdict::Neither };
    Ok(EqualityReport { entries, verdict, consistent: true, notes })
}

#[derive(Clone, Debug, Serialize)]
pub struct MajorizationReport {
    /// Σ_{i≤k} λ↓_i(X) − Σ_{i≤k} λ↓_i(Φ(X)), k = 1..d.
    pub partial_sum_gaps: Vec<f64>,
    /// |Σ_{i≤k} λ↓_i − Tr X P_k| with P_k the top-k spectral projection.
    pub ky_fan_crosscheck: f64,
    pub pass: bool,
}

pub fn ky_fan_majorization(phi: &QuantumChannel, x: &HermitianOperator) -> Result<MajorizationReport> {
    if !phi.is_bistochastic() {
        return Err(Error::ContractViolation("majorization check needs a bistochastic map".into()));
    }
    let y = linalg::hermitian_part(&phi.apply(x.matrix()));
    let (lx, vx) = linalg::eigh(x.matrix());
    let ly = linalg::eigvals_h(&y);
    let mut gaps = Vec::with_capacity(lx.len());
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut cross: f64 = 0.0;
    for k in 0..lx.len() {
        sx += lx[k];
        sy += ly[k];
        gaps.push(sx - sy);
        let pk = vx.columns(0, k + 1).into_owned();
        let kf = linalg::trace_re(&(pk.adjoint() * x.matrix() * &pk));
        cross = cross.max((kf - sx).abs());
    }
    let scale = x.matrix().norm().max(1.0);
    let last = *gaps.last().unwrap_or(&0.0);
    let pass = gaps.iter().all(|&g| g >= -1e-9 * scale) && last.abs() <= 1e-9 * scale;
    Ok(MajorizationReport { partial_sum_gaps: gaps, ky_fan_crosscheck: cross, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceConvexityReport {
    /// Tr f(Φ(X)) − Tr f(X), expected ≤ 0.
    pub trace_gap: f64,
    /// Tr X² − Tr Φ(X)².
    pub square_gap: f64,
    /// ‖Φ*Φ(X) − X‖₁.
    pub fixed_residual: f64,
    /// max |λ↓(Φ(X)) − λ↓(X)|.
    pub spectrum_distance: f64,
    pub trace_inequality_pass: bool,
    /// All three unitary-orbit criteria agree (all vanish or none do).
    pub equivalence_consistent: bool,
    pub unitary_orbit: bool,
}

pub fn trace_convexity_unitary_check(
    phi: &QuantumChannel,
    x: &HermitianOperator,
    f: &dyn Fn(f64) -> f64,
) -> Result<TraceConvexityReport> {
    if !phi.is_bistochastic() {
        return Err(Error::ContractViolation("trace convexity check needs a bistochastic map".into()));
    }
    let y = linalg::hermitian_part(&phi.apply(x.matrix()));
    let tf = |m: &CMatrix| linalg::eigvals_h(m).iter().map(|&v| f(v)).sum::<f64>();
    let trace_gap = tf(&y) - tf(x.matrix());
    let sq = |m: &CMatrix| linalg::hs_inner(m, m).re;
    let square_gap = sq(x.matrix()) - sq(&y);
    let fixed_residual = linalg::trace_norm(&(phi.adjoint().apply(&y) - x.matrix()));
    let spectrum_distance = sorted_spectrum_distance(x.matrix(), &y);
    let scale = x.matrix().norm().max(1.0);
    let flags = [square_gap.abs() <= 1e-10 * scale * scale, fixed_residual <= 1e-5 * scale, spectrum_distance <= 1e-5 * scale];
    let equivalence_consistent = flags.iter().all(|&b| b) || flags.iter().all(|&b| !b);
    Ok(TraceConvexityReport {
        trace_gap,
        square_gap,
        fixed_residual,
        spectrum_distance,
        trace_inequality_pass: trace_gap <= 1e-9 * scale,
        equivalence_consistent,
        unitary_orbit: flags.iter().all(|&b| b),
    })
}

/// Rotation R(θ) diag(a, b) R(θ)ᵀ.
pub fn rotated_qubit(theta: f64, a: f64, b: f64) -> Result<PsdOperator> {
    let (s, co) = theta.sin_cos();
    let r = linalg::from_real_rows(&[&[co, -s], &[s, co]]);
    PsdOperator::new(&r * linalg::real_diag(&[a, b]) * r.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{dephasing_channel, random_bistochastic, random_state};
    use crate::fdiv;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_validation() {
        assert!(AzParams::new(1.0, 1.0).is_err());
        assert!(AzParams::new(0.5, 0.0).is_err());
        assert!(AzParams::new(-1.0, 1.0).is_err());
        assert!(AzParams::new(2.0, 0.5).is_ok());
    }

    #[test]
    fn q_and_d_examples() {
        let r = random_state(3, 3, 1).unwrap();
        for (a, z) in [(0.3, 0.8), (2.0, 1.0), (1.5, 4.0)] {
            let d = d_az(AzParams::new(a, z).unwrap(), &r, &r).unwrap().to_f64();
            assert!(d.abs() < 1e-12);
        }
        let r = PsdOperator::diag(&[0.6, 0.4]).unwrap();
        let s = PsdOperator::diag(&[0.5, 0.5]).unwrap();
        let p = AzParams::new(2.0, 1.0).unwrap();
        assert!((q_az(p, &r, &s).unwrap().to_f64() - 1.04).abs() < 1e-12);
        assert!((d_az(p, &r, &s).unwrap().to_f64() - 1.04f64.ln()).abs() < 1e-12);
        let plus = fdiv::real_pure_state(&[0.5f64.sqrt(), 0.5f64.sqrt()]).unwrap();
        let e0 = PsdOperator::diag(&[1.0, 0.0]).unwrap();
        for z in [0.5, 1.0, 3.0] {
            assert!(d_az(AzParams::new(1.5, z).unwrap(), &plus, &e0).unwrap().is_infinite());
        }
    }

    #[test]
    fn embeddings() {
        let r = random_state(3, 3, 4).unwrap();
        let s = random_state(3, 3, 5).unwrap();
        for a in [0.3, 0.5, 2.0, 3.0] {
            let std = fdiv::renyi_alpha(a, &r, &s).unwrap().to_f64();
            let az1 = d_az(AzParams::new(a, 1.0).unwrap(), &r, &s).unwrap().to_f64();
            assert!((std - az1).abs() < 1e-10);
            // Sandwiched form with σ outside.
            let g = s.power((1.0 - a) / (2.0 * a));
            let m = &g * r.matrix() * &g;
            let q: f64 = linalg::eigvals_h(&m).iter().map(|v| v.max(0.0).powf(a)).sum();
            let sw = d_az(AzParams::sandwiched(a).unwrap(), &r, &s).unwrap().to_f64();
            assert!((q.ln() / (a - 1.0) - sw).abs() < 1e-10);
            assert!(sw <= std + 1e-12);
        }
        let f = fidelity(&r, &s);
        let half = d_az(AzParams::new(0.5, 0.5).unwrap(), &r, &s).unwrap().to_f64();
        assert!((half + 2.0 * f.ln()).abs() < 1e-10);
    }

    #[test]
    fn d_max_examples() {
        let r = random_state(2, 2, 9).unwrap();
        assert!(d_max(&r, &r).unwrap().to_f64().abs() < 1e-12);
        let r = PsdOperator::diag(&[0.9, 0.1]).unwrap();
        let s = PsdOperator::diag(&[0.5, 0.5]).unwrap();
        assert!((d_max(&r, &s).unwrap().to_f64() - 1.8f64.ln()).abs() < 1e-12);
        let e0 = PsdOperator::diag(&[1.0, 0.0]).unwrap();
        assert!(d_max(&s, &e0).unwrap().is_infinite());
        // D*_α increases towards D_max.
        let r = random_state(2, 2, 3).unwrap();
        let s = random_state(2, 2, 4).unwrap();
        let dm = d_max(&r, &s).unwrap().to_f64();
        let d50 = d_az(AzParams::sandwiched(50.0).unwrap(), &r, &s).unwrap().to_f64();
        assert!(d50 <= dm + 1e-12 && dm - d50 < 0.1);
    }

    #[test]
    fn region_examples() {
        let v = monotonicity_region(AzParams::new(0.3, 0.7).unwrap(), RegionContext::General);
        assert_eq!(v.general_conditions, vec!["a"]);
        let v = monotonicity_region(AzParams::new(0.3, 0.3).unwrap(), RegionContext::General);
        assert!(!v.monotone_claimed);
        let v = monotonicity_region(AzParams::new(0.3, 0.3).unwrap(), RegionContext::FixedSigma);
        assert_eq!(v.fixedpoint_conditions, vec!["i"]);
        let v = monotonicity_region(AzParams::new(3.0, 2.5).unwrap(), RegionContext::FixedRho);
        assert_eq!(v.fixedpoint_conditions, vec!["iv"]);
        let v = monotonicity_region(AzParams::new(1.5, 0.75).unwrap(), RegionContext::General);
        assert_eq!(v.general_conditions, vec!["d"]);
    }

    #[test]
    fn region_scan_respects_certified_regions() {
        let cells = region_scan(&[0.5, 2.0], &[0.5, 1.0, 2.0], RegionContext::General, 2, 20, 1).unwrap();
        assert_eq!(cells.len(), 6);
        for cell in &cells {
            if cell.verdict.monotone_claimed {
                assert!(cell.max_violation <= 1e-8, "{cell:?}");
            }
        }
        let v = observed_violation(AzParams::new(0.3, 0.3).unwrap(), RegionContext::FixedSigma, 3, 20, 4).unwrap();
        assert!(v <= 1e-8);
    }

    #[test]
    fn battery_unitary_passes() {
        let r = random_state(3, 3, 1).unwrap();
        let s = random_state(3, 3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = QuantumChannel::unitary(&linalg::haar_unitary(3, &mut rng)).unwrap();
        let rep = az_equality_battery(&u, &r, &s, AzParams::new(0.5, 0.8).unwrap()).unwrap();
        assert!(rep.entries.iter().all(|e| e.pass), "{}", rep.table());
        assert!(rep.max_residual() < 1e-9);
    }

    #[test]
    fn battery_pinching_counterexample() {
        let phi = dephasing_channel(2);
        let rho = PsdOperator::diag(&[1.0, 0.0]).unwrap();
        let sigma = rotated_qubit(std::f64::consts::PI / 5.0, 0.7, 0.3).unwrap();
        for a in [0.3, 0.5, 0.7] {
            let rep = az_equality_battery(&phi, &rho, &sigma, AzParams::new(a, 1.0 - a).unwrap()).unwrap();
            assert!(rep.passes(E_NAMES[1]), "{}", rep.table());
            assert!(rep.residual(E_NAMES[3]) > 1e-3);
            let th = std::f64::consts::PI / 5.0;
            let q = q_az(AzParams::new(a, 1.0 - a).unwrap(), &rho, &sigma).unwrap().to_f64();
            assert!((q - (0.7 * th.cos().powi(2) + 0.3 * th.sin().powi(2)).powf(1.0 - a)).abs() < 1e-12);
        }
    }

    #[test]
    fn battery_fidelity_with_fixed_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sigma = random_state(3, 3, 6).unwrap();
        let phi = random_fixing_channel(&sigma, 3, &mut rng).unwrap();
        assert!((phi.apply(sigma.matrix()) - sigma.matrix()).norm() < 1e-12);
        let p = AzParams::new(0.5, 0.5).unwrap();
        // ϱ commuting with σ is preserved and recovered.
        let rho = PsdOperator::new(sigma.func(|x| x * x)).unwrap();
        let rep = az_equality_battery(&phi, &rho, &sigma, p).unwrap();
        assert!(rep.passes(E_NAMES[1]) && rep.passes(E_NAMES[3]) && rep.passes(E_NAMES[5]), "{}", rep.table());
        // A generic ϱ is not.
        let rho = random_state(3, 3, 7).unwrap();
        let rep = az_equality_battery(&phi, &rho, &sigma, p).unwrap();
        assert_eq!(rep.passes(E_NAMES[1]), rep.passes(E_NAMES[3]));
    }

    #[test]
    fn majorization_examples() {
        let x = HermitianOperator::diag(&[1.0, -1.0]);
        let id = ky_fan_majorization(&QuantumChannel::identity(2), &x).unwrap();
        assert!(id.partial_sum_gaps.iter().all(|g| g.abs() < 1e-12) && id.pass);
        let paulis = [linalg::identity(2), linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
        let dep = QuantumChannel::mixture_of_unitaries(&[0.25; 4], &paulis).unwrap();
        let rep = ky_fan_majorization(&dep, &x).unwrap();
        assert!(rep.pass && (rep.partial_sum_gaps[0] - 1.0).abs() < 1e-12);
        let ch = random_bistochastic(3, 3, 2).unwrap();
        let rep = ky_fan_majorization(&ch, &HermitianOperator::new(linalg::identity(3)).unwrap()).unwrap();
        assert!(rep.partial_sum_gaps.iter().all(|g| g.abs() < 1e-12));
        assert!(rep.ky_fan_crosscheck < 1e-12);
    }

    #[test]
    fn trace_convexity_examples() {
        let f = |t: f64| t * t;
        let x = HermitianOperator::new(linalg::from_real_rows(&[&[1.0, 0.3], &[0.3, -0.5]])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = QuantumChannel::unitary(&linalg::haar_unitary(2, &mut rng)).unwrap();
        let rep = trace_convexity_unitary_check(&u, &x, &f).unwrap();
        assert!(rep.unitary_orbit && rep.equivalence_consistent && rep.trace_gap.abs() < 1e-12);
        let rep = trace_convexity_unitary_check(&dephasing_channel(2), &x, &f).unwrap();
        assert!((rep.square_gap - 2.0 * 0.09).abs() < 1e-12);
        assert!(rep.trace_inequality_pass && rep.equivalence_consistent && !rep.unitary_orbit);
        let d = HermitianOperator::diag(&[0.2, 0.8]);
        let rep = trace_convexity_unitary_check(&dephasing_channel(2), &d, &|t: f64| t * t.ln()).unwrap();
        assert!(rep.fixed_residual < 1e-12);
    }
}
