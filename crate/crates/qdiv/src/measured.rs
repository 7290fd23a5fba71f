//! Measured f-divergences, measured Rényi divergences and the Rényi ordering chain.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::azrenyi;
use crate::error::{Error, Result};
use crate::fdiv::{self, classical_f_div, renyi_from_quasi, sign_alpha, DivergenceFunction, ExtendedReal};
use crate::linalg::{self, c, CMatrix, C64};
use crate::operators::{scalar_perspective, PsdOperator};
use crate::reversibility::{entry, ConditionEntry};

const POVM_TOL: f64 = 1e-9;
const PROJECTIVE_TOL: f64 = 1e-8;
pub const MIN_RESTARTS: usize = 8;
pub const DEFAULT_MAX_ITER: usize = 500;
pub const VARIATIONAL_MAX_ITER: usize = 20_000;
pub const BLOCH_GRID: (usize, usize) = (720, 360);
/// Per-copy ladders stop once the n-copy space exceeds this dimension.
pub const LADDER_MAX_DIM: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    #[serde(serialize_with = "crate::io::ser_matrices")]
    effects: Vec<CMatrix>,
    pub projective: bool,
    pub rank_one: bool,
}

impl Measurement {
    /// Validates M_x ≥ 0 and Σ M_x = I.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let d = effects.first().ok_or_else(|| Error::InvalidInput("empty measurement".into()))?.nrows();
        let mut sum = linalg::zeros(d, d);
        for m in &effects {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.nrows() });
            }
            let herm = linalg::max_abs(&(m - m.adjoint()));
            if herm > POVM_TOL {
                return Err(Error::NotHermitian(herm));
            }
            let ev = linalg::eigvals_h(m);
            if *ev.last().unwrap() < -POVM_TOL {
                return Err(Error::NotPsd { min: *ev.last().unwrap(), max: ev[0] });
            }
            sum += m;
        }
        let dev = linalg::max_abs(&(sum - linalg::identity(d)));
        if dev > POVM_TOL {
            return Err(Error::ContractViolation(format!("effects sum to I only within {dev:.3e}")));
        }
        let projective = effects.iter().enumerate().all(|(i, a)| {
            linalg::max_abs(&(a * a - a)) <= PROJECTIVE_TOL
                && effects[i + 1..].iter().all(|b| linalg::max_abs(&(a * b)) <= PROJECTIVE_TOL)
        });
        let rank_one = effects.iter().all(|m| {
            let ev = linalg::eigvals_h(m);
            ev.len() < 2 || ev[1] <= PROJECTIVE_TOL * ev[0].max(1.0)
        });
        Ok(Measurement { effects, projective, rank_one })
    }

    /// Rank-one projective measurement onto the columns of a unitary.
    pub fn from_basis(u: &CMatrix) -> Result<Self> {
        let effects = (0..u.ncols())
            .map(|j| {
                let v = u.column(j);
                v * v.adjoint()
            })
            .collect();
        Self::new(effects)
    }

    pub fn trivial(d: usize) -> Self {
        Measurement { effects: vec![linalg::identity(d)], projective: true, rank_one: d == 1 }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }
}

/// (Tr ϱ M_x)_x.
pub fn apply_measurement(m: &Measurement, rho: &PsdOperator) -> Result<Vec<f64>> {
    if m.dim() != rho.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: rho.dim() });
    }
    Ok(m.effects.iter().map(|e| linalg::hs_inner(e, rho.matrix()).re.max(0.0)).collect())
}

/// S_f(M(ϱ)‖M(σ)).
pub fn measurement_divergence(f: &DivergenceFunction, m: &Measurement, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    classical_f_div(f, &apply_measurement(m, rho)?, &apply_measurement(m, sigma)?)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptArgument {
    Measurement(Measurement),
    Omega(#[serde(serialize_with = "crate::io::ser_matrix")] CMatrix),
}

#[derive(Clone, Debug, Serialize)]
pub struct OptResult {
    pub value: ExtendedReal,
    pub argument: OptArgument,
    pub iterations: usize,
    pub stationarity: f64,
    pub restarts_used: usize,
    /// Best value on the qubit Bloch grid, when it was run.
    pub grid_value: Option<f64>,
}

struct BasisEval {
    value: f64,
    grad: CMatrix,
}

fn diag_probs(m: &CMatrix, u: &CMatrix) -> (CMatrix, Vec<f64>) {
    let r = u.adjoint() * m * u;
    let p = (0..r.nrows()).map(|i| r[(i, i)].re.max(0.0)).collect();
    (r, p)
}

fn classical_value(f: &DivergenceFunction, p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&x, &y)| scalar_perspective(f, x, y).to_f64()).sum()
}

/// Value of the basis measurement given by the columns of `u`, and the
/// Riemannian gradient G (skew-Hermitian) for the retraction U ↦ U exp(tG).
fn eval_basis(f: &DivergenceFunction, rho: &CMatrix, sigma: &CMatrix, u: &CMatrix, with_grad: bool) -> BasisEval {
    let (r, p) = diag_probs(rho, u);
    let (s, q) = diag_probs(sigma, u);
    let value = classical_value(f, &p, &q);
    if !with_grad || !value.is_finite() {
        return BasisEval { value, grad: linalg::zeros(u.nrows(), u.nrows()) };
    }
    let d = u.nrows();
    let floor = 1e-14 * q.iter().sum::<f64>().max(1e-300);
    let mut dm = linalg::zeros(d, d);
    for x in 0..d {
        if q[x] <= floor {
            continue;
        }
        let t = p[x] / q[x];
        let a = f.deriv(t);
        let b = f.eval(t) - t * a;
        for y in 0..d {
            dm[(x, y)] = r[(x, y)] * c(a) + s[(x, y)] * c(b);
        }
    }
    BasisEval { value, grad: dm.adjoint() - dm }
}

struct AscentResult {
    value: f64,
    u: CMatrix,
    iterations: usize,
}

fn ascend(f: &DivergenceFunction, rho: &CMatrix, sigma: &CMatrix, u0: CMatrix, max_iter: usize) -> AscentResult {
    let mut u = u0;
    let mut cur = eval_basis(f, rho, sigma, &u, true);
    let mut step: f64 = 1.0;
    let mut it = 0;
    while it < max_iter && cur.value.is_finite() {
        it += 1;
        let g2 = cur.grad.norm_squared();
        if g2 < 1e-28 {
            break;
        }
        let mut t = (step * 2.0).min(1e3);
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &u * linalg::skew_exp(&(&cur.grad * c(t)));
            let v = eval_basis(f, rho, sigma, &cand, false).value;
            if v >= cur.value + 1e-4 * t * g2 {
                accepted = Some((cand, v));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, v)) = accepted else { break };
        step = t;
        let improvement = v - cur.value;
        u = cand;
        cur = eval_basis(f, rho, sigma, &u, true);
        if !cur.value.is_finite() || improvement <= 1e-10 * cur.value.abs().max(1.0) {
            break;
        }
    }
    AscentResult { value: cur.value, u, iterations: it }
}

/// Skew-Hermitian generators i E_jj, E_jk − E_kj, i(E_jk + E_kj).
fn skew_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = linalg::zeros(d, d);
        m[(j, j)] = C64::i();
        out.push(m);
        for k in j + 1..d {
            let mut a = linalg::zeros(d, d);
            a[(j, k)] = c(1.0);
            a[(k, j)] = c(-1.0);
            out.push(a);
            let mut b = linalg::zeros(d, d);
            b[(j, k)] = C64::i();
            b[(k, j)] = C64::i();
            out.push(b);
        }
    }
    out
}

/// Largest increase found by ±h steps along each generator.
fn probe_stationarity(f: &DivergenceFunction, rho: &CMatrix, sigma: &CMatrix, u: &CMatrix, value: f64) -> f64 {
    if !value.is_finite() {
        return 0.0;
    }
    let h = 1e-3;
    let mut best: f64 = 0.0;
    for k in skew_basis(u.nrows()) {
        for sgn in [1.0, -1.0] {
            let cand = u * linalg::skew_exp(&(&k * c(sgn * h)));
            best = best.max(eval_basis(f, rho, sigma, &cand, false).value - value);
        }
    }
    best
}

/// Best projective measurement on the Bloch sphere: returns (value, unit vector n).
pub fn bloch_grid_projective(
    f: &DivergenceFunction,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    n_phi: usize,
    n_theta: usize,
) -> Result<(f64, [f64; 3])> {
    if rho.dim() != 2 || sigma.dim() != 2 {
        return Err(Error::InvalidInput("the Bloch grid needs qubit inputs".into()));
    }
    let paulis = [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
    let coords = |m: &CMatrix| -> (f64, [f64; 3]) {
        let r = [0, 1, 2].map(|i| linalg::hs_inner(&paulis[i], m).re);
        (linalg::trace_re(m), r)
    };
    let (tr, r) = coords(rho.matrix());
    let (ts, s) = coords(sigma.matrix());
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0, 1.0]);
    for i in 0..n_theta.max(2) {
        let theta = std::f64::consts::PI * i as f64 / (n_theta.max(2) - 1) as f64;
        for j in 0..n_phi.max(1) {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi.max(1) as f64;
            let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            let rn = r[0] * n[0] + r[1] * n[1] + r[2] * n[2];
            let sn = s[0] * n[0] + s[1] * n[1] + s[2] * n[2];
            let p = [((tr + rn) / 2.0).max(0.0), ((tr - rn) / 2.0).max(0.0)];
            let q = [((ts + sn) / 2.0).max(0.0), ((ts - sn) / 2.0).max(0.0)];
            let v = classical_value(f, &p, &q);
            if v > best.0 {
                best = (v, n);
            }
        }
    }
    Ok(best)
}

fn bloch_basis(n: [f64; 3]) -> CMatrix {
    let m = linalg::identity(2) + linalg::pauli_x() * c(n[0]) + linalg::pauli_y() * c(n[1]) + linalg::pauli_z() * c(n[2]);
    let (_, vecs) = linalg::eigh(&(m * c(0.5)));
    vecs
}

/// Lower bound on S_f^pr(ϱ‖σ) by multi-start ascent over orthonormal bases.
pub fn measured_projective_opt(
    f: &DivergenceFunction,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    restarts: usize,
    max_iter: usize,
    seed: u64,
) -> Result<OptResult> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let d = rho.dim();
    let (rm, sm) = (rho.matrix(), sigma.matrix());
    let mut starts = vec![
        sigma.eigenvectors().clone(),
        rho.eigenvectors().clone(),
        linalg::eigh(&(rm + sm * c(std::f64::consts::SQRT_2))).1,
        linalg::eigh(&(rm - sm)).1,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = restarts.max(MIN_RESTARTS);
    while starts.len() < total {
        starts.push(linalg::haar_unitary(d, &mut rng));
    }
    let mut grid_value = None;
    if d == 2 {
        let (gv, n) = bloch_grid_projective(f, rho, sigma, BLOCH_GRID.0, BLOCH_GRID.1)?;
        grid_value = Some(gv);
        starts.push(bloch_basis(n));
    }
    let mut best: Option<AscentResult> = None;
    let mut iterations = 0;
    for u0 in starts.iter() {
        let res = ascend(f, rm, sm, u0.clone(), max_iter);
        iterations += res.iterations;
        // Ties keep the earlier start.
        if best.as_ref().is_none_or(|b| res.value > b.value) {
            best = Some(res);
        }
    }
    let best = best.expect("at least one start");
    let stationarity = probe_stationarity(f, rm, sm, &best.u, best.value);
    let value = if best.value.is_finite() { ExtendedReal::new(best.value)? } else { ExtendedReal::PosInf };
    Ok(OptResult {
        value,
        argument: OptArgument::Measurement(Measurement::from_basis(&best.u)?),
        iterations,
        stationarity,
        restarts_used: starts.len(),
        grid_value,
    })
}

struct Branch {
    c1: f64,
    p1: f64,
    c2: f64,
    p2: f64,
}

fn branch(alpha: f64) -> Branch {
    let s = sign_alpha(alpha);
    if alpha < 0.5 {
        Branch { c1: s * alpha, p1: 1.0, c2: s * (1.0 - alpha), p2: alpha / (alpha - 1.0) }
    } else {
        Branch { c1: s * alpha, p1: (alpha - 1.0) / alpha, c2: s * (1.0 - alpha), p2: 1.0 }
    }
}

/// p e^{p m} sinh(pδ/2)/(pδ/2): the divided difference of μ ↦ e^{pμ}.
fn exp_divided_difference(p: f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    let x = 0.5 * p * (a - b);
    let sinhc = if x.abs() < 1e-8 { 1.0 + x * x / 6.0 } else { x.sinh() / x };
    p * (p * m).exp() * sinhc
}

/// Objective and Euclidean gradient in H of
/// c1 Tr ϱ exp(p1 H) + c2 Tr σ exp(p2 H).
fn variational_eval(b: &Branch, rho: &CMatrix, sigma: &CMatrix, h: &CMatrix) -> (f64, CMatrix) {
    let (mu, v) = linalg::eigh(h);
    let rt = v.adjoint() * rho * &v;
    let st = v.adjoint() * sigma * &v;
    let d = mu.len();
    let mut value = 0.0;
    let mut g = linalg::zeros(d, d);
    for i in 0..d {
        value += b.c1 * (b.p1 * mu[i]).exp() * rt[(i, i)].re + b.c2 * (b.p2 * mu[i]).exp() * st[(i, i)].re;
        for j in 0..d {
            let g1 = exp_divided_difference(b.p1, mu[i], mu[j]);
            let g2 = exp_divided_difference(b.p2, mu[i], mu[j]);
            g[(i, j)] = rt[(i, j)] * c(b.c1 * g1) + st[(i, j)] * c(b.c2 * g2);
        }
    }
    (value, &v * g * v.adjoint())
}

fn initial_log_omega(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator) -> CMatrix {
    let d = rho.dim();
    if !(rho.is_invertible() && sigma.is_invertible()) {
        return linalg::zeros(d, d);
    }
    let si = sigma.power(-0.5);
    let x = linalg::hermitian_part(&(&si * rho.matrix() * &si));
    let scale = if alpha < 0.5 { alpha - 1.0 } else { alpha };
    linalg::herm_apply(&x, |t| (scale * t.max(1e-300).ln()).clamp(-50.0, 50.0))
}

/// S_{f_α}^pr(ϱ‖σ) through the concave two-branch variational formula,
/// maximized over ω = exp(H) by gradient ascent with Barzilai–Borwein steps
/// and Armijo backtracking.
pub fn variational_measured_renyi(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator, max_iter: usize) -> Result<OptResult> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("need α > 0, α ≠ 1, got {alpha}")));
    }
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let d = rho.dim();
    if alpha > 1.0 && !rho.support_le(sigma) {
        return Ok(OptResult {
            value: ExtendedReal::PosInf,
            argument: OptArgument::Omega(linalg::identity(d)),
            iterations: 0,
            stationarity: 0.0,
            restarts_used: 1,
            grid_value: None,
        });
    }
    let b = branch(alpha);
    let (rm, sm) = (rho.matrix(), sigma.matrix());
    let mut h = initial_log_omega(alpha, rho, sigma);
    let (v0, _) = variational_eval(&b, rm, sm, &h);
    let (vz, _) = variational_eval(&b, rm, sm, &linalg::zeros(d, d));
    if !(v0.is_finite() && v0 >= vz) {
        h = linalg::zeros(d, d);
    }
    let (mut val, mut grad) = variational_eval(&b, rm, sm, &h);
    let mut step = 1.0;
    let mut prev: Option<(CMatrix, CMatrix)> = None;
    let mut it = 0;
    let mut stalls = 0;
    while it < max_iter {
        let gn = grad.norm();
        if gn < 1e-12 {
            break;
        }
        if let Some((dh, dg)) = &prev {
            let sy = -linalg::hs_inner(dh, dg).re;
            let ss = dh.norm_squared();
            if sy > 1e-300 {
                step = (ss / sy).clamp(1e-8, 1e8);
            }
        }
        let mut t = step;
        let mut accepted = None;
        for _ in 0..80 {
            let cand = &h + &grad * c(t);
            if cand.iter().all(|z| z.re.is_finite() && z.im.is_finite()) && linalg::op_norm(&cand) < 700.0 {
                let (cv, cg) = variational_eval(&b, rm, sm, &cand);
                if cv.is_finite() && cv >= val + 1e-4 * t * gn * gn {
                    accepted = Some((cand, cv, cg));
                    break;
                }
            }
            t *= 0.5;
        }
        it += 1;
        let Some((cand, cv, cg)) = accepted else { break };
        let improvement = cv - val;
        prev = Some((&cand - &h, &cg - &grad));
        h = cand;
        val = cv;
        grad = cg;
        if improvement <= 1e-15 * val.abs().max(1.0) {
            stalls += 1;
            if stalls >= 5 {
                break;
            }
        } else {
            stalls = 0;
        }
    }
    let omega = linalg::herm_exp(&h, 1.0);
    Ok(OptResult {
        value: ExtendedReal::new(val)?,
        argument: OptArgument::Omega(omega),
        iterations: it,
        stationarity: grad.norm(),
        restarts_used: 1,
        grid_value: None,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasuredRenyi {
    pub value: ExtendedReal,
    pub projective: ExtendedReal,
    pub variational: Option<ExtendedReal>,
}

/// D_α^meas lower bound: the better of projective ascent and the variational
/// formula. At α = 1 the variational side is the squeeze over α ∈ {0.9, 0.99}.
pub fn measured_renyi(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator, restarts: usize, seed: u64) -> Result<MeasuredRenyi> {
    let tr = rho.trace();
    if tr <= 0.0 {
        return Err(Error::InvalidInput("measured Rényi divergence needs ϱ ≠ 0".into()));
    }
    if alpha == 1.0 {
        let pr = measured_projective_opt(&DivergenceFunction::eta(), rho, sigma, restarts, DEFAULT_MAX_ITER, seed)?;
        let projective = pr.value.scale(1.0 / tr);
        let mut squeeze = ExtendedReal::Finite(f64::NEG_INFINITY);
        for a in [0.9, 0.99] {
            let v = variational_measured_renyi(a, rho, sigma, VARIATIONAL_MAX_ITER)?;
            let dv = renyi_from_quasi(a, v.value, tr)?;
            if dv > squeeze {
                squeeze = dv;
            }
        }
        let value = if squeeze > projective { squeeze } else { projective };
        return Ok(MeasuredRenyi { value, projective, variational: Some(squeeze) });
    }
    let f = DivergenceFunction::power(alpha)?;
    let pr = measured_projective_opt(&f, rho, sigma, restarts, DEFAULT_MAX_ITER, seed)?;
    let projective = renyi_from_quasi(alpha, pr.value, tr)?;
    let var = variational_measured_renyi(alpha, rho, sigma, VARIATIONAL_MAX_ITER)?;
    let variational = renyi_from_quasi(alpha, var.value, tr)?;
    let value = if variational > projective { variational } else { projective };
    Ok(MeasuredRenyi { value, projective, variational: Some(variational) })
}

#[derive(Clone, Debug, Serialize)]
pub struct PinskerCertificate {
    pub lhs: f64,
    pub rhs: ExtendedReal,
    pub pass: bool,
}

/// f″(1)/2 ‖ϱ−σ‖₁² against S_f of the dephasing in the eigenbasis of ϱ−σ.
pub fn pinsker_certificate(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator) -> Result<PinskerCertificate> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    let f1 = f.eval(1.0);
    if f1.abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("Pinsker bound needs f(1) = 0, got {f1}")));
    }
    let diff = rho.matrix() - sigma.matrix();
    let lhs = 0.5 * f.second_derivative_at_1() * linalg::trace_norm(&diff).powi(2);
    let (_, v) = linalg::eigh(&linalg::hermitian_part(&diff));
    let m = Measurement::from_basis(&v)?;
    let rhs = measurement_divergence(f, &m, rho, sigma)?;
    let pass = rhs.is_infinite() || lhs <= rhs.to_f64() + 1e-10;
    Ok(PinskerCertificate { lhs, rhs, pass })
}

/// Classical D_α(p‖q) normalized by Σ p; α = 1 is the relative entropy.
pub fn classical_renyi(alpha: f64, p: &[f64], q: &[f64]) -> Result<ExtendedReal> {
    let tr: f64 = p.iter().sum();
    if alpha == 1.0 {
        return Ok(classical_f_div(&DivergenceFunction::eta(), p, q)?.scale(1.0 / tr));
    }
    renyi_from_quasi(alpha, classical_f_div(&DivergenceFunction::power(alpha)?, p, q)?, tr)
}

/// (1/n) D_α of the von Neumann measurement in a common eigenbasis of σ^{⊗n}
/// and the σ^{⊗n}-pinched ϱ^{⊗n}.
pub fn pinched_copy_value(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator, n: usize) -> Result<ExtendedReal> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one copy".into()));
    }
    let (mut r, mut s) = (rho.matrix().clone(), sigma.matrix().clone());
    for _ in 1..n {
        r = linalg::kron(&r, rho.matrix());
        s = linalg::kron(&s, sigma.matrix());
    }
    let (vals, vecs) = linalg::eigh(&s);
    let top = vals[0].max(0.0);
    let mut p = Vec::with_capacity(vals.len());
    let mut q = Vec::with_capacity(vals.len());
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && (vals[end - 1] - vals[end]).abs() <= 1e-8 * top.max(1e-300) {
            end += 1;
        }
        let w = vecs.columns(start, end - start).into_owned();
        let block = linalg::hermitian_part(&(w.adjoint() * &r * &w));
        let level = (vals[start..end].iter().sum::<f64>() / (end - start) as f64).max(0.0);
        let level = if level <= 1e-10 * top { 0.0 } else { level };
        for e in linalg::eigvals_h(&block) {
            p.push(e.max(0.0));
            q.push(level);
        }
        start = end;
    }
    Ok(classical_renyi(alpha, &p, &q)?.scale(1.0 / n as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct RenyiChainReport {
    pub alpha: f64,
    pub sandwiched: ExtendedReal,
    pub measured: MeasuredRenyi,
    pub standard: ExtendedReal,
    /// Per-copy pinched-measurement values for n = 1, 2, ….
    pub ladder: Vec<ExtendedReal>,
    pub checks: Vec<ConditionEntry>,
    pub pass: bool,
}

fn excess(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (_, ExtendedReal::PosInf) => 0.0,
        (ExtendedReal::PosInf, _) => f64::INFINITY,
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).max(0.0),
    }
}

/// Checks the ordering of measured, sandwiched and standard Rényi divergences.
pub fn renyi_chain_report(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator, restarts: usize, seed: u64) -> Result<RenyiChainReport> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("need α > 0, got {alpha}")));
    }
    let standard = fdiv::renyi_alpha(alpha, rho, sigma)?;
    let sandwiched = if alpha == 1.0 { standard } else { azrenyi::sandwiched_normalized(alpha, rho, sigma)? };
    let measured = measured_renyi(alpha, rho, sigma, restarts, seed)?;
    let d = rho.dim();
    let mut ladder = Vec::new();
    let mut n = 1;
    while d.pow(n as u32) <= LADDER_MAX_DIM.max(d) && n <= 3 {
        ladder.push(pinched_copy_value(alpha, rho, sigma, n)?);
        n += 1;
    }
    let mut singles = vec![("projective", measured.projective)];
    if let Some(v) = measured.variational {
        singles.push(("variational", v));
    }
    for (i, v) in ladder.iter().enumerate() {
        singles.push((["n = 1", "n = 2", "n = 3"][i], *v));
    }
    let mut checks = Vec::new();
    for (name, v) in &singles {
        checks.push(entry(format!("measured ({name}) ≤ D_α"), excess(*v, standard), 1e-8));
        if alpha >= 0.5 {
            checks.push(entry(format!("measured ({name}) ≤ D*_α"), excess(*v, sandwiched), 1e-8));
        }
    }
    if alpha < 0.5 {
        checks.push(entry("D*_α ≤ measured", excess(sandwiched, measured.value), 1e-6));
    }
    checks.push(entry("D*_α ≤ D_α", excess(sandwiched, standard), 1e-8));
    for w in ladder.windows(2) {
        checks.push(entry("ladder non-decreasing", excess(w[0], w[1]), 1e-8));
    }
    let pass = checks.iter().all(|e| e.pass);
    Ok(RenyiChainReport { alpha, sandwiched, measured, standard, ladder, checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_state;
    use crate::fdiv::{diag_state, real_pure_state};

    fn noncommuting_pair() -> (PsdOperator, PsdOperator) {
        let r = diag_state(&[0.9, 0.1]).unwrap();
        let s = PsdOperator::new(linalg::from_real_rows(&[&[0.5, 0.4], &[0.4, 0.5]])).unwrap();
        (r, s)
    }

    #[test]
    fn classical_and_apply() {
        let eta = DivergenceFunction::eta();
        let v = classical_f_div(&eta, &[1.0, 0.0], &[0.5, 0.5]).unwrap().to_f64();
        assert!((v - 2f64.ln()).abs() < 1e-12);
        assert!(classical_f_div(&eta, &[1.0, 0.0], &[0.0, 1.0]).unwrap().is_infinite());
        let s = 0.5f64.sqrt();
        let plus = linalg::from_real_rows(&[&[s, s], &[s, -s]]);
        let m = Measurement::from_basis(&plus).unwrap();
        assert!(m.projective && m.rank_one);
        let p = apply_measurement(&m, &diag_state(&[1.0, 0.0]).unwrap()).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let r = random_state(3, 3, 1).unwrap();
        let p = apply_measurement(&Measurement::trivial(3), &r).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        let eig = Measurement::from_basis(r.eigenvectors()).unwrap();
        let p = apply_measurement(&eig, &r).unwrap();
        for (a, b) in p.iter().zip(r.eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(Measurement::new(vec![linalg::real_diag(&[1.0, 0.5])]).is_err());
    }

    #[test]
    fn projective_commuting_and_noncommuting() {
        let eta = DivergenceFunction::eta();
        let r = diag_state(&[0.7, 0.2, 0.1]).unwrap();
        let s = diag_state(&[0.2, 0.3, 0.5]).unwrap();
        let opt = measured_projective_opt(&eta, &r, &s, 8, 500, 1).unwrap();
        let exact = fdiv::relative_entropy(&r, &s).unwrap().to_f64();
        assert!((opt.value.to_f64() - exact).abs() < 1e-8);
        let (r, s) = noncommuting_pair();
        let opt = measured_projective_opt(&eta, &r, &s, 8, 500, 1).unwrap();
        let exact = fdiv::relative_entropy(&r, &s).unwrap().to_f64();
        assert!(opt.value.to_f64() < exact - 1e-4);
        assert!(opt.value.to_f64() >= opt.grid_value.unwrap() - 1e-12);
        assert!(opt.stationarity < 1e-8);
        let same = measured_projective_opt(&eta, &r, &r, 8, 500, 1).unwrap();
        assert!(same.value.to_f64().abs() < 1e-12);
    }

    #[test]
    fn variational_examples() {
        let r = diag_state(&[0.6, 0.4]).unwrap();
        let s = diag_state(&[0.3, 0.7]).unwrap();
        for a in [0.3, 0.75, 2.0] {
            let v = variational_measured_renyi(a, &r, &s, VARIATIONAL_MAX_ITER).unwrap();
            let exact = sign_alpha(a) * (0.6f64.powf(a) * 0.3f64.powf(1.0 - a) + 0.4f64.powf(a) * 0.7f64.powf(1.0 - a));
            assert!((v.value.to_f64() - exact).abs() < 1e-6, "α = {a}: {} vs {exact}", v.value);
        }
        let (r, s) = noncommuting_pair();
        let v = variational_measured_renyi(2.0, &r, &s, VARIATIONAL_MAX_ITER).unwrap();
        let p = measured_projective_opt(&DivergenceFunction::power(2.0).unwrap(), &r, &s, 8, 500, 3).unwrap();
        assert!((v.value.to_f64() - p.value.to_f64()).abs() < 1e-4);
        let v = variational_measured_renyi(0.5, &r, &s, VARIATIONAL_MAX_ITER).unwrap();
        let d = renyi_from_quasi(0.5, v.value, 1.0).unwrap().to_f64();
        let f = azrenyi::fidelity(&r, &s);
        assert!((d + 2.0 * f.ln()).abs() < 1e-6, "{d} vs {}", -2.0 * f.ln());
    }

    #[test]
    fn pinsker_examples() {
        let eta = DivergenceFunction::eta();
        let r = diag_state(&[0.9, 0.1]).unwrap();
        let s = diag_state(&[0.5, 0.5]).unwrap();
        let cert = pinsker_certificate(&eta, &r, &s).unwrap();
        assert!((cert.lhs - 0.32).abs() < 1e-12);
        let kl = 0.9 * 1.8f64.ln() + 0.1 * 0.2f64.ln();
        assert!((cert.rhs.to_f64() - kl).abs() < 1e-12 && cert.pass);
        let same = pinsker_certificate(&eta, &r, &r).unwrap();
        assert!(same.lhs == 0.0 && same.rhs.to_f64().abs() < 1e-12);
        let g1 = DivergenceFunction::gs(1.0).unwrap();
        for seed in 0..10 {
            let r = random_state(2, 2, seed).unwrap();
            let s = random_state(2, 2, seed + 100).unwrap();
            assert!(pinsker_certificate(&g1, &r, &s).unwrap().pass);
        }
        assert!(pinsker_certificate(&DivergenceFunction::power(0.5).unwrap(), &r, &s).is_err());
    }

    #[test]
    fn chain_commuting_and_strict() {
        let r = diag_state(&[0.6, 0.4]).unwrap();
        let s = diag_state(&[0.3, 0.7]).unwrap();
        let rep = renyi_chain_report(2.0, &r, &s, 8, 1).unwrap();
        let d = rep.standard.to_f64();
        assert!((rep.sandwiched.to_f64() - d).abs() < 1e-8);
        assert!((rep.measured.value.to_f64() - d).abs() < 1e-8);
        assert!(rep.ladder.iter().all(|v| (v.to_f64() - d).abs() < 1e-8));
        assert!(rep.pass);
        let (r, s) = noncommuting_pair();
        let rep = renyi_chain_report(2.0, &r, &s, 8, 1).unwrap();
        assert!(rep.pass, "{:?}", rep.checks);
        assert!(rep.measured.value.to_f64() < rep.sandwiched.to_f64() - 1e-4);
        assert!(rep.sandwiched.to_f64() < rep.standard.to_f64() - 1e-4);
        let rep = renyi_chain_report(1.0, &r, &s, 8, 1).unwrap();
        assert!(rep.pass && rep.measured.value.to_f64() < rep.standard.to_f64() - 1e-4);
    }

    #[test]
    fn pure_state_measurement_is_infinite_when_supports_disjoint() {
        let r = real_pure_state(&[1.0, 0.0]).unwrap();
        let s = real_pure_state(&[0.0, 1.0]).unwrap();
        let opt = measured_projective_opt(&DivergenceFunction::eta(), &r, &s, 8, 100, 0).unwrap();
        assert!(opt.value.is_infinite());
    }
}
