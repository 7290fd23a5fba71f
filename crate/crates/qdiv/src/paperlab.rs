//! Qubit closed forms and deterministic reproductions of the worked examples.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::azrenyi::{self, AzParams, E_NAMES};
use crate::channels::{dephasing_channel, petz_pair, pinching_channel, stochastic_matrix_channel, QuantumChannel};
use crate::error::{Error, Result};
use crate::fdiv::{self, DivergenceFunction, ExtendedReal};
use crate::linalg::{self, c, CMatrix};
use crate::operators::PsdOperator;
use crate::reversibility::{
    self, fixed_point_set, maximal_preservation_report, multiplicative_domain, quadratic_gap, rel_trace_dist,
    standard_preservation_report, DEFAULT_Z_GRID, PETZ_ENTRY,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlochVector {
    pub w: [f64; 3],
}

impl BlochVector {
    pub fn new(w: [f64; 3]) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("Bloch vector".into()));
        }
        let b = BlochVector { w };
        if b.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!("Bloch vector has length {} > 1", b.norm())));
        }
        Ok(b)
    }

    pub fn norm(&self) -> f64 {
        dot(self.w, self.w).sqrt()
    }

    /// (I + w·σ)/2.
    pub fn density(&self) -> Result<PsdOperator> {
        let m = linalg::identity(2)
            + linalg::pauli_x() * c(self.w[0])
            + linalg::pauli_y() * c(self.w[1])
            + linalg::pauli_z() * c(self.w[2]);
        PsdOperator::new(m * c(0.5))
    }

    /// Bloch vector of a qubit density matrix.
    pub fn from_density(rho: &PsdOperator) -> Result<Self> {
        if rho.dim() != 2 {
            return Err(Error::InvalidInput("Bloch vectors describe qubits".into()));
        }
        let paulis = [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()];
        Self::new([0, 1, 2].map(|i| linalg::hs_inner(&paulis[i], rho.matrix()).re))
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn comb(a: [f64; 3], t: f64, b: [f64; 3]) -> [f64; 3] {
    [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]]
}

fn check_qubit_pair(x: &BlochVector, s: f64) -> Result<()> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("need s > 0, got {s}")));
    }
    if x.norm() >= 1.0 {
        return Err(Error::NotInvertible("σ must be invertible (|x| < 1)".into()));
    }
    Ok(())
}

/// S_{g_s} for qubit densities with Bloch vectors w, x:
/// (1+s)⟨y, [((1+s)² − |u|²)I + |u⟩⟨u| − |v⟩⟨v|]⁻¹ y⟩.
pub fn bloch_s_gs(w: &BlochVector, x: &BlochVector, s: f64) -> Result<f64> {
    check_qubit_pair(x, s)?;
    let y = comb(w.w, -1.0, x.w);
    let u = comb(w.w, -s, x.w);
    let v = comb(w.w, s, x.w);
    let k = (1.0 + s).powi(2) - dot(u, u);
    let m = nalgebra::Matrix3::from_fn(|i, j| if i == j { k } else { 0.0 } + u[i] * u[j] - v[i] * v[j]);
    let inv = m.try_inverse().ok_or_else(|| Error::NotInvertible("singular 3×3 kernel".into()))?;
    let yv = nalgebra::Vector3::from(y);
    Ok((1.0 + s) * yv.dot(&(inv * yv)))
}

/// Ŝ_{g_s} = (1+s)|y|² / ((1+s)² − |v|²).
pub fn bloch_maxdiv_gs(w: &BlochVector, x: &BlochVector, s: f64) -> Result<f64> {
    check_qubit_pair(x, s)?;
    let y = comb(w.w, -1.0, x.w);
    let v = comb(w.w, s, x.w);
    let den = (1.0 + s).powi(2) - dot(v, v);
    if den <= 0.0 {
        return Err(Error::NotInvertible("(1+s)² ≤ |v|²".into()));
    }
    Ok((1.0 + s) * dot(y, y) / den)
}

/// |u|² + |v|² − 2((1−s)/(1+s)) u·v < 4s, the condition for a strict gap
/// between the two closed forms on non-commuting pairs.
pub fn bloch_strict_gap_predicate(w: &BlochVector, x: &BlochVector, s: f64) -> bool {
    let u = comb(w.w, -s, x.w);
    let v = comb(w.w, s, x.w);
    dot(u, u) + dot(v, v) - 2.0 * ((1.0 - s) / (1.0 + s)) * dot(u, v) < 4.0 * s
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuityReport {
    pub eps: Vec<f64>,
    #[serde(serialize_with = "ser_f64s")]
    pub values: Vec<f64>,
    pub extrapolated: f64,
    pub limit: ExtendedReal,
    pub error: f64,
}

/// S_f(ϱ+εI‖σ+εI) along the given ε (decreasing), extrapolated to ε = 0 and
/// compared with S_f(ϱ‖σ). Two points give a linear fit.
pub fn continuity_extrapolation(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator, eps: &[f64]) -> Result<ContinuityReport> {
    if eps.len() < 2 || eps.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("need at least two positive ε".into()));
    }
    let d = rho.dim();
    let mut values = Vec::with_capacity(eps.len());
    for &e in eps {
        let r = rho.add_scaled(&linalg::identity(d), e)?;
        let s = sigma.add_scaled(&linalg::identity(d), e)?;
        values.push(fdiv::standard_f_div(f, &r, &s)?.to_f64());
    }
    let n = eps.len();
    let extrapolated = if n >= 3 {
        // v(ε) ≈ L + a√ε + bε on the three smallest ε; the √ε term comes from kernels of ϱ or σ
        let rows: Vec<[f64; 3]> = (n - 3..n).map(|k| [1.0, eps[k].sqrt(), eps[k]]).collect();
        let a = nalgebra::Matrix3::from_fn(|i, j| rows[i][j]);
        let b = nalgebra::Vector3::new(values[n - 3], values[n - 2], values[n - 1]);
        a.lu().solve(&b).map(|x| x[0]).ok_or_else(|| Error::InvalidInput("ε values must be distinct".into()))?
    } else {
        let (e1, e2) = (eps[n - 2], eps[n - 1]);
        let (v1, v2) = (values[n - 2], values[n - 1]);
        v2 - e2 * (v1 - v2) / (e1 - e2)
    };
    let limit = fdiv::standard_f_div(f, rho, sigma)?;
    let error = match limit {
        ExtendedReal::Finite(l) => (extrapolated - l).abs(),
        ExtendedReal::PosInf => f64::INFINITY,
    };
    Ok(ContinuityReport { eps: eps.to_vec(), values, extrapolated, limit, error })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">")]
    Gt,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn lt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, relation: Relation::Lt, bound, pass: value < bound }
    }

    fn gt(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, relation: Relation::Gt, bound, pass: value > bound }
    }

    fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, relation: Relation::Gt, bound: 0.5, pass: ok }
    }
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else if *v < 0.0 {
        s.serialize_str("-inf")
    } else {
        s.serialize_str("nan")
    }
}

fn ser_f64s<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct W(f64);
    impl Serialize for W {
        fn serialize<T: Serializer>(&self, s: T) -> std::result::Result<T::Ok, T::Error> {
            ser_f64(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&W(*x))?;
    }
    seq.end()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExampleId {
    #[serde(rename = "ex4.8")]
    MaxdivNotReversible,
    #[serde(rename = "appC")]
    TildeNonMonotone,
    #[serde(rename = "appD")]
    ContinuityCounterexample,
    #[serde(rename = "sec6-fid")]
    FidelityPinching,
    #[serde(rename = "sec6-dmax")]
    DmaxPinching,
    #[serde(rename = "appB")]
    StochasticMultDomain,
}

impl ExampleId {
    pub const ALL: [ExampleId; 6] = [
        ExampleId::MaxdivNotReversible,
        ExampleId::TildeNonMonotone,
        ExampleId::ContinuityCounterexample,
        ExampleId::FidelityPinching,
        ExampleId::DmaxPinching,
        ExampleId::StochasticMultDomain,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExampleId::MaxdivNotReversible => "ex4.8",
            ExampleId::TildeNonMonotone => "appC",
            ExampleId::ContinuityCounterexample => "appD",
            ExampleId::FidelityPinching => "sec6-fid",
            ExampleId::DmaxPinching => "sec6-dmax",
            ExampleId::StochasticMultDomain => "appB",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s).ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub id: ExampleId,
    pub title: &'static str,
    pub verdict: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    fn new(id: ExampleId, title: &'static str, verdict: impl Into<String>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        Report { id, title, verdict: verdict.into(), checks, pass }
    }

    pub fn table(&self) -> String {
        let mut out = format!("{}: {}\nverdict: {}\n", self.id, self.title, self.verdict);
        for c in &self.checks {
            let rel = match c.relation {
                Relation::Lt => "<",
                Relation::Gt => ">",
            };
            out.push_str(&format!(
                "  [{}] {:<58} {:>12.4e} {} {:.0e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                rel,
                c.bound
            ));
        }
        out
    }
}

/// Pinching onto span{e1, e2} ⊕ span{e3}, ϱ = |ψ⟩⟨ψ| with ψ = (1, 1, 0), and σ
/// with eigenvalues 1/3, 3/11, 1 on x1 = (1,1,1)/√3, x2 = (1,0,−1)/√2, x3 = (1,−2,1)/√6.
pub fn pinched_pure_data() -> Result<(QuantumChannel, PsdOperator, PsdOperator)> {
    let p = linalg::real_diag(&[1.0, 1.0, 0.0]);
    let q = linalg::real_diag(&[0.0, 0.0, 1.0]);
    let phi = pinching_channel(&[p, q])?;
    let rho = fdiv::real_pure_state(&[1.0, 1.0, 0.0])?;
    let (s2, s3, s6) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt());
    let xs = [[1.0 / s3, 1.0 / s3, 1.0 / s3], [1.0 / s2, 0.0, -1.0 / s2], [1.0 / s6, -2.0 / s6, 1.0 / s6]];
    let mut sigma = linalg::zeros(3, 3);
    for (b, x) in [1.0 / 3.0, 3.0 / 11.0, 1.0].into_iter().zip(xs) {
        sigma += CMatrix::from_fn(3, 3, |i, j| c(b * x[i] * x[j]));
    }
    Ok((phi, rho, PsdOperator::new(sigma)?))
}

fn gap(a: ExtendedReal, b: ExtendedReal) -> f64 {
    match (a, b) {
        (ExtendedReal::Finite(x), ExtendedReal::Finite(y)) => (x - y).abs(),
        (ExtendedReal::PosInf, ExtendedReal::PosInf) => 0.0,
        _ => f64::INFINITY,
    }
}

fn maxdiv_not_reversible() -> Result<Report> {
    let (phi, rho, sigma) = pinched_pure_data()?;
    let psi = CMatrix::from_fn(3, 1, |i, _| c([1.0, 1.0, 0.0][i]));
    let full = (psi.adjoint() * sigma.power(-1.0) * &psi)[(0, 0)].re;
    let block = sigma.matrix().view((0, 0), (2, 2)).into_owned();
    let block_inv = block.try_inverse().ok_or_else(|| Error::NotInvertible("PσP block".into()))?;
    let pv = psi.rows(0, 2).into_owned();
    let pinched = (pv.adjoint() * block_inv * &pv)[(0, 0)].re;

    let pr = phi.apply_psd(&rho)?;
    let ps = phi.apply_psd(&sigma)?;
    let eta = DivergenceFunction::eta();
    let s_before = fdiv::relative_entropy(&rho, &sigma)?.to_f64();
    let s_after = fdiv::relative_entropy(&pr, &ps)?.to_f64();
    let hat = gap(fdiv::maximal_f_div(&eta, &rho, &sigma)?, fdiv::maximal_f_div(&eta, &pr, &ps)?);

    let maximal = maximal_preservation_report(&phi, &rho, &sigma)?;
    let standard = standard_preservation_report(&phi, &rho, &sigma, &reversibility::default_f_list(), &DEFAULT_Z_GRID)?;
    let max_ok = maximal.entries.iter().filter(|e| e.name != PETZ_ENTRY).all(|e| e.pass);
    let petz = standard.residual(PETZ_ENTRY);

    let checks = vec![
        Check::lt("|ψ†σ⁻¹ψ − 6|", (full - 6.0).abs(), 1e-9),
        Check::lt("|ψ†(PσP)⁻¹ψ − 6|", (pinched - 6.0).abs(), 1e-9),
        Check::lt("|Tr Φ(ϱ)²Φ(σ)⁻¹ − Tr ϱ²σ⁻¹|", quadratic_gap(&phi, &rho, &sigma)?.abs(), 1e-9),
        Check::gt("Petz residual ‖Φ_σ*(Φ(ϱ)) − ϱ‖₁", petz, 1e-3),
        Check::gt("S(ϱ‖σ) − S(Φϱ‖Φσ)", s_before - s_after, 1e-6),
        Check::lt("|Ŝ_η(ϱ‖σ) − Ŝ_η(Φϱ‖Φσ)|", hat, 1e-9),
        Check::flag("maximal battery passes", max_ok),
        Check::flag("standard battery fails", !standard.entries.iter().all(|e| e.pass)),
    ];
    let verdict = if max_ok && petz > 1e-3 { "maximal-preserved, not reversible" } else { "unexpected" };
    Ok(Report::new(ExampleId::MaxdivNotReversible, "maximal f-divergences preserved by a non-reversible pinching", verdict, checks))
}

fn tilde_non_monotone() -> Result<Report> {
    let (t, eps, delta) = (0.3, 1e-3, 1e-3);
    let f = DivergenceFunction::fdelta(delta)?;
    let rho0 = linalg::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let rho = PsdOperator::new((rho0 + linalg::identity(2) * c(eps)) * c(1.0 / (1.0 + 2.0 * eps)))?;
    let sigma = fdiv::diag_state(&[t, 1.0 - t])?;
    let phi = dephasing_channel(2);
    let pr = phi.apply_psd(&rho)?;
    let ps = phi.apply_psd(&sigma)?;
    let up = fdiv::tilde_f_div(&f, &pr, &ps)? - fdiv::tilde_f_div(&f, &rho, &sigma)?;
    let limit = 1.0 - 1.0 / (4.0 * t * (1.0 - t));
    let tilde_before = fdiv::tilde_f_div(&f, &rho, &sigma)?;

    // Commuting inputs: the tilde and standard forms agree and a mixing
    // bistochastic map strictly decreases the value.
    let a = fdiv::diag_state(&[0.7, 0.3])?;
    let b = fdiv::diag_state(&[0.2, 0.8])?;
    let agree = (fdiv::tilde_f_div(&f, &a, &b)? - fdiv::standard_f_div(&f, &a, &b)?.to_f64()).abs();
    let mix = stochastic_matrix_channel(&[vec![0.8, 0.2], vec![0.2, 0.8]], None)?;
    let (ma, mb) = (mix.apply_psd(&a)?, mix.apply_psd(&b)?);
    let down = fdiv::tilde_f_div(&f, &a, &b)? - fdiv::tilde_f_div(&f, &ma, &mb)?;

    let checks = vec![
        Check::gt("S̃(Φϱ‖Φσ) − S̃(ϱ‖σ) (increase under pinching)", up, 1e-6),
        Check::lt("S̃(ϱ‖σ), whose ε, δ → 0 limit is 1 − 1/(4t(1−t))", tilde_before, limit / 2.0),
        Check::lt("|S̃ − S_f| on commuting inputs", agree, 1e-9),
        Check::gt("S̃ decrease under a mixing map on commuting inputs", down, 1e-6),
    ];
    Ok(Report::new(
        ExampleId::TildeNonMonotone,
        "S̃_f is neither monotone increasing nor decreasing",
        "neither increasing nor decreasing",
        checks,
    ))
}

/// ϱ = σ = diag(1, 0), K = diag(0, 1), L = [[1/2, 1/2], [1/2, 1/2]].
pub fn continuity_counterexample_value(f: &DivergenceFunction, eps: f64) -> Result<f64> {
    let rho = linalg::real_diag(&[1.0, eps]);
    let sigma = linalg::real_diag(&[1.0, 0.0]) + linalg::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]) * c(eps);
    Ok(fdiv::standard_f_div(f, &PsdOperator::new(rho)?, &PsdOperator::new(sigma)?)?.to_f64())
}

/// The ε^{3−α} term of the counterexample, a lower bound for f = x^α.
pub fn continuity_counterexample_term(alpha: f64, eps: f64) -> f64 {
    let r = (1.0 + eps * eps).sqrt();
    eps.powf(3.0 - alpha) * (1.0 + eps + r).powf(alpha - 1.0) / (2.0 * (1.0 + eps * eps + r))
}

fn continuity_counterexample() -> Result<Report> {
    let x4 = DivergenceFunction::power(4.0)?;
    let x2 = DivergenceFunction::power(2.0)?;
    let eps = [1e-2, 1e-3, 1e-4];
    let v4: Vec<f64> = eps.iter().map(|&e| continuity_counterexample_value(&x4, e)).collect::<Result<_>>()?;
    let v2 = continuity_counterexample_value(&x2, 1e-4)?;
    let mut checks = vec![
        Check::gt("x⁴: growth from ε = 1e-2 to 1e-3", v4[1] / v4[0], 8.0),
        Check::gt("x⁴: growth from ε = 1e-3 to 1e-4", v4[2] / v4[1], 8.0),
    ];
    for (&e, &v) in eps.iter().zip(&v4) {
        let term = continuity_counterexample_term(4.0, e);
        checks.push(Check::lt(format!("x⁴: closed-form term − value at ε = {e:.0e}"), term - v, 1e-9 * v.max(1.0)));
    }
    checks.push(Check::lt("x²: |S(ϱ+εK‖σ+εL) − S(ϱ‖σ)| at ε = 1e-4", (v2 - 1.0).abs(), 1e-3));
    Ok(Report::new(
        ExampleId::ContinuityCounterexample,
        "discontinuity of S_f for a convex, not operator convex f",
        "x⁴ diverges, x² converges",
        checks,
    ))
}

pub const FID_THETA: f64 = std::f64::consts::PI / 5.0;
pub const FID_A: f64 = 0.7;
pub const FID_B: f64 = 0.3;

fn fidelity_pinching() -> Result<Report> {
    let phi = dephasing_channel(2);
    let rho = fdiv::diag_state(&[1.0, 0.0])?;
    let sigma = azrenyi::rotated_qubit(FID_THETA, FID_A, FID_B)?;
    let pr = phi.apply_psd(&rho)?;
    let ps = phi.apply_psd(&sigma)?;
    let (co2, si2) = (FID_THETA.cos().powi(2), FID_THETA.sin().powi(2));
    let mean = FID_A * co2 + FID_B * si2;
    let s_before = fdiv::relative_entropy(&rho, &sigma)?.to_f64();
    let s_after = fdiv::relative_entropy(&pr, &ps)?.to_f64();
    let f_gap = (azrenyi::fidelity(&rho, &sigma) - azrenyi::fidelity(&pr, &ps)).abs();
    let petz = petz_pair(&phi, &sigma)?;
    let petz_res = rel_trace_dist(&petz.recover(pr.matrix()), rho.matrix());
    let mut checks = vec![
        Check::lt("|F(ϱ,σ) − F(Φϱ,Φσ)|", f_gap, 1e-9),
        Check::gt("S(ϱ‖σ) − S(Φϱ‖Φσ)", s_before - s_after, 1e-4),
        Check::gt("Petz residual", petz_res, 1e-3),
        Check::lt("|S(ϱ‖σ) + cos²θ ln a + sin²θ ln b|", (s_before + co2 * FID_A.ln() + si2 * FID_B.ln()).abs(), 1e-9),
        Check::lt("|S(Φϱ‖Φσ) + ln(a cos²θ + b sin²θ)|", (s_after + mean.ln()).abs(), 1e-9),
    ];
    for alpha in [0.3, 0.5, 0.7] {
        let p = AzParams::new(alpha, 1.0 - alpha)?;
        let q = azrenyi::q_az(p, &rho, &sigma)?.to_f64();
        checks.push(Check::lt(
            format!("α = {alpha}, z = 1−α: |Q − (a cos²θ + b sin²θ)^(1−α)|"),
            (q - mean.powf(1.0 - alpha)).abs(),
            1e-9,
        ));
        let rep = azrenyi::az_equality_battery(&phi, &rho, &sigma, p)?;
        checks.push(Check::lt(format!("α = {alpha}: (E1) residual"), rep.residual(E_NAMES[1]), 1e-9));
        checks.push(Check::gt(format!("α = {alpha}: (E3) residual"), rep.residual(E_NAMES[3]), 1e-3));
    }
    Ok(Report::new(
        ExampleId::FidelityPinching,
        "D_{α,1−α} preserved by a pinching that is not reversible",
        "preserved, not reversible",
        checks,
    ))
}

pub const DMAX_MU: [f64; 3] = [0.5, 0.25, 0.25];
pub const DMAX_LAMBDA: f64 = 0.9;
pub const DMAX_AB: f64 = 0.05;
pub const DMAX_C: f64 = 0.03;

pub fn dmax_data() -> Result<(QuantumChannel, PsdOperator, PsdOperator)> {
    let rho = linalg::from_real_rows(&[&[DMAX_LAMBDA, 0.0, 0.0], &[0.0, DMAX_AB, DMAX_C], &[0.0, DMAX_C, DMAX_AB]]);
    Ok((dephasing_channel(3), PsdOperator::new(rho)?, fdiv::diag_state(&DMAX_MU)?))
}

fn dmax_pinching() -> Result<Report> {
    let (phi, rho, sigma) = dmax_data()?;
    let pr = phi.apply_psd(&rho)?;
    let ps = phi.apply_psd(&sigma)?;
    let before = azrenyi::d_max(&rho, &sigma)?;
    let after = azrenyi::d_max(&pr, &ps)?;
    let qgap = quadratic_gap(&phi, &rho, &sigma)?;
    let oracle = DMAX_C * DMAX_C * (1.0 / DMAX_MU[1] + 1.0 / DMAX_MU[2]);
    let checks = vec![
        Check::lt("|D_max(ϱ‖σ) − D_max(Φϱ‖Φσ)|", gap(before, after), 1e-9),
        Check::lt("|D_max(ϱ‖σ) − ln(λ/μ₁)|", (before.to_f64() - (DMAX_LAMBDA / DMAX_MU[0]).ln()).abs(), 1e-9),
        Check::gt("Tr ϱ²σ⁻¹ − Tr Φ(ϱ)²Φ(σ)⁻¹", qgap, 1e-4),
        Check::lt("|gap − |c|²(1/μ₂ + 1/μ₃)|", (qgap - oracle).abs(), 1e-9),
    ];
    Ok(Report::new(ExampleId::DmaxPinching, "D_max preserved while Tr ϱ²σ⁻¹ drops", "D_max preserved, (c) violated", checks))
}

pub fn stochastic_example_matrix() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.25, 0.25, 0.25, 0.25],
        vec![0.0, 0.0, 0.0, 1.0],
    ]
}

fn stochastic_mult_domain() -> Result<Report> {
    let t = stochastic_example_matrix();
    let phi = stochastic_matrix_channel(&t, None)?;
    let omega = PsdOperator::scaled_identity(4, 0.25)?;
    let dom = multiplicative_domain(&phi, &omega)?;
    let predicted = crate::channels::classical_mult_domain_predicate(&t)?;
    let fix = fixed_point_set(&phi)?;
    let a = linalg::real_diag(&[1.0, 2.0, 2.0, 3.0]);
    let a2 = &a * &a;
    let res = |x: &CMatrix| linalg::trace_norm(&(phi.apply(x) - x));
    let checks = vec![
        Check::lt("dim M_Φ − 1", (dom.dimension() as f64 - 1.0).abs(), 0.5),
        Check::lt("predicted dim M_Φ − 1", (predicted.dimension() as f64 - 1.0).abs(), 0.5),
        Check::gt("dim fix(Φ)", fix.dimension() as f64, 1.5),
        Check::lt("‖Φ(A) − A‖₁", res(&a), 1e-9),
        Check::gt("‖Φ(A²) − A²‖₁", res(&a2), 1e-2),
        Check::flag("Φ is unital", phi.unital),
        Check::flag("Φ is not trace-preserving", !phi.trace_preserving),
    ];
    Ok(Report::new(
        ExampleId::StochasticMultDomain,
        "multiplicative domain strictly inside the fixed points",
        "M_Φ = ℂI ⊊ fix(Φ), fix(Φ) not an algebra",
        checks,
    ))
}

pub fn reproduce_example(id: ExampleId) -> Result<Report> {
    match id {
        ExampleId::MaxdivNotReversible => maxdiv_not_reversible(),
        ExampleId::TildeNonMonotone => tilde_non_monotone(),
        ExampleId::ContinuityCounterexample => continuity_counterexample(),
        ExampleId::FidelityPinching => fidelity_pinching(),
        ExampleId::DmaxPinching => dmax_pinching(),
        ExampleId::StochasticMultDomain => stochastic_mult_domain(),
    }
}

pub fn reproduce_all() -> Result<Vec<Report>> {
    ExampleId::ALL.into_iter().map(reproduce_example).collect()
}

/// Accepts an id or "all".
pub fn reproduce(id: &str) -> Result<Vec<Report>> {
    if id == "all" {
        reproduce_all()
    } else {
        Ok(vec![reproduce_example(id.parse()?)?])
    }
}
