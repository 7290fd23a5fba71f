//! Fixed-point sets, multiplicative domains, block decompositions of
//! fixed-point algebras and the preservation batteries.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::channels::{petz_pair, PetzMaps, QuantumChannel};
use crate::error::{Error, Result};
use crate::fdiv::{self, DivergenceFunction, ExtendedReal};
use crate::linalg::{self, c, CMatrix, C64};
use crate::operators::{self, HermitianOperator, PsdOperator};

/// Kernel threshold for fixed points and multiplicative domains.
pub const KERNEL_TOL: f64 = 1e-8;
/// Default tolerance on scalar gaps.
pub const SCALAR_TOL: f64 = 1e-9;
/// Default tolerance on operator residuals (trace norm, relative to max(1, ‖target‖₁)).
pub const OPERATOR_TOL: f64 = 1e-8;
const MEMBERSHIP_TOL: f64 = 1e-9;
const GENERIC_RETRIES: u64 = 5;

/// Hermitian matrix ↦ real coordinates, isometric for the Hilbert–Schmidt norm.
fn herm_to_real(h: &CMatrix) -> DVector<f64> {
    let d = h.nrows();
    let mut v = Vec::with_capacity(d * d);
    let r2 = std::f64::consts::SQRT_2;
    for i in 0..d {
        v.push(h[(i, i)].re);
        for j in i + 1..d {
            v.push(r2 * h[(i, j)].re);
            v.push(r2 * h[(i, j)].im);
        }
    }
    DVector::from_vec(v)
}

fn real_to_herm(v: &[f64], d: usize) -> CMatrix {
    let mut h = linalg::zeros(d, d);
    let r2 = std::f64::consts::SQRT_2;
    let mut k = 0;
    for i in 0..d {
        h[(i, i)] = c(v[k]);
        k += 1;
        for j in i + 1..d {
            let z = C64::new(v[k] / r2, v[k + 1] / r2);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// A subspace of d×d matrices with a Hilbert–Schmidt orthonormal basis.
/// Star-closed subspaces carry a Hermitian basis.
#[derive(Clone, Debug)]
pub struct OperatorSubspace {
    pub dim: usize,
    pub basis: Vec<CMatrix>,
    pub star_closed: bool,
    pub unital: bool,
}

impl OperatorSubspace {
    /// Span of `mats`; directions with singular value below `tol·s_max` are dropped.
    pub fn from_spanning(dim: usize, mats: &[CMatrix], tol: f64) -> Self {
        let basis = complex_span(dim, mats, tol);
        let mut s = OperatorSubspace { dim, basis, star_closed: false, unital: false };
        s.star_closed = s.basis.iter().all(|b| s.residual(&b.adjoint()) <= MEMBERSHIP_TOL.max(tol));
        if s.star_closed {
            let mut herm = Vec::with_capacity(2 * s.basis.len());
            for b in &s.basis {
                herm.push(linalg::hermitian_part(b));
                herm.push((b - b.adjoint()) * C64::new(0.0, -0.5));
            }
            let hb = hermitian_span(dim, &herm, tol);
            if hb.len() == s.basis.len() {
                s.basis = hb;
            }
        }
        s.unital = s.residual(&linalg::identity(dim)) <= MEMBERSHIP_TOL * (dim as f64).sqrt();
        s
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        self.basis
            .iter()
            .fold(linalg::zeros(self.dim, self.dim), |acc, b| acc + b * linalg::hs_inner(b, x))
    }

    /// ‖X − P(X)‖_F.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        (x - self.project(x)).norm()
    }

    pub fn contains(&self, x: &CMatrix, tol: f64) -> bool {
        self.residual(x) <= tol * x.norm().max(1.0)
    }

    /// The d²×d² projector onto the vectorized subspace.
    pub fn projector(&self) -> CMatrix {
        let n = self.dim * self.dim;
        let mut p = linalg::zeros(n, n);
        for b in &self.basis {
            let v = linalg::vec_col(b);
            p += &v * v.adjoint();
        }
        p
    }

    /// Hilbert–Schmidt distance between the two projectors.
    pub fn distance(&self, other: &OperatorSubspace) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        (self.projector() - other.projector()).norm()
    }

    /// Largest residual of a basis product outside the subspace.
    pub fn product_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        worst
    }
}

fn complex_span(dim: usize, mats: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    if mats.is_empty() {
        return vec![];
    }
    let n = dim * dim;
    let mut m = linalg::zeros(n, mats.len());
    for (k, x) in mats.iter().enumerate() {
        m.set_column(k, &linalg::vec_col(x));
    }
    let (u, sv, _) = linalg::svd(&m);
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return vec![];
    }
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * smax)
        .map(|(k, _)| linalg::unvec(&u.column(k).into_owned(), dim, dim))
        .collect()
}

fn hermitian_span(dim: usize, herm: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    if herm.is_empty() {
        return vec![];
    }
    let n = dim * dim;
    let mut m = DMatrix::<f64>::zeros(n, herm.len());
    for (k, h) in herm.iter().enumerate() {
        m.set_column(k, &herm_to_real(h));
    }
    let (u, sv, _) = linalg::svd(&m);
    let smax = sv.iter().fold(0.0f64, |a, &s| a.max(s));
    if smax == 0.0 {
        return vec![];
    }
    sv.iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * smax)
        .map(|(k, _)| real_to_herm(u.column(k).as_slice(), dim))
        .collect()
}

/// F(Φ) = {X : Φ(X) = X}.
pub fn fixed_point_set(phi: &QuantumChannel) -> Result<OperatorSubspace> {
    if phi.in_dim != phi.out_dim {
        return Err(Error::DimensionMismatch { expected: phi.in_dim, found: phi.out_dim });
    }
    Ok(fixed_points_of(phi.in_dim, |x| phi.apply(x)))
}

/// Fixed points of an arbitrary linear map on d×d matrices.
pub fn fixed_points_of(d: usize, map: impl Fn(&CMatrix) -> CMatrix) -> OperatorSubspace {
    let s = operators::Superoperator::from_map(d, d, map);
    let m = s.matrix - linalg::identity(d * d);
    let kernel = linalg::null_space(&m, KERNEL_TOL);
    let mats: Vec<CMatrix> = kernel.iter().map(|v| linalg::unvec(v, d, d)).collect();
    OperatorSubspace::from_spanning(d, &mats, KERNEL_TOL)
}

/// Multiplicative domain of a unital CP map: the joint kernel of
/// X ↦ Tr ω(Φ(X†X) − Φ(X)†Φ(X)) and X ↦ Tr ω(Φ(XX†) − Φ(X)Φ(X)†).
pub fn multiplicative_domain(phi: &QuantumChannel, omega: &PsdOperator) -> Result<OperatorSubspace> {
    if !phi.unital || !phi.cp_certified {
        return Err(Error::ContractViolation("multiplicative domain needs a unital CP map".into()));
    }
    if omega.dim() != phi.out_dim {
        return Err(Error::DimensionMismatch { expected: phi.out_dim, found: omega.dim() });
    }
    if !omega.is_invertible() {
        return Err(Error::NotInvertible("reference ω must be invertible".into()));
    }
    let d = phi.in_dim;
    let n = d * d;
    let unit = |a: usize| {
        let mut e = linalg::zeros(d, d);
        e[(a % d, a / d)] = c(1.0);
        e
    };
    let images: Vec<CMatrix> = (0..n).map(|a| phi.apply(&unit(a))).collect();
    let w = omega.matrix();
    let t: Vec<C64> = images.iter().map(|im| (w * im).trace()).collect();
    let right: Vec<CMatrix> = images.iter().map(|im| im * w).collect();
    let left: Vec<CMatrix> = images.iter().map(|im| w * im).collect();
    let mut g = linalg::zeros(n, n);
    for a in 0..n {
        let (i, j) = (a % d, a / d);
        for b in 0..n {
            let (k, l) = (b % d, b / d);
            // E_a†E_b = δ_ik E_jl and E_b E_a† = δ_lj E_ki.
            let mut v = -linalg::hs_inner(&images[a], &right[b]) - linalg::hs_inner(&images[a], &left[b]);
            if i == k {
                v += t[j + d * l];
            }
            if l == j {
                v += t[k + d * i];
            }
            g[(a, b)] = v;
        }
    }
    let (vals, vecs) = linalg::eigh(&g);
    let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mats: Vec<CMatrix> = vals
        .iter()
        .enumerate()
        .filter(|(_, &v)| v.abs() < KERNEL_TOL * scale)
        .map(|(k, _)| linalg::unvec(&vecs.column(k).into_owned(), d, d))
        .collect();
    let dom = OperatorSubspace::from_spanning(d, &mats, KERNEL_TOL);
    if !dom.star_closed || !dom.unital {
        return Err(Error::NumericalInstability("multiplicative domain is not a unital *-subspace".into()));
    }
    Ok(dom)
}

/// One summand V(B(ℂ^{d_L}) ⊗ I_{d_R})V†, with ω on the right factor when known.
#[derive(Clone, Debug)]
pub struct AlgebraBlock {
    pub d_l: usize,
    pub d_r: usize,
    /// Isometry ℂ^{d_L} ⊗ ℂ^{d_R} → H, index i·d_R + m.
    pub isometry: CMatrix,
    pub omega: Option<PsdOperator>,
}

#[derive(Clone, Debug)]
pub struct AlgebraBlockDecomposition {
    pub dim: usize,
    pub blocks: Vec<AlgebraBlock>,
    /// Projection onto the complement of all block ranges.
    pub residual_projector: CMatrix,
}

impl AlgebraBlockDecomposition {
    /// ⊕_k V_k(B(ℂ^{d_L})⊗I)V_k† as a subspace.
    pub fn reassembled_algebra(&self) -> OperatorSubspace {
        let mut mats = Vec::new();
        for b in &self.blocks {
            for i in 0..b.d_l {
                for j in 0..b.d_l {
                    let mut e = linalg::zeros(b.d_l, b.d_l);
                    e[(i, j)] = c(1.0);
                    let x = linalg::kron(&e, &linalg::identity(b.d_r));
                    mats.push(&b.isometry * x * b.isometry.adjoint());
                }
            }
        }
        OperatorSubspace::from_spanning(self.dim, &mats, KERNEL_TOL)
    }

    /// (d_L, d_R) pairs, sorted.
    pub fn shape(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<(usize, usize)> = self.blocks.iter().map(|b| (b.d_l, b.d_r)).collect();
        s.sort();
        s
    }

    /// ⊕_k V_k (X_k ⊗ ω_k) V_k†.
    pub fn embed_state(&self, parts: &[CMatrix]) -> Result<CMatrix> {
        if parts.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch { expected: self.blocks.len(), found: parts.len() });
        }
        let mut out = linalg::zeros(self.dim, self.dim);
        for (b, x) in self.blocks.iter().zip(parts) {
            let w = b
                .omega
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("block has no ω factor".into()))?;
            out += &b.isometry * linalg::kron(x, w.matrix()) * b.isometry.adjoint();
        }
        Ok(out)
    }
}

fn cluster_columns(vals: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (vals[*g.last().unwrap()] - v).abs() <= tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

fn columns(m: &CMatrix, idx: &[usize]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), idx.len(), |r, k| m[(r, idx[k])])
}

/// Numerical Wedderburn decomposition of a finite-dimensional *-algebra.
pub fn algebra_block_structure(a: &OperatorSubspace) -> Result<AlgebraBlockDecomposition> {
    if !a.star_closed {
        return Err(Error::StructureExtraction("subspace is not closed under adjoints".into()));
    }
    if a.dimension() == 0 {
        return Err(Error::StructureExtraction("zero algebra".into()));
    }
    let defect = a.product_defect();
    if defect > KERNEL_TOL {
        return Err(Error::StructureExtraction(format!("not closed under products (defect {defect:.2e})")));
    }
    let d = a.dim;
    let m = a.dimension();
    // Center: coefficient vectors c with [Σ c_i B_i, B_k] = 0 for all k.
    let mut cm = linalg::zeros(m * d * d, m);
    for (j, bj) in a.basis.iter().enumerate() {
        for (k, bk) in a.basis.iter().enumerate() {
            let v = linalg::vec_col(&linalg::commutator(bj, bk));
            cm.view_mut((k * d * d, j), (d * d, 1)).copy_from(&v);
        }
    }
    let cvecs = linalg::null_space(&cm, KERNEL_TOL);
    let central: Vec<CMatrix> = cvecs
        .iter()
        .map(|cv| a.basis.iter().zip(cv.iter()).fold(linalg::zeros(d, d), |acc, (b, z)| acc + b * *z))
        .collect();
    let center = OperatorSubspace::from_spanning(d, &central, KERNEL_TOL);
    let nblocks = center.dimension();

    let mut last_err = String::new();
    for attempt in 0..GENERIC_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + attempt);
        match try_blocks(a, &center, nblocks, &mut rng) {
            Ok(dec) => return Ok(dec),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::StructureExtraction(format!(
        "generic element stayed degenerate after {GENERIC_RETRIES} attempts: {last_err}"
    )))
}

fn random_hermitian_combo<R: Rng>(basis: &[CMatrix], d: usize, rng: &mut R) -> CMatrix {
    let x = basis
        .iter()
        .fold(linalg::zeros(d, d), |acc, b| acc + b * c(rng.random_range(-1.0..1.0)));
    linalg::hermitian_part(&x)
}

fn try_blocks<R: Rng>(
    a: &OperatorSubspace,
    center: &OperatorSubspace,
    nblocks: usize,
    rng: &mut R,
) -> Result<AlgebraBlockDecomposition> {
    let d = a.dim;
    let z = random_hermitian_combo(&center.basis, d, rng);
    let (vals, vecs) = linalg::eigh(&z);
    let spread = vals.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let mut qs = Vec::new();
    for g in cluster_columns(&vals, 1e-6 * spread) {
        let f = columns(&vecs, &g);
        let p = &f * f.adjoint();
        if a.contains(&p, 1e-7) {
            qs.push(f);
        }
    }
    if qs.len() != nblocks {
        return Err(Error::StructureExtraction(format!(
            "found {} central projections, center has dimension {nblocks}",
            qs.len()
        )));
    }
    let mut blocks = Vec::new();
    let mut covered = linalg::zeros(d, d);
    for w in qs {
        covered += &w * w.adjoint();
        blocks.push(extract_block(a, &w, rng)?);
    }
    let dec = AlgebraBlockDecomposition { dim: d, blocks, residual_projector: linalg::identity(d) - covered };
    let dist = dec.reassembled_algebra().distance(a);
    if dist > 1e-8 {
        return Err(Error::StructureExtraction(format!("reassembled algebra differs by {dist:.2e}")));
    }
    Ok(dec)
}

/// Factorizes Q_k A Q_k ≅ B(ℂ^{d_L}) ⊗ I_{d_R}; `w` spans the range of Q_k.
fn extract_block<R: Rng>(a: &OperatorSubspace, w: &CMatrix, rng: &mut R) -> Result<AlgebraBlock> {
    let n = w.ncols();
    let local: Vec<CMatrix> = a.basis.iter().map(|b| w.adjoint() * b * w).collect();
    let ak = OperatorSubspace::from_spanning(n, &local, KERNEL_TOL);
    let mk = ak.dimension();
    let d_l = (mk as f64).sqrt().round() as usize;
    if d_l == 0 || d_l * d_l != mk || !n.is_multiple_of(d_l) {
        return Err(Error::StructureExtraction(format!("block of rank {n} has algebra dimension {mk}")));
    }
    let d_r = n / d_l;
    let y = random_hermitian_combo(&ak.basis, n, rng);
    let (vals, vecs) = linalg::eigh(&y);
    let spread = vals.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1e-300);
    let groups = cluster_columns(&vals, 1e-6 * spread);
    if groups.len() != d_l || groups.iter().any(|g| g.len() != d_r) {
        return Err(Error::StructureExtraction("generic block element has unexpected multiplicities".into()));
    }
    let fs: Vec<CMatrix> = groups.iter().map(|g| columns(&vecs, g)).collect();
    let zc = ak.basis.iter().fold(linalg::zeros(n, n), |acc, b| {
        acc + b * C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let mut v = linalg::zeros(n, n);
    for (i, fi) in fs.iter().enumerate() {
        let t = if i == 0 {
            linalg::identity(d_r)
        } else {
            let t = fi.adjoint() * &zc * &fs[0];
            let norm = linalg::op_norm(&t);
            if norm < 1e-6 {
                return Err(Error::StructureExtraction("vanishing matrix unit".into()));
            }
            t * c(1.0 / norm)
        };
        let cols = fi * t;
        v.view_mut((0, i * d_r), (n, d_r)).copy_from(&cols);
    }
    if (v.adjoint() * &v - linalg::identity(n)).norm() > 1e-8 {
        return Err(Error::StructureExtraction("block isometry is not orthonormal".into()));
    }
    Ok(AlgebraBlock { d_l, d_r, isometry: w * v, omega: None })
}

/// Partial trace over the left factor of ℂ^{dl} ⊗ ℂ^{dr}.
pub fn partial_trace_left(m: &CMatrix, dl: usize, dr: usize) -> CMatrix {
    CMatrix::from_fn(dr, dr, |p, q| (0..dl).map(|i| m[(i * dr + p, i * dr + q)]).sum())
}

/// Partial trace over the right factor of ℂ^{dl} ⊗ ℂ^{dr}.
pub fn partial_trace_right(m: &CMatrix, dl: usize, dr: usize) -> CMatrix {
    CMatrix::from_fn(dl, dl, |i, j| (0..dr).map(|p| m[(i * dr + p, j * dr + p)]).sum())
}

/// Block structure of fix(Φ*∘Φ_σ) on supp σ with σ = ⊕ σ_{k,L} ⊗ ω_k.
pub fn decompose_fixed_point_states(phi: &QuantumChannel, sigma: &PsdOperator) -> Result<AlgebraBlockDecomposition> {
    if !phi.cp_certified || !phi.trace_preserving {
        return Err(Error::ContractViolation("decomposition needs a CPTP channel".into()));
    }
    let pm = petz_pair(phi, sigma)?;
    let (_, w) = sigma.support_eigen();
    let r = w.ncols();
    let alg = fixed_points_of(r, |x| w.adjoint() * pm.adjoint_after_forward(&(&w * x * w.adjoint())) * &w);
    let local = algebra_block_structure(&alg)?;
    let d = sigma.dim();
    let mut blocks = Vec::new();
    let mut rebuilt = linalg::zeros(d, d);
    let scale = sigma.trace();
    for b in local.blocks {
        let v = &w * &b.isometry;
        let sk = v.adjoint() * sigma.matrix() * &v;
        let tk = linalg::trace_re(&sk);
        let omega = partial_trace_left(&sk, b.d_l, b.d_r) * c(1.0 / tk);
        let sl = partial_trace_right(&sk, b.d_l, b.d_r);
        let prod = linalg::kron(&sl, &omega);
        let res = linalg::trace_norm(&(&sk - &prod)) / tk;
        if res > 1e-7 {
            return Err(Error::StructureExtraction(format!("σ does not factor on a block (residual {res:.2e})")));
        }
        rebuilt += &v * prod * v.adjoint();
        blocks.push(AlgebraBlock {
            d_l: b.d_l,
            d_r: b.d_r,
            isometry: v,
            omega: Some(PsdOperator::new(linalg::hermitian_part(&omega))?),
        });
    }
    let res = linalg::trace_norm(&(rebuilt - sigma.matrix())) / scale;
    if res > 1e-7 {
        return Err(Error::StructureExtraction(format!("σ is not block diagonal (residual {res:.2e})")));
    }
    Ok(AlgebraBlockDecomposition { dim: d, blocks, residual_projector: linalg::identity(d) - sigma.support_projection() })
}

fn ser_residual<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionEntry {
    pub name: String,
    #[serde(serialize_with = "ser_residual")]
    pub residual: f64,
    pub pass: bool,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Reversible,
    MaxdivPreservingOnly,
    Neither,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Reversible => "reversible",
            Verdict::MaxdivPreservingOnly => "maxdiv-preserving-only",
            Verdict::Neither => "neither",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EqualityReport {
    pub entries: Vec<ConditionEntry>,
    pub verdict: Verdict,
    /// False when conditions that are equivalent in theory disagree numerically.
    pub consistent: bool,
    pub notes: Vec<String>,
}

impl EqualityReport {
    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn passes(&self, name: &str) -> bool {
        self.get(name).map(|e| e.pass).unwrap_or(false)
    }

    pub fn residual(&self, name: &str) -> f64 {
        self.get(name).map(|e| e.residual).unwrap_or(f64::NAN)
    }

    pub fn max_residual(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.residual))
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "{:<40} {:>12.4e} {:>6} (tol {:.0e})\n",
                e.name,
                e.residual,
                if e.pass { "pass" } else { "FAIL" },
                e.tol
            ));
        }
        out.push_str(&format!("verdict: {}\n", self.verdict));
        out
    }
}

pub(crate) fn entry(name: impl Into<String>, residual: f64, tol: f64) -> ConditionEntry {
    ConditionEntry { name: name.into(), residual, pass: residual <= tol, tol }
}

/// ‖A − B‖₁ / max(1, ‖B‖₁).
pub fn rel_trace_dist(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::trace_norm(&(a - b)) / linalg::trace_norm(b).max(1.0)
}

fn divergence_gap(before: ExtendedReal, after: ExtendedReal) -> f64 {
    match (before, after) {
        (ExtendedReal::PosInf, ExtendedReal::PosInf) => 0.0,
        (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs(),
        _ => f64::INFINITY,
    }
}

pub const PETZ_ENTRY: &str = "Petz recovery Φ_σ*(Φ(ϱ)) = ϱ";
pub const MAX_C_ENTRY: &str = "(c) Tr ϱ²σ⁻¹ preserved";

fn check_support(rho: &PsdOperator, sigma: &PsdOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    if !rho.support_le(sigma) {
        return Err(Error::SupportCondition("the report requires supp ϱ ⊆ supp σ".into()));
    }
    Ok(())
}

fn petz_residual(pm: &PetzMaps, rho: &PsdOperator) -> f64 {
    let back = pm.recover(&pm.channel.apply(rho.matrix()));
    rel_trace_dist(&back, rho.matrix())
}

/// Tr ϱ²σ⁻¹ − Tr Φ(ϱ)²Φ(σ)⁻¹ with inverses on supports.
pub fn quadratic_gap(phi: &QuantumChannel, rho: &PsdOperator, sigma: &PsdOperator) -> Result<f64> {
    let before = linalg::trace_re(&(rho.matrix() * sigma.power(-1.0) * rho.matrix()));
    let pr = phi.apply_psd(rho)?;
    let ps = phi.apply_psd(sigma)?;
    let after = linalg::trace_re(&(pr.matrix() * ps.power(-1.0) * pr.matrix()));
    Ok(before - after)
}

pub fn default_f_list() -> Vec<DivergenceFunction> {
    vec![
        DivergenceFunction::eta(),
        DivergenceFunction::power(0.5).expect("valid"),
        DivergenceFunction::power(2.0).expect("valid"),
        DivergenceFunction::gs(1.0).expect("valid"),
    ]
}

pub const DEFAULT_Z_GRID: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

/// Battery of reversibility conditions for 2-positive trace-preserving Φ.
pub fn standard_preservation_report(
    phi: &QuantumChannel,
    rho: &PsdOperator,
    sigma: &PsdOperator,
    f_list: &[DivergenceFunction],
    z_list: &[f64],
) -> Result<EqualityReport> {
    check_support(rho, sigma)?;
    if !phi.trace_preserving {
        return Err(Error::ContractViolation("the standard battery needs a trace-preserving map".into()));
    }
    let pm = petz_pair(phi, sigma)?;
    let pr = phi.apply_psd(rho)?;
    let ps = pm.phi_sigma.clone();
    let mut entries = Vec::new();
    let mut notes = vec!["condition (vi) is checked on a real z grid only".to_string()];

    let petz = petz_residual(&pm, rho);
    entries.push(entry(PETZ_ENTRY, petz, OPERATOR_TOL));

    let s0 = sigma.support_projection();
    let adj = phi.adjoint();
    for &z in z_list {
        let lhs = &s0 * adj.apply(&(ps.power(-z) * pr.power(2.0 * z) * ps.power(-z))) * &s0;
        let rhs = sigma.power(-z) * rho.power(2.0 * z) * sigma.power(-z);
        let name = if z == 0.5 { "(vii) z = 1/2".to_string() } else { format!("(vi) z = {z}") };
        entries.push(entry(name, rel_trace_dist(&lhs, &rhs), OPERATOR_TOL));
    }

    let x = sigma.power(-0.5) * rho.matrix() * sigma.power(-0.5);
    let fixed = pm.adjoint_after_forward(&x);
    entries.push(entry("(ix) σ^{-1/2}ϱσ^{-1/2} ∈ fix(Φ*∘Φ_σ)", rel_trace_dist(&(&s0 * fixed * &s0), &x), OPERATOR_TOL));

    for f in f_list {
        let gap = divergence_gap(fdiv::standard_f_div(f, rho, sigma)?, fdiv::standard_f_div(f, &pr, &ps)?);
        entries.push(entry(format!("S_f gap, f = {f}"), gap, SCALAR_TOL));
    }

    let densities = (rho.trace() - 1.0).abs() < 1e-9 && (sigma.trace() - 1.0).abs() < 1e-9;
    if densities && sigma.is_invertible() {
        let diff_in = HermitianOperator::new(rho.matrix() - sigma.matrix())?;
        let diff_out = pr.matrix() - ps.matrix();
        for (name, kappa) in [
            ("(x) metric gap, κ(x) = x^{-1/2}", &operators::inv_sqrt_kernel as &dyn Fn(f64) -> f64),
            ("(x) metric gap, BKM", &operators::bkm_kernel as &dyn Fn(f64) -> f64),
        ] {
            let before = operators::monotone_metric_form(kappa, sigma, &diff_in)?;
            let after = operators::monotone_metric_form_on_support(kappa, &ps, &diff_out);
            entries.push(entry(name, (before - after).abs(), SCALAR_TOL * before.max(1.0)));
        }
    } else {
        notes.push("metric condition skipped: needs densities with invertible σ".into());
    }

    let qgap = quadratic_gap(phi, rho, sigma)?;
    let qentry = entry(MAX_C_ENTRY, qgap.abs(), SCALAR_TOL);
    let verdict = verdict_from(petz <= OPERATOR_TOL, qentry.pass);
    // single z in (vi) or f = x² may pass without reversibility; (vii) and (ix) may not
    let pivotal = |e: &&ConditionEntry| e.name == PETZ_ENTRY || e.name.starts_with("(vii)") || e.name.starts_with("(ix)");
    let mut piv = entries.iter().filter(pivotal).map(|e| e.pass);
    let first = piv.next().unwrap_or(true);
    let consistent = piv.all(|p| p == first);
    entries.push(qentry);
    Ok(EqualityReport { entries, verdict, consistent, notes })
}

fn verdict_from(petz_pass: bool, maximal_pass: bool) -> Verdict {
    if petz_pass {
        Verdict::Reversible
    } else if maximal_pass {
        Verdict::MaxdivPreservingOnly
    } else {
        Verdict::Neither
    }
}

/// B^{1/2} φ(B^{-1/2} A B^{-1/2}) B^{1/2} on supp B, for φ(0) = 0.
fn sandwich(phi: &dyn Fn(f64) -> f64, a: &PsdOperator, b: &PsdOperator) -> CMatrix {
    let bh = b.power(0.5);
    let bi = b.power(-0.5);
    let x = linalg::hermitian_part(&(&bi * a.matrix() * &bi));
    &bh * linalg::herm_apply(&x, |t| phi(t.max(0.0))) * &bh
}

/// Battery of the maximal-divergence preservation conditions for positive
/// trace-preserving Φ.
pub fn maximal_preservation_report(phi: &QuantumChannel, rho: &PsdOperator, sigma: &PsdOperator) -> Result<EqualityReport> {
    check_support(rho, sigma)?;
    if !phi.trace_preserving {
        return Err(Error::ContractViolation("the maximal battery needs a trace-preserving map".into()));
    }
    let pr = phi.apply_psd(rho)?;
    let ps = phi.apply_psd(sigma)?;
    let mut entries = Vec::new();

    let qgap = quadratic_gap(phi, rho, sigma)?;
    let c_entry = entry(MAX_C_ENTRY, qgap.abs(), SCALAR_TOL);
    let c_pass = c_entry.pass;
    entries.push(c_entry);

    let g_lhs = phi.apply(&(rho.matrix() * sigma.power(-1.0) * rho.matrix()));
    let g_rhs = pr.matrix() * ps.power(-1.0) * pr.matrix();
    let g_entry = entry("(g) Φ(ϱσ⁻¹ϱ) = Φ(ϱ)Φ(σ)⁻¹Φ(ϱ)", rel_trace_dist(&g_lhs, &g_rhs), OPERATOR_TOL);
    let g_pass = g_entry.pass;
    entries.push(g_entry);

    let mut d_pass = true;
    let phis: [(&str, &dyn Fn(f64) -> f64); 3] =
        [("√x", &|t: f64| t.sqrt()), ("x²", &|t: f64| t * t), ("x/(x+1)", &|t: f64| t / (t + 1.0))];
    for (name, f) in phis {
        let lhs = sandwich(f, &pr, &ps);
        let rhs = phi.apply(&sandwich(f, rho, sigma));
        let e = entry(format!("(d) perspective of {name} commutes with Φ"), rel_trace_dist(&lhs, &rhs), OPERATOR_TOL);
        d_pass &= e.pass;
        entries.push(e);
    }

    let gm_out = operators::geometric_mean(0.5, &ps, &pr)?;
    let gm_in = phi.apply(&operators::geometric_mean(0.5, sigma, rho)?);
    entries.push(entry("(f) Φ(σ#ϱ) = Φ(σ)#Φ(ϱ)", rel_trace_dist(&gm_out, &gm_in), OPERATOR_TOL));

    for f in default_f_list() {
        let gap = divergence_gap(fdiv::maximal_f_div(&f, rho, sigma)?, fdiv::maximal_f_div(&f, &pr, &ps)?);
        entries.push(entry(format!("Ŝ_f gap, f = {f}"), gap, SCALAR_TOL));
    }

    let mut notes = Vec::new();
    let petz_pass = match petz_pair(phi, sigma) {
        Ok(pm) => {
            let r = petz_residual(&pm, rho);
            entries.push(entry(PETZ_ENTRY, r, OPERATOR_TOL));
            r <= OPERATOR_TOL
        }
        Err(e) => {
            notes.push(format!("Petz residual unavailable: {e}"));
            false
        }
    };
    let consistent = c_pass == g_pass && g_pass == d_pass;
    if !consistent {
        notes.push("conditions (c), (g) and (d) disagree at tolerance".into());
    }
    Ok(EqualityReport { entries, verdict: verdict_from(petz_pass, c_pass), consistent, notes })
}
