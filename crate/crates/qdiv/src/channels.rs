//! Quantum channels in Kraus form, Petz maps, the minimal reverse test,
//! stochastic-matrix channels and seeded samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::operators::{PsdOperator, Superoperator};

/// Tolerance for the trace-preserving / unital flags.
pub const CHANNEL_TOL: f64 = 1e-9;

/// Where a transposition is inserted around the Kraus action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransposeMode {
    None,
    /// X ↦ Σ K Xᵀ K†
    Pre,
    /// X ↦ (Σ K X K†)ᵀ
    Post,
}

/// A linear map X ↦ Σ K_i X K_i†, optionally composed with a transposition
/// (positive but not completely positive in that case).
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    pub in_dim: usize,
    pub out_dim: usize,
    pub kraus: Vec<CMatrix>,
    pub transpose: TransposeMode,
    pub trace_preserving: bool,
    pub unital: bool,
    pub cp_certified: bool,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_mode(kraus, TransposeMode::None)
    }

    /// Kraus action preceded by a transposition.
    pub fn transpose_composed(kraus: Vec<CMatrix>) -> Result<Self> {
        Self::with_mode(kraus, TransposeMode::Pre)
    }

    pub fn with_mode(kraus: Vec<CMatrix>, transpose: TransposeMode) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let (out_dim, in_dim) = (first.nrows(), first.ncols());
        for k in &kraus {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(Error::DimensionMismatch { expected: out_dim * in_dim, found: k.nrows() * k.ncols() });
            }
        }
        let mut tp = linalg::zeros(in_dim, in_dim);
        let mut un = linalg::zeros(out_dim, out_dim);
        for k in &kraus {
            tp += k.adjoint() * k;
            un += k * k.adjoint();
        }
        let trace_preserving = (tp - linalg::identity(in_dim)).norm() <= CHANNEL_TOL;
        let unital = (un - linalg::identity(out_dim)).norm() <= CHANNEL_TOL;
        Ok(QuantumChannel {
            in_dim,
            out_dim,
            kraus,
            transpose,
            trace_preserving,
            unital,
            cp_certified: transpose == TransposeMode::None,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![linalg::identity(d)]).expect("identity channel")
    }

    /// X ↦ U X U†; also accepts isometries (block embeddings).
    pub fn unitary(u: &CMatrix) -> Result<Self> {
        Self::new(vec![u.clone()])
    }

    /// Σ p_k U_k X U_k†.
    pub fn mixture_of_unitaries(weights: &[f64], unitaries: &[CMatrix]) -> Result<Self> {
        if weights.len() != unitaries.len() {
            return Err(Error::DimensionMismatch { expected: weights.len(), found: unitaries.len() });
        }
        Self::new(weights.iter().zip(unitaries).map(|(p, u)| u * c(p.sqrt())).collect())
    }

    pub fn is_bistochastic(&self) -> bool {
        self.trace_preserving && self.unital
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let xin = if self.transpose == TransposeMode::Pre { x.transpose() } else { x.clone() };
        let mut out = linalg::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * &xin * k.adjoint();
        }
        if self.transpose == TransposeMode::Post {
            out.transpose()
        } else {
            out
        }
    }

    pub fn apply_checked(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.in_dim || x.ncols() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: x.nrows() });
        }
        Ok(self.apply(x))
    }

    pub fn apply_psd(&self, x: &PsdOperator) -> Result<PsdOperator> {
        if x.dim() != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: x.dim() });
        }
        PsdOperator::with_tolerances(linalg::hermitian_part(&self.apply(x.matrix())), x.tolerances())
    }

    /// Φ* with ⟨Φ(X), Y⟩ = ⟨X, Φ*(Y)⟩.
    pub fn adjoint(&self) -> QuantumChannel {
        let mode = match self.transpose {
            TransposeMode::None => TransposeMode::None,
            TransposeMode::Pre => TransposeMode::Post,
            TransposeMode::Post => TransposeMode::Pre,
        };
        let mut ch = QuantumChannel::with_mode(self.kraus.iter().map(|k| k.adjoint()).collect(), mode)
            .expect("adjoint Kraus list is consistent");
        ch.cp_certified = self.cp_certified;
        ch
    }

    /// self ∘ inner.
    pub fn compose(&self, inner: &QuantumChannel) -> Result<QuantumChannel> {
        if self.transpose != TransposeMode::None || inner.transpose != TransposeMode::None {
            return Err(Error::InvalidInput("composition of transpose-composed maps is not supported".into()));
        }
        if inner.out_dim != self.in_dim {
            return Err(Error::DimensionMismatch { expected: self.in_dim, found: inner.out_dim });
        }
        let mut ks = Vec::new();
        for a in &self.kraus {
            for b in &inner.kraus {
                ks.push(a * b);
            }
        }
        QuantumChannel::new(ks)
    }

    pub fn superoperator(&self) -> Superoperator {
        Superoperator::from_map(self.in_dim, self.out_dim, |x| self.apply(x))
    }

    /// Σ_ij E_ij ⊗ Φ(E_ij).
    pub fn choi(&self) -> CMatrix {
        let d = self.in_dim;
        let mut j = linalg::zeros(d * self.out_dim, d * self.out_dim);
        for a in 0..d {
            for b in 0..d {
                let mut e = linalg::zeros(d, d);
                e[(a, b)] = c(1.0);
                j += linalg::kron(&e, &self.apply(&e));
            }
        }
        j
    }
}

/// X ↦ Σ P_i X P_i for orthogonal projections summing to the identity.
pub fn pinching_channel(projections: &[CMatrix]) -> Result<QuantumChannel> {
    let d = projections.first().ok_or_else(|| Error::InvalidInput("no projections".into()))?.nrows();
    let mut sum = linalg::zeros(d, d);
    for (i, p) in projections.iter().enumerate() {
        if (p * p - p).norm() > 1e-8 || (p - p.adjoint()).norm() > 1e-8 {
            return Err(Error::InvalidInput(format!("element {i} is not an orthogonal projection")));
        }
        for q in &projections[i + 1..] {
            if (p * q).norm() > 1e-8 {
                return Err(Error::InvalidInput("projections are not pairwise orthogonal".into()));
            }
        }
        sum += p;
    }
    if (sum - linalg::identity(d)).norm() > 1e-8 {
        return Err(Error::InvalidInput("projections do not sum to the identity".into()));
    }
    QuantumChannel::new(projections.to_vec())
}

/// Pinching onto the computational basis.
pub fn dephasing_channel(d: usize) -> QuantumChannel {
    let ps: Vec<CMatrix> = (0..d)
        .map(|i| {
            let mut p = linalg::zeros(d, d);
            p[(i, i)] = c(1.0);
            p
        })
        .collect();
    pinching_channel(&ps).expect("basis projections")
}

/// Pinching by the spectral projections of a PSD operator.
pub fn eigen_pinching(a: &PsdOperator) -> QuantumChannel {
    pinching_channel(&a.spectral().projectors).expect("spectral projections")
}

/// The pair Φ_σ, Φ_σ* built from a channel and a reference state.
#[derive(Clone, Debug)]
pub struct PetzMaps {
    pub channel: QuantumChannel,
    pub sigma: PsdOperator,
    pub phi_sigma: PsdOperator,
    sigma_sqrt: CMatrix,
    phi_sigma_inv_sqrt: CMatrix,
}

impl PetzMaps {
    /// Φ_σ(X) = Φ(σ)^{-1/2} Φ(σ^{1/2} X σ^{1/2}) Φ(σ)^{-1/2}.
    pub fn forward(&self, x: &CMatrix) -> CMatrix {
        let inner = self.channel.apply(&(&self.sigma_sqrt * x * &self.sigma_sqrt));
        &self.phi_sigma_inv_sqrt * inner * &self.phi_sigma_inv_sqrt
    }

    /// Φ_σ*(Y) = σ^{1/2} Φ*(Φ(σ)^{-1/2} Y Φ(σ)^{-1/2}) σ^{1/2}.
    pub fn recover(&self, y: &CMatrix) -> CMatrix {
        let inner = &self.phi_sigma_inv_sqrt * y * &self.phi_sigma_inv_sqrt;
        &self.sigma_sqrt * self.channel.adjoint().apply(&inner) * &self.sigma_sqrt
    }

    /// Kraus operators σ^{1/2} K_i† Φ(σ)^{-1/2} of the recovery map.
    pub fn recovery_channel(&self) -> Result<QuantumChannel> {
        if self.channel.transpose != TransposeMode::None {
            return Err(Error::InvalidInput("recovery Kraus form needs a CP channel".into()));
        }
        QuantumChannel::new(
            self.channel
                .kraus
                .iter()
                .map(|k| &self.sigma_sqrt * k.adjoint() * &self.phi_sigma_inv_sqrt)
                .collect(),
        )
    }

    /// Kraus operators Φ(σ)^{-1/2} K_i σ^{1/2} of Φ_σ (unital on supp Φ(σ)).
    pub fn forward_channel(&self) -> Result<QuantumChannel> {
        if self.channel.transpose != TransposeMode::None {
            return Err(Error::InvalidInput("forward Kraus form needs a CP channel".into()));
        }
        QuantumChannel::new(
            self.channel
                .kraus
                .iter()
                .map(|k| &self.phi_sigma_inv_sqrt * k * &self.sigma_sqrt)
                .collect(),
        )
    }

    /// Φ* ∘ Φ_σ as a map on the input space.
    pub fn adjoint_after_forward(&self, x: &CMatrix) -> CMatrix {
        self.channel.adjoint().apply(&self.forward(x))
    }
}

/// Builds Φ_σ and Φ_σ*, asserting Φ_σ*(Φ(σ)) = σ.
pub fn petz_pair(phi: &QuantumChannel, sigma: &PsdOperator) -> Result<PetzMaps> {
    if sigma.dim() != phi.in_dim {
        return Err(Error::DimensionMismatch { expected: phi.in_dim, found: sigma.dim() });
    }
    if sigma.rank() == 0 {
        return Err(Error::InvalidInput("Petz map needs σ ≠ 0".into()));
    }
    let phi_sigma = phi.apply_psd(sigma)?;
    let maps = PetzMaps {
        channel: phi.clone(),
        sigma: sigma.clone(),
        sigma_sqrt: sigma.power(0.5),
        phi_sigma_inv_sqrt: phi_sigma.power(-0.5),
        phi_sigma,
    };
    let back = maps.recover(maps.phi_sigma.matrix());
    let res = linalg::trace_norm(&(back - sigma.matrix()));
    if res > 1e-9 * sigma.trace().max(1.0) {
        return Err(Error::ContractViolation(format!(
            "Φ_σ*(Φ(σ)) differs from σ by {res:.3e}; is the channel trace-preserving?"
        )));
    }
    Ok(maps)
}

/// A map from ℂ^k (diagonal inputs) to operators: δ_i ↦ outputs[i].
#[derive(Clone, Debug)]
pub struct ClassicalQuantumChannel {
    pub outputs: Vec<PsdOperator>,
}

impl ClassicalQuantumChannel {
    pub fn k(&self) -> usize {
        self.outputs.len()
    }

    pub fn out_dim(&self) -> usize {
        self.outputs.first().map(|o| o.dim()).unwrap_or(0)
    }

    pub fn apply(&self, x: &[f64]) -> Result<CMatrix> {
        if x.len() != self.k() {
            return Err(Error::DimensionMismatch { expected: self.k(), found: x.len() });
        }
        let d = self.out_dim();
        Ok(self.outputs.iter().zip(x).fold(linalg::zeros(d, d), |acc, (o, xi)| acc + o.matrix() * c(*xi)))
    }

    /// The measure-and-prepare channel X ↦ Σ_i ⟨e_i|X|e_i⟩ outputs[i].
    pub fn to_quantum_channel(&self) -> Result<QuantumChannel> {
        let k = self.k();
        let mut kraus = Vec::new();
        for (i, o) in self.outputs.iter().enumerate() {
            let root = o.power(0.5);
            for m in 0..root.ncols() {
                let col = root.column(m);
                if col.norm() == 0.0 {
                    continue;
                }
                let mut kr = linalg::zeros(self.out_dim(), k);
                kr.set_column(i, &col);
                kraus.push(kr);
            }
        }
        QuantumChannel::new(kraus)
    }
}

/// Output of the minimal reverse test construction.
#[derive(Clone, Debug)]
pub struct MinimalReverseTest {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub channel: ClassicalQuantumChannel,
    /// ‖Φ(a) − ϱ‖₁ and ‖Φ(b) − σ‖₁.
    pub residuals: (f64, f64),
}

/// With σ^{-1/2}ϱσ^{-1/2} = Σ λ_i P_i: a_i = λ_i Tr σP_i, b_i = Tr σP_i and
/// δ_i ↦ σ^{1/2}P_iσ^{1/2}/Tr σP_i.
pub fn minimal_reverse_test(rho: &PsdOperator, sigma: &PsdOperator) -> Result<MinimalReverseTest> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: rho.dim() });
    }
    if !rho.is_invertible() || !sigma.is_invertible() {
        return Err(Error::NotInvertible("minimal reverse test needs invertible ϱ and σ".into()));
    }
    let sh = sigma.power(0.5);
    let si = sigma.power(-0.5);
    let x = PsdOperator::new(linalg::hermitian_part(&(&si * rho.matrix() * &si)))?;
    let sd = x.spectral();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut outputs = Vec::new();
    for (lam, p) in sd.distinct_eigenvalues.iter().zip(&sd.projectors) {
        let w = &sh * p * &sh;
        let bi = linalg::trace_re(&w);
        a.push(lam * bi);
        b.push(bi);
        outputs.push(PsdOperator::new(linalg::hermitian_part(&(w * c(1.0 / bi))))?);
    }
    let channel = ClassicalQuantumChannel { outputs };
    let ra = linalg::trace_norm(&(channel.apply(&a)? - rho.matrix()));
    let rb = linalg::trace_norm(&(channel.apply(&b)? - sigma.matrix()));
    Ok(MinimalReverseTest { a, b, channel, residuals: (ra, rb) })
}

/// Φ(X) = Σ_x |e_x⟩⟨e_x| Σ_y T_xy ⟨e_y|X e_y⟩ for a row-stochastic T.
/// `basis` holds the vectors e_x as columns (computational basis if `None`).
pub fn stochastic_matrix_channel(t: &[Vec<f64>], basis: Option<&CMatrix>) -> Result<QuantumChannel> {
    let k = t.len();
    for (x, row) in t.iter().enumerate() {
        if row.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: row.len() });
        }
        if row.iter().any(|&v| v < 0.0) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("row {x} of T is not a probability vector")));
        }
    }
    let e = basis.cloned().unwrap_or_else(|| linalg::identity(k));
    if e.nrows() != k || e.ncols() != k {
        return Err(Error::DimensionMismatch { expected: k, found: e.ncols() });
    }
    let mut kraus = Vec::new();
    for x in 0..k {
        for y in 0..k {
            if t[x][y] > 0.0 {
                let kr = e.column(x) * e.column(y).adjoint() * c(t[x][y].sqrt());
                kraus.push(kr);
            }
        }
    }
    QuantumChannel::new(kraus)
}

/// The predicted multiplicative domain of a stochastic-matrix channel:
/// diagonal matrices constant on classes of indices linked by T_xy T_xz > 0.
#[derive(Clone, Debug, PartialEq)]
pub struct MultDomainDescription {
    pub classes: Vec<Vec<usize>>,
    /// Columns of T that vanish; the diagonal description assumes there are none.
    pub zero_columns: Vec<usize>,
}

impl MultDomainDescription {
    pub fn dimension(&self) -> usize {
        self.classes.len()
    }

    /// Class indicator projections (in the computational basis).
    pub fn basis(&self, d: usize) -> Vec<CMatrix> {
        self.classes
            .iter()
            .map(|cl| {
                let mut p = linalg::zeros(d, d);
                for &i in cl {
                    p[(i, i)] = c(1.0);
                }
                p
            })
            .collect()
    }
}

pub fn classical_mult_domain_predicate(t: &[Vec<f64>]) -> Result<MultDomainDescription> {
    let k = t.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut j = i;
        while p[j] != r {
            let n = p[j];
            p[j] = r;
            j = n;
        }
        r
    }
    for row in t {
        if row.len() != k {
            return Err(Error::DimensionMismatch { expected: k, found: row.len() });
        }
        let support: Vec<usize> = (0..k).filter(|&y| row[y] > 0.0).collect();
        for w in support.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(ci) => classes[ci].push(i),
            None => {
                root_of[r] = Some(classes.len());
                classes.push(vec![i]);
            }
        }
    }
    let zero_columns = (0..k).filter(|&y| t.iter().all(|row| row[y] == 0.0)).collect();
    Ok(MultDomainDescription { classes, zero_columns })
}

/// Channel from a Haar-random Stinespring isometry ℂ^in → ℂ^out ⊗ ℂ^env.
pub fn random_channel(in_dim: usize, out_dim: usize, env_dim: usize, seed: u64) -> Result<QuantumChannel> {
    if in_dim == 0 || out_dim == 0 || env_dim == 0 {
        return Err(Error::InvalidInput("dimensions must be positive".into()));
    }
    if out_dim * env_dim < in_dim {
        return Err(Error::InvalidInput("out_dim·env_dim must be at least in_dim".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = linalg::haar_isometry(out_dim * env_dim, in_dim, &mut rng);
    let kraus = (0..env_dim)
        .map(|e| CMatrix::from_fn(out_dim, in_dim, |o, i| v[(o * env_dim + e, i)]))
        .collect();
    QuantumChannel::new(kraus)
}

/// Normalized G G† with G a dim × rank complex Gaussian matrix.
pub fn random_state(dim: usize, rank: usize, seed: u64) -> Result<PsdOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_state_rng(dim, rank, &mut rng)
}

pub fn random_state_rng<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<PsdOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidInput(format!("need 1 ≤ rank ≤ dim, got rank {rank}, dim {dim}")));
    }
    let g = linalg::random_gaussian_matrix(dim, rank, rng);
    let m = &g * g.adjoint();
    let t = linalg::trace_re(&m);
    PsdOperator::new(m * c(1.0 / t))
}

/// Random mixture of Haar unitary conjugations.
pub fn random_bistochastic(dim: usize, num_unitaries: usize, seed: u64) -> Result<QuantumChannel> {
    if dim == 0 || num_unitaries == 0 {
        return Err(Error::InvalidInput("dimension and unitary count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..num_unitaries).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    let us: Vec<CMatrix> = (0..num_unitaries).map(|_| linalg::haar_unitary(dim, &mut rng)).collect();
    QuantumChannel::mixture_of_unitaries(&w, &us)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdiv::{self, DivergenceFunction};
    use crate::linalg::from_real_rows;

    #[test]
    fn identity_and_adjoint_duality() {
        let id = QuantumChannel::identity(3);
        let x = from_real_rows(&[&[1.0, 2.0, 0.0], &[2.0, -1.0, 3.0], &[0.0, 3.0, 5.0]]);
        assert_eq!(id.apply(&x), x);
        let phi = random_channel(3, 2, 3, 7).unwrap();
        let adj = phi.adjoint();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = linalg::random_gaussian_matrix(3, 3, &mut rng);
        let b = linalg::random_gaussian_matrix(2, 2, &mut rng);
        let lhs = linalg::hs_inner(&phi.apply(&a), &b);
        let rhs = linalg::hs_inner(&a, &adj.apply(&b));
        assert!((lhs - rhs).norm() < 1e-12);
        assert!((adj.apply(&linalg::identity(2)) - linalg::identity(3)).norm() < 1e-9);
    }

    #[test]
    fn transpose_composed_adjoint_duality() {
        let phi = QuantumChannel::transpose_composed(random_channel(2, 2, 2, 5).unwrap().kraus).unwrap();
        assert!(!phi.cp_certified);
        let adj = phi.adjoint();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = linalg::random_gaussian_matrix(2, 2, &mut rng);
        let b = linalg::random_gaussian_matrix(2, 2, &mut rng);
        let lhs = linalg::hs_inner(&phi.apply(&a), &b);
        let rhs = linalg::hs_inner(&a, &adj.apply(&b));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn random_channel_properties() {
        let phi = random_channel(3, 3, 1, 4).unwrap();
        assert!(phi.trace_preserving && phi.unital);
        let phi = random_channel(2, 3, 4, 4).unwrap();
        assert!(phi.trace_preserving);
        let ev = linalg::eigvals_h(&phi.choi());
        assert!(*ev.last().unwrap() > -1e-9);
        let x = from_real_rows(&[&[0.3, 0.1], &[0.1, 0.7]]);
        assert!((linalg::trace_re(&phi.apply(&x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_state_rank() {
        let s = random_state(3, 2, 11).unwrap();
        assert_eq!(s.rank(), 2);
        assert!((s.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pinching_examples() {
        let deph = dephasing_channel(2);
        let x = from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]);
        assert_eq!(deph.apply(&x), linalg::real_diag(&[1.0, 3.0]));
        let p = linalg::real_diag(&[1.0, 1.0, 0.0]);
        let q = linalg::real_diag(&[0.0, 0.0, 1.0]);
        let blk = pinching_channel(&[p, q]).unwrap();
        assert!(blk.is_bistochastic());
        let b = from_real_rows(&[&[1.0, 2.0, 0.0], &[2.0, 5.0, 0.0], &[0.0, 0.0, 4.0]]);
        assert!((blk.apply(&b) - &b).norm() < 1e-14);
        let s = random_state(3, 3, 3).unwrap();
        let pin = eigen_pinching(&s);
        assert!((pin.apply(s.matrix()) - s.matrix()).norm() < 1e-12);
        let bad = pinching_channel(&[linalg::real_diag(&[1.0, 0.0])]);
        assert!(bad.is_err());
    }

    #[test]
    fn petz_examples() {
        let phi = random_channel(3, 2, 2, 17).unwrap();
        let s = random_state(3, 3, 18).unwrap();
        let pm = petz_pair(&phi, &s).unwrap();
        assert!(linalg::trace_norm(&(pm.recover(phi.apply_psd(&s).unwrap().matrix()) - s.matrix())) < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = linalg::haar_unitary(3, &mut rng);
        let uc = QuantumChannel::unitary(&u).unwrap();
        let pm = petz_pair(&uc, &s).unwrap();
        let r = random_state(3, 2, 19).unwrap();
        let back = pm.recover(&uc.apply(r.matrix()));
        assert!(linalg::trace_norm(&(back - r.matrix())) < 1e-9);

        let bi = random_bistochastic(3, 3, 5).unwrap();
        let id = PsdOperator::scaled_identity(3, 1.0).unwrap();
        let pm = petz_pair(&bi, &id).unwrap();
        let y = from_real_rows(&[&[1.0, 0.2, 0.0], &[0.2, 0.0, 0.4], &[0.0, 0.4, -1.0]]);
        assert!((pm.recover(&y) - bi.adjoint().apply(&y)).norm() < 1e-10);
    }

    #[test]
    fn minimal_reverse_test_examples() {
        let r = PsdOperator::diag(&[0.6, 0.4]).unwrap();
        let s = PsdOperator::diag(&[0.3, 0.7]).unwrap();
        let mrt = minimal_reverse_test(&r, &s).unwrap();
        assert_eq!(mrt.a.len(), 2);
        let mut ab: Vec<(f64, f64)> = mrt.a.iter().copied().zip(mrt.b.iter().copied()).collect();
        ab.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        assert!((ab[0].0 - 0.4).abs() < 1e-12 && (ab[0].1 - 0.7).abs() < 1e-12);
        assert!((ab[1].0 - 0.6).abs() < 1e-12 && (ab[1].1 - 0.3).abs() < 1e-12);

        let same = minimal_reverse_test(&s, &s).unwrap();
        assert_eq!(same.a.len(), 1);
        assert!((same.a[0] - 1.0).abs() < 1e-12 && (same.b[0] - 1.0).abs() < 1e-12);

        let r = random_state(2, 2, 31).unwrap();
        let s = random_state(2, 2, 32).unwrap();
        let mrt = minimal_reverse_test(&r, &s).unwrap();
        assert!(mrt.residuals.0 < 1e-9 && mrt.residuals.1 < 1e-9);
        let eta = DivergenceFunction::eta();
        let cl = fdiv::classical_f_div(&eta, &mrt.a, &mrt.b).unwrap().to_f64();
        let bs = fdiv::bs_relative_entropy(&r, &s).unwrap().to_f64();
        assert!((cl - bs).abs() < 1e-9);
        let qc = mrt.channel.to_quantum_channel().unwrap();
        assert!(qc.trace_preserving);
        let out = qc.apply(&linalg::real_diag(&mrt.a));
        assert!(linalg::trace_norm(&(out - r.matrix())) < 1e-9);
    }

    #[test]
    fn stochastic_channels() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ch = stochastic_matrix_channel(&id, None).unwrap();
        let x = from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]);
        assert_eq!(ch.apply(&x), linalg::real_diag(&[1.0, 3.0]));
        let pred = classical_mult_domain_predicate(&id).unwrap();
        assert_eq!(pred.dimension(), 2);

        let t = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.25, 0.25, 0.25, 0.25],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let ch = stochastic_matrix_channel(&t, None).unwrap();
        assert!(ch.unital && !ch.trace_preserving);
        let a = linalg::real_diag(&[1.0, 2.0, 2.0, 3.0]);
        assert!((ch.apply(&a) - &a).norm() < 1e-14);
        let pred = classical_mult_domain_predicate(&t).unwrap();
        assert_eq!(pred.dimension(), 1);
        assert!(stochastic_matrix_channel(&[vec![0.5, 0.6], vec![0.0, 1.0]], None).is_err());
    }
}
