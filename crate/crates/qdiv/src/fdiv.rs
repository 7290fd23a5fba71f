//! Divergence functions, extended reals, and the standard, maximal and
//! S̃ f-divergences.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::operators::{self, PsdOperator};

/// A value in (−∞, +∞]. Infinity is an exact tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
}

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Rejects NaN and −∞; maps f64 +∞ to the exact tag.
    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NonFinite("NaN".into()))
        } else if v == f64::NEG_INFINITY {
            Err(Error::NonFinite("−∞ is not a divergence value".into()))
        } else if v == f64::INFINITY {
            Ok(ExtendedReal::PosInf)
        } else {
            Ok(ExtendedReal::Finite(v))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedReal::PosInf)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => *v,
            ExtendedReal::PosInf => f64::INFINITY,
        }
    }

    /// Finite value, or `None` for +∞.
    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(*v),
            ExtendedReal::PosInf => None,
        }
    }

    /// Multiplication by a nonnegative scalar with 0·∞ = 0.
    pub fn scale(&self, t: f64) -> ExtendedReal {
        debug_assert!(t >= 0.0);
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v * t),
            ExtendedReal::PosInf if t == 0.0 => ExtendedReal::Finite(0.0),
            ExtendedReal::PosInf => ExtendedReal::PosInf,
        }
    }
}

impl Add for ExtendedReal {
    type Output = ExtendedReal;
    fn add(self, rhs: ExtendedReal) -> ExtendedReal {
        match (self, rhs) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => ExtendedReal::Finite(a + b),
            _ => ExtendedReal::PosInf,
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::PosInf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) if s == "inf" => Ok(ExtendedReal::PosInf),
            serde_json::Value::Number(n) => n
                .as_f64()
                .map(ExtendedReal::Finite)
                .ok_or_else(|| serde::de::Error::custom("bad number")),
            other => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {other}"))),
        }
    }
}

/// Cardinality of the support of the representing measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportSize {
    Finite(usize),
    Infinite,
}

/// Atomic data of `f(x) = f(0⁺) + a x + b x² + Σ w (x/(1+s) − x/(x+s))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuRepresentation {
    pub f0: f64,
    pub a: f64,
    pub b: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl MuRepresentation {
    pub fn eval(&self, x: f64) -> f64 {
        self.f0
            + self.a * x
            + self.b * x * x
            + self.atoms.iter().map(|(s, w)| w * (x / (1.0 + s) - x / (x + s))).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FunctionKind {
    /// x log x
    Eta,
    /// s(α) x^α with s(α) = −1 for α < 1, +1 otherwise.
    Power(f64),
    /// −x/(x+s)
    Fs(f64),
    /// (x−1)²/(x+s)
    Gs(f64),
    /// x²
    Quad,
    /// 1 − x + δ(1−x)²
    FDelta(f64),
    MuAtoms(MuRepresentation),
    /// y f(1/y)
    Transpose(Box<DivergenceFunction>),
    /// f(x) + c0 + c1 x
    Affine { base: Box<DivergenceFunction>, c0: f64, c1: f64 },
}

/// A convex function on (0, ∞) with its endpoint data.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceFunction {
    pub kind: FunctionKind,
}

pub fn sign_alpha(alpha: f64) -> f64 {
    if alpha < 1.0 {
        -1.0
    } else {
        1.0
    }
}

impl DivergenceFunction {
    pub fn eta() -> Self {
        Self { kind: FunctionKind::Eta }
    }

    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("power exponent must be > 0, got {alpha}")));
        }
        Ok(Self { kind: FunctionKind::Power(alpha) })
    }

    pub fn fs(s: f64) -> Result<Self> {
        check_pos("s", s)?;
        Ok(Self { kind: FunctionKind::Fs(s) })
    }

    pub fn gs(s: f64) -> Result<Self> {
        check_pos("s", s)?;
        Ok(Self { kind: FunctionKind::Gs(s) })
    }

    pub fn quad() -> Self {
        Self { kind: FunctionKind::Quad }
    }

    pub fn fdelta(delta: f64) -> Result<Self> {
        check_pos("δ", delta)?;
        Ok(Self { kind: FunctionKind::FDelta(delta) })
    }

    pub fn mu_atoms(f0: f64, a: f64, b: f64, atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(s, w) in &atoms {
            check_pos("atom location", s)?;
            if !(w >= 0.0) {
                return Err(Error::InvalidInput(format!("atom weight must be ≥ 0, got {w}")));
            }
        }
        if !(b >= 0.0) || !f0.is_finite() || !a.is_finite() {
            return Err(Error::InvalidInput("need finite f0, a and b ≥ 0".into()));
        }
        Ok(Self { kind: FunctionKind::MuAtoms(MuRepresentation { f0, a, b, atoms }) })
    }

    /// f̃(y) = y f(1/y). Transposing twice returns the original function.
    pub fn transpose(&self) -> Self {
        match &self.kind {
            FunctionKind::Transpose(inner) => (**inner).clone(),
            _ => Self { kind: FunctionKind::Transpose(Box::new(self.clone())) },
        }
    }

    /// f(x) + c0 + c1 x; same convexity, shifted endpoints.
    pub fn affine(&self, c0: f64, c1: f64) -> Self {
        Self { kind: FunctionKind::Affine { base: Box::new(self.clone()), c0, c1 } }
    }

    /// f − f(1), so that the value at 1 vanishes.
    pub fn normalized(&self) -> Self {
        let v = self.eval(1.0);
        if v == 0.0 {
            self.clone()
        } else {
            self.affine(-v, 0.0)
        }
    }

    /// Value at x > 0.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            FunctionKind::Eta => x * x.ln(),
            FunctionKind::Power(a) => sign_alpha(*a) * x.powf(*a),
            FunctionKind::Fs(s) => -x / (x + s),
            FunctionKind::Gs(s) => (x - 1.0) * (x - 1.0) / (x + s),
            FunctionKind::Quad => x * x,
            FunctionKind::FDelta(d) => 1.0 - x + d * (1.0 - x) * (1.0 - x),
            FunctionKind::MuAtoms(r) => r.eval(x),
            FunctionKind::Transpose(f) => x * f.eval(1.0 / x),
            FunctionKind::Affine { base, c0, c1 } => base.eval(x) + c0 + c1 * x,
        }
    }

    /// First derivative at x > 0.
    pub fn deriv(&self, x: f64) -> f64 {
        match &self.kind {
            FunctionKind::Eta => x.ln() + 1.0,
            FunctionKind::Power(a) => sign_alpha(*a) * a * x.powf(a - 1.0),
            FunctionKind::Fs(s) => -s / ((x + s) * (x + s)),
            FunctionKind::Gs(s) => (x - 1.0) * (x + 2.0 * s + 1.0) / ((x + s) * (x + s)),
            FunctionKind::Quad => 2.0 * x,
            FunctionKind::FDelta(d) => -1.0 - 2.0 * d * (1.0 - x),
            FunctionKind::MuAtoms(r) => {
                r.a + 2.0 * r.b * x
                    + r.atoms.iter().map(|(s, w)| w * (1.0 / (1.0 + s) - s / ((x + s) * (x + s)))).sum::<f64>()
            }
            FunctionKind::Transpose(f) => f.eval(1.0 / x) - f.deriv(1.0 / x) / x,
            FunctionKind::Affine { base, c1, .. } => base.deriv(x) + c1,
        }
    }

    /// f(0⁺).
    pub fn f_at_0(&self) -> ExtendedReal {
        use ExtendedReal::*;
        match &self.kind {
            FunctionKind::Eta => Finite(0.0),
            FunctionKind::Power(_) => Finite(0.0),
            FunctionKind::Fs(_) => Finite(0.0),
            FunctionKind::Gs(s) => Finite(1.0 / s),
            FunctionKind::Quad => Finite(0.0),
            FunctionKind::FDelta(d) => Finite(1.0 + d),
            FunctionKind::MuAtoms(r) => Finite(r.f0),
            FunctionKind::Transpose(f) => f.fprime_at_inf(),
            FunctionKind::Affine { base, c0, .. } => base.f_at_0() + Finite(*c0),
        }
    }

    /// f′(+∞) = lim f(x)/x.
    pub fn fprime_at_inf(&self) -> ExtendedReal {
        use ExtendedReal::*;
        match &self.kind {
            FunctionKind::Eta => PosInf,
            FunctionKind::Power(a) if *a > 1.0 => PosInf,
            FunctionKind::Power(a) if *a == 1.0 => Finite(1.0),
            FunctionKind::Power(_) => Finite(0.0),
            FunctionKind::Fs(_) => Finite(0.0),
            FunctionKind::Gs(_) => Finite(1.0),
            FunctionKind::Quad => PosInf,
            FunctionKind::FDelta(_) => PosInf,
            FunctionKind::MuAtoms(r) => {
                if r.b > 0.0 {
                    PosInf
                } else {
                    Finite(r.a + r.atoms.iter().map(|(s, w)| w / (1.0 + s)).sum::<f64>())
                }
            }
            FunctionKind::Transpose(f) => f.f_at_0(),
            FunctionKind::Affine { base, c1, .. } => base.fprime_at_inf() + Finite(*c1),
        }
    }

    pub fn operator_convex(&self) -> bool {
        match &self.kind {
            FunctionKind::Power(a) => *a <= 2.0,
            FunctionKind::Transpose(f) => f.operator_convex(),
            FunctionKind::Affine { base, .. } => base.operator_convex(),
            _ => true,
        }
    }

    pub fn strictly_convex(&self) -> bool {
        match &self.kind {
            FunctionKind::Power(a) => *a != 1.0,
            FunctionKind::MuAtoms(r) => r.b > 0.0 || r.atoms.iter().any(|(_, w)| *w > 0.0),
            FunctionKind::Transpose(f) => f.strictly_convex(),
            FunctionKind::Affine { base, .. } => base.strictly_convex(),
            _ => true,
        }
    }

    /// f″(1), stored analytically.
    pub fn second_derivative_at_1(&self) -> f64 {
        match &self.kind {
            FunctionKind::Eta => 1.0,
            FunctionKind::Power(a) => sign_alpha(*a) * a * (a - 1.0),
            FunctionKind::Fs(s) => 2.0 * s / (1.0 + s).powi(3),
            FunctionKind::Gs(s) => 2.0 / (1.0 + s),
            FunctionKind::Quad => 2.0,
            FunctionKind::FDelta(d) => 2.0 * d,
            FunctionKind::MuAtoms(r) => {
                2.0 * r.b + r.atoms.iter().map(|(s, w)| w * 2.0 * s / (1.0 + s).powi(3)).sum::<f64>()
            }
            // f̃″(y) = f″(1/y)/y³
            FunctionKind::Transpose(f) => f.second_derivative_at_1(),
            FunctionKind::Affine { base, .. } => base.second_derivative_at_1(),
        }
    }

    /// Discrete representing-measure data where the measure is atomic.
    pub fn representation(&self) -> Option<MuRepresentation> {
        match &self.kind {
            FunctionKind::Power(a) if *a == 1.0 => {
                Some(MuRepresentation { f0: 0.0, a: 1.0, b: 0.0, atoms: vec![] })
            }
            FunctionKind::Power(a) if *a == 2.0 => {
                Some(MuRepresentation { f0: 0.0, a: 0.0, b: 1.0, atoms: vec![] })
            }
            FunctionKind::Fs(s) => {
                Some(MuRepresentation { f0: 0.0, a: -1.0 / (1.0 + s), b: 0.0, atoms: vec![(*s, 1.0)] })
            }
            FunctionKind::Gs(s) => {
                let w = (1.0 + s) * (1.0 + s) / s;
                Some(MuRepresentation { f0: 1.0 / s, a: -1.0 / s, b: 0.0, atoms: vec![(*s, w)] })
            }
            FunctionKind::Quad => Some(MuRepresentation { f0: 0.0, a: 0.0, b: 1.0, atoms: vec![] }),
            FunctionKind::FDelta(d) => {
                Some(MuRepresentation { f0: 1.0 + d, a: -1.0 - 2.0 * d, b: *d, atoms: vec![] })
            }
            FunctionKind::MuAtoms(r) => Some(r.clone()),
            FunctionKind::Affine { base, c0, c1 } => base.representation().map(|mut r| {
                r.f0 += c0;
                r.a += c1;
                r
            }),
            _ => None,
        }
    }

    /// |supp μ_f|: atom count for atomic measures, infinite for η and non-integer powers.
    pub fn support_size(&self) -> SupportSize {
        match self.representation() {
            Some(r) => SupportSize::Finite(r.atoms.iter().filter(|(_, w)| *w > 0.0).count()),
            None => SupportSize::Infinite,
        }
    }

    /// Parses "eta", "power:α", "fs:s", "gs:s", "quad", "fdelta:δ",
    /// "mu-atoms:[(s,w),…]", and "transpose:<spec>".
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (spec, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Parse(format!("'{spec}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("'{spec}': {e}")))
        };
        match head {
            "eta" => Ok(Self::eta()),
            "quad" => Ok(Self::quad()),
            "power" => Self::power(num(arg)?),
            "fs" => Self::fs(num(arg)?),
            "gs" => Self::gs(num(arg)?),
            "fdelta" => Self::fdelta(num(arg)?),
            "transpose" => Ok(Self::parse(arg.unwrap_or(""))?.transpose()),
            "mu-atoms" => {
                let body = arg.ok_or_else(|| Error::Parse("mu-atoms needs a list".into()))?;
                Self::mu_atoms(0.0, 0.0, 0.0, parse_atoms(body)?)
            }
            _ => Err(Error::Parse(format!("unknown function spec '{spec}'"))),
        }
    }
}

fn parse_atoms(body: &str) -> Result<Vec<(f64, f64)>> {
    let b = body.trim();
    let inner = b
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("expected [(s,w),…], got '{b}'")))?;
    let mut out = Vec::new();
    for part in inner.split(')') {
        let p = part.trim().trim_start_matches(',').trim();
        if p.is_empty() {
            continue;
        }
        let p = p
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("bad atom '{p}'")))?;
        let (s, w) = p.split_once(',').ok_or_else(|| Error::Parse(format!("bad atom '{p}'")))?;
        let s: f64 = s.trim().parse().map_err(|e| Error::Parse(format!("atom location: {e}")))?;
        let w: f64 = w.trim().parse().map_err(|e| Error::Parse(format!("atom weight: {e}")))?;
        out.push((s, w));
    }
    Ok(out)
}

fn check_pos(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")))
    }
}

impl fmt::Display for DivergenceFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FunctionKind::Eta => write!(f, "eta"),
            FunctionKind::Power(a) => write!(f, "power:{a}"),
            FunctionKind::Fs(s) => write!(f, "fs:{s}"),
            FunctionKind::Gs(s) => write!(f, "gs:{s}"),
            FunctionKind::Quad => write!(f, "quad"),
            FunctionKind::FDelta(d) => write!(f, "fdelta:{d}"),
            FunctionKind::MuAtoms(r) => {
                write!(f, "mu-atoms:[")?;
                for (i, (s, w)) in r.atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "({s},{w})")?;
                }
                write!(f, "]")
            }
            FunctionKind::Transpose(g) => write!(f, "transpose:{g}"),
            FunctionKind::Affine { base, c0, c1 } => write!(f, "{base}{c0:+}{c1:+}x"),
        }
    }
}

fn check_dims(rho: &PsdOperator, sigma: &PsdOperator) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: sigma.dim() });
    }
    Ok(())
}

/// Infinity conditions shared by the standard and maximal divergences.
fn infinite_by_support(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator) -> bool {
    (f.fprime_at_inf().is_infinite() && !rho.support_le(sigma))
        || (f.f_at_0().is_infinite() && !sigma.support_le(rho))
}

/// Standard (Petz) f-divergence:
/// Σ_{a,b>0} b f(a/b) Tr P_a Q_b + f(0⁺) Tr(I−ϱ⁰)σ + f′(∞) Tr ϱ(I−σ⁰).
pub fn standard_f_div(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    if infinite_by_support(f, rho, sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let (ra, ru) = rho.support_eigen();
    let (sb, sv) = sigma.support_eigen();
    let overlap = ru.adjoint() * &sv;
    let mut total = 0.0;
    for (i, &a) in ra.iter().enumerate() {
        for (j, &b) in sb.iter().enumerate() {
            let t = overlap[(i, j)].norm_sqr();
            if t > 0.0 {
                total += b * f.eval(a / b) * t;
            }
        }
    }
    let mut out = ExtendedReal::Finite(total);
    if let Some(f0) = f.f_at_0().finite() {
        // Tr(I−ϱ⁰)σ
        let w = sigma.trace() - linalg::trace_re(&(rho.support_projection() * sigma.matrix()));
        out = out + ExtendedReal::Finite(f0 * w.max(0.0));
    }
    if let Some(fi) = f.fprime_at_inf().finite() {
        let w = rho.trace() - linalg::trace_re(&(sigma.support_projection() * rho.matrix()));
        out = out + ExtendedReal::Finite(fi * w.max(0.0));
    }
    Ok(out)
}

/// Maximal f-divergence Ŝ_f(ϱ‖σ) = Tr P_f(ϱ, σ).
pub fn maximal_f_div(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    check_dims(rho, sigma)?;
    if !f.operator_convex() {
        return Err(Error::ContractViolation(format!("maximal f-divergence needs an operator convex f, got {f}")));
    }
    if infinite_by_support(f, rho, sigma) {
        return Ok(ExtendedReal::PosInf);
    }
    let p = operators::operator_perspective(f, rho, sigma)?;
    ExtendedReal::new(linalg::trace_re(&p))
}

/// Tr σ f(ϱ^{1/2} σ^{-1} ϱ^{1/2}) for invertible ϱ, σ. Not monotone in general.
pub fn tilde_f_div(f: &DivergenceFunction, rho: &PsdOperator, sigma: &PsdOperator) -> Result<f64> {
    check_dims(rho, sigma)?;
    if !rho.is_invertible() || !sigma.is_invertible() {
        return Err(Error::NotInvertible("S̃_f needs invertible arguments".into()));
    }
    let rh = rho.power(0.5);
    let m = &rh * sigma.power(-1.0) * &rh;
    let fm = linalg::herm_apply(&m, |x| f.eval(x));
    Ok(linalg::trace_re(&(sigma.matrix() * fm)))
}

/// Umegaki relative entropy Tr ϱ(log ϱ − log σ).
pub fn relative_entropy(rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    standard_f_div(&DivergenceFunction::eta(), rho, sigma)
}

/// Belavkin–Staszewski relative entropy, the maximal η-divergence.
pub fn bs_relative_entropy(rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    maximal_f_div(&DivergenceFunction::eta(), rho, sigma)
}

/// D_α = (α−1)⁻¹[log(s(α) S_{f_α}) − log Tr ϱ]; α = 1 gives S(ϱ‖σ)/Tr ϱ.
pub fn renyi_alpha(alpha: f64, rho: &PsdOperator, sigma: &PsdOperator) -> Result<ExtendedReal> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("α must be > 0, got {alpha}")));
    }
    let tr = rho.trace();
    if tr <= 0.0 {
        return Err(Error::InvalidInput("Rényi divergence needs ϱ ≠ 0".into()));
    }
    if alpha == 1.0 {
        return Ok(match relative_entropy(rho, sigma)? {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v / tr),
            inf => inf,
        });
    }
    let f = DivergenceFunction::power(alpha)?;
    renyi_from_quasi(alpha, standard_f_div(&f, rho, sigma)?, tr)
}

/// Converts an S_{f_α} value into the normalized Rényi divergence.
pub fn renyi_from_quasi(alpha: f64, s: ExtendedReal, tr_rho: f64) -> Result<ExtendedReal> {
    match s {
        ExtendedReal::PosInf => Ok(ExtendedReal::PosInf),
        ExtendedReal::Finite(v) => {
            let q = sign_alpha(alpha) * v;
            if q <= 0.0 {
                // α < 1 with orthogonal supports: log 0 / (α−1) = +∞.
                return Ok(ExtendedReal::PosInf);
            }
            ExtendedReal::new((q.ln() - tr_rho.ln()) / (alpha - 1.0))
        }
    }
}

/// Classical f-divergence Σ_x P_f(p_x, q_x) with 0·∞ = 0.
pub fn classical_f_div(f: &DivergenceFunction, p: &[f64], q: &[f64]) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let mut total = ExtendedReal::ZERO;
    for (&x, &y) in p.iter().zip(q) {
        total = total + operators::scalar_perspective(f, x.max(0.0), y.max(0.0));
    }
    Ok(total)
}

/// Convenience: a real diagonal PSD operator.
pub fn diag_state(vals: &[f64]) -> Result<PsdOperator> {
    PsdOperator::new(linalg::real_diag(vals))
}

/// Convenience for test and report code: pure state |ψ⟩⟨ψ| from real amplitudes.
pub fn real_pure_state(psi: &[f64]) -> Result<PsdOperator> {
    let v = CMatrix::from_fn(psi.len(), 1, |i, _| c(psi[i]));
    PsdOperator::new(&v * v.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_rows;
    use approx::assert_relative_eq;

    fn plus() -> PsdOperator {
        PsdOperator::new(from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap()
    }

    #[test]
    fn extended_real_arithmetic() {
        let inf = ExtendedReal::PosInf;
        assert_eq!(inf.scale(0.0), ExtendedReal::Finite(0.0));
        assert!((inf + ExtendedReal::Finite(-3.0)).is_infinite());
        assert!(ExtendedReal::new(f64::NEG_INFINITY).is_err());
        assert!(ExtendedReal::new(f64::NAN).is_err());
        assert_eq!(serde_json::to_string(&inf).unwrap(), "\"inf\"");
        let back: ExtendedReal = serde_json::from_str("\"inf\"").unwrap();
        assert!(back.is_infinite());
    }

    #[test]
    fn builtin_endpoints() {
        let eta = DivergenceFunction::eta();
        assert_eq!(eta.f_at_0(), ExtendedReal::Finite(0.0));
        assert!(eta.fprime_at_inf().is_infinite());
        let h = DivergenceFunction::power(0.5).unwrap();
        assert_eq!(h.eval(4.0), -2.0);
        assert_eq!(h.fprime_at_inf(), ExtendedReal::Finite(0.0));
        let g = DivergenceFunction::gs(2.0).unwrap();
        assert_eq!(g.f_at_0(), ExtendedReal::Finite(0.5));
        assert_eq!(g.fprime_at_inf(), ExtendedReal::Finite(1.0));
        assert_relative_eq!(g.second_derivative_at_1(), 2.0 / 3.0);
    }

    #[test]
    fn single_atom_function() {
        let f = DivergenceFunction::mu_atoms(0.0, 0.0, 0.0, vec![(1.0, 1.0)]).unwrap();
        for x in [0.1, 1.0, 3.0] {
            assert_relative_eq!(f.eval(x), x / 2.0 - x / (x + 1.0), epsilon = 1e-15);
        }
    }

    #[test]
    fn representations_match_eval() {
        for f in [
            DivergenceFunction::fs(0.7).unwrap(),
            DivergenceFunction::gs(3.0).unwrap(),
            DivergenceFunction::quad(),
            DivergenceFunction::fdelta(0.2).unwrap(),
        ] {
            let r = f.representation().unwrap();
            for x in [0.01, 0.5, 1.0, 2.0, 40.0] {
                assert_relative_eq!(r.eval(x), f.eval(x), epsilon = 1e-10, max_relative = 1e-10);
            }
            if let (Some(a), Some(b)) = (f.f_at_0().finite(), Some(r.f0)) {
                assert_relative_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn transpose_examples() {
        let et = DivergenceFunction::eta().transpose();
        assert_relative_eq!(et.eval(2.0), -(2.0f64).ln(), epsilon = 1e-15);
        assert!(et.f_at_0().is_infinite());
        let q = DivergenceFunction::quad().transpose();
        assert_relative_eq!(q.eval(4.0), 0.25);
        let g = DivergenceFunction::gs(1.5).unwrap();
        assert_eq!(g.transpose().transpose(), g);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fs = [
            DivergenceFunction::eta(),
            DivergenceFunction::power(0.3).unwrap(),
            DivergenceFunction::power(2.5).unwrap(),
            DivergenceFunction::fs(2.0).unwrap(),
            DivergenceFunction::gs(0.5).unwrap(),
            DivergenceFunction::fdelta(0.1).unwrap(),
            DivergenceFunction::gs(0.5).unwrap().transpose(),
            DivergenceFunction::mu_atoms(1.0, 0.2, 0.3, vec![(0.5, 2.0)]).unwrap(),
        ];
        for f in fs {
            for x in [0.2, 1.0, 3.5] {
                let h = 1e-6;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                assert_relative_eq!(f.deriv(x), fd, epsilon = 1e-6, max_relative = 1e-6);
                let fd2 = (f.eval(1.0 + 1e-4) - 2.0 * f.eval(1.0) + f.eval(1.0 - 1e-4)) / 1e-8;
                assert_relative_eq!(f.second_derivative_at_1(), fd2, epsilon = 1e-5, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["eta", "power:1.5", "fs:2", "gs:1", "quad", "fdelta:0.001", "mu-atoms:[(1,0.5),(2,3)]", "transpose:gs:1"] {
            let f = DivergenceFunction::parse(s).unwrap();
            let again = DivergenceFunction::parse(&f.to_string()).unwrap();
            assert_eq!(f, again);
        }
        assert!(DivergenceFunction::parse("power:-1").is_err());
        assert!(DivergenceFunction::parse("nope").is_err());
    }

    #[test]
    fn standard_commuting_value() {
        let r = diag_state(&[0.6, 0.4]).unwrap();
        let s = diag_state(&[0.5, 0.5]).unwrap();
        let v = relative_entropy(&r, &s).unwrap().to_f64();
        assert_relative_eq!(v, 0.6 * 1.2f64.ln() + 0.4 * 0.8f64.ln(), epsilon = 1e-14);
        assert!((v - 0.0201).abs() < 1e-4);
    }

    #[test]
    fn standard_equal_args_and_infinite() {
        let r = diag_state(&[0.3, 0.7]).unwrap();
        assert!(relative_entropy(&r, &r).unwrap().to_f64().abs() < 1e-15);
        let s = diag_state(&[1.0, 0.0]).unwrap();
        assert!(relative_entropy(&plus(), &s).unwrap().is_infinite());
    }

    #[test]
    fn maximal_dominates_on_noncommuting_pair() {
        let r = PsdOperator::new(from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]])).unwrap();
        let s = diag_state(&[0.4, 0.6]).unwrap();
        let a = relative_entropy(&r, &s).unwrap().to_f64();
        let b = bs_relative_entropy(&r, &s).unwrap().to_f64();
        assert!(b > a + 1e-6);
        let q = DivergenceFunction::quad();
        let sq = standard_f_div(&q, &r, &s).unwrap().to_f64();
        let mq = maximal_f_div(&q, &r, &s).unwrap().to_f64();
        // Tr ϱ² σ⁻¹ directly.
        let direct = linalg::trace_re(&(r.matrix() * r.matrix() * s.power(-1.0)));
        assert_relative_eq!(sq, direct, epsilon = 1e-12);
        assert_relative_eq!(mq, direct, epsilon = 1e-12);
    }

    #[test]
    fn maximal_requires_operator_convexity() {
        let r = diag_state(&[0.5, 0.5]).unwrap();
        let f = DivergenceFunction::power(3.0).unwrap();
        assert!(matches!(maximal_f_div(&f, &r, &r), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn tilde_matches_standard_when_commuting() {
        let r = diag_state(&[0.2, 0.8]).unwrap();
        let s = diag_state(&[0.6, 0.4]).unwrap();
        let f = DivergenceFunction::fdelta(0.3).unwrap();
        assert_relative_eq!(
            tilde_f_div(&f, &r, &s).unwrap(),
            standard_f_div(&f, &r, &s).unwrap().to_f64(),
            epsilon = 1e-12
        );
        assert_relative_eq!(tilde_f_div(&f, &s, &s).unwrap(), f.eval(1.0) * s.trace(), epsilon = 1e-14);
    }

    #[test]
    fn renyi_basics() {
        let r = PsdOperator::new(from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]])).unwrap();
        let s = diag_state(&[0.4, 0.6]).unwrap();
        for a in [0.3, 0.5, 1.0, 2.0] {
            assert!(renyi_alpha(a, &r, &r).unwrap().to_f64().abs() < 1e-12);
        }
        let vals: Vec<f64> = [0.3, 0.5, 0.7, 0.9].iter().map(|&a| renyi_alpha(a, &r, &s).unwrap().to_f64()).collect();
        assert!(vals.windows(2).all(|w| w[0] < w[1]));
        assert!(renyi_alpha(0.0, &r, &s).is_err());
    }

    #[test]
    fn classical_values() {
        let eta = DivergenceFunction::eta();
        assert_relative_eq!(classical_f_div(&eta, &[1.0, 0.0], &[0.5, 0.5]).unwrap().to_f64(), 2f64.ln());
        assert!(classical_f_div(&eta, &[1.0, 0.0], &[0.0, 1.0]).unwrap().is_infinite());
        assert_eq!(classical_f_div(&eta, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), ExtendedReal::Finite(0.0));
    }

    #[test]
    fn real_pure_state_trace() {
        let p = real_pure_state(&[1.0, 1.0, 0.0]).unwrap();
        assert_relative_eq!(p.trace(), 2.0, epsilon = 1e-14);
        assert_eq!(p.rank(), 1);
    }
}
