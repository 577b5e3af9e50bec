//! Closed-form action of operators on Gaussians `c·e^{−z x²/2}`.
//!
//! Fourier convention: unitary, kernel `(2π)^{-1/2} e^{−iξx}`, so
//! `𝓕[e^{−z x²/2}] = z^{−1/2} e^{−x²/(2z)}` on the principal branch.

use num_complex::Complex64;
use serde::Serialize;

use crate::op::{Domain, Op, Shape};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaussError {
    #[error("`{node}` leaves L^2: parameter would become {z}")]
    DomainViolation { node: String, z: Complex64 },
    #[error("parameter {0} has nonpositive real part")]
    InvalidParameter(Complex64),
    #[error("`{0}` has no closed form on Gaussians")]
    Unsupported(String),
    #[error("vector shape does not match `{0}`")]
    ShapeMismatch(String),
    #[error("every schedule entry is outside the operator's domain")]
    InadmissibleSchedule,
}

pub type Result<T> = std::result::Result<T, GaussError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub amp: Complex64,
    pub z: Complex64,
}

impl Gaussian {
    pub fn new(amp: Complex64, z: Complex64) -> Result<Self> {
        if z.re <= 0.0 {
            return Err(GaussError::InvalidParameter(z));
        }
        Ok(Gaussian { amp, z })
    }

    /// `e^{−z x²/2}` with unit amplitude.
    pub fn unit(z: f64) -> Result<Self> {
        Gaussian::new(Complex64::new(1.0, 0.0), Complex64::new(z, 0.0))
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.amp * (-self.z * x * x / 2.0).exp()
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm() * (std::f64::consts::PI / self.z.re).powf(0.25)
    }
}

/// Finite linear combination of Gaussians with pairwise distinct parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussSum {
    pub terms: Vec<Gaussian>,
}

fn same_z(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-14 * a.norm().max(b.norm())
}

impl GaussSum {
    pub fn single(g: Gaussian) -> Self {
        GaussSum { terms: vec![g] }
    }

    pub fn push(&mut self, g: Gaussian) {
        match self.terms.iter_mut().find(|t| same_z(t.z, g.z)) {
            Some(t) => t.amp += g.amp,
            None => self.terms.push(g),
        }
        self.terms.retain(|t| t.amp != Complex64::new(0.0, 0.0));
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms.iter().map(|g| g.eval(x)).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &self.terms {
                let s = a.z + b.z.conj();
                acc += a.amp * b.amp.conj() * (Complex64::new(2.0 * std::f64::consts::PI, 0.0) / s).sqrt();
            }
        }
        acc.re.max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GaussianVec {
    Leaf(GaussSum),
    Tuple(Vec<GaussianVec>),
}

impl GaussianVec {
    pub fn leaf(g: Gaussian) -> Self {
        GaussianVec::Leaf(GaussSum::single(g))
    }

    pub fn zero() -> Self {
        GaussianVec::Leaf(GaussSum::default())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GaussianVec::Leaf(s) => s.terms.is_empty(),
            GaussianVec::Tuple(v) => v.iter().all(GaussianVec::is_zero),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            GaussianVec::Leaf(s) => s.norm_sqr(),
            GaussianVec::Tuple(v) => v.iter().map(GaussianVec::norm_sqr).sum(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Every leaf as a flat list, in slot order.
    pub fn leaves(&self) -> Vec<&GaussSum> {
        match self {
            GaussianVec::Leaf(s) => vec![s],
            GaussianVec::Tuple(v) => v.iter().flat_map(GaussianVec::leaves).collect(),
        }
    }

    fn map_leaves(&self, f: &mut impl FnMut(&GaussSum) -> Result<GaussSum>) -> Result<GaussianVec> {
        Ok(match self {
            GaussianVec::Leaf(s) => GaussianVec::Leaf(f(s)?),
            GaussianVec::Tuple(v) => GaussianVec::Tuple(v.iter().map(|x| x.map_leaves(f)).collect::<Result<_>>()?),
        })
    }

    fn scale(&self, c: Complex64) -> GaussianVec {
        self.map_leaves(&mut |s| {
            let mut out = GaussSum::default();
            for g in &s.terms {
                out.push(Gaussian { amp: g.amp * c, z: g.z });
            }
            Ok(out)
        })
        .expect("scaling cannot fail")
    }

    fn add(self, other: GaussianVec, node: &Op) -> Result<GaussianVec> {
        if self.is_zero() && matches!(self, GaussianVec::Leaf(_)) {
            return Ok(other);
        }
        if other.is_zero() && matches!(other, GaussianVec::Leaf(_)) {
            return Ok(self);
        }
        match (self, other) {
            (GaussianVec::Leaf(mut a), GaussianVec::Leaf(b)) => {
                for g in b.terms {
                    a.push(g);
                }
                Ok(GaussianVec::Leaf(a))
            }
            (GaussianVec::Tuple(a), GaussianVec::Tuple(b)) if a.len() == b.len() => Ok(GaussianVec::Tuple(
                a.into_iter().zip(b).map(|(x, y)| x.add(y, node)).collect::<Result<_>>()?,
            )),
            _ => Err(GaussError::ShapeMismatch(node.to_string())),
        }
    }

    /// Unit Gaussian in leaf slot `slot` of `shape`, zeros elsewhere.
    pub fn in_slot(shape: &Shape, slot: usize, g: Gaussian) -> GaussianVec {
        fn build(shape: &Shape, slot: &mut isize, g: Gaussian) -> GaussianVec {
            match shape {
                Shape::Sum(parts) => GaussianVec::Tuple(parts.iter().map(|p| build(p, slot, g)).collect()),
                _ => {
                    let here = *slot == 0;
                    *slot -= 1;
                    if here {
                        GaussianVec::leaf(g)
                    } else {
                        GaussianVec::zero()
                    }
                }
            }
        }
        build(shape, &mut (slot as isize), g)
    }
}

fn transform(s: &GaussSum) -> GaussSum {
    let mut out = GaussSum::default();
    for g in &s.terms {
        out.push(Gaussian {
            amp: g.amp / g.z.sqrt(),
            z: g.z.inv(),
        });
    }
    out
}

fn leaf(v: &GaussianVec, node: &Op) -> Result<GaussSum> {
    match v {
        GaussianVec::Leaf(s) => Ok(s.clone()),
        GaussianVec::Tuple(_) => Err(GaussError::ShapeMismatch(node.to_string())),
    }
}

/// Apply `op` to `v` exactly.
pub fn apply(op: &Op, v: &GaussianVec) -> Result<GaussianVec> {
    match op {
        Op::Identity => Ok(v.clone()),
        Op::Mult(phi) => {
            let s = leaf(v, op)?;
            let poly = phi
                .to_poly()
                .filter(|p| p.terms.keys().all(|&(_, k)| k == 0))
                .ok_or_else(|| GaussError::Unsupported(op.to_string()))?;
            let mut out = GaussSum::default();
            for g in &s.terms {
                for (&(a, _), &c) in &poly.terms {
                    let shift = 2.0 * (*a.numer() as f64) / (*a.denom() as f64);
                    let z = g.z - shift;
                    if z.re <= 0.0 {
                        return Err(GaussError::DomainViolation { node: op.to_string(), z });
                    }
                    out.push(Gaussian { amp: g.amp * c, z });
                }
            }
            Ok(GaussianVec::Leaf(out))
        }
        Op::Transform { .. } => Ok(GaussianVec::Leaf(transform(&leaf(v, op)?))),
        Op::Fourier(inner) => {
            let f = GaussianVec::Leaf(transform(&leaf(v, op)?));
            let y = apply(inner, &f)?;
            Ok(GaussianVec::Leaf(transform(&leaf(&y, op)?)))
        }
        Op::Scale(c, inner) => Ok(apply(inner, v)?.scale(Complex64::new(*c, 0.0))),
        Op::Sum(ts) => {
            let mut acc = GaussianVec::zero();
            for term in ts {
                acc = acc.add(apply(term, v)?, op)?;
            }
            Ok(acc)
        }
        Op::Compose(a, b) => apply(a, &apply(b, v)?),
        Op::Zero(d) => {
            if !member(d, v, op)? {
                return Err(GaussError::DomainViolation {
                    node: op.to_string(),
                    z: Complex64::new(0.0, 0.0),
                });
            }
            Ok(zero_like(v))
        }
        Op::Block(rows) => {
            let GaussianVec::Tuple(parts) = v else {
                return Err(GaussError::ShapeMismatch(op.to_string()));
            };
            if parts.len() != rows.len() {
                return Err(GaussError::ShapeMismatch(op.to_string()));
            }
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                let mut acc = GaussianVec::zero();
                for (e, p) in row.iter().zip(parts) {
                    acc = acc.add(apply(e, p)?, op)?;
                }
                out.push(acc);
            }
            Ok(GaussianVec::Tuple(out))
        }
        Op::Axiom(_) | Op::Adjoint(_) | Op::Modulus(_) => Err(GaussError::Unsupported(op.to_string())),
    }
}

fn zero_like(v: &GaussianVec) -> GaussianVec {
    match v {
        GaussianVec::Leaf(_) => GaussianVec::zero(),
        GaussianVec::Tuple(p) => GaussianVec::Tuple(p.iter().map(zero_like).collect()),
    }
}

fn member(d: &Domain, v: &GaussianVec, node: &Op) -> Result<bool> {
    Ok(match d {
        Domain::Full => true,
        Domain::Trivial => v.is_zero(),
        Domain::MaxDom(phi) => match apply(&Op::Mult(phi.clone()), v) {
            Ok(_) => true,
            Err(GaussError::DomainViolation { .. }) => false,
            Err(e) => return Err(e),
        },
        Domain::Preimage { op, target } => match apply(op, v) {
            Ok(w) => member(target, &w, node)?,
            Err(GaussError::DomainViolation { .. }) => false,
            Err(e) => return Err(e),
        },
        Domain::Intersect(ds) => {
            for x in ds {
                if !member(x, v, node)? {
                    return Ok(false);
                }
            }
            true
        }
        Domain::DirectSum(ds) => match v {
            GaussianVec::Tuple(p) if p.len() == ds.len() => {
                for (x, y) in ds.iter().zip(p) {
                    if !member(x, y, node)? {
                        return Ok(false);
                    }
                }
                true
            }
            _ => return Err(GaussError::ShapeMismatch(node.to_string())),
        },
        Domain::Axiom { .. } | Domain::Of(_) => return Err(GaussError::Unsupported(d.to_string())),
    })
}

pub fn norm(v: &GaussianVec) -> f64 {
    v.norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupVerdict {
    UnboundedEvidence,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupRow {
    pub z: f64,
    /// `max_slot ‖T g_z‖ / ‖g_z‖`, absent when every slot leaves the domain.
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupTable {
    pub rows: Vec<BlowupRow>,
    pub verdict: BlowupVerdict,
}

/// Halving approach to `z = 1/2`.
pub const HALVING_SCHEDULE: [f64; 5] = [1.5, 1.0, 0.75, 0.625, 0.5625];
/// `z = 1/2 + 10^(-2k)`, `k = 0..=4`; the default witness sequence.
pub const DEFAULT_SCHEDULE: [f64; 5] = [1.5, 0.51, 0.5001, 0.500001, 0.50000001];

/// Minimum growth between consecutive admissible ratios.
pub const BLOWUP_FACTOR: f64 = 2.0;
/// Minimum number of admissible entries for evidence.
pub const BLOWUP_MIN_ENTRIES: usize = 4;

/// Largest ratio over the leaf slots of `op`'s input space.
pub fn ratio(op: &Op, z: f64) -> Result<f64> {
    let shape = op.in_shape().ok_or_else(|| GaussError::ShapeMismatch(op.to_string()))?;
    let g = Gaussian::unit(z)?;
    let mut best: Option<f64> = None;
    let mut last_violation = None;
    for slot in 0..shape.leaves() {
        let v = GaussianVec::in_slot(&shape, slot, g);
        match apply(op, &v) {
            Ok(w) => {
                let r = w.norm() / g.norm();
                best = Some(best.map_or(r, |b: f64| b.max(r)));
            }
            Err(e @ GaussError::DomainViolation { .. }) => last_violation = Some(e),
            Err(e) => return Err(e),
        }
    }
    match (best, last_violation) {
        (Some(r), _) => Ok(r),
        (None, Some(e)) => Err(e),
        (None, None) => Err(GaussError::ShapeMismatch(op.to_string())),
    }
}

pub fn blowup_probe(op: &Op, schedule: &[f64]) -> Result<BlowupTable> {
    let mut rows = Vec::with_capacity(schedule.len());
    for &z in schedule {
        match ratio(op, z) {
            Ok(r) => rows.push(BlowupRow { z, ratio: Some(r), violation: None }),
            Err(e @ GaussError::DomainViolation { .. }) => rows.push(BlowupRow {
                z,
                ratio: None,
                violation: Some(e.to_string()),
            }),
            Err(e) => return Err(e),
        }
    }
    let admissible: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
    if admissible.is_empty() {
        return Err(GaussError::InadmissibleSchedule);
    }
    let grows = admissible.len() >= BLOWUP_MIN_ENTRIES
        && admissible.windows(2).all(|w| w[0] > 0.0 && w[1] >= BLOWUP_FACTOR * w[0]);
    Ok(BlowupTable {
        rows,
        verdict: if grows { BlowupVerdict::UnboundedEvidence } else { BlowupVerdict::Inconclusive },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use num_rational::Rational64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unit_gaussian_is_a_fourier_fixed_point() {
        let g = GaussianVec::leaf(Gaussian::unit(1.0).unwrap());
        let out = apply(&Op::ft(), &g).unwrap();
        let GaussianVec::Leaf(s) = out else { panic!() };
        assert!((s.terms[0].amp - c(1.0)).norm() < 1e-15);
        assert!((s.terms[0].z - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn multiplier_shifts_and_violates() {
        let m = Op::Mult(Scalar::gaussian_exp(Rational64::new(1, 4)));
        let out = apply(&m, &GaussianVec::leaf(Gaussian::unit(1.0).unwrap())).unwrap();
        assert_eq!(out.leaves()[0].terms[0].z, c(0.5));
        let err = apply(&m, &GaussianVec::leaf(Gaussian::unit(0.4).unwrap())).unwrap_err();
        assert!(matches!(err, GaussError::DomainViolation { .. }));
    }

    #[test]
    fn norms() {
        let g = Gaussian::new(c(1.0), c(std::f64::consts::PI)).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-15);
        let g = Gaussian::new(c(2.0), c(1.0)).unwrap();
        assert!((g.norm() - 2.0 * std::f64::consts::PI.powf(0.25)).abs() < 1e-14);
        assert!((GaussianVec::leaf(g).norm() - g.norm()).abs() < 1e-14);
        assert_eq!(GaussianVec::zero().norm(), 0.0);
    }

    #[test]
    fn trivial_probes() {
        let sched = [1.5, 1.0, 0.75];
        let t = blowup_probe(&Op::zero_full(), &sched).unwrap();
        assert!(t.rows.iter().all(|r| r.ratio == Some(0.0)));
        let t = blowup_probe(&Op::Identity, &sched).unwrap();
        assert!(t.rows.iter().all(|r| (r.ratio.unwrap() - 1.0).abs() < 1e-15));
        let m = Op::Mult(Scalar::gaussian_exp(Rational64::new(1, 1)));
        assert_eq!(blowup_probe(&m, &[0.5, 1.0]).unwrap_err(), GaussError::InadmissibleSchedule);
    }
}
