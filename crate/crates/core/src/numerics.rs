//! Grid truncations, operator norms across scales, joint-domain probes.
//!
//! A grid function is stored in normalized coordinates `v_k = √h·f(x_k)`
//! on `x_k = (k − n/2)h`, `h = 2L/n`. The Fourier transform then becomes
//! the exactly unitary matrix `U_jk = n^{-1/2} e^{−2πi(j−n/2)(k−n/2)/n}`,
//! mapping onto the dual grid `ξ_j = (j − n/2)π/L`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::op::Op;
use crate::scalar::ScalarError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("`{0}` cannot be truncated")]
    Unsupported(String),
    #[error("block shapes disagree in `{0}`")]
    ShapeMismatch(String),
    #[error("power iteration did not converge after {0} steps")]
    NonConvergence(usize),
    #[error("non-finite entry in the truncation of `{0}`")]
    NonFinite(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Result<T> = std::result::Result<T, NumericsError>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    /// Half-width `L`.
    pub half_width: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(NumericsError::InvalidGrid(format!("half-width {half_width} must be positive")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(NumericsError::InvalidGrid(format!("point count {n} must be even and at least 8")));
        }
        Ok(GridSpec { half_width, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.n).map(|k| (k as f64 - (self.n / 2) as f64) * h).collect()
    }

    /// Grid carrying the discrete transform of this one.
    pub fn dual(&self) -> GridSpec {
        GridSpec {
            half_width: self.n as f64 * PI / (2.0 * self.half_width),
            n: self.n,
        }
    }

    /// `L ∈ {2,…,6}` with `n = 64L`.
    pub fn default_ladder() -> Vec<GridSpec> {
        (2..=6).map(|l| GridSpec { half_width: l as f64, n: 64 * l }).collect()
    }

    /// `n = per_unit·L` for each listed half-width.
    pub fn ladder(half_widths: &[f64], per_unit: usize) -> Result<Vec<GridSpec>> {
        half_widths
            .iter()
            .map(|&l| GridSpec::new(l, (per_unit as f64 * l).round() as usize))
            .collect()
    }
}

/// Unitary discrete transform on `grid` (inverse when `inverse`).
pub fn dft_matrix(grid: &GridSpec, inverse: bool) -> DMatrix<Complex64> {
    let n = grid.n;
    let half = (n / 2) as i64;
    let sign = if inverse { 1.0 } else { -1.0 };
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |j, k| {
        let p = ((j as i64 - half) * (k as i64 - half)).rem_euclid(n as i64) as f64;
        Complex64::from_polar(scale, sign * 2.0 * PI * p / n as f64)
    })
}

/// `‖U*U − I‖_F` for the transform on `grid`.
pub fn unitarity_deviation(grid: &GridSpec) -> f64 {
    let u = dft_matrix(grid, false);
    let g = u.adjoint() * &u - DMatrix::identity(grid.n, grid.n);
    g.norm()
}

/// One `n × n` leaf block.
#[derive(Clone, Debug, PartialEq)]
pub enum Leaf {
    Zero,
    Diag(Vec<Complex64>),
    Dense(DMatrix<Complex64>),
}

impl Leaf {
    fn dense(&self, n: usize) -> DMatrix<Complex64> {
        match self {
            Leaf::Zero => DMatrix::zeros(n, n),
            Leaf::Diag(d) => DMatrix::from_diagonal(&DVector::from_vec(d.clone())),
            Leaf::Dense(m) => m.clone(),
        }
    }

    fn scale(&self, c: Complex64) -> Leaf {
        match self {
            Leaf::Zero => Leaf::Zero,
            _ if c == ZERO => Leaf::Zero,
            Leaf::Diag(d) => Leaf::Diag(d.iter().map(|x| x * c).collect()),
            Leaf::Dense(m) => Leaf::Dense(m * c),
        }
    }

    fn add(&self, other: &Leaf, n: usize) -> Leaf {
        match (self, other) {
            (Leaf::Zero, x) | (x, Leaf::Zero) => x.clone(),
            (Leaf::Diag(a), Leaf::Diag(b)) => Leaf::Diag(a.iter().zip(b).map(|(x, y)| x + y).collect()),
            (a, b) => Leaf::Dense(a.dense(n) + b.dense(n)),
        }
    }

    fn mul(&self, other: &Leaf, n: usize) -> Leaf {
        match (self, other) {
            (Leaf::Zero, _) | (_, Leaf::Zero) => Leaf::Zero,
            (Leaf::Diag(a), Leaf::Diag(b)) => Leaf::Diag(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            (Leaf::Diag(a), Leaf::Dense(m)) => {
                let mut m = m.clone();
                for (i, mut row) in m.row_iter_mut().enumerate() {
                    row *= a[i];
                }
                Leaf::Dense(m)
            }
            (Leaf::Dense(m), Leaf::Diag(b)) => {
                let mut m = m.clone();
                for (j, mut col) in m.column_iter_mut().enumerate() {
                    col *= b[j];
                }
                Leaf::Dense(m)
            }
            (a, b) => Leaf::Dense(a.dense(n) * b.dense(n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tm {
    /// `c·I` on whichever space the context fixes.
    Scalar(Complex64),
    Blocks(Vec<Vec<Leaf>>),
}

impl Tm {
    fn expand(&self, rows: usize, cols: usize, n: usize, src: &Op) -> Result<Vec<Vec<Leaf>>> {
        match self {
            Tm::Blocks(b) if b.len() == rows && b.first().map_or(cols == 0, |r| r.len() == cols) => Ok(b.clone()),
            Tm::Scalar(c) if *c == ZERO => Ok(vec![vec![Leaf::Zero; cols]; rows]),
            Tm::Scalar(c) if rows == cols => Ok((0..rows)
                .map(|i| (0..cols).map(|j| if i == j { Leaf::Diag(vec![*c; n]) } else { Leaf::Zero }).collect())
                .collect()),
            _ => Err(NumericsError::ShapeMismatch(src.to_string())),
        }
    }

    fn dims(&self) -> Option<(usize, usize)> {
        match self {
            Tm::Scalar(_) => None,
            Tm::Blocks(b) => Some((b.len(), b.first().map_or(0, Vec::len))),
        }
    }
}

struct Builder {
    n: usize,
    cap: Option<f64>,
}

impl Builder {
    fn blocks_of(&self, t: &Tm, rows: usize, cols: usize, src: &Op) -> Result<Vec<Vec<Leaf>>> {
        t.expand(rows, cols, self.n, src)
    }

    fn add(&self, a: Tm, b: Tm, src: &Op) -> Result<Tm> {
        let dims = a.dims().or(b.dims());
        match dims {
            None => {
                let (Tm::Scalar(x), Tm::Scalar(y)) = (a, b) else { unreachable!() };
                Ok(Tm::Scalar(x + y))
            }
            Some((r, c)) => {
                let a = self.blocks_of(&a, r, c, src)?;
                let b = self.blocks_of(&b, r, c, src)?;
                Ok(Tm::Blocks(
                    a.iter()
                        .zip(&b)
                        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add(y, self.n)).collect())
                        .collect(),
                ))
            }
        }
    }

    fn mul(&self, a: Tm, b: Tm, src: &Op) -> Result<Tm> {
        match (a, b) {
            (Tm::Scalar(x), Tm::Scalar(y)) => Ok(Tm::Scalar(x * y)),
            (Tm::Scalar(x), Tm::Blocks(b)) | (Tm::Blocks(b), Tm::Scalar(x)) => Ok(Tm::Blocks(
                b.iter().map(|r| r.iter().map(|l| l.scale(x)).collect()).collect(),
            )),
            (Tm::Blocks(a), Tm::Blocks(b)) => {
                let inner = a.first().map_or(0, Vec::len);
                if inner != b.len() {
                    return Err(NumericsError::ShapeMismatch(src.to_string()));
                }
                let cols = b.first().map_or(0, Vec::len);
                let mut out = vec![vec![Leaf::Zero; cols]; a.len()];
                for (i, row) in a.iter().enumerate() {
                    for j in 0..cols {
                        let mut acc = Leaf::Zero;
                        for k in 0..inner {
                            acc = acc.add(&row[k].mul(&b[k][j], self.n), self.n);
                        }
                        out[i][j] = acc;
                    }
                }
                Ok(Tm::Blocks(out))
            }
        }
    }

    fn build(&self, op: &Op, grid: &GridSpec) -> Result<Tm> {
        Ok(match op {
            Op::Zero(_) => Tm::Scalar(ZERO),
            Op::Identity => Tm::Scalar(ONE),
            Op::Mult(phi) => {
                let mut d = Vec::with_capacity(self.n);
                for x in grid.points() {
                    let mut v = phi.eval(x)?;
                    if let Some(cap) = self.cap {
                        v = v.clamp(-cap, cap);
                    }
                    if !v.is_finite() {
                        return Err(NumericsError::NonFinite(op.to_string()));
                    }
                    d.push(Complex64::new(v, 0.0));
                }
                Tm::Blocks(vec![vec![Leaf::Diag(d)]])
            }
            Op::Transform { inverse } => Tm::Blocks(vec![vec![Leaf::Dense(dft_matrix(grid, *inverse))]]),
            Op::Fourier(inner) => {
                let x = self.build(inner, &grid.dual())?;
                let u = Tm::Blocks(vec![vec![Leaf::Dense(dft_matrix(grid, false))]]);
                let ui = Tm::Blocks(vec![vec![Leaf::Dense(dft_matrix(grid, true))]]);
                if let Tm::Scalar(_) = x {
                    return Ok(x);
                }
                let xu = self.mul(x, u, op)?;
                self.mul(ui, xu, op)?
            }
            Op::Scale(c, inner) => {
                let x = self.build(inner, grid)?;
                self.mul(Tm::Scalar(Complex64::new(*c, 0.0)), x, op)?
            }
            Op::Sum(ts) => {
                let mut acc = Tm::Scalar(ZERO);
                for t in ts {
                    let x = self.build(t, grid)?;
                    acc = self.add(acc, x, op)?;
                }
                acc
            }
            Op::Compose(a, b) => {
                let x = self.build(a, grid)?;
                let y = self.build(b, grid)?;
                self.mul(x, y, op)?
            }
            Op::Block(rows) => {
                let shape = op.in_shape().ok_or_else(|| NumericsError::ShapeMismatch(op.to_string()))?;
                let sizes: Vec<usize> = match &shape {
                    crate::op::Shape::Sum(parts) => parts.iter().map(|p| p.leaves()).collect(),
                    _ => return Err(NumericsError::ShapeMismatch(op.to_string())),
                };
                let total: usize = sizes.iter().sum();
                let mut out = vec![vec![Leaf::Zero; total]; total];
                let offsets: Vec<usize> = sizes.iter().scan(0, |s, &k| {
                    let o = *s;
                    *s += k;
                    Some(o)
                }).collect();
                for (i, row) in rows.iter().enumerate() {
                    for (j, e) in row.iter().enumerate() {
                        let t = self.build(e, grid)?;
                        let b = self.blocks_of(&t, sizes[i], sizes[j], op)?;
                        for (a, brow) in b.into_iter().enumerate() {
                            for (c, leaf) in brow.into_iter().enumerate() {
                                out[offsets[i] + a][offsets[j] + c] = leaf;
                            }
                        }
                    }
                }
                Tm::Blocks(out)
            }
            Op::Axiom(_) | Op::Adjoint(_) | Op::Modulus(_) => return Err(NumericsError::Unsupported(op.to_string())),
        })
    }
}

/// A truncated operator: a `k × k` grid of `n × n` leaf blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedOp {
    pub grid: GridSpec,
    pub blocks: Vec<Vec<Leaf>>,
    pub source: String,
}

pub fn truncate(op: &Op, grid: &GridSpec) -> Result<TruncatedOp> {
    truncate_with(op, grid, None)
}

/// Truncation with multiplier values clamped to `[-cap, cap]`.
pub fn truncate_capped(op: &Op, grid: &GridSpec, cap: f64) -> Result<TruncatedOp> {
    truncate_with(op, grid, Some(cap))
}

fn truncate_with(op: &Op, grid: &GridSpec, cap: Option<f64>) -> Result<TruncatedOp> {
    let b = Builder { n: grid.n, cap };
    let k = op.in_shape().map_or(1, |s| s.leaves());
    let tm = b.build(op, grid)?;
    let blocks = b.blocks_of(&tm, k, k, op)?;
    Ok(TruncatedOp {
        grid: *grid,
        blocks,
        source: op.to_string(),
    })
}

impl TruncatedOp {
    pub fn components(&self) -> usize {
        self.blocks.len()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.grid.n;
        let k = self.components();
        let mut m = DMatrix::zeros(k * n, k * n);
        for (i, row) in self.blocks.iter().enumerate() {
            for (j, leaf) in row.iter().enumerate() {
                if *leaf != Leaf::Zero {
                    m.view_mut((i * n, j * n), (n, n)).copy_from(&leaf.dense(n));
                }
            }
        }
        m
    }

    /// All leaves zero or diagonal, at most one nonzero per block row and column.
    fn monomial_diagonal(&self) -> bool {
        let k = self.components();
        let diag = self.blocks.iter().flatten().all(|l| matches!(l, Leaf::Zero | Leaf::Diag(_)));
        let rows_ok = self.blocks.iter().all(|r| r.iter().filter(|l| **l != Leaf::Zero).count() <= 1);
        let cols_ok = (0..k).all(|j| self.blocks.iter().filter(|r| r[j] != Leaf::Zero).count() <= 1);
        diag && rows_ok && cols_ok
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        self.to_dense() * v
    }
}

/// Natural log of the largest singular value (`-inf` for zero).
pub fn log_op_norm(m: &TruncatedOp) -> Result<f64> {
    if m.monomial_diagonal() {
        let mut best = f64::NEG_INFINITY;
        for leaf in m.blocks.iter().flatten() {
            if let Leaf::Diag(d) = leaf {
                for x in d {
                    best = best.max(x.norm().ln());
                }
            }
        }
        return Ok(best);
    }
    Ok(power_norm(&m.to_dense())?.ln())
}

pub fn op_norm(m: &TruncatedOp) -> Result<f64> {
    Ok(log_op_norm(m)?.exp())
}

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_CAP: usize = 10_000;

/// Largest singular value by power iteration on `M*M`.
pub fn power_norm(m: &DMatrix<Complex64>) -> Result<f64> {
    let dim = m.ncols();
    if dim == 0 || m.iter().all(|x| *x == ZERO) {
        return Ok(0.0);
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::NonFinite("matrix".into()));
    }
    let scale = m.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let a = m / Complex64::new(scale, 0.0);
    // deterministic start with no special alignment
    let mut v = DVector::from_fn(dim, |i, _| Complex64::new(1.0 + (i as f64 * 0.7548).sin() * 0.5, (i as f64 * 0.5698).cos() * 0.25));
    v /= Complex64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..POWER_CAP {
        let w = a.adjoint() * (&a * &v);
        let next = w.norm();
        if next == 0.0 {
            return Ok(0.0);
        }
        v = w / Complex64::new(next, 0.0);
        if (next - lambda).abs() <= POWER_TOLERANCE * next {
            return Ok(next.sqrt() * scale);
        }
        lambda = next;
    }
    Err(NumericsError::NonConvergence(POWER_CAP))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthOutcome {
    StabilizedBounded { limit: f64 },
    Growing { factors: Vec<f64> },
    Inconclusive { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleRow {
    pub half_width: f64,
    pub n: usize,
    pub log_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub rows: Vec<ScaleRow>,
    pub outcome: GrowthOutcome,
}

pub const GROWTH_FACTOR: f64 = 1.5;
pub const GROWTH_STEPS: usize = 3;
pub const STABLE_BAND: f64 = 1e-6;

pub fn norm_growth_probe(op: &Op, scales: &[GridSpec]) -> Result<GrowthReport> {
    norm_growth_probe_with(op, scales, STABLE_BAND)
}

/// [`norm_growth_probe`] with a custom stabilization band.
pub fn norm_growth_probe_with(op: &Op, scales: &[GridSpec], band: f64) -> Result<GrowthReport> {
    let mut rows = Vec::with_capacity(scales.len());
    for g in scales {
        let t = truncate(op, g)?;
        rows.push(ScaleRow {
            half_width: g.half_width,
            n: g.n,
            log_norm: log_op_norm(&t)?,
        });
    }
    let outcome = classify_growth(&rows, band);
    Ok(GrowthReport { rows, outcome })
}

fn classify_growth(rows: &[ScaleRow], band: f64) -> GrowthOutcome {
    if rows.len() < 2 {
        return GrowthOutcome::Inconclusive {
            reason: format!("{} scale(s) give no ratios", rows.len()),
        };
    }
    let ratios: Vec<f64> = rows
        .windows(2)
        .map(|w| match (w[0].log_norm, w[1].log_norm) {
            (a, b) if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY => 1.0,
            (a, b) => (b - a).exp(),
        })
        .collect();
    let mut run = 0;
    for (i, r) in ratios.iter().enumerate() {
        run = if *r >= GROWTH_FACTOR { run + 1 } else { 0 };
        if run >= GROWTH_STEPS {
            return GrowthOutcome::Growing {
                factors: ratios[i + 1 - run..=i].to_vec(),
            };
        }
    }
    if ratios.len() >= GROWTH_STEPS && ratios[ratios.len() - GROWTH_STEPS..].iter().all(|r| (r - 1.0).abs() <= band) {
        let last = rows[rows.len() - 1].log_norm;
        return GrowthOutcome::StabilizedBounded { limit: last.exp() };
    }
    GrowthOutcome::Inconclusive {
        reason: format!("ratios {ratios:?} neither grow nor settle"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TrivialityVerdict {
    EvidenceOfTriviality,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrivialityRow {
    pub half_width: f64,
    pub n: usize,
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrivialityTable {
    pub rows: Vec<TrivialityRow>,
    pub verdict: TrivialityVerdict,
}

pub const TRIVIALITY_FACTOR: f64 = 10.0;
/// Multiplier values are clamped here so that dual-grid samples stay finite.
pub const TRIVIALITY_CAP: f64 = 1e6;

pub fn triviality_probe(a: &Op, b: &Op, scales: &[GridSpec]) -> Result<TrivialityTable> {
    let mut rows = Vec::with_capacity(scales.len());
    for g in scales {
        let ma = truncate_capped(a, g, TRIVIALITY_CAP)?.to_dense();
        let mb = truncate_capped(b, g, TRIVIALITY_CAP)?.to_dense();
        if ma.shape() != mb.shape() {
            return Err(NumericsError::ShapeMismatch(format!("{a} vs {b}")));
        }
        let q = ma.adjoint() * &ma + mb.adjoint() * &mb;
        let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(q);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        rows.push(TrivialityRow {
            half_width: g.half_width,
            n: g.n,
            min_eigenvalue: min,
        });
    }
    let mins: Vec<f64> = rows.iter().map(|r| r.min_eigenvalue).collect();
    let increasing = mins.len() >= 2 && mins.windows(2).all(|w| w[1] > w[0]);
    let factor = match (mins.first(), mins.last()) {
        (Some(f), Some(l)) if *f > 0.0 => l / f,
        _ => 0.0,
    };
    let verdict = if increasing && factor >= TRIVIALITY_FACTOR {
        TrivialityVerdict::EvidenceOfTriviality
    } else {
        TrivialityVerdict::Inconclusive
    };
    Ok(TrivialityTable { rows, verdict })
}

/// Principal square root of a Hermitian positive semidefinite matrix.
pub fn psd_sqrt(h: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let roots = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
    let v = eig.eigenvectors;
    &v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Grid samples `√h·f(x_k)` of `f`.
pub fn sample(grid: &GridSpec, f: impl Fn(f64) -> Complex64) -> DVector<Complex64> {
    let s = grid.h().sqrt();
    DVector::from_iterator(grid.n, grid.points().into_iter().map(|x| f(x) * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use num_rational::Rational64;

    fn m(n: i64, d: i64) -> Op {
        Op::Mult(Scalar::gaussian_exp(Rational64::new(n, d)))
    }

    #[test]
    fn diagonal_truncation() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let t = truncate(&m(1, 1), &g).unwrap();
        assert!((op_norm(&t).unwrap() - 4f64.exp()).abs() < 1e-9 * 4f64.exp());
        let z = truncate(&Op::zero_full(), &g).unwrap();
        assert_eq!(op_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn transform_is_unitary() {
        let g = GridSpec::new(8.0, 256).unwrap();
        assert!(unitarity_deviation(&g) <= 1e-12);
    }

    #[test]
    fn anti_diagonal_norm() {
        let g = GridSpec::new(2.0, 32).unwrap();
        let a = Op::Block(vec![
            vec![Op::zero_full(), Op::Mult(Scalar::constant(-2.0) * Scalar::gaussian_exp(Rational64::from_integer(2)))],
            vec![Op::Mult(Scalar::constant(2.0) * Scalar::gaussian_exp(Rational64::from_integer(2))), Op::zero_full()],
        ]);
        let t = truncate(&a, &g).unwrap();
        let exact = 2.0 * 8f64.exp();
        assert!((op_norm(&t).unwrap() - exact).abs() < 1e-9 * exact);
        let svd = t.to_dense().singular_values();
        assert!((svd.max() - exact).abs() < 1e-9 * exact);
        let dense = power_norm(&t.to_dense()).unwrap();
        assert!((dense - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn probes_on_trivial_operators() {
        let ladder = GridSpec::ladder(&[2.0, 3.0, 4.0, 5.0], 16).unwrap();
        let r = norm_growth_probe(&Op::Identity, &ladder).unwrap();
        assert_eq!(r.outcome, GrowthOutcome::StabilizedBounded { limit: 1.0 });
        let r = norm_growth_probe(&Op::Identity, &ladder[..1]).unwrap();
        assert!(matches!(r.outcome, GrowthOutcome::Inconclusive { .. }));
        let t = triviality_probe(&Op::Identity, &Op::Identity, &ladder[..2]).unwrap();
        assert!(t.rows.iter().all(|r| (r.min_eigenvalue - 2.0).abs() < 1e-10));
    }
}
