//! Geometry of the finite-dimensional spaces `l_p^d`: norms, norming
//! functionals (the duality map) and the modulus of smoothness.
//!
//! For `2 <= p < inf` the modulus is
//! `rho(t) = (((1 + t)^p + |1 - t|^p) / 2)^(1/p) - 1`, and for `1 < p <= 2`
//! it is `rho(t) = (1 + t^p)^(1/p) - 1`. Both are evaluated in forms that keep
//! full relative precision as `t -> 0`, since the greedy bounds query the
//! inverse modulus at arguments as small as `1/k`.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for [`inverse_modulus`].
pub const DEFAULT_TOL: f64 = 1e-12;

const BISECTION_CAP: usize = 200;

/// Dense real vector with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index });
        }
        if coords.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one coordinate".into()));
        }
        Ok(Vector(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// Standard basis vector `e_{index+1}` of `R^dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[index] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, factor: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * factor).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The ambient space `l_p^dim`. `p = f64::INFINITY` encodes the max norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    p: f64,
    dim: usize,
}

impl SpaceSpec {
    pub fn new(p: f64, dim: usize) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent { p });
        }
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        Ok(SpaceSpec { p, dim })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `l_p` is uniformly smooth exactly for `1 < p < inf`.
    pub fn is_uniformly_smooth(&self) -> bool {
        self.p > 1.0 && self.p.is_finite()
    }

    /// Conjugate exponent `q = p / (p - 1)`.
    pub fn conjugate(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    pub fn profile(&self) -> Result<ModulusProfile> {
        ModulusProfile::new(self.p)
    }

    pub fn require_smooth(&self) -> Result<()> {
        if self.is_uniformly_smooth() {
            Ok(())
        } else {
            Err(Error::NonSmoothExponent { p: self.p })
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, found })
        }
    }

    /// Norm of a raw coordinate slice; the caller guarantees the length.
    pub fn norm_of(&self, x: &[f64]) -> f64 {
        norm_slice(x, self.p)
    }

    /// Distance `||x - y||_p` between raw coordinate slices.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        norm_slice(&diff, self.p)
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_infinite() {
            write!(f, "l_inf^{}", self.dim)
        } else {
            write!(f, "l_{}^{}", self.p, self.dim)
        }
    }
}

pub(crate) fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub(crate) fn norm_slice(x: &[f64], p: f64) -> f64 {
    let max = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if max == 0.0 || p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return x.iter().map(|c| c.abs()).sum();
    }
    if p == 2.0 {
        let s: f64 = x.iter().map(|c| (c / max) * (c / max)).sum();
        return max * s.sqrt();
    }
    let s: f64 = x.iter().map(|c| (c.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// Writes the norming functional of `u` into `out`; `u = 0` maps to `0`.
pub(crate) fn dual_into(u: &[f64], p: f64, out: &mut [f64]) {
    let norm = norm_slice(u, p);
    if norm == 0.0 {
        out.iter_mut().for_each(|o| *o = 0.0);
        return;
    }
    let exp = p - 1.0;
    for (o, &c) in out.iter_mut().zip(u) {
        *o = if p == 2.0 {
            c / norm
        } else {
            c.signum() * (c.abs() / norm).powf(exp)
        };
        if c == 0.0 {
            *o = 0.0;
        }
    }
}

/// `||x||_p`, or `max |x_i|` when `p = inf`.
pub fn lp_norm(x: &Vector, space: &SpaceSpec) -> Result<f64> {
    space.check_dim(x.dim())?;
    Ok(norm_slice(x.as_slice(), space.p))
}

/// The unit functional `u*` with `<u*, u> = ||u||_p`, given by
/// `u*_i = sign(u_i) |u_i|^(p-1) / ||u||_p^(p-1)`. Its dual norm is one.
///
/// Refused for `p = 1` and `p = inf`, where the duality map is set-valued.
pub fn norming_functional(u: &Vector, space: &SpaceSpec) -> Result<Vector> {
    space.require_smooth()?;
    space.check_dim(u.dim())?;
    let mut out = vec![0.0; u.dim()];
    dual_into(u.as_slice(), space.p, &mut out);
    Ok(Vector(out))
}

/// Modulus of smoothness of `l_p` for a fixed `1 < p < inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusProfile {
    p: f64,
}

impl ModulusProfile {
    pub fn new(p: f64) -> Result<Self> {
        if p > 1.0 && p.is_finite() {
            Ok(ModulusProfile { p })
        } else {
            Err(Error::NonSmoothExponent { p })
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `rho(t)` for `t >= 0`. Negative or non-finite input yields NaN.
    pub fn value(&self, t: f64) -> f64 {
        if !(t >= 0.0) || !t.is_finite() {
            return f64::NAN;
        }
        if t == 0.0 {
            return 0.0;
        }
        let p = self.p;
        if p <= 2.0 {
            if t <= 1.0 {
                (t.powf(p).ln_1p() / p).exp_m1()
            } else {
                t * ((t.powf(-p)).ln_1p() / p).exp() - 1.0
            }
        } else if t <= 0.25 {
            let s = even_binomial_excess(p, t);
            (s.ln_1p() / p).exp_m1()
        } else {
            // (1+t) * ((1 + r^p)/2)^(1/p) - 1 with r = |1-t|/(1+t) in [0, 1)
            let r = (1.0 - t).abs() / (1.0 + t);
            (1.0 + t) * ((1.0 + r.powf(p)) / 2.0).powf(1.0 / p) - 1.0
        }
    }

    /// `rho^{-1}(y)` by monotone bisection; see [`inverse_modulus`].
    pub fn inverse(&self, y: f64, tol: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::InvalidInput(format!("modulus value must be finite and >= 0, got {y}")));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        // rho dominates the Hilbert modulus, so its inverse is bounded by
        // sqrt(2y + y^2).
        let mut hi = f64::max(1.0, 2.0 * (2.0 * y + y * y).sqrt());
        let mut grow = 0;
        while self.value(hi) < y {
            hi *= 2.0;
            grow += 1;
            if grow > 1100 {
                return Err(Error::ToleranceNotReached { residual: f64::INFINITY, tol });
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..BISECTION_CAP {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (r_lo, r_hi) = ((self.value(lo) - y).abs(), (self.value(hi) - y).abs());
        let (t, residual) = if r_lo < r_hi { (lo, r_lo) } else { (hi, r_hi) };
        let scaled_tol = tol * y.max(1.0);
        if residual <= scaled_tol {
            Ok(t)
        } else {
            Err(Error::ToleranceNotReached { residual, tol: scaled_tol })
        }
    }
}

/// `((1+t)^p + (1-t)^p)/2 - 1` as the even part of the binomial series,
/// accurate for small `t`.
fn even_binomial_excess(p: f64, t: f64) -> f64 {
    let t2 = t * t;
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    let mut j = 2.0;
    while j < 400.0 {
        coeff *= (p - j + 2.0) * (p - j + 1.0) / ((j - 1.0) * j);
        power *= t2;
        let term = coeff * power;
        sum += term;
        if coeff == 0.0 || term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        j += 2.0;
    }
    sum
}

pub fn modulus(profile: &ModulusProfile, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("modulus argument must be finite and >= 0, got {t}")));
    }
    Ok(profile.value(t))
}

/// Solves `rho(t) = y`. The result satisfies `|rho(t) - y| <= tol` (relative
/// when `y > 1`). The bracket is bisected until it collapses to adjacent
/// floats, so the tolerance is a check rather than a stopping rule.
pub fn inverse_modulus(profile: &ModulusProfile, y: f64, tol: f64) -> Result<f64> {
    profile.inverse(y, tol)
}

/// `eta_k = 1 / rho^{-1}(1/k)`, the growth threshold used by the greedy bound.
pub fn eta(space: &SpaceSpec, k: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let profile = space.profile()?;
    Ok(1.0 / profile.inverse(1.0 / k as f64, DEFAULT_TOL)?)
}

/// Returns `(||u + x||, 2 rho(||x||) + 1)` for a unit vector `u` and a vector
/// `x` pairing non-positively with `u*`. The first never exceeds the second.
pub fn supporting_deviation_bound(u: &Vector, x: &Vector, space: &SpaceSpec) -> Result<(f64, f64)> {
    space.check_dim(x.dim())?;
    let u_star = norming_functional(u, space)?;
    let u_norm = norm_slice(u.as_slice(), space.p);
    if (u_norm - 1.0).abs() > 1e-12 {
        return Err(Error::PreconditionViolated(format!("u must be a unit vector, ||u|| = {u_norm}")));
    }
    let pairing = u_star.dot(x);
    if pairing > 1e-9 {
        return Err(Error::PreconditionViolated(format!("<u*, x> = {pairing:e} is positive")));
    }
    let profile = space.profile()?;
    let lhs = norm_slice(u.add(x).as_slice(), space.p);
    let rhs = 2.0 * profile.value(norm_slice(x.as_slice(), space.p)) + 1.0;
    Ok((lhs, rhs))
}
