//! Greedy approximate Carathéodory solver.
//!
//! Given `a` in the convex hull of a finite set `S`, the solver builds a
//! sequence `x_1, x_2, ...` of points of `S` whose running means
//! `a_k = (1/k) sum x_i` converge to `a`. Working in coordinates recentered at
//! `a`, each step picks the point minimising the pairing with the norming
//! functional of the running sum `u_k = k (a_k - a)`. Because `0` lies in the
//! hull of the recentered set, that minimum is never positive; when it is,
//! the functional is a separation certificate for `a`.
//!
//! The error after `k` steps is bounded by `C diam(S) / (k rho^{-1}(1/k))`
//! with `C = 2e^2` by default.

use serde::Serialize;

use crate::error::{Error, Result, SeparationCertificate};
use crate::exec::Execution;
use crate::lp_geometry::{dot, dual_into, norm_slice, SpaceSpec, Vector, DEFAULT_TOL};

/// `2e^2`: the initial excursion `||u_m|| <= 2 eta_k` compounded by at most
/// `k` factors of `(1 + 2/k)`, and `(1 + 2/k)^k <= e^2`.
pub const DEFAULT_CONSTANT: f64 = 2.0 * std::f64::consts::E * std::f64::consts::E;

/// Largest accepted minimum pairing before declaring a membership violation.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const WEIGHT_SUM_TOL: f64 = 1e-10;
const WEIGHT_POINT_TOL: f64 = 1e-9;
const REQUIRED_K_LIMIT: u64 = 1 << 62;

/// Finite, immutable family of points of `l_p^d` with its cached diameter.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vector>,
    space: SpaceSpec,
    diameter: f64,
}

impl PointSet {
    pub fn new(points: Vec<Vector>, space: &SpaceSpec) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("point set must be nonempty".into()));
        }
        for pt in &points {
            space.check_dim(pt.dim())?;
        }
        let diameter = diameter(&points, space, Execution::default());
        Ok(PointSet { points, space: *space, diameter })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, space: &SpaceSpec) -> Result<Self> {
        let points = rows.into_iter().map(Vector::new).collect::<Result<Vec<_>>>()?;
        PointSet::new(points, space)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &Vector {
        &self.points[index]
    }

    /// Max pairwise `l_p` distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// `sum_i weights[i] * x_i`.
    pub fn combination(&self, weights: &[f64]) -> Result<Vector> {
        if weights.len() != self.len() {
            return Err(Error::InvalidCertificate(format!(
                "{} weights for {} points",
                weights.len(),
                self.len()
            )));
        }
        let mut acc = vec![0.0; self.dim()];
        for (w, pt) in weights.iter().zip(&self.points) {
            for (a, c) in acc.iter_mut().zip(pt.as_slice()) {
                *a += w * c;
            }
        }
        Vector::new(acc)
    }

    fn recentered(&self, a: &Vector) -> Vec<Vec<f64>> {
        self.points.iter().map(|pt| pt.sub(a).into_inner()).collect()
    }
}

fn diameter(points: &[Vector], space: &SpaceSpec, exec: Execution) -> f64 {
    let n = points.len();
    exec.map_range(n, |i| {
        let xi = points[i].as_slice();
        points[i + 1..]
            .iter()
            .map(|xj| space.distance(xi, xj.as_slice()))
            .fold(0.0, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// Target point `a`, optionally with convex weights proving `a in conv S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexTarget {
    pub a: Vector,
    pub weights: Option<Vec<f64>>,
}

impl ConvexTarget {
    pub fn new(a: Vector, weights: Option<Vec<f64>>) -> Self {
        ConvexTarget { a, weights }
    }

    pub fn point(a: Vector) -> Self {
        ConvexTarget { a, weights: None }
    }

    /// Target defined as the weighted mean of `set`; the weights must form a
    /// probability vector.
    pub fn from_weights(set: &PointSet, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, set.len())?;
        let a = set.combination(&weights)?;
        Ok(ConvexTarget { a, weights: Some(weights) })
    }

    /// Checks the certificate against `set` if weights are present.
    pub fn validate(&self, set: &PointSet) -> Result<()> {
        set.space().check_dim(self.a.dim())?;
        let Some(weights) = &self.weights else {
            return Ok(());
        };
        check_weights(weights, set.len())?;
        let combo = set.combination(weights)?;
        for (i, (c, a)) in combo.as_slice().iter().zip(self.a.as_slice()).enumerate() {
            if (c - a).abs() > WEIGHT_POINT_TOL {
                return Err(Error::InvalidCertificate(format!(
                    "weighted mean differs from target at coordinate {i}: {c} vs {a}"
                )));
            }
        }
        Ok(())
    }
}

fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::InvalidCertificate(format!("{} weights for {n} points", weights.len())));
    }
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidCertificate(format!("weight {i} is negative or non-finite")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidCertificate(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Per-step record of a greedy run.
///
/// Index `j` of every list describes step `k = j + 1`. For colorful runs,
/// `chosen[j]` indexes into set `sources[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreedyTrace {
    pub chosen: Vec<usize>,
    pub sources: Vec<usize>,
    #[serde(skip)]
    pub iterates: Vec<Vector>,
    pub residual_norms: Vec<f64>,
    pub bounds: Vec<f64>,
    pub diam: f64,
    pub constant_c: f64,
    #[serde(skip)]
    pub space: SpaceSpec,
}

impl GreedyTrace {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
}

/// Index minimising `<functional, x>` over raw recentered points, lowest
/// index on ties.
fn argmin_pairing(functional: &[f64], centered: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, dot(functional, &centered[0]));
    for (i, x) in centered.iter().enumerate().skip(1) {
        let v = dot(functional, x);
        if v < best.1 {
            best = (i, v);
        }
    }
    best
}

/// One greedy selection. `candidates` are already recentered at the target.
/// Returns `(index, pairing)`; a zero running sum selects index 0.
pub fn greedy_step(residual_sum: &Vector, candidates: &PointSet, space: &SpaceSpec) -> Result<(usize, f64)> {
    space.require_smooth()?;
    space.check_dim(residual_sum.dim())?;
    space.check_dim(candidates.dim())?;
    if residual_sum.is_zero() {
        return Ok((0, 0.0));
    }
    let mut functional = vec![0.0; space.dim()];
    dual_into(residual_sum.as_slice(), space.p(), &mut functional);
    let centered: Vec<Vec<f64>> = candidates.points().iter().map(|x| x.as_slice().to_vec()).collect();
    Ok(argmin_pairing(&functional, &centered))
}

/// Greedy solver with a configurable bound constant.
#[derive(Debug, Clone, Copy)]
pub struct GreedySolver {
    space: SpaceSpec,
    constant: f64,
}

impl GreedySolver {
    pub fn new(space: SpaceSpec) -> Result<Self> {
        space.require_smooth()?;
        Ok(GreedySolver { space, constant: DEFAULT_CONSTANT })
    }

    pub fn with_constant(mut self, constant: f64) -> Result<Self> {
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::InvalidInput(format!("bound constant must be positive, got {constant}")));
        }
        self.constant = constant;
        Ok(self)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn run(&self, set: &PointSet, target: &ConvexTarget, k: usize) -> Result<GreedyTrace> {
        self.check_set(set)?;
        target.validate(set)?;
        self.run_family(std::slice::from_ref(set), &target.a, k, false)
    }

    /// Colorful variant: step `j` (1-based) draws from `sets[(j - 1) % sets.len()]`.
    /// `targets` holds one target per set (or a single shared one); all
    /// must name the same point.
    pub fn run_colorful(&self, sets: &[PointSet], targets: &[ConvexTarget], k: usize) -> Result<GreedyTrace> {
        if sets.is_empty() {
            return Err(Error::InvalidInput("colorful run needs at least one set".into()));
        }
        if targets.len() != sets.len() && targets.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "{} targets for {} sets",
                targets.len(),
                sets.len()
            )));
        }
        let a = &targets[0].a;
        for (i, set) in sets.iter().enumerate() {
            self.check_set(set)?;
            let target = if targets.len() == 1 { &targets[0] } else { &targets[i] };
            if target.a != *a {
                return Err(Error::InvalidInput(format!("target of set {i} differs from the common target")));
            }
            if targets.len() == sets.len() {
                target.validate(set)?;
            } else {
                set.space().check_dim(a.dim())?;
            }
        }
        self.run_family(sets, a, k, true)
    }

    fn check_set(&self, set: &PointSet) -> Result<()> {
        self.space.check_dim(set.dim())?;
        if set.space().p() != self.space.p() {
            return Err(Error::InvalidInput(format!(
                "point set was built for p = {}, solver uses p = {}",
                set.space().p(),
                self.space.p()
            )));
        }
        Ok(())
    }

    fn run_family(&self, sets: &[PointSet], a: &Vector, k: usize, colorful: bool) -> Result<GreedyTrace> {
        if k == 0 {
            return Err(Error::InvalidInput("K must be at least 1".into()));
        }
        self.space.check_dim(a.dim())?;
        let p = self.space.p();
        let dim = self.space.dim();
        let used = sets.len().min(k);
        let centered: Vec<Vec<Vec<f64>>> = sets[..used].iter().map(|s| s.recentered(a)).collect();
        let diam = sets[..used].iter().map(PointSet::diameter).fold(0.0, f64::max);

        let mut sum = vec![0.0; dim];
        let mut functional = vec![0.0; dim];
        let mut trace = GreedyTrace {
            chosen: Vec::with_capacity(k),
            sources: Vec::with_capacity(k),
            iterates: Vec::with_capacity(k),
            residual_norms: Vec::with_capacity(k),
            bounds: Vec::with_capacity(k),
            diam,
            constant_c: self.constant,
            space: self.space,
        };
        for step in 1..=k {
            let source = (step - 1) % sets.len();
            let candidates = &centered[source];
            let (index, pairing) = if sum.iter().all(|&c| c == 0.0) {
                (0, 0.0)
            } else {
                dual_into(&sum, p, &mut functional);
                argmin_pairing(&functional, candidates)
            };
            if pairing > MEMBERSHIP_TOL {
                return Err(Error::MembershipViolated(Box::new(SeparationCertificate {
                    step,
                    set_index: colorful.then_some(source),
                    functional: Vector::new(functional)?,
                    margin: pairing,
                })));
            }
            for (s, x) in sum.iter_mut().zip(&candidates[index]) {
                *s += x;
            }
            let kf = step as f64;
            let iterate: Vec<f64> = a.as_slice().iter().zip(&sum).map(|(ai, s)| ai + s / kf).collect();
            trace.chosen.push(index);
            trace.sources.push(source);
            trace.iterates.push(Vector::new(iterate)?);
            trace.residual_norms.push(norm_slice(&sum, p) / kf);
            trace.bounds.push(theoretical_bound_with(&self.space, step as u64, diam, self.constant)?);
        }
        Ok(trace)
    }
}

/// Runs `k` greedy steps with the default constant.
pub fn greedy_run(set: &PointSet, target: &ConvexTarget, space: &SpaceSpec, k: usize) -> Result<GreedyTrace> {
    GreedySolver::new(*space)?.run(set, target, k)
}

/// Colorful greedy run with the default constant; see [`GreedySolver::run_colorful`].
pub fn colorful_greedy_run(
    sets: &[PointSet],
    targets: &[ConvexTarget],
    space: &SpaceSpec,
    k: usize,
) -> Result<GreedyTrace> {
    GreedySolver::new(*space)?.run_colorful(sets, targets, k)
}

/// `2e^2 diam / (k rho^{-1}(1/k))`.
pub fn theoretical_bound(space: &SpaceSpec, k: u64, diam: f64) -> Result<f64> {
    theoretical_bound_with(space, k, diam, DEFAULT_CONSTANT)
}

pub fn theoretical_bound_with(space: &SpaceSpec, k: u64, diam: f64, constant: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if !(diam >= 0.0) || !diam.is_finite() {
        return Err(Error::InvalidInput(format!("diameter must be finite and >= 0, got {diam}")));
    }
    let profile = space.profile()?;
    if diam == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let t = profile.inverse(1.0 / kf, DEFAULT_TOL)?;
    Ok(constant * diam / (kf * t))
}

/// Smallest `k` with `theoretical_bound(k) <= eps`.
pub fn required_k(space: &SpaceSpec, diam: f64, eps: f64) -> Result<u64> {
    required_k_with(space, diam, eps, DEFAULT_CONSTANT)
}

/// The bound is non-increasing in `k` (`rho^{-1}` is concave with
/// `rho^{-1}(0) = 0`), so doubling followed by bisection finds the minimum.
pub fn required_k_with(space: &SpaceSpec, diam: f64, eps: f64, constant: f64) -> Result<u64> {
    if !(eps > 0.0) || !(diam > 0.0) {
        return Err(Error::InvalidInput(format!("need eps > 0 and diam > 0, got eps={eps}, diam={diam}")));
    }
    let bound = |k: u64| theoretical_bound_with(space, k, diam, constant);
    if bound(1)? <= eps {
        return Ok(1);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while bound(hi)? > eps {
        lo = hi;
        if hi >= REQUIRED_K_LIMIT {
            return Err(Error::Overflow);
        }
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if bound(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > REQUIRED_K_LIMIT {
        return Err(Error::Overflow);
    }
    Ok(hi)
}
