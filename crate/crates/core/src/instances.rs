//! Test instances: random hull-membership problems, the lower-bound family
//! `S = {e_1, ..., e_2k}` with the uniform barycenter, and an exhaustive
//! oracle for `dist(a, conv_k S)` on tiny sets.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::greedy::{ConvexTarget, PointSet};
use crate::lp_geometry::{dual_into, norm_slice, SpaceSpec, Vector};

/// Largest point set the exhaustive oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 12;

const REFINE_GRID: usize = 9;
const REFINE_MIN_RADIUS: f64 = 1e-12;
const PG_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct LowerBoundInstance {
    pub k: usize,
    pub n: usize,
    pub set: PointSet,
    pub target: ConvexTarget,
}

/// Standard basis `e_1, ..., e_n` of `R^n` with `n = 2k`, and the uniform
/// target `(1/n, ..., 1/n)` with uniform weights.
pub fn lower_bound_instance(k: usize, p: f64) -> Result<LowerBoundInstance> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    let n = 2 * k;
    let space = SpaceSpec::new(p, n)?;
    let set = PointSet::new((0..n).map(|i| Vector::basis(n, i)).collect(), &space)?;
    let target = ConvexTarget::from_weights(&set, vec![1.0 / n as f64; n])?;
    Ok(LowerBoundInstance { k, n, set, target })
}

/// `(2k)^(1/p - 1)`: distance from the barycenter to the uniform mean of any
/// `k` basis vectors.
pub fn symmetric_distance(k: usize, p: f64) -> f64 {
    (2.0 * k as f64).powf(1.0 / p - 1.0)
}

/// `k^(1/p - 1) / 4`: the guaranteed floor for `dist(a, conv_k S)`.
pub fn lower_bound_floor(k: usize, p: f64) -> f64 {
    0.25 * (k as f64).powf(1.0 / p - 1.0)
}

/// Exact `dist(a, conv_k S)` by enumerating all `k`-subsets of `set`.
pub fn exact_k_hull_distance(set: &PointSet, a: &Vector, space: &SpaceSpec, k: usize) -> Result<f64> {
    exact_k_hull_distance_with(set, a, space, k, Execution::default())
}

pub fn exact_k_hull_distance_with(
    set: &PointSet,
    a: &Vector,
    space: &SpaceSpec,
    k: usize,
    exec: Execution,
) -> Result<f64> {
    space.check_dim(set.dim())?;
    space.check_dim(a.dim())?;
    let n = set.len();
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if n > ORACLE_MAX_POINTS || k > n {
        return Err(Error::InstanceTooLarge { points: n, k });
    }
    let subsets = combinations(n, k);
    let centered: Vec<Vec<f64>> = set.points().iter().map(|x| x.sub(a).into_inner()).collect();
    let p = space.p();
    let best = exec
        .map_slice(&subsets, |subset| {
            let cols: Vec<&[f64]> = subset.iter().map(|&i| centered[i].as_slice()).collect();
            subset_distance(&cols, p)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..k).collect();
    loop {
        out.push(current.clone());
        let mut i = k;
        while i > 0 && current[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        current[i - 1] += 1;
        for j in i..k {
            current[j] = current[j - 1] + 1;
        }
    }
}

/// `||sum_j w_j c_j||_p` for weights `w` over columns `c_j`.
fn combination_norm(cols: &[&[f64]], w: &[f64], p: f64, buf: &mut [f64]) -> f64 {
    buf.iter_mut().for_each(|b| *b = 0.0);
    for (col, wj) in cols.iter().zip(w) {
        for (b, c) in buf.iter_mut().zip(col.iter()) {
            *b += wj * c;
        }
    }
    norm_slice(buf, p)
}

/// Minimum over the weight simplex of `||sum w_j c_j||_p`, where `c_j` are
/// points recentered at the target.
fn subset_distance(cols: &[&[f64]], p: f64) -> f64 {
    match cols.len() {
        1 => norm_slice(cols[0], p),
        2 | 3 => refine_on_simplex(cols, p),
        _ => projected_gradient(cols, p),
    }
}

/// Grid search over the first `m - 1` barycentric coordinates, halving the
/// search box around the incumbent each round.
fn refine_on_simplex(cols: &[&[f64]], p: f64) -> f64 {
    let m = cols.len();
    let free = m - 1;
    let dim = cols[0].len();
    let mut buf = vec![0.0; dim];
    let mut center = vec![1.0 / m as f64; free];
    let mut w = vec![0.0; m];
    let eval = |head: &[f64], w: &mut [f64], buf: &mut [f64]| -> Option<f64> {
        let s: f64 = head.iter().sum();
        if head.iter().any(|&x| x < 0.0) || s > 1.0 {
            return None;
        }
        w[..free].copy_from_slice(head);
        w[free] = 1.0 - s;
        Some(combination_norm(cols, w, p, buf))
    };
    let mut best = eval(&center, &mut w, &mut buf).unwrap();
    let mut radius = 1.0;
    let mut head = vec![0.0; free];
    while radius > REFINE_MIN_RADIUS {
        let step = 2.0 * radius / (REFINE_GRID - 1) as f64;
        let mut incumbent = center.clone();
        let total = REFINE_GRID.pow(free as u32);
        for idx in 0..total {
            let mut rem = idx;
            for (h, c) in head.iter_mut().zip(&center) {
                let g = rem % REFINE_GRID;
                rem /= REFINE_GRID;
                *h = (c - radius + g as f64 * step).clamp(0.0, 1.0);
            }
            if let Some(v) = eval(&head, &mut w, &mut buf) {
                if v < best {
                    best = v;
                    incumbent.copy_from_slice(&head);
                }
            }
        }
        center = incumbent;
        radius *= 0.5;
    }
    best
}

/// Projected gradient with step halving, started from uniform weights.
fn projected_gradient(cols: &[&[f64]], p: f64) -> f64 {
    let m = cols.len();
    let dim = cols[0].len();
    let mut buf = vec![0.0; dim];
    let mut dual = vec![0.0; dim];
    let mut w = vec![1.0 / m as f64; m];
    let mut value = combination_norm(cols, &w, p, &mut buf);
    let mut step = 1.0;
    let mut trial = vec![0.0; m];
    for _ in 0..PG_ITERATIONS {
        if value == 0.0 {
            break;
        }
        combination_norm(cols, &w, p, &mut buf);
        dual_into(&buf, p, &mut dual);
        let grad: Vec<f64> = cols.iter().map(|c| c.iter().zip(&dual).map(|(x, d)| x * d).sum()).collect();
        let mut improved = false;
        while step > 1e-16 {
            for ((t, wi), g) in trial.iter_mut().zip(&w).zip(&grad) {
                *t = wi - step * g;
            }
            project_to_simplex(&mut trial);
            let v = combination_norm(cols, &trial, p, &mut buf);
            if v < value {
                w.copy_from_slice(&trial);
                value = v;
                improved = true;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    value
}

/// Euclidean projection onto the probability simplex.
fn project_to_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// `n` points uniform in the unit `l_p` ball and a random convex target.
///
/// Points use the generalized-Gaussian construction: with `g_i` of density
/// proportional to `exp(-|t|^p)` and `W ~ Exp(1)`, the vector
/// `g / (||g||_p^p + W)^(1/p)` is uniform in the ball. Weights are
/// normalized exponential variates.
pub fn random_instance(dim: usize, n_points: usize, seed: u64, space: &SpaceSpec) -> Result<(PointSet, ConvexTarget)> {
    space.check_dim(dim)?;
    if n_points == 0 {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = space.p();
    let points = (0..n_points)
        .map(|_| Vector::new(sample_unit_ball(&mut rng, dim, p)))
        .collect::<Result<Vec<_>>>()?;
    let set = PointSet::new(points, space)?;
    let raw: Vec<f64> = (0..n_points).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let target = ConvexTarget::from_weights(&set, weights)?;
    Ok((set, target))
}

fn sample_unit_ball<R: Rng>(rng: &mut R, dim: usize, p: f64) -> Vec<f64> {
    if p.is_infinite() {
        return (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
    }
    let gamma = Gamma::new(1.0 / p, 1.0).expect("valid gamma parameters");
    let g: Vec<f64> = (0..dim)
        .map(|_| {
            let magnitude: f64 = gamma.sample(rng);
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * magnitude.powf(1.0 / p)
        })
        .collect();
    let w: f64 = Exp1.sample(rng);
    let sum_p: f64 = g.iter().map(|x| x.abs().powf(p)).sum();
    let scale = (sum_p + w).powf(1.0 / p);
    g.into_iter().map(|x| x / scale).collect()
}
