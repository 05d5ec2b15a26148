//! Maximization of even functions on the unit sphere: a hemisphere
//! Fibonacci-lattice scan followed by Nelder-Mead refinement in local
//! tangent coordinates around the best lattice points.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{check_epsilon, objective_value, MeasurementDirection};
use crate::canonical::CanonicalState;
use crate::error::{Error, Result};
use crate::sampling::stream_rng;
use crate::vec3::{add, norm, orthonormal_frame, scale, Vec3};

pub const DEFAULT_GRID_POINTS: usize = 1 << 14;
const MIN_GRID_POINTS: usize = 1000;
const TIE_TOL: f64 = 1e-12;
const MAX_SEEDS: usize = 8;
/// Lattice points this far below the best cannot hide the global maximum.
const SEED_WINDOW: f64 = 1e-2;
const SEED_SEPARATION_COS: f64 = 0.98;
const MAX_SIMPLEX_ITERATIONS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    pub grid_points: usize,
    /// Simplex diameter (radians, in tangent coordinates) at which refinement stops.
    pub refine_tol: f64,
    /// Non-zero seeds apply a random rotation to the lattice.
    pub seed: u64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { grid_points: DEFAULT_GRID_POINTS, refine_tol: 1e-10, seed: 0 }
    }
}

impl MaximizeOptions {
    pub fn with_grid_points(grid_points: usize) -> Self {
        Self { grid_points, ..Self::default() }
    }
}

type Rotation = [[f64; 3]; 3];

fn lattice_rotation(seed: u64) -> Option<Rotation> {
    if seed == 0 {
        return None;
    }
    let mut rng = stream_rng(seed, 0);
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
    let n = (q.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    Some([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ])
}

fn rotate(r: &Rotation, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2])
}

/// `n` points of the upper-hemisphere Fibonacci lattice.
fn hemisphere_lattice(n: usize, rotation: Option<&Rotation>) -> Vec<Vec3> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden_angle * i as f64;
            let p = [r * phi.cos(), r * phi.sin(), z];
            match rotation {
                Some(rot) => rotate(rot, &p),
                None => p,
            }
        })
        .collect()
}

/// Picks the representative of `{x, -x}` with a positive leading non-zero
/// coordinate, scanning z, y, x.
fn orient(x: Vec3) -> Vec3 {
    let flip = if x[2] != 0.0 {
        x[2] < 0.0
    } else if x[1] != 0.0 {
        x[1] < 0.0
    } else {
        x[0] < 0.0
    };
    if flip {
        scale(&x, -1.0)
    } else {
        x
    }
}

fn lex_less(u: &Vec3, v: &Vec3) -> bool {
    u.iter().zip(v).find(|(a, b)| a != b).is_some_and(|(a, b)| a < b)
}

/// Best of `candidates`, preferring the lexicographically smallest direction
/// among values within `TIE_TOL` of the maximum.
fn select_best(candidates: &[(f64, Vec3)]) -> (f64, Vec3) {
    let top = candidates.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<(f64, Vec3)> = None;
    for &(v, x) in candidates {
        if v < top - TIE_TOL {
            continue;
        }
        match best {
            Some((_, bx)) if !lex_less(&x, &bx) => {}
            _ => best = Some((v, x)),
        }
    }
    best.expect("at least one candidate")
}

fn simplex_refine<F>(f: &F, seed: Vec3, step: f64, tol: f64) -> (f64, Vec3)
where
    F: Fn(&Vec3) -> f64,
{
    let (e1, e2) = orthonormal_frame(&seed);
    let point = |p: &[f64; 2]| -> Vec3 {
        let v = add(&add(&seed, &scale(&e1, p[0])), &scale(&e2, p[1]));
        scale(&v, 1.0 / norm(&v))
    };
    // Minimize the negated objective.
    let cost = |p: &[f64; 2]| -f(&point(p));

    let mut simplex: [([f64; 2], f64); 3] = [[0.0, 0.0], [step, 0.0], [0.0, step]].map(|p| (p, cost(&p)));
    let lerp = |a: &[f64; 2], b: &[f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];

    for _ in 0..MAX_SIMPLEX_ITERATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| ((p[0] - best[0]).powi(2) + (p[1] - best[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diameter < tol {
            break;
        }
        let centroid = lerp(&simplex[0].0, &simplex[1].0, 0.5);
        let worst = simplex[2];
        let reflected = lerp(&centroid, &worst.0, -1.0);
        let fr = cost(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst.0, -2.0);
            let fe = cost(&expanded);
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let p = lerp(&centroid, &reflected, 0.5);
            (p, cost(&p))
        } else {
            let p = lerp(&centroid, &worst.0, 0.5);
            (p, cost(&p))
        };
        if fc < worst.1.min(fr) {
            simplex[2] = (contracted, fc);
            continue;
        }
        for k in 1..3 {
            let p = lerp(&best, &simplex[k].0, 0.5);
            simplex[k] = (p, cost(&p));
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (-simplex[0].1, orient(point(&simplex[0].0)))
}

/// Maximizes an even function `f(x) = f(-x)` over unit vectors.
pub fn maximize_on_sphere<F>(f: F, opts: &MaximizeOptions) -> Result<(f64, MeasurementDirection)>
where
    F: Fn(&Vec3) -> f64 + Sync,
{
    if opts.grid_points < MIN_GRID_POINTS {
        return Err(Error::InvalidParameter(format!(
            "grid_points must be at least {MIN_GRID_POINTS}, got {}",
            opts.grid_points
        )));
    }
    if !(opts.refine_tol > 0.0) {
        return Err(Error::InvalidParameter("refine_tol must be positive".into()));
    }
    let rotation = lattice_rotation(opts.seed);
    let lattice: Vec<Vec3> = hemisphere_lattice(opts.grid_points, rotation.as_ref()).into_iter().map(orient).collect();
    let values: Vec<f64> = lattice.par_iter().map(|x| f(x)).collect();

    let scored: Vec<(f64, Vec3)> = values.iter().copied().zip(lattice.iter().copied()).collect();
    let first = select_best(&scored);
    let mut order: Vec<usize> = (0..lattice.len()).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));

    let mut seeds = vec![first.1];
    for &i in &order {
        if seeds.len() >= MAX_SEEDS || values[i] < first.0 - SEED_WINDOW {
            break;
        }
        let x = lattice[i];
        if seeds.iter().all(|s| crate::vec3::dot(s, &x).abs() < SEED_SEPARATION_COS) {
            seeds.push(x);
        }
    }

    let step = 2.0 * (2.0 * std::f64::consts::PI / opts.grid_points as f64).sqrt();
    let mut refined: Vec<(f64, Vec3)> =
        seeds.iter().map(|s| simplex_refine(&f, *s, step, opts.refine_tol)).collect();
    refined.push(first);
    let (value, x) = select_best(&refined);
    Ok((value, MeasurementDirection::new_unchecked(x)))
}

/// `max_x` of the projective objective and its maximizer.
pub fn maximize_objective(
    c: &CanonicalState,
    epsilon: f64,
    opts: &MaximizeOptions,
) -> Result<(f64, MeasurementDirection)> {
    check_epsilon(epsilon)?;
    maximize_on_sphere(|x| objective_value(c, epsilon, x), opts)
}
