//! Unconstrained minimizers used by the estimators: BFGS with a backtracking
//! Armijo line search, and a Nelder-Mead simplex search for when the gradient
//! path stalls.

use crate::scalar::{dot, max_abs, Scalar};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    pub max_iterations: usize,
    /// Converged when ‖∇f‖∞ < gradient · max(1, |f|).
    pub gradient: f64,
    /// Converged when an accepted step has ‖Δx‖∞ below this.
    pub step: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
    pub used_simplex: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
/// Largest coordinate move per iteration.
const MAX_STEP: f64 = 2.0;

fn gradient_small<T: Scalar>(g: &[T], f: T, tol: f64) -> bool {
    max_abs(g) < T::lit(tol) * T::one().max(f.abs())
}

/// BFGS on the inverse Hessian. Falls back to Nelder-Mead when no descent
/// step can be found, then polishes the simplex result with BFGS again.
pub(crate) fn minimize<T, F>(objective: F, x0: Vec<T>, tol: Tolerances) -> Outcome<T>
where
    T: Scalar,
    F: Fn(&[T]) -> (T, Vec<T>),
{
    let first = bfgs(&objective, x0, tol);
    if first.converged || first.x.is_empty() {
        return first;
    }
    let value_only = |x: &[T]| objective(x).0;
    let (x, value, nm_iters) = nelder_mead(&value_only, &first.x, first.value, tol);
    let mut polished = bfgs(&objective, x.clone(), tol);
    let mut iterations = first.iterations + nm_iters + polished.iterations;
    if polished.value > value {
        // Keep the simplex point if polishing went astray.
        polished.x = x;
        polished.value = value;
        let (_, g) = objective(&polished.x);
        polished.converged = gradient_small(&g, value, tol.gradient);
        iterations += 1;
    }
    polished.iterations = iterations;
    polished.used_simplex = true;
    if first.value < polished.value {
        return Outcome {
            used_simplex: true,
            iterations,
            ..first
        };
    }
    polished
}

fn bfgs<T, F>(objective: &F, mut x: Vec<T>, tol: Tolerances) -> Outcome<T>
where
    T: Scalar,
    F: Fn(&[T]) -> (T, Vec<T>),
{
    let n = x.len();
    let (mut f, mut g) = objective(&x);
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = n == 0;
    while !converged && iterations < tol.max_iterations {
        if gradient_small(&g, f, tol.gradient) {
            converged = true;
            break;
        }
        iterations += 1;
        let mut d = neg_mat_vec(&h, &g);
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            h = identity(n);
            fresh = true;
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
        }
        let longest = max_abs(&d);
        if longest > T::lit(MAX_STEP) {
            let s = T::lit(MAX_STEP) / longest;
            d.iter_mut().for_each(|v| *v *= s);
            slope *= s;
        }
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<T> = x.iter().zip(&d).map(|(&xi, &di)| xi + step * di).collect();
            let (ft, gt) = objective(&trial);
            if ft.is_finite() && ft <= f + T::lit(ARMIJO_C1) * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= T::lit(0.5);
        }
        let Some((trial, ft, gt)) = accepted else {
            if fresh {
                // Steepest descent failed too: stalled.
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<T> = trial.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gt.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        // A short step only signals convergence when the line search did not
        // have to cut it down.
        let small_step = max_abs(&s) < T::lit(tol.step) && step >= T::lit(0.5);
        x = trial;
        f = ft;
        g = gt;
        if small_step {
            converged = true;
            break;
        }
        if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity(n);
                h.iter_mut().flatten().for_each(|v| *v *= scale);
                fresh = false;
            }
            bfgs_update(&mut h, &s, &y, sy);
        }
    }
    if !converged {
        converged = gradient_small(&g, f, tol.gradient);
    }
    Outcome {
        x,
        value: f,
        iterations,
        converged,
        used_simplex: false,
    }
}

fn identity<T: Scalar>(n: usize) -> Vec<Vec<T>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect()
}

fn neg_mat_vec<T: Scalar>(h: &[Vec<T>], g: &[T]) -> Vec<T> {
    h.iter().map(|row| -dot(row, g)).collect()
}

/// H ← (I − ρsy')H(I − ρys') + ρss', ρ = 1/(s'y).
fn bfgs_update<T: Scalar>(h: &mut [Vec<T>], s: &[T], y: &[T], sy: T) {
    let n = s.len();
    let rho = T::one() / sy;
    let hy: Vec<T> = h.iter().map(|row| dot(row, y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Nelder-Mead with the standard coefficients (1, 2, 0.5, 0.5).
fn nelder_mead<T, F>(f: &F, x0: &[T], f0: T, tol: Tolerances) -> (Vec<T>, T, usize)
where
    T: Scalar,
    F: Fn(&[T]) -> T,
{
    let n = x0.len();
    let half = T::lit(0.5);
    let mut simplex: Vec<(Vec<T>, T)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += T::lit(0.25);
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<T>, T)>| {
        s.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Greater));
    };
    let mut iters = 0;
    while iters < tol.max_iterations {
        iters += 1;
        order(&mut simplex);
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let spread = (worst - best).abs();
        let size = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(&simplex[0].0).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs())))
            .fold(T::zero(), T::max);
        if spread <= T::lit(1e-15) * (T::one() + best.abs()) && size < T::lit(tol.step.max(1e-12)) {
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|j| simplex[..n].iter().map(|(v, _)| v[j]).sum::<T>() / T::from_count(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let xr = along(T::one());
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(T::lit(2.0));
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(half);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(-half);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < fr.min(worst) {
                simplex[n] = (xc, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for (v, fv) in simplex.iter_mut().skip(1) {
                    for (x, &a) in v.iter_mut().zip(&anchor) {
                        *x = a + half * (*x - a);
                    }
                    *fv = f(v);
                }
            }
        }
    }
    order(&mut simplex);
    let (x, v) = simplex.swap_remove(0);
    (x, v, iters)
}
