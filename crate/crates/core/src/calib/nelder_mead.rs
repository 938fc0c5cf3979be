//! Nelder-Mead on a box, with reflection at the walls.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when every vertex is within this distance (max norm) of the best.
    pub tol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 200,
            tol: 1e-3,
        }
    }
}

/// Mirrors `x` into `[lo, hi]`.
pub fn reflect_into(x: f64, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let mut y = x;
    // A couple of bounces cover any step of at most two box widths.
    for _ in 0..4 {
        if y < lo {
            y = 2.0 * lo - y;
        } else if y > hi {
            y = 2.0 * hi - y;
        } else {
            return y;
        }
    }
    y.clamp(lo, hi)
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = reflect_into(*v, lo, hi);
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `start` with initial edge lengths `steps`.
/// Non-finite values count as `+inf`.
pub fn minimize<F>(mut f: F, start: &[f64], steps: &[f64], bounds: &[(f64, f64)], opts: NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut x0 = start.to_vec();
    project(&mut x0, bounds);
    let mut simplex = vec![x0.clone()];
    for i in 0..n {
        let mut v = x0.clone();
        let (lo, hi) = bounds[i];
        // Step inward if the outward step would leave the box.
        v[i] = if v[i] + steps[i] <= hi {
            v[i] + steps[i]
        } else {
            (v[i] - steps[i]).max(lo)
        };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut trace = Vec::new();
    let mut iter = 0;
    let mut converged = false;
    loop {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = idx.iter().map(|&k| simplex[k].clone()).collect();
        values = idx.iter().map(|&k| values[k]).collect();
        let d = diameter(&simplex);
        trace.push(TraceEntry {
            iteration: iter,
            best_value: values[0],
            best_point: simplex[0].clone(),
            diameter: d,
        });
        if d < opts.tol {
            converged = true;
            break;
        }
        if iter >= opts.max_iter {
            break;
        }
        iter += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let along = |t: f64| {
            let mut p: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
            project(&mut p, bounds);
            p
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[n] {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = xc;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for k in 1..=n {
            let mut p: Vec<f64> = best.iter().zip(&simplex[k]).map(|(b, v)| b + 0.5 * (v - b)).collect();
            project(&mut p, bounds);
            values[k] = eval(&p, &mut evals);
            simplex[k] = p;
        }
    }
    Minimum {
        point: simplex[0].clone(),
        value: values[0],
        iterations: iter,
        evaluations: evals,
        converged,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection() {
        assert_eq!(reflect_into(0.5, 0.0, 1.0), 0.5);
        assert!((reflect_into(-0.2, 0.0, 1.0) - 0.2).abs() < 1e-15);
        assert!((reflect_into(1.3, 0.0, 1.0) - 0.7).abs() < 1e-15);
        assert_eq!(reflect_into(9.0, 2.0, 2.0), 2.0);
        let y = reflect_into(1e9, 0.0, 1.0);
        assert!((0.0..=1.0).contains(&y));
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(
            f,
            &[-1.2, 1.0],
            &[0.1, 0.1],
            &[(-5.0, 5.0), (-5.0, 5.0)],
            NelderMeadOptions {
                max_iter: 2000,
                tol: 1e-8,
            },
        );
        assert!(m.converged);
        assert!(
            (m.point[0] - 1.0).abs() < 1e-4 && (m.point[1] - 1.0).abs() < 1e-4,
            "{:?}",
            m.point
        );
        assert!(m.trace.windows(2).all(|w| w[1].best_value <= w[0].best_value));
    }

    #[test]
    fn optimum_on_the_boundary() {
        // Unconstrained minimum at (-1, 2) lies outside x >= 0.
        let f = |x: &[f64]| (x[0] + 1.0).powi(2) + (x[1] - 2.0).powi(2);
        let m = minimize(
            f,
            &[1.0, 1.0],
            &[0.2, 0.2],
            &[(0.0, 3.0), (0.0, 3.0)],
            NelderMeadOptions {
                max_iter: 500,
                tol: 1e-7,
            },
        );
        assert!(m.point[0] >= 0.0 && m.point[0] < 1e-5, "{:?}", m.point);
        assert!((m.point[1] - 2.0).abs() < 1e-5);
    }

    #[test]
    fn iteration_cap_and_nan() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { (x[0] - 0.3).powi(2) };
        let m = minimize(
            f,
            &[0.0],
            &[0.1],
            &[(0.0, 1.0)],
            NelderMeadOptions { max_iter: 3, tol: 0.0 },
        );
        assert_eq!(m.iterations, 3);
        assert!(!m.converged);
        assert!(m.value.is_finite());
    }
}
