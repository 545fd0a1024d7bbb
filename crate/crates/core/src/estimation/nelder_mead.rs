//! Nelder–Mead simplex minimization (reflection 1, expansion 2, contraction
//! 0.5, shrink 0.5).

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub evaluations: usize,
}

/// Minimizes `f` from `x0`, with the initial simplex offset by `steps` along
/// each axis. Stops when max − min over the simplex falls below `tol` or after
/// `max_iter` iterations. Non-finite values are treated as +∞.
pub fn minimize<F>(f: F, x0: &[f64], steps: &[f64], tol: f64, max_iter: usize) -> Minimum
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evaluations = 0usize;
    let eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evaluations)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    let mut converged = false;
    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        if best.is_finite() && worst - best < tol {
            converged = true;
            break;
        }

        let centroid: Vec<f64> =
            (0..dim).map(|j| simplex[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[dim].0).map(|(c, w)| c + t * (w - c)).collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < best {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evaluations);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let x = along(-0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x, &mut evaluations);
            (x, v)
        };
        if fc < worst.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + 0.5 * (*xi - bi);
            }
            *v = eval(x, &mut evaluations);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, converged, evaluations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], 1e-14, 5000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3, "{:?}", m.x);
    }

    #[test]
    fn infinite_region_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::INFINITY } else { (x[0] - 0.3).powi(2) + x[1] * x[1] };
        let m = minimize(f, &[0.05, 0.5], &[0.1, 0.1], 1e-14, 2000);
        assert!((m.x[0] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let m = minimize(f, &[3.0, -2.0, 1.0], &[0.1; 3], 1e-300, 5);
        assert!(!m.converged);
        assert!(m.value < 14.0);
    }
}
