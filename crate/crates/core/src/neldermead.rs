//! Deterministic Nelder-Mead simplex minimizer.

pub(crate) struct Options {
    pub max_iterations: usize,
    /// Converged once `f_max - f_min <= abs_tol + rel_tol * |f_min|` over the simplex.
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Initial simplex edge along each coordinate.
    pub step: f64,
    pub restarts: usize,
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(f: F, start: &[f64], opts: &Options) -> Outcome {
    let mut best = start.to_vec();
    let mut best_value = f(&best);
    let mut total = 0;
    let mut converged = false;
    for _ in 0..=opts.restarts {
        let (x, value, iters, ok) = run(&f, &best, opts, opts.max_iterations.saturating_sub(total));
        total += iters;
        let improved = value < best_value;
        if value <= best_value {
            best = x;
            best_value = value;
        }
        converged = ok;
        if !ok || !improved {
            break;
        }
    }
    Outcome {
        x: best,
        value: best_value,
        iterations: total,
        converged,
    }
}

fn run<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    opts: &Options,
    budget: usize,
) -> (Vec<f64>, f64, usize, bool) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += opts.step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        if spread <= opts.abs_tol + opts.rel_tol * values[0].abs() {
            return (simplex.swap_remove(0), values[0], iterations, true);
        }
        if iterations >= budget {
            return (simplex.swap_remove(0), values[0], iterations, false);
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let c = along(-0.5);
            let fc = f(&c);
            (c, fc)
        } else {
            let c = along(0.5);
            let fc = f(&c);
            (c, fc)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..=n {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            values[i] = f(&shrunk);
            simplex[i] = shrunk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(
            f,
            &[-1.2, 1.0],
            &Options {
                max_iterations: 10_000,
                abs_tol: 1e-20,
                rel_tol: 1e-14,
                step: 0.5,
                restarts: 3,
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6);
    }
}
