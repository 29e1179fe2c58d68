//! Downhill simplex minimisation.

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimplexOptions {
    pub max_evals: usize,
    pub initial_step: f64,
    pub f_tol: f64,
    pub x_tol: f64,
}

pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Minimises `objective` from `x0`. Non-finite objective values are treated as
/// `+inf`, so the simplex moves away from them.
pub(crate) fn minimize<F>(mut objective: F, x0: &[f64], opts: &SimplexOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = objective(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();

    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if evals >= opts.max_evals {
            break;
        }
        let spread = values[worst] - values[best];
        let size = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.is_finite() && spread <= opts.f_tol && size <= opts.x_tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&simplex[i]) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let f_r = eval(&reflected, &mut evals);
        if f_r < values[best] {
            let expanded = along(-2.0);
            let f_e = eval(&expanded, &mut evals);
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[worst] {
            let c = along(-0.5);
            let f = eval(&c, &mut evals);
            (c, f)
        } else {
            let c = along(0.5);
            let f = eval(&c, &mut evals);
            (c, f)
        };
        if f_c < values[worst].min(f_r) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            for (v, a) in simplex[i].iter_mut().zip(&anchor) {
                *v = a + 0.5 * (*v - a);
            }
            values[i] = eval(&simplex[i], &mut evals);
        }
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
    }
}
