//! Derivative-free minimization by the Nelder-Mead simplex.

/// Simplex coefficients and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Converged once every vertex lies within this distance of the best one.
    pub diameter_tol: f64,
    pub max_iter: usize,
    /// Offset of the initial vertices along each axis.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            diameter_tol: 1e-8,
            max_iter: 5000,
            initial_step: 0.5,
        }
    }
}

/// Result of one simplex run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

impl NelderMead {
    /// Minimizes `f` from `x0`. NaN values count as `+inf`, so infeasible
    /// points can be signalled by returning either.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64]) -> Minimum {
        let d = x0.len();
        let mut evaluations = 0;
        let mut eval = |x: &[f64]| {
            evaluations += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        if d == 0 {
            let value = eval(x0);
            return Minimum {
                x: vec![],
                value,
                iterations: 0,
                evaluations: 1,
                converged: true,
            };
        }
        let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
        for i in 0..d {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
        let mut iterations = 0;
        let mut converged = false;

        while iterations < self.max_iter {
            let mut order: Vec<usize> = (0..=d).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();
            if values[0].is_finite() && diameter(&simplex) < self.diameter_tol {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; d];
            for v in &simplex[..d] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / d as f64;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[d])
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let xr = along(self.reflection);
            let fr = eval(&xr);
            if fr < values[0] {
                let xe = along(self.reflection * self.expansion);
                let fe = eval(&xe);
                if fe < fr {
                    simplex[d] = xe;
                    values[d] = fe;
                } else {
                    simplex[d] = xr;
                    values[d] = fr;
                }
                continue;
            }
            if fr < values[d - 1] {
                simplex[d] = xr;
                values[d] = fr;
                continue;
            }
            // outside contraction when the reflection improved on the worst vertex
            let xc = if fr < values[d] {
                along(self.reflection * self.contraction)
            } else {
                along(-self.contraction)
            };
            let fc = eval(&xc);
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
                continue;
            }
            for i in 1..=d {
                let shrunk: Vec<f64> = simplex[0]
                    .iter()
                    .zip(&simplex[i])
                    .map(|(b, x)| b + self.shrink * (x - b))
                    .collect();
                values[i] = eval(&shrunk);
                simplex[i] = shrunk;
            }
        }
        let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            iterations,
            evaluations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = NelderMead::default().minimize(f, &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.1).powi(2) };
        let m = NelderMead::default().minimize(f, &[2.0]);
        assert!(m.converged && (m.x[0] - 0.1).abs() < 1e-8);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let opts = NelderMead {
            max_iter: 3,
            ..Default::default()
        };
        let m = opts.minimize(|x: &[f64]| x[0] * x[0] + x[1] * x[1], &[5.0, 5.0]);
        assert!(!m.converged);
        assert!(m.value < 50.0);
    }
}
