//! Nelder–Mead simplex minimiser.
//!
//! Non-finite objective values are treated as `+inf`, so hard constraints can
//! be expressed as infinite penalties.

/// Simplex search configuration.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once every vertex lies within this (sup-norm) distance of the best one.
    pub diameter_tol: f64,
    pub max_iter: usize,
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            diameter_tol: 1e-8,
            max_iter: 5000,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl NelderMead {
    pub fn minimize<F>(&self, mut f: F, start: &[f64]) -> SimplexOutcome
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = start.len();
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut vertices: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        vertices.push(start.to_vec());
        for i in 0..dim {
            let mut v = start.to_vec();
            v[i] += self.initial_step;
            vertices.push(v);
        }
        let mut values: Vec<f64> = vertices.iter().map(|v| eval(v)).collect();

        let mut iterations = 0;
        let mut converged = false;
        let mut centroid = vec![0.0; dim];
        let mut trial = vec![0.0; dim];
        let mut trial2 = vec![0.0; dim];

        while iterations < self.max_iter {
            // order vertices by value (stable, deterministic)
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            vertices = order.iter().map(|&i| vertices[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let diameter = vertices[1..]
                .iter()
                .flat_map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter < self.diameter_tol && values[0].is_finite() {
                converged = true;
                break;
            }
            iterations += 1;

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for v in &vertices[..dim] {
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x / dim as f64;
                }
            }
            let worst = dim;
            for j in 0..dim {
                trial[j] = centroid[j] + (centroid[j] - vertices[worst][j]);
            }
            let f_reflect = eval(&trial);

            if f_reflect < values[0] {
                for j in 0..dim {
                    trial2[j] = centroid[j] + 2.0 * (centroid[j] - vertices[worst][j]);
                }
                let f_expand = eval(&trial2);
                if f_expand < f_reflect {
                    vertices[worst].copy_from_slice(&trial2);
                    values[worst] = f_expand;
                } else {
                    vertices[worst].copy_from_slice(&trial);
                    values[worst] = f_reflect;
                }
                continue;
            }
            if f_reflect < values[dim - 1] {
                vertices[worst].copy_from_slice(&trial);
                values[worst] = f_reflect;
                continue;
            }
            // contraction, outside if the reflection improved on the worst vertex
            let outside = f_reflect < values[worst];
            for j in 0..dim {
                trial2[j] = if outside {
                    centroid[j] + 0.5 * (trial[j] - centroid[j])
                } else {
                    centroid[j] + 0.5 * (vertices[worst][j] - centroid[j])
                };
            }
            let f_contract = eval(&trial2);
            let accept = if outside {
                f_contract <= f_reflect
            } else {
                f_contract < values[worst]
            };
            if accept {
                vertices[worst].copy_from_slice(&trial2);
                values[worst] = f_contract;
                continue;
            }
            // shrink towards the best vertex
            let best = vertices[0].clone();
            for i in 1..=dim {
                for j in 0..dim {
                    vertices[i][j] = best[j] + 0.5 * (vertices[i][j] - best[j]);
                }
                values[i] = eval(&vertices[i]);
            }
        }

        let (best_idx, _) = values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("simplex has at least one vertex");
        SimplexOutcome {
            point: vertices[best_idx].clone(),
            value: values[best_idx],
            iterations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            diameter_tol: 1e-10,
            max_iter: 20_000,
            initial_step: 0.5,
        };
        let out = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
        );
        assert!(out.converged);
        assert!((out.point[0] - 1.0).abs() < 1e-6);
        assert!((out.point[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infinite_penalty_region_is_avoided() {
        let nm = NelderMead::default();
        let out = nm.minimize(
            |x| if x[0] < 0.5 { f64::INFINITY } else { (x[0] - 0.2).powi(2) },
            &[1.0],
        );
        assert!(out.converged);
        assert!((out.point[0] - 0.5).abs() < 1e-6);
    }
}
