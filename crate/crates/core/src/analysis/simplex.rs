//! Derivative-free Nelder–Mead minimization.

/// Result of a simplex run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Stopping rules for [`minimize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexOptions {
    /// Initial edge length along each coordinate.
    pub step: f64,
    /// Stop once every vertex lies within this distance of the best one.
    pub diameter: f64,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            step: 0.1,
            diameter: 1e-6,
            max_iterations: 20_000,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Minimizes `f` from `x0`. Deterministic: the same inputs give the same
/// sequence of evaluations.
pub fn minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], options: SimplexOptions) -> SimplexResult {
    let n = x0.len();
    if n == 0 {
        return SimplexResult {
            point: Vec::new(),
            value: f(x0),
            iterations: 0,
            converged: true,
        };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += options.step;
        let v = f(&x);
        simplex.push((x, v));
    }

    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal)))
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        order(&mut simplex);
        let best = simplex[0].0.clone();
        if simplex.iter().all(|(x, _)| distance(x, &best) < options.diameter) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let (worst, worst_value) = simplex[n].clone();
        let second_worst = simplex[n - 1].1;

        let reflected = lerp(&centroid, &worst, -REFLECT);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(&centroid, &worst, -EXPAND);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second_worst {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst_value {
            let c = lerp(&centroid, &reflected, CONTRACT);
            let v = f(&c);
            (c, v)
        } else {
            let c = lerp(&centroid, &worst, CONTRACT);
            let v = f(&c);
            (c, v)
        };
        if fc < worst_value.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(&anchor, &vertex.0, SHRINK);
            let v = f(&x);
            *vertex = (x, v);
        }
    }
    order(&mut simplex);
    let (point, value) = simplex.swap_remove(0);
    SimplexResult {
        point,
        value,
        iterations,
        converged,
    }
}
