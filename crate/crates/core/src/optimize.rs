//! Derivative-free minimization by the Nelder–Mead simplex method.

use serde::Serialize;

use crate::ext::ser_f64;

/// Controls for [`nelder_mead`].
#[derive(Clone, Debug)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once every vertex is within this ∞-distance of the best one.
    pub diameter_tol: f64,
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evals: 2000,
            diameter_tol: 1e-8,
            initial_step: 1.0,
        }
    }
}

/// One iteration of the simplex method.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    /// Best function value so far.
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub diameter: f64,
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

/// Orders by value, then lexicographically by point; NaN sorts last.
fn vertex_cmp(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1).then_with(|| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(v, _)| v.iter().zip(best).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

/// Minimizes `f` from `x0` with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). `+inf` values are allowed and
/// behave as a barrier.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadResult {
    let dim = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let v0 = eval(x0, &mut evals);
    if dim == 0 {
        return NelderMeadResult {
            x: Vec::new(),
            value: v0,
            evals,
            converged: true,
            trace: vec![TraceRow {
                iteration: 0,
                value: v0,
                diameter: 0.0,
            }],
        };
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), v0)];
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    let mut trace = Vec::new();
    let mut iteration = 0usize;
    let mut converged = false;
    loop {
        simplex.sort_by(vertex_cmp);
        let diam = diameter(&simplex);
        trace.push(TraceRow {
            iteration,
            value: simplex[0].1,
            diameter: diam,
        });
        if diam < opts.diameter_tol {
            converged = true;
            break;
        }
        if evals >= opts.max_evals {
            break;
        }
        iteration += 1;
        let worst = simplex[dim].1;
        let second = simplex[dim - 1].1;
        let best = simplex[0].1;
        let mut centroid = vec![0.0; dim];
        for (v, _) in &simplex[..dim] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < second {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst {
            let x = along(0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = along(-0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < worst.min(fr) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = anchor
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        evals,
        converged,
        trace,
    }
}
