//! L1-regularized logistic regression over run-endpoint inclusion pairs.
//!
//! Every run shares the same endpoint feature rows, so the pair-level data
//! collapses to per-endpoint counts: `k_m` selections out of `n_m` runs.
//! The minimized objective is
//!
//! ```text
//! F(b, w) = (1/N) * sum_m [ n_m * softplus(z_m) - k_m * z_m ] + ||w||_1 / (R * N)
//! z_m     = b + sum_j w_j * psi_j(m)
//! ```
//!
//! with `N = sum_m n_m` the number of pairs. This is the summed log-loss
//! plus `(1/R) * ||w||_1`, rescaled by `1/N`, so larger `R` means weaker
//! regularization. The intercept is not penalized.
//!
//! The solver is a proximal Newton method: a weighted quadratic model of
//! the loss is minimized by cyclic coordinate descent with soft
//! thresholding, followed by a backtracking line search on `F`.
//! Identical predicate columns are fitted as a single column and their
//! weight is split equally, which is the minimum-norm point of the
//! (otherwise non-unique) L1 optimum.

use crate::scalar::{cast, logistic, softplus, Real};

use super::library::PredicateLibrary;
use super::runs::RunMatrix;
use super::PriorError;

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Stop when every KKT residual is below this.
    pub kkt_tolerance: f64,
    /// Stop when one Newton step improves `F` by less than this.
    pub objective_tolerance: f64,
    pub max_newton_steps: usize,
    pub max_sweeps: usize,
    /// Intercept used for all-negative data; its negation for all-positive.
    pub intercept_floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            kkt_tolerance: 1e-9,
            objective_tolerance: 1e-12,
            max_newton_steps: 200,
            max_sweeps: 1000,
            intercept_floor: -30.0,
        }
    }
}

/// Intercept and clause weights of `Pr(x = 1) = sigmoid(b + psi . w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorModel<T> {
    pub intercept: T,
    pub weights: Vec<T>,
    pub reg_strength: T,
    pub names: Vec<String>,
    /// Final value of the objective `F`.
    pub objective: T,
    pub newton_steps: usize,
}

impl<T: Real> PriorModel<T> {
    /// A model with the given parameters, e.g. a planted ground truth.
    pub fn planted(intercept: T, weights: Vec<T>, names: Vec<String>) -> Self {
        PriorModel {
            intercept,
            weights,
            reg_strength: T::infinity(),
            names,
            objective: T::nan(),
            newton_steps: 0,
        }
    }

    pub fn nonzero(&self) -> usize {
        self.weights.iter().filter(|w| **w != T::zero()).count()
    }

    pub fn weight(&self, name: &str) -> Option<T> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.weights[j])
    }

    /// `b + sum_j w_j psi_j(m)` for every endpoint.
    pub fn linear_predictor(&self, lib: &PredicateLibrary) -> Vec<T> {
        (0..lib.endpoints())
            .map(|m| {
                lib.row(m)
                    .iter()
                    .zip(&self.weights)
                    .filter(|(f, _)| **f)
                    .fold(self.intercept, |acc, (_, w)| acc + *w)
            })
            .collect()
    }

    /// Predicted inclusion probability per endpoint.
    pub fn probabilities(&self, lib: &PredicateLibrary) -> Vec<T> {
        self.linear_predictor(lib).into_iter().map(logistic).collect()
    }
}

/// Feature columns with identical columns merged and never-true columns
/// dropped.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    rows: usize,
    /// Rows where each merged column is 1.
    columns: Vec<Vec<usize>>,
    /// Original predicate indices behind each merged column.
    groups: Vec<Vec<usize>>,
    predicates: usize,
}

impl Design {
    pub(crate) fn new(lib: &PredicateLibrary) -> Self {
        let mut columns: Vec<Vec<usize>> = Vec::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for j in 0..lib.len() {
            let support: Vec<usize> = (0..lib.endpoints()).filter(|&m| lib.feature(m, j)).collect();
            if support.is_empty() {
                continue;
            }
            match columns.iter().position(|c| *c == support) {
                Some(u) => groups[u].push(j),
                None => {
                    columns.push(support);
                    groups.push(vec![j]);
                }
            }
        }
        Design {
            rows: lib.endpoints(),
            columns,
            groups,
            predicates: lib.len(),
        }
    }

    fn expand<T: Real>(&self, merged: &[T]) -> Vec<T> {
        let mut w = vec![T::zero(); self.predicates];
        for (group, value) in self.groups.iter().zip(merged) {
            let share = *value / cast::<T>(group.len() as f64);
            for &j in group {
                w[j] = share;
            }
        }
        w
    }

    fn predictor<T: Real>(&self, b: T, w: &[T], z: &mut [T]) {
        z.iter_mut().for_each(|v| *v = b);
        for (col, wj) in self.columns.iter().zip(w) {
            if *wj != T::zero() {
                for &m in col {
                    z[m] = z[m] + *wj;
                }
            }
        }
    }
}

struct Problem<'a, T> {
    k: &'a [T],
    n: &'a [T],
    inv_n: T,
    penalty: T,
}

impl<T: Real> Problem<'_, T> {
    fn objective(&self, w: &[T], z: &[T]) -> T {
        let loss = z
            .iter()
            .zip(self.k.iter().zip(self.n))
            .fold(T::zero(), |acc, (z, (k, n))| acc + *n * softplus(*z) - *k * *z);
        loss * self.inv_n + self.penalty * l1(w)
    }
}

fn l1<T: Real>(w: &[T]) -> T {
    w.iter().fold(T::zero(), |acc, v| acc + v.abs())
}

fn soft_threshold<T: Real>(x: T, t: T) -> T {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        T::zero()
    }
}

pub(crate) struct Fitted<T> {
    pub intercept: T,
    pub weights: Vec<T>,
    pub objective: T,
    pub newton_steps: usize,
}

/// Fits per-endpoint counts: `k[m]` selections out of `n[m]` runs.
pub(crate) fn fit_counts<T: Real>(
    design: &Design,
    k: &[T],
    n: &[T],
    reg_strength: T,
    opts: &FitOptions,
) -> Result<Fitted<T>, PriorError> {
    if !(reg_strength > T::zero()) || !reg_strength.is_finite() {
        return Err(PriorError::InvalidArgument(format!(
            "regularization strength must be positive and finite, got {reg_strength:?}"
        )));
    }
    let rows = design.rows;
    let total_n = n.iter().fold(T::zero(), |a, v| a + *v);
    let total_k = k.iter().fold(T::zero(), |a, v| a + *v);
    if !(total_n > T::zero()) {
        return Err(PriorError::NoRuns);
    }
    let inv_n = T::one() / total_n;
    let problem = Problem {
        k,
        n,
        inv_n,
        penalty: inv_n / reg_strength,
    };
    let width = design.columns.len();
    let mut w = vec![T::zero(); width];
    let mut z = vec![T::zero(); rows];

    let floor: T = cast(opts.intercept_floor);
    if total_k == T::zero() || total_k == total_n {
        let b = if total_k == T::zero() { floor } else { -floor };
        design.predictor(b, &w, &mut z);
        return Ok(Fitted {
            intercept: b,
            weights: design.expand(&w),
            objective: problem.objective(&w, &z),
            newton_steps: 0,
        });
    }

    let rate = total_k / total_n;
    let mut b = (rate / (T::one() - rate)).ln();
    design.predictor(b, &w, &mut z);
    let mut f = problem.objective(&w, &z);

    let kkt_tol: T = cast(opts.kkt_tolerance);
    let obj_tol: T = cast(opts.objective_tolerance);
    let sweep_tol: T = cast(opts.kkt_tolerance * 1e-2);
    let h_floor: T = cast(1e-12);
    let armijo: T = cast(1e-2);
    let half: T = cast(0.5);

    let mut g = vec![T::zero(); rows];
    let mut h = vec![T::zero(); rows];
    let mut d = vec![T::zero(); rows];
    let mut dw = vec![T::zero(); width];
    let mut w_try = vec![T::zero(); width];
    let mut z_try = vec![T::zero(); rows];
    let mut steps = 0;

    while steps < opts.max_newton_steps {
        for m in 0..rows {
            let p = logistic(z[m]);
            g[m] = (n[m] * p - k[m]) * inv_n;
            h[m] = (n[m] * p * (T::one() - p) * inv_n).max(h_floor * n[m] * inv_n);
        }

        // KKT residuals at the current point.
        let mut residual = g.iter().fold(T::zero(), |a, v| a + *v).abs();
        for (col, wj) in design.columns.iter().zip(&w) {
            let gj = col.iter().fold(T::zero(), |a, &m| a + g[m]);
            let r = if *wj != T::zero() {
                (gj + problem.penalty * wj.signum()).abs()
            } else {
                (gj.abs() - problem.penalty).max(T::zero())
            };
            residual = residual.max(r);
        }
        if residual <= kkt_tol {
            break;
        }
        steps += 1;

        // Coordinate descent on the quadratic model.
        d.iter_mut().for_each(|v| *v = T::zero());
        dw.iter_mut().for_each(|v| *v = T::zero());
        let mut db = T::zero();
        let h_sum = h.iter().fold(T::zero(), |a, v| a + *v);
        let col_h: Vec<T> = design
            .columns
            .iter()
            .map(|col| col.iter().fold(T::zero(), |a, &m| a + h[m]))
            .collect();
        for _ in 0..opts.max_sweeps {
            let mut change = T::zero();
            let grad_b = (0..rows).fold(T::zero(), |a, m| a + g[m] + h[m] * d[m]);
            let step = -grad_b / h_sum;
            db = db + step;
            d.iter_mut().for_each(|v| *v = *v + step);
            change = change.max(step.abs() * h_sum.sqrt());

            for (j, col) in design.columns.iter().enumerate() {
                let a = col_h[j];
                let grad = col.iter().fold(T::zero(), |acc, &m| acc + g[m] + h[m] * d[m]);
                let cur = w[j] + dw[j];
                let new = soft_threshold(cur - grad / a, problem.penalty / a);
                let delta = new - cur;
                if delta != T::zero() {
                    dw[j] = dw[j] + delta;
                    for &m in col {
                        d[m] = d[m] + delta;
                    }
                    change = change.max(delta.abs() * a.sqrt());
                }
            }
            if change <= sweep_tol {
                break;
            }
        }

        // Backtracking line search on the composite objective.
        let decrease = d.iter().zip(&g).fold(T::zero(), |a, (d, g)| a + *d * *g)
            + problem.penalty
                * (w.iter().zip(&dw).fold(T::zero(), |a, (w, dw)| a + (*w + *dw).abs()) - l1(&w));
        if !(decrease < T::zero()) {
            break;
        }
        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..60 {
            for j in 0..width {
                w_try[j] = w[j] + t * dw[j];
            }
            for m in 0..rows {
                z_try[m] = z[m] + t * d[m];
            }
            let f_try = problem.objective(&w_try, &z_try);
            if f_try <= f + armijo * t * decrease {
                accepted = Some(f_try);
                break;
            }
            t = t * half;
        }
        let Some(f_new) = accepted else { break };
        b = b + t * db;
        std::mem::swap(&mut w, &mut w_try);
        // Recompute rather than accumulate so z stays consistent with (b, w).
        design.predictor(b, &w, &mut z);
        let improvement = f - f_new;
        f = problem.objective(&w, &z);
        if improvement <= obj_tol * f.abs().max(T::one()) {
            break;
        }
    }

    Ok(Fitted {
        intercept: b,
        weights: design.expand(&w),
        objective: f,
        newton_steps: steps,
    })
}

pub(crate) fn counts_as<T: Real>(k: &[u64], n: u64) -> (Vec<T>, Vec<T>) {
    let kt = k.iter().map(|&v| cast::<T>(v as f64)).collect();
    let nt = vec![cast::<T>(n as f64); k.len()];
    (kt, nt)
}

/// Fits the L1 logistic prior at strength `reg_strength`.
pub fn fit<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    reg_strength: T,
) -> Result<PriorModel<T>, PriorError> {
    fit_with(runs, lib, reg_strength, &FitOptions::default())
}

pub fn fit_with<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    reg_strength: T,
    opts: &FitOptions,
) -> Result<PriorModel<T>, PriorError> {
    check_shapes(runs, lib)?;
    if runs.is_empty() {
        return Err(PriorError::NoRuns);
    }
    let design = Design::new(lib);
    let (k, n) = runs.successes();
    let (k, n) = counts_as::<T>(&k, n);
    let fitted = fit_counts(&design, &k, &n, reg_strength, opts)?;
    Ok(model_from(fitted, reg_strength, lib))
}

pub(crate) fn model_from<T: Real>(fitted: Fitted<T>, reg_strength: T, lib: &PredicateLibrary) -> PriorModel<T> {
    PriorModel {
        intercept: fitted.intercept,
        weights: fitted.weights,
        reg_strength,
        names: lib.names().into_iter().map(String::from).collect(),
        objective: fitted.objective,
        newton_steps: fitted.newton_steps,
    }
}

pub(crate) fn check_shapes(runs: &RunMatrix, lib: &PredicateLibrary) -> Result<(), PriorError> {
    if runs.endpoints() != lib.endpoints() {
        return Err(PriorError::InvalidArgument(format!(
            "runs cover {} endpoints, library {}",
            runs.endpoints(),
            lib.endpoints()
        )));
    }
    Ok(())
}

/// Objective `F` of arbitrary parameters, for checking fits independently.
pub fn objective_at<T: Real>(
    runs: &RunMatrix,
    lib: &PredicateLibrary,
    reg_strength: T,
    intercept: T,
    weights: &[T],
) -> T {
    let (k, n) = runs.successes();
    let total = cast::<T>((n as usize * lib.endpoints()) as f64);
    let loss = (0..lib.endpoints()).fold(T::zero(), |acc, m| {
        let z = lib
            .row(m)
            .iter()
            .zip(weights)
            .filter(|(f, _)| **f)
            .fold(intercept, |a, (_, w)| a + *w);
        acc + cast::<T>(n as f64) * softplus(z) - cast::<T>(k[m] as f64) * z
    });
    loss / total + l1(weights) / (reg_strength * total)
}
