//! Classical outer loop: finite-difference BFGS, random multistart,
//! and the level-by-level warm-start schedule.
//!
//! The circuit expectation is maximized by minimizing its negation.
//! All randomness flows from one 64-bit seed through per-restart RNG
//! streams, so results are bit-reproducible regardless of how the
//! restarts are scheduled across threads.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ansatz::{CompiledAnsatz, Params, Variant, MAX_LEVEL};
use crate::error::{Error, Result};

/// Optimizer configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptSettings {
    pub max_iterations: usize,
    /// Central finite-difference step.
    pub gradient_eps: f64,
    /// Stop when the gradient norm falls below this.
    pub convergence_tol: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for OptSettings {
    fn default() -> Self {
        OptSettings {
            max_iterations: 200,
            gradient_eps: 1e-6,
            convergence_tol: 1e-8,
            restarts: 50,
            rng_seed: 0,
        }
    }
}

impl OptSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be positive".into()));
        }
        if !(self.gradient_eps.is_finite() && self.gradient_eps > 0.0) {
            return Err(Error::Domain(format!(
                "gradient_eps must be positive, got {}",
                self.gradient_eps
            )));
        }
        if !(self.convergence_tol.is_finite() && self.convergence_tol > 0.0) {
            return Err(Error::Domain(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one level of optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub p: usize,
    pub variant: Variant,
    /// Raw (unwrapped) best parameters; wrap only for reporting.
    pub best_params: Params,
    pub best_fp: f64,
    pub success_prob: f64,
    /// Final f_p of each converged restart, in restart order.
    pub restart_values: Vec<f64>,
    /// Restarts aborted on non-finite objective values.
    pub failed_restarts: usize,
    pub wall_ms: u64,
}

/// Central differences (f(x+eps e_i) - f(x-eps e_i)) / (2 eps).
pub fn finite_diff_gradient<F>(objective: &F, x: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let mut gradient = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + eps;
        let plus = objective(&probe);
        probe[i] = x[i] - eps;
        let minus = objective(&probe);
        probe[i] = x[i];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::Optimization(
                "non-finite objective during gradient evaluation".into(),
            ));
        }
        gradient[i] = (plus - minus) / (2.0 * eps);
    }
    Ok(gradient)
}

/// Result of a single BFGS run.
#[derive(Debug, Clone, PartialEq)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `objective` from `x0` with BFGS: inverse-Hessian updates,
/// backtracking Armijo line search, gradient-norm stopping. Returns the
/// best point visited, which never exceeds the start value.
pub fn bfgs_minimize<F>(objective: &F, x0: &[f64], settings: &OptSettings) -> Result<BfgsOutcome>
where
    F: Fn(&[f64]) -> f64,
{
    settings.validate()?;
    let d = x0.len();
    if d == 0 {
        return Err(Error::Domain("empty parameter vector".into()));
    }
    let mut x = x0.to_vec();
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(Error::Optimization(format!(
            "non-finite objective {fx} at the start point"
        )));
    }
    let mut best_x = x.clone();
    let mut best_f = fx;
    let mut gradient = finite_diff_gradient(objective, &x, settings.gradient_eps)?;
    // Row-major inverse-Hessian approximation, reset to I on trouble.
    let identity = |h: &mut Vec<f64>| {
        h.iter_mut().enumerate().for_each(|(k, v)| {
            *v = if k % d == k / d { 1.0 } else { 0.0 };
        });
    };
    let mut h = vec![0.0; d * d];
    identity(&mut h);
    let mut iterations = 0;
    for _ in 0..settings.max_iterations {
        if norm(&gradient) < settings.convergence_tol {
            break;
        }
        // Search direction -H g, falling back to steepest descent if
        // the model loses positive definiteness.
        let mut direction: Vec<f64> = (0..d)
            .map(|row| -dot(&h[row * d..(row + 1) * d], &gradient))
            .collect();
        let mut slope = dot(&direction, &gradient);
        if !(slope < 0.0) {
            identity(&mut h);
            direction = gradient.iter().map(|g| -g).collect();
            slope = -dot(&gradient, &gradient);
            if slope == 0.0 {
                break;
            }
        }
        // Backtracking Armijo: accept f(x + t d) <= f(x) + c1 t <d, g>.
        let mut step = 1.0;
        let mut accepted: Option<(Vec<f64>, f64)> = None;
        for _ in 0..60 {
            let candidate: Vec<f64> = x
                .iter()
                .zip(&direction)
                .map(|(xi, di)| xi + step * di)
                .collect();
            let value = objective(&candidate);
            if value.is_finite() && value <= fx + 1e-4 * step * slope {
                accepted = Some((candidate, value));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // Line search stalled at numerical noise level.
            break;
        };
        let g_new = finite_diff_gradient(objective, &x_new, settings.gradient_eps)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&gradient).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T, r = 1/sy.
            let r = 1.0 / sy;
            let hy: Vec<f64> = (0..d)
                .map(|row| dot(&h[row * d..(row + 1) * d], &y))
                .collect();
            let yhy = dot(&y, &hy);
            for row in 0..d {
                for col in 0..d {
                    h[row * d + col] += -r * (s[row] * hy[col] + hy[row] * s[col])
                        + (r * r * yhy + r) * s[row] * s[col];
                }
            }
        }
        x = x_new;
        fx = f_new;
        gradient = g_new;
        iterations += 1;
        if fx < best_f {
            best_f = fx;
            best_x = x.clone();
        }
    }
    Ok(BfgsOutcome {
        x: best_x,
        value: best_f,
        iterations,
    })
}

/// Start vector for one restart: warm values prefix the frozen lower
/// level, new coordinates are drawn gamma in [0, 2pi), beta in [0, pi).
/// Restart 0 of a warm-started level zeroes the new layer instead, so
/// the previous optimum is always reachable and levels are monotone.
fn start_vector(
    variant: Variant,
    p: usize,
    warm: Option<&Params>,
    rng: &mut ChaCha8Rng,
    restart: usize,
) -> Vec<f64> {
    let zero_new_layer = warm.is_some() && restart == 0;
    let mut gammas = Vec::new();
    let mut betas = Vec::new();
    if let Some(prev) = warm {
        gammas.extend_from_slice(prev.gammas());
        betas.extend_from_slice(prev.betas());
    }
    if variant == Variant::Original {
        while gammas.len() < p {
            gammas.push(if zero_new_layer {
                0.0
            } else {
                rng.random_range(0.0..TAU)
            });
        }
    }
    while betas.len() < p {
        betas.push(if zero_new_layer {
            0.0
        } else {
            rng.random_range(0.0..PI)
        });
    }
    gammas.extend_from_slice(&betas);
    gammas
}

fn check_warm(ansatz: &CompiledAnsatz, warm: Option<&Params>) -> Result<()> {
    if let Some(prev) = warm {
        if prev.level() + 1 != ansatz.level() || prev.variant() != ansatz.variant() {
            return Err(Error::ShapeMismatch {
                what: "warm-start parameters",
                expected: ansatz.level() - 1,
                actual: prev.level(),
            });
        }
    }
    Ok(())
}

/// Runs `settings.restarts` independent BFGS maximizations of the
/// expectation of `diagonal` and keeps the best by final value; ties
/// break toward the lowest restart index. Restart RNG streams are
/// derived from (level, restart index), so any execution order yields
/// the same result.
pub fn multistart_with_diagonal(
    ansatz: &CompiledAnsatz,
    diagonal: &[f64],
    solution: usize,
    settings: &OptSettings,
    warm: Option<&Params>,
) -> Result<LevelResult> {
    settings.validate()?;
    check_warm(ansatz, warm)?;
    if diagonal.len() != 1usize << ansatz.qubits() {
        return Err(Error::ShapeMismatch {
            what: "objective diagonal",
            expected: 1usize << ansatz.qubits(),
            actual: diagonal.len(),
        });
    }
    if solution >= 1usize << ansatz.qubits() {
        return Err(Error::IndexOutOfRange {
            what: "solution index",
            index: solution,
            limit: 1usize << ansatz.qubits(),
        });
    }
    let started = Instant::now();
    let p = ansatz.level();
    let variant = ansatz.variant();
    let objective = |flat: &[f64]| -> f64 {
        match Params::from_flat(variant, p, flat) {
            Ok(params) => match ansatz.expectation(&params, diagonal) {
                Ok(value) => -value,
                Err(_) => f64::NAN,
            },
            Err(_) => f64::NAN,
        }
    };
    let outcomes: Vec<Result<BfgsOutcome>> = (0..settings.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
            rng.set_stream(((p as u64) << 32) | restart as u64);
            let x0 = start_vector(variant, p, warm, &mut rng, restart);
            bfgs_minimize(&objective, &x0, settings)
        })
        .collect();
    let mut restart_values = Vec::new();
    let mut failed_restarts = 0;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for outcome in outcomes {
        match outcome {
            Ok(run) => {
                let fp = -run.value;
                restart_values.push(fp);
                if best.as_ref().map_or(true, |(top, _)| fp > *top) {
                    best = Some((fp, run.x));
                }
            }
            Err(_) => failed_restarts += 1,
        }
    }
    let Some((best_fp, best_flat)) = best else {
        return Err(Error::Optimization(format!(
            "all {} restarts failed at level {p}",
            settings.restarts
        )));
    };
    let best_params = Params::from_flat(variant, p, &best_flat)?;
    let success_prob = ansatz.success_probability(&best_params, solution)?;
    Ok(LevelResult {
        p,
        variant,
        best_params,
        best_fp,
        success_prob,
        restart_values,
        failed_restarts,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

/// Multistart against an instance's compiled circuit; see
/// `multistart_with_diagonal`.
pub fn multistart(
    ansatz: &CompiledAnsatz,
    instance: &crate::problem::MecInstance,
    lambdas: &crate::problem::Lambdas,
    solution: usize,
    settings: &OptSettings,
) -> Result<LevelResult> {
    let diagonal = crate::problem::objective_diagonal(instance, lambdas)?;
    multistart_with_diagonal(ansatz, &diagonal, solution, settings, None)
}

/// Solves levels 1..=p_max in sequence, warm-starting every restart of
/// level p from the level-(p-1) optimum with one fresh layer appended.
pub fn schedule_with_diagonal(
    base: &CompiledAnsatz,
    diagonal: &[f64],
    solution: usize,
    p_max: usize,
    settings: &OptSettings,
) -> Result<Vec<LevelResult>> {
    if p_max < 1 || p_max > MAX_LEVEL {
        return Err(Error::OutOfRange {
            what: "circuit level",
            value: p_max,
            min: 1,
            max: MAX_LEVEL,
        });
    }
    let mut levels: Vec<LevelResult> = Vec::with_capacity(p_max);
    for p in 1..=p_max {
        let ansatz = base.at_level(p)?;
        let warm = levels.last().map(|prev| &prev.best_params);
        let result = multistart_with_diagonal(&ansatz, diagonal, solution, settings, warm)?;
        levels.push(result);
    }
    Ok(levels)
}

/// Warm-start schedule against an instance's compiled circuit; see
/// `schedule_with_diagonal`.
pub fn parameter_fixing_schedule(
    base: &CompiledAnsatz,
    instance: &crate::problem::MecInstance,
    lambdas: &crate::problem::Lambdas,
    solution: usize,
    p_max: usize,
    settings: &OptSettings,
) -> Result<Vec<LevelResult>> {
    let diagonal = crate::problem::objective_diagonal(instance, lambdas)?;
    schedule_with_diagonal(base, &diagonal, solution, p_max, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{default_lambdas, objective_diagonal, MecInstance};

    fn toy4() -> MecInstance {
        MecInstance::new(4, vec![vec![1, 2], vec![3, 4], vec![1, 3], vec![2, 3, 4]]).unwrap()
    }

    fn toy4_setup(variant: Variant, p: usize) -> (CompiledAnsatz, Vec<f64>) {
        let instance = toy4();
        let lambdas = default_lambdas(4, 4).unwrap();
        let ansatz = CompiledAnsatz::compile(&instance, &lambdas, variant, p).unwrap();
        let diagonal = objective_diagonal(&instance, &lambdas).unwrap();
        (ansatz, diagonal)
    }

    #[test]
    fn settings_validation() {
        assert!(OptSettings::default().validate().is_ok());
        assert!(OptSettings {
            max_iterations: 0,
            ..OptSettings::default()
        }
        .validate()
        .is_err());
        assert!(OptSettings {
            gradient_eps: 0.0,
            ..OptSettings::default()
        }
        .validate()
        .is_err());
        assert!(OptSettings {
            convergence_tol: -1.0,
            ..OptSettings::default()
        }
        .validate()
        .is_err());
        assert!(OptSettings {
            restarts: 0,
            ..OptSettings::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let g = finite_diff_gradient(&f, &[1.0, -2.0], 1e-6).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-6);
        assert!((g[1] + 4.0).abs() < 1e-6);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let f = |_: &[f64]| 3.25;
        let g = finite_diff_gradient(&f, &[0.4, 0.5, 0.6], 1e-6).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn gradient_rejects_non_finite() {
        let f = |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 };
        assert!(matches!(
            finite_diff_gradient(&f, &[0.0], 1e-6),
            Err(Error::Optimization(_))
        ));
    }

    #[test]
    fn gradient_richardson_consistency_on_expectation() {
        // Steps 1e-5 and 1e-6 must agree for a smooth objective.
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 2);
        let f = |flat: &[f64]| {
            let params = Params::from_flat(Variant::Original, 2, flat).unwrap();
            ansatz.expectation(&params, &diagonal).unwrap()
        };
        let x = [0.9, 0.4, 1.3, 0.7];
        let coarse = finite_diff_gradient(&f, &x, 1e-5).unwrap();
        let fine = finite_diff_gradient(&f, &x, 1e-6).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_matches_directional_derivative() {
        // <grad f, u> must equal the one-sided slope along u.
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 2);
        let f = |flat: &[f64]| {
            let params = Params::from_flat(Variant::Original, 2, flat).unwrap();
            ansatz.expectation(&params, &diagonal).unwrap()
        };
        let x = vec![0.31, 1.7, 0.52, 2.4];
        let direction = [0.5, -0.3, 0.7, 0.4];
        let scale: f64 = norm(&direction);
        let unit: Vec<f64> = direction.iter().map(|d| d / scale).collect();
        let gradient = finite_diff_gradient(&f, &x, 1e-6).unwrap();
        let predicted = dot(&gradient, &unit);
        let h = 1e-5;
        let shifted: Vec<f64> = x.iter().zip(&unit).map(|(a, u)| a + h * u).collect();
        let measured = (f(&shifted) - f(&x)) / h;
        assert!(
            (predicted - measured).abs() < 1e-4,
            "{predicted} vs {measured}"
        );
    }

    #[test]
    fn bfgs_solves_quadratic() {
        let f = |x: &[f64]| (x[0] - 2.0) * (x[0] - 2.0);
        let outcome = bfgs_minimize(&f, &[0.0], &OptSettings::default()).unwrap();
        assert!((outcome.x[0] - 2.0).abs() < 1e-6);
        assert!(outcome.value < 1e-10);
    }

    #[test]
    fn bfgs_solves_rosenbrock() {
        let f = |x: &[f64]| {
            let a = 1.0 - x[0];
            let b = x[1] - x[0] * x[0];
            a * a + 100.0 * b * b
        };
        let settings = OptSettings {
            max_iterations: 500,
            ..OptSettings::default()
        };
        let outcome = bfgs_minimize(&f, &[-1.2, 1.0], &settings).unwrap();
        assert!(outcome.value < 1e-8, "f* = {}", outcome.value);
        assert!((outcome.x[0] - 1.0).abs() < 1e-3);
        assert!((outcome.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn bfgs_never_returns_worse_than_start() {
        // A ridge with a cliff: whatever happens, the reported value
        // must not exceed the start value.
        let f = |x: &[f64]| (x[0].sin() * 5.0).exp() + 0.01 * x[0] * x[0];
        let start = 1.3;
        let outcome = bfgs_minimize(&f, &[start], &OptSettings::default()).unwrap();
        assert!(outcome.value <= f(&[start]) + 1e-15);
    }

    #[test]
    fn bfgs_rejects_non_finite_start() {
        let f = |_: &[f64]| f64::INFINITY;
        assert!(matches!(
            bfgs_minimize(&f, &[0.0], &OptSettings::default()),
            Err(Error::Optimization(_))
        ));
    }

    /// Grid search over beta with local zoom refinement. At level 1
    /// the expectation does not depend on gamma (the phase layer sees
    /// only the zero-objective start state), so this finds the global
    /// level-1 optimum to high precision.
    fn level1_grid_oracle(ansatz: &CompiledAnsatz, diagonal: &[f64]) -> f64 {
        let eval = |beta: f64| {
            let params = Params::original(vec![0.0], vec![beta]).unwrap();
            ansatz.expectation(&params, diagonal).unwrap()
        };
        let mut lo = 0.0;
        let mut hi = PI;
        let mut best_beta = 0.0;
        let mut best = f64::NEG_INFINITY;
        for round in 0..6 {
            let points = if round == 0 { 200 } else { 64 };
            let step = (hi - lo) / points as f64;
            for k in 0..=points {
                let beta = lo + k as f64 * step;
                let value = eval(beta);
                if value > best {
                    best = value;
                    best_beta = beta;
                }
            }
            lo = (best_beta - step).max(0.0);
            hi = (best_beta + step).min(PI);
        }
        best
    }

    #[test]
    fn multistart_matches_level1_grid_oracle() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 1);
        let oracle_best = level1_grid_oracle(&ansatz, &diagonal);
        let settings = OptSettings {
            restarts: 20,
            rng_seed: 7,
            ..OptSettings::default()
        };
        let result = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        assert!(
            (result.best_fp - oracle_best).abs() < 1e-6,
            "bfgs {} vs grid {}",
            result.best_fp,
            oracle_best
        );
    }

    #[test]
    fn multistart_is_deterministic() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 2);
        let settings = OptSettings {
            restarts: 6,
            rng_seed: 42,
            ..OptSettings::default()
        };
        let a = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        let b = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        assert_eq!(a.best_fp.to_bits(), b.best_fp.to_bits());
        assert_eq!(a.success_prob.to_bits(), b.success_prob.to_bits());
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.restart_values.len(), b.restart_values.len());
        for (x, y) in a.restart_values.iter().zip(&b.restart_values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        // A different seed explores different starts.
        let c = multistart_with_diagonal(
            &ansatz,
            &diagonal,
            0b0011,
            &OptSettings {
                rng_seed: 43,
                ..settings
            },
            None,
        )
        .unwrap();
        assert_ne!(
            a.restart_values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            c.restart_values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn multistart_result_invariants() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 2);
        let settings = OptSettings {
            restarts: 8,
            rng_seed: 3,
            ..OptSettings::default()
        };
        let result = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        let max_restart = result
            .restart_values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((result.best_fp - max_restart).abs() < 1e-12);
        assert_eq!(result.restart_values.len() + result.failed_restarts, 8);
        // Never above the feasible objective maximum (1 with defaults).
        let feasible_max = diagonal
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                crate::problem::is_independent(
                    &crate::problem::conflict_graph(&toy4()),
                    *i,
                )
            })
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(result.best_fp <= feasible_max + 1e-9);
        assert!((0.0..=1.0).contains(&result.success_prob));
        assert_eq!(result.p, 2);
        assert_eq!(result.variant, Variant::Original);
    }

    #[test]
    fn multistart_high_level_nails_toy4() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 3);
        let settings = OptSettings {
            restarts: 50,
            rng_seed: 11,
            ..OptSettings::default()
        };
        let result = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        assert!(
            result.success_prob >= 0.9,
            "success probability {}",
            result.success_prob
        );
    }

    #[test]
    fn multistart_validates_inputs() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 1);
        let settings = OptSettings {
            restarts: 1,
            ..OptSettings::default()
        };
        assert!(matches!(
            multistart_with_diagonal(&ansatz, &diagonal[..8], 3, &settings, None),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(matches!(
            multistart_with_diagonal(&ansatz, &diagonal, 16, &settings, None),
            Err(Error::IndexOutOfRange { .. })
        ));
        let wrong_warm = Params::original(vec![0.1], vec![0.2]).unwrap();
        assert!(matches!(
            multistart_with_diagonal(&ansatz, &diagonal, 3, &settings, Some(&wrong_warm)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn instance_level_wrappers_agree_with_diagonal_path() {
        let instance = toy4();
        let lambdas = default_lambdas(4, 4).unwrap();
        let ansatz = CompiledAnsatz::compile(&instance, &lambdas, Variant::Original, 1).unwrap();
        let diagonal = objective_diagonal(&instance, &lambdas).unwrap();
        let settings = OptSettings {
            restarts: 3,
            rng_seed: 5,
            ..OptSettings::default()
        };
        let a = multistart(&ansatz, &instance, &lambdas, 0b0011, &settings).unwrap();
        let b = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        assert_eq!(a.best_fp.to_bits(), b.best_fp.to_bits());
        let sched_a =
            parameter_fixing_schedule(&ansatz, &instance, &lambdas, 0b0011, 2, &settings).unwrap();
        let sched_b =
            schedule_with_diagonal(&ansatz, &diagonal, 0b0011, 2, &settings).unwrap();
        assert_eq!(sched_a.len(), 2);
        for (x, y) in sched_a.iter().zip(&sched_b) {
            assert_eq!(x.best_fp.to_bits(), y.best_fp.to_bits());
        }
    }

    #[test]
    fn schedule_levels_are_monotone_and_warm_started() {
        let (ansatz, diagonal) = toy4_setup(Variant::Original, 1);
        let settings = OptSettings {
            restarts: 4,
            rng_seed: 9,
            ..OptSettings::default()
        };
        let levels = schedule_with_diagonal(&ansatz, &diagonal, 0b0011, 4, &settings).unwrap();
        assert_eq!(levels.len(), 4);
        for (k, level) in levels.iter().enumerate() {
            assert_eq!(level.p, k + 1);
        }
        for pair in levels.windows(2) {
            assert!(
                pair[1].best_fp >= pair[0].best_fp - 1e-9,
                "level {} regressed: {} < {}",
                pair[1].p,
                pair[1].best_fp,
                pair[0].best_fp
            );
        }
    }

    #[test]
    fn schedule_level_one_equals_plain_multistart() {
        let (ansatz, diagonal) = toy4_setup(Variant::Optimized, 1);
        let settings = OptSettings {
            restarts: 5,
            rng_seed: 21,
            ..OptSettings::default()
        };
        let levels = schedule_with_diagonal(&ansatz, &diagonal, 0b0011, 1, &settings).unwrap();
        let plain = multistart_with_diagonal(&ansatz, &diagonal, 0b0011, &settings, None).unwrap();
        assert_eq!(levels[0].best_fp.to_bits(), plain.best_fp.to_bits());
        assert_eq!(levels[0].best_params, plain.best_params);
    }

    #[test]
    fn start_vector_embeds_previous_optimum() {
        let warm = Params::original(vec![1.1, 2.2], vec![0.3, 0.4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let flat = start_vector(Variant::Original, 3, Some(&warm), &mut rng, 1);
        assert_eq!(flat.len(), 6);
        assert_eq!(&flat[..2], &[1.1, 2.2]);
        assert_eq!(&flat[3..5], &[0.3, 0.4]);
        assert!((0.0..TAU).contains(&flat[2]));
        assert!((0.0..PI).contains(&flat[5]));
        // Restart 0 zeroes the new layer so the previous optimum is in
        // the search space from the start.
        let zeroed = start_vector(Variant::Original, 3, Some(&warm), &mut rng, 0);
        assert_eq!(zeroed[2], 0.0);
        assert_eq!(zeroed[5], 0.0);
    }
}
