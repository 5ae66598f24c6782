use super::boundary::BoundaryData;
use super::lattice::{energy_and_gradient, energy_of, offset, LatticeEnergy, LatticeState, Terms};
use crate::error::{Error, Result};
use crate::forms::{DerivScheme, Form, Grid};
use crate::gauge::{EnergyReport, Pair};
use crate::quat::ImQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Step-length rule of the projected descent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    /// Start every line search at the same trial step and halve on failure.
    Backtracking { step: f64 },
    /// Barzilai-Borwein trial step, safeguarded by the same backtracking.
    TwoPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    pub step: StepRule,
    /// Stop once the preconditioned gradient norm falls below this fraction of its initial value.
    pub gradient_tolerance: f64,
    pub seed: u64,
    /// Amplitude of uniform initialization noise on free values; zero disables it.
    pub noise: f64,
    pub max_backtracks: usize,
    /// Stop when the energy drops by less than `stall_tolerance` (relative) over this many iterations.
    pub stall_window: usize,
    pub stall_tolerance: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iterations: 4000,
            step: StepRule::TwoPoint,
            gradient_tolerance: 1e-6,
            seed: 0,
            noise: 0.0,
            max_backtracks: 50,
            stall_window: 50,
            stall_tolerance: 1e-5,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0)
            || !(self.stall_tolerance >= 0.0)
            || self.max_iterations == 0
            || self.max_backtracks == 0
            || self.stall_window == 0
        {
            return Err(Error::Invalid("tolerances and iteration caps must be positive".into()));
        }
        if let StepRule::Backtracking { step } = self.step {
            if !(step > 0.0) {
                return Err(Error::Invalid("trial step must be positive".into()));
            }
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Invalid("noise amplitude must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub gradnorm: f64,
    pub step: f64,
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRow], mut w: W) -> Result<()> {
    writeln!(w, "iter,energy,gradnorm,step")?;
    for r in trace {
        writeln!(w, "{},{:.17e},{:.17e},{:.17e}", r.iter, r.energy, r.gradnorm, r.step)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    Gradient,
    Stalled,
    /// No step gives sufficient decrease at round-off level.
    Stationary,
    IterationCap,
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub pair: Pair,
    pub energy: EnergyReport,
    pub trace: Vec<TraceRow>,
    pub stop: StopReason,
}

/// Diagonal scaling of the descent: rough curvature of the lattice energy per value.
fn preconditioner(grid: &Grid, epsilon: f64) -> Vec<f64> {
    let n = grid.dim();
    let h = grid.h();
    let hn = h.powi(n as i32);
    let d_phi = hn * 4.0 * n as f64 / (epsilon * h * h);
    let d_a = hn * (2.0 * (n as f64 - 1.0) * epsilon / (h * h) + 4.0 / epsilon);
    let s = LatticeState::stride(n);
    (0..grid.len() * s).map(|k| if k % s < 3 { d_phi } else { d_a }).collect()
}

/// Boundary values extended by `Phi` harmonic for `A = 0` and `A = 0` inside.
fn default_start(bd: &BoundaryData) -> Result<Vec<f64>> {
    let g = bd.grid;
    let n = g.dim();
    let mut x = vec![0.0; bd.values.len()];
    bd.impose(&mut x);
    let zero_a = Form::from_components(g, 1, vec![vec![ImQuaternion::ZERO; g.len()]; n])?;
    let phi_bd = (0..g.len())
        .map(|i| ImQuaternion::from_array([x[offset(n, i, 0, 0)], x[offset(n, i, 0, 1)], x[offset(n, i, 0, 2)]]))
        .collect();
    let sec = super::harmonic_section(&zero_a, &Form::from_components(g, 0, vec![phi_bd])?, &Default::default())?;
    for (i, v) in sec.phi.components()[0].iter().enumerate() {
        x[offset(n, i, 0, 0)..offset(n, i, 0, 3)].copy_from_slice(&v.to_array());
    }
    Ok(x)
}

/// Projected descent on `E_eps` from the harmonic extension of the boundary data.
pub fn minimize(bd: &BoundaryData, epsilon: f64, opts: &MinimizeOptions) -> Result<Minimized> {
    let x = default_start(bd)?;
    descend(bd, epsilon, x, opts)
}

/// Projected descent on `E_eps` starting from `init`, whose boundary values are replaced by `bd`.
pub fn minimize_from(bd: &BoundaryData, epsilon: f64, init: &Pair, opts: &MinimizeOptions) -> Result<Minimized> {
    bd.grid.check_same(init.grid())?;
    descend(bd, epsilon, LatticeState::from_pair(init).x, opts)
}

fn descend(bd: &BoundaryData, epsilon: f64, mut x: Vec<f64>, opts: &MinimizeOptions) -> Result<Minimized> {
    opts.validate()?;
    if !(epsilon > 0.0) {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let grid = bd.grid;
    if x.len() != bd.values.len() {
        return Err(Error::GridMismatch);
    }
    if opts.noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for v in x.iter_mut() {
            *v += rng.gen_range(-opts.noise..=opts.noise);
        }
    }
    bd.impose(&mut x);
    let d = preconditioner(&grid, epsilon);
    let eval = |x: &[f64]| -> (LatticeEnergy, Vec<f64>) {
        let (e, mut g) = energy_and_gradient(&grid, x, epsilon, Terms::Full);
        bd.project(&mut g);
        (e, g)
    };
    let pnorm = |g: &[f64]| g.iter().zip(&d).map(|(v, s)| v * v / s).sum::<f64>().sqrt();

    let (mut e, mut g) = eval(&x);
    let g0 = pnorm(&g);
    let mut trace = vec![TraceRow { iter: 0, energy: e.total(), gradnorm: g0, step: 0.0 }];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut stop = if g0 == 0.0 { Some(StopReason::Gradient) } else { None };
    let mut last_step = match opts.step {
        StepRule::Backtracking { step } => step,
        StepRule::TwoPoint => 1.0,
    };
    for iter in 1..=opts.max_iterations {
        if stop.is_some() {
            break;
        }
        let gn = pnorm(&g);
        let mut step = match (opts.step, &prev) {
            (StepRule::Backtracking { step }, _) => step,
            (StepRule::TwoPoint, Some((px, pg))) => {
                let mut ss = 0.0;
                let mut sy = 0.0;
                for k in 0..x.len() {
                    let s = x[k] - px[k];
                    ss += d[k] * s * s;
                    sy += s * (g[k] - pg[k]);
                }
                if sy > 0.0 && ss > 0.0 {
                    ss / sy
                } else {
                    last_step
                }
            }
            (StepRule::TwoPoint, None) => 1.0 / gn.max(1.0),
        };
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&g).zip(&d).map(|((xi, gi), di)| xi - step * gi / di).collect();
            let et = energy_of(&grid, &trial, epsilon, Terms::Full);
            if et.total().is_finite() && et.total() <= e.total() - 1e-4 * step * gn * gn {
                accepted = Some(trial);
                break;
            }
            step *= 0.5;
        }
        let Some(next) = accepted else {
            // No sufficient decrease at round-off scale: stationary to working precision.
            if gn <= 1e-3 * g0.max(f64::MIN_POSITIVE) || step * gn * gn <= 1e-15 * e.total().abs().max(1.0) {
                stop = Some(StopReason::Stationary);
                break;
            }
            return Err(Error::Diverged { iteration: iter, trace: trace.iter().map(|r| r.energy).collect() });
        };
        last_step = step;
        let (en, gnext) = eval(&next);
        prev = Some((std::mem::replace(&mut x, next), std::mem::replace(&mut g, gnext)));
        e = en;
        let gnorm = pnorm(&g);
        trace.push(TraceRow { iter, energy: e.total(), gradnorm: gnorm, step });
        if gnorm <= opts.gradient_tolerance * g0 {
            stop = Some(StopReason::Gradient);
        } else if iter >= opts.stall_window {
            let old = trace[iter - opts.stall_window].energy;
            if old - e.total() <= opts.stall_tolerance * e.total().abs() {
                stop = Some(StopReason::Stalled);
            }
        }
    }
    let pair = LatticeState { grid, x }.to_pair(epsilon, DerivScheme::Central2)?;
    Ok(Minimized { pair, energy: e.report(), trace, stop: stop.unwrap_or(StopReason::IterationCap) })
}

/// Exact directional derivative check: relative gap between the analytic gradient and central
/// differences of the lattice energy along `directions` random directions on free values, at `p`
/// shifted by seeded uniform noise of amplitude `perturbation`.
pub fn gradient_audit(bd: &BoundaryData, p: &Pair, directions: usize, perturbation: f64, seed: u64) -> Result<f64> {
    bd.grid.check_same(p.grid())?;
    if !(perturbation >= 0.0) {
        return Err(Error::Invalid(format!("perturbation must be non-negative, got {perturbation}")));
    }
    let grid = bd.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = LatticeState::from_pair(p).x;
    x.iter_mut().for_each(|v| *v += perturbation * rng.gen_range(-1.0..1.0));
    bd.impose(&mut x);
    let (_, mut g) = energy_and_gradient(&grid, &x, p.epsilon, Terms::Full);
    bd.project(&mut g);
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let mut v: Vec<f64> = (0..x.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        bd.project(&mut v);
        let vn = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= vn);
        let analytic: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        let t = 1e-3;
        let shifted = |s: f64| -> f64 {
            let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + s * b).collect();
            energy_of(&grid, &y, p.epsilon, Terms::Full).total()
        };
        // Fourth-order central difference.
        let fd = (8.0 * (shifted(t) - shifted(-t)) - (shifted(2.0 * t) - shifted(-2.0 * t))) / (12.0 * t);
        let scale = analytic.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((analytic - fd).abs() / scale);
    }
    Ok(worst)
}
