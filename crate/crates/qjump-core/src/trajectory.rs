//! Monte Carlo wave-function unravelling of jump models into click patterns,
//! plus the dense master-equation and no-click conditional propagators used
//! as ensemble-average references.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krylov::{expm_multiply, LinearOp};
use crate::models::JumpModel;
use crate::ode::{integrate, OdeOptions};
use crate::quantum::{expectation, expectation_dense, DensityMatrix, Operator, StateVector};
use crate::spectral::SpectralPropagator;

/// Strictly increasing detection times of accessible jumps over an
/// observation span.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickPattern {
    times: Vec<f64>,
    span: f64,
}

impl ClickPattern {
    pub fn new(times: Vec<f64>, span: f64) -> Result<Self> {
        for w in times.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config(format!(
                    "click times must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if times.first().is_some_and(|&t| t < 0.0) {
            return Err(Error::Config("click times must be nonnegative".into()));
        }
        if let Some(&last) = times.last() {
            if span < last {
                return Err(Error::Config(format!(
                    "span {span} is before the last click {last}"
                )));
            }
        }
        Ok(Self { times, span })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    pub fn n_clicks(&self) -> usize {
        self.times.len()
    }

    /// Inter-click gaps, the first one measured from t = 0.
    pub fn gaps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.times
            .iter()
            .map(|&t| {
                let g = t - prev;
                prev = t;
                g
            })
            .collect()
    }
}

/// When to stop a simulated trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop once this many accessible clicks have been recorded.
    ClickCount(usize),
    /// Stop at this wall time.
    WallTime(f64),
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            StopRule::ClickCount(n) if *n == 0 => {
                Err(Error::Config("click-count stop rule needs n >= 1".into()))
            }
            StopRule::WallTime(t) if *t <= 0.0 => {
                Err(Error::Config("wall-time stop rule needs t > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Counter-based per-trajectory random stream; identical regardless of which
/// worker runs the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectorySeed {
    pub master_seed: u64,
    pub trajectory_index: u64,
}

impl TrajectorySeed {
    pub fn new(master_seed: u64, trajectory_index: u64) -> Self {
        Self {
            master_seed,
            trajectory_index,
        }
    }

    pub fn rng(&self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.trajectory_index);
        rng
    }
}

/// Hard cap on trajectory time; hitting it means the model is effectively
/// dark for the requested stop rule.
const TIME_CAP: f64 = 1e9;
/// Threshold below which a jump outcome is treated as numerically dark.
const DARK_JUMP_TOL: f64 = 1e-14;
/// Relative time tolerance of the jump-time root refinement.
const JUMP_TIME_REL_TOL: f64 = 1e-10;

enum Propagator {
    Spectral(SpectralPropagator),
    Ode(OdeOptions),
}

/// Reusable simulation engine for one jump model; builds the spectral
/// propagator once and shares it across trajectories.
pub struct Engine<'m> {
    model: &'m JumpModel,
    propagator: Propagator,
}

/// Outcome of a jump-time search within a window.
pub enum JumpSearch {
    /// Jump at `time` (relative to the search start); the state is the
    /// unnormalised pre-jump state.
    Found { time: f64, state: StateVector },
    /// Norm stayed above the threshold up to the horizon; the state is the
    /// unnormalised state at the horizon.
    Horizon { state: StateVector },
}

impl<'m> Engine<'m> {
    pub fn new(model: &'m JumpModel) -> Self {
        let propagator = match SpectralPropagator::new(model.conditional_hamiltonian()) {
            Ok(s) => Propagator::Spectral(s),
            Err(_) => Propagator::Ode(OdeOptions::default()),
        };
        Self { model, propagator }
    }

    pub fn model(&self) -> &JumpModel {
        self.model
    }

    fn propagate_raw(&self, psi: &[C64], dt: f64) -> Result<Vec<C64>> {
        match &self.propagator {
            Propagator::Spectral(sp) => Ok(sp.propagate(psi, dt)),
            Propagator::Ode(opts) => {
                let h = self.model.conditional_hamiltonian();
                let rhs = move |_t: f64, y: &[C64], dy: &mut [C64]| {
                    h.apply(y, dy);
                    for v in dy.iter_mut() {
                        *v *= -C64::i();
                    }
                };
                let mut y = psi.to_vec();
                let mut prev = norm_sq(&y);
                integrate(&rhs, &mut y, 0.0, dt, opts, &mut |_t, s| {
                    let n = norm_sq(s);
                    assert!(
                        n <= prev * (1.0 + 1e-9) + 1e-12,
                        "norm must not increase under conditional evolution"
                    );
                    prev = n;
                })?;
                Ok(y)
            }
        }
    }

    /// Advance the unnormalised state under the conditional Hamiltonian.
    pub fn evolve_no_jump(&self, state: &StateVector, dt: f64) -> Result<StateVector> {
        if state.basis() != self.model.basis() {
            return Err(Error::BasisMismatch {
                left: self.model.dim(),
                right: state.basis().total_dim(),
            });
        }
        let before = state.norm_squared();
        let out = self.propagate_raw(state.amplitudes().as_slice().unwrap(), dt)?;
        let after: f64 = out.iter().map(|x| x.norm_sqr()).sum();
        assert!(
            after <= before * (1.0 + 1e-9) + 1e-12,
            "norm must not increase under conditional evolution"
        );
        StateVector::new(state.basis().clone(), Array1::from(out))
    }

    /// Total jump rate `sum_n rate_n <L_n^dag L_n>` of a normalised state.
    fn total_rate(&self, psi: &[C64]) -> f64 {
        let mut buf = vec![C64::new(0.0, 0.0); psi.len()];
        let mut total = 0.0;
        for ch in self.model.channels() {
            ch.operator.apply(psi, &mut buf);
            total += ch.rate * norm_sq(&buf);
        }
        total
    }

    /// Earliest `t` in `(0, horizon]` where the squared norm crosses
    /// `r * ||psi||^2`, refined to relative tolerance 1e-10.
    pub fn find_jump_time(&self, state: &StateVector, r: f64, horizon: f64) -> Result<JumpSearch> {
        assert!(r > 0.0 && r < 1.0, "threshold r must lie in (0,1)");
        let psi0 = state.amplitudes().as_slice().unwrap();
        let n0 = state.norm_squared();
        let target = r * n0;

        match &self.propagator {
            Propagator::Spectral(sp) => {
                let coeffs = sp.to_eigenbasis(psi0);
                let mut scratch = vec![C64::new(0.0, 0.0); sp.dim()];
                let mut eval = |t: f64| sp.norm_sq_at(&coeffs, t, &mut scratch) - target;

                // exponential bracket search seeded by the current jump rate
                let rate = self.total_rate(psi0) / n0;
                let mut dt = if rate > 0.0 {
                    (-(r.ln()) / rate).max(1e-12)
                } else {
                    horizon.min(1.0)
                };
                let mut t_lo = 0.0;
                let mut f_lo = n0 - target; // > 0
                loop {
                    let t_hi = (t_lo + dt).min(horizon);
                    let f_hi = eval(t_hi);
                    assert!(
                        f_hi <= f_lo * (1.0 + 1e-9) + 1e-12 * n0,
                        "norm must not increase under conditional evolution"
                    );
                    if f_hi <= 0.0 {
                        let t_star = brent_root(&mut eval, t_lo, t_hi, f_lo, f_hi, JUMP_TIME_REL_TOL);
                        sp.propagate_coeffs(&coeffs, t_star, &mut scratch);
                        let state = StateVector::new(
                            state.basis().clone(),
                            Array1::from(scratch.clone()),
                        )?;
                        return Ok(JumpSearch::Found {
                            time: t_star,
                            state,
                        });
                    }
                    if t_hi >= horizon {
                        sp.propagate_coeffs(&coeffs, horizon, &mut scratch);
                        let state = StateVector::new(
                            state.basis().clone(),
                            Array1::from(scratch.clone()),
                        )?;
                        return Ok(JumpSearch::Horizon { state });
                    }
                    t_lo = t_hi;
                    f_lo = f_hi;
                    dt *= 2.0;
                }
            }
            Propagator::Ode(_) => {
                let rate = self.total_rate(psi0) / n0;
                let mut chunk = if rate > 0.0 {
                    (-(r.ln()) / rate).max(1e-9)
                } else {
                    horizon.min(1.0)
                };
                let mut t_lo = 0.0;
                let mut psi_lo = psi0.to_vec();
                let mut f_lo = n0 - target;
                loop {
                    let width = chunk.min(horizon - t_lo);
                    let psi_hi = self.propagate_raw(&psi_lo, width)?;
                    let f_hi = norm_sq(&psi_hi) - target;
                    if f_hi <= 0.0 {
                        // refine inside [0, width] from psi_lo
                        let mut eval = |dt: f64| -> f64 {
                            let y = self
                                .propagate_raw(&psi_lo, dt)
                                .expect("refinement integration failed");
                            norm_sq(&y) - target
                        };
                        let dt_star = brent_root(&mut eval, 0.0, width, f_lo, f_hi, JUMP_TIME_REL_TOL);
                        let y = self.propagate_raw(&psi_lo, dt_star)?;
                        let state = StateVector::new(state.basis().clone(), Array1::from(y))?;
                        return Ok(JumpSearch::Found {
                            time: t_lo + dt_star,
                            state,
                        });
                    }
                    t_lo += width;
                    if t_lo >= horizon {
                        let state =
                            StateVector::new(state.basis().clone(), Array1::from(psi_hi))?;
                        return Ok(JumpSearch::Horizon { state });
                    }
                    psi_lo = psi_hi;
                    f_lo = f_hi;
                    chunk *= 2.0;
                }
            }
        }
    }

    /// Draw a channel index with probability proportional to
    /// `rate_n <L_n^dag L_n>`.
    pub fn sample_channel(&self, state: &StateVector, u: f64) -> Result<usize> {
        let psi = state.amplitudes().as_slice().unwrap();
        let mut buf = vec![C64::new(0.0, 0.0); psi.len()];
        let weights: Vec<f64> = self
            .model
            .channels()
            .iter()
            .map(|ch| {
                ch.operator.apply(psi, &mut buf);
                ch.rate * norm_sq(&buf)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DarkState);
        }
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u * total < acc {
                return Ok(i);
            }
        }
        Ok(weights.len() - 1)
    }

    /// Apply channel `idx` and renormalise.
    pub fn apply_jump(&self, state: &StateVector, idx: usize) -> Result<StateVector> {
        let ch = &self.model.channels()[idx];
        let jumped = ch.operator.apply_state(state)?;
        let nsq = jumped.norm_squared();
        if nsq < DARK_JUMP_TOL * state.norm_squared() {
            return Err(Error::DarkJump { norm_sq: nsq });
        }
        Ok(jumped.normalized())
    }

    /// Unravel one trajectory, recording accessible-channel click times.
    pub fn simulate(
        &self,
        initial: &StateVector,
        stop: StopRule,
        seed: TrajectorySeed,
    ) -> Result<ClickPattern> {
        stop.validate()?;
        let mut rng = seed.rng();
        let mut psi = initial.normalized();
        let mut t = 0.0f64;
        let mut clicks: Vec<f64> = Vec::new();

        loop {
            let horizon = match stop {
                StopRule::WallTime(tmax) => tmax - t,
                StopRule::ClickCount(_) => TIME_CAP - t,
            };
            if horizon <= 0.0 {
                break;
            }
            let r = draw_open_unit(&mut rng);
            match self.find_jump_time(&psi, r, horizon)? {
                JumpSearch::Horizon { .. } => match stop {
                    StopRule::WallTime(tmax) => {
                        return ClickPattern::new(clicks, tmax);
                    }
                    StopRule::ClickCount(_) => {
                        return Err(Error::Integration(format!(
                            "no jump before the {TIME_CAP:.0e} time cap; model is dark"
                        )));
                    }
                },
                JumpSearch::Found { time, state } => {
                    // keep times strictly increasing under fp rounding
                    let dt = time.max(f64::EPSILON * t.max(1.0));
                    t += dt;
                    let pre = state.normalized();
                    let u = rng.random::<f64>();
                    let idx = self.sample_channel(&pre, u)?;
                    psi = self.apply_jump(&pre, idx)?;
                    if self.model.channels()[idx].accessible {
                        clicks.push(t);
                        if let StopRule::ClickCount(n) = stop {
                            if clicks.len() >= n {
                                return ClickPattern::new(clicks, t);
                            }
                        }
                    }
                }
            }
        }
        let span = match stop {
            StopRule::WallTime(tmax) => tmax,
            StopRule::ClickCount(_) => t,
        };
        ClickPattern::new(clicks, span)
    }

    /// Normalised expectation values of `op` along one trajectory at the
    /// given times (ascending).
    fn trajectory_expectations(
        &self,
        initial: &StateVector,
        op: &Operator,
        t_grid: &[f64],
        seed: TrajectorySeed,
    ) -> Result<Vec<f64>> {
        let mut rng = seed.rng();
        let mut psi = initial.normalized();
        let mut t = 0.0f64;
        let mut out = Vec::with_capacity(t_grid.len());
        let mut next = 0usize;

        while next < t_grid.len() {
            let r = draw_open_unit(&mut rng);
            let search = self.find_jump_time(&psi, r, TIME_CAP - t)?;
            let (jump_dt, pre_state) = match search {
                JumpSearch::Found { time, state } => (time, state),
                JumpSearch::Horizon { .. } => {
                    return Err(Error::Integration(
                        "trajectory went dark before covering the time grid".into(),
                    ))
                }
            };
            while next < t_grid.len() && t_grid[next] <= t + jump_dt {
                let q = self.propagate_raw(
                    psi.amplitudes().as_slice().unwrap(),
                    t_grid[next] - t,
                )?;
                let qs = StateVector::new(psi.basis().clone(), Array1::from(q))?;
                let e = expectation(op, &qs)?;
                out.push(e.re / qs.norm_squared());
                next += 1;
            }
            t += jump_dt;
            let pre = pre_state.normalized();
            let u = rng.random::<f64>();
            let idx = self.sample_channel(&pre, u)?;
            psi = self.apply_jump(&pre, idx)?;
        }
        Ok(out)
    }
}

/// Mean and standard error of a trajectory-ensemble expectation value.
#[derive(Debug, Clone, Copy)]
pub struct EnsembleStat {
    pub mean: f64,
    pub std_err: f64,
}

/// Ensemble average of `<op>(t)` over `n_traj` unravelled trajectories.
pub fn ensemble_expectation(
    model: &JumpModel,
    initial: &StateVector,
    op: &Operator,
    t_grid: &[f64],
    n_traj: usize,
    master_seed: u64,
) -> Result<Vec<EnsembleStat>> {
    let engine = Engine::new(model);
    let rows: Result<Vec<Vec<f64>>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|i| {
            engine.trajectory_expectations(initial, op, t_grid, TrajectorySeed::new(master_seed, i))
        })
        .collect();
    let rows = rows?;
    let n = n_traj as f64;
    Ok((0..t_grid.len())
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            EnsembleStat {
                mean,
                std_err: (var / n).sqrt(),
            }
        })
        .collect())
}

/// Advance the unnormalised state under `-i H_cond psi` for `dt`.
pub fn no_jump_evolve(model: &JumpModel, state: &StateVector, dt: f64) -> Result<StateVector> {
    Engine::new(model).evolve_no_jump(state, dt)
}

/// Channel index drawn with probability proportional to
/// `rate_n <psi|L_n^dag L_n|psi>`.
pub fn sample_jump_channel(model: &JumpModel, state: &StateVector, u: f64) -> Result<usize> {
    Engine::new(model).sample_channel(state, u)
}

/// Earliest time where the conditional norm drops to `r`, together with the
/// unnormalised pre-jump state.
pub fn find_jump_time(
    model: &JumpModel,
    state: &StateVector,
    r: f64,
    horizon: f64,
) -> Result<JumpSearch> {
    Engine::new(model).find_jump_time(state, r, horizon)
}

/// Unravel one trajectory with a fresh engine; use [`Engine`] directly when
/// simulating many trajectories of the same model.
pub fn simulate_trajectory(
    model: &JumpModel,
    initial: &StateVector,
    stop: StopRule,
    seed: TrajectorySeed,
) -> Result<ClickPattern> {
    Engine::new(model).simulate(initial, stop, seed)
}

fn draw_open_unit<R: Rng>(rng: &mut R) -> f64 {
    loop {
        // 1 - u in (0, 1]; reject the endpoint 1 to stay in the open interval
        let r = 1.0 - rng.random::<f64>();
        if r < 1.0 {
            return r;
        }
    }
}

fn norm_sq(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

fn brent_root<F: FnMut(f64) -> f64>(
    f: &mut F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    rel_tol: f64,
) -> f64 {
    // classic Brent bracketing: root in [a, b] with fa > 0 >= fb
    debug_assert!(fa >= 0.0 && fb <= 0.0);
    if fb == 0.0 {
        return b;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * rel_tol * b.abs().max(1e-6);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol {
            d
        } else if xm > 0.0 {
            tol
        } else {
            -tol
        };
        fb = f(b);
        if (fb > 0.0) != (fc > 0.0) {
            // keep the bracket
        } else {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    b
}

// ---------------------------------------------------------------------------
// dense ensemble-average propagation
// ---------------------------------------------------------------------------

struct ChannelOps {
    l: Operator,
    l_dag: Operator,
    ldl: Operator,
    rate: f64,
    accessible: bool,
}

fn channel_ops(model: &JumpModel) -> Vec<ChannelOps> {
    model
        .channels()
        .iter()
        .map(|ch| ChannelOps {
            l: ch.operator.clone(),
            l_dag: ch.operator.dagger(),
            ldl: ch.operator.dagger().matmul(&ch.operator),
            rate: ch.rate,
            accessible: ch.accessible,
        })
        .collect()
}

/// Full ensemble-average Lindblad generator acting on vectorised (row-major)
/// density matrices.
pub struct LindbladGenerator {
    h: Operator,
    channels: Vec<ChannelOps>,
    dim: usize,
}

impl LindbladGenerator {
    pub fn new(model: &JumpModel) -> Self {
        Self {
            h: model.hamiltonian().clone(),
            channels: channel_ops(model),
            dim: model.dim(),
        }
    }
}

impl LinearOp for LindbladGenerator {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = self.dim;
        y.fill(C64::new(0.0, 0.0));
        self.h.mul_left_slice(x, y, -C64::i());
        self.h.mul_right_slice(x, y, C64::i());
        let mut l_rho = vec![C64::new(0.0, 0.0); d * d];
        for ch in &self.channels {
            let rate = C64::new(ch.rate, 0.0);
            l_rho.fill(C64::new(0.0, 0.0));
            ch.l.mul_left_slice(x, &mut l_rho, C64::new(1.0, 0.0));
            ch.l_dag.mul_right_slice(&l_rho, y, rate);
            ch.ldl.mul_left_slice(x, y, -0.5 * rate);
            ch.ldl.mul_right_slice(x, y, -0.5 * rate);
        }
    }
}

/// Generator of the evolution conditioned on no accessible jumps: the
/// conditional term plus the feeding terms of the inaccessible channels.
pub struct NoClickGenerator {
    h_cond: Operator,
    h_cond_dag: Operator,
    feeds: Vec<(Operator, Operator, f64)>,
    dim: usize,
}

impl NoClickGenerator {
    pub fn new(model: &JumpModel) -> Self {
        let feeds = model
            .channels()
            .iter()
            .filter(|c| !c.accessible)
            .map(|c| (c.operator.clone(), c.operator.dagger(), c.rate))
            .collect();
        Self {
            h_cond: model.conditional_hamiltonian().clone(),
            h_cond_dag: model.conditional_hamiltonian().dagger(),
            feeds,
            dim: model.dim(),
        }
    }
}

impl LinearOp for NoClickGenerator {
    fn dim(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let d = self.dim;
        y.fill(C64::new(0.0, 0.0));
        // -i (H_cond rho - rho H_cond^dag)
        self.h_cond.mul_left_slice(x, y, -C64::i());
        self.h_cond_dag.mul_right_slice(x, y, C64::i());
        let mut l_rho = vec![C64::new(0.0, 0.0); d * d];
        for (l, l_dag, rate) in &self.feeds {
            l_rho.fill(C64::new(0.0, 0.0));
            l.mul_left_slice(x, &mut l_rho, C64::new(1.0, 0.0));
            l_dag.mul_right_slice(&l_rho, y, C64::new(*rate, 0.0));
        }
    }
}

/// Dense propagation of the ensemble-average master equation; returns the
/// state at each requested time (ascending). Trace is preserved within 1e-8
/// per unit time.
pub fn master_equation_evolve(
    model: &JumpModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    if rho0.basis() != model.basis() {
        return Err(Error::BasisMismatch {
            left: model.dim(),
            right: rho0.basis().total_dim(),
        });
    }
    let d = model.dim();
    let generator = LindbladGenerator::new(model);
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| generator.apply(y, dy);

    let opts = OdeOptions {
        rel_tol: 1e-8,
        abs_tol: 1e-11,
        ..Default::default()
    };
    let mut y = rho0.entries().as_slice().unwrap().to_vec();
    let mut t_prev = 0.0;
    let mut result = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t < t_prev {
            return Err(Error::Config("time grid must be ascending".into()));
        }
        if t > t_prev {
            integrate(&rhs, &mut y, t_prev, t, &opts, &mut |_, _| {})?;
            t_prev = t;
        }
        let entries = Array2::from_shape_vec((d, d), y.clone()).unwrap();
        result.push(DensityMatrix::new(model.basis().clone(), entries)?);
    }
    Ok(result)
}

/// Propagate the unnormalised no-accessible-click conditional state for time
/// `t`; the trace of the result is the no-click probability.
pub fn conditional_no_click_evolve(
    model: &JumpModel,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    if rho0.basis() != model.basis() {
        return Err(Error::BasisMismatch {
            left: model.dim(),
            right: rho0.basis().total_dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let generator = NoClickGenerator::new(model);
    let y = expm_multiply(
        &generator,
        rho0.entries().as_slice().unwrap(),
        t,
        1e-10,
        30,
    )?;
    let d = model.dim();
    DensityMatrix::new(
        model.basis().clone(),
        Array2::from_shape_vec((d, d), y).unwrap(),
    )
}

/// No-accessible-click survival probability at each grid time.
pub fn conditional_no_click_trace(
    model: &JumpModel,
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    let generator = NoClickGenerator::new(model);
    let d = model.dim();
    let mut y = rho0.entries().as_slice().unwrap().to_vec();
    let mut t_prev = 0.0;
    let mut traces = Vec::with_capacity(t_grid.len());
    let mut prev_trace = f64::INFINITY;
    for &t in t_grid {
        if t > t_prev {
            y = expm_multiply(&generator, &y, t - t_prev, 1e-10, 30)?;
            t_prev = t;
        }
        let tr: C64 = (0..d).map(|i| y[i * d + i]).sum();
        let tr = tr.re;
        assert!(
            tr <= prev_trace * (1.0 + 1e-9) + 1e-12,
            "no-click trace must be non-increasing"
        );
        prev_trace = tr;
        traces.push(tr);
    }
    Ok(traces)
}

/// `Tr[op rho]` helper for ensemble comparisons.
pub fn dense_expectation(op: &Operator, rho: &DensityMatrix) -> C64 {
    expectation_dense(op, rho.entries())
}
