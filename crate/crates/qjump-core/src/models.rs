//! Jump models for the three physical systems: driven two-level atom,
//! displaced-frame (weak-coupling) optomechanics, and strong-coupling
//! non-linear optomechanics.
//!
//! A [`JumpModel`] packages a Hermitian Hamiltonian plus decay channels; the
//! non-Hermitian conditional Hamiltonian `H_cond = H - (i/2) sum_n rate_n
//! L_n^dag L_n` is derived at construction (hbar = 1 throughout).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::quantum::{annihilation_operator, tensor_product, Basis, Operator, StateVector};

/// Driven two-level atom. `decay` is the time unit and defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub rabi: f64,
    pub detuning: f64,
    pub decay: f64,
}

impl AtomParams {
    pub fn new(rabi: f64, detuning: f64) -> Self {
        Self {
            rabi,
            detuning,
            decay: 1.0,
        }
    }
}

/// Driven optomechanical cavity. `kappa` is the time unit and defaults to 1;
/// `kappa_d + kappa_l = kappa` must hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptomechParams {
    pub detuning: f64,
    pub mech_freq: f64,
    pub rabi: f64,
    pub coupling: f64,
    pub kappa: f64,
    pub kappa_d: f64,
    pub kappa_l: f64,
    pub gamma: f64,
    pub mbar: f64,
}

impl OptomechParams {
    pub fn validate(&self) -> Result<()> {
        if self.kappa <= 0.0 {
            return Err(Error::SingularParameter("kappa must be positive"));
        }
        if (self.kappa_d + self.kappa_l - self.kappa).abs() > 1e-12 * self.kappa {
            return Err(Error::Config(format!(
                "kappa_d + kappa_l = {} must equal kappa = {}",
                self.kappa_d + self.kappa_l,
                self.kappa
            )));
        }
        if self.kappa_d < 0.0 || self.kappa_l < 0.0 || self.gamma < 0.0 || self.mbar < 0.0 {
            return Err(Error::Config("rates and mbar must be nonnegative".into()));
        }
        Ok(())
    }

    /// Weak-coupling operating point: `10 g = omega_M / 6 = kappa`,
    /// `Omega = 2 omega_M`, `gamma = omega_M / 1200`, `mbar = 1`, and a 90/10
    /// detected/lost split.
    pub fn weak_coupling(detuning: f64) -> Self {
        let omega_m = 6.0;
        Self {
            detuning,
            mech_freq: omega_m,
            rabi: 2.0 * omega_m,
            coupling: 0.1,
            kappa: 1.0,
            kappa_d: 0.9,
            kappa_l: 0.1,
            gamma: omega_m / 1200.0,
            mbar: 1.0,
        }
    }

    /// Strong-coupling operating point: `g / 4 = omega_M / (4 sqrt 2) =
    /// kappa`, `Omega = 0.3 omega_M`, `gamma = 1e-3 omega_M`, `mbar = 1`,
    /// 90/10 detected/lost split.
    pub fn strong_coupling(detuning: f64) -> Self {
        let omega_m = 4.0 * 2f64.sqrt();
        Self {
            detuning,
            mech_freq: omega_m,
            rabi: 0.3 * omega_m,
            coupling: 4.0,
            kappa: 1.0,
            kappa_d: 0.9,
            kappa_l: 0.1,
            gamma: 1e-3 * omega_m,
            mbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelLabel {
    Detected,
    Lost,
    PhononEmit,
    PhononAbsorb,
}

/// One decay channel of the unravelling.
#[derive(Debug, Clone)]
pub struct DecayChannel {
    pub operator: Operator,
    pub rate: f64,
    pub accessible: bool,
    pub label: ChannelLabel,
}

/// Complete unravelling description of one physical system at one parameter
/// value.
#[derive(Debug, Clone)]
pub struct JumpModel {
    basis: Basis,
    hamiltonian: Operator,
    conditional_hamiltonian: Operator,
    channels: Vec<DecayChannel>,
}

impl JumpModel {
    /// Build from a Hermitian Hamiltonian and channel list; channels with
    /// zero rate are dropped (avoids 0/0 in jump renormalisation).
    pub fn new(basis: Basis, hamiltonian: Operator, channels: Vec<DecayChannel>) -> Result<Self> {
        if hamiltonian.hermiticity_defect() > 1e-10 {
            return Err(Error::Config(
                "jump-model Hamiltonian is not Hermitian within 1e-10".into(),
            ));
        }
        let channels: Vec<DecayChannel> = channels.into_iter().filter(|c| c.rate > 0.0).collect();
        let mut h_cond = hamiltonian.clone();
        for ch in &channels {
            let ldl = ch.operator.dagger().matmul(&ch.operator);
            h_cond = h_cond.add_scaled(&ldl, C64::new(0.0, -0.5 * ch.rate));
        }
        Ok(Self {
            basis,
            hamiltonian,
            conditional_hamiltonian: h_cond,
            channels,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.total_dim()
    }

    pub fn hamiltonian(&self) -> &Operator {
        &self.hamiltonian
    }

    pub fn conditional_hamiltonian(&self) -> &Operator {
        &self.conditional_hamiltonian
    }

    pub fn channels(&self) -> &[DecayChannel] {
        &self.channels
    }

    pub fn accessible_channels(&self) -> impl Iterator<Item = &DecayChannel> {
        self.channels.iter().filter(|c| c.accessible)
    }

    /// Operator of the first accessible (detected) channel.
    pub fn detected_operator(&self) -> Result<&Operator> {
        self.accessible_channels()
            .next()
            .map(|c| &c.operator)
            .ok_or_else(|| Error::Config("model has no accessible channel".into()))
    }
}

/// Two-level atom with perfect photon detection: a single accessible channel.
pub fn build_atom_model(p: &AtomParams) -> Result<JumpModel> {
    if p.decay <= 0.0 {
        return Err(Error::SingularParameter("atom decay rate must be positive"));
    }
    let sigma_minus = annihilation_operator(2)?;
    let basis = sigma_minus.basis().clone();
    let proj_e = sigma_minus.dagger().matmul(&sigma_minus);
    let h = proj_e.scaled(C64::new(-p.detuning, 0.0)).add(
        &sigma_minus
            .add(&sigma_minus.dagger())
            .scaled(C64::new(0.5 * p.rabi, 0.0)),
    );
    let channels = vec![DecayChannel {
        operator: sigma_minus,
        rate: p.decay,
        accessible: true,
        label: ChannelLabel::Detected,
    }];
    JumpModel::new(basis, h, channels)
}

/// Ground state of the atom.
pub fn atom_ground_state(model: &JumpModel) -> StateVector {
    StateVector::fock(model.basis(), &[0])
}

fn two_mode_ops(cav_dim: usize, mech_dim: usize) -> Result<(Basis, Operator, Operator)> {
    let a_local = annihilation_operator(cav_dim)?;
    let b_local = annihilation_operator(mech_dim)?;
    let id_c = Operator::identity(Basis::single(cav_dim)?);
    let id_m = Operator::identity(Basis::single(mech_dim)?);
    let a = tensor_product(&a_local, &id_m);
    let b = tensor_product(&id_c, &b_local);
    let basis = a.basis().clone();
    Ok((basis, a, b))
}

fn thermal_channels(b: &Operator, p: &OptomechParams) -> Vec<DecayChannel> {
    vec![
        DecayChannel {
            operator: b.clone(),
            rate: p.gamma * (p.mbar + 1.0),
            accessible: false,
            label: ChannelLabel::PhononEmit,
        },
        DecayChannel {
            operator: b.dagger(),
            rate: p.gamma * p.mbar,
            accessible: false,
            label: ChannelLabel::PhononAbsorb,
        },
    ]
}

/// Full non-linear optomechanical model on a truncated two-mode Fock space.
pub fn build_nonlinear_model(
    p: &OptomechParams,
    cav_dim: usize,
    mech_dim: usize,
) -> Result<JumpModel> {
    p.validate()?;
    let (basis, a, b) = two_mode_ops(cav_dim, mech_dim)?;
    let n_cav = a.dagger().matmul(&a);
    let n_mech = b.dagger().matmul(&b);
    let x_mech = b.add(&b.dagger());
    let h = n_cav
        .scaled(C64::new(-p.detuning, 0.0))
        .add(&n_mech.scaled(C64::new(p.mech_freq, 0.0)))
        .add(&a.add(&a.dagger()).scaled(C64::new(0.5 * p.rabi, 0.0)))
        .add(&n_cav.matmul(&x_mech).scaled(C64::new(p.coupling, 0.0)));
    let mut channels = vec![
        DecayChannel {
            operator: a.clone(),
            rate: p.kappa_d,
            accessible: true,
            label: ChannelLabel::Detected,
        },
        DecayChannel {
            operator: a,
            rate: p.kappa_l,
            accessible: false,
            label: ChannelLabel::Lost,
        },
    ];
    channels.extend(thermal_channels(&b, p));
    JumpModel::new(basis, h, channels)
}

/// Classical steady state of the coupled mode amplitudes.
#[derive(Debug, Clone, Copy)]
pub struct LinearSteadyState {
    pub alpha_ss: C64,
    pub beta_ss: C64,
    pub effective_detuning: f64,
}

const STEADY_STATE_TOL: f64 = 1e-10;

fn langevin_residual(p: &OptomechParams, alpha: C64, beta: C64) -> f64 {
    let delta_eff = p.detuning - p.coupling * (beta + beta.conj()).re;
    let r_alpha = C64::new(-0.5 * p.kappa, delta_eff) * alpha - C64::new(0.0, 0.5 * p.rabi);
    let r_beta =
        C64::new(-0.5 * p.gamma, -p.mech_freq) * beta - C64::i() * p.coupling * alpha.norm_sqr();
    (r_alpha.norm_sqr() + r_beta.norm_sqr()).sqrt()
}

/// Simultaneous fixed point of the stationary mode equations, found by damped
/// fixed-point iteration with a time-integration fallback for oscillatory
/// cases.
pub fn classical_steady_state(p: &OptomechParams) -> Result<LinearSteadyState> {
    p.validate()?;
    let max_iters = 10_000;
    let damping = 0.5;
    let mut alpha = C64::new(0.0, 0.0);
    let mut beta = C64::new(0.0, 0.0);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let delta_eff = p.detuning - p.coupling * (beta + beta.conj()).re;
        let alpha_new = C64::new(0.0, 0.5 * p.rabi) / C64::new(-0.5 * p.kappa, delta_eff);
        let beta_new =
            C64::i() * p.coupling * alpha_new.norm_sqr() / C64::new(-0.5 * p.gamma, -p.mech_freq);
        alpha = alpha * (1.0 - damping) + alpha_new * damping;
        beta = beta * (1.0 - damping) + beta_new * damping;
        residual = langevin_residual(p, alpha, beta);
        if residual < STEADY_STATE_TOL {
            let effective_detuning = p.detuning - p.coupling * (beta + beta.conj()).re;
            return Ok(LinearSteadyState {
                alpha_ss: alpha,
                beta_ss: beta,
                effective_detuning,
            });
        }
    }
    // oscillatory: integrate the classical equations towards the attractor
    let slowest = [p.kappa, p.gamma]
        .into_iter()
        .filter(|&r| r > 0.0)
        .fold(f64::INFINITY, f64::min);
    let horizon = 50.0 / slowest;
    let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
        let (al, be) = (y[0], y[1]);
        let delta_eff = p.detuning - p.coupling * (be + be.conj()).re;
        dy[0] = C64::new(-0.5 * p.kappa, delta_eff) * al - C64::new(0.0, 0.5 * p.rabi);
        dy[1] = C64::new(-0.5 * p.gamma, -p.mech_freq) * be - C64::i() * p.coupling * al.norm_sqr();
    };
    let mut y = vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    let opts = OdeOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    integrate(&rhs, &mut y, 0.0, horizon, &opts, &mut |_, _| {}).map_err(|_| {
        Error::NoConvergence {
            iters: max_iters,
            residual,
        }
    })?;
    let (alpha, beta) = (y[0], y[1]);
    let residual = langevin_residual(p, alpha, beta);
    if residual >= STEADY_STATE_TOL {
        return Err(Error::NoConvergence {
            iters: max_iters,
            residual,
        });
    }
    Ok(LinearSteadyState {
        alpha_ss: alpha,
        beta_ss: beta,
        effective_detuning: p.detuning - p.coupling * (beta + beta.conj()).re,
    })
}

/// Displaced-frame model around the classical steady state.
///
/// The Hamiltonian is the linearised two-mode form with `G = g alpha_ss`,
/// plus the Hermitian term `(i kappa / 2)(alpha a^dag - alpha^* a)` that
/// arises when the optical dissipator is re-split around the physical jump
/// operator `alpha + a`. Without it the displaced vacuum is not an
/// eigenstate of the no-jump generator and the click process at `g = 0`
/// would fail to be Poissonian.
pub fn build_linear_model(
    p: &OptomechParams,
    ss: &LinearSteadyState,
    cav_dim: usize,
    mech_dim: usize,
) -> Result<JumpModel> {
    p.validate()?;
    let (basis, a, b) = two_mode_ops(cav_dim, mech_dim)?;
    let n_cav = a.dagger().matmul(&a);
    let n_mech = b.dagger().matmul(&b);
    let x_mech = b.add(&b.dagger());
    let g_eff = ss.alpha_ss * p.coupling;
    let coupling_op = a
        .dagger()
        .scaled(g_eff)
        .add(&a.scaled(g_eff.conj()))
        .matmul(&x_mech);
    let drive_residual = a
        .dagger()
        .scaled(C64::i() * 0.5 * p.kappa * ss.alpha_ss)
        .add(&a.scaled(-C64::i() * 0.5 * p.kappa * ss.alpha_ss.conj()));
    let h = n_cav
        .scaled(C64::new(-ss.effective_detuning, 0.0))
        .add(&n_mech.scaled(C64::new(p.mech_freq, 0.0)))
        .add(&coupling_op)
        .add(&drive_residual);

    let displaced = Operator::identity(basis.clone())
        .scaled(ss.alpha_ss)
        .add(&a);
    let mut channels = vec![
        DecayChannel {
            operator: displaced.clone(),
            rate: p.kappa_d,
            accessible: true,
            label: ChannelLabel::Detected,
        },
        DecayChannel {
            operator: displaced,
            rate: p.kappa_l,
            accessible: false,
            label: ChannelLabel::Lost,
        },
    ];
    channels.extend(thermal_channels(&b, p));
    JumpModel::new(basis, h, channels)
}

/// Detuning at which the n-photon cavity level is degenerate with the ground
/// state: `Delta_n = -n g^2 / omega_M`.
pub fn resonant_detuning(n: u32, p: &OptomechParams) -> Result<f64> {
    if n < 1 {
        return Err(Error::Config("resonance order must be >= 1".into()));
    }
    if p.mech_freq == 0.0 {
        return Err(Error::SingularParameter("mech_freq must be nonzero"));
    }
    Ok(-(n as f64) * p.coupling * p.coupling / p.mech_freq)
}

/// Energy of the product level `|n_cav, n_mech>`:
/// `-Delta n_cav + omega_M n_mech - (g^2/omega_M) n_cav^2`.
pub fn energy_level(n_cav: u32, n_mech: u32, p: &OptomechParams) -> Result<f64> {
    if p.mech_freq == 0.0 {
        return Err(Error::SingularParameter("mech_freq must be nonzero"));
    }
    let nc = n_cav as f64;
    Ok(-p.detuning * nc + p.mech_freq * n_mech as f64
        - p.coupling * p.coupling / p.mech_freq * nc * nc)
}

/// Which physical system a configuration document describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "atom")]
    Atom,
    #[serde(rename = "linear-optomech")]
    LinearOptomech,
    #[serde(rename = "nonlinear-optomech")]
    NonlinearOptomech,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Atom => "atom",
            ModelKind::LinearOptomech => "linear-optomech",
            ModelKind::NonlinearOptomech => "nonlinear-optomech",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atom" => Ok(ModelKind::Atom),
            "linear-optomech" => Ok(ModelKind::LinearOptomech),
            "nonlinear-optomech" => Ok(ModelKind::NonlinearOptomech),
            other => Err(Error::Config(format!("unknown model kind '{other}'"))),
        }
    }
}

fn default_kappa() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    1.0
}

/// JSON configuration document shared by all model families.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub delta: f64,
    pub rabi: f64,
    #[serde(default)]
    pub omega_m: f64,
    #[serde(default)]
    pub g: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub kappa_d: f64,
    #[serde(default)]
    pub kappa_l: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub mbar: f64,
    #[serde(default)]
    pub cav_dim: Option<usize>,
    #[serde(default)]
    pub mech_dim: Option<usize>,
}

/// Default Fock truncations: strong-coupling model 6 x 15, displaced
/// weak-coupling model 5 x 8.
pub const NONLINEAR_DEFAULT_DIMS: (usize, usize) = (6, 15);
pub const LINEAR_DEFAULT_DIMS: (usize, usize) = (5, 8);

impl ModelConfig {
    pub fn from_atom(p: &AtomParams) -> Self {
        Self {
            model: ModelKind::Atom,
            delta: p.detuning,
            rabi: p.rabi,
            omega_m: 0.0,
            g: 0.0,
            kappa: 1.0,
            kappa_d: 0.0,
            kappa_l: 0.0,
            gamma: p.decay,
            mbar: 0.0,
            cav_dim: None,
            mech_dim: None,
        }
    }

    pub fn from_optomech(kind: ModelKind, p: &OptomechParams, dims: (usize, usize)) -> Self {
        Self {
            model: kind,
            delta: p.detuning,
            rabi: p.rabi,
            omega_m: p.mech_freq,
            g: p.coupling,
            kappa: p.kappa,
            kappa_d: p.kappa_d,
            kappa_l: p.kappa_l,
            gamma: p.gamma,
            mbar: p.mbar,
            cav_dim: Some(dims.0),
            mech_dim: Some(dims.1),
        }
    }

    pub fn atom_params(&self) -> AtomParams {
        AtomParams {
            rabi: self.rabi,
            detuning: self.delta,
            decay: self.gamma,
        }
    }

    pub fn optomech_params(&self) -> OptomechParams {
        OptomechParams {
            detuning: self.delta,
            mech_freq: self.omega_m,
            rabi: self.rabi,
            coupling: self.g,
            kappa: self.kappa,
            kappa_d: self.kappa_d,
            kappa_l: self.kappa_l,
            gamma: self.gamma,
            mbar: self.mbar,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        let defaults = match self.model {
            ModelKind::LinearOptomech => LINEAR_DEFAULT_DIMS,
            _ => NONLINEAR_DEFAULT_DIMS,
        };
        (
            self.cav_dim.unwrap_or(defaults.0),
            self.mech_dim.unwrap_or(defaults.1),
        )
    }

    /// Build the jump model at `delta` (overriding the document's value) and
    /// its initial state: atom ground state, two-mode vacuum for the
    /// non-linear model, displaced-frame vacuum for the linear one.
    pub fn build(&self, delta: f64) -> Result<(JumpModel, StateVector)> {
        match self.model {
            ModelKind::Atom => {
                let mut p = self.atom_params();
                p.detuning = delta;
                let model = build_atom_model(&p)?;
                let init = atom_ground_state(&model);
                Ok((model, init))
            }
            ModelKind::NonlinearOptomech => {
                let mut p = self.optomech_params();
                p.detuning = delta;
                let (cd, md) = self.dims();
                let model = build_nonlinear_model(&p, cd, md)?;
                let init = StateVector::fock(model.basis(), &[0, 0]);
                Ok((model, init))
            }
            ModelKind::LinearOptomech => {
                let mut p = self.optomech_params();
                p.detuning = delta;
                let (cd, md) = self.dims();
                let ss = classical_steady_state(&p)?;
                let model = build_linear_model(&p, &ss, cd, md)?;
                let init = StateVector::fock(model.basis(), &[0, 0]);
                Ok((model, init))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn atom_hamiltonian_on_resonance() {
        let model = build_atom_model(&AtomParams::new(2.0, 0.0)).unwrap();
        let h = model.hamiltonian().to_dense();
        assert_abs_diff_eq!(h[(0, 0)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 1)].norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(0, 1)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h[(1, 0)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn atom_conditional_shift_is_excited_projector() {
        let model = build_atom_model(&AtomParams::new(2.0, 1.3)).unwrap();
        let diff = model
            .conditional_hamiltonian()
            .add_scaled(model.hamiltonian(), C64::new(-1.0, 0.0))
            .to_dense();
        assert_abs_diff_eq!(diff[(0, 0)].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(diff[(1, 1)].re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(diff[(1, 1)].im, -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(diff[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn decoupled_nonlinear_hamiltonian_is_diagonal() {
        let mut p = OptomechParams::strong_coupling(-1.5);
        p.coupling = 0.0;
        p.rabi = 0.0;
        let model = build_nonlinear_model(&p, 3, 4).unwrap();
        let h = model.hamiltonian().to_dense();
        for nc in 0..3u32 {
            for nm in 0..4u32 {
                let idx = model.basis().flat_index(&[nc as usize, nm as usize]);
                let expect = -p.detuning * nc as f64 + p.mech_freq * nm as f64;
                assert_abs_diff_eq!(h[(idx, idx)].re, expect, epsilon = 1e-12);
            }
        }
        let offdiag_max = h
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, v)| v.norm())
            .fold(0.0f64, f64::max);
        assert_abs_diff_eq!(offdiag_max, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn strong_coupling_channel_rates() {
        let p = OptomechParams::strong_coupling(-2.0);
        let model = build_nonlinear_model(&p, 3, 4).unwrap();
        let rates: Vec<(ChannelLabel, f64)> =
            model.channels().iter().map(|c| (c.label, c.rate)).collect();
        assert_eq!(rates.len(), 4);
        assert_eq!(rates[0].0, ChannelLabel::Detected);
        assert_abs_diff_eq!(rates[0].1, 0.9, epsilon = 1e-15);
        assert_eq!(rates[1].0, ChannelLabel::Lost);
        assert_abs_diff_eq!(rates[1].1, 0.1, epsilon = 1e-15);
        assert_eq!(rates[2].0, ChannelLabel::PhononEmit);
        assert_abs_diff_eq!(rates[2].1, 2.0 * p.gamma, epsilon = 1e-15);
        assert_eq!(rates[3].0, ChannelLabel::PhononAbsorb);
        assert_abs_diff_eq!(rates[3].1, p.gamma, epsilon = 1e-15);
    }

    #[test]
    fn zero_temperature_drops_absorption_channel() {
        let mut p = OptomechParams::strong_coupling(-2.0);
        p.mbar = 0.0;
        let model = build_nonlinear_model(&p, 3, 4).unwrap();
        assert_eq!(model.channels().len(), 3);
        assert!(model
            .channels()
            .iter()
            .all(|c| c.label != ChannelLabel::PhononAbsorb));
    }

    #[test]
    fn steady_state_decoupled_closed_form() {
        let mut p = OptomechParams::weak_coupling(0.7);
        p.coupling = 0.0;
        let ss = classical_steady_state(&p).unwrap();
        let expect = p.rabi * p.rabi / (4.0 * p.detuning * p.detuning + p.kappa * p.kappa);
        assert_abs_diff_eq!(ss.alpha_ss.norm_sqr(), expect, epsilon = 1e-10);
        assert_abs_diff_eq!(ss.beta_ss.norm(), 0.0, epsilon = 1e-12);

        let mut p2 = OptomechParams::weak_coupling(0.0);
        p2.coupling = 0.0;
        p2.rabi = 2.0;
        let ss2 = classical_steady_state(&p2).unwrap();
        assert_abs_diff_eq!(ss2.alpha_ss.norm_sqr(), 4.0, epsilon = 1e-10);
    }

    /// Damped fixed point cross-checked by long-time integration of the
    /// classical mode equations (independent route).
    #[test]
    fn steady_state_matches_time_integration() {
        for delta in [-1.0, -7.0] {
            let p = OptomechParams::weak_coupling(delta);
            let ss = classical_steady_state(&p).unwrap();
            assert!(langevin_residual(&p, ss.alpha_ss, ss.beta_ss) < 1e-10);
            assert_abs_diff_eq!(
                ss.effective_detuning,
                p.detuning - p.coupling * (ss.beta_ss + ss.beta_ss.conj()).re,
                epsilon = 1e-15
            );

            let rhs = |_t: f64, y: &[C64], dy: &mut [C64]| {
                let (al, be) = (y[0], y[1]);
                let delta_eff = p.detuning - p.coupling * (be + be.conj()).re;
                dy[0] = C64::new(-0.5 * p.kappa, delta_eff) * al - C64::new(0.0, 0.5 * p.rabi);
                dy[1] = C64::new(-0.5 * p.gamma, -p.mech_freq) * be
                    - C64::i() * p.coupling * al.norm_sqr();
            };
            let mut y = vec![C64::new(0.0, 0.0); 2];
            let horizon = 50.0 / p.gamma.min(p.kappa);
            integrate(
                &rhs,
                &mut y,
                0.0,
                horizon,
                &OdeOptions {
                    rel_tol: 1e-11,
                    abs_tol: 1e-13,
                    ..Default::default()
                },
                &mut |_, _| {},
            )
            .unwrap();
            assert_abs_diff_eq!(y[0].re, ss.alpha_ss.re, epsilon = 1e-6);
            assert_abs_diff_eq!(y[0].im, ss.alpha_ss.im, epsilon = 1e-6);
            assert_abs_diff_eq!(y[1].re, ss.beta_ss.re, epsilon = 1e-6);
            assert_abs_diff_eq!(y[1].im, ss.beta_ss.im, epsilon = 1e-6);
        }
    }

    #[test]
    fn displaced_jump_leaves_vacuum_invariant() {
        let mut p = OptomechParams::weak_coupling(-1.0);
        p.coupling = 0.0;
        let ss = classical_steady_state(&p).unwrap();
        let model = build_linear_model(&p, &ss, 4, 4).unwrap();
        let vac = StateVector::fock(model.basis(), &[0, 0]);
        let jumped = model.channels()[0].operator.apply_state(&vac).unwrap();
        // proportional to the vacuum: overlap magnitude equals norm product
        let overlap: C64 = jumped
            .amplitudes()
            .iter()
            .zip(vac.amplitudes().iter())
            .map(|(a, b)| b.conj() * a)
            .sum();
        assert_abs_diff_eq!(
            overlap.norm(),
            jumped.norm_squared().sqrt(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            jumped.norm_squared(),
            ss.alpha_ss.norm_sqr(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn resonant_detuning_values() {
        let p = OptomechParams::strong_coupling(0.0);
        let d1 = resonant_detuning(1, &p).unwrap();
        let d2 = resonant_detuning(2, &p).unwrap();
        assert_abs_diff_eq!(d1, -2.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(d2, -4.0 * 2f64.sqrt(), epsilon = 1e-14);
        assert!((d1 + 2.83).abs() < 0.01);
        assert!((d2 + 5.66).abs() < 0.01);

        let mut pg = p;
        pg.coupling = 0.0;
        for n in 1..5 {
            assert_abs_diff_eq!(resonant_detuning(n, &pg).unwrap(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn energy_levels() {
        let mut p = OptomechParams::strong_coupling(0.0);
        // resonance makes E(n, 0) vanish exactly
        for n in 1..=6u32 {
            p.detuning = resonant_detuning(n, &p).unwrap();
            assert_abs_diff_eq!(energy_level(n, 0, &p).unwrap(), 0.0, epsilon = 1e-12);
        }
        // empty cavity leaves the bare mechanical ladder
        for nm in 0..4u32 {
            assert_abs_diff_eq!(
                energy_level(0, nm, &p).unwrap(),
                p.mech_freq * nm as f64,
                epsilon = 1e-12
            );
        }
        // two photons at the single-photon resonance
        p.detuning = resonant_detuning(1, &p).unwrap();
        let expect = -2.0 * p.coupling * p.coupling / p.mech_freq;
        assert_abs_diff_eq!(energy_level(2, 0, &p).unwrap(), expect, epsilon = 1e-12);
        assert!((expect + 5.66).abs() < 0.01);
    }

    /// Norm-decay bookkeeping: `i (H_cond - H_cond^dag) = sum_n rate_n
    /// L_n^dag L_n` entrywise.
    #[test]
    fn conditional_hamiltonian_antihermitian_part() {
        let atom = build_atom_model(&AtomParams::new(2.0, 1.0)).unwrap();
        let nl = build_nonlinear_model(&OptomechParams::strong_coupling(-2.8), 4, 6).unwrap();
        let p = OptomechParams::weak_coupling(-1.0);
        let ss = classical_steady_state(&p).unwrap();
        let lin = build_linear_model(&p, &ss, 4, 5).unwrap();
        for model in [&atom, &nl, &lin] {
            let hc = model.conditional_hamiltonian();
            let lhs = hc
                .add_scaled(&hc.dagger(), C64::new(-1.0, 0.0))
                .scaled(C64::i());
            let mut rhs = Operator::zeros(model.basis().clone());
            for ch in model.channels() {
                rhs = rhs.add_scaled(
                    &ch.operator.dagger().matmul(&ch.operator),
                    C64::new(ch.rate, 0.0),
                );
            }
            let diff = lhs.add_scaled(&rhs, C64::new(-1.0, 0.0));
            let scale = rhs.max_entry_norm().max(1.0);
            assert!(
                diff.max_entry_norm() / scale < 1e-12,
                "norm-decay bookkeeping violated"
            );
        }
    }

    #[test]
    fn model_config_round_trip() {
        let p = OptomechParams::strong_coupling(-5.0);
        let cfg = ModelConfig::from_optomech(ModelKind::NonlinearOptomech, &p, (6, 15));
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"model\":\"nonlinear-optomech\""));
        assert!(json.contains("\"omega_m\""));
        let back: ModelConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.optomech_params(), p);
        assert_eq!(back.dims(), (6, 15));
    }
}
