//! The two-field system the reduction starts from: condensate phi coupled
//! to the uncondensed density n_u,
//!
//! ```text
//! d phi/dt = (i hbar/2m) grad^2 phi + (Gamma n_u - gamma_c) phi / 2
//!            - i (g/hbar + Omega V) |phi|^2 phi
//! d n_u/dt = R - gamma_u n_u - Gamma |phi|^2 n_u + D_r grad^2 n_u
//! ```
//!
//! integrated in SI units as an independent oracle for the reduced
//! equation. The stepper is a palindromic five-stage splitting
//! A(h/2) B(h/2) C(h) B(h/2) A(h/2): exact exponential relaxation of n_u
//! against frozen phi, exact local gain/phase flow of phi against frozen
//! n_u, and exact spectral kinetic/diffusion factors. The uniform
//! stationary state is a fixed point of the full composition.

use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::cgle::{RawKernel, Stepper};
use crate::constants::HBAR;
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{reduce, PhysicalParams};
use crate::spectral::Spectral;
use crate::stability;
use crate::C64;

/// Condensate and thermal-cloud snapshot in SI units: `phi` in m^(-3/2),
/// `n_u` in m^(-3), `t` in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub grid: Grid,
    pub phi: Vec<C64>,
    pub n_u: Vec<f64>,
    pub t: f64,
}

/// Pump landscape: uniform `R`, or `R` inside a centered ball and zero
/// outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PumpProfile {
    Uniform,
    Truncated { radius: f64 },
}

/// Starting condition for [`run_coupled`].
#[derive(Debug, Clone, PartialEq)]
pub enum CoupledInit {
    /// Empty trap: `phi = 0`, `n_u = 0`.
    Zero,
    /// The uniform stationary lasing state.
    Stationary,
    /// Stationary state with multiplicative complex noise of RMS
    /// `noise_amp` on phi.
    StationaryNoise,
    Custom { phi: Vec<C64>, n_u: Vec<f64> },
}

/// Time-stepping knobs for the coupled system. Times are seconds. The
/// diagnostics records convert to `tau = gamma_c t` so they line up with
/// reduced-equation output.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledConfig {
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub pump: PumpProfile,
    pub seed: u64,
    /// Relative noise RMS used by [`CoupledInit::StationaryNoise`].
    pub noise_amp: f64,
    pub init: CoupledInit,
    /// Wavenumbers (1/m) whose spectral amplitudes go into the records.
    pub probes: Vec<f64>,
}

impl Default for CoupledConfig {
    fn default() -> Self {
        CoupledConfig {
            dt: 1e-5,
            t_end: 0.1,
            record_every: 100,
            pump: PumpProfile::Uniform,
            seed: 1,
            noise_amp: 1e-2,
            init: CoupledInit::StationaryNoise,
            probes: Vec::new(),
        }
    }
}

impl CoupledConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end = {} must be nonnegative",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.noise_amp >= 0.0 && self.noise_amp.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise_amp = {} must be nonnegative",
                self.noise_amp
            )));
        }
        if let PumpProfile::Truncated { radius } = self.pump {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "pump radius = {radius} must be positive"
                )));
            }
        }
        Ok(())
    }
}

/// Everything a coupled integration produces: snapshots and diagnostics at
/// the record cadence, plus the bookkeeping around the positivity clamp on
/// `n_u` (spectral diffusion of sharp profiles can undershoot zero by
/// round-off scale amounts; undershoots are clamped and counted).
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub snapshots: Vec<CoupledState>,
    pub records: Vec<DiagnosticsRecord>,
    pub nu_clamp_events: u64,
    /// Most negative pre-clamp `n_u` value seen, 0 when none went negative.
    pub min_nu_before_clamp: f64,
}

/// Uniform stationary lasing state `(n_c_star, n_u_star)`:
/// `n_u* = gamma_c / Gamma` saturates the gain and
/// `n_c* = (R Gamma / gamma_c - gamma_u) / Gamma` balances the pump.
pub fn stationary_point(p: &PhysicalParams) -> Result<(f64, f64)> {
    p.validate_for_coupled()?;
    if p.Gamma == 0.0 {
        return Err(Error::DegenerateParameter(
            "Gamma = 0 leaves the condensate unpumped, no stationary lasing state".into(),
        ));
    }
    let n_u = p.gamma_c / p.Gamma;
    let n_c = (p.R * p.Gamma / p.gamma_c - p.gamma_u) / p.Gamma;
    if n_c <= 0.0 {
        let epsilon = 0.5 * (p.R * p.Gamma / (p.gamma_u * p.gamma_c) - 1.0);
        return Err(Error::NoLasingState { epsilon });
    }
    Ok((n_c, n_u))
}

/// Quasi-static thermal cloud slaved to the condensate,
///
/// ```text
/// n_u = (R/gamma_u) (1 - (Gamma/gamma_u)|phi|^2
///                      - (D_r Gamma/gamma_u^2) grad^2 |phi|^2)
/// ```
///
/// the first-order adiabatic closure with the Laplacian acting spectrally
/// on the density.
pub fn quasi_static_nu(phi: &[C64], grid: &Grid, p: &PhysicalParams) -> Result<Vec<f64>> {
    p.validate_for_coupled()?;
    if phi.len() != grid.total() {
        return Err(Error::InvalidGrid(format!(
            "field has {} entries for a grid of {}",
            phi.len(),
            grid.total()
        )));
    }
    if phi.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite("quasi_static_nu input field".into()));
    }
    let gu = p.gamma_u;
    let mut rho_hat: Vec<C64> =
        phi.iter().map(|v| C64::new(v.norm_sqr(), 0.0)).collect();
    let mut spec = Spectral::new(grid);
    spec.forward(&mut rho_hat);
    for (v, k2) in rho_hat.iter_mut().zip(grid.k_squared()) {
        *v *= -k2;
    }
    spec.inverse(&mut rho_hat);
    let base = p.R / gu;
    Ok(phi
        .iter()
        .zip(&rho_hat)
        .map(|(v, lap)| {
            base * (1.0 - p.Gamma / gu * v.norm_sqr()
                - p.D_r * p.Gamma / (gu * gu) * lap.re)
        })
        .collect())
}

/// Time derivatives `(d phi/dt, d n_u/dt)` of the coupled system with a
/// uniform pump, evaluated spectrally. Meant for residual checks, not
/// integration.
pub fn coupled_rhs(state: &CoupledState, p: &PhysicalParams) -> Result<(Vec<C64>, Vec<f64>)> {
    p.validate_for_coupled()?;
    let grid = &state.grid;
    if state.phi.len() != grid.total() || state.n_u.len() != grid.total() {
        return Err(Error::InvalidGrid("state arrays do not match the grid".into()));
    }
    let mut spec = Spectral::new(grid);
    let k2 = grid.k_squared();

    let mut lap_phi = state.phi.clone();
    spec.forward(&mut lap_phi);
    for (v, k2) in lap_phi.iter_mut().zip(&k2) {
        *v *= -k2;
    }
    spec.inverse(&mut lap_phi);

    let mut lap_nu: Vec<C64> =
        state.n_u.iter().map(|&v| C64::new(v, 0.0)).collect();
    spec.forward(&mut lap_nu);
    for (v, k2) in lap_nu.iter_mut().zip(&k2) {
        *v *= -k2;
    }
    spec.inverse(&mut lap_nu);

    let b = p.g_over_hbar + p.Omega * p.V;
    let kin = C64::new(0.0, 0.5 * HBAR / p.mass);
    let dphi = state
        .phi
        .iter()
        .zip(&lap_phi)
        .zip(&state.n_u)
        .map(|((phi, lap), nu)| {
            kin * lap
                + 0.5 * (p.Gamma * nu - p.gamma_c) * phi
                - C64::new(0.0, b) * phi.norm_sqr() * phi
        })
        .collect();
    let dnu = state
        .n_u
        .iter()
        .zip(&lap_nu)
        .zip(&state.phi)
        .map(|((nu, lap), phi)| {
            p.R - p.gamma_u * nu - p.Gamma * phi.norm_sqr() * nu + p.D_r * lap.re
        })
        .collect();
    Ok((dphi, dnu))
}

fn pump_field(p: &PhysicalParams, grid: &Grid, pump: &PumpProfile) -> Vec<f64> {
    match pump {
        PumpProfile::Uniform => vec![p.R; grid.total()],
        PumpProfile::Truncated { radius } => {
            let xs = grid.x_axis();
            let mid = grid.length() / 2.0;
            let n = grid.n();
            (0..grid.total())
                .map(|i| {
                    let dx = xs[i % n] - mid;
                    let r = match grid.dim() {
                        1 => dx.abs(),
                        _ => {
                            let dy = xs[i / n] - mid;
                            (dx * dx + dy * dy).sqrt()
                        }
                    };
                    if r <= *radius {
                        p.R
                    } else {
                        0.0
                    }
                })
                .collect()
        }
    }
}

fn resolve_init(
    p: &PhysicalParams,
    grid: &Grid,
    config: &CoupledConfig,
) -> Result<(Vec<C64>, Vec<f64>)> {
    let total = grid.total();
    match &config.init {
        CoupledInit::Zero => Ok((vec![C64::new(0.0, 0.0); total], vec![0.0; total])),
        CoupledInit::Stationary => {
            let (n_c, n_u) = stationary_point(p)?;
            Ok((vec![C64::new(n_c.sqrt(), 0.0); total], vec![n_u; total]))
        }
        CoupledInit::StationaryNoise => {
            let (n_c, n_u) = stationary_point(p)?;
            let amp = n_c.sqrt();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
            let quad = Normal::new(0.0, config.noise_amp / 2.0f64.sqrt())
                .map_err(|_| Error::InvalidConfig("noise_amp is not usable".into()))?;
            let phi = (0..total)
                .map(|_| {
                    let eta = C64::new(quad.sample(&mut rng), quad.sample(&mut rng));
                    amp * (C64::new(1.0, 0.0) + eta)
                })
                .collect();
            Ok((phi, vec![n_u; total]))
        }
        CoupledInit::Custom { phi, n_u } => {
            if phi.len() != total || n_u.len() != total {
                return Err(Error::InvalidGrid(format!(
                    "custom init has {} phi and {} n_u entries for a grid of {total}",
                    phi.len(),
                    n_u.len()
                )));
            }
            if phi.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
                || n_u.iter().any(|v| !v.is_finite())
            {
                return Err(Error::NonFinite("custom coupled init".into()));
            }
            if n_u.iter().any(|&v| v < 0.0) {
                return Err(Error::InvalidConfig("initial n_u must be nonnegative".into()));
            }
            Ok((phi.clone(), n_u.clone()))
        }
    }
}

struct CoupledStepper {
    p: PhysicalParams,
    pump: Vec<f64>,
    spec: Spectral,
    /// Spectral factors for one full step: kinetic phase on phi, diffusion
    /// decay on n_u.
    phi_factors: Vec<C64>,
    nu_factors: Vec<f64>,
    scratch: Vec<C64>,
    clamp_events: u64,
    min_nu: f64,
}

impl CoupledStepper {
    fn new(p: &PhysicalParams, grid: &Grid, pump: Vec<f64>, dt: f64) -> Self {
        let k2 = grid.k_squared();
        let phi_factors = k2
            .iter()
            .map(|&k2| (C64::new(0.0, -0.5 * HBAR / p.mass * k2) * dt).exp())
            .collect();
        let nu_factors = k2.iter().map(|&k2| (-p.D_r * k2 * dt).exp()).collect();
        CoupledStepper {
            p: *p,
            pump,
            spec: Spectral::new(grid),
            phi_factors,
            nu_factors,
            scratch: vec![C64::new(0.0, 0.0); grid.total()],
            clamp_events: 0,
            min_nu: 0.0,
        }
    }

    /// Exact relaxation of n_u toward R/(gamma_u + Gamma |phi|^2) with phi
    /// frozen.
    fn a_stage(&self, n_u: &mut [f64], phi: &[C64], h: f64) {
        for ((nu, phi), pump) in n_u.iter_mut().zip(phi).zip(&self.pump) {
            let beta = self.p.gamma_u + self.p.Gamma * phi.norm_sqr();
            let decay = (-beta * h).exp();
            *nu = *nu * decay + pump * (-(-beta * h).exp_m1()) / beta;
        }
    }

    /// Exact local gain and interaction-phase flow of phi with n_u frozen:
    /// the density follows rho0 e^(2at) with a = (Gamma n_u - gamma_c)/2,
    /// and the phase integrates -(g/hbar + Omega V) rho(t).
    fn b_stage(&self, phi: &mut [C64], n_u: &[f64], h: f64) {
        let b = self.p.g_over_hbar + self.p.Omega * self.p.V;
        for (phi, nu) in phi.iter_mut().zip(n_u) {
            let a = 0.5 * (self.p.Gamma * nu - self.p.gamma_c);
            let rho0 = phi.norm_sqr();
            let theta = if a == 0.0 {
                -b * rho0 * h
            } else {
                -b * rho0 * (2.0 * a * h).exp_m1() / (2.0 * a)
            };
            *phi *= C64::from_polar((a * h).exp(), theta);
        }
    }

    /// Exact spectral kinetic step for phi and diffusion step for n_u,
    /// then the positivity clamp.
    fn c_stage(&mut self, phi: &mut [C64], n_u: &mut [f64]) {
        self.spec.forward(phi);
        for (v, f) in phi.iter_mut().zip(&self.phi_factors) {
            *v *= f;
        }
        self.spec.inverse(phi);

        for (s, nu) in self.scratch.iter_mut().zip(n_u.iter()) {
            *s = C64::new(*nu, 0.0);
        }
        self.spec.forward(&mut self.scratch);
        for (v, f) in self.scratch.iter_mut().zip(&self.nu_factors) {
            *v *= f;
        }
        self.spec.inverse(&mut self.scratch);
        for (nu, s) in n_u.iter_mut().zip(&self.scratch) {
            let v = s.re;
            if v < 0.0 {
                self.clamp_events += 1;
                self.min_nu = self.min_nu.min(v);
                *nu = 0.0;
            } else {
                *nu = v;
            }
        }
    }

    fn step(&mut self, state: &mut CoupledState, dt: f64) {
        let h = 0.5 * dt;
        self.a_stage(&mut state.n_u, &state.phi, h);
        let (phi, n_u) = (&mut state.phi, &state.n_u);
        self.b_stage(phi, n_u, h);
        self.c_stage(&mut state.phi, &mut state.n_u);
        self.b_stage(&mut state.phi, &state.n_u, h);
        self.a_stage(&mut state.n_u, &state.phi, h);
        state.t += dt;
    }
}

fn stiffness_guard(p: &PhysicalParams, dt: f64, max_nu: f64, max_nc: f64, t: f64) -> Result<()> {
    let fastest = p
        .gamma_u
        .max(p.Gamma * max_nu)
        .max(p.g_over_hbar.abs() * max_nc);
    if dt * fastest >= 0.1 {
        return Err(Error::GuardViolation(format!(
            "dt * fastest rate = {:.3e} at t = {t:.3e} s; the splitting needs < 0.1",
            dt * fastest
        )));
    }
    Ok(())
}

/// Integrates the coupled system to `config.t_end`, recording snapshots
/// and diagnostics at step 0, every `record_every` steps, and at the last
/// step. Deterministic for a fixed config.
pub fn run_coupled(p: &PhysicalParams, grid: &Grid, config: &CoupledConfig) -> Result<CoupledRun> {
    p.validate_for_coupled()?;
    config.validate()?;
    let (phi, n_u) = resolve_init(p, grid, config)?;
    let mut state = CoupledState { grid: *grid, phi, n_u, t: 0.0 };

    let modes: Vec<(usize, f64)> = config
        .probes
        .iter()
        .map(|&q| grid.snap_wavenumber(q))
        .collect::<Result<_>>()?;
    let init_max_rho = state.phi.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let density_limit = {
        let scale = stationary_point(p).map(|(n_c, _)| n_c).unwrap_or(0.0).max(init_max_rho);
        if scale > 0.0 {
            1e6 * scale
        } else {
            f64::INFINITY
        }
    };

    let pump = pump_field(p, grid, &config.pump);
    let mut stepper = CoupledStepper::new(p, grid, pump, config.dt);
    let n_steps = ((config.t_end / config.dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize;
    let volume = grid.volume();

    let mut snapshots = Vec::new();
    let mut records = Vec::new();
    let mut hat = vec![C64::new(0.0, 0.0); state.phi.len()];
    let observe = |spec: &mut Spectral, st: &CoupledState, hat: &mut Vec<C64>| {
        hat.copy_from_slice(&st.phi);
        spec.forward(hat);
        // records share the reduced-equation clock tau = gamma_c t
        diagnostics::record(p.gamma_c * st.t, &st.phi, volume, &modes, hat)
    };

    records.push(observe(&mut stepper.spec, &state, &mut hat));
    snapshots.push(state.clone());
    for s in 1..=n_steps {
        let max_nu = state.n_u.iter().cloned().fold(0.0, f64::max);
        let max_nc = state.phi.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
        stiffness_guard(p, config.dt, max_nu, max_nc, state.t)?;
        stepper.step(&mut state, config.dt);

        let mut max_rho = 0.0f64;
        let mut finite = true;
        for v in &state.phi {
            let rho = v.norm_sqr();
            finite &= rho.is_finite();
            max_rho = max_rho.max(rho);
        }
        finite &= state.n_u.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::BlowUp { time: state.t, max_density: f64::NAN });
        }
        if max_rho > density_limit {
            return Err(Error::BlowUp { time: state.t, max_density: max_rho });
        }
        if s % config.record_every == 0 || s == n_steps {
            records.push(observe(&mut stepper.spec, &state, &mut hat));
            snapshots.push(state.clone());
        }
    }
    Ok(CoupledRun {
        snapshots,
        records,
        nu_clamp_events: stepper.clamp_events,
        min_nu_before_clamp: stepper.min_nu,
    })
}

/// Discrepancy metrics between the closed equation and the coupled system
/// run from the same initial condensate. Rates are per unit tau; the
/// probe wavenumber is in 1/m.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    /// Relative L2 difference of the |phi|^2 histories over all recorded
    /// snapshots, normalized by the coupled history.
    pub rel_l2_density: f64,
    pub growth_rate_closed: Option<f64>,
    pub growth_rate_coupled: Option<f64>,
    /// Largest deviation of the coupled n_u from the quasi-static closure
    /// along the trajectory, relative to the pump scale R/gamma_u.
    pub max_nu_deviation: f64,
    pub peak_contrast_closed: f64,
    pub peak_contrast_coupled: f64,
    pub probe_q_si: f64,
    pub separation_ratio: f64,
    /// Timescale separation gamma_u/gamma_c >= 10 holds.
    pub separation_ok: bool,
    /// `R Gamma = 0`: the reduction has no gain, the comparison is outside
    /// its validity.
    pub reduction_degenerate: bool,
    pub horizon_tau: f64,
}

impl ClosureReport {
    /// Flat `key = value` rendering, one metric per line.
    pub fn to_text(&self) -> String {
        let opt = |v: &Option<f64>| match v {
            Some(x) => format!("{x}"),
            None => "none".into(),
        };
        format!(
            "rel_l2_density = {}\n\
             growth_rate_closed = {}\n\
             growth_rate_coupled = {}\n\
             max_nu_deviation = {}\n\
             peak_contrast_closed = {}\n\
             peak_contrast_coupled = {}\n\
             probe_q_si = {}\n\
             separation_ratio = {}\n\
             separation_ok = {}\n\
             reduction_degenerate = {}\n\
             horizon_tau = {}\n",
            self.rel_l2_density,
            opt(&self.growth_rate_closed),
            opt(&self.growth_rate_coupled),
            self.max_nu_deviation,
            self.peak_contrast_closed,
            self.peak_contrast_coupled,
            self.probe_q_si,
            self.separation_ratio,
            self.separation_ok,
            self.reduction_degenerate,
            self.horizon_tau,
        )
    }
}

/// Runs the closed equation and the coupled system from the same initial
/// condensate (`config.init` resolves phi; the coupled thermal cloud
/// starts on the quasi-static closure) over the same horizon, and reports
/// how far apart they end up. Weak timescale separation and a degenerate
/// `R Gamma = 0` reduction are flagged, not fatal.
pub fn compare_closed_vs_coupled(
    p: &PhysicalParams,
    grid: &Grid,
    config: &CoupledConfig,
) -> Result<ClosureReport> {
    p.validate_for_coupled()?;
    config.validate()?;
    let (phi0, _) = resolve_init(p, grid, config)?;
    let nu0 = quasi_static_nu(&phi0, grid, p)?;
    if nu0.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidConfig(
            "quasi-static closure is negative for the chosen initial field; \
             start from a smaller amplitude"
                .into(),
        ));
    }

    let reduction_degenerate = p.R * p.Gamma == 0.0;
    let separation_ratio = p.gamma_u / p.gamma_c;

    // probe: the fastest-growing sideband when the reduced dynamics is
    // modulationally unstable, else the lowest lattice mode
    let probe_q_si = if reduction_degenerate {
        grid.wavenumber_axis()[1]
    } else {
        let rp = reduce(p)?;
        match stability::most_unstable_mode(rp.epsilon, rp.c1, rp.c2) {
            Ok((q_star, rate)) if rate > 0.0 => q_star / rp.l0,
            _ => grid.wavenumber_axis()[1],
        }
    };
    let (_, probe_q_si) = grid.snap_wavenumber(probe_q_si)?;

    let coupled_cfg = CoupledConfig {
        init: CoupledInit::Custom { phi: phi0.clone(), n_u: nu0 },
        probes: vec![probe_q_si],
        ..config.clone()
    };
    let coupled = run_coupled(p, grid, &coupled_cfg)?;

    // closed side: same grid in meters, same step in seconds
    let kernel = RawKernel::closed_si(p)?;
    let init_max_rho = phi0.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    let limit = kernel.saturation_density().unwrap_or(0.0).max(init_max_rho);
    let mut closed = Stepper::new(grid, kernel)
        .with_density_limit(if limit > 0.0 { 1e6 * limit } else { f64::INFINITY });
    let mut closed_state =
        crate::cgle::FieldState { grid: *grid, phi: phi0, tau: 0.0 };
    let n_steps = ((config.t_end / config.dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize;
    let (probe_idx, _) = grid.snap_wavenumber(probe_q_si)?;
    let volume = grid.volume();
    let mut spec = Spectral::new(grid);
    let mut hat = vec![C64::new(0.0, 0.0); grid.total()];
    let mut closed_records = Vec::new();
    let mut closed_histories: Vec<Vec<f64>> = Vec::new();
    let observe = |spec: &mut Spectral,
                   st: &crate::cgle::FieldState,
                       hat: &mut Vec<C64>,
                       recs: &mut Vec<DiagnosticsRecord>,
                       hist: &mut Vec<Vec<f64>>,
                       t: f64| {
        hat.copy_from_slice(&st.phi);
        spec.forward(hat);
        recs.push(diagnostics::record(
            p.gamma_c * t,
            &st.phi,
            volume,
            &[(probe_idx, probe_q_si)],
            hat,
        ));
        hist.push(st.phi.iter().map(|v| v.norm_sqr()).collect());
    };
    observe(&mut spec, &closed_state, &mut hat, &mut closed_records, &mut closed_histories, 0.0);
    for s in 1..=n_steps {
        closed.step(&mut closed_state, config.dt)?;
        if s % config.record_every == 0 || s == n_steps {
            observe(
                &mut spec,
                &closed_state,
                &mut hat,
                &mut closed_records,
                &mut closed_histories,
                closed_state.tau, // tau advances in seconds here
            );
        }
    }

    // metrics
    let mut num = 0.0;
    let mut den = 0.0;
    for (snap, closed_rho) in coupled.snapshots.iter().zip(&closed_histories) {
        for (cphi, crho) in snap.phi.iter().zip(closed_rho) {
            let coup = cphi.norm_sqr();
            num += (crho - coup) * (crho - coup);
            den += coup * coup;
        }
    }
    let rel_l2_density = if den > 0.0 { (num / den).sqrt() } else { 0.0 };

    let nu_scale = if p.R > 0.0 {
        p.R / p.gamma_u
    } else {
        coupled
            .snapshots
            .iter()
            .flat_map(|s| s.n_u.iter().cloned())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE)
    };
    let mut max_nu_deviation = 0.0f64;
    for snap in &coupled.snapshots {
        let qs = quasi_static_nu(&snap.phi, grid, p)?;
        for (nu, qs) in snap.n_u.iter().zip(&qs) {
            max_nu_deviation = max_nu_deviation.max((nu - qs).abs() / nu_scale);
        }
    }

    let horizon_tau = p.gamma_c * config.dt * n_steps as f64;
    let window = (0.25 * horizon_tau, 0.75 * horizon_tau);
    let growth_rate_closed =
        diagnostics::measured_growth_rate(&closed_records, probe_q_si, window).ok();
    let growth_rate_coupled =
        diagnostics::measured_growth_rate(&coupled.records, probe_q_si, window).ok();
    let peak = |recs: &[DiagnosticsRecord]| {
        recs.iter().map(|r| r.modulation_contrast).fold(0.0, f64::max)
    };

    Ok(ClosureReport {
        rel_l2_density,
        growth_rate_closed,
        growth_rate_coupled,
        max_nu_deviation,
        peak_contrast_closed: peak(&closed_records),
        peak_contrast_coupled: peak(&coupled.records),
        probe_q_si,
        separation_ratio,
        separation_ok: separation_ratio >= 10.0,
        reduction_degenerate,
        horizon_tau,
    })
}
