//! Split-step pseudo-spectral integrator for the reduced equation
//!
//! ```text
//! d phi / d tau = eps phi + (1 + i c1) grad^2 phi - (1 + i c2) |phi|^2 phi
//! ```
//!
//! on a periodic grid, plus the generic kernel behind it. The scheme is
//! Strang splitting: half a nonlinear substep, one full linear substep in
//! spectral space, half a nonlinear substep. Both substeps are exact for
//! their own flows, so the only error is the splitting itself, second
//! order in `dt`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{PhysicalParams, ReducedParams};
use crate::spectral::Spectral;
use crate::C64;

/// Order parameter snapshot on a grid at dimensionless time `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub grid: Grid,
    pub phi: Vec<C64>,
    pub tau: f64,
}

/// Time-stepping knobs. `noise_amp` and `seed` only matter for
/// [`InitKind::HomogeneousNoise`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Steps between diagnostics records.
    pub record_every: usize,
    pub seed: u64,
    /// RMS of the complex white noise added by the noisy initializer.
    pub noise_amp: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { dt: 1e-2, t_end: 100.0, record_every: 100, seed: 1, noise_amp: 1e-2 }
    }
}

impl SolverConfig {
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
        Ok(())
    }
}

/// Initial condition recipes.
#[derive(Debug, Clone, PartialEq)]
pub enum InitKind {
    /// Lasing amplitude `sqrt(eps)` plus complex white noise of RMS
    /// `noise_amp`, drawn from the seeded generator.
    HomogeneousNoise,
    /// `sqrt(eps) (1 + delta cos(q x))`, `q` snapped to the lattice.
    /// The modulation runs along x in two dimensions.
    PlaneWavePerturbed { q: f64, delta: f64 },
    /// Caller-supplied field, passed through after shape and finiteness
    /// checks.
    Custom(Vec<C64>),
}

/// Coefficients of the generic flow
///
/// ```text
/// d phi / dt = gain phi + diff grad^2 phi - nonlin |phi|^2 phi
/// ```
///
/// covering both the dimensionless equation (`gain = eps`,
/// `diff = 1 + i c1`, `nonlin = 1 + i c2`) and its SI-units ancestor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawKernel {
    pub gain: f64,
    pub diff: C64,
    pub nonlin: C64,
}

impl RawKernel {
    /// Dimensionless reduced-equation coefficients.
    pub fn cgle(rp: &ReducedParams) -> RawKernel {
        RawKernel {
            gain: rp.epsilon,
            diff: C64::new(1.0, rp.c1),
            nonlin: C64::new(1.0, rp.c2),
        }
    }

    /// The closed SI equation the reduction starts from: lengths in
    /// meters, time in seconds, `|phi|^2` in atoms per cubic meter. Well
    /// defined for `Gamma = 0` too, where the pump gain vanishes and only
    /// loss, kinetic dispersion and the interaction phase remain.
    pub fn closed_si(p: &PhysicalParams) -> Result<RawKernel> {
        p.validate_for_coupled()?;
        let gu2 = p.gamma_u * p.gamma_u;
        Ok(RawKernel {
            gain: 0.5 * (p.Gamma * p.R / p.gamma_u - p.gamma_c),
            diff: C64::new(
                0.5 * p.Gamma * p.R * p.D_r / gu2,
                0.5 * crate::constants::HBAR / p.mass,
            ),
            nonlin: C64::new(
                0.5 * p.Gamma * p.Gamma * p.R / gu2,
                p.Omega * p.V + p.g_over_hbar,
            ),
        })
    }

    /// Uniform saturated density `gain / Re nonlin` when the flow has one.
    pub fn saturation_density(&self) -> Option<f64> {
        (self.gain > 0.0 && self.nonlin.re > 0.0).then(|| self.gain / self.nonlin.re)
    }
}

/// Owns the spectral plans and cached linear factors for one grid/kernel
/// pair. States advanced by the same stepper must share that grid.
pub struct Stepper {
    kernel: RawKernel,
    grid: Grid,
    spec: Spectral,
    k2: Vec<f64>,
    lin_cache: Option<(f64, Vec<C64>)>,
    density_limit: f64,
}

impl Stepper {
    pub fn new(grid: &Grid, kernel: RawKernel) -> Stepper {
        // abort threshold: well past both the saturated density and, for
        // kernels without one, the O(1) scale of the dimensionless field
        let density_limit = 1e6 * kernel.saturation_density().unwrap_or(0.0).max(1.0);
        Stepper {
            kernel,
            grid: *grid,
            spec: Spectral::new(grid),
            k2: grid.k_squared(),
            lin_cache: None,
            density_limit,
        }
    }

    pub fn kernel(&self) -> &RawKernel {
        &self.kernel
    }

    /// Overrides the blow-up threshold on `|phi|^2`, for kernels whose
    /// natural field scale is far from 1 (the SI faces).
    pub fn with_density_limit(mut self, limit: f64) -> Stepper {
        self.density_limit = limit;
        self
    }

    /// Exact pointwise flow of `d phi/dt = -nonlin |phi|^2 phi` over `dt`:
    /// the density follows `rho 0 / (1 + 2 Re(nonlin) rho0 dt)` and the
    /// phase integrates `-Im(nonlin) rho(t)`. `tau` only labels errors.
    pub fn substep_nonlinear(&self, phi: &mut [C64], dt: f64, tau: f64) -> Result<()> {
        let b_re = self.kernel.nonlin.re;
        let b_im = self.kernel.nonlin.im;
        if b_re == 0.0 {
            for v in phi.iter_mut() {
                let theta = -b_im * v.norm_sqr() * dt;
                *v *= C64::from_polar(1.0, theta);
            }
            return Ok(());
        }
        for v in phi.iter_mut() {
            let rho0 = v.norm_sqr();
            let s = 1.0 + 2.0 * b_re * rho0 * dt;
            if s <= 0.0 {
                // focusing nonlinearity reached its finite-time collapse
                return Err(Error::BlowUp { time: tau, max_density: rho0 });
            }
            let theta = -(b_im / (2.0 * b_re)) * s.ln();
            *v *= C64::from_polar(s.powf(-0.5), theta);
        }
        Ok(())
    }

    /// Exact spectral flow of `d phi/dt = gain phi + diff grad^2 phi` over
    /// `dt`: each mode is multiplied by `exp((gain - diff k^2) dt)`.
    pub fn substep_linear(&mut self, phi: &mut [C64], dt: f64) {
        let fresh = match &self.lin_cache {
            Some((cached_dt, _)) => *cached_dt != dt,
            None => true,
        };
        if fresh {
            let factors = self
                .k2
                .iter()
                .map(|&k2| ((Complex::new(self.kernel.gain, 0.0) - self.kernel.diff * k2) * dt).exp())
                .collect();
            self.lin_cache = Some((dt, factors));
        }
        let factors = &self.lin_cache.as_ref().unwrap().1;
        self.spec.forward(phi);
        for (v, f) in phi.iter_mut().zip(factors) {
            *v *= f;
        }
        self.spec.inverse(phi);
    }

    /// One Strang step. Guards `dt * gain < 0.5` and aborts on blow-up.
    pub fn step(&mut self, state: &mut FieldState, dt: f64) -> Result<()> {
        if state.grid != self.grid {
            return Err(Error::InvalidGrid("state grid differs from the stepper grid".into()));
        }
        if !(dt > 0.0) {
            return Err(Error::GuardViolation(format!("dt = {dt} must be positive")));
        }
        if dt * self.kernel.gain >= 0.5 {
            return Err(Error::GuardViolation(format!(
                "dt * gain = {:.3e} exceeds the 0.5 step-resolution guard",
                dt * self.kernel.gain
            )));
        }
        self.substep_nonlinear(&mut state.phi, 0.5 * dt, state.tau)?;
        self.substep_linear(&mut state.phi, dt);
        self.substep_nonlinear(&mut state.phi, 0.5 * dt, state.tau)?;
        state.tau += dt;

        let mut max_rho = 0.0f64;
        let mut finite = true;
        for v in &state.phi {
            let rho = v.norm_sqr();
            finite &= rho.is_finite();
            max_rho = max_rho.max(rho);
        }
        if !finite {
            return Err(Error::BlowUp { time: state.tau, max_density: f64::NAN });
        }
        if max_rho > self.density_limit {
            return Err(Error::BlowUp { time: state.tau, max_density: max_rho });
        }
        Ok(())
    }

    /// Advances `ceil(t_end / dt)` fixed steps, recording diagnostics at
    /// step 0, every `record_every` steps, and at the last step. Probe
    /// wavenumbers are snapped to the lattice (along x in 2D).
    pub fn run(
        &mut self,
        mut state: FieldState,
        config: &SolverConfig,
        probes: &[f64],
    ) -> Result<(FieldState, Vec<DiagnosticsRecord>)> {
        config.validate()?;
        let modes: Vec<(usize, f64)> = probes
            .iter()
            .map(|&q| state.grid.snap_wavenumber(q))
            .collect::<Result<_>>()?;
        // never trip on a caller-supplied initial density scale
        for v in &state.phi {
            self.density_limit = self.density_limit.max(1e6 * v.norm_sqr());
        }

        let n_steps = ((config.t_end / config.dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize;
        let volume = state.grid.volume();
        let mut records = Vec::new();
        let mut hat = vec![C64::new(0.0, 0.0); state.phi.len()];
        let snapshot = |spec: &mut Spectral, st: &FieldState, hat: &mut Vec<C64>| {
            hat.copy_from_slice(&st.phi);
            spec.forward(hat);
            diagnostics::record(st.tau, &st.phi, volume, &modes, hat)
        };
        records.push(snapshot(&mut self.spec, &state, &mut hat));
        for s in 1..=n_steps {
            self.step(&mut state, config.dt)?;
            if s % config.record_every == 0 || s == n_steps {
                records.push(snapshot(&mut self.spec, &state, &mut hat));
            }
        }
        Ok((state, records))
    }
}

/// Builds an initial field per `kind`. The noisy and plane-wave recipes
/// start from the homogeneous lasing state and need `rp.epsilon > 0`.
pub fn init_state(
    grid: &Grid,
    kind: &InitKind,
    rp: &ReducedParams,
    config: &SolverConfig,
) -> Result<FieldState> {
    let total = grid.total();
    let phi = match kind {
        InitKind::HomogeneousNoise => {
            if rp.epsilon <= 0.0 {
                return Err(Error::NoLasingState { epsilon: rp.epsilon });
            }
            let amp = rp.epsilon.sqrt();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
            // complex RMS noise_amp means each quadrature gets noise_amp/sqrt(2)
            let quad = Normal::new(0.0, config.noise_amp / 2.0f64.sqrt())
                .map_err(|_| Error::InvalidConfig("noise_amp is not usable".into()))?;
            (0..total)
                .map(|_| C64::new(amp + quad.sample(&mut rng), quad.sample(&mut rng)))
                .collect()
        }
        InitKind::PlaneWavePerturbed { q, delta } => {
            if rp.epsilon <= 0.0 {
                return Err(Error::NoLasingState { epsilon: rp.epsilon });
            }
            let amp = rp.epsilon.sqrt();
            let (_, q_snap) = grid.snap_wavenumber(*q)?;
            let xs = grid.x_axis();
            let n = grid.n();
            (0..total)
                .map(|i| {
                    let x = xs[i % n];
                    C64::new(amp * (1.0 + delta * (q_snap * x).cos()), 0.0)
                })
                .collect()
        }
        InitKind::Custom(values) => {
            if values.len() != total {
                return Err(Error::InvalidGrid(format!(
                    "custom field has {} entries for a grid of {total}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::NonFinite("custom initial field".into()));
            }
            values.clone()
        }
    };
    Ok(FieldState { grid: *grid, phi, tau: 0.0 })
}

/// One Strang step as a standalone call. Plans FFTs on every invocation;
/// loops should hold a [`Stepper`] instead.
pub fn step(state: &FieldState, rp: &ReducedParams, dt: f64) -> Result<FieldState> {
    let mut stepper = Stepper::new(&state.grid, RawKernel::cgle(rp));
    let mut next = state.clone();
    stepper.step(&mut next, dt)?;
    Ok(next)
}

/// Integrates to `config.t_end` with diagnostics at the probed
/// wavenumbers. Deterministic for a fixed input state and config.
pub fn run(
    state: FieldState,
    rp: &ReducedParams,
    config: &SolverConfig,
    probes: &[f64],
) -> Result<(FieldState, Vec<DiagnosticsRecord>)> {
    Stepper::new(&state.grid, RawKernel::cgle(rp)).run(state, config, probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{preset, reduce};
    use crate::stability;
    use approx::assert_relative_eq;

    fn li7_reduced() -> ReducedParams {
        reduce(&preset("li7").unwrap()).unwrap()
    }

    fn rb87_reduced() -> ReducedParams {
        reduce(&preset("rb87").unwrap()).unwrap()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn noiseless_init_is_the_uniform_lasing_state() {
        let grid = Grid::new(1, 32, 10.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig { noise_amp: 0.0, ..SolverConfig::default() };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let amp = rp.epsilon.sqrt();
        assert!(st.phi.iter().all(|v| *v == C64::new(amp, 0.0)));

        let st = init_state(
            &grid,
            &InitKind::PlaneWavePerturbed { q: 1.0, delta: 0.0 },
            &rp,
            &cfg,
        )
        .unwrap();
        assert!(st.phi.iter().all(|v| *v == C64::new(amp, 0.0)));
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let grid = Grid::new(2, 16, 10.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig { seed: 42, ..SolverConfig::default() };
        let a = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let b = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        assert_eq!(a.phi, b.phi);
        let c = init_state(
            &grid,
            &InitKind::HomogeneousNoise,
            &rp,
            &SolverConfig { seed: 43, ..cfg },
        )
        .unwrap();
        assert_ne!(a.phi, c.phi);
    }

    #[test]
    fn noise_rms_matches_the_requested_amplitude() {
        let grid = Grid::new(1, 4096, 100.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig { noise_amp: 0.05, seed: 9, ..SolverConfig::default() };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let amp = rp.epsilon.sqrt();
        let ms: f64 = st
            .phi
            .iter()
            .map(|v| (v - C64::new(amp, 0.0)).norm_sqr())
            .sum::<f64>()
            / 4096.0;
        assert_relative_eq!(ms.sqrt(), 0.05, max_relative = 0.05);
    }

    #[test]
    fn below_threshold_init_is_refused() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let mut rp = rb87_reduced();
        rp.epsilon = -0.1;
        let cfg = SolverConfig::default();
        for kind in [
            InitKind::HomogeneousNoise,
            InitKind::PlaneWavePerturbed { q: 1.0, delta: 0.1 },
        ] {
            assert!(matches!(
                init_state(&grid, &kind, &rp, &cfg),
                Err(Error::NoLasingState { .. })
            ));
        }
        // custom fields pass through regardless of epsilon
        let st = init_state(
            &grid,
            &InitKind::Custom(vec![C64::new(0.1, 0.0); 16]),
            &rp,
            &cfg,
        )
        .unwrap();
        assert_eq!(st.phi.len(), 16);
    }

    #[test]
    fn custom_init_is_shape_and_finiteness_checked() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig::default();
        assert!(matches!(
            init_state(&grid, &InitKind::Custom(vec![C64::new(0.0, 0.0); 7]), &rp, &cfg),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            init_state(
                &grid,
                &InitKind::Custom(vec![C64::new(f64::NAN, 0.0); 16]),
                &rp,
                &cfg
            ),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn uniform_lasing_state_is_a_fixed_point_of_step() {
        let grid = Grid::new(1, 32, 10.0).unwrap();
        for rp in [rb87_reduced(), li7_reduced()] {
            let amp = rp.epsilon.sqrt();
            let st = FieldState { grid, phi: vec![C64::new(amp, 0.0); 32], tau: 0.0 };
            let next = step(&st, &rp, 1e-3).unwrap();
            for v in &next.phi {
                assert!((v.norm_sqr() - rp.epsilon).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_field_stays_zero() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let rp = li7_reduced();
        let st = FieldState { grid, phi: vec![C64::new(0.0, 0.0); 16], tau: 0.0 };
        let next = step(&st, &rp, 0.01).unwrap();
        assert!(next.phi.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn linear_substep_matches_the_analytic_mode_factor() {
        let grid = Grid::new(1, 64, 20.0).unwrap();
        let c1 = 0.55;
        let kernel = RawKernel {
            gain: 0.0,
            diff: C64::new(1.0, c1),
            nonlin: C64::new(1.0, -1.3),
        };
        let mut stepper = Stepper::new(&grid, kernel);
        let q = grid.wavenumber_axis()[5];
        let xs = grid.x_axis();
        let phi0: Vec<C64> = xs.iter().map(|&x| C64::from_polar(0.8, q * x)).collect();
        let mut phi = phi0.clone();
        let dt = 0.37;
        stepper.substep_linear(&mut phi, dt);
        let factor = (-C64::new(1.0, c1) * q * q * dt).exp();
        for (v, v0) in phi.iter().zip(&phi0) {
            assert!((v - v0 * factor).norm() < 1e-12);
        }
    }

    #[test]
    fn nonlinear_substep_composes_like_an_exact_flow() {
        // exactness means flowing 0.3 then 0.7 equals flowing 1.0
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let rp = li7_reduced();
        let stepper = Stepper::new(&grid, RawKernel::cgle(&rp));
        let phi0: Vec<C64> = (0..16)
            .map(|i| C64::from_polar(0.2 + 0.05 * i as f64, 0.4 * i as f64))
            .collect();
        let mut once = phi0.clone();
        stepper.substep_nonlinear(&mut once, 1.0, 0.0).unwrap();
        let mut twice = phi0.clone();
        stepper.substep_nonlinear(&mut twice, 0.3, 0.0).unwrap();
        stepper.substep_nonlinear(&mut twice, 0.7, 0.0).unwrap();
        assert!(max_diff(&once, &twice) < 1e-12);
    }

    #[test]
    fn nonlinear_substep_matches_the_closed_form() {
        let grid = Grid::new(1, 8, 10.0).unwrap();
        let c2 = -5.19;
        let kernel = RawKernel { gain: 0.3, diff: C64::new(1.0, 0.4), nonlin: C64::new(1.0, c2) };
        let stepper = Stepper::new(&grid, kernel);
        for dt in [1e-3, 0.1, 1.0, 7.0] {
            let rho0: f64 = 0.49;
            let mut phi = vec![C64::new(rho0.sqrt(), 0.0); 8];
            stepper.substep_nonlinear(&mut phi, dt, 0.0).unwrap();
            let s: f64 = 1.0 + 2.0 * rho0 * dt;
            let expect = C64::from_polar((rho0 / s).sqrt(), -(c2 / 2.0) * s.ln());
            for v in &phi {
                assert!((v - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn step_guard_and_grid_checks_fire() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let rp = rb87_reduced();
        let st = FieldState { grid, phi: vec![C64::new(0.1, 0.0); 16], tau: 0.0 };
        assert!(matches!(step(&st, &rp, -0.1), Err(Error::GuardViolation(_))));
        assert!(matches!(step(&st, &rp, 1.1), Err(Error::GuardViolation(_))));
        let other = Grid::new(1, 32, 10.0).unwrap();
        let mut stepper = Stepper::new(&other, RawKernel::cgle(&rp));
        let mut bad = st;
        assert!(matches!(stepper.step(&mut bad, 0.01), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn focusing_kernel_blows_up_and_is_caught() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let kernel = RawKernel {
            gain: 1.0,
            diff: C64::new(1.0, 0.0),
            nonlin: C64::new(-1.0, 0.0),
        };
        let mut stepper = Stepper::new(&grid, kernel);
        let mut st = FieldState { grid, phi: vec![C64::new(1.0, 0.0); 16], tau: 0.0 };
        let mut blew = None;
        for _ in 0..10_000 {
            if let Err(e) = stepper.step(&mut st, 0.01) {
                blew = Some(e);
                break;
            }
        }
        match blew {
            Some(Error::BlowUp { time, .. }) => assert!(time < 20.0),
            other => panic!("expected a blow-up, got {other:?}"),
        }
    }

    #[test]
    fn zero_horizon_returns_the_input_and_one_record() {
        let grid = Grid::new(1, 32, 10.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig { t_end: 0.0, noise_amp: 0.0, ..SolverConfig::default() };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let phi0 = st.phi.clone();
        let (end, recs) = run(st, &rp, &cfg, &[0.0]).unwrap();
        assert_eq!(end.phi, phi0);
        assert_eq!(end.tau, 0.0);
        assert_eq!(recs.len(), 1);
        assert_relative_eq!(recs[0].mean_density, rp.epsilon, max_relative = 1e-12);
    }

    #[test]
    fn record_cadence_includes_start_and_end() {
        let grid = Grid::new(1, 16, 10.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 0.2, // 20 steps
            record_every: 7,
            noise_amp: 0.0,
            ..SolverConfig::default()
        };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let (_, recs) = run(st, &rp, &cfg, &[]).unwrap();
        let taus: Vec<f64> = recs.iter().map(|r| r.tau).collect();
        assert_eq!(taus.len(), 4);
        assert_relative_eq!(taus[0], 0.0);
        assert_relative_eq!(taus[1], 0.07, max_relative = 1e-12);
        assert_relative_eq!(taus[2], 0.14, max_relative = 1e-12);
        assert_relative_eq!(taus[3], 0.20, max_relative = 1e-12);
    }

    #[test]
    fn stable_preset_keeps_contrast_near_the_noise_floor() {
        let grid = Grid::new(1, 256, 100.0).unwrap();
        let rp = rb87_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 100.0,
            record_every: 200,
            seed: 5,
            noise_amp: 0.01,
        };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let (_, recs) = run(st, &rp, &cfg, &[]).unwrap();
        for r in &recs {
            assert!(
                r.modulation_contrast < 10.0 * cfg.noise_amp,
                "contrast {} at tau {}",
                r.modulation_contrast,
                r.tau
            );
        }
    }

    #[test]
    fn unstable_preset_develops_order_one_contrast() {
        let grid = Grid::new(1, 256, 100.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 100.0,
            record_every: 200,
            seed: 5,
            noise_amp: 0.01,
        };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let (_, recs) = run(st, &rp, &cfg, &[]).unwrap();
        let peak = recs.iter().map(|r| r.modulation_contrast).fold(0.0, f64::max);
        assert!(peak > 0.5, "contrast never left the noise floor, peak {peak}");
    }

    #[test]
    fn seeded_sideband_grows_at_the_dispersion_rate() {
        let grid = Grid::new(1, 256, 100.0).unwrap();
        let rp = li7_reduced();
        let (q_star, rate_star) =
            stability::most_unstable_mode(rp.epsilon, rp.c1, rp.c2).unwrap();
        let (_, q_snap) = grid.snap_wavenumber(q_star).unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 30.0,
            record_every: 25,
            seed: 1,
            noise_amp: 0.0,
        };
        let st = init_state(
            &grid,
            &InitKind::PlaneWavePerturbed { q: q_star, delta: 1e-4 },
            &rp,
            &cfg,
        )
        .unwrap();
        let (_, recs) = run(st, &rp, &cfg, &[q_star]).unwrap();
        let fitted = diagnostics::measured_growth_rate(&recs, q_snap, (12.0, 30.0)).unwrap();
        let analytic =
            stability::max_growth_rate(rp.epsilon, rp.c1, rp.c2, q_snap).unwrap();
        assert_relative_eq!(fitted, analytic, max_relative = 0.02);
        assert_relative_eq!(fitted, rate_star, max_relative = 0.02);
    }

    #[test]
    fn run_is_translation_equivariant() {
        let grid = Grid::new(1, 64, 40.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 5.0,
            record_every: 100,
            seed: 11,
            noise_amp: 0.02,
        };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let mut shifted = st.phi.clone();
        shifted.rotate_right(1);
        let st_shift = FieldState { grid, phi: shifted, tau: 0.0 };
        let (a, _) = run(st, &rp, &cfg, &[]).unwrap();
        let (b, _) = run(st_shift, &rp, &cfg, &[]).unwrap();
        let mut a_shift = a.phi.clone();
        a_shift.rotate_right(1);
        assert!(max_diff(&a_shift, &b.phi) < 1e-10);
    }

    #[test]
    fn run_is_phase_equivariant() {
        let grid = Grid::new(1, 64, 40.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 5.0,
            record_every: 100,
            seed: 11,
            noise_amp: 0.02,
        };
        let rot = C64::from_polar(1.0, 1.234);
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let rotated: Vec<C64> = st.phi.iter().map(|v| v * rot).collect();
        let st_rot = FieldState { grid, phi: rotated, tau: 0.0 };
        let (a, _) = run(st, &rp, &cfg, &[]).unwrap();
        let (b, _) = run(st_rot, &rp, &cfg, &[]).unwrap();
        let a_rot: Vec<C64> = a.phi.iter().map(|v| v * rot).collect();
        assert!(max_diff(&a_rot, &b.phi) < 1e-10);
    }

    #[test]
    fn run_is_deterministic() {
        let grid = Grid::new(2, 16, 20.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig {
            dt: 0.01,
            t_end: 2.0,
            record_every: 50,
            seed: 3,
            noise_amp: 0.02,
        };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let (a, ra) = run(st.clone(), &rp, &cfg, &[0.5]).unwrap();
        let (b, rb) = run(st, &rp, &cfg, &[0.5]).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_eq!(ra, rb);
    }

    #[test]
    fn si_and_dimensionless_faces_stay_in_lockstep() {
        // the same physics stepped in SI units and in reduced units must
        // agree after mapping: phi_reduced = sqrt(amp2_scale) phi_si,
        // x = l0 x_reduced, tau = gamma_c t
        let p = preset("rb87").unwrap();
        let rp = reduce(&p).unwrap();
        let n = 64;
        let length_red = 50.0;
        let grid_red = Grid::new(1, n, length_red).unwrap();
        let grid_si = Grid::new(1, n, length_red * rp.l0).unwrap();

        let cfg = SolverConfig { dt: 0.01, ..SolverConfig::default() };
        let st_red = init_state(
            &grid_red,
            &InitKind::PlaneWavePerturbed { q: 0.5, delta: 0.05 },
            &rp,
            &cfg,
        )
        .unwrap();
        let scale = rp.amp2_scale.sqrt();
        let phi_si: Vec<C64> = st_red.phi.iter().map(|v| v / scale).collect();
        let mut st_si = FieldState { grid: grid_si, phi: phi_si, tau: 0.0 };

        let mut red = Stepper::new(&grid_red, RawKernel::cgle(&rp));
        let mut si = Stepper::new(&grid_si, RawKernel::closed_si(&p).unwrap())
            .with_density_limit(f64::INFINITY);
        let mut st_red = st_red;
        let dt_si = cfg.dt / p.gamma_c;
        for _ in 0..500 {
            red.step(&mut st_red, cfg.dt).unwrap();
            si.step(&mut st_si, dt_si).unwrap();
        }
        let mapped: Vec<C64> = st_si.phi.iter().map(|v| v * scale).collect();
        let denom = st_red.phi.iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(max_diff(&st_red.phi, &mapped) / denom < 1e-10);
    }

    #[test]
    fn probe_snapping_reaches_the_records() {
        let grid = Grid::new(1, 256, 100.0).unwrap();
        let rp = li7_reduced();
        let cfg = SolverConfig { dt: 0.01, t_end: 0.1, noise_amp: 0.0, ..SolverConfig::default() };
        let st = init_state(&grid, &InitKind::HomogeneousNoise, &rp, &cfg).unwrap();
        let (_, recs) = run(st, &rp, &cfg, &[0.5878]).unwrap();
        let q_rec = recs[0].mode_amplitudes[0].0;
        assert_relative_eq!(q_rec, 5.654866776462e-1, max_relative = 1e-10);
    }
}
