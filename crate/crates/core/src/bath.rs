//! Ohmic harmonic bath: discretization into independent oscillators and
//! thermal Wigner sampling of their initial phase-space coordinates.

use rand::Rng;

use crate::error::ConfigError;

/// Continuous Ohmic bath with exponential cutoff, before discretization.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub n_modes: usize,
    /// Kondo (friction) parameter.
    pub xi: f64,
    pub omega_c: f64,
    pub omega_max: f64,
    /// Inverse temperature.
    pub beta: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        Self {
            n_modes: 200,
            xi: 0.1,
            omega_c: 1.0,
            omega_max: 3.0,
            beta: 1.0,
        }
    }
}

impl BathSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_modes == 0 {
            return Err(ConfigError::invalid("n_modes", "must be at least 1"));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return Err(ConfigError::invalid("xi", "must be finite and non-negative"));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(ConfigError::invalid("omega_c", "must be finite and positive"));
        }
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(ConfigError::invalid("omega_max", "must be finite and positive"));
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(ConfigError::invalid("beta", "must be positive"));
        }
        Ok(())
    }
}

/// One discretized bath oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathMode {
    pub omega: f64,
    pub coupling: f64,
}

/// Bath phase-space point `(R, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn zeros(n: usize) -> Self {
        Self {
            r: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(self.p.iter()).all(|v| v.is_finite())
    }
}

/// Discretizes the Ohmic spectral density `J(ω) = (π/2) ξ ω e^{-ω/ω_c}`
/// into `n_modes` oscillators.
///
/// Frequencies are `ω_j = -ω_c ln(1 - j ω_0 / ω_c)` with
/// `ω_0 = (ω_c / N)(1 - e^{-ω_max/ω_c})`, and couplings `c_j = ω_j √(ξ ω_0)`.
pub fn discretize_ohmic(spec: &BathSpec) -> Result<Vec<BathMode>, ConfigError> {
    spec.validate()?;
    let n = spec.n_modes as f64;
    let omega_0 = spec.omega_c / n * -(-spec.omega_max / spec.omega_c).exp_m1();
    let scale = (spec.xi * omega_0).sqrt();

    let mut modes = Vec::with_capacity(spec.n_modes);
    let mut previous = 0.0;
    for j in 1..=spec.n_modes {
        let omega = -spec.omega_c * (-(j as f64) * omega_0 / spec.omega_c).ln_1p();
        if !omega.is_finite() || omega <= previous {
            return Err(ConfigError::invalid(
                "omega_max",
                format!("discretized frequency {j} is {omega}, not finite and increasing"),
            ));
        }
        previous = omega;
        modes.push(BathMode {
            omega,
            coupling: omega * scale,
        });
    }
    Ok(modes)
}

/// Thermal Wigner variances `(Var R, Var P)` of a harmonic mode with unit mass.
pub fn wigner_variances(omega: f64, beta: f64) -> (f64, f64) {
    let t = (0.5 * beta * omega).tanh();
    (1.0 / (2.0 * omega * t), omega / (2.0 * t))
}

/// Uniform draws consumed by [`sample_wigner`] per bath mode.
pub const DRAWS_PER_MODE: usize = 2;

/// Draws a phase point from the uncoupled bath's thermal Wigner function.
///
/// Each mode consumes exactly [`DRAWS_PER_MODE`] uniforms and turns them into
/// one `(R_k, P_k)` pair with the Box–Muller transform, so the stream position
/// after sampling depends only on the number of modes.
pub fn sample_wigner<G: Rng + ?Sized>(modes: &[BathMode], beta: f64, rng: &mut G) -> PhasePoint {
    let mut x = PhasePoint::zeros(modes.len());
    for (k, mode) in modes.iter().enumerate() {
        let (var_r, var_p) = wigner_variances(mode.omega, beta);
        let (z_r, z_p) = box_muller(rng);
        x.r[k] = var_r.sqrt() * z_r;
        x.p[k] = var_p.sqrt() * z_p;
    }
    x
}

fn box_muller<G: Rng + ?Sized>(rng: &mut G) -> (f64, f64) {
    // 1 - u lies in (0, 1], keeping the logarithm finite.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let radius = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
    (radius * c, radius * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(n_modes: usize, xi: f64) -> BathSpec {
        BathSpec {
            n_modes,
            xi,
            omega_c: 1.0,
            omega_max: 3.0,
            beta: 1.0,
        }
    }

    #[test]
    fn zero_friction_decouples() {
        for n in [1, 7, 200] {
            let modes = discretize_ohmic(&spec(n, 0.0)).unwrap();
            assert_eq!(modes.len(), n);
            assert!(modes.iter().all(|m| m.coupling == 0.0));
        }
    }

    #[test]
    fn single_mode_lands_on_omega_max() {
        let modes = discretize_ohmic(&spec(1, 0.1)).unwrap();
        let omega_0 = 1.0 - (-3.0f64).exp();
        assert!((omega_0 - 0.950_212_93).abs() < 1e-8);
        assert!((modes[0].omega - 3.0).abs() < 1e-12);
        assert!((modes[0].coupling - 3.0 * (0.1 * omega_0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_modes_increase_to_omega_max() {
        let modes = discretize_ohmic(&spec(2, 0.1)).unwrap();
        assert!(modes[0].omega < modes[1].omega);
        assert!((modes[1].omega - 3.0).abs() < 1e-12);
        // ω_1 = -ln(1 - ω_0/2)
        let omega_0 = 1.0 - (-3.0f64).exp();
        assert!((modes[0].omega + (1.0 - omega_0 / 2.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn discretization_is_pure() {
        let s = spec(200, 0.13);
        assert_eq!(discretize_ohmic(&s).unwrap(), discretize_ohmic(&s).unwrap());
    }

    #[test]
    fn rejects_invalid_specs() {
        assert!(discretize_ohmic(&spec(0, 0.1)).is_err());
        assert!(discretize_ohmic(&BathSpec { beta: 0.0, ..spec(3, 0.1) }).is_err());
        assert!(discretize_ohmic(&BathSpec { xi: -1.0, ..spec(3, 0.1) }).is_err());
        assert!(discretize_ohmic(&BathSpec { omega_max: 0.0, ..spec(3, 0.1) }).is_err());
    }

    #[test]
    fn variance_limits() {
        let (vr, vp) = wigner_variances(2.0, f64::INFINITY);
        assert_eq!((vr, vp), (0.25, 1.0));
        // classical equipartition
        let (vr, _) = wigner_variances(0.5, 1e-4);
        assert!((vr * 1e-4 * 0.25 - 1.0).abs() < 1e-6);
        let (_, vp) = wigner_variances(1.0, 2.0);
        assert!((vp - 0.656_517_64).abs() < 1e-8);
    }

    #[test]
    fn fixed_draw_count() {
        let modes = discretize_ohmic(&spec(5, 0.1)).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = a.clone();
        sample_wigner(&modes, 1.0, &mut a);
        for _ in 0..DRAWS_PER_MODE * modes.len() {
            b.random::<f64>();
        }
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }
}
