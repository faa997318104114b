//! Two-level spin-boson model in the adiabatic basis.
//!
//! The subsystem Hamiltonian is `-Ω σ_x`, the coupling `-σ_z Σ_j c_j R_j`, and
//! the bath potential `½ Σ_j ω_j² R_j²`. At a bath configuration `R` the
//! electronic part reduces to `V_b(R) + [[-γ, -Ω], [-Ω, γ]]` with
//! `γ = Σ_j c_j R_j`, which diagonalizes in closed form.
//!
//! Eigenvectors are parametrized by the mixing angle `φ = ½ atan2(Ω, γ) ∈ (0, π/2)`:
//! `|1⟩ = (cos φ, sin φ)` and `|2⟩ = (sin φ, -cos φ)` in the `(↑, ↓)` basis. The
//! angle is a smooth function of `γ`, so every derived field is continuous along
//! a trajectory. At `γ = 0` both vectors have their first component positive.

use crate::bath::BathMode;
use crate::error::ConfigError;

/// Adiabatic surface label. `Lower` is state 1, `Upper` is state 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Surface {
    Lower,
    Upper,
}

impl Surface {
    pub const BOTH: [Surface; 2] = [Surface::Lower, Surface::Upper];

    pub fn index(self) -> usize {
        match self {
            Surface::Lower => 0,
            Surface::Upper => 1,
        }
    }

    /// Conventional 1-based label.
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn other(self) -> Surface {
        match self {
            Surface::Lower => Surface::Upper,
            Surface::Upper => Surface::Lower,
        }
    }

    /// `E_α = V_b - sign(α) λ` with `λ` the half gap.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Surface::Lower => 1.0,
            Surface::Upper => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsystemParams {
    /// Tunneling frequency Ω.
    pub omega: f64,
}

impl SubsystemParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.omega > 0.0 && self.omega.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::invalid("omega", "must be finite and positive"))
        }
    }
}

/// Scalar description of the adiabatic frame at one configuration.
///
/// Everything except the bath potential and the vector-valued fields (which
/// are proportional to the coupling vector `c` or to `R`) follows from `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub gamma: f64,
    /// Half gap `λ = √(Ω² + γ²)`.
    pub half_gap: f64,
    pub omega: f64,
    cos_phi: f64,
    sin_phi: f64,
}

impl LocalFrame {
    pub fn new(gamma: f64, omega: f64) -> Self {
        let half_gap = omega.hypot(gamma);
        // cos²φ = (λ + γ)/2λ, sin²φ = (λ - γ)/2λ, evaluated without cancellation.
        let (plus, minus) = if gamma >= 0.0 {
            let plus = half_gap + gamma;
            (plus, omega * omega / plus)
        } else {
            let minus = half_gap - gamma;
            (omega * omega / minus, minus)
        };
        let cos_phi = (plus / (2.0 * half_gap)).sqrt();
        let sin_phi = (minus / (2.0 * half_gap)).sqrt();
        Self {
            gamma,
            half_gap,
            omega,
            cos_phi,
            sin_phi,
        }
    }

    /// `E_α - V_b`.
    pub fn electronic_energy(&self, alpha: Surface) -> f64 {
        -alpha.sign() * self.half_gap
    }

    /// `ΔE_{αβ} = E_α - E_β`.
    pub fn energy_gap(&self, alpha: Surface, beta: Surface) -> f64 {
        (beta.sign() - alpha.sign()) * self.half_gap
    }

    /// Bohr frequency `ω_{αα'} = (E_α - E_α')/ħ` with `ħ = 1`.
    pub fn bohr_frequency(&self, alpha: Surface, alpha_prime: Surface) -> f64 {
        self.energy_gap(alpha, alpha_prime)
    }

    /// Eigenvector matrix; column `a` holds `⟨i|a⟩` for `i ∈ {↑, ↓}`.
    pub fn eigenvectors(&self) -> [[f64; 2]; 2] {
        [[self.cos_phi, self.sin_phi], [self.sin_phi, -self.cos_phi]]
    }

    /// `⟨α|σ_z|β⟩`.
    pub fn sigma_z(&self, alpha: Surface, beta: Surface) -> f64 {
        if alpha == beta {
            alpha.sign() * self.gamma / self.half_gap
        } else {
            self.omega / self.half_gap
        }
    }

    /// `⟨α|↑⟩⟨↑|β⟩`.
    pub fn rho_up(&self, alpha: Surface, beta: Surface) -> f64 {
        let up = [self.cos_phi, self.sin_phi];
        up[alpha.index()] * up[beta.index()]
    }

    /// `d_12 = coupling_scale · c`.
    pub fn coupling_scale(&self) -> f64 {
        -self.omega / (2.0 * self.half_gap * self.half_gap)
    }

    /// `F^α = -ω² R + c · force_scale(α)`.
    pub fn force_scale(&self, alpha: Surface) -> f64 {
        alpha.sign() * self.gamma / self.half_gap
    }
}

/// Fully populated adiabatic frame at a bath configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct AdiabaticFrame {
    pub local: LocalFrame,
    pub bath_potential: f64,
    /// `[E_1, E_2]`, bath potential included.
    pub energies: [f64; 2],
    pub evecs: [[f64; 2]; 2],
    pub d12: Vec<f64>,
    pub forces: [Vec<f64>; 2],
    pub sigma_z_ad: [[f64; 2]; 2],
    pub rho0_ad: [[f64; 2]; 2],
}

impl AdiabaticFrame {
    pub fn gamma(&self) -> f64 {
        self.local.gamma
    }

    pub fn energy(&self, alpha: Surface) -> f64 {
        self.energies[alpha.index()]
    }

    pub fn force(&self, alpha: Surface) -> &[f64] {
        &self.forces[alpha.index()]
    }

    pub fn bohr_frequency(&self, alpha: Surface, alpha_prime: Surface) -> f64 {
        self.local.bohr_frequency(alpha, alpha_prime)
    }

    /// `d_{αβ}` for the ordered pair; `d_21 = -d_12`.
    pub fn coupling(&self, alpha: Surface, beta: Surface) -> Vec<f64> {
        let sign = match (alpha, beta) {
            (Surface::Lower, Surface::Upper) => 1.0,
            (Surface::Upper, Surface::Lower) => -1.0,
            _ => 0.0,
        };
        self.d12.iter().map(|d| sign * d).collect()
    }
}

/// Spin-boson Hamiltonian over a discretized bath.
#[derive(Debug, Clone)]
pub struct SpinBoson {
    modes: Vec<BathMode>,
    freq_sq: Vec<f64>,
    couplings: Vec<f64>,
    coupling_norm: f64,
    sub: SubsystemParams,
    mass: f64,
}

impl SpinBoson {
    pub fn new(modes: Vec<BathMode>, sub: SubsystemParams) -> Result<Self, ConfigError> {
        sub.validate()?;
        if modes.is_empty() {
            return Err(ConfigError::invalid("n_modes", "must be at least 1"));
        }
        let freq_sq = modes.iter().map(|m| m.omega * m.omega).collect();
        let couplings: Vec<f64> = modes.iter().map(|m| m.coupling).collect();
        let coupling_norm = couplings.iter().map(|c| c * c).sum::<f64>().sqrt();
        Ok(Self {
            modes,
            freq_sq,
            couplings,
            coupling_norm,
            sub,
            mass: 1.0,
        })
    }

    /// Sets the (common) bath mass; unit mass otherwise.
    pub fn with_mass(mut self, mass: f64) -> Result<Self, ConfigError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ConfigError::invalid("mass", "must be finite and positive"));
        }
        self.mass = mass;
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn modes(&self) -> &[BathMode] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn subsystem(&self) -> SubsystemParams {
        self.sub
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn frequencies_squared(&self) -> &[f64] {
        &self.freq_sq
    }

    /// Euclidean norm of the coupling coefficients.
    pub fn coupling_norm(&self) -> f64 {
        self.coupling_norm
    }

    pub fn gamma(&self, r: &[f64]) -> f64 {
        dot(&self.couplings, r)
    }

    pub fn local(&self, r: &[f64]) -> LocalFrame {
        LocalFrame::new(self.gamma(r), self.sub.omega)
    }

    pub fn bath_potential(&self, r: &[f64]) -> f64 {
        0.5 * self.freq_sq.iter().zip(r).map(|(w2, x)| w2 * x * x).sum::<f64>()
    }

    /// `E_α(R)`, bath potential included.
    pub fn energy(&self, r: &[f64], alpha: Surface) -> f64 {
        self.bath_potential(r) + self.local(r).electronic_energy(alpha)
    }

    /// Nonadiabatic coupling `d_12(R) = ⟨1;R|∇_R|2;R⟩ = -c Ω / (2(Ω² + γ²))`.
    pub fn coupling_vector(&self, local: &LocalFrame) -> Vec<f64> {
        let scale = local.coupling_scale();
        self.couplings.iter().map(|c| scale * c).collect()
    }

    /// Hellmann–Feynman force `F^α = -∇_R E_α`.
    pub fn hf_force(&self, r: &[f64], local: &LocalFrame, alpha: Surface) -> Vec<f64> {
        let scale = local.force_scale(alpha);
        self.freq_sq
            .iter()
            .zip(&self.couplings)
            .zip(r)
            .map(|((w2, c), x)| -w2 * x + c * scale)
            .collect()
    }

    pub fn frame(&self, r: &[f64]) -> AdiabaticFrame {
        let local = self.local(r);
        let bath_potential = self.bath_potential(r);
        let pick = |f: &dyn Fn(Surface, Surface) -> f64| {
            let mut m = [[0.0; 2]; 2];
            for a in Surface::BOTH {
                for b in Surface::BOTH {
                    m[a.index()][b.index()] = f(a, b);
                }
            }
            m
        };
        AdiabaticFrame {
            local,
            bath_potential,
            energies: Surface::BOTH.map(|a| bath_potential + local.electronic_energy(a)),
            evecs: local.eigenvectors(),
            d12: self.coupling_vector(&local),
            forces: Surface::BOTH.map(|a| self.hf_force(r, &local, a)),
            sigma_z_ad: pick(&|a, b| local.sigma_z(a, b)),
            rho0_ad: pick(&|a, b| local.rho_up(a, b)),
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
