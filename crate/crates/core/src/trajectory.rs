//! Adiabatic segments: velocity-Verlet motion of the bath on the mean of the
//! two surfaces selected by the propagated matrix element, with trapezoidal
//! accumulation of the Bohr phase.

use crate::bath::PhasePoint;
use crate::error::BlowUp;
use crate::model::{LocalFrame, SpinBoson, Surface};

/// Which side of the matrix element `χ^{αα'}` a transition acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Index {
    Ket,
    Bra,
}

/// Ordered pair `(α, α')` labelling a propagated matrix element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairState {
    pub alpha: Surface,
    pub alpha_prime: Surface,
}

impl PairState {
    /// The four pairs in row-major order: (1,1), (1,2), (2,1), (2,2).
    pub const ALL: [PairState; 4] = [
        PairState::new(Surface::Lower, Surface::Lower),
        PairState::new(Surface::Lower, Surface::Upper),
        PairState::new(Surface::Upper, Surface::Lower),
        PairState::new(Surface::Upper, Surface::Upper),
    ];

    pub const fn new(alpha: Surface, alpha_prime: Surface) -> Self {
        Self { alpha, alpha_prime }
    }

    pub fn is_diagonal(&self) -> bool {
        self.alpha == self.alpha_prime
    }

    pub fn label(&self, index: Index) -> Surface {
        match index {
            Index::Ket => self.alpha,
            Index::Bra => self.alpha_prime,
        }
    }

    pub fn with_label(self, index: Index, label: Surface) -> Self {
        match index {
            Index::Ket => Self { alpha: label, ..self },
            Index::Bra => Self {
                alpha_prime: label,
                ..self
            },
        }
    }

    pub fn transposed(self) -> Self {
        Self::new(self.alpha_prime, self.alpha)
    }

    /// Position in [`PairState::ALL`].
    pub fn ordinal(&self) -> usize {
        2 * self.alpha.index() + self.alpha_prime.index()
    }
}

/// Mean-surface force `½(F^α + F^α')`.
pub fn mean_force(x: &PhasePoint, pair: PairState, model: &SpinBoson) -> Vec<f64> {
    let local = model.local(&x.r);
    let scale = mean_force_scale(&local, pair);
    model
        .frequencies_squared()
        .iter()
        .zip(model.couplings())
        .zip(&x.r)
        .map(|((w2, c), r)| -w2 * r + c * scale)
        .collect()
}

fn mean_force_scale(local: &LocalFrame, pair: PairState) -> f64 {
    0.5 * (local.force_scale(pair.alpha) + local.force_scale(pair.alpha_prime))
}

/// Mean-surface Hamiltonian `P²/2M + (E_α + E_α')/2`, conserved along
/// adiabatic segments and across exact momentum jumps.
pub fn pair_energy(x: &PhasePoint, pair: PairState, model: &SpinBoson) -> f64 {
    let local = model.local(&x.r);
    let kinetic = x.p.iter().map(|p| p * p).sum::<f64>() / (2.0 * model.mass());
    kinetic
        + model.bath_potential(&x.r)
        + 0.5 * (local.electronic_energy(pair.alpha) + local.electronic_energy(pair.alpha_prime))
}

/// State of one sequentially propagated matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentState {
    pub x: PhasePoint,
    pub pair: PairState,
    /// Accumulated `∫ ω_{αα'} dt'`.
    pub phase: f64,
    pub t: f64,
    /// Completed time steps.
    pub steps: usize,
    /// Accepted transitions so far.
    pub jumps: usize,
    local: LocalFrame,
}

impl SegmentState {
    pub fn new(x: PhasePoint, pair: PairState, model: &SpinBoson) -> Self {
        let local = model.local(&x.r);
        Self {
            x,
            pair,
            phase: 0.0,
            t: 0.0,
            steps: 0,
            jumps: 0,
            local,
        }
    }

    /// Adiabatic frame at the current position.
    pub fn local(&self) -> &LocalFrame {
        &self.local
    }

    /// Advances one velocity-Verlet step of length `dt` on the mean surface of
    /// the current pair and adds the trapezoidal phase increment.
    pub fn step(&mut self, dt: f64, model: &SpinBoson) -> Result<(), BlowUp> {
        let half = 0.5 * dt;
        let drift = dt / model.mass();
        let w2 = model.frequencies_squared();
        let c = model.couplings();
        let omega_old = self.local.bohr_frequency(self.pair.alpha, self.pair.alpha_prime);

        let scale = mean_force_scale(&self.local, self.pair);
        let mut gamma = 0.0;
        for j in 0..w2.len() {
            let p = self.x.p[j] + half * (c[j] * scale - w2[j] * self.x.r[j]);
            let r = self.x.r[j] + drift * p;
            gamma += c[j] * r;
            self.x.p[j] = p;
            self.x.r[j] = r;
        }

        self.local = LocalFrame::new(gamma, model.subsystem().omega);
        let scale = mean_force_scale(&self.local, self.pair);
        let mut norm = 0.0;
        for j in 0..w2.len() {
            let p = self.x.p[j] + half * (c[j] * scale - w2[j] * self.x.r[j]);
            norm += p * p + self.x.r[j] * self.x.r[j];
            self.x.p[j] = p;
        }

        let omega_new = self.local.bohr_frequency(self.pair.alpha, self.pair.alpha_prime);
        self.phase += half * (omega_old + omega_new);
        self.steps += 1;
        self.t = self.steps as f64 * dt;

        if norm.is_finite() && gamma.is_finite() && self.phase.is_finite() {
            Ok(())
        } else {
            Err(BlowUp { time: self.t })
        }
    }

    /// Relabels one index after an accepted transition.
    pub(crate) fn jump_to(&mut self, index: Index, label: Surface) {
        self.pair = self.pair.with_label(index, label);
        self.jumps += 1;
    }
}
