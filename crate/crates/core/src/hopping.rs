//! Stochastic sampling of momentum-jump transitions.
//!
//! Each short-time step may apply the transition operator to either index of
//! the propagated matrix element. A transition `α → β` with rate
//! `b = (P/M)·d_{αβ}` is accepted with probability `x̃/(1 + x̃)`, where
//! `x̃ = Δt|b|·ω` and `ω ∈ {0, 1}` is the energy-filter weight (always 1 for
//! the primitive scheme). Accepted transitions carry the weight `Δt·b/P`,
//! rejected ones `1/Q`, so the expectation reproduces `1 + Δt J` exactly.

use rand::Rng;
use thiserror::Error;

use crate::bath::PhasePoint;
use crate::model::{dot, AdiabaticFrame, SpinBoson, Surface};
use crate::trajectory::{Index, SegmentState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Primitive,
    Generalized,
}

/// How the filter energy of a prospective transition is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterMode {
    /// `P'²/2M + E_α - (P²/2M + E_β)` with `P'` from the approximate shift.
    Literal,
    /// `P'²/2M - P²/2M - ΔE_{αβ}/2`: the pair-energy error of the
    /// approximate shift, `M ΔE² / (8 (P·d̂)²)`.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Filter threshold `c_E`; ignored by the primitive scheme.
    pub c_e: f64,
    pub filter_mode: FilterMode,
    /// Maximum accepted transitions per propagated matrix element.
    pub n_max: usize,
}

impl SchemeConfig {
    pub fn primitive(n_max: usize) -> Self {
        Self {
            kind: SchemeKind::Primitive,
            c_e: f64::INFINITY,
            filter_mode: FilterMode::Literal,
            n_max,
        }
    }

    pub fn generalized(c_e: f64, filter_mode: FilterMode, n_max: usize) -> Self {
        Self {
            kind: SchemeKind::Generalized,
            c_e,
            filter_mode,
            n_max,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum ShiftError {
    #[error("momentum has no component along the coupling direction")]
    Orthogonal,
    #[error("insufficient momentum along the coupling direction (frustrated transition)")]
    Frustrated,
}

/// Returns `(x_abs, b)` with `b = (P/M)·d` and `x_abs = Δt|b|`.
pub fn transition_rate_x(p: &[f64], d: &[f64], dt: f64, mass: f64) -> (f64, f64) {
    let b = dot(p, d) / mass;
    (dt * b.abs(), b)
}

/// Approximate (first-order) momentum shift `P + ½ ΔE/((P/M)·d̂) d̂`.
pub fn approx_shift(p: &[f64], d_hat: &[f64], de: f64, mass: f64) -> Result<Vec<f64>, ShiftError> {
    let a = dot(p, d_hat);
    let shift = approx_shift_along(a, de, mass)? - a;
    Ok(p.iter().zip(d_hat).map(|(p, d)| p + shift * d).collect())
}

/// Energy-conserving momentum shift
/// `P - (P·d̂)d̂ + d̂ sign(P·d̂) √((P·d̂)² + M ΔE)`.
pub fn exact_shift(p: &[f64], d_hat: &[f64], de: f64, mass: f64) -> Result<Vec<f64>, ShiftError> {
    let a = dot(p, d_hat);
    let shift = exact_shift_along(a, de, mass)? - a;
    Ok(p.iter().zip(d_hat).map(|(p, d)| p + shift * d).collect())
}

/// Projection of the approximately shifted momentum onto `d̂`.
pub fn approx_shift_along(a: f64, de: f64, mass: f64) -> Result<f64, ShiftError> {
    if a == 0.0 {
        return Err(ShiftError::Orthogonal);
    }
    Ok(a + 0.5 * mass * de / a)
}

/// Projection of the exactly shifted momentum onto `d̂`.
pub fn exact_shift_along(a: f64, de: f64, mass: f64) -> Result<f64, ShiftError> {
    if de == 0.0 {
        return Ok(a);
    }
    let disc = a * a + mass * de;
    if disc < 0.0 {
        return Err(ShiftError::Frustrated);
    }
    // sign(0) = 0: with no momentum along d̂ only the zero-gap case conserves energy.
    if a == 0.0 {
        return Err(ShiftError::Orthogonal);
    }
    Ok(a.signum() * disc.sqrt())
}

/// Filter energy from the momentum component `a = P·d̂` and `ΔE_{αβ}`.
pub fn filter_energy_along(a: f64, de: f64, mode: FilterMode, mass: f64) -> Result<f64, ShiftError> {
    let shifted = approx_shift_along(a, de, mass)?;
    let kinetic = (shifted * shifted - a * a) / (2.0 * mass);
    Ok(match mode {
        FilterMode::Literal => kinetic + de,
        FilterMode::Residual => kinetic - 0.5 * de,
    })
}

/// Filter energy of the prospective transition `alpha → beta` at `x`.
pub fn filter_energy(
    x: &PhasePoint,
    frame: &AdiabaticFrame,
    alpha: Surface,
    beta: Surface,
    mode: FilterMode,
    mass: f64,
) -> Result<f64, ShiftError> {
    let d = frame.coupling(alpha, beta);
    let norm = dot(&d, &d).sqrt();
    if norm == 0.0 {
        return Err(ShiftError::Orthogonal);
    }
    let a = dot(&x.p, &d) / norm;
    let de = frame.energy(alpha) - frame.energy(beta);
    filter_energy_along(a, de, mode, mass)
}

/// Binary filter weight: 1 iff `e_f ≤ c_e`.
pub fn weight_omega(c_e: f64, e_f: f64) -> f64 {
    if e_f <= c_e {
        1.0
    } else {
        0.0
    }
}

/// Jump and no-jump probabilities `(x̃/(1+x̃), 1/(1+x̃))` with `x̃ = x_abs·ω`.
pub fn jump_probability(x_abs: f64, omega: f64) -> (f64, f64) {
    let x = x_abs * omega;
    (x / (1.0 + x), 1.0 / (1.0 + x))
}

/// Result of one transition attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionOutcome {
    pub jumped: bool,
    /// Post-jump momenta, present iff `jumped`.
    pub new_p: Option<Vec<f64>>,
    pub weight_factor: f64,
    /// The exact shift had no real solution, so the transition was suppressed.
    pub frustrated: bool,
}

impl TransitionOutcome {
    fn stay(weight_factor: f64, frustrated: bool) -> Self {
        Self {
            jumped: false,
            new_p: None,
            weight_factor,
            frustrated,
        }
    }
}

/// Everything about a candidate transition that does not depend on the draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub from: Surface,
    pub to: Surface,
    /// `(P/M)·d_{from,to}`.
    pub b: f64,
    pub x_abs: f64,
    /// `ΔE_{from,to}`.
    pub de: f64,
    /// `P·d̂`.
    pub a: f64,
    /// Orientation of `d_{from,to}` relative to the bath coupling vector `c`.
    pub d_sign: f64,
    pub omega: f64,
    pub frustrated: bool,
    pub prob_jump: f64,
    pub prob_stay: f64,
}

impl Candidate {
    /// Weight carried by the accepted branch, `Δt·b/P = sign(b)(1 + x̃)`.
    pub fn jump_weight(&self) -> f64 {
        self.b.signum() * (1.0 + self.x_abs * self.omega)
    }

    /// Weight carried by the rejected branch, `1/Q = 1 + x̃`.
    pub fn stay_weight(&self) -> f64 {
        1.0 + self.x_abs * self.omega
    }
}

impl Candidate {
    /// Builds the candidate `from → from.other()` from the rate `b`, the
    /// momentum component `a = P·d̂`, the gap `ΔE` and the orientation of `d̂`.
    ///
    /// `ω` is forced to 0 when the coupling vanishes, when `a = 0`, or when the
    /// exact shift would be frustrated.
    #[allow(clippy::too_many_arguments)]
    pub fn evaluate(
        from: Surface,
        b: f64,
        dt: f64,
        a: f64,
        de: f64,
        d_sign: f64,
        scheme: &SchemeConfig,
        mass: f64,
    ) -> Self {
        let x_abs = dt * b.abs();
        let mut frustrated = false;
        let omega = if b == 0.0 || a == 0.0 {
            0.0
        } else if a * a + mass * de < 0.0 {
            frustrated = true;
            0.0
        } else {
            match scheme.kind {
                SchemeKind::Primitive => 1.0,
                SchemeKind::Generalized => {
                    match filter_energy_along(a, de, scheme.filter_mode, mass) {
                        Ok(e_f) => weight_omega(scheme.c_e, e_f),
                        Err(_) => 0.0,
                    }
                }
            }
        };
        let (prob_jump, prob_stay) = jump_probability(x_abs, omega);
        Self {
            from,
            to: from.other(),
            b,
            x_abs,
            de,
            a,
            d_sign,
            omega,
            frustrated,
            prob_jump,
            prob_stay,
        }
    }
}

/// Evaluates the transition of `index` to the other surface, without drawing.
pub fn candidate(
    seg: &SegmentState,
    index: Index,
    scheme: &SchemeConfig,
    dt: f64,
    model: &SpinBoson,
) -> Candidate {
    let mass = model.mass();
    let local = seg.local();
    let from = seg.pair.label(index);
    let to = from.other();
    let orientation = match from {
        Surface::Lower => 1.0,
        Surface::Upper => -1.0,
    };
    // d_{from,to} = d_scale · c
    let d_scale = orientation * local.coupling_scale();
    let p_dot_c = dot(&seg.x.p, model.couplings());
    let b = d_scale * p_dot_c / mass;
    let c_norm = model.coupling_norm();
    let a = if c_norm > 0.0 {
        d_scale.signum() * p_dot_c / c_norm
    } else {
        0.0
    };
    Candidate::evaluate(
        from,
        b,
        dt,
        a,
        local.energy_gap(from, to),
        d_scale.signum(),
        scheme,
        mass,
    )
}

/// Samples the transition term of one index for the current step.
///
/// Skipped (no draw, weight 1) once the segment has reached `n_max` jumps;
/// otherwise exactly one uniform is drawn. An accepted jump relabels the index
/// and applies the exact momentum shift to `seg`.
pub fn attempt_transition<G: Rng + ?Sized>(
    seg: &mut SegmentState,
    index: Index,
    scheme: &SchemeConfig,
    dt: f64,
    model: &SpinBoson,
    rng: &mut G,
) -> TransitionOutcome {
    if seg.jumps >= scheme.n_max {
        return TransitionOutcome::stay(1.0, false);
    }
    let cand = candidate(seg, index, scheme, dt, model);
    let u: f64 = rng.random();
    if u >= cand.prob_jump {
        return TransitionOutcome::stay(cand.stay_weight(), cand.frustrated);
    }

    // prob_jump > 0 implies a ≠ 0 and a non-negative discriminant.
    let shifted = exact_shift_along(cand.a, cand.de, model.mass())
        .expect("accepted transition has a real momentum shift");
    // P += (a' - a) d̂ with d̂ = d_sign · c/|c|
    let step = cand.d_sign * (shifted - cand.a) / model.coupling_norm();
    for (p, c) in seg.x.p.iter_mut().zip(model.couplings()) {
        *p += step * c;
    }
    seg.jump_to(index, cand.to);
    TransitionOutcome {
        jumped: true,
        new_p: Some(seg.x.p.clone()),
        weight_factor: cand.jump_weight(),
        frustrated: false,
    }
}
