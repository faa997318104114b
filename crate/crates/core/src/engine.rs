//! Monte Carlo estimator of `⟨σ_z(t)⟩` by sequential short-time propagation.
//!
//! Each trajectory samples a bath phase point from the thermal Wigner function
//! and propagates the matrix elements `σ_z^{αα'}` forward in the Heisenberg
//! picture: every step is a mean-surface Verlet step with phase accumulation,
//! followed by one transition attempt on the ket and one on the bra index.
//! The per-trajectory estimate is
//! `Σ_{αα'} ρ^{α'α}(X₀) · w · Re[e^{iθ} σ_z^{α_t α'_t}(R_t)]`
//! where `w` is the running product of transition weight factors and `θ` the
//! accumulated Bohr phase.
//!
//! Random numbers come from ChaCha8 streams keyed by `(seed, trajectory)`, so
//! results do not depend on scheduling or the number of worker threads.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bath::{discretize_ohmic, sample_wigner, BathSpec, PhasePoint};
use crate::error::{BlowUp, ConfigError, EngineError};
use crate::hopping::{attempt_transition, SchemeConfig};
use crate::model::{SpinBoson, SubsystemParams, Surface};
use crate::stats::{Accumulator, EstimatorSeries, RunMetadata};
use crate::trajectory::{Index, PairState, SegmentState};

/// How initial matrix elements are chosen for a sampled phase point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairSampling {
    /// Propagate all four pairs from every phase point, weighted by `ρ^{α'α}`.
    Stratified,
    /// Propagate one uniformly drawn pair, weighted by `4ρ^{α'α}`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bath: BathSpec,
    pub sub: SubsystemParams,
    pub scheme: SchemeConfig,
    pub dt: f64,
    pub t_max: f64,
    pub n_traj: usize,
    pub record_stride: usize,
    pub seed: u64,
    pub mass: f64,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub pair_sampling: PairSampling,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bath: BathSpec::default(),
            sub: SubsystemParams { omega: 1.0 / 3.0 },
            scheme: SchemeConfig::primitive(2),
            dt: 0.01,
            t_max: 20.0,
            n_traj: 1000,
            record_stride: 10,
            seed: 0,
            mass: 1.0,
            threads: 0,
            pair_sampling: PairSampling::Stratified,
        }
    }
}

/// Largest trajectory index whose stream family fits in the 64-bit stream id.
const MAX_TRAJ: usize = (u64::MAX / STREAMS_PER_TRAJ) as usize;
const STREAMS_PER_TRAJ: u64 = 5;

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.bath.validate()?;
        self.sub.validate()?;
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, "must be finite and positive"))
            }
        };
        positive("dt", self.dt)?;
        positive("t_max", self.t_max)?;
        positive("mass", self.mass)?;
        if self.n_traj == 0 || self.n_traj > MAX_TRAJ {
            return Err(ConfigError::invalid("n_traj", "must be at least 1"));
        }
        if self.record_stride == 0 {
            return Err(ConfigError::invalid("record_stride", "must be at least 1"));
        }
        if self.scheme.c_e.is_nan() {
            return Err(ConfigError::invalid("c_e", "must not be NaN"));
        }
        if self.scheme.n_max > u16::MAX as usize {
            return Err(ConfigError::invalid("n_max", "too large"));
        }
        Ok(())
    }

    /// Number of time steps, `round(t_max / dt)`.
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    pub fn grid_times(&self) -> Vec<f64> {
        (0..=self.n_steps() / self.record_stride)
            .map(|i| (i * self.record_stride) as f64 * self.dt)
            .collect()
    }
}

/// One accepted transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// Step count at which the transition was applied.
    pub step: usize,
    pub time: f64,
    pub index: Index,
    pub from: Surface,
    pub to: Surface,
}

/// History of one propagated matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub initial: PairState,
    pub jumps: Vec<JumpEvent>,
    /// Accepted jumps so far at each grid point.
    pub jump_counts: Vec<usize>,
    pub final_jump_count: usize,
}

/// Per-trajectory contributions on the recording grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Real part of the trajectory's estimate of `⟨σ_z(t)⟩`.
    pub contributions: Vec<f64>,
    /// Imaginary part, discarded by the estimator but tracked as a diagnostic.
    pub imaginary: Vec<f64>,
    pub paths: Vec<PathRecord>,
}

/// Sampled phase point with its initial matrix elements and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSample {
    pub x: PhasePoint,
    /// `(pair, weight0)` for each element to propagate.
    pub pairs: Vec<(PairState, f64)>,
}

/// A configured simulation.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: RunConfig,
    model: SpinBoson,
    grid: Vec<f64>,
}

impl Engine {
    pub fn new(cfg: RunConfig) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let modes = discretize_ohmic(&cfg.bath)?;
        let model = SpinBoson::new(modes, cfg.sub)?.with_mass(cfg.mass)?;
        let grid = cfg.grid_times();
        Ok(Self { cfg, model, grid })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn model(&self) -> &SpinBoson {
        &self.model
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Random stream `sub` of trajectory `traj`: 0 feeds initial conditions,
    /// `1 + ordinal` feeds the transitions of the pair with that ordinal.
    pub fn stream(&self, traj: usize, sub: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(traj as u64 * STREAMS_PER_TRAJ + sub);
        rng
    }

    /// Draws the bath phase point (two uniforms per mode) and, for uniform
    /// pair sampling, one further `u64` selecting the pair.
    pub fn init_sample<G: RngCore + ?Sized>(&self, rng: &mut G) -> InitialSample {
        let x = sample_wigner(self.model.modes(), self.cfg.bath.beta, rng);
        let local = self.model.local(&x.r);
        let weight = |pair: PairState| local.rho_up(pair.alpha_prime, pair.alpha);
        let pairs = match self.cfg.pair_sampling {
            PairSampling::Stratified => PairState::ALL.iter().map(|&p| (p, weight(p))).collect(),
            PairSampling::Uniform => {
                let pair = PairState::ALL[(rng.next_u64() >> 62) as usize];
                vec![(pair, 4.0 * weight(pair))]
            }
        };
        InitialSample { x, pairs }
    }

    pub fn run_trajectory(&self, traj_index: usize) -> Result<TrajectoryRecord, BlowUp> {
        let init = self.init_sample(&mut self.stream(traj_index, 0));
        let len = self.grid.len();
        let mut record = TrajectoryRecord {
            contributions: vec![0.0; len],
            imaginary: vec![0.0; len],
            paths: Vec::with_capacity(init.pairs.len()),
        };
        for &(pair, weight0) in &init.pairs {
            let mut rng = self.stream(traj_index, 1 + pair.ordinal() as u64);
            let path = self.run_path(&init.x, pair, weight0, &mut rng, &mut record)?;
            record.paths.push(path);
        }
        Ok(record)
    }

    fn run_path(
        &self,
        x0: &PhasePoint,
        pair: PairState,
        weight0: f64,
        rng: &mut ChaCha8Rng,
        record: &mut TrajectoryRecord,
    ) -> Result<PathRecord, BlowUp> {
        let cfg = &self.cfg;
        let n_steps = cfg.n_steps();
        let mut seg = SegmentState::new(x0.clone(), pair, &self.model);
        let mut weight = weight0;
        let mut path = PathRecord {
            initial: pair,
            jumps: Vec::new(),
            jump_counts: Vec::with_capacity(self.grid.len()),
            final_jump_count: 0,
        };
        let mut g = 0;
        for s in 0..=n_steps {
            if s % cfg.record_stride == 0 {
                let sz = seg.local().sigma_z(seg.pair.alpha, seg.pair.alpha_prime);
                let (sin, cos) = seg.phase.sin_cos();
                record.contributions[g] += weight * cos * sz;
                record.imaginary[g] += weight * sin * sz;
                path.jump_counts.push(seg.jumps);
                g += 1;
            }
            if s == n_steps {
                break;
            }
            seg.step(cfg.dt, &self.model)?;
            for index in [Index::Ket, Index::Bra] {
                let from = seg.pair.label(index);
                let outcome = attempt_transition(&mut seg, index, &cfg.scheme, cfg.dt, &self.model, rng);
                weight *= outcome.weight_factor;
                if outcome.jumped {
                    path.jumps.push(JumpEvent {
                        step: seg.steps,
                        time: seg.t,
                        index,
                        from,
                        to: from.other(),
                    });
                }
            }
            if !weight.is_finite() {
                return Err(BlowUp { time: seg.t });
            }
        }
        path.final_jump_count = seg.jumps;
        Ok(path)
    }

    /// Runs the ensemble and reduces it to mean, stderr and jump fractions.
    pub fn estimate(&self) -> Result<EstimatorSeries, EngineError> {
        let started = Instant::now();
        let n_traj = self.cfg.n_traj;
        let n_blocks = n_traj.div_ceil(BLOCK);
        let run_block = |b: usize| -> Result<(Accumulator, Vec<BlowUp>), EngineError> {
            let mut acc = Accumulator::new(self.grid.clone(), self.cfg.scheme.n_max);
            let mut aborted = Vec::new();
            for traj in b * BLOCK..((b + 1) * BLOCK).min(n_traj) {
                match self.run_trajectory(traj) {
                    Ok(record) => acc.absorb(&record)?,
                    Err(e) => aborted.push(e),
                }
            }
            Ok((acc, aborted))
        };

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.threads)
            .build()
            .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
        let blocks: Vec<_> = pool.install(|| {
            (0..n_blocks)
                .into_par_iter()
                .map(run_block)
                .collect::<Result<Vec<_>, _>>()
        })?;

        let mut total = Accumulator::new(self.grid.clone(), self.cfg.scheme.n_max);
        let mut aborted = Vec::new();
        for (acc, ab) in &blocks {
            total.merge(acc)?;
            aborted.extend_from_slice(ab);
        }
        let limit = n_traj / 1000;
        if aborted.len() > limit {
            return Err(EngineError::AbortRate {
                aborted: aborted.len(),
                total: n_traj,
                limit,
                first: aborted[0].clone(),
            });
        }
        let mut series = total.finalize()?;
        series.meta = RunMetadata {
            config: crate::config::echo(&self.cfg),
            seed: self.cfg.seed,
            aborted: aborted.len(),
            wall_time_s: started.elapsed().as_secs_f64(),
        };
        Ok(series)
    }
}

/// Trajectories per work item; fixed so the reduction tree never depends on
/// the number of threads.
const BLOCK: usize = 64;

/// Convenience wrapper: build an engine and run the ensemble.
pub fn estimate(cfg: &RunConfig) -> Result<EstimatorSeries, EngineError> {
    Engine::new(cfg.clone())?.estimate()
}

/// Convenience wrapper around [`Engine::run_trajectory`].
pub fn run_trajectory(cfg: &RunConfig, traj_index: usize) -> Result<TrajectoryRecord, EngineError> {
    let engine = Engine::new(cfg.clone())?;
    if traj_index >= cfg.n_traj {
        return Err(ConfigError::invalid("traj_index", "must be below n_traj").into());
    }
    engine
        .run_trajectory(traj_index)
        .map_err(|first| EngineError::AbortRate {
            aborted: 1,
            total: 1,
            limit: 0,
            first,
        })
}
