//! Kinematic simulator of a rail-mounted gripper recovering a fallen bottle.
//!
//! The carriage moves on an X (lateral) and Z (vertical) rail in front of a
//! cabinet of shelves. The arm extends in depth (`reach`), the wrist pitches,
//! and the gripper opens and closes. Joints are position servos with
//! per-tick speed limits. The task runs in three stages: pick the lying
//! bottle, press it down against the shelf edge until it stands upright,
//! then place it on the shelf and let go.
//!
//! Inside the cabinet (`reach > shelf_depth`) the gripper must stay out of a
//! band under every shelf board and must not dip into the board surface;
//! entering that band, or driving a rail past its limit, is a safety halt.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::episode::{
    EnvLabel, Episode, JointVector, Step, TaskObservation, GRIPPER, PITCH, RAIL_X, RAIL_Z, REACH,
    STATE_DIM,
};
use crate::error::{Error, Result};

/// Distance within which the expert considers a waypoint reached.
const ARRIVE_TOL: f64 = 0.004;
/// Aperture at or below which a closing gripper latches onto the bottle.
const LATCH_APERTURE: f64 = 0.5;
/// Aperture below which the expert considers the grip settled.
const CLOSED_APERTURE: f64 = 0.05;
/// Aperture at or above which a held bottle is released.
const RELEASE_APERTURE: f64 = 0.5;
const REACH_MAX: f64 = 0.9;
/// Extra downward travel the expert adds beyond what uprights the bottle.
const PRESS_MARGIN: f64 = 0.02;
/// Wrist pitch below which the expert treats the press as finished.
const WRIST_TURNED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RailLimits {
    pub x: [f64; 2],
    pub z: [f64; 2],
}

impl RailLimits {
    pub fn contains(&self, rails: [f64; 2]) -> bool {
        (self.x[0]..=self.x[1]).contains(&rails[0]) && (self.z[0]..=self.z[1]).contains(&rails[1])
    }
}

/// Cabinet geometry, task tolerances and actuator limits for one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub env_label: EnvLabel,
    /// Shelf surface heights, bottom to top.
    pub shelf_z_levels: Vec<f64>,
    /// Depth of the shelf front edge, measured from the rail plane.
    pub shelf_depth: f64,
    pub shelf_x_extent: [f64; 2],
    /// Keep-out height under every shelf board.
    pub upper_clearance: f64,
    /// Minimum gripper height above a board surface inside the cabinet.
    pub surface_clearance: f64,
    pub bottle_height: f64,
    pub bottle_radius: f64,
    pub grasp_tolerance: f64,
    pub grasp_pitch_tolerance: f64,
    pub upright_tolerance: f64,
    pub place_tolerance: f64,
    pub max_steps: usize,
    pub rail_limits: RailLimits,
    /// Per-tick speed limit of each joint.
    pub joint_speed: [f64; STATE_DIM],
    /// Initial reach past the shelf edge.
    pub start_reach_inset: f64,
    /// Depth of the lying bottle's grip point past the shelf edge.
    pub bottle_depth_offset: f64,
    pub bottle_depth_jitter: f64,
    /// Downward travel at the shelf edge that turns a lying bottle upright.
    pub press_travel: f64,
    /// Gripper standoff in front of the edge while pressing.
    pub press_standoff: f64,
    pub press_window: f64,
    pub carry_lift: f64,
    pub place_inset: f64,
    pub place_lift: f64,
    /// Standard deviation of camera noise on observed offsets, meters.
    pub obs_noise_std: f64,
    pub tilt_noise_std: f64,
}

impl WorldConfig {
    /// The evaluation environment.
    pub fn env_b() -> Self {
        WorldConfig {
            env_label: EnvLabel::B,
            shelf_z_levels: vec![0.30, 0.70, 1.10, 1.50, 1.90, 2.30],
            shelf_depth: 0.33,
            shelf_x_extent: [1.0, 2.9],
            upper_clearance: 0.12,
            surface_clearance: 0.012,
            bottle_height: 0.20,
            bottle_radius: 0.035,
            grasp_tolerance: 0.02,
            grasp_pitch_tolerance: 0.3,
            upright_tolerance: 0.08,
            place_tolerance: 0.012,
            max_steps: 600,
            rail_limits: RailLimits {
                x: [0.0, 3.0],
                z: [0.1, 2.7],
            },
            joint_speed: [0.005, 0.005, 0.005, 0.05, 0.05],
            start_reach_inset: 0.03,
            bottle_depth_offset: 0.10,
            bottle_depth_jitter: 0.005,
            press_travel: 0.10,
            press_standoff: 0.04,
            press_window: 0.015,
            carry_lift: 0.04,
            place_inset: 0.08,
            place_lift: 0.03,
            obs_noise_std: 0.006,
            tilt_noise_std: 0.02,
        }
    }

    /// The second data-collection environment: another cabinet, with the
    /// rail a few centimeters closer to the shelves.
    pub fn env_a() -> Self {
        WorldConfig {
            env_label: EnvLabel::A,
            shelf_depth: 0.30,
            shelf_x_extent: [0.1, 1.0],
            ..WorldConfig::env_b()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.shelf_z_levels.is_empty() {
            return bad("no shelf levels");
        }
        if self.shelf_z_levels.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("shelf levels must be strictly increasing");
        }
        let positive = [
            self.grasp_tolerance,
            self.upright_tolerance,
            self.place_tolerance,
            self.grasp_pitch_tolerance,
            self.bottle_height,
            self.bottle_radius,
            self.press_travel,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) {
            return bad("tolerances and sizes must be positive");
        }
        if self.joint_speed.iter().any(|v| !(*v > 0.0)) {
            return bad("joint speeds must be positive");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1");
        }
        if self.obs_noise_std < 0.0 || self.tilt_noise_std < 0.0 {
            return bad("noise levels must be non-negative");
        }
        if !(self.rail_limits.x[0] < self.rail_limits.x[1] && self.rail_limits.z[0] < self.rail_limits.z[1]) {
            return bad("empty rail limits");
        }
        Ok(())
    }

    pub fn shelf_z(&self, shelf_index: usize) -> f64 {
        self.shelf_z_levels[shelf_index]
    }

    fn inside_cabinet(&self, reach: f64) -> bool {
        reach > self.shelf_depth
    }

    /// True when a gripper at height `z` and depth `reach` touches a board
    /// or its keep-out band.
    pub fn collides(&self, reach: f64, z: f64) -> bool {
        self.inside_cabinet(reach)
            && self
                .shelf_z_levels
                .iter()
                .any(|&board| z > board - self.upper_clearance && z < board + self.surface_clearance)
    }

    /// Shift every lateral coordinate of the world by `dx` and every
    /// vertical one by `dz`.
    pub fn translated(&self, dx: f64, dz: f64) -> Self {
        let mut out = self.clone();
        out.shelf_z_levels.iter_mut().for_each(|z| *z += dz);
        out.shelf_x_extent = [self.shelf_x_extent[0] + dx, self.shelf_x_extent[1] + dx];
        out.rail_limits.x = [self.rail_limits.x[0] + dx, self.rail_limits.x[1] + dx];
        out.rail_limits.z = [self.rail_limits.z[0] + dz, self.rail_limits.z[1] + dz];
        out
    }
}

/// Waypoints of the task on one shelf level.
#[derive(Debug, Clone, Copy)]
struct Waypoints {
    surface: f64,
    carry_z: f64,
    press_y: f64,
    contact_z: f64,
    clear_z: f64,
    place_y: f64,
    place_z: f64,
}

impl Waypoints {
    fn new(cfg: &WorldConfig, shelf_index: usize) -> Self {
        let surface = cfg.shelf_z(shelf_index);
        let half = cfg.bottle_height / 2.0;
        Waypoints {
            surface,
            carry_z: surface + cfg.bottle_radius + cfg.carry_lift,
            press_y: cfg.shelf_depth - cfg.press_standoff,
            contact_z: surface + cfg.bottle_radius,
            clear_z: surface + half + cfg.place_lift,
            place_y: cfg.shelf_depth + cfg.place_inset,
            place_z: surface + half,
        }
    }
}

/// Grip point and orientation of the bottle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bottle {
    pub x: f64,
    pub depth: f64,
    pub z: f64,
    /// 0 = upright, pi/2 = lying.
    pub tilt: f64,
}

impl Bottle {
    fn base_z(&self, height: f64) -> f64 {
        self.z - 0.5 * height * self.tilt.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HaltReason {
    Timeout,
    SafetyViolation,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Timeout => f.write_str("timeout"),
            HaltReason::SafetyViolation => f.write_str("safety-violation"),
        }
    }
}

/// Rubric progress. Flags only ever turn on, and only in field order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StageFlags {
    pub grasped: bool,
    pub uprighted: bool,
    pub bottom_on_shelf: bool,
    pub released_stable: bool,
}

impl StageFlags {
    pub fn as_array(&self) -> [bool; 4] {
        [self.grasped, self.uprighted, self.bottom_on_shelf, self.released_stable]
    }

    /// Flags are a prefix of trues.
    pub fn is_ordered(&self) -> bool {
        let a = self.as_array();
        a.windows(2).all(|w| w[0] || !w[1])
    }

    /// Each flag set in `earlier` is still set here.
    pub fn dominates(&self, earlier: &StageFlags) -> bool {
        self.as_array()
            .iter()
            .zip(earlier.as_array())
            .all(|(now, before)| *now || !before)
    }
}

/// One point per stage: grasp, upright, base on shelf, stable release.
pub fn score(flags: &StageFlags) -> u8 {
    flags.as_array().iter().filter(|f| **f).count() as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub robot: JointVector,
    pub bottle: Bottle,
    pub grasped: bool,
    /// Bottle released upright and standing on the shelf.
    pub resting: bool,
    pub shelf_index: usize,
    pub step_count: usize,
    pub halted: Option<HaltReason>,
    pub flags: StageFlags,
}

impl SimState {
    pub fn is_done(&self) -> bool {
        self.flags.released_stable
    }
}

/// Where an episode starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartCondition {
    pub rails: [f64; 2],
    pub shelf_index: usize,
    pub bottle_x: f64,
    pub seed: u64,
}

pub fn reset(config: &WorldConfig, start_rails: [f64; 2], shelf_index: usize, bottle_x: f64, rng_seed: u64) -> Result<SimState> {
    config.validate()?;
    if shelf_index >= config.shelf_z_levels.len() {
        return Err(Error::Config(format!(
            "shelf index {shelf_index} out of range ({} levels)",
            config.shelf_z_levels.len()
        )));
    }
    if !start_rails.iter().all(|v| v.is_finite()) || !config.rail_limits.contains(start_rails) {
        return Err(Error::OutOfLimits {
            x: start_rails[0],
            z: start_rails[1],
        });
    }
    let reach = config.shelf_depth + config.start_reach_inset;
    if config.collides(reach, start_rails[1]) {
        return Err(Error::Config(format!(
            "start height {} collides with a shelf board",
            start_rails[1]
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let jitter = if config.bottle_depth_jitter > 0.0 {
        rng.random_range(-config.bottle_depth_jitter..=config.bottle_depth_jitter)
    } else {
        0.0
    };
    let surface = config.shelf_z(shelf_index);
    Ok(SimState {
        robot: JointVector([start_rails[0], start_rails[1], reach, 0.0, 1.0]),
        bottle: Bottle {
            x: bottle_x,
            depth: config.shelf_depth + config.bottle_depth_offset + jitter,
            z: surface + config.bottle_radius,
            tilt: FRAC_PI_2,
        },
        grasped: false,
        resting: false,
        shelf_index,
        step_count: 0,
        halted: None,
        flags: StageFlags::default(),
    })
}

fn servo(current: &JointVector, command: &JointVector, speed: &[f64; STATE_DIM]) -> JointVector {
    let mut next = *current;
    for j in 0..STATE_DIM {
        let delta = command[j] - current[j];
        next[j] = if delta.abs() <= speed[j] {
            command[j]
        } else {
            current[j] + speed[j].copysign(delta)
        };
    }
    next[REACH] = next[REACH].clamp(0.0, REACH_MAX);
    next[GRIPPER] = next[GRIPPER].clamp(0.0, 1.0);
    next
}

/// Advance one tick with `command` as the joint targets.
pub fn step(config: &WorldConfig, state: &SimState, command: &JointVector) -> Result<SimState> {
    if let Some(reason) = state.halted {
        return Err(Error::Halted(reason.to_string()));
    }
    if !command.is_finite() {
        return Err(Error::Policy {
            step: state.step_count,
            message: "non-finite command".into(),
        });
    }
    let mut next = state.clone();
    next.step_count += 1;

    let moved = servo(&state.robot, command, &config.joint_speed);
    if !config.rail_limits.contains(moved.rails()) || config.collides(moved[REACH], moved[RAIL_Z]) {
        next.halted = Some(HaltReason::SafetyViolation);
        return Ok(next);
    }
    next.robot = moved;

    let wp = Waypoints::new(config, state.shelf_index);
    if next.grasped {
        carry_bottle(config, &wp, state, &mut next);
    } else if !next.resting && can_latch(config, &next) {
        next.grasped = true;
        next.flags.grasped = true;
    }

    if !next.is_done() && next.step_count >= config.max_steps {
        next.halted = Some(HaltReason::Timeout);
    }
    Ok(next)
}

fn can_latch(config: &WorldConfig, s: &SimState) -> bool {
    let r = &s.robot;
    let b = &s.bottle;
    r[GRIPPER] <= LATCH_APERTURE
        && (r[RAIL_X] - b.x).abs() <= config.bottle_height / 2.0 - config.bottle_radius
        && (r[REACH] - b.depth).abs() <= config.grasp_tolerance
        && (r[RAIL_Z] - b.z).abs() <= config.grasp_tolerance
        && (r[PITCH] - b.tilt).abs() <= config.grasp_pitch_tolerance
}

fn carry_bottle(config: &WorldConfig, wp: &Waypoints, prev: &SimState, next: &mut SimState) {
    let r = next.robot;
    let mut tilt = prev.bottle.tilt;

    // Pressing down at the edge rotates the bottle toward upright in
    // proportion to the downward travel below the contact height.
    let in_press_window = (r[REACH] - wp.press_y).abs() <= config.press_window;
    if in_press_window && tilt > 0.0 {
        let top = prev.robot[RAIL_Z].min(wp.contact_z);
        if r[RAIL_Z] < top {
            tilt = (tilt - FRAC_PI_2 / config.press_travel * (top - r[RAIL_Z])).max(0.0);
        }
    }
    next.bottle = Bottle {
        x: r[RAIL_X],
        depth: r[REACH],
        z: r[RAIL_Z],
        tilt,
    };

    let base_z = next.bottle.base_z(config.bottle_height);
    let over_shelf = r[REACH] - config.shelf_depth >= config.bottle_radius;
    let in_extent = (config.shelf_x_extent[0]..=config.shelf_x_extent[1]).contains(&r[RAIL_X]);
    let upright = tilt <= config.upright_tolerance;
    let seated = upright && over_shelf && in_extent && (base_z - wp.surface).abs() <= config.place_tolerance;

    next.flags.grasped = true;
    if upright {
        next.flags.uprighted = true;
    }
    if seated && next.flags.uprighted {
        next.flags.bottom_on_shelf = true;
    }

    if over_shelf && base_z < wp.surface - config.place_tolerance {
        // Driven into the shelf: the bottle is knocked over.
        drop_bottle(config, wp, next);
    } else if r[GRIPPER] >= RELEASE_APERTURE {
        if seated {
            next.grasped = false;
            next.resting = true;
            next.bottle.z = wp.surface + config.bottle_height / 2.0;
            next.flags.released_stable = next.flags.bottom_on_shelf;
        } else {
            drop_bottle(config, wp, next);
        }
    }
}

fn drop_bottle(config: &WorldConfig, wp: &Waypoints, next: &mut SimState) {
    next.grasped = false;
    next.bottle.tilt = FRAC_PI_2;
    next.bottle.z = if next.robot[REACH] > config.shelf_depth {
        wp.surface + config.bottle_radius
    } else {
        config.rail_limits.z[0]
    };
}

/// Exact egocentric observation.
pub fn observe(config: &WorldConfig, state: &SimState) -> TaskObservation {
    let r = &state.robot;
    TaskObservation {
        gripper_to_bottle: [state.bottle.depth - r[REACH], state.bottle.z - r[RAIL_Z]],
        bottle_tilt: state.bottle.tilt,
        gripper_to_shelf_edge: [
            config.shelf_depth - r[REACH],
            config.shelf_z(state.shelf_index) - r[RAIL_Z],
        ],
        bottle_grasped: state.grasped,
        gripper_aperture_seen: r[GRIPPER],
    }
}

/// Observation with Gaussian camera noise on offsets and tilt.
pub fn observe_noisy(config: &WorldConfig, state: &SimState, rng: &mut impl Rng) -> TaskObservation {
    let mut obs = observe(config, state);
    if config.obs_noise_std > 0.0 {
        let n = Normal::new(0.0, config.obs_noise_std).expect("valid std");
        for v in obs
            .gripper_to_bottle
            .iter_mut()
            .chain(obs.gripper_to_shelf_edge.iter_mut())
        {
            *v += n.sample(rng);
        }
    }
    if config.tilt_noise_std > 0.0 {
        let n = Normal::new(0.0, config.tilt_noise_std).expect("valid std");
        obs.bottle_tilt += n.sample(rng);
    }
    obs
}

/// Scripted demonstrator: Pick, then Press, then Place. A pure function of
/// the simulator state.
pub fn expert_action(state: &SimState, config: &WorldConfig) -> JointVector {
    let r = state.robot;
    let mut cmd = r;
    if state.resting || state.halted.is_some() {
        return cmd;
    }
    let wp = Waypoints::new(config, state.shelf_index);
    let near = |a: f64, b: f64| (a - b).abs() <= ARRIVE_TOL;

    if !state.grasped {
        let b = state.bottle;
        if b.depth <= config.shelf_depth {
            // Bottle is off the shelf; nothing sensible left to do.
            return cmd;
        }
        cmd[RAIL_X] = b.x;
        cmd[REACH] = b.depth;
        cmd[PITCH] = b.tilt;
        let above = near(r[REACH], b.depth);
        cmd[RAIL_Z] = if above { b.z } else { b.z + config.carry_lift };
        let at_grip = above && near(r[RAIL_Z], b.z) && (r[PITCH] - b.tilt).abs() <= 0.05;
        cmd[GRIPPER] = if at_grip { 0.0 } else { 1.0 };
        return cmd;
    }

    cmd[GRIPPER] = 0.0;
    if r[GRIPPER] > CLOSED_APERTURE && !state.flags.uprighted {
        // Finish closing before moving off.
        return cmd;
    }
    if r[PITCH] > WRIST_TURNED {
        // Carry the lying bottle out to the edge and press it down past the
        // point where it stands up; then turn the wrist.
        cmd[PITCH] = FRAC_PI_2;
        let press_bottom = wp.contact_z - config.press_travel - PRESS_MARGIN;
        let upright = state.bottle.tilt <= config.upright_tolerance;
        if upright && r[RAIL_Z] <= press_bottom + ARRIVE_TOL {
            cmd[PITCH] = 0.0;
        } else if near(r[REACH], wp.press_y) {
            cmd[RAIL_Z] = press_bottom;
        } else if r[RAIL_Z] < wp.carry_z - ARRIVE_TOL {
            cmd[RAIL_Z] = wp.carry_z;
        } else {
            cmd[REACH] = wp.press_y;
            cmd[RAIL_Z] = wp.carry_z;
        }
    } else {
        cmd[PITCH] = 0.0;
        if near(r[REACH], wp.place_y) {
            cmd[RAIL_Z] = wp.place_z;
            if near(r[RAIL_Z], wp.place_z) {
                cmd[GRIPPER] = 1.0;
            }
        } else if r[RAIL_Z] < wp.clear_z - ARRIVE_TOL {
            cmd[RAIL_Z] = wp.clear_z;
        } else {
            cmd[REACH] = wp.place_y;
            cmd[RAIL_Z] = wp.clear_z;
        }
    }
    cmd
}

/// Anything that can drive the robot for an episode.
///
/// Learned controllers must only read `sim.robot` (proprioception) and the
/// observation; the full state is passed so the scripted expert can share
/// the interface.
pub trait Controller {
    fn act(&mut self, sim: &SimState, obs: &TaskObservation) -> Result<JointVector>;
}

impl<F> Controller for F
where
    F: FnMut(&SimState, &TaskObservation) -> Result<JointVector>,
{
    fn act(&mut self, sim: &SimState, obs: &TaskObservation) -> Result<JointVector> {
        self(sim, obs)
    }
}

/// The scripted expert, optionally with bounded Gaussian jitter on the rail
/// and reach targets of joints that are on their way to a waypoint.
#[derive(Debug, Clone)]
pub struct Expert<'a> {
    config: &'a WorldConfig,
    jitter: Option<(f64, ChaCha8Rng)>,
}

impl<'a> Expert<'a> {
    pub fn new(config: &'a WorldConfig) -> Self {
        Expert { config, jitter: None }
    }

    pub fn with_jitter(config: &'a WorldConfig, std: f64, seed: u64) -> Self {
        Expert {
            config,
            jitter: (std > 0.0).then(|| (std, ChaCha8Rng::seed_from_u64(seed))),
        }
    }
}

impl Controller for Expert<'_> {
    fn act(&mut self, sim: &SimState, _obs: &TaskObservation) -> Result<JointVector> {
        let mut cmd = expert_action(sim, self.config);
        if let Some((std, rng)) = self.jitter.as_mut() {
            let n = Normal::new(0.0, *std).expect("valid std");
            for j in [RAIL_X, RAIL_Z, REACH] {
                let noise = n.sample(rng).clamp(-2.0 * *std, 2.0 * *std);
                // Joints holding position stay put, so noise cannot accumulate.
                if (cmd[j] - sim.robot[j]).abs() > ARRIVE_TOL {
                    cmd[j] += noise;
                }
            }
        }
        Ok(cmd)
    }
}

#[derive(Debug, Clone)]
pub struct Rollout {
    pub episode: Episode,
    pub flags: StageFlags,
    pub halt: Option<HaltReason>,
    pub final_state: SimState,
}

impl Rollout {
    pub fn score(&self) -> u8 {
        score(&self.flags)
    }

    pub fn steps_used(&self) -> usize {
        self.final_state.step_count
    }
}

const OBS_STREAM: u64 = 0x6f62_735f_6e6f_6973;

/// Roll out `policy` from `start` until the bottle stands released on the
/// shelf, the step budget runs out, or the safety monitor halts the robot.
pub fn run_episode(
    config: &WorldConfig,
    start: &StartCondition,
    episode_id: u64,
    policy: &mut dyn Controller,
    max_steps: usize,
) -> Result<Rollout> {
    let config = &WorldConfig {
        max_steps,
        ..config.clone()
    };
    let mut sim = reset(config, start.rails, start.shelf_index, start.bottle_x, start.seed)?;
    let mut noise = ChaCha8Rng::seed_from_u64(start.seed ^ OBS_STREAM);
    let mut steps = Vec::new();
    while !sim.is_done() && sim.halted.is_none() {
        let obs = observe_noisy(config, &sim, &mut noise);
        let action = policy.act(&sim, &obs).map_err(|e| Error::Policy {
            step: sim.step_count,
            message: e.to_string(),
        })?;
        steps.push(Step {
            t: sim.step_count,
            state: sim.robot,
            action,
            obs,
        });
        sim = step(config, &sim, &action)?;
    }
    let episode = Episode::new(episode_id, config.env_label, steps)?;
    Ok(Rollout {
        episode,
        flags: sim.flags,
        halt: sim.halted,
        final_state: sim,
    })
}
