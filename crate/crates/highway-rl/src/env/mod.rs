//! The highway MDP: scenario construction, 20 Hz world stepping with 1 s
//! decision periods, observation assembly, reward, collision detection and
//! episode termination.
//!
//! Lane 1 is the rightmost (preferred) lane with its centerline at y = 0;
//! lane numbers and y grow toward the left road edge.

mod collision;

pub use collision::{rects_intersect, OrientedRect};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::behavior::{
    idm_accel, scripted_lane_choice, IdmParams, LaneChange, LaneChangeContext, LeaderView,
    MobilParams,
};
use crate::error::{Error, Result};
use crate::kinematics::{integrate_step, BodyParams, ControlInput, VehicleState};

/// Observation vector length: 4 ego components plus 6 neighbor slots of 2.
pub const OBS_DIM: usize = 16;
/// Action vector length: acceleration and front steering.
pub const ACTION_DIM: usize = 2;
/// Duration of a scripted vehicle's lateral glide between lane centers.
pub const GLIDE_DURATION: f64 = 1.0;
/// Lockout after a completed scripted lane change.
pub const LANE_CHANGE_COOLDOWN: f64 = 3.0;

/// Scenario layout and timing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_lanes: usize,
    pub vehicles_per_lane: usize,
    pub lane_width: f64,
    pub road_length: f64,
    /// Simulation frequency in Hz.
    pub sim_freq: f64,
    /// Seconds between ego decisions.
    pub decision_period: f64,
    pub episode_duration: f64,
    pub spawn_speed_min: f64,
    pub spawn_speed_max: f64,
    pub v_max: f64,
    pub sensing_range: f64,
    /// Minimum bumper-to-bumper gap between same-lane vehicles at spawn.
    pub min_spawn_gap: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_lanes: 3,
            vehicles_per_lane: 5,
            lane_width: 4.0,
            road_length: 1000.0,
            sim_freq: 20.0,
            decision_period: 1.0,
            episode_duration: 50.0,
            spawn_speed_min: 23.0,
            spawn_speed_max: 25.0,
            v_max: 30.0,
            sensing_range: 200.0,
            min_spawn_gap: 15.0,
            seed: 0,
        }
    }
}

/// Look up a named scenario preset.
pub fn scenario_preset(name: &str) -> Option<ScenarioConfig> {
    let base = ScenarioConfig::default();
    match name {
        "default" => Some(base),
        "adapt1" => Some(ScenarioConfig { n_lanes: 4, vehicles_per_lane: 5, ..base }),
        "adapt2" => Some(ScenarioConfig { n_lanes: 2, vehicles_per_lane: 10, ..base }),
        _ => None,
    }
}

impl ScenarioConfig {
    pub fn dt(&self) -> f64 {
        1.0 / self.sim_freq
    }

    pub fn substeps_per_decision(&self) -> usize {
        (self.decision_period * self.sim_freq).round() as usize
    }

    pub fn max_decision_steps(&self) -> usize {
        (self.episode_duration / self.decision_period).round() as usize
    }

    /// Centerline of `lane` (1-based, lane 1 at y = 0).
    pub fn lane_center(&self, lane: usize) -> f64 {
        (lane as f64 - 1.0) * self.lane_width
    }

    pub fn right_road_edge(&self) -> f64 {
        -self.lane_width / 2.0
    }

    pub fn left_road_edge(&self) -> f64 {
        self.lane_center(self.n_lanes) + self.lane_width / 2.0
    }

    /// Most negative raw reward reachable in this scenario, used for
    /// normalizing rewards into [0, 1].
    pub fn min_raw_reward(&self) -> f64 {
        -(100.0 + 40.0 * ((self.n_lanes - 1) as f64).powi(2) + 10.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lanes == 0 || self.vehicles_per_lane == 0 {
            return Err(Error::Config("need at least one lane and one vehicle per lane".into()));
        }
        if !(self.lane_width > 0.0 && self.road_length > 0.0 && self.sensing_range > 0.0) {
            return Err(Error::Config("geometry must be positive".into()));
        }
        if !(self.sim_freq > 0.0 && self.decision_period > 0.0 && self.episode_duration > 0.0) {
            return Err(Error::Config("timing must be positive".into()));
        }
        let substeps = self.decision_period * self.sim_freq;
        if (substeps - substeps.round()).abs() > 1e-9 || substeps.round() < 1.0 {
            return Err(Error::Config(format!(
                "decision_period * sim_freq must be a positive integer, got {substeps}"
            )));
        }
        if !(self.spawn_speed_min <= self.spawn_speed_max && self.spawn_speed_max <= self.v_max) {
            return Err(Error::Config("spawn speed range must fit below v_max".into()));
        }
        Ok(())
    }
}

/// Continuous ego command: longitudinal acceleration and front steering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub accel: f64,
    pub steer: f64,
}

impl Action {
    pub fn control(&self) -> ControlInput {
        ControlInput { accel: self.accel, steer: self.steer }
    }
}

/// Lateral transition of a scripted vehicle between lane centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneGlide {
    pub from_y: f64,
    pub to_y: f64,
    /// Fraction of [`GLIDE_DURATION`] already elapsed.
    pub progress: f64,
}

/// One scripted (IDM + MOBIL) vehicle.
#[derive(Debug, Clone, PartialEq)]
pub struct SurroundingVehicle {
    pub state: VehicleState,
    /// Committed lane; switches to the target lane when a glide starts.
    pub lane: usize,
    /// Per-vehicle IDM request speed (its spawn speed).
    pub request_speed: f64,
    /// Seconds until the next lane-change evaluation is allowed.
    pub cooldown: f64,
    pub glide: Option<LaneGlide>,
}

/// Full simulation state of one episode.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub ego: VehicleState,
    pub surrounding: Vec<SurroundingVehicle>,
    pub elapsed: f64,
    pub finished: bool,
    substep_count: u64,
    decision_count: usize,
    #[allow(dead_code)]
    rng: ChaCha8Rng,
}

impl WorldState {
    /// Build a world directly from parts (used by tests and tools; normal
    /// episodes come from [`spawn_scenario`]).
    pub fn from_parts(ego: VehicleState, surrounding: Vec<SurroundingVehicle>) -> Self {
        Self {
            ego,
            surrounding,
            elapsed: 0.0,
            finished: false,
            substep_count: 0,
            decision_count: 0,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn decision_steps(&self) -> usize {
        self.decision_count
    }
}

/// Episode-termination flags; `done` implies at least one of these is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepInfo {
    pub collided: bool,
    pub off_road: bool,
    pub success: bool,
    pub truncated: bool,
}

/// Result of one decision step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward_raw: f64,
    pub reward_norm: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// Populate a world for one episode.
///
/// Each lane receives `vehicles_per_lane` vehicles with longitudinal
/// positions drawn uniformly over [30, 0.6 * road_length], redrawn until all
/// same-lane bumper gaps reach `min_spawn_gap`. The ego starts at x = 0 in
/// lane 1. Deterministic for a given `config.seed`.
pub fn spawn_scenario(config: &ScenarioConfig, body: &BodyParams) -> Result<WorldState> {
    config.validate()?;
    let lo = 30.0;
    let hi = config.road_length * 0.6;
    let k = config.vehicles_per_lane;
    let needed = (k as f64 - 1.0) * (config.min_spawn_gap + body.length);
    if hi <= lo || needed > hi - lo {
        return Err(Error::Config(format!(
            "cannot place {k} vehicles with {} m gaps in [{lo}, {hi}]",
            config.min_spawn_gap
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ego_v = rng.gen_range(config.spawn_speed_min..=config.spawn_speed_max);
    let ego = VehicleState { x: 0.0, y: config.lane_center(1), psi: 0.0, v: ego_v };

    let mut surrounding = Vec::with_capacity(config.n_lanes * k);
    for lane in 1..=config.n_lanes {
        let mut positions;
        let mut attempts = 0;
        loop {
            positions = (0..k).map(|_| rng.gen_range(lo..hi)).collect::<Vec<_>>();
            positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let ok = positions
                .windows(2)
                .all(|w| w[1] - w[0] - body.length >= config.min_spawn_gap);
            if ok {
                break;
            }
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::Config(format!(
                    "spawn rejection sampling failed for lane {lane}; configuration too tight"
                )));
            }
        }
        for x in positions {
            let v = rng.gen_range(config.spawn_speed_min..=config.spawn_speed_max);
            surrounding.push(SurroundingVehicle {
                state: VehicleState { x, y: config.lane_center(lane), psi: 0.0, v },
                lane,
                request_speed: v,
                cooldown: 0.0,
                glide: None,
            });
        }
    }

    Ok(WorldState {
        ego,
        surrounding,
        elapsed: 0.0,
        finished: false,
        substep_count: 0,
        decision_count: 0,
        rng,
    })
}

/// Index of the nearest lane centerline, 1 = rightmost. `y` is clamped to
/// the road bounds first; ties break toward the lower index.
pub fn lane_index(y: f64, config: &ScenarioConfig) -> usize {
    let y = y.clamp(config.right_road_edge(), config.left_road_edge());
    let mut best = 1;
    let mut best_dist = (y - config.lane_center(1)).abs();
    for lane in 2..=config.n_lanes {
        let dist = (y - config.lane_center(lane)).abs();
        if dist < best_dist {
            best = lane;
            best_dist = dist;
        }
    }
    best
}

/// Assemble the 16-component observation vector.
///
/// Layout: [v/v_max, (L-1)/(N-1), lateral offset / lane_width, psi] followed
/// by (leader, follower) slots for the left, current and right lanes, each
/// (distance / sensing_range, |speed difference| / v_max). A missing
/// neighbor reads (1, 0); a nonexistent adjacent lane reads (0, 0). Every
/// component is finally clamped into [-1, 1].
pub fn observe(world: &WorldState, config: &ScenarioConfig) -> Vec<f64> {
    let ego = world.ego;
    let ego_lane = lane_index(ego.y, config) as i64;
    let n = config.n_lanes as i64;

    let mut obs = Vec::with_capacity(OBS_DIM);
    obs.push(ego.v / config.v_max);
    obs.push(if n > 1 { (ego_lane - 1) as f64 / (n - 1) as f64 } else { 0.0 });
    obs.push((ego.y - config.lane_center(ego_lane as usize)) / config.lane_width);
    obs.push(ego.psi);

    for lane in [ego_lane + 1, ego_lane, ego_lane - 1] {
        if lane < 1 || lane > n {
            obs.extend_from_slice(&[0.0, 0.0, 0.0, 0.0]);
            continue;
        }
        let mut leader: Option<(f64, f64)> = None;
        let mut follower: Option<(f64, f64)> = None;
        for sur in &world.surrounding {
            if sur.lane as i64 != lane {
                continue;
            }
            let ds = sur.state.x - ego.x;
            if ds >= 0.0 {
                if ds <= config.sensing_range && leader.map_or(true, |(best, _)| ds < best) {
                    leader = Some((ds, sur.state.v));
                }
            } else if -ds <= config.sensing_range
                && follower.map_or(true, |(best, _)| -ds < best)
            {
                follower = Some((-ds, sur.state.v));
            }
        }
        for slot in [leader, follower] {
            match slot {
                Some((ds, v)) => {
                    obs.push(ds / config.sensing_range);
                    obs.push((ego.v - v).abs() / config.v_max);
                }
                None => {
                    obs.push(1.0);
                    obs.push(0.0);
                }
            }
        }
    }

    for c in &mut obs {
        *c = c.clamp(-1.0, 1.0);
    }
    obs
}

fn vehicle_rect(state: &VehicleState, body: &BodyParams) -> OrientedRect {
    OrientedRect::new(state.x, state.y, body.length, body.width, state.psi)
}

/// True iff the ego's oriented rectangle intersects any surrounding
/// vehicle's rectangle.
pub fn check_collision(world: &WorldState, body: &BodyParams) -> bool {
    let ego_rect = vehicle_rect(&world.ego, body);
    world
        .surrounding
        .iter()
        .any(|sur| rects_intersect(&ego_rect, &vehicle_rect(&sur.state, body)))
}

/// Instantaneous reward of the current state: (raw, normalized-to-[0,1]).
///
/// raw = -100*collision - 40*(L-1)^2 - 10*((v_max - v)/v_max)^2. The speed
/// term uses the normalized deficit so that every term stays within the
/// normalization bound regardless of units.
pub fn reward(world: &WorldState, collision: bool, config: &ScenarioConfig) -> (f64, f64) {
    let lane = lane_index(world.ego.y, config);
    let speed_deficit = (config.v_max - world.ego.v) / config.v_max;
    let raw = -100.0 * f64::from(collision)
        - 40.0 * ((lane - 1) as f64).powi(2)
        - 10.0 * speed_deficit.powi(2);
    let r_min = config.min_raw_reward();
    let norm = (raw - r_min) / (0.0 - r_min);
    (raw, norm)
}

/// True iff the ego has overtaken every surrounding vehicle by at least one
/// body length, or reached the end of the road.
pub fn is_success(world: &WorldState, config: &ScenarioConfig, body: &BodyParams) -> bool {
    world.ego.x >= config.road_length
        || world.surrounding.iter().all(|s| world.ego.x >= s.state.x + body.length)
}

/// Longitudinal snapshot of every vehicle, ego last, used for IDM gap and
/// MOBIL context computations.
struct Participant {
    x: f64,
    v: f64,
    lane: usize,
    request_speed: f64,
}

fn participants(world: &WorldState, config: &ScenarioConfig) -> Vec<Participant> {
    let mut parts: Vec<Participant> = world
        .surrounding
        .iter()
        .map(|s| Participant {
            x: s.state.x,
            v: s.state.v,
            lane: s.lane,
            request_speed: s.request_speed,
        })
        .collect();
    parts.push(Participant {
        x: world.ego.x,
        v: world.ego.v,
        lane: lane_index(world.ego.y, config),
        request_speed: config.v_max,
    });
    parts
}

/// Nearest vehicle strictly ahead of `subject` in `lane`, excluding
/// `subject` itself.
fn leader_in_lane(parts: &[Participant], subject: usize, lane: usize) -> Option<usize> {
    let x = parts[subject].x;
    let mut best: Option<usize> = None;
    for (i, p) in parts.iter().enumerate() {
        if i == subject || p.lane != lane || p.x <= x {
            continue;
        }
        if best.map_or(true, |b| p.x < parts[b].x) {
            best = Some(i);
        }
    }
    best
}

fn follower_in_lane(parts: &[Participant], subject: usize, lane: usize) -> Option<usize> {
    let x = parts[subject].x;
    let mut best: Option<usize> = None;
    for (i, p) in parts.iter().enumerate() {
        if i == subject || p.lane != lane || p.x > x {
            continue;
        }
        if best.map_or(true, |b| p.x > parts[b].x) {
            best = Some(i);
        }
    }
    best
}

fn leader_view(parts: &[Participant], follower: usize, leader: Option<usize>, body: &BodyParams) -> Option<LeaderView> {
    leader.map(|l| LeaderView {
        gap: (parts[l].x - parts[follower].x - body.length).max(0.0),
        closing_speed: parts[follower].v - parts[l].v,
    })
}

fn idm_for(parts: &[Participant], follower: usize, leader: Option<usize>, body: &BodyParams, idm: &IdmParams) -> f64 {
    let params = idm.with_request_speed(parts[follower].request_speed);
    idm_accel(parts[follower].v, leader_view(parts, follower, leader, body), &params)
}

/// IDM accelerations of all affected parties before/after moving `subject`
/// to `target_lane`, evaluated on the current snapshot.
fn mobil_context(
    parts: &[Participant],
    subject: usize,
    target_lane: usize,
    body: &BodyParams,
    idm: &IdmParams,
) -> LaneChangeContext {
    let current_lane = parts[subject].lane;
    let current_leader = leader_in_lane(parts, subject, current_lane);
    let target_leader = leader_in_lane(parts, subject, target_lane);
    let new_follower = follower_in_lane(parts, subject, target_lane);
    let old_follower = follower_in_lane(parts, subject, current_lane);

    let (nf_before, nf_after) = match new_follower {
        None => (0.0, 0.0),
        Some(nf) => (
            idm_for(parts, nf, target_leader, body, idm),
            idm_for(parts, nf, Some(subject), body, idm),
        ),
    };
    let (of_before, of_after) = match old_follower {
        None => (0.0, 0.0),
        Some(of) => (
            idm_for(parts, of, Some(subject), body, idm),
            idm_for(parts, of, current_leader, body, idm),
        ),
    };

    LaneChangeContext {
        subject_before: idm_for(parts, subject, current_leader, body, idm),
        subject_after: idm_for(parts, subject, target_leader, body, idm),
        new_follower_before: nf_before,
        new_follower_after: nf_after,
        old_follower_before: of_before,
        old_follower_after: of_after,
    }
}

/// MOBIL pass over all scripted vehicles; decisions are computed from one
/// snapshot and applied together.
fn scripted_lane_decisions(
    world: &mut WorldState,
    config: &ScenarioConfig,
    body: &BodyParams,
    idm: &IdmParams,
    mobil: &MobilParams,
) {
    let parts = participants(world, config);
    let mut changes: Vec<(usize, usize)> = Vec::new();
    for (i, sur) in world.surrounding.iter().enumerate() {
        if sur.glide.is_some() || sur.cooldown > 0.0 {
            continue;
        }
        let left = (sur.lane < config.n_lanes)
            .then(|| mobil_context(&parts, i, sur.lane + 1, body, idm));
        let right = (sur.lane > 1).then(|| mobil_context(&parts, i, sur.lane - 1, body, idm));
        if let Some(dir) = scripted_lane_choice(left.as_ref(), right.as_ref(), mobil) {
            let target = match dir {
                LaneChange::Left => sur.lane + 1,
                LaneChange::Right => sur.lane - 1,
            };
            changes.push((i, target));
        }
    }
    for (i, target) in changes {
        let sur = &mut world.surrounding[i];
        sur.glide = Some(LaneGlide {
            from_y: sur.state.y,
            to_y: config.lane_center(target),
            progress: 0.0,
        });
        sur.lane = target;
    }
}

/// Advance the world by one decision step, holding `action` constant over
/// all dynamics substeps.
///
/// Surrounding vehicles apply IDM each substep and execute MOBIL-approved
/// lane changes as a linear lateral glide; collision, road departure and
/// success are checked every substep and terminate immediately. The reward
/// is computed once, from the post-step state.
pub fn step(
    world: &mut WorldState,
    action: Action,
    config: &ScenarioConfig,
    body: &BodyParams,
    idm: &IdmParams,
    mobil: &MobilParams,
) -> Result<StepResult> {
    if world.finished {
        return Err(Error::EpisodeFinished);
    }

    let control = action.control().clamped(body);
    scripted_lane_decisions(world, config, body, idm, mobil);

    let dt = config.dt();
    let mut info = StepInfo::default();
    for _ in 0..config.substeps_per_decision() {
        // All IDM commands come from the same snapshot, then everyone moves.
        let parts = participants(world, config);
        let accels: Vec<f64> = (0..world.surrounding.len())
            .map(|i| {
                let lane = parts[i].lane;
                idm_for(&parts, i, leader_in_lane(&parts, i, lane), body, idm)
            })
            .collect();

        for (sur, accel) in world.surrounding.iter_mut().zip(accels) {
            sur.state = integrate_step(
                sur.state,
                ControlInput { accel, steer: 0.0 },
                body,
                dt,
            );
            if let Some(glide) = &mut sur.glide {
                glide.progress += dt / GLIDE_DURATION;
                let frac = glide.progress.min(1.0);
                sur.state.y = glide.from_y + (glide.to_y - glide.from_y) * frac;
                if glide.progress >= 1.0 {
                    sur.glide = None;
                    sur.cooldown = LANE_CHANGE_COOLDOWN;
                }
            } else if sur.cooldown > 0.0 {
                sur.cooldown = (sur.cooldown - dt).max(0.0);
            }
        }

        world.ego = integrate_step(world.ego, control, body, dt);
        world.substep_count += 1;
        world.elapsed = world.substep_count as f64 * dt;

        info.collided = check_collision(world, body);
        info.off_road = world.ego.y < config.right_road_edge()
            || world.ego.y > config.left_road_edge();
        if !info.collided && !info.off_road {
            info.success = is_success(world, config, body);
        }
        if info.collided || info.off_road || info.success {
            break;
        }
    }

    world.decision_count += 1;
    let terminal = info.collided || info.off_road || info.success;
    info.truncated = !terminal && world.decision_count >= config.max_decision_steps();
    let done = terminal || info.truncated;
    world.finished = done;

    let (reward_raw, reward_norm) = reward(world, info.collided || info.off_road, config);
    Ok(StepResult {
        observation: observe(world, config),
        reward_raw,
        reward_norm,
        done,
        info,
    })
}

/// Constant steering command that best moves the vehicle toward `target_y`
/// over one `horizon`-second hold.
///
/// From the small-angle bicycle model with constant steer d the terminal
/// offsets are linear in d: y(T) = y + v*psi*T + a*d and psi(T) = psi + b*d;
/// the returned command minimizes the weighted terminal error. The lateral
/// request per hold is limited to `max_lateral_step`.
pub fn lane_tracking_steer(
    state: &VehicleState,
    target_y: f64,
    body: &BodyParams,
    horizon: f64,
    max_lateral_step: f64,
) -> f64 {
    let v = state.v;
    if v < 1.0 {
        return 0.0;
    }
    let wheelbase = body.wheelbase();
    let t = horizon;
    let a = v * t * (v * t + 2.0 * body.l_r) / (2.0 * wheelbase);
    let b = v * t / wheelbase;
    let dy = (target_y - state.y).clamp(-max_lateral_step, max_lateral_step);
    let y_err = v * state.psi * t - dy;
    const HEADING_WEIGHT: f64 = 100.0;
    let steer = -(a * y_err + HEADING_WEIGHT * b * state.psi) / (a * a + HEADING_WEIGHT * b * b);
    steer.clamp(-body.steer_max, body.steer_max)
}

/// One row of the optional per-episode trajectory dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub ego_x: f64,
    pub ego_y: f64,
    pub ego_psi: f64,
    pub ego_v: f64,
    pub action_a: f64,
    pub action_delta: f64,
    pub reward_norm: f64,
    pub collided: u8,
}

/// Abstract episodic environment used by the trainers.
///
/// Action components lie in [-1, 1]; implementations map them onto their
/// physical command ranges.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Start a new episode and return its first observation.
    fn reset(&mut self) -> Vec<f64>;
    /// Advance one decision step.
    fn step(&mut self, action: &[f64]) -> Transition;
}

/// Outcome of one [`Environment::step`].
#[derive(Debug, Clone)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
}

/// Stateful episode wrapper around the highway world.
///
/// `new` leaves the environment in a finished state; call [`reset`] (or
/// [`reset_with_seed`]) to begin an episode.
///
/// [`reset`]: HighwayEnv::reset
/// [`reset_with_seed`]: HighwayEnv::reset_with_seed
#[derive(Debug, Clone)]
pub struct HighwayEnv {
    config: ScenarioConfig,
    body: BodyParams,
    idm: IdmParams,
    mobil: MobilParams,
    world: WorldState,
    last_info: StepInfo,
    reset_rng: ChaCha8Rng,
}

impl HighwayEnv {
    pub fn new(config: ScenarioConfig, seed: u64) -> Result<Self> {
        Self::with_models(config, BodyParams::default(), IdmParams::default(), MobilParams::default(), seed)
    }

    pub fn with_models(
        config: ScenarioConfig,
        body: BodyParams,
        idm: IdmParams,
        mobil: MobilParams,
        seed: u64,
    ) -> Result<Self> {
        config.validate()?;
        body.validate()?;
        let mut world = WorldState::from_parts(
            VehicleState { x: 0.0, y: 0.0, psi: 0.0, v: 0.0 },
            Vec::new(),
        );
        world.finished = true;
        Ok(Self {
            config,
            body,
            idm,
            mobil,
            world,
            last_info: StepInfo::default(),
            reset_rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn body(&self) -> &BodyParams {
        &self.body
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn last_info(&self) -> StepInfo {
        self.last_info
    }

    /// Begin a new episode with an explicit scenario seed.
    pub fn reset_with_seed(&mut self, seed: u64) -> Result<Vec<f64>> {
        let config = ScenarioConfig { seed, ..self.config.clone() };
        self.world = spawn_scenario(&config, &self.body)?;
        self.last_info = StepInfo::default();
        Ok(observe(&self.world, &self.config))
    }

    /// Step with a physical-unit action (clamped to the body's bounds).
    pub fn step_physical(&mut self, action: Action) -> Result<StepResult> {
        let result = step(
            &mut self.world,
            action,
            &self.config,
            &self.body,
            &self.idm,
            &self.mobil,
        )?;
        self.last_info = result.info;
        Ok(result)
    }
}

impl Environment for HighwayEnv {
    fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_dim(&self) -> usize {
        ACTION_DIM
    }

    fn reset(&mut self) -> Vec<f64> {
        let seed = self.reset_rng.gen::<u64>();
        self.reset_with_seed(seed).expect("scenario spawn failed")
    }

    fn step(&mut self, action: &[f64]) -> Transition {
        assert_eq!(action.len(), ACTION_DIM, "highway actions have 2 components");
        let physical = Action {
            accel: action[0] * self.body.a_max_cmd,
            steer: action[1] * self.body.steer_max,
        };
        let result = self.step_physical(physical).expect("stepped a finished episode");
        Transition {
            observation: result.observation,
            reward: result.reward_norm,
            done: result.done,
        }
    }
}

/// Scripted IDM + MOBIL controller for the ego, the non-learning reference.
///
/// Longitudinal command from IDM against the current-lane leader; lateral
/// command from [`lane_tracking_steer`] toward the MOBIL-chosen target lane,
/// re-evaluated once per decision with the same cooldown scripted vehicles
/// use.
#[derive(Debug, Clone)]
pub struct ReferenceDriver {
    idm: IdmParams,
    mobil: MobilParams,
    target_lane: usize,
    cooldown: f64,
}

impl ReferenceDriver {
    pub fn new(idm: IdmParams, mobil: MobilParams, config: &ScenarioConfig) -> Self {
        Self { idm: idm.with_request_speed(config.v_max), mobil, target_lane: 1, cooldown: 0.0 }
    }

    /// Re-arm for a fresh episode.
    pub fn reset(&mut self, world: &WorldState, config: &ScenarioConfig) {
        self.target_lane = lane_index(world.ego.y, config);
        self.cooldown = 0.0;
    }

    /// Decide the next held action for the current world.
    pub fn decide(
        &mut self,
        world: &WorldState,
        config: &ScenarioConfig,
        body: &BodyParams,
    ) -> Action {
        let parts = participants(world, config);
        let ego_idx = parts.len() - 1;
        let ego_lane = parts[ego_idx].lane;

        if self.cooldown > 0.0 {
            self.cooldown = (self.cooldown - config.decision_period).max(0.0);
        }
        let settled =
            (world.ego.y - config.lane_center(self.target_lane)).abs() < 0.2 * config.lane_width;
        if self.cooldown <= 0.0 && settled {
            let left = (ego_lane < config.n_lanes)
                .then(|| mobil_context(&parts, ego_idx, ego_lane + 1, body, &self.idm));
            let right = (ego_lane > 1)
                .then(|| mobil_context(&parts, ego_idx, ego_lane - 1, body, &self.idm));
            if let Some(dir) = scripted_lane_choice(left.as_ref(), right.as_ref(), &self.mobil) {
                self.target_lane = match dir {
                    LaneChange::Left => ego_lane + 1,
                    LaneChange::Right => ego_lane - 1,
                };
                self.cooldown = LANE_CHANGE_COOLDOWN;
            }
        }

        let accel = idm_for(
            &parts,
            ego_idx,
            leader_in_lane(&parts, ego_idx, ego_lane),
            body,
            &self.idm,
        );
        let steer = lane_tracking_steer(
            &world.ego,
            config.lane_center(self.target_lane),
            body,
            config.decision_period,
            config.lane_width / 2.0,
        );
        Action {
            accel: accel.clamp(body.a_min, body.a_max_cmd),
            steer,
        }
    }
}
