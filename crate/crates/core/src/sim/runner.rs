//! The fixed-step guidance cycle loop.
//!
//! Per cycle: camera frame (rate gated) goes out on the detection topic,
//! guidance rebuilds nodes from the newest frame, the tracker publishes true
//! or spoofed chaser states, guidance advances mission status and emits
//! quantized moves, chasers execute what they accept, and the world advances
//! with collision checks at substep resolution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::report::{ChaserResult, Metrics, Outcome, RunReport, TrajectorySample};
use super::scenario::{ChaserSpec, Scenario};
use super::SimError;
use crate::apf::{total_acceleration, update_status_each, ChaserState, ChaserStatus};
use crate::fleet::{
    apply_faults, execute, quantize, reported_position, FailureReason, MoveCommand, Quantized, VehicleState,
};
use crate::frames::{apf_from_tracker, tracker_from_apf, Framed, Tracker, Vec3};
use crate::net::{
    Bus, Channel, CommandBody, CommandMsg, CommandReceiver, DetectionMsg, TrackedBody, TrackerMsg, TrackerView,
    TransportKind, WireDetection,
};
use crate::vision::{rebuild_from_points, DetectionClass, NodeSet, VisionSensor};

/// Overrides applied on top of a scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub transport: Option<TransportKind>,
}

impl RunOptions {
    pub fn apply(&self, sc: &Scenario) -> Scenario {
        let mut sc = sc.clone();
        if let Some(s) = self.seed {
            sc.seed = s;
        }
        if let Some(k) = self.transport {
            sc.transport.kind = k;
        }
        sc
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn micros(t: f64) -> u64 {
    (t * 1e6).round() as u64
}

struct Agent {
    spec: ChaserSpec,
    index: usize,
    vehicle: VehicleState,
    guidance: ChaserState,
    receiver: CommandReceiver,
    next_seq: u64,
    fault_rng: ChaCha8Rng,
    depth_rng: ChaCha8Rng,
    /// This chaser's own node view when its depth sensing is degraded.
    own_nodes: Option<NodeSet>,
    depth_bias: Option<f64>,
    spoofed: bool,
    failure: Option<FailureReason>,
    docked_at: Option<f64>,
    sent: u64,
    rejected: u64,
}

impl Agent {
    fn airborne(&self) -> bool {
        !self.vehicle.landed
    }

    /// Which fault explains a crash of this chaser.
    fn blame(&self) -> FailureReason {
        let f = &self.spec.faults;
        if f.imu_drift.is_some() {
            FailureReason::ImuFailed
        } else if self.spoofed {
            FailureReason::TrackerError
        } else if f.depth_noise_multiplier.is_some() {
            FailureReason::DepthError
        } else {
            FailureReason::Collision
        }
    }

    fn crash(&mut self) {
        self.vehicle.land();
        self.guidance.status = ChaserStatus::Failed;
        self.failure = Some(self.blame());
    }

    /// Classification for a chaser still flying when time or battery runs out.
    fn time_out(&mut self, stall_threshold: u32) {
        if self.guidance.status.is_terminal() {
            return;
        }
        if self.guidance.stall_counter >= stall_threshold {
            self.guidance.status = ChaserStatus::InspectionOrbit;
        } else {
            self.guidance.status = ChaserStatus::Failed;
            self.failure = Some(FailureReason::Timeout);
        }
    }
}

/// Runs a scenario as written.
pub fn run(sc: &Scenario) -> Result<RunReport, SimError> {
    run_with(sc, &RunOptions::default())
}

pub fn run_with(sc: &Scenario, opts: &RunOptions) -> Result<RunReport, SimError> {
    let sc = opts.apply(sc);
    sc.validate()?;
    let transport = sc.transport.open(sc.chasers.len(), sc.seed).map_err(SimError::Net)?;
    let mut bus = Bus::new(transport);

    let apf = &sc.apf;
    let rcfg = sc.rebuild_config();
    let dt = apf.cycle_period;
    let substeps = sc.arena.substeps;
    let camera_pose = sc.camera.pose;
    let tracker_pose = sc.tracker_pose;
    let noise = sc.noise();

    let mut sensor = VisionSensor::new(sc.camera, noise, sc.seed ^ 0x7669_7369_6f6e);
    sensor.period = sc.vision.frame_period;

    let mut agents: Vec<Agent> = sc
        .chasers
        .iter()
        .enumerate()
        .map(|(i, c)| Agent {
            spec: c.clone(),
            index: i,
            vehicle: VehicleState::new(c.id.clone(), c.position),
            guidance: ChaserState::new(c.id.clone(), c.position),
            receiver: CommandReceiver::new(),
            next_seq: 1,
            fault_rng: stream_rng(sc.seed, 2 * i as u64 + 1),
            depth_rng: stream_rng(sc.seed, 2 * i as u64 + 2),
            own_nodes: None,
            depth_bias: None,
            spoofed: false,
            failure: None,
            docked_at: None,
            sent: 0,
            rejected: 0,
        })
        .collect();

    // where the dock nodes really are, from the true target pose
    let true_docks = {
        let c = sc.target.pose.position;
        let hx = sc.target.body_half_extents.x * rcfg.safety_scale;
        [c - Vec3::X * hx, c + Vec3::X * hx]
    };
    let mut base_nodes: Option<NodeSet> = None;
    let mut last_frame_us: Option<u64> = None;
    let mut view = TrackerView::default();
    let mut trajectory = Vec::new();
    let mut min_sep = f64::INFINITY;
    let mut min_clear = f64::INFINITY;
    let mut penetrations = 0u64;

    let max_cycles = (sc.max_duration / dt).ceil() as u64;
    let mut cycles = 0u64;
    let mut t_end = 0.0;

    for k in 0..max_cycles {
        let t = k as f64 * dt;
        let now_us = micros(t);
        cycles = k + 1;

        // vision
        let (fresh, dets) = sensor.poll(&sc.target, t);
        if fresh {
            let wire = dets
                .iter()
                .map(|d| WireDetection {
                    class: d.class,
                    points: d.points.map(Vec3::to_array),
                })
                .collect();
            bus.publish(Channel::Detections, &DetectionMsg::new(now_us, wire));
        }
        let frames: Vec<DetectionMsg> = bus.receive(Channel::Detections);
        let newest = frames
            .into_iter()
            .filter(|m| last_frame_us.is_none_or(|l| m.timestamp_us > l))
            .max_by_key(|m| m.timestamp_us);
        if let Some(frame) = newest {
            last_frame_us = Some(frame.timestamp_us);
            let parts: Vec<(DetectionClass, [Vec3; 5])> = frame
                .detections
                .iter()
                .map(|d| (d.class, d.points.map(Vec3::from)))
                .collect();
            // a frame that cannot be rebuilt leaves the last node set in place
            if let Ok(n) = rebuild_from_points(&parts, &camera_pose, &rcfg) {
                base_nodes = Some(n);
            }
            for a in agents.iter_mut() {
                let Some(m) = a.spec.faults.depth_noise_multiplier else {
                    continue;
                };
                // a degraded depth camera misjudges the whole scene: a bias
                // fixed for the run plus per-frame jitter, both at sigma * sqrt(m^2 - 1)
                let extra = noise.sigma * (m * m - 1.0).max(0.0).sqrt();
                let noisy: Vec<(DetectionClass, [Vec3; 5])> = if extra > 0.0 {
                    let n = Normal::new(0.0, extra).expect("finite sigma");
                    let bias = *a.depth_bias.get_or_insert_with(|| n.sample(&mut a.depth_rng));
                    let err = bias + n.sample(&mut a.depth_rng);
                    parts
                        .iter()
                        .map(|(c, pts)| (*c, pts.map(|p| p + Vec3::Z * err)))
                        .collect()
                } else {
                    parts.clone()
                };
                if let Ok(n) = rebuild_from_points(&noisy, &camera_pose, &rcfg) {
                    a.own_nodes = Some(n);
                }
            }
        }

        // tracker
        let bodies = agents
            .iter_mut()
            .map(|a| {
                let truth = a.vehicle.position;
                if a.spec.faults.tracker_spoof.is_some_and(|s| s.triggered(truth)) {
                    a.spoofed = true;
                }
                let seen = reported_position(truth, &a.spec.faults);
                let pos = tracker_from_apf(Framed::new(seen), &tracker_pose).expect("validated tracker pose");
                let vel = tracker_pose.orientation.conjugate().rotate(a.vehicle.velocity_at(t));
                TrackedBody {
                    id: a.spec.id.clone(),
                    position: pos.vec().to_array(),
                    velocity: vel.to_array(),
                }
            })
            .collect();
        bus.publish(Channel::Tracker, &TrackerMsg::new(now_us, bodies));
        for m in bus.receive::<TrackerMsg>(Channel::Tracker) {
            view.update(&m, t);
        }
        for a in agents.iter_mut() {
            if view.is_stale(&a.spec.id, t) {
                bus.stats.stale_tracker_cycles += 1;
            }
            if let Some(b) = view.get(&a.spec.id) {
                let p = apf_from_tracker(Framed::<Tracker>::new(Vec3::from(b.position)), &tracker_pose)
                    .expect("validated tracker pose");
                a.guidance.position = p.vec();
                a.guidance.velocity = tracker_pose.orientation.rotate(Vec3::from(b.velocity));
            }
        }

        // guidance
        if let Some(base) = &base_nodes {
            let states: Vec<ChaserState> = agents.iter().map(|a| a.guidance.clone()).collect();
            let owned: Vec<NodeSet> = agents
                .iter()
                .map(|a| a.own_nodes.as_ref().unwrap_or(base).clone())
                .collect();
            let views: Vec<&NodeSet> = owned.iter().collect();
            let next = update_status_each(&states, &views, apf);
            let mut outgoing: Vec<(usize, CommandBody)> = Vec::new();
            for (i, mut g) in next.iter().cloned().enumerate() {
                // last well-defined bearing from the target, for coincident nodes
                if let Some(dir) = (g.position - views[i].centroid).try_normalize(1e-9) {
                    g.fallback_dir = dir;
                }
                if g.status == ChaserStatus::Docked && states[i].status != ChaserStatus::Docked {
                    let truth = agents[i].vehicle.position;
                    let miss = true_docks
                        .iter()
                        .map(|d| truth.distance(*d))
                        .fold(f64::INFINITY, f64::min);
                    if miss <= apf.dock_range + sc.arena.dock_tolerance {
                        agents[i].docked_at = Some(t);
                        outgoing.push((i, CommandBody::Land));
                    } else {
                        // guidance thought it docked; it set down away from the port
                        agents[i].guidance = g;
                        agents[i].crash();
                        continue;
                    }
                }
                if g.status == ChaserStatus::Active {
                    let accel = total_acceleration(&g, &next, views[i], apf)?;
                    let step = if g.boosted(apf) { 2.0 * dt } else { dt };
                    match quantize(accel, g.velocity, step, &sc.quantize) {
                        Quantized::Move(m) => {
                            g.last_held = false;
                            outgoing.push((
                                i,
                                CommandBody::Move {
                                    dx: m.dx,
                                    dy: m.dy,
                                    dz: m.dz,
                                    speed: m.speed,
                                },
                            ));
                        }
                        Quantized::Hold => g.last_held = true,
                    }
                }
                agents[i].guidance = g;
            }
            for (i, body) in outgoing {
                let a = &mut agents[i];
                let msg = CommandMsg::new(a.next_seq, a.spec.id.clone(), body);
                a.next_seq += 1;
                a.sent += 1;
                bus.publish(Channel::Command(i), &msg);
            }
        }

        // chasers
        for a in agents.iter_mut() {
            for msg in bus.receive::<CommandMsg>(Channel::Command(a.index)) {
                if msg.chaser_id != a.spec.id || !a.receiver.accept(&msg) {
                    continue;
                }
                match msg.body {
                    CommandBody::Land => a.vehicle.land(),
                    CommandBody::Move { dx, dy, dz, speed } => {
                        match execute(&a.vehicle, &MoveCommand::new(dx, dy, dz, speed), t, &sc.motion) {
                            Ok(v) => a.vehicle = apply_faults(&v, &a.spec.faults, &mut a.fault_rng),
                            Err(_) => a.rejected += 1,
                        }
                    }
                }
            }
        }

        // world
        for s in 1..=substeps {
            let ts = t + dt * s as f64 / substeps as f64;
            for a in agents.iter_mut() {
                a.vehicle.advance_to(ts);
            }
            let mut crashed = vec![false; agents.len()];
            for (i, a) in agents.iter().enumerate().filter(|(_, a)| a.airborne()) {
                let p = a.vehicle.position;
                let clearance = sc.target.panel_distance(p, ts) - sc.arena.drone_radius;
                min_clear = min_clear.min(clearance);
                if clearance <= 0.0 {
                    penetrations += 1;
                    crashed[i] = true;
                }
                if !sc.arena.contains(p) {
                    crashed[i] = true;
                }
            }
            for i in 0..agents.len() {
                for j in i + 1..agents.len() {
                    if !(agents[i].airborne() && agents[j].airborne()) {
                        continue;
                    }
                    let d = agents[i].vehicle.position.distance(agents[j].vehicle.position);
                    min_sep = min_sep.min(d);
                    if d < sc.arena.collision_floor {
                        crashed[i] = true;
                        crashed[j] = true;
                    }
                }
            }
            for (a, hit) in agents.iter_mut().zip(crashed) {
                if hit {
                    a.crash();
                }
            }
        }
        for a in agents.iter_mut() {
            if a.airborne() && a.vehicle.battery_expired(sc.motion.battery_limit) {
                a.time_out(apf.stall_threshold);
                a.vehicle.land();
            }
        }

        t_end = t + dt;
        for a in &agents {
            let p = a.vehicle.position;
            let r = a.guidance.position;
            trajectory.push(TrajectorySample {
                t: t_end,
                chaser_id: a.spec.id.clone(),
                x: p.x,
                y: p.y,
                z: p.z,
                status: a.guidance.status,
                reported_x: r.x,
                reported_y: r.y,
                reported_z: r.z,
            });
        }
        if agents.iter().all(|a| a.guidance.status.is_terminal()) {
            break;
        }
    }

    for a in agents.iter_mut() {
        a.time_out(apf.stall_threshold);
    }
    for a in &agents {
        bus.stats.duplicates += a.receiver.duplicates;
        bus.stats.out_of_order += a.receiver.out_of_order;
    }

    let chasers = agents
        .iter()
        .map(|a| ChaserResult {
            id: a.spec.id.clone(),
            outcome: match a.guidance.status {
                ChaserStatus::Docked => Outcome::Docked,
                ChaserStatus::InspectionOrbit => Outcome::InspectionOrbit,
                _ => Outcome::Failed,
            },
            failure_reason: a.failure,
            time_to_dock: a.docked_at,
            final_position: a.vehicle.position.to_array(),
            commands_sent: a.sent,
            commands_rejected: a.rejected,
        })
        .collect();

    Ok(RunReport {
        scenario: sc.name.clone(),
        seed: sc.seed,
        placement: sc.placement_label(),
        yaw_rate: sc.target.rates.yaw,
        pitch_rate: sc.target.rates.pitch,
        roll_rate: sc.target.rates.roll,
        chasers,
        metrics: Metrics {
            min_inter_chaser_distance: min_sep.is_finite().then_some(min_sep),
            min_panel_clearance: min_clear.is_finite().then_some(min_clear),
            keepout_penetrations: penetrations,
            duration: t_end,
            cycles,
        },
        net: bus.stats,
        trajectory,
    })
}
