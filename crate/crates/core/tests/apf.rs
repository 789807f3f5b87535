//! Guidance field and status machine, checked against hand values and an
//! independent integrator.

use nalgebra::Vector3;
use proptest::prelude::*;
use swarm_rendezvous::apf::{
    field_acceleration, hill_acceleration, propagate, total_acceleration, update_status, ApfConfig, ChaserState,
    ChaserStatus, DampingMode,
};
use swarm_rendezvous::fleet::{quantize, QuantizeConfig, Quantized};
use swarm_rendezvous::vision::{FieldNode, NodeSet};
use swarm_rendezvous::Vec3;

fn set(nodes: Vec<FieldNode>, docks: [usize; 2]) -> NodeSet {
    NodeSet {
        nodes,
        primary_dock_nodes: docks,
        centroid: Vec3::ZERO,
    }
}

fn docks() -> NodeSet {
    set(
        vec![
            FieldNode::attractive(Vec3::new(-0.35, 0.0, 0.0), 0.1),
            FieldNode::attractive(Vec3::new(0.35, 0.0, 0.0), 0.1),
        ],
        [0, 1],
    )
}

#[test]
fn two_node_hand_value() {
    // attractive at origin, repulsive at (0, 1, 0); chaser at (1, 0, 0) at rest
    let cfg = ApfConfig::default();
    let nodes = set(
        vec![
            FieldNode::attractive(Vec3::ZERO, 0.1),
            FieldNode::repulsive(Vec3::new(0.0, 1.0, 0.0), -0.015),
        ],
        [0, 0],
    );
    let a = field_acceleration(&ChaserState::new("a", Vec3::X), &nodes, &cfg).unwrap();
    let s2 = 2f64.sqrt();
    let k = 0.015 * (2.0 - s2);
    let want = Vec3::new(-0.1, 0.0, 0.0) + Vec3::new(1.0, -1.0, 0.0) * (k / s2);
    assert!((a - want).norm() < 1e-15, "{a} vs {want}");
}

#[test]
fn hill_enabled_adds_cross_track_terms() {
    let mut cfg = ApfConfig {
        hill_enabled: true,
        omega: 0.0011,
        ..ApfConfig::default()
    };
    let mut ch = ChaserState::new("a", Vec3::new(10.0, 20.0, 30.0));
    ch.velocity = Vec3::new(0.1, 0.0, -0.2);
    let w = cfg.omega;
    let want = Vec3::new(2.0 * w * -0.2, -w * w * 20.0, 3.0 * w * w * 30.0 - 2.0 * w * 0.1);
    assert!((hill_acceleration(&ch, &cfg) - want).norm() < 1e-15);
    let nodes = docks();
    let with = total_acceleration(&ch, &[], &nodes, &cfg).unwrap();
    cfg.hill_enabled = false;
    let without = total_acceleration(&ch, &[], &nodes, &cfg).unwrap();
    assert!((with - without - want).norm() < 1e-15);
}

/// Velocity Verlet with the field re-evaluated on the half-step velocity.
fn oracle_unit_damped(p0: Vec3, node: Vec3, mu: f64, c: f64, duration: f64, dt: f64) -> Vector3<f64> {
    let n = Vector3::new(node.x, node.y, node.z);
    let acc = |p: Vector3<f64>, v: Vector3<f64>| {
        let rho = p - n;
        let r = rho.norm();
        let u = rho / r;
        -(mu * r + c * v.dot(&u)) * u
    };
    let mut p = Vector3::new(p0.x, p0.y, p0.z);
    let mut v = Vector3::zeros();
    for _ in 0..(duration / dt).round() as usize {
        let a = acc(p, v);
        let vh = v + a * (dt / 2.0);
        p += vh * dt;
        v = vh + acc(p, vh) * (dt / 2.0);
    }
    p - n
}

#[test]
fn unit_damping_converges_on_a_lone_dock_node() {
    let cfg = ApfConfig {
        damping_mode: DampingMode::UnitVector,
        ..ApfConfig::default()
    };
    let node = Vec3::new(-0.35, 0.0, 0.0);
    let nodes = set(vec![FieldNode::attractive(node, cfg.mu_a)], [0, 0]);
    let start = ChaserState::new("a", Vec3::new(-1.85, 0.2, -0.1));
    let end = propagate(&start, &nodes, &cfg, 0.01, 120.0).unwrap();
    let sep = end.position.distance(node);
    assert!(sep < 0.05, "separation {sep}");
    let oracle = oracle_unit_damped(start.position, node, cfg.mu_a, cfg.c, 120.0, 1e-3).norm();
    assert!(oracle < 0.05);
    assert!((sep - oracle).abs() < 1e-3, "{sep} vs {oracle}");
}

#[test]
fn full_vector_damping_is_weak_near_the_node() {
    // damping scales with distance, so the last half meter rings for minutes
    let cfg = ApfConfig::default();
    let nodes = set(vec![FieldNode::attractive(Vec3::ZERO, cfg.mu_a)], [0, 0]);
    let start = ChaserState::new("a", Vec3::X);
    let full = propagate(&start, &nodes, &cfg, 0.01, 120.0).unwrap().position.norm();
    let unit_cfg = ApfConfig {
        damping_mode: DampingMode::UnitVector,
        ..cfg
    };
    let unit = propagate(&start, &nodes, &unit_cfg, 0.01, 120.0)
        .unwrap()
        .position
        .norm();
    assert!(unit < 0.05, "{unit}");
    assert!(full > 0.2, "{full}");
}

#[test]
fn saddle_point_parks_in_inspection_orbit() {
    // midway between two far dock nodes the field cancels
    let cfg = ApfConfig::default();
    let q = QuantizeConfig::default();
    let nodes = set(
        vec![
            FieldNode::attractive(Vec3::new(-3.0, 0.0, 0.0), 0.1),
            FieldNode::attractive(Vec3::new(3.0, 0.0, 0.0), 0.1),
        ],
        [0, 1],
    );
    let mut s = vec![ChaserState::new("a", Vec3::ZERO)];
    let mut boosted_seen = false;
    for _ in 0..cfg.stall_limit {
        let dt = if s[0].boosted(&cfg) {
            boosted_seen = true;
            2.0 * cfg.cycle_period
        } else {
            cfg.cycle_period
        };
        let a = total_acceleration(&s[0], &[], &nodes, &cfg).unwrap();
        s[0].last_held = quantize(a, s[0].velocity, dt, &q) == Quantized::Hold;
        s = update_status(&s, &nodes, &cfg);
    }
    assert!(boosted_seen);
    assert_eq!(s[0].status, ChaserStatus::InspectionOrbit);
    assert_eq!(s[0].stall_counter, cfg.stall_limit);
}

#[test]
fn pending_dock_freezes_the_rest() {
    let cfg = ApfConfig::default();
    let nodes = docks();
    let s = vec![
        ChaserState::new("a", Vec3::new(-0.7, 0.0, 0.0)),
        ChaserState::new("b", Vec3::new(1.5, 1.0, 0.0)),
    ];
    let s = update_status(&s, &nodes, &cfg);
    assert_eq!((s[0].status, s[1].status), (ChaserStatus::Active, ChaserStatus::Frozen));
    let s = update_status(&s, &nodes, &cfg);
    assert_eq!((s[0].status, s[1].status), (ChaserStatus::Docked, ChaserStatus::Active));
}

fn arb_pos() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0, -2.0..2.0, -2.0..2.0).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

proptest! {
    #[test]
    fn docked_is_absorbing(path in prop::collection::vec(arb_pos(), 1..30)) {
        let cfg = ApfConfig::default();
        let nodes = docks();
        let mut s = vec![ChaserState::new("a", Vec3::new(-0.5, 0.0, 0.0))];
        s = update_status(&s, &nodes, &cfg);
        s = update_status(&s, &nodes, &cfg);
        prop_assert_eq!(s[0].status, ChaserStatus::Docked);
        for p in path {
            s[0].position = p;
            s = update_status(&s, &nodes, &cfg);
            prop_assert_eq!(s[0].status, ChaserStatus::Docked);
        }
    }

    #[test]
    fn dock_counter_never_exceeds_cycles(path in prop::collection::vec(arb_pos(), 1..40)) {
        let cfg = ApfConfig { dock_cycles: 3, ..ApfConfig::default() };
        let nodes = docks();
        let mut s = vec![ChaserState::new("a", Vec3::ZERO), ChaserState::new("b", Vec3::X)];
        for p in path {
            s[0].position = p;
            s = update_status(&s, &nodes, &cfg);
            prop_assert!(s.iter().all(|c| c.dock_counter <= cfg.dock_cycles));
            let docked = s[0].status == ChaserStatus::Docked;
            prop_assert!(docked || s[0].dock_counter < cfg.dock_cycles);
        }
    }
}
