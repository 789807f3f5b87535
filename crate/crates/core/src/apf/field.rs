use super::{ApfConfig, ApfError, ChaserState, ChaserStatus, DampingMode, COINCIDENCE_EPS};
use crate::frames::Vec3;
use crate::vision::{FieldNode, NodeKind, NodeSet};

/// Contribution of a single node.
///
/// `rho` is chaser minus node, so `rho_hat` points from the node toward the
/// chaser. Repulsive nodes (negative gain) push along `rho_hat` inside `r_d`
/// and pull back outside it; attractive nodes always pull.
pub fn node_acceleration(
    position: Vec3,
    velocity: Vec3,
    node: &FieldNode,
    cfg: &ApfConfig,
    fallback_dir: Vec3,
) -> Vec3 {
    let rho_vec = position - node.position;
    let rho = rho_vec.norm();
    let rho_hat = if rho < COINCIDENCE_EPS {
        fallback_dir.try_normalize(1e-12).unwrap_or(Vec3::X)
    } else {
        rho_vec / rho
    };
    let damping = cfg.c
        * match cfg.damping_mode {
            DampingMode::FullVector => velocity.dot(rho_vec),
            DampingMode::UnitVector => velocity.dot(rho_hat),
        };
    let potential = match node.kind {
        NodeKind::Repulsive => node.gain * (cfg.r_d - rho),
        NodeKind::Attractive => node.gain * rho,
    };
    -(potential + damping) * rho_hat
}

pub fn field_acceleration(ch: &ChaserState, nodes: &NodeSet, cfg: &ApfConfig) -> Result<Vec3, ApfError> {
    if nodes.nodes.is_empty() {
        return Err(ApfError::EmptyNodeSet);
    }
    Ok(nodes
        .nodes
        .iter()
        .map(|n| node_acceleration(ch.position, ch.velocity, n, cfg, ch.fallback_dir))
        .sum())
}

/// Repulsion from every other airborne chaser inside the avoidance radius.
/// Magnitude `|mu_c| / e^rho`, directed from the other chaser toward `ch`.
pub fn chaser_chaser_acceleration(ch: &ChaserState, others: &[ChaserState], cfg: &ApfConfig) -> Vec3 {
    others
        .iter()
        .filter(|o| o.id != ch.id && !o.status.is_landed())
        .filter_map(|o| {
            let d = ch.position - o.position;
            let rho = d.norm();
            if rho > cfg.chaser_avoid_radius {
                return None;
            }
            let away = if rho < COINCIDENCE_EPS {
                // antisymmetric tie-break so the pair separates along x
                if ch.id > o.id {
                    Vec3::X
                } else {
                    -Vec3::X
                }
            } else {
                d / rho
            };
            Some(-(cfg.mu_c / rho.exp()) * away)
        })
        .sum()
}

/// Linearized relative motion about a target on a (possibly non-circular)
/// orbit, in the LVLH-aligned guidance frame.
pub fn hill_acceleration(ch: &ChaserState, cfg: &ApfConfig) -> Vec3 {
    let (r, v) = (ch.position, ch.velocity);
    let (w, wd) = (cfg.omega, cfg.omega_dot);
    Vec3::new(
        2.0 * w * v.z + wd * r.z,
        -w * w * r.y,
        3.0 * w * w * r.z - 2.0 * w * v.x - wd * r.x,
    )
}

pub fn total_acceleration(
    ch: &ChaserState,
    others: &[ChaserState],
    nodes: &NodeSet,
    cfg: &ApfConfig,
) -> Result<Vec3, ApfError> {
    if ch.status != ChaserStatus::Active {
        return Err(ApfError::NotActive(ch.id.clone()));
    }
    let mut a = field_acceleration(ch, nodes, cfg)? + chaser_chaser_acceleration(ch, others, cfg);
    if cfg.hill_enabled {
        a += hill_acceleration(ch, cfg);
    }
    Ok(a)
}

/// Continuous-time response of a lone chaser to the field (no quantization,
/// no other chasers), integrated with classic RK4 at step `dt`.
pub fn propagate(
    ch: &ChaserState,
    nodes: &NodeSet,
    cfg: &ApfConfig,
    dt: f64,
    duration: f64,
) -> Result<ChaserState, ApfError> {
    if nodes.nodes.is_empty() {
        return Err(ApfError::EmptyNodeSet);
    }
    let mut s = ch.clone();
    s.status = ChaserStatus::Active;
    let accel = |r: Vec3, v: Vec3, base: &ChaserState| -> Vec3 {
        let mut probe = base.clone();
        probe.position = r;
        probe.velocity = v;
        let mut a = field_acceleration(&probe, nodes, cfg).expect("non-empty node set");
        if cfg.hill_enabled {
            a += hill_acceleration(&probe, cfg);
        }
        a
    };
    let steps = (duration / dt).round() as u64;
    for _ in 0..steps {
        let (r, v) = (s.position, s.velocity);
        let k1v = accel(r, v, &s);
        let k1r = v;
        let k2v = accel(r + k1r * (dt / 2.0), v + k1v * (dt / 2.0), &s);
        let k2r = v + k1v * (dt / 2.0);
        let k3v = accel(r + k2r * (dt / 2.0), v + k2v * (dt / 2.0), &s);
        let k3r = v + k2v * (dt / 2.0);
        let k4v = accel(r + k3r * dt, v + k3v * dt, &s);
        let k4r = v + k3v * dt;
        s.position = r + (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (dt / 6.0);
        s.velocity = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(nodes: Vec<FieldNode>) -> NodeSet {
        NodeSet {
            nodes,
            primary_dock_nodes: [0, 0],
            centroid: Vec3::ZERO,
        }
    }

    fn at(x: f64, y: f64, z: f64) -> ChaserState {
        ChaserState::new("a", Vec3::new(x, y, z))
    }

    fn rel_close(a: Vec3, b: Vec3, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1e-300)
    }

    #[test]
    fn single_attractive_node() {
        let cfg = ApfConfig::default();
        let nodes = set(vec![FieldNode::attractive(Vec3::ZERO, 0.1)]);
        let a = field_acceleration(&at(1.0, 0.0, 0.0), &nodes, &cfg).unwrap();
        assert!(rel_close(a, Vec3::new(-0.1, 0.0, 0.0), 1e-12), "{a}");
    }

    #[test]
    fn repulsive_node_inside_and_outside_switch() {
        let cfg = ApfConfig::default();
        let nodes = set(vec![FieldNode::repulsive(Vec3::ZERO, -0.015)]);
        let inside = field_acceleration(&at(1.0, 0.0, 0.0), &nodes, &cfg).unwrap();
        assert!(rel_close(inside, Vec3::new(0.015, 0.0, 0.0), 1e-12), "{inside}");
        let outside = field_acceleration(&at(3.0, 0.0, 0.0), &nodes, &cfg).unwrap();
        assert!(rel_close(outside, Vec3::new(-0.015, 0.0, 0.0), 1e-12), "{outside}");
    }

    #[test]
    fn empty_node_set_is_error() {
        let cfg = ApfConfig::default();
        assert_eq!(
            field_acceleration(&at(1.0, 0.0, 0.0), &set(vec![]), &cfg),
            Err(ApfError::EmptyNodeSet)
        );
    }

    #[test]
    fn coincident_node_uses_fallback_direction() {
        let cfg = ApfConfig::default();
        let nodes = set(vec![FieldNode::repulsive(Vec3::ZERO, -0.015)]);
        let mut ch = at(0.0, 0.0, 0.0);
        ch.fallback_dir = Vec3::Y;
        let a = field_acceleration(&ch, &nodes, &cfg).unwrap();
        assert!(rel_close(a, Vec3::new(0.0, 0.03, 0.0), 1e-12), "{a}");
    }

    #[test]
    fn chaser_pair_one_meter() {
        let cfg = ApfConfig::default();
        let a = at(1.0, 0.0, 0.0);
        let b = ChaserState::new("b", Vec3::ZERO);
        let acc = chaser_chaser_acceleration(&a, &[b], &cfg);
        let expected = 2.5 / std::f64::consts::E;
        assert!((acc.x - expected).abs() < 1e-12 * expected);
        assert!((acc.x - 0.9197).abs() < 1e-4);
        assert_eq!((acc.y, acc.z), (0.0, 0.0));
    }

    #[test]
    fn chaser_outside_radius_ignored() {
        let cfg = ApfConfig::default();
        let a = at(1.5, 0.0, 0.0);
        let b = ChaserState::new("b", Vec3::ZERO);
        assert_eq!(chaser_chaser_acceleration(&a, &[b], &cfg), Vec3::ZERO);
    }

    #[test]
    fn closer_chasers_repel_harder() {
        let cfg = ApfConfig::default();
        let b = ChaserState::new("b", Vec3::ZERO);
        let near = chaser_chaser_acceleration(&at(0.5, 0.0, 0.0), std::slice::from_ref(&b), &cfg);
        let far = chaser_chaser_acceleration(&at(1.0, 0.0, 0.0), &[b], &cfg);
        assert!(near.norm() > far.norm());
    }

    #[test]
    fn landed_chasers_do_not_repel() {
        let cfg = ApfConfig::default();
        for status in [ChaserStatus::Docked, ChaserStatus::Failed] {
            let mut b = ChaserState::new("b", Vec3::ZERO);
            b.status = status;
            assert_eq!(chaser_chaser_acceleration(&at(0.5, 0.0, 0.0), &[b], &cfg), Vec3::ZERO);
        }
    }

    #[test]
    fn coincident_chasers_split_along_x() {
        let cfg = ApfConfig::default();
        let a = ChaserState::new("a", Vec3::ZERO);
        let b = ChaserState::new("b", Vec3::ZERO);
        let fa = chaser_chaser_acceleration(&a, std::slice::from_ref(&b), &cfg);
        let fb = chaser_chaser_acceleration(&b, &[a], &cfg);
        assert_eq!(fa, -fb);
        assert!(fb.x > 0.0 && fa.x < 0.0);
    }

    #[test]
    fn hill_terms() {
        let mut cfg = ApfConfig::default();
        assert_eq!(hill_acceleration(&at(3.0, -2.0, 7.0), &cfg), Vec3::ZERO);
        cfg.omega = 0.001;
        let a = hill_acceleration(&at(0.0, 0.0, 100.0), &cfg);
        assert!(rel_close(a, Vec3::new(0.0, 0.0, 3e-4), 1e-12), "{a}");
        let a = hill_acceleration(&at(0.0, 50.0, 0.0), &cfg);
        assert!(rel_close(a, Vec3::new(0.0, -5e-5, 0.0), 1e-12), "{a}");
    }

    #[test]
    fn total_requires_active() {
        let cfg = ApfConfig::default();
        let nodes = set(vec![FieldNode::attractive(Vec3::ZERO, 0.1)]);
        let mut ch = at(1.0, 0.0, 0.0);
        ch.status = ChaserStatus::Frozen;
        assert!(matches!(
            total_acceleration(&ch, &[], &nodes, &cfg),
            Err(ApfError::NotActive(_))
        ));
    }

    #[test]
    fn total_is_field_alone_for_lone_far_chaser() {
        let cfg = ApfConfig::default();
        let nodes = set(vec![FieldNode::attractive(Vec3::ZERO, 0.1)]);
        let ch = at(5.0, 1.0, 0.0);
        let other = ChaserState::new("b", Vec3::new(-5.0, 0.0, 0.0));
        assert_eq!(
            total_acceleration(&ch, &[other], &nodes, &cfg).unwrap(),
            field_acceleration(&ch, &nodes, &cfg).unwrap()
        );
    }

    fn arb_vec(r: f64) -> impl Strategy<Value = Vec3> {
        (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn repulsive_radial_sign_follows_switch(rho in 0.01f64..6.0) {
            let cfg = ApfConfig::default();
            let nodes = set(vec![FieldNode::repulsive(Vec3::ZERO, -0.015)]);
            let a = field_acceleration(&at(rho, 0.0, 0.0), &nodes, &cfg).unwrap();
            if rho < cfg.r_d { prop_assert!(a.x >= 0.0); }
            if rho > cfg.r_d { prop_assert!(a.x <= 0.0); }
        }

        #[test]
        fn chaser_pair_forces_are_opposite(pa in arb_vec(2.0), pb in arb_vec(2.0)) {
            let cfg = ApfConfig::default();
            let a = ChaserState::new("a", pa);
            let b = ChaserState::new("b", pb);
            let fa = chaser_chaser_acceleration(&a, std::slice::from_ref(&b), &cfg);
            let fb = chaser_chaser_acceleration(&b, &[a], &cfg);
            prop_assert_eq!(fa, -fb);
        }
    }
}
