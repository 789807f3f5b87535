use super::{ApfConfig, ChaserState, ChaserStatus};
use crate::vision::NodeSet;

/// Advances every chaser's mission status by one guidance cycle.
///
/// - Dock counting: within `dock_range` of either primary dock node bumps the
///   counter, anything else resets it. Reaching `dock_cycles` docks the chaser.
/// - While any chaser has a dock attempt pending, every other airborne chaser
///   is frozen; they return to active once no attempt is pending.
/// - Consecutive held commands accumulate in `stall_counter`; at `stall_limit`
///   the chaser is parked in inspection orbit.
/// - Terminal states never change.
pub fn update_status(all: &[ChaserState], nodes: &NodeSet, cfg: &ApfConfig) -> Vec<ChaserState> {
    let per: Vec<&NodeSet> = vec![nodes; all.len()];
    update_status_each(all, &per, cfg)
}

/// [`update_status`] where each chaser judges docking range against its own
/// view of the node set (`nodes[i]` for `all[i]`). Freezing stays global.
pub fn update_status_each(all: &[ChaserState], nodes: &[&NodeSet], cfg: &ApfConfig) -> Vec<ChaserState> {
    assert_eq!(all.len(), nodes.len(), "one node set per chaser");
    let mut next: Vec<ChaserState> = all
        .iter()
        .zip(nodes)
        .map(|(ch, nodes)| {
            let docks = nodes.dock_positions();
            let mut ch = ch.clone();
            if ch.status.is_terminal() {
                return ch;
            }
            let in_range = docks.iter().any(|d| ch.position.distance(*d) <= cfg.dock_range);
            ch.dock_counter = if in_range {
                (ch.dock_counter + 1).min(cfg.dock_cycles)
            } else {
                0
            };
            if ch.dock_counter >= cfg.dock_cycles {
                ch.status = ChaserStatus::Docked;
                return ch;
            }
            if ch.status == ChaserStatus::Active {
                ch.stall_counter = if ch.last_held { ch.stall_counter + 1 } else { 0 };
                if ch.stall_counter >= cfg.stall_limit {
                    ch.status = ChaserStatus::InspectionOrbit;
                }
            }
            ch
        })
        .collect();

    let pending: Vec<bool> = next
        .iter()
        .map(|c| !c.status.is_terminal() && c.dock_counter > 0 && c.dock_counter < cfg.dock_cycles)
        .collect();
    let any_pending = pending.iter().any(|&p| p);
    for (ch, own) in next.iter_mut().zip(pending) {
        if ch.status.is_terminal() {
            continue;
        }
        ch.status = if any_pending && !own {
            ChaserStatus::Frozen
        } else {
            ChaserStatus::Active
        };
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::Vec3;
    use crate::vision::FieldNode;

    fn nodes() -> NodeSet {
        NodeSet {
            nodes: vec![
                FieldNode::attractive(Vec3::new(-0.35, 0.0, 0.0), 0.1),
                FieldNode::attractive(Vec3::new(0.35, 0.0, 0.0), 0.1),
            ],
            primary_dock_nodes: [0, 1],
            centroid: Vec3::ZERO,
        }
    }

    fn run_cycles(mut states: Vec<ChaserState>, n: usize) -> Vec<ChaserState> {
        let cfg = ApfConfig::default();
        for _ in 0..n {
            states = update_status(&states, &nodes(), &cfg);
        }
        states
    }

    #[test]
    fn docks_after_two_cycles_in_range() {
        let ch = ChaserState::new("a", Vec3::new(-0.75, 0.0, 0.0));
        let s = run_cycles(vec![ch.clone()], 1);
        assert_eq!((s[0].status, s[0].dock_counter), (ChaserStatus::Active, 1));
        let s = run_cycles(vec![ch], 2);
        assert_eq!(s[0].status, ChaserStatus::Docked);
    }

    #[test]
    fn never_docks_out_of_range() {
        let ch = ChaserState::new("a", Vec3::new(-0.95, 0.0, 0.0));
        let s = run_cycles(vec![ch], 50);
        assert_eq!((s[0].status, s[0].dock_counter), (ChaserStatus::Active, 0));
    }

    #[test]
    fn counter_resets_when_range_exited() {
        let cfg = ApfConfig {
            dock_cycles: 3,
            ..ApfConfig::default()
        };
        let mut ch = ChaserState::new("a", Vec3::new(-0.75, 0.0, 0.0));
        ch = update_status(&[ch], &nodes(), &cfg).remove(0);
        assert_eq!(ch.dock_counter, 1);
        ch.position = Vec3::new(-2.0, 0.0, 0.0);
        ch = update_status(&[ch], &nodes(), &cfg).remove(0);
        assert_eq!(ch.dock_counter, 0);
    }

    #[test]
    fn pending_dock_freezes_others_then_releases() {
        let a = ChaserState::new("a", Vec3::new(-0.75, 0.0, 0.0));
        let b = ChaserState::new("b", Vec3::new(-2.0, 1.0, 0.0));
        let s = run_cycles(vec![a.clone(), b.clone()], 1);
        assert_eq!(s[0].status, ChaserStatus::Active);
        assert_eq!(s[1].status, ChaserStatus::Frozen);
        let s = run_cycles(vec![a, b], 2);
        assert_eq!(s[0].status, ChaserStatus::Docked);
        assert_eq!(s[1].status, ChaserStatus::Active);
    }

    #[test]
    fn stalled_chaser_parks_in_inspection_orbit() {
        let cfg = ApfConfig::default();
        let mut ch = ChaserState::new("a", Vec3::new(0.0, 1.5, 0.0));
        for i in 1..=cfg.stall_limit {
            ch.last_held = true;
            ch = update_status(&[ch], &nodes(), &cfg).remove(0);
            assert_eq!(ch.boosted(&cfg), i >= cfg.stall_threshold);
        }
        assert_eq!(ch.status, ChaserStatus::InspectionOrbit);
    }

    #[test]
    fn moving_resets_stall() {
        let cfg = ApfConfig::default();
        let mut ch = ChaserState::new("a", Vec3::new(0.0, 1.5, 0.0));
        ch.last_held = true;
        ch = update_status(&[ch], &nodes(), &cfg).remove(0);
        assert_eq!(ch.stall_counter, 1);
        ch.last_held = false;
        ch = update_status(&[ch], &nodes(), &cfg).remove(0);
        assert_eq!(ch.stall_counter, 0);
    }

    /// Every status paired with in/out of range, pending/not pending elsewhere
    /// and held/not held maps to exactly one defined next status.
    #[test]
    fn status_machine_is_total() {
        let cfg = ApfConfig::default();
        for status in ChaserStatus::ALL {
            for in_range in [false, true] {
                for other_pending in [false, true] {
                    for held in [false, true] {
                        for counter in 0..cfg.dock_cycles {
                            let x = if in_range { -0.75 } else { -1.5 };
                            let mut ch = ChaserState::new("a", Vec3::new(x, 0.0, 0.0));
                            ch.status = status;
                            ch.dock_counter = counter;
                            ch.last_held = held;
                            let mut all = vec![ch.clone()];
                            if other_pending {
                                let mut o = ChaserState::new("b", Vec3::new(0.75, 0.0, 0.0));
                                o.dock_counter = 0;
                                all.push(o);
                            }
                            let next = update_status(&all, &nodes(), &cfg);
                            let n = &next[0];
                            assert!(n.dock_counter <= cfg.dock_cycles);
                            let expected = if status.is_terminal() {
                                status
                            } else if in_range && counter + 1 >= cfg.dock_cycles {
                                ChaserStatus::Docked
                            } else if in_range {
                                ChaserStatus::Active
                            } else if other_pending {
                                ChaserStatus::Frozen
                            } else {
                                ChaserStatus::Active
                            };
                            assert_eq!(
                                n.status, expected,
                                "{status:?} range={in_range} pending={other_pending} held={held} counter={counter}"
                            );
                            if status.is_terminal() {
                                assert_eq!(n, &ch);
                            }
                        }
                    }
                }
            }
        }
    }
}
