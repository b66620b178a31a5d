//! Restores the cross-radius ordering that per-node solves ignore: headways must not
//! shrink outward and radial flow must not grow outward.
//!
//! Both fixes only ever lower a headway, which can only lower MRT occupancy, so a
//! capacity-feasible profile stays feasible. Headways take the running minimum from
//! the periphery inward; a node whose flow falls below the flow further out has its
//! headway lowered until the flows match. If that would cross the lower headway
//! bound, the node keeps the bound and its line spacing θ_r narrows instead, with the
//! feeder spacings clamped to the shorter sub-region.

use std::f64::consts::TAU;

use crate::design::{Feeder, ProfileNode};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RepairReport {
    /// Largest relative headway reduction, 0 for an already ordered profile.
    pub max_headway_change: f64,
    /// Largest relative θ_r reduction.
    pub max_theta_change: f64,
    pub passes: usize,
}

pub fn repair_monotonicity(nodes: &mut [ProfileNode<f64>], h_lo: f64) -> RepairReport {
    let original: Vec<(f64, f64)> = nodes.iter().map(|n| (n.design.headway, n.design.theta_r)).collect();
    let mut report = RepairReport::default();
    let n = nodes.len();
    if n < 2 {
        return report;
    }
    for _ in 0..100 {
        report.passes += 1;
        let mut changed = false;
        for i in (0..n - 1).rev() {
            let outer = nodes[i + 1].design.headway;
            if nodes[i].design.headway > outer {
                nodes[i].design.headway = outer;
                changed = true;
            }
        }
        let mut q_out = nodes[n - 1].design.flow();
        for i in (0..n - 1).rev() {
            let d = &mut nodes[i].design;
            if d.flow() < q_out {
                let h = TAU / (d.theta_r * q_out);
                if h >= h_lo {
                    d.headway = h;
                } else {
                    d.headway = h_lo;
                    d.theta_r = TAU / (q_out * h_lo);
                    clamp_feeder(&mut nodes[i]);
                }
                changed = true;
            }
            q_out = q_out.max(nodes[i].design.flow());
        }
        if !changed {
            break;
        }
    }
    for (node, (h0, t0)) in nodes.iter().zip(original) {
        report.max_headway_change = report.max_headway_change.max((h0 - node.design.headway) / h0);
        report.max_theta_change = report.max_theta_change.max((t0 - node.design.theta_r) / t0);
    }
    report
}

fn clamp_feeder(node: &mut ProfileNode<f64>) {
    let l = node.design.theta_r * node.x / 2.0;
    let s = node.design.s;
    match &mut node.design.feeder {
        Feeder::Frf { d, .. } => *d = d.min(2.0 * l * (1.0 - 1e-9)),
        Feeder::Drf { d0, .. } => *d0 = d0.min(l).min(s),
        Feeder::None => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{LocalDesign, Zone};
    use proptest::prelude::*;

    fn node(x: f64, theta: f64, h: f64) -> ProfileNode<f64> {
        ProfileNode {
            x,
            zone: Zone::Suburban,
            design: LocalDesign {
                theta_r: theta,
                s: 1.0,
                ring_spacing: None,
                ring_station_spacing: None,
                headway: h,
                feeder: Feeder::Frf { d: 0.5, h: 0.2, n_s: 1 },
            },
        }
    }

    fn ordered(nodes: &[ProfileNode<f64>]) -> bool {
        nodes.windows(2).all(|w| {
            w[1].design.headway >= w[0].design.headway * (1.0 - 1e-12)
                && w[1].design.flow() <= w[0].design.flow() * (1.0 + 1e-12)
        })
    }

    #[test]
    fn ordered_profile_is_untouched() {
        let mut nodes: Vec<_> = (0..10).map(|i| node(i as f64, 0.3, 0.05 + 0.01 * i as f64)).collect();
        let before = nodes.clone();
        let r = repair_monotonicity(&mut nodes, 1.0 / 30.0);
        assert_eq!(nodes, before);
        assert_eq!(r.max_headway_change, 0.0);
        assert_eq!(r.passes, 1);
    }

    #[test]
    fn repair_is_idempotent() {
        let mut nodes = vec![node(1.0, 0.2, 0.2), node(2.0, 0.5, 0.05), node(3.0, 0.1, 0.3), node(4.0, 0.4, 0.1)];
        repair_monotonicity(&mut nodes, 1.0 / 30.0);
        assert!(ordered(&nodes));
        let once = nodes.clone();
        let r = repair_monotonicity(&mut nodes, 1.0 / 30.0);
        assert_eq!(nodes, once);
        assert_eq!(r.max_headway_change, 0.0);
    }

    #[test]
    fn narrows_theta_at_headway_floor() {
        let h_lo = 1.0 / 30.0;
        let mut nodes = vec![node(5.0, 0.6, h_lo), node(6.0, 0.2, h_lo)];
        repair_monotonicity(&mut nodes, h_lo);
        assert!(ordered(&nodes));
        assert!((nodes[0].design.theta_r - 0.2).abs() < 1e-12);
        assert_eq!(nodes[0].design.headway, h_lo);
    }

    proptest! {
        #[test]
        fn output_is_ordered_and_only_lowers_headways(
            raw in proptest::collection::vec((0.05f64..1.5, 0.034f64..1.0), 2..30)
        ) {
            let mut nodes: Vec<_> = raw.iter().enumerate().map(|(i, &(t, h))| node(1.0 + i as f64, t, h)).collect();
            let before = nodes.clone();
            repair_monotonicity(&mut nodes, 1.0 / 30.0);
            prop_assert!(ordered(&nodes));
            for (a, b) in nodes.iter().zip(&before) {
                prop_assert!(a.design.headway <= b.design.headway);
                prop_assert!(a.design.theta_r <= b.design.theta_r);
                prop_assert!(a.design.flow() >= b.design.flow() * (1.0 - 1e-12));
            }
        }
    }
}
