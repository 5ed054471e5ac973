//! Partition tracked pedestrians into groups by proximity and co-movement.
//!
//! A pair is compatible when it is within `gamma` of each other and, unless
//! both members are static, its one-step lookahead does not diverge. Groups
//! are the connected components of the compatibility graph; components of one
//! become singleton groups (usable by navigation, excluded from scoring).

use serde::{Deserialize, Serialize};

use crate::tracking::Track;
use crate::world::{ParamSet, Vec2};

/// Which co-movement condition gates a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GroupingRule {
    /// Distance after one step of motion must not exceed the current distance.
    #[default]
    NonDivergence,
    /// Velocity dot product must be positive.
    DotSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub id: u32,
    /// Member track IDs, ascending.
    pub members: Vec<u64>,
    /// Mean of the members' velocity estimates.
    pub avg_velocity: Vec2,
}

impl Group {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Pairwise grouping condition.
#[allow(clippy::too_many_arguments)]
pub fn pair_compatible(
    p_i: Vec2,
    v_i: Vec2,
    p_j: Vec2,
    v_j: Vec2,
    gamma: f64,
    rule: GroupingRule,
    static_speed: f64,
    divergence_tol: f64,
) -> bool {
    let dist = p_i.distance(p_j);
    if dist > gamma {
        return false;
    }
    if v_i.norm() < static_speed && v_j.norm() < static_speed {
        // static pairs group on proximity alone
        return true;
    }
    match rule {
        GroupingRule::NonDivergence => dist + divergence_tol >= (p_i + v_i).distance(p_j + v_j),
        GroupingRule::DotSign => v_i.dot(v_j) > 0.0,
    }
}

/// Partition tracks into groups: connected components of the pairwise
/// compatibility graph. Every track ID lands in exactly one group; group IDs
/// are assigned in order of each component's smallest member.
pub fn partition_groups(tracks: &[Track], params: &ParamSet) -> Vec<Group> {
    let n = tracks.len();
    let mut parent: Vec<usize> = (0..n).collect();

    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        let mut cur = i;
        while parent[cur] != root {
            let next = parent[cur];
            parent[cur] = root;
            cur = next;
        }
        root
    }

    for i in 0..n {
        for j in (i + 1)..n {
            if pair_compatible(
                tracks[i].position(),
                tracks[i].velocity(),
                tracks[j].position(),
                tracks[j].velocity(),
                params.gamma,
                params.grouping_rule,
                params.static_speed,
                params.divergence_tol,
            ) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }

    let mut components: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }

    let mut groups: Vec<Group> = components
        .into_values()
        .map(|idxs| {
            let mut members: Vec<u64> = idxs.iter().map(|&i| tracks[i].id).collect();
            members.sort_unstable();
            let sum = idxs
                .iter()
                .fold(Vec2::ZERO, |acc, &i| acc + tracks[i].velocity());
            Group {
                id: 0,
                members,
                avg_velocity: sum * (1.0 / idxs.len() as f64),
            }
        })
        .collect();
    groups.sort_by_key(|g| g.members[0]);
    for (k, g) in groups.iter_mut().enumerate() {
        g.id = k as u32;
    }
    groups
}
