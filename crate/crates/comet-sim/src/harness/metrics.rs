//! The three benchmark metrics: average deviation angle, freezing rate, and
//! normalized path length.

use crate::world::{signed_angle, Vec2};

use super::sim::StepRecord;

/// Mean unsigned angle (degrees) between the robot's velocity and the
/// start-goal line, over steps where the robot moved. Zero when it never did.
pub fn metric_avg_deviation(steps: &[StepRecord], start: Vec2, goal: Vec2) -> f64 {
    let line = goal - start;
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in steps {
        if s.velocity.norm() > 1e-12 {
            sum += signed_angle(line, s.velocity).abs();
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).to_degrees()
    }
}

/// Fraction of trials that froze.
pub fn metric_freezing_rate(froze: &[bool]) -> f64 {
    if froze.is_empty() {
        return 0.0;
    }
    froze.iter().filter(|&&f| f).count() as f64 / froze.len() as f64
}

/// Polyline length of the robot's path over the straight start-goal distance.
pub fn metric_normalized_path_length(positions: &[Vec2], start: Vec2, goal: Vec2) -> f64 {
    let path: f64 = positions.windows(2).map(|w| w[0].distance(w[1])).sum();
    path / goal.distance(start)
}
