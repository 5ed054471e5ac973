//! Convex hulls with first-class degenerate cases (point, segment) and the
//! membership predicates used by the planners.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("convex hull of an empty point set")]
    EmptyInput,
}

/// Convex hull: CCW vertex list. One vertex is a point, two a segment,
/// three or more a convex polygon with no three consecutive collinear vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hull {
    vertices: Vec<Vec2>,
}

impl Hull {
    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn is_segment(&self) -> bool {
        self.vertices.len() == 2
    }

    /// True iff `p` is inside the hull or within `eps` of it. For a polygon this
    /// is exact membership in the hull dilated by a disc of radius `eps`.
    pub fn contains(&self, p: Vec2, eps: f64) -> bool {
        match self.vertices.as_slice() {
            [v] => p.distance(*v) <= eps,
            [a, b] => point_segment_distance(p, *a, *b) <= eps,
            _ => {
                if self.interior_or_boundary(p) {
                    true
                } else {
                    self.boundary_distance(p) <= eps
                }
            }
        }
    }

    /// Distance from `p` to the hull; zero inside.
    pub fn distance(&self, p: Vec2) -> f64 {
        match self.vertices.as_slice() {
            [v] => p.distance(*v),
            [a, b] => point_segment_distance(p, *a, *b),
            _ => {
                if self.interior_or_boundary(p) {
                    0.0
                } else {
                    self.boundary_distance(p)
                }
            }
        }
    }

    fn interior_or_boundary(&self, p: Vec2) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            (b - a).cross(p - a) >= 0.0
        })
    }

    fn boundary_distance(&self, p: Vec2) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Monotone-chain convex hull. Collinear inputs reduce to their extreme
/// segment, a single point to a point hull. Duplicates are removed.
pub fn convex_hull(points: &[Vec2]) -> Result<Hull, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    let mut pts: Vec<Vec2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();

    if pts.len() == 1 {
        return Ok(Hull { vertices: pts });
    }

    let mut lower: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 {
            let a = lower[lower.len() - 2];
            let b = lower[lower.len() - 1];
            if (b - a).cross(p - a) <= 0.0 {
                lower.pop();
            } else {
                break;
            }
        }
        lower.push(p);
    }
    let mut upper: Vec<Vec2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 {
            let a = upper[upper.len() - 2];
            let b = upper[upper.len() - 1];
            if (b - a).cross(p - a) <= 0.0 {
                upper.pop();
            } else {
                break;
            }
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    // all-collinear inputs collapse each chain to its endpoints
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    Ok(Hull { vertices: lower })
}

/// Membership in the set difference `inner \ (union of others)`, evaluated
/// pointwise: inside (within `eps` of) `inner` and within `eps` of no other.
pub fn in_region_p(p: Vec2, inner: &Hull, others: &[Hull], eps: f64) -> bool {
    inner.contains(p, eps) && others.iter().all(|h| !h.contains(p, eps))
}
