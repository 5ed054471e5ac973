//! Per-ID constant-velocity Kalman filtering of localized detections.
//!
//! State is [x, y, vx, vy]. Process noise follows the discrete
//! white-noise-acceleration model scaled by `process_var`; measurements are
//! positions with isotropic variance `meas_var`. Association is by detection
//! ID. New IDs initialize at the measured position with zero velocity.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::world::Vec2;

pub type Mat4 = [[f64; 4]; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// White-noise-acceleration spectral density ((m/s^2)^2).
    pub process_var: f64,
    /// Position measurement variance per axis (m^2).
    pub meas_var: f64,
    pub init_pos_var: f64,
    pub init_vel_var: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            process_var: 1.0,
            meas_var: 1e-4,
            init_pos_var: 0.25,
            init_vel_var: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub noise: NoiseModel,
    /// Steps a track survives without a matching detection.
    pub max_age: u64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            noise: NoiseModel::default(),
            max_age: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub id: u64,
    /// [x, y, vx, vy] in world coordinates.
    pub state: [f64; 4],
    pub cov: Mat4,
    pub last_seen: u64,
}

impl Track {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.state[0], self.state[1])
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.state[2], self.state[3])
    }

    pub fn speed(&self) -> f64 {
        self.velocity().norm()
    }
}

/// A localized detection handed to the tracker: ground-truth ID plus the
/// measured world-frame position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub id: u64,
    pub position: Vec2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TrackError {
    #[error("innovation covariance is numerically singular")]
    SingularInnovation,
}

fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose(a: &Mat4) -> Mat4 {
    let mut out = [[0.0; 4]; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

#[allow(clippy::needless_range_loop)]
fn symmetrize(a: &mut Mat4) {
    for i in 0..4 {
        for j in (i + 1)..4 {
            let m = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = m;
            a[j][i] = m;
        }
    }
}

fn transition(dt: f64) -> Mat4 {
    [
        [1.0, 0.0, dt, 0.0],
        [0.0, 1.0, 0.0, dt],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
}

fn process_noise(dt: f64, q: f64) -> Mat4 {
    let d2 = dt * dt;
    let d3 = d2 * dt;
    let d4 = d3 * dt;
    [
        [q * d4 / 4.0, 0.0, q * d3 / 2.0, 0.0],
        [0.0, q * d4 / 4.0, 0.0, q * d3 / 2.0],
        [q * d3 / 2.0, 0.0, q * d2, 0.0],
        [0.0, q * d3 / 2.0, 0.0, q * d2],
    ]
}

/// Advance a track by `dt` under the constant-velocity model.
pub fn kf_predict(t: &Track, dt: f64, noise: &NoiseModel) -> Track {
    let f = transition(dt);
    let state = [
        t.state[0] + t.state[2] * dt,
        t.state[1] + t.state[3] * dt,
        t.state[2],
        t.state[3],
    ];
    let q = process_noise(dt, noise.process_var);
    let mut cov = mat_mul(&mat_mul(&f, &t.cov), &transpose(&f));
    for i in 0..4 {
        for j in 0..4 {
            cov[i][j] += q[i][j];
        }
    }
    symmetrize(&mut cov);
    Track {
        id: t.id,
        state,
        cov,
        last_seen: t.last_seen,
    }
}

/// Fuse a position measurement. Uses the Joseph-form covariance update so the
/// posterior stays symmetric positive-definite.
pub fn kf_update(t: &Track, z: Vec2, noise: &NoiseModel) -> Result<Track, TrackError> {
    let r = noise.meas_var;
    let p = &t.cov;
    // S = H P H^T + R with H selecting position
    let s = [[p[0][0] + r, p[0][1]], [p[1][0], p[1][1] + r]];
    let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(TrackError::SingularInnovation);
    }
    let s_inv = [
        [s[1][1] / det, -s[0][1] / det],
        [-s[1][0] / det, s[0][0] / det],
    ];
    // K = P H^T S^-1 (4x2); P H^T is the first two columns of P
    let mut k = [[0.0; 2]; 4];
    for (i, krow) in k.iter_mut().enumerate() {
        for (j, kc) in krow.iter_mut().enumerate() {
            *kc = p[i][0] * s_inv[0][j] + p[i][1] * s_inv[1][j];
        }
    }
    let innov = [z.x - t.state[0], z.y - t.state[1]];
    let mut state = t.state;
    for (i, sv) in state.iter_mut().enumerate() {
        *sv += k[i][0] * innov[0] + k[i][1] * innov[1];
    }
    // Joseph form: P = (I - K H) P (I - K H)^T + K R K^T
    let mut ikh = [[0.0; 4]; 4];
    for (i, row) in ikh.iter_mut().enumerate() {
        row[i] = 1.0;
        row[0] -= k[i][0];
        row[1] -= k[i][1];
    }
    let mut cov = mat_mul(&mat_mul(&ikh, p), &transpose(&ikh));
    for (i, row) in cov.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c += r * (k[i][0] * k[j][0] + k[i][1] * k[j][1]);
        }
    }
    symmetrize(&mut cov);
    Ok(Track {
        id: t.id,
        state,
        cov,
        last_seen: t.last_seen,
    })
}

fn init_track(id: u64, z: Vec2, noise: &NoiseModel, step: u64) -> Track {
    let mut cov = [[0.0; 4]; 4];
    cov[0][0] = noise.init_pos_var;
    cov[1][1] = noise.init_pos_var;
    cov[2][2] = noise.init_vel_var;
    cov[3][3] = noise.init_vel_var;
    Track {
        id,
        state: [z.x, z.y, 0.0, 0.0],
        cov,
        last_seen: step,
    }
}

/// Live track set, keyed by ID for deterministic iteration.
#[derive(Debug, Clone, Default)]
pub struct TrackStore {
    tracks: BTreeMap<u64, Track>,
    step: u64,
}

impl TrackStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&Track> {
        self.tracks.get(&id)
    }

    /// Tracks in ascending ID order.
    pub fn snapshot(&self) -> Vec<Track> {
        self.tracks.values().cloned().collect()
    }
}

/// One tracker step: predict every track, update matched ones, initialize new
/// IDs at their measured position with zero velocity, and drop tracks unseen
/// for more than `max_age` steps.
pub fn step_tracks(
    store: &mut TrackStore,
    measurements: &[Measurement],
    dt: f64,
    cfg: &TrackerConfig,
) -> Result<(), TrackError> {
    store.step += 1;
    let step = store.step;
    let by_id: BTreeMap<u64, Vec2> = measurements.iter().map(|m| (m.id, m.position)).collect();

    let mut next = BTreeMap::new();
    for (&id, track) in &store.tracks {
        let mut t = kf_predict(track, dt, &cfg.noise);
        if let Some(&z) = by_id.get(&id) {
            t = kf_update(&t, z, &cfg.noise)?;
            t.last_seen = step;
        }
        if step - t.last_seen <= cfg.max_age {
            next.insert(id, t);
        }
    }
    for (&id, &z) in &by_id {
        next.entry(id)
            .or_insert_with(|| init_track(id, z, &cfg.noise, step));
    }
    store.tracks = next;
    Ok(())
}
