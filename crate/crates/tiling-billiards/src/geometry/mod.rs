//! Cyclic polygons and refraction stepping.
//!
//! The reference tile is centred at the origin with vertex `v_0` at
//! `(r, 0)` and vertices labelled clockwise: `v_k = r exp(-i A_k / r)` where
//! `A_k = a_1 + ... + a_k`. Side `k` (1-based) joins `v_{k-1}` to `v_k`.
//! Arc coordinates run clockwise from `v_0`.
//!
//! Every tile of a trajectory is the image of the reference tile under a
//! [`Placement`]: a translation, possibly composed with a half-turn. The
//! stepper works in the frame of the reference tile, where crossing side
//! `s` maps the exit point `q` to `v_{s-1} + v_s - q` and mirrors the
//! direction across the side.

mod export;

pub use export::{render_svg, trajectory_csv, write_svg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::iet::BilliardMap;
use crate::{Error, Result, EPS_BOUNDARY};

pub type Point = Complex64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicPolygon {
    arcs: Vec<f64>,
    cumulative: Vec<f64>,
    radius: f64,
}

/// Builds the polygon, rescaling so that all arcs but the last sum to one.
pub fn build_polygon(arcs: &[f64]) -> Result<CyclicPolygon> {
    CyclicPolygon::new(arcs)
}

/// Polygon, chord parameter and starting coordinate drawn at random.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomBilliard {
    pub polygon: CyclicPolygon,
    pub tau: f64,
    pub x0: f64,
}

/// Short arcs uniform on the simplex, `a_N` uniform on `(1.05, 3)`, `tau`
/// uniform on the middle 96% of `(1, a_N)`, `x0` uniform on `(0, 1)`.
pub fn random_billiard<R: rand::Rng>(rng: &mut R, n: usize) -> Result<RandomBilliard> {
    if n < 5 {
        return Err(Error::TooFewSides(n));
    }
    let mut arcs = crate::rng::uniform_simplex(rng, n - 1);
    let a_n = rng.gen_range(1.05..3.0);
    arcs.push(a_n);
    let polygon = build_polygon(&arcs)?;
    let margin = 0.02 * (a_n - 1.0);
    let tau = rng.gen_range(1.0 + margin..a_n - margin);
    let x0 = rng.gen_range(0.0..1.0);
    Ok(RandomBilliard { polygon, tau, x0 })
}

impl CyclicPolygon {
    pub fn new(arcs: &[f64]) -> Result<Self> {
        let n = arcs.len();
        if n < 5 {
            return Err(Error::TooFewSides(n));
        }
        if let Some((index, &value)) = arcs.iter().enumerate().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::NonPositiveArc { index, value });
        }
        let last = arcs[n - 1];
        if arcs[..n - 1].iter().any(|&a| a >= last) {
            return Err(Error::NonMaximalLastArc);
        }
        let scale: f64 = arcs[..n - 1].iter().sum();
        let arcs: Vec<f64> = arcs.iter().map(|a| a / scale).collect();
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for a in &arcs[..n - 1] {
            acc += a;
            cumulative.push(acc);
        }
        cumulative.push(1.0 + arcs[n - 1]);
        let radius = (1.0 + arcs[n - 1]) / (2.0 * PI);
        Ok(CyclicPolygon { arcs, cumulative, radius })
    }

    pub fn arcs(&self) -> &[f64] {
        &self.arcs
    }

    /// The short arcs `a_1, ..., a_{N-1}`.
    pub fn short_arcs(&self) -> &[f64] {
        &self.arcs[..self.arcs.len() - 1]
    }

    pub fn n_sides(&self) -> usize {
        self.arcs.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn longest_arc(&self) -> f64 {
        self.arcs[self.arcs.len() - 1]
    }

    pub fn circumference(&self) -> f64 {
        self.cumulative[self.arcs.len()]
    }

    /// `A_k` for `k` in `0..=N`.
    pub fn cumulative(&self, k: usize) -> f64 {
        self.cumulative[k]
    }

    /// Whether some chord parameter satisfies `1 < tau < a_N`.
    pub fn supports_c1(&self) -> bool {
        self.longest_arc() > 1.0
    }

    /// Point of the circumcircle at clockwise arc `theta` from `v_0`.
    pub fn arc_point(&self, theta: f64) -> Point {
        Point::from_polar(self.radius, -theta / self.radius)
    }

    /// Clockwise arc coordinate in `[0, L)` of a point of the circumcircle.
    pub fn arc_coordinate(&self, p: Point) -> f64 {
        let l = self.circumference();
        let theta = -p.im.atan2(p.re) * self.radius;
        let t = theta.rem_euclid(l);
        if t >= l {
            0.0
        } else {
            t
        }
    }

    pub fn vertex(&self, k: usize) -> Point {
        let k = k % self.n_sides();
        if k == 0 {
            Point::new(self.radius, 0.0)
        } else {
            self.arc_point(self.cumulative[k])
        }
    }

    pub fn vertices(&self) -> Vec<Point> {
        (0..self.n_sides()).map(|k| self.vertex(k)).collect()
    }

    /// Endpoints of side `s` (1-based).
    pub fn side(&self, s: usize) -> (Point, Point) {
        (self.vertex(s - 1), self.vertex(s))
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max((v[i] - v[j]).norm());
            }
        }
        d
    }

    /// Whether a point of the reference frame lies strictly inside.
    pub fn contains_strictly(&self, p: Point) -> bool {
        let tol = EPS_BOUNDARY * self.radius;
        (1..=self.n_sides()).all(|s| {
            let (a, b) = self.side(s);
            // clockwise vertices: the interior is on the right of each side
            cross(b - a, p - a) < -tol * (b - a).norm()
        })
    }
}

fn cross(a: Point, b: Point) -> f64 {
    a.re * b.im - a.im * b.re
}

fn dot(a: Point, b: Point) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Position of a tile: `z ↦ center ± z`. Tiles of a trajectory are
/// translates or half-turns of the reference tile, never mirror images.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub center: Point,
    pub half_turn: bool,
}

impl Placement {
    pub const IDENTITY: Placement = Placement { center: Point::new(0.0, 0.0), half_turn: false };

    /// Rotation angle, `0` or `pi`.
    pub fn angle(&self) -> f64 {
        if self.half_turn {
            PI
        } else {
            0.0
        }
    }

    pub fn apply(&self, z: Point) -> Point {
        if self.half_turn {
            self.center - z
        } else {
            self.center + z
        }
    }

    pub fn apply_vector(&self, v: Point) -> Point {
        if self.half_turn {
            -v
        } else {
            v
        }
    }

    pub fn inverse(&self, w: Point) -> Point {
        if self.half_turn {
            self.center - w
        } else {
            w - self.center
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub placement: Placement,
    /// World position: the start point, then each crossing point.
    pub position: Point,
    /// World unit direction of the next segment.
    pub direction: Point,
    /// Arc coordinate of the forward end of the chord, in the frame of the
    /// current tile.
    pub x: f64,
    pub tau: f64,
    pub step_index: usize,
    /// Side (1-based) through which the current tile was entered.
    pub entry_side: Option<usize>,
    local_position: Point,
    local_direction: Point,
}

impl TrajectoryState {
    /// Position and direction in the frame of the reference tile.
    pub fn local(&self) -> (Point, Point) {
        (self.local_position, self.local_direction)
    }
}

/// Circle parameters `t` where the line `p + t d` meets the circumcircle.
fn circle_hits(polygon: &CyclicPolygon, p: Point, d: Point) -> (f64, f64) {
    let b = dot(p, d);
    let c = p.norm_sqr() - polygon.radius * polygon.radius;
    let disc = (b * b - c).max(0.0).sqrt();
    // stable roots of t^2 + 2bt + c = 0
    let t_fwd = if b <= 0.0 { -b + disc } else { -c / (b + disc) };
    let t_bwd = if b >= 0.0 { -b - disc } else { c / (disc - b) };
    (t_fwd, t_bwd)
}

/// Arc coordinates of the forward and backward ends of the chord.
fn chord_ends(polygon: &CyclicPolygon, p: Point, d: Point) -> (f64, f64) {
    let (tf, tb) = circle_hits(polygon, p, d);
    (polygon.arc_coordinate(p + d * tf), polygon.arc_coordinate(p + d * tb))
}

fn tau_of(polygon: &CyclicPolygon, p: Point, d: Point) -> f64 {
    let (o, e) = chord_ends(polygon, p, d);
    (o - e).rem_euclid(polygon.circumference())
}

/// Arc subtended by the chord of the current segment, measured clockwise
/// from its backward end to its forward end.
pub fn chord_parameter(state: &TrajectoryState, polygon: &CyclicPolygon) -> f64 {
    tau_of(polygon, state.local_position, state.local_direction)
}

/// Initial state from a start point and a direction in the reference tile.
pub fn initial_state(polygon: &CyclicPolygon, start: Point, direction: Point) -> Result<TrajectoryState> {
    if !polygon.contains_strictly(start) {
        return Err(Error::StartOutsideTile);
    }
    let norm = direction.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroDirection);
    }
    let d = direction / norm;
    let (x, _) = chord_ends(polygon, start, d);
    Ok(TrajectoryState {
        placement: Placement::IDENTITY,
        position: start,
        direction: d,
        x,
        tau: tau_of(polygon, start, d),
        step_index: 0,
        entry_side: None,
        local_position: start,
        local_direction: d,
    })
}

/// Initial state for the chord with forward end at arc `x0` and parameter
/// `tau`; the start point is the middle of the chord's part inside the
/// reference tile.
pub fn initial_state_from_coordinates(polygon: &CyclicPolygon, x0: f64, tau: f64) -> Result<TrajectoryState> {
    let l = polygon.circumference();
    if !(tau > 0.0 && tau < l) || !(0.0..l).contains(&x0) {
        return Err(Error::InvalidArgument(format!("no chord with x0 = {x0}, tau = {tau}")));
    }
    let o = polygon.arc_point(x0);
    let e = polygon.arc_point(x0 - tau);
    let d = (o - e) / (o - e).norm();
    let (_, exit, _) = exit_point(polygon, e, d, None).ok_or(Error::StartOutsideTile)?;
    let (_, entry, _) = exit_point(polygon, o, -d, None).ok_or(Error::StartOutsideTile)?;
    let start = (exit + entry) * 0.5;
    initial_state(polygon, start, d)
}

/// First side hit by the ray `p + t d`, `t > 0`, skipping `skip`.
/// Returns the side, the exit point and its distance to the nearest vertex.
fn exit_point(polygon: &CyclicPolygon, p: Point, d: Point, skip: Option<usize>) -> Option<(usize, Point, f64)> {
    let mut best: Option<(f64, usize, f64)> = None;
    let slack = 1e-9;
    for s in 1..=polygon.n_sides() {
        if Some(s) == skip {
            continue;
        }
        let (a, b) = polygon.side(s);
        let e = b - a;
        let den = cross(d, e);
        if den.abs() < 1e-300 {
            continue;
        }
        let t = cross(a - p, e) / den;
        let u = cross(a - p, d) / den;
        if t > 0.0 && (-slack..=1.0 + slack).contains(&u) && best.is_none_or(|(bt, _, _)| t < bt) {
            best = Some((t, s, u));
        }
    }
    let (t, s, u) = best?;
    let (a, b) = polygon.side(s);
    let corner = u.min(1.0 - u).max(0.0) * (b - a).norm();
    Some((s, p + d * t, corner))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulationOptions {
    /// Rebuild the chord after each step from the exchange-map coordinate
    /// instead of carrying the floating-point geometry forward.
    pub reanchor: bool,
}

/// One refraction: exit the current tile and enter its point reflection
/// through the midpoint of the exit side.
pub fn step(state: &TrajectoryState, polygon: &CyclicPolygon) -> Result<TrajectoryState> {
    step_inner(state, polygon, None)
}

fn step_inner(state: &TrajectoryState, polygon: &CyclicPolygon, anchor: Option<&BilliardMap>) -> Result<TrajectoryState> {
    let (p, d) = (state.local_position, state.local_direction);
    let index = state.step_index + 1;
    let (s, q, corner) = exit_point(polygon, p, d, state.entry_side).ok_or(Error::CornerHit(index))?;
    if corner < EPS_BOUNDARY * polygon.radius {
        return Err(Error::CornerHit(index));
    }
    let (a, b) = polygon.side(s);
    let u = (b - a) / (b - a).norm();
    let mut new_p = a + b - q;
    let mut new_d = u * (2.0 * dot(d, u)) - d;
    let placement = Placement {
        center: state.placement.apply(a + b),
        half_turn: !state.placement.half_turn,
    };
    let x = match anchor {
        Some(map) => {
            let x = map.phi(state.x).map_err(|_| Error::CornerHit(index))?;
            let o = polygon.arc_point(x);
            let e = polygon.arc_point(x - map.tau());
            new_d = (o - e) / (o - e).norm();
            let den = cross(new_d, b - a);
            let t = cross(a - e, b - a) / den;
            new_p = e + new_d * t;
            x
        }
        None => chord_ends(polygon, new_p, new_d).0,
    };
    Ok(TrajectoryState {
        placement,
        position: placement.apply(new_p),
        direction: placement.apply_vector(new_d),
        x,
        tau: tau_of(polygon, new_p, new_d),
        step_index: index,
        entry_side: Some(s),
        local_position: new_p,
        local_direction: new_d,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Start point followed by the crossing points.
    pub points: Vec<Point>,
    /// Side (1-based) crossed to reach each point after the first.
    pub sides_crossed: Vec<usize>,
    pub states: Vec<TrajectoryState>,
    pub terminated_at_corner: Option<usize>,
}

impl Trajectory {
    /// A trajectory that has not moved yet.
    pub fn at_rest(state: TrajectoryState) -> Self {
        Trajectory {
            points: vec![state.position],
            sides_crossed: Vec::new(),
            states: vec![state],
            terminated_at_corner: None,
        }
    }

    pub fn n_steps(&self) -> usize {
        self.sides_crossed.len()
    }

    /// Arc coordinates `x_0, x_1, ...`.
    pub fn xs(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.x).collect()
    }
}

pub fn simulate(polygon: &CyclicPolygon, start: Point, direction: Point, n_steps: usize) -> Result<Trajectory> {
    simulate_with(polygon, initial_state(polygon, start, direction)?, n_steps, SimulationOptions::default())
}

pub fn simulate_from_coordinates(polygon: &CyclicPolygon, x0: f64, tau: f64, n_steps: usize) -> Result<Trajectory> {
    let s = initial_state_from_coordinates(polygon, x0, tau)?;
    simulate_with(polygon, s, n_steps, SimulationOptions::default())
}

pub fn simulate_with(
    polygon: &CyclicPolygon,
    initial: TrajectoryState,
    n_steps: usize,
    options: SimulationOptions,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
    }
    let map = if options.reanchor { Some(BilliardMap::new(polygon, initial.tau)?) } else { None };
    let mut traj = Trajectory::at_rest(initial);
    traj.points.reserve(n_steps);
    traj.states.reserve(n_steps);
    for _ in 0..n_steps {
        let cur = traj.states.last().unwrap();
        match step_inner(cur, polygon, map.as_ref()) {
            Ok(next) => {
                traj.points.push(next.position);
                traj.sides_crossed.push(next.entry_side.unwrap());
                traj.states.push(next);
            }
            Err(Error::CornerHit(i)) => {
                traj.terminated_at_corner = Some(i);
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}
