//! Instance representation, generation and tour/path length arithmetic.
//!
//! A [`TspInstance`] is a complete undirected Euclidean graph: city
//! coordinates plus the derived pairwise weight matrix. Instances come from
//! three sources: the uniform-random generator, the clustered generator
//! (both over the `[0, 10^6]^2` square, matching the DIMACS-style setup),
//! or a TSPLIB EUC_2D file (see [`crate::tsplib`]).
//!
//! All randomness is drawn from a seeded ChaCha8 stream so instance suites
//! are reproducible across machines.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Side length of the generator square.
pub const GEN_SQUARE_SIDE: f64 = 1.0e6;

/// Number of groups produced by the clustered generator.
pub const CLUSTER_COUNT: usize = 4;

/// Per-axis standard deviation of the cluster offsets (square side / 20).
pub const CLUSTER_STDDEV: f64 = GEN_SQUARE_SIDE / 20.0;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A city in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Exact Euclidean distance to another point.
    pub fn dist(&self, other: &Point) -> f64 {
        ((other.x - self.x).powi(2) + (other.y - self.y).powi(2)).sqrt()
    }
}

/// A complete Euclidean TSP instance.
///
/// The pairwise weight matrix is precomputed at construction; instances are
/// immutable afterwards and safe to share across threads.
#[derive(Debug, Clone)]
pub struct TspInstance {
    points: Vec<Point>,
    coord_scale: f64,
    /// TSPLIB EUC_2D instances round distances to the nearest integer;
    /// generated instances use exact floating-point distances.
    rounded: bool,
    weights: Vec<f64>,
}

impl TspInstance {
    /// Build an instance from raw points.
    ///
    /// `coord_scale` is the positive scalar used to normalize coordinates
    /// and distances for network features. `rounded` selects the TSPLIB
    /// EUC_2D nearest-integer distance convention.
    pub fn new(points: Vec<Point>, coord_scale: f64, rounded: bool) -> Result<Self, InstanceError> {
        if points.len() < 2 {
            return Err(InstanceError::InvalidArgument(format!(
                "instance needs at least 2 cities, got {}",
                points.len()
            )));
        }
        if !points.iter().all(|p| p.x.is_finite() && p.y.is_finite()) {
            return Err(InstanceError::InvalidArgument(
                "non-finite coordinate".into(),
            ));
        }
        if !(coord_scale.is_finite() && coord_scale > 0.0) {
            return Err(InstanceError::InvalidArgument(format!(
                "coord_scale must be positive, got {coord_scale}"
            )));
        }
        let n = points.len();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = points[i].dist(&points[j]);
                let w = if rounded { (d + 0.5).floor() } else { d };
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Ok(Self {
            points,
            coord_scale,
            rounded,
            weights,
        })
    }

    /// Build an exact-distance instance, inferring `coord_scale` from the
    /// largest coordinate magnitude. Convenient for hand-built test cases.
    pub fn from_points(points: Vec<Point>) -> Result<Self, InstanceError> {
        let scale = points
            .iter()
            .flat_map(|p| [p.x.abs(), p.y.abs()])
            .fold(0.0_f64, f64::max)
            .max(1.0);
        Self::new(points, scale, false)
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Point {
        self.points[i]
    }

    pub fn coord_scale(&self) -> f64 {
        self.coord_scale
    }

    pub fn is_rounded(&self) -> bool {
        self.rounded
    }

    /// Normalization unit for all lengths fed to the value network:
    /// `coord_scale * sqrt(2)`, the diagonal of the coordinate square.
    pub fn length_unit(&self) -> f64 {
        self.coord_scale * std::f64::consts::SQRT_2
    }

    /// Edge weight between two cities. Symmetric, zero on the diagonal.
    #[inline]
    pub fn edge_weight(&self, i: usize, j: usize) -> f64 {
        let n = self.n();
        assert!(i < n && j < n, "city index out of range: ({i},{j}), n={n}");
        self.weights[i * n + j]
    }

    /// Edge weight divided by [`Self::length_unit`].
    #[inline]
    pub fn norm_weight(&self, i: usize, j: usize) -> f64 {
        self.edge_weight(i, j) / self.length_unit()
    }

    /// Full weight row for city `i`.
    #[inline]
    pub fn weight_row(&self, i: usize) -> &[f64] {
        let n = self.n();
        &self.weights[i * n..(i + 1) * n]
    }

    /// Length of a closed tour: consecutive edges plus the closing edge
    /// back to the first city, accumulated left to right.
    pub fn tour_length(&self, tour: &Tour) -> f64 {
        assert_eq!(tour.order.len(), self.n(), "tour does not match instance");
        let o = &tour.order;
        let mut total = 0.0;
        for k in 0..o.len() - 1 {
            total += self.edge_weight(o[k], o[k + 1]);
        }
        total + self.edge_weight(o[o.len() - 1], o[0])
    }
}

/// A permutation of the city indices `0..n-1` describing a closed tour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    /// Validate that `order` is a permutation of `0..n-1`.
    pub fn new(order: Vec<usize>, n: usize) -> Result<Self, InstanceError> {
        if order.len() != n {
            return Err(InstanceError::InvalidArgument(format!(
                "tour has {} entries, expected {n}",
                order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(InstanceError::InvalidArgument(format!(
                    "tour is not a permutation of 0..{n}: bad entry {v}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { order })
    }

    /// Serialize as one whitespace-separated index line.
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.order.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
        s
    }

    /// Parse the single-line tour format.
    pub fn from_line(line: &str, n: usize) -> Result<Self, InstanceError> {
        let order = line
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| InstanceError::MalformedInput(format!("bad tour index {t:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(order, n)
    }
}

/// The search/RL state: the ordered traversed sequence plus membership
/// flags for the non-traversed set.
///
/// The partial length is maintained incrementally; a stack of previous
/// values makes `pop` restore it bit-exactly, so the cached value always
/// equals the fresh left-to-right sum over the visited sequence.
#[derive(Debug, Clone)]
pub struct PathState<'a> {
    inst: &'a TspInstance,
    visited: Vec<usize>,
    in_path: Vec<bool>,
    partial: f64,
    len_stack: Vec<f64>,
}

impl<'a> PathState<'a> {
    /// Root state holding only the start city.
    pub fn new(inst: &'a TspInstance, start: usize) -> Result<Self, InstanceError> {
        if start >= inst.n() {
            return Err(InstanceError::InvalidArgument(format!(
                "start city {start} out of range (n={})",
                inst.n()
            )));
        }
        let mut in_path = vec![false; inst.n()];
        in_path[start] = true;
        Ok(Self {
            inst,
            visited: vec![start],
            in_path,
            partial: 0.0,
            len_stack: Vec::with_capacity(inst.n()),
        })
    }

    /// Rebuild a state from a recorded visited sequence.
    pub fn from_visited(inst: &'a TspInstance, visited: &[usize]) -> Result<Self, InstanceError> {
        let (&first, rest) = visited.split_first().ok_or_else(|| {
            InstanceError::InvalidArgument("visited sequence must not be empty".into())
        })?;
        let mut state = Self::new(inst, first)?;
        for &v in rest {
            if v >= inst.n() || state.in_path[v] {
                return Err(InstanceError::InvalidArgument(format!(
                    "invalid visited sequence entry {v}"
                )));
            }
            state.push(v);
        }
        Ok(state)
    }

    pub fn instance(&self) -> &'a TspInstance {
        self.inst
    }

    pub fn visited(&self) -> &[usize] {
        &self.visited
    }

    pub fn len(&self) -> usize {
        self.visited.len()
    }

    pub fn is_terminal(&self) -> bool {
        self.visited.len() == self.inst.n()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.in_path[v]
    }

    pub fn first(&self) -> usize {
        self.visited[0]
    }

    pub fn last(&self) -> usize {
        *self.visited.last().unwrap()
    }

    /// Non-traversed cities in ascending index order.
    pub fn remaining(&self) -> impl Iterator<Item = usize> + '_ {
        self.in_path
            .iter()
            .enumerate()
            .filter(|(_, &used)| !used)
            .map(|(v, _)| v)
    }

    pub fn remaining_count(&self) -> usize {
        self.inst.n() - self.visited.len()
    }

    /// Append a non-traversed city.
    pub fn push(&mut self, v: usize) {
        assert!(!self.in_path[v], "city {v} already traversed");
        self.len_stack.push(self.partial);
        self.partial += self.inst.edge_weight(self.last(), v);
        self.visited.push(v);
        self.in_path[v] = true;
    }

    /// Remove the most recently appended city (the start city stays).
    pub fn pop(&mut self) -> usize {
        assert!(self.visited.len() > 1, "cannot pop the start city");
        let v = self.visited.pop().unwrap();
        self.in_path[v] = false;
        self.partial = self.len_stack.pop().unwrap();
        v
    }

    /// Length of the traversed path (no closing edge).
    pub fn partial_length(&self) -> f64 {
        self.partial
    }

    /// Partial length in normalized units.
    pub fn partial_length_normalized(&self) -> f64 {
        self.partial / self.inst.length_unit()
    }

    /// Convert a terminal state into the tour it traces.
    pub fn to_tour(&self) -> Result<Tour, InstanceError> {
        if !self.is_terminal() {
            return Err(InstanceError::InvalidArgument(
                "state is not terminal".into(),
            ));
        }
        Tour::new(self.visited.clone(), self.inst.n())
    }
}

/// Length of the traversed path of `state` (no closing edge). Free-function
/// form of [`PathState::partial_length`].
pub fn partial_length(state: &PathState<'_>) -> f64 {
    state.partial_length()
}

/// Generate `n` cities i.i.d. uniform over the `[0, 10^6]^2` square.
///
/// Deterministic for a fixed seed (ChaCha8; per point x then y).
pub fn gen_random(n: usize, seed: u64) -> Result<TspInstance, InstanceError> {
    if n < 2 {
        return Err(InstanceError::InvalidArgument(format!(
            "random generator needs n >= 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x = rng.random::<f64>() * GEN_SQUARE_SIDE;
            let y = rng.random::<f64>() * GEN_SQUARE_SIDE;
            Point::new(x, y)
        })
        .collect();
    TspInstance::new(points, GEN_SQUARE_SIDE, false)
}

/// Generate `n` cities in four Gaussian clusters.
///
/// Four centers are drawn uniformly in the square; point `i` is assigned
/// round-robin to center `i % 4` and offset by isotropic Gaussian noise
/// (stddev `10^6 / 20` per axis), clamped to the square.
pub fn gen_clustered(n: usize, seed: u64) -> Result<TspInstance, InstanceError> {
    if n < CLUSTER_COUNT {
        return Err(InstanceError::InvalidArgument(format!(
            "clustered generator needs n >= {CLUSTER_COUNT}, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Point> = (0..CLUSTER_COUNT)
        .map(|_| {
            let x = rng.random::<f64>() * GEN_SQUARE_SIDE;
            let y = rng.random::<f64>() * GEN_SQUARE_SIDE;
            Point::new(x, y)
        })
        .collect();
    let noise = Normal::new(0.0, CLUSTER_STDDEV).expect("valid stddev");
    let points = (0..n)
        .map(|i| {
            let c = centers[i % CLUSTER_COUNT];
            let x = (c.x + noise.sample(&mut rng)).clamp(0.0, GEN_SQUARE_SIDE);
            let y = (c.y + noise.sample(&mut rng)).clamp(0.0, GEN_SQUARE_SIDE);
            Point::new(x, y)
        })
        .collect();
    TspInstance::new(points, GEN_SQUARE_SIDE, false)
}

/// Derive a per-item seed from a master seed (splitmix64 mixing), used by
/// the generators' callers to produce independent reproducible streams.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    splitmix64(master ^ splitmix64(index))
}

/// Serialize to the native instance format: a header line `n coord_scale`
/// followed by one `x y` pair per line. Float formatting uses the shortest
/// round-tripping representation, so parse(serialize(inst)) reproduces
/// coordinates bit-exactly.
pub fn to_native(inst: &TspInstance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", inst.n(), inst.coord_scale());
    for p in inst.points() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    s
}

/// Parse the native instance format. Native instances always use exact
/// (non-rounded) distances.
pub fn from_native(text: &str) -> Result<TspInstance, InstanceError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| InstanceError::MalformedInput("empty instance file".into()))?;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| InstanceError::MalformedInput("bad header: city count".into()))?;
    let coord_scale: f64 = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| InstanceError::MalformedInput("bad header: coord_scale".into()))?;
    let mut points = Vec::with_capacity(n);
    for line in lines {
        let mut toks = line.split_whitespace();
        let x: f64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| InstanceError::MalformedInput(format!("bad point line {line:?}")))?;
        let y: f64 = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| InstanceError::MalformedInput(format!("bad point line {line:?}")))?;
        points.push(Point::new(x, y));
    }
    if points.len() != n {
        return Err(InstanceError::MalformedInput(format!(
            "header declares {n} cities but file has {}",
            points.len()
        )));
    }
    TspInstance::new(points, coord_scale, false)
}

pub fn write_native(inst: &TspInstance, path: &std::path::Path) -> Result<(), InstanceError> {
    std::fs::write(path, to_native(inst))?;
    Ok(())
}

pub fn read_native(path: &std::path::Path) -> Result<TspInstance, InstanceError> {
    from_native(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn unit_square() -> TspInstance {
        TspInstance::from_points(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn edge_weight_three_four_five() {
        let inst =
            TspInstance::from_points(vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)]).unwrap();
        assert_eq!(inst.edge_weight(0, 1), 5.0);
        assert_eq!(inst.edge_weight(1, 0), 5.0);
        assert_eq!(inst.edge_weight(0, 0), 0.0);
    }

    #[test]
    fn edge_weight_diagonal() {
        let inst =
            TspInstance::from_points(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]).unwrap();
        assert!((inst.edge_weight(0, 1) - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_single_city() {
        assert!(TspInstance::from_points(vec![Point::new(0.0, 0.0)]).is_err());
    }

    #[test]
    fn gen_random_is_deterministic() {
        let a = gen_random(20, 7).unwrap();
        let b = gen_random(20, 7).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
        assert_eq!(a.coord_scale(), GEN_SQUARE_SIDE);
    }

    #[test]
    fn gen_random_symmetric_weights() {
        let inst = gen_random(2, 11).unwrap();
        assert_eq!(inst.edge_weight(0, 1), inst.edge_weight(1, 0));
    }

    #[test]
    fn gen_random_rejects_small_n() {
        assert!(gen_random(1, 0).is_err());
    }

    #[test]
    fn gen_random_mean_near_center() {
        // Statistical check on the RNG mapping: empirical mean of x over
        // 1000 points should land well inside 10^6 * (0.5 +- 0.05).
        let inst = gen_random(1000, 3).unwrap();
        let mean_x: f64 = inst.points().iter().map(|p| p.x).sum::<f64>() / 1000.0;
        assert!((mean_x - 0.5e6).abs() < 0.05e6, "mean_x = {mean_x}");
    }

    #[test]
    fn gen_clustered_one_point_per_cluster() {
        // n = 4 assigns exactly one point per center (round-robin).
        let inst = gen_clustered(4, 5).unwrap();
        assert_eq!(inst.n(), 4);
    }

    #[test]
    fn gen_clustered_points_stay_in_square() {
        let inst = gen_clustered(100, 1).unwrap();
        for p in inst.points() {
            assert!((0.0..=GEN_SQUARE_SIDE).contains(&p.x));
            assert!((0.0..=GEN_SQUARE_SIDE).contains(&p.y));
        }
    }

    #[test]
    fn gen_clustered_rejects_small_n() {
        assert!(gen_clustered(3, 0).is_err());
    }

    /// Plain Lloyd k-means with k-means++ style seeding, used only to
    /// verify the clustered generator produces tight groups.
    fn kmeans_inertia(inst: &TspInstance, k: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = inst.points();
        let mut centers: Vec<Point> = vec![pts[rng.random_range(0..pts.len())]];
        while centers.len() < k {
            let d2: Vec<f64> = pts
                .iter()
                .map(|p| {
                    centers
                        .iter()
                        .map(|c| p.dist(c).powi(2))
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let total: f64 = d2.iter().sum();
            let mut pick = rng.random::<f64>() * total;
            let mut chosen = 0;
            for (i, w) in d2.iter().enumerate() {
                pick -= w;
                if pick <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            centers.push(pts[chosen]);
        }
        for _ in 0..50 {
            let mut sums = vec![(0.0, 0.0, 0usize); k];
            for p in pts {
                let (best, _) = centers
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (i, p.dist(c)))
                    .fold((0, f64::INFINITY), |acc, it| {
                        if it.1 < acc.1 {
                            it
                        } else {
                            acc
                        }
                    });
                sums[best].0 += p.x;
                sums[best].1 += p.y;
                sums[best].2 += 1;
            }
            for (i, s) in sums.iter().enumerate() {
                if s.2 > 0 {
                    centers[i] = Point::new(s.0 / s.2 as f64, s.1 / s.2 as f64);
                }
            }
        }
        pts.iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| p.dist(c).powi(2))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    #[test]
    fn gen_clustered_recovers_four_groups() {
        let clustered = gen_clustered(400, 2).unwrap();
        let uniform = gen_random(400, 2).unwrap();
        let ic = kmeans_inertia(&clustered, 4, 99);
        let iu = kmeans_inertia(&uniform, 4, 99);
        assert!(
            ic * 5.0 < iu,
            "clustered inertia {ic:.3e} not far below uniform {iu:.3e}"
        );
    }

    #[test]
    fn tour_length_unit_square_perimeter() {
        let inst = unit_square();
        let tour = Tour::new(vec![0, 1, 2, 3], 4).unwrap();
        assert_eq!(inst.tour_length(&tour), 4.0);
    }

    #[test]
    fn tour_length_two_cities_out_and_back() {
        let inst = gen_random(2, 42).unwrap();
        let tour = Tour::new(vec![0, 1], 2).unwrap();
        assert_eq!(inst.tour_length(&tour), 2.0 * inst.edge_weight(0, 1));
    }

    #[test]
    fn tour_rejects_non_permutation() {
        assert!(Tour::new(vec![0, 1, 1], 3).is_err());
        assert!(Tour::new(vec![0, 1], 3).is_err());
        assert!(Tour::new(vec![0, 3], 2).is_err());
    }

    #[test]
    fn partial_length_single_city_is_zero() {
        let inst = unit_square();
        let state = PathState::new(&inst, 2).unwrap();
        assert_eq!(state.partial_length(), 0.0);
    }

    #[test]
    fn partial_length_full_path_is_perimeter_minus_closing() {
        let inst = unit_square();
        let state = PathState::from_visited(&inst, &[0, 1, 2, 3]).unwrap();
        assert_eq!(state.partial_length(), 3.0);
        // Eq. 6 vs Eq. 7 relation: adding the closing edge gives the tour.
        let closing = inst.edge_weight(state.last(), state.first());
        let tour = state.to_tour().unwrap();
        assert_eq!(state.partial_length() + closing, inst.tour_length(&tour));
    }

    #[test]
    fn path_state_rejects_duplicates() {
        let inst = unit_square();
        assert!(PathState::from_visited(&inst, &[0, 1, 0]).is_err());
        assert!(PathState::from_visited(&inst, &[]).is_err());
    }

    #[test]
    fn native_round_trip_is_bit_exact() {
        let inst = gen_random(13, 8).unwrap();
        let text = to_native(&inst);
        let back = from_native(&text).unwrap();
        assert_eq!(back.n(), inst.n());
        assert_eq!(back.coord_scale(), inst.coord_scale());
        for (p, q) in inst.points().iter().zip(back.points()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
        }
    }

    #[test]
    fn native_rejects_count_mismatch() {
        assert!(from_native("3 10.0\n1 2\n3 4\n").is_err());
    }

    #[test]
    fn tour_line_round_trip() {
        let tour = Tour::new(vec![2, 0, 3, 1], 4).unwrap();
        assert_eq!(Tour::from_line(&tour.to_line(), 4).unwrap(), tour);
    }

    #[test]
    fn derive_seed_spreads() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(7, 0));
    }

    proptest! {
        #[test]
        fn weights_symmetric_and_triangle(seed in 0u64..500, n in 2usize..12) {
            let inst = gen_random(n, seed).unwrap();
            let tol = 1e-9 * inst.coord_scale();
            for i in 0..n {
                prop_assert_eq!(inst.edge_weight(i, i), 0.0);
                for j in 0..n {
                    prop_assert_eq!(inst.edge_weight(i, j), inst.edge_weight(j, i));
                    for k in 0..n {
                        prop_assert!(
                            inst.edge_weight(i, k)
                                <= inst.edge_weight(i, j) + inst.edge_weight(j, k) + tol
                        );
                    }
                }
            }
        }

        #[test]
        fn tour_length_rotation_and_reversal_invariant(seed in 0u64..500, n in 3usize..10, rot in 0usize..10) {
            let inst = gen_random(n, seed).unwrap();
            let base: Vec<usize> = (0..n).collect();
            let len0 = inst.tour_length(&Tour::new(base.clone(), n).unwrap());
            let mut rotated = base.clone();
            rotated.rotate_left(rot % n);
            let len1 = inst.tour_length(&Tour::new(rotated, n).unwrap());
            let mut reversed = base;
            reversed.reverse();
            let len2 = inst.tour_length(&Tour::new(reversed, n).unwrap());
            prop_assert!((len0 - len1).abs() <= 1e-9 * len0.max(1.0));
            prop_assert!((len0 - len2).abs() <= 1e-9 * len0.max(1.0));
        }

        #[test]
        fn partial_length_matches_fresh_sum_after_push_pop(seed in 0u64..200) {
            let inst = gen_random(8, seed).unwrap();
            let mut state = PathState::new(&inst, 0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
            for _ in 0..64 {
                let can_push = !state.is_terminal();
                let can_pop = state.len() > 1;
                let do_push = can_push && (!can_pop || rng.random::<bool>());
                if do_push {
                    let rem: Vec<usize> = state.remaining().collect();
                    let v = rem[rng.random_range(0..rem.len())];
                    state.push(v);
                } else if can_pop {
                    state.pop();
                }
                let fresh: f64 = state
                    .visited()
                    .windows(2)
                    .fold(0.0, |acc, w| acc + inst.edge_weight(w[0], w[1]));
                prop_assert_eq!(state.partial_length().to_bits(), fresh.to_bits());
            }
        }
    }
}
