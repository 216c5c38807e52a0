//! Geometry of `Z^d`: points, norms, finite site sets, connectivity
//! predicates, rectangle hulls and the lexicographic middle-element anchor.
//!
//! Dimensions 1..=4 are supported; everything is a plain value type.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// A point of `Z^d`. Unused trailing coordinates are kept at zero so the
/// derived ordering is the left-to-right lexicographic order on the active
/// coordinates.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    coords: [i32; MAX_DIM],
    dim: u8,
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<i32>::deserialize(deserializer)?;
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(serde::de::Error::custom(format!(
                "point dimension {} out of range 1..={MAX_DIM}",
                coords.len()
            )));
        }
        Ok(Point::new(&coords))
    }
}

impl Point {
    pub fn new(coords: &[i32]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension {} out of range 1..={MAX_DIM}",
            coords.len()
        );
        let mut c = [0i32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self {
            coords: c,
            dim: coords.len() as u8,
        }
    }

    pub fn origin(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        Self {
            coords: [0; MAX_DIM],
            dim: dim as u8,
        }
    }

    /// Standard basis vector `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        assert!(axis < dim);
        let mut p = Self::origin(dim);
        p.coords[axis] = 1;
        p
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> i32 {
        assert!(axis < self.dim());
        self.coords[axis]
    }

    /// `‖x‖₁ = Σ |x_i|`.
    pub fn norm1(&self) -> u64 {
        self.coords().iter().map(|&c| c.unsigned_abs() as u64).sum()
    }

    /// `‖x‖_∞ = max |x_i|`.
    pub fn norm_inf(&self) -> u64 {
        self.coords()
            .iter()
            .map(|&c| c.unsigned_abs() as u64)
            .max()
            .unwrap_or(0)
    }

    /// Euclidean length.
    pub fn norm_euclid(&self) -> f64 {
        self.coords()
            .iter()
            .map(|&c| (c as f64) * (c as f64))
            .sum::<f64>()
            .sqrt()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(rhs.coords.iter()) {
            *a += b;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        debug_assert_eq!(self.dim, rhs.dim);
        let mut c = self.coords;
        for (a, b) in c.iter_mut().zip(rhs.coords.iter()) {
            *a -= b;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        let mut c = self.coords;
        for a in c.iter_mut() {
            *a = -*a;
        }
        Point {
            coords: c,
            dim: self.dim,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Point {
    type Err = String;

    /// Parses `(1,-2)` style point literals; whitespace around entries is ok.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| format!("expected point like (1,0), got `{s}`"))?;
        let coords: Vec<i32> = inner
            .split(',')
            .map(|c| c.trim().parse::<i32>().map_err(|e| format!("bad coordinate `{c}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(format!("dimension {} out of range 1..={MAX_DIM}", coords.len()));
        }
        Ok(Point::new(&coords))
    }
}

/// An axis-aligned box `[lo_1,hi_1] x ... x [lo_d,hi_d] ∩ Z^d`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Rectangle {
    lo: Point,
    hi: Point,
}

impl Rectangle {
    pub fn new(lo: Point, hi: Point) -> Self {
        assert_eq!(lo.dim(), hi.dim());
        assert!(
            lo.coords().iter().zip(hi.coords()).all(|(a, b)| a <= b),
            "rectangle needs lo <= hi coordinatewise"
        );
        Self { lo, hi }
    }

    /// Centered box `B(n) = {-n,...,n}^d`.
    pub fn centered_box(dim: usize, n: i32) -> Self {
        assert!(n >= 0);
        let lo = Point::new(&vec![-n; dim]);
        let hi = Point::new(&vec![n; dim]);
        Self::new(lo, hi)
    }

    /// Box `{0,...,side-1} x {0,...,side-1} x ...`.
    pub fn cube(dim: usize, side: u32) -> Self {
        assert!(side >= 1);
        let lo = Point::origin(dim);
        let hi = Point::new(&vec![side as i32 - 1; dim]);
        Self::new(lo, hi)
    }

    pub fn lo(&self) -> Point {
        self.lo
    }

    pub fn hi(&self) -> Point {
        self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords()
            .iter()
            .enumerate()
            .all(|(i, &c)| self.lo.coord(i) <= c && c <= self.hi.coord(i))
    }

    pub fn site_count(&self) -> u64 {
        (0..self.dim())
            .map(|i| (self.hi.coord(i) - self.lo.coord(i) + 1) as u64)
            .product()
    }

    pub fn grow(&self, margin: i32) -> Self {
        let lo = Point::new(&self.lo.coords().iter().map(|c| c - margin).collect::<Vec<_>>());
        let hi = Point::new(&self.hi.coords().iter().map(|c| c + margin).collect::<Vec<_>>());
        Self::new(lo, hi)
    }

    /// Sites in lexicographic order.
    pub fn sites(&self) -> Vec<Point> {
        let d = self.dim();
        let mut out = Vec::with_capacity(self.site_count() as usize);
        let mut cur: Vec<i32> = self.lo.coords().to_vec();
        loop {
            out.push(Point::new(&cur));
            // odometer increment, last axis fastest so the output is lex sorted
            let mut axis = d;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                if cur[axis] < self.hi.coord(axis) {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = self.lo.coord(axis);
            }
        }
    }

    pub fn to_site_set(&self) -> SiteSet {
        SiteSet::new(self.sites()).expect("rectangle is nonempty")
    }
}

/// A finite subset of `Z^d`, stored lex-sorted with its bounding data cached.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SiteSet {
    sites: Vec<Point>,
    dim: u8,
    hull: Rectangle,
}

impl Serialize for SiteSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.sites.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SiteSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let sites = Vec::<Point>::deserialize(deserializer)?;
        SiteSet::new(sites).map_err(serde::de::Error::custom)
    }
}

impl SiteSet {
    /// Builds a set from arbitrary points (sorted, deduplicated).
    pub fn new(mut sites: Vec<Point>) -> Result<Self> {
        let first = *sites.first().ok_or(Error::EmptySiteSet)?;
        let dim = first.dim();
        if sites.iter().any(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch(
                dim,
                sites.iter().find(|p| p.dim() != dim).unwrap().dim(),
            ));
        }
        sites.sort_unstable();
        sites.dedup();
        let mut lo = sites[0].coords().to_vec();
        let mut hi = lo.clone();
        for p in &sites {
            for (i, &c) in p.coords().iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let hull = Rectangle::new(Point::new(&lo), Point::new(&hi));
        Ok(Self {
            sites,
            dim: dim as u8,
            hull,
        })
    }

    pub fn from_coords(coords: &[&[i32]]) -> Result<Self> {
        Self::new(coords.iter().map(|c| Point::new(c)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sets
    }

    /// Sites in lexicographic order.
    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.sites.binary_search(p).is_ok()
    }

    /// Index of `p` in the lex order, if present.
    pub fn position(&self, p: &Point) -> Option<usize> {
        self.sites.binary_search(p).ok()
    }

    /// Cached minimal bounding rectangle.
    pub fn rectangle_hull(&self) -> Rectangle {
        self.hull
    }

    /// `diam(Λ) = max ‖x-y‖_∞` over pairs; equals the largest hull extent.
    pub fn diameter(&self) -> u64 {
        (0..self.dim())
            .map(|i| (self.hull.hi().coord(i) - self.hull.lo().coord(i)) as u64)
            .max()
            .unwrap_or(0)
    }

    pub fn translate(&self, shift: Point) -> SiteSet {
        let sites = self.sites.iter().map(|&p| p + shift).collect();
        SiteSet::new(sites).expect("translate preserves nonemptiness")
    }

    /// The `⌊(|Λ|+1)/2⌋`-th element in lexicographic order (1-based).
    pub fn middle_element(&self) -> Point {
        self.sites[(self.sites.len() - 1) / 2]
    }

    /// Translates the set so its middle element sits at the origin.
    /// Returns the anchored set together with the applied shift, so that
    /// `anchored.translate(shift) == self`.
    pub fn canonical_anchor(&self) -> (SiteSet, Point) {
        let mid = self.middle_element();
        (self.translate(-mid), mid)
    }

    /// True iff each pair of sites is joined by unit steps inside the set.
    pub fn is_l1_connected(&self) -> bool {
        self.connected_with(&unit_offsets(self.dim()))
    }

    /// True iff each pair of sites is joined by `‖·‖_∞ = 1` steps inside the set.
    pub fn is_linf_connected(&self) -> bool {
        self.connected_with(&linf_offsets(self.dim()))
    }

    fn connected_with(&self, offsets: &[Point]) -> bool {
        let mut seen: HashSet<Point> = HashSet::with_capacity(self.sites.len());
        let mut queue = VecDeque::new();
        queue.push_back(self.sites[0]);
        seen.insert(self.sites[0]);
        while let Some(p) = queue.pop_front() {
            for &o in offsets {
                let q = p + o;
                if self.contains(&q) && seen.insert(q) {
                    queue.push_back(q);
                }
            }
        }
        seen.len() == self.sites.len()
    }

    /// True iff the set and its complement are both `‖·‖_∞`-connected.
    ///
    /// The complement check runs a flood fill inside the hull grown by one:
    /// every complement cell of the enlarged box must reach the box frontier.
    /// A complement component either touches the frontier (and merges into
    /// the single outer component) or is trapped inside the hull, so margin
    /// one is enough.
    pub fn is_c_connected(&self) -> bool {
        if !self.is_linf_connected() {
            return false;
        }
        let boxed = self.hull.grow(1);
        let d = self.dim();
        let mut widths = [0usize; MAX_DIM];
        for i in 0..d {
            widths[i] = (boxed.hi().coord(i) - boxed.lo().coord(i) + 1) as usize;
        }
        let total: usize = widths[..d].iter().product();
        let index = |p: &Point| -> usize {
            let mut idx = 0usize;
            for i in 0..d {
                idx = idx * widths[i] + (p.coord(i) - boxed.lo().coord(i)) as usize;
            }
            idx
        };
        let mut visited = vec![false; total];
        let mut queue = VecDeque::new();
        // Seed from every frontier cell of the enlarged box; none is in Λ.
        for p in boxed.sites() {
            let on_frontier = (0..d)
                .any(|i| p.coord(i) == boxed.lo().coord(i) || p.coord(i) == boxed.hi().coord(i));
            if on_frontier {
                debug_assert!(!self.contains(&p));
                let idx = index(&p);
                if !visited[idx] {
                    visited[idx] = true;
                    queue.push_back(p);
                }
            }
        }
        let offsets = linf_offsets(d);
        let mut reached = queue.len();
        while let Some(p) = queue.pop_front() {
            for &o in &offsets {
                let q = p + o;
                if boxed.contains(&q) && !self.contains(&q) {
                    let idx = index(&q);
                    if !visited[idx] {
                        visited[idx] = true;
                        reached += 1;
                        queue.push_back(q);
                    }
                }
            }
        }
        reached == total - self.sites.len()
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sites.iter()).finish()
    }
}

impl PartialOrd for SiteSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SiteSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sites.cmp(&other.sites)
    }
}

/// The `2d` unit offsets `±e_i`.
pub fn unit_offsets(dim: usize) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * dim);
    for axis in 0..dim {
        out.push(Point::unit(dim, axis));
        out.push(-Point::unit(dim, axis));
    }
    out
}

/// The `3^d - 1` nonzero offsets with `‖o‖_∞ = 1`.
pub fn linf_offsets(dim: usize) -> Vec<Point> {
    let mut out = Vec::new();
    let mut cur = vec![-1i32; dim];
    loop {
        if cur.iter().any(|&c| c != 0) {
            out.push(Point::new(&cur));
        }
        let mut axis = dim;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if cur[axis] < 1 {
                cur[axis] += 1;
                break;
            }
            cur[axis] = -1;
        }
    }
}

/// All offsets with `1 <= ‖o‖_∞ <= radius`.
pub fn ball_offsets(dim: usize, radius: u32) -> Vec<Point> {
    let r = radius as i32;
    Rectangle::centered_box(dim, r)
        .sites()
        .into_iter()
        .filter(|p| p.norm_inf() >= 1)
        .collect()
}
