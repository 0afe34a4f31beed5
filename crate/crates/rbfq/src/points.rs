//! Collocation geometry: Halton point sets in a box, boundary sampling on the
//! faces, and the fill/separation distances that drive every error and
//! conditioning estimate downstream.

use crate::error::{Error, Result};
use std::io::Write as _;
use std::path::Path;

/// A point is a dense coordinate vector of the domain's dimension.
pub type Point = Vec<f64>;

/// Axis-aligned box domain with its 2d faces as the boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    d: usize,
    bounds: Vec<(f64, f64)>,
}

impl Domain {
    /// The unit cube [0,1]^d.
    pub fn unit_cube(d: usize) -> Result<Self> {
        Self::new(vec![(0.0, 1.0); d])
    }

    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Dimension("domain needs at least one axis".into()));
        }
        for &(lo, hi) in &bounds {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Dimension(format!(
                    "degenerate interval [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self {
            d: bounds.len(),
            bounds,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn contains_strictly(&self, x: &[f64]) -> bool {
        x.len() == self.d
            && x.iter()
                .zip(&self.bounds)
                .all(|(&xi, &(lo, hi))| xi > lo && xi < hi)
    }

    /// True if the point lies on at least one face (and inside the closure).
    pub fn on_boundary(&self, x: &[f64]) -> bool {
        if x.len() != self.d {
            return false;
        }
        let inside = x
            .iter()
            .zip(&self.bounds)
            .all(|(&xi, &(lo, hi))| xi >= lo && xi <= hi);
        inside
            && x.iter()
                .zip(&self.bounds)
                .any(|(&xi, &(lo, hi))| xi == lo || xi == hi)
    }
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(n);
    let mut cand = 2u64;
    while primes.len() < n {
        if primes.iter().all(|&p| cand % p != 0) {
            primes.push(cand);
        }
        cand += 1;
    }
    primes
}

/// Radical-inverse of `i` in the given base; `i` starts at 1 so the value is
/// always strictly inside (0, 1).
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let b = base as f64;
    while i > 0 {
        f /= b;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Halton sequence points (bases = the first d primes), the first `seed_skip`
/// entries dropped, affinely scaled into the domain.
pub fn generate_halton(count: usize, domain: &Domain, seed_skip: usize) -> Result<Vec<Point>> {
    if count == 0 {
        return Err(Error::Points("requested an empty Halton sample".into()));
    }
    let primes = first_primes(domain.d());
    let mut pts = Vec::with_capacity(count);
    for i in 1 + seed_skip as u64..=(seed_skip + count) as u64 {
        let p: Point = primes
            .iter()
            .zip(domain.bounds())
            .map(|(&b, &(lo, hi))| lo + radical_inverse(i, b) * (hi - lo))
            .collect();
        pts.push(p);
    }
    Ok(pts)
}

/// `per_face` quasi-uniform points on each of the 2d faces, deduplicated.
///
/// Faces are enumerated axis-major (axis 0 low, axis 0 high, axis 1 low, ...);
/// each face uses the Halton sequence in its d-1 free coordinates with a
/// per-face offset into the sequence so faces do not repeat the same pattern.
/// For d = 1 the boundary is exactly the two endpoints.
pub fn generate_boundary(domain: &Domain, per_face: usize) -> Result<Vec<Point>> {
    if per_face == 0 {
        return Err(Error::Points("per_face must be at least 1".into()));
    }
    let d = domain.d();
    if d == 1 {
        let (lo, hi) = domain.bounds()[0];
        return Ok(vec![vec![lo], vec![hi]]);
    }
    let primes = first_primes(d - 1);
    let mut pts: Vec<Point> = Vec::with_capacity(2 * d * per_face);
    for face in 0..2 * d {
        let axis = face / 2;
        let side = face % 2;
        let fixed = if side == 0 {
            domain.bounds()[axis].0
        } else {
            domain.bounds()[axis].1
        };
        let skip = (face * per_face) as u64;
        for i in 1..=per_face as u64 {
            let mut p = vec![0.0; d];
            p[axis] = fixed;
            let mut prime_it = primes.iter();
            for (j, coord) in p.iter_mut().enumerate() {
                if j == axis {
                    continue;
                }
                let (lo, hi) = domain.bounds()[j];
                *coord = lo + radical_inverse(skip + i, *prime_it.next().unwrap()) * (hi - lo);
            }
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
    }
    Ok(pts)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Half of the smallest pairwise distance, computed by exact brute force.
///
/// Duplicate points are an error: they collapse the separation distance to
/// zero and with it every stability bound built on it.
pub fn separation_distance(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Points(
            "separation distance needs at least two points".into(),
        ));
    }
    let mut min = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let r = dist(a, b);
            if r == 0.0 {
                return Err(Error::Points(format!("duplicate point {a:?}")));
            }
            min = min.min(r);
        }
    }
    Ok(0.5 * min)
}

/// Probe points filling the closed box: an endpoint-inclusive lattice in
/// d <= 3, Halton probes (offset past any realistic sample range) otherwise.
fn probe_points(domain: &Domain, probe_count: usize) -> Vec<Point> {
    let d = domain.d();
    if d <= 3 {
        let per_axis = ((probe_count as f64).powf(1.0 / d as f64).floor() as usize).max(2);
        let mut probes = Vec::with_capacity(per_axis.pow(d as u32));
        let mut idx = vec![0usize; d];
        loop {
            let p: Point = idx
                .iter()
                .zip(domain.bounds())
                .map(|(&i, &(lo, hi))| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                .collect();
            probes.push(p);
            let mut axis = 0;
            loop {
                idx[axis] += 1;
                if idx[axis] < per_axis {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
                if axis == d {
                    return probes;
                }
            }
        }
    } else {
        generate_halton(probe_count, domain, 50_000).expect("probe_count >= 1")
    }
}

/// Largest distance from any probe to its nearest point: a probe-resolution
/// lower estimate of the true fill distance.
pub fn fill_distance(points: &[Point], domain: &Domain, probe_count: usize) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Points("fill distance of an empty set".into()));
    }
    if probe_count == 0 {
        return Err(Error::Points("probe_count must be at least 1".into()));
    }
    if probe_count == 1 {
        log::warn!("fill distance from a single probe is a low-confidence estimate");
    }
    let probes = probe_points(domain, probe_count);
    let h = probes
        .iter()
        .map(|p| {
            points
                .iter()
                .map(|x| dist(p, x))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    Ok(h)
}

/// Default probe budget for the fill-distance estimate in d <= 3.
pub const DEFAULT_PROBE_COUNT: usize = 1 << 14;

/// Boundary density that keeps face spacing comparable to interior spacing:
/// interior spacing is ~ n^(-1/d), so a face wants ~ n^((d-1)/d) points split
/// over the 2^(d-1) ... rather, over the available faces; d = 1 needs exactly
/// the endpoints.
pub fn matched_per_face(n_interior: usize, d: usize) -> usize {
    if d == 1 {
        1
    } else {
        let target = (n_interior as f64).powf((d - 1) as f64 / d as f64) / (1 << (d - 1)) as f64;
        (target.ceil() as usize).max(1)
    }
}

/// Interior/boundary split with its quasi-uniformity measurements.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub interior: Vec<Point>,
    pub boundary: Vec<Point>,
    /// Fill distance estimate: max of the domain fill and the face-restricted
    /// boundary fill.
    pub h: f64,
    /// Exact separation distance of the union.
    pub q: f64,
    /// Quasi-uniformity ratio h/q.
    pub c_qu: f64,
}

impl PointSet {
    /// Validates the split and measures h, q and their ratio.
    pub fn new(
        interior: Vec<Point>,
        boundary: Vec<Point>,
        domain: &Domain,
        probe_count: usize,
    ) -> Result<Self> {
        for p in &interior {
            if !domain.contains_strictly(p) {
                return Err(Error::Points(format!(
                    "interior point {p:?} not strictly inside the domain"
                )));
            }
        }
        for p in &boundary {
            if !domain.on_boundary(p) {
                return Err(Error::Points(format!("point {p:?} is not on a face")));
            }
        }
        if boundary.is_empty() {
            return Err(Error::Points("boundary sample is empty".into()));
        }
        let union: Vec<Point> = interior.iter().chain(&boundary).cloned().collect();
        let q = separation_distance(&union)?;
        let mut h = fill_distance(&union, domain, probe_count)?;
        h = h.max(boundary_fill(&boundary, domain, probe_count));
        Ok(Self {
            interior,
            boundary,
            h,
            q,
            c_qu: h / q,
        })
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_total(&self) -> usize {
        self.interior.len() + self.boundary.len()
    }

    /// Writes one point per row: coordinates, then an interior/boundary tag.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        let d = self.interior.first().or(self.boundary.first()).unwrap().len();
        let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
        writeln!(file, "{},tag", header.join(","))?;
        for (pts, tag) in [(&self.interior, "interior"), (&self.boundary, "boundary")] {
            for p in pts.iter() {
                let coords: Vec<String> = p.iter().map(|c| format!("{c:.17e}")).collect();
                writeln!(file, "{},{tag}", coords.join(","))?;
            }
        }
        Ok(())
    }

    /// Reads a point set written by [`PointSet::write_csv`], re-measuring the
    /// distances against the given domain.
    pub fn read_csv(path: &Path, domain: &Domain, probe_count: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Points(e.to_string()))?;
            let n = rec.len();
            if n != domain.d() + 1 {
                return Err(Error::Points(format!(
                    "row has {n} fields, expected {}",
                    domain.d() + 1
                )));
            }
            let coords: Vec<f64> = rec
                .iter()
                .take(n - 1)
                .map(|s| s.parse::<f64>().map_err(|e| Error::Points(e.to_string())))
                .collect::<Result<_>>()?;
            match &rec[n - 1] {
                "interior" => interior.push(coords),
                "boundary" => boundary.push(coords),
                other => return Err(Error::Points(format!("unknown tag {other:?}"))),
            }
        }
        Self::new(interior, boundary, domain, probe_count)
    }
}

/// Fill distance of the boundary sample over the boundary itself: probes on
/// each face (Euclidean metric in the ambient space), nearest boundary point.
fn boundary_fill(boundary: &[Point], domain: &Domain, probe_count: usize) -> f64 {
    let d = domain.d();
    if d == 1 {
        // Faces are the endpoints; distance from each to the nearest sample.
        let mut worst = 0.0f64;
        for &end in &[domain.bounds()[0].0, domain.bounds()[0].1] {
            let near = boundary
                .iter()
                .map(|p| (p[0] - end).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
        }
        return worst;
    }
    // Probe budget per face, spread over a (d-1)-dimensional lattice.
    let per_face = (probe_count / (2 * d)).max(2);
    let mut worst = 0.0f64;
    for face in 0..2 * d {
        let axis = face / 2;
        let fixed = if face % 2 == 0 {
            domain.bounds()[axis].0
        } else {
            domain.bounds()[axis].1
        };
        let face_bounds: Vec<(f64, f64)> = domain
            .bounds()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != axis)
            .map(|(_, &b)| b)
            .collect();
        let face_domain = Domain::new(face_bounds).expect("face of a valid domain");
        for probe in probe_points(&face_domain, per_face) {
            let mut p = Vec::with_capacity(d);
            let mut it = probe.iter();
            for j in 0..d {
                p.push(if j == axis { fixed } else { *it.next().unwrap() });
            }
            let near = boundary
                .iter()
                .map(|x| dist(&p, x))
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
        }
    }
    worst
}
