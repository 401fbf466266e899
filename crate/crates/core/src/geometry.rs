//! Interface geometry on the torus: top-two competition masks, tie-set
//! extraction by periodic marching squares, distance fields, Hausdorff
//! distances and nondegeneracy strips.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gating::MarkerSet;
use crate::grid::{Grid, ScalarField, VectorField};
use crate::measure::Measured;
use crate::spectral::Spectral;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Ordered vertices of a contour piece. Closed polylines do not repeat
/// their first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub closed: bool,
}

impl Polyline {
    /// Length under the periodic metric.
    pub fn length(&self, grid: &Grid) -> f64 {
        let pts = &self.points;
        let mut total: f64 = pts
            .windows(2)
            .map(|w| grid.distance((w[0].x, w[0].y), (w[1].x, w[1].y)))
            .sum();
        if self.closed && pts.len() > 1 {
            let (a, b) = (pts[pts.len() - 1], pts[0]);
            total += grid.distance((a.x, a.y), (b.x, b.y));
        }
        total
    }
}

/// Extracted tie set of one pair `(i, j)`, `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TieSet {
    pub i: usize,
    pub j: usize,
    pub polylines: Vec<Polyline>,
}

impl TieSet {
    pub fn is_empty(&self) -> bool {
        self.polylines.iter().all(|p| p.points.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieSetNetwork {
    pub pairs: Vec<TieSet>,
    /// Whether the top-two restriction was applied.
    pub restricted: bool,
}

impl TieSetNetwork {
    pub fn pair(&self, i: usize, j: usize) -> Option<&TieSet> {
        let (i, j) = (i.min(j), i.max(j));
        self.pairs.iter().find(|t| t.i == i && t.j == j)
    }

    pub fn all_polylines(&self) -> impl Iterator<Item = &Polyline> {
        self.pairs.iter().flat_map(|t| t.polylines.iter())
    }
}

/// Points where `φ_i` and `φ_j` both dominate every other marker.
pub fn top_two_mask(m: &MarkerSet, i: usize, j: usize) -> Result<Vec<bool>> {
    m.check_pair(i, j)?;
    let (fi, fj) = (m.marker(i).values(), m.marker(j).values());
    let mut mask = vec![true; m.grid().len()];
    for (l, other) in m.markers().iter().enumerate() {
        if l == i || l == j {
            continue;
        }
        for (idx, &v) in other.values().iter().enumerate() {
            if fi[idx] < v || fj[idx] < v {
                mask[idx] = false;
            }
        }
    }
    Ok(mask)
}

/// Zero level set of `φ_i − φ_j` as polylines. With `restricted`, cells
/// none of whose corners lie in the top-two region are skipped.
///
/// Marching squares with linear interpolation along cell edges; saddle
/// cells are resolved by the sign of the corner average.
pub fn extract_tie_set(m: &MarkerSet, i: usize, j: usize, restricted: bool) -> Result<Vec<Polyline>> {
    let f = m.difference(i, j)?;
    if f.values().iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateContour { i, j });
    }
    let mask = if restricted {
        Some(top_two_mask(m, i, j)?)
    } else {
        None
    };
    Ok(contour_zero(&f, mask.as_deref()))
}

/// Tie sets of every pair `i < j`.
pub fn extract_network(m: &MarkerSet, restricted: bool) -> Result<TieSetNetwork> {
    let mut pairs = Vec::new();
    for i in 0..m.k() {
        for j in (i + 1)..m.k() {
            pairs.push(TieSet {
                i,
                j,
                polylines: extract_tie_set(m, i, j, restricted)?,
            });
        }
    }
    Ok(TieSetNetwork { pairs, restricted })
}

/// Periodic marching squares at level 0.
pub fn contour_zero(f: &ScalarField, cell_mask: Option<&[bool]>) -> Vec<Polyline> {
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let v = |i: usize, j: usize| f.get(i % n, j % n);
    let pos = |x: f64| x >= 0.0;

    // edge ids: horizontal (i,j)-(i+1,j) → 2(i n + j); vertical (i,j)-(i,j+1) → 2(i n + j) + 1
    let h_edge = |i: usize, j: usize| 2 * ((i % n) * n + (j % n));
    let v_edge = |i: usize, j: usize| 2 * ((i % n) * n + (j % n)) + 1;

    let mut points: HashMap<usize, Point> = HashMap::new();
    let mut crossing = |id: usize, (ia, ja): (usize, usize), (ib, jb): (usize, usize)| {
        points.entry(id).or_insert_with(|| {
            let (fa, fb) = (v(ia, ja), v(ib, jb));
            let t = fa / (fa - fb);
            let (xa, ya) = (ia as f64 * h, ja as f64 * h);
            let (xb, yb) = (ib as f64 * h, jb as f64 * h);
            Point::new(grid.wrap(xa + t * (xb - xa)), grid.wrap(ya + t * (yb - ya)))
        });
        id
    };

    let mut segments: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if let Some(mask) = cell_mask {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                if !corners.iter().any(|&(a, b)| mask[grid.index(a % n, b % n)]) {
                    continue;
                }
            }
            let c = [v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1)];
            let s = c.map(pos);
            let mut e = [None; 4];
            if s[0] != s[1] {
                e[0] = Some(crossing(h_edge(i, j), (i, j), (i + 1, j)));
            }
            if s[1] != s[2] {
                e[1] = Some(crossing(v_edge(i + 1, j), (i + 1, j), (i + 1, j + 1)));
            }
            if s[3] != s[2] {
                e[2] = Some(crossing(h_edge(i, j + 1), (i, j + 1), (i + 1, j + 1)));
            }
            if s[0] != s[3] {
                e[3] = Some(crossing(v_edge(i, j), (i, j), (i, j + 1)));
            }
            let crossed: Vec<usize> = e.iter().flatten().copied().collect();
            match crossed.len() {
                0 => {}
                2 => segments.push((crossed[0], crossed[1])),
                4 => {
                    let [e0, e1, e2, e3] = e.map(|x| x.expect("saddle crosses all edges"));
                    let center = 0.25 * c.iter().sum::<f64>();
                    if pos(center) == s[0] {
                        segments.push((e0, e1));
                        segments.push((e2, e3));
                    } else {
                        segments.push((e3, e0));
                        segments.push((e1, e2));
                    }
                }
                _ => unreachable!("a cell crosses an even number of edges"),
            }
        }
    }
    stitch(&segments, &points)
}

/// Chain segments sharing edge crossings into polylines. Open chains first,
/// then cycles, both in segment order so the output is deterministic.
fn stitch(segments: &[(usize, usize)], points: &HashMap<usize, Point>) -> Vec<Polyline> {
    let mut by_edge: HashMap<usize, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(s);
        by_edge.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, start_edge: usize, used: &mut [bool]| -> (Vec<usize>, bool) {
        let mut chain = vec![start_edge];
        let (mut seg, mut at) = (start_seg, start_edge);
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            if next == start_edge {
                return (chain, true);
            }
            chain.push(next);
            at = next;
            match by_edge[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return (chain, false),
            }
        }
    };

    for (s, &(a, b)) in segments.iter().enumerate() {
        if used[s] {
            continue;
        }
        let start = if by_edge[&a].len() == 1 {
            a
        } else if by_edge[&b].len() == 1 {
            b
        } else {
            continue;
        };
        let (chain, closed) = walk(s, start, &mut used);
        out.push((chain, closed));
    }
    for (s, &(a, _)) in segments.iter().enumerate() {
        if !used[s] {
            let (chain, closed) = walk(s, a, &mut used);
            out.push((chain, closed));
        }
    }
    out.into_iter()
        .map(|(chain, closed)| Polyline {
            points: chain.iter().map(|id| points[id]).collect(),
            closed,
        })
        .collect()
}

/// Sample polylines so consecutive points are at most `spacing` apart.
pub fn resample(grid: &Grid, polylines: &[Polyline], spacing: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for line in polylines {
        let pts = &line.points;
        if pts.is_empty() {
            continue;
        }
        let emit_segment = |a: Point, b: Point, out: &mut Vec<Point>| {
            let dx = grid.periodic_delta(a.x, b.x);
            let dy = grid.periodic_delta(a.y, b.y);
            let steps = (dx.hypot(dy) / spacing).ceil().max(1.0) as usize;
            for s in 0..steps {
                let t = s as f64 / steps as f64;
                out.push(Point::new(grid.wrap(a.x + t * dx), grid.wrap(a.y + t * dy)));
            }
        };
        for w in pts.windows(2) {
            emit_segment(w[0], w[1], &mut out);
        }
        if line.closed && pts.len() > 1 {
            emit_segment(pts[pts.len() - 1], pts[0], &mut out);
        } else {
            out.push(pts[pts.len() - 1]);
        }
    }
    out
}

/// Bucketed point set answering nearest-distance queries under the
/// periodic metric.
#[derive(Debug, Clone)]
pub struct PointIndex {
    grid: Grid,
    points: Vec<Point>,
    buckets: Vec<Vec<usize>>,
    nb: usize,
    cell: f64,
}

impl PointIndex {
    pub fn new(grid: Grid, points: Vec<Point>) -> Self {
        let nb = ((points.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let cell = grid.length() / nb as f64;
        let mut buckets = vec![Vec::new(); nb * nb];
        for (k, p) in points.iter().enumerate() {
            let (bx, by) = Self::bucket_of(p, cell, nb);
            buckets[bx * nb + by].push(k);
        }
        Self {
            grid,
            points,
            buckets,
            nb,
            cell,
        }
    }

    fn bucket_of(p: &Point, cell: f64, nb: usize) -> (usize, usize) {
        (
            ((p.x / cell) as usize).min(nb - 1),
            ((p.y / cell) as usize).min(nb - 1),
        )
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn dist(&self, q: Point, k: usize) -> f64 {
        let p = self.points[k];
        self.grid.distance((q.x, q.y), (p.x, p.y))
    }

    /// Exact minimum distance from `q` to the set; `+∞` when empty.
    pub fn nearest_distance(&self, q: Point) -> f64 {
        if self.points.is_empty() {
            return f64::INFINITY;
        }
        let nb = self.nb as i64;
        let q = Point::new(self.grid.wrap(q.x), self.grid.wrap(q.y));
        let (cx, cy) = Self::bucket_of(&q, self.cell, self.nb);
        let (cx, cy) = (cx as i64, cy as i64);
        let mut best = f64::INFINITY;
        let mut r: i64 = 0;
        loop {
            if 2 * r + 1 >= nb {
                // the ring would wrap onto itself; finish with a full scan
                return (0..self.points.len())
                    .map(|k| self.dist(q, k))
                    .fold(f64::INFINITY, f64::min);
            }
            for dx in -r..=r {
                for dy in -r..=r {
                    if dx.abs() != r && dy.abs() != r {
                        continue;
                    }
                    let bx = (cx + dx).rem_euclid(nb) as usize;
                    let by = (cy + dy).rem_euclid(nb) as usize;
                    for &k in &self.buckets[bx * self.nb + by] {
                        best = best.min(self.dist(q, k));
                    }
                }
            }
            // anything outside the visited block is at least r cells away
            if best <= r as f64 * self.cell {
                return best;
            }
            r += 1;
        }
    }
}

/// Distances to a point set, with a flag for the empty set (all `+∞`).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    field: ScalarField,
    empty_set: bool,
}

impl DistanceField {
    pub fn from_field(field: ScalarField) -> Self {
        Self {
            field,
            empty_set: false,
        }
    }

    /// Distance field of the empty set.
    pub fn empty(grid: Grid) -> Self {
        Self {
            field: ScalarField::constant(grid, f64::INFINITY),
            empty_set: true,
        }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn is_empty_set(&self) -> bool {
        self.empty_set
    }
}

/// Minimum periodic distance from each grid point to `pts`.
pub fn distance_to_set(grid: &Grid, pts: &[Point]) -> DistanceField {
    if pts.is_empty() {
        return DistanceField::empty(*grid);
    }
    let index = PointIndex::new(*grid, pts.to_vec());
    let field = ScalarField::from_fn(*grid, |x, y| index.nearest_distance(Point::new(x, y)));
    DistanceField::from_field(field)
}

/// Distance field of polylines after resampling at spacing `h/2`.
pub fn distance_to_polylines<'a>(
    grid: &Grid,
    polylines: impl IntoIterator<Item = &'a Polyline>,
) -> DistanceField {
    let lines: Vec<Polyline> = polylines.into_iter().cloned().collect();
    distance_to_set(grid, &resample(grid, &lines, 0.5 * grid.spacing()))
}

/// Hausdorff distance under the periodic metric, brute force.
pub fn hausdorff_brute(grid: &Grid, a: &[Point], b: &[Point]) -> Measured {
    if a.is_empty() || b.is_empty() {
        return Measured::Empty;
    }
    let directed = |from: &[Point], to: &[Point]| {
        let mut worst: f64 = 0.0;
        for p in from {
            let mut best = f64::INFINITY;
            for q in to {
                best = best.min(grid.distance((p.x, p.y), (q.x, q.y)));
                // cannot raise the running max any more
                if best <= worst {
                    break;
                }
            }
            worst = worst.max(best);
        }
        worst
    };
    Measured::Value(directed(a, b).max(directed(b, a)))
}

/// Hausdorff distance under the periodic metric using bucketed nearest
/// queries. Returns the same value as [`hausdorff_brute`].
pub fn hausdorff(grid: &Grid, a: &[Point], b: &[Point]) -> Measured {
    if a.is_empty() || b.is_empty() {
        return Measured::Empty;
    }
    let ia = PointIndex::new(*grid, a.to_vec());
    let ib = PointIndex::new(*grid, b.to_vec());
    let ab = a.iter().map(|&p| ib.nearest_distance(p)).fold(0.0, f64::max);
    let ba = b.iter().map(|&p| ia.nearest_distance(p)).fold(0.0, f64::max);
    Measured::Value(ab.max(ba))
}

/// Smallest `|∇(φ_i − φ_j)|` over the strip `{|φ_i − φ_j| ≤ δ}` intersected
/// with the top-two region. Empty when the strip has no grid points.
///
/// Grid points inside the strip are scanned directly. Because the minimum
/// typically sits on the strip edge `{|f| = δ}`, which grid points miss by up
/// to `h`, every grid edge crossing that edge is also refined: the crossing is
/// located by bisection on the trigonometric interpolant of `f` along the
/// grid line, and the gradient is interpolated there.
pub fn min_gradient_on_strip(
    spectral: &Spectral,
    m: &MarkerSet,
    i: usize,
    j: usize,
    delta: f64,
) -> Result<Measured> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("strip half-width must be positive, got {delta}"),
        });
    }
    let f = m.difference(i, j)?;
    let mask = top_two_mask(m, i, j)?;
    let grad = spectral.gradient(&f)?;
    let magnitude = grad.magnitude();
    let mut best = f64::INFINITY;
    let mut any = false;
    for ((&fv, &g), &inside) in f.values().iter().zip(magnitude.values()).zip(&mask) {
        if inside && fv.abs() <= delta {
            any = true;
            best = best.min(g);
        }
    }
    if any {
        best = best.min(strip_edge_minimum(spectral, &f, &grad, &mask, delta));
    }
    Ok(Measured::from_fold(best, any))
}

/// Gradient minimum over points where grid edges cross `|f| = δ`.
fn strip_edge_minimum(
    spectral: &Spectral,
    f: &ScalarField,
    grad: &VectorField,
    mask: &[bool],
    delta: f64,
) -> f64 {
    let grid = *f.grid();
    let n = grid.n();
    let h = grid.spacing();
    let in_strip = |v: f64| v.abs() <= delta;
    let mut best = f64::INFINITY;

    // axis 0: lines of constant x (vary j); axis 1: lines of constant y (vary i)
    for axis in 0..2 {
        for line in 0..n {
            let at = |t: usize| {
                let (a, b) = if axis == 0 { (line, t % n) } else { (t % n, line) };
                grid.index(a, b)
            };
            let crosses = (0..n).any(|t| {
                let (a, b) = (at(t), at(t + 1));
                in_strip(f.values()[a]) != in_strip(f.values()[b]) && (mask[a] || mask[b])
            });
            if !crosses {
                continue;
            }
            let sample = |field: &ScalarField| -> Vec<f64> { (0..n).map(|t| field.values()[at(t)]).collect() };
            let fl = spectral.line_interpolant(&sample(f));
            let gx = spectral.line_interpolant(&sample(&grad.x));
            let gy = spectral.line_interpolant(&sample(&grad.y));
            for t in 0..n {
                let (a, b) = (at(t), at(t + 1));
                let (fa, fb) = (f.values()[a], f.values()[b]);
                if in_strip(fa) == in_strip(fb) || !(mask[a] || mask[b]) {
                    continue;
                }
                let outside = if in_strip(fa) { fb } else { fa };
                let level = delta.copysign(outside);
                let (mut lo, mut hi) = (t as f64 * h, (t + 1) as f64 * h);
                let lo_below = fl.eval(lo) - level < 0.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if (fl.eval(mid) - level < 0.0) == lo_below {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s = 0.5 * (lo + hi);
                best = best.min(gx.eval(s).hypot(gy.eval(s)));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gating::PhaseConfig;
    use std::f64::consts::{PI, TAU};

    fn markers(g: Grid, fs: &[&dyn Fn(f64, f64) -> f64], levels: Vec<f64>) -> MarkerSet {
        MarkerSet::new(
            fs.iter().map(|f| ScalarField::from_fn(g, f)).collect(),
            PhaseConfig::new(levels, 10.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn top_two_trivial_cases() {
        let g = Grid::new(16).unwrap();
        let m = markers(g, &[&|x, _| x.sin(), &|_, y| y.cos()], vec![1.0, 0.0]);
        assert!(top_two_mask(&m, 0, 1).unwrap().iter().all(|&b| b));
        let m = markers(g, &[&|_, _| 0.0, &|_, _| 0.1, &|_, _| 1.0], vec![1.0, 0.0, -1.0]);
        assert!(top_two_mask(&m, 0, 1).unwrap().iter().all(|&b| !b));
        assert!(top_two_mask(&m, 1, 1).is_err());
    }

    #[test]
    fn shear_tie_lines() {
        let g = Grid::new(64).unwrap();
        let h = g.spacing();
        let m = markers(g, &[&|_, y| y.sin(), &|_, _| 0.0], vec![1.0, -1.0]);
        let lines = extract_tie_set(&m, 0, 1, true).unwrap();
        assert_eq!(lines.len(), 2);
        for line in &lines {
            assert!(line.closed);
            let y0 = line.points[0].y;
            for p in &line.points {
                let d = p.y.min((p.y - PI).abs()).min(TAU - p.y);
                assert!(d <= h);
                assert!((p.y - y0).abs() < 1e-9);
            }
            assert!((line.length(&g) - TAU).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn positive_difference_has_no_tie_set() {
        let g = Grid::new(16).unwrap();
        let m = markers(g, &[&|x, _| 2.0 + x.sin(), &|_, _| 0.0], vec![1.0, -1.0]);
        assert!(extract_tie_set(&m, 0, 1, false).unwrap().is_empty());
    }

    #[test]
    fn identical_markers_are_degenerate() {
        let g = Grid::new(16).unwrap();
        let m = markers(g, &[&|x, _| x.sin(), &|x, _| x.sin()], vec![1.0, -1.0]);
        assert!(matches!(
            extract_tie_set(&m, 0, 1, true),
            Err(Error::DegenerateContour { i: 0, j: 1 })
        ));
    }

    #[test]
    fn closed_curve_residual_bound() {
        let g = Grid::new(64).unwrap();
        let sp = Spectral::new(g);
        let f = |x: f64, y: f64| x.cos() + y.cos();
        let m = markers(g, &[&f, &|_, _| 0.0], vec![1.0, -1.0]);
        let lines = extract_tie_set(&m, 0, 1, false).unwrap();
        assert!(!lines.is_empty());
        let grad_sup = sp
            .gradient(&m.difference(0, 1).unwrap())
            .unwrap()
            .sup_magnitude();
        for p in lines.iter().flat_map(|l| &l.points) {
            assert!(f(p.x, p.y).abs() <= grad_sup * g.spacing());
        }
    }

    #[test]
    fn saddle_cells_produce_consistent_chains() {
        let g = Grid::new(32).unwrap();
        // zero set crosses itself at saddle points of cos x cos y
        let m = markers(g, &[&|x, y| x.cos() * y.cos() + 1e-3, &|_, _| 0.0], vec![1.0, -1.0]);
        let lines = extract_tie_set(&m, 0, 1, false).unwrap();
        for l in &lines {
            assert!(l.closed, "every chain closes on the torus");
        }
    }

    #[test]
    fn distance_examples() {
        let g = Grid::new(64).unwrap();
        let h = g.spacing();
        let d = distance_to_set(&g, &[Point::new(0.0, 0.0)]);
        assert!((d.field().get(32, 0) - PI).abs() < 1e-12);
        assert!((d.field().get(63, 0) - h).abs() < 1e-12);
        assert_eq!(d.field().get(0, 0), 0.0);
        assert!(distance_to_set(&g, &[]).is_empty_set());
    }

    #[test]
    fn distance_to_shear_lines() {
        let g = Grid::new(64).unwrap();
        let h = g.spacing();
        let m = markers(g, &[&|_, y| y.sin(), &|_, _| 0.0], vec![1.0, -1.0]);
        let lines = extract_tie_set(&m, 0, 1, true).unwrap();
        let d = distance_to_polylines(&g, &lines);
        let exact = ScalarField::from_fn(g, |_, y| y.min((y - PI).abs()).min(TAU - y));
        assert!(d.field().sup_distance(&exact).unwrap() <= h);
    }

    #[test]
    fn hausdorff_examples() {
        let g = Grid::new(64).unwrap();
        let a = vec![Point::new(0.0, 0.0)];
        let b = vec![Point::new(1.0, 0.0)];
        assert_eq!(hausdorff(&g, &a, &a), Measured::Value(0.0));
        assert!((hausdorff(&g, &a, &b).value().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(hausdorff(&g, &a, &[]), Measured::Empty);

        let eps = 0.01;
        let line = |y: f64| -> Vec<Point> { (0..200).map(|k| Point::new(k as f64 * TAU / 200.0, y)).collect() };
        let d = hausdorff(&g, &line(0.0), &line(eps)).value().unwrap();
        assert!((d - eps).abs() < 1e-12);
    }

    #[test]
    fn shear_strip_gradient() {
        let g = Grid::new(128).unwrap();
        let sp = Spectral::new(g);
        let m = markers(g, &[&|_, y| y.sin(), &|_, _| 0.0], vec![1.0, -1.0]);
        let v = min_gradient_on_strip(&sp, &m, 0, 1, 0.5).unwrap().value().unwrap();
        assert!((v - 3f64.sqrt() / 2.0).abs() <= 1e-6);

        let m = markers(g, &[&|_, _| 2.0, &|_, _| 0.0], vec![1.0, -1.0]);
        assert_eq!(min_gradient_on_strip(&sp, &m, 0, 1, 0.5).unwrap(), Measured::Empty);
    }
}
