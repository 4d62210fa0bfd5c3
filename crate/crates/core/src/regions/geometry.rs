//! Convex polygons in the plane.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative tolerance for collinearity and duplicate detection.
const GEOM_EPS: f64 = 1e-12;

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Whether `o -> a -> b` turns strictly left in floating point.
fn left_turn(o: Point, a: Point, b: Point) -> bool {
    cross(sub(a, o), sub(b, o)) > 0.0
}

/// Whether `a` sits on the way from `o` to `b`, up to rounding: the turn is
/// negligible and the direction does not reverse.
fn passes_through(o: Point, a: Point, b: Point) -> bool {
    let (u, v) = (sub(a, o), sub(b, a));
    cross(u, v).abs() <= GEOM_EPS * norm(u) * norm(v) && u[0] * v[0] + u[1] * v[1] >= 0.0
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2
    } else {
        0.0
    };
    let t = t.clamp(0.0, 1.0);
    norm(sub(p, [a[0] + t * ab[0], a[1] + t * ab[1]]))
}

/// A nonempty convex polygon, possibly degenerate (a point or a segment).
///
/// Vertices run counterclockwise from the lexicographically smallest
/// `(x, y)`, with no repeated or collinear vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl TryFrom<Vec<Point>> for ConvexPolygon {
    type Error = Error;
    fn try_from(v: Vec<Point>) -> Result<Self> {
        ConvexPolygon::hull(&v)
    }
}

impl From<ConvexPolygon> for Vec<Point> {
    fn from(p: ConvexPolygon) -> Self {
        p.vertices
    }
}

impl ConvexPolygon {
    /// Convex hull by Andrew's monotone chain.
    pub fn hull(points: &[Point]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyRegion);
        }
        if let Some(bad) = points
            .iter()
            .find(|p| !p[0].is_finite() || !p[1].is_finite())
        {
            return Err(Error::InvalidParameter(format!("non-finite point {bad:?}")));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let scale = pts
            .iter()
            .map(|p| p[0].abs().max(p[1].abs()))
            .fold(1.0, f64::max);
        pts.dedup_by(|a, b| norm(sub(*a, *b)) <= GEOM_EPS * scale);
        if pts.len() <= 2 {
            return Ok(ConvexPolygon { vertices: pts });
        }
        let mut lower: Vec<Point> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && !left_turn(lower[lower.len() - 2], lower[lower.len() - 1], p)
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && !left_turn(upper[upper.len() - 2], upper[upper.len() - 1], p)
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        // drop vertices that repeat or are collinear up to rounding; sorting
        // only brings near-duplicates together when their x values tie
        let mut v = lower;
        let mut changed = true;
        while changed && v.len() > 2 {
            changed = false;
            for i in 0..v.len() {
                let k = v.len();
                let next = v[(i + 1) % k];
                if norm(sub(v[i], next)) <= GEOM_EPS * scale
                    || passes_through(v[(i + k - 1) % k], v[i], next)
                {
                    v.remove(i);
                    changed = true;
                    break;
                }
            }
        }
        if v.len() == 2 && norm(sub(v[0], v[1])) <= GEOM_EPS * scale {
            v.pop();
        }
        let first = (0..v.len())
            .min_by(|&i, &j| {
                v[i][0]
                    .total_cmp(&v[j][0])
                    .then(v[i][1].total_cmp(&v[j][1]))
            })
            .unwrap_or(0);
        v.rotate_left(first);
        Ok(ConvexPolygon { vertices: v })
    }

    pub fn point(p: Point) -> Self {
        ConvexPolygon { vertices: vec![p] }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        let mut a = 0.0;
        for i in 0..v.len() {
            a += cross(v[i], v[(i + 1) % v.len()]);
        }
        a / 2.0
    }

    /// Minkowski sum by merging the two edge sequences in angular order.
    pub fn minkowski(&self, other: &ConvexPolygon) -> ConvexPolygon {
        // start both at the lowest, then leftmost, vertex
        let rotate = |v: &[Point]| -> Vec<Point> {
            let start = (0..v.len())
                .min_by(|&i, &j| {
                    v[i][1]
                        .total_cmp(&v[j][1])
                        .then(v[i][0].total_cmp(&v[j][0]))
                })
                .unwrap_or(0);
            let mut r: Vec<Point> = v[start..].iter().chain(&v[..start]).copied().collect();
            r.push(r[0]);
            r.push(r[1 % (r.len() - 1)]);
            r
        };
        let (p, q) = (rotate(&self.vertices), rotate(&other.vertices));
        let (np, nq) = (p.len() - 2, q.len() - 2);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(np + nq);
        while i < np || j < nq {
            out.push([p[i][0] + q[j][0], p[i][1] + q[j][1]]);
            let c = cross(sub(p[i + 1], p[i]), sub(q[j + 1], q[j]));
            if c >= 0.0 && i < np {
                i += 1;
            }
            if c <= 0.0 && j < nq {
                j += 1;
            }
        }
        ConvexPolygon::hull(&out).expect("sum of nonempty polygons")
    }

    pub fn scale(&self, c: f64) -> ConvexPolygon {
        let pts: Vec<Point> = self.vertices.iter().map(|p| [c * p[0], c * p[1]]).collect();
        ConvexPolygon::hull(&pts).expect("nonempty")
    }

    pub fn translate(&self, d: Point) -> ConvexPolygon {
        ConvexPolygon {
            vertices: self
                .vertices
                .iter()
                .map(|p| [p[0] + d[0], p[1] + d[1]])
                .collect(),
        }
    }

    /// Euclidean distance from `p` to the filled polygon; zero inside.
    pub fn distance_to(&self, p: Point) -> f64 {
        let v = &self.vertices;
        match v.len() {
            1 => norm(sub(p, v[0])),
            2 => segment_distance(p, v[0], v[1]),
            k => {
                let inside = (0..k).all(|i| cross(sub(v[(i + 1) % k], v[i]), sub(p, v[i])) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..k)
                        .map(|i| segment_distance(p, v[i], v[(i + 1) % k]))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    /// `sup_{a in self} d(a, other)`. The distance to a convex set is a
    /// convex function, so the supremum sits at a vertex.
    pub fn directed_distance(&self, other: &ConvexPolygon) -> f64 {
        self.vertices
            .iter()
            .map(|&p| other.distance_to(p))
            .fold(0.0, f64::max)
    }

    pub fn hausdorff(&self, other: &ConvexPolygon) -> f64 {
        self.directed_distance(other)
            .max(other.directed_distance(self))
    }

    /// Whether `other` lies inside `self` up to `slack`.
    pub fn contains(&self, other: &ConvexPolygon, slack: f64) -> bool {
        other.directed_distance(self) <= slack
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn square(side: f64) -> ConvexPolygon {
        ConvexPolygon::hull(&[[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]]).unwrap()
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let h = ConvexPolygon::hull(&[
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [0.3, 0.3],
            [0.0, 1.0],
            [1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(h.vertices(), &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!((h.area() - 0.5).abs() < 1e-15);
        let seg = ConvexPolygon::hull(&[[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]]).unwrap();
        assert_eq!(seg.vertices().len(), 2);
        assert_eq!(
            ConvexPolygon::hull(&[[2.0, 3.0], [2.0, 3.0]])
                .unwrap()
                .vertices()
                .len(),
            1
        );
        assert!(matches!(ConvexPolygon::hull(&[]), Err(Error::EmptyRegion)));
    }

    #[test]
    fn hull_merges_near_duplicates_that_do_not_sort_together() {
        let c = 0.531004406411;
        let pts = [
            [0.0, 0.0],
            [c, 0.0],
            [0.0, c],
            [1.1e-16, 0.3],
            [1.1e-16, c],
            [1.7e-16, c + 1e-17],
        ];
        let h = ConvexPolygon::hull(&pts).unwrap();
        assert_eq!(h.vertices().len(), 3, "{:?}", h.vertices());
    }

    #[test]
    fn hull_keeps_extremes_of_a_sliver() {
        // columns a few ulps apart, as produced by near-zero rate bounds
        let e = f64::EPSILON / 2.0;
        let pts = [
            [0.0, 0.0],
            [0.0, 0.57],
            [e, 0.0],
            [e, 0.52],
            [2.0 * e, 0.51],
            [3.0 * e, 0.36],
            [3.0 * e, 0.0],
        ];
        let h = ConvexPolygon::hull(&pts).unwrap();
        let top = h.vertices().iter().map(|p| p[1]).fold(0.0, f64::max);
        assert_eq!(top, 0.57);
        assert!(pts.iter().all(|&p| h.distance_to(p) < 1e-15));
    }

    #[test]
    fn minkowski_identity_and_convexity() {
        let t = ConvexPolygon::hull(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(t.minkowski(&ConvexPolygon::point([0.0, 0.0])), t);
        let half = t.scale(0.5);
        let s = half.minkowski(&half);
        assert!(s.hausdorff(&t) < 1e-15);
        // segment + segment = parallelogram
        let a = ConvexPolygon::hull(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = ConvexPolygon::hull(&[[0.0, 0.0], [0.0, 2.0]]).unwrap();
        assert!((a.minkowski(&b).area() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_examples() {
        let s = square(1.0);
        assert_eq!(s.hausdorff(&s), 0.0);
        assert!((s.hausdorff(&s.translate([0.3, 0.0])) - 0.3).abs() < 1e-15);
        assert!(s.contains(&square(0.5), 0.0));
        assert!(!square(0.5).contains(&s, 0.1));
    }

    #[test]
    fn minkowski_commutes_and_associates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cloud = |k: usize| {
            let pts: Vec<Point> = (0..k)
                .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            ConvexPolygon::hull(&pts).unwrap()
        };
        for _ in 0..20 {
            let (a, b, c) = (cloud(7), cloud(5), cloud(9));
            assert!(a.minkowski(&b).hausdorff(&b.minkowski(&a)) < 1e-12);
            assert!(
                a.minkowski(&b)
                    .minkowski(&c)
                    .hausdorff(&a.minkowski(&b.minkowski(&c)))
                    < 1e-12
            );
        }
    }
}
