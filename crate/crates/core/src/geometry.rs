//! Polygon geometry: sides, exterior angles, class-C validation, arc-length
//! parametrisation and the local frame attached to each nonconvex side.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{HnaError, Result};

/// Tolerance for recognising a right-angle corner.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    #[inline]
    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 2D cross product.
    #[inline]
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Vec2 {
        self * (1.0 / self.norm())
    }

    /// Anticlockwise rotation by `angle`.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Unit normal to the right of this direction (clockwise quarter turn).
    pub fn right_normal(self) -> Vec2 {
        Vec2::new(self.y, -self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    #[inline]
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    #[inline]
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    #[inline]
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SideKind {
    Convex,
    Nonconvex,
    /// Corner angles outside the admissible set; only ever seen on polygons
    /// that fail class-C validation.
    Irregular,
}

impl fmt::Display for SideKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SideKind::Convex => "C",
            SideKind::Nonconvex => "NC",
            SideKind::Irregular => "IRR",
        };
        f.write_str(s)
    }
}

/// One straight side of the polygon.
///
/// `start`/`end` follow the polygon orientation (interior on the left). The arc
/// parameter `s` runs from `origin()`: the start vertex on convex sides and the
/// right-angle corner on nonconvex sides.
#[derive(Debug, Clone, PartialEq)]
pub struct SideDescriptor {
    pub index: usize,
    pub start: Vec2,
    pub end: Vec2,
    pub length: f64,
    pub kind: SideKind,
    /// Exterior angles at (start, end).
    pub exterior_angles: (f64, f64),
    pub unit_normal: Vec2,
    /// Unit vector from `start` to `end`.
    pub unit_tangent: Vec2,
    pub partner_index: Option<usize>,
    /// `1 - pi/omega` at (start, end); absent at right-angle corners.
    pub singularity_exponents: (Option<f64>, Option<f64>),
    /// Arc length along the boundary from vertex 0 to `start`.
    pub arc_offset: f64,
    origin_at_end: bool,
}

impl SideDescriptor {
    /// Point where the arc parameter vanishes.
    pub fn origin(&self) -> Vec2 {
        if self.origin_at_end {
            self.end
        } else {
            self.start
        }
    }

    /// Endpoint at `s = length`.
    pub fn far_end(&self) -> Vec2 {
        if self.origin_at_end {
            self.start
        } else {
            self.end
        }
    }

    /// Unit vector `dx/ds`.
    pub fn param_tangent(&self) -> Vec2 {
        if self.origin_at_end {
            -self.unit_tangent
        } else {
            self.unit_tangent
        }
    }

    pub fn origin_is_end(&self) -> bool {
        self.origin_at_end
    }

    /// Exterior angles at (origin, far end).
    pub fn param_angles(&self) -> (f64, f64) {
        if self.origin_at_end {
            (self.exterior_angles.1, self.exterior_angles.0)
        } else {
            self.exterior_angles
        }
    }

    /// Point at arc length `s` from the parameter origin.
    pub fn arc_param(&self, s: f64) -> Result<Vec2> {
        let tol = 1e-12 * self.length;
        if !(s >= -tol && s <= self.length + tol) {
            return Err(HnaError::Domain(format!(
                "arc parameter {s} outside [0, {}] on side {}",
                self.length, self.index
            )));
        }
        Ok(self.point_at(s))
    }

    #[inline]
    pub fn point_at(&self, s: f64) -> Vec2 {
        if s <= 0.5 * self.length {
            self.origin() + self.param_tangent() * s
        } else {
            self.far_end() - self.param_tangent() * (self.length - s)
        }
    }

    /// Boundary arc length (from vertex 0, in polygon order) of local parameter `s`.
    pub fn global_arc(&self, s: f64) -> f64 {
        if self.origin_at_end {
            self.arc_offset + self.length - s
        } else {
            self.arc_offset + s
        }
    }
}

/// Position on a side held as distances from both ends of the parameter range:
/// `s` from the parameter origin and `sbar = L - s`. Whichever is smaller is the
/// exact one, so points near either end keep full relative precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPoint {
    pub s: f64,
    pub sbar: f64,
}

impl ArcPoint {
    pub fn from_s(s: f64, length: f64) -> Self {
        ArcPoint { s, sbar: length - s }
    }

    pub fn from_sbar(sbar: f64, length: f64) -> Self {
        ArcPoint { s: length - sbar, sbar }
    }

    /// Order along the side, comparing in the exact coordinate where possible.
    pub fn along_cmp(&self, o: &ArcPoint) -> std::cmp::Ordering {
        let key = |p: &ArcPoint| if p.s <= p.sbar { (0, p.s) } else { (1, -p.sbar) };
        let (a, b) = (key(self), key(o));
        a.0.cmp(&b.0).then(a.1.total_cmp(&b.1))
    }

    /// Same point up to rounding.
    pub fn same_as(&self, o: &ArcPoint, length: f64) -> bool {
        let tol = 1e-15 * length;
        (self.s - o.s).abs() <= tol && (self.sbar - o.sbar).abs() <= tol
    }
}

/// A polygon with its sides classified.
#[derive(Debug, Clone)]
pub struct PolygonModel {
    pub vertices: Vec<Vec2>,
    pub sides: Vec<SideDescriptor>,
    pub perimeter: f64,
    pub star_center: Option<Vec2>,
}

fn signed_area(v: &[Vec2]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>() * 0.5
}

fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    let on_segment = |p: Vec2, q: Vec2, r: Vec2, o: f64| {
        o == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on_segment(a, b, c, o1) || on_segment(a, b, d, o2) || on_segment(c, d, a, o3) || on_segment(c, d, b, o4)
}

fn is_right_angle(omega: f64) -> bool {
    (omega - FRAC_PI_2).abs() <= ANGLE_TOL
}

impl PolygonModel {
    /// Builds the model, normalising the orientation so the interior lies to the
    /// left of each side.
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(HnaError::InvalidGeometry(format!(
                "a polygon needs at least 3 vertices, got {n}"
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(HnaError::InvalidGeometry("non-finite vertex".into()));
        }
        let scale = vertices.iter().map(|v| v.norm()).fold(1.0_f64, f64::max);
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if (b - a).norm() <= 1e-12 * scale {
                return Err(HnaError::InvalidGeometry(format!(
                    "vertices {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            let cr = (b - a).normalized().cross((c - b).normalized());
            if cr.abs() <= 1e-12 && (b - a).dot(c - b) > 0.0 {
                return Err(HnaError::InvalidGeometry(format!(
                    "vertices {i}, {}, {} are collinear",
                    (i + 1) % n,
                    (i + 2) % n
                )));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_intersect(
                    vertices[i],
                    vertices[(i + 1) % n],
                    vertices[j],
                    vertices[(j + 1) % n],
                ) {
                    return Err(HnaError::InvalidGeometry(format!(
                        "sides {i} and {j} intersect (polygon is not simple)"
                    )));
                }
            }
        }
        let mut vertices = vertices;
        if signed_area(&vertices) < 0.0 {
            // Reverse while keeping vertex 0 first.
            vertices[1..].reverse();
        }

        // Exterior angle at vertex i: pi plus the signed turning angle.
        let ext: Vec<f64> = (0..n)
            .map(|i| {
                let prev = vertices[(i + n - 1) % n];
                let cur = vertices[i];
                let next = vertices[(i + 1) % n];
                let din = (cur - prev).normalized();
                let dout = (next - cur).normalized();
                let turn = din.cross(dout).atan2(din.dot(dout));
                PI + turn
            })
            .collect();

        let mut sides = Vec::with_capacity(n);
        let mut offset = 0.0;
        for i in 0..n {
            let start = vertices[i];
            let end = vertices[(i + 1) % n];
            let length = (end - start).norm();
            let tangent = (end - start).normalized();
            let angles = (ext[i], ext[(i + 1) % n]);
            let kind = if angles.0 > PI + ANGLE_TOL && angles.1 > PI + ANGLE_TOL {
                SideKind::Convex
            } else if is_right_angle(angles.0) ^ is_right_angle(angles.1)
                && (is_right_angle(angles.0) || angles.0 > PI + ANGLE_TOL)
                && (is_right_angle(angles.1) || angles.1 > PI + ANGLE_TOL)
            {
                SideKind::Nonconvex
            } else {
                SideKind::Irregular
            };
            let exponent = |w: f64| {
                if w > PI + ANGLE_TOL && w < 2.0 * PI {
                    Some(1.0 - PI / w)
                } else {
                    None
                }
            };
            let origin_at_end = kind == SideKind::Nonconvex && is_right_angle(angles.1);
            sides.push(SideDescriptor {
                index: i,
                start,
                end,
                length,
                kind,
                exterior_angles: angles,
                unit_normal: tangent.right_normal(),
                unit_tangent: tangent,
                partner_index: None,
                singularity_exponents: (exponent(angles.0), exponent(angles.1)),
                arc_offset: offset,
                origin_at_end,
            });
            offset += length;
        }
        for i in 0..n {
            if sides[i].kind != SideKind::Nonconvex {
                continue;
            }
            let partner = if sides[i].origin_at_end { (i + 1) % n } else { (i + n - 1) % n };
            if sides[partner].kind == SideKind::Nonconvex {
                sides[i].partner_index = Some(partner);
            }
        }
        Ok(PolygonModel {
            vertices,
            sides,
            perimeter: offset,
            star_center: None,
        })
    }

    /// Attaches a star centre, checking `(x - c) . n > 0` on every side.
    pub fn with_star_center(mut self, c: Vec2) -> Result<Self> {
        let m = self.min_support(c);
        if !(m > 0.0) {
            return Err(HnaError::Config(format!(
                "polygon is not star-like about {c}: min (x - c).n = {m}"
            )));
        }
        self.star_center = Some(c);
        Ok(self)
    }

    /// `min over the boundary of (x - c) . n`. Constant along each side.
    pub fn min_support(&self, c: Vec2) -> f64 {
        self.sides
            .iter()
            .map(|s| (s.start - c).dot(s.unit_normal))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn count_kind(&self, kind: SideKind) -> usize {
        self.sides.iter().filter(|s| s.kind == kind).count()
    }

    /// `1 - pi/omega_min` over corners with exterior angle above pi.
    pub fn delta_star(&self) -> Option<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.sides[i].exterior_angles.0)
            .filter(|&w| w > PI + ANGLE_TOL)
            .fold(None, |acc: Option<f64>, w| Some(acc.map_or(w, |a| a.min(w))))
            .map(|w| 1.0 - PI / w)
    }

    pub fn vertex_centroid(&self) -> Vec2 {
        let n = self.vertices.len() as f64;
        let sum = self.vertices.iter().fold(Vec2::default(), |a, &v| a + v);
        sum * (1.0 / n)
    }

    /// Side index and local parameter for a boundary arc length measured from vertex 0.
    pub fn locate_arc(&self, arc: f64) -> Result<(usize, f64)> {
        let tol = 1e-12 * self.perimeter;
        if !(arc >= -tol && arc <= self.perimeter + tol) {
            return Err(HnaError::Domain(format!(
                "arc length {arc} outside [0, {}]",
                self.perimeter
            )));
        }
        let arc = arc.clamp(0.0, self.perimeter);
        for side in &self.sides {
            if arc <= side.arc_offset + side.length || side.index + 1 == self.sides.len() {
                let along = (arc - side.arc_offset).clamp(0.0, side.length);
                let s = if side.origin_at_end { side.length - along } else { along };
                return Ok((side.index, s));
            }
        }
        unreachable!()
    }
}

/// The quadrilateral used throughout the numerical experiments: nonconvex sides of
/// length 2 pi, convex sides of length 4 pi, perimeter 12 pi.
pub fn make_test_polygon() -> PolygonModel {
    let r7 = 7.0_f64.sqrt();
    PolygonModel::new(vec![
        Vec2::new(0.0, 0.0),
        Vec2::new(0.0, -2.0 * PI),
        Vec2::new(-2.0 * PI, -2.0 * PI),
        Vec2::new((r7 - 1.0) * PI, -(1.0 + r7) * PI),
    ])
    .expect("test polygon is valid")
}

/// Square `[-1, 1]^2`.
pub fn make_square() -> PolygonModel {
    PolygonModel::new(vec![
        Vec2::new(-1.0, -1.0),
        Vec2::new(1.0, -1.0),
        Vec2::new(1.0, 1.0),
        Vec2::new(-1.0, 1.0),
    ])
    .expect("square is valid")
}

/// Equilateral triangle of unit side centred on the origin.
pub fn make_triangle() -> PolygonModel {
    let h = 3.0_f64.sqrt() / 2.0;
    PolygonModel::new(vec![
        Vec2::new(-0.5, -h / 3.0),
        Vec2::new(0.5, -h / 3.0),
        Vec2::new(0.0, 2.0 * h / 3.0),
    ])
    .expect("triangle is valid")
}

/// Parses "x y" vertex lines; `#` starts a comment.
pub fn parse_polygon(text: &str) -> Result<PolygonModel> {
    let mut vertices = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<&str> = line.split_whitespace().collect();
        if nums.len() != 2 {
            return Err(HnaError::Parse(format!(
                "line {}: expected two numbers, got {:?}",
                lineno + 1,
                line
            )));
        }
        let parse = |t: &str| {
            t.parse::<f64>()
                .map_err(|e| HnaError::Parse(format!("line {}: {e}", lineno + 1)))
        };
        vertices.push(Vec2::new(parse(nums[0])?, parse(nums[1])?));
    }
    PolygonModel::new(vertices)
}

pub fn load_polygon(path: &Path) -> Result<PolygonModel> {
    parse_polygon(&std::fs::read_to_string(path)?)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CornerDiagnostic {
    pub vertex: usize,
    pub exterior_angle: f64,
    pub detail: String,
}

/// Outcome of the class-C membership test.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ClassCReport {
    pub pass: bool,
    pub side_kinds: Vec<SideKind>,
    pub orthogonality_failures: Vec<CornerDiagnostic>,
    pub visibility_failures: Vec<CornerDiagnostic>,
}

/// Checks orthogonality (every exterior angle above pi or equal to pi/2) and
/// visibility (each right-angle corner sees the whole polygon inside the two
/// half-strips bounded by its sides' extensions).
pub fn validate_class_c(poly: &PolygonModel) -> ClassCReport {
    let n = poly.vertices.len();
    let mut ortho = Vec::new();
    let mut vis = Vec::new();
    for i in 0..n {
        let w = poly.sides[i].exterior_angles.0;
        if !(w > PI + ANGLE_TOL || is_right_angle(w)) {
            ortho.push(CornerDiagnostic {
                vertex: i,
                exterior_angle: w,
                detail: "exterior angle is neither greater than pi nor equal to pi/2".into(),
            });
        }
    }
    for side in &poly.sides {
        if side.kind == SideKind::Irregular && ortho.is_empty() {
            vis.push(CornerDiagnostic {
                vertex: side.index,
                exterior_angle: side.exterior_angles.0,
                detail: "side has right angles at both ends".into(),
            });
        }
    }
    for side in &poly.sides {
        // One check per right-angle corner: take the side whose parameter origin is the corner
        // and which enters it in polygon order.
        if side.kind != SideKind::Nonconvex || side.origin_at_end {
            continue;
        }
        let Ok(frame) = local_frame(poly, side.index) else {
            continue;
        };
        let tol = 1e-9 * poly.perimeter;
        let corner = if side.origin_at_end { (side.index + 1) % n } else { side.index };
        for (vi, &v) in poly.vertices.iter().enumerate() {
            let p = frame.to_local(v);
            let in_strips = p.x >= -frame.l_nc - tol && p.y <= tol;
            let in_notch = p.x < -tol && p.y > -frame.l_nc_prime + tol;
            if !in_strips || in_notch {
                vis.push(CornerDiagnostic {
                    vertex: corner,
                    exterior_angle: FRAC_PI_2,
                    detail: format!("vertex {vi} lies outside the visibility region"),
                });
            }
        }
    }
    ClassCReport {
        pass: ortho.is_empty() && vis.is_empty(),
        side_kinds: poly.sides.iter().map(|s| s.kind).collect(),
        orthogonality_failures: ortho,
        visibility_failures: vis,
    }
}

/// Rigid map to the knife-edge frame of a nonconvex side: origin at the far end `R`
/// of the partner side, partner along the negative `x2` axis, the side itself on
/// `x2 = -l_nc_prime` with its far end at `x1 = -l_nc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub side_index: usize,
    pub partner_index: usize,
    /// Corner `R` (local origin), in global coordinates.
    pub r: Vec2,
    /// Unit vector from the right-angle corner towards the side's far end.
    pub e_side: Vec2,
    /// Unit vector from `R` towards the right-angle corner.
    pub e_partner: Vec2,
    pub l_nc: f64,
    pub l_nc_prime: f64,
}

impl LocalFrame {
    pub fn to_local(&self, x: Vec2) -> Vec2 {
        let d = x - self.r;
        Vec2::new(-d.dot(self.e_side), -d.dot(self.e_partner))
    }

    pub fn dir_to_local(&self, v: Vec2) -> Vec2 {
        Vec2::new(-v.dot(self.e_side), -v.dot(self.e_partner))
    }

    /// Inverse map back to global coordinates.
    pub fn to_global(&self, p: Vec2) -> Vec2 {
        self.r - self.e_side * p.x - self.e_partner * p.y
    }

    /// True when the map includes a reflection (determinant -1).
    pub fn is_reflection(&self) -> bool {
        // Columns of the linear part are (-e_side, -e_partner) as rows; det = e_side x e_partner.
        self.e_side.cross(self.e_partner) < 0.0
    }

    /// Incidence angle in the local frame, in `[0, 2 pi)`.
    pub fn local_alpha(&self, wave: &IncidentWave) -> f64 {
        let d = self.dir_to_local(wave.d);
        let a = (-d.x).atan2(d.y);
        a.rem_euclid(2.0 * PI)
    }
}

/// Local frame of nonconvex side `side_index`.
pub fn local_frame(poly: &PolygonModel, side_index: usize) -> Result<LocalFrame> {
    let side = poly
        .sides
        .get(side_index)
        .ok_or_else(|| HnaError::Domain(format!("no side {side_index}")))?;
    if side.kind != SideKind::Nonconvex {
        return Err(HnaError::Classification {
            side: side_index,
            detail: format!("local frame needs a nonconvex side, found {}", side.kind),
        });
    }
    let partner_index = side.partner_index.ok_or_else(|| HnaError::Classification {
        side: side_index,
        detail: "nonconvex side has no nonconvex partner".into(),
    })?;
    let partner = &poly.sides[partner_index];
    let q = side.origin();
    let r = partner.far_end();
    Ok(LocalFrame {
        side_index,
        partner_index,
        r,
        e_side: side.param_tangent(),
        e_partner: (q - r).normalized(),
        l_nc: side.length,
        l_nc_prime: partner.length,
    })
}

/// Plane wave `exp(i k x . d)` with `d = (-sin alpha, cos alpha)`; `alpha` is the
/// direction the wave arrives from, anticlockwise from the downward vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave {
    pub k: f64,
    pub alpha: f64,
    pub d: Vec2,
}

impl IncidentWave {
    pub fn new(k: f64, alpha: f64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(HnaError::Domain(format!("wavenumber must be positive, got {k}")));
        }
        if !alpha.is_finite() {
            return Err(HnaError::Domain("incidence angle must be finite".into()));
        }
        let alpha = alpha.rem_euclid(2.0 * PI);
        Ok(IncidentWave {
            k,
            alpha,
            d: Vec2::new(-alpha.sin(), alpha.cos()),
        })
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }

    #[inline]
    pub fn value(&self, x: Vec2) -> Complex64 {
        Complex64::from_polar(1.0, self.k * x.dot(self.d))
    }

    /// `grad u^i . v` at `x`.
    #[inline]
    pub fn directional_derivative(&self, x: Vec2, v: Vec2) -> Complex64 {
        Complex64::new(0.0, self.k * self.d.dot(v)) * self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn test_polygon_sides_and_angles() {
        let p = make_test_polygon();
        let lens: Vec<f64> = p.sides.iter().map(|s| s.length).collect();
        let want = [2.0 * PI, 2.0 * PI, 4.0 * PI, 4.0 * PI];
        for (l, w) in lens.iter().zip(want) {
            assert!(close(*l, w, 1e-12), "{l} vs {w}");
        }
        assert!(close(p.perimeter, 12.0 * PI, 1e-12));
        let kinds: Vec<SideKind> = p.sides.iter().map(|s| s.kind).collect();
        use SideKind::*;
        assert_eq!(kinds, vec![Nonconvex, Nonconvex, Convex, Convex]);
        assert!(close(p.sides[1].exterior_angles.0, FRAC_PI_2, 1e-15));
        assert!(close(p.delta_star().unwrap(), 0.4350, 1e-4));
        assert_eq!(p.sides[0].partner_index, Some(1));
        assert_eq!(p.sides[1].partner_index, Some(0));
    }

    #[test]
    fn normals_point_outward() {
        let p = make_test_polygon();
        assert!(close(p.sides[0].unit_normal.x, -1.0, 1e-15));
        assert!(close(p.sides[1].unit_normal.y, 1.0, 1e-15));
        for s in &p.sides {
            assert!(s.unit_normal.dot(s.unit_tangent).abs() < 1e-15);
            // A point just outside along the normal is not inside the polygon.
            let mid = s.point_at(0.5 * s.length) + s.unit_normal * 1e-6;
            assert!(!point_in_polygon(&p.vertices, mid));
        }
    }

    fn point_in_polygon(v: &[Vec2], p: Vec2) -> bool {
        let n = v.len();
        let mut inside = false;
        for i in 0..n {
            let a = v[i];
            let b = v[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    #[test]
    fn class_c_examples() {
        assert!(validate_class_c(&make_test_polygon()).pass);
        let sq = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        let rep = validate_class_c(&sq);
        assert!(rep.pass);
        assert_eq!(sq.count_kind(SideKind::Nonconvex), 0);
        // Square with a V-shaped notch whose exterior angle is pi/3.
        let a = 2.0 * (PI / 6.0).tan();
        let notched = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(4.0, 4.0),
            Vec2::new(2.0 + a, 4.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0 - a, 4.0),
            Vec2::new(0.0, 4.0),
        ])
        .unwrap();
        let rep = validate_class_c(&notched);
        assert!(!rep.pass);
        assert_eq!(rep.orthogonality_failures.len(), 1);
        assert_eq!(rep.orthogonality_failures[0].vertex, 4);
        assert!(close(rep.orthogonality_failures[0].exterior_angle, PI / 3.0, 1e-9));
    }

    #[test]
    fn non_simple_polygon_is_rejected() {
        let bowtie = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert!(matches!(bowtie, Err(HnaError::InvalidGeometry(_))));
    }

    #[test]
    fn visibility() {
        // A plain L-shape lies inside the half-strips of its notch.
        let l = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(3.0, 0.0),
            Vec2::new(3.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 3.0),
            Vec2::new(0.0, 3.0),
        ])
        .unwrap();
        assert!(validate_class_c(&l).pass);
        // Pulling one vertex past the extension of a nonconvex side breaks visibility.
        let bad = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(5.0, 0.0),
            Vec2::new(3.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 3.0),
            Vec2::new(0.0, 3.0),
        ])
        .unwrap();
        let rep = validate_class_c(&bad);
        assert!(rep.orthogonality_failures.is_empty());
        assert!(!rep.pass);
        assert!(rep.visibility_failures.iter().all(|c| c.vertex == 3));
    }

    #[test]
    fn arc_param_endpoints() {
        let p = make_test_polygon();
        for s in &p.sides {
            assert_eq!(s.arc_param(0.0).unwrap(), s.origin());
            let e = s.arc_param(s.length).unwrap();
            assert!((e - s.far_end()).norm() < 1e-14);
            let m = s.arc_param(0.5 * s.length).unwrap();
            let mean = (s.start + s.end) * 0.5;
            assert!((m - mean).norm() < 1e-14);
            assert!(s.arc_param(s.length * 1.01).is_err());
            assert!(s.arc_param(-0.1).is_err());
        }
        // Nonconvex sides start at the right-angle corner.
        assert_eq!(p.sides[0].origin(), p.vertices[1]);
        assert_eq!(p.sides[1].origin(), p.vertices[1]);
    }

    #[test]
    fn local_frames_of_test_polygon() {
        let p = make_test_polygon();
        let horiz = local_frame(&p, 1).unwrap();
        let w = IncidentWave::new(1.0, 5.0 * PI / 4.0).unwrap();
        assert!(!horiz.is_reflection());
        assert!(close(horiz.local_alpha(&w), 5.0 * PI / 4.0, 1e-12));
        let x = Vec2::new(-1.3, -0.4);
        assert!((horiz.to_local(x) - x).norm() < 1e-15);

        let vert = local_frame(&p, 0).unwrap();
        assert!(vert.is_reflection());
        let w2 = IncidentWave::new(1.0, 5.0 * PI / 3.0).unwrap();
        assert!(close(vert.local_alpha(&w2), 5.0 * PI / 6.0, 1e-12));
        assert!(close(vert.local_alpha(&w), 5.0 * PI / 4.0, 1e-12));
        // Side maps onto x2 = -L' with far end at x1 = -L.
        let q = vert.to_local(p.sides[0].origin());
        let far = vert.to_local(p.sides[0].far_end());
        assert!((q - Vec2::new(0.0, -2.0 * PI)).norm() < 1e-12);
        assert!((far - Vec2::new(-2.0 * PI, -2.0 * PI)).norm() < 1e-12);
        assert!(local_frame(&p, 2).is_err());
    }

    #[test]
    fn incident_direction_convention() {
        let w = IncidentWave::new(2.0, 5.0 * PI / 4.0).unwrap();
        let h = 2.0_f64.sqrt() / 2.0;
        assert!((w.d - Vec2::new(h, -h)).norm() < 1e-15);
        assert!(close(w.d.norm(), 1.0, 1e-15));
        assert!(close(w.wavelength(), PI, 1e-15));
        assert!(IncidentWave::new(0.0, 1.0).is_err());
    }

    #[test]
    fn polygon_file_parsing() {
        let text = "# square\n0 0\n1 0 # corner\n\n1 1\n0 1\n";
        let p = parse_polygon(text).unwrap();
        assert_eq!(p.vertices.len(), 4);
        assert!(parse_polygon("0 0\n1\n").is_err());
        assert!(parse_polygon("0 0\n1 x\n2 2\n").is_err());
    }

    #[test]
    fn locate_arc_round_trip() {
        let p = make_test_polygon();
        for &arc in &[0.0, 1.0, 2.0 * PI + 0.3, 7.0 * PI, 12.0 * PI - 1e-9] {
            let (i, s) = p.locate_arc(arc).unwrap();
            assert!(close(p.sides[i].global_arc(s), arc, 1e-12));
        }
    }

    #[test]
    fn star_center_check() {
        assert!(make_square().with_star_center(Vec2::default()).is_ok());
        assert!(make_square().with_star_center(Vec2::new(3.0, 0.0)).is_err());
    }

    #[test]
    fn orientation_is_normalised() {
        let cw = PolygonModel::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!(signed_area(&cw.vertices) > 0.0);
    }
}
