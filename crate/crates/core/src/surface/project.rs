//! Nearest-point projection onto reference surfaces.

use std::f64::consts::TAU;

use super::{ReferenceSurface, Shape};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Nearest surface point, world space.
    pub point: Vec3,
    pub distance: f64,
    pub u: f64,
    pub v: f64,
}

fn azimuth(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        0.0
    } else {
        y.atan2(x).rem_euclid(TAU)
    }
}

impl ReferenceSurface {
    /// Global nearest point on the bounded surface. Open shapes clamp to their
    /// boundary; the saddle uses a seeded bounded Newton search, every other
    /// shape a closed-form projection.
    pub fn project_to_surface(&self, point: Vec3) -> Projection {
        let q = self.placement.to_local(point);
        let (u, v) = match self.shape {
            Shape::Square { side } => {
                let h = side / 2.0;
                (q.x.clamp(-h, h), q.y.clamp(-h, h))
            }
            Shape::Circle { radius } => {
                let n = (q.x * q.x + q.y * q.y).sqrt();
                if n > radius {
                    (q.x * radius / n, q.y * radius / n)
                } else {
                    (q.x, q.y)
                }
            }
            Shape::Triangle { .. } => self.project_triangle(q),
            Shape::Cylinder { height, .. } => (azimuth(q.x, q.y), q.z.clamp(-height / 2.0, height / 2.0)),
            Shape::Cone { radius: r, height: h } => {
                // Closest point on the generator segment (r, 0) → (0, h) in the (ρ, z) half-plane.
                let rho = (q.x * q.x + q.y * q.y).sqrt();
                let t = (-(rho - r) * r + q.z * h) / (r * r + h * h);
                (azimuth(q.x, q.y), t.clamp(0.0, 1.0))
            }
            Shape::Sphere { .. } => {
                let n = q.norm();
                let v = if n == 0.0 { 0.0 } else { (q.z / n).clamp(-1.0, 1.0).acos() };
                (azimuth(q.x, q.y), v)
            }
            Shape::Hemisphere { .. } => {
                let n = q.norm();
                let v = if n == 0.0 {
                    0.0
                } else if q.z >= 0.0 {
                    (q.z / n).clamp(-1.0, 1.0).acos()
                } else {
                    std::f64::consts::FRAC_PI_2
                };
                (azimuth(q.x, q.y), v)
            }
            Shape::Ellipsoid { a, b, c } => {
                let x = closest_on_ellipsoid([a, b, c], [q.x, q.y, q.z]);
                let v = (x[2] / c).clamp(-1.0, 1.0).acos();
                (azimuth(x[0] / a, x[1] / b), v)
            }
            Shape::Torus { major, .. } => {
                let rho = (q.x * q.x + q.y * q.y).sqrt();
                let u = azimuth(q.x, q.y);
                let v = if rho == major && q.z == 0.0 { 0.0 } else { q.z.atan2(rho - major).rem_euclid(TAU) };
                (u, v)
            }
            Shape::Saddle { .. } => self.project_numeric(q),
        };
        let (u, v) = self.domain().clamp(u, v);
        let local = self.local_jet(u, v).p;
        let world = self.placement.to_world(local);
        Projection { point: world, distance: (local - q).norm(), u, v }
    }

    fn project_triangle(&self, q: Vec3) -> (f64, f64) {
        let j = self.local_jet(0.0, 0.0);
        let (a, ab, ac) = (j.p, j.su, j.sv);
        let p = Vec3::new(q.x, q.y, 0.0);
        // Region tests on the triangle (a, b, c), reporting barycentric (u, v).
        let ap = p - a;
        let (d1, d2) = (ab.dot(ap), ac.dot(ap));
        if d1 <= 0.0 && d2 <= 0.0 {
            return (0.0, 0.0);
        }
        let bp = p - (a + ab);
        let (d3, d4) = (ab.dot(bp), ac.dot(bp));
        if d3 >= 0.0 && d4 <= d3 {
            return (1.0, 0.0);
        }
        let vc = d1 * d4 - d3 * d2;
        if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            return (d1 / (d1 - d3), 0.0);
        }
        let cp = p - (a + ac);
        let (d5, d6) = (ab.dot(cp), ac.dot(cp));
        if d6 >= 0.0 && d5 <= d6 {
            return (0.0, 1.0);
        }
        let vb = d5 * d2 - d1 * d6;
        if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            return (0.0, d2 / (d2 - d6));
        }
        let va = d3 * d6 - d5 * d4;
        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            return (1.0 - w, w);
        }
        let denom = 1.0 / (va + vb + vc);
        (vb * denom, vc * denom)
    }

    /// Coarse parameter grid seeding followed by bounded Newton refinement of
    /// `½|S(u, v) − q|²` from the best few seeds.
    fn project_numeric(&self, q: Vec3) -> (f64, f64) {
        let d = self.domain();
        let n = 48;
        let mut seeds: Vec<(f64, f64, f64)> = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for k in 0..=n {
                let u = d.u.0 + (d.u.1 - d.u.0) * i as f64 / n as f64;
                let v = d.v.0 + (d.v.1 - d.v.0) * k as f64 / n as f64;
                if d.contains(u, v) {
                    seeds.push(((self.local_jet(u, v).p - q).norm_squared(), u, v));
                }
            }
        }
        seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for &(_, u0, v0) in seeds.iter().take(4) {
            let (u, v) = self.newton_refine(q, u0, v0);
            let dist = (self.local_jet(u, v).p - q).norm_squared();
            if dist < best.0 {
                best = (dist, u, v);
            }
        }
        (best.1, best.2)
    }

    fn newton_refine(&self, q: Vec3, mut u: f64, mut v: f64) -> (f64, f64) {
        let d = self.domain();
        let f = |u: f64, v: f64| 0.5 * (self.local_jet(u, v).p - q).norm_squared();
        for _ in 0..60 {
            let j = self.local_jet(u, v);
            let r = j.p - q;
            let g = [r.dot(j.su), r.dot(j.sv)];
            let h = [
                [j.su.dot(j.su) + r.dot(j.suu), j.su.dot(j.sv) + r.dot(j.suv)],
                [j.su.dot(j.sv) + r.dot(j.suv), j.sv.dot(j.sv) + r.dot(j.svv)],
            ];
            // Coordinates pinned at a bound with the gradient pushing outward stay fixed.
            let at_lo = |x: f64, lo: f64, gi: f64| x <= lo && gi > 0.0;
            let at_hi = |x: f64, hi: f64, gi: f64| x >= hi && gi < 0.0;
            let fix_u = !d.u_periodic && (at_lo(u, d.u.0, g[0]) || at_hi(u, d.u.1, g[0]));
            let fix_v = !d.v_periodic && (at_lo(v, d.v.0, g[1]) || at_hi(v, d.v.1, g[1]));
            let step = |h: [[f64; 2]; 2]| -> (f64, f64) {
                match (fix_u, fix_v) {
                    (true, true) => (0.0, 0.0),
                    (true, false) => (0.0, -g[1] / h[1][1]),
                    (false, true) => (-g[0] / h[0][0], 0.0),
                    (false, false) => {
                        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
                        ((-h[1][1] * g[0] + h[0][1] * g[1]) / det, (h[1][0] * g[0] - h[0][0] * g[1]) / det)
                    }
                }
            };
            // Levenberg damping until the Hessian is positive definite.
            let mut lambda = 0.0;
            let mut du_dv;
            loop {
                let hd = [[h[0][0] + lambda, h[0][1]], [h[1][0], h[1][1] + lambda]];
                let pd = hd[0][0] > 0.0 && hd[0][0] * hd[1][1] - hd[0][1] * hd[1][0] > 0.0;
                du_dv = step(hd);
                if pd && du_dv.0.is_finite() && du_dv.1.is_finite() {
                    break;
                }
                lambda = if lambda == 0.0 { 1e-6 + h[0][0].abs().max(h[1][1].abs()) } else { lambda * 4.0 };
                if lambda > 1e12 {
                    return (u, v);
                }
            }
            let f0 = f(u, v);
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-6 {
                let (nu, nv) = d.clamp(u + t * du_dv.0, v + t * du_dv.1);
                if f(nu, nv) <= f0 {
                    moved = (nu - u).abs() + (nv - v).abs() > 0.0;
                    u = nu;
                    v = nv;
                    break;
                }
                t *= 0.5;
            }
            if !moved || (du_dv.0.abs() + du_dv.1.abs()) * t < 1e-15 {
                break;
            }
        }
        (u, v)
    }
}

/// Closest point on the ellipsoid with semi-axes `e` to `y` (local frame),
/// by the robust one-dimensional root-finding formulation.
pub(crate) fn closest_on_ellipsoid(e: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    // Sort axes descending and reflect into the first octant.
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &k| e[k].total_cmp(&e[i]));
    let es = [e[idx[0]], e[idx[1]], e[idx[2]]];
    let ys = [y[idx[0]].abs(), y[idx[1]].abs(), y[idx[2]].abs()];
    let xs = ellipsoid_first_octant(es, ys);
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[idx[k]] = xs[k].copysign(y[idx[k]]);
    }
    out
}

fn bisect(mut s0: f64, mut s1: f64, g: impl Fn(f64) -> f64) -> f64 {
    let mut s = s0;
    for _ in 0..1100 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let v = g(s);
        if v > 0.0 {
            s0 = s;
        } else if v < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn ellipse_first_quadrant(e: [f64; 2], y: [f64; 2]) -> [f64; 2] {
    if y[1] > 0.0 {
        if y[0] > 0.0 {
            let z = [y[0] / e[0], y[1] / e[1]];
            let g = z[0] * z[0] + z[1] * z[1] - 1.0;
            if g != 0.0 {
                let r0 = (e[0] / e[1]).powi(2);
                let n0 = r0 * z[0];
                let s0 = z[1] - 1.0;
                let s1 = if g < 0.0 { 0.0 } else { n0.hypot(z[1]) - 1.0 };
                let s = bisect(s0, s1, |s| (n0 / (s + r0)).powi(2) + (z[1] / (s + 1.0)).powi(2) - 1.0);
                [r0 * y[0] / (s + r0), y[1] / (s + 1.0)]
            } else {
                y
            }
        } else {
            [0.0, e[1]]
        }
    } else {
        let numer0 = e[0] * y[0];
        let denom0 = e[0] * e[0] - e[1] * e[1];
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            [e[0] * xde0, e[1] * (1.0 - xde0 * xde0).max(0.0).sqrt()]
        } else {
            [e[0], 0.0]
        }
    }
}

fn ellipsoid_first_octant(e: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                let z = [y[0] / e[0], y[1] / e[1], y[2] / e[2]];
                let g = z[0] * z[0] + z[1] * z[1] + z[2] * z[2] - 1.0;
                if g != 0.0 {
                    let r0 = (e[0] / e[2]).powi(2);
                    let r1 = (e[1] / e[2]).powi(2);
                    let (n0, n1) = (r0 * z[0], r1 * z[1]);
                    let s0 = z[2] - 1.0;
                    let s1 = if g < 0.0 { 0.0 } else { (n0 * n0 + n1 * n1 + z[2] * z[2]).sqrt() - 1.0 };
                    let s = bisect(s0, s1, |s| {
                        (n0 / (s + r0)).powi(2) + (n1 / (s + r1)).powi(2) + (z[2] / (s + 1.0)).powi(2) - 1.0
                    });
                    [r0 * y[0] / (s + r0), r1 * y[1] / (s + r1), y[2] / (s + 1.0)]
                } else {
                    y
                }
            } else {
                let x = ellipse_first_quadrant([e[1], e[2]], [y[1], y[2]]);
                [0.0, x[0], x[1]]
            }
        } else if y[0] > 0.0 {
            let x = ellipse_first_quadrant([e[0], e[2]], [y[0], y[2]]);
            [x[0], 0.0, x[1]]
        } else {
            [0.0, 0.0, e[2]]
        }
    } else {
        let denom0 = e[0] * e[0] - e[2] * e[2];
        let denom1 = e[1] * e[1] - e[2] * e[2];
        let numer0 = e[0] * y[0];
        let numer1 = e[1] * y[1];
        if numer0 < denom0 && numer1 < denom1 {
            let xde0 = numer0 / denom0;
            let xde1 = numer1 / denom1;
            let discr = 1.0 - xde0 * xde0 - xde1 * xde1;
            if discr > 0.0 {
                return [e[0] * xde0, e[1] * xde1, e[2] * discr.sqrt()];
            }
        }
        let x = ellipse_first_quadrant([e[0], e[1]], [y[0], y[1]]);
        [x[0], x[1], 0.0]
    }
}
