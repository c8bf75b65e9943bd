//! Exact integrals over simple polygons.

pub fn signed_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        s += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * s
}

pub fn centroid(pts: &[[f64; 2]]) -> [f64; 2] {
    let n = pts.len();
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let cross = a[0] * b[1] - b[0] * a[1];
        a2 += cross;
        cx += (a[0] + b[0]) * cross;
        cy += (a[1] + b[1]) * cross;
    }
    [cx / (3.0 * a2), cy / (3.0 * a2)]
}

/// Integrals of `1, X, Y, X^2, XY, Y^2` over the polygon, with `X = x - origin.x`.
///
/// Fan triangulation from the first vertex; each triangle is integrated with
/// the edge-midpoint rule, which is exact for quadratics.
pub fn moments(pts: &[[f64; 2]], origin: [f64; 2]) -> [f64; 6] {
    let mut m = [0.0; 6];
    let p0 = [pts[0][0] - origin[0], pts[0][1] - origin[1]];
    for i in 1..pts.len() - 1 {
        let p1 = [pts[i][0] - origin[0], pts[i][1] - origin[1]];
        let p2 = [pts[i + 1][0] - origin[0], pts[i + 1][1] - origin[1]];
        let area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
        let mids = [
            [0.5 * (p0[0] + p1[0]), 0.5 * (p0[1] + p1[1])],
            [0.5 * (p1[0] + p2[0]), 0.5 * (p1[1] + p2[1])],
            [0.5 * (p2[0] + p0[0]), 0.5 * (p2[1] + p0[1])],
        ];
        let w = area / 3.0;
        for q in mids {
            m[0] += w;
            m[1] += w * q[0];
            m[2] += w * q[1];
            m[3] += w * q[0] * q[0];
            m[4] += w * q[0] * q[1];
            m[5] += w * q[1] * q[1];
        }
    }
    m
}

/// Point-in-polygon test, inclusive of the boundary up to round-off.
pub fn contains(pts: &[[f64; 2]], p: [f64; 2]) -> bool {
    let n = pts.len();
    let mut inside = false;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let len2 = (b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2);
        let on_line = cross.abs() <= 1e-12 * len2.max(1e-300);
        let within = (p[0] - a[0]) * (p[0] - b[0]) <= 1e-14 && (p[1] - a[1]) * (p[1] - b[1]) <= 1e-14;
        if on_line && within {
            return true;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Mirror a point across the line through `a` with unit normal `n`.
pub fn reflect(p: [f64; 2], a: [f64; 2], n: [f64; 2]) -> [f64; 2] {
    let d = (p[0] - a[0]) * n[0] + (p[1] - a[1]) * n[1];
    [p[0] - 2.0 * d * n[0], p[1] - 2.0 * d * n[1]]
}
