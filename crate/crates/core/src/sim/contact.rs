use std::fmt;

use serde::{Deserialize, Serialize};

use super::gripper::{FingerSurface, Side};
use super::object::{closest_on_segment, cross, perp, RigidObject2D, Vec2};
use crate::fold_geometry::FaceLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    PointPivot,
    LinePlanar,
}

impl ContactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ContactKind::PointPivot => "point_pivot",
            ContactKind::LinePlanar => "line_planar",
        }
    }
}

impl fmt::Display for ContactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contact {
    pub finger: Side,
    pub kind: ContactKind,
    /// One point for a pivot contact, the two endpoints for a planar one.
    pub points: Vec<Vec2>,
    /// Signed gap at each point (mm); negative is penetration.
    pub gaps: Vec<f64>,
    /// Unit normal pointing into the object.
    pub normal: Vec2,
    pub mu: f64,
    /// Finger face touched.
    pub face: FaceLabel,
    /// True when the finger touches below its topmost faces.
    pub snag: bool,
}

impl Contact {
    pub fn gap(&self) -> f64 {
        self.gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn penetration(&self) -> f64 {
        (-self.gap()).max(0.0)
    }

    pub fn tangent(&self) -> Vec2 {
        perp(&self.normal)
    }

    /// Where the tangential force of the contact acts.
    pub fn center(&self) -> Vec2 {
        self.points.iter().sum::<Vec2>() / self.points.len() as f64
    }
}

/// Contacts reported per finger at most.
pub const MAX_CONTACTS_PER_FINGER: usize = 2;

#[derive(Debug, Clone)]
struct Candidate {
    point: Vec2,
    gap: f64,
    normal: Vec2,
    /// Object edges this candidate lies on and that are parallel to the
    /// touched finger face.
    edges: Vec<usize>,
    face: FaceLabel,
    snag: bool,
}

/// All finger-object contacts closer than `margin`.
pub fn detect_contacts(
    surfaces: &[FingerSurface; 2],
    object: &RigidObject2D,
    margin: f64,
    align_tol: f64,
) -> Vec<Contact> {
    let mut out = Vec::new();
    for fs in surfaces {
        let cands = if object.is_circle() {
            circle_candidates(fs, object, margin)
        } else {
            polygon_candidates(fs, object, margin, align_tol)
        };
        let mut contacts = group(fs, cands, align_tol);
        contacts.sort_by(|a, b| a.gap().total_cmp(&b.gap()));
        contacts.truncate(MAX_CONTACTS_PER_FINGER);
        out.extend(contacts);
    }
    out
}

fn top_tol(fs: &FingerSurface) -> f64 {
    1e-6 * (1.0 + fs.profile.height)
}

fn segment_normal(a: &Vec2, b: &Vec2) -> Vec2 {
    // The material lies to the right of the polyline direction.
    perp(&(b - a)).normalize()
}

/// Closest point on the profile to `q` (local frame): point, distance,
/// outward normal and index of the segment.
fn nearest_on_profile(fs: &FingerSurface, q: &Vec2) -> (Vec2, f64, Vec2, usize) {
    let pts = &fs.profile.points;
    let mut best = (pts[0], f64::INFINITY, Vec2::new(0.0, 1.0), 0usize);
    for (i, w) in pts.windows(2).enumerate() {
        let (c, s) = closest_on_segment(q, &w[0], &w[1]);
        let d = (q - c).norm();
        if d < best.1 - 1e-12 {
            let n = if s > 0.0 && s < 1.0 || d < 1e-12 {
                segment_normal(&w[0], &w[1])
            } else {
                // Nearest to a corner: the direction from the corner to q.
                let dir = (q - c) / d;
                let inside = fs.height_at(q.x).is_some_and(|h| q.y < h);
                if inside {
                    -dir
                } else {
                    dir
                }
            };
            best = (c, d, n, i);
        }
    }
    best
}

fn polygon_candidates(fs: &FingerSurface, obj: &RigidObject2D, margin: f64, align_tol: f64) -> Vec<Candidate> {
    let verts: Vec<Vec2> = obj.world_vertices();
    let n = verts.len();
    let local: Vec<Vec2> = verts.iter().map(|v| fs.to_local(v)).collect();
    let len = fs.profile.points.last().unwrap().x;
    let cos_tol = align_tol.cos();
    let edge_inward = |e: usize| -> Vec2 {
        let d = verts[(e + 1) % n] - verts[e];
        perp(&d).normalize()
    };
    let mut out = Vec::new();

    // Object vertices against the profile.
    for (i, q) in local.iter().enumerate() {
        if q.x < 0.0 || q.x > len {
            continue;
        }
        let Some(h) = fs.height_at(q.x) else { continue };
        let (c, d, n_loc, seg) = nearest_on_profile(fs, q);
        let gap = if q.y < h { -d } else { d };
        if gap >= margin {
            continue;
        }
        let normal = fs.to_world(&n_loc) - fs.to_world(&Vec2::zeros());
        let edges = [(i + n - 1) % n, i]
            .into_iter()
            .filter(|&e| edge_inward(e).dot(&normal) >= cos_tol)
            .collect();
        out.push(Candidate {
            point: verts[i],
            gap,
            normal,
            edges,
            face: fs.profile.labels[seg],
            snag: c.y < fs.profile.height - top_tol(fs),
        });
    }

    // Convex profile corners against the object edges.
    let pts = &fs.profile.points;
    for (j, w) in pts.iter().enumerate() {
        let convex = if j == 0 || j + 1 == pts.len() {
            true
        } else {
            cross(&(pts[j] - pts[j - 1]), &(pts[j + 1] - pts[j])) < -1e-12
        };
        if !convex {
            continue;
        }
        let p = fs.to_world(w);
        let sd = obj.signed_distance(&p);
        if sd >= margin {
            continue;
        }
        // Closest object edge.
        let (mut best_e, mut best_d) = (0usize, f64::INFINITY);
        for e in 0..n {
            let (c, _) = closest_on_segment(&p, &verts[e], &verts[(e + 1) % n]);
            let d = (p - c).norm();
            if d < best_d {
                best_d = d;
                best_e = e;
            }
        }
        let inward = edge_inward(best_e);
        // Skip corners that touch the object from the wrong side of the face.
        let face_seg = if j == 0 { 0 } else { j - 1 };
        let fn_loc = segment_normal(&pts[face_seg], &pts[face_seg + 1]);
        let face_n = fs.to_world(&fn_loc) - fs.to_world(&Vec2::zeros());
        if inward.dot(&fs.inward) <= 0.0 {
            continue;
        }
        let parallel = inward.dot(&face_n) >= cos_tol
            || (j + 1 < pts.len() && {
                let n2 = fs.to_world(&segment_normal(&pts[j], &pts[j + 1])) - fs.to_world(&Vec2::zeros());
                inward.dot(&n2) >= cos_tol
            });
        out.push(Candidate {
            point: p,
            gap: sd,
            normal: inward,
            edges: if parallel { vec![best_e] } else { Vec::new() },
            face: fs.profile.labels[face_seg.min(fs.profile.labels.len() - 1)],
            snag: w.y < fs.profile.height - top_tol(fs),
        });
    }
    out
}

fn circle_candidates(fs: &FingerSurface, obj: &RigidObject2D, margin: f64) -> Vec<Candidate> {
    let c = fs.to_local(&obj.pose.position());
    let r = obj.radius();
    let pts = &fs.profile.points;
    let mut raw: Vec<(Vec2, f64, usize)> = Vec::new();
    for (i, w) in pts.windows(2).enumerate() {
        let (q, _) = closest_on_segment(&c, &w[0], &w[1]);
        let d = (c - q).norm();
        if d - r < margin && d > 1e-12 {
            raw.push((q, d, i));
        }
    }
    // Merge feet that coincide (shared corners), keeping the nearest.
    raw.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut kept: Vec<(Vec2, f64, usize)> = Vec::new();
    for cand in raw {
        if kept.iter().all(|k| (k.0 - cand.0).norm() > 1e-6) {
            kept.push(cand);
        }
    }
    kept.into_iter()
        .map(|(q, d, seg)| {
            let n_loc = (c - q) / d;
            let normal = fs.to_world(&n_loc) - fs.to_world(&Vec2::zeros());
            Candidate {
                point: fs.to_world(&q),
                gap: d - r,
                normal,
                edges: Vec::new(),
                face: fs.profile.labels[seg],
                snag: q.y < fs.profile.height - top_tol(fs),
            }
        })
        .collect()
}

/// Merges candidates lying on one object edge parallel to the finger face
/// into a planar contact spanning their extreme points.
fn group(fs: &FingerSurface, cands: Vec<Candidate>, align_tol: f64) -> Vec<Contact> {
    let cos_tol = align_tol.cos();
    let mut used = vec![false; cands.len()];
    let mut out = Vec::new();
    for i in 0..cands.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let mut members = vec![i];
        for &e in &cands[i].edges {
            for j in (i + 1)..cands.len() {
                if !used[j] && cands[j].edges.contains(&e) && cands[i].normal.dot(&cands[j].normal) >= cos_tol {
                    used[j] = true;
                    members.push(j);
                }
            }
        }
        let c0 = &cands[i];
        if members.len() == 1 {
            out.push(Contact {
                finger: fs.side,
                kind: ContactKind::PointPivot,
                points: vec![c0.point],
                gaps: vec![c0.gap],
                normal: c0.normal,
                mu: fs.mu,
                face: c0.face,
                snag: c0.snag,
            });
            continue;
        }
        let normal = members.iter().map(|&m| cands[m].normal).sum::<Vec2>().normalize();
        let t = perp(&normal);
        let lo = members.iter().copied().min_by(|&a, &b| cands[a].point.dot(&t).total_cmp(&cands[b].point.dot(&t))).unwrap();
        let hi = members.iter().copied().max_by(|&a, &b| cands[a].point.dot(&t).total_cmp(&cands[b].point.dot(&t))).unwrap();
        if (cands[hi].point - cands[lo].point).norm() < 1e-6 {
            let d = members.iter().copied().min_by(|&a, &b| cands[a].gap.total_cmp(&cands[b].gap)).unwrap();
            out.push(Contact {
                finger: fs.side,
                kind: ContactKind::PointPivot,
                points: vec![cands[d].point],
                gaps: vec![cands[d].gap],
                normal,
                mu: fs.mu,
                face: cands[d].face,
                snag: cands[d].snag,
            });
            continue;
        }
        out.push(Contact {
            finger: fs.side,
            kind: ContactKind::LinePlanar,
            points: vec![cands[lo].point, cands[hi].point],
            gaps: vec![cands[lo].gap, cands[hi].gap],
            normal,
            mu: fs.mu,
            face: cands[lo].face,
            snag: members.iter().any(|&m| cands[m].snag),
        });
    }
    out
}
