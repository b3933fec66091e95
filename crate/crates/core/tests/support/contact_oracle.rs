//! Brute-force contact oracle shared by the integration tests.
//!
//! A candidate twist fixes every penetration and slip. Normal forces follow
//! from the penalty law, tangential forces from the Coulomb cone given the
//! slip, and the twist is consistent when the contact wrenches balance.
//! Twist space is split into cubes, best-first by the smallest norm a cube
//! could hold. Penetration and slip are linear in the twist, so their range
//! over a cube is exact; a cube is dropped when no forces in those ranges
//! can balance the object.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ovf_core::sim::{solve, ContactMode, Problem, SolverContact, Vec2};

struct Pt {
    p: Vec2,
    n: Vec2,
    pen: f64,
    drive: Vec2,
    mu: f64,
}

const L: f64 = 25.0;

type V3 = [f64; 3];

fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn wnorm(z: V3) -> f64 {
    dot3(z, z).sqrt()
}

/// Penetration after the step and slip, as `(gradient, value at z = 0)`.
fn kinematics(c: &Pt) -> ((V3, f64), (V3, f64)) {
    let t = Vec2::new(-c.n.y, c.n.x);
    let pen = ([-c.n.x, -c.n.y, -(c.p.x * c.n.y - c.p.y * c.n.x) / L], c.pen + c.drive.dot(&c.n));
    let slip = ([t.x, t.y, (c.p.x * t.y - c.p.y * t.x) / L], -c.drive.dot(&t));
    (pen, slip)
}

/// Unit normal and tangential wrenches, moment scaled by `L`.
fn wrenches(c: &Pt) -> (V3, V3) {
    let t = Vec2::new(-c.n.y, c.n.x);
    ([c.n.x, c.n.y, (c.p.x * c.n.y - c.p.y * c.n.x) / L], [t.x, t.y, (c.p.x * t.y - c.p.y * t.x) / L])
}

/// Whether the zonotope `centre + Σ [-1, 1] g_j` contains the origin.
fn zonotope_holds_origin(centre: V3, gens: &[V3]) -> bool {
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut dirs: Vec<V3> = axes.to_vec();
    for (i, &g) in gens.iter().enumerate() {
        dirs.push(g);
        dirs.extend(axes.iter().map(|&e| cross3(e, g)));
        for &h in &gens[i + 1..] {
            let n = cross3(g, h);
            dirs.push(n);
            dirs.extend(gens.iter().map(|&k| cross3(n, k)));
        }
    }
    let scale = wnorm(centre) + gens.iter().map(|&g| wnorm(g)).sum::<f64>();
    dirs.iter().all(|&d| {
        let len = wnorm(d);
        if len < 1e-12 {
            return true;
        }
        let d = [d[0] / len, d[1] / len, d[2] / len];
        dot3(d, centre).abs() <= gens.iter().map(|&g| dot3(d, g).abs()).sum::<f64>() + 1e-12 * (1.0 + scale)
    })
}

/// False when no twist in the cube can be consistent.
fn cube_may_hold(pts: &[Pt], centre: V3, half: f64) -> bool {
    let range = |(g, k): (V3, f64)| {
        let mid = dot3(g, centre) + k;
        let w = half * (g[0].abs() + g[1].abs() + g[2].abs());
        (mid - w, mid + w)
    };
    let mut mid = [0.0; 3];
    let mut gens = Vec::new();
    let mut add = |col: V3, lo: f64, hi: f64| {
        let (m, r) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for k in 0..3 {
            mid[k] += col[k] * m;
        }
        gens.push([col[0] * r, col[1] * r, col[2] * r]);
    };
    for c in pts {
        let (pen, slip) = kinematics(c);
        let (plo, phi) = range(pen);
        if phi <= 0.0 {
            continue;
        }
        let (flo, fhi) = (plo.max(0.0), phi);
        let (wn, wt) = wrenches(c);
        let (slo, shi) = range(slip);
        if slo > 0.0 || shi < 0.0 {
            let s = if slo > 0.0 { -c.mu } else { c.mu };
            add([wn[0] + s * wt[0], wn[1] + s * wt[1], wn[2] + s * wt[2]], flo, fhi);
        } else {
            add(wn, flo, fhi);
            add(wt, -c.mu * fhi, c.mu * fhi);
        }
    }
    zonotope_holds_origin(mid, &gens)
}

/// Penetration after the step and slip at each contact for a twist.
fn state(pts: &[Pt], z: V3) -> Vec<(f64, f64)> {
    pts.iter()
        .map(|c| {
            let ((gp, kp), (gs, ks)) = kinematics(c);
            (dot3(gp, z) + kp, dot3(gs, z) + ks)
        })
        .collect()
}

#[derive(PartialEq)]
struct Cube {
    bound: f64,
    centre: V3,
    half: f64,
}

impl Eq for Cube {}

impl PartialOrd for Cube {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Cube {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        // Min-heap on the norm bound.
        o.bound.total_cmp(&self.bound)
    }
}

/// First surviving cube of half-width `<= leaf` in order of the smallest
/// norm it could hold. No consistent twist has a norm below its bound.
fn brute_force(pts: &[Pt], leaf: f64) -> Option<Cube> {
    let mk = |centre: V3, half: f64| {
        let gap = centre.map(|v| (v.abs() - half).max(0.0));
        Cube { bound: wnorm(gap), centre, half }
    };
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(mk([0.0; 3], 64.0));
    while let Some(c) = heap.pop() {
        if !cube_may_hold(pts, c.centre, c.half) {
            continue;
        }
        if c.half <= leaf {
            return Some(c);
        }
        let q = c.half / 2.0;
        for dx in [-q, q] {
            for dy in [-q, q] {
                for dz in [-q, q] {
                    heap.push(mk([c.centre[0] + dx, c.centre[1] + dy, c.centre[2] + dz], q));
                }
            }
        }
    }
    None
}

fn to_problem(pts: &[Pt]) -> Problem {
    Problem {
        contacts: pts
            .iter()
            .map(|c| SolverContact {
                points: vec![c.p],
                penetration: vec![c.pen],
                normal: c.n,
                mu: c.mu,
                drive: vec![c.drive],
                yield_dir: vec![Vec2::zeros()],
                side: None,
            })
            .collect(),
        center: Vec2::zeros(),
        char_length: L,
        grip: None,
    }
}

fn unit(a: f64) -> Vec2 {
    Vec2::new(a.cos(), a.sin())
}

fn random_instance(rng: &mut ChaCha8Rng, two: bool) -> Vec<Pt> {
    let mut small = |r: f64| Vec2::new(rng.random_range(-r..r), rng.random_range(-r..r));
    if !two {
        let p = small(20.0);
        let drive = small(0.5);
        return vec![Pt {
            p,
            n: unit(rng.random_range(0.0..std::f64::consts::TAU)),
            pen: rng.random_range(-0.1..0.5),
            drive,
            mu: rng.random_range(0.05..1.0),
        }];
    }
    let mus = [0.08, 0.77, rng.random_range(0.05..1.0)];
    let mut side = |sx: f64| {
        let tilt = rng.random_range(-0.15..0.15);
        let n = if sx < 0.0 { unit(tilt) } else { unit(std::f64::consts::PI + tilt) };
        Pt {
            p: Vec2::new(25.0 * sx, rng.random_range(-15.0..15.0)),
            n,
            pen: rng.random_range(0.2..1.0),
            drive: Vec2::new(rng.random_range(-0.05..0.05), rng.random_range(-0.3..0.3)),
            mu: mus[rng.random_range(0..3)],
        }
    };
    vec![side(-1.0), side(1.0)]
}

fn expected_mode(pen: f64, slip: f64) -> ContactMode {
    if pen <= 1e-7 {
        ContactMode::Separate
    } else if slip.abs() <= 1e-7 {
        ContactMode::Stick
    } else if slip > 0.0 {
        ContactMode::SlidePos
    } else {
        ContactMode::SlideNeg
    }
}

/// Compares the solver with the brute-force search on `count` random
/// instances, alternating one and two contacts.
pub fn check_instances(seed: u64, count: usize) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let pts = random_instance(&mut rng, i % 2 == 1);
        let sol = solve(&to_problem(&pts)).map_err(|e| format!("instance {i}: solver failed: {e:?}"))?;
        let zs = [sol.twist[0], sol.twist[1], sol.twist[2] * L];
        if !cube_may_hold(&pts, zs, 1e-9) {
            return Err(format!("instance {i}: solver twist {zs:?} is not consistent"));
        }
        let expected: Vec<ContactMode> = state(&pts, zs).iter().map(|&(p, s)| expected_mode(p, s)).collect();
        let modes: Vec<ContactMode> = sol.contacts.iter().map(|c| c.mode).collect();
        if modes != expected {
            return Err(format!("instance {i}: solver labels {modes:?}, expected {expected:?}"));
        }
        let leaf = brute_force(&pts, 1e-4).ok_or(format!("instance {i}: search found no consistent twist"))?;
        if leaf.bound < wnorm(zs) * (1.0 - 1e-3) - 1e-3 {
            return Err(format!("instance {i}: a consistent twist may be smaller than {zs:?}"));
        }
        let zo = leaf.centre;
        let d = wnorm([zs[0] - zo[0], zs[1] - zo[1], zs[2] - zo[2]]);
        if d > 0.01 + 0.005 * wnorm(zs) {
            return Err(format!("instance {i}: solver {zs:?}, search {zo:?}"));
        }
    }
    Ok(())
}
