//! Zero sets of scalar fields on a box: marching squares in 2-D, marching
//! tetrahedra in 3-D. Every crossing is located by bisection on its grid
//! edge; crossings whose residual stays above the tolerance (jumps, poles)
//! are dropped together with the pieces that use them.

use std::collections::HashMap;

const BISECTIONS: usize = 200;

pub struct Grid {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: usize,
}

impl Grid {
    fn node(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (self.hi[k] - self.lo[k]) * i as f64 / self.cells as f64)
            .collect()
    }
}

#[derive(Debug, Default)]
pub struct Stats {
    pub max_residual: f64,
    pub dropped: usize,
}

fn inside(v: f64) -> bool {
    v < 0.0
}

/// Root of `f` on the segment `[p, q]`, given that the endpoints differ in
/// sign. Returns `None` when no point with `|f| ≤ tol` is found.
fn crossing<F: Fn(&[f64]) -> f64>(f: &F, p: &[f64], q: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let at = |t: f64| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect() };
    let side_p = inside(f(p));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let x = at(mid);
        let v = f(&x);
        if v.is_finite() && best.as_ref().is_none_or(|(_, r)| v.abs() < *r) {
            best = Some((x, v.abs()));
        }
        if v == 0.0 || mid <= lo || mid >= hi {
            break;
        }
        if inside(v) == side_p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.filter(|(_, r)| *r <= tol)
}

/// Polylines of `{f = 0}` for a 2-D field.
pub fn marching_squares<F: Fn(&[f64]) -> f64>(f: &F, grid: &Grid, tol: f64) -> (Vec<Vec<[f64; 2]>>, Stats) {
    let n = grid.cells;
    let vals: Vec<Vec<f64>> = (0..=n).map(|i| (0..=n).map(|j| f(&grid.node(&[i, j]))).collect()).collect();
    // Edge ids: 2·(i·(n+1) + j) for the edge (i,j)→(i+1,j), +1 for (i,j)→(i,j+1).
    let hid = |i: usize, j: usize| 2 * (i * (n + 1) + j);
    let vid = |i: usize, j: usize| 2 * (i * (n + 1) + j) + 1;
    let mut points: HashMap<usize, Option<[f64; 2]>> = HashMap::new();
    let mut stats = Stats::default();
    let mut point = |id: usize, a: [usize; 2], b: [usize; 2], stats: &mut Stats| -> Option<[f64; 2]> {
        *points.entry(id).or_insert_with(|| match crossing(f, &grid.node(&a), &grid.node(&b), tol) {
            Some((x, r)) => {
                stats.max_residual = stats.max_residual.max(r);
                Some([x[0], x[1]])
            }
            None => {
                stats.dropped += 1;
                None
            }
        })
    };
    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut coords: HashMap<usize, [f64; 2]> = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            let corners = [vals[i][j], vals[i + 1][j], vals[i + 1][j + 1], vals[i][j + 1]];
            let s: Vec<bool> = corners.iter().map(|&v| inside(v)).collect();
            let edges = [
                (hid(i, j), [i, j], [i + 1, j], s[0] != s[1]),
                (vid(i + 1, j), [i + 1, j], [i + 1, j + 1], s[1] != s[2]),
                (hid(i, j + 1), [i + 1, j + 1], [i, j + 1], s[2] != s[3]),
                (vid(i, j), [i, j + 1], [i, j], s[3] != s[0]),
            ];
            let crossed: Vec<usize> = (0..4).filter(|&k| edges[k].3).collect();
            let pairs: Vec<(usize, usize)> = match crossed.len() {
                2 => vec![(crossed[0], crossed[1])],
                4 => {
                    let mid = [
                        0.5 * (grid.node(&[i, j])[0] + grid.node(&[i + 1, j])[0]),
                        0.5 * (grid.node(&[i, j])[1] + grid.node(&[i, j + 1])[1]),
                    ];
                    if inside(f(&mid)) == s[0] {
                        vec![(0, 1), (2, 3)]
                    } else {
                        vec![(3, 0), (1, 2)]
                    }
                }
                _ => vec![],
            };
            for (u, v) in pairs {
                let (eu, ev) = (edges[u], edges[v]);
                let pu = point(eu.0, eu.1, eu.2, &mut stats);
                let pv = point(ev.0, ev.1, ev.2, &mut stats);
                if let (Some(pu), Some(pv)) = (pu, pv) {
                    coords.insert(eu.0, pu);
                    coords.insert(ev.0, pv);
                    adjacency.entry(eu.0).or_default().push(ev.0);
                    adjacency.entry(ev.0).or_default().push(eu.0);
                }
            }
        }
    }
    (chain(adjacency, &coords), stats)
}

/// Joins segments sharing endpoints into polylines, open ones first.
fn chain(mut adjacency: HashMap<usize, Vec<usize>>, coords: &HashMap<usize, [f64; 2]>) -> Vec<Vec<[f64; 2]>> {
    let mut keys: Vec<usize> = adjacency.keys().copied().collect();
    keys.sort_unstable();
    let starts: Vec<usize> = keys
        .iter()
        .copied()
        .filter(|k| adjacency[k].len() == 1)
        .chain(keys.iter().copied())
        .collect();
    let mut lines = Vec::new();
    for start in starts {
        if adjacency.get(&start).is_none_or(|v| v.is_empty()) {
            continue;
        }
        let mut line = vec![coords[&start]];
        let mut cur = start;
        while let Some(next) = adjacency.get_mut(&cur).and_then(|v| v.pop()) {
            if let Some(back) = adjacency.get_mut(&next) {
                if let Some(pos) = back.iter().position(|&x| x == cur) {
                    back.swap_remove(pos);
                }
            }
            line.push(coords[&next]);
            cur = next;
        }
        lines.push(line);
    }
    lines
}

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

const CUBE: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Six tetrahedra around the diagonal 0–6.
const TETS: [[usize; 4]; 6] = [[0, 5, 1, 6], [0, 1, 2, 6], [0, 2, 3, 6], [0, 3, 7, 6], [0, 7, 4, 6], [0, 4, 5, 6]];

/// Triangle mesh of `{f = 0}` for a 3-D field.
pub fn marching_tetrahedra<F: Fn(&[f64]) -> f64>(f: &F, grid: &Grid, tol: f64) -> (Mesh, Stats) {
    let n = grid.cells;
    let lin = |i: usize, j: usize, k: usize| (i * (n + 1) + j) * (n + 1) + k;
    let mut vals = vec![0.0; (n + 1).pow(3)];
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                vals[lin(i, j, k)] = f(&grid.node(&[i, j, k]));
            }
        }
    }
    let mut mesh = Mesh::default();
    let mut stats = Stats::default();
    let mut cache: HashMap<(usize, usize), Option<usize>> = HashMap::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let idx: Vec<[usize; 3]> = CUBE.iter().map(|c| [i + c[0], j + c[1], k + c[2]]).collect();
                let ids: Vec<usize> = idx.iter().map(|c| lin(c[0], c[1], c[2])).collect();
                for tet in TETS {
                    let (ins, outs): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&c| inside(vals[ids[c]]));
                    if ins.is_empty() || outs.is_empty() {
                        continue;
                    }
                    let mut vertex = |a: usize, b: usize| -> Option<usize> {
                        let key = (ids[a].min(ids[b]), ids[a].max(ids[b]));
                        *cache.entry(key).or_insert_with(|| {
                            match crossing(f, &grid.node(&idx[a]), &grid.node(&idx[b]), tol) {
                                Some((x, r)) => {
                                    stats.max_residual = stats.max_residual.max(r);
                                    mesh.vertices.push([x[0], x[1], x[2]]);
                                    Some(mesh.vertices.len() - 1)
                                }
                                None => {
                                    stats.dropped += 1;
                                    None
                                }
                            }
                        })
                    };
                    let tris: Vec<[Option<usize>; 3]> = match (ins.len(), outs.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if ins.len() == 1 { (ins[0], &outs) } else { (outs[0], &ins) };
                            vec![[vertex(lone, rest[0]), vertex(lone, rest[1]), vertex(lone, rest[2])]]
                        }
                        _ => {
                            let (a, b, c, d) = (ins[0], ins[1], outs[0], outs[1]);
                            let (ac, ad, bd, bc) = (vertex(a, c), vertex(a, d), vertex(b, d), vertex(b, c));
                            vec![[ac, ad, bd], [ac, bd, bc]]
                        }
                    };
                    for t in tris {
                        if let [Some(u), Some(v), Some(w)] = t {
                            mesh.triangles.push([u, v, w]);
                        }
                    }
                }
            }
        }
    }
    (mesh, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle(p: &[f64]) -> f64 {
        p.iter().map(|v| v * v).sum::<f64>() - 1.0
    }

    #[test]
    fn circle_is_one_closed_polyline() {
        let grid = Grid { lo: vec![-2.0, -2.0], hi: vec![2.0, 2.0], cells: 40 };
        let (lines, stats) = marching_squares(&circle, &grid, 1e-6);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        assert!(stats.max_residual <= 1e-12);
        for p in line {
            assert!(circle(p).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_mesh_vertices_on_surface() {
        let grid = Grid { lo: vec![-1.5; 3], hi: vec![1.5; 3], cells: 12 };
        let (mesh, stats) = marching_tetrahedra(&circle, &grid, 1e-6);
        assert!(mesh.triangles.len() > 100);
        assert_eq!(stats.dropped, 0);
        for v in &mesh.vertices {
            assert!(circle(v).abs() <= 1e-12);
        }
    }

    #[test]
    fn jumps_are_dropped() {
        let step = |p: &[f64]| if p[0] < 0.3 { -1.0 } else { 1.0 };
        let grid = Grid { lo: vec![0.0, 0.0], hi: vec![1.0, 1.0], cells: 5 };
        let (lines, stats) = marching_squares(&step, &grid, 1e-6);
        assert!(lines.is_empty());
        assert!(stats.dropped > 0);
    }
}
