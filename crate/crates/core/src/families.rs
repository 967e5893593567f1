//! Graph families: Aztec diamonds (plain and boundary-reduced), prisms.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::graph::{BipartiteDimerGraph, Color, Dart, Edge};

/// Planar graph from straight-line vertex positions; the outer face is the
/// face of most negative signed area.
pub fn from_positions(
    colors: Vec<Color>,
    edges: Vec<Edge>,
    pos: &[(f64, f64)],
) -> Result<BipartiteDimerGraph> {
    let rot = rotation_from_positions(&edges, pos);
    let area = |f: &Vec<Dart>| -> f64 {
        let pts: Vec<(f64, f64)> = f.iter().map(|d| pos[d.tail]).collect();
        let n = pts.len();
        (0..n)
            .map(|i| {
                let (a, b) = (pts[i], pts[(i + 1) % n]);
                a.0 * b.1 - b.0 * a.1
            })
            .sum::<f64>()
    };
    BipartiteDimerGraph::from_rotation(colors, edges, rot, |faces| {
        (0..faces.len())
            .min_by(|&i, &j| area(&faces[i]).total_cmp(&area(&faces[j])))
            .unwrap_or(0)
    })
}

fn rotation_from_positions(edges: &[Edge], pos: &[(f64, f64)]) -> Vec<Vec<usize>> {
    let mut rot = vec![Vec::new(); pos.len()];
    for (e, ed) in edges.iter().enumerate() {
        rot[ed.black].push(e);
        rot[ed.white].push(e);
    }
    for (v, r) in rot.iter_mut().enumerate() {
        let ang = |e: &usize| {
            let u = edges[*e].other(v);
            (pos[u].1 - pos[v].1).atan2(pos[u].0 - pos[v].0)
        };
        r.sort_by(|a, b| ang(a).total_cmp(&ang(b)));
    }
    rot
}

/// Unit-square centres with |x|+|y| <= m, adjacent squares joined, unit weights.
pub fn aztec_diamond(m: usize) -> Result<BipartiteDimerGraph> {
    let (colors, edges, pos) = aztec_parts(m)?;
    from_positions(colors, edges, &pos)
}

type Parts = (Vec<Color>, Vec<Edge>, Vec<(f64, f64)>);

fn aztec_parts(m: usize) -> Result<Parts> {
    if m == 0 {
        return Err(Error::Input("aztec diamond order must be >= 1".into()));
    }
    let mi = m as i64;
    let mut cells = Vec::new();
    for i in -mi..mi {
        for j in -mi..mi {
            let (x, y) = (i as f64 + 0.5, j as f64 + 0.5);
            if x.abs() + y.abs() <= m as f64 {
                cells.push((i, j));
            }
        }
    }
    let idx: HashMap<(i64, i64), usize> = cells.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    let colors: Vec<Color> = cells
        .iter()
        .map(|&(i, j)| {
            if (i + j).rem_euclid(2) == 0 {
                Color::Black
            } else {
                Color::White
            }
        })
        .collect();
    let mut edges = Vec::new();
    for &(i, j) in &cells {
        for (di, dj) in [(1, 0), (0, 1)] {
            if let Some(&b) = idx.get(&(i + di, j + dj)) {
                let a = idx[&(i, j)];
                let (bl, wh) = if colors[a] == Color::Black {
                    (a, b)
                } else {
                    (b, a)
                };
                edges.push(Edge {
                    black: bl,
                    white: wh,
                    weight: 1.0,
                });
            }
        }
    }
    let pos = cells
        .iter()
        .map(|&(i, j)| (i as f64 + 0.5, j as f64 + 0.5))
        .collect();
    Ok((colors, edges, pos))
}

/// Prism over a cycle of even length `n`: outer and inner n-cycles joined by
/// spokes. `prism(4)` is the cube.
pub fn prism(n: usize) -> Result<BipartiteDimerGraph> {
    if n < 4 || n % 2 != 0 {
        return Err(Error::Input("prism needs an even cycle length >= 4".into()));
    }
    let mut colors = Vec::with_capacity(2 * n);
    let mut pos = Vec::with_capacity(2 * n);
    for ring in 0..2 {
        for j in 0..n {
            let c = if (j + ring) % 2 == 0 {
                Color::Black
            } else {
                Color::White
            };
            colors.push(c);
            let r = if ring == 0 { 2.0 } else { 1.0 };
            let a = std::f64::consts::TAU * j as f64 / n as f64;
            pos.push((r * a.cos(), r * a.sin()));
        }
    }
    let mut edges = Vec::new();
    let mut join = |a: usize, b: usize| {
        let (bl, wh) = if colors[a] == Color::Black {
            (a, b)
        } else {
            (b, a)
        };
        edges.push(Edge {
            black: bl,
            white: wh,
            weight: 1.0,
        });
    };
    for ring in 0..2 {
        for j in 0..n {
            join(ring * n + j, ring * n + (j + 1) % n);
        }
    }
    for j in 0..n {
        join(j, n + j);
    }
    from_positions(colors, edges, &pos)
}

/// Mutable rotation system used for the boundary contractions.
struct Map {
    color: Vec<Option<Color>>,
    ends: Vec<Option<(usize, usize)>>,
    w: Vec<f64>,
    rot: Vec<Option<Vec<usize>>>,
}

impl Map {
    fn other(&self, k: usize, v: usize) -> usize {
        let (b, w) = self.ends[k].unwrap();
        if v == b {
            w
        } else {
            b
        }
    }

    fn faces(&self) -> Vec<Vec<(usize, usize)>> {
        let mut used = HashSet::new();
        let mut out = Vec::new();
        for k in 0..self.ends.len() {
            let Some((b, w)) = self.ends[k] else { continue };
            for v in [b, w] {
                if used.contains(&(v, k)) {
                    continue;
                }
                let mut f = Vec::new();
                let (mut cv, mut ck) = (v, k);
                while used.insert((cv, ck)) {
                    f.push((cv, ck));
                    let u = self.other(ck, cv);
                    let r = self.rot[u].as_ref().unwrap();
                    let i = r.iter().position(|&x| x == ck).unwrap();
                    cv = u;
                    ck = r[(i + r.len() - 1) % r.len()];
                }
                out.push(f);
            }
        }
        out
    }

    /// Fold degree-2 vertex `c` and its two neighbours into one vertex.
    fn contract(&mut self, c: usize) {
        let rc = self.rot[c].clone().unwrap();
        let (k1, k2) = (rc[0], rc[1]);
        let (a, b) = (self.other(k1, c), self.other(k2, c));
        let (w1, w2) = (self.w[k1], self.w[k2]);
        let x = self.color.len();
        self.color.push(self.color[a]);
        let cyc_after = |r: &Vec<usize>, k: usize| -> Vec<usize> {
            let i = r.iter().position(|&e| e == k).unwrap();
            r[i + 1..].iter().chain(r[..i].iter()).copied().collect()
        };
        let ra = cyc_after(self.rot[a].as_ref().unwrap(), k1);
        let rb = cyc_after(self.rot[b].as_ref().unwrap(), k2);
        for &k in &ra {
            self.w[k] *= w2;
        }
        for &k in &rb {
            self.w[k] *= w1;
        }
        let merged: Vec<usize> = ra.iter().chain(rb.iter()).copied().collect();
        for &k in &merged {
            let (mut bb, mut ww) = self.ends[k].unwrap();
            if bb == a || bb == b {
                bb = x;
            }
            if ww == a || ww == b {
                ww = x;
            }
            self.ends[k] = Some((bb, ww));
        }
        self.rot.push(Some(merged));
        for k in [k1, k2] {
            self.ends[k] = None;
        }
        for v in [a, b, c] {
            self.rot[v] = None;
            self.color[v] = None;
        }
    }

    fn merge_parallel(&mut self) {
        loop {
            let two = self
                .faces()
                .into_iter()
                .find(|f| f.len() == 2 && f[0].1 != f[1].1);
            let Some(f) = two else { break };
            let (ka, kb) = (f[0].1, f[1].1);
            self.w[ka] += self.w[kb];
            let (b, w) = self.ends[kb].unwrap();
            for v in [b, w] {
                self.rot[v].as_mut().unwrap().retain(|&e| e != kb);
            }
            self.ends[kb] = None;
        }
    }
}

/// Aztec diamond with outer-face degree-2 vertices repeatedly contracted
/// (weights updated so the dimer measure is preserved on the remaining
/// edges up to a global factor) until the outer face has degree 4.
///
/// The plain Aztec diamond of order >= 2 has degree-2 boundary vertices
/// whose dual faces are triangles with a boundary side; such graphs admit no
/// perfect t-embedding, while the reduced graph does.
pub fn reduced_aztec_diamond(m: usize) -> Result<BipartiteDimerGraph> {
    let (colors, edges, pos) = aztec_parts(m)?;
    let g0 = from_positions(colors.clone(), edges.clone(), &pos)?;
    let mut map = Map {
        color: colors.iter().map(|&c| Some(c)).collect(),
        ends: edges.iter().map(|e| Some((e.black, e.white))).collect(),
        w: edges.iter().map(|e| e.weight).collect(),
        rot: (0..colors.len())
            .map(|v| Some(g0.rotation(v).to_vec()))
            .collect(),
    };
    let mut outer_edges: HashSet<usize> =
        g0.faces()[g0.outer_face()].iter().map(|d| d.edge).collect();
    let outer_of = |map: &Map, marks: &HashSet<usize>| -> Vec<(usize, usize)> {
        map.faces()
            .into_iter()
            .max_by_key(|f| f.iter().filter(|d| marks.contains(&d.1)).count())
            .unwrap()
    };
    loop {
        let of = outer_of(&map, &outer_edges);
        outer_edges = of.iter().map(|d| d.1).collect();
        if of.len() <= 4 {
            break;
        }
        let c = of
            .iter()
            .map(|d| d.0)
            .filter(|&v| map.rot[v].as_ref().unwrap().len() == 2)
            .min();
        let Some(c) = c else { break };
        map.contract(c);
        map.merge_parallel();
        let of = outer_of(&map, &outer_edges);
        outer_edges = of.iter().map(|d| d.1).collect();
    }
    // compact ids
    let vids: Vec<usize> = (0..map.rot.len())
        .filter(|&v| map.rot[v].is_some())
        .collect();
    let vid: HashMap<usize, usize> = vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let eids: Vec<usize> = (0..map.ends.len())
        .filter(|&k| map.ends[k].is_some())
        .collect();
    let eid: HashMap<usize, usize> = eids.iter().enumerate().map(|(i, &k)| (k, i)).collect();
    let colors: Vec<Color> = vids.iter().map(|&v| map.color[v].unwrap()).collect();
    let edges: Vec<Edge> = eids
        .iter()
        .map(|&k| {
            let (b, w) = map.ends[k].unwrap();
            Edge {
                black: vid[&b],
                white: vid[&w],
                weight: map.w[k],
            }
        })
        .collect();
    let rot: Vec<Vec<usize>> = vids
        .iter()
        .map(|&v| {
            map.rot[v]
                .as_ref()
                .unwrap()
                .iter()
                .map(|k| eid[k])
                .collect()
        })
        .collect();
    let outer_set: HashSet<usize> = outer_edges.iter().map(|k| eid[k]).collect();
    BipartiteDimerGraph::from_rotation(colors, edges, rot, |faces| {
        faces
            .iter()
            .position(|f| {
                f.len() == outer_set.len() && f.iter().all(|d| outer_set.contains(&d.edge))
            })
            .unwrap_or(0)
    })
}
