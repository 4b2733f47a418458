//! Graph and matrix machinery: the bisector pair graph, streaming A^2
//! decomposition, Gershgorin discs, shifted power iteration for the second
//! eigenvalue, exact Cayley spectra of abelian groups via character sums,
//! and expander-mixing checks.

use crate::report::Budget;
use crate::ring::{Modulus, RingElem};
use crate::zqgeom::{self, GeomError, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("adjacency is not symmetric at ({0}, {1})")]
    Asymmetric(u32, u32),
    #[error("graph is not regular: degrees range over [{min}, {max}], expected {expected}")]
    Irregular { min: u64, max: u64, expected: u64 },
    #[error("matrix is not square")]
    NonSquare,
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("connection set is not symmetric under negation")]
    AsymmetricConnectionSet,
    #[error("graph is empty")]
    EmptyGraph,
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("io: {0}")]
    Io(String),
}

/// Undirected graph as sorted neighbor lists, with an optional payload per
/// vertex and an optionally declared regular degree.
#[derive(Clone, Debug)]
pub struct SparseGraph<P = ()> {
    payloads: Vec<P>,
    adj: Vec<Vec<u32>>,
    declared_degree: Option<u64>,
}

impl<P> SparseGraph<P> {
    pub fn from_adjacency(
        payloads: Vec<P>,
        adj: Vec<Vec<u32>>,
        declared_degree: Option<u64>,
    ) -> Result<Self, SpectralError> {
        let g = SparseGraph { payloads, adj, declared_degree };
        g.validate()?;
        Ok(g)
    }

    /// Build from an undirected edge list (each edge once, either
    /// orientation).
    pub fn from_edges(
        payloads: Vec<P>,
        edges: &[(u32, u32)],
        declared_degree: Option<u64>,
    ) -> Result<Self, SpectralError> {
        let n = payloads.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(SpectralError::SelfLoop(u));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        Self::from_adjacency(payloads, adj, declared_degree)
    }

    /// Symmetry audit, self-loop check, and declared-degree check.
    pub fn validate(&self) -> Result<(), SpectralError> {
        for (v, list) in self.adj.iter().enumerate() {
            let v = v as u32;
            for &w in list {
                if w == v {
                    return Err(SpectralError::SelfLoop(v));
                }
                if self.adj[w as usize].binary_search(&v).is_err() {
                    return Err(SpectralError::Asymmetric(v, w));
                }
            }
        }
        if let Some(d) = self.declared_degree {
            let min = self.adj.iter().map(|l| l.len() as u64).min().unwrap_or(0);
            let max = self.adj.iter().map(|l| l.len() as u64).max().unwrap_or(0);
            if min != d || max != d {
                return Err(SpectralError::Irregular { min, max, expected: d });
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> u128 {
        self.adj.iter().map(|l| l.len() as u128).sum::<u128>() / 2
    }

    pub fn degree(&self, v: u32) -> u64 {
        self.adj[v as usize].len() as u64
    }

    pub fn declared_degree(&self) -> Option<u64> {
        self.declared_degree
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    pub fn payload(&self, v: u32) -> &P {
        &self.payloads[v as usize]
    }

    pub fn payloads(&self) -> &[P] {
        &self.payloads
    }

    /// (A^2)_{xy}: the number of common neighbors.
    pub fn a2_entry(&self, x: u32, y: u32) -> u64 {
        let (a, b) = (&self.adj[x as usize], &self.adj[y as usize]);
        let (mut i, mut j, mut count) = (0, 0, 0u64);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }
}

/// One vertex of the bisector pair graph: a pair of plane points at the
/// fixed distance d.
pub type PairVertex = ((u64, u64), (u64, u64));

/// The graph on point pairs at distance d (a unit): x ~ y when some census
/// reflection carries x to y componentwise, equivalently when the pairs
/// share a non-isotropic bisector componentwise. |V| = p^9 + p^8; the graph
/// is (p^6 - p^5)-regular, which is verified on construction.
pub fn build_bisector_graph(
    m: Modulus,
    d: RingElem,
    budget: &Budget,
) -> Result<SparseGraph<PairVertex>, SpectralError> {
    m.require_zq().map_err(GeomError::from)?;
    if !d.is_unit() {
        return Err(SpectralError::Geom(GeomError::NonUnitRadius));
    }
    let q = m.q();
    let expected_vertices = (q as u128) * (q as u128) * zqgeom::circle_size(d)? as u128;
    let census = zqgeom::reflection_census(m)?;
    budget
        .charge(u64::try_from(expected_vertices * census.len() as u128).unwrap_or(u64::MAX))
        .map_err(|e| SpectralError::ResourceLimit(e.to_string()))?;

    // vertex list: for each base point, the circle of radius d around it
    let offsets: Vec<(u64, u64)> = zqgeom::circle(&Vec2::from_ints(m, 0, 0), d)?
        .iter()
        .map(|v| v.raw())
        .collect();
    let mut verts: Vec<PairVertex> = Vec::with_capacity(expected_vertices as usize);
    for x1 in 0..q {
        for x2 in 0..q {
            for &(c1, c2) in &offsets {
                verts.push(((x1, x2), (m.add_raw(x1, c1), m.add_raw(x2, c2))));
            }
        }
    }
    debug_assert_eq!(verts.len() as u128, expected_vertices);

    let pack = |v: PairVertex| -> u64 {
        ((v.0 .0 * q + v.0 .1) * q + v.1 .0) * q + v.1 .1
    };
    let q4 = (q as u128).pow(4);
    let lookup: Lookup = if q4 <= 1 << 26 {
        let mut table = vec![u32::MAX; q4 as usize];
        for (i, &v) in verts.iter().enumerate() {
            table[pack(v) as usize] = i as u32;
        }
        Lookup::Dense(table)
    } else {
        Lookup::Sparse(verts.iter().enumerate().map(|(i, &v)| (pack(v), i as u32)).collect())
    };

    let adj: Vec<Vec<u32>> = verts
        .par_iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            let mut nb: Vec<u32> = census
                .reflections()
                .iter()
                .filter_map(|s| {
                    let y = (s.apply_raw(a), s.apply_raw(b));
                    let id = lookup.get(pack(y)).expect("isometry preserves distance");
                    (id != i as u32).then_some(id)
                })
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();

    SparseGraph::from_adjacency(verts, adj, Some(census.len() as u64))
}

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl Lookup {
    fn get(&self, key: u64) -> Option<u32> {
        match self {
            Lookup::Dense(t) => {
                let v = t[key as usize];
                (v != u32::MAX).then_some(v)
            }
            Lookup::Sparse(map) => map.get(&key).copied(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum RowSelection {
    All,
    Sample { count: usize, seed: u64 },
}

/// Row statistics of E in A^2 = c_J J + c_I I + E, computed row by row
/// without materializing A^2: for row x, (A^2)_{xy} is the common-neighbor
/// count, every untouched y contributes |0 - c_J|, and the diagonal
/// contributes |(A^2)_{xx} - c_J - c_I|.
#[derive(Clone, Debug, Serialize)]
pub struct A2Stats {
    pub c_j: u64,
    pub c_i: u64,
    pub rows_checked: usize,
    pub diag_all_zero: bool,
    pub row_sum_min: u128,
    pub row_sum_max: u128,
    pub all_rows_equal: bool,
}

pub fn a2_decomposition_with<P: Sync>(
    g: &SparseGraph<P>,
    c_j: u64,
    c_i: u64,
    rows: &RowSelection,
) -> A2Stats {
    let n = g.vertex_count();
    let picked: Vec<u32> = match rows {
        RowSelection::All => (0..n as u32).collect(),
        RowSelection::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..*count).map(|_| rng.gen_range(0..n as u32)).collect()
        }
    };
    let results: Vec<(u128, bool)> = picked
        .par_iter()
        .map_init(
            || (vec![0u32; n], Vec::<u32>::new()),
            |(buf, touched), &x| {
                for t in touched.drain(..) {
                    buf[t as usize] = 0;
                }
                for &z in g.neighbors(x) {
                    for &y in g.neighbors(z) {
                        if buf[y as usize] == 0 {
                            touched.push(y);
                        }
                        buf[y as usize] += 1;
                    }
                }
                let mut row_sum = 0u128;
                let mut diag = 0u64;
                for &y in touched.iter() {
                    let a2 = buf[y as usize] as u64;
                    if y == x {
                        diag = a2;
                    } else {
                        row_sum += a2.abs_diff(c_j) as u128;
                    }
                }
                // vertices never reached in two steps: |0 - c_J| each
                let untouched =
                    n as u128 - touched.len() as u128 - u128::from(!touched.contains(&x));
                row_sum += untouched * c_j as u128;
                let diag_e = diag.abs_diff(c_j + c_i);
                row_sum += diag_e as u128;
                (row_sum, diag_e == 0)
            },
        )
        .collect();
    let row_sum_min = results.iter().map(|r| r.0).min().unwrap_or(0);
    let row_sum_max = results.iter().map(|r| r.0).max().unwrap_or(0);
    A2Stats {
        c_j,
        c_i,
        rows_checked: picked.len(),
        diag_all_zero: results.iter().all(|r| r.1),
        row_sum_min,
        row_sum_max,
        all_rows_equal: row_sum_min == row_sum_max,
    }
}

/// The decomposition with the pair-graph constants c_J = p^3 - 3p^2 and
/// c_I = p^6 - p^5 - p^3 + 3p^2, plus the closed-form row-sum value the
/// proof predicts. Equality with the measurement is reported, not assumed.
pub fn a2_decomposition<P: Sync>(
    g: &SparseGraph<P>,
    p: u64,
    rows: &RowSelection,
) -> (A2Stats, u128) {
    let c_j = p.pow(3).saturating_sub(3 * p.pow(2));
    let c_i = p.pow(6) - p.pow(5) - p.pow(3) + 3 * p.pow(2);
    let stats = a2_decomposition_with(g, c_j, c_i, rows);
    (stats, a2_row_sum_closed_form(p))
}

/// The predicted absolute row sum of E: a sum of |bin value - c_J| * bin
/// count over the conjectured N-distribution, including the N = 0 class.
pub fn a2_row_sum_closed_form(p: u64) -> u128 {
    let p = p as u128;
    2 * p.pow(2) * p.pow(8)
        + 3 * p.pow(2) * (p.pow(8) - 2 * p.pow(7) + p.pow(6))
        + (p.pow(4) - 2 * p.pow(3) + 3 * p.pow(2)) * (p.pow(6) - p.pow(5))
        + (p.pow(4) - p.pow(3) + 3 * p.pow(2)) * (p.pow(5) - 2 * p.pow(4) + p.pow(3))
        + (p.pow(5) - p.pow(4) - p.pow(3) + 3 * p.pow(2)) * (p.pow(3) - p.pow(2))
        + (p.pow(5) - p.pow(3) + 3 * p.pow(2)) * (p.pow(2) - 2 * p + 1)
        + (p.pow(3) - 3 * p.pow(2)) * (2 * p.pow(7) - 2 * p.pow(6) + 2 * p.pow(4) - 2 * p.pow(3) + 2 * p - 2)
}

/// Gershgorin disc data for a square integer matrix: per row the center
/// a_ii and off-diagonal radius r_i, and the bound max_i (|a_ii| + r_i) on
/// the spectral radius.
#[derive(Clone, Debug, Serialize)]
pub struct GershgorinBound {
    pub discs: Vec<(i64, u64)>,
    pub spectral_radius_bound: u64,
}

pub fn gershgorin_bound(matrix: &[Vec<i64>]) -> Result<GershgorinBound, SpectralError> {
    let n = matrix.len();
    if matrix.iter().any(|row| row.len() != n) {
        return Err(SpectralError::NonSquare);
    }
    let mut discs = Vec::with_capacity(n);
    let mut bound = 0u64;
    for (i, row) in matrix.iter().enumerate() {
        let center = row[i];
        let radius: u64 = row
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &v)| v.unsigned_abs())
            .sum();
        bound = bound.max(center.unsigned_abs() + radius);
        discs.push((center, radius));
    }
    Ok(GershgorinBound { discs, spectral_radius_bound: bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct Eigenvalue {
    pub value: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn matvec<P: Sync>(g: &SparseGraph<P>, v: &[f64], out: &mut [f64]) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = g.neighbors(i as u32).iter().map(|&w| v[w as usize]).sum();
    });
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn rayleigh_and_residual<P: Sync>(g: &SparseGraph<P>, v: &[f64]) -> (f64, f64) {
    let mut av = vec![0.0; v.len()];
    matvec(g, v, &mut av);
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let lambda = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>() / vv;
    let res: f64 = av
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
        .sum::<f64>()
        .sqrt()
        / vv.sqrt();
    (lambda, res)
}

/// Largest eigenvalue by power iteration on A + (D+1) I, where D is the
/// max degree (the shift makes the target eigenvalue dominant even for
/// bipartite graphs); for a connected delta-regular graph this is delta.
pub fn dominant_eigenvalue<P: Sync>(
    g: &SparseGraph<P>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Eigenvalue, SpectralError> {
    let degree = (0..g.vertex_count() as u32).map(|v| g.degree(v)).max().unwrap_or(0);
    shifted_power_iteration(g, 1.0, degree as f64 + 1.0, false, tolerance, max_iterations, 7)
}

/// The dominant |eigenvalue| on the orthogonal complement of the all-ones
/// vector: power iteration runs on A + sI and on sI - A (s = degree + 1)
/// with mean deflation, and the larger converged |Rayleigh quotient| wins.
pub fn second_eigenvalue<P: Sync>(
    g: &SparseGraph<P>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<Eigenvalue, SpectralError> {
    if g.vertex_count() < 2 {
        return Err(SpectralError::EmptyGraph);
    }
    let degree = (0..g.vertex_count() as u32).map(|v| g.degree(v)).max().unwrap_or(0);
    let s = degree as f64 + 1.0;
    let up = shifted_power_iteration(g, 1.0, s, true, tolerance, max_iterations, 11);
    let down = shifted_power_iteration(g, -1.0, s, true, tolerance, max_iterations, 13);
    let candidates: Vec<Eigenvalue> = [up, down].into_iter().flatten().collect();
    candidates
        .into_iter()
        .filter(|e| e.residual <= tolerance)
        .max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
        .ok_or(SpectralError::NonConvergence(max_iterations))
}

/// Iterate v <- sign * A v + shift * v (optionally deflating the all-ones
/// direction) until the Rayleigh residual against A drops below tolerance.
fn shifted_power_iteration<P: Sync>(
    g: &SparseGraph<P>,
    sign: f64,
    shift: f64,
    deflate: bool,
    tolerance: f64,
    max_iterations: usize,
    seed: u64,
) -> Result<Eigenvalue, SpectralError> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(SpectralError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut av = vec![0.0; n];
    for it in 1..=max_iterations {
        if deflate {
            let mean: f64 = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
        }
        let nv = norm2(&v);
        if nv == 0.0 {
            return Err(SpectralError::NonConvergence(it));
        }
        v.iter_mut().for_each(|x| *x /= nv);
        matvec(g, &v, &mut av);
        for i in 0..n {
            av[i] = sign * av[i] + shift * v[i];
        }
        std::mem::swap(&mut v, &mut av);
        if it % 8 == 0 || it == max_iterations {
            let mut w = v.clone();
            if deflate {
                let mean: f64 = w.iter().sum::<f64>() / n as f64;
                w.iter_mut().for_each(|x| *x -= mean);
            }
            let nw = norm2(&w);
            if nw > 0.0 {
                w.iter_mut().for_each(|x| *x /= nw);
                let (lambda, res) = rayleigh_and_residual(g, &w);
                if res < tolerance {
                    return Ok(Eigenvalue { value: lambda, residual: res, iterations: it });
                }
            }
        }
    }
    Err(SpectralError::NonConvergence(max_iterations))
}

/// Exact spectrum of the Cayley graph of (Z_q^2, +) with the given
/// symmetric connection set, via character sums: one real eigenvalue
/// lambda_(a,b) = sum over s of cos(2 pi (a s1 + b s2) / q) per character.
/// Sorted descending.
pub fn cayley_spectrum(connection: &[Vec2], m: Modulus) -> Result<Vec<f64>, SpectralError> {
    let q = m.q();
    let set: std::collections::HashSet<(u64, u64)> =
        connection.iter().map(|v| v.raw()).collect();
    for &(s1, s2) in &set {
        if !set.contains(&(m.sub_raw(0, s1), m.sub_raw(0, s2))) {
            return Err(SpectralError::AsymmetricConnectionSet);
        }
    }
    let cos_table: Vec<f64> = (0..q)
        .map(|k| (2.0 * std::f64::consts::PI * k as f64 / q as f64).cos())
        .collect();
    let pts: Vec<(u64, u64)> = set.into_iter().collect();
    let mut spec: Vec<f64> = (0..q * q)
        .into_par_iter()
        .map(|idx| {
            let (a, b) = (idx / q, idx % q);
            pts.iter()
                .map(|&(s1, s2)| {
                    cos_table[m.add_raw(m.mul_raw(a, s1), m.mul_raw(b, s2)) as usize]
                })
                .sum()
        })
        .collect();
    spec.sort_unstable_by(|a, b| b.total_cmp(a));
    Ok(spec)
}

/// The two trace identities as exact integer counts: the spectrum sums to
/// q^2 * [0 in S] and the squared spectrum sums to q^2 * #{(s,t) in S^2 :
/// s + t = 0}, which is q^2 |S| for a symmetric S.
pub fn cayley_trace_identities(connection: &[Vec2], m: Modulus) -> (i128, u128) {
    let q = m.q() as u128;
    let set: std::collections::HashSet<(u64, u64)> =
        connection.iter().map(|v| v.raw()).collect();
    let loops = if set.contains(&(0, 0)) { 1 } else { 0 };
    let involutive = set
        .iter()
        .filter(|&&(a, b)| set.contains(&(m.sub_raw(0, a), m.sub_raw(0, b))))
        .count() as u128;
    ((q * q) as i128 * loops, q * q * involutive)
}

/// Expander-mixing check: |E(S,T) - d |S| |T| / n| <= lambda sqrt(|S| |T|),
/// with E(S, T) counted exactly over ordered pairs.
#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub e_st: u128,
    pub expected: f64,
    pub deviation: f64,
    pub bound: f64,
    pub holds: bool,
    pub slack: f64,
}

pub fn mixing_check<P: Sync>(
    g: &SparseGraph<P>,
    s: &[u32],
    t: &[u32],
    lambda: f64,
) -> MixingReport {
    let n = g.vertex_count();
    let mut in_t = vec![false; n];
    for &v in t {
        in_t[v as usize] = true;
    }
    let e_st: u128 = s
        .par_iter()
        .map(|&v| g.neighbors(v).iter().filter(|&&w| in_t[w as usize]).count() as u128)
        .sum();
    let degree = (0..n as u32).map(|v| g.degree(v)).max().unwrap_or(0) as f64;
    let expected = degree * s.len() as f64 * t.len() as f64 / n as f64;
    let deviation = (e_st as f64 - expected).abs();
    let bound = lambda * ((s.len() as f64) * (t.len() as f64)).sqrt();
    MixingReport {
        e_st,
        expected,
        deviation,
        bound,
        holds: deviation <= bound + 1e-9,
        slack: bound - deviation,
    }
}

/// Summary record for one graph experiment.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub vertex_count: usize,
    pub degree: u64,
    pub lambda1: f64,
    pub lambda1_residual: f64,
    pub lambda2_abs: f64,
    pub lambda2_signed: f64,
    pub lambda2_residual: f64,
    pub gershgorin_radius: u64,
    pub decomposition: Option<A2Stats>,
}

impl SpectralReport {
    /// lambda1 = degree and degree >= |lambda2| for a regular graph.
    pub fn consistent(&self, tolerance: f64) -> bool {
        (self.lambda1 - self.degree as f64).abs() <= tolerance * self.degree.max(1) as f64
            && self.lambda2_abs <= self.lambda1 + 1e-6
    }
}

#[derive(Serialize, Deserialize)]
struct GraphSidecar<P> {
    vertex_count: usize,
    declared_degree: Option<u64>,
    payloads: Vec<P>,
}

/// Binary edge list (two little-endian u32 per undirected edge, smaller id
/// first) plus a JSON sidecar holding payloads and the declared degree.
pub fn write_graph<P: Serialize>(
    g: &SparseGraph<P>,
    base: &Path,
) -> Result<(), SpectralError> {
    let io = |e: std::io::Error| SpectralError::Io(e.to_string());
    let mut edges = std::fs::File::create(base.with_extension("edges")).map_err(io)?;
    let mut buf = Vec::with_capacity(g.edge_count() as usize * 8);
    for (v, list) in g.adj.iter().enumerate() {
        for &w in list {
            if (v as u32) < w {
                buf.extend_from_slice(&(v as u32).to_le_bytes());
                buf.extend_from_slice(&w.to_le_bytes());
            }
        }
    }
    edges.write_all(&buf).map_err(io)?;
    let sidecar = GraphSidecarRef {
        vertex_count: g.vertex_count(),
        declared_degree: g.declared_degree,
        payloads: &g.payloads,
    };
    let json = serde_json::to_string(&sidecar).map_err(|e| SpectralError::Io(e.to_string()))?;
    std::fs::write(base.with_extension("json"), json).map_err(io)
}

pub fn read_graph<P: DeserializeOwned>(base: &Path) -> Result<SparseGraph<P>, SpectralError> {
    let io = |e: std::io::Error| SpectralError::Io(e.to_string());
    let sidecar: GraphSidecar<P> = serde_json::from_str(
        &std::fs::read_to_string(base.with_extension("json")).map_err(io)?,
    )
    .map_err(|e| SpectralError::Io(e.to_string()))?;
    let mut raw = Vec::new();
    std::fs::File::open(base.with_extension("edges"))
        .map_err(io)?
        .read_to_end(&mut raw)
        .map_err(io)?;
    if raw.len() % 8 != 0 {
        return Err(SpectralError::Io("truncated edge list".into()));
    }
    let edges: Vec<(u32, u32)> = raw
        .chunks_exact(8)
        .map(|c| {
            (
                u32::from_le_bytes(c[0..4].try_into().unwrap()),
                u32::from_le_bytes(c[4..8].try_into().unwrap()),
            )
        })
        .collect();
    SparseGraph::from_edges(sidecar.payloads, &edges, sidecar.declared_degree)
}

// serde needs Serialize on a reference for the write path
impl<P: Serialize> Serialize for GraphSidecarRef<'_, P> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("GraphSidecar", 3)?;
        st.serialize_field("vertex_count", &self.vertex_count)?;
        st.serialize_field("declared_degree", &self.declared_degree)?;
        st.serialize_field("payloads", self.payloads)?;
        st.end()
    }
}

struct GraphSidecarRef<'a, P> {
    vertex_count: usize,
    declared_degree: Option<u64>,
    payloads: &'a [P],
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_graph(n: u32) -> SparseGraph<()> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j));
            }
        }
        SparseGraph::from_edges(vec![(); n as usize], &edges, Some(n as u64 - 1)).unwrap()
    }

    fn cycle_graph(n: u32) -> SparseGraph<()> {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        SparseGraph::from_edges(vec![(); n as usize], &edges, Some(2)).unwrap()
    }

    #[test]
    fn graph_validation() {
        assert!(SparseGraph::from_edges(vec![(); 2], &[(0, 0)], None).is_err());
        let g = complete_graph(4);
        assert_eq!(g.edge_count(), 6);
        assert_eq!(g.a2_entry(0, 1), 2);
        assert_eq!(g.a2_entry(0, 0), 3);
    }

    #[test]
    fn k4_a2_decomposition_is_exact() {
        // A^2 of K4 is 2J + I, so the error matrix vanishes
        let g = complete_graph(4);
        let stats = a2_decomposition_with(&g, 2, 1, &RowSelection::All);
        assert!(stats.diag_all_zero);
        assert_eq!((stats.row_sum_min, stats.row_sum_max), (0, 0));
        assert!(stats.all_rows_equal);
    }

    #[test]
    fn closed_form_row_sum_p3() {
        // at p = 3 the c_J term vanishes and the row sum is deg^2 - deg
        assert_eq!(a2_row_sum_closed_form(3), 235_710);
    }

    #[test]
    fn gershgorin_examples() {
        let zero = vec![vec![0i64; 3]; 3];
        assert_eq!(gershgorin_bound(&zero).unwrap().spectral_radius_bound, 0);

        let diag = vec![vec![1, 0], vec![0, 5]];
        let b = gershgorin_bound(&diag).unwrap();
        assert_eq!(b.discs, vec![(1, 0), (5, 0)]);
        assert_eq!(b.spectral_radius_bound, 5);

        let swap = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(gershgorin_bound(&swap).unwrap().spectral_radius_bound, 1);

        assert!(matches!(
            gershgorin_bound(&[vec![1, 2]]),
            Err(SpectralError::NonSquare)
        ));
    }

    #[test]
    fn gershgorin_contains_exact_eigenvalues() {
        use nalgebra::DMatrix;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=8usize {
            for _ in 0..5 {
                let mut m = vec![vec![0i64; n]; n];
                for i in 0..n {
                    for j in i..n {
                        let v = rng.gen_range(-9i64..=9);
                        m[i][j] = v;
                        m[j][i] = v;
                    }
                }
                let bound = gershgorin_bound(&m).unwrap();
                let dm = DMatrix::from_fn(n, n, |i, j| m[i][j] as f64);
                let eig = dm.symmetric_eigen();
                for lambda in eig.eigenvalues.iter() {
                    // some disc contains lambda
                    assert!(
                        bound
                            .discs
                            .iter()
                            .any(|&(c, r)| (lambda - c as f64).abs() <= r as f64 + 1e-9),
                        "lambda {lambda} escapes all discs of {m:?}"
                    );
                    assert!(lambda.abs() <= bound.spectral_radius_bound as f64 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn power_iteration_known_spectra() {
        // K_n: lambda1 = n-1, complement spectrum is all -1
        for n in [4u32, 7] {
            let g = complete_graph(n);
            let l1 = dominant_eigenvalue(&g, 1e-9, 10_000).unwrap();
            assert!((l1.value - (n as f64 - 1.0)).abs() < 1e-6);
            let l2 = second_eigenvalue(&g, 1e-8, 10_000).unwrap();
            assert!((l2.value.abs() - 1.0).abs() < 1e-6, "K{n}: {}", l2.value);
        }
        // C4: spectrum {2, 0, 0, -2}; dominant on the complement is -2
        let c4 = cycle_graph(4);
        let l2 = second_eigenvalue(&c4, 1e-8, 10_000).unwrap();
        assert!((l2.value.abs() - 2.0).abs() < 1e-6, "C4: {}", l2.value);
        assert!(l2.residual < 1e-8);
    }

    #[test]
    fn cayley_spectrum_matches_dense_eigensolve_p3() {
        use nalgebra::DMatrix;
        let m = Modulus::zq(3).unwrap();
        let conn = zqgeom::circle(&Vec2::from_ints(m, 0, 0), m.elem(1)).unwrap();
        let spec = cayley_spectrum(&conn, m).unwrap();
        assert_eq!(spec.len(), 729);
        assert_eq!(spec[0], 36.0); // trivial character: |S| exactly

        // exact trace identities
        let (t1, t2) = cayley_trace_identities(&conn, m);
        assert_eq!(t1, 0);
        assert_eq!(t2, 729 * 729 * 36 / 729); // q^2 |S|
        let s1: f64 = spec.iter().sum();
        let s2: f64 = spec.iter().map(|l| l * l).sum();
        assert!(s1.abs() < 1e-6);
        assert!((s2 - (729.0 * 36.0)).abs() < 1e-4);

        // the character sums are the honest adjacency spectrum
        let q = 27u64;
        let idx = |v: (u64, u64)| (v.0 * q + v.1) as usize;
        let conn_raw: Vec<(u64, u64)> = conn.iter().map(|v| v.raw()).collect();
        let mut a = DMatrix::<f64>::zeros(729, 729);
        for v1 in 0..q {
            for v2 in 0..q {
                for &(s1, s2) in &conn_raw {
                    let w = (m.add_raw(v1, s1), m.add_raw(v2, s2));
                    a[(idx((v1, v2)), idx(w))] = 1.0;
                }
            }
        }
        let mut dense: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        dense.sort_unstable_by(|x, y| y.total_cmp(x));
        for (c, d) in spec.iter().zip(&dense) {
            assert!((c - d).abs() < 1e-6, "character {c} vs dense {d}");
        }
    }

    #[test]
    fn cayley_rejects_asymmetric_sets() {
        let m = Modulus::zq(3).unwrap();
        let conn = vec![Vec2::from_ints(m, 1, 0)];
        assert!(matches!(
            cayley_spectrum(&conn, m),
            Err(SpectralError::AsymmetricConnectionSet)
        ));
    }

    #[test]
    fn mixing_extremes() {
        let g = complete_graph(5);
        let all: Vec<u32> = (0..5).collect();
        let r = mixing_check(&g, &all, &all, 1.0);
        assert_eq!(r.e_st, 20); // delta * n
        assert!(r.deviation < 1e-9);
        assert!(r.holds);

        let r = mixing_check(&g, &[], &[], 1.0);
        assert_eq!(r.e_st, 0);
        assert!(r.holds);
    }

    #[test]
    fn graph_io_round_trip() {
        let g = SparseGraph::from_edges(
            vec![10u64, 20, 30, 40],
            &[(0, 1), (1, 2), (2, 3), (3, 0)],
            Some(2),
        )
        .unwrap();
        let dir = std::env::temp_dir().join(format!("sumbis_graph_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let base = dir.join("toy");
        write_graph(&g, &base).unwrap();
        let back: SparseGraph<u64> = read_graph(&base).unwrap();
        assert_eq!(back.vertex_count(), 4);
        assert_eq!(back.payloads(), g.payloads());
        for v in 0..4u32 {
            assert_eq!(back.neighbors(v), g.neighbors(v));
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
