//! Hard-assignment heuristics that seed the soft iteration.
//!
//! For a deterministic encoder `I(X; X̂) = H(X̂)`, so the Lagrangian splits
//! into per-cluster terms and a merge or a single-symbol move only touches
//! two of them.

use super::problem::Problem;
use crate::scalar::Scalar;

struct Clusters<T> {
    ny: usize,
    mass: Vec<T>,
    rows: Vec<T>,
}

impl<T: Scalar> Clusters<T> {
    fn row(&self, c: usize) -> &[T] {
        &self.rows[c * self.ny..(c + 1) * self.ny]
    }
}

/// Contribution of one cluster with mass `q` and joint row `p(c, ·)`.
fn term<T: Scalar>(p: &Problem<T>, q: T, row: &[T]) -> T {
    if q <= T::zero() {
        return T::zero();
    }
    let mut rel = T::zero();
    for (&v, &py) in row.iter().zip(&p.py) {
        if v > T::zero() {
            rel = rel + v * (v / (q * py)).log2();
        }
    }
    -q * q.log2() - p.beta * rel
}

fn merged_term<T: Scalar>(p: &Problem<T>, qa: T, ra: &[T], qb: T, rb: &[T]) -> T {
    let row: Vec<T> = ra.iter().zip(rb).map(|(&a, &b)| a + b).collect();
    term(p, qa + qb, &row)
}

/// Greedy bottom-up merging starting from one cluster per symbol. Returns the
/// lowest-Lagrangian assignment with at most `k` clusters seen on the way
/// down to a single cluster.
pub(crate) fn agglomerate<T: Scalar>(p: &Problem<T>, k: usize) -> Vec<usize> {
    let ny = p.ny;
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut mass = Vec::new();
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut idle = Vec::new();
    for x in 0..p.nx {
        if p.px[x] > T::zero() {
            members.push(vec![x]);
            mass.push(p.px[x]);
            rows.push(p.pxy[x * ny..(x + 1) * ny].to_vec());
        } else {
            idle.push(x);
        }
    }
    if let Some(first) = members.first_mut() {
        first.extend(idle);
    }

    let terms: Vec<T> = (0..members.len())
        .map(|c| term(p, mass[c], &rows[c]))
        .collect();
    let mut terms = terms;
    let mut alive = vec![true; members.len()];
    let n = members.len();
    // Cost of merging a and b, for a < b.
    let mut cost = vec![T::infinity(); n * n];
    for a in 0..n {
        for b in a + 1..n {
            cost[a * n + b] =
                merged_term(p, mass[a], &rows[a], mass[b], &rows[b]) - terms[a] - terms[b];
        }
    }

    let snapshot = |members: &[Vec<usize>], alive: &[bool]| -> Vec<usize> {
        let mut assign = vec![0; p.nx];
        for (label, c) in (0..members.len()).filter(|&c| alive[c]).enumerate() {
            for &x in &members[c] {
                assign[x] = label;
            }
        }
        assign
    };

    let mut count = n;
    let mut total: T = terms.iter().copied().sum();
    let mut best: Option<(T, Vec<usize>)> = None;
    if count <= k {
        best = Some((total, snapshot(&members, &alive)));
    }
    while count > 1 {
        let mut pick = (T::infinity(), 0, 0);
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in a + 1..n {
                if alive[b] && cost[a * n + b] < pick.0 {
                    pick = (cost[a * n + b], a, b);
                }
            }
        }
        let (delta, a, b) = pick;
        if delta.is_infinite() {
            break;
        }
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        mass[a] = mass[a] + mass[b];
        let rb = std::mem::take(&mut rows[b]);
        for (acc, v) in rows[a].iter_mut().zip(rb) {
            *acc = *acc + v;
        }
        alive[b] = false;
        terms[a] = term(p, mass[a], &rows[a]);
        total = total + delta;
        count -= 1;
        for c in 0..n {
            if alive[c] && c != a {
                let (lo, hi) = if c < a { (c, a) } else { (a, c) };
                cost[lo * n + hi] = merged_term(p, mass[lo], &rows[lo], mass[hi], &rows[hi])
                    - terms[lo]
                    - terms[hi];
            }
        }
        if count <= k && best.as_ref().is_none_or(|(v, _)| total < *v) {
            best = Some((total, snapshot(&members, &alive)));
        }
    }
    best.map_or_else(|| vec![0; p.nx], |(_, a)| a)
}

/// Sequential single-symbol reassignment until no move lowers the Lagrangian.
pub(crate) fn sequential_refine<T: Scalar>(
    p: &Problem<T>,
    mut assign: Vec<usize>,
    k: usize,
) -> Vec<usize> {
    let ny = p.ny;
    let mut cl = Clusters {
        ny,
        mass: vec![T::zero(); k],
        rows: vec![T::zero(); k * ny],
    };
    for (x, &c) in assign.iter().enumerate() {
        cl.mass[c] = cl.mass[c] + p.px[x];
        for y in 0..ny {
            cl.rows[c * ny + y] = cl.rows[c * ny + y] + p.pxy[x * ny + y];
        }
    }
    let eps = T::of(1e-14);
    let mut scratch = vec![T::zero(); ny];
    for _sweep in 0..200 {
        let mut moved = false;
        for x in 0..p.nx {
            if p.px[x] <= T::zero() {
                continue;
            }
            let xrow = &p.pxy[x * ny..(x + 1) * ny];
            let from = assign[x];
            // Remove x from its cluster.
            cl.mass[from] = cl.mass[from] - p.px[x];
            for y in 0..ny {
                cl.rows[from * ny + y] = cl.rows[from * ny + y] - xrow[y];
            }
            let removed_from = term(p, cl.mass[from], cl.row(from));

            let mut best = (T::infinity(), from);
            for c in 0..k {
                let before = if c == from {
                    removed_from
                } else {
                    term(p, cl.mass[c], cl.row(c))
                };
                for y in 0..ny {
                    scratch[y] = cl.rows[c * ny + y] + xrow[y];
                }
                let after = term(p, cl.mass[c] + p.px[x], &scratch);
                let mut gain = after - before;
                if c == from {
                    // Staying put wins near-ties.
                    gain = gain - eps;
                }
                if gain < best.0 {
                    best = (gain, c);
                }
            }
            let to = best.1;
            cl.mass[to] = cl.mass[to] + p.px[x];
            for y in 0..ny {
                cl.rows[to * ny + y] = cl.rows[to * ny + y] + xrow[y];
            }
            if to != from {
                assign[x] = to;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    assign
}
