use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use resgraph::{DistanceMeasure, FeatureVector, MeasureKind, ProteinGraph, NUM_ATTRIBUTES};

// ---------------------------------------------------------------------------
// Exact spectrum: characteristic polynomial, squarefree factorization and
// bisection on integer-scaled arguments.

/// Fixed-point scale for root isolation: x is represented as m / 2^SCALE.
const SCALE: u32 = 60;

type Poly = Vec<BigRational>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn degree(p: &Poly) -> usize {
    p.len() - 1
}

fn is_constant(p: &Poly) -> bool {
    p.len() == 1
}

fn derivative(p: &Poly) -> Poly {
    if p.len() == 1 {
        return vec![BigRational::zero()];
    }
    (1..p.len()).map(|i| &p[i] * BigRational::from_integer(BigInt::from(i))).collect()
}

fn sub(a: &Poly, b: &Poly) -> Poly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

fn divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let db = degree(b);
    if degree(a) < db {
        return (vec![BigRational::zero()], a.clone());
    }
    let mut r = a.clone();
    let mut q = vec![BigRational::zero(); degree(a) - db + 1];
    for shift in (0..q.len()).rev() {
        let c = &r[shift + db] / &b[db];
        for i in 0..=db {
            r[i + shift] = &r[i + shift] - &c * &b[i];
        }
        q[shift] = c;
    }
    r.truncate(db);
    if r.is_empty() {
        r.push(BigRational::zero());
    }
    (trim(q), trim(r))
}

fn monic(p: Poly) -> Poly {
    let lead = p.last().unwrap().clone();
    p.into_iter().map(|c| c / &lead).collect()
}

fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !(b.len() == 1 && b[0].is_zero()) {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = r;
    }
    monic(a)
}

fn exact_div(a: &Poly, b: &Poly) -> Poly {
    let (q, r) = divrem(a, b);
    assert!(r.len() == 1 && r[0].is_zero(), "inexact polynomial division");
    q
}

/// Characteristic polynomial det(xI − A), coefficients low to high, by the
/// Faddeev–LeVerrier recurrence in exact integer arithmetic.
pub fn characteristic_polynomial(adj: &[Vec<i64>]) -> Vec<i128> {
    let n = adj.len();
    let mut c = vec![0i128; n + 1];
    c[n] = 1;
    let mut m = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0i128;
                for l in 0..n {
                    s += adj[i][l] as i128 * m[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let mut tr = 0i128;
        for i in 0..n {
            for l in 0..n {
                tr += adj[i][l] as i128 * m[l][i];
            }
        }
        assert_eq!(tr % k as i128, 0);
        c[n - k] = -tr / k as i128;
    }
    c
}

/// Squarefree factors with multiplicities (Yun).
fn squarefree_factors(f: &Poly) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    let f = monic(f.clone());
    if is_constant(&f) {
        return out;
    }
    let df = derivative(&f);
    let a0 = gcd(&f, &df);
    let mut b = exact_div(&f, &a0);
    let c = exact_div(&df, &a0);
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    while !is_constant(&b) {
        let a = gcd(&b, &d);
        let nb = exact_div(&b, &a);
        let nc = exact_div(&d, &a);
        d = sub(&nc, &derivative(&nb));
        b = nb;
        if !is_constant(&a) {
            out.push((a, i));
        }
        i += 1;
    }
    out
}

/// Integer polynomial proportional to `p`.
fn integer_poly(p: &Poly) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for c in p {
        let d = c.denom().clone();
        let g = num_integer_gcd(&lcm, &d);
        lcm = &lcm / g * d;
    }
    p.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Sign of p(m / 2^SCALE), evaluated exactly.
fn sign_at(p: &[BigInt], m: &BigInt) -> i32 {
    let d = p.len() - 1;
    let mut acc = BigInt::zero();
    let mut mp = BigInt::one();
    for (i, c) in p.iter().enumerate() {
        acc += c * &mp * (BigInt::one() << (SCALE as usize * (d - i)));
        mp *= m;
    }
    if acc.is_zero() {
        0
    } else if acc.is_positive() {
        1
    } else {
        -1
    }
}

fn bisect(p: &[BigInt], mut lo: BigInt, mut hi: BigInt) -> BigInt {
    let (slo, shi) = (sign_at(p, &lo), sign_at(p, &hi));
    if slo == 0 {
        return lo;
    }
    if shi == 0 {
        return hi;
    }
    assert!(slo != shi, "root is not bracketed");
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        let s = sign_at(p, &mid);
        if s == 0 {
            return mid;
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Roots of a squarefree, real-rooted polynomial, ascending, as scaled
/// integers. Roots of the derivative separate consecutive roots.
fn real_roots(p: &Poly, bound: &BigInt) -> Vec<BigInt> {
    let ip = integer_poly(p);
    match degree(p) {
        0 => Vec::new(),
        _ => {
            let critical = if degree(p) == 1 {
                Vec::new()
            } else {
                let dp = derivative(p);
                real_roots(&dp, bound)
            };
            let mut edges = vec![-bound.clone()];
            edges.extend(critical);
            edges.push(bound.clone());
            edges.windows(2).map(|w| bisect(&ip, w[0].clone(), w[1].clone())).collect()
        }
    }
}

/// Adjacency spectrum of `g`, descending, with multiplicities, plus the
/// exact number of distinct eigenvalues.
pub fn exact_spectrum(g: &ProteinGraph) -> (Vec<f64>, usize) {
    let n = g.node_count();
    let adj: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(g.has_edge(i, j))).collect())
        .collect();
    let cp: Poly = characteristic_polynomial(&adj)
        .into_iter()
        .map(|c| BigRational::from_integer(BigInt::from(c)))
        .collect();
    // Every eigenvalue of a 0/1 adjacency matrix lies in [−n, n].
    let bound = BigInt::from(n as u64 + 1) << SCALE as usize;
    let mut values = Vec::new();
    let mut distinct = 0;
    for (factor, mult) in squarefree_factors(&cp) {
        distinct += degree(&factor);
        let factor_roots = real_roots(&factor, &bound);
        assert_eq!(factor_roots.len(), degree(&factor));
        for m in factor_roots {
            let x = m.to_f64().unwrap() / 2f64.powi(SCALE as i32);
            values.extend(std::iter::repeat_n(x, mult));
        }
    }
    assert_eq!(values.len(), n);
    values.sort_by(|a, b| b.total_cmp(a));
    (values, distinct)
}

// ---------------------------------------------------------------------------
// Naive descriptors.

/// Hop distances by repeated boolean products of (A + I); `None` when
/// unreachable.
pub fn hop_distances(g: &ProteinGraph) -> Vec<Vec<Option<u32>>> {
    let n = g.node_count();
    let step: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || g.has_edge(i, j)).collect()).collect();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
    let mut dist: Vec<Vec<Option<u32>>> = (0..n).map(|i| (0..n).map(|j| (i == j).then_some(0)).collect()).collect();
    for p in 1..n.max(1) as u32 {
        let next: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|l| reach[i][l] && step[l][j])).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                if next[i][j] && dist[i][j].is_none() {
                    dist[i][j] = Some(p);
                }
            }
        }
        reach = next;
    }
    dist
}

pub fn naive_features(g: &ProteinGraph) -> [f64; NUM_ATTRIBUTES] {
    let n = g.node_count();
    let nf = n as f64;
    let adj = |i: usize, j: usize| g.has_edge(i, j);
    let deg: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| adj(i, j)).count()).collect();
    let m = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| adj(i, j)).count();

    let mut clustering = 0.0;
    for u in 0..n {
        let mut triangles = 0usize;
        for v in 0..n {
            for w in (v + 1)..n {
                if adj(u, v) && adj(u, w) && adj(v, w) {
                    triangles += 1;
                }
            }
        }
        let k = deg[u];
        if k >= 2 {
            clustering += 2.0 * triangles as f64 / (k * (k - 1)) as f64;
        }
    }

    let dist = hop_distances(g);
    let mut ecc = vec![0u32; n];
    let mut closeness = vec![0.0; n];
    for u in 0..n {
        let others: Vec<u32> = (0..n).filter(|&v| v != u).filter_map(|v| dist[u][v]).collect();
        ecc[u] = others.iter().copied().max().unwrap_or(0);
        let total: u32 = others.iter().sum();
        if total > 0 {
            closeness[u] = others.len() as f64 / total as f64;
        }
    }
    let e_max = *ecc.iter().max().unwrap();
    let e_min = *ecc.iter().min().unwrap();

    let (spectrum, distinct) = exact_spectrum(g);
    let radius = spectrum.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let second = if n == 1 { spectrum[0] } else { spectrum[1] };

    let mut impurity = 0.0;
    for u in 0..n {
        let labels: BTreeSet<&str> = (0..n).filter(|&v| adj(u, v) && g.label(v) != g.label(u)).map(|v| g.label(v)).collect();
        impurity += labels.len() as f64;
    }
    let impure_edges = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .filter(|&(i, j)| adj(i, j) && g.label(i) != g.label(j))
        .count();
    let mut label_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for u in 0..n {
        *label_counts.entry(g.label(u)).or_default() += 1;
    }
    let entropy: f64 = label_counts
        .values()
        .map(|&c| {
            let p = c as f64 / nf;
            -p * p.log2()
        })
        .sum();

    [
        nf,
        m as f64,
        2.0 * m as f64 / nf,
        if n > 1 { 2.0 * m as f64 / (nf * (nf - 1.0)) } else { 0.0 },
        clustering / nf,
        ecc.iter().map(|&e| e as f64).sum::<f64>() / nf,
        e_max as f64,
        e_min as f64,
        closeness.iter().sum::<f64>() / nf,
        ecc.iter().filter(|&&e| e == e_min).count() as f64 / nf,
        deg.iter().filter(|&&d| d == 1).count() as f64 / nf,
        distinct as f64,
        radius,
        second,
        spectrum.iter().map(|x| x * x).sum(),
        impurity / nf,
        if m > 0 { impure_edges as f64 / m as f64 } else { 0.0 },
        entropy,
    ]
}

// ---------------------------------------------------------------------------
// Full-sort nearest neighbors.

#[derive(Debug, PartialEq)]
pub struct OraclePrediction {
    pub neighbor_ids: Vec<String>,
    pub predicted_class: String,
}

/// Normalizes everything from scratch, sorts every row by (distance, id) and
/// votes over the first `k`.
pub fn knn_full_sort(
    rows: &[FeatureVector],
    query: &[f64; NUM_ATTRIBUTES],
    k: usize,
    kind: MeasureKind,
    mask: &[usize],
) -> OraclePrediction {
    let scaled = |j: usize, x: f64| {
        let lo = rows.iter().map(|r| r.values[j]).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r.values[j]).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            (x - lo) / (hi - lo)
        } else {
            0.0
        }
    };
    let matrix: Vec<Vec<f64>> = rows.iter().map(|r| mask.iter().map(|&j| scaled(j, r.values[j])).collect()).collect();
    let q: Vec<f64> = mask.iter().map(|&j| scaled(j, query[j])).collect();
    let nrows = rows.len() as f64;
    let variances: Vec<f64> = (0..mask.len())
        .map(|c| {
            let mean = matrix.iter().map(|r| r[c]).sum::<f64>() / nrows;
            matrix.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / nrows
        })
        .collect();
    let measure = DistanceMeasure::new(kind).with_variances(variances);
    let mut scored: Vec<(f64, &str, &str)> = rows
        .iter()
        .zip(&matrix)
        .map(|(r, x)| {
            (
                measure.distance(&q, x).unwrap(),
                r.structure_id.as_str(),
                r.label.as_deref().unwrap(),
            )
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    scored.truncate(k);

    let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
    for &(_, _, class) in &scored {
        *votes.entry(class).or_default() += 1;
    }
    let best = *votes.values().max().unwrap();
    let winner = scored
        .iter()
        .filter(|(_, _, c)| votes[c] == best)
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(b.2)))
        .unwrap()
        .2;
    OraclePrediction {
        neighbor_ids: scored.iter().map(|s| s.1.to_string()).collect(),
        predicted_class: winner.to_string(),
    }
}
