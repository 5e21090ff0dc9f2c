//! Brute-force reference implementations and dataset helpers shared by the
//! integration tests. Each oracle follows the textbook definition and shares no
//! code with the library.

#![allow(dead_code)]

use std::path::PathBuf;

use synthcal::pipeline::{load_prepared, PipelineConfig};
use synthcal::Prepared;

/// Exact empirical optimal-transport cost between two uniform point clouds on
/// the line, solved as a min-cost flow with integer masses: every point of `a`
/// carries `b.len()` units and every point of `b` carries `a.len()` units.
/// Successive shortest paths with Bellman-Ford on the residual graph.
pub fn transport_wd(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let (src, sink) = (n + m, n + m + 1);
    let nodes = n + m + 2;
    // edge: (to, capacity, cost, reverse index)
    type Graph = Vec<Vec<(usize, i64, f64, usize)>>;
    fn add(g: &mut Graph, u: usize, v: usize, cap: i64, cost: f64) {
        let ru = g[v].len();
        let rv = g[u].len();
        g[u].push((v, cap, cost, ru));
        g[v].push((u, 0, -cost, rv));
    }
    let mut graph: Graph = vec![Vec::new(); nodes];
    for i in 0..n {
        add(&mut graph, src, i, m as i64, 0.0);
        for j in 0..m {
            add(&mut graph, i, n + j, i64::MAX / 4, (a[i] - b[j]).abs());
        }
    }
    for j in 0..m {
        add(&mut graph, n + j, sink, n as i64, 0.0);
    }
    let total = (n * m) as i64;
    let mut flow = 0i64;
    let mut cost = 0.0;
    while flow < total {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        dist[src] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for u in 0..nodes {
                if dist[u].is_infinite() {
                    continue;
                }
                for (k, &(v, cap, c, _)) in graph[u].iter().enumerate() {
                    if cap > 0 && dist[u] + c < dist[v] - 1e-15 {
                        dist[v] = dist[u] + c;
                        prev[v] = Some((u, k));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        assert!(dist[sink].is_finite(), "flow network disconnected");
        let mut push = total - flow;
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            push = push.min(graph[u][k].1);
            v = u;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            let rev = graph[u][k].3;
            graph[u][k].1 -= push;
            graph[v][rev].1 += push;
            cost += push as f64 * graph[u][k].2;
            v = u;
        }
        flow += push;
    }
    cost / total as f64
}

/// Supremum of |F_a − F_b| evaluated at every pooled sample point.
pub fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |s: &[f64], t: f64| s.iter().filter(|&&v| v <= t).count();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    a.iter()
        .chain(b)
        .map(|&t| (cdf(a, t) as f64 / na - cdf(b, t) as f64 / nb).abs())
        .fold(0.0, f64::max)
}

/// Quantile map written from the definition: the piecewise-linear real
/// quantile function through the points `((k + 0.5) / m, r_(k))`, flat beyond
/// the end points, evaluated at `(rank + 0.5) / n_s`. Ranks order synthetic
/// values by (value, position); brackets are found by integer comparison.
pub fn brute_quantile_map(synth: &[f64], real: &[f64]) -> Vec<f64> {
    let mut r = real.to_vec();
    // insertion sort
    for i in 1..r.len() {
        let mut k = i;
        while k > 0 && r[k - 1] > r[k] {
            r.swap(k - 1, k);
            k -= 1;
        }
    }
    let (n_s, m) = (synth.len() as i128, r.len() as i128);
    synth
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let rank = synth
                .iter()
                .enumerate()
                .filter(|&(j, &y)| y < x || (y == x && j < i))
                .count() as i128;
            // p = (2 rank + 1) / (2 n_s); knot k sits at (2k + 1) / (2m)
            let p_num_m = (2 * rank + 1) * m;
            let knot = |k: i128| (2 * k + 1) * n_s;
            if p_num_m <= knot(0) {
                return r[0];
            }
            if p_num_m >= knot(m - 1) {
                return r[(m - 1) as usize];
            }
            let mut k = 0;
            while knot(k + 1) <= p_num_m {
                k += 1;
            }
            let den = 2 * n_s;
            let num = p_num_m - knot(k);
            if num == 0 {
                r[k as usize]
            } else {
                let t = num as f64 / den as f64;
                r[k as usize] + t * (r[k as usize + 1] - r[k as usize])
            }
        })
        .collect()
}

/// Leave-one-out 1-NN accuracy over the pooled rows, smallest index on ties.
pub fn brute_nnaa(real: &[Vec<f64>], synth: &[Vec<f64>]) -> f64 {
    let pool: Vec<(&Vec<f64>, bool)> = real
        .iter()
        .map(|r| (r, true))
        .chain(synth.iter().map(|s| (s, false)))
        .collect();
    let mut correct = 0;
    for (i, (p, label)) in pool.iter().enumerate() {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, (q, _)) in pool.iter().enumerate() {
            if i == j {
                continue;
            }
            let d: f64 = p.iter().zip(q.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
            if d < best.0 {
                best = (d, j);
            }
        }
        if pool[best.1].1 == *label {
            correct += 1;
        }
    }
    100.0 * correct as f64 / pool.len() as f64
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn original_config() -> PipelineConfig {
    PipelineConfig {
        dataset: data_dir().join("breast-cancer-wisconsin.csv"),
        target: "class".into(),
        missing_token: "?".into(),
        ..PipelineConfig::default()
    }
}

pub fn diagnostic_config() -> PipelineConfig {
    PipelineConfig {
        dataset: data_dir().join("wdbc.csv"),
        target: "diagnosis".into(),
        ..PipelineConfig::default()
    }
}

pub fn prepared(config: &PipelineConfig) -> Prepared {
    load_prepared(config).expect("dataset loads")
}
