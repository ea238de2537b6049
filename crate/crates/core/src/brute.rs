//! Independent brute-force oracles for tests: exhaustive Q minimization over
//! binary coordinates, a naive RBF kernel-sum scorer, and exhaustive shortest
//! reference-chain search on small documents. Not for production use.

use std::collections::BTreeMap;

use crate::fs_attack::{cost, AttackMode, FsAttackConfig, FsAttackError};
use crate::learner::DecisionModel;
use crate::pdf::{ObjId, PdfDocument};

#[derive(Debug, Clone, PartialEq)]
pub struct BruteResult {
    pub optimum: f64,
    pub argmin: Vec<f64>,
    pub enumerated: u64,
}

const ENUM_CAP: u64 = 1 << 20;

/// Exact global minimum of Q(x) = f(x) + lambda * c(x_M, x) subject to the
/// config's conserved / insertion-only constraints, by full enumeration of
/// every free coordinate's candidate values (mixed-radix counter).
pub fn brute_force_q(
    model: &dyn DecisionModel,
    x_m: &[f64],
    cfg: &FsAttackConfig,
) -> Result<BruteResult, FsAttackError> {
    let dim = x_m.len();
    if cfg.conserved.iter().any(|i| *i >= dim) {
        return Err(FsAttackError::DimensionMismatch);
    }
    let mut free: Vec<(usize, Vec<f64>)> = Vec::new();
    for i in 0..dim {
        if cfg.conserved.contains(&i) {
            continue;
        }
        let mut vals = match &cfg.mode {
            AttackMode::Binary => vec![0.0, 1.0],
            AttackMode::RealGrid { grids } => grids[i].clone(),
        };
        if cfg.insertion_only {
            vals.retain(|v| *v >= x_m[i]);
        }
        if !vals.iter().any(|v| *v == x_m[i]) {
            vals.push(x_m[i]);
        }
        free.push((i, vals));
    }
    let total: u64 = free
        .iter()
        .try_fold(1u64, |acc, (_, vals)| {
            acc.checked_mul(vals.len() as u64)
                .filter(|t| *t <= ENUM_CAP)
        })
        .ok_or(FsAttackError::TooLarge(free.len()))?;

    let mut x = x_m.to_vec();
    let mut counter = vec![0usize; free.len()];
    let mut best_q = f64::INFINITY;
    let mut best_x = x_m.to_vec();
    for _ in 0..total {
        for (slot, (i, vals)) in free.iter().enumerate() {
            x[*i] = vals[counter[slot]];
        }
        let q = model.decision(&x) + cfg.lambda * cost(x_m, &x)?;
        if q < best_q {
            best_q = q;
            best_x = x.clone();
        }
        for slot in 0..counter.len() {
            counter[slot] += 1;
            if counter[slot] < free[slot].1.len() {
                break;
            }
            counter[slot] = 0;
        }
    }
    if free.is_empty() {
        best_q = model.decision(x_m) + 0.0;
        best_x = x_m.to_vec();
    }
    Ok(BruteResult {
        optimum: best_q,
        argmin: best_x,
        enumerated: total,
    })
}

/// Direct kernel-sum RBF score, written independently of `SvmModel::score`.
pub fn naive_rbf_score(
    support_vectors: &[Vec<f64>],
    dual_coefs: &[f64],
    bias: f64,
    gamma: f64,
    x: &[f64],
) -> f64 {
    let mut f = bias;
    for (sv, coef) in support_vectors.iter().zip(dual_coefs) {
        let d2: f64 = sv.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        f += coef * (-gamma * d2).exp();
    }
    f
}

/// Minimum structural-path length (dictionary-key components; arrays are
/// transparent) from the Catalog to each reachable object, by Dijkstra over
/// the reference graph with per-reference key-nesting weights. This is the
/// quantity the reduced tree's first-visit-wins rule is supposed to minimize.
pub fn shortest_component_depth(doc: &PdfDocument) -> BTreeMap<ObjId, usize> {
    use crate::pdf::PdfValue;

    // (target, weight) for every reference inside `value`; a bare
    // reference-to-reference object body yields no edge, matching the
    // tree's single-level resolution.
    fn edges(value: &PdfValue, depth: usize, out: &mut Vec<(ObjId, usize)>) {
        match value {
            PdfValue::Dictionary(d) => {
                for (_, v) in d.iter() {
                    edges(v, depth + 1, out);
                }
            }
            PdfValue::Stream(s) => {
                for (_, v) in s.dict.iter() {
                    edges(v, depth + 1, out);
                }
            }
            PdfValue::Array(items) => {
                for v in items {
                    edges(v, depth, out);
                }
            }
            PdfValue::Reference(id) if depth > 0 => out.push((*id, depth)),
            _ => {}
        }
    }

    let mut dist = BTreeMap::new();
    let Some(root) = doc.root_id() else {
        return dist;
    };
    dist.insert(root, 0usize);
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(std::cmp::Reverse((0usize, root)));
    while let Some(std::cmp::Reverse((d, id))) = heap.pop() {
        if dist.get(&id) != Some(&d) {
            continue;
        }
        let Some(value) = doc.objects.get(&id) else {
            continue;
        };
        let mut out = Vec::new();
        edges(value, 0, &mut out);
        for (target, weight) in out {
            if !doc.objects.contains_key(&target) {
                continue;
            }
            let cand = d + weight;
            if dist.get(&target).map_or(true, |cur| cand < *cur) {
                dist.insert(target, cand);
                heap.push(std::cmp::Reverse((cand, target)));
            }
        }
    }
    dist
}
