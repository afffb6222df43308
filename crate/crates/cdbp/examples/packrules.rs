// Scratch comparison of greedy placement rules for the static packing core.

use cdbp::model::count_servers;
use cdbp::workloads::{generate, server_catalog, vm_catalog, SyntheticSpec};

#[derive(Clone, Copy)]
enum Rule {
    TightTotal,
    TightMax,
    DotMin,
    CopiesFreshTightTotal,
    SameShapeThenTight,
}

fn packs(cap: &[f64], dem: &[f64]) -> usize {
    (0..cap.len())
        .map(|d| {
            if dem[d] == 0.0 {
                usize::MAX
            } else {
                (cap[d] / dem[d]).floor() as usize
            }
        })
        .min()
        .unwrap_or(0)
}

fn pack(items: &[Vec<f64>], rule: Rule) -> usize {
    let types: Vec<Vec<f64>> = server_catalog()
        .iter()
        .map(|t| t.capacity.to_f64s())
        .collect();
    let dims = types[0].len();
    // opened: (type, remaining, shape counts)
    let mut opened: Vec<(usize, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let size = |i: usize| -> f64 {
            items[i]
                .iter()
                .zip([16.0, 64.0, 320.0])
                .map(|(v, m)| v / m)
                .sum()
        };
        size(b).partial_cmp(&size(a)).unwrap()
    });
    for &i in &order {
        let dem = &items[i];
        let mut best: Option<(f64, usize)> = None;
        for (slot, (ty, rem, _)) in opened.iter().enumerate() {
            if (0..dims).all(|d| rem[d] >= dem[d] - 1e-9) {
                let cap = &types[*ty];
                let score = match rule {
                    Rule::TightTotal | Rule::CopiesFreshTightTotal => {
                        (0..dims).map(|d| (rem[d] - dem[d]) / cap[d]).sum::<f64>()
                    }
                    Rule::TightMax => (0..dims)
                        .map(|d| (rem[d] - dem[d]) / cap[d])
                        .fold(0.0f64, f64::max),
                    Rule::DotMin => (0..dims)
                        .map(|d| (rem[d] - dem[d]) / cap[d] * dem[d] / cap[d])
                        .sum::<f64>(),
                    Rule::SameShapeThenTight => {
                        let same = opened[slot].2 == *dem;
                        let tight: f64 =
                            (0..dims).map(|d| (rem[d] - dem[d]) / cap[d]).sum::<f64>();
                        if same {
                            tight - 10.0
                        } else {
                            tight
                        }
                    }
                };
                if best.map_or(true, |(s, _)| score < s) {
                    best = Some((score, slot));
                }
            }
        }
        let fresh_score = |ty: usize| -> f64 {
            let cap = &types[ty];
            match rule {
                Rule::CopiesFreshTightTotal => {
                    let copies = packs(cap, dem) as f64;
                    let tight: f64 = (0..dims).map(|d| (cap[d] - dem[d]) / cap[d]).sum();
                    -copies * 10.0 + tight
                }
                _ => (0..dims).map(|d| (cap[d] - dem[d]) / cap[d]).sum(),
            }
        };
        // fresh always considered worse than any fitting opened (first fit bias)
        match best {
            Some((_, slot)) => {
                for d in 0..dims {
                    opened[slot].1[d] -= dem[d];
                }
                opened[slot].2 = dem.clone();
            }
            None => {
                let ty = (0..types.len())
                    .filter(|&t| (0..dims).all(|d| types[t][d] >= dem[d]))
                    .min_by(|&a, &b| fresh_score(a).partial_cmp(&fresh_score(b)).unwrap())
                    .unwrap();
                let mut rem = types[ty].clone();
                for d in 0..dims {
                    rem[d] -= dem[d];
                }
                opened.push((ty, rem, dem.clone()));
            }
        }
    }
    opened.len()
}

fn main() {
    let _ = vm_catalog();
    let _ = count_servers;
    let mut sums = [0.0f64; 5];
    let seeds = 10;
    for seed in 0..seeds {
        let vms = generate(&SyntheticSpec::with_defaults(216, seed)).unwrap();
        let items: Vec<Vec<f64>> = vms.iter().map(|v| v.demand.to_f64s()).collect();
        for (k, rule) in [
            Rule::TightTotal,
            Rule::TightMax,
            Rule::DotMin,
            Rule::CopiesFreshTightTotal,
            Rule::SameShapeThenTight,
        ]
        .into_iter()
        .enumerate()
        {
            sums[k] += pack(&items, rule) as f64;
        }
    }
    for (name, sum) in [
        "tight-total",
        "tight-max",
        "dot-min",
        "copies-fresh",
        "same-shape",
    ]
    .iter()
    .zip(sums)
    {
        println!("{name:14} mean {:.2}", sum / seeds as f64);
    }
}
