use super::{mu_of_triple, weight_product, Partial};
use crate::accum::{tree_reduce, CompensatedComplex};
use crate::collection::Materialized;
use rayon::prelude::*;

/// Literal triple loop over `supp(u) x supp(v) x N3`.
pub(super) fn run(mat: &Materialized, shard: usize) -> Partial {
    let m = mat.target_m as i128;
    let parts: Vec<Partial> = mat
        .a
        .par_chunks(shard.max(1))
        .map(|chunk| {
            let mut exact = 0i128;
            let mut approx = CompensatedComplex::new();
            let mut visited = 0u64;
            for a in chunk {
                for b in &mat.b {
                    for c in &mat.n3 {
                        visited += 1;
                        if a.image as i128 + b.image as i128 + c.wp as i128 != m {
                            continue;
                        }
                        let mu = mu_of_triple([a.n, b.n, c.n], [a.mu, b.mu, c.mu]);
                        if mu == 0 {
                            continue;
                        }
                        let (wi, wc) = weight_product(a, b);
                        if mat.integral {
                            exact += (wi * mu as i64) as i128;
                        } else {
                            approx.add(wc * mu as f64);
                        }
                    }
                }
            }
            Partial {
                exact,
                approx: approx.value(),
                visited,
            }
        })
        .collect();
    tree_reduce(parts, Partial::default())
}
