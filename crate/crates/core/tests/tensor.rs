use std::collections::HashMap;

use matnc_core::tensor::{contract_pair, contract_pair_capped, fix_index, fix_indices, pair_cost, TensorError};
use matnc_core::{DenseTensor, Index, IndexId, C64};
use proptest::prelude::*;

fn t(ids: &[(u32, usize)], data: Vec<C64>) -> DenseTensor {
    DenseTensor::new(ids.iter().map(|&(id, d)| Index::new(id, d)).collect(), data).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Sum over every assignment of the union of indices, written element by element.
fn loop_oracle(a: &DenseTensor, b: &DenseTensor) -> DenseTensor {
    let mut dims: HashMap<IndexId, usize> = HashMap::new();
    for ix in a.indices().iter().chain(b.indices()) {
        dims.insert(ix.id, ix.dim);
    }
    let shared: Vec<IndexId> = a.indices().iter().filter(|ix| b.has_index(ix.id)).map(|ix| ix.id).collect();
    let free: Vec<Index> = a
        .indices()
        .iter()
        .filter(|ix| !b.has_index(ix.id))
        .chain(b.indices().iter().filter(|ix| !a.has_index(ix.id)))
        .copied()
        .collect();
    let mut all: Vec<IndexId> = free.iter().map(|ix| ix.id).collect();
    all.extend(&shared);
    let total: usize = all.iter().map(|id| dims[id]).product();
    let out_len: usize = free.iter().map(|ix| ix.dim).product();
    let mut out = vec![c(0.0, 0.0); out_len];
    let mut value: HashMap<IndexId, usize> = HashMap::new();
    for mut flat in 0..total {
        for id in all.iter().rev() {
            value.insert(*id, flat % dims[id]);
            flat /= dims[id];
        }
        let ma: Vec<usize> = a.indices().iter().map(|ix| value[&ix.id]).collect();
        let mb: Vec<usize> = b.indices().iter().map(|ix| value[&ix.id]).collect();
        let mut pos = 0;
        for ix in &free {
            pos = pos * ix.dim + value[&ix.id];
        }
        out[pos] += a.get(&ma).unwrap() * b.get(&mb).unwrap();
    }
    DenseTensor::new(free, out).unwrap()
}

#[test]
fn identity_times_vector() {
    let id = t(&[(0, 2), (1, 2)], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let v = t(&[(1, 2)], vec![c(3., 1.), c(-2., 0.5)]);
    let r = contract_pair(&id, &v).unwrap();
    assert_eq!(r.indices()[0].id, IndexId(0));
    assert_eq!(r.data(), v.data());
}

#[test]
fn dot_product() {
    let a = t(&[(0, 2)], vec![c(1., 0.), c(2., 0.)]);
    let b = t(&[(0, 2)], vec![c(3., 0.), c(4., 0.)]);
    let r = contract_pair(&a, &b).unwrap();
    assert_eq!(r.rank(), 0);
    assert_eq!(r.data()[0], c(11., 0.));
}

#[test]
fn rank3_times_rank2_matches_loops() {
    let a = t(&[(0, 2), (1, 2), (2, 2)], (0..8).map(|i| c(i as f64 * 0.3 - 1.0, 0.1 * i as f64)).collect());
    let b = t(&[(1, 2), (3, 2)], (0..4).map(|i| c(0.7 - i as f64, 0.2)).collect());
    let r = contract_pair(&a, &b).unwrap();
    let o = loop_oracle(&a, &b);
    assert_eq!(r.indices(), o.indices());
    assert!(max_abs(r.data(), o.data()) < 1e-12);
}

#[test]
fn fix_examples() {
    let v = t(&[(0, 2)], vec![c(5., 1.), c(7., 0.)]);
    assert_eq!(fix_index(&v, IndexId(0), 0).unwrap().data(), &[c(5., 1.)]);
    let id = t(&[(0, 2), (1, 2)], vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let row = fix_index(&id, IndexId(0), 1).unwrap();
    assert_eq!(row.data(), &[c(0., 0.), c(1., 0.)]);
    assert_eq!(fix_index(&v, IndexId(9), 0), Err(TensorError::MissingIndex(IndexId(9))));
}

#[test]
fn fixing_everything_is_a_flat_lookup() {
    let data: Vec<C64> = (0..16).map(|i| c(i as f64, -(i as f64))).collect();
    let x = t(&[(10, 2), (11, 2), (12, 2), (13, 2)], data.clone());
    for flat in 0..16usize {
        let bits: Vec<usize> = (0..4).map(|k| (flat >> (3 - k)) & 1).collect();
        let fixes: Vec<(IndexId, usize)> = bits.iter().enumerate().map(|(k, &v)| (IndexId(10 + k as u32), v)).collect();
        let s = fix_indices(&x, &fixes).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.data()[0], data[flat]);
    }
}

#[test]
fn pair_cost_examples() {
    let sq = |ids: &[u32]| ids.iter().map(|&i| Index::new(i, 2)).collect::<Vec<_>>();
    assert_eq!(pair_cost(&sq(&[0, 1]), &sq(&[1, 2])), 8);
    assert_eq!(pair_cost(&sq(&[0]), &sq(&[1])), 4);
    let a: Vec<u32> = (0..20).collect();
    let b: Vec<u32> = (14..22).collect();
    assert_eq!(pair_cost(&sq(&a), &sq(&b)), 1 << 22);
}

#[test]
fn dim_mismatch_and_capacity_errors() {
    let a = t(&[(0, 2)], vec![c(1., 0.); 2]);
    let b = t(&[(0, 3)], vec![c(1., 0.); 3]);
    assert!(matches!(contract_pair(&a, &b), Err(TensorError::DimMismatch { .. })));
    let x = t(&[(0, 2), (1, 2)], vec![c(1., 0.); 4]);
    let y = t(&[(2, 2), (3, 2)], vec![c(1., 0.); 4]);
    let err = contract_pair_capped(&x, &y, 8).unwrap_err();
    assert_eq!(err, TensorError::Capacity { elements: 16, cap: 8 });
    assert!(err.to_string().contains("slice"));
}

/// Two tensors with `s` shared, `fa` and `fb` free indices of dims 1..=3.
fn pair_strategy() -> impl Strategy<Value = (DenseTensor, DenseTensor)> {
    (0usize..=3, 0usize..=3, 0usize..=3)
        .prop_filter("total rank at most 8", |(s, fa, fb)| s + fa + fb <= 8 && s + fa + fb > 0)
        .prop_flat_map(|(s, fa, fb)| {
            let n = s + fa + fb;
            (Just((s, fa, fb)), prop::collection::vec(1usize..=3, n), any::<u64>())
        })
        .prop_map(|((s, fa, fb), dims, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            // ids 0..s shared, then a's free, then b's free; shuffle positions on each tensor
            let mut a_ids: Vec<u32> = (0..s as u32).chain(s as u32..(s + fa) as u32).collect();
            let mut b_ids: Vec<u32> = (0..s as u32).chain((s + fa) as u32..(s + fa + fb) as u32).collect();
            for ids in [&mut a_ids, &mut b_ids] {
                for i in (1..ids.len()).rev() {
                    ids.swap(i, rng.gen_range(0..=i));
                }
            }
            let mk = |ids: &[u32], rng: &mut rand_chacha::ChaCha8Rng| {
                let idx: Vec<Index> = ids.iter().map(|&i| Index::new(i, dims[i as usize])).collect();
                let len: usize = idx.iter().map(|ix| ix.dim).product();
                let data = (0..len).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                DenseTensor::new(idx, data).unwrap()
            };
            let a = mk(&a_ids, &mut rng);
            let b = mk(&b_ids, &mut rng);
            (a, b)
        })
}

proptest! {
    #[test]
    fn contraction_matches_loop_oracle((a, b) in pair_strategy()) {
        let r = contract_pair(&a, &b).unwrap();
        let o = loop_oracle(&a, &b);
        prop_assert_eq!(r.indices(), o.indices());
        prop_assert!(max_abs(r.data(), o.data()) < 1e-12);
    }

    #[test]
    fn contraction_is_bilinear((a, b) in pair_strategy(), re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let alpha = c(re, im);
        let lhs = contract_pair(&a.scale(alpha), &b).unwrap();
        let rhs = contract_pair(&a, &b).unwrap().scale(alpha);
        prop_assert!(max_abs(lhs.data(), rhs.data()) < 1e-12);
    }

    #[test]
    fn fixing_commutes_with_contraction((a, b) in pair_strategy(), pick in any::<prop::sample::Index>(), v in 0usize..3) {
        let free: Vec<&Index> = a.indices().iter().filter(|ix| !b.has_index(ix.id)).collect();
        prop_assume!(!free.is_empty());
        let ix = *free[pick.index(free.len())];
        let v = v % ix.dim;
        let lhs = fix_index(&contract_pair(&a, &b).unwrap(), ix.id, v).unwrap();
        let rhs = contract_pair(&fix_index(&a, ix.id, v).unwrap(), &b).unwrap();
        prop_assert_eq!(lhs.indices(), rhs.indices());
        prop_assert!(max_abs(lhs.data(), rhs.data()) < 1e-12);
    }

    #[test]
    fn pair_cost_is_symmetric((a, b) in pair_strategy()) {
        prop_assert_eq!(pair_cost(a.indices(), b.indices()), pair_cost(b.indices(), a.indices()));
    }

    #[test]
    fn kernel_count_is_pair_cost((a, b) in pair_strategy()) {
        let r = contract_pair_capped(&a, &b, 1 << 20).unwrap();
        prop_assert_eq!(r.multiplications as u128, pair_cost(a.indices(), b.indices()));
    }
}
