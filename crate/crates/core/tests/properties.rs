use std::sync::Arc;

use num_bigint::BigInt;
use proptest::prelude::*;

use morava::cli::parse_element;
use morava::grlie::{gr_bracket, GrElem};
use morava::homalg::{iwasawa_cohomology, ZpModuleWithOperator};
use morava::order::OrderElem;
use morava::padic::{nu_p, CyclicFactor, PadicParams};
use morava::stabilizer::{commutator, filtration_level, gr_project, reduced_norm_padic, s1_split, StabElem};
use morava::witt::{make_ring, FqElem, WittRing};

const SETTINGS: [(u64, usize); 5] = [(2, 2), (3, 2), (5, 2), (2, 3), (3, 3)];

fn rings() -> Vec<Arc<WittRing>> {
    SETTINGS.iter().map(|&(p, n)| make_ring(p, n, 8).unwrap()).collect()
}

fn element(r: &Arc<WittRing>, raw: &[i64]) -> OrderElem {
    let n = r.n();
    let coeffs = (0..n)
        .map(|i| r.elem(raw[i * n..(i + 1) * n].iter().map(|&c| BigInt::from(c)).collect()))
        .collect();
    OrderElem::new(r, coeffs)
}

/// `1 + y S^k` for the given raw coordinates of `y`.
fn level_elem(r: &Arc<WittRing>, raw: &[i64], k: u32) -> StabElem {
    let y = element(r, raw);
    StabElem::new(&OrderElem::one(r) + &(&y * &OrderElem::s_pow(r, k))).unwrap()
}

fn unit(r: &Arc<WittRing>, raw: &[i64]) -> OrderElem {
    let x = element(r, raw);
    if x.is_unit() {
        x
    } else {
        &x + &OrderElem::one(r)
    }
}

fn raw() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1000i64..1000, 9)
}

fn setting() -> impl Strategy<Value = usize> {
    0..SETTINGS.len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplication_is_associative(i in setting(), a in raw(), b in raw(), c in raw()) {
        let r = &rings()[i];
        let (x, y, z) = (element(r, &a), element(r, &b), element(r, &c));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
    }

    #[test]
    fn valuation_is_additive(i in setting(), a in raw(), b in raw(), k in 0u32..4, l in 0u32..4) {
        let r = &rings()[i];
        let x = &unit(r, &a) * &OrderElem::s_pow(r, k);
        let y = &unit(r, &b) * &OrderElem::s_pow(r, l);
        prop_assert_eq!((&x * &y).s_valuation().k, Some(k + l));
    }

    #[test]
    fn display_round_trips(i in setting(), a in raw()) {
        let r = &rings()[i];
        let x = element(r, &a);
        prop_assert_eq!(parse_element(&x.to_string(), r).unwrap(), x.clone());
        prop_assert_eq!(OrderElem::from_json(&x.to_json(), Some(r)).unwrap(), x);
    }

    #[test]
    fn norm_is_multiplicative_and_rational(i in setting(), a in raw(), b in raw()) {
        let r = &rings()[i];
        let (x, y) = (unit(r, &a), unit(r, &b));
        let nx = reduced_norm_padic(&x).unwrap();
        let ny = reduced_norm_padic(&y).unwrap();
        prop_assert_eq!(reduced_norm_padic(&(&x * &y)).unwrap(), nx.mul(&ny));
        prop_assert_eq!(reduced_norm_padic(&x.galois_sigma()).unwrap(), nx);
    }

    #[test]
    fn filtration_is_multiplicative(i in setting(), a in raw(), b in raw(), k in 1u32..5, l in 1u32..5) {
        let r = &rings()[i];
        let (x, y) = (level_elem(r, &a, k), level_elem(r, &b, l));
        prop_assert!(filtration_level(&x.mul(&y).unwrap()).numerator_or_bound() >= k.min(l));
        prop_assert!(filtration_level(&x.inverse()).numerator_or_bound() >= k);
        prop_assert!(filtration_level(&commutator(&x, &y).unwrap()).numerator_or_bound() >= k + l);
    }

    #[test]
    fn gr_is_additive(i in setting(), a in raw(), b in raw(), k in 1u32..5) {
        let r = &rings()[i];
        let (x, y) = (level_elem(r, &a, k), level_elem(r, &b, k));
        let fq = r.residue_field();
        let xy = x.mul(&y).unwrap();
        let sum = |g: &StabElem| gr_project(g).ok().filter(|e| e.k == k).map(|e| e.residue).unwrap_or_else(|| fq.zero());
        prop_assert_eq!(sum(&xy), fq.add(&sum(&x), &sum(&y)));
    }

    #[test]
    fn split_round_trips(i in 0usize..3, a in raw(), b in raw()) {
        let (p, n) = [(3u64, 2usize), (5, 2), (2, 3)][i];
        let r = make_ring(p, n, 8).unwrap();
        let (x, y) = (level_elem(&r, &a, 1), level_elem(&r, &b, 1));
        let (x1, zx) = s1_split(&x).unwrap();
        let (y1, zy) = s1_split(&y).unwrap();
        let z = OrderElem::from_witt(&r.from_padic(&zx));
        prop_assert_eq!(&x1.underlying().clone() * &z, x.underlying().clone());
        prop_assert!(reduced_norm_padic(x1.underlying()).unwrap().value() == &BigInt::from(1));
        let (xy1, zxy) = s1_split(&x.mul(&y).unwrap()).unwrap();
        prop_assert_eq!(zxy, zx.mul(&zy));
        prop_assert_eq!(xy1, x1.mul(&y1).unwrap());
    }

    #[test]
    fn bracket_is_antisymmetric_and_additive(i in setting(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), k in 1u32..7, l in 1u32..7) {
        let r = &rings()[i];
        let fq = r.residue_field();
        let e = |x: u64| -> FqElem { fq.from_index(x % fq.q()) };
        let n = r.n() as u32;
        let (ea, eb, ec) = (e(a), e(b), e(c));
        let ab = gr_bracket(fq, &GrElem::new(k, n, ea.clone()), &GrElem::new(l, n, eb.clone()));
        let ba = gr_bracket(fq, &GrElem::new(l, n, eb.clone()), &GrElem::new(k, n, ea.clone()));
        prop_assert_eq!(ab.k, k + l);
        prop_assert_eq!(&ab.residue, &fq.neg(&ba.residue));
        let ac = gr_bracket(fq, &GrElem::new(k, n, ea.clone()), &GrElem::new(l, n, ec.clone()));
        let a_bc = gr_bracket(fq, &GrElem::new(k, n, ea), &GrElem::new(l, n, fq.add(&eb, &ec)));
        prop_assert_eq!(a_bc.residue, fq.add(&ab.residue, &ac.residue));
    }

    #[test]
    fn iwasawa_h1_of_one_unit(p in prop::sample::select(vec![2u64, 3, 5, 7]), m in 1i64..100_000) {
        let params = PadicParams::new(p, 24).unwrap();
        let lambda = BigInt::from(1) + BigInt::from(p * p) * m;
        let (h0, h1) = iwasawa_cohomology(&ZpModuleWithOperator::scalar(&params, lambda.clone()));
        prop_assert!(h0.is_zero());
        let v = nu_p(&(lambda - 1), p).unwrap();
        prop_assert_eq!(h1.decomp.factors(), &[CyclicFactor::Finite(v)]);
    }
}
