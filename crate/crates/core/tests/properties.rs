//! Randomized algebraic invariants.

use cartlrc::codec::{self, ErasurePattern, ReceivedWord};
use cartlrc::construct::{interpolate, CoefficientTable};
use cartlrc::{Fe, Field, LrcCode};
use proptest::prelude::*;

const ORDERS: [u64; 6] = [5, 7, 8, 9, 16, 25];

fn elem(f: &Field, v: u64) -> Fe {
    f.element(v % f.q() as u64).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12_000))]

    #[test]
    fn field_axioms(qi in 0..ORDERS.len(), a in 0u64..1000, b in 0u64..1000, c in 0u64..1000) {
        let f = Field::with_order(ORDERS[qi]).unwrap();
        let (a, b, c) = (elem(&f, a), elem(&f, b), elem(&f, c));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
        prop_assert_eq!(f.sub(f.add(a, b), b), a);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
            prop_assert_eq!(f.mul(f.div(b, a).unwrap(), a), b);
        }
    }
}

fn table_strategy(q: usize) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0u64..q as u64, (q - 1) * (q - 1))
}

fn round_trip(q: u64, coeffs: &[u64]) -> Result<(), TestCaseError> {
    let code = LrcCode::build(
        Field::with_order(q).unwrap(),
        if q == 8 { 6 } else { q as usize - 2 },
    )
    .unwrap();
    let f = code.field();
    let side = q as usize - 1;
    let mut table = CoefficientTable::zero(q as usize);
    for (idx, &c) in coeffs.iter().enumerate() {
        table.set(idx / side, idx % side, f.element(c).unwrap());
    }
    let values = table.evaluate_on(f, code.domain());
    prop_assert_eq!(interpolate(f, code.domain(), &values), table);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn interpolation_round_trip_q5(c in table_strategy(5)) { round_trip(5, &c)?; }

    #[test]
    fn interpolation_round_trip_q7(c in table_strategy(7)) { round_trip(7, &c)?; }

    #[test]
    fn interpolation_round_trip_q8(c in table_strategy(8)) { round_trip(8, &c)?; }
}

fn code_strategy() -> impl Strategy<Value = (u64, usize)> {
    prop::sample::select(vec![(5u64, 3usize), (7, 2), (7, 5), (8, 6), (9, 3)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Encoding is linear, and distinct messages give distinct codewords.
    #[test]
    fn encode_linear_and_injective((q, r) in code_strategy(), seed in any::<u64>(), scalar in 0u64..64) {
        use rand::SeedableRng;
        let code = LrcCode::build(Field::with_order(q).unwrap(), r).unwrap();
        let f = code.field();
        let mut rng = rand_pcg::Pcg64::seed_from_u64(seed);
        let m1 = codec::random_message(f, code.k(), &mut rng);
        let m2 = codec::random_message(f, code.k(), &mut rng);
        let a = elem(f, scalar);
        let combo: Vec<Fe> = m1.iter().zip(&m2).map(|(&x, &y)| f.add(f.mul(a, x), y)).collect();
        let c1 = codec::encode(f, code.generator(), &m1).unwrap();
        let c2 = codec::encode(f, code.generator(), &m2).unwrap();
        let cc = codec::encode(f, code.generator(), &combo).unwrap();
        let expect: Vec<Fe> = c1.symbols().iter().zip(c2.symbols()).map(|(&x, &y)| f.add(f.mul(a, x), y)).collect();
        prop_assert_eq!(cc.symbols(), &expect[..]);
        prop_assert_eq!(m1 == m2, c1 == c2);
    }

    /// Every single erasure is repaired exactly, from exactly r reads inside its cell.
    #[test]
    fn local_repair_everywhere((q, r) in code_strategy(), seed in any::<u64>()) {
        use rand::SeedableRng;
        let code = LrcCode::build(Field::with_order(q).unwrap(), r).unwrap();
        let f = code.field();
        let mut rng = rand_pcg::Pcg64::seed_from_u64(seed);
        let cw = codec::encode(f, code.generator(), &codec::random_message(f, code.k(), &mut rng)).unwrap();
        for pos in 0..code.n() {
            let w = ReceivedWord::erased(&cw, &ErasurePattern::new(vec![pos]));
            let store = codec::CountingStore::new(&w);
            let fix = codec::local_repair(&code, &store, pos).unwrap();
            prop_assert_eq!(fix.value, cw.symbols()[pos]);
            prop_assert_eq!(store.read_count(), r);
            let cell = code.domain().cell(code.domain().cell_of(pos));
            prop_assert!(store.reads().iter().all(|p| cell.contains(p) && *p != pos));
        }
        for cell in 0..code.domain().cell_count() {
            prop_assert_eq!(codec::local_check(&code, cw.symbols(), cell), Fe::ZERO);
        }
    }
}
