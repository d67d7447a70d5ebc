use polylattice::enumerator::{enumerate, PolyClass};
use std::collections::BTreeMap;

#[test]
fn scratch() {
    for budget in [4u32, 5, 6] {
        let mut by_sp = BTreeMap::<u64, u64>::new();
        for p in enumerate(budget, PolyClass::Cp).unwrap() {
            let s = p.compute_stats();
            *by_sp.entry(s.v + s.h).or_default() += 1;
        }
        println!("CP budget {budget}: sp counts {:?}", by_sp);
    }
    for budget in [5u32, 6] {
        let mut by_sp = BTreeMap::<u64, u64>::new();
        for p in enumerate(budget, PolyClass::Cpu).unwrap() {
            let s = p.compute_stats();
            *by_sp.entry(s.v + s.h).or_default() += 1;
        }
        println!("CPu budget {budget}: sp counts {:?}", by_sp);
    }
}
