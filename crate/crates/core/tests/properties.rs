use std::collections::BTreeSet;

use backdoor_core::backdoor::{
    check_backdoor_constraintwise, check_backdoor_naive, find_backdoor_bruteforce,
    find_backdoor_fpt,
};
use backdoor_core::gac::solve_mac;
use backdoor_core::reductions::{gen_single_constraint, HittingSetInstance};
use backdoor_core::{
    BackdoorLimits, ClassExpr, ClassOracle, Constraint, CspInstance, Language, PartialAssignment,
    Relation, SearchLimits, Value,
};
use proptest::prelude::*;

fn relation(arity: usize, d: u32) -> impl Strategy<Value = Relation> {
    prop::collection::vec(prop::collection::vec(0..d, arity), 0..6)
        .prop_map(move |rows| Relation::new(arity, d, rows).unwrap())
}

fn instance() -> impl Strategy<Value = CspInstance> {
    (2usize..=5, 2u32..=3).prop_flat_map(|(n, d)| {
        let constraint = (1usize..=3.min(n)).prop_flat_map(move |arity| {
            (
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                relation(arity, d),
            )
                .prop_map(move |(vars, r)| Constraint::new(vars[..arity].to_vec(), r).unwrap())
        });
        prop::collection::vec(constraint, 1..=3)
            .prop_map(move |cs| CspInstance::new(n, d, cs).unwrap())
    })
}

fn subset_of(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<bool>(), n).prop_map(|bits| {
        bits.iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect()
    })
}

fn oracle(i: usize) -> ClassOracle {
    let expr = match i % 3 {
        0 => ClassExpr::max(),
        1 => ClassExpr::min(),
        _ => ClassExpr::Union(vec![
            ClassExpr::max(),
            ClassExpr::min(),
            ClassExpr::dual_discriminator(),
        ]),
    };
    ClassOracle::new(expr, SearchLimits::default()).unwrap()
}

/// Brute-force satisfiability over all d^n assignments.
fn satisfiable(inst: &CspInstance) -> bool {
    let n = inst.num_vars();
    let d = inst.domain_size();
    let mut values = vec![0 as Value; n];
    loop {
        if inst.is_solution(&values) {
            return true;
        }
        let mut k = n;
        loop {
            if k == 0 {
                return false;
            }
            k -= 1;
            values[k] += 1;
            if values[k] < d {
                break;
            }
            values[k] = 0;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignment_composes(inst in instance(), a in 0u32..3, b in 0u32..3) {
        // assigning x0 then (renumbered) x0 again equals assigning x0 and x1 at once
        let a = a % inst.domain_size();
        let b = b % inst.domain_size();
        let step = inst.apply_assignment(&PartialAssignment::from([(0, a)])).unwrap();
        let twice = step.apply_assignment(&PartialAssignment::from([(0, b)])).unwrap();
        let once = inst.apply_assignment(&PartialAssignment::from([(0, a), (1, b)])).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn membership_is_hereditary(rels in prop::collection::vec((1usize..=2).prop_flat_map(|a| relation(a, 3)), 1..5), which in 0usize..3) {
        let o = oracle(which);
        let lang = Language::new(rels);
        if o.member(&lang).unwrap() {
            for i in 0..lang.len() {
                prop_assert!(o.member(&lang.without(i)).unwrap());
            }
        }
    }

    #[test]
    fn single_tuples_do_not_change_membership(rels in prop::collection::vec(relation(2, 3), 1..4), t in prop::collection::vec(0u32..3, 1..=3), which in 0usize..3) {
        let o = oracle(which);
        let lang = Language::new(rels);
        let single = Relation::new(t.len(), 3, [t]).unwrap();
        prop_assert_eq!(o.member(&lang).unwrap(), o.member(&lang.with(single)).unwrap());
    }

    #[test]
    fn supersets_of_backdoors_are_backdoors(inst in instance(), b in subset_of(5), extra in 0usize..5, which in 0usize..3) {
        let o = oracle(which);
        let l = BackdoorLimits::default();
        let n = inst.num_vars();
        let b: Vec<usize> = b.into_iter().filter(|&x| x < n).collect();
        if check_backdoor_naive(&inst, &b, &o, &l).unwrap() {
            let mut bigger = b.clone();
            bigger.push(extra % n);
            prop_assert!(check_backdoor_naive(&inst, &bigger, &o, &l).unwrap());
        }
    }

    #[test]
    fn checkers_agree(inst in instance(), b in subset_of(5), which in 0usize..3) {
        let o = oracle(which);
        let l = BackdoorLimits::default();
        let b: Vec<usize> = b.into_iter().filter(|&x| x < inst.num_vars()).collect();
        prop_assert_eq!(check_backdoor_naive(&inst, &b, &o, &l).unwrap(), check_backdoor_constraintwise(&inst, &b, &o, &l).unwrap());
    }

    #[test]
    fn detection_is_monotone_in_k(inst in instance(), which in 0usize..3) {
        let o = oracle(which);
        let l = BackdoorLimits::default();
        let h = o.expr().helly_bound().unwrap();
        let mut found_before = false;
        for k in 0..=inst.num_vars() {
            let found = find_backdoor_fpt(&inst, &o, k, h, &l).unwrap().backdoor.is_some();
            prop_assert!(!found_before || found);
            found_before = found;
        }
        prop_assert!(found_before);
    }

    #[test]
    fn brute_force_returns_a_smallest_backdoor(inst in instance(), which in 0usize..3) {
        let o = oracle(which);
        let l = BackdoorLimits::default();
        let b = find_backdoor_bruteforce(&inst, &o, inst.num_vars(), &l).unwrap().backdoor.unwrap();
        prop_assert!(check_backdoor_naive(&inst, &b, &o, &l).unwrap());
        if let Some(smaller) = b.len().checked_sub(1) {
            prop_assert!(find_backdoor_bruteforce(&inst, &o, smaller, &l).unwrap().backdoor.is_none());
        }
    }

    #[test]
    fn solving_preserves_satisfiability(inst in instance()) {
        let sol = solve_mac(&inst);
        prop_assert_eq!(sol.is_some(), satisfiable(&inst));
        if let Some(s) = sol {
            prop_assert!(inst.is_solution(&s));
        }
    }

    #[test]
    fn backdoor_solving_preserves_satisfiability(inst in instance(), which in 0usize..3) {
        let o = oracle(which);
        let l = BackdoorLimits::default();
        let b = find_backdoor_bruteforce(&inst, &o, inst.num_vars(), &l).unwrap().backdoor.unwrap();
        let sol = backdoor_core::backdoor::solve_via_backdoor(&inst, &b, &o, &l).unwrap();
        prop_assert_eq!(sol.is_some(), satisfiable(&inst));
        if let Some(s) = sol {
            prop_assert!(inst.is_solution(&s));
        }
    }

    #[test]
    fn single_constraint_blocks_share_no_values(sets in prop::collection::vec(Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), 0..5), flags in prop::collection::vec(any::<bool>(), 5)) {
        let sets: Vec<Vec<usize>> = sets.into_iter().map(|s| s[..3].to_vec()).collect();
        let hs = HittingSetInstance::new(6, 3, sets).unwrap();
        let g = gen_single_constraint(&hs, &flags[..hs.sets().len()]).unwrap();
        if let Some(c) = g.instance.constraints().first() {
            // each row uses exactly the two values of its own block
            for row in c.relation().tuples() {
                let vals: BTreeSet<Value> = row.iter().copied().collect();
                let lo = *vals.iter().next().unwrap();
                prop_assert!(lo.is_multiple_of(2) && vals.iter().all(|&v| v == lo || v == lo + 1));
            }
            prop_assert_eq!(c.relation().len(), flags[..hs.sets().len()].iter().map(|&f| if f { 3 } else { 2 }).sum::<usize>());
        }
    }
}
