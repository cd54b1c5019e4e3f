use proptest::prelude::*;
use semwiki_core::kb::KnowledgeBase;
use semwiki_core::logic::{parse_formula, print_formula, SymbolKind, SymbolRegistry};
use semwiki_testkit::{rng, terms};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let c = terms::clause(&mut rng(seed));
        let text = print_formula(&c);
        let back = parse_formula(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(back, c);
    }

    #[test]
    fn stored_symbols_are_registered(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut kb = KnowledgeBase::new();
        for _ in 0..8 {
            let _ = kb.assert_clause(terms::clause(&mut r), None);
        }
        for c in kb.clauses() {
            for s in c.symbols() {
                prop_assert!(kb.registry().contains(&s), "{s} missing");
            }
        }
    }

    #[test]
    fn registry_keeps_one_signature_per_name(ops in proptest::collection::vec((0usize..4, 0usize..3, 0usize..3), 1..40)) {
        let kinds = [SymbolKind::Predicate, SymbolKind::Class, SymbolKind::Attribute, SymbolKind::Functor];
        let names = ["s0", "s1", "s2", "s3"];
        let mut reg = SymbolRegistry::default();
        let mut first: std::collections::BTreeMap<&str, (SymbolKind, usize)> = Default::default();
        for (name, kind, arity) in ops {
            let name = names[name];
            let kind = kinds[kind];
            let res = reg.register(name, kind, arity);
            match first.get(name) {
                None => {
                    prop_assert!(res.is_ok());
                    first.insert(name, (kind, arity));
                }
                Some(&(k, a)) => prop_assert_eq!(res.is_ok(), k == kind && a == arity),
            }
            let e = reg.get(name).unwrap();
            prop_assert_eq!((e.kind, e.arity), first[name]);
        }
    }
}
