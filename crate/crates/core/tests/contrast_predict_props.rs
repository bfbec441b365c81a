use std::collections::BTreeSet;

use dpm_core::annotation::{DASequence, DASymbol};
use dpm_core::contrast::contrast;
use dpm_core::predict::{featurize, loocv, predict_label, train_tree, FeatureKind, TreeParams};
use dpm_core::spm::{mine, support_count, MiningParams, SequenceDatabase, SymbolTable};
use proptest::prelude::*;

const CODES: [&str; 4] = ["Q", "R", "F", "M"];

fn sym(i: u8) -> DASymbol {
    DASymbol::new(if i.is_multiple_of(2) { "t" } else { "s" }, CODES[(i / 2) as usize % 4])
}

fn arb_sequences(label: &'static str) -> impl Strategy<Value = Vec<DASequence>> {
    prop::collection::vec(prop::collection::vec(0u8..6, 1..9), 2..7).prop_map(move |seqs| {
        seqs.into_iter()
            .enumerate()
            .map(|(i, s)| DASequence {
                session_id: format!("{label}{i}"),
                group_label: Some(label.to_string()),
                symbols: s.into_iter().map(sym).collect(),
            })
            .collect()
    })
}

fn shared_table(a: &[DASequence], b: &[DASequence]) -> SymbolTable {
    SymbolTable::from_symbols(a.iter().chain(b).flat_map(|s| s.symbols.iter().map(DASymbol::render)))
}

fn db(table: &SymbolTable, seqs: &[DASequence]) -> SequenceDatabase {
    let raw: Vec<(String, Vec<String>)> = seqs
        .iter()
        .map(|s| (s.session_id.clone(), s.symbols.iter().map(DASymbol::render).collect()))
        .collect();
    SequenceDatabase::with_table(table.clone(), &raw).unwrap()
}

fn keys(entries: &[dpm_core::contrast::ContrastEntry]) -> BTreeSet<Vec<u32>> {
    entries.iter().map(|e| e.pattern.clone()).collect()
}

fn patterns_of(seqs: &[DASequence]) -> Vec<Vec<DASymbol>> {
    let mut out = BTreeSet::new();
    for s in seqs {
        for w in s.symbols.windows(2) {
            out.insert(w.to_vec());
        }
    }
    out.into_iter().collect()
}

proptest! {
    #[test]
    fn contrast_partitions_the_frequent_sets(a in arb_sequences("A"), b in arb_sequences("B"), gap in prop::option::of(1usize..3)) {
        let table = shared_table(&a, &b);
        let (da, dbb) = (db(&table, &a), db(&table, &b));
        let params = MiningParams { max_gap: gap, ..Default::default() };
        let r = contrast(&da, &dbb, &params, "A", "B").unwrap();
        let fa: BTreeSet<_> = mine(&da, &params).unwrap().patterns.into_iter().map(|p| p.symbols).collect();
        let fb: BTreeSet<_> = mine(&dbb, &params).unwrap().patterns.into_iter().map(|p| p.symbols).collect();
        prop_assert_eq!(keys(&r.unique_to_a), &fa - &fb);
        prop_assert_eq!(keys(&r.unique_to_b), &fb - &fa);
        prop_assert_eq!(keys(&r.shared), &fa & &fb);
        for e in r.unique_to_a.iter().chain(&r.unique_to_b).chain(&r.shared) {
            prop_assert_eq!(e.support_a, support_count(&da, &e.pattern, gap).unwrap().0);
            prop_assert_eq!(e.support_b, support_count(&dbb, &e.pattern, gap).unwrap().0);
        }
    }

    #[test]
    fn swapping_groups_mirrors_the_report(a in arb_sequences("A"), b in arb_sequences("B")) {
        let table = shared_table(&a, &b);
        let (da, dbb) = (db(&table, &a), db(&table, &b));
        let params = MiningParams::default();
        let ab = contrast(&da, &dbb, &params, "A", "B").unwrap();
        let ba = contrast(&dbb, &da, &params, "B", "A").unwrap();
        prop_assert_eq!(keys(&ab.unique_to_a), keys(&ba.unique_to_b));
        prop_assert_eq!(keys(&ab.shared), keys(&ba.shared));
    }

    #[test]
    fn presence_matches_support(a in arb_sequences("A"), b in arb_sequences("B"), gap in prop::option::of(1usize..3)) {
        let all: Vec<DASequence> = a.iter().chain(&b).cloned().collect();
        let pats = patterns_of(&all);
        let m = featurize(&all, &pats, gap).unwrap();
        let table = shared_table(&a, &b);
        let d = db(&table, &all);
        for (j, col) in m.columns.iter().enumerate() {
            let ids = table.encode(&col.iter().map(DASymbol::render).collect::<Vec<_>>()).unwrap();
            let (_, supporters) = support_count(&d, &ids, gap).unwrap();
            for row in &m.rows {
                prop_assert_eq!(row.presence[j] == 1, supporters.contains(&row.session_id));
                prop_assert!((0.0..=1.0).contains(&row.frequency[j]));
                prop_assert_eq!(row.presence[j] == 1, row.frequency[j] > 0.0);
            }
        }
    }

    #[test]
    fn training_is_deterministic_and_depth_bounded(a in arb_sequences("A"), b in arb_sequences("B"), depth in 0usize..4) {
        let all: Vec<DASequence> = a.iter().chain(&b).cloned().collect();
        let m = featurize(&all, &patterns_of(&all), Some(1)).unwrap();
        let params = TreeParams { max_depth: depth, ..Default::default() };
        let t1 = train_tree(&m, params).unwrap();
        let t2 = train_tree(&m, params).unwrap();
        prop_assert_eq!(t1.to_json(), t2.to_json());
        prop_assert!(t1.depth() <= depth);
        let deeper = train_tree(&m, TreeParams { max_depth: depth + 1, ..params }).unwrap();
        prop_assert!(deeper.training_accuracy(&m) >= t1.training_accuracy(&m));
        let cv1 = loocv(&m, params).unwrap();
        prop_assert_eq!(cv1, loocv(&m, params).unwrap());
    }

    #[test]
    fn presence_trees_ignore_feature_scale(a in arb_sequences("A"), b in arb_sequences("B")) {
        let all: Vec<DASequence> = a.iter().chain(&b).cloned().collect();
        let m = featurize(&all, &patterns_of(&all), Some(1)).unwrap();
        let params = TreeParams { feature: FeatureKind::Presence, ..Default::default() };
        let tree = train_tree(&m, params).unwrap();
        for i in 0..m.rows.len() {
            let row = m.values(i, FeatureKind::Presence);
            let scaled: Vec<f64> = row.iter().map(|v| v * 0.75 + 0.125).collect();
            prop_assert_eq!(predict_label(&tree, &row).unwrap(), predict_label(&tree, &scaled).unwrap());
        }
    }
}
