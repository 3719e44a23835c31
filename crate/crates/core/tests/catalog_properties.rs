mod common;

use std::collections::HashSet;

use common::*;
use prodclarify_core::catalog::{
    generate_synthetic_catalog, summarize, Catalog, FacetId, MatchMode, ProductItem, StructuredQuery, SyntheticSpec,
};
use prodclarify_core::llm_bridge::{to_sql, validate_sql_like, Bindings, PromptSet, Slot};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_catalog(rng: &mut ChaCha8Rng, n: usize) -> Catalog {
    let items = (0..n).map(|i| {
        let mut item = random_item(rng, i, 3);
        item.category = ["Shoes", "Hats", "Bags"][rng.gen_range(0..3)].to_string();
        item
    });
    Catalog::from_items(items).unwrap()
}

fn random_query(rng: &mut ChaCha8Rng) -> StructuredQuery {
    let mut q = StructuredQuery::new(["Shoes", "hats", "BAGS", "Pens"][rng.gen_range(0..4)], rng.gen_range(1..400));
    for facet in FacetId::LIST {
        if rng.gen_bool(0.2) {
            let mode = if rng.gen_bool(0.5) { MatchMode::Exact } else { MatchMode::Substring };
            let values: Vec<String> = (0..rng.gen_range(1..3))
                .map(|_| if mode == MatchMode::Exact { format!("{} {}", facet.as_str(), rng.gen_range(0..8)) } else { rng.gen_range(0..8).to_string() })
                .collect();
            q.add_values(facet, values, mode);
        }
    }
    q
}

fn brute_force<'a>(catalog: &'a Catalog, q: &StructuredQuery) -> Vec<&'a ProductItem> {
    let cat = q.category.to_lowercase();
    let mut hits: Vec<&ProductItem> = catalog
        .items()
        .iter()
        .filter(|it| it.category.to_lowercase() == cat)
        .filter(|it| {
            q.constraints.iter().all(|c| {
                it.values(c.facet).iter().any(|v| {
                    let v = v.to_lowercase();
                    c.values.iter().any(|w| match c.mode {
                        MatchMode::Exact => v == w.to_lowercase(),
                        MatchMode::Substring => v.contains(&w.to_lowercase()),
                    })
                })
            })
        })
        .collect();
    hits.sort_by(|a, b| a.id.cmp(&b.id));
    hits.truncate(q.limit);
    hits
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn execution_matches_full_scan(seed in any::<u64>(), n in 1usize..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let catalog = random_catalog(&mut rng, n);
        for _ in 0..5 {
            let q = random_query(&mut rng);
            let got = catalog.execute(&q);
            prop_assert!(got.len() <= q.limit);
            prop_assert!(got.iter().all(|it| it.category.eq_ignore_ascii_case(&q.category)));
            let got_ids: Vec<&str> = got.iter().map(|i| i.id.as_str()).collect();
            let want: Vec<&str> = brute_force(&catalog, &q).iter().map(|i| i.id.as_str()).collect();
            prop_assert_eq!(got_ids, want);
        }
    }

    #[test]
    fn subset_counts_never_exceed_full_counts(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items: Vec<ProductItem> = (0..n).map(|i| random_item(&mut rng, i, 3)).collect();
        let all: Vec<&ProductItem> = items.iter().collect();
        let subset: Vec<&ProductItem> = items.iter().filter(|_| rng.gen_bool(0.5)).collect();
        let full = summarize(all.iter().copied(), usize::MAX).unwrap();
        let part = summarize(subset.iter().copied(), usize::MAX).unwrap();
        let reference = facet_counts(&all);
        for facet in FacetId::LIST {
            for vc in full.values(facet) {
                prop_assert!(vc.count >= 1 && vc.count <= full.item_count);
                prop_assert_eq!(vc.count, reference[&facet][&vc.value.to_lowercase()]);
            }
            for vc in part.values(facet) {
                let whole = full.values(facet).iter().find(|w| w.value.eq_ignore_ascii_case(&vc.value)).unwrap();
                prop_assert!(vc.count <= whole.count);
            }
            prop_assert_eq!(full.values(facet).is_empty(), !all.iter().any(|it| !it.values(facet).is_empty()));
        }
    }

    #[test]
    fn serialization_round_trip_is_stable(seed in any::<u64>(), n in 1usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = (0..n).map(|i| {
            let mut it = ProductItem::new(format!("x{i}"), "t", "  Shoes ");
            it.color = vec![" Red".into(), "red ".into(), String::new(), "Blue".into()];
            if rng.gen_bool(0.5) {
                it.material = vec!["Canvas".into(), "canvas".into()];
            }
            it
        });
        let once = Catalog::from_items(raw).unwrap();
        let mut buf = Vec::new();
        once.write_jsonl(&mut buf).unwrap();
        let twice = Catalog::read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(once.items(), twice.items());
        let mut buf2 = Vec::new();
        twice.write_jsonl(&mut buf2).unwrap();
        prop_assert_eq!(buf, buf2);
    }

    #[test]
    fn sql_rendering_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_query(&mut rng);
        prop_assert_eq!(validate_sql_like(&to_sql(&q)).unwrap(), StructuredQuery { category: q.category.to_lowercase(), ..q });
    }

    #[test]
    fn rendering_is_injective(a in "[a-z ]{0,12}", b in "[a-z ]{0,12}", qa in "[a-z]{1,6}", qb in "[a-z]{1,6}") {
        let t = &PromptSet::default().query_generation;
        let ra = t.render(&Bindings::new().set(Slot::Category, a.clone()).with_history(vec![(qa.clone(), "x".into())])).unwrap();
        let rb = t.render(&Bindings::new().set(Slot::Category, b.clone()).with_history(vec![(qb.clone(), "x".into())])).unwrap();
        prop_assert_eq!(ra == rb, a == b && qa == qb);
    }
}

#[test]
fn synthetic_catalog_is_separable_and_reproducible() {
    let spec = SyntheticSpec::new(3, 200, 6);
    let a = generate_synthetic_catalog(5, spec).unwrap();
    let b = generate_synthetic_catalog(5, spec).unwrap();
    assert_eq!(a.items(), b.items());
    assert_eq!(a.len(), 600);
    let mut seen = HashSet::new();
    for item in a.items() {
        let key: Vec<(FacetId, Vec<String>)> = FacetId::ALL.iter().map(|&f| (f, item.values(f).to_vec())).collect();
        assert!(seen.insert(key), "duplicate assignment for {}", item.id);
        for f in FacetId::LIST {
            assert!((1..=3).contains(&item.values(f).len()));
        }
    }
    assert!(generate_synthetic_catalog(5, SyntheticSpec::new(1, 10_000, 1)).is_err());
}

#[test]
fn polyester_pants_lookup() {
    let catalog = Catalog::from_items([
        ProductItem::new("p1", "Slim pants", "Casual pants").with(FacetId::Material, &["Polyester fiber"]),
        ProductItem::new("p2", "Cotton pants", "Casual pants").with(FacetId::Material, &["Cotton"]),
        ProductItem::new("s1", "Polyester shirt", "Shirts").with(FacetId::Material, &["Polyester fiber"]),
    ])
    .unwrap();
    let q = validate_sql_like(
        "SELECT * From item WHERE category='Casual pants' AND material LIKE '% polyester fiber%' LIMIT 100;",
    )
    .unwrap();
    let hits: Vec<&str> = catalog.execute(&q).iter().map(|i| i.id.as_str()).collect();
    assert_eq!(hits, ["p1"]);
}
