mod common;

use common::*;
use namedtensor::axes::{compatible, orthogonal, restrict};
use namedtensor::rng::SplitMix64;
use namedtensor::{AxisName, Record, Shape};
use proptest::prelude::*;

fn shape_pair(seed: u64) -> (Shape, Shape) {
    let mut rng = SplitMix64::new(seed);
    let (na, nb) = (1 + rng.below(4), rng.below(4));
    let a = pick_names(&mut rng, &NAMES, na, &[]);
    let b = pick_names(&mut rng, &NAMES, nb, &[]);
    (random_shape(&mut rng, &a, 3), random_shape(&mut rng, &b, 3))
}

#[test]
fn names_and_primes() {
    let name = AxisName::new("seq''").unwrap();
    assert_eq!((name.base(), name.primes()), ("seq", 2));
    assert_eq!(name.primed().as_str(), "seq'''");
    for bad in ["", "'", "a b", "'a", "a-b"] {
        assert!(AxisName::new(bad).is_err(), "{bad}");
    }
}

#[test]
fn canonical_order_sorts_by_base_then_primes() {
    let s = shape(&[("seq'", 2), ("key", 3), ("seq", 4)]);
    let names: Vec<&str> = s.names().map(|n| n.as_str()).collect();
    assert_eq!(names, ["key", "seq", "seq'"]);
}

#[test]
fn restrict_keeps_only_named_axes() {
    let r = Record::new([("height", 2), ("width", 3), ("chans", 1)]).unwrap();
    let s = shape(&[("height", 3), ("width", 3)]);
    assert_eq!(
        restrict(&r, &s).unwrap(),
        Record::new([("height", 2), ("width", 3)]).unwrap()
    );
    let wrong = shape(&[("batch", 2)]);
    assert!(restrict(&r, &wrong).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn compatibility_and_orthogonality_are_symmetric(seed in any::<u64>()) {
        let (s, t) = shape_pair(seed);
        prop_assert_eq!(compatible(&s, &t), compatible(&t, &s));
        prop_assert_eq!(orthogonal(&s, &t), orthogonal(&t, &s));
        if orthogonal(&s, &t) {
            prop_assert!(compatible(&s, &t));
        }
    }

    #[test]
    fn union_exists_exactly_for_compatible_shapes(seed in any::<u64>()) {
        let (s, t) = shape_pair(seed);
        prop_assert_eq!(s.union(&t).is_ok(), compatible(&s, &t));
        if let Ok(u) = s.union(&t) {
            prop_assert_eq!(&u, &t.union(&s).unwrap());
            prop_assert!(s.is_subset_of(&u) && t.is_subset_of(&u));
        }
    }

    #[test]
    fn record_count_is_product_of_sizes(seed in any::<u64>()) {
        let (s, _) = shape_pair(seed);
        let records: Vec<Record> = s.records().collect();
        let product: usize = s.axes().iter().map(|a| a.size).product();
        prop_assert_eq!(records.len(), product);
        for (k, r) in records.iter().enumerate() {
            prop_assert_eq!(s.offset_of(r).unwrap(), k);
            prop_assert_eq!(&s.record_at(k), r);
        }
    }

    #[test]
    fn restriction_is_a_projection(seed in any::<u64>()) {
        let (s, t) = shape_pair(seed);
        prop_assume!(compatible(&s, &t));
        let u = s.union(&t).unwrap();
        for r in u.records() {
            let on_s = restrict(&r, &s).unwrap();
            prop_assert!(s.contains_record(&on_s));
            prop_assert!(on_s.is_subrecord_of(&r));
            prop_assert_eq!(&restrict(&on_s, &s).unwrap(), &on_s);
            let joined = on_s.join(&restrict(&r, &t.difference(&s)).unwrap()).unwrap();
            prop_assert_eq!(joined, r);
        }
    }
}
